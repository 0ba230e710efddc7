//! Chemical potentials and the stabilised semi-implicit Cahn-Hilliard step.
//!
//! Each evolved field `u` with mobility `M` obeys `u_t = M Δζ`. The step
//! treats `λ Δ² u + S Δ u` implicitly and everything else explicitly:
//!
//! ```text
//! û' = û - dt M k² ζ̂ / (1 + dt M k² (λ k² + S))
//! ```
//!
//! where `λ` bounds the leading diffusion coefficient of `ζ` and `S` damps
//! the stiff part of the potential. The zero mode is never touched, so the
//! mean of every field is preserved exactly.

use std::fmt;

use thiserror::Error;

use crate::coefficients::CoefficientError;
use crate::energy::{gradient_norm_sq, ConcentrationEnergy, EnergyBreakdown, LabelEnergy};
use crate::grid::{Grid2D, GridError, ScalarField, Spectral};
use crate::params::{validate, ModelKind, ModelSpec, ParamError, ValidationReport};
use crate::scalar::{lit, Real};

/// The two chemical potentials driving the flow: `(ζ_φ, ζ_ψ)` or `(ζ_c, ζ_d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChemicalPotentialPair<T> {
    pub first: ScalarField<T>,
    pub second: ScalarField<T>,
}

/// Chemical potentials of the non-degenerate model, including the third
/// component and the Lagrange multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationPotentials<T> {
    pub pair: ChemicalPotentialPair<T>,
    pub third: ScalarField<T>,
    pub beta: ScalarField<T>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StepError {
    #[error("blow-up at t = {time:e}, step {step}: max-norm exceeded or non-finite after {halvings} step halvings")]
    BlowUp { time: f64, step: usize, halvings: u32 },
}

/// Label energy `∫ ε/2 (a11 |∇φ|² + 2 a12 ∇φ·∇ψ + a22 |∇ψ|²) + v/ε`: its
/// first variation in `φ` and `ψ`.
pub fn label_chemical_potentials<T: Real>(
    sp: &Spectral<T>,
    energy: &LabelEnergy<T>,
    phi: &ScalarField<T>,
    psi: &ScalarField<T>,
    epsilon: T,
) -> ChemicalPotentialPair<T> {
    let (px, py) = sp.gradient(phi);
    let (qx, qy) = sp.gradient(psi);
    let n = phi.data().len();
    let half_eps = epsilon * lit(0.5);
    let two = lit::<T>(2.0);
    let mut flux = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    let mut local_phi = Vec::with_capacity(n);
    let mut local_psi = Vec::with_capacity(n);
    for k in 0..n {
        let t = energy.local(phi.data()[k], psi.data()[k]);
        let (fx, fy, sx, sy) = (px.data()[k], py.data()[k], qx.data()[k], qy.data()[k]);
        flux[0].push(t.a11 * fx + t.a12 * sx);
        flux[1].push(t.a11 * fy + t.a12 * sy);
        flux[2].push(t.a12 * fx + t.a22 * sx);
        flux[3].push(t.a12 * fy + t.a22 * sy);
        let (gp, gq, gx) = (fx * fx + fy * fy, sx * sx + sy * sy, fx * sx + fy * sy);
        let quad = |d: [T; 3]| d[0] * gp + two * d[1] * gx + d[2] * gq;
        local_phi.push(half_eps * quad(t.da_dphi) + t.dv_dphi / epsilon);
        local_psi.push(half_eps * quad(t.da_dpsi) + t.dv_dpsi / epsilon);
    }
    let g = *phi.grid();
    let [f0, f1, f2, f3] = flux.map(|v| ScalarField::from_raw(g, v));
    let div_phi = sp.divergence(&f0, &f1);
    let div_psi = sp.divergence(&f2, &f3);
    let combine = |div: &ScalarField<T>, local: Vec<T>| {
        let data = div
            .data()
            .iter()
            .zip(local)
            .map(|(&d, l)| l - epsilon * d)
            .collect();
        ScalarField::from_raw(g, data)
    };
    ChemicalPotentialPair {
        first: combine(&div_phi, local_phi),
        second: combine(&div_psi, local_psi),
    }
}

/// Chemical potentials `ζ_i = -3/4 ε chi_i Δc_i + 12/ε ∂_i F + β` of the
/// concentration energy, with `β` chosen so that `Σ ζ_i / chi_i = 0`.
pub fn concentration_chemical_potentials<T: Real>(
    sp: &Spectral<T>,
    energy: &ConcentrationEnergy<T>,
    c: &ScalarField<T>,
    d: &ScalarField<T>,
    epsilon: T,
) -> ConcentrationPotentials<T> {
    let lc = sp.laplacian(c);
    let ld = sp.laplacian(d);
    let [x1, x2, x3] = energy.capillary.chi;
    let x0 = energy.capillary.chi0;
    let k = lit::<T>(0.75) * epsilon;
    let w = lit::<T>(12.0) / epsilon;
    let n = c.data().len();
    let mut out = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for i in 0..n {
        let (cc, dd) = (c.data()[i], d.data()[i]);
        let f = energy.well.partials(cc, dd, T::one() - cc - dd);
        let beta = -w * x0 * (f[0] / x1 + f[1] / x2 + f[2] / x3);
        let (a, b) = (lc.data()[i], ld.data()[i]);
        out[0].push(-k * x1 * a + w * f[0] + beta);
        out[1].push(-k * x2 * b + w * f[1] + beta);
        out[2].push(k * x3 * (a + b) + w * f[2] + beta);
        out[3].push(beta);
    }
    let g = *c.grid();
    let [z1, z2, z3, beta] = out.map(|v| ScalarField::from_raw(g, v));
    ConcentrationPotentials {
        pair: ChemicalPotentialPair {
            first: z1,
            second: z2,
        },
        third: z3,
        beta,
    }
}

/// The energy functional a simulation descends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelEnergy<T> {
    Label(LabelEnergy<T>),
    Concentration(ConcentrationEnergy<T>),
}

impl<T: Real> ModelEnergy<T> {
    pub fn from_spec(spec: &ModelSpec<T>) -> Result<Self, ModelError> {
        Ok(match spec.kind {
            ModelKind::Degenerate(_) => {
                ModelEnergy::Label(LabelEnergy::gamma(spec.sigmas, spec.coefficient_mode())?)
            }
            ModelKind::DegenerateMatching(p) => {
                ModelEnergy::Label(LabelEnergy::matching(spec.sigmas, p))
            }
            ModelKind::NonDegenerate(p) => {
                ModelEnergy::Concentration(ConcentrationEnergy::new(spec.sigmas, p)?)
            }
        })
    }
}

/// Time, step counter and the two evolved fields.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState<T> {
    pub time: T,
    pub step: usize,
    pub first: ScalarField<T>,
    pub second: ScalarField<T>,
    /// Current step size; shrinks when steps are rejected.
    pub dt: T,
    /// Halvings spent so far.
    pub halvings: u32,
}

/// One diagnostics row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord<T> {
    pub step: usize,
    pub time: T,
    pub energy: EnergyBreakdown<T>,
    /// Integrals of the two evolved fields.
    pub mass: [T; 2],
    pub dissipation_rate: T,
    pub min: [T; 2],
    pub max: [T; 2],
}

impl<T: Real> DiagnosticsRecord<T> {
    pub const CSV_HEADER: &'static str = "step,time,energy_total,energy_gradient,energy_potential,mass_1,mass_2,dissipation_rate,min_1,max_1,min_2,max_2";

    /// CSV row with 17 significant digits per number.
    pub fn csv_row(&self) -> String {
        let v = [
            self.time,
            self.energy.total,
            self.energy.gradient,
            self.energy.potential,
            self.mass[0],
            self.mass[1],
            self.dissipation_rate,
            self.min[0],
            self.max[0],
            self.min[1],
            self.max[1],
        ];
        let mut row = self.step.to_string();
        for x in v {
            row.push(',');
            row.push_str(&format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN)));
        }
        row
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// Field change rate dropped below the equilibrium tolerance.
    Converged,
    /// `t_end` was reached first.
    ReachedEnd,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "converged",
            RunStatus::ReachedEnd => "reached t_end",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome<T> {
    pub state: SimState<T>,
    pub history: Vec<DiagnosticsRecord<T>>,
    pub status: RunStatus,
}

/// A validated model on a fixed grid with its step coefficients.
#[derive(Clone, Debug)]
pub struct Simulation<T: Real> {
    spec: ModelSpec<T>,
    energy: ModelEnergy<T>,
    spectral: Spectral<T>,
    k2: Vec<T>,
    mobility: [T; 3],
    lambda: [T; 2],
    stabilization: T,
}

impl<T: Real> Simulation<T> {
    pub fn new(spec: ModelSpec<T>) -> Result<Self, ModelError> {
        let report = validate(&spec);
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        let n = &spec.numerics;
        let grid = Grid2D::new(n.nx, n.ny, n.lx, n.ly)?;
        Self::on_grid(spec, Spectral::new(grid))
    }

    /// Like [`Simulation::new`] but reusing existing FFT plans.
    pub fn on_grid(spec: ModelSpec<T>, spectral: Spectral<T>) -> Result<Self, ModelError> {
        let energy = ModelEnergy::from_spec(&spec)?;
        let eps = spec.numerics.epsilon;
        let sigma = spec.sigmas.max();
        let m = &spec.mobilities;
        let (mobility, lambda, default_s) = match &energy {
            ModelEnergy::Label(e) => {
                let [b1, b2] = e.diffusion_bounds();
                let s = match e {
                    LabelEnergy::Gamma { .. } => lit::<T>(2.0),
                    LabelEnergy::Matching { .. } => lit::<T>(6.0),
                };
                ([m.m1, m.m2, T::zero()], [eps * b1, eps * b2], s * sigma / eps)
            }
            ModelEnergy::Concentration(e) => {
                let chi = e.capillary.chi;
                let k = lit::<T>(0.75) * eps;
                (
                    m.per_phase(&e.capillary),
                    [k * chi[0], k * chi[1]],
                    lit::<T>(12.0) * sigma / eps,
                )
            }
        };
        Ok(Self {
            k2: spectral.k_squared(),
            spectral,
            energy,
            mobility,
            lambda,
            stabilization: spec.numerics.stabilization.unwrap_or(default_s),
            spec,
        })
    }

    pub fn spec(&self) -> &ModelSpec<T> {
        &self.spec
    }

    pub fn spectral(&self) -> &Spectral<T> {
        &self.spectral
    }

    pub fn grid(&self) -> &Grid2D<T> {
        self.spectral.grid()
    }

    pub fn model_energy(&self) -> &ModelEnergy<T> {
        &self.energy
    }

    /// Mobilities of the two evolved fields (and of the implicit third
    /// component for the non-degenerate model; zero otherwise).
    pub fn mobilities(&self) -> [T; 3] {
        self.mobility
    }

    pub fn stabilization(&self) -> T {
        self.stabilization
    }

    pub fn initial_state(&self, first: ScalarField<T>, second: ScalarField<T>) -> Result<SimState<T>, GridError> {
        for f in [&first, &second] {
            if f.grid() != self.grid() {
                return Err(GridError::GridMismatch);
            }
            if let Some(k) = f.data().iter().position(|v| !v.is_finite()) {
                return Err(GridError::NonFinite(k));
            }
        }
        Ok(SimState {
            time: T::zero(),
            step: 0,
            first,
            second,
            dt: self.spec.numerics.dt,
            halvings: 0,
        })
    }

    pub fn energy(&self, first: &ScalarField<T>, second: &ScalarField<T>) -> EnergyBreakdown<T> {
        let eps = self.spec.numerics.epsilon;
        match &self.energy {
            ModelEnergy::Label(e) => e.energy(&self.spectral, first, second, eps),
            ModelEnergy::Concentration(e) => e.energy(&self.spectral, first, second, eps),
        }
    }

    pub fn chemical_potentials(&self, first: &ScalarField<T>, second: &ScalarField<T>) -> ChemicalPotentialPair<T> {
        self.potentials_with_third(first, second).0
    }

    fn potentials_with_third(
        &self,
        first: &ScalarField<T>,
        second: &ScalarField<T>,
    ) -> (ChemicalPotentialPair<T>, Option<ScalarField<T>>) {
        let eps = self.spec.numerics.epsilon;
        match &self.energy {
            ModelEnergy::Label(e) => (
                label_chemical_potentials(&self.spectral, e, first, second, eps),
                None,
            ),
            ModelEnergy::Concentration(e) => {
                let z = concentration_chemical_potentials(&self.spectral, e, first, second, eps);
                (z.pair, Some(z.third))
            }
        }
    }

    /// `Σ M_i ∫ |∇ζ_i|²` over every component with its own potential.
    pub fn dissipation_rate(&self, first: &ScalarField<T>, second: &ScalarField<T>) -> T {
        let (pair, third) = self.potentials_with_third(first, second);
        let sp = &self.spectral;
        let mut rate = crate::energy::dissipation_rate(sp, &pair, [self.mobility[0], self.mobility[1]]);
        if let Some(z3) = third {
            rate = rate + self.mobility[2] * gradient_norm_sq(sp, &z3);
        }
        rate
    }

    pub fn diagnostics(&self, state: &SimState<T>) -> DiagnosticsRecord<T> {
        let (a, b) = (&state.first, &state.second);
        DiagnosticsRecord {
            step: state.step,
            time: state.time,
            energy: self.energy(a, b),
            mass: [a.integrate(), b.integrate()],
            dissipation_rate: self.dissipation_rate(a, b),
            min: [a.min(), b.min()],
            max: [a.max(), b.max()],
        }
    }

    fn advance(&self, u: &ScalarField<T>, zeta: &ScalarField<T>, field: usize, dt: T) -> ScalarField<T> {
        let sp = &self.spectral;
        let mut uh = sp.forward(u.data());
        let mut zh = sp.forward(zeta.data());
        if self.spec.numerics.dealias {
            sp.dealias_hat(&mut zh);
        }
        let (m, lam, s) = (self.mobility[field], self.lambda[field], self.stabilization);
        for ((u, z), &k2) in uh.iter_mut().zip(&zh).zip(&self.k2) {
            if k2 == T::zero() {
                continue;
            }
            let a = dt * m * k2;
            *u = *u - *z * (a / (T::one() + a * (lam * k2 + s)));
        }
        ScalarField::from_raw(*u.grid(), sp.inverse(uh))
    }

    /// Advances `state` by one accepted step and returns the max-norm rate
    /// of change `max |u' - u| / dt`. Rejected steps halve `dt` and retry
    /// until the run's halving budget is spent.
    pub fn step(&self, state: &mut SimState<T>) -> Result<T, StepError> {
        let zeta = self.chemical_potentials(&state.first, &state.second);
        let limit = self.spec.numerics.blowup_threshold;
        loop {
            let dt = state.dt;
            let a = self.advance(&state.first, &zeta.first, 0, dt);
            let b = self.advance(&state.second, &zeta.second, 1, dt);
            let ok = [&a, &b].iter().all(|f| f.is_finite() && f.max_abs() <= limit);
            if ok {
                let change = max_change(&state.first, &a).max(max_change(&state.second, &b));
                state.first = a;
                state.second = b;
                state.time = state.time + dt;
                state.step += 1;
                return Ok(change / dt);
            }
            if state.halvings >= self.spec.numerics.max_halvings {
                return Err(StepError::BlowUp {
                    time: state.time.to_f64().unwrap_or(f64::NAN),
                    step: state.step,
                    halvings: state.halvings,
                });
            }
            state.halvings += 1;
            state.dt = dt * lit(0.5);
        }
    }

    /// Steps until the change rate falls below `equilibrium_tol` or `t_end`
    /// is reached. `observe` sees every recorded diagnostics row with the
    /// state it was taken from.
    pub fn run_to_equilibrium(
        &self,
        mut state: SimState<T>,
        mut observe: impl FnMut(&DiagnosticsRecord<T>, &SimState<T>),
    ) -> Result<RunOutcome<T>, StepError> {
        let n = &self.spec.numerics;
        let every = n.output_every.max(1);
        let first = self.diagnostics(&state);
        observe(&first, &state);
        let mut history = vec![first];
        let end = n.t_end * (T::one() - lit(1e-12));
        let status = loop {
            if state.time >= end {
                break RunStatus::ReachedEnd;
            }
            let rate = self.step(&mut state)?;
            let converged = rate < n.equilibrium_tol;
            if state.step % every == 0 || converged {
                let rec = self.diagnostics(&state);
                observe(&rec, &state);
                history.push(rec);
            }
            if converged {
                break RunStatus::Converged;
            }
        };
        if history.last().map(|r| r.step) != Some(state.step) {
            let rec = self.diagnostics(&state);
            observe(&rec, &state);
            history.push(rec);
        }
        Ok(RunOutcome {
            state,
            history,
            status,
        })
    }
}

fn max_change<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> T {
    a.data()
        .iter()
        .zip(b.data())
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

fn spectral_for<T: Real>(spec: &ModelSpec<T>, f: &ScalarField<T>) -> Result<Simulation<T>, ModelError> {
    let report = validate(spec);
    if !report.is_valid() {
        return Err(ModelError::Invalid(report));
    }
    Simulation::on_grid(*spec, Spectral::new(*f.grid()))
}

/// `(ζ_φ, ζ_ψ)` of a degenerate-family model.
pub fn chem_potentials_degenerate<T: Real>(
    phi: &ScalarField<T>,
    psi: &ScalarField<T>,
    spec: &ModelSpec<T>,
) -> Result<ChemicalPotentialPair<T>, ModelError> {
    let sim = spectral_for(spec, phi)?;
    match &sim.energy {
        ModelEnergy::Label(e) => Ok(label_chemical_potentials(
            &sim.spectral,
            e,
            phi,
            psi,
            spec.numerics.epsilon,
        )),
        ModelEnergy::Concentration(_) => Err(ModelError::Invalid(ValidationReport::default())),
    }
}

/// `(ζ_c, ζ_d)` and the Lagrange multiplier `β` of the non-degenerate model.
pub fn chem_potentials_nondegenerate<T: Real>(
    c: &ScalarField<T>,
    d: &ScalarField<T>,
    spec: &ModelSpec<T>,
) -> Result<(ChemicalPotentialPair<T>, ScalarField<T>), ModelError> {
    let sim = spectral_for(spec, c)?;
    match &sim.energy {
        ModelEnergy::Concentration(e) => {
            let z = concentration_chemical_potentials(&sim.spectral, e, c, d, spec.numerics.epsilon);
            Ok((z.pair, z.beta))
        }
        ModelEnergy::Label(_) => Err(ModelError::Invalid(ValidationReport::default())),
    }
}

/// One step of a degenerate-family model from a standalone state.
pub fn step_degenerate<T: Real>(state: &SimState<T>, spec: &ModelSpec<T>) -> Result<SimState<T>, StepError> {
    step_standalone(state, spec)
}

/// One step of the non-degenerate model from a standalone state.
pub fn step_nondegenerate<T: Real>(state: &SimState<T>, spec: &ModelSpec<T>) -> Result<SimState<T>, StepError> {
    step_standalone(state, spec)
}

fn step_standalone<T: Real>(state: &SimState<T>, spec: &ModelSpec<T>) -> Result<SimState<T>, StepError> {
    let sim = spectral_for(spec, &state.first).map_err(|_| StepError::BlowUp {
        time: state.time.to_f64().unwrap_or(f64::NAN),
        step: state.step,
        halvings: 0,
    })?;
    let mut next = state.clone();
    sim.step(&mut next)?;
    Ok(next)
}
