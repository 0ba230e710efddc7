//! Numerical studies: third-phase nucleation at a two-phase interface, and
//! the comparison between the label and concentration models.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coefficients::Consistency;
use crate::dynamics::{ModelError, RunStatus, SimState, Simulation, StepError};
use crate::energy::PotentialMode;
pub use crate::energy::change_of_variables;
use crate::grid::{Grid2D, ScalarField};
use crate::params::{Mobilities, ModelKind, ModelSpec, NumericalParams, PotentialParams, SurfaceTensions};
use crate::scalar::{lit, Real};

/// Slack allowed on the simplex constraints by [`inverse_change`].
pub const SIMPLEX_SLACK: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("{label}: no equilibrium before t_end = {t_end:e}")]
    NotConverged { label: String, t_end: f64 },
    #[error("comparison needs matching grids and time steps on both sides")]
    MismatchedPair,
    #[error("concentrations leave the simplex: c + d = {sum:e}")]
    OutsideSimplex { sum: f64 },
}

/// Inverse of [`change_of_variables`]: `psi = 2(c + d) - 1`,
/// `phi = (c - d) / (c + d)`. Where `c + d` is below `floor` the label
/// `phi` is undetermined and set to zero.
pub fn inverse_change<T: Real>(c: T, d: T, floor: T) -> Result<(T, T), ExperimentError> {
    let slack = lit::<T>(SIMPLEX_SLACK);
    let s = c + d;
    if s > T::one() + slack || c < -slack || d < -slack || !s.is_finite() {
        return Err(ExperimentError::OutsideSimplex {
            sum: s.to_f64().unwrap_or(f64::NAN),
        });
    }
    let psi = lit::<T>(2.0) * s - T::one();
    let phi = if s >= floor { (c - d) / s } else { T::zero() };
    Ok((phi, psi))
}

/// Field version of [`change_of_variables`].
pub fn labels_to_concentrations<T: Real>(
    phi: &ScalarField<T>,
    psi: &ScalarField<T>,
) -> (ScalarField<T>, ScalarField<T>) {
    let c = phi.zip_map(psi, |f, s| change_of_variables(f, s).0);
    let d = phi.zip_map(psi, |f, s| change_of_variables(f, s).1);
    (c, d)
}

/// The three relative concentrations of a model state.
pub fn concentrations<T: Real>(
    kind: &ModelKind<T>,
    first: &ScalarField<T>,
    second: &ScalarField<T>,
) -> [ScalarField<T>; 3] {
    let (c, d) = if kind.is_degenerate() {
        labels_to_concentrations(first, second)
    } else {
        (first.clone(), second.clone())
    };
    let e = c.zip_map(&d, |a, b| T::one() - a - b);
    [c, d, e]
}

/// Band-limited random field `offset + amplitude * Σ a_mn cos(...) + b_mn
/// sin(...)` over wave numbers `|m|, |n| <= modes`, normalised so its
/// max-norm deviation from `offset` equals `amplitude`.
pub fn smooth_random_field<T: Real>(
    grid: Grid2D<T>,
    rng: &mut impl Rng,
    modes: i32,
    offset: T,
    amplitude: T,
) -> ScalarField<T> {
    let mut terms = Vec::new();
    for m in -modes..=modes {
        for n in 0..=modes {
            if n == 0 && m <= 0 {
                continue;
            }
            terms.push((m, n, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    let (lx, ly) = (
        grid.lx().to_f64().unwrap_or(1.0),
        grid.ly().to_f64().unwrap_or(1.0),
    );
    let tau = std::f64::consts::TAU;
    let raw = ScalarField::from_fn(grid, |x, y| {
        let (x, y) = (x.to_f64().unwrap_or(0.0), y.to_f64().unwrap_or(0.0));
        let v: f64 = terms
            .iter()
            .map(|&(m, n, a, b)| {
                let t = tau * (m as f64 * x / lx + n as f64 * y / ly);
                a * t.cos() + b * t.sin()
            })
            .sum();
        lit(v)
    });
    let scale = raw.max_abs();
    let k = if scale > T::zero() { amplitude / scale } else { T::zero() };
    raw.map(|v| offset + k * v)
}

/// A smooth random label state with values inside `(-1, 1)`, deterministic
/// in `seed`.
pub fn random_label_state<T: Real>(grid: Grid2D<T>, seed: u64) -> (ScalarField<T>, ScalarField<T>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = smooth_random_field(grid, &mut rng, 3, lit(0.1), lit(0.8));
    let psi = smooth_random_field(grid, &mut rng, 3, lit(0.2), lit(0.7));
    (phi, psi)
}

/// Signed distance to the nearer of two parallel interfaces at `s = 0`
/// (rising) and `s = L / 2` (falling) on a period `L`: a triangle wave.
/// Tanh profiles built on it are exact one-dimensional equilibria up to the
/// `exp(-L / (2 w))` tails at the kinks.
pub fn periodic_distance<T: Real>(s: T, period: T) -> T {
    let q = period * lit(0.25);
    let u = s + q;
    let t = u - period * (u / period).floor() - q;
    if t < q {
        t
    } else {
        period * lit(0.5) - t
    }
}

/// Labels of a phase-3 disk on a flat 1-2 interface: phase 1 above
/// `interface_y`, phase 2 below, tanh profiles of width `w`.
pub fn disk_on_interface<T: Real>(
    grid: Grid2D<T>,
    w: T,
    interface_y: T,
    center: (T, T),
    radius: T,
) -> (ScalarField<T>, ScalarField<T>) {
    let ly = grid.ly();
    let (cx, cy) = center;
    let phi = ScalarField::from_fn(grid, |_, y| (periodic_distance(y - interface_y, ly) / w).tanh());
    let psi = ScalarField::from_fn(grid, |x, y| {
        let r = ((x - cx) * (x - cx) + (y - cy) * (y - cy)).sqrt();
        ((r - radius) / w).tanh()
    });
    (phi, psi)
}

/// Setup of the nucleation study shared by every parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuspSetup<T> {
    /// Grid, domain, time control, `epsilon`, `alpha` and stabilisation.
    /// `alpha` is recomputed as `3 + epsilon` when `alpha_offset` is set.
    pub numerics: NumericalParams<T>,
    pub alpha_offset: Option<T>,
    pub mobilities: Mobilities<T>,
    /// Max-norm of the zero-mean perturbation added to `psi = 1`.
    pub perturbation: T,
    pub seed: u64,
    /// Fail with [`ExperimentError::NotConverged`] if `t_end` is reached.
    pub require_equilibrium: bool,
}

impl<T: Real> CuspSetup<T> {
    /// Quasi one-dimensional strip `[0, 1] x [0, 1/2]` with two vertical
    /// interfaces.
    pub fn strip(epsilon: T) -> Self {
        let mut n = NumericalParams::with_epsilon(epsilon);
        n.nx = 256;
        n.ny = 8;
        n.lx = T::one();
        n.ly = lit(0.5);
        n.dt = lit(1e-5);
        n.t_end = lit(0.5);
        n.equilibrium_tol = lit(1e-6);
        n.output_every = 1000;
        Self {
            numerics: n,
            alpha_offset: Some(T::zero()),
            mobilities: Mobilities::default(),
            perturbation: lit(1e-3),
            seed: 7,
            require_equilibrium: false,
        }
    }

    pub fn with_epsilon(&self, epsilon: T) -> Self {
        let mut s = *self;
        s.numerics.epsilon = epsilon;
        s
    }

    pub fn spec(&self, ratio: T, consistency: Consistency) -> ModelSpec<T> {
        let mut numerics = self.numerics;
        if let Some(off) = self.alpha_offset {
            numerics.alpha = lit::<T>(3.0) + numerics.epsilon + off;
        }
        ModelSpec {
            kind: ModelKind::Degenerate(consistency),
            sigmas: SurfaceTensions::new(ratio, T::one(), T::one()),
            numerics,
            mobilities: self.mobilities,
        }
    }
}

/// Outcome of one nucleation run.
#[derive(Clone, Debug)]
pub struct CuspResult<T> {
    pub ratio: T,
    pub epsilon: T,
    pub consistency: Consistency,
    /// `max (1 - psi) / 2`.
    pub cusp_height: T,
    /// `|sigma12 - W / (2 Ly)| / sigma12` at the final state.
    pub relative_energy_loss: T,
    /// Full width at half maximum of `(1 - psi) / 2` across the interface.
    pub cusp_width: T,
    pub status: RunStatus,
    pub steps: usize,
    pub final_state: SimState<T>,
    pub history: Vec<crate::dynamics::DiagnosticsRecord<T>>,
}

impl<T: Real> CuspResult<T> {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    pub const CSV_HEADER: &'static str =
        "ratio,epsilon,consistency,cusp_height,relative_energy_loss,cusp_width,converged,steps,time";

    pub fn csv_row(&self) -> String {
        let f = |x: T| format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN));
        format!(
            "{},{},{},{},{},{},{},{},{}",
            f(self.ratio),
            f(self.epsilon),
            match self.consistency {
                Consistency::Consistent => "consistent",
                Consistency::Inconsistent => "inconsistent",
            },
            f(self.cusp_height),
            f(self.relative_energy_loss),
            f(self.cusp_width),
            self.converged(),
            self.steps,
            f(self.final_state.time),
        )
    }
}

/// Initial labels of the nucleation study: two flat `phi` interfaces at
/// `x = Lx/4` and `x = 3Lx/4` with the equilibrium profile, third phase
/// absent up to a small zero-mean perturbation varying along `x`.
pub fn cusp_initial_state<T: Real>(setup: &CuspSetup<T>, grid: Grid2D<T>) -> (ScalarField<T>, ScalarField<T>) {
    let eps = setup.numerics.epsilon;
    let lx = grid.lx();
    let w = T::SQRT_2() * eps;
    let quarter = lx * lit(0.25);
    let phi = ScalarField::from_fn(grid, |x, _| (periodic_distance(x - quarter, lx) / w).tanh());
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let waves: Vec<(f64, f64)> = (0..8)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let wave = |x: T| -> T {
        let t = std::f64::consts::TAU * (x / lx).to_f64().unwrap_or(0.0);
        lit(waves
            .iter()
            .enumerate()
            .map(|(m, &(a, b))| a * ((m + 1) as f64 * t).cos() + b * ((m + 1) as f64 * t).sin())
            .sum::<f64>())
    };
    let row: Vec<T> = (0..grid.nx()).map(|i| wave(grid.x(i))).collect();
    let peak = row.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let k = if peak > T::zero() { setup.perturbation / peak } else { T::zero() };
    let psi = ScalarField::from_fn(grid, |x, _| T::one() + k * wave(x));
    (phi, psi)
}

/// Width of the region around the maximum of `h` (along the first grid row)
/// where `h` stays above half its peak, with linear interpolation at both
/// crossings.
pub fn full_width_half_max<T: Real>(h: &ScalarField<T>) -> T {
    let g = h.grid();
    let n = g.nx();
    let row: Vec<T> = (0..n).map(|i| h.at(i, 0)).collect();
    let (imax, peak) = row
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    if peak <= T::zero() {
        return T::zero();
    }
    let half = peak * lit(0.5);
    let at = |k: isize| row[k.rem_euclid(n as isize) as usize];
    let crossing = |dir: isize| -> T {
        let mut k = imax as isize;
        for _ in 0..n {
            let next = k + dir;
            if at(next) < half {
                let frac = (at(k) - half) / (at(k) - at(next));
                return lit::<T>(k as f64) + frac * lit(dir as f64);
            }
            k = next;
        }
        lit::<T>(k as f64)
    };
    (crossing(1) - crossing(-1)) * g.hx()
}

/// Runs one point of the nucleation study to equilibrium.
pub fn cusp_experiment<T: Real>(
    ratio: T,
    consistency: Consistency,
    setup: &CuspSetup<T>,
) -> Result<CuspResult<T>, ExperimentError> {
    let spec = setup.spec(ratio, consistency);
    let sim = Simulation::new(spec)?;
    let (phi, psi) = cusp_initial_state(setup, *sim.grid());
    let state = sim.initial_state(phi, psi).map_err(ModelError::from)?;
    let out = sim.run_to_equilibrium(state, |_, _| {})?;
    if setup.require_equilibrium && out.status != RunStatus::Converged {
        return Err(ExperimentError::NotConverged {
            label: format!("cusp ratio {ratio}"),
            t_end: spec.numerics.t_end.to_f64().unwrap_or(f64::NAN),
        });
    }
    let third = out.state.second.map(|s| (T::one() - s) * lit(0.5));
    let energy = out.history.last().expect("history has the final row").energy.total;
    let per_interface = energy / (lit::<T>(2.0) * sim.grid().ly());
    Ok(CuspResult {
        ratio,
        epsilon: spec.numerics.epsilon,
        consistency,
        cusp_height: third.max().max(T::zero()),
        relative_energy_loss: (ratio - per_interface).abs() / ratio,
        cusp_width: full_width_half_max(&third),
        status: out.status,
        steps: out.state.step,
        final_state: out.state,
        history: out.history,
    })
}

/// Nucleation study repeated over a list of interface widths.
pub fn epsilon_robustness<T: Real>(
    ratio: T,
    consistency: Consistency,
    eps_list: &[T],
    setup: &CuspSetup<T>,
) -> Result<Vec<CuspResult<T>>, ExperimentError> {
    eps_list
        .iter()
        .map(|&eps| cusp_experiment(ratio, consistency, &setup.with_epsilon(eps)))
        .collect()
}

/// Geometry of the comparison study: a disk of phase 3 sitting on a flat
/// interface between phases 1 (above) and 2 (below).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareSetup<T> {
    pub numerics: NumericalParams<T>,
    /// Mobility `M0` of the concentration model; label models use
    /// `M1 = M2 = 2 M0`, which reproduces the same binary-interface motion.
    pub m0: T,
    pub interface_y: T,
    pub disk_center: (T, T),
    pub disk_radius: T,
}

impl<T: Real> CompareSetup<T> {
    pub fn standard(epsilon: T) -> Self {
        let mut n = NumericalParams::with_epsilon(epsilon);
        n.dt = lit(1e-6);
        n.t_end = lit(2e-3);
        n.output_every = 100;
        Self {
            numerics: n,
            m0: T::one(),
            interface_y: lit(0.5),
            disk_center: (lit(0.5), lit(0.5)),
            disk_radius: lit(0.15),
        }
    }

    /// Concentration model with the consistent potential, cross weights
    /// equal to the capillary coefficients and no sextic term.
    pub fn concentration_spec(&self) -> ModelSpec<T> {
        let sigmas = SurfaceTensions::uniform(T::one());
        ModelSpec {
            kind: ModelKind::NonDegenerate(PotentialMode::Consistent(PotentialParams {
                sigma: sigmas.capillary_raw(),
                lambda: T::zero(),
            })),
            sigmas,
            numerics: self.numerics,
            mobilities: Mobilities::new(self.m0, self.m0, self.m0),
        }
    }

    fn label_numerics(&self, epsilon: T) -> NumericalParams<T> {
        let mut n = self.numerics;
        n.epsilon = epsilon;
        n.alpha = lit::<T>(3.0) + epsilon;
        // Half the concentration stabilisation gives the same binary update.
        let conc = Simulation::on_grid(
            self.concentration_spec(),
            crate::grid::Spectral::new(Grid2D::new(n.nx, n.ny, n.lx, n.ly).expect("validated grid")),
        )
        .expect("valid concentration spec");
        n.stabilization = Some(conc.stabilization() * lit(0.5));
        n
    }

    /// Label model with the concentration energy rewritten in labels.
    pub fn matching_spec(&self) -> ModelSpec<T> {
        let c = self.concentration_spec();
        let potential = match c.kind {
            ModelKind::NonDegenerate(p) => p,
            _ => unreachable!(),
        };
        let m = lit::<T>(2.0) * self.m0;
        ModelSpec {
            kind: ModelKind::DegenerateMatching(potential),
            sigmas: c.sigmas,
            numerics: self.label_numerics(self.numerics.epsilon),
            mobilities: Mobilities::new(m, m, self.m0),
        }
    }

    /// Label model with consistent interpolated coefficients. Its interface
    /// profile `tanh(x / (sqrt 2 eps'))` matches the concentration profile
    /// `tanh(2x / eps)` for `eps' = eps / (2 sqrt 2)`.
    pub fn consistent_spec(&self) -> ModelSpec<T> {
        let eps = self.numerics.epsilon / (lit::<T>(2.0) * T::SQRT_2());
        let m = lit::<T>(2.0) * self.m0;
        ModelSpec {
            kind: ModelKind::Degenerate(Consistency::Consistent),
            sigmas: SurfaceTensions::uniform(T::one()),
            numerics: self.label_numerics(eps),
            mobilities: Mobilities::new(m, m, self.m0),
        }
    }

    /// Common initial labels, with the concentration-model profile width.
    pub fn initial_labels(&self, grid: Grid2D<T>) -> (ScalarField<T>, ScalarField<T>) {
        disk_on_interface(
            grid,
            self.numerics.epsilon * lit(0.5),
            self.interface_y,
            self.disk_center,
            self.disk_radius,
        )
    }
}

/// Difference series of two runs started from the same mapped state.
#[derive(Clone, Debug)]
pub struct ComparisonResult<T> {
    pub times: Vec<T>,
    /// `||c_i^a - c_i^b||_L2` for the three concentrations.
    pub l2: Vec<[T; 3]>,
    /// `|W_a - W_b| / ((W_a + W_b) / 2)`.
    pub energy_difference: Vec<T>,
    pub energies: Vec<[T; 2]>,
    pub final_states: [SimState<T>; 2],
}

impl<T: Real> ComparisonResult<T> {
    pub const CSV_HEADER: &'static str = "time,l2_c1,l2_c2,l2_c3,energy_a,energy_b,relative_energy_difference";

    pub fn csv_rows(&self) -> Vec<String> {
        let f = |x: T| format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN));
        (0..self.times.len())
            .map(|k| {
                let l = self.l2[k];
                let e = self.energies[k];
                format!(
                    "{},{},{},{},{},{},{}",
                    f(self.times[k]),
                    f(l[0]),
                    f(l[1]),
                    f(l[2]),
                    f(e[0]),
                    f(e[1]),
                    f(self.energy_difference[k])
                )
            })
            .collect()
    }

    pub fn max_l2(&self) -> T {
        self.l2
            .iter()
            .flat_map(|l| l.iter().copied())
            .fold(T::zero(), T::max)
    }

    pub fn max_energy_difference(&self) -> T {
        self.energy_difference.iter().copied().fold(T::zero(), T::max)
    }
}

fn l2_distance<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> T {
    let s: T = a.data().iter().zip(b.data()).map(|(&x, &y)| (x - y) * (x - y)).sum();
    (s * a.grid().cell_area()).sqrt()
}

fn initial_fields<T: Real>(
    kind: &ModelKind<T>,
    phi: &ScalarField<T>,
    psi: &ScalarField<T>,
) -> (ScalarField<T>, ScalarField<T>) {
    if kind.is_degenerate() {
        (phi.clone(), psi.clone())
    } else {
        labels_to_concentrations(phi, psi)
    }
}

/// Runs both models in lockstep from the common initial state and records
/// their differences every `output_every` steps of the first model.
pub fn comparison_experiment<T: Real>(
    pair: (ModelSpec<T>, ModelSpec<T>),
    setup: &CompareSetup<T>,
) -> Result<ComparisonResult<T>, ExperimentError> {
    let (a, b) = pair;
    let (na, nb) = (&a.numerics, &b.numerics);
    if (na.nx, na.ny, na.lx, na.ly, na.dt, na.t_end) != (nb.nx, nb.ny, nb.lx, nb.ly, nb.dt, nb.t_end) {
        return Err(ExperimentError::MismatchedPair);
    }
    let sim_a = Simulation::new(a)?;
    let sim_b = Simulation::on_grid(b, sim_a.spectral().clone())?;
    let (phi, psi) = setup.initial_labels(*sim_a.grid());
    let (a1, a2) = initial_fields(&a.kind, &phi, &psi);
    let (b1, b2) = initial_fields(&b.kind, &phi, &psi);
    let mut sa = sim_a.initial_state(a1, a2).map_err(ModelError::from)?;
    let mut sb = sim_b.initial_state(b1, b2).map_err(ModelError::from)?;

    let mut out = ComparisonResult {
        times: Vec::new(),
        l2: Vec::new(),
        energy_difference: Vec::new(),
        energies: Vec::new(),
        final_states: [sa.clone(), sb.clone()],
    };
    let mut record = |sa: &SimState<T>, sb: &SimState<T>| {
        let ca = concentrations(&a.kind, &sa.first, &sa.second);
        let cb = concentrations(&b.kind, &sb.first, &sb.second);
        let wa = sim_a.energy(&sa.first, &sa.second).total;
        let wb = sim_b.energy(&sb.first, &sb.second).total;
        out.times.push(sa.time);
        out.l2.push([0, 1, 2].map(|k| l2_distance(&ca[k], &cb[k])));
        out.energies.push([wa, wb]);
        let mean = (wa + wb) * lit(0.5);
        out.energy_difference.push(if mean > T::zero() {
            (wa - wb).abs() / mean
        } else {
            (wa - wb).abs()
        });
    };
    record(&sa, &sb);
    let every = na.output_every.max(1);
    let end = na.t_end * (T::one() - lit(1e-12));
    while sa.time < end {
        sim_a.step(&mut sa)?;
        // Keep both runs on one time grid even if one side had to shrink dt.
        sb.dt = sa.dt.min(sb.dt);
        sa.dt = sb.dt;
        sim_b.step(&mut sb)?;
        if sa.step % every == 0 || sa.time >= end {
            record(&sa, &sb);
        }
    }
    out.final_states = [sa, sb];
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_corners() {
        assert_eq!(change_of_variables(1.0, 1.0), (1.0, 0.0));
        assert_eq!(change_of_variables(-1.0, 1.0), (0.0, 1.0));
        assert_eq!(change_of_variables(0.3, -1.0), (0.0, 0.0));
    }

    #[test]
    fn inverse_rejects_outside_simplex() {
        assert!(inverse_change(0.7, 0.4, 1e-9).is_err());
        assert!(inverse_change(-0.1, 0.4, 1e-9).is_err());
        assert_eq!(inverse_change(0.0, 0.0, 1e-9).unwrap(), (0.0, -1.0));
        assert!(inverse_change(0.5, 0.5 + 5e-7, 1e-9).is_ok());
    }

    #[test]
    fn fwhm_of_triangle() {
        let g = Grid2D::new(64, 8, 64.0_f64, 8.0).unwrap();
        let f = ScalarField::from_fn(g, |x, _| (1.0 - (x - 32.0).abs() / 8.0).max(0.0));
        assert!((full_width_half_max(&f) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn cusp_initial_state_is_quasi_one_dimensional() {
        let setup = CuspSetup::strip(0.02_f64);
        let g = Grid2D::new(64, 8, 1.0, 0.5).unwrap();
        let (phi, psi) = cusp_initial_state(&setup, g);
        for j in 1..8 {
            for i in 0..64 {
                assert_eq!(phi.at(i, j), phi.at(i, 0));
                assert_eq!(psi.at(i, j), psi.at(i, 0));
            }
        }
        assert!((psi.mean() - 1.0).abs() < 1e-15);
        assert!((psi.max_abs() - 1.0) <= 1.001e-3);
    }

    #[test]
    fn random_states_are_deterministic() {
        let g = Grid2D::new(16, 16, 1.0_f64, 1.0).unwrap();
        assert_eq!(random_label_state(g, 3), random_label_state(g, 3));
        assert_ne!(random_label_state(g, 3).0, random_label_state(g, 4).0);
        let (phi, psi) = random_label_state(g, 9);
        assert!(phi.max() < 1.0 && phi.min() > -1.0 && psi.max() < 1.0 && psi.min() > -1.0);
    }
}
