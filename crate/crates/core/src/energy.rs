//! Mixing energies, triple-well potentials and the dissipation rate.
//!
//! Label energies (the degenerate family) share the pointwise form
//!
//! ```text
//! W = ∫ ε/2 (a11 |∇φ|² + 2 a12 ∇φ·∇ψ + a22 |∇ψ|²) + v(φ, ψ) / ε
//! ```
//!
//! with coefficients supplied by [`LabelEnergy::local`]. The concentration
//! energy is written directly in `(c, d)` with `c3 = 1 - c - d`.

use crate::coefficients::{gamma1_jet, gamma2_jet, CoefficientError, CoefficientMode};
use crate::dynamics::ChemicalPotentialPair;
use crate::grid::{ScalarField, Spectral};
use crate::params::{derive_capillary, CapillaryCoefficients, ParamError, PotentialParams, SurfaceTensions};
use crate::scalar::{lit, Real};

/// `(s^2 - 1)^2 / 4`
#[inline]
pub fn double_well<T: Real>(s: T) -> T {
    let w = s * s - T::one();
    w * w * lit(0.25)
}

/// `(s^2 - 1) s`
#[inline]
pub fn double_well_prime<T: Real>(s: T) -> T {
    (s * s - T::one()) * s
}

/// Nonlinear potential of the concentration energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialMode<T> {
    /// Pairwise products `sigma_ij c_i^2 c_j^2` only.
    Natural,
    /// Adds the cubic cross term and the sextic triple-junction term.
    Consistent(PotentialParams<T>),
}

/// Triple-well potential `F(c1, c2, c3)` with the three components treated as
/// independent variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripleWell<T> {
    pub sigmas: SurfaceTensions<T>,
    pub cross: [T; 3],
    pub lambda: T,
}

impl<T: Real> TripleWell<T> {
    pub fn new(sigmas: SurfaceTensions<T>, mode: PotentialMode<T>) -> Self {
        let (cross, lambda) = match mode {
            PotentialMode::Natural => ([T::zero(); 3], T::zero()),
            PotentialMode::Consistent(p) => (p.sigma, p.lambda),
        };
        Self {
            sigmas,
            cross,
            lambda,
        }
    }

    pub fn value(&self, c1: T, c2: T, c3: T) -> T {
        let s = &self.sigmas;
        let [x1, x2, x3] = self.cross;
        s.sigma12 * c1 * c1 * c2 * c2
            + s.sigma13 * c1 * c1 * c3 * c3
            + s.sigma23 * c2 * c2 * c3 * c3
            + c1 * c2 * c3 * (x1 * c1 + x2 * c2 + x3 * c3)
            + self.lambda * c1 * c1 * c2 * c2 * c3 * c3
    }

    /// `(dF/dc1, dF/dc2, dF/dc3)`.
    pub fn partials(&self, c1: T, c2: T, c3: T) -> [T; 3] {
        let s = &self.sigmas;
        let [x1, x2, x3] = self.cross;
        let two = lit::<T>(2.0);
        let lin = x1 * c1 + x2 * c2 + x3 * c3;
        let l = two * self.lambda * c1 * c2 * c3;
        [
            two * c1 * (s.sigma12 * c2 * c2 + s.sigma13 * c3 * c3)
                + c2 * c3 * (lin + x1 * c1)
                + l * c2 * c3,
            two * c2 * (s.sigma12 * c1 * c1 + s.sigma23 * c3 * c3)
                + c1 * c3 * (lin + x2 * c2)
                + l * c1 * c3,
            two * c3 * (s.sigma13 * c1 * c1 + s.sigma23 * c2 * c2)
                + c1 * c2 * (lin + x3 * c3)
                + l * c1 * c2,
        ]
    }

    /// The potential written out in label variables, term by term as
    /// displayed for the natural and consistent forms. The consistent form
    /// there carries the cross weights `Sigma_i = chi_i` built in; any other
    /// choice of weights is added back as an explicit correction.
    pub fn value_labels(&self, phi: T, psi: T) -> T {
        let s = &self.sigmas;
        let one = T::one();
        let p = (one + psi) * lit(0.5);
        let wphi = one - phi * phi;
        let wpsi = one - psi * psi;
        let natural = self.cross == [T::zero(); 3] && self.lambda == T::zero();
        if natural {
            let p2 = p * p;
            return (s.sigma12 * p2 * p2 * wphi * wphi
                + (s.sigma13 * (one + phi) * (one + phi) + s.sigma23 * (one - phi) * (one - phi))
                    * lit(0.25)
                    * wpsi
                    * wpsi)
                / lit(16.0);
        }
        let g2 = s.sigma13 * (one + phi) + s.sigma23 * (one - phi) - s.sigma12 * wphi * lit(0.5);
        let displayed = s.sigma12 * p * p * wphi * wphi / lit(16.0)
            + g2 * wpsi * wpsi / lit(32.0)
            + wphi * wpsi * p * p * (s.sigma12 + (s.sigma13 - s.sigma23) * phi) / lit(16.0)
            - s.sigma12 * wpsi * p * (lit::<T>(3.0) + psi) * lit(0.5) * wphi * wphi / lit(64.0)
            + self.lambda * p * p * wphi * wphi * wpsi * wpsi / lit(256.0);
        let chi = s.capillary_raw();
        let dev = [
            self.cross[0] - chi[0],
            self.cross[1] - chi[1],
            self.cross[2] - chi[2],
        ];
        if dev == [T::zero(); 3] {
            return displayed;
        }
        let (c, d) = ((one + phi) * p * lit(0.5), (one - phi) * p * lit(0.5));
        let e = one - p;
        displayed + c * d * e * (dev[0] * c + dev[1] * d + dev[2] * e)
    }
}

/// Gradient and potential contributions of a mixing energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown<T> {
    pub gradient: T,
    pub potential: T,
    pub total: T,
}

impl<T: Real> EnergyBreakdown<T> {
    fn new(gradient: T, potential: T) -> Self {
        Self {
            gradient,
            potential,
            total: gradient + potential,
        }
    }
}

/// Pointwise coefficients of a label energy and their partial derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalTerms<T> {
    pub a11: T,
    pub a12: T,
    pub a22: T,
    /// `d/dphi` of `(a11, a12, a22)`.
    pub da_dphi: [T; 3],
    /// `d/dpsi` of `(a11, a12, a22)`.
    pub da_dpsi: [T; 3],
    pub v: T,
    pub dv_dphi: T,
    pub dv_dpsi: T,
}

/// Energies of the degenerate (label) model family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LabelEnergy<T> {
    /// Interpolated surface-tension coefficients `gamma1(psi)`, `gamma2(phi)`.
    Gamma {
        sigmas: SurfaceTensions<T>,
        mode: CoefficientMode<T>,
    },
    /// The concentration energy pulled back through the change of variables.
    Matching { well: TripleWell<T> },
}

impl<T: Real> LabelEnergy<T> {
    pub fn gamma(sigmas: SurfaceTensions<T>, mode: CoefficientMode<T>) -> Result<Self, CoefficientError> {
        // Surfaces the unequal-tension error of the inconsistent gamma2 early.
        gamma2_jet(T::zero(), sigmas.sigma13, sigmas.sigma23, &mode)?;
        Ok(LabelEnergy::Gamma { sigmas, mode })
    }

    pub fn matching(sigmas: SurfaceTensions<T>, potential: PotentialMode<T>) -> Self {
        LabelEnergy::Matching {
            well: TripleWell::new(sigmas, potential),
        }
    }

    pub fn local(&self, phi: T, psi: T) -> LocalTerms<T> {
        match self {
            LabelEnergy::Gamma { sigmas, mode } => {
                let g1 = gamma1_jet(psi, sigmas.sigma12, mode);
                let g2 = gamma2_jet(phi, sigmas.sigma13, sigmas.sigma23, mode)
                    .expect("validated on construction");
                let (wphi, wpsi) = (double_well(phi), double_well(psi));
                LocalTerms {
                    a11: g1.value,
                    a12: T::zero(),
                    a22: g2.value,
                    da_dphi: [T::zero(), T::zero(), g2.d1],
                    da_dpsi: [g1.d1, T::zero(), T::zero()],
                    v: g1.value * wphi + g2.value * wpsi,
                    dv_dphi: g1.value * double_well_prime(phi) + g2.d1 * wpsi,
                    dv_dpsi: g1.d1 * wphi + g2.value * double_well_prime(psi),
                }
            }
            LabelEnergy::Matching { well } => {
                let s = &well.sigmas;
                let one = T::one();
                let half = lit::<T>(0.5);
                let k = lit::<T>(0.375);
                let p = (one + psi) * half;
                let skew = s.sigma12 * phi + s.sigma13 - s.sigma23;
                let g2 = (s.sigma13 * (one + phi) + s.sigma23 * (one - phi)
                    - s.sigma12 * (one - phi * phi) * half)
                    * half;
                let (c, d) = change_of_variables(phi, psi);
                let f = well.partials(c, d, one - c - d);
                let twelve = lit::<T>(12.0);
                LocalTerms {
                    a11: k * s.sigma12 * p * p,
                    a12: k * half * skew * p,
                    a22: k * g2,
                    da_dphi: [
                        T::zero(),
                        k * half * s.sigma12 * p,
                        k * (s.sigma13 - s.sigma23 + s.sigma12 * phi) * half,
                    ],
                    da_dpsi: [k * s.sigma12 * p, k * lit(0.25) * skew, T::zero()],
                    v: twelve * well.value(c, d, one - c - d),
                    dv_dphi: twelve * (f[0] - f[1]) * p * half,
                    dv_dpsi: twelve
                        * ((f[0] * (one + phi) + f[1] * (one - phi)) * lit(0.25) - f[2] * half),
                }
            }
        }
    }

    /// Potential density `v` used for energy values. For the matching energy
    /// this goes through the label-variable form of the potential, an
    /// independent route from the chain rule used in [`LabelEnergy::local`].
    pub fn potential_density(&self, phi: T, psi: T) -> T {
        match self {
            LabelEnergy::Gamma { .. } => self.local(phi, psi).v,
            LabelEnergy::Matching { well } => lit::<T>(12.0) * well.value_labels(phi, psi),
        }
    }

    /// Upper bounds of `a11` over `psi` and `a22` over `phi` on `[-1, 1]`,
    /// used as the constant coefficients of the implicit splitting.
    pub fn diffusion_bounds(&self) -> [T; 2] {
        use crate::coefficients::sample_max;
        match self {
            LabelEnergy::Gamma { .. } => [
                sample_max(|s| self.local(T::one(), s).a11),
                sample_max(|s| self.local(s, T::one()).a22),
            ],
            LabelEnergy::Matching { .. } => [
                sample_max(|s| self.local(T::zero(), s).a11),
                sample_max(|s| self.local(s, T::zero()).a22),
            ],
        }
    }

    pub fn sigmas(&self) -> &SurfaceTensions<T> {
        match self {
            LabelEnergy::Gamma { sigmas, .. } => sigmas,
            LabelEnergy::Matching { well } => &well.sigmas,
        }
    }

    /// Discrete energy of a label state.
    pub fn energy(
        &self,
        sp: &Spectral<T>,
        phi: &ScalarField<T>,
        psi: &ScalarField<T>,
        epsilon: T,
    ) -> EnergyBreakdown<T> {
        let (px, py) = sp.gradient(phi);
        let (qx, qy) = sp.gradient(psi);
        let two = lit::<T>(2.0);
        let mut grad = T::zero();
        let mut pot = T::zero();
        for k in 0..phi.data().len() {
            let (f, s) = (phi.data()[k], psi.data()[k]);
            let t = self.local(f, s);
            let (fx, fy, sx, sy) = (px.data()[k], py.data()[k], qx.data()[k], qy.data()[k]);
            grad = grad
                + t.a11 * (fx * fx + fy * fy)
                + two * t.a12 * (fx * sx + fy * sy)
                + t.a22 * (sx * sx + sy * sy);
            pot = pot + self.potential_density(f, s);
        }
        let h = phi.grid().cell_area();
        EnergyBreakdown::new(h * grad * epsilon * lit(0.5), h * pot / epsilon)
    }
}

/// `c = (1+phi)/2 (1+psi)/2`, `d = (1-phi)/2 (1+psi)/2`.
#[inline]
pub fn change_of_variables<T: Real>(phi: T, psi: T) -> (T, T) {
    let half = lit::<T>(0.5);
    let p = (T::one() + psi) * half;
    ((T::one() + phi) * half * p, (T::one() - phi) * half * p)
}

/// Energy of the degenerate model with interpolated coefficients.
pub fn energy_degenerate<T: Real>(
    sp: &Spectral<T>,
    phi: &ScalarField<T>,
    psi: &ScalarField<T>,
    sigmas: &SurfaceTensions<T>,
    mode: &CoefficientMode<T>,
    epsilon: T,
) -> Result<EnergyBreakdown<T>, CoefficientError> {
    Ok(LabelEnergy::gamma(*sigmas, *mode)?.energy(sp, phi, psi, epsilon))
}

/// Concentration energy rewritten in label variables.
pub fn energy_matching<T: Real>(
    sp: &Spectral<T>,
    phi: &ScalarField<T>,
    psi: &ScalarField<T>,
    sigmas: &SurfaceTensions<T>,
    potential: PotentialMode<T>,
    epsilon: T,
) -> EnergyBreakdown<T> {
    LabelEnergy::matching(*sigmas, potential).energy(sp, phi, psi, epsilon)
}

/// Energy of the non-degenerate model:
/// `∫ 3/8 ε Σ chi_i |∇c_i|² + 12/ε F(c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcentrationEnergy<T> {
    pub capillary: CapillaryCoefficients<T>,
    pub well: TripleWell<T>,
}

impl<T: Real> ConcentrationEnergy<T> {
    pub fn new(sigmas: SurfaceTensions<T>, potential: PotentialMode<T>) -> Result<Self, ParamError> {
        Ok(Self {
            capillary: derive_capillary(&sigmas)?,
            well: TripleWell::new(sigmas, potential),
        })
    }

    pub fn energy(
        &self,
        sp: &Spectral<T>,
        c: &ScalarField<T>,
        d: &ScalarField<T>,
        epsilon: T,
    ) -> EnergyBreakdown<T> {
        let (cx, cy) = sp.gradient(c);
        let (dx, dy) = sp.gradient(d);
        let [x1, x2, x3] = self.capillary.chi;
        let mut grad = T::zero();
        let mut pot = T::zero();
        for k in 0..c.data().len() {
            let (gcx, gcy, gdx, gdy) = (cx.data()[k], cy.data()[k], dx.data()[k], dy.data()[k]);
            let (ex, ey) = (gcx + gdx, gcy + gdy);
            grad = grad
                + x1 * (gcx * gcx + gcy * gcy)
                + x2 * (gdx * gdx + gdy * gdy)
                + x3 * (ex * ex + ey * ey);
            let (cc, dd) = (c.data()[k], d.data()[k]);
            pot = pot + self.well.value(cc, dd, T::one() - cc - dd);
        }
        let h = c.grid().cell_area();
        EnergyBreakdown::new(
            h * grad * epsilon * lit(0.375),
            h * pot * lit(12.0) / epsilon,
        )
    }
}

pub fn energy_nondegenerate<T: Real>(
    sp: &Spectral<T>,
    c: &ScalarField<T>,
    d: &ScalarField<T>,
    sigmas: &SurfaceTensions<T>,
    potential: PotentialMode<T>,
    epsilon: T,
) -> Result<EnergyBreakdown<T>, ParamError> {
    Ok(ConcentrationEnergy::new(*sigmas, potential)?.energy(sp, c, d, epsilon))
}

fn lattice<T: Real>(samples: usize) -> impl Iterator<Item = (T, T)> {
    let n = ((samples as f64).sqrt().ceil() as usize).max(2);
    (0..n * n).map(move |k| {
        let (i, j) = (k % n, k / n);
        let u = |m: usize| lit::<T>(-1.0 + 2.0 * m as f64 / (n - 1) as f64);
        (u(i), u(j))
    })
}

/// Largest gap between the `(c, d)` and label-variable forms of the potential
/// over a lattice of `samples` points in `[-1, 1]^2`. The label form assumes
/// the cross weights are the capillary coefficients; nonzero results measure
/// how far `params` is from that choice.
pub fn potential_forms_discrepancy<T: Real>(
    sigmas: &SurfaceTensions<T>,
    mode: PotentialMode<T>,
    samples: usize,
) -> T {
    let well = TripleWell::new(*sigmas, mode);
    let shown = match mode {
        PotentialMode::Natural => well,
        PotentialMode::Consistent(p) => TripleWell::new(
            *sigmas,
            PotentialMode::Consistent(PotentialParams {
                sigma: sigmas.capillary_raw(),
                lambda: p.lambda,
            }),
        ),
    };
    lattice::<T>(samples)
        .map(|(phi, psi)| {
            let (c, d) = change_of_variables(phi, psi);
            (well.value(c, d, T::one() - c - d) - shown.value_labels(phi, psi)).abs()
        })
        .fold(T::zero(), T::max)
}

/// Result of fitting the cross weights `Sigma_i = t * chi_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PinnedPotential<T> {
    pub scale: T,
    pub params: PotentialParams<T>,
    /// Max discrepancy left at the fitted scale.
    pub residual: T,
}

/// Fits the scale `t` in `Sigma_i = t (sigma_ij + sigma_ik - sigma_jk)` that
/// reconciles the two written forms of the consistent potential. The
/// mismatch is affine in `t`, so a least-squares fit over the sample lattice
/// is exact up to rounding.
pub fn pin_cross_weights<T: Real>(sigmas: &SurfaceTensions<T>, lambda: T, samples: usize) -> PinnedPotential<T> {
    let chi = sigmas.capillary_raw();
    let base = TripleWell::new(
        *sigmas,
        PotentialMode::Consistent(PotentialParams {
            sigma: [T::zero(); 3],
            lambda,
        }),
    );
    let shown = TripleWell::new(
        *sigmas,
        PotentialMode::Consistent(PotentialParams { sigma: chi, lambda }),
    );
    let mut ab = T::zero();
    let mut bb = T::zero();
    let mut pairs = Vec::new();
    for (phi, psi) in lattice::<T>(samples) {
        let (c, d) = change_of_variables(phi, psi);
        let e = T::one() - c - d;
        let a = base.value(c, d, e) - shown.value_labels(phi, psi);
        let b = c * d * e * (chi[0] * c + chi[1] * d + chi[2] * e);
        ab = ab + a * b;
        bb = bb + b * b;
        pairs.push((a, b));
    }
    let scale = if bb > T::zero() { -ab / bb } else { T::one() };
    let residual = pairs
        .iter()
        .map(|&(a, b)| (a + scale * b).abs())
        .fold(T::zero(), T::max);
    PinnedPotential {
        scale,
        params: PotentialParams {
            sigma: chi.map(|c| c * scale),
            lambda,
        },
        residual,
    }
}

/// Discrepancy of the scaled family `Sigma_i = t chi_i` at `steps + 1`
/// evenly spaced `t` in `[0, 2]`.
pub fn sweep_cross_weights<T: Real>(
    sigmas: &SurfaceTensions<T>,
    lambda: T,
    samples: usize,
    steps: usize,
) -> Vec<(T, T)> {
    let chi = sigmas.capillary_raw();
    (0..=steps)
        .map(|k| {
            let t = lit::<T>(2.0 * k as f64 / steps as f64);
            let mode = PotentialMode::Consistent(PotentialParams {
                sigma: chi.map(|c| c * t),
                lambda,
            });
            (t, potential_forms_discrepancy(sigmas, mode, samples))
        })
        .collect()
}

/// `∫ m1 |∇ζ1|² + m2 |∇ζ2|²`, the rate at which the gradient flow dissipates
/// energy.
pub fn dissipation_rate<T: Real>(sp: &Spectral<T>, zeta: &ChemicalPotentialPair<T>, mobilities: [T; 2]) -> T {
    mobilities[0] * gradient_norm_sq(sp, &zeta.first) + mobilities[1] * gradient_norm_sq(sp, &zeta.second)
}

/// `∫ |∇f|²`
pub fn gradient_norm_sq<T: Real>(sp: &Spectral<T>, f: &ScalarField<T>) -> T {
    let (gx, gy) = sp.gradient(f);
    let s: T = gx
        .data()
        .iter()
        .zip(gy.data())
        .map(|(&a, &b)| a * a + b * b)
        .sum();
    s * f.grid().cell_area()
}
