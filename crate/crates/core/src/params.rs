//! Parameter containers, validation and derived constants.

use std::fmt;

use thiserror::Error;

use crate::coefficients::{CoefficientMode, Consistency};
use crate::energy::PotentialMode;
use crate::scalar::{lit, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("capillary coefficient chi{index} vanishes, chi0 is undefined")]
    ZeroCapillary { index: usize },
    #[error("surface tensions must be positive and finite")]
    NonPositiveTension,
}

/// Interface tensions between the three components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceTensions<T> {
    pub sigma12: T,
    pub sigma13: T,
    pub sigma23: T,
}

impl<T: Real> SurfaceTensions<T> {
    pub fn new(sigma12: T, sigma13: T, sigma23: T) -> Self {
        Self {
            sigma12,
            sigma13,
            sigma23,
        }
    }

    pub fn uniform(sigma: T) -> Self {
        Self::new(sigma, sigma, sigma)
    }

    pub fn all_positive(&self) -> bool {
        [self.sigma12, self.sigma13, self.sigma23]
            .iter()
            .all(|s| s.is_finite() && *s > T::zero())
    }

    pub fn max(&self) -> T {
        self.sigma12.max(self.sigma13).max(self.sigma23)
    }

    /// Capillary coefficients `sigma_ij + sigma_ik - sigma_jk`, without the
    /// nonzero check performed by [`derive_capillary`].
    pub fn capillary_raw(&self) -> [T; 3] {
        let (s12, s13, s23) = (self.sigma12, self.sigma13, self.sigma23);
        [s12 + s13 - s23, s12 + s23 - s13, s13 + s23 - s12]
    }

    /// True when some capillary coefficient is not positive. The
    /// non-degenerate model is ill-posed there; the degenerate one is not.
    pub fn is_restricted(&self) -> bool {
        self.capillary_raw().iter().any(|c| *c <= T::zero())
    }
}

/// Capillary coefficients of the concentration model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapillaryCoefficients<T> {
    pub chi: [T; 3],
    /// `(1/chi1 + 1/chi2 + 1/chi3)^-1`
    pub chi0: T,
}

/// Resolves the capillary coefficients from the surface tensions by requiring
/// that every two-phase restriction of the concentration energy reproduces
/// the binary mixing energy.
pub fn derive_capillary<T: Real>(
    sigmas: &SurfaceTensions<T>,
) -> Result<CapillaryCoefficients<T>, ParamError> {
    if !sigmas.all_positive() {
        return Err(ParamError::NonPositiveTension);
    }
    let chi = sigmas.capillary_raw();
    if let Some(k) = chi.iter().position(|c| *c == T::zero()) {
        return Err(ParamError::ZeroCapillary { index: k + 1 });
    }
    let chi0 = T::one() / (chi[0].recip() + chi[1].recip() + chi[2].recip());
    Ok(CapillaryCoefficients { chi, chi0 })
}

/// Constant mobilities. `m1`, `m2` drive the two label fields of the
/// degenerate model; the concentration model uses `m0` with `M_i = m0 / chi_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobilities<T> {
    pub m1: T,
    pub m2: T,
    pub m0: T,
}

impl<T: Real> Mobilities<T> {
    pub fn new(m1: T, m2: T, m0: T) -> Self {
        Self { m1, m2, m0 }
    }

    /// Per-phase mobilities of the concentration model.
    pub fn per_phase(&self, chi: &CapillaryCoefficients<T>) -> [T; 3] {
        chi.chi.map(|c| self.m0 / c)
    }
}

impl<T: Real> Default for Mobilities<T> {
    fn default() -> Self {
        Self::new(T::one(), T::one(), T::one())
    }
}

/// Extra coefficients of the consistent triple-well potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialParams<T> {
    /// Cubic cross-term weights `Sigma_1..3`.
    pub sigma: [T; 3],
    /// Weight of the sextic triple-junction term.
    pub lambda: T,
}

impl<T: Real> Default for PotentialParams<T> {
    fn default() -> Self {
        Self {
            sigma: [T::zero(); 3],
            lambda: T::zero(),
        }
    }
}

/// Discretisation and run-control parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericalParams<T> {
    pub epsilon: T,
    pub alpha: T,
    pub dt: T,
    pub t_end: T,
    pub equilibrium_tol: T,
    pub nx: usize,
    pub ny: usize,
    pub lx: T,
    pub ly: T,
    /// Stabilisation constant; `None` selects the model default.
    pub stabilization: Option<T>,
    /// Diagnostics row every this many steps.
    pub output_every: usize,
    /// Total number of step halvings a run may spend on rejected steps.
    pub max_halvings: u32,
    /// Max-norm above which a step counts as blown up.
    pub blowup_threshold: T,
    /// Apply the 2/3 rule to the explicit chemical potentials before the
    /// update. Off by default: it breaks the exact discrete energy law.
    pub dealias: bool,
}

impl<T: Real> NumericalParams<T> {
    /// Defaults for a given interface width: unit square, 128^2 grid,
    /// `alpha = 3 + epsilon`.
    pub fn with_epsilon(epsilon: T) -> Self {
        Self {
            epsilon,
            alpha: lit::<T>(3.0) + epsilon,
            dt: lit(1e-6),
            t_end: lit(1e-2),
            equilibrium_tol: lit(1e-8),
            nx: 128,
            ny: 128,
            lx: T::one(),
            ly: T::one(),
            stabilization: None,
            output_every: 100,
            max_halvings: 20,
            blowup_threshold: lit(1e3),
            dealias: false,
        }
    }
}

/// Which model and which variant of its energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelKind<T> {
    /// Two independent labels with interpolated surface-tension coefficients.
    Degenerate(Consistency),
    /// Labels evolved with the concentration energy rewritten through the
    /// nonlinear change of variables.
    DegenerateMatching(PotentialMode<T>),
    /// Concentrations with a Lagrange multiplier.
    NonDegenerate(PotentialMode<T>),
}

impl<T> ModelKind<T> {
    pub fn is_degenerate(&self) -> bool {
        !matches!(self, ModelKind::NonDegenerate(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Degenerate(_) => "degenerate",
            ModelKind::DegenerateMatching(_) => "degenerate-matching",
            ModelKind::NonDegenerate(_) => "non-degenerate",
        }
    }
}

/// Complete description of one simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec<T> {
    pub kind: ModelKind<T>,
    pub sigmas: SurfaceTensions<T>,
    pub numerics: NumericalParams<T>,
    pub mobilities: Mobilities<T>,
}

impl<T: Real> ModelSpec<T> {
    pub fn coefficient_mode(&self) -> CoefficientMode<T> {
        let consistency = match self.kind {
            ModelKind::Degenerate(c) => c,
            _ => Consistency::Consistent,
        };
        CoefficientMode {
            consistency,
            alpha: self.numerics.alpha,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Violation {
    NonPositiveTension,
    AlphaTooSmall,
    NonPositiveEpsilon,
    InterfaceUnresolved,
    GridNotPowerOfTwo,
    GridTooSmall,
    BadDomain,
    BadTimeControl,
    NonPositiveMobility,
    RestrictedTensions,
    UnequalTensionsInconsistent,
    NegativeLambda,
    NegativeStabilization,
    ZeroOutputInterval,
}

impl Violation {
    pub fn message(&self) -> &'static str {
        match self {
            Violation::NonPositiveTension => "surface tensions positive: every sigma_ij must be > 0",
            Violation::AlphaTooSmall => "alpha must exceed 3",
            Violation::NonPositiveEpsilon => "epsilon must be positive",
            Violation::InterfaceUnresolved => "epsilon must be below min(lx, ly) / 8",
            Violation::GridNotPowerOfTwo => "nx and ny must be powers of two",
            Violation::GridTooSmall => "nx and ny must be at least 8",
            Violation::BadDomain => "domain lengths lx, ly must be positive",
            Violation::BadTimeControl => "dt, t_end and equilibrium_tol must be positive",
            Violation::NonPositiveMobility => "mobilities must be positive",
            Violation::RestrictedTensions => {
                "non-degenerate model needs positive capillary coefficients sigma_ij + sigma_ik - sigma_jk"
            }
            Violation::UnequalTensionsInconsistent => {
                "inconsistent gamma2 is the constant 3/(2 sqrt 2) sigma13 = 3/(2 sqrt 2) sigma23 and requires sigma13 == sigma23"
            }
            Violation::NegativeLambda => "Lambda must be non-negative",
            Violation::NegativeStabilization => "stabilization must be non-negative",
            Violation::ZeroOutputInterval => "output interval must be at least one step",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, v: Violation) -> bool {
        self.violations.contains(&v)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Collects every violated invariant of `spec`.
pub fn validate<T: Real>(spec: &ModelSpec<T>) -> ValidationReport {
    let mut out = Vec::new();
    let n = &spec.numerics;
    let positive = |x: T| x.is_finite() && x > T::zero();

    if !spec.sigmas.all_positive() {
        out.push(Violation::NonPositiveTension);
    }
    if !(n.alpha > lit(3.0)) {
        out.push(Violation::AlphaTooSmall);
    }
    if !positive(n.epsilon) {
        out.push(Violation::NonPositiveEpsilon);
    }
    if !(positive(n.lx) && positive(n.ly)) {
        out.push(Violation::BadDomain);
    } else if positive(n.epsilon) && !(n.epsilon * lit(8.0) < n.lx.min(n.ly)) {
        out.push(Violation::InterfaceUnresolved);
    }
    if n.nx < crate::grid::MIN_CELLS || n.ny < crate::grid::MIN_CELLS {
        out.push(Violation::GridTooSmall);
    }
    if !(n.nx.is_power_of_two() && n.ny.is_power_of_two()) {
        out.push(Violation::GridNotPowerOfTwo);
    }
    if !(positive(n.dt) && positive(n.t_end) && positive(n.equilibrium_tol)) {
        out.push(Violation::BadTimeControl);
    }
    if n.output_every == 0 {
        out.push(Violation::ZeroOutputInterval);
    }
    if let Some(s) = n.stabilization {
        if !(s.is_finite() && s >= T::zero()) {
            out.push(Violation::NegativeStabilization);
        }
    }

    let m = &spec.mobilities;
    let mobility_ok = match spec.kind {
        ModelKind::NonDegenerate(_) => positive(m.m0),
        _ => positive(m.m1) && positive(m.m2),
    };
    if !mobility_ok {
        out.push(Violation::NonPositiveMobility);
    }

    match spec.kind {
        ModelKind::Degenerate(Consistency::Inconsistent) => {
            if spec.sigmas.sigma13 != spec.sigmas.sigma23 {
                out.push(Violation::UnequalTensionsInconsistent);
            }
        }
        ModelKind::Degenerate(Consistency::Consistent) => {}
        ModelKind::DegenerateMatching(p) | ModelKind::NonDegenerate(p) => {
            if let PotentialMode::Consistent(pp) = p {
                if !(pp.lambda >= T::zero()) {
                    out.push(Violation::NegativeLambda);
                }
            }
        }
    }
    if matches!(spec.kind, ModelKind::NonDegenerate(_))
        && spec.sigmas.all_positive()
        && spec.sigmas.is_restricted()
    {
        out.push(Violation::RestrictedTensions);
    }
    ValidationReport { violations: out }
}
