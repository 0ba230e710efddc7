//! Surface-tension coefficients of the degenerate energy and the three-way
//! parameter interpolation.
//!
//! Orientation used everywhere: `phi = +1` is component 1, `phi = -1`
//! component 2 (both inside `psi = +1`), and `psi = -1` component 3.

use thiserror::Error;

use crate::params::SurfaceTensions;
use crate::scalar::{lit, tension_weight, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Consistency {
    /// Quadratic `gamma1` and constant `gamma2`; lets the absent phase nucleate.
    Inconsistent,
    /// Double-well corrected coefficients with critical points at `+-1`.
    Consistent,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoefficientError {
    #[error("consistent coefficients need alpha > 3, got {0}")]
    AlphaTooSmall(f64),
    #[error(
        "inconsistent gamma2 is constant only for sigma13 == sigma23 (got {sigma13} and {sigma23})"
    )]
    UnequalTensions { sigma13: f64, sigma23: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientMode<T> {
    pub consistency: Consistency,
    /// Size of the double well added to the consistent coefficients.
    pub alpha: T,
}

impl<T: Real> CoefficientMode<T> {
    pub fn new(consistency: Consistency, alpha: T) -> Result<Self, CoefficientError> {
        if consistency == Consistency::Consistent && !(alpha > lit(3.0)) {
            return Err(CoefficientError::AlphaTooSmall(alpha.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { consistency, alpha })
    }

    pub fn consistent(alpha: T) -> Self {
        Self {
            consistency: Consistency::Consistent,
            alpha,
        }
    }

    pub fn inconsistent() -> Self {
        Self {
            consistency: Consistency::Inconsistent,
            alpha: lit(3.0),
        }
    }
}

/// Value with first and second derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Real> Jet<T> {
    fn scale(self, k: T) -> Self {
        Jet {
            value: self.value * k,
            d1: self.d1 * k,
            d2: self.d2 * k,
        }
    }
}

/// `((1+s)/2)^2 (2-s)`: cubic Hermite blend, 0 at `s=-1`, 1 at `s=+1`, flat at both.
#[inline]
fn rising<T: Real>(s: T) -> Jet<T> {
    let p = (T::one() + s) * lit(0.5);
    let three_quarters = lit::<T>(0.75);
    Jet {
        value: p * p * (lit::<T>(2.0) - s),
        d1: three_quarters * (T::one() - s * s),
        d2: lit::<T>(-1.5) * s,
    }
}

/// `((1-s)/2)^2 (2+s)`, mirror image of [`rising`].
#[inline]
fn falling<T: Real>(s: T) -> Jet<T> {
    let r = rising(-s);
    Jet {
        value: r.value,
        d1: -r.d1,
        d2: r.d2,
    }
}

/// `(1 - s^2)^2`, the double-well bump.
#[inline]
fn bump<T: Real>(s: T) -> Jet<T> {
    let w = T::one() - s * s;
    Jet {
        value: w * w,
        d1: lit::<T>(-4.0) * s * w,
        d2: lit::<T>(12.0) * s * s - lit(4.0),
    }
}

/// `gamma1(psi)` with its first two derivatives.
pub fn gamma1_jet<T: Real>(psi: T, sigma12: T, mode: &CoefficientMode<T>) -> Jet<T> {
    let k = tension_weight::<T>() * sigma12;
    let p = (T::one() + psi) * lit(0.5);
    match mode.consistency {
        Consistency::Inconsistent => Jet {
            value: p * p,
            d1: p,
            d2: lit(0.5),
        }
        .scale(k),
        Consistency::Consistent => {
            let a = mode.alpha;
            let u = T::one() - psi;
            let q = lit::<T>(2.0) - psi + a * lit(0.25) * u * u;
            let dq = -T::one() - a * lit(0.5) * u;
            let ddq = a * lit(0.5);
            Jet {
                value: p * p * q,
                d1: p * q + p * p * dq,
                d2: q * lit(0.5) + lit::<T>(2.0) * p * dq + p * p * ddq,
            }
            .scale(k)
        }
    }
}

pub fn gamma1<T: Real>(psi: T, sigma12: T, mode: &CoefficientMode<T>) -> T {
    gamma1_jet(psi, sigma12, mode).value
}

/// `gamma2(phi)` with its first two derivatives. The inconsistent form is the
/// constant `3/(2 sqrt 2) sigma13` and is only defined for `sigma13 == sigma23`.
pub fn gamma2_jet<T: Real>(
    phi: T,
    sigma13: T,
    sigma23: T,
    mode: &CoefficientMode<T>,
) -> Result<Jet<T>, CoefficientError> {
    let k = tension_weight::<T>();
    match mode.consistency {
        Consistency::Inconsistent => {
            if sigma13 != sigma23 {
                return Err(CoefficientError::UnequalTensions {
                    sigma13: sigma13.to_f64().unwrap_or(f64::NAN),
                    sigma23: sigma23.to_f64().unwrap_or(f64::NAN),
                });
            }
            Ok(Jet {
                value: k * sigma13,
                d1: T::zero(),
                d2: T::zero(),
            })
        }
        Consistency::Consistent => {
            let up = rising(phi);
            let down = falling(phi);
            let w = bump(phi);
            let gap = (sigma23 - sigma13).abs() * mode.alpha / lit(16.0);
            let mix = |a: T, b: T, c: T| sigma13 * a + sigma23 * b + gap * c;
            Ok(Jet {
                value: mix(up.value, down.value, w.value),
                d1: mix(up.d1, down.d1, w.d1),
                d2: mix(up.d2, down.d2, w.d2),
            }
            .scale(k))
        }
    }
}

pub fn gamma2<T: Real>(
    phi: T,
    sigma13: T,
    sigma23: T,
    mode: &CoefficientMode<T>,
) -> Result<T, CoefficientError> {
    gamma2_jet(phi, sigma13, sigma23, mode).map(|j| j.value)
}

/// `(value, first derivative)` of both coefficients at once.
pub fn gamma_derivatives<T: Real>(
    phi: T,
    psi: T,
    sigmas: &SurfaceTensions<T>,
    mode: &CoefficientMode<T>,
) -> Result<[(T, T); 2], CoefficientError> {
    let g1 = gamma1_jet(psi, sigmas.sigma12, mode);
    let g2 = gamma2_jet(phi, sigmas.sigma13, sigmas.sigma23, mode)?;
    Ok([(g1.value, g1.d1), (g2.value, g2.d1)])
}

/// Interpolates a parameter taking `b1`, `b2`, `b3` in the three pure
/// components so that the result is stationary at every pure-phase corner.
pub fn interp3<T: Real>(phi: T, psi: T, b1: T, b2: T, b3: T, alpha: T) -> T {
    let a = rising(phi).value;
    let b = falling(phi).value;
    let p = rising(psi).value;
    let q = falling(psi).value;
    let wphi = bump(phi).value;
    let wpsi = bump(psi).value;
    let k = alpha / lit(16.0);
    let (d31, d32) = ((b3 - b1).abs(), (b3 - b2).abs());
    (b1 * a + b2 * b) * p
        + b3 * q
        + k * (b2 - b1).abs() * wphi * p
        + k * (d31 * a + d32 * b) * wpsi
        + k * k * (d31 - d32).abs() * wphi * wpsi
}

/// Largest value of `gamma1` over `psi in [-1, 1]` (sampled plus endpoints).
pub fn gamma1_max<T: Real>(sigma12: T, mode: &CoefficientMode<T>) -> T {
    sample_max(|s| gamma1(s, sigma12, mode))
}

/// Largest value of `gamma2` over `phi in [-1, 1]`.
pub fn gamma2_max<T: Real>(
    sigma13: T,
    sigma23: T,
    mode: &CoefficientMode<T>,
) -> Result<T, CoefficientError> {
    gamma2_jet(T::zero(), sigma13, sigma23, mode)?;
    Ok(sample_max(|s| {
        gamma2(s, sigma13, sigma23, mode).expect("checked above")
    }))
}

pub(crate) fn sample_max<T: Real>(f: impl Fn(T) -> T) -> T {
    const SAMPLES: usize = 2000;
    (0..=SAMPLES)
        .map(|k| f(lit::<T>(-1.0 + 2.0 * k as f64 / SAMPLES as f64)))
        .fold(T::neg_infinity(), T::max)
}
