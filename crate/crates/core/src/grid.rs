//! Periodic rectangular grids, sampled scalar fields and Fourier
//! differential operators.
//!
//! Fields are stored row-major with `x` varying fastest: the sample at
//! `(i, j)` lives at `j * nx + i` and sits at `(i * hx, j * hy)`.
//!
//! First derivatives use the symbol `i k` with the Nyquist wavenumber set to
//! zero. That makes the discrete derivative a real antisymmetric matrix, so
//! `div_flux(a, f)` is exactly minus the adjoint of the weighted gradient and
//! chemical potentials computed with these operators are the exact first
//! variation of the discrete energies. The Laplacian is the composition of the
//! two first derivatives, which keeps `div_flux(1, f) == laplacian(f)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_traits::Zero;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::scalar::{lit, Real};

/// Smallest number of cells per axis.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {MIN_CELLS} cells per axis, got {nx}x{ny}")]
    TooFewCells { nx: usize, ny: usize },
    #[error("domain lengths must be positive and finite")]
    BadDomain,
    #[error("field has {got} samples, grid expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Doubly periodic rectangle `[0, lx) x [0, ly)` split into `nx x ny` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D<T> {
    nx: usize,
    ny: usize,
    lx: T,
    ly: T,
}

impl<T: Real> Grid2D<T> {
    pub fn new(nx: usize, ny: usize, lx: T, ly: T) -> Result<Self, GridError> {
        if nx < MIN_CELLS || ny < MIN_CELLS {
            return Err(GridError::TooFewCells { nx, ny });
        }
        if !(lx.is_finite() && ly.is_finite() && lx > T::zero() && ly > T::zero()) {
            return Err(GridError::BadDomain);
        }
        Ok(Self { nx, ny, lx, ly })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> T {
        self.lx
    }

    pub fn ly(&self) -> T {
        self.ly
    }

    pub fn hx(&self) -> T {
        self.lx / lit(self.nx as f64)
    }

    pub fn hy(&self) -> T {
        self.ly / lit(self.ny as f64)
    }

    pub fn cell_area(&self) -> T {
        self.hx() * self.hy()
    }

    pub fn area(&self) -> T {
        self.lx * self.ly
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> T {
        lit::<T>(i as f64) * self.hx()
    }

    pub fn y(&self, j: usize) -> T {
        lit::<T>(j as f64) * self.hy()
    }
}

/// Real function sampled on a [`Grid2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid2D<T>,
    data: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Grid2D<T>, value: T) -> Self {
        Self {
            grid,
            data: vec![value; grid.len()],
        }
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(grid: Grid2D<T>, mut f: impl FnMut(T, T) -> T) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            let y = grid.y(j);
            for i in 0..grid.nx() {
                data.push(f(grid.x(i), y));
            }
        }
        Self { grid, data }
    }

    /// Wraps existing samples, rejecting wrong lengths and non-finite values.
    pub fn from_vec(grid: Grid2D<T>, data: Vec<T>) -> Result<Self, GridError> {
        if data.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(k));
        }
        Ok(Self { grid, data })
    }

    /// Like [`ScalarField::from_vec`] but skips the finiteness scan. Used for
    /// intermediate results, which the stepper checks on its own.
    pub(crate) fn from_raw(grid: Grid2D<T>, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.grid, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self::from_raw(
            self.grid,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// `hx * hy * sum(f)`, the periodic trapezoid rule.
    pub fn integrate(&self) -> T {
        self.grid.cell_area() * self.data.iter().copied().sum::<T>()
    }

    pub fn mean(&self) -> T {
        self.data.iter().copied().sum::<T>() / lit(self.data.len() as f64)
    }

    pub fn min(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.data.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Continuous L2 norm `sqrt(integral f^2)`.
    pub fn l2_norm(&self) -> T {
        (self.grid.cell_area() * self.data.iter().map(|&v| v * v).sum::<T>()).sqrt()
    }
}

/// Integral of a field over the domain; free-function form of
/// [`ScalarField::integrate`].
pub fn integrate<T: Real>(f: &ScalarField<T>) -> T {
    f.integrate()
}

impl<T: Real> Add for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn add(self, rhs: Self) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn sub(self, rhs: Self) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<T: Real> Mul<T> for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn mul(self, rhs: T) -> ScalarField<T> {
        self.map(|a| a * rhs)
    }
}

/// Signed Fourier mode number of FFT bin `k` for an axis with `n` points.
#[inline]
fn mode_number(k: usize, n: usize) -> isize {
    if k <= n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// FFT plans and wavenumber tables for one grid.
///
/// All methods take `&self` and allocate their own scratch space, so one
/// instance can be shared across threads.
#[derive(Clone)]
pub struct Spectral<T: Real> {
    grid: Grid2D<T>,
    fwd_x: Arc<dyn Fft<T>>,
    inv_x: Arc<dyn Fft<T>>,
    fwd_y: Arc<dyn Fft<T>>,
    inv_y: Arc<dyn Fft<T>>,
    kx: Vec<T>,
    ky: Vec<T>,
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
}

impl<T: Real> fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: Grid2D<T>) -> Self {
        let mut planner = FftPlanner::new();
        let (nx, ny) = (grid.nx(), grid.ny());
        let two_pi = T::TAU();
        let wavenumbers = |n: usize, l: T| -> Vec<T> {
            (0..n)
                .map(|k| {
                    if n % 2 == 0 && k == n / 2 {
                        T::zero()
                    } else {
                        two_pi * lit(mode_number(k, n) as f64) / l
                    }
                })
                .collect()
        };
        // 2/3 rule: keep |m| <= n/3.
        let keep = |n: usize| -> Vec<bool> {
            (0..n)
                .map(|k| 3 * mode_number(k, n).unsigned_abs() <= n)
                .collect()
        };
        Self {
            grid,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            kx: wavenumbers(nx, grid.lx()),
            ky: wavenumbers(ny, grid.ly()),
            keep_x: keep(nx),
            keep_y: keep(ny),
        }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    /// Derivative wavenumbers along x (Nyquist entry is zero).
    pub fn kx(&self) -> &[T] {
        &self.kx
    }

    pub fn ky(&self) -> &[T] {
        &self.ky
    }

    /// `kx^2 + ky^2` in FFT storage order; minus the Laplacian symbol.
    pub fn k_squared(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.grid.len());
        for ky in &self.ky {
            for kx in &self.kx {
                out.push(*kx * *kx + *ky * *ky);
            }
        }
        out
    }

    fn transform(&self, buf: &mut [Complex<T>], along_x: &dyn Fft<T>, along_y: &dyn Fft<T>) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let scratch_len = along_x
            .get_inplace_scratch_len()
            .max(along_y.get_inplace_scratch_len());
        let mut scratch = vec![Complex::zero(); scratch_len];
        // Rows are contiguous; rustfft walks consecutive chunks of length nx.
        along_x.process_with_scratch(buf, &mut scratch[..along_x.get_inplace_scratch_len()]);
        let mut cols = vec![Complex::zero(); nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                cols[i * ny + j] = buf[j * nx + i];
            }
        }
        along_y.process_with_scratch(&mut cols, &mut scratch[..along_y.get_inplace_scratch_len()]);
        for i in 0..nx {
            for j in 0..ny {
                buf[j * nx + i] = cols[i * ny + j];
            }
        }
    }

    /// Unnormalised forward DFT of a real sample array.
    pub fn forward(&self, f: &[T]) -> Vec<Complex<T>> {
        assert_eq!(f.len(), self.grid.len(), "sample count does not match grid");
        let mut buf: Vec<Complex<T>> = f.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.transform(&mut buf, self.fwd_x.as_ref(), self.fwd_y.as_ref());
        buf
    }

    /// Inverse of [`Spectral::forward`], keeping the real part.
    pub fn inverse(&self, mut hat: Vec<Complex<T>>) -> Vec<T> {
        assert_eq!(hat.len(), self.grid.len(), "coefficient count does not match grid");
        self.transform(&mut hat, self.inv_x.as_ref(), self.inv_y.as_ref());
        let scale = T::one() / lit(self.grid.len() as f64);
        hat.into_iter().map(|c| c.re * scale).collect()
    }

    fn field(&self, data: Vec<T>) -> ScalarField<T> {
        ScalarField::from_raw(self.grid, data)
    }

    fn check(&self, f: &ScalarField<T>) {
        assert_eq!(f.grid(), &self.grid, "field lives on a different grid");
    }

    /// Spectral partial derivatives `(df/dx, df/dy)` from precomputed
    /// coefficients.
    pub fn gradient_hat(&self, hat: &[Complex<T>]) -> (ScalarField<T>, ScalarField<T>) {
        let nx = self.grid.nx();
        let mut dx = Vec::with_capacity(hat.len());
        let mut dy = Vec::with_capacity(hat.len());
        for (n, c) in hat.iter().enumerate() {
            let (i, j) = (n % nx, n / nx);
            dx.push(Complex::new(-c.im * self.kx[i], c.re * self.kx[i]));
            dy.push(Complex::new(-c.im * self.ky[j], c.re * self.ky[j]));
        }
        (self.field(self.inverse(dx)), self.field(self.inverse(dy)))
    }

    pub fn gradient(&self, f: &ScalarField<T>) -> (ScalarField<T>, ScalarField<T>) {
        self.check(f);
        self.gradient_hat(&self.forward(f.data()))
    }

    pub fn laplacian(&self, f: &ScalarField<T>) -> ScalarField<T> {
        self.check(f);
        let hat = self.forward(f.data());
        let k2 = self.k_squared();
        let lap = hat.into_iter().zip(k2).map(|(c, k)| c * (-k)).collect();
        self.field(self.inverse(lap))
    }

    /// `i kx fx_hat + i ky fy_hat`, the divergence in coefficient space.
    pub fn divergence_hat(&self, fx: &ScalarField<T>, fy: &ScalarField<T>) -> Vec<Complex<T>> {
        self.check(fx);
        self.check(fy);
        let nx = self.grid.nx();
        let ax = self.forward(fx.data());
        let ay = self.forward(fy.data());
        ax.into_iter()
            .zip(ay)
            .enumerate()
            .map(|(n, (a, b))| {
                let (i, j) = (n % nx, n / nx);
                let s = a * self.kx[i] + b * self.ky[j];
                Complex::new(-s.im, s.re)
            })
            .collect()
    }

    pub fn divergence(&self, fx: &ScalarField<T>, fy: &ScalarField<T>) -> ScalarField<T> {
        self.field(self.inverse(self.divergence_hat(fx, fy)))
    }

    /// `div(a grad f)` with both derivatives taken spectrally.
    pub fn div_flux(&self, a: &ScalarField<T>, f: &ScalarField<T>) -> ScalarField<T> {
        self.check(a);
        let (gx, gy) = self.gradient(f);
        let fx = a.zip_map(&gx, |a, g| a * g);
        let fy = a.zip_map(&gy, |a, g| a * g);
        self.divergence(&fx, &fy)
    }

    /// `integral f^2` evaluated from Fourier coefficients (Parseval).
    pub fn spectral_energy(&self, f: &ScalarField<T>) -> T {
        self.check(f);
        let hat = self.forward(f.data());
        let n = lit::<T>(self.grid.len() as f64);
        self.grid.cell_area() * hat.iter().map(|c| c.norm_sqr()).sum::<T>() / n
    }

    /// Zeroes the coefficients outside the 2/3-rule band.
    pub fn dealias_hat(&self, hat: &mut [Complex<T>]) {
        let nx = self.grid.nx();
        for (n, c) in hat.iter_mut().enumerate() {
            if !(self.keep_x[n % nx] && self.keep_y[n / nx]) {
                *c = Complex::zero();
            }
        }
    }

    pub fn dealias(&self, f: &ScalarField<T>) -> ScalarField<T> {
        self.check(f);
        let mut hat = self.forward(f.data());
        self.dealias_hat(&mut hat);
        self.field(self.inverse(hat))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid2D<f64> {
        Grid2D::new(n, n / 2, 2.0, 1.0).unwrap()
    }

    fn max_diff(a: &ScalarField<f64>, b: &ScalarField<f64>) -> f64 {
        a.data()
            .iter()
            .zip(b.data())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(matches!(
            Grid2D::new(4, 16, 1.0, 1.0),
            Err(GridError::TooFewCells { .. })
        ));
        assert_eq!(Grid2D::new(16, 16, 0.0, 1.0), Err(GridError::BadDomain));
    }

    #[test]
    fn from_vec_checks_samples() {
        let g = grid(16);
        assert!(matches!(
            ScalarField::from_vec(g, vec![0.0; 3]),
            Err(GridError::LengthMismatch { .. })
        ));
        let mut v = vec![0.0; g.len()];
        v[5] = f64::NAN;
        assert_eq!(ScalarField::from_vec(g, v), Err(GridError::NonFinite(5)));
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let g = grid(16);
        let sp = Spectral::new(g);
        let f = ScalarField::constant(g, 3.5);
        let (gx, gy) = sp.gradient(&f);
        assert!(gx.max_abs() < 1e-13 && gy.max_abs() < 1e-13);
        assert!(sp.laplacian(&f).max_abs() < 1e-12);
        let a = ScalarField::from_fn(g, |x, _| 1.0 + 0.5 * (PI * x).sin());
        assert!(sp.div_flux(&a, &f).max_abs() < 1e-12);
    }

    #[test]
    fn derivative_of_resolved_mode() {
        let g = grid(32);
        let (lx, ly) = (g.lx(), g.ly());
        let sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x, _| (2.0 * PI * x / lx).sin());
        let want = ScalarField::from_fn(g, |x, _| 2.0 * PI / lx * (2.0 * PI * x / lx).cos());
        let (gx, gy) = sp.gradient(&f);
        assert!(max_diff(&gx, &want) < 1e-12);
        assert!(gy.max_abs() < 1e-12);

        let fy = ScalarField::from_fn(g, |_, y| (2.0 * PI * y / ly).sin());
        let (gx, _) = sp.gradient(&fy);
        assert!(gx.max_abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_modes() {
        let g = grid(32);
        let (lx, ly) = (g.lx(), g.ly());
        let sp = Spectral::new(g);
        let kx = 2.0 * PI / lx;
        let ky = 4.0 * PI / ly;
        let f = ScalarField::from_fn(g, |x, _| (kx * x).sin());
        let want = &f * (-kx * kx);
        assert!(max_diff(&sp.laplacian(&f), &want) < 1e-12);

        let h = ScalarField::from_fn(g, |_, y| (ky * y).cos());
        let sum = &f + &h;
        let want = &(&f * (-kx * kx)) + &(&h * (-ky * ky));
        assert!(max_diff(&sp.laplacian(&sum), &want) < 1e-10);
    }

    #[test]
    fn div_flux_matches_product_rule() {
        let g = grid(32);
        let lx = g.lx();
        let sp = Spectral::new(g);
        let k = 2.0 * PI / lx;
        let a = ScalarField::from_fn(g, |x, _| 1.0 + 0.5 * (k * x).sin());
        let f = ScalarField::from_fn(g, |x, _| (k * x).sin());
        // d/dx[(1 + s/2) k c] = (k^2/2) c^2 - k^2 (1 + s/2) s
        let want = ScalarField::from_fn(g, |x, _| {
            let (s, c) = (k * x).sin_cos();
            0.5 * k * k * c * c - k * k * (1.0 + 0.5 * s) * s
        });
        assert!(max_diff(&sp.div_flux(&a, &f), &want) < 1e-10);

        let one = ScalarField::constant(g, 1.0);
        let f = ScalarField::from_fn(g, |x, y| (x * y).sin() + (k * x).cos());
        assert!(max_diff(&sp.div_flux(&one, &f), &sp.laplacian(&f)) < 1e-12);
    }

    #[test]
    fn integrate_constant_and_period() {
        let g = grid(16);
        assert!((ScalarField::constant(g, 1.5).integrate() - 1.5 * 2.0).abs() < 1e-14);
        let s = ScalarField::from_fn(g, |x, _| (PI * x).sin());
        assert!(integrate(&s).abs() < 1e-12);
    }

    #[test]
    fn dealias_removes_high_modes() {
        let g = Grid2D::new(24, 24, 1.0, 1.0).unwrap();
        let sp = Spectral::new(g);
        let low = ScalarField::from_fn(g, |x, y| (2.0 * PI * 3.0 * x).sin() * (2.0 * PI * y).cos());
        let high = ScalarField::from_fn(g, |x, _| (2.0 * PI * 10.0 * x).cos());
        assert!(max_diff(&sp.dealias(&low), &low) < 1e-12);
        assert!(sp.dealias(&high).max_abs() < 1e-12);
    }

    #[test]
    fn forward_inverse_round_trip() {
        let g = Grid2D::new(16, 8, 1.0, 3.0).unwrap();
        let sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x: f64, y: f64| (x * 7.0).exp() * (y - 0.3).powi(3));
        let back = sp.inverse(sp.forward(f.data()));
        let scale = f.max_abs();
        for (a, b) in f.data().iter().zip(&back) {
            assert!((a - b).abs() < 1e-13 * scale);
        }
    }

    #[test]
    fn single_precision_works() {
        let g = Grid2D::<f32>::new(16, 16, 1.0, 1.0).unwrap();
        let sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x, _| (std::f32::consts::TAU * x).sin());
        let lap = sp.laplacian(&f);
        let k2 = std::f32::consts::TAU.powi(2);
        for (l, v) in lap.data().iter().zip(f.data()) {
            assert!((l + k2 * v).abs() < 1e-3);
        }
    }
}
