//! Periodic pseudo-spectral machinery on the torus `[0, 2π)²`.
//!
//! Physical samples and Fourier coefficients share one row-major layout:
//! entry `j * n + i` holds the sample at `(x₁, x₂) = (i h, j h)` with
//! `h = 2π / n`, and the coefficient of the mode `(k₁, k₂) = (κ(i), κ(j))`
//! where `κ` maps an index to the signed wavenumber in `[-n/2, n/2)`.
//!
//! Coefficients are normalised so that `f(x) = Σ f̂(k) e^{i k·x}`; the zero
//! mode is therefore the spatial mean.  Quadratic products are evaluated on a
//! zero-padded grid of size `3n/2` and truncated to the dealias mask
//! `3|k_j| < n`, which makes the retained modes of any product of two
//! resolved fields exact.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::scalar::{cast, from_i64, from_usize, to_f64, Real};

/// Errors raised by spectral operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("grid size {0} must be even and at least 8")]
    InvalidSize(usize),
    #[error("fields live on grids of different size ({0} vs {1})")]
    GridMismatch(usize, usize),
    #[error("operator expects {expected} component(s), field has {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("negative fractional power applied to a field with nonzero mean {0:e}")]
    NonZeroMean(f64),
}

struct Plans<T> {
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

struct GridInner<T> {
    n: usize,
    m: usize,
    plans_n: Plans<T>,
    plans_m: Plans<T>,
    threads: usize,
}

/// Square periodic grid with cached FFT plans for the base and padded sizes.
#[derive(Clone)]
pub struct SpectralGrid<T: Real> {
    inner: Arc<GridInner<T>>,
}

impl<T: Real> fmt::Debug for SpectralGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.inner.n)
            .field("padded", &self.inner.m)
            .field("threads", &self.inner.threads)
            .finish()
    }
}

impl<T: Real> PartialEq for SpectralGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n
    }
}

fn plans<T: Real>(planner: &mut FftPlanner<T>, s: usize) -> Plans<T> {
    Plans {
        fwd: planner.plan_fft_forward(s),
        inv: planner.plan_fft_inverse(s),
    }
}

fn transpose<C: Copy>(data: &mut [C], s: usize) {
    for r in 0..s {
        for c in (r + 1)..s {
            data.swap(r * s + c, c * s + r);
        }
    }
}

fn fft2<T: Real>(plans: &Plans<T>, s: usize, data: &mut [Complex<T>], inverse: bool) {
    let fft = if inverse { &plans.inv } else { &plans.fwd };
    let mut scratch = vec![Complex::zero(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, s);
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, s);
}

impl<T: Real> SpectralGrid<T> {
    /// Builds an `n × n` grid. `n` must be even and at least 8.
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        Self::with_threads(n, 1)
    }

    /// Builds a grid whose multi-component transforms may use up to `threads`
    /// worker threads. Results do not depend on the thread count.
    pub fn with_threads(n: usize, threads: usize) -> Result<Self, SpectralError> {
        if n < 8 || n % 2 != 0 {
            return Err(SpectralError::InvalidSize(n));
        }
        let m = 3 * n / 2;
        let mut planner = FftPlanner::new();
        let plans_n = plans(&mut planner, n);
        let plans_m = plans(&mut planner, m);
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                m,
                plans_n,
                plans_m,
                threads: threads.max(1),
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Side of the zero-padded product grid (`3n/2`).
    pub fn padded_n(&self) -> usize {
        self.inner.m
    }

    pub fn threads(&self) -> usize {
        self.inner.threads
    }

    /// Number of grid points, `n²`.
    pub fn len(&self) -> usize {
        self.inner.n * self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2π / n`.
    pub fn spacing(&self) -> T {
        T::TAU() / from_usize(self.inner.n)
    }

    /// Coordinate of the `i`-th sample along either axis.
    pub fn coordinate(&self, i: usize) -> T {
        self.spacing() * from_usize(i)
    }

    /// Signed wavenumber for index `i` along an axis of length `n`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        wavenumber(i, self.inner.n)
    }

    /// Wavenumbers `(k₁, k₂)` of the coefficient stored at `idx`.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        let n = self.inner.n;
        (wavenumber(idx % n, n), wavenumber(idx / n, n))
    }

    /// Storage index of the mode `(k₁, k₂)`, if it is representable.
    pub fn mode_index(&self, k1: i64, k2: i64) -> Option<usize> {
        let n = self.inner.n as i64;
        let h = n / 2;
        if k1 < -h || k1 >= h || k2 < -h || k2 >= h {
            return None;
        }
        Some((k2.rem_euclid(n) * n + k1.rem_euclid(n)) as usize)
    }

    /// Dealias mask: both components satisfy `3|k_j| < n`.
    pub fn in_mask(&self, k1: i64, k2: i64) -> bool {
        let n = self.inner.n as i64;
        3 * k1.abs() < n && 3 * k2.abs() < n
    }

    /// Largest retained wavenumber per axis.
    pub fn mask_radius(&self) -> i64 {
        (self.inner.n as i64 - 1) / 3
    }

    /// Number of modes kept by the dealias mask.
    pub fn mask_count(&self) -> usize {
        let k = self.mask_radius() as usize;
        (2 * k + 1) * (2 * k + 1)
    }

    /// True at modes on the Nyquist line of axis `axis` (0 for `k₁`, 1 for `k₂`).
    fn nyquist(&self, k: i64) -> bool {
        k == -(self.inner.n as i64) / 2
    }

    /// Forward transform of physical samples.
    pub fn forward(&self, values: &[T]) -> Vec<Complex<T>> {
        let n = self.inner.n;
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        fft2(&self.inner.plans_n, n, &mut buf, false);
        let norm = T::one() / from_usize(n * n);
        buf.iter_mut().for_each(|z| *z = *z * norm);
        buf
    }

    /// Inverse transform, keeping the complex result.
    pub fn inverse_complex(&self, coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut buf = coeffs.to_vec();
        fft2(&self.inner.plans_n, self.inner.n, &mut buf, true);
        buf
    }

    /// Inverse transform, returning the real part.
    pub fn inverse(&self, coeffs: &[Complex<T>]) -> Vec<T> {
        self.inverse_complex(coeffs).into_iter().map(|z| z.re).collect()
    }

    /// Physical samples of `coeffs` on the `3n/2` padded grid.
    ///
    /// Nyquist coefficients are split evenly between `±n/2` so that the
    /// padded trigonometric polynomial stays real.
    pub fn pad_inverse(&self, coeffs: &[Complex<T>]) -> Vec<T> {
        let n = self.inner.n;
        let m = self.inner.m;
        let half = cast::<T>(0.5);
        let mut buf = vec![Complex::<T>::zero(); m * m];
        let targets = |k: i64| -> [(i64, T); 2] {
            if k == -(n as i64) / 2 {
                [(k, half), (-k, half)]
            } else {
                [(k, T::one()), (k, T::zero())]
            }
        };
        for (idx, &z) in coeffs.iter().enumerate() {
            if z.is_zero() {
                continue;
            }
            let (k1, k2) = self.mode(idx);
            for &(q2, w2) in &targets(k2) {
                if w2.is_zero() {
                    continue;
                }
                for &(q1, w1) in &targets(k1) {
                    if w1.is_zero() {
                        continue;
                    }
                    let dst = q2.rem_euclid(m as i64) as usize * m + q1.rem_euclid(m as i64) as usize;
                    buf[dst] += z * (w1 * w2);
                }
            }
        }
        fft2(&self.inner.plans_m, m, &mut buf, true);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Forward transform of padded-grid samples, truncated to the dealias mask.
    pub fn truncate_forward(&self, padded: &[T]) -> Vec<Complex<T>> {
        let n = self.inner.n;
        let m = self.inner.m;
        let mut buf: Vec<Complex<T>> = padded.iter().map(|&v| Complex::new(v, T::zero())).collect();
        fft2(&self.inner.plans_m, m, &mut buf, false);
        let norm = T::one() / from_usize(m * m);
        let mut out = vec![Complex::zero(); n * n];
        for (idx, slot) in out.iter_mut().enumerate() {
            let (k1, k2) = self.mode(idx);
            if self.in_mask(k1, k2) {
                let src = k2.rem_euclid(m as i64) as usize * m + k1.rem_euclid(m as i64) as usize;
                *slot = buf[src] * norm;
            }
        }
        out
    }

    /// Maps `f` over `items`, spreading the work over the configured threads.
    pub(crate) fn par_map<I, O, F>(&self, items: &[I], f: F) -> Vec<O>
    where
        I: Sync,
        O: Send,
        F: Fn(&I) -> O + Sync,
    {
        let threads = self.inner.threads.min(items.len());
        if threads <= 1 {
            return items.iter().map(f).collect();
        }
        let chunk = items.len().div_ceil(threads);
        std::thread::scope(|scope| {
            let handles: Vec<_> = items
                .chunks(chunk)
                .map(|part| {
                    let f = &f;
                    scope.spawn(move || part.iter().map(f).collect::<Vec<O>>())
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker thread panicked"))
                .collect()
        })
    }
}

fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Fourier representation of a 1-, 2- or 3-component real field.
#[derive(Clone)]
pub struct SpectralField<T: Real> {
    grid: SpectralGrid<T>,
    comps: Vec<Vec<Complex<T>>>,
}

impl<T: Real> fmt::Debug for SpectralField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("n", &self.grid.n())
            .field("components", &self.comps.len())
            .finish()
    }
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: &SpectralGrid<T>, ncomp: usize) -> Self {
        Self {
            grid: grid.clone(),
            comps: vec![vec![Complex::zero(); grid.len()]; ncomp],
        }
    }

    /// Wraps raw coefficient arrays. Each must have `n²` entries.
    pub fn from_coeffs(grid: &SpectralGrid<T>, comps: Vec<Vec<Complex<T>>>) -> Self {
        assert!(comps.iter().all(|c| c.len() == grid.len()), "coefficient array has wrong length");
        Self {
            grid: grid.clone(),
            comps,
        }
    }

    /// Transforms physical samples, one array per component.
    pub fn from_physical(grid: &SpectralGrid<T>, values: &[Vec<T>]) -> Self {
        assert!(values.iter().all(|c| c.len() == grid.len()), "sample array has wrong length");
        let comps = grid.par_map(values, |v| grid.forward(v));
        Self {
            grid: grid.clone(),
            comps,
        }
    }

    /// Samples a scalar function of `(x₁, x₂)`.
    pub fn from_fn(grid: &SpectralGrid<T>, f: impl Fn(T, T) -> T) -> Self {
        Self::from_fn_components(grid, 1, |_, x1, x2| f(x1, x2))
    }

    /// Samples a vector function; `f(c, x₁, x₂)` gives component `c`.
    pub fn from_fn_components(grid: &SpectralGrid<T>, ncomp: usize, f: impl Fn(usize, T, T) -> T) -> Self {
        let n = grid.n();
        let values: Vec<Vec<T>> = (0..ncomp)
            .map(|c| {
                let mut v = Vec::with_capacity(n * n);
                for j in 0..n {
                    for i in 0..n {
                        v.push(f(c, grid.coordinate(i), grid.coordinate(j)));
                    }
                }
                v
            })
            .collect();
        Self::from_physical(grid, &values)
    }

    /// Stacks scalar or vector fields into one multi-component field.
    pub fn stack(parts: &[&SpectralField<T>]) -> Result<Self, SpectralError> {
        let grid = parts
            .first()
            .map(|p| p.grid.clone())
            .ok_or(SpectralError::ComponentMismatch { expected: 1, found: 0 })?;
        let mut comps = Vec::new();
        for p in parts {
            same_grid(&grid, &p.grid)?;
            comps.extend(p.comps.iter().cloned());
        }
        Ok(Self { grid, comps })
    }

    pub fn grid(&self) -> &SpectralGrid<T> {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn coeffs(&self, c: usize) -> &[Complex<T>] {
        &self.comps[c]
    }

    pub fn coeffs_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        &mut self.comps[c]
    }

    /// Coefficient of mode `(k₁, k₂)` in component `c` (zero if unrepresentable).
    pub fn mode(&self, c: usize, k1: i64, k2: i64) -> Complex<T> {
        self.grid
            .mode_index(k1, k2)
            .map_or(Complex::zero(), |idx| self.comps[c][idx])
    }

    /// Extracts component `c` as a scalar field.
    pub fn component(&self, c: usize) -> Self {
        Self {
            grid: self.grid.clone(),
            comps: vec![self.comps[c].clone()],
        }
    }

    /// Physical samples of every component.
    pub fn to_physical(&self) -> Vec<Vec<T>> {
        self.grid.par_map(&self.comps, |c| self.grid.inverse(c))
    }

    /// Physical samples of every component on the padded product grid.
    pub fn to_padded(&self) -> Vec<Vec<T>> {
        self.grid.par_map(&self.comps, |c| self.grid.pad_inverse(c))
    }

    /// Builds a masked field from padded-grid samples.
    pub fn from_padded(grid: &SpectralGrid<T>, padded: &[Vec<T>]) -> Self {
        let comps = grid.par_map(padded, |v| grid.truncate_forward(v));
        Self {
            grid: grid.clone(),
            comps,
        }
    }

    /// Largest imaginary part produced by the inverse transform, relative to
    /// the largest real sample.
    pub fn max_relative_imag(&self) -> T {
        let mut imag = T::zero();
        let mut real = T::zero();
        for c in &self.comps {
            for z in self.grid.inverse_complex(c) {
                imag = imag.max(z.im.abs());
                real = real.max(z.re.abs());
            }
        }
        if real.is_zero() {
            imag
        } else {
            imag / real
        }
    }

    /// Spatial mean of component `c`.
    pub fn mean(&self, c: usize) -> T {
        self.comps[c][0].re
    }

    /// Largest absolute physical sample over all components.
    pub fn max_abs(&self) -> T {
        self.to_physical()
            .iter()
            .flat_map(|v| v.iter())
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// Pointwise Euclidean norm of the component vector, sampled on the grid.
    pub fn pointwise_norm(&self) -> Vec<T> {
        let phys = self.to_physical();
        let mut out = vec![T::zero(); self.grid.len()];
        for v in &phys {
            for (o, &x) in out.iter_mut().zip(v) {
                *o += x * x;
            }
        }
        out.iter_mut().for_each(|o| *o = o.sqrt());
        out
    }

    /// `L²` norm over the torus (all components).
    pub fn norm_l2(&self) -> T {
        inner_product(self, self).unwrap_or(T::zero()).max(T::zero()).sqrt()
    }

    /// Coefficients outside the dealias mask set to zero.
    pub fn masked(&self) -> Self {
        self.map_modes(|_, k1, k2, z| if self.grid.in_mask(k1, k2) { z } else { Complex::zero() })
    }

    /// Largest coefficient magnitude outside the dealias mask.
    pub fn unresolved_amplitude(&self) -> T {
        let mut out = T::zero();
        for c in &self.comps {
            for (idx, z) in c.iter().enumerate() {
                let (k1, k2) = self.grid.mode(idx);
                if !self.grid.in_mask(k1, k2) {
                    out = out.max(z.norm());
                }
            }
        }
        out
    }

    /// Applies `f(c, k₁, k₂, f̂)` to every coefficient.
    pub fn map_modes(&self, f: impl Fn(usize, i64, i64, Complex<T>) -> Complex<T>) -> Self {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(c, v)| {
                v.iter()
                    .enumerate()
                    .map(|(idx, &z)| {
                        let (k1, k2) = self.grid.mode(idx);
                        f(c, k1, k2, z)
                    })
                    .collect()
            })
            .collect();
        Self {
            grid: self.grid.clone(),
            comps,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_modes(|_, _, _, z| z * s)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: T, other: &Self) -> Result<Self, SpectralError> {
        same_shape(self, other)?;
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            for (x, &y) in a.iter_mut().zip(b) {
                *x += y * s;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, SpectralError> {
        self.axpy(T::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SpectralError> {
        self.axpy(-T::one(), other)
    }

    /// True if every coefficient and sample is finite.
    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn same_grid<T: Real>(a: &SpectralGrid<T>, b: &SpectralGrid<T>) -> Result<(), SpectralError> {
    if a.n() == b.n() {
        Ok(())
    } else {
        Err(SpectralError::GridMismatch(a.n(), b.n()))
    }
}

fn same_shape<T: Real>(a: &SpectralField<T>, b: &SpectralField<T>) -> Result<(), SpectralError> {
    same_grid(&a.grid, &b.grid)?;
    if a.ncomp() != b.ncomp() {
        return Err(SpectralError::ComponentMismatch {
            expected: a.ncomp(),
            found: b.ncomp(),
        });
    }
    Ok(())
}

fn expect_components<T: Real>(f: &SpectralField<T>, n: usize) -> Result<(), SpectralError> {
    if f.ncomp() == n {
        Ok(())
    } else {
        Err(SpectralError::ComponentMismatch {
            expected: n,
            found: f.ncomp(),
        })
    }
}

fn check_zero_mean<T: Real>(f: &SpectralField<T>) -> Result<(), SpectralError> {
    let scale = f
        .comps
        .iter()
        .flatten()
        .fold(T::one(), |acc, z| acc.max(z.norm()));
    let tol = T::epsilon() * cast(1.0e4) * scale;
    for c in &f.comps {
        if c[0].norm() > tol {
            return Err(SpectralError::NonZeroMean(to_f64(c[0].norm())));
        }
    }
    Ok(())
}

fn modulus_sq<T: Real>(k1: i64, k2: i64) -> T {
    from_i64::<T>(k1 * k1 + k2 * k2)
}

/// `|k|^{2s}` with the zero mode mapped to zero.
fn frac_symbol<T: Real>(k1: i64, k2: i64, s: T) -> T {
    if k1 == 0 && k2 == 0 {
        T::zero()
    } else {
        modulus_sq::<T>(k1, k2).powf(s)
    }
}

/// Fractional Laplacian `(−Δ)^s`, symbol `|k|^{2s}`, zero mode sent to zero.
///
/// Negative `s` requires every component to have zero mean.
pub fn fractional_laplacian<T: Real>(f: &SpectralField<T>, s: T) -> Result<SpectralField<T>, SpectralError> {
    if s < T::zero() {
        check_zero_mean(f)?;
    }
    Ok(f.map_modes(|_, k1, k2, z| z * frac_symbol(k1, k2, s)))
}

/// Velocity `u = ∇⊥ (−Δ)^{α−1} θ` with `∇⊥ = (−∂₂, ∂₁)`.
pub fn biot_savart<T: Real>(theta: &SpectralField<T>, alpha: T) -> Result<SpectralField<T>, SpectralError> {
    expect_components(theta, 1)?;
    let psi = fractional_laplacian(theta, alpha - T::one())?;
    differential_op(&psi, DiffOp::PerpGrad)
}

/// Riesz transform `R_j = ∂_j (−Δ)^{−1/2}` (`j` is 0 or 1), applied per component.
pub fn riesz_transform<T: Real>(f: &SpectralField<T>, j: usize) -> Result<SpectralField<T>, SpectralError> {
    let grid = f.grid.clone();
    Ok(f.map_modes(|_, k1, k2, z| {
        let k = if j == 0 { k1 } else { k2 };
        if (k1 == 0 && k2 == 0) || grid.nyquist(k) {
            return Complex::zero();
        }
        let r = modulus_sq::<T>(k1, k2).sqrt();
        z * Complex::new(T::zero(), from_i64::<T>(k) / r)
    }))
}

/// First- and second-order differential operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOp {
    /// `∂₁` or `∂₂` (axis 0 or 1) of every component.
    Partial(usize),
    /// Scalar to 2-vector `(∂₁f, ∂₂f)`.
    Grad,
    /// Scalar to 2-vector `(−∂₂f, ∂₁f)`.
    PerpGrad,
    /// 2-vector to scalar `∂₁u₁ + ∂₂u₂`.
    Div,
    /// 2-vector to scalar `∂₁u₂ − ∂₂u₁`.
    Curl,
    /// `Δ` of every component.
    Laplacian,
}

fn partial<T: Real>(grid: &SpectralGrid<T>, axis: usize, k1: i64, k2: i64) -> Complex<T> {
    let k = if axis == 0 { k1 } else { k2 };
    if grid.nyquist(k) {
        Complex::zero()
    } else {
        Complex::new(T::zero(), from_i64(k))
    }
}

/// Applies a differential operator in Fourier space.
///
/// Odd-order symbols vanish on the Nyquist line of the differentiated axis so
/// the result stays real.
pub fn differential_op<T: Real>(f: &SpectralField<T>, op: DiffOp) -> Result<SpectralField<T>, SpectralError> {
    let grid = f.grid.clone();
    let d = |axis: usize, src: &[Complex<T>]| -> Vec<Complex<T>> {
        src.iter()
            .enumerate()
            .map(|(idx, &z)| {
                let (k1, k2) = grid.mode(idx);
                z * partial(&grid, axis, k1, k2)
            })
            .collect()
    };
    let comps = match op {
        DiffOp::Partial(axis) => {
            assert!(axis < 2, "axis must be 0 or 1");
            f.comps.iter().map(|c| d(axis, c)).collect()
        }
        DiffOp::Grad => {
            expect_components(f, 1)?;
            vec![d(0, &f.comps[0]), d(1, &f.comps[0])]
        }
        DiffOp::PerpGrad => {
            expect_components(f, 1)?;
            let neg: Vec<Complex<T>> = d(1, &f.comps[0]).into_iter().map(|z| -z).collect();
            vec![neg, d(0, &f.comps[0])]
        }
        DiffOp::Div => {
            expect_components(f, 2)?;
            let a = d(0, &f.comps[0]);
            let b = d(1, &f.comps[1]);
            vec![a.iter().zip(&b).map(|(&x, &y)| x + y).collect()]
        }
        DiffOp::Curl => {
            expect_components(f, 2)?;
            let a = d(0, &f.comps[1]);
            let b = d(1, &f.comps[0]);
            vec![a.iter().zip(&b).map(|(&x, &y)| x - y).collect()]
        }
        DiffOp::Laplacian => {
            return Ok(f.map_modes(|_, k1, k2, z| z * -modulus_sq::<T>(k1, k2)));
        }
    };
    Ok(SpectralField { grid, comps })
}

/// Dealiased pointwise product, truncated to the dealias mask.
///
/// Component counts may be `(c, c)` (componentwise), `(1, c)` or `(c, 1)`
/// (scalar broadcast).
pub fn product_dealiased<T: Real>(f: &SpectralField<T>, g: &SpectralField<T>) -> Result<SpectralField<T>, SpectralError> {
    same_grid(&f.grid, &g.grid)?;
    let (nf, ng) = (f.ncomp(), g.ncomp());
    if nf != ng && nf != 1 && ng != 1 {
        return Err(SpectralError::ComponentMismatch { expected: nf, found: ng });
    }
    let pf = f.to_padded();
    let pg = g.to_padded();
    let nout = nf.max(ng);
    let prods: Vec<Vec<T>> = (0..nout)
        .map(|c| {
            let a = &pf[if nf == 1 { 0 } else { c }];
            let b = &pg[if ng == 1 { 0 } else { c }];
            a.iter().zip(b).map(|(&x, &y)| x * y).collect()
        })
        .collect();
    Ok(SpectralField::from_padded(&f.grid, &prods))
}

/// `∫_{T²} f dx = (2π)² f̂(0)` for a scalar field.
pub fn integrate<T: Real>(f: &SpectralField<T>) -> T {
    assert_eq!(f.ncomp(), 1, "integrate expects a scalar field");
    T::TAU() * T::TAU() * f.comps[0][0].re
}

/// `∫ f·g dx` summed over components, evaluated by Parseval.
pub fn inner_product<T: Real>(f: &SpectralField<T>, g: &SpectralField<T>) -> Result<T, SpectralError> {
    same_shape(f, g)?;
    let mut acc = T::zero();
    for (a, b) in f.comps.iter().zip(&g.comps) {
        for (x, y) in a.iter().zip(b) {
            acc += x.re * y.re + x.im * y.im;
        }
    }
    Ok(T::TAU() * T::TAU() * acc)
}

/// Trapezoidal quadrature of grid samples, `h² Σ v`, for grids of side `n`.
pub fn integrate_samples<T: Real>(values: &[T], n: usize) -> T {
    let h = T::TAU() / from_usize(n);
    values.iter().fold(T::zero(), |acc, &v| acc + v) * h * h
}
