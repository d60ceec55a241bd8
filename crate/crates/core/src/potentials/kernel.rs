//! Fractional heat kernel `p_a(t, x)` of `∂ₜ + (−Δ)^a` on `ℝ²`.
//!
//! The profile `p_a(1, r) = (2π)⁻¹ ∫₀^∞ e^{−ρ^{2a}} J₀(ρ r) ρ dρ` is tabulated by
//! panel-wise adaptive quadrature and interpolated with a clamped cubic spline
//! in `q = p (1 + r²)^{1+a}`.  Beyond the table the large-`r` expansion
//! `p_a(1, r) = (π r)⁻² Σ_{k≥1} (−1)^{k+1}/k! Γ(ak+1)² sin(πak) (2/r)^{2ak}`
//! takes over.  Other times follow from `p_a(t, x) = t^{−1/a} p_a(1, t^{−1/(2a)} x)`.

use super::quadrature::{adaptive, adaptive_panels};
use super::PotentialsError;
use crate::scalar::{cast, from_usize, to_f64, Real};

/// Radius up to which the profile is tabulated.
pub const TABLE_RADIUS: f64 = 16.0;
/// Table nodes per unit radius.
pub const TABLE_DENSITY: usize = 64;
/// Smallest order supported by the quadrature.
pub const MIN_ORDER: f64 = 0.25;

/// Tabulated heat kernel for a fixed order `a`.
#[derive(Debug, Clone)]
pub struct HeatKernel<T> {
    a: T,
    h: T,
    /// `q(r_i) = p_a(1, r_i) (1 + r_i²)^{1+a}` at `r_i = i h`.
    table: Vec<T>,
    /// Spline second derivatives `q''(r_i)`.
    second: Vec<T>,
    tail: Vec<(T, T)>,
}

/// Second derivatives of the cubic spline through `y` (spacing `h`) with
/// end slopes `d0` and `d1`.
fn clamped_spline<T: Real>(y: &[T], h: T, d0: T, d1: T) -> Vec<T> {
    let n = y.len();
    let six = cast::<T>(6.0);
    let two = cast::<T>(2.0);
    let mut rhs = vec![T::zero(); n];
    rhs[0] = six / h * ((y[1] - y[0]) / h - d0);
    rhs[n - 1] = six / h * (d1 - (y[n - 1] - y[n - 2]) / h);
    for i in 1..n - 1 {
        rhs[i] = six * (y[i + 1] - two * y[i] + y[i - 1]) / (h * h);
    }
    // Tridiagonal system with diagonal (2, 4, …, 4, 2) and unit off-diagonals.
    let mut diag = vec![cast::<T>(4.0); n];
    diag[0] = two;
    diag[n - 1] = two;
    for i in 1..n {
        let w = T::one() / diag[i - 1];
        diag[i] -= w;
        let prev = rhs[i - 1];
        rhs[i] -= w * prev;
    }
    let mut m = vec![T::zero(); n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - m[i + 1]) / diag[i];
    }
    m
}

fn bessel_j0<T: Real>(x: T) -> T {
    cast(libm::j0(to_f64(x)))
}

/// Coefficients `c_k` and exponents `2ak` of the large-`r` expansion.
fn tail_terms<T: Real>(a: T) -> Vec<(T, T)> {
    let af = to_f64(a);
    let mut out = Vec::new();
    for k in 1..=80usize {
        let kf = k as f64;
        let s = (std::f64::consts::PI * af * kf).sin();
        if s.abs() < 1e-14 {
            continue;
        }
        let (lg_a, _) = libm::lgamma_r(af * kf + 1.0);
        let (lg_k, _) = libm::lgamma_r(kf + 1.0);
        let mag = (2.0 * lg_a - lg_k).exp();
        if !mag.is_finite() {
            break;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out.push((cast(sign * mag * s), cast(2.0 * af * kf)));
    }
    out
}

/// Reference profile by direct quadrature (no table).
pub fn profile_quadrature<T: Real>(a: T, r: T) -> Result<T, PotentialsError> {
    let two = cast::<T>(2.0);
    let rho_max = cast::<T>(40.0).powf(T::one() / (two * a));
    let width = if r > T::one() { T::PI() / r } else { T::PI() };
    let mut breaks = vec![T::zero()];
    let mut x = T::zero();
    while x < rho_max {
        x = (x + width).min(rho_max);
        breaks.push(x);
    }
    let f = |rho: T| (-rho.powf(two * a)).exp() * rho * bessel_j0(rho * r);
    let q = adaptive_panels(f, &breaks, cast(1e-14), 50);
    if !q.converged && q.error > cast(1e-10) {
        return Err(PotentialsError::QuadratureFailure(to_f64(q.error)));
    }
    Ok(q.value / T::TAU())
}

impl<T: Real> HeatKernel<T> {
    /// Builds the profile table for order `a ∈ [1/4, 1]`.
    pub fn new(a: T) -> Result<Self, PotentialsError> {
        if !(a >= cast(MIN_ORDER) && a <= T::one()) {
            return Err(PotentialsError::UnsupportedOrder(to_f64(a)));
        }
        let h = T::one() / from_usize::<T>(TABLE_DENSITY);
        let count = TABLE_DENSITY * TABLE_RADIUS as usize;
        let mut table = Vec::with_capacity(count + 1);
        for i in 0..=count {
            let r = h * from_usize(i);
            let p = profile_quadrature(a, r)?;
            table.push(p * (T::one() + r * r).powf(T::one() + a));
        }
        let tail = tail_terms(a);
        let mut kernel = Self {
            a,
            h,
            table,
            second: Vec::new(),
            tail,
        };
        let radius = cast::<T>(TABLE_RADIUS);
        let dr = cast::<T>(1e-3);
        let q_tail = |r: T| kernel.profile_tail(r) * (T::one() + r * r).powf(T::one() + a);
        let end_slope = (q_tail(radius + dr) - q_tail(radius - dr)) / (cast::<T>(2.0) * dr);
        kernel.second = clamped_spline(&kernel.table, h, T::zero(), end_slope);
        Ok(kernel)
    }

    pub fn order(&self) -> T {
        self.a
    }

    /// Large-`r` expansion of `p_a(1, r)`, truncated at its smallest term.
    pub fn profile_tail(&self, r: T) -> T {
        let scale = T::one() / (T::PI() * T::PI() * r * r);
        let base = cast::<T>(2.0) / r;
        let mut sum = T::zero();
        let mut prev = T::infinity();
        for &(c, e) in &self.tail {
            let term = c * base.powf(e);
            if term.abs() > prev {
                break;
            }
            sum += term;
            prev = term.abs();
            if prev <= sum.abs() * T::epsilon() {
                break;
            }
        }
        scale * sum
    }

    /// `∫_{|x|>R} p_a(1, x) dx` from the large-`r` expansion.
    pub fn tail_mass(&self, radius: T) -> T {
        let base = cast::<T>(2.0) / radius;
        let mut sum = T::zero();
        let mut prev = T::infinity();
        for &(c, e) in &self.tail {
            let term = c * base.powf(e) / e;
            if term.abs() > prev {
                break;
            }
            sum += term;
            prev = term.abs();
        }
        sum * cast::<T>(2.0) / T::PI()
    }

    /// `p_a(1, r)` for `r ≥ 0`.
    pub fn profile(&self, r: T) -> T {
        let r = r.abs();
        if r > cast(TABLE_RADIUS) {
            return self.profile_tail(r);
        }
        let last = self.table.len() - 1;
        let s = r / self.h;
        let i = s.floor().to_usize().unwrap_or(0).min(last - 1);
        let b = s - from_usize::<T>(i);
        let a = T::one() - b;
        let c = self.h * self.h / cast::<T>(6.0);
        let q = a * self.table[i]
            + b * self.table[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * c;
        q / (T::one() + r * r).powf(T::one() + self.a)
    }

    /// `p_a(t, x)` at `|x| = r`.
    pub fn eval(&self, t: T, r: T) -> T {
        let two = cast::<T>(2.0);
        let scaled = r * t.powf(-T::one() / (two * self.a));
        t.powf(-T::one() / self.a) * self.profile(scaled)
    }

    /// `∫_{ℝ²} p_a(t, x) dx`, which is independent of `t`.
    pub fn mass(&self) -> Result<T, PotentialsError> {
        let radius = cast::<T>(TABLE_RADIUS);
        let breaks: Vec<T> = (0..=64).map(|k| radius * from_usize::<T>(k) / cast(64.0)).collect();
        let q = adaptive_panels(|r| T::TAU() * r * self.profile(r), &breaks, cast(1e-12), 30);
        if !q.converged && q.error > cast(1e-9) {
            return Err(PotentialsError::QuadratureFailure(to_f64(q.error)));
        }
        Ok(q.value + self.tail_mass(radius))
    }

    /// `∫_{ℝ²} p_a(t₁, x − z) p_a(t₂, z) dz`, which equals `p_a(t₁ + t₂, x)`.
    pub fn convolve(&self, t1: T, t2: T, x: T) -> Result<T, PotentialsError> {
        let two = cast::<T>(2.0);
        let scale = t1.max(t2).powf(T::one() / (two * self.a));
        let mut breaks = vec![T::zero()];
        let mut r = scale * cast(0.25);
        let far = scale * cast(4096.0) + x.abs() * cast(4.0);
        while r < far {
            breaks.push(r);
            r = r * cast(1.5);
        }
        breaks.push(far);
        if x > T::zero() {
            breaks.push(x);
            breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        // Tolerances are relative to the kernel size: the tabulated profile is
        // accurate to about 1e-9, so tighter targets only chase interpolation kinks.
        let inner_tol = cast::<T>(1e-10) * self.eval(t1, T::zero());
        let outer_tol = cast::<T>(1e-8) * self.eval(t1 + t2, x);
        let mut failed = false;
        let radial = |rho: T| {
            let inner = adaptive(
                |phi: T| {
                    let d2 = x * x + rho * rho - two * x * rho * phi.cos();
                    self.eval(t1, d2.max(T::zero()).sqrt())
                },
                T::zero(),
                T::PI(),
                inner_tol,
                16,
            );
            if !inner.converged && inner.error > cast::<T>(1e3) * inner_tol {
                failed = true;
            }
            two * inner.value * rho * self.eval(t2, rho)
        };
        let q = adaptive_panels(radial, &breaks, outer_tol, 16);
        if failed || (!q.converged && q.error > cast::<T>(1e3) * outer_tol) {
            return Err(PotentialsError::QuadratureFailure(to_f64(q.error)));
        }
        Ok(q.value)
    }
}

/// Sampling window for [`kernel_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBoundSpec<T> {
    pub t_min: T,
    pub t_max: T,
    /// Number of log-spaced times.
    pub nt: usize,
    pub x_max: T,
    /// Number of radii in `[0, x_max]`.
    pub nx: usize,
}

impl<T: Real> KernelBoundSpec<T> {
    /// Same window with roughly twice the sampling density.
    pub fn refined(&self) -> Self {
        Self {
            nt: 2 * self.nt - 1,
            nx: 2 * self.nx - 1,
            ..*self
        }
    }
}

/// Suprema of the scale-invariant kernel quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBounds<T> {
    /// `sup p δ²`.
    pub value: T,
    /// `sup |∇p| δ³`.
    pub gradient: T,
    /// `sup t |∂ₜp| δ²`.
    pub time_derivative: T,
}

impl<T: Real> KernelBounds<T> {
    /// Largest relative change of the three suprema against `other`.
    pub fn relative_change(&self, other: &Self) -> T {
        let rel = |a: T, b: T| (a - b).abs() / a.abs().max(b.abs()).max(T::min_positive_value());
        rel(self.value, other.value)
            .max(rel(self.gradient, other.gradient))
            .max(rel(self.time_derivative, other.time_derivative))
    }
}

/// Outcome of [`kernel_bound_check`] at the requested and refined sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBoundReport<T> {
    pub coarse: KernelBounds<T>,
    pub refined: KernelBounds<T>,
    pub relative_change: T,
}

fn kernel_bounds<T: Real>(kernel: &HeatKernel<T>, spec: &KernelBoundSpec<T>) -> KernelBounds<T> {
    let two = cast::<T>(2.0);
    let eps = cast::<T>(1e-5);
    let mut out = KernelBounds {
        value: T::zero(),
        gradient: T::zero(),
        time_derivative: T::zero(),
    };
    let ratio = (spec.t_max / spec.t_min).ln();
    for it in 0..spec.nt {
        let frac = if spec.nt > 1 {
            from_usize::<T>(it) / from_usize::<T>(spec.nt - 1)
        } else {
            T::zero()
        };
        let t = spec.t_min * (ratio * frac).exp();
        let tscale = t.powf(T::one() / (two * kernel.a));
        for ix in 0..spec.nx {
            let r = if spec.nx > 1 {
                spec.x_max * from_usize::<T>(ix) / from_usize::<T>(spec.nx - 1)
            } else {
                T::zero()
            };
            let delta = r.max(tscale);
            let p = kernel.eval(t, r);
            let dr = eps * delta;
            let grad = ((kernel.eval(t, r + dr) - kernel.eval(t, (r - dr).abs())) / (two * dr)).abs();
            let dt = eps * t;
            let pt = ((kernel.eval(t + dt, r) - kernel.eval(t - dt, r)) / (two * dt)).abs();
            out.value = out.value.max(p * delta * delta);
            out.gradient = out.gradient.max(grad * delta * delta * delta);
            out.time_derivative = out.time_derivative.max(t * pt * delta * delta);
        }
    }
    out
}

/// Samples `p δ²`, `|∇p| δ³` and `t|∂ₜp| δ²` over the window at two
/// resolutions, with `δ = max(|x|, t^{1/(2a)})`.
pub fn kernel_bound_check<T: Real>(kernel: &HeatKernel<T>, spec: &KernelBoundSpec<T>) -> KernelBoundReport<T> {
    let coarse = kernel_bounds(kernel, spec);
    let refined = kernel_bounds(kernel, &spec.refined());
    KernelBoundReport {
        coarse,
        refined,
        relative_change: coarse.relative_change(&refined),
    }
}
