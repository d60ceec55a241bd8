//! Space–time lattice functions and the parabolic operators acting on them.
//!
//! A lattice has `nt` time levels spaced by `ht` and `nx × nx` spatial points
//! spaced by `hx`; value `(k, j, i)` sits at `(t, x₁, x₂) = (k ht, i hx, j hx)`
//! and represents the cell of volume `hx² ht` centred there.  Parabolic
//! cylinders are `Q_r(z) = {w : δ(z, w) < r}`.

use super::quadrature::adaptive_panels;
use super::PotentialsError;
use crate::scalar::{cast, from_i64, from_usize, Real};
use crate::spectral::{fractional_laplacian, SpectralField};

/// Point `(t, x)` of parabolic space–time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicPoint<T> {
    pub t: T,
    pub x: [T; 2],
}

/// `δ(z₁, z₂) = max(|x₁ − x₂|, |t₁ − t₂|^{1/(2a)})`.
pub fn delta_metric<T: Real>(z1: &ParabolicPoint<T>, z2: &ParabolicPoint<T>, a: T) -> T {
    let dx = z1.x[0] - z2.x[0];
    let dy = z1.x[1] - z2.x[1];
    let space = (dx * dx + dy * dy).sqrt();
    let time = (z1.t - z2.t).abs().powf(T::one() / (cast::<T>(2.0) * a));
    space.max(time)
}

/// Parabolic homogeneous dimension `2 + 2a`.
pub fn parabolic_dimension<T: Real>(a: T) -> T {
    cast::<T>(2.0) + cast::<T>(2.0) * a
}

/// Real samples on a uniform space–time lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSpaceTimeFunction<T> {
    pub nt: usize,
    pub nx: usize,
    pub ht: T,
    pub hx: T,
    /// Spatial indices wrap around (torus) instead of being clipped.
    pub periodic: bool,
    pub values: Vec<T>,
}

impl<T: Real> SampledSpaceTimeFunction<T> {
    pub fn zeros(nt: usize, nx: usize, ht: T, hx: T, periodic: bool) -> Self {
        Self {
            nt,
            nx,
            ht,
            hx,
            periodic,
            values: vec![T::zero(); nt * nx * nx],
        }
    }

    /// Samples `f(t, x₁, x₂)` at the lattice points.
    pub fn from_fn(nt: usize, nx: usize, ht: T, hx: T, f: impl Fn(T, T, T) -> T) -> Self {
        let mut out = Self::zeros(nt, nx, ht, hx, false);
        for k in 0..nt {
            for j in 0..nx {
                for i in 0..nx {
                    let v = f(ht * from_usize(k), hx * from_usize(i), hx * from_usize(j));
                    out.values[(k * nx + j) * nx + i] = v;
                }
            }
        }
        out
    }

    /// Stacks physical samples of periodic snapshots spaced by `dt`.
    pub fn from_snapshots(snapshots: &[SpectralField<T>], dt: T) -> Result<Self, PotentialsError> {
        let first = snapshots.first().ok_or(PotentialsError::InsufficientResolution(1))?;
        let grid = first.grid().clone();
        let mut values = Vec::with_capacity(snapshots.len() * grid.len());
        for s in snapshots {
            if s.grid().n() != grid.n() || s.ncomp() != 1 {
                return Err(PotentialsError::ShapeMismatch);
            }
            values.extend(s.to_physical().swap_remove(0));
        }
        Ok(Self {
            nt: snapshots.len(),
            nx: grid.n(),
            ht: dt,
            hx: grid.spacing(),
            periodic: true,
            values,
        })
    }

    pub fn index(&self, k: usize, j: usize, i: usize) -> usize {
        (k * self.nx + j) * self.nx + i
    }

    pub fn get(&self, k: usize, j: usize, i: usize) -> T {
        self.values[self.index(k, j, i)]
    }

    /// Volume `hx² ht` of one cell.
    pub fn cell_volume(&self) -> T {
        self.hx * self.hx * self.ht
    }

    pub fn point(&self, k: usize, j: usize, i: usize) -> ParabolicPoint<T> {
        ParabolicPoint {
            t: self.ht * from_usize(k),
            x: [self.hx * from_usize(i), self.hx * from_usize(j)],
        }
    }

    /// Same lattice with new values.
    pub fn with_values(&self, values: Vec<T>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    /// Smallest radius whose cylinder contains only its centre.
    pub fn cell_radius(&self, a: T) -> T {
        self.hx.min(self.ht.powf(T::one() / (cast::<T>(2.0) * a)))
    }

    /// δ-diameter of the lattice.
    pub fn diameter(&self, a: T) -> T {
        let space = self.hx * from_usize(self.nx.saturating_sub(1)) * cast::<T>(2.0).sqrt();
        let time = (self.ht * from_usize(self.nt.saturating_sub(1))).powf(T::one() / (cast::<T>(2.0) * a));
        space.max(time)
    }

    /// `(Σ |f|ᵖ hx² ht)^{1/p}`.
    pub fn lp_norm(&self, p: T) -> T {
        let s = self.values.iter().fold(T::zero(), |acc, &v| acc + v.abs().powf(p));
        (s * self.cell_volume()).powf(T::one() / p)
    }
}

/// Lattice offsets forming a cylinder of radius `r`.
#[derive(Debug, Clone)]
pub struct CylinderStencil {
    /// Spatial offsets `(di, dj)` with `hx²(di² + dj²) < r²`.
    pub space: Vec<(i64, i64)>,
    /// Largest time offset with `|dk| ht < r^{2a}`.
    pub time_half: i64,
}

impl CylinderStencil {
    pub fn new<T: Real>(r: T, a: T, hx: T, ht: T) -> Self {
        let rr = r / hx;
        let reach = rr.ceil().to_i64().unwrap_or(0);
        let mut space = Vec::new();
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let d2 = from_i64::<T>(di * di + dj * dj);
                if d2 < rr * rr {
                    space.push((di, dj));
                }
            }
        }
        let tr = r.powf(cast::<T>(2.0) * a) / ht;
        let mut time_half = tr.floor().to_i64().unwrap_or(0);
        if from_i64::<T>(time_half) >= tr {
            time_half -= 1;
        }
        Self {
            space,
            time_half: time_half.max(0),
        }
    }

    /// Number of lattice points in the unclipped cylinder.
    pub fn full_count(&self) -> usize {
        self.space.len() * (2 * self.time_half as usize + 1)
    }
}

fn wrap(i: i64, n: usize, periodic: bool) -> Option<usize> {
    if periodic {
        Some(i.rem_euclid(n as i64) as usize)
    } else if i >= 0 && (i as usize) < n {
        Some(i as usize)
    } else {
        None
    }
}

/// Values of `f` inside `Q_r` centred at lattice point `(k, j, i)`.
pub fn gather<T: Real>(f: &SampledSpaceTimeFunction<T>, st: &CylinderStencil, k: usize, j: usize, i: usize, out: &mut Vec<usize>) {
    out.clear();
    for dk in -st.time_half..=st.time_half {
        let Some(kk) = wrap(k as i64 + dk, f.nt, false) else { continue };
        for &(di, dj) in &st.space {
            let Some(jj) = wrap(j as i64 + dj, f.nx, f.periodic) else { continue };
            let Some(ii) = wrap(i as i64 + di, f.nx, f.periodic) else { continue };
            out.push(f.index(kk, jj, ii));
        }
    }
}

/// Which cylinder functional to maximise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylinderNorm {
    /// `r^{λ−(2+2a)} ∫_{Q_r} |f|ᵖ`.
    Morrey,
    /// `r^{λ−(2+2a)} ∫_{Q_r} |f − f_{Q_r}|ᵖ`.
    Campanato,
}

/// Sampling of centres and radii for cylinder suprema.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderOptions<T> {
    pub radii: Vec<T>,
    /// Use every `center_stride`-th spatial point as a centre.
    pub center_stride: usize,
    /// Use every `time_stride`-th time level as a centre.
    pub time_stride: usize,
    /// Skip cylinders holding fewer samples.
    pub min_samples: usize,
}

impl<T: Real> CylinderOptions<T> {
    pub fn all_centres(radii: Vec<T>) -> Self {
        Self {
            radii,
            center_stride: 1,
            time_stride: 1,
            min_samples: 1,
        }
    }
}

/// Supremum of a cylinder functional with the maximising cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSup<T> {
    pub value: T,
    pub radius: T,
    pub center: (usize, usize, usize),
    pub cylinders: usize,
}

/// `|Q_r| = 2π r^{2+2a}`.
pub fn cylinder_volume<T: Real>(r: T, a: T) -> T {
    cast::<T>(2.0) * T::PI() * r.powf(parabolic_dimension(a))
}

/// `sup_{z, r} r^{λ−(2+2a)} ∫_{Q_r(z)} |f − c|ᵖ` over the sampled cylinders,
/// with `c = 0` (Morrey) or the cylinder mean (Campanato).
///
/// Each sample carries the weight `|Q_r| / #stencil`, so the discrete
/// integral is exact for constants on cylinders inside the lattice and
/// scales correctly even when `r^{2a}` is below the time step.
pub fn cylinder_sup<T: Real>(
    f: &SampledSpaceTimeFunction<T>,
    p: T,
    lambda: T,
    a: T,
    norm: CylinderNorm,
    opts: &CylinderOptions<T>,
) -> Result<CylinderSup<T>, PotentialsError> {
    if !(p >= T::one()) {
        return Err(PotentialsError::UnsupportedParameters(format!("p = {p} must be at least 1")));
    }
    let dim = parabolic_dimension(a);
    let two = cast::<T>(2.0);
    let mut best = CylinderSup {
        value: T::zero(),
        radius: T::zero(),
        center: (0, 0, 0),
        cylinders: 0,
    };
    let mut idx = Vec::new();
    for &r in &opts.radii {
        let st = CylinderStencil::new(r, a, f.hx, f.ht);
        let weight = r.powf(lambda - dim) * cylinder_volume(r, a) / from_usize::<T>(st.full_count());
        for k in (0..f.nt).step_by(opts.time_stride.max(1)) {
            for j in (0..f.nx).step_by(opts.center_stride.max(1)) {
                for i in (0..f.nx).step_by(opts.center_stride.max(1)) {
                    gather(f, &st, k, j, i, &mut idx);
                    if idx.len() < opts.min_samples.max(1) {
                        continue;
                    }
                    let c = match norm {
                        CylinderNorm::Morrey => T::zero(),
                        CylinderNorm::Campanato => {
                            idx.iter().fold(T::zero(), |acc, &q| acc + f.values[q]) / from_usize(idx.len())
                        }
                    };
                    let s = if p == two {
                        idx.iter().fold(T::zero(), |acc, &q| acc + (f.values[q] - c) * (f.values[q] - c))
                    } else {
                        idx.iter().fold(T::zero(), |acc, &q| acc + (f.values[q] - c).abs().powf(p))
                    };
                    let v = weight * s;
                    best.cylinders += 1;
                    if v > best.value || best.cylinders == 1 {
                        best.value = v;
                        best.radius = r;
                        best.center = (k, j, i);
                    }
                }
            }
        }
    }
    if best.cylinders == 0 {
        return Err(PotentialsError::InsufficientResolution(opts.min_samples));
    }
    Ok(best)
}

/// Morrey or Campanato norm over all centres and the given radii.
pub fn morrey_campanato_norms<T: Real>(
    f: &SampledSpaceTimeFunction<T>,
    p: T,
    lambda: T,
    a: T,
    norm: CylinderNorm,
    radii: &[T],
) -> Result<T, PotentialsError> {
    Ok(cylinder_sup(f, p, lambda, a, norm, &CylinderOptions::all_centres(radii.to_vec()))?.value)
}

/// Disk of radius `rho` intersected with the square `[−s, s]²`.
fn disk_square_area<T: Real>(rho: T, s: T) -> T {
    if rho <= s {
        return T::PI() * rho * rho;
    }
    if rho >= s * cast::<T>(2.0).sqrt() {
        return cast::<T>(4.0) * s * s;
    }
    let seg = rho * rho * (s / rho).acos() - s * (rho * rho - s * s).sqrt();
    T::PI() * rho * rho - cast::<T>(4.0) * seg
}

/// `∫_{cell} δ(0, w)^{−γ} dw` over the cell `[−hx/2, hx/2]² × [−ht/2, ht/2]`,
/// `0 < γ < 2 + 2a`, by the layer-cake formula `γ ∫ ρ^{−γ−1} |{δ < ρ} ∩ cell| dρ`.
pub fn singular_cell_integral<T: Real>(gamma: T, a: T, hx: T, ht: T) -> Result<T, PotentialsError> {
    let two = cast::<T>(2.0);
    let s = hx / two;
    let tau = (ht / two).powf(T::one() / (two * a));
    let dim = parabolic_dimension(a);
    let beta = dim - gamma;
    let rho0 = s.min(tau);
    let rho_max = (s * two.sqrt()).max(tau);
    let vol = hx * hx * ht;
    let volume = |rho: T| disk_square_area(rho, s) * (two * rho.powf(two * a)).min(ht);
    let inner = two * T::PI() * gamma * rho0.powf(beta) / beta;
    let outer = vol * rho_max.powf(-gamma);
    let mut breaks = vec![rho0, s, s * two.sqrt(), tau, rho_max];
    breaks.retain(|&b| b >= rho0 && b <= rho_max);
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks.dedup();
    let q = adaptive_panels(|rho: T| gamma * rho.powf(-gamma - T::one()) * volume(rho), &breaks, cast::<T>(1e-13) * vol * rho0.powf(-gamma), 40);
    if !q.converged && q.error > cast::<T>(1e-8) * q.value.abs() {
        return Err(PotentialsError::QuadratureFailure(crate::scalar::to_f64(q.error)));
    }
    Ok(inner + q.value + outer)
}

const GL6_NODES: [f64; 3] = [0.238_619_186_083_196_9, 0.661_209_386_466_264_5, 0.932_469_514_203_152_1];
const GL6_WEIGHTS: [f64; 3] = [0.467_913_934_572_691_0, 0.360_761_573_048_138_6, 0.171_324_492_379_170_4];

/// `∫₀ᵘ max(r, s^e)^{−γ} ds` for `u ≥ 0`, `e = 1/(2a)`.
fn time_primitive<T: Real>(r: T, u: T, gamma: T, a: T) -> T {
    let knee = r.powf(cast::<T>(2.0) * a);
    if u <= knee {
        return u * r.powf(-gamma);
    }
    let k = T::one() - gamma / (cast::<T>(2.0) * a);
    let tail = if k.abs() < cast(1e-12) {
        (u / knee).ln()
    } else {
        (u.powf(k) - knee.powf(k)) / k
    };
    knee * r.powf(-gamma) + tail
}

/// `∫_{t₁}^{t₂} max(r, |t|^{1/(2a)})^{−γ} dt`.
fn time_integral<T: Real>(r: T, t1: T, t2: T, gamma: T, a: T) -> T {
    if t1 >= T::zero() {
        time_primitive(r, t2, gamma, a) - time_primitive(r, t1, gamma, a)
    } else if t2 <= T::zero() {
        time_primitive(r, -t1, gamma, a) - time_primitive(r, -t2, gamma, a)
    } else {
        time_primitive(r, -t1, gamma, a) + time_primitive(r, t2, gamma, a)
    }
}

/// `∫_{cell} δ(0, w)^{−γ} dw` for the cell centred at offset `(dk, dj, di)`
/// (not the origin): exact in time, Gauss–Legendre in space with `sub × sub`
/// subcells.
fn cell_integral<T: Real>(gamma: T, a: T, hx: T, ht: T, dk: i64, dj: i64, di: i64, sub: usize) -> T {
    let half = cast::<T>(0.5);
    let t1 = ht * (from_i64::<T>(dk) - half);
    let t2 = ht * (from_i64::<T>(dk) + half);
    let hs = hx / from_usize::<T>(sub);
    let mut total = T::zero();
    for sy in 0..sub {
        let cy = hx * (from_i64::<T>(dj) - half) + hs * (from_usize::<T>(sy) + half);
        for sx in 0..sub {
            let cx = hx * (from_i64::<T>(di) - half) + hs * (from_usize::<T>(sx) + half);
            for (ny, wy) in GL6_NODES.iter().zip(GL6_WEIGHTS) {
                for sgn_y in [-1.0, 1.0] {
                    let y = cy + hs * half * cast::<T>(sgn_y * ny);
                    for (nx, wx) in GL6_NODES.iter().zip(GL6_WEIGHTS) {
                        for sgn_x in [-1.0, 1.0] {
                            let x = cx + hs * half * cast::<T>(sgn_x * nx);
                            let r = (x * x + y * y).sqrt();
                            total += cast::<T>(wx * wy) * time_integral(r, t1, t2, gamma, a);
                        }
                    }
                }
            }
        }
    }
    total * hs * hs * cast::<T>(0.25)
}

/// Cell integrals `∫_{cell} δ^{β−(2+2a)}` indexed by lattice offset, with the
/// exact singular-cell integral at the origin.
struct RieszKernel<T> {
    nt: usize,
    nx: usize,
    w: Vec<T>,
}

impl<T: Real> RieszKernel<T> {
    fn new(f: &SampledSpaceTimeFunction<T>, beta: T, a: T) -> Result<Self, PotentialsError> {
        let dim = parabolic_dimension(a);
        let gamma = dim - beta;
        let (nt, nx) = (2 * f.nt - 1, 2 * f.nx - 1);
        let mut w = vec![T::zero(); nt * nx * nx];
        for k in 0..nt {
            let dk = k as i64 - f.nt as i64 + 1;
            for j in 0..nx {
                let dj = j as i64 - f.nx as i64 + 1;
                for i in 0..nx {
                    let di = i as i64 - f.nx as i64 + 1;
                    let near = di.abs().max(dj.abs());
                    let sub = match near {
                        0..=1 => 4,
                        2..=3 => 2,
                        _ => 1,
                    };
                    w[(k * nx + j) * nx + i] = if dk == 0 && near == 0 {
                        T::zero()
                    } else {
                        cell_integral(gamma, a, f.hx, f.ht, dk, dj, di, sub)
                    };
                }
            }
        }
        let centre = ((f.nt - 1) * nx + (f.nx - 1)) * nx + (f.nx - 1);
        w[centre] = singular_cell_integral(gamma, a, f.hx, f.ht)?;
        Ok(Self { nt, nx, w })
    }

    fn at(&self, dk: i64, dj: i64, di: i64, f: &SampledSpaceTimeFunction<T>) -> T {
        let k = (dk + f.nt as i64 - 1) as usize;
        let j = (dj + f.nx as i64 - 1) as usize;
        let i = (di + f.nx as i64 - 1) as usize;
        debug_assert!(k < self.nt && j < self.nx && i < self.nx);
        self.w[(k * self.nx + j) * self.nx + i]
    }
}

/// Parabolic Riesz potential `I_β f(z) = ∫ f(w) δ(z, w)^{β−(2+2a)} dw` of a
/// function supported on the (non-periodic) lattice.
///
/// `f` is taken constant on each cell, so the potential at a lattice point is
/// the double sum of `f` against the kernel integrated over each cell.
pub fn riesz_potential<T: Real>(
    f: &SampledSpaceTimeFunction<T>,
    beta: T,
    a: T,
) -> Result<SampledSpaceTimeFunction<T>, PotentialsError> {
    let dim = parabolic_dimension(a);
    if !(beta > T::zero() && beta < dim) {
        return Err(PotentialsError::UnsupportedBeta(crate::scalar::to_f64(beta)));
    }
    if f.periodic {
        return Err(PotentialsError::UnsupportedParameters("Riesz potential needs a non-periodic lattice".into()));
    }
    let kernel = RieszKernel::new(f, beta, a)?;
    Ok(riesz_with(f, &kernel))
}

fn riesz_with<T: Real>(f: &SampledSpaceTimeFunction<T>, kernel: &RieszKernel<T>) -> SampledSpaceTimeFunction<T> {
    let mut out = vec![T::zero(); f.values.len()];
    for wk in 0..f.nt {
        for wj in 0..f.nx {
            for wi in 0..f.nx {
                let fv = f.get(wk, wj, wi);
                if fv == T::zero() {
                    continue;
                }
                for zk in 0..f.nt {
                    for zj in 0..f.nx {
                        let row = f.index(zk, zj, 0);
                        let dk = zk as i64 - wk as i64;
                        let dj = zj as i64 - wj as i64;
                        for zi in 0..f.nx {
                            out[row + zi] += fv * kernel.at(dk, dj, zi as i64 - wi as i64, f);
                        }
                    }
                }
            }
        }
    }
    f.with_values(out)
}

/// Dyadic radii `r₀ 2^k` from the cell radius until the cylinder exceeds the lattice.
pub fn dyadic_radii<T: Real>(f: &SampledSpaceTimeFunction<T>, a: T) -> Vec<T> {
    let r0 = f.cell_radius(a);
    let diam = f.diameter(a);
    let mut out = vec![r0];
    while *out.last().unwrap() <= diam {
        let next = *out.last().unwrap() * cast(2.0);
        out.push(next);
    }
    out
}

/// Averages of `|f|` over `Q_r(z)` for every lattice point and every radius
/// in `radii`; points outside the lattice count as zeros.
fn cylinder_averages<T: Real>(f: &SampledSpaceTimeFunction<T>, a: T, radii: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let st = CylinderStencil::new(r, a, f.hx, f.ht);
        let count = from_usize::<T>(st.full_count());
        let mut sums = vec![T::zero(); f.values.len()];
        for wk in 0..f.nt {
            for wj in 0..f.nx {
                for wi in 0..f.nx {
                    let v = f.get(wk, wj, wi).abs();
                    if v == T::zero() {
                        continue;
                    }
                    for dk in -st.time_half..=st.time_half {
                        let Some(zk) = wrap(wk as i64 + dk, f.nt, false) else { continue };
                        for &(di, dj) in &st.space {
                            let Some(zj) = wrap(wj as i64 + dj, f.nx, f.periodic) else { continue };
                            let Some(zi) = wrap(wi as i64 + di, f.nx, f.periodic) else { continue };
                            sums[f.index(zk, zj, zi)] += v;
                        }
                    }
                }
            }
        }
        sums.iter_mut().for_each(|s| *s /= count);
        out.push(sums);
    }
    out
}

/// Fractional parabolic maximal function
/// `M̃_α f(z) = sup_r r^α ⨍_{Q_r(z)} |f|` over dyadic radii.
pub fn maximal_operator<T: Real>(f: &SampledSpaceTimeFunction<T>, order: T, a: T) -> SampledSpaceTimeFunction<T> {
    let radii = dyadic_radii(f, a);
    let avgs = cylinder_averages(f, a, &radii);
    maximal_from_averages(f, &radii, &avgs, order)
}

fn maximal_from_averages<T: Real>(
    f: &SampledSpaceTimeFunction<T>,
    radii: &[T],
    avgs: &[Vec<T>],
    order: T,
) -> SampledSpaceTimeFunction<T> {
    let mut out = vec![T::zero(); f.values.len()];
    for (r, avg) in radii.iter().zip(avgs) {
        let w = r.powf(order);
        for (o, &v) in out.iter_mut().zip(avg) {
            *o = o.max(w * v);
        }
    }
    f.with_values(out)
}

/// Result of [`hedberg_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct HedbergReport<T> {
    /// Constant derived from the dyadic shell sums of the lattice.
    pub constant: T,
    /// `max_z I_β f / (c [M_{λ/p} f]^{βp/λ} [M₀ f]^{1−βp/λ})`.
    pub max_ratio: T,
    pub potential: SampledSpaceTimeFunction<T>,
}

/// Hedberg constant for lattice geometry, order `β`, and `μ = λ/p`.
///
/// Group the kernel cells into dyadic shells `r_k ≤ δ < r_{k+1}` (by cell
/// centre) and let `W_k` be the largest cell weight in shell `k`.  Since shell
/// `k` lies in `Q_{r_{k+1}}`, its contribution is at most `W_k n_{k+1}` times
/// the average of `f` on that cylinder, so `I ≤ P_J M₀ + Q_J M_μ` for every
/// `J`.  Bounding `P_J ≤ a₁ r_J^β` and `Q_J ≤ a₂ r_J^{β−μ}` and optimising over
/// dyadic `r_J` yields the constant.
pub fn hedberg_constant<T: Real>(f: &SampledSpaceTimeFunction<T>, beta: T, mu: T, a: T) -> Result<T, PotentialsError> {
    let kernel = RieszKernel::new(f, beta, a)?;
    hedberg_constant_with(f, &kernel, beta, mu, a)
}

fn hedberg_constant_with<T: Real>(
    f: &SampledSpaceTimeFunction<T>,
    kernel: &RieszKernel<T>,
    beta: T,
    mu: T,
    a: T,
) -> Result<T, PotentialsError> {
    let radii = dyadic_radii(f, a);
    let counts: Vec<T> = radii
        .iter()
        .map(|&r| from_usize::<T>(CylinderStencil::new(r, a, f.hx, f.ht).full_count()))
        .collect();
    let last = radii.len() - 1;
    let origin = ParabolicPoint {
        t: T::zero(),
        x: [T::zero(), T::zero()],
    };
    let mut wmax = vec![T::zero(); last];
    let mut kcell = T::zero();
    for dk in -(f.nt as i64 - 1)..=(f.nt as i64 - 1) {
        for dj in -(f.nx as i64 - 1)..=(f.nx as i64 - 1) {
            for di in -(f.nx as i64 - 1)..=(f.nx as i64 - 1) {
                let w = kernel.at(dk, dj, di, f);
                if dk == 0 && dj == 0 && di == 0 {
                    kcell = w;
                    continue;
                }
                let z = ParabolicPoint {
                    t: f.ht * from_i64::<T>(dk),
                    x: [f.hx * from_i64::<T>(di), f.hx * from_i64::<T>(dj)],
                };
                let d = delta_metric(&origin, &z, a);
                let Some(k) = (0..last).find(|&k| d < radii[k + 1]) else {
                    return Err(PotentialsError::UnsupportedParameters("offset beyond the dyadic radii".into()));
                };
                wmax[k] = wmax[k].max(w);
            }
        }
    }
    let shell = |k: usize| wmax[k] * counts[k + 1];
    let mut a1 = T::zero();
    let mut a2 = T::zero();
    let mut p_acc = kcell;
    for j in 0..=last {
        a1 = a1.max(p_acc / radii[j].powf(beta));
        if j < last {
            let q: T = (j..last).fold(T::zero(), |acc, k| acc + shell(k) * radii[k + 1].powf(-mu));
            a2 = a2.max(q / radii[j].powf(beta - mu));
            p_acc += shell(j);
        }
    }
    let ratio = beta / mu;
    let kappa = (mu - beta) / beta;
    let h = a1.powf(T::one() - ratio) * a2.powf(ratio) * (kappa.powf(ratio) + kappa.powf(ratio - T::one()));
    let rho = (a1 / (kappa * a2)).powf(T::one() / mu).max(T::one());
    let two = cast::<T>(2.0);
    Ok(h * two.powf(mu - beta).max(rho.powf(beta)))
}

/// Checks `I_β f ≤ c [M_{λ/p} f]^{βp/λ} [M₀ f]^{1−βp/λ}` pointwise.
pub fn hedberg_check<T: Real>(
    f: &SampledSpaceTimeFunction<T>,
    p: T,
    lambda: T,
    beta: T,
    a: T,
) -> Result<HedbergReport<T>, PotentialsError> {
    let mu = lambda / p;
    if !(beta > T::zero() && beta < mu) {
        return Err(PotentialsError::UnsupportedParameters(format!(
            "Hedberg bound needs 0 < beta < lambda/p (beta = {beta}, lambda/p = {mu})"
        )));
    }
    if f.values.iter().any(|&v| v < T::zero()) {
        return Err(PotentialsError::UnsupportedParameters("Hedberg bound needs a nonnegative function".into()));
    }
    if f.periodic {
        return Err(PotentialsError::UnsupportedParameters("Hedberg bound needs a non-periodic lattice".into()));
    }
    let kernel = RieszKernel::new(f, beta, a)?;
    let potential = riesz_with(f, &kernel);
    let constant = hedberg_constant_with(f, &kernel, beta, mu, a)?;
    let radii = dyadic_radii(f, a);
    let avgs = cylinder_averages(f, a, &radii);
    let m_mu = maximal_from_averages(f, &radii, &avgs, mu);
    let m_0 = maximal_from_averages(f, &radii, &avgs, T::zero());
    let theta = beta / mu;
    let mut max_ratio = T::zero();
    for q in 0..f.values.len() {
        let bound = constant * m_mu.values[q].powf(theta) * m_0.values[q].powf(T::one() - theta);
        if bound > T::zero() {
            max_ratio = max_ratio.max(potential.values[q] / bound);
        }
    }
    Ok(HedbergReport {
        constant,
        max_ratio,
        potential,
    })
}

/// Result of [`poincare_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareReport<T> {
    /// `max ⨍|θ − θ_Q|ᵖ / ⨍(r^{2βp}|(−Δ)^β θ|ᵖ + r^{2ap}|∂ₜθ|ᵖ)` per radius.
    pub ratios: Vec<(T, T)>,
    pub max_ratio: T,
    pub cylinders: usize,
}

/// Compares the mean oscillation of `θ` on parabolic cylinders with the
/// fractional-derivative and time-derivative averages.
///
/// Centres form a fixed 16 × 16 spatial grid (every `n/16`-th point, so the
/// same physical centres are used at every resolution) at every snapshot;
/// cylinders with fewer than 8 samples are skipped.
pub fn poincare_check<T: Real>(
    series: &[SpectralField<T>],
    dt: T,
    beta: T,
    p: T,
    a: T,
    radii: &[T],
) -> Result<PoincareReport<T>, PotentialsError> {
    if series.len() < 2 {
        return Err(PotentialsError::InsufficientResolution(8));
    }
    if !(beta > T::zero() && beta < T::one() && p >= T::one()) {
        return Err(PotentialsError::UnsupportedParameters(format!("beta = {beta}, p = {p}")));
    }
    let theta = SampledSpaceTimeFunction::from_snapshots(series, dt)?;
    let frac: Vec<SpectralField<T>> = series
        .iter()
        .map(|s| fractional_laplacian(s, beta))
        .collect::<Result<_, _>>()
        .map_err(|e| PotentialsError::UnsupportedParameters(e.to_string()))?;
    let frac = SampledSpaceTimeFunction::from_snapshots(&frac, dt)?;
    let nt = theta.nt;
    let plane = theta.nx * theta.nx;
    let mut dtheta = vec![T::zero(); theta.values.len()];
    for k in 0..nt {
        let (lo, hi) = if k == 0 {
            (0, 1)
        } else if k == nt - 1 {
            (nt - 2, nt - 1)
        } else {
            (k - 1, k + 1)
        };
        let span = dt * from_usize((hi - lo) as usize);
        for q in 0..plane {
            dtheta[k * plane + q] = (theta.values[hi * plane + q] - theta.values[lo * plane + q]) / span;
        }
    }
    let two = cast::<T>(2.0);
    let mut ratios = Vec::new();
    let mut cylinders = 0usize;
    let mut max_ratio = T::zero();
    let mut idx = Vec::new();
    for &r in radii {
        let st = CylinderStencil::new(r, a, theta.hx, theta.ht);
        let ws = r.powf(two * beta * p);
        let wt = r.powf(two * a * p);
        let mut best = T::zero();
        let stride = (theta.nx / 16).max(1);
        for k in 0..nt {
            for j in (0..theta.nx).step_by(stride) {
                for i in (0..theta.nx).step_by(stride) {
                    gather(&theta, &st, k, j, i, &mut idx);
                    if idx.len() < 8 {
                        continue;
                    }
                    let cnt = from_usize::<T>(idx.len());
                    let mean = idx.iter().fold(T::zero(), |acc, &q| acc + theta.values[q]) / cnt;
                    let lhs = idx.iter().fold(T::zero(), |acc, &q| acc + (theta.values[q] - mean).abs().powf(p)) / cnt;
                    let rhs = idx.iter().fold(T::zero(), |acc, &q| {
                        acc + ws * frac.values[q].abs().powf(p) + wt * dtheta[q].abs().powf(p)
                    }) / cnt;
                    cylinders += 1;
                    let ratio = if rhs > T::zero() {
                        lhs / rhs
                    } else if lhs > T::zero() {
                        T::infinity()
                    } else {
                        T::zero()
                    };
                    best = best.max(ratio);
                }
            }
        }
        max_ratio = max_ratio.max(best);
        ratios.push((r, best));
    }
    if cylinders == 0 {
        return Err(PotentialsError::InsufficientResolution(8));
    }
    Ok(PoincareReport {
        ratios,
        max_ratio,
        cylinders,
    })
}

/// Improved integrability of Riesz potentials: `‖I_β f‖_{L^{p̃}}` with
/// `p̃ = pλ/(λ − pβ)`, defined for `1 < p < λ/β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrabilityReport<T> {
    pub p_tilde: T,
    pub norm: T,
}

pub fn riesz_integrability<T: Real>(
    f: &SampledSpaceTimeFunction<T>,
    beta: T,
    p: T,
    lambda: T,
    a: T,
) -> Result<IntegrabilityReport<T>, PotentialsError> {
    if !(p > T::one() && p < lambda / beta) {
        return Err(PotentialsError::UnsupportedParameters(format!("need 1 < p < lambda/beta (p = {p})")));
    }
    let p_tilde = p * lambda / (lambda - p * beta);
    let pot = riesz_potential(f, beta, a)?;
    Ok(IntegrabilityReport {
        p_tilde,
        norm: pot.lp_norm(p_tilde),
    })
}

/// Hölder continuity of Riesz potentials for `β > λ/p`.
///
/// Two parameter regimes lead to the bound: `β < 1` and `βp ≥ 2 + 2a`.
/// Either is accepted and the report records which ones hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderReport<T> {
    /// `β − λ/p`.
    pub exponent: T,
    /// `sup |I_β f(z) − I_β f(z')| / δ(z, z')^{β−λ/p}` over sampled pairs with `δ < 1`.
    pub quotient: T,
    pub pairs: usize,
    /// `β < 1`.
    pub small_order: bool,
    /// `βp ≥ 2 + 2a`.
    pub supercritical: bool,
}

pub fn riesz_holder<T: Real>(
    f: &SampledSpaceTimeFunction<T>,
    beta: T,
    p: T,
    lambda: T,
    a: T,
    stride: usize,
) -> Result<HolderReport<T>, PotentialsError> {
    let exponent = beta - lambda / p;
    let small_order = beta < T::one();
    let supercritical = beta * p >= parabolic_dimension(a);
    if !(exponent > T::zero()) || !(small_order || supercritical) {
        return Err(PotentialsError::UnsupportedParameters(format!(
            "need beta > lambda/p and either beta < 1 or beta p >= 2 + 2a (beta = {beta}, p = {p}, lambda = {lambda})"
        )));
    }
    let pot = riesz_potential(f, beta, a)?;
    let stride = stride.max(1);
    let mut pts = Vec::new();
    for k in (0..f.nt).step_by(stride) {
        for j in (0..f.nx).step_by(stride) {
            for i in (0..f.nx).step_by(stride) {
                pts.push((f.point(k, j, i), pot.get(k, j, i)));
            }
        }
    }
    let mut quotient = T::zero();
    let mut pairs = 0;
    for (m, (z1, v1)) in pts.iter().enumerate() {
        for (z2, v2) in &pts[m + 1..] {
            let d = delta_metric(z1, z2, a);
            if d > T::zero() && d < T::one() {
                pairs += 1;
                quotient = quotient.max((*v1 - *v2).abs() / d.powf(exponent));
            }
        }
    }
    Ok(HolderReport {
        exponent,
        quotient,
        pairs,
        small_order,
        supercritical,
    })
}
