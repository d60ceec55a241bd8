//! Director fields `d : T² → S²` and the stresses they induce.

use num_traits::Zero;
use thiserror::Error;

use crate::scalar::{cast, to_f64, Real};
use crate::spectral::{differential_op, DiffOp, SpectralError, SpectralField, SpectralGrid};

/// Smallest admissible pointwise norm before projection onto the sphere.
pub const DEGENERATE_NORM: f64 = 1.0e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("vector field nearly vanishes at grid point {index} (|v| = {norm:e})")]
    DegeneratePoint { index: usize, norm: f64 },
    #[error("director field needs 3 components, got {0}")]
    NotADirector(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Unit vector field with three components.
#[derive(Debug, Clone)]
pub struct DirectorField<T: Real> {
    field: SpectralField<T>,
}

/// Diagnostics returned by [`project_to_sphere`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionDefect<T> {
    /// `max | |d| − 1 |` after band-limiting the normalised field.
    pub truncation: T,
    /// `max | |d| − 1 |` of the returned field.
    pub unit: T,
}

impl<T: Real> DirectorField<T> {
    /// Wraps a three-component field without renormalising it.
    pub fn from_field(field: SpectralField<T>) -> Result<Self, FieldError> {
        if field.ncomp() != 3 {
            return Err(FieldError::NotADirector(field.ncomp()));
        }
        Ok(Self { field })
    }

    /// Samples `f` and projects the result onto the sphere.
    pub fn from_fn(grid: &SpectralGrid<T>, f: impl Fn(T, T) -> [T; 3]) -> Result<Self, FieldError> {
        let v = SpectralField::from_fn_components(grid, 3, |c, x1, x2| f(x1, x2)[c]);
        Ok(project_to_sphere(&v)?.0)
    }

    /// Constant director.
    pub fn constant(grid: &SpectralGrid<T>, d: [T; 3]) -> Result<Self, FieldError> {
        Self::from_fn(grid, |_, _| d)
    }

    pub fn field(&self) -> &SpectralField<T> {
        &self.field
    }

    pub fn into_field(self) -> SpectralField<T> {
        self.field
    }

    pub fn grid(&self) -> &SpectralGrid<T> {
        self.field.grid()
    }

    /// `max | |d(x)| − 1 |` over the grid.
    pub fn unit_defect(&self) -> T {
        self.field
            .pointwise_norm()
            .iter()
            .fold(T::zero(), |acc, &r| acc.max((r - T::one()).abs()))
    }
}

/// Normalises `v` pointwise, band-limits to the dealias mask, and normalises
/// once more.
pub fn project_to_sphere<T: Real>(
    v: &SpectralField<T>,
) -> Result<(DirectorField<T>, ProjectionDefect<T>), FieldError> {
    if v.ncomp() != 3 {
        return Err(FieldError::NotADirector(v.ncomp()));
    }
    let grid = v.grid().clone();
    let first = normalize(v.to_physical())?;
    let banded = SpectralField::from_physical(&grid, &first).masked();
    let phys = banded.to_physical();
    let truncation = max_unit_defect(&phys);
    let second = normalize(phys)?;
    let unit = max_unit_defect(&second);
    let d = DirectorField {
        field: SpectralField::from_physical(&grid, &second),
    };
    Ok((d, ProjectionDefect { truncation, unit }))
}

fn normalize<T: Real>(mut comps: Vec<Vec<T>>) -> Result<Vec<Vec<T>>, FieldError> {
    let len = comps[0].len();
    let floor = cast::<T>(DEGENERATE_NORM);
    for i in 0..len {
        let r = (comps[0][i] * comps[0][i] + comps[1][i] * comps[1][i] + comps[2][i] * comps[2][i]).sqrt();
        if !(r >= floor) {
            return Err(FieldError::DegeneratePoint {
                index: i,
                norm: to_f64(r),
            });
        }
        for c in comps.iter_mut() {
            c[i] /= r;
        }
    }
    Ok(comps)
}

fn max_unit_defect<T: Real>(comps: &[Vec<T>]) -> T {
    (0..comps[0].len()).fold(T::zero(), |acc, i| {
        let r = (comps[0][i] * comps[0][i] + comps[1][i] * comps[1][i] + comps[2][i] * comps[2][i]).sqrt();
        acc.max((r - T::one()).abs())
    })
}

/// Padded-grid samples of `∂_i d_m`, shared by all quadratic quantities.
pub struct DirectorDerivatives<T: Real> {
    grid: SpectralGrid<T>,
    /// `grad[i][m]` holds `∂_{i+1} d_{m+1}` on the padded grid.
    pub grad: [Vec<Vec<T>>; 2],
}

impl<T: Real> DirectorDerivatives<T> {
    pub fn new(d: &DirectorField<T>) -> Result<Self, FieldError> {
        let f = d.field();
        let g1 = differential_op(f, DiffOp::Partial(0))?.to_padded();
        let g2 = differential_op(f, DiffOp::Partial(1))?.to_padded();
        Ok(Self {
            grid: f.grid().clone(),
            grad: [g1, g2],
        })
    }

    /// Padded samples of `∂_i d · ∂_j d`.
    pub fn dot(&self, i: usize, j: usize) -> Vec<T> {
        let len = self.grad[0][0].len();
        let mut out = vec![T::zero(); len];
        for m in 0..3 {
            for ((o, &a), &b) in out.iter_mut().zip(&self.grad[i][m]).zip(&self.grad[j][m]) {
                *o += a * b;
            }
        }
        out
    }

    /// Masked `|∇d|²`.
    pub fn grad_sq(&self) -> SpectralField<T> {
        let a = self.dot(0, 0);
        let b = self.dot(1, 1);
        let s: Vec<T> = a.iter().zip(&b).map(|(&x, &y)| x + y).collect();
        SpectralField::from_padded(&self.grid, &[s])
    }

    /// Trace-free Ericksen stress `Ξ = ∇d ⊙ ∇d − ½|∇d|² I`.
    pub fn stress(&self) -> StressTensor<T> {
        let d11 = self.dot(0, 0);
        let d22 = self.dot(1, 1);
        let half = cast::<T>(0.5);
        let xi11: Vec<T> = d11.iter().zip(&d22).map(|(&a, &b)| half * (a - b)).collect();
        let xi12 = self.dot(0, 1);
        let mut parts = SpectralField::from_padded(&self.grid, &[xi11, xi12]);
        let xi12 = parts.component(1);
        parts = parts.component(0);
        StressTensor { xi11: parts, xi12 }
    }
}

/// Symmetric trace-free `2 × 2` tensor stored through `Ξ₁₁` and `Ξ₁₂`.
#[derive(Debug, Clone)]
pub struct StressTensor<T: Real> {
    pub xi11: SpectralField<T>,
    pub xi12: SpectralField<T>,
}

impl<T: Real> StressTensor<T> {
    pub fn xi22(&self) -> SpectralField<T> {
        self.xi11.scale(-T::one())
    }

    pub fn xi21(&self) -> SpectralField<T> {
        self.xi12.clone()
    }

    pub fn to_symmetric(&self) -> SymmetricTensor<T> {
        SymmetricTensor {
            t11: self.xi11.clone(),
            t12: self.xi12.clone(),
            t22: self.xi22(),
        }
    }
}

/// General symmetric `2 × 2` tensor field.
#[derive(Debug, Clone)]
pub struct SymmetricTensor<T: Real> {
    pub t11: SpectralField<T>,
    pub t12: SpectralField<T>,
    pub t22: SpectralField<T>,
}

impl<T: Real> SymmetricTensor<T> {
    /// Row divergence `(div T)_i = ∂_j T_ij`.
    pub fn divergence(&self) -> Result<SpectralField<T>, SpectralError> {
        let r1 = SpectralField::stack(&[&self.t11, &self.t12])?;
        let r2 = SpectralField::stack(&[&self.t12, &self.t22])?;
        let c1 = differential_op(&r1, DiffOp::Div)?;
        let c2 = differential_op(&r2, DiffOp::Div)?;
        SpectralField::stack(&[&c1, &c2])
    }

    /// `curl div T = ∂₁(div T)₂ − ∂₂(div T)₁`.
    pub fn curl_div(&self) -> Result<SpectralField<T>, SpectralError> {
        differential_op(&self.divergence()?, DiffOp::Curl)
    }
}

/// Ericksen stress tensor of `d`.
pub fn stress_tensor<T: Real>(d: &DirectorField<T>) -> Result<StressTensor<T>, FieldError> {
    Ok(DirectorDerivatives::new(d)?.stress())
}

/// Tension `τ(d) = Δd + |∇d|² d`.
pub fn tension<T: Real>(d: &DirectorField<T>) -> Result<SpectralField<T>, FieldError> {
    let derivs = DirectorDerivatives::new(d)?;
    tension_from(d, &derivs)
}

pub(crate) fn tension_from<T: Real>(
    d: &DirectorField<T>,
    derivs: &DirectorDerivatives<T>,
) -> Result<SpectralField<T>, FieldError> {
    let lap = differential_op(d.field(), DiffOp::Laplacian)?;
    let g = derivs.grad_sq().to_padded().swap_remove(0);
    let dp = d.field().to_padded();
    let prods: Vec<Vec<T>> = dp
        .iter()
        .map(|c| c.iter().zip(&g).map(|(&a, &b)| a * b).collect())
        .collect();
    let cubic = SpectralField::from_padded(d.grid(), &prods);
    Ok(lap.add(&cubic)?)
}

/// The matrix `A(∇d) = [[∂₁d·∂₂d, −∂₁d·∂₁d], [∂₂d·∂₂d, −∂₁d·∂₂d]]`.
pub fn a_matrix<T: Real>(d: &DirectorField<T>) -> Result<[[SpectralField<T>; 2]; 2], FieldError> {
    let derivs = DirectorDerivatives::new(d)?;
    let grid = d.grid();
    let neg = |v: Vec<T>| -> Vec<T> { v.into_iter().map(|x| -x).collect() };
    let p12 = derivs.dot(0, 1);
    let parts = SpectralField::from_padded(
        grid,
        &[p12.clone(), neg(derivs.dot(0, 0)), derivs.dot(1, 1), neg(p12)],
    );
    Ok([
        [parts.component(0), parts.component(1)],
        [parts.component(2), parts.component(3)],
    ])
}

/// `curl div Ξ(d)` with `Ξ` the Ericksen stress.
pub fn curl_div_xi<T: Real>(d: &DirectorField<T>) -> Result<SpectralField<T>, FieldError> {
    Ok(stress_tensor(d)?.to_symmetric().curl_div()?)
}

/// Physical samples of `|∇d|` on the base grid.
pub fn grad_norm_samples<T: Real>(d: &DirectorField<T>) -> Result<Vec<T>, FieldError> {
    let f = d.field();
    let g1 = differential_op(f, DiffOp::Partial(0))?.to_physical();
    let g2 = differential_op(f, DiffOp::Partial(1))?.to_physical();
    let mut out = vec![T::zero(); d.grid().len()];
    for comps in [&g1, &g2] {
        for c in comps.iter() {
            for (o, &x) in out.iter_mut().zip(c) {
                *o += x * x;
            }
        }
    }
    out.iter_mut().for_each(|o| *o = o.sqrt());
    Ok(out)
}

/// `∫ |∇d|²` via Parseval.
pub fn dirichlet_energy<T: Real>(d: &DirectorField<T>) -> Result<T, FieldError> {
    let mut acc = T::zero();
    for axis in 0..2 {
        let g = differential_op(d.field(), DiffOp::Partial(axis))?;
        acc += crate::spectral::inner_product(&g, &g)?;
    }
    Ok(acc)
}

/// Pointwise `d · v` on the base grid for a three-component `v`.
pub fn pointwise_dot<T: Real>(d: &DirectorField<T>, v: &SpectralField<T>) -> Vec<T> {
    let a = d.field().to_physical();
    let b = v.to_physical();
    let mut out = vec![T::zero(); d.grid().len()];
    for (ca, cb) in a.iter().zip(&b) {
        for ((o, &x), &y) in out.iter_mut().zip(ca).zip(cb) {
            *o += x * y;
        }
    }
    out
}

impl<T: Real> SpectralField<T> {
    /// True if every coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        (0..self.ncomp()).all(|c| self.coeffs(c).iter().all(|z| z.is_zero()))
    }
}
