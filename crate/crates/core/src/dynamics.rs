//! Coupled transport / director dynamics and the ETD2RK–Strang integrator.
//!
//! The scalar `θ` obeys
//! `∂ₜθ + u·∇θ + ν(−Δ)^a θ = λ F(d)`, `u = ∇⊥(−Δ)^{α−1}θ`,
//! and the director `∂ₜd + u·∇d = γ(Δd + |∇d|² d)`.  Each equation is
//! advanced with an exponential time-differencing Runge–Kutta scheme of
//! second order; the two are coupled by Strang splitting
//! (`θ` half step, `d` full step, `θ` half step).

use num_complex::Complex;
use thiserror::Error;

use crate::energetics::{self, EnergyReport};
use crate::fields::{project_to_sphere, DirectorDerivatives, DirectorField, FieldError, ProjectionDefect, SymmetricTensor};
use crate::scalar::{cast, from_i64, from_usize, to_f64, Real};
use crate::spectral::{
    biot_savart, differential_op, fractional_laplacian, DiffOp, SpectralError, SpectralField, SpectralGrid,
};

/// Name of the operator splitting recorded in run metadata.
pub const SPLITTING: &str = "strang(theta/2, d, theta/2)";

/// Largest admissible advective Courant number `max|u| dt / h`.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("CFL number {cfl:.3} exceeds {limit} at step {step}")]
    CflViolation { step: u64, cfl: f64, limit: f64 },
    #[error("non-finite state produced at step {step}")]
    StepRejected { step: u64 },
    #[error("ferromagnet mode requires epsilon")]
    MissingEpsilon,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Coupling term added to the `θ` equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingMode {
    /// `(−Δ)^{α−1} curl div Ξ`.
    F1,
    /// `curl div Ξ`.
    F2,
    /// No coupling.
    None,
}

impl ForcingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ForcingMode::F1 => "F1",
            ForcingMode::F2 => "F2",
            ForcingMode::None => "none",
        }
    }
}

/// Soft warnings for parameters outside the analysed regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamFlag {
    /// `a ∉ (1/2, 1)`.
    OutsideRegularityRange,
    /// `α ≠ 1/2`.
    AlphaNotHalf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    /// Order of the dissipation `(−Δ)^a`.
    pub a: T,
    /// Order of the velocity law `u = ∇⊥(−Δ)^{α−1}θ`.
    pub alpha: T,
    pub nu: T,
    pub lambda: T,
    pub gamma: T,
    pub forcing: ForcingMode,
    /// Anisotropy parameter; `Some` switches the director to the ferromagnet model.
    pub epsilon: Option<T>,
    pub dt: T,
    pub t_final: T,
    pub n: usize,
}

impl<T: Real> ModelParams<T> {
    /// Parameters with `ν = λ = γ = 1`, `F1` forcing and no anisotropy.
    pub fn new(a: T, alpha: T, n: usize, dt: T, t_final: T) -> Self {
        Self {
            a,
            alpha,
            nu: T::one(),
            lambda: T::one(),
            gamma: T::one(),
            forcing: ForcingMode::F1,
            epsilon: None,
            dt,
            t_final,
            n,
        }
    }

    pub fn with_forcing(mut self, forcing: ForcingMode) -> Self {
        self.forcing = forcing;
        self
    }

    /// Checks hard constraints and returns soft warnings.
    pub fn validate(&self) -> Result<Vec<ParamFlag>, DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::InvalidParams(msg));
        let (zero, one) = (T::zero(), T::one());
        if !(self.a > zero && self.a <= one) {
            return bad(format!("a = {} must lie in (0, 1]", self.a));
        }
        if !(self.alpha >= zero && self.alpha <= one) {
            return bad(format!("alpha = {} must lie in [0, 1]", self.alpha));
        }
        for (name, v) in [("nu", self.nu), ("lambda", self.lambda), ("gamma", self.gamma)] {
            if !(v > zero && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.dt > zero && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_final > zero && self.t_final.is_finite()) {
            return bad(format!("t_final = {} must be positive", self.t_final));
        }
        if self.n < 8 || self.n % 2 != 0 {
            return bad(format!("n = {} must be even and at least 8", self.n));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > zero && eps.is_finite()) {
                return bad(format!("epsilon = {eps} must be positive"));
            }
        }
        let mut flags = Vec::new();
        let half = cast::<T>(0.5);
        if !(self.a > half && self.a < one) {
            flags.push(ParamFlag::OutsideRegularityRange);
        }
        if self.alpha != half {
            flags.push(ParamFlag::AlphaNotHalf);
        }
        Ok(flags)
    }

    /// Number of steps needed to reach `t_final`.
    pub fn steps(&self) -> u64 {
        let r = to_f64(self.t_final / self.dt);
        (r - 1e-9).ceil().max(0.0) as u64
    }
}

/// Solution snapshot at time `t = step · dt`.
#[derive(Debug, Clone)]
pub struct SimState<T: Real> {
    pub t: T,
    pub step: u64,
    pub theta: SpectralField<T>,
    pub d: DirectorField<T>,
}

impl<T: Real> SimState<T> {
    pub fn new(theta: SpectralField<T>, d: DirectorField<T>) -> Self {
        Self {
            t: T::zero(),
            step: 0,
            theta,
            d,
        }
    }

    pub fn grid(&self) -> &SpectralGrid<T> {
        self.theta.grid()
    }
}

/// Transport velocity of the state.
pub fn velocity<T: Real>(theta: &SpectralField<T>, params: &ModelParams<T>) -> Result<SpectralField<T>, DynamicsError> {
    Ok(biot_savart(theta, params.alpha)?)
}

/// Coupling term `F(d)` of the `θ` equation (without the factor `λ`).
///
/// In ferromagnet mode the stress is the modified tensor `Ξ̃` and the
/// coupling is `(−Δ)^{−1/2} curl div Ξ̃`; the unscaled `curl div Ξ̃` is the
/// other possible reading and is not implemented.
pub fn forcing<T: Real>(d: &DirectorField<T>, params: &ModelParams<T>) -> Result<SpectralField<T>, DynamicsError> {
    if params.forcing == ForcingMode::None {
        return Ok(SpectralField::zeros(d.grid(), 1));
    }
    let derivs = DirectorDerivatives::new(d)?;
    if params.epsilon.is_some() {
        let cd = ferro_stress(d, &derivs).curl_div()?;
        return Ok(fractional_laplacian(&cd, cast(-0.5))?);
    }
    let cd = derivs.stress().to_symmetric().curl_div()?;
    Ok(match params.forcing {
        ForcingMode::F1 => fractional_laplacian(&cd, params.alpha - T::one())?,
        _ => cd,
    })
}

/// `Ξ̃_ij = ½(|∇m|² + m₃²) δ_ij − ∂_i m · ∂_j m`.
pub fn ferro_stress<T: Real>(d: &DirectorField<T>, derivs: &DirectorDerivatives<T>) -> SymmetricTensor<T> {
    let half = cast::<T>(0.5);
    let d3 = d.field().component(2).to_padded().swap_remove(0);
    let p11 = derivs.dot(0, 0);
    let p22 = derivs.dot(1, 1);
    let p12 = derivs.dot(0, 1);
    let len = p11.len();
    let mut t11 = vec![T::zero(); len];
    let mut t22 = vec![T::zero(); len];
    let mut t12 = vec![T::zero(); len];
    for i in 0..len {
        let iso = half * (p11[i] + p22[i] + d3[i] * d3[i]);
        t11[i] = iso - p11[i];
        t22[i] = iso - p22[i];
        t12[i] = -p12[i];
    }
    let parts = SpectralField::from_padded(d.grid(), &[t11, t12, t22]);
    SymmetricTensor {
        t11: parts.component(0),
        t12: parts.component(1),
        t22: parts.component(2),
    }
}

/// Conservative advection `∇·(uθ)`, dealiased.
pub fn advection<T: Real>(theta: &SpectralField<T>, params: &ModelParams<T>) -> Result<SpectralField<T>, DynamicsError> {
    let u = velocity(theta, params)?.to_padded();
    let th = theta.to_padded().swap_remove(0);
    let flux: Vec<Vec<T>> = u
        .iter()
        .map(|uc| uc.iter().zip(&th).map(|(&a, &b)| a * b).collect())
        .collect();
    let flux = SpectralField::from_padded(theta.grid(), &flux);
    Ok(differential_op(&flux, DiffOp::Div)?)
}

/// Nonlinear part of the `θ` equation, `λF(d) − ∇·(uθ)`.
pub fn theta_rhs<T: Real>(state: &SimState<T>, params: &ModelParams<T>) -> Result<SpectralField<T>, DynamicsError> {
    let f = forcing(&state.d, params)?;
    theta_nonlinear(&state.theta, &f, params)
}

fn theta_nonlinear<T: Real>(
    theta: &SpectralField<T>,
    forcing: &SpectralField<T>,
    params: &ModelParams<T>,
) -> Result<SpectralField<T>, DynamicsError> {
    let adv = advection(theta, params)?;
    Ok(forcing.scale(params.lambda).sub(&adv)?)
}

/// Nonlinear part of the director equation with frozen velocity `u`:
/// `γ|∇d|² d − u·∇d`, plus `γ(d₃²/ε² d − d₃/ε² e₃)` in ferromagnet mode.
fn director_nonlinear<T: Real>(
    d: &SpectralField<T>,
    u_padded: &[Vec<T>],
    params: &ModelParams<T>,
) -> Result<SpectralField<T>, DynamicsError> {
    let grid = d.grid();
    let dir = DirectorField::from_field(d.clone())?;
    let derivs = DirectorDerivatives::new(&dir)?;
    let g = derivs.grad_sq().to_padded().swap_remove(0);
    let dp = d.to_padded();
    let gamma = params.gamma;
    let anis = match params.epsilon {
        Some(eps) => {
            let inv = T::one() / (eps * eps);
            let sq: Vec<T> = dp[2].iter().map(|&x| x * x).collect();
            let sq = SpectralField::from_padded(grid, &[sq]).to_padded().swap_remove(0);
            Some((inv, sq))
        }
        None => None,
    };
    let mut out = Vec::with_capacity(3);
    for m in 0..3 {
        let mut v = vec![T::zero(); g.len()];
        for i in 0..v.len() {
            let mut s = gamma * g[i] * dp[m][i] - (u_padded[0][i] * derivs.grad[0][m][i] + u_padded[1][i] * derivs.grad[1][m][i]);
            if let Some((inv, sq)) = &anis {
                s += gamma * *inv * sq[i] * dp[m][i];
                if m == 2 {
                    s -= gamma * *inv * dp[2][i];
                }
            }
            v[i] = s;
        }
        out.push(v);
    }
    Ok(SpectralField::from_padded(grid, &out))
}

/// Director nonlinearity of the ferromagnet model, including `−u·∇d`.
pub fn ferromagnet_rhs<T: Real>(state: &SimState<T>, params: &ModelParams<T>) -> Result<SpectralField<T>, DynamicsError> {
    if params.epsilon.is_none() {
        return Err(DynamicsError::MissingEpsilon);
    }
    let u = velocity(&state.theta, params)?.to_padded();
    director_nonlinear(state.d.field(), &u, params)
}

/// Director nonlinearity of the active model, including `−u·∇d`.
pub fn director_rhs<T: Real>(state: &SimState<T>, params: &ModelParams<T>) -> Result<SpectralField<T>, DynamicsError> {
    let u = velocity(&state.theta, params)?.to_padded();
    director_nonlinear(state.d.field(), &u, params)
}

/// `φ₁(z) = (e^z − 1)/z` and `φ₂(z) = (e^z − 1 − z)/z²`, with series near zero.
pub fn phi_functions<T: Real>(z: T) -> (T, T) {
    if z.abs() < cast(1e-4) {
        let z2 = z * z;
        let p1 = T::one() + z / cast(2.0) + z2 / cast(6.0) + z2 * z / cast(24.0) + z2 * z2 / cast(120.0);
        let p2 = cast::<T>(0.5) + z / cast(6.0) + z2 / cast(24.0) + z2 * z / cast(120.0) + z2 * z2 / cast(720.0);
        (p1, p2)
    } else {
        let em1 = z.exp_m1();
        (em1 / z, (em1 - z) / (z * z))
    }
}

/// Per-mode ETD2RK weights for a diagonal decay rate `L(k) ≥ 0`.
#[derive(Debug, Clone)]
pub struct Etd2rk<T> {
    decay: Vec<T>,
    w1: Vec<T>,
    w2: Vec<T>,
}

impl<T: Real> Etd2rk<T> {
    /// Weights for `∂ₜû = −L(k) û + N̂` over a step `h`.
    pub fn new(grid: &SpectralGrid<T>, h: T, rate: impl Fn(i64, i64) -> T) -> Self {
        let len = grid.len();
        let mut decay = Vec::with_capacity(len);
        let mut w1 = Vec::with_capacity(len);
        let mut w2 = Vec::with_capacity(len);
        for idx in 0..len {
            let (k1, k2) = grid.mode(idx);
            let z = -rate(k1, k2) * h;
            let (p1, p2) = phi_functions(z);
            decay.push(z.exp());
            w1.push(h * p1);
            w2.push(h * p2);
        }
        Self { decay, w1, w2 }
    }

    /// Decay rate `ν|k|^{2a}` of the scalar equation.
    pub fn theta(grid: &SpectralGrid<T>, h: T, params: &ModelParams<T>) -> Self {
        Self::new(grid, h, |k1, k2| {
            if k1 == 0 && k2 == 0 {
                T::zero()
            } else {
                params.nu * from_i64::<T>(k1 * k1 + k2 * k2).powf(params.a)
            }
        })
    }

    /// Decay rate `γ|k|²` of the director equation.
    pub fn director(grid: &SpectralGrid<T>, h: T, params: &ModelParams<T>) -> Self {
        Self::new(grid, h, |k1, k2| params.gamma * from_i64::<T>(k1 * k1 + k2 * k2))
    }

    fn combine(&self, base: &SpectralField<T>, weights: &[T], scale: Option<&[T]>, add: &SpectralField<T>) -> SpectralField<T> {
        let mut out = base.clone();
        for c in 0..out.ncomp() {
            let src = add.coeffs(c);
            let dst = out.coeffs_mut(c);
            for idx in 0..dst.len() {
                let lin = match scale {
                    Some(s) => dst[idx] * s[idx],
                    None => dst[idx],
                };
                dst[idx] = lin + src[idx] * weights[idx];
            }
        }
        out
    }

    /// One step `u ↦ a + h φ₂ (N(a) − N(u))`, `a = e^{−Lh} u + h φ₁ N(u)`.
    pub fn step<F>(&self, u: &SpectralField<T>, mut nonlinear: F) -> Result<SpectralField<T>, DynamicsError>
    where
        F: FnMut(&SpectralField<T>) -> Result<SpectralField<T>, DynamicsError>,
    {
        let n0 = nonlinear(u)?;
        let a = self.combine(u, &self.w1, Some(&self.decay), &n0);
        let n1 = nonlinear(&a)?;
        let diff = n1.sub(&n0)?;
        Ok(self.combine(&a, &self.w2, None, &diff))
    }

    /// Pure linear propagation `e^{−Lh} u`.
    pub fn propagate(&self, u: &SpectralField<T>) -> SpectralField<T> {
        let zero = SpectralField::zeros(u.grid(), u.ncomp());
        self.combine(u, &self.w1, Some(&self.decay), &zero)
    }
}

/// Advances `θ` by one full step with the director frozen.
pub fn step_theta<T: Real>(state: &SimState<T>, params: &ModelParams<T>) -> Result<SpectralField<T>, DynamicsError> {
    let etd = Etd2rk::theta(state.grid(), params.dt, params);
    let f = forcing(&state.d, params)?;
    let out = etd.step(&state.theta, |th| theta_nonlinear(th, &f, params))?;
    if !out.is_finite() {
        return Err(DynamicsError::StepRejected { step: state.step });
    }
    Ok(out)
}

/// Advances `d` by one full step with the velocity frozen, then projects
/// back onto the sphere.
pub fn step_director<T: Real>(
    state: &SimState<T>,
    params: &ModelParams<T>,
) -> Result<(DirectorField<T>, ProjectionDefect<T>), DynamicsError> {
    let etd = Etd2rk::director(state.grid(), params.dt, params);
    let u = velocity(&state.theta, params)?.to_padded();
    advance_director(&etd, &state.d, &u, params, state.step)
}

fn advance_director<T: Real>(
    etd: &Etd2rk<T>,
    d: &DirectorField<T>,
    u_padded: &[Vec<T>],
    params: &ModelParams<T>,
    step: u64,
) -> Result<(DirectorField<T>, ProjectionDefect<T>), DynamicsError> {
    let raw = etd.step(d.field(), |x| director_nonlinear(x, u_padded, params))?;
    if !raw.is_finite() {
        return Err(DynamicsError::StepRejected { step });
    }
    Ok(project_to_sphere(&raw)?)
}

/// Strang-split integrator with cached ETD weights and forcing.
pub struct Integrator<T: Real> {
    params: ModelParams<T>,
    half_theta: Etd2rk<T>,
    full_director: Etd2rk<T>,
    cached_forcing: Option<SpectralField<T>>,
    h: T,
}

impl<T: Real> Integrator<T> {
    pub fn new(grid: &SpectralGrid<T>, params: &ModelParams<T>) -> Self {
        let half = params.dt * cast(0.5);
        Self {
            params: params.clone(),
            half_theta: Etd2rk::theta(grid, half, params),
            full_director: Etd2rk::director(grid, params.dt, params),
            cached_forcing: None,
            h: grid.spacing(),
        }
    }

    /// `max|u| dt / h` for the given scalar.
    pub fn cfl(&self, theta: &SpectralField<T>) -> Result<T, DynamicsError> {
        let umax = velocity(theta, &self.params)?
            .pointwise_norm()
            .into_iter()
            .fold(T::zero(), T::max);
        Ok(umax * self.params.dt / self.h)
    }

    /// One Strang step: `θ` by `dt/2`, `d` by `dt`, `θ` by `dt/2`.
    pub fn step(&mut self, state: &SimState<T>) -> Result<(SimState<T>, ProjectionDefect<T>), DynamicsError> {
        let p = &self.params;
        let cfl = self.cfl(&state.theta)?;
        if !(cfl <= cast(CFL_LIMIT)) {
            if !cfl.is_finite() {
                return Err(DynamicsError::StepRejected { step: state.step });
            }
            return Err(DynamicsError::CflViolation {
                step: state.step,
                cfl: to_f64(cfl),
                limit: CFL_LIMIT,
            });
        }
        let f0 = match self.cached_forcing.take() {
            Some(f) => f,
            None => forcing(&state.d, p)?,
        };
        let theta_half = self.half_theta.step(&state.theta, |th| theta_nonlinear(th, &f0, p))?;
        if !theta_half.is_finite() {
            return Err(DynamicsError::StepRejected { step: state.step });
        }
        let u = velocity(&theta_half, p)?.to_padded();
        let (d_new, defect) = advance_director(&self.full_director, &state.d, &u, p, state.step)?;
        let f1 = forcing(&d_new, p)?;
        let theta_new = self.half_theta.step(&theta_half, |th| theta_nonlinear(th, &f1, p))?;
        if !theta_new.is_finite() {
            return Err(DynamicsError::StepRejected { step: state.step });
        }
        self.cached_forcing = Some(f1);
        let step = state.step + 1;
        Ok((
            SimState {
                t: p.dt * from_usize::<T>(step as usize),
                step,
                theta: theta_new,
                d: d_new,
            },
            defect,
        ))
    }
}

/// Options controlling diagnostics during [`run_simulation`].
#[derive(Debug, Clone)]
pub struct RunOptions<T> {
    /// Record a diagnostics sample every `cadence` steps (and at the end).
    pub cadence: u64,
    /// Exponents for the running space–time integrals.
    pub p_list: Vec<T>,
}

impl<T: Real> Default for RunOptions<T> {
    fn default() -> Self {
        Self {
            cadence: 1,
            p_list: vec![cast(2.0)],
        }
    }
}

/// Final state and diagnostics of a run.
#[derive(Debug, Clone)]
pub struct RunOutput<T: Real> {
    pub state: SimState<T>,
    pub report: EnergyReport<T>,
}

/// Integrates from `(θ₀, d₀)` up to `t_final`.
pub fn run_simulation<T: Real>(
    params: &ModelParams<T>,
    theta0: SpectralField<T>,
    d0: DirectorField<T>,
    options: &RunOptions<T>,
) -> Result<RunOutput<T>, DynamicsError> {
    run_simulation_with(params, theta0, d0, options, |_, _| {})
}

/// As [`run_simulation`], calling `observe` after every recorded sample.
pub fn run_simulation_with<T: Real, F>(
    params: &ModelParams<T>,
    theta0: SpectralField<T>,
    d0: DirectorField<T>,
    options: &RunOptions<T>,
    mut observe: F,
) -> Result<RunOutput<T>, DynamicsError>
where
    F: FnMut(&SimState<T>, &energetics::EnergySample<T>),
{
    params.validate()?;
    let grid = theta0.grid().clone();
    if grid.n() != params.n || d0.grid().n() != params.n {
        return Err(DynamicsError::InvalidParams(format!(
            "initial data on a {}-grid, parameters request n = {}",
            grid.n(),
            params.n
        )));
    }
    if theta0.ncomp() != 1 {
        return Err(SpectralError::ComponentMismatch {
            expected: 1,
            found: theta0.ncomp(),
        }
        .into());
    }
    let mut state = SimState::new(theta0.masked(), d0);
    let mut report = EnergyReport::new(params, &options.p_list, &state)?;
    let cadence = options.cadence.max(1);
    let total = params.steps();
    let sample = report.record(&state, params)?;
    observe(&state, &sample);
    let mut integrator = Integrator::new(&grid, params);
    while state.step < total {
        let (next, _) = integrator.step(&state)?;
        state = next;
        report.accumulate_lp(&state, params.dt)?;
        if state.step % cadence == 0 || state.step == total {
            let sample = report.record(&state, params)?;
            observe(&state, &sample);
        }
    }
    Ok(RunOutput { state, report })
}

/// Direct assembly of the liquid-crystal vorticity equation
/// `∂ₜω + u·∇ω − Δω = −curl div Ξ(d)` with `curl u = ω`, `div u = 0`.
pub mod vorticity {
    use super::*;

    /// Velocity recovered from vorticity through the stream function
    /// `Δψ = ω`, `u = (−∂₂ψ, ∂₁ψ)`.
    pub fn velocity_from_vorticity<T: Real>(omega: &SpectralField<T>) -> Result<SpectralField<T>, DynamicsError> {
        let psi = omega.map_modes(|_, k1, k2, z| {
            if k1 == 0 && k2 == 0 {
                Complex::new(T::zero(), T::zero())
            } else {
                -z / from_i64::<T>(k1 * k1 + k2 * k2)
            }
        });
        Ok(differential_op(&psi, DiffOp::PerpGrad)?)
    }

    /// Nonlinear right-hand side `−u·∇ω − curl div Ξ(d)`.
    pub fn rhs<T: Real>(omega: &SpectralField<T>, d: &DirectorField<T>) -> Result<SpectralField<T>, DynamicsError> {
        let grid = omega.grid();
        let u = velocity_from_vorticity(omega)?.to_padded();
        let g = differential_op(omega, DiffOp::Grad)?.to_padded();
        let adv: Vec<T> = (0..u[0].len()).map(|i| u[0][i] * g[0][i] + u[1][i] * g[1][i]).collect();
        let adv = SpectralField::from_padded(grid, &[adv]);
        let derivs = DirectorDerivatives::new(d)?;
        let s = derivs.stress();
        let div1 = differential_op(&SpectralField::stack(&[&s.xi11, &s.xi12])?, DiffOp::Div)?;
        let div2 = differential_op(&SpectralField::stack(&[&s.xi12, &s.xi22()])?, DiffOp::Div)?;
        let cd = differential_op(&div2, DiffOp::Partial(0))?.sub(&differential_op(&div1, DiffOp::Partial(1))?)?;
        Ok(adv.add(&cd)?.scale(-T::one()))
    }

    /// Linear part `Δω`.
    pub fn linear<T: Real>(omega: &SpectralField<T>) -> Result<SpectralField<T>, DynamicsError> {
        Ok(differential_op(omega, DiffOp::Laplacian)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_series_matches_closed_form_near_threshold() {
        for z in [-2e-4, -1.5e-4, -0.99e-4, 0.99e-4] {
            let (a, b) = phi_functions(z);
            let em1 = f64::exp_m1(z);
            assert!((a - em1 / z).abs() < 1e-12);
            assert!((b - (em1 - z) / (z * z)).abs() < 1e-8);
        }
        assert_eq!(phi_functions(0.0), (1.0, 0.5));
    }

    #[test]
    fn validation_flags_and_errors() {
        let p = ModelParams::new(0.75, 0.5, 32, 1e-3, 0.1);
        assert!(p.validate().unwrap().is_empty());
        let p = ModelParams::new(1.0, 0.0, 32, 1e-3, 0.1);
        assert_eq!(p.validate().unwrap(), vec![ParamFlag::OutsideRegularityRange, ParamFlag::AlphaNotHalf]);
        assert!(ModelParams::new(1.5, 0.5, 32, 1e-3, 0.1).validate().is_err());
        assert!(ModelParams::new(0.75, 0.5, 30, 1e-3, 0.1).validate().is_ok());
        assert!(ModelParams::new(0.75, 0.5, 10, -1.0, 0.1).validate().is_err());
    }

    #[test]
    fn ferro_requires_epsilon() {
        let g = SpectralGrid::<f64>::new(16).unwrap();
        let p = ModelParams::new(0.75, 0.5, 16, 1e-3, 0.1);
        let st = SimState::new(SpectralField::zeros(&g, 1), DirectorField::constant(&g, [0.0, 0.0, 1.0]).unwrap());
        assert_eq!(ferromagnet_rhs(&st, &p).unwrap_err(), DynamicsError::MissingEpsilon);
    }
}
