//! Energy functionals, the coupling balance law, running `Lᵖ` integrals and
//! the exponent bootstrap behind the regularity criterion.

use thiserror::Error;

use crate::dynamics::{velocity, DynamicsError, ForcingMode, ModelParams, SimState, SPLITTING};
use crate::fields::{curl_div_xi, dirichlet_energy, grad_norm_samples, tension, DirectorDerivatives, FieldError};
use crate::potentials::{cylinder_sup, CylinderNorm, CylinderOptions, PotentialsError, SampledSpaceTimeFunction};
use crate::scalar::{cast, from_usize, Real};
use crate::spectral::{differential_op, fractional_laplacian, inner_product, integrate_samples, DiffOp, SpectralError, SpectralField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergeticsError {
    #[error("a = {0} outside (1/2, 1]")]
    InvalidA(f64),
    #[error("bootstrap stalls below threshold at (p, q) = ({p}, {q})")]
    StalledBelowThreshold { p: f64, q: f64 },
    #[error("no cylinder holds at least {0} samples")]
    InsufficientResolution(usize),
    #[error("radius {0} outside the admissible range")]
    InvalidRadius(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Potentials(#[from] PotentialsError),
}

impl From<EnergeticsError> for DynamicsError {
    fn from(e: EnergeticsError) -> Self {
        match e {
            EnergeticsError::Dynamics(d) => d,
            EnergeticsError::Spectral(s) => DynamicsError::Spectral(s),
            EnergeticsError::Field(f) => DynamicsError::Field(f),
            other => DynamicsError::InvalidParams(other.to_string()),
        }
    }
}

/// Energy functionals and dissipation rates of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies<T> {
    /// `ℰ₁ = ∫θ² + λ∫|∇d|²`.
    pub e1: T,
    /// `ℰ₂ = ∫|(−Δ)^{(α−1)/2}θ|² + λ∫|∇d|²`.
    pub e2: T,
    /// `D = λγ∫|τ(d)|² + ν∫|(−Δ)^{(α−1+a)/2}θ|²`, the dissipation of `ℰ₂`.
    pub dissipation: T,
    /// `λγ∫|τ(d)|² + ν∫|(−Δ)^{a/2}θ|²`, the dissipation of `ℰ₁`.
    pub dissipation_e1: T,
    /// `∫|(−Δ)^{(α−1+a)/2}θ|²`.
    pub theta_part: T,
    /// `∫|(−Δ)^{a/2}θ|²`.
    pub theta_part_e1: T,
    /// `∫|τ(d)|²`.
    pub tension_part: T,
}

fn sq_norm<T: Real>(f: &SpectralField<T>) -> Result<T, SpectralError> {
    inner_product(f, f)
}

/// Evaluates `ℰ₁`, `ℰ₂` and both dissipation rates.
pub fn energies<T: Real>(state: &SimState<T>, params: &ModelParams<T>) -> Result<Energies<T>, EnergeticsError> {
    let th = &state.theta;
    let half = cast::<T>(0.5);
    let one = T::one();
    let grad = dirichlet_energy(&state.d)?;
    let l2 = sq_norm(th)?;
    let neg = sq_norm(&fractional_laplacian(th, (params.alpha - one) * half)?)?;
    let theta_part = sq_norm(&fractional_laplacian(th, (params.alpha - one + params.a) * half)?)?;
    let theta_part_e1 = sq_norm(&fractional_laplacian(th, params.a * half)?)?;
    let tension_part = sq_norm(&tension(&state.d)?)?;
    let dd = params.lambda * params.gamma * tension_part;
    Ok(Energies {
        e1: l2 + params.lambda * grad,
        e2: neg + params.lambda * grad,
        dissipation: dd + params.nu * theta_part,
        dissipation_e1: dd + params.nu * theta_part_e1,
        theta_part,
        theta_part_e1,
        tension_part,
    })
}

/// Both sides of the coupling balance law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Balance<T> {
    /// `∫ (−Δ)^{α−1} curl div Ξ · θ`.
    pub forcing_pairing: T,
    /// `∫ (u·∇d)·Δd`.
    pub transport_pairing: T,
}

impl<T: Real> Balance<T> {
    pub fn residual(&self) -> T {
        self.forcing_pairing + self.transport_pairing
    }
}

/// Evaluates the two pairings whose sum vanishes identically.
///
/// The forcing pairing goes through the stress tensor and Parseval; the
/// transport pairing is a triple product evaluated on the padded grid, where
/// its mean is exact.
pub fn balance<T: Real>(state: &SimState<T>, params: &ModelParams<T>) -> Result<Balance<T>, EnergeticsError> {
    let cd = curl_div_xi(&state.d)?;
    let f1 = fractional_laplacian(&cd, params.alpha - T::one())?;
    let forcing_pairing = inner_product(&f1, &state.theta)?;
    let u = velocity(&state.theta, params)?.to_padded();
    let derivs = DirectorDerivatives::new(&state.d)?;
    let lap = differential_op(state.d.field(), DiffOp::Laplacian)?.to_padded();
    let len = lap[0].len();
    let mut acc = T::zero();
    for m in 0..3 {
        for i in 0..len {
            let adv = u[0][i] * derivs.grad[0][m][i] + u[1][i] * derivs.grad[1][m][i];
            acc += adv * lap[m][i];
        }
    }
    let transport_pairing = acc * T::TAU() * T::TAU() / from_usize(len);
    Ok(Balance {
        forcing_pairing,
        transport_pairing,
    })
}

/// `∫F₁θ + ∫(u·∇d)·Δd`.
pub fn balance_residual<T: Real>(state: &SimState<T>, params: &ModelParams<T>) -> Result<T, EnergeticsError> {
    Ok(balance(state, params)?.residual())
}

/// Scale `1 + ‖θ‖₂ ‖∇d‖₄²` against which balance residuals are measured.
pub fn balance_scale<T: Real>(state: &SimState<T>) -> Result<T, EnergeticsError> {
    let n = state.grid().n();
    let g = grad_norm_samples(&state.d)?;
    let g4: Vec<T> = g.iter().map(|&x| x.powi(4)).collect();
    let l4 = integrate_samples(&g4, n).sqrt();
    Ok(T::one() + state.theta.norm_l2() * l4)
}

fn lp_integral<T: Real>(samples: &[T], n: usize, p: T) -> T {
    let v: Vec<T> = samples.iter().map(|&x| x.abs().powf(p)).collect();
    integrate_samples(&v, n)
}

/// `‖θ‖_{Lᵖ}` from grid samples.
pub fn lp_norm<T: Real>(f: &SpectralField<T>, p: T) -> T {
    let s = f.to_physical().swap_remove(0);
    lp_integral(&s, f.grid().n(), p).powf(T::one() / p)
}

/// One row of diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySample<T> {
    pub t: T,
    pub step: u64,
    pub e1: T,
    pub e2: T,
    /// Dissipation of the energy that is monotone in the active forcing mode.
    pub dissipation: T,
    pub dissipation_e1: T,
    pub dissipation_e2: T,
    pub balance_residual: T,
    pub max_theta: T,
    pub max_grad_d: T,
    pub unit_defect: T,
    pub lp_theta_acc: Vec<T>,
    pub lp_gradd_acc: Vec<T>,
}

/// Time series of diagnostics plus running space–time integrals.
#[derive(Debug, Clone)]
pub struct EnergyReport<T: Real> {
    pub params: ModelParams<T>,
    pub p_list: Vec<T>,
    pub samples: Vec<EnergySample<T>>,
    /// `Σ dt ∫|θ|ᵖ` for each `p` in `p_list`.
    pub acc_theta: Vec<T>,
    /// `Σ dt ∫|∇d|ᵖ` for each `p` in `p_list`.
    pub acc_gradd: Vec<T>,
    pub splitting: &'static str,
    /// `(‖θ₀‖_{L^{2/(2a−1)}}, ‖θ₀‖_{L^{2a/(2a−1)}})` when `a > 1/2`.
    pub initial_theta_norms: Option<(T, T)>,
}

impl<T: Real> EnergyReport<T> {
    pub fn new(params: &ModelParams<T>, p_list: &[T], initial: &SimState<T>) -> Result<Self, EnergeticsError> {
        let half = cast::<T>(0.5);
        let initial_theta_norms = if params.a > half {
            let den = cast::<T>(2.0) * params.a - T::one();
            Some((
                lp_norm(&initial.theta, cast::<T>(2.0) / den),
                lp_norm(&initial.theta, cast::<T>(2.0) * params.a / den),
            ))
        } else {
            None
        };
        Ok(Self {
            params: params.clone(),
            p_list: p_list.to_vec(),
            samples: Vec::new(),
            acc_theta: vec![T::zero(); p_list.len()],
            acc_gradd: vec![T::zero(); p_list.len()],
            splitting: SPLITTING,
            initial_theta_norms,
        })
    }

    /// Adds `dt ∫|θ|ᵖ` and `dt ∫|∇d|ᵖ` for each `p`.
    pub fn accumulate_lp(&mut self, state: &SimState<T>, dt: T) -> Result<(), EnergeticsError> {
        let n = state.grid().n();
        let th = state.theta.to_physical().swap_remove(0);
        let g = grad_norm_samples(&state.d)?;
        for (k, &p) in self.p_list.iter().enumerate() {
            self.acc_theta[k] += dt * lp_integral(&th, n, p);
            self.acc_gradd[k] += dt * lp_integral(&g, n, p);
        }
        Ok(())
    }

    /// Evaluates and stores a diagnostics sample.
    pub fn record(&mut self, state: &SimState<T>, params: &ModelParams<T>) -> Result<EnergySample<T>, EnergeticsError> {
        let s = sample(state, params, &self.acc_theta, &self.acc_gradd)?;
        self.samples.push(s.clone());
        Ok(s)
    }
}

/// Evaluates a diagnostics row for `state`.
pub fn sample<T: Real>(
    state: &SimState<T>,
    params: &ModelParams<T>,
    acc_theta: &[T],
    acc_gradd: &[T],
) -> Result<EnergySample<T>, EnergeticsError> {
    let en = energies(state, params)?;
    let g = grad_norm_samples(&state.d)?;
    let dissipation = match params.forcing {
        ForcingMode::F1 => en.dissipation_e1,
        _ => en.dissipation,
    };
    Ok(EnergySample {
        t: state.t,
        step: state.step,
        e1: en.e1,
        e2: en.e2,
        dissipation,
        dissipation_e1: en.dissipation_e1,
        dissipation_e2: en.dissipation,
        balance_residual: balance_residual(state, params)?,
        max_theta: state.theta.max_abs(),
        max_grad_d: g.into_iter().fold(T::zero(), T::max),
        unit_defect: state.d.unit_defect(),
        lp_theta_acc: acc_theta.to_vec(),
        lp_gradd_acc: acc_gradd.to_vec(),
    })
}

/// Which energy functional a law refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyKind {
    E1,
    E2,
}

/// Per-step energy-law bookkeeping between consecutive samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLaw<T> {
    /// `ℰ(t_{k+1}) − ℰ(t_k)`.
    pub increments: Vec<T>,
    /// `ℰ(t_{k+1}) − ℰ(t_k) + (t_{k+1} − t_k)(D_k + D_{k+1})`, the local
    /// violation of `dℰ/dt = −2D` under trapezoidal quadrature.
    pub defects: Vec<T>,
}

impl<T: Real> EnergyLaw<T> {
    pub fn max_increase(&self) -> T {
        self.increments.iter().fold(T::zero(), |acc, &x| acc.max(x))
    }

    pub fn max_defect(&self) -> T {
        self.defects.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }
}

/// Energy law of `ℰ₁` or `ℰ₂` along the recorded samples.
pub fn energy_law<T: Real>(samples: &[EnergySample<T>], kind: EnergyKind) -> EnergyLaw<T> {
    let pick = |s: &EnergySample<T>| match kind {
        EnergyKind::E1 => (s.e1, s.dissipation_e1),
        EnergyKind::E2 => (s.e2, s.dissipation_e2),
    };
    let mut increments = Vec::new();
    let mut defects = Vec::new();
    for w in samples.windows(2) {
        let (e0, d0) = pick(&w[0]);
        let (e1, d1) = pick(&w[1]);
        let inc = e1 - e0;
        increments.push(inc);
        defects.push(inc + (w[1].t - w[0].t) * (d0 + d1));
    }
    EnergyLaw { increments, defects }
}

/// Critical integrability exponent `p* = (2a + 2)/(2a − 1)` for `θ`.
pub fn p_star<T: Real>(a: T) -> T {
    let two = cast::<T>(2.0);
    (two * a + two) / (two * a - T::one())
}

/// Critical integrability exponent for `∇d`.
pub const Q_STAR: f64 = 4.0;

/// Growth of a running integral in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisEntry<T> {
    pub p: T,
    pub theta_acc: T,
    /// Increment over the second half of the run divided by the first half.
    pub theta_window_growth: T,
    pub theta_above_threshold: bool,
    pub gradd_acc: T,
    pub gradd_window_growth: T,
    pub gradd_above_threshold: bool,
}

/// Diagnostic reading of the Serrin-type regularity criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesesVerdict<T> {
    pub p_star: T,
    pub q_star: T,
    pub entries: Vec<HypothesisEntry<T>>,
    /// Both candidate norms of the initial scalar.
    pub initial_theta_norms: Option<(T, T)>,
    /// Some monitored `p > p*` for `θ` and some `q > 4` for `∇d` with finite integrals.
    pub satisfied: bool,
}

fn window_growth<T: Real>(samples: &[EnergySample<T>], k: usize, theta: bool) -> T {
    let get = |s: &EnergySample<T>| if theta { s.lp_theta_acc[k] } else { s.lp_gradd_acc[k] };
    if samples.len() < 3 {
        return T::nan();
    }
    let first = get(&samples[0]);
    let mid = get(&samples[samples.len() / 2]);
    let last = get(&samples[samples.len() - 1]);
    let a = mid - first;
    let b = last - mid;
    if a > T::zero() {
        b / a
    } else {
        T::nan()
    }
}

/// Reports the accumulated norms against the thresholds `p*` and 4.
pub fn regularity_hypotheses_check<T: Real>(
    params: &ModelParams<T>,
    report: &EnergyReport<T>,
) -> Result<HypothesesVerdict<T>, EnergeticsError> {
    if !(params.a > cast(0.5)) {
        return Err(EnergeticsError::InvalidA(crate::scalar::to_f64(params.a)));
    }
    let ps = p_star(params.a);
    let q_star = cast::<T>(Q_STAR);
    let entries: Vec<HypothesisEntry<T>> = report
        .p_list
        .iter()
        .enumerate()
        .map(|(k, &p)| HypothesisEntry {
            p,
            theta_acc: report.acc_theta[k],
            theta_window_growth: window_growth(&report.samples, k, true),
            theta_above_threshold: p > ps,
            gradd_acc: report.acc_gradd[k],
            gradd_window_growth: window_growth(&report.samples, k, false),
            gradd_above_threshold: p > q_star,
        })
        .collect();
    let satisfied = entries.iter().any(|e| e.theta_above_threshold && e.theta_acc.is_finite())
        && entries.iter().any(|e| e.gradd_above_threshold && e.gradd_acc.is_finite());
    Ok(HypothesesVerdict {
        p_star: ps,
        q_star,
        entries,
        initial_theta_norms: report.initial_theta_norms,
        satisfied,
    })
}

/// Integrability exponent, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Exponent<T> {
    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// Value as a float, with `+∞` for the infinite marker.
    pub fn value(self) -> T {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Infinite => T::infinity(),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.value() <= other.value() {
            self
        } else {
            other
        }
    }

    pub fn gt(self, other: Self) -> bool {
        match (self, other) {
            (Exponent::Infinite, Exponent::Infinite) => false,
            (Exponent::Infinite, _) => true,
            (_, Exponent::Infinite) => false,
            (Exponent::Finite(a), Exponent::Finite(b)) => a > b,
        }
    }
}

impl<T: Real> std::fmt::Display for Exponent<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

/// Integrability pair: `θ ∈ Lᵖ`, `∇d ∈ L^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair<T> {
    pub p: Exponent<T>,
    pub q: Exponent<T>,
}

impl<T: Real> ExponentPair<T> {
    pub fn finite(p: T, q: T) -> Self {
        Self {
            p: Exponent::Finite(p),
            q: Exponent::Finite(q),
        }
    }

    pub fn min(self) -> Exponent<T> {
        self.p.min(self.q)
    }
}

/// Improved `θ` exponent from `m = min(p, q)`.
pub fn p_map<T: Real>(m: Exponent<T>, a: T) -> Exponent<T> {
    let two = cast::<T>(2.0);
    let four = cast::<T>(4.0);
    let m = match m {
        Exponent::Infinite => return Exponent::Infinite,
        Exponent::Finite(m) => m,
    };
    let bound = (four * a + four) / (two * a - T::one());
    if m < bound {
        Exponent::Finite((two + two * a) * m / (four + four * a - (two * a - T::one()) * m))
    } else {
        Exponent::Infinite
    }
}

/// Improved `∇d` exponent from `m = min(p, q)`.
pub fn q_map<T: Real>(m: Exponent<T>) -> Exponent<T> {
    let eight = cast::<T>(8.0);
    match m {
        Exponent::Finite(m) if m < eight => Exponent::Finite(cast::<T>(4.0) * m / (eight - m)),
        _ => Exponent::Infinite,
    }
}

/// Stage of the three-phase bootstrap schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Hold `p`, raise `q` up to `p`.
    RaiseQ,
    /// Hold `q`, improve `p`.
    ImproveP,
    /// Hold `p`, improve `q`.
    ImproveQ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOutcome<T> {
    /// Starting pair followed by one entry per update.
    pub trajectory: Vec<ExponentPair<T>>,
    /// Phase that produced each entry after the first.
    pub phases: Vec<Phase>,
    /// Both exponents reached the target (or `+∞`).
    pub diverged: bool,
    /// Updates that failed the strict improvement expected above threshold.
    pub monotonicity_violations: usize,
}

impl<T: Real> BootstrapOutcome<T> {
    pub fn last(&self) -> ExponentPair<T> {
        *self.trajectory.last().expect("trajectory is never empty")
    }
}

/// Runs the three-phase exponent bootstrap from `start`.
///
/// Iteration stops once both exponents exceed `target` (use `None` to wait
/// for the `+∞` marker) or after `max_iters` updates.
pub fn bootstrap_iterate<T: Real>(
    start: ExponentPair<T>,
    a: T,
    max_iters: usize,
    target: Option<T>,
) -> Result<BootstrapOutcome<T>, EnergeticsError> {
    if !(a > cast(0.5) && a <= T::one()) {
        return Err(EnergeticsError::InvalidA(crate::scalar::to_f64(a)));
    }
    let ps = Exponent::Finite(p_star(a));
    let four = Exponent::Finite(cast::<T>(4.0));
    let reached = |e: Exponent<T>| match target {
        Some(t) => e.value() >= t,
        None => e.is_infinite(),
    };
    let mut out = BootstrapOutcome {
        trajectory: vec![start],
        phases: Vec::new(),
        diverged: false,
        monotonicity_violations: 0,
    };
    let mut cur = start;
    let mut updates = 0usize;
    let done = |c: ExponentPair<T>| reached(c.p) && reached(c.q);
    let push = |out: &mut BootstrapOutcome<T>, prev: ExponentPair<T>, next: ExponentPair<T>, phase: Phase| {
        let m = prev.min();
        let improved = match phase {
            Phase::ImproveP => next.p.gt(m) || (m.is_infinite() && next.p.is_infinite()),
            _ => next.q.gt(m) || (m.is_infinite() && next.q.is_infinite()),
        };
        let expected = match phase {
            Phase::ImproveP => m.gt(ps),
            _ => m.gt(four),
        };
        if expected && !improved {
            out.monotonicity_violations += 1;
        }
        out.trajectory.push(next);
        out.phases.push(phase);
    };
    while !done(cur) && updates < max_iters {
        let cycle_start = cur.min();
        while cur.q.value() < cur.p.value() && updates < max_iters {
            let raised = q_map(cur.min());
            let next = ExponentPair {
                p: cur.p,
                q: raised.min(cur.p),
            };
            push(&mut out, cur, next, Phase::RaiseQ);
            updates += 1;
            let stalled = !next.q.gt(cur.q);
            cur = next;
            if stalled {
                break;
            }
        }
        if done(cur) || updates >= max_iters {
            break;
        }
        let next = ExponentPair {
            p: p_map(cur.min(), a),
            q: cur.q,
        };
        push(&mut out, cur, next, Phase::ImproveP);
        cur = next;
        updates += 1;
        if done(cur) || updates >= max_iters {
            break;
        }
        let next = ExponentPair {
            p: cur.p,
            q: q_map(cur.min()),
        };
        push(&mut out, cur, next, Phase::ImproveQ);
        cur = next;
        updates += 1;
        if !cur.min().gt(cycle_start) && !done(cur) {
            return Err(EnergeticsError::StalledBelowThreshold {
                p: crate::scalar::to_f64(cur.p.value()),
                q: crate::scalar::to_f64(cur.q.value()),
            });
        }
    }
    out.diverged = done(cur);
    Ok(out)
}

/// Parabolic Campanato seminorm of a time series of scalar snapshots.
///
/// Cylinders are centred on every 4th grid point and every 4th snapshot; only
/// cylinders holding at least 8 samples contribute.
pub fn campanato_seminorm<T: Real>(
    snapshots: &[SpectralField<T>],
    dt: T,
    r_list: &[T],
    p: T,
    a: T,
    lambda: T,
) -> Result<T, EnergeticsError> {
    const MIN_SAMPLES: usize = 8;
    let first = snapshots.first().ok_or(EnergeticsError::InsufficientResolution(MIN_SAMPLES))?;
    let grid = first.grid();
    let lo = cast::<T>(2.0) * dt.powf(T::one() / (cast::<T>(2.0) * a));
    let hi = T::TAU() / cast(4.0);
    for &r in r_list {
        if !(r > lo && r < hi) {
            return Err(EnergeticsError::InvalidRadius(crate::scalar::to_f64(r)));
        }
    }
    let f = SampledSpaceTimeFunction::from_snapshots(snapshots, dt)?;
    let opts = CylinderOptions {
        radii: r_list.to_vec(),
        center_stride: 4,
        time_stride: 4,
        min_samples: MIN_SAMPLES,
    };
    let _ = grid;
    match cylinder_sup(&f, p, lambda, a, CylinderNorm::Campanato, &opts) {
        Ok(v) => Ok(v.value),
        Err(PotentialsError::InsufficientResolution(k)) => Err(EnergeticsError::InsufficientResolution(k)),
        Err(e) => Err(e.into()),
    }
}
