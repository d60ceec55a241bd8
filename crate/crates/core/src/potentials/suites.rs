//! Property suites run by `potentials-check` and the acceptance tests.
//!
//! Each suite evaluates one family of estimates on a fixed corpus of inputs
//! and reports raw rows plus named pass/fail checks.  Refinement contracts
//! compare the two finest resolutions against [`REFINEMENT_TOLERANCE`].
//!
//! Corpus:
//! - kernel: `p_a` on `t ∈ [0.01, 1]` (9 log-spaced times), `|x| ≤ 3` (31 radii),
//!   then twice as dense; mass; semigroup at `(t₁, t₂) = (0.3, 0.7)`.
//! - riesz: indicator of `[¼, ¾)³` on the unit space–time cube, `N = 8, 16, 32`
//!   points per axis; `L^{p̃}` norm for `(β, p, λ) = (½, 2, 2)` and Hölder
//!   quotient for `(β, p, λ) = (0.9, 2, 1)` on a fixed `8³` set of points.
//! - morrey: `δ(z₀, ·)^{½}` centred at `(½, ½, ½)` and the jump `1{x₁ ≥ ½}` on the
//!   same cubes, `p = 2`; refinement on the fixed radii [`MORREY_RADII`] with
//!   `N = 16, 32, 64`, the Hölder bound and the jump divergence on radii
//!   `2^k · 2h ≤ ½` with `N = 8, 16, 32`.  Rows hold `NaN` where a column does
//!   not apply to that pass.
//! - poincare: three periodic fields (static `cos x₁`, a fractional-heat
//!   solution, a travelling wave) with 16 snapshots `Δt = 0.05`, `n = 32, 64`,
//!   `β = ½`, `p = 2`, radii `0.4, 0.8, 1.6`.
//! - hedberg: single-cell, box and pseudo-random nonnegative inputs on a
//!   `10³` lattice with `(p, λ) = (2, 2)` and `β ∈ {¼, ½}`.

use super::{
    cylinder_sup, hedberg_check, poincare_check, riesz_holder, riesz_integrability, CylinderNorm, CylinderOptions,
    HeatKernel, KernelBoundSpec, ParabolicPoint, PotentialsError, SampledSpaceTimeFunction,
};
use crate::potentials::{delta_metric, kernel_bound_check};
use crate::spectral::{SpectralField, SpectralGrid};

/// Largest relative change allowed between the two finest resolutions.
pub const REFINEMENT_TOLERANCE: f64 = 0.10;

/// Bound on the Poincaré ratio over the corpus, fixed once for `p = 2`,
/// `β = ½` and every `a` in `[¼, 1]`.
pub const POINCARE_CONSTANT: f64 = 20.0;

/// Growth factor per refinement demanded of the Campanato norm of a jump.
pub const JUMP_GROWTH: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kernel,
    Riesz,
    Morrey,
    Poincare,
    Hedberg,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Kernel, Suite::Riesz, Suite::Morrey, Suite::Poincare, Suite::Hedberg];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Riesz => "riesz",
            Suite::Morrey => "morrey",
            Suite::Poincare => "poincare",
            Suite::Hedberg => "hedberg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub checks: Vec<SuiteCheck>,
}

impl SuiteReport {
    fn new(suite: Suite, header: &[&'static str]) -> Self {
        Self {
            suite,
            header: header.to_vec(),
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(SuiteCheck {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn run_suite(suite: Suite, a: f64) -> Result<SuiteReport, PotentialsError> {
    match suite {
        Suite::Kernel => kernel_suite(a),
        Suite::Riesz => riesz_suite(a),
        Suite::Morrey => morrey_suite(a),
        Suite::Poincare => poincare_suite(a),
        Suite::Hedberg => hedberg_suite(a),
    }
}

fn kernel_suite(a: f64) -> Result<SuiteReport, PotentialsError> {
    let mut rep = SuiteReport::new(Suite::Kernel, &["level", "sup_p_delta2", "sup_grad_delta3", "sup_t_dt_delta2"]);
    let kernel = HeatKernel::new(a)?;
    let mass = kernel.mass()?;
    rep.check("mass", (mass - 1.0).abs() <= 1e-6, format!("mass = {mass:.12}"));
    let spec = KernelBoundSpec {
        t_min: 0.01,
        t_max: 1.0,
        nt: 9,
        x_max: 3.0,
        nx: 31,
    };
    let bounds = kernel_bound_check(&kernel, &spec);
    for (lvl, b) in [(0.0, bounds.coarse), (1.0, bounds.refined)] {
        rep.rows.push(vec![lvl, b.value, b.gradient, b.time_derivative]);
    }
    let finite = [bounds.coarse, bounds.refined]
        .iter()
        .all(|b| b.value.is_finite() && b.gradient.is_finite() && b.time_derivative.is_finite());
    rep.check("bounds_finite", finite, format!("{:?}", bounds.refined));
    rep.check(
        "bounds_refinement",
        bounds.relative_change <= REFINEMENT_TOLERANCE,
        format!("relative change {:.3e}", bounds.relative_change),
    );
    let (t1, t2, x) = (0.3, 0.7, 0.5);
    let conv = kernel.convolve(t1, t2, x)?;
    let direct = kernel.eval(t1 + t2, x);
    let err = (conv - direct).abs() / direct;
    rep.check("semigroup", err <= 1e-5, format!("relative error {err:.3e}"));
    Ok(rep)
}

/// Unit space–time cube with `n` points per axis.
fn cube(n: usize, f: impl Fn(f64, f64, f64) -> f64) -> SampledSpaceTimeFunction<f64> {
    let h = 1.0 / n as f64;
    SampledSpaceTimeFunction::from_fn(n, n, h, h, f)
}

fn box_indicator(t: f64, x1: f64, x2: f64) -> f64 {
    let inside = |v: f64| (0.25..0.75).contains(&v);
    if inside(t) && inside(x1) && inside(x2) {
        1.0
    } else {
        0.0
    }
}

const LEVELS: [usize; 3] = [8, 16, 32];

fn refinement_check(rep: &mut SuiteReport, name: &str, values: &[f64]) {
    let n = values.len();
    let change = relative_change(values[n - 2], values[n - 1]);
    let finite = values.iter().all(|v| v.is_finite());
    rep.check(
        name,
        finite && change <= REFINEMENT_TOLERANCE,
        format!("values {values:?}, last change {change:.3e}"),
    );
}

fn riesz_suite(a: f64) -> Result<SuiteReport, PotentialsError> {
    let mut rep = SuiteReport::new(Suite::Riesz, &["n", "p_tilde", "lp_tilde_norm", "holder_exponent", "holder_quotient"]);
    let mut norms = Vec::new();
    let mut quotients = Vec::new();
    for n in LEVELS {
        let f = cube(n, box_indicator);
        let integ = riesz_integrability(&f, 0.5, 2.0, 2.0, a)?;
        let hold = riesz_holder(&f, 0.9, 2.0, 1.0, a, n / 8)?;
        rep.rows
            .push(vec![n as f64, integ.p_tilde, integ.norm, hold.exponent, hold.quotient]);
        norms.push(integ.norm);
        quotients.push(hold.quotient);
    }
    refinement_check(&mut rep, "integrability_refinement", &norms);
    refinement_check(&mut rep, "holder_refinement", &quotients);
    Ok(rep)
}

/// Radii `2^k · 2h` up to `½`, shrinking with the lattice.
fn fine_radii(n: usize) -> Vec<f64> {
    let mut radii = vec![2.0 / n as f64];
    while radii.last().unwrap() * 2.0 <= 0.5 + 1e-12 {
        radii.push(radii.last().unwrap() * 2.0);
    }
    radii
}

/// Fixed radii used for refinement comparisons; each spans at least four
/// cells on the coarsest compared lattice.
pub const MORREY_RADII: [f64; 2] = [0.25, 0.5];

/// Resolutions for the fixed-radius Campanato refinement.
const MORREY_LEVELS: [usize; 3] = [16, 32, 64];

fn morrey_suite(a: f64) -> Result<SuiteReport, PotentialsError> {
    let mut rep = SuiteReport::new(
        Suite::Morrey,
        &["n", "campanato_holder", "campanato_holder_fine", "morrey_lambda1", "campanato_lambda1", "campanato_jump_fine"],
    );
    let alpha = 0.5;
    let p = 2.0;
    // `|f(w) − f(w')| ≤ δ(w, w')^α ≤ (2r)^α` on `Q_r`, so the Campanato
    // functional is at most `|Q_r| r^{−pα−(2+2a)} (2r)^{pα} = 2π 2^{pα}`.
    let holder_bound = 2.0 * std::f64::consts::PI * 2f64.powf(p * alpha);
    let centre = ParabolicPoint { t: 0.5, x: [0.5, 0.5] };
    let holder_field = |n: usize| {
        cube(n, |t, x1, x2| delta_metric(&centre, &ParabolicPoint { t, x: [x1, x2] }, a).powf(alpha))
    };
    let mut holder = Vec::new();
    for n in MORREY_LEVELS {
        let stride = (n / 8).max(1);
        let fixed = CylinderOptions {
            radii: MORREY_RADII.to_vec(),
            center_stride: stride,
            time_stride: stride,
            min_samples: 1,
        };
        let ch = cylinder_sup(&holder_field(n), p, -p * alpha, a, CylinderNorm::Campanato, &fixed)?.value;
        rep.rows.push(vec![n as f64, ch, f64::NAN, f64::NAN, f64::NAN, f64::NAN]);
        holder.push(ch);
    }
    let mut holder_fine_max: f64 = 0.0;
    let mut jump = Vec::new();
    let mut embedding = true;
    for n in LEVELS {
        let stride = (n / 8).max(1);
        let fine = CylinderOptions {
            radii: fine_radii(n),
            center_stride: stride,
            time_stride: stride,
            min_samples: 1,
        };
        let fh = holder_field(n);
        let fj = cube(n, |_, x1, _| if x1 >= 0.5 { 1.0 } else { 0.0 });
        let chf = cylinder_sup(&fh, p, -p * alpha, a, CylinderNorm::Campanato, &fine)?.value;
        let cj = cylinder_sup(&fj, p, -p * alpha, a, CylinderNorm::Campanato, &fine)?.value;
        let m1 = cylinder_sup(&fh, p, 1.0, a, CylinderNorm::Morrey, &fine)?.value;
        let c1 = cylinder_sup(&fh, p, 1.0, a, CylinderNorm::Campanato, &fine)?.value;
        embedding &= m1 >= c1;
        rep.rows.push(vec![n as f64, f64::NAN, chf, m1, c1, cj]);
        holder_fine_max = holder_fine_max.max(chf);
        jump.push(cj);
    }
    refinement_check(&mut rep, "holder_campanato_refinement", &holder);
    rep.check(
        "holder_campanato_bounded",
        holder_fine_max <= holder_bound,
        format!("max {holder_fine_max:.4} vs bound {holder_bound:.4}"),
    );
    let growth: Vec<f64> = jump.windows(2).map(|w| w[1] / w[0]).collect();
    rep.check(
        "jump_campanato_diverges",
        growth.iter().all(|&g| g >= JUMP_GROWTH),
        format!("growth per refinement {growth:?}"),
    );
    rep.check("morrey_dominates_campanato", embedding, "p = 2, lambda = 1".into());
    Ok(rep)
}

/// `θ(t, x)` for the Poincaré corpus entry `which`.
fn poincare_field(which: usize, a: f64, t: f64, x1: f64, x2: f64) -> f64 {
    match which {
        0 => x1.cos(),
        1 => {
            let modes: [(f64, f64, f64, f64); 4] = [(1.0, 0.0, 1.0, 0.0), (0.0, 2.0, 0.5, 0.7), (2.0, 1.0, 0.3, 1.9), (3.0, -2.0, 0.2, 2.6)];
            modes
                .iter()
                .map(|&(k1, k2, c, ph)| c * (-t * (k1 * k1 + k2 * k2).powf(a)).exp() * (k1 * x1 + k2 * x2 + ph).cos())
                .sum()
        }
        _ => (x1 + x2 - 2.0 * t).sin(),
    }
}

pub const POINCARE_RADII: [f64; 3] = [0.4, 0.8, 1.6];

fn poincare_suite(a: f64) -> Result<SuiteReport, PotentialsError> {
    let mut rep = SuiteReport::new(Suite::Poincare, &["field", "n", "radius", "max_ratio"]);
    let dt = 0.05;
    let mut worst: f64 = 0.0;
    for which in 0..3 {
        let mut per_n = Vec::new();
        for n in [32usize, 64] {
            let grid = SpectralGrid::new(n).map_err(|e| PotentialsError::UnsupportedParameters(e.to_string()))?;
            let series: Vec<SpectralField<f64>> = (0..16)
                .map(|k| SpectralField::from_fn(&grid, |x1, x2| poincare_field(which, a, k as f64 * dt, x1, x2)))
                .collect();
            let r = poincare_check(&series, dt, 0.5, 2.0, a, &POINCARE_RADII)?;
            for &(radius, ratio) in &r.ratios {
                rep.rows.push(vec![which as f64, n as f64, radius, ratio]);
            }
            worst = worst.max(r.max_ratio);
            per_n.push(r.max_ratio);
        }
        refinement_check(&mut rep, &format!("field{which}_refinement"), &per_n);
    }
    rep.check(
        "bounded_by_constant",
        worst <= POINCARE_CONSTANT,
        format!("max ratio {worst:.4} vs {POINCARE_CONSTANT}"),
    );
    Ok(rep)
}

fn hedberg_suite(a: f64) -> Result<SuiteReport, PotentialsError> {
    let mut rep = SuiteReport::new(Suite::Hedberg, &["input", "beta", "constant", "max_ratio"]);
    let n = 10;
    let h = 0.1;
    let single = {
        let mut f = SampledSpaceTimeFunction::zeros(n, n, h, h, false);
        let q = f.index(5, 5, 5);
        f.values[q] = 1.0;
        f
    };
    let boxed = SampledSpaceTimeFunction::from_fn(n, n, h, h, |t, x1, x2| {
        if (0.3..0.7).contains(&t) && (0.2..0.6).contains(&x1) && (0.4..0.8).contains(&x2) {
            1.0
        } else {
            0.0
        }
    });
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut noisy = SampledSpaceTimeFunction::zeros(n, n, h, h, false);
    for v in noisy.values.iter_mut() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        *v = if u < 0.3 { 10.0 * u } else { 0.0 };
    }
    let inputs = [single, boxed, noisy];
    let mut all_ok = true;
    let mut scaling_ok = true;
    for (idx, f) in inputs.iter().enumerate() {
        for beta in [0.25, 0.5] {
            let r = hedberg_check(f, 2.0, 2.0, beta, a)?;
            all_ok &= r.max_ratio <= 1.0;
            rep.rows.push(vec![idx as f64, beta, r.constant, r.max_ratio]);
            if idx == 0 {
                let doubled = f.with_values(f.values.iter().map(|v| 2.0 * v).collect());
                let r2 = hedberg_check(&doubled, 2.0, 2.0, beta, a)?;
                scaling_ok &= relative_change(r.max_ratio, r2.max_ratio) <= 1e-12;
            }
        }
    }
    rep.check("ratio_at_most_one", all_ok, "derived constant".into());
    rep.check("scaling_covariance", scaling_ok, "f -> 2f leaves the ratio unchanged".into());
    Ok(rep)
}
