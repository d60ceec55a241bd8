//! Heat kernel, Riesz potentials, maximal functions and cylinder norms
//! against closed forms and direct evaluations.

use sqglc::potentials::{
    cylinder_volume, delta_metric, hedberg_check, kernel_bound_check, maximal_operator, morrey_campanato_norms,
    poincare_check, riesz_holder, riesz_integrability, riesz_potential, singular_cell_integral, CylinderNorm,
    HeatKernel, KernelBoundSpec, ParabolicPoint, PotentialsError, SampledSpaceTimeFunction,
};
use sqglc::spectral::{SpectralField, SpectralGrid};
use std::f64::consts::{E, PI};

fn pt(t: f64, x1: f64, x2: f64) -> ParabolicPoint<f64> {
    ParabolicPoint { t, x: [x1, x2] }
}

#[test]
fn delta_metric_hand_values() {
    assert_eq!(delta_metric(&pt(0.3, 1.0, 2.0), &pt(0.3, 1.0, 2.0), 0.75), 0.0);
    assert_eq!(delta_metric(&pt(0.0, 0.0, 0.0), &pt(1.0, 2.0, 0.0), 0.5), 2.0);
    assert!((delta_metric(&pt(0.0, 0.0, 0.0), &pt(4.0, 0.5, 0.0), 1.0) - 2.0).abs() < 1e-15);
}

fn gaussian(t: f64, r: f64) -> f64 {
    (-r * r / (4.0 * t)).exp() / (4.0 * PI * t)
}

fn poisson(t: f64, r: f64) -> f64 {
    t / (2.0 * PI * (t * t + r * r).powf(1.5))
}

const TIMES: [f64; 5] = [0.05, 0.2, 0.5, 1.0, 3.0];
const RADII: [f64; 7] = [0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0];

#[test]
fn kernel_matches_gaussian_and_poisson() {
    for (a, exact) in [(1.0, gaussian as fn(f64, f64) -> f64), (0.5, poisson)] {
        let k = HeatKernel::<f64>::new(a).unwrap();
        for &t in &TIMES {
            for &r in &RADII {
                let e = exact(t, r);
                if e < 1e-12 {
                    continue;
                }
                let v = k.eval(t, r);
                assert!((v - e).abs() <= 1e-6 * e, "a = {a}, t = {t}, r = {r}: {v} vs {e}");
            }
        }
    }
}

/// `(2π)⁻¹ ∫₀^∞ e^{−tρ^{2a}} J₀(ρr) ρ dρ` by composite Simpson.
fn direct_kernel(a: f64, t: f64, r: f64) -> f64 {
    let upper = (40.0 / t).powf(1.0 / (2.0 * a));
    let n = 40_000;
    let h = upper / n as f64;
    let f = |rho: f64| (-t * rho.powf(2.0 * a)).exp() * libm::j0(rho * r) * rho;
    let mut s = f(0.0) + f(upper);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / (2.0 * PI)
}

#[test]
fn kernel_scaling_against_direct_integration() {
    for a in [0.6, 0.75, 0.9] {
        let k = HeatKernel::<f64>::new(a).unwrap();
        for t in [0.3, 1.0, 2.5] {
            for r in [0.0, 0.4, 1.3, 2.5] {
                let d = direct_kernel(a, t, r);
                let v = k.eval(t, r);
                assert!((v - d).abs() <= 1e-6 * d.abs(), "a = {a}, t = {t}, r = {r}: {v} vs {d}");
                let scaled = t.powf(-1.0 / a) * k.eval(1.0, t.powf(-1.0 / (2.0 * a)) * r);
                assert!((v - scaled).abs() <= 1e-12 * v.abs());
            }
        }
    }
}

#[test]
fn kernel_mass_and_semigroup() {
    for a in [0.5, 0.75, 1.0] {
        let k = HeatKernel::<f64>::new(a).unwrap();
        assert!((k.mass().unwrap() - 1.0).abs() < 1e-6, "a = {a}");
        for x in [0.0, 0.5, 1.5] {
            let c = k.convolve(0.3, 0.7, x).unwrap();
            let e = k.eval(1.0, x);
            assert!((c - e).abs() <= 1e-5 * e, "a = {a}, x = {x}: {c} vs {e}");
        }
    }
}

fn fine_window() -> KernelBoundSpec<f64> {
    KernelBoundSpec {
        t_min: 0.01,
        t_max: 1.0,
        nt: 41,
        x_max: 3.0,
        nx: 301,
    }
}

#[test]
fn kernel_bound_suprema_match_closed_forms() {
    // sup p₁δ² = sup_s s e^{−s}/π = 1/(eπ) at |x| = 2√t.
    let g = kernel_bound_check(&HeatKernel::<f64>::new(1.0).unwrap(), &fine_window());
    let expect = 1.0 / (E * PI);
    assert!((g.refined.value - expect).abs() <= 2e-3 * expect, "{} vs {expect}", g.refined.value);
    // sup |∇p_{1/2}|δ³ = sup_s 3s/(2π(1+s²)^{5/2}) = 24/(π 5^{5/2}) at s = t/|x| = ½.
    let p = kernel_bound_check(&HeatKernel::<f64>::new(0.5).unwrap(), &fine_window());
    let expect = 24.0 / (PI * 5f64.powf(2.5));
    assert!((p.refined.gradient - expect).abs() <= 2e-3 * expect, "{} vs {expect}", p.refined.gradient);
    assert!(g.relative_change < 0.1 && p.relative_change < 0.1);
}

#[test]
fn kernel_ratio_decays_far_away() {
    let k = HeatKernel::<f64>::new(0.75).unwrap();
    let ratio = |r: f64| k.eval(1.0, r) * r * r;
    assert!(ratio(50.0) < ratio(10.0) && ratio(200.0) < ratio(50.0));
    assert!(ratio(200.0) < 1e-3);
}

/// `∫_{cell} δ^{−γ}` by exact time integration and a midpoint rule in space.
fn singular_cell_direct(gamma: f64, a: f64, hx: f64, ht: f64) -> f64 {
    let half_t = 0.5 * ht;
    let s = gamma / (2.0 * a);
    let time = |rho: f64| {
        let tau = rho.powf(2.0 * a);
        if tau >= half_t {
            ht * rho.powf(-gamma)
        } else {
            let tail = if (s - 1.0).abs() < 1e-12 {
                (half_t / tau).ln()
            } else {
                (half_t.powf(1.0 - s) - tau.powf(1.0 - s)) / (1.0 - s)
            };
            2.0 * (tau * rho.powf(-gamma) + tail)
        }
    };
    let m = 2000;
    let h = hx / m as f64;
    let mut acc = 0.0;
    for j in 0..m {
        for i in 0..m {
            let x = -0.5 * hx + (i as f64 + 0.5) * h;
            let y = -0.5 * hx + (j as f64 + 0.5) * h;
            acc += time((x * x + y * y).sqrt());
        }
    }
    acc * h * h
}

#[test]
fn singular_cell_against_direct_quadrature() {
    for (gamma, a, hx, ht) in [(1.5, 0.75, 0.1, 0.1), (1.0, 0.5, 0.2, 0.05), (2.0, 1.0, 0.1, 0.02)] {
        let exact = singular_cell_integral(gamma, a, hx, ht).unwrap();
        let direct = singular_cell_direct(gamma, a, hx, ht);
        assert!((exact - direct).abs() <= 1e-4 * exact, "γ = {gamma}: {exact} vs {direct}");
    }
}

fn single_cell(nt: usize, nx: usize, h: f64, at: (usize, usize, usize)) -> SampledSpaceTimeFunction<f64> {
    let mut f = SampledSpaceTimeFunction::<f64>::zeros(nt, nx, h, h, false);
    let idx = f.index(at.0, at.1, at.2);
    f.values[idx] = 1.0;
    f
}

#[test]
fn riesz_far_field_of_single_cell() {
    let (a, beta, h) = (0.75, 1.0, 0.1);
    let f = single_cell(3, 25, h, (1, 12, 2));
    let pot = riesz_potential(&f, beta, a).unwrap();
    let dim = 2.0 + 2.0 * a;
    let far = f.cell_volume() * (10.0 * h).powf(beta - dim);
    let v = pot.get(1, 12, 12);
    assert!((v - far).abs() <= 0.02 * far, "{v} vs {far}");
    let zero = SampledSpaceTimeFunction::<f64>::zeros(3, 25, h, h, false);
    assert!(riesz_potential(&zero, beta, a).unwrap().values.iter().all(|&v| v == 0.0));
}

#[test]
fn riesz_potential_is_linear() {
    let f = SampledSpaceTimeFunction::<f64>::from_fn(4, 8, 0.1, 0.1, |t, x, y| (t + x * y).sin());
    let g = SampledSpaceTimeFunction::<f64>::from_fn(4, 8, 0.1, 0.1, |t, x, _| x - t);
    let sum = f.with_values(f.values.iter().zip(&g.values).map(|(a, b)| a + b).collect());
    let (pf, pg, ps): (SampledSpaceTimeFunction<f64>, SampledSpaceTimeFunction<f64>, SampledSpaceTimeFunction<f64>) = (
        riesz_potential(&f, 0.7, 0.75).unwrap(),
        riesz_potential(&g, 0.7, 0.75).unwrap(),
        riesz_potential(&sum, 0.7, 0.75).unwrap(),
    );
    for q in 0..ps.values.len() {
        assert!((ps.values[q] - pf.values[q] - pg.values[q]).abs() <= 1e-12 * ps.values[q].abs().max(1.0));
    }
    assert!(matches!(riesz_potential(&f, 3.6, 0.75), Err(PotentialsError::UnsupportedBeta(_))));
}

#[test]
fn maximal_function_examples() {
    let c = SampledSpaceTimeFunction::<f64>::from_fn(5, 9, 0.1, 0.1, |_, _, _| 2.5);
    let m = maximal_operator(&c, 0.0, 0.75);
    // Cylinders clipped by the lattice average in zeros, so the interior
    // centre attains the constant and nothing exceeds it.
    assert!((m.get(2, 4, 4) - 2.5).abs() < 1e-14);
    assert!(m.values.iter().all(|&v| v <= 2.5 + 1e-14));
    let s = single_cell(5, 9, 0.1, (2, 4, 4));
    let m = maximal_operator(&s, 0.0, 0.75);
    assert!((m.get(2, 4, 4) - 1.0).abs() < 1e-15);
    let f = SampledSpaceTimeFunction::<f64>::from_fn(5, 9, 0.1, 0.1, |t, x, y| (3.0 * t + x - 2.0 * y).cos());
    let m = maximal_operator(&f, 0.0, 0.75);
    assert!(f.values.iter().zip(&m.values).all(|(v, mv)| v.abs() <= mv + 1e-15));
}

#[test]
fn hedberg_examples() {
    let s = single_cell(10, 10, 0.1, (5, 5, 5));
    let rep = hedberg_check(&s, 2.0, 1.5, 0.5, 0.75).unwrap();
    assert!(rep.max_ratio <= 1.0 && rep.max_ratio > 0.0, "{}", rep.max_ratio);
    let doubled = s.with_values(s.values.iter().map(|v| 2.0 * v).collect());
    let rep2 = hedberg_check(&doubled, 2.0, 1.5, 0.5, 0.75).unwrap();
    assert!((rep2.max_ratio - rep.max_ratio).abs() <= 1e-12 * rep.max_ratio);
    let zero = SampledSpaceTimeFunction::<f64>::zeros(10, 10, 0.1, 0.1, false);
    assert_eq!(hedberg_check(&zero, 2.0, 1.5, 0.5, 0.75).unwrap().max_ratio, 0.0);
    assert!(hedberg_check(&s, 2.0, 1.0, 0.5, 0.75).is_err());
}

fn static_series(n: usize, steps: usize, f: impl Fn(f64, f64) -> f64 + Copy) -> Vec<SpectralField<f64>> {
    let g = SpectralGrid::new(n).unwrap();
    (0..steps).map(|_| SpectralField::from_fn(&g, f)).collect()
}

#[test]
fn poincare_of_cosine_and_constants() {
    let radii = [0.4, 0.8, 1.6];
    let c = static_series(32, 8, |_, _| 1.5);
    assert_eq!(poincare_check(&c, 0.05, 0.5, 2.0, 0.75, &radii).unwrap().max_ratio, 0.0);
    // For time-independent cos x₁ with β = ½, p = 2 the ratio at the steepest
    // centre is (r²/4)/(r² · r²/4) = 1/r² to leading order, and smaller elsewhere.
    let cos = static_series(64, 8, |x, _| x.cos());
    let rep = poincare_check(&cos, 0.05, 0.5, 2.0, 0.75, &radii).unwrap();
    for &(r, ratio) in &rep.ratios {
        assert!(ratio <= 1.05 / (r * r), "r = {r}: {ratio}");
    }
    let (r0, first) = rep.ratios[0];
    assert!((first * r0 * r0 - 1.0).abs() < 0.05, "{first}");
    let shifted = static_series(64, 8, |x, _| x.cos() + 3.0);
    let rep2 = poincare_check(&shifted, 0.05, 0.5, 2.0, 0.75, &radii).unwrap();
    assert!((rep2.max_ratio - rep.max_ratio).abs() <= 1e-9 * rep.max_ratio);
}

#[test]
fn morrey_and_campanato_examples() {
    let a: f64 = 0.75;
    let c = SampledSpaceTimeFunction::<f64>::from_fn(81, 21, 0.01, 0.05, |_, _, _| 1.5);
    let r: f64 = 0.3;
    let camp: f64 = morrey_campanato_norms(&c, 2.0, 1.0, a, CylinderNorm::Campanato, &[r]).unwrap();
    assert!(camp.abs() < 1e-20);
    // Interior cylinders give r^{λ−(2+2a)} |Q_r| c² = 2π r^λ c².
    let morrey: f64 = morrey_campanato_norms(&c, 2.0, 1.0, a, CylinderNorm::Morrey, &[r]).unwrap();
    let expect = r.powf(1.0 - (2.0 + 2.0 * a)) * cylinder_volume(r, a) * 2.25;
    assert!((morrey - expect).abs() <= 1e-12 * expect, "{morrey} vs {expect}");
    let f = SampledSpaceTimeFunction::<f64>::from_fn(21, 21, 0.01, 0.05, |t, x, y| (5.0 * t).sin() + x * y);
    for radii in [[0.15, 0.3], [0.2, 0.4]] {
        let m: f64 = morrey_campanato_norms(&f, 2.0, 1.0, a, CylinderNorm::Morrey, &radii).unwrap();
        let k = morrey_campanato_norms(&f, 2.0, 1.0, a, CylinderNorm::Campanato, &radii).unwrap();
        assert!(m >= k);
    }
}

#[test]
fn riesz_smoke_tests_validate_parameters() {
    let f = SampledSpaceTimeFunction::<f64>::from_fn(4, 8, 0.125, 0.125, |_, x, y| if x < 0.5 && y < 0.5 { 1.0 } else { 0.0 });
    let rep = riesz_integrability(&f, 0.5, 2.0, 2.0, 1.0).unwrap();
    assert!((rep.p_tilde - 4.0).abs() < 1e-15 && rep.norm > 0.0);
    assert!(riesz_integrability(&f, 0.5, 5.0, 2.0, 1.0).is_err());
    let h = riesz_holder(&f, 0.9, 2.0, 1.0, 1.0, 2).unwrap();
    assert!(h.small_order && !h.supercritical && h.pairs > 0 && h.quotient.is_finite());
    assert!(riesz_holder(&f, 0.4, 2.0, 1.0, 1.0, 2).is_err());
}
