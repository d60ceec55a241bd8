//! Hand-computed single-mode answers and brute-force cross-checks for the
//! spectral operators and the director-field algebra.

use num_complex::Complex;
use sqglc::fields::{
    a_matrix, curl_div_xi, pointwise_dot, project_to_sphere, stress_tensor, tension, DirectorField, FieldError,
};
use sqglc::io::{random_bandlimited_d, random_bandlimited_theta};
use sqglc::spectral::{
    biot_savart, differential_op, fractional_laplacian, integrate, product_dealiased, riesz_transform, DiffOp,
    SpectralError, SpectralField, SpectralGrid,
};
use std::f64::consts::TAU;

fn grid(n: usize) -> SpectralGrid<f64> {
    SpectralGrid::new(n).unwrap()
}

fn max_diff(a: &SpectralField<f64>, b: &SpectralField<f64>) -> f64 {
    a.sub(b).unwrap().max_abs()
}

#[test]
fn fractional_laplacian_single_modes() {
    let g = grid(32);
    let c1 = SpectralField::from_fn(&g, |x, _| x.cos());
    assert!(max_diff(&fractional_laplacian(&c1, 0.5).unwrap(), &c1) < 1e-13);
    let c2 = SpectralField::from_fn(&g, |x, _| (2.0 * x).cos());
    let expect = c2.scale(2f64.powf(1.5));
    assert!(max_diff(&fractional_laplacian(&c2, 0.75).unwrap(), &expect) < 1e-12 * 2.83);
    let five = SpectralField::from_fn(&g, |_, _| 5.0);
    assert!(fractional_laplacian(&five, 0.75).unwrap().max_abs() < 1e-13);
    assert!(matches!(fractional_laplacian(&five, -0.5), Err(SpectralError::NonZeroMean(_))));
}

#[test]
fn biot_savart_of_cosine_and_divergence_free() {
    let g = grid(32);
    let th = SpectralField::from_fn(&g, |x, _| x.cos());
    let u = biot_savart(&th, 0.5).unwrap();
    let expect = SpectralField::from_fn_components(&g, 2, |c, x, _| if c == 0 { 0.0 } else { -x.sin() });
    assert!(max_diff(&u, &expect) < 1e-13);
    assert!(biot_savart(&SpectralField::zeros(&g, 1), 0.5).unwrap().max_abs() == 0.0);
    let r = random_bandlimited_theta(&g, 3, 6, 1.0);
    for alpha in [0.0, 0.3, 0.5, 1.0] {
        let div = differential_op(&biot_savart(&r, alpha).unwrap(), DiffOp::Div).unwrap();
        assert!(div.max_abs() < 1e-12, "alpha = {alpha}");
    }
}

#[test]
fn differential_identities() {
    let g = grid(32);
    let psi = SpectralField::from_fn(&g, |x, y| (x + y).sin());
    // With ∇⊥ = (−∂₂, ∂₁) and curl u = ∂₁u₂ − ∂₂u₁, curl ∇⊥ψ = Δψ = −2ψ here.
    let curl = differential_op(&differential_op(&psi, DiffOp::PerpGrad).unwrap(), DiffOp::Curl).unwrap();
    assert!(max_diff(&curl, &psi.scale(-2.0)) < 1e-12);
    let c = SpectralField::from_fn(&g, |_, _| 3.0);
    assert!(differential_op(&c, DiffOp::Grad).unwrap().max_abs() < 1e-13);
    let r = random_bandlimited_theta(&g, 11, 8, 1.0);
    let div = differential_op(&differential_op(&r, DiffOp::PerpGrad).unwrap(), DiffOp::Div).unwrap();
    assert!(div.max_abs() < 1e-12);
}

#[test]
fn riesz_transforms_square_to_minus_identity() {
    let g = grid(64);
    let f = random_bandlimited_theta(&g, 5, 10, 1.0);
    let r11 = riesz_transform(&riesz_transform(&f, 0).unwrap(), 0).unwrap();
    let r22 = riesz_transform(&riesz_transform(&f, 1).unwrap(), 1).unwrap();
    let sum = r11.add(&r22).unwrap();
    assert!(sum.add(&f).unwrap().max_abs() <= 1e-12 * f.max_abs());
}

#[test]
fn products_match_double_angle_and_vanish_with_zero() {
    let g = grid(32);
    let c = SpectralField::from_fn(&g, |x, _| x.cos());
    let expect = SpectralField::from_fn(&g, |x, _| 0.5 + 0.5 * (2.0 * x).cos());
    assert!(max_diff(&product_dealiased(&c, &c).unwrap(), &expect) < 1e-13);
    let z = SpectralField::zeros(&g, 1);
    assert!(product_dealiased(&c, &z).unwrap().is_zero() || product_dealiased(&c, &z).unwrap().max_abs() == 0.0);
}

#[test]
fn aliased_product_keeps_only_the_mean() {
    let g = grid(16);
    // cos 7x is outside the mask, so the masked inputs are zero except for
    // what survives; build the product from the exact coefficients instead.
    let mut f = SpectralField::zeros(&g, 1);
    let i = g.mode_index(5, 0).unwrap();
    let j = g.mode_index(-5, 0).unwrap();
    f.coeffs_mut(0)[i] = Complex::new(0.5, 0.0);
    f.coeffs_mut(0)[j] = Complex::new(0.5, 0.0);
    let p = product_dealiased(&f, &f).unwrap();
    // cos²5x = ½ + ½cos 10x and |10| lies outside the mask.
    assert!((p.mode(0, 0, 0).re - 0.5).abs() < 1e-14);
    assert!(p.sub(&SpectralField::from_fn(&g, |_, _| 0.5)).unwrap().max_abs() < 1e-14);
}

/// Direct convolution of masked coefficients followed by masking.
fn brute_force_product(f: &SpectralField<f64>, h: &SpectralField<f64>) -> SpectralField<f64> {
    let g = f.grid();
    let mut out = SpectralField::zeros(g, 1);
    let modes: Vec<(i64, i64)> = (0..g.len()).map(|i| g.mode(i)).filter(|&(a, b)| g.in_mask(a, b)).collect();
    for &(a1, a2) in &modes {
        for &(b1, b2) in &modes {
            let (k1, k2) = (a1 + b1, a2 + b2);
            if !g.in_mask(k1, k2) {
                continue;
            }
            let idx = g.mode_index(k1, k2).unwrap();
            out.coeffs_mut(0)[idx] += f.mode(0, a1, a2) * h.mode(0, b1, b2);
        }
    }
    out
}

#[test]
fn dealiased_product_equals_exact_convolution() {
    for n in [16, 24] {
        let g = grid(n);
        let f = random_bandlimited_theta(&g, 1, n as u32, 1.0);
        let h = random_bandlimited_theta(&g, 2, n as u32, 1.0);
        let fast = product_dealiased(&f, &h).unwrap();
        let slow = brute_force_product(&f, &h);
        for idx in 0..g.len() {
            let d = fast.coeffs(0)[idx] - slow.coeffs(0)[idx];
            assert!(d.norm() < 1e-14, "n = {n}, mode {:?}", g.mode(idx));
        }
    }
}

#[test]
fn integrals_of_simple_fields() {
    let g = grid(32);
    assert!((integrate(&SpectralField::from_fn(&g, |_, _| 1.0)) - TAU * TAU).abs() < 1e-12);
    assert!(integrate(&SpectralField::from_fn(&g, |x, _| x.cos())).abs() < 1e-12);
    let f = SpectralField::from_fn(&g, |_, y| 2.0 + (3.0 * y).cos());
    assert!((integrate(&f) - 2.0 * TAU * TAU).abs() < 1e-11);
}

fn director(g: &SpectralGrid<f64>, f: impl Fn(f64, f64) -> [f64; 3]) -> DirectorField<f64> {
    DirectorField::from_fn(g, f).unwrap()
}

/// Exactly unit director from two small band-limited angles; its spectrum
/// beyond the dealias mask is below round-off.
fn smooth_unit_director(g: &SpectralGrid<f64>, seed: u64) -> DirectorField<f64> {
    let phi = random_bandlimited_theta(g, seed, 2, 0.3).to_physical().swap_remove(0);
    let psi = random_bandlimited_theta(g, seed + 1, 2, 0.3).to_physical().swap_remove(0);
    let comps: Vec<Vec<f64>> = vec![
        phi.iter().zip(&psi).map(|(p, q)| p.cos() * q.cos()).collect(),
        phi.iter().zip(&psi).map(|(p, q)| p.sin() * q.cos()).collect(),
        psi.iter().map(|q| q.sin()).collect(),
    ];
    DirectorField::from_field(SpectralField::from_physical(g, &comps)).unwrap()
}

#[test]
fn stress_of_constant_and_geodesic_directors() {
    let g = grid(32);
    let s = stress_tensor(&director(&g, |_, _| [0.0, 0.0, 1.0])).unwrap();
    assert!(s.xi11.max_abs() < 1e-14 && s.xi12.max_abs() < 1e-14);
    let s = stress_tensor(&director(&g, |x, _| [x.cos(), x.sin(), 0.0])).unwrap();
    assert!(s.xi11.sub(&SpectralField::from_fn(&g, |_, _| 0.5)).unwrap().max_abs() < 1e-13);
    assert!(s.xi12.max_abs() < 1e-13);
    let s = stress_tensor(&director(&g, |x, y| [(x + y).cos(), (x + y).sin(), 0.0])).unwrap();
    assert!(s.xi11.max_abs() < 1e-13);
    assert!(s.xi12.sub(&SpectralField::from_fn(&g, |_, _| 1.0)).unwrap().max_abs() < 1e-13);
}

#[test]
fn tension_vanishes_on_harmonic_maps_and_is_normal_to_d() {
    let g = grid(32);
    assert!(tension(&director(&g, |x, _| [x.cos(), x.sin(), 0.0])).unwrap().max_abs() < 1e-12);
    assert!(tension(&director(&g, |_, _| [0.6, 0.0, 0.8])).unwrap().max_abs() < 1e-13);
    let g = grid(64);
    let d = smooth_unit_director(&g, 9);
    let t = tension(&d).unwrap();
    let dot = pointwise_dot(&d, &t);
    let scale = t.max_abs();
    assert!(dot.iter().all(|v| v.abs() <= 1e-8 * scale.max(1.0)), "max {}", dot.iter().fold(0.0f64, |m, v| m.max(v.abs())));
}

#[test]
fn a_matrix_of_geodesic_and_trace() {
    let g = grid(32);
    let a = a_matrix(&director(&g, |_, _| [1.0, 0.0, 0.0])).unwrap();
    assert!(a.iter().flatten().all(|f| f.max_abs() < 1e-14));
    let a = a_matrix(&director(&g, |x, _| [x.cos(), x.sin(), 0.0])).unwrap();
    let minus_one = SpectralField::from_fn(&g, |_, _| -1.0);
    assert!(a[0][0].max_abs() < 1e-13);
    assert!(a[0][1].sub(&minus_one).unwrap().max_abs() < 1e-13);
    assert!(a[1][0].max_abs() < 1e-13 && a[1][1].max_abs() < 1e-13);
    let d = random_bandlimited_d(&g, 4, 3, 0.4).unwrap();
    let a = a_matrix(&d).unwrap();
    assert!(a[0][0].add(&a[1][1]).unwrap().max_abs() < 1e-14);
}

#[test]
fn curl_div_xi_matches_tension_form() {
    let g = grid(32);
    assert!(curl_div_xi(&director(&g, |x, _| [x.cos(), x.sin(), 0.0])).unwrap().max_abs() < 1e-12);
    assert!(curl_div_xi(&director(&g, |_, _| [0.0, 1.0, 0.0])).unwrap().max_abs() < 1e-14);
    // ∂ⱼΞᵢⱼ = ∂ᵢd·Δd on unit fields, so curl div Ξ = ∂₁(∂₂d·τ) − ∂₂(∂₁d·τ).
    let g = grid(64);
    let d = smooth_unit_director(&g, 21);
    let lhs = curl_div_xi(&d).unwrap();
    let tau = tension(&d).unwrap();
    let dx = differential_op(d.field(), DiffOp::Partial(0)).unwrap();
    let dy = differential_op(d.field(), DiffOp::Partial(1)).unwrap();
    let dot = |a: &SpectralField<f64>, b: &SpectralField<f64>| {
        let pa = a.to_physical();
        let pb = b.to_physical();
        let v: Vec<f64> = (0..g.len()).map(|i| (0..3).map(|m| pa[m][i] * pb[m][i]).sum()).collect();
        SpectralField::from_physical(&g, &[v])
    };
    let rhs = differential_op(&dot(&dy, &tau), DiffOp::Partial(0))
        .unwrap()
        .sub(&differential_op(&dot(&dx, &tau), DiffOp::Partial(1)).unwrap())
        .unwrap();
    let err = lhs.sub(&rhs).unwrap().max_abs();
    assert!(err <= 1e-8 * lhs.max_abs(), "relative error {}", err / lhs.max_abs());
}

#[test]
fn projection_examples() {
    let g = grid(16);
    let v = SpectralField::from_fn_components(&g, 3, |c, _, _| if c == 2 { 2.0 } else { 0.0 });
    let (d, _) = project_to_sphere(&v).unwrap();
    let e3 = SpectralField::from_fn_components(&g, 3, |c, _, _| if c == 2 { 1.0 } else { 0.0 });
    assert!(max_diff(d.field(), &e3) < 1e-14);
    let v = SpectralField::from_fn_components(&g, 3, |_, _, _| 1.0);
    let (d, _) = project_to_sphere(&v).unwrap();
    let r = 1.0 / 3f64.sqrt();
    assert!((d.field().mode(0, 0, 0).re - r).abs() < 1e-14);
    let unit = director(&g, |x, _| [x.cos(), x.sin(), 0.0]);
    let (again, _) = project_to_sphere(unit.field()).unwrap();
    assert!(max_diff(again.field(), unit.field()) < 1e-12);
    let zero = SpectralField::zeros(&g, 3);
    assert!(matches!(project_to_sphere(&zero), Err(FieldError::DegeneratePoint { .. })));
}
