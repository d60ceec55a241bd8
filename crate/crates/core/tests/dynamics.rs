//! Forcing, right-hand sides and the ETD2RK–Strang integrator against exact
//! solutions and independent assemblies.

use sqglc::dynamics::{
    advection, director_rhs, ferromagnet_rhs, forcing, run_simulation, step_director, theta_rhs, vorticity,
    DynamicsError, Etd2rk, ForcingMode, ModelParams, RunOptions, SimState,
};
use sqglc::fields::{dirichlet_energy, pointwise_dot, DirectorField};
use sqglc::io::{random_bandlimited_d, random_bandlimited_theta};
use sqglc::spectral::{differential_op, integrate, product_dealiased, DiffOp, SpectralField, SpectralGrid};

fn grid(n: usize) -> SpectralGrid<f64> {
    SpectralGrid::new(n).unwrap()
}

fn geodesic(g: &SpectralGrid<f64>) -> DirectorField<f64> {
    DirectorField::from_fn(g, |x, _| [x.cos(), x.sin(), 0.0]).unwrap()
}

fn params(a: f64, alpha: f64, n: usize, dt: f64, t_final: f64, forcing: ForcingMode) -> ModelParams<f64> {
    ModelParams::new(a, alpha, n, dt, t_final).with_forcing(forcing)
}

#[test]
fn forcing_vanishes_for_geodesic_and_none_mode() {
    let g = grid(32);
    let d = geodesic(&g);
    for mode in [ForcingMode::F1, ForcingMode::F2, ForcingMode::None] {
        assert!(forcing(&d, &params(0.75, 0.5, 32, 1e-3, 1.0, mode)).unwrap().max_abs() < 1e-12);
    }
    let r = random_bandlimited_d(&g, 3, 3, 0.5).unwrap();
    assert!(forcing(&r, &params(0.75, 0.5, 32, 1e-3, 1.0, ForcingMode::None)).unwrap().is_zero());
}

#[test]
fn f1_is_f2_divided_by_wavenumber_at_half() {
    let g = grid(32);
    let d = random_bandlimited_d(&g, 8, 3, 0.5).unwrap();
    let f1 = forcing(&d, &params(0.75, 0.5, 32, 1e-3, 1.0, ForcingMode::F1)).unwrap();
    let f2 = forcing(&d, &params(0.75, 0.5, 32, 1e-3, 1.0, ForcingMode::F2)).unwrap();
    let scale = f2.max_abs();
    for idx in 1..g.len() {
        let (k1, k2) = g.mode(idx);
        let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
        let diff = f1.coeffs(0)[idx] * k - f2.coeffs(0)[idx];
        assert!(diff.norm() <= 1e-13 * scale, "mode ({k1}, {k2})");
    }
    assert!(f1.coeffs(0)[0].norm() < 1e-15);
}

#[test]
fn theta_rhs_examples() {
    let g = grid(32);
    let p = params(0.75, 0.5, 32, 1e-3, 1.0, ForcingMode::F1);
    let st = SimState::new(SpectralField::zeros(&g, 1), geodesic(&g));
    assert!(theta_rhs(&st, &p).unwrap().max_abs() < 1e-12);
    let th = SpectralField::from_fn(&g, |x, _| x.cos());
    let st = SimState::new(th, DirectorField::constant(&g, [0.0, 0.0, 1.0]).unwrap());
    assert!(theta_rhs(&st, &p).unwrap().max_abs() < 1e-13);
    let st = SimState::new(random_bandlimited_theta(&g, 4, 5, 1.0), random_bandlimited_d(&g, 5, 3, 0.5).unwrap());
    let r = theta_rhs(&st, &p).unwrap();
    assert!(integrate(&r).abs() < 1e-11);
}

#[test]
fn linear_propagation_is_the_exact_semigroup() {
    let g = grid(16);
    let zero = |u: &SpectralField<f64>| Ok(SpectralField::zeros(u.grid(), u.ncomp()));
    let p = ModelParams::new(0.75, 0.5, 16, 0.1, 1.0);
    let u = SpectralField::from_fn(&g, |x, _| x.cos());
    let out = Etd2rk::theta(&g, 0.1, &p).step(&u, zero).unwrap();
    assert!(out.sub(&u.scale((-0.1f64).exp())).unwrap().max_abs() < 1e-15);
    let p = ModelParams::new(0.5, 0.5, 16, 0.1, 1.0);
    let u = SpectralField::from_fn(&g, |x, _| (2.0 * x).cos());
    let out = Etd2rk::theta(&g, 0.1, &p).step(&u, zero).unwrap();
    assert!(out.sub(&u.scale((-0.2f64).exp())).unwrap().max_abs() < 1e-15);
}

#[test]
fn etd2rk_converges_at_second_order() {
    // ∂ₜu = −(−Δ)^{3/4}u − u² with smooth data; reference from a fine run.
    let g = grid(16);
    let p = ModelParams::new(0.75, 0.5, 16, 0.1, 1.0);
    let u0 = SpectralField::from_fn(&g, |x, y| 0.5 + 0.4 * x.cos() + 0.3 * (x + y).sin());
    let square = |u: &SpectralField<f64>| Ok(product_dealiased(u, u)?.scale(-1.0));
    let run = |steps: usize| {
        let h = 1.0 / steps as f64;
        let etd = Etd2rk::theta(&g, h, &p);
        let mut u = u0.clone();
        for _ in 0..steps {
            u = etd.step(&u, square).unwrap();
        }
        u
    };
    let reference = run(2048);
    let errs: Vec<f64> = [16, 32, 64].iter().map(|&s| run(s).sub(&reference).unwrap().max_abs()).collect();
    let slope1 = (errs[0] / errs[1]).log2();
    let slope2 = (errs[1] / errs[2]).log2();
    assert!(slope1 > 1.8 && slope2 > 1.8, "errors {errs:?}");
}

#[test]
fn harmonic_and_constant_directors_are_steady_without_flow() {
    let g = grid(32);
    let p = ModelParams::new(0.75, 0.5, 32, 1e-3, 1.0);
    for d0 in [geodesic(&g), DirectorField::constant(&g, [0.0, 0.6, 0.8]).unwrap()] {
        let mut st = SimState::new(SpectralField::zeros(&g, 1), d0.clone());
        for _ in 0..100 {
            st.d = step_director(&st, &p).unwrap().0;
        }
        let drift = st.d.field().sub(d0.field()).unwrap().max_abs();
        assert!(drift <= 1e-9, "drift {drift}");
    }
}

#[test]
fn dirichlet_energy_decreases_under_the_heat_flow() {
    let g = grid(32);
    let d0 = random_bandlimited_d(&g, 12, 3, 0.6).unwrap();
    let mut increases = Vec::new();
    for dt in [4e-3, 2e-3] {
        let p = ModelParams::new(0.75, 0.5, 32, dt, 1.0);
        let mut st = SimState::new(SpectralField::zeros(&g, 1), d0.clone());
        let mut e = dirichlet_energy(&st.d).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..(0.08 / dt) as usize {
            st.d = step_director(&st, &p).unwrap().0;
            let next = dirichlet_energy(&st.d).unwrap();
            worst = worst.max(next - e);
            e = next;
        }
        increases.push(worst);
    }
    assert!(increases.iter().all(|&w| w <= 0.0), "increments {increases:?}");
}

#[test]
fn ferromagnet_terms() {
    let g = grid(32);
    let mut p = ModelParams::new(0.75, 0.5, 32, 1e-3, 1.0);
    p.epsilon = Some(0.5);
    let plain = ModelParams::new(0.75, 0.5, 32, 1e-3, 1.0);
    let th = random_bandlimited_theta(&g, 2, 4, 0.3);
    let d = DirectorField::from_fn(&g, |x, y| {
        let phi = x.sin() + 0.5 * y.cos();
        [phi.cos(), phi.sin(), 0.0]
    })
    .unwrap();
    let st = SimState::new(th.clone(), d);
    let diff = ferromagnet_rhs(&st, &p).unwrap().sub(&director_rhs(&st, &plain).unwrap()).unwrap();
    assert!(diff.max_abs() < 1e-12);
    let north = SimState::new(SpectralField::zeros(&g, 1), DirectorField::constant(&g, [0.0, 0.0, 1.0]).unwrap());
    assert!(ferromagnet_rhs(&north, &p).unwrap().max_abs() < 1e-13);
    // With u = 0 the full director velocity γΔd + G is tangent to the sphere.
    let d = DirectorField::from_fn(&g, |x, y| {
        let (phi, psi) = (0.3 * x.sin(), 0.2 * (x + y).cos());
        [phi.cos() * psi.cos(), phi.sin() * psi.cos(), psi.sin()]
    })
    .unwrap();
    let st = SimState::new(SpectralField::zeros(&g, 1), d.clone());
    let full = ferromagnet_rhs(&st, &p)
        .unwrap()
        .add(&differential_op(d.field(), DiffOp::Laplacian).unwrap())
        .unwrap();
    let dot = pointwise_dot(&d, &full);
    assert!(dot.iter().all(|v| v.abs() < 1e-8), "max {}", dot.iter().fold(0.0f64, |m, v| m.max(v.abs())));
}

#[test]
fn pure_sqg_enstrophy_decays() {
    let g = grid(32);
    let p = params(1.0, 0.0, 32, 2e-3, 0.1, ForcingMode::None);
    let th = random_bandlimited_theta(&g, 30, 4, 1.0);
    let d = DirectorField::constant(&g, [0.0, 0.0, 1.0]).unwrap();
    let out = run_simulation(&p, th, d, &RunOptions::default()).unwrap();
    for w in out.report.samples.windows(2) {
        assert!(w[1].e1 <= w[0].e1, "enstrophy grew at t = {}", w[1].t);
    }
}

#[test]
fn coupled_steady_state_is_stationary() {
    let g = grid(32);
    for mode in [ForcingMode::F1, ForcingMode::F2] {
        let p = params(0.75, 0.5, 32, 1e-3, 0.1, mode);
        let d0 = geodesic(&g);
        let out = run_simulation(&p, SpectralField::zeros(&g, 1), d0.clone(), &RunOptions::default()).unwrap();
        assert_eq!(out.state.step, 100);
        assert!(out.state.theta.max_abs() <= 1e-10);
        assert!(out.state.d.field().sub(d0.field()).unwrap().max_abs() <= 1e-8);
    }
}

#[test]
fn vorticity_assembly_agrees_with_generalized_system() {
    // θ = −ω turns a = 1, α = 0, F₂ into the vorticity equation.
    let g = grid(32);
    let p = params(1.0, 0.0, 32, 1e-3, 1.0, ForcingMode::F2);
    for seed in 0..4 {
        let omega = random_bandlimited_theta(&g, 100 + seed, 5, 1.0);
        let d = random_bandlimited_d(&g, 200 + seed, 3, 0.5).unwrap();
        let direct = vorticity::rhs(&omega, &d).unwrap().add(&vorticity::linear(&omega).unwrap()).unwrap();
        let st = SimState::new(omega.scale(-1.0), d);
        let lin = differential_op(&st.theta, DiffOp::Laplacian).unwrap();
        let general = theta_rhs(&st, &p).unwrap().add(&lin).unwrap().scale(-1.0);
        let err = general.sub(&direct).unwrap().max_abs();
        assert!(err <= 1e-12 * direct.max_abs().max(1.0), "seed {seed}: {err}");
    }
}

#[test]
fn advection_of_single_mode_vanishes() {
    let g = grid(16);
    let p = ModelParams::new(0.75, 0.5, 16, 1e-3, 1.0);
    let th = SpectralField::from_fn(&g, |x, _| x.cos());
    assert!(advection(&th, &p).unwrap().max_abs() < 1e-14);
}

#[test]
fn large_velocity_triggers_cfl_abort() {
    let g = grid(32);
    let p = params(0.75, 0.5, 32, 0.5, 1.0, ForcingMode::None);
    let th = random_bandlimited_theta(&g, 1, 4, 50.0);
    let d = DirectorField::constant(&g, [0.0, 0.0, 1.0]).unwrap();
    let err = run_simulation(&p, th, d, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, DynamicsError::CflViolation { step: 0, .. }), "{err:?}");
}
