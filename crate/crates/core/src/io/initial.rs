//! Initial-condition presets.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DirectorPreset, IoError, RunConfig, ThetaPreset};
use crate::dynamics::SimState;
use crate::fields::{project_to_sphere, DirectorField, FieldError};
use crate::scalar::{cast, Real};
use crate::spectral::{SpectralField, SpectralGrid};

/// Zero-mean Gaussian bump of the given amplitude and width centred at `(π, π)`.
pub fn gaussian_vortex_theta<T: Real>(grid: &SpectralGrid<T>, amplitude: T, width: T) -> SpectralField<T> {
    let pi = T::PI();
    let two = cast::<T>(2.0);
    let mut f = SpectralField::from_fn(grid, |x1, x2| {
        let (dx, dy) = (x1 - pi, x2 - pi);
        amplitude * (-(dx * dx + dy * dy) / (two * width * width)).exp()
    })
    .masked();
    f.coeffs_mut(0)[0] = Complex::new(T::zero(), T::zero());
    f
}

/// `d = (cos x₁, sin x₁, 0)`, a harmonic map onto a great circle.
pub fn harmonic_geodesic_d<T: Real>(grid: &SpectralGrid<T>) -> DirectorField<T> {
    let f = SpectralField::from_fn_components(grid, 3, |c, x1, _| match c {
        0 => x1.cos(),
        1 => x1.sin(),
        _ => T::zero(),
    });
    DirectorField::from_field(f).expect("three components")
}

/// Real trigonometric polynomial with uniform random coefficients on
/// `0 < |k|∞ ≤ kmax`, scaled by `amplitude / √(mode count)`.
fn random_modes<T: Real>(grid: &SpectralGrid<T>, rng: &mut ChaCha8Rng, kmax: i64, amplitude: T) -> SpectralField<T> {
    let mut modes = Vec::new();
    for k2 in -kmax..=kmax {
        for k1 in 0..=kmax {
            if k1 > 0 || k2 > 0 {
                let a: f64 = rng.gen_range(-1.0..=1.0);
                let b: f64 = rng.gen_range(-1.0..=1.0);
                modes.push((k1, k2, a, b));
            }
        }
    }
    let scale = amplitude / cast::<T>((modes.len() as f64).sqrt());
    let half = cast::<T>(0.5);
    let mut f = SpectralField::zeros(grid, 1);
    for (k1, k2, a, b) in modes {
        if !grid.in_mask(k1, k2) {
            continue;
        }
        let (Some(p), Some(m)) = (grid.mode_index(k1, k2), grid.mode_index(-k1, -k2)) else {
            continue;
        };
        let (a, b) = (cast::<T>(a) * scale * half, cast::<T>(b) * scale * half);
        let c = f.coeffs_mut(0);
        c[p] = Complex::new(a, -b);
        c[m] = Complex::new(a, b);
    }
    f
}

/// Zero-mean band-limited random temperature.
pub fn random_bandlimited_theta<T: Real>(grid: &SpectralGrid<T>, seed: u64, kmax: u32, amplitude: T) -> SpectralField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_modes(grid, &mut rng, kmax as i64, amplitude)
}

/// Projection of `e₃ + amplitude · (random band-limited vector field)`.
pub fn random_bandlimited_d<T: Real>(
    grid: &SpectralGrid<T>,
    seed: u64,
    kmax: u32,
    amplitude: T,
) -> Result<DirectorField<T>, FieldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let parts: Vec<SpectralField<T>> = (0..3).map(|_| random_modes(grid, &mut rng, kmax as i64, amplitude)).collect();
    let mut v = SpectralField::stack(&[&parts[0], &parts[1], &parts[2]])?;
    v.coeffs_mut(2)[0] += Complex::new(T::one(), T::zero());
    Ok(project_to_sphere(&v)?.0)
}

/// Builds the initial state described by `cfg` on `grid`.
pub fn initial_state<T: Real>(cfg: &RunConfig, grid: &SpectralGrid<T>) -> Result<SimState<T>, IoError> {
    let field_err = |e: FieldError| IoError::Validation(format!("initial director: {e}"));
    let theta = match &cfg.initial.theta {
        ThetaPreset::Zero => SpectralField::zeros(grid, 1),
        ThetaPreset::GaussianVortex { amplitude, width } => gaussian_vortex_theta(grid, cast(*amplitude), cast(*width)),
        ThetaPreset::RandomBandlimited { seed, kmax, amplitude } => {
            random_bandlimited_theta(grid, *seed, *kmax, cast(*amplitude))
        }
        ThetaPreset::FromSnapshot(p) => super::load_state(p, grid)?.theta,
    };
    let d = match &cfg.initial.d {
        DirectorPreset::HarmonicGeodesic => harmonic_geodesic_d(grid),
        DirectorPreset::Constant(v) => {
            DirectorField::constant(grid, [cast(v[0]), cast(v[1]), cast(v[2])]).map_err(field_err)?
        }
        DirectorPreset::RandomBandlimited { seed, kmax, amplitude } => {
            random_bandlimited_d(grid, *seed, *kmax, cast(*amplitude)).map_err(field_err)?
        }
        DirectorPreset::FromSnapshot(p) => super::load_state(p, grid)?.d,
    };
    Ok(SimState::new(theta, d))
}
