use es_core::lemmas::graded_field;
use es_core::makino::State;
use es_core::spectral::mollifier::profile;
use es_core::spectral::{Grid, SpectralField};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Family, FieldSpec, InitialSection};
use crate::error::CliResult;

fn pad3(v: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    out
}

fn unit_direction(spec: &FieldSpec, dim: usize) -> Vec<f64> {
    if spec.direction.is_empty() {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        return e;
    }
    let n = spec.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    spec.direction.iter().map(|x| x / n).collect()
}

/// Real scalar samples of the family's profile.
fn profile_samples(spec: &FieldSpec, grid: &Grid, seed: u64) -> CliResult<Vec<f64>> {
    let d = grid.dim();
    let c = pad3(&spec.center);
    let dist = |x: [f64; 3]| (0..d).map(|i| (x[i] - c[i]).powi(2)).sum::<f64>().sqrt();
    Ok(match spec.family {
        Family::Zero => vec![0.0; grid.len()],
        Family::Gaussian => grid
            .points_iter()
            .map(|x| spec.amplitude * (-(dist(x) / spec.width).powi(2)).exp())
            .collect(),
        Family::Bump => grid
            .points_iter()
            .map(|x| spec.amplitude * profile(dist(x) / spec.width)[0])
            .collect(),
        Family::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(spec.stream);
            let f = graded_field(grid, &mut rng, spec.decay, spec.max_mode, 1, true)?;
            let s = f.to_real_samples().remove(0);
            let sup = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let k = if sup > 0.0 { spec.amplitude / sup } else { 0.0 };
            s.into_iter().map(|v| k * v).collect()
        }
    })
}

pub fn density(spec: &FieldSpec, grid: &Grid, seed: u64) -> CliResult<SpectralField> {
    Ok(SpectralField::from_real_samples(grid, &[profile_samples(spec, grid, seed)?])?)
}

pub fn velocity(spec: &FieldSpec, grid: &Grid, seed: u64) -> CliResult<SpectralField> {
    let p = profile_samples(spec, grid, seed)?;
    let comps: Vec<Vec<f64>> = unit_direction(spec, grid.dim())
        .into_iter()
        .map(|e| p.iter().map(|v| e * v).collect())
        .collect();
    Ok(SpectralField::from_real_samples(grid, &comps)?)
}

pub fn laser(spec: &FieldSpec, grid: &Grid, seed: u64) -> CliResult<SpectralField> {
    let d = grid.dim();
    let p = profile_samples(spec, grid, seed)?;
    let k = pad3(&spec.wavenumber);
    let carrier: Vec<Complex64> = grid
        .points_iter()
        .zip(&p)
        .map(|(x, &v)| Complex64::from_polar(v, (0..d).map(|i| k[i] * x[i]).sum()))
        .collect();
    let comps: Vec<Vec<Complex64>> = unit_direction(spec, d)
        .into_iter()
        .map(|e| carrier.iter().map(|z| z * e).collect())
        .collect();
    Ok(SpectralField::from_complex_samples(grid, &comps)?)
}

/// Initial triple in the sound-speed variable; `rho` describes `rho~`
/// directly.
pub fn initial_state(init: &InitialSection, grid: &Grid, seed: u64) -> CliResult<State> {
    Ok(State::new(
        density(&init.rho, grid, seed)?,
        velocity(&init.w, grid, seed)?,
        laser(&init.a, grid, seed)?,
        0.0,
    )?)
}
