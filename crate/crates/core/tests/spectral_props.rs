use es_core::spectral::norms::lp_norm_samples;
use es_core::spectral::ops::{pad, truncate};
use es_core::spectral::{
    friedrichs_project, inner_product, lambda_pow, laplacian, lp_norm, sobolev_norm, Grid, LpExponent,
    SpectralField,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random real field with modes `|k_i| <= kmax`, optionally mean-free.
fn random_real(grid: &Grid, seed: u64, kmax: i64, mean_free: bool) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid, 1, true);
    for m in 0..grid.len() {
        let mode = grid.mode(m);
        if mode[..grid.dim()].iter().any(|k| k.abs() > kmax) {
            continue;
        }
        f.coeffs_mut(0)[m] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    if mean_free {
        let z = grid.index_of_mode(&vec![0; grid.dim()]).unwrap();
        f.coeffs_mut(0)[z] = Complex64::new(0.0, 0.0);
    }
    f.symmetrize();
    f
}

fn grids() -> impl Strategy<Value = Grid> {
    prop_oneof![
        Just(Grid::new(1, 64, 3.0).unwrap()),
        Just(Grid::new(2, 16, std::f64::consts::PI).unwrap()),
        Just(Grid::new(3, 8, 2.0).unwrap()),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup(grid in grids(), seed in any::<u64>(), s1 in -1.0f64..3.0, s2 in -1.0f64..3.0) {
        let z = random_real(&grid, seed, 3, true);
        let lhs = lambda_pow(&lambda_pow(&z, s1).unwrap(), s2).unwrap();
        let rhs = lambda_pow(&z, s1 + s2).unwrap();
        prop_assert!(lhs.sub(&rhs).max_abs_coeff() <= 1e-10 * rhs.max_abs_coeff());
    }

    #[test]
    fn parseval(grid in grids(), seed in any::<u64>()) {
        let z = random_real(&grid, seed, 3, false);
        let samples = z.to_complex_samples();
        let grid_l2 = lp_norm_samples(&samples, grid.cell_volume(), LpExponent::Two);
        let spec_l2 = sobolev_norm(&z, 0.0, true).unwrap();
        prop_assert!(rel(grid_l2, spec_l2) < 1e-10);
        prop_assert!(rel(lp_norm(&z, LpExponent::Two), spec_l2) < 1e-10);
    }

    #[test]
    fn projector_is_self_adjoint_and_idempotent(
        grid in grids(), a in any::<u64>(), b in any::<u64>(), frac in 0.1f64..1.0
    ) {
        let u = random_real(&grid, a, 4, false);
        let v = random_real(&grid, b, 4, false);
        let n = frac * grid.max_wavenumber();
        let lhs = inner_product(&friedrichs_project(&u, n), &v).unwrap();
        let rhs = inner_product(&u, &friedrichs_project(&v, n)).unwrap();
        let scale = sobolev_norm(&u, 0.0, true).unwrap() * sobolev_norm(&v, 0.0, true).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        let once = friedrichs_project(&u, n);
        prop_assert_eq!(friedrichs_project(&once, n), once);
    }

    #[test]
    fn even_real_symbols_keep_realness(grid in grids(), seed in any::<u64>(), sigma in 0.0f64..4.0) {
        let z = random_real(&grid, seed, 4, true);
        prop_assert_eq!(z.conjugate_symmetry_defect(), 0.0);
        prop_assert_eq!(lambda_pow(&z, sigma).unwrap().conjugate_symmetry_defect(), 0.0);
        prop_assert_eq!(laplacian(&z).conjugate_symmetry_defect(), 0.0);
        prop_assert_eq!(friedrichs_project(&z, 0.5 * grid.max_wavenumber()).conjugate_symmetry_defect(), 0.0);
    }

    #[test]
    fn lattice_holder(grid in grids(), seed in any::<u64>(), s in 0.5f64..6.0, t in 0.0f64..1.0) {
        let z = random_real(&grid, seed, 4, true);
        let sigma = t * s;
        let mid = sobolev_norm(&z, sigma, true).unwrap();
        let lo = sobolev_norm(&z, 0.0, true).unwrap();
        let hi = sobolev_norm(&z, s, true).unwrap();
        let bound = lo.powf(1.0 - sigma / s) * hi.powf(sigma / s);
        prop_assert!(mid <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn pad_then_truncate_is_identity(seed in any::<u64>()) {
        let g = Grid::new(1, 32, 4.0).unwrap();
        let z = random_real(&g, seed, 16, false);
        let fine = g.refined(4).unwrap();
        let back = truncate(&pad(&z, &fine).unwrap(), &g).unwrap();
        prop_assert!(back.sub(&z).max_abs_coeff() < 1e-15);
        let below = random_real(&g, seed, 15, false);
        let padded = sobolev_norm(&pad(&below, &fine).unwrap(), 0.0, true).unwrap();
        prop_assert!(rel(padded, sobolev_norm(&below, 0.0, true).unwrap()) < 1e-12);
    }
}

#[test]
fn single_modes_are_eigenfunctions() {
    let g = Grid::new(2, 32, 5.0).unwrap();
    for (k, sigma) in [([1i64, 0], 0.7), ([3, -2], 2.5), ([-7, 5], -1.5), ([15, 15], 4.0)] {
        let idx = g.index_of_mode(&k).unwrap();
        let mut z = SpectralField::zeros(&g, 1, false);
        z.coeffs_mut(0)[idx] = Complex64::new(0.3, 0.4);
        let out = lambda_pow(&z, sigma).unwrap();
        let xi2 = (std::f64::consts::PI / 5.0).powi(2) * (k[0] * k[0] + k[1] * k[1]) as f64;
        let want = Complex64::new(0.3, 0.4) * xi2.powf(sigma / 2.0);
        assert!((out.coeffs(0)[idx] - want).norm() <= 1e-12 * want.norm());
        assert_eq!(out.coeffs(0).iter().filter(|c| c.norm() != 0.0).count(), 1);
    }
}

#[test]
fn negative_orders_need_zero_mean() {
    let g = Grid::new(1, 16, 1.0).unwrap();
    let z = SpectralField::from_real_fn(&g, |x| 1.0 + x[0].sin());
    assert!(lambda_pow(&z, -1.0).is_err());
    assert!(sobolev_norm(&z, -0.5, true).is_err());
    assert!(lambda_pow(&z, -2.5).is_err());
}
