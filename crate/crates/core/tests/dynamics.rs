use es_core::burgers::{BurgersFlow, InitialVelocity};
use es_core::dynamics::{run, DealiasRule, FlowCache, Model, NullObserver, Outcome, SchemeConfig};
use es_core::makino::State;
use es_core::params::PhysicalParams;
use es_core::spectral::{Grid, SpectralField};
use num_complex::Complex64;

fn gauss(x: f64, c: f64, w: f64) -> f64 {
    (-((x - c) / w).powi(2)).exp()
}

fn bump_state(grid: &Grid, amp: f64) -> State {
    let r = SpectralField::from_real_fn(grid, |x| amp * gauss(x[0], 0.3, 1.0));
    let w = SpectralField::from_real_fn(grid, |x| 0.5 * amp * gauss(x[0], -0.4, 0.9));
    let a: Vec<Complex64> = grid
        .points_iter()
        .map(|x| Complex64::from_polar(amp * gauss(x[0], 0.0, 1.1), 2.0 * x[0]))
        .collect();
    let a = SpectralField::from_complex_samples(grid, &[a]).unwrap();
    State::new(r, w, a, 0.0).unwrap()
}

fn sine_flow() -> BurgersFlow {
    BurgersFlow::new(InitialVelocity::sine_1d(0.1, &[0.02], &[1.0])).unwrap()
}

fn model(grid: &Grid, cfg: SchemeConfig) -> Model {
    Model::new(PhysicalParams::default(), 5.5, sine_flow(), grid.clone(), cfg).unwrap()
}

fn cfg(t_end: f64, dt: f64) -> SchemeConfig {
    SchemeConfig {
        t_end,
        dt_max: dt,
        cfl: 10.0,
        ..SchemeConfig::default()
    }
}

fn advance(m: &Model, s: &State, dt: f64, steps: usize) -> State {
    let mut cache = FlowCache::new();
    let mut s = s.clone();
    s.project(m.cutoff());
    for _ in 0..steps {
        s = m.step(&s, dt, &mut cache).unwrap();
    }
    s
}

fn distance(a: &State, b: &State) -> f64 {
    a.parts()
        .iter()
        .zip(b.parts())
        .map(|(x, y)| x.sub(y).max_abs_coeff())
        .fold(0.0, f64::max)
}

#[test]
fn zero_state_is_stationary() {
    let grid = Grid::new(1, 64, 10.0).unwrap();
    let m = model(&grid, cfg(0.5, 0.01));
    let out = run(&m, &State::zeros(&grid), &[1.0], &mut NullObserver).unwrap();
    assert_eq!(out.outcome, Outcome::Completed);
    assert!(out.final_state.is_zero());
    assert!((out.final_state.t - 0.5).abs() < 1e-15);
}

#[test]
fn single_laser_mode_follows_its_symbol() {
    let grid = Grid::new(1, 64, 10.0).unwrap();
    let m = model(&grid, cfg(1.0, 0.1));
    let k = grid.index_of_mode(&[3]).unwrap();
    let mut a = SpectralField::zeros(&grid, 1, false);
    a.coeffs_mut(0)[k] = Complex64::new(0.7, -0.2);
    let s0 = State::new(
        SpectralField::zeros(&grid, 1, true),
        SpectralField::zeros(&grid, 1, true),
        a,
        0.0,
    )
    .unwrap();
    let tend = m.rhs(&s0).unwrap();
    assert!(tend.d_a_nonlinear.is_zero());
    let xi2 = grid.xi_sq(k);
    let want = Complex64::new(0.0, 0.5) * (Complex64::new(10.0, 2.0) - xi2 / 10.0);
    assert!((tend.d_a_linear.coeffs(0)[k] - want * s0.a.coeffs(0)[k]).norm() < 1e-14);

    let s1 = advance(&m, &s0, 0.1, 10);
    let exact = s0.a.coeffs(0)[k] * want.exp();
    assert!((s1.a.coeffs(0)[k] - exact).norm() < 1e-13);
    assert!(s1.rho_tilde.max_abs_coeff() < 1e-15 && s1.w.max_abs_coeff() < 1e-15);
}

#[test]
fn fourth_order_in_time() {
    let grid = Grid::new(1, 128, 10.0).unwrap();
    let s0 = bump_state(&grid, 0.5);
    let m = model(&grid, cfg(1.0, 1.0));
    let reference = advance(&m, &s0, 1.0 / 256.0, 256);
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| distance(&advance(&m, &s0, 1.0 / n as f64, n), &reference))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.7, "observed order {order}, errors {errs:?}");
    }
}

#[test]
fn band_limit_and_realness_survive() {
    let grid = Grid::new(1, 64, 10.0).unwrap();
    let mut c = cfg(0.2, 0.01);
    c.dealias = DealiasRule::Sharp(2.0);
    let m = model(&grid, c);
    let out = advance(&m, &bump_state(&grid, 0.3), 0.01, 20);
    assert!(out.is_band_limited(2.0));
    assert!(out.rho_tilde.conjugate_symmetry_defect() < 1e-14);
    assert!(out.w.conjugate_symmetry_defect() < 1e-14);
}

#[test]
fn laser_decouples_without_ponderomotive_force() {
    let grid = Grid::new(1, 64, 10.0).unwrap();
    let params = PhysicalParams {
        gamma_p: 0.0,
        ..PhysicalParams::default()
    };
    let m = Model::new(params, 5.5, sine_flow(), grid.clone(), cfg(0.2, 0.01)).unwrap();
    let with_a = bump_state(&grid, 0.3);
    let mut without_a = with_a.clone();
    without_a.a = SpectralField::zeros(&grid, 1, false);
    let x = advance(&m, &with_a, 0.01, 20);
    let y = advance(&m, &without_a, 0.01, 20);
    assert_eq!(x.rho_tilde, y.rho_tilde);
    assert_eq!(x.w, y.w);
    assert!(y.a.is_zero());
}

#[test]
fn laser_energy_is_monotone_and_balances() {
    let grid = Grid::new(1, 512, 20.0).unwrap();
    let m = model(&grid, cfg(0.5, 0.005));
    let out = run(&m, &bump_state(&grid, 0.2), &[1.0], &mut NullObserver).unwrap();
    assert_eq!(out.outcome, Outcome::Completed);
    let phi: Vec<f64> = out.series.rows.iter().map(|r| r.phi_l1).collect();
    assert!(phi.windows(2).all(|w| w[1] <= w[0]));
    assert!(out.max_laser_residual().unwrap() < 1e-4);
    assert!(out.max_energy_residual().unwrap() < 1e-3);
}

#[test]
fn backends_agree() {
    let grid = Grid::new(1, 64, 10.0).unwrap();
    let s0 = bump_state(&grid, 0.3);
    let mut outs = Vec::new();
    for b in es_core::exec::Backend::available() {
        let m = model(&grid, cfg(0.1, 0.01)).with_backend(b);
        outs.push(advance(&m, &s0, 0.01, 10));
    }
    assert!(outs.windows(2).all(|w| w[0] == w[1]));
}
