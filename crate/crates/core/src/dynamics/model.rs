use std::sync::Arc;

use num_complex::Complex64;

use super::{intensity_samples, SchemeConfig};
use crate::burgers::{BurgersFlow, FlowSamples};
use crate::exec::Backend;
use crate::makino::{nonlinear_density_power, State};
use crate::params::{derive_constants, DerivedConstants, PhysicalParams};
use crate::spectral::ops::friedrichs_project_in_place;
use crate::spectral::{partial, Grid, SpectralField};
use crate::{Error, Result};

/// Time derivative of the state, split for the integrating factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendency {
    pub d_rho_tilde: SpectralField,
    pub d_w: SpectralField,
    /// Everything in `d_t A` except the linear multiplier.
    pub d_a_nonlinear: SpectralField,
    /// `(ic/2)(-|xi|^2/k0 + zeta) A`.
    pub d_a_linear: SpectralField,
}

/// Background-flow samples keyed by time, so the stage times shared between
/// consecutive RK stages and steps are evaluated once.
#[derive(Debug, Default)]
pub struct FlowCache {
    entries: Vec<(u64, Arc<FlowSamples>)>,
}

const CACHE_SLOTS: usize = 4;

impl FlowCache {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Grid samples of the state and the derivatives the right-hand side needs.
pub(crate) struct Physical {
    pub rho: Vec<f64>,
    /// `grad_rho[k][p] = d_k rho~`.
    pub grad_rho: Vec<Vec<f64>>,
    /// `w[j][p]`.
    pub w: Vec<Vec<f64>>,
    /// `grad_w[k][j][p] = d_k w_j`.
    pub grad_w: Vec<Vec<Vec<f64>>>,
    pub a: Vec<Vec<Complex64>>,
}

impl Physical {
    pub fn div_w(&self, p: usize) -> f64 {
        (0..self.w.len()).map(|j| self.grad_w[j][j][p]).sum()
    }

    pub fn new(state: &State) -> Result<Self> {
        let d = state.grid().dim();
        let rho = state.rho_tilde.to_real_samples().remove(0);
        let grad_rho = (0..d)
            .map(|k| Ok(partial(&state.rho_tilde, k)?.to_real_samples().remove(0)))
            .collect::<Result<Vec<_>>>()?;
        let w = state.w.to_real_samples();
        let grad_w = (0..d)
            .map(|k| Ok(partial(&state.w, k)?.to_real_samples()))
            .collect::<Result<Vec<_>>>()?;
        let a = state.a.to_complex_samples();
        Ok(Self {
            rho,
            grad_rho,
            w,
            grad_w,
            a,
        })
    }
}

/// Resolved scheme: parameters, background flow, grid and the per-mode
/// linear symbol of the laser equation.
#[derive(Clone, Debug)]
pub struct Model {
    pub params: PhysicalParams,
    pub consts: DerivedConstants,
    pub flow: BurgersFlow,
    pub grid: Grid,
    pub cfg: SchemeConfig,
    pub backend: Backend,
    cutoff: f64,
    symbol: Vec<Complex64>,
    zeta_eff: Complex64,
}

impl Model {
    /// `s` is the regularity index used for the derived constants.
    pub fn new(
        params: PhysicalParams,
        s: f64,
        flow: BurgersFlow,
        grid: Grid,
        cfg: SchemeConfig,
    ) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        if flow.dim() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "flow dimension {} differs from grid dimension {}",
                flow.dim(),
                grid.dim()
            )));
        }
        let consts = derive_constants(&params, grid.dim(), s)?;
        let cutoff = cfg.dealias.radius(&grid)?;
        let half_c = Complex64::new(0.0, 0.5 * params.c);
        let symbol = (0..grid.len())
            .map(|m| half_c * (consts.zeta - grid.xi_sq(m) / params.k0))
            .collect();
        let zeta_eff = if cfg.density_feedback {
            consts.zeta_prime
        } else {
            Complex64::new(0.0, 0.0)
        };
        Ok(Self {
            params,
            consts,
            flow,
            grid,
            cfg,
            backend: Backend::default(),
            cutoff,
            symbol,
            zeta_eff,
        })
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// `zeta'`, or zero when the density feedback is switched off.
    pub fn effective_zeta_prime(&self) -> Complex64 {
        self.zeta_eff
    }

    /// `L(xi) = (ic/2)(-|xi|^2/k0 + zeta)` at flat index `m`.
    pub fn linear_symbol(&self, m: usize) -> Complex64 {
        self.symbol[m]
    }

    /// Coefficient-wise multiplier `exp(theta L(xi))`.
    pub fn propagator(&self, theta: f64) -> Vec<Complex64> {
        self.symbol.iter().map(|l| (l * theta).exp()).collect()
    }

    pub fn sample_flow(&self, t: f64) -> Result<FlowSamples> {
        let chi = self.cfg.mollify_background.then_some(self.cutoff);
        self.flow.sample(&self.grid, t, chi, self.backend)
    }

    pub fn flow_at(&self, t: f64, cache: &mut FlowCache) -> Result<Arc<FlowSamples>> {
        let key = t.to_bits();
        if let Some((_, f)) = cache.entries.iter().find(|(k, _)| *k == key) {
            return Ok(f.clone());
        }
        let f = Arc::new(self.sample_flow(t)?);
        if cache.entries.len() == CACHE_SLOTS {
            cache.entries.remove(0);
        }
        cache.entries.push((key, f.clone()));
        Ok(f)
    }

    /// Full right-hand side at `state.t`.
    pub fn rhs(&self, state: &State) -> Result<Tendency> {
        let flow = self.sample_flow(state.t)?;
        let (d_rho_tilde, d_w, d_a_nonlinear) = self.nonlinear(state, &flow)?;
        let d_a_linear = if self.cfg.evolve_laser {
            state.a.map_symbol(|m| self.symbol[m])
        } else {
            SpectralField::zeros(&self.grid, self.grid.dim(), false)
        };
        Ok(Tendency {
            d_rho_tilde,
            d_w,
            d_a_nonlinear,
            d_a_linear,
        })
    }

    pub(crate) fn nonlinear(
        &self,
        state: &State,
        flow: &FlowSamples,
    ) -> Result<(SpectralField, SpectralField, SpectralField)> {
        let g = &self.grid;
        let d = g.dim();
        let len = g.len();
        let ph = Physical::new(state)?;
        let half_g = 0.5 * (self.params.gamma - 1.0);

        let mut f_rho = vec![0.0; len];
        let mut f_w = vec![vec![0.0; len]; d];
        for p in 0..len {
            let v = &flow.v[p];
            let dv = &flow.dv[p];
            let div_v = flow.divergence(p, d);
            let div_w = ph.div_w(p);
            let rho = ph.rho[p];
            let mut adv = 0.0;
            for k in 0..d {
                adv += (v[k] + ph.w[k][p]) * ph.grad_rho[k][p];
            }
            f_rho[p] = adv + half_g * rho * (div_v + div_w);
            for j in 0..d {
                let mut s = half_g * rho * ph.grad_rho[j][p];
                for k in 0..d {
                    s += (v[k] + ph.w[k][p]) * ph.grad_w[k][j][p];
                    s += ph.w[k][p] * dv[j][k];
                }
                f_w[j][p] = s;
            }
        }
        let mut d_rho = SpectralField::from_real_samples(g, &[f_rho])?;
        friedrichs_project_in_place(&mut d_rho, self.cutoff);
        d_rho.scale(-1.0);
        let mut d_w = SpectralField::from_real_samples(g, &f_w)?;
        friedrichs_project_in_place(&mut d_w, self.cutoff);
        d_w.scale(-1.0);

        let mut d_a = SpectralField::zeros(g, d, false);
        let laser_on = self.cfg.evolve_laser;
        let any_a = state.a.all_coeffs().iter().flatten().any(|z| *z != Complex64::new(0.0, 0.0));
        if any_a {
            if self.params.gamma_p != 0.0 {
                let phi = intensity_samples(&ph.a);
                let mut phi_hat = SpectralField::from_real_samples(g, &[phi])?;
                friedrichs_project_in_place(&mut phi_hat, self.cutoff);
                for j in 0..d {
                    let dphi = partial(&phi_hat, j)?;
                    let target = d_w.coeffs_mut(j);
                    for (t, s) in target.iter_mut().zip(dphi.coeffs(0)) {
                        *t -= self.params.gamma_p * s;
                    }
                }
            }
            if laser_on && self.zeta_eff != Complex64::new(0.0, 0.0) {
                let pow = nonlinear_density_power(&ph.rho, &self.params).values;
                let coef = -Complex64::new(0.0, 0.5 * self.params.c) * self.zeta_eff;
                let prod: Vec<Vec<Complex64>> = ph
                    .a
                    .iter()
                    .map(|aj| aj.iter().zip(&pow).map(|(z, r)| coef * *r * z).collect())
                    .collect();
                d_a = SpectralField::from_complex_samples(g, &prod)?;
                friedrichs_project_in_place(&mut d_a, self.cutoff);
            }
        }
        Ok((d_rho, d_w, d_a))
    }

    /// `min(dt_max, cfl dx / max(|v^n| + |w| + (gamma-1)/2 |rho~|))`.
    pub fn cfl_dt(&self, state: &State, flow: &FlowSamples) -> f64 {
        let d = self.grid.dim();
        let rho = state.rho_tilde.to_real_samples().remove(0);
        let w = state.w.to_real_samples();
        let half_g = 0.5 * (self.params.gamma - 1.0);
        let mut speed: f64 = 0.0;
        for p in 0..self.grid.len() {
            let vn = flow.v[p][..d].iter().map(|x| x * x).sum::<f64>().sqrt();
            let wn = w.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt();
            speed = speed.max(vn + wn + half_g * rho[p].abs());
        }
        if speed == 0.0 {
            self.cfg.dt_max
        } else {
            self.cfg.dt_max.min(self.cfg.cfl * self.grid.spacing() / speed)
        }
    }

    /// One Lawson / RK4 step of size `dt` from `state.t`.
    pub fn step(&self, state: &State, dt: f64, cache: &mut FlowCache) -> Result<State> {
        let t = state.t;
        let h = dt;
        let f0 = self.flow_at(t, cache)?;
        let fm = self.flow_at(t + 0.5 * h, cache)?;
        let f1 = self.flow_at(t + h, cache)?;
        let laser = self.cfg.evolve_laser;
        let (e_half, e_full) = if laser {
            (self.propagator(0.5 * h), self.propagator(h))
        } else {
            (vec![Complex64::new(1.0, 0.0); self.grid.len()], vec![Complex64::new(1.0, 0.0); self.grid.len()])
        };
        let prop = |f: &SpectralField, e: &[Complex64]| f.map_symbol(|m| e[m]);
        let comb = |base: &SpectralField, terms: &[(f64, &SpectralField)]| {
            let mut out = base.clone();
            for (c, k) in terms {
                out.axpy(*c, k);
            }
            out
        };

        let (k1r, k1w, k1a) = self.nonlinear(state, &f0)?;
        let s2 = State {
            rho_tilde: comb(&state.rho_tilde, &[(0.5 * h, &k1r)]),
            w: comb(&state.w, &[(0.5 * h, &k1w)]),
            a: prop(&comb(&state.a, &[(0.5 * h, &k1a)]), &e_half),
            t: t + 0.5 * h,
        };
        let (k2r, k2w, k2a) = self.nonlinear(&s2, &fm)?;
        let a_half = prop(&state.a, &e_half);
        let s3 = State {
            rho_tilde: comb(&state.rho_tilde, &[(0.5 * h, &k2r)]),
            w: comb(&state.w, &[(0.5 * h, &k2w)]),
            a: comb(&a_half, &[(0.5 * h, &k2a)]),
            t: t + 0.5 * h,
        };
        let (k3r, k3w, k3a) = self.nonlinear(&s3, &fm)?;
        let a_full = prop(&state.a, &e_full);
        let s4 = State {
            rho_tilde: comb(&state.rho_tilde, &[(h, &k3r)]),
            w: comb(&state.w, &[(h, &k3w)]),
            a: comb(&a_full, &[(h, &prop(&k3a, &e_half))]),
            t: t + h,
        };
        let (k4r, k4w, k4a) = self.nonlinear(&s4, &f1)?;

        let sixth = h / 6.0;
        let rho_tilde = comb(
            &state.rho_tilde,
            &[(sixth, &k1r), (2.0 * sixth, &k2r), (2.0 * sixth, &k3r), (sixth, &k4r)],
        );
        let w = comb(
            &state.w,
            &[(sixth, &k1w), (2.0 * sixth, &k2w), (2.0 * sixth, &k3w), (sixth, &k4w)],
        );
        let a = if laser {
            let mid = prop(&k2a.add(&k3a), &e_half);
            comb(
                &a_full,
                &[(sixth, &prop(&k1a, &e_full)), (2.0 * sixth, &mid), (sixth, &k4a)],
            )
        } else {
            state.a.clone()
        };
        let mut next = State {
            rho_tilde,
            w,
            a,
            t: t + h,
        };
        next.project(self.cutoff);
        if !next.all_finite() {
            return Err(Error::NonFinite {
                what: "state after step",
                t: t + h,
            });
        }
        Ok(next)
    }
}
