use serde::{Deserialize, Serialize};

use super::intensity_samples;
use super::model::{Model, Physical};
use crate::burgers::FlowSamples;
use crate::makino::{nonlinear_density_power, State};
use crate::spectral::ops::friedrichs_project_in_place;
use crate::spectral::{pairwise_sum, partial, SpectralField};
use crate::Result;

/// Integrals entering the two balance laws at one time.
///
/// Fluid: `dE/dt + sum(fluid_terms) = 0` with `E = (1/2)||(rho~, w)||^2`.
/// Laser: `(1/c) dPhi/dt + laser_damping + laser_density = 0` with
/// `Phi = ||phi||_{L1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySnapshot {
    pub t: f64,
    pub fluid: f64,
    /// In order: `-(1/2) int (rho~^2 + |w|^2) div v^n`,
    /// `-(1/2) int (rho~^2 + |w|^2) div w`, `(g-1)/2 int rho~^2 div v^n`,
    /// `int (w . grad v^n) . w`, `(g-1)/4 int rho~^2 div w`,
    /// `g_p int grad J_n phi . w`.
    pub fluid_terms: [f64; 6],
    pub phi_l1: f64,
    /// `eta0 Phi`.
    pub laser_damping: f64,
    /// `(nu0~/rho_c) int |rho~|^(2/(g-1)) phi`.
    pub laser_density: f64,
}

/// Normalized balance defects at an interior snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualPair {
    pub t: f64,
    /// Fluid defect over the sum of the absolute values of its terms.
    pub energy: f64,
    /// Laser defect over `eta0 Phi`. `None` when `A` is frozen.
    pub laser: Option<f64>,
}

pub fn energy_snapshot(model: &Model, state: &State, flow: &FlowSamples) -> Result<EnergySnapshot> {
    let g = state.grid();
    let d = g.dim();
    let vol = g.cell_volume();
    let ph = Physical::new(state)?;
    let half_g = 0.5 * (model.params.gamma - 1.0);
    let phi = intensity_samples(&ph.a);

    let grad_phi: Vec<Vec<f64>> = if model.params.gamma_p != 0.0 {
        let mut phi_hat = SpectralField::from_real_samples(g, std::slice::from_ref(&phi))?;
        friedrichs_project_in_place(&mut phi_hat, model.cutoff());
        (0..d)
            .map(|j| Ok(partial(&phi_hat, j)?.to_real_samples().remove(0)))
            .collect::<Result<_>>()?
    } else {
        vec![vec![0.0; g.len()]; d]
    };

    let mut e = Vec::with_capacity(g.len());
    let mut terms = std::array::from_fn::<Vec<f64>, 6, _>(|_| Vec::with_capacity(g.len()));
    for p in 0..g.len() {
        let rho2 = ph.rho[p] * ph.rho[p];
        let w2: f64 = (0..d).map(|j| ph.w[j][p] * ph.w[j][p]).sum();
        let div_v = flow.divergence(p, d);
        let div_w = ph.div_w(p);
        let mut stretch = 0.0;
        let mut force = 0.0;
        for j in 0..d {
            for k in 0..d {
                stretch += ph.w[k][p] * flow.dv[p][j][k] * ph.w[j][p];
            }
            force += grad_phi[j][p] * ph.w[j][p];
        }
        e.push(0.5 * (rho2 + w2));
        terms[0].push(-0.5 * (rho2 + w2) * div_v);
        terms[1].push(-0.5 * (rho2 + w2) * div_w);
        terms[2].push(half_g * rho2 * div_v);
        terms[3].push(stretch);
        terms[4].push(0.5 * half_g * rho2 * div_w);
        terms[5].push(model.params.gamma_p * force);
    }
    let mut fluid_terms = [0.0; 6];
    for (out, t) in fluid_terms.iter_mut().zip(&terms) {
        *out = vol * pairwise_sum(t);
    }

    let phi_l1 = vol * pairwise_sum(&phi);
    let feedback = -model.effective_zeta_prime().im;
    let laser_density = if feedback != 0.0 {
        let pow = nonlinear_density_power(&ph.rho, &model.params).values;
        let weighted: Vec<f64> = pow.iter().zip(&phi).map(|(r, f)| r * f).collect();
        feedback * vol * pairwise_sum(&weighted)
    } else {
        0.0
    };
    Ok(EnergySnapshot {
        t: state.t,
        fluid: vol * pairwise_sum(&e),
        fluid_terms,
        phi_l1,
        laser_damping: model.consts.zeta.im * phi_l1,
        laser_density,
    })
}

/// Derivative at `t[2]` of the quartic through five unevenly spaced samples,
/// as `sum_j L_j'(t[2]) (f[j] - f[2])` with `L_j` the Lagrange basis. Fourth
/// order, and exact for constants.
fn centered_derivative(t: [f64; 5], f: [f64; 5]) -> f64 {
    let x = t[2];
    let mut out = 0.0;
    for j in [0, 1, 3, 4] {
        let den: f64 = (0..5).filter(|&l| l != j).map(|l| t[j] - t[l]).product();
        let num: f64 = (0..5)
            .filter(|&m| m != j)
            .map(|m| (0..5).filter(|&l| l != j && l != m).map(|l| x - t[l]).product::<f64>())
            .sum();
        out += (f[j] - f[2]) * num / den;
    }
    out
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Residuals at every snapshot with two neighbours on each side; entries
/// near the ends, and around repeated times, are `None`.
pub fn energy_residuals(snaps: &[EnergySnapshot], c: f64, laser_evolves: bool) -> Vec<Option<ResidualPair>> {
    let mut out = vec![None; snaps.len()];
    for i in 2..snaps.len().saturating_sub(2) {
        let w = &snaps[i - 2..=i + 2];
        let t: [f64; 5] = std::array::from_fn(|k| w[k].t);
        if !t.windows(2).all(|p| p[0] < p[1]) {
            continue;
        }
        let b = &w[2];
        let de = centered_derivative(t, std::array::from_fn(|k| w[k].fluid));
        let sum: f64 = b.fluid_terms.iter().sum();
        let scale = de.abs() + b.fluid_terms.iter().map(|x| x.abs()).sum::<f64>();
        let energy = ratio((de + sum).abs(), scale);
        let laser = laser_evolves.then(|| {
            let dphi = centered_derivative(t, std::array::from_fn(|k| w[k].phi_l1));
            ratio((dphi / c + b.laser_damping + b.laser_density).abs(), b.laser_damping)
        });
        out[i] = Some(ResidualPair { t: b.t, energy, laser });
    }
    out
}
