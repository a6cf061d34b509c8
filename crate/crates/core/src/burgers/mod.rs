//! Background flow `v` solving `v_t + v . grad v = 0`, `v(0) = v0`, evaluated
//! pointwise through the characteristics `x = y + t v0(y)`.
//!
//! The gradient is written `Dv = I/(1+t) + F/(1+t)^2`; [`FlowPoint::f`] is
//! computed in the cancellation-free form `F = (1+t)(Dv0 - I)(I + t Dv0)^-1`.

mod decay;
mod gap;

pub use decay::{measure_background_decay, sup_f_bound, DecayGrid, DecayTable};
pub use gap::{h0_distance, verify_h0, GapReport};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::exec::{try_map_indexed, Backend};
use crate::spectral::mollifier;
use crate::spectral::Grid;
use crate::{Error, Result};

/// One term of the perturbation `p` in `v0(x) = Lambda x + p(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// `amplitude * sin(wave . x + phase)`.
    Trig {
        amplitude: [f64; 3],
        wave: [f64; 3],
        phase: f64,
    },
    /// `amplitude * h(|x - center| / radius)` with `h` the cutoff profile, so
    /// the support is the ball of radius `4/3 radius`.
    Bump {
        amplitude: [f64; 3],
        center: [f64; 3],
        radius: f64,
    },
}

/// Initial background velocity `v0(x) = Lambda x + p(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialVelocity {
    pub dim: usize,
    /// Row-major `Lambda`; entries outside the leading `dim x dim` block are 0.
    pub linear: [[f64; 3]; 3],
    pub terms: Vec<Perturbation>,
    /// Required spectral gap: `dist(Sp(Dv0(x)), (-inf, 0]) >= epsilon`.
    pub epsilon: f64,
}

/// `v0`, `Dv0` and the second derivatives at a point.
///
/// `hessian[n]` holds `d_n Dv0`, i.e. `hessian[n][(i, m)] = d_n d_m v0_i`.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub value: Vector3<f64>,
    pub jacobian: Matrix3<f64>,
    pub hessian: [Matrix3<f64>; 3],
}

impl InitialVelocity {
    pub fn scaled_identity(dim: usize, lambda: f64) -> Self {
        let mut linear = [[0.0; 3]; 3];
        for (i, row) in linear.iter_mut().enumerate().take(dim) {
            row[i] = lambda;
        }
        Self {
            dim,
            linear,
            terms: Vec::new(),
            epsilon: 0.0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn with_linear(dim: usize, linear: [[f64; 3]; 3]) -> Self {
        Self {
            linear,
            ..Self::identity(dim)
        }
    }

    pub fn with_term(mut self, term: Perturbation) -> Self {
        self.terms.push(term);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// `lambda x + sum_j amp_j sin(k_j x)` in one dimension.
    pub fn sine_1d(lambda: f64, amplitudes: &[f64], modes: &[f64]) -> Self {
        let mut v = Self::scaled_identity(1, lambda);
        for (&a, &k) in amplitudes.iter().zip(modes) {
            v.terms.push(Perturbation::Trig {
                amplitude: [a, 0.0, 0.0],
                wave: [k, 0.0, 0.0],
                phase: 0.0,
            });
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidParameter(format!(
                "v0 dimension must be 1, 2 or 3, got {}",
                self.dim
            )));
        }
        let d = self.dim;
        let outside = |v: &[f64; 3]| v[d..].iter().any(|&x| x != 0.0);
        let lin_bad = self
            .linear
            .iter()
            .enumerate()
            .any(|(i, row)| (i >= d && row.iter().any(|&x| x != 0.0)) || outside(row));
        let term_bad = self.terms.iter().any(|t| match t {
            Perturbation::Trig {
                amplitude, wave, ..
            } => outside(amplitude) || outside(wave),
            Perturbation::Bump {
                amplitude,
                center,
                radius,
            } => outside(amplitude) || outside(center) || !(*radius > 0.0),
        });
        if lin_bad || term_bad {
            return Err(Error::InvalidParameter(format!(
                "v0 has entries outside the first {d} coordinates or a nonpositive bump radius"
            )));
        }
        let finite = self.linear.iter().flatten().all(|x| x.is_finite()) && self.epsilon >= 0.0;
        if !finite {
            return Err(Error::InvalidParameter("v0 coefficients must be finite".into()));
        }
        Ok(())
    }

    pub fn linear_matrix(&self) -> Matrix3<f64> {
        let l = &self.linear;
        Matrix3::new(
            l[0][0], l[0][1], l[0][2], l[1][0], l[1][1], l[1][2], l[2][0], l[2][1], l[2][2],
        )
    }

    /// Scalar rate if `Lambda = lambda I`.
    pub fn isotropic_rate(&self) -> Option<f64> {
        let m = self.linear_matrix();
        let lam = m[(0, 0)];
        let iso = (0..self.dim).all(|i| {
            (0..self.dim).all(|j| m[(i, j)] == if i == j { lam } else { 0.0 })
        });
        iso.then_some(lam)
    }

    pub fn jet(&self, x: &Vector3<f64>) -> Jet {
        let lin = self.linear_matrix();
        let mut value = lin * x;
        let mut jacobian = lin;
        let mut hessian = [Matrix3::zeros(); 3];
        for term in &self.terms {
            match term {
                Perturbation::Trig {
                    amplitude,
                    wave,
                    phase,
                } => {
                    let a = Vector3::from(*amplitude);
                    let k = Vector3::from(*wave);
                    let arg = k.dot(x) + phase;
                    let (s, c) = arg.sin_cos();
                    value += a * s;
                    jacobian += a * k.transpose() * c;
                    for (n, h) in hessian.iter_mut().enumerate() {
                        *h -= a * k.transpose() * (k[n] * s);
                    }
                }
                Perturbation::Bump {
                    amplitude,
                    center,
                    radius,
                } => {
                    let a = Vector3::from(*amplitude);
                    let rel = x - Vector3::from(*center);
                    let r = rel.norm();
                    let [h, dh, d2h] = mollifier::profile(r / radius);
                    value += a * h;
                    if r == 0.0 || (dh == 0.0 && d2h == 0.0) {
                        continue;
                    }
                    let u = rel / r;
                    let grad = u * (dh / radius);
                    jacobian += a * grad.transpose();
                    // d_j d_k h(r/R) = h''/R^2 u_j u_k + h'/(R r)(delta_jk - u_j u_k)
                    let hess_h = u * u.transpose() * (d2h / (radius * radius))
                        + (Matrix3::identity() - u * u.transpose()) * (dh / (radius * r));
                    for (n, h) in hessian.iter_mut().enumerate() {
                        *h += a * hess_h.row(n);
                    }
                }
            }
        }
        Jet {
            value,
            jacobian,
            hessian,
        }
    }
}

/// Everything the flow provides at one `(x, t)`.
#[derive(Clone, Copy, Debug)]
pub struct FlowPoint {
    /// Foot of the characteristic through `x`.
    pub y: Vector3<f64>,
    pub v: Vector3<f64>,
    pub dv: Matrix3<f64>,
    pub f: Matrix3<f64>,
    /// `(I + t Dv0(y))^-1`.
    pub b: Matrix3<f64>,
    pub iterations: usize,
}

/// Velocity, gradient, mollified versions, collected over a grid.
#[derive(Clone, Debug)]
pub struct FlowSamples {
    pub v: Vec<[f64; 3]>,
    /// `dv[p][j][k] = d_k v_j` at grid point `p`.
    pub dv: Vec<[[f64; 3]; 3]>,
}

impl FlowSamples {
    pub fn divergence(&self, p: usize, dim: usize) -> f64 {
        (0..dim).map(|j| self.dv[p][j][j]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(|v| v.iter().all(|&x| x == 0.0))
            && self.dv.iter().all(|m| m.iter().flatten().all(|&x| x == 0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BurgersFlow {
    pub v0: InitialVelocity,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl BurgersFlow {
    pub fn new(v0: InitialVelocity) -> Result<Self> {
        v0.validate()?;
        Ok(Self {
            v0,
            newton_tol: 1e-12,
            newton_max_iter: 50,
        })
    }

    /// A flow with `v0 = 0`.
    pub fn at_rest(dim: usize) -> Self {
        Self::new(InitialVelocity::scaled_identity(dim, 0.0)).expect("valid rest state")
    }

    pub fn dim(&self) -> usize {
        self.v0.dim
    }

    fn to_vec(&self, x: &[f64]) -> Vector3<f64> {
        let mut v = Vector3::zeros();
        for (i, xi) in x.iter().take(self.dim()).enumerate() {
            v[i] = *xi;
        }
        v
    }

    /// Find `y` with `y + t v0(y) = x` by Newton from `(I + t Lambda)^-1 x`.
    pub fn invert_characteristics(&self, x: &[f64], t: f64) -> Result<(Vector3<f64>, usize)> {
        let xv = self.to_vec(x);
        if t == 0.0 {
            return Ok((xv, 0));
        }
        let start = Matrix3::identity() + self.v0.linear_matrix() * t;
        let mut y = start.try_inverse().map_or(xv, |m| m * xv);
        let mut residual = f64::INFINITY;
        for it in 0..=self.newton_max_iter {
            let jet = self.v0.jet(&y);
            let g = y + jet.value * t - xv;
            residual = g.norm();
            if residual < self.newton_tol {
                return Ok((y, it));
            }
            if it == self.newton_max_iter {
                break;
            }
            let j = Matrix3::identity() + jet.jacobian * t;
            if j.determinant().abs() < 1e-14 {
                return Err(Error::SingularJacobian { t });
            }
            let step = j.lu().solve(&g).ok_or(Error::SingularJacobian { t })?;
            y -= step;
        }
        Err(Error::NewtonDiverged {
            t,
            residual,
            iterations: self.newton_max_iter,
        })
    }

    pub fn evaluate(&self, x: &[f64], t: f64) -> Result<FlowPoint> {
        let (y, iterations) = self.invert_characteristics(x, t)?;
        let jet = self.v0.jet(&y);
        let b = (Matrix3::identity() + jet.jacobian * t)
            .try_inverse()
            .ok_or(Error::SingularJacobian { t })?;
        let dv = jet.jacobian * b;
        let mut f = (jet.jacobian - Matrix3::identity()) * b * (1.0 + t);
        mask(&mut f, self.dim());
        Ok(FlowPoint {
            y,
            v: jet.value,
            dv,
            f,
            b,
            iterations,
        })
    }

    pub fn velocity(&self, x: &[f64], t: f64) -> Result<Vector3<f64>> {
        Ok(self.evaluate(x, t)?.v)
    }

    pub fn gradient(&self, x: &[f64], t: f64) -> Result<Matrix3<f64>> {
        Ok(self.evaluate(x, t)?.dv)
    }

    pub fn extract_f(&self, x: &[f64], t: f64) -> Result<Matrix3<f64>> {
        Ok(self.evaluate(x, t)?.f)
    }

    /// `D^2 v`, indexed `[i][k][l] = d_k d_l v_i`.
    pub fn second_derivative(&self, x: &[f64], t: f64) -> Result<[[[f64; 3]; 3]; 3]> {
        let p = self.evaluate(x, t)?;
        let jet = self.v0.jet(&p.y);
        // d_l (Dv)_{ik} = sum_n B_{nl} [B H_n B]_{ik}
        let inner: Vec<Matrix3<f64>> = jet.hessian.iter().map(|h| p.b * h * p.b).collect();
        let mut out = [[[0.0; 3]; 3]; 3];
        let d = self.dim();
        for (i, oi) in out.iter_mut().enumerate().take(d) {
            for (k, oik) in oi.iter_mut().enumerate().take(d) {
                for (l, o) in oik.iter_mut().enumerate().take(d) {
                    *o = (0..d).map(|n| p.b[(n, l)] * inner[n][(i, k)]).sum();
                }
            }
        }
        Ok(out)
    }

    /// `v^n = chi(x/n) v` and its gradient at every grid point. With
    /// `cutoff = None` the unmollified flow is returned.
    pub fn sample(
        &self,
        grid: &Grid,
        t: f64,
        cutoff: Option<f64>,
        backend: Backend,
    ) -> Result<FlowSamples> {
        let d = self.dim();
        if grid.dim() != d {
            return Err(Error::GridMismatch(format!(
                "flow is {d}-dimensional, grid is {}-dimensional",
                grid.dim()
            )));
        }
        let pts: Vec<([f64; 3], [[f64; 3]; 3])> = try_map_indexed(backend, grid.len(), |i| {
            let x = grid.point(i);
            let p = self.evaluate(&x[..d], t)?;
            let (chi, dchi) = match cutoff {
                Some(n) => mollifier::chi_with_gradient(&x[..d], n),
                None => (1.0, [0.0; 3]),
            };
            let mut v = [0.0; 3];
            let mut dv = [[0.0; 3]; 3];
            for j in 0..d {
                v[j] = chi * p.v[j];
                for k in 0..d {
                    dv[j][k] = chi * p.dv[(j, k)] + p.v[j] * dchi[k];
                }
            }
            Ok::<_, Error>((v, dv))
        })?;
        let (v, dv) = pts.into_iter().unzip();
        Ok(FlowSamples { v, dv })
    }
}

fn mask(m: &mut Matrix3<f64>, d: usize) {
    for i in 0..3 {
        for j in 0..3 {
            if i >= d || j >= d {
                m[(i, j)] = 0.0;
            }
        }
    }
}
