//! Smooth radial cutoff: 1 on `|y| <= 3/4`, 0 on `|y| >= 4/3`, built from the
//! `exp(-1/t)` smoothstep.

pub const INNER_RADIUS: f64 = 0.75;
pub const OUTER_RADIUS: f64 = 4.0 / 3.0;

fn e(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn de(t: f64) -> f64 {
    if t > 0.0 {
        e(t) / (t * t)
    } else {
        0.0
    }
}

fn d2e(t: f64) -> f64 {
    if t > 0.0 {
        e(t) * (1.0 - 2.0 * t) / t.powi(4)
    } else {
        0.0
    }
}

/// Smoothstep `g(t) = e(t) / (e(t) + e(1 - t))` with `g'` and `g''`.
pub fn smoothstep(t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return [0.0; 3];
    }
    if t >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let (a, da, d2a) = (e(t), de(t), d2e(t));
    let (b, db, d2b) = (e(1.0 - t), -de(1.0 - t), d2e(1.0 - t));
    let s = a + b;
    let num = da * b - a * db;
    let dnum = d2a * b - a * d2b;
    [a / s, num / (s * s), (dnum * s - 2.0 * num * (da + db)) / (s * s * s)]
}

/// Radial profile `h(r)` with `h'` and `h''`.
pub fn profile(r: f64) -> [f64; 3] {
    let width = OUTER_RADIUS - INNER_RADIUS;
    let [g, dg, d2g] = smoothstep((OUTER_RADIUS - r) / width);
    [g, -dg / width, d2g / (width * width)]
}

/// `chi(x / n)` together with its spatial gradient.
pub fn chi_with_gradient(x: &[f64], n: f64) -> (f64, [f64; 3]) {
    let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let [h, dh, _] = profile(r / n);
    let mut grad = [0.0; 3];
    if dh != 0.0 && r > 0.0 {
        for (gi, xi) in grad.iter_mut().zip(x) {
            *gi = dh / n * xi / r;
        }
    }
    (h, grad)
}

pub fn chi(x: &[f64], n: f64) -> f64 {
    chi_with_gradient(x, n).0
}
