#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Tanh-sinh quadrature on `[a, b]`; tolerates integrable endpoint singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let len = b - a;
    let node = |tau: f64| {
        let u = FRAC_PI_2 * tau.sinh();
        let (lo, hi) = (logistic(2.0 * u), logistic(-2.0 * u));
        // x measured from the nearer endpoint to keep precision
        let x = if u <= 0.0 { a + len * lo } else { b - len * hi };
        let w = len * 2.0 * lo * hi * FRAC_PI_2 * tau.cosh();
        if w == 0.0 || x <= a || x >= b {
            0.0
        } else {
            w * f(x)
        }
    };
    de_refine(node, tol)
}

/// Exp-sinh quadrature on `[a, inf)` for integrands decaying at least exponentially.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    let node = |tau: f64| {
        let w = (FRAC_PI_2 * tau.sinh()).exp();
        let x = a + w;
        let weight = w * FRAC_PI_2 * tau.cosh();
        if weight == 0.0 || !x.is_finite() || x <= a {
            0.0
        } else {
            let v = weight * f(x);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        }
    };
    de_refine(node, tol)
}

fn de_refine<G: Fn(f64) -> f64>(node: G, tol: f64) -> f64 {
    const LIMIT: f64 = 4.5;
    let mut h = 0.5;
    let mut sum: f64 = {
        let mut s = node(0.0);
        let mut k = 1;
        while k as f64 * h <= LIMIT {
            s += node(k as f64 * h) + node(-(k as f64) * h);
            k += 1;
        }
        s
    };
    let mut prev = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        // add the odd nodes of the halved step
        let mut k = 1;
        while k as f64 * h <= LIMIT {
            sum += node(k as f64 * h) + node(-(k as f64) * h);
            k += 2;
        }
        let est = sum * h;
        if (est - prev).abs() < tol {
            return est;
        }
        prev = est;
    }
    prev
}

pub fn gamma_fn(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Canonical fOU autocovariance from the moving-average representation
/// `z(t) = int_{-inf}^t e^{-(t-s)} dB^H(s)`, valid for every `H`:
/// `r(t) = (A + B)/4 - t^(2H)/2` with
/// `A = int_0^inf e^-v (t+v)^(2H) dv` and `B = int_0^inf e^-u |t-u|^(2H) du`.
pub fn real_space_autocov(h: f64, t: f64) -> f64 {
    let p = 2.0 * h;
    let a = exp_sinh(|v| (-v).exp() * (t + v).powf(p), 0.0, 1e-14);
    let near = if t > 0.0 {
        tanh_sinh(|u| (-u).exp() * (t - u).powf(p), 0.0, t, 1e-14)
    } else {
        0.0
    };
    let b = near + (-t).exp() * gamma_fn(p + 1.0);
    (a + b) / 4.0 - 0.5 * t.powf(p)
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
