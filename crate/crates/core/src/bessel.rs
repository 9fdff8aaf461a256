//! Modified Bessel function of the second kind, order one.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// `K₁(x)` for `x > 0`.
///
/// Uses the ascending series for `x <= 2` and Steed's continued fraction
/// (Temme's CF2 form) above. Returns `+∞` at zero and `NaN` for negative or
/// NaN input.
pub fn bessel_k1(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x <= 2.0 {
        k1_series(x)
    } else {
        k1_continued_fraction(x)
    }
}

fn k1_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    // term = (x²/4)^k / (k!(k+1)!), psi_sum = ψ(k+1) + ψ(k+2).
    let mut term = 1.0;
    let mut psi = -EULER_GAMMA;
    let mut i1_sum = 0.0;
    let mut k_sum = 0.0;
    for k in 0..MAX_ITER {
        let psi_next = psi + 1.0 / (k as f64 + 1.0);
        i1_sum += term;
        k_sum += (psi + psi_next) * term;
        psi = psi_next;
        term *= y / ((k as f64 + 1.0) * (k as f64 + 2.0));
        if term < EPS * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * k_sum
}

fn k1_continued_fraction(x: f64) -> f64 {
    // Order μ = 0 recurrence yields K₀, then K₁ from the ratio.
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let (mut q1, mut q2) = (0.0, 1.0);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    k0 * (x + 0.5 - h) / x
}
