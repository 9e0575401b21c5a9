use std::sync::OnceLock;

use crate::error::{Error, Result};

const EXACT_LOG_FACTORIAL_LIMIT: usize = 2000;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(EXACT_LOG_FACTORIAL_LIMIT + 1);
        let mut acc = 0.0f64;
        t.push(0.0);
        for k in 1..=EXACT_LOG_FACTORIAL_LIMIT {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln n!`; cumulative log sums below 2000, log-gamma above.
pub fn log_factorial(n: usize) -> f64 {
    if n <= EXACT_LOG_FACTORIAL_LIMIT {
        log_factorial_table()[n]
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln (l choose n)`.
pub fn log_binomial(l: usize, n: usize) -> Result<f64> {
    if n > l {
        return Err(Error::IndexOutOfRange {
            op: "log_binomial",
            index: n,
            max: l,
        });
    }
    Ok(log_factorial(l) - log_factorial(n) - log_factorial(l - n))
}

/// `l choose n` as a float; exact for results below 2^53.
pub fn binomial(l: usize, n: usize) -> Result<f64> {
    if n > l {
        return Err(Error::IndexOutOfRange {
            op: "binomial",
            index: n,
            max: l,
        });
    }
    let k = n.min(l - n);
    if l <= 60 {
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (l - i) as u128 / (i + 1) as u128;
        }
        return Ok(acc as f64);
    }
    Ok(log_binomial(l, n)?.exp())
}

/// `int_0^inf x^(a-1) (x+z)^(-g) dx = z^(a-g) Gamma(a) Gamma(g-a) / Gamma(g)`.
pub fn beta_moment(a: f64, g: f64, z: f64) -> Result<f64> {
    if !(a > 0.0 && g > a && z > 0.0) || !(a.is_finite() && g.is_finite() && z.is_finite()) {
        return Err(Error::domain(
            "beta_moment",
            format!("need a > 0, g > a, z > 0 (a = {a}, g = {g}, z = {z})"),
        ));
    }
    let log = (a - g) * z.ln() + ln_gamma(a) + ln_gamma(g - a) - ln_gamma(g);
    Ok(log.exp())
}

/// `int_0^inf (a x + b)^(beta-1) / (c x + d)^(beta+1) dx
///   = ((ad)^beta - (bc)^beta) / (beta (ad - bc) (cd)^beta)`,
/// valid for `cd > 0`, `ad != bc`, `beta >= 1`.
pub fn ratio_integral(a: f64, b: f64, c: f64, d: f64, beta: f64) -> Result<f64> {
    let ad = a * d;
    let bc = b * c;
    let cd = c * d;
    if !(cd > 0.0) {
        return Err(Error::domain("ratio_integral", format!("need cd > 0, got {cd}")));
    }
    if !(beta >= 1.0) {
        return Err(Error::domain("ratio_integral", format!("need beta >= 1, got {beta}")));
    }
    if (ad - bc).abs() <= 1e-14 * ad.abs().max(bc.abs()) {
        return Err(Error::domain(
            "ratio_integral",
            format!("degenerate ad = bc = {ad}"),
        ));
    }
    let value = (ad.powf(beta) - bc.powf(beta)) / (beta * (ad - bc) * cd.powf(beta));
    if !value.is_finite() {
        return Err(Error::numeric("ratio_integral", format!("result {value}")));
    }
    Ok(value)
}
