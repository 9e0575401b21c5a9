//! Numerical kernels: Gauss rules, the half-line map, dense matrix
//! exponential, log-factorials and the two closed-form integrals the
//! thermal checks rely on.

mod expm;
mod quadrature;
mod special;

pub use expm::{matrix_exp, max_abs_diff, ComplexMatrix};
pub use quadrature::{
    gauss_hermite, gauss_legendre, half_line_rule, integrate_halfline, Mapping, QuadratureRule,
};
pub use special::{
    beta_moment, binomial, ln_gamma, log_binomial, log_factorial, ratio_integral,
};

/// Neumaier (improved Kahan) compensated summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
    }
}
