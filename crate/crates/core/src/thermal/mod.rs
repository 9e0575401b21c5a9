//! Canonical ensemble of a single Morse oscillator.
//!
//! Level `n` carries Boltzmann weight `exp(-A n + B n^2) / Z_l`. The
//! anharmonic factor `exp(B n^2)` is produced from the harmonic `exp(-A n)`
//! by the heat operator `exp[B (d/dA)^2]`, which has two carriers here:
//!
//! - [`ExpSum`], on which the operator acts exactly. Used for the
//!   partition function, its `A`-derivatives and the Husimi function.
//! - [`EulerTermSeries`], for the P-function, whose `B = 0` form is a
//!   rational function of `e^A` rather than a sum of exponentials. The
//!   operator is then applied as a truncated power series in `B`, or exactly
//!   as a Gaussian convolution in `A` (see [`pfunction`]).

mod euler;
mod expsum;
pub mod pfunction;
mod thermodynamics;

pub use euler::{EulerTerm, EulerTermSeries};
pub use expsum::{heat_apply, ExpSum, ExpTerm};
pub use pfunction::{
    p_function, p_function_heat_kernel, p_moment_check, p_moments_check, p_trace_check,
    thermal_average, PMomentCheck, PRoute, PSeriesValue, PTraceCheck, RatioIntegralCheck,
    ThermalAverage,
};
pub use thermodynamics::{thermodynamics, Thermodynamics};

use crate::coherent::{binomial_weights, MeasureDensity};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::{half_line_rule, neumaier_sum};
use crate::spectrum::ThermalParams;

const EXACT_ROUTE_TOL: f64 = 1e-12;
const HUSIMI_ROUTE_TOL: f64 = 1e-13;
const LOG_DERIVATIVE_TOL: f64 = 1e-11;

/// `Z_l = sum_{n=0}^{l} exp(-A n + B n^2)`, compensated.
pub fn partition(params: &ThermalParams) -> f64 {
    neumaier_sum((0..=params.l).map(|n| (-params.exponent(n)).exp()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThermalState {
    pub params: ThermalParams,
    pub partition: f64,
    /// `w_n = exp(-A n + B n^2) / Z_l`.
    pub weights: Vec<f64>,
    /// `Z_l` as a function of `A` at fixed `B`: `exp[B d^2] sum exp(-n A)`.
    pub partition_sum: ExpSum,
}

impl ThermalState {
    pub fn new(params: ThermalParams) -> Result<Self> {
        if !params.a.is_finite() {
            return Err(Error::domain("ThermalState", "A must be finite"));
        }
        let partition = partition(&params);
        let weights = (0..=params.l)
            .map(|n| (-params.exponent(n)).exp() / partition)
            .collect();
        let partition_sum = ExpSum::geometric(params.l).heat_apply(params.b);
        Ok(ThermalState {
            params,
            partition,
            weights,
            partition_sum,
        })
    }

    pub fn l(&self) -> usize {
        self.params.l
    }

    /// `(1/Z) d^k Z / dA^k` from the exponential-sum carrier.
    pub fn partition_derivative_ratio(&self, k: usize) -> f64 {
        self.partition_sum.nth_derivative(k).eval(self.params.a) / self.partition
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HusimiValue {
    pub direct: f64,
    pub operator_form: f64,
}

/// `<Z|rho|Z>` at `x = |Z|^2`, two ways:
/// the weighted binomial sum, and the heat operator applied to the binomial
/// expansion of `((1 + x e^-A) / (1 + x))^l`.
pub fn husimi(thermal: &ThermalState, x: f64) -> Result<HusimiValue> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("husimi", format!("x = {x} must be finite and >= 0")));
    }
    let l = thermal.l();
    let bw = binomial_weights(l, x);
    let direct = neumaier_sum(bw.iter().zip(&thermal.weights).map(|(b, w)| b * w));
    let bracket = ExpSum::from_terms(bw.iter().enumerate().map(|(n, &b)| (b, n as f64)));
    let operator_form =
        bracket.heat_apply(thermal.params.b).eval(thermal.params.a) / thermal.partition;
    Error::check_agree("husimi", direct, operator_form, HUSIMI_ROUTE_TOL)?;
    Ok(HusimiValue {
        direct,
        operator_form,
    })
}

/// `|int dmu <Z|rho|Z> - 1|` by radial quadrature.
pub fn husimi_trace_check(thermal: &ThermalState, quad_order: usize, exec: Execution) -> Result<f64> {
    let rule = half_line_rule(quad_order)?;
    let measure = MeasureDensity::new(thermal.l());
    let values = exec.map(&rule.nodes, |&x| husimi(thermal, x).map(|h| h.direct));
    let mut terms = Vec::with_capacity(values.len());
    for ((v, &x), &w) in values.into_iter().zip(&rule.nodes).zip(&rule.weights) {
        terms.push(w * measure.radial_weight(x) * v?);
    }
    Ok((neumaier_sum(terms) - 1.0).abs())
}

/// `<N^s>_l` by direct sum, checked against `(1/Z) (-d/dA)^s Z`.
pub fn thermal_moment(thermal: &ThermalState, s: u32) -> Result<f64> {
    let direct = neumaier_sum(
        thermal
            .weights
            .iter()
            .enumerate()
            .map(|(n, w)| w * (n as f64).powi(s as i32)),
    );
    let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
    let derivative = sign * thermal.partition_derivative_ratio(s as usize);
    Error::check_agree("thermal_moment", direct, derivative, EXACT_ROUTE_TOL)?;
    Ok(direct)
}

/// Thermal `g2` and Mandel `Q`, by moments and by derivatives of `ln Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalCorrelation {
    pub mean: f64,
    pub g2_moments: f64,
    pub g2_log_derivative: f64,
    pub q_moments: f64,
    pub q_log_derivative: f64,
}

impl ThermalCorrelation {
    pub fn g2_discrepancy(&self) -> f64 {
        (self.g2_moments - self.g2_log_derivative).abs()
    }

    pub fn q_discrepancy(&self) -> f64 {
        (self.q_moments - self.q_log_derivative).abs()
    }
}

/// Both routes without asserting agreement.
pub fn thermal_correlation(thermal: &ThermalState) -> Result<ThermalCorrelation> {
    let w = &thermal.weights;
    let mean = neumaier_sum(w.iter().enumerate().map(|(n, p)| n as f64 * p));
    if !(mean > 0.0) {
        return Err(Error::domain("thermal_correlation", "<N> = 0"));
    }
    let factorial2 = neumaier_sum(
        w.iter()
            .enumerate()
            .map(|(n, p)| n as f64 * (n as f64 - 1.0) * p),
    );
    let g2_moments = factorial2 / (mean * mean);
    let q_moments = (factorial2 - mean * mean) / mean;

    let d1 = thermal.partition_derivative_ratio(1);
    let d2 = thermal.partition_derivative_ratio(2);
    let ln1 = d1;
    let ln2 = d2 - d1 * d1;
    let g2_log_derivative = 1.0 + 1.0 / ln1 + ln2 / (ln1 * ln1);
    let q_log_derivative = -1.0 - ln2 / ln1;
    Ok(ThermalCorrelation {
        mean,
        g2_moments,
        g2_log_derivative,
        q_moments,
        q_log_derivative,
    })
}

/// `(<N^2> - <N>) / <N>^2`, both routes required to agree to 1e-11.
pub fn thermal_g2(thermal: &ThermalState) -> Result<f64> {
    let c = thermal_correlation(thermal)?;
    Error::check_agree("thermal_g2", c.g2_moments, c.g2_log_derivative, LOG_DERIVATIVE_TOL)?;
    Ok(c.g2_moments)
}

/// `<N> (g2 - 1)`, both routes required to agree to 1e-11.
pub fn thermal_mandel(thermal: &ThermalState) -> Result<f64> {
    let c = thermal_correlation(thermal)?;
    Error::check_agree("thermal_mandel", c.q_moments, c.q_log_derivative, LOG_DERIVATIVE_TOL)?;
    Ok(c.q_moments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::MeasureDensity;

    fn state(l: usize, a: f64) -> ThermalState {
        ThermalState::new(ThermalParams::new(l, a).unwrap()).unwrap()
    }

    #[test]
    fn partition_examples() {
        assert_eq!(partition(&ThermalParams::new(7, 0.0).unwrap()), 8.0);
        let z = partition(&ThermalParams::new(2, 1.0).unwrap());
        let want = 1.0 + (-5.0f64 / 6.0).exp() + (-4.0f64 / 3.0).exp();
        assert!((z - want).abs() < 1e-15);
        assert!((z - 1.6982).abs() < 1e-4);
        assert!((partition(&ThermalParams::new(4, 800.0).unwrap()) - 1.0).abs() < 1e-300);
    }

    #[test]
    fn weights_are_a_distribution() {
        for l in [1, 3, 18, 173] {
            for a in [0.0, 0.3, 2.0, 40.0] {
                let t = state(l, a);
                assert!((neumaier_sum(t.weights.iter().copied()) - 1.0).abs() < 1e-14);
                for (n, &w) in t.weights.iter().enumerate() {
                    // positive unless the Boltzmann factor underflows
                    assert!(w > 0.0 || t.params.exponent(n) > 700.0);
                }
                if a > 0.0 {
                    assert!(t.weights.windows(2).all(|p| p[0] >= p[1]));
                }
            }
        }
    }

    #[test]
    fn heat_built_partition_matches_direct_sum() {
        for l in [1, 5, 30] {
            for a in [0.0, 0.7, 3.0] {
                let t = state(l, a);
                let via_heat = t.partition_sum.eval(a);
                assert!((via_heat / t.partition - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn husimi_examples() {
        let t = state(4, 1.2);
        let h = husimi(&t, 0.0).unwrap();
        assert!((h.direct - 1.0 / t.partition).abs() < 1e-15);
        for a in [0.2, 1.0, 3.0] {
            let h = husimi(&state(1, a), 1.0).unwrap();
            assert!((h.direct - 0.5).abs() < 1e-15);
        }
        // B = 0 is not reachable through ThermalParams; build it by hand
        let params = ThermalParams { a: 1.0, b: 0.0, l: 3 };
        let t = ThermalState::new(params).unwrap();
        let want = ((1.0 + 2.0 * (-1.0f64).exp()) / 3.0).powi(3) / t.partition;
        let h = husimi(&t, 2.0).unwrap();
        assert!((h.direct - want).abs() < 1e-15 && (h.operator_form - want).abs() < 1e-15);
        assert!(husimi(&t, -1.0).is_err());
    }

    #[test]
    fn husimi_positive_and_bounded() {
        for l in [1, 6, 12] {
            let t = state(l, 0.8);
            for x in [0.0, 1e-3, 0.5, 7.0, 1e5] {
                let q = husimi(&t, x).unwrap().direct;
                assert!(q > 0.0 && q <= 1.0);
            }
        }
    }

    #[test]
    fn husimi_trace() {
        let params = ThermalParams { a: 0.9, b: 0.0, l: 1 };
        let t = ThermalState::new(params).unwrap();
        assert!(husimi_trace_check(&t, 100, Execution::Sequential).unwrap() < 1e-10);
        assert!(husimi_trace_check(&state(2, 1.0), 200, Execution::Parallel).unwrap() < 1e-9);
        assert!(husimi_trace_check(&state(5, 0.0), 200, Execution::Parallel).unwrap() < 1e-10);
        // the measure's own normalization
        let m = MeasureDensity::new(3);
        let rule = half_line_rule(200).unwrap();
        assert!((rule.integrate(|x| m.radial_weight(x) * crate::coherent::binomial_weights(3, x)[0]) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn thermal_moment_examples() {
        let t = state(2, 1.0);
        assert!((thermal_moment(&t, 0).unwrap() - 1.0).abs() < 1e-15);
        let m1 = thermal_moment(&t, 1).unwrap();
        assert!((m1 - 0.566_361_512_326_155_5).abs() < 1e-14);
        let cold = state(2, 700.0);
        assert!(thermal_moment(&cold, 1).unwrap() < 1e-200);
        for s in 0..=4 {
            thermal_moment(&state(9, 0.4), s).unwrap();
        }
    }

    #[test]
    fn thermal_correlation_examples() {
        let g = thermal_g2(&state(2, 1.0)).unwrap();
        assert!((g - 0.967_822_188_112_834_5).abs() < 1e-13);
        let q = thermal_mandel(&state(2, 1.0)).unwrap();
        let m = thermal_moment(&state(2, 1.0), 1).unwrap();
        assert!((q - m * (g - 1.0)).abs() < 1e-15);
        let g0 = thermal_g2(&state(2, 0.0)).unwrap();
        assert!((g0 - 2.0 / 3.0).abs() < 1e-14);
        let g0 = thermal_g2(&state(7, 0.0)).unwrap();
        assert!((g0 - 4.0 / 3.0 * 6.0 / 7.0).abs() < 1e-14);
        assert!(thermal_g2(&state(2, 5.0)).is_ok());
        assert!(ThermalState::new(ThermalParams { a: f64::INFINITY, b: 0.0, l: 2 }).is_err());
    }
}
