//! Diagonal coherent-state (P) representation of the thermal state.
//!
//! At `B = 0` the P-function is `e^A ((1+x)/(1+e^A x))^(l+2)`. For `B > 0` it is
//! the heat operator `exp[B (d/dA)^2]` applied to that bracket. Two
//! evaluations are provided:
//!
//! - [`p_function`]: the power series `sum_k B^k/k! (d/dA)^(2k) bracket`, with
//!   derivatives taken exactly on an [`EulerTermSeries`]. The bracket has
//!   poles at `Im A = +-pi`, so the `2k`-th derivative grows like
//!   `(2k)!/pi^(2k)` and the series is asymptotic rather than convergent at
//!   every `x > 0`. When the relative-term criterion is never met the value
//!   is the optimally truncated sum (through the smallest term) and
//!   `converged` is false.
//! - [`p_function_heat_kernel`]: the same operator as the Gaussian
//!   convolution `(4 pi B)^(-1/2) int bracket(A + s) exp(-s^2 / 4B) ds`,
//!   evaluated by Gauss-Hermite quadrature. This is exact on every
//!   exponential (it reproduces `exp(B c^2)`), so moments of the resulting P
//!   satisfy the moment conditions to quadrature accuracy.

use crate::coherent::{binomial_weights, MeasureDensity};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::{gauss_hermite, half_line_rule, log_binomial, neumaier_sum, ratio_integral};
use crate::statistics::DiagonalObservable;

use super::{EulerTermSeries, ThermalState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PSeriesValue {
    pub value: f64,
    /// Index of the last series term included.
    pub k_used: usize,
    pub converged: bool,
}

/// `u ((1+x)/(1+ux))^(l+2)` at `u = e^A`.
fn bracket(l: usize, x: f64, a: f64) -> f64 {
    let q = (l + 2) as f64;
    (a + q * (x.ln_1p() - (a.exp() * x).ln_1p())).exp()
}

/// P-function by the truncated heat-operator series.
///
/// Stops at the first `k` with `|term_k| < tol * |partial sum|`. Otherwise
/// runs to `k_max` and returns the partial sum through the smallest term.
/// Negative values are returned as-is.
pub fn p_function(thermal: &ThermalState, x: f64, tol: f64, k_max: usize) -> Result<PSeriesValue> {
    if !(tol > 0.0) {
        return Err(Error::domain("p_function", "tol must be positive"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("p_function", format!("x = {x} must be finite and >= 0")));
    }
    let (a, b, l) = (thermal.params.a, thermal.params.b, thermal.l());
    let mut series = EulerTermSeries::p_bracket(l, x);
    let first = series.eval(a);
    if b == 0.0 {
        return Ok(PSeriesValue {
            value: first,
            k_used: 0,
            converged: true,
        });
    }
    let mut sum = first;
    let mut best = (first.abs(), 0usize, first);
    let mut log_coef = 0.0f64; // ln(B^k / k!)
    for k in 1..=k_max {
        series = series.euler_derivative().euler_derivative();
        log_coef += b.ln() - (k as f64).ln();
        let term = log_coef.exp() * series.eval(a);
        if !term.is_finite() {
            break;
        }
        sum += term;
        if term.abs() < best.0 {
            best = (term.abs(), k, sum);
        }
        if term.abs() < tol * sum.abs() {
            return Ok(PSeriesValue {
                value: sum,
                k_used: k,
                converged: true,
            });
        }
    }
    Ok(PSeriesValue {
        value: best.2,
        k_used: best.1,
        converged: false,
    })
}

/// P-function as a Gaussian convolution of the `B = 0` bracket in `A`.
pub fn p_function_heat_kernel(thermal: &ThermalState, x: f64, order: usize) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "p_function_heat_kernel",
            format!("x = {x} must be finite and >= 0"),
        ));
    }
    let (a, b, l) = (thermal.params.a, thermal.params.b, thermal.l());
    if b == 0.0 {
        return Ok(bracket(l, x, a));
    }
    let rule = gauss_hermite(order)?;
    let spread = 2.0 * b.sqrt();
    let value = rule.integrate(|t| bracket(l, x, a + spread * t)) / std::f64::consts::PI.sqrt();
    if !value.is_finite() {
        return Err(Error::numeric("p_function_heat_kernel", format!("value {value}")));
    }
    Ok(value)
}

/// How the checks below evaluate the P-function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PRoute {
    Series { tol: f64, k_max: usize },
    HeatKernel { order: usize },
}

impl PRoute {
    pub const DEFAULT_SERIES: PRoute = PRoute::Series {
        tol: 1e-10,
        k_max: 60,
    };
    pub const DEFAULT_HEAT_KERNEL: PRoute = PRoute::HeatKernel { order: 96 };

    pub fn name(&self) -> &'static str {
        match self {
            PRoute::Series { .. } => "series",
            PRoute::HeatKernel { .. } => "heat-kernel",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct PSample {
    value: f64,
    k_used: Option<usize>,
    converged: bool,
}

fn sample_p(thermal: &ThermalState, x: f64, route: PRoute) -> Result<PSample> {
    match route {
        PRoute::Series { tol, k_max } => {
            let v = p_function(thermal, x, tol, k_max)?;
            Ok(PSample {
                value: v.value,
                k_used: Some(v.k_used),
                converged: v.converged,
            })
        }
        PRoute::HeatKernel { order } => Ok(PSample {
            value: p_function_heat_kernel(thermal, x, order)?,
            k_used: None,
            converged: true,
        }),
    }
}

/// P sampled on the nodes of a half-line rule.
struct PGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    samples: Vec<PSample>,
}

impl PGrid {
    fn new(thermal: &ThermalState, quad_order: usize, route: PRoute, exec: Execution) -> Result<Self> {
        let rule = half_line_rule(quad_order)?;
        let samples = exec
            .map(&rule.nodes, |&x| sample_p(thermal, x, route))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(PGrid {
            nodes: rule.nodes,
            weights: rule.weights,
            samples,
        })
    }

    fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        neumaier_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .zip(&self.samples)
                .map(|((&x, &w), s)| w * f(x, s.value)),
        )
    }

    fn all_converged(&self) -> bool {
        self.samples.iter().all(|s| s.converged)
    }

    fn unconverged(&self) -> usize {
        self.samples.iter().filter(|s| !s.converged).count()
    }

    fn max_k_used(&self) -> Option<usize> {
        self.samples.iter().filter_map(|s| s.k_used).max()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PMomentCheck {
    pub n: usize,
    pub target: f64,
    pub value: f64,
    pub relative: f64,
    pub all_converged: bool,
    pub unconverged_nodes: usize,
    pub max_k_used: Option<usize>,
}

/// `int x^n (1+x)^-(l+2) P(x) dx` against
/// `exp(-A n + B n^2) / (l+1) * n! (l-n)! / l!` for every `n <= l`, sharing one
/// set of P samples.
pub fn p_moments_check(
    thermal: &ThermalState,
    quad_order: usize,
    route: PRoute,
    exec: Execution,
) -> Result<Vec<PMomentCheck>> {
    let l = thermal.l();
    let grid = PGrid::new(thermal, quad_order, route, exec)?;
    let q = -((l + 2) as i32);
    (0..=l)
        .map(|n| {
            let value = grid.integrate(|x, p| x.powi(n as i32) * (1.0 + x).powi(q) * p);
            let target = (-thermal.params.exponent(n) - log_binomial(l, n)?).exp() / (l + 1) as f64;
            Ok(PMomentCheck {
                n,
                target,
                value,
                relative: (value - target).abs() / target,
                all_converged: grid.all_converged(),
                unconverged_nodes: grid.unconverged(),
                max_k_used: grid.max_k_used(),
            })
        })
        .collect()
}

pub fn p_moment_check(
    thermal: &ThermalState,
    n: usize,
    quad_order: usize,
    route: PRoute,
    exec: Execution,
) -> Result<PMomentCheck> {
    if n > thermal.l() {
        return Err(Error::IndexOutOfRange {
            op: "p_moment_check",
            index: n,
            max: thermal.l(),
        });
    }
    Ok(p_moments_check(thermal, quad_order, route, exec)?.swap_remove(n))
}

/// `B = 0` cross-check of the inner integral `int (1+x)^l (1+e^A x)^-(l+2) dx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioIntegralCheck {
    pub quadrature: f64,
    pub closed_form: f64,
    /// `(l+1) e^A * closed_form`, which must equal `sum_n exp(-A n)`.
    pub scaled: f64,
    pub geometric_sum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PTraceCheck {
    pub value: f64,
    pub residual: f64,
    pub all_converged: bool,
    pub unconverged_nodes: usize,
    pub inner: Option<RatioIntegralCheck>,
}

/// `(1/Z) int dmu P(|Z|^2)`, which must be 1.
pub fn p_trace_check(
    thermal: &ThermalState,
    quad_order: usize,
    route: PRoute,
    exec: Execution,
) -> Result<PTraceCheck> {
    let l = thermal.l();
    let grid = PGrid::new(thermal, quad_order, route, exec)?;
    let measure = MeasureDensity::new(l);
    let value = grid.integrate(|x, p| measure.radial_weight(x) * p) / thermal.partition;

    let (a, b) = (thermal.params.a, thermal.params.b);
    let inner = if b == 0.0 && a > 0.0 {
        let u = a.exp();
        let rule = half_line_rule(quad_order)?;
        let lf = l as f64;
        let quadrature =
            rule.integrate(|x| (lf * x.ln_1p() - (lf + 2.0) * (u * x).ln_1p()).exp());
        let closed_form = ratio_integral(1.0, 1.0, u, 1.0, lf + 1.0)?;
        let geometric_sum = neumaier_sum((0..=l).map(|n| (-a * n as f64).exp()));
        Some(RatioIntegralCheck {
            quadrature,
            closed_form,
            scaled: (lf + 1.0) * u * closed_form,
            geometric_sum,
        })
    } else {
        None
    };
    Ok(PTraceCheck {
        value,
        residual: (value - 1.0).abs(),
        all_converged: grid.all_converged(),
        unconverged_nodes: grid.unconverged(),
        inner,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalAverage {
    pub quadrature: f64,
    pub basis_sum: f64,
    pub residual: f64,
    pub all_converged: bool,
}

/// `(1/Z) int dmu P(|Z|^2) <Z|A|Z>` by radial quadrature, next to `sum_n w_n a_n`.
pub fn thermal_average(
    thermal: &ThermalState,
    obs: &DiagonalObservable,
    quad_order: usize,
    route: PRoute,
    exec: Execution,
) -> Result<ThermalAverage> {
    let l = thermal.l();
    if obs.l != l {
        return Err(Error::SpaceMismatch(format!(
            "observable on l = {}, thermal state on l = {l}",
            obs.l
        )));
    }
    let grid = PGrid::new(thermal, quad_order, route, exec)?;
    let measure = MeasureDensity::new(l);
    let quadrature = grid.integrate(|x, p| {
        let expect = neumaier_sum(
            binomial_weights(l, x)
                .iter()
                .zip(&obs.values)
                .map(|(b, v)| b * v),
        );
        measure.radial_weight(x) * p * expect
    }) / thermal.partition;
    let basis_sum = neumaier_sum(thermal.weights.iter().zip(&obs.values).map(|(w, v)| w * v));
    Ok(ThermalAverage {
        quadrature,
        basis_sum,
        residual: (quadrature - basis_sum).abs(),
        all_converged: grid.all_converged(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{MorseSpace, ThermalParams};
    use crate::thermal::thermal_moment;

    fn state(l: usize, a: f64) -> ThermalState {
        ThermalState::new(ThermalParams::new(l, a).unwrap()).unwrap()
    }

    fn harmonic(l: usize, a: f64) -> ThermalState {
        ThermalState::new(ThermalParams { a, b: 0.0, l }).unwrap()
    }

    #[test]
    fn zero_anharmonicity_is_closed_form() {
        let t = harmonic(3, 0.8);
        for x in [0.0, 0.4, 9.0] {
            let v = p_function(&t, x, 1e-10, 60).unwrap();
            let u = 0.8f64.exp();
            let want = u * ((1.0 + x) / (1.0 + u * x)).powi(5);
            assert_eq!(v.k_used, 0);
            assert!(v.converged);
            assert!((v.value - want).abs() < 1e-14 * want);
            assert!((p_function_heat_kernel(&t, x, 40).unwrap() - want).abs() < 1e-14 * want);
        }
        assert!((p_function(&t, 0.0, 1e-10, 60).unwrap().value - 0.8f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn infinite_temperature_p_is_one() {
        let t = state(4, 0.0);
        for x in [0.0, 1.0, 30.0] {
            assert!((p_function(&t, x, 1e-10, 60).unwrap().value - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn argument_validation() {
        let t = state(2, 1.0);
        assert!(p_function(&t, 1.0, 0.0, 10).is_err());
        assert!(p_function(&t, -1.0, 1e-10, 10).is_err());
        assert!(p_function_heat_kernel(&t, f64::NAN, 40).is_err());
        assert!(p_moment_check(&t, 3, 100, PRoute::DEFAULT_HEAT_KERNEL, Execution::Sequential).is_err());
    }

    #[test]
    fn series_converges_at_large_x() {
        // far from the poles the series behaves; at x = 50 it meets 1e-10
        let t = state(10, 0.5);
        let s = p_function(&t, 50.0, 1e-10, 80).unwrap();
        assert!(s.converged);
        let hk = p_function_heat_kernel(&t, 50.0, 96).unwrap();
        assert!((s.value - hk).abs() < 1e-9 * hk);
    }

    #[test]
    fn series_is_asymptotic_at_moderate_x() {
        let t = state(2, 1.0);
        let s = p_function(&t, 1.0, 1e-10, 60).unwrap();
        assert!(!s.converged);
        assert!(s.k_used > 5 && s.k_used < 60);
        let hk = p_function_heat_kernel(&t, 1.0, 96).unwrap();
        assert!((s.value - hk).abs() < 1e-3 * hk);
    }

    #[test]
    fn heat_kernel_is_exact_on_exponentials() {
        // the Gaussian convolution of exp(-cA) must give exp(Bc^2 - cA)
        let rule = gauss_hermite(96).unwrap();
        let (a, b) = (0.7, 0.15f64);
        for c in [0.0, 1.0, 3.0, 7.0] {
            let got = rule.integrate(|t| (-c * (a + 2.0 * b.sqrt() * t)).exp())
                / std::f64::consts::PI.sqrt();
            let want = (b * c * c - c * a).exp();
            assert!((got / want - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonic_moments_and_trace() {
        let t = harmonic(3, 1.1);
        let checks = p_moments_check(&t, 200, PRoute::DEFAULT_SERIES, Execution::Parallel).unwrap();
        for c in &checks {
            assert!(c.relative < 1e-9, "n={} rel={}", c.n, c.relative);
            assert!(c.all_converged);
        }
        let t = harmonic(1, 2f64.ln());
        let tr = p_trace_check(&t, 200, PRoute::DEFAULT_SERIES, Execution::Parallel).unwrap();
        assert!(tr.residual < 1e-10);
        let inner = tr.inner.unwrap();
        assert!((inner.closed_form - 0.375).abs() < 1e-15);
        assert!((inner.quadrature - 0.375).abs() < 1e-10);
        assert!((inner.scaled - inner.geometric_sum).abs() < 1e-14);
    }

    #[test]
    fn uniform_trace_is_trivial() {
        let t = state(3, 0.0);
        let tr = p_trace_check(&t, 200, PRoute::DEFAULT_SERIES, Execution::Sequential).unwrap();
        assert!(tr.residual < 1e-10);
        assert!(tr.inner.is_none());
        // n!(l-n)!/(l+1)!
        let c = p_moment_check(&t, 1, 200, PRoute::DEFAULT_SERIES, Execution::Sequential).unwrap();
        assert!((c.target - 1.0 / 12.0).abs() < 1e-15);
        assert!(c.relative < 1e-10);
    }

    #[test]
    fn heat_kernel_moments_anharmonic() {
        let t = state(2, 1.0);
        let checks = p_moments_check(&t, 200, PRoute::DEFAULT_HEAT_KERNEL, Execution::Parallel).unwrap();
        assert!(checks.iter().all(|c| c.relative < 1e-10));
        let tr = p_trace_check(&t, 200, PRoute::DEFAULT_HEAT_KERNEL, Execution::Parallel).unwrap();
        assert!(tr.residual < 1e-10);
    }

    #[test]
    fn thermal_average_routes() {
        let sp = MorseSpace::new(2).unwrap();
        let t = state(2, 1.0);
        let one = thermal_average(&t, &DiagonalObservable::identity(&sp), 200, PRoute::DEFAULT_HEAT_KERNEL, Execution::Parallel).unwrap();
        assert!((one.quadrature - 1.0).abs() < 1e-10);
        let e = thermal_average(&t, &DiagonalObservable::energy(&sp), 200, PRoute::DEFAULT_HEAT_KERNEL, Execution::Parallel).unwrap();
        assert!(e.residual < 1e-6);
        let h = harmonic(2, 1.0);
        let n = thermal_average(&h, &DiagonalObservable::number_power(&sp, 1), 200, PRoute::DEFAULT_SERIES, Execution::Parallel).unwrap();
        assert!((n.quadrature - thermal_moment(&h, 1).unwrap()).abs() < 1e-8);
        let wrong = DiagonalObservable::identity(&MorseSpace::new(3).unwrap());
        assert!(thermal_average(&t, &wrong, 50, PRoute::DEFAULT_SERIES, Execution::Sequential).is_err());
    }
}
