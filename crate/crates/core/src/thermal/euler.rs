use std::collections::BTreeMap;

use crate::numerics::neumaier_sum;

/// One term `coef * u^p (1 + u x)^(-q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerTerm {
    pub coef: f64,
    pub p: u32,
    pub q: u32,
}

/// `g(u) = exp(log_scale) * sum coef u^p (1 + u x)^(-q)` at fixed `x`, with
/// `u = e^A`.
///
/// `d/dA = u d/du` maps the family to itself:
/// `u d/du [u^p (1+ux)^-q] = (p - q) u^p (1+ux)^-q + q u^p (1+ux)^-(q+1)`,
/// so any number of `A`-derivatives is an exact finite rewrite. Each
/// derivative widens the `q` range by one.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerTermSeries {
    pub x: f64,
    pub log_scale: f64,
    terms: BTreeMap<(u32, u32), f64>,
}

impl EulerTermSeries {
    pub fn new(x: f64, log_scale: f64, terms: impl IntoIterator<Item = EulerTerm>) -> Self {
        let mut map = BTreeMap::new();
        for t in terms {
            *map.entry((t.p, t.q)).or_insert(0.0) += t.coef;
        }
        EulerTermSeries {
            x,
            log_scale,
            terms: map,
        }
    }

    /// `u ((1+x)/(1+ux))^(l+2)`, the `B = 0` P-function written in `u = e^A`.
    pub fn p_bracket(l: usize, x: f64) -> Self {
        let q = l as u32 + 2;
        Self::new(
            x,
            q as f64 * x.ln_1p(),
            [EulerTerm { coef: 1.0, p: 1, q }],
        )
    }

    pub fn terms(&self) -> impl Iterator<Item = EulerTerm> + '_ {
        self.terms
            .iter()
            .map(|(&(p, q), &coef)| EulerTerm { coef, p, q })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn q_range(&self) -> Option<(u32, u32)> {
        let qs = self.terms.keys().map(|&(_, q)| q);
        let min = qs.clone().min()?;
        Some((min, qs.max()?))
    }

    /// `u d/du`, equivalently `d/dA`.
    pub fn euler_derivative(&self) -> Self {
        let mut out: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (&(p, q), &c) in &self.terms {
            let same = c * (p as f64 - q as f64);
            if same != 0.0 {
                *out.entry((p, q)).or_insert(0.0) += same;
            }
            if q > 0 {
                *out.entry((p, q + 1)).or_insert(0.0) += c * q as f64;
            }
        }
        out.retain(|_, c| *c != 0.0);
        EulerTermSeries {
            x: self.x,
            log_scale: self.log_scale,
            terms: out,
        }
    }

    /// Value at `A`, i.e. `u = e^A`.
    pub fn eval(&self, a: f64) -> f64 {
        let log_1pux = (a.exp() * self.x).ln_1p();
        neumaier_sum(self.terms.iter().map(|(&(p, q), &c)| {
            c * (self.log_scale + p as f64 * a - q as f64 * log_1pux).exp()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_value() {
        let (l, x, a) = (3, 0.7, 0.4f64);
        let s = EulerTermSeries::p_bracket(l, x);
        let u = a.exp();
        let want = u * ((1.0 + x) / (1.0 + u * x)).powi(l as i32 + 2);
        assert!((s.eval(a) - want).abs() < 1e-14 * want);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = EulerTermSeries::p_bracket(4, 1.3);
        let d = s.euler_derivative();
        let d2 = d.euler_derivative();
        let (a, h) = (0.6, 1e-4);
        let fd = (s.eval(a + h) - s.eval(a - h)) / (2.0 * h);
        assert!((d.eval(a) - fd).abs() < 1e-7 * fd.abs().max(1.0));
        let fd2 = (s.eval(a + h) - 2.0 * s.eval(a) + s.eval(a - h)) / (h * h);
        assert!((d2.eval(a) - fd2).abs() < 1e-5 * fd2.abs().max(1.0));
    }

    #[test]
    fn term_count_grows_linearly() {
        let mut s = EulerTermSeries::p_bracket(5, 2.0);
        for k in 1..=40 {
            s = s.euler_derivative();
            assert!(s.len() <= k + 1);
            let (lo, hi) = s.q_range().unwrap();
            assert!(lo >= 7 && hi == 7 + k as u32);
        }
    }

    #[test]
    fn x_zero_bracket_is_pure_exponential() {
        // at x = 0 the bracket is e^A and every derivative is e^A
        let mut s = EulerTermSeries::p_bracket(2, 0.0);
        for _ in 0..6 {
            s = s.euler_derivative();
        }
        assert!((s.eval(0.9) / 0.9f64.exp() - 1.0).abs() < 1e-10);
    }
}
