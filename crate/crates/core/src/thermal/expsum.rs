use crate::numerics::neumaier_sum;

/// One term `coef * exp(log_scale - rate * A)`.
///
/// `log_scale` keeps heat-operator factors `exp(B c^2)` out of the
/// coefficient, where they would overflow long before the product with
/// `exp(-c A)` does.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpTerm {
    pub coef: f64,
    pub log_scale: f64,
    pub rate: f64,
}

impl ExpTerm {
    pub fn new(coef: f64, rate: f64) -> Self {
        ExpTerm {
            coef,
            log_scale: 0.0,
            rate,
        }
    }

    pub fn eval(&self, a: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        self.coef * (self.log_scale - self.rate * a).exp()
    }

    /// Effective coefficient `coef * exp(log_scale)`.
    pub fn scaled_coef(&self) -> f64 {
        self.coef * self.log_scale.exp()
    }
}

/// Finite sum `f(A) = sum_k coef_k exp(-c_k A)`.
///
/// Exponentials are eigenfunctions of `d/dA`, so both the derivative and the
/// heat operator `exp[B (d/dA)^2]` act exactly, term by term.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpSum {
    terms: Vec<ExpTerm>,
}

const RATE_MERGE_TOL: f64 = 1e-12;

impl ExpSum {
    pub fn new() -> Self {
        ExpSum { terms: Vec::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (f64, f64)>>(terms: I) -> Self {
        let mut s = ExpSum::new();
        for (coef, rate) in terms {
            s.push(ExpTerm::new(coef, rate));
        }
        s
    }

    /// `sum_{n=0}^{l} exp(-n A)`.
    pub fn geometric(l: usize) -> Self {
        Self::from_terms((0..=l).map(|n| (1.0, n as f64)))
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds a term, merging into an existing one with the same rate.
    pub fn push(&mut self, term: ExpTerm) {
        let close = |r: f64| (r - term.rate).abs() <= RATE_MERGE_TOL * r.abs().max(1.0);
        if let Some(existing) = self.terms.iter_mut().find(|t| close(t.rate)) {
            // bring both to the larger scale before adding
            let scale = existing.log_scale.max(term.log_scale);
            existing.coef = existing.coef * (existing.log_scale - scale).exp()
                + term.coef * (term.log_scale - scale).exp();
            existing.log_scale = scale;
        } else {
            self.terms.push(term);
        }
    }

    pub fn add(&self, other: &ExpSum) -> ExpSum {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(*t);
        }
        out
    }

    pub fn scale(&self, factor: f64) -> ExpSum {
        ExpSum {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm {
                    coef: t.coef * factor,
                    ..*t
                })
                .collect(),
        }
    }

    pub fn eval(&self, a: f64) -> f64 {
        neumaier_sum(self.terms.iter().map(|t| t.eval(a)))
    }

    /// `d/dA`: `(coef, c) -> (-c coef, c)`.
    pub fn derivative(&self) -> ExpSum {
        ExpSum {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm {
                    coef: -t.rate * t.coef,
                    ..*t
                })
                .collect(),
        }
    }

    pub fn nth_derivative(&self, order: usize) -> ExpSum {
        (0..order).fold(self.clone(), |acc, _| acc.derivative())
    }

    /// `exp[B (d/dA)^2]`: `(coef, c) -> (coef exp(B c^2), c)`.
    pub fn heat_apply(&self, b: f64) -> ExpSum {
        ExpSum {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm {
                    log_scale: t.log_scale + b * t.rate * t.rate,
                    ..*t
                })
                .collect(),
        }
    }
}

pub fn heat_apply(f: &ExpSum, b: f64) -> ExpSum {
    f.heat_apply(b)
}
