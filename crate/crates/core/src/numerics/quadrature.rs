use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mapping {
    /// Standard rule on `[-1, 1]`.
    FiniteInterval,
    /// Legendre rule pulled back to `[0, inf)` through `x = t / (1 - t)`.
    HalfLineRational,
    /// Hermite rule for the weight `exp(-t^2)` on the real line.
    GaussHermite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub mapping: Mapping,
}

impl QuadratureRule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        super::neumaier_sum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }

    /// Like [`integrate`](Self::integrate) but rejects non-finite integrand values.
    pub fn try_integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.order);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::numeric(
                    "integrate",
                    format!("integrand is {v} at x = {x:e}"),
                ));
            }
            terms.push(w * v);
        }
        Ok(super::neumaier_sum(terms))
    }
}

/// Gauss-Legendre rule of the given order on `[-1, 1]`, nodes increasing.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::domain("gauss_legendre", "order must be at least 1"));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        if n % 2 == 1 && i == half - 1 {
            z = 0.0;
            dp = legendre_with_derivative(n, 0.0).1;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(QuadratureRule {
        order,
        nodes,
        weights,
        mapping: Mapping::FiniteInterval,
    })
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Legendre rule mapped to `[0, inf)` via `x = t / (1 - t)`, `t` in `[0, 1)`.
pub fn half_line_rule(order: usize) -> Result<QuadratureRule> {
    let base = gauss_legendre(order)?;
    let (nodes, weights) = base
        .nodes
        .iter()
        .zip(&base.weights)
        .map(|(&s, &w)| {
            let t = 0.5 * (s + 1.0);
            let one_minus = 1.0 - t;
            (t / one_minus, 0.5 * w / (one_minus * one_minus))
        })
        .unzip();
    Ok(QuadratureRule {
        order,
        nodes,
        weights,
        mapping: Mapping::HalfLineRational,
    })
}

pub fn integrate_halfline<F: FnMut(f64) -> f64>(f: F, order: usize) -> Result<f64> {
    half_line_rule(order)?.try_integrate(f)
}

/// Gauss-Hermite rule for `int exp(-t^2) f(t) dt`, nodes increasing.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::domain("gauss_hermite", "order must be at least 1"));
    }
    let n = order;
    let nf = n as f64;
    let pim4 = PI.powf(-0.25);
    let mut roots = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let half = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * roots[0],
            3 => 1.91 * z - 0.91 * roots[1],
            _ => 2.0 * z - roots[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        if n % 2 == 1 && i == half - 1 {
            z = 0.0;
        }
        roots[i] = z;
        roots[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // roots come out decreasing
    roots.reverse();
    w.reverse();
    Ok(QuadratureRule {
        order,
        nodes: roots,
        weights: w,
        mapping: Mapping::GaussHermite,
    })
}
