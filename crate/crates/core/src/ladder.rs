//! Ladder algebra in the number basis, and the displacement-expansion
//! combinatorics (nested energy sums, the `I` series, the `J` functions).
//!
//! The matrices live on the `(l+1)` bound states only. The raising operator
//! annihilates the top state `n = l`, so `[A-, A+]` differs from
//! `-2N + (2l+1)` at that single diagonal entry, by `-(l+1)^2`.
//!
//! Everything below `LadderSet` is diagnostic: the closed-form coherent state
//! in [`crate::coherent`] does not depend on it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{log_factorial, ComplexMatrix};
use crate::spectrum::MorseSpace;

#[derive(Clone, Debug)]
pub struct LadderSet {
    pub space: MorseSpace,
    pub alpha: f64,
    pub a_minus: ComplexMatrix,
    pub a_plus: ComplexMatrix,
    pub number_op: ComplexMatrix,
    /// `diag(E_0, ..., E_l)`. Equals `a_plus * a_minus` at `alpha = 0`; with
    /// the printed link phases the product picks up `exp(-2 i alpha)`.
    pub hamiltonian: ComplexMatrix,
}

fn link_phase(l: usize, n: usize, alpha: f64) -> f64 {
    alpha * (2.0 * (l as f64 - n as f64) + 1.0)
}

/// `<n-1|A-|n> = sqrt(E_n) e^{i alpha (2(l-n)+1)}`,
/// `<n+1|A+|n> = sqrt(E_{n+1}) e^{-i alpha (2(l-n)+1)}`, `A+|l> = 0`.
pub fn build_ladder(space: &MorseSpace, alpha: f64) -> LadderSet {
    let l = space.l();
    let dim = space.dim();
    let mut a_minus = ComplexMatrix::zeros(dim, dim);
    let mut a_plus = ComplexMatrix::zeros(dim, dim);
    for n in 1..=l {
        let amp = space.energy_f64(n).sqrt();
        a_minus[(n - 1, n)] = Complex64::from_polar(amp, link_phase(l, n, alpha));
    }
    for n in 0..l {
        let amp = space.energy_f64(n + 1).sqrt();
        a_plus[(n + 1, n)] = Complex64::from_polar(amp, -link_phase(l, n, alpha));
    }
    let number_op = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let hamiltonian = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(space.energy_f64(i), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    LadderSet {
        space: space.clone(),
        alpha,
        a_minus,
        a_plus,
        number_op,
        hamiltonian,
    }
}

/// `[A-, A+] - (-2N + (2l+1))`. Meaningful at `alpha = 0`; the only nonzero
/// entry is `-(l+1)^2` at the top state.
pub fn commutator_defect(ladder: &LadderSet) -> ComplexMatrix {
    let dim = ladder.space.dim();
    let comm = &ladder.a_minus * &ladder.a_plus - &ladder.a_plus * &ladder.a_minus;
    let two_l_plus_one = Complex64::new((2 * ladder.space.l() + 1) as f64, 0.0);
    let rhs = &ladder.number_op * Complex64::new(-2.0, 0.0)
        + ComplexMatrix::identity(dim, dim) * two_l_plus_one;
    comm - rhs
}

/// `(l+1)^2 - (l+1-i)^2` for any `i >= 0`, continuing past the bound states
/// as the nested sums require.
pub(crate) fn extended_energy(l: usize, i: usize) -> f64 {
    let top = (l + 1) as f64;
    let d = top - i as f64;
    top * top - d * d
}

/// `n! (2l+1)! / (2l+1-n)!`.
fn delta_prefactor(l: usize, n: usize) -> f64 {
    let mut acc = 1.0f64;
    for k in 1..=n {
        acc *= k as f64;
    }
    for k in 0..n {
        acc *= (2 * l + 1 - k) as f64;
    }
    acc
}

/// Nested energy sums, memoized. `values[n][j]` holds `Delta^l(n+1, j)` for
/// `n = 0..=n_max`, `j = 0..=j_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaTable {
    pub l: usize,
    values: Vec<Vec<f64>>,
}

impl DeltaTable {
    /// Builds the table for `n <= n_max` (at most `2l+1`) and `j <= j_max`.
    ///
    /// With `S_0(m) = 1` and `S_k(m) = sum_{i=1}^{m} E_i S_{k-1}(i+1)`, the
    /// entry is `prefactor(n) * S_j(n+1)`; each `S_k` is a prefix sum, so the
    /// whole table costs `O(j_max (n_max + j_max))`.
    pub fn build(l: usize, n_max: usize, j_max: usize) -> Result<Self> {
        if n_max > 2 * l + 1 {
            return Err(Error::IndexOutOfRange {
                op: "DeltaTable::build",
                index: n_max,
                max: 2 * l + 1,
            });
        }
        let m_top = n_max + 1 + j_max;
        // s_prev[m] = S_{k-1}(m), m = 0..=m_top
        let mut s_prev = vec![1.0f64; m_top + 2];
        let mut by_order: Vec<Vec<f64>> = vec![s_prev.clone()];
        for k in 1..=j_max {
            let reach = m_top - k;
            let mut s = vec![0.0f64; reach + 2];
            for m in 1..=reach {
                s[m] = s[m - 1] + extended_energy(l, m) * s_prev[m + 1];
            }
            by_order.push(s.clone());
            s_prev = s;
        }
        let values = (0..=n_max)
            .map(|n| {
                let pre = delta_prefactor(l, n);
                (0..=j_max).map(|j| pre * by_order[j][n + 1]).collect()
            })
            .collect();
        Ok(DeltaTable { l, values })
    }

    /// `Delta^l(n+1, j)`.
    pub fn get(&self, n: usize, j: usize) -> Option<f64> {
        self.values.get(n).and_then(|row| row.get(j)).copied()
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn j_max(&self) -> usize {
        self.values[0].len() - 1
    }
}

/// `Delta^l(n+1, j)`, the prefactor times the `j`-fold nested energy sums.
pub fn delta_nested(l: usize, n: usize, j: usize) -> Result<f64> {
    if l == 0 {
        return Err(Error::domain("delta_nested", "l must be positive"));
    }
    if n > l {
        return Err(Error::IndexOutOfRange {
            op: "delta_nested",
            index: n,
            max: l,
        });
    }
    Ok(DeltaTable::build(l, n, j)?.get(n, j).expect("entry in table"))
}

/// Reference evaluation by literal recursion over the nested index ranges.
/// Exponential in `j`; for cross-checking only.
pub fn delta_nested_brute(l: usize, n: usize, j: usize) -> f64 {
    fn nested(l: usize, upper: usize, depth: usize) -> f64 {
        if depth == 0 {
            return 1.0;
        }
        (1..=upper)
            .map(|i| extended_energy(l, i) * nested(l, i + 1, depth - 1))
            .sum()
    }
    delta_prefactor(l, n) * nested(l, n + 1, j)
}

/// `Delta(n+1, j) - sqrt(2n(l+1) - n^2) Delta(n, j) - sqrt(2nl + 2l + 1 - n^2) Delta(n+2, j-1)`,
/// with `Delta(., -1) = 0`. Requires `1 <= n <= l - 1`.
///
/// Informational: the printed recurrence does not hold for the nested sums.
pub fn delta_recurrence_residual(l: usize, n: usize, j: usize) -> Result<f64> {
    if n == 0 || n + 1 > l {
        return Err(Error::domain(
            "delta_recurrence_residual",
            format!("need 1 <= n <= l-1, got n = {n}, l = {l}"),
        ));
    }
    let table = DeltaTable::build(l, n + 1, j)?;
    let nf = n as f64;
    let lf = l as f64;
    let lhs = table.get(n, j).unwrap();
    let first = (2.0 * nf * (lf + 1.0) - nf * nf).sqrt() * table.get(n - 1, j).unwrap();
    let second = if j == 0 {
        0.0
    } else {
        (2.0 * nf * lf + 2.0 * lf + 1.0 - nf * nf).sqrt() * table.get(n + 1, j - 1).unwrap()
    };
    Ok(lhs - first - second)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    pub converged: bool,
}

/// Partial sums of `I_n^l(|z|) = sum_j (-|z|^2)^j / (n+2j)! Delta^l(n+1, j)`.
///
/// Stops once a term falls below `tol` times the running maximum of the
/// partial sums, or at `j_max` with `converged = false`.
pub fn i_series(l: usize, n: usize, abs_z: f64, tol: f64, j_max: usize) -> Result<SeriesValue> {
    if !(tol > 0.0) {
        return Err(Error::domain("i_series", "tol must be positive"));
    }
    if !(abs_z >= 0.0) || !abs_z.is_finite() {
        return Err(Error::domain("i_series", format!("|z| = {abs_z}")));
    }
    if n > l {
        return Err(Error::IndexOutOfRange {
            op: "i_series",
            index: n,
            max: l,
        });
    }
    let table = DeltaTable::build(l, n, j_max)?;
    let x = abs_z * abs_z;
    let mut sum = 0.0f64;
    let mut running_max = 0.0f64;
    for j in 0..=j_max {
        let delta = table.get(n, j).unwrap();
        let term = if delta == 0.0 || (j > 0 && x == 0.0) {
            0.0
        } else {
            let log_mag = j as f64 * if j == 0 { 0.0 } else { x.ln() } - log_factorial(n + 2 * j)
                + delta.abs().ln();
            let sign = if j % 2 == 1 { -delta.signum() } else { delta.signum() };
            sign * log_mag.exp()
        };
        if !term.is_finite() {
            return Ok(SeriesValue {
                value: sum,
                terms: j,
                converged: false,
            });
        }
        sum += term;
        running_max = running_max.max(sum.abs());
        if term.abs() < tol * running_max {
            return Ok(SeriesValue {
                value: sum,
                terms: j + 1,
                converged: true,
            });
        }
    }
    Ok(SeriesValue {
        value: sum,
        terms: j_max + 1,
        converged: false,
    })
}

fn check_angle(op: &'static str, abs_z: f64) -> Result<()> {
    if !(abs_z >= 0.0 && abs_z < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain(op, format!("|z| = {abs_z} outside [0, pi/2)")));
    }
    Ok(())
}

fn j_formula(l: usize, n: i64, abs_z: f64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    let n = n as usize;
    let c = abs_z.cos();
    let t = abs_z.tan();
    (-log_factorial(n)).exp() * c.powi(l as i32 - 1) * t.powi(n as i32)
}

/// `J_n^l(|z|) = (1/n!) cos(|z|)^(l-1) tan(|z|)^n`, as printed.
pub fn j_closed(l: usize, n: usize, abs_z: f64) -> Result<f64> {
    check_angle("j_closed", abs_z)?;
    Ok(j_formula(l, n as i64, abs_z))
}

/// Central-difference `dJ_n/d|z|` minus `J_{n-1} - (2nl+2l+1-n^2) J_{n+1}`,
/// evaluated on the printed closed form with `J_{-1} = 0`.
pub fn j_ode_residual(l: usize, n: usize, abs_z: f64, step: f64) -> Result<f64> {
    check_angle("j_ode_residual", abs_z)?;
    if !(step > 0.0) || abs_z + step >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::domain(
            "j_ode_residual",
            format!("step {step} leaves the interval at |z| = {abs_z}"),
        ));
    }
    let ni = n as i64;
    let deriv = (j_formula(l, ni, abs_z + step) - j_formula(l, ni, abs_z - step)) / (2.0 * step);
    let nf = n as f64;
    let lf = l as f64;
    let coupling = 2.0 * nf * lf + 2.0 * lf + 1.0 - nf * nf;
    let rhs = j_formula(l, ni - 1, abs_z) - coupling * j_formula(l, ni + 1, abs_z);
    Ok(deriv - rhs)
}

/// `J_n` through its definition `|z|^n sqrt((2l+1-n)! / (n! (2l+1)!)) I_n`,
/// from the truncated `I` series.
pub fn j_from_series(l: usize, n: usize, abs_z: f64, tol: f64, j_max: usize) -> Result<SeriesValue> {
    let i = i_series(l, n, abs_z, tol, j_max)?;
    let log_norm =
        0.5 * (log_factorial(2 * l + 1 - n) - log_factorial(n) - log_factorial(2 * l + 1));
    Ok(SeriesValue {
        value: abs_z.powi(n as i32) * log_norm.exp() * i.value,
        ..i
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_abs_diff;

    fn space(l: usize) -> MorseSpace {
        MorseSpace::new(l).unwrap()
    }

    #[test]
    fn matrix_elements() {
        let lad = build_ladder(&space(1), 0.0);
        assert!((lad.a_minus[(0, 1)].re - 3f64.sqrt()).abs() < 1e-15);
        let lad = build_ladder(&space(2), 0.0);
        assert!((lad.a_minus[(0, 1)].re - 5f64.sqrt()).abs() < 1e-15);
        assert!((lad.a_minus[(1, 2)].re - 8f64.sqrt()).abs() < 1e-15);
        let nonzero = lad.a_minus.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn alpha_pi_flips_every_link() {
        let lad = build_ladder(&space(1), std::f64::consts::PI);
        let e = lad.a_minus[(0, 1)];
        assert!((e - Complex64::new(-3f64.sqrt(), 0.0)).norm() < 1e-14);
        let e = lad.a_plus[(1, 0)];
        assert!((e - Complex64::new(-3f64.sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ground_and_top_annihilation() {
        for l in 1..=8 {
            let lad = build_ladder(&space(l), 0.4);
            assert!(lad.a_minus.column(0).iter().all(|z| z.norm() == 0.0));
            assert!(lad.a_plus.column(l).iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn adjoint_and_hamiltonian_at_zero_phase() {
        for l in 1..=30 {
            let lad = build_ladder(&space(l), 0.0);
            assert_eq!(lad.a_plus, lad.a_minus.adjoint());
            let prod = &lad.a_plus * &lad.a_minus;
            assert!(max_abs_diff(&prod, &lad.hamiltonian) < 1e-12);
        }
    }

    #[test]
    fn printed_phases_give_uniform_product_phase() {
        // A+ A- = exp(-2 i alpha) H for the printed link phases
        for l in [1, 4, 9] {
            for alpha in [0.3, 1.0, 2.5] {
                let lad = build_ladder(&space(l), alpha);
                let prod = &lad.a_plus * &lad.a_minus;
                let want = &lad.hamiltonian * Complex64::from_polar(1.0, -2.0 * alpha);
                assert!(max_abs_diff(&prod, &want) < 1e-11);
                for n in 0..=l {
                    assert_eq!(lad.hamiltonian[(n, n)].re, lad.space.energy_f64(n));
                }
            }
        }
    }

    #[test]
    fn commutator_defect_only_at_top() {
        let d = commutator_defect(&build_ladder(&space(1), 0.0));
        assert!((d[(0, 0)]).norm() < 1e-12);
        assert!((d[(1, 1)] - Complex64::new(-4.0, 0.0)).norm() < 1e-12);
        let d = commutator_defect(&build_ladder(&space(2), 0.0));
        let diag: Vec<f64> = (0..3).map(|i| d[(i, i)].re).collect();
        assert!((diag[0]).abs() < 1e-12 && diag[1].abs() < 1e-12 && (diag[2] + 9.0).abs() < 1e-12);
        for l in 1..=30 {
            let d = commutator_defect(&build_ladder(&space(l), 0.0));
            for i in 0..=l {
                for j in 0..=l {
                    let want = if i == j && i == l { -(((l + 1) * (l + 1)) as f64) } else { 0.0 };
                    assert!((d[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-9, "l={l} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn ground_state_commutator() {
        for l in 1..=10 {
            let lad = build_ladder(&space(l), 0.0);
            let comm = &lad.a_minus * &lad.a_plus - &lad.a_plus * &lad.a_minus;
            assert!((comm[(0, 0)].re - (2 * l + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_small_values() {
        assert_eq!(delta_nested(1, 1, 0).unwrap(), 3.0);
        for l in 1..=6 {
            assert_eq!(delta_nested(l, 0, 0).unwrap(), 1.0);
        }
        assert_eq!(delta_nested(1, 0, 1).unwrap(), 3.0);
        assert_eq!(delta_nested(1, 0, 2).unwrap(), 21.0);
        assert!(delta_nested(2, 3, 0).is_err());
    }

    #[test]
    fn delta_prefactor_closed_form() {
        for l in 1..=8 {
            for n in 0..=l {
                let want = (log_factorial(n) + log_factorial(2 * l + 1)
                    - log_factorial(2 * l + 1 - n))
                .exp();
                let got = delta_nested(l, n, 0).unwrap();
                assert!((got - want).abs() < 1e-10 * want);
            }
        }
    }

    #[test]
    fn delta_memo_matches_brute_force() {
        for l in 1..=4 {
            for n in 0..=l {
                for j in 0..=5 {
                    let fast = delta_nested(l, n, j).unwrap();
                    let slow = delta_nested_brute(l, n, j);
                    assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1.0), "l={l} n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn delta_monotone_while_energies_are_positive() {
        for l in 1..=6 {
            for n in 0..=l {
                let t = DeltaTable::build(l, n, l + 2).unwrap();
                for j in 0..(l + 2) {
                    assert!(t.get(n, j).unwrap() >= 0.0);
                    assert!(t.get(n, j + 1).unwrap() >= t.get(n, j).unwrap(), "l={l} n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn recurrence_sqrt_factors_are_energies() {
        for l in 1..=10 {
            let s = space(l);
            for n in 0..l {
                let (nf, lf) = (n as f64, l as f64);
                assert_eq!(2.0 * nf * (lf + 1.0) - nf * nf, s.energy_f64(n));
                assert_eq!(2.0 * nf * lf + 2.0 * lf + 1.0 - nf * nf, s.energy_f64(n + 1));
            }
        }
    }

    #[test]
    fn recurrence_residual_is_reported() {
        // j = 0: Delta(n+1,0) - sqrt(E_n) Delta(n,0)
        let r = delta_recurrence_residual(2, 1, 0).unwrap();
        let want = delta_nested(2, 1, 0).unwrap() - 5f64.sqrt() * delta_nested(2, 0, 0).unwrap();
        assert!((r - want).abs() < 1e-12);
        let r = delta_recurrence_residual(2, 1, 1).unwrap();
        assert!(r.is_finite());
        assert!(delta_recurrence_residual(2, 0, 1).is_err());
        assert!(delta_recurrence_residual(2, 2, 1).is_err());
    }

    #[test]
    fn i_series_values() {
        let v = i_series(3, 0, 0.0, 1e-14, 20).unwrap();
        assert!(v.converged && v.value == 1.0);
        let v = i_series(2, 2, 0.0, 1e-14, 20).unwrap();
        assert!((v.value - 20.0).abs() < 1e-12); // 5!/3!
        let z = 1e-3;
        let v = i_series(1, 0, z, 1e-15, 40).unwrap();
        assert!(v.converged);
        assert!((v.value - (1.0 - 1.5 * z * z)).abs() < 1e-11);
        assert!(i_series(1, 0, 0.1, 0.0, 10).is_err());
    }

    #[test]
    fn i_series_flags_non_convergence() {
        let v = i_series(2, 1, 1.4, 1e-15, 3).unwrap();
        assert!(!v.converged);
    }

    #[test]
    fn j_closed_values() {
        assert_eq!(j_closed(3, 0, 0.0).unwrap(), 1.0);
        assert!((j_closed(1, 1, std::f64::consts::FRAC_PI_4).unwrap() - 1.0).abs() < 1e-15);
        assert!(j_closed(1, 1, std::f64::consts::FRAC_PI_2).is_err());
        assert!(j_ode_residual(2, 1, 1.5, 0.1).is_err());
    }

    #[test]
    fn j_ode_residual_is_finite_on_grid() {
        for l in 1..=4 {
            for n in 0..=l {
                for k in 1..=10 {
                    let z = 0.1 * k as f64;
                    assert!(j_ode_residual(l, n, z, 1e-5).unwrap().is_finite());
                }
            }
        }
    }
}
