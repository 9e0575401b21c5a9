//! Expectation values of diagonal observables in coherent states.
//!
//! With `x = |Z|^2` the level distribution is binomial with success
//! probability `x/(1+x)`, so `<N> = l x/(1+x)` and the second factorial
//! moment is `l(l-1) (x/(1+x))^2`. Every operation here evaluates the direct
//! sum over levels and checks it against that closed form.

use crate::coherent::CoherentState;
use crate::error::{Error, Result};
use crate::numerics::neumaier_sum;
use crate::spectrum::MorseSpace;

const ROUTE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalObservable {
    pub l: usize,
    pub values: Vec<f64>,
}

impl DiagonalObservable {
    pub fn new(space: &MorseSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "observable has {} entries, space has {}",
                values.len(),
                space.dim()
            )));
        }
        Ok(DiagonalObservable {
            l: space.l(),
            values,
        })
    }

    pub fn identity(space: &MorseSpace) -> Self {
        DiagonalObservable {
            l: space.l(),
            values: vec![1.0; space.dim()],
        }
    }

    /// `N^s`.
    pub fn number_power(space: &MorseSpace, s: u32) -> Self {
        DiagonalObservable {
            l: space.l(),
            values: (0..space.dim()).map(|n| (n as f64).powi(s as i32)).collect(),
        }
    }

    /// Dimensionless Hamiltonian, entries `E_n`.
    pub fn energy(space: &MorseSpace) -> Self {
        DiagonalObservable {
            l: space.l(),
            values: space.energies().iter().map(|&e| e as f64).collect(),
        }
    }
}

/// `sum_n |c_n|^2 a_n`. Phases drop out, so the result does not depend on alpha.
pub fn expectation(state: &CoherentState, obs: &DiagonalObservable) -> Result<f64> {
    if obs.l != state.l() {
        return Err(Error::SpaceMismatch(format!(
            "observable on l = {}, state on l = {}",
            obs.l,
            state.l()
        )));
    }
    Ok(neumaier_sum(
        state
            .coeffs
            .iter()
            .zip(&obs.values)
            .map(|(c, a)| c.norm_sqr() * a),
    ))
}

fn p_of(state: &CoherentState) -> f64 {
    let x = state.x();
    if x.is_infinite() {
        1.0
    } else {
        x / (1.0 + x)
    }
}

fn direct_moment(state: &CoherentState, s: u32) -> f64 {
    neumaier_sum(
        state
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() * (n as f64).powi(s as i32)),
    )
}

/// `sum_n n(n-1) |c_n|^2`, free of the cancellation in `<N^2> - <N>`.
fn factorial_moment_2(state: &CoherentState) -> f64 {
    neumaier_sum(
        state
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() * (n as f64) * (n as f64 - 1.0)),
    )
}

/// `<N^s>` by direct sum; for `s = 1, 2` also checked against the closed forms.
pub fn moment_n(state: &CoherentState, s: u32) -> Result<f64> {
    let direct = direct_moment(state, s);
    let l = state.l() as f64;
    let p = p_of(state);
    let closed = match s {
        0 => Some(1.0),
        1 => Some(l * p),
        2 => Some(l * p + l * (l - 1.0) * p * p),
        _ => None,
    };
    if let Some(closed) = closed {
        Error::check_agree("moment_n", direct, closed, ROUTE_TOL)?;
    }
    Ok(direct)
}

fn require_nonzero_label(op: &'static str, state: &CoherentState) -> Result<()> {
    if state.x() == 0.0 {
        return Err(Error::domain(op, "undefined at Z = 0 (<N> = 0)"));
    }
    Ok(())
}

/// `(<N^2> - <N>) / <N>^2`; equals `(l-1)/l` for every nonzero label.
pub fn g2(state: &CoherentState) -> Result<f64> {
    require_nonzero_label("g2", state)?;
    let mean = moment_n(state, 1)?;
    let value = factorial_moment_2(state) / (mean * mean);
    let l = state.l() as f64;
    Error::check_agree("g2", value, (l - 1.0) / l, ROUTE_TOL)?;
    Ok(value)
}

/// `<N> (g2 - 1)`; equals `-x/(1+x)`, negative for every nonzero label.
pub fn mandel_q(state: &CoherentState) -> Result<f64> {
    require_nonzero_label("mandel_q", state)?;
    let mean = moment_n(state, 1)?;
    let value = (factorial_moment_2(state) - mean * mean) / mean;
    Error::check_agree("mandel_q", value, -p_of(state), ROUTE_TOL)?;
    Ok(value)
}

/// `l(2l+1) x/(1+x) - l(l-1) (x/(1+x))^2`.
pub fn action_function(l: usize, x: f64) -> f64 {
    let lf = l as f64;
    let p = if x.is_infinite() { 1.0 } else { x / (1.0 + x) };
    lf * (2.0 * lf + 1.0) * p - lf * (lf - 1.0) * p * p
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionIdentity {
    pub mean_energy: f64,
    pub f_of_x: f64,
}

/// Mean energy by direct sum next to its closed form `f(x)`.
pub fn action_identity(state: &CoherentState) -> Result<ActionIdentity> {
    let mean_energy = expectation(state, &DiagonalObservable::energy(&state.space))?;
    let f_of_x = action_function(state.l(), state.x());
    Error::check_agree("action_identity", mean_energy, f_of_x, ROUTE_TOL)?;
    Ok(ActionIdentity {
        mean_energy,
        f_of_x,
    })
}
