use crate::error::{Error, Result};
use crate::numerics::neumaier_sum;
use crate::spectrum::ThermalParams;

use super::{partition, ExpSum};

/// Canonical thermodynamics in units where `k_B = 1` and energies are in the
/// units of `hbar_omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thermodynamics {
    pub temperature: f64,
    pub free_energy: f64,
    pub internal_energy: f64,
    pub entropy: f64,
    pub heat_capacity: f64,
}

/// `F = -T ln Z`, `U = <eps>`, `S = (U - F)/T`, `C = Var(eps) / T^2`.
///
/// `U` is computed twice: as the weighted level sum, and as `-d ln Z / d beta`
/// on `Z(beta) = sum exp(-eps_n beta)`, whose rates are the dimensional
/// energies (both `A` and `B` scale with `beta`).
///
/// At `A = 0` the infinite-temperature limit is returned: `T = inf`, `F = -inf`, `U` the level average, `S = ln(l+1)`
/// and `C = 0`.
pub fn thermodynamics(params: &ThermalParams, hbar_omega: f64) -> Result<Thermodynamics> {
    if !(params.a >= 0.0) || !params.a.is_finite() {
        return Err(Error::domain(
            "thermodynamics",
            format!("A = beta*hbar_omega must be finite and >= 0, got {}", params.a),
        ));
    }
    if !(hbar_omega > 0.0) || !hbar_omega.is_finite() {
        return Err(Error::domain("thermodynamics", "hbar_omega must be positive"));
    }
    let l = params.l;
    let eps: Vec<f64> = (0..=l)
        .map(|n| {
            let nf = n as f64;
            hbar_omega * nf - hbar_omega / (2.0 * (l + 1) as f64) * nf * nf
        })
        .collect();
    if params.a == 0.0 {
        return Ok(Thermodynamics {
            temperature: f64::INFINITY,
            free_energy: f64::NEG_INFINITY,
            internal_energy: neumaier_sum(eps.iter().copied()) / (l + 1) as f64,
            entropy: ((l + 1) as f64).ln(),
            heat_capacity: 0.0,
        });
    }
    let beta = params.a / hbar_omega;
    let temperature = 1.0 / beta;
    let z = partition(params);
    let weights: Vec<f64> = (0..=l).map(|n| (-params.exponent(n)).exp() / z).collect();

    let internal_energy = neumaier_sum(weights.iter().zip(&eps).map(|(w, e)| w * e));
    let z_of_beta = ExpSum::from_terms(eps.iter().map(|&e| (1.0, e)));
    let via_derivative = -z_of_beta.derivative().eval(beta) / z_of_beta.eval(beta);
    Error::check_agree("thermodynamics", internal_energy, via_derivative, 1e-12)?;

    let free_energy = -temperature * z.ln();
    let entropy = (internal_energy - free_energy) / temperature;
    let variance = neumaier_sum(
        weights
            .iter()
            .zip(&eps)
            .map(|(w, e)| w * (e - internal_energy) * (e - internal_energy)),
    );
    let heat_capacity = beta * beta * variance;
    Ok(Thermodynamics {
        temperature,
        free_energy,
        internal_energy,
        entropy,
        heat_capacity,
    })
}
