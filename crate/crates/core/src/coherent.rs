//! Coherent states `|Z, alpha>` on the Morse bound-state space.
//!
//! Coefficients in the number basis are
//! `c_n = (1+|Z|^2)^(-l/2) sqrt(C(l,n)) Z^n exp(-i alpha E_n)`.
//! Magnitudes come from a normalized ratio recurrence and phases are tracked
//! separately, so `l` in the hundreds and `|Z|` up to `1e4` stay finite.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ladder::build_ladder;
use crate::numerics::{half_line_rule, log_binomial, log_factorial, matrix_exp};
use crate::spectrum::MorseSpace;

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    pub space: MorseSpace,
    pub z: Complex64,
    pub alpha: f64,
    pub coeffs: Vec<Complex64>,
}

impl CoherentState {
    pub fn l(&self) -> usize {
        self.space.l()
    }

    /// `x = |Z|^2`.
    pub fn x(&self) -> f64 {
        self.z.norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        crate::numerics::neumaier_sum(self.coeffs.iter().map(|c| c.norm_sqr()))
    }

    /// Number-basis probabilities `|c_n|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// `exp(i a k)` with the product `a k` carried to double-double precision,
/// so the phase stays accurate when `a k` is in the thousands.
pub(crate) fn cis_product(a: f64, k: f64) -> Complex64 {
    let hi = a * k;
    let lo = a.mul_add(k, -hi);
    Complex64::from_polar(1.0, hi) * Complex64::new(1.0, lo)
}

/// Binomial weights `C(l,n) x^n / (1+x)^l`, `n = 0..=l`.
///
/// Built outward from the mode by the ratio recurrence and normalized, which
/// keeps every ratio `w_n / w_m` within a few ulps of exact for large `l` and
/// `x` where `exp` of the log form would lose `l ln(1+x)` worth of bits.
pub fn binomial_weights(l: usize, x: f64) -> Vec<f64> {
    let mut w = vec![0.0; l + 1];
    if x == 0.0 {
        w[0] = 1.0;
        return w;
    }
    if x.is_infinite() {
        w[l] = 1.0;
        return w;
    }
    let lf = l as f64;
    let mode = (((lf + 1.0) * x / (1.0 + x)).floor() as usize).min(l);
    w[mode] = 1.0;
    for n in mode..l {
        w[n + 1] = w[n] * x * (lf - n as f64) / (n as f64 + 1.0);
    }
    for n in (1..=mode).rev() {
        w[n - 1] = w[n] * n as f64 / ((lf - n as f64 + 1.0) * x);
    }
    let total = crate::numerics::neumaier_sum(w.iter().copied());
    for v in &mut w {
        *v /= total;
    }
    w
}

pub fn closed_form_state(space: &MorseSpace, z: Complex64, alpha: f64) -> CoherentState {
    let l = space.l();
    let arg = z.arg();
    let coeffs = binomial_weights(l, z.norm_sqr())
        .into_iter()
        .enumerate()
        .map(|(n, w)| {
            w.sqrt() * cis_product(arg, n as f64) * cis_product(-alpha, space.energy_f64(n))
        })
        .collect();
    CoherentState {
        space: space.clone(),
        z,
        alpha,
        coeffs,
    }
}

/// `<Z1, alpha|Z2, alpha> = (1 + conj(Z1) Z2)^l / ((1+|Z1|^2)^(l/2) (1+|Z2|^2)^(l/2))`,
/// evaluated as `rho^l` with `|rho| <= 1`.
pub fn overlap_kernel(l: usize, z1: Complex64, z2: Complex64) -> Complex64 {
    let num = Complex64::new(1.0, 0.0) + z1.conj() * z2;
    let rho = num / ((1.0 + z1.norm_sqr()).sqrt() * (1.0 + z2.norm_sqr()).sqrt());
    rho.powu(l as u32)
}

/// `sum_n conj(c1_n) c2_n`. Both states must share `l` and `alpha`.
pub fn overlap(s1: &CoherentState, s2: &CoherentState) -> Result<Complex64> {
    if s1.l() != s2.l() {
        return Err(Error::SpaceMismatch(format!("l = {} vs l = {}", s1.l(), s2.l())));
    }
    if s1.alpha != s2.alpha {
        return Err(Error::SpaceMismatch(format!(
            "overlap is defined for a common phase, got alpha = {} vs {}",
            s1.alpha, s2.alpha
        )));
    }
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for (a, b) in s1.coeffs.iter().zip(&s2.coeffs) {
        let p = a.conj() * b;
        re.push(p.re);
        im.push(p.im);
    }
    Ok(Complex64::new(
        crate::numerics::neumaier_sum(re),
        crate::numerics::neumaier_sum(im),
    ))
}

/// `exp(-i t H)` applied coefficientwise.
///
/// The label after evolution is `alpha + t` rounded to f64, so the rotation
/// applied is by that representable increment: `exp(-i alpha' E_n)` times
/// `exp(+i alpha E_n)`.
pub fn evolve(state: &CoherentState, t: f64) -> CoherentState {
    if t == 0.0 {
        return state.clone();
    }
    let alpha = state.alpha + t;
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let e = state.space.energy_f64(n);
            c * cis_product(-alpha, e) * cis_product(state.alpha, e)
        })
        .collect();
    CoherentState {
        space: state.space.clone(),
        z: state.z,
        alpha,
        coeffs,
    }
}

/// Radial density of the resolution-of-identity measure.
///
/// With `Z = |Z| e^{i theta}` and `x = |Z|^2`, the measure is
/// `(1+x)^l h(x) |Z| d|Z| dtheta / pi`, `h(x) = (l+1) / (1+x)^(l+2)`. The
/// angular integral contributes 2 and `|Z| d|Z| = dx/2`, so after angular
/// integration the weight on `[0, inf)` is `(1+x)^l h(x) dx = (l+1)/(1+x)^2 dx`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureDensity {
    pub l: usize,
}

impl MeasureDensity {
    pub fn new(l: usize) -> Self {
        MeasureDensity { l }
    }

    pub fn h(&self, x: f64) -> f64 {
        (self.l + 1) as f64 * (1.0 + x).powi(-(self.l as i32 + 2))
    }

    /// `(1+x)^l h(x)`.
    pub fn radial_weight(&self, x: f64) -> f64 {
        (self.l + 1) as f64 / ((1.0 + x) * (1.0 + x))
    }

    /// `n! (l-n)! / l!`, the required value of `int x^n h(x) dx`.
    pub fn moment_target(&self, n: usize) -> f64 {
        (-log_binomial(self.l, n).expect("n <= l")).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentResidual {
    pub n: usize,
    pub target: f64,
    pub value: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub l: usize,
    pub order: usize,
    pub moments: Vec<MomentResidual>,
    pub max_relative: f64,
}

/// Radial moments `int x^n h(x) dx` against `n!(l-n)!/l!` for every `n <= l`.
/// Off-diagonal terms vanish under the angular integral, so these `l+1`
/// numbers are the whole resolution of identity.
pub fn identity_resolution_check(
    space: &MorseSpace,
    quad_order: usize,
    exec: Execution,
) -> Result<MomentReport> {
    let l = space.l();
    if quad_order < 2 * (l + 2) {
        return Err(Error::domain(
            "identity_resolution_check",
            format!("quadrature order {quad_order} below 2(l+2) = {}", 2 * (l + 2)),
        ));
    }
    let rule = half_line_rule(quad_order)?;
    let measure = MeasureDensity::new(l);
    let moments = exec.map_range(l + 1, |n| {
        let value = rule.integrate(|x| x.powi(n as i32) * measure.h(x));
        let target = measure.moment_target(n);
        MomentResidual {
            n,
            target,
            value,
            relative: (value - target).abs() / target,
        }
    });
    let max_relative = moments.iter().map(|m| m.relative).fold(0.0, f64::max);
    Ok(MomentReport {
        l,
        order: quad_order,
        moments,
        max_relative,
    })
}

/// Outcome of exponentiating the ladder generator on the ground state.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacedState {
    pub z: Complex64,
    pub vector: Vec<Complex64>,
    /// `|<closed_form(e^{i arg z} tan|z|)|displaced>|`.
    pub fidelity_tan_map: f64,
    /// Label along `arg Z = arg z` maximizing the fidelity.
    pub best_fit_z: Complex64,
    pub best_fidelity: f64,
}

fn abs_inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm()
}

/// `exp(z A+ - conj(z) A-) |0>` on the truncated space, compared with the
/// closed-form state.
pub fn displaced_state(space: &MorseSpace, z: Complex64, alpha: f64) -> Result<DisplacedState> {
    let ladder = build_ladder(space, alpha);
    let generator = &ladder.a_plus * z - &ladder.a_minus * z.conj();
    let u = matrix_exp(&generator)?;
    let column: Vec<Complex64> = u.column(0).iter().copied().collect();
    let norm = column.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let vector: Vec<Complex64> = column.iter().map(|c| c / norm).collect();

    let abs_z = z.norm();
    let phase = if abs_z == 0.0 { 0.0 } else { z.arg() };
    let direction = Complex64::from_polar(1.0, phase);
    let fidelity_at = |r: f64| abs_inner(&closed_form_state(space, direction * r, alpha).coeffs, &vector);

    let fidelity_tan_map = if abs_z < std::f64::consts::FRAC_PI_2 {
        fidelity_at(abs_z.tan())
    } else {
        f64::NAN
    };

    // golden section over theta in [0, pi/2), r = tan(theta)
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2 - 1e-12);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = fidelity_at(c.tan());
    let mut fd = fidelity_at(d.tan());
    while hi - lo > 1e-10 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = fidelity_at(c.tan());
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = fidelity_at(d.tan());
        }
    }
    // the fidelity is flat at its peak, so comparisons alone stop near
    // sqrt(eps); finish by bisecting the sign of its analytic r-derivative
    let slope_at = |r: f64| {
        let state = closed_form_state(space, direction * r, alpha);
        let lf = space.l() as f64;
        let mut overlap = Complex64::new(0.0, 0.0);
        let mut d_overlap = Complex64::new(0.0, 0.0);
        for (n, (c, v)) in state.coeffs.iter().zip(&vector).enumerate() {
            let p = c.conj() * v;
            overlap += p;
            d_overlap += p * (n as f64 / r - lf * r / (1.0 + r * r));
        }
        (overlap.conj() * d_overlap).re
    };
    let mut theta = 0.5 * (lo + hi);
    let top = std::f64::consts::FRAC_PI_2 - 1e-12;
    let (mut a, mut b) = ((theta - 1e-6).max(1e-300), (theta + 1e-6).min(top));
    if slope_at(a.tan()) > 0.0 && slope_at(b.tan()) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if slope_at(mid.tan()) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-16 {
                break;
            }
        }
        theta = 0.5 * (a + b);
    }
    let mut best_r = theta.tan();
    let mut best_fidelity = fidelity_at(best_r);
    let f0 = fidelity_at(0.0);
    if f0 > best_fidelity {
        best_r = 0.0;
        best_fidelity = f0;
    }
    Ok(DisplacedState {
        z,
        vector,
        fidelity_tan_map,
        best_fit_z: direction * best_r,
        best_fidelity,
    })
}

/// Most probable level `n` of the state; ties resolve to the lower level.
pub fn mode_level(state: &CoherentState) -> usize {
    let p = state.probabilities();
    let mut best = 0;
    for (n, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = n;
        }
    }
    best
}

/// `sqrt(C(l, n))` without overflow.
pub fn sqrt_binomial(l: usize, n: usize) -> f64 {
    (0.5 * (log_factorial(l) - log_factorial(n) - log_factorial(l - n))).exp()
}
