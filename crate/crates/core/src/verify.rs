//! The verification suite: every identity the library relies on, run through
//! its independent routes and collected as [`CheckRecord`]s.
//!
//! Checks marked [`Status::Info`] are diagnostics of printed intermediate
//! formulas that are known not to hold exactly; they are reported, never
//! failed. P-function series checks outside the small-anharmonicity regime
//! (`B/A > 1/20`) downgrade failures to [`Status::Warn`].

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::coherent::{
    closed_form_state, displaced_state, evolve, identity_resolution_check, overlap,
    overlap_kernel,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ladder::{
    build_ladder, commutator_defect, delta_nested, delta_nested_brute, delta_recurrence_residual,
    j_closed, j_from_series, j_ode_residual,
};
use crate::numerics::max_abs_diff;
use crate::spectrum::{MorseSpace, ThermalParams};
use crate::statistics::{action_identity, g2, mandel_q, moment_n, DiagonalObservable};
use crate::thermal::{
    husimi, husimi_trace_check, p_moments_check, p_trace_check, thermal_average,
    thermal_correlation, thermal_moment, thermodynamics, PRoute, ThermalState,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Warn,
    Info,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    All,
    Coherent,
    Statistics,
    Thermal,
    Ladder,
}

impl Scope {
    fn includes(self, other: Scope) -> bool {
        self == Scope::All || self == other
    }

    pub fn name(self) -> &'static str {
        match self {
            Scope::All => "all",
            Scope::Coherent => "coherent",
            Scope::Statistics => "statistics",
            Scope::Thermal => "thermal",
            Scope::Ladder => "ladder",
        }
    }
}

impl std::str::FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "all" => Ok(Scope::All),
            "coherent" => Ok(Scope::Coherent),
            "statistics" => Ok(Scope::Statistics),
            "thermal" => Ok(Scope::Thermal),
            "ladder" => Ok(Scope::Ladder),
            _ => Err(format!(
                "unknown scope `{s}` (expected all, coherent, statistics, thermal, ladder)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub scope: &'static str,
    pub name: String,
    pub params: String,
    pub target: Option<f64>,
    pub value: Option<f64>,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub numeric_failure: bool,
}

impl CheckRecord {
    fn graded(
        scope: Scope,
        name: &str,
        params: String,
        target: Option<f64>,
        value: f64,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        let status = if residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        CheckRecord {
            scope: scope.name(),
            name: name.to_string(),
            params,
            target,
            value: Some(value),
            residual: Some(residual),
            tolerance: Some(tolerance),
            status,
            note: None,
            numeric_failure: false,
        }
    }

    fn info(scope: Scope, name: &str, params: String, value: f64, note: Option<String>) -> Self {
        CheckRecord {
            scope: scope.name(),
            name: name.to_string(),
            params,
            target: None,
            value: Some(value),
            residual: None,
            tolerance: None,
            status: Status::Info,
            note,
            numeric_failure: false,
        }
    }

    fn errored(scope: Scope, name: &str, params: String, err: &Error) -> Self {
        CheckRecord {
            scope: scope.name(),
            name: name.to_string(),
            params,
            target: None,
            value: None,
            residual: None,
            tolerance: None,
            status: Status::Fail,
            note: Some(err.to_string()),
            numeric_failure: matches!(err, Error::NumericFailure { .. }),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn warn_on_fail(mut self, note: &str) -> Self {
        if self.status == Status::Fail {
            self.status = Status::Warn;
            self.note = Some(match self.note.take() {
                Some(old) => format!("{old}; {note}"),
                None => note.to_string(),
            });
        }
        self
    }
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3e}"));
        write!(
            f,
            "{:?} {}::{} [{}] value={} residual={} tol={}",
            self.status,
            self.scope,
            self.name,
            self.params,
            opt(self.value),
            opt(self.residual),
            opt(self.tolerance)
        )?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub resolution: f64,
    pub normalization: f64,
    pub kernel: f64,
    pub evolution: f64,
    pub statistics: f64,
    pub g2_spread: f64,
    pub husimi_route: f64,
    pub husimi_trace: f64,
    pub p_moment: f64,
    pub p_trace: f64,
    pub p_harmonic: f64,
    pub ratio_integral: f64,
    pub thermal_route: f64,
    pub log_derivative: f64,
    pub heat_capacity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            resolution: 1e-10,
            normalization: 1e-12,
            kernel: 1e-12,
            evolution: 1e-14,
            statistics: 1e-12,
            g2_spread: 1e-11,
            husimi_route: 1e-13,
            husimi_trace: 1e-9,
            p_moment: 1e-6,
            p_trace: 1e-6,
            p_harmonic: 1e-9,
            ratio_integral: 1e-10,
            thermal_route: 1e-12,
            log_derivative: 1e-11,
            heat_capacity: 1e-6,
        }
    }
}

impl Tolerances {
    /// Overrides every tolerance with one value.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            resolution: tol,
            normalization: tol,
            kernel: tol,
            evolution: tol,
            statistics: tol,
            g2_spread: tol,
            husimi_route: tol,
            husimi_trace: tol,
            p_moment: tol,
            p_trace: tol,
            p_harmonic: tol,
            ratio_integral: tol,
            thermal_route: tol,
            log_derivative: tol,
            heat_capacity: tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub scope: Scope,
    pub ls: Vec<usize>,
    pub tolerances: Tolerances,
    pub quad_order: usize,
    pub series_tol: f64,
    pub k_max: usize,
    pub heat_kernel_order: usize,
    /// `A = beta hbar_omega` values for thermal checks.
    pub a_values: Vec<f64>,
    pub exec: Execution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            scope: Scope::All,
            ls: vec![1, 2, 3, 5, 8],
            tolerances: Tolerances::default(),
            quad_order: 200,
            series_tol: 1e-10,
            k_max: 60,
            heat_kernel_order: 96,
            a_values: vec![0.5, 1.0, 2.0],
            exec: Execution::Parallel,
        }
    }
}

/// Anharmonicity ratio `B/A` up to which series P checks are expected to pass.
pub const SMALL_ANHARMONICITY: f64 = 1.0 / 20.0;

/// Highest `l` for which the ladder diagnostics are emitted.
pub const DIAGNOSTIC_L_MAX: usize = 4;

pub fn run(config: &VerifyConfig) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for &l in &config.ls {
        let space = match MorseSpace::new(l) {
            Ok(s) => s,
            Err(e) => {
                out.push(CheckRecord::errored(config.scope, "make_space", format!("l={l}"), &e));
                continue;
            }
        };
        if config.scope.includes(Scope::Ladder) {
            ladder_checks(&space, &mut out);
        }
        if config.scope.includes(Scope::Coherent) {
            coherent_checks(&space, config, &mut out);
        }
        if config.scope.includes(Scope::Statistics) {
            statistics_checks(&space, config, &mut out);
        }
        if config.scope.includes(Scope::Thermal) {
            thermal_checks(&space, config, &mut out);
        }
    }
    out
}

/// `(pass, fail, warn, info)` counts.
pub fn tally(records: &[CheckRecord]) -> (usize, usize, usize, usize) {
    records.iter().fold((0, 0, 0, 0), |(p, f, w, i), r| match r.status {
        Status::Pass => (p + 1, f, w, i),
        Status::Fail => (p, f + 1, w, i),
        Status::Warn => (p, f, w + 1, i),
        Status::Info => (p, f, w, i + 1),
    })
}

fn push_result<F>(out: &mut Vec<CheckRecord>, scope: Scope, name: &str, params: String, f: F)
where
    F: FnOnce(String) -> Result<CheckRecord>,
{
    match f(params.clone()) {
        Ok(r) => out.push(r),
        Err(e) => out.push(CheckRecord::errored(scope, name, params, &e)),
    }
}

fn ladder_checks(space: &MorseSpace, out: &mut Vec<CheckRecord>) {
    let s = Scope::Ladder;
    let l = space.l();
    let lad = build_ladder(space, 0.0);

    let defect = commutator_defect(&lad);
    let mut off_top = 0.0f64;
    for i in 0..=l {
        for j in 0..=l {
            if !(i == l && j == l) {
                off_top = off_top.max(defect[(i, j)].norm());
            }
        }
    }
    let top_target = -(((l + 1) * (l + 1)) as f64);
    let top = defect[(l, l)].re;
    out.push(CheckRecord::graded(
        s,
        "commutator_defect_off_top",
        format!("l={l}"),
        Some(0.0),
        off_top,
        off_top,
        1e-9,
    ));
    out.push(CheckRecord::graded(
        s,
        "commutator_defect_top",
        format!("l={l}"),
        Some(top_target),
        top,
        (top - top_target).abs(),
        1e-9,
    ));
    let adj = max_abs_diff(&lad.a_plus, &lad.a_minus.adjoint());
    out.push(CheckRecord::graded(s, "adjoint_at_zero_phase", format!("l={l}"), Some(0.0), adj, adj, 0.0));
    let h = max_abs_diff(&(&lad.a_plus * &lad.a_minus), &lad.hamiltonian);
    out.push(CheckRecord::graded(s, "hamiltonian_product", format!("l={l}"), Some(0.0), h, h, 1e-12));

    if l <= DIAGNOSTIC_L_MAX {
        let mut worst = 0.0f64;
        for n in 0..=l {
            for j in 0..=4 {
                if let Ok(fast) = delta_nested(l, n, j) {
                    let slow = delta_nested_brute(l, n, j);
                    worst = worst.max((fast - slow).abs() / slow.abs().max(1.0));
                }
            }
        }
        out.push(CheckRecord::graded(
            s,
            "delta_memo_vs_nested",
            format!("l={l}, j<=4"),
            Some(0.0),
            worst,
            worst,
            1e-12,
        ));
        for n in 1..l {
            for j in 0..=2 {
                push_result(out, s, "delta_recurrence_residual", format!("l={l}, n={n}, j={j}"), |p| {
                    let r = delta_recurrence_residual(l, n, j)?;
                    Ok(CheckRecord::info(s, "delta_recurrence_residual", p, r, Some("informational".into())))
                });
            }
        }
        for n in 0..=l {
            push_result(out, s, "j_ode_residual_max", format!("l={l}, n={n}, |z|<=1"), |p| {
                let mut worst = 0.0f64;
                for k in 1..=10 {
                    worst = worst.max(j_ode_residual(l, n, 0.1 * k as f64, 1e-5)?.abs());
                }
                Ok(CheckRecord::info(s, "j_ode_residual_max", p, worst, Some("informational".into())))
            });
            push_result(out, s, "j_series_vs_closed", format!("l={l}, n={n}, |z|=0.3"), |p| {
                let series = j_from_series(l, n, 0.3, 1e-15, 80)?;
                let closed = j_closed(l, n, 0.3)?;
                Ok(CheckRecord::info(
                    s,
                    "j_series_vs_closed",
                    p,
                    series.value - closed,
                    Some(format!("series {} (converged {}), closed {}", series.value, series.converged, closed)),
                ))
            });
        }
    }
}

fn lcg_points(seed: u64, count: usize) -> Vec<f64> {
    let mut state = seed;
    (0..count)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

fn coherent_checks(space: &MorseSpace, config: &VerifyConfig, out: &mut Vec<CheckRecord>) {
    let s = Scope::Coherent;
    let l = space.l();
    let tol = &config.tolerances;
    push_result(out, s, "resolution_of_identity", format!("l={l}, order={}", config.quad_order), |p| {
        let r = identity_resolution_check(space, config.quad_order, config.exec)?;
        Ok(CheckRecord::graded(s, "resolution_of_identity", p, Some(0.0), r.max_relative, r.max_relative, tol.resolution))
    });

    let u = lcg_points(l as u64 + 17, 40);
    let labels: Vec<Complex64> = u
        .chunks(2)
        .map(|c| Complex64::from_polar(10f64.powf(4.0 * c[0] - 2.0), 2.0 * std::f64::consts::PI * c[1]))
        .collect();
    let mut norm_worst = 0.0f64;
    let mut kernel_worst = 0.0f64;
    let mut evo_worst = 0.0f64;
    for pair in labels.windows(2) {
        let a = closed_form_state(space, pair[0], 0.3);
        let b = closed_form_state(space, pair[1], 0.3);
        norm_worst = norm_worst.max((a.norm_sqr() - 1.0).abs());
        if let Ok(o) = overlap(&a, &b) {
            kernel_worst = kernel_worst.max((o - overlap_kernel(l, pair[0], pair[1])).norm());
        }
        let e = evolve(&a, 0.7);
        let want = closed_form_state(space, pair[0], 1.0);
        for (x, y) in e.coeffs.iter().zip(&want.coeffs) {
            evo_worst = evo_worst.max((x - y).norm());
        }
    }
    out.push(CheckRecord::graded(s, "normalization", format!("l={l}, 20 labels"), Some(1.0), norm_worst, norm_worst, tol.normalization));
    out.push(CheckRecord::graded(s, "overlap_kernel", format!("l={l}, 19 pairs"), Some(0.0), kernel_worst, kernel_worst, tol.kernel));
    let evo = CheckRecord::graded(s, "temporal_stability", format!("l={l}, alpha=0.3, t=0.7"), Some(0.0), evo_worst, evo_worst, tol.evolution);
    out.push(evo);

    if l <= DIAGNOSTIC_L_MAX {
        for z in [0.1, 0.3, 0.6] {
            push_result(out, s, "displacement_fidelity", format!("l={l}, z={z}"), |p| {
                let d = displaced_state(space, Complex64::new(z, 0.0), 0.0)?;
                let mut note = format!(
                    "fidelity at Z=tan|z|: {:.12}; best-fit Z = {:.12} (fidelity {:.12}); tan|z| = {:.12}",
                    d.fidelity_tan_map,
                    d.best_fit_z.re,
                    d.best_fidelity,
                    z.tan()
                );
                if l == 1 {
                    note.push_str(&format!("; tan(sqrt(3)|z|) = {:.12}", (3f64.sqrt() * z).tan()));
                }
                Ok(CheckRecord::info(s, "displacement_fidelity", p, d.best_fidelity, Some(note)))
            });
        }
    }
}

fn statistics_checks(space: &MorseSpace, config: &VerifyConfig, out: &mut Vec<CheckRecord>) {
    let s = Scope::Statistics;
    let l = space.l();
    let tol = &config.tolerances;
    let xs: Vec<f64> = (0..50).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 49.0)).collect();
    push_result(out, s, "g2_constant", format!("l={l}, 50 x in [1e-2,1e2]"), |p| {
        let vals = xs
            .iter()
            .map(|&x| g2(&closed_form_state(space, Complex64::new(x.sqrt(), 0.0), 0.0)))
            .collect::<Result<Vec<_>>>()?;
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let target = (l as f64 - 1.0) / l as f64;
        Ok(CheckRecord::graded(s, "g2_constant", p, Some(target), vals[0], hi - lo, tol.g2_spread))
    });
    push_result(out, s, "mandel_q_closed_form", format!("l={l}, 50 x"), |p| {
        let mut worst = 0.0f64;
        let mut inside = true;
        for &x in &xs {
            let q = mandel_q(&closed_form_state(space, Complex64::new(x.sqrt(), 0.0), 0.0))?;
            worst = worst.max((q + x / (1.0 + x)).abs());
            inside &= q > -1.0 && q < 0.0;
        }
        let r = CheckRecord::graded(s, "mandel_q_closed_form", p, Some(0.0), worst, worst, tol.statistics);
        Ok(if inside { r } else { CheckRecord { status: Status::Fail, ..r }.with_note("Q left (-1, 0)") })
    });
    push_result(out, s, "action_identity", format!("l={l}, 50 x"), |p| {
        let mut worst = 0.0f64;
        for &x in &xs {
            let a = action_identity(&closed_form_state(space, Complex64::new(x.sqrt(), 0.0), 0.0))?;
            worst = worst.max((a.mean_energy - a.f_of_x).abs() / a.f_of_x.abs().max(1.0));
        }
        Ok(CheckRecord::graded(s, "action_identity", p, Some(0.0), worst, worst, tol.statistics))
    });
    push_result(out, s, "moment_closed_forms", format!("l={l}, s=1,2, 50 x"), |p| {
        let lf = l as f64;
        let mut worst = 0.0f64;
        for &x in &xs {
            let st = closed_form_state(space, Complex64::new(x.sqrt(), 0.0), 0.0);
            let q = x / (1.0 + x);
            let m1 = moment_n(&st, 1)?;
            let m2 = moment_n(&st, 2)?;
            let c1 = lf * q;
            let c2 = lf * q + lf * (lf - 1.0) * q * q;
            worst = worst
                .max((m1 - c1).abs() / c1.max(1.0))
                .max((m2 - c2).abs() / c2.max(1.0));
        }
        Ok(CheckRecord::graded(s, "moment_closed_forms", p, Some(0.0), worst, worst, tol.statistics))
    });
}

fn thermal_checks(space: &MorseSpace, config: &VerifyConfig, out: &mut Vec<CheckRecord>) {
    let s = Scope::Thermal;
    let l = space.l();
    let tol = &config.tolerances;
    let order = config.quad_order;
    let series = PRoute::Series {
        tol: config.series_tol,
        k_max: config.k_max,
    };
    let kernel = PRoute::HeatKernel {
        order: config.heat_kernel_order,
    };
    for &a in &config.a_values {
        let tag = format!("l={l}, A={a}");
        let params = match ThermalParams::new(l, a) {
            Ok(p) => p,
            Err(e) => {
                out.push(CheckRecord::errored(s, "thermal_params", tag, &e));
                continue;
            }
        };
        let state = match ThermalState::new(params) {
            Ok(t) => t,
            Err(e) => {
                out.push(CheckRecord::errored(s, "thermal_state", tag, &e));
                continue;
            }
        };
        push_result(out, s, "husimi_dual_route", tag.clone(), |p| {
            let mut worst = 0.0f64;
            for x in [0.0, 0.01, 0.3, 1.0, 4.0, 50.0, 1e4] {
                let h = husimi(&state, x)?;
                worst = worst.max((h.direct - h.operator_form).abs() / h.direct.abs().max(1.0));
            }
            Ok(CheckRecord::graded(s, "husimi_dual_route", p, Some(0.0), worst, worst, tol.husimi_route))
        });
        push_result(out, s, "husimi_trace", tag.clone(), |p| {
            let r = husimi_trace_check(&state, order, config.exec)?;
            Ok(CheckRecord::graded(s, "husimi_trace", p, Some(1.0), 1.0 + r, r, tol.husimi_trace))
        });
        push_result(out, s, "thermal_moments", format!("{tag}, s<=4"), |p| {
            for k in 0..=4 {
                thermal_moment(&state, k)?;
            }
            Ok(CheckRecord::graded(s, "thermal_moments", p, None, 0.0, 0.0, tol.thermal_route))
        });
        push_result(out, s, "thermal_g2_log_derivative", tag.clone(), |p| {
            let c = thermal_correlation(&state)?;
            let d = c.g2_discrepancy().max(c.q_discrepancy()) / c.g2_moments.abs().max(1.0);
            Ok(CheckRecord::graded(s, "thermal_g2_log_derivative", p, Some(c.g2_moments), c.g2_log_derivative, d, tol.log_derivative))
        });
        push_result(out, s, "heat_capacity_fluctuation", tag.clone(), |p| {
            let t = thermodynamics(&params, 1.0)?;
            let dt = 1e-4 * t.temperature;
            let up = thermodynamics(&ThermalParams::new(l, 1.0 / (t.temperature + dt))?, 1.0)?;
            let dn = thermodynamics(&ThermalParams::new(l, 1.0 / (t.temperature - dt))?, 1.0)?;
            let fd = (up.internal_energy - dn.internal_energy) / (2.0 * dt);
            let rel = (fd - t.heat_capacity).abs() / t.heat_capacity.abs().max(1e-300);
            Ok(CheckRecord::graded(s, "heat_capacity_fluctuation", p, Some(fd), t.heat_capacity, rel, tol.heat_capacity))
        });

        let ratio = params.b / params.a;
        let outside = ratio > SMALL_ANHARMONICITY;
        for (route, label) in [(series, "series"), (kernel, "heat-kernel")] {
            push_result(out, s, "p_moments", format!("{tag}, route={label}"), |p| {
                let checks = p_moments_check(&state, order, route, config.exec)?;
                let worst = checks.iter().map(|c| c.relative).fold(0.0, f64::max);
                let unconverged = checks.first().map_or(0, |c| c.unconverged_nodes);
                let mut r = CheckRecord::graded(s, "p_moments", p, Some(0.0), worst, worst, tol.p_moment);
                if unconverged > 0 && r.status == Status::Pass {
                    r.status = Status::Fail;
                }
                if unconverged > 0 {
                    r = r.with_note(format!("{unconverged}/{order} nodes with unconverged series"));
                }
                Ok(if route == series && outside {
                    r.warn_on_fail(&format!(
                        "B/A = {ratio:.4} above {SMALL_ANHARMONICITY}; series route may not converge"
                    ))
                } else {
                    r
                })
            });
            push_result(out, s, "p_trace", format!("{tag}, route={label}"), |p| {
                let t = p_trace_check(&state, order, route, config.exec)?;
                let mut r = CheckRecord::graded(s, "p_trace", p, Some(1.0), t.value, t.residual, tol.p_trace);
                if t.unconverged_nodes > 0 {
                    r.status = Status::Fail;
                    r = r.with_note(format!("{}/{order} nodes with unconverged series", t.unconverged_nodes));
                }
                Ok(if route == series && outside {
                    r.warn_on_fail(&format!("B/A = {ratio:.4} above {SMALL_ANHARMONICITY}"))
                } else {
                    r
                })
            });
        }
        push_result(out, s, "thermal_average_energy", format!("{tag}, route=heat-kernel"), |p| {
            let avg = thermal_average(&state, &DiagonalObservable::energy(space), order, kernel, config.exec)?;
            Ok(CheckRecord::graded(s, "thermal_average_energy", p, Some(avg.basis_sum), avg.quadrature, avg.residual / avg.basis_sum.abs().max(1.0), tol.p_moment))
        });

        // harmonic reference: B = 0 at the same A
        let harmonic = ThermalParams { a, b: 0.0, l };
        push_result(out, s, "p_moments_harmonic", tag.clone(), |p| {
            let h = ThermalState::new(harmonic)?;
            let checks = p_moments_check(&h, order, series, config.exec)?;
            let worst = checks.iter().map(|c| c.relative).fold(0.0, f64::max);
            Ok(CheckRecord::graded(s, "p_moments_harmonic", p, Some(0.0), worst, worst, tol.p_harmonic))
        });
        push_result(out, s, "ratio_integral_inner", tag.clone(), |p| {
            let h = ThermalState::new(harmonic)?;
            let t = p_trace_check(&h, order, series, config.exec)?;
            let inner = t
                .inner
                .ok_or_else(|| Error::domain("ratio_integral_inner", "needs A > 0"))?;
            let d = (inner.quadrature - inner.closed_form).abs()
                .max((inner.scaled - inner.geometric_sum).abs() / inner.geometric_sum);
            Ok(CheckRecord::graded(s, "ratio_integral_inner", p, Some(inner.closed_form), inner.quadrature, d, tol.ratio_integral))
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scopes_parse() {
        assert_eq!("thermal".parse::<Scope>().unwrap(), Scope::Thermal);
        assert!("bogus".parse::<Scope>().is_err());
    }

    #[test]
    fn ladder_scope_has_informational_diagnostics() {
        let cfg = VerifyConfig {
            scope: Scope::Ladder,
            ls: vec![2],
            ..Default::default()
        };
        let r = run(&cfg);
        let (_, fail, _, info) = tally(&r);
        assert_eq!(fail, 0, "{:#?}", r.iter().filter(|c| c.status == Status::Fail).collect::<Vec<_>>());
        assert!(info > 0);
        assert!(r.iter().any(|c| c.name == "delta_recurrence_residual"));
        assert!(r.iter().any(|c| c.name == "j_ode_residual_max"));
    }

    #[test]
    fn coherent_scope_passes() {
        let cfg = VerifyConfig {
            scope: Scope::Coherent,
            ls: vec![2, 5, 8],
            ..Default::default()
        };
        let r = run(&cfg);
        assert_eq!(tally(&r).1, 0, "{r:#?}");
        let moments: Vec<_> = r.iter().filter(|c| c.name == "resolution_of_identity").collect();
        assert_eq!(moments.len(), 3);
        assert!(moments.iter().all(|c| c.residual.unwrap() < 1e-10));
    }

    #[test]
    fn failure_is_recorded_not_raised() {
        let cfg = VerifyConfig {
            scope: Scope::Statistics,
            ls: vec![3],
            tolerances: Tolerances::uniform(0.0),
            ..Default::default()
        };
        let r = run(&cfg);
        assert!(!r.is_empty());
    }
}
