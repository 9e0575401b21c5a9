use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use morse_cs::coherent::closed_form_state;
use morse_cs::spectrum::PresetTable;
use morse_cs::statistics::{action_function, expectation, g2, mandel_q, moment_n};
use morse_cs::thermal::{
    husimi, p_function, p_function_heat_kernel, thermal_correlation, thermal_moment,
    thermodynamics,
};
use morse_cs::verify::{self, CheckRecord, Status, Tolerances, VerifyConfig};
use morse_cs::{
    Complex64, DiagonalObservable, Error, Execution, MorseSpace, ThermalParams, ThermalState,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::table::{Cell, Table};
use crate::{
    Cli, Command, Format, OutputArgs, SeriesArgs, SpaceArgs, TemperatureArgs, EXIT_CHECK_FAILURE,
    EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_WARNINGS,
};

/// Agreement required between the moment and log-derivative thermal `g2`.
const G2_ROUTE_TOL: f64 = 1e-11;

struct Outcome {
    tables: Vec<Table>,
    warnings: Vec<String>,
    numeric_failures: usize,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            tables: Vec::new(),
            warnings: Vec::new(),
            numeric_failures: 0,
        }
    }

    /// Value for a table cell. Domain errors become the null marker; anything
    /// else is also counted as a numeric failure.
    fn cell(&mut self, r: morse_cs::Result<f64>) -> Cell {
        match r {
            Ok(v) => Cell::Real(v),
            Err(Error::Domain { .. }) => Cell::Null,
            Err(e) => {
                self.numeric_failures += 1;
                self.warnings.push(e.to_string());
                Cell::Null
            }
        }
    }
}

fn usage(e: &Error) -> u8 {
    match e {
        Error::NumericFailure { .. } | Error::Consistency { .. } => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

pub fn run(cli: Cli, echo: &str) -> u8 {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = match cli.command {
        Command::Verify {
            scope,
            l,
            tol,
            kmax,
            quad_order,
            a_grid,
            format,
            out,
        } => {
            let mut config = VerifyConfig {
                scope,
                k_max: kmax,
                quad_order,
                exec,
                ..VerifyConfig::default()
            };
            if let Some(ls) = l {
                config.ls = ls;
            }
            if let Some(t) = tol {
                config.tolerances = Tolerances::uniform(t);
            }
            if let Some(g) = a_grid {
                config.a_values = g.points();
            }
            return run_verify(&config, echo, format, out.as_deref());
        }
        Command::Spectrum {
            space,
            hbar_omega,
            output,
        } => resolve(&space)
            .and_then(|s| cmd_spectrum(&s, hbar_omega))
            .map(|o| (o, output)),
        Command::Coherent {
            space,
            z,
            alpha,
            output,
        } => match parse_label(&z) {
            Ok(z) => resolve(&space).map(|s| (cmd_coherent(&s, z, alpha), output)),
            Err(msg) => {
                eprintln!("error: {msg}");
                return EXIT_USAGE;
            }
        },
        Command::Stats {
            space,
            x_grid,
            alpha,
            output,
        } => resolve(&space).map(|s| (cmd_stats(&s, &x_grid.points(), alpha, exec), output)),
        Command::Husimi {
            space,
            temps,
            x_grid,
            output,
        } => resolve(&space).and_then(|s| {
            let a = a_values(&temps)?;
            let mut o = Outcome::new();
            husimi_table(&mut o, &s, &a, &x_grid.points(), exec)?;
            Ok((o, output))
        }),
        Command::Pfunction {
            space,
            temps,
            x_grid,
            series,
            output,
        } => resolve(&space).and_then(|s| {
            let a = a_values(&temps)?;
            let mut o = Outcome::new();
            pfunction_table(&mut o, &s, &a, &x_grid.points(), &series, exec)?;
            Ok((o, output))
        }),
        Command::Thermal {
            space,
            temps,
            husimi_x_grid,
            pfunction_x_grid,
            series,
            output,
        } => resolve(&space).and_then(|s| {
            let a = a_values(&temps)?;
            let mut o = cmd_thermal(&s, &a, temps.hbar_omega, exec)?;
            if let Some(g) = husimi_x_grid {
                husimi_table(&mut o, &s, &a, &g.points(), exec)?;
            }
            if let Some(g) = pfunction_x_grid {
                pfunction_table(&mut o, &s, &a, &g.points(), &series, exec)?;
            }
            Ok((o, output))
        }),
    };
    let (mut outcome, output) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return usage(&e);
        }
    };
    for t in &mut outcome.tables {
        t.meta.insert(0, ("command".into(), echo.into()));
        t.meta.insert(1, ("version".into(), env!("CARGO_PKG_VERSION").into()));
    }
    match write_tables(&outcome.tables, &output) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Ok(()) => {}
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if outcome.numeric_failures > 0 {
        EXIT_NUMERIC
    } else if !outcome.warnings.is_empty() {
        eprintln!("computed with {} warning(s)", outcome.warnings.len());
        EXIT_WARNINGS
    } else {
        EXIT_OK
    }
}

fn resolve(args: &SpaceArgs) -> morse_cs::Result<MorseSpace> {
    match (&args.l, &args.molecule) {
        (Some(l), None) => MorseSpace::from_signed(*l),
        (None, Some(name)) => {
            let mut presets = PresetTable::builtin();
            if let Some(path) = &args.preset_file {
                presets.merge(PresetTable::load(path)?);
            }
            presets.resolve(name)
        }
        _ => Err(Error::domain("space", "give exactly one of --l or --molecule")),
    }
}

fn parse_label(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{p}` is not a finite number"))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected re[,im], got `{s}`")),
    }
}

fn a_values(t: &TemperatureArgs) -> morse_cs::Result<Vec<f64>> {
    if !(t.hbar_omega > 0.0) || !t.hbar_omega.is_finite() {
        return Err(Error::domain("temperature", "--hbar-omega must be positive"));
    }
    match (&t.beta_grid, &t.a_grid) {
        (Some(g), None) => Ok(g.points().into_iter().map(|b| b * t.hbar_omega).collect()),
        (None, Some(g)) => Ok(g.points()),
        _ => Err(Error::domain("temperature", "give exactly one of --beta-grid or --a-grid")),
    }
}

fn space_meta(t: &mut Table, space: &MorseSpace) {
    t.meta("l", space.l());
    if let Some(p) = space.preset() {
        t.meta("molecule", &p.name);
        t.meta("tabulated 2(l+1)", p.tabulated);
        t.meta("rounding residual", format!("{:+.4}", p.residual));
    }
}

fn cmd_spectrum(space: &MorseSpace, hbar_omega: Option<f64>) -> morse_cs::Result<Outcome> {
    let hw = hbar_omega.unwrap_or(1.0);
    let mut t = Table::new("spectrum", &["n", "E_n", "eps_n"]);
    space_meta(&mut t, space);
    t.meta("hbar_omega", hw);
    for (n, &e) in space.energies().iter().enumerate() {
        let eps = space.dimensional_energy(n, hw)?;
        t.push(vec![Cell::Int(n as i64), Cell::Int(e as i64), Cell::Real(eps)]);
    }
    let mut o = Outcome::new();
    o.tables.push(t);
    Ok(o)
}

fn cmd_coherent(space: &MorseSpace, z: Complex64, alpha: f64) -> Outcome {
    let state = closed_form_state(space, z, alpha);
    let mut t = Table::new("coherent", &["n", "E_n", "re", "im", "probability"]);
    space_meta(&mut t, space);
    t.meta("Z", format!("{},{}", z.re, z.im));
    t.meta("alpha", alpha);
    t.meta("norm^2", state.norm_sqr());
    for (n, (c, p)) in state.coeffs.iter().zip(state.probabilities()).enumerate() {
        t.push(vec![
            Cell::Int(n as i64),
            Cell::Int(space.energies()[n] as i64),
            Cell::Real(c.re),
            Cell::Real(c.im),
            Cell::Real(p),
        ]);
    }
    let mut o = Outcome::new();
    o.tables.push(t);
    o
}

fn cmd_stats(space: &MorseSpace, xs: &[f64], alpha: f64, exec: Execution) -> Outcome {
    let energy = DiagonalObservable::energy(space);
    let rows = exec.map(xs, |&x| {
        let state = closed_form_state(space, Complex64::new(x.sqrt(), 0.0), alpha);
        (
            x,
            moment_n(&state, 1),
            moment_n(&state, 2),
            g2(&state),
            mandel_q(&state),
            expectation(&state, &energy),
            action_function(space.l(), x),
        )
    });
    let mut o = Outcome::new();
    let mut t = Table::new("stats", &["x", "N", "N2", "g2", "Q", "H", "f"]);
    space_meta(&mut t, space);
    t.meta("alpha", alpha);
    for (x, n1, n2, g, q, h, f) in rows {
        let row = vec![
            Cell::Real(x),
            o.cell(n1),
            o.cell(n2),
            o.cell(g),
            o.cell(q),
            o.cell(h),
            Cell::Real(f),
        ];
        t.push(row);
    }
    o.tables.push(t);
    o
}

fn thermal_state(l: usize, a: f64) -> morse_cs::Result<ThermalState> {
    ThermalState::new(ThermalParams::new(l, a)?)
}

fn cmd_thermal(
    space: &MorseSpace,
    a_values: &[f64],
    hbar_omega: f64,
    exec: Execution,
) -> morse_cs::Result<Outcome> {
    let l = space.l();
    let states = a_values
        .iter()
        .map(|&a| thermal_state(l, a))
        .collect::<morse_cs::Result<Vec<_>>>()?;
    let rows = exec.map(&states, |st| {
        (
            thermal_moment(st, 1),
            thermal_moment(st, 2),
            thermal_correlation(st),
            thermodynamics(&st.params, hbar_omega),
        )
    });
    let mut o = Outcome::new();
    let mut t = Table::new(
        "thermal",
        &[
            "A", "B", "Z", "N", "N2", "g2", "Q", "g2_route_gap", "F", "U", "S", "C_v",
        ],
    );
    space_meta(&mut t, space);
    t.meta("hbar_omega", hbar_omega);
    t.meta("units", "k_B = 1; F, U and T in the units of hbar_omega");
    for (st, (n1, n2, corr, thermo)) in states.iter().zip(rows) {
        let (a, b) = (st.params.a, st.params.b);
        let mut row = vec![Cell::Real(a), Cell::Real(b), Cell::Real(st.partition)];
        row.push(o.cell(n1));
        row.push(o.cell(n2));
        match corr {
            Ok(c) => {
                let gap = c.g2_discrepancy().max(c.q_discrepancy());
                if gap > G2_ROUTE_TOL * c.g2_moments.abs().max(1.0) {
                    o.warnings.push(format!(
                        "A = {a}: g2 moment and log-derivative routes differ by {gap:.3e}"
                    ));
                }
                row.extend([c.g2_moments.into(), c.q_moments.into(), gap.into()]);
            }
            Err(e) => {
                let c = o.cell(Err(e));
                row.extend([c.clone(), c.clone(), c]);
            }
        }
        match thermo {
            Ok(th) => row.extend([
                th.free_energy.into(),
                th.internal_energy.into(),
                th.entropy.into(),
                th.heat_capacity.into(),
            ]),
            Err(e) => {
                let c = o.cell(Err(e));
                row.extend([c.clone(), c.clone(), c.clone(), c]);
            }
        }
        t.push(row);
    }
    o.tables.push(t);
    Ok(o)
}

fn pairs(a_values: &[f64], xs: &[f64]) -> Vec<(f64, f64)> {
    a_values
        .iter()
        .flat_map(|&a| xs.iter().map(move |&x| (a, x)))
        .collect()
}

fn husimi_table(
    o: &mut Outcome,
    space: &MorseSpace,
    a_values: &[f64],
    xs: &[f64],
    exec: Execution,
) -> morse_cs::Result<()> {
    let l = space.l();
    for &a in a_values {
        thermal_state(l, a)?;
    }
    let values = exec.map(&pairs(a_values, xs), |&(a, x)| {
        thermal_state(l, a).and_then(|st| husimi(&st, x))
    });
    let mut t = Table::new("husimi", &["A", "x", "husimi", "husimi_operator_form"]);
    space_meta(&mut t, space);
    for ((a, x), v) in pairs(a_values, xs).into_iter().zip(values) {
        let (d, op) = match v {
            Ok(h) => (Cell::Real(h.direct), Cell::Real(h.operator_form)),
            Err(e) => {
                let c = o.cell(Err(e));
                (c.clone(), c)
            }
        };
        t.push(vec![Cell::Real(a), Cell::Real(x), d, op]);
    }
    o.tables.push(t);
    Ok(())
}

fn pfunction_table(
    o: &mut Outcome,
    space: &MorseSpace,
    a_values: &[f64],
    xs: &[f64],
    series: &SeriesArgs,
    exec: Execution,
) -> morse_cs::Result<()> {
    let l = space.l();
    for &a in a_values {
        thermal_state(l, a)?;
    }
    let grid = pairs(a_values, xs);
    let values = exec.map(&grid, |&(a, x)| {
        thermal_state(l, a).and_then(|st| {
            Ok((
                st.params.b,
                p_function(&st, x, series.tol, series.kmax)?,
                p_function_heat_kernel(&st, x, series.quad_order)?,
            ))
        })
    });
    let mut t = Table::new(
        "pfunction",
        &["A", "B", "x", "p_series", "k_used", "converged", "p_heat_kernel"],
    );
    space_meta(&mut t, space);
    t.meta("tol", series.tol);
    t.meta("kmax", series.kmax);
    t.meta("heat kernel order", series.quad_order);
    let mut unconverged = 0usize;
    for ((a, x), v) in grid.into_iter().zip(values) {
        match v {
            Ok((b, s, hk)) => {
                if !s.converged {
                    unconverged += 1;
                }
                t.push(vec![
                    Cell::Real(a),
                    Cell::Real(b),
                    Cell::Real(x),
                    Cell::Real(s.value),
                    Cell::Int(s.k_used as i64),
                    Cell::Bool(s.converged),
                    Cell::Real(hk),
                ]);
            }
            Err(e) => {
                let c = o.cell(Err(e));
                let b = a / (2.0 * (l + 1) as f64);
                t.push(vec![
                    Cell::Real(a),
                    Cell::Real(b),
                    Cell::Real(x),
                    c.clone(),
                    Cell::Null,
                    Cell::Null,
                    c,
                ]);
            }
        }
    }
    if unconverged > 0 {
        o.warnings.push(format!(
            "{unconverged} P-function row(s) with unconverged series (converged = false)"
        ));
    }
    o.tables.push(t);
    Ok(())
}

fn open_out(path: &Path) -> std::io::Result<Box<dyn Write>> {
    Ok(Box::new(BufWriter::new(File::create(path)?)))
}

fn side_path(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}.{name}.{ext}"))
}

/// CSV: the first table goes to `--out` (or stdout); further tables go to
/// `<stem>.<table>.<ext>` next to it, or follow on stdout after a blank line.
/// JSON: one document holding every table.
fn write_tables(tables: &[Table], output: &OutputArgs) -> std::io::Result<()> {
    match output.format {
        Format::Json => {
            let doc = if tables.len() == 1 {
                tables[0].to_json()
            } else {
                Value::Array(tables.iter().map(Table::to_json).collect())
            };
            let mut w: Box<dyn Write> = match &output.out {
                Some(p) => open_out(p)?,
                None => Box::new(std::io::stdout().lock()),
            };
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
            w.flush()
        }
        Format::Csv => match &output.out {
            Some(p) => {
                for (i, t) in tables.iter().enumerate() {
                    let path = if i == 0 { p.clone() } else { side_path(p, &t.name) };
                    let mut w = open_out(&path)?;
                    t.write_csv(&mut w)?;
                    w.flush()?;
                }
                Ok(())
            }
            None => {
                let mut w = std::io::stdout().lock();
                for (i, t) in tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(w)?;
                    }
                    t.write_csv(&mut w)?;
                }
                w.flush()
            }
        },
    }
}

#[derive(Serialize)]
struct Summary {
    pass: usize,
    fail: usize,
    warn: usize,
    info: usize,
}

fn run_verify(config: &VerifyConfig, echo: &str, format: Format, out: Option<&Path>) -> u8 {
    if config.ls.iter().any(|&l| l == 0) {
        eprintln!("error: l must be a positive integer");
        return EXIT_USAGE;
    }
    let start = Instant::now();
    let records = verify::run(config);
    let wall = start.elapsed().as_secs_f64();
    let (pass, fail, warn, info) = verify::tally(&records);
    let numeric = records.iter().any(|r| r.numeric_failure);

    let written = match format {
        Format::Json => {
            let report = json!({
                "command": echo,
                "version": env!("CARGO_PKG_VERSION"),
                "parameters": {
                    "scope": config.scope,
                    "l": config.ls,
                    "tolerances": config.tolerances,
                    "quad_order": config.quad_order,
                    "series_tol": config.series_tol,
                    "kmax": config.k_max,
                    "heat_kernel_order": config.heat_kernel_order,
                    "a_values": config.a_values,
                },
                "summary": Summary { pass, fail, warn, info },
                "wall_time_seconds": wall,
                "checks": records,
            });
            emit(out, |w| {
                serde_json::to_writer_pretty(&mut *w, &report)?;
                writeln!(w)
            })
        }
        Format::Csv => {
            let mut t = Table::new(
                "verify",
                &["scope", "name", "params", "target", "value", "residual", "tolerance", "status", "note"],
            );
            t.meta("command", echo);
            t.meta("version", env!("CARGO_PKG_VERSION"));
            t.meta("summary", format!("{pass} pass, {fail} fail, {warn} warn, {info} info"));
            for r in &records {
                t.push(record_row(r));
            }
            emit(out, |w| t.write_csv(w))
        }
    };
    match written {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        _ => {}
    }
    eprintln!(
        "{} checks: {pass} pass, {fail} fail, {warn} warn, {info} info ({wall:.2} s)",
        records.len()
    );
    if numeric {
        EXIT_NUMERIC
    } else if fail > 0 {
        EXIT_CHECK_FAILURE
    } else {
        EXIT_OK
    }
}

fn record_row(r: &CheckRecord) -> Vec<Cell> {
    let status = match r.status {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Warn => "warn",
        Status::Info => "info",
    };
    vec![
        Cell::Text(r.scope.into()),
        Cell::Text(r.name.clone()),
        Cell::Text(r.params.clone()),
        r.target.into(),
        r.value.into(),
        r.residual.into(),
        r.tolerance.into(),
        Cell::Text(status.into()),
        r.note.clone().map_or(Cell::Null, Cell::Text),
    ]
}

fn emit<F>(out: Option<&Path>, f: F) -> std::io::Result<()>
where
    F: FnOnce(&mut Box<dyn Write>) -> std::io::Result<()>,
{
    match out {
        Some(p) => {
            let mut w = open_out(p)?;
            f(&mut w)?;
            w.flush()
        }
        None => {
            let mut w: Box<dyn Write> = Box::new(std::io::stdout().lock());
            f(&mut w)?;
            w.flush()
        }
    }
}
