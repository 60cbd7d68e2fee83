//! Sweep execution. Every grid point is evaluated independently on the
//! rayon pool and gathered in grid order, so the data never depends on
//! the number of workers.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use aqs_core::bath::discretize;
use aqs_core::bogoliubov::{
    diagonalization_residual, diagonalize, fock_oracle, generator_k, pairing_residual,
    transform_from_generator, verify_canonical, QuadraticHamiltonian,
};
use aqs_core::critical::{
    critical_temperature, crossover_from_exponents, exponent_fit, phase_diagram, single_exponent_law,
    two_exponent_law, analytic_crossover,
};
use aqs_core::dynamics::{
    evolve_closed_traced, evolve_dephasing_traced, runtime_scaling,
};
use aqs_core::fit::{log_log_fit, scaling_fit};
use aqs_core::model::{min_gap, two_level_params};
use aqs_core::rates::{rate_sweep, RateRegime};
use aqs_core::renorm::{chi, phi, single_boson_exponent};
use aqs_core::{
    CriticalCurve, DephasingParams, ExponentFit, Process, Renormalizer, Schedule, ScheduleKind,
    SearchInstance, Threshold,
};
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::config::{
    BogoliubovConfig, Command, CriticalConfig, DynamicsConfig, Format, HamiltonianSource, MatrixFormat,
    ModelConfig, RatesConfig, RenormConfig, RunConfig,
};
use crate::matrix_io;
use crate::output::{Cell, Table};
use crate::row;
use crate::validate::{has_errors, validate, Diagnostic};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("numerical failure at {point}: {source}")]
    Numerical {
        point: String,
        #[source]
        source: aqs_core::Error,
    },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn at<T>(r: aqs_core::Result<T>, point: impl FnOnce() -> String) -> Result<T> {
    r.map_err(|source| CliError::Numerical {
        point: point(),
        source,
    })
}

fn cfg<T>(r: std::result::Result<T, String>, path: &str) -> Result<T> {
    r.map_err(|e| CliError::Config(format!("{path}: {e}")))
}

/// Everything a run produces, before it is written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Extra binary or text artifacts, keyed by file name.
    pub files: Vec<(String, Vec<u8>)>,
    /// Human-readable result lines for the terminal.
    pub summary: Vec<String>,
    /// Non-fatal notes raised while computing.
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

const FIT_COLUMNS: [&str; 6] = ["delta_exp", "stderr", "r_squared", "intercept", "samples", "note"];

fn fit_cells(fit: &aqs_core::Result<ExponentFit>) -> Vec<Cell> {
    match fit {
        Ok(f) => row![f.delta_exp, f.stderr, f.r_squared, f.intercept, f.samples, ""],
        Err(e) => row![Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, e.to_string()],
    }
}

fn with_fit(cols: &[&'static str]) -> Vec<&'static str> {
    cols.iter().chain(FIT_COLUMNS.iter()).copied().collect()
}

fn log2_of(n: u64) -> Option<u64> {
    n.is_power_of_two().then(|| u64::from(n.trailing_zeros()))
}

/// Validate and evaluate `config`. Relative input paths are resolved
/// against `base_dir`.
pub fn execute(config: &RunConfig, base_dir: &Path) -> Result<Outcome> {
    let diags = validate(config);
    if has_errors(&diags) {
        let msg: Vec<String> = diags.iter().map(Diagnostic::to_string).collect();
        return Err(CliError::Config(msg.join("\n")));
    }
    let mut out = match &config.command {
        Command::Model(m) => model(m)?,
        Command::Renorm(r) => renorm(r)?,
        Command::Critical(c) => critical(c)?,
        Command::Rates(r) => rates(r)?,
        Command::Dynamics(d) => dynamics(d)?,
        Command::Bogoliubov(b) => bogoliubov(b, base_dir)?,
    };
    let mut notes: Vec<String> = diags.iter().map(Diagnostic::to_string).collect();
    notes.append(&mut out.notes);
    out.notes = notes;
    Ok(out)
}

/// As [`execute`], on a dedicated pool of `workers` threads.
pub fn execute_with_workers(config: &RunConfig, base_dir: &Path, workers: usize) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(config, base_dir))
}

/// Execute and write data files plus `manifest.json` into
/// `config.output.path`. Returns the outcome and the written paths.
pub fn run(config: &RunConfig, base_dir: &Path, workers: usize) -> Result<(Outcome, Vec<PathBuf>)> {
    let start = Instant::now();
    let outcome = execute_with_workers(config, base_dir, workers)?;
    let dir = &config.output.path;
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut written = Vec::new();
    for t in &outcome.tables {
        written.push(t.write(dir, config.output.format).map_err(io)?);
    }
    for (name, bytes) in &outcome.files {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(io)?;
        written.push(p);
    }
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let manifest = json!({
        "tool": "aqs",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": config.command.name(),
        "config": config,
        "files": names,
        "workers": workers,
        "wall_time_seconds": start.elapsed().as_secs_f64(),
        "notes": outcome.notes,
    });
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_vec_pretty(&manifest).expect("manifest serializes")).map_err(io)?;
    written.push(path);
    Ok((outcome, written))
}

fn model(m: &ModelConfig) -> Result<Outcome> {
    let ns = cfg(m.sizes.resolve(), "model.sizes")?;
    let rows = ns
        .par_iter()
        .map(|&n| {
            let inst = at(SearchInstance::new(n, m.e0), || format!("N = {n}"))?;
            let (s_min, g) = min_gap(&inst);
            Ok((inst, s_min, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut gap = Table::new("gap", &["N", "qubits", "s_star", "s_min", "min_gap", "crossing_gap"]);
    for (inst, s_min, g) in &rows {
        gap.push(row![inst.n(), log2_of(inst.n()), inst.s_star(), *s_min, *g, inst.crossing_gap()]);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.n() as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let fit = scaling_fit(&xs, &ys);
    let mut fit_t = Table::new("gap_fit", &with_fit(&["quantity", "law"]));
    let mut r = row!["min_gap", -0.5];
    r.extend(fit_cells(&fit));
    fit_t.push(r);
    let mut out = Outcome {
        tables: vec![gap, fit_t],
        ..Default::default()
    };
    if let Ok(f) = &fit {
        out.summary.push(format!("min_gap ∝ N^δ with δ = {:.6} (R² = {:.8})", f.delta_exp, f.r_squared));
    }
    if m.spectrum_n != 0 {
        let n = m.spectrum_n;
        let inst = at(SearchInstance::new(n, m.e0), || format!("spectrum N = {n}"))?;
        let mut sp = Table::new(
            "spectrum",
            &["s", "epsilon", "delta", "gap", "e_ground", "e_excited", "e_degenerate"],
        );
        let k = m.spectrum_points;
        for i in 0..k {
            let s = i as f64 / (k - 1) as f64;
            let p = at(two_level_params(&inst, s), || format!("spectrum s = {s}"))?;
            let g = p.gap();
            // The N − 2 states orthogonal to |m⟩ and the uniform state sit at E0.
            let degenerate = (n > 2).then_some(m.e0);
            sp.push(row![s, p.epsilon, p.delta, g, 0.5 * (m.e0 - g), 0.5 * (m.e0 + g), degenerate]);
        }
        out.tables.push(sp);
    }
    Ok(out)
}

fn threshold_cells(t: Threshold) -> Vec<Cell> {
    match t {
        Threshold::Zero => row!["zero", Cell::Empty],
        Threshold::Finite(x) => row!["finite", x],
        Threshold::Unbounded => row!["unbounded", Cell::Empty],
    }
}

fn process_name(p: Process) -> &'static str {
    match p {
        Process::Single => "single",
        Process::Two => "two",
        Process::Combined => "combined",
    }
}

fn renorm(r: &RenormConfig) -> Result<Outcome> {
    let bath = r.bath.spec();
    let deltas = cfg(r.deltas.resolve(), "renorm.deltas")?;
    let alphas = if r.alphas.is_empty() {
        vec![bath.alpha]
    } else {
        cfg(r.alphas.resolve(), "renorm.alphas")?
    };
    let solver = at(Renormalizer::new(&bath, r.process), || "renorm.bath".into())?;
    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| deltas.iter().map(move |&d| (a, d)))
        .collect();
    let results: Vec<_> = cells.par_iter().map(|&(a, d)| solver.solve(a, d, r.p)).collect();
    let mut fp = Table::new(
        "fixed_points",
        &[
            "process", "alpha", "delta", "regime", "delta_tilde", "factor_single", "factor_two",
            "iterations", "residual", "converged",
        ],
    );
    let mut out = Outcome::default();
    for (&(a, d), res) in cells.iter().zip(&results) {
        fp.push(row![
            process_name(r.process),
            a,
            d,
            format!("{:?}", res.regime).to_lowercase(),
            res.delta_tilde,
            res.factor_single,
            res.factor_two,
            res.iterations,
            res.residual,
            res.converged
        ]);
        if let Some(w) = &res.warning {
            out.notes.push(format!("α = {a}, Δ = {d}: {w}"));
        }
    }
    out.tables.push(fp);

    if r.critical_alpha {
        let stars: Vec<Threshold> = deltas.par_iter().map(|&d| solver.critical_alpha(d, r.p)).collect();
        let mut t = Table::new("critical_alpha", &["process", "delta", "kind", "alpha_star"]);
        for (&d, &s) in deltas.iter().zip(&stars) {
            let mut row = row![process_name(r.process), d];
            row.extend(threshold_cells(s));
            t.push(row);
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = deltas
            .iter()
            .zip(&stars)
            .filter_map(|(&d, s)| s.finite().map(|a| (d, a)))
            .unzip();
        let fit = log_log_fit(&xs, &ys);
        let mut f = Table::new("critical_alpha_fit", &with_fit(&["process"]));
        let mut row = row![process_name(r.process)];
        row.extend(fit_cells(&fit));
        f.push(row);
        if let Ok(fit) = &fit {
            out.summary.push(format!("α* ∝ Δ^δ with δ = {:.6}", fit.delta_exp));
        }
        out.tables.push(t);
        out.tables.push(f);
    }

    if !r.exponents.is_empty() {
        let omegas = cfg(r.exponents.resolve(), "renorm.exponents")?;
        let vals = omegas
            .par_iter()
            .map(|&w| {
                let point = || format!("exponents at Ω = {w}");
                Ok((
                    at(single_boson_exponent(&bath, w), point)?,
                    at(phi(&bath, w), point)?,
                    at(chi(&bath, w), point)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut t = Table::new("exponents", &["omega", "s1", "phi", "chi"]);
        for (&w, &(s1, ph, ch)) in omegas.iter().zip(&vals) {
            t.push(row![w, s1, ph, ch]);
        }
        let mut f = Table::new("exponents_fit", &with_fit(&["quantity"]));
        for (name, ys) in [
            ("s1", vals.iter().map(|v| v.0).collect::<Vec<_>>()),
            ("phi", vals.iter().map(|v| v.1).collect()),
            ("chi", vals.iter().map(|v| v.2).collect()),
        ] {
            let fit = log_log_fit(&omegas, &ys);
            let mut row = row![name];
            row.extend(fit_cells(&fit));
            f.push(row);
        }
        out.tables.push(t);
        out.tables.push(f);
    }
    Ok(out)
}

fn critical(c: &CriticalConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    if let Some(pd) = &c.phase_diagram {
        let ts = cfg(pd.temperatures.resolve(), "critical.phase_diagram.temperatures")?;
        let ns = cfg(pd.sizes.resolve(), "critical.phase_diagram.sizes")?;
        let d = at(phase_diagram(&pd.eta, &ts, &ns, &c.bath.spec(), c.p), || {
            "critical.phase_diagram".into()
        })?;
        let mut t = Table::new("phase", &["eta", "T", "N", "alpha", "regime", "delta_tilde"]);
        for p in &d.points {
            t.push(row![p.eta, p.temperature, p.n, p.alpha, format!("{:?}", p.regime).to_lowercase(), p.delta_tilde]);
        }
        let mut b = Table::new("boundary", &["eta", "N", "T_star"]);
        for p in &d.boundary {
            b.push(row![p.eta, p.n, p.t_star]);
        }
        out.tables.push(t);
        out.tables.push(b);
    }

    if c.curves.is_empty() {
        return Ok(out);
    }
    let mut points = Vec::new();
    for (i, curve) in c.curves.iter().enumerate() {
        let ns = cfg(curve.sizes.resolve(), &format!("critical.curves.{i}.sizes"))?;
        for &eta in &curve.eta {
            for &n in &ns {
                points.push((i, eta, n));
            }
        }
    }
    let thresholds = points
        .par_iter()
        .map(|&(i, eta, n)| {
            let curve = &c.curves[i];
            let bath = aqs_core::BathSpec {
                eta,
                ..curve.bath.spec()
            };
            at(critical_temperature(n, &bath, c.p, curve.process), || {
                format!("critical.curves.{i} ({}), η = {eta}, N = {n}", process_name(curve.process))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = Table::new("curves", &["curve", "process", "eta", "N", "kind", "T_star"]);
    for (&(i, eta, n), &th) in points.iter().zip(&thresholds) {
        let mut row = row![i, process_name(c.curves[i].process), eta, n];
        row.extend(threshold_cells(th));
        t.push(row);
    }
    out.tables.push(t);

    let mut e = Table::new("exponents", &with_fit(&["curve", "process", "eta", "law"]));
    let mut fitted: Vec<(usize, Process, f64, Option<f64>)> = Vec::new();
    for (i, curve) in c.curves.iter().enumerate() {
        for &eta in &curve.eta {
            let thresholds: Vec<(u64, Threshold)> = points
                .iter()
                .zip(&thresholds)
                .filter(|((j, h, _), _)| *j == i && *h == eta)
                .map(|(&(_, _, n), &th)| (n, th))
                .collect();
            let samples = thresholds
                .iter()
                .filter_map(|&(n, th)| th.finite().map(|x| (n, x)))
                .collect();
            let cc = CriticalCurve {
                eta,
                alpha: curve.bath.alpha,
                process: curve.process,
                samples,
                thresholds,
            };
            let fit = exponent_fit(&cc);
            let law = match curve.process {
                Process::Single => Some(single_exponent_law(eta)),
                Process::Two => Some(two_exponent_law(eta)),
                Process::Combined => None,
            };
            let mut row = row![i, process_name(curve.process), eta, law];
            row.extend(fit_cells(&fit));
            e.push(row);
            fitted.push((i, curve.process, eta, fit.ok().map(|f| f.delta_exp)));
        }
    }
    out.tables.push(e);

    // Crossover between the first single-boson and the first two-boson curve.
    let first = |p: Process| c.curves.iter().position(|x| x.process == p);
    if let (Some(si), Some(ti)) = (first(Process::Single), first(Process::Two)) {
        let delta_of = |i: usize, eta: f64| {
            fitted
                .iter()
                .find(|f| f.0 == i && f.2 == eta)
                .and_then(|f| f.3)
        };
        let mut rows: Vec<(f64, f64, f64)> = c.curves[si]
            .eta
            .iter()
            .filter_map(|&eta| Some((eta, delta_of(si, eta)?, delta_of(ti, eta)?)))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let empirical = crossover_from_exponents(&rows);
        let mut x = Table::new("crossover", &["single_curve", "two_curve", "analytic", "empirical"]);
        x.push(row![si, ti, analytic_crossover(), empirical]);
        out.tables.push(x);
        out.summary.push(match empirical {
            Some(eta) => format!("η_c: empirical {eta:.4}, analytic {:.4}", analytic_crossover()),
            None => format!("η_c: no crossing on the grid (analytic {:.4})", analytic_crossover()),
        });
    }
    for f in &fitted {
        if let Some(d) = f.3 {
            out.summary.push(format!("{} η = {}: δ = {d:.5}", process_name(f.1), f.2));
        }
    }
    Ok(out)
}

fn regime_cells(r: &RateRegime) -> Vec<Cell> {
    match r {
        RateRegime::Incoherent { epsilon } => row!["incoherent", *epsilon, Cell::Empty],
        RateRegime::CoherentSingle { stimulated } => row!["coherent_single", Cell::Empty, *stimulated],
        RateRegime::CoherentTwo => row!["coherent_two", Cell::Empty, Cell::Empty],
    }
}

fn rates(r: &RatesConfig) -> Result<Outcome> {
    let bath = r.bath.spec();
    let ns = cfg(r.sizes.resolve(), "rates.sizes")?;
    let mut t = Table::new(
        "rates",
        &["regime", "epsilon", "stimulated", "N", "delta", "gamma", "method", "window", "truncation"],
    );
    let mut f = Table::new("rates_fit", &with_fit(&["regime", "epsilon", "stimulated", "law"]));
    let mut out = Outcome::default();
    for (i, regime) in r.regimes.iter().enumerate() {
        let rates = at(rate_sweep(&ns, &bath, *regime), || format!("rates.regimes.{i}"))?;
        for (n, res) in &rates {
            let mut row = regime_cells(regime);
            let method = serde_json::to_value(res.method).expect("enum serializes");
            row.extend(row![
                *n,
                bath.e0 / ((n - 1) as f64).sqrt(),
                res.gamma,
                method.as_str().unwrap_or_default(),
                res.diagnostics.window,
                res.diagnostics.truncation
            ]);
            t.push(row);
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = rates.iter().map(|(n, res)| (*n as f64, res.gamma)).unzip();
        let fit = scaling_fit(&xs, &ys);
        let law = match regime {
            RateRegime::Incoherent { .. } => -1.0,
            RateRegime::CoherentSingle { .. } => -bath.eta / 2.0,
            RateRegime::CoherentTwo => -(2.0 * bath.eta + 1.0) / 2.0,
        };
        let mut row = regime_cells(regime);
        row.push(law.into());
        row.extend(fit_cells(&fit));
        f.push(row);
        if let Ok(fit) = fit {
            out.summary.push(format!("{}: Γ ∝ N^δ with δ = {:.5}", regime_cells(regime)[0].text(), fit.delta_exp));
        }
    }
    out.tables.push(t);
    out.tables.push(f);
    Ok(out)
}

fn schedule_name(k: ScheduleKind) -> &'static str {
    match k {
        ScheduleKind::Linear => "linear",
        ScheduleKind::LocalAdiabatic => "local_adiabatic",
    }
}

fn dynamics(d: &DynamicsConfig) -> Result<Outcome> {
    let ns = cfg(d.sizes.resolve(), "dynamics.sizes")?;
    let gamma = DephasingParams { gamma_phi: d.gamma_phi };
    let cells: Vec<(ScheduleKind, u64)> = d
        .schedules
        .iter()
        .flat_map(|&k| ns.iter().map(move |&n| (k, n)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(kind, n)| {
            let point = || format!("{} N = {n}", schedule_name(kind));
            let inst = at(SearchInstance::new(n, 1.0), point)?;
            let total = d.time_per_sqrt_n * (n as f64).sqrt();
            let sch = at(Schedule::with_time(kind, &inst, total), point)?;
            let samples = d.trajectory_samples;
            if d.gamma_phi > 0.0 {
                at(evolve_dephasing_traced(&inst, &sch, gamma, samples), point)
            } else {
                at(evolve_closed_traced(&inst, &sch, samples), point)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(
        "evolutions",
        &["schedule", "N", "total_time", "gamma_phi", "success_prob", "norm_drift", "steps"],
    );
    let mut out = Outcome::default();
    for (&(kind, n), r) in cells.iter().zip(&results) {
        t.push(row![schedule_name(kind), n, r.total_time, d.gamma_phi, r.success_prob, r.norm_drift, r.steps]);
    }
    out.tables.push(t);
    for (&(kind, n), r) in cells.iter().zip(&results) {
        if let Some(tr) = &r.trajectory {
            let mut tt = Table::new(format!("trajectory_{}_N{n}", schedule_name(kind)), &["t", "s", "x", "y", "z"]);
            for p in tr {
                tt.push(row![p.t, p.s, p.x, p.y, p.z]);
            }
            out.tables.push(tt);
        }
    }
    if let Some(rs) = &d.runtime_scaling {
        let deph = (d.gamma_phi > 0.0).then_some(gamma);
        let mut times = Table::new("runtime", &["schedule", "N", "time"]);
        let mut fits = Table::new("runtime_fit", &with_fit(&["schedule", "target", "gamma_phi"]));
        for &kind in &d.schedules {
            let sc = at(runtime_scaling(&ns, rs.target, kind, deph), || {
                format!("runtime scaling for {}", schedule_name(kind))
            })?;
            for &(n, time) in &sc.times {
                times.push(row![schedule_name(kind), n, time]);
            }
            let mut row = row![schedule_name(kind), rs.target, d.gamma_phi];
            row.extend(fit_cells(&Ok(sc.fit)));
            fits.push(row);
            out.summary.push(format!(
                "{}: time to success {} ∝ N^δ with δ = {:.4}",
                schedule_name(kind),
                rs.target,
                sc.fit.delta_exp
            ));
        }
        out.tables.push(times);
        out.tables.push(fits);
    }
    Ok(out)
}

fn hamiltonian(src: &HamiltonianSource, base_dir: &Path) -> Result<QuadraticHamiltonian> {
    let point = || "bogoliubov.hamiltonian".to_owned();
    match src {
        HamiltonianSource::Diagonal { omegas } => at(QuadraticHamiltonian::diagonal(omegas), point),
        HamiltonianSource::Squeezing { omega, g } => at(QuadraticHamiltonian::single_mode_squeezing(*omega, *g), point),
        HamiltonianSource::Beamsplitter { omega, g } => at(QuadraticHamiltonian::beamsplitter(*omega, *g), point),
        HamiltonianSource::TwoModeSqueezing { omega, g } => {
            at(QuadraticHamiltonian::two_mode_squeezing(*omega, *g), point)
        }
        HamiltonianSource::TwoBosonBath { bath, modes, scheme } => {
            let spec = bath.spec();
            let d = at(discretize(&spec, *modes, *scheme), point)?;
            at(QuadraticHamiltonian::two_boson_bath(&d, spec.e), point)
        }
        HamiltonianSource::File { path } => {
            let m = matrix_io::read_matrix(&base_dir.join(path))
                .map_err(|e| CliError::Config(format!("bogoliubov.hamiltonian.path: {e}")))?;
            QuadraticHamiltonian::new(m).map_err(|e| CliError::Config(format!("bogoliubov.hamiltonian.path: {e}")))
        }
    }
}

fn bogoliubov(b: &BogoliubovConfig, base_dir: &Path) -> Result<Outcome> {
    let h = hamiltonian(&b.hamiltonian, base_dir)?;
    let point = || "bogoliubov.hamiltonian".to_owned();
    let t = at(diagonalize(&h), point)?;
    let canon = verify_canonical(&t);
    let diag = diagonalization_residual(&h, &t);
    let (_, pairing) = at(pairing_residual(&h), point)?;
    let mut out = Outcome::default();

    let mut modes = Table::new("modes", &["index", "lambda"]);
    for (i, &l) in t.lambdas.iter().enumerate() {
        modes.push(row![i, l]);
    }
    out.tables.push(modes);
    out.summary.push(format!(
        "λ = [{}]",
        t.lambdas.iter().map(|l| format!("{l:.12}")).collect::<Vec<_>>().join(", ")
    ));

    let mut res = Table::new("residuals", &["quantity", "value"]);
    res.push(row!["para_unitarity", canon.para_unitarity]);
    res.push(row!["block", canon.block]);
    res.push(row!["diagonalization", diag]);
    res.push(row!["pairing", pairing]);
    let k = if b.generator {
        let k = at(generator_k(&t), || "generator K".into())?;
        let round = (transform_from_generator(&k) - t.t()).norm();
        res.push(row!["generator_round_trip", round]);
        Some(k)
    } else {
        None
    };
    for r in &res.rows {
        out.summary.push(format!("{} residual {}", r[0].text(), r[1].text()));
    }
    out.tables.push(res);

    if let Some(f) = &b.fock {
        if h.n() <= 3 {
            let spec = at(fock_oracle(&h, f.truncation, f.levels), || "Fock oracle".into())?;
            let mut ft = Table::new("fock", &["level", "energy", "spacing"]);
            let e0 = spec.levels[0];
            for (i, &e) in spec.levels.iter().enumerate() {
                ft.push(row![i, e, e - e0]);
            }
            out.tables.push(ft);
            out.summary.push(format!("Fock truncation {}: spacing drift {:.3e}", spec.truncation, spec.drift));
            if let Some(w) = spec.warning {
                out.notes.push(format!("Fock oracle: {w}"));
            }
        } else {
            out.notes.push(format!("Fock oracle skipped: {} modes (at most 3 supported)", h.n()));
        }
    }

    if let Some(fmt) = b.matrices {
        let mut mats = vec![("T", t.t())];
        if let Some(k) = k {
            mats.push(("K", k));
        }
        for (name, m) in mats {
            let (file, bytes) = match fmt {
                MatrixFormat::Text => (format!("{name}.txt"), matrix_io::to_text(&m).into_bytes()),
                MatrixFormat::Binary => (format!("{name}.aqsm"), matrix_io::to_binary(&m)),
            };
            out.files.push((file, bytes));
        }
    }
    Ok(out)
}

/// Data files of a finished run, excluding the manifest, for comparisons.
pub fn data_files(dir: &Path) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.file_name().is_some_and(|n| n != "manifest.json"))
        .map(|p| {
            let bytes = fs::read(&p)?;
            Ok((p.file_name().unwrap().to_string_lossy().into_owned(), bytes))
        })
        .collect::<std::io::Result<_>>()?;
    files.sort();
    Ok(files)
}

pub fn format_of(name: &str) -> Option<Format> {
    match name {
        "csv" => Some(Format::Csv),
        "json" => Some(Format::Json),
        _ => None,
    }
}
