//! Schema and physics checks on a resolved configuration.

use std::collections::HashMap;
use std::fmt;

use aqs_core::bath::validity_check;
use aqs_core::rates::RateRegime;

use crate::config::{
    BathConfig, BogoliubovConfig, Command, CriticalConfig, DynamicsConfig, Grid, HamiltonianSource,
    ModelConfig, RatesConfig, RenormConfig, RunConfig, SizeGrid,
};

pub const WEAK_COUPLING_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Dotted key path, e.g. `critical.curves.0.bath.eta`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.path, self.message)
    }
}

impl Diagnostic {
    /// `file:line: ...` when the key appears in `source`, otherwise
    /// `file: ... (default)`.
    pub fn anchored(&self, file: &str, source: Option<&str>) -> String {
        match source.and_then(|s| locate(s, &self.path)) {
            Some(line) => format!("{file}:{line}: {self}"),
            None => format!("{file}: {self} (default value)"),
        }
    }
}

#[derive(Default)]
struct Checker {
    out: Vec<Diagnostic>,
}

impl Checker {
    fn error(&mut self, path: &str, message: impl Into<String>) {
        self.out.push(Diagnostic {
            severity: Severity::Error,
            path: path.to_owned(),
            message: message.into(),
        });
    }

    fn warn(&mut self, path: &str, message: impl Into<String>) {
        self.out.push(Diagnostic {
            severity: Severity::Warning,
            path: path.to_owned(),
            message: message.into(),
        });
    }

    fn require(&mut self, ok: bool, path: &str, message: impl Into<String>) {
        if !ok {
            self.error(path, message);
        }
    }

    fn eta(&mut self, path: &str, eta: f64) {
        self.require(eta > 0.0 && eta.is_finite(), path, format!("η must be positive, got {eta}"));
    }

    fn p(&mut self, path: &str, p: f64) {
        self.require(p >= 2.0 && p.is_finite(), path, format!("p must be at least 2, got {p}"));
    }

    fn bath(&mut self, path: &str, b: &BathConfig, eta_from_grid: bool) {
        if !eta_from_grid {
            self.eta(&format!("{path}.eta"), b.eta);
        }
        self.require(
            b.alpha >= 0.0 && b.alpha.is_finite(),
            &format!("{path}.alpha"),
            format!("α must be non-negative, got {}", b.alpha),
        );
        self.require(
            b.temperature >= 0.0 && b.temperature.is_finite(),
            &format!("{path}.temperature"),
            format!("temperature must be non-negative, got {}", b.temperature),
        );
        for (key, v) in [("omega_c", b.omega_c), ("e0", b.e0), ("e", b.e)] {
            self.require(v > 0.0 && v.is_finite(), &format!("{path}.{key}"), format!("{key} must be positive, got {v}"));
        }
        if b.eta > 0.0 && b.alpha > 0.0 && b.omega_c > 0.0 && b.e > 0.0 && b.e0 > 0.0 {
            let v = validity_check(&b.spec(), WEAK_COUPLING_THRESHOLD);
            if !v.pass {
                self.warn(
                    &format!("{path}.alpha"),
                    format!(
                        "outside weak coupling: max J/E0 = {:.3e}, max J(1+N)/E = {:.3e}, low-frequency J·N/E = {:.3e} (threshold {})",
                        v.max_j_over_e0, v.max_jn_over_e, v.low_frequency_ratio, v.threshold
                    ),
                );
            }
        }
    }

    fn sizes(&mut self, path: &str, s: &SizeGrid, min_len: usize) -> Option<Vec<u64>> {
        match s.resolve() {
            Err(e) => {
                self.error(path, e);
                None
            }
            Ok(ns) => {
                if ns.iter().any(|&n| n < 2) {
                    self.error(path, "search-space sizes must be at least 2");
                }
                if ns.windows(2).any(|w| w[1] <= w[0]) {
                    self.error(path, "search-space sizes must be strictly increasing");
                }
                if ns.len() < min_len {
                    self.error(path, format!("need at least {min_len} sizes, got {}", ns.len()));
                }
                Some(ns)
            }
        }
    }

    fn grid(&mut self, path: &str, g: &Grid, positive: bool) -> Option<Vec<f64>> {
        match g.resolve() {
            Err(e) => {
                self.error(path, e);
                None
            }
            Ok(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    self.error(path, "grid values must be finite");
                } else if positive && v.iter().any(|&x| x <= 0.0) {
                    self.error(path, "grid values must be positive");
                }
                Some(v)
            }
        }
    }
}

pub fn validate(config: &RunConfig) -> Vec<Diagnostic> {
    let mut c = Checker::default();
    if config.output.path.as_os_str().is_empty() {
        c.error("output.path", "output path is empty");
    }
    match &config.command {
        Command::Model(m) => model(&mut c, m),
        Command::Renorm(r) => renorm(&mut c, r),
        Command::Critical(r) => critical(&mut c, r),
        Command::Rates(r) => rates(&mut c, r),
        Command::Dynamics(d) => dynamics(&mut c, d),
        Command::Bogoliubov(b) => bogoliubov(&mut c, b),
    }
    c.out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

fn model(c: &mut Checker, m: &ModelConfig) {
    c.require(m.e0 > 0.0 && m.e0.is_finite(), "model.e0", format!("E0 must be positive, got {}", m.e0));
    c.sizes("model.sizes", &m.sizes, 1);
    if m.spectrum_n != 0 {
        c.require(m.spectrum_n >= 2, "model.spectrum_n", "spectrum size must be at least 2");
        c.require(m.spectrum_points >= 2, "model.spectrum_points", "need at least 2 spectrum points");
    }
}

fn renorm(c: &mut Checker, r: &RenormConfig) {
    c.bath("renorm.bath", &r.bath, false);
    c.p("renorm.p", r.p);
    c.grid("renorm.deltas", &r.deltas, true);
    if !r.alphas.is_empty() {
        if let Some(a) = c.grid("renorm.alphas", &r.alphas, false) {
            c.require(a.iter().all(|&x| x >= 0.0), "renorm.alphas", "couplings must be non-negative");
        }
    }
    if !r.exponents.is_empty() {
        c.grid("renorm.exponents", &r.exponents, true);
    }
}

fn critical(c: &mut Checker, r: &CriticalConfig) {
    c.p("critical.p", r.p);
    if let Some(pd) = &r.phase_diagram {
        c.bath("critical.bath", &r.bath, true);
        c.require(!pd.eta.is_empty(), "critical.phase_diagram.eta", "empty η grid");
        for &eta in &pd.eta {
            c.eta("critical.phase_diagram.eta", eta);
        }
        if let Some(ts) = c.grid("critical.phase_diagram.temperatures", &pd.temperatures, true) {
            c.require(
                ts.windows(2).all(|w| w[1] > w[0]),
                "critical.phase_diagram.temperatures",
                "temperatures must be strictly increasing",
            );
        }
        c.sizes("critical.phase_diagram.sizes", &pd.sizes, 1);
    }
    c.require(
        r.phase_diagram.is_some() || !r.curves.is_empty(),
        "critical",
        "nothing to do: no phase diagram and no curves",
    );
    for (i, curve) in r.curves.iter().enumerate() {
        let path = format!("critical.curves.{i}");
        c.bath(&format!("{path}.bath"), &curve.bath, true);
        c.require(!curve.eta.is_empty(), &format!("{path}.eta"), "empty η grid");
        for &eta in &curve.eta {
            c.eta(&format!("{path}.eta"), eta);
        }
        c.sizes(&format!("{path}.sizes"), &curve.sizes, 1);
    }
}

fn rates(c: &mut Checker, r: &RatesConfig) {
    c.bath("rates.bath", &r.bath, false);
    c.sizes("rates.sizes", &r.sizes, 1);
    c.require(!r.regimes.is_empty(), "rates.regimes", "no rate regimes requested");
    for (i, reg) in r.regimes.iter().enumerate() {
        if let RateRegime::Incoherent { epsilon } = reg {
            c.require(epsilon.is_finite(), &format!("rates.regimes.{i}.epsilon"), "bias must be finite");
        }
    }
}

fn dynamics(c: &mut Checker, d: &DynamicsConfig) {
    c.require(!d.schedules.is_empty(), "dynamics.schedules", "no schedules requested");
    let min = if d.runtime_scaling.is_some() { 4 } else { 1 };
    c.sizes("dynamics.sizes", &d.sizes, min);
    c.require(
        d.gamma_phi >= 0.0 && d.gamma_phi.is_finite(),
        "dynamics.gamma_phi",
        format!("dephasing rate must be non-negative, got {}", d.gamma_phi),
    );
    c.require(
        d.time_per_sqrt_n > 0.0 && d.time_per_sqrt_n.is_finite(),
        "dynamics.time_per_sqrt_n",
        "sweep time must be positive",
    );
    if let Some(rs) = &d.runtime_scaling {
        c.require(
            rs.target > 0.0 && rs.target < 1.0,
            "dynamics.runtime_scaling.target",
            format!("target success must lie in (0, 1), got {}", rs.target),
        );
        if d.gamma_phi > 0.0 && rs.target > 0.5 {
            c.warn(
                "dynamics.runtime_scaling.target",
                "dephasing drives the populations toward 1/2; targets above 1/2 may be unreachable",
            );
        }
    }
}

fn bogoliubov(c: &mut Checker, b: &BogoliubovConfig) {
    let path = "bogoliubov.hamiltonian";
    match &b.hamiltonian {
        HamiltonianSource::Diagonal { omegas } => {
            c.require(!omegas.is_empty(), &format!("{path}.omegas"), "no mode frequencies");
        }
        HamiltonianSource::Squeezing { omega, g }
        | HamiltonianSource::Beamsplitter { omega, g }
        | HamiltonianSource::TwoModeSqueezing { omega, g } => {
            c.require(*omega > 0.0, &format!("{path}.omega"), "mode frequency must be positive");
            c.require(g.is_finite(), &format!("{path}.g"), "coupling must be finite");
        }
        HamiltonianSource::TwoBosonBath { bath, modes, .. } => {
            c.bath(&format!("{path}.bath"), bath, false);
            c.require(*modes >= 1, &format!("{path}.modes"), "need at least one mode");
        }
        HamiltonianSource::File { path: p } => {
            c.require(!p.as_os_str().is_empty(), &format!("{path}.path"), "empty matrix path");
        }
    }
    if let Some(f) = &b.fock {
        c.require(f.truncation >= 4, "bogoliubov.fock.truncation", "truncation must be at least 4");
        c.require(f.levels >= 2, "bogoliubov.fock.levels", "need at least 2 levels");
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn key_parts(s: &str) -> Vec<String> {
    s.split('.').map(|k| k.trim().trim_matches('"').to_owned()).collect()
}

/// Line (1-based) of the deepest key in `source` on the dotted `path`.
/// Array-of-tables entries are addressed by index.
pub fn locate(source: &str, path: &str) -> Option<usize> {
    let target: Vec<&str> = path.split('.').collect();
    let mut arrays: HashMap<Vec<String>, usize> = HashMap::new();
    let mut header: Vec<String> = Vec::new();
    let mut best: Option<(usize, usize)> = None;

    // Insert the current index after every array-of-tables prefix.
    let expand = |raw: &[String], arrays: &HashMap<Vec<String>, usize>| {
        let mut out = Vec::new();
        for i in 0..raw.len() {
            out.push(raw[i].clone());
            if let Some(&k) = arrays.get(&raw[..=i].to_vec()) {
                out.push((k - 1).to_string());
            }
        }
        out
    };
    let mut consider = |full: &[String], line: usize| {
        let ok = full.len() <= target.len() && full.iter().zip(&target).all(|(a, b)| a == b);
        if ok && best.is_none_or(|(len, _)| full.len() > len) {
            best = Some((full.len(), line));
        }
    };

    for (i, raw) in source.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if let Some(name) = line.strip_prefix("[[").and_then(|l| l.strip_suffix("]]")) {
            let parts = key_parts(name);
            *arrays.entry(parts.clone()).or_insert(0) += 1;
            header = expand(&parts, &arrays);
            consider(&header, i + 1);
        } else if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            header = expand(&key_parts(name), &arrays);
            consider(&header, i + 1);
        } else if let Some((key, _)) = line.split_once('=') {
            let mut full = header.clone();
            full.extend(key_parts(key));
            consider(&full, i + 1);
        }
    }
    best.map(|(_, line)| line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigFile, Subcommand};

    const SRC: &str = r#"
[critical]
p = 10

[critical.bath]
alpha = 0.1

[[critical.curves]]
process = "single"
eta = [1.5]

[[critical.curves]]
process = "two"
eta = [-0.5]  # bad
[critical.curves.bath]
cutoff = "hard"
"#;

    #[test]
    fn locates_keys_in_tables_and_arrays() {
        assert_eq!(locate(SRC, "critical.p"), Some(3));
        assert_eq!(locate(SRC, "critical.bath.alpha"), Some(6));
        assert_eq!(locate(SRC, "critical.curves.1.eta"), Some(14));
        assert_eq!(locate(SRC, "critical.curves.1.bath.cutoff"), Some(16));
        // Falls back to the enclosing table for defaulted keys.
        assert_eq!(locate(SRC, "critical.curves.0.bath.eta"), Some(8));
        assert_eq!(locate(SRC, "rates.bath"), None);
    }

    #[test]
    fn negative_eta_is_reported_on_its_line() {
        let file: ConfigFile = toml::from_str(SRC).unwrap();
        let cfg = file.select(Subcommand::Critical).unwrap();
        let diags = validate(&cfg);
        let bad: Vec<_> = diags.iter().filter(|d| d.severity == Severity::Error).collect();
        assert_eq!(bad.len(), 1, "{diags:?}");
        assert!(bad[0].message.contains("η must be positive"));
        assert!(bad[0].anchored("fig.toml", Some(SRC)).starts_with("fig.toml:14: error"));
    }

    #[test]
    fn empty_size_grid_is_an_error() {
        let file: ConfigFile = toml::from_str("[model.sizes]\nn = []\n").unwrap();
        let diags = validate(&file.select(Subcommand::Model).unwrap());
        assert!(diags.iter().any(|d| d.severity == Severity::Error && d.message.contains("empty N grid")));
    }

    #[test]
    fn strong_coupling_warns_with_ratios() {
        let file: ConfigFile = toml::from_str("[rates.bath]\nalpha = 2.0\n").unwrap();
        let diags = validate(&file.select(Subcommand::Rates).unwrap());
        let w: Vec<_> = diags.iter().filter(|d| d.severity == Severity::Warning).collect();
        assert_eq!(w.len(), 1);
        assert!(w[0].message.contains("max J/E0"));
        assert!(!has_errors(&diags));
    }
}
