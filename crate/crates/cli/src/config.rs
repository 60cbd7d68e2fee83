//! Run configuration. Every field has a default, so an empty file (or no
//! file) is a valid configuration for every subcommand.

use std::path::PathBuf;

use aqs_core::bath::{BathSpec, CutoffForm, Scheme};
use aqs_core::rates::RateRegime;
use aqs_core::{Process, ScheduleKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::from("aqs-out"),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Model,
    Renorm,
    Critical,
    Rates,
    Dynamics,
    Bogoliubov,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Model => "model",
            Subcommand::Renorm => "renorm",
            Subcommand::Critical => "critical",
            Subcommand::Rates => "rates",
            Subcommand::Dynamics => "dynamics",
            Subcommand::Bogoliubov => "bogoliubov",
        }
    }
}

/// Resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ConfigFile", try_from = "ConfigFile")]
pub struct RunConfig {
    pub command: Command,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Model(ModelConfig),
    Renorm(RenormConfig),
    Critical(CriticalConfig),
    Rates(RatesConfig),
    Dynamics(DynamicsConfig),
    Bogoliubov(BogoliubovConfig),
}

/// On-disk layout: one optional section per subcommand.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renorm: Option<RenormConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<CriticalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bogoliubov: Option<BogoliubovConfig>,
}

impl ConfigFile {
    /// Select the section for `sub`, defaulting it when absent.
    pub fn select(self, sub: Subcommand) -> Result<RunConfig, String> {
        if let Some(named) = self.subcommand {
            if named != sub {
                return Err(format!(
                    "config is for `{}` but `{}` was requested",
                    named.name(),
                    sub.name()
                ));
            }
        }
        let command = match sub {
            Subcommand::Model => Command::Model(self.model.unwrap_or_default()),
            Subcommand::Renorm => Command::Renorm(self.renorm.unwrap_or_default()),
            Subcommand::Critical => Command::Critical(self.critical.unwrap_or_default()),
            Subcommand::Rates => Command::Rates(self.rates.unwrap_or_default()),
            Subcommand::Dynamics => Command::Dynamics(self.dynamics.unwrap_or_default()),
            Subcommand::Bogoliubov => Command::Bogoliubov(self.bogoliubov.unwrap_or_default()),
        };
        Ok(RunConfig {
            command,
            output: self.output,
        })
    }
}

impl From<RunConfig> for ConfigFile {
    fn from(c: RunConfig) -> Self {
        let mut f = ConfigFile {
            subcommand: Some(c.command.subcommand()),
            output: c.output,
            ..Default::default()
        };
        match c.command {
            Command::Model(x) => f.model = Some(x),
            Command::Renorm(x) => f.renorm = Some(x),
            Command::Critical(x) => f.critical = Some(x),
            Command::Rates(x) => f.rates = Some(x),
            Command::Dynamics(x) => f.dynamics = Some(x),
            Command::Bogoliubov(x) => f.bogoliubov = Some(x),
        }
        f
    }
}

impl TryFrom<ConfigFile> for RunConfig {
    type Error = String;

    fn try_from(f: ConfigFile) -> Result<Self, String> {
        let sub = f.subcommand.ok_or("missing `subcommand`")?;
        f.select(sub)
    }
}

impl Command {
    pub fn default_for(sub: Subcommand) -> Self {
        match sub {
            Subcommand::Model => Command::Model(Default::default()),
            Subcommand::Renorm => Command::Renorm(Default::default()),
            Subcommand::Critical => Command::Critical(Default::default()),
            Subcommand::Rates => Command::Rates(Default::default()),
            Subcommand::Dynamics => Command::Dynamics(Default::default()),
            Subcommand::Bogoliubov => Command::Bogoliubov(Default::default()),
        }
    }

    pub fn subcommand(&self) -> Subcommand {
        match self {
            Command::Model(_) => Subcommand::Model,
            Command::Renorm(_) => Subcommand::Renorm,
            Command::Critical(_) => Subcommand::Critical,
            Command::Rates(_) => Subcommand::Rates,
            Command::Dynamics(_) => Subcommand::Dynamics,
            Command::Bogoliubov(_) => Subcommand::Bogoliubov,
        }
    }

    pub fn name(&self) -> &'static str {
        self.subcommand().name()
    }
}

/// Search-space sizes, either explicit or `2^L` for `L` in
/// `qubits = [from, to, step]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SizeGrid {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits: Option<[u32; 3]>,
}

impl SizeGrid {
    pub fn qubits(from: u32, to: u32, step: u32) -> Self {
        Self {
            n: Vec::new(),
            qubits: Some([from, to, step]),
        }
    }

    pub fn resolve(&self) -> Result<Vec<u64>, String> {
        match (&self.qubits, self.n.is_empty()) {
            (Some(_), false) => Err("give either `n` or `qubits`, not both".into()),
            (None, true) => Err("empty N grid".into()),
            (None, false) => Ok(self.n.clone()),
            (Some([from, to, step]), true) => {
                if *step == 0 || from > to {
                    return Err(format!("qubit range [{from}, {to}, {step}] is empty"));
                }
                if *to > 62 || *from < 1 {
                    return Err(format!("qubit counts must lie in 1..=62, got [{from}, {to}]"));
                }
                Ok((*from..=*to).step_by(*step as usize).map(|l| 1u64 << l).collect())
            }
        }
    }
}

/// Explicit values, or `log = { from, to, points }` spaced geometrically
/// with both ends included.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log: Option<LogRange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(values: &[f64]) -> Self {
        Self {
            values: values.to_vec(),
            log: None,
        }
    }

    pub fn log(from: f64, to: f64, points: usize) -> Self {
        Self {
            values: Vec::new(),
            log: Some(LogRange { from, to, points }),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty() && self.log.is_none()
    }

    pub fn resolve(&self) -> Result<Vec<f64>, String> {
        match (&self.log, self.values.is_empty()) {
            (Some(_), false) => Err("give either `values` or `log`, not both".into()),
            (None, true) => Err("empty grid".into()),
            (None, false) => Ok(self.values.clone()),
            (Some(r), true) => {
                if !(r.from > 0.0 && r.to > 0.0) {
                    return Err(format!("log grid ends must be positive, got {} and {}", r.from, r.to));
                }
                match r.points {
                    0 => Err("log grid needs at least one point".into()),
                    1 => Ok(vec![r.from]),
                    k => {
                        let step = (r.to / r.from).ln() / (k - 1) as f64;
                        Ok((0..k)
                            .map(|i| if i + 1 == k { r.to } else { r.from * (step * i as f64).exp() })
                            .collect())
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathConfig {
    pub alpha: f64,
    pub eta: f64,
    pub temperature: f64,
    pub omega_c: f64,
    pub cutoff: CutoffForm,
    pub e0: f64,
    pub e: f64,
}

impl Default for BathConfig {
    fn default() -> Self {
        Self::from(BathSpec::new(0.1, 1.0, 0.0))
    }
}

impl From<BathSpec> for BathConfig {
    fn from(b: BathSpec) -> Self {
        Self {
            alpha: b.alpha,
            eta: b.eta,
            temperature: b.temperature,
            omega_c: b.omega_c,
            cutoff: b.cutoff,
            e0: b.e0,
            e: b.e,
        }
    }
}

impl BathConfig {
    pub fn spec(&self) -> BathSpec {
        BathSpec {
            alpha: self.alpha,
            eta: self.eta,
            omega_c: self.omega_c,
            cutoff: self.cutoff,
            temperature: self.temperature,
            e0: self.e0,
            e: self.e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub e0: f64,
    pub sizes: SizeGrid,
    /// Size whose two-level spectrum is tabulated over `s`; none when 0.
    pub spectrum_n: u64,
    pub spectrum_points: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            e0: 1.0,
            sizes: SizeGrid::qubits(4, 24, 1),
            spectrum_n: 64,
            spectrum_points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenormConfig {
    pub bath: BathConfig,
    pub process: Process,
    pub p: f64,
    pub deltas: Grid,
    /// Couplings to solve at; the bath's `alpha` when empty.
    pub alphas: Grid,
    pub critical_alpha: bool,
    /// Cutoffs at which to tabulate `S₁`, `φ` and `χ`.
    pub exponents: Grid,
}

impl Default for RenormConfig {
    fn default() -> Self {
        Self {
            bath: BathConfig::default(),
            process: Process::Combined,
            p: 10.0,
            deltas: Grid::log(1e-2, 1e-6, 9),
            alphas: Grid::default(),
            critical_alpha: false,
            exponents: Grid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseDiagramConfig {
    pub eta: Vec<f64>,
    pub temperatures: Grid,
    pub sizes: SizeGrid,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        Self {
            eta: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            temperatures: Grid::log(1e-4, 1.0, 17),
            sizes: SizeGrid::qubits(10, 40, 10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveConfig {
    pub process: Process,
    pub bath: BathConfig,
    pub eta: Vec<f64>,
    pub sizes: SizeGrid,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            process: Process::Single,
            bath: BathConfig::from(BathSpec::new(0.05, 1.5, 0.0)),
            eta: vec![1.5],
            sizes: SizeGrid::qubits(20, 44, 4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriticalConfig {
    pub p: f64,
    /// Phase diagram with the combined process; `bath.eta` is replaced by
    /// the grid values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_diagram: Option<PhaseDiagramConfig>,
    pub bath: BathConfig,
    /// `T*(N)` curves and their fitted exponents, one entry per process.
    pub curves: Vec<CurveConfig>,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        Self {
            p: 10.0,
            phase_diagram: None,
            bath: BathConfig::default(),
            curves: vec![CurveConfig::default()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    pub bath: BathConfig,
    pub sizes: SizeGrid,
    pub regimes: Vec<RateRegime>,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            bath: BathConfig::from(BathSpec::new(0.05, 1.5, 0.0)),
            sizes: SizeGrid::qubits(16, 32, 2),
            regimes: vec![
                RateRegime::CoherentSingle { stimulated: false },
                RateRegime::CoherentTwo,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RuntimeScalingConfig {
    pub target: f64,
}

impl Default for RuntimeScalingConfig {
    fn default() -> Self {
        Self { target: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub schedules: Vec<ScheduleKind>,
    pub sizes: SizeGrid,
    pub gamma_phi: f64,
    /// Sweep duration in units of `√N/E0` for single evolutions.
    pub time_per_sqrt_n: f64,
    /// Bloch-vector samples per trajectory file; none when 0.
    pub trajectory_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_scaling: Option<RuntimeScalingConfig>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            schedules: vec![ScheduleKind::LocalAdiabatic, ScheduleKind::Linear],
            sizes: SizeGrid::qubits(6, 14, 2),
            gamma_phi: 0.0,
            time_per_sqrt_n: 20.0,
            trajectory_samples: 0,
            runtime_scaling: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSource {
    Diagonal { omegas: Vec<f64> },
    Squeezing { omega: f64, g: f64 },
    Beamsplitter { omega: f64, g: f64 },
    TwoModeSqueezing { omega: f64, g: f64 },
    TwoBosonBath { bath: BathConfig, modes: usize, scheme: Scheme },
    /// Coefficient matrix `M` in the text or binary matrix format; a
    /// relative path is taken from the config file's directory.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FockConfig {
    pub truncation: usize,
    pub levels: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            truncation: 24,
            levels: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    #[default]
    Text,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BogoliubovConfig {
    pub hamiltonian: HamiltonianSource,
    pub generator: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock: Option<FockConfig>,
    /// Write `T` (and `K`) as matrix files in this format.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<MatrixFormat>,
}

impl Default for BogoliubovConfig {
    fn default() -> Self {
        Self {
            hamiltonian: HamiltonianSource::Squeezing { omega: 1.0, g: 0.2 },
            generator: true,
            fock: None,
            matrices: None,
        }
    }
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            output: OutputConfig::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }
}
