use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aqs_cli::config::{
    Command as RunCommand, ConfigFile, DynamicsConfig, Grid, RenormConfig, RunConfig, SizeGrid, Subcommand,
};
use aqs_cli::run::{data_files, execute, execute_with_workers};
use aqs_cli::validate::{has_errors, validate};
use aqs_cli::Format;
use aqs_core::{Process, ScheduleKind};

const ALL: [Subcommand; 6] = [
    Subcommand::Model,
    Subcommand::Renorm,
    Subcommand::Critical,
    Subcommand::Rates,
    Subcommand::Dynamics,
    Subcommand::Bogoliubov,
];

fn aqs(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqs"))
        .args(args)
        .current_dir(cwd)
        .env_remove("AQS_WORKERS")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn shipped() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

#[test]
fn defaults_round_trip_through_toml() {
    for sub in ALL {
        let cfg = ConfigFile::default().select(sub).unwrap();
        let text = cfg.to_toml();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg, "{text}");
        assert!(!has_errors(&validate(&cfg)), "{}: {:?}", sub.name(), validate(&cfg));
    }
}

#[test]
fn shipped_configs_round_trip_and_validate() {
    let files = shipped();
    assert!(files.len() >= 10);
    for path in files {
        let text = fs::read_to_string(&path).unwrap();
        let cfg: RunConfig = toml::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg, "{}", path.display());
        let diags = validate(&cfg);
        assert!(!has_errors(&diags), "{}: {diags:?}", path.display());
    }
}

#[test]
fn zero_coupling_echoes_delta() {
    let cfg = RunConfig::new(RunCommand::Renorm(RenormConfig {
        process: Process::Combined,
        deltas: Grid::values(&[1e-3]),
        alphas: Grid::values(&[0.0]),
        ..RenormConfig::default()
    }));
    let out = execute(&cfg, Path::new(".")).unwrap();
    let t = out.table("fixed_points").unwrap();
    let dt = t.column("delta_tilde").unwrap()[0].as_f64().unwrap();
    assert_eq!(dt, 1e-3);
}

#[test]
fn runtime_scaling_flag_writes_the_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("d.toml");
    fs::write(&cfg, "[dynamics]\nschedules = [\"local_adiabatic\"]\n").unwrap();
    let o = aqs(&["dynamics", "--runtime-scaling", "--config", "d.toml", "--output", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let fit = fs::read_to_string(dir.path().join("out/runtime_fit.csv")).unwrap();
    let row: Vec<&str> = fit.lines().nth(1).unwrap().split(',').collect();
    let slope: f64 = row[3].parse().unwrap();
    assert!((slope - 0.5).abs() < 0.05, "{fit}");
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "dynamics");
    assert_eq!(manifest["config"]["dynamics"]["runtime_scaling"]["target"], 0.9);
    assert_eq!(manifest["config"]["dynamics"]["time_per_sqrt_n"], 20.0);
}

#[test]
fn invalid_physics_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[rates]\n\n[rates.bath]\nalpha = 0.1\neta = -0.5\n").unwrap();
    let o = aqs(&["rates", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("bad.toml:5: error: rates.bath.eta: η must be positive"), "{e}");
    assert!(!dir.path().join("aqs-out").exists());
}

#[test]
fn malformed_toml_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[model]\ne0 = 1.0\nsizes = { qubits = [4, 8 }\n").unwrap();
    let o = aqs(&["model", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:3:"), "{}", stderr(&o));

    fs::write(dir.path().join("typo.toml"), "[model]\nspectrum = 3\n").unwrap();
    let o = aqs(&["model", "--config", "typo.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("typo.toml:2:"), "{}", stderr(&o));
}

#[test]
fn wrong_subcommand_and_empty_grid_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.toml"), "subcommand = \"model\"\n").unwrap();
    let o = aqs(&["rates", "--config", "m.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config is for `model`"));

    fs::write(dir.path().join("e.toml"), "[model.sizes]\nn = []\n").unwrap();
    let o = aqs(&["model", "--config", "e.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty N grid"), "{}", stderr(&o));
}

#[test]
fn missing_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqs(&["model", "--config", "nope.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_3_naming_the_point() {
    let dir = tempfile::tempdir().unwrap();
    // Indefinite: the pairing exceeds the frequency.
    fs::write(
        dir.path().join("b.toml"),
        "[bogoliubov]\nhamiltonian = { kind = \"squeezing\", omega = 1.0, g = 0.6 }\n",
    )
    .unwrap();
    let o = aqs(&["bogoliubov", "--config", "b.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("bogoliubov.hamiltonian"), "{}", stderr(&o));
}

#[test]
fn check_mode_prints_effective_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = aqs(&["model", "--check", "--format", "json"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let cfg: RunConfig = toml::from_str(&text).unwrap();
    assert_eq!(cfg.output.format, Format::Json);
    assert!(!dir.path().join("aqs-out").exists());
}

#[test]
fn json_and_csv_carry_the_same_rows() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["csv", "json"] {
        let o = aqs(&["model", "--format", f, "--output", f], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv = fs::read_to_string(dir.path().join("csv/gap.csv")).unwrap();
    let json: Vec<serde_json::Value> = serde_json::from_slice(&fs::read(dir.path().join("json/gap.json")).unwrap()).unwrap();
    assert_eq!(csv.lines().count() - 1, json.len());
    let first_gap: f64 = csv.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert_eq!(json[0]["min_gap"].as_f64().unwrap(), first_gap);
}

#[test]
fn worker_count_does_not_change_tables() {
    let cfg = RunConfig::new(RunCommand::Dynamics(DynamicsConfig {
        schedules: vec![ScheduleKind::LocalAdiabatic, ScheduleKind::Linear],
        sizes: SizeGrid::qubits(4, 12, 2),
        gamma_phi: 0.05,
        trajectory_samples: 16,
        ..DynamicsConfig::default()
    }));
    let a = execute_with_workers(&cfg, Path::new("."), 1).unwrap();
    let b = execute_with_workers(&cfg, Path::new("."), 3).unwrap();
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.tables.len(), 1 + 10);
}

#[test]
fn matrix_file_input_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.txt"), "2 2\n0.5 0.1\n0.1 0.5\n").unwrap();
    fs::write(
        dir.path().join("f.toml"),
        "[bogoliubov]\nhamiltonian = { kind = \"file\", path = \"m.txt\" }\nmatrices = \"binary\"\n",
    )
    .unwrap();
    let o = aqs(&["bogoliubov", "--config", "f.toml", "--output", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let files = data_files(&dir.path().join("out")).unwrap();
    let names: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["K.aqsm", "T.aqsm", "modes.csv", "residuals.csv"]);
    let t = aqs_cli::matrix_io::read_matrix(&dir.path().join("out/T.aqsm")).unwrap();
    assert_eq!(t.nrows(), 2);
    let modes = fs::read_to_string(dir.path().join("out/modes.csv")).unwrap();
    let lambda: f64 = modes.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((lambda - (1.0f64 - 0.04).sqrt()).abs() < 1e-12);
}
