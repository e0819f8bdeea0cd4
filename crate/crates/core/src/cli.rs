//! Scenario runner behind the `jcipa` binary.
//!
//! Configuration is layered: built-in defaults, then an optional flat
//! `key = value` file, then command-line flags. Every scenario renders to
//! CSV in memory first, so output bytes depend only on the configuration.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::domain::{
    ParamWarning, PhotonStatistics, PhysicalParams, TimeGrid, DEFAULT_TAIL_TOL,
};
use crate::dynamics::{
    run_forward, run_gipa_pipeline, run_ipa, run_sector_pipeline, PipelineOptions, ScenarioResult,
};
use crate::error::Error;
use crate::inversion::{InversionTarget, TargetKind};
use crate::kappa::deformed_scenario_with;
use crate::synth::{CouplingProfile, DEFAULT_ETA};

pub const DEFAULT_MAX_RESIDUAL: f64 = 1e-4;
pub const DEFAULT_FOCK_N: usize = 5;
pub const BASE_HEADER: &str = "t,target_w,coupling,reproduced_w,residual";
pub const DEFORMED_HEADER: &str = "t,target_w,coupling,reproduced_w,residual,delta_w,delta_lambda";
pub const SWEEP_HEADER: &str = "epsilon,max_abs_delta_w,max_abs_delta_lambda,max_abs_residual";

/// Fractions of the configured ε visited by the sweep scenario.
const SWEEP_FRACTIONS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Fig1SqrtCoupling,
    Fig2VacuumIpaCoherent,
    Fig3DeformedDeltas,
    Fig4CosSquaredFock,
    Fig5RoundtripDemo,
    Fig6Thermal,
    Sweep,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Fig1SqrtCoupling,
        Scenario::Fig2VacuumIpaCoherent,
        Scenario::Fig3DeformedDeltas,
        Scenario::Fig4CosSquaredFock,
        Scenario::Fig5RoundtripDemo,
        Scenario::Fig6Thermal,
        Scenario::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1SqrtCoupling => "fig1_sqrt_coupling",
            Scenario::Fig2VacuumIpaCoherent => "fig2_vacuum_ipa_coherent",
            Scenario::Fig3DeformedDeltas => "fig3_deformed_deltas",
            Scenario::Fig4CosSquaredFock => "fig4_cos_squared_fock",
            Scenario::Fig5RoundtripDemo => "fig5_roundtrip_demo",
            Scenario::Fig6Thermal => "fig6_thermal",
            Scenario::Sweep => "sweep",
        }
    }

    /// `(t_end, samples)` used when the configuration names no grid.
    pub fn default_grid(self) -> (f64, usize) {
        match self {
            Scenario::Fig1SqrtCoupling => (6.0, 1201),
            Scenario::Fig4CosSquaredFock => (10.0, 2001),
            _ => (25.0, 2001),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| ConfigError::Field {
                field: "scenario".into(),
                message: format!(
                    "unknown scenario `{s}` (expected one of: {})",
                    Scenario::ALL.map(Scenario::name).join(", ")
                ),
            })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Core(#[from] Error),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

/// Partially specified configuration; `None` means "not set at this layer".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub scenario: Option<Scenario>,
    pub lambda0: Option<f64>,
    pub zeta: Option<f64>,
    pub mean_n: Option<f64>,
    pub epsilon: Option<f64>,
    pub detuning: Option<f64>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub tail_tol: Option<f64>,
    pub eta: Option<f64>,
    pub max_residual: Option<f64>,
    pub fock_n: Option<usize>,
    pub out: Option<PathBuf>,
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("cannot parse `{value}` for `{key}`"),
    })
}

impl ConfigOverrides {
    /// Parses `key = value` lines. `#` starts a comment; blank lines are
    /// ignored; repeated keys are an error.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ConfigOverrides::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("missing value for `{key}`"),
                });
            }
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            seen.push(key.to_string());
            match key {
                "scenario" => {
                    cfg.scenario = Some(value.parse().map_err(|e: ConfigError| {
                        ConfigError::Parse {
                            line,
                            message: e.to_string(),
                        }
                    })?)
                }
                "lambda0" => cfg.lambda0 = Some(parse_value(line, key, value)?),
                "zeta" => cfg.zeta = Some(parse_value(line, key, value)?),
                "mean_n" => cfg.mean_n = Some(parse_value(line, key, value)?),
                "epsilon" => cfg.epsilon = Some(parse_value(line, key, value)?),
                "detuning" => cfg.detuning = Some(parse_value(line, key, value)?),
                "t_end" => cfg.t_end = Some(parse_value(line, key, value)?),
                "samples" => cfg.samples = Some(parse_value(line, key, value)?),
                "tail_tol" => cfg.tail_tol = Some(parse_value(line, key, value)?),
                "eta" => cfg.eta = Some(parse_value(line, key, value)?),
                "max_residual" => cfg.max_residual = Some(parse_value(line, key, value)?),
                "fock_n" => cfg.fock_n = Some(parse_value(line, key, value)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                _ => {
                    return Err(ConfigError::Parse {
                        line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: ConfigOverrides) -> Self {
        ConfigOverrides {
            scenario: top.scenario.or(self.scenario),
            lambda0: top.lambda0.or(self.lambda0),
            zeta: top.zeta.or(self.zeta),
            mean_n: top.mean_n.or(self.mean_n),
            epsilon: top.epsilon.or(self.epsilon),
            detuning: top.detuning.or(self.detuning),
            t_end: top.t_end.or(self.t_end),
            samples: top.samples.or(self.samples),
            tail_tol: top.tail_tol.or(self.tail_tol),
            eta: top.eta.or(self.eta),
            max_residual: top.max_residual.or(self.max_residual),
            fock_n: top.fock_n.or(self.fock_n),
            out: top.out.or(self.out),
        }
    }

    /// Fills defaults and validates every field.
    pub fn resolve(self) -> Result<ScenarioConfig, ConfigError> {
        let scenario = self.scenario.unwrap_or(Scenario::Fig2VacuumIpaCoherent);
        let defaults = PhysicalParams::default();
        let params = PhysicalParams {
            lambda0: self.lambda0.unwrap_or(defaults.lambda0),
            zeta: self.zeta.unwrap_or(defaults.zeta),
            epsilon: self.epsilon.unwrap_or(defaults.epsilon),
            mean_n: self.mean_n.unwrap_or(defaults.mean_n),
            detuning: self.detuning.unwrap_or(defaults.detuning),
        };
        params.validate()?;
        if params.detuning != 0.0 {
            return Err(ConfigError::Field {
                field: "detuning".into(),
                message: "scenarios run at resonance only".into(),
            });
        }
        let (default_end, default_samples) = scenario.default_grid();
        let grid = TimeGrid::new(
            0.0,
            self.t_end.unwrap_or(default_end),
            self.samples.unwrap_or(default_samples),
        )?;
        let tail_tol = self.tail_tol.unwrap_or(DEFAULT_TAIL_TOL);
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(field_error("tail_tol", format!("must lie in (0, 1), got {tail_tol}")));
        }
        let eta = self.eta.unwrap_or(DEFAULT_ETA);
        if !(eta > 0.0 && eta < 1.0) {
            return Err(field_error("eta", format!("must lie in (0, 1), got {eta}")));
        }
        let max_residual = self.max_residual.unwrap_or(DEFAULT_MAX_RESIDUAL);
        if !(max_residual > 0.0 && max_residual.is_finite()) {
            return Err(field_error(
                "max_residual",
                format!("must be positive, got {max_residual}"),
            ));
        }
        let out = self
            .out
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", scenario.name())));
        Ok(ScenarioConfig {
            scenario,
            params,
            grid,
            tail_tol,
            eta,
            max_residual,
            fock_n: self.fock_n.unwrap_or(DEFAULT_FOCK_N),
            out,
        })
    }
}

fn field_error(field: &str, message: String) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        message,
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub params: PhysicalParams,
    pub grid: TimeGrid,
    pub tail_tol: f64,
    pub eta: f64,
    pub max_residual: f64,
    pub fock_n: usize,
    pub out: PathBuf,
}

impl ScenarioConfig {
    pub fn warnings(&self) -> Vec<ParamWarning> {
        self.params.validate().unwrap_or_default()
    }

    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            tail_tol: self.tail_tol,
            eta: self.eta,
            ..PipelineOptions::default()
        }
    }

    /// Effective parameter set in config-file syntax; parsing it back
    /// yields the same configuration.
    pub fn render(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "lambda0 = {:?}", p.lambda0);
        let _ = writeln!(s, "zeta = {:?}", p.zeta);
        let _ = writeln!(s, "mean_n = {:?}", p.mean_n);
        let _ = writeln!(s, "epsilon = {:?}", p.epsilon);
        let _ = writeln!(s, "detuning = {:?}", p.detuning);
        let _ = writeln!(s, "t_end = {:?}", self.grid.t_end());
        let _ = writeln!(s, "samples = {}", self.grid.len());
        let _ = writeln!(s, "tail_tol = {:?}", self.tail_tol);
        let _ = writeln!(s, "eta = {:?}", self.eta);
        let _ = writeln!(s, "max_residual = {:?}", self.max_residual);
        let _ = writeln!(s, "fock_n = {}", self.fock_n);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }
}

/// One CSV file, fully rendered.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub path: PathBuf,
    pub contents: String,
}

/// Rendered output of a scenario before anything touches the filesystem.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub files: Vec<CsvFile>,
    /// Largest `|residual|` outside regularized windows over every run.
    pub max_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub max_residual: f64,
    pub residual_limit: f64,
}

impl RunReport {
    pub fn residual_exceeded(&self) -> bool {
        self.max_residual > self.residual_limit
    }
}

/// Maps a run outcome onto the process exit status.
pub fn exit_code(outcome: &Result<RunReport, CliError>) -> u8 {
    match outcome {
        Ok(report) if report.residual_exceeded() => 2,
        Ok(_) => 0,
        Err(_) => 1,
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn metadata(config: &ScenarioConfig, extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# jcipa {}", env!("CARGO_PKG_VERSION"));
    for line in config.render().lines() {
        if !line.starts_with("out =") {
            let _ = writeln!(s, "# {line}");
        }
    }
    for (k, v) in extra {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

fn join_indices(indices: &[usize]) -> String {
    if indices.is_empty() {
        return "none".into();
    }
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn scenario_csv(
    config: &ScenarioConfig,
    result: &ScenarioResult,
    extra_meta: &[(&str, String)],
    extra_columns: &[&[f64]],
) -> String {
    let mut meta: Vec<(&str, String)> = vec![
        ("coupling_sector", result.coupling_sector.to_string()),
        ("sectors", result.sectors.len().to_string()),
        ("regularized_points", join_indices(&result.regularized_points)),
        ("max_norm_drift", num(result.max_norm_drift)),
    ];
    meta.extend(extra_meta.iter().cloned());
    let mut s = metadata(config, &meta);
    s.push_str(if extra_columns.is_empty() {
        BASE_HEADER
    } else {
        DEFORMED_HEADER
    });
    s.push('\n');
    for i in 0..result.grid.len() {
        let _ = write!(
            s,
            "{},{},{},{},{}",
            num(result.grid.time(i)),
            num(result.target_w[i]),
            num(result.coupling[i]),
            num(result.reproduced_w[i]),
            num(result.residuals[i])
        );
        for col in extra_columns {
            let _ = write!(s, ",{}", num(col[i]));
        }
        s.push('\n');
    }
    s
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Runs the scenario and renders its CSV files without writing them.
pub fn execute(config: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let params = config.params;
    let grid = &config.grid;
    let options = config.options();
    let single = |result: ScenarioResult| ScenarioOutput {
        max_residual: result.max_abs_residual_outside_windows(),
        files: vec![CsvFile {
            path: config.out.clone(),
            contents: scenario_csv(config, &result, &[], &[]),
        }],
    };
    let output = match config.scenario {
        Scenario::Fig1SqrtCoupling => {
            let coupling = CouplingProfile::SqrtTime {
                lambda0: params.lambda0,
                zeta: params.zeta,
            };
            let target = InversionTarget::sqrt_time(params)?;
            single(run_forward(&coupling, 0, &target, grid, &options)?)
        }
        Scenario::Fig2VacuumIpaCoherent => {
            let target = InversionTarget::with_tail_tol(
                TargetKind::CoherentSeries,
                params.undeformed(),
                config.tail_tol,
            )?;
            single(run_ipa(&target, grid, &options)?)
        }
        Scenario::Fig3DeformedDeltas => {
            let s = deformed_scenario_with(&params, grid, &options)?;
            let max_residual = s
                .deformed
                .max_abs_residual_outside_windows()
                .max(s.sector_resolved.max_abs_residual_outside_windows());
            let meta = [(
                "sector_resolved_max_residual",
                num(s.sector_resolved.max_abs_residual()),
            )];
            ScenarioOutput {
                max_residual,
                files: vec![CsvFile {
                    path: config.out.clone(),
                    contents: scenario_csv(
                        config,
                        &s.deformed,
                        &meta,
                        &[&s.delta_w, &s.delta_lambda],
                    ),
                }],
            }
        }
        Scenario::Fig4CosSquaredFock => single(run_gipa_pipeline(
            |n| InversionTarget::cos_squared(n, params),
            &PhotonStatistics::Fock(config.fock_n),
            grid,
            &options,
        )?),
        Scenario::Fig5RoundtripDemo => single(run_gipa_pipeline(
            |n| InversionTarget::constant_coupling(n, params),
            &PhotonStatistics::Poisson {
                mean: params.mean_n,
            },
            grid,
            &options,
        )?),
        Scenario::Fig6Thermal => {
            let stats = PhotonStatistics::BoseEinstein {
                mean: params.mean_n,
            };
            let thermal = run_gipa_pipeline(
                |n| InversionTarget::cos_squared(n, params),
                &stats,
                grid,
                &options,
            )?;
            let constant = run_sector_pipeline(
                |n| {
                    Ok((
                        InversionTarget::constant_coupling(n, params)?,
                        CouplingProfile::Constant {
                            lambda0: params.lambda0,
                        },
                    ))
                },
                &stats,
                grid,
                &options,
            )?;
            let constant_path = sibling(&config.out, "_constant");
            let companion = [(
                "companion",
                constant_path
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
            )];
            ScenarioOutput {
                max_residual: thermal
                    .max_abs_residual_outside_windows()
                    .max(constant.max_abs_residual_outside_windows()),
                files: vec![
                    CsvFile {
                        path: config.out.clone(),
                        contents: scenario_csv(config, &thermal, &companion, &[]),
                    },
                    CsvFile {
                        path: constant_path,
                        contents: scenario_csv(config, &constant, &[], &[]),
                    },
                ],
            }
        }
        Scenario::Sweep => {
            let mut s = metadata(config, &[]);
            s.push_str(SWEEP_HEADER);
            s.push('\n');
            let mut worst = 0.0_f64;
            for fraction in SWEEP_FRACTIONS {
                let eps = fraction * params.epsilon;
                let run = deformed_scenario_with(&params.with_epsilon(eps), grid, &options)?;
                let residual = run.deformed.max_abs_residual_outside_windows();
                worst = worst.max(residual);
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    num(eps),
                    num(max_abs(&run.delta_w)),
                    num(max_abs(&run.delta_lambda)),
                    num(residual)
                );
            }
            ScenarioOutput {
                max_residual: worst,
                files: vec![CsvFile {
                    path: config.out.clone(),
                    contents: s,
                }],
            }
        }
    };
    Ok(output)
}

/// Runs the scenario and writes its CSV files.
pub fn run(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    let output = execute(config)?;
    let mut written = Vec::with_capacity(output.files.len());
    for file in &output.files {
        fs::write(&file.path, &file.contents).map_err(|e| CliError::Output {
            path: file.path.display().to_string(),
            message: e.to_string(),
        })?;
        written.push(file.path.clone());
    }
    Ok(RunReport {
        files: written,
        max_residual: output.max_residual,
        residual_limit: config.max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!("fig7".parse::<Scenario>().is_err());
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = ConfigOverrides::parse("# header\nlambda0 = 1\nzeta 2\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Parse {
                line: 3,
                message: "expected `key = value`, found `zeta 2`".into()
            }
        );
        let err = ConfigOverrides::parse("epsilon = abc").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        let err = ConfigOverrides::parse("bogus = 1").unwrap_err();
        assert!(err.to_string().contains("unknown key `bogus`"));
        let err = ConfigOverrides::parse("eta = 1e-6\neta = 1e-5").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn defaults_resolve() {
        let cfg = ConfigOverrides::default().resolve().unwrap();
        assert_eq!(cfg.scenario, Scenario::Fig2VacuumIpaCoherent);
        assert_eq!(cfg.params, PhysicalParams::default());
        assert_eq!((cfg.grid.t_end(), cfg.grid.len()), (25.0, 2001));
        let text = cfg.render();
        assert!(text.contains("lambda0 = 1.0"));
        assert!(text.contains("mean_n = 5.0"));
        assert!(text.contains("epsilon = 0.0005"));
    }

    #[test]
    fn scenario_grids_apply_only_when_unset() {
        let cfg = ConfigOverrides {
            scenario: Some(Scenario::Fig1SqrtCoupling),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!((cfg.grid.t_end(), cfg.grid.len()), (6.0, 1201));
        let cfg = ConfigOverrides {
            scenario: Some(Scenario::Fig1SqrtCoupling),
            samples: Some(11),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!((cfg.grid.t_end(), cfg.grid.len()), (6.0, 11));
    }

    #[test]
    fn render_parses_back() {
        let cfg = ConfigOverrides {
            scenario: Some(Scenario::Fig4CosSquaredFock),
            epsilon: Some(1.25e-4),
            tail_tol: Some(3e-13),
            fock_n: Some(2),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let back = ConfigOverrides::parse(&cfg.render()).unwrap().resolve().unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn flags_win_over_file() {
        let file = ConfigOverrides::parse("lambda0 = 2\nmean_n = 3").unwrap();
        let flags = ConfigOverrides {
            lambda0: Some(0.5),
            ..Default::default()
        };
        let cfg = file.overlay(flags).resolve().unwrap();
        assert_eq!(cfg.params.lambda0, 0.5);
        assert_eq!(cfg.params.mean_n, 3.0);
    }

    #[test]
    fn bounds_are_enforced() {
        let bad = |o: ConfigOverrides| o.resolve().unwrap_err().to_string();
        assert!(bad(ConfigOverrides {
            epsilon: Some(0.1),
            ..Default::default()
        })
        .contains("epsilon"));
        assert!(bad(ConfigOverrides {
            detuning: Some(1.0),
            ..Default::default()
        })
        .contains("detuning"));
        assert!(bad(ConfigOverrides {
            samples: Some(1),
            ..Default::default()
        })
        .contains("samples"));
        assert!(bad(ConfigOverrides {
            eta: Some(0.0),
            ..Default::default()
        })
        .contains("eta"));
    }

    #[test]
    fn epsilon_above_working_bound_warns() {
        let cfg = ConfigOverrides {
            epsilon: Some(1e-3),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(cfg.warnings().len(), 1);
    }

    #[test]
    fn sibling_path_keeps_extension() {
        assert_eq!(
            sibling(Path::new("out/fig6.csv"), "_constant"),
            PathBuf::from("out/fig6_constant.csv")
        );
        assert_eq!(sibling(Path::new("fig6"), "_x"), PathBuf::from("fig6_x"));
    }

    #[test]
    fn fig1_csv_layout() {
        let cfg = ConfigOverrides {
            scenario: Some(Scenario::Fig1SqrtCoupling),
            samples: Some(61),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let out = execute(&cfg).unwrap();
        let text = &out.files[0].contents;
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], BASE_HEADER);
        assert_eq!(data.len(), 62);
        assert_eq!(
            data[1],
            "0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0"
        );
        assert!(out.max_residual < 1e-8);
    }
}
