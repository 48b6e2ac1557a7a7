//! Experiment configuration: presets, `key = value` files and CLI flags,
//! layered in that order of increasing priority.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use num_complex::Complex64 as C64;
use qwigner_core::grid::default_k_count;
use qwigner_core::{EvolutionMethod, InitialStateSpec};

use crate::error::{CliError, Result};

/// Spinors further than this from unit norm are rejected.
pub const SPINOR_REJECT_TOL: f64 = 1e-3;
/// Spinors further than this from unit norm are normalized with a warning.
pub const SPINOR_WARN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitialKind {
    Localized,
    Cat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Amplitude,
    Recursion,
}

impl From<Method> for EvolutionMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Amplitude => EvolutionMethod::Amplitude,
            Method::Recursion => EvolutionMethod::Recursion,
        }
    }
}

/// Canned experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Localized start, Hadamard coin, fields at t = 0, 100, 500.
    Fig1,
    /// Negativity for the localized start and cats with a = 4, 30.
    Fig6,
    /// Entropy for the same three starts.
    Fig7,
}

const SWEEP: [u32; 3] = [0, 4, 30];

/// One configuration layer; unset fields fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub theta: Option<f64>,
    pub steps: Option<u64>,
    pub initial: Option<InitialKind>,
    pub cat_a: Option<u32>,
    pub coin_spinor: Option<[f64; 4]>,
    pub k_points: Option<usize>,
    pub method: Option<Method>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub times: Option<Vec<u64>>,
    pub preset: Option<Preset>,
}

impl Settings {
    pub fn for_preset(preset: Preset) -> Self {
        let mut s = Settings { theta: Some(FRAC_PI_4), preset: Some(preset), ..Default::default() };
        match preset {
            Preset::Fig1 => {
                s.steps = Some(500);
                s.times = Some(vec![0, 100, 500]);
            }
            Preset::Fig6 | Preset::Fig7 => s.steps = Some(200),
        }
        s
    }

    /// Fills every unset field of `self` from `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            theta: self.theta.or(lower.theta),
            steps: self.steps.or(lower.steps),
            initial: self.initial.or(lower.initial),
            cat_a: self.cat_a.or(lower.cat_a),
            coin_spinor: self.coin_spinor.or(lower.coin_spinor),
            k_points: self.k_points.or(lower.k_points),
            method: self.method.or(lower.method),
            output: self.output.or(lower.output),
            format: self.format.or(lower.format),
            times: self.times.or(lower.times),
            preset: self.preset.or(lower.preset),
        }
    }

    /// Sets one field from its textual form. Keys are the long CLI flag
    /// names without the leading dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "theta" => self.theta = Some(parse_num(key, value)?),
            "steps" => self.steps = Some(parse_num(key, value)?),
            "initial" => self.initial = Some(parse_enum(key, value)?),
            "cat-a" => self.cat_a = Some(parse_num(key, value)?),
            "coin-spinor" => self.coin_spinor = Some(parse_spinor(value).map_err(CliError::InvalidArgument)?),
            "k-points" => self.k_points = Some(parse_num(key, value)?),
            "method" => self.method = Some(parse_enum(key, value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = Some(parse_enum(key, value)?),
            "times" => self.times = Some(parse_times(value).map_err(CliError::InvalidArgument)?),
            "preset" => self.preset = Some(parse_enum(key, value)?),
            other => return Err(CliError::InvalidArgument(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_kv(text: &str) -> Result<Settings> {
        let mut s = Settings::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::InvalidArgument(format!("config line {}: expected `key = value`", i + 1))
            })?;
            s.set(key, value)?;
        }
        Ok(s)
    }

    pub fn from_kv_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Settings::parse_kv(&text)
    }

    /// Stacks CLI flags over an optional config file over an optional preset
    /// and resolves the result.
    pub fn layered(cli: Settings, file: Option<&Path>) -> Result<ExperimentConfig> {
        let file = file.map(Settings::from_kv_file).transpose()?.unwrap_or_default();
        let preset = cli.preset.or(file.preset);
        let base = preset.map(Settings::for_preset).unwrap_or_default();
        cli.over(file).over(base).resolve()
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let mut warnings = Vec::new();
        let theta = self.theta.unwrap_or(FRAC_PI_4);
        if !theta.is_finite() {
            return Err(CliError::InvalidArgument("theta must be finite".into()));
        }
        let steps = self.steps.unwrap_or(100);
        if let Some(k) = self.k_points {
            if k < 4 {
                return Err(CliError::InvalidArgument(format!("k-points must be at least 4, got {k}")));
            }
        }
        let single = self.initial.is_some() || self.cat_a.is_some() || self.coin_spinor.is_some();
        let sweep = matches!(self.preset, Some(Preset::Fig6 | Preset::Fig7)) && !single;
        let initials = if sweep {
            SWEEP
                .iter()
                .map(|&a| match a {
                    0 => labelled(InitialStateSpec::symmetric_localized()),
                    a => labelled(InitialStateSpec::cat(a)),
                })
                .collect()
        } else {
            let kind = self.initial.unwrap_or(if self.cat_a.is_some() {
                InitialKind::Cat
            } else {
                InitialKind::Localized
            });
            let spec = match kind {
                InitialKind::Localized => match self.coin_spinor {
                    Some(raw) => {
                        let (spinor, warning) = normalize_spinor(raw)?;
                        warnings.extend(warning);
                        InitialStateSpec::localized(spinor)?
                    }
                    None => InitialStateSpec::symmetric_localized(),
                },
                InitialKind::Cat => {
                    let a = self.cat_a.ok_or_else(|| {
                        CliError::InvalidArgument("--cat-a is required with --initial cat".into())
                    })?;
                    InitialStateSpec::cat(a)
                }
            };
            vec![labelled(spec)]
        };
        Ok(ExperimentConfig {
            theta,
            steps,
            initials,
            sweep,
            k_points: self.k_points,
            method: self.method.map(Into::into),
            output: self.output.unwrap_or_else(|| PathBuf::from("out")),
            format: self.format.unwrap_or_default(),
            times: self.times,
            warnings,
        })
    }
}

fn labelled(spec: InitialStateSpec) -> LabelledInitial {
    let label = match spec {
        InitialStateSpec::Localized { .. } => "a0".to_string(),
        InitialStateSpec::Cat { half_separation } => format!("a{half_separation}"),
    };
    LabelledInitial { spec, label }
}

/// An initial state with the tag used in file names of preset sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledInitial {
    pub spec: InitialStateSpec,
    pub label: String,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub theta: f64,
    pub steps: u64,
    pub initials: Vec<LabelledInitial>,
    /// Several initial states are run and file names carry their labels.
    pub sweep: bool,
    pub k_points: Option<usize>,
    pub method: Option<EvolutionMethod>,
    pub output: PathBuf,
    pub format: OutputFormat,
    pub times: Option<Vec<u64>>,
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    pub fn k_points(&self) -> usize {
        self.k_points.unwrap_or_else(|| default_k_count(self.steps))
    }

    /// `output/<stem>[_<label>].<ext>`
    pub fn output_file(&self, stem: &str, initial: &LabelledInitial) -> PathBuf {
        let name = if self.sweep {
            format!("{stem}_{}.{}", initial.label, self.format.extension())
        } else {
            format!("{stem}.{}", self.format.extension())
        };
        self.output.join(name)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::InvalidArgument(format!("{key}: cannot parse `{value}`: {e}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value, true).map_err(|_| CliError::InvalidArgument(format!("{key}: unknown value `{value}`")))
}

/// `re_R,im_R,re_L,im_L`
pub fn parse_spinor(s: &str) -> std::result::Result<[f64; 4], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("coin-spinor `{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 4]>::try_from(parts)
        .map_err(|p| format!("coin-spinor needs four reals re_R,im_R,re_L,im_L, got {}", p.len()))
}

/// Comma-separated list of times.
pub fn parse_times(s: &str) -> std::result::Result<Vec<u64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("times `{p}`: {e}")))
        .collect()
}

/// Scales a hand-typed spinor to unit norm. Returns a warning when the
/// correction exceeds [`SPINOR_WARN_TOL`].
pub fn normalize_spinor(raw: [f64; 4]) -> Result<([C64; 2], Option<String>)> {
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > SPINOR_REJECT_TOL {
        return Err(CliError::InvalidArgument(format!("coin spinor norm {norm} is too far from 1")));
    }
    let warning = ((norm - 1.0).abs() > SPINOR_WARN_TOL)
        .then(|| format!("coin spinor norm {norm} differs from 1; normalizing"));
    let s = [C64::new(raw[0], raw[1]) / norm, C64::new(raw[2], raw[3]) / norm];
    Ok((s, warning))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = Settings::default().resolve().unwrap();
        assert_eq!(c.theta, FRAC_PI_4);
        assert_eq!(c.steps, 100);
        assert_eq!(c.k_points(), 808);
        assert_eq!(c.initials.len(), 1);
        assert_eq!(c.initials[0].spec, InitialStateSpec::symmetric_localized());
        assert_eq!(c.format, OutputFormat::Csv);
        assert!(!c.sweep);
    }

    #[test]
    fn kv_file_and_precedence() {
        let file = Settings::parse_kv("# run\ntheta = 0.5\nsteps=7\ninitial = cat\ncat-a = 3\nformat = json\n").unwrap();
        let cli = Settings { steps: Some(9), ..Default::default() };
        let c = cli.over(file).resolve().unwrap();
        assert_eq!(c.theta, 0.5);
        assert_eq!(c.steps, 9);
        assert_eq!(c.initials[0].spec, InitialStateSpec::cat(3));
        assert_eq!(c.format, OutputFormat::Json);
        assert!(Settings::parse_kv("bogus = 1").is_err());
        assert!(Settings::parse_kv("steps 3").is_err());
        assert!(Settings::parse_kv("steps = -3").is_err());
    }

    #[test]
    fn presets() {
        let c = Settings::for_preset(Preset::Fig1).resolve().unwrap();
        assert_eq!((c.steps, c.times.clone()), (500, Some(vec![0, 100, 500])));
        let c = Settings::for_preset(Preset::Fig6).resolve().unwrap();
        let labels: Vec<_> = c.initials.iter().map(|i| i.label.as_str()).collect();
        assert_eq!(labels, ["a0", "a4", "a30"]);
        assert_eq!(c.initials[0].spec, InitialStateSpec::symmetric_localized());
        assert!(c.sweep);
        assert!(c.output_file("negativity", &c.initials[2]).ends_with("negativity_a30.csv"));
        // an explicit initial state overrides the sweep
        let one = Settings { cat_a: Some(4), ..Default::default() }.over(Settings::for_preset(Preset::Fig7));
        assert_eq!(one.resolve().unwrap().initials.len(), 1);
    }

    #[test]
    fn spinor_tolerances() {
        let (s, w) = normalize_spinor([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(w.is_none());
        assert_eq!(s[0], C64::new(1.0, 0.0));
        let (s, w) = normalize_spinor([0.7071, 0.0, 0.0, 0.7071]).unwrap();
        assert!(w.is_some());
        assert!(((s[0].norm_sqr() + s[1].norm_sqr()) - 1.0).abs() < 1e-15);
        assert!(normalize_spinor([0.9, 0.0, 0.0, 0.0]).is_err());
        assert!(parse_spinor("1,0,0").is_err());
        assert_eq!(parse_spinor("1, 0, 0, 0").unwrap(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn invalid_values() {
        let s = Settings { k_points: Some(3), ..Default::default() };
        assert!(s.resolve().is_err());
        let s = Settings { theta: Some(f64::NAN), ..Default::default() };
        assert!(s.resolve().is_err());
        let s = Settings { initial: Some(InitialKind::Cat), ..Default::default() };
        assert!(s.resolve().is_err());
    }
}
