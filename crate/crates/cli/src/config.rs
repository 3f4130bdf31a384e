//! Command-line flags, `key=value` config files, and the resolved run
//! configuration.
//!
//! Precedence: built-in per-command defaults < config file < flags.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// 𝓔 over an (r, θ) grid.
    Surface,
    /// 𝓔 against θ ∈ [0, 2π] for a list of r.
    Curves,
    /// log₁₀(1 − 𝓔) against θ near π/2 for a list of r.
    LogCurves,
    /// Half-level transition width against r.
    Width,
    /// Dual-path, quadrature and moment checks (JSON report).
    Verify,
    /// Basis-overlap and Fourier-phase checks (JSON report).
    MubCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "tmss",
    version,
    about = "Entanglement of the θ-parametrized two-mode squeezed state family"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    #[command(flatten)]
    pub flags: RawConfig,
}

/// Every setting as optional, so flags and file values can be layered.
///
/// Angles accept plain numbers or multiples of pi: `pi/2`, `3pi/2`,
/// `0.25*pi`.
#[derive(Debug, Clone, Default, Args, PartialEq)]
pub struct RawConfig {
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub r_steps: Option<usize>,
    /// Comma-separated squeezing values.
    #[arg(long, value_delimiter = ',', value_parser = parse_f64, allow_hyphen_values = true)]
    pub r_list: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_min: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_max: Option<f64>,
    #[arg(long)]
    pub theta_steps: Option<usize>,
    /// Comma-separated angles (verify: θ values; mub-check: angle separations).
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_list: Option<Vec<f64>>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub grid_sigmas: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Impurity level for `width`.
    #[arg(long)]
    pub level: Option<f64>,
    /// Seed for the random label pairs of `mub-check`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Regression hook: prefactor in `1 − c·∫M²` (physical value π).
    #[arg(long, hide = true, value_parser = parse_angle)]
    pub purity_prefactor: Option<f64>,
}

impl RawConfig {
    /// Fills unset fields from `lower`.
    pub fn or(self, lower: RawConfig) -> RawConfig {
        RawConfig {
            r_min: self.r_min.or(lower.r_min),
            r_max: self.r_max.or(lower.r_max),
            r_steps: self.r_steps.or(lower.r_steps),
            r_list: self.r_list.or(lower.r_list),
            theta_min: self.theta_min.or(lower.theta_min),
            theta_max: self.theta_max.or(lower.theta_max),
            theta_steps: self.theta_steps.or(lower.theta_steps),
            theta_list: self.theta_list.or(lower.theta_list),
            grid_n: self.grid_n.or(lower.grid_n),
            grid_sigmas: self.grid_sigmas.or(lower.grid_sigmas),
            tol: self.tol.or(lower.tol),
            level: self.level.or(lower.level),
            seed: self.seed.or(lower.seed),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
            config: self.config.or(lower.config),
            threads: self.threads.or(lower.threads),
            purity_prefactor: self.purity_prefactor.or(lower.purity_prefactor),
        }
    }

    /// Parses a flat `key = value` file. Keys are flag names with or without
    /// the leading dashes; `_` and `-` are interchangeable; `#` starts a
    /// comment.
    pub fn from_config_text(text: &str) -> Result<RawConfig, CliError> {
        let mut cfg = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim().trim_start_matches('-').replace('_', "-");
            let value = value.trim();
            let bad =
                |e: String| CliError::Usage(format!("config line {}: {key}: {e}", lineno + 1));
            match key.as_str() {
                "r-min" => cfg.r_min = Some(parse_f64(value).map_err(bad)?),
                "r-max" => cfg.r_max = Some(parse_f64(value).map_err(bad)?),
                "r-steps" => cfg.r_steps = Some(parse_usize(value).map_err(bad)?),
                "r-list" => cfg.r_list = Some(parse_list(value).map_err(bad)?),
                "theta-min" => cfg.theta_min = Some(parse_angle(value).map_err(bad)?),
                "theta-max" => cfg.theta_max = Some(parse_angle(value).map_err(bad)?),
                "theta-steps" => cfg.theta_steps = Some(parse_usize(value).map_err(bad)?),
                "theta-list" => cfg.theta_list = Some(parse_angle_list(value).map_err(bad)?),
                "grid-n" => cfg.grid_n = Some(parse_usize(value).map_err(bad)?),
                "grid-sigmas" => cfg.grid_sigmas = Some(parse_f64(value).map_err(bad)?),
                "tol" => cfg.tol = Some(parse_f64(value).map_err(bad)?),
                "level" => cfg.level = Some(parse_f64(value).map_err(bad)?),
                "seed" => cfg.seed = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => {
                    cfg.format = Some(Format::from_str(value, true).map_err(bad)?);
                }
                "threads" => cfg.threads = Some(parse_usize(value).map_err(bad)?),
                "purity-prefactor" => cfg.purity_prefactor = Some(parse_angle(value).map_err(bad)?),
                "config" => return Err(bad("nested config files are not supported".into())),
                _ => {
                    return Err(CliError::Usage(format!(
                        "config line {}: unknown key {key}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_config_file(path: &Path) -> Result<RawConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_config_text(&text)
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| format!("invalid number {s:?}: {e}"))?;
    if !v.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(v)
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|e| format!("invalid integer {s:?}: {e}"))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_f64).collect()
}

pub fn parse_angle_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_angle).collect()
}

/// A number, or `[a][*]pi[/b]` with optional leading minus.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let Some(pos) = t.find("pi") else {
        return parse_f64(&t);
    };
    let (coef, rest) = t.split_at(pos);
    let rest = &rest[2..];
    let coef = coef.trim().trim_end_matches('*').trim();
    let coef = match coef {
        "" => 1.0,
        "-" => -1.0,
        c => parse_f64(c)?,
    };
    let rest = rest.trim();
    let div = if rest.is_empty() {
        1.0
    } else if let Some(d) = rest.strip_prefix('/') {
        parse_f64(d)?
    } else {
        return Err(format!("cannot parse angle {s:?}"));
    };
    if div == 0.0 {
        return Err(format!("division by zero in {s:?}"));
    }
    Ok(coef * PI / div)
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub r_min: f64,
    pub r_max: f64,
    pub r_steps: usize,
    pub r_list: Vec<f64>,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_steps: usize,
    pub theta_list: Vec<f64>,
    pub grid_n: usize,
    pub grid_sigmas: f64,
    pub tol: f64,
    pub level: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub purity_prefactor: f64,
}

/// Default r values for the θ-curves.
pub const DEFAULT_CURVE_RS: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 5.0];
/// Half-width of the default window around π/2 for `log-curves`.
pub const LOG_WINDOW: f64 = 0.1;

impl RunConfig {
    /// Built-in defaults for `command`.
    pub fn defaults(command: Command) -> RunConfig {
        let mut cfg = RunConfig {
            command,
            r_min: 0.0,
            r_max: 2.0,
            r_steps: 81,
            r_list: DEFAULT_CURVE_RS.to_vec(),
            theta_min: 0.0,
            theta_max: FRAC_PI_2,
            theta_steps: 181,
            theta_list: Vec::new(),
            grid_n: 160,
            grid_sigmas: 8.0,
            tol: 1e-4,
            level: 0.5,
            seed: 20_240_601,
            out: None,
            format: Format::Csv,
            threads: None,
            purity_prefactor: PI,
        };
        match command {
            Command::Surface => {}
            Command::Curves => {
                cfg.theta_max = TAU;
                cfg.theta_steps = 721;
            }
            Command::LogCurves => {
                cfg.theta_min = FRAC_PI_2 - LOG_WINDOW;
                cfg.theta_max = FRAC_PI_2 + LOG_WINDOW;
                cfg.theta_steps = 401;
            }
            Command::Width => {
                cfg.r_list = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
            }
            Command::Verify => {
                cfg.r_list = vec![0.0, 0.25, 0.5, 0.75, 1.0];
                cfg.theta_list = vec![0.0, PI / 6.0, PI / 3.0, FRAC_PI_2, 2.0];
            }
            Command::MubCheck => {
                cfg.theta_list = vec![PI / 6.0, PI / 4.0, FRAC_PI_2];
                cfg.tol = 1e-3;
                cfg.format = Format::Json;
            }
        }
        cfg
    }

    /// Layers `raw` over the defaults and validates.
    pub fn resolve(command: Command, raw: RawConfig) -> Result<RunConfig, CliError> {
        let raw = match &raw.config {
            Some(path) => raw.clone().or(RawConfig::from_config_file(path)?),
            None => raw,
        };
        let d = Self::defaults(command);
        let cfg = RunConfig {
            command,
            r_min: raw.r_min.unwrap_or(d.r_min),
            r_max: raw.r_max.unwrap_or(d.r_max),
            r_steps: raw.r_steps.unwrap_or(d.r_steps),
            r_list: raw.r_list.unwrap_or(d.r_list),
            theta_min: raw.theta_min.unwrap_or(d.theta_min),
            theta_max: raw.theta_max.unwrap_or(d.theta_max),
            theta_steps: raw.theta_steps.unwrap_or(d.theta_steps),
            theta_list: raw.theta_list.unwrap_or(d.theta_list),
            grid_n: raw.grid_n.unwrap_or(d.grid_n),
            grid_sigmas: raw.grid_sigmas.unwrap_or(d.grid_sigmas),
            tol: raw.tol.unwrap_or(d.tol),
            level: raw.level.unwrap_or(d.level),
            seed: raw.seed.unwrap_or(d.seed),
            out: raw.out.or(d.out),
            format: raw.format.unwrap_or(d.format),
            threads: raw.threads.or(d.threads),
            purity_prefactor: raw.purity_prefactor.unwrap_or(d.purity_prefactor),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !(self.tol > 0.0) {
            return usage(format!("--tol must be positive, got {}", self.tol));
        }
        if self.threads == Some(0) {
            return usage("--threads must be at least 1".into());
        }
        let r_ok = |r: f64| (0.0..=tmss_core::tmss::MAX_SQUEEZING).contains(&r);
        match self.command {
            Command::Surface => {
                if self.r_steps < 2 || self.theta_steps < 2 {
                    return usage("step counts must be at least 2".into());
                }
                if !(self.r_max > self.r_min) || !r_ok(self.r_min) || !r_ok(self.r_max) {
                    return usage(format!(
                        "r range [{}, {}] must be non-degenerate within [0, 400]",
                        self.r_min, self.r_max
                    ));
                }
                self.validate_theta_range(true)?;
            }
            Command::Curves | Command::LogCurves => {
                if self.theta_steps < 2 {
                    return usage("--theta-steps must be at least 2".into());
                }
                self.validate_r_list(r_ok)?;
                self.validate_theta_range(false)?;
            }
            Command::Width => {
                self.validate_r_list(r_ok)?;
                if self.r_list.iter().any(|&r| r < 1.0) {
                    return usage("width needs every r >= 1".into());
                }
                if !(self.level > 0.0 && self.level < 1.0) {
                    return usage(format!("--level must lie in (0, 1), got {}", self.level));
                }
            }
            Command::Verify => {
                self.validate_r_list(r_ok)?;
                if self.theta_list.is_empty() {
                    return usage("--theta-list must not be empty".into());
                }
            }
            Command::MubCheck => {
                if self.theta_list.is_empty() {
                    return usage("--theta-list (angle separations) must not be empty".into());
                }
                if let Some(d) = self.theta_list.iter().find(|d| d.sin().abs() <= 1e-3) {
                    return usage(format!("angle separation {d} has |sin| <= 1e-3"));
                }
            }
        }
        Ok(())
    }

    fn validate_r_list(&self, r_ok: impl Fn(f64) -> bool) -> Result<(), CliError> {
        if self.r_list.is_empty() {
            return Err(CliError::Usage("--r-list must not be empty".into()));
        }
        if let Some(r) = self.r_list.iter().find(|&&r| !r_ok(r)) {
            return Err(CliError::Usage(format!("r = {r} outside [0, 400]")));
        }
        Ok(())
    }

    fn validate_theta_range(&self, restrict: bool) -> Result<(), CliError> {
        if !(self.theta_max > self.theta_min) {
            return Err(CliError::Usage(format!(
                "theta range [{}, {}] is degenerate",
                self.theta_min, self.theta_max
            )));
        }
        // A few ulps of slack so that `2pi` as typed is accepted.
        let slack = 8.0 * f64::EPSILON * TAU;
        if restrict && (self.theta_min < -slack || self.theta_max > TAU + slack) {
            return Err(CliError::Usage(
                "theta range must lie within [0, 2pi]".into(),
            ));
        }
        Ok(())
    }

    /// `steps` evenly spaced values with both endpoints hit exactly.
    pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
        let last = (steps - 1) as f64;
        (0..steps)
            .map(|i| {
                if i + 1 == steps {
                    max
                } else {
                    min + (max - min) * (i as f64 / last)
                }
            })
            .collect()
    }

    pub fn r_grid(&self) -> Vec<f64> {
        Self::linspace(self.r_min, self.r_max, self.r_steps)
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        Self::linspace(self.theta_min, self.theta_max, self.theta_steps)
    }
}
