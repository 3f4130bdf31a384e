//! One function per subcommand.
//!
//! Grid evaluation runs on the ambient rayon pool; results are collected in
//! input order so output never depends on scheduling.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use tmss_core::mub::{fourier_check, overlap, predicted_overlap_modulus, RegulatorSchedule};
use tmss_core::wigner::{impurity_and_moments, QuadratureGrid, ORACLE_MAX_R};
use tmss_core::{
    impurity_closed_form, impurity_from_covariance, theta_tmss_covariance, transition_width,
    TmssParams,
};

use crate::config::{Command, RunConfig};
use crate::output::{Report, Table};
use crate::{CliError, Output};

/// Relative tolerance of the covariance-vs-closed-form comparison in `verify`.
pub const DUAL_PATH_TOL: f64 = 1e-12;
/// Absolute floor for that comparison when the closed form is (near) zero.
pub const DUAL_PATH_FLOOR: f64 = 1e-15;
/// Closed-form values below this are compared absolutely by the quadrature check.
pub const QUADRATURE_SMALL_E: f64 = 1e-3;
pub const QUADRATURE_SMALL_E_TOL: f64 = 1e-6;
/// Largest allowed spread of overlap moduli over random label pairs.
pub const LABEL_SPREAD_TOL: f64 = 2e-3;
/// Angles of the random-label overlap cases.
pub const LABEL_ANGLES: (f64, f64) = (2.0 * PI / 3.0, FRAC_PI_6);
pub const LABEL_PAIRS: usize = 20;
/// Base angle of the overlap cases; the other basis sits at base + Δθ.
pub const OVERLAP_BASE: f64 = FRAC_PI_6;
/// Angle of the random Fourier-phase cases.
pub const FOURIER_THETA: f64 = PI / 5.0;
pub const FOURIER_RANDOM: usize = 10;
/// Random labels are drawn from `[−LABEL_RANGE, LABEL_RANGE]`.
pub const LABEL_RANGE: f64 = 1.5;

pub fn dispatch(cfg: &RunConfig) -> Result<Output, CliError> {
    Ok(match cfg.command {
        Command::Surface => Output::Table(surface(cfg)?),
        Command::Curves => Output::Table(curves(cfg)?),
        Command::LogCurves => Output::Table(log_curves(cfg)?),
        Command::Width => Output::Table(width(cfg)?),
        Command::Verify => Output::Report(verify(cfg)),
        Command::MubCheck => Output::Report(mub_check(cfg)?),
    })
}

fn params(r: f64, theta: f64) -> Result<TmssParams, CliError> {
    Ok(TmssParams::new(r, theta)?)
}

/// Columns `r, theta, E` over the tensor grid, r-major.
pub fn surface(cfg: &RunConfig) -> Result<Table, CliError> {
    let thetas = cfg.theta_grid();
    let blocks: Vec<Vec<Vec<Option<f64>>>> = cfg
        .r_grid()
        .into_par_iter()
        .map(|r| {
            thetas
                .iter()
                .map(|&t| {
                    Ok(vec![
                        Some(r),
                        Some(t),
                        Some(impurity_closed_form(params(r, t)?).value),
                    ])
                })
                .collect::<Result<_, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(vec!["r", "theta", "E"]);
    blocks.into_iter().flatten().for_each(|row| table.push(row));
    Ok(table)
}

/// Columns `theta, r, <value>` for each r in the list, one curve after another.
fn theta_curves(
    cfg: &RunConfig,
    value_column: &'static str,
    value: fn(TmssParams) -> f64,
) -> Result<Table, CliError> {
    let thetas = cfg.theta_grid();
    let blocks: Vec<Vec<Vec<Option<f64>>>> = cfg
        .r_list
        .par_iter()
        .map(|&r| {
            thetas
                .iter()
                .map(|&t| Ok(vec![Some(t), Some(r), Some(value(params(r, t)?))]))
                .collect::<Result<_, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(vec!["theta", "r", value_column]);
    blocks.into_iter().flatten().for_each(|row| table.push(row));
    Ok(table)
}

pub fn curves(cfg: &RunConfig) -> Result<Table, CliError> {
    theta_curves(cfg, "E", |p| impurity_closed_form(p).value)
}

/// `log10(1 − E)` from the log-domain path, finite for every r ≤ 400.
pub fn log_curves(cfg: &RunConfig) -> Result<Table, CliError> {
    theta_curves(cfg, "log10_one_minus_E", |p| {
        impurity_closed_form(p).log10_one_minus()
    })
}

/// Columns `r, width, ratio`, where ratio is width over the previous row's
/// width (blank on the first row).
pub fn width(cfg: &RunConfig) -> Result<Table, CliError> {
    let widths: Vec<f64> = cfg
        .r_list
        .par_iter()
        .map(|&r| transition_width(r, cfg.level))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(vec!["r", "width", "ratio"]);
    for (i, (&r, &w)) in cfg.r_list.iter().zip(&widths).enumerate() {
        let ratio = (i > 0).then(|| w / widths[i - 1]);
        table.push(vec![Some(r), Some(w), ratio]);
    }
    Ok(table)
}

/// One `verify` case. Numerical failures are recorded in the case, not
/// propagated.
pub fn verify_case(r: f64, theta: f64, grid: &QuadratureGrid, tol: f64, prefactor: f64) -> Value {
    let mut case = Map::new();
    case.insert("r".into(), json!(r));
    case.insert("theta".into(), json!(theta));
    let p = match TmssParams::new(r, theta) {
        Ok(p) => p,
        Err(e) => {
            case.insert("error".into(), json!(e.to_string()));
            case.insert("pass".into(), json!(false));
            return Value::Object(case);
        }
    };
    let closed = impurity_closed_form(p).value;
    case.insert("E_closed".into(), json!(closed));
    let mut pass = true;
    let mut errors = Vec::new();

    match impurity_from_covariance(p) {
        Ok(cov) => {
            let diff = (cov - closed).abs();
            let ok = diff <= (DUAL_PATH_TOL * closed.abs()).max(DUAL_PATH_FLOOR);
            case.insert("E_covariance".into(), json!(cov));
            case.insert("dual_path_err".into(), json!(diff));
            pass &= ok;
        }
        Err(e) => {
            errors.push(format!("covariance: {e}"));
            pass = false;
        }
    }

    if r <= ORACLE_MAX_R {
        let outcome =
            theta_tmss_covariance(p).and_then(|s| impurity_and_moments(&s, grid, prefactor));
        match outcome {
            Ok((quad, moments)) => {
                let diff = (quad - closed).abs();
                let allowed = if closed < QUADRATURE_SMALL_E {
                    QUADRATURE_SMALL_E_TOL.min(tol)
                } else {
                    tol
                };
                case.insert("E_quadrature".into(), json!(quad));
                case.insert("quadrature_err".into(), json!(diff));
                case.insert("max_moment_err".into(), json!(moments.max_error()));
                pass &= diff <= allowed && moments.passes();
            }
            Err(e) => {
                errors.push(format!("quadrature: {e}"));
                case.insert("E_quadrature".into(), Value::Null);
                case.insert("max_moment_err".into(), Value::Null);
                pass = false;
            }
        }
    } else {
        // Outside the oracle's range; only the dual-path check applies.
        case.insert("E_quadrature".into(), Value::Null);
        case.insert("max_moment_err".into(), Value::Null);
    }
    if !errors.is_empty() {
        case.insert("error".into(), json!(errors.join("; ")));
    }
    case.insert("pass".into(), json!(pass));
    Value::Object(case)
}

/// Dual-path, quadrature and moment checks over `r_list × theta_list`.
///
/// Cases run one after another; each grid pass is parallel internally.
pub fn verify(cfg: &RunConfig) -> Report {
    let grid = match QuadratureGrid::new(cfg.grid_n, cfg.grid_sigmas) {
        Ok(g) => g,
        Err(e) => {
            return Report {
                command: "verify",
                cases: vec![json!({ "error": e.to_string(), "pass": false })],
                summary: Map::new(),
                pass: false,
            }
        }
    };
    let mut cases = Vec::new();
    for &r in &cfg.r_list {
        for &t in &cfg.theta_list {
            cases.push(verify_case(r, t, &grid, cfg.tol, cfg.purity_prefactor));
        }
    }
    let pass = cases.iter().all(|c| c["pass"] == json!(true));
    Report {
        command: "verify",
        cases,
        summary: Map::new(),
        pass,
    }
}

/// Random labels for the label-independence and Fourier cases.
pub fn random_labels(seed: u64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                rng.gen_range(-LABEL_RANGE..=LABEL_RANGE),
                rng.gen_range(-LABEL_RANGE..=LABEL_RANGE),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum MubCase {
    Overlap {
        kind: &'static str,
        y1: f64,
        t1: f64,
        y2: f64,
        t2: f64,
    },
    Fourier {
        y: f64,
        k: f64,
        theta: f64,
    },
}

fn run_mub_case(case: MubCase, sched: &RegulatorSchedule, tol: f64) -> Value {
    match case {
        MubCase::Overlap {
            kind,
            y1,
            t1,
            y2,
            t2,
        } => {
            let predicted = predicted_overlap_modulus(t1, t2);
            let mut v = json!({
                "kind": kind, "t1": t1, "t2": t2, "y1": y1, "y2": y2, "predicted": predicted,
            });
            match overlap(y1, t1, y2, t2, sched) {
                Ok(ex) => {
                    let measured = ex.value.norm();
                    let err = (measured - predicted).abs();
                    v["measured"] = json!(measured);
                    v["err"] = json!(err);
                    v["extrapolation_spread"] = json!(ex.spread());
                    v["pass"] = json!(err <= tol);
                }
                Err(e) => {
                    v["measured"] = Value::Null;
                    v["err"] = Value::Null;
                    v["error"] = json!(e.to_string());
                    v["pass"] = json!(false);
                }
            }
            v
        }
        MubCase::Fourier { y, k, theta } => {
            let predicted = k * y;
            let mut v = json!({
                "kind": "fourier", "y": y, "k": k, "theta": theta, "predicted_phase": predicted,
                "predicted_modulus": predicted_overlap_modulus(FRAC_PI_2, 0.0),
            });
            match fourier_check(y, k, theta, sched) {
                Ok(fc) => {
                    let err = fc.modulus_error().max(fc.phase_error().abs());
                    v["measured_re"] = json!(fc.value.re);
                    v["measured_im"] = json!(fc.value.im);
                    v["modulus_err"] = json!(fc.modulus_error());
                    v["phase_err"] = json!(fc.phase_error());
                    v["raw_phase_offset"] = json!(fc.raw_phase_offset());
                    v["err"] = json!(err);
                    v["pass"] = json!(err <= tol);
                }
                Err(e) => {
                    v["err"] = Value::Null;
                    v["error"] = json!(e.to_string());
                    v["pass"] = json!(false);
                }
            }
            v
        }
    }
}

/// Overlap-modulus law, label independence and Fourier-phase cases.
pub fn mub_check(cfg: &RunConfig) -> Result<Report, CliError> {
    let sched = RegulatorSchedule::default();
    let mut plan = Vec::new();
    for &d in &cfg.theta_list {
        plan.push(MubCase::Overlap {
            kind: "overlap",
            y1: 0.0,
            t1: OVERLAP_BASE + d,
            y2: 0.0,
            t2: OVERLAP_BASE,
        });
    }
    let (t1, t2) = LABEL_ANGLES;
    let labels = random_labels(cfg.seed, LABEL_PAIRS + FOURIER_RANDOM);
    for &(y1, y2) in &labels[..LABEL_PAIRS] {
        plan.push(MubCase::Overlap {
            kind: "label",
            y1,
            t1,
            y2,
            t2,
        });
    }
    plan.push(MubCase::Fourier {
        y: 0.0,
        k: 0.0,
        theta: FRAC_PI_4,
    });
    plan.push(MubCase::Fourier {
        y: 1.0,
        k: 2.0,
        theta: FOURIER_THETA,
    });
    for &(y, k) in &labels[LABEL_PAIRS..] {
        plan.push(MubCase::Fourier {
            y,
            k,
            theta: FOURIER_THETA,
        });
    }

    let cases: Vec<Value> = plan
        .par_iter()
        .map(|&c| run_mub_case(c, &sched, cfg.tol))
        .collect();

    let label_moduli: Vec<f64> = cases
        .iter()
        .filter(|c| c["kind"] == "label")
        .filter_map(|c| c["measured"].as_f64())
        .collect();
    let spread = if label_moduli.len() == LABEL_PAIRS {
        let max = label_moduli
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = label_moduli.iter().cloned().fold(f64::INFINITY, f64::min);
        Some(max - min)
    } else {
        None
    };
    let spread_ok = spread.is_some_and(|s| s <= LABEL_SPREAD_TOL);

    let mut summary = Map::new();
    summary.insert("label_spread".into(), json!(spread));
    summary.insert("label_spread_tol".into(), json!(LABEL_SPREAD_TOL));
    summary.insert("seed".into(), json!(cfg.seed));
    let pass = spread_ok && cases.iter().all(|c| c["pass"] == json!(true));
    Ok(Report {
        command: "mub-check",
        cases,
        summary,
        pass,
    })
}
