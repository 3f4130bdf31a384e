//! Acceptance criteria, one line each.
//!
//! Runs without the libtest harness so every verdict is printed even when
//! nothing fails. Exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI, TAU};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tmss_cli::{execute, Cli, Command, Format, RawConfig, RunConfig};
use tmss_core::mub::{fourier_check, overlap_modulus, RegulatorSchedule};
use tmss_core::phase_space::squeezer;
use tmss_core::wigner::{moment_check, quadrature_impurity, QuadratureGrid};
use tmss_core::{
    epr_basis_change, impurity_closed_form, impurity_from_covariance, mode_rotation, purity,
    reduce, symplectic_eigenvalues, theta_tmss_covariance, transition_width, vb_rotation,
    SymplecticTransform, TmssParams,
};

type Check = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn params(r: f64, theta: f64) -> TmssParams {
    TmssParams::new(r, theta).unwrap()
}

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_form() -> Check {
    let mut rng = StdRng::seed_from_u64(1);
    let vacuum_max = (0..100)
        .map(|_| {
            impurity_closed_form(params(0.0, rng.gen_range(0.0..TAU)))
                .value
                .abs()
        })
        .fold(0.0, f64::max);
    let product_max = (1..=100)
        .map(|i| {
            impurity_closed_form(params(0.1 * i as f64, FRAC_PI_2))
                .value
                .abs()
        })
        .fold(0.0, f64::max);
    let at_one = impurity_closed_form(params(1.0, 0.0)).value;
    let oracle = 1.0 - 1.0 / 2.0_f64.cosh();
    let err = (at_one - oracle).abs();
    verdict(
        vacuum_max <= 1e-15 && product_max <= 1e-15 && err <= 1e-12,
        format!("max|E(0,θ)| = {vacuum_max:.1e}, max|E(r,π/2)| = {product_max:.1e}, |E(1,0) − (1 − 1/cosh 2)| = {err:.1e}"),
    )
}

fn dual_path() -> Check {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = (0.0_f64, 0.0, 0.0, 0.0);
    let mut failures = Vec::new();
    let mut max_abs: f64 = 0.0;
    for _ in 0..1000 {
        let r = rng.gen_range(0.0..=5.0);
        let theta = rng.gen_range(0.0..TAU);
        let p = params(r, theta);
        let closed = impurity_closed_form(p).value;
        let cov = impurity_from_covariance(p).map_err(|e| e.to_string())?;
        let abs = (cov - closed).abs();
        max_abs = max_abs.max(abs);
        let rel = if closed == 0.0 {
            if abs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            abs / closed.abs()
        };
        if rel > worst.0 {
            worst = (rel, r, theta, closed);
        }
        if rel > 1e-12 {
            failures.push(closed);
        }
    }
    let largest_failing_e = failures.iter().cloned().fold(0.0, f64::max);
    verdict(
        failures.is_empty(),
        format!(
            "{} of 1000 above 1e-12 relative (all with E ≤ {largest_failing_e:.1e}); worst {:.1e} at r = {:.4}, θ = {:.4}, E = {:.2e}; max absolute {max_abs:.1e}",
            failures.len(),
            worst.0,
            worst.1,
            worst.2,
            worst.3
        ),
    )
}

fn quadrature() -> Check {
    let grid = QuadratureGrid::new(160, 8.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for r in [0.25, 0.5, 1.0] {
        for theta in [0.0, FRAC_PI_6, PI / 3.0, FRAC_PI_2, 2.0] {
            let p = params(r, theta);
            let closed = impurity_closed_form(p).value;
            let quad =
                quadrature_impurity(p, &grid).map_err(|e| format!("r={r} θ={theta}: {e}"))?;
            let err = (quad - closed).abs();
            let tol = if closed < 1e-3 { 1e-6 } else { 1e-4 };
            worst = worst.max(err);
            if err > tol {
                bad.push(format!("(r={r}, θ={theta:.4}) err {err:.1e}"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "15 cases, N = 160, k = 8; max |E_quad − E_closed| = {worst:.1e} {}",
            bad.join(" ")
        ),
    )
}

fn moments() -> Check {
    let grid = QuadratureGrid::new(160, 8.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for theta in [0.0, 0.7, FRAC_PI_2] {
        let m = moment_check(params(0.5, theta), &grid).map_err(|e| e.to_string())?;
        // The ten entries on and above the diagonal.
        for i in 0..4 {
            for j in i..4 {
                let zero = m.expected[(i, j)].abs() < 1e-12;
                let tol = if zero { 1e-8 } else { 1e-4 };
                worst = worst.max(m.errors[(i, j)] / tol);
                ok &= m.errors[(i, j)] <= tol;
            }
        }
    }
    verdict(
        ok,
        format!("r = 0.5, θ ∈ {{0, 0.7, π/2}}; worst error / tolerance = {worst:.1e}"),
    )
}

fn surface_run(out: &Path) -> Result<(), String> {
    let cli = Cli {
        command: Command::Surface,
        flags: RawConfig {
            threads: Some(4),
            out: Some(out.to_path_buf()),
            ..Default::default()
        },
    };
    tmss_cli::run(cli).map(|_| ()).map_err(|e| e.to_string())
}

fn surface_regression() -> Check {
    let cfg =
        RunConfig::resolve(Command::Surface, RawConfig::default()).map_err(|e| e.to_string())?;
    let text = execute(&cfg)
        .map_err(|e| e.to_string())?
        .render(Format::Csv);
    let mut lines = text.lines();
    if lines.next() != Some("r,theta,E") {
        return Err("unexpected header".into());
    }
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|f| f.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    let n_theta = 181;
    let n_r = rows.len() / n_theta;
    let mut monotone = true;
    let mut product_max: f64 = 0.0;
    for j in 0..n_theta {
        let theta = rows[j][1];
        let col: Vec<f64> = (0..n_r).map(|i| rows[i * n_theta + j][2]).collect();
        if theta == FRAC_PI_2 {
            product_max = col.iter().fold(0.0, |m, e| m.max(e.abs()));
        } else if theta.cos() != 0.0 {
            monotone &= col.windows(2).all(|w| w[1] >= w[0]);
        }
    }
    let (max_at, max) = rows.iter().map(|row| ((row[0], row[1]), row[2])).fold(
        ((0.0, 0.0), f64::NEG_INFINITY),
        |a, b| if b.1 > a.1 { b } else { a },
    );
    let oracle = 1.0 - 1.0 / 4.0_f64.cosh();
    let err = (max - oracle).abs();
    verdict(
        monotone && product_max == 0.0 && max_at == (2.0, 0.0) && err <= 1e-12,
        format!(
            "{n_r}×{n_theta} grid; monotone in r: {monotone}; θ = π/2 column max {product_max:e}; max {max:.12} at {max_at:?}, |max − (1 − 1/cosh 4)| = {err:.1e}"
        ),
    )
}

fn sharpening() -> Check {
    let mut ratios = Vec::new();
    for r in [3.0, 4.0, 5.0] {
        let w0 = transition_width(r, 0.5).map_err(|e| e.to_string())?;
        let w1 = transition_width(r + 1.0, 0.5).map_err(|e| e.to_string())?;
        ratios.push(w1 / w0);
    }
    let ratios_ok = ratios.iter().all(|q| (0.129..=0.142).contains(q));
    let logs: Vec<f64> = (0..=400)
        .map(|i| {
            impurity_closed_form(params(400.0, FRAC_PI_2 - 0.1 + 0.2 * i as f64 / 400.0))
                .log10_one_minus()
        })
        .chain(
            [0.0, FRAC_PI_4, PI, 1.5 * PI]
                .map(|t| impurity_closed_form(params(400.0, t)).log10_one_minus()),
        )
        .collect();
    let finite = logs.iter().all(|v| v.is_finite());
    let at_zero = impurity_closed_form(params(400.0, 0.0)).log10_one_minus();
    verdict(
        ratios_ok && finite,
        format!("width ratios (3→4, 4→5, 5→6) = {ratios:.5?}, e^-2 = {:.5}; log10(1 − E) at r = 400 finite: {finite} (θ = 0: {at_zero:.6})", (-2.0_f64).exp()),
    )
}

fn mub_law() -> Check {
    let sched = RegulatorSchedule::default();
    let mut worst_law: f64 = 0.0;
    let oracle = |d: f64| 1.0 / (TAU * d.sin().abs()).sqrt();
    for d in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2] {
        for (base, y1, y2) in [(0.0, 0.0, 0.0), (FRAC_PI_6, 0.0, 0.0), (0.4, 0.8, -0.5)] {
            let m = overlap_modulus(y1, base + d, y2, base, &sched).map_err(|e| e.to_string())?;
            worst_law = worst_law.max((m - oracle(d)).abs());
        }
    }
    let mut rng = StdRng::seed_from_u64(3);
    let (t1, t2) = (2.0 * PI / 3.0, FRAC_PI_6);
    let mut moduli = Vec::new();
    for _ in 0..20 {
        let (y1, y2) = (rng.gen_range(-1.5..=1.5), rng.gen_range(-1.5..=1.5));
        moduli.push(overlap_modulus(y1, t1, y2, t2, &sched).map_err(|e| e.to_string())?);
    }
    let spread = moduli.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - moduli.iter().cloned().fold(f64::INFINITY, f64::min);
    let label_err = moduli
        .iter()
        .map(|m| (m - oracle(t1 - t2)).abs())
        .fold(0.0, f64::max);
    let mut worst_phase: f64 = 0.0;
    let mut worst_mod: f64 = 0.0;
    for _ in 0..10 {
        let (y, k) = (rng.gen_range(-1.5..=1.5), rng.gen_range(-1.5..=1.5));
        let fc = fourier_check(y, k, PI / 5.0, &sched).map_err(|e| e.to_string())?;
        // Independent of the check's own helpers: compare against e^{iky}/√(2π).
        let phase = (fc.value.arg() - k * y + PI).rem_euclid(TAU) - PI;
        worst_phase = worst_phase.max(phase.abs());
        worst_mod = worst_mod.max((fc.value.norm() - 1.0 / TAU.sqrt()).abs());
    }
    verdict(
        worst_law <= 1e-3 && spread <= 2e-3 && label_err <= 1e-3 && worst_phase <= 1e-3 && worst_mod <= 1e-3,
        format!(
            "modulus law max err {worst_law:.1e}; 20 label pairs spread {spread:.1e}, max err {label_err:.1e}; Fourier phase max err {worst_phase:.1e}, modulus {worst_mod:.1e}"
        ),
    )
}

fn structural() -> Check {
    let mut rng = StdRng::seed_from_u64(4);
    let mut transforms: Vec<SymplecticTransform> = vec![
        epr_basis_change().as_transform(),
        epr_basis_change().as_transform().inverse(),
    ];
    for _ in 0..200 {
        let theta = rng.gen_range(-TAU..TAU);
        let r = rng.gen_range(0.0..3.0);
        let mode = rng.gen_range(0..2);
        let rot = mode_rotation(theta, mode, 2).map_err(|e| e.to_string())?;
        let sq = squeezer(r, 1 - mode, 2).map_err(|e| e.to_string())?;
        let vb = vb_rotation(theta);
        let chain = sq
            .compose(&vb)
            .and_then(|s| s.compose(&rot))
            .map_err(|e| e.to_string())?;
        transforms.extend([rot, sq, vb.inverse(), vb, chain]);
    }
    let defect = transforms
        .iter()
        .map(|s| s.symplectic_defect())
        .fold(0.0, f64::max);

    // Global purity in f64 is conditioned like e^{4r}; checked on r ≤ 3.
    let mut purity_dev: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for i in 0..=60 {
        let r = 0.05 * i as f64;
        for j in 0..72 {
            let sigma = theta_tmss_covariance(params(r, TAU * j as f64 / 72.0))
                .map_err(|e| e.to_string())?;
            purity_dev = purity_dev.max((purity(&sigma).map_err(|e| e.to_string())? - 1.0).abs());
        }
    }
    for i in 0..=100 {
        let r = 0.05 * i as f64;
        for j in 0..72 {
            let sigma = theta_tmss_covariance(params(r, TAU * j as f64 / 72.0))
                .map_err(|e| e.to_string())?;
            let reduced = reduce(&sigma, 0).map_err(|e| e.to_string())?;
            let nu = symplectic_eigenvalues(&reduced).map_err(|e| e.to_string())?;
            min_eig = min_eig.min(nu[0]);
        }
    }
    verdict(
        defect <= 1e-10 && purity_dev <= 1e-10 && min_eig >= 0.25 - 1e-9,
        format!(
            "{} transforms, max ‖SΩSᵀ − Ω‖ = {defect:.1e}; global purity max |1 − P| = {purity_dev:.1e} (r ≤ 3); min reduced ν = {min_eig:.15} (r ≤ 5)",
            transforms.len()
        ),
    )
}

fn determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("tmss-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    surface_run(&a)?;
    surface_run(&b)?;
    let (x, y) = (
        std::fs::read(&a).map_err(|e| e.to_string())?,
        std::fs::read(&b).map_err(|e| e.to_string())?,
    );
    let _ = std::fs::remove_dir_all(&dir);
    verdict(
        x == y && !x.is_empty(),
        format!(
            "two surface runs, {} bytes each, identical: {}",
            x.len(),
            x == y
        ),
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "closed-form reproduction",
            budget: Some(Duration::from_secs(1)),
            run: closed_form,
        },
        Criterion {
            name: "dual-path equality",
            budget: Some(Duration::from_secs(1)),
            run: dual_path,
        },
        Criterion {
            name: "quadrature-oracle agreement",
            budget: Some(Duration::from_secs(120)),
            run: quadrature,
        },
        Criterion {
            name: "moment check",
            budget: Some(Duration::from_secs(30)),
            run: moments,
        },
        Criterion {
            name: "surface regression",
            budget: None,
            run: surface_regression,
        },
        Criterion {
            name: "sharpening",
            budget: Some(Duration::from_secs(1)),
            run: sharpening,
        },
        Criterion {
            name: "basis-overlap law",
            budget: Some(Duration::from_secs(60)),
            run: mub_law,
        },
        Criterion {
            name: "structural invariants",
            budget: None,
            run: structural,
        },
        Criterion {
            name: "determinism",
            budget: None,
            run: determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let over = c.budget.is_some_and(|b| elapsed > b);
        let (ok, detail) = match result {
            Ok(d) => (!over, d),
            Err(d) => (false, d),
        };
        let budget = match c.budget {
            Some(b) if over => format!(", over budget {:.0?}", b),
            _ => String::new(),
        };
        println!(
            "acceptance {} {} [{:.2?}{budget}]: {detail}",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            elapsed
        );
        failed += usize::from(!ok);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
