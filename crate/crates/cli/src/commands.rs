use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use logobs::blowup::{blowup_profile, decay_fit, profile_of, BlowupProfile};
use logobs::fields::{load_field, save_field, DiffField, Grid, Rescaled, ScalarField};
use logobs::freeboundary::{check_free_boundary_point, extract, growth_stats_with, normal_holder_exponent};
use logobs::oracle1d::{shoot, OracleSolution1D};
use logobs::plot::{line_chart, Axes, Series};
use logobs::solver::{gradient_log_lipschitz_check, optimal_omega, solve, ProblemSpec};
use logobs::weiss::{derivative_check, energy_density_classify, m0_energy, omega_half, wbar_scan};
use logobs::{problems, Error, ForcingMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{ConfigError, DensitySource, Problem, RunConfig};

pub struct Ui {
    pub quiet: bool,
}

impl Ui {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn oracle(cfg: &RunConfig, mode: ForcingMode) -> Result<OracleSolution1D> {
    Ok(shoot(cfg.x_seed, cfg.x_max, mode)?)
}

fn build_problem(cfg: &RunConfig) -> Result<ProblemSpec> {
    let mut spec = match cfg.problem {
        Problem::Planar => problems::planar(&oracle(cfg, ForcingMode::Logarithmic)?, cfg.n.unwrap_or(513))?,
        Problem::SingularLine => {
            problems::singular_line(&oracle(cfg, ForcingMode::Logarithmic)?, cfg.n.unwrap_or(513))?
        }
        Problem::ClassicalLine => problems::classical_line(cfg.n.unwrap_or(1025))?,
        Problem::Zero => {
            let grid = Grid::cube(2, -1.0, 1.0, cfg.n.unwrap_or(65))?;
            ProblemSpec::new(ScalarField::zeros(grid), ForcingMode::Logarithmic)
        }
    };
    if let Some(mode) = cfg.mode {
        spec.mode = mode;
    }
    spec.relax_omega = cfg.omega.unwrap_or_else(|| optimal_omega(&spec.grid));
    spec.tol = cfg.tol;
    spec.max_sweeps = cfg.max_sweeps;
    if let Some(eps) = &cfg.epsilons {
        spec.epsilons = eps.clone();
    }
    if cfg.noise > 0.0 {
        let base = spec.initial.clone().unwrap_or_else(|| spec.boundary.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let grid = spec.grid.clone();
        let values = base
            .values()
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let (i, j) = grid.coords(k);
                let bump = cfg.noise * rng.gen::<f64>();
                if grid.is_boundary(i, j) {
                    v
                } else {
                    v + bump
                }
            })
            .collect();
        spec.initial = Some(ScalarField::new(grid, values)?);
    }
    spec.validate()?;
    Ok(spec)
}

pub fn cmd_solve(cfg: &RunConfig, ui: &Ui) -> Result<()> {
    let spec = build_problem(cfg)?;
    if spec.boundary_above_one() {
        eprintln!("warning: boundary data reaches 1, where the forcing changes sign");
    }
    let (u, report) = solve(&spec)?;
    let out = &cfg.output_dir;
    save_field(&u, out.join("field.logobs"))?;
    write_text(&out.join("report.json"), &report.to_json())?;
    write_text(&out.join("report.txt"), &report.to_text())?;
    ui.say(format!(
        "solved {} nodes in {} sweeps: energy {:.10e}, kkt {:.3e}",
        spec.grid.len(),
        report.sweeps_used,
        report.final_energy,
        report.kkt_violation
    ));
    Ok(())
}

fn load_input(cfg: &RunConfig) -> Result<ScalarField> {
    let path = cfg.field_path();
    if !path.exists() {
        return Err(ConfigError(format!("missing input field {}", path.display())).into());
    }
    Ok(load_field(&path)?)
}

fn svg(path: &Path, title: &str, y_label: &str, points: &[(f64, f64)], log_y: bool) -> Result<()> {
    let chart = line_chart(title, "r", y_label, Axes { log_x: true, log_y }, &[Series { label: y_label, points }]);
    write_text(path, &chart)
}

pub fn cmd_analyze(cfg: &RunConfig, ui: &Ui) -> Result<()> {
    let u = load_input(cfg)?;
    let out = &cfg.output_dir;
    let fb = extract(&u);
    fb.write_csv(create(&out.join("freeboundary.csv"))?)?;
    if fb.is_empty() {
        ui.say("no free boundary");
        return Ok(());
    }
    check_free_boundary_point(&fb, cfg.center)?;

    let growth = growth_stats_with(&u, &fb, cfg.center, &cfg.growth_radii, &cfg.quadrature())?;
    growth.write_csv(create(&out.join("growth.csv"))?)?;
    let pts: Vec<(f64, f64)> = growth.radii.iter().copied().zip(growth.g.iter().copied()).collect();
    svg(&out.join("growth.svg"), "growth ratio", "g", &pts, true)?;

    let field = DiffField::new(u.clone(), cfg.weiss.quadrature.interp)?;
    let scan = wbar_scan(&field, cfg.center, &cfg.radii, &cfg.weiss)?;
    scan.write_csv(create(&out.join("weiss_scan.csv"))?)?;
    write_text(&out.join("weiss_scan.json"), &scan.to_json())?;
    let pts: Vec<(f64, f64)> = scan.records.iter().map(|r| (r.r, r.wbar)).collect();
    svg(&out.join("wbar.svg"), "corrected energy", "Wbar", &pts, false)?;

    let mut checks = String::from("r,fd,K,Q,rel_error\n");
    for &r in &cfg.check_radii {
        let d = derivative_check(&field, cfg.center, r, &cfg.weiss)?;
        checks.push_str(&format!("{},{},{},{},{}\n", d.r, d.fd, d.k, d.q, d.relative_error()));
    }
    write_text(&out.join("derivative_check.csv"), &checks)?;

    let holder = normal_holder_exponent(&fb).ok();
    let log_lipschitz = gradient_log_lipschitz_check(&u, &fb)?;
    let summary = json!({
        "free_boundary_points": fb.len(),
        "center": cfg.center,
        "holder": holder,
        "log_lipschitz_worst_ratio": log_lipschitz.worst_ratio,
        "wbar_limit_estimate": scan.wbar_limit_estimate,
        "blowup_limit_estimate": scan.blowup_limit_estimate,
        "estimates_agree": scan.estimates_agree,
        "worst_wbar_decrease": scan.worst_wbar_decrease(),
        "min_k": scan.records.iter().map(|r| r.k).fold(f64::INFINITY, f64::min),
    });
    write_text(&out.join("analysis.json"), &serde_json::to_string_pretty(&summary)?)?;
    ui.say(format!(
        "{} free-boundary points; scan over {} radii, worst Wbar decrease {:.3e}",
        fb.len(),
        scan.records.len(),
        scan.worst_wbar_decrease()
    ));
    Ok(())
}

fn profile_name(index: usize, p: &BlowupProfile) -> String {
    format!("profile_{index:02}_r{}.csv", p.radius)
}

pub fn cmd_blowup(cfg: &RunConfig, _ui: &Ui) -> Result<()> {
    let u = load_input(cfg)?;
    let out = &cfg.output_dir;
    let fb = extract(&u);
    check_free_boundary_point(&fb, cfg.center)?;
    let n = u.grid().dim();
    let reference = omega_half(n);
    let field = DiffField::new(u, cfg.weiss.quadrature.interp)?;

    let estimate = match cfg.density {
        DensitySource::Profile => {
            let view = Rescaled::new(&field, cfg.center, 1.0, 1.0);
            let p = profile_of(&view, &cfg.quadrature())?;
            p.write_csv(create(&out.join("profile.csv"))?)?;
            m0_energy(&view, &cfg.quadrature())?
        }
        DensitySource::Scan => {
            let profiles = cfg
                .blowup_radii
                .iter()
                .map(|&r| blowup_profile(&field, cfg.center, r, &cfg.weiss))
                .collect::<logobs::Result<Vec<_>>>()?;
            for (i, p) in profiles.iter().enumerate() {
                p.write_csv(create(&out.join(profile_name(i, p)))?)?;
            }
            let mut fits = String::from("r,nu_x,nu_y,residual,hdefect\n");
            for p in &profiles {
                fits.push_str(&format!(
                    "{},{},{},{},{}\n",
                    p.radius, p.best_nu[0], p.best_nu[1], p.fit_residual, p.hdefect
                ));
            }
            write_text(&out.join("halfspace_fit.csv"), &fits)?;
            let scan = wbar_scan(&field, cfg.center, &cfg.blowup_radii, &cfg.weiss)?;
            scan.write_csv(create(&out.join("blowup_scan.csv"))?)?;
            let fit = decay_fit(&scan, &profiles)?;
            write_text(&out.join("decay_fit.json"), &fit.to_json())?;
            if !scan.estimates_agree {
                eprintln!(
                    "warning: energy limit {:?} and blow-up limit {:?} disagree",
                    scan.wbar_limit_estimate, scan.blowup_limit_estimate
                );
            }
            scan.wbar_limit_estimate.ok_or(Error::InsufficientRadii)?
        }
    };
    let verdict = energy_density_classify(estimate, n, cfg.classify_tol * reference);
    let line = format!("{} density {estimate:.6} reference {reference:.6}", verdict.label());
    write_text(&out.join("verdict.txt"), &format!("{line}\n"))?;
    println!("{line}");
    Ok(())
}

pub fn cmd_oracle(cfg: &RunConfig, ui: &Ui) -> Result<()> {
    let o = oracle(cfg, cfg.mode.unwrap_or_default())?;
    o.write_csv(create(&cfg.output_dir.join("oracle.csv"))?)?;
    let summary = json!({
        "mode": o.mode,
        "x_seed": o.x_seed,
        "x_max": o.x_max,
        "samples": o.samples.len(),
        "residual_max": o.residual_max,
    });
    write_text(&cfg.output_dir.join("oracle_summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    ui.say(format!("{} samples, residual_max {:.3e}", o.samples.len(), o.residual_max));
    Ok(())
}

const REPORT_INPUTS: [&str; 5] =
    ["report.json", "oracle_summary.json", "analysis.json", "decay_fit.json", "verdict.txt"];

pub fn cmd_report(cfg: &RunConfig, _ui: &Ui) -> Result<()> {
    let mut text = String::new();
    for name in REPORT_INPUTS {
        let path = cfg.output_dir.join(name);
        if let Ok(body) = fs::read_to_string(&path) {
            text.push_str(&format!("== {name}\n{}\n", body.trim_end()));
        }
    }
    if text.is_empty() {
        return Err(ConfigError(format!("nothing to report in {}", cfg.output_dir.display())).into());
    }
    write_text(&cfg.output_dir.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}
