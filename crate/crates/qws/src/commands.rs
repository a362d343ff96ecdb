//! Subcommand orchestration: resolve the config into core calls, write
//! artifacts, print a one-line summary (JSON for bands/detect) to stdout.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::PathBuf;

use num_complex::Complex64;
use serde_json::json;

use qw_core::defects::{
    build_defect_eigenfunction, detect_edge_defects, verify_eigenpair, DefectSign, DetectConfig,
};
use qw_core::lattice::{evolve, Boundary, Window};
use qw_core::spectra::{build_matrix, classify, eigendecompose, SpectralBoundary};
use qw_core::symbol::{dispersion, essential_band, BandStructure};

use crate::config::{ExperimentConfig, FormatChoice};
use crate::errors::{CliError, Result};
use crate::output::{sci, write_csv, write_json, Meta};
use crate::svg;

pub struct RunContext {
    pub cfg: ExperimentConfig,
    pub sha: String,
    pub out_dir: PathBuf,
}

impl RunContext {
    fn meta(&self, subcommand: &'static str) -> Meta {
        Meta::new(subcommand, &self.sha)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn wants(&self, format: FormatChoice) -> bool {
        self.cfg.output.wants(format)
    }
}

fn hull(a: Window, b: Window) -> Window {
    Window::new(a.lo().min(b.lo()), a.hi().max(b.hi())).expect("hull of valid windows")
}

fn band_json(band: &BandStructure) -> serde_json::Value {
    json!({
        "arcs": [
            [band.arcs[0].lo, band.arcs[0].hi],
            [band.arcs[1].lo, band.arcs[1].hi],
        ],
        "thresholds": band.thresholds.iter().map(|t| t.phase).collect::<Vec<_>>(),
        "multiplicities": band.thresholds.iter().map(|t| t.multiplicity).collect::<Vec<_>>(),
        "degenerate": band.degenerate,
    })
}

pub fn bands(ctx: &RunContext) -> Result<()> {
    let band = essential_band(&ctx.cfg.model_params()?)?;
    let value = band_json(&band);
    if ctx.wants(FormatChoice::Json) {
        write_json(&ctx.path("bands.json"), &ctx.meta("bands"), value.clone())?;
    }
    println!("{value}");
    Ok(())
}

pub fn dispersion_grid(ctx: &RunContext) -> Result<()> {
    const N: usize = 100;
    let params = ctx.cfg.model_params()?;
    if ctx.wants(FormatChoice::Csv) {
        let mut rows = Vec::with_capacity(N * N);
        for i in 0..N {
            let xi = TAU * i as f64 / N as f64;
            for j in 0..N {
                let theta = TAU * j as f64 / N as f64;
                let value = dispersion(xi, theta, &params).norm();
                rows.push(format!("{},{},{}", sci(xi), sci(theta), sci(value)));
            }
        }
        let meta = ctx.meta("dispersion").with("grid", format!("{N}x{N}"));
        write_csv(&ctx.path("dispersion.csv"), &meta, "xi,theta,abs_dispersion", rows)?;
    }
    println!("dispersion: {N}x{N} grid over [0, 2pi)^2");
    Ok(())
}

pub fn spectrum(ctx: &RunContext) -> Result<()> {
    let boundary = ctx.cfg.spectral_boundary()?;
    let window = ctx.cfg.lattice_window()?;
    let field = ctx.cfg.coin_field(window)?;
    let operator = build_matrix(&field, window, boundary)?;
    let pairs = eigendecompose(&operator)?;
    let band = essential_band(&ctx.cfg.model_params()?)?;
    let tol = ctx.cfg.tolerances.classify.to_core(boundary);
    let report = classify(pairs, band, tol);

    let boundary_name = match boundary {
        SpectralBoundary::Periodic => "periodic",
        SpectralBoundary::Truncate => "truncate",
    };
    let meta = ctx
        .meta("spectrum")
        .with("boundary", boundary_name)
        .with("window", window)
        .with(
            "tolerances.classify",
            format!(
                "circle={:e} threshold_radius={} band_edge={:e} localization={} radius={}",
                tol.circle, tol.threshold_radius, tol.band_edge, tol.localization, tol.radius
            ),
        );
    if ctx.wants(FormatChoice::Csv) {
        let rows = report
            .eigenpairs
            .iter()
            .zip(report.labels.iter())
            .zip(report.localization.iter())
            .map(|((p, label), loc)| {
                format!(
                    "{},{},{},{},{},{}",
                    sci(p.lambda.re),
                    sci(p.lambda.im),
                    sci(p.phase),
                    sci(p.lambda.norm()),
                    label.as_str(),
                    sci(*loc)
                )
            });
        write_csv(
            &ctx.path("spectrum.csv"),
            &meta,
            "re,im,phase,modulus,label,loc_measure",
            rows,
        )?;
    }
    if ctx.wants(FormatChoice::Svg) {
        let points: Vec<(f64, f64, String)> = report
            .eigenpairs
            .iter()
            .zip(report.labels.iter())
            .map(|(p, label)| (p.lambda.re, p.lambda.im, label.as_str().to_string()))
            .collect();
        let arcs = [
            (report.band.arcs[0].lo, report.band.arcs[0].hi),
            (report.band.arcs[1].lo, report.band.arcs[1].hi),
        ];
        let body = svg::spectrum_scatter(&points, &arcs, &meta.comment_block());
        crate::output::write_atomic(&ctx.path("spectrum.svg"), body.as_bytes())?;
    }
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    for label in &report.labels {
        *counts.entry(label.as_str()).or_insert(0) += 1;
    }
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!(
        "spectrum: {} eigenvalues ({}) [{boundary_name}, window {window}]",
        report.len(),
        summary.join(", ")
    );
    Ok(())
}

pub fn simulate(ctx: &RunContext) -> Result<()> {
    let boundary = ctx.cfg.evolution_boundary();
    let psi0 = ctx.cfg.initial_state()?;
    let lattice = ctx.cfg.lattice_window()?;
    let steps = ctx.cfg.steps;
    let (field, start) = match boundary {
        Boundary::Padded => {
            let reach = psi0.window().expanded(steps as i64);
            (ctx.cfg.coin_field(hull(reach, lattice))?, psi0)
        }
        Boundary::Periodic | Boundary::Truncate => {
            let field = ctx.cfg.coin_field(lattice)?;
            let start = psi0.embedded(lattice)?;
            (field, start)
        }
    };
    let trajectory = evolve(&start, &field, steps, boundary)?;

    let boundary_name = match boundary {
        Boundary::Padded => "padded",
        Boundary::Periodic => "periodic",
        Boundary::Truncate => "truncate",
    };
    let width = steps.to_string().len().max(4);
    if ctx.wants(FormatChoice::Csv) {
        for (t, state) in trajectory.iter().enumerate() {
            let meta = ctx
                .meta("simulate")
                .with("boundary", boundary_name)
                .with("t", t)
                .with("norm", sci(state.norm()));
            let rows = state.iter().map(|(x, s)| {
                format!(
                    "{x},{},{},{},{},{}",
                    sci(s[0].re),
                    sci(s[0].im),
                    sci(s[1].re),
                    sci(s[1].im),
                    sci(s[0].norm_sqr() + s[1].norm_sqr())
                )
            });
            write_csv(
                &ctx.path(&format!("distribution_t{t:0width$}.csv")),
                &meta,
                "x,re0,im0,re1,im1,prob",
                rows,
            )?;
        }
    }
    let last = trajectory.last().expect("trajectory nonempty");
    let dist: Vec<(i64, f64)> = last.position_distribution().into_iter().collect();
    if ctx.wants(FormatChoice::Svg) {
        let meta = ctx
            .meta("simulate")
            .with("boundary", boundary_name)
            .with("t", steps);
        let title = format!("position distribution, t = {steps}");
        let body = svg::histogram(&dist, &title, &meta.comment_block());
        crate::output::write_atomic(&ctx.path("distribution_final.svg"), body.as_bytes())?;
    }
    let near_origin: f64 = dist
        .iter()
        .filter(|(x, _)| x.abs() <= 5)
        .map(|(_, p)| p)
        .sum();
    println!(
        "simulate: {steps} steps [{boundary_name}], final norm {:.12}, mass in |x|<=5: {:.6}",
        last.norm(),
        near_origin
    );
    Ok(())
}

pub fn eigenfunction(ctx: &RunContext, sign: DefectSign) -> Result<()> {
    let Some(spec) = ctx.cfg.defect_spec()? else {
        return Err(CliError::range(
            "defects",
            "eigenfunction requires a defect specification",
        ));
    };
    let n = spec.centers().len();
    let kappa = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let built = build_defect_eigenfunction(&spec, &vec![kappa; n], sign)?;
    let lattice = ctx.cfg.lattice_window()?;
    let field = ctx.cfg.coin_field(hull(built.state.window().expanded(2), lattice))?;
    let lambda = built.eigenvalue();
    let residual = verify_eigenpair(&field, lambda, &built.state)?;

    let meta = ctx
        .meta("eigenfunction")
        .with("sign", format!("{sign:?}").to_lowercase())
        .with("eigenvalue", format!("{},{}", sci(lambda.re), sci(lambda.im)))
        .with("residual", sci(residual))
        .with("centers", format!("{:?}", spec.centers()));
    if ctx.wants(FormatChoice::Csv) {
        let rows = built.state.iter().map(|(x, s)| {
            format!(
                "{x},{},{},{},{},{}",
                sci(s[0].re),
                sci(s[0].im),
                sci(s[1].re),
                sci(s[1].im),
                sci(s[0].norm_sqr() + s[1].norm_sqr())
            )
        });
        write_csv(
            &ctx.path("eigenfunction.csv"),
            &meta,
            "x,re0,im0,re1,im1,prob",
            rows,
        )?;
    }
    println!(
        "eigenfunction: lambda = {:.12} + {:.12}i, residual {:.3e}",
        lambda.re, lambda.im, residual
    );
    Ok(())
}

pub fn detect(ctx: &RunContext) -> Result<()> {
    let params = ctx.cfg.model_params()?;
    let section = &ctx.cfg.tolerances.detect;
    let half = section.half_width.unwrap_or(ctx.cfg.window.l);
    let support = match section.support {
        Some([lo, hi]) => Window::new(lo, hi)?,
        None => ctx.cfg.lattice_window()?,
    };
    let mut config = DetectConfig::new(params, section.method.to_core());
    config.theta_step = section.theta_step;
    config.threshold_exclusion = section.threshold_exclusion;
    config.support = Some(support);
    config.half_width = half;
    config.stability_tol = section.stability_tol;
    config.defect_phase = section
        .defect_phase
        .or_else(|| ctx.cfg.defects.as_ref().map(|d| d.gamma_prime));
    config.classify = ctx
        .cfg
        .tolerances
        .classify
        .to_core(SpectralBoundary::Periodic);

    let field_window = hull(support.expanded(1), Window::centered(2 * half)?);
    let field = ctx.cfg.coin_field(field_window)?;
    let report = detect_edge_defects(&field, &config)?;

    let value = json!({
        "verdict": report.verdict,
        "method": report.method.as_str(),
        "evidence": report.evidence.iter().map(|e| json!({
            "lambda": [e.lambda.re, e.lambda.im],
            "kernel_dim": e.kernel_dim,
            "support": [e.support.0, e.support.1],
        })).collect::<Vec<_>>(),
        "band": band_json(&report.band),
    });
    if ctx.wants(FormatChoice::Json) {
        let meta = ctx
            .meta("detect")
            .with("method", report.method.as_str())
            .with("half_width", half)
            .with("support", support)
            .with("theta_step", section.theta_step)
            .with("threshold_exclusion", section.threshold_exclusion)
            .with("stability_tol", section.stability_tol);
        write_json(&ctx.path("detect.json"), &meta, value.clone())?;
    }
    println!("{value}");
    Ok(())
}
