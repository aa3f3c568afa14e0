use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use serde_value::Value;

use weierstrass_lab::estimates::{
    family_from_template, fujimoto_ratio, marty_sup, omission_census, optimal_example, verify_estimate,
    zalcman_rescale, EstimateVerdict,
};
use weierstrass_lab::expr::spherical_gradient;
use weierstrass_lab::geodesy::{
    build_mesh, completeness_probe, export_csv, mesh_for_triple, DivergenceVerdict, MeshedDomain, ProbeTarget,
};
use weierstrass_lab::mtriple::{check_regularity, make_triple};
use weierstrass_lab::surfaces::{
    export_mesh, gauss_normal_check, immersion_check, period_residuals, singular_locus, synthesize, SurfaceClass,
    WeierstrassData,
};
use weierstrass_lab::{Complex64, DomainSpec, ExtComplex, MTriple, Region};

use crate::config::{
    typed, CompletenessInput, EstimateInput, FujimotoInput, MartyInput, OptimalInput, SurfaceInput, TripleInput,
    ZalcmanInput,
};
use crate::error::{AtPointer, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The command reports measurements without a pass/fail claim.
    Informational,
}

pub struct Outcome {
    pub result: Value,
    pub verdict: Verdict,
    pub summary: Vec<String>,
    pub seed: u64,
}

fn value<T: Serialize>(t: &T) -> Result<Value, CliError> {
    serde_value::to_value(t).map_err(|e| CliError::internal(e.to_string()))
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn mesh_csv(mesh: &MeshedDomain, out: &Path) -> Result<(), CliError> {
    export_csv(mesh, out).map_err(|e| CliError::from(e).at(""))
}

/// The configured points, or the region center, plus `samples` seeded
/// random points of the domain.
fn sample_points(input: &TripleInput) -> Vec<Complex64> {
    let mut pts = input.points.clone();
    if pts.is_empty() {
        pts.push(input.domain.region.center());
    }
    let (lo, hi) = input.domain.region.bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
    let mut added = 0;
    let mut tries = 0;
    while added < input.samples && tries < 1000 * input.samples.max(1) {
        tries += 1;
        let z = Complex64::new(rng.random_range(lo.re..hi.re), rng.random_range(lo.im..hi.im));
        if input.domain.region.inset_contains(z, 1e-2) && input.domain.nearest_puncture(z).is_none_or(|(_, d)| d > 1e-2) {
            pts.push(z);
            added += 1;
        }
    }
    pts
}

fn triple_of(domain: &DomainSpec, f: &weierstrass_lab::MeroExpr, g: &weierstrass_lab::MeroExpr, m: u32) -> Result<MTriple, CliError> {
    domain.validate().at("/domain")?;
    MTriple::unchecked(domain.clone(), f.clone(), g.clone(), m).at("/m")
}

#[derive(Serialize)]
struct PointValue {
    z: Complex64,
    density: Option<f64>,
    curvature: Option<f64>,
    error: Option<String>,
}

pub fn triple_check(table: &toml::Table) -> Result<Outcome, CliError> {
    let input: TripleInput = typed(table)?;
    let t = triple_of(&input.domain, &input.f, &input.g, input.m)?;
    let regularity = if input.f.is_rational() && input.g.is_rational() {
        Some(check_regularity(&input.domain, &input.f, &input.g, input.m).at("")?)
    } else {
        None
    };
    let points: Vec<PointValue> = sample_points(&input)
        .into_iter()
        .map(|z| match (t.metric_density(z), t.curvature(z)) {
            (Ok(l), Ok(k)) => PointValue { z, density: Some(l), curvature: Some(k), error: None },
            (l, k) => PointValue {
                z,
                density: l.as_ref().ok().copied(),
                curvature: k.as_ref().ok().copied(),
                error: k.err().or(l.err()).map(|e| e.kind().to_string()),
            },
        })
        .collect();
    let regular = regularity.as_ref().is_none_or(|r| r.overall);
    let mut summary = vec![match &regularity {
        Some(r) => format!("regularity: {} ({} candidate points)", if r.overall { "ok" } else { "violated" }, r.points.len()),
        None => "regularity: not checked (non-rational data)".into(),
    }];
    for p in points.iter().take(4) {
        if let Some(k) = p.curvature {
            summary.push(format!("K({}) = {k}", p.z));
        }
    }
    Ok(Outcome {
        result: value(&json!({ "regularity": regularity, "checked": regularity.is_some(), "points": points }))?,
        verdict: pass_if(regular),
        summary,
        seed: input.seed,
    })
}

#[derive(Serialize)]
struct CurvatureSample {
    z: Complex64,
    curvature: f64,
    curvature_fd: f64,
    curvature_fd_richardson: f64,
    relative_error: f64,
    relative_error_richardson: f64,
}

pub fn triple_curvature(table: &toml::Table) -> Result<Outcome, CliError> {
    let input: TripleInput = typed(table)?;
    let t = triple_of(&input.domain, &input.f, &input.g, input.m)?;
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for z in sample_points(&input) {
        let row = (|| -> weierstrass_lab::Result<CurvatureSample> {
            let k = t.curvature(z)?;
            let fd = t.curvature_fd(z, input.fd_step)?;
            let rich = t.curvature_fd_richardson(z, input.fd_step)?;
            let rel = |x: f64| if k == 0.0 { (x - k).abs() } else { ((x - k) / k).abs() };
            Ok(CurvatureSample {
                z,
                curvature: k,
                curvature_fd: fd,
                curvature_fd_richardson: rich,
                relative_error: rel(fd),
                relative_error_richardson: rel(rich),
            })
        })();
        match row {
            Ok(s) => samples.push(s),
            Err(e) => skipped.push(json!({ "z": [z.re, z.im], "reason": e.kind() })),
        }
    }
    let max_rel = samples.iter().map(|s| s.relative_error).fold(0.0, f64::max);
    let max_rich = samples.iter().map(|s| s.relative_error_richardson).fold(0.0, f64::max);
    Ok(Outcome {
        result: value(&json!({
            "fd_step": input.fd_step,
            "samples": samples,
            "skipped": skipped,
            "max_relative_error": max_rel,
            "max_relative_error_richardson": max_rich,
        }))?,
        verdict: Verdict::Informational,
        summary: vec![format!(
            "{} points: max relative FD error {max_rel:.3e} (Richardson {max_rich:.3e}), {} skipped",
            samples.len(),
            skipped.len()
        )],
        seed: input.seed,
    })
}

pub fn estimate_verify(table: &toml::Table, out: &Path) -> Result<Outcome, CliError> {
    let input: EstimateInput = typed(table)?;
    input.property.validate().at("/property")?;
    let t = make_triple(input.domain.clone(), input.f.clone(), input.g.clone(), input.m).at("")?;
    let mesh = mesh_for_triple(&t, input.resolution).at("/resolution")?;
    let report = verify_estimate(&t, &input.property, &mesh).at("")?;
    mesh_csv(&mesh, out)?;
    let verdict = match report.verdict {
        EstimateVerdict::Pass => Verdict::Pass,
        EstimateVerdict::Fail => Verdict::Fail,
        EstimateVerdict::EmpiricalOnly => Verdict::Informational,
    };
    let summary = vec![format!(
        "sup |K| d^2 = {:.6} at {} ({}), C^2 = {}",
        report.sup,
        report.argmax_at,
        serde_json::to_string(&report.verdict).unwrap().trim_matches('"'),
        report.c_squared.map_or("none".into(), |c| c.to_string())
    )];
    Ok(Outcome { result: value(&report)?, verdict, summary, seed: input.seed })
}

fn surface_input(table: &toml::Table) -> Result<(SurfaceInput, WeierstrassData), CliError> {
    let input: SurfaceInput = typed(table)?;
    input.surface.validate().at("/surface")?;
    let d = input.surface.clone();
    Ok((input, d))
}

pub fn surface_synth(table: &toml::Table, out: &Path) -> Result<Outcome, CliError> {
    let (input, d) = surface_input(table)?;
    let mesh = build_mesh(&d.domain, |_| 1.0, input.resolution).at("/resolution")?;
    let s = synthesize(&d, &mesh, input.step).at("/step")?;
    let mut files = Vec::new();
    for f in &input.formats {
        let name = format!("mesh.{}", f.extension());
        export_mesh(&s, *f, &out.join(&name)).map_err(|e| CliError::from(e).at("/formats"))?;
        files.push(name);
    }
    mesh_csv(&mesh, out)?;
    files.extend(["nodes.csv".to_string(), "edges.csv".to_string()]);
    let immersion = immersion_check(&s, &d).at("")?;
    let normal = match d.class() {
        SurfaceClass::Minimal => Some(gauss_normal_check(&s, &d.gauss_map()).at("")?),
        _ => None,
    };
    let periods = input
        .cycles
        .iter()
        .enumerate()
        .map(|(k, c)| period_residuals(&d, c).at(&format!("/cycles/{k}")))
        .collect::<Result<Vec<_>, _>>()?;
    let locus = match d.class() {
        SurfaceClass::Minimal => Vec::new(),
        _ => singular_locus(&d, &mesh).at("")?,
    };
    let ok = immersion.max_defect() <= input.tolerance && normal.as_ref().is_none_or(|n| n.max_angle <= input.tolerance);
    let mut summary = vec![
        format!("{} vertices, {} faces, {} singular", s.len(), s.faces.len(), s.singular_count()),
        format!("immersion defect {:.3e} (tolerance {})", immersion.max_defect(), input.tolerance),
        format!("seam mismatch {:.3e}", s.seam.max_mismatch),
    ];
    if let Some(n) = &normal {
        summary.push(format!("Gauss normal angle {:.3e} rad", n.max_angle));
    }
    Ok(Outcome {
        result: value(&json!({
            "class": d.class(),
            "vertices": s.len(),
            "faces": s.faces.len(),
            "singular_vertices": s.singular_count(),
            "seam": s.seam,
            "det_drift": s.det_drift,
            "invariants": { "immersion": immersion, "gauss_normal": normal, "tolerance": input.tolerance },
            "periods": periods,
            "singular_locus": locus,
            "files": files,
        }))?,
        verdict: pass_if(ok),
        summary,
        seed: input.seed,
    })
}

pub fn surface_periods(table: &toml::Table) -> Result<Outcome, CliError> {
    let (input, d) = surface_input(table)?;
    if input.cycles.is_empty() {
        return Err(CliError::new("config_schema", "no cycles given").at("/cycles"));
    }
    let periods = input
        .cycles
        .iter()
        .enumerate()
        .map(|(k, c)| period_residuals(&d, c).at(&format!("/cycles/{k}")))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = periods.iter().enumerate().map(|(k, p)| format!("cycle {k}: residual norm {:.6e}", p.norm)).collect();
    Ok(Outcome { result: value(&json!({ "periods": periods }))?, verdict: Verdict::Informational, summary, seed: input.seed })
}

pub fn surface_singular(table: &toml::Table, out: &Path) -> Result<Outcome, CliError> {
    let (input, d) = surface_input(table)?;
    let mesh = build_mesh(&d.domain, |_| 1.0, input.resolution).at("/resolution")?;
    let locus = singular_locus(&d, &mesh).at("/surface/class")?;
    mesh_csv(&mesh, out)?;
    let points: usize = locus.iter().map(Vec::len).sum();
    Ok(Outcome {
        result: value(&json!({ "singular_locus": locus }))?,
        verdict: Verdict::Informational,
        summary: vec![format!("{} polylines, {points} points", locus.len())],
        seed: input.seed,
    })
}

pub fn probe_marty(table: &toml::Table) -> Result<Outcome, CliError> {
    let input: MartyInput = typed(table)?;
    family_from_template(&input.family)(input.indices.first().copied().unwrap_or(1)).at("/family")?;
    let r = marty_sup(&input.family, family_from_template(&input.family), &input.indices, input.center, input.radius, input.grid)
        .at("")?;
    let summary = vec![format!(
        "{}: slope {:.4}, {}",
        input.family,
        r.slope,
        serde_json::to_string(&r.verdict).unwrap().trim_matches('"')
    )];
    Ok(Outcome { result: value(&r)?, verdict: Verdict::Informational, summary, seed: input.seed })
}

pub fn probe_zalcman(table: &toml::Table) -> Result<Outcome, CliError> {
    let input: ZalcmanInput = typed(table)?;
    let (f, diag) = zalcman_rescale(&input.h, input.grid).at("/h")?;
    let at_zero = spherical_gradient(&f, Complex64::new(0.0, 0.0)).at("/h")?;
    let ok = (at_zero - 1.0).abs() <= 1e-9 && diag.envelope_ok;
    Ok(Outcome {
        result: value(&json!({ "f": f, "gradient_at_zero": at_zero, "diagnostics": diag }))?,
        verdict: pass_if(ok),
        summary: vec![format!("f = {f}; |grad f|_e(0) = {at_zero}; envelope ok: {}", diag.envelope_ok)],
        seed: input.seed,
    })
}

pub fn probe_fujimoto(table: &toml::Table, out: &Path) -> Result<Outcome, CliError> {
    let input: FujimotoInput = typed(table)?;
    let domain = DomainSpec::new(Region::disk(Complex64::new(0.0, 0.0), input.radius), vec![]).at("/radius")?;
    let mesh = build_mesh(&domain, |_| 1.0, input.resolution).at("/resolution")?;
    let r = fujimoto_ratio(&input.f, &input.values, input.eta, input.radius, &mesh).at("")?;
    mesh_csv(&mesh, out)?;
    let summary = vec![format!("sup = {:.6} at {}; change under coarsening {:.2e}", r.sup, r.argmax, r.refinement_change)];
    Ok(Outcome { result: value(&r)?, verdict: Verdict::Informational, summary, seed: input.seed })
}

pub fn probe_completeness(table: &toml::Table) -> Result<Outcome, CliError> {
    let input: CompletenessInput = typed(table)?;
    let t = make_triple(input.domain.clone(), input.f.clone(), input.g.clone(), input.m).at("")?;
    let r = completeness_probe(&t, input.target, &input.levels, input.start).at("/levels")?;
    let summary = vec![format!(
        "log slope {:.6}, {}",
        r.log_slope,
        serde_json::to_string(&r.verdict).unwrap().trim_matches('"')
    )];
    Ok(Outcome { result: value(&r)?, verdict: Verdict::Informational, summary, seed: input.seed })
}

pub fn example_optimal(table: &toml::Table, out: &Path) -> Result<Outcome, CliError> {
    let input: OptimalInput = typed(table)?;
    let t = optimal_example(input.m, &input.alphas).at("/alphas")?;
    let mesh = build_mesh(t.domain(), |_| 1.0, input.resolution).at("/resolution")?;
    let mut omitted: Vec<ExtComplex> = input.alphas.iter().map(|&a| ExtComplex::Finite(a)).collect();
    omitted.push(ExtComplex::Infinity);
    let census = omission_census(t.g(), &omitted, &mesh, input.delta).at("")?;
    // A ray to ∞ that keeps clear of every puncture.
    let angle = (0..64)
        .map(|k| k as f64 * std::f64::consts::TAU / 64.0 + 0.01)
        .max_by(|a, b| {
            let clearance = |th: f64| input.alphas.iter().map(|p| (p.arg() - th).sin().abs() + (p.norm() == 0.0) as u8 as f64).fold(f64::INFINITY, f64::min);
            clearance(*a).total_cmp(&clearance(*b))
        })
        .unwrap_or(0.01);
    let mut targets: Vec<ProbeTarget> = input.alphas.iter().map(|&at| ProbeTarget::Point { at }).collect();
    targets.push(ProbeTarget::Infinity { angle });
    let mut probes = Vec::new();
    let mut diverging = 0;
    for target in targets {
        match completeness_probe(&t, target, &input.levels, None) {
            Ok(r) => {
                diverging += (r.verdict == DivergenceVerdict::DivergenceEvidence) as usize;
                probes.push(value(&r)?);
            }
            Err(e) => probes.push(value(&json!({ "target": target, "error": CliError::from(e) }))?),
        }
    }
    mesh_csv(&mesh, out)?;
    let ok = census.exact && diverging == probes.len();
    Ok(Outcome {
        result: value(&json!({
            "f": t.f(),
            "g": t.g(),
            "m": t.m(),
            "domain": t.domain(),
            "regularity": t.regularity(),
            "census": census,
            "completeness": probes,
        }))?,
        verdict: pass_if(ok),
        summary: vec![
            format!("f = {}; omits {} of {} values (controls attained: {})", t.f(), census.omitted_count, omitted.len(), census.exact),
            format!("{diverging} of {} completeness probes show divergence", probes.len()),
        ],
        seed: input.seed,
    })
}

pub fn default_out_dir(command: &str, config_hash: &str) -> PathBuf {
    PathBuf::from("wlab-runs").join(format!("{}-{}", command.replace(' ', "-"), &config_hash[..12]))
}
