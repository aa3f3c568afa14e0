mod commands;
mod config;
mod error;
mod report;

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::{Outcome, Verdict};
use config::Overrides;
use error::CliError;

#[derive(Parser)]
#[command(name = "wlab", version, about = "Curvature estimates and Weierstrass-type surface synthesis")]
struct Cli {
    /// Worker threads for data-parallel loops (0 picks the default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    group: Group,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config file.
    config: PathBuf,
    /// Output directory for the report and exported files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the config's `resolution`.
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Subcommand)]
enum Group {
    /// Inspect an m-triple.
    #[command(subcommand)]
    Triple(TripleCmd),
    /// Check the curvature estimate on a mesh.
    #[command(subcommand)]
    Estimate(EstimateCmd),
    /// Synthesize surfaces from Weierstrass-type data.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Normal-family and completeness probes.
    #[command(subcommand)]
    Probe(ProbeCmd),
    /// Built-in examples.
    #[command(subcommand)]
    Example(ExampleCmd),
}

#[derive(Subcommand)]
enum TripleCmd {
    Check(Common),
    Curvature(Common),
}

#[derive(Subcommand)]
enum EstimateCmd {
    Verify {
        #[command(flatten)]
        common: Common,
        /// Replace the property with `bounded = L`.
        #[arg(long)]
        bounded: Option<f64>,
    },
}

#[derive(Args, Clone)]
struct SurfaceArgs {
    #[command(flatten)]
    common: Common,
    /// Replace the surface class.
    #[arg(long)]
    class: Option<String>,
}

#[derive(Subcommand)]
enum SurfaceCmd {
    Synth(SurfaceArgs),
    Periods(SurfaceArgs),
    Singular(SurfaceArgs),
}

#[derive(Subcommand)]
enum ProbeCmd {
    Marty(Common),
    Zalcman(Common),
    Fujimoto(Common),
    Completeness(Common),
}

#[derive(Subcommand)]
enum ExampleCmd {
    Optimal(Common),
}

#[derive(Clone, Copy)]
enum Action {
    TripleCheck,
    TripleCurvature,
    EstimateVerify,
    SurfaceSynth,
    SurfacePeriods,
    SurfaceSingular,
    ProbeMarty,
    ProbeZalcman,
    ProbeFujimoto,
    ProbeCompleteness,
    ExampleOptimal,
}

impl Action {
    fn name(self) -> &'static str {
        match self {
            Action::TripleCheck => "triple check",
            Action::TripleCurvature => "triple curvature",
            Action::EstimateVerify => "estimate verify",
            Action::SurfaceSynth => "surface synth",
            Action::SurfacePeriods => "surface periods",
            Action::SurfaceSingular => "surface singular",
            Action::ProbeMarty => "probe marty",
            Action::ProbeZalcman => "probe zalcman",
            Action::ProbeFujimoto => "probe fujimoto",
            Action::ProbeCompleteness => "probe completeness",
            Action::ExampleOptimal => "example optimal",
        }
    }
}

fn resolve(group: Group) -> (Action, Common, Overrides) {
    let plain = |c: &Common| Overrides { seed: c.seed, resolution: c.resolution, ..Default::default() };
    let simple = |act, c: Common| {
        let o = plain(&c);
        (act, c, o)
    };
    let surface = |a: SurfaceArgs, act| {
        let o = Overrides { class: a.class.clone(), ..plain(&a.common) };
        (act, a.common, o)
    };
    match group {
        Group::Triple(TripleCmd::Check(c)) => simple(Action::TripleCheck, c),
        Group::Triple(TripleCmd::Curvature(c)) => simple(Action::TripleCurvature, c),
        Group::Estimate(EstimateCmd::Verify { common, bounded }) => {
            let o = Overrides { bounded, ..plain(&common) };
            (Action::EstimateVerify, common, o)
        }
        Group::Surface(SurfaceCmd::Synth(a)) => surface(a, Action::SurfaceSynth),
        Group::Surface(SurfaceCmd::Periods(a)) => surface(a, Action::SurfacePeriods),
        Group::Surface(SurfaceCmd::Singular(a)) => surface(a, Action::SurfaceSingular),
        Group::Probe(ProbeCmd::Marty(c)) => simple(Action::ProbeMarty, c),
        Group::Probe(ProbeCmd::Zalcman(c)) => simple(Action::ProbeZalcman, c),
        Group::Probe(ProbeCmd::Fujimoto(c)) => simple(Action::ProbeFujimoto, c),
        Group::Probe(ProbeCmd::Completeness(c)) => simple(Action::ProbeCompleteness, c),
        Group::Example(ExampleCmd::Optimal(c)) => simple(Action::ExampleOptimal, c),
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    config_sha256: &'a str,
    seed: u64,
}

#[derive(Serialize)]
struct Report<'a> {
    provenance: Provenance<'a>,
    command: &'static str,
    config: &'a toml::Table,
    verdict: Verdict,
    result: &'a serde_value::Value,
}

fn execute(action: Action, common: &Common, overrides: &Overrides) -> Result<Verdict, CliError> {
    let mut table = config::read_table(&common.config)?;
    overrides.apply(&mut table)?;
    let config_sha256 = report::sha256_hex(report::canonical(&table)?.as_bytes());
    let out = common.out.clone().unwrap_or_else(|| commands::default_out_dir(action.name(), &config_sha256));
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;

    let Outcome { result, verdict, summary, seed } = match action {
        Action::TripleCheck => commands::triple_check(&table),
        Action::TripleCurvature => commands::triple_curvature(&table),
        Action::EstimateVerify => commands::estimate_verify(&table, &out),
        Action::SurfaceSynth => commands::surface_synth(&table, &out),
        Action::SurfacePeriods => commands::surface_periods(&table),
        Action::SurfaceSingular => commands::surface_singular(&table, &out),
        Action::ProbeMarty => commands::probe_marty(&table),
        Action::ProbeZalcman => commands::probe_zalcman(&table),
        Action::ProbeFujimoto => commands::probe_fujimoto(&table, &out),
        Action::ProbeCompleteness => commands::probe_completeness(&table),
        Action::ExampleOptimal => commands::example_optimal(&table, &out),
    }?;

    let report = Report {
        provenance: Provenance { tool: "wlab", version: env!("CARGO_PKG_VERSION"), config_sha256: &config_sha256, seed },
        command: action.name(),
        config: &table,
        verdict,
        result: &result,
    };
    let path = out.join("report.json");
    report::emit_report(&report, &path)?;
    for line in summary {
        eprintln!("{line}");
    }
    eprintln!("verdict: {}", serde_json::to_string(&verdict).unwrap().trim_matches('"'));
    println!("{}", path.display());
    Ok(verdict)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::usage(e.to_string().trim_end())),
    };
    weierstrass_lab::par::configure_threads(cli.jobs);
    let (action, common, overrides) = resolve(cli.group);
    panic::set_hook(Box::new(|_| {}));
    let run = panic::catch_unwind(AssertUnwindSafe(|| execute(action, &common, &overrides)));
    match run {
        Ok(Ok(Verdict::Fail)) => ExitCode::from(2),
        Ok(Ok(_)) => ExitCode::SUCCESS,
        Ok(Err(e)) => fail(&e),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            fail(&CliError::internal(msg))
        }
    }
}
