//! `opacity`: verify and enforce current-state opacity from the command line.
//!
//! Exit codes: 0 opaque or solved, 1 not opaque, 2 usage, parse or resource
//! error, 3 no opacity-enforcing supervisor exists.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use opacity_core::closed_loop::{verify_closed_loop_opacity, verify_structure_opacity};
use opacity_core::dot::{arena_dot, estimator_slice_dot, model_dot, structure_dot};
use opacity_core::intruder::{estimate_from_flow, format_trace, parse_trace};
use opacity_core::policy::{SupervisorPolicy, TABULAR_FORMAT};
use opacity_core::random::{random_model, rng, RandomModelConfig};
use opacity_core::report::SynthesisReport;
use opacity_core::structure::STRUCTURE_FORMAT;
use opacity_core::synthesis::{expand_arena, prune_incomplete};
use opacity_core::{
    synthesize, ClosedLoopVerdict, ControlStructure, ExtractionPolicy, IssuanceMode,
    OpenLoopVerdict, PlantModel, SynthesisConfig, SynthesisOutcome, TabularPolicy,
};

const OPAQUE: u8 = 0;
const NOT_OPAQUE: u8 = 1;
const FAILURE: u8 = 2;
const NO_SOLUTION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "opacity",
    version,
    about = "Opacity verification and opacity-enforcing supervisor synthesis"
)]
struct Cli {
    /// Decision-issuance mechanism: observation or decision [default: observation]
    #[arg(long, global = true)]
    mode: Option<IssuanceMode>,
    /// Abort arena expansion beyond this many states.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    size_guard: usize,
    /// Seed for the generated instance used when MODEL is `random`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check current-state opacity, open loop or under a supervisor.
    Verify(VerifyArgs),
    /// Synthesize an opacity-enforcing control structure.
    Synthesize(SynthesizeArgs),
    /// Print the intruder's estimate for an information flow.
    Estimate(EstimateArgs),
    /// Write a Graphviz rendering of a model, structure, arena or estimator slice.
    ExportDot(ExportArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("target").required(true))]
struct VerifyArgs {
    /// Plant model (JSON), or `random`.
    model: String,
    /// Verify the uncontrolled plant against an intruder observing Σ_a.
    #[arg(long, group = "target")]
    open_loop: bool,
    /// Tabular policy or control structure (JSON).
    #[arg(long, group = "target")]
    supervisor: Option<PathBuf>,
    /// Depth bound for tabular policies whose language is infinite.
    #[arg(long, default_value_t = 12)]
    bound: usize,
}

#[derive(Args)]
struct SynthesizeArgs {
    model: String,
    #[arg(long, default_value = "first_feasible")]
    policy: ExtractionPolicy,
    /// Structure output; further structures under enumerate_all go next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Report without wall-clock time, for byte-identical output.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct EstimateArgs {
    model: String,
    /// Trace file, one `event=<e|->, decision={..}|-` pair per line.
    #[arg(long)]
    flow: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DotKind {
    Model,
    Structure,
    Arena,
    EstimatorSlice,
}

#[derive(Args)]
struct ExportArgs {
    kind: DotKind,
    model: String,
    /// Control structure for `structure`, or any supervisor for `estimator-slice`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Arena only: omit pruned states and rejected decisions.
    #[arg(long)]
    live_only: bool,
    /// Estimator slice only: string length explored.
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Record of one invocation, written next to every artifact.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    tool_version: &'static str,
    inputs: Vec<FileDigest>,
    config: Value,
    outcome: String,
    artifacts: Vec<FileDigest>,
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

impl FileDigest {
    fn of(path: &Path, bytes: &[u8]) -> Self {
        FileDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

/// Input files read during a run, with their digests.
#[derive(Default)]
struct Inputs(Vec<FileDigest>);

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.0.push(FileDigest::of(path, &bytes));
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn model(&mut self, arg: &str, seed: u64) -> Result<PlantModel> {
        if arg == "random" {
            return Ok(random_model(&mut rng(seed), &RandomModelConfig::default()));
        }
        let path = Path::new(arg);
        let text = self.read(path)?;
        PlantModel::from_json(&text).with_context(|| format!("cannot load model {arg}"))
    }

    fn supervisor(&mut self, path: &Path, model: &PlantModel) -> Result<Supervisor> {
        let text = self.read(path)?;
        let format: Value = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse {}", path.display()))?;
        let loaded = match format.get("format").and_then(Value::as_str) {
            Some(TABULAR_FORMAT) => TabularPolicy::from_json(&text, model).map(Supervisor::Table),
            Some(STRUCTURE_FORMAT) => {
                ControlStructure::from_json(&text, model).map(Supervisor::Structure)
            }
            other => bail!(
                "{}: unknown supervisor format {:?} (expected `{TABULAR_FORMAT}` or `{STRUCTURE_FORMAT}`)",
                path.display(),
                other.unwrap_or("<missing>")
            ),
        };
        loaded.with_context(|| format!("cannot load supervisor {}", path.display()))
    }
}

enum Supervisor {
    Table(TabularPolicy),
    Structure(ControlStructure),
}

impl Supervisor {
    fn policy(&self) -> &dyn SupervisorPolicy {
        match self {
            Supervisor::Table(t) => t,
            Supervisor::Structure(s) => s,
        }
    }
}

/// A structure carries its own mode; an explicit conflicting `--mode` is an error.
fn structure_mode(
    structure: &ControlStructure,
    requested: Option<IssuanceMode>,
) -> Result<IssuanceMode> {
    match requested {
        Some(m) if m != structure.mode => bail!(
            "structure was synthesized for {} issuance but --mode {} was given",
            structure.mode,
            m
        ),
        _ => Ok(structure.mode),
    }
}

fn write_artifact(path: &Path, contents: &str, artifacts: &mut Vec<FileDigest>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    artifacts.push(FileDigest::of(path, contents.as_bytes()));
    Ok(())
}

fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest(at: &Path, manifest: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)? + "\n";
    let path = manifest_path(at);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// `out.json` → `out-2.json` for the second structure, and so on.
fn numbered(path: &Path, k: usize) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{k}"),
    };
    path.with_file_name(name)
}

fn print_closed_loop(model: &PlantModel, verdict: &ClosedLoopVerdict) {
    match &verdict.counterexample {
        None => println!("opaque ({})", verdict.scope),
        Some(cx) => {
            println!("not opaque");
            println!("counterexample: {}", model.fmt_string(&cx.string));
            println!("estimate: {}", model.fmt_states(cx.estimate));
            print!("flow:\n{}", format_trace(model, &cx.flow));
        }
    }
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<u8> {
    let mut inputs = Inputs::default();
    let model = inputs.model(&args.model, cli.seed)?;
    let opaque = if args.open_loop {
        match model.verify_open_loop_opacity() {
            OpenLoopVerdict::Opaque => {
                println!("opaque (exact)");
                true
            }
            OpenLoopVerdict::NotOpaque { witness, estimate } => {
                println!("not opaque");
                println!("witness: {}", model.fmt_string(&witness));
                println!("estimate: {}", model.fmt_states(estimate));
                false
            }
        }
    } else {
        let path = args.supervisor.as_deref().expect("clap enforces the group");
        let verdict = match inputs.supervisor(path, &model)? {
            Supervisor::Structure(s) => {
                structure_mode(&s, cli.mode)?;
                verify_structure_opacity(&model, &s)?
            }
            Supervisor::Table(t) => {
                verify_closed_loop_opacity(&model, &t, cli.mode.unwrap_or_default(), args.bound)?
            }
        };
        print_closed_loop(&model, &verdict);
        verdict.is_opaque()
    };
    Ok(if opaque { OPAQUE } else { NOT_OPAQUE })
}

fn synthesize_cmd(cli: &Cli, args: &SynthesizeArgs) -> Result<u8> {
    let mut inputs = Inputs::default();
    let model = inputs.model(&args.model, cli.seed)?;
    let cfg = SynthesisConfig {
        size_guard: cli.size_guard,
        ..SynthesisConfig::default()
    }
    .with_mode(cli.mode.unwrap_or_default())
    .with_policy(args.policy);

    let started = Instant::now();
    let run = synthesize(&model, &cfg)?;
    let elapsed = (!args.no_timing).then(|| started.elapsed());
    println!(
        "{}",
        SynthesisReport::new(&model, &cfg, &run, elapsed).to_json()
    );

    let mut artifacts = Vec::new();
    if let Some(out) = &args.out {
        for (k, s) in run.outcome.structures().iter().enumerate() {
            let path = if k == 0 {
                out.clone()
            } else {
                numbered(out, k + 1)
            };
            write_artifact(&path, &s.structure.to_json(&model), &mut artifacts)?;
        }
    }
    if let Some(dot) = &args.dot {
        let text = match run.outcome.first() {
            Some(s) => structure_dot(&model, s),
            None => arena_dot(&model, &run.arena, false),
        };
        write_artifact(dot, &text, &mut artifacts)?;
    }

    let outcome = match &run.outcome {
        SynthesisOutcome::Solved(all) if all.len() == 1 => "solved (1 structure)".to_string(),
        SynthesisOutcome::Solved(all) => format!("solved ({} structures)", all.len()),
        SynthesisOutcome::NoSolution => "no solution exists".to_string(),
    };
    if let Some(anchor) = args.out.as_ref().or(args.dot.as_ref()) {
        let manifest = RunManifest {
            command: "synthesize",
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: inputs.0,
            config: json!({
                "model": args.model,
                "mode": cfg.mode.as_str(),
                "policy": cfg.policy.as_str(),
                "size_guard": cfg.size_guard,
                "enumerate_cap": cfg.enumerate_cap,
                "seed": (args.model == "random").then_some(cli.seed),
            }),
            outcome: outcome.clone(),
            artifacts,
        };
        write_manifest(anchor, &manifest)?;
    }
    if run.outcome.is_solved() {
        Ok(OPAQUE)
    } else {
        eprintln!("{outcome}");
        Ok(NO_SOLUTION)
    }
}

fn estimate(cli: &Cli, args: &EstimateArgs) -> Result<u8> {
    let mut inputs = Inputs::default();
    let model = inputs.model(&args.model, cli.seed)?;
    let text = inputs.read(&args.flow)?;
    let flow = parse_trace(&model, &text)?;
    let q = estimate_from_flow(&model, &flow, cli.mode.unwrap_or_default())?;
    println!("{}", model.fmt_states(q));
    Ok(OPAQUE)
}

fn export_dot(cli: &Cli, args: &ExportArgs) -> Result<u8> {
    let mut inputs = Inputs::default();
    let model = inputs.model(&args.model, cli.seed)?;
    let need_input = || {
        args.input
            .as_deref()
            .context("this export needs --input <supervisor or structure>")
    };
    let mode = cli.mode.unwrap_or_default();
    let text = match args.kind {
        DotKind::Model => model_dot(&model),
        DotKind::Structure => match inputs.supervisor(need_input()?, &model)? {
            Supervisor::Structure(s) => structure_dot(&model, &s),
            Supervisor::Table(_) => bail!("a tabular policy has no structure to draw"),
        },
        DotKind::Arena => {
            let cfg = SynthesisConfig {
                size_guard: cli.size_guard,
                ..SynthesisConfig::default()
            }
            .with_mode(mode);
            let mut arena = expand_arena(&model, &cfg)?;
            prune_incomplete(&mut arena, &model);
            arena_dot(&model, &arena, args.live_only)
        }
        DotKind::EstimatorSlice => {
            let sup = inputs.supervisor(need_input()?, &model)?;
            let mode = match &sup {
                Supervisor::Structure(s) => structure_mode(s, cli.mode)?,
                Supervisor::Table(_) => mode,
            };
            estimator_slice_dot(&model, sup.policy(), mode, args.depth)
        }
    };
    match &args.out {
        None => print!("{text}"),
        Some(out) => {
            let mut artifacts = Vec::new();
            write_artifact(out, &text, &mut artifacts)?;
            let kind = args.kind.to_possible_value().expect("no skipped variants");
            let manifest = RunManifest {
                command: "export-dot",
                tool_version: env!("CARGO_PKG_VERSION"),
                inputs: inputs.0,
                config: json!({
                    "model": args.model,
                    "kind": kind.get_name(),
                    "mode": mode.as_str(),
                    "live_only": args.live_only,
                    "depth": args.depth,
                    "seed": (args.model == "random").then_some(cli.seed),
                }),
                outcome: "written".into(),
                artifacts,
            };
            write_manifest(out, &manifest)?;
        }
    }
    Ok(OPAQUE)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => verify(&cli, a),
        Command::Synthesize(a) => synthesize_cmd(&cli, a),
        Command::Estimate(a) => estimate(&cli, a),
        Command::ExportDot(a) => export_dot(&cli, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(FAILURE)
        }
    }
}
