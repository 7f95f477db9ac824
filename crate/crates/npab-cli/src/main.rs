//! Command-line front end: loads a flat-key experiment config, runs the
//! requested experiment and writes machine-readable output files.
//!
//! Exit codes: 0 on success, 1 on usage/config/IO errors, 2 when a single
//! session run aborts at the check-bit test.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use npab::config::{parse_config, ExperimentConfig, ExperimentKind};
use npab::gf2codes::{code_pair_to_string, parity_over_repetition, steane_pair, NestedCodePair};
use npab::report;
use npab::stats;

#[derive(Parser)]
#[command(
    name = "npab",
    version,
    about = "Simulator for QKD with a pre-shared basis sequence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session and write its transcript JSON
    Run(CommonArgs),
    /// Run many sessions; write a per-session CSV and a summary JSON
    Campaign(CommonArgs),
    /// Run the three-arm error-rate deviation study
    DeviationStudy(CommonArgs),
    /// Report analytic and sampled source distinguishability
    SourceAudit(CommonArgs),
    /// Estimate the eavesdropper's information about the basis sequence
    BasisInfo(CommonArgs),
    /// Describe the built-in code pairs and the configured pair
    CodesInfo(CodesInfoArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config file (flat `section.key = value` format)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's session.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config's output.dir; default ".")
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for multi-session experiments (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CodesInfoArgs {
    /// Optional config; its code.pair is described alongside the catalog
    #[arg(long)]
    config: Option<PathBuf>,
}

type DynError = Box<dyn std::error::Error + Send + Sync>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, DynError> {
    match cli.command {
        Command::Run(args) => with_config(&args, ExperimentKind::Single, cmd_run),
        Command::Campaign(args) => with_config(&args, ExperimentKind::Campaign, cmd_campaign),
        Command::DeviationStudy(args) => {
            with_config(&args, ExperimentKind::DeviationStudy, cmd_deviation_study)
        }
        Command::SourceAudit(args) => {
            with_config(&args, ExperimentKind::SourceAudit, cmd_source_audit)
        }
        Command::BasisInfo(args) => with_config(&args, ExperimentKind::BasisInfo, cmd_basis_info),
        Command::CodesInfo(args) => cmd_codes_info(&args),
    }
}

struct RunContext {
    config: ExperimentConfig,
    config_dir: PathBuf,
    out_dir: PathBuf,
    seed: u64,
}

fn with_config(
    args: &CommonArgs,
    expected: ExperimentKind,
    body: fn(&RunContext) -> Result<ExitCode, DynError>,
) -> Result<ExitCode, DynError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read config {}: {e}", args.config.display()))?;
    let config = parse_config(&text)?;
    if config.kind != expected {
        return Err(format!(
            "config has experiment.kind = {}, but this subcommand needs {}",
            config.kind.as_str(),
            expected.as_str()
        )
        .into());
    }
    let config_dir = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| format!("cannot create output dir {}: {e}", out_dir.display()))?;
    let seed = config.effective_seed(args.seed);
    let context = RunContext {
        config,
        config_dir,
        out_dir,
        seed,
    };
    match args.threads {
        None => body(&context),
        Some(threads) => {
            if threads == 0 {
                return Err("--threads must be at least 1".into());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()?
                .install(|| body(&context))
        }
    }
}

fn resolve_pair(context: &RunContext) -> Result<Arc<NestedCodePair>, DynError> {
    Ok(Arc::new(context.config.code.resolve(&context.config_dir)?))
}

fn write_file(path: &Path, contents: &str) -> Result<(), DynError> {
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(())
}

fn cmd_run(context: &RunContext) -> Result<ExitCode, DynError> {
    let pair = resolve_pair(context)?;
    let params = context.config.session_params(pair, Some(context.seed))?;
    let b = npab::protocol::BasisSequence::random(
        params.positions(),
        &mut npab::rng::stream(params.seed, "basis"),
    );
    let transcript =
        npab::protocol::run_session(&params, &b, &context.config.source, &context.config.attack)?;
    let path = context.out_dir.join("transcript.json");
    write_file(&path, &report::transcript_json(&transcript))?;
    let key_bits = transcript
        .alice_key
        .as_ref()
        .map(npab::gf2codes::BitVector::len)
        .unwrap_or(0);
    println!(
        "session {}: qber {}, {} key bits, transcript at {}",
        if transcript.aborted {
            "aborted"
        } else {
            "completed"
        },
        report::round_sig12(transcript.qber),
        key_bits,
        path.display()
    );
    Ok(if transcript.aborted {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_campaign(context: &RunContext) -> Result<ExitCode, DynError> {
    let pair = resolve_pair(context)?;
    let spec = context.config.campaign_spec(pair, false)?;
    let sessions = context.config.sessions.expect("validated for campaigns");
    let transcripts = stats::run_campaign(&spec, sessions, context.seed)?;
    let summary = stats::summarize(&transcripts)?;
    let csv_path = context.out_dir.join("campaign.csv");
    let json_path = context.out_dir.join("summary.json");
    write_file(
        &csv_path,
        &report::campaign_csv(&transcripts, context.config.attack.label()),
    )?;
    write_file(&json_path, &report::to_json_pretty(&summary))?;
    println!(
        "{sessions} sessions: mean qber {}, abort rate {}, outputs at {} and {}",
        report::round_sig12(summary.qber_mean),
        report::round_sig12(summary.abort_rate),
        csv_path.display(),
        json_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_deviation_study(context: &RunContext) -> Result<ExitCode, DynError> {
    let spec = context.config.deviation_spec(Some(context.seed))?;
    let study = stats::deviation_study(&spec)?;
    let json_path = context.out_dir.join("deviation.json");
    let csv_path = context.out_dir.join("deviation.csv");
    write_file(&json_path, &report::to_json_pretty(&study))?;
    write_file(&csv_path, &report::deviation_csv(&study))?;
    for arm in &study.arms {
        println!(
            "arm {}: std {} (predicted {})",
            arm.label,
            report::round_sig12(arm.qber_std),
            report::round_sig12(arm.predicted_std)
        );
    }
    for ratio in &study.ratios {
        println!(
            "ratio {}: {} (95% CI {} .. {})",
            ratio.label,
            report::round_sig12(ratio.point),
            report::round_sig12(ratio.ci_low),
            report::round_sig12(ratio.ci_high)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_source_audit(context: &RunContext) -> Result<ExitCode, DynError> {
    let audit = stats::source_audit(
        &context.config.source,
        context.config.audit_samples,
        context.seed,
    )?;
    let path = context.out_dir.join("source_audit.json");
    write_file(&path, &report::to_json_pretty(&audit))?;
    println!(
        "trace distance between Z- and X-conditioned ensembles: analytic {}, sampled {} ({} samples)",
        report::round_sig12(audit.analytic_trace_distance),
        report::round_sig12(audit.empirical_trace_distance),
        audit.samples
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_basis_info(context: &RunContext) -> Result<ExitCode, DynError> {
    let pair = resolve_pair(context)?;
    let spec = context.config.campaign_spec(pair, true)?;
    let sessions = context.config.sessions.expect("validated for basis-info");
    let estimate = stats::basis_info_experiment(&spec, sessions, context.seed)?;
    let path = context.out_dir.join("basis_info.json");
    write_file(&path, &report::to_json_pretty(&estimate))?;
    println!(
        "estimated basis leakage: {} bits/position (std error {}, {} samples)",
        report::round_sig12(estimate.mi_bits_per_position),
        report::round_sig12(estimate.std_error),
        estimate.samples
    );
    Ok(ExitCode::SUCCESS)
}

fn describe_pair(name: &str, pair: &NestedCodePair) {
    println!(
        "{name}: block {} bits, dim C1 {}, dim C2 {}, {} key bit(s) per block",
        pair.block_len(),
        pair.c1().dimension(),
        pair.c2().dimension(),
        pair.key_length()
    );
}

fn cmd_codes_info(args: &CodesInfoArgs) -> Result<ExitCode, DynError> {
    println!("built-in code pairs:");
    describe_pair("  steane", &steane_pair());
    describe_pair(
        "  parity-repetition-4",
        &parity_over_repetition(4).expect("4 is even"),
    );
    println!("  parity-repetition-N: single-parity-check over repetition, even N >= 4");
    println!("  file:PATH: plain text, header `n k1 k2`, then C1 and C2 generator rows");
    if let Some(config_path) = &args.config {
        let text = std::fs::read_to_string(config_path)
            .map_err(|e| format!("cannot read config {}: {e}", config_path.display()))?;
        let config = parse_config(&text)?;
        let base = config_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let pair = config.code.resolve(&base)?;
        println!("configured pair:");
        describe_pair("  code.pair", &pair);
        print!("{}", code_pair_to_string(&pair));
    }
    Ok(ExitCode::SUCCESS)
}
