use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use qkforge::campaign::{self, CampaignConfig, Mode};
use qkforge::commands::{self, Format, Output};
use qkforge::io::parse_edge_list;
use qkforge_core::{Check, Digraph, Selector, VertexSet};

/// Quasi-kernels, breakdown sequences and counterexample campaigns on small digraphs.
#[derive(Parser)]
#[command(name = "qkforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quasi-kernel construction and checks.
    Qk {
        #[command(subcommand)]
        action: QkAction,
    },
    /// Breakdown sequences.
    Bds {
        #[command(subcommand)]
        action: BdsAction,
    },
    Axiom {
        #[command(subcommand)]
        action: AxiomAction,
    },
    Sqkc {
        #[command(subcommand)]
        action: SqkcAction,
    },
    Campaign {
        #[command(subcommand)]
        action: CampaignAction,
    },
    /// Re-run the check recorded in an escrow file.
    VerifyCe { file: PathBuf },
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "lex")]
    selector: Selector,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum QkAction {
    Construct(GraphArgs),
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        /// Comma separated vertex ids.
        #[arg(long)]
        set: String,
    },
    Min(GraphArgs),
}

#[derive(Subcommand)]
enum BdsAction {
    Build(GraphArgs),
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        /// JSON file with the steps, as printed by `bds build`.
        #[arg(long)]
        bds: PathBuf,
    },
    Trace(GraphArgs),
}

#[derive(Subcommand)]
enum AxiomAction {
    Check(GraphArgs),
}

#[derive(Subcommand)]
enum SqkcAction {
    Check(GraphArgs),
}

#[derive(Subcommand)]
enum CampaignAction {
    Run(CampaignArgs),
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "exhaustive")]
    mode: Mode,
    #[arg(long, default_value = "all")]
    checks: String,
    #[arg(long, default_value = "lex")]
    selector: Selector,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, default_value = "qkforge-campaign")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn read_graph(args: &GraphArgs) -> anyhow::Result<Digraph> {
    let text = match &args.input {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
            s
        }
    };
    Ok(parse_edge_list(&text)?)
}

fn json_only(args: &GraphArgs, command: &str) -> anyhow::Result<()> {
    match args.format {
        Format::Json => Ok(()),
        other => Err(commands::unsupported_format(command, other)),
    }
}

fn parse_set(s: &str) -> anyhow::Result<VertexSet> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<usize>().with_context(|| format!("`{p}` is not a vertex id")))
        .collect()
}

fn run(command: Command) -> anyhow::Result<Output> {
    match command {
        Command::Qk { action } => match action {
            QkAction::Construct(a) => commands::qk_construct(&read_graph(&a)?, a.selector, a.format),
            QkAction::Verify { graph, set } => {
                json_only(&graph, "qk verify")?;
                commands::qk_verify(&read_graph(&graph)?, parse_set(&set)?)
            }
            QkAction::Min(a) => {
                json_only(&a, "qk min")?;
                commands::qk_min(&read_graph(&a)?)
            }
        },
        Command::Bds { action } => match action {
            BdsAction::Build(a) => commands::bds_build(&read_graph(&a)?, a.selector, a.format),
            BdsAction::Verify { graph, bds } => {
                json_only(&graph, "bds verify")?;
                let text = std::fs::read_to_string(&bds).with_context(|| format!("reading {}", bds.display()))?;
                commands::bds_verify(&read_graph(&graph)?, commands::parse_steps(&text)?)
            }
            BdsAction::Trace(a) => commands::bds_trace(&read_graph(&a)?, a.selector, a.format),
        },
        Command::Axiom { action: AxiomAction::Check(a) } => {
            json_only(&a, "axiom check")?;
            commands::axiom_check(&read_graph(&a)?)
        }
        Command::Sqkc { action: SqkcAction::Check(a) } => {
            json_only(&a, "sqkc check")?;
            commands::sqkc_check(&read_graph(&a)?)
        }
        Command::Campaign { action: CampaignAction::Run(a) } => run_campaign(a),
        Command::VerifyCe { file } => {
            let ce = campaign::load_counterexample(&file)?;
            let v = campaign::verify_counterexample(&ce);
            let ok = v.confirmed && v.id_matches;
            let stdout = serde_json::to_string_pretty(&v)? + "\n";
            Ok(Output { stdout, code: if ok { 0 } else { 2 } })
        }
    }
}

fn run_campaign(a: CampaignArgs) -> anyhow::Result<Output> {
    if a.format == Format::Dot {
        return Err(commands::unsupported_format("campaign run", a.format));
    }
    let config = CampaignConfig {
        mode: a.mode,
        n: a.n,
        checks: Check::parse_list(&a.checks).map_err(anyhow::Error::msg)?,
        selector: a.selector,
        workers: a.workers,
        seed: a.seed,
        p: a.p,
        count: a.count,
        out: Some(a.out),
    };
    let outcome = campaign::run_campaign(&config)?;
    eprintln!(
        "{} instances, {} counterexamples, {:.3}s",
        outcome.report.instance_count,
        outcome.counterexamples.len(),
        outcome.wall_time_seconds
    );
    let stdout = match a.format {
        Format::Csv => outcome.report.to_csv(),
        _ => outcome.report.to_json(),
    };
    let escrowed = !outcome.report.escrow_files.is_empty();
    Ok(Output { stdout, code: if escrowed { 2 } else { 0 } })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
