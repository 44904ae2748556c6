use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use ssmds_cli::commands::{self, Level, Status};

#[derive(Parser)]
#[command(name = "ssmds", version, about = "Small sub-packetization MDS array codes: shard, repair, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a code from a JSON config (inline or a file path) and write a bundle.
    Build {
        #[arg(long)]
        config: String,
        /// Bundle directory to create.
        #[arg(long, default_value = "bundle")]
        out: PathBuf,
    },
    /// Split a file into n shards.
    Encode {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the original file from any k shards.
    Decode {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        shards: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated shard indices to decode from; defaults to the first k present.
        #[arg(long = "use", value_delimiter = ',')]
        use_nodes: Option<Vec<usize>>,
    },
    /// Simulate the loss of one node.
    Kill {
        #[arg(long)]
        shards: PathBuf,
        #[arg(long)]
        node: usize,
    },
    /// Regenerate one lost shard from the others with reduced download.
    Repair {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        shards: PathBuf,
        #[arg(long)]
        node: usize,
        /// Print the report as JSON instead of one line.
        #[arg(long, value_parser = ["json"])]
        report: Option<String>,
    },
    /// Check code properties and print a JSON report.
    Verify {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
        /// With `full`: also run the reconstruction oracle and the structural checks.
        #[arg(long)]
        extended: bool,
    },
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Build { config, out } => {
            let (status, summary) = commands::build(&config, &out)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(status)
        }
        Command::Encode { bundle, input, out } => {
            let s = commands::encode(&bundle, &input, &out)?;
            println!(
                "encoded {} bytes into {} stripes, {} symbols per shard",
                s.input_bytes, s.stripes, s.symbols_per_shard
            );
            Ok(Status::Pass)
        }
        Command::Decode { bundle, shards, out, use_nodes } => {
            let len = commands::decode(&bundle, &shards, &out, use_nodes.as_deref())?;
            println!("decoded {len} bytes to {}", out.display());
            Ok(Status::Pass)
        }
        Command::Kill { shards, node } => {
            let dead = commands::kill(&shards, node)?;
            println!("node {node} killed ({})", dead.display());
            Ok(Status::Pass)
        }
        Command::Repair { bundle, shards, node, report } => {
            let r = commands::repair(&bundle, &shards, node)?;
            if report.is_some() {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                println!("{}", r.summary_line());
            }
            Ok(Status::Pass)
        }
        Command::Verify { bundle, level, extended } => {
            let out = commands::verify_bundle(&bundle, level, extended)?;
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(if out.passed { Status::Pass } else { Status::PropertyFailure })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::PropertyFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
