use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rkhs_paths::cli::{run, Command, Failure, JobConfig, EXIT_ERROR};
use rkhs_paths::Error;

/// Run one spectral job described by a JSON config.
#[derive(Parser, Debug)]
#[command(name = "rkhs-paths", version)]
struct Args {
    /// Job config or manifest; `-` or absent reads stdin.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// spectrum, analyze, power-kernel, sample, dominance, rank-diff, tensor
    /// or reproduce-table (overrides the config's `command`).
    #[arg(long)]
    command: Option<String>,

    /// Sampling seed (overrides `params.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &Args) -> Result<JobConfig, Failure> {
    let fail = |error: Error| Failure {
        error,
        operation: "parse_config",
    };
    let text = match args.config.as_deref() {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p).map_err(|e| fail(e.into()))?,
        _ if args.command.as_deref() == Some("reproduce-table") && args.config.is_none() => "{}".to_string(),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| fail(e.into()))?;
            s
        }
    };
    let mut config = JobConfig::from_json(&text).map_err(fail)?;
    if let Some(name) = &args.command {
        config.command =
            Some(Command::parse(name).ok_or_else(|| fail(Error::Usage(format!("unknown command {name:?}"))))?);
    }
    if let Some(seed) = args.seed {
        config.params.seed = Some(seed);
    }
    Ok(config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|config| {
        let out = args
            .out
            .clone()
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        run(&config, &out).map(|o| (o, out))
    });
    match result {
        Ok((outcome, out)) => {
            for f in &outcome.files {
                println!("{}", f.strip_prefix(&out).unwrap_or(f).display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(failure) => {
            let report = failure.to_json();
            eprint!("{report}");
            if let Some(out) = &args.out {
                let _ = std::fs::create_dir_all(out).and_then(|_| std::fs::write(out.join("error.json"), &report));
            }
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
