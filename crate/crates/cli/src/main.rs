mod args;
mod commands;
mod error;
mod record;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use commands::Context;
use entwit::Tolerances64;
use record::RunRecord;

fn configure_threads() {
    if let Some(n) = std::env::var("ENTWIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let tol = match cli.tol {
        Some(t) if t > 0.0 && t.is_finite() => Tolerances64::uniform(t),
        Some(t) => {
            eprintln!("error: --tol must be positive, got {t}");
            return ExitCode::from(2);
        }
        None => Tolerances64::default(),
    };
    let ctx = Context {
        seed: cli.seed,
        tol,
        restarts: cli.restarts,
        basis: cli.basis.clone(),
        per_b: cli.per_b_settings,
    };
    let start = Instant::now();
    match commands::run(&cli.command, &ctx) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            if let Some(path) = &cli.out {
                let rec = RunRecord {
                    command: std::env::args().collect(),
                    input_digest: outcome.digest,
                    seed: cli.seed,
                    tolerances: tol,
                    outputs: outcome.outputs,
                    wall_time_s: start.elapsed().as_secs_f64(),
                };
                if let Err(e) = record::write_json(path, &rec) {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
