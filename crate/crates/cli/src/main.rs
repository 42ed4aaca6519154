//! `algdyn`: command-line front end for certified computations on
//! expansive algebraic `Z^d`-actions.
//!
//! Exit status: 0 for a definite verdict, 2 when the verdict is Unknown,
//! 1 on any error.

mod input;
mod jobs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use algdyn_core::Exec;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use input::{parse_matrix_arg, parse_poly, read_file, InputSpec, Presentation};
use jobs::{
    DualityJob, EntropyJob, EntropyMethodArg, ExpansiveJob, FreegroupJob, HomoclinicJob, IeJob, Outcome, ShadowJob, Stage,
    Status,
};
use output::{render, Format};

#[derive(Parser)]
#[command(name = "algdyn", version, about = "Certified computations for expansive algebraic Z^d-actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Run every data-parallel kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct Input {
    /// Laurent polynomial, e.g. "3 - u1 - u1^-1".
    #[arg(long)]
    poly: Option<String>,
    /// Matrix as inline JSON (`[["2","u1"],["u1^-1","2"]]`) or a path to a JSON file.
    #[arg(long)]
    matrix: Option<String>,
}

#[derive(Args, Clone)]
#[group(required = false, multiple = false)]
struct OptionalInput {
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    matrix: Option<String>,
}

fn present(poly: &Option<String>, matrix: &Option<String>) -> Result<Option<Presentation>, String> {
    match (poly, matrix) {
        (Some(p), _) => parse_poly(p).map(Some),
        (_, Some(m)) => parse_matrix_arg(m).map(Some),
        _ => Ok(None),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide expansiveness and finiteness of entropy.
    Expansive {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Entropy by Mahler measure, Peters counting or homoclinic packing.
    Entropy {
        #[command(flatten)]
        input: OptionalInput,
        #[arg(long, value_enum, default_value = "mahler")]
        method: EntropyMethodArg,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        /// Seed set for counting as JSON, e.g. "[[0,0],[1,0]]".
        #[arg(long)]
        seed_set: Option<String>,
        /// Integer matrix for rational-vector counting, e.g. "[[2]]".
        #[arg(long)]
        companion_matrix: Option<String>,
        /// Inclusive box such as `0..19` or `-3..3,-3..3`.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Build a homoclinic point and its certificates.
    Homoclinic {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        tol: Option<f64>,
        /// Inclusive box such as `0..19` or `-3..3,-3..3`.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// Component of the row vector m (repeat once per coordinate).
        #[arg(long = "m")]
        m: Vec<String>,
        /// Also check the pairing symmetry on the window.
        #[arg(long)]
        pairing: bool,
        #[arg(long)]
        spec_eps: Option<f64>,
    },
    /// Independence-set witnesses for a homoclinic point.
    Ie {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        eps: Option<f64>,
        /// Inclusive box such as `0..19` or `-3..3,-3..3`.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "m")]
        m: Vec<String>,
    },
    /// Shadow homoclinic blocks by a single point.
    Shadow {
        /// JSON file with the presentation, eps, blocks and optional period basis.
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the entropies of X_A and X_{A*}.
    Duality {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Verify the annihilator of chi_1 in the free group ring.
    FreegroupCheck {
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Run several stages on one presentation.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Deserialize)]
struct ShadowConfig {
    #[serde(flatten)]
    input: InputSpec,
    #[serde(flatten)]
    job: ShadowJob,
}

#[derive(Deserialize)]
struct PipelineConfig {
    #[serde(flatten)]
    input: InputSpec,
    #[serde(default)]
    stages: Vec<Value>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("{what}: {e}"))
}

fn envelope(command: &str, input: Option<&Presentation>, outcome: Outcome) -> (Value, Status) {
    let doc = json!({
        "command": command,
        "input": input.map(Presentation::describe),
        "parameters": outcome.parameters,
        "report": outcome.report,
        "exit": outcome.status as i32,
    });
    (doc, outcome.status)
}

fn single(command: &str, input: Option<Presentation>, run: impl FnOnce(Option<&Presentation>) -> Result<Outcome, String>) -> Result<(Value, i32), String> {
    let outcome = run(input.as_ref())?;
    let (doc, status) = envelope(command, input.as_ref(), outcome);
    Ok((doc, status as i32))
}

/// Stages run in order on the shared input; the first failure stops the
/// run and the report keeps what finished.
fn pipeline(text: &str, exec: Exec) -> Result<(Value, i32), String> {
    let cfg: PipelineConfig = parse_json(text, "pipeline config")?;
    let input = cfg.input.resolve()?;
    let mut done = Vec::new();
    let mut worst = Status::Definite;
    for (i, raw) in cfg.stages.iter().enumerate() {
        let failed = |msg: String, done: Vec<Value>| {
            let doc = json!({
                "command": "pipeline",
                "input": input.as_ref().map(Presentation::describe),
                "stages": done,
                "error": { "stage": i, "message": msg },
                "exit": 1,
            });
            Ok((doc, 1))
        };
        let stage: Stage = match serde_json::from_value(raw.clone()) {
            Ok(s) => s,
            Err(e) => return failed(format!("stage {i}: {e}"), done),
        };
        match stage.run(input.as_ref(), exec) {
            Ok(outcome) => {
                worst = worst.max(outcome.status);
                done.push(json!({
                    "stage": stage.name(),
                    "parameters": outcome.parameters,
                    "report": outcome.report,
                    "exit": outcome.status as i32,
                }));
            }
            Err(e) => return failed(format!("stage {i} ({}): {e}", stage.name()), done),
        }
    }
    let doc = json!({
        "command": "pipeline",
        "input": input.as_ref().map(Presentation::describe),
        "stages": done,
        "exit": worst as i32,
    });
    Ok((doc, worst as i32))
}

fn dispatch(cmd: Command, exec: Exec) -> Result<(Value, i32), String> {
    match cmd {
        Command::Expansive { input, grid } => {
            single("expansive", present(&input.poly, &input.matrix)?, |i| ExpansiveJob { grid }.run(i, exec))
        }
        Command::Entropy { input, method, grid, n_max, seed_set, companion_matrix, window, eps, levels } => {
            let job = EntropyJob {
                method,
                grid,
                n_max,
                seed_set: seed_set.as_deref().map(|s| parse_json(s, "seed set")).transpose()?,
                companion_matrix: companion_matrix.as_deref().map(|s| parse_json(s, "companion matrix")).transpose()?,
                window,
                eps,
                levels,
            };
            single("entropy", present(&input.poly, &input.matrix)?, |i| job.run(i, exec))
        }
        Command::Homoclinic { input, tol, window, m, pairing, spec_eps } => {
            let job = HomoclinicJob { tol, window, m, pairing, spec_eps };
            single("homoclinic", present(&input.poly, &input.matrix)?, |i| job.run(i, exec))
        }
        Command::Ie { input, eps, window, cap, seed, tol, m } => {
            let job = IeJob { eps, window, cap, seed, tol, m };
            single("ie", present(&input.poly, &input.matrix)?, |i| job.run(i, exec))
        }
        Command::Shadow { config } => {
            let cfg: ShadowConfig = parse_json(&read_file(&config)?, "shadow config")?;
            single("shadow", cfg.input.resolve()?, |i| cfg.job.run(i, exec))
        }
        Command::Duality { input, grid } => {
            single("duality", present(&input.poly, &input.matrix)?, |i| DualityJob { grid }.run(i, exec))
        }
        Command::FreegroupCheck { rank, order, radius } => {
            single("freegroup-check", None, |_| FreegroupJob { rank, order, radius }.run(exec))
        }
        Command::Pipeline { config } => pipeline(&read_file(&config)?, exec),
    }
}

fn emit(doc: &Value, format: Format, output: Option<&PathBuf>) -> Result<(), String> {
    let text = render(doc, format)?;
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    let result = dispatch(cli.command, exec).and_then(|(doc, code)| {
        emit(&doc, cli.format, cli.output.as_ref())?;
        Ok(code)
    });
    match result {
        Ok(code) => {
            if code == 1 {
                eprintln!("error: pipeline stopped early; see the report");
            }
            ExitCode::from(code as u8)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
