//! Command-line entry point: reproducible PR-box experiments with JSON, CSV
//! and text output. Exit codes: 0 pass, 1 check failure, 2 usage error.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use prbox::boxes::{
    box_to_csv, box_to_json, box_from_channel, chsh, correlator, is_no_signaling, make_pr_box,
    z_settings, Strategy,
};
use prbox::channels::make_pr_channel;
use prbox::protocol::{monte_carlo_box, transcripts_to_jsonl};
use prbox::quantum_bounds::{seesaw_maximize, SeesawConfig, TSIRELSON_BOUND};
use prbox::verify::verify_all;

#[derive(Parser)]
#[command(name = "prbox", version, about = "Process-based PR box experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// RNG seed for every stochastic component
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Number of runs (simulate) or restarts (tsirelson)
    #[arg(long = "n-runs", global = true, default_value_t = 100_000)]
    n_runs: u64,

    /// Numerical tolerance for checks
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Write the report to this path instead of stdout
    #[arg(long = "out", global = true)]
    output_path: Option<String>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Probe the PR channel with Z tests, print the box, correlators and CHSH
    ChshDemo,
    /// Emit the ideal PR box table
    PrBox,
    /// Check the PR channel's box for signaling
    NoSignaling,
    /// Enumerate the 16 deterministic strategies and their CHSH values
    LocalBound,
    /// Seesaw search for the quantum CHSH maximum
    Tsirelson,
    /// Run the classical two-party simulation and tally its statistics
    Simulate,
    /// Run the full invariant battery
    VerifyAll,
}

fn emit(out: &Option<String>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, content),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match &cli.command {
        Command::ChshDemo => {
            let (alice, bob) = z_settings();
            let b = box_from_channel(&make_pr_channel(), &alice, &bob)?;
            let correlators: Vec<f64> = (0..2u8)
                .flat_map(|sx| (0..2u8).map(move |sy| (sx, sy)))
                .map(|(sx, sy)| correlator(&b, sx, sy))
                .collect();
            let value = chsh(&b);
            let content = match cli.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "box": serde_json::from_str::<serde_json::Value>(&box_to_json(&b))?,
                    "correlators": correlators,
                    "chsh": value,
                }))?,
                Format::Csv => box_to_csv(&b),
                Format::Text => {
                    let mut s = String::from("PR channel probed with Z tests\n\n");
                    s.push_str(&box_to_csv(&b));
                    s.push_str(&format!(
                        "\ncorrelators (Z0Z0, Z0Z1, Z1Z0, Z1Z1): \
                         {:.12}, {:.12}, {:.12}, {:.12}\n",
                        correlators[0], correlators[1], correlators[2], correlators[3]
                    ));
                    s.push_str(&format!("CHSH = {value:.12}"));
                    s
                }
            };
            emit(&cli.output_path, &content)?;
            Ok(true)
        }
        Command::PrBox => {
            let b = make_pr_box();
            let content = match cli.format {
                Format::Json => box_to_json(&b),
                Format::Csv | Format::Text => box_to_csv(&b),
            };
            emit(&cli.output_path, &content)?;
            Ok(true)
        }
        Command::NoSignaling => {
            let (alice, bob) = z_settings();
            let b = box_from_channel(&make_pr_channel(), &alice, &bob)?;
            let (ok, dev) = is_no_signaling(&b, cli.tol);
            let content = match cli.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "no_signaling": ok,
                    "worst_deviation": dev,
                }))?,
                _ => format!("no-signaling: {ok} (worst marginal deviation {dev:.12e})"),
            };
            emit(&cli.output_path, &content)?;
            Ok(ok)
        }
        Command::LocalBound => {
            let rows: Vec<(usize, f64)> =
                (0..16).map(|i| (i, chsh(&Strategy::nth(i).to_box()))).collect();
            let max = rows.iter().map(|&(_, v)| v).fold(0.0f64, f64::max);
            let content = match cli.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "strategies": rows
                        .iter()
                        .map(|&(i, v)| json!({"strategy": i, "chsh": v}))
                        .collect::<Vec<_>>(),
                    "maximum": max,
                }))?,
                _ => {
                    let mut s = String::from("strategy (a0 a1 b0 b1)  CHSH\n");
                    for &(i, v) in &rows {
                        let st = Strategy::nth(i);
                        s.push_str(&format!(
                            "{i:2}  ({} {} {} {})          {v:.12}\n",
                            st.a0, st.a1, st.b0, st.b1
                        ));
                    }
                    s.push_str(&format!("maximum over strategies = {max:.12}"));
                    s
                }
            };
            emit(&cli.output_path, &content)?;
            Ok(true)
        }
        Command::Tsirelson => {
            let cfg = SeesawConfig {
                restarts: cli.n_runs.clamp(1, 10_000) as usize,
                tol: cli.tol.min(1e-10),
                seed: cli.seed,
                ..Default::default()
            };
            let res = seesaw_maximize(&cfg);
            let state: Vec<Vec<[f64; 2]>> = (0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| {
                            let z = res.best.state.matrix().get(i, j);
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect();
            let report = json!({
                "value": res.value,
                "target": TSIRELSON_BOUND,
                "state": state,
                "alice": res.best.alice,
                "bob": res.best.bob,
                "trace": res.trace,
            });
            let content = match cli.format {
                Format::Json | Format::Csv => serde_json::to_string_pretty(&report)?,
                Format::Text => format!(
                    "seesaw maximum = {:.12}\ntarget 2*sqrt(2) = {TSIRELSON_BOUND:.12}\n\
                     restarts = {}, seed = {}",
                    res.value, cfg.restarts, cfg.seed
                ),
            };
            emit(&cli.output_path, &content)?;
            Ok((res.value - TSIRELSON_BOUND).abs() <= 1e-6)
        }
        Command::Simulate => {
            let (mc, transcripts) = monte_carlo_box(cli.n_runs.max(1), cli.seed);
            match cli.format {
                Format::Json => {
                    // transcript log as JSON-lines
                    emit(&cli.output_path, &transcripts_to_jsonl(&transcripts))?;
                }
                _ => {
                    let mut s = format!(
                        "two-party simulation: {} runs, seed {}\n",
                        transcripts.len(),
                        cli.seed
                    );
                    match mc.empirical_chsh() {
                        Ok(v) => s.push_str(&format!("empirical CHSH = {v:.12}\n")),
                        Err(_) => s.push_str("empirical CHSH: not all settings observed\n"),
                    }
                    for sx in 0..2u8 {
                        for sy in 0..2u8 {
                            s.push_str(&format!(
                                "setting ({sx},{sy}): {} trials\n",
                                mc.setting_trials(sx, sy)
                            ));
                        }
                    }
                    emit(&cli.output_path, &s)?;
                }
            }
            Ok(true)
        }
        Command::VerifyAll => {
            let outcomes = verify_all(cli.seed, cli.tol);
            let all_passed = outcomes.iter().all(|o| o.passed);
            let content = match cli.format {
                Format::Json => serde_json::to_string_pretty(&outcomes)?,
                _ => {
                    let mut s = String::new();
                    for o in &outcomes {
                        s.push_str(&format!(
                            "[{}] {:<20} {}\n",
                            if o.passed { "PASS" } else { "FAIL" },
                            o.name,
                            o.detail
                        ));
                    }
                    s.push_str(if all_passed { "all checks passed" } else { "FAILURES present" });
                    s
                }
            };
            emit(&cli.output_path, &content)?;
            Ok(all_passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
