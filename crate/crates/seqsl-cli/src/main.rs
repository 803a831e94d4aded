//! Command-line front end.
//!
//! Exit codes: 0 = true/sat/valid, 1 = false/unsat/invalid, 2 = unknown,
//! 3 = usage or input error. Reports go to standard output, diagnostics to
//! standard error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seqsl::classify::classify;
use seqsl::formula::ensure_pseqsl;
use seqsl::minsky::{
    encode_with, simulate, EncodeOptions, MinskyMachine, SimOutcome, Validation,
};
use seqsl::reduce::{
    decide_pi1_validity, decide_sat, DecideConfig, SatVerdict, ValidityVerdict,
};
use seqsl::semantics::{check, check_traced, CheckConfig, Verdict3};
use seqsl::wordeq::{
    parse_word_formula, solve, to_single_equation, Alphabet, SolveConfig, SolverVerdict,
};
use seqsl::{parse_formula, parse_model, print_model, Model};

#[derive(Parser)]
#[command(name = "seqsl", about = "Sequence-heap separation logic toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model against a formula.
    Check {
        /// Model file (JSON).
        model: PathBuf,
        /// Formula file.
        formula: PathBuf,
        #[command(flatten)]
        bounds: CheckBounds,
        /// Print the satisfying split and witness choices.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Decide satisfiability of a propositional formula.
    Sat {
        formula: PathBuf,
        #[command(flatten)]
        solver: SolverBounds,
        /// Write a witness model (JSON) here when satisfiable.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Decide validity of a universally-prefixed propositional formula.
    Valid {
        formula: PathBuf,
        #[command(flatten)]
        solver: SolverBounds,
        /// Write a countermodel (JSON) here when invalid.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Word-equation commands.
    We {
        #[command(subcommand)]
        sub: WeCommand,
    },
    /// Two-counter machine commands.
    Minsky {
        #[command(subcommand)]
        sub: MinskyCommand,
    },
}

#[derive(Subcommand)]
enum WeCommand {
    /// Solve a word formula.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverBounds,
        #[arg(long)]
        json: bool,
    },
    /// Print the equivalent single word equation.
    Transform {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum MinskyCommand {
    /// Simulate a machine and print its run.
    Run {
        machine: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long)]
        json: bool,
    },
    /// Print the formula encoding the machine's halting problem.
    Encode {
        machine: PathBuf,
        /// Also report the formula's fragment shape.
        #[arg(long)]
        classify: bool,
        /// Emit the two-conjunct regrouping.
        #[arg(long)]
        regrouped: bool,
        /// Keep all transition sequence parameters existential (the
        /// prefix-shape variant; too weak for validation).
        #[arg(long)]
        weak_scope: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Simulate, build the run model, and check the encoding against it.
    Validate {
        machine: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct CheckBounds {
    /// Maximum candidate sequence length for bounded quantifiers.
    #[arg(long, default_value_t = 4)]
    seq_bound: usize,
    /// Fresh locations beyond the model (default: derived from the formula).
    #[arg(long)]
    loc_extra: Option<usize>,
    /// Fresh letters beyond the occurring alphabet.
    #[arg(long, default_value_t = 1)]
    alphabet_extra: usize,
}

#[derive(Args)]
struct SolverBounds {
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long, default_value_t = 100_000)]
    max_nodes: usize,
}

impl SolverBounds {
    fn decide_config(&self) -> DecideConfig {
        DecideConfig {
            solve: SolveConfig { max_len: self.max_len, max_nodes: self.max_nodes },
            reduce_max_nodes: 400_000,
        }
    }
}

const EXIT_TRUE: u8 = 0;
const EXIT_FALSE: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is not an error
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_TRUE };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_formula(path: &Path) -> Result<seqsl::Formula, String> {
    parse_formula(read(path)?.trim()).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_model(path: &Path) -> Result<Model, String> {
    parse_model(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_witness(path: &Path, model: &Model) -> Result<(), String> {
    fs::write(path, print_model(model) + "\n")
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Check { model, formula, bounds, trace, json } => {
            let model = load_model(&model)?;
            let f = load_formula(&formula)?;
            let cfg = CheckConfig {
                loc_universe_extra: bounds.loc_extra,
                seq_len_bound: bounds.seq_bound,
                alphabet_extra: bounds.alphabet_extra,
            };
            let (verdict, steps) = if trace {
                check_traced(&model, &f, &cfg).map_err(|e| e.to_string())?
            } else {
                (check(&model, &f, &cfg).map_err(|e| e.to_string())?, vec![])
            };
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "verdict": verdict_name(&verdict),
                        "reason": unknown_reason(&verdict),
                        "trace": steps,
                    })
                );
            } else {
                println!("{verdict}");
                for s in steps {
                    println!("  {s}");
                }
            }
            Ok(verdict_exit(&verdict))
        }
        Command::Sat { formula, solver, witness, json } => {
            let f = load_formula(&formula)?;
            let desugared = seqsl::expand_macros(&f).map_err(|e| e.to_string())?.desugar();
            ensure_pseqsl(&desugared).map_err(|e| e.to_string())?;
            let verdict = decide_sat(&f, &solver.decide_config()).map_err(|e| e.to_string())?;
            match &verdict {
                SatVerdict::Sat(model) => {
                    if let Some(path) = &witness {
                        write_witness(path, model)?;
                    }
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "verdict": "sat",
                                "witness": serde_json::from_str::<serde_json::Value>(&print_model(model)).unwrap(),
                            })
                        );
                    } else {
                        println!("Sat");
                        println!("{}", print_model(model));
                    }
                    Ok(EXIT_TRUE)
                }
                SatVerdict::Unsat => {
                    report_plain(json, "unsat", "Unsat");
                    Ok(EXIT_FALSE)
                }
                SatVerdict::Unknown(r) => {
                    report_unknown(json, r);
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::Valid { formula, solver, witness, json } => {
            let f = load_formula(&formula)?;
            let verdict = decide_pi1_validity(&f, &solver.decide_config()).map_err(|e| e.to_string())?;
            match &verdict {
                ValidityVerdict::Valid => {
                    report_plain(json, "valid", "Valid");
                    Ok(EXIT_TRUE)
                }
                ValidityVerdict::Invalid(model) => {
                    if let Some(path) = &witness {
                        write_witness(path, model)?;
                    }
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "verdict": "invalid",
                                "countermodel": serde_json::from_str::<serde_json::Value>(&print_model(model)).unwrap(),
                            })
                        );
                    } else {
                        println!("Invalid");
                        println!("{}", print_model(model));
                    }
                    Ok(EXIT_FALSE)
                }
                ValidityVerdict::Unknown(r) => {
                    report_unknown(json, r);
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        Command::We { sub } => run_we(sub),
        Command::Minsky { sub } => run_minsky(sub),
    }
}

fn run_we(sub: WeCommand) -> Result<u8, String> {
    match sub {
        WeCommand::Solve { file, solver, json } => {
            let f = parse_word_formula(read(&file)?.trim()).map_err(|e| e.to_string())?;
            let alphabet = Alphabet::for_formula(&f);
            let cfg = SolveConfig { max_len: solver.max_len, max_nodes: solver.max_nodes };
            match solve(&f, &alphabet, &cfg) {
                SolverVerdict::Sat(subst) => {
                    if json {
                        let map: serde_json::Map<String, serde_json::Value> = subst
                            .0
                            .iter()
                            .map(|(k, v)| {
                                (
                                    format!("@{}", k.0),
                                    serde_json::Value::Array(
                                        v.iter().map(|x| serde_json::Value::String(x.to_string())).collect(),
                                    ),
                                )
                            })
                            .collect();
                        println!("{}", serde_json::json!({"verdict": "sat", "witness": map}));
                    } else {
                        println!("Sat");
                        println!("{subst}");
                    }
                    Ok(EXIT_TRUE)
                }
                SolverVerdict::Unsat => {
                    report_plain(json, "unsat", "Unsat");
                    Ok(EXIT_FALSE)
                }
                SolverVerdict::Unknown(b) => {
                    report_unknown(json, &format!("bound {b} exhausted"));
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        WeCommand::Transform { file, json } => {
            let f = parse_word_formula(read(&file)?.trim()).map_err(|e| e.to_string())?;
            let alphabet = Alphabet::for_formula(&f);
            let se = to_single_equation(&f, &alphabet).map_err(|e| e.to_string())?;
            let prefix: Vec<String> = se.prefix.iter().map(|v| format!("@{}", v.0)).collect();
            let lhs = seqsl::wordeq::display_word_term(&se.lhs);
            let rhs = seqsl::wordeq::display_word_term(&se.rhs);
            if json {
                println!(
                    "{}",
                    serde_json::json!({"prefix": prefix, "lhs": lhs, "rhs": rhs})
                );
            } else {
                if !prefix.is_empty() {
                    println!("exists {}", prefix.join(" "));
                }
                println!("{lhs} == {rhs}");
            }
            Ok(EXIT_TRUE)
        }
    }
}

fn run_minsky(sub: MinskyCommand) -> Result<u8, String> {
    match sub {
        MinskyCommand::Run { machine, max_steps, json } => {
            let m = MinskyMachine::parse(&read(&machine)?).map_err(|e| e.to_string())?;
            match simulate(&m, max_steps).map_err(|e| e.to_string())? {
                SimOutcome::Halted(run) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "halted": true,
                                "steps": run.states.len() - 1,
                                "states": run.states.iter().map(|s| vec![s.instr as u64, s.c1, s.c2]).collect::<Vec<_>>(),
                            })
                        );
                    } else {
                        print!("{run}");
                        println!("halted after {} step(s)", run.states.len() - 1);
                    }
                    Ok(EXIT_TRUE)
                }
                SimOutcome::NotHaltedWithin { max_steps, partial } => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({"halted": false, "max_steps": max_steps})
                        );
                    } else {
                        print!("{partial}");
                        println!("not halted within {max_steps} step(s)");
                    }
                    Ok(EXIT_UNKNOWN)
                }
            }
        }
        MinskyCommand::Encode { machine, classify: want_class, regrouped, weak_scope, out, json } => {
            let m = MinskyMachine::parse(&read(&machine)?).map_err(|e| e.to_string())?;
            let opts = EncodeOptions { regrouped, weak_transition_scope: weak_scope };
            let f = encode_with(&m, &opts).map_err(|e| e.to_string())?;
            let text = f.to_string();
            let shape = if want_class {
                Some(classify(&f).map_err(|e| e.to_string())?)
            } else {
                None
            };
            if let Some(path) = &out {
                fs::write(path, text.clone() + "\n")
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "formula": text,
                        "shape": shape.as_ref().map(|c| c.shape.to_string()),
                    })
                );
            } else {
                if out.is_none() {
                    println!("{text}");
                }
                if let Some(c) = shape {
                    println!(
                        "shape: {} (program blocks {}, sequence blocks {})",
                        c.shape, c.prenex_prog_blocks, c.prenex_seq_blocks
                    );
                }
            }
            Ok(EXIT_TRUE)
        }
        MinskyCommand::Validate { machine, max_steps, json } => {
            let m = MinskyMachine::parse(&read(&machine)?).map_err(|e| e.to_string())?;
            match seqsl::minsky::validate_machine(&m, max_steps).map_err(|e| e.to_string())? {
                Validation::Validated { states } => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({"verdict": "validated", "states": states})
                        );
                    } else {
                        println!("Validated: run model with {states} state(s) satisfies the encoding");
                    }
                    Ok(EXIT_TRUE)
                }
                Validation::NotHalted { max_steps } => {
                    report_unknown(json, &format!("not halted within {max_steps} step(s)"));
                    Ok(EXIT_UNKNOWN)
                }
                Validation::EncodingRejected { states } => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({"verdict": "rejected", "states": states})
                        );
                    } else {
                        println!("Rejected: run model with {states} state(s) falsifies the encoding");
                    }
                    Ok(EXIT_FALSE)
                }
            }
        }
    }
}

fn verdict_exit(v: &Verdict3) -> u8 {
    match v {
        Verdict3::True => EXIT_TRUE,
        Verdict3::False => EXIT_FALSE,
        Verdict3::Unknown(_) => EXIT_UNKNOWN,
    }
}

fn verdict_name(v: &Verdict3) -> &'static str {
    match v {
        Verdict3::True => "true",
        Verdict3::False => "false",
        Verdict3::Unknown(_) => "unknown",
    }
}

fn unknown_reason(v: &Verdict3) -> Option<String> {
    match v {
        Verdict3::Unknown(r) => Some(r.clone()),
        _ => None,
    }
}

fn report_plain(json: bool, key: &str, plain: &str) {
    if json {
        println!("{}", serde_json::json!({ "verdict": key }));
    } else {
        println!("{plain}");
    }
}

fn report_unknown(json: bool, reason: &str) {
    if json {
        println!("{}", serde_json::json!({"verdict": "unknown", "reason": reason}));
    } else {
        println!("Unknown ({reason})");
    }
}
