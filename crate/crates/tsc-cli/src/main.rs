//! Command-line front end for the `tsc` library: normalization,
//! derivability decisions with optional proof witnesses, equivalence and
//! fragment queries, and ordinal expression evaluation, each with a text
//! and a JSON rendering.

mod ordexpr;

use clap::error::ErrorKind;
use clap::{ArgAction, Parser, Subcommand};
use serde_json::json;
use std::cmp::Ordering;
use std::io::BufRead;
use std::process::ExitCode;
use tsc::calculus::Trace;
use tsc::decision::Reason;
use tsc::normalform::mnf_to_inf;
use tsc::{
    check_derivation, decide, derive_witness, equiv_level, equivalent, normalize,
    normalize_traced, pi_fragment, Derivation, Formula, Sequent,
};

/// Exit status: 0 affirmative/neutral, 1 negative verdict, 2 input error.
const NEGATIVE: u8 = 1;
const INPUT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "tsc",
    version,
    about = "Normal forms, derivability, and ordinal arithmetic for the Turing–Schmerl calculus",
    arg_required_else_help = true
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    json: bool,

    /// Read invocations from stdin, one per line (quoting as in a shell),
    /// and run them in order. The exit status is the worst line status.
    #[arg(long)]
    batch: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a formula into its monomial normal form.
    Normalize {
        /// The formula, e.g. "<0^1><1^1>(<0^w^w*2>T /\ <2^1>T)".
        formula: String,
        /// Also print the increasing normal form (worm shape).
        #[arg(long = "inf-form")]
        inf_form: bool,
        /// Also print the sound rewrite steps leading to the normal form.
        #[arg(long)]
        trace: bool,
    },
    /// Rewrite a formula into its increasing normal form.
    Inf {
        /// The formula to convert.
        formula: String,
    },
    /// Decide whether a sequent "PHI |- PSI" is derivable.
    Decide {
        /// The sequent, with `|-` as the turnstile.
        sequent: String,
        /// Also print a checked derivation when the verdict is yes.
        #[arg(long)]
        witness: bool,
    },
    /// Test whether two formulas are equivalent, fully or up to a level.
    Equiv {
        left: String,
        right: String,
        /// Compare only consequences with bases at most this level.
        #[arg(long)]
        level: Option<u32>,
    },
    /// Project a formula onto the fragment visible at a level.
    Fragment {
        formula: String,
        /// The level of the fragment.
        #[arg(long)]
        level: u32,
    },
    /// Evaluate an ordinal expression: literals over w, +, *, ^,
    /// hyper-exponentials e^n(...), and top-level cmp(a, b).
    Ord {
        expr: String,
    },
}

/// An input failure with its byte position, rendered as a column.
struct InputError {
    message: String,
    column: Option<usize>,
}

impl InputError {
    fn plain(message: impl Into<String>) -> InputError {
        InputError {
            message: message.into(),
            column: None,
        }
    }
}

impl From<tsc::ordinal::SyntaxError> for InputError {
    fn from(e: tsc::ordinal::SyntaxError) -> InputError {
        InputError {
            message: e.message,
            column: Some(e.pos + 1),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.batch {
        if cli.command.is_some() {
            report_error(
                cli.json,
                None,
                &InputError::plain("--batch takes its commands from stdin, not the command line"),
            );
            return ExitCode::from(INPUT_ERROR);
        }
        return run_batch(cli.json);
    }
    let Some(command) = cli.command else {
        // Unreachable behind arg_required_else_help, but stay safe.
        return ExitCode::from(INPUT_ERROR);
    };
    match run(&command, cli.json) {
        Ok(code) => ExitCode::from(code),
        Err(error) => {
            report_error(cli.json, None, &error);
            ExitCode::from(INPUT_ERROR)
        }
    }
}

fn run_batch(json: bool) -> ExitCode {
    let stdin = std::io::stdin();
    let mut worst = 0u8;
    for (index, line) in stdin.lock().lines().enumerate() {
        let number = index + 1;
        let line = match line {
            Ok(line) => line,
            Err(e) => {
                report_error(json, Some(number), &InputError::plain(format!("stdin: {e}")));
                worst = worst.max(INPUT_ERROR);
                break;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let code = run_batch_line(&line, json, number);
        worst = worst.max(code);
    }
    ExitCode::from(worst)
}

fn run_batch_line(line: &str, json: bool, number: usize) -> u8 {
    let Some(tokens) = shlex::split(line) else {
        report_error(
            json,
            Some(number),
            &InputError::plain("unbalanced quoting"),
        );
        return INPUT_ERROR;
    };
    let parsed = Cli::try_parse_from(std::iter::once("tsc".to_string()).chain(tokens));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) => {
            let message = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => e.to_string(),
                _ => e.render().to_string().lines().next().unwrap_or("").to_string(),
            };
            report_error(json, Some(number), &InputError::plain(message));
            return INPUT_ERROR;
        }
    };
    if cli.batch {
        report_error(
            json,
            Some(number),
            &InputError::plain("--batch cannot be nested"),
        );
        return INPUT_ERROR;
    }
    let Some(command) = cli.command else {
        report_error(json, Some(number), &InputError::plain("missing command"));
        return INPUT_ERROR;
    };
    match run(&command, json || cli.json) {
        Ok(code) => code,
        Err(error) => {
            report_error(json || cli.json, Some(number), &error);
            INPUT_ERROR
        }
    }
}

fn report_error(json: bool, line: Option<usize>, error: &InputError) {
    if json {
        println!(
            "{}",
            json!({
                "error": {
                    "message": error.message,
                    "line": line.unwrap_or(1),
                    "column": error.column,
                }
            })
        );
    } else {
        let place = match (line, error.column) {
            (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
            (Some(l), None) => format!(" at line {l}"),
            (None, Some(c)) => format!(" at line 1, column {c}"),
            (None, None) => String::new(),
        };
        eprintln!("error{place}: {}", error.message);
    }
}

fn run(command: &Command, json: bool) -> Result<u8, InputError> {
    match command {
        Command::Normalize {
            formula,
            inf_form,
            trace,
        } => {
            let f: Formula = formula.parse()?;
            let (psi, steps) = if *trace {
                let (psi, steps) = normalize_traced(&f);
                (psi, Some(steps))
            } else {
                (normalize(&f), None)
            };
            let worm = inf_form.then(|| mnf_to_inf(&psi));
            if json {
                println!(
                    "{}",
                    json!({
                        "command": "normalize",
                        "input": f,
                        "mnf": psi,
                        "inf": worm,
                        "trace": steps,
                    })
                );
            } else {
                println!("{psi}");
                if let Some(worm) = worm {
                    println!("{worm}");
                }
                if let Some(steps) = steps {
                    print_trace(&steps);
                }
            }
            Ok(0)
        }
        Command::Inf { formula } => {
            let f: Formula = formula.parse()?;
            let worm = tsc::normalize_to_inf(&f);
            if json {
                println!(
                    "{}",
                    json!({ "command": "inf", "input": f, "inf": worm })
                );
            } else {
                println!("{worm}");
            }
            Ok(0)
        }
        Command::Decide { sequent, witness } => {
            let s: Sequent = sequent.parse()?;
            let verdict = decide(&s.antecedent, &s.succedent);
            let derivation = if *witness && verdict.derivable {
                let d = derive_witness(&s.antecedent, &s.succedent)
                    .expect("decide said yes, so a witness exists");
                check_derivation(&d).expect("extracted witnesses pass the checker");
                Some(d)
            } else {
                None
            };
            if json {
                println!(
                    "{}",
                    json!({
                        "command": "decide",
                        "sequent": s,
                        "verdict": verdict,
                        "witness": derivation,
                    })
                );
            } else {
                println!("{}", if verdict.derivable { "yes" } else { "no" });
                print_reason(&verdict.reason);
                if let Some(d) = &derivation {
                    print_derivation(d, 1);
                }
            }
            Ok(if verdict.derivable { 0 } else { NEGATIVE })
        }
        Command::Equiv { left, right, level } => {
            let l: Formula = left.parse()?;
            let r: Formula = right.parse()?;
            let answer = match level {
                Some(n) => equiv_level(&l, &r, *n),
                None => equivalent(&l, &r),
            };
            if json {
                println!(
                    "{}",
                    json!({
                        "command": "equiv",
                        "left": l,
                        "right": r,
                        "level": level,
                        "equivalent": answer,
                    })
                );
            } else {
                println!("{answer}");
            }
            Ok(if answer { 0 } else { NEGATIVE })
        }
        Command::Fragment { formula, level } => {
            let f: Formula = formula.parse()?;
            let fragment = pi_fragment(&normalize(&f), *level);
            if json {
                println!(
                    "{}",
                    json!({
                        "command": "fragment",
                        "input": f,
                        "level": level,
                        "fragment": fragment,
                    })
                );
            } else {
                println!("{fragment}");
            }
            Ok(0)
        }
        Command::Ord { expr } => {
            match ordexpr::evaluate(expr).map_err(InputError::from)? {
                ordexpr::Evaluation::Value(value) => {
                    if json {
                        println!(
                            "{}",
                            json!({ "command": "ord", "expr": expr, "value": value })
                        );
                    } else {
                        println!("{value}");
                    }
                    Ok(0)
                }
                ordexpr::Evaluation::Comparison(left, ordering, right) => {
                    let symbol = match ordering {
                        Ordering::Less => "<",
                        Ordering::Equal => "=",
                        Ordering::Greater => ">",
                    };
                    if json {
                        println!(
                            "{}",
                            json!({
                                "command": "ord",
                                "expr": expr,
                                "comparison": symbol,
                                "left": left,
                                "right": right,
                            })
                        );
                    } else {
                        println!("{symbol}");
                    }
                    Ok(0)
                }
            }
        }
    }
}

fn print_reason(reason: &Reason) {
    match reason {
        Reason::Entailed { reports } => {
            for r in reports {
                println!(
                    "  base {}: {} <= {} (via antecedent base {})",
                    r.succedent_base, r.succedent_exponent, r.bound, r.matched_base
                );
            }
        }
        Reason::BaseOverflow {
            succedent_max_base,
            antecedent_max_base,
        } => match antecedent_max_base {
            Some(max) => println!(
                "  succedent base {succedent_max_base} exceeds every antecedent base (max {max})"
            ),
            None => println!(
                "  succedent base {succedent_max_base} but the antecedent is T, which proves only T"
            ),
        },
        Reason::BoundExceeded { report } => {
            println!(
                "  base {}: {} > {} (via antecedent base {})",
                report.succedent_base,
                report.succedent_exponent,
                report.bound,
                report.matched_base
            );
        }
    }
}

fn print_trace(trace: &Trace) {
    for (i, step) in trace.steps.iter().enumerate() {
        println!("  {}. [{}] {}  =>  {}", i + 1, step.kind, step.before, step.after);
    }
}

fn print_derivation(d: &Derivation, depth: usize) {
    println!("{}[{}] {}", "  ".repeat(depth), d.kind, d.conclusion);
    for premise in &d.premises {
        print_derivation(premise, depth + 1);
    }
}
