//! Command-line front end for the decision engine: provability verdicts,
//! worm calculus, clausal normal forms, reductions, and finite-model
//! countermodel search.
//!
//! Exit codes: 0 for provable/valid/ok, 1 for not provable/refuted, 2 for
//! usage errors, parse errors, or any module error. With `--json`, every
//! result is a single JSON object on stdout. Verbs taking one formula read
//! one formula per line from stdin when the positional argument is absent.

use std::io::{self, BufRead, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use glp_core::{
    as_worm, countermodel_search, decide, formula_wnf, hat, normalize, parse, print,
    reduction_target, reduction_target_m, symbol_count, worm_compare, worm_conj, worm_formula,
    Formula, JModel, Modal, NormalWorm, Order, SearchOutcome, SignatureMap, WormDnf,
};

#[derive(Parser)]
#[command(
    name = "glp",
    version,
    about = "Decide and transform closed formulas of polymodal provability logic"
)]
struct Cli {
    /// Modal order: omega, finite:N, int, or lexpair:<o1>,<o2>
    #[arg(
        short = 'o',
        long = "order",
        global = true,
        env = "GLP_ORDER",
        default_value = "omega"
    )]
    order: String,

    /// Emit results as JSON objects, one per result
    #[arg(long, global = true)]
    json: bool,

    /// Refuse formulas with more than this many symbols
    #[arg(long, global = true, default_value_t = 200)]
    guard: usize,

    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Decide provability of a closed formula
    Decide { formula: Option<String> },
    /// Print the normal form of a worm
    Nf { worm: Option<String> },
    /// Compare two worms in the consistency-strength order at a level
    Compare {
        /// Fragment level for the comparison (on the natural scale)
        #[arg(long, default_value_t = 0)]
        alpha: u64,
        a: String,
        b: String,
    },
    /// Conjoin two worms into a single equivalent worm
    Conj { a: String, b: String },
    /// Print the Boolean combination of worms for a closed formula
    Bcw { formula: Option<String> },
    /// Print the clausal normal form, one clause per line
    Wnf { formula: Option<String> },
    /// Relabel onto the naturals and print the reduction target
    Reduce {
        formula: Option<String>,
        /// Use the two-sided bridge conjunction instead of the ordered one
        #[arg(long)]
        mplus: bool,
    },
    /// Search for a finite countermodel to a closed formula
    Countermodel {
        formula: Option<String>,
        /// Largest number of worlds to try (hard cap 5)
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
    },
    /// Check a formula against a model file
    #[command(name = "check-model")]
    CheckModel { file: PathBuf, formula: String },
}

/// One processed input: what to print and this input's exit code.
struct Outcome {
    text: String,
    json: Value,
    code: u8,
}

impl Outcome {
    fn ok(text: impl Into<String>, json: Value) -> Outcome {
        Outcome {
            text: text.into(),
            json,
            code: 0,
        }
    }

    fn refuted(text: impl Into<String>, json: Value) -> Outcome {
        Outcome {
            text: text.into(),
            json,
            code: 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let order = match Order::parse_spec(&cli.order) {
        Ok(order) => order,
        Err(e) => return usage_error(&format!("error[order]: {e}")),
    };
    match run(&cli, &order) {
        Ok(code) => ExitCode::from(code),
        Err(message) => usage_error(&message),
    }
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("{message}");
    ExitCode::from(2)
}

fn run(cli: &Cli, order: &Order) -> Result<u8, String> {
    match &cli.verb {
        Verb::Decide { formula } => for_each_input(cli, formula, |text| decide_one(cli, order, text)),
        Verb::Nf { worm } => for_each_input(cli, worm, |text| nf_one(order, text)),
        Verb::Compare { alpha, a, b } => {
            let outcome = compare_worms(order, *alpha, a, b)?;
            Ok(emit(cli, outcome))
        }
        Verb::Conj { a, b } => {
            let outcome = conj_worms(order, a, b)?;
            Ok(emit(cli, outcome))
        }
        Verb::Bcw { formula } => for_each_input(cli, formula, |text| bcw_one(cli, order, text)),
        Verb::Wnf { formula } => for_each_input(cli, formula, |text| wnf_one(cli, order, text)),
        Verb::Reduce { formula, mplus } => {
            for_each_input(cli, formula, |text| reduce_one(cli, order, text, *mplus))
        }
        Verb::Countermodel {
            formula,
            max_worlds,
        } => for_each_input(cli, formula, |text| {
            countermodel_one(cli, order, text, *max_worlds)
        }),
        Verb::CheckModel { file, formula } => {
            let outcome = check_model(cli, order, file, formula)?;
            Ok(emit(cli, outcome))
        }
    }
}

/// Run a handler on the positional argument, or on every nonempty stdin
/// line when the argument is absent. The exit code is the worst one seen.
fn for_each_input(
    cli: &Cli,
    arg: &Option<String>,
    mut handle: impl FnMut(&str) -> Result<Outcome, String>,
) -> Result<u8, String> {
    if let Some(text) = arg {
        let outcome = handle(text)?;
        return Ok(emit(cli, outcome));
    }
    let mut worst = 0u8;
    let stdin = std::io::stdin();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| format!("error[io]: {e}"))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match handle(line) {
            Ok(outcome) => worst = worst.max(emit(cli, outcome)),
            Err(message) => {
                eprintln!("{message}");
                worst = 2;
            }
        }
    }
    Ok(worst)
}

fn emit(cli: &Cli, outcome: Outcome) -> u8 {
    let line = if cli.json {
        outcome.json.to_string()
    } else {
        outcome.text
    };
    // A closed pipe (e.g. piping into `head`) ends the program quietly
    // instead of panicking mid-print.
    if writeln!(io::stdout(), "{line}").is_err() {
        std::process::exit(outcome.code.into());
    }
    outcome.code
}

fn parse_formula(cli: &Cli, order: &Order, text: &str) -> Result<Formula, String> {
    let f = parse(text, order).map_err(|e| format!("error[syntax]: {e}"))?;
    let n = symbol_count(&f);
    if n > cli.guard {
        return Err(format!(
            "error[guard]: formula has {n} symbols, the guard allows {}",
            cli.guard
        ));
    }
    Ok(f)
}

fn decide_one(cli: &Cli, order: &Order, text: &str) -> Result<Outcome, String> {
    let f = parse_formula(cli, order, text)?;
    let verdict = decide(&f, order).map_err(|e| format!("error[closed]: {e}"))?;
    Ok(if verdict.provable {
        Outcome::ok("provable", json!({ "provable": true }))
    } else {
        Outcome::refuted(
            "not provable",
            json!({ "provable": false, "witness": verdict.witness }),
        )
    })
}

// -- Worm arguments over arbitrary orders ------------------------------------
//
// Worm verbs accept either the formula grammar (`<1><0>T`) or, when the
// argument is all digits, the compact form with one entry per digit
// (`10`). Tokens that are not natural numbers are relabeled onto the
// naturals first and the result is relabeled back for display.

fn parse_worm_arg(order: &Order, text: &str) -> Result<Formula, String> {
    let t = text.trim();
    if !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()) {
        let modals: Result<Vec<Modal>, _> =
            t.chars().map(|c| order.modal(&c.to_string())).collect();
        let modals = modals.map_err(|e| format!("error[order]: {e}"))?;
        return Ok(worm_formula(&modals));
    }
    let f = parse(t, order).map_err(|e| format!("error[syntax]: {e}"))?;
    as_worm(&f).map_err(|e| format!("error[syntax]: {e}"))?;
    Ok(f)
}

/// Natural entries of one or two worm arguments, with the map used for
/// relabeling (identity and absent for natural orders). Joint relabeling
/// keeps the two worms on one scale.
fn worm_entries(
    order: &Order,
    args: &[&Formula],
) -> Result<(Vec<Vec<u64>>, Option<SignatureMap>), String> {
    match order {
        Order::Naturals | Order::Finite(_) => {
            let mut out = Vec::new();
            for f in args {
                let worm = as_worm(f).expect("checked by parse_worm_arg");
                let entries: Result<Vec<u64>, _> =
                    worm.iter().map(|m| m.token.parse::<u64>()).collect();
                out.push(entries.map_err(|_| {
                    "error[order]: natural-order worms need natural tokens".to_string()
                })?);
            }
            Ok((out, None))
        }
        _ => {
            let combined = args
                .iter()
                .skip(1)
                .fold((*args[0]).clone(), |acc, f| Formula::and(acc, (*f).clone()));
            let hatted = hat(&combined, order).map_err(|e| format!("error[reduction]: {e}"))?;
            let mut parts = Vec::new();
            let mut rest = &hatted.formula;
            for _ in 1..args.len() {
                match rest {
                    Formula::And(a, b) => {
                        parts.push(a.as_ref().clone());
                        rest = b;
                    }
                    _ => unreachable!("joint relabeling preserves the conjunction shape"),
                }
            }
            parts.push(rest.clone());
            let mut out = Vec::new();
            for f in parts {
                let worm = as_worm(&f).expect("relabeling preserves worm shape");
                out.push(
                    worm.iter()
                        .map(|m| m.token.parse::<u64>().expect("hatted tokens are indices"))
                        .collect(),
                );
            }
            Ok((out, Some(hatted.map)))
        }
    }
}

/// Print a natural-entry worm back in the argument order's tokens.
fn show_worm(entries: &[u64], map: &Option<SignatureMap>) -> Result<String, String> {
    let modals: Result<Vec<Modal>, String> = entries
        .iter()
        .map(|&e| match map {
            None => Ok(Modal::new(e.to_string(), Order::Naturals.name())),
            Some(map) => map
                .modal_at(e as usize)
                .cloned()
                .ok_or_else(|| format!("error[order]: index {e} is outside the signature")),
        })
        .collect();
    Ok(print(&worm_formula(&modals?)))
}

fn nf_one(order: &Order, text: &str) -> Result<Outcome, String> {
    let f = parse_worm_arg(order, text)?;
    let (entries, map) = worm_entries(order, &[&f])?;
    let nf = normalize(&entries[0]);
    let shown = show_worm(nf.as_slice(), &map)?;
    Ok(Outcome::ok(shown.clone(), json!({ "worm": shown })))
}

fn compare_worms(order: &Order, alpha: u64, a: &str, b: &str) -> Result<Outcome, String> {
    let fa = parse_worm_arg(order, a)?;
    let fb = parse_worm_arg(order, b)?;
    let (entries, _) = worm_entries(order, &[&fa, &fb])?;
    let na = normalize(&entries[0]);
    let nb = normalize(&entries[1]);
    let ordering = worm_compare(alpha, &na, &nb).map_err(|e| format!("error[worm]: {e}"))?;
    let word = match ordering {
        std::cmp::Ordering::Less => "less",
        std::cmp::Ordering::Equal => "equal",
        std::cmp::Ordering::Greater => "greater",
    };
    Ok(Outcome::ok(word, json!({ "ordering": word })))
}

fn conj_worms(order: &Order, a: &str, b: &str) -> Result<Outcome, String> {
    let fa = parse_worm_arg(order, a)?;
    let fb = parse_worm_arg(order, b)?;
    let (entries, map) = worm_entries(order, &[&fa, &fb])?;
    let c = worm_conj(&entries[0], &entries[1]);
    let shown = show_worm(&c, &map)?;
    Ok(Outcome::ok(shown.clone(), json!({ "worm": shown })))
}

// -- Formula pipelines --------------------------------------------------------

/// Natural-token view of a formula: verbatim for natural orders, relabeled
/// otherwise.
fn naturalized(order: &Order, f: &Formula) -> Result<Formula, String> {
    match order {
        Order::Naturals | Order::Finite(_) => Ok(f.clone()),
        _ => Ok(hat(f, order)
            .map_err(|e| format!("error[reduction]: {e}"))?
            .formula),
    }
}

fn bcw_one(cli: &Cli, order: &Order, text: &str) -> Result<Outcome, String> {
    let f = parse_formula(cli, order, text)?;
    let nat = naturalized(order, &f)?;
    let d: WormDnf = glp_core::bcw(&nat).map_err(|e| format!("error[closed]: {e}"))?;
    let shown = print(&d.to_formula());
    let disjuncts: Vec<Value> = d
        .disjuncts
        .iter()
        .map(|disj| {
            json!({
                "positives": disj.positives,
                "negatives": disj.negatives,
            })
        })
        .collect();
    Ok(Outcome::ok(shown, json!({ "disjuncts": disjuncts })))
}

fn wnf_one(cli: &Cli, order: &Order, text: &str) -> Result<Outcome, String> {
    let f = parse_formula(cli, order, text)?;
    let nat = naturalized(order, &f)?;
    let clauses = formula_wnf(&nat).map_err(|e| format!("error[closed]: {e}"))?;
    let lines: Vec<String> = clauses.iter().map(|c| print(&c.to_formula())).collect();
    let entries: Vec<Value> = clauses
        .iter()
        .map(|c| {
            json!({
                "antecedent": c.antecedent.as_slice(),
                "succedents": c.succedents.iter().map(NormalWorm::as_slice).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(Outcome::ok(lines.join("\n"), json!({ "clauses": entries })))
}

fn reduce_one(cli: &Cli, order: &Order, text: &str, mplus: bool) -> Result<Outcome, String> {
    let f = parse_formula(cli, order, text)?;
    let hatted = hat(&f, order).map_err(|e| format!("error[reduction]: {e}"))?;
    let target = if mplus {
        reduction_target_m(&f, order)
    } else {
        reduction_target(&f, order)
    }
    .map_err(|e| format!("error[reduction]: {e}"))?;
    let map: Vec<String> = hatted.map.iter().map(|m| m.token.clone()).collect();
    let map_text = map
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{i}={t}"))
        .collect::<Vec<_>>()
        .join(" ");
    let text = format!(
        "hat: {}\nmap: {}\ntarget: {}",
        print(&hatted.formula),
        map_text,
        print(&target.formula)
    );
    Ok(Outcome::ok(
        text,
        json!({
            "hat": print(&hatted.formula),
            "map": map,
            "target": print(&target.formula),
        }),
    ))
}

fn countermodel_one(
    cli: &Cli,
    order: &Order,
    text: &str,
    max_worlds: usize,
) -> Result<Outcome, String> {
    let f = parse_formula(cli, order, text)?;
    let outcome =
        countermodel_search(&f, order, max_worlds).map_err(|e| format!("error[kripke]: {e}"))?;
    Ok(match outcome {
        SearchOutcome::Found { model, world } => Outcome::refuted(
            format!("{}\nrefuting world: {world}", model.to_json()),
            json!({ "found": true, "world": world, "model": model.to_json() }),
        ),
        SearchOutcome::NotFound => Outcome::ok(
            format!("no countermodel within {max_worlds} worlds"),
            json!({ "found": false }),
        ),
    })
}

fn check_model(cli: &Cli, order: &Order, file: &PathBuf, text: &str) -> Result<Outcome, String> {
    let mut contents = String::new();
    std::fs::File::open(file)
        .and_then(|mut h| h.read_to_string(&mut contents))
        .map_err(|e| format!("error[io]: {}: {e}", file.display()))?;
    let model = JModel::from_json_str(&contents).map_err(|e| format!("error[kripke]: {e}"))?;
    model
        .validate_frame()
        .map_err(|v| format!("error[kripke]: frame violation: {v}"))?;
    let f = parse_formula(cli, order, text)?;
    let result = model
        .is_valid_on(&f)
        .map_err(|e| format!("error[kripke]: {e}"))?;
    Ok(if result.valid {
        Outcome::ok("valid", json!({ "valid": true }))
    } else {
        let world = result.refuting_world.unwrap_or_default();
        Outcome::refuted(
            format!("refuted at {world}"),
            json!({ "valid": false, "world": world }),
        )
    })
}
