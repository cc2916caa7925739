use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cjl::doc::ModelDoc;
use cjl::falsifier::find_countermodel;
use cjl::fixtures::run_corpus;
use cjl::hilbert::{check_derivation, internalize, Derivation};
use cjl::kripke::{check_conditions, ConstantSpecification, KripkeModel, VariantProfile};
use cjl::routley::{check_jrc_conditions, RoutleyModel};
use cjl::syntax::{atoms, closure, subformulas};
use cjl::tableau::{prove, Budget, ProofResult};
use cjl::{parse_formula, Dialect, Formula};

#[derive(Parser)]
#[command(name = "cjl", version, about = "Conditional justification logic toolkit")]
struct Cli {
    /// Formula dialect; model commands default to the model's own dialect.
    #[arg(long, global = true)]
    dialect: Option<Dialect>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print its canonical form.
    Parse { formula: String },
    /// Evaluate a formula at a state, or print its truth set.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        state: Option<String>,
        formula: String,
    },
    /// Check the frame conditions of a model over the universe of the given queries.
    CheckModel {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cs: Option<PathBuf>,
        queries: Vec<String>,
    },
    /// Run the JRC tableau on a sequent `A ; B |- C` (or a bare goal).
    Prove {
        sequent: String,
        #[arg(long, default_value_t = Budget::default().max_fresh_labels)]
        budget_labels: u32,
        #[arg(long, default_value_t = Budget::default().max_steps)]
        budget_steps: usize,
    },
    /// Search for a finite countermodel to a sequent.
    Falsify {
        sequent: String,
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
    /// Check a Hilbert derivation file.
    CheckProof {
        file: PathBuf,
        #[arg(long)]
        cs: Option<PathBuf>,
    },
    /// Internalize a premise-free LPCint derivation into a justification term.
    Internalize { file: PathBuf },
    /// Run the shipped fixture corpus.
    Corpus,
}

const EXIT_INPUT: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_in(text: &str, d: Dialect) -> Result<Formula, String> {
    parse_formula(text, d).map_err(|e| format!("`{text}`: {e}"))
}

fn parse_sequent(text: &str, d: Dialect) -> Result<(Vec<Formula>, Formula), String> {
    let (lhs, goal) = match text.split_once("|-") {
        Some((l, g)) => (l, g),
        None => ("", text),
    };
    let premises = lhs
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_in(s, d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((premises, parse_in(goal.trim(), d)?))
}

fn load_cs(path: Option<&PathBuf>, d: Dialect) -> Result<ConstantSpecification, String> {
    match path {
        None => Ok(ConstantSpecification::default()),
        Some(p) => ConstantSpecification::from_json(&read(p)?, d).map_err(|e| e.to_string()),
    }
}

enum Loaded {
    Kripke(KripkeModel),
    Routley(RoutleyModel),
}

fn load_model(path: &Path, want: Option<Dialect>) -> Result<(Loaded, Dialect), String> {
    let doc = ModelDoc::from_json(&read(path)?).map_err(|e| e.to_string())?;
    let d = doc.dialect;
    if let Some(w) = want {
        if w.is_jrc() != d.is_jrc() {
            return Err(format!("model has dialect {d}, which does not match --dialect {w}"));
        }
    }
    let m = if d.is_jrc() {
        Loaded::Routley(RoutleyModel::from_doc(&doc).map_err(|e| e.to_string())?)
    } else {
        Loaded::Kripke(KripkeModel::from_doc(&doc).map_err(|e| e.to_string())?)
    };
    Ok((m, d))
}

fn emit(fmt: Format, text: String, value: Value) {
    let out = match fmt {
        Format::Text => text,
        Format::Json => serde_json::to_string_pretty(&value).expect("json output"),
    };
    let mut stdout = io::stdout().lock();
    if let Err(e) = writeln!(stdout, "{out}") {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
        }
    }
}

fn run(cli: &Cli) -> Result<u8, String> {
    let fmt = cli.format;
    match &cli.command {
        Command::Parse { formula } => {
            let d = cli.dialect.unwrap_or(Dialect::LPCplus);
            let f = parse_in(formula, d)?;
            let subs: Vec<String> = subformulas(&f).iter().map(|s| s.to_string()).collect();
            emit(
                fmt,
                f.to_string(),
                json!({ "dialect": d, "formula": f.to_string(), "atoms": atoms(&f), "subformulas": subs }),
            );
            Ok(0)
        }
        Command::Eval { model, state, formula } => {
            let (m, d) = load_model(model, cli.dialect)?;
            let f = parse_in(formula, d)?;
            match state {
                Some(s) => {
                    let v = match &m {
                        Loaded::Kripke(k) => k.eval(s, &f, d),
                        Loaded::Routley(r) => r.eval(s, &f),
                    }
                    .map_err(|e| e.to_string())?;
                    emit(fmt, v.to_string(), json!({ "formula": f.to_string(), "state": s, "value": v }));
                }
                None => {
                    let ts = match &m {
                        Loaded::Kripke(k) => k.truthset(&f, d),
                        Loaded::Routley(r) => r.truthset(&f),
                    }
                    .map_err(|e| e.to_string())?;
                    let list: Vec<&String> = ts.iter().collect();
                    let text = format!("{{{}}}", ts.iter().cloned().collect::<Vec<_>>().join(", "));
                    emit(fmt, text, json!({ "formula": f.to_string(), "truthset": list }));
                }
            }
            Ok(0)
        }
        Command::CheckModel { model, cs, queries } => {
            let (m, d) = load_model(model, cli.dialect)?;
            let profile = cli.dialect.unwrap_or(d);
            let qs = queries.iter().map(|q| parse_in(q, d)).collect::<Result<Vec<_>, _>>()?;
            match &m {
                Loaded::Kripke(k) => {
                    let cs = load_cs(cs.as_ref(), d)?;
                    let rep =
                        check_conditions(k, &VariantProfile::for_dialect(profile), &k.default_universe(&qs), &cs);
                    let value = serde_json::to_value(&rep).expect("report serializes");
                    emit(fmt, rep.to_string().trim_end().to_string(), value);
                }
                Loaded::Routley(r) => {
                    let rep = check_jrc_conditions(r, &closure(qs.iter()));
                    let value = serde_json::to_value(&rep).expect("report serializes");
                    emit(fmt, rep.to_string().trim_end().to_string(), value);
                }
            }
            Ok(0)
        }
        Command::Prove { sequent, budget_labels, budget_steps } => {
            let d = cli.dialect.unwrap_or(Dialect::JRC);
            if !d.is_jrc() {
                return Err(format!("the tableau works on JRC sequents, not {d}"));
            }
            let (ps, g) = parse_sequent(sequent, d)?;
            let budget = Budget { max_fresh_labels: *budget_labels, max_steps: *budget_steps };
            let r = prove(&ps, &g, budget).map_err(|e| e.to_string())?;
            let verdict = r.verdict();
            let tree = r.tree().map(|t| t.to_string());
            let (text, value) = match &r {
                ProofResult::Closed(_) => (
                    format!("{verdict}\n{}", tree.clone().unwrap_or_default()),
                    json!({ "verdict": verdict, "tree": tree }),
                ),
                ProofResult::Open { model, root, .. } => {
                    let doc = model.to_doc();
                    (
                        format!("{verdict}\n{}\nroot state: {root}\n{}", tree.clone().unwrap_or_default(), doc.to_json()),
                        json!({ "verdict": verdict, "tree": tree, "root": root, "model": doc }),
                    )
                }
                ProofResult::Exhausted(rep) => (
                    format!("{verdict}: {} after {} steps", rep.reason, rep.steps),
                    json!({ "verdict": verdict, "report": rep }),
                ),
            };
            emit(fmt, text.trim_end().to_string(), value);
            Ok(if matches!(r, ProofResult::Exhausted(_)) { EXIT_EXHAUSTED } else { 0 })
        }
        Command::Falsify { sequent, bound } => {
            let d = cli.dialect.unwrap_or(Dialect::JRC);
            if *bound == 0 {
                return Err("bound must be at least 1".into());
            }
            let (ps, g) = parse_sequent(sequent, d)?;
            match find_countermodel(&ps, &g, d, *bound) {
                Some(cm) => {
                    let json_text = cm.to_json();
                    let doc: Value = serde_json::from_str(&json_text).expect("model json");
                    emit(
                        fmt,
                        format!("COUNTERMODEL ({} states, refuted at w0)\n{json_text}", cm.state_count()),
                        json!({ "found": true, "state": "w0", "model": doc }),
                    );
                }
                None => emit(
                    fmt,
                    format!("NONE up to {bound} states"),
                    json!({ "found": false, "bound": bound }),
                ),
            }
            Ok(0)
        }
        Command::CheckProof { file, cs } => {
            let d = cli.dialect.unwrap_or(Dialect::LPCplus);
            let der = Derivation::parse(&read(file)?, d).map_err(|e| e.to_string())?;
            let cs = load_cs(cs.as_ref(), d)?;
            match check_derivation(&der, d, &cs) {
                Ok(rep) => {
                    let prem: Vec<String> = rep.premises.iter().map(|p| p.to_string()).collect();
                    let concl = rep.conclusion.as_ref().map(|c| c.to_string());
                    let mut text = format!("OK {}", concl.clone().unwrap_or_default());
                    if !prem.is_empty() {
                        text.push_str(&format!("\npremises: {}", prem.join("; ")));
                    }
                    emit(fmt, text, json!({ "ok": true, "conclusion": concl, "premises": prem }));
                }
                Err(e) => emit(fmt, format!("REJECTED {e}"), json!({ "ok": false, "error": e.to_string() })),
            }
            Ok(0)
        }
        Command::Internalize { file } => {
            let d = Dialect::LPCint;
            if cli.dialect.is_some_and(|x| x != d) {
                return Err("internalization works in LPCint only".into());
            }
            let der = Derivation::parse(&read(file)?, d).map_err(|e| e.to_string())?;
            let (t, out) =
                internalize(&der, &ConstantSpecification::AxiomaticallyAppropriate).map_err(|e| e.to_string())?;
            emit(
                fmt,
                format!("term: {t}\n{}", out.to_text().trim_end()),
                json!({ "term": t.to_string(), "derivation": out.to_text() }),
            );
            Ok(0)
        }
        Command::Corpus => {
            let outcomes = run_corpus().map_err(|e| e.to_string())?;
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            let mut text: Vec<String> = outcomes.iter().map(|o| o.to_string()).collect();
            text.push(format!("{} expectations, {failed} failed", outcomes.len()));
            emit(fmt, text.join("\n"), json!({ "outcomes": outcomes, "failed": failed }));
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}
