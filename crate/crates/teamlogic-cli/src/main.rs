use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use teamlogic::bisim::{k_types, state_bisim};
use teamlogic::decide::{entails, equivalent, Engine, Mode, Status, Verdict};
use teamlogic::hintikka::{chi_state, chi_world, nf_bsmli, nf_bsmlo, nf_ml, theta_state, Budget};
use teamlogic::kripke::{count_models, enumerate_models, random_model, random_state, Model, State};
use teamlogic::proofcheck::{check_proof, Proof};
use teamlogic::teameval::judge;
use teamlogic::{parse, Formula, Tier};

#[derive(Parser)]
#[command(name = "teamlogic", version, about = "Bilateral state-based modal logic toolkit")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Apply pragmatic enrichment to every formula argument (classical input only).
    #[arg(long, global = true)]
    enrich: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and pretty-print a formula.
    Parse { formula: String },
    /// Support (or anti-support) of a formula at a state.
    Eval {
        model: PathBuf,
        /// Named state, world name, `{w1,w2}`, or `s=` followed by any of these.
        state: String,
        formula: String,
        #[arg(long)]
        anti: bool,
    },
    /// Pragmatic enrichment of a classical formula.
    Enrich { formula: String },
    /// Negation normal form.
    Nnf { formula: String },
    /// Modal depth.
    Depth { formula: String },
    /// Entailment: `PREMISE... => CONCLUSION`.
    Entails {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(required = true, allow_hyphen_values = true)]
        query: Vec<String>,
    },
    /// Equivalence of two formulas.
    Equiv {
        #[command(flatten)]
        engine: EngineArgs,
        /// Also compare anti-support.
        #[arg(long)]
        strong: bool,
        left: String,
        right: String,
    },
    /// Bounded bisimilarity of two states (or worlds).
    Bisim {
        left: PathBuf,
        left_state: String,
        right: PathBuf,
        right_state: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        sig: Option<Vec<String>>,
    },
    /// k-bisimulation classes of a model.
    Types {
        model: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        sig: Option<Vec<String>>,
    },
    /// Hintikka formula of a world, or characteristic formula of a state.
    Hintikka {
        model: PathBuf,
        #[arg(long, conflicts_with = "world", required_unless_present = "world")]
        state: Option<String>,
        #[arg(long)]
        world: Option<String>,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        sig: Option<Vec<String>>,
        /// For a state, the classical formula instead of the strong one.
        #[arg(long)]
        chi: bool,
    },
    /// Normal form over a signature and depth.
    Nf {
        formula: String,
        #[arg(long, value_enum)]
        form: NfForm,
        /// Defaults to the modal depth of the formula.
        #[arg(long)]
        k: Option<usize>,
        /// Defaults to the letters of the formula.
        #[arg(long, value_delimiter = ',')]
        sig: Option<Vec<String>>,
    },
    /// Check a natural deduction proof file.
    CheckProof { file: PathBuf },
    /// Generate models and formulas.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Every model with at most `max-worlds` worlds, one JSON object per line.
    Models {
        #[arg(long)]
        max_worlds: usize,
        #[arg(long, value_delimiter = ',', default_value = "p")]
        sig: Vec<String>,
        /// Print only how many there are.
        #[arg(long)]
        count: bool,
    },
    /// A random model with a random state named `s`.
    Model {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        worlds: usize,
        #[arg(long, value_delimiter = ',', default_value = "p,q")]
        sig: Vec<String>,
    },
    /// A random formula with exactly `size` nodes.
    Formula {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        size: usize,
        #[arg(long, value_delimiter = ',', default_value = "p,q")]
        sig: Vec<String>,
        #[arg(long, value_enum, default_value_t = TierArg::Bsml)]
        tier: TierArg,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_enum, default_value_t = EngineKind::Auto)]
    engine: EngineKind,
    /// World bound for the bounded engine.
    #[arg(long, default_value_t = 3)]
    max_worlds: usize,
    /// Signature for the canonical engine.
    #[arg(long, value_delimiter = ',')]
    sig: Option<Vec<String>>,
    /// Depth for the canonical engine.
    #[arg(long)]
    depth: Option<usize>,
    /// Threads for the bounded engine.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineKind {
    Auto,
    Canonical,
    Bounded,
}

#[derive(Clone, Copy, ValueEnum)]
enum NfForm {
    Ml,
    Bsmli,
    Bsmlo,
}

#[derive(Clone, Copy, ValueEnum)]
enum TierArg {
    Ml,
    Bsml,
    Bsmlo,
    Bsmli,
    Full,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Tier {
        match t {
            TierArg::Ml => Tier::Ml,
            TierArg::Bsml => Tier::Bsml,
            TierArg::Bsmlo => Tier::Bsmlo,
            TierArg::Bsmli => Tier::Bsmli,
            TierArg::Full => Tier::Full,
        }
    }
}

/// Input or usage problem; always exit code 2.
struct Fail(String);

impl<E: Display> From<E> for Fail {
    fn from(e: E) -> Fail {
        Fail(e.to_string())
    }
}

/// Exit 0 for success or a true verdict, 1 for false, countermodel or rejection.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Yes,
    No,
}

impl Outcome {
    fn of(b: bool) -> Outcome {
        if b {
            Outcome::Yes
        } else {
            Outcome::No
        }
    }
}

struct Ctx {
    json: bool,
    enrich: bool,
}

impl Ctx {
    fn formula(&self, text: &str) -> Result<Formula, Fail> {
        let (text, enrich) = match text.trim_start().strip_prefix("enrich:") {
            Some(rest) => (rest, true),
            None => (text, self.enrich),
        };
        let f = parse(text)?;
        Ok(if enrich { f.enrich()? } else { f })
    }

    /// Prints `value` in JSON mode and `human` otherwise.
    fn emit(&self, value: Value, human: impl Display) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("json value"));
        } else {
            println!("{human}");
        }
    }
}

fn load_model(path: &Path) -> Result<Model, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail(format!("{}: {e}", path.display())))?;
    Model::from_json(&text).map_err(|e| Fail(format!("{}: {e}", path.display())))
}

fn signature(sig: Option<Vec<String>>, default: impl FnOnce() -> BTreeSet<String>) -> BTreeSet<String> {
    match sig {
        Some(v) => v.into_iter().map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect(),
        None => default(),
    }
}

fn budget() -> Result<Budget, Fail> {
    Ok(Budget::from_env()?)
}

fn engine(a: EngineArgs) -> Result<Engine, Fail> {
    let sig = a.sig.map(|v| signature(Some(v), BTreeSet::new));
    Ok(match a.engine {
        EngineKind::Canonical => Engine::Canonical { sig, depth: a.depth, budget: budget()? },
        EngineKind::Bounded => Engine::Bounded { max_worlds: a.max_worlds, jobs: a.jobs },
        EngineKind::Auto => Engine::Auto { budget: budget()?, max_worlds: a.max_worlds, jobs: a.jobs },
    })
}

/// Splits `A, B => C` given as separate arguments or as one string.
fn split_query(args: &[String]) -> Result<(Vec<String>, String), Fail> {
    let (left, right): (Vec<String>, Vec<String>) = match args.iter().position(|a| a.trim() == "=>") {
        Some(i) => (args[..i].to_vec(), args[i + 1..].to_vec()),
        None => match args {
            [one] if one.contains("=>") => {
                let (l, r) = one.split_once("=>").expect("contains =>");
                (vec![l.to_string()], vec![r.to_string()])
            }
            _ => return Err(Fail("expected `PREMISE... => CONCLUSION`".into())),
        },
    };
    match right.as_slice() {
        [c] => Ok((left.into_iter().filter(|p| !p.trim().is_empty()).collect(), c.clone())),
        _ => Err(Fail("expected exactly one conclusion after `=>`".into())),
    }
}

fn show_verdict(ctx: &Ctx, v: &Verdict) -> Outcome {
    let human = match &v.status {
        Status::Valid => "valid".to_string(),
        Status::Inconclusive { bound } => format!("inconclusive: no countermodel with at most {bound} worlds"),
        Status::Countermodel { model, state } => format!(
            "countermodel ({}): state {{{}}}\n{}",
            v.failed.as_deref().unwrap_or(""),
            model.state_names(*state).join(", "),
            serde_json::to_string_pretty(&model.to_json()).expect("json value")
        ),
    };
    ctx.emit(v.to_json(), human);
    Outcome::of(!v.is_countermodel())
}

fn run(cli: Cli) -> Result<Outcome, Fail> {
    let ctx = Ctx { json: cli.json, enrich: cli.enrich };
    match cli.cmd {
        Cmd::Parse { formula } => {
            let f = ctx.formula(&formula)?;
            ctx.emit(
                json!({
                    "formula": f.to_string(),
                    "tier": f.tier(),
                    "size": f.size(),
                    "modal_depth": f.modal_depth(),
                    "props": f.props(),
                    "ast": f,
                }),
                &f,
            );
        }
        Cmd::Eval { model, state, formula, anti } => {
            let m = load_model(&model)?;
            let s = m.resolve_state(&state)?;
            let f = ctx.formula(&formula)?;
            let verdict = judge(&m, s, &f, anti)?;
            ctx.emit(
                json!({
                    "polarity": if anti { "anti-support" } else { "support" },
                    "state": m.state_names(s),
                    "formula": f.to_string(),
                    "verdict": verdict,
                }),
                verdict,
            );
            return Ok(Outcome::of(verdict));
        }
        Cmd::Enrich { formula } => {
            let f = parse(&formula)?.enrich()?;
            ctx.emit(json!({ "formula": f.to_string() }), f);
        }
        Cmd::Nnf { formula } => {
            let f = ctx.formula(&formula)?.nnf();
            ctx.emit(json!({ "formula": f.to_string() }), f);
        }
        Cmd::Depth { formula } => {
            let f = ctx.formula(&formula)?;
            ctx.emit(json!({ "formula": f.to_string(), "modal_depth": f.modal_depth() }), f.modal_depth());
        }
        Cmd::Entails { engine: e, query } => {
            let (premises, conclusion) = split_query(&query)?;
            let premises = premises.iter().map(|p| ctx.formula(p)).collect::<Result<Vec<_>, _>>()?;
            let conclusion = ctx.formula(&conclusion)?;
            let v = entails(&premises, &conclusion, &engine(e)?)?;
            return Ok(show_verdict(&ctx, &v));
        }
        Cmd::Equiv { engine: e, strong, left, right } => {
            let mode = if strong { Mode::Strong } else { Mode::Support };
            let v = equivalent(&ctx.formula(&left)?, &ctx.formula(&right)?, mode, &engine(e)?)?;
            return Ok(show_verdict(&ctx, &v));
        }
        Cmd::Bisim { left, left_state, right, right_state, k, sig } => {
            let (a, b) = (load_model(&left)?, load_model(&right)?);
            let (s, t) = (a.resolve_state(&left_state)?, b.resolve_state(&right_state)?);
            let sig = sig.map(|v| signature(Some(v), BTreeSet::new));
            let same = state_bisim(&a, s, &b, t, k, sig.as_ref())?;
            ctx.emit(json!({ "k": k, "left": a.state_names(s), "right": b.state_names(t), "bisimilar": same }), same);
            return Ok(Outcome::of(same));
        }
        Cmd::Types { model, k, sig } => {
            let m = load_model(&model)?;
            let sig = signature(sig, || m.signature());
            let t = k_types(&m, k, &sig);
            let groups: Vec<Vec<&str>> = t.groups().iter().map(|g| g.iter().map(|&w| m.name(w)).collect()).collect();
            let human: Vec<String> = groups.iter().enumerate().map(|(i, g)| format!("{i}: {}", g.join(" "))).collect();
            ctx.emit(json!({ "depth": k, "signature": sig, "classes": t.classes, "groups": groups }), human.join("\n"));
        }
        Cmd::Hintikka { model, state, world, k, sig, chi } => {
            let m = load_model(&model)?;
            let sig = signature(sig, || m.signature());
            if let Some(p) = sig.iter().find(|p| !m.has_prop(p)) {
                return Err(Fail(format!("proposition `{p}` is not in the model")));
            }
            let (kind, f) = match (world, state) {
                (Some(w), _) => {
                    let i = m.index_of(&w).ok_or_else(|| Fail(format!("unknown world `{w}`")))?;
                    ("chi", chi_world(&m, i, k, &sig))
                }
                (None, Some(s)) => {
                    let s = m.resolve_state(&s)?;
                    if chi {
                        ("chi", chi_state(&m, s, k, &sig))
                    } else {
                        ("theta", theta_state(&m, s, k, &sig))
                    }
                }
                (None, None) => unreachable!("clap requires --state or --world"),
            };
            ctx.emit(json!({ "kind": kind, "k": k, "signature": sig, "formula": f.to_string() }), f);
        }
        Cmd::Nf { formula, form, k, sig } => {
            let f = ctx.formula(&formula)?;
            let k = k.unwrap_or(f.modal_depth());
            let sig = signature(sig, || f.props());
            let b = budget()?;
            let (name, nf) = match form {
                NfForm::Ml => ("ml", nf_ml(&f, k, &sig, &b)?),
                NfForm::Bsmli => ("bsmli", nf_bsmli(&f, k, &sig, &b)?),
                NfForm::Bsmlo => ("bsmlo", nf_bsmlo(&f, k, &sig, &b)?),
            };
            ctx.emit(json!({ "form": name, "k": k, "signature": sig, "formula": nf.to_string() }), nf);
        }
        Cmd::CheckProof { file } => {
            let text = fs::read_to_string(&file).map_err(|e| Fail(format!("{}: {e}", file.display())))?;
            let proof = Proof::from_json(&text).map_err(|e| Fail(format!("{}: {e}", file.display())))?;
            let report = check_proof(&proof);
            let human = if report.accepted {
                format!("accepted ({}, {} lines)", report.system, report.lines)
            } else {
                let lines: Vec<String> = report.diagnostics.iter().map(|d| d.to_string()).collect();
                format!("rejected\n{}", lines.join("\n"))
            };
            ctx.emit(serde_json::to_value(&report)?, human);
            return Ok(Outcome::of(report.accepted));
        }
        Cmd::Gen { what } => gen(&ctx, what)?,
    }
    Ok(Outcome::Yes)
}

fn gen(ctx: &Ctx, what: GenCmd) -> Result<(), Fail> {
    match what {
        GenCmd::Models { max_worlds, sig, count } => {
            let sig = signature(Some(sig), BTreeSet::new);
            if max_worlds == 0 || max_worlds > 4 || max_worlds * max_worlds + sig.len() * max_worlds >= 64 {
                return Err(Fail(format!("cannot enumerate {max_worlds} worlds over {} letters", sig.len())));
            }
            let n = count_models(max_worlds, sig.len());
            if count {
                ctx.emit(json!({ "models": n }), n);
            } else {
                for m in enumerate_models(max_worlds, &sig) {
                    println!("{}", m.to_json());
                }
            }
        }
        GenCmd::Model { seed, worlds, sig } => {
            let mut m = random_model(seed, worlds, &signature(Some(sig), BTreeSet::new));
            let s: State = random_state(seed, &m);
            m.set_named_state("s", s);
            println!("{}", serde_json::to_string_pretty(&m.to_json())?);
        }
        GenCmd::Formula { seed, size, sig, tier } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = Formula::random(&mut rng, size, &sig, tier.into());
            ctx.emit(json!({ "formula": f.to_string() }), f);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(Fail(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
