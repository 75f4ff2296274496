//! Entailment and equivalence.
//!
//! Two engines: the canonical engine is complete at tiny scale (every root-state
//! of the canonical model is tried), the bounded engine searches all small
//! models for a countermodel and is inconclusive when none exists.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::hintikka::{Budget, CanonicalModel, HintikkaError};
use crate::kripke::{count_models, model_at, Model, State};
use crate::teameval::{EvalError, Evaluator};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error(transparent)]
    Canonical(#[from] HintikkaError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("bounded search over {worlds} worlds and {letters} letters is too large (at most 4 worlds and 63 bits)")]
    BoundTooLarge { worlds: usize, letters: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineTag {
    Canonical,
    Bounded,
}

impl fmt::Display for EngineTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineTag::Canonical => "canonical",
            EngineTag::Bounded => "bounded",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Valid,
    Countermodel {
        model: Model,
        state: State,
    },
    /// No countermodel with at most `bound` worlds.
    Inconclusive {
        bound: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub engine: EngineTag,
    pub models: u64,
    pub states: u64,
    /// The entailment that failed, when a countermodel was found.
    pub failed: Option<String>,
}

#[derive(Serialize)]
struct VerdictJson<'a> {
    status: &'a str,
    engine: EngineTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failed: Option<&'a str>,
    checked: u64,
    models: u64,
}

impl Verdict {
    pub fn is_countermodel(&self) -> bool {
        matches!(self.status, Status::Countermodel { .. })
    }

    pub fn status_name(&self) -> &'static str {
        match self.status {
            Status::Valid => "valid",
            Status::Countermodel { .. } => "countermodel",
            Status::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (model, state, bound) = match &self.status {
            Status::Valid => (None, None, None),
            Status::Countermodel { model, state } => (Some(model.to_json()), Some(model.state_names(*state)), None),
            Status::Inconclusive { bound } => (None, None, Some(*bound)),
        };
        serde_json::to_value(VerdictJson {
            status: self.status_name(),
            engine: self.engine,
            model,
            state,
            bound,
            failed: self.failed.as_deref(),
            checked: self.states,
            models: self.models,
        })
        .expect("verdict serializes")
    }
}

fn all_props<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<String> {
    formulas.into_iter().flat_map(Formula::props).collect()
}

fn describe(premises: &[Formula], conclusion: &Formula) -> String {
    let ps: Vec<String> = premises.iter().map(|p| p.to_string()).collect();
    format!("{} => {}", ps.join(", "), conclusion)
}

/// Complete decision on the canonical model for `sig` and depth `k`
/// (defaults: the letters of the query and its largest modal depth).
pub fn entails_canonical(
    premises: &[Formula],
    conclusion: &Formula,
    sig: Option<&BTreeSet<String>>,
    k: Option<usize>,
    budget: &Budget,
) -> Result<Verdict, DecideError> {
    let all: Vec<&Formula> = premises.iter().chain([conclusion]).collect();
    let need = all.iter().map(|f| f.modal_depth()).max().unwrap_or(0);
    let letters = all_props(all.iter().copied());
    let sig = sig.cloned().unwrap_or_else(|| letters.clone());
    let k = k.unwrap_or(need);
    if k < need {
        return Err(HintikkaError::DepthTooSmall { need, got: k }.into());
    }
    if let Some(p) = letters.iter().find(|p| !sig.contains(*p)) {
        return Err(HintikkaError::SignatureTooSmall(p.clone()).into());
    }
    let cm = CanonicalModel::build(&sig, k, budget)?;
    cm.check_root_states(budget)?;
    let mut ev = Evaluator::new(cm.model())?;
    let ids = premises.iter().map(|p| ev.add(p)).collect::<Result<Vec<_>, _>>()?;
    let goal = ev.add(conclusion)?;
    let mut states = 0;
    for s in cm.root_states() {
        states += 1;
        if ids.iter().all(|&i| ev.support(s, i)) && !ev.support(s, goal) {
            let from: Vec<usize> = if s.is_empty() { vec![0] } else { s.worlds().collect() };
            let (model, at) = cm.model().generated(&from);
            let state = if s.is_empty() { State::EMPTY } else { State::from_worlds(at) };
            return Ok(Verdict {
                status: Status::Countermodel { model, state },
                engine: EngineTag::Canonical,
                models: 1,
                states,
                failed: Some(describe(premises, conclusion)),
            });
        }
    }
    Ok(Verdict { status: Status::Valid, engine: EngineTag::Canonical, models: 1, states, failed: None })
}

/// Whether `refute_bounded` accepts this many worlds over this many letters.
pub fn bounded_fits(max_worlds: usize, letters: usize) -> bool {
    max_worlds <= 4 && max_worlds * max_worlds + letters * max_worlds < 64
}

/// States visited by the bounded search up to and including model `index`
/// (all of them when `index` is past the end).
fn states_through(max_worlds: usize, letters: usize, mut index: u64) -> u64 {
    let mut total = 0;
    for m in 1..=max_worlds {
        let block = 1u64 << (m * m) << (letters * m);
        let take = block.min(index.saturating_add(1));
        total += take << m;
        if index < block {
            break;
        }
        index -= block;
    }
    total
}

/// First countermodel among all models with at most `max_worlds` worlds over the
/// query's letters and all of their states, in enumeration order.
pub fn refute_bounded(premises: &[Formula], conclusion: &Formula, max_worlds: usize) -> Result<Verdict, DecideError> {
    refute_bounded_jobs(premises, conclusion, max_worlds, 1)
}

fn first_bad_state(m: &Model, premises: &[Formula], conclusion: &Formula) -> Result<Option<State>, EvalError> {
    let mut ev = Evaluator::new(m)?;
    let ids = premises.iter().map(|p| ev.add(p)).collect::<Result<Vec<_>, _>>()?;
    let goal = ev.add(conclusion)?;
    Ok(m.states().find(|&s| ids.iter().all(|&i| ev.support(s, i)) && !ev.support(s, goal)))
}

/// `refute_bounded` with the models split over `jobs` threads. The verdict,
/// including the counts, does not depend on `jobs`.
pub fn refute_bounded_jobs(
    premises: &[Formula],
    conclusion: &Formula,
    max_worlds: usize,
    jobs: usize,
) -> Result<Verdict, DecideError> {
    let sig = all_props(premises.iter().chain([conclusion]));
    if max_worlds == 0 || !bounded_fits(max_worlds, sig.len()) {
        return Err(DecideError::BoundTooLarge { worlds: max_worlds, letters: sig.len() });
    }
    let total = count_models(max_worlds, sig.len());
    let jobs = jobs.clamp(1, 64) as u64;
    let best = AtomicU64::new(u64::MAX);
    let found = std::thread::scope(|scope| {
        let workers: Vec<_> = (0..jobs)
            .map(|t| {
                let (best, sig) = (&best, &sig);
                scope.spawn(move || -> Result<Option<(u64, Model, State)>, EvalError> {
                    let mut i = t;
                    while i < total && i < best.load(Ordering::Relaxed) {
                        let m = model_at(max_worlds, sig, i).expect("index in range");
                        if let Some(s) = first_bad_state(&m, premises, conclusion)? {
                            best.fetch_min(i, Ordering::Relaxed);
                            return Ok(Some((i, m, s)));
                        }
                        i += jobs;
                    }
                    Ok(None)
                })
            })
            .collect();
        let mut first: Option<(u64, Model, State)> = None;
        for w in workers {
            if let Some(hit) = w.join().expect("search thread panicked")? {
                if first.as_ref().is_none_or(|f| hit.0 < f.0) {
                    first = Some(hit);
                }
            }
        }
        Ok::<_, EvalError>(first)
    })?;
    Ok(match found {
        Some((i, model, state)) => Verdict {
            models: i + 1,
            states: states_through(max_worlds, sig.len(), i) - (model.full_state().0 - state.0),
            status: Status::Countermodel { model, state },
            engine: EngineTag::Bounded,
            failed: Some(describe(premises, conclusion)),
        },
        None => Verdict {
            status: Status::Inconclusive { bound: max_worlds },
            engine: EngineTag::Bounded,
            models: total,
            states: states_through(max_worlds, sig.len(), u64::MAX),
            failed: None,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Engine {
    Canonical {
        sig: Option<BTreeSet<String>>,
        depth: Option<usize>,
        budget: Budget,
    },
    Bounded {
        max_worlds: usize,
        jobs: usize,
    },
    /// Canonical when it fits the budget, bounded otherwise.
    Auto {
        budget: Budget,
        max_worlds: usize,
        jobs: usize,
    },
}

pub fn entails(premises: &[Formula], conclusion: &Formula, engine: &Engine) -> Result<Verdict, DecideError> {
    match engine {
        Engine::Canonical { sig, depth, budget } => {
            entails_canonical(premises, conclusion, sig.as_ref(), *depth, budget)
        }
        Engine::Bounded { max_worlds, jobs } => refute_bounded_jobs(premises, conclusion, *max_worlds, *jobs),
        Engine::Auto { budget, max_worlds, jobs } => {
            match entails_canonical(premises, conclusion, None, None, budget) {
                Err(DecideError::Canonical(HintikkaError::BudgetExceeded(_))) => {
                    refute_bounded_jobs(premises, conclusion, *max_worlds, *jobs)
                }
                other => other,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Same supporting states.
    Support,
    /// Same supporting and same anti-supporting states.
    Strong,
}

/// Checks the entailments in both directions (and between negations in strong
/// mode); the first countermodel wins, and the verdict is valid only if every
/// direction is.
pub fn equivalent(a: &Formula, b: &Formula, mode: Mode, engine: &Engine) -> Result<Verdict, DecideError> {
    let mut checks = vec![(a.clone(), b.clone()), (b.clone(), a.clone())];
    if mode == Mode::Strong {
        checks.push((Formula::neg(a.clone()), Formula::neg(b.clone())));
        checks.push((Formula::neg(b.clone()), Formula::neg(a.clone())));
    }
    // one signature and depth for every direction
    let engine = match engine {
        Engine::Canonical { sig: None, depth, budget } => Engine::Canonical {
            sig: Some(all_props([a, b])),
            depth: Some(depth.unwrap_or(a.modal_depth().max(b.modal_depth()))),
            budget: *budget,
        },
        other => other.clone(),
    };
    let mut result: Option<Verdict> = None;
    for (p, c) in checks {
        let v = entails(std::slice::from_ref(&p), &c, &engine)?;
        let acc = result.get_or_insert_with(|| Verdict { models: 0, states: 0, ..v.clone() });
        acc.models += v.models;
        acc.states += v.states;
        acc.engine = v.engine;
        match v.status {
            Status::Countermodel { .. } => {
                acc.status = v.status;
                acc.failed = v.failed;
                break;
            }
            Status::Inconclusive { .. } => acc.status = v.status,
            Status::Valid => {}
        }
    }
    Ok(result.expect("at least two checks"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::teameval::supports;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn replays(v: &Verdict, premises: &[Formula], conclusion: &Formula) -> bool {
        match &v.status {
            Status::Countermodel { model, state } => {
                premises.iter().all(|p| supports(model, *state, p).unwrap())
                    && !supports(model, *state, conclusion).unwrap()
            }
            _ => false,
        }
    }

    #[test]
    fn canonical_examples() {
        let b = Budget::default();
        let v = entails_canonical(&[], &f("p | ~p"), None, None, &b).unwrap();
        assert_eq!(v.status, Status::Valid);
        let v = entails_canonical(&[], &f("NE | ~NE"), None, None, &b).unwrap();
        match &v.status {
            Status::Countermodel { state, .. } => assert!(state.is_empty()),
            other => panic!("{other:?}"),
        }
        let prem = [f("(p \\/ ~p) | (p \\/ ~p)")];
        let v = entails_canonical(&prem, &f("p \\/ ~p"), None, None, &b).unwrap();
        assert!(replays(&v, &prem, &f("p \\/ ~p")));
    }

    #[test]
    fn bounded_examples() {
        let v = refute_bounded(&[f("p")], &f("p | NE"), 1).unwrap();
        match &v.status {
            Status::Countermodel { state, .. } => assert!(state.is_empty()),
            other => panic!("{other:?}"),
        }
        let prem = [f("~<>(p | q)")];
        let v = refute_bounded(&prem, &f("~<>p & ~<>q"), 2).unwrap();
        assert_eq!(v.status, Status::Inconclusive { bound: 2 });
        assert_eq!(v.models, count_models(2, 2));
        assert!(refute_bounded(&[], &f("p"), 5).is_err());
        assert!(refute_bounded(&[], &f("p"), 0).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let e = Engine::Auto { budget: Budget::default(), max_worlds: 3, jobs: 1 };
        let v = equivalent(&f("~(p | q)"), &f("~(p \\/ q)"), Mode::Support, &e).unwrap();
        assert_eq!(v.status, Status::Valid);
        let v = equivalent(&f("~~(p | q)"), &f("~~(p \\/ q)"), Mode::Support, &e).unwrap();
        assert!(v.is_countermodel());
        // same support, different anti-support
        let v = equivalent(&f("~NE"), &f("bot"), Mode::Support, &e).unwrap();
        assert_eq!(v.status, Status::Valid);
        let v = equivalent(&f("~NE"), &f("bot"), Mode::Strong, &e).unwrap();
        assert!(v.is_countermodel());
    }

    #[test]
    fn verdict_json_shape() {
        let v = refute_bounded(&[f("p")], &f("p | NE"), 1).unwrap();
        let j = v.to_json();
        assert_eq!(j["status"], "countermodel");
        assert_eq!(j["state"], serde_json::json!([]));
        assert!(j["model"]["worlds"].is_array());
        assert_eq!(j["engine"], "bounded");
    }

    #[test]
    fn jobs_do_not_change_the_verdict() {
        use crate::kripke::enumerate_models;
        let cases = [
            (vec![f("<>(p | q)")], f("<>p & <>q")),
            (vec![f("[]p | []q")], f("[](p | q)")),
            (vec![f("p | q")], f("p \\/ q")),
        ];
        for (prem, concl) in cases {
            let one = refute_bounded(&prem, &concl, 2).unwrap();
            for jobs in [2, 3, 8] {
                assert_eq!(refute_bounded_jobs(&prem, &concl, 2, jobs).unwrap(), one);
            }
            // counts agree with a plain walk over the enumeration
            let (mut models, mut states) = (0, 0);
            'walk: for m in enumerate_models(2, &all_props(prem.iter().chain([&concl]))) {
                models += 1;
                for s in m.states() {
                    states += 1;
                    if prem.iter().all(|p| supports(&m, s, p).unwrap()) && !supports(&m, s, &concl).unwrap() {
                        break 'walk;
                    }
                }
            }
            assert_eq!((one.models, one.states), (models, states));
        }
    }
}
