//! Hintikka formulas, characteristic formulas of state properties, the layered
//! canonical model realizing every bounded bisimulation type, and disjunctive
//! normal forms built from it.
//!
//! Generated conjunctions and disjunctions are ordered by printed form, so the
//! output is a pure function of the input types.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bisim::k_types;
use crate::formula::Formula;
use crate::kripke::{disjoint_union, Model, ModelError, State, MAX_TEAM_WORLDS};
use crate::teameval::{EvalError, Evaluator};

pub const BUDGET_ENV: &str = "TEAMLOGIC_BUDGET";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HintikkaError {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("bad budget `{0}`: expected MAX_WORLDS[,MAX_ROOT_STATE_BITS]")]
    BadBudget(String),
    #[error("depth {got} is below the modal depth {need} of the formula")]
    DepthTooSmall { need: usize, got: usize },
    #[error("proposition `{0}` is not in the signature")]
    SignatureTooSmall(String),
    #[error("`{0}` is not classical")]
    NotClassical(String),
    #[error("`{0}` contains inquisitive disjunction")]
    HasGlobalOr(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Limits on canonical model construction and root-state enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_worlds: usize,
    /// Root-state families are enumerated only if there are at most this many roots.
    pub max_root_state_bits: u32,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { max_worlds: 20_000, max_root_state_bits: 20 }
    }
}

impl Budget {
    /// `MAX_WORLDS` or `MAX_WORLDS,MAX_ROOT_STATE_BITS`; bits are capped at 63.
    pub fn parse(text: &str) -> Result<Budget, HintikkaError> {
        let bad = || HintikkaError::BadBudget(text.to_string());
        let mut parts = text.split(',').map(str::trim);
        let max_worlds = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let mut b = Budget { max_worlds, ..Budget::default() };
        if let Some(bits) = parts.next() {
            b.max_root_state_bits = bits.parse().map_err(|_| bad())?;
            if b.max_root_state_bits > 63 {
                return Err(bad());
            }
        }
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(b)
    }

    /// The default budget, overridden by `TEAMLOGIC_BUDGET` when set.
    pub fn from_env() -> Result<Budget, HintikkaError> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => Budget::parse(&v),
            Err(_) => Ok(Budget::default()),
        }
    }
}

/// Memoized Hintikka formulas of the worlds of one model.
pub struct Chi<'m> {
    model: &'m Model,
    sig: Vec<String>,
    memo: HashMap<(usize, usize), (Formula, String)>,
}

impl<'m> Chi<'m> {
    pub fn new(model: &'m Model, sig: &BTreeSet<String>) -> Chi<'m> {
        Chi { model, sig: sig.iter().cloned().collect(), memo: HashMap::new() }
    }

    /// The `k`-th Hintikka formula of `w` and its printed form.
    pub fn get(&mut self, w: usize, k: usize) -> (Formula, String) {
        if let Some(hit) = self.memo.get(&(w, k)) {
            return hit.clone();
        }
        let f = if k == 0 {
            Formula::conj(
                self.sig
                    .iter()
                    .map(|p| {
                        let a = Formula::atom(p);
                        if self.model.holds(p, w) {
                            a
                        } else {
                            Formula::neg(a)
                        }
                    })
                    .collect(),
            )
        } else {
            let succ: BTreeMap<String, Formula> = self
                .model
                .successors(w)
                .iter()
                .map(|&v| {
                    let (f, s) = self.get(v, k - 1);
                    (s, f)
                })
                .collect();
            let mut rest: Vec<Formula> = succ.values().cloned().map(Formula::dia).collect();
            rest.push(Formula::boxed(Formula::disj(succ.into_values().collect())));
            Formula::and(self.get(w, k - 1).0, Formula::conj(rest))
        };
        let printed = f.to_string();
        self.memo.insert((w, k), (f.clone(), printed.clone()));
        (f, printed)
    }
}

pub fn chi_world(m: &Model, w: usize, k: usize, sig: &BTreeSet<String>) -> Formula {
    Chi::new(m, sig).get(w, k).0
}

/// One representative world per `k`-type among `worlds`.
fn representatives(ids: &[usize], worlds: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    worlds.filter(|&w| seen.insert(ids[w])).collect()
}

fn sorted_disj(items: Vec<(String, Formula)>, fold: fn(Vec<Formula>) -> Formula) -> Formula {
    let sorted: BTreeMap<String, Formula> = items.into_iter().collect();
    fold(sorted.into_values().collect())
}

fn state_formula(m: &Model, s: State, k: usize, sig: &BTreeSet<String>, ne: bool) -> Formula {
    let types = k_types(m, k, sig);
    let mut chi = Chi::new(m, sig);
    let items = representatives(&types.ids, s.worlds())
        .into_iter()
        .map(|w| {
            let f = chi.get(w, k).0;
            let f = if ne { Formula::and(f, Formula::Ne) } else { f };
            (f.to_string(), f)
        })
        .collect();
    sorted_disj(items, Formula::disj)
}

/// Disjunction of the Hintikka formulas of the worlds of `s`.
pub fn chi_state(m: &Model, s: State, k: usize, sig: &BTreeSet<String>) -> Formula {
    state_formula(m, s, k, sig, false)
}

/// Strong Hintikka formula: each disjunct also demands a nonempty part.
pub fn theta_state(m: &Model, s: State, k: usize, sig: &BTreeSet<String>) -> Formula {
    state_formula(m, s, k, sig, true)
}

/// Model whose roots realize each `k`-bisimulation type over a signature exactly once.
///
/// Layer 0 has one world per valuation; layer `j+1` one world per valuation and
/// set of layer-`j` worlds, with edges to exactly that set. Worlds are stored
/// top layer first, so the roots are worlds `0..roots()` and a set of roots is
/// directly a [`State`] of the model.
#[derive(Clone, Debug)]
pub struct CanonicalModel {
    sig: BTreeSet<String>,
    depth: usize,
    model: Model,
    layer_sizes: Vec<usize>,
}

impl CanonicalModel {
    pub fn build(sig: &BTreeSet<String>, k: usize, budget: &Budget) -> Result<CanonicalModel, HintikkaError> {
        let n = sig.len();
        let mut sizes: Vec<usize> = Vec::new();
        let mut total = 0usize;
        for j in 0..=k {
            let bits = if j == 0 { n } else { n + sizes[j - 1] };
            let size = if bits < 63 { 1usize << bits } else { usize::MAX };
            let arith = if j == 0 { format!("2^{n}") } else { format!("2^{n} * 2^{}", sizes[j - 1]) };
            if size == usize::MAX || total.saturating_add(size) > budget.max_worlds {
                return Err(HintikkaError::BudgetExceeded(format!(
                    "layer {j} needs {arith} worlds; {total} worlds in lower layers; limit {}",
                    budget.max_worlds
                )));
            }
            total += size;
            sizes.push(size);
        }
        // offsets[j]: index of the first world of layer j
        let mut offsets = vec![0; k + 1];
        let mut acc = 0;
        for j in (0..=k).rev() {
            offsets[j] = acc;
            acc += sizes[j];
        }
        let mut names = vec![String::new(); total];
        let mut edges = Vec::new();
        let mut valuation: BTreeMap<String, BTreeSet<usize>> =
            sig.iter().map(|p| (p.clone(), BTreeSet::new())).collect();
        let vals = 1usize << n;
        for j in 0..=k {
            for i in 0..sizes[j] {
                let w = offsets[j] + i;
                names[w] = format!("{j}.{i}");
                let (val, succ) = (i % vals, i / vals);
                for (b, p) in sig.iter().enumerate() {
                    if val >> b & 1 == 1 {
                        valuation.get_mut(p).expect("letter in signature").insert(w);
                    }
                }
                if j > 0 {
                    let below = offsets[j - 1];
                    edges.extend((0..sizes[j - 1]).filter(|b| succ >> b & 1 == 1).map(|b| (w, below + b)));
                }
            }
        }
        let model = Model::new(names, edges, valuation)?;
        Ok(CanonicalModel { sig: sig.clone(), depth: k, model, layer_sizes: sizes })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn signature(&self) -> &BTreeSet<String> {
        &self.sig
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Sizes of layers `0..=k`.
    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn roots(&self) -> usize {
        self.layer_sizes[self.depth]
    }

    pub fn chi_roots(&self) -> Vec<Formula> {
        let mut chi = Chi::new(&self.model, &self.sig);
        (0..self.roots()).map(|w| chi.get(w, self.depth).0).collect()
    }

    /// Fails unless every set of roots may be enumerated under `budget`.
    pub fn check_root_states(&self, budget: &Budget) -> Result<(), HintikkaError> {
        let r = self.roots();
        if r > budget.max_root_state_bits as usize || self.model.len() > MAX_TEAM_WORLDS {
            return Err(HintikkaError::BudgetExceeded(format!(
                "2^{r} root-states over a {}-world model; limit 2^{} root-states and {MAX_TEAM_WORLDS} worlds",
                self.model.len(),
                budget.max_root_state_bits
            )));
        }
        Ok(())
    }

    /// Every set of roots, the empty one first, in increasing bitmask order.
    pub fn root_states(&self) -> impl Iterator<Item = State> {
        State::full(self.roots()).subsets()
    }

    /// Which roots support `f`, as singleton teams.
    pub fn root_supports(&self, f: &Formula) -> Result<Vec<bool>, HintikkaError> {
        if self.model.len() <= MAX_TEAM_WORLDS {
            let mut ev = Evaluator::new(&self.model)?;
            let id = ev.add(f)?;
            return Ok((0..self.roots()).map(|w| ev.support(State::singleton(w), id)).collect());
        }
        (0..self.roots())
            .map(|w| {
                let (sub, at) = self.model.generated(&[w]);
                let mut ev = Evaluator::new(&sub)?;
                let id = ev.add(f)?;
                Ok(ev.support(State::singleton(at[0]), id))
            })
            .collect()
    }

    /// Root-states supporting `f`, in enumeration order.
    pub fn supporting_root_states(&self, f: &Formula, budget: &Budget) -> Result<Vec<State>, HintikkaError> {
        self.check_root_states(budget)?;
        let mut ev = Evaluator::new(&self.model)?;
        let id = ev.add(f)?;
        Ok(self.root_states().filter(|&s| ev.support(s, id)).collect())
    }

    fn theta(&self, chi: &[Formula], s: State) -> Formula {
        let items = s
            .worlds()
            .map(|w| {
                let f = Formula::and(chi[w].clone(), Formula::Ne);
                (f.to_string(), f)
            })
            .collect();
        sorted_disj(items, Formula::disj)
    }
}

fn check_args(f: &Formula, k: usize, sig: &BTreeSet<String>) -> Result<(), HintikkaError> {
    let need = f.modal_depth();
    if k < need {
        return Err(HintikkaError::DepthTooSmall { need, got: k });
    }
    if let Some(p) = f.props().into_iter().find(|p| !sig.contains(p)) {
        return Err(HintikkaError::SignatureTooSmall(p));
    }
    Ok(())
}

/// Classical normal form: disjunction of the Hintikka formulas of the root types supporting `a`.
pub fn nf_ml(a: &Formula, k: usize, sig: &BTreeSet<String>, budget: &Budget) -> Result<Formula, HintikkaError> {
    if !a.is_classical() {
        return Err(HintikkaError::NotClassical(a.to_string()));
    }
    check_args(a, k, sig)?;
    let cm = CanonicalModel::build(sig, k, budget)?;
    let chi = cm.chi_roots();
    let items =
        cm.root_supports(a)?.into_iter().zip(chi).filter(|(ok, _)| *ok).map(|(_, f)| (f.to_string(), f)).collect();
    Ok(sorted_disj(items, Formula::disj))
}

/// Inquisitive normal form: one strong Hintikka disjunct per supporting root-state.
pub fn nf_bsmli(f: &Formula, k: usize, sig: &BTreeSet<String>, budget: &Budget) -> Result<Formula, HintikkaError> {
    check_args(f, k, sig)?;
    let cm = CanonicalModel::build(sig, k, budget)?;
    let states = cm.supporting_root_states(f, budget)?;
    let chi = cm.chi_roots();
    let items = states
        .into_iter()
        .map(|s| {
            let t = cm.theta(&chi, s);
            (t.to_string(), t)
        })
        .collect();
    Ok(sorted_disj(items, Formula::gdisj))
}

/// Normal form for union closed formulas: split disjunction of `@θ` over the
/// supporting root-states, guarded by `NE` when the empty state is not among them.
pub fn nf_bsmlo(f: &Formula, k: usize, sig: &BTreeSet<String>, budget: &Budget) -> Result<Formula, HintikkaError> {
    if !f.is_gdis_free() {
        return Err(HintikkaError::HasGlobalOr(f.to_string()));
    }
    check_args(f, k, sig)?;
    let cm = CanonicalModel::build(sig, k, budget)?;
    let states = cm.supporting_root_states(f, budget)?;
    let chi = cm.chi_roots();
    let has_empty = states.contains(&State::EMPTY);
    let items = states
        .into_iter()
        .map(|s| {
            let t = Formula::empty(cm.theta(&chi, s));
            (t.to_string(), t)
        })
        .collect();
    let zeta = sorted_disj(items, Formula::disj);
    Ok(if has_empty { zeta } else { Formula::and(Formula::Ne, zeta) })
}

/// Which characteristic formula to build for a property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Flat properties: split disjunction of world Hintikka formulas.
    Nu,
    /// Arbitrary properties: inquisitive disjunction of strong Hintikka formulas.
    Xi,
    /// Union closed properties: split disjunction of `@θ`.
    Zeta,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Nu => "nu",
            Flavor::Xi => "xi",
            Flavor::Zeta => "zeta",
        })
    }
}

impl std::str::FromStr for Flavor {
    type Err = String;
    fn from_str(s: &str) -> Result<Flavor, String> {
        match s {
            "nu" => Ok(Flavor::Nu),
            "xi" => Ok(Flavor::Xi),
            "zeta" => Ok(Flavor::Zeta),
            _ => Err(format!("unknown flavor `{s}` (nu, xi or zeta)")),
        }
    }
}

/// Characteristic formula of a finite property given by its pointed states,
/// deduplicated up to `k`-bisimulation.
pub fn charf_of_property(
    property: &[(&Model, State)],
    k: usize,
    sig: &BTreeSet<String>,
    flavor: Flavor,
) -> Result<Formula, HintikkaError> {
    let empty_fallback = match flavor {
        Flavor::Nu | Flavor::Zeta => Formula::BotWeak,
        Flavor::Xi => Formula::BotStrong,
    };
    if property.is_empty() {
        return Ok(if flavor == Flavor::Zeta { Formula::and(Formula::Ne, empty_fallback) } else { empty_fallback });
    }
    let parts: Vec<(&Model, State)> = property.iter().map(|&(m, _)| (m, State::EMPTY)).collect();
    let (u, _) = disjoint_union(&parts)?;
    let mut offset = 0;
    let mut states: Vec<Vec<usize>> = Vec::new();
    for (m, s) in property {
        states.push(s.worlds().map(|w| w + offset).collect());
        offset += m.len();
    }
    let types = k_types(&u, k, sig);
    let mut chi = Chi::new(&u, sig);
    let theta = |chi: &mut Chi, ws: &[usize]| {
        let items = representatives(&types.ids, ws.iter().copied())
            .into_iter()
            .map(|w| {
                let f = Formula::and(chi.get(w, k).0, Formula::Ne);
                (f.to_string(), f)
            })
            .collect();
        sorted_disj(items, Formula::disj)
    };
    // states with the same set of types are k-bisimilar
    let mut distinct: BTreeMap<BTreeSet<usize>, &[usize]> = BTreeMap::new();
    for ws in &states {
        distinct.entry(ws.iter().map(|&w| types.ids[w]).collect()).or_insert(ws);
    }
    Ok(match flavor {
        Flavor::Nu => {
            let items = representatives(&types.ids, states.iter().flatten().copied())
                .into_iter()
                .map(|w| {
                    let (f, s) = chi.get(w, k);
                    (s, f)
                })
                .collect();
            sorted_disj(items, Formula::disj)
        }
        Flavor::Xi => {
            let items = distinct
                .values()
                .map(|ws| {
                    let t = theta(&mut chi, ws);
                    (t.to_string(), t)
                })
                .collect();
            sorted_disj(items, Formula::gdisj)
        }
        Flavor::Zeta => {
            let items = distinct
                .values()
                .map(|ws| {
                    let t = Formula::empty(theta(&mut chi, ws));
                    (t.to_string(), t)
                })
                .collect();
            let zeta = sorted_disj(items, Formula::disj);
            if distinct.contains_key(&BTreeSet::new()) {
                zeta
            } else {
                Formula::and(Formula::Ne, zeta)
            }
        }
    })
}
