//! Finite Kripke models, teams, disjoint unions, model enumeration and the
//! JSON model format.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Teams are bitsets, so a model used for team operations has at most this many worlds.
pub const MAX_TEAM_WORLDS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("world index {0} out of range")]
    WorldIndex(usize),
    #[error("teams are limited to models with at most {MAX_TEAM_WORLDS} worlds (model has {0})")]
    TooLarge(usize),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("disjoint union of an empty family")]
    EmptyUnion,
    #[error("model file: {0}")]
    Json(String),
}

/// A team: a set of worlds of one model, as a bitset over world indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub u64);

impl State {
    pub const EMPTY: State = State(0);

    pub fn singleton(w: usize) -> State {
        State(1 << w)
    }

    pub fn full(n: usize) -> State {
        State(if n >= 64 { u64::MAX } else { (1u64 << n) - 1 })
    }

    pub fn from_worlds(worlds: impl IntoIterator<Item = usize>) -> State {
        State(worlds.into_iter().fold(0, |acc, w| acc | (1 << w)))
    }

    pub fn contains(self, w: usize) -> bool {
        w < 64 && self.0 >> w & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: State) -> State {
        State(self.0 | other.0)
    }

    pub fn is_subset(self, other: State) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn worlds(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |w| bits >> w & 1 == 1)
    }

    /// All subsets, in increasing bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = State> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full { None } else { Some((cur.wrapping_sub(full)) & full) };
            Some(State(cur))
        })
    }
}

/// A finite Kripke model over an explicit signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    names: Vec<String>,
    succ: Vec<Vec<usize>>,
    valuation: BTreeMap<String, BTreeSet<usize>>,
    states: BTreeMap<String, State>,
}

impl Model {
    /// Builds a model; every key of `valuation` belongs to the signature.
    pub fn new(
        names: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        valuation: BTreeMap<String, BTreeSet<usize>>,
    ) -> Result<Model, ModelError> {
        if names.is_empty() {
            return Err(ModelError::NoWorlds);
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(ModelError::DuplicateWorld(n.clone()));
            }
        }
        let n = names.len();
        let mut succ = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(ModelError::WorldIndex(u.max(v)));
            }
            succ[u].push(v);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        if let Some(&w) = valuation.values().flatten().find(|&&w| w >= n) {
            return Err(ModelError::WorldIndex(w));
        }
        Ok(Model { names, succ, valuation, states: BTreeMap::new() })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, w: usize) -> &str {
        &self.names[w]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn successors(&self, w: usize) -> &[usize] {
        &self.succ[w]
    }

    pub fn signature(&self) -> BTreeSet<String> {
        self.valuation.keys().cloned().collect()
    }

    pub fn has_prop(&self, p: &str) -> bool {
        self.valuation.contains_key(p)
    }

    /// Whether `p` is true at `w`; letters outside the signature are false.
    pub fn holds(&self, p: &str, w: usize) -> bool {
        self.valuation.get(p).is_some_and(|ws| ws.contains(&w))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn named_states(&self) -> &BTreeMap<String, State> {
        &self.states
    }

    pub fn set_named_state(&mut self, name: &str, s: State) {
        self.states.insert(name.to_string(), s);
    }

    pub fn check_team_size(&self) -> Result<(), ModelError> {
        if self.len() > MAX_TEAM_WORLDS {
            Err(ModelError::TooLarge(self.len()))
        } else {
            Ok(())
        }
    }

    pub fn full_state(&self) -> State {
        State::full(self.len().min(MAX_TEAM_WORLDS))
    }

    /// All states of the model, in increasing bitmask order (the empty state first).
    pub fn states(&self) -> impl Iterator<Item = State> {
        self.full_state().subsets()
    }

    pub fn successor_state(&self, w: usize) -> State {
        State::from_worlds(self.succ[w].iter().copied())
    }

    /// Union of the successor sets of the worlds in `s`.
    pub fn r_image(&self, s: State) -> State {
        s.worlds().fold(State::EMPTY, |acc, w| acc.union(self.successor_state(w)))
    }

    /// Resolves a state by name, or as a comma separated list of worlds
    /// (`{}` or the empty string for the empty state).
    pub fn resolve_state(&self, spec: &str) -> Result<State, ModelError> {
        let spec = spec.strip_prefix("s=").unwrap_or(spec).trim();
        if let Some(s) = self.states.get(spec) {
            return Ok(*s);
        }
        let inner = spec.trim_start_matches('{').trim_end_matches('}').trim();
        if inner.is_empty() {
            return Ok(State::EMPTY);
        }
        self.check_team_size()?;
        let mut s = State::EMPTY;
        for part in inner.split(',') {
            let part = part.trim();
            let w = self.index_of(part).ok_or_else(|| {
                if spec.contains(',') || spec.starts_with('{') {
                    ModelError::UnknownWorld(part.to_string())
                } else {
                    ModelError::UnknownState(part.to_string())
                }
            })?;
            s = s.union(State::singleton(w));
        }
        Ok(s)
    }

    /// Submodel generated by `from` (all worlds reachable from it), with the
    /// new indices of `from`. Named states are dropped.
    pub fn generated(&self, from: &[usize]) -> (Model, Vec<usize>) {
        let mut keep = vec![false; self.len()];
        let mut stack: Vec<usize> = from.to_vec();
        while let Some(w) = stack.pop() {
            if !std::mem::replace(&mut keep[w], true) {
                stack.extend(&self.succ[w]);
            }
        }
        let mut index = vec![usize::MAX; self.len()];
        let old: Vec<usize> = (0..self.len()).filter(|&w| keep[w]).collect();
        for (i, &w) in old.iter().enumerate() {
            index[w] = i;
        }
        let m = Model {
            names: old.iter().map(|&w| self.names[w].clone()).collect(),
            succ: old.iter().map(|&w| self.succ[w].iter().map(|&v| index[v]).collect()).collect(),
            valuation: self
                .valuation
                .iter()
                .map(|(p, ws)| (p.clone(), ws.iter().filter(|&&w| keep[w]).map(|&w| index[w]).collect()))
                .collect(),
            states: BTreeMap::new(),
        };
        (m, from.iter().map(|&w| index[w]).collect())
    }

    pub fn state_names(&self, s: State) -> Vec<String> {
        s.worlds().map(|w| self.names[w].clone()).collect()
    }

    /// Restricts or extends the signature to exactly `sig`; new letters are false everywhere.
    pub fn with_signature(&self, sig: &BTreeSet<String>) -> Model {
        let mut m = self.clone();
        m.valuation = sig.iter().map(|p| (p.clone(), self.valuation.get(p).cloned().unwrap_or_default())).collect();
        m
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            worlds: self.names.clone(),
            relation: self.edges().map(|(u, v)| (self.names[u].clone(), self.names[v].clone())).collect(),
            valuation: self
                .valuation
                .iter()
                .map(|(p, ws)| (p.clone(), ws.iter().map(|&w| self.names[w].clone()).collect()))
                .collect(),
            states: self.states.iter().map(|(n, s)| (n.clone(), self.state_names(*s))).collect(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Model, ModelError> {
        let mut m = Model::new(file.worlds.clone(), [], BTreeMap::new())?;
        let idx = |name: &str| m.index_of(name).ok_or_else(|| ModelError::UnknownWorld(name.to_string()));
        let mut edges = Vec::new();
        for (u, v) in &file.relation {
            edges.push((idx(u)?, idx(v)?));
        }
        let mut valuation = BTreeMap::new();
        for (p, ws) in &file.valuation {
            let set = ws.iter().map(|w| idx(w)).collect::<Result<BTreeSet<_>, _>>()?;
            valuation.insert(p.clone(), set);
        }
        let mut states = BTreeMap::new();
        for (name, ws) in &file.states {
            let ids = ws.iter().map(|w| idx(w)).collect::<Result<Vec<_>, _>>()?;
            states.insert(name.clone(), ids);
        }
        m = Model::new(file.worlds, edges, valuation)?;
        if !states.is_empty() {
            m.check_team_size()?;
        }
        m.states = states.into_iter().map(|(n, ids)| (n, State::from_worlds(ids))).collect();
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        Model::from_file(file)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_file()).expect("model serializes")
    }
}

/// On-disk model format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub relation: Vec<(String, String)>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub states: BTreeMap<String, Vec<String>>,
}

/// Tagged union of pointed states. World `w` of item `i` becomes `i:w`;
/// missing letters are false in the components that lack them.
pub fn disjoint_union(items: &[(&Model, State)]) -> Result<(Model, State), ModelError> {
    if items.is_empty() {
        return Err(ModelError::EmptyUnion);
    }
    let sig: BTreeSet<String> = items.iter().flat_map(|(m, _)| m.signature()).collect();
    let mut names = Vec::new();
    let mut edges = Vec::new();
    let mut valuation: BTreeMap<String, BTreeSet<usize>> = sig.iter().map(|p| (p.clone(), BTreeSet::new())).collect();
    let mut state = Vec::new();
    for (i, (m, s)) in items.iter().enumerate() {
        let offset = names.len();
        names.extend(m.names.iter().map(|n| format!("{i}:{n}")));
        edges.extend(m.edges().map(|(u, v)| (u + offset, v + offset)));
        for (p, ws) in &m.valuation {
            valuation.get_mut(p).expect("letter in union signature").extend(ws.iter().map(|w| w + offset));
        }
        state.extend(s.worlds().map(|w| w + offset));
    }
    let m = Model::new(names, edges, valuation)?;
    if !state.is_empty() {
        m.check_team_size()?;
    }
    Ok((m, State::from_worlds(state)))
}

fn numbered_worlds(m: usize) -> Vec<String> {
    (1..=m).map(|i| i.to_string()).collect()
}

fn model_from_bits(m: usize, sig: &[String], rel: u64, val: u64) -> Model {
    let edges = (0..m * m).filter(|b| rel >> b & 1 == 1).map(|b| (b / m, b % m));
    let valuation = sig
        .iter()
        .enumerate()
        .map(|(j, p)| (p.clone(), (0..m).filter(|w| val >> (j * m + w) & 1 == 1).collect()))
        .collect();
    Model::new(numbered_worlds(m), edges, valuation).expect("enumerated model is well formed")
}

/// Every model with worlds `1..=m` for `m` up to `max_worlds`, each exactly once,
/// ordered by size, then relation bits, then valuation bits.
pub fn enumerate_models(max_worlds: usize, sig: &BTreeSet<String>) -> impl Iterator<Item = Model> {
    let sig: Vec<String> = sig.iter().cloned().collect();
    assert!(max_worlds <= 4 && max_worlds * max_worlds + sig.len() * max_worlds < 64, "enumeration space too large");
    (1..=max_worlds).flat_map(move |m| {
        let sig = sig.clone();
        let vals = 1u64 << (sig.len() * m);
        (0..1u64 << (m * m)).flat_map(move |rel| {
            let sig = sig.clone();
            (0..vals).map(move |val| model_from_bits(m, &sig, rel, val))
        })
    })
}

/// The model at position `index` of `enumerate_models(max_worlds, sig)`.
pub fn model_at(max_worlds: usize, sig: &BTreeSet<String>, mut index: u64) -> Option<Model> {
    let sig: Vec<String> = sig.iter().cloned().collect();
    for m in 1..=max_worlds {
        let vals = 1u64 << (sig.len() * m);
        let block = (1u64 << (m * m)) * vals;
        if index < block {
            return Some(model_from_bits(m, &sig, index / vals, index % vals));
        }
        index -= block;
    }
    None
}

/// Number of models `enumerate_models` yields.
pub fn count_models(max_worlds: usize, sig_len: usize) -> u64 {
    (1..=max_worlds as u32).map(|m| 1u64 << (m * m) << (sig_len as u32 * m)).sum()
}

/// Model with `n` worlds whose edges and valuation are fair coin flips.
pub fn random_model(seed: u64, n: usize, sig: &BTreeSet<String>) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.max(1);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.random_bool(0.5) {
                edges.push((u, v));
            }
        }
    }
    let valuation = sig.iter().map(|p| (p.clone(), (0..n).filter(|_| rng.random_bool(0.5)).collect())).collect();
    Model::new(numbered_worlds(n), edges, valuation).expect("random model is well formed")
}

/// Uniformly random team of `m`.
pub fn random_state(seed: u64, m: &Model) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    State::from_worlds((0..m.len().min(MAX_TEAM_WORLDS)).filter(|_| rng.random_bool(0.5)))
}
