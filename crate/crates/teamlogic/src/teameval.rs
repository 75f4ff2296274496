//! Support and anti-support of formulas at teams, plus closure-property checks.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::kripke::{Model, ModelError, State};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("proposition `{0}` is not in the model's signature")]
    Signature(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node<A> {
    Atom(A),
    Neg(usize),
    And(usize, usize),
    Or(usize, usize),
    GOr(usize, usize),
    Dia(usize),
    Box(usize),
    Ne,
    Empty(usize),
    BotWeak,
    TopStrong,
    BotStrong,
}

impl<A> Node<A> {
    fn map<B>(self, atom: impl FnOnce(A) -> B, child: impl Fn(usize) -> usize) -> Node<B> {
        match self {
            Node::Atom(a) => Node::Atom(atom(a)),
            Node::Neg(a) => Node::Neg(child(a)),
            Node::And(a, b) => Node::And(child(a), child(b)),
            Node::Or(a, b) => Node::Or(child(a), child(b)),
            Node::GOr(a, b) => Node::GOr(child(a), child(b)),
            Node::Dia(a) => Node::Dia(child(a)),
            Node::Box(a) => Node::Box(child(a)),
            Node::Ne => Node::Ne,
            Node::Empty(a) => Node::Empty(child(a)),
            Node::BotWeak => Node::BotWeak,
            Node::TopStrong => Node::TopStrong,
            Node::BotStrong => Node::BotStrong,
        }
    }
}

/// Hash-consed formulas with symbolic atoms. Compile large formulas once and
/// `load` them into the evaluator of each model.
#[derive(Clone, Debug, Default)]
pub struct Compiled {
    atoms: Vec<String>,
    nodes: Vec<Node<usize>>,
    ids: HashMap<Node<usize>, usize>,
}

impl Compiled {
    pub fn new() -> Compiled {
        Compiled::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node index of `f`; pass it through the table returned by `Evaluator::load`.
    pub fn add(&mut self, f: &Formula) -> usize {
        let mut child = |g: &Formula| self.add(g);
        let node = match f {
            Formula::Atom(p) => {
                let i = match self.atoms.iter().position(|q| q == p) {
                    Some(i) => i,
                    None => {
                        self.atoms.push(p.clone());
                        self.atoms.len() - 1
                    }
                };
                Node::Atom(i)
            }
            Formula::Neg(a) => Node::Neg(child(a)),
            Formula::And(a, b) => Node::And(child(a), child(b)),
            Formula::TensorOr(a, b) => Node::Or(child(a), child(b)),
            Formula::GlobalOr(a, b) => Node::GOr(child(a), child(b)),
            Formula::Diamond(a) => Node::Dia(child(a)),
            Formula::Box(a) => Node::Box(child(a)),
            Formula::Ne => Node::Ne,
            Formula::Empty(a) => Node::Empty(child(a)),
            Formula::BotWeak => Node::BotWeak,
            Formula::TopStrong => Node::TopStrong,
            Formula::BotStrong => Node::BotStrong,
        };
        if let Some(&id) = self.ids.get(&node) {
            return id;
        }
        self.nodes.push(node);
        self.ids.insert(node, self.nodes.len() - 1);
        self.nodes.len() - 1
    }
}

/// Memoizing evaluator bound to one model. Subformulas are hash-consed, so
/// verdicts are shared between all formulas added to the same evaluator.
pub struct Evaluator<'m> {
    model: &'m Model,
    succ: Vec<State>,
    atoms: HashMap<String, u64>,
    nodes: Vec<Node<u64>>,
    ids: HashMap<Node<u64>, usize>,
    memo: HashMap<(u64, usize, bool), bool>,
    witness: HashMap<(u64, usize, bool), bool>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model) -> Result<Evaluator<'m>, EvalError> {
        model.check_team_size()?;
        let succ = (0..model.len()).map(|w| model.successor_state(w)).collect();
        let atoms = model
            .signature()
            .into_iter()
            .map(|p| {
                let mask = (0..model.len()).filter(|&w| model.holds(&p, w)).fold(0u64, |acc, w| acc | 1 << w);
                (p, mask)
            })
            .collect();
        Ok(Evaluator {
            model,
            succ,
            atoms,
            nodes: Vec::new(),
            ids: HashMap::new(),
            memo: HashMap::new(),
            witness: HashMap::new(),
        })
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    fn intern(&mut self, n: Node<u64>) -> usize {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        self.nodes.push(n);
        self.ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// Compiles `f` and returns a handle for `support`/`antisupport`.
    pub fn add(&mut self, f: &Formula) -> Result<usize, EvalError> {
        let node = match f {
            Formula::Atom(p) => Node::Atom(*self.atoms.get(p).ok_or_else(|| EvalError::Signature(p.clone()))?),
            Formula::Neg(a) => Node::Neg(self.add(a)?),
            Formula::And(a, b) => Node::And(self.add(a)?, self.add(b)?),
            Formula::TensorOr(a, b) => Node::Or(self.add(a)?, self.add(b)?),
            Formula::GlobalOr(a, b) => Node::GOr(self.add(a)?, self.add(b)?),
            Formula::Diamond(a) => Node::Dia(self.add(a)?),
            Formula::Box(a) => Node::Box(self.add(a)?),
            Formula::Ne => Node::Ne,
            Formula::Empty(a) => Node::Empty(self.add(a)?),
            Formula::BotWeak => Node::BotWeak,
            Formula::TopStrong => Node::TopStrong,
            Formula::BotStrong => Node::BotStrong,
        };
        Ok(self.intern(node))
    }

    /// Loads all of `c`; entry `i` of the result is the handle of compiled node `i`.
    pub fn load(&mut self, c: &Compiled) -> Result<Vec<usize>, EvalError> {
        let masks = c
            .atoms
            .iter()
            .map(|p| self.atoms.get(p).copied().ok_or_else(|| EvalError::Signature(p.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut handles = Vec::with_capacity(c.nodes.len());
        for n in &c.nodes {
            let n = n.map(|a| masks[a], |i| handles[i]);
            handles.push(self.intern(n));
        }
        Ok(handles)
    }

    pub fn support(&mut self, s: State, id: usize) -> bool {
        self.eval(s.0, id, true)
    }

    pub fn antisupport(&mut self, s: State, id: usize) -> bool {
        self.eval(s.0, id, false)
    }

    fn eval(&mut self, s: u64, id: usize, pos: bool) -> bool {
        if let Some(&v) = self.memo.get(&(s, id, pos)) {
            return v;
        }
        let v = match (self.nodes[id], pos) {
            (Node::Atom(v), true) => s & !v == 0,
            (Node::Atom(v), false) => s & v == 0,
            (Node::Ne, true) => s != 0,
            (Node::Ne, false) => s == 0,
            (Node::BotWeak, true) => s == 0,
            (Node::BotWeak, false) => true,
            (Node::TopStrong, true) => true,
            (Node::TopStrong, false) => s == 0,
            (Node::BotStrong, true) => false,
            (Node::BotStrong, false) => true,
            (Node::Neg(a), _) => self.eval(s, a, !pos),
            (Node::And(a, b), true) | (Node::Or(a, b), false) | (Node::GOr(a, b), false) => {
                self.eval(s, a, pos) && self.eval(s, b, pos)
            }
            (Node::And(a, b), false) | (Node::Or(a, b), true) => self.cover(s, a, b, pos),
            (Node::GOr(a, b), true) => self.eval(s, a, true) || self.eval(s, b, true),
            (Node::Dia(a), true) | (Node::Box(a), false) => self.each_world(s, |ev, w| ev.some_nonempty_sub(w, a, pos)),
            (Node::Dia(a), false) | (Node::Box(a), true) => self.each_world(s, |ev, w| {
                let r = ev.succ[w].0;
                ev.eval(r, a, pos)
            }),
            (Node::Empty(a), true) => s == 0 || self.eval(s, a, true),
            (Node::Empty(a), false) => self.eval(s, a, false),
        };
        self.memo.insert((s, id, pos), v);
        v
    }

    fn each_world(&mut self, s: u64, mut f: impl FnMut(&mut Self, usize) -> bool) -> bool {
        State(s).worlds().all(|w| f(self, w))
    }

    /// Some nonempty `t` within `R[w]` has the verdict `pos` for node `a`.
    fn some_nonempty_sub(&mut self, w: usize, a: usize, pos: bool) -> bool {
        let r = self.succ[w].0;
        if let Some(&v) = self.witness.get(&(r, a, pos)) {
            return v;
        }
        let v = State(r).subsets().skip(1).any(|t| self.eval(t.0, a, pos));
        self.witness.insert((r, a, pos), v);
        v
    }

    /// Whether `s = t ∪ u` for some `t` with verdict `pos` on `a` and `u` with
    /// verdict `pos` on `b`. The parts may overlap.
    fn cover(&mut self, s: u64, a: usize, b: usize, pos: bool) -> bool {
        for t in State(s).subsets() {
            if !self.eval(t.0, a, pos) {
                continue;
            }
            let rest = s & !t.0;
            for extra in t.subsets() {
                if self.eval(rest | extra.0, b, pos) {
                    return true;
                }
            }
        }
        false
    }
}

pub fn supports(m: &Model, s: State, f: &Formula) -> Result<bool, EvalError> {
    let mut ev = Evaluator::new(m)?;
    let id = ev.add(f)?;
    Ok(ev.support(s, id))
}

pub fn antisupports(m: &Model, s: State, f: &Formula) -> Result<bool, EvalError> {
    let mut ev = Evaluator::new(m)?;
    let id = ev.add(f)?;
    Ok(ev.antisupport(s, id))
}

/// Support of `f`, or anti-support when `anti` is set.
pub fn judge(m: &Model, s: State, f: &Formula, anti: bool) -> Result<bool, EvalError> {
    if anti {
        antisupports(m, s, f)
    } else {
        supports(m, s, f)
    }
}

/// Every state of `m` that supports all of `premises` also supports `conclusion`.
pub fn entails_on(m: &Model, premises: &[Formula], conclusion: &Formula) -> Result<bool, EvalError> {
    Ok(first_failure(m, premises, conclusion)?.is_none())
}

/// First state (in bitmask order) supporting the premises but not the conclusion.
pub fn first_failure(m: &Model, premises: &[Formula], conclusion: &Formula) -> Result<Option<State>, EvalError> {
    let mut ev = Evaluator::new(m)?;
    let ps = premises.iter().map(|p| ev.add(p)).collect::<Result<Vec<_>, _>>()?;
    let c = ev.add(conclusion)?;
    Ok(m.states().find(|&s| ps.iter().all(|&p| ev.support(s, p)) && !ev.support(s, c)))
}

/// Closure properties of a formula's support set on one model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub downward: bool,
    pub union: bool,
    pub empty_state: bool,
    pub flat: bool,
}

pub fn closure_report(m: &Model, f: &Formula) -> Result<ClosureReport, EvalError> {
    let mut ev = Evaluator::new(m)?;
    let id = ev.add(f)?;
    let supporting: Vec<State> = m.states().filter(|&s| ev.support(s, id)).collect();
    let is_supported = |s: State| supporting.binary_search(&s).is_ok();
    let downward = supporting.iter().all(|s| s.subsets().all(is_supported));
    let union = supporting.iter().all(|a| supporting.iter().all(|b| is_supported(a.union(*b))));
    let empty_state = is_supported(State::EMPTY);
    let flat = m.states().all(|s| is_supported(s) == s.worlds().all(|w| is_supported(State::singleton(w))));
    Ok(ClosureReport { downward, union, empty_state, flat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use std::collections::{BTreeMap, BTreeSet};

    fn model(n: usize, edges: &[(usize, usize)], p: &[usize], q: &[usize]) -> Model {
        let mut val = BTreeMap::new();
        val.insert("p".to_string(), p.iter().copied().collect::<BTreeSet<_>>());
        val.insert("q".to_string(), q.iter().copied().collect::<BTreeSet<_>>());
        Model::new((0..n).map(|i| format!("w{i}")).collect(), edges.iter().copied(), val).unwrap()
    }

    fn sup(m: &Model, s: &[usize], f: &str) -> bool {
        supports(m, State::from_worlds(s.iter().copied()), &parse(f).unwrap()).unwrap()
    }

    #[test]
    fn split_disjunction_uses_covers() {
        let m = model(2, &[], &[0], &[1]);
        assert!(sup(&m, &[0, 1], "p | q"));
        assert!(!sup(&m, &[0, 1], "p \\/ q"));
        assert!(sup(&m, &[1], "p | q"));
        assert!(!sup(&m, &[1], "(p & NE) | (q & NE)"));
        assert!(sup(&m, &[0, 1], "(p & NE) | (q & NE)"));
    }

    #[test]
    fn overlapping_covers_matter() {
        // Both parts must be nonempty and share world 0 to cover a singleton.
        let m = model(1, &[], &[0], &[0]);
        assert!(sup(&m, &[0], "(p & NE) | (q & NE)"));
    }

    #[test]
    fn constants() {
        let m = model(1, &[], &[], &[]);
        let f = |s: &str| parse(s).unwrap();
        for (c, sup_empty, sup_full, anti_empty, anti_full) in [
            ("bot", true, false, true, true),
            ("Top", true, true, true, false),
            ("Bot", false, false, true, true),
            ("NE", false, true, true, false),
        ] {
            assert_eq!(supports(&m, State::EMPTY, &f(c)).unwrap(), sup_empty, "{c}");
            assert_eq!(supports(&m, State(1), &f(c)).unwrap(), sup_full, "{c}");
            assert_eq!(antisupports(&m, State::EMPTY, &f(c)).unwrap(), anti_empty, "{c}");
            assert_eq!(antisupports(&m, State(1), &f(c)).unwrap(), anti_full, "{c}");
        }
    }

    #[test]
    fn modalities() {
        // w0 -> w1 (p), w0 -> w2 (q), w3 has no successors.
        let m = model(4, &[(0, 1), (0, 2)], &[1], &[2]);
        assert!(sup(&m, &[0], "<>p & <>q"));
        assert!(sup(&m, &[0], "[](p | q)"));
        assert!(!sup(&m, &[0], "[]p"));
        assert!(!sup(&m, &[3], "<>p"));
        assert!(sup(&m, &[3], "[]bot"));
        assert!(!sup(&m, &[3], "[]Bot"));
        assert!(sup(&m, &[], "<>Bot"));
    }

    #[test]
    fn signature_is_strict() {
        let m = model(1, &[], &[], &[]);
        assert_eq!(supports(&m, State::EMPTY, &parse("r").unwrap()), Err(EvalError::Signature("r".into())));
    }

    #[test]
    fn closure_flags() {
        let m = model(2, &[], &[0], &[1]);
        let r = closure_report(&m, &parse("NE").unwrap()).unwrap();
        assert!(r.union && !r.empty_state && !r.flat);
        let r = closure_report(&m, &parse("p \\/ ~p").unwrap()).unwrap();
        assert!(!r.union && r.downward);
        let r = closure_report(&m, &parse("p | ~q").unwrap()).unwrap();
        assert!(r.union && r.downward && r.empty_state && r.flat);
    }

    #[test]
    fn single_model_entailment() {
        let m = model(1, &[(0, 0)], &[0], &[]);
        let f = |s: &str| parse(s).unwrap();
        assert!(entails_on(&m, &[f("p")], &f("p")).unwrap());
        assert!(!entails_on(&m, &[f("p")], &f("p | NE")).unwrap());
        assert_eq!(first_failure(&m, &[f("p")], &f("p | NE")).unwrap(), Some(State::EMPTY));
    }

    #[test]
    fn compiled_formulas_load_per_model() {
        let fs: Vec<Formula> =
            ["<>(p | q) & NE", "~[](p \\/ @q)", "p | ~p", "<>(p | q)"].iter().map(|s| parse(s).unwrap()).collect();
        let mut c = Compiled::new();
        let ids: Vec<usize> = fs.iter().map(|f| c.add(f)).collect();
        assert_eq!(ids[0], c.add(&fs[3]) + 2, "shared subformulas are reused");
        for m in [model(2, &[(0, 1), (1, 1)], &[1], &[0]), model(3, &[(0, 1), (0, 2)], &[1], &[2])] {
            let mut ev = Evaluator::new(&m).unwrap();
            let handles = ev.load(&c).unwrap();
            for (f, &i) in fs.iter().zip(&ids) {
                for s in m.states() {
                    assert_eq!(ev.support(s, handles[i]), supports(&m, s, f).unwrap(), "{f}");
                    assert_eq!(ev.antisupport(s, handles[i]), antisupports(&m, s, f).unwrap(), "{f}");
                }
            }
        }
        let mut other = Compiled::new();
        other.add(&parse("r").unwrap());
        let m = model(1, &[], &[], &[]);
        assert!(Evaluator::new(&m).unwrap().load(&other).is_err());
    }
}
