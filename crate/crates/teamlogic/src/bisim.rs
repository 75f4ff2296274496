//! Bounded bisimulation by depth-indexed partition refinement.
//!
//! Cross-model questions are answered on the disjoint union of the two models.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::kripke::{disjoint_union, Model, ModelError, State};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("proposition `{0}` is missing from one of the models")]
    SignatureMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Worlds share an id iff they are `depth`-bisimilar over the chosen signature.
/// Ids are dense and assigned in a canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypePartition {
    pub depth: usize,
    pub ids: Vec<usize>,
    pub classes: usize,
}

impl TypePartition {
    pub fn same(&self, a: usize, b: usize) -> bool {
        self.ids[a] == self.ids[b]
    }

    /// Type ids present in a team.
    pub fn of_state(&self, s: State) -> BTreeSet<usize> {
        s.worlds().map(|w| self.ids[w]).collect()
    }

    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.classes];
        for (w, &id) in self.ids.iter().enumerate() {
            out[id].push(w);
        }
        out
    }
}

fn relabel<K: Ord + Clone>(keys: &[K]) -> (Vec<usize>, usize) {
    let order: BTreeMap<K, usize> =
        keys.iter().cloned().collect::<BTreeSet<_>>().into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    (keys.iter().map(|k| order[k]).collect(), order.len())
}

/// Partitions for depths `0..=k`; letters outside the model's signature count as false.
pub fn refine(m: &Model, k: usize, sig: &BTreeSet<String>) -> Vec<TypePartition> {
    let keys: Vec<Vec<bool>> = (0..m.len()).map(|w| sig.iter().map(|p| m.holds(p, w)).collect()).collect();
    let (ids, classes) = relabel(&keys);
    let mut levels = vec![TypePartition { depth: 0, ids, classes }];
    for depth in 1..=k {
        let prev = levels.last().expect("level 0 exists");
        let keys: Vec<(usize, BTreeSet<usize>)> =
            (0..m.len()).map(|w| (prev.ids[w], m.successors(w).iter().map(|&v| prev.ids[v]).collect())).collect();
        let (ids, classes) = relabel(&keys);
        levels.push(TypePartition { depth, ids, classes });
    }
    levels
}

/// The `k`-bisimulation partition of one model. Refinement stops as soon as
/// a round splits nothing; the stable partition is reported at depth `k`.
pub fn k_types(m: &Model, k: usize, sig: &BTreeSet<String>) -> TypePartition {
    let keys: Vec<Vec<bool>> = (0..m.len()).map(|w| sig.iter().map(|p| m.holds(p, w)).collect()).collect();
    let (mut ids, mut classes) = relabel(&keys);
    for _ in 0..k {
        let keys: Vec<(usize, BTreeSet<usize>)> =
            (0..m.len()).map(|w| (ids[w], m.successors(w).iter().map(|&v| ids[v]).collect())).collect();
        let (next, n) = relabel(&keys);
        if n == classes {
            break;
        }
        ids = next;
        classes = n;
    }
    TypePartition { depth: k, ids, classes }
}

fn check_sig(models: &[&Model], sig: &BTreeSet<String>) -> Result<(), BisimError> {
    for m in models {
        if let Some(p) = sig.iter().find(|p| !m.has_prop(p)) {
            return Err(BisimError::SignatureMismatch(p.clone()));
        }
    }
    Ok(())
}

fn joint_sig(a: &Model, b: &Model, sig: Option<&BTreeSet<String>>) -> Result<BTreeSet<String>, BisimError> {
    let sig = match sig {
        Some(s) => s.clone(),
        None => a.signature().union(&b.signature()).cloned().collect(),
    };
    check_sig(&[a, b], &sig)?;
    Ok(sig)
}

/// `w` in `a` and `w2` in `b` are `k`-bisimilar over `sig` (default: both signatures).
pub fn world_bisim(
    a: &Model,
    w: usize,
    b: &Model,
    w2: usize,
    k: usize,
    sig: Option<&BTreeSet<String>>,
) -> Result<bool, BisimError> {
    state_bisim(a, State::singleton(w), b, State::singleton(w2), k, sig)
}

/// Teams are `k`-bisimilar: every world of each has a `k`-bisimilar partner in the other.
pub fn state_bisim(
    a: &Model,
    s: State,
    b: &Model,
    s2: State,
    k: usize,
    sig: Option<&BTreeSet<String>>,
) -> Result<bool, BisimError> {
    let sig = joint_sig(a, b, sig)?;
    let (u, _) = disjoint_union(&[(a, State::EMPTY), (b, State::EMPTY)])?;
    let t = k_types(&u, k, &sig);
    let left: BTreeSet<usize> = s.worlds().map(|w| t.ids[w]).collect();
    let right: BTreeSet<usize> = s2.worlds().map(|w| t.ids[w + a.len()]).collect();
    Ok(left == right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn sig(ps: &[&str]) -> BTreeSet<String> {
        ps.iter().map(|p| p.to_string()).collect()
    }

    fn blank(n: usize, edges: &[(usize, usize)]) -> Model {
        let val = BTreeMap::from([("p".to_string(), BTreeSet::new())]);
        Model::new((0..n).map(|i| format!("w{i}")).collect(), edges.iter().copied(), val).unwrap()
    }

    #[test]
    fn loop_versus_chain() {
        let looped = blank(1, &[(0, 0)]);
        let chain = blank(2, &[(0, 1)]);
        assert!(world_bisim(&looped, 0, &chain, 0, 1, None).unwrap());
        assert!(!world_bisim(&looped, 0, &chain, 0, 2, None).unwrap());
        assert!(world_bisim(&looped, 0, &looped, 0, 5, None).unwrap());
    }

    #[test]
    fn empty_states() {
        let m = blank(1, &[]);
        assert!(state_bisim(&m, State::EMPTY, &m, State::EMPTY, 2, None).unwrap());
        assert!(!state_bisim(&m, State::EMPTY, &m, State(1), 2, None).unwrap());
    }

    #[test]
    fn valuation_classes() {
        let val =
            BTreeMap::from([("p".to_string(), BTreeSet::from([0, 2])), ("q".to_string(), BTreeSet::from([1, 2]))]);
        let m = Model::new((0..4).map(|i| format!("w{i}")).collect(), [], val).unwrap();
        assert_eq!(k_types(&m, 0, &sig(&["p", "q"])).classes, 4);
        assert_eq!(k_types(&m, 0, &sig(&["p"])).classes, 2);
        assert!(!world_bisim(&m, 0, &m, 1, 0, None).unwrap());
    }

    #[test]
    fn early_stop_matches_full_refinement() {
        let m = blank(3, &[(0, 1), (1, 2)]);
        let x = sig(&["p"]);
        let full = refine(&m, 6, &x);
        for (k, want) in full.iter().enumerate() {
            let t = k_types(&m, k, &x);
            assert_eq!(t.classes, want.classes);
            assert_eq!(t.depth, k);
            for a in 0..3 {
                for b in 0..3 {
                    assert_eq!(t.same(a, b), want.same(a, b));
                }
            }
        }
    }

    #[test]
    fn signature_mismatch() {
        let a = blank(1, &[]);
        let b = Model::new(vec!["v".into()], [], BTreeMap::new()).unwrap();
        assert!(matches!(world_bisim(&a, 0, &b, 0, 0, None), Err(BisimError::SignatureMismatch(_))));
        assert!(world_bisim(&a, 0, &b, 0, 1, Some(&sig(&[]))).unwrap());
    }
}
