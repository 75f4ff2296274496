//! Test-side helpers: a direct transcription of the support clauses over
//! plain bitmasks, kept independent of the memoizing evaluator.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use teamlogic::kripke::{random_model, Model, State};
use teamlogic::{Formula, Tier};

fn subsets(mask: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut t = mask;
    loop {
        out.push(t);
        if t == 0 {
            break;
        }
        t = (t - 1) & mask;
    }
    out
}

/// Every pair (t, u) with t ∪ u = s.
fn covers(s: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for t in subsets(s) {
        for extra in subsets(t) {
            out.push((t, (s & !t) | extra));
        }
    }
    out
}

fn worlds(s: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |w| s >> w & 1 == 1)
}

fn succ(m: &Model, w: usize) -> u64 {
    m.successors(w).iter().fold(0, |acc, &v| acc | 1 << v)
}

pub fn sup(m: &Model, s: u64, f: &Formula) -> bool {
    use Formula::*;
    match f {
        Atom(p) => worlds(s).all(|w| m.holds(p, w)),
        Neg(a) => anti(m, s, a),
        And(a, b) => sup(m, s, a) && sup(m, s, b),
        TensorOr(a, b) => covers(s).into_iter().any(|(t, u)| sup(m, t, a) && sup(m, u, b)),
        GlobalOr(a, b) => sup(m, s, a) || sup(m, s, b),
        Diamond(a) => worlds(s).all(|w| subsets(succ(m, w)).into_iter().any(|t| t != 0 && sup(m, t, a))),
        Box(a) => worlds(s).all(|w| sup(m, succ(m, w), a)),
        Ne => s != 0,
        Empty(a) => s == 0 || sup(m, s, a),
        BotWeak => s == 0,
        TopStrong => true,
        BotStrong => false,
    }
}

pub fn anti(m: &Model, s: u64, f: &Formula) -> bool {
    use Formula::*;
    match f {
        Atom(p) => worlds(s).all(|w| !m.holds(p, w)),
        Neg(a) => sup(m, s, a),
        And(a, b) => covers(s).into_iter().any(|(t, u)| anti(m, t, a) && anti(m, u, b)),
        TensorOr(a, b) | GlobalOr(a, b) => anti(m, s, a) && anti(m, s, b),
        Diamond(a) => worlds(s).all(|w| anti(m, succ(m, w), a)),
        Box(a) => worlds(s).all(|w| subsets(succ(m, w)).into_iter().any(|t| t != 0 && anti(m, t, a))),
        Ne => s == 0,
        Empty(a) => anti(m, s, a),
        BotWeak => true,
        TopStrong => s == 0,
        BotStrong => true,
    }
}

pub fn sig(ps: &[&str]) -> BTreeSet<String> {
    ps.iter().map(|p| p.to_string()).collect()
}

/// Seeded random formula with exactly `size` nodes.
pub fn formula(seed: u64, size: usize, props: &[&str], tier: Tier) -> Formula {
    let props: Vec<String> = props.iter().map(|p| p.to_string()).collect();
    Formula::random(&mut ChaCha8Rng::seed_from_u64(seed), size, &props, tier)
}

/// Seeded random model with 1..=max_worlds worlds.
pub fn model(seed: u64, max_worlds: usize, props: &[&str]) -> Model {
    random_model(seed, 1 + (seed as usize >> 7) % max_worlds, &sig(props))
}

pub fn all_states(m: &Model) -> Vec<State> {
    m.states().collect()
}
