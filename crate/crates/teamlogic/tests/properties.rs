mod common;

use common::{anti, formula, model, sig, sup};
use proptest::prelude::*;
use teamlogic::bisim::{state_bisim, world_bisim};
use teamlogic::decide::{refute_bounded, Status};
use teamlogic::hintikka::{chi_world, nf_bsmli, nf_bsmlo, nf_ml, theta_state, Budget};
use teamlogic::kripke::{count_models, random_state, Model, State};
use teamlogic::proofcheck::{check_proof, Proof};
use teamlogic::teameval::{antisupports, closure_report, supports, Evaluator};
use teamlogic::{parse, Formula, Tier};

const PQ: &[&str] = &["p", "q"];

fn tier_of(i: u8) -> Tier {
    [Tier::Ml, Tier::Bsml, Tier::Bsmlo, Tier::Bsmli, Tier::Full][i as usize % 5]
}

fn agree_everywhere(m: &Model, a: &Formula, b: &Formula, strong: bool) -> bool {
    let mut ev = Evaluator::new(m).unwrap();
    let (x, y) = (ev.add(a).unwrap(), ev.add(b).unwrap());
    m.states()
        .all(|s| ev.support(s, x) == ev.support(s, y) && (!strong || ev.antisupport(s, x) == ev.antisupport(s, y)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn evaluator_matches_oracle(seed in any::<u64>(), size in 1usize..9, t in 0u8..5) {
        let m = model(seed, 3, PQ);
        let f = formula(seed, size, PQ, tier_of(t));
        for s in m.states() {
            prop_assert_eq!(supports(&m, s, &f).unwrap(), sup(&m, s.0, &f), "support {} at {:?}", f, s);
            prop_assert_eq!(antisupports(&m, s, &f).unwrap(), anti(&m, s.0, &f), "anti-support {} at {:?}", f, s);
        }
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), size in 1usize..14, t in 0u8..5) {
        let f = formula(seed, size, &["p", "q", "r"], tier_of(t));
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn nnf_preserves_meaning(seed in any::<u64>(), size in 1usize..8, t in 0u8..5) {
        let m = model(seed, 3, PQ);
        let f = formula(seed, size, PQ, tier_of(t));
        let n = f.nnf();
        let strong = f.is_gdis_free() && f.is_empty_free();
        prop_assert!(agree_everywhere(&m, &f, &n, strong), "{} vs {}", f, n);
        // negations sit only on atoms and NE
        let mut stack = vec![&n];
        while let Some(g) = stack.pop() {
            if let Formula::Neg(a) = g {
                prop_assert!(matches!(**a, Formula::Atom(_) | Formula::Ne), "{}", n);
            }
            stack.extend(g.children());
        }
    }

    #[test]
    fn bisimilar_states_agree(seed in any::<u64>(), size in 1usize..7, t in 0u8..5) {
        let a = model(seed, 3, PQ);
        let b = model(seed.rotate_left(17), 3, PQ);
        let f = formula(seed, size, PQ, tier_of(t));
        let k = f.modal_depth();
        for s in a.states() {
            for s2 in b.states() {
                if state_bisim(&a, s, &b, s2, k, None).unwrap() {
                    prop_assert_eq!(supports(&a, s, &f).unwrap(), supports(&b, s2, &f).unwrap());
                    prop_assert_eq!(antisupports(&a, s, &f).unwrap(), antisupports(&b, s2, &f).unwrap());
                }
            }
        }
    }

    #[test]
    fn hintikka_characterizes_bisimulation(seed in any::<u64>(), k in 0usize..3) {
        let a = model(seed, 3, &["p"]);
        let b = model(seed ^ 0x5555, 3, &["p"]);
        let x = sig(&["p"]);
        for w in 0..a.len() {
            let chi = chi_world(&a, w, k, &x);
            for v in 0..b.len() {
                let holds = supports(&b, State::singleton(v), &chi).unwrap();
                prop_assert_eq!(holds, world_bisim(&a, w, &b, v, k, Some(&x)).unwrap());
            }
        }
        let s = random_state(seed, &a);
        let theta = theta_state(&a, s, k, &x);
        for s2 in b.states() {
            prop_assert_eq!(supports(&b, s2, &theta).unwrap(), state_bisim(&a, s, &b, s2, k, Some(&x)).unwrap());
        }
    }

    #[test]
    fn normal_forms_are_equivalent(seed in any::<u64>(), size in 1usize..6) {
        let x = sig(&["p"]);
        let b = Budget::default();
        let m = model(seed, 3, &["p"]);
        let f = formula(seed, size, &["p"], Tier::Bsmli);
        if f.modal_depth() <= 1 {
            let nf = nf_bsmli(&f, 1, &x, &b).unwrap();
            prop_assert!(agree_everywhere(&m, &f, &nf, false), "{} vs {}", f, nf);
        }
        let g = formula(seed, size, &["p"], Tier::Bsmlo);
        if g.modal_depth() <= 1 {
            let nf = nf_bsmlo(&g, 1, &x, &b).unwrap();
            prop_assert!(agree_everywhere(&m, &g, &nf, false), "{} vs {}", g, nf);
        }
        let h = formula(seed, size, &["p"], Tier::Ml);
        if h.modal_depth() <= 1 {
            let nf = nf_ml(&h, 1, &x, &b).unwrap();
            prop_assert!(agree_everywhere(&m, &h, &nf, false), "{} vs {}", h, nf);
        }
    }

    #[test]
    fn classical_formulas_are_flat(seed in any::<u64>(), size in 1usize..8) {
        let m = model(seed, 3, PQ);
        let f = formula(seed, size, PQ, Tier::Ml);
        let r = closure_report(&m, &f).unwrap();
        prop_assert!(r.flat && r.downward && r.union && r.empty_state, "{}", f);
    }

    #[test]
    fn ne_free_formulas_are_downward_closed(seed in any::<u64>(), size in 1usize..8) {
        let m = model(seed, 3, PQ);
        let f = formula(seed, size, PQ, Tier::Bsmlo);
        if f.is_ne_free() {
            prop_assert!(closure_report(&m, &f).unwrap().downward, "{}", f);
        }
    }

    #[test]
    fn enrichment_rules_out_the_empty_state(seed in any::<u64>(), size in 1usize..8) {
        let m = model(seed, 3, PQ);
        let f = formula(seed, size, PQ, Tier::Ml);
        let e = f.enrich().unwrap();
        prop_assert!(!supports(&m, State::EMPTY, &e).unwrap(), "{}", e);
        prop_assert!(e.tier() <= Tier::Bsml);
    }

    #[test]
    fn countermodels_replay(seed in any::<u64>(), size in 1usize..6) {
        let p = formula(seed, size, PQ, Tier::Full);
        let c = formula(seed.wrapping_mul(31), size, PQ, Tier::Full);
        let v = refute_bounded(std::slice::from_ref(&p), &c, 2).unwrap();
        if let Status::Countermodel { model, state } = &v.status {
            prop_assert!(sup(model, state.0, &p) && !sup(model, state.0, &c));
        } else {
            let letters = p.props().union(&c.props()).count();
            prop_assert_eq!(v.models, count_models(2, letters));
        }
    }
}

/// A double-line rule applied downwards then upwards restores the premise.
fn double_line(rule: &str, system: &str, top: &Formula, bottom: &Formula) {
    let proof = serde_json::json!({
        "system": system,
        "premises": [top.to_string()],
        "lines": [
            {"id": 1, "formula": bottom.to_string(), "rule": rule, "refs": [0]},
            {"id": 2, "formula": top.to_string(), "rule": rule, "refs": [1], "aux": {"dir": "rev"}}
        ],
        "conclusion": top.to_string()
    });
    let proof = Proof::from_json(&proof.to_string()).unwrap();
    let report = check_proof(&proof);
    assert!(report.accepted, "{rule}: {top} / {bottom}: {:?}", report.diagnostics);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn double_line_rules_are_involutive(seed in any::<u64>(), size in 1usize..5) {
        use Formula as F;
        let a = formula(seed, size, PQ, Tier::Bsml);
        let b = formula(seed ^ 1, size, PQ, Tier::Bsml);
        let n = |f: &F| F::neg(f.clone());
        let cases = [
            ("NegNegE", "BSML", n(&n(&a)), a.clone()),
            ("DMAnd", "BSML", n(&F::and(a.clone(), b.clone())), F::or(n(&a), n(&b))),
            ("DMOr", "BSML", n(&F::or(a.clone(), b.clone())), F::and(n(&a), n(&b))),
            ("InterDiaBox", "BSML", n(&F::dia(a.clone())), F::boxed(n(&a))),
            ("NegNeE", "BSML", n(&F::Ne), F::BotWeak),
            ("BotDef", "BSML", F::and(F::BotWeak, F::Ne), F::BotStrong),
            ("DMGOr", "BSMLI", n(&F::gor(a.clone(), b.clone())), F::and(n(&a), n(&b))),
            ("ConvDiaGOrOr", "BSMLI", F::dia(F::gor(a.clone(), b.clone())), F::or(F::dia(a.clone()), F::dia(b.clone()))),
            ("ConvBoxGOrOr", "BSMLI", F::boxed(F::gor(a.clone(), b.clone())), F::or(F::boxed(a.clone()), F::boxed(b.clone()))),
            ("NegOE", "BSMLO", n(&F::empty(a.clone())), n(&a)),
        ];
        for (rule, system, top, bottom) in &cases {
            double_line(rule, system, top, bottom);
            // both readings are sound
            let m = model(seed, 3, PQ);
            prop_assert!(agree_everywhere(&m, top, bottom, false), "{}: {} / {}", rule, top, bottom);
        }
    }

    #[test]
    fn checking_is_deterministic(seed in any::<u64>()) {
        let names = ["dia_ne_bsmli", "ne_disjunct_bsml", "emptiness_cancels_ne"];
        let name = names[seed as usize % names.len()];
        let path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures/proofs")
            .join(format!("{name}.proof.json"));
        let proof = Proof::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
        let first = serde_json::to_string(&check_proof(&proof)).unwrap();
        prop_assert_eq!(first, serde_json::to_string(&check_proof(&proof.clone())).unwrap());
    }
}
