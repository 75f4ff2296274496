use std::path::PathBuf;

use teamlogic::kripke::Model;
use teamlogic::teameval::{antisupports, supports};
use teamlogic::{parse, Formula};

fn model(name: &str) -> Model {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/models").join(name);
    Model::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn holds(m: &Model, state: &str, f: &str) -> bool {
    supports(m, m.resolve_state(state).unwrap(), &parse(f).unwrap()).unwrap()
}

fn enriched(f: &str) -> String {
    parse(f).unwrap().enrich().unwrap().to_string()
}

#[test]
fn zero_models_and_enrichment() {
    let m = model("fig2.json");
    assert!(holds(&m, "wq", "p | q"));
    assert!(!holds(&m, "wq", &enriched("p | q")));
    assert!(holds(&m, "pq", &enriched("p | q")));
    assert!(holds(&m, "w0", "<>(p | q)"));
    assert!(!holds(&m, "w0", &enriched("<>(p | q)")));
    assert!(holds(&m, "wpq", &enriched("<>(p | q)")));
}

#[test]
fn modal_judgments() {
    let b = model("fig3b.json");
    let cases = [
        ("<>q", true),
        ("<>p", false),
        ("[]q", false),
        ("[]p | []q", true),
        ("[](p \\/ q)", true),
        ("[]p \\/ []q", false),
        ("<>p & <>q", false),
        ("<>(p | q)", true),
        ("p | q", false),
    ];
    for (f, want) in cases {
        assert_eq!(holds(&b, "sb", f), want, "{f}");
    }
    let c = model("fig3c.json");
    assert!(holds(&c, "sc", "<>p & <>q"));
    assert!(holds(&c, "sc", &enriched("<>(p | q)")));
}

#[test]
fn global_disjunction_and_emptiness() {
    let m = model("fig2.json");
    let gd = "p & NE \\/ q & NE";
    let oc = "@(p & NE) | @(q & NE)";
    assert!(holds(&m, "wq", gd));
    assert!(!holds(&m, "pq", gd));
    assert!(holds(&m, "wq", oc));
    assert!(holds(&m, "pq", oc));
    assert!(holds(&m, "pq", "p & NE | q & NE"));
}

#[test]
fn diamond_not_antisupported_at_sb() {
    let b = model("fig3b.json");
    let f: Formula = parse("<>(p | q)").unwrap();
    assert!(!antisupports(&b, b.resolve_state("sb").unwrap(), &f).unwrap());
}

#[test]
fn successor_images() {
    let b = model("fig3b.json");
    let img = |s: &str| b.state_names(b.r_image(b.resolve_state(s).unwrap()));
    assert_eq!(img("wpq"), ["wp", "wpq"]);
    assert_eq!(img("w0"), ["wq"]);
}
