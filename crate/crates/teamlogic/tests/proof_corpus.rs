use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use serde_json::Value;
use teamlogic::decide::{refute_bounded_jobs, Status};
use teamlogic::proofcheck::{check_proof, Proof};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/proofs")
}

fn corpus() -> Vec<(String, Proof)> {
    let mut out: Vec<_> = fs::read_dir(root())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".proof.json"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let proof = Proof::from_json(&fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, proof)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn corpus_is_accepted() {
    let all = corpus();
    assert!(all.len() >= 20);
    for (name, proof) in &all {
        let report = check_proof(proof);
        assert!(report.accepted, "{name}: {:?}", report.diagnostics);
    }
}

#[test]
fn corpus_covers_every_system() {
    let systems: BTreeSet<_> = corpus().iter().map(|(_, p)| p.system.name()).collect();
    assert_eq!(systems.len(), 3);
}

#[test]
fn accepted_proofs_have_no_small_countermodel() {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    for (name, proof) in corpus() {
        let v = refute_bounded_jobs(&proof.premises, &proof.conclusion, 3, jobs).unwrap();
        assert!(matches!(v.status, Status::Inconclusive { .. }), "{name} has a countermodel");
    }
}

#[test]
fn proofs_round_trip() {
    for (name, proof) in corpus() {
        let again = Proof::from_json(&proof.to_json().to_string()).unwrap();
        assert_eq!(again, proof, "{name}");
    }
}

#[test]
fn mutations_are_rejected_with_expected_code() {
    let dir = root().join("mutations");
    let manifest: Vec<Value> = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.len() >= 10);
    for entry in manifest {
        let file = entry["file"].as_str().unwrap();
        let proof = Proof::from_json(&fs::read_to_string(dir.join(file)).unwrap()).unwrap();
        let report = check_proof(&proof);
        assert!(!report.accepted, "{file} was accepted");
        let code = entry["code"].as_str().unwrap();
        let hit = report.diagnostics.iter().any(|d| {
            d.code.name() == code && entry.get("condition").is_none_or(|c| d.condition.as_deref() == c.as_str())
        });
        assert!(hit, "{file}: expected {code} {:?}, got {:?}", entry.get("condition"), report.diagnostics);
    }
}
