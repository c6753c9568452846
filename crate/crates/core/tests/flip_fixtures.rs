mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;

use idlex_core::counterfactual::{flip_report, read_predictions};
use serde_json::Value;
use support::fixture;

#[test]
fn report_reproduces_stored_differences() {
    let flips = fixture("flips");
    let load = |name: &str| read_predictions(File::open(flips.join(format!("{name}.jsonl"))).unwrap()).unwrap();
    let mut subgroups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for line in std::fs::read_to_string(flips.join("subgroups.jsonl")).unwrap().lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let groups = v["subgroups"].as_array().unwrap().iter().map(|g| g.as_str().unwrap().to_string()).collect();
        subgroups.insert(v["doc_id"].as_str().unwrap().to_string(), groups);
    }
    let expected: Value = serde_json::from_reader(File::open(flips.join("expected.json")).unwrap()).unwrap();
    let names: Vec<String> = expected["treated"].as_object().unwrap().keys().cloned().collect();
    let treated: Vec<_> = names.iter().map(|n| (n.clone(), load(n))).collect();
    let report = flip_report(&load("base"), &treated, &subgroups, 0.5).unwrap();

    assert_eq!(report.treated.len(), 3);
    for row in &report.treated {
        let want = &expected["treated"][&row.name];
        let near = |a: f64, b: &Value| (a - b.as_f64().unwrap()).abs() < 5e-5;
        assert!(near(row.diff_overall.unwrap(), &want["diff_overall"]), "{}", row.name);
        for (g, d) in want["diff_subgroups"].as_object().unwrap() {
            assert!(near(row.diff_subgroups[g], d), "{}/{g}", row.name);
        }
    }
}
