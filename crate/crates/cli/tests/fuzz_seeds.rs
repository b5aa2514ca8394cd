//! Every checked-in fuzz seed is a valid input for its target.

use std::path::Path;

fn seeds(target: &str) -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn seeds_parse() {
    for s in seeds("puiseux_literal") {
        germlens_puiseux::parse_puiseux(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
    }
    for s in seeds("expr_parse") {
        germlens::expr::Expr::parse(&s, &["x", "y", "z"]).unwrap_or_else(|e| panic!("{s}: {e}"));
    }
    for s in seeds("germ_config_json") {
        germlens::config::GermSpec::from_json(&s).and_then(|g| g.build()).unwrap_or_else(|e| panic!("{s}: {e}"));
    }
    for s in seeds("map_config_json") {
        germlens::config::MapSpec::from_json(&s).and_then(|m| m.build()).unwrap_or_else(|e| panic!("{s}: {e}"));
    }
    for s in seeds("experiment_config") {
        germlens_cli::ExperimentConfig::from_json(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
    }
}
