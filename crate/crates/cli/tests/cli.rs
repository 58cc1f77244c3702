use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn feyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feyn")).args(args).output().expect("the binary runs")
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

/// Validates `instance` against a shipped schema, resolving references
/// between schema files.
fn assert_schema(schema: &str, instance: &Value) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas");
    let mut options = jsonschema::options();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let file = entry.unwrap().path();
        let contents: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
        let id = contents["$id"].as_str().unwrap().to_string();
        options = options.with_resource(id, jsonschema::Resource::from_contents(contents).unwrap());
    }
    let root: Value = serde_json::from_str(&std::fs::read_to_string(dir.join(schema)).unwrap()).unwrap();
    let validator = options.build(&root).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}\n{instance:#}");
}

fn run_ok(schema: &str, args: &[&str]) -> Value {
    let out = feyn(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_schema(schema, &v);
    v
}

#[test]
fn star_has_two_self_maps() {
    let star = path("star.json");
    let v = run_ok("homs.schema.json", &["homs", "--from", &star, "--to", &star]);
    assert_eq!(v, serde_json::json!({"count": 2}));
    let listed = run_ok("homs.schema.json", &["homs", "--from", &star, "--to", &star, "--list"]);
    assert_eq!(listed["maps"].as_array().unwrap().len(), 2);
    let c3 = path("corolla3.json");
    assert_eq!(run_ok("homs.schema.json", &["homs", "--from", &star, "--to", &c3])["count"], 6);
    assert_eq!(run_ok("homs.schema.json", &["homs", "--from", &c3, "--to", &star])["count"], 0);
}

#[test]
fn invalid_graph_exits_with_input_error() {
    let out = feyn(&["validate", "--graph", &path("bad.json")]);
    assert_eq!(out.status.code(), Some(2));
    let report = stdout_json(&out);
    assert_schema("validate.schema.json", &report);
    assert_eq!(report["valid"], false);
    assert_eq!(report["errors"][0]["code"], "InvolutionHasFixpoint");
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_schema("error.schema.json", &err);
    assert_eq!(err["error"], "invalid_graph");
}

#[test]
fn graph_commands_follow_their_schemas() {
    for g in ["star.json", "corolla3.json", "bubble.json", "dumbbell.json"] {
        let p = path(g);
        let v = run_ok("validate.schema.json", &["validate", "--graph", &p, "--canon"]);
        let c = run_ok("canon.schema.json", &["canon", "--graph", &p]);
        assert_eq!(v["hash"], c["hash"]);
        assert_eq!(v["canonical"], c["canonical"]);
        run_ok("dot.schema.json", &["dot", "--graph", &p]);
        run_ok("aut.schema.json", &["aut", "--graph", &p]);
    }
    let bubble = path("bubble.json");
    assert_eq!(run_ok("aut.schema.json", &["aut", "--graph", &bubble])["order"], 4);
    assert_eq!(run_ok("aut.schema.json", &["aut", "--graph", &bubble, "--fix-ports"])["order"], 2);
}

#[test]
fn canonical_hash_is_independent_of_labels() {
    // the bubble with its vertices and edges listed in another order
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("bubble2.json");
    std::fs::write(
        &other,
        r#"{"arcs": 8, "involution": [1, 0, 3, 2, 5, 4, 7, 6],
            "vertices": 2, "flags": [[3, 1], [1, 0], [5, 1], [2, 0], [6, 1], [4, 0]]}"#,
    )
    .unwrap();
    let a = run_ok("canon.schema.json", &["canon", "--graph", &path("bubble.json")]);
    let b = run_ok("canon.schema.json", &["canon", "--graph", other.to_str().unwrap()]);
    assert_eq!(a, b);
}

#[test]
fn dot_output_mode() {
    let out = feyn(&["--format", "dot", "canon", "--graph", &path("corolla3.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("graph {"));
    let out = feyn(&["--format", "dot", "homs", "--from", &path("star.json"), "--to", &path("star.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn summary_output_mode() {
    let out = feyn(&["--format", "summary", "homs", "--from", &path("star.json"), "--to", &path("star.json")]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2 etale maps");
}

#[test]
fn species_commands() {
    let qed = path("qed.json");
    let doc = run_ok("species.schema.json", &["species", "--species", &qed]);
    assert_eq!(doc, run_ok("species.schema.json", &["species", "--species", "builtin:qed"]));
    let v = run_ok("eval.schema.json", &["eval", "--species", &qed, "--graph", &path("corolla3.json")]);
    assert_eq!(v["count"], 6);
    let v = run_ok("eval.schema.json", &["eval", "--species", &qed, "--graph", &path("dumbbell.json")]);
    assert_eq!(v["count"], 4);
    let v = run_ok("free.schema.json", &["free", "--species", &qed, "--arity", "2"]);
    assert_eq!(v["count"], 8);
    let v = run_ok("enumerate.schema.json", &["enumerate", "--arity", "2"]);
    assert_eq!(v["count"], 12);
}

#[test]
fn laws_pass_on_qed() {
    let v = run_ok(
        "laws.schema.json",
        &["laws", "--species", &path("qed.json"), "--samples", "100", "--seed", "42"],
    );
    assert_eq!(v["pass"], true);
    assert_eq!(v["associativity"]["passed"], 100);
}

#[test]
fn algebra_passes() {
    let v = run_ok("algebra.schema.json", &["algebra", "--species", "builtin:qed", "--samples", "20"]);
    assert_eq!(v["pass"], true);
}

#[test]
fn nerve_round_trips_through_segal() {
    let nerve = run_ok("presheaf.schema.json", &["nerve", "--species", "builtin:qed"]);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("nerve.json");
    std::fs::write(&file, serde_json::to_string(&nerve).unwrap()).unwrap();
    let v = run_ok("segal.schema.json", &["segal", "--presheaf", file.to_str().unwrap()]);
    assert_eq!(v["pass"], true);
    let direct = run_ok("segal.schema.json", &["segal", "--species", "builtin:qed"]);
    assert_eq!(direct, v);

    // change one restriction entry: the check must fail with exit code 1
    let mut broken = nerve.clone();
    let restrictions = broken["restrictions"].as_array_mut().unwrap();
    let r = restrictions
        .iter_mut()
        .find(|r| nerve["graphs"][r["from"].as_str().unwrap()]["size"].as_u64().unwrap() > 1 && !r["table"].as_array().unwrap().is_empty())
        .unwrap();
    let size = nerve["graphs"][r["from"].as_str().unwrap()]["size"].as_u64().unwrap();
    let entry = &mut r["table"][0];
    *entry = Value::from((entry.as_u64().unwrap() + 1) % size);
    std::fs::write(&file, serde_json::to_string(&broken).unwrap()).unwrap();
    let out = feyn(&["segal", "--presheaf", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_schema("segal.schema.json", &v);
    assert_eq!(v["pass"], false);
}

#[test]
fn nerve_over_a_directory_of_graphs() {
    let dir = tempfile::tempdir().unwrap();
    for g in ["star.json", "corolla3.json", "bubble.json"] {
        std::fs::copy(data(g), dir.path().join(g)).unwrap();
    }
    let universe = dir.path().to_str().unwrap();
    let doc = run_ok("presheaf.schema.json", &["nerve", "--species", "builtin:qed", "--universe", universe]);
    assert_eq!(doc["graphs"].as_object().unwrap().len(), 3);
    let v = run_ok(
        "segal.schema.json",
        &["nerve", "--species", "builtin:qed", "--universe", universe, "--segal", "--max-inner", "2"],
    );
    assert_eq!(v["pass"], true);
    let out = feyn(&["nerve", "--species", "builtin:qed", "--universe", "/nonexistent"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn factorization_of_a_refinement() {
    let k = path("kleisli_bubble.json");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&k).unwrap()).unwrap();
    assert_schema("kleisli.schema.json", &doc);
    let v = run_ok("factor.schema.json", &["factor", "--kleisli", &k, "--search"]);
    assert_eq!(v["composite_equal"], true);
    assert_eq!(v["search"]["unique"], true);
    assert_eq!(v["search"]["middles"].as_array().unwrap().len(), 1);
}

#[test]
fn input_documents_follow_their_schemas() {
    for g in ["star.json", "corolla3.json", "bubble.json", "dumbbell.json", "bad.json"] {
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(data(g)).unwrap()).unwrap();
        assert_schema("graph.schema.json", &doc);
    }
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(data("qed.json")).unwrap()).unwrap();
    assert_schema("species.schema.json", &doc);
}

#[test]
fn missing_files_are_reported_first() {
    let out = feyn(&["eval", "--species", "builtin:qed", "--graph", "/nonexistent/graph.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_schema("error.schema.json", &err);
    assert_eq!(err["error"], "missing_file");
}

#[test]
fn usage_errors_print_the_grammar() {
    let out = feyn(&["laws", "--species", "builtin:qed", "--samples", "-3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = feyn(&["enumerate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["enumerate", "--arity", "3"],
        vec!["free", "--species", "builtin:qed", "--arity", "3"],
        vec!["laws", "--species", "builtin:terminal:3", "--samples", "20", "--seed", "5"],
        vec!["nerve", "--species", "builtin:qed", "--max-vertices", "1", "--max-inner-edges", "1"],
    ] {
        assert_eq!(feyn(&args).stdout, feyn(&args).stdout, "{args:?}");
    }
}
