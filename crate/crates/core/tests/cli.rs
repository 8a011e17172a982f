use std::path::{Path, PathBuf};

use chaingraph::cli::{run_with, EXIT_INVALID, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE};

fn model(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(
        std::iter::once("chaingraph").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_model(dir: &tempfile::TempDir, name: &str, src: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, src).unwrap();
    p
}

#[test]
fn components_and_subgraphs_of_fig2() {
    let (code, out, _) = run(&["components", &model("fig2.cg")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "a b\nc\nd\ne f g h\n");
    let (_, out, _) = run(&["subgraphs", &model("fig2.cg")]);
    assert_eq!(out, "a b\nc d\ne f g h\n");
}

#[test]
fn factorize_text_and_latex() {
    let (code, out, _) = run(&["factorize", &model("fig2.cg")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "p(a,b) p(c|b) p(d|a,c) f_0(b,c) f_1(c,e) f_2(b,f) f_3(e,f) f_4(f,h) f_5(h,g) f_6(g,e)\n"
    );
    let (_, out, _) = run(&["factorize", "--format", "latex", &model("fig1a.cg")]);
    assert!(out.contains("p(\\mathrm{Occ} \\mid \\mathrm{Age})"), "{out}");
    let (_, out, _) = run(&["factorize", "--bind", "N=2", &model("coin.cg")]);
    assert_eq!(out, "p(θ) p(heads_1|θ) p(heads_2|θ)\n");
}

#[test]
fn invalid_model_exits_one_with_cycle_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_model(
        &dir,
        "bad-cycle.cg",
        "model bad {\n  node a; node b; node c;\n  a -> b;\n  b -- c;\n  c -> a;\n}\n",
    );
    let (code, out, err) = run(&["validate", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(out.is_empty());
    assert!(err.contains("semi-directed cycle"), "{err}");
    assert!(err.contains("bad-cycle.cg:"), "{err}");

    let p = write_model(&dir, "syntax.cg", "model m { node a; a -> ; }");
    let (code, _, err) = run(&["components", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("syntax.cg:1:"), "{err}");
}

#[test]
fn validate_reports_counts() {
    let (code, out, _) = run(&["validate", &model("banks.cg")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "valid: 6 nodes, 5 edges, 2 plates\n");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate", &model("fig2.cg")]).0, EXIT_USAGE);
    assert_eq!(run(&["components", "/nonexistent.cg"]).0, EXIT_USAGE);
    let (code, _, err) = run(&["query", "--ci", "a _||_", &model("fig2.cg")]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("invalid query"), "{err}");
    assert_eq!(run(&["query", "--ci", "a __ b", &model("fig2.cg")]).0, EXIT_USAGE);
    assert_eq!(run(&["expand", &model("coin.cg")]).0, EXIT_USAGE);
    assert_eq!(run(&["expand", "--bind", "N=0", &model("coin.cg")]).0, EXIT_USAGE);
    assert_eq!(run(&["expand", "--bind", "N", &model("coin.cg")]).0, EXIT_USAGE);
}

#[test]
fn query_answers_true_and_false_with_exit_zero() {
    let (code, out, _) = run(&["query", "--ci", "a _||_ e | b, c", &model("fig2.cg")]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "true\n"));
    let (code, out, _) = run(&["query", "--ci", "b _||_ c", &model("fig2.cg")]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "false\n"));
}

#[test]
fn graph_transforms_print_models() {
    let (_, out, _) = run(&["elim-det", &model("ffnet.cg")]);
    assert!(out.starts_with("model ffnet {"));
    assert!(!out.contains("h1") && out.contains("x1 -> o2;"), "{out}");
    let (_, out, _) = run(&["expand", "--bind", "N=3", &model("coin.cg")]);
    let fig8a = std::fs::read_to_string(model("fig8a.cg")).unwrap();
    let ground = chaingraph::lang::load(&out).unwrap().model.graph;
    assert!(ground.same_structure(&chaingraph::lang::load(&fig8a).unwrap().model.graph));
    let (code, _, err) = run(&["simplify", &model("fig2.cg")]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("purely"), "{err}");
    let (code, out, _) = run(&["moralize", &model("fig3.cg")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 8);
}

#[test]
fn cliques_of_boltzmann_skeleton() {
    let (_, out, _) = run(&["cliques", "--skeleton", &model("boltzmann.cg")]);
    assert_eq!(out, "wC1 x1 o h1\nwC2 x2 o h1\nwC3 x3 x4 o\n");
}

#[test]
fn dot_export() {
    let (_, out, _) = run(&["dot", &model("coin.cg")]);
    assert!(out.contains("subgraph \"cluster_Tosses\""));
    assert!(out.contains("label=\"N\";"));
    let (_, out, _) = run(&["dot", &model("fig2.cg")]);
    assert!(out.contains("\"a\" -> \"b\" [dir=none];"));
}

#[test]
fn output_file_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("out.txt");
    let (code, out, _) = run(&["components", "-o", o.to_str().unwrap(), &model("fig3.cg")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert_eq!(std::fs::read_to_string(&o).unwrap(), "a b\nc d\ne\nf\n");

    let r = dir.path().join("records.jsonl");
    let (code, out, _) = run(&[
        "oracle",
        "--trials",
        "3",
        "--jobs",
        "2",
        "--records",
        r.to_str().unwrap(),
        &model("fig1a.cg"),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("soundness violations: 0"));
    let text = std::fs::read_to_string(&r).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(first["query"].is_string() && first["implied"].is_boolean());
    assert_eq!(first["verdicts"].as_array().unwrap().len(), 3);
}

#[test]
fn oracle_resource_guard() {
    let (code, _, err) = run(&["oracle", &model("boltzmann.cg")]);
    assert_eq!(code, EXIT_RESOURCE);
    assert!(err.contains("8-node"), "{err}");
}

#[test]
fn help_for_every_subcommand() {
    for sub in [
        "validate",
        "components",
        "subgraphs",
        "moralize",
        "cliques",
        "query",
        "factorize",
        "simplify",
        "elim-det",
        "expand",
        "dot",
        "oracle",
    ] {
        let (code, out, _) = run(&[sub, "--help"]);
        assert_eq!(code, EXIT_OK, "{sub}");
        assert!(out.contains("Usage: chaingraph"), "{sub}: {out}");
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["factorize".to_string(), model("banks.cg")],
        vec!["dot".to_string(), model("banks.cg")],
        vec!["oracle".to_string(), "--trials".into(), "2".into(), model("fig3.cg")],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a, b);
        assert!(!a.1.contains('\r'));
    }
}

#[test]
fn binary_runs() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_chaingraph"))
        .args(["components", &model("fig2.cg")])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "a b\nc\nd\ne f g h\n");
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_chaingraph"))
        .arg("validate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
