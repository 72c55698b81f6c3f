use std::path::PathBuf;
use std::process::{Command, Output};

use invar::io::{table_from_json, table_to_json};
use invar::table::{InvariantTable, TableKind};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn invar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invar"))
        .args(args)
        .env_remove("INVAR_SEARCH_LIMIT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_table(o: &Output) -> InvariantTable {
    assert_eq!(code(o), 0, "{}", stderr(o));
    table_from_json(&stdout(o)).unwrap().0
}

#[test]
fn boolean_cdr_json() {
    let o = invar(&["arrangement", "cdr", "--input", &data("boolean3.json"), "--format", "json"]);
    let t = json_table(&o);
    assert_eq!(t.kind(), TableKind::CechDeRham);
    assert_eq!((t.value(2, 2), t.value(1, 2), t.value(0, 2)), (3, 3, 1));
    let text = stdout(&o);
    let keys: Vec<usize> = ["\"kind\"", "\"dim\"", "\"entries\"", "\"notes\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn cube_pretty_table() {
    let o = invar(&["fan", "lyubeznik", "--input", &data("cube.json")]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4], "· · · · 1");
    assert!(rows[..4].iter().all(|r| *r == "· · · · ·"));
}

#[test]
fn small_tables_command() {
    let t = json_table(&invar(&["tables", "small", "--dim", "2", "--a", "3", "--format", "json"]));
    assert_eq!((t.value(0, 1), t.value(2, 2)), (2, 3));
    let out = stdout(&invar(&["tables", "small", "--dim", "2", "--a", "3"]));
    assert!(out.contains("· 2 ·\n· · ·\n· · 3\n"), "{out}");
}

#[test]
fn emitted_json_re_parses_identically() {
    for args in [
        vec!["arrangement", "cdr", "--input", "boolean3.json"],
        vec!["arrangement", "lyubeznik", "--input", "two_planes_c4.json"],
        vec!["fan", "lyubeznik", "--input", "octants.json"],
        vec!["tables", "small", "--dim", "1"],
    ] {
        let mut args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        if let Some(i) = args.iter().position(|a| a == "--input") {
            args[i + 1] = data(&args[i + 1]);
        }
        args.extend(["--format".into(), "json".into()]);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = invar(&refs);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let text = stdout(&o);
        let (t, notes) = table_from_json(&text).unwrap();
        assert_eq!(table_to_json(&t, &notes), text);

        // and the emitted document is itself a valid `table check` input
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        std::fs::write(&path, &text).unwrap();
        let c = invar(&["table", "check", "--input", path.to_str().unwrap()]);
        assert_eq!(code(&c), 0, "{}\n{}", stdout(&c), stderr(&c));
    }
}

#[test]
fn arrangement_reports() {
    let o = invar(&["arrangement", "betti", "--input", &data("boolean3.json"), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["betti"], serde_json::json!([0, 3, 3, 1, 0, 0]));

    let o = invar(&["arrangement", "oracle", "--input", &data("two_lines.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["betti"], serde_json::json!([1, 2, 1]));

    let o = invar(&["arrangement", "lattice", "--input", &data("boolean3.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["flats"].as_array().unwrap().len(), 8);
    assert_eq!(v["central"], true);
}

#[test]
fn affine_components_and_strict() {
    let path = data("affine_mixed.json");
    let o = invar(&["arrangement", "cdr", "--input", &path, "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning"));
    let t = table_from_json(&stdout(&o)).unwrap().0;
    assert_eq!((t.value(1, 1), t.value(2, 2)), (1, 1));

    let o = invar(&["arrangement", "cdr", "--input", &path, "--strict"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).is_empty());

    let o = invar(&["fan", "picard", "--input", &data("p3.json"), "--strict"]);
    assert_eq!(code(&o), 2);
    let o = invar(&["fan", "picard", "--input", &data("p3.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["picard_rank"], 1);
    assert_eq!(v["projective"], true);
}

#[test]
fn fan_commands() {
    let o = invar(&["fan", "validate", "--input", &data("octants.json")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("simplicial"));

    let o = invar(&["fan", "validate", "--input", &data("open_fan.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no neighbouring cone"));
    assert!(stdout(&o).is_empty());

    let o = invar(&["fan", "projective", "--input", &data("twisted_prism.json"), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["projective"], false);
    assert!(v["support_function"].is_null());

    let o = invar(&["fan", "lyubeznik", "--input", &data("twisted_prism.json")]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).is_empty());
}

#[test]
fn table_check_verdicts() {
    let o = invar(&["table", "check", "--input", &data("lambda_toric.json")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("feasible"));

    let o = invar(&["table", "check", "--input", &data("lambda_bad.json"), "--format", "json"]);
    assert_eq!(code(&o), 3);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["valid"], false);

    let o = invar(&["table", "check", "--input", &data("rho_boolean3.json"), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["degenerate"], true);

    let dir = tempfile::tempdir().unwrap();
    let below = dir.path().join("below.json");
    std::fs::write(&below, r#"{"kind": "cdr", "dim": 1, "entries": [[0, 0], [1, 1]]}"#).unwrap();
    let o = invar(&["table", "check", "--input", below.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("below the diagonal"));

    let wrong_betti = dir.path().join("betti.json");
    std::fs::write(
        &wrong_betti,
        r#"{"kind": "cdr", "dim": 1, "ambient_dim": 2, "entries": [[0, 1], [0, 2]], "betti": [0, 2, 2, 0]}"#,
    )
    .unwrap();
    assert_eq!(code(&invar(&["table", "check", "--input", wrong_betti.to_str().unwrap()])), 3);
}

#[test]
fn table_deduce_verdicts() {
    let o = invar(&["table", "deduce", "--input", &data("lambda_s2_dim3.json"), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ids: Vec<&str> = v["identities"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert!(ids.contains(&"λ_{0,2} - λ_{2,3} = 0"), "{ids:?}");
    assert!(ids.contains(&"λ_{1,2} - λ_{3,3} = -1"), "{ids:?}");
    assert_eq!(v["bound"], 5);

    let o = invar(&["table", "deduce", "--input", &data("lambda_s2_dim3.json"), "--bound", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bound"], 2);

    let o = invar(&["table", "deduce", "--input", &data("lambda_contradiction.json")]);
    assert_eq!(code(&o), 3);

    let o = Command::new(env!("CARGO_BIN_EXE_invar"))
        .args(["table", "deduce", "--input", &data("lambda_s2_dim3.json")])
        .env("INVAR_SEARCH_LIMIT", "5")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("exceeded 5 nodes"));
    assert!(stdout(&o).is_empty());

    let o = Command::new(env!("CARGO_BIN_EXE_invar"))
        .args(["table", "deduce", "--input", &data("lambda_s2_dim3.json")])
        .env("INVAR_SEARCH_LIMIT", "lots")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let cases = [
        ("arrangement", "cdr", write("a.json", r#"{"ambient_dim": 2, "subspaces": [{"name": "a", "equations": [[1, 0]]}]}"#)),
        ("arrangement", "cdr", write("b.json", r#"{"ambient_dim": 2, "subspaces": [{"name": "a", "equations": [[0.5, 0, 0]]}]}"#)),
        ("arrangement", "cdr", write("c.json", r#"{"ambient_dim": 1, "subspaces": [{"name": "a", "equations": [[0, 1]]}]}"#)),
        ("arrangement", "cdr", write("d.json", "not json")),
        ("arrangement", "oracle", data("two_planes_c4.json")),
        ("arrangement", "lyubeznik", data("boolean3.json").replace("boolean3", "missing")),
        ("fan", "picard", write("e.json", r#"{"rays": [[1,0,0]], "max_cones": [[0, 5]]}"#)),
        ("table", "check", write("f.json", r#"{"kind": "lyubeznik", "dim": 2, "entries": [[0, 0], [0, 1]]}"#)),
        ("table", "check", write("g.json", r#"{"kind": "lyubeznik", "dim": 1, "entries": [[0, null], [0, 1]]}"#)),
        ("table", "deduce", write("h.json", r#"{"kind": "cdr", "dim": 0, "entries": [[null]]}"#)),
    ];
    for (group, cmd, path) in &cases {
        let o = invar(&[group, cmd, "--input", path]);
        assert_eq!(code(&o), 2, "{group} {cmd} {path}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
        assert!(stdout(&o).is_empty());
    }
}

#[test]
fn usage_errors() {
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["fan"],
        vec!["fan", "lyubeznik"],
        vec!["tables", "small", "--dim", "2", "--colour"],
        vec!["tables", "small", "--dim", "two"],
        vec!["tables", "small", "--dim", "2", "--format", "xml"],
    ] {
        let o = invar(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(stderr(&o).contains("Usage"), "{args:?}: {}", stderr(&o));
    }
    let o = invar(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("arrangement"));
}

#[test]
fn in_process_run_matches_binary() {
    let args = ["invar", "tables", "small", "--dim", "2", "--a", "4", "--format", "json"];
    let mut out = Vec::new();
    let mut err = Vec::new();
    assert_eq!(invar::cli::run(args, &mut out, &mut err), 0);
    assert_eq!(String::from_utf8(out).unwrap(), stdout(&invar(&args[1..])));
}
