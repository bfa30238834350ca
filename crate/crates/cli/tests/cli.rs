use gradlift_cli::{run, Outcome, EXIT_BOUND, EXIT_INPUT, EXIT_NOT_UNITAL, EXIT_OK, EXIT_SE_INVALID, EXIT_VERIFY};

const L2: &str = r#"{"vertices":["v"],"edges":[["a","v","v"],["b","v","v"]]}"#;
const GOLDEN: &str = r#"{"vertices":["v","w"],"edges":[["e","v","v"],["f","v","w"],["g","w","v"]]}"#;
const IN_SPLIT: &str = r#"{"A":[[1,1],[1,0]],"B":[[1,1,0],[0,0,1],[1,1,0]],"S":[[1,0],[0,1],[1,0]],"R":[[1,1,0],[0,0,1]],"lag":1}"#;

fn gl(args: &[&str]) -> Outcome {
    run(std::iter::once("gradlift").chain(args.iter().copied()))
}

fn split_graph() -> String {
    let out = gl(&["--json", "moves", "insplit", GOLDEN, r#"{"v":[["e"],["g"]]}"#]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    v["graph"].to_string()
}

#[test]
fn graph_report_for_the_two_petal_rose() {
    let out = gl(&["graph", L2]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("K0: trivial\nunit: 0\ndet(I-A): -1\n"), "{}", out.stdout);
}

#[test]
fn single_cycle_has_free_k0() {
    let cycle = r#"{"vertices":["a","b","c"],"edges":[["x","a","b"],["y","b","c"],["z","c","a"]]}"#;
    let out = gl(&["graph", cycle]);
    assert!(out.stdout.contains("essential: yes"));
    assert!(out.stdout.contains("K0: Z\n"), "{}", out.stdout);
}

#[test]
fn dangling_edge_is_an_input_error() {
    let out = gl(&["graph", r#"{"vertices":["v"],"edges":[["a","v","u"]]}"#]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("unknown vertex `u`"));
    assert_eq!(gl(&["graph", "/nonexistent/file.json"]).code, EXIT_INPUT);
    assert_eq!(gl(&["bogus"]).code, EXIT_INPUT);
}

#[test]
fn lpa_eval_of_t_minus_t_plus() {
    let out = gl(&["lpa", "eval", L2, "t- t+"]);
    assert_eq!((out.code, out.stdout.as_str()), (EXIT_OK, "1\n"));
    assert_eq!(gl(&["lpa", "eval", L2, "a +"]).code, EXIT_INPUT);
}

#[test]
fn trivial_out_split_is_isomorphic() {
    let out = gl(&["--json", "moves", "outsplit", GOLDEN, "{}"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let g = gradlift::Graph::parse_json(&v["graph"].to_string()).unwrap();
    assert!(g.is_isomorphic(&gradlift::Graph::parse_json(GOLDEN).unwrap()));
}

#[test]
fn se_exit_codes() {
    assert_eq!(gl(&["se", "verify", IN_SPLIT]).code, EXIT_OK);
    let broken = IN_SPLIT.replace(r#""lag":1"#, r#""lag":2"#);
    let out = gl(&["se", "verify", &broken]);
    assert_eq!(out.code, EXIT_SE_INVALID);
    assert!(out.stdout.contains("A^l = RS: fails at (0, 0)"), "{}", out.stdout);
    assert_eq!(gl(&["se", "search", "[[2]]", "[[3]]", "--max-lag", "2"]).code, EXIT_BOUND);
    assert_eq!(gl(&["se", "search", "[[1,1],[1,0]]", "[[1,1,0],[0,0,1],[1,1,0]]", "--max-lag", "1", "--bound", "1"]).code, EXIT_OK);
}

#[test]
fn lift_exit_codes() {
    let f = split_graph();
    let out = gl(&["lift", GOLDEN, &f, IN_SPLIT, "--m", "1"]);
    assert_eq!(out.code, EXIT_NOT_UNITAL);
    assert!(out.stderr.contains("row 0"), "{}", out.stderr);
    let bad = IN_SPLIT.replace("[[1,0],[0,1],[1,0]]", "[[1,0],[0,1],[0,1]]");
    assert_eq!(gl(&["lift", GOLDEN, &f, &bad, "--m", "1"]).code, EXIT_SE_INVALID);
    assert_eq!(gl(&["lift", GOLDEN, &f, IN_SPLIT, "--m", "0", "--auto-normalize", "--guard", "3"]).code, EXIT_BOUND);
    assert_eq!(gl(&["lift", GOLDEN, &f, IN_SPLIT, "--m", "0", "--auto-normalize"]).code, EXIT_OK);
}

#[test]
fn lift_report_is_byte_identical_across_runs() {
    let f = split_graph();
    let args = ["--json", "lift", GOLDEN, &f, IN_SPLIT, "--m", "0", "--auto-normalize", "--seed", "5", "--tables"];
    let a = gl(&args);
    let b = gl(&args);
    assert_eq!(a, b);
    let other = gl(&["--json", "lift", GOLDEN, &f, IN_SPLIT, "--m", "0", "--auto-normalize", "--seed", "6", "--tables"]);
    let (x, y): (serde_json::Value, serde_json::Value) =
        (serde_json::from_str(&a.stdout).unwrap(), serde_json::from_str(&other.stdout).unwrap());
    assert_ne!(x["tables"], y["tables"]);
    assert_eq!(x["passed"], y["passed"]);
}

#[test]
fn theta_and_dimension_queries() {
    let out = gl(&["lpa", "theta", GOLDEN, "--seed", "2", "--level", "2"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(gl(&["ktheory", "equal", "[[1,1],[1,0]]", "--x", "0:1,1", "--y", "1:1,0"]).code, EXIT_OK);
    // A = [[0,1],[0,0]] is nilpotent: (0, e1) = 0 only after one step
    let out = gl(&["ktheory", "equal", "[[0,1],[0,0]]", "--x", "0:1,0", "--y", "0:0,0", "--bound", "0"]);
    assert_eq!(out.code, EXIT_BOUND, "{}", out.stdout);
    assert_eq!(gl(&["ktheory", "positive", "[[1]]", "--x", "0:1,2"]).code, EXIT_INPUT);
    assert_eq!(gl(&["moves", "amalgamate", GOLDEN, "--dir", "out"]).code, EXIT_VERIFY);
}
