//! Command surface for the `gradlift` binary.
//!
//! [`run`] parses arguments, executes one command and returns the exit code
//! together with everything that would be printed, so the binary and the
//! integration tests share one code path.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | a verification failed (lift identity, conjugator, equation check) |
//! | 2 | input error (unreadable file, malformed JSON, bad arguments) |
//! | 3 | a search bound or size guard was exceeded |
//! | 4 | the shift equivalence certificate is invalid |
//! | 5 | the unitality equation `S 1 = B^m 1` fails |

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use gradlift::ktheory::{bowen_franks, k0_with_unit, Decision, DimElem, DimTriple, DEFAULT_BOUND};
use gradlift::lift::{build_towers, LiftInput};
use gradlift::lpa::{local_conjugator, parse_expr, random_theta_data, Lpa};
use gradlift::moves::{amalgamate, amalgamate_pair, in_split, out_split, Direction, MoveResult, SplitSpec};
use gradlift::shift::{
    check_equations, compose_elementary, franks_obstruction, normalize_to_unital, search_shift_equivalence,
    InducedIso, ShiftCertificate, ShiftEquivalence,
};
use gradlift::tower::{bratteli_dot, Tower, DEFAULT_GUARD};
use gradlift::{Graph, IntMatrix, LiftError, LpaError, ShiftError, TowerError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BOUND: i32 = 3;
pub const EXIT_SE_INVALID: i32 = 4;
pub const EXIT_NOT_UNITAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "gradlift", version, about = "Graded K-theory, shift equivalence and diagram lifting for Leavitt path algebras")]
pub struct Cli {
    /// Emit JSON instead of the human-readable summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariants of a graph: adjacency, K0 with unit, Bowen-Franks pair.
    Graph(GraphArgs),
    /// K-theory and dimension-module queries.
    #[command(subcommand)]
    Ktheory(KtheoryCmd),
    /// Shift equivalence certificates.
    #[command(subcommand)]
    Se(SeCmd),
    /// State splitting and amalgamation.
    #[command(subcommand)]
    Moves(MovesCmd),
    /// Lift a shift equivalence to towers of level homomorphisms and verify them.
    Lift(LiftArgs),
    /// Symbolic computation in the Leavitt path algebra.
    #[command(subcommand)]
    Lpa(LpaCmd),
    /// Bratteli diagram of the degree-zero tower in DOT.
    Bratteli(BratteliArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph JSON file (or an inline JSON object).
    pub graph: String,
    /// Also print the Bratteli diagram up to this level.
    #[arg(long)]
    pub dot: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum KtheoryCmd {
    /// K0 of L(E) with the class of the unit.
    K0 { graph: String },
    /// Bowen-Franks group and determinant sign of a matrix.
    Bf { matrix: String },
    /// Decide x = y in the dimension group of a matrix.
    Equal {
        matrix: String,
        /// Element as `level:c1,c2,...`.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
    },
    /// Decide x >= 0 in the dimension group of a matrix.
    Positive {
        matrix: String,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum SeCmd {
    /// Check the four lag equations of a certificate.
    Verify { cert: String },
    /// Search for a shift equivalence between two matrices.
    Search {
        a: String,
        b: String,
        #[arg(long, default_value_t = 2)]
        max_lag: usize,
        /// Largest entry tried in S and R.
        #[arg(long, default_value_t = 2)]
        bound: u32,
    },
    /// Whether the induced isomorphism with shift m preserves order units.
    Unit {
        cert: String,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
    },
    /// Replace S by B^k S so that S 1 = B^(m+k) 1.
    Normalize {
        cert: String,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 16)]
        max_k: usize,
    },
    /// Compose a chain `[{"S":..,"R":..}, ...]` of elementary equivalences.
    Compose { chain: String },
    /// Compare Bowen-Franks invariants of two matrices.
    Franks { a: String, b: String },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Dir {
    In,
    Out,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Direction {
        match d {
            Dir::In => Direction::In,
            Dir::Out => Direction::Out,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum MovesCmd {
    /// Out-split by partitions of s^-1(v): `{"v": [["e"], ["f"]]}`.
    Outsplit { graph: String, spec: String },
    /// In-split by partitions of r^-1(v).
    Insplit { graph: String, spec: String },
    /// Merge two vertices (the first mergeable pair unless `--pair` is given).
    Amalgamate {
        graph: String,
        #[arg(long, value_enum)]
        dir: Dir,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        pair: Option<Vec<String>>,
    },
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    pub e: String,
    pub f: String,
    /// Shift equivalence certificate with A = A_E^t and B = A_F^t.
    pub cert: String,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest block size a tower level may have.
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    pub guard: usize,
    /// Raise the lag until the unitality equation holds.
    #[arg(long)]
    pub auto_normalize: bool,
    /// Include the homomorphism tables in the report.
    #[arg(long)]
    pub tables: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub report: Option<std::path::PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LpaCmd {
    /// Normal form of an expression, e.g. `t- t+` or `a* a + b b*`.
    Eval { graph: String, expr: String },
    /// Random graded automorphism theta_{u,z} and its local conjugators.
    Theta {
        graph: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check conjugators at levels 1..=level.
        #[arg(long, default_value_t = 2)]
        level: usize,
    },
}

#[derive(Debug, Args)]
pub struct BratteliArgs {
    pub graph: String,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure::new(EXIT_INPUT, message)
    }
}

struct Report {
    code: i32,
    text: String,
    json: Value,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report { code: EXIT_OK, text, json }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    match dispatch(&cli.command) {
        Ok(r) => {
            let stdout = if cli.json {
                let mut s = serde_json::to_string_pretty(&r.json).expect("json values serialize");
                s.push('\n');
                s
            } else {
                r.text
            };
            Outcome { code: r.code, stdout, stderr: String::new() }
        }
        Err(f) => {
            let stdout = if cli.json {
                format!("{}\n", serde_json::to_string_pretty(&json!({"error": f.message, "exit": f.code})).expect("json"))
            } else {
                String::new()
            };
            Outcome { code: f.code, stdout, stderr: format!("error: {}\n", f.message) }
        }
    }
}

fn dispatch(cmd: &Command) -> Result<Report, Failure> {
    match cmd {
        Command::Graph(a) => cmd_graph(a),
        Command::Ktheory(c) => cmd_ktheory(c),
        Command::Se(c) => cmd_se(c),
        Command::Moves(c) => cmd_moves(c),
        Command::Lift(a) => cmd_lift(a),
        Command::Lpa(c) => cmd_lpa(c),
        Command::Bratteli(a) => cmd_bratteli(a),
    }
}

// Arguments that start with `{` or `[` are inline JSON; anything else is a path.
fn read_source(arg: &str) -> Result<String, Failure> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Failure::input(format!("{arg}: {e}")))
}

fn parse_json<T: for<'de> Deserialize<'de>>(arg: &str, what: &str) -> Result<T, Failure> {
    let text = read_source(arg)?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{what} `{arg}`: {e}")))
}

fn load_graph(arg: &str) -> Result<Graph, Failure> {
    let text = read_source(arg)?;
    Graph::parse_json(&text).map_err(|e| Failure::input(format!("graph `{arg}`: {e}")))
}

fn load_matrix(arg: &str) -> Result<IntMatrix, Failure> {
    parse_json(arg, "matrix")
}

fn load_certificate(arg: &str) -> Result<ShiftCertificate, Failure> {
    parse_json(arg, "certificate")
}

fn load_se(arg: &str) -> Result<ShiftEquivalence, Failure> {
    ShiftEquivalence::try_from(load_certificate(arg)?).map_err(|e| Failure::new(EXIT_SE_INVALID, e.to_string()))
}

fn parse_elem(text: &str, dim: usize) -> Result<DimElem, Failure> {
    let bad = || Failure::input(format!("element `{text}`: expected `level:c1,c2,...` with {dim} entries"));
    let (level, coords) = text.split_once(':').ok_or_else(bad)?;
    let level: usize = level.trim().parse().map_err(|_| bad())?;
    let vector = coords
        .split(',')
        .map(|c| c.trim().parse::<BigInt>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    if vector.len() != dim {
        return Err(bad());
    }
    Ok(DimElem::new(level, vector))
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn decision_code(d: Decision) -> i32 {
    if d == Decision::Undecided {
        EXIT_BOUND
    } else {
        EXIT_OK
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn cmd_graph(a: &GraphArgs) -> Result<Report, Failure> {
    let g = load_graph(&a.graph)?;
    let mut text = String::new();
    let cls = g.classify_vertices();
    let names = |s: &std::collections::BTreeSet<usize>| {
        if s.is_empty() {
            "none".to_string()
        } else {
            join(s.iter().map(|&v| g.vertex_id(v)))
        }
    };
    let at = g.adjacency(true);
    let _ = writeln!(text, "vertices: {}", g.num_vertices());
    let _ = writeln!(text, "edges: {}", g.num_edges());
    let _ = writeln!(text, "sources: {}", names(&cls.sources));
    let _ = writeln!(text, "sinks: {}", names(&cls.sinks));
    let _ = writeln!(text, "essential: {}", if g.is_essential() { "yes" } else { "no" });
    let _ = writeln!(text, "A_E: {}", g.adjacency(false));
    let _ = writeln!(text, "A: {at}");
    let mut json = json!({
        "vertices": g.vertices(),
        "edges": g.num_edges(),
        "sources": cls.sources.iter().map(|&v| g.vertex_id(v)).collect::<Vec<_>>(),
        "sinks": cls.sinks.iter().map(|&v| g.vertex_id(v)).collect::<Vec<_>>(),
        "essential": g.is_essential(),
        "A_E": to_value(&g.adjacency(false)),
        "A": to_value(&at),
    });
    match k0_with_unit(&g) {
        Ok(k) => {
            let group = if k.group.is_trivial() { "trivial".to_string() } else { k.group.to_string() };
            let unit = if k.order_unit.is_empty() { "0".to_string() } else { format!("({})", join(&k.order_unit)) };
            let _ = writeln!(text, "K0: {group}");
            let _ = writeln!(text, "unit: {unit}");
            json["K0"] = to_value(&k);
        }
        Err(_) => {
            let k = gradlift::ktheory::k0(&g);
            let _ = writeln!(text, "K0: {} (unit class undefined: graph has sinks)", k);
            json["K0"] = json!({ "group": to_value(&k) });
        }
    }
    let bf = bowen_franks(&at).map_err(|e| Failure::input(e.to_string()))?;
    let _ = writeln!(text, "det(I-A): {}", bf.det);
    let _ = writeln!(text, "BF: ({}, {})", bf.group, sign_str(bf.det_sign));
    json["bowen_franks"] = to_value(&bf);
    if let Some(levels) = a.dot {
        let dot = bratteli_dot(&Tower::new(Arc::new(g)), levels).map_err(tower_failure)?;
        text.push_str(&dot);
        json["dot"] = Value::String(dot);
    }
    Ok(Report::ok(text, json))
}

fn sign_str(s: i8) -> &'static str {
    match s {
        1 => "+",
        -1 => "-",
        _ => "0",
    }
}

fn cmd_ktheory(c: &KtheoryCmd) -> Result<Report, Failure> {
    match c {
        KtheoryCmd::K0 { graph } => {
            let g = load_graph(graph)?;
            let k = k0_with_unit(&g).map_err(|e| Failure::input(e.to_string()))?;
            let text = format!("K0: {}\nunit: ({})\n", k.group, join(&k.order_unit));
            Ok(Report::ok(text, to_value(&k)))
        }
        KtheoryCmd::Bf { matrix } => {
            let m = load_matrix(matrix)?;
            let bf = bowen_franks(&m).map_err(|e| Failure::input(e.to_string()))?;
            let text = format!("coker(I-A): {}\ndet(I-A): {}\n", bf.group, bf.det);
            Ok(Report::ok(text, to_value(&bf)))
        }
        KtheoryCmd::Equal { matrix, x, y, bound } => {
            let t = DimTriple::new(load_matrix(matrix)?).map_err(|e| Failure::input(e.to_string()))?;
            let x = parse_elem(x, t.dim())?;
            let y = parse_elem(y, t.dim())?;
            let d = t.dim_equal(&x, &y, *bound).map_err(|e| Failure::input(e.to_string()))?;
            Ok(Report { code: decision_code(d), text: format!("equal: {}\n", decision_str(d)), json: json!({ "equal": d }) })
        }
        KtheoryCmd::Positive { matrix, x, bound } => {
            let t = DimTriple::new(load_matrix(matrix)?).map_err(|e| Failure::input(e.to_string()))?;
            let x = parse_elem(x, t.dim())?;
            let d = t.dim_positive(&x, *bound).map_err(|e| Failure::input(e.to_string()))?;
            Ok(Report {
                code: decision_code(d),
                text: format!("positive: {}\n", decision_str(d)),
                json: json!({ "positive": d }),
            })
        }
    }
}

fn decision_str(d: Decision) -> &'static str {
    match d {
        Decision::Yes => "yes",
        Decision::No => "no",
        Decision::Undecided => "undecided",
    }
}

fn cert_text(se: &ShiftEquivalence) -> String {
    format!("A: {}\nB: {}\nS: {}\nR: {}\nlag: {}\n", se.a(), se.b(), se.s(), se.r(), se.lag())
}

fn shift_failure(e: ShiftError) -> Failure {
    match e {
        ShiftError::NormalizationBound(_) => Failure::new(EXIT_BOUND, e.to_string()),
        ShiftError::Verification(_) | ShiftError::ZeroLag | ShiftError::DimensionMismatch(_) => {
            Failure::new(EXIT_SE_INVALID, e.to_string())
        }
        ShiftError::BrokenChain(_) => Failure::input(e.to_string()),
    }
}

#[derive(Deserialize)]
struct ElementaryStep {
    #[serde(rename = "S")]
    s: IntMatrix,
    #[serde(rename = "R")]
    r: IntMatrix,
}

fn cmd_se(c: &SeCmd) -> Result<Report, Failure> {
    match c {
        SeCmd::Verify { cert } => {
            let cert = load_certificate(cert)?;
            let checks = check_equations(&cert.a, &cert.b, &cert.s, &cert.r, cert.lag).map_err(shift_failure)?;
            let nonneg = cert.s.is_nonnegative() && cert.r.is_nonnegative();
            let mut text = String::new();
            for ch in &checks {
                let _ = match ch.first_violation {
                    None => writeln!(text, "{}: holds", ch.name),
                    Some((i, j)) => writeln!(text, "{}: fails at ({i}, {j})", ch.name),
                };
            }
            let _ = writeln!(text, "S, R nonnegative: {}", if nonneg { "yes" } else { "no" });
            let valid = nonneg && checks.iter().all(|c| c.holds);
            let _ = writeln!(text, "verdict: {}", if valid { "pass" } else { "fail" });
            let json = json!({ "checks": checks, "nonnegative": nonneg, "valid": valid, "lag": cert.lag });
            Ok(Report { code: if valid { EXIT_OK } else { EXIT_SE_INVALID }, text, json })
        }
        SeCmd::Search { a, b, max_lag, bound } => {
            let a = load_matrix(a)?;
            let b = load_matrix(b)?;
            match search_shift_equivalence(&a, &b, *max_lag, *bound) {
                Some(se) => Ok(Report::ok(cert_text(&se), to_value(&se))),
                None => Ok(Report {
                    code: EXIT_BOUND,
                    text: format!("not found with lag <= {max_lag} and entries <= {bound}\n"),
                    json: json!({ "found": false, "max_lag": max_lag, "bound": bound }),
                }),
            }
        }
        SeCmd::Unit { cert, m, bound } => {
            let se = load_se(cert)?;
            let d = InducedIso::new(se, *m).preserves_order_unit(*bound);
            Ok(Report {
                code: decision_code(d),
                text: format!("preserves order unit (m = {m}): {}\n", decision_str(d)),
                json: json!({ "m": m, "preserves_order_unit": d }),
            })
        }
        SeCmd::Normalize { cert, m, max_k } => {
            let se = load_se(cert)?;
            let (out, m2) = normalize_to_unital(&se, *m, *max_k).map_err(shift_failure)?;
            let text = format!("{}m: {m2}\n", cert_text(&out));
            Ok(Report::ok(text, json!({ "certificate": to_value(&out), "m": m2 })))
        }
        SeCmd::Compose { chain } => {
            let steps: Vec<ElementaryStep> = parse_json(chain, "chain")?;
            let pairs: Vec<(IntMatrix, IntMatrix)> = steps.into_iter().map(|s| (s.s, s.r)).collect();
            let se = compose_elementary(&pairs).map_err(shift_failure)?;
            Ok(Report::ok(cert_text(&se), to_value(&se)))
        }
        SeCmd::Franks { a, b } => {
            let rep = franks_obstruction(&load_matrix(a)?, &load_matrix(b)?).map_err(|e| Failure::input(e.to_string()))?;
            let mut text = format!(
                "BF(A): ({}, {})\nBF(B): ({}, {})\n",
                rep.a.group,
                sign_str(rep.a.det_sign),
                rep.b.group,
                sign_str(rep.b.det_sign)
            );
            match &rep.reason {
                Some(r) => {
                    let _ = writeln!(text, "obstructed: {r}");
                }
                None => text.push_str("obstructed: no\n"),
            }
            Ok(Report::ok(text, to_value(&rep)))
        }
    }
}

fn move_report(from: &Graph, res: MoveResult) -> Report {
    let se = res.shift_equivalence(from);
    let text = format!("{}\nS: {}\nR: {}\nlag-1 equivalence: verified\n", res.graph, res.s, res.r);
    let json = json!({
        "graph": to_value(&res.graph.to_document()),
        "S": to_value(&res.s),
        "R": to_value(&res.r),
        "certificate": to_value(&se),
    });
    Report::ok(text, json)
}

fn cmd_moves(c: &MovesCmd) -> Result<Report, Failure> {
    match c {
        MovesCmd::Outsplit { graph, spec } | MovesCmd::Insplit { graph, spec } => {
            let g = load_graph(graph)?;
            let spec: SplitSpec = parse_json(spec, "split spec")?;
            let res = if matches!(c, MovesCmd::Outsplit { .. }) { out_split(&g, &spec) } else { in_split(&g, &spec) };
            Ok(move_report(&g, res.map_err(|e| Failure::input(e.to_string()))?))
        }
        MovesCmd::Amalgamate { graph, dir, pair } => {
            let g = load_graph(graph)?;
            let res = match pair {
                Some(p) => {
                    let idx = |id: &str| g.vertex_by_id(id).ok_or_else(|| Failure::input(format!("unknown vertex `{id}`")));
                    amalgamate_pair(&g, (*dir).into(), idx(&p[0])?, idx(&p[1])?)
                        .map_err(|e| Failure::new(EXIT_VERIFY, e.to_string()))?
                }
                None => amalgamate(&g, (*dir).into()).ok_or_else(|| Failure::new(EXIT_VERIFY, "no mergeable pair"))?,
            };
            Ok(move_report(&g, res))
        }
    }
}

fn tower_failure(e: TowerError) -> Failure {
    match e {
        TowerError::GuardExceeded { .. } => Failure::new(EXIT_BOUND, e.to_string()),
        other => Failure::new(EXIT_VERIFY, other.to_string()),
    }
}

fn lift_failure(e: LiftError) -> Failure {
    match e {
        LiftError::NotUnital { .. } | LiftError::ZeroShift => Failure::new(EXIT_NOT_UNITAL, e.to_string()),
        LiftError::Shift(s) => shift_failure(s),
        LiftError::Tower(t) => tower_failure(t),
        LiftError::NotEssential(_) | LiftError::MatrixMismatch(_) | LiftError::BadChosenEdge(_) => {
            Failure::input(e.to_string())
        }
        LiftError::CardinalityMismatch { .. } | LiftError::Partition(_) | LiftError::MissingLevel { .. } => {
            Failure::new(EXIT_VERIFY, e.to_string())
        }
    }
}

fn cmd_lift(a: &LiftArgs) -> Result<Report, Failure> {
    let e = load_graph(&a.e)?;
    let f = load_graph(&a.f)?;
    let mut se = load_se(&a.cert)?;
    let mut m = a.m;
    if a.auto_normalize {
        (se, m) = normalize_to_unital(&se, m, 16).map_err(shift_failure)?;
    }
    let input = LiftInput::new(e, f, se, m).map_err(lift_failure)?.with_seed(a.seed).with_guard(a.guard);
    let lift = build_towers(input, a.depth).map_err(lift_failure)?;
    let report = &lift.report;
    let mut json = to_value(report);
    json["passed"] = Value::Bool(report.passed());
    if a.tables {
        json["tables"] = to_value(&lift.tables.dump());
    }
    if let Some(path) = &a.report {
        let s = serde_json::to_string_pretty(&json).expect("json");
        std::fs::write(path, s + "\n").map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    let mut text = format!(
        "lag {}{}, m {}{}, depth {}, seed {}\n",
        report.lag,
        if report.lag_bumped { " (raised from 1)" } else { "" },
        report.m,
        if report.m_exceeds_lag { " (exceeds lag)" } else { "" },
        report.depth,
        report.seed
    );
    let width = report.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
    for c in &report.checks {
        let pad = width - c.name.chars().count();
        let _ = write!(text, "{}{}  {:<8} {}", c.name, " ".repeat(pad), c.levels, if c.passed { "pass" } else { "FAIL" });
        if let Some(d) = &c.detail {
            let _ = write!(text, "  {d}");
        }
        text.push('\n');
    }
    let _ = writeln!(text, "verdict: {}", if report.passed() { "pass" } else { "fail" });
    Ok(Report { code: if report.passed() { EXIT_OK } else { EXIT_VERIFY }, text, json })
}

fn lpa_failure(e: LpaError) -> Failure {
    match e {
        LpaError::ConjugationFailure(_) | LpaError::GeneratorMismatch(_) => Failure::new(EXIT_VERIFY, e.to_string()),
        LpaError::Tower(t) => tower_failure(t),
        other => Failure::input(other.to_string()),
    }
}

fn cmd_lpa(c: &LpaCmd) -> Result<Report, Failure> {
    match c {
        LpaCmd::Eval { graph, expr } => {
            let lpa = Lpa::new(Arc::new(load_graph(graph)?));
            let x = parse_expr(&lpa, expr).map_err(lpa_failure)?;
            let s = lpa.format(&x);
            let degrees: BTreeMap<String, String> =
                lpa.degree_components(&x).iter().map(|(d, y)| (d.to_string(), lpa.format(y))).collect();
            Ok(Report::ok(format!("{s}\n"), json!({ "normal_form": s, "components": degrees })))
        }
        LpaCmd::Theta { graph, seed, level } => {
            let lpa = Lpa::new(Arc::new(load_graph(graph)?));
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let theta = random_theta_data(&lpa, &mut rng).map_err(lpa_failure)?;
            let mut text = format!("u = {}\nz = {}\n", lpa.format(&theta.u), lpa.format(&theta.z));
            let mut images = BTreeMap::new();
            for g in lpa.generators() {
                let img = lpa.format(&theta.on_generator(g));
                let _ = writeln!(text, "theta({}) = {img}", lpa.generator_label(g));
                images.insert(lpa.generator_label(g), img);
            }
            let mut conj = Vec::new();
            for n in 1..=*level {
                let c = local_conjugator(&theta, n).map_err(lpa_failure)?;
                let _ = writeln!(text, "u_{n} = {}", lpa.format(&c.u_n));
                conj.push(json!({ "level": n, "u_n": lpa.format(&c.u_n), "u_n_inv": lpa.format(&c.u_n_inv) }));
            }
            let _ = writeln!(text, "conjugators verified on levels 1..={level}");
            let json = json!({
                "u": lpa.format(&theta.u),
                "z": lpa.format(&theta.z),
                "images": images,
                "conjugators": conj,
            });
            Ok(Report::ok(text, json))
        }
    }
}

fn cmd_bratteli(a: &BratteliArgs) -> Result<Report, Failure> {
    let g = load_graph(&a.graph)?;
    let dot = bratteli_dot(&Tower::new(Arc::new(g)), a.levels).map_err(tower_failure)?;
    Ok(Report::ok(dot.clone(), json!({ "dot": dot })))
}
