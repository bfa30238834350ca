//! End-to-end acceptance run. Prints one line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use gradlift::ktheory::{bowen_franks, Decision, DimElem, DimTriple};
use gradlift::lift::{build_towers, LiftInput};
use gradlift::lpa::{decompose_graded_auto, local_conjugator, random_theta_data, Generator, Lpa, LpaElem, Strategy, ThetaData};
use gradlift::moves::{amalgamate_pair, in_split, out_split, Direction, SplitSpec};
use gradlift::shift::{find_positive_trivial_bf, franks_obstruction, normalize_to_unital, ShiftEquivalence};
use gradlift::tower::LevelIndex;
use gradlift::{Graph, IntMatrix};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "worked split examples verify exactly", limit: Duration::from_secs(1), run: c1_fixtures },
    Criterion { id: 2, name: "order-unit dichotomy m=0 / m=1", limit: Duration::from_secs(1), run: c2_order_unit },
    Criterion { id: 3, name: "alpha_* delta_A = id on 200 elements", limit: Duration::from_secs(5), run: c3_corner_k0 },
    Criterion { id: 4, name: "diamond lift at depth 2 (flagship + 5 splits)", limit: Duration::from_secs(6 * 60), run: c4_lift },
    Criterion { id: 5, name: "K0(twist) = A^(2l-1) in every lift", limit: Duration::from_secs(120), run: c5_twist },
    Criterion { id: 6, name: "split/amalgamate round trip on 100 graphs", limit: Duration::from_secs(10), run: c6_round_trip },
    Criterion { id: 7, name: "rewriting confluence, CK1/CK2, Toeplitz units", limit: Duration::from_secs(10), run: c7_rewriting },
    Criterion { id: 8, name: "local conjugators on levels 1..=3", limit: Duration::from_secs(30), run: c8_conjugator },
    Criterion { id: 9, name: "graded automorphism decomposition round trip", limit: Duration::from_secs(10), run: c9_decompose },
    Criterion { id: 10, name: "Bowen-Franks sign separates [[2]] from B", limit: Duration::from_secs(5), run: c10_franks },
];

fn main() {
    let mut failed = 0;
    for c in CRITERIA {
        let t = Instant::now();
        let res = (c.run)();
        let dt = t.elapsed();
        let (ok, note) = match res {
            Ok(n) if dt <= c.limit => (true, n),
            Ok(n) => (false, format!("{n}; over time limit")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2}  {:<48} {:>8.3}s / {:<4}s  {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            dt.as_secs_f64(),
            c.limit.as_secs(),
            note
        );
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mat(rows: &[&[i64]]) -> IntMatrix {
    IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn graph(json: &str) -> Graph {
    Graph::parse_json(json).expect("fixture graph")
}

fn golden() -> Graph {
    graph(r#"{"vertices":["v","w"],"edges":[["e","v","v"],["f","v","w"],["g","w","v"]]}"#)
}

fn graph_json(g: &Graph) -> String {
    serde_json::to_string(&g.to_document()).unwrap()
}

fn cli(args: &[&str]) -> gradlift_cli::Outcome {
    let mut full = vec!["gradlift"];
    full.extend_from_slice(args);
    gradlift_cli::run(full)
}

// ---- small independent oracles ----------------------------------------

fn mul_i64(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
}

fn pow_i64(a: &[Vec<i64>], k: usize) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut p: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..k {
        p = mul_i64(&p, a);
    }
    p
}

fn to_i64(m: &IntMatrix) -> Vec<Vec<i64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get_i64(i, j).unwrap()).collect()).collect()
}

/// Transposed adjacency counted straight from the edge list.
fn edge_counts(g: &Graph) -> Vec<Vec<i64>> {
    let n = g.num_vertices();
    let mut a = vec![vec![0; n]; n];
    for e in g.edges() {
        a[e.range][e.source] += 1;
    }
    a
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn isomorphic_oracle(g: &Graph, h: &Graph) -> bool {
    let (a, b) = (edge_counts(g), edge_counts(h));
    a.len() == b.len()
        && permutations(a.len())
            .iter()
            .any(|p| (0..a.len()).all(|i| (0..a.len()).all(|j| a[i][j] == b[p[i]][p[j]])))
}

fn det_i64(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<i64>> = m[1..].iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect()).collect();
            let s = if c % 2 == 0 { 1 } else { -1 };
            s * m[0][c] * det_i64(&minor)
        })
        .sum()
}

// ---- criteria ---------------------------------------------------------

fn cert(a: &IntMatrix, b: &IntMatrix, s: &IntMatrix, r: &IntMatrix) -> String {
    serde_json::json!({ "A": a, "B": b, "S": s, "R": r, "lag": 1 }).to_string()
}

fn c1_fixtures() -> Outcome {
    let a = mat(&[&[1, 1], &[1, 0]]);
    let e = golden();
    let cases = [
        (
            "in-split",
            mat(&[&[1, 0], &[0, 1], &[1, 0]]),
            mat(&[&[1, 1, 0], &[0, 0, 1]]),
            mat(&[&[1, 1, 0], &[0, 0, 1], &[1, 1, 0]]),
        ),
        (
            "out-split",
            mat(&[&[1, 0], &[1, 0], &[0, 1]]),
            mat(&[&[1, 0, 1], &[0, 1, 0]]),
            mat(&[&[1, 0, 1], &[1, 0, 1], &[0, 1, 0]]),
        ),
    ];
    ensure(e.adjacency(true) == a, || "graph E does not have A = [[1,1],[1,0]]".into())?;
    for (name, s, r, b_expected) in &cases {
        let b = s * r;
        ensure(&b == b_expected, || format!("{name}: SR = {b}"))?;
        // RS = A by hand
        ensure(to_i64(&(r * s)) == mul_i64(&to_i64(r), &to_i64(s)) && r * s == a, || format!("{name}: RS != A"))?;
        let out = cli(&["se", "verify", &cert(&a, &b, s, r)]);
        ensure(out.code == 0, || format!("{name}: se verify exited {}: {}", out.stdout, out.stderr))?;
        ensure(out.stdout.contains("verdict: pass"), || format!("{name}: {}", out.stdout))?;
    }
    let mut spec = SplitSpec::new();
    spec.insert("v".into(), vec![vec!["e".into()], vec!["g".into()]]);
    let ins = in_split(&e, &spec).map_err(|x| x.to_string())?;
    ensure(ins.s == cases[0].1 && ins.r == cases[0].2, || "in_split does not produce the worked (S, R)".into())?;
    let mut spec = SplitSpec::new();
    spec.insert("v".into(), vec![vec!["e".into()], vec!["f".into()]]);
    let outs = out_split(&e, &spec).map_err(|x| x.to_string())?;
    ensure(outs.s == cases[1].1 && outs.r == cases[1].2, || "out_split does not produce the worked (S, R)".into())?;
    Ok("both (S, R) pairs exact, 4/4 equations each".into())
}

fn c2_order_unit() -> Outcome {
    let a = mat(&[&[1, 1], &[1, 0]]);
    let s = mat(&[&[1, 0], &[0, 1], &[1, 0]]);
    let r = mat(&[&[1, 1, 0], &[0, 0, 1]]);
    let c = cert(&a, &(&s * &r), &s, &r);
    let m0 = cli(&["--json", "se", "unit", &c, "--m", "0", "--bound", "16"]);
    let m1 = cli(&["--json", "se", "unit", &c, "--m", "1", "--bound", "16"]);
    let get = |o: &gradlift_cli::Outcome| -> Result<String, String> {
        let v: Value = serde_json::from_str(&o.stdout).map_err(|e| format!("{e}: {}", o.stdout))?;
        Ok(v["preserves_order_unit"].as_str().unwrap_or("?").to_string())
    };
    let (d0, d1) = (get(&m0)?, get(&m1)?);
    ensure(d0 == "yes" && d1 == "no", || format!("m=0: {d0}, m=1: {d1}"))?;
    Ok("m=0 yes, m=1 no".into())
}

fn random_essential(rng: &mut ChaCha8Rng, n: usize, max_entry: i64) -> IntMatrix {
    loop {
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..=max_entry)).collect()).collect();
        let no_zero_row = rows.iter().all(|r| r.iter().any(|&x| x > 0));
        let no_zero_col = (0..n).all(|j| rows.iter().any(|r| r[j] > 0));
        if no_zero_row && no_zero_col {
            return IntMatrix::from_rows(&rows);
        }
    }
}

fn c3_corner_k0() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(310);
    let mut checked = 0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=4);
        let a = random_essential(&mut rng, n, 3);
        let t = DimTriple::new(a.clone()).map_err(|e| e.to_string())?;
        let ai = to_i64(&a);
        for _ in 0..10 {
            let level = rng.gen_range(0..4);
            let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
            let x = DimElem::new(level, v.iter().map(|&c| BigInt::from(c)).collect());
            let y = t.alpha_star(&t.delta(&x));
            // oracle: y = (level + 1, A v), and (level, v) lifts to (level + 1, A v)
            let av: Vec<i64> = (0..n).map(|i| (0..n).map(|j| ai[i][j] * v[j]).sum()).collect();
            ensure(y.level == level + 1 && y.vector == av.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>(), || {
                format!("alpha_* delta gives {y:?} for A = {a}")
            })?;
            let d = t.dim_equal(&y, &x, 16).map_err(|e| e.to_string())?;
            ensure(d == Decision::Yes, || format!("dim_equal = {d:?} for A = {a}, x = {v:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} elements over 20 matrices"))
}

/// Random 2-vertex essential graph with a vertex of out-degree at least 2.
fn random_split_source(rng: &mut ChaCha8Rng) -> Graph {
    loop {
        let a = random_essential(rng, 2, 2);
        let total: i64 = a.entries().iter().map(|x| i64::try_from(x).unwrap()).sum();
        if total > 5 {
            continue;
        }
        let g = Graph::from_adjacency(&a).unwrap();
        if (0..2).any(|v| g.out_edges(v).len() >= 2) {
            return g;
        }
    }
}

fn random_partition(rng: &mut ChaCha8Rng, g: &Graph, edges: &[usize]) -> Vec<Vec<String>> {
    loop {
        let mut parts = vec![Vec::new(), Vec::new()];
        for &e in edges {
            parts[rng.gen_range(0..2)].push(g.edge(e).id.clone());
        }
        if parts.iter().all(|p| !p.is_empty()) {
            return parts;
        }
    }
}

struct LiftCase {
    label: String,
    e: Graph,
    f: Graph,
    se: ShiftEquivalence,
    m: usize,
    seed: u64,
}

fn lift_cases() -> Result<Vec<LiftCase>, String> {
    let mut cases = Vec::new();
    let e = golden();
    let mut spec = SplitSpec::new();
    spec.insert("v".into(), vec![vec!["e".into()], vec!["g".into()]]);
    let res = in_split(&e, &spec).map_err(|x| x.to_string())?;
    let (se, m) = normalize_to_unital(&res.shift_equivalence(&e), 0, 8).map_err(|x| x.to_string())?;
    cases.push(LiftCase { label: "in-split example".into(), e, f: res.graph, se, m, seed: 0 });

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for i in 0..5 {
        let g = random_split_source(&mut rng);
        let v = (0..2).find(|&v| g.out_edges(v).len() >= 2).unwrap();
        let mut spec = SplitSpec::new();
        spec.insert(g.vertex_id(v).into(), random_partition(&mut rng, &g, g.out_edges(v)));
        let res = out_split(&g, &spec).map_err(|x| x.to_string())?;
        let (se, m) = normalize_to_unital(&res.shift_equivalence(&g), 0, 8).map_err(|x| x.to_string())?;
        cases.push(LiftCase { label: format!("random out-split {i}"), e: g, f: res.graph, se, m, seed: i + 1 });
    }
    Ok(cases)
}

fn c4_lift() -> Outcome {
    let required = ["unitality", "homomorphism", "K0(φ) = S", "K0(ψ) = R", "ψφ = j^E", "φψ = j^F"];
    let mut slowest = 0.0f64;
    let cases = lift_cases()?;
    for c in &cases {
        let t = Instant::now();
        let cert = serde_json::to_string(&c.se).unwrap();
        let (m, seed) = (c.m.to_string(), c.seed.to_string());
        let out = cli(&["--json", "lift", &graph_json(&c.e), &graph_json(&c.f), &cert, "--m", &m, "--depth", "2", "--seed", &seed]);
        let dt = t.elapsed().as_secs_f64();
        slowest = slowest.max(dt);
        ensure(dt < 60.0, || format!("{}: {dt:.1}s", c.label))?;
        let v: Value = serde_json::from_str(&out.stdout).map_err(|e| format!("{}: {e}: {}", c.label, out.stderr))?;
        let checks = v["checks"].as_array().cloned().unwrap_or_default();
        let failed: Vec<String> =
            checks.iter().filter(|x| x["passed"] != Value::Bool(true)).map(|x| format!("{} {}", x["name"], x["levels"])).collect();
        ensure(out.code == 0 && failed.is_empty(), || format!("{}: exit {}, failed {failed:?}", c.label, out.code))?;
        let names: Vec<&str> = checks.iter().filter_map(|x| x["name"].as_str()).collect();
        for r in required {
            ensure(names.contains(&r), || format!("{}: no `{r}` check", c.label))?;
        }
        for k in 1..=5 {
            ensure(names.iter().any(|n| n.starts_with(&format!("Ex{k}:"))), || format!("{}: no Ex{k} check", c.label))?;
        }
    }
    Ok(format!("{} lifts, all identities pass, slowest {slowest:.2}s", cases.len()))
}

fn c5_twist() -> Outcome {
    let mut checked = 0;
    for (i, c) in lift_cases()?.into_iter().enumerate() {
        // the flagship also gets a third level of twists
        let depth = if i == 0 { 3 } else { 2 };
        let input = LiftInput::new(c.e, c.f, c.se, c.m).map_err(|e| e.to_string())?.with_seed(c.seed);
        let lift = build_towers(input, depth).map_err(|e| e.to_string())?;
        ensure(lift.report.passed(), || format!("{}: lift failed", c.label))?;
        let l = lift.tables.input().lag();
        let want = pow_i64(&to_i64(lift.tables.input().shift_equivalence().a()), 2 * l - 1);
        for k in 0..depth - 1 {
            let g = lift.tables.twist_g(k).map_err(|e| e.to_string())?;
            let got = to_i64(&g.k0().map_err(|e| e.to_string())?);
            ensure(got == want, || format!("{}: K0(g_{k}) = {got:?}, want {want:?}", c.label))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} twists exact"))
}

fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(1..=8);
    let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let edges = (0..m).map(|i| (format!("e{i}"), vertices[rng.gen_range(0..n)].clone(), vertices[rng.gen_range(0..n)].clone()));
    Graph::new(vertices.clone(), edges.collect::<Vec<_>>()).unwrap()
}

fn c6_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut done = 0;
    let mut draws = 0;
    while done < 100 {
        draws += 1;
        let g = random_graph(&mut rng);
        let dir = if rng.gen_bool(0.5) { Direction::Out } else { Direction::In };
        let incident = |v: usize| if dir == Direction::Out { g.out_edges(v) } else { g.in_edges(v) };
        let eligible: Vec<usize> = (0..g.num_vertices()).filter(|&v| incident(v).len() >= 2).collect();
        if eligible.is_empty() {
            continue;
        }
        let v = eligible[rng.gen_range(0..eligible.len())];
        let mut spec = SplitSpec::new();
        spec.insert(g.vertex_id(v).into(), random_partition(&mut rng, &g, incident(v)));
        let split = match dir {
            Direction::Out => out_split(&g, &spec),
            Direction::In => in_split(&g, &spec),
        }
        .map_err(|e| format!("{g}: {e}"))?;
        let se = ShiftEquivalence::new(g.adjacency(true), split.graph.adjacency(true), split.s.clone(), split.r.clone(), 1);
        ensure(se.is_ok(), || format!("split of {g} gives an invalid (S, R)"))?;
        let id = g.vertex_id(v);
        let a = split.graph.vertex_by_id(&format!("{id}^1")).ok_or("missing copy 1")?;
        let b = split.graph.vertex_by_id(&format!("{id}^2")).ok_or("missing copy 2")?;
        let back = amalgamate_pair(&split.graph, dir, a, b).map_err(|e| format!("{}: {e}", split.graph))?;
        let se = ShiftEquivalence::new(split.graph.adjacency(true), back.graph.adjacency(true), back.s.clone(), back.r.clone(), 1);
        ensure(se.is_ok(), || format!("amalgamation of {} gives an invalid (S, R)", split.graph))?;
        ensure(isomorphic_oracle(&g, &back.graph) && g.is_isomorphic(&back.graph), || {
            format!("{g} -> {} -> {}", split.graph, back.graph)
        })?;
        done += 1;
    }
    Ok(format!("100 round trips ({} draws), 200 (S, R) pairs verified", draws))
}

fn toeplitz() -> Lpa {
    Lpa::new(Arc::new(graph(r#"{"vertices":["v","w"],"edges":[["a","v","v"],["b","v","w"]]}"#)))
}

fn c7_rewriting() -> Outcome {
    let graphs = [
        Lpa::new(Arc::new(graph(r#"{"vertices":["v"],"edges":[["a","v","v"],["b","v","v"]]}"#))),
        Lpa::new(Arc::new(golden())),
        toeplitz(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for i in 0..500u64 {
        let lpa = &graphs[(i % 3) as usize];
        let terms = rng.gen_range(1..=6);
        let x = lpa.random_elem(&mut rng, terms, 3);
        let a = lpa.normal_form(&x, Strategy::Canonical);
        let b = lpa.normal_form(&x, Strategy::Seeded(i));
        ensure(a == b, || format!("element {i}: {} vs {}", lpa.format(&a), lpa.format(&b)))?;
        ensure(lpa.is_normal(&a), || format!("element {i}: result is reducible"))?;
    }
    for lpa in &graphs {
        let g = lpa.graph();
        for e in 0..g.num_edges() {
            for f in 0..g.num_edges() {
                let lhs = lpa.mul(&lpa.ghost(e), &lpa.edge(f));
                let rhs = if e == f { lpa.vertex(g.edge(e).range) } else { LpaElem::zero() };
                ensure(lhs == rhs, || format!("CK1 fails for {}*{}", g.edge(e).id, g.edge(f).id))?;
            }
        }
        for v in 0..g.num_vertices() {
            if g.is_sink(v) {
                continue;
            }
            let sum = g.out_edges(v).iter().fold(LpaElem::zero(), |acc, &e| acc.add(&lpa.mul(&lpa.edge(e), &lpa.ghost(e))));
            ensure(sum == lpa.vertex(v), || format!("CK2 fails at {}", g.vertex_id(v)))?;
        }
    }
    let t = toeplitz();
    let x = t.edge(0).add(&t.edge(1));
    let y = x.star();
    let p = t.one().sub(&t.mul(&x, &y));
    let unit = |i: usize, j: usize| t.product(&[&t.pow(&x, i), &p, &t.pow(&y, j)]);
    let units: Vec<Vec<LpaElem>> = (0..=4).map(|i| (0..=4).map(|j| unit(i, j)).collect()).collect();
    let mut products = 0;
    for i in 0..=4 {
        for j in 0..=4 {
            ensure(!units[i][j].is_zero(), || format!("e_{i}{j} = 0"))?;
            for k in 0..=4 {
                for l in 0..=4 {
                    let lhs = t.mul(&units[i][j], &units[k][l]);
                    let rhs = if j == k { units[i][l].clone() } else { LpaElem::zero() };
                    ensure(lhs == rhs, || format!("e_{i}{j} e_{k}{l} wrong"))?;
                    products += 1;
                }
            }
        }
    }
    Ok(format!("500 elements confluent; CK1/CK2 on 3 graphs; {products} Toeplitz products"))
}

fn two_loop_graph() -> Graph {
    graph(r#"{"vertices":["v","w"],"edges":[["e","v","v"],["f","v","w"],["g","w","w"]]}"#)
}

fn test_algebras() -> Vec<Lpa> {
    [golden(), two_loop_graph(), graph(r#"{"vertices":["v"],"edges":[["a","v","v"],["b","v","v"]]}"#)]
        .into_iter()
        .map(|g| Lpa::new(Arc::new(g)))
        .collect()
}

/// θ on a monomial γμ*, multiplied out from generator images by hand.
fn theta_by_generators(th: &ThetaData, gamma: &gradlift::Path, mu: &gradlift::Path) -> LpaElem {
    let lpa = th.lpa();
    let mut out = if gamma.is_empty() { th.on_generator(Generator::Vertex(gamma.source())) } else { lpa.one() };
    for &e in gamma.edges() {
        out = lpa.mul(&out, &th.on_generator(Generator::Edge(e)));
    }
    for &e in mu.edges().iter().rev() {
        out = lpa.mul(&out, &th.on_generator(Generator::Ghost(e)));
    }
    out
}

fn c8_conjugator() -> Outcome {
    let algebras = test_algebras();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut units = 0;
    for i in 0..20 {
        let lpa = &algebras[i % 3];
        let th = random_theta_data(lpa, &mut rng).map_err(|e| e.to_string())?;
        for n in 1..=3 {
            let c = local_conjugator(&th, n).map_err(|e| format!("pair {i}, level {n}: {e}"))?;
            let level = LevelIndex::new(lpa.graph().clone(), n);
            for (a, b) in level.units() {
                let (g, m) = (level.path(a), level.path(b));
                let x = lpa.monomial(g, m).expect("unit");
                let want = theta_by_generators(&th, g, m);
                let got = lpa.product(&[&c.u_n, &x, &c.u_n_inv]);
                ensure(got == want, || format!("pair {i}, level {n}: unit {a},{b} differs"))?;
                units += 1;
            }
        }
    }
    Ok(format!("20 pairs, {units} matrix units exact"))
}

fn c9_decompose() -> Outcome {
    let algebras = test_algebras();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for i in 0..10 {
        let lpa = &algebras[i % 3];
        let th = random_theta_data(lpa, &mut rng).map_err(|e| e.to_string())?;
        let u_inv = lpa.inverse(&th.u).map_err(|e| e.to_string())?;
        let z_inv = lpa.inverse(&th.z).map_err(|e| e.to_string())?;
        // images straight from the defining formulas
        let mut images = BTreeMap::new();
        let g = lpa.graph();
        for v in 0..g.num_vertices() {
            images.insert(Generator::Vertex(v), lpa.product(&[&th.u, &lpa.vertex(v), &u_inv]));
        }
        for e in 0..g.num_edges() {
            images.insert(Generator::Edge(e), lpa.product(&[&th.u, &lpa.edge(e), &u_inv, &th.z]));
            images.insert(Generator::Ghost(e), lpa.product(&[&z_inv, &th.u, &lpa.ghost(e), &u_inv]));
        }
        let back = decompose_graded_auto(lpa, &images, &th.u).map_err(|e| format!("case {i}: {e}"))?;
        for (gen, img) in &images {
            ensure(&back.on_generator(*gen) == img, || format!("case {i}: {} differs", lpa.generator_label(*gen)))?;
        }
        ensure(back.z == th.z, || format!("case {i}: z not recovered"))?;
    }
    Ok("10 cases, all generators agree".into())
}

fn c10_franks() -> Outcome {
    let a = mat(&[&[2]]);
    let bf_a = bowen_franks(&a).map_err(|e| e.to_string())?;
    ensure(bf_a.det_sign == -1 && bf_a.group.is_trivial(), || format!("BF([[2]]) = ({}, {})", bf_a.group, bf_a.det_sign))?;
    let b = find_positive_trivial_bf(2, 3).ok_or("no candidate with entries <= 3")?;
    let bi = to_i64(&b);
    let n = bi.len();
    let i_minus: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j) - bi[i][j]).collect()).collect();
    let det = det_i64(&i_minus);
    ensure(det == 1, || format!("det(I - B) = {det} by cofactors for B = {b}"))?;
    let rep = franks_obstruction(&a, &b).map_err(|e| e.to_string())?;
    ensure(rep.b.group.is_trivial() && rep.b.det_sign == 1, || format!("BF(B) = ({}, {})", rep.b.group, rep.b.det_sign))?;
    ensure(rep.obstructed, || "invariants do not separate".into())?;
    Ok(format!("B = {b}, det(I-A) = -1, det(I-B) = {det}"))
}
