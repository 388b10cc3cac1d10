//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use khier::exact::{brute_force_opt, bound_holds, uniform_optimal_cost_f, weighted_lower_bound, BruteForceConfig};
use khier::instances::{
    gen_3partition, gen_random, parse_hierarchy_for, parse_instance, write_hierarchy, GenKind, GenSpec, Prng,
    ThreePartitionSpec,
};
use khier::model::{
    eval_cost_member, eval_cost_total, hierarchy_cost, Hierarchy, MemberId, MulticastOracle,
    UniformOracle, Weights,
};
use khier::multicast::{build_last, mst_of_metric, GraphOracle, LastParams, RoutingNetwork};
use khier::routed::{approx_graph, approx_tree, binarize, RoutedParams};
use khier::uniform::{ptas_build, PtasParams};
use khier::Instance;
use num_bigint::BigUint;
use num_rational::Ratio;

const BRUTE_N9_BUDGET: Duration = Duration::from_secs(300);
const EQ_TRIPLES: usize = 1000;
const LOWER_BOUND_INSTANCES: usize = 200;
const BINARIZE_HIERARCHIES: usize = 500;
const PTAS_INSTANCES_PER_EPS: usize = 100;
const ROUTED_INSTANCES: usize = 100;
/// 4.2 as a fraction.
const UNIFORM_TREE_RATIO: (u64, u64) = (42, 10);
const GRAPH_FACTOR: u64 = 75;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn load(name: &str) -> Instance {
    parse_instance(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn khier(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_khier"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    cmd.output().expect("run khier")
}

fn numbered(n: usize) -> Vec<MemberId> {
    khier::exact::numbered_members(n)
}

fn random_weights(rng: &mut Prng, n: usize, max: u64) -> Weights {
    Weights::new(numbered(n).into_iter().map(|m| (m, rng.range(1, max))))
}

fn random_hierarchy(rng: &mut Prng, members: &[MemberId]) -> Hierarchy {
    let mut parts: Vec<Hierarchy> = members.iter().cloned().map(Hierarchy::leaf).collect();
    while parts.len() > 1 {
        let k = rng.range(2, parts.len().min(4) as u64) as usize;
        let chosen = (0..k).map(|_| parts.swap_remove(rng.below(parts.len() as u64) as usize)).collect();
        parts.push(Hierarchy::combine(chosen).unwrap());
    }
    parts.pop().unwrap()
}

fn opt(weights: &Weights, oracle: &dyn MulticastOracle) -> u64 {
    brute_force_opt(weights, oracle, &BruteForceConfig::default()).unwrap().cost
}

/// Subset costs drawn from a fixed random table keyed by the subset.
struct SaltedOracle(u64);

impl MulticastOracle for SaltedOracle {
    fn multicast_cost(&self, members: &[MemberId]) -> khier::Result<u64> {
        let mut h = self.0 ^ 0x9e37_79b9_7f4a_7c15;
        for m in members {
            for b in m.as_str().bytes().chain([b'|']) {
                h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
            }
        }
        Ok(h % 97)
    }
}

fn c1_update_cost_u4() -> Outcome {
    let inst = load("nine_members.ki");
    let text = std::fs::read_to_string(fixture("nine_members.kh")).unwrap();
    let h = parse_hierarchy_for(&text, &inst).map_err(|e| e.to_string())?;
    let oracle = inst.oracle().unwrap();
    let u4 = eval_cost_member(&h, &MemberId::new("U4").unwrap(), &oracle).map_err(|e| e.to_string())?;
    let out = khier(&["eval", "--instance", fixture("nine_members.ki").to_str().unwrap(), "--hierarchy", fixture("nine_members.kh").to_str().unwrap()], None);
    let cli = String::from_utf8_lossy(&out.stdout).lines().any(|l| l == "member U4 29");
    if u4 == 29 && cli {
        Ok("update cost at U4 = 29 (library and CLI)".into())
    } else {
        Err(format!("U4 cost {u4}, CLI line present: {cli}"))
    }
}

fn c2_uniform_optimum() -> Outcome {
    let expected = [0u64, 4, 9, 16, 23, 30, 38, 46, 54];
    let mut n9 = Duration::ZERO;
    for n in 1..=9 {
        let f = uniform_optimal_cost_f(n as u64).unwrap();
        if f != expected[n - 1] {
            return Err(format!("f({n}) = {f}, expected {}", expected[n - 1]));
        }
        let start = Instant::now();
        let cost = opt(&Weights::uniform(&numbered(n), 1), &UniformOracle(1));
        if n == 9 {
            n9 = start.elapsed();
        }
        if cost != f {
            return Err(format!("brute force {cost} != f({n}) = {f}"));
        }
    }
    if n9 > BRUTE_N9_BUDGET {
        return Err(format!("n = 9 took {n9:?}"));
    }
    Ok(format!("brute force = f(n) for n = 1..9; n = 9 in {:.2}s", n9.as_secs_f64()))
}

fn c3_cost_formulas() -> Outcome {
    let mut rng = Prng::new(3);
    for t in 0..EQ_TRIPLES {
        let n = rng.range(1, 12) as usize;
        let w = random_weights(&mut rng, n, 50);
        let h = random_hierarchy(&mut rng, &numbered(n));
        let oracle = SaltedOracle(rng.next_u64());
        let total = eval_cost_total(&h, &w, &oracle).unwrap().total;
        let mut by_member = 0u64;
        for m in numbered(n) {
            by_member += w.weight(&m).unwrap() * eval_cost_member(&h, &m, &oracle).unwrap();
        }
        if by_member != total {
            return Err(format!("triple {t}: per-member sum {by_member} != per-node sum {total}"));
        }
    }
    Ok(format!("{EQ_TRIPLES} random triples agree exactly"))
}

fn c4_lower_bound() -> Outcome {
    let mut rng = Prng::new(4);
    let mut tightest = f64::INFINITY;
    for t in 0..LOWER_BOUND_INSTANCES {
        let n = rng.range(1, 7) as usize;
        let w = random_weights(&mut rng, n, 30);
        let bound = weighted_lower_bound(&w).unwrap();
        let cost = opt(&w, &UniformOracle(1));
        if !bound_holds(bound, cost) {
            return Err(format!("instance {t}: bound {bound} > optimum {cost}"));
        }
        if cost > 0 {
            tightest = tightest.min(cost as f64 - bound);
        }
    }
    Ok(format!("{LOWER_BOUND_INSTANCES} instances, smallest slack {tightest:.4}"))
}

fn c5_binarize() -> Outcome {
    let mut rng = Prng::new(5);
    let mut worst = 0f64;
    for t in 0..BINARIZE_HIERARCHIES {
        let n = rng.range(1, 16) as usize;
        let w = random_weights(&mut rng, n, 40);
        let h = random_hierarchy(&mut rng, &numbered(n));
        let b = binarize(&h, &w).unwrap();
        let before = hierarchy_cost(&h, &w, &UniformOracle(1)).unwrap();
        let after = hierarchy_cost(&b, &w, &UniformOracle(1)).unwrap();
        if !b.is_binary().unwrap() || b.member_set().unwrap() != h.member_set().unwrap() || after > 3 * before {
            return Err(format!("hierarchy {t}: binary {}, cost {before} -> {after}", b.is_binary().unwrap()));
        }
        if before > 0 {
            worst = worst.max(after as f64 / before as f64);
        }
    }
    Ok(format!("{BINARIZE_HIERARCHIES} hierarchies, worst factor {worst:.3}"))
}

fn c6_ptas() -> Outcome {
    let mut rng = Prng::new(6);
    let mut exact_cases = 0;
    for eps in [Ratio::from_integer(1u64), Ratio::new(1, 3)] {
        let params = PtasParams::new(eps).unwrap();
        let (p, q) = (*eps.numer() as u128, *eps.denom() as u128);
        for t in 0..PTAS_INSTANCES_PER_EPS {
            let n = rng.range(1, 7) as usize;
            let w = random_weights(&mut rng, n, 30);
            let out = ptas_build(&w, &UniformOracle(1), &params).unwrap();
            let cost = hierarchy_cost(&out.hierarchy, &w, &UniformOracle(1)).unwrap() as u128;
            let best = opt(&w, &UniformOracle(1)) as u128;
            if cost * q > best * (q + 3 * p) {
                return Err(format!("eps {eps}, instance {t}: {cost} > (1+3eps) * {best}"));
            }
            if out.light.is_empty() {
                exact_cases += 1;
                if cost * q > best * (q + p) {
                    return Err(format!("eps {eps}, instance {t}: empty light set but {cost} > (1+eps) * {best}"));
                }
            }
        }
    }
    Ok(format!("eps in {{1, 1/3}}, {} instances, {exact_cases} with empty light set", 2 * PTAS_INSTANCES_PER_EPS))
}

fn c7_approx_tree() -> Outcome {
    let star = load("star3.ki");
    let params = RoutedParams::new(Ratio::new(1, 2)).unwrap();
    let star_cost = hierarchy_cost(&approx_tree(&star, &params).unwrap().hierarchy, star.weights(), &star.oracle().unwrap()).unwrap();
    let star_opt = opt(star.weights(), &star.oracle().unwrap());
    if (star_cost, star_opt) != (23, 18) {
        return Err(format!("star example: cost {star_cost}, optimum {star_opt}"));
    }
    let (p, q) = (1u128, 2u128);
    let mut worst = 0f64;
    for t in 0..ROUTED_INSTANCES {
        let n = 1 + t % 7;
        let inst = gen_random(&GenSpec::new(GenKind::RandomTree, n, 7000 + t as u64)).unwrap();
        let oracle = inst.oracle().unwrap();
        let cost = hierarchy_cost(&approx_tree(&inst, &params).unwrap().hierarchy, inst.weights(), &oracle).unwrap() as u128;
        let best = opt(inst.weights(), &oracle) as u128;
        if cost * q > best * (11 * q + p) {
            return Err(format!("instance {t}: {cost} > (11+eps) * {best}"));
        }
        if best > 0 {
            worst = worst.max(cost as f64 / best as f64);
        }
    }
    Ok(format!("star 23 vs 18; {ROUTED_INSTANCES} weighted trees, worst ratio {worst:.3} <= 11.5"))
}

fn c8_uniform_trees() -> Outcome {
    let params = RoutedParams::new(Ratio::new(1, 2)).unwrap();
    let (num, den) = (UNIFORM_TREE_RATIO.0 as u128, UNIFORM_TREE_RATIO.1 as u128);
    let mut worst = 0f64;
    let mut levels = 0;
    for t in 0..ROUTED_INSTANCES {
        let n = 2 + t % 6;
        let spec = GenSpec {
            max_weight: 1,
            ..GenSpec::new(GenKind::RandomTree, n, 8000 + t as u64)
        };
        let inst = gen_random(&spec).unwrap();
        let oracle = inst.oracle().unwrap();
        let out = approx_tree(&inst, &params).unwrap();
        if let Some(level) = out.trace.iter().find(|l| !l.balanced) {
            return Err(format!("instance {t}: unbalanced partition at a level with {} members", level.members));
        }
        levels += out.trace.len();
        let cost = hierarchy_cost(&out.hierarchy, inst.weights(), &oracle).unwrap() as u128;
        let best = opt(inst.weights(), &oracle) as u128;
        if cost * den > best * num {
            return Err(format!("instance {t} (n = {n}): ratio {cost}/{best} above 4.2"));
        }
        worst = worst.max(cost as f64 / best as f64);
    }
    Ok(format!("{ROUTED_INSTANCES} unit-weight trees, {levels} levels all balanced, worst ratio {worst:.3}"))
}

/// `lhs <= sqrt(2) * rhs` by squaring.
fn sqrt2_le(lhs: u64, lhs_scale: u64, rhs: u64, rhs_scale: u64) -> bool {
    let l = BigUint::from(lhs) * BigUint::from(lhs_scale);
    let r = BigUint::from(rhs) * BigUint::from(rhs_scale);
    &l * &l <= BigUint::from(2u8) * &r * &r
}

fn c9_approx_graph() -> Outcome {
    let gamma = Ratio::from_integer(7u64);
    let params = RoutedParams::new(Ratio::new(1, 2)).unwrap().with_gamma(gamma).unwrap();
    let last_params = LastParams::new(gamma).unwrap();
    let (a, b) = (*gamma.numer(), *gamma.denom());
    let mut lasts = 0;
    let mut worst = 0f64;
    for t in 0..ROUTED_INSTANCES {
        let n = 1 + t % 6;
        let inst = gen_random(&GenSpec::new(GenKind::RandomGraph, n, 9000 + t as u64)).unwrap();
        let oracle = inst.oracle().unwrap();
        let out = approx_graph(&inst, &params).unwrap();
        if out.trace.iter().any(|l| l.last.is_none_or(|c| !(c.stretch_ok && c.light_ok))) {
            return Err(format!("instance {t}: a recursion level reported a LAST violation"));
        }
        let cost = hierarchy_cost(&out.hierarchy, inst.weights(), &oracle).unwrap();
        let best = opt(inst.weights(), &oracle);
        if cost as u128 > GRAPH_FACTOR as u128 * best as u128 {
            return Err(format!("instance {t}: {cost} > 75 * {best}"));
        }
        if best > 0 {
            worst = worst.max(cost as f64 / best as f64);
        }
        // Every LAST the recursion can build is over some member subset;
        // check all of them independently.
        let RoutingNetwork::Graph(net) = inst.network() else { unreachable!() };
        let full = GraphOracle::new(net, inst.controller(), &inst.members()).unwrap();
        let ms = inst.members();
        for mask in 1u32..(1 << ms.len()) {
            let vertices: Vec<_> = (0..ms.len()).filter(|i| mask >> i & 1 == 1).map(|i| ms[i].vertex()).collect();
            let metric = full.metric().restrict(&vertices).unwrap();
            let last = build_last(&metric, &last_params);
            let dist = last.root_distances();
            for v in 0..metric.len() {
                let d = metric.distance(metric.root(), v);
                if dist[v] > d && !sqrt2_le(dist[v] - d, b, d, a) {
                    return Err(format!("instance {t}: stretch violated at {}", metric.points()[v]));
                }
            }
            let (w, m) = (last.weight(), mst_of_metric(&metric).weight());
            if w > m && !sqrt2_le(w - m, a, m, b) {
                return Err(format!("instance {t}: lightness violated ({w} vs MST {m})"));
            }
            lasts += 1;
        }
    }
    Ok(format!("{ROUTED_INSTANCES} graphs, worst ratio {worst:.3} <= 75; {lasts} LASTs within stretch and lightness"))
}

fn c10_three_partition() -> Outcome {
    let r = gen_3partition(&ThreePartitionSpec {
        sizes: vec![5, 6, 7],
        bound: 18,
        base_weight: 50,
        root_cost: 28_225,
    })
    .map_err(|e| e.to_string())?;
    let best = opt(r.instance.weights(), &r.instance.oracle().unwrap());
    let (c, w) = (28_225u64, r.instance.weights().total().unwrap());
    let closed = c * 3 * w + w * w;
    if best == closed && best == 14_253_624 {
        Ok(format!("optimum {best} = C*3W + W^2"))
    } else {
        Err(format!("optimum {best}, closed form {closed}"))
    }
}

fn c11_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("khier-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tree = dir.join("tree.ki");
    let graph = dir.join("graph.ki");
    let gen = |kind: &str, path: &Path| khier(&["generate", "--kind", kind, "--n", "7", "--seed", "11", "--out", path.to_str().unwrap()], None);
    if !gen("random-tree", &tree).status.success() || !gen("random-graph", &graph).status.success() {
        return Err("generate failed".into());
    }
    let cases = [
        ("brute", &tree),
        ("uniform-opt", &tree),
        ("ptas", &tree),
        ("huffman", &graph),
        ("approx-tree", &tree),
        ("approx-graph", &graph),
    ];
    for (alg, inst) in cases {
        let run = |threads: &str| khier(&["solve", "--alg", alg, "--instance", inst.to_str().unwrap()], Some(threads));
        let (a, b, c) = (run("1"), run("4"), run("4"));
        if !a.status.success() || a.stdout != b.stdout || b.stdout != c.stdout {
            return Err(format!("solve --alg {alg} output differs between runs"));
        }
        // The printed hierarchy re-evaluates to the printed cost.
        let text = String::from_utf8(a.stdout).unwrap();
        let (body, cost_line) = text.rsplit_once("cost ").unwrap();
        let parsed = parse_instance(&std::fs::read_to_string(inst).unwrap()).unwrap();
        let h = parse_hierarchy_for(body, &parsed).map_err(|e| e.to_string())?;
        let cost = hierarchy_cost(&h, parsed.weights(), &parsed.oracle().unwrap()).unwrap();
        if cost.to_string() != cost_line.trim() || write_hierarchy(&h).unwrap() != body {
            return Err(format!("solve --alg {alg}: printed output does not re-evaluate"));
        }
    }
    let ratio = |threads: &str, extra: &[&str]| {
        let mut args = vec!["ratio", "--alg", "approx-tree", "--kind", "random-tree", "--n-range", "3..7", "--trials", "20", "--seed", "1"];
        args.extend_from_slice(extra);
        khier(&args, Some(threads))
    };
    let base = ratio("1", &[]);
    let rows = String::from_utf8_lossy(&base.stdout).lines().count();
    if !base.status.success() || rows != 101 {
        return Err(format!("ratio sweep produced {rows} lines"));
    }
    for (threads, extra) in [("2", &[][..]), ("8", &[][..]), ("8", &["--sequential"][..])] {
        if ratio(threads, extra).stdout != base.stdout {
            return Err(format!("ratio output differs with {threads} threads {extra:?}"));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok("6 solvers byte-identical across runs and thread counts; 100-row ratio CSV stable".into())
}

fn main() {
    // Ignore harness flags such as `--nocapture` or test-name filters.
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 update cost at U4", c1_update_cost_u4),
        ("2 uniform optimum f(n)", c2_uniform_optimum),
        ("3 per-member vs per-node cost", c3_cost_formulas),
        ("4 weighted lower bound", c4_lower_bound),
        ("5 binarization within 3x", c5_binarize),
        ("6 uniform scheme within 1+3eps", c6_ptas),
        ("7 tree algorithm within 11+eps", c7_approx_tree),
        ("8 unit-weight trees within 4.2, balanced", c8_uniform_trees),
        ("9 graph algorithm within 75, LAST checks", c9_approx_graph),
        ("10 3-partition optimum", c10_three_partition),
        ("11 determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
