//! Acceptance suite AC1 through AC10. Runs without the libtest harness so the
//! PASS/FAIL table is always printed; exits nonzero when any criterion fails.
//! Positional arguments select criteria by substring of `acceptance::acN`.

mod common;

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use common::{graph_from_mask, naive_modularity};
use modbisect::bisection::{alon_constant, load_balance_check};
use modbisect::bounds::{bound_main, bound_main_dual, chung_lu_upper_report, pk_evaluate, spectral_gap, MAIN_CONSTANT};
use modbisect::generators::{
    gen_chung_lu, gen_complete_bipartite, gen_fixed_degree_sequence, gen_gnp, gen_pam, gen_random_regular,
    ChungLuWeights, PamParams,
};
use modbisect::matching::{claim_window_check, delta9_budget, greedy_matching_with, verify_no_short_loops};
use modbisect::modularity::{brute_force_qstar, nearly_bisection_lower_bound, robustness_gap, score, two_part_score};
use modbisect::pipeline::{five_term_decomposition, partition_bulk_split, split_bulk};
use modbisect::report::degree_law_fit;
use modbisect::rng::{domain, substream};
use modbisect::{ActiveUpdate, Graph, MatchingOptions, Partition, PipelineOptions, Rational, Result, VertexSet};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new(pass: bool) -> Self {
        Self { pass, lines: Vec::new() }
    }

    fn note(mut self, line: impl Into<String>) -> Self {
        self.lines.push(line.into());
        self
    }
}

type Criterion = fn() -> Result<Outcome>;

fn rng(index: u64) -> ChaCha8Rng {
    substream(20_260_101, domain::EXPERIMENT, index)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let criteria: [(&str, Criterion); 10] = [
        ("oracle exactness", ac1),
        ("score laws", ac2),
        ("matching guarantees", ac3),
        ("lemma inequalities", ac4),
        ("cut bound, 3-regular", ac5),
        ("modularity achieved", ac6),
        ("tightness direction", ac7),
        ("preferential attachment law", ac8),
        ("spectral consistency", ac9),
        ("robustness", ac10),
    ];
    let names: Vec<String> = (1..=criteria.len()).map(|i| format!("acceptance::ac{i}")).collect();
    if args.iter().any(|a| a == "--list") {
        for name in &names {
            println!("{name}: test");
        }
        return ExitCode::SUCCESS;
    }
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        if !filters.is_empty() && !filters.iter().any(|f| names[i].contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false).note(format!("error: {e}")));
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("AC{} {verdict} {title} ({:.1}s)", i + 1, start.elapsed().as_secs_f64());
        for line in &outcome.lines {
            println!("    {line}");
        }
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn random_graph(rng: &mut ChaCha8Rng, min_n: usize, max_n: usize) -> Graph {
    loop {
        let n = rng.random_range(min_n..=max_n);
        let p = rng.random_range(0.05..0.8);
        let mask: Vec<bool> = (0..n * (n - 1) / 2).map(|_| rng.random_bool(p)).collect();
        let g = graph_from_mask(n, &mask);
        if g.m() > 0 {
            return g;
        }
    }
}

fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    Graph::from_edges(10, &edges, false).unwrap()
}

fn complete(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Graph::from_edges(n, &edges, false).unwrap()
}

fn ac1() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut exact = true;
    let mut checked = 0;
    for a in 1..=8 {
        for b in 1..=9 - a {
            let q = brute_force_qstar(&gen_complete_bipartite(a, b)?)?;
            exact &= q.value == Rational::from_integer(0);
            worst = worst.max(q.value_f64().abs());
            checked += 1;
        }
    }
    let k3 = brute_force_qstar(&complete(3))?.value;
    let two_k2 = brute_force_qstar(&Graph::from_edges(4, &[(0, 1), (2, 3)], false)?)?.value;
    let pass = exact && worst <= 1e-12 && k3 == Rational::from_integer(0) && two_k2 == Rational::new(1, 2);
    Ok(Outcome::new(pass)
        .note(format!("K_(a,b), 2 <= a+b <= 9: {checked} graphs, max |q*| = {worst:e}, all exactly zero: {exact}"))
        .note(format!("q*(K3) = {k3}, q*(2K2) = {two_k2}")))
}

fn ac2() -> Result<Outcome> {
    let mut rng = rng(2);
    let trials = 10_000;
    let (mut range_bad, mut single_bad, mut two_bad, mut five_bad, mut def_bad) = (0, 0, 0, 0, 0);
    let (mut worst_two, mut worst_five) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let g = random_graph(&mut rng, 2, 30);
        let n = g.n();
        let k = rng.random_range(1..=6);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let p = Partition::from_labels(&labels);
        let exact = score::<Rational>(&g, &p)?.q;
        let approx = score::<f64>(&g, &p)?.q;
        range_bad += usize::from(!(-0.5..=1.0).contains(&approx));
        def_bad += usize::from(exact != naive_modularity(&g, &p) || (approx - to_f64(&exact)).abs() > 1e-12);
        single_bad += usize::from(score::<f64>(&g, &Partition::single(n))?.q != 0.0);

        let quarter: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let sets: Vec<VertexSet> =
            (0..4).map(|j| VertexSet::from_indices(n, (0..n).filter(|&v| quarter[v] == j)).unwrap()).collect();
        let side = sets[0].union(&sets[2]);
        if side.is_empty() || side.len() == n {
            continue;
        }
        let bipart: Vec<usize> = (0..n).map(|v| usize::from(!side.contains(v))).collect();
        let two = two_part_score::<f64>(&g, &side)?;
        let direct = score::<f64>(&g, &Partition::from_labels(&bipart))?.q;
        worst_two = worst_two.max((two - direct).abs());
        two_bad += usize::from((two - direct).abs() > 1e-12);
        let five = five_term_decomposition::<f64>(&g, &sets[0], &sets[1], &sets[2], &sets[3])?.sum();
        worst_five = worst_five.max((five - two).abs());
        five_bad += usize::from((five - two).abs() > 1e-10);
    }
    let bad = range_bad + single_bad + two_bad + five_bad + def_bad;
    Ok(Outcome::new(bad == 0)
        .note(format!("{trials} random (graph, partition) pairs with n <= 30"))
        .note(format!(
            "violations: range {range_bad}, single part {single_bad}, definition {def_bad}, two-part {two_bad}, five-term {five_bad}"
        ))
        .note(format!("max |two_part - score| = {worst_two:e}, max |five_term - two_part| = {worst_five:e}")))
}

/// Degree sequence with maximum exactly `delta`, even sum.
fn bounded_degrees(rng: &mut ChaCha8Rng, n: usize, delta: usize) -> Vec<usize> {
    let mut d: Vec<usize> = (0..n).map(|_| rng.random_range(1..=delta)).collect();
    d[0] = delta;
    if d.iter().sum::<usize>() % 2 == 1 {
        let v = (1..n).find(|&v| d[v] < delta).unwrap_or(1);
        d[v] += 1;
    }
    d
}

fn ac3() -> Result<Outcome> {
    let mut rng = rng(3);
    let (lo, hi) = (10_000f64.ln(), 120_000f64.ln());
    let mut failures = Vec::new();
    let (mut nonvacuous, mut matched_fraction, mut steps) = (0, 0.0, 0usize);
    let mut count = 0;
    for delta in [2usize, 3] {
        for i in 0..100u64 {
            let n = (rng.random_range(lo..hi).exp() / 2.0).round() as usize * 2;
            let seed = 1000 * delta as u64 + i;
            let sample = if i % 2 == 0 {
                gen_random_regular(n, delta, seed)?
            } else {
                gen_fixed_degree_sequence(&bounded_degrees(&mut rng, n, delta), seed)?
            };
            let g = sample.graph;
            let big = g.max_degree();
            let budget = delta9_budget(big);
            let run = greedy_matching_with(&g, &MatchingOptions::strict().with_trace())?;
            let m = &run.matching;
            let verified = verify_no_short_loops(&g, m)?.passed();
            let bandwidth_ok = m.bandwidth_observed() <= budget;
            let tail_ok = m.delta9_budget() == budget && m.unmatched_in_tail();
            let claim = claim_window_check(&g, run.trace.as_ref().expect("trace requested"))?;
            if !(verified && bandwidth_ok && tail_ok && claim.passed() && (big == 2 || big == 3)) {
                failures.push(format!(
                    "n={} delta={big}: verify {verified} bandwidth {bandwidth_ok} tail {tail_ok} claim {}",
                    g.n(),
                    claim.passed()
                ));
            }
            if g.n() > budget {
                nonvacuous += 1;
                matched_fraction += 2.0 * m.len() as f64 / g.n() as f64;
            }
            steps += claim.steps_checked;
            count += 1;
        }
    }
    let mut out = Outcome::new(failures.is_empty())
        .note(format!("{count} strict runs, {} failures, {steps} greedy steps checked", failures.len()))
        .note(format!(
            "{nonvacuous} graphs with n > Delta^9 (mean matched fraction {:.4}); the rest leave every vertex in the tail",
            matched_fraction / nonvacuous.max(1) as f64
        ));
    for f in failures.iter().take(5) {
        out = out.note(f.clone());
    }
    Ok(out)
}

fn ac4() -> Result<Outcome> {
    let mut rng = rng(4);
    let mut lb_bad = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(2..=400);
        let mut f: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        f.sort_by(|a, b| b.total_cmp(a));
        let bandwidth = rng.random_range(1..=25);
        let mut used = vec![false; n];
        let mut pairs = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for i in order {
            let j = i + rng.random_range(1..=bandwidth);
            if j < n && !used[i] && !used[j] && rng.random_bool(0.8) {
                used[i] = true;
                used[j] = true;
                pairs.push(if rng.random_bool(0.5) { (i, j) } else { (j, i) });
            }
        }
        lb_bad += usize::from(!load_balance_check(&f, &pairs, bandwidth)?.holds);
    }
    let (mut nb_bad, mut printed_bad, mut checked) = (0, 0, 0);
    while checked < 1000 {
        let g = random_graph(&mut rng, 3, 40);
        let n = g.n();
        let r_share = rng.random_range(0.0..0.4);
        let labels: Vec<usize> =
            (0..n).map(|_| if rng.random_bool(r_share) { 2 } else { rng.random_range(0..2) }).collect();
        let sets: Vec<VertexSet> =
            (0..3).map(|j| VertexSet::from_indices(n, (0..n).filter(|&v| labels[v] == j)).unwrap()).collect();
        if 3 * g.volume(&sets[2]) > 2 * g.m() {
            continue;
        }
        let nb = nearly_bisection_lower_bound::<Rational>(&g, &sets[0], &sets[1], &sets[2])?;
        nb_bad += usize::from(nb.lower_bound > nb.actual_q);
        printed_bad += usize::from(nb.stated_bound > nb.actual_q);
        checked += 1;
    }
    Ok(Outcome::new(lb_bad == 0 && nb_bad == 0)
        .note(format!("load balancing: 10000 triples, {lb_bad} violations"))
        .note(format!("three-part bound (with remainder correction): {checked} partitions, {nb_bad} violations"))
        .note(format!("uncorrected three-part form exceeds the actual score in {printed_bad} of {checked}")))
}

struct RegularRun {
    cut_fraction: f64,
    c_eff: f64,
    q: f64,
    achieved: bool,
}

const REGULAR_N: usize = 120_000;

fn regular_runs() -> &'static Result<Vec<RegularRun>> {
    static RUNS: OnceLock<Result<Vec<RegularRun>>> = OnceLock::new();
    RUNS.get_or_init(|| {
        (0..10u64)
            .map(|seed| {
                let g = gen_random_regular(REGULAR_N, 3, seed)?.graph;
                let r = partition_bulk_split(&g, 2.0, &PipelineOptions::with_seed(seed))?;
                Ok(RegularRun {
                    cut_fraction: r.diagnostics.cut_fraction,
                    c_eff: r.diagnostics.c_eff,
                    q: r.q_achieved,
                    achieved: r.diagnostics.bisection_achieved,
                })
            })
            .collect()
    })
}

fn ac5() -> Result<Outcome> {
    let runs = regular_runs().as_ref().map_err(Clone::clone)?;
    let c: f64 = alon_constant();
    let relaxed = 0.5 - 0.8 * c / 3f64.sqrt();
    let hits = runs.iter().filter(|r| r.cut_fraction <= relaxed).count();
    let full = runs.iter().filter(|r| r.achieved).count();
    let effs: Vec<String> = runs.iter().map(|r| format!("{:.4}", r.c_eff)).collect();
    let g = gen_random_regular(REGULAR_N, 3, 0)?.graph;
    let opts = PipelineOptions { update: ActiveUpdate::Resample, ..PipelineOptions::with_seed(0) };
    let resample = partition_bulk_split(&g, 2.0, &opts)?;
    Ok(Outcome::new(hits >= 8)
        .note(format!("cut/m <= {relaxed:.4} (relaxed constant 0.8c) on {hits}/10 seeds"))
        .note(format!("c_eff per seed: {}", effs.join(" ")))
        .note(format!("full constant c = {c:.4} reached on {full}/10 seeds (reported, not gated)"))
        .note(format!("fair-coin step-2 rule, seed 0: c_eff = {:.4}", resample.diagnostics.c_eff)))
}

fn ac6() -> Result<Outcome> {
    let runs = regular_runs().as_ref().map_err(Clone::clone)?;
    let regular_hits = runs.iter().filter(|r| r.q >= 0.12).count();
    let qs: Vec<String> = runs.iter().map(|r| format!("{:.4}", r.q)).collect();
    let n = 100_000;
    let (mut hits, mut flags_ok, mut dual_ok) = (0, true, true);
    let mut lines = Vec::new();
    for seed in 0..10u64 {
        let g = gen_gnp(n, 20.0 / n as f64, seed)?;
        let r = partition_bulk_split(&g, 2.0, &PipelineOptions::with_seed(seed))?;
        let gamma = r.diagnostics.gamma.expect("bulk route reports gamma");
        let dbar = g.average_degree();
        let target = 0.8 * MAIN_CONSTANT * gamma / (2.0 * dbar).sqrt();
        hits += usize::from(r.q_achieved >= target);
        flags_ok &= r.bound_vacuous && r.bound.vacuous;
        let dual = bound_main_dual(n, dbar, g.max_degree(), 2.0, gamma);
        dual_ok &= (r.theoretical_bound - dual).abs() <= 1e-12 * dual.abs();
        lines.push(format!(
            "seed {seed}: q = {:.4}, target = {target:.4}, gamma = {gamma:.5}, bound = {:.3e}",
            r.q_achieved, r.theoretical_bound
        ));
    }
    let mut out = Outcome::new(regular_hits >= 8 && hits >= 8 && flags_ok && dual_ok)
        .note(format!("3-regular n = {REGULAR_N}: q >= 0.12 on {regular_hits}/10 seeds ({})", qs.join(" ")))
        .note(format!("G(1e5, 20/n), C = 2: q >= 0.8*0.26*gamma/sqrt(2 dbar) on {hits}/10 seeds"))
        .note(format!("bound_vacuous set on all seeds: {flags_ok}; dual evaluation agrees: {dual_ok}"));
    for l in lines {
        out = out.note(l);
    }
    Ok(out)
}

/// `d`-regular circulant on `n` vertices (`n` even when `d` is odd).
fn circulant(n: usize, d: usize) -> Result<Graph> {
    let mut edges: Vec<(usize, usize)> =
        (0..n).flat_map(|v| (1..=d / 2).map(move |s| (v, (v + s) % n))).collect();
    if d % 2 == 1 {
        edges.extend((0..n / 2).map(|v| (v, v + n / 2)));
    }
    Graph::from_edges(n, &edges, false)
}

fn ac7() -> Result<Outcome> {
    let g = gen_complete_bipartite(10, 10_000)?;
    let split = split_bulk(&g, 2.0)?;
    let bound = bound_main(g.n(), g.average_degree(), g.max_degree(), 2.0, split.gamma)?;
    let star_ok = split.gamma == 0.0 && bound.value <= 0.0;
    let mut regular_ok = true;
    let mut lines = Vec::new();
    for d in 1..=8usize {
        for n in [1000usize, 2001] {
            let n = if n * d % 2 == 1 { n + 1 } else { n };
            let g = circulant(n, d)?;
            let gamma = split_bulk(&g, 2.0)?.gamma;
            regular_ok &= g.min_degree() == d && gamma == 1.0;
            if gamma != 1.0 {
                lines.push(format!("{d}-regular n={n}: gamma = {gamma}"));
            }
        }
    }
    let mut out = Outcome::new(star_ok && regular_ok)
        .note(format!("K_(10,10^4): gamma = {}, bound_main = {:.4e}", split.gamma, bound.value))
        .note(format!("d-regular, d = 1..=8, two orders each: gamma == 1 exactly: {regular_ok}"));
    for l in lines {
        out = out.note(l);
    }
    Ok(out)
}

fn ac8() -> Result<Outcome> {
    let n = 100_000;
    let params = PamParams::new(3, 0.0, n)?;
    let seeds = 5u64;
    let mut lists = Vec::new();
    let (mut loops_ok, mut multi_ok) = (true, true);
    let (mut max_loops, mut max_multi) = (0, 0);
    let ln2 = (n as f64).ln().powi(2);
    for seed in 0..seeds {
        let g = gen_pam(&params, seed)?;
        max_loops = max_loops.max(g.loop_count());
        max_multi = max_multi.max(g.multi_edge_count());
        loops_ok &= g.loop_count() as f64 <= 3.0 * ln2;
        multi_ok &= (g.multi_edge_count() as f64) <= (n as f64).powf(0.95);
        lists.push(g.degrees());
    }
    let law = pk_evaluate(3, 0.0, 200)?;
    let pooled = degree_law_fit(&lists, &law, 3, 30)?;
    let per_seed: Vec<String> = lists
        .iter()
        .map(|l| degree_law_fit(std::slice::from_ref(l), &law, 3, 30).map(|f| format!("{:.3}", f.max_rel_error)))
        .collect::<Result<_>>()?;
    let worst = (pooled.worst_k, pooled.max_rel_error);
    let mut grid_ok = true;
    let (mut worst_mass, mut worst_mean) = (0.0f64, 0.0f64);
    for m in [1usize, 2, 3, 5] {
        for ratio in [-0.9, -0.5, 0.0, 0.5, 0.9] {
            let d = pk_evaluate(m, ratio * m as f64, 200)?;
            let mass = (d.total_mass() - 1.0).abs();
            let mean = (d.mean() - 2.0 * m as f64).abs() / m as f64;
            worst_mass = worst_mass.max(mass);
            worst_mean = worst_mean.max(mean);
            grid_ok &= mass <= 1e-6 && mean <= 1e-4;
        }
    }
    Ok(Outcome::new(worst.1 <= 0.15 && loops_ok && multi_ok && grid_ok)
        .note(format!(
            "PA(3, 0, 1e5), {seeds} seeds pooled: max relative error over 3 <= k <= 30 is {:.4} at k = {}",
            worst.1, worst.0
        ))
        .note(format!("single-seed max relative errors (not gated): {}", per_seed.join(" ")))
        .note(format!("max loops {max_loops} (limit {:.0}), max multi-edges {max_multi} (limit {:.0})", 3.0 * ln2, (n as f64).powf(0.95)))
        .note(format!("(m, delta) grid: max |mass - 1| = {worst_mass:.2e}, max |mean - 2m|/m = {worst_mean:.2e}")))
}

fn ac9() -> Result<Outcome> {
    let mut rng = rng(9);
    let (mut checked, mut bad, mut max_ratio) = (0, 0, 0.0f64);
    let mut check = |g: &Graph| -> Result<()> {
        if g.m() == 0 || g.min_degree() == 0 {
            return Ok(());
        }
        let q = brute_force_qstar(g)?.value_f64();
        let lb = spectral_gap(g)?.lambda_bar;
        bad += usize::from(q > lb + 1e-9);
        if lb > 0.0 {
            max_ratio = max_ratio.max(q / lb);
        }
        checked += 1;
        Ok(())
    };
    for n in 2..=6usize {
        let pairs = n * (n - 1) / 2;
        for bits in 0u64..1 << pairs {
            let mask: Vec<bool> = (0..pairs).map(|i| bits >> i & 1 == 1).collect();
            check(&graph_from_mask(n, &mask))?;
        }
    }
    for _ in 0..300 {
        check(&random_graph(&mut rng, 7, 10))?;
    }
    let pet = spectral_gap(&petersen())?.lambda_bar;
    let k4 = spectral_gap(&complete(4))?.lambda_bar;
    let named_ok = (pet - 2.0 / 3.0).abs() <= 1e-9 && (k4 - 1.0 / 3.0).abs() <= 1e-9;
    let weights = ChungLuWeights::constant(4000, 400.0)?;
    let mut within = 0;
    let mut gaps = Vec::new();
    let mut benchmark = 0.0;
    for seed in 0..5u64 {
        let g = gen_chung_lu(&weights, seed)?;
        let r = chung_lu_upper_report(&weights, &g)?;
        within += usize::from(r.within);
        benchmark = r.benchmark;
        gaps.push(format!("{:.4}", r.lambda_bar));
    }
    Ok(Outcome::new(bad == 0 && named_ok && within >= 4)
        .note(format!("q* <= lambda_bar on {checked} oracle-scale graphs: {bad} violations, max q*/lambda_bar = {max_ratio:.4}"))
        .note(format!("Petersen lambda_bar = {pet:.12}, K4 lambda_bar = {k4:.12}"))
        .note(format!(
            "Chung-Lu w = 400, n = 4000: lambda_bar {} vs {benchmark:.4} + 0.1, within on {within}/5",
            gaps.join(" ")
        )))
}

fn ac10() -> Result<Outcome> {
    let mut rng = rng(10);
    let (mut trials, mut bad, mut worst) = (0, 0, 0.0f64);
    while trials < 100 {
        let g = random_graph(&mut rng, 3, 8);
        if g.m() < 2 {
            continue;
        }
        let mut edges = g.edges();
        edges.shuffle(&mut rng);
        let k = rng.random_range(1..g.m());
        let h = Graph::from_edges(g.n(), &edges[k..], false)?;
        let gap = robustness_gap(&g, &h)?;
        bad += usize::from(gap.gap >= gap.allowance);
        worst = worst.max(gap.gap / gap.allowance);
        trials += 1;
    }
    Ok(Outcome::new(bad == 0)
        .note(format!("{trials} trials, {bad} with |q*(G) - q*(H)| >= 2 eps, max gap / (2 eps) = {worst:.4}")))
}
