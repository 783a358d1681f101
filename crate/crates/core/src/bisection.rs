//! Randomized bisection along a matching, its cut bound, and the
//! weight-balanced three-part partition built from the greedy matching.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Relabeling, VertexSet};
use crate::matching::{
    greedy_matching_with, verify_no_short_loops, BandwidthMatching, MatchingMode, MatchingOptions,
    MatchingSummary,
};
use crate::rng::{domain, substream};
use crate::scalar::Real;

/// `c = 3 / (8 sqrt 2)`.
pub fn alon_constant<T: Real>() -> T {
    T::lit(3.0) / (T::lit(8.0) * T::lit(2.0).sqrt())
}

/// `(1/2) sum_i d_i (1/2 - c / sqrt d_i)`; zero degrees contribute nothing.
pub fn cut_bound_rhs<T: Real>(degrees: &[usize]) -> T {
    let c = alon_constant::<T>();
    let half = T::lit(0.5);
    degrees
        .iter()
        .filter(|&&d| d > 0)
        .map(|&d| {
            let d = T::from_count(d);
            half * (d * half - c * d.sqrt())
        })
        .fold(T::zero(), |acc, x| acc + x)
}

pub const DEFAULT_MAX_RETRIES: usize = 500;

/// Second-step update.
///
/// `Resample` draws a fresh fair coin for every pair whose swap would not
/// increase either endpoint's opposite-side count; on tree-like d-regular
/// inputs the expected cut fraction is `1/2 - (3/8) phi(0) / sqrt d` for large
/// `d` (0.40625 at d = 3, 0.41797 at d = 2). `Flip` reorients every pair whose
/// swap strictly decreases both counts (0.375 at d = 3, 0.39063 at d = 2);
/// for odd degrees the two rules select the same pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveUpdate {
    Resample,
    #[default]
    Flip,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlonOptions {
    pub seed: u64,
    pub max_retries: usize,
    /// Run the exhaustive short-loop check first and refuse failing matchings.
    pub verify: bool,
    pub update: ActiveUpdate,
}

impl Default for AlonOptions {
    fn default() -> Self {
        Self { seed: 0, max_retries: DEFAULT_MAX_RETRIES, verify: true, update: ActiveUpdate::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectionResult {
    #[serde(skip)]
    pub u_side: VertexSet,
    pub cut_edges: usize,
    pub bound_rhs: f64,
    pub retries_used: usize,
    /// Retry index (0-based) that produced `u_side`.
    pub best_retry: usize,
    pub achieved: bool,
}

/// Sides after one retry: random orientation of every pair, then the
/// second-step update of [`ActiveUpdate`].
fn one_retry(
    g: &Graph,
    pairs: &[(usize, usize)],
    update: ActiveUpdate,
    rng: &mut impl Rng,
    side: &mut [bool],
    cross: &mut [usize],
) {
    for &(u, w) in pairs {
        let s = rng.random_bool(0.5);
        side[u] = s;
        side[w] = !s;
    }
    for v in 0..g.n() {
        cross[v] = g.neighbors(v).iter().filter(|&&x| side[x] != side[v]).count();
    }
    let swapped = |v: usize, partner: usize| {
        let nb = g.neighbors(v);
        let k = nb.partition_point(|&x| x < partner)..nb.partition_point(|&x| x <= partner);
        g.degree(v) - cross[v] + k.len()
    };
    let active: Vec<bool> = pairs
        .iter()
        .map(|&(u, w)| {
            let (su, sw) = (swapped(u, w), swapped(w, u));
            match update {
                ActiveUpdate::Resample => su <= cross[u] && sw <= cross[w],
                ActiveUpdate::Flip => su < cross[u] && sw < cross[w],
            }
        })
        .collect();
    for (&(u, w), &a) in pairs.iter().zip(&active) {
        if a {
            let s = match update {
                ActiveUpdate::Resample => rng.random_bool(0.5),
                ActiveUpdate::Flip => !side[u],
            };
            side[u] = s;
            side[w] = !s;
        }
    }
}

fn cut_of(g: &Graph, side: &[bool]) -> usize {
    (0..g.n()).map(|v| g.neighbors(v).iter().filter(|&&x| x > v && side[x] != side[v]).count()).sum()
}

/// Retries the two-step randomized bisection until the cut meets
/// [`cut_bound_rhs`] or the budget runs out, keeping the smallest cut (earliest
/// retry on ties). Retry `r` draws from substream `(seed, r)`.
pub fn alon_bisection(g: &Graph, m: &BandwidthMatching, opts: &AlonOptions) -> Result<BisectionResult> {
    if g.n() != m.n() {
        return Err(Error::UniverseMismatch { expected: g.n(), actual: m.n() });
    }
    if !m.is_perfect() {
        return Err(Error::MatchingNotPerfect(m.unmatched_count()));
    }
    if opts.max_retries == 0 {
        return Err(Error::InvalidParameter("max_retries must be positive".into()));
    }
    if opts.verify {
        let report = verify_no_short_loops(g, m)?;
        if let Some(w) = report.definition_witness.or(report.condition2_witness) {
            return Err(Error::ShortLoop(w));
        }
    }
    let n = g.n();
    let bound = cut_bound_rhs::<f64>(&g.degrees());
    let mut side = vec![false; n];
    let mut cross = vec![0; n];
    let mut best: Option<(usize, usize, Vec<bool>)> = None;
    let mut retries_used = 0;
    let mut achieved = false;
    for retry in 0..opts.max_retries {
        let mut rng = substream(opts.seed, domain::BISECTION, retry as u64);
        one_retry(g, m.pairs(), opts.update, &mut rng, &mut side, &mut cross);
        let cut = cut_of(g, &side);
        retries_used = retry + 1;
        if best.as_ref().is_none_or(|b| cut < b.0) {
            best = Some((cut, retry, side.clone()));
        }
        if cut as f64 <= bound {
            achieved = true;
            break;
        }
    }
    let (cut_edges, best_retry, side) = best.expect("at least one retry");
    Ok(BisectionResult {
        u_side: VertexSet::from_mask(side),
        cut_edges,
        bound_rhs: bound,
        retries_used,
        best_retry,
        achieved,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadBalanceReport {
    /// `|sum_{(i,j)} f(i) - f(j)|`
    pub lhs: f64,
    /// `L |f(n) - f(1)|`
    pub rhs: f64,
    pub holds: bool,
}

/// Load-balancing inequality for non-increasing `f` and oriented disjoint
/// pairs `(i, j)` with `|i - j| <= bandwidth`.
pub fn load_balance_check(f: &[f64], oriented: &[(usize, usize)], bandwidth: usize) -> Result<LoadBalanceReport> {
    if let Some(i) = f.windows(2).position(|w| !(w[0] >= w[1])) {
        return Err(Error::UnsortedWeights(i + 1));
    }
    let mut used = vec![false; f.len()];
    let mut sum = 0.0;
    for &(i, j) in oriented {
        if i >= f.len() || j >= f.len() {
            return Err(Error::VertexOutOfRange { u: i, v: j, n: f.len() });
        }
        if i == j || used[i] || used[j] {
            return Err(Error::InvalidMatching(format!("pair ({i}, {j}) is not disjoint from the rest")));
        }
        if i.abs_diff(j) > bandwidth {
            return Err(Error::InvalidMatching(format!("pair ({i}, {j}) exceeds bandwidth {bandwidth}")));
        }
        used[i] = true;
        used[j] = true;
        sum += f[i] - f[j];
    }
    let lhs = sum.abs();
    let rhs = match (f.first(), f.last()) {
        (Some(a), Some(b)) => bandwidth as f64 * (a - b).abs(),
        _ => 0.0,
    };
    // Slack for summation rounding only.
    let slack = 1e-9 * (1.0 + f.iter().map(|x| x.abs()).fold(0.0, f64::max) * oriented.len() as f64);
    Ok(LoadBalanceReport { lhs, rhs, holds: lhs <= rhs + slack })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightBalanceOptions {
    pub seed: u64,
    pub max_retries: usize,
    pub update: ActiveUpdate,
    pub matching: MatchingOptions,
    /// Exhaustively verify the matching before bisecting. Ignored (treated as
    /// false) for matchings built below depth 3, which carry no guarantee.
    pub verify: bool,
}

impl Default for WeightBalanceOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_retries: DEFAULT_MAX_RETRIES,
            update: ActiveUpdate::default(),
            matching: MatchingOptions::strict(),
            verify: true,
        }
    }
}

/// The five numbered guarantees, evaluated on the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionInvariants {
    pub sizes_equal: bool,
    /// `R` inside the final `Δ^9` positions of the weight order.
    pub remainder_in_tail: bool,
    pub remainder_weight_ok: bool,
    /// `|w(A) - w(B)| <= Δ^9 (w_max - w_min)`
    pub imbalance_ok: bool,
    /// `e(A,B) <= (1/2) sum_{A ∪ B} d_v (1/2 - c / sqrt d_v)` with degrees in G.
    pub cut_ok: bool,
}

impl PartitionInvariants {
    pub fn all(&self) -> bool {
        self.sizes_equal && self.remainder_in_tail && self.remainder_weight_ok && self.imbalance_ok && self.cut_ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightBalancedPartition {
    #[serde(skip)]
    pub a: VertexSet,
    #[serde(skip)]
    pub b: VertexSet,
    #[serde(skip)]
    pub r: VertexSet,
    pub weight_imbalance: f64,
    pub cut_ab: usize,
    pub bisection: BisectionResult,
    pub matching: MatchingSummary,
    /// `Some(passed)` when the exhaustive short-loop check ran.
    pub short_loops_verified: Option<bool>,
    pub invariants: PartitionInvariants,
    /// Vertex at each position of the weight order.
    #[serde(skip)]
    pub order: Vec<usize>,
}

/// `{A, B, R}`: sort by weight (non-increasing, ties by index), match greedily,
/// strip the unmatched remainder `R` and bisect the rest along the matching.
pub fn weight_balanced_partition(
    g: &Graph,
    weights: &[f64],
    opts: &WeightBalanceOptions,
) -> Result<WeightBalancedPartition> {
    let n = g.n();
    if weights.len() != n {
        return Err(Error::UniverseMismatch { expected: n, actual: weights.len() });
    }
    if let Some(v) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParameter(format!("weight at vertex {v} is not a non-negative number")));
    }
    let budget = crate::matching::delta9_budget(g.max_degree());
    if opts.matching.mode == MatchingMode::Strict && budget.saturating_mul(2) >= n {
        return Err(Error::Precondition(format!("Δ^9 = {budget} must be below n/2 = {}", n as f64 / 2.0)));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let relabel = Relabeling::from_new_to_old(n, order.clone())?;
    let gp = g.permuted(&relabel)?;
    let run = greedy_matching_with(&gp, &opts.matching)?;
    let matching = run.matching;
    let verify = opts.verify && matching.depth() == 3;

    let unmatched_new = matching.unmatched();
    let matched_new = unmatched_new.complement();
    let (u_new, bisection, verified) = if matched_new.is_empty() {
        let empty = BisectionResult {
            u_side: VertexSet::empty(0),
            cut_edges: 0,
            bound_rhs: 0.0,
            retries_used: 0,
            best_retry: 0,
            achieved: true,
        };
        (VertexSet::empty(n), empty, None)
    } else {
        let (sub, sub_relabel) = gp.induced_subgraph(&matched_new)?;
        let sub_matching = matching.restricted(&sub_relabel)?;
        let verified = if verify {
            let report = verify_no_short_loops(&sub, &sub_matching)?;
            if let Some(w) = report.definition_witness.or(report.condition2_witness) {
                return Err(Error::ShortLoop(w.iter().map(|&v| order[sub_relabel.to_old(v)]).collect()));
            }
            Some(true)
        } else {
            None
        };
        let alon = AlonOptions { seed: opts.seed, max_retries: opts.max_retries, verify: false, update: opts.update };
        let bis = alon_bisection(&sub, &sub_matching, &alon)?;
        (sub_relabel.set_to_old(&bis.u_side), bis, verified)
    };

    let b_new = VertexSet::from_mask((0..n).map(|v| matched_new.contains(v) && !u_new.contains(v)).collect());
    let a = relabel.set_to_old(&u_new);
    let b = relabel.set_to_old(&b_new);
    let r = relabel.set_to_old(&unmatched_new);

    let w_of = |s: &VertexSet| s.iter().map(|v| weights[v]).sum::<f64>();
    let weight_imbalance = (w_of(&a) - w_of(&b)).abs();
    let cut_ab = g.cut(&a, &b)?;

    let sorted: Vec<f64> = order.iter().map(|&v| weights[v]).collect();
    let (wmax, wmin) = (sorted.first().copied().unwrap_or(0.0), sorted.last().copied().unwrap_or(0.0));
    let wbar = if n > 0 { sorted.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let oriented: Vec<(usize, usize)> =
        matching.pairs().iter().map(|&(v, w)| if u_new.contains(v) { (v, w) } else { (w, v) }).collect();
    debug_assert!(
        load_balance_check(&sorted, &oriented, matching.bandwidth_observed())?.holds,
        "load-balancing inequality violated"
    );
    let scale = 1e-9 * (1.0 + wmax * n as f64);
    let ab_degrees: Vec<usize> = a.iter().chain(b.iter()).map(|v| g.degree(v)).collect();
    let invariants = PartitionInvariants {
        sizes_equal: a.len() == b.len(),
        remainder_in_tail: unmatched_new.iter().all(|v| v + budget >= n),
        remainder_weight_ok: r.iter().all(|v| weights[v] <= 2.0 * wbar + scale),
        imbalance_ok: weight_imbalance <= budget as f64 * (wmax - wmin) + scale,
        cut_ok: cut_ab as f64 <= cut_bound_rhs::<f64>(&ab_degrees),
    };
    Ok(WeightBalancedPartition {
        a,
        b,
        r,
        weight_imbalance,
        cut_ab,
        bisection,
        matching: MatchingSummary::from(&matching),
        short_loops_verified: verified,
        invariants,
        order,
    })
}
