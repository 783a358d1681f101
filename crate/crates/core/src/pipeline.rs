//! End-to-end constructions of high-modularity partitions: the bounded
//! maximum-degree route and the bulk plus high-degree route.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bisection::{
    weight_balanced_partition, ActiveUpdate, PartitionInvariants, WeightBalanceOptions, WeightBalancedPartition,
    DEFAULT_MAX_RETRIES,
};
use crate::bounds::{
    bound_main, bound_no_cutoff, delta9_window, low_degree_set, main_leading_term, theta, BoundReport,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::matching::{MatchingMode, MatchingOptions, MatchingSummary};
use crate::modularity::{score, Partition};
use crate::rng::{domain, substream};
use crate::scalar::Scalar;

pub const DEFAULT_OUTER_RETRIES: usize = 50;

/// Vertex weights for the bulk bisection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BulkWeights {
    /// Degrees inside `G[L]`.
    #[default]
    Induced,
    /// Degrees in `G` (diagnostic).
    Full,
}

/// Missing fields deserialize to their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    pub seed: u64,
    /// Bisection retry budget.
    pub max_retries: usize,
    /// High-degree randomizations drawn by the bulk route.
    pub outer_retries: usize,
    pub update: ActiveUpdate,
    pub matching: MatchingOptions,
    pub verify: bool,
    pub bulk_weights: BulkWeights,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_retries: DEFAULT_MAX_RETRIES,
            outer_retries: DEFAULT_OUTER_RETRIES,
            update: ActiveUpdate::default(),
            matching: MatchingOptions::permissive(),
            verify: true,
            bulk_weights: BulkWeights::default(),
        }
    }
}

impl PipelineOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn balance(&self) -> WeightBalanceOptions {
        WeightBalanceOptions {
            seed: self.seed,
            max_retries: self.max_retries,
            update: self.update,
            matching: self.matching.clone(),
            verify: self.verify,
        }
    }

    fn strict(&self) -> bool {
        self.matching.mode == MatchingMode::Strict
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    NoCutoff,
    BulkSplit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighDegreeSummary {
    pub u_size: usize,
    pub u_plus_pairs: usize,
    pub u_minus: usize,
    pub nu: Option<usize>,
    /// Pairs of `U+` that are edges of `G`.
    pub pair_edges: usize,
    pub outer_retries: usize,
    pub best_draw: usize,
    /// Score of every draw, in draw order.
    pub draw_scores: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub c_cutoff: Option<f64>,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub theta_ok: Option<bool>,
    /// Edges between the two sides of the final partition (`e(A, B)` for `{A, B, R}`).
    pub cut: usize,
    /// `e(A, B)` of the bulk bisection.
    pub cut_ab: usize,
    /// Edges of the bisected graph (`G` or `G[L]`).
    pub bisected_edges: usize,
    /// `cut_ab / m` with `m` the edge count of `G`.
    pub cut_fraction: f64,
    /// `(1/2 - cut_fraction) sqrt(dbar)`, the cut constant actually attained.
    pub c_eff: f64,
    /// Volume of the `A` side minus that of the `B` side, in `G`.
    pub vol_imbalance: i64,
    pub retries: usize,
    pub best_retry: usize,
    pub bisection_achieved: bool,
    pub matching: MatchingSummary,
    pub short_loops_verified: Option<bool>,
    pub invariants: PartitionInvariants,
    pub remainder_size: usize,
    pub remainder_volume: usize,
    pub high_degree: Option<HighDegreeSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub route: Route,
    #[serde(skip)]
    pub partition: Partition,
    pub q_achieved: f64,
    pub theoretical_bound: f64,
    pub bound_vacuous: bool,
    /// No-cutoff route: `theoretical_bound - r - 3 r^2 / 2` with the measured
    /// `r = vol(R)/vol(G)`, the form that actually follows.
    pub corrected_bound: Option<f64>,
    pub bound: BoundReport,
    /// Bulk route: the main bound's leading term `0.26 gamma / sqrt(2 dbar)`.
    pub leading_term: Option<f64>,
    /// `q_achieved / leading_term` when the term is positive.
    pub leading_ratio: Option<f64>,
    pub five_terms: Option<FiveTerms<f64>>,
    pub diagnostics: Diagnostics,
}

fn cut_fraction(g: &Graph, cut: usize) -> f64 {
    cut as f64 / g.m() as f64
}

fn effective_constant(g: &Graph, cut: usize) -> f64 {
    (0.5 - cut_fraction(g, cut)) * g.average_degree().sqrt()
}

fn signed_volume_gap(g: &Graph, a: &VertexSet, b: &VertexSet) -> i64 {
    g.volume(a) as i64 - g.volume(b) as i64
}

/// `{A, B, R}` from the weight-balanced bisection of `G` with degree weights.
pub fn partition_no_cutoff(g: &Graph, opts: &PipelineOptions) -> Result<PipelineResult> {
    if g.m() == 0 {
        return Err(Error::NoEdges);
    }
    let n = g.n();
    let window = delta9_window(g.max_degree(), n);
    if opts.strict() && !window {
        return Err(Error::Precondition(format!("Δ^9 = {}^9 must lie in [1, n/6) with n = {n}", g.max_degree())));
    }
    let weights: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    let wb = weight_balanced_partition(g, &weights, &opts.balance())?;
    let sets: Vec<&VertexSet> = [&wb.a, &wb.b, &wb.r].into_iter().filter(|s| !s.is_empty()).collect();
    let partition = Partition::from_sets(n, &sets)?;
    let q_achieved = score::<f64>(g, &partition)?.q;

    let bound = bound_no_cutoff(&g.degrees())?;
    let vol_r = g.volume(&wb.r);
    let r = vol_r as f64 / (2 * g.m()) as f64;
    let corrected = bound.value - r - 1.5 * r * r;
    let diagnostics = Diagnostics {
        c_cutoff: None,
        gamma: None,
        theta: None,
        theta_ok: None,
        cut: wb.cut_ab,
        cut_ab: wb.cut_ab,
        bisected_edges: g.m(),
        cut_fraction: cut_fraction(g, wb.cut_ab),
        c_eff: effective_constant(g, wb.cut_ab),
        vol_imbalance: signed_volume_gap(g, &wb.a, &wb.b),
        retries: wb.bisection.retries_used,
        best_retry: wb.bisection.best_retry,
        bisection_achieved: wb.bisection.achieved,
        matching: wb.matching.clone(),
        short_loops_verified: wb.short_loops_verified,
        invariants: wb.invariants.clone(),
        remainder_size: wb.r.len(),
        remainder_volume: vol_r,
        high_degree: None,
    };
    Ok(PipelineResult {
        route: Route::NoCutoff,
        partition,
        q_achieved,
        theoretical_bound: bound.value,
        bound_vacuous: bound.vacuous || 3 * vol_r > 2 * g.m(),
        corrected_bound: Some(corrected),
        bound,
        leading_term: None,
        leading_ratio: None,
        five_terms: None,
        diagnostics,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkSplit {
    #[serde(skip)]
    pub l: VertexSet,
    #[serde(skip)]
    pub h: VertexSet,
    /// `vol(L)/m - 1`, from integer volumes.
    pub gamma: f64,
    /// `(C dbar)^10 / n`
    pub theta: f64,
    /// `theta < (1 - 1/C) / 2`
    pub theta_ok: bool,
}

/// `L = {d_v < C dbar}` and its complement.
pub fn split_bulk(g: &Graph, c_cutoff: f64) -> Result<BulkSplit> {
    if !(c_cutoff > 1.0 && c_cutoff.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must exceed 1, got {c_cutoff}")));
    }
    if g.m() == 0 {
        return Err(Error::NoEdges);
    }
    let l = low_degree_set(g, c_cutoff);
    let h = l.complement();
    let m = g.m() as i128;
    let gamma = (g.volume(&l) as i128 - m) as f64 / m as f64;
    let th = theta(g.n(), g.average_degree(), c_cutoff);
    Ok(BulkSplit { l, h, gamma, theta: th, theta_ok: th < 0.5 * (1.0 - 1.0 / c_cutoff) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Randomized placement of `U = H ∪ R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighDegreeAssignment {
    /// Consecutive pairs of `U+` (degree `>= sqrt n`) by descending degree.
    pub u_plus_pairs: Vec<(usize, usize)>,
    #[serde(skip)]
    pub u_minus: VertexSet,
    /// High-degree vertex moved to `U-` to make `U+` even.
    pub nu: Option<usize>,
    #[serde(skip)]
    pub u_a: VertexSet,
    #[serde(skip)]
    pub u_b: VertexSet,
}

impl HighDegreeAssignment {
    pub fn side_of(&self, v: usize) -> Option<Side> {
        if self.u_a.contains(v) {
            Some(Side::A)
        } else if self.u_b.contains(v) {
            Some(Side::B)
        } else {
            None
        }
    }
}

/// Deterministic part of the assignment: pairs, `U-` and `nu`.
struct HighDegreePlan {
    pairs: Vec<(usize, usize)>,
    minus: Vec<usize>,
    nu: Option<usize>,
}

fn plan_high_degree(g: &Graph, u: &VertexSet) -> Result<HighDegreePlan> {
    if u.universe() != g.n() {
        return Err(Error::UniverseMismatch { expected: g.n(), actual: u.universe() });
    }
    let n = g.n();
    let mut plus: Vec<usize> = u.iter().filter(|&v| g.degree(v) * g.degree(v) >= n).collect();
    plus.sort_by(|&x, &y| g.degree(y).cmp(&g.degree(x)).then(x.cmp(&y)));
    let nu = if plus.len() % 2 == 1 { plus.pop() } else { None };
    let in_plus = VertexSet::from_indices(n, plus.iter().copied())?;
    let minus = u.iter().filter(|&v| !in_plus.contains(v)).collect();
    Ok(HighDegreePlan { pairs: plus.chunks(2).map(|c| (c[0], c[1])).collect(), minus, nu })
}

fn draw_sides(plan: &HighDegreePlan, n: usize, seed: u64, draw: u64) -> (VertexSet, VertexSet) {
    let mut rng = substream(seed, domain::HIGH_DEGREE, draw);
    let mut ua = VertexSet::empty(n);
    let mut ub = VertexSet::empty(n);
    for &(x, y) in &plan.pairs {
        let (p, q) = if rng.random_bool(0.5) { (x, y) } else { (y, x) };
        ua.insert(p);
        ub.insert(q);
    }
    for &v in &plan.minus {
        if rng.random_bool(0.5) {
            ua.insert(v);
        } else {
            ub.insert(v);
        }
    }
    (ua, ub)
}

/// Draw `draw` of the high-degree randomization (substream `(seed, draw)`).
pub fn assign_high_degree_draw(g: &Graph, u: &VertexSet, seed: u64, draw: u64) -> Result<HighDegreeAssignment> {
    let plan = plan_high_degree(g, u)?;
    let (u_a, u_b) = draw_sides(&plan, g.n(), seed, draw);
    Ok(HighDegreeAssignment {
        u_plus_pairs: plan.pairs,
        u_minus: VertexSet::from_indices(g.n(), plan.minus)?,
        nu: plan.nu,
        u_a,
        u_b,
    })
}

/// Split each `U+` pair across the sides and place `U-` by fair coins.
pub fn assign_high_degree(g: &Graph, u: &VertexSet, seed: u64) -> Result<HighDegreeAssignment> {
    assign_high_degree_draw(g, u, seed, 0)
}

/// Two-part score of `{S, V \ S}` from its mask; zero when one side is empty.
fn mask_score(g: &Graph, side: &[bool]) -> f64 {
    let mut cut = 0usize;
    let mut vol_a = 0usize;
    for v in 0..g.n() {
        if side[v] {
            vol_a += g.degree(v);
        }
        cut += g.neighbors(v).iter().filter(|&&x| x > v && side[x] != side[v]).count();
    }
    let m = g.m() as f64;
    let diff = 2.0 * vol_a as f64 - 2.0 * m;
    0.5 - cut as f64 / m - diff * diff / (8.0 * m * m)
}

/// Bulk bisection of `G[L]`, then the best of `outer_retries` random
/// placements of `U = H ∪ R`.
pub fn partition_bulk_split(g: &Graph, c_cutoff: f64, opts: &PipelineOptions) -> Result<PipelineResult> {
    if opts.outer_retries == 0 {
        return Err(Error::InvalidParameter("outer_retries must be positive".into()));
    }
    let split = split_bulk(g, c_cutoff)?;
    if opts.strict() && !split.theta_ok {
        return Err(Error::Precondition(format!(
            "theta = {} must be below (1 - 1/C)/2 = {}",
            split.theta,
            0.5 * (1.0 - 1.0 / c_cutoff)
        )));
    }
    if split.l.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = g.n();
    let (sub, rl) = g.induced_subgraph(&split.l)?;
    let weights: Vec<f64> = match opts.bulk_weights {
        BulkWeights::Induced => (0..sub.n()).map(|v| sub.degree(v) as f64).collect(),
        BulkWeights::Full => (0..sub.n()).map(|v| g.degree(rl.to_old(v)) as f64).collect(),
    };
    let wb: WeightBalancedPartition = weight_balanced_partition(&sub, &weights, &opts.balance())?;
    let a = rl.set_to_old(&wb.a);
    let b = rl.set_to_old(&wb.b);
    let r = rl.set_to_old(&wb.r);
    let u = split.h.union(&r);

    let plan = plan_high_degree(g, &u)?;
    let pair_edges = plan.pairs.iter().filter(|&&(x, y)| g.neighbors(x).binary_search(&y).is_ok()).count();
    let mut draw_scores = Vec::with_capacity(opts.outer_retries);
    let mut best: Option<(f64, usize, VertexSet, VertexSet)> = None;
    for draw in 0..opts.outer_retries {
        let (ua, ub) = draw_sides(&plan, n, opts.seed, draw as u64);
        let side: Vec<bool> = (0..n).map(|v| a.contains(v) || ua.contains(v)).collect();
        let q = mask_score(g, &side);
        draw_scores.push(q);
        if best.as_ref().is_none_or(|b| q > b.0) {
            best = Some((q, draw, ua, ub));
        }
    }
    let (_, best_draw, ua, ub) = best.expect("at least one draw");
    let side_a = a.union(&ua);
    let side_b = b.union(&ub);
    let labels: Vec<usize> = (0..n).map(|v| usize::from(!side_a.contains(v))).collect();
    let partition = Partition::from_labels(&labels);
    let q_achieved = score::<f64>(g, &partition)?.q;
    let five = five_term_decomposition::<f64>(g, &a, &b, &ua, &ub)?;

    let bound = bound_main(n, g.average_degree(), g.max_degree(), c_cutoff, split.gamma)?;
    let diagnostics = Diagnostics {
        c_cutoff: Some(c_cutoff),
        gamma: Some(split.gamma),
        theta: Some(split.theta),
        theta_ok: Some(split.theta_ok),
        cut: g.cut(&side_a, &side_b)?,
        cut_ab: wb.cut_ab,
        bisected_edges: sub.m(),
        cut_fraction: cut_fraction(g, wb.cut_ab),
        c_eff: effective_constant(g, wb.cut_ab),
        vol_imbalance: signed_volume_gap(g, &side_a, &side_b),
        retries: wb.bisection.retries_used,
        best_retry: wb.bisection.best_retry,
        bisection_achieved: wb.bisection.achieved,
        matching: wb.matching.clone(),
        short_loops_verified: wb.short_loops_verified,
        invariants: wb.invariants.clone(),
        remainder_size: r.len(),
        remainder_volume: g.volume(&r),
        high_degree: Some(HighDegreeSummary {
            u_size: u.len(),
            u_plus_pairs: plan.pairs.len(),
            u_minus: plan.minus.len(),
            nu: plan.nu,
            pair_edges,
            outer_retries: opts.outer_retries,
            best_draw,
            draw_scores,
        }),
    };
    let leading = main_leading_term(g.average_degree(), split.gamma);
    Ok(PipelineResult {
        route: Route::BulkSplit,
        partition,
        q_achieved,
        theoretical_bound: bound.value,
        bound_vacuous: bound.vacuous,
        corrected_bound: None,
        bound,
        leading_term: Some(leading),
        leading_ratio: (leading > 0.0).then(|| q_achieved / leading),
        five_terms: Some(five),
        diagnostics,
    })
}

/// Signed contributions to the score of `{A ∪ U_A, B ∪ U_B}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiveTerms<T> {
    /// `(e(A ∪ B) - 2 e(A,B)) / (2m)`
    pub edge_gain: T,
    /// `-(vol A - vol B)^2 / (8 m^2)`
    pub ab_imbalance: T,
    /// `(e(U) + e(A ∪ B, U)) / (2m) - (e(U_A,U_B) + e(U_A,B) + e(A,U_B)) / m`
    pub u_cross: T,
    /// `-(vol A - vol B)(vol U_A - vol U_B) / (4 m^2)`
    pub mixed_volume: T,
    /// `-(vol U_A - vol U_B)^2 / (8 m^2)`
    pub u_imbalance: T,
}

impl<T: Scalar> FiveTerms<T> {
    pub fn sum(&self) -> T {
        self.edge_gain.clone()
            + self.ab_imbalance.clone()
            + self.u_cross.clone()
            + self.mixed_volume.clone()
            + self.u_imbalance.clone()
    }
}

/// Decomposition of the two-part score into bulk and high-degree terms.
pub fn five_term_decomposition<T: Scalar>(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    ua: &VertexSet,
    ub: &VertexSet,
) -> Result<FiveTerms<T>> {
    if g.m() == 0 {
        return Err(Error::NoEdges);
    }
    let sets = [a, b, ua, ub];
    for s in sets {
        if s.universe() != g.n() {
            return Err(Error::UniverseMismatch { expected: g.n(), actual: s.universe() });
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if !sets[i].is_disjoint(sets[j]) {
                return Err(Error::OverlappingSets);
            }
        }
    }
    if sets.iter().map(|s| s.len()).sum::<usize>() != g.n() {
        return Err(Error::InvalidPartition("A, B, U_A, U_B do not cover V(G)".into()));
    }
    let ab = a.union(b);
    let u = ua.union(ub);
    let m = T::from_count(g.m());
    let two = T::from_count(2);
    let eight_m2 = T::from_count(8) * m.clone() * m.clone();
    let d_ab = T::from_signed(signed_volume_gap(g, a, b));
    let d_u = T::from_signed(signed_volume_gap(g, ua, ub));
    let edge_gain = (T::from_count(g.internal_edges(&ab)) - two.clone() * T::from_count(g.cut(a, b)?))
        / (two.clone() * m.clone());
    let u_cross = T::from_count(g.internal_edges(&u) + g.cut(&ab, &u)?) / (two.clone() * m.clone())
        - T::from_count(g.cut(ua, ub)? + g.cut(ua, b)? + g.cut(a, ub)?) / m.clone();
    Ok(FiveTerms {
        edge_gain,
        ab_imbalance: T::zero() - d_ab.clone() * d_ab.clone() / eight_m2.clone(),
        u_cross,
        mixed_volume: T::zero() - d_ab * d_u.clone() / (T::from_count(4) * m.clone() * m),
        u_imbalance: T::zero() - d_u.clone() * d_u / eight_m2,
    })
}
