//! Modularity scores, the closed two-part and nearly-bisection forms, and an
//! exhaustive optimum for small graphs.
//!
//! All aggregates (edge counts, volumes) are integers and are converted to the
//! scalar type once, so `ScoreBreakdown<Rational>` is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use num_traits::Signed;

use crate::scalar::{rational_to_f64, Rational, Scalar};

/// Assignment of every vertex to one of `k` nonempty parts `0..k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    part_of: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Validates that the labels are exactly `0..k` with no part empty.
    pub fn new(part_of: Vec<usize>) -> Result<Self> {
        let k = part_of.iter().max().map_or(0, |&p| p + 1);
        let mut seen = vec![false; k];
        for &p in &part_of {
            seen[p] = true;
        }
        if let Some(empty) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("part {empty} is empty")));
        }
        Ok(Self { part_of, k })
    }

    /// Compacts arbitrary labels to `0..k` in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let part_of = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { part_of, k: map.len() }
    }

    /// Parts given as disjoint sets covering `[0, n)`; empty sets are skipped.
    pub fn from_sets(n: usize, sets: &[&VertexSet]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (i, s) in sets.iter().enumerate() {
            if s.universe() != n {
                return Err(Error::UniverseMismatch { expected: n, actual: s.universe() });
            }
            for v in s.iter() {
                if labels[v] != usize::MAX {
                    return Err(Error::OverlappingSets);
                }
                labels[v] = i;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidPartition(format!("vertex {v} is not covered")));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn single(n: usize) -> Self {
        Self { part_of: vec![0; n], k: usize::from(n > 0) }
    }

    pub fn singletons(n: usize) -> Self {
        Self { part_of: (0..n).collect(), k: n }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.part_of.len()
    }

    pub fn part_of(&self) -> &[usize] {
        &self.part_of
    }

    pub fn part(&self, v: usize) -> usize {
        self.part_of[v]
    }

    pub fn parts(&self) -> Vec<VertexSet> {
        let mut out = vec![VertexSet::empty(self.n()); self.k];
        for (v, &p) in self.part_of.iter().enumerate() {
            out[p].insert(v);
        }
        out
    }
}

/// Coverage (edge contribution) minus degree tax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown<T> {
    pub coverage: T,
    pub degree_tax: T,
    pub q: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartStats {
    pub size: usize,
    pub volume: usize,
    pub internal_edges: usize,
}

/// JSON-facing score report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub q: f64,
    pub coverage: f64,
    pub degree_tax: f64,
    pub parts: Vec<PartStats>,
}

fn require_scorable(g: &Graph) -> Result<()> {
    g.require_simple()?;
    if g.m() == 0 {
        return Err(Error::NoEdges);
    }
    Ok(())
}

fn check_partition(g: &Graph, p: &Partition) -> Result<()> {
    if p.n() != g.n() {
        return Err(Error::UniverseMismatch { expected: g.n(), actual: p.n() });
    }
    Ok(())
}

pub fn part_stats(g: &Graph, p: &Partition) -> Result<Vec<PartStats>> {
    check_partition(g, p)?;
    let mut stats = vec![PartStats { size: 0, volume: 0, internal_edges: 0 }; p.k()];
    for v in 0..g.n() {
        let s = &mut stats[p.part(v)];
        s.size += 1;
        s.volume += g.degree(v);
    }
    for (u, v) in g.edges() {
        if p.part(u) == p.part(v) {
            stats[p.part(u)].internal_edges += 1;
        }
    }
    Ok(stats)
}

/// `q = sum_A [ e(A)/m - (vol(A)/2m)^2 ]`.
pub fn score<T: Scalar>(g: &Graph, p: &Partition) -> Result<ScoreBreakdown<T>> {
    require_scorable(g)?;
    let stats = part_stats(g, p)?;
    let internal: usize = stats.iter().map(|s| s.internal_edges).sum();
    let vol_sq: u64 = stats.iter().map(|s| (s.volume as u64).pow(2)).sum();
    let m = g.m() as u64;
    let coverage = T::from_count(internal) / T::from_count(g.m());
    let degree_tax = T::from_u64(vol_sq).unwrap() / T::from_u64(4 * m * m).unwrap();
    let q = coverage.clone() - degree_tax.clone();
    Ok(ScoreBreakdown { coverage, degree_tax, q })
}

pub fn score_report(g: &Graph, p: &Partition) -> Result<ScoreReport> {
    let s = score::<f64>(g, p)?;
    Ok(ScoreReport { q: s.q, coverage: s.coverage, degree_tax: s.degree_tax, parts: part_stats(g, p)? })
}

fn sq<T: Scalar>(x: T) -> T {
    x.clone() * x
}

fn signed_diff<T: Scalar>(a: usize, b: usize) -> T {
    T::from_signed(a as i64 - b as i64)
}

/// `1/2 - e(A,B)/m - (vol(A) - vol(B))^2 / (8 m^2)` for `B = V \ A`.
pub fn two_part_score<T: Scalar>(g: &Graph, a: &VertexSet) -> Result<T> {
    require_scorable(g)?;
    if a.universe() != g.n() {
        return Err(Error::UniverseMismatch { expected: g.n(), actual: a.universe() });
    }
    if a.is_empty() || a.len() == g.n() {
        return Err(Error::Precondition("A must be a proper nonempty subset".into()));
    }
    let b = a.complement();
    let cross = g.cut(a, &b)?;
    let m = T::from_count(g.m());
    let eight_m2 = T::from_count(8) * m.clone() * m.clone();
    Ok(T::half() - T::from_count(cross) / m - sq(signed_diff::<T>(g.volume(a), g.volume(&b))) / eight_m2)
}

/// The printed three-part bound `1/2 - e(A,B)/m - t^2/2` presumes
/// `boundary(R)/m <= r/2`; only `boundary(R) <= vol(R) = 2 r m` holds, so the
/// valid bound subtracts `r + 3 r^2 / 2`. Both coincide when `R` is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearlyBisection<T> {
    /// `stated_bound - r - 3 r^2 / 2`; always `<= actual_q`.
    pub lower_bound: T,
    /// `1/2 - e(A,B)/e(G) - (vol(A) - vol(B))^2 / (2 vol(G)^2)`.
    pub stated_bound: T,
    pub actual_q: T,
}

fn check_three_way(g: &Graph, a: &VertexSet, b: &VertexSet, r: &VertexSet) -> Result<()> {
    for s in [a, b, r] {
        if s.universe() != g.n() {
            return Err(Error::UniverseMismatch { expected: g.n(), actual: s.universe() });
        }
    }
    if !a.is_disjoint(b) || !a.is_disjoint(r) || !b.is_disjoint(r) {
        return Err(Error::OverlappingSets);
    }
    if a.len() + b.len() + r.len() != g.n() {
        return Err(Error::InvalidPartition("A, B, R do not cover V(G)".into()));
    }
    Ok(())
}

/// Lower bounds on the score of `{A, B, R}` with `vol(R) <= vol(G)/3`,
/// alongside the actual score.
pub fn nearly_bisection_lower_bound<T: Scalar>(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    r: &VertexSet,
) -> Result<NearlyBisection<T>> {
    require_scorable(g)?;
    check_three_way(g, a, b, r)?;
    let vol_g = 2 * g.m();
    if 3 * g.volume(r) > vol_g {
        return Err(Error::Precondition(format!(
            "vol(R) = {} exceeds vol(G)/3 = {vol_g}/3",
            g.volume(r)
        )));
    }
    let cross = g.cut(a, b)?;
    let vg = T::from_count(vol_g);
    let stated_bound = T::half()
        - T::from_count(cross) / T::from_count(g.m())
        - sq(signed_diff::<T>(g.volume(a), g.volume(b))) / (T::from_count(2) * vg.clone() * vg.clone());
    let rr = T::from_count(g.volume(r)) / vg;
    let lower_bound =
        stated_bound.clone() - rr.clone() - T::from_count(3) * sq(rr) * T::half();
    let p = Partition::from_sets(g.n(), &[a, b, r])?;
    let actual_q = score::<T>(g, &p)?.q;
    Ok(NearlyBisection { lower_bound, stated_bound, actual_q })
}

/// Closed forms of coverage and degree tax for `{A, B, R}` in terms of
/// `t = (vol(A) - vol(B))/vol(G)` and `r = vol(R)/vol(G)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderTerms<T> {
    pub t: T,
    pub r: T,
    pub boundary_r: usize,
    /// `1/2 + (e(G)/2 - e(A,B))/m - boundary(R)/m`
    pub coverage: T,
    /// `1/2 + t^2/2 - r + 3 r^2 / 2`
    pub degree_tax: T,
}

pub fn remainder_terms<T: Scalar>(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    r: &VertexSet,
) -> Result<RemainderTerms<T>> {
    require_scorable(g)?;
    check_three_way(g, a, b, r)?;
    let vg = T::from_count(2 * g.m());
    let m = T::from_count(g.m());
    let t = signed_diff::<T>(g.volume(a), g.volume(b)) / vg.clone();
    let rr = T::from_count(g.volume(r)) / vg;
    let boundary_r = g.boundary(r);
    let cross = g.cut(a, b)?;
    let coverage = T::half() + (m.clone() * T::half() - T::from_count(cross)) / m.clone()
        - T::from_count(boundary_r) / m;
    let degree_tax = T::half() + sq(t.clone()) * T::half() - rr.clone()
        + T::from_count(3) * sq(rr.clone()) * T::half();
    Ok(RemainderTerms { t, r: rr, boundary_r, coverage, degree_tax })
}

/// Exact change in `q` from merging parts `i` and `j`:
/// `e(A,B)/m - 2 vol(A) vol(B) / (2m)^2`.
pub fn merge_delta<T: Scalar>(g: &Graph, p: &Partition, i: usize, j: usize) -> Result<T> {
    require_scorable(g)?;
    check_partition(g, p)?;
    if i == j || i >= p.k() || j >= p.k() {
        return Err(Error::InvalidPartition(format!("cannot merge parts {i} and {j}")));
    }
    let parts = p.parts();
    let cross = g.cut(&parts[i], &parts[j])?;
    let m = T::from_count(g.m());
    let four_m2 = T::from_count(4) * m.clone() * m.clone();
    Ok(T::from_count(cross) / m
        - T::from_count(2 * g.volume(&parts[i]) * g.volume(&parts[j])) / four_m2)
}

/// Largest graph accepted by [`brute_force_qstar`].
pub const ORACLE_MAX_VERTICES: usize = 12;

/// Exact optimum over all set partitions.
#[derive(Clone, Debug, PartialEq)]
pub struct QStar {
    pub value: Rational,
    pub partition: Partition,
}

impl QStar {
    pub fn value_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }
}

struct Enumerator<'a> {
    g: &'a Graph,
    four_m: i64,
    labels: Vec<usize>,
    internal: Vec<i64>,
    volume: Vec<i64>,
    best: i64,
    best_labels: Vec<usize>,
}

impl Enumerator<'_> {
    // `numer` tracks sum_j (4m e_j - vol_j^2) = 4 m^2 q for the labelled prefix.
    fn descend(&mut self, v: usize, k: usize, numer: i64) {
        let n = self.g.n();
        if v == n {
            if numer > self.best {
                self.best = numer;
                self.best_labels.copy_from_slice(&self.labels);
            }
            return;
        }
        let d = self.g.degree(v) as i64;
        let mut adj = vec![0i64; k + 1];
        for &u in self.g.neighbors(v) {
            if u < v {
                adj[self.labels[u]] += 1;
            }
        }
        // Restricted-growth strings: v may open part k only.
        for j in 0..=k {
            let delta = self.four_m * adj[j] - (2 * self.volume[j] * d + d * d);
            self.labels[v] = j;
            self.internal[j] += adj[j];
            self.volume[j] += d;
            self.descend(v + 1, if j == k { k + 1 } else { k }, numer + delta);
            self.internal[j] -= adj[j];
            self.volume[j] -= d;
        }
    }
}

/// Maximum modularity by enumerating every set partition (`n <= 12`).
pub fn brute_force_qstar(g: &Graph) -> Result<QStar> {
    require_scorable(g)?;
    let n = g.n();
    if n > ORACLE_MAX_VERTICES {
        return Err(Error::TooLarge { n, max: ORACLE_MAX_VERTICES });
    }
    let m = g.m() as i64;
    let mut e = Enumerator {
        g,
        four_m: 4 * m,
        labels: vec![0; n],
        internal: vec![0; n + 1],
        volume: vec![0; n + 1],
        best: i64::MIN,
        best_labels: vec![0; n],
    };
    e.descend(0, 0, 0);
    let value = Rational::new(e.best as i128, 4 * (m as i128) * (m as i128));
    Ok(QStar { value, partition: Partition::from_labels(&e.best_labels) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessGap {
    pub qstar_g: f64,
    pub qstar_h: f64,
    /// `|q*(g) - q*(h)|`
    pub gap: f64,
    /// `2 * deleted / e(g)`
    pub allowance: f64,
    pub deleted: usize,
}

/// Compares optima of `g` and an edge-deleted subgraph `h`.
pub fn robustness_gap(g: &Graph, h: &Graph) -> Result<RobustnessGap> {
    if g.n() != h.n() {
        return Err(Error::NotSubgraph(format!("orders differ ({} vs {})", g.n(), h.n())));
    }
    g.require_simple()?;
    h.require_simple()?;
    for v in 0..g.n() {
        if let Some(&u) = h.neighbors(v).iter().find(|u| g.neighbors(v).binary_search(u).is_err()) {
            return Err(Error::NotSubgraph(format!("edge ({v}, {u}) is not in the reference graph")));
        }
    }
    let qg = brute_force_qstar(g)?;
    let qh = brute_force_qstar(h)?;
    let deleted = g.m() - h.m();
    let gap = rational_to_f64(&(qg.value - qh.value).abs());
    Ok(RobustnessGap {
        qstar_g: qg.value_f64(),
        qstar_h: qh.value_f64(),
        gap,
        allowance: 2.0 * deleted as f64 / g.m() as f64,
        deleted,
    })
}
