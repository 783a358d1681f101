//! Random and deterministic graph models: G(n,p), Chung-Lu, preferential
//! attachment PA(m, δ), complete bipartite, random regular and fixed degree
//! sequences.
//!
//! All samplers take a seed and draw from the generation substream, so equal
//! inputs give equal graphs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{domain, substream};

fn gen_rng(seed: u64) -> ChaCha8Rng {
    substream(seed, domain::GENERATION, 0)
}

/// Number of failures before the next success, `p in (0, 1)`.
fn geometric_skip(rng: &mut impl Rng, log_q: f64) -> usize {
    let r: f64 = rng.random();
    // `1 - r` lies in (0, 1], so the logarithm is finite.
    ((1.0 - r).ln() / log_q).floor() as usize
}

/// Binomial random graph: every pair independently with probability `p`.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} is outside [0, 1]")));
    }
    let mut edges = Vec::new();
    if p == 1.0 {
        for u in 0..n {
            edges.extend((u + 1..n).map(|v| (u, v)));
        }
    } else if p > 0.0 && n > 1 {
        // Pairs (v, w), w < v, in lexicographic order; jump over non-edges.
        let mut rng = gen_rng(seed);
        let log_q = (1.0 - p).ln();
        let (mut v, mut w) = (1usize, 0usize);
        let mut first = true;
        loop {
            let skip = geometric_skip(&mut rng, log_q);
            w = if first { skip } else { w.saturating_add(1).saturating_add(skip) };
            first = false;
            while w >= v && v < n {
                w -= v;
                v += 1;
            }
            if v >= n {
                break;
            }
            edges.push((w, v));
        }
    }
    Graph::from_edges(n, &edges, false)
}

/// Chung-Lu expected-degree weights with `max w^2 < mean(w) * n`, so every
/// `p_uv = w_u w_v / (mean(w) n)` is below 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChungLuWeights {
    w: Vec<f64>,
    wbar: f64,
    wmin: f64,
    wmax: f64,
}

impl ChungLuWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("Chung-Lu weights are empty".into()));
        }
        if let Some(v) = w.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidParameter(format!("weight {} at vertex {v} is not positive", w[v])));
        }
        let total: f64 = w.iter().sum();
        let wbar = total / w.len() as f64;
        let (mut vmax, mut wmax, mut wmin) = (0, w[0], w[0]);
        for (v, &x) in w.iter().enumerate() {
            if x > wmax {
                (vmax, wmax) = (v, x);
            }
            wmin = wmin.min(x);
        }
        if wmax * wmax >= total {
            return Err(Error::WeightTooLarge { v: vmax, w: wmax });
        }
        Ok(Self { w, wbar, wmin, wmax })
    }

    /// `n` equal weights.
    pub fn constant(n: usize, w: f64) -> Result<Self> {
        Self::new(vec![w; n])
    }

    /// Weights spaced linearly from `lo` (vertex 0) to `hi` (vertex n-1).
    pub fn linear_ramp(n: usize, lo: f64, hi: f64) -> Result<Self> {
        let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
        Self::new((0..n).map(|i| lo + step * i as f64).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn wbar(&self) -> f64 {
        self.wbar
    }

    pub fn wmin(&self) -> f64 {
        self.wmin
    }

    pub fn wmax(&self) -> f64 {
        self.wmax
    }

    /// `w_v (1 - w_v / (mean(w) n))`, the exact expected degree without loops.
    pub fn expected_degree(&self, v: usize) -> f64 {
        self.w[v] * (1.0 - self.w[v] / (self.wbar * self.n() as f64))
    }
}

/// Chung-Lu graph by geometric skipping over vertices sorted by weight.
pub fn gen_chung_lu(weights: &ChungLuWeights, seed: u64) -> Result<Graph> {
    let n = weights.n();
    let w = weights.weights();
    let total = weights.wbar * n as f64;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&v| w[v]).collect();
    let mut rng = gen_rng(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        let mut j = i + 1;
        let mut p = if j < n { (sorted[i] * sorted[j] / total).min(1.0) } else { 0.0 };
        while j < n && p > 0.0 {
            if p < 1.0 {
                j += geometric_skip(&mut rng, (1.0 - p).ln());
            }
            if j >= n {
                break;
            }
            // Candidate j is accepted with the ratio of its true probability to the
            // (larger) proposal probability.
            let q = (sorted[i] * sorted[j] / total).min(1.0);
            if rng.random::<f64>() < q / p {
                edges.push((order[i], order[j]));
            }
            p = q;
            j += 1;
        }
    }
    Graph::from_edges(n, &edges, false)
}

/// Preferential attachment parameters: `m >= 1`, `-m < delta < m`, `n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PamParams {
    pub m: usize,
    pub delta: f64,
    pub n: usize,
}

impl PamParams {
    pub fn new(m: usize, delta: f64, n: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("PA requires m >= 1".into()));
        }
        let mf = m as f64;
        if !(delta.is_finite() && -mf < delta && delta < mf) {
            return Err(Error::InvalidParameter(format!("PA requires -m < delta < m, got delta = {delta}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("PA requires n >= 1".into()));
        }
        Ok(Self { m, delta, n })
    }

    /// Power-law exponent `3 + delta/m`.
    pub fn tau(&self) -> f64 {
        3.0 + self.delta / self.m as f64
    }
}

/// Fenwick tree over non-negative reals with prefix search.
struct Fenwick {
    tree: Vec<f64>,
    top: usize,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0.0; n + 1], top: n.next_power_of_two() }
    }

    fn add(&mut self, i: usize, x: f64) {
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] += x;
            k += k & k.wrapping_neg();
        }
    }

    /// Smallest `i` with prefix sum through `i` exceeding `target`, capped at
    /// `limit` to absorb rounding at the upper end.
    fn search(&self, mut target: f64, limit: usize) -> usize {
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(limit)
    }
}

/// PA(m, δ) multigraph: the single-edge model with `δ/m` run for `m n` steps,
/// consecutive blocks of `m` steps merged into one vertex.
///
/// A new half-vertex carries weight `1 + δ/m` for its own stub, so it attaches
/// to itself (a loop) with probability `(1 + δ')/(t(2 + δ') + 1 + δ')` and to an
/// earlier half-vertex `i` with probability `(D_i + δ')/(t(2 + δ') + 1 + δ')`.
/// The first vertex therefore always carries `m` loops.
pub fn gen_pam(params: &PamParams, seed: u64) -> Result<Graph> {
    let PamParams { m, delta, n } = PamParams::new(params.m, params.delta, params.n)?;
    let dp = delta / m as f64;
    let mut rng = gen_rng(seed);
    let mut tree = Fenwick::new(n);
    let mut total = 0.0;
    let mut edges = Vec::with_capacity(m * n);
    for step in 0..m * n {
        let v = step / m;
        tree.add(v, 1.0 + dp);
        total += 1.0 + dp;
        let target = tree.search(rng.random::<f64>() * total, v);
        tree.add(target, 1.0);
        total += 1.0;
        edges.push((v, target));
    }
    Graph::from_edges(n, &edges, true)
}

/// `K_{a,b}` with parts `[0, a)` and `[a, a + b)`.
pub fn gen_complete_bipartite(a: usize, b: usize) -> Result<Graph> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidParameter("complete bipartite graph needs a, b >= 1".into()));
    }
    let edges: Vec<_> = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))).collect();
    Graph::from_edges(a + b, &edges, false)
}

/// Pairing attempts before the configuration model gives up.
pub const PAIRING_BUDGET: usize = 1000;

#[derive(Clone, Debug, Serialize)]
pub struct ConfigurationSample {
    #[serde(skip)]
    pub graph: Graph,
    /// Pairings drawn, including the accepted one.
    pub attempts: usize,
    /// True when no simple pairing was found and the last one was simplified.
    pub simplified: bool,
    /// `sum_v |requested_v - realized_v|`.
    pub deviation: usize,
}

fn pair_stubs(stubs: &mut [usize], rng: &mut impl Rng) -> Vec<(usize, usize)> {
    stubs.shuffle(rng);
    stubs.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

fn configuration(degrees: &[usize], seed: u64, fallback: bool) -> Result<ConfigurationSample> {
    let total: usize = degrees.iter().sum();
    if total % 2 == 1 {
        return Err(Error::InvalidParameter("degree sum is odd".into()));
    }
    let n = degrees.len();
    let mut stubs: Vec<usize> = degrees.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v, d)).collect();
    let mut rng = gen_rng(seed);
    let mut last = Vec::new();
    for attempt in 1..=PAIRING_BUDGET {
        let edges = pair_stubs(&mut stubs, &mut rng);
        if let Ok(graph) = Graph::from_edges(n, &edges, false) {
            return Ok(ConfigurationSample { graph, attempts: attempt, simplified: false, deviation: 0 });
        }
        last = edges;
    }
    if !fallback {
        return Err(Error::PairingFailed(PAIRING_BUDGET));
    }
    let (graph, _) = Graph::from_edges(n, &last, true)?.simplify();
    let deviation = (0..n).map(|v| degrees[v].abs_diff(graph.degree(v))).sum();
    Ok(ConfigurationSample { graph, attempts: PAIRING_BUDGET, simplified: true, deviation })
}

/// Uniform simple `d`-regular graph by configuration-model rejection.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<ConfigurationSample> {
    if d >= n.max(1) || (n * d) % 2 == 1 {
        return Err(Error::InvalidParameter(format!("no {d}-regular graph on {n} vertices")));
    }
    configuration(&vec![d; n], seed, false)
}

/// Simple graph with the given degrees by rejection; after the pairing budget
/// the last pairing is simplified and the degree deviation reported.
pub fn gen_fixed_degree_sequence(degrees: &[usize], seed: u64) -> Result<ConfigurationSample> {
    configuration(degrees, seed, true)
}

/// Deterministic realization: repeatedly join the highest remaining degree to
/// the next highest ones (ties by lower index).
pub fn havel_hakimi(degrees: &[usize]) -> Result<Graph> {
    let n = degrees.len();
    let mut residual: Vec<(usize, usize)> = degrees.iter().copied().zip(0..n).collect();
    let mut edges = Vec::new();
    loop {
        residual.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let (d, v) = residual[0];
        if d == 0 {
            break;
        }
        if d >= residual.len() {
            return Err(Error::NotGraphical);
        }
        for entry in residual.iter_mut().skip(1).take(d) {
            if entry.0 == 0 {
                return Err(Error::NotGraphical);
            }
            entry.0 -= 1;
            edges.push((v, entry.1));
        }
        residual[0].0 = 0;
    }
    Graph::from_edges(n, &edges, false)
}

/// Serializable model description, used by batch drivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Gnp { n: usize, p: f64 },
    /// Constant weight `w`, or a linear ramp from `w_min` up to `w`.
    ChungLu { n: usize, w: f64, w_min: Option<f64> },
    Pam { m: usize, delta: f64, n: usize },
    Regular { n: usize, d: usize },
    CompleteBipartite { a: usize, b: usize },
}

impl ModelSpec {
    /// Chung-Lu weights when the model is Chung-Lu.
    pub fn chung_lu_weights(&self) -> Result<Option<ChungLuWeights>> {
        match *self {
            ModelSpec::ChungLu { n, w, w_min: None } => ChungLuWeights::constant(n, w).map(Some),
            ModelSpec::ChungLu { n, w, w_min: Some(lo) } => ChungLuWeights::linear_ramp(n, lo, w).map(Some),
            _ => Ok(None),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Graph> {
        match *self {
            ModelSpec::Gnp { n, p } => gen_gnp(n, p, seed),
            ModelSpec::ChungLu { .. } => gen_chung_lu(&self.chung_lu_weights()?.expect("Chung-Lu model"), seed),
            ModelSpec::Pam { m, delta, n } => gen_pam(&PamParams::new(m, delta, n)?, seed),
            ModelSpec::Regular { n, d } => gen_random_regular(n, d, seed).map(|s| s.graph),
            ModelSpec::CompleteBipartite { a, b } => gen_complete_bipartite(a, b),
        }
    }
}
