//! Greedy construction of a bandwidth-bounded partial matching with no short
//! loops, plus independent verifiers of its guarantees.
//!
//! `H = G^3` joins vertices at distance 1..=3. At step `v` the forbidden set
//! `F_v` holds the endpoints of alternating walks `H`, `H M H`, `H M H M H`
//! starting at `v`; `v` is matched to the least later vertex outside
//! `F_v ∪ V(M)`. Walks are a superset of paths, so the forbidden set can only be
//! larger, and the window claim still holds (its counting argument bounds walks).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Relabeling, VertexSet};

const NONE: usize = usize::MAX;

/// `Strict` follows the construction verbatim and stops `Δ^9` positions before
/// the end; `Permissive` visits every vertex and leaves `v` unmatched when no
/// admissible partner exists in its window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingMode {
    #[default]
    Strict,
    Permissive,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchingOptions {
    pub mode: MatchingMode,
    /// Alternation depth of the forbidden walks (1..=3). Strict mode requires 3;
    /// permissive mode picks the deepest that fits the memory budget when unset.
    pub depth: Option<usize>,
    pub record_trace: bool,
}

impl MatchingOptions {
    pub fn strict() -> Self {
        Self::default()
    }

    pub fn permissive() -> Self {
        Self { mode: MatchingMode::Permissive, ..Self::default() }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

/// Window bound `Δ^9` (saturating). Edgeless graphs use 1 so that vertices
/// pair consecutively.
pub fn delta9_budget(max_degree: usize) -> usize {
    if max_degree == 0 {
        1
    } else {
        max_degree.checked_pow(9).unwrap_or(usize::MAX)
    }
}

/// `Δ + Δ(Δ-1) + Δ(Δ-1)^2`, the degree bound of `G^3` (saturating).
pub fn power_graph_degree_bound(max_degree: usize) -> usize {
    let d = max_degree;
    let d1 = d.saturating_sub(1);
    d.saturating_add(d.saturating_mul(d1)).saturating_add(d.saturating_mul(d1).saturating_mul(d1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandwidthMatching {
    partner: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    bandwidth_observed: usize,
    delta9_budget: usize,
    depth: usize,
}

impl BandwidthMatching {
    /// Validates disjoint pairs `(v, w)` with `v != w` inside `[0, n)`; pairs are
    /// stored as `(min, max)` in the given order.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)], delta9_budget: usize) -> Result<Self> {
        let mut partner = vec![NONE; n];
        let mut stored = Vec::with_capacity(pairs.len());
        let mut bandwidth = 0;
        for &(u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(Error::InvalidMatching(format!("vertex {u} paired with itself")));
            }
            if partner[u] != NONE || partner[v] != NONE {
                return Err(Error::InvalidMatching(format!("pair ({u}, {v}) reuses a matched vertex")));
            }
            partner[u] = v;
            partner[v] = u;
            stored.push((u.min(v), u.max(v)));
            bandwidth = bandwidth.max(u.abs_diff(v));
        }
        Ok(Self { partner, pairs: stored, bandwidth_observed: bandwidth, delta9_budget, depth: 3 })
    }

    pub fn n(&self) -> usize {
        self.partner.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn partner(&self, v: usize) -> Option<usize> {
        Some(self.partner[v]).filter(|&p| p != NONE)
    }

    pub fn is_matched(&self, v: usize) -> bool {
        self.partner[v] != NONE
    }

    pub fn unmatched(&self) -> VertexSet {
        VertexSet::from_mask(self.partner.iter().map(|&p| p == NONE).collect())
    }

    pub fn unmatched_count(&self) -> usize {
        self.n() - 2 * self.pairs.len()
    }

    pub fn is_perfect(&self) -> bool {
        self.unmatched_count() == 0
    }

    pub fn bandwidth_observed(&self) -> usize {
        self.bandwidth_observed
    }

    pub fn delta9_budget(&self) -> usize {
        self.delta9_budget
    }

    /// Alternation depth used to build the matching; only depth 3 carries the
    /// no-short-loop guarantee.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Every unmatched vertex lies among the last `delta9_budget` positions.
    pub fn unmatched_in_tail(&self) -> bool {
        let n = self.n();
        (0..n).all(|v| self.is_matched(v) || v + self.delta9_budget >= n)
    }

    /// Smallest unmatched vertex position, if any.
    pub fn first_unmatched(&self) -> Option<usize> {
        self.partner.iter().position(|&p| p == NONE)
    }

    /// The matching on the subgraph selected by `relabel`; every pair must lie
    /// inside the selected vertices.
    pub fn restricted(&self, relabel: &Relabeling) -> Result<Self> {
        if relabel.old_len() != self.n() {
            return Err(Error::UniverseMismatch { expected: self.n(), actual: relabel.old_len() });
        }
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for &(u, v) in &self.pairs {
            match (relabel.to_new(u), relabel.to_new(v)) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                (None, None) => {}
                _ => {
                    return Err(Error::InvalidMatching(format!(
                        "pair ({u}, {v}) straddles the subgraph boundary"
                    )))
                }
            }
        }
        let mut out = Self::from_pairs(relabel.new_len(), &pairs, self.delta9_budget)?;
        out.depth = self.depth;
        Ok(out)
    }

    /// `"v w"` lines with budget, depth and unmatched vertices as comments.
    pub fn to_dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# n: {}", self.n()).unwrap();
        writeln!(s, "# delta9_budget: {}", self.delta9_budget).unwrap();
        writeln!(s, "# depth: {}", self.depth).unwrap();
        for (v, w) in &self.pairs {
            writeln!(s, "{v} {w}").unwrap();
        }
        let unmatched: Vec<String> = self.unmatched().iter().map(|v| v.to_string()).collect();
        writeln!(s, "# unmatched: {}", unmatched.join(" ")).unwrap();
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingSummary {
    pub pairs: usize,
    pub unmatched: usize,
    pub bandwidth_observed: usize,
    pub delta9_budget: usize,
    pub depth: usize,
}

impl From<&BandwidthMatching> for MatchingSummary {
    fn from(m: &BandwidthMatching) -> Self {
        Self {
            pairs: m.len(),
            unmatched: m.unmatched_count(),
            bandwidth_observed: m.bandwidth_observed,
            delta9_budget: m.delta9_budget,
            depth: m.depth,
        }
    }
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("expected a vertex index, got {tok:?}") })
}

/// Reads the dump format written by [`BandwidthMatching::to_dump`]. Missing
/// budget or depth comments default to the observed bandwidth and depth 3.
pub fn parse_matching(text: &str, n: usize) -> Result<BandwidthMatching> {
    let mut pairs = Vec::new();
    let mut budget = None;
    let mut depth = 3;
    let mut listed_unmatched = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if let Some(c) = t.strip_prefix('#') {
            let c = c.trim();
            if let Some(v) = c.strip_prefix("delta9_budget:") {
                budget = Some(parse_usize(line, v.trim())?);
            } else if let Some(v) = c.strip_prefix("depth:") {
                depth = parse_usize(line, v.trim())?;
            } else if let Some(v) = c.strip_prefix("unmatched:") {
                let list: Result<Vec<usize>> = v.split_whitespace().map(|t| parse_usize(line, t)).collect();
                listed_unmatched = Some(list?);
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::Parse { line, msg: "expected \"v w\"".into() });
        }
        pairs.push((parse_usize(line, toks[0])?, parse_usize(line, toks[1])?));
    }
    let mut m = BandwidthMatching::from_pairs(n, &pairs, 0)?;
    m.delta9_budget = budget.unwrap_or(m.bandwidth_observed);
    m.depth = depth;
    if let Some(list) = listed_unmatched {
        if list != m.unmatched().to_vec() {
            return Err(Error::InvalidMatching("unmatched list disagrees with the pairs".into()));
        }
    }
    Ok(m)
}

/// One greedy step at an unmatched vertex `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub v: usize,
    /// `|F_v^+ ∪ M_v^+|`
    pub window_load: usize,
    /// `|F_v|` (both directions, `v` excluded)
    pub f_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingTrace {
    pub delta: usize,
    /// Maximum degree of `G^3` when materialized, else its bound.
    pub delta_h: usize,
    pub steps: Vec<TraceStep>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingRun {
    pub matching: BandwidthMatching,
    pub trace: Option<MatchingTrace>,
}

/// Strict greedy matching (depth 3, loop bound `n - Δ^9`).
pub fn greedy_matching(g: &Graph) -> Result<BandwidthMatching> {
    Ok(greedy_matching_with(g, &MatchingOptions::strict())?.matching)
}

fn choose_depth(n: usize, max_degree: usize, opts: &MatchingOptions) -> Result<usize> {
    match (opts.mode, opts.depth) {
        (MatchingMode::Strict, None | Some(3)) => Ok(3),
        (MatchingMode::Strict, Some(d)) => {
            Err(Error::InvalidParameter(format!("strict matching requires depth 3, got {d}")))
        }
        (MatchingMode::Permissive, Some(d)) if (1..=3).contains(&d) => Ok(d),
        (MatchingMode::Permissive, Some(d)) => {
            Err(Error::InvalidParameter(format!("matching depth must be 1, 2 or 3, got {d}")))
        }
        (MatchingMode::Permissive, None) => {
            // Forbidden sets grow like Δ(H)^depth and H costs n Δ(H) words.
            let dh = power_graph_degree_bound(max_degree) as f64;
            let fits = n as f64 * dh <= 3e7;
            let cap = f64::from(1u32 << 20);
            Ok(if fits && dh.powi(3) <= cap {
                3
            } else if fits && dh.powi(2) <= cap {
                2
            } else {
                1
            })
        }
    }
}

pub fn greedy_matching_with(g: &Graph, opts: &MatchingOptions) -> Result<MatchingRun> {
    g.require_simple()?;
    let n = g.n();
    let delta = g.max_degree();
    let strict = opts.mode == MatchingMode::Strict;
    if strict && delta == 1 {
        return Err(Error::Precondition("strict matching requires max degree > 1 or no edges".into()));
    }
    let depth = choose_depth(n, delta, opts)?;
    let budget = delta9_budget(delta);
    let h = if depth >= 2 { Some(g.power_graph_3()?) } else { None };
    let delta_h = h.as_ref().map_or(power_graph_degree_bound(delta), Graph::max_degree);
    // Pairing v with w <= v + budget keeps w in range and leaves only the final
    // `budget` positions possibly unmatched.
    let last = if strict { n.saturating_sub(budget) } else { n };

    let mut partner = vec![NONE; n];
    let mut pairs = Vec::new();
    let mut bandwidth = 0;
    let mut mark = vec![0u32; n];
    let mut fset = Vec::new();
    let mut steps = Vec::new();
    let mut total_matched = 0usize;
    let mut matched_before = 0usize;

    for v in 0..last {
        if v > 0 && partner[v - 1] != NONE {
            matched_before += 1;
        }
        if partner[v] != NONE {
            continue;
        }
        let tag = u32::try_from(v + 1).expect("vertex count fits in u32");
        match &h {
            Some(h) => forbidden_walks(h, &partner, v, depth, &mut mark, tag, &mut fset),
            None => g.ball(v, 3, &mut mark, tag, &mut fset),
        }
        let window_end = (n - 1).min(v.saturating_add(budget));
        let chosen = (v + 1..=window_end).find(|&w| partner[w] == NONE && mark[w] != tag);
        if opts.record_trace {
            let f_plus_free = fset.iter().filter(|&&u| u > v && partner[u] == NONE).count();
            steps.push(TraceStep {
                v,
                window_load: f_plus_free + (total_matched - matched_before),
                f_size: fset.len(),
            });
        }
        match chosen {
            Some(w) => {
                partner[v] = w;
                partner[w] = v;
                pairs.push((v, w));
                bandwidth = bandwidth.max(w - v);
                total_matched += 2;
            }
            None if strict => return Err(Error::WindowExhausted { v, window_end }),
            None => {}
        }
    }

    let matching = BandwidthMatching { partner, pairs, bandwidth_observed: bandwidth, delta9_budget: budget, depth };
    let trace = opts.record_trace.then_some(MatchingTrace { delta, delta_h, steps });
    Ok(MatchingRun { matching, trace })
}

/// Endpoints of alternating walks from `v` with up to `depth` H-edges, marked
/// with `tag`. Each vertex is expanded through its partner at most once: the
/// expansion does not depend on the level it was reached at.
fn forbidden_walks(
    h: &Graph,
    partner: &[usize],
    v: usize,
    depth: usize,
    mark: &mut [u32],
    tag: u32,
    out: &mut Vec<usize>,
) {
    out.clear();
    mark[v] = tag;
    for &u in h.neighbors(v) {
        mark[u] = tag;
        out.push(u);
    }
    let mut level_start = 0;
    for _ in 1..depth {
        let level_end = out.len();
        for i in level_start..level_end {
            let p = partner[out[i]];
            if p == NONE {
                continue;
            }
            for &u in h.neighbors(p) {
                if mark[u] != tag {
                    mark[u] = tag;
                    out.push(u);
                }
            }
        }
        level_start = level_end;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortLoopReport {
    /// No cycle of length <= 12 with 1..=3 matching edges separated by runs of
    /// 1..=3 graph edges.
    pub definition_ok: bool,
    pub definition_witness: Option<Vec<usize>>,
    /// No alternating `G^3`/matching cycle of length 2, 4 or 6.
    pub condition2_ok: bool,
    pub condition2_witness: Option<Vec<usize>>,
    pub matching_edges_checked: usize,
}

impl ShortLoopReport {
    pub fn passed(&self) -> bool {
        self.definition_ok && self.condition2_ok
    }
}

struct LoopSearch<'a> {
    g: &'a Graph,
    partner: &'a [usize],
    start: usize,
    on_path: Vec<bool>,
    path: Vec<usize>,
    /// Graph distance to `start` for vertices within 3 (`dist_tag` marks validity).
    dist: Vec<u8>,
    dist_stamp: Vec<u32>,
    dist_tag: u32,
    frontier: Vec<usize>,
}

impl LoopSearch<'_> {
    fn set_start(&mut self, a: usize) {
        self.start = a;
        self.dist_tag += 1;
        let tag = self.dist_tag;
        self.frontier.clear();
        self.frontier.push(a);
        self.dist_stamp[a] = tag;
        self.dist[a] = 0;
        let mut level_start = 0;
        for d in 1..=3u8 {
            let level_end = self.frontier.len();
            for i in level_start..level_end {
                let x = self.frontier[i];
                for &y in self.g.neighbors(x) {
                    if self.dist_stamp[y] != tag {
                        self.dist_stamp[y] = tag;
                        self.dist[y] = d;
                        self.frontier.push(y);
                    }
                }
            }
            level_start = level_end;
        }
    }

    /// Graph distance to the start when at most 3.
    fn near(&self, v: usize) -> Option<usize> {
        (self.dist_stamp[v] == self.dist_tag).then(|| usize::from(self.dist[v]))
    }

    fn push(&mut self, v: usize) {
        self.on_path[v] = true;
        self.path.push(v);
    }

    fn pop(&mut self) {
        let v = self.path.pop().unwrap();
        self.on_path[v] = false;
    }

    /// Extends the current graph run from `x`; `run` edges are already in it.
    fn graph_run(&mut self, x: usize, run: usize, m_used: usize) -> bool {
        for &y in self.g.neighbors(x) {
            if y == self.start {
                return true;
            }
            if self.on_path[y] {
                continue;
            }
            // After the last matching edge the run must still be able to close.
            let can_close = m_used < 3 || self.near(y).is_some_and(|d| run + 1 + d <= 3);
            if !can_close {
                continue;
            }
            self.push(y);
            if run + 1 < 3 && self.graph_run(y, run + 1, m_used) {
                return true;
            }
            let p = self.partner[y];
            // The start is the smallest matched vertex on the cycle; a third
            // matching edge must land within closing distance.
            if m_used < 3
                && p != NONE
                && y > self.start
                && p > self.start
                && !self.on_path[p]
                && (m_used < 2 || self.near(p).is_some())
            {
                self.push(p);
                if self.graph_run(p, 0, m_used + 1) {
                    return true;
                }
                self.pop();
            }
            self.pop();
        }
        false
    }
}

/// Exhaustive search for short loops of `g` and `m`, plus the alternating
/// `G^3` cycle check.
pub fn verify_no_short_loops(g: &Graph, m: &BandwidthMatching) -> Result<ShortLoopReport> {
    if g.n() != m.n() {
        return Err(Error::UniverseMismatch { expected: g.n(), actual: m.n() });
    }
    let n = g.n();
    let mut search = LoopSearch {
        g,
        partner: &m.partner,
        start: 0,
        on_path: vec![false; n],
        path: Vec::new(),
        dist: vec![0; n],
        dist_stamp: vec![0; n],
        dist_tag: 0,
        frontier: Vec::new(),
    };
    let mut definition_witness = None;
    // Pairs are stored as (min, max); a cycle is enumerated from its smallest
    // matched vertex, leaving through that vertex's matching edge.
    for &(a, b) in &m.pairs {
        search.set_start(a);
        search.push(a);
        search.push(b);
        let found = search.graph_run(b, 0, 1);
        if found {
            definition_witness = Some(search.path.clone());
        }
        while !search.path.is_empty() {
            search.pop();
        }
        if found {
            break;
        }
    }
    let condition2_witness = alternating_cycle(g, m);
    Ok(ShortLoopReport {
        definition_ok: definition_witness.is_none(),
        definition_witness,
        condition2_ok: condition2_witness.is_none(),
        condition2_witness,
        matching_edges_checked: m.len(),
    })
}

/// First alternating cycle `a-M-b-H-c-M-d-H-...-a` of length 2, 4 or 6.
fn alternating_cycle(g: &Graph, m: &BandwidthMatching) -> Option<Vec<usize>> {
    let n = g.n();
    let mut mark_a = vec![0u32; n];
    let mut scratch = vec![0u32; n];
    let mut scratch_tag = 0u32;
    let (mut ball_a, mut ball_b, mut ball_d) = (Vec::new(), Vec::new(), Vec::new());
    let partner = &m.partner;
    for (i, &(a, b)) in m.pairs.iter().enumerate() {
        let tag_a = u32::try_from(i + 1).expect("matching size fits in u32");
        g.ball(a, 3, &mut mark_a, tag_a, &mut ball_a);
        if mark_a[b] == tag_a {
            return Some(vec![a, b]);
        }
        scratch_tag += 1;
        g.ball(b, 3, &mut scratch, scratch_tag, &mut ball_b);
        for &c in &ball_b {
            let d = partner[c];
            if c == a || d == NONE || d == a {
                continue;
            }
            if mark_a[d] == tag_a {
                return Some(vec![a, b, c, d]);
            }
            scratch_tag += 1;
            g.ball(d, 3, &mut scratch, scratch_tag, &mut ball_d);
            for &e in &ball_d {
                let f = partner[e];
                if [a, b, c].contains(&e) || f == NONE || [a, b, c, d].contains(&f) {
                    continue;
                }
                if mark_a[f] == tag_a {
                    return Some(vec![a, b, c, d, e, f]);
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub steps_checked: usize,
    /// `Δ^9 - 1`
    pub window_bound: usize,
    pub max_window_load: usize,
    /// `Δ(H) + Δ(H)^2 + Δ(H)^3`
    pub f_bound: usize,
    pub max_f_size: usize,
    pub window_ok: bool,
    pub f_ok: bool,
    pub first_violation: Option<usize>,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.window_ok && self.f_ok
    }
}

/// Checks `|F_v^+ ∪ M_v^+| <= Δ^9 - 1` and `|F_v| <= Δ(H) + Δ(H)^2 + Δ(H)^3`
/// at every recorded step.
pub fn claim_window_check(g: &Graph, trace: &MatchingTrace) -> Result<ClaimReport> {
    if trace.delta != g.max_degree() {
        return Err(Error::Precondition(format!(
            "trace recorded for max degree {}, graph has {}",
            trace.delta,
            g.max_degree()
        )));
    }
    let window_bound = delta9_budget(trace.delta) - 1;
    let dh = trace.delta_h;
    let f_bound = dh.saturating_add(dh.saturating_mul(dh)).saturating_add(dh.saturating_pow(3));
    let mut report = ClaimReport {
        steps_checked: trace.steps.len(),
        window_bound,
        max_window_load: 0,
        f_bound,
        max_f_size: 0,
        window_ok: true,
        f_ok: true,
        first_violation: None,
    };
    for s in &trace.steps {
        report.max_window_load = report.max_window_load.max(s.window_load);
        report.max_f_size = report.max_f_size.max(s.f_size);
        let w_bad = s.window_load > window_bound;
        let f_bad = s.f_size > f_bound;
        report.window_ok &= !w_bad;
        report.f_ok &= !f_bad;
        if (w_bad || f_bad) && report.first_violation.is_none() {
            report.first_violation = Some(s.v);
        }
    }
    Ok(report)
}
