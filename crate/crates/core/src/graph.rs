//! Immutable sparse undirected (multi)graphs in CSR form.
//!
//! Loops contribute 2 to the degree of their vertex and 1 to the edge count,
//! so `sum(degrees) == 2 * m` holds for every graph. Neighbor lists are sorted,
//! which keeps duplicate detection, cut counting and induced subgraphs linear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Membership mask over `[0, n)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexSet {
    members: Vec<bool>,
    len: usize,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        Self { members: vec![false; n], len: 0 }
    }

    pub fn full(n: usize) -> Self {
        Self { members: vec![true; n], len: n }
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(n);
        for v in indices {
            if v >= n {
                return Err(Error::VertexOutOfRange { u: v, v, n });
            }
            set.insert(v);
        }
        Ok(set)
    }

    pub fn from_mask(members: Vec<bool>) -> Self {
        let len = members.iter().filter(|&&b| b).count();
        Self { members, len }
    }

    /// Size of the ambient vertex range.
    pub fn universe(&self) -> usize {
        self.members.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.get(v).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        let fresh = !self.members[v];
        if fresh {
            self.members[v] = true;
            self.len += 1;
        }
        fresh
    }

    pub fn remove(&mut self, v: usize) -> bool {
        let present = self.members[v];
        if present {
            self.members[v] = false;
            self.len -= 1;
        }
        present
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter_map(|(v, &b)| b.then_some(v))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(self.members.iter().map(|b| !b).collect())
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_mask(self.members.iter().zip(&other.members).map(|(a, b)| *a || *b).collect())
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.members.iter().zip(&other.members).all(|(a, b)| !(*a && *b))
    }
}

/// Degree summary of a graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub dbar: f64,
    pub delta_max: usize,
    pub delta_min: usize,
    /// `degree_histogram[k]` is the number of vertices of degree `k`.
    pub degree_histogram: Vec<usize>,
}

/// Counts of what [`Graph::simplify`] removed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplifyReport {
    pub removed_loops: usize,
    pub removed_multi: usize,
}

/// Explicit vertex relabeling between an old and a new index space.
///
/// Every new index maps to an old one; old indices may be absent from the new
/// space (induced subgraphs).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relabeling {
    new_to_old: Vec<usize>,
    old_to_new: Vec<Option<usize>>,
}

impl Relabeling {
    pub fn from_new_to_old(old_len: usize, new_to_old: Vec<usize>) -> Result<Self> {
        let mut old_to_new = vec![None; old_len];
        for (new, &old) in new_to_old.iter().enumerate() {
            if old >= old_len {
                return Err(Error::VertexOutOfRange { u: old, v: old, n: old_len });
            }
            if old_to_new[old].replace(new).is_some() {
                return Err(Error::Precondition(format!("old vertex {old} mapped twice")));
            }
        }
        Ok(Self { new_to_old, old_to_new })
    }

    pub fn to_old(&self, new: usize) -> usize {
        self.new_to_old[new]
    }

    pub fn to_new(&self, old: usize) -> Option<usize> {
        self.old_to_new[old]
    }

    pub fn new_len(&self) -> usize {
        self.new_to_old.len()
    }

    pub fn old_len(&self) -> usize {
        self.old_to_new.len()
    }

    pub fn is_permutation(&self) -> bool {
        self.new_len() == self.old_len()
    }

    pub fn new_to_old(&self) -> &[usize] {
        &self.new_to_old
    }

    pub fn set_to_old(&self, set: &VertexSet) -> VertexSet {
        let mut out = VertexSet::empty(self.old_len());
        for v in set.iter() {
            out.insert(self.to_old(v));
        }
        out
    }

    /// Old members that are absent from the new space are dropped.
    pub fn set_to_new(&self, set: &VertexSet) -> VertexSet {
        let mut out = VertexSet::empty(self.new_len());
        for v in set.iter() {
            if let Some(w) = self.to_new(v) {
                out.insert(w);
            }
        }
        out
    }
}

/// Immutable undirected graph with sorted CSR adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    m: usize,
    loop_count: usize,
    multi_edge_count: usize,
    allows_multi: bool,
}

impl Graph {
    /// Builds a graph on `[0, n)`. In simple mode loops and repeated pairs
    /// are rejected; otherwise they are kept and counted.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], allow_multi: bool) -> Result<Self> {
        let mut degree = vec![0usize; n];
        let mut loop_count = 0;
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { u, v, n });
            }
            if u == v {
                if !allow_multi {
                    return Err(Error::SelfLoop(u));
                }
                loop_count += 1;
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0usize; offsets[n]];
        for &(u, v) in edges {
            targets[cursor[u]] = v;
            cursor[u] += 1;
            targets[cursor[v]] = u;
            cursor[v] += 1;
        }
        let mut multi_edge_count = 0;
        for v in 0..n {
            let list = &mut targets[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            for pair in list.windows(2) {
                if pair[0] == pair[1] && pair[0] != v {
                    if !allow_multi {
                        return Err(Error::DuplicateEdge(v.min(pair[0]), v.max(pair[0])));
                    }
                    if pair[0] > v {
                        multi_edge_count += 1;
                    }
                }
            }
        }
        Ok(Self {
            n,
            offsets,
            targets,
            m: edges.len(),
            loop_count,
            multi_edge_count,
            allows_multi: allow_multi,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, &[], false).expect("edgeless graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn allows_multi(&self) -> bool {
        self.allows_multi
    }

    pub fn loop_count(&self) -> usize {
        self.loop_count
    }

    /// Parallel copies beyond the first in each class of non-loop edges.
    pub fn multi_edge_count(&self) -> usize {
        self.multi_edge_count
    }

    pub fn is_simple(&self) -> bool {
        self.loop_count == 0 && self.multi_edge_count == 0
    }

    pub fn require_simple(&self) -> Result<()> {
        if self.is_simple() {
            Ok(())
        } else {
            Err(Error::NotSimple { loops: self.loop_count, multi: self.multi_edge_count })
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// `2m / n`, or 0 for the empty vertex set.
    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.m as f64 / self.n as f64
        }
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let delta_max = self.max_degree();
        let mut degree_histogram = vec![0; delta_max + 1];
        for v in 0..self.n {
            degree_histogram[self.degree(v)] += 1;
        }
        DegreeStats {
            dbar: self.average_degree(),
            delta_max,
            delta_min: self.min_degree(),
            degree_histogram,
        }
    }

    /// Each edge once as `(u, v)` with `u <= v`, parallel copies repeated.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            let mut loop_half = false;
            for &v in self.neighbors(u) {
                if v > u {
                    out.push((u, v));
                } else if v == u {
                    // loops are listed twice at their vertex
                    if loop_half {
                        out.push((u, u));
                    }
                    loop_half = !loop_half;
                }
            }
        }
        out
    }

    fn check_universe(&self, set: &VertexSet) -> Result<()> {
        if set.universe() != self.n {
            return Err(Error::UniverseMismatch { expected: self.n, actual: set.universe() });
        }
        Ok(())
    }

    pub fn volume(&self, set: &VertexSet) -> usize {
        set.iter().map(|v| self.degree(v)).sum()
    }

    /// `e(S)`: edges with both endpoints in `set` (loops included).
    pub fn internal_edges(&self, set: &VertexSet) -> usize {
        let twice: usize = set
            .iter()
            .map(|v| self.neighbors(v).iter().filter(|&&u| set.contains(u)).count())
            .sum();
        twice / 2
    }

    /// `e(A, B)` for disjoint `a` and `b`.
    pub fn cut(&self, a: &VertexSet, b: &VertexSet) -> Result<usize> {
        self.check_universe(a)?;
        self.check_universe(b)?;
        if !a.is_disjoint(b) {
            return Err(Error::OverlappingSets);
        }
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        Ok(small
            .iter()
            .map(|v| self.neighbors(v).iter().filter(|&&u| large.contains(u)).count())
            .sum())
    }

    /// Edges with exactly one endpoint in `set`.
    pub fn boundary(&self, set: &VertexSet) -> usize {
        set.iter()
            .map(|v| self.neighbors(v).iter().filter(|&&u| !set.contains(u)).count())
            .sum()
    }

    /// Collapses parallel classes and drops loops.
    pub fn simplify(&self) -> (Graph, SimplifyReport) {
        let mut edges = Vec::with_capacity(self.m);
        for u in 0..self.n {
            let mut prev = None;
            for &v in self.neighbors(u) {
                if v > u && prev != Some(v) {
                    edges.push((u, v));
                }
                prev = Some(v);
            }
        }
        let report = SimplifyReport {
            removed_loops: self.loop_count,
            removed_multi: self.multi_edge_count,
        };
        let g = Graph::from_edges(self.n, &edges, false).expect("simplified edges are simple");
        (g, report)
    }

    /// Vertices at distance 1..=radius from `v` (unordered), using `stamp`
    /// (length n, values < `tag`) as scratch.
    pub(crate) fn ball(&self, v: usize, radius: usize, stamp: &mut [u32], tag: u32, out: &mut Vec<usize>) {
        out.clear();
        stamp[v] = tag;
        out.push(v);
        let mut level_start = 0;
        for _ in 0..radius {
            let level_end = out.len();
            for i in level_start..level_end {
                let x = out[i];
                for &y in self.neighbors(x) {
                    if stamp[y] != tag {
                        stamp[y] = tag;
                        out.push(y);
                    }
                }
            }
            level_start = level_end;
        }
        out.swap_remove(0);
    }

    /// `G^3`: `u ~ v` iff `0 < dist(u, v) <= 3`.
    pub fn power_graph_3(&self) -> Result<Graph> {
        self.require_simple()?;
        let mut stamp = vec![0u32; self.n];
        let mut ball = Vec::new();
        let mut edges = Vec::new();
        for v in 0..self.n {
            self.ball(v, 3, &mut stamp, v as u32 + 1, &mut ball);
            edges.extend(ball.iter().filter(|&&u| u > v).map(|&u| (v, u)));
        }
        Graph::from_edges(self.n, &edges, false)
    }

    /// Subgraph induced by `set`, relabeled to `[0, |set|)` in increasing
    /// order of the original indices.
    pub fn induced_subgraph(&self, set: &VertexSet) -> Result<(Graph, Relabeling)> {
        self.check_universe(set)?;
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let relabel = Relabeling::from_new_to_old(self.n, set.to_vec())?;
        let mut edges = Vec::new();
        for (new_u, &u) in relabel.new_to_old().iter().enumerate() {
            let mut loop_half = false;
            for &v in self.neighbors(u) {
                let Some(new_v) = relabel.to_new(v) else { continue };
                if v > u {
                    edges.push((new_u, new_v));
                } else if v == u {
                    if loop_half {
                        edges.push((new_u, new_u));
                    }
                    loop_half = !loop_half;
                }
            }
        }
        let g = Graph::from_edges(set.len(), &edges, self.allows_multi)?;
        Ok((g, relabel))
    }

    /// Same graph under a permutation: new vertex `i` is old vertex
    /// `relabel.to_old(i)`.
    pub fn permuted(&self, relabel: &Relabeling) -> Result<Graph> {
        if !relabel.is_permutation() || relabel.old_len() != self.n {
            return Err(Error::Precondition("relabeling is not a permutation of V(G)".into()));
        }
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(u, v)| (relabel.to_new(u).unwrap(), relabel.to_new(v).unwrap()))
            .collect();
        Graph::from_edges(self.n, &edges, self.allows_multi)
    }
}
