//! Naive oracles shared by the integration targets.
#![allow(dead_code)]

use modbisect::{Graph, Partition, Rational};

/// Modularity straight from the pairwise definition
/// `(1/2m) sum_{i,j} (A_ij - d_i d_j / 2m) [c_i = c_j]`.
pub fn naive_modularity(g: &Graph, p: &Partition) -> Rational {
    let n = g.n();
    let two_m = Rational::from_integer(2 * g.m() as i128);
    let mut adj = vec![vec![0i128; n]; n];
    for (u, v) in g.edges() {
        adj[u][v] += 1;
        adj[v][u] += 1;
    }
    let mut total = Rational::from_integer(0);
    for i in 0..n {
        for j in 0..n {
            if p.part(i) == p.part(j) {
                let dd = Rational::from_integer(g.degree(i) as i128 * g.degree(j) as i128);
                total += Rational::from_integer(adj[i][j]) - dd / two_m;
            }
        }
    }
    total / two_m
}

/// All-pairs distances by repeated relaxation (`usize::MAX` when unreachable).
pub fn naive_distances(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut d = vec![vec![usize::MAX; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != usize::MAX && d[k][j] != usize::MAX && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn prefix_ok(labels: &[bool]) -> bool {
    let mut matched = 0;
    let mut run = 0;
    for (i, &is_m) in labels.iter().enumerate() {
        if is_m {
            matched += 1;
            if i > 0 && labels[i - 1] {
                return false;
            }
            run = 0;
        } else {
            run += 1;
            if run > 3 {
                return false;
            }
        }
    }
    matched <= 3
}

/// Cyclic label pattern: 1..=3 matching edges, each pair of cyclically
/// consecutive ones separated by 1..=3 graph edges.
pub fn cyclic_pattern_ok(labels: &[bool]) -> bool {
    let k = labels.iter().filter(|&&m| m).count();
    if !(1..=3).contains(&k) || labels.len() > 12 {
        return false;
    }
    let first = labels.iter().position(|&m| m).unwrap();
    let rotated: Vec<bool> = labels[first..].iter().chain(&labels[..first]).copied().collect();
    let mut run = 0;
    for &is_m in rotated.iter().skip(1).chain(std::iter::once(&true)) {
        if is_m {
            if !(1..=3).contains(&run) {
                return false;
            }
            run = 0;
        } else {
            run += 1;
        }
    }
    true
}

struct Naive<'a> {
    inc: &'a [Vec<(usize, usize, bool)>],
    used: Vec<bool>,
    visited: Vec<bool>,
    labels: Vec<bool>,
}

impl Naive<'_> {
    fn dfs(&mut self, start: usize, v: usize) -> bool {
        if self.labels.len() >= 12 {
            return false;
        }
        for &(e, w, is_m) in &self.inc[v] {
            if self.used[e] {
                continue;
            }
            self.labels.push(is_m);
            let hit = if w == start {
                cyclic_pattern_ok(&self.labels)
            } else if !self.visited[w] && prefix_ok(&self.labels) {
                self.used[e] = true;
                self.visited[w] = true;
                let r = self.dfs(start, w);
                self.visited[w] = false;
                self.used[e] = false;
                r
            } else {
                false
            };
            self.labels.pop();
            if hit {
                return true;
            }
        }
        false
    }
}

/// True when some simple cycle over graph edges and pair edges (each edge used
/// once) has the forbidden short-loop pattern.
pub fn naive_has_short_loop(g: &Graph, pairs: &[(usize, usize)]) -> bool {
    let n = g.n();
    let mut inc = vec![Vec::new(); n];
    let mut id = 0;
    let labelled = g.edges().into_iter().map(|e| (e, false)).chain(pairs.iter().map(|&e| (e, true)));
    for ((u, v), is_m) in labelled {
        inc[u].push((id, v, is_m));
        inc[v].push((id, u, is_m));
        id += 1;
    }
    let mut s = Naive { inc: &inc, used: vec![false; id], visited: vec![false; n], labels: Vec::new() };
    (0..n).any(|start| {
        s.visited[start] = true;
        let r = s.dfs(start, start);
        s.visited[start] = false;
        r
    })
}

/// True when `k = 1..=3` distinct oriented pairs `(x_i, y_i)` exist with
/// `dist(y_i, x_{i+1}) <= 3` cyclically.
pub fn naive_has_alternating_cycle(g: &Graph, pairs: &[(usize, usize)]) -> bool {
    let d = naive_distances(g);
    let close = |a: usize, b: usize| d[a][b] <= 3;
    let oriented: Vec<(usize, usize, usize)> =
        pairs.iter().enumerate().flat_map(|(i, &(u, v))| [(i, u, v), (i, v, u)]).collect();
    for &(i1, x1, y1) in &oriented {
        if close(y1, x1) {
            return true;
        }
        for &(i2, x2, y2) in &oriented {
            if i2 == i1 || !close(y1, x2) {
                continue;
            }
            if close(y2, x1) {
                return true;
            }
            for &(i3, x3, y3) in &oriented {
                if i3 != i1 && i3 != i2 && close(y2, x3) && close(y3, x1) {
                    return true;
                }
            }
        }
    }
    false
}

/// Deterministic graph from an upper-triangle edge mask.
pub fn graph_from_mask(n: usize, mask: &[bool]) -> Graph {
    let mut edges = Vec::new();
    let mut idx = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask[idx % mask.len().max(1)] {
                edges.push((u, v));
            }
            idx += 1;
        }
    }
    Graph::from_edges(n, &edges, false).expect("mask graphs are simple")
}
