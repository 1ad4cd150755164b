//! Defining graphs, their four-cycle graphs, and the CFS test.
//!
//! A graph `Γ` has a four-cycle graph `Λ(Γ)` whose vertices are the induced
//! 4-cycles of `Γ`, two of them adjacent when they share an edge of `Γ`. `Γ`
//! is CFS when some component of `Λ(Γ)` covers every vertex of `Γ`.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    /// Edges as `(i, j)` with `i < j`, indices into `vertices`.
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<bool>,
}

impl SimpleGraph {
    pub fn new<S: Into<String>>(vertices: Vec<S>) -> Result<Self> {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if v.is_empty() || v.chars().any(char::is_whitespace) || v.starts_with('#') {
                return Err(Error::InvalidGraph(format!("bad vertex label `{v}`")));
            }
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{v}`")));
            }
        }
        let n = vertices.len();
        Ok(SimpleGraph {
            vertices,
            index,
            edges: BTreeSet::new(),
            adj: vec![false; n * n],
        })
    }

    pub fn with_edges<S: Into<String>>(vertices: Vec<S>, edges: &[(&str, &str)]) -> Result<Self> {
        let mut g = Self::new(vertices)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds an edge; a no-op if already present. Self-loops are rejected.
    pub fn add_edge(&mut self, u: &str, v: &str) -> Result<()> {
        let i = self.vertex_index(u)?;
        let j = self.vertex_index(v)?;
        self.add_edge_idx(i, j)
    }

    fn add_edge_idx(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::InvalidGraph(format!(
                "self-loop at `{}`",
                self.vertices[i]
            )));
        }
        let n = self.vertices.len();
        self.edges.insert((i.min(j), i.max(j)));
        self.adj[i * n + j] = true;
        self.adj[j * n + i] = true;
        Ok(())
    }

    pub fn vertex_index(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn label(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.vertices.len() + j]
    }

    pub fn has_edge(&self, u: &str, v: &str) -> Result<bool> {
        Ok(self.adjacent(self.vertex_index(u)?, self.vertex_index(v)?))
    }

    /// Same graph with vertices renamed by `perm`: vertex `i` becomes
    /// `labels[perm[i]]` where `labels` is the current label list.
    pub fn relabeled(&self, perm: &[usize]) -> Result<SimpleGraph> {
        if perm.len() != self.vertex_count() {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        let labels: Vec<String> = perm.iter().map(|&p| self.vertices[p].clone()).collect();
        let mut g = SimpleGraph::new(labels)?;
        for &(i, j) in &self.edges {
            g.add_edge_idx(i, j)?;
        }
        Ok(g)
    }

    /// Parses the line-oriented graph format.
    ///
    /// ```text
    /// # comment
    /// vertices: a1 a2 b1 b2
    /// a1 a2
    /// a1 b2
    /// ```
    pub fn parse(text: &str) -> Result<SimpleGraph> {
        let mut graph: Option<SimpleGraph> = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| Error::GraphFormat { line: ln + 1, reason };
            match graph.as_mut() {
                None => {
                    let rest = line
                        .strip_prefix("vertices:")
                        .ok_or_else(|| err("expected `vertices:` header".into()))?;
                    let vs: Vec<&str> = rest.split_whitespace().collect();
                    graph = Some(SimpleGraph::new(vs).map_err(|e| err(e.to_string()))?);
                }
                Some(g) => {
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(err(format!("expected `u v`, got `{line}`")));
                    }
                    g.add_edge(parts[0], parts[1]).map_err(|e| err(e.to_string()))?;
                }
            }
        }
        graph.ok_or(Error::GraphFormat { line: 0, reason: "missing `vertices:` header".into() })
    }

    /// Serializes in the graph file format. Each edge is written with its
    /// lexicographically smaller label first; edge lines are sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("vertices:");
        for v in &self.vertices {
            out.push(' ');
            out.push_str(v);
        }
        out.push('\n');
        let mut lines: Vec<(&str, &str)> = self
            .edges
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (self.vertices[i].as_str(), self.vertices[j].as_str());
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        lines.sort_unstable();
        for (a, b) in lines {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }
}

/// The ladder `Γ_n` on `a1..an, b1..bn`: `c_i ~ c'_j` iff `|i - j| = 1`.
pub fn ladder_graph(n: usize) -> Result<SimpleGraph> {
    if n < 2 {
        return Err(Error::LadderTooSmall(n));
    }
    let labels: Vec<String> = (1..=n)
        .map(|i| format!("a{i}"))
        .chain((1..=n).map(|i| format!("b{i}")))
        .collect();
    let mut g = SimpleGraph::new(labels)?;
    for i in 0..n - 1 {
        for c in [0, n] {
            for d in [0, n] {
                g.add_edge_idx(c + i, d + i + 1)?;
            }
        }
    }
    Ok(g)
}

/// The edgeless graph on `k` vertices `s1..sk` (free product of `k` copies of Z/2).
pub fn edgeless_graph(k: usize) -> SimpleGraph {
    SimpleGraph::new((1..=k).map(|i| format!("s{i}")).collect()).expect("distinct labels")
}

/// The 4-cycle `x1 - y1 - x2 - y2`, whose Coxeter group is `D∞ × D∞`.
pub fn square_graph() -> SimpleGraph {
    SimpleGraph::with_edges(
        vec!["x1", "y1", "x2", "y2"],
        &[("x1", "y1"), ("y1", "x2"), ("x2", "y2"), ("y2", "x1")],
    )
    .expect("valid square")
}

/// Adds the closed cycle `vs[0] - vs[1] - ... - vs[last] - vs[0]`.
pub fn add_cycle(g: &SimpleGraph, vs: &[&str]) -> Result<SimpleGraph> {
    if vs.len() < 3 {
        return Err(Error::CycleTooShort(vs.len()));
    }
    let idx: Vec<usize> = vs.iter().map(|v| g.vertex_index(v)).collect::<Result<_>>()?;
    let mut out = g.clone();
    for k in 0..idx.len() {
        out.add_edge_idx(idx[k], idx[(k + 1) % idx.len()])?;
    }
    Ok(out)
}

/// An induced 4-cycle stored as its canonical vertex sequence: the
/// lexicographically least of its 8 rotations and reflections.
pub type Cycle = [usize; 4];

fn canonical(c: [usize; 4]) -> Cycle {
    let mut best = c;
    for r in 0..4 {
        let rot = [c[r], c[(r + 1) % 4], c[(r + 2) % 4], c[(r + 3) % 4]];
        let refl = [rot[0], rot[3], rot[2], rot[1]];
        best = best.min(rot).min(refl);
    }
    best
}

fn cycle_edges(c: &Cycle) -> [(usize, usize); 4] {
    let e = |a: usize, b: usize| (a.min(b), a.max(b));
    [e(c[0], c[1]), e(c[1], c[2]), e(c[2], c[3]), e(c[3], c[0])]
}

#[derive(Debug, Clone)]
pub struct FourCycleGraph {
    pub cycles: Vec<Cycle>,
    /// Pairs `(i, j)`, `i < j`, of cycle indices sharing an edge of the source.
    pub adjacency: Vec<(usize, usize)>,
    /// Component id per cycle.
    pub component: Vec<usize>,
    /// Source vertices covered by each component.
    pub supports: Vec<BTreeSet<usize>>,
}

impl FourCycleGraph {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.adjacency
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn position(&self, c: &Cycle) -> Option<usize> {
        let c = canonical(*c);
        self.cycles.iter().position(|x| *x == c)
    }
}

/// Brute-force enumeration of induced 4-cycles over ordered 4-tuples.
pub fn four_cycle_graph(g: &SimpleGraph) -> FourCycleGraph {
    let n = g.vertex_count();
    let mut found = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if b == a || !g.adjacent(a, b) {
                continue;
            }
            for c in 0..n {
                if c == a || c == b || !g.adjacent(b, c) || g.adjacent(a, c) {
                    continue;
                }
                for d in 0..n {
                    if d == a || d == b || d == c {
                        continue;
                    }
                    if g.adjacent(c, d) && g.adjacent(d, a) && !g.adjacent(b, d) {
                        found.insert(canonical([a, b, c, d]));
                    }
                }
            }
        }
    }
    let cycles: Vec<Cycle> = found.into_iter().collect();

    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (k, c) in cycles.iter().enumerate() {
        for e in cycle_edges(c) {
            by_edge.entry(e).or_default().push(k);
        }
    }
    let mut adjacency = BTreeSet::new();
    for members in by_edge.values() {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                adjacency.insert((i.min(j), i.max(j)));
            }
        }
    }
    let adjacency: Vec<(usize, usize)> = adjacency.into_iter().collect();

    // union-find over cycles
    let mut parent: Vec<usize> = (0..cycles.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j) in &adjacency {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut component = Vec::with_capacity(cycles.len());
    let mut supports: Vec<BTreeSet<usize>> = Vec::new();
    for k in 0..cycles.len() {
        let root = find(&mut parent, k);
        let next = ids.len();
        let id = *ids.entry(root).or_insert(next);
        if id == supports.len() {
            supports.push(BTreeSet::new());
        }
        supports[id].extend(cycles[k]);
        component.push(id);
    }
    FourCycleGraph { cycles, adjacency, component, supports }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfsVerdict {
    pub verdict: bool,
    /// Support of a full-support component, as vertex labels; empty if none.
    pub witness_component: Vec<String>,
    pub lambda_vertices: usize,
}

pub fn is_cfs(g: &SimpleGraph) -> CfsVerdict {
    let lambda = four_cycle_graph(g);
    let full = lambda
        .supports
        .iter()
        .find(|s| g.vertex_count() > 0 && s.len() == g.vertex_count());
    CfsVerdict {
        verdict: full.is_some(),
        witness_component: full
            .map(|s| s.iter().map(|&i| g.label(i).to_string()).collect())
            .unwrap_or_default(),
        lambda_vertices: lambda.len(),
    }
}

/// Automorphisms of `g` as vertex permutations (`perm[i]` is the image of
/// `i`), by backtracking in vertex order; at most `cap` are returned, the
/// identity first.
pub fn automorphisms(g: &SimpleGraph, cap: usize) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let deg: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| g.adjacent(i, j)).count()).collect();
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        g: &SimpleGraph,
        deg: &[usize],
        i: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        let n = perm.len();
        if i == n {
            out.push(perm.clone());
            return;
        }
        for c in 0..n {
            if used[c] || deg[c] != deg[i] {
                continue;
            }
            if (0..i).any(|j| g.adjacent(i, j) != g.adjacent(c, perm[j])) {
                continue;
            }
            perm[i] = c;
            used[c] = true;
            go(g, deg, i + 1, perm, used, out, cap);
            used[c] = false;
            perm[i] = usize::MAX;
        }
    }
    go(g, &deg, 0, &mut perm, &mut used, &mut out, cap);
    out
}

/// Renders a cycle as `u - v - w - x`.
pub fn cycle_labels(g: &SimpleGraph, c: &Cycle) -> String {
    c.iter().map(|&i| g.label(i)).collect::<Vec<_>>().join(" - ")
}
