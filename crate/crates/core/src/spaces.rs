//! Pointed metric spaces: Cayley graphs of Coxeter/Artin groups, finite
//! graphs, and the Euclidean plane.

use std::collections::VecDeque;
use std::fmt::Debug;

use crate::coxeter::{Letter, Presentation, Word};
use crate::error::{Error, Result};
use crate::graphs::SimpleGraph;

pub trait MetricSpace: Send + Sync {
    type Point: Clone + Debug + PartialEq + Send + Sync;
    /// Precomputed data describing how to move from one point of a sequence to the next.
    type Step: Clone + Send + Sync;

    fn basepoint(&self) -> Self::Point;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;

    fn norm(&self, a: &Self::Point) -> f64 {
        self.distance(&self.basepoint(), a)
    }

    /// A geodesic from `a` to `b` including both endpoints, or `None` when the
    /// space has no geodesic oracle.
    fn geodesic(&self, _a: &Self::Point, _b: &Self::Point) -> Option<Vec<Self::Point>> {
        None
    }

    /// Step data for `pts`, one entry per consecutive pair.
    fn steps(&self, pts: &[Self::Point]) -> Vec<Self::Step>;

    /// `d(q, pts[j])` for every `j`, given `steps(pts)`.
    fn distances_along(&self, q: &Self::Point, pts: &[Self::Point], _steps: &[Self::Step]) -> Vec<f64> {
        pts.iter().map(|p| self.distance(q, p)).collect()
    }

    fn format_point(&self, p: &Self::Point) -> String;

    fn parse_point(&self, s: &str) -> Result<Self::Point>;
}

/// Distance from `q` to the nearest point of `pts`.
pub fn distance_to_set<S: MetricSpace>(space: &S, q: &S::Point, pts: &[S::Point], steps: &[S::Step]) -> f64 {
    space
        .distances_along(q, pts, steps)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Membership in the κ-neighbourhood: `d(x, Z) <= D·κ(‖x‖)`.
pub fn in_neighborhood<S: MetricSpace>(
    space: &S,
    x: &S::Point,
    z: &[S::Point],
    z_steps: &[S::Step],
    d: f64,
    kappa: &crate::sublinear::SublinearFn,
) -> bool {
    distance_to_set(space, x, z, z_steps) <= d * kappa.eval(space.norm(x))
}

/// Least `D` with every point of `pts` in the κ-neighbourhood of `Z` with constant `D`.
pub fn neighborhood_constant<S: MetricSpace>(
    space: &S,
    pts: &[S::Point],
    z: &[S::Point],
    z_steps: &[S::Step],
    kappa: &crate::sublinear::SublinearFn,
) -> f64 {
    pts.iter()
        .map(|x| distance_to_set(space, x, z, z_steps) / kappa.eval(space.norm(x)))
        .fold(0.0, f64::max)
}

/// The Cayley graph of a presentation with respect to its vertex generators.
/// Points are reduced words.
#[derive(Debug, Clone)]
pub struct CayleySpace {
    pres: Presentation,
}

impl CayleySpace {
    pub fn new(pres: Presentation) -> CayleySpace {
        CayleySpace { pres }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    /// The reduced word for `w`.
    pub fn point(&self, w: &Word) -> Word {
        self.pres.reduce(w)
    }

    pub fn multiply(&self, p: &Word, s: Letter) -> Word {
        let mut v = p.letters().to_vec();
        self.pres.right_multiply(&mut v, s);
        Word::from_letters(v)
    }

    /// Normal form of a point, used as a canonical key.
    pub fn key(&self, p: &Word) -> Word {
        self.pres.normal_form_of_reduced(p)
    }
}

impl MetricSpace for CayleySpace {
    type Point = Word;
    type Step = Word;

    fn basepoint(&self) -> Word {
        Word::empty()
    }

    fn distance(&self, a: &Word, b: &Word) -> f64 {
        self.pres.distance(a, b) as f64
    }

    fn norm(&self, a: &Word) -> f64 {
        a.len() as f64
    }

    fn geodesic(&self, a: &Word, b: &Word) -> Option<Vec<Word>> {
        let z = self.pres.difference(a, b);
        let mut cur = a.letters().to_vec();
        let mut out = Vec::with_capacity(z.len() + 1);
        out.push(a.clone());
        for &l in z.letters() {
            self.pres.right_multiply(&mut cur, l);
            out.push(Word::from_letters(cur.clone()));
        }
        Some(out)
    }

    fn steps(&self, pts: &[Word]) -> Vec<Word> {
        pts.windows(2).map(|w| self.pres.difference(&w[0], &w[1])).collect()
    }

    fn distances_along(&self, q: &Word, pts: &[Word], steps: &[Word]) -> Vec<f64> {
        if pts.is_empty() {
            return Vec::new();
        }
        if steps.len() + 1 != pts.len() {
            return pts.iter().map(|p| self.distance(q, p)).collect();
        }
        let mut z = self.pres.difference(q, &pts[0]).into_letters();
        let mut out = Vec::with_capacity(pts.len());
        out.push(z.len() as f64);
        for st in steps {
            for &l in st.letters() {
                self.pres.right_multiply(&mut z, l);
            }
            out.push(z.len() as f64);
        }
        out
    }

    fn format_point(&self, p: &Word) -> String {
        self.pres.format_word(&self.key(p))
    }

    fn parse_point(&self, s: &str) -> Result<Word> {
        Ok(self.pres.reduce(&self.pres.parse_word(s)?))
    }
}

/// A finite connected graph with its path metric. Points are vertex indices.
#[derive(Debug, Clone)]
pub struct GraphSpace {
    graph: SimpleGraph,
    base: usize,
    dist: Vec<u32>,
}

impl GraphSpace {
    pub fn new(graph: SimpleGraph, basepoint: &str) -> Result<GraphSpace> {
        let base = graph.vertex_index(basepoint)?;
        let n = graph.vertex_count();
        let nbrs: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| graph.adjacent(i, j)).collect())
            .collect();
        let mut dist = vec![u32::MAX; n * n];
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            row[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &nbrs[u] {
                    if row[v] == u32::MAX {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if row.contains(&u32::MAX) {
                return Err(Error::InvalidGraph("graph is disconnected".into()));
            }
        }
        Ok(GraphSpace { graph, base, dist })
    }

    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    fn d(&self, a: usize, b: usize) -> u32 {
        self.dist[a * self.graph.vertex_count() + b]
    }
}

impl MetricSpace for GraphSpace {
    type Point = usize;
    type Step = ();

    fn basepoint(&self) -> usize {
        self.base
    }

    fn distance(&self, a: &usize, b: &usize) -> f64 {
        self.d(*a, *b) as f64
    }

    fn geodesic(&self, a: &usize, b: &usize) -> Option<Vec<usize>> {
        let n = self.graph.vertex_count();
        let mut out = vec![*a];
        let mut cur = *a;
        while cur != *b {
            cur = (0..n)
                .find(|&v| self.graph.adjacent(cur, v) && self.d(v, *b) + 1 == self.d(cur, *b))
                .expect("connected graph");
            out.push(cur);
        }
        Some(out)
    }

    fn steps(&self, pts: &[usize]) -> Vec<()> {
        vec![(); pts.len().saturating_sub(1)]
    }

    fn format_point(&self, p: &usize) -> String {
        self.graph.label(*p).to_string()
    }

    fn parse_point(&self, s: &str) -> Result<usize> {
        self.graph.vertex_index(s.trim())
    }
}

/// The Euclidean plane based at the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlaneSpace;

impl MetricSpace for PlaneSpace {
    type Point = (f64, f64);
    type Step = ();

    fn basepoint(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn distance(&self, a: &(f64, f64), b: &(f64, f64)) -> f64 {
        (a.0 - b.0).hypot(a.1 - b.1)
    }

    /// The straight segment, subdivided into pieces of length at most 1.
    fn geodesic(&self, a: &(f64, f64), b: &(f64, f64)) -> Option<Vec<(f64, f64)>> {
        let m = self.distance(a, b).ceil().max(1.0) as usize;
        Some(
            (0..=m)
                .map(|k| {
                    let u = k as f64 / m as f64;
                    (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1))
                })
                .collect(),
        )
    }

    fn steps(&self, pts: &[(f64, f64)]) -> Vec<()> {
        vec![(); pts.len().saturating_sub(1)]
    }

    fn format_point(&self, p: &(f64, f64)) -> String {
        format!("{};{}", p.0, p.1)
    }

    fn parse_point(&self, s: &str) -> Result<(f64, f64)> {
        let bad = || Error::InvalidArgument(format!("plane point `{s}` is not `x;y`"));
        let (x, y) = s.split_once(';').ok_or_else(bad)?;
        Ok((
            x.trim().parse().map_err(|_| bad())?,
            y.trim().parse().map_err(|_| bad())?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{edgeless_graph, ladder_graph};

    #[test]
    fn cayley_incremental_distances_match_direct() {
        let space = CayleySpace::new(Presentation::coxeter(ladder_graph(5).unwrap()).unwrap());
        let p = space.presentation();
        let pts: Vec<Word> = ["", "a1", "a1 b2", "a1 b2 a3", "a1 b2 a3 b2", "a1 a3", "b4 b5 b4"]
            .iter()
            .map(|s| space.parse_point(s).unwrap())
            .collect();
        let steps = space.steps(&pts);
        let q = p.reduce(&p.parse_word("b1 a2 b3").unwrap());
        let direct: Vec<f64> = pts.iter().map(|x| space.distance(&q, x)).collect();
        assert_eq!(space.distances_along(&q, &pts, &steps), direct);
    }

    #[test]
    fn geodesic_oracles_have_unit_steps() {
        let space = CayleySpace::new(Presentation::coxeter(edgeless_graph(3)).unwrap());
        let a = space.parse_point("s1 s2 s3").unwrap();
        let b = space.parse_point("s1 s3 s1 s2").unwrap();
        let g = space.geodesic(&a, &b).unwrap();
        assert_eq!(g.len() as f64 - 1.0, space.distance(&a, &b));
        for w in g.windows(2) {
            assert_eq!(space.distance(&w[0], &w[1]), 1.0);
        }
        let pl = PlaneSpace;
        let g = pl.geodesic(&(0.0, 0.0), &(3.0, 4.0)).unwrap();
        let total: f64 = g.windows(2).map(|w| pl.distance(&w[0], &w[1])).sum();
        assert!((total - 5.0).abs() < 1e-9);
    }

    #[test]
    fn graph_space_paths() {
        let g = ladder_graph(4).unwrap();
        let s = GraphSpace::new(g, "a1").unwrap();
        let b4 = s.parse_point("b4").unwrap();
        assert_eq!(s.norm(&b4), 3.0);
        assert_eq!(s.geodesic(&0, &b4).unwrap().len(), 4);
        assert!(GraphSpace::new(edgeless_graph(2), "s1").is_err());
    }

    #[test]
    fn plane_points_round_trip() {
        let p = PlaneSpace.parse_point("1.5;-2").unwrap();
        assert_eq!(p, (1.5, -2.0));
        assert_eq!(PlaneSpace.format_point(&p), "1.5;-2");
        assert!(PlaneSpace.parse_point("1,2").is_err());
    }
}
