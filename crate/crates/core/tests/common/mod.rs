//! Independent word-metric oracle: elements of a right-angled Coxeter group
//! are identified by their inversion sets, computed from the geometric
//! representation rather than by rewriting words.

#![allow(dead_code)]

use std::collections::HashMap;

use coarse_lab::graphs::SimpleGraph;

pub struct RootOracle {
    rank: usize,
    /// `nc[t]`: generators other than `t` that do not commute with `t`.
    nc: Vec<Vec<usize>>,
    ids: HashMap<Vec<i64>, u32>,
}

/// A ball element: a word reaching it and its sorted inversion set.
#[derive(Clone, Debug)]
pub struct Element {
    pub word: Vec<usize>,
    pub inversions: Vec<u32>,
}

impl RootOracle {
    pub fn new(g: &SimpleGraph) -> Self {
        let rank = g.vertex_count();
        let nc = (0..rank)
            .map(|t| (0..rank).filter(|&u| u != t && !g.adjacent(t, u)).collect())
            .collect();
        RootOracle { rank, nc, ids: HashMap::new() }
    }

    /// `σ_t`: only coordinate `t` changes, to `-v_t + 2 Σ v_u` over `u` not commuting with `t`.
    fn reflect(&self, v: &mut [i64], t: usize) {
        let s: i64 = self.nc[t].iter().map(|&u| v[u]).sum();
        v[t] = -v[t] + 2 * s;
    }

    /// The root `w(α_s)`, applying the letters of `w` right to left.
    pub fn root(&self, w: &[usize], s: usize) -> Vec<i64> {
        let mut v = vec![0i64; self.rank];
        v[s] = 1;
        for &t in w.iter().rev() {
            self.reflect(&mut v, t);
        }
        v
    }

    fn id(&mut self, v: Vec<i64>) -> u32 {
        let n = self.ids.len() as u32;
        *self.ids.entry(v).or_insert(n)
    }

    /// Positive root of `w(α_s)` and whether `w(α_s)` itself was positive.
    pub fn positive_root_id(&mut self, w: &[usize], s: usize) -> (u32, bool) {
        let v = self.root(w, s);
        let pos = v.iter().all(|&x| x >= 0);
        let neg = v.iter().all(|&x| x <= 0);
        assert!(pos != neg, "root {v:?} is neither positive nor negative");
        let v = if pos { v } else { v.into_iter().map(|x| -x).collect() };
        (self.id(v), pos)
    }

    /// Inversion set of the element represented by an arbitrary word.
    pub fn inversions(&mut self, w: &[usize]) -> Vec<u32> {
        let mut set: Vec<u32> = Vec::new();
        for i in 0..w.len() {
            let (id, _) = self.positive_root_id(&w[..i], w[i]);
            match set.binary_search(&id) {
                Ok(k) => {
                    set.remove(k);
                }
                Err(k) => set.insert(k, id),
            }
        }
        set
    }

    /// Breadth-first ball, one entry per element; elements are keyed by inversion set.
    pub fn ball(&mut self, radius: usize) -> Vec<Vec<Element>> {
        let mut spheres = vec![vec![Element { word: vec![], inversions: vec![] }]];
        for _ in 0..radius {
            let mut next: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
            let mut order = Vec::new();
            for e in spheres.last().unwrap() {
                for s in 0..self.rank {
                    let (id, grows) = self.positive_root_id(&e.word, s);
                    if !grows {
                        continue;
                    }
                    let mut inv = e.inversions.clone();
                    let k = inv.binary_search(&id).expect_err("new inversion");
                    inv.insert(k, id);
                    if !next.contains_key(&inv) {
                        let mut w = e.word.clone();
                        w.push(s);
                        order.push(inv.clone());
                        next.insert(inv, w);
                    }
                }
            }
            let sphere = order
                .into_iter()
                .map(|inv| Element { word: next[&inv].clone(), inversions: inv })
                .collect();
            spheres.push(sphere);
        }
        spheres
    }
}

/// `|A Δ B|` for sorted sets.
pub fn sym_diff(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}
