//! Word metric on right-angled Coxeter and Artin groups.
//!
//! Words are reduced by right multiplication: appending `s` to a reduced word
//! either cancels the last occurrence of `s` (of `s^-1` for Artin groups)
//! that can be shuffled to the end, or extends the word by one letter.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::graphs::SimpleGraph;

/// Guard on the number of elements a ball enumeration may hold.
pub const BALL_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Coxeter,
    Artin,
}

/// A generator with a sign, packed as `gen << 1 | inverse`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u16);

impl Letter {
    #[inline]
    pub fn new(gen: usize, inverse: bool) -> Letter {
        Letter(((gen as u16) << 1) | inverse as u16)
    }

    #[inline]
    pub fn gen(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k.min(self.0.len())].to_vec())
    }

    /// Formal inverse: letters reversed and inverted. For Coxeter words the
    /// inversion is a no-op on the sign, which is kept positive.
    pub fn inverse(&self, flavor: Flavor) -> Word {
        Word(
            self.0
                .iter()
                .rev()
                .map(|&l| match flavor {
                    Flavor::Coxeter => l,
                    Flavor::Artin => l.inverse(),
                })
                .collect(),
        )
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn power(&self, k: usize) -> Word {
        Word(self.0.repeat(k))
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone)]
pub struct Presentation {
    graph: SimpleGraph,
    flavor: Flavor,
    /// `commute[i * n + j]` iff `i != j` and `i ~ j` in the defining graph.
    commute: Vec<bool>,
    /// Generators not commuting with `i`, including `i` itself.
    blockers: Vec<Vec<usize>>,
}

impl Presentation {
    pub fn new(graph: SimpleGraph, flavor: Flavor) -> Result<Presentation> {
        let n = graph.vertex_count();
        if n == 0 {
            return Err(Error::InvalidGraph("no generators".into()));
        }
        if n > (u16::MAX as usize >> 1) {
            return Err(Error::InvalidGraph(format!("too many generators: {n}")));
        }
        let mut commute = vec![false; n * n];
        let mut blockers = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                let c = i != j && graph.adjacent(i, j);
                commute[i * n + j] = c;
                if !c {
                    blockers[i].push(j);
                }
            }
        }
        Ok(Presentation { graph, flavor, commute, blockers })
    }

    pub fn coxeter(graph: SimpleGraph) -> Result<Presentation> {
        Self::new(graph, Flavor::Coxeter)
    }

    pub fn artin(graph: SimpleGraph) -> Result<Presentation> {
        Self::new(graph, Flavor::Artin)
    }

    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn rank(&self) -> usize {
        self.graph.vertex_count()
    }

    /// The group has no commuting pairs, so reduced words are unique.
    pub fn is_free_product(&self) -> bool {
        self.graph.edge_count() == 0
    }

    #[inline]
    pub fn commutes(&self, i: usize, j: usize) -> bool {
        self.commute[i * self.rank() + j]
    }

    /// All letters usable as single steps: generators, plus inverses for Artin groups.
    pub fn alphabet(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for g in 0..self.rank() {
            out.push(Letter::new(g, false));
            if self.flavor == Flavor::Artin {
                out.push(Letter::new(g, true));
            }
        }
        out
    }

    pub fn letter(&self, token: &str) -> Result<Letter> {
        let (name, inv) = match token.strip_suffix("^-1") {
            Some(base) => (base, true),
            None => (token, false),
        };
        let g = self
            .graph
            .vertex_index(name)
            .map_err(|_| Error::UnknownGenerator(name.to_string()))?;
        if inv && self.flavor == Flavor::Coxeter {
            return Err(Error::InverseInCoxeterWord(token.to_string()));
        }
        Ok(Letter::new(g, inv))
    }

    /// Parses whitespace-separated generator labels; `s^-1` for Artin inverses.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.split_whitespace().map(|t| self.letter(t)).collect()
    }

    pub fn format_letter(&self, l: Letter) -> String {
        if l.is_inverse() {
            format!("{}^-1", self.graph.label(l.gen()))
        } else {
            self.graph.label(l.gen()).to_string()
        }
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.letters().iter().map(|&l| self.format_letter(l)).collect::<Vec<_>>().join(" ")
    }

    #[inline]
    fn cancels(&self, x: Letter, s: Letter) -> bool {
        match self.flavor {
            Flavor::Coxeter => true,
            Flavor::Artin => x.is_inverse() != s.is_inverse(),
        }
    }

    /// Right-multiplies the reduced word held in `stack` by `s`, keeping it reduced.
    /// Returns `true` when the length grew.
    #[inline]
    pub fn right_multiply(&self, stack: &mut Vec<Letter>, s: Letter) -> bool {
        self.right_multiply_at(stack, s).is_none()
    }

    /// Like [`right_multiply`](Self::right_multiply), returning the index of
    /// the cancelled letter, or `None` when `s` was appended.
    #[inline]
    pub fn right_multiply_at(&self, stack: &mut Vec<Letter>, s: Letter) -> Option<usize> {
        let g = s.gen();
        for j in (0..stack.len()).rev() {
            let x = stack[j];
            if x.gen() == g {
                if self.cancels(x, s) {
                    stack.remove(j);
                    return Some(j);
                }
                break;
            }
            if !self.commutes(x.gen(), g) {
                break;
            }
        }
        stack.push(s);
        None
    }

    pub fn reduce(&self, w: &Word) -> Word {
        let mut stack = Vec::with_capacity(w.len());
        for &l in w.letters() {
            self.right_multiply(&mut stack, l);
        }
        Word(stack)
    }

    pub fn norm(&self, w: &Word) -> usize {
        self.reduce(w).len()
    }

    pub fn is_reduced(&self, w: &Word) -> bool {
        self.norm(w) == w.len()
    }

    /// Product `u·v` of reduced words, reduced.
    pub fn multiply(&self, u: &Word, v: &Word) -> Word {
        let mut stack = u.0.clone();
        for &l in v.letters() {
            self.right_multiply(&mut stack, l);
        }
        Word(stack)
    }

    /// Lexicographically least reduced word for the element: the greedy
    /// least-available-letter linear extension of the word's dependency order.
    pub fn normal_form(&self, w: &Word) -> Word {
        let r = self.reduce(w);
        self.normal_form_of_reduced(&r)
    }

    /// As [`normal_form`](Self::normal_form), skipping the reduction step.
    pub fn normal_form_of_reduced(&self, r: &Word) -> Word {
        self.linear_extension(r, |_, l| l)
    }

    /// Reorders a reduced word by commutations so that letters whose
    /// generator is in `subset` come as early as the word allows.
    pub fn pull_forward(&self, r: &Word, subset: &[bool]) -> Word {
        self.linear_extension(r, |_, l| !subset[l.gen()])
    }

    /// Least linear extension of the dependency order of the reduced word
    /// `r` under the key `(key(i, letter), i)`, built greedily.
    pub fn linear_extension<K: Ord>(&self, r: &Word, key: impl Fn(usize, Letter) -> K) -> Word {
        let len = r.len();
        if len <= 1 {
            return r.clone();
        }
        let n = self.rank();
        // successor edges: from i to the next occurrence of each blocking generator
        let mut next = vec![usize::MAX; n];
        let mut succ: Vec<Vec<u32>> = vec![Vec::new(); len];
        let mut indeg = vec![0u32; len];
        for i in (0..len).rev() {
            let g = r.0[i].gen();
            for &t in &self.blockers[g] {
                let j = next[t];
                if j != usize::MAX {
                    succ[i].push(j as u32);
                    indeg[j] += 1;
                }
            }
            next[g] = i;
        }
        let mut heap: BinaryHeap<Reverse<(K, usize)>> = (0..len)
            .filter(|&i| indeg[i] == 0)
            .map(|i| Reverse((key(i, r.0[i]), i)))
            .collect();
        let mut out = Vec::with_capacity(len);
        while let Some(Reverse((_, i))) = heap.pop() {
            out.push(r.0[i]);
            for &j in &succ[i] {
                let j = j as usize;
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    heap.push(Reverse((key(j, r.0[j]), j)));
                }
            }
        }
        Word(out)
    }

    /// Word-metric distance between the elements represented by `u` and `v`.
    pub fn distance(&self, u: &Word, v: &Word) -> usize {
        let mut buf = Vec::new();
        self.distance_with(u, v, &mut buf)
    }

    /// [`distance`](Self::distance) with a caller-provided scratch buffer.
    /// Both words are assumed reduced.
    pub fn distance_with(&self, u: &Word, v: &Word, buf: &mut Vec<Letter>) -> usize {
        let k = u
            .0
            .iter()
            .zip(&v.0)
            .take_while(|(a, b)| a == b)
            .count();
        buf.clear();
        if self.is_free_product() && self.flavor == Flavor::Coxeter {
            // reduced words are unique and diverge right after the common prefix
            return u.len() + v.len() - 2 * k;
        }
        buf.extend(u.0[k..].iter().rev().map(|&l| match self.flavor {
            Flavor::Coxeter => l,
            Flavor::Artin => l.inverse(),
        }));
        for &l in &v.0[k..] {
            self.right_multiply(buf, l);
        }
        buf.len()
    }

    /// Reduced form of `u^-1 v` for reduced `u`, `v`.
    pub fn difference(&self, u: &Word, v: &Word) -> Word {
        let k = u.0.iter().zip(&v.0).take_while(|(a, b)| a == b).count();
        let mut buf: Vec<Letter> = u.0[k..]
            .iter()
            .rev()
            .map(|&l| match self.flavor {
                Flavor::Coxeter => l,
                Flavor::Artin => l.inverse(),
            })
            .collect();
        for &l in &v.0[k..] {
            self.right_multiply(&mut buf, l);
        }
        Word(buf)
    }

    /// Exact ball of the given radius by breadth-first search, deduplicated
    /// by normal form.
    pub fn ball(&self, radius: usize) -> Result<Ball> {
        self.ball_with_budget(radius, BALL_BUDGET)
    }

    pub fn ball_with_budget(&self, radius: usize, budget: usize) -> Result<Ball> {
        let alphabet = self.alphabet();
        let mut elements = vec![Word::empty()];
        let mut spheres = vec![1usize];
        let mut seen: HashSet<Word> = HashSet::new();
        seen.insert(Word::empty());
        let mut layer_start = 0;
        for _ in 1..=radius {
            let layer_end = elements.len();
            let mut stack = Vec::new();
            for idx in layer_start..layer_end {
                for &s in &alphabet {
                    stack.clear();
                    stack.extend_from_slice(elements[idx].letters());
                    if !self.right_multiply(&mut stack, s) {
                        continue;
                    }
                    let nf = self.normal_form_of_reduced(&Word(std::mem::take(&mut stack)));
                    if seen.insert(nf.clone()) {
                        elements.push(nf);
                        if elements.len() > budget {
                            return Err(Error::BallBudgetExceeded { radius, budget });
                        }
                    }
                }
            }
            spheres.push(elements.len() - layer_end);
            layer_start = layer_end;
        }
        Ok(Ball { elements, spheres })
    }
}

/// A ball listed in breadth-first order; `spheres[k]` counts elements at distance `k`.
#[derive(Debug, Clone)]
pub struct Ball {
    pub elements: Vec<Word>,
    pub spheres: Vec<usize>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn radius(&self) -> usize {
        self.spheres.len() - 1
    }

    /// BFS layer of each element, aligned with `elements`.
    pub fn layers(&self) -> Vec<usize> {
        self.spheres
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| std::iter::repeat(k).take(c))
            .collect()
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ball radius={} size={} spheres=", self.radius(), self.len())?;
        let s: Vec<String> = self.spheres.iter().map(|c| c.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

/// Checks on `c_i = a_i b_i` in the ladder Coxeter group.
#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub n: usize,
    /// `(i, reduce([c_i, c_{i+1}]) == ε)`, 1-based.
    pub consecutive: Vec<(usize, bool)>,
    /// `(i, j, reduce([c_i, c_j]) != ε)` for `j - i >= 2`.
    pub distant: Vec<(usize, usize, bool)>,
    /// `(k, |c_1^k|)`.
    pub powers: Vec<(usize, usize)>,
}

impl EmbeddingReport {
    pub fn ok(&self) -> bool {
        self.consecutive.iter().all(|c| c.1)
            && self.distant.iter().all(|c| c.2)
            && self.powers.iter().all(|&(k, l)| l == 2 * k)
    }
}

pub fn ladder_c(p: &Presentation, i: usize) -> Result<Word> {
    p.parse_word(&format!("a{i} b{i}"))
}

/// Commutator `x^-1 y^-1 x y`.
pub fn commutator(p: &Presentation, x: &Word, y: &Word) -> Word {
    let f = p.flavor();
    p.reduce(&x.inverse(f).concat(&y.inverse(f)).concat(x).concat(y))
}

pub fn check_embedding(n: usize, k_max: usize) -> Result<EmbeddingReport> {
    if n < 3 {
        return Err(Error::LadderTooSmall(n));
    }
    let p = Presentation::coxeter(crate::graphs::ladder_graph(n)?)?;
    let c: Vec<Word> = (1..=n).map(|i| ladder_c(&p, i)).collect::<Result<_>>()?;
    let mut consecutive = Vec::new();
    let mut distant = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let trivial = commutator(&p, &c[i], &c[j]).is_empty();
            if j == i + 1 {
                consecutive.push((i + 1, trivial));
            } else {
                distant.push((i + 1, j + 1, !trivial));
            }
        }
    }
    let powers = (1..=k_max).map(|k| (k, p.norm(&c[0].power(k)))).collect();
    Ok(EmbeddingReport { n, consecutive, distant, powers })
}
