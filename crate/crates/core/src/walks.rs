//! Random walks on Coxeter and Artin groups: simulation, drift, tracking of
//! the limit geodesic, and the linear-ray check along a sample path.

use std::collections::HashMap;
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coxeter::{Flavor, Letter, Presentation, Word};
use crate::error::{Error, Result};
use crate::morse::{limit_geodesic, LimitGeodesic, Trajectory};
use crate::sbe::SbeMap;
use crate::spaces::CayleySpace;
use crate::sublinear::SublinearFn;

/// Tolerance on the total mass of a step measure.
pub const MASS_TOL: f64 = 1e-12;
/// Number of index pairs sampled by [`verify_walk_ray`].
pub const RAY_PAIRS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct StepMeasure {
    support: Vec<Word>,
    probabilities: Vec<f64>,
    symmetric: bool,
}

impl StepMeasure {
    /// Validates the masses and, when `symmetric` is claimed, that every
    /// support word has its inverse in the support with the same mass.
    pub fn new(p: &Presentation, support: Vec<Word>, probabilities: Vec<f64>, symmetric: bool) -> Result<Self> {
        if support.is_empty() || support.len() != probabilities.len() {
            return Err(Error::InvalidMeasure("support and probabilities must be nonempty and of equal length".into()));
        }
        if let Some(x) = probabilities.iter().find(|&&x| !(x >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("negative or NaN probability {x}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("probabilities sum to {total}, not 1")));
        }
        let support: Vec<Word> = support.iter().map(|w| p.reduce(w)).collect();
        if symmetric {
            let mut mass: HashMap<Word, f64> = HashMap::new();
            for (w, &x) in support.iter().zip(&probabilities) {
                *mass.entry(p.normal_form_of_reduced(w)).or_default() += x;
            }
            for (w, &x) in mass.iter() {
                let inv = p.normal_form(&w.inverse(p.flavor()));
                match mass.get(&inv) {
                    Some(&y) if (x - y).abs() <= MASS_TOL => {}
                    _ => {
                        return Err(Error::InvalidMeasure(format!(
                            "measure is not symmetric at `{}`",
                            p.format_word(w)
                        )))
                    }
                }
            }
        }
        Ok(StepMeasure { support, probabilities, symmetric })
    }

    /// Uniform measure on the generators, and their inverses for Artin groups.
    pub fn uniform(p: &Presentation) -> Self {
        let alphabet = p.alphabet();
        let x = 1.0 / alphabet.len() as f64;
        let support = alphabet.into_iter().map(|l| Word::from_letters(vec![l])).collect::<Vec<_>>();
        let n = support.len();
        StepMeasure { support, probabilities: vec![x; n], symmetric: true }
    }

    /// Reads lines `word probability`; blank lines and `#` comments are
    /// skipped. The measure is marked symmetric when it passes the check.
    pub fn parse(p: &Presentation, text: &str) -> Result<Self> {
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (w, x) = line
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| Error::InvalidMeasure(format!("line {}: expected `word probability`", i + 1)))?;
            let x: f64 = x
                .parse()
                .map_err(|_| Error::InvalidMeasure(format!("line {}: bad probability `{x}`", i + 1)))?;
            support.push(p.parse_word(w)?);
            probs.push(x);
        }
        StepMeasure::new(p, support.clone(), probs.clone(), true).or_else(|_| StepMeasure::new(p, support, probs, false))
    }

    pub fn support(&self) -> &[Word] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

const ROOT: u32 = 0;

/// A sample path `w_0 = ε, w_i = w_{i-1} g_i`. The reduced words of all
/// `w_i` share a prefix trie, so distances cost a lowest-common-ancestor
/// query plus the reduction of the two diverging tails.
#[derive(Debug, Clone)]
pub struct SamplePath {
    pres: Presentation,
    seed: u64,
    increments: Vec<u32>,
    measure: StepMeasure,
    parent: Vec<u32>,
    letter: Vec<Letter>,
    depth: Vec<u32>,
    jump: Vec<u32>,
    at: Vec<u32>,
}

impl SamplePath {
    fn with_measure(pres: Presentation, measure: StepMeasure, seed: u64) -> Self {
        SamplePath {
            pres,
            seed,
            increments: Vec::new(),
            measure,
            parent: vec![ROOT],
            letter: vec![Letter::new(0, false)],
            depth: vec![0],
            jump: vec![ROOT],
            at: vec![ROOT],
        }
    }

    /// The path with the given increments, for deterministic paths such as geodesics.
    pub fn from_increments(pres: Presentation, increments: &[Word]) -> Self {
        let measure = StepMeasure::uniform(&pres);
        let mut path = SamplePath::with_measure(pres, measure.clone(), 0);
        let mut support = measure.support.clone();
        let mut cur = Vec::new();
        let mut nodes = vec![ROOT];
        let mut children = HashMap::new();
        for g in increments {
            let k = match support.iter().position(|w| w == g) {
                Some(k) => k,
                None => {
                    support.push(g.clone());
                    support.len() - 1
                }
            };
            path.step(&mut cur, &mut nodes, &mut children, g, k as u32);
        }
        path.measure.support = support;
        path
    }

    fn child(&mut self, children: &mut HashMap<(u32, Letter), u32>, v: u32, l: Letter) -> u32 {
        *children.entry((v, l)).or_insert_with(|| {
            let id = self.parent.len() as u32;
            let j = self.jump[v as usize];
            let jj = self.jump[j as usize];
            let (dv, dj, djj) = (self.depth[v as usize], self.depth[j as usize], self.depth[jj as usize]);
            self.jump.push(if dv - dj == dj - djj && v != ROOT { jj } else { v });
            self.parent.push(v);
            self.letter.push(l);
            self.depth.push(dv + 1);
            id
        })
    }

    fn step(
        &mut self,
        cur: &mut Vec<Letter>,
        nodes: &mut Vec<u32>,
        children: &mut HashMap<(u32, Letter), u32>,
        g: &Word,
        k: u32,
    ) {
        for &s in g.letters() {
            match self.pres.right_multiply_at(cur, s) {
                None => {
                    let v = self.child(children, *nodes.last().unwrap(), s);
                    nodes.push(v);
                }
                Some(j) => {
                    nodes.truncate(j + 1);
                    for i in j..cur.len() {
                        let v = self.child(children, nodes[i], cur[i]);
                        nodes.push(v);
                    }
                }
            }
        }
        self.increments.push(k);
        self.at.push(*nodes.last().unwrap());
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of steps `n`.
    pub fn steps(&self) -> usize {
        self.at.len() - 1
    }

    pub fn increment(&self, i: usize) -> &Word {
        &self.measure.support[self.increments[i - 1] as usize]
    }

    /// `‖w_i‖`.
    pub fn norm(&self, i: usize) -> usize {
        self.depth[self.at[i] as usize] as usize
    }

    fn letters_up_to(&self, mut v: u32, stop: u32) -> Vec<Letter> {
        let mut out = Vec::with_capacity((self.depth[v as usize] - self.depth[stop as usize]) as usize);
        while v != stop {
            out.push(self.letter[v as usize]);
            v = self.parent[v as usize];
        }
        out.reverse();
        out
    }

    /// The reduced word stored for `w_i`.
    pub fn reduced(&self, i: usize) -> Word {
        Word::from_letters(self.letters_up_to(self.at[i], ROOT))
    }

    /// `w_i` in normal form.
    pub fn normal_form(&self, i: usize) -> Word {
        self.pres.normal_form_of_reduced(&self.reduced(i))
    }

    fn ancestor_at(&self, mut v: u32, d: u32) -> u32 {
        while self.depth[v as usize] > d {
            let j = self.jump[v as usize];
            v = if self.depth[j as usize] >= d { j } else { self.parent[v as usize] };
        }
        v
    }

    fn lca(&self, a: u32, b: u32) -> u32 {
        let d = self.depth[a as usize].min(self.depth[b as usize]);
        let (mut a, mut b) = (self.ancestor_at(a, d), self.ancestor_at(b, d));
        while a != b {
            let (ja, jb) = (self.jump[a as usize], self.jump[b as usize]);
            if ja != jb {
                a = ja;
                b = jb;
            } else {
                a = self.parent[a as usize];
                b = self.parent[b as usize];
            }
        }
        a
    }

    /// `d(w_i, w_j)`.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.at[i], self.at[j]);
        let c = self.lca(a, b);
        let (da, db, dc) = (self.depth[a as usize], self.depth[b as usize], self.depth[c as usize]);
        if self.pres.is_free_product() && self.pres.flavor() == Flavor::Coxeter {
            return (da + db - 2 * dc) as usize;
        }
        let mut buf: Vec<Letter> = self
            .letters_up_to(a, c)
            .into_iter()
            .rev()
            .map(|l| match self.pres.flavor() {
                Flavor::Coxeter => l,
                Flavor::Artin => l.inverse(),
            })
            .collect();
        for l in self.letters_up_to(b, c) {
            self.pres.right_multiply(&mut buf, l);
        }
        buf.len()
    }

    /// The first `n` steps of the path.
    pub fn truncated(&self, n: usize) -> SamplePath {
        let n = n.min(self.steps());
        let mut out = self.clone();
        out.at.truncate(n + 1);
        out.increments.truncate(n);
        out
    }
}

impl Trajectory for SamplePath {
    fn horizon(&self) -> usize {
        self.steps()
    }

    fn word(&self, i: usize) -> Word {
        self.reduced(i)
    }

    fn distances_from(&self, q: &Word) -> Vec<f64> {
        let mut z = self.pres.difference(q, &Word::empty()).into_letters();
        let mut out = Vec::with_capacity(self.at.len());
        out.push(z.len() as f64);
        for i in 1..self.at.len() {
            for &l in self.increment(i).letters() {
                self.pres.right_multiply(&mut z, l);
            }
            out.push(z.len() as f64);
        }
        out
    }
}

/// Runs `n` steps of the walk driven by `mu` from the identity.
pub fn simulate(p: &Presentation, mu: &StepMeasure, n: usize, seed: u64) -> Result<SamplePath> {
    if n == 0 {
        return Err(Error::InvalidArgument("a walk needs at least one step".into()));
    }
    let dist = WeightedIndex::new(&mu.probabilities).map_err(|e| Error::InvalidMeasure(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut path = SamplePath::with_measure(p.clone(), mu.clone(), seed);
    path.increments.reserve(n);
    path.at.reserve(n);
    let mut cur = Vec::new();
    let mut nodes = vec![ROOT];
    let mut children = HashMap::new();
    for _ in 0..n {
        let k = dist.sample(&mut rng);
        path.step(&mut cur, &mut nodes, &mut children, &mu.support[k], k as u32);
    }
    Ok(path)
}

/// `1, 2, 4, …` up to `n`, with `n` appended if it is not a power of two.
pub fn dyadic_checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |i| i.checked_mul(2))
        .take_while(|&i| i <= n)
        .collect();
    if out.last() != Some(&n) && n > 0 {
        out.push(n);
    }
    out
}

/// Least-squares fit `y ≈ c·f(n)` through the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub coef: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> Fit {
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let coef = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rss = xs.iter().zip(ys).map(|(x, y)| (y - coef * x).powi(2)).sum();
    Fit { coef, rss }
}

#[derive(Debug, Clone)]
pub struct DriftReport {
    pub a_hat: f64,
    pub c_hat: f64,
    pub checkpoints: Vec<usize>,
    /// `d(w_n, γ)` at each checkpoint.
    pub profile: Vec<f64>,
    pub log_fit: Fit,
    pub sqrt_fit: Fit,
    pub limit: LimitGeodesic,
}

/// `d(w_i, γ)` for each index, where the points of `γ` are the prefixes of
/// the word `gamma`.
pub fn distance_to_geodesic(path: &SamplePath, gamma: &Word, indices: &[usize]) -> Vec<f64> {
    indices
        .par_iter()
        .map(|&i| {
            let mut z = path.pres.difference(&path.reduced(i), &Word::empty()).into_letters();
            let mut best = z.len();
            for &l in gamma.letters() {
                path.pres.right_multiply(&mut z, l);
                best = best.min(z.len());
            }
            best as f64
        })
        .collect()
}

/// Drift and tracking statistics at the given checkpoints. The drift is the
/// mean of `‖w_n‖/n` over the last half of the checkpoints; the tracking
/// profile is measured against the limit geodesic at the largest checkpoint.
pub fn drift_and_tracking(path: &SamplePath, checkpoints: &[usize]) -> Result<DriftReport> {
    let mut cps: Vec<usize> = checkpoints.iter().copied().filter(|&c| c > 0).collect();
    cps.sort_unstable();
    cps.dedup();
    let horizon = *cps.last().ok_or_else(|| Error::InvalidArgument("no positive checkpoints".into()))?;
    if horizon > path.steps() {
        return Err(Error::InvalidArgument(format!(
            "checkpoint {horizon} exceeds the path length {}",
            path.steps()
        )));
    }
    let tail = &cps[cps.len() / 2..];
    let a_hat = tail.iter().map(|&c| path.norm(c) as f64 / c as f64).sum::<f64>() / tail.len() as f64;
    let space = CayleySpace::new(path.pres.clone());
    let limit = limit_geodesic(&space, path, horizon)?;
    let profile = distance_to_geodesic(path, &limit.geodesic, &cps);
    let (mut lx, mut sx, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    let mut c_hat = 0.0f64;
    for (&c, &d) in cps.iter().zip(&profile) {
        if c >= 2 {
            let ln = (c as f64).ln();
            c_hat = c_hat.max(d / ln);
            lx.push(ln);
            sx.push((c as f64).sqrt());
            ys.push(d);
        }
    }
    Ok(DriftReport {
        a_hat,
        c_hat,
        checkpoints: cps,
        profile,
        log_fit: fit_through_origin(&lx, &ys),
        sqrt_fit: fit_through_origin(&sx, &ys),
        limit,
    })
}

/// The `q`-quantile of `d(w_n, γ)/ln n` over `n` in `lo..=hi`.
pub fn tracking_quantile(path: &SamplePath, gamma: &Word, lo: usize, hi: usize, q: f64) -> f64 {
    let idx: Vec<usize> = (lo.max(2)..=hi.min(path.steps())).collect();
    let mut vals: Vec<f64> = distance_to_geodesic(path, gamma, &idx)
        .into_iter()
        .zip(&idx)
        .map(|(d, &n)| d / (n as f64).ln())
        .collect();
    quantile(&mut vals, q)
}

/// Empirical quantile with the nearest-rank rule.
pub fn quantile(vals: &mut [f64], q: f64) -> f64 {
    if vals.is_empty() {
        return f64::NAN;
    }
    vals.sort_by(f64::total_cmp);
    let k = ((q * vals.len() as f64).ceil() as usize).clamp(1, vals.len());
    vals[k - 1]
}

#[derive(Debug, Clone)]
pub struct WalkRayVerdict {
    pub pairs: usize,
    pub pass_fraction: f64,
    /// The pair with the largest violation, as `(n, m, excess)`.
    pub worst_pair: Option<(usize, usize, f64)>,
    /// Largest `max(n, m)` among failing pairs.
    pub max_failing_index: Option<usize>,
    /// Least `A` satisfying the upper inequality on every sampled pair.
    pub upper_a: f64,
    /// Largest `A` satisfying the lower inequality on every sampled pair.
    pub lower_a: f64,
}

/// `κ(r) = c·ln(2 + r)` with `c = inflation·Ĉ`, the coefficient raised to
/// `1/ln 3` when needed so that `κ >= 1`.
pub fn tracking_kappa(c_hat: f64, inflation: f64) -> SublinearFn {
    let c = (inflation * c_hat).max(1.0 / 3f64.ln());
    SublinearFn::log(c, 0.0).expect("coefficient keeps κ >= 1")
}

/// Checks `A|n−m| − κ(max(n,m)) <= d(w_n, w_m) <= A|n−m| + κ(max(n,m))` on
/// seeded random pairs of distinct indices.
pub fn verify_walk_ray(path: &SamplePath, a: f64, kappa: &SublinearFn) -> Result<WalkRayVerdict> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("A must be positive, got {a}")));
    }
    let n = path.steps();
    let mut rng = ChaCha8Rng::seed_from_u64(path.seed);
    rng.set_stream(1);
    let pairs: Vec<(usize, usize)> = (0..RAY_PAIRS)
        .map(|_| {
            let i = rng.gen_range(0..=n);
            let mut j = rng.gen_range(0..n);
            if j >= i {
                j += 1;
            }
            (i.min(j), i.max(j))
        })
        .collect();
    let rows: Vec<(usize, usize, f64, f64, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let d = path.distance(i, j) as f64;
            let k = kappa.eval(j as f64);
            let gap = (j - i) as f64;
            let excess = (d - a * gap - k).max(a * gap - k - d);
            (i, j, excess, (d - k) / gap, (d + k) / gap)
        })
        .collect();
    let mut passed = 0;
    let mut worst: Option<(usize, usize, f64)> = None;
    let mut max_fail = None;
    let (mut upper_a, mut lower_a) = (f64::NEG_INFINITY, f64::INFINITY);
    for &(i, j, ex, up, lo) in &rows {
        upper_a = upper_a.max(up);
        lower_a = lower_a.min(lo);
        if ex <= 1e-9 {
            passed += 1;
        } else {
            max_fail = max_fail.max(Some(j));
        }
        if worst.map_or(ex > 0.0, |w| ex > w.2) {
            worst = Some((i, j, ex));
        }
    }
    Ok(WalkRayVerdict {
        pairs: rows.len(),
        pass_fraction: passed as f64 / rows.len() as f64,
        worst_pair: worst,
        max_failing_index: max_fail,
        upper_a,
        lower_a,
    })
}

/// The map `γ(k) ↦ w_i` with `i = round(k/A)`, defined on the prefixes of
/// `gamma` whose index stays within the path.
pub fn walk_to_sbe(
    path: &SamplePath,
    gamma: &Word,
    a: f64,
    theta: SublinearFn,
    budget: f64,
) -> Result<SbeMap<CayleySpace, CayleySpace>> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("A must be positive, got {a}")));
    }
    let space = Arc::new(CayleySpace::new(path.pres.clone()));
    let gamma = Arc::new(gamma.clone());
    let path = Arc::new(path.clone());
    let rule = move |x: &Word| {
        let k = x.len();
        if gamma.letters().get(..k) != Some(x.letters()) {
            return None;
        }
        let i = (k as f64 / a).round() as usize;
        (i <= path.steps()).then(|| path.reduced(i))
    };
    Ok(SbeMap::new(space.clone(), space, Arc::new(rule), 1.0, theta, budget))
}

/// Evenly spaced points of `gamma` (always including the basepoint) that
/// lie in the domain of [`walk_to_sbe`], and the walk points they map to.
pub fn walk_sbe_sample(path: &SamplePath, gamma: &Word, a: f64, count: usize) -> (Vec<Word>, Vec<Word>) {
    let last = (gamma.len() + 1).min(((path.steps() as f64 + 0.5) * a).floor() as usize + 1);
    let count = count.max(2).min(last);
    let mut idx: Vec<usize> = (0..count).map(|k| k * (last - 1) / (count - 1).max(1)).collect();
    idx.dedup();
    let domain: Vec<Word> = idx.iter().map(|&k| gamma.prefix(k)).collect();
    let mut walk_idx: Vec<usize> = idx.iter().map(|&k| (k as f64 / a).round() as usize).collect();
    walk_idx.dedup();
    let target = walk_idx.into_iter().filter(|&i| i <= path.steps()).map(|i| path.reduced(i)).collect();
    (domain, target)
}
