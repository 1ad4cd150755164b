//! Sampled κ-Morse probes in Cayley spaces: quasi-geodesic sampling, gauge
//! estimation, limit geodesics and staircase witnesses in flats.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coxeter::{Flavor, Letter, Word};
use crate::error::{Error, Result};
use crate::rays::SampledRay;
use crate::spaces::{distance_to_set, CayleySpace, MetricSpace};
use crate::sublinear::SublinearFn;

/// Rejection-sampling budget for one quasi-geodesic.
pub const SAMPLING_TRIES: usize = 100;
/// Minimum number of sampled segments per probe cell.
pub const MIN_SAMPLES: usize = 50;
/// Multiples of the radius used as the distance `R` of the far endpoint.
pub const R_SCHEDULE: [usize; 2] = [2, 4];
/// Minimum number of radii needed before a non-Morse flag is raised.
pub const NON_MORSE_MIN_RADII: usize = 3;

/// Checks `|a-b|/q - Q <= d(p_a, p_b) <= q|a-b| + Q` for all index pairs.
pub fn is_quasi_geodesic(space: &CayleySpace, path: &[Word], q: f64, big_q: f64) -> bool {
    let steps = space.steps(path);
    (0..path.len()).into_par_iter().all(|a| {
        let row = space.distances_along(&path[a], &path[a..], &steps[a.min(steps.len())..]);
        row.iter().enumerate().all(|(k, &d)| {
            let k = k as f64;
            k / q - big_q <= d + 1e-9 && d <= q * k + big_q + 1e-9
        })
    })
}

fn back_letter(flavor: Flavor, s: Letter) -> Letter {
    match flavor {
        Flavor::Coxeter => s,
        Flavor::Artin => s.inverse(),
    }
}

/// A unit-step path from `start` to `end`: a geodesic with seeded out-and-back
/// excursions of height at most `⌊qQ/2⌋`, checked post hoc and resampled
/// until it is a `(q, Q)`-quasi-geodesic.
pub fn sample_quasigeodesic(space: &CayleySpace, start: &Word, end: &Word, q: f64, big_q: f64, seed: u64) -> Result<Vec<Word>> {
    if !(q >= 1.0) || !(big_q >= 0.0) {
        return Err(Error::InvalidArgument(format!("need q >= 1 and Q >= 0, got q = {q}, Q = {big_q}")));
    }
    let p = space.presentation();
    let z = p.difference(start, end);
    let hmax = (q * big_q / 2.0).floor() as usize;
    if hmax == 0 || z.is_empty() {
        return Ok(space.geodesic(start, end).expect("Cayley spaces have geodesics"));
    }
    // a gap between excursions long enough for the lower bound to recover
    let gap = if q > 1.0 { (2.0 * hmax as f64 / (q - 1.0)).ceil() as usize + 1 } else { usize::MAX };
    let alphabet = p.alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..SAMPLING_TRIES {
        let density = 0.5f64.powi((attempt / 10) as i32);
        let mut path = vec![start.clone()];
        let mut cur = start.letters().to_vec();
        let mut since = gap;
        let single = rng.gen_range(0..=z.len());
        for i in 0..=z.len() {
            let room = since >= gap && (gap != usize::MAX || i == single);
            if room && rng.gen_bool(density.min(1.0) * if gap == usize::MAX { 1.0 } else { 0.5 }) {
                let h = rng.gen_range(1..=hmax);
                let prev = (i > 0).then(|| back_letter(p.flavor(), z.letters()[i - 1]));
                let next = z.letters().get(i).copied();
                let mut exc: Vec<Letter> = Vec::with_capacity(h);
                for k in 0..h {
                    let last = exc.last().map(|&s| back_letter(p.flavor(), s));
                    let opts: Vec<Letter> = alphabet
                        .iter()
                        .copied()
                        .filter(|&s| if k == 0 { Some(s) != prev && Some(s) != next } else { Some(s) != last })
                        .collect();
                    let Some(&s) = opts.choose(&mut rng) else { break };
                    exc.push(s);
                }
                for &s in exc.iter() {
                    p.right_multiply(&mut cur, s);
                    path.push(Word::from_letters(cur.clone()));
                }
                for &s in exc.iter().rev() {
                    p.right_multiply(&mut cur, back_letter(p.flavor(), s));
                    path.push(Word::from_letters(cur.clone()));
                }
                since = 0;
            }
            if let Some(&s) = z.letters().get(i) {
                p.right_multiply(&mut cur, s);
                path.push(Word::from_letters(cur.clone()));
                since = since.saturating_add(1);
            }
        }
        if is_quasi_geodesic(space, &path, q, big_q) {
            return Ok(path);
        }
    }
    Err(Error::SamplingBudgetExhausted(SAMPLING_TRIES))
}

/// Generator subsets used for staircase reorderings: the links of the
/// generators (everything commuting with a given generator), deduplicated.
pub fn staircase_subsets(space: &CayleySpace) -> Vec<Vec<bool>> {
    let p = space.presentation();
    let n = p.rank();
    let mut seen = BTreeSet::new();
    for s in 0..n {
        let link: Vec<bool> = (0..n).map(|t| p.commutes(s, t)).collect();
        if link.iter().any(|&b| b) {
            seen.insert(link);
        }
    }
    seen.into_iter().collect()
}

/// The geodesic from `start` along the reordered word of `start^-1 end`.
fn staircase_path(space: &CayleySpace, start: &Word, end: &Word, subset: &[bool]) -> Vec<Word> {
    let p = space.presentation();
    let z = p.pull_forward(&p.difference(start, end), subset);
    let mut cur = start.letters().to_vec();
    let mut out = vec![start.clone()];
    for &s in z.letters() {
        p.right_multiply(&mut cur, s);
        out.push(Word::from_letters(cur.clone()));
    }
    out
}

fn max_deviation(space: &CayleySpace, pts: &[Word], z: &[Word], z_steps: &[Word]) -> (f64, usize) {
    pts.iter()
        .enumerate()
        .map(|(i, x)| (distance_to_set(space, x, z, z_steps), i))
        .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
}

#[derive(Debug, Clone)]
pub struct ProbeCell {
    pub q: f64,
    pub big_q: f64,
    pub r: usize,
    pub samples: usize,
    pub sampling_failures: usize,
    /// Largest `d(x, Z)/κ(‖x‖)` seen in this cell alone.
    pub raw_gauge: f64,
    /// `raw_gauge` maximized over all cells with smaller `(q, Q)` at the same radius.
    pub gauge: f64,
    /// Largest `d(x, Z)` seen.
    pub max_deviation: f64,
    /// The part inside the `r`-ball of the segment realizing `raw_gauge`.
    pub witness: Vec<Word>,
}

#[derive(Debug, Clone)]
pub struct MorseProbeReport {
    pub kappa: SublinearFn,
    pub radii: Vec<usize>,
    pub r_schedule: Vec<usize>,
    pub cells: Vec<ProbeCell>,
    pub non_morse: bool,
}

impl MorseProbeReport {
    pub fn cell(&self, q: f64, big_q: f64, r: usize) -> Option<&ProbeCell> {
        self.cells.iter().find(|c| c.q == q && c.big_q == big_q && c.r == r)
    }
}

/// Estimates the κ-Morse gauge of `z` from sampled quasi-geodesics that start
/// at the basepoint and end within `ln(2 + R)` of `Z(R)`, `R = 2r, 4r`.
/// Only the part of each segment inside the ball of radius `r` is measured.
/// Staircase reorderings of `Z` (geodesics, hence valid in every cell) are
/// added to the samples.
#[allow(clippy::too_many_arguments)]
pub fn morse_gauge_probe(
    space: &CayleySpace,
    z: &SampledRay<Word>,
    kappa: &SublinearFn,
    q_grid: &[f64],
    big_q_grid: &[f64],
    radii: &[usize],
    samples: usize,
    seed: u64,
) -> Result<MorseProbeReport> {
    let samples = samples.max(MIN_SAMPLES);
    let rmax = *radii.iter().max().ok_or_else(|| Error::InvalidArgument("no radii".into()))?;
    let far = R_SCHEDULE.iter().max().unwrap() * rmax;
    if (z.len() as f64) <= far as f64 || z.points().last().map(|w| w.len()).unwrap_or(0) < far {
        return Err(Error::InsufficientSamples(format!("Z must reach norm {far}")));
    }
    let z_pts = z.points();
    let z_steps = space.steps(z_pts);
    let at_norm = |r: usize| z_pts.iter().find(|w| w.len() >= r).expect("Z reaches the norm");
    let p = space.presentation();
    let alphabet = p.alphabet();
    let subsets = staircase_subsets(space);

    let mut specs = Vec::new();
    for (qi, &q) in q_grid.iter().enumerate() {
        for (bi, &bq) in big_q_grid.iter().enumerate() {
            for (ri, &r) in radii.iter().enumerate() {
                specs.push((qi, bi, ri, q, bq, r));
            }
        }
    }
    let mut cells: Vec<ProbeCell> = specs
        .par_iter()
        .enumerate()
        .map(|(ci, &(_, _, _, q, bq, r))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let mut best = (0.0f64, Vec::new());
            let mut max_dev = 0.0f64;
            let mut failures = 0;
            let mut measure = |seg: &[Word]| {
                let inner: Vec<Word> = seg.iter().filter(|w| w.len() <= r).cloned().collect();
                let mut g = 0.0f64;
                for x in &inner {
                    let d = distance_to_set(space, x, z_pts, &z_steps);
                    max_dev = max_dev.max(d);
                    g = g.max(d / kappa.eval(x.len() as f64));
                }
                if g > best.0 || best.1.is_empty() {
                    best = (g, inner);
                }
            };
            for s in 0..samples {
                let big_r = R_SCHEDULE[s % R_SCHEDULE.len()] * r;
                let mut y = at_norm(big_r).letters().to_vec();
                let wobble = rng.gen_range(0..=(2.0 + big_r as f64).ln().floor() as usize);
                for _ in 0..wobble {
                    p.right_multiply(&mut y, *alphabet.choose(&mut rng).expect("nonempty alphabet"));
                }
                match sample_quasigeodesic(space, &Word::empty(), &Word::from_letters(y), q, bq, rng.gen()) {
                    Ok(seg) => measure(&seg),
                    Err(_) => failures += 1,
                }
            }
            for sub in &subsets {
                for &m in &R_SCHEDULE {
                    measure(&staircase_path(space, &Word::empty(), at_norm(m * r), sub));
                }
            }
            ProbeCell {
                q,
                big_q: bq,
                r,
                samples,
                sampling_failures: failures,
                raw_gauge: best.0,
                gauge: best.0,
                max_deviation: max_dev,
                witness: best.1,
            }
        })
        .collect();
    // a (q', Q')-quasi-geodesic is a (q, Q)-one whenever q' <= q and Q' <= Q
    for i in 0..cells.len() {
        let (q, bq, r) = (cells[i].q, cells[i].big_q, cells[i].r);
        cells[i].gauge = cells
            .iter()
            .filter(|c| c.r == r && c.q <= q && c.big_q <= bq)
            .map(|c| c.raw_gauge)
            .fold(0.0, f64::max);
    }
    let non_morse = radii.len() >= NON_MORSE_MIN_RADII
        && specs.iter().any(|&(_, _, _, q, bq, _)| {
            radii.iter().all(|&r| {
                cells
                    .iter()
                    .find(|c| c.q == q && c.big_q == bq && c.r == r)
                    .is_some_and(|c| c.max_deviation >= r as f64 / 4.0)
            })
        });
    Ok(MorseProbeReport {
        kappa: kappa.clone(),
        radii: radii.to_vec(),
        r_schedule: R_SCHEDULE.to_vec(),
        cells,
        non_morse,
    })
}

/// Exhaustive bound on how far a unit-step `(q, Q)`-quasi-geodesic can leave
/// a geodesic in a tree: every excursion returns through its exit point, so
/// it is a closed walk of length at most `qQ` off the geodesic. Returns the
/// largest depth reached by a closed walk from the identity, of length at
/// most `⌊qQ⌋`, whose first letter avoids the geodesic's two directions and
/// which satisfies the `(q, Q)` inequality on all of its index pairs.
pub fn certify_tree_gauge(space: &CayleySpace, q: f64, big_q: f64) -> Result<usize> {
    let p = space.presentation();
    if !p.is_free_product() || p.flavor() != Flavor::Coxeter || p.rank() < 3 {
        return Err(Error::InvalidArgument("certification needs a free product of at least 3 involutions".into()));
    }
    let max_len = (q * big_q).floor() as usize;
    // geodesic directions at the exit point are letters 0 and 1; excursions start with another letter
    let mut best = 0;
    let mut walk: Vec<Word> = vec![Word::empty()];
    fn go(space: &CayleySpace, walk: &mut Vec<Word>, max_len: usize, q: f64, big_q: f64, best: &mut usize) {
        let cur = walk.last().unwrap().clone();
        if walk.len() > 1 && cur.is_empty() {
            if is_quasi_geodesic(space, walk, q, big_q) {
                *best = (*best).max(walk.iter().map(|w| w.len()).max().unwrap());
            }
            return;
        }
        if walk.len() > max_len || cur.len() > max_len + 1 - walk.len() {
            return;
        }
        let p = space.presentation();
        for g in 0..p.rank() {
            if walk.len() == 1 && g < 2 {
                continue;
            }
            let s = Letter::new(g, false);
            let mut next = cur.letters().to_vec();
            p.right_multiply(&mut next, s);
            walk.push(Word::from_letters(next));
            go(space, walk, max_len, q, big_q, best);
            walk.pop();
        }
    }
    go(space, &mut walk, max_len, q, big_q, &mut best);
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub path: Vec<Word>,
    pub deviation: f64,
    pub radius: usize,
    /// Index on `Z` of the segment's starting point.
    pub start: usize,
    pub subset: Vec<bool>,
}

impl Witness {
    /// Recomputes the deviation from `Z` and the geodesic property from scratch.
    pub fn reverify(&self, space: &CayleySpace, z: &SampledRay<Word>) -> bool {
        let steps = space.steps(z.points());
        let (dev, _) = max_deviation(space, &self.path, z.points(), &steps);
        let ends = space.distance(&self.path[0], self.path.last().unwrap());
        dev == self.deviation
            && dev >= self.radius as f64 / 4.0
            && ends as usize + 1 == self.path.len()
            && is_quasi_geodesic(space, &self.path, 1.0, 0.0)
    }
}

/// Searches staircase reorderings of segments of `Z` of length `2·radius`
/// for a geodesic that strays at least `radius/4` from `Z`. `Z` must be a
/// unit-speed sampled geodesic. At most `budget` (segment, subset) pairs are tried.
pub fn non_morse_witness(space: &CayleySpace, z: &SampledRay<Word>, radius: usize, budget: usize) -> Option<Witness> {
    let subsets = staircase_subsets(space);
    let zp = z.points();
    let steps = space.steps(zp);
    let mut tries = 0;
    let mut start = 0;
    while start + 2 * radius < zp.len() {
        for sub in &subsets {
            if tries >= budget {
                return None;
            }
            tries += 1;
            let path = staircase_path(space, &zp[start], &zp[start + 2 * radius], sub);
            let (dev, _) = max_deviation(space, &path, zp, &steps);
            if dev >= radius as f64 / 4.0 {
                let w = Witness { path, deviation: dev, radius, start, subset: sub.clone() };
                if w.reverify(space, z) {
                    return Some(w);
                }
            }
        }
        start += radius;
    }
    None
}

/// A trajectory of group elements indexed by `0..=horizon`.
pub trait Trajectory {
    fn horizon(&self) -> usize;
    fn word(&self, i: usize) -> Word;
    /// `d(q, w_i)` for `i` in `0..=horizon`.
    fn distances_from(&self, q: &Word) -> Vec<f64>;
}

/// A sampled ray read as a trajectory through its sample indices.
pub struct RayTrajectory<'a> {
    pub space: &'a CayleySpace,
    pub ray: &'a SampledRay<Word>,
    steps: Vec<Word>,
}

impl<'a> RayTrajectory<'a> {
    pub fn new(space: &'a CayleySpace, ray: &'a SampledRay<Word>) -> Self {
        RayTrajectory { space, ray, steps: space.steps(ray.points()) }
    }
}

impl Trajectory for RayTrajectory<'_> {
    fn horizon(&self) -> usize {
        self.ray.len() - 1
    }

    fn word(&self, i: usize) -> Word {
        self.ray.points()[i].clone()
    }

    fn distances_from(&self, q: &Word) -> Vec<f64> {
        self.space.distances_along(q, self.ray.points(), &self.steps)
    }
}

#[derive(Debug, Clone)]
pub struct LimitGeodesic {
    /// The geodesic as one normal-form word; its prefixes are the points.
    pub geodesic: Word,
    /// Letters fixed while at least two candidate words remained.
    pub stable_prefix: usize,
    /// Least `n` with `d(γ(k), α) <= n·ln(2 + k)` over radii `k = 2^j`.
    pub tracking_n: f64,
    pub indices: Vec<usize>,
}

/// Extracts a geodesic from normal forms of `w_i` at `i = 2^k <= horizon` and
/// at the horizon. The common prefix is grown one letter at a time, taking
/// the letter continuing the largest number of remaining words (ties go to
/// the later word) and discarding the others, until one word is left; the
/// geodesic runs along that word.
pub fn limit_geodesic<T: Trajectory>(space: &CayleySpace, alpha: &T, horizon: usize) -> Result<LimitGeodesic> {
    let horizon = horizon.min(alpha.horizon());
    let mut indices: Vec<usize> = std::iter::successors(Some(1usize), |i| i.checked_mul(2))
        .take_while(|&i| i <= horizon)
        .collect();
    if indices.last() != Some(&horizon) {
        indices.push(horizon);
    }
    let p = space.presentation();
    let words: Vec<Word> = indices.iter().map(|&i| p.normal_form_of_reduced(&alpha.word(i))).collect();
    let mut alive: Vec<usize> = (0..words.len()).collect();
    let mut prefix = 0usize;
    while alive.len() > 1 {
        alive.retain(|&k| words[k].len() > prefix);
        if alive.len() <= 1 {
            break;
        }
        let mut counts: Vec<(Letter, usize, usize)> = Vec::new();
        for &k in &alive {
            let l = words[k].letters()[prefix];
            match counts.iter_mut().find(|c| c.0 == l) {
                Some(c) => {
                    c.1 += 1;
                    c.2 = c.2.max(k);
                }
                None => counts.push((l, 1, k)),
            }
        }
        let &(l, _, _) = counts.iter().max_by_key(|c| (c.1, c.2)).expect("nonempty");
        alive.retain(|&k| words[k].letters()[prefix] == l);
        prefix += 1;
    }
    if prefix <= 1 {
        return Err(Error::NoStablePrefix(prefix));
    }
    let chosen = alive.first().copied().unwrap_or(words.len() - 1);
    let gamma = &words[chosen];
    let mut tracking_n = 0.0f64;
    let mut k = 1usize;
    while k <= gamma.len() {
        let d = alpha
            .distances_from(&gamma.prefix(k))
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        tracking_n = tracking_n.max(d / (2.0 + k as f64).ln());
        k *= 2;
    }
    Ok(LimitGeodesic { geodesic: gamma.clone(), stable_prefix: prefix, tracking_n, indices })
}
