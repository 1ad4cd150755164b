//! Sampled rays and the (L, θ)-ray machinery: verification, continuous
//! completion, closeness constants, and the `~` relation.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coxeter::{Flavor, Letter, Word};
use crate::error::{Error, Result};
use crate::spaces::{distance_to_set, CayleySpace, MetricSpace, PlaneSpace};
use crate::sublinear::SublinearFn;

/// Relative slack when comparing a fitted scale to 1.
pub const SCALE_TOL: f64 = 1e-9;
/// Median slope at or below which a direction of `~` is considered to hold.
pub const SLOPE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledRay<P> {
    times: Vec<f64>,
    points: Vec<P>,
}

impl<P: Clone + PartialEq + std::fmt::Debug> SampledRay<P> {
    pub fn new<S: MetricSpace<Point = P>>(space: &S, times: Vec<f64>, points: Vec<P>) -> Result<Self> {
        if times.len() != points.len() {
            return Err(Error::InvalidRay("times and points differ in length".into()));
        }
        if times.is_empty() {
            return Err(Error::InvalidRay("no samples".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidRay(format!("first time is {}, not 0", times[0])));
        }
        if space.distance(&points[0], &space.basepoint()) != 0.0 {
            return Err(Error::InvalidRay("ray does not start at the basepoint".into()));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidRay(format!("times not increasing at {}", w[1])));
        }
        Ok(SampledRay { times, points })
    }

    /// Samples at times `0, 1, 2, ...`.
    pub fn at_integers<S: MetricSpace<Point = P>>(space: &S, points: Vec<P>) -> Result<Self> {
        let times = (0..points.len()).map(|i| i as f64).collect();
        Self::new(space, times, points)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty ray")
    }

    /// Index of the last sample with time `<= t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    pub fn point_at(&self, t: f64) -> &P {
        &self.points[self.index_at(t)]
    }

    /// Samples with time `<= t_max`.
    pub fn truncated(&self, t_max: f64) -> Self {
        let k = self.index_at(t_max) + 1;
        SampledRay {
            times: self.times[..k].to_vec(),
            points: self.points[..k].to_vec(),
        }
    }

    pub fn map_points<Q>(&self, f: impl Fn(&P) -> Q) -> SampledRay<Q> {
        SampledRay {
            times: self.times.clone(),
            points: self.points.iter().map(f).collect(),
        }
    }

    /// Builds without the basepoint check; for images under maps whose
    /// basepoint convention differs.
    pub(crate) fn from_parts_unchecked(times: Vec<f64>, points: Vec<P>) -> Self {
        SampledRay { times, points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `d > L|s-t| + θ`
    Upper,
    /// `d < |s-t|/L - θ`
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayVerdict {
    pub ok: bool,
    /// Sample times `(s, t)` realizing the fitted scale; `None` when no
    /// pair violates the unscaled inequality at all.
    pub worst_pair: Option<(f64, f64)>,
    pub worst_side: Option<Side>,
    /// Least `n` making the samples an `(L, n·θ)`-ray.
    pub fitted_scale: f64,
}

#[derive(Debug, Clone, Copy)]
struct Worst {
    scale: f64,
    pair: (usize, usize),
    side: Option<Side>,
}

impl Worst {
    const NONE: Worst = Worst { scale: 0.0, pair: (usize::MAX, usize::MAX), side: None };

    fn better(self, other: Worst) -> Worst {
        if other.scale > self.scale || (other.scale == self.scale && other.pair < self.pair) {
            other
        } else {
            self
        }
    }
}

/// Checks `|s-t|/L - θ(max) <= d(γs, γt) <= L|s-t| + θ(max)` over all sampled pairs.
///
/// The fitted scale is computed in closed form as the largest ratio of the
/// excess over either side to `θ(max(s, t))`.
pub fn verify_ray<S: MetricSpace>(space: &S, ray: &SampledRay<S::Point>, l: f64, theta: &SublinearFn) -> Result<RayVerdict> {
    if ray.len() < 2 {
        return Err(Error::InsufficientSamples("a ray check needs at least 2 samples".into()));
    }
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("L must be positive, got {l}")));
    }
    let pts = ray.points();
    let times = ray.times();
    let steps = space.steps(pts);
    let th: Vec<f64> = times.iter().map(|&t| theta.eval(t)).collect();
    let worst = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let row = space.distances_along(&pts[i], &pts[i..], &steps[i.min(steps.len())..]);
            let mut w = Worst::NONE;
            for (k, &d) in row.iter().enumerate().skip(1) {
                let j = i + k;
                let dt = times[j] - times[i];
                let up = d - l * dt;
                let lo = dt / l - d;
                let (ex, side) = if up >= lo { (up, Side::Upper) } else { (lo, Side::Lower) };
                if ex > 0.0 {
                    w = w.better(Worst { scale: ex / th[j], pair: (i, j), side: Some(side) });
                }
            }
            w
        })
        .reduce(|| Worst::NONE, Worst::better);
    Ok(RayVerdict {
        ok: worst.scale <= 1.0 + SCALE_TOL,
        worst_pair: worst.side.map(|_| (times[worst.pair.0], times[worst.pair.1])),
        worst_side: worst.side,
        fitted_scale: worst.scale,
    })
}

/// Least sample time from which `t/(2L) <= ‖γ(t)‖ <= 2L·t` holds at every
/// later sample; `None` if it fails at the last sample.
pub fn norm_control_threshold<S: MetricSpace>(space: &S, ray: &SampledRay<S::Point>, l: f64) -> Option<f64> {
    let mut k = ray.len();
    for i in (0..ray.len()).rev() {
        let t = ray.times()[i];
        let r = space.norm(&ray.points()[i]);
        if t / (2.0 * l) <= r && r <= 2.0 * l * t {
            k = i;
        } else {
            break;
        }
    }
    (k < ray.len()).then(|| ray.times()[k])
}

#[derive(Debug, Clone)]
pub struct Completion<P> {
    pub completed: SampledRay<P>,
    /// Least `n` with `d(γ(⌊t⌋), γ̂(t)) <= n·θ(t)` over the completed samples.
    pub n: f64,
}

/// Continuous completion of an integer-sampled ray: between `t` and `t+1`
/// the completion follows an oracle geodesic at proportional speed. The
/// original ray is read as `γ(⌊t⌋)` between integers.
pub fn connect_the_dots<S: MetricSpace>(space: &S, ray: &SampledRay<S::Point>, theta: &SublinearFn) -> Result<Completion<S::Point>> {
    if ray.times().iter().enumerate().any(|(i, &t)| t != i as f64) {
        return Err(Error::InvalidRay("connect-the-dots needs samples at 0, 1, 2, ...".into()));
    }
    let pts = ray.points();
    let mut times = Vec::new();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        if i + 1 == pts.len() {
            times.push(i as f64);
            out.push(pts[i].clone());
            break;
        }
        let seg = space
            .geodesic(&pts[i], &pts[i + 1])
            .ok_or(Error::MissingGeodesicOracle)?;
        let m = seg.len() - 1;
        for (j, p) in seg.into_iter().enumerate().take(m.max(1)) {
            times.push(i as f64 + if m == 0 { 0.0 } else { j as f64 / m as f64 });
            out.push(p);
        }
    }
    let n = times
        .iter()
        .zip(&out)
        .map(|(&t, p)| space.distance(&pts[t.floor() as usize], p) / theta.eval(t))
        .fold(0.0, f64::max);
    Ok(Completion {
        completed: SampledRay::from_parts_unchecked(times, out),
        n,
    })
}

/// The closeness constant guaranteed by the completion construction:
/// `sup (L + θ(t+1)) / θ(t)` over integer `t <= horizon`.
pub fn completion_bound(l: f64, theta: &SublinearFn, horizon: f64) -> f64 {
    (0..=horizon.max(0.0) as usize)
        .map(|t| (l + theta.eval(t as f64 + 1.0)) / theta.eval(t as f64))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloseMode {
    /// Compare at equal times.
    Fellow,
    /// Compare at equal norms.
    Track,
}

/// Least `n` with `d(α, β) <= n·κ` at matched times (fellow) or norms (track).
pub fn closeness_constant<S: MetricSpace>(
    space: &S,
    alpha: &SampledRay<S::Point>,
    beta: &SampledRay<S::Point>,
    kappa: &SublinearFn,
    mode: CloseMode,
) -> Result<f64> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    match mode {
        CloseMode::Fellow => {
            let (mut i, mut j) = (0, 0);
            let (ta, tb) = (alpha.times(), beta.times());
            while i < ta.len() && j < tb.len() {
                if ta[i] == tb[j] {
                    pairs.push((ta[i], i, j));
                    i += 1;
                    j += 1;
                } else if ta[i] < tb[j] {
                    i += 1;
                } else {
                    j += 1;
                }
            }
        }
        CloseMode::Track => {
            let na: Vec<f64> = alpha.points().iter().map(|p| space.norm(p)).collect();
            let nb: Vec<f64> = beta.points().iter().map(|p| space.norm(p)).collect();
            let top = na.iter().cloned().fold(0.0, f64::max).min(nb.iter().cloned().fold(0.0, f64::max));
            let mut r = 1.0;
            while r <= top {
                let i = na.iter().position(|&x| x >= r).expect("r below max norm");
                let j = nb.iter().position(|&x| x >= r).expect("r below max norm");
                pairs.push((r, i, j));
                r *= 2.0;
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyComparableGrid);
    }
    Ok(pairs
        .iter()
        .map(|&(x, i, j)| space.distance(&alpha.points()[i], &beta.points()[j]) / kappa.eval(x))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    /// Median of `d(α(t), β)/t` over the dyadic times.
    pub dir1_slope: f64,
    /// Median of `d(β(t), α)/t`.
    pub dir2_slope: f64,
    pub dir1: bool,
    pub dir2: bool,
    /// `α ~ β`: either direction holds.
    pub verdict: bool,
    pub times: Vec<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Powers of two in `[horizon/8, horizon]`.
pub fn dyadic_times(horizon: f64) -> Vec<f64> {
    let mut t = 1.0;
    let mut out = Vec::new();
    while t <= horizon {
        if t >= horizon / 8.0 {
            out.push(t);
        }
        t *= 2.0;
    }
    out
}

fn direction_slope<S: MetricSpace>(space: &S, a: &SampledRay<S::Point>, b: &SampledRay<S::Point>, times: &[f64]) -> f64 {
    let steps = space.steps(b.points());
    median(
        times
            .iter()
            .map(|&t| distance_to_set(space, a.point_at(t), b.points(), &steps) / t)
            .collect(),
    )
}

/// Finite-horizon surrogate of the relation `α ~ β`.
pub fn equivalent_rays<S: MetricSpace>(
    space: &S,
    alpha: &SampledRay<S::Point>,
    beta: &SampledRay<S::Point>,
    horizon: f64,
) -> Result<Equivalence> {
    if alpha.horizon() < horizon || beta.horizon() < horizon {
        return Err(Error::InsufficientSamples(format!(
            "rays sampled to {} and {}, horizon {horizon}",
            alpha.horizon(),
            beta.horizon()
        )));
    }
    let times = dyadic_times(horizon);
    if times.is_empty() {
        return Err(Error::InsufficientSamples(format!("no dyadic time in [{}, {horizon}]", horizon / 8.0)));
    }
    let dir1_slope = direction_slope(space, alpha, beta, &times);
    let dir2_slope = direction_slope(space, beta, alpha, &times);
    let (dir1, dir2) = (dir1_slope <= SLOPE_THRESHOLD, dir2_slope <= SLOPE_THRESHOLD);
    Ok(Equivalence { dir1_slope, dir2_slope, dir1, dir2, verdict: dir1 || dir2, times })
}

/// The planar pair: `α` runs along the horizontal axis at unit speed; `β`,
/// parametrized by arc length, runs along the axis and climbs a vertical
/// spike of height `2^n` at `x = 2^n` before coming back down.
/// `α` is sampled at integer times up to `⌈horizon⌉` and `β` at integer
/// times until it reaches `x = ⌈horizon⌉`, so both cover the horizon.
pub fn counterexample_beta(horizon: f64) -> Result<(SampledRay<(f64, f64)>, SampledRay<(f64, f64)>)> {
    if !(horizon >= 4.0) {
        return Err(Error::InvalidArgument(format!("horizon must be >= 4, got {horizon}")));
    }
    let h = horizon.ceil() as usize;
    let alpha = SampledRay::at_integers(&PlaneSpace, (0..=h).map(|t| (t as f64, 0.0)).collect())?;
    let mut pts = vec![(0.0, 0.0)];
    let (mut x, mut next_spike) = (0u64, 1u64);
    while x < h as u64 {
        if x == next_spike {
            for y in (1..=x).chain((0..x).rev()) {
                pts.push((x as f64, y as f64));
            }
            next_spike *= 2;
        }
        x += 1;
        pts.push((x as f64, 0.0));
    }
    let beta = SampledRay::at_integers(&PlaneSpace, pts)?;
    Ok((alpha, beta))
}

/// A random geodesic word of the given length: every letter lengthens the word.
pub fn random_geodesic_word(space: &CayleySpace, len: usize, rng: &mut ChaCha8Rng) -> Word {
    let p = space.presentation();
    let alphabet = p.alphabet();
    let mut w = Vec::with_capacity(len);
    let mut growing = Vec::new();
    while w.len() < len {
        growing.clear();
        for &s in &alphabet {
            let mut t = w.clone();
            if p.right_multiply(&mut t, s) {
                growing.push(s);
            }
        }
        let &s = growing.choose(rng).expect("infinite group has a growing letter");
        p.right_multiply(&mut w, s);
    }
    Word::from_letters(w)
}

/// Geodesic ray along `core`, sampled at integer times with `speed` letters per unit time.
pub fn geodesic_ray(space: &CayleySpace, core: &Word, speed: usize) -> Result<SampledRay<Word>> {
    if speed == 0 {
        return Err(Error::InvalidArgument("speed must be positive".into()));
    }
    let n = core.len() / speed;
    SampledRay::at_integers(space, (0..=n).map(|t| core.prefix(t * speed)).collect())
}

/// A ray following the geodesic `core` that, on reaching core position
/// `t = 2^k`, leaves the core for an out-and-back excursion of height `⌈ln(2 + t)⌉`.
/// The underlying letter path advances `speed` letters per unit time and is
/// sampled at the integers `0..=horizon`.
pub fn log_detour_ray(space: &CayleySpace, core: &Word, horizon: usize, speed: usize, seed: u64) -> Result<SampledRay<Word>> {
    if speed == 0 {
        return Err(Error::InvalidArgument("speed must be positive".into()));
    }
    let p = space.presentation();
    let alphabet = p.alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let need = horizon * speed;
    let mut program: Vec<Letter> = Vec::with_capacity(need + 64);
    let mut cur: Vec<Letter> = Vec::new();
    let mut ci = 0;
    let mut next_dyadic = 1usize;
    while program.len() < need {
        if ci >= next_dyadic {
            let t = next_dyadic as f64;
            let height = (2.0 + t).ln().ceil() as usize;
            let avoid = core.letters().get(ci).copied();
            let mut detour = Vec::with_capacity(height);
            for k in 0..height {
                let options: Vec<Letter> = alphabet
                    .iter()
                    .copied()
                    .filter(|&s| (k > 0 || Some(s) != avoid) && {
                        let mut t = cur.clone();
                        p.right_multiply(&mut t, s)
                    })
                    .collect();
                let &s = options.choose(&mut rng).ok_or_else(|| {
                    Error::InvalidRay("no letter available for an excursion".into())
                })?;
                p.right_multiply(&mut cur, s);
                detour.push(s);
            }
            program.extend_from_slice(&detour);
            for &s in detour.iter().rev() {
                let back = match p.flavor() {
                    Flavor::Coxeter => s,
                    Flavor::Artin => s.inverse(),
                };
                p.right_multiply(&mut cur, back);
                program.push(back);
            }
            next_dyadic *= 2;
            continue;
        }
        let &s = core.letters().get(ci).ok_or_else(|| {
            Error::InvalidRay(format!("core of length {} too short for horizon {horizon}", core.len()))
        })?;
        ci += 1;
        p.right_multiply(&mut cur, s);
        program.push(s);
    }
    let mut pts = Vec::with_capacity(horizon + 1);
    let mut w: Vec<Letter> = Vec::new();
    pts.push(Word::empty());
    for t in 1..=horizon {
        for &s in &program[(t - 1) * speed..t * speed] {
            p.right_multiply(&mut w, s);
        }
        pts.push(Word::from_letters(w.clone()));
    }
    SampledRay::at_integers(space, pts)
}

/// Writes the trace CSV `t,point`.
pub fn write_ray_csv<S: MetricSpace, W: Write>(space: &S, ray: &SampledRay<S::Point>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
    w.write_record(["t", "point"]).map_err(io)?;
    for (t, p) in ray.times().iter().zip(ray.points()) {
        w.write_record([t.to_string(), space.format_point(p)]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
    Ok(())
}

pub fn read_ray_csv<S: MetricSpace, R: Read>(space: &S, input: R) -> Result<SampledRay<S::Point>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = r
        .headers()
        .map_err(|e| Error::TraceFormat { line: 1, reason: e.to_string() })?
        .clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "point" {
        return Err(Error::TraceFormat { line: 1, reason: "expected header `t,point`".into() });
    }
    let mut times = Vec::new();
    let mut points = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::TraceFormat { line, reason: e.to_string() })?;
        if rec.len() != 2 {
            return Err(Error::TraceFormat { line, reason: "expected 2 fields".into() });
        }
        let t: f64 = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::TraceFormat { line, reason: format!("bad time `{}`", &rec[0]) })?;
        let p = space
            .parse_point(&rec[1])
            .map_err(|e| Error::TraceFormat { line, reason: e.to_string() })?;
        times.push(t);
        points.push(p);
    }
    SampledRay::new(space, times, points)
}
