//! Sublinear biLipschitz equivalences between sampled spaces.
//!
//! A map `Φ` is an `(L, θ)`-SBE on a sample when for all sampled `x1, x2`
//!
//! ```text
//! d(x1,x2)/L - b·θ(max‖x‖) <= d(Φx1, Φx2) <= L·d(x1,x2) + b·θ(max‖x‖)
//! ```
//!
//! with `b` the map's budget, and every target sample point lies within
//! `D·θ(‖y‖)` of the image.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coxeter::{Letter, Word};
use crate::error::{Error, Result};
use crate::graphs::automorphisms;
use crate::rays::{random_geodesic_word, SampledRay};
use crate::spaces::{CayleySpace, MetricSpace};
use crate::sublinear::{grid, SublinearFn, GRID_TOL};

/// Pairs whose larger norm is at most this are also reported on their own.
pub const NEAR_ORIGIN_RADIUS: f64 = 4.0;
/// Cap on enumerated graph automorphisms.
pub const AUTOMORPHISM_CAP: usize = 10_000;
/// Largest displacement ball that is enumerated for exact uniform sampling.
pub const DISPLACEMENT_BALL_CAP: usize = 200_000;

pub type Rule<X, Y> = Arc<dyn Fn(&X) -> Option<Y> + Send + Sync>;

pub struct SbeMap<X: MetricSpace, Y: MetricSpace> {
    pub domain: Arc<X>,
    pub target: Arc<Y>,
    rule: Rule<X::Point, Y::Point>,
    pub l: f64,
    pub theta: SublinearFn,
    /// Claimed multiple of θ in the defining inequality.
    pub budget: f64,
    pub seed: Option<u64>,
}

impl<X: MetricSpace, Y: MetricSpace> Clone for SbeMap<X, Y> {
    fn clone(&self) -> Self {
        SbeMap {
            domain: self.domain.clone(),
            target: self.target.clone(),
            rule: self.rule.clone(),
            l: self.l,
            theta: self.theta.clone(),
            budget: self.budget,
            seed: self.seed,
        }
    }
}

impl<X: MetricSpace, Y: MetricSpace> std::fmt::Debug for SbeMap<X, Y> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SbeMap")
            .field("l", &self.l)
            .field("theta", &self.theta.to_string())
            .field("budget", &self.budget)
            .field("seed", &self.seed)
            .finish()
    }
}

impl<X: MetricSpace, Y: MetricSpace> SbeMap<X, Y> {
    pub fn new(
        domain: Arc<X>,
        target: Arc<Y>,
        rule: Rule<X::Point, Y::Point>,
        l: f64,
        theta: SublinearFn,
        budget: f64,
    ) -> Self {
        SbeMap { domain, target, rule, l, theta, budget, seed: None }
    }

    pub fn apply(&self, x: &X::Point) -> Result<Y::Point> {
        (self.rule)(x).ok_or(Error::OutsideDomain)
    }
}

impl<X: MetricSpace> SbeMap<X, X> {
    pub fn identity(space: Arc<X>) -> Self {
        SbeMap::new(space.clone(), space, Arc::new(|x: &X::Point| Some(x.clone())), 1.0, SublinearFn::one(), 1.0)
    }
}

impl SbeMap<CayleySpace, CayleySpace> {
    /// The isometry induced by a defining-graph automorphism.
    pub fn automorphism(space: Arc<CayleySpace>, perm: Vec<usize>) -> Result<Self> {
        let g = space.presentation().graph();
        if perm.len() != g.vertex_count() {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        for i in 0..perm.len() {
            for j in 0..perm.len() {
                if g.adjacent(i, j) != g.adjacent(perm[i], perm[j]) {
                    return Err(Error::InvalidArgument("permutation is not a graph automorphism".into()));
                }
            }
        }
        let perm = Arc::new(perm);
        let rule = move |x: &Word| Some(relabel(x, &perm));
        Ok(SbeMap::new(space.clone(), space, Arc::new(rule), 1.0, SublinearFn::one(), 1.0))
    }
}

fn relabel(w: &Word, perm: &[usize]) -> Word {
    w.letters()
        .iter()
        .map(|&l| Letter::new(perm[l.gen()], l.is_inverse()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbeVerdict {
    pub ok: bool,
    /// Least `L >= 1` satisfying both sides at the claimed budget.
    pub fitted_l: f64,
    /// Least multiple of θ satisfying both sides at the claimed `L`.
    pub fitted_theta_scale: f64,
    /// Same as `fitted_theta_scale`, restricted to pairs within `NEAR_ORIGIN_RADIUS`.
    pub near_origin_scale: f64,
    /// Least `D` with every target sample within `D·θ(‖y‖)` of the image.
    pub surjectivity_d: f64,
    pub worst_pair: Option<(usize, usize)>,
}

/// Checks the defining inequalities of `phi` over all pairs of `domain_sample`.
pub fn verify_sbe<X: MetricSpace, Y: MetricSpace>(
    phi: &SbeMap<X, Y>,
    domain_sample: &[X::Point],
    target_sample: &[Y::Point],
) -> Result<SbeVerdict> {
    if domain_sample.is_empty() || target_sample.is_empty() {
        return Err(Error::InsufficientSamples("SBE samples must be nonempty".into()));
    }
    let (dx, dy) = (&*phi.domain, &*phi.target);
    let o = dx.basepoint();
    if !domain_sample.iter().any(|x| dx.distance(x, &o) == 0.0) {
        return Err(Error::InsufficientSamples("domain sample must contain the basepoint".into()));
    }
    let image: Vec<Y::Point> = domain_sample.iter().map(|x| phi.apply(x)).collect::<Result<_>>()?;
    let norms: Vec<f64> = domain_sample.iter().map(|x| dx.norm(x)).collect();
    let (l, b, theta) = (phi.l, phi.budget, &phi.theta);

    #[derive(Clone, Copy)]
    struct Acc {
        scale: f64,
        pair: Option<(usize, usize)>,
        near: f64,
        lfit: f64,
    }
    let merge = |a: Acc, c: Acc| {
        let (scale, pair) = if c.scale > a.scale || (c.scale == a.scale && c.pair < a.pair && c.pair.is_some()) {
            (c.scale, c.pair)
        } else {
            (a.scale, a.pair)
        };
        Acc { scale, pair, near: a.near.max(c.near), lfit: a.lfit.max(c.lfit) }
    };
    let zero = Acc { scale: 0.0, pair: None, near: 0.0, lfit: 1.0 };
    let acc = (0..domain_sample.len())
        .into_par_iter()
        .map(|i| {
            let mut a = zero;
            for j in i + 1..domain_sample.len() {
                let d0 = dx.distance(&domain_sample[i], &domain_sample[j]);
                let d1 = dy.distance(&image[i], &image[j]);
                let m = norms[i].max(norms[j]);
                let th = theta.eval(m);
                let ex = (d1 - l * d0).max(d0 / l - d1).max(0.0);
                let sc = ex / th;
                if sc > a.scale {
                    a.scale = sc;
                    a.pair = Some((i, j));
                }
                if m <= NEAR_ORIGIN_RADIUS {
                    a.near = a.near.max(sc);
                }
                if d0 > 0.0 {
                    a.lfit = a.lfit.max((d1 - b * th) / d0).max(d0 / (d1 + b * th));
                }
            }
            a
        })
        .reduce(|| zero, merge);

    let surjectivity_d = target_sample
        .par_iter()
        .map(|y| {
            let d = image.iter().map(|z| dy.distance(y, z)).fold(f64::INFINITY, f64::min);
            d / theta.eval(dy.norm(y))
        })
        .reduce(|| 0.0, f64::max);
    Ok(SbeVerdict {
        ok: acc.scale <= b + GRID_TOL,
        fitted_l: acc.lfit,
        fitted_theta_scale: acc.scale,
        near_origin_scale: acc.near,
        surjectivity_d,
        worst_pair: acc.pair,
    })
}

#[derive(Debug, Clone)]
pub struct QuasiInverse<X: MetricSpace, Y: MetricSpace> {
    pub phi_bar: SbeMap<Y, X>,
    /// Least `n` with `d(x, Φ̄Φx) <= n·θ(‖x‖)` and `d(y, ΦΦ̄y) <= n·θ(‖y‖)` on the samples.
    pub defect_n: f64,
    /// `sup θ(‖Φ̄y‖)/θ(‖y‖)` over the target sample.
    pub norm_ratio: f64,
}

/// Nearest-point projection onto the sampled image: `Φ̄(y)` is a sampled
/// `x` whose image is closest to `y`, ties broken by sample order.
pub fn quasi_inverse<X: MetricSpace + 'static, Y: MetricSpace + 'static>(
    phi: &SbeMap<X, Y>,
    domain_sample: &[X::Point],
    target_sample: &[Y::Point],
) -> Result<QuasiInverse<X, Y>> {
    if domain_sample.is_empty() {
        return Err(Error::EmptyImage);
    }
    let image: Vec<Y::Point> = domain_sample.iter().map(|x| phi.apply(x)).collect::<Result<_>>()?;
    let target = phi.target.clone();
    let xs: Arc<Vec<X::Point>> = Arc::new(domain_sample.to_vec());
    let image = Arc::new(image);
    let rule = {
        let (xs, image, target) = (xs.clone(), image.clone(), target.clone());
        move |y: &Y::Point| {
            // sample images are unrelated points, so direct distances beat incremental ones
            let (k, _) = image
                .iter()
                .map(|z| target.distance(y, z))
                .enumerate()
                .fold((0, f64::INFINITY), |best, (k, d)| if d < best.1 { (k, d) } else { best });
            Some(xs[k].clone())
        }
    };
    let rule: Rule<Y::Point, X::Point> = Arc::new(rule);
    let (dx, dy, theta) = (&*phi.domain, &*phi.target, &phi.theta);
    let back = domain_sample
        .par_iter()
        .zip(image.par_iter())
        .map(|(x, fx)| dx.distance(x, &rule(fx).expect("total rule")) / theta.eval(dx.norm(x)))
        .reduce(|| 0.0, f64::max);
    let (fwd, ratio) = target_sample
        .par_iter()
        .map(|y| {
            let xb = rule(y).expect("total rule");
            let fxb = phi.apply(&xb).expect("sampled point");
            let ty = theta.eval(dy.norm(y));
            (dy.distance(y, &fxb) / ty, theta.eval(dx.norm(&xb)) / ty)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let defect_n = back.max(fwd);
    let budget = phi.l * (2.0 * defect_n + phi.budget * ratio);
    let phi_bar = SbeMap {
        domain: phi.target.clone(),
        target: phi.domain.clone(),
        rule,
        l: phi.l,
        theta: phi.theta.clone(),
        budget,
        seed: phi.seed,
    };
    Ok(QuasiInverse { phi_bar, defect_n, norm_ratio: ratio })
}

/// Pointwise image of a ray with times preserved; the image of the first
/// sample is replaced by the target basepoint.
pub fn push_ray<X: MetricSpace, Y: MetricSpace>(phi: &SbeMap<X, Y>, ray: &SampledRay<X::Point>) -> Result<SampledRay<Y::Point>> {
    let mut pts: Vec<Y::Point> = ray.points().iter().map(|x| phi.apply(x)).collect::<Result<_>>()?;
    pts[0] = phi.target.basepoint();
    SampledRay::new(&*phi.target, ray.times().to_vec(), pts)
}

/// FNV-1a over the seed and the letters of a word.
fn point_hash(seed: u64, w: &Word) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    for l in w.letters() {
        for b in (l.gen() as u16 * 2 + l.is_inverse() as u16).to_le_bytes() {
            h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// A random graph automorphism composed with a seeded displacement of each
/// point `x` to a uniform point of the ball of radius `⌊θ(‖x‖)⌋` around it.
///
/// Displacement balls above `DISPLACEMENT_BALL_CAP` elements are not
/// enumerated; the displacement is then a random geodesic word of uniform
/// length in `0..=⌊θ⌋`.
pub fn synthetic_sbe(space: Arc<CayleySpace>, l: f64, theta: SublinearFn, seed: u64) -> Result<SbeMap<CayleySpace, CayleySpace>> {
    if grid().any(|r| theta.eval(r) < 1.0) {
        return Err(Error::ThetaBelowOne);
    }
    if !(l >= 1.0) {
        return Err(Error::InvalidArgument(format!("L must be >= 1, got {l}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let autos = automorphisms(space.presentation().graph(), AUTOMORPHISM_CAP);
    let perm = Arc::new(autos.choose(&mut rng).expect("identity is an automorphism").clone());
    let balls: Arc<Mutex<HashMap<usize, Option<Arc<Vec<Word>>>>>> = Arc::new(Mutex::new(HashMap::new()));
    let sp = space.clone();
    let th = theta.clone();
    let rule = move |x: &Word| {
        let p = sp.presentation();
        let key = sp.key(x);
        let rho = th.eval(key.len() as f64).floor() as usize;
        let mut prng = ChaCha8Rng::seed_from_u64(point_hash(seed, &key));
        let ball = {
            let mut cache = balls.lock().expect("cache lock");
            cache
                .entry(rho)
                .or_insert_with(|| p.ball_with_budget(rho, DISPLACEMENT_BALL_CAP).ok().map(|b| Arc::new(b.elements)))
                .clone()
        };
        let offset = match ball {
            Some(b) => b[prng.gen_range(0..b.len())].clone(),
            None => {
                let len = prng.gen_range(0..=rho);
                random_geodesic_word(&sp, len, &mut prng)
            }
        };
        let base = relabel(x, &perm);
        Some(p.multiply(&base, &offset))
    };
    Ok(SbeMap {
        domain: space.clone(),
        target: space,
        rule: Arc::new(rule),
        l,
        theta,
        budget: 2.0,
        seed: Some(seed),
    })
}

/// Sample of the ball of radius `radius`: the basepoint, `random` random
/// geodesic words of uniform random length, and every `stride`-th prefix of
/// `rays` random geodesics of length `radius`.
pub fn ball_sample(space: &CayleySpace, radius: usize, random: usize, rays: usize, stride: usize, seed: u64) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Word::empty()];
    for _ in 0..random {
        let len = rng.gen_range(1..=radius);
        out.push(random_geodesic_word(space, len, &mut rng));
    }
    for _ in 0..rays {
        let g = random_geodesic_word(space, radius, &mut rng);
        out.extend((1..=radius).step_by(stride.max(1)).map(|k| g.prefix(k)));
    }
    out
}

/// The union of the images of `sample` under the defining-graph
/// automorphisms (at most `AUTOMORPHISM_CAP` of them), in order of first
/// appearance. A sample closed under these isometries contains a preimage
/// candidate for every sampled point whenever the map is close to one of them.
pub fn symmetrized_sample(space: &CayleySpace, sample: &[Word]) -> Vec<Word> {
    let autos = automorphisms(space.presentation().graph(), AUTOMORPHISM_CAP);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for perm in &autos {
        for x in sample {
            let y = relabel(x, perm);
            if seen.insert(space.key(&y)) {
                out.push(y);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::Presentation;
    use crate::graphs::{edgeless_graph, ladder_graph};
    use crate::rays::{geodesic_ray, verify_ray};

    fn tree() -> Arc<CayleySpace> {
        Arc::new(CayleySpace::new(Presentation::coxeter(edgeless_graph(3)).unwrap()))
    }

    #[test]
    fn identity_and_relabeling() {
        let s = tree();
        let sample = ball_sample(&s, 40, 30, 2, 5, 1);
        let id = SbeMap::identity(s.clone());
        let v = verify_sbe(&id, &sample, &sample).unwrap();
        assert!(v.ok);
        assert_eq!(v.fitted_theta_scale, 0.0);
        assert_eq!(v.surjectivity_d, 0.0);
        let q = quasi_inverse(&id, &sample, &sample).unwrap();
        assert_eq!(q.defect_n, 0.0);

        let w = Arc::new(CayleySpace::new(Presentation::coxeter(ladder_graph(13).unwrap()).unwrap()));
        let perm: Vec<usize> = (0..26).map(|i| if i < 13 { i + 13 } else { i - 13 }).collect();
        let phi = SbeMap::automorphism(w.clone(), perm).unwrap();
        let sample = ball_sample(&w, 12, 40, 1, 3, 2);
        let image: Vec<Word> = sample.iter().map(|x| phi.apply(x).unwrap()).collect();
        let v = verify_sbe(&phi, &sample, &image).unwrap();
        assert!(v.ok);
        assert_eq!(v.fitted_l, 1.0);
        let q = quasi_inverse(&phi, &sample, &image).unwrap();
        assert_eq!(q.defect_n, 0.0);
        for (x, y) in sample.iter().zip(&image) {
            assert_eq!(&q.phi_bar.apply(y).unwrap(), x);
        }
        assert!(SbeMap::automorphism(w, (0..26).rev().collect()).is_ok());
    }

    #[test]
    fn synthetic_maps_are_deterministic_and_bounded() {
        let s = tree();
        let sample = ball_sample(&s, 128, 60, 2, 4, 3);
        let a = synthetic_sbe(s.clone(), 1.0, SublinearFn::log2p(), 5).unwrap();
        let b = synthetic_sbe(s.clone(), 1.0, SublinearFn::log2p(), 5).unwrap();
        for x in &sample {
            assert_eq!(a.apply(x).unwrap(), b.apply(x).unwrap());
        }
        let v = verify_sbe(&a, &sample, &sample).unwrap();
        assert!(v.ok && v.fitted_theta_scale <= 2.0, "{v:?}");
        let c = synthetic_sbe(s.clone(), 1.0, SublinearFn::one(), 5).unwrap();
        assert!(verify_sbe(&c, &sample, &sample).unwrap().ok);
    }

    #[test]
    fn pushed_geodesic_stays_a_ray() {
        let s = tree();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = geodesic_ray(&s, &random_geodesic_word(&s, 200, &mut rng), 1).unwrap();
        let id = SbeMap::identity(s.clone());
        assert_eq!(push_ray(&id, &g).unwrap(), g);
        let phi = synthetic_sbe(s.clone(), 1.0, SublinearFn::log2p(), 8).unwrap();
        let img = push_ray(&phi, &g).unwrap();
        let v = verify_ray(&*s, &img, 1.0, &SublinearFn::log2p()).unwrap();
        assert!(v.fitted_scale <= 2.0 + 1.0, "{v:?}");
    }

    #[test]
    fn outside_domain() {
        let s = tree();
        let rule: Rule<Word, Word> = Arc::new(|x: &Word| if x.len() < 3 { Some(x.clone()) } else { None });
        let phi = SbeMap::new(s.clone(), s.clone(), rule, 1.0, SublinearFn::one(), 1.0);
        let far = s.parse_point("s1 s2 s3").unwrap();
        assert!(matches!(verify_sbe(&phi, &[Word::empty(), far.clone()], &[Word::empty()]), Err(Error::OutsideDomain)));
        assert!(verify_sbe(&phi, &[far], &[Word::empty()]).is_err());
    }

    #[test]
    fn symmetrized_inverse_has_small_defect() {
        let s = tree();
        let base = ball_sample(&s, 128, 30, 2, 8, 6);
        let sample = symmetrized_sample(&s, &base);
        assert!(sample.len() > base.len() && sample.len() <= 6 * base.len());
        assert_eq!(symmetrized_sample(&s, &sample).len(), sample.len());
        let phi = synthetic_sbe(s.clone(), 1.0, SublinearFn::log2p(), 6).unwrap();
        let q = quasi_inverse(&phi, &sample, &sample).unwrap();
        assert!(q.defect_n <= 2.0 + 1e-9, "{}", q.defect_n);
        assert!(verify_sbe(&q.phi_bar, &sample, &sample).unwrap().ok);
    }
}
