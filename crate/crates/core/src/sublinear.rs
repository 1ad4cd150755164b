//! Sublinear functions: concave, nondecreasing, at least 1, and `o(r)`.
//!
//! The family is closed: constants, `a·log(2+r)+b`, powers `a·r^s` with
//! `0 < s < 1`, and pointwise max/sum of two members. Every member is checked
//! at construction on the geometric grid `r = 2^k, k = 0..=40`.
//!
//! Values below 1 on `[0, 1)` are clamped to 1 by [`SublinearFn::eval`], so the
//! standing assumption `κ ≥ 1` holds everywhere, including near the basepoint
//! where `log(2+r)` dips to `log 2`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance used by the exact grid predicates.
pub const GRID_TOL: f64 = 1e-9;

/// Outward safety margin applied to grid suprema/infima.
pub const SAFETY_MARGIN: f64 = 1.05;

/// Certification grid `2^k` for `k = 0..=40`.
pub fn grid() -> impl Iterator<Item = f64> {
    (0..=40).map(|k| 2f64.powi(k))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    Const(f64),
    /// `a·log(2+r) + b`
    Log { a: f64, b: f64 },
    /// `a·r^s`
    Pow { a: f64, s: f64 },
    Max(Box<SublinearFn>, Box<SublinearFn>),
    Sum(Box<SublinearFn>, Box<SublinearFn>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SublinearFn {
    form: Form,
}

impl SublinearFn {
    pub fn constant(c: f64) -> Result<Self> {
        Self::checked(Form::Const(c))
    }

    pub fn log(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::InvalidFunction(format!(
                "log coefficient must be >= 0, got {a}"
            )));
        }
        Self::checked(Form::Log { a, b })
    }

    pub fn power(a: f64, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidFunction(format!(
                "power exponent must lie in (0, 1), got {s}"
            )));
        }
        if !(a > 0.0) {
            return Err(Error::InvalidFunction(format!(
                "power coefficient must be > 0, got {a}"
            )));
        }
        Self::checked(Form::Pow { a, s })
    }

    pub fn max(f: SublinearFn, g: SublinearFn) -> Result<Self> {
        Self::checked(Form::Max(Box::new(f), Box::new(g)))
    }

    pub fn sum(f: SublinearFn, g: SublinearFn) -> Result<Self> {
        Self::checked(Form::Sum(Box::new(f), Box::new(g)))
    }

    /// `κ(r) = log(2+r)`, the canonical gauge for random-walk tracking.
    pub fn log2p() -> Self {
        Self::log(1.0, 0.0).expect("log(2+r) is sublinear")
    }

    pub fn one() -> Self {
        Self::constant(1.0).expect("1 is sublinear")
    }

    /// `c·f`, expressed inside the closed family.
    ///
    /// Integer multiples become nested sums; other positive factors rescale
    /// the leaf coefficients.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidFunction(format!(
                "scale factor must be > 0, got {c}"
            )));
        }
        let form = match &self.form {
            Form::Const(v) => Form::Const(v * c),
            Form::Log { a, b } => Form::Log { a: a * c, b: b * c },
            Form::Pow { a, s } => Form::Pow { a: a * c, s: *s },
            Form::Max(f, g) => Form::Max(Box::new(f.scaled(c)?), Box::new(g.scaled(c)?)),
            Form::Sum(f, g) => Form::Sum(Box::new(f.scaled(c)?), Box::new(g.scaled(c)?)),
        };
        Self::checked(form)
    }

    fn checked(form: Form) -> Result<Self> {
        let f = SublinearFn { form };
        f.validate()?;
        Ok(f)
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    /// The raw parametric value, without the clamp at 1.
    pub fn raw(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match &self.form {
            Form::Const(c) => *c,
            Form::Log { a, b } => a * (2.0 + r).ln() + b,
            Form::Pow { a, s } => a * r.powf(*s),
            Form::Max(f, g) => f.raw(r).max(g.raw(r)),
            Form::Sum(f, g) => f.raw(r) + g.raw(r),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.raw(r).max(1.0)
    }

    fn validate(&self) -> Result<()> {
        let pts: Vec<f64> = grid().collect();
        for &r in &pts {
            let v = self.raw(r);
            if !v.is_finite() {
                return Err(Error::InvalidFunction(format!("non-finite value at r = {r}")));
            }
            if v < 1.0 - GRID_TOL {
                return Err(Error::InvalidFunction(format!(
                    "value {v} < 1 at grid point r = {r}"
                )));
            }
        }
        for w in pts.windows(2) {
            let (r1, r2) = (w[0], w[1]);
            let (v1, v2) = (self.raw(r1), self.raw(r2));
            if v2 < v1 - GRID_TOL * v1.abs().max(1.0) {
                return Err(Error::InvalidFunction(format!(
                    "decreasing between r = {r1} and r = {r2}"
                )));
            }
            let mid = self.raw(0.5 * (r1 + r2));
            if mid < 0.5 * (v1 + v2) - GRID_TOL * mid.abs().max(1.0) {
                return Err(Error::InvalidFunction(format!(
                    "not midpoint-concave on [{r1}, {r2}]"
                )));
            }
        }
        if self.raw(1e6) / 1e6 >= self.raw(1e3) / 1e3 {
            return Err(Error::InvalidFunction("not strictly sublinear".into()));
        }
        Ok(())
    }

    /// Asymptotic growth class `(power exponent, log power)`.
    fn growth(&self) -> Growth {
        match &self.form {
            Form::Const(_) => Growth::CONST,
            Form::Log { a, .. } if *a > 0.0 => Growth { exponent: 0.0, log_power: 1 },
            Form::Log { .. } => Growth::CONST,
            Form::Pow { s, .. } => Growth { exponent: *s, log_power: 0 },
            Form::Max(f, g) | Form::Sum(f, g) => f.growth().max(g.growth()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Growth {
    exponent: f64,
    log_power: u8,
}

impl Growth {
    const CONST: Growth = Growth { exponent: 0.0, log_power: 0 };

    fn cmp(&self, other: &Growth) -> Ordering {
        self.exponent
            .total_cmp(&other.exponent)
            .then(self.log_power.cmp(&other.log_power))
    }

    fn max(self, other: Growth) -> Growth {
        if self.cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for SublinearFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            Form::Const(c) => write!(f, "const:{c}"),
            Form::Log { a, b } => write!(f, "log:{a},{b}"),
            Form::Pow { a, s } => write!(f, "pow:{a},{s}"),
            Form::Max(g, h) => write!(f, "max:({g}|{h})"),
            Form::Sum(g, h) => write!(f, "sum:({g}|{h})"),
        }
    }
}

impl FromStr for SublinearFn {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: &str| Error::FunctionSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let spec_t = spec.trim();
        let (kind, args) = spec_t.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let nums = |args: &str, n: usize| -> Result<Vec<f64>> {
            let v: std::result::Result<Vec<f64>, _> =
                args.split(',').map(|x| x.trim().parse::<f64>()).collect();
            let v = v.map_err(|_| bad("expected numbers"))?;
            if v.len() != n {
                return Err(bad(&format!("expected {n} numbers")));
            }
            Ok(v)
        };
        match kind.trim() {
            "const" => SublinearFn::constant(nums(args, 1)?[0]),
            "log" => {
                let v = nums(args, 2)?;
                SublinearFn::log(v[0], v[1])
            }
            "pow" => {
                let v = nums(args, 2)?;
                SublinearFn::power(v[0], v[1])
            }
            "max" | "sum" => {
                let inner = args
                    .trim()
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| bad("expected `(f|g)`"))?;
                let (l, r) = split_top_level(inner).ok_or_else(|| bad("expected `f|g`"))?;
                let (f, g) = (l.parse()?, r.parse()?);
                if kind.trim() == "max" {
                    SublinearFn::max(f, g)
                } else {
                    SublinearFn::sum(f, g)
                }
            }
            _ => Err(bad("unknown form")),
        }
    }
}

fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '|' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

/// Outcome of a domination test `κ(t) ≥ C1·θ(t) + C2` for `t > t0`.
///
/// The constants carry meaning only when `verdict` holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domination {
    pub verdict: bool,
    pub c1: f64,
    pub c2: f64,
    pub t0: f64,
}

/// Decides whether `kappa` dominates `theta`.
///
/// The verdict comes from the exact growth classes of the closed family
/// (`r^s` beats `log` beats constants; larger exponents beat smaller ones).
/// When it holds, `C1` is the grid infimum of `κ/θ` with `C2 = 0`, `t0 = 0`.
pub fn dominates(kappa: &SublinearFn, theta: &SublinearFn) -> Domination {
    if kappa.growth().cmp(&theta.growth()) == Ordering::Less {
        return Domination { verdict: false, c1: 0.0, c2: 0.0, t0: 0.0 };
    }
    let c1 = grid()
        .map(|t| kappa.eval(t) / theta.eval(t))
        .fold(f64::INFINITY, f64::min);
    let d = Domination { verdict: true, c1, c2: 0.0, t0: 0.0 };
    debug_assert!(certify_on_grid(kappa, theta, &d));
    d
}

/// Checks `κ(t) ≥ C1·θ(t) + C2` on every grid point `t > t0`.
pub fn certify_on_grid(kappa: &SublinearFn, theta: &SublinearFn, d: &Domination) -> bool {
    grid()
        .filter(|&t| t > d.t0)
        .all(|t| kappa.eval(t) >= d.c1 * theta.eval(t) + d.c2 - GRID_TOL)
}

/// `D ≪ r`: whether `D ≤ r / (2κ(r))`.
pub fn small_rel(d: f64, r: f64, kappa: &SublinearFn) -> Result<bool> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    Ok(d <= r / (2.0 * kappa.eval(r)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationConstants {
    pub d1: f64,
    pub d2: f64,
    pub r: f64,
}

/// Constants `D1, D2` with `d(x,y) ≤ D0·κ(x) ⇒ D1·κ(x) ≤ κ(y) ≤ D2·κ(x)`.
///
/// `R` is the least grid point from which `κ(r) ≤ r/(2·D0)` holds on every
/// grid point up to `r_max`. Then
/// `D2 = sup_{r≥R} κ(3r/2)/κ(r) + κ(3R/2)` and
/// `D1 = min(inf_{r≥R} κ(r/2)/κ(r), 1/κ(R))`, where sup and inf run over a
/// geometric grid of ratio `2^(1/8)` on `[R, r_max]` and are widened by
/// [`SAFETY_MARGIN`].
pub fn estimation_constants(
    kappa: &SublinearFn,
    d0: f64,
    r_max: f64,
) -> Result<EstimationConstants> {
    if !(d0 > 0.0) {
        return Err(Error::InvalidArgument(format!("D0 must be > 0, got {d0}")));
    }
    let pts: Vec<f64> = grid().filter(|&r| r <= r_max).collect();
    let ok = |r: f64| kappa.eval(r) <= r / (2.0 * d0);
    let mut start = None;
    for (i, &r) in pts.iter().enumerate().rev() {
        if ok(r) {
            start = Some(i);
        } else {
            break;
        }
    }
    let r = start
        .map(|i| pts[i])
        .ok_or(Error::EstimationRadiusNotFound { d0, r_max })?;

    let step = 2f64.powf(0.125);
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    let mut t = r;
    while t <= r_max * (1.0 + 1e-12) {
        let k = kappa.eval(t);
        sup = sup.max(kappa.eval(1.5 * t) / k);
        inf = inf.min(kappa.eval(0.5 * t) / k);
        t *= step;
    }
    let d2 = SAFETY_MARGIN * sup + kappa.eval(1.5 * r);
    let d1 = (inf / SAFETY_MARGIN).min(1.0 / kappa.eval(r));
    Ok(EstimationConstants { d1, d2, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> SublinearFn {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_displays_specs() {
        for s in ["const:2", "log:1,0", "pow:1,0.5", "max:(pow:1,0.5|const:2)", "sum:(const:1|max:(pow:1,0.5|const:2))"] {
            assert_eq!(f(s).to_string(), s);
        }
        assert!("log:1".parse::<SublinearFn>().is_err());
        assert!("exp:1,1".parse::<SublinearFn>().is_err());
        assert!("max:(log:1,0)".parse::<SublinearFn>().is_err());
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(SublinearFn::constant(0.5).is_err());
        assert!(SublinearFn::power(1.0, 1.0).is_err());
        assert!(SublinearFn::power(0.5, 0.5).is_err());
        assert!(SublinearFn::log(-1.0, 5.0).is_err());
        assert!(SublinearFn::log(0.1, 0.0).is_err());
        // the max of two crossing concave functions has a convex kink
        assert!("max:(log:1,0|pow:1,0.5)".parse::<SublinearFn>().is_err());
    }

    #[test]
    fn clamps_below_one_near_origin() {
        let k = SublinearFn::log2p();
        assert!(k.raw(0.0) < 1.0);
        assert_eq!(k.eval(0.0), 1.0);
        assert!((k.eval(100.0) - 102f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn small_rel_examples() {
        let k = SublinearFn::log2p();
        assert!(small_rel(2.0, 100.0, &k).unwrap());
        assert!(!small_rel(60.0, 100.0, &k).unwrap());
        assert!(small_rel(0.0, 3.0, &f("pow:1,0.5")).unwrap());
        assert!(small_rel(1.0, 0.0, &k).is_err());
    }

    #[test]
    fn domination_examples() {
        assert!(dominates(&f("pow:1,0.5"), &SublinearFn::log2p()).verdict);
        assert!(!dominates(&f("pow:1,0.5"), &f("pow:1,0.7")).verdict);
        let k = f("sum:(log:1,0|pow:2,0.3)");
        let d = dominates(&k, &k);
        assert!(d.verdict);
        assert_eq!((d.c1, d.c2), (1.0, 0.0));
        assert!(!dominates(&SublinearFn::one(), &SublinearFn::log2p()).verdict);
        assert!(dominates(&SublinearFn::log2p(), &f("const:7")).verdict);
    }

    #[test]
    fn estimation_constants_for_log() {
        let k = SublinearFn::log2p();
        let c = estimation_constants(&k, 1.0, 1e6).unwrap();
        assert_eq!(c.r, 4.0);
        // sup of log(2+3r/2)/log(2+r) over r >= 4 is attained at r = 4.
        let expected_d2 = SAFETY_MARGIN * (8f64.ln() / 6f64.ln()) + 8f64.ln();
        assert!((c.d2 - expected_d2).abs() < 1e-12, "{}", c.d2);
        assert!((c.d1 - 1.0 / 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn estimation_constants_for_constant() {
        let c = estimation_constants(&SublinearFn::one(), 1.0, 1e6).unwrap();
        assert_eq!(c.r, 2.0);
        assert!(c.d1 <= 1.0 && c.d2 >= 1.0);
    }

    #[test]
    fn estimation_radius_may_be_out_of_reach() {
        let k = f("pow:10,0.9");
        assert!(matches!(
            estimation_constants(&k, 100.0, 1e3),
            Err(Error::EstimationRadiusNotFound { .. })
        ));
    }

    #[test]
    fn scaled_stays_in_family() {
        let k = SublinearFn::log2p().scaled(3.0).unwrap();
        assert!((k.eval(10.0) - 3.0 * 12f64.ln()).abs() < 1e-12);
        assert!(SublinearFn::one().scaled(0.5).is_err());
    }
}
