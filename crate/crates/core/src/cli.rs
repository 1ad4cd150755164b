//! Command-line front end. Every subcommand writes a `key: value` record and
//! any CSV tables into the output directory and prints one summary line.

use std::fmt::Write as _;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::coxeter::{Presentation, Word};
use crate::error::{Error, Result};
use crate::graphs::{cycle_labels, four_cycle_graph, is_cfs, SimpleGraph};
use crate::morse::{morse_gauge_probe, non_morse_witness};
use crate::rays::{closeness_constant, equivalent_rays, read_ray_csv, verify_ray, write_ray_csv, CloseMode, SampledRay};
use crate::sbe::{ball_sample, push_ray, quasi_inverse, symmetrized_sample, synthetic_sbe, verify_sbe, SbeVerdict};
use crate::spaces::{CayleySpace, MetricSpace, PlaneSpace};
use crate::sublinear::SublinearFn;
use crate::walks::{
    drift_and_tracking, dyadic_checkpoints, simulate, tracking_kappa, verify_walk_ray, walk_sbe_sample, walk_to_sbe,
    StepMeasure,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "coarse-lab", version, about = "Sublinear coarse geometry on right-angled Coxeter groups")]
pub struct RunConfig {
    /// Directory receiving records and CSV tables.
    #[arg(long, global = true, default_value = "coarse-lab-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Four-cycle graph and CFS verdict of a defining graph.
    Cfs {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Word length and normal form.
    Wordlen {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// Use the right-angled Artin group instead.
        #[arg(long)]
        artin: bool,
    },
    /// Sphere sizes of a word-metric ball.
    Ball {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        artin: bool,
    },
    /// Checks an (L, θ)-ray trace, and optionally its relation to a second trace.
    RayVerify {
        /// A graph file, or `plane`.
        #[arg(long)]
        space: String,
        #[arg(long)]
        ray: PathBuf,
        #[arg(long)]
        ray2: Option<PathBuf>,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value = "log:1,0")]
        theta: SublinearFn,
        #[arg(long, default_value = "log:1,0")]
        kappa: SublinearFn,
        #[arg(long)]
        artin: bool,
    },
    /// Synthesizes a seeded SBE on a Cayley space and checks it.
    Sbe {
        #[arg(long)]
        space: PathBuf,
        /// `seed,L,theta`, e.g. `7,1,log:1,0`.
        #[arg(long)]
        gen: String,
        #[arg(long, default_value_t = 64)]
        radius: usize,
        /// Random points in the sample besides two sampled geodesics; the
        /// sample is then closed under the graph automorphisms.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        invert: bool,
        #[arg(long)]
        push: Option<PathBuf>,
    },
    /// Sampled κ-Morse gauge of a ray trace.
    MorseProbe {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        ray: PathBuf,
        #[arg(long, default_value = "log:1,0")]
        kappa: SublinearFn,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        q_grid: Vec<f64>,
        #[arg(long = "Q-grid", value_delimiter = ',', default_value = "0,2")]
        big_q_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        radii: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Segments tried per radius when searching for a non-Morse witness.
        #[arg(long, default_value_t = 1000)]
        witness_budget: usize,
    },
    /// Seeded random walks: drift, tracking and the linear-ray check.
    Walk {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        steps: usize,
        /// Inclusive range `a..b`, or a single seed.
        #[arg(long, value_parser = parse_seeds)]
        seeds: RangeInclusive<u64>,
        /// `uniform` or a measure file of `word probability` lines.
        #[arg(long, default_value = "uniform")]
        measure: String,
        /// `dyadic` or a comma-separated list.
        #[arg(long, default_value = "dyadic")]
        checkpoints: String,
        /// Multiple of Ĉ used for κ in the ray check.
        #[arg(long, default_value_t = 3.0)]
        inflation: f64,
        #[arg(long)]
        artin: bool,
    },
}

fn parse_seeds(s: &str) -> std::result::Result<RangeInclusive<u64>, String> {
    let bad = || format!("`{s}` is not a seed or a range `a..b`");
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            Ok(a..=b)
        }
        None => {
            let a = s.trim().parse().map_err(|_| bad())?;
            Ok(a..=a)
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn usage(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("--{flag}: {msg}"))
}

fn require_file(flag: &str, p: &Path) -> std::result::Result<(), Failure> {
    if p.is_file() {
        Ok(())
    } else {
        Err(usage(flag, format!("`{}` does not exist", p.display())))
    }
}

fn read_graph(flag: &str, p: &Path) -> std::result::Result<SimpleGraph, Failure> {
    require_file(flag, p)?;
    let text = fs::read_to_string(p).map_err(|e| usage(flag, e))?;
    SimpleGraph::parse(&text).map_err(|e| usage(flag, e))
}

fn presentation(flag: &str, p: &Path, artin: bool) -> std::result::Result<Presentation, Failure> {
    let g = read_graph(flag, p)?;
    Ok(if artin { Presentation::artin(g)? } else { Presentation::coxeter(g)? })
}

/// Ordered `key: value` lines.
#[derive(Default)]
struct Record(Vec<(String, String)>);

impl Record {
    fn put(&mut self, k: &str, v: impl std::fmt::Display) -> &mut Self {
        self.0.push((k.to_string(), v.to_string()));
        self
    }

    fn write(&self, dir: &Path, name: &str) -> Result<()> {
        let mut s = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(s, "{k}: {v}");
        }
        write_file(dir, name, s.as_bytes())
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::write(dir.join(name), bytes).map_err(|e| Error::InvalidArgument(format!("cannot write {name}: {e}")))
}

fn f(x: f64) -> String {
    format!("{x:.6}")
}

/// Runs one subcommand and returns the process exit status.
pub fn run(config: RunConfig) -> i32 {
    let out = config.out.clone();
    if let Err(e) = fs::create_dir_all(&out) {
        eprintln!("error: --out: cannot create `{}`: {e}", out.display());
        return EXIT_USAGE;
    }
    let res = match config.command {
        Command::Cfs { graph } => cfs(&out, &graph),
        Command::Wordlen { graph, word, artin } => wordlen(&out, &graph, &word, artin),
        Command::Ball { graph, radius, artin } => ball(&out, &graph, radius, artin),
        Command::RayVerify { space, ray, ray2, l, theta, kappa, artin } => {
            require_file("ray", &ray).and_then(|_| ray2.as_deref().map_or(Ok(()), |p| require_file("ray2", p))).and_then(|_| {
                if space == "plane" {
                    ray_verify(&out, &PlaneSpace, &ray, ray2.as_deref(), l, &theta, &kappa)
                } else {
                    let s = CayleySpace::new(presentation("space", Path::new(&space), artin)?);
                    ray_verify(&out, &s, &ray, ray2.as_deref(), l, &theta, &kappa)
                }
            })
        }
        Command::Sbe { space, gen, radius, samples, verify, invert, push } => {
            sbe(&out, &space, &gen, radius, samples, verify, invert, push.as_deref())
        }
        Command::MorseProbe { space, ray, kappa, q_grid, big_q_grid, radii, samples, seed, witness_budget } => {
            morse(&out, &space, &ray, &kappa, &q_grid, &big_q_grid, &radii, samples, seed, witness_budget)
        }
        Command::Walk { graph, steps, seeds, measure, checkpoints, inflation, artin } => {
            walk(&out, &graph, steps, seeds, &measure, &checkpoints, inflation, artin)
        }
    };
    match res {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn cfs(out: &Path, graph: &Path) -> Outcome {
    let g = read_graph("graph", graph)?;
    let v = is_cfs(&g);
    let lambda = four_cycle_graph(&g);
    let mut csv = String::from("id,cycle,component\n");
    for (i, c) in lambda.cycles.iter().enumerate() {
        let _ = writeln!(csv, "{i},{},{}", cycle_labels(&g, c), lambda.component[i]);
    }
    write_file(out, "lambda.csv", csv.as_bytes())?;
    Record::default()
        .put("cfs", v.verdict)
        .put("lambda_vertices", v.lambda_vertices)
        .put("witness_component", v.witness_component.join(" "))
        .write(out, "cfs.txt")?;
    println!("CFS={} lambda_vertices={}", v.verdict, v.lambda_vertices);
    Ok(v.verdict)
}

fn wordlen(out: &Path, graph: &Path, word: &str, artin: bool) -> Outcome {
    let p = presentation("graph", graph, artin)?;
    let w = p.parse_word(word).map_err(|e| usage("word", e))?;
    let r = p.reduce(&w);
    let nf = p.format_word(&p.normal_form_of_reduced(&r));
    Record::default().put("length", r.len()).put("normal_form", &nf).write(out, "wordlen.txt")?;
    println!("length={} normal_form=\"{nf}\"", r.len());
    Ok(true)
}

fn ball(out: &Path, graph: &Path, radius: usize, artin: bool) -> Outcome {
    let p = presentation("graph", graph, artin)?;
    let b = p.ball(radius)?;
    let mut csv = String::from("radius,sphere,ball\n");
    let mut total = 0;
    for (r, s) in b.spheres.iter().enumerate() {
        total += s;
        let _ = writeln!(csv, "{r},{s},{total}");
    }
    write_file(out, "ball.csv", csv.as_bytes())?;
    Record::default().put("radius", radius).put("size", b.len()).write(out, "ball.txt")?;
    println!("radius={radius} size={}", b.len());
    Ok(true)
}

fn read_trace<S: MetricSpace>(flag: &str, space: &S, p: &Path) -> std::result::Result<SampledRay<S::Point>, Failure> {
    let file = fs::File::open(p).map_err(|e| usage(flag, e))?;
    read_ray_csv(space, file).map_err(|e| usage(flag, e))
}

fn ray_verify<S: MetricSpace>(
    out: &Path,
    space: &S,
    ray: &Path,
    ray2: Option<&Path>,
    l: f64,
    theta: &SublinearFn,
    kappa: &SublinearFn,
) -> Outcome {
    let a = read_trace("ray", space, ray)?;
    let va = verify_ray(space, &a, l, theta)?;
    let mut rec = Record::default();
    rec.put("L", l).put("theta", theta).put("ray_ok", va.ok).put("ray_fitted_scale", f(va.fitted_scale));
    if let Some((s, t)) = va.worst_pair {
        rec.put("ray_worst_pair", format!("{s},{t}"));
    }
    let mut ok = va.ok;
    let mut line = format!("ray_ok={} fitted_scale={}", va.ok, f(va.fitted_scale));
    if let Some(p2) = ray2 {
        let b = read_trace("ray2", space, p2)?;
        let vb = verify_ray(space, &b, l, theta)?;
        let h = a.horizon().min(b.horizon());
        let eq = equivalent_rays(space, &a, &b, h)?;
        let n = closeness_constant(space, &a, &b, kappa, CloseMode::Fellow)?;
        rec.put("ray2_ok", vb.ok)
            .put("ray2_fitted_scale", f(vb.fitted_scale))
            .put("kappa", kappa)
            .put("dir1_slope", f(eq.dir1_slope))
            .put("dir2_slope", f(eq.dir2_slope))
            .put("equivalent", eq.verdict)
            .put("fellow_constant", f(n));
        ok = ok && vb.ok && eq.verdict;
        let _ = write!(line, " ray2_ok={} equivalent={} fellow_constant={}", vb.ok, eq.verdict, f(n));
    }
    rec.put("verdict", ok).write(out, "ray_verify.txt")?;
    println!("{line}");
    Ok(ok)
}

fn parse_gen(gen: &str) -> std::result::Result<(u64, f64, SublinearFn), Failure> {
    let mut it = gen.splitn(3, ',');
    let (Some(s), Some(l), Some(t)) = (it.next(), it.next(), it.next()) else {
        return Err(usage("gen", format!("`{gen}` is not `seed,L,theta`")));
    };
    let seed = s.trim().parse().map_err(|_| usage("gen", format!("bad seed `{s}`")))?;
    let l = l.trim().parse().map_err(|_| usage("gen", format!("bad L `{l}`")))?;
    let theta = t.trim().parse().map_err(|e| usage("gen", e))?;
    Ok((seed, l, theta))
}

fn put_sbe(rec: &mut Record, prefix: &str, v: &SbeVerdict) {
    rec.put(&format!("{prefix}ok"), v.ok)
        .put(&format!("{prefix}fitted_l"), f(v.fitted_l))
        .put(&format!("{prefix}fitted_theta_scale"), f(v.fitted_theta_scale))
        .put(&format!("{prefix}near_origin_scale"), f(v.near_origin_scale))
        .put(&format!("{prefix}surjectivity_d"), f(v.surjectivity_d));
}

#[allow(clippy::too_many_arguments)]
fn sbe(out: &Path, space: &Path, gen: &str, radius: usize, samples: usize, verify: bool, invert: bool, push: Option<&Path>) -> Outcome {
    let (seed, l, theta) = parse_gen(gen)?;
    let s = Arc::new(CayleySpace::new(presentation("space", space, false)?));
    if let Some(p) = push {
        require_file("push", p)?;
    }
    let phi = synthetic_sbe(s.clone(), l, theta.clone(), seed).map_err(|e| usage("gen", e))?;
    let dom = symmetrized_sample(&s, &ball_sample(&s, radius, samples, 2, 8, seed));
    let img: Vec<Word> = dom.iter().map(|x| phi.apply(x)).collect::<Result<_>>()?;
    let mut rec = Record::default();
    rec.put("seed", seed).put("L", l).put("theta", &theta).put("radius", radius).put("sample", dom.len());
    let mut ok = true;
    let mut line = String::new();
    if verify || (!invert && push.is_none()) {
        let v = verify_sbe(&phi, &dom, &img)?;
        put_sbe(&mut rec, "", &v);
        ok &= v.ok;
        let _ = write!(line, "sbe_ok={} fitted_theta_scale={} ", v.ok, f(v.fitted_theta_scale));
    }
    if invert {
        let q = quasi_inverse(&phi, &dom, &dom)?;
        let v = verify_sbe(&q.phi_bar, &dom, &dom)?;
        rec.put("defect_n", f(q.defect_n)).put("inverse_budget", f(q.phi_bar.budget));
        put_sbe(&mut rec, "inverse_", &v);
        ok &= v.ok;
        let _ = write!(line, "inverse_ok={} defect_n={} ", v.ok, f(q.defect_n));
    }
    if let Some(p) = push {
        let ray = read_trace("push", &*s, p)?;
        let pushed = push_ray(&phi, &ray)?;
        let mut buf = Vec::new();
        write_ray_csv(&*s, &pushed, &mut buf)?;
        write_file(out, "pushed.csv", &buf)?;
        let v = verify_ray(&*s, &pushed, l, &theta)?;
        rec.put("pushed_points", pushed.len()).put("pushed_fitted_scale", f(v.fitted_scale));
        let _ = write!(line, "pushed_fitted_scale={} ", f(v.fitted_scale));
    }
    rec.put("verdict", ok).write(out, "sbe.txt")?;
    println!("{}", line.trim_end());
    Ok(ok)
}

#[allow(clippy::too_many_arguments)]
fn morse(
    out: &Path,
    space: &Path,
    ray: &Path,
    kappa: &SublinearFn,
    q_grid: &[f64],
    big_q_grid: &[f64],
    radii: &[usize],
    samples: usize,
    seed: u64,
    witness_budget: usize,
) -> Outcome {
    let s = CayleySpace::new(presentation("space", space, false)?);
    require_file("ray", ray)?;
    let z = read_trace("ray", &s, ray)?;
    if let Some(q) = q_grid.iter().find(|&&q| !(q >= 1.0)) {
        return Err(usage("q-grid", format!("q = {q} is below 1")));
    }
    if let Some(q) = big_q_grid.iter().find(|&&q| !(q >= 0.0)) {
        return Err(usage("Q-grid", format!("Q = {q} is negative")));
    }
    if radii.is_empty() || radii.contains(&0) {
        return Err(usage("radii", "radii must be positive"));
    }
    let rep = morse_gauge_probe(&s, &z, kappa, q_grid, big_q_grid, radii, samples, seed)?;
    let mut csv = String::from("q,Q,r,samples,sampling_failures,raw_gauge,gauge,max_deviation\n");
    for c in &rep.cells {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            c.q,
            c.big_q,
            c.r,
            c.samples,
            c.sampling_failures,
            f(c.raw_gauge),
            f(c.gauge),
            f(c.max_deviation)
        );
    }
    write_file(out, "morse_cells.csv", csv.as_bytes())?;
    let mut rec = Record::default();
    rec.put("kappa", kappa)
        .put("seed", seed)
        .put("radii", radii.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","))
        .put("r_schedule", rep.r_schedule.iter().map(|m| format!("{m}r")).collect::<Vec<_>>().join(","))
        .put("non_morse", rep.non_morse);
    let mut witnesses = 0;
    for &r in radii {
        if let Some(w) = non_morse_witness(&s, &z, r, witness_budget) {
            let mut csv = String::from("i,point,dist_to_ray\n");
            let steps = s.steps(z.points());
            for (i, x) in w.path.iter().enumerate() {
                let d = crate::spaces::distance_to_set(&s, x, z.points(), &steps);
                let _ = writeln!(csv, "{i},{},{d}", s.format_point(x));
            }
            write_file(out, &format!("witness_r{r}.csv"), csv.as_bytes())?;
            rec.put(&format!("witness_r{r}_deviation"), f(w.deviation));
            witnesses += 1;
        }
    }
    rec.put("witnesses", witnesses).write(out, "morse.txt")?;
    let top = rep.cells.iter().map(|c| c.gauge).fold(0.0, f64::max);
    println!("non_morse={} max_gauge={} witnesses={witnesses}", rep.non_morse, f(top));
    Ok(!rep.non_morse)
}

struct Trial {
    seed: u64,
    a_hat: f64,
    c_hat: f64,
    log_rss: f64,
    sqrt_rss: f64,
    pass_fraction: f64,
    lower_a: f64,
    upper_a: f64,
    sbe_ok: bool,
    csv: String,
}

#[allow(clippy::too_many_arguments)]
fn walk(
    out: &Path,
    graph: &Path,
    steps: usize,
    seeds: RangeInclusive<u64>,
    measure: &str,
    checkpoints: &str,
    inflation: f64,
    artin: bool,
) -> Outcome {
    let p = presentation("graph", graph, artin)?;
    if steps == 0 {
        return Err(usage("steps", "must be positive"));
    }
    let mu = if measure == "uniform" {
        StepMeasure::uniform(&p)
    } else {
        let path = Path::new(measure);
        require_file("measure", path)?;
        let text = fs::read_to_string(path).map_err(|e| usage("measure", e))?;
        StepMeasure::parse(&p, &text).map_err(|e| usage("measure", e))?
    };
    let cps: Vec<usize> = if checkpoints == "dyadic" {
        dyadic_checkpoints(steps)
    } else {
        let v: std::result::Result<Vec<usize>, _> = checkpoints.split(',').map(|c| c.trim().parse()).collect();
        let v = v.map_err(|_| usage("checkpoints", format!("`{checkpoints}` is not `dyadic` or a list")))?;
        if v.iter().any(|&c| c > steps || c == 0) {
            return Err(usage("checkpoints", "checkpoints must lie in 1..=steps"));
        }
        v
    };
    let trials: Vec<Trial> = seeds
        .clone()
        .collect::<Vec<u64>>()
        .par_iter()
        .map(|&seed| -> Result<Trial> {
            let path = simulate(&p, &mu, steps, seed)?;
            let rep = drift_and_tracking(&path, &cps)?;
            let kappa = tracking_kappa(rep.c_hat, inflation);
            let v = verify_walk_ray(&path, rep.a_hat, &kappa)?;
            let phi = walk_to_sbe(&path, &rep.limit.geodesic, rep.a_hat, kappa.clone(), 1.0)?;
            let (dom, tgt) = walk_sbe_sample(&path, &rep.limit.geodesic, rep.a_hat, 200);
            let sv = verify_sbe(&phi, &dom, &tgt)?;
            let mut csv = String::from("n,norm,dist_to_gamma\n");
            for (&n, &d) in rep.checkpoints.iter().zip(&rep.profile) {
                let _ = writeln!(csv, "{n},{},{d}", path.norm(n));
            }
            Ok(Trial {
                seed,
                a_hat: rep.a_hat,
                c_hat: rep.c_hat,
                log_rss: rep.log_fit.rss,
                sqrt_rss: rep.sqrt_fit.rss,
                pass_fraction: v.pass_fraction,
                lower_a: v.lower_a,
                upper_a: v.upper_a,
                sbe_ok: sv.ok,
                csv,
            })
        })
        .collect::<Result<_>>()?;
    let mut table = String::from("seed,a_hat,c_hat,log_rss,sqrt_rss,pass_fraction,lower_a,upper_a,sbe_ok\n");
    for t in &trials {
        write_file(out, &format!("walk_seed{}.csv", t.seed), t.csv.as_bytes())?;
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{},{}",
            t.seed,
            f(t.a_hat),
            f(t.c_hat),
            f(t.log_rss),
            f(t.sqrt_rss),
            f(t.pass_fraction),
            f(t.lower_a),
            f(t.upper_a),
            t.sbe_ok
        );
    }
    write_file(out, "walk_trials.csv", table.as_bytes())?;
    let k = trials.len() as f64;
    let mean = |g: fn(&Trial) -> f64| trials.iter().map(g).sum::<f64>() / k;
    let drift = mean(|t| t.a_hat);
    let sd = (trials.iter().map(|t| (t.a_hat - drift).powi(2)).sum::<f64>() / (k - 1.0).max(1.0)).sqrt();
    let log_wins = trials.iter().filter(|t| t.log_rss < t.sqrt_rss).count();
    let sbe_ok = trials.iter().filter(|t| t.sbe_ok).count();
    let pass = mean(|t| t.pass_fraction);
    Record::default()
        .put("trials", trials.len())
        .put("steps", steps)
        .put("seeds", format!("{}..{}", seeds.start(), seeds.end()))
        .put("drift", f(drift))
        .put("drift_sd", f(sd))
        .put("c_hat_mean", f(mean(|t| t.c_hat)))
        .put("c_hat_max", f(trials.iter().map(|t| t.c_hat).fold(0.0, f64::max)))
        .put("log_fit_wins", log_wins)
        .put("sqrt_fit_wins", trials.len() - log_wins)
        .put("pass_fraction_mean", f(pass))
        .put("pass_fraction_min", f(trials.iter().map(|t| t.pass_fraction).fold(1.0, f64::min)))
        .put("lower_a_mean", f(mean(|t| t.lower_a)))
        .put("upper_a_mean", f(mean(|t| t.upper_a)))
        .put("walk_sbe_ok", sbe_ok)
        .write(out, "walk.txt")?;
    println!(
        "drift={} drift_sd={} c_hat_mean={} log_fit_wins={log_wins}/{} pass_fraction_mean={} walk_sbe_ok={sbe_ok}/{}",
        f(drift),
        f(sd),
        f(mean(|t| t.c_hat)),
        trials.len(),
        f(pass),
        trials.len()
    );
    Ok(true)
}
