//! Acceptance run: one PASS/FAIL line per criterion. Thresholds and runtime
//! limits are pinned below. Criteria listed in `UNATTAINABLE` are run in full
//! and reported like the others, but their failure does not fail the target.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use coarse_lab::coxeter::{commutator, ladder_c, Letter, Presentation, Word};
use coarse_lab::graphs::{add_cycle, four_cycle_graph, is_cfs, ladder_graph, edgeless_graph, square_graph, Cycle, SimpleGraph};
use coarse_lab::morse::{certify_tree_gauge, limit_geodesic, morse_gauge_probe, non_morse_witness};
use coarse_lab::rays::{
    completion_bound, connect_the_dots, counterexample_beta, equivalent_rays, geodesic_ray, log_detour_ray, random_geodesic_word,
    verify_ray, write_ray_csv,
};
use coarse_lab::sbe::{ball_sample, quasi_inverse, symmetrized_sample, synthetic_sbe, verify_sbe};
use coarse_lab::spaces::{CayleySpace, PlaneSpace};
use coarse_lab::sublinear::SublinearFn;
use coarse_lab::walks::{
    drift_and_tracking, dyadic_checkpoints, simulate, tracking_kappa, tracking_quantile, verify_walk_ray,
    walk_sbe_sample, walk_to_sbe, DriftReport, SamplePath, StepMeasure,
};
use common::{sym_diff, RootOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CFS_SECS: f64 = 5.0;
const ORACLE_SECS: f64 = 60.0;
const DRIFT_SECS: f64 = 120.0;
const DRIFT_TOL: f64 = 0.02;
const GRID_DRIFT_MAX: f64 = 0.05;
const STABILITY_TOL: f64 = 0.20;
const GRID_GROWTH_MIN: f64 = 2.0;
const FIT_WINS_MIN: usize = 18;
const RAY_PASS_MIN: f64 = 0.95;
const RAY_FAIL_INDEX_MAX: usize = 100;
const KAPPA_INFLATION: f64 = 3.0;
const SLOPE_DIR1_MAX: f64 = 0.05;
const SLOPE_DIR2_MIN: f64 = 0.5;
const INVERSE_DEFECT_FACTOR: f64 = 10.0;
const GAUGE_RATIO_MAX: f64 = 1.5;

const SEEDS: u64 = 20;
const STEPS: usize = 100_000;

/// Criteria that the ledger records as unattainable at desk scale.
const UNATTAINABLE: [usize; 3] = [5, 6, 7];

type Verdict = (bool, String);

fn tail(notes: &[String]) -> String {
    if notes.is_empty() {
        String::new()
    } else {
        format!("; {}", notes.join("; "))
    }
}

fn tree() -> Presentation {
    Presentation::coxeter(edgeless_graph(3)).unwrap()
}

fn grid() -> Presentation {
    Presentation::coxeter(square_graph()).unwrap()
}

fn cycle_edges(c: &Cycle) -> BTreeSet<(usize, usize)> {
    (0..4)
        .map(|k| {
            let (a, b) = (c[k], c[(k + 1) % 4]);
            (a.min(b), a.max(b))
        })
        .collect()
}

fn labelled_cycle(g: &SimpleGraph, vs: [String; 4]) -> BTreeSet<(usize, usize)> {
    let c: Cycle = vs.map(|v| g.vertex_index(&v).unwrap());
    cycle_edges(&c)
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let ladder = ladder_graph(13).unwrap();
    let pent = add_cycle(&ladder, &["a1", "a4", "a7", "a10", "a13"]).unwrap();
    let (v1, v2) = (is_cfs(&ladder), is_cfs(&pent));
    let old: BTreeSet<_> = four_cycle_graph(&ladder).cycles.iter().map(cycle_edges).collect();
    let new: BTreeSet<_> = four_cycle_graph(&pent).cycles.iter().map(cycle_edges).filter(|c| !old.contains(c)).collect();
    let mut families = BTreeSet::new();
    for i in [1, 4, 7, 10] {
        let (a, b) = (|k: usize| format!("a{k}"), |k: usize| format!("b{k}"));
        for vs in [
            [a(i), a(i + 3), a(i + 2), a(i + 1)],
            [a(i), a(i + 3), b(i + 2), b(i + 1)],
            [a(i), a(i + 3), b(i + 2), a(i + 1)],
            [a(i), a(i + 3), a(i + 2), b(i + 1)],
        ] {
            families.insert(labelled_cycle(&pent, vs));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = v1.verdict
        && v1.lambda_vertices == 56
        && v2.verdict
        && v2.lambda_vertices == 72
        && new.len() == 16
        && new == families
        && secs < CFS_SECS;
    (
        ok,
        format!(
            "ladder |Λ|={} cfs={}, with pentagon |Λ|={} cfs={}, extra={} matching families={}, {secs:.2}s",
            v1.lambda_vertices,
            v1.verdict,
            v2.lambda_vertices,
            v2.verdict,
            new.len(),
            new == families
        ),
    )
}

/// Compares the library distance with the inversion-set distance on all
/// pairs of the ball; returns (pairs, mismatches, ball sizes agree).
fn oracle_compare(g: SimpleGraph, radius: usize) -> (u64, u64, bool) {
    let p = Presentation::coxeter(g.clone()).unwrap();
    let mut oracle = RootOracle::new(&g);
    let spheres = oracle.ball(radius);
    let sizes: Vec<usize> = spheres.iter().map(|s| s.len()).collect();
    let lib = p.ball(radius).unwrap();
    let elems: Vec<_> = spheres.into_iter().flatten().collect();
    let words: Vec<Word> = elems
        .iter()
        .map(|e| p.reduce(&e.word.iter().map(|&s| Letter::new(s, false)).collect()))
        .collect();
    use rayon::prelude::*;
    let (pairs, bad) = (0..elems.len())
        .into_par_iter()
        .map(|i| {
            let mut buf = Vec::new();
            let mut bad = 0u64;
            for j in i + 1..elems.len() {
                let d = p.distance_with(&words[i], &words[j], &mut buf);
                if d != sym_diff(&elems[i].inversions, &elems[j].inversions) {
                    bad += 1;
                }
            }
            ((elems.len() - i - 1) as u64, bad)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    (pairs, bad, lib.spheres == sizes)
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    let (p1, b1, s1) = oracle_compare(ladder_graph(5).unwrap(), 4);
    let (p2, b2, s2) = oracle_compare(ladder_graph(13).unwrap(), 3);
    let secs = t.elapsed().as_secs_f64();
    (
        b1 == 0 && b2 == 0 && s1 && s2 && secs < ORACLE_SECS,
        format!("5-ladder r=4: {p1} pairs, {b1} mismatches; W_13 r=3: {p2} pairs, {b2} mismatches; spheres agree={}; {secs:.1}s", s1 && s2),
    )
}

fn criterion_3() -> Verdict {
    let g = ladder_graph(13).unwrap();
    let p = Presentation::coxeter(g.clone()).unwrap();
    let mut oracle = RootOracle::new(&g);
    let gens = |w: &Word| w.letters().iter().map(|l| l.gen()).collect::<Vec<_>>();
    let c: Vec<Word> = (1..=13).map(|i| ladder_c(&p, i).unwrap()).collect();
    let mut consecutive = 0;
    let mut distant = 0;
    let mut bad = Vec::new();
    for i in 0..13 {
        for j in i + 1..13 {
            let lib = commutator(&p, &c[i], &c[j]);
            let raw = c[i].concat(&c[j]).concat(&c[i].inverse(p.flavor())).concat(&c[j].inverse(p.flavor()));
            let trivial = oracle.inversions(&gens(&raw)).is_empty();
            if trivial != lib.is_empty() {
                bad.push(format!("[c{},c{}] library/oracle disagree", i + 1, j + 1));
            }
            if j == i + 1 && trivial {
                consecutive += 1;
            }
            if j >= i + 2 && !trivial {
                distant += 1;
            }
        }
    }
    let mut powers_ok = true;
    for k in 1..=10 {
        let w = c[0].power(k);
        let (lib, orc) = (p.norm(&w), oracle.inversions(&gens(&w)).len());
        powers_ok &= lib == 2 * k && orc == 2 * k;
    }
    (
        consecutive == 12 && distant == 66 && powers_ok && bad.is_empty(),
        format!("trivial consecutive {consecutive}/12, nontrivial distant {distant}/66, |c1^k| = 2k for k ≤ 10: {powers_ok}{}", tail(&bad)),
    )
}

struct Walks {
    tree: Vec<(SamplePath, DriftReport)>,
    grid: Vec<(SamplePath, DriftReport)>,
    secs: f64,
}

fn run_walks() -> Walks {
    let t = Instant::now();
    let go = |p: Presentation| -> Vec<(SamplePath, DriftReport)> {
        let mu = StepMeasure::uniform(&p);
        (1..=SEEDS)
            .map(|seed| {
                let path = simulate(&p, &mu, STEPS, seed).unwrap();
                let rep = drift_and_tracking(&path, &dyadic_checkpoints(STEPS)).unwrap();
                (path, rep)
            })
            .collect()
    };
    let tree = go(tree());
    let grid = go(grid());
    Walks { tree, grid, secs: t.elapsed().as_secs_f64() }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn criterion_4(w: &Walks) -> Verdict {
    let at = mean(w.tree.iter().map(|r| r.1.a_hat));
    let ag = mean(w.grid.iter().map(|r| r.1.a_hat));
    let lo = w.tree.iter().map(|r| r.1.a_hat).fold(f64::INFINITY, f64::min);
    let hi = w.tree.iter().map(|r| r.1.a_hat).fold(0.0, f64::max);
    (
        (at - 1.0 / 3.0).abs() <= DRIFT_TOL && ag <= GRID_DRIFT_MAX && w.secs < DRIFT_SECS,
        format!("tree mean Â = {at:.4} (seeds {lo:.4}..{hi:.4}), grid mean Â = {ag:.4}, {:.1}s for 2×{SEEDS} walks", w.secs),
    )
}

/// Mean over seeds of the 95th percentile of `d(w_n, γ_N)/ln n` on `[N/2, N]`.
fn tracking_stat(runs: &[(SamplePath, DriftReport)], n: usize) -> f64 {
    mean(runs.iter().map(|(path, _)| {
        let space = CayleySpace::new(path.presentation().clone());
        let short = path.truncated(n);
        let g = limit_geodesic(&space, &short, n).unwrap();
        tracking_quantile(&short, &g.geodesic, n / 2, n, 0.95)
    }))
}

fn criterion_5(w: &Walks) -> Verdict {
    let (t3, t4) = (tracking_stat(&w.tree, 1_000), tracking_stat(&w.tree, 10_000));
    let (g3, g4) = (tracking_stat(&w.grid, 1_000), tracking_stat(&w.grid, 10_000));
    let log_wins = w.tree.iter().filter(|r| r.1.log_fit.rss < r.1.sqrt_fit.rss).count();
    let sqrt_wins = w.grid.iter().filter(|r| r.1.sqrt_fit.rss < r.1.log_fit.rss).count();
    let change = (t4 / t3 - 1.0).abs();
    let growth = g4 / g3;
    (
        change <= STABILITY_TOL && log_wins >= FIT_WINS_MIN && growth >= GRID_GROWTH_MIN && sqrt_wins >= FIT_WINS_MIN,
        format!(
            "tree q95 {t3:.3} → {t4:.3} (change {:.0}%), log fit wins {log_wins}/{SEEDS}; grid q95 {g3:.3} → {g4:.3} (×{growth:.2}), sqrt fit wins {sqrt_wins}/{SEEDS}",
            100.0 * change
        ),
    )
}

fn criterion_6(w: &Walks) -> Verdict {
    let mut min_pass = 1.0f64;
    let mut worst_index = 0usize;
    let mut sbe_ok = 0;
    let mut agree = 0;
    for (path, rep) in &w.tree {
        let kappa = tracking_kappa(rep.c_hat, KAPPA_INFLATION);
        let v = verify_walk_ray(path, rep.a_hat, &kappa).unwrap();
        min_pass = min_pass.min(v.pass_fraction);
        worst_index = worst_index.max(v.max_failing_index.unwrap_or(0));
        let ray_ok = v.pass_fraction >= RAY_PASS_MIN && v.max_failing_index.unwrap_or(0) <= RAY_FAIL_INDEX_MAX;
        let phi = walk_to_sbe(path, &rep.limit.geodesic, rep.a_hat, kappa, 1.0).unwrap();
        let (dom, tgt) = walk_sbe_sample(path, &rep.limit.geodesic, rep.a_hat, 200);
        let s = verify_sbe(&phi, &dom, &tgt).unwrap();
        sbe_ok += s.ok as usize;
        agree += (s.ok == ray_ok) as usize;
    }
    (
        min_pass >= RAY_PASS_MIN && worst_index <= RAY_FAIL_INDEX_MAX && sbe_ok == w.tree.len(),
        format!(
            "min pass fraction {min_pass:.3}, largest failing index {worst_index}, walk_to_sbe ok {sbe_ok}/{SEEDS}, verdicts agree {agree}/{SEEDS}"
        ),
    )
}

/// A reduced tree word following `core` for `p` letters and then leaving it.
fn branch(core: &Word, p: usize, len: usize, rng: &mut ChaCha8Rng) -> Word {
    let mut letters = core.prefix(p).into_letters();
    let avoid = core.letters().get(p).copied();
    while letters.len() < len {
        let s = Letter::new(rng.gen_range(0..3), false);
        let fresh = letters.len() == p && Some(s) == avoid;
        if letters.last() != Some(&s) && !fresh {
            letters.push(s);
        }
    }
    Word::from_letters(letters)
}

fn criterion_7() -> Verdict {
    let space = CayleySpace::new(tree());
    let log = SublinearFn::log2p();
    let h = 1024;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut accepted, mut matching, mut equivalent) = (0, 0, 0);
    for k in 0..200u64 {
        let core = random_geodesic_word(&space, 1300, &mut rng);
        let other = if k % 2 == 0 { core.clone() } else { branch(&core, rng.gen_range(0..64), 1300, &mut rng) };
        let a = log_detour_ray(&space, &core, h, 1, 2 * k).unwrap();
        let b = log_detour_ray(&space, &other, h, 1, 2 * k + 1).unwrap();
        if !verify_ray(&space, &a, 3.0, &log).unwrap().ok || !verify_ray(&space, &b, 3.0, &log).unwrap().ok {
            continue;
        }
        accepted += 1;
        let eq = equivalent_rays(&space, &a, &b, h as f64).unwrap();
        matching += (eq.dir1 == eq.dir2) as usize;
        equivalent += eq.verdict as usize;
    }
    let (alpha, beta) = counterexample_beta(4096.0).unwrap();
    let eq = equivalent_rays(&PlaneSpace, &alpha, &beta, 4096.0).unwrap();
    (
        accepted == 200 && matching == accepted && eq.dir1_slope <= SLOPE_DIR1_MAX && eq.dir2_slope >= SLOPE_DIR2_MIN,
        format!(
            "tree pairs accepted {accepted}/200, matching verdicts {matching}, equivalent {equivalent}; planar dir1 {:.3}, dir2 {:.3}",
            eq.dir1_slope, eq.dir2_slope
        ),
    )
}

fn criterion_8() -> Verdict {
    let space = CayleySpace::new(tree());
    let log = SublinearFn::log2p();
    let l = 3.0;
    let bound = completion_bound(l, &log, 512.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut ok, mut max_n, mut max_scale) = (0, 0.0f64, 0.0f64);
    let mut notes = Vec::new();
    for seed in 0..50u64 {
        let core = random_geodesic_word(&space, 1400, &mut rng);
        let ray = log_detour_ray(&space, &core, 512, 2, seed).unwrap();
        if !verify_ray(&space, &ray, l, &log).unwrap().ok {
            notes.push(format!("seed {seed}: input not an (L, log)-ray"));
            continue;
        }
        let c = connect_the_dots(&space, &ray, &log).unwrap();
        max_n = max_n.max(c.n);
        let scaled = log.scaled(c.n.max(1.0)).unwrap();
        let v = verify_ray(&space, &c.completed, l, &scaled).unwrap();
        max_scale = max_scale.max(v.fitted_scale);
        ok += (v.ok && c.n <= bound) as usize;
    }
    (
        ok == 50,
        format!(
            "{ok}/50 completions verify as (L, n·θ)-rays with n ≤ {bound:.3}; max n {max_n:.3}, max fitted scale {max_scale:.3}{}",
            tail(&notes)
        ),
    )
}

fn criterion_9() -> Verdict {
    let space = Arc::new(CayleySpace::new(tree()));
    let (mut ok, mut worst_defect, mut worst_scale) = (0, 0.0f64, 0.0f64);
    for seed in 0..20u64 {
        let phi = synthetic_sbe(space.clone(), 1.0, SublinearFn::log2p(), seed).unwrap();
        let sample = symmetrized_sample(&space, &ball_sample(&space, 512, 50, 2, 8, seed));
        let q = quasi_inverse(&phi, &sample, &sample).unwrap();
        let v = verify_sbe(&q.phi_bar, &sample, &sample).unwrap();
        worst_defect = worst_defect.max(q.defect_n);
        worst_scale = worst_scale.max(v.fitted_theta_scale / q.phi_bar.budget);
        ok += (q.defect_n.is_finite() && q.defect_n <= INVERSE_DEFECT_FACTOR * phi.budget && v.ok) as usize;
    }
    (
        ok == 20,
        format!("{ok}/20 inverses pass; worst defect n {worst_defect:.3} (limit {}), worst scale/budget {worst_scale:.3}", INVERSE_DEFECT_FACTOR * 2.0),
    )
}

fn criterion_10() -> Verdict {
    let space = CayleySpace::new(tree());
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let z = geodesic_ray(&space, &random_geodesic_word(&space, 1100, &mut rng), 1).unwrap();
    let radii = [64, 128, 256];
    let rep = morse_gauge_probe(&space, &z, &SublinearFn::one(), &[2.0], &[2.0], &radii, 50, 10).unwrap();
    let g: Vec<f64> = radii.iter().map(|&r| rep.cell(2.0, 2.0, r).unwrap().gauge).collect();
    let (lo, hi) = (g.iter().cloned().fold(f64::INFINITY, f64::min), g.iter().cloned().fold(0.0, f64::max));
    let bound = certify_tree_gauge(&space, 2.0, 2.0).unwrap() as f64;
    let tree_ok = lo > 0.0 && hi / lo <= GAUGE_RATIO_MAX && g[0] == bound;

    let grid_space = CayleySpace::new(grid());
    let pat = grid_space.presentation().parse_word("x1 y1 x2 y2").unwrap();
    let diag = geodesic_ray(&grid_space, &pat.power(160), 1).unwrap();
    let mut devs = Vec::new();
    for &r in &radii {
        let w = non_morse_witness(&grid_space, &diag, r, 1000);
        devs.push(w.filter(|w| w.reverify(&grid_space, &diag) && w.deviation >= r as f64 / 4.0).map(|w| w.deviation));
    }
    (
        tree_ok && devs.iter().all(Option::is_some),
        format!("tree gauges {g:?} (certified bound {bound} at r=64); grid witness deviations {devs:?}"),
    )
}

fn run_cli(out: &Path, args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_coarse-lab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("COARSE_LAB_THREADS", "2")
        .output()
        .expect("binary runs");
    let err = String::from_utf8_lossy(&o.stderr).lines().next().unwrap_or("").to_string();
    (o.status.code().unwrap_or(-1), err)
}

fn criterion_11() -> Verdict {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let input = tempfile::tempdir().unwrap();
    let free3 = data.join("free3.txt");
    let g = SimpleGraph::parse(&std::fs::read_to_string(&free3).unwrap()).unwrap();
    let space = CayleySpace::new(Presentation::coxeter(g).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ray = log_detour_ray(&space, &random_geodesic_word(&space, 800, &mut rng), 512, 1, 11).unwrap();
    let ray_path = input.path().join("ray.csv");
    write_ray_csv(&space, &ray, std::fs::File::create(&ray_path).unwrap()).unwrap();
    let g13 = data.join("gamma13.txt");
    let (f3, g, r) = (free3.to_str().unwrap(), g13.to_str().unwrap(), ray_path.to_str().unwrap());
    let runs: Vec<Vec<&str>> = vec![
        vec!["cfs", "--graph", g],
        vec!["ball", "--graph", g, "--radius", "2"],
        vec!["ray-verify", "--space", f3, "--ray", r, "--L", "3"],
        vec!["sbe", "--space", f3, "--gen", "5,1,log:1,0", "--radius", "128", "--invert", "--verify", "--push", r],
        vec!["morse-probe", "--space", f3, "--ray", r, "--radii", "16,32", "--seed", "3"],
        vec!["walk", "--graph", f3, "--steps", "20000", "--seeds", "1..4"],
    ];
    let mut same = 0;
    let mut files = 0;
    let mut diffs = Vec::new();
    for args in &runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ((ca, err), (cb, _)) = (run_cli(a.path(), args), run_cli(b.path(), args));
        let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        let identical = ca == cb
            && ca != 2
            && !names.is_empty()
            && names.iter().all(|n| std::fs::read(a.path().join(n)).ok() == std::fs::read(b.path().join(n)).ok());
        files += names.len();
        if identical {
            same += 1;
        } else {
            diffs.push(format!("{} (exit {ca}/{cb}: {err})", args[0]));
        }
    }
    (
        same == runs.len(),
        format!("{same}/{} subcommands byte-identical across reruns ({files} files){}", runs.len(), tail(&diffs)),
    )
}

fn main() {
    // cargo passes harness flags such as --nocapture; they are not needed here
    let mut unexpected = Vec::new();
    let mut report = |id: usize, name: &str, (pass, detail): Verdict, secs: f64| {
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && UNATTAINABLE.contains(&id) { " [recorded as unattainable]" } else { "" };
        println!("criterion {id:>2} {name}: {tag}{note} ({detail}) [{secs:.1}s]");
        if !pass && !UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    };
    let timed = |f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        (v, t.elapsed().as_secs_f64())
    };
    let (v, s) = timed(&criterion_1);
    report(1, "CFS reproduction", v, s);
    let (v, s) = timed(&criterion_2);
    report(2, "word-metric oracle", v, s);
    let (v, s) = timed(&criterion_3);
    report(3, "embedding relations", v, s);
    let walks = run_walks();
    report(4, "drift", criterion_4(&walks), walks.secs);
    let (v, s) = timed(&|| criterion_5(&walks));
    report(5, "tracking contrast", v, s);
    let (v, s) = timed(&|| criterion_6(&walks));
    report(6, "walk ray verifier", v, s);
    let (v, s) = timed(&criterion_7);
    report(7, "ray symmetry", v, s);
    let (v, s) = timed(&criterion_8);
    report(8, "connect-the-dots", v, s);
    let (v, s) = timed(&criterion_9);
    report(9, "SBE inverse", v, s);
    let (v, s) = timed(&criterion_10);
    report(10, "Morse contrast", v, s);
    let (v, s) = timed(&criterion_11);
    report(11, "determinism", v, s);
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
