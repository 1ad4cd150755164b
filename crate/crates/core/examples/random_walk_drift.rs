//! Drift and tracking of simple random walks on the tree group and on
//! D∞ × D∞.

use coarse_lab::coxeter::Presentation;
use coarse_lab::graphs::{edgeless_graph, square_graph};
use coarse_lab::walks::{drift_and_tracking, dyadic_checkpoints, simulate, tracking_kappa, verify_walk_ray, StepMeasure};

fn main() -> coarse_lab::Result<()> {
    let n = 50_000;
    for (name, p) in [("tree", Presentation::coxeter(edgeless_graph(3))?), ("grid", Presentation::coxeter(square_graph())?)] {
        let mu = StepMeasure::uniform(&p);
        for seed in 1..=3 {
            let path = simulate(&p, &mu, n, seed)?;
            let rep = drift_and_tracking(&path, &dyadic_checkpoints(n))?;
            let v = verify_walk_ray(&path, rep.a_hat, &tracking_kappa(rep.c_hat, 3.0))?;
            println!(
                "{name} seed {seed}: A = {:.4}  C = {:.3}  log rss {:.1}  sqrt rss {:.1}  pairs passing {:.3}",
                rep.a_hat, rep.c_hat, rep.log_fit.rss, rep.sqrt_fit.rss, v.pass_fraction
            );
        }
    }
    Ok(())
}
