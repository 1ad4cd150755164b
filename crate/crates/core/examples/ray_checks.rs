//! (L, θ)-rays in the 3-regular tree group, the connect-the-dots completion,
//! and the planar pair where only one direction of the ray relation holds.

use coarse_lab::coxeter::Presentation;
use coarse_lab::graphs::edgeless_graph;
use coarse_lab::rays::{
    closeness_constant, connect_the_dots, counterexample_beta, equivalent_rays, geodesic_ray, log_detour_ray,
    random_geodesic_word, verify_ray, CloseMode,
};
use coarse_lab::spaces::{CayleySpace, PlaneSpace};
use coarse_lab::sublinear::SublinearFn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> coarse_lab::Result<()> {
    let tree = CayleySpace::new(Presentation::coxeter(edgeless_graph(3))?);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let core = random_geodesic_word(&tree, 1200, &mut rng);
    let log = SublinearFn::log2p();

    let detour = log_detour_ray(&tree, &core, 1024, 1, 3)?;
    for l in [1.0, 3.0] {
        let v = verify_ray(&tree, &detour, l, &log)?;
        println!("detour ray, L = {l}: ok = {} fitted scale {:.3}", v.ok, v.fitted_scale);
    }

    let geo = geodesic_ray(&tree, &core, 1)?.truncated(1024.0);
    let n = closeness_constant(&tree, &detour, &geo, &log, CloseMode::Track)?;
    println!("detour ray tracks its core with n = {n:.3}");

    let sparse = geodesic_ray(&tree, &core, 2)?;
    let c = connect_the_dots(&tree, &sparse, &log)?;
    println!("completion of a speed-2 geodesic: {} points, n = {:.3}", c.completed.len(), c.n);

    let (alpha, beta) = counterexample_beta(4096.0)?;
    let eq = equivalent_rays(&PlaneSpace, &alpha, &beta, 4096.0)?;
    println!("planar pair: dir1 slope {:.3}, dir2 slope {:.3}", eq.dir1_slope, eq.dir2_slope);
    Ok(())
}
