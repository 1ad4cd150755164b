//! A synthetic log-SBE of the tree group, its quasi-inverse, and the image
//! of a geodesic ray.

use std::sync::Arc;

use coarse_lab::coxeter::Presentation;
use coarse_lab::graphs::edgeless_graph;
use coarse_lab::rays::{geodesic_ray, random_geodesic_word, verify_ray};
use coarse_lab::sbe::{ball_sample, push_ray, quasi_inverse, symmetrized_sample, synthetic_sbe, verify_sbe};
use coarse_lab::spaces::CayleySpace;
use coarse_lab::sublinear::SublinearFn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> coarse_lab::Result<()> {
    let tree = Arc::new(CayleySpace::new(Presentation::coxeter(edgeless_graph(3))?));
    let phi = synthetic_sbe(tree.clone(), 1.0, SublinearFn::log2p(), 11)?;
    let dom = symmetrized_sample(&tree, &ball_sample(&tree, 256, 50, 2, 8, 11));
    let img: Vec<_> = dom.iter().map(|x| phi.apply(x)).collect::<coarse_lab::Result<_>>()?;

    let v = verify_sbe(&phi, &dom, &img)?;
    println!("phi: ok = {} scale {:.3} (budget {})", v.ok, v.fitted_theta_scale, phi.budget);

    // closed under the graph automorphisms, and the target is the same tree
    let q = quasi_inverse(&phi, &dom, &dom)?;
    let vb = verify_sbe(&q.phi_bar, &dom, &dom)?;
    println!("inverse: defect n = {:.3}, ok = {} scale {:.3} (budget {:.3})", q.defect_n, vb.ok, vb.fitted_theta_scale, q.phi_bar.budget);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ray = geodesic_ray(&tree, &random_geodesic_word(&tree, 256, &mut rng), 1)?;
    let pushed = push_ray(&phi, &ray)?;
    let r = verify_ray(&*tree, &pushed, 1.0, &SublinearFn::log(4.0, 0.0)?)?;
    println!("pushed geodesic as a (1, 4 log)-ray: ok = {} scale {:.3}", r.ok, r.fitted_scale);
    Ok(())
}
