//! Morse gauges of a tree geodesic against the staircase witnesses of the
//! diagonal in D∞ × D∞.

use coarse_lab::coxeter::Presentation;
use coarse_lab::graphs::{edgeless_graph, square_graph};
use coarse_lab::morse::{certify_tree_gauge, morse_gauge_probe, non_morse_witness};
use coarse_lab::rays::{geodesic_ray, random_geodesic_word};
use coarse_lab::spaces::CayleySpace;
use coarse_lab::sublinear::SublinearFn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> coarse_lab::Result<()> {
    let tree = CayleySpace::new(Presentation::coxeter(edgeless_graph(3))?);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let z = geodesic_ray(&tree, &random_geodesic_word(&tree, 600, &mut rng), 1)?;
    let rep = morse_gauge_probe(&tree, &z, &SublinearFn::one(), &[1.0, 2.0], &[0.0, 2.0], &[16, 32, 64], 50, 4)?;
    for c in &rep.cells {
        println!("tree q={} Q={} r={:>3}: gauge {:.2}", c.q, c.big_q, c.r, c.gauge);
    }
    println!("exhaustive (2,2) bound: {}", certify_tree_gauge(&tree, 2.0, 2.0)?);

    let grid = CayleySpace::new(Presentation::coxeter(square_graph())?);
    let pat = grid.presentation().parse_word("x1 y1 x2 y2")?;
    let diag = geodesic_ray(&grid, &pat.power(160), 1)?;
    for r in [16, 32, 64] {
        match non_morse_witness(&grid, &diag, r, 200) {
            Some(w) => println!("grid r={r}: witness of length {} at deviation {}", w.path.len() - 1, w.deviation),
            None => println!("grid r={r}: no witness"),
        }
    }
    Ok(())
}
