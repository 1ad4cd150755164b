//! Four-cycle graphs of the 13-ladder with and without the extra 5-cycle.

use coarse_lab::graphs::{add_cycle, cycle_labels, four_cycle_graph, is_cfs, ladder_graph};

fn main() -> coarse_lab::Result<()> {
    let ladder = ladder_graph(13)?;
    let pent = add_cycle(&ladder, &["a1", "a4", "a7", "a10", "a13"])?;
    for (name, g) in [("ladder", &ladder), ("ladder+pentagon", &pent)] {
        let v = is_cfs(g);
        println!("{name}: {} edges, |Lambda| = {}, CFS = {}", g.edge_count(), v.lambda_vertices, v.verdict);
    }

    // the cycles the pentagon adds
    let old = four_cycle_graph(&ladder);
    let new = four_cycle_graph(&pent);
    for c in new.cycles.iter().filter(|c| old.position(c).is_none()) {
        println!("  new: {}", cycle_labels(&pent, c));
    }
    Ok(())
}
