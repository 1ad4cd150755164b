//! Word lengths, normal forms and balls in a right-angled Coxeter group,
//! plus the commutation relations of the elements c_i = a_i b_i.

use coarse_lab::coxeter::{check_embedding, Presentation};
use coarse_lab::graphs::ladder_graph;

fn main() -> coarse_lab::Result<()> {
    let p = Presentation::coxeter(ladder_graph(13)?)?;
    for w in ["a1 a1", "a1 b2 a1", "a1 a2 b3 a2 a1", "b2 a1 a3 b2"] {
        let word = p.parse_word(w)?;
        let nf = p.normal_form(&word);
        println!("{w:>16} -> length {} normal form [{}]", nf.len(), p.format_word(&nf));
    }

    let ball = p.ball(3)?;
    println!("sphere sizes up to radius 3: {:?}", ball.spheres);

    let rep = check_embedding(13, 10)?;
    println!("commuting neighbours: {}", rep.consecutive.iter().all(|c| c.1));
    println!("distant pairs free: {}", rep.distant.iter().all(|d| d.2));
    println!("|c_1^k|: {:?}", rep.powers);
    Ok(())
}
