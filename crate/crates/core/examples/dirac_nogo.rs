//! Constraint classification and Dirac brackets on a chain mode grid with
//! off-shell companions, and the field bracket they reconstruct.
//!
//! ```bash
//! cargo run --example dirac_nogo
//! ```

use sqmlab::scm::{
    build_constraints, chain_grid, classical_flow_bracket, classify, dirac_bracket, equal_time_bracket_reconstruction,
    LinearObservable,
};

fn main() -> sqmlab::error::Result<()> {
    let (l, mass) = (4, 0.8);
    let grid = chain_grid(l, mass, 10.0, &[1, -1])?;
    let cs = build_constraints(&grid);
    let m = grid.len();
    for c in classify(&cs) {
        let db = dirac_bracket(&LinearObservable::a(m, c.mode), &LinearObservable::a_star(m, c.mode), &cs)?;
        println!("mode {:>2} gap {:>8.4} {:?} {{a,a*}}_DB = {db:.3}", c.mode, c.gap, c.class);
    }
    println!("equal-time {{phi_x, pi_y}}:");
    for x in 0..l {
        let row: Vec<String> = (0..l)
            .map(|y| format!("{:6.3}", equal_time_bracket_reconstruction(&grid, x, y, 0.0, 0.0).unwrap().re))
            .collect();
        println!("  {}", row.join(" "));
    }
    let v = equal_time_bracket_reconstruction(&grid, 0, 1, 0.5, 0.0)?;
    println!("unequal time: {:.10} vs classical flow {:.10}", v.re, classical_flow_bracket(l, mass, 0.5, 0, 1));
    Ok(())
}
