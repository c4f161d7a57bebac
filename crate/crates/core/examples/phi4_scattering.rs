//! Tree-level and one-loop λφ⁴ amplitudes on a 3×3 spatial lattice,
//! with a τ sweep and the Dyson-series oracle.
//!
//! ```bash
//! cargo run --release --example phi4_scattering
//! ```

use sqmlab::operator::c;
use sqmlab::phi4::{one_loop_channel, phi4_first_order_2to2, tau_sweep, Channel, Process, Regulators, ScatteringGrid};
use sqmlab::reference::LatticePhi4;
use std::f64::consts::PI;

fn main() -> sqmlab::error::Result<()> {
    let lam = 0.3;
    let grid = ScatteringGrid::new(2.0 * PI, 3, 2, 1.0, 40.0, 64)?;
    let (p1, p2, k1, k2) = ([1, 0], [-1, 0], [0, 1], [0, -1]);

    let sweep = tau_sweep(1e-2, 4, |tau| {
        phi4_first_order_2to2(&grid, Regulators { tau, eps_i: 0.05 }, lam, &p1, &p2, &k1, &k2)
    })?;
    for (tau, v) in sweep.taus.iter().zip(&sweep.values) {
        println!("tau {tau:.2e}: {v:.6}");
    }
    println!("extrapolated {:.6}, slope {:.1e}", sweep.extrapolated, sweep.slope);
    println!("-i lambda T V  {:.6}", c(0.0, -lam * grid.spacetime_volume()));
    let lat = LatticePhi4::new(grid.l_box, 3, 2, 1.0, vec![p1.to_vec(), p2.to_vec(), k1.to_vec(), k2.to_vec()])?;
    println!("Dyson oracle   {:.6}", lat.first_order(&lat.phi4(lam), grid.t_box, &[0, 1], &[2, 3]));

    let reg = Regulators { tau: 1e-2, eps_i: 0.05 };
    let bad = phi4_first_order_2to2(&grid, reg, lam, &p1, &p2, &k1, &[1, 1])?;
    println!("momentum-violating amplitude {bad}");

    let loop_grid = ScatteringGrid::new(2.0 * PI, 3, 2, 1.0, 2000.0, 12_800)?;
    let proc_ = Process::two_to_two(&p1, &p2, &k1, &k2);
    let reg = Regulators { tau: 1e-6, eps_i: 0.01 };
    let amp = one_loop_channel(&loop_grid, reg, lam, &proc_, Channel::T)?;
    println!("one-loop t-channel rate {:.6e}", amp / loop_grid.t_box);
    Ok(())
}
