//! Gaussian pair correlators, the τ → 0 approach of an off-shell mode, and
//! the grid Feynman propagator against exact diagonalization.
//!
//! ```bash
//! cargo run --release --example propagators
//! ```

use sqmlab::gaussian::{feynman_propagator_grid, occupation, tau_mode_correlator, truncated_fock_pair_correlator, Point};
use sqmlab::modes::{signed_indices, ModeGrid};
use sqmlab::operator::{c, I};
use sqmlab::reference::FreeLatticeEd;

fn main() -> sqmlab::error::Result<()> {
    for lam in [c(0.5, 0.0), c(0.8, 0.6), c(2.0, -1.0)] {
        let err = (occupation(lam)? - truncated_fock_pair_correlator(lam, 40)).norm();
        println!("lambda {lam}: analytic vs n_max=40 trace {err:.1e}");
    }

    let mut grid = ModeGrid::empty(10.0, 4.0, 1.0)?;
    let p = grid.push_indexed(3, vec![1]);
    let eps_i = 0.05;
    let target = I / c(grid.modes[p].gap(), eps_i);
    let mut prev = None;
    for k in 0..5 {
        let tau = 1e-2 / 2f64.powi(k);
        let err = (tau_mode_correlator(&grid, tau, eps_i, p, p)? * tau - target).norm();
        let ratio = prev.map(|e: f64| err / e).unwrap_or(f64::NAN);
        println!("tau {tau:.2e}: error {err:.3e} ratio {ratio:.4}");
        prev = Some(err);
    }

    let n0s: Vec<i64> = (-131_072..131_072).collect();
    let fgrid = ModeGrid::product(800.0, 2.0, 1.0, &n0s, &[signed_indices(2)])?;
    let ed = FreeLatticeEd::new(2, 1.0, 12)?;
    for dt in [0.5, 1.0, -0.8] {
        let x = Point { t: dt, x: 1.0 };
        let y = Point { t: 0.0, x: 0.0 };
        let grid_val = feynman_propagator_grid(&fgrid, 1e-5, 0.01, x, y)?;
        let exact = ed.time_ordered_phi(1, 0, dt);
        println!("dt {dt:>5}: grid {grid_val:.5} ED {exact:.5} rel {:.2e}", (grid_val - exact).norm() / exact.norm());
    }
    Ok(())
}
