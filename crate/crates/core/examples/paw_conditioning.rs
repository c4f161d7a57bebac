//! Clock-conditioned expectation values on a history state versus ordinary
//! Schrödinger evolution.
//!
//! ```bash
//! cargo run --example paw_conditioning
//! ```

use sqmlab::clock::{conditioned_expectation, history_state, universe_residual, ClockSystem};
use sqmlab::random::LabRng;
use sqmlab::reference::schrodinger_expectation;

fn main() -> sqmlab::error::Result<()> {
    let mut rng = LabRng::seed(7);
    let (d, n, eps) = (3, 8, 0.25);
    let h = rng.hermitian(d);
    let psi0 = rng.ket(d);
    let o = rng.hermitian(d);

    let cs = ClockSystem::new(n, eps, h.clone(), psi0.clone())?;
    println!("history state dimension {}", history_state(&cs).dim());
    println!("universe constraint residual {:.2e}", universe_residual(&cs));
    println!("{:>3} {:>22} {:>22} {:>10}", "t", "conditioned", "schrodinger", "diff");
    for t in 0..n {
        let cond = conditioned_expectation(&cs, &o, t)?;
        let exact = schrodinger_expectation(&h, &psi0, &o, eps * t as f64);
        println!("{t:>3} {:>22.15} {:>22.15} {:>10.1e}", cond.re, exact.re, (cond - exact).norm());
    }
    Ok(())
}
