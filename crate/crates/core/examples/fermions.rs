//! Gamma matrices, the fSWAP network for the fermionic cycle shift,
//! parity-weighted traces and the Dirac mode propagator.
//!
//! ```bash
//! cargo run --example fermions
//! ```

use sqmlab::fermion::{
    cycle_boundary_sign, cycle_from_rotations, cycle_shift_defect, dirac_tau_errors, fermionic_cycle, fswap, gamma_set,
    parity_pair_correlator, parity_weighted_trace, FermionLayout,
};
use sqmlab::operator::c;
use sqmlab::random::LabRng;

fn main() -> sqmlab::error::Result<()> {
    println!("Clifford defect {:.1e}", gamma_set().clifford_defect());
    let f = fswap();
    for r in 0..4 {
        let row: Vec<String> = (0..4).map(|k| format!("{:3}", f.get(r, k).re)).collect();
        println!("fswap | {} |", row.join(" "));
    }

    for (n, m) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
        let l = FermionLayout::new(n, m)?;
        let u = fermionic_cycle(l);
        println!(
            "N={n} M={m}: shift defect {:.1e}, vs rotations {:.1e}, boundary sign {:+}",
            cycle_shift_defect(l, &u)?,
            u.max_abs_diff(&cycle_from_rotations(l)?),
            cycle_boundary_sign(n)
        );
    }

    let l = FermionLayout::new(1, 4)?;
    let mut rng = LabRng::seed(2);
    let h = rng.ginibre(4) * c(0.5, 0.0);
    let tau = 0.6;
    let s = l.quadratic(&h)?;
    let analytic = parity_pair_correlator(&(&h * c(0.0, -tau)))?;
    let dense = parity_weighted_trace(l, &s, tau, &[l.annihilator(1)?, l.creator(2)?])?;
    println!("<c_1 c_2†>: dense {dense:.10} analytic {:.10}", analytic[(1, 2)]);

    let taus = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let errs = dirac_tau_errors([0.4, 0.1, 0.0, 0.2], 1.0, 1e-3, &taus)?;
    for w in errs.windows(2) {
        println!("Dirac propagator error ratio {:.4}", w[1] / w[0]);
    }
    Ok(())
}
