//! Spacetime states: marginals, powers, the causality witness and
//! region reductions.
//!
//! ```bash
//! cargo run --example spacetime_states
//! ```

use sqmlab::operator::pauli;
use sqmlab::random::LabRng;
use sqmlab::spacetime::{
    build_R, build_R_on, causality_witness, marginal, power_and_pseudoentropy, reduce_to_region, renyi_pseudo_entropy,
};
use sqmlab::timeslab::SliceLayout;

fn main() -> sqmlab::error::Result<()> {
    let mut rng = LabRng::seed(21);
    let psi = rng.ket(2);
    let h = rng.hermitian(2);
    let st = build_R(&psi, &h, 0.4, 3)?;

    println!("R hermiticity deviation {:.3}", st.r.hermiticity_deviation());
    for t in 0..3 {
        let diff = marginal(&st, t)?.max_abs_diff(&st.evolved(t).projector());
        println!("marginal slice {t} vs evolved state: {diff:.1e}");
    }
    for k in 2..=4 {
        let (_, tr) = power_and_pseudoentropy(&st, k)?;
        println!("Tr[R^{k}] = {tr:.12}  S_{k} = {:.1e}", renyi_pseudo_entropy(tr, k)?.norm());
    }
    let w = causality_witness(&st, &pauli::x(), &pauli::x(), 1)?;
    println!("causality witness <[X_H(eps), X]> = {w:.6}");

    let layout = SliceLayout::with_sites(vec![2, 2], 2, 0.4)?;
    let st2 = build_R_on(&layout, &rng.ket(4), &rng.hermitian(4))?;
    for region in [vec![(0, 0)], vec![(0, 0), (0, 1)], vec![(0, 0), (1, 1)]] {
        let rep = reduce_to_region(&st2, &region)?;
        println!("region {region:?}: hermiticity deviation {:.2e}", rep.hermiticity_deviation);
    }
    Ok(())
}
