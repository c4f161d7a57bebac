//! Correlators from the trace of the quantum action's exponential: the
//! sliced trace with insertions equals the time-ordered product of
//! Heisenberg operators. Also shows the constraint expectation vanishing.
//!
//! ```bash
//! cargo run --example trace_theorem
//! ```

use sqmlab::operator::Ket;
use sqmlab::random::LabRng;
use sqmlab::timeslab::{build_action, constraint_expectation, trace_theorem_lhs, trace_theorem_rhs, SliceLayout};

fn main() -> sqmlab::error::Result<()> {
    let mut rng = LabRng::seed(3);
    let (d, n, eps) = (2, 4, 0.3);
    let h = rng.hermitian(d);
    let qa = build_action(&SliceLayout::new(d, n, eps)?, &h)?;

    let ins = vec![(rng.operator(d), 0), (rng.operator(d), 2), (rng.operator(d), 3)];
    let lhs = trace_theorem_lhs(&qa, &ins)?;
    let rhs = trace_theorem_rhs(&qa, &ins)?;
    println!("Tr[e^(iS) A_0 B_2 C_3] = {lhs:.12}");
    println!("Tr[U^N C_H B_H A_H]     = {rhs:.12}");
    println!("difference              = {:.2e}", (lhs - rhs).norm());

    let o = rng.operator(d);
    let (q, qp) = (Ket::basis(&[d], 0)?, Ket::basis(&[d], 1)?);
    for t in 0..n - 1 {
        let free = constraint_expectation(&qa, &o, t, None)?;
        let pinned = constraint_expectation(&qa, &o, t, Some((&q, &qp)))?;
        println!("constraint t={t}: no boundary {:.1e}, boundary {:.1e}", free.norm(), pinned.norm());
    }
    Ok(())
}
