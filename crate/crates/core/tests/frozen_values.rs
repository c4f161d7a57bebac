//! Reference numbers computed once with an independent dense-linear-algebra
//! script (numpy/scipy) and frozen here.

use sqmlab::fermion::dirac_small_tau_limit;
use sqmlab::operator::{c, pauli, Operator, C64};
use sqmlab::reference::FreeLatticeEd;
use sqmlab::scm::classical_flow_bracket;
use sqmlab::timeslab::{build_action, trace_theorem_lhs, SliceLayout};

#[test]
fn two_site_time_ordered_field() {
    // (1/2) Σ_{k ∈ {0, π}} cos(kx) e^{−iE_k t}/(2E_k), E_k = √(k² + 1).
    let frozen = [
        (0.5, 0, c(0.21351287179040734, -0.1954564660301759)),
        (0.5, 1, c(0.22527840915477904, -0.044256303271925604)),
        (1.2, 0, c(0.03856428601922344, -0.1778430898003101)),
        (1.2, 1, c(0.14261459121911338, -0.28817645318330304)),
    ];
    let ed = FreeLatticeEd::new(2, 1.0, 14).unwrap();
    for (t, x, v) in frozen {
        let got = ed.time_ordered_phi(x, 0, t);
        assert!((got - v).norm() < 1e-6, "t={t} x={x}: {got} vs {v}");
        // Time ordering makes the function even in t.
        assert!((ed.time_ordered_phi(0, x, -t) - v).norm() < 1e-6);
    }
}

#[test]
fn chain_flow_bracket() {
    let frozen = [0.21630364729148466, 0.37258121691036505, -0.1142109700987988, 0.37258121691036516];
    for (y, v) in frozen.into_iter().enumerate() {
        assert!((classical_flow_bracket(4, 0.8, 0.7, 0, y) - v).abs() < 1e-12);
    }
}

#[test]
fn dirac_rest_frame_limit() {
    let lim = dirac_small_tau_limit([0.4, 0.0, 0.0, 0.0], 1.0, 1e-3);
    let upper = c(0.0013888871720702453, -1.6666651620390338);
    let lower = c(0.0002551019308361778, -0.7142855594024167);
    for (a, v) in [(0, upper), (1, upper), (2, lower), (3, lower)] {
        assert!((lim[(a, a)] - v).norm() < 1e-12, "{a}: {}", lim[(a, a)]);
    }
}

#[test]
fn two_slice_trace() {
    let h = Operator::from_rows(2, &[c(0.3, 0.0), c(0.2, -0.1), c(0.2, 0.1), c(-0.5, 0.0)]).unwrap();
    let qa = build_action(&SliceLayout::new(2, 2, 0.4).unwrap(), &h).unwrap();
    let got = trace_theorem_lhs(&qa, &[(pauli::x(), 0), (pauli::z(), 1)]).unwrap();
    let frozen: C64 = c(-0.05046719605024079, -0.004046010858866675);
    assert!((got - frozen).norm() < 1e-14, "{got}");
}
