//! Spacetime states: unit-trace, generally non-hermitian operators on the
//! sliced space whose single-slice marginals are the evolved states.
//!
//! R = (|ψ0⟩⟨ψ0|·expm(+iεNH) on slice 0) · cycle · ⊗_t expm(−iεH).
//! The slice-0 factor undoes the N steps of evolution accumulated around
//! the cycle, so Tr[R] = 1 before any rescaling.

use crate::error::{LabError, Result};
use crate::operator::{c, evolution, kron_all, mpow, partial_trace, Ket, Operator, C64};
use crate::timeslab::{build_action, embed_at_slice, trace_of_product, SliceLayout};

#[derive(Debug, Clone)]
pub struct SpacetimeState {
    /// Normalized R, one tensor factor per slice.
    pub r: Operator,
    pub layout: SliceLayout,
    pub psi0: Ket,
    pub h: Operator,
    /// Trace of R before normalization.
    pub raw_trace: C64,
}

/// Spacetime state on slices of dimension `psi0.dim()`.
#[allow(non_snake_case)]
pub fn build_R(psi0: &Ket, h: &Operator, eps: f64, n: usize) -> Result<SpacetimeState> {
    let layout = SliceLayout::new(psi0.dim(), n, eps)?;
    build_R_on(&layout, psi0, h)
}

/// As [`build_R`] on a layout that may carry a per-slice site factorization.
#[allow(non_snake_case)]
pub fn build_R_on(layout: &SliceLayout, psi0: &Ket, h: &Operator) -> Result<SpacetimeState> {
    if psi0.dim() != layout.d {
        return Err(LabError::Dimension("psi0 does not live on one slice".into()));
    }
    if !psi0.is_normalized() {
        return Err(LabError::Invalid("psi0 must be normalized".into()));
    }
    let h = h.clone().with_dims(vec![layout.d])?;
    let qa = build_action(layout, &h)?;
    let total_time = layout.eps * layout.n as f64;
    let psi = Ket::new(vec![layout.d], psi0.vector().clone())?;
    let head = &psi.projector() * &evolution(&h, -total_time);
    let r = &embed_at_slice(&head, 0, layout)? * &qa.exp_action;
    let raw_trace = r.trace();
    if raw_trace.norm() < 1e-300 {
        return Err(LabError::Invalid("spacetime state has zero trace".into()));
    }
    Ok(SpacetimeState {
        r: r.scale(raw_trace.inv()),
        layout: layout.clone(),
        psi0: psi,
        h,
        raw_trace,
    })
}

impl SpacetimeState {
    /// U^t |ψ0⟩.
    pub fn evolved(&self, t: usize) -> Ket {
        evolution(&self.h, self.layout.eps * t as f64).apply(&self.psi0)
    }

    /// Tr[R · ∏ embed(O_k, t_k)], one insertion per slice.
    pub fn correlator(&self, inserts: &[(Operator, usize)]) -> Result<C64> {
        let prod = product_of_inserts(&self.layout, inserts)?;
        Ok(trace_of_product(&self.r, &prod))
    }

    /// Tr[R† · ∏ embed(O_k, t_k)].
    pub fn anti_correlator(&self, inserts: &[(Operator, usize)]) -> Result<C64> {
        let prod = product_of_inserts(&self.layout, inserts)?;
        Ok(trace_of_product(&self.r.adjoint(), &prod))
    }
}

fn product_of_inserts(layout: &SliceLayout, inserts: &[(Operator, usize)]) -> Result<Operator> {
    let mut factors = vec![Operator::identity(&[layout.d]); layout.n];
    let mut seen = vec![false; layout.n];
    for (o, t) in inserts {
        if *t >= layout.n {
            return Err(LabError::IndexOutOfRange {
                index: *t,
                limit: layout.n,
            });
        }
        if seen[*t] {
            return Err(LabError::DuplicateSlice(*t));
        }
        seen[*t] = true;
        factors[*t] = o.clone().with_dims(vec![layout.d])?;
    }
    kron_all(&factors)?.with_dims(layout.slice_dims())
}

/// Reduced operator on one slice.
pub fn marginal(st: &SpacetimeState, slice: usize) -> Result<Operator> {
    if slice >= st.layout.n {
        return Err(LabError::IndexOutOfRange {
            index: slice,
            limit: st.layout.n,
        });
    }
    partial_trace(&st.r, &[slice])
}

/// Tr[(R − R†)·(A on slice 0 ⊗ B on slice t)], equal to ⟨ψ|[B_H(εt), A]|ψ⟩.
pub fn causality_witness(st: &SpacetimeState, a: &Operator, b: &Operator, t: usize) -> Result<C64> {
    if t == 0 {
        return Err(LabError::Invalid("B must sit on a later slice than A".into()));
    }
    let ins = [(a.clone(), 0), (b.clone(), t)];
    Ok(st.correlator(&ins)? - st.anti_correlator(&ins)?)
}

/// (Rᵏ, Tr[Rᵏ]) for integer k ≥ 1.
pub fn power_and_pseudoentropy(st: &SpacetimeState, k: u32) -> Result<(Operator, C64)> {
    if k == 0 {
        return Err(LabError::Invalid("k must be positive".into()));
    }
    let rk = mpow(&st.r, k as u64);
    let tr = rk.trace();
    Ok((rk, tr))
}

/// Rényi pseudo-entropy −log(Tr[Rᵏ])/(k−1) on the principal branch, k ≥ 2.
pub fn renyi_pseudo_entropy(trace_rk: C64, k: u32) -> Result<C64> {
    if k < 2 {
        return Err(LabError::Invalid("Renyi order must be at least 2".into()));
    }
    Ok(-trace_rk.ln() / c((k - 1) as f64, 0.0))
}

/// Result of [`reduce_to_region`].
#[derive(Debug, Clone)]
pub struct RegionReport {
    pub reduced: Operator,
    /// ‖R_reg − R_reg†‖_F / ‖R_reg‖_F.
    pub hermiticity_deviation: f64,
    /// Complex spectrum, sorted by real part.
    pub eigenvalues: Vec<C64>,
}

/// Partial trace onto a set of (slice, site) factors.
pub fn reduce_to_region(st: &SpacetimeState, region: &[(usize, usize)]) -> Result<RegionReport> {
    if region.is_empty() {
        return Err(LabError::Invalid("empty region".into()));
    }
    let layout = &st.layout;
    let mut keep = Vec::with_capacity(region.len());
    for &(slice, site) in region {
        if slice >= layout.n {
            return Err(LabError::IndexOutOfRange {
                index: slice,
                limit: layout.n,
            });
        }
        if site >= layout.site_dims.len() {
            return Err(LabError::IndexOutOfRange {
                index: site,
                limit: layout.site_dims.len(),
            });
        }
        keep.push(layout.site_factor(slice, site));
    }
    let fine = st.r.clone().with_dims(layout.site_level_dims())?;
    let reduced = partial_trace(&fine, &keep)?;
    Ok(RegionReport {
        hermiticity_deviation: reduced.hermiticity_deviation(),
        eigenvalues: reduced.eigenvalues(),
        reduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{kron, pauli, ONE};
    use crate::random::LabRng;
    use crate::timeslab::cycle_shift;

    #[test]
    fn build_examples() {
        let mut rng = LabRng::seed(3);
        let psi = rng.ket(2);
        let st = build_R(&psi, &Operator::zeros(&[2]), 0.2, 2).unwrap();
        let l = SliceLayout::new(2, 2, 0.2).unwrap();
        let expect = &kron(&psi.projector(), &Operator::identity(&[2])) * &cycle_shift(&l);
        assert!(st.r.max_abs_diff(&expect.scale(expect.trace().inv())) < 1e-14);
        let h = rng.hermitian(2);
        let single = build_R(&psi, &h, 0.2, 1).unwrap();
        assert!(single.r.max_abs_diff(&psi.projector()) < 1e-13);
        assert!((st.raw_trace - ONE).norm() < 1e-13);
    }

    #[test]
    fn marginals_follow_evolution() {
        let mut rng = LabRng::seed(8);
        let psi = rng.ket(2);
        let h = rng.hermitian(2);
        let st = build_R(&psi, &h, 0.35, 2).unwrap();
        assert!((st.raw_trace - ONE).norm() < 1e-12);
        assert!(marginal(&st, 0).unwrap().max_abs_diff(&psi.projector()) < 1e-12);
        let later = evolution(&h, 0.35).apply(&psi).projector();
        assert!(marginal(&st, 1).unwrap().max_abs_diff(&later) < 1e-12);
        let flat = build_R(&psi, &Operator::zeros(&[2]), 0.35, 3).unwrap();
        for t in 0..3 {
            assert!(marginal(&flat, t).unwrap().max_abs_diff(&psi.projector()) < 1e-13);
        }
    }

    #[test]
    fn witness_examples() {
        let mut rng = LabRng::seed(12);
        let psi = rng.ket(2);
        let st0 = build_R(&psi, &Operator::zeros(&[2]), 0.3, 2).unwrap();
        let z = pauli::z();
        assert!(causality_witness(&st0, &z, &z, 1).unwrap().norm() < 1e-14);
        let id = Operator::identity(&[2]);
        assert!(causality_witness(&st0, &id, &id, 1).unwrap().norm() < 1e-14);

        let w = 1.7;
        let eps = 0.3;
        let h = pauli::z().scale(c(w / 2.0, 0.0));
        let st = build_R(&psi, &h, eps, 2).unwrap();
        let x = pauli::x();
        let xh = &(&evolution(&h, -eps) * &x) * &evolution(&h, eps);
        let tmp = &xh * &x;
        let oracle = c(0.0, 2.0 * tmp.sandwich(&psi, &psi).im);
        let got = causality_witness(&st, &x, &x, 1).unwrap();
        assert!((got - oracle).norm() < 1e-12);
        assert!(causality_witness(&st, &x, &x, 0).is_err());
    }

    #[test]
    fn powers_examples() {
        let mut rng = LabRng::seed(14);
        let psi = rng.ket(2);
        let h = rng.hermitian(2);
        let st = build_R(&psi, &h, 0.4, 3).unwrap();
        for k in 1..=6 {
            let (_, tr) = power_and_pseudoentropy(&st, k).unwrap();
            assert!((tr - ONE).norm() < 1e-10, "k={k} tr={tr}");
        }
        let (r3, _) = power_and_pseudoentropy(&st, 3).unwrap();
        let prod = kron_all(&(0..3).map(|t| st.evolved(t).projector()).collect::<Vec<_>>()).unwrap();
        assert!(r3.max_abs_diff(&prod) < 1e-10);
        assert!(renyi_pseudo_entropy(ONE, 2).unwrap().norm() < 1e-15);
        assert!(power_and_pseudoentropy(&st, 0).is_err());
    }

    #[test]
    fn region_examples() {
        let mut rng = LabRng::seed(15);
        let layout = SliceLayout::with_sites(vec![2, 2], 2, 0.5).unwrap();
        let hop = &kron(&pauli::x(), &pauli::x()) + &kron(&pauli::z(), &Operator::identity(&[2]));
        let psi = rng.ket(4);
        let st = build_R_on(&layout, &psi, &hop, ).unwrap();
        let slice = reduce_to_region(&st, &[(1, 0), (1, 1)]).unwrap();
        assert!(slice.hermiticity_deviation < 1e-10);
        assert!((slice.reduced.trace() - ONE).norm() < 1e-12);
        assert!(slice.eigenvalues.iter().all(|e| e.re > -1e-10 && e.im.abs() < 1e-10));
        let all = reduce_to_region(&st, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert!(all.reduced.max_abs_diff(&st.r) < 1e-15);
        let timelike = reduce_to_region(&st, &[(0, 0), (1, 0)]).unwrap();
        assert!(timelike.hermiticity_deviation > 1e-3);
        assert!(reduce_to_region(&st, &[]).is_err());
    }
}
