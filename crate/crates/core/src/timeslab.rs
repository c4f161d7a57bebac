//! Time-sliced tensor space h^{⊗N}, the cyclic slice shift, and the
//! quantum-action exponential `cycle · ⊗_t expm(−iεH)`.
//!
//! Slice 0 is the slowest tensor index.

use crate::error::{LabError, Result};
use crate::operator::{c, evolution, kron_all, Ket, Operator, C64, ONE};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Upper bound on d^N for dense sliced operators.
pub const SLICE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SliceLayout {
    pub d: usize,
    pub n: usize,
    pub eps: f64,
    /// Optional spatial factorization of one slice; product equals `d`.
    pub site_dims: Vec<usize>,
}

impl SliceLayout {
    pub fn new(d: usize, n: usize, eps: f64) -> Result<Self> {
        Self::with_sites(vec![d], n, eps)
    }

    pub fn with_sites(site_dims: Vec<usize>, n: usize, eps: f64) -> Result<Self> {
        let d: usize = site_dims.iter().product();
        if n == 0 || d == 0 {
            return Err(LabError::Invalid("layout needs N >= 1 and d >= 1".into()));
        }
        let size = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if size > SLICE_CAP as u128 {
            return Err(LabError::CapExceeded {
                size: size.min(usize::MAX as u128) as usize,
                cap: SLICE_CAP,
            });
        }
        Ok(Self {
            d,
            n,
            eps,
            site_dims,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    /// One factor per slice.
    pub fn slice_dims(&self) -> Vec<usize> {
        vec![self.d; self.n]
    }

    /// One factor per (slice, site), slice-major.
    pub fn site_level_dims(&self) -> Vec<usize> {
        (0..self.n).flat_map(|_| self.site_dims.iter().copied()).collect()
    }

    /// Factor index of (slice, site) in `site_level_dims`.
    pub fn site_factor(&self, slice: usize, site: usize) -> usize {
        slice * self.site_dims.len() + site
    }

    fn check_slice(&self, t: usize) -> Result<()> {
        if t >= self.n {
            return Err(LabError::IndexOutOfRange {
                index: t,
                limit: self.n,
            });
        }
        Ok(())
    }
}

/// Permutation |i₀ i₁ … i_{N−1}⟩ → |i_{N−1} i₀ … i_{N−2}⟩.
pub fn cycle_shift(layout: &SliceLayout) -> Operator {
    let d = layout.d;
    let dim = layout.total_dim();
    let block = dim / d;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for input in 0..dim {
        // The last digit moves to the front, the rest shift one place right.
        let last = input % d;
        let out = last * block + input / d;
        m[(out, input)] = ONE;
    }
    Operator::new(layout.slice_dims(), m).expect("square")
}

/// I^{⊗t} ⊗ O ⊗ I^{⊗(N−1−t)}.
pub fn embed_at_slice(o: &Operator, t: usize, layout: &SliceLayout) -> Result<Operator> {
    layout.check_slice(t)?;
    if o.dim() != layout.d {
        return Err(LabError::Dimension(format!(
            "operator of size {} on slices of size {}",
            o.dim(),
            layout.d
        )));
    }
    let id = Operator::identity(&[layout.d]);
    let mut factors: Vec<Operator> = vec![id; layout.n];
    factors[t] = o.clone().with_dims(vec![layout.d])?;
    kron_all(&factors)?.with_dims(layout.slice_dims())
}

#[derive(Debug, Clone)]
pub struct QuantumAction {
    pub layout: SliceLayout,
    pub h: Operator,
    /// Single-slice step expm(−iεH).
    pub step: Operator,
    pub exp_action: Operator,
}

pub fn build_action(layout: &SliceLayout, h: &Operator) -> Result<QuantumAction> {
    if h.dim() != layout.d {
        return Err(LabError::Dimension("H does not act on one slice".into()));
    }
    if !h.is_hermitian(1e-12 * (1.0 + h.norm())) {
        return Err(LabError::Invalid("H must be hermitian".into()));
    }
    let step = evolution(h, layout.eps).with_dims(vec![layout.d])?;
    let all = kron_all(&vec![step.clone(); layout.n])?.with_dims(layout.slice_dims())?;
    let exp_action = &cycle_shift(layout) * &all;
    Ok(QuantumAction {
        layout: layout.clone(),
        h: h.clone(),
        step,
        exp_action,
    })
}

/// Per-slice factor list with identities where nothing is inserted.
fn slice_factors(layout: &SliceLayout, inserts: &[(Operator, usize)]) -> Result<Vec<Operator>> {
    let mut factors: Vec<Option<Operator>> = vec![None; layout.n];
    for (o, t) in inserts {
        layout.check_slice(*t)?;
        if o.dim() != layout.d {
            return Err(LabError::Dimension("insert does not act on one slice".into()));
        }
        if factors[*t].is_some() {
            return Err(LabError::DuplicateSlice(*t));
        }
        factors[*t] = Some(o.clone().with_dims(vec![layout.d])?);
    }
    Ok(factors
        .into_iter()
        .map(|f| f.unwrap_or_else(|| Operator::identity(&[layout.d])))
        .collect())
}

/// Tr[A·B] without forming the product; row sums run in parallel, the final
/// sum is sequential so results do not depend on thread scheduling.
pub fn trace_of_product(a: &Operator, b: &Operator) -> C64 {
    let (am, bm) = (a.matrix(), b.matrix());
    let n = am.nrows();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                s += am[(i, j)] * bm[(j, i)];
            }
            s
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

/// Tr[exp_action · ∏_k embed(O_k, t_k)].
pub fn trace_theorem_lhs(qa: &QuantumAction, inserts: &[(Operator, usize)]) -> Result<C64> {
    let product = kron_all(&slice_factors(&qa.layout, inserts)?)?.with_dims(qa.layout.slice_dims())?;
    Ok(trace_of_product(&qa.exp_action, &product))
}

/// tr[expm(−iεNH) · O_H(εt_k) ⋯ O_H(εt_1)] on one slice, t₁ < … < t_k.
pub fn trace_theorem_rhs(qa: &QuantumAction, inserts: &[(Operator, usize)]) -> Result<C64> {
    slice_factors(&qa.layout, inserts)?;
    let mut sorted: Vec<&(Operator, usize)> = inserts.iter().collect();
    sorted.sort_by_key(|(_, t)| *t);
    let eps = qa.layout.eps;
    let mut acc = evolution(&qa.h, eps * qa.layout.n as f64).with_dims(vec![qa.layout.d])?;
    for (o, t) in sorted.iter().rev() {
        let time = eps * *t as f64;
        let o = o.clone().with_dims(vec![qa.layout.d])?;
        let heis = &(&evolution(&qa.h, -time) * &o) * &evolution(&qa.h, time);
        acc = &acc * &heis;
    }
    Ok(acc.trace())
}

/// Tr[B · E · (E·O_t·E† − O_t)] with B = |q⟩⟨q′| on slice 0, or B = I.
pub fn constraint_expectation(
    qa: &QuantumAction,
    o: &Operator,
    t: usize,
    boundary: Option<(&Ket, &Ket)>,
) -> Result<C64> {
    let layout = &qa.layout;
    if boundary.is_some() && t + 1 >= layout.n {
        return Err(LabError::Invalid(format!(
            "boundary insertions need t < N−1 (t = {t}, N = {})",
            layout.n
        )));
    }
    let e = &qa.exp_action;
    let ot = embed_at_slice(o, t, layout)?;
    let moved = &(&(e * &ot) * &e.adjoint()) - &ot;
    let inner = e * &moved;
    match boundary {
        None => Ok(inner.trace()),
        Some((q, qp)) => {
            let b = embed_at_slice(&q.outer(qp).with_dims(vec![layout.d])?, 0, layout)?;
            Ok(trace_of_product(&b, &inner))
        }
    }
}

/// expm(−iεH) with H → H/ħ, ε → εħ; equal to `build_action(H)` for any ħ > 0.
pub fn build_action_hbar(layout: &SliceLayout, h: &Operator, hbar: f64) -> Result<QuantumAction> {
    let scaled = SliceLayout {
        eps: layout.eps * hbar,
        ..layout.clone()
    };
    build_action(&scaled, &h.scale(c(1.0 / hbar, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{kron, mpow, pauli};
    use crate::random::LabRng;

    #[test]
    fn cycle_examples() {
        let l1 = SliceLayout::new(3, 1, 0.1).unwrap();
        assert_eq!(cycle_shift(&l1), Operator::identity(&[3]));
        let l2 = SliceLayout::new(2, 2, 0.1).unwrap();
        let swap = Operator::from_rows(
            4,
            &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.].map(|x| c(x, 0.0)),
        )
        .unwrap();
        assert_eq!(cycle_shift(&l2).matrix(), swap.matrix());
        let l3 = SliceLayout::new(2, 3, 0.1).unwrap();
        let p = cycle_shift(&l3);
        assert_eq!(mpow(&p, 3).matrix(), Operator::identity(&[8]).matrix());
        // |100⟩ (index 4) → |010⟩ (index 2); |001⟩ → |100⟩.
        assert_eq!(p.get(2, 4), ONE);
        assert_eq!(p.get(4, 1), ONE);
    }

    #[test]
    fn embed_examples() {
        let l = SliceLayout::new(2, 3, 0.1).unwrap();
        let id = embed_at_slice(&Operator::identity(&[2]), 1, &l).unwrap();
        assert_eq!(id.matrix(), Operator::identity(&[8]).matrix());
        let a = embed_at_slice(&pauli::x(), 0, &l).unwrap();
        let b = embed_at_slice(&pauli::y(), 2, &l).unwrap();
        assert!(a.commutator(&b).norm() < 1e-15);
        let p = cycle_shift(&l);
        for t in 0..3 {
            let o = LabRng::seed(t as u64).operator(2);
            let lhs = &(&p * &embed_at_slice(&o, t, &l).unwrap()) * &p.adjoint();
            let rhs = embed_at_slice(&o, (t + 1) % 3, &l).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        }
        assert!(embed_at_slice(&Operator::identity(&[3]), 0, &l).is_err());
        assert!(embed_at_slice(&pauli::x(), 3, &l).is_err());
    }

    #[test]
    fn action_examples() {
        let mut rng = LabRng::seed(9);
        let h = rng.hermitian(2);
        let l2 = SliceLayout::new(2, 2, 0.3).unwrap();
        let zero = build_action(&l2, &Operator::zeros(&[2])).unwrap();
        assert!(zero.exp_action.max_abs_diff(&cycle_shift(&l2)) < 1e-15);
        let l1 = SliceLayout::new(2, 1, 0.3).unwrap();
        let one = build_action(&l1, &h).unwrap();
        assert!(one.exp_action.max_abs_diff(&evolution(&h, 0.3)) < 1e-14);
        let qa = build_action(&l2, &h).unwrap();
        let u = evolution(&h, 0.3);
        let expect = &cycle_shift(&l2) * &kron(&u, &u);
        assert!(qa.exp_action.max_abs_diff(&expect) < 1e-14);
        assert!(qa.exp_action.unitarity_defect() < 1e-12);
    }

    #[test]
    fn trace_theorem_examples() {
        let l2 = SliceLayout::new(2, 2, 0.3).unwrap();
        let qa = build_action(&l2, &Operator::zeros(&[2])).unwrap();
        assert!((trace_theorem_lhs(&qa, &[]).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        assert!((trace_theorem_rhs(&qa, &[]).unwrap() - c(2.0, 0.0)).norm() < 1e-15);

        let mut rng = LabRng::seed(21);
        let h = rng.hermitian(3);
        let o = rng.operator(3);
        let l1 = SliceLayout::new(3, 1, 0.2).unwrap();
        let qa = build_action(&l1, &h).unwrap();
        let direct = (&evolution(&h, 0.2) * &o).trace();
        assert!((trace_theorem_lhs(&qa, &[(o.clone(), 0)]).unwrap() - direct).norm() < 1e-12);

        let l = SliceLayout::new(3, 4, 0.2).unwrap();
        let qa = build_action(&l, &h).unwrap();
        let ins = vec![(rng.operator(3), 3), (rng.operator(3), 1)];
        let lhs = trace_theorem_lhs(&qa, &ins).unwrap();
        let rhs = trace_theorem_rhs(&qa, &ins).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));

        let dup = vec![(o.clone(), 1), (o, 1)];
        assert_eq!(trace_theorem_lhs(&qa, &dup), Err(LabError::DuplicateSlice(1)));
    }

    #[test]
    fn constraint_examples() {
        let mut rng = LabRng::seed(4);
        let h = rng.hermitian(2);
        let l = SliceLayout::new(2, 3, 0.4).unwrap();
        let qa = build_action(&l, &h).unwrap();
        let id = constraint_expectation(&qa, &Operator::identity(&[2]), 1, None).unwrap();
        assert!(id.norm() < 1e-14);
        let o = rng.operator(2);
        assert!(constraint_expectation(&qa, &o, 2, None).unwrap().norm() < 1e-12);
        let (q, qp) = (rng.ket(2), rng.ket(2));
        for t in 0..2 {
            let v = constraint_expectation(&qa, &o, t, Some((&q, &qp))).unwrap();
            assert!(v.norm() < 1e-12, "t={t} v={v}");
        }
        assert!(constraint_expectation(&qa, &o, 2, Some((&q, &qp))).is_err());
    }

    #[test]
    fn cap_and_hbar() {
        assert!(SliceLayout::new(2, 13, 0.1).is_err());
        let h = LabRng::seed(1).hermitian(2);
        let l = SliceLayout::new(2, 3, 0.1).unwrap();
        let a = build_action(&l, &h).unwrap();
        let b = build_action_hbar(&l, &h, 0.37).unwrap();
        assert!(a.exp_action.max_abs_diff(&b.exp_action) < 1e-13);
    }
}
