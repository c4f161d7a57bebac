//! Extended Fock space on a time-sliced lattice: one bosonic leg per
//! (slice t, spatial mode p), slice-major. Dense truncated matrices for small
//! lattices, and an exact sparse occupation-number engine for the one- and
//! two-particle sectors at larger N.

use crate::error::{LabError, Result};
use crate::operator::{c, kron_all, Ket, Operator, C64, ZERO};
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Dense-dimension cap for truncated lattices.
pub const FOCK_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFock {
    pub n: usize,
    /// Spatial mode energies E_p.
    pub energies: Vec<f64>,
    pub n_max: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// (1/√N) Σ_t e^{i p⁰ ε t} a†(t, p) with p⁰ = 2πn₀/T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedMode {
    pub n0: i64,
    pub p: usize,
}

impl LatticeFock {
    pub fn new(n: usize, energies: Vec<f64>, n_max: usize, eps: f64) -> Result<Self> {
        if n == 0 || energies.is_empty() || n_max == 0 {
            return Err(LabError::Invalid("need N >= 1, M >= 1, n_max >= 1".into()));
        }
        Ok(Self {
            n,
            energies,
            n_max,
            eps,
        })
    }

    pub fn m(&self) -> usize {
        self.energies.len()
    }

    pub fn t_total(&self) -> f64 {
        self.eps * self.n as f64
    }

    pub fn legs(&self) -> usize {
        self.n * self.m()
    }

    pub fn leg(&self, t: usize, p: usize) -> usize {
        t * self.m() + p
    }

    /// 2πn₀/T.
    pub fn frequency(&self, n0: i64) -> f64 {
        2.0 * PI * n0 as f64 / self.t_total()
    }

    pub fn dense_dim(&self) -> Result<usize> {
        let size = ((self.n_max + 1) as u128).checked_pow(self.legs() as u32).unwrap_or(u128::MAX);
        if size > FOCK_CAP as u128 {
            return Err(LabError::CapExceeded {
                size: size.min(usize::MAX as u128) as usize,
                cap: FOCK_CAP,
            });
        }
        Ok(size as usize)
    }

    fn check(&self, t: usize, p: usize) -> Result<()> {
        if t >= self.n {
            return Err(LabError::IndexOutOfRange {
                index: t,
                limit: self.n,
            });
        }
        if p >= self.m() {
            return Err(LabError::IndexOutOfRange {
                index: p,
                limit: self.m(),
            });
        }
        Ok(())
    }

    pub fn vacuum(&self) -> Result<Ket> {
        let d = self.dense_dim()?;
        Ket::basis(&vec![self.n_max + 1; self.legs()], 0).inspect(|k| debug_assert_eq!(k.dim(), d))
    }
}

/// Single-mode truncated annihilator on {|0⟩ … |n_max⟩}.
pub fn single_annihilator(n_max: usize) -> Operator {
    let d = n_max + 1;
    let mut m = DMatrix::<C64>::zeros(d, d);
    for k in 1..d {
        m[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
    }
    Operator::from_matrix(m).expect("square")
}

/// Ladder operator at leg (t, p), embedded in the dense lattice space.
pub fn ladder(lf: &LatticeFock, t: usize, p: usize, kind: Ladder) -> Result<Operator> {
    lf.check(t, p)?;
    lf.dense_dim()?;
    let d = lf.n_max + 1;
    let a = single_annihilator(lf.n_max);
    let local = match kind {
        Ladder::Annihilate => a,
        Ladder::Create => a.adjoint(),
    };
    let mut factors = vec![Operator::identity(&[d]); lf.legs()];
    factors[lf.leg(t, p)] = local;
    kron_all(&factors)
}

/// Dense extended creation operator A†(n₀, p).
pub fn extended_creation(lf: &LatticeFock, mode: ExtendedMode) -> Result<Operator> {
    let w = lf.frequency(mode.n0);
    let norm = 1.0 / (lf.n as f64).sqrt();
    let mut acc: Option<Operator> = None;
    for t in 0..lf.n {
        let term = ladder(lf, t, mode.p, Ladder::Create)?
            .scale(C64::from_polar(norm, w * lf.eps * t as f64));
        acc = Some(match acc {
            None => term,
            Some(a) => &a + &term,
        });
    }
    Ok(acc.expect("N >= 1"))
}

/// S = Σ_p Σ_{n₀=0}^{N−1} (2πn₀/T − E_p) A†(n₀,p) A(n₀,p).
pub fn free_action(lf: &LatticeFock) -> Result<Operator> {
    let dims = vec![lf.n_max + 1; lf.legs()];
    let mut s = Operator::zeros(&dims);
    for p in 0..lf.m() {
        for n0 in 0..lf.n as i64 {
            let gap = lf.frequency(n0) - lf.energies[p];
            let ad = extended_creation(lf, ExtendedMode { n0, p })?;
            s = &s + &(&ad * &ad.adjoint()).scale(c(gap, 0.0));
        }
    }
    Ok(s)
}

/// γ with [S, A†]|Ω⟩ = γ·A†|Ω⟩, and the residual ‖[S,A†]|Ω⟩ − γA†|Ω⟩‖.
pub fn commutator_gap_with_residual(lf: &LatticeFock, mode: ExtendedMode, s: &Operator) -> Result<(C64, f64)> {
    let ad = extended_creation(lf, mode)?;
    let vac = lf.vacuum()?;
    let one = ad.apply(&vac);
    let comm = s.commutator(&ad).apply(&vac);
    let gamma = one.inner(&comm) / one.inner(&one);
    let residual = comm.add(&one.scale(-gamma)).norm();
    Ok((gamma, residual))
}

/// γ with [S, A†(p)] = γ·A†(p) on the one-particle sector.
pub fn on_shell_commutator_gap(lf: &LatticeFock, mode: ExtendedMode, s: &Operator) -> Result<C64> {
    commutator_gap_with_residual(lf, mode, s).map(|(g, _)| g)
}

/// Occupation-number state without truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub legs: usize,
    pub amps: BTreeMap<Vec<u32>, C64>,
}

impl FockState {
    pub fn vacuum(legs: usize) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(vec![0; legs], c(1.0, 0.0));
        Self { legs, amps }
    }

    pub fn zero(legs: usize) -> Self {
        Self {
            legs,
            amps: BTreeMap::new(),
        }
    }

    pub fn create(&self, leg: usize) -> Self {
        let mut out = Self::zero(self.legs);
        for (occ, a) in &self.amps {
            let mut o = occ.clone();
            o[leg] += 1;
            *out.amps.entry(o.clone()).or_insert(ZERO) += a * (o[leg] as f64).sqrt();
        }
        out
    }

    pub fn annihilate(&self, leg: usize) -> Self {
        let mut out = Self::zero(self.legs);
        for (occ, a) in &self.amps {
            if occ[leg] == 0 {
                continue;
            }
            let mut o = occ.clone();
            let n = o[leg];
            o[leg] -= 1;
            *out.amps.entry(o).or_insert(ZERO) += a * (n as f64).sqrt();
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            legs: self.legs,
            amps: self.amps.iter().map(|(k, v)| (k.clone(), v * s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.amps {
            *out.amps.entry(k.clone()).or_insert(ZERO) += v;
        }
        out
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .filter_map(|(k, v)| other.amps.get(k).map(|w| v.conj() * w))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }
}

/// Apply Σ_t f(t)·a†(t, p) to a sparse state.
pub fn apply_slice_sum(lf: &LatticeFock, state: &FockState, p: usize, f: impl Fn(usize) -> C64) -> FockState {
    let mut acc = FockState::zero(state.legs);
    for t in 0..lf.n {
        acc = acc.add(&state.create(lf.leg(t, p)).scale(f(t)));
    }
    acc
}

/// Sparse A†(n₀, p)|state⟩.
pub fn apply_extended_creation(lf: &LatticeFock, mode: ExtendedMode, state: &FockState) -> FockState {
    let w = lf.frequency(mode.n0);
    let norm = 1.0 / (lf.n as f64).sqrt();
    apply_slice_sum(lf, state, mode.p, |t| C64::from_polar(norm, w * lf.eps * t as f64))
}

/// Result of [`naive_conditioning_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningCheck {
    /// ⟨Ψ|O(t)|Ψ⟩ with the slice-normalized operator.
    pub raw: C64,
    /// N·raw, the clock-conditioned extended value.
    pub extended: C64,
    /// ⟨ψ(t)|O|ψ(t)⟩ in ordinary one-mode quantum mechanics.
    pub standard: C64,
    /// ⟨Ω|a(t,p)a†(t,p)|Ω⟩/ε.
    pub internal_contraction: f64,
}

impl ConditioningCheck {
    pub fn mismatch(&self) -> f64 {
        (self.extended - self.standard).norm()
    }
}

/// Conditions O = a†a (normal-ordered) or a a† on slice t, for the one-particle
/// physical state |Ψ⟩ = (1/√N)Σ_t e^{−iE_pεt} a†(t,p)|Ω⟩. Exact, no truncation.
pub fn naive_conditioning_check(lf: &LatticeFock, t: usize, p: usize, normal_ordered: bool) -> Result<ConditioningCheck> {
    lf.check(t, p)?;
    let e = lf.energies[p];
    let norm = 1.0 / (lf.n as f64).sqrt();
    let vac = FockState::vacuum(lf.legs());
    let psi = apply_slice_sum(lf, &vac, p, |s| C64::from_polar(norm, -e * lf.eps * s as f64));
    let leg = lf.leg(t, p);
    let o_psi = if normal_ordered {
        psi.annihilate(leg).create(leg)
    } else {
        psi.create(leg).annihilate(leg)
    };
    let raw = psi.inner(&o_psi);
    // One particle in a single mode: a†a → 1, a a† → 2, phase-independent.
    let standard = if normal_ordered { c(1.0, 0.0) } else { c(2.0, 0.0) };
    let contraction = vac.inner(&vac.create(leg).annihilate(leg)).re / lf.eps;
    Ok(ConditioningCheck {
        raw,
        extended: raw * c(lf.n as f64, 0.0),
        standard,
        internal_contraction: contraction,
    })
}

/// One row of an anomaly scan at fixed T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyRow {
    pub n: usize,
    pub normal: ConditioningCheck,
    pub anti: ConditioningCheck,
}

impl AnomalyRow {
    /// Mismatch expected from the 1/ε internal contraction alone: T·(1/ε) − 1.
    pub fn predicted_mismatch(&self, t_total: f64) -> f64 {
        t_total * self.anti.internal_contraction - 1.0
    }
}

/// Runs the conditioning check for each N at fixed total time T with an
/// on-shell energy 2πn₀/T.
pub fn anomaly_scan(n_list: &[usize], t_total: f64, n0: i64, slice: usize) -> Result<Vec<AnomalyRow>> {
    n_list
        .iter()
        .map(|&n| {
            let eps = t_total / n as f64;
            let e = 2.0 * PI * n0 as f64 / t_total;
            let lf = LatticeFock::new(n, vec![e], 3, eps)?;
            let t = slice.min(n - 1);
            Ok(AnomalyRow {
                n,
                normal: naive_conditioning_check(&lf, t, 0, true)?,
                anti: naive_conditioning_check(&lf, t, 0, false)?,
            })
        })
        .collect()
}

/// Superposition Σ_p c_p |1_p⟩ of on-shell one-particle states, each built as
/// (1/√N)Σ_t e^{−iE_pεt} a†(t,p)|Ω⟩ with E_p on the frequency grid. Returns
/// N·⟨Ψ|Σ h_pq a†(t,p)a(t,q)|Ψ⟩ and the standard one-body value
/// Σ h_pq c_p* c_q e^{i(E_p − E_q)εt}.
pub fn multimode_one_body_check(lf: &LatticeFock, coeffs: &[C64], h: &DMatrix<C64>, t: usize) -> Result<(C64, C64)> {
    let m = lf.m();
    if coeffs.len() != m || h.nrows() != m || h.ncols() != m {
        return Err(LabError::Dimension("one entry per spatial mode expected".into()));
    }
    lf.check(t, 0)?;
    for (p, &e) in lf.energies.iter().enumerate() {
        let k = e * lf.t_total() / (2.0 * PI);
        if (k - k.round()).abs() > 1e-12 {
            return Err(LabError::Invalid(format!("mode {p} is not on the frequency grid")));
        }
    }
    let vac = FockState::vacuum(lf.legs());
    let amp = 1.0 / (lf.n as f64).sqrt();
    let mut psi = FockState::zero(lf.legs());
    for p in 0..m {
        let e = lf.energies[p];
        let one = apply_slice_sum(lf, &vac, p, |s| C64::from_polar(amp, -e * lf.eps * s as f64));
        psi = psi.add(&one.scale(coeffs[p]));
    }
    let nrm = psi.norm();
    psi = psi.scale(c(1.0 / nrm, 0.0));
    let cn: Vec<C64> = coeffs.iter().map(|x| x / nrm).collect();
    let mut ext = ZERO;
    let mut std = ZERO;
    for p in 0..m {
        for q in 0..m {
            if h[(p, q)] == ZERO {
                continue;
            }
            let v = psi.annihilate(lf.leg(t, q)).create(lf.leg(t, p));
            ext += h[(p, q)] * psi.inner(&v);
            let ph = C64::from_polar(1.0, (lf.energies[p] - lf.energies[q]) * lf.eps * t as f64);
            std += h[(p, q)] * cn[p].conj() * cn[q] * ph;
        }
    }
    Ok((ext * c(lf.n as f64, 0.0), std))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::ONE;

    #[test]
    fn ladder_examples() {
        let lf = LatticeFock::new(2, vec![0.5], 2, 0.3).unwrap();
        let vac = lf.vacuum().unwrap();
        let a = ladder(&lf, 1, 0, Ladder::Annihilate).unwrap();
        let ad = ladder(&lf, 1, 0, Ladder::Create).unwrap();
        assert!(a.apply(&vac).norm() < 1e-15);
        assert!(((&a * &ad).sandwich(&vac, &vac) - ONE).norm() < 1e-15);
        let b = ladder(&lf, 0, 0, Ladder::Create).unwrap();
        assert!(a.commutator(&b).norm() < 1e-15);
        // Truncation edge: [a, a†] = I − (n_max+1)|n_max⟩⟨n_max| on the leg.
        let single = single_annihilator(2);
        let comm = single.commutator(&single.adjoint());
        assert!(comm.max_abs_diff(&Operator::diag(&[1.0, 1.0, -2.0])) < 1e-14);
    }

    #[test]
    fn commutator_gap_examples() {
        let n = 4;
        let eps = 0.5;
        let t = n as f64 * eps;
        let e = 2.0 * PI / t;
        let lf = LatticeFock::new(n, vec![e], 2, eps).unwrap();
        let s = free_action(&lf).unwrap();
        let (on, res) = commutator_gap_with_residual(&lf, ExtendedMode { n0: 1, p: 0 }, &s).unwrap();
        assert!(on.norm() < 1e-10 && res < 1e-10);
        let shifted = on_shell_commutator_gap(&lf, ExtendedMode { n0: 2, p: 0 }, &s).unwrap();
        assert!((shifted - c(2.0 * PI / t, 0.0)).norm() < 1e-10);
        let massless = LatticeFock::new(n, vec![0.0], 2, eps).unwrap();
        let s0 = free_action(&massless).unwrap();
        assert!(on_shell_commutator_gap(&massless, ExtendedMode { n0: 0, p: 0 }, &s0).unwrap().norm() < 1e-10);
    }

    #[test]
    fn conditioning_examples() {
        let n = 6;
        let lf = LatticeFock::new(n, vec![2.0 * PI / 3.0], 3, 0.5).unwrap();
        let normal = naive_conditioning_check(&lf, 2, 0, true).unwrap();
        assert!((normal.extended - ONE).norm() < 1e-12);
        assert!((normal.standard - ONE).norm() < 1e-15);
        let anti = naive_conditioning_check(&lf, 2, 0, false).unwrap();
        assert!((anti.raw - c(1.0 + 1.0 / n as f64, 0.0)).norm() < 1e-12);
        assert_eq!(anti.standard, c(2.0, 0.0));
        assert_eq!(anti.internal_contraction, n as f64 / lf.t_total());
    }

    #[test]
    fn sparse_matches_dense() {
        let lf = LatticeFock::new(3, vec![1.0], 2, 0.4).unwrap();
        let mode = ExtendedMode { n0: 1, p: 0 };
        let dense = extended_creation(&lf, mode).unwrap().apply(&lf.vacuum().unwrap());
        let sparse = apply_extended_creation(&lf, mode, &FockState::vacuum(3));
        for (occ, amp) in &sparse.amps {
            let idx = occ.iter().fold(0usize, |acc, &k| acc * 3 + k as usize);
            assert!((dense.get(idx) - amp).norm() < 1e-15);
        }
    }

    #[test]
    fn multimode_agreement() {
        let n = 8;
        let eps = 0.25;
        let t = n as f64 * eps;
        let w = 2.0 * PI / t;
        let lf = LatticeFock::new(n, vec![w, 3.0 * w], 3, eps).unwrap();
        let coeffs = [c(0.6, 0.1), c(-0.3, 0.7)];
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.5), c(0.2, -0.5), c(-0.4, 0.0)]);
        for slice in 0..n {
            let (ext, std) = multimode_one_body_check(&lf, &coeffs, &h, slice).unwrap();
            assert!((ext - std).norm() < 1e-9);
        }
    }
}
