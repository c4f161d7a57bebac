//! Dirac-fermion sector: gamma matrices, Jordan–Wigner modes, the fSWAP
//! cycle, parity-weighted Gaussian traces and the mode propagator.
//!
//! Sign conventions, all in one place:
//! - Modes are ordered slice-major, j = t·M + m. Mode 0 is the most
//!   significant bit of a basis index, so |n₀ n₁ …⟩ has index Σ n_j 2^{K−1−j}.
//! - c_j = Z^{⊗j} ⊗ σ⁻ ⊗ 1, with σ⁻ = |0⟩⟨1|; hence
//!   c†_{a₁}…c†_{a_k}|0⟩ = +|b⟩ for a₁ < … < a_k.
//! - The cycle U satisfies U c_{t,m} U† = c_{t+1,m} for t < N−1 and
//!   U c_{N−1,m} U† = (−1)^{N−1} c_{0,m}. It fixes the vacuum. For N = 2,
//!   M = 1 it is the fSWAP matrix.
//! - Metric (+,−,−,−); p is contravariant, γ^μ p_μ = γ⁰p⁰ − γ·p.

use crate::error::{LabError, Result};
use crate::operator::{c, expm, inv, Operator, C64, I, ONE, ZERO};
use nalgebra::DMatrix;

/// Dense fermionic spaces are capped at 2¹² states.
pub const FERMION_MODE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub gamma: [DMatrix<C64>; 4],
}

/// Dirac representation: γ⁰ = diag(1, −1), γ^k = [[0, σ_k], [−σ_k, 0]].
pub fn gamma_set() -> GammaSet {
    let sigma = [
        [ZERO, ONE, ONE, ZERO],
        [ZERO, -I, I, ZERO],
        [ONE, ZERO, ZERO, -ONE],
    ];
    let mut g0 = DMatrix::zeros(4, 4);
    for k in 0..4 {
        g0[(k, k)] = if k < 2 { ONE } else { -ONE };
    }
    let spatial = |s: &[C64; 4]| {
        let mut g = DMatrix::zeros(4, 4);
        for r in 0..2 {
            for col in 0..2 {
                g[(r, col + 2)] = s[2 * r + col];
                g[(r + 2, col)] = -s[2 * r + col];
            }
        }
        g
    };
    GammaSet {
        gamma: [g0, spatial(&sigma[0]), spatial(&sigma[1]), spatial(&sigma[2])],
    }
}

impl GammaSet {
    pub fn metric(mu: usize, nu: usize) -> f64 {
        match (mu, nu) {
            (0, 0) => 1.0,
            (a, b) if a == b => -1.0,
            _ => 0.0,
        }
    }

    /// γ^μ p_μ for contravariant p.
    pub fn slash(&self, p: [f64; 4]) -> DMatrix<C64> {
        let mut out = &self.gamma[0] * c(p[0], 0.0);
        for k in 1..4 {
            out -= &self.gamma[k] * c(p[k], 0.0);
        }
        out
    }

    /// max |{γ^μ, γ^ν} − 2η^{μν}|.
    pub fn clifford_defect(&self) -> f64 {
        let id = DMatrix::<C64>::identity(4, 4);
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = &self.gamma[mu] * &self.gamma[nu] + &self.gamma[nu] * &self.gamma[mu];
                let target = &id * c(2.0 * Self::metric(mu, nu), 0.0);
                worst = worst.max((anti - target).camax());
            }
        }
        worst
    }
}

/// The fermionic exchange gate on two modes.
pub fn fswap() -> Operator {
    let (o, z) = (ONE, ZERO);
    Operator::from_rows(4, &[o, z, z, z, z, z, o, z, z, -o, z, z, z, z, z, o]).expect("4x4")
}

/// N time slices × M modes per slice on a Jordan–Wigner chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FermionLayout {
    pub n_slices: usize,
    pub n_modes: usize,
}

impl FermionLayout {
    pub fn new(n_slices: usize, n_modes: usize) -> Result<Self> {
        if n_slices == 0 || n_modes == 0 {
            return Err(LabError::Invalid("fermion layout needs at least one slice and mode".into()));
        }
        let k = n_slices * n_modes;
        if k > FERMION_MODE_CAP {
            return Err(LabError::CapExceeded { size: 1 << k.min(62), cap: 1 << FERMION_MODE_CAP });
        }
        Ok(Self { n_slices, n_modes })
    }

    pub fn total_modes(&self) -> usize {
        self.n_slices * self.n_modes
    }

    pub fn dim(&self) -> usize {
        1 << self.total_modes()
    }

    pub fn index(&self, t: usize, m: usize) -> usize {
        t * self.n_modes + m
    }

    fn dims(&self) -> Vec<usize> {
        vec![2; self.total_modes()]
    }

    fn occupied(&self, basis: usize, j: usize) -> bool {
        (basis >> (self.total_modes() - 1 - j)) & 1 == 1
    }

    /// c_j.
    pub fn annihilator(&self, j: usize) -> Result<Operator> {
        let k = self.total_modes();
        if j >= k {
            return Err(LabError::IndexOutOfRange { index: j, limit: k });
        }
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for b in 0..d {
            if self.occupied(b, j) {
                let string = (0..j).filter(|&i| self.occupied(b, i)).count();
                let sign = if string % 2 == 0 { 1.0 } else { -1.0 };
                m[(b ^ (1 << (k - 1 - j)), b)] = c(sign, 0.0);
            }
        }
        Operator::new(self.dims(), m)
    }

    pub fn creator(&self, j: usize) -> Result<Operator> {
        Ok(self.annihilator(j)?.adjoint())
    }

    /// (−1)^{N_f}.
    pub fn parity(&self) -> Operator {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |r, col| {
            if r == col {
                c(if (r.count_ones() % 2) == 0 { 1.0 } else { -1.0 }, 0.0)
            } else {
                ZERO
            }
        });
        Operator::new(self.dims(), m).expect("square")
    }

    /// Σ_ab c†_a h_ab c_b.
    pub fn quadratic(&self, h: &DMatrix<C64>) -> Result<Operator> {
        let k = self.total_modes();
        if h.nrows() != k || h.ncols() != k {
            return Err(LabError::Dimension(format!("quadratic form must be {k}x{k}")));
        }
        let cs = (0..k).map(|j| self.annihilator(j)).collect::<Result<Vec<_>>>()?;
        let mut out = Operator::zeros(&self.dims());
        for a in 0..k {
            for b in 0..k {
                if h[(a, b)] != ZERO {
                    out = &out + &(&cs[a].adjoint() * &cs[b]).scale(h[(a, b)]);
                }
            }
        }
        Ok(out)
    }
}

/// Boundary sign picked up by the last slice under the cycle.
pub fn cycle_boundary_sign(n_slices: usize) -> f64 {
    if n_slices % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// The slice-translation unitary, built directly as a signed permutation of
/// occupation-number states.
pub fn fermionic_cycle(layout: FermionLayout) -> Operator {
    let (n, mm, k) = (layout.n_slices, layout.n_modes, layout.total_modes());
    let d = layout.dim();
    let boundary = cycle_boundary_sign(n);
    let mut u = DMatrix::zeros(d, d);
    for b in 0..d {
        let mut images = Vec::new();
        let mut sign = 1.0;
        for j in 0..k {
            if layout.occupied(b, j) {
                let (t, m) = (j / mm, j % mm);
                if t + 1 == n {
                    sign *= boundary;
                }
                images.push(layout.index((t + 1) % n, m));
            }
        }
        let mut inversions = 0;
        for x in 0..images.len() {
            for y in x + 1..images.len() {
                if images[x] > images[y] {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 1 {
            sign = -sign;
        }
        let target = images.iter().fold(0usize, |acc, &j| acc | (1 << (k - 1 - j)));
        u[(target, b)] = c(sign, 0.0);
    }
    Operator::new(layout.dims(), u).expect("square")
}

/// exp(−π/2 (c†_i c_j − c†_j c_i)) = 1 − K + K², mapping c_i → c_j, c_j → −c_i.
pub fn givens_rotation(layout: FermionLayout, i: usize, j: usize) -> Result<Operator> {
    let (ci, cj) = (layout.annihilator(i)?, layout.annihilator(j)?);
    let k = &(&ci.adjoint() * &cj) - &(&cj.adjoint() * &ci);
    let id = Operator::identity(&layout.dims());
    Ok(&(&id - &k) + &(&k * &k))
}

/// The cycle as a product of nearest-slice rotations G₀₁G₁₂…G_{N−2,N−1} per mode.
pub fn cycle_from_rotations(layout: FermionLayout) -> Result<Operator> {
    let mut u = Operator::identity(&layout.dims());
    for m in 0..layout.n_modes {
        for t in 0..layout.n_slices.saturating_sub(1) {
            let g = givens_rotation(layout, layout.index(t, m), layout.index(t + 1, m))?;
            u = &u * &g;
        }
    }
    Ok(u)
}

/// Worst deviation of U c_{t,m} U† from its documented image over all modes.
pub fn cycle_shift_defect(layout: FermionLayout, u: &Operator) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in 0..layout.n_slices {
        for m in 0..layout.n_modes {
            let src = layout.annihilator(layout.index(t, m))?;
            let dst = layout.annihilator(layout.index((t + 1) % layout.n_slices, m))?;
            let sign = if t + 1 == layout.n_slices { cycle_boundary_sign(layout.n_slices) } else { 1.0 };
            let moved = &(u * &src) * &u.adjoint();
            worst = worst.max(moved.max_abs_diff(&dst.scale(c(sign, 0.0))));
        }
    }
    Ok(worst)
}

/// Tr[P e^{iτS} ∏ inserts] / Tr[P e^{iτS}].
pub fn parity_weighted_trace(layout: FermionLayout, s_f: &Operator, tau: f64, inserts: &[Operator]) -> Result<C64> {
    if s_f.dim() != layout.dim() {
        return Err(LabError::Dimension("action does not act on the layout space".into()));
    }
    let weight = &layout.parity() * &expm(&s_f.scale(c(0.0, tau)));
    let den = weight.trace();
    if den.norm() < 1e-14 * weight.norm() {
        return Err(LabError::Pole("parity-weighted normalization vanishes".into()));
    }
    let mut prod = weight;
    for op in inserts {
        prod = &prod * op;
    }
    Ok(prod.trace() / den)
}

/// Parity-weighted ⟨c_i c†_j⟩ for the weight e^{−c†Λc}: [(1 − e^{−Λ})^{-1}]_ij.
pub fn parity_pair_correlator(lambda: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = lambda.nrows();
    let e = expm(&Operator::from_matrix(-lambda.clone())?);
    let m = Operator::from_matrix(DMatrix::identity(n, n) - e.matrix())?;
    Ok(inv(&m)?.into_matrix())
}

/// m² → m² − iεᵢ, principal root.
pub fn complex_mass(m: f64, eps_i: f64) -> C64 {
    c(m * m, -eps_i).sqrt()
}

/// [1 − exp(iτ γ⁰(γ^μp_μ − m))]⁻¹ γ⁰ with complex mass √(m² − iεᵢ).
pub fn dirac_mode_propagator(p: [f64; 4], m: f64, tau: f64, eps_i: f64) -> Result<DMatrix<C64>> {
    if !(tau > 0.0) {
        return Err(LabError::Invalid("tau must be positive".into()));
    }
    let g = gamma_set();
    let mc = complex_mass(m, eps_i);
    let a = &g.gamma[0] * (g.slash(p) - DMatrix::identity(4, 4) * mc);
    let e = expm(&Operator::from_matrix(a * c(0.0, tau))?);
    let m1 = Operator::from_matrix(DMatrix::identity(4, 4) - e.matrix())?;
    Ok(inv(&m1)?.into_matrix() * &g.gamma[0])
}

/// i(γ^μp_μ + m)/(p² − m²) with the same complex mass, the τ → 0 limit of
/// τ·dirac_mode_propagator.
pub fn dirac_small_tau_limit(p: [f64; 4], m: f64, eps_i: f64) -> DMatrix<C64> {
    let g = gamma_set();
    let mc = complex_mass(m, eps_i);
    let p2 = p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - p[3] * p[3];
    (g.slash(p) + DMatrix::identity(4, 4) * mc) * (I / (c(p2, 0.0) - mc * mc))
}

/// |τ·propagator − limit| (max entry) at each τ.
pub fn dirac_tau_errors(p: [f64; 4], m: f64, eps_i: f64, taus: &[f64]) -> Result<Vec<f64>> {
    let lim = dirac_small_tau_limit(p, m, eps_i);
    taus.iter()
        .map(|&t| Ok((dirac_mode_propagator(p, m, t, eps_i)? * c(t, 0.0) - &lim).camax()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::LabRng;

    #[test]
    fn clifford_and_traces() {
        let g = gamma_set();
        assert!(g.clifford_defect() < 1e-14);
        for mu in 0..4 {
            for nu in 0..4 {
                let tr = (&g.gamma[mu] * &g.gamma[nu]).trace();
                assert!((tr - c(4.0 * GammaSet::metric(mu, nu), 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn fswap_entries_and_square() {
        let f = fswap();
        assert_eq!(f.get(1, 2), ONE);
        assert_eq!(f.get(2, 1), -ONE);
        let sq = &f * &f;
        assert!(sq.max_abs_diff(&Operator::diag(&[1.0, -1.0, -1.0, 1.0])) < 1e-15);
        assert!(f.unitarity_defect() < 1e-15);
        let l = FermionLayout::new(2, 1).unwrap();
        assert!(fermionic_cycle(l).max_abs_diff(&f) == 0.0);
        let (c0, c1) = (l.annihilator(0).unwrap(), l.annihilator(1).unwrap());
        assert!((&(&f * &c0) * &f.adjoint()).max_abs_diff(&c1) < 1e-15);
        assert!((&(&f * &c1) * &f.adjoint()).max_abs_diff(&c0.scale(-ONE)) < 1e-15);
    }

    #[test]
    fn cycle_matches_rotations() {
        for (n, m) in [(1, 2), (2, 2), (3, 1), (3, 2), (4, 1)] {
            let l = FermionLayout::new(n, m).unwrap();
            let u = fermionic_cycle(l);
            assert!(cycle_shift_defect(l, &u).unwrap() < 1e-12);
            assert!(u.max_abs_diff(&cycle_from_rotations(l).unwrap()) < 1e-12);
            assert!(u.commutator(&l.parity()).norm() < 1e-12);
        }
        let one = FermionLayout::new(1, 3).unwrap();
        assert!(fermionic_cycle(one).max_abs_diff(&Operator::identity(&[2, 2, 2])) == 0.0);
    }

    #[test]
    fn parity_trace_matches_analytic() {
        let l = FermionLayout::new(1, 6).unwrap();
        let mut rng = LabRng::seed(5);
        let h = rng.ginibre(6) * c(0.4, 0.0);
        let tau = 0.7;
        let s = l.quadratic(&h).unwrap();
        let lambda = &h * c(0.0, -tau);
        let analytic = parity_pair_correlator(&lambda).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let ins = [l.annihilator(i).unwrap(), l.creator(j).unwrap()];
                let dense = parity_weighted_trace(l, &s, tau, &ins).unwrap();
                assert!((dense - analytic[(i, j)]).norm() < 1e-10, "{i}{j}: {dense} vs {}", analytic[(i, j)]);
            }
        }
        assert!((parity_weighted_trace(l, &s, tau, &[]).unwrap() - ONE).norm() < 1e-14);
        let single = parity_weighted_trace(l, &s, tau, &[l.annihilator(2).unwrap()]).unwrap();
        assert!(single.norm() < 1e-14);
    }

    #[test]
    fn dirac_propagator_limits() {
        let p = [0.4, 0.0, 0.0, 0.0];
        let (m, ei) = (1.0, 1e-3);
        let errs = dirac_tau_errors(p, m, ei, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        for w in errs.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 0.05, "{errs:?}");
        }
        let g = gamma_set();
        let lim = dirac_small_tau_limit(p, m, ei);
        let mc = complex_mass(m, ei);
        let check = (g.slash(p) - DMatrix::identity(4, 4) * mc) * lim;
        assert!((check - DMatrix::identity(4, 4) * I).camax() < 1e-12);
        // Rest frame: diagonal in the Dirac basis.
        let r = dirac_mode_propagator(p, m, 1e-3, ei).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    assert!(r[(a, b)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dirac_action_trace_is_the_propagator() {
        let l = FermionLayout::new(1, 4).unwrap();
        let g = gamma_set();
        let p = [0.3, 0.2, -0.1, 0.5];
        let (m, tau, ei) = (0.8, 0.05, 0.1);
        let mc = complex_mass(m, ei);
        let h = &g.gamma[0] * (g.slash(p) - DMatrix::identity(4, 4) * mc);
        let s = l.quadratic(&h).unwrap();
        let prop = dirac_mode_propagator(p, m, tau, ei).unwrap() * &g.gamma[0];
        for i in 0..4 {
            for j in 0..4 {
                let ins = [l.annihilator(i).unwrap(), l.creator(j).unwrap()];
                let v = parity_weighted_trace(l, &s, tau, &ins).unwrap();
                assert!((v - prop[(i, j)]).norm() < 1e-10 * (1.0 + prop[(i, j)].norm()));
            }
        }
    }
}
