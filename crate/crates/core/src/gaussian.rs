//! Bosonic Gaussian-trace correlators of the quantum action.
//!
//! For a weight exp(−Σ λ_k a†_k a_k), ⟨a†_k a_l⟩ = δ_kl/(e^{λ_k} − 1) and
//! ⟨a_k a†_l⟩ = δ_kl/(1 − e^{−λ_k}). The action weight of a grid mode is
//! λ = −iτ(ω − E + iεᵢ), so Re λ = τεᵢ.
//!
//! Fields on the grid are φ(t,x) = (TV)^{-1/2} Σ_modes (2E)^{-1/2}
//! (a e^{−i(ωt − kx)} + h.c.) with V the spatial box length, and all
//! two-point values below carry the continuum normalization τ/(TV).

use crate::error::{LabError, Result};
use crate::modes::ModeGrid;
use crate::operator::{c, expm, Operator, C64, ZERO};
use crate::fock::single_annihilator;

/// Per-mode exponents of a diagonal quadratic weight.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWeight {
    pub lambdas: Vec<C64>,
}

impl GaussianWeight {
    pub fn new(lambdas: Vec<C64>) -> Result<Self> {
        if let Some(bad) = lambdas.iter().find(|l| l.re <= 0.0) {
            return Err(LabError::Invalid(format!("Re(lambda) must be positive, got {bad}")));
        }
        Ok(Self { lambdas })
    }

    /// λ_q = −iτ(ω_q − E_q + iεᵢ) for every grid mode.
    pub fn action(grid: &ModeGrid, tau: f64, eps_i: f64) -> Result<Self> {
        Self::new(grid.modes.iter().map(|m| action_lambda(m.gap(), tau, eps_i)).collect())
    }
}

/// −iτ(Δ + iεᵢ).
pub fn action_lambda(gap: f64, tau: f64, eps_i: f64) -> C64 {
    c(0.0, -tau) * c(gap, eps_i)
}

/// e^z − 1 without cancellation for small |z|.
pub fn cexpm1(z: C64) -> C64 {
    let half = (0.5 * z.im).sin();
    c(z.re.exp_m1() * z.im.cos() - 2.0 * half * half, z.re.exp() * z.im.sin())
}

/// 1/(e^λ − 1), the normal-ordered occupation.
pub fn occupation(lambda: C64) -> Result<C64> {
    let den = cexpm1(lambda);
    if den.norm() < 1e-300 || lambda.norm() == 0.0 {
        return Err(LabError::Pole(format!("lambda = {lambda}")));
    }
    Ok(den.inv())
}

/// 1/(1 − e^{−λ}) = 1 + occupation.
pub fn anti_occupation(lambda: C64) -> Result<C64> {
    let den = -cexpm1(-lambda);
    if den.norm() < 1e-300 || lambda.norm() == 0.0 {
        return Err(LabError::Pole(format!("lambda = {lambda}")));
    }
    Ok(den.inv())
}

/// ⟨a†_k a_l⟩ = δ_kl/(e^{λ_k} − 1).
pub fn gaussian_pair_correlator(w: &GaussianWeight, k: usize, l: usize) -> Result<C64> {
    let n = w.lambdas.len();
    for idx in [k, l] {
        if idx >= n {
            return Err(LabError::IndexOutOfRange { index: idx, limit: n });
        }
    }
    if k != l {
        return Ok(ZERO);
    }
    occupation(w.lambdas[k])
}

/// Tr[e^{−λ a†a} a†a]/Tr[e^{−λ a†a}] on a single mode truncated at n_max,
/// by dense matrix exponential.
pub fn truncated_fock_pair_correlator(lambda: C64, n_max: usize) -> C64 {
    let a = single_annihilator(n_max);
    let num = &a.adjoint() * &a;
    let weight = expm(&num.scale(-lambda));
    (&weight * &num).trace() / weight.trace()
}

/// ⟨a†(p) a(k)⟩_τ = δ_pk/(exp(−iτ(ω_p − E_p + iεᵢ)) − 1) over grid modes.
pub fn tau_mode_correlator(grid: &ModeGrid, tau: f64, eps_i: f64, p: usize, k: usize) -> Result<C64> {
    check_regulators(tau, eps_i)?;
    let n = grid.len();
    for idx in [p, k] {
        if idx >= n {
            return Err(LabError::IndexOutOfRange { index: idx, limit: n });
        }
    }
    if p != k {
        return Ok(ZERO);
    }
    occupation(action_lambda(grid.modes[p].gap(), tau, eps_i))
}

fn check_regulators(tau: f64, eps_i: f64) -> Result<()> {
    if !(tau > 0.0 && eps_i > 0.0) {
        return Err(LabError::Invalid("tau and eps_i must be positive".into()));
    }
    Ok(())
}

/// ⟨√τ a(t,p) √τ a†(t′,p)⟩_τ summed over every grid frequency at spatial
/// index `p`: (τ/T) Σ_ω e^{−iω(t−t′)}/(1 − e^{−λ_ω}).
///
/// At t = t′ the one-sided limit t → t′⁺ is used: the contact term is
/// dropped and the symmetric part (τ/T) Σ ½coth(λ/2) is completed by ½.
pub fn two_time_contraction(grid: &ModeGrid, tau: f64, eps_i: f64, t: f64, t_prime: f64, p: &[i64]) -> Result<C64> {
    check_regulators(tau, eps_i)?;
    let dt = t - t_prime;
    let mut acc = ZERO;
    let mut count = 0usize;
    for m in grid.modes.iter().filter(|m| m.n == p) {
        let lam = action_lambda(m.gap(), tau, eps_i);
        count += 1;
        if dt == 0.0 {
            acc += c(0.5, 0.0) / (lam * c(0.5, 0.0)).tanh();
        } else {
            acc += C64::from_polar(1.0, -m.omega * dt) * anti_occupation(lam)?;
        }
    }
    if count == 0 {
        return Err(LabError::Invalid(format!("no grid modes at spatial index {p:?}")));
    }
    let mut v = acc * c(tau / grid.t_box, 0.0);
    if dt == 0.0 {
        v += c(0.5, 0.0);
    }
    Ok(v)
}

/// Spacetime lattice point (time, site).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub t: f64,
    pub x: f64,
}

/// ⟨√τφ(x) √τφ(y)⟩_τ = (τ/(TV)) Σ_modes (1/2E)[⟨aa†⟩e^{−ip(x−y)} + ⟨a†a⟩e^{ip(x−y)}].
pub fn feynman_propagator_grid(grid: &ModeGrid, tau: f64, eps_i: f64, x: Point, y: Point) -> Result<C64> {
    check_regulators(tau, eps_i)?;
    let (dt, dx) = (x.t - y.t, x.x - y.x);
    let mut acc = ZERO;
    for m in &grid.modes {
        let k = grid.momentum(&m.n).first().copied().unwrap_or(0.0);
        let lam = action_lambda(m.gap(), tau, eps_i);
        let phase = C64::from_polar(1.0, -(m.omega * dt - k * dx));
        let term = anti_occupation(lam)? * phase + occupation(lam)? * phase.conj();
        acc += term / c(2.0 * m.energy, 0.0);
    }
    Ok(acc * c(tau / (grid.t_box * grid.l_box), 0.0))
}

/// The same mode sum with each term replaced by its small-τ limit
/// i/(p² − m² + iεᵢ') assembled from i/(ω−E+iεᵢ) − i/(ω+E−iεᵢ) = 2E·i/(p²−m²+…).
pub fn feynman_partial_fraction_grid(grid: &ModeGrid, eps_i: f64, x: Point, y: Point) -> C64 {
    let (dt, dx) = (x.t - y.t, x.x - y.x);
    let mut acc = ZERO;
    for m in &grid.modes {
        let k = grid.momentum(&m.n).first().copied().unwrap_or(0.0);
        let e = m.energy;
        let pos = c(0.0, 1.0) / c(m.omega - e, eps_i);
        let neg = c(0.0, 1.0) / c(m.omega + e, -eps_i);
        let phase = C64::from_polar(1.0, -(m.omega * dt - k * dx));
        acc += (pos - neg) / c(2.0 * e, 0.0) * phase;
    }
    acc / c(grid.t_box * grid.l_box, 0.0)
}

/// Covariant form i/(ω² − E² + εᵢ² + 2iEεᵢ). Exactly,
/// i/(ω−E+iεᵢ) − i/(ω+E−iεᵢ) = 2(E − iεᵢ)·covariant_mode_propagator.
pub fn covariant_mode_propagator(omega: f64, energy: f64, eps_i: f64) -> C64 {
    c(0.0, 1.0) / c(omega * omega - energy * energy + eps_i * eps_i, 2.0 * energy * eps_i)
}

/// Deterministic helper returning the single-mode dense number operator.
pub fn number_operator(n_max: usize) -> Operator {
    let a = single_annihilator(n_max);
    &a.adjoint() * &a
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn pair_correlator_examples() {
        let w = GaussianWeight::new(vec![c(LN_2, 0.0), c(1.0, 0.3)]).unwrap();
        assert!((gaussian_pair_correlator(&w, 0, 0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(gaussian_pair_correlator(&w, 0, 1).unwrap(), ZERO);
        let brute = truncated_fock_pair_correlator(c(LN_2, 0.0), 40);
        // Tail of the geometric series at n_max = 40 and λ = ln 2 is ~4e−11.
        assert!((brute - c(1.0, 0.0)).norm() < 1e-9);
        assert!(occupation(ZERO).is_err());
        assert!(GaussianWeight::new(vec![c(-0.1, 0.0)]).is_err());
    }

    #[test]
    fn expm1_small_argument() {
        let z = c(1e-9, -2e-9);
        assert!((cexpm1(z) - z).norm() < 1e-17);
        let w = c(0.3, 1.1);
        assert!((cexpm1(w) - (w.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn tau_limits() {
        let mut g = ModeGrid::empty(10.0, 1.0, 1.0).unwrap();
        let off = g.push_custom(1.7, 1.0);
        let on = g.push_custom(1.0, 1.0);
        let (tau, ei) = (1e-4, 0.05);
        let v = tau_mode_correlator(&g, tau, ei, off, off).unwrap() * tau;
        let lim = c(0.0, 1.0) / c(0.7, ei);
        assert!((v - lim).norm() < 1e-3);
        assert_eq!(tau_mode_correlator(&g, tau, ei, off, on).unwrap(), ZERO);
        let v_on = tau_mode_correlator(&g, tau, ei, on, on).unwrap();
        assert!((v_on - c(1.0 / ((tau * ei).exp() - 1.0), 0.0)).norm() < 1e-6 * v_on.norm());
    }

    #[test]
    fn partial_fraction_identity() {
        for (w, e) in [(0.3, 1.2), (-2.0, 0.7), (5.0, 5.1)] {
            let ei = 1e-3;
            let lhs = c(0.0, 1.0) / c(w - e, ei) - c(0.0, 1.0) / c(w + e, -ei);
            let rhs = covariant_mode_propagator(w, e, ei) * c(2.0 * e, -2.0 * ei);
            assert!((lhs - rhs).norm() < 1e-10 * lhs.norm());
        }
    }

    #[test]
    fn two_time_single_mode() {
        let t_box = 200.0;
        let nf = 131_072i64;
        let n0s: Vec<i64> = (-nf / 2..nf / 2).collect();
        let g = ModeGrid::product(t_box, 1.0, 1.0, &n0s, &[vec![0]]).unwrap();
        let eps = t_box / 8192.0;
        let (tau, ei) = (1e-5, 0.04);
        let fwd = two_time_contraction(&g, tau, ei, 4.0 * eps, 0.0, &[0]).unwrap();
        let oracle = C64::from_polar(1.0, -4.0 * eps);
        assert!((fwd - oracle).norm() < 0.02, "{fwd} vs {oracle}");
        let back = two_time_contraction(&g, tau, ei, 0.0, 4.0 * eps, &[0]).unwrap();
        assert!(back.norm() < 0.02, "{back}");
        let eq = two_time_contraction(&g, tau, ei, 0.0, 0.0, &[0]).unwrap();
        assert!((eq - c(1.0, 0.0)).norm() < 0.02);
    }
}
