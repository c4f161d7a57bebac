//! Page–Wootters construction on a discrete N-level clock.
//!
//! The clock is the first (slow) tensor factor: |t⟩ ⊗ |system⟩.

use crate::error::{LabError, Result};
use crate::operator::{c, evolution, kron, mpow, Ket, Operator, C64};

#[derive(Debug, Clone)]
pub struct ClockSystem {
    pub n: usize,
    pub eps: f64,
    pub h: Operator,
    pub psi0: Ket,
    /// Identify slice N with slice 0 in the universe constraint.
    pub periodic: bool,
}

impl ClockSystem {
    pub fn new(n: usize, eps: f64, h: Operator, psi0: Ket) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Invalid("clock needs N >= 1".into()));
        }
        if h.dim() != psi0.dim() {
            return Err(LabError::Dimension("H and psi0 disagree".into()));
        }
        if !h.is_hermitian(1e-12) {
            return Err(LabError::Invalid("H must be hermitian".into()));
        }
        if !psi0.is_normalized() {
            return Err(LabError::Invalid("psi0 must be normalized".into()));
        }
        Ok(Self {
            n,
            eps,
            h,
            psi0,
            periodic: false,
        })
    }

    pub fn periodic(mut self) -> Self {
        self.periodic = true;
        self
    }

    pub fn step(&self) -> Operator {
        evolution(&self.h, self.eps)
    }

    pub fn system_dim(&self) -> usize {
        self.h.dim()
    }

    /// |t⟩⟨t| ⊗ O on clock ⊗ system.
    pub fn clock_projected(&self, o: &Operator, t: usize) -> Result<Operator> {
        self.check_slice(t)?;
        let proj = Ket::basis(&[self.n], t)?.projector();
        Ok(kron(&proj, o))
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

/// U^t |ψ0⟩ with U = expm(−iεH).
pub fn evolved_state(cs: &ClockSystem, t: usize) -> Ket {
    mpow(&cs.step(), t as u64).apply(&cs.psi0)
}

/// |Ψ⟩ = N^{-1/2} Σ_t |t⟩ ⊗ U^t|ψ0⟩.
pub fn history_state(cs: &ClockSystem) -> Ket {
    let u = cs.step();
    let norm = c(1.0 / (cs.n as f64).sqrt(), 0.0);
    let mut psi_t = cs.psi0.clone();
    let mut acc: Option<Ket> = None;
    for t in 0..cs.n {
        let leg = Ket::basis(&[cs.n], t).expect("t < n").kron(&psi_t).scale(norm);
        acc = Some(match acc {
            None => leg,
            Some(a) => a.add(&leg),
        });
        psi_t = u.apply(&psi_t);
    }
    acc.expect("n >= 1")
}

/// N·⟨Ψ|(|t⟩⟨t| ⊗ O)|Ψ⟩.
pub fn conditioned_expectation(cs: &ClockSystem, o: &Operator, t: usize) -> Result<C64> {
    let psi = history_state(cs);
    let op = cs.clock_projected(o, t)?;
    Ok(op.sandwich(&psi, &psi) * c(cs.n as f64, 0.0))
}

/// ⟨Ψ|(|t+1⟩⟨t+1| ⊗ O − |t⟩⟨t| ⊗ U†OU)|Ψ⟩, identically zero on history states.
pub fn geometric_heisenberg_residual(cs: &ClockSystem, o: &Operator, t: usize) -> Result<C64> {
    if t + 1 >= cs.n {
        return Err(LabError::IndexOutOfRange {
            index: t,
            limit: cs.n.saturating_sub(1),
        });
    }
    let u = cs.step();
    let heis = &(&u.adjoint() * o) * &u;
    let psi = history_state(cs);
    let a = cs.clock_projected(o, t + 1)?;
    let b = cs.clock_projected(&heis, t)?;
    Ok((&a - &b).sandwich(&psi, &psi))
}

/// ‖(Σ_t |t+1⟩⟨t| ⊗ U − I)|Ψ⟩‖.
///
/// Open clock: the shift runs over t < N−1 and the slice-0 component, which
/// only the boundary term could feed, is excluded. Periodic clock: the shift
/// wraps N−1 → 0 and the full vector is measured.
pub fn universe_residual(cs: &ClockSystem) -> f64 {
    let n = cs.n;
    let u = cs.step();
    let psi = history_state(cs);
    let mut shift = Operator::zeros(&[n]).into_matrix();
    let top = if cs.periodic { n } else { n - 1 };
    for t in 0..top {
        shift[((t + 1) % n, t)] = c(1.0, 0.0);
    }
    let shift = Operator::from_matrix(shift).expect("square");
    let gen = &kron(&shift, &u) - &Operator::identity(&[n * cs.system_dim()]);
    let r = gen.apply(&psi);
    let d = cs.system_dim();
    let start = if cs.periodic { 0 } else { d };
    r.vector().rows(start, n * d - start).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{pauli, ONE};
    use crate::random::LabRng;

    fn plus() -> Ket {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ket::from_slice(&[c(s, 0.0), c(s, 0.0)])
    }

    #[test]
    fn history_examples() {
        let cs = ClockSystem::new(3, 0.1, Operator::zeros(&[2]), plus()).unwrap();
        let psi = history_state(&cs);
        assert!((psi.norm() - 1.0).abs() < 1e-14);
        for k in 0..6 {
            assert!((psi.get(k).re - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        }
        let one = ClockSystem::new(1, 0.1, pauli::x(), plus()).unwrap();
        assert!((history_state(&one).get(0) - plus().get(0)).norm() < 1e-15);

        let w = 1.3;
        let eps = 0.2;
        let cs = ClockSystem::new(4, eps, Operator::diag(&[0.0, w]), plus()).unwrap();
        let psi = history_state(&cs);
        for t in 0..4 {
            let expect = C64::from_polar(1.0, -w * eps * t as f64) * plus().get(1) * c(0.5, 0.0);
            assert!((psi.get(2 * t + 1) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn conditioning_examples() {
        let mut rng = LabRng::seed(11);
        let h = rng.hermitian(3);
        let o = rng.hermitian(3);
        let psi0 = rng.ket(3);
        let cs = ClockSystem::new(5, 0.3, h, psi0.clone()).unwrap();
        let id = conditioned_expectation(&cs, &Operator::identity(&[3]), 4).unwrap();
        assert!((id - ONE).norm() < 1e-13);
        let t0 = conditioned_expectation(&cs, &o, 0).unwrap();
        assert!((t0 - o.sandwich(&psi0, &psi0)).norm() < 1e-12);
        let psi2 = evolution(&cs.h, 0.6).apply(&psi0);
        let t2 = conditioned_expectation(&cs, &o, 2).unwrap();
        assert!((t2 - o.sandwich(&psi2, &psi2)).norm() < 1e-12);
        assert!(conditioned_expectation(&cs, &o, 5).is_err());
    }

    #[test]
    fn heisenberg_and_universe() {
        let mut rng = LabRng::seed(5);
        let h = rng.hermitian(2);
        let cs = ClockSystem::new(4, 0.25, h.clone(), rng.ket(2)).unwrap();
        let o = rng.operator(2);
        for t in 0..3 {
            assert!(geometric_heisenberg_residual(&cs, &o, t).unwrap().norm() < 1e-12);
        }
        let id = geometric_heisenberg_residual(&cs, &Operator::identity(&[2]), 0).unwrap();
        assert!(id.norm() < 1e-15);
        assert!(geometric_heisenberg_residual(&cs, &o, 3).is_err());
        assert!(universe_residual(&cs) < 1e-12);

        let n = 6;
        let eps = 0.5;
        let omega = 2.0 * std::f64::consts::PI / (eps * n as f64);
        let grid_h = Operator::diag(&[0.0, omega, 2.0 * omega]);
        let cs = ClockSystem::new(n, eps, grid_h, LabRng::seed(2).ket(3)).unwrap().periodic();
        assert!(universe_residual(&cs) < 1e-12);
    }
}
