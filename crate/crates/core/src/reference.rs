//! Standard quantum-mechanics oracles: Schrödinger evolution, Heisenberg
//! correlators on truncated oscillators, and exact diagonalization of small
//! free scalar lattices.

use crate::error::{LabError, Result};
use crate::fock::{single_annihilator, FockState};
use crate::modes::signed_indices;
use crate::operator::{c, evolution, kron_all, Ket, Operator, C64, ZERO};
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// ⟨ψ(t)|O|ψ(t)⟩ with ψ(t) = expm(−iHt)ψ0.
pub fn schrodinger_expectation(h: &Operator, psi0: &Ket, o: &Operator, t: f64) -> C64 {
    let psi = evolution(h, t).apply(psi0);
    o.sandwich(&psi, &psi)
}

/// expm(iHt)·O·expm(−iHt).
pub fn heisenberg(h: &Operator, o: &Operator, t: f64) -> Operator {
    &(&evolution(h, -t) * o) * &evolution(h, t)
}

/// ⟨0|T̂ a_H(t) a†_H(0)|0⟩ for H = E a†a truncated at n_max; t = 0 puts the
/// annihilator on the left.
pub fn single_mode_time_ordered(energy: f64, t: f64, n_max: usize) -> C64 {
    let a = single_annihilator(n_max);
    let h = (&a.adjoint() * &a).scale(c(energy, 0.0));
    let vac = Ket::basis(&[n_max + 1], 0).expect("n_max >= 0");
    let a_t = heisenberg(&h, &a, t);
    let ordered = if t >= 0.0 { &a_t * &a.adjoint() } else { &a.adjoint() * &a_t };
    ordered.sandwich(&vac, &vac)
}

/// Coupling matrix K = F† diag(k² + m²) F of an L-site periodic chain with
/// continuum dispersion on the momenta 2πn/L.
pub fn chain_coupling(l_sites: usize, mass: f64) -> DMatrix<f64> {
    let ks: Vec<f64> = signed_indices(l_sites)
        .iter()
        .map(|&n| 2.0 * PI * n as f64 / l_sites as f64)
        .collect();
    DMatrix::from_fn(l_sites, l_sites, |a, b| {
        ks.iter()
            .map(|&k| (k * (a as f64 - b as f64)).cos() * (k * k + mass * mass))
            .sum::<f64>()
            / l_sites as f64
    })
}

/// Exact diagonalization of H = ½Σπ_x² + ½φᵀKφ in a site basis of local
/// oscillators with frequency √K_xx, truncated at n_max quanta per site.
#[derive(Debug, Clone)]
pub struct FreeLatticeEd {
    pub l_sites: usize,
    pub n_max: usize,
    energies: Vec<f64>,
    /// Columns are eigenvectors.
    vectors: DMatrix<C64>,
    phis: Vec<Operator>,
}

impl FreeLatticeEd {
    pub fn new(l_sites: usize, mass: f64, n_max: usize) -> Result<Self> {
        if l_sites == 0 || n_max == 0 {
            return Err(LabError::Invalid("need at least one site and one quantum".into()));
        }
        let dim = (n_max + 1).pow(l_sites as u32);
        if dim > 4096 {
            return Err(LabError::CapExceeded { size: dim, cap: 4096 });
        }
        let k = chain_coupling(l_sites, mass);
        let a = single_annihilator(n_max);
        let id = Operator::identity(&[n_max + 1]);
        let local = |op: &Operator, x: usize| {
            let mut f = vec![id.clone(); l_sites];
            f[x] = op.clone();
            kron_all(&f).expect("non-empty")
        };
        let mut phis = Vec::with_capacity(l_sites);
        let mut pis = Vec::with_capacity(l_sites);
        for x in 0..l_sites {
            let w = k[(x, x)].sqrt();
            let phi = (&a + &a.adjoint()).scale(c(1.0 / (2.0 * w).sqrt(), 0.0));
            let pi = (&a.adjoint() - &a).scale(c(0.0, (w / 2.0).sqrt()));
            phis.push(local(&phi, x));
            pis.push(local(&pi, x));
        }
        let mut h = Operator::zeros(phis[0].dims());
        for x in 0..l_sites {
            h = &h + &(&pis[x] * &pis[x]).scale(c(0.5, 0.0));
            for y in 0..l_sites {
                h = &h + &(&phis[x] * &phis[y]).scale(c(0.5 * k[(x, y)], 0.0));
            }
        }
        let herm = (h.matrix() + h.matrix().adjoint()) * c(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(dim, dim, |r, col| eig.eigenvectors[(r, order[col])]);
        Ok(Self {
            l_sites,
            n_max,
            energies,
            vectors,
            phis,
        })
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// ⟨0|T̂ φ_x(t) φ_y(0)|0⟩.
    pub fn time_ordered_phi(&self, x: usize, y: usize, t: f64) -> C64 {
        let (a, b, s) = if t >= 0.0 { (x, y, t) } else { (y, x, -t) };
        let v = &self.vectors;
        let g = v.column(0);
        let left = v.adjoint() * (self.phis[a].matrix().adjoint() * g);
        let right = v.adjoint() * (self.phis[b].matrix() * g);
        let e0 = self.energies[0];
        let mut acc = ZERO;
        for n in 0..self.energies.len() {
            acc += left[n].conj() * right[n] * C64::from_polar(1.0, -(self.energies[n] - e0) * s);
        }
        acc
    }
}

/// Normal-ordered product of ladder operators, `(mode, dagger)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub ops: Vec<(usize, bool)>,
}

/// Free scalar field on a periodic hypercubic lattice of `sites^dim` points
/// with continuum dispersion, restricted to a chosen list of momentum modes.
/// Mode functions are e^{ik·x}/√(2E V); states use ∏√(2E V) a†|0⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePhi4 {
    pub l_box: f64,
    pub sites: usize,
    pub dim: usize,
    pub mass: f64,
    /// Spatial momentum indices of the Fock modes, in leg order.
    pub modes: Vec<Vec<i64>>,
}

impl LatticePhi4 {
    pub fn new(l_box: f64, sites: usize, dim: usize, mass: f64, modes: Vec<Vec<i64>>) -> Result<Self> {
        if !(l_box > 0.0) || sites == 0 || dim == 0 {
            return Err(LabError::Invalid("lattice needs positive size".into()));
        }
        if modes.iter().any(|m| m.len() != dim) {
            return Err(LabError::Dimension("mode index length must equal dim".into()));
        }
        Ok(Self { l_box, sites, dim, mass, modes })
    }

    pub fn volume(&self) -> f64 {
        self.l_box.powi(self.dim as i32)
    }

    pub fn cell(&self) -> f64 {
        (self.l_box / self.sites as f64).powi(self.dim as i32)
    }

    pub fn energy(&self, mode: usize) -> f64 {
        let k2: f64 = self.modes[mode]
            .iter()
            .map(|&n| (2.0 * PI * n as f64 / self.l_box).powi(2))
            .sum();
        (k2 + self.mass * self.mass).sqrt()
    }

    fn sites_list(&self) -> Vec<Vec<f64>> {
        let a = self.l_box / self.sites as f64;
        let mut pts = vec![Vec::new()];
        for _ in 0..self.dim {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    (0..self.sites).map(move |j| {
                        let mut q = p.clone();
                        q.push(j as f64 * a);
                        q
                    })
                })
                .collect();
        }
        pts
    }

    fn mode_function(&self, mode: usize, x: &[f64]) -> C64 {
        let phase: f64 = self.modes[mode]
            .iter()
            .zip(x)
            .map(|(&n, &xi)| 2.0 * PI * n as f64 / self.l_box * xi)
            .sum();
        C64::from_polar(1.0 / (2.0 * self.energy(mode) * self.volume()).sqrt(), phase)
    }

    /// coeff · cell · Σ_x :φ_{S₁}(x) φ_{S₂}(x) φ_{S₃}(x) φ_{S₄}(x): where φ_S
    /// keeps only the modes in S. Site sums are done numerically.
    pub fn vertex(&self, coeff: f64, factors: &[&[usize]]) -> Vec<Monomial> {
        let xs = self.sites_list();
        let mut choices: Vec<(Vec<(usize, bool)>, Vec<C64>)> = vec![(Vec::new(), vec![c(1.0, 0.0); xs.len()])];
        for set in factors {
            let mut next = Vec::new();
            for (ops, vals) in &choices {
                for &m in set.iter() {
                    let u: Vec<C64> = xs.iter().map(|x| self.mode_function(m, x)).collect();
                    for dagger in [false, true] {
                        let mut o = ops.clone();
                        o.push((m, dagger));
                        let v: Vec<C64> = vals
                            .iter()
                            .zip(&u)
                            .map(|(a, b)| a * if dagger { b.conj() } else { *b })
                            .collect();
                        next.push((o, v));
                    }
                }
            }
            choices = next;
        }
        let mut merged: BTreeMap<Vec<(bool, usize)>, C64> = BTreeMap::new();
        for (ops, vals) in choices {
            let mut key: Vec<(bool, usize)> = ops.iter().map(|&(m, d)| (!d, m)).collect();
            key.sort();
            let sum: C64 = vals.iter().sum();
            *merged.entry(key).or_insert(ZERO) += sum * c(coeff * self.cell(), 0.0);
        }
        merged
            .into_iter()
            .filter(|(_, v)| v.norm() > 1e-300)
            .map(|(key, coeff)| Monomial {
                coeff,
                ops: key.into_iter().map(|(nd, m)| (m, !nd)).collect(),
            })
            .collect()
    }

    /// Full :φ⁴: interaction (λ/4!)·cell·Σ_x :φ(x)⁴: over all modes.
    pub fn phi4(&self, lambda: f64) -> Vec<Monomial> {
        let all: Vec<usize> = (0..self.modes.len()).collect();
        self.vertex(lambda / 24.0, &[&all, &all, &all, &all])
    }

    pub fn apply(&self, monos: &[Monomial], state: &FockState) -> FockState {
        let mut out = FockState::zero(state.legs);
        for mono in monos {
            let mut s = state.clone();
            for &(m, dagger) in mono.ops.iter().rev() {
                s = if dagger { s.create(m) } else { s.annihilate(m) };
                if s.amps.is_empty() {
                    break;
                }
            }
            if !s.amps.is_empty() {
                out = out.add(&s.scale(mono.coeff));
            }
        }
        out
    }

    /// ∏ √(2E V) a†_m |0⟩.
    pub fn relativistic_state(&self, legs: &[usize]) -> FockState {
        let mut s = FockState::vacuum(self.modes.len());
        for &m in legs {
            s = s.create(m).scale(c((2.0 * self.energy(m) * self.volume()).sqrt(), 0.0));
        }
        s
    }

    fn occupation_energy(&self, occ: &[u32]) -> f64 {
        occ.iter().enumerate().map(|(m, &n)| n as f64 * self.energy(m)).sum()
    }

    /// First-order Dyson term −i∫₀ᵀ ⟨f|V_I(t)|i⟩ dt.
    pub fn first_order(&self, v: &[Monomial], t_box: f64, incoming: &[usize], outgoing: &[usize]) -> C64 {
        let i = self.relativistic_state(incoming);
        let f = self.relativistic_state(outgoing);
        let m = f.inner(&self.apply(v, &i));
        let de: f64 = outgoing.iter().map(|&k| self.energy(k)).sum::<f64>()
            - incoming.iter().map(|&p| self.energy(p)).sum::<f64>();
        let time = if de == 0.0 {
            c(t_box, 0.0)
        } else {
            (C64::from_polar(1.0, de * t_box) - 1.0) / c(0.0, de)
        };
        c(0.0, -1.0) * m * time
    }

    /// Coefficient of T in the second-order Dyson term for an energy-conserving
    /// transition, i Σ_n ⟨f|V|n⟩⟨n|V|i⟩/(E_n − E_i). Errors on a resonant
    /// intermediate state.
    pub fn second_order_rate(&self, v: &[Monomial], incoming: &[usize], outgoing: &[usize]) -> Result<C64> {
        let i = self.relativistic_state(incoming);
        let f = self.relativistic_state(outgoing);
        let e_i: f64 = incoming.iter().map(|&p| self.energy(p)).sum();
        let vi = self.apply(v, &i);
        let mut resolved = FockState::zero(i.legs);
        for (occ, amp) in &vi.amps {
            if amp.norm() < 1e-300 {
                continue;
            }
            let gap = self.occupation_energy(occ) - e_i;
            if gap.abs() < 1e-9 {
                return Err(LabError::Pole(format!("resonant intermediate state {occ:?}")));
            }
            resolved.amps.insert(occ.clone(), amp / gap);
        }
        Ok(c(0.0, 1.0) * f.inner(&self.apply(v, &resolved)))
    }
}
