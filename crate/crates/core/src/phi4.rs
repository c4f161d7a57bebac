//! Perturbative λφ⁴ transition amplitudes from Gaussian-trace Wick sums.
//!
//! External legs carry the factor −i√(2E)(ω − E + iεᵢ) times their contraction
//! with a vertex field, so each leg tends to 1 as τ → 0. Vertex integrals run
//! over continuous periodic time [0, T) and the lattice sites, giving
//! T·V·δ (Kronecker) when the process conserves momentum. Internal lines use
//! the grid propagator D̃(q) = (1/2E)[g⁺(q) + g⁻(−q)] with
//! g⁺ = τ/(1 − e^{−λ}), g⁻ = τ/(e^{λ} − 1).

use crate::error::{LabError, Result};
use crate::gaussian::{action_lambda, anti_occupation, occupation};
use crate::modes::{signed_indices, ModeGrid};
use crate::operator::{c, C64, ZERO};
use crate::wick::{connected_filter, enumerate_pairings, evaluate_pairings, ContractionKernel, InsertionKind, InsertionList, Pairing};
use std::f64::consts::PI;

/// Periodic spatial lattice (`sites` per axis, `dim` axes) with a periodic
/// time box and a symmetric frequency window −W..=W for internal lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringGrid {
    pub l_box: f64,
    pub sites: usize,
    pub dim: usize,
    pub mass: f64,
    pub t_box: f64,
    pub freq_window: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regulators {
    pub tau: f64,
    pub eps_i: f64,
}

/// Spatial momentum indices of the incoming and outgoing particles.
#[derive(Debug, Clone, PartialEq)]
pub struct Process {
    pub incoming: Vec<Vec<i64>>,
    pub outgoing: Vec<Vec<i64>>,
}

impl Process {
    pub fn two_to_two(p1: &[i64], p2: &[i64], k1: &[i64], k2: &[i64]) -> Self {
        Self {
            incoming: vec![p1.to_vec(), p2.to_vec()],
            outgoing: vec![k1.to_vec(), k2.to_vec()],
        }
    }

    fn legs(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.incoming.iter().chain(&self.outgoing)
    }
}

/// One-loop 2→2 channels, named by which external legs share a vertex:
/// S = {p₁,p₂}, T = {p₁,k₁}, U = {p₁,k₂}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Channel {
    S,
    T,
    U,
}

impl ScatteringGrid {
    pub fn new(l_box: f64, sites: usize, dim: usize, mass: f64, t_box: f64, freq_window: i64) -> Result<Self> {
        if !(l_box > 0.0 && t_box > 0.0) || sites == 0 || dim == 0 || freq_window < 0 {
            return Err(LabError::Invalid("scattering grid needs positive sizes".into()));
        }
        if mass < 0.0 {
            return Err(LabError::Invalid("mass must be non-negative".into()));
        }
        Ok(Self {
            l_box,
            sites,
            dim,
            mass,
            t_box,
            freq_window,
        })
    }

    pub fn volume(&self) -> f64 {
        self.l_box.powi(self.dim as i32)
    }

    pub fn spacetime_volume(&self) -> f64 {
        self.t_box * self.volume()
    }

    /// All spatial momentum indices, axis-major.
    pub fn spatial_modes(&self) -> Vec<Vec<i64>> {
        let axis = signed_indices(self.sites);
        let mut out = vec![Vec::new()];
        for _ in 0..self.dim {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&n| {
                        let mut q = p.clone();
                        q.push(n);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Reduce an index vector to the signed representatives of Z_sites.
    pub fn wrap(&self, n: &[i64]) -> Vec<i64> {
        let l = self.sites as i64;
        n.iter()
            .map(|&x| {
                let r = x.rem_euclid(l);
                if r > l / 2 {
                    r - l
                } else {
                    r
                }
            })
            .collect()
    }

    pub fn energy(&self, n: &[i64]) -> f64 {
        let k2: f64 = n
            .iter()
            .map(|&x| (2.0 * PI * x as f64 / self.l_box).powi(2))
            .sum();
        (k2 + self.mass * self.mass).sqrt()
    }

    /// Mode grid of the given spatial modes over the full frequency window.
    pub fn mode_grid(&self, spatial: &[Vec<i64>]) -> Result<ModeGrid> {
        let mut g = ModeGrid::empty(self.t_box, self.l_box, self.mass)?;
        for n0 in -self.freq_window..=self.freq_window {
            for n in spatial {
                g.push_indexed(n0, n.clone());
            }
        }
        Ok(g)
    }

    fn check_process(&self, proc_: &Process) -> Result<()> {
        let legs: Vec<Vec<i64>> = proc_.legs().map(|n| self.wrap(n)).collect();
        if proc_.legs().any(|n| n.len() != self.dim) {
            return Err(LabError::Dimension(format!("momenta must have {} components", self.dim)));
        }
        for i in 0..legs.len() {
            for j in i + 1..legs.len() {
                if legs[i] == legs[j] {
                    return Err(LabError::Invalid(format!("coincident external momenta {:?}", legs[i])));
                }
            }
        }
        Ok(())
    }

    /// Σ_x cell·e^{iK·x} over the lattice: V when K ≡ 0, else exactly 0.
    fn site_sum(&self, k: &[i64]) -> f64 {
        if self.wrap(k).iter().all(|&x| x == 0) {
            self.volume()
        } else {
            0.0
        }
    }

    /// ∫₀ᵀ e^{−iΩt} dt.
    fn time_integral(&self, omega: f64) -> C64 {
        if omega == 0.0 {
            c(self.t_box, 0.0)
        } else {
            (c(1.0, 0.0) - C64::from_polar(1.0, -omega * self.t_box)) / c(0.0, omega)
        }
    }
}

/// Contraction of a vertex field with an on-shell external leg:
/// (2E)^{-1/2}·τ/(1 − e^{−λ}) for incoming, (2E)^{-1/2}·τ/(e^{λ} − 1) for outgoing.
pub fn leg_contraction(energy: f64, incoming: bool, reg: Regulators) -> Result<C64> {
    let lam = action_lambda(0.0, reg.tau, reg.eps_i);
    let g = if incoming { anti_occupation(lam)? } else { occupation(lam)? };
    Ok(g * c(reg.tau / (2.0 * energy).sqrt(), 0.0))
}

/// −i√(2E)(ω − E + iεᵢ) at ω = E.
pub fn leg_prefactor(energy: f64, reg: Regulators) -> C64 {
    c(0.0, -(2.0 * energy).sqrt()) * c(0.0, reg.eps_i)
}

/// Momentum-space grid propagator D̃(ω, E).
pub fn internal_propagator(omega: f64, energy: f64, reg: Regulators) -> Result<C64> {
    let plus = anti_occupation(action_lambda(omega - energy, reg.tau, reg.eps_i))?;
    let minus = occupation(action_lambda(-omega - energy, reg.tau, reg.eps_i))?;
    Ok((plus + minus) * c(reg.tau / (2.0 * energy), 0.0))
}

fn external_insertions(ins: &mut InsertionList, proc_: &Process) {
    for (i, _) in proc_.incoming.iter().enumerate() {
        ins.push_external(InsertionKind::Create, i, 0);
    }
    for (k, _) in proc_.outgoing.iter().enumerate() {
        ins.push_external(InsertionKind::Annihilate, proc_.incoming.len() + k, 0);
    }
}

fn leg_table(grid: &ScatteringGrid, proc_: &Process, reg: Regulators) -> Result<Vec<(C64, C64)>> {
    let n_in = proc_.incoming.len();
    proc_
        .legs()
        .enumerate()
        .map(|(idx, n)| {
            let e = grid.energy(n);
            Ok((leg_contraction(e, idx < n_in, reg)?, leg_prefactor(e, reg)))
        })
        .collect()
}

/// Tr[R′] at first order for a four-leg process.
pub fn phi4_first_order(grid: &ScatteringGrid, reg: Regulators, lambda: f64, proc_: &Process) -> Result<C64> {
    if proc_.incoming.len() + proc_.outgoing.len() != 4 {
        return Err(LabError::Invalid("first-order φ⁴ needs exactly four external legs".into()));
    }
    grid.check_process(proc_)?;
    let legs = leg_table(grid, proc_, reg)?;
    let mut ins = InsertionList::new();
    ins.push_vertex(0, 0, 4);
    external_insertions(&mut ins, proc_);

    let tadpole = tadpole(grid, reg)?;
    let kernel = ContractionKernel::from_fn(ins.len(), |i, j| match (i < 4, j < 4) {
        (true, true) => tadpole,
        (true, false) => legs[j - 4].0,
        // Distinct external momenta never contract with each other.
        _ => ZERO,
    });
    let pairings = connected_filter(&enumerate_pairings(ins.len())?, &ins.groups());
    let wick = evaluate_pairings(&pairings, &kernel)?;

    let mut k_net = vec![0i64; grid.dim];
    for n in &proc_.incoming {
        k_net.iter_mut().zip(n).for_each(|(a, b)| *a += b);
    }
    for n in &proc_.outgoing {
        k_net.iter_mut().zip(n).for_each(|(a, b)| *a -= b);
    }
    let space = grid.site_sum(&k_net);
    if space == 0.0 {
        return Ok(ZERO);
    }
    let omega: f64 = proc_.incoming.iter().map(|n| grid.energy(n)).sum::<f64>()
        - proc_.outgoing.iter().map(|n| grid.energy(n)).sum::<f64>();
    let vertex = c(0.0, -lambda / 24.0) * grid.time_integral(omega) * space;
    let pref: C64 = legs.iter().map(|l| l.1).product();
    Ok(pref * vertex * wick)
}

/// Convenience form of `phi4_first_order` for p₁ p₂ → k₁ k₂.
pub fn phi4_first_order_2to2(
    grid: &ScatteringGrid,
    reg: Regulators,
    lambda: f64,
    p1: &[i64],
    p2: &[i64],
    k1: &[i64],
    k2: &[i64],
) -> Result<C64> {
    phi4_first_order(grid, reg, lambda, &Process::two_to_two(p1, p2, k1, k2))
}

/// Equal-point grid propagator Σ_q D̃(q)/(TV) over every mode.
fn tadpole(grid: &ScatteringGrid, reg: Regulators) -> Result<C64> {
    let mg = grid.mode_grid(&grid.spatial_modes())?;
    let mut acc = ZERO;
    for m in &mg.modes {
        acc += internal_propagator(m.omega, m.energy, reg)?;
    }
    Ok(acc / grid.spacetime_volume())
}

/// Pairings of a two-vertex, four-leg insertion list (vertex fields 0..8,
/// legs 8..12) that realize the given one-loop channel.
pub fn channel_pairings(channel: Channel) -> Result<Vec<Pairing>> {
    let mut ins = InsertionList::new();
    ins.push_vertex(0, 0, 4);
    ins.push_vertex(1, 0, 4);
    for leg in 0..4 {
        ins.push_external(InsertionKind::Field, leg, 0);
    }
    let at_z: [usize; 2] = match channel {
        Channel::S => [0, 1],
        Channel::T => [0, 2],
        Channel::U => [0, 3],
    };
    let vertex_of = |i: usize| i / 4;
    let all = connected_filter(&enumerate_pairings(12)?, &ins.groups());
    Ok(all
        .into_iter()
        .filter(|p| {
            let mut z_legs = Vec::new();
            for &(i, j) in &p.pairs {
                match (i < 8, j < 8) {
                    (true, true) if vertex_of(i) == vertex_of(j) => return false,
                    (false, false) => return false,
                    (true, false) if vertex_of(i) == 0 => z_legs.push(j - 8),
                    _ => {}
                }
            }
            z_legs.sort();
            let comp: Vec<usize> = (0..4).filter(|l| !at_z.contains(l)).collect();
            z_legs == at_z || z_legs == comp
        })
        .collect())
}

/// Second-order one-loop contribution of one channel to Tr[R′]. Internal
/// lines run over the spatial modes not used by external legs. The vertex is
/// normal ordered: tadpoles and external-leg corrections are excluded.
pub fn one_loop_channel(grid: &ScatteringGrid, reg: Regulators, lambda: f64, proc_: &Process, channel: Channel) -> Result<C64> {
    if proc_.incoming.len() != 2 || proc_.outgoing.len() != 2 {
        return Err(LabError::Invalid("one-loop channels are defined for 2→2".into()));
    }
    grid.check_process(proc_)?;
    let legs = leg_table(grid, proc_, reg)?;
    let ext: Vec<Vec<i64>> = proc_.legs().cloned().collect();
    let energies: Vec<f64> = ext.iter().map(|n| grid.energy(n)).collect();

    let pairings = channel_pairings(channel)?;
    let mut kernel = ContractionKernel::new();
    for i in 0..8 {
        for j in 8..12 {
            kernel.insert(i, j, legs[j - 8].0);
        }
        for j in 4..8 {
            if i < 4 {
                kernel.insert(i, j, c(1.0, 0.0));
            }
        }
    }
    let wick = evaluate_pairings(&pairings, &kernel)?;

    // Net incoming four-momentum at the vertex holding p₁.
    let partner = match channel {
        Channel::S => 1,
        Channel::T => 2,
        Channel::U => 3,
    };
    let sign = |leg: usize| if leg < 2 { 1i64 } else { -1 };
    let sign_f = |leg: usize| if leg < 2 { 1.0 } else { -1.0 };
    let p_z: Vec<i64> = (0..grid.dim)
        .map(|a| sign(0) * ext[0][a] + sign(partner) * ext[partner][a])
        .collect();
    let omega_z = sign_f(0) * energies[0] + sign_f(partner) * energies[partner];

    let total: Vec<i64> = (0..grid.dim)
        .map(|a| ext[0][a] + ext[1][a] - ext[2][a] - ext[3][a])
        .collect();
    if grid.wrap(&total).iter().any(|&x| x != 0) {
        return Ok(ZERO);
    }
    let omega_total = energies[0] + energies[1] - energies[2] - energies[3];
    if omega_total.abs() > 1e-12 * energies[0] {
        return Err(LabError::Invalid("one-loop channels need an energy-conserving process".into()));
    }
    let n_z = omega_z * grid.t_box / (2.0 * PI);
    if (n_z - n_z.round()).abs() > 1e-9 {
        return Err(LabError::Invalid(format!("channel frequency {omega_z} is off the grid")));
    }
    let n_z = n_z.round() as i64;

    let external: Vec<Vec<i64>> = ext.iter().map(|n| grid.wrap(n)).collect();
    let loop_modes: Vec<Vec<i64>> = grid
        .spatial_modes()
        .into_iter()
        .filter(|n| !external.contains(n))
        .collect();
    // Lines q and q′ with q + q′ = −P_z.
    let mut bubble = ZERO;
    for q in &loop_modes {
        let q2: Vec<i64> = grid.wrap(&(0..grid.dim).map(|a| -p_z[a] - q[a]).collect::<Vec<_>>());
        if !loop_modes.contains(&q2) {
            continue;
        }
        let (e1, e2) = (grid.energy(q), grid.energy(&q2));
        let mut terms = Vec::new();
        for n0 in -grid.freq_window..=grid.freq_window {
            let n0b = -n_z - n0;
            if n0b.abs() > grid.freq_window {
                continue;
            }
            let w1 = 2.0 * PI * n0 as f64 / grid.t_box;
            let w2 = 2.0 * PI * n0b as f64 / grid.t_box;
            terms.push(internal_propagator(w1, e1, reg)? * internal_propagator(w2, e2, reg)?);
        }
        bubble += terms.iter().sum::<C64>();
    }
    let vertex = c(0.0, -lambda / 24.0);
    let pref: C64 = legs.iter().map(|l| l.1).product();
    Ok(pref * vertex * vertex * c(0.5, 0.0) * wick * bubble)
}

/// Tr[R′] through the requested order (1 or 2); order 2 adds the listed
/// one-loop channels.
pub fn smatrix_element(
    grid: &ScatteringGrid,
    reg: Regulators,
    lambda: f64,
    proc_: &Process,
    order: usize,
    channels: &[Channel],
) -> Result<C64> {
    match order {
        1 => phi4_first_order(grid, reg, lambda, proc_),
        2 => {
            let mut v = phi4_first_order(grid, reg, lambda, proc_)?;
            for &ch in channels {
                v += one_loop_channel(grid, reg, lambda, proc_, ch)?;
            }
            Ok(v)
        }
        _ => Err(LabError::Invalid(format!("unsupported perturbative order {order}"))),
    }
}

/// Amplitudes on a halving τ sweep with a Richardson estimate of the τ → 0
/// limit and the log–log slope of |A| over the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSweep {
    pub taus: Vec<f64>,
    pub values: Vec<C64>,
    pub extrapolated: C64,
    pub slope: f64,
}

pub fn tau_sweep(tau0: f64, steps: usize, f: impl Fn(f64) -> Result<C64>) -> Result<TauSweep> {
    if steps < 2 {
        return Err(LabError::Invalid("a τ sweep needs at least two points".into()));
    }
    let taus: Vec<f64> = (0..steps).map(|k| tau0 / 2f64.powi(k as i32)).collect();
    let values = taus.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let n = values.len();
    let extrapolated = values[n - 1] * 2.0 - values[n - 2];
    let (a, b) = (values[0].norm(), values[n - 1].norm());
    let slope = if a > 0.0 && b > 0.0 { (a / b).ln() / (taus[0] / taus[n - 1]).ln() } else { 0.0 };
    Ok(TauSweep {
        taus,
        values,
        extrapolated,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::LatticePhi4;

    fn grid() -> ScatteringGrid {
        ScatteringGrid::new(2.0 * PI, 3, 2, 1.0, 40.0, 64).unwrap()
    }

    #[test]
    fn first_order_conserving_and_violating() {
        let g = grid();
        let lam = 0.3;
        let reg = Regulators { tau: 1e-3, eps_i: 0.05 };
        let a = phi4_first_order_2to2(&g, reg, lam, &[1, 0], &[-1, 0], &[0, 1], &[0, -1]).unwrap();
        let target = c(0.0, -lam * g.spacetime_volume());
        assert!((a - target).norm() < 1e-3 * target.norm());
        let zero = phi4_first_order_2to2(&g, reg, lam, &[1, 0], &[-1, 0], &[0, 1], &[1, 1]).unwrap();
        assert_eq!(zero, ZERO);
        assert!(phi4_first_order_2to2(&g, reg, lam, &[1, 0], &[1, 0], &[0, 1], &[0, 1]).is_err());
    }

    #[test]
    fn first_order_matches_dyson() {
        let g = grid();
        let lam = 0.3;
        let sweep = tau_sweep(1e-2, 3, |tau| {
            phi4_first_order_2to2(&g, Regulators { tau, eps_i: 0.05 }, lam, &[1, 0], &[-1, 0], &[0, 1], &[0, -1])
        })
        .unwrap();
        let modes = vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]];
        let lat = LatticePhi4::new(g.l_box, 3, 2, 1.0, modes).unwrap();
        let oracle = lat.first_order(&lat.phi4(lam), g.t_box, &[0, 1], &[2, 3]);
        assert!((sweep.extrapolated - oracle).norm() < 1e-6 * oracle.norm(), "{} vs {oracle}", sweep.extrapolated);
        assert!(sweep.slope.abs() < 1e-2);
    }

    #[test]
    fn channel_pairing_count() {
        for ch in [Channel::S, Channel::T, Channel::U] {
            assert_eq!(channel_pairings(ch).unwrap().len(), 576);
        }
    }

    #[test]
    fn t_channel_matches_dyson_rate() {
        let g = ScatteringGrid::new(2.0 * PI, 3, 2, 1.0, 2000.0, 12_800).unwrap();
        let lam = 0.3;
        let reg = Regulators { tau: 1e-6, eps_i: 0.01 };
        let proc_ = Process::two_to_two(&[1, 0], &[-1, 0], &[0, 1], &[0, -1]);
        let amp = one_loop_channel(&g, reg, lam, &proc_, Channel::T).unwrap();
        let mut modes = proc_.incoming.clone();
        modes.extend(proc_.outgoing.clone());
        let internal: Vec<Vec<i64>> = g.spatial_modes().into_iter().filter(|n| !modes.contains(n)).collect();
        modes.extend(internal);
        let lat = LatticePhi4::new(g.l_box, 3, 2, 1.0, modes).unwrap();
        let int: Vec<usize> = (4..9).collect();
        let mut v = lat.vertex(lam / 2.0, &[&[0], &[2], &int, &int]);
        v.extend(lat.vertex(lam / 2.0, &[&[1], &[3], &int, &int]));
        let rate = lat.second_order_rate(&v, &[0, 1], &[2, 3]).unwrap();
        let ours = amp / g.t_box;
        assert!((ours - rate).norm() < 0.05 * rate.norm(), "{ours} vs {rate}");
    }
}
