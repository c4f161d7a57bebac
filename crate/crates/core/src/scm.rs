//! Spacetime classical mechanics on a mode grid: Poisson and Dirac brackets
//! on the linear span of {a_n, a*_n}, the constraint C-matrix, and discrete
//! Hamilton-equation residuals.

use crate::error::{LabError, Result};
use crate::modes::{ModeGrid, NEAR_SHELL_WARN, ON_SHELL_TOL};
use crate::operator::{c, expm, inv, Operator, C64, I, ZERO};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Σ_n f_n a_n + g_n a*_n over the modes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearObservable {
    pub a: Vec<C64>,
    pub a_star: Vec<C64>,
}

impl LinearObservable {
    pub fn zero(modes: usize) -> Self {
        Self {
            a: vec![ZERO; modes],
            a_star: vec![ZERO; modes],
        }
    }

    /// The coordinate a_n.
    pub fn a(modes: usize, n: usize) -> Self {
        let mut o = Self::zero(modes);
        o.a[n] = c(1.0, 0.0);
        o
    }

    /// The coordinate a*_n.
    pub fn a_star(modes: usize, n: usize) -> Self {
        let mut o = Self::zero(modes);
        o.a_star[n] = c(1.0, 0.0);
        o
    }

    pub fn modes(&self) -> usize {
        self.a.len()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            a: self.a.iter().map(|x| x * s).collect(),
            a_star: self.a_star.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            a_star: self.a_star.iter().zip(&other.a_star).map(|(x, y)| x + y).collect(),
        }
    }
}

/// Bilinear extension of {a_n, a*_m} = −iδ_nm, {a, a} = {a*, a*} = 0.
pub fn poisson_bracket(f: &LinearObservable, g: &LinearObservable) -> C64 {
    let m = f.modes().min(g.modes());
    let mut s = ZERO;
    for n in 0..m {
        s += -I * f.a[n] * g.a_star[n] + I * f.a_star[n] * g.a[n];
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintClass {
    /// Brackets with every constraint vanish. Not produced by the free
    /// constraint set, whose blocks are either invertible or zero.
    FirstClass,
    SecondClass,
    IdenticallyZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeClassification {
    pub mode: usize,
    pub gap: f64,
    pub class: ConstraintClass,
    pub note: Option<String>,
}

/// φ_{1,n} = Δ_n a_n, φ_{2,n} = Δ_n a*_n for every mode, with the
/// block-diagonal C-matrix C_AB = {φ_A, φ_B}.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub gaps: Vec<f64>,
    /// Constraints in order φ_{1,0}, φ_{2,0}, φ_{1,1}, …
    pub constraints: Vec<LinearObservable>,
    /// One 2×2 block per mode.
    pub blocks: Vec<[[C64; 2]; 2]>,
}

pub fn build_constraints(grid: &ModeGrid) -> ConstraintSet {
    constraints_from_gaps(&grid.gaps())
}

pub fn constraints_from_gaps(gaps: &[f64]) -> ConstraintSet {
    let m = gaps.len();
    let mut constraints = Vec::with_capacity(2 * m);
    let mut blocks = Vec::with_capacity(m);
    for (n, &d) in gaps.iter().enumerate() {
        let p1 = LinearObservable::a(m, n).scale(c(d, 0.0));
        let p2 = LinearObservable::a_star(m, n).scale(c(d, 0.0));
        blocks.push([
            [poisson_bracket(&p1, &p1), poisson_bracket(&p1, &p2)],
            [poisson_bracket(&p2, &p1), poisson_bracket(&p2, &p2)],
        ]);
        constraints.push(p1);
        constraints.push(p2);
    }
    ConstraintSet {
        gaps: gaps.to_vec(),
        constraints,
        blocks,
    }
}

impl ConstraintSet {
    /// Dense C-matrix assembled from the blocks.
    pub fn c_matrix(&self) -> DMatrix<C64> {
        let m = self.blocks.len();
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        for (n, b) in self.blocks.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * n + i, 2 * n + j)] = b[i][j];
                }
            }
        }
        out
    }

    /// Numerical rank of C (relative singular-value cut 1e−12).
    pub fn rank(&self) -> usize {
        let sv = self.c_matrix().singular_values();
        let top = sv.iter().copied().fold(0.0, f64::max);
        sv.iter().filter(|&&s| top > 0.0 && s > 1e-12 * top).count()
    }
}

pub fn classify(cs: &ConstraintSet) -> Vec<ModeClassification> {
    cs.gaps
        .iter()
        .enumerate()
        .map(|(mode, &gap)| {
            let (class, note) = if gap == 0.0 {
                (ConstraintClass::IdenticallyZero, None)
            } else if gap.abs() <= ON_SHELL_TOL {
                (
                    ConstraintClass::IdenticallyZero,
                    Some(format!("|gap| = {:e} within on-shell tolerance", gap.abs())),
                )
            } else if gap.abs() < NEAR_SHELL_WARN {
                (
                    ConstraintClass::SecondClass,
                    Some(format!("near on-shell: C block inverse scales as {:e}", gap.powi(-2))),
                )
            } else {
                (ConstraintClass::SecondClass, None)
            };
            ModeClassification {
                mode,
                gap,
                class,
                note,
            }
        })
        .collect()
}

/// {f,g} − Σ_AB {f,φ_A}(C⁻¹)_AB{φ_B,g}, inverting C block by block over the
/// second-class modes.
pub fn dirac_bracket(f: &LinearObservable, g: &LinearObservable, cs: &ConstraintSet) -> Result<C64> {
    let mut value = poisson_bracket(f, g);
    for entry in classify(cs) {
        if entry.class != ConstraintClass::SecondClass {
            continue;
        }
        let n = entry.mode;
        let b = &cs.blocks[n];
        let block = Operator::from_rows(2, &[b[0][0], b[0][1], b[1][0], b[1][1]])?;
        let cinv = inv(&block)?;
        let phi = [&cs.constraints[2 * n], &cs.constraints[2 * n + 1]];
        for i in 0..2 {
            let left = poisson_bracket(f, phi[i]);
            if left == ZERO {
                continue;
            }
            for j in 0..2 {
                value -= left * cinv.get(i, j) * poisson_bracket(phi[j], g);
            }
        }
    }
    Ok(value)
}

/// Field and momentum of a real scalar on an L-site periodic chain, expanded
/// over the modes of `grid` with coefficient ν/√(2E) per mode and ν² = 1/L.
/// Mode phases are e^{−i(ωt − kx)}; the momentum is the time derivative.
fn field_observable(grid: &ModeGrid, t: f64, x: usize, derivative: bool) -> LinearObservable {
    let m = grid.len();
    let l = grid.l_box;
    let mut o = LinearObservable::zero(m);
    for (i, mode) in grid.modes.iter().enumerate() {
        let k = grid.momentum(&mode.n).first().copied().unwrap_or(0.0);
        let amp = 1.0 / (l * 2.0 * mode.energy).sqrt();
        let phase = C64::from_polar(1.0, -(mode.omega * t - k * x as f64));
        let (fa, fs) = if derivative {
            (-I * mode.omega, I * mode.omega)
        } else {
            (c(1.0, 0.0), c(1.0, 0.0))
        };
        o.a[i] = phase * amp * fa;
        o.a_star[i] = phase.conj() * amp * fs;
    }
    o
}

/// {φ(t,x), π(t′,y)}_DB with both fields expanded over every grid mode.
/// Off-shell modes drop out through the Dirac reduction.
pub fn equal_time_bracket_reconstruction(
    grid: &ModeGrid,
    x: usize,
    y: usize,
    t: f64,
    t_prime: f64,
) -> Result<C64> {
    if grid.modes.iter().any(|m| m.energy <= 0.0) {
        return Err(LabError::Invalid("field expansion needs E > 0 on every mode".into()));
    }
    let cs = build_constraints(grid);
    let phi = field_observable(grid, t, x, false);
    let pi = field_observable(grid, t_prime, y, true);
    dirac_bracket(&phi, &pi, &cs)
}

/// One on-shell mode per momentum 2πn/L of an L-site chain, plus optional
/// off-shell companions with frequency index n₀ on the time box.
pub fn chain_grid(l_sites: usize, mass: f64, t_box: f64, off_shell_n0: &[i64]) -> Result<ModeGrid> {
    let mut g = ModeGrid::empty(t_box, l_sites as f64, mass)?;
    for n in crate::modes::signed_indices(l_sites) {
        g.push_on_shell(vec![n]);
        for &n0 in off_shell_n0 {
            let idx = g.push_indexed(n0, vec![n]);
            if g.modes[idx].is_on_shell() {
                g.modes.pop();
            }
        }
    }
    Ok(g)
}

/// Classical oracle: the (φ,φ) block of expm([[0, I], [−K, 0]]·Δt) for the
/// chain with K = F† diag(k² + m²) F, which equals {φ_x(t), π_y(t′)}.
pub fn classical_flow_bracket(l_sites: usize, mass: f64, dt: f64, x: usize, y: usize) -> f64 {
    let l = l_sites;
    let ks: Vec<f64> = crate::modes::signed_indices(l)
        .iter()
        .map(|&n| 2.0 * PI * n as f64 / l as f64)
        .collect();
    let mut kmat = DMatrix::<C64>::zeros(l, l);
    for a in 0..l {
        for b in 0..l {
            let mut s = ZERO;
            for &k in &ks {
                s += C64::from_polar(1.0, k * (a as f64 - b as f64)) * (k * k + mass * mass);
            }
            kmat[(a, b)] = s / c(l as f64, 0.0);
        }
    }
    let mut gen = DMatrix::<C64>::zeros(2 * l, 2 * l);
    for i in 0..l {
        gen[(i, l + i)] = c(dt, 0.0);
        for j in 0..l {
            gen[(l + i, j)] = -kmat[(i, j)] * dt;
        }
    }
    let flow = expm(&Operator::from_matrix(gen).expect("square"));
    flow.get(x, y).re
}

/// Discrete action S = Σ_t ε[p_t (Dq)_t − p_t²/(2m) − V(q_t)] with the
/// Fourier derivative D on a periodic grid.
#[derive(Debug, Clone)]
pub struct ActionSpec {
    pub eps: f64,
    pub n: usize,
    pub mass: f64,
    /// V(q) = Σ_k coeffs[k]·q^k.
    pub potential: Vec<f64>,
}

impl ActionSpec {
    fn dv(&self, q: f64) -> f64 {
        self.potential
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, ck)| k as f64 * ck * q.powi(k as i32 - 1))
            .sum()
    }
}

/// D_ts = (1/N) Σ_n iω_n e^{iω_n ε(t−s)}, ω_n = 2πn/(Nε), symmetric n-range
/// with the Nyquist mode omitted; real and antisymmetric.
pub fn fourier_derivative(n: usize, eps: f64) -> DMatrix<f64> {
    let ni = n as i64;
    let half = (ni - 1) / 2;
    let mut d = DMatrix::zeros(n, n);
    for t in 0..n {
        for s in 0..n {
            let mut acc = ZERO;
            for k in -half..=half {
                let w = 2.0 * PI * k as f64 / (ni as f64 * eps);
                acc += I * w * C64::from_polar(1.0, w * eps * (t as f64 - s as f64));
            }
            d[(t, s)] = acc.re / n as f64;
        }
    }
    d
}

/// max_t max(|∂S/∂p_t|, |∂S/∂q_t|)/ε, i.e. the larger of
/// |(Dq)_t − p_t/m| and |(Dp)_t + V′(q_t)|.
pub fn hamilton_constraint_residual(spec: &ActionSpec, q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != spec.n || p.len() != spec.n {
        return Err(LabError::Dimension("trajectory length differs from N".into()));
    }
    let d = fourier_derivative(spec.n, spec.eps);
    let qv = nalgebra::DVector::from_column_slice(q);
    let pv = nalgebra::DVector::from_column_slice(p);
    let dq = &d * &qv;
    let dp = &d * &pv;
    let mut worst: f64 = 0.0;
    for t in 0..spec.n {
        let dsdp = dq[t] - p[t] / spec.mass;
        let dsdq = dp[t] + spec.dv(q[t]);
        worst = worst.max(dsdp.abs()).max(dsdq.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_mode(gap: f64) -> ConstraintSet {
        constraints_from_gaps(&[gap])
    }

    #[test]
    fn bracket_examples() {
        let a = LinearObservable::a(2, 0);
        let s = LinearObservable::a_star(2, 0);
        assert_eq!(poisson_bracket(&a, &s), -I);
        assert_eq!(poisson_bracket(&a, &a), ZERO);
        let f = a.scale(c(2.0, 0.0)).add(&LinearObservable::a(2, 1));
        assert_eq!(poisson_bracket(&f, &s), c(0.0, -2.0));
    }

    #[test]
    fn constraint_examples() {
        let on = one_mode(0.0);
        assert_eq!(on.blocks[0], [[ZERO, ZERO], [ZERO, ZERO]]);
        let two = one_mode(2.0);
        assert_eq!(two.blocks[0], [[ZERO, c(0.0, -4.0)], [c(0.0, 4.0), ZERO]]);
        assert_eq!(one_mode(0.3).rank(), 2);
        assert_eq!(classify(&two)[0].class, ConstraintClass::SecondClass);
        assert_eq!(classify(&on)[0].class, ConstraintClass::IdenticallyZero);
        let tiny = classify(&one_mode(1e-13));
        assert_eq!(tiny[0].class, ConstraintClass::IdenticallyZero);
        assert!(tiny[0].note.is_some());
    }

    #[test]
    fn dirac_examples() {
        let cs = constraints_from_gaps(&[0.0, 0.7]);
        let on = dirac_bracket(&LinearObservable::a(2, 0), &LinearObservable::a_star(2, 0), &cs).unwrap();
        assert_eq!(on, -I);
        let off = dirac_bracket(&LinearObservable::a(2, 1), &LinearObservable::a_star(2, 1), &cs).unwrap();
        assert!(off.norm() < 1e-12);
        let f = LinearObservable::a(2, 0).add(&LinearObservable::a(2, 1));
        let g = LinearObservable::a_star(2, 0).add(&LinearObservable::a_star(2, 1));
        assert!((dirac_bracket(&f, &g, &cs).unwrap() + I).norm() < 1e-12);
    }

    #[test]
    fn field_brackets() {
        let l = 4;
        let g = chain_grid(l, 0.8, 10.0, &[1, 2, -1]).unwrap();
        assert!(g.len() > l);
        for x in 0..l {
            for y in 0..l {
                let v = equal_time_bracket_reconstruction(&g, x, y, 0.3, 0.3).unwrap();
                let expect = if x == y { 1.0 } else { 0.0 };
                assert!((v - c(expect, 0.0)).norm() < 1e-12, "x={x} y={y} v={v}");
            }
        }
        let v = equal_time_bracket_reconstruction(&g, 0, 1, 0.9, 0.2).unwrap();
        let oracle = classical_flow_bracket(l, 0.8, 0.7, 0, 1);
        assert!(v.norm() > 1e-3);
        assert!((v - c(oracle, 0.0)).norm() < 1e-10, "{v} vs {oracle}");
    }

    #[test]
    fn hamilton_residuals() {
        let n = 16;
        let eps = 0.25;
        let free = ActionSpec {
            eps,
            n,
            mass: 1.0,
            potential: vec![],
        };
        assert!(hamilton_constraint_residual(&free, &vec![0.4; n], &vec![0.0; n]).unwrap() < 1e-10);
        let m = 1.3;
        let w = 2.0 * PI * 3.0 / (n as f64 * eps);
        let ho = ActionSpec {
            eps,
            n,
            mass: m,
            potential: vec![0.0, 0.0, 0.5 * m * w * w],
        };
        let q: Vec<f64> = (0..n).map(|t| 0.7 * (w * eps * t as f64).cos()).collect();
        let p: Vec<f64> = (0..n).map(|t| -m * w * 0.7 * (w * eps * t as f64).sin()).collect();
        assert!(hamilton_constraint_residual(&ho, &q, &p).unwrap() < 1e-10);
        let junk: Vec<f64> = (0..n).map(|t| ((t * 7 % 5) as f64) - 2.0).collect();
        assert!(hamilton_constraint_residual(&ho, &junk, &q).unwrap() > 1e-2);
    }
}
