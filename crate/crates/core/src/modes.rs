//! Discrete frequency/momentum modes shared by the constraint, Gaussian and
//! Wick modules.
//!
//! Frequencies are ω = 2πn₀/T on a time box of length T; spatial momenta are
//! k = 2πnᵢ/L on a box of side L; E = √(k² + m²); the gap is Δ = ω − E.

use crate::error::{LabError, Result};
use std::f64::consts::PI;

/// |Δ| at or below this counts as on-shell.
pub const ON_SHELL_TOL: f64 = 1e-12;
/// |Δ| below this gets a conditioning warning (C⁻¹ grows like Δ⁻²).
pub const NEAR_SHELL_WARN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// Frequency index; `None` for modes placed by hand.
    pub n0: Option<i64>,
    /// Spatial indices.
    pub n: Vec<i64>,
    pub omega: f64,
    pub energy: f64,
}

impl Mode {
    pub fn gap(&self) -> f64 {
        self.omega - self.energy
    }

    pub fn is_on_shell(&self) -> bool {
        self.gap().abs() <= ON_SHELL_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    pub t_box: f64,
    pub l_box: f64,
    pub mass: f64,
    pub modes: Vec<Mode>,
}

impl ModeGrid {
    pub fn empty(t_box: f64, l_box: f64, mass: f64) -> Result<Self> {
        if !(t_box > 0.0 && l_box > 0.0) {
            return Err(LabError::Invalid("box lengths must be positive".into()));
        }
        if mass < 0.0 {
            return Err(LabError::Invalid("mass must be non-negative".into()));
        }
        Ok(Self {
            t_box,
            l_box,
            mass,
            modes: Vec::new(),
        })
    }

    /// Full product grid over the given frequency and spatial index ranges.
    pub fn product(
        t_box: f64,
        l_box: f64,
        mass: f64,
        n0s: &[i64],
        spatial: &[Vec<i64>],
    ) -> Result<Self> {
        let mut g = Self::empty(t_box, l_box, mass)?;
        let mut combos: Vec<Vec<i64>> = vec![Vec::new()];
        for axis in spatial {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    axis.iter().map(move |&x| {
                        let mut c = c.clone();
                        c.push(x);
                        c
                    })
                })
                .collect();
        }
        for &n0 in n0s {
            for n in &combos {
                g.push_indexed(n0, n.clone());
            }
        }
        Ok(g)
    }

    pub fn frequency(&self, n0: i64) -> f64 {
        2.0 * PI * n0 as f64 / self.t_box
    }

    pub fn momentum(&self, n: &[i64]) -> Vec<f64> {
        n.iter().map(|&x| 2.0 * PI * x as f64 / self.l_box).collect()
    }

    pub fn spatial_energy(&self, n: &[i64]) -> f64 {
        let k2: f64 = self.momentum(n).iter().map(|k| k * k).sum();
        (k2 + self.mass * self.mass).sqrt()
    }

    /// Add the grid mode (n₀, n); returns its index.
    pub fn push_indexed(&mut self, n0: i64, n: Vec<i64>) -> usize {
        let omega = self.frequency(n0);
        let energy = self.spatial_energy(&n);
        self.modes.push(Mode {
            n0: Some(n0),
            n,
            omega,
            energy,
        });
        self.modes.len() - 1
    }

    /// Add the on-shell mode ω = E for spatial index n; returns its index.
    pub fn push_on_shell(&mut self, n: Vec<i64>) -> usize {
        let energy = self.spatial_energy(&n);
        self.modes.push(Mode {
            n0: None,
            n,
            omega: energy,
            energy,
        });
        self.modes.len() - 1
    }

    /// Add a mode with explicit frequency and energy; returns its index.
    pub fn push_custom(&mut self, omega: f64, energy: f64) -> usize {
        self.modes.push(Mode {
            n0: None,
            n: Vec::new(),
            omega,
            energy,
        });
        self.modes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.modes.iter().map(Mode::gap).collect()
    }
}

/// Signed representatives −⌊(L−1)/2⌋ … ⌊L/2⌋ of Z_L.
pub fn signed_indices(l: usize) -> Vec<i64> {
    let l = l as i64;
    (0..l).map(|j| if j > l / 2 { j - l } else { j }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = ModeGrid::product(2.0 * PI, 2.0 * PI, 1.0, &[0, 1, 2], &[vec![0]]).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.modes[1].is_on_shell());
        assert!(!g.modes[0].is_on_shell());
        assert!((g.modes[2].gap() - 1.0).abs() < 1e-15);
        assert_eq!(signed_indices(4), vec![0, 1, 2, -1]);
        assert_eq!(signed_indices(5), vec![0, 1, 2, -2, -1]);
        assert!(ModeGrid::empty(-1.0, 1.0, 0.0).is_err());
    }
}
