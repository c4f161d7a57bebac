//! Seeded random operators and states.
//!
//! Hermitian matrices come from a complex Ginibre matrix G with i.i.d.
//! standard normal real and imaginary parts, hermitized as (G + G†)/2.
//! Kets are normalized Ginibre vectors. The generator is ChaCha8 seeded
//! from a `u64`, so every draw is reproducible across platforms.

use crate::operator::{c, Ket, Operator, C64};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub struct LabRng {
    inner: ChaCha8Rng,
}

impl LabRng {
    pub fn seed(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn complex_normal(&mut self) -> C64 {
        let re = self.normal();
        let im = self.normal();
        c(re, im)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        use rand::Rng;
        self.inner.random_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        use rand::Rng;
        self.inner.random_range(0..n)
    }

    pub fn ginibre(&mut self, n: usize) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |_, _| self.complex_normal())
    }

    pub fn hermitian(&mut self, n: usize) -> Operator {
        let g = self.ginibre(n);
        let h = (&g + g.adjoint()) * c(0.5, 0.0);
        Operator::from_matrix(h).expect("square")
    }

    /// General (non-hermitian) operator.
    pub fn operator(&mut self, n: usize) -> Operator {
        Operator::from_matrix(self.ginibre(n)).expect("square")
    }

    pub fn ket(&mut self, n: usize) -> Ket {
        let v = DVector::from_fn(n, |_, _| self.complex_normal());
        Ket::new(vec![n], v)
            .expect("length")
            .normalized()
            .expect("nonzero draw")
    }
}
