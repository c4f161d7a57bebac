//! Dense complex operators with an attached tensor factorization.
//!
//! Index convention: row-major, the first factor is the slowest-varying
//! index. For a sliced space this means slice 0 comes first.

use crate::error::{LabError, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

/// Shorthand complex constructor.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Square complex matrix acting on `dims[0] ⊗ dims[1] ⊗ …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    mat: DMatrix<C64>,
}

/// Complex vector on `dims[0] ⊗ dims[1] ⊗ …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    dims: Vec<usize>,
    vec: DVector<C64>,
}

fn total(dims: &[usize]) -> usize {
    dims.iter().product()
}

impl Operator {
    pub fn new(dims: Vec<usize>, mat: DMatrix<C64>) -> Result<Self> {
        let n = total(&dims);
        if mat.nrows() != n || mat.ncols() != n {
            return Err(LabError::Dimension(format!(
                "matrix {}x{} does not match dims {:?}",
                mat.nrows(),
                mat.ncols(),
                dims
            )));
        }
        Ok(Self { dims, mat })
    }

    /// Single-factor operator from a square matrix.
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        let n = mat.nrows();
        Self::new(vec![n], mat)
    }

    /// Single-factor operator from row-major entries.
    pub fn from_rows(n: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(LabError::Dimension(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(n, n, entries))
    }

    /// Real diagonal operator on a single factor.
    pub fn diag(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| c(x, 0.0)).collect();
        Self {
            dims: vec![values.len()],
            mat: DMatrix::from_diagonal(&DVector::from_vec(v)),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = total(dims);
        Self {
            dims: dims.to_vec(),
            mat: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = total(dims);
        Self {
            dims: dims.to_vec(),
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, r: usize, col: usize) -> C64 {
        self.mat[(r, col)]
    }

    /// Same entries, new factorization of the same total dimension.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, self.mat)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dims: self.dims.clone(),
            mat: &self.mat * s,
        }
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Operator) -> Self {
        &(self * other) + &(other * self)
    }

    /// ‖A − A†‖_F.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).norm()
    }

    /// ‖A − A†‖_F / ‖A‖_F, zero for the zero operator.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            0.0
        } else {
            self.hermiticity_defect() / n
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// ‖A†A − I‖_F.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        (self.mat.adjoint() * &self.mat - DMatrix::<C64>::identity(n, n)).norm()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, ket: &Ket) -> Ket {
        Ket {
            dims: ket.dims.clone(),
            vec: &self.mat * &ket.vec,
        }
    }

    /// ⟨a|A|b⟩.
    pub fn sandwich(&self, bra: &Ket, ket: &Ket) -> C64 {
        bra.vec.dotc(&(&self.mat * &ket.vec))
    }

    /// Eigenvalues (complex, Schur-based), sorted by real then imaginary part.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let mut ev: Vec<C64> = match self.mat.clone().schur().eigenvalues() {
            Some(v) => v.iter().copied().collect(),
            None => self.mat.clone().schur().unpack().1.diagonal().iter().copied().collect(),
        };
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        ev
    }

    /// Real eigenvalues of the hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.mat + self.mat.adjoint()) * c(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator {
            dims: self.dims.clone(),
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator {
            dims: self.dims.clone(),
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator {
            dims: self.dims.clone(),
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator {
            dims: self.dims.clone(),
            mat: -&self.mat,
        }
    }
}

impl Ket {
    pub fn new(dims: Vec<usize>, vec: DVector<C64>) -> Result<Self> {
        if vec.len() != total(&dims) {
            return Err(LabError::Dimension(format!(
                "vector of length {} does not match dims {:?}",
                vec.len(),
                dims
            )));
        }
        Ok(Self { dims, vec })
    }

    pub fn from_slice(entries: &[C64]) -> Self {
        Self {
            dims: vec![entries.len()],
            vec: DVector::from_column_slice(entries),
        }
    }

    pub fn basis(dims: &[usize], index: usize) -> Result<Self> {
        let n = total(dims);
        if index >= n {
            return Err(LabError::IndexOutOfRange { index, limit: n });
        }
        let mut vec = DVector::zeros(n);
        vec[index] = ONE;
        Ok(Self {
            dims: dims.to_vec(),
            vec,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.vec
    }

    pub fn get(&self, i: usize) -> C64 {
        self.vec[i]
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(LabError::Invalid("cannot normalize a zero or non-finite ket".into()));
        }
        Ok(self.scale(c(1.0 / n, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dims: self.dims.clone(),
            vec: &self.vec * s,
        }
    }

    pub fn add(&self, other: &Ket) -> Self {
        Self {
            dims: self.dims.clone(),
            vec: &self.vec + &other.vec,
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.vec.dotc(&other.vec)
    }

    /// |self⟩⟨other|.
    pub fn outer(&self, other: &Ket) -> Operator {
        Operator {
            dims: self.dims.clone(),
            mat: &self.vec * other.vec.adjoint(),
        }
    }

    pub fn projector(&self) -> Operator {
        self.outer(self)
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ket {
            dims,
            vec: self.vec.kronecker(&other.vec),
        }
    }
}

/// Tensor product; `a` is the slow index.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Operator {
        dims,
        mat: a.mat.kronecker(&b.mat),
    }
}

/// Tensor product of a non-empty list, left to right.
pub fn kron_all(ops: &[Operator]) -> Result<Operator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| LabError::Invalid("kron of an empty list".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, o| kron(&acc, o)))
}

/// Mixed-radix offsets of all multi-indices over `legs`, in row-major order.
fn leg_offsets(dims: &[usize], legs: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut offs = vec![0usize];
    for &leg in legs {
        let mut next = Vec::with_capacity(offs.len() * dims[leg]);
        for &o in &offs {
            for i in 0..dims[leg] {
                next.push(o + i * strides[leg]);
            }
        }
        offs = next;
    }
    offs
}

/// Trace over every factor not listed in `keep`; kept factors retain their order.
pub fn partial_trace(a: &Operator, keep: &[usize]) -> Result<Operator> {
    let nf = a.dims.len();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= nf) {
        return Err(LabError::IndexOutOfRange {
            index: bad,
            limit: nf,
        });
    }
    let traced: Vec<usize> = (0..nf).filter(|k| !kept.contains(k)).collect();
    let koff = leg_offsets(&a.dims, &kept);
    let toff = leg_offsets(&a.dims, &traced);
    let n = koff.len();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (r, &ro) in koff.iter().enumerate() {
        for (col, &co) in koff.iter().enumerate() {
            let mut s = ZERO;
            for &t in &toff {
                s += a.mat[(ro + t, co + t)];
            }
            out[(r, col)] = s;
        }
    }
    let dims = if kept.is_empty() {
        vec![1]
    } else {
        kept.iter().map(|&k| a.dims[k]).collect()
    };
    Operator::new(dims, out)
}

/// Matrix exponential (Padé scaling and squaring).
pub fn expm(a: &Operator) -> Operator {
    Operator {
        dims: a.dims.clone(),
        mat: a.mat.exp(),
    }
}

/// expm(−i·s·H).
pub fn evolution(h: &Operator, s: f64) -> Operator {
    expm(&h.scale(c(0.0, -s)))
}

/// Singular values in descending order.
pub fn singular_values(a: &Operator) -> Vec<f64> {
    let mut sv: Vec<f64> = a.mat.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Inverse; rejects matrices whose smallest singular value is below 1e−13·‖A‖₂.
pub fn inv(a: &Operator) -> Result<Operator> {
    let sv = singular_values(a);
    let norm = sv.first().copied().unwrap_or(0.0);
    let smallest = sv.last().copied().unwrap_or(0.0);
    if norm == 0.0 || smallest < 1e-13 * norm {
        return Err(LabError::Singular { smallest, norm });
    }
    let mat = a
        .mat
        .clone()
        .lu()
        .try_inverse()
        .ok_or(LabError::Singular { smallest, norm })?;
    Ok(Operator {
        dims: a.dims.clone(),
        mat,
    })
}

/// Aᵏ by repeated squaring; A⁰ = I.
pub fn mpow(a: &Operator, mut k: u64) -> Operator {
    let mut result = Operator::identity(&a.dims);
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Standard 2-level matrices.
pub mod pauli {
    use super::*;

    pub fn x() -> Operator {
        Operator::from_rows(2, &[ZERO, ONE, ONE, ZERO]).unwrap()
    }
    pub fn y() -> Operator {
        Operator::from_rows(2, &[ZERO, -I, I, ZERO]).unwrap()
    }
    pub fn z() -> Operator {
        Operator::diag(&[1.0, -1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_examples() {
        let i2 = Operator::identity(&[2]);
        assert_eq!(kron(&i2, &i2).matrix(), Operator::identity(&[4]).matrix());
        let d = kron(&Operator::diag(&[1.0, 2.0]), &i2);
        assert_eq!(d.matrix(), Operator::diag(&[1.0, 1.0, 2.0, 2.0]).matrix());
        assert_eq!(d.dims(), &[2, 2]);
        let xx = kron(&pauli::x(), &pauli::x());
        let out = xx.apply(&Ket::basis(&[2, 2], 0).unwrap());
        assert_eq!(out.get(3), ONE);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = Operator::from_rows(2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]).unwrap();
        let sigma = Operator::diag(&[2.0, 3.0]);
        let pt = partial_trace(&kron(&rho, &sigma), &[0]).unwrap();
        assert!(pt.max_abs_diff(&rho.scale(c(5.0, 0.0))) < 1e-14);
        let all = partial_trace(&kron(&rho, &sigma), &[0, 1]).unwrap();
        assert_eq!(all, kron(&rho, &sigma));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = Ket::new(vec![2, 2], DVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)])).unwrap();
        let p = bell.projector();
        let half = Operator::diag(&[0.5, 0.5]);
        assert!(partial_trace(&p, &[0]).unwrap().max_abs_diff(&half) < 1e-15);
        assert!(partial_trace(&p, &[1]).unwrap().max_abs_diff(&half) < 1e-15);
        assert!(partial_trace(&p, &[2]).is_err());
    }

    #[test]
    fn expm_inv_mpow_examples() {
        assert_eq!(expm(&Operator::zeros(&[3])).matrix(), Operator::identity(&[3]).matrix());
        let inv_d = inv(&Operator::diag(&[2.0, 4.0])).unwrap();
        assert!(inv_d.max_abs_diff(&Operator::diag(&[0.5, 0.25])) < 1e-15);
        let theta = 0.7;
        let e = expm(&pauli::x().scale(c(0.0, theta)));
        let expect = &Operator::identity(&[2]).scale(c(theta.cos(), 0.0))
            + &pauli::x().scale(c(0.0, theta.sin()));
        assert!(e.max_abs_diff(&expect) < 1e-12);
        assert!(inv(&Operator::diag(&[1.0, 0.0])).is_err());
        let x = pauli::x();
        assert_eq!(mpow(&x, 0), Operator::identity(&[2]));
        assert!(mpow(&x, 5).max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn with_dims_checks_size() {
        let a = Operator::identity(&[4]);
        assert!(a.clone().with_dims(vec![2, 2]).is_ok());
        assert!(a.with_dims(vec![3]).is_err());
    }
}
