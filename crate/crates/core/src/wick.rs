//! Wick-contraction engine over explicit two-point tables.
//!
//! Insertions are listed in trace order. A pairing contributes the product of
//! its kernel values, each pair read with the earlier insertion on the left.
//! Vertex groups (several insertions at one interaction point) drive the
//! connected and linked filters.

use crate::error::{LabError, Result};
use crate::gaussian::{anti_occupation, occupation, GaussianWeight};
use crate::operator::{c, C64, ZERO};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertionKind {
    Field,
    Create,
    Annihilate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Insertion {
    pub kind: InsertionKind,
    /// Mode index for ladder insertions, site/point index for fields.
    pub mode: usize,
    pub time: i64,
    /// Vertex group; insertions sharing a group sit at one interaction point.
    pub group: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InsertionList {
    pub items: Vec<Insertion>,
}

impl InsertionList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append an insertion in its own singleton group; returns its index.
    pub fn push_external(&mut self, kind: InsertionKind, mode: usize, time: i64) -> usize {
        let group = self.next_group();
        self.items.push(Insertion { kind, mode, time, group });
        self.items.len() - 1
    }

    /// Append `legs` field insertions sharing a new group; returns the group id.
    pub fn push_vertex(&mut self, point: usize, time: i64, legs: usize) -> usize {
        let group = self.next_group();
        for _ in 0..legs {
            self.items.push(Insertion {
                kind: InsertionKind::Field,
                mode: point,
                time,
                group,
            });
        }
        group
    }

    fn next_group(&self) -> usize {
        self.items.iter().map(|i| i.group + 1).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn groups(&self) -> Vec<usize> {
        self.items.iter().map(|i| i.group).collect()
    }
}

/// A perfect matching; every pair is stored as (earlier, later).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
}

/// Two-point values keyed by ordered insertion pairs (i < j).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContractionKernel {
    table: BTreeMap<(usize, usize), C64>,
}

impl ContractionKernel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Table over every pair i < j of `n` insertions.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut k = Self::new();
        for i in 0..n {
            for j in i + 1..n {
                k.table.insert((i, j), f(i, j));
            }
        }
        k
    }

    pub fn insert(&mut self, i: usize, j: usize, value: C64) {
        self.table.insert((i.min(j), i.max(j)), value);
    }

    pub fn get(&self, i: usize, j: usize) -> Result<C64> {
        self.table
            .get(&(i.min(j), i.max(j)))
            .copied()
            .ok_or(LabError::MissingKernel(i.min(j), i.max(j)))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// All (n−1)!! perfect matchings of n points. The first free index is paired
/// with each later free index in increasing order.
pub fn enumerate_pairings(n: usize) -> Result<Vec<Pairing>> {
    if n % 2 == 1 {
        return Err(LabError::Invalid(format!("cannot pair an odd number ({n}) of insertions")));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n / 2);
    let free: Vec<usize> = (0..n).collect();
    recurse(&free, &mut current, &mut out);
    Ok(out)
}

fn recurse(free: &[usize], current: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
    if free.is_empty() {
        out.push(Pairing { pairs: current.clone() });
        return;
    }
    let first = free[0];
    for k in 1..free.len() {
        let rest: Vec<usize> = free[1..].iter().copied().filter(|&x| x != free[k]).collect();
        current.push((first, free[k]));
        recurse(&rest, current, out);
        current.pop();
    }
}

/// (n−1)!! for even n.
pub fn double_factorial_count(n: usize) -> usize {
    (1..n).step_by(2).product::<usize>().max(1)
}

/// Product of kernel values over one pairing.
pub fn pairing_value(p: &Pairing, kernel: &ContractionKernel) -> Result<C64> {
    let mut v = c(1.0, 0.0);
    for &(i, j) in &p.pairs {
        v *= kernel.get(i, j)?;
    }
    Ok(v)
}

/// Sum of `pairing_value` over the given pairings. Terms are computed in
/// parallel and summed in enumeration order.
pub fn evaluate_pairings(pairings: &[Pairing], kernel: &ContractionKernel) -> Result<C64> {
    let terms: Vec<Result<C64>> = pairings.par_iter().map(|p| pairing_value(p, kernel)).collect();
    let mut acc = ZERO;
    for t in terms {
        acc += t?;
    }
    Ok(acc)
}

/// Gaussian expectation of the insertion product: the sum over every pairing.
pub fn wick_evaluate(ins: &InsertionList, kernel: &ContractionKernel) -> Result<C64> {
    if ins.len() % 2 == 1 {
        return Ok(ZERO);
    }
    evaluate_pairings(&enumerate_pairings(ins.len())?, kernel)
}

fn vertex_groups(groups: &[usize]) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &g in groups {
        *counts.entry(g).or_default() += 1;
    }
    counts.into_iter().filter(|&(_, n)| n > 1).map(|(g, _)| g).collect()
}

/// Union-find over groups joined by the pairs; returns the root of each group.
fn components(p: &Pairing, groups: &[usize]) -> BTreeMap<usize, usize> {
    let mut parent: BTreeMap<usize, usize> = groups.iter().map(|&g| (g, g)).collect();
    fn find(parent: &mut BTreeMap<usize, usize>, g: usize) -> usize {
        let mut r = g;
        while parent[&r] != r {
            r = parent[&r];
        }
        let mut x = g;
        while parent[&x] != r {
            let next = parent[&x];
            parent.insert(x, r);
            x = next;
        }
        r
    }
    for &(i, j) in &p.pairs {
        let (a, b) = (find(&mut parent, groups[i]), find(&mut parent, groups[j]));
        if a != b {
            parent.insert(a.max(b), a.min(b));
        }
    }
    let keys: Vec<usize> = parent.keys().copied().collect();
    keys.into_iter().map(|g| (g, find(&mut parent, g))).collect()
}

/// Pairings whose contraction graph over groups is a single component. With
/// no vertex group present the filter keeps everything.
pub fn connected_filter(pairings: &[Pairing], groups: &[usize]) -> Vec<Pairing> {
    if vertex_groups(groups).is_empty() {
        return pairings.to_vec();
    }
    pairings
        .iter()
        .filter(|p| {
            let comp = components(p, groups);
            let first = comp.values().next().copied();
            comp.values().all(|&r| Some(r) == first)
        })
        .cloned()
        .collect()
}

/// Pairings with no vacuum bubble: every vertex group shares a component with
/// at least one external (singleton) group.
pub fn linked_filter(pairings: &[Pairing], groups: &[usize]) -> Vec<Pairing> {
    let vertices = vertex_groups(groups);
    pairings
        .iter()
        .filter(|p| {
            let comp = components(p, groups);
            vertices.iter().all(|v| {
                comp.iter()
                    .any(|(g, r)| *r == comp[v] && !vertices.contains(g))
            })
        })
        .cloned()
        .collect()
}

/// Kernel for ladder insertions under a diagonal Gaussian weight:
/// ⟨a_k a†_l⟩ = δ/(1 − e^{−λ}), ⟨a†_k a_l⟩ = δ/(e^{λ} − 1), all else 0.
pub fn gaussian_ladder_kernel(ins: &InsertionList, w: &GaussianWeight) -> Result<ContractionKernel> {
    let n = ins.len();
    let mut k = ContractionKernel::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (ins.items[i], ins.items[j]);
            for idx in [a.mode, b.mode] {
                if idx >= w.lambdas.len() {
                    return Err(LabError::IndexOutOfRange { index: idx, limit: w.lambdas.len() });
                }
            }
            use InsertionKind::*;
            let v = match (a.kind, b.kind) {
                (Field, _) | (_, Field) => {
                    return Err(LabError::Invalid("field insertions need an explicit kernel".into()))
                }
                (Annihilate, Create) if a.mode == b.mode => anti_occupation(w.lambdas[a.mode])?,
                (Create, Annihilate) if a.mode == b.mode => occupation(w.lambdas[a.mode])?,
                _ => ZERO,
            };
            k.insert(i, j, v);
        }
    }
    Ok(k)
}

/// Perturbative coefficients of a toy quartic theory, used to check that the
/// ratio ⟨ext·e^{gV}⟩/⟨e^{gV}⟩ equals the linked sum order by order.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleCheck {
    /// Coefficients of g^k in numerator/denominator, expanded.
    pub ratio: Vec<C64>,
    /// Coefficients of g^k from linked pairings only.
    pub linked: Vec<C64>,
    pub numerator: Vec<C64>,
    pub denominator: Vec<C64>,
}

impl BubbleCheck {
    pub fn max_mismatch(&self) -> f64 {
        self.ratio
            .iter()
            .zip(&self.linked)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Expand V = (1/4!) Σ_{z ∈ vertex_sites} φ(z)⁴ to `max_order` (≤ 2) with
/// weight g^k/k!, sites connected by the symmetric two-point matrix `prop`.
pub fn vacuum_bubble_check(
    prop: &DMatrix<C64>,
    externals: &[usize],
    vertex_sites: &[usize],
    max_order: usize,
) -> Result<BubbleCheck> {
    if max_order > 2 {
        return Err(LabError::Invalid("bubble check supports orders 0..=2".into()));
    }
    let n_sites = prop.nrows();
    for &s in externals.iter().chain(vertex_sites) {
        if s >= n_sites {
            return Err(LabError::IndexOutOfRange { index: s, limit: n_sites });
        }
    }
    let coeff = |with_ext: bool, linked_only: bool, order: usize| -> Result<C64> {
        let tuples: Vec<Vec<usize>> = match order {
            0 => vec![vec![]],
            1 => vertex_sites.iter().map(|&z| vec![z]).collect(),
            _ => vertex_sites
                .iter()
                .flat_map(|&z| vertex_sites.iter().map(move |&w| vec![z, w]))
                .collect(),
        };
        let weight = 1.0 / (factorial(order) * 24f64.powi(order as i32));
        let mut acc = ZERO;
        for tuple in tuples {
            let mut ins = InsertionList::new();
            if with_ext {
                for &e in externals {
                    ins.push_external(InsertionKind::Field, e, 0);
                }
            }
            for &z in &tuple {
                ins.push_vertex(z, 0, 4);
            }
            let kernel = ContractionKernel::from_fn(ins.len(), |i, j| {
                prop[(ins.items[i].mode, ins.items[j].mode)]
            });
            let all = enumerate_pairings(ins.len())?;
            let kept = if linked_only { linked_filter(&all, &ins.groups()) } else { all };
            acc += evaluate_pairings(&kept, &kernel)?;
        }
        Ok(acc * c(weight, 0.0))
    };
    let mut numerator = Vec::new();
    let mut denominator = Vec::new();
    let mut linked = Vec::new();
    for k in 0..=max_order {
        numerator.push(coeff(true, false, k)?);
        denominator.push(coeff(false, false, k)?);
        linked.push(coeff(true, true, k)?);
    }
    // Series division N/D with D₀ = 1.
    let d0 = denominator[0];
    let mut ratio = Vec::new();
    for k in 0..=max_order {
        let mut r = numerator[k];
        for j in 0..k {
            r -= ratio[j] * denominator[k - j];
        }
        ratio.push(r / d0);
    }
    Ok(BubbleCheck {
        ratio,
        linked,
        numerator,
        denominator,
    })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::single_annihilator;
    use crate::operator::{expm, Operator};
    use crate::random::LabRng;

    #[test]
    fn pairing_counts() {
        assert_eq!(enumerate_pairings(2).unwrap().len(), 1);
        assert_eq!(enumerate_pairings(4).unwrap().len(), 3);
        assert_eq!(enumerate_pairings(8).unwrap().len(), 105);
        assert_eq!(double_factorial_count(10), 945);
        assert!(enumerate_pairings(3).is_err());
        assert_eq!(enumerate_pairings(0).unwrap(), vec![Pairing { pairs: vec![] }]);
    }

    #[test]
    fn identical_mode_combinatorics() {
        let g = c(0.7, -0.2);
        let k = ContractionKernel::from_fn(4, |_, _| g);
        let mut ins = InsertionList::new();
        for _ in 0..4 {
            ins.push_external(InsertionKind::Field, 0, 0);
        }
        assert!((wick_evaluate(&ins, &k).unwrap() - g * g * 3.0).norm() < 1e-15);
        let mut sparse = ContractionKernel::new();
        sparse.insert(0, 1, g);
        assert!(matches!(wick_evaluate(&ins, &sparse), Err(LabError::MissingKernel(..))));
    }

    #[test]
    fn ladder_four_point_matches_dense_trace() {
        let lam = c(3.5, 0.4);
        let w = GaussianWeight::new(vec![lam]).unwrap();
        let mut ins = InsertionList::new();
        for kind in [InsertionKind::Annihilate, InsertionKind::Create, InsertionKind::Annihilate, InsertionKind::Create] {
            ins.push_external(kind, 0, 0);
        }
        let wick = wick_evaluate(&ins, &gaussian_ladder_kernel(&ins, &w).unwrap()).unwrap();
        let n_max = 8;
        let a = single_annihilator(n_max);
        let ad = a.adjoint();
        let weight = expm(&(&ad * &a).scale(-lam));
        let string: Operator = &(&(&a * &ad) * &a) * &ad;
        let dense = (&weight * &string).trace() / weight.trace();
        assert!((wick - dense).norm() < 1e-8, "{wick} vs {dense}");
    }

    #[test]
    fn filters_on_first_order_vertex() {
        let mut ins = InsertionList::new();
        for e in 0..4 {
            ins.push_external(InsertionKind::Field, e, 0);
        }
        ins.push_vertex(9, 0, 4);
        let all = enumerate_pairings(ins.len()).unwrap();
        assert_eq!(all.len(), 105);
        assert_eq!(connected_filter(&all, &ins.groups()).len(), 24);

        let mut free = InsertionList::new();
        for e in 0..4 {
            free.push_external(InsertionKind::Field, e, 0);
        }
        let p4 = enumerate_pairings(4).unwrap();
        assert_eq!(connected_filter(&p4, &free.groups()).len(), 3);
    }

    #[test]
    fn one_loop_channel_is_connected() {
        let mut ins = InsertionList::new();
        let z = ins.push_vertex(0, 0, 4);
        let w = ins.push_vertex(1, 0, 4);
        for e in 0..4 {
            ins.push_external(InsertionKind::Field, 2 + e, 0);
        }
        assert_eq!((z, w), (0, 1));
        // p1, p2 at z; k1, k2 at w; two z–w lines.
        let p = Pairing {
            pairs: vec![(0, 8), (1, 9), (2, 6), (3, 7), (4, 10), (5, 11)],
        };
        assert_eq!(connected_filter(std::slice::from_ref(&p), &ins.groups()).len(), 1);
    }

    #[test]
    fn bubbles_cancel_in_ratio() {
        let mut rng = LabRng::seed(11);
        let g = rng.ginibre(5);
        let prop = (&g + g.transpose()) * c(0.25, 0.0);
        let chk = vacuum_bubble_check(&prop, &[0, 1, 2, 3], &[3, 4], 2).unwrap();
        assert!(chk.max_mismatch() < 1e-10 * (1.0 + chk.linked[2].norm()));
        assert!(chk.denominator[1].norm() > 1e-3);
    }
}
