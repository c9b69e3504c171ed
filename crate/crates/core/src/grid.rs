//! Dense tensor grids of polynomial components.
//!
//! A `TensorGrid` holds the `dim^rank` components of a (p,q)-valent object
//! over one polynomial coordinate chart. Storage is row-major in slot order
//! (last index fastest); connection-like grids use slot order
//! (upper i; lower j; lower k) matching the component symbol `L^i_{jk}`.
//!
//! Grids optionally carry a jet cap: `cap = Some(d)` records that stored
//! components are only trusted up to total degree `d`. Operations propagate
//! the cap (products truncate, derivatives decrement), which lets origin-only
//! identity checks run on small truncated polynomials while staying exact for
//! every coefficient they ever read. Uncapped grids are exact everywhere.

use crate::error::{Error, Result};
use crate::poly::PolyField;
use crate::rational::Rational;

/// Index slot variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Up,
    Down,
}

pub use Variance::{Down, Up};

/// Dense array of `PolyField` components indexed by multi-indices over
/// `{0..dim-1}`, one slot per tensor index.
#[derive(Debug, Clone)]
pub struct TensorGrid {
    dim: usize,
    variance: Vec<Variance>,
    comps: Vec<PolyField>,
    cap: Option<u32>,
    slot_names: Vec<String>,
}

impl PartialEq for TensorGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.variance == other.variance && self.comps == other.comps
    }
}

impl Eq for TensorGrid {}

pub(crate) fn min_cap(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

/// Advances a multi-index counter; returns false after the last index.
pub fn next_index(idx: &mut [usize], dim: usize) -> bool {
    for slot in (0..idx.len()).rev() {
        idx[slot] += 1;
        if idx[slot] < dim {
            return true;
        }
        idx[slot] = 0;
    }
    false
}

impl TensorGrid {
    pub fn zero(dim: usize, variance: &[Variance]) -> Self {
        let len = dim.pow(variance.len() as u32);
        TensorGrid {
            dim,
            variance: variance.to_vec(),
            comps: vec![PolyField::zero(dim); len],
            cap: None,
            slot_names: Vec::new(),
        }
    }

    pub fn from_fn(
        dim: usize,
        variance: &[Variance],
        mut f: impl FnMut(&[usize]) -> PolyField,
    ) -> Self {
        let mut out = TensorGrid::zero(dim, variance);
        if variance.is_empty() {
            out.comps[0] = f(&[]);
            return out;
        }
        let mut idx = vec![0usize; variance.len()];
        loop {
            let p = f(&idx);
            debug_assert_eq!(p.dim(), dim);
            let off = out.offset(&idx);
            out.comps[off] = p;
            if !next_index(&mut idx, dim) {
                break;
            }
        }
        out
    }

    /// Kronecker delta as a (1,1) grid.
    pub fn delta(dim: usize) -> Self {
        TensorGrid::from_fn(dim, &[Up, Down], |ix| {
            if ix[0] == ix[1] {
                PolyField::one(dim)
            } else {
                PolyField::zero(dim)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    /// (upper count, lower count).
    pub fn valence(&self) -> (usize, usize) {
        let up = self.variance.iter().filter(|v| **v == Up).count();
        (up, self.variance.len() - up)
    }

    pub fn cap(&self) -> Option<u32> {
        self.cap
    }

    /// Attaches documentation labels to the slots. Purely advisory; ignored
    /// by equality.
    pub fn with_slot_names(mut self, names: &[&str]) -> Self {
        self.slot_names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn slot_names(&self) -> &[String] {
        &self.slot_names
    }

    /// Marks the grid as a degree-`cap` jet, truncating stored components.
    pub fn with_cap(mut self, cap: u32) -> Self {
        self.comps = self.comps.iter().map(|p| p.truncate(cap)).collect();
        self.cap = min_cap(self.cap, Some(cap));
        self
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        let mut off = 0;
        for &i in idx {
            debug_assert!(i < self.dim);
            off = off * self.dim + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> &PolyField {
        &self.comps[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], p: PolyField) {
        let off = self.offset(idx);
        self.comps[off] = p;
    }

    pub fn components(&self) -> &[PolyField] {
        &self.comps
    }

    pub fn component_mut(&mut self, linear: usize) -> &mut PolyField {
        &mut self.comps[linear]
    }

    /// Recovers the multi-index of a linear component offset.
    pub fn index_of(&self, mut linear: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.rank()];
        for slot in (0..self.rank()).rev() {
            idx[slot] = linear % self.dim;
            linear /= self.dim;
        }
        idx
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(PolyField::is_zero)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.variance != other.variance {
            return Err(Error::ShapeMismatch(format!(
                "variance {:?} vs {:?}",
                self.variance, other.variance
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_shape(other).expect("grid add shape");
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.add(b))
            .collect();
        TensorGrid {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
            cap: min_cap(self.cap, other.cap),
            slot_names: self.slot_names.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same_shape(other).expect("grid sub shape");
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.sub(b))
            .collect();
        TensorGrid {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
            cap: min_cap(self.cap, other.cap),
            slot_names: self.slot_names.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(PolyField::neg)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|p| p.scale(c))
    }

    /// Multiplies every component by a scalar polynomial.
    pub fn scale_poly(&self, s: &PolyField) -> Self {
        let cap = self.cap;
        let mut out = self.map(|p| p.mul_capped(s, cap));
        out.cap = cap;
        out
    }

    fn map(&self, f: impl Fn(&PolyField) -> PolyField) -> Self {
        TensorGrid {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(f).collect(),
            cap: self.cap,
            slot_names: self.slot_names.clone(),
        }
    }

    /// Reorders slots: `result[ix] == self[ix[p[0]], ..., ix[p[rank-1]]]`.
    pub fn permute_indices(&self, p: &[usize]) -> Self {
        assert_eq!(p.len(), self.rank(), "permutation length");
        let mut variance = vec![Up; self.rank()];
        for (slot, &src) in p.iter().enumerate() {
            variance[src] = self.variance[slot];
        }
        // variance[src] above is transposed intentionally: self slot `slot`
        // reads the index at tuple position p[slot] of the result.
        let mut out = TensorGrid::zero(self.dim, &variance);
        out.cap = self.cap;
        if self.rank() == 0 {
            out.comps[0] = self.comps[0].clone();
            return out;
        }
        let mut idx = vec![0usize; self.rank()];
        let mut src_idx = vec![0usize; self.rank()];
        loop {
            for (slot, &pos) in p.iter().enumerate() {
                src_idx[slot] = idx[pos];
            }
            let off = out.offset(&idx);
            out.comps[off] = self.get(&src_idx).clone();
            if !next_index(&mut idx, self.dim) {
                break;
            }
        }
        out
    }

    /// Swaps two slots of equal variance.
    pub fn swap_slots(&self, s1: usize, s2: usize) -> Self {
        let mut p: Vec<usize> = (0..self.rank()).collect();
        p.swap(s1, s2);
        self.permute_indices(&p)
    }

    /// Alternation over a slot pair: `t(..s1..s2..) - t(..s2..s1..)`.
    /// No 1/2 factor. Antisymmetric in the slot arguments - listing the pair
    /// in reverse order flips the sign, matching the index-bracket
    /// convention `[nm] = -[mn]`.
    pub fn alternate(&self, s1: usize, s2: usize) -> Result<Self> {
        self.check_slot_pair(s1, s2)?;
        let base = self.sub(&self.swap_slots(s1, s2));
        Ok(if s1 < s2 { base } else { base.neg() })
    }

    /// Symmetric average over a slot pair: `(t + t_swapped) / 2`.
    pub fn sym_avg(&self, s1: usize, s2: usize) -> Result<Self> {
        self.check_slot_pair(s1, s2)?;
        Ok(self
            .add(&self.swap_slots(s1, s2))
            .scale(&Rational::new(1, 2).expect("1/2")))
    }

    /// Antisymmetric half: `(t - t_swapped) / 2`.
    pub fn anti_avg(&self, s1: usize, s2: usize) -> Result<Self> {
        self.check_slot_pair(s1, s2)?;
        Ok(self
            .sub(&self.swap_slots(s1, s2))
            .scale(&Rational::new(1, 2).expect("1/2")))
    }

    fn check_slot_pair(&self, s1: usize, s2: usize) -> Result<()> {
        let rank = self.rank();
        if s1 >= rank {
            return Err(Error::SlotOutOfRange { slot: s1, rank });
        }
        if s2 >= rank {
            return Err(Error::SlotOutOfRange { slot: s2, rank });
        }
        if s1 == s2 || self.variance[s1] != self.variance[s2] {
            return Err(Error::SlotPairMismatch { s1, s2 });
        }
        Ok(())
    }

    /// Einstein contraction of paired slots between two grids. Each pair must
    /// couple an upper slot with a lower slot; remaining slots keep their
    /// order, `self` first.
    pub fn contract(&self, other: &Self, pairs: &[(usize, usize)]) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        for &(sa, sb) in pairs {
            if sa >= self.rank() {
                return Err(Error::SlotOutOfRange {
                    slot: sa,
                    rank: self.rank(),
                });
            }
            if sb >= other.rank() {
                return Err(Error::SlotOutOfRange {
                    slot: sb,
                    rank: other.rank(),
                });
            }
            let opposite = matches!(
                (self.variance[sa], other.variance[sb]),
                (Up, Down) | (Down, Up)
            );
            if !opposite {
                return Err(Error::VarianceMismatch {
                    a_slot: sa,
                    b_slot: sb,
                });
            }
        }
        let paired_a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let paired_b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let free_a: Vec<usize> = (0..self.rank()).filter(|s| !paired_a.contains(s)).collect();
        let free_b: Vec<usize> = (0..other.rank())
            .filter(|s| !paired_b.contains(s))
            .collect();

        let mut variance = Vec::new();
        variance.extend(free_a.iter().map(|&s| self.variance[s]));
        variance.extend(free_b.iter().map(|&s| other.variance[s]));

        let cap = min_cap(self.cap, other.cap);
        let dim = self.dim;
        let mut out = TensorGrid::zero(dim, &variance);
        out.cap = cap;

        let mut out_idx = vec![0usize; variance.len()];
        let mut ia = vec![0usize; self.rank()];
        let mut ib = vec![0usize; other.rank()];
        loop {
            for (k, &s) in free_a.iter().enumerate() {
                ia[s] = out_idx[k];
            }
            for (k, &s) in free_b.iter().enumerate() {
                ib[s] = out_idx[free_a.len() + k];
            }
            let mut acc = PolyField::zero(dim);
            let mut dummies = vec![0usize; pairs.len()];
            loop {
                for (k, &(sa, sb)) in pairs.iter().enumerate() {
                    ia[sa] = dummies[k];
                    ib[sb] = dummies[k];
                }
                let a = self.get(&ia);
                if !a.is_zero() {
                    let b = other.get(&ib);
                    if !b.is_zero() {
                        acc.accumulate_product(a, b, cap, false);
                    }
                }
                if dummies.is_empty() || !next_index(&mut dummies, dim) {
                    break;
                }
            }
            let off = out.offset(&out_idx);
            out.comps[off] = acc;
            if out_idx.is_empty() || !next_index(&mut out_idx, dim) {
                break;
            }
        }
        Ok(out)
    }

    /// Internal trace over one (upper, lower) slot pair of this grid.
    pub fn trace(&self, s_up: usize, s_down: usize) -> Result<Self> {
        let rank = self.rank();
        if s_up >= rank {
            return Err(Error::SlotOutOfRange { slot: s_up, rank });
        }
        if s_down >= rank {
            return Err(Error::SlotOutOfRange { slot: s_down, rank });
        }
        let opposite = matches!(
            (self.variance[s_up], self.variance[s_down]),
            (Up, Down) | (Down, Up)
        );
        if s_up == s_down || !opposite {
            return Err(Error::VarianceMismatch {
                a_slot: s_up,
                b_slot: s_down,
            });
        }
        let free: Vec<usize> = (0..rank).filter(|&s| s != s_up && s != s_down).collect();
        let variance: Vec<Variance> = free.iter().map(|&s| self.variance[s]).collect();
        let dim = self.dim;
        let mut out = TensorGrid::zero(dim, &variance);
        out.cap = self.cap;
        let mut out_idx = vec![0usize; variance.len()];
        let mut ix = vec![0usize; rank];
        loop {
            for (k, &s) in free.iter().enumerate() {
                ix[s] = out_idx[k];
            }
            let mut acc = PolyField::zero(dim);
            for a in 0..dim {
                ix[s_up] = a;
                ix[s_down] = a;
                acc = acc.add(self.get(&ix));
            }
            let off = out.offset(&out_idx);
            out.comps[off] = acc;
            if out_idx.is_empty() || !next_index(&mut out_idx, dim) {
                break;
            }
        }
        Ok(out)
    }

    /// Tensor product; slots of `self` first.
    pub fn outer(&self, other: &Self) -> Result<Self> {
        self.contract(other, &[])
    }

    /// Appends one lower slot holding the formal partial derivative along it.
    /// Decrements a jet cap; panics if the cap is already exhausted.
    pub fn partial_append(&self) -> Self {
        let cap = match self.cap {
            Some(0) => panic!("partial derivative exceeds jet validity"),
            Some(d) => Some(d - 1),
            None => None,
        };
        let mut variance = self.variance.clone();
        variance.push(Down);
        let dim = self.dim;
        let mut out = TensorGrid::from_fn(dim, &variance, |ix| {
            let (base, k) = ix.split_at(ix.len() - 1);
            self.get(base).partial(k[0]).expect("axis in range")
        });
        out.cap = cap;
        out
    }

    /// Constant terms of all components, in storage order.
    pub fn evaluate_at_origin(&self) -> Vec<Rational> {
        self.comps.iter().map(PolyField::eval_origin).collect()
    }

    /// Component values at an arbitrary rational point, in storage order.
    pub fn evaluate_at(&self, point: &[Rational]) -> Result<Vec<Rational>> {
        self.comps.iter().map(|p| p.eval_at(point)).collect()
    }
}

/// Free-function form of [`TensorGrid::contract`], matching the operation
/// surface used throughout the verification suites.
pub fn grid_contract(
    a: &TensorGrid,
    b: &TensorGrid,
    pairs: &[(usize, usize)],
) -> Result<TensorGrid> {
    a.contract(b, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_grid(dim: usize, vals: &[i64]) -> TensorGrid {
        TensorGrid::from_fn(dim, &[Up], |ix| PolyField::from_int(dim, vals[ix[0]]))
    }

    #[test]
    fn delta_acts_as_identity() {
        let d = TensorGrid::delta(3);
        let v = vec_grid(3, &[2, -1, 5]);
        let out = d.contract(&v, &[(1, 0)]).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn delta_full_trace_is_dimension() {
        let d = TensorGrid::delta(3);
        let tr = d.trace(0, 1).unwrap();
        assert_eq!(tr.get(&[]), &PolyField::from_int(3, 3));
    }

    #[test]
    fn contract_rejects_variance_mismatch() {
        let v = vec_grid(2, &[1, 2]);
        let w = vec_grid(2, &[3, 4]);
        assert_eq!(
            v.contract(&w, &[(0, 0)]).unwrap_err(),
            Error::VarianceMismatch {
                a_slot: 0,
                b_slot: 0
            }
        );
    }

    #[test]
    fn alternate_kills_symmetric_pairs() {
        let g = TensorGrid::from_fn(2, &[Down, Down], |ix| {
            PolyField::from_int(2, (ix[0] + ix[1]) as i64)
        });
        assert!(g.alternate(0, 1).unwrap().is_zero());
    }

    #[test]
    fn alternate_doubles_antisymmetric_grids() {
        let g = TensorGrid::from_fn(2, &[Down, Down], |ix| {
            PolyField::from_int(2, ix[0] as i64 - ix[1] as i64)
        });
        let alt = g.alternate(0, 1).unwrap();
        assert_eq!(alt, g.scale(&Rational::from_int(2)));
        // alternate is idempotent up to the factor 2
        let alt2 = alt.alternate(0, 1).unwrap();
        assert_eq!(alt2, alt.scale(&Rational::from_int(2)));
    }

    #[test]
    fn alternate_rejects_mixed_variance() {
        let g = TensorGrid::delta(2);
        assert!(g.alternate(0, 1).is_err());
    }

    #[test]
    fn permute_round_trip() {
        let g = TensorGrid::from_fn(2, &[Up, Down, Down], |ix| {
            PolyField::from_int(2, (ix[0] * 4 + ix[1] * 2 + ix[2]) as i64)
        });
        let p = g.permute_indices(&[1, 2, 0]);
        assert_eq!(p.get(&[1, 0, 1]), g.get(&[0, 1, 1]));
        let back = p.permute_indices(&[2, 0, 1]);
        assert_eq!(back, g);
    }

    #[test]
    fn origin_evaluation_reads_constant_terms() {
        let g = TensorGrid::from_fn(2, &[Down], |ix| {
            if ix[0] == 0 {
                PolyField::var(2, 0)
                    .unwrap()
                    .add(&PolyField::from_int(2, 5))
            } else {
                PolyField::from_int(2, -2)
            }
        });
        assert_eq!(
            g.evaluate_at_origin(),
            vec![Rational::from_int(5), Rational::from_int(-2)]
        );
    }

    #[test]
    fn origin_equals_substitution_at_zero() {
        // degree-2 grid: the constant coefficients must agree with direct
        // substitution of the zero point into every monomial
        let x0 = PolyField::var(2, 0).unwrap();
        let x1 = PolyField::var(2, 1).unwrap();
        let g = TensorGrid::from_fn(2, &[Up, Down], |ix| {
            PolyField::from_int(2, ix[0] as i64 - 2)
                .add(&x0.mul(&x1).scale(&Rational::from_int(3)))
                .add(&x1.scale(&Rational::from_int(ix[1] as i64)))
        });
        let zeros = vec![Rational::zero(); 2];
        assert_eq!(g.evaluate_at_origin(), g.evaluate_at(&zeros).unwrap());
    }

    #[test]
    fn cap_propagates_and_decrements() {
        let x0 = PolyField::var(2, 0).unwrap();
        let g = TensorGrid::from_fn(2, &[Down], |_| x0.mul(&x0)).with_cap(2);
        let d = g.partial_append();
        assert_eq!(d.cap(), Some(1));
        let dd = d.partial_append();
        assert_eq!(dd.cap(), Some(0));
        assert_eq!(dd.get(&[0, 0, 0]), &PolyField::from_int(2, 2));
    }
}
