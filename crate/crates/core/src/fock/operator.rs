use std::sync::{Arc, OnceLock};

use num_complex::Complex64 as C64;

use super::space::{FockSpace, ModeId};
use super::state::{check_same, StateVector};
use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Symmetry properties that were verified numerically, with the tolerance used.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct SymmetryFlags {
    pub hermitian: Option<f64>,
    pub anti_hermitian: Option<f64>,
}

/// Sparse complex matrix (CSR) acting on a [`FockSpace`].
#[derive(Clone, Debug)]
pub struct Operator {
    space: Arc<FockSpace>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    flags: SymmetryFlags,
    // (col_ptr, rows) of the sparsity pattern, built on first use.
    pattern_t: OnceLock<(Vec<usize>, Vec<usize>)>,
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.row_ptr == other.row_ptr && self.cols == other.cols && self.vals == other.vals
    }
}

impl Operator {
    pub(crate) fn from_csr(space: &Arc<FockSpace>, row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<C64>) -> Self {
        Self {
            space: Arc::clone(space),
            row_ptr,
            cols,
            vals,
            flags: SymmetryFlags::default(),
            pattern_t: OnceLock::new(),
        }
    }

    /// Assemble from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(space: &Arc<FockSpace>, mut triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        let dim = space.dim();
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::validation(format!("entry ({r}, {c}) outside a {dim}x{dim} operator")));
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != ZERO {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self::from_csr(space, row_ptr, keep_cols, keep_vals))
    }

    pub fn zero(space: &Arc<FockSpace>) -> Self {
        Self::from_csr(space, vec![0; space.dim() + 1], Vec::new(), Vec::new())
    }

    /// `c * I`.
    pub fn scalar(space: &Arc<FockSpace>, c: C64) -> Self {
        if c == ZERO {
            return Self::zero(space);
        }
        let dim = space.dim();
        Self::from_csr(space, (0..=dim).collect(), (0..dim).collect(), vec![c; dim])
    }

    pub fn identity(space: &Arc<FockSpace>) -> Self {
        Self::scalar(space, ONE)
    }

    /// Real diagonal operator with entries `f(index)`.
    pub fn diagonal(space: &Arc<FockSpace>, f: impl Fn(usize) -> f64) -> Self {
        let trip = (0..space.dim()).map(|i| (i, i, C64::new(f(i), 0.0))).collect();
        Self::from_triplets(space, trip).expect("diagonal entries are in range")
    }

    /// `a_m` with `<n-1|a|n> = sqrt(n)` on the ladder of `mode`.
    pub fn annihilation(space: &Arc<FockSpace>, mode: &ModeId) -> Result<Self> {
        let pos = space.require(mode)?;
        let stride = space.stride(pos);
        let trip = (0..space.dim())
            .filter_map(|i| {
                let n = space.occupation(i, pos);
                (n > 0).then(|| (i - stride, i, C64::new((n as f64).sqrt(), 0.0)))
            })
            .collect();
        Self::from_triplets(space, trip)
    }

    /// `a_m^dagger`, built directly from the ladder rather than by adjoint.
    pub fn creation(space: &Arc<FockSpace>, mode: &ModeId) -> Result<Self> {
        let pos = space.require(mode)?;
        let stride = space.stride(pos);
        let cut = space.cutoffs()[pos];
        let trip = (0..space.dim())
            .filter_map(|i| {
                let n = space.occupation(i, pos);
                (n < cut).then(|| (i + stride, i, C64::new(((n + 1) as f64).sqrt(), 0.0)))
            })
            .collect();
        Self::from_triplets(space, trip)
    }

    /// `N_m = a_m^dagger a_m`.
    pub fn number(space: &Arc<FockSpace>, mode: &ModeId) -> Result<Self> {
        let pos = space.require(mode)?;
        Ok(Self::diagonal(space, |i| space.occupation(i, pos) as f64))
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn flags(&self) -> SymmetryFlags {
        self.flags
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub(crate) fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        check_same(&self.space, v.space(), "apply")?;
        let mut out = StateVector::zeros(&self.space);
        self.apply_into(v.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero(&self.space);
        }
        let mut out = Self::from_csr(
            &self.space,
            self.row_ptr.clone(),
            self.cols.clone(),
            self.vals.iter().map(|v| v * c).collect(),
        );
        if c.im == 0.0 {
            out.flags = self.flags;
        }
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        check_same(&self.space, &other.space, "lin_comb")?;
        let trip = self
            .entries()
            .map(|(r, c, v)| (r, c, alpha * v))
            .chain(other.entries().map(|(r, c, v)| (r, c, beta * v)))
            .collect();
        Self::from_triplets(&self.space, trip)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(ONE, other, ONE)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(ONE, other, -ONE)
    }

    /// Sparse product `self * other` (row-wise Gustavson accumulation).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_same(&self.space, &other.space, "mul")?;
        let dim = self.dim();
        let mut acc = vec![ZERO; dim];
        let mut seen = vec![usize::MAX; dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..dim {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if seen[c] != r {
                        seen[c] = r;
                        acc[c] = ZERO;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != ZERO {
                    cols.push(c);
                    vals.push(acc[c]);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self::from_csr(&self.space, row_ptr, cols, vals))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let trip = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        let mut out = Self::from_triplets(&self.space, trip).expect("transpose stays in range");
        out.flags = self.flags;
        out
    }

    /// Kronecker product `a ⊗ b` placed on `space`, whose basis must be the
    /// lexicographic product of the bases of `a` and `b`.
    pub fn kron(a: &Self, b: &Self, space: &Arc<FockSpace>) -> Result<Self> {
        let db = b.dim();
        if a.dim() * db != space.dim() {
            return Err(Error::SpaceMismatch(format!(
                "kron of dimensions {} and {db} does not fit a space of dimension {}",
                a.dim(),
                space.dim()
            )));
        }
        let mut trip = Vec::with_capacity(a.nnz() * b.nnz());
        for (ra, ca, va) in a.entries() {
            for (rb, cb, vb) in b.entries() {
                trip.push((ra * db + rb, ca * db + cb, va * vb));
            }
        }
        Self::from_triplets(space, trip)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|entry|` over columns selected by `mask`; this measures the
    /// action of the operator on the selected basis states.
    pub fn max_abs_on(&self, mask: &[bool]) -> f64 {
        self.entries().filter(|&(_, c, _)| mask[c]).map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    /// `max |(self - other)_{rc}|` over columns `c` selected by `mask`.
    pub fn max_abs_diff_on(&self, other: &Self, mask: &[bool]) -> Result<f64> {
        Ok(self.sub(other)?.max_abs_on(mask))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    /// `max |A + A^dagger|`.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        self.add(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    /// Verify hermiticity at `tol` and record the flag.
    pub fn verified_hermitian(mut self, tol: f64) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::numeric("operator is not hermitian", defect));
        }
        self.flags.hermitian = Some(tol);
        Ok(self)
    }

    /// Verify anti-hermiticity at `tol` and record the flag.
    pub fn verified_anti_hermitian(mut self, tol: f64) -> Result<Self> {
        let defect = self.anti_hermiticity_defect();
        if defect > tol {
            return Err(Error::numeric("operator is not anti-hermitian", defect));
        }
        self.flags.anti_hermitian = Some(tol);
        Ok(self)
    }

    /// Upper bound on the spectral norm, `sqrt(||A||_1 ||A||_inf)`.
    pub fn norm_bound(&self) -> f64 {
        let mut col_sums = vec![0.0; self.dim()];
        let mut max_row: f64 = 0.0;
        for r in 0..self.dim() {
            let mut s = 0.0;
            for (c, v) in self.row(r) {
                s += v.norm();
                col_sums[c] += v.norm();
            }
            max_row = max_row.max(s);
        }
        let max_col = col_sums.into_iter().fold(0.0, f64::max);
        (max_row * max_col).sqrt()
    }

    /// Column-major view of the sparsity pattern: `(col_ptr, rows)`.
    pub(crate) fn column_pattern(&self) -> &(Vec<usize>, Vec<usize>) {
        self.pattern_t.get_or_init(|| {
            let dim = self.dim();
            let mut col_ptr = vec![0usize; dim + 1];
            for &c in &self.cols {
                col_ptr[c + 1] += 1;
            }
            for c in 0..dim {
                col_ptr[c + 1] += col_ptr[c];
            }
            let mut fill = col_ptr.clone();
            let mut rows = vec![0usize; self.cols.len()];
            for r in 0..dim {
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    let c = self.cols[k];
                    rows[fill[c]] = r;
                    fill[c] += 1;
                }
            }
            (col_ptr, rows)
        })
    }

    /// Copy the operator onto a space with the same modes and larger (or equal)
    /// cutoffs. Entries are placed at the re-indexed positions; nothing is
    /// added for the new rungs.
    pub fn embed(&self, larger: &Arc<FockSpace>) -> Result<Self> {
        if !self.space.same_modes(larger) || self.space.cutoffs().iter().zip(larger.cutoffs()).any(|(s, l)| s > l) {
            return Err(Error::SpaceMismatch(
                "embedding target must have the same modes and cutoffs at least as large".into(),
            ));
        }
        let trip = self
            .entries()
            .map(|(r, c, v)| (self.space.reindex_into(r, larger), self.space.reindex_into(c, larger), v))
            .collect();
        Self::from_triplets(larger, trip)
    }
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_same(a.space(), b.space(), "commutator")?;
    a.mul(b)?.sub(&b.mul(a)?)
}

/// `<v|A|v>`.
pub fn expectation(a: &Operator, v: &StateVector) -> Result<C64> {
    super::state::inner(v, &a.apply(v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Sector;

    const M: ModeId = ModeId::particle(0, Sector::Plus);

    fn one_mode(cutoff: usize) -> Arc<FockSpace> {
        FockSpace::uniform(vec![M], cutoff).unwrap()
    }

    #[test]
    fn ladder_action() {
        let s = one_mode(4);
        let a = Operator::annihilation(&s, &M).unwrap();
        assert_eq!(a.apply(&StateVector::vacuum(&s)).unwrap().norm(), 0.0);
        let out = a.apply(&StateVector::basis(&s, &[2]).unwrap()).unwrap();
        assert!((out.amplitude(&[1]).unwrap().re - 2f64.sqrt()).abs() < 1e-15);
        let n = Operator::number(&s, &M).unwrap();
        let two = StateVector::basis(&s, &[2]).unwrap();
        assert!(n.apply(&two).unwrap().distance(&two.scaled(C64::new(2.0, 0.0))).unwrap() < 1e-15);
    }

    #[test]
    fn creation_is_exact_adjoint() {
        let s = FockSpace::uniform(vec![M, ModeId::antiparticle(0, Sector::Minus)], 5).unwrap();
        let a = Operator::annihilation(&s, &M).unwrap();
        assert_eq!(Operator::creation(&s, &M).unwrap(), a.adjoint());
    }

    #[test]
    fn canonical_relations_on_safe_subspace() {
        let s = one_mode(16);
        let a = Operator::annihilation(&s, &M).unwrap();
        let ad = Operator::creation(&s, &M).unwrap();
        let n = Operator::number(&s, &M).unwrap();
        let mask = s.safe_mask(1, None).unwrap();
        let id = Operator::identity(&s);
        assert!(commutator(&a, &ad).unwrap().max_abs_diff_on(&id, &mask).unwrap() < 1e-12);
        assert!(commutator(&n, &a).unwrap().max_abs_diff_on(&a.scale_real(-1.0), &mask).unwrap() < 1e-12);
        assert!(commutator(&n, &ad).unwrap().max_abs_diff_on(&ad, &mask).unwrap() < 1e-12);
        assert_eq!(commutator(&a, &a).unwrap().nnz(), 0);
        // the top rung is where truncation shows
        let full = vec![true; s.dim()];
        assert!(commutator(&a, &ad).unwrap().max_abs_diff_on(&id, &full).unwrap() > 1.0);
    }

    #[test]
    fn expectation_values() {
        let s = one_mode(5);
        let n = Operator::number(&s, &M).unwrap();
        assert_eq!(expectation(&n, &StateVector::basis(&s, &[3]).unwrap()).unwrap(), C64::new(3.0, 0.0));
        let a = Operator::annihilation(&s, &M).unwrap();
        let x = a.add(&a.adjoint()).unwrap().verified_hermitian(1e-14).unwrap();
        let v = StateVector::from_amplitudes(&s, (0..6).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect()).unwrap();
        assert!(expectation(&x, &v).unwrap().im.abs() < 1e-12);
    }

    #[test]
    fn space_mismatch_is_rejected() {
        let a = Operator::annihilation(&one_mode(3), &M).unwrap();
        let b = Operator::annihilation(&one_mode(4), &M).unwrap();
        assert!(commutator(&a, &b).is_err());
        assert!(a.apply(&StateVector::vacuum(&one_mode(4))).is_err());
        assert!(Operator::annihilation(&one_mode(3), &ModeId::particle(1, Sector::Plus)).is_err());
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let s = one_mode(2);
        let op = Operator::from_triplets(
            &s,
            vec![
                (0, 1, C64::new(1.0, 0.0)),
                (0, 1, C64::new(2.0, 0.0)),
                (2, 2, C64::new(1.0, 0.0)),
                (2, 2, C64::new(-1.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(0, 1), C64::new(3.0, 0.0));
        assert!(Operator::from_triplets(&s, vec![(3, 0, C64::new(1.0, 0.0))]).is_err());
    }

    #[test]
    fn symmetry_flags() {
        let s = one_mode(3);
        let a = Operator::annihilation(&s, &M).unwrap();
        assert!(a.clone().verified_hermitian(1e-12).is_err());
        let g = a.sub(&a.adjoint()).unwrap().verified_anti_hermitian(1e-12).unwrap();
        assert_eq!(g.flags().anti_hermitian, Some(1e-12));
    }

    #[test]
    fn kron_matches_direct_construction() {
        let m2 = ModeId::particle(0, Sector::Minus);
        let base = one_mode(3);
        let both = FockSpace::uniform(vec![M, m2], 3).unwrap();
        let a = Operator::annihilation(&base, &M).unwrap();
        let id = Operator::identity(&base);
        assert_eq!(Operator::kron(&a, &id, &both).unwrap(), Operator::annihilation(&both, &M).unwrap());
        assert_eq!(Operator::kron(&id, &a, &both).unwrap(), Operator::annihilation(&both, &m2).unwrap());
    }
}
