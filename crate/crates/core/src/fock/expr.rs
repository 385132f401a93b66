use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::operator::Operator;
use super::space::{FockSpace, ModeId};
use crate::error::Result;

/// A polynomial in ladder operators, kept symbolic so it can be realized on
/// any truncation of the same modes.
///
/// Operators built directly as matrices lose the rungs above the cutoff; an
/// expression can be rebuilt on a padded space instead, which is what the
/// conjugation routines rely on.
#[derive(Clone, Debug, PartialEq)]
pub enum OpExpr {
    Identity,
    Annihilate(ModeId),
    Create(ModeId),
    Number(ModeId),
    Scaled(C64, Box<OpExpr>),
    Sum(Vec<OpExpr>),
    /// Matrix product, leftmost factor applied last.
    Product(Vec<OpExpr>),
}

impl OpExpr {
    pub fn a(mode: ModeId) -> Self {
        OpExpr::Annihilate(mode)
    }

    pub fn a_dag(mode: ModeId) -> Self {
        OpExpr::Create(mode)
    }

    pub fn n(mode: ModeId) -> Self {
        OpExpr::Number(mode)
    }

    pub fn zero() -> Self {
        OpExpr::Sum(Vec::new())
    }

    pub fn scale(self, c: f64) -> Self {
        OpExpr::Scaled(C64::new(c, 0.0), Box::new(self))
    }

    pub fn adjoint(&self) -> Self {
        match self {
            OpExpr::Identity => OpExpr::Identity,
            OpExpr::Annihilate(m) => OpExpr::Create(*m),
            OpExpr::Create(m) => OpExpr::Annihilate(*m),
            OpExpr::Number(m) => OpExpr::Number(*m),
            OpExpr::Scaled(c, e) => OpExpr::Scaled(c.conj(), Box::new(e.adjoint())),
            OpExpr::Sum(ts) => OpExpr::Sum(ts.iter().map(OpExpr::adjoint).collect()),
            OpExpr::Product(fs) => OpExpr::Product(fs.iter().rev().map(OpExpr::adjoint).collect()),
        }
    }

    /// Every mode the expression touches, in first-appearance order.
    pub fn modes(&self) -> Vec<ModeId> {
        let mut out = Vec::new();
        self.collect_modes(&mut out);
        out
    }

    fn collect_modes(&self, out: &mut Vec<ModeId>) {
        match self {
            OpExpr::Identity => {}
            OpExpr::Annihilate(m) | OpExpr::Create(m) | OpExpr::Number(m) => {
                if !out.contains(m) {
                    out.push(*m);
                }
            }
            OpExpr::Scaled(_, e) => e.collect_modes(out),
            OpExpr::Sum(ts) | OpExpr::Product(ts) => ts.iter().for_each(|t| t.collect_modes(out)),
        }
    }

    /// Realize as a sparse matrix on `space`.
    ///
    /// The expression is expanded into ladder monomials. Each monomial maps a
    /// basis state to at most one basis state, so every row is filled by
    /// applying the adjoint monomials to that row's basis state. Rungs above
    /// the cutoff are dropped at every intermediate step, exactly as in a
    /// product of truncated matrices.
    pub fn build(&self, space: &Arc<FockSpace>) -> Result<Operator> {
        let monomials = self.expand(space)?;
        // adjoints, applied to |r> to find the columns of row r
        let adjoints: Vec<(C64, Vec<(Step, usize)>)> = monomials
            .iter()
            .map(|(c, ops)| (c.conj(), ops.iter().rev().map(|&(k, p)| (k.adjoint(), p)).collect()))
            .collect();
        let dim = space.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut row: Vec<(usize, C64)> = Vec::new();
        for r in 0..dim {
            row.clear();
            for (c, ops) in &adjoints {
                if let Some((col, amp)) = apply_monomial(space, r, ops) {
                    row.push((col, (c * amp).conj()));
                }
            }
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut v = C64::new(0.0, 0.0);
                while k < row.len() && row[k].0 == col {
                    v += row[k].1;
                    k += 1;
                }
                if v != C64::new(0.0, 0.0) {
                    cols.push(col);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Operator::from_csr(space, row_ptr, cols, vals))
    }

    /// Sum of monomials `(coefficient, steps)`, steps listed left to right.
    fn expand(&self, space: &FockSpace) -> Result<Vec<(C64, Vec<(Step, usize)>)>> {
        let one = C64::new(1.0, 0.0);
        let mut out = match self {
            OpExpr::Identity => vec![(one, Vec::new())],
            OpExpr::Annihilate(m) => vec![(one, vec![(Step::Down, space.require(m)?)])],
            OpExpr::Create(m) => vec![(one, vec![(Step::Up, space.require(m)?)])],
            OpExpr::Number(m) => vec![(one, vec![(Step::Count, space.require(m)?)])],
            OpExpr::Scaled(c, e) => e.expand(space)?.into_iter().map(|(k, ops)| (c * k, ops)).collect(),
            OpExpr::Sum(ts) => {
                let mut acc = Vec::new();
                for t in ts {
                    acc.extend(t.expand(space)?);
                }
                acc
            }
            OpExpr::Product(fs) => {
                let mut acc = vec![(one, Vec::new())];
                for f in fs {
                    let terms = f.expand(space)?;
                    let mut next = Vec::with_capacity(acc.len() * terms.len());
                    for (ca, oa) in &acc {
                        for (cb, ob) in &terms {
                            let mut ops = oa.clone();
                            ops.extend_from_slice(ob);
                            next.push((ca * cb, ops));
                        }
                    }
                    acc = next;
                }
                acc
            }
        };
        out.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(C64, Vec<(Step, usize)>)> = Vec::with_capacity(out.len());
        for (c, ops) in out {
            match merged.last_mut() {
                Some((mc, mops)) if *mops == ops => *mc += c,
                _ => merged.push((c, ops)),
            }
        }
        merged.retain(|(c, _)| *c != C64::new(0.0, 0.0));
        Ok(merged)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Step {
    Down,
    Up,
    Count,
}

impl Step {
    fn adjoint(self) -> Self {
        match self {
            Step::Down => Step::Up,
            Step::Up => Step::Down,
            Step::Count => Step::Count,
        }
    }
}

/// Apply `steps` (rightmost first) to basis state `index`.
fn apply_monomial(space: &FockSpace, index: usize, steps: &[(Step, usize)]) -> Option<(usize, C64)> {
    let mut idx = index;
    let mut amp = 1.0;
    for &(step, pos) in steps.iter().rev() {
        let n = space.occupation(idx, pos);
        match step {
            Step::Down => {
                if n == 0 {
                    return None;
                }
                amp *= (n as f64).sqrt();
                idx -= space.stride(pos);
            }
            Step::Up => {
                if n == space.cutoffs()[pos] {
                    return None;
                }
                amp *= ((n + 1) as f64).sqrt();
                idx += space.stride(pos);
            }
            Step::Count => {
                if n == 0 {
                    return None;
                }
                amp *= n as f64;
            }
        }
    }
    Some((idx, C64::new(amp, 0.0)))
}

impl Add for OpExpr {
    type Output = OpExpr;

    fn add(self, rhs: OpExpr) -> OpExpr {
        match self {
            OpExpr::Sum(mut ts) => {
                ts.push(rhs);
                OpExpr::Sum(ts)
            }
            lhs => OpExpr::Sum(vec![lhs, rhs]),
        }
    }
}

impl Neg for OpExpr {
    type Output = OpExpr;

    fn neg(self) -> OpExpr {
        self.scale(-1.0)
    }
}

impl Sub for OpExpr {
    type Output = OpExpr;

    fn sub(self, rhs: OpExpr) -> OpExpr {
        self + (-rhs)
    }
}

impl Mul for OpExpr {
    type Output = OpExpr;

    fn mul(self, rhs: OpExpr) -> OpExpr {
        match self {
            OpExpr::Product(mut fs) => {
                fs.push(rhs);
                OpExpr::Product(fs)
            }
            lhs => OpExpr::Product(vec![lhs, rhs]),
        }
    }
}

impl Mul<OpExpr> for f64 {
    type Output = OpExpr;

    fn mul(self, rhs: OpExpr) -> OpExpr {
        rhs.scale(self)
    }
}
