use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::space::FockSpace;
use crate::error::{Error, Result};

/// Complex amplitudes over the occupation-number basis of a [`FockSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: Arc<FockSpace>,
    amps: Vec<C64>,
}

pub(crate) fn check_same(a: &FockSpace, b: &FockSpace, what: &str) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!("{what}: spaces of dimension {} and {} differ", a.dim(), b.dim())))
    }
}

impl StateVector {
    pub fn zeros(space: &Arc<FockSpace>) -> Self {
        Self { space: Arc::clone(space), amps: vec![C64::new(0.0, 0.0); space.dim()] }
    }

    /// The occupation-number eigenstate `|n_0, ..., n_{M-1}>`.
    pub fn basis(space: &Arc<FockSpace>, occupations: &[usize]) -> Result<Self> {
        let idx = space.index_of(occupations)?;
        Ok(Self::basis_index(space, idx))
    }

    pub fn basis_index(space: &Arc<FockSpace>, index: usize) -> Self {
        let mut v = Self::zeros(space);
        v.amps[index] = C64::new(1.0, 0.0);
        v
    }

    /// The all-modes-empty state.
    pub fn vacuum(space: &Arc<FockSpace>) -> Self {
        Self::basis_index(space, 0)
    }

    pub fn from_amplitudes(space: &Arc<FockSpace>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(Error::validation(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                space.dim()
            )));
        }
        Ok(Self { space: Arc::clone(space), amps })
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<C64> {
        Ok(self.amps[self.space.index_of(occupations)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit-norm copy. A zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(C64::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { space: Arc::clone(&self.space), amps: self.amps.iter().map(|a| a * factor).collect() }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: C64, other: &Self) -> Result<Self> {
        check_same(&self.space, &other.space, "add_scaled")?;
        Ok(Self {
            space: Arc::clone(&self.space),
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + factor * b).collect(),
        })
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.add_scaled(C64::new(-1.0, 0.0), other)?.norm())
    }

    /// Copy into a space with the same modes and larger (or equal) cutoffs.
    pub fn embed(&self, larger: &Arc<FockSpace>) -> Result<Self> {
        if !self.space.same_modes(larger) || self.space.cutoffs().iter().zip(larger.cutoffs()).any(|(s, l)| s > l) {
            return Err(Error::SpaceMismatch(
                "embedding target must have the same modes and cutoffs at least as large".into(),
            ));
        }
        let mut out = Self::zeros(larger);
        for (i, a) in self.amps.iter().enumerate() {
            out.amps[self.space.reindex_into(i, larger)] = *a;
        }
        Ok(out)
    }

    /// Orthogonal projection onto a space with the same modes and smaller (or
    /// equal) cutoffs. Amplitudes above the smaller cutoffs are dropped.
    pub fn project(&self, smaller: &Arc<FockSpace>) -> Result<Self> {
        if !self.space.same_modes(smaller) || self.space.cutoffs().iter().zip(smaller.cutoffs()).any(|(l, s)| s > l) {
            return Err(Error::SpaceMismatch(
                "projection target must have the same modes and cutoffs no larger".into(),
            ));
        }
        let mut out = Self::zeros(smaller);
        for (i, a) in out.amps.iter_mut().enumerate() {
            *a = self.amps[smaller.reindex_into(i, &self.space)];
        }
        Ok(out)
    }
}

/// `<u|v>`, conjugate-linear in `u`.
pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    check_same(&u.space, &v.space, "inner")?;
    Ok(u.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ModeId, Sector};

    fn space(cutoff: usize) -> Arc<FockSpace> {
        FockSpace::uniform(vec![ModeId::particle(0, Sector::Plus), ModeId::particle(1, Sector::Plus)], cutoff).unwrap()
    }

    #[test]
    fn inner_is_conjugate_linear_in_first_argument() {
        let s = space(2);
        let u = StateVector::basis(&s, &[1, 0]).unwrap().scaled(C64::new(0.0, 2.0));
        let v = StateVector::basis(&s, &[1, 0]).unwrap();
        assert_eq!(inner(&u, &v).unwrap(), C64::new(0.0, -2.0));
        assert_eq!(inner(&u, &u).unwrap(), C64::new(4.0, 0.0));
    }

    #[test]
    fn embed_then_project_round_trips() {
        let (small, big) = (space(2), space(5));
        let v =
            StateVector::from_amplitudes(&small, (0..9).map(|k| C64::new(k as f64, -(k as f64))).collect()).unwrap();
        assert_eq!(v.embed(&big).unwrap().project(&small).unwrap(), v);
        assert!(v.project(&big).is_err());
        assert!(v.embed(&space(1)).is_err());
    }

    #[test]
    fn amplitude_vector_length_is_checked() {
        assert!(StateVector::from_amplitudes(&space(1), vec![C64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        assert!(inner(&StateVector::vacuum(&space(1)), &StateVector::vacuum(&space(2))).is_err());
    }
}
