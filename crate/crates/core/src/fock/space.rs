use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Hard upper bound on the number of basis states of a [`FockSpace`].
pub const DEFAULT_MAX_DIMENSION: usize = 10_000_000;

/// Which of the two tensor copies produced by the coproduct a mode lives in.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    Plus,
    Minus,
}

impl Sector {
    pub fn flip(self) -> Self {
        match self {
            Sector::Plus => Sector::Minus,
            Sector::Minus => Sector::Plus,
        }
    }

    /// `+1.0` for the plus sector, `-1.0` for the minus sector.
    pub fn sign(self) -> f64 {
        match self {
            Sector::Plus => 1.0,
            Sector::Minus => -1.0,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    Particle,
    Antiparticle,
}

impl Species {
    pub fn partner(self) -> Self {
        match self {
            Species::Particle => Species::Antiparticle,
            Species::Antiparticle => Species::Particle,
        }
    }
}

/// A single bosonic mode: momentum label, sector and particle species.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub momentum: i64,
    pub sector: Sector,
    pub species: Species,
}

impl ModeId {
    pub const fn new(momentum: i64, sector: Sector, species: Species) -> Self {
        Self { momentum, sector, species }
    }

    pub const fn particle(momentum: i64, sector: Sector) -> Self {
        Self::new(momentum, sector, Species::Particle)
    }

    pub const fn antiparticle(momentum: i64, sector: Sector) -> Self {
        Self::new(momentum, sector, Species::Antiparticle)
    }

    pub fn with_sector(self, sector: Sector) -> Self {
        Self { sector, ..self }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bar = match self.species {
            Species::Particle => "",
            Species::Antiparticle => "bar_",
        };
        let sign = match self.sector {
            Sector::Plus => '+',
            Sector::Minus => '-',
        };
        write!(f, "{bar}p{}{sign}", self.momentum)
    }
}

/// A truncated multi-mode bosonic Fock space.
///
/// Basis states are occupation multi-indices `(n_0, ..., n_{M-1})` with
/// `0 <= n_m <= cutoff_m`, enumerated lexicographically in mode declaration
/// order: the first mode is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    modes: Vec<ModeId>,
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl FockSpace {
    pub fn new(modes: Vec<ModeId>, cutoffs: Vec<usize>) -> Result<Arc<Self>> {
        Self::with_limit(modes, cutoffs, DEFAULT_MAX_DIMENSION)
    }

    /// Every mode gets the same cutoff.
    pub fn uniform(modes: Vec<ModeId>, cutoff: usize) -> Result<Arc<Self>> {
        let cutoffs = vec![cutoff; modes.len()];
        Self::new(modes, cutoffs)
    }

    pub fn with_limit(modes: Vec<ModeId>, cutoffs: Vec<usize>, max_dimension: usize) -> Result<Arc<Self>> {
        if modes.is_empty() {
            return Err(Error::validation("a Fock space needs at least one mode"));
        }
        if modes.len() != cutoffs.len() {
            return Err(Error::validation(format!("{} modes but {} cutoffs", modes.len(), cutoffs.len())));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::validation(format!("duplicate mode {m}")));
            }
        }
        if let Some(pos) = cutoffs.iter().position(|&c| c < 1) {
            return Err(Error::validation(format!("cutoff of mode {} must be >= 1", modes[pos])));
        }
        let mut dim: usize = 1;
        for &c in &cutoffs {
            dim = dim.checked_mul(c + 1).filter(|&d| d <= max_dimension).ok_or_else(|| {
                Error::Resource(format!("Fock space dimension exceeds the limit of {max_dimension} basis states"))
            })?;
        }
        let mut strides = vec![1usize; modes.len()];
        for m in (0..modes.len().saturating_sub(1)).rev() {
            strides[m] = strides[m + 1] * (cutoffs[m + 1] + 1);
        }
        Ok(Arc::new(Self { modes, cutoffs, strides, dim }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn position(&self, mode: &ModeId) -> Option<usize> {
        self.modes.iter().position(|m| m == mode)
    }

    /// Like [`position`](Self::position) but unknown modes are an error.
    pub fn require(&self, mode: &ModeId) -> Result<usize> {
        self.position(mode).ok_or_else(|| Error::validation(format!("mode {mode} is not part of this space")))
    }

    pub fn contains(&self, mode: &ModeId) -> bool {
        self.position(mode).is_some()
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    /// Occupation of the mode at position `pos` in basis state `index`.
    #[inline]
    pub fn occupation(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % (self.cutoffs[pos] + 1)
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.modes.len()).map(|m| self.occupation(index, m)).collect()
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.modes.len() {
            return Err(Error::validation(format!(
                "expected {} occupations, got {}",
                self.modes.len(),
                occupations.len()
            )));
        }
        let mut idx = 0;
        for (m, (&n, &c)) in occupations.iter().zip(&self.cutoffs).enumerate() {
            if n > c {
                return Err(Error::validation(format!("occupation {n} of mode {} exceeds cutoff {c}", self.modes[m])));
            }
            idx += n * self.strides[m];
        }
        Ok(idx)
    }

    /// Basis states whose involved modes all sit at least `margin` rungs
    /// below their cutoff. `involved = None` means every mode.
    pub fn safe_mask(&self, margin: usize, involved: Option<&[ModeId]>) -> Result<Vec<bool>> {
        let positions: Vec<usize> = match involved {
            None => (0..self.modes.len()).collect(),
            Some(ms) => ms.iter().map(|m| self.require(m)).collect::<Result<_>>()?,
        };
        Ok((0..self.dim)
            .map(|i| positions.iter().all(|&p| self.occupation(i, p) + margin <= self.cutoffs[p]))
            .collect())
    }

    /// Same modes, different cutoffs.
    pub fn with_cutoffs(&self, cutoffs: Vec<usize>) -> Result<Arc<Self>> {
        Self::new(self.modes.clone(), cutoffs)
    }

    /// Whether `other` has the same modes in the same order (cutoffs may differ).
    pub fn same_modes(&self, other: &FockSpace) -> bool {
        self.modes == other.modes
    }

    /// Index of the same occupation pattern in `larger`, a space with the same
    /// modes and cutoffs at least as large.
    #[inline]
    pub fn reindex_into(&self, index: usize, larger: &FockSpace) -> usize {
        (0..self.modes.len()).map(|m| self.occupation(index, m) * larger.strides[m]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modes(n: i64) -> Vec<ModeId> {
        (0..n).map(|k| ModeId::particle(k, Sector::Plus)).collect()
    }

    #[test]
    fn dimensions() {
        assert_eq!(FockSpace::uniform(modes(1), 3).unwrap().dim(), 4);
        assert_eq!(FockSpace::uniform(modes(4), 8).unwrap().dim(), 6561);
    }

    #[test]
    fn rejects_duplicates_and_zero_cutoff() {
        let m = ModeId::particle(0, Sector::Plus);
        assert!(matches!(FockSpace::uniform(vec![m, m], 2), Err(Error::Validation(_))));
        assert!(matches!(FockSpace::uniform(vec![m], 0), Err(Error::Validation(_))));
        assert!(matches!(FockSpace::new(vec![m], vec![]), Err(Error::Validation(_))));
    }

    #[test]
    fn dimension_limit_is_a_resource_error() {
        assert!(matches!(FockSpace::uniform(modes(8), 9), Err(Error::Resource(_))));
        assert!(matches!(FockSpace::with_limit(modes(2), vec![3, 3], 15), Err(Error::Resource(_))));
        assert!(FockSpace::with_limit(modes(2), vec![3, 3], 16).is_ok());
    }

    #[test]
    fn basis_round_trip_exhaustive() {
        let s = FockSpace::new(modes(3), vec![4, 2, 6]).unwrap();
        for i in 0..s.dim() {
            assert_eq!(s.index_of(&s.occupations(i)).unwrap(), i);
        }
    }

    #[test]
    fn first_mode_is_most_significant() {
        let s = FockSpace::uniform(modes(2), 2).unwrap();
        assert_eq!(s.occupations(1), vec![0, 1]);
        assert_eq!(s.occupations(3), vec![1, 0]);
        assert!(s.index_of(&[3, 0]).is_err());
    }

    #[test]
    fn safe_mask_counts_margin() {
        let s = FockSpace::uniform(modes(1), 4).unwrap();
        assert_eq!(s.safe_mask(2, None).unwrap(), vec![true, true, true, false, false]);
    }

    #[test]
    fn reindex_preserves_occupations() {
        let small = FockSpace::uniform(modes(2), 2).unwrap();
        let big = small.with_cutoffs(vec![5, 3]).unwrap();
        for i in 0..small.dim() {
            assert_eq!(big.occupations(small.reindex_into(i, &big)), small.occupations(i));
        }
    }

    #[test]
    fn display_labels() {
        assert_eq!(ModeId::antiparticle(3, Sector::Minus).to_string(), "bar_p3-");
        assert_eq!(ModeId::particle(-1, Sector::Plus).to_string(), "p-1+");
    }
}
