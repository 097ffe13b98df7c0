use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polarisation mode label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    H,
    V,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::H => "H",
            Mode::V => "V",
        }
    }
}

/// Truncated Fock space with levels `0..dim` per mode.
///
/// Two-mode vectors are indexed as `m * dim + n` for the basis state
/// `|m⟩_H ⊗ |n⟩_V`: the H occupation is the slow index. Every operator,
/// density matrix and manifold block in this crate uses that ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncatedFockSpace {
    dim: usize,
    modes: usize,
}

impl TruncatedFockSpace {
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(dim, 1)
    }

    pub fn two_mode(dim: usize) -> Result<Self> {
        Self::new(dim, 2)
    }

    pub fn new(dim: usize, modes: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpace(format!(
                "need at least 2 levels per mode, got {dim}"
            )));
        }
        if !(1..=2).contains(&modes) {
            return Err(Error::InvalidSpace(format!(
                "only 1 or 2 modes are supported, got {modes}"
            )));
        }
        Ok(Self { dim, modes })
    }

    /// Levels per mode.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Dimension of the full (tensor-product) space.
    pub fn total_dim(&self) -> usize {
        self.dim.pow(self.modes as u32)
    }

    pub fn is_two_mode(&self) -> bool {
        self.modes == 2
    }

    /// The single-mode space with the same cutoff.
    pub fn mode_space(&self) -> Self {
        Self {
            dim: self.dim,
            modes: 1,
        }
    }

    pub fn require_two_mode(&self) -> Result<()> {
        if self.modes != 2 {
            return Err(Error::InvalidSpace("operation needs a two-mode space".into()));
        }
        Ok(())
    }

    pub fn index(&self, m: usize, n: usize) -> usize {
        debug_assert!(m < self.dim && n < self.dim);
        m * self.dim + n
    }

    pub fn occupations(&self, index: usize) -> (usize, usize) {
        (index / self.dim, index % self.dim)
    }

    /// Largest total photon number representable in the two-mode space.
    pub fn max_manifold(&self) -> usize {
        2 * (self.dim - 1)
    }

    /// H occupations `m` spanning manifold `N` inside the truncation, ascending.
    ///
    /// Manifold blocks are always ordered by ascending `m`, i.e. the first
    /// basis state is `|m_min, N - m_min⟩`.
    pub fn manifold_h_range(&self, n: usize) -> std::ops::RangeInclusive<usize> {
        let lo = n.saturating_sub(self.dim - 1);
        let hi = n.min(self.dim - 1);
        lo..=hi
    }

    /// Flat indices of the manifold `N` basis states in block order.
    pub fn manifold_indices(&self, n: usize) -> Vec<usize> {
        self.manifold_h_range(n).map(|m| self.index(m, n - m)).collect()
    }

    /// True when every `|m, N-m⟩` with `0 ≤ m ≤ N` fits in the truncation.
    pub fn manifold_is_complete(&self, n: usize) -> bool {
        n < self.dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_cutoff() {
        assert!(TruncatedFockSpace::two_mode(1).is_err());
        assert!(TruncatedFockSpace::new(4, 3).is_err());
    }

    #[test]
    fn manifold_blocks_partition_the_space() {
        let space = TruncatedFockSpace::two_mode(5).unwrap();
        let mut seen = vec![false; space.total_dim()];
        for n in 0..=space.max_manifold() {
            for idx in space.manifold_indices(n) {
                let (m, k) = space.occupations(idx);
                assert_eq!(m + k, n);
                assert!(!seen[idx]);
                seen[idx] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
        assert_eq!(
            space.manifold_indices(6),
            vec![space.index(2, 4), space.index(3, 3), space.index(4, 2)]
        );
        assert!(space.manifold_is_complete(4));
        assert!(!space.manifold_is_complete(5));
    }

    #[test]
    fn h_is_the_slow_index() {
        let space = TruncatedFockSpace::two_mode(7).unwrap();
        assert_eq!(space.index(2, 3), 17);
        assert_eq!(space.occupations(17), (2, 3));
    }
}
