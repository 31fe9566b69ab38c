//! Mode-cube bookkeeping for the torus `[0, 2pi]^n`.
//!
//! A [`Lattice`] retains the full cube of wavenumbers `|j_i| <= N` in each of
//! the `n` dimensions. The first `m` components of a mode `j` form the split
//! part `j'` used by the anisotropic weights; `m = n` makes everything
//! isotropic in practice.

use crate::error::{Error, Result};

/// Retained wavenumber cube `{ j in Z^n : |j_i| <= N }` plus the split index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    split: usize,
    max_mode: usize,
}

impl Lattice {
    /// `dim` = spatial dimension n, `split` = number of leading coordinates
    /// carrying the analyticity weight (1 <= split <= dim), `max_mode` = N.
    pub fn new(dim: usize, split: usize, max_mode: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("lattice dimension must be >= 1".into()));
        }
        if split < 1 || split > dim {
            return Err(Error::InvalidParameter(format!(
                "split index must satisfy 1 <= m <= n, got m = {split}, n = {dim}"
            )));
        }
        if max_mode < 1 {
            return Err(Error::InvalidParameter("max mode N must be >= 1".into()));
        }
        // (2N+1)^n must fit comfortably in memory; reject absurd requests early.
        let per_axis = 2 * max_mode + 1;
        let total = (per_axis as f64).powi(dim as i32);
        if total > 1e9 {
            return Err(Error::InvalidParameter(format!(
                "lattice of {per_axis}^{dim} modes is too large"
            )));
        }
        Ok(Self { dim, split, max_mode })
    }

    /// One-dimensional lattice, the common case in the experiments.
    pub fn line(max_mode: usize) -> Self {
        Self::new(1, 1, max_mode).expect("line lattice is always valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    /// Number of retained modes per axis, `2N + 1`.
    pub fn modes_per_axis(&self) -> usize {
        2 * self.max_mode + 1
    }

    /// Total number of retained modes, `(2N + 1)^n`.
    pub fn num_modes(&self) -> usize {
        self.modes_per_axis().pow(self.dim as u32)
    }

    /// Flat row-major index of a mode, or `None` if outside the cube.
    pub fn flat_index(&self, j: &[i64]) -> Option<usize> {
        assert_eq!(j.len(), self.dim, "mode dimension mismatch");
        let n = self.max_mode as i64;
        let per_axis = self.modes_per_axis();
        let mut idx = 0usize;
        for &c in j {
            if c < -n || c > n {
                return None;
            }
            idx = idx * per_axis + (c + n) as usize;
        }
        Some(idx)
    }

    /// Mode components of a flat index, written into `out`.
    pub fn mode_of(&self, flat: usize, out: &mut [i64]) {
        assert_eq!(out.len(), self.dim);
        debug_assert!(flat < self.num_modes());
        let n = self.max_mode as i64;
        let per_axis = self.modes_per_axis();
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = (rest % per_axis) as i64 - n;
            rest /= per_axis;
        }
    }

    /// Calls `f(flat, j)` for every retained mode in flat-index order.
    pub fn for_each_mode<F: FnMut(usize, &[i64])>(&self, mut f: F) {
        let mut j = vec![0i64; self.dim];
        for flat in 0..self.num_modes() {
            self.mode_of(flat, &mut j);
            f(flat, &j);
        }
    }

    /// Squared Euclidean length `|j|^2` of a mode.
    pub fn abs2(j: &[i64]) -> f64 {
        j.iter().map(|&c| (c * c) as f64).sum()
    }

    /// Euclidean length `|j'|` of the first `split` components.
    pub fn split_norm(&self, j: &[i64]) -> f64 {
        j[..self.split]
            .iter()
            .map(|&c| (c * c) as f64)
            .sum::<f64>()
            .sqrt()
    }

    /// Per-mode geometry `(1 + |j|^2, |j'|)` in flat-index order, precomputed
    /// for the norm and weight loops.
    pub fn geometry(&self) -> (Vec<f64>, Vec<f64>) {
        let mut one_plus_abs2 = vec![0.0; self.num_modes()];
        let mut split_norm = vec![0.0; self.num_modes()];
        self.for_each_mode(|flat, j| {
            one_plus_abs2[flat] = 1.0 + Self::abs2(j);
            split_norm[flat] = self.split_norm(j);
        });
        (one_plus_abs2, split_norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let lat = Lattice::new(2, 1, 3).unwrap();
        let mut j = [0i64; 2];
        for flat in 0..lat.num_modes() {
            lat.mode_of(flat, &mut j);
            assert_eq!(lat.flat_index(&j), Some(flat));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Lattice::new(0, 1, 4).is_err());
        assert!(Lattice::new(2, 0, 4).is_err());
        assert!(Lattice::new(2, 3, 4).is_err());
        assert!(Lattice::new(1, 1, 0).is_err());
    }

    #[test]
    fn split_norm_uses_leading_components() {
        let lat = Lattice::new(2, 1, 8).unwrap();
        assert_eq!(lat.split_norm(&[3, 5]), 3.0);
        let lat2 = Lattice::new(2, 2, 8).unwrap();
        assert_eq!(lat2.split_norm(&[3, 4]), 5.0);
    }

    #[test]
    fn out_of_cube_modes_have_no_index() {
        let lat = Lattice::line(4);
        assert_eq!(lat.flat_index(&[5]), None);
        assert_eq!(lat.flat_index(&[-5]), None);
        assert!(lat.flat_index(&[4]).is_some());
    }
}
