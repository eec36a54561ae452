//! Periodic tensor-product grids and their spectral eigenvalue tables.
//!
//! A [`Grid`] covers `[a_w, b_w)` per axis with `N_w` uniformly spaced points
//! `x_j = a_w + j h_w` and carries the diagonal eigenvalue arrays of the
//! Fourier differentiation matrices:
//!
//! * first derivative: `Λ1[p] = i μ_w p̃` with `p̃ = p` below the Nyquist
//!   index, `0` at `p = N_w/2`, and `p − N_w` above it;
//! * second derivative: `Λ2[p] = −(μ_w p̂)²` with `p̂ = p` up to and
//!   including `N_w/2`, and `p − N_w` above it,
//!
//! where `μ_w = 2π/(b_w − a_w)`. The Nyquist mode is zeroed in `Λ1` but kept
//! in `Λ2`; the asymmetry is intentional and matches the differentiation
//! matrices `D_1 = F^H Λ1 F`, `D_2 = F^H Λ2 F` of the pseudo-spectral method.
//!
//! Storage order of grid functions is fixed crate-wide: flat arrays with the
//! x index fastest, i.e. `flat = j + N_x (k + N_y l)`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    sizes: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    spacing: Vec<f64>,
    mu: Vec<f64>,
    coords: Vec<Vec<f64>>,
    eig1: Vec<Vec<Complex64>>,
    eig2: Vec<Vec<f64>>,
    len: usize,
}

impl Grid {
    /// Build a periodic grid. Sizes must be even and at least 4; bounds must
    /// satisfy `upper > lower` componentwise.
    pub fn new(sizes: &[usize], lower: &[f64], upper: &[f64]) -> Result<Grid> {
        let dim = sizes.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "grid dimension must be 1..={MAX_DIM}, got {dim}"
            )));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "bounds must have one entry per axis ({dim}), got {} / {}",
                lower.len(),
                upper.len()
            )));
        }
        for (axis, &n) in sizes.iter().enumerate() {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "axis {axis}: size must be even and >= 4, got {n}"
                )));
            }
            if !(upper[axis] > lower[axis]) || !lower[axis].is_finite() || !upper[axis].is_finite()
            {
                return Err(Error::InvalidArgument(format!(
                    "axis {axis}: need finite upper > lower, got [{}, {}]",
                    lower[axis], upper[axis]
                )));
            }
        }

        let mut spacing = Vec::with_capacity(dim);
        let mut mu = Vec::with_capacity(dim);
        let mut coords = Vec::with_capacity(dim);
        let mut eig1 = Vec::with_capacity(dim);
        let mut eig2 = Vec::with_capacity(dim);
        for axis in 0..dim {
            let n = sizes[axis];
            let length = upper[axis] - lower[axis];
            let h = length / n as f64;
            let m = 2.0 * PI / length;
            spacing.push(h);
            mu.push(m);
            coords.push((0..n).map(|j| lower[axis] + j as f64 * h).collect());

            let half = n / 2;
            let mut l1 = Vec::with_capacity(n);
            let mut l2 = Vec::with_capacity(n);
            for p in 0..n {
                // p̃: signed wavenumber with the Nyquist mode dropped.
                let p1 = if p < half {
                    p as f64
                } else if p == half {
                    0.0
                } else {
                    p as f64 - n as f64
                };
                // p̂: signed wavenumber with the Nyquist mode kept.
                let p2 = if p <= half {
                    p as f64
                } else {
                    p as f64 - n as f64
                };
                l1.push(Complex64::new(0.0, m * p1));
                l2.push(-(m * p2) * (m * p2));
            }
            eig1.push(l1);
            eig2.push(l2);
        }

        let len = sizes.iter().product();
        Ok(Grid {
            dim,
            sizes: sizes.to_vec(),
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            spacing,
            mu,
            coords,
            eig1,
            eig2,
            len,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Coordinates `x_j = a + j h` along one axis.
    pub fn coords(&self, axis: usize) -> &[f64] {
        &self.coords[axis]
    }

    /// First-derivative eigenvalues along one axis (purely imaginary).
    pub fn eig1(&self, axis: usize) -> &[Complex64] {
        &self.eig1[axis]
    }

    /// Second-derivative eigenvalues along one axis (real, <= 0).
    pub fn eig2(&self, axis: usize) -> &[f64] {
        &self.eig2[axis]
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h_1 h_2 h_3` of the discrete inner product.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Domain volume `Π (b_w − a_w)`.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.upper[a] - self.lower[a]).product()
    }

    /// Stride of `axis` in the flat x-fastest layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.sizes[..axis].iter().product()
    }

    /// Per-axis index of a flat index.
    #[inline]
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.sizes[axis]
    }

    /// Physical coordinates of a flat index, written into `out[..dim]`.
    #[inline]
    pub fn point(&self, flat: usize, out: &mut [f64; MAX_DIM]) {
        let mut rest = flat;
        for axis in 0..self.dim {
            let j = rest % self.sizes[axis];
            rest /= self.sizes[axis];
            out[axis] = self.coords[axis][j];
        }
    }

    /// Total Laplacian eigenvalue `λ = Σ_w Λ2^w[p_w]` of a flat mode index.
    #[inline]
    pub fn laplacian_eig(&self, flat: usize) -> f64 {
        let mut rest = flat;
        let mut lam = 0.0;
        for axis in 0..self.dim {
            let p = rest % self.sizes[axis];
            rest /= self.sizes[axis];
            lam += self.eig2[axis][p];
        }
        lam
    }

    /// Whether two grids describe the same layout (sizes and bounds).
    pub fn same_layout(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.sizes == other.sizes
            && self.lower == other.lower
            && self.upper == other.upper
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eigenvalues_unit_circle() {
        // N=4 on [0, 2π]: μ = 1, Λ1 = i[0,1,0,−1], Λ2 = −[0,1,4,1].
        let g = Grid::new(&[4], &[0.0], &[2.0 * PI]).unwrap();
        assert!((g.mu()[0] - 1.0).abs() < 1e-15);
        let l1: Vec<f64> = g.eig1(0).iter().map(|z| z.im).collect();
        assert_eq!(l1, vec![0.0, 1.0, 0.0, -1.0]);
        assert!(g.eig1(0).iter().all(|z| z.re == 0.0));
        assert_eq!(g.eig2(0), &[0.0, -1.0, -4.0, -1.0]);
    }

    #[test]
    fn eigenvalues_scaled_interval() {
        // N=4 on [0, π]: μ = 2, Λ2 = −[0,4,16,4].
        let g = Grid::new(&[4], &[0.0], &[PI]).unwrap();
        assert!((g.mu()[0] - 2.0).abs() < 1e-15);
        assert_eq!(g.eig2(0), &[0.0, -4.0, -16.0, -4.0]);
    }

    #[test]
    fn offset_square_grid() {
        let g = Grid::new(&[8, 8], &[-8.0, -8.0], &[8.0, 8.0]).unwrap();
        assert_eq!(g.spacing(), &[2.0, 2.0]);
        assert_eq!(g.coords(0)[0], -8.0);
        assert_eq!(g.coords(0)[7], 6.0);
        assert_eq!(g.len(), 64);
        assert_eq!(g.stride(1), 8);
    }

    #[test]
    fn nyquist_handling() {
        let g = Grid::new(&[8], &[0.0], &[1.0]).unwrap();
        // Λ1 zero at N/2, Λ2 keeps it.
        assert_eq!(g.eig1(0)[4], Complex64::new(0.0, 0.0));
        let mu = g.mu()[0];
        assert!((g.eig2(0)[4] + (4.0 * mu).powi(2)).abs() < 1e-9);
        assert!(g.eig2(0).iter().all(|&v| v <= 0.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Grid::new(&[5], &[0.0], &[1.0]).is_err()); // odd
        assert!(Grid::new(&[2], &[0.0], &[1.0]).is_err()); // too small
        assert!(Grid::new(&[8], &[1.0], &[1.0]).is_err()); // empty interval
        assert!(Grid::new(&[8], &[2.0], &[1.0]).is_err()); // inverted
        assert!(Grid::new(&[], &[], &[]).is_err());
        assert!(Grid::new(&[8, 8, 8, 8], &[0.0; 4], &[1.0; 4]).is_err());
        assert!(Grid::new(&[8, 8], &[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn flat_index_decomposition() {
        let g = Grid::new(&[4, 6, 8], &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        let flat = 3 + 4 * (2 + 6 * 5);
        assert_eq!(g.axis_index(flat, 0), 3);
        assert_eq!(g.axis_index(flat, 1), 2);
        assert_eq!(g.axis_index(flat, 2), 5);
        let mut p = [0.0; MAX_DIM];
        g.point(flat, &mut p);
        assert!((p[0] - 0.75).abs() < 1e-15);
        let lam = g.laplacian_eig(flat);
        let expect = g.eig2(0)[3] + g.eig2(1)[2] + g.eig2(2)[5];
        assert_eq!(lam, expect);
    }
}
