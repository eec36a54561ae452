//! Complex grid functions and the discrete inner product.
//!
//! A [`Field`] is a flat array of complex values on a shared [`Grid`], ordered
//! x-fastest. Spectral differentiation is exact for trigonometric polynomials
//! below the Nyquist degree. The inner product conjugates its second argument:
//! `⟨u,v⟩_h = h_1 h_2 h_3 Σ_j u_j v̄_j`.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{Grid, MAX_DIM};
use crate::par;

#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    data: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Field {
        Field {
            grid: grid.clone(),
            data: vec![Complex64::default(); grid.len()],
        }
    }

    /// Sample `f` at every grid point; the closure receives the physical
    /// coordinates of the point (`dim` entries used).
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> Complex64 + Sync) -> Field {
        let mut field = Field::zeros(grid);
        let g = grid.clone();
        par::fill_indexed(&mut field.data, |i| {
            let mut p = [0.0; MAX_DIM];
            g.point(i, &mut p);
            f(&p[..g.dim()])
        });
        field
    }

    /// Wrap existing data; length must match the grid.
    pub fn from_data(grid: &Arc<Grid>, data: Vec<Complex64>) -> Result<Field> {
        if data.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field data length {} does not match grid size {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Field {
            grid: grid.clone(),
            data,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_layout(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Spectral derivative of the given order (1 or 2) along `axis`.
    pub fn deriv(&self, axis: usize, order: u32) -> Result<Field> {
        if axis >= self.grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for dim {}",
                self.grid.dim()
            )));
        }
        if order != 1 && order != 2 {
            return Err(Error::InvalidArgument(format!(
                "derivative order must be 1 or 2, got {order}"
            )));
        }
        let mut out = self.clone();
        let mut scratch = Vec::new();
        deriv_in_place(&mut out.data, &self.grid, axis, order, &mut scratch);
        Ok(out)
    }

    /// Discrete Laplacian `Δ_h = Σ_w D_2^w` over all axes.
    pub fn laplacian(&self) -> Field {
        let mut out = self.clone();
        let mut scratch = Vec::new();
        laplacian_in_place(&mut out.data, &self.grid, &mut scratch);
        out
    }

    /// `⟨u,v⟩_h = h_1 h_2 h_3 Σ u_j v̄_j` (conjugation on the second argument).
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let w = self.grid.cell_volume();
        let u = &self.data;
        let v = &other.data;
        Ok(par::sum_c64(u.len(), |i| u[i] * v[i].conj()) * w)
    }

    /// `‖u‖_h = sqrt(Re⟨u,u⟩_h)`.
    pub fn norm_h(&self) -> f64 {
        let u = &self.data;
        let s = par::sum_f64(u.len(), |i| u[i].norm_sqr());
        (s * self.grid.cell_volume()).sqrt()
    }

    /// `‖u‖_{∞,h} = max_j |u_j|`.
    pub fn norm_inf(&self) -> f64 {
        let u = &self.data;
        par::max_f64(u.len(), |i| u[i].norm())
    }

    /// `‖u‖_{p,h} = (h_1 h_2 h_3 Σ |u_j|^p)^{1/p}`.
    pub fn norm_p(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "norm_p requires p >= 1");
        let u = &self.data;
        let s = par::sum_f64(u.len(), |i| u[i].norm().powf(p));
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    /// `‖u‖_{4,h}^4 = h_1 h_2 h_3 Σ |u_j|^4`, the SAV quartic term.
    pub fn quartic_norm(&self) -> f64 {
        quartic_norm_slice(&self.data, self.grid.cell_volume())
    }
}

pub(crate) fn quartic_norm_slice(data: &[Complex64], cell_volume: f64) -> f64 {
    par::sum_f64(data.len(), |i| {
        let m = data[i].norm_sqr();
        m * m
    }) * cell_volume
}

/// In-place spectral derivative on a raw buffer.
pub(crate) fn deriv_in_place(
    data: &mut [Complex64],
    grid: &Grid,
    axis: usize,
    order: u32,
    scratch: &mut Vec<Complex64>,
) {
    let sizes = grid.sizes();
    fft::transform_axis(data, sizes, axis, Direction::Forward, scratch);
    let stride = grid.stride(axis);
    let n = sizes[axis];
    match order {
        1 => {
            let eig = grid.eig1(axis);
            par::update_indexed(data, |i, v| *v *= eig[(i / stride) % n]);
        }
        2 => {
            let eig = grid.eig2(axis);
            par::update_indexed(data, |i, v| *v *= eig[(i / stride) % n]);
        }
        _ => unreachable!("order validated by callers"),
    }
    fft::transform_axis(data, sizes, axis, Direction::Inverse, scratch);
}

/// In-place Laplacian: one full transform, multiply by `Σ_w Λ2^w`, back.
pub(crate) fn laplacian_in_place(data: &mut [Complex64], grid: &Grid, scratch: &mut Vec<Complex64>) {
    fft::forward_all(data, grid.sizes(), scratch);
    par::update_indexed(data, |i, v| *v *= grid.laplacian_eig(i));
    fft::inverse_all(data, grid.sizes(), scratch);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_circle_grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::new(&[n], &[0.0], &[2.0 * PI]).unwrap())
    }

    #[test]
    fn deriv_of_fourier_mode() {
        // f = e^{iμx} is an eigenfunction of D1 with eigenvalue iμ (μ = 1 here).
        let g = unit_circle_grid(8);
        let f = Field::from_fn(&g, |x| Complex64::from_polar(1.0, x[0]));
        let df = f.deriv(0, 1).unwrap();
        for (d, v) in df.data().iter().zip(f.data()) {
            assert!((d - Complex64::i() * v).norm() <= 1e-13);
        }
    }

    #[test]
    fn deriv_of_constant_is_zero() {
        let g = unit_circle_grid(8);
        let f = Field::from_fn(&g, |_| Complex64::new(3.25, -1.5));
        let df = f.deriv(0, 1).unwrap();
        assert!(df.norm_inf() <= 1e-14);
    }

    #[test]
    fn second_deriv_matches_analytic() {
        // f = sin(2μx) on [0, π] (μ = 2): f'' = −4μ² sin(2μx).
        let g = Arc::new(Grid::new(&[16], &[0.0], &[PI]).unwrap());
        let mu = g.mu()[0];
        let f = Field::from_fn(&g, |x| Complex64::new((2.0 * mu * x[0]).sin(), 0.0));
        let d2 = f.deriv(0, 2).unwrap();
        for (d, x) in d2.data().iter().zip(g.coords(0)) {
            let expect = -4.0 * mu * mu * (2.0 * mu * x).sin();
            assert!((d.re - expect).abs() <= 1e-12 * (4.0 * mu * mu));
            assert!(d.im.abs() <= 1e-12);
        }
    }

    #[test]
    fn laplacian_of_plane_wave_2d() {
        // f = e^{i(x+y)} on [0,2π]²: Δf = −2f.
        let g = Arc::new(Grid::new(&[8, 8], &[0.0, 0.0], &[2.0 * PI, 2.0 * PI]).unwrap());
        let f = Field::from_fn(&g, |x| Complex64::from_polar(1.0, x[0] + x[1]));
        let lf = f.laplacian();
        for (l, v) in lf.data().iter().zip(f.data()) {
            assert!((l + 2.0 * v).norm() <= 1e-12);
        }
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = Arc::new(Grid::new(&[6, 4], &[0.0, 0.0], &[1.0, 2.0]).unwrap());
        let f = Field::from_fn(&g, |_| Complex64::new(1.0, 1.0));
        assert!(f.laplacian().norm_inf() <= 1e-12);
    }

    #[test]
    fn inner_product_conventions() {
        let g = Arc::new(Grid::new(&[8], &[0.0], &[1.0]).unwrap());
        let one = Field::from_fn(&g, |_| Complex64::new(1.0, 0.0));
        let eye = Field::from_fn(&g, |_| Complex64::i());
        // ⟨1,1⟩ = 1 (quadrature of a constant on the unit box).
        assert!((one.inner(&one).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        // ⟨1,i⟩ = conj(i) = −i.
        assert!((one.inner(&eye).unwrap() + Complex64::i()).norm() < 1e-14);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g1 = Arc::new(Grid::new(&[8], &[0.0], &[1.0]).unwrap());
        let g2 = Arc::new(Grid::new(&[8], &[0.0], &[2.0]).unwrap());
        let u = Field::zeros(&g1);
        let v = Field::zeros(&g2);
        assert!(matches!(u.inner(&v), Err(Error::GridMismatch)));
    }

    #[test]
    fn gaussian_mass_3d() {
        // Trap ground-state-style Gaussian with γ = 1 on [−8,8]³, N=32:
        // ∫|ψ₀|² over ℝ³ is exactly 1/4; periodic truncation error is
        // spectrally small at this resolution.
        let g = Arc::new(Grid::new(&[32, 32, 32], &[-8.0; 3], &[8.0; 3]).unwrap());
        let c = 1.0 / (2.0 * PI.powf(0.75));
        let psi = Field::from_fn(&g, |x| {
            let v = 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            Complex64::new(c * (-v).exp(), 0.0)
        });
        let mass = psi.inner(&psi).unwrap().re;
        assert!((mass - 0.25).abs() <= 1e-8, "mass = {mass}");
    }

    #[test]
    fn deriv_argument_checks() {
        let g = unit_circle_grid(8);
        let f = Field::zeros(&g);
        assert!(f.deriv(1, 1).is_err());
        assert!(f.deriv(0, 3).is_err());
    }
}
