//! The discrete GP operator `L_h u = −½Δ_h u + V·u − Ω L_z^h u`.
//!
//! [`GpOperator`] is a prepared, immutable object: the trap potential is
//! evaluated (or loaded) on the grid once at construction. `apply` methods
//! are pure; raw-slice variants with caller-owned scratch back the
//! integrator's inner loop.

use num_complex::Complex64;
use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{self, Field};
use crate::grid::Grid;
use crate::par;
use crate::snapshot;

/// External trap potential.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V(x) = scale · Σ_w γ_w² x_w² / 2`.
    Harmonic { gammas: Vec<f64>, scale: f64 },
    /// Real part of a snapshot file sampled on the run grid.
    FromFile { path: PathBuf },
}

impl PotentialSpec {
    /// Isotropic harmonic trap with unit frequencies.
    pub fn harmonic_unit(dim: usize) -> PotentialSpec {
        PotentialSpec::Harmonic {
            gammas: vec![1.0; dim],
            scale: 1.0,
        }
    }
}

/// Physical and SAV parameters of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct GpParams {
    /// Interaction strength β.
    pub beta: f64,
    /// Rotation speed Ω about the z axis.
    pub omega: f64,
    pub potential: PotentialSpec,
    /// SAV regularization constant C₀ (> 0).
    pub c0: f64,
}

impl GpParams {
    pub fn new(beta: f64, omega: f64, potential: PotentialSpec) -> GpParams {
        GpParams {
            beta,
            omega,
            potential,
            c0: 1.0,
        }
    }
}

/// Prepared GP operator with the potential cached on its grid.
#[derive(Debug, Clone)]
pub struct GpOperator {
    grid: Arc<Grid>,
    beta: f64,
    omega: f64,
    c0: f64,
    potential: Vec<f64>,
}

impl GpOperator {
    pub fn new(grid: &Arc<Grid>, params: &GpParams) -> Result<GpOperator> {
        if !(params.c0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "SAV constant c0 must be positive, got {}",
                params.c0
            )));
        }
        if params.omega != 0.0 && grid.dim() < 2 {
            return Err(Error::Unsupported(
                "rotation (omega != 0) requires dim >= 2".into(),
            ));
        }
        let potential = match &params.potential {
            PotentialSpec::Harmonic { gammas, scale } => {
                if gammas.len() != grid.dim() {
                    return Err(Error::InvalidArgument(format!(
                        "potential needs {} trap frequencies, got {}",
                        grid.dim(),
                        gammas.len()
                    )));
                }
                let g = grid.clone();
                let gam = gammas.clone();
                let scale = *scale;
                let mut v = vec![0.0f64; grid.len()];
                par::fill_indexed(&mut v, |i| {
                    let mut p = [0.0; crate::grid::MAX_DIM];
                    g.point(i, &mut p);
                    let mut acc = 0.0;
                    for (w, &ga) in gam.iter().enumerate() {
                        acc += ga * ga * p[w] * p[w];
                    }
                    scale * 0.5 * acc
                });
                v
            }
            PotentialSpec::FromFile { path } => {
                let snap = snapshot::read(path)?;
                if !snap.field.grid().same_layout(grid) {
                    return Err(Error::Format(format!(
                        "potential file {} is not sampled on the run grid",
                        path.display()
                    )));
                }
                let v: Vec<f64> = snap.field.data().iter().map(|z| z.re).collect();
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Format(format!(
                        "potential file {} contains non-finite values",
                        path.display()
                    )));
                }
                v
            }
        };
        Ok(GpOperator {
            grid: grid.clone(),
            beta: params.beta,
            omega: params.omega,
            c0: params.c0,
            potential,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// The cached potential values.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    fn check_field(&self, u: &Field) -> Result<()> {
        if u.grid().same_layout(&self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Angular momentum `L_z^h u = −i (X ∘ D_1^y u − Y ∘ D_1^x u)`.
    pub fn apply_lz(&self, u: &Field) -> Result<Field> {
        self.check_field(u)?;
        if self.grid.dim() < 2 {
            return Err(Error::Unsupported(
                "angular momentum needs at least the x and y axes".into(),
            ));
        }
        let mut ws = OpScratch::new();
        let mut out = vec![Complex64::default(); u.len()];
        lz_into(&self.grid, u.data(), &mut out, &mut ws);
        Field::from_data(u.grid(), out)
    }

    /// Full linear part `L_h u = −½Δ_h u + V·u − Ω L_z^h u`.
    pub fn apply_linear(&self, u: &Field) -> Result<Field> {
        self.check_field(u)?;
        let mut ws = OpScratch::new();
        let mut out = vec![Complex64::default(); u.len()];
        self.linear_into(u.data(), &mut out, &mut ws);
        Ok(Field::from_data(u.grid(), out)?)
    }

    /// `⟨L_h u, u⟩_h` (real up to round-off).
    pub fn quadratic_form(&self, u: &Field) -> Result<f64> {
        let lu = self.apply_linear(u)?;
        Ok(lu.inner(u)?.re)
    }

    /// Non-stiff part `V·u − Ω L_z^h u` into `out`.
    pub(crate) fn nonstiff_into(&self, u: &[Complex64], out: &mut [Complex64], ws: &mut OpScratch) {
        let v = &self.potential;
        if self.omega == 0.0 || self.grid.dim() < 2 {
            par::fill_indexed(out, |i| v[i] * u[i]);
            return;
        }
        lz_into(&self.grid, u, out, ws);
        let omega = self.omega;
        par::update_indexed(out, |i, z| *z = v[i] * u[i] - omega * *z);
    }

    /// `L_h u` into `out` using caller scratch.
    pub(crate) fn linear_into(&self, u: &[Complex64], out: &mut [Complex64], ws: &mut OpScratch) {
        self.nonstiff_into(u, out, ws);
        ws.lap.clear();
        ws.lap.extend_from_slice(u);
        field::laplacian_in_place(&mut ws.lap, &self.grid, &mut ws.fft);
        let lap = &ws.lap;
        par::update_indexed(out, |i, z| *z -= 0.5 * lap[i]);
    }
}

/// Reusable buffers for the raw-slice operator applications.
#[derive(Debug, Default)]
pub(crate) struct OpScratch {
    pub(crate) dx: Vec<Complex64>,
    pub(crate) dy: Vec<Complex64>,
    pub(crate) lap: Vec<Complex64>,
    pub(crate) fft: Vec<Complex64>,
}

impl OpScratch {
    pub(crate) fn new() -> OpScratch {
        OpScratch::default()
    }
}

/// `out = L_z^h u = −i (X ∘ ∂_y u − Y ∘ ∂_x u)`.
fn lz_into(grid: &Grid, u: &[Complex64], out: &mut [Complex64], ws: &mut OpScratch) {
    ws.dx.clear();
    ws.dx.extend_from_slice(u);
    field::deriv_in_place(&mut ws.dx, grid, 0, 1, &mut ws.fft);
    ws.dy.clear();
    ws.dy.extend_from_slice(u);
    field::deriv_in_place(&mut ws.dy, grid, 1, 1, &mut ws.fft);

    let xs = grid.coords(0);
    let ys = grid.coords(1);
    let nx = grid.sizes()[0];
    let ny = grid.sizes()[1];
    let (dx, dy) = (&ws.dx, &ws.dy);
    let minus_i = -Complex64::i();
    par::fill_indexed(out, |i| {
        let x = xs[i % nx];
        let y = ys[(i / nx) % ny];
        minus_i * (x * dy[i] - y * dx[i])
    });
}
