//! Brute-force reference implementations on tiny grids.
//!
//! Everything here is deliberately slow and literal: differentiation
//! matrices are materialized as `F^H Λ F` with explicit DFT matrices and
//! combined by Kronecker products, the stage equations are solved with the
//! full operator `L_h` on the left-hand side through a dense LU of the
//! `(s·n)×(s·n)` block system, and integrals come from high-resolution
//! periodic quadrature with closed forms where they exist. None of the fast
//! path's FFT or per-mode machinery is reused, so agreement between the two
//! is a meaningful check rather than a tautology.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::operator::GpOperator;
use crate::sav::SavState;
use crate::tableau::ButcherTableau;
use crate::integrator::SolverOptions;

/// Guard for dense n×n assembly.
pub const MAX_DENSE_POINTS: usize = 4096;
/// Guard for the (s·n)-sized dense stage system.
pub const MAX_DENSE_STAGE_UNKNOWNS: usize = 2048;

/// Densely assembled `L_h` together with the scalars the stage solve needs.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    grid: Arc<Grid>,
    matrix: DMatrix<Complex64>,
    beta: f64,
    c0: f64,
}

/// Materialize `L_h = −½Δ_h + diag(V) − Ω L_z^h` from explicit DFT matrices.
pub fn assemble_dense(op: &GpOperator) -> Result<DenseOperator> {
    let grid = op.grid();
    let n = grid.len();
    if n > MAX_DENSE_POINTS {
        return Err(Error::InvalidArgument(format!(
            "dense assembly limited to {MAX_DENSE_POINTS} points, grid has {n}"
        )));
    }

    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    // −½ Σ_w D2^w
    for axis in 0..grid.dim() {
        let d2 = deriv_matrix(grid, axis, 2);
        let full = embed(grid, axis, &d2);
        matrix -= full.map(|z| 0.5 * z);
    }
    // + diag(V)
    for (r, &v) in op.potential().iter().enumerate() {
        matrix[(r, r)] += Complex64::new(v, 0.0);
    }
    // − Ω L_z,  L_z = −i (X D1^y − Y D1^x)
    if op.omega() != 0.0 {
        let lz = dense_lz(grid);
        matrix -= lz.map(|z| op.omega() * z);
    }

    Ok(DenseOperator {
        grid: grid.clone(),
        matrix,
        beta: op.beta(),
        c0: op.c0(),
    })
}

/// Dense angular momentum `L_z^h` (needs dim >= 2).
pub fn dense_lz(grid: &Arc<Grid>) -> DMatrix<Complex64> {
    assert!(grid.dim() >= 2, "L_z needs x and y axes");
    let d1x = embed(grid, 0, &deriv_matrix(grid, 0, 1));
    let d1y = embed(grid, 1, &deriv_matrix(grid, 1, 1));
    let x = embed(grid, 0, &coord_diag(grid, 0));
    let y = embed(grid, 1, &coord_diag(grid, 1));
    (x * d1y - y * d1x).map(|z| -Complex64::i() * z)
}

impl DenseOperator {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, data: &[Complex64]) -> Vec<Complex64> {
        let v = DVector::from_column_slice(data);
        (&self.matrix * v).as_slice().to_vec()
    }

    /// `max_{ij} |M_ij − conj(M_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// One step of the same stage equations as the fast solver, but with the
    /// full `L_h` kept implicit: each sweep solves the dense block system
    /// `(I + iτ A⊗L_h) k = rhs` by LU, and only the cubic term lags.
    pub fn step(
        &self,
        tableau: &ButcherTableau,
        opts: &SolverOptions,
        state: &SavState,
        tau: f64,
    ) -> Result<SavState> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time step must be nonnegative and finite, got {tau}"
            )));
        }
        if !state.psi.grid().same_layout(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let s = tableau.stages();
        let n = self.grid.len();
        if s * n > MAX_DENSE_STAGE_UNKNOWNS {
            return Err(Error::InvalidArgument(format!(
                "dense stage system limited to {MAX_DENSE_STAGE_UNKNOWNS} unknowns, got {}",
                s * n
            )));
        }
        let cell = self.grid.cell_volume();
        let psi_n = state.psi.data();
        let q_n = state.q;

        let block = DMatrix::<Complex64>::from_fn(s * n, s * n, |row, col| {
            let (i, r) = (row / n, row % n);
            let (j, c) = (col / n, col % n);
            let mut v = Complex64::i() * tau * tableau.a(i, j) * self.matrix[(r, c)];
            if row == col {
                v += 1.0;
            }
            v
        });
        let lu = block.lu();
        let lpsi = self.apply(psi_n);

        let mut k = DVector::<Complex64>::zeros(s * n);
        let mut l = vec![0.0f64; s];
        let mut converged = false;
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        while iterations < opts.max_iter {
            iterations += 1;
            let (phi, l_new, q_stage) = self.stage_terms(tableau, psi_n, q_n, tau, &k);
            l = l_new;

            let mut rhs = DVector::<Complex64>::zeros(s * n);
            for i in 0..s {
                for r in 0..n {
                    rhs[i * n + r] =
                        -Complex64::i() * (lpsi[r] + self.beta * q_stage[i] * phi[i][r]);
                }
            }
            let k_next = lu
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidArgument("singular dense stage system".into()))?;

            residual = 0.0;
            let mut k_max = 0.0f64;
            for idx in 0..s * n {
                residual = residual.max((k_next[idx] - k[idx]).norm());
                k_max = k_max.max(k_next[idx].norm());
            }
            if !residual.is_finite() || !k_max.is_finite() {
                return Err(Error::NumericalBlowup);
            }
            k = k_next;
            if residual < opts.tol * k_max.max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::StepDiverged {
                iterations,
                residual,
            });
        }
        let (_, l_final, _) = self.stage_terms(tableau, psi_n, q_n, tau, &k);
        l.copy_from_slice(&l_final);

        let mut psi_next = psi_n.to_vec();
        for (r, v) in psi_next.iter_mut().enumerate() {
            for i in 0..s {
                *v += tau * tableau.b()[i] * k[i * n + r];
            }
        }
        let q_next = q_n
            + tau
                * (0..s)
                    .map(|i| tableau.b()[i] * l[i])
                    .sum::<f64>();
        let _ = cell;
        Ok(SavState {
            psi: Field::from_data(state.psi.grid(), psi_next)?,
            q: q_next,
        })
    }

    #[allow(clippy::type_complexity)]
    fn stage_terms(
        &self,
        tableau: &ButcherTableau,
        psi_n: &[Complex64],
        q_n: f64,
        tau: f64,
        k: &DVector<Complex64>,
    ) -> (Vec<Vec<Complex64>>, Vec<f64>, Vec<f64>) {
        let s = tableau.stages();
        let n = psi_n.len();
        let cell = self.grid.cell_volume();
        let mut phi = Vec::with_capacity(s);
        let mut l = vec![0.0f64; s];
        for i in 0..s {
            let mut stage = psi_n.to_vec();
            for (r, v) in stage.iter_mut().enumerate() {
                for j in 0..s {
                    *v += tau * tableau.a(i, j) * k[j * n + r];
                }
            }
            let quartic: f64 = stage.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum::<f64>() * cell;
            let denom = (quartic + self.c0).sqrt();
            let phi_i: Vec<Complex64> = stage.iter().map(|z| z.norm_sqr() * z / denom).collect();
            l[i] = 2.0
                * cell
                * (0..n)
                    .map(|r| (k[i * n + r] * phi_i[r].conj()).re)
                    .sum::<f64>();
            phi.push(phi_i);
        }
        let mut q_stage = vec![0.0f64; s];
        for i in 0..s {
            q_stage[i] = q_n + tau * (0..s).map(|j| tableau.a(i, j) * l[j]).sum::<f64>();
        }
        (phi, l, q_stage)
    }

    /// `R(−iτ L_h) ψ` where R is the diagonal (s,s) Padé approximant of the
    /// exponential — the stability function of the s-stage Gauss method.
    pub fn pade_exponential_apply(&self, s: usize, tau: f64, data: &[Complex64]) -> Vec<Complex64> {
        let n = self.matrix.nrows();
        let z = self.matrix.map(|v| -Complex64::i() * tau * v);
        let mut num = DMatrix::<Complex64>::identity(n, n);
        let mut den = DMatrix::<Complex64>::identity(n, n);
        let mut power = DMatrix::<Complex64>::identity(n, n);
        for kk in 1..=s {
            power = &power * &z;
            let c = pade_coeff(s, kk);
            num += power.map(|v| c * v);
            let sign = if kk % 2 == 0 { 1.0 } else { -1.0 };
            den += power.map(|v| sign * c * v);
        }
        let rhs = &num * DVector::from_column_slice(data);
        let x = den.lu().solve(&rhs).expect("Padé denominator is nonsingular");
        x.as_slice().to_vec()
    }
}

/// Coefficient of z^k in the numerator of the diagonal (s,s) Padé of e^z.
fn pade_coeff(s: usize, k: usize) -> f64 {
    // (2s−k)! s! / ((2s)! k! (s−k)!)
    let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
    fact(2 * s - k) * fact(s) / (fact(2 * s) * fact(k) * fact(s - k))
}

/// Unitary DFT matrix `F[j,k] = e^{−2πi jk/N}/√N`.
fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |j, k| {
        let phase = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
        Complex64::from_polar(1.0 / (n as f64).sqrt(), phase)
    })
}

/// One-axis differentiation matrix `F^H Λ F`.
fn deriv_matrix(grid: &Grid, axis: usize, order: u32) -> DMatrix<Complex64> {
    let n = grid.sizes()[axis];
    let f = dft_matrix(n);
    let diag: DVector<Complex64> = match order {
        1 => DVector::from_iterator(n, grid.eig1(axis).iter().copied()),
        2 => DVector::from_iterator(n, grid.eig2(axis).iter().map(|&v| Complex64::new(v, 0.0))),
        _ => unreachable!(),
    };
    f.adjoint() * DMatrix::from_diagonal(&diag) * f
}

fn coord_diag(grid: &Grid, axis: usize) -> DMatrix<Complex64> {
    let diag: DVector<Complex64> = DVector::from_iterator(
        grid.sizes()[axis],
        grid.coords(axis).iter().map(|&x| Complex64::new(x, 0.0)),
    );
    DMatrix::from_diagonal(&diag)
}

/// Embed a one-axis matrix into the full tensor-product space by Kronecker
/// products with identities, slowest axis outermost (x-fastest layout).
fn embed(grid: &Grid, axis: usize, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut full = DMatrix::<Complex64>::identity(1, 1);
    for ax in (0..grid.dim()).rev() {
        let factor = if ax == axis {
            m.clone()
        } else {
            DMatrix::identity(grid.sizes()[ax], grid.sizes()[ax])
        };
        full = full.kronecker(&factor);
    }
    full
}

/// Integrands the quadrature oracle knows closed forms or exact values for.
///
/// The Gaussian entries describe the trap-ground-state profile
/// `ψ₀ = C_d e^{−Σ γ_w² x_w²/2}` with the dimension-dependent normalization
/// `C_d = (Πγ)^{1/4} / (2^{(d−1)/2} π^{d/4})`.
#[derive(Debug, Clone)]
pub enum Integrand {
    /// Constant 1 (integral = domain volume).
    One,
    /// `|ψ₀|²` of the Gaussian profile.
    GaussianDensity { gammas: Vec<f64> },
    /// `|ψ₀|⁴` of the Gaussian profile.
    GaussianQuartic { gammas: Vec<f64> },
    /// `|A e^{ik·x}|²` (constant `|A|²`).
    PlaneWaveDensity { amplitude: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    /// Periodic rectangle-rule value at the requested resolution.
    pub numeric: f64,
    /// Exact value over ℝ^d (Gaussians) or the box (others), when known.
    pub closed_form: Option<f64>,
}

/// Gaussian profile normalization `C_d` for `d = gammas.len()`.
pub fn gaussian_norm_constant(gammas: &[f64]) -> f64 {
    let d = gammas.len() as i32;
    let prod: f64 = gammas.iter().product();
    prod.powf(0.25)
        / (2.0f64.powf((d as f64 - 1.0) / 2.0) * std::f64::consts::PI.powf(d as f64 / 4.0))
}

/// Integrate a catalog integrand over `[lower, upper]^d` with `resolution`
/// points per axis (trapezoid on the periodic grid).
pub fn quadrature(
    integrand: &Integrand,
    lower: &[f64],
    upper: &[f64],
    resolution: usize,
) -> Result<Quadrature> {
    let d = lower.len();
    if d == 0 || d > 3 || upper.len() != d {
        return Err(Error::InvalidArgument("quadrature needs 1-3 matching bounds".into()));
    }
    if resolution < 4 {
        return Err(Error::InvalidArgument(format!(
            "quadrature resolution must be >= 4, got {resolution}"
        )));
    }
    let h: Vec<f64> = (0..d)
        .map(|a| (upper[a] - lower[a]) / resolution as f64)
        .collect();
    let cell: f64 = h.iter().product();
    let volume: f64 = (0..d).map(|a| upper[a] - lower[a]).product();

    let f: Box<dyn Fn(&[f64]) -> f64> = match integrand {
        Integrand::One => Box::new(|_| 1.0),
        Integrand::GaussianDensity { gammas } => {
            check_gammas(gammas, d)?;
            let c2 = gaussian_norm_constant(gammas).powi(2);
            let g = gammas.clone();
            Box::new(move |x| {
                let expo: f64 = g.iter().zip(x).map(|(&ga, &xi)| ga * ga * xi * xi).sum();
                c2 * (-expo).exp()
            })
        }
        Integrand::GaussianQuartic { gammas } => {
            check_gammas(gammas, d)?;
            let c4 = gaussian_norm_constant(gammas).powi(4);
            let g = gammas.clone();
            Box::new(move |x| {
                let expo: f64 = g.iter().zip(x).map(|(&ga, &xi)| ga * ga * xi * xi).sum();
                c4 * (-2.0 * expo).exp()
            })
        }
        Integrand::PlaneWaveDensity { amplitude } => {
            let a2 = amplitude * amplitude;
            Box::new(move |_| a2)
        }
    };

    let mut sum = 0.0;
    let total = resolution.pow(d as u32);
    let mut x = [0.0f64; 3];
    for flat in 0..total {
        let mut rest = flat;
        for a in 0..d {
            let j = rest % resolution;
            rest /= resolution;
            x[a] = lower[a] + j as f64 * h[a];
        }
        sum += f(&x[..d]);
    }
    let numeric = sum * cell;

    let closed_form = match integrand {
        Integrand::One => Some(volume),
        Integrand::GaussianDensity { gammas } => {
            let prod: f64 = gammas.iter().product();
            Some(2.0f64.powi(1 - d as i32) / prod.sqrt())
        }
        Integrand::GaussianQuartic { .. } => Some(
            2.0f64.powf(2.0 - 2.5 * d as f64) * std::f64::consts::PI.powf(-(d as f64) / 2.0),
        ),
        Integrand::PlaneWaveDensity { amplitude } => Some(amplitude * amplitude * volume),
    };

    Ok(Quadrature {
        numeric,
        closed_form,
    })
}

fn check_gammas(gammas: &[f64], d: usize) -> Result<()> {
    if gammas.len() != d {
        return Err(Error::InvalidArgument(format!(
            "integrand needs {d} trap frequencies, got {}",
            gammas.len()
        )));
    }
    Ok(())
}
