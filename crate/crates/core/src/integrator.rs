//! One time step of the Gauss collocation SAV scheme via the fast solver.
//!
//! A step advances `(ψ, q)` through the coupled stage equations
//!
//! ```text
//! Ψ_i = ψⁿ + τ Σ_j a_ij k_j,          Φ_i = |Ψ_i|²Ψ_i / sqrt(‖Ψ_i‖_{4,h}⁴ + C₀),
//! l_i = 2 Re⟨k_i, Φ_i⟩_h,             Q_i = qⁿ + τ Σ_j a_ij l_j,
//! k_i = −i L_h ψⁿ − iτ Σ_j a_ij L_h k_j − iβ Φ_i Q_i,
//! ```
//!
//! solved by fixed-point iteration with only the stiff Laplacian half of
//! `L_h = −½Δ_h + (V − Ω L_z^h)` kept implicit. Moving `−½Δ_h` to the left
//! side and transforming to Fourier space decouples the iteration update
//! into one s×s complex system per mode:
//!
//! ```text
//! (I_s − (iτ/2) λ_j A) k̃_j^{(m+1)} = f̃_j^{(m)},    λ_j = Σ_w Λ2^w,
//! f_i^{(m)} = −i L_h ψⁿ − iτ Σ_j a_ij (V − Ω L_z^h) k_j^{(m)} − iβ Φ_i Q_i,
//! ```
//!
//! which is solved densely with partial pivoting per mode. The iteration
//! stops when `max_i ‖k_i^{(m+1)} − k_i^{(m)}‖_{∞,h}` drops below the
//! tolerance (relative to `max(1, ‖k‖_∞)` so large-amplitude runs do not
//! chase an unreachable absolute target). On convergence the scalar slopes
//! are recomputed from the converged stages and
//!
//! ```text
//! ψⁿ⁺¹ = ψⁿ + τ Σ_i b_i k_i,    qⁿ⁺¹ = qⁿ + τ Σ_i b_i l_i.
//! ```
//!
//! Non-convergence is a hard error: the conservation theorems assume the
//! stage equations are actually solved.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{self, Field};
use crate::operator::{GpOperator, OpScratch};
use crate::par;
use crate::sav::SavState;
use crate::tableau::{ButcherTableau, MAX_STAGES};

/// Strategy for the first fixed-point iterate of each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    /// Explicit evaluation of the stage right-hand side at ψⁿ:
    /// `k_i^{(0)} = −i(L_h ψⁿ + β Φ(ψⁿ) qⁿ)`.
    ExplicitRhs,
    /// Reuse the converged slopes of the previous step.
    PreviousStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stopping tolerance on `max_i ‖k_i^{(m+1)} − k_i^{(m)}‖_{∞,h}`.
    pub tol: f64,
    /// Iteration cap before the step is declared diverged.
    pub max_iter: usize,
    pub initial_guess: InitialGuess,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-14,
            max_iter: 200,
            initial_guess: InitialGuess::ExplicitRhs,
        }
    }
}

/// Convergence record of one step.
#[derive(Debug, Clone, Copy)]
pub struct StepStats {
    /// Fixed-point sweeps performed.
    pub iterations: usize,
    /// Final `max_i ‖k_i^{(m+1)} − k_i^{(m)}‖_{∞,h}`.
    pub residual: f64,
}

/// Reusable stepper: owns all per-step work buffers.
pub struct Stepper<'a> {
    op: &'a GpOperator,
    tableau: ButcherTableau,
    opts: SolverOptions,
    lambda: Vec<f64>,
    k: Vec<Vec<Complex64>>,
    k_next: Vec<Vec<Complex64>>,
    stage_psi: Vec<Vec<Complex64>>,
    phi: Vec<Vec<Complex64>>,
    nonstiff: Vec<Vec<Complex64>>,
    rhs: Vec<Vec<Complex64>>,
    packed: Vec<Complex64>,
    lpsi: Vec<Complex64>,
    slopes_q: Vec<f64>,
    stage_q: Vec<f64>,
    op_scratch: OpScratch,
    fft_scratch: Vec<Complex64>,
    have_prev: bool,
}

impl<'a> Stepper<'a> {
    pub fn new(
        op: &'a GpOperator,
        tableau: ButcherTableau,
        opts: SolverOptions,
    ) -> Result<Stepper<'a>> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "solver tolerance must be positive, got {}",
                opts.tol
            )));
        }
        if opts.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        let n = op.grid().len();
        let s = tableau.stages();
        let grid = op.grid().clone();
        let mut lambda = vec![0.0f64; n];
        par::fill_indexed(&mut lambda, |i| grid.laplacian_eig(i));
        let buf = || vec![Complex64::default(); n];
        Ok(Stepper {
            op,
            tableau,
            opts,
            lambda,
            k: (0..s).map(|_| buf()).collect(),
            k_next: (0..s).map(|_| buf()).collect(),
            stage_psi: (0..s).map(|_| buf()).collect(),
            phi: (0..s).map(|_| buf()).collect(),
            nonstiff: (0..s).map(|_| buf()).collect(),
            rhs: (0..s).map(|_| buf()).collect(),
            packed: vec![Complex64::default(); s * n],
            lpsi: buf(),
            slopes_q: vec![0.0; s],
            stage_q: vec![0.0; s],
            op_scratch: OpScratch::new(),
            fft_scratch: Vec::new(),
            have_prev: false,
        })
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// Advance one step of size `tau`.
    pub fn step(&mut self, state: &SavState, tau: f64) -> Result<(SavState, StepStats)> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive and finite, got {tau}"
            )));
        }
        if !state.psi.grid().same_layout(self.op.grid()) {
            return Err(Error::GridMismatch);
        }
        let s = self.tableau.stages();
        let n = state.psi.len();
        let psi_n = state.psi.data();
        let q_n = state.q;
        let beta = self.op.beta();
        let c0 = self.op.c0();
        let cell = self.op.grid().cell_volume();

        // L_h ψⁿ is reused by every iteration.
        self.op
            .linear_into(psi_n, &mut self.lpsi, &mut self.op_scratch);

        // Initial slopes.
        if self.opts.initial_guess == InitialGuess::ExplicitRhs || !self.have_prev {
            let denom = (field::quartic_norm_slice(psi_n, cell) + c0).sqrt();
            let lpsi = &self.lpsi;
            let scale = beta * q_n / denom;
            par::fill_indexed(&mut self.k[0], |m| {
                let z = psi_n[m];
                let cubic = z.norm_sqr() * z;
                -Complex64::i() * (lpsi[m] + scale * cubic)
            });
            let (first, rest) = self.k.split_first_mut().unwrap();
            for ki in rest {
                ki.copy_from_slice(first);
            }
        }

        let mut stats = StepStats {
            iterations: 0,
            residual: f64::INFINITY,
        };
        let mut converged = false;
        while stats.iterations < self.opts.max_iter {
            stats.iterations += 1;

            self.stage_values(psi_n, q_n, tau, beta, c0, cell);

            // Non-stiff operator on each slope, then the iteration rhs.
            for j in 0..s {
                self.op
                    .nonstiff_into(&self.k[j], &mut self.nonstiff[j], &mut self.op_scratch);
            }
            let lpsi = &self.lpsi;
            let a = self.tableau.a_flat();
            for i in 0..s {
                let phi_i = &self.phi[i];
                let q_i = self.stage_q[i];
                let nonstiff = &self.nonstiff;
                par::fill_indexed(&mut self.rhs[i], |m| {
                    let mut acc = lpsi[m];
                    for j in 0..s {
                        acc += tau * a[i * s + j] * nonstiff[j][m];
                    }
                    acc += beta * q_i * phi_i[m];
                    -Complex64::i() * acc
                });
            }

            // Spectral space, one s×s solve per mode, back.
            for i in 0..s {
                fft::forward_all(
                    &mut self.rhs[i],
                    self.op.grid().sizes(),
                    &mut self.fft_scratch,
                );
            }
            {
                let rhs = &self.rhs;
                par::fill_indexed(&mut self.packed, |idx| rhs[idx % s][idx / s]);
            }
            solve_per_mode(&mut self.packed, &self.lambda, self.tableau.a_flat(), s, tau);
            for i in 0..s {
                let packed = &self.packed;
                par::fill_indexed(&mut self.k_next[i], |m| packed[m * s + i]);
                fft::inverse_all(
                    &mut self.k_next[i],
                    self.op.grid().sizes(),
                    &mut self.fft_scratch,
                );
            }

            let mut residual = 0.0f64;
            let mut k_max = 0.0f64;
            for i in 0..s {
                let (old, new) = (&self.k[i], &self.k_next[i]);
                residual = residual.max(par::max_f64(n, |m| (new[m] - old[m]).norm()));
                k_max = k_max.max(par::max_f64(n, |m| new[m].norm()));
            }
            if !residual.is_finite() || !k_max.is_finite() {
                return Err(Error::NumericalBlowup);
            }
            std::mem::swap(&mut self.k, &mut self.k_next);
            stats.residual = residual;
            if residual < self.opts.tol * k_max.max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::StepDiverged {
                iterations: stats.iterations,
                residual: stats.residual,
            });
        }

        // Scalar slopes from the converged stages, then the b-weighted update.
        self.stage_values(psi_n, q_n, tau, beta, c0, cell);
        let b = self.tableau.b();
        let k = &self.k;
        let mut psi_next = vec![Complex64::default(); n];
        par::fill_indexed(&mut psi_next, |m| {
            let mut acc = psi_n[m];
            for i in 0..s {
                acc += tau * b[i] * k[i][m];
            }
            acc
        });
        let q_next = q_n + tau * (0..s).map(|i| b[i] * self.slopes_q[i]).sum::<f64>();
        if !q_next.is_finite() || psi_next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NumericalBlowup);
        }
        self.have_prev = true;

        let psi = Field::from_data(state.psi.grid(), psi_next)?;
        Ok((SavState { psi, q: q_next }, stats))
    }

    /// Stage values Ψ_i, cubic terms Φ_i, scalar slopes l_i and stages Q_i
    /// from the current slopes.
    fn stage_values(&mut self, psi_n: &[Complex64], q_n: f64, tau: f64, beta: f64, c0: f64, cell: f64) {
        let _ = beta;
        let s = self.tableau.stages();
        let n = psi_n.len();
        let a = self.tableau.a_flat();
        for i in 0..s {
            {
                let k = &self.k;
                par::fill_indexed(&mut self.stage_psi[i], |m| {
                    let mut acc = psi_n[m];
                    for j in 0..s {
                        acc += tau * a[i * s + j] * k[j][m];
                    }
                    acc
                });
            }
            let psi_i = &self.stage_psi[i];
            let denom = (field::quartic_norm_slice(psi_i, cell) + c0).sqrt();
            let inv = 1.0 / denom;
            par::fill_indexed(&mut self.phi[i], |m| {
                let z = psi_i[m];
                inv * z.norm_sqr() * z
            });
            let (k_i, phi_i) = (&self.k[i], &self.phi[i]);
            self.slopes_q[i] =
                2.0 * cell * par::sum_f64(n, |m| (k_i[m] * phi_i[m].conj()).re);
        }
        for i in 0..s {
            let mut acc = q_n;
            for j in 0..s {
                acc += tau * a[i * s + j] * self.slopes_q[j];
            }
            self.stage_q[i] = acc;
        }
    }
}

/// Solve `(I_s − (iτ/2) λ_m A) x = rhs` for every mode; `packed` holds the
/// stage values of one mode contiguously.
fn solve_per_mode(packed: &mut [Complex64], lambda: &[f64], a: &[f64], s: usize, tau: f64) {
    debug_assert!(s <= MAX_STAGES);
    par::for_each_chunk_mut(packed, s, |m, stages| {
        let w = Complex64::new(0.0, 0.5 * tau * lambda[m]);
        let mut mat = [Complex64::default(); MAX_STAGES * MAX_STAGES];
        for i in 0..s {
            for j in 0..s {
                mat[i * s + j] = -w * a[i * s + j];
            }
            mat[i * s + i] += 1.0;
        }
        solve_small(&mut mat[..s * s], stages, s);
    });
}

/// In-place dense solve with partial pivoting; `rhs` receives the solution.
fn solve_small(mat: &mut [Complex64], rhs: &mut [Complex64], s: usize) {
    for col in 0..s {
        let mut piv = col;
        let mut best = mat[col * s + col].norm_sqr();
        for r in (col + 1)..s {
            let v = mat[r * s + col].norm_sqr();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if piv != col {
            for c in col..s {
                mat.swap(col * s + c, piv * s + c);
            }
            rhs.swap(col, piv);
        }
        let inv = Complex64::new(1.0, 0.0) / mat[col * s + col];
        for r in (col + 1)..s {
            let factor = mat[r * s + col] * inv;
            if factor != Complex64::default() {
                for c in (col + 1)..s {
                    let upper = mat[col * s + c];
                    mat[r * s + c] -= factor * upper;
                }
                let top = rhs[col];
                rhs[r] -= factor * top;
            }
        }
    }
    for col in (0..s).rev() {
        let mut acc = rhs[col];
        for c in (col + 1)..s {
            acc -= mat[col * s + c] * rhs[c];
        }
        rhs[col] = acc / mat[col * s + col];
    }
}

/// Single-shot convenience wrapper around [`Stepper`].
pub fn step(
    op: &GpOperator,
    tableau: &ButcherTableau,
    opts: &SolverOptions,
    state: &SavState,
    tau: f64,
) -> Result<(SavState, StepStats)> {
    Stepper::new(op, tableau.clone(), opts.clone())?.step(state, tau)
}

/// Apply `n_steps` steps, invoking `observer(step, t, state, stats)` after
/// each. Step errors are tagged with their 1-based step index.
pub fn evolve<F>(
    op: &GpOperator,
    tableau: &ButcherTableau,
    opts: &SolverOptions,
    state0: SavState,
    tau: f64,
    n_steps: u64,
    mut observer: F,
) -> Result<SavState>
where
    F: FnMut(u64, f64, &SavState, &StepStats),
{
    let mut stepper = Stepper::new(op, tableau.clone(), opts.clone())?;
    let mut state = state0;
    for i in 1..=n_steps {
        let (next, stats) = stepper.step(&state, tau).map_err(|e| e.at_step(i))?;
        state = next;
        observer(i, i as f64 * tau, &state, &stats);
    }
    Ok(state)
}
