//! Invariant drift tracking, field error norms and convergence rates.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::operator::GpOperator;
use crate::par;
use crate::sav::{self, SavState};

/// Per-step history of the tracked invariants, as absolute drifts from the
/// initial values: `e(Mⁿ) = |M_hⁿ − M_h⁰|`, `e(Hⁿ) = |H_hⁿ − H_h⁰|`,
/// `e(Eⁿ) = |E_hⁿ − E_h⁰|`.
#[derive(Debug, Clone)]
pub struct DriftSeries {
    pub times: Vec<f64>,
    pub mass_err: Vec<f64>,
    pub ham_err: Vec<f64>,
    pub quad_err: Vec<f64>,
    pub q_series: Vec<f64>,
    mass0: f64,
    ham0: f64,
    quad0: f64,
}

impl DriftSeries {
    /// Capture the baselines from the initial state and record its t = 0 row.
    pub fn new(op: &GpOperator, initial: &SavState) -> DriftSeries {
        let mass0 = initial.mass();
        let ham0 = sav::hamiltonian_energy(op, initial);
        let quad0 = sav::modified_energy(op, initial);
        let mut s = DriftSeries {
            times: Vec::new(),
            mass_err: Vec::new(),
            ham_err: Vec::new(),
            quad_err: Vec::new(),
            q_series: Vec::new(),
            mass0,
            ham0,
            quad0,
        };
        s.push_row(0.0, mass0, ham0, quad0, initial.q);
        s
    }

    pub fn record(&mut self, op: &GpOperator, t: f64, state: &SavState) {
        let mass = state.mass();
        let ham = sav::hamiltonian_energy(op, state);
        let quad = sav::modified_energy(op, state);
        self.push_row(t, mass, ham, quad, state.q);
    }

    /// Record a row whose functional values were already computed.
    pub fn record_computed(&mut self, t: f64, mass: f64, ham: f64, quad: f64, q: f64) {
        self.push_row(t, mass, ham, quad, q);
    }

    fn push_row(&mut self, t: f64, mass: f64, ham: f64, quad: f64, q: f64) {
        self.times.push(t);
        self.mass_err.push((mass - self.mass0).abs());
        self.ham_err.push((ham - self.ham0).abs());
        self.quad_err.push((quad - self.quad0).abs());
        self.q_series.push(q);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_mass(&self) -> f64 {
        self.mass0
    }

    pub fn initial_hamiltonian(&self) -> f64 {
        self.ham0
    }

    pub fn initial_modified_energy(&self) -> f64 {
        self.quad0
    }

    pub fn max_mass_err(&self) -> f64 {
        self.mass_err.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_ham_err(&self) -> f64 {
        self.ham_err.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_quad_err(&self) -> f64 {
        self.quad_err.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    /// `‖u − v‖_{∞,h}`
    Inf,
    /// `‖u − v‖_h`
    L2,
}

/// Distance between two fields on the same grid.
pub fn field_error(u: &Field, v: &Field, norm: ErrorNorm) -> Result<f64> {
    if !u.grid().same_layout(v.grid()) {
        return Err(Error::GridMismatch);
    }
    let (a, b) = (u.data(), v.data());
    match norm {
        ErrorNorm::Inf => Ok(par::max_f64(a.len(), |i| (a[i] - b[i]).norm())),
        ErrorNorm::L2 => {
            let s = par::sum_f64(a.len(), |i| (a[i] - b[i]).norm_sqr());
            Ok((s * u.grid().cell_volume()).sqrt())
        }
    }
}

/// Pairwise observed rates `ln(e_i/e_{i+1}) / ln(δ_i/δ_{i+1})` down a
/// step-size ladder.
pub fn convergence_rate(errors: &[f64], steps: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != steps.len() || errors.len() < 2 {
        return Err(Error::InvalidArgument(
            "need matching error/step ladders of length >= 2".into(),
        ));
    }
    for (&e, &s) in errors.iter().zip(steps) {
        if !(e > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rate undefined for non-positive error {e} (error floor reached?)"
            )));
        }
        if !(s > 0.0) {
            return Err(Error::InvalidArgument(format!("non-positive step size {s}")));
        }
    }
    Ok(errors
        .windows(2)
        .zip(steps.windows(2))
        .map(|(e, s)| (e[0] / e[1]).ln() / (s[0] / s[1]).ln())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;
    use std::sync::Arc;

    #[test]
    fn field_error_basics() {
        let g = Arc::new(Grid::new(&[8], &[0.0], &[1.0]).unwrap());
        let u = Field::from_fn(&g, |x| Complex64::new(x[0], -x[0]));
        assert_eq!(field_error(&u, &u, ErrorNorm::Inf).unwrap(), 0.0);
        assert_eq!(field_error(&u, &u, ErrorNorm::L2).unwrap(), 0.0);

        let mut v = u.clone();
        let c = Complex64::new(0.3, -0.4);
        for z in v.data_mut() {
            *z += c;
        }
        let inf = field_error(&u, &v, ErrorNorm::Inf).unwrap();
        assert!((inf - 0.5).abs() <= 1e-15);
        let l2 = field_error(&u, &v, ErrorNorm::L2).unwrap();
        assert!((l2 - 0.5).abs() <= 1e-15);

        let g2 = Arc::new(Grid::new(&[8], &[0.0], &[2.0]).unwrap());
        let w = Field::zeros(&g2);
        assert!(field_error(&u, &w, ErrorNorm::Inf).is_err());
    }

    #[test]
    fn exact_fourth_order_ratio() {
        let rates = convergence_rate(&[16.0, 1.0], &[2.0, 1.0]).unwrap();
        assert!((rates[0] - 4.0).abs() <= 1e-14);
    }

    #[test]
    fn published_ladder_rates() {
        // 4th-order ladder, β=20: 6.0575e−7 → 1.9225e−7 from τ 0.02 → 0.015
        let r = convergence_rate(&[6.0575e-7, 1.9225e-7], &[0.02, 0.015]).unwrap();
        assert!((r[0] - 3.99).abs() < 5e-3, "rate {r:?}");
        // 6th-order ladder: 5.8626e−10 → 1.0460e−10
        let r = convergence_rate(&[5.8626e-10, 1.0460e-10], &[0.02, 0.015]).unwrap();
        assert!((r[0] - 5.99).abs() < 5e-3, "rate {r:?}");
    }

    #[test]
    fn rate_invariant_under_common_scaling() {
        let e = [3.0e-4, 1.1e-5, 4.2e-7];
        let s = [0.1, 0.05, 0.025];
        let base = convergence_rate(&e, &s).unwrap();
        let e2: Vec<f64> = e.iter().map(|x| x * 7.5).collect();
        let s2: Vec<f64> = s.iter().map(|x| x * 0.3).collect();
        let scaled = convergence_rate(&e2, &s2).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_error_is_rejected() {
        assert!(convergence_rate(&[1.0, 0.0], &[2.0, 1.0]).is_err());
        assert!(convergence_rate(&[1.0], &[2.0]).is_err());
        assert!(convergence_rate(&[1.0, 0.5], &[2.0]).is_err());
    }
}
