//! Gauss collocation Butcher tableaux.
//!
//! Nodes are the roots of the shifted Legendre polynomial on (0,1), weights
//! the Gauss-Legendre quadrature weights, and `a_ij = ∫_0^{c_i} ℓ_j(t) dt`
//! with `ℓ_j` the Lagrange basis on the nodes, integrated exactly as
//! polynomials. The resulting s-stage method has order 2s and satisfies the
//! symplecticity identity `b_i a_ij + b_j a_ji − b_i b_j = 0`, which is what
//! makes it preserve quadratic invariants.

use crate::error::{Error, Result};

/// Maximum supported stage count. Order 10 is as far as runtime tableau
/// generation plus the fixed-point stage solver have been validated in
/// double precision.
pub const MAX_STAGES: usize = 5;

#[derive(Debug, Clone)]
pub struct ButcherTableau {
    s: usize,
    a: Vec<f64>, // row-major s×s
    b: Vec<f64>,
    c: Vec<f64>,
}

/// Residuals of the algebraic conditions a Gauss tableau must satisfy.
#[derive(Debug, Clone, Copy)]
pub struct OrderReport {
    /// max_k |Σ b_i c_i^{k−1} − 1/k| over k = 1..2s (condition B(2s)).
    pub quadrature_residual: f64,
    /// max over i,k of |Σ_j a_ij c_j^{k−1} − c_i^k/k|, k = 1..s (C(s)).
    pub collocation_residual: f64,
    /// max_{ij} |b_i a_ij + b_j a_ji − b_i b_j|.
    pub symplecticity_residual: f64,
    /// max_i |Σ_j a_ij − c_i|.
    pub row_sum_residual: f64,
    /// |Σ b_i − 1|.
    pub weight_sum_residual: f64,
}

impl OrderReport {
    /// Largest of the B(2s) and C(s) residuals.
    pub fn max_residual(&self) -> f64 {
        self.quadrature_residual.max(self.collocation_residual)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol
            && self.symplecticity_residual <= tol
            && self.row_sum_residual <= tol
            && self.weight_sum_residual <= tol
    }
}

impl ButcherTableau {
    /// The s-stage Gauss collocation tableau, 1 <= s <= [`MAX_STAGES`].
    pub fn gauss(s: usize) -> Result<ButcherTableau> {
        if s < 1 || s > MAX_STAGES {
            return Err(Error::InvalidArgument(format!(
                "stage count must be 1..={MAX_STAGES}, got {s}"
            )));
        }
        let (c, b) = gauss_nodes_weights(s);
        let mut a = vec![0.0; s * s];
        for j in 0..s {
            let lj = lagrange_coeffs(&c, j);
            for i in 0..s {
                a[i * s + j] = integrate_poly(&lj, c[i]);
            }
        }
        Ok(ButcherTableau { s, a, b, c })
    }

    /// Build from explicit coefficients (used for negative-control tests).
    pub fn from_coeffs(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<ButcherTableau> {
        let s = c.len();
        if s == 0 || b.len() != s || a.len() != s * s {
            return Err(Error::InvalidArgument(
                "tableau coefficient shapes do not agree".into(),
            ));
        }
        Ok(ButcherTableau { s, a, b, c })
    }

    pub fn stages(&self) -> usize {
        self.s
    }

    /// Classical order of the Gauss method (2s).
    pub fn order(&self) -> usize {
        2 * self.s
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.s + j]
    }

    pub fn a_flat(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Evaluate the B(2s), C(s), symplecticity and consistency residuals.
    pub fn verify_order_conditions(&self) -> OrderReport {
        let s = self.s;
        let mut quad = 0.0f64;
        for k in 1..=(2 * s) {
            let sum: f64 = (0..s)
                .map(|i| self.b[i] * self.c[i].powi(k as i32 - 1))
                .sum();
            quad = quad.max((sum - 1.0 / k as f64).abs());
        }
        let mut coll = 0.0f64;
        for i in 0..s {
            for k in 1..=s {
                let sum: f64 = (0..s)
                    .map(|j| self.a(i, j) * self.c[j].powi(k as i32 - 1))
                    .sum();
                coll = coll.max((sum - self.c[i].powi(k as i32) / k as f64).abs());
            }
        }
        let mut symp = 0.0f64;
        for i in 0..s {
            for j in 0..s {
                symp = symp
                    .max((self.b[i] * self.a(i, j) + self.b[j] * self.a(j, i)
                        - self.b[i] * self.b[j])
                        .abs());
            }
        }
        let mut row = 0.0f64;
        for i in 0..s {
            let sum: f64 = (0..s).map(|j| self.a(i, j)).sum();
            row = row.max((sum - self.c[i]).abs());
        }
        let weight = ((0..s).map(|i| self.b[i]).sum::<f64>() - 1.0).abs();
        OrderReport {
            quadrature_residual: quad,
            collocation_residual: coll,
            symplecticity_residual: symp,
            row_sum_residual: row,
            weight_sum_residual: weight,
        }
    }
}

/// Legendre polynomial P_s and derivative at `x` via the three-term recurrence.
fn legendre(s: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if s == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=s {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = s as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre nodes (ascending, mapped to (0,1)) and weights.
fn gauss_nodes_weights(s: usize) -> (Vec<f64>, Vec<f64>) {
    let mut c = vec![0.0; s];
    let mut b = vec![0.0; s];
    for i in 0..s {
        // Chebyshev initial guess, polished by Newton to ~1e-15.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (s as f64 + 0.5)).cos();
        if s % 2 == 1 && i == s / 2 {
            x = 0.0;
        }
        if x != 0.0 {
            for _ in 0..60 {
                let (p, dp) = legendre(s, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
        }
        let (_, dp) = legendre(s, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        c[i] = 0.5 * (x + 1.0);
        b[i] = 0.5 * w;
    }
    // already ascending from the cosine guesses, but make it explicit
    let mut idx: Vec<usize> = (0..s).collect();
    idx.sort_by(|&i, &j| c[i].partial_cmp(&c[j]).unwrap());
    let c_sorted: Vec<f64> = idx.iter().map(|&i| c[i]).collect();
    let b_sorted: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
    (c_sorted, b_sorted)
}

/// Coefficients of the Lagrange basis polynomial ℓ_j on the given nodes.
fn lagrange_coeffs(nodes: &[f64], j: usize) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    let mut denom = 1.0;
    for (m, &cm) in nodes.iter().enumerate() {
        if m == j {
            continue;
        }
        // multiply by (t − c_m)
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, &p) in coeffs.iter().enumerate() {
            next[k] -= p * cm;
            next[k + 1] += p;
        }
        coeffs = next;
        denom *= nodes[j] - cm;
    }
    for p in coeffs.iter_mut() {
        *p /= denom;
    }
    coeffs
}

/// ∫_0^x of a polynomial given by its coefficients (ascending powers).
fn integrate_poly(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    let mut xp = x;
    for (k, &p) in coeffs.iter().enumerate() {
        acc += p * xp / (k as f64 + 1.0);
        xp *= x;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_is_one_stage_gauss() {
        let t = ButcherTableau::gauss(1).unwrap();
        assert!((t.c()[0] - 0.5).abs() < 1e-15);
        assert!((t.b()[0] - 1.0).abs() < 1e-15);
        assert!((t.a(0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(t.order(), 2);
    }

    #[test]
    fn two_stage_closed_form() {
        let t = ButcherTableau::gauss(2).unwrap();
        let r3 = 3.0f64.sqrt();
        let c = [0.5 - r3 / 6.0, 0.5 + r3 / 6.0];
        let a = [[0.25, 0.25 - r3 / 6.0], [0.25 + r3 / 6.0, 0.25]];
        for i in 0..2 {
            assert!((t.c()[i] - c[i]).abs() <= 1e-15);
            assert!((t.b()[i] - 0.5).abs() <= 1e-15);
            for j in 0..2 {
                assert!((t.a(i, j) - a[i][j]).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn three_stage_closed_form() {
        let t = ButcherTableau::gauss(3).unwrap();
        let r15 = 15.0f64.sqrt();
        let c = [0.5 - r15 / 10.0, 0.5, 0.5 + r15 / 10.0];
        let b = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
        let a = [
            [5.0 / 36.0, 2.0 / 9.0 - r15 / 15.0, 5.0 / 36.0 - r15 / 30.0],
            [5.0 / 36.0 + r15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r15 / 24.0],
            [5.0 / 36.0 + r15 / 30.0, 2.0 / 9.0 + r15 / 15.0, 5.0 / 36.0],
        ];
        for i in 0..3 {
            assert!((t.c()[i] - c[i]).abs() <= 1e-15, "c[{i}]");
            assert!((t.b()[i] - b[i]).abs() <= 1e-15, "b[{i}]");
            for j in 0..3 {
                assert!((t.a(i, j) - a[i][j]).abs() <= 1e-15, "a[{i}][{j}]");
            }
        }
    }

    #[test]
    fn order_conditions_all_stage_counts() {
        for s in 1..=MAX_STAGES {
            let t = ButcherTableau::gauss(s).unwrap();
            let r = t.verify_order_conditions();
            assert!(r.max_residual() <= 1e-13, "s={s}: {r:?}");
            assert!(r.symplecticity_residual <= 1e-13, "s={s}: {r:?}");
            assert!(r.row_sum_residual <= 1e-14, "s={s}: {r:?}");
            assert!(r.weight_sum_residual <= 1e-14, "s={s}: {r:?}");
            assert!(t.c().windows(2).all(|w| w[0] < w[1]));
            assert!(t.c().iter().all(|&ci| ci > 0.0 && ci < 1.0));
        }
    }

    #[test]
    fn tampered_weights_fail() {
        let good = ButcherTableau::gauss(2).unwrap();
        let bad = ButcherTableau::from_coeffs(
            good.a_flat().to_vec(),
            vec![0.6, 0.4],
            good.c().to_vec(),
        )
        .unwrap();
        let r = bad.verify_order_conditions();
        assert!(r.max_residual() > 1e-2);
        assert!(!r.passes(1e-13));
    }

    #[test]
    fn stage_count_bounds() {
        assert!(ButcherTableau::gauss(0).is_err());
        assert!(ButcherTableau::gauss(MAX_STAGES + 1).is_err());
    }
}
