//! The SAV state `(ψ, q)` and its tracked functionals.
//!
//! `q` starts at `sqrt(‖ψ₀‖_{4,h}⁴ + C₀)` and is then evolved as an
//! independent unknown; it is never re-derived from ψ mid-run, since exact
//! conservation of the modified energy depends on the evolved value.
//!
//! Three functionals are tracked:
//! * mass `M_h = ⟨ψ,ψ⟩_h` — conserved exactly by the scheme;
//! * modified energy `E_h = ⟨L_h ψ,ψ⟩_h + (β/2) q² − (β/2) C₀` — conserved
//!   exactly by the scheme;
//! * Hamiltonian energy `H_h = ⟨L_h ψ,ψ⟩_h + (β/2)‖ψ‖_{4,h}⁴` — diagnostic
//!   only; it drifts at the order of the method.
//!
//! For a consistent state (q fresh from initialization) `E_h == H_h` up to
//! round-off.

use crate::field::Field;
use crate::operator::GpOperator;

#[derive(Debug, Clone)]
pub struct SavState {
    pub psi: Field,
    pub q: f64,
}

impl SavState {
    /// Initialize with the consistent SAV value `q = sqrt(‖ψ₀‖_{4,h}⁴ + C₀)`.
    pub fn init(op: &GpOperator, psi0: Field) -> SavState {
        let q = (psi0.quartic_norm() + op.c0()).sqrt();
        SavState { psi: psi0, q }
    }

    /// Discrete mass `M_h = Re⟨ψ,ψ⟩_h`.
    pub fn mass(&self) -> f64 {
        self.psi.norm_h().powi(2)
    }
}

/// Modified (quadratic) energy `E_h = ⟨L_h ψ,ψ⟩_h + (β/2)(q² − C₀)`.
pub fn modified_energy(op: &GpOperator, state: &SavState) -> f64 {
    let quad = op
        .quadratic_form(&state.psi)
        .expect("state field lives on the operator grid");
    quad + 0.5 * op.beta() * (state.q * state.q - op.c0())
}

/// Hamiltonian energy `H_h = ⟨L_h ψ,ψ⟩_h + (β/2)‖ψ‖_{4,h}⁴`.
pub fn hamiltonian_energy(op: &GpOperator, state: &SavState) -> f64 {
    let quad = op
        .quadratic_form(&state.psi)
        .expect("state field lives on the operator grid");
    quad + 0.5 * op.beta() * state.psi.quartic_norm()
}
