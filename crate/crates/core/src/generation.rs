//! State preparation: the Kerr-medium scheme and the dispersive atom-field
//! scheme with a π/2 mixing pulse and a conditional atomic measurement.
//!
//! Both evolutions are diagonal in the number basis, so they act as phase
//! maps on the amplitudes. Phases whose angle is a multiple of π/2 are
//! applied with integer arithmetic, which keeps the revival and
//! `η_C → -η_C` points exact.

use serde::{Deserialize, Serialize};

use num_complex::Complex64 as C64;

use crate::error::{NbsError, Result};
use crate::fock::{inner, FockVector, TruncationPolicy};
use crate::special::{phase_powers, quarter_turns, unit};
use crate::states::{nbs, NbsParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    pub g1: f64,
    pub t: f64,
}

impl KerrParams {
    pub fn new(g1: f64, t: f64) -> Result<Self> {
        let p = KerrParams { g1, t };
        p.validate()?;
        Ok(p)
    }

    /// The time `π / (2 g1)` at which a coherent-like input splits into a
    /// two-component superposition.
    pub fn quarter_period(g1: f64) -> Result<Self> {
        KerrParams::new(g1, std::f64::consts::FRAC_PI_2 / g1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g1 > 0.0 && self.g1.is_finite()) {
            return Err(NbsError::InvalidParameter { name: "g1", value: self.g1, reason: "must be positive and finite" });
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(NbsError::InvalidParameter { name: "t", value: self.t, reason: "must be non-negative and finite" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveParams {
    pub g2: f64,
    pub t: f64,
    /// Relative phase of the initial atomic superposition.
    pub phi: f64,
}

impl DispersiveParams {
    pub fn new(g2: f64, t: f64, phi: f64) -> Result<Self> {
        let p = DispersiveParams { g2, t, phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g2 > 0.0 && self.g2.is_finite()) {
            return Err(NbsError::InvalidParameter { name: "g2", value: self.g2, reason: "must be positive and finite" });
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(NbsError::InvalidParameter { name: "t", value: self.t, reason: "must be non-negative and finite" });
        }
        if !self.phi.is_finite() {
            return Err(NbsError::InvalidParameter { name: "phi", value: self.phi, reason: "must be finite" });
        }
        Ok(())
    }
}

/// Joint atom-field state `|g⟩ ⊗ g_branch + |e⟩ ⊗ e_branch`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFieldState {
    pub g_branch: FockVector,
    pub e_branch: FockVector,
}

impl AtomFieldState {
    pub fn norm_sqr(&self) -> f64 {
        self.g_branch.norm_sqr() + self.e_branch.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveOutcome {
    /// State just before the atom enters the cavity.
    pub initial: AtomFieldState,
    /// State after the dispersive interaction, before mixing.
    pub after_interaction: AtomFieldState,
    /// State after the mixing pulse.
    pub after_pulse: AtomFieldState,
    /// Renormalized field after detecting `|g⟩`.
    pub projected_g: FockVector,
    /// Renormalized field after detecting `|e⟩`; `None` if that branch vanishes.
    pub projected_e: Option<FockVector>,
    pub success_prob_g: f64,
    pub success_prob_e: f64,
}

/// `c_n ↦ exp(-i g1 t n²) c_n`.
pub fn kerr_evolve(v: &FockVector, p: &KerrParams) -> FockVector {
    let angle = p.g1 * p.t;
    let amps = v.amplitudes();
    match quarter_turns(angle) {
        Some(q) => FockVector::from_fn(v.n_max(), |n| {
            // n² mod 4 is 0 for even n and 1 for odd n
            let n2 = (n % 2) as i64;
            amps[n] * unit(-((q * n2).rem_euclid(4) as f64) * std::f64::consts::FRAC_PI_2)
        }),
        None => FockVector::from_fn(v.n_max(), |n| {
            let n2 = (n as f64) * (n as f64);
            amps[n] * C64::from_polar(1.0, -(angle * n2).rem_euclid(std::f64::consts::TAU))
        }),
    }
}

/// Evolve the NBS `|η_C, M⟩` for `t = π / (2 g1)`. The result equals the
/// `φ = π/2` superposition up to the global phase `e^{-iπ/4}`.
pub fn kerr_generate(params: &NbsParams, g1: f64, policy: &TruncationPolicy) -> Result<FockVector> {
    let v = nbs(params, policy)?;
    Ok(kerr_evolve(&v, &KerrParams::quarter_period(g1)?))
}

/// Dispersive preparation: the atom enters as `(|g⟩ + e^{iφ}|e⟩)/√2` with
/// the field in `|η_C, M⟩`. The interaction leaves the `|g⟩` branch alone
/// and rotates the `|e⟩` branch to `|η_C e^{-i g2 t}, M⟩`; a mixing pulse
/// `|g⟩ → (|g⟩ - |e⟩)/√2`, `|e⟩ → (|g⟩ + |e⟩)/√2` follows, then the atom is
/// measured. At `g2 t = π` detecting `|g⟩` leaves the field in
/// `N [|η_C, M⟩ + e^{iφ} |-η_C, M⟩]`.
///
/// `params.phi` is ignored; the superposition phase comes from `d.phi`.
pub fn dispersive_protocol(params: &NbsParams, d: &DispersiveParams, policy: &TruncationPolicy) -> Result<DispersiveOutcome> {
    d.validate()?;
    let field = nbs(params, policy)?;
    let n_max = field.n_max();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rel = unit(d.phi);

    let initial = AtomFieldState { g_branch: field.scaled(C64::new(s, 0.0)), e_branch: field.scaled(rel * s) };

    let phases = phase_powers(-d.g2 * d.t, n_max);
    let rotated = FockVector::from_fn(n_max, |n| initial.e_branch.get(n) * phases[n]);
    let after_interaction = AtomFieldState { g_branch: initial.g_branch.clone(), e_branch: rotated };

    let one = C64::new(s, 0.0);
    let g_branch = after_interaction.g_branch.combine(one, &after_interaction.e_branch, one)?;
    let e_branch = after_interaction.e_branch.combine(one, &after_interaction.g_branch, -one)?;
    let after_pulse = AtomFieldState { g_branch, e_branch };

    let total = after_pulse.norm_sqr();
    let success_prob_g = after_pulse.g_branch.norm_sqr() / total;
    let success_prob_e = after_pulse.e_branch.norm_sqr() / total;
    if success_prob_g <= f64::EPSILON {
        return Err(NbsError::ZeroNormBranch { branch: "g" });
    }
    let projected_g = after_pulse.g_branch.normalized()?;
    let projected_e = if success_prob_e <= f64::EPSILON { None } else { Some(after_pulse.e_branch.normalized()?) };

    Ok(DispersiveOutcome {
        initial,
        after_interaction,
        after_pulse,
        projected_g,
        projected_e,
        success_prob_g,
        success_prob_e,
    })
}

/// `|⟨u|v⟩|`, insensitive to global phase.
pub fn fidelity(u: &FockVector, v: &FockVector) -> Result<f64> {
    Ok(inner(u, v)?.norm())
}
