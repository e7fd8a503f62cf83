//! Constructors for every state family as a [`FockVector`]: negative binomial
//! states (NBS), their two-component superpositions, the even and odd NBS,
//! and the coherent / even / odd coherent / cat states they reduce to.
//!
//! Amplitudes are built in log space, `ln binom(M + n - 1, n)` included, so
//! `M` in the tens of thousands and `n` in the thousands do not overflow.
//! Each constructor comes in two flavours: one that picks `n_max` from a
//! [`TruncationPolicy`] and an `_in` variant with an explicit `n_max`.

use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{NbsError, Result};
use crate::fock::{FockVector, TruncationPolicy};
use crate::special::{
    branch_sum, ln_fact, ln_nb_binomial, one_plus_cos_exp, phase_powers, unit, CosPhase,
};

/// The four scalars `(M, η, θ, φ)` that label every state here, with
/// `η_C = η e^{iθ}` and `φ` the relative phase of the superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbsParams {
    pub m: u32,
    pub eta: f64,
    pub theta: f64,
    pub phi: f64,
}

impl NbsParams {
    pub fn new(m: u32, eta: f64, theta: f64, phi: f64) -> Result<Self> {
        let params = NbsParams { m, eta, theta, phi };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(NbsError::InvalidParameter { name: "M", value: self.m as f64, reason: "must be a positive integer" });
        }
        check_eta(self.eta)?;
        if !self.theta.is_finite() {
            return Err(NbsError::InvalidParameter { name: "theta", value: self.theta, reason: "must be finite" });
        }
        if !(0.0..=TAU).contains(&self.phi) {
            return Err(NbsError::InvalidParameter { name: "phi", value: self.phi, reason: "must lie in [0, 2π]" });
        }
        Ok(())
    }

    /// `η_C = η e^{iθ}`.
    pub fn eta_c(&self) -> C64 {
        self.eta * unit(self.theta)
    }

    /// `η²`, the success probability of the underlying negative binomial law.
    pub fn x(&self) -> f64 {
        self.eta * self.eta
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(NbsError::InvalidParameter { name: "eta", value: eta, reason: "must lie strictly inside (0, 1)" });
    }
    Ok(())
}

fn check_m(m: u32) -> Result<()> {
    if m < 1 {
        return Err(NbsError::InvalidParameter { name: "M", value: 0.0, reason: "must be a positive integer" });
    }
    Ok(())
}

/// `ln [binom(M + n - 1, n) x^n (1 - x)^M]`.
fn ln_nb_weight(m: u32, x: f64, n: u64) -> f64 {
    let ln_x_n = if n == 0 { 0.0 } else { n as f64 * x.ln() };
    m as f64 * (-x).ln_1p() + ln_nb_binomial(m, n) + ln_x_n
}

/// Truncation bound for a distribution dominated by `scale` times the
/// negative binomial law with parameters `(M, x)`.
pub fn nbs_n_max(m: u32, x: f64, scale: f64, policy: &TruncationPolicy) -> Result<usize> {
    let mf = m as f64;
    policy.cutoff(|n| ln_nb_weight(m, x, n), |n| (mf + n as f64) / (n as f64 + 1.0) * x, scale)
}

/// Truncation bound for `scale` times a Poisson law of mean `lambda`.
pub fn poisson_n_max(lambda: f64, scale: f64, policy: &TruncationPolicy) -> Result<usize> {
    let ln_lambda = lambda.ln();
    policy.cutoff(
        |n| if n == 0 { -lambda } else { -lambda + n as f64 * ln_lambda - ln_fact(n) },
        |n| lambda / (n as f64 + 1.0),
        scale,
    )
}

/// `ln |c_n|` of the NBS without its `(1 - x)^{M/2}` prefactor.
fn ln_nbs_core(m: u32, ln_eta: f64, n: usize) -> f64 {
    let ln_eta_n = if n == 0 { 0.0 } else { n as f64 * ln_eta };
    0.5 * ln_nb_binomial(m, n as u64) + ln_eta_n
}

/// The NBS `|η_C, M⟩` with amplitudes
/// `c_n = (1 - η²)^{M/2} binom(M + n - 1, n)^{1/2} η_C^n`.
pub fn nbs(params: &NbsParams, policy: &TruncationPolicy) -> Result<FockVector> {
    params.validate()?;
    let n_max = nbs_n_max(params.m, params.x(), 1.0, policy)?;
    Ok(nbs_in(params.m, params.eta, params.theta, n_max))
}

/// The NBS with `η_C = eta e^{i theta}` on an explicit `n_max`. `eta` may
/// be zero here (giving the vacuum).
pub fn nbs_in(m: u32, eta: f64, theta: f64, n_max: usize) -> FockVector {
    let x = eta * eta;
    let ln_pre = 0.5 * m as f64 * (-x).ln_1p();
    let ln_eta = eta.ln();
    let phases = phase_powers(theta, n_max);
    FockVector::from_fn(n_max, |n| {
        if eta == 0.0 && n > 0 {
            return C64::new(0.0, 0.0);
        }
        (ln_pre + ln_nbs_core(m, ln_eta, n)).exp() * phases[n]
    })
}

/// The NBS for a complex label `eta_c` with `|eta_c| < 1`.
pub fn nbs_complex_in(m: u32, eta_c: C64, n_max: usize) -> Result<FockVector> {
    check_m(m)?;
    let (r, theta) = eta_c.to_polar();
    if r >= 1.0 {
        return Err(NbsError::Domain(format!("NBS label must have modulus below 1, got {r}")));
    }
    Ok(nbs_in(m, r, theta, n_max))
}

/// Normalization constant `{2 [1 + cos φ (1 - η²)^M / (1 + η²)^M]}^{-1/2}`
/// of the superposition.
pub fn normalization_constant(phi: f64, eta: f64, m: u32) -> Result<f64> {
    check_eta(eta)?;
    check_m(m)?;
    Ok(normalization_factor(eta * eta, m, &CosPhase::new(phi)).powf(-0.5))
}

/// `2 [1 + cos φ ((1 - x)/(1 + x))^M]`, strictly positive for `0 < x < 1`.
fn normalization_factor(x: f64, m: u32, phase: &CosPhase) -> f64 {
    2.0 * branch_sum(x, m as f64, 1.0, phase).factor
}

/// The superposition `N [|η_C, M⟩ + e^{iφ} |-η_C, M⟩]`.
pub fn superposition(params: &NbsParams, policy: &TruncationPolicy) -> Result<FockVector> {
    params.validate()?;
    let phase = CosPhase::new(params.phi);
    let norm_factor = normalization_factor(params.x(), params.m, &phase);
    // P(n) <= (1 + |cos φ|) p_NB(n) / (norm_factor / 2)
    let scale = 2.0 * (1.0 + phase.cos.abs()) / norm_factor;
    let n_max = nbs_n_max(params.m, params.x(), scale, policy)?;
    superposition_in(params, n_max)
}

pub fn superposition_in(params: &NbsParams, n_max: usize) -> Result<FockVector> {
    params.validate()?;
    let phase = CosPhase::new(params.phi);
    let x = params.x();
    let ln_pre = -0.5 * normalization_factor(x, params.m, &phase).ln() + 0.5 * params.m as f64 * (-x).ln_1p();
    let ln_eta = params.eta.ln();
    let rel = unit(params.phi);
    let phases = phase_powers(params.theta, n_max);
    Ok(FockVector::from_fn(n_max, |n| {
        let bracket = if n % 2 == 0 { 1.0 + rel } else { 1.0 - rel };
        (ln_pre + ln_nbs_core(params.m, ln_eta, n)).exp() * phases[n] * bracket
    }))
}

/// Shared builder for the even (`parity = 0`) and odd (`parity = 1`) NBS:
/// `sqrt(2 / [(1 - x)^{-M} ± (1 + x)^{-M}]) binom(M + n - 1, n)^{1/2} η_C^n`
/// on levels of the given parity.
fn parity_nbs_in(params: &NbsParams, parity: usize, n_max: usize) -> FockVector {
    let sign = if parity == 0 { 1.0 } else { -1.0 };
    let x = params.x();
    let bracket = branch_sum(x, params.m as f64, sign, &CosPhase::new(0.0));
    let ln_pre = 0.5 * (LN_2 - bracket.ln());
    let ln_eta = params.eta.ln();
    let phases = phase_powers(params.theta, n_max);
    FockVector::from_fn(n_max, |n| {
        if n % 2 != parity {
            return C64::new(0.0, 0.0);
        }
        (ln_pre + ln_nbs_core(params.m, ln_eta, n)).exp() * phases[n]
    })
}

fn parity_nbs(params: &NbsParams, parity: usize, policy: &TruncationPolicy) -> Result<FockVector> {
    params.validate()?;
    let sign = if parity == 0 { 1.0 } else { -1.0 };
    let factor = branch_sum(params.x(), params.m as f64, sign, &CosPhase::new(0.0)).factor;
    let n_max = nbs_n_max(params.m, params.x(), 2.0 / factor, policy)?;
    Ok(parity_nbs_in(params, parity, n_max))
}

/// The even NBS, supported on `|2n⟩`. `params.phi` is ignored.
pub fn even_nbs(params: &NbsParams, policy: &TruncationPolicy) -> Result<FockVector> {
    parity_nbs(params, 0, policy)
}

pub fn even_nbs_in(params: &NbsParams, n_max: usize) -> Result<FockVector> {
    params.validate()?;
    Ok(parity_nbs_in(params, 0, n_max))
}

/// The odd NBS, supported on `|2n + 1⟩`. `params.phi` is ignored.
pub fn odd_nbs(params: &NbsParams, policy: &TruncationPolicy) -> Result<FockVector> {
    parity_nbs(params, 1, policy)
}

pub fn odd_nbs_in(params: &NbsParams, n_max: usize) -> Result<FockVector> {
    params.validate()?;
    Ok(parity_nbs_in(params, 1, n_max))
}

fn check_alpha(alpha: C64) -> Result<()> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(NbsError::Domain(format!("coherent amplitude must be finite, got {alpha}")));
    }
    Ok(())
}

/// `e^{-|α|²/2} α^n / sqrt(n!)` with the phase of `α` applied exactly.
fn coherent_amplitude(ln_pre: f64, ln_r: f64, n: usize, phase: C64) -> C64 {
    let ln_r_n = if n == 0 { 0.0 } else { n as f64 * ln_r };
    (ln_pre + ln_r_n - 0.5 * ln_fact(n as u64)).exp() * phase
}

/// The Glauber coherent state `|α⟩`.
pub fn coherent(alpha: C64, policy: &TruncationPolicy) -> Result<FockVector> {
    check_alpha(alpha)?;
    let n_max = poisson_n_max(alpha.norm_sqr(), 1.0, policy)?;
    coherent_in(alpha, n_max)
}

pub fn coherent_in(alpha: C64, n_max: usize) -> Result<FockVector> {
    check_alpha(alpha)?;
    let (r, arg) = alpha.to_polar();
    let phases = phase_powers(arg, n_max);
    let ln_pre = -0.5 * r * r;
    Ok(FockVector::from_fn(n_max, |n| {
        if r == 0.0 && n > 0 {
            return C64::new(0.0, 0.0);
        }
        coherent_amplitude(ln_pre, r.ln(), n, phases[n])
    }))
}

/// `ln cosh λ` (parity 0) or `ln sinh λ` (parity 1), stable for large and
/// small `λ`.
fn ln_cosh_sinh(lambda: f64, parity: usize) -> f64 {
    if parity == 0 {
        lambda + (-2.0 * lambda).exp().ln_1p() - LN_2
    } else {
        lambda + (-(-2.0 * lambda).exp_m1()).ln() - LN_2
    }
}

fn parity_coherent_in(alpha: C64, parity: usize, n_max: usize) -> Result<FockVector> {
    check_alpha(alpha)?;
    let (r, arg) = alpha.to_polar();
    if parity == 1 && r == 0.0 {
        return Err(NbsError::Domain("the odd coherent state needs α ≠ 0".into()));
    }
    let lambda = r * r;
    let ln_pre = -0.5 * ln_cosh_sinh(lambda, parity);
    let phases = phase_powers(arg, n_max);
    Ok(FockVector::from_fn(n_max, |n| {
        if n % 2 != parity || (r == 0.0 && n > 0) {
            return C64::new(0.0, 0.0);
        }
        coherent_amplitude(ln_pre, r.ln(), n, phases[n])
    }))
}

fn parity_coherent(alpha: C64, parity: usize, policy: &TruncationPolicy) -> Result<FockVector> {
    check_alpha(alpha)?;
    let lambda = alpha.norm_sqr();
    // relative to Poisson(λ): 2 / (1 ± e^{-2λ})
    let denom = if parity == 0 { 1.0 + (-2.0 * lambda).exp() } else { -(-2.0 * lambda).exp_m1() };
    let scale = if denom > 0.0 { 2.0 / denom } else { 1.0 };
    let n_max = poisson_n_max(lambda, scale, policy)?;
    parity_coherent_in(alpha, parity, n_max)
}

/// Even coherent state `cosh(|α|²)^{-1/2} Σ α^{2n} / sqrt((2n)!) |2n⟩`.
pub fn even_coherent(alpha: C64, policy: &TruncationPolicy) -> Result<FockVector> {
    parity_coherent(alpha, 0, policy)
}

pub fn even_coherent_in(alpha: C64, n_max: usize) -> Result<FockVector> {
    parity_coherent_in(alpha, 0, n_max)
}

/// Odd coherent state `sinh(|α|²)^{-1/2} Σ α^{2n+1} / sqrt((2n+1)!) |2n+1⟩`.
pub fn odd_coherent(alpha: C64, policy: &TruncationPolicy) -> Result<FockVector> {
    parity_coherent(alpha, 1, policy)
}

pub fn odd_coherent_in(alpha: C64, n_max: usize) -> Result<FockVector> {
    parity_coherent_in(alpha, 1, n_max)
}

/// `2 [1 + cos φ e^{-2|α|²}]`, the squared inverse normalization of the cat.
fn cat_norm_factor(lambda: f64, phase: &CosPhase) -> f64 {
    2.0 * one_plus_cos_exp(phase, 1.0, 2.0 * lambda)
}

/// Schrödinger cat state `N₀ [|α⟩ + e^{iφ} |-α⟩]`.
pub fn cat_state(alpha: C64, phi: f64, policy: &TruncationPolicy) -> Result<FockVector> {
    check_alpha(alpha)?;
    let phase = CosPhase::new(phi);
    let lambda = alpha.norm_sqr();
    let factor = cat_norm_factor(lambda, &phase);
    if factor <= 0.0 {
        return Err(NbsError::Domain("cat state with α = 0 and φ = π is the zero vector".into()));
    }
    let n_max = poisson_n_max(lambda, 2.0 * (1.0 + phase.cos.abs()) / factor, policy)?;
    cat_state_in(alpha, phi, n_max)
}

pub fn cat_state_in(alpha: C64, phi: f64, n_max: usize) -> Result<FockVector> {
    check_alpha(alpha)?;
    let phase = CosPhase::new(phi);
    let (r, arg) = alpha.to_polar();
    let lambda = r * r;
    let factor = cat_norm_factor(lambda, &phase);
    if factor <= 0.0 {
        return Err(NbsError::Domain("cat state with α = 0 and φ = π is the zero vector".into()));
    }
    let ln_pre = -0.5 * lambda - 0.5 * factor.ln();
    let rel = unit(phi);
    let phases = phase_powers(arg, n_max);
    Ok(FockVector::from_fn(n_max, |n| {
        if r == 0.0 && n > 0 {
            return C64::new(0.0, 0.0);
        }
        let bracket = if n % 2 == 0 { 1.0 + rel } else { 1.0 - rel };
        coherent_amplitude(ln_pre, r.ln(), n, phases[n]) * bracket
    }))
}

/// Closed-form NBS overlap
/// `⟨α, M|β, M⟩ = (1 - |α|²)^{M/2} (1 - |β|²)^{M/2} (1 - α* β)^{-M}`.
pub fn nbs_inner_closed(alpha_c: C64, beta_c: C64, m: u32) -> Result<C64> {
    check_m(m)?;
    for z in [alpha_c, beta_c] {
        if z.norm().is_nan() || z.norm() >= 1.0 {
            return Err(NbsError::Domain(format!("NBS label must have modulus below 1, got |{z}| = {}", z.norm())));
        }
    }
    let mf = m as f64;
    let ln_real = 0.5 * mf * ((-alpha_c.norm_sqr()).ln_1p() + (-beta_c.norm_sqr()).ln_1p());
    let ln_cross = (C64::new(1.0, 0.0) - alpha_c.conj() * beta_c).ln();
    Ok((C64::new(ln_real, 0.0) - mf * ln_cross).exp())
}

/// `P(n) = |c_n|²`.
pub fn photon_distribution(v: &FockVector) -> Vec<f64> {
    v.amplitudes().iter().map(|c| c.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{inner, oracle_stats};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    /// NBS amplitudes by the product recurrence
    /// `c_{n+1} = c_n η_C sqrt((M + n) / (n + 1))`, independent of log-gamma.
    fn nbs_recurrence(m: u32, eta_c: C64, n_max: usize) -> Vec<C64> {
        let mut amps = vec![C64::new((1.0 - eta_c.norm_sqr()).powf(m as f64 / 2.0), 0.0)];
        for n in 0..n_max {
            let next = amps[n] * eta_c * ((m as f64 + n as f64) / (n as f64 + 1.0)).sqrt();
            amps.push(next);
        }
        amps
    }

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn params_validation() {
        assert!(NbsParams::new(0, 0.5, 0.0, 0.0).is_err());
        assert!(NbsParams::new(1, 0.0, 0.0, 0.0).is_err());
        assert!(NbsParams::new(1, 1.0, 0.0, 0.0).is_err());
        assert!(NbsParams::new(1, 0.5, 0.0, -0.1).is_err());
        assert!(NbsParams::new(1, 0.5, 0.0, 7.0).is_err());
        assert!(NbsParams::new(1, 0.5, f64::NAN, 0.0).is_err());
        assert!(NbsParams::new(1, 0.5, 0.0, TAU).is_ok());
    }

    #[test]
    fn nbs_small_eta_is_nearly_vacuum() {
        let v = nbs(&NbsParams::new(1, 0.001, 0.0, 0.0).unwrap(), &policy()).unwrap();
        assert!(v.get(0).norm_sqr() > 0.999998);
    }

    #[test]
    fn nbs_first_coefficients() {
        let eta = 0.5f64.sqrt();
        let v = nbs(&NbsParams::new(2, eta, 0.0, 0.0).unwrap(), &policy()).unwrap();
        assert!((v.get(0).re - 0.5).abs() < 1e-15);
        assert!((v.get(1).re - 0.5 * 2f64.sqrt() * FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn nbs_matches_recurrence() {
        for &(m, eta, theta) in &[(1, 0.3, 0.0), (7, 0.8, 1.1), (50, 0.9, PI), (30, 0.2, -0.4)] {
            let v = nbs(&NbsParams::new(m, eta, theta, 0.0).unwrap(), &policy()).unwrap();
            let oracle = nbs_recurrence(m, C64::from_polar(eta, theta), v.n_max());
            for (n, (got, want)) in v.amplitudes().iter().zip(&oracle).enumerate() {
                assert!((got - want).norm() <= 1e-12 * want.norm().max(1e-300) + 1e-300, "M={m} n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn nbs_mean_photon_number() {
        let params = NbsParams::new(2, 0.5f64.sqrt(), 0.0, 0.0).unwrap();
        let stats = oracle_stats(&nbs(&params, &policy()).unwrap()).unwrap();
        assert!((stats.mean_n - 2.0).abs() < 1e-10);
    }

    #[test]
    fn nbs_norm_within_truncation_tolerance() {
        for &(m, eta) in &[(1, 0.95), (30, 0.6), (50, 0.9)] {
            let v = nbs(&NbsParams::new(m, eta, 0.3, 0.0).unwrap(), &policy()).unwrap();
            assert!((v.norm_sqr() - 1.0).abs() < 1e-12, "M={m} eta={eta}: {}", v.norm_sqr());
        }
    }

    #[test]
    fn normalization_constant_cases() {
        assert_eq!(normalization_constant(PI / 2.0, 0.37, 11).unwrap(), FRAC_1_SQRT_2);
        let n = normalization_constant(0.0, 0.5f64.sqrt(), 1).unwrap();
        assert!((n - (8.0f64 / 3.0).powf(-0.5)).abs() < 1e-15);
        let near_one = normalization_constant(0.0, 1.0 - 1e-9, 1).unwrap();
        assert!((near_one - FRAC_1_SQRT_2).abs() < 1e-8);
        assert!(normalization_constant(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn superposition_parity_support() {
        let even = superposition(&NbsParams::new(4, 0.6, 0.9, 0.0).unwrap(), &policy()).unwrap();
        let odd = superposition(&NbsParams::new(4, 0.6, 0.9, PI).unwrap(), &policy()).unwrap();
        for n in 0..=even.n_max() {
            if n % 2 == 1 {
                assert_eq!(even.get(n), C64::new(0.0, 0.0));
            }
        }
        for n in 0..=odd.n_max() {
            if n % 2 == 0 {
                assert_eq!(odd.get(n), C64::new(0.0, 0.0));
            }
        }
        assert!((even.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((odd.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn superposition_matches_explicit_sum() {
        // N [|η_C⟩ + e^{iφ}|-η_C⟩] from two recurrence-built NBS vectors
        let params = NbsParams::new(6, 0.55, 0.4, 2.1).unwrap();
        let v = superposition(&params, &policy()).unwrap();
        let plus = nbs_recurrence(6, params.eta_c(), v.n_max());
        let minus = nbs_recurrence(6, -params.eta_c(), v.n_max());
        let raw: Vec<C64> = plus.iter().zip(&minus).map(|(p, q)| p + C64::from_polar(1.0, 2.1) * q).collect();
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for (got, want) in v.amplitudes().iter().zip(&raw) {
            assert!((got - want / norm).norm() < 1e-12);
        }
    }

    #[test]
    fn superposition_at_quarter_phase_has_nbs_distribution() {
        let params = NbsParams::new(9, 0.7, 1.3, PI / 2.0).unwrap();
        let sup = superposition(&params, &policy()).unwrap();
        let plain = nbs_in(9, 0.7, 1.3, sup.n_max());
        for (a, b) in photon_distribution(&sup).iter().zip(photon_distribution(&plain)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn even_and_odd_nbs_match_superpositions() {
        let params = NbsParams::new(5, 0.45, 0.8, 0.0).unwrap();
        let even = even_nbs(&params, &policy()).unwrap();
        let sup0 = superposition_in(&params.with_phi(0.0), even.n_max()).unwrap();
        assert!(even.max_abs_diff(&sup0).unwrap() < 1e-12);
        assert!((even.norm_sqr() - 1.0).abs() < 1e-12);

        let odd = odd_nbs(&params, &policy()).unwrap();
        assert_eq!(odd.get(0), C64::new(0.0, 0.0));
        let sup_pi = superposition_in(&params.with_phi(PI), odd.n_max()).unwrap();
        assert!(odd.max_abs_diff(&sup_pi).unwrap() < 1e-12);
        assert!((inner(&odd, &sup_pi).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn odd_nbs_small_eta_is_one_photon() {
        let params = NbsParams::new(3, 1e-3, 0.0, 0.0).unwrap();
        let odd = odd_nbs(&params, &policy()).unwrap();
        assert!((odd.get(1).norm_sqr() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn coherent_family_support_and_norm() {
        let alpha = C64::new(1.2, -0.5);
        let even = even_coherent(alpha, &policy()).unwrap();
        let odd = odd_coherent(alpha, &policy()).unwrap();
        for n in 0..=even.n_max() {
            if n % 2 == 1 {
                assert_eq!(even.get(n), C64::new(0.0, 0.0));
            }
        }
        for n in 0..=odd.n_max() {
            if n % 2 == 0 {
                assert_eq!(odd.get(n), C64::new(0.0, 0.0));
            }
        }
        for v in [&even, &odd, &coherent(alpha, &policy()).unwrap()] {
            assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
        }
        let cat = cat_state(alpha, PI / 2.0, &policy()).unwrap();
        assert!((cat.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cat_state_reduces_to_even_and_odd_coherent() {
        let alpha = C64::new(0.3, 0.9);
        let cat0 = cat_state_in(alpha, 0.0, 40).unwrap();
        assert!(cat0.max_abs_diff(&even_coherent_in(alpha, 40).unwrap()).unwrap() < 1e-12);
        let cat_pi = cat_state_in(alpha, PI, 40).unwrap();
        assert!(cat_pi.max_abs_diff(&odd_coherent_in(alpha, 40).unwrap()).unwrap() < 1e-12);
        assert!(cat_state(C64::new(0.0, 0.0), PI, &policy()).is_err());
    }

    #[test]
    fn even_coherent_is_eigenstate_of_a_squared() {
        let alpha = C64::new(1.0, 0.0);
        let v = even_coherent_in(alpha, 80).unwrap();
        let a2v = crate::fock::apply_annihilate(&crate::fock::apply_annihilate(&v));
        for n in 0..78 {
            assert!((a2v.get(n) - alpha * alpha * v.get(n)).norm() < 1e-10);
        }
    }

    #[test]
    fn overlap_closed_form() {
        assert!((nbs_inner_closed(C64::new(0.3, 0.4), C64::new(0.3, 0.4), 7).unwrap() - 1.0).norm() < 1e-14);
        let eta = 0.5f64.sqrt();
        let got = nbs_inner_closed(C64::new(eta, 0.0), C64::new(-eta, 0.0), 1).unwrap();
        assert!((got - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(nbs_inner_closed(C64::new(1.0, 0.0), C64::new(0.0, 0.0), 1).is_err());

        let plus = nbs_in(1, eta, 0.0, 200);
        let minus = nbs_in(1, eta, PI, 200);
        assert!((inner(&minus, &plus).unwrap() - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn photon_distribution_sums_to_one() {
        let v = superposition(&NbsParams::new(12, 0.8, 0.0, 1.0).unwrap(), &policy()).unwrap();
        let total: f64 = photon_distribution(&v).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]
            #[test]
            fn overlap_matches_oracle(
                ar in 0.0f64..0.8, aphi in 0.0f64..TAU,
                br in 0.0f64..0.8, bphi in 0.0f64..TAU,
                m in 1u32..8,
            ) {
                let alpha = C64::from_polar(ar, aphi);
                let beta = C64::from_polar(br, bphi);
                let p = TruncationPolicy::default();
                let n_max = nbs_n_max(m, ar.max(br).powi(2), 1.0, &p).unwrap();
                let u = nbs_complex_in(m, alpha, n_max).unwrap();
                let v = nbs_complex_in(m, beta, n_max).unwrap();
                let oracle = inner(&u, &v).unwrap();
                let closed = nbs_inner_closed(alpha, beta, m).unwrap();
                prop_assert!((oracle - closed).norm() < 1e-10, "{} vs {}", oracle, closed);
            }
        }
    }
}
