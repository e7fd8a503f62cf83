//! Closed-form photon statistics of the superposition `|φ, η_C, M⟩`:
//! photon number distribution, generating function, first two moments,
//! Mandel Q, `⟨a^k⟩` and the quadrature variances.
//!
//! Every expression built from `(1 ∓ η²)^{-k}` goes through
//! [`branch_sum`], which keeps the two branches in log space and
//! evaluates their difference without cancellation. That keeps the formulas
//! usable from `η ≈ 0` (where one denominator vanishes) up to `M ~ 10⁴`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{NbsError, Result};
use crate::fock::HARD_CAP;
use crate::special::{branch_sum, ln_fact, ln_nb_binomial, unit, CosPhase, Scaled};
use crate::states::{check_eta, NbsParams};

/// Below this `η`, and for `φ ∈ {0, π}`, [`q_closed`] returns the limit
/// values [`q_limit`]. The neglected terms are `O(η⁴)`.
pub const Q_LIMIT_ETA: f64 = 1e-4;

/// Relative size of the last retained term of the `A_{k±}` series.
pub const SERIES_CUTOFF: f64 = 1e-16;

/// Mandel's Q, or `Undefined` for the vacuum where `⟨N⟩ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MandelQ {
    Value(f64),
    Undefined,
}

impl MandelQ {
    pub fn value(self) -> Option<f64> {
        match self {
            MandelQ::Value(q) => Some(q),
            MandelQ::Undefined => None,
        }
    }
}

impl std::fmt::Display for MandelQ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MandelQ::Value(q) => write!(f, "{q}"),
            MandelQ::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for MandelQ {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MandelQ::Value(q) => serializer.serialize_f64(*q),
            MandelQ::Undefined => serializer.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for MandelQ {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(q) => Ok(MandelQ::Value(q)),
            Raw::Text(s) if s == "undefined" => Ok(MandelQ::Undefined),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("expected a number or \"undefined\", got {s:?}"))),
        }
    }
}

/// First and second photon moments, Mandel Q, `⟨a⟩`, `⟨a²⟩` and the
/// variances of `X₁ = (a + a†)/2` and `X₂ = (a - a†)/(2i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonStats {
    pub mean_n: f64,
    pub second_moment: f64,
    pub mandel_q: MandelQ,
    #[serde(with = "complex_pair")]
    pub exp_a: C64,
    #[serde(with = "complex_pair")]
    pub exp_a2: C64,
    pub var_x1: f64,
    pub var_x2: f64,
}

impl PhotonStats {
    /// Fills in the quadrature variances from the moments.
    pub fn assemble(mean_n: f64, second_moment: f64, mandel_q: MandelQ, exp_a: C64, exp_a2: C64) -> Self {
        let (var_x1, var_x2) = quadrature_variances(mean_n, exp_a, exp_a2);
        PhotonStats { mean_n, second_moment, mandel_q, exp_a, exp_a2, var_x1, var_x2 }
    }

    /// Names of the violated invariants: non-negative variance, `Q ≥ -1`
    /// and the uncertainty bound `var_x1 var_x2 ≥ 1/16`.
    pub fn invariant_violations(&self, tol: f64) -> Vec<&'static str> {
        let mut bad = Vec::new();
        if self.second_moment < self.mean_n * self.mean_n * (1.0 - tol) {
            bad.push("second_moment >= mean_n^2");
        }
        if let MandelQ::Value(q) = self.mandel_q {
            if q < -1.0 - tol {
                bad.push("mandel_q >= -1");
            }
        }
        if self.var_x1 * self.var_x2 < 1.0 / 16.0 - tol {
            bad.push("var_x1 * var_x2 >= 1/16");
        }
        bad
    }
}

mod complex_pair {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// `⟨ΔX₁²⟩ = 1/4 + [⟨N⟩ + Re⟨a²⟩ - 2 (Re⟨a⟩)²] / 2` and
/// `⟨ΔX₂²⟩ = 1/4 + [⟨N⟩ - Re⟨a²⟩ - 2 (Im⟨a⟩)²] / 2`.
pub fn quadrature_variances(mean_n: f64, exp_a: C64, exp_a2: C64) -> (f64, f64) {
    let v1 = 0.25 + 0.5 * (mean_n + exp_a2.re - 2.0 * exp_a.re * exp_a.re);
    let v2 = 0.25 + 0.5 * (mean_n - exp_a2.re - 2.0 * exp_a.im * exp_a.im);
    (v1, v2)
}

fn check_m(m: u32) -> Result<()> {
    if m < 1 {
        return Err(NbsError::InvalidParameter { name: "M", value: 0.0, reason: "must be a positive integer" });
    }
    Ok(())
}

/// The two brackets `B±(k) = (1 - η²)^{-k} ± cos φ (1 + η²)^{-k}`.
struct Brackets {
    x: f64,
    m: f64,
    phase: CosPhase,
}

impl Brackets {
    fn new(phi: f64, eta: f64, m: u32) -> Result<Self> {
        check_eta(eta)?;
        check_m(m)?;
        Ok(Brackets { x: eta * eta, m: m as f64, phase: CosPhase::new(phi) })
    }

    fn plus(&self, shift: f64) -> Scaled {
        branch_sum(self.x, self.m + shift, 1.0, &self.phase)
    }

    fn minus(&self, shift: f64) -> Scaled {
        branch_sum(self.x, self.m + shift, -1.0, &self.phase)
    }

    fn mean(&self) -> f64 {
        self.m * self.x * self.minus(1.0).ratio(self.plus(0.0))
    }
}

/// `P(n) = binom(M+n-1, n) η^{2n} [1 + cos φ (-1)^n] / [(1-η²)^{-M} + cos φ (1+η²)^{-M}]`.
pub fn pn_closed(n: u64, phi: f64, eta: f64, m: u32) -> Result<f64> {
    let b = Brackets::new(phi, eta, m)?;
    let parity = if n.is_multiple_of(2) { b.phase.one_plus } else { b.phase.one_minus };
    if parity == 0.0 {
        return Ok(0.0);
    }
    let denom = b.plus(0.0);
    let ln_x_n = if n == 0 { 0.0 } else { n as f64 * b.x.ln() };
    Ok((ln_nb_binomial(m, n) + ln_x_n - denom.ln_scale).exp() * parity / denom.factor)
}

/// Generating function `G(λ) = Σ P(n) λ^n`, defined for `|λ| η² < 1`.
pub fn generating_function(lambda: f64, phi: f64, eta: f64, m: u32) -> Result<f64> {
    let b = Brackets::new(phi, eta, m)?;
    let lx = lambda * b.x;
    if lx.is_nan() || lx.abs() >= 1.0 {
        return Err(NbsError::Domain(format!("generating function diverges for λη² = {lx}")));
    }
    let denom = b.plus(0.0);
    if lx > 0.0 {
        let num = branch_sum(lx, b.m, 1.0, &b.phase);
        return Ok(num.ratio(denom));
    }
    // (1 - λx)^{-M} + cos φ (1 + λx)^{-M} with λx <= 0
    let t1 = -b.m * (-lx).ln_1p() - denom.ln_scale;
    let t2 = -b.m * lx.ln_1p() - denom.ln_scale;
    Ok((t1.exp() + b.phase.cos * t2.exp()) / denom.factor)
}

/// `⟨a†a⟩ = Mη² [(1-η²)^{-M-1} - cos φ (1+η²)^{-M-1}] / [(1-η²)^{-M} + cos φ (1+η²)^{-M}]`.
pub fn mean_closed(phi: f64, eta: f64, m: u32) -> Result<f64> {
    Ok(Brackets::new(phi, eta, m)?.mean())
}

/// `⟨(a†a)²⟩ = ⟨a†a⟩ + M(M+1)η⁴ [(1-η²)^{-M-2} + cos φ (1+η²)^{-M-2}] / [(1-η²)^{-M} + cos φ (1+η²)^{-M}]`.
pub fn second_moment_closed(phi: f64, eta: f64, m: u32) -> Result<f64> {
    let b = Brackets::new(phi, eta, m)?;
    let factorial_moment = b.m * (b.m + 1.0) * b.x * b.x * b.plus(2.0).ratio(b.plus(0.0));
    Ok(b.mean() + factorial_moment)
}

/// The `η → 0` limit of Q: `+1` for the even state (`φ = 0`), `-1` for the
/// odd state (`φ = π`) and `0` for every other relative phase.
pub fn q_limit(phi: f64) -> f64 {
    let phase = CosPhase::new(phi);
    if phase.sin == 0.0 {
        phase.cos
    } else {
        0.0
    }
}

/// Mandel Q in the two-term form
/// `(M+1)η² B₊(M+2) / B₋(M+1) - Mη² B₋(M+1) / B₊(M)`.
pub fn q_closed(phi: f64, eta: f64, m: u32) -> Result<f64> {
    let b = Brackets::new(phi, eta, m)?;
    if eta < Q_LIMIT_ETA && b.phase.sin == 0.0 {
        return Ok(q_limit(phi));
    }
    let first = (b.m + 1.0) * b.x * b.plus(2.0).ratio(b.minus(1.0));
    Ok(first - b.mean())
}

/// `|Q(φ, η, M) - [⟨N⟩(π - φ, η, M + 1) - ⟨N⟩(φ, η, M)]|`.
pub fn q_recursion_check(phi: f64, eta: f64, m: u32) -> Result<f64> {
    let q = q_closed(phi, eta, m)?;
    let shifted = mean_closed(std::f64::consts::PI - phi, eta, m + 1)?;
    Ok((q - (shifted - mean_closed(phi, eta, m)?)).abs())
}

/// The pair of series
/// `A_{k±} = (1-η²)^{M+k/2} Σ_n binom(M+n-1, n)^{1/2} binom(M+n+k-1, n)^{1/2} (±η²)^n`.
///
/// Summation stops past the peak term once a term falls below
/// [`SERIES_CUTOFF`] times the running sum of magnitudes.
pub fn a_series(k: u32, eta: f64, m: u32) -> Result<(f64, f64)> {
    check_eta(eta)?;
    check_m(m)?;
    let x = eta * eta;
    let (mf, kf) = (m as f64, k as f64);
    let ln_pre = (mf + 0.5 * kf) * (-x).ln_1p();
    let ln_x = x.ln();
    let mut plus = 0.0;
    let mut minus = 0.0;
    for n in 0..HARD_CAP as u64 {
        let ln_term = ln_pre + 0.5 * (ln_nb_binomial(m, n) + ln_nb_binomial(m + k, n)) + n as f64 * ln_x;
        let term = ln_term.exp();
        plus += term;
        minus += if n % 2 == 0 { term } else { -term };
        let nf = n as f64;
        let ratio = x * ((mf + nf) * (mf + nf + kf)).sqrt() / (nf + 1.0);
        if ratio < 1.0 && term < SERIES_CUTOFF * plus {
            return Ok((plus, minus));
        }
    }
    Err(NbsError::NonConvergence { terms: HARD_CAP })
}

/// `⟨a^k⟩` of the superposition state, assembled from `A_{k±}`.
pub fn a_pow_expectation(k: u32, phi: f64, eta: f64, theta: f64, m: u32) -> Result<C64> {
    if k == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let b = Brackets::new(phi, eta, m)?;
    let (a_plus, a_minus) = a_series(k, eta, m)?;
    let n2 = 1.0 / (2.0 * b.plus(0.0).factor);
    let kf = k as f64;
    let ln_pre = 0.5 * (ln_fact((m + k - 1) as u64) - ln_fact((m - 1) as u64) + kf * b.x.ln() - kf * (-b.x).ln_1p());
    let bracket = if k.is_multiple_of(2) {
        C64::new(2.0 * a_plus + 2.0 * b.phase.cos * a_minus, 0.0)
    } else {
        C64::new(0.0, -2.0 * b.phase.sin * a_minus)
    };
    Ok(n2 * ln_pre.exp() * bracket * unit(kf * theta))
}

/// Quadrature variances `(⟨ΔX₁²⟩, ⟨ΔX₂²⟩)` from the closed-form moments.
pub fn quadrature_variances_closed(phi: f64, eta: f64, theta: f64, m: u32) -> Result<(f64, f64)> {
    let mean = mean_closed(phi, eta, m)?;
    let a1 = a_pow_expectation(1, phi, eta, theta, m)?;
    let a2 = a_pow_expectation(2, phi, eta, theta, m)?;
    Ok(quadrature_variances(mean, a1, a2))
}

/// All closed-form statistics at one parameter point.
pub fn closed_stats(params: &NbsParams) -> Result<PhotonStats> {
    params.validate()?;
    let NbsParams { m, eta, theta, phi } = *params;
    let mean = mean_closed(phi, eta, m)?;
    let second = second_moment_closed(phi, eta, m)?;
    let q = q_closed(phi, eta, m)?;
    let a1 = a_pow_expectation(1, phi, eta, theta, m)?;
    let a2 = a_pow_expectation(2, phi, eta, theta, m)?;
    Ok(PhotonStats::assemble(mean, second, MandelQ::Value(q), a1, a2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_annihilate, inner, oracle_stats, TruncationPolicy};
    use crate::states::{odd_nbs, superposition};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

    fn tight() -> TruncationPolicy {
        TruncationPolicy::new(1e-20, HARD_CAP).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn pn_parity_and_nbs_reduction() {
        assert_eq!(pn_closed(3, 0.0, 0.6, 4).unwrap(), 0.0);
        assert_eq!(pn_closed(2, PI, 0.6, 4).unwrap(), 0.0);
        let (eta, m) = (0.6f64, 4u32);
        let x = eta * eta;
        for n in 0..20u64 {
            let nb = ln_nb_binomial(m, n).exp() * x.powi(n as i32) * (1.0 - x).powi(m as i32);
            assert!(rel(pn_closed(n, FRAC_PI_2, eta, m).unwrap(), nb) < 1e-12);
        }
    }

    #[test]
    fn pn_sums_to_one() {
        for &phi in &[0.0, 1.0, PI] {
            let total: f64 = (0..2000).map(|n| pn_closed(n, phi, 0.8, 12).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12, "phi={phi}: {total}");
        }
    }

    #[test]
    fn generating_function_values() {
        let (phi, eta, m) = (FRAC_PI_4, 0.6, 5);
        assert!((generating_function(1.0, phi, eta, m).unwrap() - 1.0).abs() < 1e-15);
        let g0 = generating_function(0.0, phi, eta, m).unwrap();
        assert!(rel(g0, pn_closed(0, phi, eta, m).unwrap()) < 1e-13);
        // truncated power series
        let series: f64 = (0..400).map(|n| pn_closed(n, phi, eta, m).unwrap() * 0.5f64.powi(n as i32)).sum();
        assert!((generating_function(0.5, phi, eta, m).unwrap() - series).abs() < 1e-10);
        let series_neg: f64 = (0..400).map(|n| pn_closed(n, phi, eta, m).unwrap() * (-0.7f64).powi(n as i32)).sum();
        assert!((generating_function(-0.7, phi, eta, m).unwrap() - series_neg).abs() < 1e-10);
        assert!(generating_function(3.0, phi, eta, m).is_err());
    }

    #[test]
    fn moments_match_generating_function_derivatives() {
        // G'(1) and G''(1) by central differences
        let h = 1e-4;
        for &(phi, eta, m) in &[(0.0, 0.3, 2), (1.2, 0.5, 6), (PI, 0.7, 3)] {
            let g = |l: f64| generating_function(l, phi, eta, m).unwrap();
            let d1 = (g(1.0 + h) - g(1.0 - h)) / (2.0 * h);
            let d2 = (g(1.0 + h) - 2.0 * g(1.0) + g(1.0 - h)) / (h * h);
            let mean = mean_closed(phi, eta, m).unwrap();
            let second = second_moment_closed(phi, eta, m).unwrap();
            assert!(rel(mean, d1) < 1e-7, "{mean} vs {d1}");
            assert!(rel(second, d2 + d1) < 1e-5, "{second} vs {}", d2 + d1);
        }
    }

    #[test]
    fn nbs_mean_at_quarter_phase() {
        let mean = mean_closed(FRAC_PI_2, 0.5f64.sqrt(), 2).unwrap();
        assert!((mean - 2.0).abs() < 1e-12);
    }

    #[test]
    fn odd_state_mean_tends_to_one() {
        let params = NbsParams::new(4, 0.01, 0.0, PI).unwrap();
        let oracle = oracle_stats(&odd_nbs(&params, &tight()).unwrap()).unwrap();
        let closed = mean_closed(PI, 0.01, 4).unwrap();
        assert!((oracle.mean_n - 1.0).abs() < 1e-3);
        assert!(rel(closed, oracle.mean_n) < 1e-10);
    }

    #[test]
    fn q_limits() {
        assert_eq!(q_closed(0.0, 5e-5, 3).unwrap(), 1.0);
        assert_eq!(q_closed(PI, 5e-5, 3).unwrap(), -1.0);
        assert_eq!(q_limit(0.0), 1.0);
        assert_eq!(q_limit(PI), -1.0);
        assert_eq!(q_limit(2.0), 0.0);
        for &m in &[1, 30] {
            assert!((q_closed(0.0, 1e-3, m).unwrap() - 1.0).abs() < 1e-3);
            assert!((q_closed(PI, 1e-3, m).unwrap() + 1.0).abs() < 1e-3);
            assert!(q_closed(1.0, 1e-3, m).unwrap().abs() < 1e-3);
        }
        // continuity across the switch
        assert!((q_closed(0.0, 1.0001e-4, 7).unwrap() - 1.0).abs() < 1e-12);
        assert!((q_closed(PI, 1.0001e-4, 7).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn q_symmetric_about_pi() {
        for &phi in &[0.1, 0.9, FRAC_PI_2, 2.5, 3.0] {
            for &eta in &[0.1, 0.5, 0.9] {
                let a = q_closed(phi, eta, 7).unwrap();
                let b = q_closed(TAU - phi, eta, 7).unwrap();
                assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn q_matches_oracle_for_odd_state() {
        let params = NbsParams::new(30, 0.3, 0.0, PI).unwrap();
        let oracle = oracle_stats(&superposition(&params, &tight()).unwrap()).unwrap();
        let q = q_closed(PI, 0.3, 30).unwrap();
        assert!(rel(q, oracle.mandel_q.value().unwrap()) < 1e-10);
    }

    #[test]
    fn recursion_residuals() {
        for &(phi, eta, m) in &[(FRAC_PI_2, 0.5, 10), (0.0, 0.3, 5), (PI, 0.7, 30)] {
            assert!(q_recursion_check(phi, eta, m).unwrap() < 1e-10);
        }
    }

    #[test]
    fn a_pow_parity_and_first_moment() {
        assert_eq!(a_pow_expectation(1, 0.0, 0.4, 0.3, 3).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(a_pow_expectation(3, 0.0, 0.4, 0.3, 3).unwrap().norm(), 0.0);

        // ⟨a⟩ = 2 N² √M η sin φ A₁₋ / √(1-η²) · (sin θ - i cos θ)
        let (phi, eta, theta, m) = (1.1f64, 0.45f64, 0.6f64, 4u32);
        let n2 = crate::states::normalization_constant(phi, eta, m).unwrap().powi(2);
        let (_, a1m) = a_series(1, eta, m).unwrap();
        let want = 2.0 * n2 * (m as f64).sqrt() * eta * phi.sin() * a1m / (1.0 - eta * eta).sqrt()
            * C64::new(theta.sin(), -theta.cos());
        let got = a_pow_expectation(1, phi, eta, theta, m).unwrap();
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn a_squared_matches_oracle() {
        let params = NbsParams::new(3, 0.5, 0.7, FRAC_PI_4).unwrap();
        let v = superposition(&params, &tight()).unwrap();
        let oracle = inner(&v, &apply_annihilate(&apply_annihilate(&v))).unwrap();
        let closed = a_pow_expectation(2, FRAC_PI_4, 0.5, 0.7, 3).unwrap();
        assert!((oracle - closed).norm() < 1e-9);
    }

    #[test]
    fn a_series_k0_has_closed_form() {
        // A_{0+} = 1, A_{0-} = ((1-x)/(1+x))^M
        let (p, mn) = a_series(0, 0.6, 5).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        assert!((mn - (0.64f64 / 1.36).powi(5)).abs() < 1e-14);
    }

    #[test]
    fn quadrature_cases() {
        let (v1, v2) = quadrature_variances_closed(0.0, 1e-6, 0.0, 3).unwrap();
        assert!((v1 - 0.25).abs() < 1e-9 && (v2 - 0.25).abs() < 1e-9);
        for &eta in &[0.02, 0.05, 0.1] {
            let (v1, v2) = quadrature_variances_closed(PI, eta, 0.0, 50).unwrap();
            assert!(v1 >= 0.25 && v2 >= 0.25, "eta={eta}: {v1} {v2}");
        }
        let (_, v2) = quadrature_variances_closed(0.0, 0.1, 0.0, 50).unwrap();
        let params = NbsParams::new(50, 0.1, 0.0, 0.0).unwrap();
        let oracle = oracle_stats(&superposition(&params, &tight()).unwrap()).unwrap();
        assert!(v2 < 0.25);
        assert!(rel(v2, oracle.var_x2) < 1e-9);
    }

    #[test]
    fn merge_ratio_fact() {
        // (1-η²)^{-1} / (1+η²)^{-1} at η² = 0.9
        let x: f64 = 0.9;
        assert!(((1.0 + x) / (1.0 - x) - 19.0).abs() < 1e-12);
    }

    #[test]
    fn invariants_and_serde() {
        let stats = closed_stats(&NbsParams::new(5, 0.4, 0.3, 2.0).unwrap()).unwrap();
        assert!(stats.invariant_violations(1e-12).is_empty());
        let json = serde_json::to_string(&stats).unwrap();
        let back: PhotonStats = serde_json::from_str(&json).unwrap();
        assert_eq!(back, stats);
        let vacuum = PhotonStats::assemble(0.0, 0.0, MandelQ::Undefined, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        assert!(serde_json::to_string(&vacuum).unwrap().contains("\"mandel_q\":\"undefined\""));
    }
}
