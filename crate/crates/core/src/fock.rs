//! Truncated Fock space: state vectors, the ladder operators and brute-force
//! evaluation of photon statistics by direct summation over amplitudes.
//!
//! Everything here is independent of the closed forms in [`crate::stats`];
//! the two are compared against each other throughout the test suites.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{NbsError, Result};
use crate::stats::{MandelQ, PhotonStats};

/// Default tolerance on the probability mass discarded by truncation.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Default upper bound on `n_max`.
pub const HARD_CAP: usize = 20_000;

/// Number of extra levels kept above the tail cutoff so that one or two
/// applications of `a†` stay inside the space.
pub const LADDER_PADDING: usize = 2;

/// How far a state expansion is carried before it is cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationPolicy {
    pub tail_tolerance: f64,
    pub hard_cap: usize,
    /// Lower bound on `n_max`, for checks that need a fixed minimum size.
    pub min_n_max: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { tail_tolerance: TAIL_TOLERANCE, hard_cap: HARD_CAP, min_n_max: 0 }
    }
}

impl TruncationPolicy {
    pub fn new(tail_tolerance: f64, hard_cap: usize) -> Result<Self> {
        let policy = TruncationPolicy { tail_tolerance, hard_cap, min_n_max: 0 };
        policy.validate()?;
        Ok(policy)
    }

    pub fn with_min_n_max(mut self, min_n_max: usize) -> Self {
        self.min_n_max = min_n_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1.0) {
            return Err(NbsError::InvalidParameter {
                name: "tail_tolerance",
                value: self.tail_tolerance,
                reason: "must lie in (0, 1)",
            });
        }
        if self.hard_cap == 0 {
            return Err(NbsError::InvalidParameter { name: "hard_cap", value: 0.0, reason: "must be positive" });
        }
        if self.min_n_max > self.hard_cap {
            return Err(NbsError::HardCapExceeded { hard_cap: self.hard_cap, tolerance: self.tail_tolerance });
        }
        Ok(())
    }

    /// Smallest `n_max` whose discarded tail is below the tolerance, for a
    /// distribution `p_n = exp(ln_weight(n))` scaled by `scale`.
    ///
    /// `ratio(n)` must be `p_{n+1} / p_n` and non-increasing in `n`; once it
    /// drops below one, the tail beyond `n` is bounded by the geometric sum
    /// `p_{n+1} / (1 - ratio(n + 1))`.
    pub fn cutoff<W, R>(&self, ln_weight: W, ratio: R, scale: f64) -> Result<usize>
    where
        W: Fn(u64) -> f64,
        R: Fn(u64) -> f64,
    {
        self.validate()?;
        let limit = self.hard_cap.saturating_sub(LADDER_PADDING) as u64;
        let mut n = 0_u64;
        loop {
            let r = ratio(n + 1);
            if r < 1.0 {
                let bound = scale * ln_weight(n + 1).exp() / (1.0 - r);
                if bound < self.tail_tolerance {
                    break;
                }
            }
            n += 1;
            if n > limit {
                return Err(NbsError::HardCapExceeded { hard_cap: self.hard_cap, tolerance: self.tail_tolerance });
            }
        }
        Ok((n as usize + LADDER_PADDING).max(self.min_n_max))
    }
}

/// A state vector over the number basis `|0⟩ … |n_max⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<C64>,
}

impl FockVector {
    /// Panics if `amplitudes` is empty.
    pub fn new(amplitudes: Vec<C64>) -> Self {
        assert!(!amplitudes.is_empty(), "a Fock vector needs at least the vacuum component");
        FockVector { amplitudes }
    }

    pub fn zeros(n_max: usize) -> Self {
        FockVector { amplitudes: vec![C64::new(0.0, 0.0); n_max + 1] }
    }

    /// The number state `|n⟩` in a space truncated at `n_max`.
    pub fn number(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(NbsError::Domain(format!("number state |{n}⟩ does not fit below n_max = {n_max}")));
        }
        let mut v = FockVector::zeros(n_max);
        v.amplitudes[n] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn from_fn<F: FnMut(usize) -> C64>(n_max: usize, f: F) -> Self {
        FockVector { amplitudes: (0..=n_max).map(f).collect() }
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn get(&self, n: usize) -> C64 {
        self.amplitudes.get(n).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        FockVector { amplitudes: self.amplitudes.iter().map(|c| c * factor).collect() }
    }

    /// `self / ‖self‖`; errors on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(NbsError::Domain("cannot normalize the zero vector".into()));
        }
        Ok(self.scaled(C64::new(1.0 / norm, 0.0)))
    }

    /// Zero-pads or truncates to a new `n_max`.
    pub fn resized(&self, n_max: usize) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.resize(n_max + 1, C64::new(0.0, 0.0));
        FockVector { amplitudes }
    }

    /// Componentwise `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &FockVector, b: C64) -> Result<Self> {
        check_dims(self, other)?;
        Ok(FockVector {
            amplitudes: self.amplitudes.iter().zip(&other.amplitudes).map(|(u, v)| a * u + b * v).collect(),
        })
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &FockVector) -> Result<f64> {
        check_dims(self, other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max))
    }
}

fn check_dims(u: &FockVector, v: &FockVector) -> Result<()> {
    if u.n_max() != v.n_max() {
        return Err(NbsError::DimensionMismatch { left: u.n_max(), right: v.n_max() });
    }
    Ok(())
}

/// `⟨u|v⟩ = Σ conj(u_n) v_n`.
pub fn inner(u: &FockVector, v: &FockVector) -> Result<C64> {
    check_dims(u, v)?;
    Ok(u.amplitudes.iter().zip(&v.amplitudes).map(|(a, b)| a.conj() * b).sum())
}

/// `a v`; the top component is lost to truncation and set to zero.
pub fn apply_annihilate(v: &FockVector) -> FockVector {
    let n_max = v.n_max();
    FockVector::from_fn(n_max, |n| if n < n_max { (n as f64 + 1.0).sqrt() * v.amplitudes[n + 1] } else { C64::new(0.0, 0.0) })
}

/// `a† v`. The top component of `v` would leave the space, so its mass must
/// be below `tail_tolerance`.
pub fn apply_create(v: &FockVector, tail_tolerance: f64) -> Result<FockVector> {
    let n_max = v.n_max();
    let tail = v.amplitudes[n_max].norm_sqr();
    if tail >= tail_tolerance {
        return Err(NbsError::TruncationOverflow { n_max, tail, tolerance: tail_tolerance });
    }
    Ok(FockVector::from_fn(n_max, |n| if n == 0 { C64::new(0.0, 0.0) } else { (n as f64).sqrt() * v.amplitudes[n - 1] }))
}

/// `N v`.
pub fn apply_number(v: &FockVector) -> FockVector {
    FockVector::from_fn(v.n_max(), |n| n as f64 * v.amplitudes[n])
}

/// `Σ_{n ≥ from_n} |v_n|²`.
pub fn tail_mass(v: &FockVector, from_n: usize) -> f64 {
    v.amplitudes.iter().skip(from_n).map(|c| c.norm_sqr()).sum()
}

/// Photon statistics of `v` by direct summation.
///
/// Expectation values are taken as `⟨v|O|v⟩ / ⟨v|v⟩`, so the small norm
/// deficit left by truncation does not bias the moments.
pub fn oracle_stats(v: &FockVector) -> Result<PhotonStats> {
    let norm = v.norm_sqr();
    if norm == 0.0 {
        return Err(NbsError::Domain("photon statistics of the zero vector".into()));
    }
    let c = &v.amplitudes;
    let mut mean = 0.0;
    let mut second = 0.0;
    let mut exp_a = C64::new(0.0, 0.0);
    let mut exp_a2 = C64::new(0.0, 0.0);
    for n in 0..c.len() {
        let p = c[n].norm_sqr();
        let nf = n as f64;
        mean += nf * p;
        second += nf * nf * p;
        if n + 1 < c.len() {
            exp_a += c[n].conj() * c[n + 1] * (nf + 1.0).sqrt();
        }
        if n + 2 < c.len() {
            exp_a2 += c[n].conj() * c[n + 2] * ((nf + 1.0) * (nf + 2.0)).sqrt();
        }
    }
    mean /= norm;
    second /= norm;
    exp_a /= norm;
    exp_a2 /= norm;
    let mandel_q = if mean == 0.0 {
        MandelQ::Undefined
    } else {
        MandelQ::Value((second - mean * mean - mean) / mean)
    };
    Ok(PhotonStats::assemble(mean, second, mandel_q, exp_a, exp_a2))
}
