//! Ladder-operator formalism for states living in the even or odd half of
//! Fock space.
//!
//! A state `Σ C_e(n)|2n⟩` is annihilated by `N - f(N) a†²` with
//! `f(N) = sqrt(N/(N-1)) C_e(N/2) / C_e(N/2 - 1)`, and the operators
//! `A₊ = f(N) a†²`, `A₋ = A₊†` close a generally deformed oscillator algebra
//! with structure function `S(N) = N² C_e²(N/2) / C_e²(N/2 - 1)`. The odd
//! case is the same with `N - 1` in place of `N`.
//!
//! `A₊` adds two photons, so the deformed-oscillator relations close on the
//! pair number `K = (N - p)/2` (`p` the parity): `[K, A±] = ±A±`,
//! `A₊A₋ = S(N)`, `A₋A₊ = S(N + 2)`. For complex coefficient ratios `f` is
//! complex and `A₊A₋` equals `|f(N)|² N(N-1)`, which coincides with the
//! literal `S(N)` only when the squared ratio is real. Both are exposed.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{NbsError, Result};
use crate::fock::{apply_annihilate, FockVector, TruncationPolicy};
use crate::states::{even_nbs, odd_nbs, NbsParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Coefficients `C(n)` of `Σ C(n) |2n + p⟩`, for `n = 0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParitySequence {
    pub parity: Parity,
    pub coeffs: Vec<C64>,
}

impl ParitySequence {
    pub fn new(parity: Parity, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(NbsError::Domain("a parity sequence needs at least one coefficient".into()));
        }
        Ok(ParitySequence { parity, coeffs })
    }

    pub fn from_fn<F: FnMut(usize) -> C64>(parity: Parity, len: usize, f: F) -> Result<Self> {
        ParitySequence::new(parity, (0..len).map(f).collect())
    }

    /// Reads `C(n) = v_{2n + p}` off a Fock vector.
    pub fn from_fock(v: &FockVector, parity: Parity) -> Result<Self> {
        let p = parity.offset();
        if v.n_max() < p {
            return Err(NbsError::Domain("vector too short for an odd sequence".into()));
        }
        let coeffs = v.amplitudes().iter().skip(p).step_by(2).copied().collect();
        ParitySequence::new(parity, coeffs)
    }

    /// Largest photon number carried by the sequence.
    pub fn n_max(&self) -> usize {
        2 * (self.coeffs.len() - 1) + self.parity.offset()
    }

    /// The state `Σ C(n) |2n + p⟩` on `0..=n_max()`.
    pub fn realize(&self) -> FockVector {
        let p = self.parity.offset();
        let mut v = FockVector::zeros(self.n_max()).into_amplitudes();
        for (n, c) in self.coeffs.iter().enumerate() {
            v[2 * n + p] = *c;
        }
        FockVector::new(v)
    }

    /// Index `j` into `coeffs` for photon number `n` of matching parity.
    fn index_of(&self, n: usize) -> Option<usize> {
        let p = self.parity.offset();
        if n < p || !(n - p).is_multiple_of(2) {
            return None;
        }
        let j = (n - p) / 2;
        (j < self.coeffs.len()).then_some(j)
    }
}

/// `f(N)` and `S(N)` derived from a parity sequence, stored through the
/// coefficient ratios `r(j) = C(j) / C(j - 1)`, `j ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFunction {
    pub parity: Parity,
    ratios: Vec<C64>,
}

impl StructureFunction {
    fn ratio_at(&self, n: usize) -> Result<(C64, f64)> {
        let p = self.parity.offset();
        // f, S are defined on N = 2j + p with j ≥ 1
        if n < 2 + p || !(n - p).is_multiple_of(2) {
            return Err(NbsError::OutsideSupport { n });
        }
        let j = (n - p) / 2;
        let r = *self.ratios.get(j - 1).ok_or(NbsError::OutsideSupport { n })?;
        Ok((r, n as f64))
    }

    /// Largest `N` at which `f` and `S` are defined.
    pub fn max_n(&self) -> usize {
        2 * self.ratios.len() + self.parity.offset()
    }

    /// `f(N)`: `sqrt(N/(N-1)) r` (even) or `sqrt((N-1)/N) r` (odd).
    pub fn f(&self, n: usize) -> Result<C64> {
        let (r, nf) = self.ratio_at(n)?;
        let pre = match self.parity {
            Parity::Even => (nf / (nf - 1.0)).sqrt(),
            Parity::Odd => ((nf - 1.0) / nf).sqrt(),
        };
        Ok(pre * r)
    }

    /// `S(N)` as printed: `N² r²` (even) or `(N-1)² r²` (odd).
    pub fn s(&self, n: usize) -> Result<C64> {
        let (r, nf) = self.ratio_at(n)?;
        let lead = match self.parity {
            Parity::Even => nf,
            Parity::Odd => nf - 1.0,
        };
        Ok(lead * lead * r * r)
    }

    /// `|f(N)|² N (N - 1)`, the diagonal of `A₊A₋`.
    pub fn s_hermitian(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        Ok(self.f(n)?.norm_sqr() * nf * (nf - 1.0))
    }
}

fn derive(seq: &ParitySequence, parity: Parity) -> Result<StructureFunction> {
    if seq.parity != parity {
        return Err(NbsError::Domain(format!("expected a {parity:?} sequence, got {:?}", seq.parity)));
    }
    let mut ratios = Vec::with_capacity(seq.coeffs.len().saturating_sub(1));
    for j in 1..seq.coeffs.len() {
        let prev = seq.coeffs[j - 1];
        if prev == C64::new(0.0, 0.0) {
            return Err(NbsError::Pole { index: j - 1 });
        }
        ratios.push(seq.coeffs[j] / prev);
    }
    Ok(StructureFunction { parity, ratios })
}

/// `f(N) = sqrt(N/(N-1)) C_e(N/2) / C_e(N/2 - 1)` on even `N ≥ 2`.
pub fn derive_f_even(seq: &ParitySequence) -> Result<StructureFunction> {
    derive(seq, Parity::Even)
}

/// `f(N) = sqrt((N-1)/N) C_o((N-1)/2) / C_o((N-3)/2)` on odd `N ≥ 3`.
pub fn derive_f_odd(seq: &ParitySequence) -> Result<StructureFunction> {
    derive(seq, Parity::Odd)
}

/// Max-norm residuals of the deformed-oscillator relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdoResiduals {
    /// `[K, A₊] - A₊`
    pub commutator_plus: f64,
    /// `[K, A₋] + A₋`
    pub commutator_minus: f64,
    /// `A₊A₋ - S(N)`
    pub raise_lower: f64,
    /// `A₋A₊ - S(N + 2)`
    pub lower_raise: f64,
    /// `max |S(N) - |f(N)|² N(N-1)|`; zero exactly when `r²` is real.
    pub literal_vs_hermitian: f64,
}

impl GdoResiduals {
    pub fn max(&self) -> f64 {
        self.commutator_plus.max(self.commutator_minus).max(self.raise_lower).max(self.lower_raise)
    }
}

/// Builds `K`, `A₊ = f(N) a†²` and `A₋ = A₊†` as dense matrices on
/// `0..=n_max` and evaluates the algebra relations. The two highest rows are
/// excluded since `A₋A₊` needs levels above the truncation.
pub fn gdo_relations_check(sf: &StructureFunction, seq: &ParitySequence, n_max: usize) -> Result<GdoResiduals> {
    if sf.parity != seq.parity {
        return Err(NbsError::Domain("structure function and sequence have different parity".into()));
    }
    if n_max > sf.max_n() || n_max < 4 {
        return Err(NbsError::Domain(format!("n_max = {n_max} must lie in [4, {}]", sf.max_n())));
    }
    let p = seq.parity.offset();
    let dim = n_max + 1;
    let zero = C64::new(0.0, 0.0);
    let k = DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::new((i as f64 - p as f64) / 2.0, 0.0) } else { zero });
    let mut a_plus = DMatrix::from_element(dim, dim, zero);
    for col in (p..dim).step_by(2) {
        let row = col + 2;
        if row < dim {
            let lift = ((col as f64 + 1.0) * (col as f64 + 2.0)).sqrt();
            a_plus[(row, col)] = sf.f(row)? * lift;
        }
    }
    let a_minus = a_plus.adjoint();

    let comm_plus = &k * &a_plus - &a_plus * &k - &a_plus;
    let comm_minus = &k * &a_minus - &a_minus * &k + &a_minus;
    let raise_lower = &a_plus * &a_minus;
    let lower_raise = &a_minus * &a_plus;

    let s_diag = |n: usize| -> Result<f64> {
        if n < p + 2 || !(n - p).is_multiple_of(2) { Ok(0.0) } else { sf.s_hermitian(n) }
    };
    let rows = n_max - 1;
    let mut res = GdoResiduals {
        commutator_plus: 0.0,
        commutator_minus: 0.0,
        raise_lower: 0.0,
        lower_raise: 0.0,
        literal_vs_hermitian: 0.0,
    };
    for i in 0..rows {
        for j in 0..dim {
            res.commutator_plus = res.commutator_plus.max(comm_plus[(i, j)].norm());
            res.commutator_minus = res.commutator_minus.max(comm_minus[(i, j)].norm());
            let diag_rl = if i == j { s_diag(i)? } else { 0.0 };
            let diag_lr = if i == j && i % 2 == p % 2 { s_diag(i + 2)? } else { 0.0 };
            // scale by the size of S so large structure functions compare relatively
            let scale_rl = diag_rl.abs().max(1.0);
            let scale_lr = diag_lr.abs().max(1.0);
            res.raise_lower = res.raise_lower.max((raise_lower[(i, j)] - diag_rl).norm() / scale_rl);
            res.lower_raise = res.lower_raise.max((lower_raise[(i, j)] - diag_lr).norm() / scale_lr);
        }
        if i >= p + 2 && (i - p).is_multiple_of(2) {
            let lit = sf.s(i)?;
            res.literal_vs_hermitian = res.literal_vs_hermitian.max((lit - sf.s_hermitian(i)?).norm() / lit.norm().max(1.0));
        }
    }
    Ok(res)
}

/// `‖(N - p - f(N) a†²) v‖` for the realized sequence: the annihilation
/// condition `[N - f(N) a†²]|·⟩_e = 0`, or `[(N - 1) - f(N) a†²]|·⟩_o = 0`.
pub fn annihilation_residual(sf: &StructureFunction, seq: &ParitySequence) -> Result<f64> {
    let v = seq.realize();
    let p = seq.parity.offset();
    let mut sum = 0.0;
    for n in 0..=v.n_max() {
        let lhs = (n as f64 - p as f64) * v.get(n);
        let rhs = if n >= p + 2 && (n - p).is_multiple_of(2) {
            sf.f(n)? * ((n as f64) * (n as f64 - 1.0)).sqrt() * v.get(n - 2)
        } else {
            C64::new(0.0, 0.0)
        };
        sum += (lhs - rhs).norm_sqr();
    }
    Ok(sum.sqrt())
}

/// Residual of `a² v = sqrt((N+1)(N+2)) C(next)/C(current) v` as a
/// componentwise identity below the top two rows.
pub fn a2_ladder_residual(seq: &ParitySequence) -> Result<f64> {
    let v = seq.realize();
    let a2v = apply_annihilate(&apply_annihilate(&v));
    let mut worst: f64 = 0.0;
    for n in 0..v.n_max().saturating_sub(1) {
        let rhs = match seq.index_of(n) {
            Some(j) if j + 1 < seq.coeffs.len() => {
                let cur = seq.coeffs[j];
                if cur == C64::new(0.0, 0.0) {
                    return Err(NbsError::Pole { index: j });
                }
                ((n as f64 + 1.0) * (n as f64 + 2.0)).sqrt() * seq.coeffs[j + 1] / cur * v.get(n)
            }
            _ => C64::new(0.0, 0.0),
        };
        worst = worst.max((a2v.get(n) - rhs).norm());
    }
    Ok(worst)
}

/// `‖a² v - λ v‖` over rows `0..=n_max-2`.
pub fn a2_eigen_residual(v: &FockVector, eigenvalue: C64) -> f64 {
    let a2v = apply_annihilate(&apply_annihilate(v));
    (0..v.n_max().saturating_sub(1)).map(|n| (a2v.get(n) - eigenvalue * v.get(n)).norm_sqr()).sum::<f64>().sqrt()
}

/// Residuals of the two forms of the NBS eigenvalue equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    /// `‖a² v - sqrt((M+N)(M+N+1)) η_C² v‖`
    pub direct: f64,
    /// `‖((M+N)(M+N+1))^{-1/2} a² v - η_C² v‖`
    pub normalized: f64,
}

impl EigenResidual {
    pub fn max(&self) -> f64 {
        self.direct.max(self.normalized)
    }
}

fn nbs_eigen_residual(v: &FockVector, params: &NbsParams) -> EigenResidual {
    let a2v = apply_annihilate(&apply_annihilate(v));
    let eta_c2 = params.eta_c() * params.eta_c();
    let m = params.m as f64;
    let mut direct = 0.0;
    let mut normalized = 0.0;
    for n in 0..v.n_max().saturating_sub(1) {
        let nf = n as f64;
        let g = ((m + nf) * (m + nf + 1.0)).sqrt();
        direct += (a2v.get(n) - g * eta_c2 * v.get(n)).norm_sqr();
        normalized += (a2v.get(n) / g - eta_c2 * v.get(n)).norm_sqr();
    }
    EigenResidual { direct: direct.sqrt(), normalized: normalized.sqrt() }
}

/// Eigenvalue equation residuals for the even NBS.
pub fn eigen_residual_even(params: &NbsParams, policy: &TruncationPolicy) -> Result<EigenResidual> {
    Ok(nbs_eigen_residual(&even_nbs(params, policy)?, params))
}

/// Eigenvalue equation residuals for the odd NBS.
pub fn eigen_residual_odd(params: &NbsParams, policy: &TruncationPolicy) -> Result<EigenResidual> {
    Ok(nbs_eigen_residual(&odd_nbs(params, policy)?, params))
}

/// `F(N) a² v = η_C² v` with `F(N) = ((M+N)(M+N+1))^{-1/2}`, checked on
/// both the even and the odd NBS; returns the larger residual.
pub fn nonlinear_coherent_check(params: &NbsParams, policy: &TruncationPolicy) -> Result<f64> {
    let even = eigen_residual_even(params, policy)?.normalized;
    let odd = eigen_residual_odd(params, policy)?.normalized;
    Ok(even.max(odd))
}
