//! Numerical helpers shared by the state constructors and the closed forms:
//! exact quarter-turn phases, log-space binomials and the stable evaluation
//! of `(1 - x)^{-k} ± cos(phi) (1 + x)^{-k}`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use statrs::function::factorial::{ln_binomial, ln_factorial};

/// Number of quarter turns in `angle` if it sits within a few ulps of an
/// integer multiple of pi/2.
pub fn quarter_turns(angle: f64) -> Option<i64> {
    let q = angle / FRAC_PI_2;
    let r = q.round();
    if (q - r).abs() <= 16.0 * f64::EPSILON * r.abs().max(1.0) {
        Some(r as i64)
    } else {
        None
    }
}

fn quarter_cos_sin(q: i64) -> (f64, f64) {
    match q.rem_euclid(4) {
        0 => (1.0, 0.0),
        1 => (0.0, 1.0),
        2 => (-1.0, 0.0),
        _ => (0.0, -1.0),
    }
}

/// `(cos, sin)` of `angle`, exact at multiples of pi/2.
pub fn cos_sin(angle: f64) -> (f64, f64) {
    match quarter_turns(angle) {
        Some(q) => quarter_cos_sin(q),
        None => (angle.cos(), angle.sin()),
    }
}

/// `exp(i angle)`, exact at multiples of pi/2.
pub fn unit(angle: f64) -> C64 {
    let (c, s) = cos_sin(angle);
    C64::new(c, s)
}

/// `exp(i n angle)` for `n = 0..=n_max`. Quarter-turn angles use integer
/// arithmetic so the phases stay exact for every `n`.
pub fn phase_powers(angle: f64, n_max: usize) -> Vec<C64> {
    match quarter_turns(angle) {
        Some(q) => (0..=n_max as i64)
            .map(|n| {
                let (c, s) = quarter_cos_sin((q.rem_euclid(4) * (n % 4)) % 4);
                C64::new(c, s)
            })
            .collect(),
        None => (0..=n_max).map(|n| C64::from_polar(1.0, n as f64 * angle)).collect(),
    }
}

/// `(-i)^k`.
pub fn neg_i_pow(k: u64) -> C64 {
    let (c, s) = quarter_cos_sin(-((k % 4) as i64));
    C64::new(c, s)
}

/// `ln binom(M + n - 1, n)`, the log weight of the negative binomial law.
pub fn ln_nb_binomial(m: u32, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    ln_binomial(m as u64 + n - 1, n)
}

pub fn ln_fact(n: u64) -> f64 {
    ln_factorial(n)
}

/// Relative phase factor `cos(phi)` together with the cancellation-free
/// complements `1 + cos(phi)` and `1 - cos(phi)`.
#[derive(Debug, Clone, Copy)]
pub struct CosPhase {
    pub cos: f64,
    pub sin: f64,
    pub one_plus: f64,
    pub one_minus: f64,
}

impl CosPhase {
    pub fn new(phi: f64) -> Self {
        let (cos, sin) = cos_sin(phi);
        let (ch, sh) = cos_sin(0.5 * phi);
        CosPhase { cos, sin, one_plus: 2.0 * ch * ch, one_minus: 2.0 * sh * sh }
    }
}

/// A positive quantity stored as `exp(ln_scale) * factor`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled {
    pub ln_scale: f64,
    pub factor: f64,
}

impl Scaled {
    pub fn value(self) -> f64 {
        self.ln_scale.exp() * self.factor
    }

    pub fn ln(self) -> f64 {
        self.ln_scale + self.factor.ln()
    }

    /// `self / other` without forming either value.
    pub fn ratio(self, other: Scaled) -> f64 {
        (self.ln_scale - other.ln_scale).exp() * self.factor / other.factor
    }
}

/// `(1 - x)^{-k} + sign * cos(phi) * (1 + x)^{-k}` for `0 < x < 1`.
///
/// Factored as `(1 - x)^{-k} [1 + s e^{-y}]` with `y = 2 k atanh(x)`; when
/// `s = sign * cos(phi)` is negative the bracket is rewritten as
/// `(1 + s) + s expm1(-y)` so both terms are non-negative.
pub fn branch_sum(x: f64, k: f64, sign: f64, phase: &CosPhase) -> Scaled {
    let ln_scale = -k * (-x).ln_1p();
    let y = 2.0 * k * x.atanh();
    Scaled { ln_scale, factor: one_plus_cos_exp(phase, sign, y) }
}

/// `1 + sign * cos(phi) * exp(-y)` for `y >= 0`, free of cancellation when
/// `sign * cos(phi)` is close to `-1` and `y` is small.
pub fn one_plus_cos_exp(phase: &CosPhase, sign: f64, y: f64) -> f64 {
    let s = sign * phase.cos;
    if s >= 0.0 {
        1.0 + s * (-y).exp()
    } else {
        let one_plus_s = if sign > 0.0 { phase.one_plus } else { phase.one_minus };
        one_plus_s + s * (-y).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quarter_turns_snap() {
        assert_eq!(quarter_turns(PI), Some(2));
        assert_eq!(quarter_turns(2.0 * PI), Some(4));
        assert_eq!(quarter_turns(-PI / 2.0), Some(-1));
        assert_eq!(quarter_turns(0.7), None);
        assert_eq!(quarter_turns(3.0 * PI / 4.0), None);
        assert_eq!(cos_sin(PI), (-1.0, 0.0));
        assert_eq!(cos_sin(PI / 2.0), (0.0, 1.0));
    }

    #[test]
    fn neg_i_powers() {
        assert_eq!(neg_i_pow(0), C64::new(1.0, 0.0));
        assert_eq!(neg_i_pow(1), C64::new(0.0, -1.0));
        assert_eq!(neg_i_pow(2), C64::new(-1.0, 0.0));
        assert_eq!(neg_i_pow(3), C64::new(0.0, 1.0));
    }

    #[test]
    fn nb_binomial_small_values() {
        // binom(M + n - 1, n) with M = 3, n = 4 is binom(6, 4) = 15
        assert!((ln_nb_binomial(3, 4).exp() - 15.0).abs() < 1e-12);
        assert_eq!(ln_nb_binomial(7, 0), 0.0);
        // M = 1 gives binom(n, n) = 1
        assert!(ln_nb_binomial(1, 50).abs() < 1e-12);
    }

    #[test]
    fn branch_sum_matches_naive() {
        for &phi in &[0.0f64, 0.3, PI / 2.0, 2.0, PI] {
            let phase = CosPhase::new(phi);
            for &x in &[0.05f64, 0.3, 0.81] {
                for &k in &[1.0f64, 5.0, 31.0] {
                    for &sign in &[1.0, -1.0] {
                        let naive = (1.0 - x).powf(-k) + sign * phi.cos() * (1.0 + x).powf(-k);
                        let got = branch_sum(x, k, sign, &phase).value();
                        assert!((got - naive).abs() <= 1e-12 * naive.abs().max(1.0), "{phi} {x} {k} {sign}: {got} vs {naive}");
                    }
                }
            }
        }
    }

    #[test]
    fn branch_sum_small_x_difference() {
        // (1-x)^{-1} - (1+x)^{-1} = 2x / (1 - x^2)
        let x = 1e-9;
        let got = branch_sum(x, 1.0, -1.0, &CosPhase::new(0.0)).value();
        let exact = 2.0 * x / (1.0 - x * x);
        assert!((got - exact).abs() < 1e-15 * exact);
    }
}
