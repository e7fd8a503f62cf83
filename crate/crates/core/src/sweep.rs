//! Parameter sweeps over η for the Mandel-Q and squeezing curves, the
//! photon-number distribution dump, and their CSV serialization.
//!
//! Grid points are evaluated in parallel and collected back in grid order,
//! so the output does not depend on thread scheduling.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NbsError, Result};
use crate::fock::TruncationPolicy;
use crate::states::{check_eta, photon_distribution, superposition, NbsParams};
use crate::stats::{q_closed, quadrature_variances_closed, MandelQ};

pub const CSV_HEADER: &str = "eta,phi,M,quantity,value";

/// `η` from `start` to `stop` inclusive in steps of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for EtaGrid {
    fn default() -> Self {
        EtaGrid { start: 0.02, stop: 0.95, step: 0.01 }
    }
}

impl EtaGrid {
    pub fn validate(&self) -> Result<()> {
        check_eta(self.start)?;
        check_eta(self.stop)?;
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(NbsError::InvalidParameter { name: "grid_step", value: self.step, reason: "must be positive" });
        }
        if self.stop < self.start {
            return Err(NbsError::Domain(format!("grid stop {} is below start {}", self.stop, self.start)));
        }
        Ok(())
    }

    /// The grid points, strictly increasing. Each point is `start + i step`
    /// rounded to 12 decimals so `0.02 + 3 * 0.01` prints as `0.05`.
    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| {
                let eta = self.start + i as f64 * self.step;
                (eta * 1e12).round() / 1e12
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    MandelQ,
    VarX2,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::MandelQ => "mandel_q",
            Quantity::VarX2 => "var_x2",
        }
    }
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub eta: f64,
    pub phi: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub quantity: Quantity,
    pub value: MandelQ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub m: u32,
    pub theta: f64,
    pub phis: Vec<f64>,
    pub grid: EtaGrid,
}

impl SweepConfig {
    /// Mandel Q against η at `M = 30` for `φ ∈ {0, π/2, 3π/4, π}`.
    pub fn fig1() -> Self {
        SweepConfig { m: 30, theta: 0.0, phis: default_phis(), grid: EtaGrid::default() }
    }

    /// `⟨ΔX₂²⟩` against η at `M = 50`, same phases.
    pub fn fig2() -> Self {
        SweepConfig { m: 50, ..SweepConfig::fig1() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phis.is_empty() {
            return Err(NbsError::Domain("no phases to sweep".into()));
        }
        for &phi in &self.phis {
            NbsParams::new(self.m, self.grid.start, self.theta, phi)?;
        }
        self.grid.validate()
    }
}

pub fn default_phis() -> Vec<f64> {
    vec![0.0, FRAC_PI_2, 0.75 * PI, PI]
}

/// Evaluates `quantity` at every `(φ, η)` grid point, ordered by `φ` (as
/// listed) and then increasing `η`.
pub fn sweep(config: &SweepConfig, quantity: Quantity) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let etas = config.grid.points()?;
    let points: Vec<(f64, f64)> = config.phis.iter().flat_map(|&phi| etas.iter().map(move |&eta| (phi, eta))).collect();
    points
        .par_iter()
        .map(|&(phi, eta)| {
            let value = match quantity {
                Quantity::MandelQ => q_closed(phi, eta, config.m)?,
                Quantity::VarX2 => quadrature_variances_closed(phi, eta, config.theta, config.m)?.1,
            };
            Ok(SweepRecord { eta, phi, m: config.m, quantity, value: MandelQ::Value(value) })
        })
        .collect()
}

pub fn fig1(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    sweep(config, Quantity::MandelQ)
}

pub fn fig2(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    sweep(config, Quantity::VarX2)
}

/// `P(n)` of the superposition for `n = 0..=n_max`, with `n_max` chosen by
/// the truncation policy.
pub fn pn_rows(params: &NbsParams, policy: &TruncationPolicy) -> Result<Vec<(usize, f64)>> {
    let v = superposition(params, policy)?;
    Ok(photon_distribution(&v).into_iter().enumerate().collect())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_value(v: MandelQ) -> String {
    match v {
        MandelQ::Value(q) => format_float(q),
        MandelQ::Undefined => "undefined".to_string(),
    }
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            format_float(r.eta),
            format_float(r.phi),
            r.m,
            r.quantity.name(),
            format_value(r.value)
        )?;
    }
    w.flush()
}

pub fn write_pn_csv<W: Write>(rows: &[(usize, f64)], mut w: W) -> io::Result<()> {
    writeln!(w, "n,probability")?;
    for &(n, p) in rows {
        writeln!(w, "{n},{}", format_float(p))?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_points() {
        let pts = EtaGrid::default().points().unwrap();
        assert_eq!(pts.len(), 94);
        assert_eq!(pts[0], 0.02);
        assert_eq!(pts[3], 0.05);
        assert_eq!(*pts.last().unwrap(), 0.95);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn grid_rejects_bad_ranges() {
        assert!(EtaGrid { start: 0.0, stop: 0.5, step: 0.1 }.points().is_err());
        assert!(EtaGrid { start: 0.1, stop: 1.0, step: 0.1 }.points().is_err());
        assert!(EtaGrid { start: 0.5, stop: 0.1, step: 0.1 }.points().is_err());
        assert!(EtaGrid { start: 0.1, stop: 0.5, step: 0.0 }.points().is_err());
    }

    #[test]
    fn fig1_rows_ordered_and_limits() {
        let recs = fig1(&SweepConfig::fig1()).unwrap();
        assert_eq!(recs.len(), 4 * 94);
        let first_pi = recs.iter().find(|r| r.phi == PI).unwrap();
        assert!((first_pi.value.value().unwrap() + 1.0).abs() < 0.05);
        assert!((recs[0].value.value().unwrap() - 1.0).abs() < 0.05);
        for chunk in recs.chunks(94) {
            assert!(chunk.windows(2).all(|w| w[1].eta > w[0].eta && w[1].phi == w[0].phi));
        }
    }

    #[test]
    fn csv_layout() {
        let recs = vec![
            SweepRecord { eta: 0.5, phi: 0.0, m: 30, quantity: Quantity::MandelQ, value: MandelQ::Value(0.1) },
            SweepRecord { eta: 0.5, phi: 0.0, m: 30, quantity: Quantity::MandelQ, value: MandelQ::Undefined },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "5.0000000000000000e-1,0.0000000000000000e0,30,mandel_q,1.0000000000000001e-1");
        assert!(lines[2].ends_with(",undefined"));
        let back: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn pn_rows_sum_to_one() {
        let params = NbsParams::new(10, 0.6, 0.0, 0.0).unwrap();
        let rows = pn_rows(&params, &TruncationPolicy::default()).unwrap();
        let total: f64 = rows.iter().map(|r| r.1).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(rows.iter().filter(|r| r.0 % 2 == 1).all(|r| r.1 == 0.0));
    }
}
