//! Annealing schedules.
//!
//! The natural parametrization maps a uniform grid in `v ∈ [v_a, v_b]` to an
//! interpolation parameter `s ∈ [0, 1]` that moves slowly where the gap lower
//! bound `Δ*(s) = (1 − s)² + (s/κ)²` is small.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which randomized protocol a schedule (or instance) targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Algorithm {
    /// Evolve under `H(s)`; random times up to `2π/Δ*`.
    One,
    /// Evolve under the gap-amplified `H′(s)`; random times up to `2π/√Δ*`.
    Two,
}

impl TryFrom<u8> for Algorithm {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Algorithm::One),
            2 => Ok(Algorithm::Two),
            other => Err(format!("algorithm must be 1 or 2, got {other}")),
        }
    }
}

impl From<Algorithm> for u8 {
    fn from(a: Algorithm) -> u8 {
        match a {
            Algorithm::One => 1,
            Algorithm::Two => 2,
        }
    }
}

/// How grid points are placed in `s`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Uniform in `v`, mapped through `s(v)`.
    #[default]
    Natural,
    /// `s_j = j/q`; comparison baseline.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub v: f64,
    pub s: f64,
    pub gap_bound: f64,
    pub t_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kappa: f64,
    pub algorithm: Algorithm,
    pub placement: Placement,
    pub steps: Vec<ScheduleStep>,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_nan() || kappa < 1.0 {
        return Err(Error::InvalidKappa(kappa));
    }
    Ok(())
}

/// `√(1+κ²) / (√2 κ)`, the rate constant of `s(v)`.
fn rate(kappa: f64) -> f64 {
    (1.0 + kappa * kappa).sqrt() / (std::f64::consts::SQRT_2 * kappa)
}

/// Domain `[v_a, v_b]` of the natural parametrization.
pub fn schedule_bounds(kappa: f64) -> Result<(f64, f64)> {
    check_kappa(kappa)?;
    let root = (1.0 + kappa * kappa).sqrt();
    // κ√(1+κ²) − κ² rewritten as κ/(√(1+κ²) + κ) to avoid cancellation.
    let lower_arg = kappa / (root + kappa);
    let c = 1.0 / rate(kappa);
    Ok((c * lower_arg.ln(), c * (root + 1.0).ln()))
}

/// `s(v) = (e^{cv} + 2κ² − κ² e^{−cv}) / (2(1 + κ²))` with `c = √(1+κ²)/(√2κ)`.
pub fn s_of_v(v: f64, kappa: f64) -> Result<f64> {
    let (va, vb) = schedule_bounds(kappa)?;
    let slack = 1e-12 * (1.0 + va.abs().max(vb.abs()));
    if !(v >= va - slack && v <= vb + slack) {
        return Err(Error::OutOfDomain {
            what: "v",
            value: v,
            lo: va,
            hi: vb,
        });
    }
    let k2 = kappa * kappa;
    let x = v * rate(kappa);
    let s = (x.exp() + 2.0 * k2 - k2 * (-x).exp()) / (2.0 * (1.0 + k2));
    Ok(s.clamp(0.0, 1.0))
}

/// Lower bound `Δ*(s) = (1 − s)² + (s/κ)²` on the gap of `H(s)`.
pub fn gap_bound(s: f64, kappa: f64) -> f64 {
    (1.0 - s).powi(2) + (s / kappa).powi(2)
}

/// Upper end of the random evolution time at a grid point.
pub fn t_max(gap_bound: f64, algorithm: Algorithm) -> f64 {
    match algorithm {
        Algorithm::One => 2.0 * PI / gap_bound,
        Algorithm::Two => 2.0 * PI / gap_bound.sqrt(),
    }
}

/// Builds a `q`-step grid evaluated at right endpoints, so the last step
/// always sits exactly at `s = 1`.
pub fn build_grid(
    kappa: f64,
    q: usize,
    algorithm: Algorithm,
    placement: Placement,
) -> Result<Schedule> {
    check_kappa(kappa)?;
    if q == 0 {
        return Err(Error::OutOfDomain {
            what: "steps",
            value: 0.0,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let (va, vb) = schedule_bounds(kappa)?;
    let mut steps = Vec::with_capacity(q);
    for j in 1..=q {
        let (v, s) = if j == q {
            match placement {
                Placement::Natural => (vb, 1.0),
                Placement::Linear => (1.0, 1.0),
            }
        } else {
            match placement {
                Placement::Natural => {
                    let v = va + j as f64 * (vb - va) / q as f64;
                    (v, s_of_v(v, kappa)?)
                }
                Placement::Linear => {
                    let s = j as f64 / q as f64;
                    (s, s)
                }
            }
        };
        let g = gap_bound(s, kappa);
        steps.push(ScheduleStep {
            v,
            s,
            gap_bound: g,
            t_max: t_max(g, algorithm),
        });
    }
    Ok(Schedule {
        kappa,
        algorithm,
        placement,
        steps,
    })
}
