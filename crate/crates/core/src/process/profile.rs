//! Parametric wellstream profiles: the composition moves from an oil-like
//! anchor towards a gas-like anchor and partway back, giving a GOR history
//! that rises and then falls.

use std::f64::consts::FRAC_PI_2;

use super::forward::ProfileStep;
use crate::error::{Error, Result};
use crate::fluid::Composition;
use crate::units;

/// Shape and operating conditions of a synthetic profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub oil_anchor: Composition,
    pub gas_anchor: Composition,
    pub steps: usize,
    pub first_day: f64,
    pub day_step: f64,
    /// Fraction of the run at which the gas-like anchor is reached.
    pub peak_at: f64,
    /// Gas-anchor weight at the final step.
    pub end_weight: f64,
    pub p_in: f64,
    pub t_in: f64,
    pub p_out: f64,
}

impl ProfileSpec {
    /// SPE5 initial oil towards a lean, methane-rich stream; 100 steps 28 days
    /// apart, constant 30-bar drop from 96 bara at 66 °C.
    pub fn bundled() -> Self {
        Self {
            oil_anchor: Composition::normalize(&[0.5, 0.03, 0.07, 0.2, 0.15, 0.05])
                .expect("valid anchor"),
            gas_anchor: Composition::normalize(&[0.8, 0.04, 0.05, 0.06, 0.035, 0.015])
                .expect("valid anchor"),
            steps: 100,
            first_day: 1.0,
            day_step: 28.0,
            peak_at: 0.6,
            end_weight: 0.25,
            p_in: units::bar_to_pa(96.0),
            t_in: units::celsius_to_kelvin(66.0),
            p_out: units::bar_to_pa(66.0),
        }
    }

    /// Gas-anchor weight at normalized time `s ∈ [0, 1]`.
    pub fn weight(&self, s: f64) -> f64 {
        if s <= self.peak_at {
            (FRAC_PI_2 * s / self.peak_at).sin().powi(2)
        } else {
            let r = (FRAC_PI_2 * (s - self.peak_at) / (1.0 - self.peak_at)).sin().powi(2);
            1.0 - (1.0 - self.end_weight) * r
        }
    }

    pub fn generate(&self) -> Result<Vec<ProfileStep>> {
        if self.steps == 0 {
            return Err(Error::InvalidInput("profile needs at least one step".into()));
        }
        if self.oil_anchor.len() != self.gas_anchor.len() {
            return Err(Error::InvalidInput("anchor compositions differ in length".into()));
        }
        if !(self.peak_at > 0.0 && self.peak_at < 1.0 && (0.0..=1.0).contains(&self.end_weight)) {
            return Err(Error::InvalidInput("peak_at must lie in (0, 1), end_weight in [0, 1]".into()));
        }
        let last = (self.steps - 1).max(1) as f64;
        (0..self.steps)
            .map(|i| {
                let w = self.weight(i as f64 / last);
                let raw: Vec<f64> = self
                    .oil_anchor
                    .iter()
                    .zip(self.gas_anchor.iter())
                    .map(|(o, g)| (1.0 - w) * o + w * g)
                    .collect();
                Ok(ProfileStep {
                    day: self.first_day + self.day_step * i as f64,
                    p_in: self.p_in,
                    t_in: self.t_in,
                    p_out: self.p_out,
                    z: Composition::normalize(&raw)?,
                })
            })
            .collect()
    }
}
