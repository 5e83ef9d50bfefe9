//! Forward model over a wellstream time profile: choke outlet temperature
//! ("measurement") and surface streams ("truth") per step.

use rayon::prelude::*;

use super::{choke_expand, separator_train, SeparatorTrain, SurfaceStreams};
use crate::eos::PengRobinson;
use crate::error::{Error, Result};
use crate::fluid::Composition;

/// One row of a wellstream profile, SI.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileStep {
    pub day: f64,
    pub p_in: f64,
    pub t_in: f64,
    pub p_out: f64,
    pub z: Composition,
}

/// Pressures and temperatures across the choke, SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChokeMeasurement {
    pub day: f64,
    pub p_in: f64,
    pub t_in: f64,
    pub p_out: f64,
    pub t_out: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardStep {
    pub index: usize,
    pub measurement: ChokeMeasurement,
    pub z: Composition,
    pub truth: SurfaceStreams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepFailure {
    pub index: usize,
    pub day: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForwardRun {
    pub steps: Vec<ForwardStep>,
    pub failures: Vec<StepFailure>,
}

impl ForwardRun {
    pub fn step_by_day(&self, day: f64) -> Option<&ForwardStep> {
        self.steps.iter().find(|s| (s.measurement.day - day).abs() < 1e-9)
    }

    pub fn measurements(&self) -> Vec<ChokeMeasurement> {
        self.steps.iter().map(|s| s.measurement).collect()
    }
}

fn forward_step(
    model: &PengRobinson,
    train: &SeparatorTrain,
    index: usize,
    row: &ProfileStep,
) -> Result<ForwardStep> {
    if row.z.len() != model.len() {
        return Err(Error::InvalidInput(format!(
            "composition has {} entries, fluid has {}",
            row.z.len(),
            model.len()
        )));
    }
    let choke = choke_expand(model, &row.z, row.p_in, row.t_in, row.p_out)?;
    let truth = separator_train(model, &row.z, train)?;
    Ok(ForwardStep {
        index,
        measurement: ChokeMeasurement {
            day: row.day,
            p_in: row.p_in,
            t_in: row.t_in,
            p_out: row.p_out,
            t_out: choke.t_out,
        },
        z: row.z.clone(),
        truth,
    })
}

/// Evaluates every profile row independently (in parallel); failed rows are
/// collected with their index and do not stop the run. Output keeps profile order.
pub fn forward_timeseries(
    model: &PengRobinson,
    profile: &[ProfileStep],
    train: &SeparatorTrain,
) -> ForwardRun {
    let results: Vec<Result<ForwardStep>> = profile
        .par_iter()
        .enumerate()
        .map(|(i, row)| forward_step(model, train, i, row))
        .collect();
    let mut run = ForwardRun::default();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(step) => run.steps.push(step),
            Err(e) => run.failures.push(StepFailure {
                index: i,
                day: profile[i].day,
                message: e.to_string(),
            }),
        }
    }
    run
}
