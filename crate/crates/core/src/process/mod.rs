//! Unit operations: seed recombination, isenthalpic choke, surface separator
//! train and GOR at standard conditions.

pub mod forward;
pub mod profile;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eos::{LiquidVolumeMethod, PengRobinson};
use crate::equilibrium::{ph_flash, pt_flash, PhaseEquilibrium, PhaseState};
use crate::error::{Error, Result};
use crate::fluid::Composition;
use crate::units;

pub use forward::{forward_timeseries, ChokeMeasurement, ForwardRun, ForwardStep, ProfileStep};
pub use profile::ProfileSpec;

/// Molar mix `z = f_g·y + (1 − f_g)·x`.
pub fn recombine(oil: &Composition, gas: &Composition, f_g: f64) -> Result<Composition> {
    if !(0.0..=1.0).contains(&f_g) {
        return Err(Error::InvalidInput(format!("gas fraction {f_g} outside [0, 1]")));
    }
    if oil.len() != gas.len() {
        return Err(Error::InvalidInput("oil and gas compositions differ in length".into()));
    }
    if f_g == 0.0 {
        return Ok(oil.clone());
    }
    if f_g == 1.0 {
        return Ok(gas.clone());
    }
    let mixed: Vec<f64> = oil
        .iter()
        .zip(gas.iter())
        .map(|(x, y)| f_g * y + (1.0 - f_g) * x)
        .collect();
    Composition::normalize(&mixed)
}

/// Inlet and outlet states of an isenthalpic choke expansion.
#[derive(Debug, Clone)]
pub struct ChokeExpansion {
    pub t_out: f64,
    /// Conserved molar enthalpy, J/mol.
    pub enthalpy: f64,
    pub inlet: PhaseEquilibrium,
    pub outlet: PhaseEquilibrium,
}

/// Expands `z` from `(p_in, t_in)` to `p_out` at constant enthalpy.
pub fn choke_expand(
    model: &PengRobinson,
    z: &Composition,
    p_in: f64,
    t_in: f64,
    p_out: f64,
) -> Result<ChokeExpansion> {
    if !(p_out > 0.0 && p_out <= p_in) {
        return Err(Error::InvalidInput(format!(
            "choke outlet pressure {p_out} Pa must be positive and not above inlet {p_in} Pa"
        )));
    }
    let inlet = pt_flash(model, z, t_in, p_in)?;
    let enthalpy = inlet.enthalpy(model)?;
    let (t_out, outlet) = ph_flash(model, z, p_out, enthalpy, t_in)?;
    Ok(ChokeExpansion {
        t_out,
        enthalpy,
        inlet,
        outlet,
    })
}

/// Pressure and temperature of one separation stage, SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub pressure: f64,
    pub temperature: f64,
}

impl Stage {
    pub fn from_bara_celsius(p_bara: f64, t_c: f64) -> Self {
        Self {
            pressure: units::bar_to_pa(p_bara),
            temperature: units::celsius_to_kelvin(t_c),
        }
    }
}

/// Surface process: separator stages followed by a flash to standard conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorTrain {
    pub stages: Vec<Stage>,
    pub standard: Stage,
    pub liquid_volume: LiquidVolumeMethod,
}

impl Default for SeparatorTrain {
    /// 20 bara / 50 °C, 4 bara / 40 °C, standard conditions 1.01325 bara / 15 °C.
    fn default() -> Self {
        Self {
            stages: vec![
                Stage::from_bara_celsius(20.0, 50.0),
                Stage::from_bara_celsius(4.0, 40.0),
            ],
            standard: Stage::from_bara_celsius(1.01325, 15.0),
            liquid_volume: LiquidVolumeMethod::default(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StageRecord {
    p_bara: f64,
    t_celsius: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    stages: Vec<StageRecord>,
    standard: StageRecord,
    #[serde(default)]
    liquid_volume: LiquidVolumeMethod,
}

impl SeparatorTrain {
    pub fn new(
        stages: Vec<Stage>,
        standard: Stage,
        liquid_volume: LiquidVolumeMethod,
    ) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidInput("separator train has no stages".into()));
        }
        let all = stages.iter().chain(std::iter::once(&standard));
        if all.clone().any(|s| !(s.pressure > 0.0 && s.temperature > 0.0)) {
            return Err(Error::InvalidInput("stage pressures and temperatures must be positive".into()));
        }
        let pressures: Vec<f64> = all.map(|s| s.pressure).collect();
        if pressures.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput(
                "stage pressures must strictly decrease down to standard conditions".into(),
            ));
        }
        Ok(Self {
            stages,
            standard,
            liquid_volume,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let f: TrainFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let stage = |r: &StageRecord| Stage::from_bara_celsius(r.p_bara, r.t_celsius);
        Self::new(
            f.stages.iter().map(stage).collect(),
            stage(&f.standard),
            f.liquid_volume,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_json_str(&text)
    }
}

/// Stock-tank oil and total surface gas of a wellstream.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceStreams {
    /// Stock-tank oil `x`.
    pub oil: Composition,
    /// Combined gas of all stages including the standard-conditions flash, `y`.
    /// Equals `oil` when no gas is released.
    pub gas: Composition,
    /// Gas moles per mole of wellstream.
    pub f_g: f64,
    /// Sm³ gas per Sm³ oil.
    pub gor: f64,
    /// m³/mol at standard conditions.
    pub oil_molar_volume: f64,
    /// m³/mol at standard conditions.
    pub gas_molar_volume: f64,
    pub liquid_volume: LiquidVolumeMethod,
}

/// Runs `z` through the stages and a final flash at standard conditions.
pub fn separator_train(
    model: &PengRobinson,
    z: &Composition,
    train: &SeparatorTrain,
) -> Result<SurfaceStreams> {
    let n = z.len();
    let mut liquid = z.clone();
    let mut liquid_moles = 1.0;
    let mut gas_moles = vec![0.0; n];

    for stage in train.stages.iter().chain(std::iter::once(&train.standard)) {
        let eq = pt_flash(model, &liquid, stage.temperature, stage.pressure)?;
        match eq.state {
            PhaseState::SinglePhaseLiquid => {}
            PhaseState::SinglePhaseVapor => {
                for (g, x) in gas_moles.iter_mut().zip(liquid.iter()) {
                    *g += liquid_moles * x;
                }
                liquid_moles = 0.0;
                break;
            }
            PhaseState::TwoPhase => {
                for (g, y) in gas_moles.iter_mut().zip(eq.y.iter()) {
                    *g += liquid_moles * eq.beta * y;
                }
                liquid_moles *= 1.0 - eq.beta;
                liquid = eq.x;
            }
        }
    }
    if liquid_moles <= 0.0 {
        return Err(Error::InfiniteGor);
    }

    let std_t = train.standard.temperature;
    let std_p = train.standard.pressure;
    let f_g = 1.0 - liquid_moles;
    let oil = liquid;
    let oil_molar_volume =
        model.liquid_molar_volume(oil.as_slice(), std_t, std_p, train.liquid_volume)?;
    let total_gas: f64 = gas_moles.iter().sum();
    let (gas, gas_molar_volume, gor) = if total_gas > 0.0 {
        let gas = Composition::normalize(&gas_moles)?;
        let vg = model.vapor_molar_volume(gas.as_slice(), std_t, std_p)?;
        let gor = f_g * vg / (liquid_moles * oil_molar_volume);
        (gas, vg, gor)
    } else {
        (oil.clone(), f64::NAN, 0.0)
    };
    Ok(SurfaceStreams {
        oil,
        gas,
        f_g,
        gor,
        oil_molar_volume,
        gas_molar_volume,
        liquid_volume: train.liquid_volume,
    })
}
