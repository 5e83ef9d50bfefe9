//! Peng-Robinson equation of state.
//!
//! Mixture parameters use van der Waals one-fluid mixing with the fluid's
//! binary interaction coefficients. Heavy components (ω > 0.49) use the
//! extended m(ω) polynomial. Enthalpy is ideal gas (zero at 298.15 K) plus
//! the analytic PR departure.

pub mod costald;
pub mod cubic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::FluidSystem;
use crate::units::GAS_CONSTANT as R;

pub use cubic::compressibility_roots;

const OMEGA_A: f64 = 0.457_235_529;
const OMEGA_B: f64 = 0.077_796_074;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Reference temperature at which every component's ideal-gas enthalpy is zero.
pub const ENTHALPY_REFERENCE_T: f64 = 298.15;

/// A single root with `v/b` below this is labelled liquid.
pub const LIQUID_VOLUME_RATIO: f64 = 1.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    Liquid,
    Vapor,
}

/// Which compressibility root a property call uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootChoice {
    Phase(PhaseLabel),
    /// Lowest Gibbs energy among the physical roots.
    Stable,
}

impl From<PhaseLabel> for RootChoice {
    fn from(p: PhaseLabel) -> Self {
        RootChoice::Phase(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LiquidVolumeMethod {
    /// PR liquid root minus the Peneloux shift `Σ z_i s_i b_i`.
    #[default]
    #[serde(rename = "shifted-pr")]
    ShiftedPengRobinson,
    #[serde(rename = "costald")]
    Costald,
}

impl std::fmt::Display for LiquidVolumeMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LiquidVolumeMethod::ShiftedPengRobinson => "shifted-pr",
            LiquidVolumeMethod::Costald => "costald",
        })
    }
}

/// Smallest root for liquid, largest for vapor.
pub fn select_root(roots: &[f64], phase: PhaseLabel) -> f64 {
    match phase {
        PhaseLabel::Liquid => roots[0],
        PhaseLabel::Vapor => roots[roots.len() - 1],
    }
}

/// Peng-Robinson model bound to a fluid system; per-component constants are precomputed.
#[derive(Debug, Clone)]
pub struct PengRobinson {
    fluid: FluidSystem,
    ac: Vec<f64>,
    b: Vec<f64>,
    m: Vec<f64>,
    one_minus_k: Vec<f64>,
}

/// Mixture parameters at fixed `(z, T, P)`.
#[derive(Debug, Clone)]
pub struct MixtureParams {
    pub temperature: f64,
    pub pressure: f64,
    /// Dimensionless attraction `a·P/(RT)²`.
    pub big_a: f64,
    /// Dimensionless covolume `b·P/(RT)`.
    pub big_b: f64,
    pub a_mix: f64,
    pub b_mix: f64,
    /// `d(a_mix)/dT`.
    pub da_dt: f64,
    /// `a_i·α_i(T)` per component.
    pub a_i: Vec<f64>,
    pub alpha_i: Vec<f64>,
    pub b_i: Vec<f64>,
    /// `Σ_j z_j a_ij`.
    pub a_cross: Vec<f64>,
}

impl MixtureParams {
    pub fn roots(&self) -> Result<Vec<f64>> {
        compressibility_roots(self.big_a, self.big_b)
    }

    /// Dimensionless residual Gibbs energy `G_res/(RT)` on root `z`.
    pub fn reduced_residual_gibbs(&self, z: f64) -> f64 {
        z - 1.0 - (z - self.big_b).ln() - self.big_a * self.log_term_over_b(z)
    }

    /// `ln[(Z + (1+√2)B)/(Z + (1−√2)B)] / (2√2 B)`, with its `B → 0` limit `1/Z`.
    fn log_term_over_b(&self, z: f64) -> f64 {
        let b = self.big_b;
        if b < 1e-12 {
            return 1.0 / z;
        }
        ((z + (1.0 + SQRT2) * b) / (z + (1.0 - SQRT2) * b)).ln() / (2.0 * SQRT2 * b)
    }

    pub fn stable_root(&self, roots: &[f64]) -> f64 {
        roots
            .iter()
            .copied()
            .min_by(|a, b| {
                self.reduced_residual_gibbs(*a)
                    .total_cmp(&self.reduced_residual_gibbs(*b))
            })
            .expect("nonempty root set")
    }

    pub fn choose(&self, roots: &[f64], choice: RootChoice) -> f64 {
        match choice {
            RootChoice::Phase(p) => select_root(roots, p),
            RootChoice::Stable => self.stable_root(roots),
        }
    }

    /// `ln φ_i` on compressibility root `z`.
    pub fn ln_phi(&self, z: f64) -> Vec<f64> {
        let log_term = self.log_term_over_b(z);
        let ln_z_minus_b = (z - self.big_b).ln();
        self.b_i
            .iter()
            .zip(&self.a_cross)
            .map(|(bi, ac)| {
                let br = bi / self.b_mix;
                br * (z - 1.0) - ln_z_minus_b - self.big_a * (2.0 * ac / self.a_mix - br) * log_term
            })
            .collect()
    }

    /// Enthalpy departure `H − H_ig` on root `z`, J/mol.
    pub fn enthalpy_departure(&self, z: f64) -> f64 {
        let t = self.temperature;
        let log_term = self.log_term_over_b(z) * self.big_b / self.b_mix;
        R * t * (z - 1.0) + (t * self.da_dt - self.a_mix) * log_term
    }
}

impl PengRobinson {
    pub fn new(fluid: &FluidSystem) -> Self {
        let n = fluid.len();
        let mut ac = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut m = Vec::with_capacity(n);
        for c in fluid.components() {
            ac.push(OMEGA_A * R * R * c.tc * c.tc / c.pc);
            b.push(OMEGA_B * R * c.tc / c.pc);
            m.push(m_factor(c.omega));
        }
        let one_minus_k = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| 1.0 - fluid.kij(i, j))
            .collect();
        Self {
            fluid: fluid.clone(),
            ac,
            b,
            m,
            one_minus_k,
        }
    }

    pub fn fluid(&self) -> &FluidSystem {
        &self.fluid
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Pure-component covolumes `b_i`, m³/mol.
    pub fn covolumes(&self) -> &[f64] {
        &self.b
    }

    /// `α_i(T)` and `dα_i/dT`.
    pub fn alpha(&self, i: usize, t: f64) -> (f64, f64) {
        let tc = self.fluid.component(i).tc;
        let m = self.m[i];
        let s = 1.0 + m * (1.0 - (t / tc).sqrt());
        (s * s, -m * s / (t * tc).sqrt())
    }

    pub fn mixture_params(&self, z: &[f64], t: f64, p: f64) -> MixtureParams {
        let n = self.len();
        let mut a_i = Vec::with_capacity(n);
        let mut alpha_i = Vec::with_capacity(n);
        let mut da_i = Vec::with_capacity(n);
        for i in 0..n {
            let (alpha, dalpha) = self.alpha(i, t);
            alpha_i.push(alpha);
            a_i.push(self.ac[i] * alpha);
            da_i.push(self.ac[i] * dalpha);
        }
        let sqrt_a: Vec<f64> = a_i.iter().map(|a| a.sqrt()).collect();

        let mut a_cross = vec![0.0; n];
        let mut a_mix = 0.0;
        let mut da_dt = 0.0;
        for i in 0..n {
            let mut cross = 0.0;
            for j in 0..n {
                if z[j] == 0.0 {
                    continue;
                }
                let kk = self.one_minus_k[i * n + j];
                let aij = kk * sqrt_a[i] * sqrt_a[j];
                cross += z[j] * aij;
                if z[i] != 0.0 {
                    // d(√(a_i a_j))/dT = (a_i' a_j + a_i a_j') / (2√(a_i a_j))
                    let daij = kk * (da_i[i] * a_i[j] + a_i[i] * da_i[j]) / (2.0 * sqrt_a[i] * sqrt_a[j]);
                    da_dt += z[i] * z[j] * daij;
                }
            }
            a_cross[i] = cross;
            a_mix += z[i] * cross;
        }
        let b_mix: f64 = z.iter().zip(&self.b).map(|(zi, bi)| zi * bi).sum();
        let rt = R * t;
        MixtureParams {
            temperature: t,
            pressure: p,
            big_a: a_mix * p / (rt * rt),
            big_b: b_mix * p / rt,
            a_mix,
            b_mix,
            da_dt,
            a_i,
            alpha_i,
            b_i: self.b.clone(),
            a_cross,
        }
    }

    pub fn z_factor(&self, z: &[f64], t: f64, p: f64, choice: RootChoice) -> Result<f64> {
        let mp = self.mixture_params(z, t, p);
        let roots = mp.roots()?;
        Ok(mp.choose(&roots, choice))
    }

    /// `ln φ_i` for every component; entries of absent components are still finite.
    pub fn ln_fugacity_coefficients(
        &self,
        z: &[f64],
        t: f64,
        p: f64,
        choice: RootChoice,
    ) -> Result<Vec<f64>> {
        let mp = self.mixture_params(z, t, p);
        let roots = mp.roots()?;
        Ok(mp.ln_phi(mp.choose(&roots, choice)))
    }

    fn check_cp_range(&self, z: &[f64], t: f64) -> Result<()> {
        for (c, &zi) in self.fluid.components().iter().zip(z) {
            if zi > 0.0 && !c.cp_ig.covers(t) {
                return Err(Error::TemperatureOutOfRange {
                    component: c.name.clone(),
                    temperature: t,
                    t_min: c.cp_ig.t_min,
                    t_max: c.cp_ig.t_max,
                });
            }
        }
        Ok(())
    }

    /// Temperature interval on which every present component's cp correlation is valid.
    pub fn cp_validity(&self, z: &[f64]) -> (f64, f64) {
        self.fluid
            .components()
            .iter()
            .zip(z)
            .filter(|(_, &zi)| zi > 0.0)
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), (c, _)| {
                (lo.max(c.cp_ig.t_min), hi.min(c.cp_ig.t_max))
            })
    }

    /// Ideal-gas enthalpy relative to 298.15 K, J/mol.
    pub fn ideal_gas_enthalpy(&self, z: &[f64], t: f64) -> Result<f64> {
        self.check_cp_range(z, t)?;
        Ok(self
            .fluid
            .components()
            .iter()
            .zip(z)
            .filter(|(_, &zi)| zi > 0.0)
            .map(|(c, zi)| zi * c.cp_ig.enthalpy_change(ENTHALPY_REFERENCE_T, t))
            .sum())
    }

    pub fn ideal_gas_cp(&self, z: &[f64], t: f64) -> Result<f64> {
        self.check_cp_range(z, t)?;
        Ok(self
            .fluid
            .components()
            .iter()
            .zip(z)
            .filter(|(_, &zi)| zi > 0.0)
            .map(|(c, zi)| zi * c.cp_ig.cp(t))
            .sum())
    }

    /// Molar enthalpy on the chosen root given precomputed mixture parameters.
    pub fn enthalpy_on_root(&self, z: &[f64], mp: &MixtureParams, zroot: f64) -> Result<f64> {
        Ok(self.ideal_gas_enthalpy(z, mp.temperature)? + mp.enthalpy_departure(zroot))
    }

    /// Molar enthalpy, J/mol. Errors if `t` is outside any present component's cp range.
    pub fn molar_enthalpy(&self, z: &[f64], t: f64, p: f64, choice: RootChoice) -> Result<f64> {
        let mp = self.mixture_params(z, t, p);
        let roots = mp.roots()?;
        self.enthalpy_on_root(z, &mp, mp.choose(&roots, choice))
    }

    /// Liquid root, rejecting a lone root that is vapor-like.
    pub fn liquid_root(&self, z: &[f64], t: f64, p: f64) -> Result<(MixtureParams, f64)> {
        let mp = self.mixture_params(z, t, p);
        let roots = mp.roots()?;
        let zl = roots[0];
        if roots.len() == 1 && zl / mp.big_b >= LIQUID_VOLUME_RATIO {
            return Err(Error::NoLiquidRoot {
                temperature: t,
                pressure: p,
            });
        }
        Ok((mp, zl))
    }

    /// Liquid molar volume, m³/mol.
    pub fn liquid_molar_volume(
        &self,
        z: &[f64],
        t: f64,
        p: f64,
        method: LiquidVolumeMethod,
    ) -> Result<f64> {
        let (_, zl) = self.liquid_root(z, t, p)?;
        match method {
            LiquidVolumeMethod::ShiftedPengRobinson => {
                let shift: f64 = self
                    .fluid
                    .components()
                    .iter()
                    .zip(z)
                    .zip(&self.b)
                    .map(|((c, zi), bi)| zi * c.vshift * bi)
                    .sum();
                Ok(zl * R * t / p - shift)
            }
            LiquidVolumeMethod::Costald => costald::saturated_volume(&self.fluid, z, t),
        }
    }

    /// Gas molar volume from the vapor root, m³/mol.
    pub fn vapor_molar_volume(&self, z: &[f64], t: f64, p: f64) -> Result<f64> {
        Ok(self.z_factor(z, t, p, PhaseLabel::Vapor.into())? * R * t / p)
    }
}

/// PR `m(ω)`; the extended polynomial above ω = 0.49.
pub fn m_factor(omega: f64) -> f64 {
    if omega > 0.49 {
        0.379642 + 1.48503 * omega - 0.164423 * omega * omega + 0.016666 * omega.powi(3)
    } else {
        0.37464 + 1.54226 * omega - 0.26992 * omega * omega
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::Composition;

    fn model() -> PengRobinson {
        PengRobinson::new(&FluidSystem::spe5())
    }

    fn pure(m: &PengRobinson, name: &str) -> Vec<f64> {
        Composition::pure(m.len(), m.fluid().index_of(name).unwrap()).into_vec()
    }

    #[test]
    fn alpha_is_one_at_critical_temperature() {
        let m = model();
        let i = m.fluid().index_of("C1").unwrap();
        let tc = m.fluid().component(i).tc;
        assert_eq!(m.alpha(i, tc).0, 1.0);
    }

    #[test]
    fn select_root_examples() {
        let roots = [0.05, 0.3, 0.9];
        assert_eq!(select_root(&roots, PhaseLabel::Vapor), 0.9);
        assert_eq!(select_root(&roots, PhaseLabel::Liquid), 0.05);
        assert_eq!(select_root(&[0.85], PhaseLabel::Liquid), 0.85);
    }

    #[test]
    fn low_pressure_parameters_vanish() {
        let m = model();
        let z = Composition::normalize(&[1.0; 6]).unwrap();
        let mp = m.mixture_params(z.as_slice(), 300.0, 1e-3);
        assert!(mp.big_a < 1e-8 && mp.big_b < 1e-8);
    }

    #[test]
    fn supercritical_methane_near_ideal() {
        let m = model();
        let z = pure(&m, "C1");
        let mp = m.mixture_params(&z, 400.0, 1e5);
        let roots = mp.roots().unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() < 0.01);
    }

    #[test]
    fn methane_at_150k_has_three_roots() {
        let m = model();
        let z = pure(&m, "C1");
        let roots = m.mixture_params(&z, 150.0, 10e5).roots().unwrap();
        assert_eq!(roots.len(), 3, "{roots:?}");
    }

    #[test]
    fn out_of_range_temperature_is_an_error() {
        let m = model();
        let z = pure(&m, "C1");
        let err = m.molar_enthalpy(&z, 150.0, 1e5, RootChoice::Stable).unwrap_err();
        assert!(matches!(err, Error::TemperatureOutOfRange { .. }));
    }

    #[test]
    fn enthalpy_reference_point() {
        let m = model();
        let z = Composition::normalize(&[0.5, 0.1, 0.1, 0.1, 0.1, 0.1]).unwrap();
        let h = m
            .molar_enthalpy(z.as_slice(), ENTHALPY_REFERENCE_T, 1e-3, RootChoice::Stable)
            .unwrap();
        assert!(h.abs() < 1e-3, "{h}");
    }

    #[test]
    fn zero_shift_volume_is_root_volume() {
        let m = model();
        let z = pure(&m, "C10");
        let (t, p) = (288.15, 101325.0);
        let v = m
            .liquid_molar_volume(&z, t, p, LiquidVolumeMethod::ShiftedPengRobinson)
            .unwrap();
        let zl = m.z_factor(&z, t, p, PhaseLabel::Liquid.into()).unwrap();
        assert_eq!(v, zl * R * t / p);
    }

    #[test]
    fn no_liquid_root_for_hot_methane() {
        let m = model();
        let z = pure(&m, "C1");
        assert!(matches!(
            m.liquid_molar_volume(&z, 400.0, 1e5, LiquidVolumeMethod::ShiftedPengRobinson),
            Err(Error::NoLiquidRoot { .. })
        ));
    }

    #[test]
    fn heavy_m_polynomial_switch() {
        assert_eq!(m_factor(0.0), 0.37464);
        assert!((m_factor(0.49) - m_factor(0.4900001)).abs() < 5e-3);
    }
}
