//! Component basis, compositions and fluid-system files.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

/// Bundled six-component SPE5 fluid, field units.
pub const SPE5_FLUID_JSON: &str = include_str!("../../../data/spe5_fluid.json");

/// Mole fractions below this are treated as absent.
pub const TRACE_FRACTION: f64 = 1e-15;

/// Ideal-gas heat capacity `cp = Σ c_k T^k` in J/(mol·K), valid on `[t_min, t_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpPolynomial {
    pub coeffs: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
}

impl CpPolynomial {
    pub fn cp(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// `∫ cp dT` from `t0` to `t1`, J/mol.
    pub fn enthalpy_change(&self, t0: f64, t1: f64) -> f64 {
        let antiderivative = |t: f64| {
            self.coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (k, c)| acc * t + c / (k as f64 + 1.0))
                * t
        };
        antiderivative(t1) - antiderivative(t0)
    }

    pub fn covers(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}

/// Parameters of the COSTALD saturated-liquid volume correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostaldParams {
    /// Characteristic volume, m³/mol.
    pub v_star: f64,
    pub omega_srk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentProps {
    pub name: String,
    /// Critical temperature, K.
    pub tc: f64,
    /// Critical pressure, Pa.
    pub pc: f64,
    pub omega: f64,
    /// Molecular weight, g/mol.
    pub mw: f64,
    pub zc: f64,
    /// Carried for completeness; no surface-tension model uses it.
    pub parachor: Option<f64>,
    pub cp_ig: CpPolynomial,
    /// Dimensionless Peneloux shift `s`, volume shift `c = s·b`.
    pub vshift: f64,
    pub costald: Option<CostaldParams>,
}

impl ComponentProps {
    fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: &str| Error::InvalidComponent {
            component: self.name.clone(),
            field,
            reason: reason.to_string(),
        };
        if self.name.trim().is_empty() {
            return Err(bad("name", "empty"));
        }
        let positive = [("tc", self.tc), ("pc", self.pc), ("mw", self.mw)];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(field, &format!("must be > 0, got {v}")));
            }
        }
        if !self.omega.is_finite() {
            return Err(bad("omega", "not finite"));
        }
        if !(self.zc > 0.0 && self.zc < 1.0) {
            return Err(bad("zc", &format!("must lie in (0, 1), got {}", self.zc)));
        }
        let cp = &self.cp_ig;
        if cp.coeffs.is_empty() {
            return Err(bad("cp_ig", "no coefficients"));
        }
        if !(cp.t_min > 0.0 && cp.t_max > cp.t_min) {
            return Err(bad("cp_ig", "invalid validity range"));
        }
        // sampled, not proven
        for k in 0..=64 {
            let t = cp.t_min + (cp.t_max - cp.t_min) * k as f64 / 64.0;
            if !(cp.cp(t) > 0.0) {
                return Err(bad("cp_ig", &format!("non-positive cp at {t} K")));
            }
        }
        if !self.vshift.is_finite() {
            return Err(bad("vshift", "not finite"));
        }
        if let Some(c) = &self.costald {
            if !(c.v_star > 0.0) {
                return Err(bad("costald", "v_star must be > 0"));
            }
        }
        Ok(())
    }
}

/// Component table plus symmetric binary interaction matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidSystem {
    name: String,
    components: Vec<ComponentProps>,
    bip: Vec<Vec<f64>>,
    metadata: serde_json::Map<String, serde_json::Value>,
}

impl FluidSystem {
    pub fn new(components: Vec<ComponentProps>, bip: Vec<Vec<f64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("fluid system has no components".into()));
        }
        let mut seen = HashSet::new();
        for c in &components {
            c.validate()?;
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidComponent {
                    component: c.name.clone(),
                    field: "name",
                    reason: "duplicate".into(),
                });
            }
        }
        let bip = symmetrize_bip(bip, components.len())?;
        Ok(Self {
            name: String::new(),
            components,
            bip,
            metadata: Default::default(),
        })
    }

    /// The bundled SPE5 fluid.
    pub fn spe5() -> Self {
        Self::from_json_str(SPE5_FLUID_JSON).expect("bundled fluid file is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: FluidFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let field = match file.units.as_str() {
            "field" => true,
            "si" => false,
            other => {
                return Err(Error::Schema(format!(
                    "units must be \"field\" or \"si\", got {other:?}"
                )))
            }
        };
        let components = file
            .components
            .into_iter()
            .map(|r| {
                let (tc, pc) = if field {
                    (units::rankine_to_kelvin(r.tc), units::psia_to_pa(r.pc))
                } else {
                    (r.tc, r.pc)
                };
                ComponentProps {
                    name: r.name,
                    tc,
                    pc,
                    omega: r.omega,
                    mw: r.mw,
                    zc: r.zc,
                    parachor: r.parachor,
                    cp_ig: CpPolynomial {
                        coeffs: r.cp_ig.coeffs,
                        t_min: r.cp_ig.t_min,
                        t_max: r.cp_ig.t_max,
                    },
                    vshift: r.vshift.unwrap_or(0.0),
                    costald: r.costald.map(|c| CostaldParams {
                        v_star: c.v_star,
                        omega_srk: c.omega_srk,
                    }),
                }
            })
            .collect();
        let mut sys = Self::new(components, file.bip)?;
        sys.name = file.name.unwrap_or_default();
        sys.metadata = file.metadata;
        Ok(sys)
    }

    /// Serializes back to the file schema. Values are written at 12 significant digits,
    /// so a field-unit file read and re-written reproduces its table entries exactly.
    pub fn to_json(&self, field_units: bool) -> String {
        let n = self.len();
        let components = self
            .components
            .iter()
            .map(|c| {
                let (tc, pc) = if field_units {
                    (units::kelvin_to_rankine(c.tc), units::pa_to_psia(c.pc))
                } else {
                    (c.tc, c.pc)
                };
                ComponentRecord {
                    name: c.name.clone(),
                    tc: units::round_sig12(tc),
                    pc: units::round_sig12(pc),
                    omega: c.omega,
                    mw: c.mw,
                    zc: c.zc,
                    parachor: c.parachor,
                    cp_ig: CpRecord {
                        coeffs: c.cp_ig.coeffs.clone(),
                        t_min: c.cp_ig.t_min,
                        t_max: c.cp_ig.t_max,
                    },
                    vshift: (c.vshift != 0.0).then_some(c.vshift),
                    costald: c.costald.map(|p| CostaldRecord {
                        v_star: p.v_star,
                        omega_srk: p.omega_srk,
                    }),
                }
            })
            .collect();
        let bip = (0..n).map(|i| self.bip[i][i..].to_vec()).collect();
        let file = FluidFile {
            name: (!self.name.is_empty()).then(|| self.name.clone()),
            units: if field_units { "field" } else { "si" }.to_string(),
            metadata: self.metadata.clone(),
            components,
            bip,
        };
        serde_json::to_string_pretty(&file).expect("fluid file serializes")
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ComponentProps] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ComponentProps {
        &self.components[i]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.components.iter().map(|c| c.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn kij(&self, i: usize, j: usize) -> f64 {
        self.bip[i][j]
    }

    pub fn bip(&self) -> &[Vec<f64>] {
        &self.bip
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn metadata(&self) -> &serde_json::Map<String, serde_json::Value> {
        &self.metadata
    }

    /// Same fluid with the components reordered: `order[k]` is the old index of new slot `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut check: Vec<usize> = order.to_vec();
        check.sort_unstable();
        if check != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidInput("not a permutation".into()));
        }
        let components = order.iter().map(|&i| self.components[i].clone()).collect();
        let bip = order
            .iter()
            .map(|&i| order.iter().map(|&j| self.bip[i][j]).collect())
            .collect();
        let mut sys = Self::new(components, bip)?;
        sys.name = self.name.clone();
        Ok(sys)
    }

    /// Mixture molecular weight, g/mol.
    pub fn molar_mass(&self, comp: &Composition) -> f64 {
        comp.iter().zip(&self.components).map(|(z, c)| z * c.mw).sum()
    }
}

/// Accepts upper-triangular rows (`N - i` entries in row `i`) or a full `N × N` matrix.
fn symmetrize_bip(rows: Vec<Vec<f64>>, n: usize) -> Result<Vec<Vec<f64>>> {
    if rows.len() != n {
        return Err(Error::InvalidBip(format!(
            "expected {n} rows, got {}",
            rows.len()
        )));
    }
    let full = rows.iter().all(|r| r.len() == n);
    let mut k = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter().enumerate() {
        let offset = if full {
            0
        } else if row.len() == n - i {
            i
        } else {
            return Err(Error::InvalidBip(format!(
                "row {i} has {} entries, expected {} (upper triangle) or {n} (full)",
                row.len(),
                n - i
            )));
        };
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidBip(format!("non-finite entry ({i}, {})", c + offset)));
            }
            let j = c + offset;
            if full && j < i {
                if v != k[j][i] {
                    return Err(Error::InvalidBip(format!(
                        "conflicting entries k({i},{j}) = {v} and k({j},{i}) = {}",
                        k[j][i]
                    )));
                }
                continue;
            }
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    for (i, row) in k.iter().enumerate() {
        if row[i] != 0.0 {
            return Err(Error::InvalidBip(format!("diagonal entry {i} is {}", row[i])));
        }
    }
    Ok(k)
}

/// Mole-fraction vector over a fluid system's components.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition(Vec<f64>);

impl Composition {
    /// Scales a nonnegative vector to unit sum. Entries that end up below
    /// [`TRACE_FRACTION`] are set to zero and the rest rescaled.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidInput("empty composition".into()));
        }
        if let Some(v) = raw.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "mole amounts must be finite and nonnegative, got {v}"
            )));
        }
        let mut v = raw.to_vec();
        let sum: f64 = v.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidInput("all mole amounts are zero".into()));
        }
        if (sum - 1.0).abs() > 1e-14 {
            v.iter_mut().for_each(|x| *x /= sum);
        }
        if v.iter().any(|&x| x > 0.0 && x < TRACE_FRACTION) {
            v.iter_mut().filter(|x| **x < TRACE_FRACTION).for_each(|x| *x = 0.0);
            let sum: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= sum);
        }
        Ok(Self(v))
    }

    /// Wraps fractions that already sum to one (e.g. flash output).
    pub(crate) fn from_normalized(v: Vec<f64>) -> Self {
        Self(v)
    }

    pub fn pure(n: usize, index: usize) -> Self {
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Largest per-component absolute difference.
    pub fn max_abs_diff(&self, other: &Composition) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for Composition {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FluidFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    units: String,
    #[serde(default)]
    metadata: serde_json::Map<String, serde_json::Value>,
    components: Vec<ComponentRecord>,
    bip: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentRecord {
    name: String,
    pc: f64,
    tc: f64,
    mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parachor: Option<f64>,
    omega: f64,
    zc: f64,
    cp_ig: CpRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vshift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    costald: Option<CostaldRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CpRecord {
    coeffs: Vec<f64>,
    t_min: f64,
    t_max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CostaldRecord {
    v_star: f64,
    omega_srk: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_component_json(pc: f64) -> String {
        format!(
            r#"{{"units":"si","components":[{{"name":"X","tc":300.0,"pc":{pc},"omega":0.1,
            "mw":30.0,"zc":0.28,"cp_ig":{{"coeffs":[30.0],"t_min":100.0,"t_max":1000.0}}}}],
            "bip":[[0.0]]}}"#
        )
    }

    #[test]
    fn bundled_c1_critical_constants() {
        let f = FluidSystem::spe5();
        let c1 = f.component(f.index_of("C1").unwrap());
        assert!((c1.tc - 190.556).abs() < 1e-3);
        assert!((c1.pc - 4.604e6).abs() / 4.604e6 < 1e-4);
        assert_eq!(c1.omega, 0.011);
    }

    #[test]
    fn bundled_bips() {
        let f = FluidSystem::spe5();
        let i = |n| f.index_of(n).unwrap();
        assert_eq!(f.kij(i("C3"), i("C6")), 0.0007);
        assert_eq!(f.kij(i("C6"), i("C3")), 0.0007);
        assert_eq!(f.kij(i("C20"), i("C20")), 0.0);
        assert_eq!(f.kij(i("C1"), i("C3")), 0.119);
        assert_eq!(f.kij(i("C1"), i("C15")), 0.0489);
    }

    #[test]
    fn bip_is_symmetric_with_zero_diagonal() {
        let f = FluidSystem::spe5();
        for i in 0..f.len() {
            assert_eq!(f.kij(i, i), 0.0);
            for j in 0..f.len() {
                assert_eq!(f.kij(i, j), f.kij(j, i));
            }
        }
    }

    #[test]
    fn single_component_system() {
        let f = FluidSystem::from_json_str(&single_component_json(4.0e6)).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.bip(), &[vec![0.0]]);
    }

    #[test]
    fn non_physical_pc_names_component_and_field() {
        let err = FluidSystem::from_json_str(&single_component_json(0.0)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("X") && msg.contains("pc"), "{msg}");
    }

    #[test]
    fn missing_field_is_a_parse_error() {
        let text = r#"{"units":"si","components":[{"name":"X","tc":300.0,"omega":0.1,
            "mw":30.0,"zc":0.28,"cp_ig":{"coeffs":[30.0],"t_min":100.0,"t_max":1000.0}}],
            "bip":[[0.0]]}"#;
        let err = FluidSystem::from_json_str(text).unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("pc")), "{err}");
    }

    #[test]
    fn conflicting_full_bip_rejected() {
        let c = FluidSystem::spe5().components()[..2].to_vec();
        let err = FluidSystem::new(c.clone(), vec![vec![0.0, 0.1], vec![0.2, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidBip(_)));
        let ok = FluidSystem::new(c, vec![vec![0.0, 0.1], vec![0.1, 0.0]]).unwrap();
        assert_eq!(ok.kij(1, 0), 0.1);
    }

    #[test]
    fn nonzero_diagonal_rejected() {
        let c = FluidSystem::spe5().components()[..2].to_vec();
        let err = FluidSystem::new(c, vec![vec![0.5, 0.1], vec![0.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidBip(_)));
    }

    #[test]
    fn duplicate_names_rejected() {
        let c = FluidSystem::spe5().components()[0].clone();
        let err = FluidSystem::new(vec![c.clone(), c], vec![vec![0.0, 0.0], vec![0.0]]);
        assert!(err.is_err());
    }

    #[test]
    fn field_units_round_trip_reproduces_table() {
        let f = FluidSystem::spe5();
        let original: serde_json::Value = serde_json::from_str(SPE5_FLUID_JSON).unwrap();
        let written: serde_json::Value = serde_json::from_str(&f.to_json(true)).unwrap();
        for (a, b) in original["components"]
            .as_array()
            .unwrap()
            .iter()
            .zip(written["components"].as_array().unwrap())
        {
            for key in ["pc", "tc", "mw", "parachor", "omega", "zc"] {
                assert_eq!(
                    a[key].as_f64().unwrap().to_bits(),
                    b[key].as_f64().unwrap().to_bits(),
                    "{key} of {}",
                    a["name"]
                );
            }
        }
        assert_eq!(original["bip"], written["bip"]);
        assert_eq!(FluidSystem::from_json_str(&f.to_json(true)).unwrap().bip(), f.bip());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(Composition::normalize(&[1.0, 1.0]).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(
            Composition::normalize(&[0.2, 0.3, 0.5]).unwrap().as_slice(),
            &[0.2, 0.3, 0.5]
        );
        assert_eq!(
            Composition::normalize(&[2.0, 0.0, 6.0]).unwrap().as_slice(),
            &[0.25, 0.0, 0.75]
        );
    }

    #[test]
    fn normalize_errors() {
        assert!(Composition::normalize(&[0.0, 0.0]).is_err());
        assert!(Composition::normalize(&[0.5, -0.1]).is_err());
        assert!(Composition::normalize(&[]).is_err());
    }

    #[test]
    fn trace_fractions_clamped() {
        let c = Composition::normalize(&[1.0, 1e-17, 1.0]).unwrap();
        assert_eq!(c[1], 0.0);
        assert_eq!(c[0], 0.5);
    }

    #[test]
    fn cp_integral_matches_polynomial() {
        let p = CpPolynomial {
            coeffs: vec![1.0, 2.0, 3.0],
            t_min: 0.0,
            t_max: 10.0,
        };
        // ∫0^2 (1 + 2t + 3t²) dt = 2 + 4 + 8
        assert!((p.enthalpy_change(0.0, 2.0) - 14.0).abs() < 1e-12);
        assert_eq!(p.cp(2.0), 17.0);
    }

    #[test]
    fn permutation_moves_bips() {
        let f = FluidSystem::spe5();
        let order = [5, 4, 3, 2, 1, 0];
        let p = f.permuted(&order).unwrap();
        assert_eq!(p.component(0).name, "C20");
        assert_eq!(p.kij(5, 4), f.kij(0, 1));
    }
}
