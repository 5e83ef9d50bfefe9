//! COSTALD (Hankinson-Thomson) saturated liquid volume.

use crate::error::{Error, Result};
use crate::fluid::FluidSystem;

const VR0: [f64; 4] = [-1.52816, 1.43907, -0.81446, 0.190454];
const VRD: [f64; 4] = [-0.296123, 0.386914, -0.0427258, -0.0480645];

/// Reduced volume functions `(V_R⁰, V_Rδ)` at reduced temperature `tr`.
pub fn reduced_volumes(tr: f64) -> (f64, f64) {
    let tau = 1.0 - tr;
    let c = tau.cbrt();
    let v0 = 1.0 + VR0[0] * c + VR0[1] * c * c + VR0[2] * tau + VR0[3] * tau * c;
    let vd = (VRD[0] + VRD[1] * tr + VRD[2] * tr * tr + VRD[3] * tr * tr * tr) / (tr - 1.00001);
    (v0, vd)
}

/// Saturated liquid molar volume of mixture `x` at `t`, m³/mol.
pub fn saturated_volume(fluid: &FluidSystem, x: &[f64], t: f64) -> Result<f64> {
    let mut params = Vec::with_capacity(x.len());
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let c = fluid.component(i);
        let p = c.costald.ok_or_else(|| Error::InvalidComponent {
            component: c.name.clone(),
            field: "costald",
            reason: "parameters required for COSTALD liquid volume".into(),
        })?;
        params.push((xi, p.v_star, p.omega_srk, c.tc));
    }

    let s1: f64 = params.iter().map(|(x, v, _, _)| x * v).sum();
    let s23: f64 = params.iter().map(|(x, v, _, _)| x * v.powf(2.0 / 3.0)).sum();
    let s13: f64 = params.iter().map(|(x, v, _, _)| x * v.cbrt()).sum();
    let v_star = 0.25 * (s1 + 3.0 * s23 * s13);

    let vt: f64 = params.iter().map(|(x, v, _, tc)| x * (v * tc).sqrt()).sum();
    let tcm = vt * vt / v_star;
    let omega: f64 = params.iter().map(|(x, _, w, _)| x * w).sum();

    let tr = t / tcm;
    if !(0.25..1.0).contains(&tr) {
        return Err(Error::InvalidInput(format!(
            "COSTALD reduced temperature {tr:.4} outside [0.25, 1)"
        )));
    }
    let (v0, vd) = reduced_volumes(tr);
    Ok(v_star * v0 * (1.0 - omega * vd))
}
