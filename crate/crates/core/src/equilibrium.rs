//! Two-phase vapor-liquid equilibrium: Wilson K-values, Rachford-Rice,
//! isothermal (PT) and isenthalpic (PH) flash.
//!
//! Phase-split detection uses the negative flash: Rachford-Rice is solved on
//! the whole interval between its asymptotes and successive substitution runs
//! on the resulting phase compositions. A converged vapor fraction outside
//! (0, 1) means the feed is single phase. There is no tangent-plane stability
//! test.

use serde::{Deserialize, Serialize};

use crate::eos::{PengRobinson, PhaseLabel, RootChoice, LIQUID_VOLUME_RATIO};
use crate::error::{Error, RachfordRiceError, Result};
use crate::fluid::Composition;
use crate::solver::{brent, BrentOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseState {
    SinglePhaseLiquid,
    SinglePhaseVapor,
    TwoPhase,
}

/// Result of a flash.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEquilibrium {
    pub temperature: f64,
    pub pressure: f64,
    pub state: PhaseState,
    /// Vapor mole fraction.
    pub beta: f64,
    pub x: Composition,
    pub y: Composition,
    pub zl: f64,
    pub zv: f64,
    /// Final K-values (`y_i/x_i`; absent components carry their last iterate).
    pub k: Vec<f64>,
    pub iterations: usize,
    /// Largest `|ln f_i^V − ln f_i^L|` at exit; zero for single-phase results.
    pub residual: f64,
}

impl PhaseEquilibrium {
    pub fn is_two_phase(&self) -> bool {
        self.state == PhaseState::TwoPhase
    }

    /// Largest `|z_i − β y_i − (1 − β) x_i|`.
    pub fn material_balance_error(&self, z: &Composition) -> f64 {
        z.iter()
            .zip(self.x.iter().zip(self.y.iter()))
            .map(|(zi, (xi, yi))| (zi - self.beta * yi - (1.0 - self.beta) * xi).abs())
            .fold(0.0, f64::max)
    }

    /// Mixture molar enthalpy `β H_V + (1 − β) H_L`, J/mol.
    pub fn enthalpy(&self, model: &PengRobinson) -> Result<f64> {
        let (t, p) = (self.temperature, self.pressure);
        match self.state {
            PhaseState::TwoPhase => {
                let hv = model.molar_enthalpy(self.y.as_slice(), t, p, PhaseLabel::Vapor.into())?;
                let hl = model.molar_enthalpy(self.x.as_slice(), t, p, PhaseLabel::Liquid.into())?;
                Ok(self.beta * hv + (1.0 - self.beta) * hl)
            }
            _ => model.molar_enthalpy(self.x.as_slice(), t, p, RootChoice::Stable),
        }
    }
}

/// Wilson correlation `K_i = (Pc_i/P) exp[5.373 (1 + ω_i)(1 − Tc_i/T)]`.
pub fn wilson_k(model: &PengRobinson, t: f64, p: f64) -> Vec<f64> {
    model
        .fluid()
        .components()
        .iter()
        .map(|c| c.pc / p * (5.373 * (1.0 + c.omega) * (1.0 - c.tc / t)).exp())
        .collect()
}

/// `1 + β(K − 1)` written as `(1 − β) + βK`; both terms are nonnegative for
/// β in [0, 1], which avoids cancellation near the dew point when K is tiny.
fn rr_denominator(beta: f64, k: f64) -> f64 {
    (1.0 - beta) + beta * k
}

/// Rachford-Rice objective `Σ z_i (K_i − 1)/(1 + β(K_i − 1))`.
pub fn rachford_rice_objective(z: &[f64], k: &[f64], beta: f64) -> f64 {
    z.iter()
        .zip(k)
        .filter(|(zi, _)| **zi > 0.0)
        .map(|(zi, ki)| zi * (ki - 1.0) / rr_denominator(beta, *ki))
        .sum()
}

/// Vapor fraction solving Rachford-Rice on the open interval between its
/// asymptotes `1/(1 − K_max)` and `1/(1 − K_min)`; the result may lie outside
/// [0, 1] (negative flash). Components with `z_i = 0` are ignored.
pub fn rachford_rice(z: &[f64], k: &[f64]) -> std::result::Result<f64, RachfordRiceError> {
    rr_solve(z, k).map(|r| r.beta)
}

struct RrSolution {
    beta: f64,
    /// `1 + β(K_i − 1)` evaluated without cancellation.
    den: Vec<f64>,
}

/// Solves in `β` when the root lies below one half and in `u = β − 1`
/// otherwise, so denominators near either asymptote keep full precision.
fn rr_solve(z: &[f64], k: &[f64]) -> std::result::Result<RrSolution, RachfordRiceError> {
    let (mut k_min, mut k_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (zi, ki) in z.iter().zip(k) {
        if *zi > 0.0 {
            k_min = k_min.min(*ki);
            k_max = k_max.max(*ki);
        }
    }
    if k_min >= 1.0 && k_max <= 1.0 {
        return Err(RachfordRiceError::Trivial);
    }
    if k_min >= 1.0 {
        return Err(RachfordRiceError::AllVapor);
    }
    if k_max <= 1.0 {
        return Err(RachfordRiceError::AllLiquid);
    }

    // den_i = base_i + t·(K_i − 1); base is 1 for t = β and K_i for t = β − 1
    let upper = rachford_rice_objective(z, k, 0.5) < 0.0;
    let base = |ki: f64| if upper { ki } else { 1.0 };
    let offset = if upper { 1.0 } else { 0.0 };
    // g is strictly decreasing between the asymptotes: +inf at lo, -inf at hi
    let (mut lo, mut hi) = if upper {
        (k_max / (1.0 - k_max), k_min / (1.0 - k_min))
    } else {
        (1.0 / (1.0 - k_max), 1.0 / (1.0 - k_min))
    };
    let mut t = 0.5 - offset;
    for _ in 0..300 {
        let (mut g, mut dg) = (0.0, 0.0);
        for (zi, ki) in z.iter().zip(k) {
            if *zi > 0.0 {
                let km1 = ki - 1.0;
                let den = base(*ki) + t * km1;
                g += zi * km1 / den;
                dg -= zi * km1 * km1 / (den * den);
            }
        }
        if g == 0.0 {
            break;
        }
        if g > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - g / dg;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let done = (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE);
        t = next;
        if done {
            break;
        }
    }
    let den = k.iter().map(|ki| base(*ki) + t * (ki - 1.0)).collect();
    Ok(RrSolution {
        beta: t + offset,
        den,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct FlashOptions {
    pub max_iter: usize,
    /// Convergence on `max |Δ ln K|`.
    pub k_tol: f64,
    /// `‖K − 1‖∞` below this counts as a trivial solution.
    pub trivial_tol: f64,
    /// The trivial-solution check is skipped for the first iterations.
    pub trivial_min_iter: usize,
    /// Accepted `max |Δ ln K|` once the iteration has stopped improving,
    /// as happens at round-off level next to a phase boundary.
    pub stall_tol: f64,
    /// Iterations without a new best `max |Δ ln K|` that count as a stall.
    pub stall_iter: usize,
}

impl Default for FlashOptions {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            k_tol: 1e-10,
            trivial_tol: 1e-6,
            trivial_min_iter: 5,
            stall_tol: 1e-8,
            stall_iter: 25,
        }
    }
}

fn single_phase(
    model: &PengRobinson,
    z: &Composition,
    t: f64,
    p: f64,
    label: Option<PhaseLabel>,
    k: Vec<f64>,
    iterations: usize,
) -> Result<PhaseEquilibrium> {
    let mp = model.mixture_params(z.as_slice(), t, p);
    let roots = mp.roots()?;
    let zs = mp.stable_root(&roots);
    let label = label.unwrap_or_else(|| {
        if roots.len() > 1 {
            if zs == roots[0] {
                PhaseLabel::Liquid
            } else {
                PhaseLabel::Vapor
            }
        } else if zs / mp.big_b < LIQUID_VOLUME_RATIO {
            PhaseLabel::Liquid
        } else {
            PhaseLabel::Vapor
        }
    });
    let (state, beta) = match label {
        PhaseLabel::Liquid => (PhaseState::SinglePhaseLiquid, 0.0),
        PhaseLabel::Vapor => (PhaseState::SinglePhaseVapor, 1.0),
    };
    Ok(PhaseEquilibrium {
        temperature: t,
        pressure: p,
        state,
        beta,
        x: z.clone(),
        y: z.clone(),
        zl: zs,
        zv: zs,
        k,
        iterations,
        residual: 0.0,
    })
}

struct Split {
    beta: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

fn split(z: &[f64], k: &[f64]) -> std::result::Result<Split, RachfordRiceError> {
    let RrSolution { beta, den } = rr_solve(z, k)?;
    let x: Vec<f64> = z
        .iter()
        .zip(&den)
        .map(|(zi, d)| if *zi > 0.0 { zi / d } else { 0.0 })
        .collect();
    let y = x.iter().zip(k).map(|(xi, ki)| xi * ki).collect();
    Ok(Split { beta, x, y })
}

/// `(ln φ^L(x) − ln φ^V(y), Z_L, Z_V)`.
fn ln_k_update(
    model: &PengRobinson,
    s: &Split,
    t: f64,
    p: f64,
) -> Result<(Vec<f64>, f64, f64)> {
    let ml = model.mixture_params(&s.x, t, p);
    let zl = ml.roots()?[0];
    let mv = model.mixture_params(&s.y, t, p);
    let zv = *mv.roots()?.last().expect("nonempty");
    let lnl = ml.ln_phi(zl);
    let lnv = mv.ln_phi(zv);
    Ok((lnl.iter().zip(&lnv).map(|(l, v)| l - v).collect(), zl, zv))
}

/// Isothermal flash with default options and Wilson initial K-values.
pub fn pt_flash(model: &PengRobinson, z: &Composition, t: f64, p: f64) -> Result<PhaseEquilibrium> {
    pt_flash_with(model, z, t, p, None, &FlashOptions::default())
}

/// Isothermal flash by successive substitution, optionally warm-started from `k_init`.
pub fn pt_flash_with(
    model: &PengRobinson,
    z: &Composition,
    t: f64,
    p: f64,
    k_init: Option<&[f64]>,
    opts: &FlashOptions,
) -> Result<PhaseEquilibrium> {
    if !(t > 0.0 && p > 0.0) {
        return Err(Error::InvalidInput(format!("flash at T = {t} K, P = {p} Pa")));
    }
    let zs = z.as_slice();
    let present: Vec<usize> = (0..zs.len()).filter(|&i| zs[i] > 0.0).collect();
    let wilson = wilson_k(model, t, p);
    if present.len() == 1 {
        return single_phase(model, z, t, p, None, wilson, 0);
    }

    let mut k = k_init.map(<[f64]>::to_vec).unwrap_or_else(|| wilson.clone());
    let mut restarted = false;
    let mut last_err = f64::NAN;
    let (mut best_err, mut best_iter) = (f64::INFINITY, 0);
    for iter in 1..=opts.max_iter {
        let s = match split(zs, &k) {
            Ok(s) => s,
            Err(RachfordRiceError::AllVapor) => {
                return single_phase(model, z, t, p, Some(PhaseLabel::Vapor), k, iter)
            }
            Err(RachfordRiceError::AllLiquid) => {
                return single_phase(model, z, t, p, Some(PhaseLabel::Liquid), k, iter)
            }
            Err(RachfordRiceError::Trivial) => {
                if restarted {
                    return single_phase(model, z, t, p, None, k, iter);
                }
                restarted = true;
                k = wilson.iter().map(|w| w.powf(1.5)).collect();
                continue;
            }
        };
        let (ln_k_new, _, _) = ln_k_update(model, &s, t, p)?;
        let mut err: f64 = 0.0;
        for &i in &present {
            err = err.max((ln_k_new[i] - k[i].ln()).abs());
            k[i] = ln_k_new[i].exp();
        }
        last_err = err;
        if err < best_err {
            (best_err, best_iter) = (err, iter);
        }
        let stalled = best_err < opts.stall_tol && iter - best_iter >= opts.stall_iter;

        if err < opts.k_tol || stalled {
            let s = split(zs, &k)?;
            let (ln_k_final, zl, zv) = ln_k_update(model, &s, t, p)?;
            let residual = present
                .iter()
                .map(|&i| (ln_k_final[i] - (s.y[i] / s.x[i]).ln()).abs())
                .fold(0.0, f64::max);
            if s.beta <= 0.0 {
                return single_phase(model, z, t, p, Some(PhaseLabel::Liquid), k, iter);
            }
            if s.beta >= 1.0 {
                return single_phase(model, z, t, p, Some(PhaseLabel::Vapor), k, iter);
            }
            return Ok(PhaseEquilibrium {
                temperature: t,
                pressure: p,
                state: PhaseState::TwoPhase,
                beta: s.beta,
                x: Composition::from_normalized(s.x),
                y: Composition::from_normalized(s.y),
                zl,
                zv,
                k,
                iterations: iter,
                residual,
            });
        }

        if iter >= opts.trivial_min_iter
            && present.iter().all(|&i| (k[i] - 1.0).abs() < opts.trivial_tol)
        {
            if restarted {
                return single_phase(model, z, t, p, None, k, iter);
            }
            restarted = true;
            k = wilson.iter().map(|w| w.powf(1.5)).collect();
        }
    }
    Err(Error::NonConvergence {
        what: "PT flash",
        iterations: opts.max_iter,
        residual: last_err,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PhFlashOptions {
    /// Required `|H − H_target|` on return, J/mol.
    pub h_tol: f64,
    /// The temperature search is run to this tighter enthalpy tolerance.
    pub h_solve_tol: f64,
    pub t_tol: f64,
    /// Half-width of the initial bracket around the guess, K; widened once by the same amount.
    pub half_width: f64,
    pub max_iter: usize,
    pub flash: FlashOptions,
}

impl Default for PhFlashOptions {
    fn default() -> Self {
        Self {
            h_tol: 0.01,
            h_solve_tol: 1e-4,
            t_tol: 1e-9,
            half_width: 60.0,
            max_iter: 100,
            flash: FlashOptions::default(),
        }
    }
}

/// Isenthalpic flash at `p`: the temperature whose equilibrium mixture enthalpy is `h_target`.
pub fn ph_flash(
    model: &PengRobinson,
    z: &Composition,
    p: f64,
    h_target: f64,
    t_guess: f64,
) -> Result<(f64, PhaseEquilibrium)> {
    ph_flash_with(model, z, p, h_target, t_guess, &PhFlashOptions::default())
}

pub fn ph_flash_with(
    model: &PengRobinson,
    z: &Composition,
    p: f64,
    h_target: f64,
    t_guess: f64,
    opts: &PhFlashOptions,
) -> Result<(f64, PhaseEquilibrium)> {
    let (t_min, t_max) = model.cp_validity(z.as_slice());
    let t_guess = t_guess.clamp(t_min, t_max);

    let mut warm: Option<Vec<f64>> = None;
    let mut evaluated: Vec<(f64, PhaseEquilibrium)> = Vec::new();
    let mut residual = |t: f64| -> Result<f64> {
        let eq = pt_flash_with(model, z, t, p, warm.as_deref(), &opts.flash)?;
        if eq.is_two_phase() {
            warm = Some(eq.k.clone());
        }
        let h = eq.enthalpy(model)?;
        evaluated.push((t, eq));
        Ok(h - h_target)
    };

    let f_guess = residual(t_guess)?;
    let (root_t, root_f) = if f_guess.abs() <= opts.h_solve_tol {
        (t_guess, f_guess)
    } else {
        // H increases with T: the root lies below the guess when f_guess > 0
        let dir = if f_guess > 0.0 { -1.0 } else { 1.0 };
        let mut near = (t_guess, f_guess);
        let mut bracket = None;
        for widen in 1..=2 {
            let t_far = (t_guess + dir * opts.half_width * widen as f64).clamp(t_min, t_max);
            if t_far == near.0 {
                break;
            }
            let f_far = residual(t_far)?;
            if f_far * f_guess <= 0.0 {
                bracket = Some((near, (t_far, f_far)));
                break;
            }
            near = (t_far, f_far);
        }
        let Some(((ta, fa), (tb, fb))) = bracket else {
            let (lo, hi) = (
                (t_guess - 2.0 * opts.half_width).max(t_min),
                (t_guess + 2.0 * opts.half_width).min(t_max),
            );
            return Err(Error::UnreachableEnthalpy {
                target: h_target,
                t_low: lo,
                t_high: hi,
            });
        };
        let r = brent(
            &mut residual,
            ta,
            fa,
            tb,
            fb,
            BrentOptions {
                f_tol: opts.h_solve_tol,
                x_tol: opts.t_tol,
                max_iter: opts.max_iter,
            },
        )?;
        (r.x, r.fx)
    };
    if root_f.abs() > opts.h_tol {
        return Err(Error::NonConvergence {
            what: "PH flash",
            iterations: opts.max_iter,
            residual: root_f,
        });
    }
    let eq = evaluated
        .into_iter()
        .rev()
        .find(|(t, _)| *t == root_t)
        .map(|(_, eq)| eq)
        .expect("root temperature was evaluated");
    Ok((root_t, eq))
}
