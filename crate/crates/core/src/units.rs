//! Unit conversions used at file and command-line boundaries.
//!
//! Everything inside the crate is SI: K, Pa, J/mol, m³/mol.

/// Universal gas constant, J/(mol·K).
pub const GAS_CONSTANT: f64 = 8.314462618;

pub const PA_PER_PSI: f64 = 6894.757293168;
pub const PA_PER_BAR: f64 = 1.0e5;
pub const KELVIN_OFFSET: f64 = 273.15;

pub fn rankine_to_kelvin(t: f64) -> f64 {
    t / 1.8
}

pub fn kelvin_to_rankine(t: f64) -> f64 {
    t * 1.8
}

pub fn psia_to_pa(p: f64) -> f64 {
    p * PA_PER_PSI
}

pub fn pa_to_psia(p: f64) -> f64 {
    p / PA_PER_PSI
}

pub fn bar_to_pa(p: f64) -> f64 {
    p * PA_PER_BAR
}

pub fn pa_to_bar(p: f64) -> f64 {
    p / PA_PER_BAR
}

pub fn celsius_to_kelvin(t: f64) -> f64 {
    t + KELVIN_OFFSET
}

pub fn kelvin_to_celsius(t: f64) -> f64 {
    t - KELVIN_OFFSET
}

/// Rounds to 12 significant digits; the value every file writer emits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal text of `x` rounded to 12 significant digits.
pub fn fmt_sig12(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    let r = round_sig12(x);
    // -0 prints as "-0"; keep files free of signed zeros
    if r == 0.0 {
        return "0".to_string();
    }
    format!("{r}")
}
