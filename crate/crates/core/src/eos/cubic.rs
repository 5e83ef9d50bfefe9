//! Real roots of the Peng-Robinson compressibility cubic
//! `Z³ − (1−B)Z² + (A−3B²−2B)Z − (AB−B²−B³) = 0`.

use crate::error::{Error, Result};

/// Coefficients `[c0, c1, c2]` of the monic cubic `Z³ + c2 Z² + c1 Z + c0`.
pub fn pr_cubic_coefficients(a: f64, b: f64) -> [f64; 3] {
    [-(a * b - b * b - b * b * b), a - 3.0 * b * b - 2.0 * b, -(1.0 - b)]
}

fn eval(c: &[f64; 3], z: f64) -> (f64, f64) {
    let f = ((z + c[2]) * z + c[1]) * z + c[0];
    let df = (3.0 * z + 2.0 * c[2]) * z + c[1];
    (f, df)
}

fn polish(c: &[f64; 3], mut z: f64) -> f64 {
    for _ in 0..4 {
        let (f, df) = eval(c, z);
        if df == 0.0 {
            break;
        }
        let step = f / df;
        z -= step;
        if step.abs() <= 1e-16 * z.abs().max(1.0) {
            break;
        }
    }
    z
}

/// All real roots of a monic cubic, ascending, Newton-polished.
pub fn real_cubic_roots(c: &[f64; 3]) -> Vec<f64> {
    let [c0, c1, c2] = *c;
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = 0.25 * q * q + p * p * p / 27.0;

    let mut roots = if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-0.5 * q + s).cbrt() + (-0.5 * q - s).cbrt() - shift]
    } else if p == 0.0 {
        vec![-shift]
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    };
    for z in roots.iter_mut() {
        *z = polish(c, *z);
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    roots
}

/// Physical compressibility roots (`Z > B`), ascending; one to three of them.
pub fn compressibility_roots(a: f64, b: f64) -> Result<Vec<f64>> {
    let roots: Vec<f64> = real_cubic_roots(&pr_cubic_coefficients(a, b))
        .into_iter()
        .filter(|&z| z > b && z.is_finite())
        .collect();
    if roots.is_empty() {
        return Err(Error::NoPhysicalRoot { a, b });
    }
    Ok(roots)
}
