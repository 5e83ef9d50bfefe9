//! Independent reference implementation used as a test oracle.
//!
//! Deliberately naive: cubic roots by scan and bisection, `da/dT` by central
//! differences, ideal-gas enthalpy by Simpson quadrature, Rachford-Rice by
//! plain bisection, flash by unaccelerated successive substitution. Only
//! component data is shared with the library.

#![allow(dead_code)]

use chokegor::FluidSystem;

pub const R: f64 = 8.314462618;
const SQRT2: f64 = std::f64::consts::SQRT_2;

pub struct Oracle {
    tc: Vec<f64>,
    pc: Vec<f64>,
    omega: Vec<f64>,
    kij: Vec<Vec<f64>>,
    cp: Vec<Vec<f64>>,
}

pub struct Mix {
    pub a: f64,
    pub b: f64,
    pub big_a: f64,
    pub big_b: f64,
    /// `Σ_j z_j a_ij`
    pub sum_a: Vec<f64>,
    pub b_i: Vec<f64>,
}

impl Oracle {
    pub fn new(fluid: &FluidSystem) -> Self {
        let n = fluid.len();
        let c = fluid.components();
        Self {
            tc: c.iter().map(|c| c.tc).collect(),
            pc: c.iter().map(|c| c.pc).collect(),
            omega: c.iter().map(|c| c.omega).collect(),
            kij: (0..n).map(|i| (0..n).map(|j| fluid.kij(i, j)).collect()).collect(),
            cp: c.iter().map(|c| c.cp_ig.coeffs.clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tc.len()
    }

    fn kappa(w: f64) -> f64 {
        if w <= 0.49 {
            0.37464 + 1.54226 * w - 0.26992 * w * w
        } else {
            0.379642 + 1.48503 * w - 0.164423 * w * w + 0.016666 * w * w * w
        }
    }

    pub fn a_i(&self, i: usize, t: f64) -> f64 {
        let ac = 0.457235529 * R * R * self.tc[i] * self.tc[i] / self.pc[i];
        let s = 1.0 + Self::kappa(self.omega[i]) * (1.0 - (t / self.tc[i]).sqrt());
        ac * s * s
    }

    pub fn b_i(&self, i: usize) -> f64 {
        0.077796074 * R * self.tc[i] / self.pc[i]
    }

    fn a_mix(&self, z: &[f64], t: f64) -> (f64, Vec<f64>) {
        let n = self.len();
        let ai: Vec<f64> = (0..n).map(|i| self.a_i(i, t)).collect();
        let mut sum_a = vec![0.0; n];
        let mut a = 0.0;
        for i in 0..n {
            for j in 0..n {
                let aij = (ai[i] * ai[j]).sqrt() * (1.0 - self.kij[i][j]);
                sum_a[i] += z[j] * aij;
                a += z[i] * z[j] * aij;
            }
        }
        (a, sum_a)
    }

    pub fn mix(&self, z: &[f64], t: f64, p: f64) -> Mix {
        let (a, sum_a) = self.a_mix(z, t);
        let b_i: Vec<f64> = (0..self.len()).map(|i| self.b_i(i)).collect();
        let b: f64 = z.iter().zip(&b_i).map(|(z, b)| z * b).sum();
        Mix {
            a,
            b,
            big_a: a * p / (R * R * t * t),
            big_b: b * p / (R * t),
            sum_a,
            b_i,
        }
    }

    /// Real roots above `B`, ascending, by scanning and bisecting the cubic.
    pub fn roots(big_a: f64, big_b: f64) -> Vec<f64> {
        let f = |z: f64| {
            z * z * z - (1.0 - big_b) * z * z + (big_a - 3.0 * big_b * big_b - 2.0 * big_b) * z
                - (big_a * big_b - big_b * big_b - big_b * big_b * big_b)
        };
        let hi = 2.0 + big_a + 3.0 * big_b;
        let n = 200_000;
        let mut roots = Vec::new();
        let mut x0 = big_b;
        let mut f0 = f(x0);
        for k in 1..=n {
            let x1 = big_b + (hi - big_b) * k as f64 / n as f64;
            let f1 = f(x1);
            if f0 == 0.0 && x0 > big_b {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut lo, mut up, mut flo) = (x0, x1, f0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + up);
                    let fm = f(mid);
                    if fm == 0.0 {
                        lo = mid;
                        up = mid;
                        break;
                    }
                    if (fm < 0.0) == (flo < 0.0) {
                        lo = mid;
                        flo = fm;
                    } else {
                        up = mid;
                    }
                }
                roots.push(0.5 * (lo + up));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    pub fn ln_phi_at(&self, m: &Mix, z_root: f64) -> Vec<f64> {
        let (a, b) = (m.big_a, m.big_b);
        let log = ((z_root + (1.0 + SQRT2) * b) / (z_root + (1.0 - SQRT2) * b)).ln();
        (0..self.len())
            .map(|i| {
                let bi = m.b_i[i] / m.b;
                bi * (z_root - 1.0) - (z_root - b).ln()
                    - a / (2.0 * SQRT2 * b) * (2.0 * m.sum_a[i] / m.a - bi) * log
            })
            .collect()
    }

    /// `ln φ` on the smallest (`liquid`) or largest root.
    pub fn ln_phi(&self, z: &[f64], t: f64, p: f64, liquid: bool) -> (Vec<f64>, f64) {
        let m = self.mix(z, t, p);
        let r = Self::roots(m.big_a, m.big_b);
        let zr = if liquid { r[0] } else { *r.last().unwrap() };
        (self.ln_phi_at(&m, zr), zr)
    }

    pub fn enthalpy_departure(&self, z: &[f64], t: f64, p: f64, z_root: f64) -> f64 {
        let m = self.mix(z, t, p);
        let h = 1e-3;
        let da_dt = (self.a_mix(z, t + h).0 - self.a_mix(z, t - h).0) / (2.0 * h);
        let log = ((z_root + (1.0 + SQRT2) * m.big_b) / (z_root + (1.0 - SQRT2) * m.big_b)).ln();
        R * t * (z_root - 1.0) + (t * da_dt - m.a) / (2.0 * SQRT2 * m.b) * log
    }

    /// Ideal-gas enthalpy relative to 298.15 K by composite Simpson quadrature.
    pub fn ideal_enthalpy(&self, z: &[f64], t: f64) -> f64 {
        let cp = |tt: f64| -> f64 {
            z.iter()
                .zip(&self.cp)
                .map(|(zi, c)| zi * c.iter().rev().fold(0.0, |acc, k| acc * tt + k))
                .sum()
        };
        let (t0, n) = (298.15, 2000);
        let h = (t - t0) / n as f64;
        let mut s = cp(t0) + cp(t);
        for k in 1..n {
            s += cp(t0 + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    pub fn wilson(&self, t: f64, p: f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.pc[i] / p * (5.373 * (1.0 + self.omega[i]) * (1.0 - self.tc[i] / t)).exp())
            .collect()
    }
}

/// Rachford-Rice by bisection between the asymptotes.
pub fn rr_bisect(z: &[f64], k: &[f64]) -> f64 {
    let g = |b: f64| -> f64 {
        z.iter()
            .zip(k)
            .map(|(z, k)| z * (k - 1.0) / (1.0 + b * (k - 1.0)))
            .sum()
    };
    let kmax = k.iter().cloned().fold(f64::MIN, f64::max);
    let kmin = k.iter().cloned().fold(f64::MAX, f64::min);
    let (mut lo, mut hi) = (1.0 / (1.0 - kmax), 1.0 / (1.0 - kmin));
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub struct OracleFlash {
    pub beta: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Successive substitution from Wilson K; `None` if the split leaves (0, 1).
pub fn ss_flash(o: &Oracle, z: &[f64], t: f64, p: f64) -> Option<OracleFlash> {
    let mut k = o.wilson(t, p);
    for _ in 0..20_000 {
        if k.iter().all(|&v| v > 1.0) || k.iter().all(|&v| v < 1.0) {
            return None;
        }
        let beta = rr_bisect(z, &k);
        let x: Vec<f64> = z.iter().zip(&k).map(|(z, k)| z / (1.0 + beta * (k - 1.0))).collect();
        let y: Vec<f64> = x.iter().zip(&k).map(|(x, k)| x * k).collect();
        let (ll, _) = o.ln_phi(&x, t, p, true);
        let (lv, _) = o.ln_phi(&y, t, p, false);
        let mut err: f64 = 0.0;
        for i in 0..k.len() {
            let nk = (ll[i] - lv[i]).exp();
            err = err.max((nk.ln() - k[i].ln()).abs());
            k[i] = nk;
        }
        if err < 1e-13 {
            let beta = rr_bisect(z, &k);
            if beta <= 0.0 || beta >= 1.0 {
                return None;
            }
            let x: Vec<f64> = z.iter().zip(&k).map(|(z, k)| z / (1.0 + beta * (k - 1.0))).collect();
            let y = x.iter().zip(&k).map(|(x, k)| x * k).collect();
            return Some(OracleFlash { beta, x, y });
        }
    }
    panic!("oracle flash did not converge at T = {t}, P = {p}");
}

/// Fixed pseudo-random feeds for grid tests.
pub fn feeds(n: usize, seed: u64, dim: usize) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.01..1.0)).collect())
        .collect()
}

/// Engineered two-root case: seeds are the surface streams of a rich feed,
/// expanded 41 → 11 bara from 345 K, where the outlet dew point makes the
/// temperature residual turn back near f_g ≈ 0.93.
pub struct TwoRootCase {
    pub feed: [f64; 6],
    pub p_in: f64,
    pub t_in: f64,
    pub p_out: f64,
    pub t_out: f64,
}

pub const TWO_ROOT_CASE: TwoRootCase = TwoRootCase {
    feed: [0.42, 0.17, 0.25, 0.05, 0.07, 0.04],
    p_in: 41e5,
    t_in: 345.0,
    p_out: 11e5,
    t_out: 345.0 - 17.0,
};
