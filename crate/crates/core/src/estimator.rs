//! Inverse problem: the seed gas fraction whose choke expansion reproduces a
//! measured outlet temperature, plus error metrics and tolerance / seed-time
//! studies.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::eos::PengRobinson;
use crate::error::{Error, Result};
use crate::fluid::Composition;
use crate::process::{
    choke_expand, recombine, separator_train, ChokeMeasurement, ForwardStep, SeparatorTrain,
};
use crate::solver::{brent, BrentOptions};

/// Seed stock-tank oil `x` and surface gas `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedPair {
    pub oil: Composition,
    pub gas: Composition,
    pub provenance: String,
}

impl SeedPair {
    pub fn new(oil: Composition, gas: Composition, provenance: impl Into<String>) -> Result<Self> {
        if oil.len() != gas.len() {
            return Err(Error::InvalidInput("seed oil and gas differ in length".into()));
        }
        Ok(Self {
            oil,
            gas,
            provenance: provenance.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimationStatus {
    Converged,
    NoBracket,
    MultipleRoots,
    FlashFailure,
}

impl EstimationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "CONVERGED",
            Self::NoBracket => "NO_BRACKET",
            Self::MultipleRoots => "MULTIPLE_ROOTS",
            Self::FlashFailure => "FLASH_FAILURE",
        }
    }
}

impl fmt::Display for EstimationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimationStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Converged, Self::NoBracket, Self::MultipleRoots, Self::FlashFailure]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown status {s:?}")))
    }
}

/// A root of the temperature residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub f_g: f64,
    pub t_out_calc: f64,
    /// `t_out_calc − t_out_meas`, K.
    pub residual: f64,
    /// Residual evaluations spent refining this root.
    pub iterations: usize,
    /// Surface GOR of the recombined stream; `None` if the train failed.
    pub gor: Option<f64>,
}

/// Outlet temperatures reachable over the scanned `f_g` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub t_out_min: f64,
    pub t_out_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub day: f64,
    pub status: EstimationStatus,
    pub f_g_est: Option<f64>,
    pub z_est: Option<Composition>,
    pub gor_est: Option<f64>,
    pub t_out_calc: Option<f64>,
    pub residual: Option<f64>,
    pub iterations: usize,
    /// Every root found, ascending in `f_g`; more than one only for `MultipleRoots`.
    pub candidates: Vec<Candidate>,
    pub envelope: Option<Envelope>,
    pub message: Option<String>,
}

impl EstimationResult {
    fn failed(day: f64, status: EstimationStatus, message: String) -> Self {
        Self {
            day,
            status,
            f_g_est: None,
            z_est: None,
            gor_est: None,
            t_out_calc: None,
            residual: None,
            iterations: 0,
            candidates: Vec::new(),
            envelope: None,
            message: Some(message),
        }
    }
}

/// Grid-scan plus Brent solver for `f_g`.
#[derive(Debug, Clone)]
pub struct Estimator<'a> {
    pub model: &'a PengRobinson,
    pub train: &'a SeparatorTrain,
    /// Uniform scan points on `[0, 1]`, end points included.
    pub grid_points: usize,
    pub max_brent_iter: usize,
}

impl<'a> Estimator<'a> {
    pub fn new(model: &'a PengRobinson, train: &'a SeparatorTrain) -> Self {
        Self {
            model,
            train,
            grid_points: 21,
            max_brent_iter: 100,
        }
    }

    /// Computed outlet temperature of the recombined seeds at `f_g`.
    pub fn outlet_temperature(
        &self,
        seeds: &SeedPair,
        m: &ChokeMeasurement,
        f_g: f64,
    ) -> Result<f64> {
        let z = recombine(&seeds.oil, &seeds.gas, f_g)?;
        choke_expand(self.model, &z, m.p_in, m.t_in, m.p_out)
            .map(|c| c.t_out)
            .map_err(|e| Error::FlashAtFraction {
                f_g,
                source: Box::new(e),
            })
    }

    /// `T_out,calc(f_g) − T_out,meas`, K.
    pub fn residual_temperature(
        &self,
        seeds: &SeedPair,
        m: &ChokeMeasurement,
        f_g: f64,
    ) -> Result<f64> {
        Ok(self.outlet_temperature(seeds, m, f_g)? - m.t_out)
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.grid_points.max(2) - 1;
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    /// Finds every root of the residual on `[0, 1]` to `|residual| <= tol`.
    ///
    /// A single root is returned as `Converged`. Several roots give
    /// `MultipleRoots` resolved to the smallest `f_g`; see
    /// [`Estimator::solve_fg_near`] for continuity-based selection.
    pub fn solve_fg(
        &self,
        seeds: &SeedPair,
        m: &ChokeMeasurement,
        tol: f64,
    ) -> Result<EstimationResult> {
        self.solve_fg_near(seeds, m, tol, None)
    }

    /// As [`Estimator::solve_fg`]; among multiple roots picks the one whose GOR
    /// is closest to `previous_gor`, or the smallest `f_g` when absent.
    pub fn solve_fg_near(
        &self,
        seeds: &SeedPair,
        m: &ChokeMeasurement,
        tol: f64,
        previous_gor: Option<f64>,
    ) -> Result<EstimationResult> {
        let mut result = self.find_roots(seeds, m, tol)?;
        self.select(&mut result, seeds, previous_gor);
        Ok(result)
    }

    fn find_roots(&self, seeds: &SeedPair, m: &ChokeMeasurement, tol: f64) -> Result<EstimationResult> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidInput(format!("temperature tolerance {tol} must be positive")));
        }
        if seeds.oil.len() != self.model.len() || seeds.gas.len() != self.model.len() {
            return Err(Error::InvalidInput("seed compositions do not match the fluid".into()));
        }
        let day = m.day;
        let grid = self.grid();
        let scan: Vec<Result<f64>> = grid
            .iter()
            .map(|&f| self.residual_temperature(seeds, m, f))
            .collect();
        let first_error = scan.iter().find_map(|r| r.as_ref().err().map(ToString::to_string));
        let points: Vec<(f64, f64)> = grid
            .iter()
            .zip(&scan)
            .filter_map(|(&f, r)| r.as_ref().ok().map(|&v| (f, v)))
            .collect();
        if points.is_empty() {
            return Ok(EstimationResult::failed(
                day,
                EstimationStatus::FlashFailure,
                first_error.unwrap_or_default(),
            ));
        }
        let envelope = Envelope {
            t_out_min: points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) + m.t_out,
            t_out_max: points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) + m.t_out,
        };

        let opts = BrentOptions {
            f_tol: tol,
            x_tol: 1e-13,
            max_iter: self.max_brent_iter,
        };
        let mut roots: Vec<Candidate> = Vec::new();
        let mut unresolved = 0;
        for (i, &(f, r)) in points.iter().enumerate() {
            if r == 0.0 {
                roots.push(Candidate {
                    f_g: f,
                    t_out_calc: m.t_out,
                    residual: 0.0,
                    iterations: 0,
                    gor: None,
                });
            }
            let Some(&(f1, r1)) = points.get(i + 1) else { continue };
            if r * r1 >= 0.0 {
                continue;
            }
            let root = brent(|x| self.residual_temperature(seeds, m, x), f, r, f1, r1, opts);
            match root {
                Ok(b) if b.converged => roots.push(Candidate {
                    f_g: b.x,
                    t_out_calc: m.t_out + b.fx,
                    residual: b.fx,
                    iterations: b.iterations,
                    gor: None,
                }),
                // a sign change without a root is a jump in the residual
                Ok(_) => unresolved += 1,
                Err(e) => {
                    let mut out =
                        EstimationResult::failed(day, EstimationStatus::FlashFailure, e.to_string());
                    out.envelope = Some(envelope);
                    return Ok(out);
                }
            }
        }
        roots.sort_by(|a, b| a.f_g.total_cmp(&b.f_g));
        roots.dedup_by(|a, b| (a.f_g - b.f_g).abs() < 1e-12);

        if roots.is_empty() {
            let message = match (&first_error, unresolved) {
                (Some(e), _) => e.clone(),
                (None, 0) => format!(
                    "measured outlet {:.6} K outside computed range [{:.6}, {:.6}] K",
                    m.t_out, envelope.t_out_min, envelope.t_out_max
                ),
                (None, n) => format!("{n} sign change(s) without a root within tolerance"),
            };
            let status = if first_error.is_some() {
                EstimationStatus::FlashFailure
            } else {
                EstimationStatus::NoBracket
            };
            let mut out = EstimationResult::failed(day, status, message);
            out.envelope = Some(envelope);
            return Ok(out);
        }

        if roots.len() > 1 {
            for c in &mut roots {
                c.gor = recombine(&seeds.oil, &seeds.gas, c.f_g)
                    .and_then(|z| separator_train(self.model, &z, self.train))
                    .ok()
                    .map(|s| s.gor);
            }
        }
        Ok(EstimationResult {
            day,
            status: if roots.len() == 1 {
                EstimationStatus::Converged
            } else {
                EstimationStatus::MultipleRoots
            },
            f_g_est: None,
            z_est: None,
            gor_est: None,
            t_out_calc: None,
            residual: None,
            iterations: 0,
            candidates: roots,
            envelope: Some(envelope),
            message: first_error,
        })
    }

    /// Fills the estimate fields from the chosen candidate.
    fn select(&self, result: &mut EstimationResult, seeds: &SeedPair, previous_gor: Option<f64>) {
        if result.candidates.is_empty() {
            return;
        }
        let chosen = match previous_gor {
            Some(prev) if result.candidates.len() > 1 => result
                .candidates
                .iter()
                .min_by(|a, b| {
                    let da = a.gor.map_or(f64::INFINITY, |g| (g - prev).abs());
                    let db = b.gor.map_or(f64::INFINITY, |g| (g - prev).abs());
                    da.total_cmp(&db)
                })
                .expect("nonempty"),
            _ => &result.candidates[0],
        }
        .clone();
        result.f_g_est = Some(chosen.f_g);
        result.t_out_calc = Some(chosen.t_out_calc);
        result.residual = Some(chosen.residual);
        result.iterations = chosen.iterations;
        let surface = recombine(&seeds.oil, &seeds.gas, chosen.f_g).and_then(|z| {
            let s = separator_train(self.model, &z, self.train);
            result.z_est = Some(z);
            s
        });
        match surface {
            Ok(s) => result.gor_est = Some(s.gor),
            Err(e) => {
                result.status = EstimationStatus::FlashFailure;
                result.message = Some(e.to_string());
            }
        }
    }

    /// Solves every measurement; steps run in parallel and multiple roots are
    /// then resolved in time order against the previous step's GOR.
    pub fn estimate_timeseries(
        &self,
        seeds: &SeedPair,
        measurements: &[ChokeMeasurement],
        tol: f64,
    ) -> Result<Vec<EstimationResult>> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidInput(format!("temperature tolerance {tol} must be positive")));
        }
        let raw: Vec<EstimationResult> = measurements
            .par_iter()
            .map(|m| {
                self.find_roots(seeds, m, tol).unwrap_or_else(|e| {
                    EstimationResult::failed(m.day, EstimationStatus::FlashFailure, e.to_string())
                })
            })
            .collect();
        let mut previous_gor = None;
        let mut out = Vec::with_capacity(raw.len());
        for mut r in raw {
            self.select(&mut r, seeds, previous_gor);
            if r.gor_est.is_some() {
                previous_gor = r.gor_est;
            }
            out.push(r);
        }
        Ok(out)
    }

    /// One full-series estimate per tolerance, in the order given.
    pub fn sweep_tolerance(
        &self,
        seeds: &SeedPair,
        measurements: &[ChokeMeasurement],
        tolerances: &[f64],
    ) -> Result<Vec<(f64, Vec<EstimationResult>)>> {
        if tolerances.is_empty() {
            return Err(Error::InvalidInput("no tolerances given".into()));
        }
        if let Some(t) = tolerances.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidInput(format!("temperature tolerance {t} must be positive")));
        }
        tolerances
            .iter()
            .map(|&tol| Ok((tol, self.estimate_timeseries(seeds, measurements, tol)?)))
            .collect()
    }

    /// One full-series estimate per seed day, seeds taken from that day's
    /// surface streams. Repeated days are dropped and reported.
    pub fn sweep_seed_times(
        &self,
        truth: &[TruthRecord],
        measurements: &[ChokeMeasurement],
        seed_days: &[f64],
        tol: f64,
    ) -> Result<SeedSweep> {
        if seed_days.is_empty() {
            return Err(Error::InvalidInput("no seed days given".into()));
        }
        let mut days: Vec<f64> = Vec::new();
        let mut duplicates = Vec::new();
        for &d in seed_days {
            if days.iter().any(|&k| same_day(k, d)) {
                duplicates.push(d);
            } else {
                days.push(d);
            }
        }
        let mut blocks = Vec::with_capacity(days.len());
        for day in days {
            let row = find_truth(truth, day)
                .ok_or_else(|| Error::InvalidInput(format!("seed day {day} not found in truth")))?;
            let seeds = row.seeds();
            blocks.push((day, self.estimate_timeseries(&seeds, measurements, tol)?));
        }
        Ok(SeedSweep { blocks, duplicates })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSweep {
    pub blocks: Vec<(f64, Vec<EstimationResult>)>,
    /// Seed days given more than once; only the first occurrence is run.
    pub duplicates: Vec<f64>,
}

/// Reference solution of one step as stored in a truth file.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub day: f64,
    pub f_g: f64,
    pub gor: f64,
    pub oil: Composition,
    pub gas: Composition,
    pub z: Composition,
}

impl TruthRecord {
    pub fn seeds(&self) -> SeedPair {
        SeedPair {
            oil: self.oil.clone(),
            gas: self.gas.clone(),
            provenance: format!("surface streams of day {}", self.day),
        }
    }
}

impl From<&ForwardStep> for TruthRecord {
    fn from(s: &ForwardStep) -> Self {
        Self {
            day: s.measurement.day,
            f_g: s.truth.f_g,
            gor: s.truth.gor,
            oil: s.truth.oil.clone(),
            gas: s.truth.gas.clone(),
            z: s.z.clone(),
        }
    }
}

fn same_day(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

pub fn find_truth(truth: &[TruthRecord], day: f64) -> Option<&TruthRecord> {
    truth.iter().find(|t| same_day(t.day, day))
}

/// Signed percent error `100·(est − ref)/ref`.
pub fn percent_error(est: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(100.0 * (est - reference) / reference)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mpe {
    /// Mean of `100·|est − ref|/ref`, %.
    pub value: f64,
    /// Components left out because their reference fraction is zero.
    pub excluded: Vec<usize>,
}

/// Mean absolute percent error over components with a nonzero reference.
pub fn mole_fraction_mpe(z_est: &Composition, z_ref: &Composition) -> Result<Mpe> {
    if z_est.len() != z_ref.len() {
        return Err(Error::InvalidInput("compositions differ in length".into()));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut excluded = Vec::new();
    for (i, (e, r)) in z_est.iter().zip(z_ref.iter()).enumerate() {
        if *r > 0.0 {
            sum += (e - r).abs() / r;
            count += 1;
        } else {
            excluded.push(i);
        }
    }
    if count == 0 {
        return Err(Error::ZeroReference);
    }
    Ok(Mpe {
        value: 100.0 * sum / count as f64,
        excluded,
    })
}

/// `(δ GOR %, MPE %)` of an estimate against its reference step, where defined.
pub fn score(result: &EstimationResult, truth: &TruthRecord) -> (Option<f64>, Option<f64>) {
    let delta = result.gor_est.and_then(|g| percent_error(g, truth.gor).ok());
    let mpe = result
        .z_est
        .as_ref()
        .and_then(|z| mole_fraction_mpe(z, &truth.z).ok())
        .map(|m| m.value);
    (delta, mpe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::FluidSystem;
    use crate::units;

    #[test]
    fn percent_error_examples() {
        assert_eq!(percent_error(100.0, 100.0).unwrap(), 0.0);
        assert!((percent_error(112.0, 100.0).unwrap() - 12.0).abs() < 1e-12);
        assert!((percent_error(88.0, 100.0).unwrap() + 12.0).abs() < 1e-12);
        assert!(matches!(percent_error(1.0, 0.0), Err(Error::ZeroReference)));
    }

    #[test]
    fn mpe_examples() {
        let r = Composition::normalize(&[0.5, 0.5]).unwrap();
        let e = Composition::normalize(&[0.55, 0.45]).unwrap();
        assert_eq!(mole_fraction_mpe(&r, &r).unwrap().value, 0.0);
        assert!((mole_fraction_mpe(&e, &r).unwrap().value - 10.0).abs() < 1e-10);
        let r0 = Composition::normalize(&[0.5, 0.0, 0.5]).unwrap();
        let e0 = Composition::normalize(&[0.5, 0.1, 0.4]).unwrap();
        let m = mole_fraction_mpe(&e0, &r0).unwrap();
        assert_eq!(m.excluded, vec![1]);
        assert!((m.value - 10.0).abs() < 1e-10);
    }

    #[test]
    fn status_tokens_round_trip() {
        for s in [
            EstimationStatus::Converged,
            EstimationStatus::NoBracket,
            EstimationStatus::MultipleRoots,
            EstimationStatus::FlashFailure,
        ] {
            assert_eq!(s.as_str().parse::<EstimationStatus>().unwrap(), s);
        }
        assert!("converged".parse::<EstimationStatus>().is_err());
    }

    fn fixture() -> (PengRobinson, SeparatorTrain, SeedPair) {
        let m = PengRobinson::new(&FluidSystem::spe5());
        let train = SeparatorTrain::default();
        let z = Composition::normalize(&[0.5, 0.03, 0.07, 0.2, 0.15, 0.05]).unwrap();
        let s = separator_train(&m, &z, &train).unwrap();
        let seeds = SeedPair::new(s.oil, s.gas, "initial").unwrap();
        (m, train, seeds)
    }

    fn measurement(t_out: f64) -> ChokeMeasurement {
        ChokeMeasurement {
            day: 1.0,
            p_in: units::bar_to_pa(96.0),
            t_in: 339.15,
            p_out: units::bar_to_pa(66.0),
            t_out,
        }
    }

    #[test]
    fn endpoint_residuals_are_pure_seed_expansions() {
        let (m, train, seeds) = fixture();
        let est = Estimator::new(&m, &train);
        let meas = measurement(339.0);
        let p = (meas.p_in, meas.t_in, meas.p_out);
        let t_oil = choke_expand(&m, &seeds.oil, p.0, p.1, p.2).unwrap().t_out;
        let t_gas = choke_expand(&m, &seeds.gas, p.0, p.1, p.2).unwrap().t_out;
        assert_eq!(est.residual_temperature(&seeds, &meas, 0.0).unwrap(), t_oil - 339.0);
        assert_eq!(est.residual_temperature(&seeds, &meas, 1.0).unwrap(), t_gas - 339.0);
    }

    #[test]
    fn unreachable_measurement_has_no_bracket() {
        let (m, train, seeds) = fixture();
        let est = Estimator::new(&m, &train);
        let r = est.solve_fg(&seeds, &measurement(339.15 + 20.0), 1e-3).unwrap();
        assert_eq!(r.status, EstimationStatus::NoBracket);
        let env = r.envelope.unwrap();
        assert!(env.t_out_max < 339.15 + 20.0 && env.t_out_min < env.t_out_max);
        assert!(r.f_g_est.is_none());
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        let (m, train, seeds) = fixture();
        let est = Estimator::new(&m, &train);
        assert!(est.solve_fg(&seeds, &measurement(339.0), 0.0).is_err());
        assert!(est.sweep_tolerance(&seeds, &[], &[0.1, -1.0]).is_err());
        assert!(est.sweep_tolerance(&seeds, &[], &[]).is_err());
    }

    #[test]
    fn empty_series_is_empty() {
        let (m, train, seeds) = fixture();
        let est = Estimator::new(&m, &train);
        assert!(est.estimate_timeseries(&seeds, &[], 0.01).unwrap().is_empty());
    }

    #[test]
    fn self_seeded_measurement_recovers_fraction() {
        let (m, train, seeds) = fixture();
        let est = Estimator::new(&m, &train);
        let f_true = 0.6;
        let t_out = est.outlet_temperature(&seeds, &measurement(0.0), f_true).unwrap();
        let r = est.solve_fg(&seeds, &measurement(t_out), 1e-4).unwrap();
        assert_eq!(r.status, EstimationStatus::Converged);
        assert!(r.residual.unwrap().abs() <= 1e-4);
        assert!((r.f_g_est.unwrap() - f_true).abs() < 1e-4);
    }
}
