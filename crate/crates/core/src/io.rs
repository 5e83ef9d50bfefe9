//! CSV files at the boundary: bara and °C outside, SI inside. Every float is
//! written with 12 significant digits so reruns are byte-identical.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{score, EstimationResult, SeedPair, TruthRecord};
use crate::fluid::{Composition, FluidSystem};
use crate::process::{ChokeMeasurement, ForwardStep, ProfileStep};
use crate::units::{self, fmt_sig12};

fn names(fluid: &FluidSystem) -> Vec<String> {
    fluid.names().map(str::to_owned).collect()
}

fn prefixed(prefix: &str, fluid: &FluidSystem) -> Vec<String> {
    fluid.names().map(|n| format!("{prefix}{n}")).collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig12).unwrap_or_default()
}

fn comp_cells(z: Option<&Composition>, n: usize) -> Vec<String> {
    match z {
        Some(z) => z.iter().map(|v| fmt_sig12(*v)).collect(),
        None => vec![String::new(); n],
    }
}

/// Parsed CSV with a header index; cells addressed by column name.
struct Table {
    columns: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(reader: impl Read, what: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Parse(format!("{what}: {e}")))?
            .clone();
        let mut columns = HashMap::new();
        for (i, h) in header.iter().enumerate() {
            if columns.insert(h.to_owned(), i).is_some() {
                return Err(Error::Schema(format!("{what}: duplicate column {h:?}")));
            }
        }
        let rows = rdr
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{what}: {e}")))?;
        Ok(Self { columns, rows })
    }

    fn require(&self, what: &str, cols: &[String]) -> Result<Vec<usize>> {
        cols.iter()
            .map(|c| {
                self.columns
                    .get(c)
                    .copied()
                    .ok_or_else(|| Error::Schema(format!("{what}: missing column {c:?}")))
            })
            .collect()
    }

    fn float(&self, what: &str, row: usize, col: usize) -> Result<f64> {
        let cell = self.rows[row].get(col).unwrap_or("");
        cell.parse::<f64>().map_err(|_| {
            Error::Parse(format!("{what}: row {}: {cell:?} is not a number", row + 1))
        })
    }

    fn floats(&self, what: &str, row: usize, cols: &[usize]) -> Result<Vec<f64>> {
        cols.iter().map(|&c| self.float(what, row, c)).collect()
    }
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn write_table(
    mut out: impl Write,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(&mut out);
    let csv_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufWriter::new(f))
}

const CHOKE_COLUMNS: [&str; 4] = ["day", "p_in_bara", "t_in_c", "p_out_bara"];

fn choke_cells(day: f64, p_in: f64, t_in: f64, p_out: f64) -> Vec<String> {
    vec![
        fmt_sig12(day),
        fmt_sig12(units::pa_to_bar(p_in)),
        fmt_sig12(units::kelvin_to_celsius(t_in)),
        fmt_sig12(units::pa_to_bar(p_out)),
    ]
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| (*s).to_owned()).collect()
}

/// `day,p_in_bara,t_in_c,p_out_bara,z_<component>...`
pub fn read_profile(reader: impl Read, fluid: &FluidSystem) -> Result<Vec<ProfileStep>> {
    let what = "profile";
    let t = Table::read(reader, what)?;
    let base = t.require(what, &strings(&CHOKE_COLUMNS))?;
    let zc = t.require(what, &prefixed("z_", fluid))?;
    if t.rows.is_empty() {
        return Err(Error::Schema("profile: no steps".into()));
    }
    (0..t.rows.len())
        .map(|r| {
            let v = t.floats(what, r, &base)?;
            Ok(ProfileStep {
                day: v[0],
                p_in: units::bar_to_pa(v[1]),
                t_in: units::celsius_to_kelvin(v[2]),
                p_out: units::bar_to_pa(v[3]),
                z: Composition::normalize(&t.floats(what, r, &zc)?)?,
            })
        })
        .collect()
}

pub fn load_profile(path: impl AsRef<Path>, fluid: &FluidSystem) -> Result<Vec<ProfileStep>> {
    read_profile(open(path.as_ref())?, fluid)
}

pub fn write_profile(out: impl Write, fluid: &FluidSystem, profile: &[ProfileStep]) -> Result<()> {
    let mut header = strings(&CHOKE_COLUMNS);
    header.extend(prefixed("z_", fluid));
    let rows = profile.iter().map(|s| {
        let mut r = choke_cells(s.day, s.p_in, s.t_in, s.p_out);
        r.extend(comp_cells(Some(&s.z), fluid.len()));
        r
    });
    write_table(out, &header, rows)
}

pub fn save_profile(path: impl AsRef<Path>, fluid: &FluidSystem, profile: &[ProfileStep]) -> Result<()> {
    write_profile(create(path.as_ref())?, fluid, profile)
}

/// `day,p_in_bara,t_in_c,p_out_bara,t_out_c`
pub fn read_measurements(reader: impl Read) -> Result<Vec<ChokeMeasurement>> {
    let what = "measurements";
    let t = Table::read(reader, what)?;
    let mut cols = strings(&CHOKE_COLUMNS);
    cols.push("t_out_c".into());
    let idx = t.require(what, &cols)?;
    (0..t.rows.len())
        .map(|r| {
            let v = t.floats(what, r, &idx)?;
            Ok(ChokeMeasurement {
                day: v[0],
                p_in: units::bar_to_pa(v[1]),
                t_in: units::celsius_to_kelvin(v[2]),
                p_out: units::bar_to_pa(v[3]),
                t_out: units::celsius_to_kelvin(v[4]),
            })
        })
        .collect()
}

pub fn load_measurements(path: impl AsRef<Path>) -> Result<Vec<ChokeMeasurement>> {
    read_measurements(open(path.as_ref())?)
}

pub fn write_measurements(out: impl Write, steps: &[ChokeMeasurement]) -> Result<()> {
    let mut header = strings(&CHOKE_COLUMNS);
    header.push("t_out_c".into());
    let rows = steps.iter().map(|m| {
        let mut r = choke_cells(m.day, m.p_in, m.t_in, m.p_out);
        r.push(fmt_sig12(units::kelvin_to_celsius(m.t_out)));
        r
    });
    write_table(out, &header, rows)
}

pub fn save_measurements(path: impl AsRef<Path>, steps: &[ChokeMeasurement]) -> Result<()> {
    write_measurements(create(path.as_ref())?, steps)
}

fn truth_header(fluid: &FluidSystem) -> Vec<String> {
    let mut h = strings(&["day", "f_g", "gor_sm3_sm3"]);
    for p in ["x_", "y_", "z_"] {
        h.extend(prefixed(p, fluid));
    }
    h
}

/// `day,f_g,gor_sm3_sm3,x_<component>...,y_<component>...,z_<component>...`
pub fn read_truth(reader: impl Read, fluid: &FluidSystem) -> Result<Vec<TruthRecord>> {
    let what = "truth";
    let t = Table::read(reader, what)?;
    let base = t.require(what, &strings(&["day", "f_g", "gor_sm3_sm3"]))?;
    let xc = t.require(what, &prefixed("x_", fluid))?;
    let yc = t.require(what, &prefixed("y_", fluid))?;
    let zc = t.require(what, &prefixed("z_", fluid))?;
    (0..t.rows.len())
        .map(|r| {
            let v = t.floats(what, r, &base)?;
            Ok(TruthRecord {
                day: v[0],
                f_g: v[1],
                gor: v[2],
                oil: Composition::normalize(&t.floats(what, r, &xc)?)?,
                gas: Composition::normalize(&t.floats(what, r, &yc)?)?,
                z: Composition::normalize(&t.floats(what, r, &zc)?)?,
            })
        })
        .collect()
}

pub fn load_truth(path: impl AsRef<Path>, fluid: &FluidSystem) -> Result<Vec<TruthRecord>> {
    read_truth(open(path.as_ref())?, fluid)
}

fn truth_row(t: &TruthRecord) -> Vec<String> {
    let mut r = vec![fmt_sig12(t.day), fmt_sig12(t.f_g), fmt_sig12(t.gor)];
    for c in [&t.oil, &t.gas, &t.z] {
        r.extend(c.iter().map(|v| fmt_sig12(*v)));
    }
    r
}

pub fn write_truth(out: impl Write, fluid: &FluidSystem, steps: &[ForwardStep]) -> Result<()> {
    let rows = steps.iter().map(|s| truth_row(&TruthRecord::from(s)));
    write_table(out, &truth_header(fluid), rows)
}

pub fn save_truth(path: impl AsRef<Path>, fluid: &FluidSystem, steps: &[ForwardStep]) -> Result<()> {
    write_truth(create(path.as_ref())?, fluid, steps)
}

/// `component,x,y`, one row per fluid component in any order.
pub fn read_seeds(reader: impl Read, fluid: &FluidSystem, provenance: &str) -> Result<SeedPair> {
    let what = "seeds";
    let t = Table::read(reader, what)?;
    let idx = t.require(what, &strings(&["component", "x", "y"]))?;
    let n = fluid.len();
    let (mut x, mut y) = (vec![f64::NAN; n], vec![f64::NAN; n]);
    for r in 0..t.rows.len() {
        let name = t.rows[r].get(idx[0]).unwrap_or("");
        let i = fluid
            .index_of(name)
            .ok_or_else(|| Error::Schema(format!("seeds: unknown component {name:?}")))?;
        if !x[i].is_nan() {
            return Err(Error::Schema(format!("seeds: component {name:?} listed twice")));
        }
        x[i] = t.float(what, r, idx[1])?;
        y[i] = t.float(what, r, idx[2])?;
    }
    if let Some(i) = x.iter().position(|v| v.is_nan()) {
        return Err(Error::Schema(format!(
            "seeds: missing component {:?}",
            fluid.component(i).name
        )));
    }
    SeedPair::new(Composition::normalize(&x)?, Composition::normalize(&y)?, provenance)
}

pub fn load_seeds(path: impl AsRef<Path>, fluid: &FluidSystem) -> Result<SeedPair> {
    let path = path.as_ref();
    read_seeds(open(path)?, fluid, &path.display().to_string())
}

pub fn save_seeds(path: impl AsRef<Path>, fluid: &FluidSystem, seeds: &SeedPair) -> Result<()> {
    write_seeds(create(path.as_ref())?, fluid, seeds)
}

pub fn write_seeds(out: impl Write, fluid: &FluidSystem, seeds: &SeedPair) -> Result<()> {
    let rows = names(fluid)
        .into_iter()
        .zip(seeds.oil.iter().zip(seeds.gas.iter()))
        .map(|(n, (x, y))| vec![n, fmt_sig12(*x), fmt_sig12(*y)]);
    write_table(out, &strings(&["component", "x", "y"]), rows)
}

fn estimate_header(fluid: &FluidSystem, with_truth: bool) -> Vec<String> {
    let mut h = strings(&[
        "day",
        "f_g_est",
        "gor_est",
        "t_out_calc_c",
        "residual_c",
        "status",
        "iterations",
    ]);
    h.extend(prefixed("z_", fluid));
    h.push("candidates_f_g".into());
    if with_truth {
        h.extend(strings(&["gor_true", "delta_gor_pct", "mpe_pct"]));
    }
    h
}

fn estimate_row(r: &EstimationResult, n: usize, truth: Option<&[TruthRecord]>) -> Vec<String> {
    let mut row = vec![
        fmt_sig12(r.day),
        opt(r.f_g_est),
        opt(r.gor_est),
        opt(r.t_out_calc.map(units::kelvin_to_celsius)),
        opt(r.residual),
        r.status.as_str().to_owned(),
        r.iterations.to_string(),
    ];
    row.extend(comp_cells(r.z_est.as_ref(), n));
    row.push(
        r.candidates
            .iter()
            .map(|c| fmt_sig12(c.f_g))
            .collect::<Vec<_>>()
            .join(";"),
    );
    if let Some(truth) = truth {
        match crate::estimator::find_truth(truth, r.day) {
            Some(t) => {
                let (delta, mpe) = score(r, t);
                row.extend([fmt_sig12(t.gor), opt(delta), opt(mpe)]);
            }
            None => row.extend(vec![String::new(); 3]),
        }
    }
    row
}

/// Estimate table; with `truth`, adds `gor_true`, `delta_gor_pct` (signed)
/// and `mpe_pct` (absolute) matched by day.
pub fn write_estimates(
    out: impl Write,
    fluid: &FluidSystem,
    results: &[EstimationResult],
    truth: Option<&[TruthRecord]>,
) -> Result<()> {
    let rows = results.iter().map(|r| estimate_row(r, fluid.len(), truth));
    write_table(out, &estimate_header(fluid, truth.is_some()), rows)
}

pub fn save_estimates(
    path: impl AsRef<Path>,
    fluid: &FluidSystem,
    results: &[EstimationResult],
    truth: Option<&[TruthRecord]>,
) -> Result<()> {
    write_estimates(create(path.as_ref())?, fluid, results, truth)
}

/// Long format: the estimate table with a leading key column per block.
pub fn write_sweep(
    out: impl Write,
    key: &str,
    fluid: &FluidSystem,
    blocks: &[(f64, Vec<EstimationResult>)],
    truth: Option<&[TruthRecord]>,
) -> Result<()> {
    let mut header = vec![key.to_owned()];
    header.extend(estimate_header(fluid, truth.is_some()));
    let rows = blocks.iter().flat_map(|(k, rs)| {
        rs.iter().map(move |r| {
            let mut row = vec![fmt_sig12(*k)];
            row.extend(estimate_row(r, fluid.len(), truth));
            row
        })
    });
    write_table(out, &header, rows)
}

pub fn save_sweep(
    path: impl AsRef<Path>,
    key: &str,
    fluid: &FluidSystem,
    blocks: &[(f64, Vec<EstimationResult>)],
    truth: Option<&[TruthRecord]>,
) -> Result<()> {
    write_sweep(create(path.as_ref())?, key, fluid, blocks, truth)
}
