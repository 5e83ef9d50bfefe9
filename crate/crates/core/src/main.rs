use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use chokegor::estimator::{score, EstimationResult, Estimator, SeedPair, TruthRecord};
use chokegor::process::{forward_timeseries, ProfileSpec, SeparatorTrain};
use chokegor::{io, FluidSystem, PengRobinson};

/// Wellstream GOR and composition from production-choke P/T measurements.
///
/// Pressures are bara and temperatures °C at this interface.
#[derive(Parser)]
#[command(name = "chokegor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the bundled synthetic wellstream profile.
    Profile {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the forward model: choke outlet temperatures and surface truth.
    Forward {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Estimate f_g, GOR and composition for each measurement.
    Estimate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        measurements: PathBuf,
        #[command(flatten)]
        seeds: SeedArgs,
        /// Outlet-temperature tolerance, °C.
        #[arg(long)]
        tol_c: f64,
        /// Truth file; adds delta_gor_pct and mpe_pct columns.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Tolerance or seed-time study over a full series.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        mode: SweepMode,
        #[arg(long)]
        measurements: PathBuf,
        /// Seeds for tolerance mode.
        #[command(flatten)]
        seeds: SeedArgs,
        /// Truth file; required for seed-times mode.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001,0.0001")]
        tolerances_c: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        seed_days: Vec<f64>,
        /// Tolerance for seed-times mode, °C.
        #[arg(long, default_value_t = 0.01)]
        tol_c: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Fluid-system JSON; the bundled SPE5 fluid when omitted.
    #[arg(long)]
    fluid: Option<PathBuf>,
    /// Separator-train JSON, or `default`.
    #[arg(long, default_value = "default")]
    train: String,
}

impl ModelArgs {
    fn load(&self) -> Result<(FluidSystem, SeparatorTrain)> {
        let fluid = match &self.fluid {
            Some(p) => FluidSystem::load(p).with_context(|| format!("loading fluid {}", p.display()))?,
            None => FluidSystem::spe5(),
        };
        let train = if self.train == "default" {
            SeparatorTrain::default()
        } else {
            SeparatorTrain::load(&self.train).with_context(|| format!("loading train {}", self.train))?
        };
        Ok((fluid, train))
    }
}

#[derive(Args)]
struct SeedArgs {
    /// Seed CSV with columns component,x,y.
    #[arg(long, conflicts_with = "seed_from_truth")]
    seeds: Option<PathBuf>,
    /// Take seeds from the surface streams of a truth file at `--day`.
    #[arg(long, requires = "day")]
    seed_from_truth: Option<PathBuf>,
    #[arg(long)]
    day: Option<f64>,
}

impl SeedArgs {
    fn load(&self, fluid: &FluidSystem) -> Result<Option<SeedPair>> {
        if let Some(p) = &self.seeds {
            return Ok(Some(io::load_seeds(p, fluid)?));
        }
        if let (Some(p), Some(day)) = (&self.seed_from_truth, self.day) {
            let truth = io::load_truth(p, fluid)?;
            let row = chokegor::estimator::find_truth(&truth, day)
                .with_context(|| format!("day {day} not found in {}", p.display()))?;
            return Ok(Some(row.seeds()));
        }
        Ok(None)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    Tolerance,
    SeedTimes,
}

/// Output files written so far; removed again if the command fails.
#[derive(Default)]
struct Outputs(Vec<PathBuf>);

impl Outputs {
    fn path(&mut self, dir: &Path, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let p = dir.join(name);
        self.0.push(p.clone());
        Ok(p)
    }

    fn discard(&self) {
        for p in &self.0 {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("tolerance must be positive, got {tol}");
    }
    Ok(())
}

fn summarize(results: &[EstimationResult], truth: Option<&[TruthRecord]>) {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in results {
        *counts.entry(r.status.as_str()).or_default() += 1;
    }
    let counts: Vec<String> = counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("  steps {}: {}", results.len(), counts.join(" "));
    if let Some(truth) = truth {
        let (mut delta, mut mpe) = (0.0f64, 0.0f64);
        for r in results {
            if let Some(t) = chokegor::estimator::find_truth(truth, r.day) {
                let (d, m) = score(r, t);
                delta = delta.max(d.map_or(0.0, f64::abs));
                mpe = mpe.max(m.unwrap_or(0.0));
            }
        }
        println!("  max |delta GOR| {delta:.4} %, max MPE {mpe:.4} %");
    }
}

fn run(command: Command, outputs: &mut Outputs) -> Result<()> {
    match command {
        Command::Profile { out } => {
            let fluid = FluidSystem::spe5();
            let profile = ProfileSpec::bundled().generate()?;
            outputs.0.push(out.clone());
            io::save_profile(&out, &fluid, &profile)?;
            println!("wrote {} steps to {}", profile.len(), out.display());
        }
        Command::Forward { model, profile, out } => {
            let (fluid, train) = model.load()?;
            let steps = io::load_profile(&profile, &fluid)
                .with_context(|| format!("reading {}", profile.display()))?;
            let eos = PengRobinson::new(&fluid);
            let run = forward_timeseries(&eos, &steps, &train);
            let m_path = outputs.path(&out, "measurements.csv")?;
            io::save_measurements(&m_path, &run.measurements())?;
            let t_path = outputs.path(&out, "truth.csv")?;
            io::save_truth(&t_path, &fluid, &run.steps)?;

            println!("forward: {} steps, {} failures", run.steps.len(), run.failures.len());
            for f in &run.failures {
                println!("  step {} (day {}): {}", f.index, f.day, f.message);
            }
            let range = |v: Vec<f64>| {
                v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
            };
            if !run.steps.is_empty() {
                let (g0, g1) = range(run.steps.iter().map(|s| s.truth.gor).collect());
                let (d0, d1) = range(
                    run.steps
                        .iter()
                        .map(|s| s.measurement.t_out - s.measurement.t_in)
                        .collect(),
                );
                println!("  GOR {g0:.3} .. {g1:.3} Sm3/Sm3, dT {d0:.4} .. {d1:.4} C");
            }
            println!("  wrote {} and {}", m_path.display(), t_path.display());
        }
        Command::Estimate {
            model,
            measurements,
            seeds,
            tol_c,
            truth,
            out,
        } => {
            check_tol(tol_c)?;
            let (fluid, train) = model.load()?;
            let seeds = seeds
                .load(&fluid)?
                .context("seeds required: --seeds FILE or --seed-from-truth FILE --day D")?;
            let meas = io::load_measurements(&measurements)?;
            let truth = truth.map(|p| io::load_truth(p, &fluid)).transpose()?;
            let eos = PengRobinson::new(&fluid);
            let results = Estimator::new(&eos, &train).estimate_timeseries(&seeds, &meas, tol_c)?;
            let path = outputs.path(&out, "estimates.csv")?;
            io::save_estimates(&path, &fluid, &results, truth.as_deref())?;
            println!("estimate: seeds {}, tolerance {tol_c} C", seeds.provenance);
            summarize(&results, truth.as_deref());
            println!("  wrote {}", path.display());
        }
        Command::Sweep {
            model,
            mode,
            measurements,
            seeds,
            truth,
            tolerances_c,
            seed_days,
            tol_c,
            out,
        } => {
            let (fluid, train) = model.load()?;
            let meas = io::load_measurements(&measurements)?;
            let truth = truth.map(|p| io::load_truth(p, &fluid)).transpose()?;
            let eos = PengRobinson::new(&fluid);
            let est = Estimator::new(&eos, &train);
            let (key, name, blocks) = match mode {
                SweepMode::Tolerance => {
                    let seeds = seeds
                        .load(&fluid)?
                        .context("tolerance mode needs --seeds or --seed-from-truth --day")?;
                    let blocks = est.sweep_tolerance(&seeds, &meas, &tolerances_c)?;
                    ("tolerance_c", "sweep_tolerance.csv", blocks)
                }
                SweepMode::SeedTimes => {
                    check_tol(tol_c)?;
                    let truth = truth.as_deref().context("seed-times mode needs --truth")?;
                    if seed_days.is_empty() {
                        bail!("seed-times mode needs --seed-days");
                    }
                    let sweep = est.sweep_seed_times(truth, &meas, &seed_days, tol_c)?;
                    for d in &sweep.duplicates {
                        eprintln!("warning: seed day {d} given more than once; ignored");
                    }
                    ("seed_day", "sweep_seed_times.csv", sweep.blocks)
                }
            };
            let path = outputs.path(&out, name)?;
            io::save_sweep(&path, key, &fluid, &blocks, truth.as_deref())?;
            for (k, results) in &blocks {
                println!("{key} = {k}");
                summarize(results, truth.as_deref());
            }
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut outputs = Outputs::default();
    match run(cli.command, &mut outputs) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            outputs.discard();
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
