mod common;

use chokegor::estimator::{score, TruthRecord};
use chokegor::process::{
    forward_timeseries, recombine, separator_train, ChokeMeasurement, ForwardRun, ProfileSpec,
    SeparatorTrain,
};
use chokegor::{
    Composition, EstimationStatus, Estimator, FluidSystem, PengRobinson, SeedPair,
};
use common::TWO_ROOT_CASE;

fn model() -> PengRobinson {
    PengRobinson::new(&FluidSystem::spe5())
}

fn bundled_run(m: &PengRobinson, train: &SeparatorTrain) -> ForwardRun {
    let run = forward_timeseries(m, &ProfileSpec::bundled().generate().unwrap(), train);
    assert!(run.failures.is_empty());
    run
}

fn initial_seeds(run: &ForwardRun) -> SeedPair {
    TruthRecord::from(&run.steps[0]).seeds()
}

#[test]
fn forward_then_inverse_recovers_the_step_with_its_own_seeds() {
    let m = model();
    let train = SeparatorTrain::default();
    let run = bundled_run(&m, &train);
    let est = Estimator::new(&m, &train);
    for step in run.steps.iter().step_by(11) {
        let truth = TruthRecord::from(step);
        let r = est.solve_fg(&truth.seeds(), &step.measurement, 1e-4).unwrap();
        assert_eq!(r.status, EstimationStatus::Converged, "day {}", step.measurement.day);
        assert!((r.f_g_est.unwrap() - truth.f_g).abs() < 1e-3);
        let (delta, mpe) = score(&r, &truth);
        assert!(delta.unwrap().abs() < 0.5, "{delta:?}");
        assert!(mpe.unwrap() < 0.5, "{mpe:?}");
    }
}

#[test]
fn corrupted_step_has_no_bracket_and_neighbours_are_unaffected() {
    let m = model();
    let train = SeparatorTrain::default();
    let run = bundled_run(&m, &train);
    let est = Estimator::new(&m, &train);
    let seeds = initial_seeds(&run);
    let mut meas: Vec<ChokeMeasurement> = run.measurements()[..5].to_vec();
    let clean = est.estimate_timeseries(&seeds, &meas, 1e-3).unwrap();
    meas[2].t_out += 25.0;
    let dirty = est.estimate_timeseries(&seeds, &meas, 1e-3).unwrap();
    assert_eq!(dirty[2].status, EstimationStatus::NoBracket);
    assert!(dirty[2].f_g_est.is_none());
    let env = dirty[2].envelope.expect("envelope reported");
    assert!(env.t_out_max < meas[2].t_out);
    for i in [0, 1, 3, 4] {
        assert_eq!(dirty[i], clean[i]);
    }
}

#[test]
fn grid_residuals_match_direct_recombination() {
    let m = model();
    let train = SeparatorTrain::default();
    let run = bundled_run(&m, &train);
    let est = Estimator::new(&m, &train);
    let seeds = initial_seeds(&run);
    let meas = run.steps[30].measurement;
    for i in 0..=20 {
        let f_g = i as f64 / 20.0;
        let z = recombine(&seeds.oil, &seeds.gas, f_g).unwrap();
        let direct = chokegor::process::choke_expand(&m, &z, meas.p_in, meas.t_in, meas.p_out)
            .unwrap()
            .t_out
            - meas.t_out;
        assert_eq!(est.residual_temperature(&seeds, &meas, f_g).unwrap(), direct);
    }
}

#[test]
fn rich_gas_dew_point_gives_multiple_roots() {
    let m = model();
    let train = SeparatorTrain::default();
    let c = &TWO_ROOT_CASE;
    let z = Composition::normalize(&c.feed).unwrap();
    let s = separator_train(&m, &z, &train).unwrap();
    let seeds = SeedPair::new(s.oil, s.gas, "rich feed").unwrap();
    let meas = ChokeMeasurement {
        day: 1.0,
        p_in: c.p_in,
        t_in: c.t_in,
        p_out: c.p_out,
        t_out: c.t_out,
    };
    let tol = 1e-3;
    let est = Estimator::new(&m, &train);
    let r = est.solve_fg(&seeds, &meas, tol).unwrap();
    assert_eq!(r.status, EstimationStatus::MultipleRoots);
    assert!(r.candidates.len() >= 2);
    for cand in &r.candidates {
        assert!(cand.residual.abs() <= tol);
        let direct = est.residual_temperature(&seeds, &meas, cand.f_g).unwrap();
        assert!((direct - cand.residual).abs() < 1e-12);
    }
    // without history the smallest f_g wins
    let smallest = r.candidates.iter().map(|c| c.f_g).fold(f64::MAX, f64::min);
    assert_eq!(r.f_g_est, Some(smallest));
    // with history the GOR closest to it wins
    let high = r.candidates.iter().filter_map(|c| c.gor).fold(0.0, f64::max);
    let near = est.solve_fg_near(&seeds, &meas, tol, Some(high * 1.01)).unwrap();
    assert_eq!(near.gor_est, Some(high));
}

#[test]
fn tighter_tolerance_never_loosens_the_residual() {
    let m = model();
    let train = SeparatorTrain::default();
    let run = bundled_run(&m, &train);
    let est = Estimator::new(&m, &train);
    let seeds = initial_seeds(&run);
    let meas: Vec<_> = run.measurements().into_iter().step_by(7).collect();
    let sweep = est.sweep_tolerance(&seeds, &meas, &[0.1, 0.01, 0.001]).unwrap();
    for (tol, block) in &sweep {
        assert_eq!(block.len(), meas.len());
        for r in block {
            assert_eq!(r.status, EstimationStatus::Converged);
            assert!(r.residual.unwrap().abs() <= *tol);
        }
    }
    assert!(est.sweep_tolerance(&seeds, &meas, &[]).is_err());
    assert!(est.sweep_tolerance(&seeds, &meas, &[0.01, -1.0]).is_err());
}

#[test]
fn timeseries_estimation_is_deterministic() {
    let m = model();
    let train = SeparatorTrain::default();
    let run = bundled_run(&m, &train);
    let est = Estimator::new(&m, &train);
    let seeds = initial_seeds(&run);
    let meas = run.measurements();
    let a = est.estimate_timeseries(&seeds, &meas, 1e-3).unwrap();
    let b = est.estimate_timeseries(&seeds, &meas, 1e-3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_time_sweep_handles_duplicates_and_single_seed() {
    let m = model();
    let train = SeparatorTrain::default();
    let run = bundled_run(&m, &train);
    let est = Estimator::new(&m, &train);
    let truth: Vec<TruthRecord> = run.steps.iter().map(TruthRecord::from).collect();
    let meas: Vec<_> = run.measurements()[..20].to_vec();
    let day = truth[10].day;

    let single = est.sweep_seed_times(&truth, &meas, &[day], 1e-4).unwrap();
    assert_eq!(single.blocks.len(), 1);
    assert!(single.duplicates.is_empty());
    let at_seed = &single.blocks[0].1[10];
    let (delta, mpe) = score(at_seed, &truth[10]);
    assert!(delta.unwrap().abs() < 0.5 && mpe.unwrap() < 0.5);

    let dup = est
        .sweep_seed_times(&truth, &meas, &[day, truth[0].day, day], 1e-4)
        .unwrap();
    assert_eq!(dup.blocks.len(), 2);
    assert_eq!(dup.duplicates, vec![day]);
    assert_eq!(dup.blocks[0], single.blocks[0]);

    assert!(est.sweep_seed_times(&truth, &meas, &[], 1e-4).is_err());
    assert!(est.sweep_seed_times(&truth, &meas, &[0.5], 1e-4).is_err());
}
