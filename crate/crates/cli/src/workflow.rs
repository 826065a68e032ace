use serde::Serialize;

use seqbelief::continuous::sde_path_records;
use seqbelief::decomposition::{DecompositionError, DriftReference};
use seqbelief::export::{
    write_asset_csv, write_decomposition_csv, write_json, write_summaries_jsonl, write_time_fits_csv,
    write_trajectory_csv,
};
use seqbelief::redundancy::RedundancyError;
use seqbelief::{
    asset_scenario, classify_pair, decompose, path_dependency_witness, redundancy_verdict, sign_statistics, BeliefSeries,
    Ensemble, PathRecord, Schedule, TestClass,
};

use crate::config::{RunConfig, Scenario};
use crate::error::CliError;
use crate::output::{Format, OutputDir};

fn simulate(cfg: &RunConfig) -> Result<Vec<PathRecord>, CliError> {
    match &cfg.scenario {
        Scenario::Discrete(spec) => Ok(seqbelief::simulate_paths(spec).map_err(CliError::runtime)?.paths),
        Scenario::Filter(f) => f.simulate().map_err(CliError::runtime),
        Scenario::Sde {
            spec,
            true_prior,
            agent_prior,
            paths,
        } => sde_path_records(spec, *true_prior, *agent_prior, *paths).map_err(CliError::runtime),
    }
}

fn write_paths(out: &mut OutputDir, records: &[PathRecord]) -> Result<(), CliError> {
    if out.wants(Format::Csv) {
        for rec in records {
            out.write(&format!("trajectories/path_{:06}.csv", rec.path_index), |w| write_trajectory_csv(rec, w))?;
        }
    }
    if out.wants(Format::Jsonl) {
        out.write("summaries.jsonl", |w| write_summaries_jsonl(records, w))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct FinalMeans {
    p: f64,
    p_check: f64,
    pi: f64,
    err: f64,
    bias: f64,
    diffusive: f64,
    true_loglr: f64,
    test_loglr: f64,
}

#[derive(Debug, Serialize)]
struct EnsembleSummary {
    scenario: &'static str,
    seed: u64,
    paths: usize,
    horizon: usize,
    time_step: Option<f64>,
    truth_class: Option<TestClass>,
    test_class: Option<TestClass>,
    final_means: FinalMeans,
}

fn scenario_name(s: &Scenario) -> &'static str {
    match s {
        Scenario::Discrete(_) => "discrete",
        Scenario::Filter(_) => "filter",
        Scenario::Sde { .. } => "sde",
    }
}

fn final_means(records: &[PathRecord]) -> FinalMeans {
    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&PathRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    FinalMeans {
        p: mean(&|r| *r.p.last().unwrap()),
        p_check: mean(&|r| *r.p_check.last().unwrap()),
        pi: mean(&|r| *r.pi.last().unwrap()),
        err: mean(&|r| *r.err.last().unwrap()),
        bias: mean(&|r| *r.bias.last().unwrap()),
        diffusive: mean(&|r| *r.diffusive.last().unwrap()),
        true_loglr: mean(&|r| *r.true_loglr.last().unwrap()),
        test_loglr: mean(&|r| *r.test_loglr.last().unwrap()),
    }
}

pub fn run_simulate(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let records = simulate(cfg)?;
    write_paths(out, &records)?;
    if out.wants(Format::Json) {
        let (truth_class, test_class) = match &cfg.scenario {
            Scenario::Discrete(s) => (Some(classify_pair(&s.truth_pair)), Some(classify_pair(&s.test_pair))),
            _ => (None, None),
        };
        let summary = EnsembleSummary {
            scenario: scenario_name(&cfg.scenario),
            seed: cfg.seed,
            paths: records.len(),
            horizon: cfg.scenario.horizon(),
            time_step: cfg.scenario.grid().map(|g| g.step),
            truth_class,
            test_class,
            final_means: final_means(&records),
        };
        out.write("summary.json", |w| write_json(&summary, w))?;
    }
    Ok(())
}

fn redundancy_error(e: RedundancyError) -> CliError {
    match e {
        RedundancyError::EnsembleTooSmall { .. } | RedundancyError::Coupling(_) => CliError::Validation(e.to_string()),
        other => CliError::runtime(other),
    }
}

pub fn run_redundancy(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let Scenario::Discrete(spec) = &cfg.scenario else {
        return Err(CliError::Validation("redundancy needs a discrete scenario".into()));
    };
    let Some(rc) = &cfg.redundancy else {
        return Err(CliError::Validation("redundancy needs a [redundancy] section".into()));
    };
    let a = seqbelief::simulate_paths(spec).map_err(CliError::runtime)?;
    let b: Option<Ensemble> = if rc.compare_test.is_some() || rc.compare_agent_prior.is_some() {
        let mut other = spec.clone();
        if let Some(p) = &rc.compare_test {
            other.test_pair = p.clone();
        }
        if let Some(pi) = rc.compare_agent_prior {
            other.agent_prior = seqbelief::Belief::new(pi).map_err(|e| CliError::Validation(e.to_string()))?;
        }
        Some(seqbelief::simulate_paths(&other).map_err(CliError::runtime)?)
    } else {
        None
    };
    let report = redundancy_verdict(&a, rc.series_a, b.as_ref().unwrap_or(&a), rc.series_b, &cfg.tolerances)
        .map_err(redundancy_error)?;
    write_paths(out, &a.paths)?;
    if out.wants(Format::Csv) {
        out.write("time_fits.csv", |w| write_time_fits_csv(&report, w))?;
    }
    if out.wants(Format::Json) {
        out.write("redundancy.json", |w| write_json(&report, w))?;
        if let (Some(eps), Some(delta)) = (rc.epsilon, rc.delta) {
            let ws = path_dependency_witness(&a.paths, BeliefSeries::Agent, BeliefSeries::Objective, eps, delta);
            out.write("witnesses.json", |w| write_json(&ws, w))?;
        }
    }
    Ok(())
}

/// Quarter points of the horizon, unless configured.
fn report_steps(cfg: &RunConfig) -> Vec<usize> {
    cfg.errors.steps.clone().unwrap_or_else(|| {
        let h = cfg.scenario.horizon();
        let mut v: Vec<usize> = (1..=4).map(|k| (k * h).div_ceil(4)).collect();
        v.dedup();
        v
    })
}

#[derive(Debug, Serialize)]
struct DecompositionSummary {
    path_index: usize,
    rho: f64,
    bias_sign: i8,
    closed_form_residual: f64,
    bias: f64,
    diffusive: f64,
    total: f64,
}

fn decomposition_error(e: DecompositionError) -> CliError {
    match e {
        DecompositionError::TimeOutOfRange { .. } => CliError::Validation(e.to_string()),
        other => CliError::runtime(other),
    }
}

pub fn run_errors(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let records = simulate(cfg)?;
    let decomps: Vec<_> = records.iter().map(decompose).collect();
    write_paths(out, &records)?;
    if out.wants(Format::Csv) {
        out.write("decomposition.csv", |w| write_decomposition_csv(&records, &decomps, w))?;
    }
    if out.wants(Format::Jsonl) {
        let rows: Vec<String> = decomps
            .iter()
            .map(|d| {
                serde_json::to_string(&DecompositionSummary {
                    path_index: d.path_index,
                    rho: d.rho,
                    bias_sign: d.bias_sign,
                    closed_form_residual: d.closed_form_residual,
                    bias: *d.bias.last().unwrap(),
                    diffusive: *d.diffusive.last().unwrap(),
                    total: *d.total.last().unwrap(),
                })
            })
            .collect::<Result<_, _>>()
            .map_err(CliError::runtime)?;
        out.write("decomposition.jsonl", |w| {
            for r in &rows {
                writeln!(w, "{r}")?;
            }
            Ok(())
        })?;
    }
    if out.wants(Format::Json) {
        let drift = match &cfg.scenario {
            Scenario::Filter(f) => Some(DriftReference {
                sigma_true: Schedule::Constant(f.filter.true_signal_to_noise()),
                sigma_agent: Schedule::Constant(f.filter.agent_signal_to_noise()),
                grid: f.grid,
            }),
            _ => None,
        };
        let stats = sign_statistics(&decomps, &report_steps(cfg), drift.as_ref()).map_err(decomposition_error)?;
        out.write("sign_statistics.json", |w| write_json(&stats, w))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AssetRow {
    step: usize,
    mean_x: f64,
    mean_y: f64,
    mean_z: f64,
}

#[derive(Debug, Serialize)]
struct AssetSummary {
    payoff_b: f64,
    payoff_bbar: f64,
    discount: f64,
    paths: usize,
    rows: Vec<AssetRow>,
}

pub fn run_scenario(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let Some(asset) = &cfg.asset else {
        return Err(CliError::Validation("scenario needs an [asset] section".into()));
    };
    let records = simulate(cfg)?;
    let scenarios = records
        .iter()
        .map(|r| asset_scenario(r, asset.payoff_b, asset.payoff_bbar, asset.discount))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    write_paths(out, &records)?;
    if out.wants(Format::Csv) {
        out.write("asset.csv", |w| write_asset_csv(&records, &scenarios, w))?;
    }
    if out.wants(Format::Json) {
        let n = scenarios.len() as f64;
        let rows = report_steps(cfg)
            .into_iter()
            .map(|t| AssetRow {
                step: t,
                mean_x: scenarios.iter().map(|s| s.x[t]).sum::<f64>() / n,
                mean_y: scenarios.iter().map(|s| s.y[t]).sum::<f64>() / n,
                mean_z: scenarios.iter().map(|s| s.z[t]).sum::<f64>() / n,
            })
            .collect();
        let summary = AssetSummary {
            payoff_b: asset.payoff_b,
            payoff_bbar: asset.payoff_bbar,
            discount: asset.discount,
            paths: scenarios.len(),
            rows,
        };
        out.write("asset_summary.json", |w| write_json(&summary, w))?;
    }
    Ok(())
}
