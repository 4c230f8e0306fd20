use std::time::Instant;

use irsvlc::oracles::{mirror_normal_suite, occlusion_suite, q_function_suite, SuiteReport};
use irsvlc::properties::property_suites;
use irsvlc::{
    required_snr, run_trials, ser_curve_normalized, zero_gain_fraction, RequiredSnr, Scenario, Scene,
    SerCurve,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Curves and readouts for one blocker density.
#[derive(Debug, Clone)]
pub struct DensityRun {
    pub density: f64,
    pub curves: Vec<SerCurve>,
    pub required: Vec<RequiredSnr>,
    pub zero_fractions: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub runs: Vec<DensityRun>,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub blocker_density: f64,
    pub scenario: Scenario,
    pub required_snr: RequiredSnr,
    pub zero_gain_fraction: f64,
    /// SER at the top of the grid.
    pub ser_at_max_snr: f64,
}

/// Required-SNR difference `baseline − improved` at one density; `None`
/// unless both are reachable.
#[derive(Debug, Clone, Serialize)]
pub struct Gap {
    pub blocker_density: f64,
    pub baseline: Scenario,
    pub improved: Scenario,
    pub gap_db: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub trials: u64,
    pub target_ser: f64,
    pub wall_clock_s: f64,
    pub results: Vec<ScenarioResult>,
    pub gaps: Vec<Gap>,
    pub config: RunConfig,
}

impl DensityRun {
    pub fn curve(&self, scenario: Scenario) -> Option<&SerCurve> {
        self.curves.iter().find(|c| c.scenario == scenario)
    }

    pub fn required(&self, scenario: Scenario) -> Option<RequiredSnr> {
        self.curves.iter().position(|c| c.scenario == scenario).map(|i| self.required[i])
    }
}

impl RunOutput {
    pub fn run(&self, density: f64) -> Option<&DensityRun> {
        self.runs.iter().find(|r| r.density == density)
    }

    pub fn summary(&self) -> RunSummary {
        let mut results = Vec::new();
        let mut gaps = Vec::new();
        for run in &self.runs {
            for (i, curve) in run.curves.iter().enumerate() {
                results.push(ScenarioResult {
                    blocker_density: run.density,
                    scenario: curve.scenario,
                    required_snr: run.required[i],
                    zero_gain_fraction: run.zero_fractions[i],
                    ser_at_max_snr: curve.points.last().map_or(0.5, |p| p.ser),
                });
            }
            let mut scenarios: Vec<Scenario> = run.curves.iter().map(|c| c.scenario).collect();
            scenarios.sort();
            for (i, &baseline) in scenarios.iter().enumerate() {
                for &improved in &scenarios[i + 1..] {
                    let gap_db = match (run.required(baseline), run.required(improved)) {
                        (Some(a), Some(b)) => a.db().zip(b.db()).map(|(a, b)| a - b),
                        _ => None,
                    };
                    gaps.push(Gap { blocker_density: run.density, baseline, improved, gap_db });
                }
            }
        }
        RunSummary {
            seed: self.config.seed,
            trials: self.config.trials,
            target_ser: self.config.snr.target_ser,
            wall_clock_s: self.wall_clock_s,
            results,
            gaps,
            config: self.config.clone(),
        }
    }
}

/// Runs every configured density and scenario on the current rayon pool.
pub fn simulate(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let started = Instant::now();
    let grid = config.grid();
    let mut runs = Vec::with_capacity(config.blockers.densities.len());
    for &density in &config.blockers.densities {
        let scene = Scene::build(&config.scene_params(density))?;
        let gains = run_trials(&scene, config.trials, config.seed)?;
        let mut run = DensityRun { density, curves: vec![], required: vec![], zero_fractions: vec![] };
        for &scenario in &config.snr.scenarios {
            let curve = ser_curve_normalized(&gains, scenario, &grid, config.snr.normalization)?;
            run.required.push(required_snr(&curve, config.snr.target_ser)?);
            run.zero_fractions.push(zero_gain_fraction(&gains, scenario));
            run.curves.push(curve);
        }
        runs.push(run);
    }
    Ok(RunOutput { config: config.clone(), runs, wall_clock_s: started.elapsed().as_secs_f64() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Vary {
    /// Mirrors per array side.
    N,
    Density,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub blocker_density: f64,
    pub scenario: Scenario,
    pub required_snr: RequiredSnr,
}

/// Direction of required SNR along the swept values for one series.
/// Unreachable counts as +∞.
#[derive(Debug, Clone, Serialize)]
pub struct Monotonicity {
    pub scenario: Scenario,
    /// `None` when density itself is swept.
    pub blocker_density: Option<f64>,
    pub non_increasing: bool,
    pub non_decreasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub vary: Vary,
    pub values: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub monotonicity: Vec<Monotonicity>,
    pub wall_clock_s: f64,
    pub config: RunConfig,
}

/// One full simulation per value, varying a single parameter. Values are
/// processed in ascending order.
pub fn sweep(config: &RunConfig, vary: Vary, values: &[f64]) -> Result<SweepOutput> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let mut values = values.to_vec();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config("sweep values must be finite".into()));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    let variant = |v: f64| -> Result<RunConfig> {
        let mut cfg = config.clone();
        match vary {
            Vary::N => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(CliError::Config(format!("array size must be a positive integer, got {v}")));
                }
                cfg.irs.n_per_side = v as usize;
            }
            Vary::Density => cfg.blockers.densities = vec![v],
        }
        cfg.validate()?;
        Ok(cfg)
    };
    let variants = values.iter().map(|&v| variant(v)).collect::<Result<Vec<_>>>()?;

    let started = Instant::now();
    let mut rows = Vec::new();
    for (&value, cfg) in values.iter().zip(&variants) {
        let out = simulate(cfg)?;
        for run in &out.runs {
            for (curve, &required_snr) in run.curves.iter().zip(&run.required) {
                rows.push(SweepRow { value, blocker_density: run.density, scenario: curve.scenario, required_snr });
            }
        }
    }

    let mut monotonicity = Vec::new();
    let series_densities: Vec<Option<f64>> = match vary {
        Vary::N => config.blockers.densities.iter().map(|&d| Some(d)).collect(),
        Vary::Density => vec![None],
    };
    for density in series_densities {
        for &scenario in &config.snr.scenarios {
            let series: Vec<f64> = rows
                .iter()
                .filter(|r| r.scenario == scenario && density.is_none_or(|d| r.blocker_density == d))
                .map(|r| r.required_snr.db().unwrap_or(f64::INFINITY))
                .collect();
            monotonicity.push(Monotonicity {
                scenario,
                blocker_density: density,
                non_increasing: series.windows(2).all(|w| w[1] <= w[0]),
                non_decreasing: series.windows(2).all(|w| w[1] >= w[0]),
            });
        }
    }
    Ok(SweepOutput {
        vary,
        values,
        rows,
        monotonicity,
        wall_clock_s: started.elapsed().as_secs_f64(),
        config: config.clone(),
    })
}

/// Oracle cross-checks followed by the randomized property suites.
pub fn verify(cases: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    let mut reports = vec![
        mirror_normal_suite(100, seed)?,
        q_function_suite(801)?,
        occlusion_suite(10_000, 10_000, 1e-6, seed)?,
    ];
    reports.extend(property_suites(cases, seed)?);
    Ok(reports)
}
