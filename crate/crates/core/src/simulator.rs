//! Monte Carlo engine: per-trial channel gains and OOK symbol error rate
//! curves.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, trial)`, so
//! results do not depend on how trials are scheduled across worker threads.
//! SER is evaluated analytically per trial as `Q(√γ_t)` and averaged, rather
//! than by simulating bits.

use std::f64::consts::SQRT_2;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{los_gain, nlos_gain, nlos_gain_second_order, ChannelGain};
use crate::error::{Error, Result};
use crate::geometry::OrientedBox;
use crate::irs::{ma_gain, metasurface_patch_gain, msa_gain, steered_mirror_gain};
use crate::numeric::CompensatedSum;
use crate::scene::{sample_blockers, sample_ue, PhotoDetector, Scene};

/// SER threshold of soft-decision forward error correction.
pub const SOFT_FEC_LIMIT: f64 = 3.8e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialGains {
    pub trial: u64,
    pub h_los: f64,
    pub h_nlos: f64,
    pub h_irs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    LosOnly,
    LosNlos,
    LosNlosIrs,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::LosOnly, Scenario::LosNlos, Scenario::LosNlosIrs];

    /// Gain the receiver sees in this scenario.
    #[inline]
    pub fn effective_gain(self, g: &TrialGains) -> f64 {
        match self {
            Scenario::LosOnly => g.h_los,
            Scenario::LosNlos => g.h_los + g.h_nlos,
            Scenario::LosNlosIrs => g.h_los + g.h_nlos + g.h_irs,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::LosOnly => "los_only",
            Scenario::LosNlos => "los_nlos",
            Scenario::LosNlosIrs => "los_nlos_irs",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario {s:?}")))
    }
}

/// Evenly spaced average-SNR points in dB, both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrGrid {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Result<Self> {
        let grid = Self { start_db, stop_db, step_db };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start_db.is_finite() && self.stop_db.is_finite() && self.step_db.is_finite()) {
            return Err(Error::InvalidArgument("SNR grid bounds must be finite".into()));
        }
        if self.start_db > self.stop_db {
            return Err(Error::InvalidArgument(format!(
                "SNR grid start {} exceeds stop {}",
                self.start_db, self.stop_db
            )));
        }
        if self.step_db <= 0.0 {
            return Err(Error::InvalidArgument(format!("SNR grid step {} must be > 0", self.step_db)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start_db + i as f64 * self.step_db).collect()
    }
}

impl Default for SnrGrid {
    fn default() -> Self {
        Self { start_db: 0.0, stop_db: 40.0, step_db: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerPoint {
    pub snr_db: f64,
    pub ser: f64,
    /// Monte Carlo standard error of `ser` over trials.
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerCurve {
    pub scenario: Scenario,
    pub points: Vec<SerPoint>,
    pub trials: usize,
}

/// How per-trial SNR is derived from the grid's average SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Each scenario is normalized by its own mean-square gain.
    #[default]
    PerScenario,
    /// Every scenario is normalized by the LOS+NLOS mean-square gain.
    Baseline,
}

/// Random stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Reflecting-surface gain of all arrays in the scene. With several APs each
/// element serves whichever AP gives it the most power.
pub fn irs_gain(scene: &Scene, ue: &PhotoDetector, blockers: &[OrientedBox]) -> Result<ChannelGain> {
    let mut acc = CompensatedSum::new();
    if let [ap] = scene.aps.as_slice() {
        for array in &scene.mirror_arrays {
            acc.add(ma_gain(ap, array, ue, blockers)?.value());
        }
        for array in &scene.metasurface_arrays {
            acc.add(msa_gain(ap, array, ue, blockers).value());
        }
    } else {
        for elem in scene.mirror_arrays.iter().flat_map(|a| &a.elements) {
            let mut best = 0.0_f64;
            for ap in &scene.aps {
                best = best.max(steered_mirror_gain(ap, elem, ue, blockers)?);
            }
            acc.add(best);
        }
        for patch in scene.metasurface_arrays.iter().flat_map(|a| &a.patches) {
            let best = scene
                .aps
                .iter()
                .map(|ap| metasurface_patch_gain(ap, patch, ue, blockers))
                .fold(0.0, f64::max);
            acc.add(best);
        }
    }
    ChannelGain::new(acc.value().max(0.0))
}

/// Gains of every link for a given receiver and blocker realization.
pub fn link_gains(scene: &Scene, ue: &PhotoDetector, blockers: &[OrientedBox]) -> Result<(f64, f64, f64)> {
    let mut los = CompensatedSum::new();
    let mut nlos = CompensatedSum::new();
    for ap in &scene.aps {
        // an AP at the receiver's own position contributes no defined gain
        los.add(los_gain(ap, ue, blockers).map(ChannelGain::value).unwrap_or(0.0));
        nlos.add(nlos_gain(ap, ue, &scene.patches, blockers).value());
        if scene.params.nlos_order >= 2 {
            nlos.add(nlos_gain_second_order(ap, ue, &scene.patches, blockers).value());
        }
    }
    let irs = irs_gain(scene, ue, blockers)?.value();
    Ok((los.value(), nlos.value(), irs))
}

/// One trial: sample a receiver and blockers from the trial's stream and
/// evaluate every link. Blockers whose volume contains the receiver are
/// dropped unless `drop_enclosing` is off.
pub fn simulate_trial(scene: &Scene, seed: u64, trial: u64) -> Result<TrialGains> {
    let mut rng = trial_rng(seed, trial);
    let ue = sample_ue(&mut rng, scene);
    let mut blockers = sample_blockers(&mut rng, scene);
    if scene.blocker_model.drop_enclosing {
        blockers.retain(|b| !b.contains(ue.position));
    }
    let (h_los, h_nlos, h_irs) = link_gains(scene, &ue, &blockers)?;
    Ok(TrialGains { trial, h_los, h_nlos, h_irs })
}

/// Runs `trials` independent trials on the current rayon pool. Output is in
/// trial order and identical for any worker count.
pub fn run_trials(scene: &Scene, trials: u64, seed: u64) -> Result<Vec<TrialGains>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    (0..trials).into_par_iter().map(|t| simulate_trial(scene, seed, t)).collect()
}

/// Gaussian upper-tail probability.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

fn mean_square(gains: &[TrialGains], scenario: Scenario) -> f64 {
    let acc: CompensatedSum = gains
        .iter()
        .map(|g| {
            let h = scenario.effective_gain(g);
            h * h
        })
        .collect();
    acc.value() / gains.len() as f64
}

/// Fraction of trials whose effective gain is exactly zero.
pub fn zero_gain_fraction(gains: &[TrialGains], scenario: Scenario) -> f64 {
    if gains.is_empty() {
        return 0.0;
    }
    gains.iter().filter(|g| scenario.effective_gain(g) == 0.0).count() as f64 / gains.len() as f64
}

/// SER curve with each scenario normalized by its own mean-square gain.
pub fn ser_curve(gains: &[TrialGains], scenario: Scenario, grid: &SnrGrid) -> Result<SerCurve> {
    ser_curve_normalized(gains, scenario, grid, Normalization::PerScenario)
}

/// SER of OOK versus average SNR. At grid point `γ̄` a trial with gain `h`
/// sees `γ = γ̄·h²/H²` where `H²` is the reference mean-square gain.
pub fn ser_curve_normalized(
    gains: &[TrialGains],
    scenario: Scenario,
    grid: &SnrGrid,
    normalization: Normalization,
) -> Result<SerCurve> {
    if gains.is_empty() {
        return Err(Error::InvalidArgument("SER curve needs at least one trial".into()));
    }
    grid.validate()?;
    let reference = match normalization {
        Normalization::PerScenario => mean_square(gains, scenario),
        Normalization::Baseline => mean_square(gains, Scenario::LosNlos),
    };
    let n = gains.len() as f64;
    let ratios: Vec<f64> = if reference > 0.0 {
        gains
            .iter()
            .map(|g| {
                let h = scenario.effective_gain(g);
                h * h / reference
            })
            .collect()
    } else {
        vec![0.0; gains.len()]
    };

    let points = grid
        .points()
        .into_iter()
        .map(|snr_db| {
            let avg = 10f64.powf(snr_db / 10.0);
            let mut sum = CompensatedSum::new();
            let mut sum_sq = CompensatedSum::new();
            for &r in &ratios {
                let p = q_function((avg * r).sqrt());
                sum.add(p);
                sum_sq.add(p * p);
            }
            let mean = sum.value() / n;
            let var = if gains.len() > 1 {
                ((sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            SerPoint { snr_db, ser: mean.clamp(0.0, 0.5), std_err: (var / n).sqrt() }
        })
        .collect();
    Ok(SerCurve { scenario, points, trials: gains.len() })
}

/// Average SNR needed to reach a target SER.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RequiredSnr {
    Reached {
        snr_db: f64,
        /// The curve rises back above the target after the first crossing.
        non_monotone: bool,
    },
    Unreachable,
}

impl RequiredSnr {
    pub fn db(&self) -> Option<f64> {
        match self {
            RequiredSnr::Reached { snr_db, .. } => Some(*snr_db),
            RequiredSnr::Unreachable => None,
        }
    }
}

impl fmt::Display for RequiredSnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RequiredSnr::Reached { snr_db, .. } => write!(f, "{snr_db:.2} dB"),
            RequiredSnr::Unreachable => f.write_str("unreachable"),
        }
    }
}

/// First crossing of `target`, interpolated linearly in log-SER between the
/// bracketing grid points.
pub fn required_snr(curve: &SerCurve, target: f64) -> Result<RequiredSnr> {
    if !(target > 0.0 && target < 0.5) {
        return Err(Error::InvalidArgument(format!("target SER {target} outside (0, 0.5)")));
    }
    let pts = &curve.points;
    let Some(k) = pts.iter().position(|p| p.ser <= target) else {
        return Ok(RequiredSnr::Unreachable);
    };
    let non_monotone = pts[k..].iter().any(|p| p.ser > target);
    let snr_db = if k == 0 {
        pts[0].snr_db
    } else {
        let (a, b) = (pts[k - 1], pts[k]);
        if b.ser > 0.0 {
            let frac = (a.ser.ln() - target.ln()) / (a.ser.ln() - b.ser.ln());
            a.snr_db + frac * (b.snr_db - a.snr_db)
        } else {
            // log-SER is unbounded at zero; fall back to linear SER
            let frac = (a.ser - target) / a.ser;
            a.snr_db + frac * (b.snr_db - a.snr_db)
        }
    };
    Ok(RequiredSnr::Reached { snr_db, non_monotone })
}
