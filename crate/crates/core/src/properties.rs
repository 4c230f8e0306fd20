//! Randomized invariant suites over the channel models. Each suite draws its
//! cases from per-case streams, so reports are identical across runs and
//! thread counts.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::{los_gain, nlos_gain, wall_patches};
use crate::error::Result;
use crate::geometry::{cos_between, UnitVec3, Vec3};
use crate::oracles::SuiteReport;
use crate::scene::{sample_blockers, sample_ue, Luminaire, PhotoDetector, Scene, SceneParams};
use crate::simulator::{link_gains, trial_rng};

/// Outcome of one randomized case: the discrepancy in the suite's metric and
/// whether it is within tolerance. `None` means the case was filtered out.
type Case = Option<(f64, bool)>;

fn run_suite<F>(name: &'static str, tolerance: f64, cases: usize, seed: u64, check: F) -> Result<SuiteReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Case> + Sync,
{
    let outcomes: Vec<Case> = (0..cases as u64)
        .into_par_iter()
        .map(|i| check(&mut trial_rng(seed, i)))
        .collect::<Result<_>>()?;
    let mut report = SuiteReport { name, cases: 0, failures: 0, worst: 0.0, tolerance };
    for (metric, ok) in outcomes.into_iter().flatten() {
        report.cases += 1;
        report.worst = report.worst.max(metric);
        if !ok {
            report.failures += 1;
        }
    }
    Ok(report)
}

fn random_unit<R: Rng>(rng: &mut R) -> UnitVec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        if let Ok(u) = UnitVec3::new(v) {
            return u;
        }
    }
}

/// Small-array scene used by the gain suites, with blockers at `density`.
fn property_scene(density: f64) -> Result<Scene> {
    let mut params = SceneParams { n_per_side: 10, ..SceneParams::default() };
    params.blockers.density = density;
    Scene::build(&params)
}

/// Every link gain is finite and non-negative for sampled receivers and
/// blocker fields.
pub fn gain_nonnegativity_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let scene = property_scene(1.0)?;
    run_suite("gain non-negativity", 0.0, cases, seed, |rng| {
        let ue = sample_ue(rng, &scene);
        let blockers = sample_blockers(rng, &scene);
        let (los, nlos, irs) = link_gains(&scene, &ue, &blockers)?;
        let worst = [los, nlos, irs].into_iter().fold(0.0_f64, |w, g| w.max(-g));
        let ok = [los, nlos, irs].iter().all(|g| g.is_finite() && *g >= 0.0);
        Ok(Some((worst, ok)))
    })
}

/// Adding blockers never raises any link gain. The metric is the largest
/// relative increase.
pub fn blockage_monotonicity_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    const TOL: f64 = 1e-12;
    let scene = property_scene(1.0)?;
    run_suite("blockage monotonicity", TOL, cases, seed, |rng| {
        let ue = sample_ue(rng, &scene);
        let blockers = sample_blockers(rng, &scene);
        let keep = rng.random_range(0..=blockers.len());
        let (a_los, a_nlos, a_irs) = link_gains(&scene, &ue, &blockers[..keep])?;
        let (b_los, b_nlos, b_irs) = link_gains(&scene, &ue, &blockers)?;
        let mut worst = 0.0_f64;
        for (fewer, more) in [(a_los, b_los), (a_nlos, b_nlos), (a_irs, b_irs)] {
            if more > fewer {
                worst = worst.max((more - fewer) / fewer.max(f64::MIN_POSITIVE));
            }
        }
        Ok(Some((worst, worst <= TOL)))
    })
}

/// Direct gain is positive exactly when the AP lies inside the receiver's
/// field of view. Cases within 1e-9 rad of the cutoff are skipped.
pub fn fov_cutoff_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let ap = Luminaire {
        position: Vec3::new(2.5, 2.5, 3.0),
        normal: UnitVec3::NEG_Z,
        lambertian_order: 1.0,
        optical_power: 1.0,
    };
    run_suite("FOV cutoff", 0.0, cases, seed, |rng| {
        let position =
            Vec3::new(rng.random_range(0.0..5.0), rng.random_range(0.0..5.0), rng.random_range(0.2..2.8));
        let ue = PhotoDetector {
            position,
            normal: random_unit(rng),
            area: 1e-4,
            fov: rng.random_range(5.0_f64..90.0).to_radians(),
        };
        let toward_ap = UnitVec3::new(ap.position - position)?;
        let psi = cos_between(ue.normal, toward_ap).clamp(-1.0, 1.0).acos();
        if (psi - ue.fov).abs() < 1e-9 {
            return Ok(None);
        }
        let lit = los_gain(&ap, &ue, &[])?.value() > 0.0;
        let ok = lit == (psi < ue.fov);
        Ok(Some((if ok { 0.0 } else { 1.0 }, ok)))
    })
}

/// Along the AP boresight with a facing receiver, doubling the distance
/// divides the direct gain by exactly four.
pub fn inverse_square_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    const TOL: f64 = 1e-9;
    run_suite("1/d^2 scaling", TOL, cases, seed, |rng| {
        let normal = random_unit(rng);
        let ap = Luminaire {
            position: Vec3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            ),
            normal,
            lambertian_order: rng.random_range(1.0..20.0),
            optical_power: 1.0,
        };
        let d = rng.random_range(0.1..5.0);
        let area = rng.random_range(1e-5..1e-3);
        let at = |dist: f64| PhotoDetector {
            position: ap.position + normal * dist,
            normal: -normal,
            area,
            fov: PI / 2.0,
        };
        let near = los_gain(&ap, &at(d), &[])?.value();
        let far = los_gain(&ap, &at(2.0 * d), &[])?.value();
        let err = (near / far - 4.0).abs() / 4.0;
        Ok(Some((err, err <= TOL)))
    })
}

/// Direct gain never exceeds the on-axis Lambertian value at the same
/// distance, and the total received fraction never exceeds one.
pub fn energy_bound_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let scene = property_scene(0.5)?;
    run_suite("energy bound", 1.0, cases, seed, |rng| {
        let ue = sample_ue(rng, &scene);
        let blockers = sample_blockers(rng, &scene);
        let (los, nlos, irs) = link_gains(&scene, &ue, &blockers)?;
        let ap = &scene.aps[0];
        let d2 = (ap.position - ue.position).norm_squared();
        let peak = (ap.lambertian_order + 1.0) / (2.0 * PI * d2) * ue.area;
        let ratio = (los / peak).max(los + nlos + irs);
        Ok(Some((ratio, los <= peak * (1.0 + 1e-12) && los + nlos + irs <= 1.0)))
    })
}

/// First-order diffuse gain on 0.25 m patches against 0.125 m patches, for
/// sampled receivers in an empty room.
pub fn nlos_refinement_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    const TOL: f64 = 0.02;
    let scene = property_scene(0.0)?;
    let rho = scene.wall_reflectivity;
    let coarse = wall_patches(&scene.room, 0.25, rho)?;
    let fine = wall_patches(&scene.room, 0.125, rho)?;
    let ap = scene.aps[0];
    run_suite("NLOS grid refinement", TOL, cases, seed, |rng| {
        let ue = sample_ue(rng, &scene);
        let g_coarse = nlos_gain(&ap, &ue, &coarse, &[]).value();
        let g_fine = nlos_gain(&ap, &ue, &fine, &[]).value();
        if g_fine == 0.0 {
            return Ok(Some((0.0, g_coarse == 0.0)));
        }
        let rel = (g_coarse - g_fine).abs() / g_fine;
        Ok(Some((rel, rel <= TOL)))
    })
}

/// All property suites at `cases` randomized cases each.
pub fn property_suites(cases: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        gain_nonnegativity_suite(cases, seed)?,
        blockage_monotonicity_suite(cases, seed)?,
        fov_cutoff_suite(cases, seed)?,
        inverse_square_suite(cases, seed)?,
        energy_bound_suite(cases, seed)?,
        nlos_refinement_suite(cases, seed)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_a_small_corpus() {
        for report in property_suites(200, 3).unwrap() {
            assert!(report.passed(), "{report}");
            assert!(report.cases > 150, "{report}");
        }
    }
}
