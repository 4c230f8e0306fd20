//! Slow brute-force references for the closed-form and fast paths, plus the
//! suites that cross-check them. None of these reuse the code they validate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{segment_intersects_box, OrientedBox, Segment, UnitVec3, Vec3};
use crate::irs::{mirror_element_gain, optimal_mirror_normal, MirrorElement};
use crate::scene::{Luminaire, PhotoDetector, Room, Wall};
use crate::simulator::q_function;

/// Facet normal found by exhaustive search over the two tilt angles of the
/// mirror, maximizing how well the specular reflection of `src` lines up with
/// `dst`. A coarse sweep at `coarse_step_deg` is followed by two local
/// refinements at a tenth and a hundredth of the step.
///
/// Tilts are rotations about the facet's two mounting axes, which cover the
/// front hemisphere without a coordinate pole.
pub fn grid_search_mirror_normal(
    src: Vec3,
    elem: &MirrorElement,
    dst: Vec3,
    coarse_step_deg: f64,
) -> Result<UnitVec3> {
    if !(coarse_step_deg > 0.0 && coarse_step_deg <= 5.0) {
        return Err(Error::InvalidArgument(format!(
            "coarse step {coarse_step_deg}° outside (0, 5]"
        )));
    }
    let w = elem.mount_normal.as_vec();
    let a = elem.mount_axis.as_vec();
    let b = w.cross(a);
    let c = elem.center;
    let incoming = (c - src) / (c - src).norm();
    let outgoing = (dst - c) / (dst - c).norm();

    let normal_at = |tx: f64, ty: f64| -> Vec3 {
        let v = a * tx.to_radians().tan() + b * ty.to_radians().tan() + w;
        v / v.norm()
    };
    let score = |tx: f64, ty: f64| -> f64 {
        let n = normal_at(tx, ty);
        let dn = incoming.dot(n);
        if dn >= 0.0 {
            return f64::NEG_INFINITY;
        }
        let r = incoming - n * (2.0 * dn);
        r.dot(outgoing) / r.norm()
    };

    let limit = 90.0 - 1e-9;
    let mut best = (0.0, 0.0, score(0.0, 0.0));
    let coarse = (limit / coarse_step_deg).floor() as i64;
    for i in -coarse..=coarse {
        for j in -coarse..=coarse {
            let (tx, ty) = (i as f64 * coarse_step_deg, j as f64 * coarse_step_deg);
            let s = score(tx, ty);
            if s > best.2 {
                best = (tx, ty, s);
            }
        }
    }

    let mut window = coarse_step_deg;
    for _ in 0..2 {
        let step = window / 10.0;
        let (cx, cy) = (best.0, best.1);
        for i in -10..=10 {
            for j in -10..=10 {
                let tx = (cx + i as f64 * step).clamp(-limit, limit);
                let ty = (cy + j as f64 * step).clamp(-limit, limit);
                let s = score(tx, ty);
                if s > best.2 {
                    best = (tx, ty, s);
                }
            }
        }
        window = step;
    }
    UnitVec3::new(normal_at(best.0, best.1))
}

fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Gaussian upper tail by adaptive Simpson quadrature of the density over
/// `[x, 40]`; the tail beyond 40 is below the smallest f64.
pub fn q_numeric(x: f64) -> Result<f64> {
    const UPPER: f64 = 40.0;
    if !(x.abs() <= UPPER) {
        return Err(Error::InvalidArgument(format!("|x| = {} exceeds {UPPER}", x.abs())));
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let density = move |t: f64| norm * (-0.5 * t * t).exp();
    // panels of unit width keep the recursion shallow around the peak
    let mut total = 0.0;
    let mut lo = x;
    while lo < UPPER {
        let hi = (lo.floor() + 1.0).min(UPPER);
        let (fa, fb) = (density(lo), density(hi));
        let fm = density(0.5 * (lo + hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += adaptive_simpson(&density, lo, hi, fa, fm, fb, whole, 1e-16, 40);
        lo = hi;
    }
    Ok(total)
}

/// Box interior test via projections onto the box axes.
fn strictly_inside(p: Vec3, b: &OrientedBox) -> bool {
    let yaw = b.yaw();
    let ax = Vec3::new(yaw.cos(), yaw.sin(), 0.0);
    let ay = Vec3::new(-yaw.sin(), yaw.cos(), 0.0);
    let d = p - b.center();
    let h = b.half_extents();
    d.dot(ax).abs() < h.x && d.dot(ay).abs() < h.y && d.z.abs() < h.z
}

/// Whether any of `samples` evenly spaced interior points of `p → q` lies
/// strictly inside the box.
pub fn point_sample_occlusion(p: Vec3, q: Vec3, b: &OrientedBox, samples: usize) -> Result<bool> {
    if samples < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 samples, got {samples}")));
    }
    let n = samples as f64 + 1.0;
    Ok((1..=samples).any(|k| strictly_inside(p + (q - p) * (k as f64 / n), b)))
}

/// Deepest penetration of the segment into the box, measured as the largest
/// margin `min_i(h_i − |x_i|)` along the segment. Negative when the segment
/// misses (then its magnitude is the Chebyshev clearance).
pub fn penetration_depth(p: Vec3, q: Vec3, b: &OrientedBox) -> f64 {
    let yaw = b.yaw();
    let ax = Vec3::new(yaw.cos(), yaw.sin(), 0.0);
    let ay = Vec3::new(-yaw.sin(), yaw.cos(), 0.0);
    let h = b.half_extents();
    let margin = |t: f64| {
        let d = p + (q - p) * t - b.center();
        (h.x - d.dot(ax).abs()).min(h.y - d.dot(ay).abs()).min(h.z - d.z.abs())
    };
    // concave in t, so ternary search finds the maximum
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if margin(m1) < margin(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    margin(0.5 * (lo + hi)).max(margin(0.0)).max(margin(1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed discrepancy, in the suite's own metric.
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {}: {} cases, {} failures, worst {:.3e} (tol {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.worst,
            self.tolerance
        )
    }
}

/// A random AP / wall element / receiver triple inside the default room.
pub fn random_mirror_geometry<R: Rng>(rng: &mut R) -> (Luminaire, MirrorElement, PhotoDetector) {
    let room = Room { length: 5.0, width: 5.0, height: 3.0 };
    let wall = Wall::ALL[rng.random_range(0..4)];
    let along = rng.random_range(0.3..wall.span(&room) - 0.3);
    let z = rng.random_range(0.3..room.height - 0.3);
    let base = wall.center(&room) - wall.horizontal_axis() * (wall.span(&room) / 2.0);
    let center = Vec3::new(base.x, base.y, 0.0) + wall.horizontal_axis() * along + Vec3::new(0.0, 0.0, z);
    let elem = MirrorElement {
        center,
        normal: wall.inward_normal(),
        mount_normal: wall.inward_normal(),
        mount_axis: wall.horizontal_axis(),
        width: 0.1,
        height: 0.06,
        reflectivity: 0.95,
    };
    let interior = |rng: &mut R, z_lo: f64, z_hi: f64| {
        Vec3::new(rng.random_range(0.5..4.5), rng.random_range(0.5..4.5), rng.random_range(z_lo..z_hi))
    };
    let ap_pos = interior(rng, 2.0, 3.0);
    let ue_pos = interior(rng, 0.5, 1.8);
    let ap = Luminaire {
        position: ap_pos,
        normal: UnitVec3::new(center - ap_pos).expect("distinct points"),
        lambertian_order: 1.0,
        optical_power: 1.0,
    };
    let ue = PhotoDetector {
        position: ue_pos,
        normal: UnitVec3::new(center - ue_pos).expect("distinct points"),
        area: 1e-4,
        fov: 85f64.to_radians(),
    };
    (ap, elem, ue)
}

/// Closed-form bisector normal against the tilt grid search, compared on
/// the cascaded gain each produces.
pub fn mirror_normal_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    const TOL: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        SuiteReport { name: "mirror normal vs grid search", cases, failures: 0, worst: 0.0, tolerance: TOL };
    for _ in 0..cases {
        let (ap, elem, ue) = random_mirror_geometry(&mut rng);
        let closed = optimal_mirror_normal(ap.position, elem.center, ue.position)?;
        let searched = grid_search_mirror_normal(ap.position, &elem, ue.position, 2.0)?;
        let g_closed = mirror_element_gain(&ap, &elem.with_normal(closed), &ue, &[]).value();
        let g_search = mirror_element_gain(&ap, &elem.with_normal(searched), &ue, &[]).value();
        let rel = if g_closed > 0.0 { (g_search - g_closed).abs() / g_closed } else { f64::INFINITY };
        report.worst = report.worst.max(rel);
        if !(rel <= TOL) {
            report.failures += 1;
        }
    }
    Ok(report)
}

/// `q_function` against quadrature on an even grid over `[0, 8]`.
pub fn q_function_suite(points: usize) -> Result<SuiteReport> {
    const TOL: f64 = 1e-10;
    let mut report =
        SuiteReport { name: "q_function vs quadrature", cases: points, failures: 0, worst: 0.0, tolerance: TOL };
    for k in 0..points {
        let x = 8.0 * k as f64 / (points - 1).max(1) as f64;
        let err = (q_function(x) - q_numeric(x)?).abs();
        report.worst = report.worst.max(err);
        if !(err <= TOL) {
            report.failures += 1;
        }
    }
    Ok(report)
}

/// A random box with a random segment around it.
pub fn random_occlusion_case<R: Rng>(rng: &mut R) -> (Vec3, Vec3, OrientedBox) {
    let half = Vec3::new(
        rng.random_range(0.05..0.8),
        rng.random_range(0.05..0.8),
        rng.random_range(0.05..0.8),
    );
    let b = OrientedBox::new(Vec3::ZERO, half, rng.random_range(0.0..std::f64::consts::PI))
        .expect("valid box");
    let mut point = || {
        Vec3::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))
    };
    (point(), point(), b)
}

/// Slab test against point sampling on a random corpus. Cases whose
/// penetration depth or clearance is below `clearance` are skipped; the
/// report counts only retained cases.
pub fn occlusion_suite(cases: usize, samples: usize, clearance: f64, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport {
        name: "slab occlusion vs point sampling",
        cases: 0,
        failures: 0,
        worst: 0.0,
        tolerance: 0.0,
    };
    while report.cases < cases {
        let (p, q, b) = random_occlusion_case(&mut rng);
        if p == q || penetration_depth(p, q, &b).abs() < clearance {
            continue;
        }
        report.cases += 1;
        let slab = segment_intersects_box(&Segment::new(p, q)?, &b);
        let sampled = point_sample_occlusion(p, q, &b, samples)?;
        if slab != sampled {
            report.failures += 1;
            report.worst = report.worst.max(penetration_depth(p, q, &b));
        }
    }
    Ok(report)
}
