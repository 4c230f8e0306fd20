//! DC channel gains of the direct path and of diffuse first- (and optionally
//! second-) order wall reflections.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segment_hits_box, OrientedBox, UnitVec3, Vec3};
use crate::numeric::CompensatedSum;
use crate::scene::{Luminaire, PhotoDetector, Room, Wall};

/// Diffusely reflecting wall tile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallPatch {
    pub center: Vec3,
    pub normal: UnitVec3,
    /// Horizontal in-plane axis; the other in-plane axis is vertical.
    pub axis: UnitVec3,
    pub width: f64,
    pub height: f64,
    pub area: f64,
    pub reflectivity: f64,
}

impl WallPatch {
    /// The four quarters of this patch.
    pub fn split(&self) -> [WallPatch; 4] {
        let du = self.axis * (self.width / 4.0);
        let dv = Vec3::new(0.0, 0.0, self.height / 4.0);
        let quarter = |offset: Vec3| WallPatch {
            center: self.center + offset,
            width: self.width / 2.0,
            height: self.height / 2.0,
            area: self.area / 4.0,
            ..*self
        };
        [quarter(-du - dv), quarter(du - dv), quarter(-du + dv), quarter(du + dv)]
    }
}

/// A patch wider than this fraction of its distance to the receiver is
/// split into quarters before evaluation.
const NEAR_FIELD_RATIO: f64 = 0.25;
const MAX_SPLIT_DEPTH: u32 = 12;

/// Dimensionless DC gain (received over transmitted optical power).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelGain(f64);

impl ChannelGain {
    pub const ZERO: ChannelGain = ChannelGain(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidArgument(format!("channel gain {value} must be finite and >= 0")));
        }
        Ok(Self(value))
    }

    pub(crate) fn from_raw(value: f64) -> Self {
        debug_assert!(value >= 0.0 && value.is_finite(), "gain {value}");
        Self(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::ops::Add for ChannelGain {
    type Output = ChannelGain;
    fn add(self, o: ChannelGain) -> ChannelGain {
        ChannelGain(self.0 + o.0)
    }
}

/// Whether the segment `p → q` is cut by any blocker.
pub fn shadowed(p: Vec3, q: Vec3, blockers: &[OrientedBox]) -> bool {
    blockers.iter().any(|b| segment_hits_box(p, q, b))
}

/// Direct-path gain from a Lambertian AP to a detector.
pub fn los_gain(ap: &Luminaire, ue: &PhotoDetector, blockers: &[OrientedBox]) -> Result<ChannelGain> {
    let v = ue.position - ap.position;
    let d2 = v.norm_squared();
    if d2 == 0.0 {
        return Err(Error::InvalidArgument("AP and UE positions coincide".into()));
    }
    let d = d2.sqrt();
    let dir = v / d;
    let intensity = ap.intensity(ap.normal.dot(dir));
    if intensity == 0.0 {
        return Ok(ChannelGain::ZERO);
    }
    let collection = ue.collection(-dir);
    if collection == 0.0 || shadowed(ap.position, ue.position, blockers) {
        return Ok(ChannelGain::ZERO);
    }
    Ok(ChannelGain::from_raw(intensity * collection / d2))
}

/// Tiles the four walls with patches no larger than `patch_target_size` on a
/// side. Floor and ceiling are not tiled.
pub fn wall_patches(room: &Room, patch_target_size: f64, reflectivity: f64) -> Result<Vec<WallPatch>> {
    if !(patch_target_size > 0.0 && patch_target_size.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "patch size must be positive, got {patch_target_size}"
        )));
    }
    if !(0.0..=1.0).contains(&reflectivity) {
        return Err(Error::InvalidArgument(format!("wall reflectivity {reflectivity} outside [0, 1]")));
    }
    let tiles = |extent: f64| ((extent / patch_target_size) - 1e-9).ceil().max(1.0) as usize;

    let mut patches = Vec::new();
    for wall in Wall::ALL {
        let span = wall.span(room);
        let (nu, nv) = (tiles(span), tiles(room.height));
        let (du, dv) = (span / nu as f64, room.height / nv as f64);
        let u = wall.horizontal_axis().as_vec();
        let origin = wall.center(room) - u * (span / 2.0) - Vec3::new(0.0, 0.0, room.height / 2.0);
        for j in 0..nv {
            for i in 0..nu {
                let center =
                    origin + u * ((i as f64 + 0.5) * du) + Vec3::new(0.0, 0.0, (j as f64 + 0.5) * dv);
                patches.push(WallPatch {
                    center,
                    normal: wall.inward_normal(),
                    axis: wall.horizontal_axis(),
                    width: du,
                    height: dv,
                    area: du * dv,
                    reflectivity,
                });
            }
        }
    }
    Ok(patches)
}

/// Irradiance-like transfer from the AP onto a patch: `I(φ)·cos(θ_in)/d²`,
/// zero when the AP cannot see the patch front.
#[inline]
fn ap_to_patch(ap: &Luminaire, patch: &WallPatch, blockers: &[OrientedBox]) -> f64 {
    let v = patch.center - ap.position;
    let d2 = v.norm_squared();
    let d = d2.sqrt();
    let cos_in = -patch.normal.dot(v) / d;
    if cos_in <= 0.0 {
        return 0.0;
    }
    let intensity = ap.intensity(ap.normal.dot(v) / d);
    if intensity == 0.0 || shadowed(ap.position, patch.center, blockers) {
        return 0.0;
    }
    intensity * cos_in / d2
}

/// Lambertian re-emission from a patch into the detector:
/// `ρ·A_patch·cos(θ_out)/(π d²)·A_PD·cos(ψ)`.
#[inline]
fn patch_to_ue(patch: &WallPatch, ue: &PhotoDetector, blockers: &[OrientedBox]) -> f64 {
    let v = ue.position - patch.center;
    let d2 = v.norm_squared();
    let d = d2.sqrt();
    let cos_out = patch.normal.dot(v) / d;
    if cos_out <= 0.0 {
        return 0.0;
    }
    let collection = ue.collection(-v / d);
    if collection == 0.0 || shadowed(patch.center, ue.position, blockers) {
        return 0.0;
    }
    patch.reflectivity * patch.area * cos_out / (PI * d2) * collection
}

/// First-order diffuse reflection gain summed over wall patches. Patches
/// close to the receiver are integrated on a finer subgrid.
pub fn nlos_gain(
    ap: &Luminaire,
    ue: &PhotoDetector,
    patches: &[WallPatch],
    blockers: &[OrientedBox],
) -> ChannelGain {
    let mut acc = CompensatedSum::new();
    for patch in patches {
        if patch.reflectivity == 0.0 {
            continue;
        }
        first_order_patch(ap, patch, ue, blockers, 0, &mut acc);
    }
    ChannelGain::from_raw(acc.value().max(0.0))
}

/// Adds one patch's contribution, subdividing it while it is large compared
/// with its distance to the receiver.
fn first_order_patch(
    ap: &Luminaire,
    patch: &WallPatch,
    ue: &PhotoDetector,
    blockers: &[OrientedBox],
    depth: u32,
    acc: &mut CompensatedSum,
) {
    let d = patch.center.distance(ue.position);
    if depth < MAX_SPLIT_DEPTH && patch.width.max(patch.height) > NEAR_FIELD_RATIO * d {
        for quarter in patch.split() {
            first_order_patch(ap, &quarter, ue, blockers, depth + 1, acc);
        }
        return;
    }
    // cheaper leg first; it rejects about half of the patches
    let out = patch_to_ue(patch, ue, blockers);
    if out == 0.0 {
        return;
    }
    acc.add(ap_to_patch(ap, patch, blockers) * out);
}

/// Second-order diffuse gain (AP → patch → patch → UE). Quadratic in the
/// patch count; meant for coarse tilings.
pub fn nlos_gain_second_order(
    ap: &Luminaire,
    ue: &PhotoDetector,
    patches: &[WallPatch],
    blockers: &[OrientedBox],
) -> ChannelGain {
    let incoming: Vec<f64> = patches.iter().map(|p| ap_to_patch(ap, p, blockers)).collect();
    let outgoing: Vec<f64> = patches.iter().map(|p| patch_to_ue(p, ue, blockers)).collect();
    let mut acc = CompensatedSum::new();
    for (j, first) in patches.iter().enumerate() {
        if incoming[j] == 0.0 {
            continue;
        }
        for (k, second) in patches.iter().enumerate() {
            if j == k || outgoing[k] == 0.0 {
                continue;
            }
            let v = second.center - first.center;
            let d2 = v.norm_squared();
            let d = d2.sqrt();
            let cos_out = first.normal.dot(v) / d;
            let cos_in = -second.normal.dot(v) / d;
            if cos_out <= 0.0 || cos_in <= 0.0 || shadowed(first.center, second.center, blockers) {
                continue;
            }
            // `outgoing[k]` already carries the second patch's ρ·A; the first
            // bounce re-emits ρ·A·cos/(π d²) onto it.
            let transfer = first.reflectivity * first.area * cos_out * cos_in / (PI * d2);
            acc.add(incoming[j] * transfer * outgoing[k]);
        }
    }
    ChannelGain::from_raw(acc.value().max(0.0))
}
