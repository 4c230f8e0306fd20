//! Reflecting-surface models.
//!
//! A mirror array (MA) is a grid of small flat mirrors, each rotated so that
//! the AP's specular image lands on the receiver. The received power follows
//! the image-source law: the receiver sees a virtual copy of the AP mirrored
//! across the element plane, at total path length `d₁ + d₂`, provided the
//! image→receiver ray passes through the mirror aperture.
//!
//! A metasurface array (MSA) keeps its patches flush with the wall and steers
//! the reflected beam with a phase gradient. Steering has no aperture
//! restriction but each patch only re-radiates a fraction `η` of the light.

use serde::{Deserialize, Serialize};

use crate::channel::{shadowed, ChannelGain};
use crate::error::{Error, Result};
use crate::geometry::{OrientedBox, UnitVec3, Vec3};
use crate::numeric::CompensatedSum;
use crate::scene::{Luminaire, PhotoDetector, Room, Wall};

/// Relative slack on the aperture bounds, so that the exact specular point at
/// the element center is never rejected by rounding.
const APERTURE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorElement {
    pub center: Vec3,
    /// Current facet normal.
    pub normal: UnitVec3,
    /// Normal of the mounting plane (the wall's inward normal).
    pub mount_normal: UnitVec3,
    /// In-plane horizontal axis of the mounting plane; the facet's width runs
    /// along it when `normal == mount_normal`.
    pub mount_axis: UnitVec3,
    pub width: f64,
    pub height: f64,
    pub reflectivity: f64,
}

impl MirrorElement {
    pub fn with_normal(mut self, normal: UnitVec3) -> Self {
        self.normal = normal;
        self
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// In-plane axes of the tilted facet: the mount frame carried along by
    /// the minimal rotation taking `mount_normal` onto `normal`.
    fn facet_axes(&self, normal: UnitVec3) -> (Vec3, Vec3) {
        let w = self.mount_normal.as_vec();
        let n = normal.as_vec();
        let u = self.mount_axis.as_vec();
        let k = w.cross(n);
        let s2 = k.norm_squared();
        let c = w.dot(n);
        let u_rot = if s2 < 1e-30 {
            u
        } else {
            // Rodrigues with an unnormalized axis
            u * c + k.cross(u) + k * (k.dot(u) * (1.0 - c) / s2)
        };
        (u_rot, n.cross(u_rot))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorArray {
    pub wall: Wall,
    pub rows: usize,
    pub cols: usize,
    /// Row-major, bottom row first.
    pub elements: Vec<MirrorElement>,
}

/// Centers of an `n × n` grid of `width × height` cells centered on `wall`,
/// row-major from the bottom row.
fn wall_grid(room: &Room, wall: Wall, n: usize, width: f64, height: f64) -> Result<Vec<Vec3>> {
    if n == 0 || !(width > 0.0) || !(height > 0.0) {
        return Err(Error::Config(format!("invalid array: n = {n}, element {width}×{height} m")));
    }
    let span_h = n as f64 * width;
    let span_v = n as f64 * height;
    if span_h > wall.span(room) + 1e-9 || span_v > room.height + 1e-9 {
        return Err(Error::Config(format!(
            "{n}×{n} array ({span_h:.3}×{span_v:.3} m) does not fit the {wall:?} wall"
        )));
    }
    let u = wall.horizontal_axis().as_vec();
    let center = wall.center(room);
    let mid = (n as f64 - 1.0) / 2.0;
    let mut centers = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            centers.push(
                center + u * ((c as f64 - mid) * width) + Vec3::new(0.0, 0.0, (r as f64 - mid) * height),
            );
        }
    }
    Ok(centers)
}

impl MirrorArray {
    /// Wall-centered `n × n` array of flat mirrors facing into the room.
    pub fn on_wall(
        room: &Room,
        wall: Wall,
        n: usize,
        width: f64,
        height: f64,
        reflectivity: f64,
    ) -> Result<Self> {
        let elements = wall_grid(room, wall, n, width, height)?
            .into_iter()
            .map(|center| MirrorElement {
                center,
                normal: wall.inward_normal(),
                mount_normal: wall.inward_normal(),
                mount_axis: wall.horizontal_axis(),
                width,
                height,
                reflectivity,
            })
            .collect();
        Ok(Self { wall, rows: n, cols: n, elements })
    }

    pub fn element(&self, row: usize, col: usize) -> &MirrorElement {
        &self.elements[row * self.cols + col]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetasurfacePatch {
    pub center: Vec3,
    /// Fixed: the wall's inward normal.
    pub normal: UnitVec3,
    pub area: f64,
    /// Direction the phase gradient currently sends reflected light.
    pub steering: UnitVec3,
    pub efficiency: f64,
}

impl MetasurfacePatch {
    /// Steering that sends light toward `dst`, if `dst` is in front of the patch.
    pub fn steer_toward(mut self, dst: Vec3) -> Result<Self> {
        let dir = UnitVec3::new(dst - self.center)?;
        if self.normal.dot(dir.as_vec()) <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "cannot steer toward {dst}: behind the patch"
            )));
        }
        self.steering = dir;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetasurfaceArray {
    pub wall: Wall,
    pub rows: usize,
    pub cols: usize,
    pub patches: Vec<MetasurfacePatch>,
}

impl MetasurfaceArray {
    pub fn on_wall(
        room: &Room,
        wall: Wall,
        n: usize,
        width: f64,
        height: f64,
        efficiency: f64,
    ) -> Result<Self> {
        let patches = wall_grid(room, wall, n, width, height)?
            .into_iter()
            .map(|center| MetasurfacePatch {
                center,
                normal: wall.inward_normal(),
                area: width * height,
                steering: wall.inward_normal(),
                efficiency,
            })
            .collect();
        Ok(Self { wall, rows: n, cols: n, patches })
    }
}

/// Per-element view of a reflecting surface for one receiver: the cascaded
/// gains plus the two legs they are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrsChannelVector {
    /// Cascaded AP → element → UE gain with the element optimally oriented.
    pub cascaded: Vec<f64>,
    /// Fraction of the AP's power landing on each element's aperture.
    pub ap_to_element: Vec<f64>,
    /// Element → UE distance in meters.
    pub element_to_ue_distance: Vec<f64>,
}

/// Facet normal that reflects light from `src` into `dst`: the bisector of
/// the two unit directions seen from `center`.
pub fn optimal_mirror_normal(src: Vec3, center: Vec3, dst: Vec3) -> Result<UnitVec3> {
    let to_src = (src - center)
        .normalize()
        .ok_or_else(|| Error::InvalidArgument("source coincides with element center".into()))?;
    let to_dst = (dst - center)
        .normalize()
        .ok_or_else(|| Error::InvalidArgument("destination coincides with element center".into()))?;
    let bisector = to_src.as_vec() + to_dst.as_vec();
    if bisector.norm() < 1e-12 {
        return Err(Error::DegenerateGeometry(format!(
            "source and destination are opposite through {center}"
        )));
    }
    Ok(bisector.normalize().expect("nonzero bisector"))
}

/// Cascaded image-source gain of one mirror with facet normal `normal`.
/// Cheap geometric rejections come before the occlusion tests.
#[inline]
fn mirror_gain_with_normal(
    ap: &Luminaire,
    elem: &MirrorElement,
    normal: UnitVec3,
    ue: &PhotoDetector,
    blockers: &[OrientedBox],
) -> f64 {
    let c = elem.center;
    let to_ue = ue.position - c;
    let ue_side = normal.dot(to_ue);
    if ue_side <= 0.0 {
        return 0.0;
    }
    let d2 = to_ue.norm();
    let collection = ue.collection(-to_ue / d2);
    if collection == 0.0 {
        return 0.0;
    }
    let to_ap = ap.position - c;
    let ap_side = normal.dot(to_ap);
    if ap_side <= 0.0 {
        return 0.0;
    }
    let d1 = to_ap.norm();
    let intensity = ap.intensity(-ap.normal.dot(to_ap) / d1);
    if intensity == 0.0 {
        return 0.0;
    }

    // image of the AP behind the facet plane and where its ray to the UE
    // crosses that plane
    let image = ap.position - normal * (2.0 * ap_side);
    let t = ap_side / (ap_side + ue_side);
    let hit = image + (ue.position - image) * t - c;
    let (u, v) = elem.facet_axes(normal);
    let half_w = 0.5 * elem.width * (1.0 + APERTURE_SLACK);
    let half_h = 0.5 * elem.height * (1.0 + APERTURE_SLACK);
    if hit.dot(u).abs() > half_w || hit.dot(v).abs() > half_h {
        return 0.0;
    }

    if shadowed(ap.position, c, blockers) || shadowed(c, ue.position, blockers) {
        return 0.0;
    }
    let path_sq = (ue.position - image).norm_squared();
    elem.reflectivity * intensity * collection / path_sq
}

/// Gain through one mirror at its current orientation `elem.normal`.
pub fn mirror_element_gain(
    ap: &Luminaire,
    elem: &MirrorElement,
    ue: &PhotoDetector,
    blockers: &[OrientedBox],
) -> ChannelGain {
    ChannelGain::from_raw(mirror_gain_with_normal(ap, elem, elem.normal, ue, blockers))
}

/// Gain of one mirror after pointing it at the receiver.
pub(crate) fn steered_mirror_gain(
    ap: &Luminaire,
    elem: &MirrorElement,
    ue: &PhotoDetector,
    blockers: &[OrientedBox],
) -> Result<f64> {
    // the bisector only matters if the receiver can see the element at all
    let to_ue = ue.position - elem.center;
    if elem.mount_normal.dot(to_ue) <= 0.0 {
        return Ok(0.0);
    }
    let d2 = to_ue.norm();
    if ue.collection(-to_ue / d2) == 0.0 {
        return Ok(0.0);
    }
    let normal = optimal_mirror_normal(ap.position, elem.center, ue.position)?;
    Ok(mirror_gain_with_normal(ap, elem, normal, ue, blockers))
}

/// Total gain of a mirror array with every element steered to the receiver.
/// Summed in row-major order.
pub fn ma_gain(
    ap: &Luminaire,
    array: &MirrorArray,
    ue: &PhotoDetector,
    blockers: &[OrientedBox],
) -> Result<ChannelGain> {
    let mut acc = CompensatedSum::new();
    for elem in &array.elements {
        acc.add(steered_mirror_gain(ap, elem, ue, blockers)?);
    }
    Ok(ChannelGain::from_raw(acc.value().max(0.0)))
}

#[inline]
pub(crate) fn metasurface_patch_gain(
    ap: &Luminaire,
    patch: &MetasurfacePatch,
    ue: &PhotoDetector,
    blockers: &[OrientedBox],
) -> f64 {
    if patch.efficiency == 0.0 {
        return 0.0;
    }
    let c = patch.center;
    let to_ue = ue.position - c;
    if patch.normal.dot(to_ue) <= 0.0 {
        return 0.0;
    }
    let d2 = to_ue.norm();
    let collection = ue.collection(-to_ue / d2);
    if collection == 0.0 {
        return 0.0;
    }
    let to_ap = ap.position - c;
    if patch.normal.dot(to_ap) <= 0.0 {
        return 0.0;
    }
    let d1 = to_ap.norm();
    let intensity = ap.intensity(-ap.normal.dot(to_ap) / d1);
    if intensity == 0.0 {
        return 0.0;
    }
    if shadowed(ap.position, c, blockers) || shadowed(c, ue.position, blockers) {
        return 0.0;
    }
    let path = d1 + d2;
    patch.efficiency * intensity * collection / (path * path)
}

/// Total gain of a metasurface array with every patch steered to the receiver.
pub fn msa_gain(
    ap: &Luminaire,
    array: &MetasurfaceArray,
    ue: &PhotoDetector,
    blockers: &[OrientedBox],
) -> ChannelGain {
    let mut acc = CompensatedSum::new();
    for patch in &array.patches {
        acc.add(metasurface_patch_gain(ap, patch, ue, blockers));
    }
    ChannelGain::from_raw(acc.value().max(0.0))
}

/// Per-element channel vector of a set of mirror arrays for one receiver.
pub fn irs_channel_vector(
    ap: &Luminaire,
    arrays: &[MirrorArray],
    ue: &PhotoDetector,
    blockers: &[OrientedBox],
) -> Result<IrsChannelVector> {
    let count = arrays.iter().map(|a| a.elements.len()).sum();
    let mut out = IrsChannelVector {
        cascaded: Vec::with_capacity(count),
        ap_to_element: Vec::with_capacity(count),
        element_to_ue_distance: Vec::with_capacity(count),
    };
    for elem in arrays.iter().flat_map(|a| &a.elements) {
        out.cascaded.push(steered_mirror_gain(ap, elem, ue, blockers)?);
        let to_elem = elem.center - ap.position;
        let d1 = to_elem.norm();
        let cos_in = -elem.mount_normal.dot(to_elem) / d1;
        let landing = if cos_in > 0.0 && !shadowed(ap.position, elem.center, blockers) {
            ap.intensity(ap.normal.dot(to_elem) / d1) * elem.area() * cos_in / (d1 * d1)
        } else {
            0.0
        };
        out.ap_to_element.push(landing);
        out.element_to_ue_distance.push(elem.center.distance(ue.position));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentObjective {
    /// Maximize the summed gain over receivers.
    MaxSum,
    /// Maximize the weakest receiver's gain.
    MaxMin,
}

/// Mirror-to-receiver clustering. Elements are indexed across `arrays` in
/// order, row-major within each array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorAssignment {
    pub owner: Vec<usize>,
    pub per_ue_gain: Vec<f64>,
}

impl MirrorAssignment {
    pub fn total_gain(&self) -> f64 {
        self.per_ue_gain.iter().sum()
    }
}

/// Per-element gain matrix `[element][ue]`, each entry with the element
/// steered to that receiver.
pub fn element_gain_matrix(
    ap: &Luminaire,
    arrays: &[MirrorArray],
    ues: &[PhotoDetector],
    blockers: &[OrientedBox],
) -> Result<Vec<Vec<f64>>> {
    arrays
        .iter()
        .flat_map(|a| &a.elements)
        .map(|elem| ues.iter().map(|ue| steered_mirror_gain(ap, elem, ue, blockers)).collect())
        .collect()
}

/// Exact per-receiver totals of a given assignment.
pub fn cluster_gains(gains: &[Vec<f64>], owner: &[usize], n_ues: usize) -> Vec<f64> {
    let mut acc = vec![CompensatedSum::new(); n_ues];
    for (row, &u) in gains.iter().zip(owner) {
        acc[u].add(row[u]);
    }
    acc.iter().map(CompensatedSum::value).collect()
}

/// Splits the mirrors of `arrays` among several receivers.
///
/// `MaxSum` gives each element to the receiver it serves best; this is exact
/// because elements contribute independently. `MaxMin` runs greedy rounds in
/// which the currently weakest receiver takes its best remaining element.
/// A receiver whose best remaining element is useless to it drops out of the
/// rounds, and elements nobody can use go to receiver 0.
pub fn assign_mirrors_multi_ue(
    ap: &Luminaire,
    arrays: &[MirrorArray],
    ues: &[PhotoDetector],
    blockers: &[OrientedBox],
    objective: AssignmentObjective,
) -> Result<MirrorAssignment> {
    if ues.is_empty() {
        return Err(Error::InvalidArgument("mirror assignment needs at least one UE".into()));
    }
    let gains = element_gain_matrix(ap, arrays, ues, blockers)?;
    let owner = match objective {
        AssignmentObjective::MaxSum => gains
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (u, &g)| if g > best.1 { (u, g) } else { best })
                    .0
            })
            .collect(),
        AssignmentObjective::MaxMin => greedy_max_min(&gains, ues.len()),
    };
    let per_ue_gain = cluster_gains(&gains, &owner, ues.len());
    Ok(MirrorAssignment { owner, per_ue_gain })
}

fn greedy_max_min(gains: &[Vec<f64>], n_ues: usize) -> Vec<usize> {
    const UNASSIGNED: usize = usize::MAX;
    let n_elems = gains.len();
    let mut owner = vec![UNASSIGNED; n_elems];

    // each receiver's preference list, best first, ties by element index
    let prefs: Vec<Vec<usize>> = (0..n_ues)
        .map(|u| {
            let mut idx: Vec<usize> = (0..n_elems).filter(|&e| gains[e][u] > 0.0).collect();
            idx.sort_by(|&a, &b| gains[b][u].total_cmp(&gains[a][u]).then(a.cmp(&b)));
            idx
        })
        .collect();
    let mut cursor = vec![0usize; n_ues];
    let mut totals = vec![CompensatedSum::new(); n_ues];
    let mut active = vec![true; n_ues];

    loop {
        let worst = (0..n_ues)
            .filter(|&u| active[u])
            .min_by(|&a, &b| totals[a].value().total_cmp(&totals[b].value()).then(a.cmp(&b)));
        let Some(u) = worst else { break };
        while cursor[u] < prefs[u].len() && owner[prefs[u][cursor[u]]] != UNASSIGNED {
            cursor[u] += 1;
        }
        match prefs[u].get(cursor[u]) {
            Some(&e) => {
                owner[e] = u;
                totals[u].add(gains[e][u]);
            }
            None => active[u] = false,
        }
    }

    for o in owner.iter_mut().filter(|o| **o == UNASSIGNED) {
        *o = 0;
    }
    owner
}
