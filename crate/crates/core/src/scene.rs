//! Experiment description and the per-trial samplers for receiver pose and
//! blockers.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::{wall_patches, WallPatch};
use crate::error::{Error, Result};
use crate::geometry::{unit_normal_from_polar, OrientedBox, UnitVec3, Vec3};
use crate::irs::{MetasurfaceArray, MirrorArray};

/// Slack for floating-point comparisons of lengths that should tile exactly.
const LENGTH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl Room {
    pub fn new(length: f64, width: f64, height: f64) -> Result<Self> {
        let room = Self { length, width, height };
        room.validate()?;
        Ok(room)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("length", self.length), ("width", self.width), ("height", self.height)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("room {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn floor_area(&self) -> f64 {
        self.length * self.width
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0.0..=self.length).contains(&p.x)
            && (0.0..=self.width).contains(&p.y)
            && (0.0..=self.height).contains(&p.z)
    }

    pub fn walls(&self) -> [Wall; 4] {
        Wall::ALL
    }
}

/// The four vertical walls. South is y = 0, North y = W, West x = 0, East x = L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wall {
    South,
    North,
    West,
    East,
}

impl Wall {
    pub const ALL: [Wall; 4] = [Wall::South, Wall::North, Wall::West, Wall::East];

    /// Normal pointing into the room.
    pub fn inward_normal(self) -> UnitVec3 {
        match self {
            Wall::South => UnitVec3::Y,
            Wall::North => -UnitVec3::Y,
            Wall::West => UnitVec3::X,
            Wall::East => -UnitVec3::X,
        }
    }

    /// Horizontal in-plane axis; the vertical axis is always +z.
    pub fn horizontal_axis(self) -> UnitVec3 {
        match self {
            Wall::South | Wall::North => UnitVec3::X,
            Wall::West | Wall::East => UnitVec3::Y,
        }
    }

    /// Horizontal extent of the wall.
    pub fn span(self, room: &Room) -> f64 {
        match self {
            Wall::South | Wall::North => room.length,
            Wall::West | Wall::East => room.width,
        }
    }

    pub fn center(self, room: &Room) -> Vec3 {
        let z = room.height / 2.0;
        match self {
            Wall::South => Vec3::new(room.length / 2.0, 0.0, z),
            Wall::North => Vec3::new(room.length / 2.0, room.width, z),
            Wall::West => Vec3::new(0.0, room.width / 2.0, z),
            Wall::East => Vec3::new(room.length, room.width / 2.0, z),
        }
    }
}

/// LED access point with a generalized Lambertian emission pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Luminaire {
    pub position: Vec3,
    pub normal: UnitVec3,
    pub lambertian_order: f64,
    /// Nominal, reported only; SER normalization is gain-based.
    pub optical_power: f64,
}

impl Luminaire {
    /// Lambertian order of an emitter with the given half-power semi-angle.
    pub fn order_from_semi_angle(semi_angle: f64) -> f64 {
        -std::f64::consts::LN_2 / semi_angle.cos().ln()
    }

    /// Radiant intensity pattern `(m+1)/(2π)·cos^m(φ)` for a unit-power source,
    /// zero outside the forward hemisphere.
    #[inline]
    pub fn intensity(&self, cos_phi: f64) -> f64 {
        if cos_phi <= 0.0 {
            return 0.0;
        }
        let m = self.lambertian_order;
        let pattern = if m == 1.0 { cos_phi } else { cos_phi.powf(m) };
        (m + 1.0) / (2.0 * PI) * pattern
    }
}

/// Receiver photodiode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotoDetector {
    pub position: Vec3,
    pub normal: UnitVec3,
    /// Detector area in m².
    pub area: f64,
    /// Field-of-view half-angle in radians.
    pub fov: f64,
}

impl PhotoDetector {
    /// Effective collection factor `A·cos(ψ)` for light arriving from
    /// `toward_source` (unit vector from the detector to the source), zero
    /// outside the field of view.
    #[inline]
    pub fn collection(&self, toward_source: Vec3) -> f64 {
        let cos_psi = self.normal.dot(toward_source);
        if cos_psi <= 0.0 || cos_psi < self.fov.cos() {
            0.0
        } else {
            self.area * cos_psi
        }
    }
}

/// Truncated Gaussian polar tilt and uniform azimuth, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationModel {
    pub theta_mean_deg: f64,
    pub theta_std_deg: f64,
}

impl OrientationModel {
    pub const THETA_MAX_DEG: f64 = 90.0;
}

impl Default for OrientationModel {
    fn default() -> Self {
        Self { theta_mean_deg: 41.0, theta_std_deg: 9.0 }
    }
}

/// Poisson point process of box-shaped blockers standing on the floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockerModel {
    /// Blockers per m² of floor.
    pub density: f64,
    /// Length, width and height in meters.
    pub dims: [f64; 3],
    /// Discard a blocker whose volume contains the UE. With `false` such a
    /// trial keeps the blocker and its links are occluded.
    pub drop_enclosing: bool,
}

impl Default for BlockerModel {
    fn default() -> Self {
        Self { density: 0.0, dims: [0.75, 0.2, 1.75], drop_enclosing: true }
    }
}

impl BlockerModel {
    pub fn half_extents(&self) -> Vec3 {
        Vec3::new(self.dims[0] / 2.0, self.dims[1] / 2.0, self.dims[2] / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IrsKind {
    #[default]
    Mirror,
    Metasurface,
    None,
}

/// Every physical constant of an experiment. `Default` is the four-wall,
/// 50×50-mirror, 5×5×3 m room setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub room: Room,
    /// `None` places the AP at the ceiling center.
    pub ap_position: Option<Vec3>,
    pub lambertian_order: f64,
    pub optical_power: f64,
    pub pd_area: f64,
    pub fov_deg: f64,
    pub ue_height: f64,
    pub orientation: OrientationModel,
    pub blockers: BlockerModel,
    pub wall_reflectivity: f64,
    pub nlos_patch_size: f64,
    pub nlos_order: u8,
    pub irs_kind: IrsKind,
    pub n_per_side: usize,
    pub element_width: f64,
    pub element_height: f64,
    pub mirror_reflectivity: f64,
    pub metasurface_efficiency: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            room: Room { length: 5.0, width: 5.0, height: 3.0 },
            ap_position: None,
            lambertian_order: 1.0,
            optical_power: 1.0,
            pd_area: 1e-4,
            fov_deg: 85.0,
            ue_height: 1.0,
            orientation: OrientationModel::default(),
            blockers: BlockerModel::default(),
            wall_reflectivity: 0.7,
            nlos_patch_size: 0.25,
            nlos_order: 1,
            irs_kind: IrsKind::Mirror,
            n_per_side: 50,
            element_width: 0.1,
            element_height: 0.06,
            mirror_reflectivity: 0.95,
            metasurface_efficiency: 0.8,
        }
    }
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&v) {
        return Err(Error::Config(format!("{name} must lie in [{lo}, {hi}], got {v}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Config(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        self.room.validate()?;
        let room = &self.room;
        if self.lambertian_order < 1.0 || !self.lambertian_order.is_finite() {
            return Err(Error::Config(format!(
                "lambertian_order must be >= 1, got {}",
                self.lambertian_order
            )));
        }
        check_positive("optical_power", self.optical_power)?;
        check_positive("pd_area", self.pd_area)?;
        check_positive("fov_deg", self.fov_deg)?;
        check_range("fov_deg", self.fov_deg, 0.0, 90.0)?;
        if !(self.ue_height > 0.0 && self.ue_height < room.height) {
            return Err(Error::Config(format!(
                "ue_height must lie in (0, {}), got {}",
                room.height, self.ue_height
            )));
        }
        check_range("theta_mean_deg", self.orientation.theta_mean_deg, 0.0, 90.0)?;
        check_positive("theta_std_deg", self.orientation.theta_std_deg)?;
        if !(self.blockers.density >= 0.0 && self.blockers.density.is_finite()) {
            return Err(Error::Config(format!(
                "blocker density must be >= 0, got {}",
                self.blockers.density
            )));
        }
        for d in self.blockers.dims {
            check_positive("blocker dimension", d)?;
        }
        check_range("wall_reflectivity", self.wall_reflectivity, 0.0, 1.0)?;
        check_positive("nlos_patch_size", self.nlos_patch_size)?;
        if !(1..=2).contains(&self.nlos_order) {
            return Err(Error::Config(format!("nlos_order must be 1 or 2, got {}", self.nlos_order)));
        }
        if self.n_per_side == 0 {
            return Err(Error::Config("n_per_side must be >= 1".into()));
        }
        check_positive("element_width", self.element_width)?;
        check_positive("element_height", self.element_height)?;
        check_range("mirror_reflectivity", self.mirror_reflectivity, 0.0, 1.0)?;
        check_range("metasurface_efficiency", self.metasurface_efficiency, 0.0, 1.0)?;
        if let Some(p) = self.ap_position {
            if !room.contains(p) {
                return Err(Error::Config(format!("ap_position {p} lies outside the room")));
            }
            if p.z == self.ue_height {
                return Err(Error::Config("ap_position must not lie at ue_height".into()));
            }
        }
        for wall in Wall::ALL {
            let n = self.n_per_side as f64;
            let span_h = n * self.element_width;
            let span_v = n * self.element_height;
            if span_h > wall.span(room) + LENGTH_SLACK || span_v > room.height + LENGTH_SLACK {
                return Err(Error::Config(format!(
                    "{}×{} array of {}×{} m elements spans {span_h:.3}×{span_v:.3} m, \
                     larger than the {:?} wall ({}×{} m)",
                    self.n_per_side,
                    self.n_per_side,
                    self.element_width,
                    self.element_height,
                    wall,
                    wall.span(room),
                    room.height
                )));
            }
        }
        Ok(())
    }
}

/// Immutable experiment description shared by every trial.
#[derive(Debug, Clone)]
pub struct Scene {
    pub params: SceneParams,
    pub room: Room,
    pub aps: Vec<Luminaire>,
    pub mirror_arrays: Vec<MirrorArray>,
    pub metasurface_arrays: Vec<MetasurfaceArray>,
    pub orientation_model: OrientationModel,
    pub blocker_model: BlockerModel,
    pub ue_height: f64,
    pub wall_reflectivity: f64,
    pub pd_area: f64,
    pub fov: f64,
    /// Diffuse reflector tiling, computed once.
    pub patches: Vec<WallPatch>,
}

impl Scene {
    pub fn build(params: &SceneParams) -> Result<Self> {
        params.validate()?;
        let room = params.room;
        let ap = Luminaire {
            position: params
                .ap_position
                .unwrap_or(Vec3::new(room.length / 2.0, room.width / 2.0, room.height)),
            normal: UnitVec3::NEG_Z,
            lambertian_order: params.lambertian_order,
            optical_power: params.optical_power,
        };

        let mut mirror_arrays = Vec::new();
        let mut metasurface_arrays = Vec::new();
        for wall in Wall::ALL {
            match params.irs_kind {
                IrsKind::Mirror => mirror_arrays.push(MirrorArray::on_wall(
                    &room,
                    wall,
                    params.n_per_side,
                    params.element_width,
                    params.element_height,
                    params.mirror_reflectivity,
                )?),
                IrsKind::Metasurface => metasurface_arrays.push(MetasurfaceArray::on_wall(
                    &room,
                    wall,
                    params.n_per_side,
                    params.element_width,
                    params.element_height,
                    params.metasurface_efficiency,
                )?),
                IrsKind::None => {}
            }
        }

        Ok(Self {
            params: params.clone(),
            room,
            aps: vec![ap],
            mirror_arrays,
            metasurface_arrays,
            orientation_model: params.orientation,
            blocker_model: params.blockers,
            ue_height: params.ue_height,
            wall_reflectivity: params.wall_reflectivity,
            pd_area: params.pd_area,
            fov: params.fov_deg.to_radians(),
            patches: wall_patches(&room, params.nlos_patch_size, params.wall_reflectivity)?,
        })
    }

    /// Same scene with a different blocker density.
    pub fn with_blocker_density(&self, density: f64) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(Error::Config(format!("blocker density must be >= 0, got {density}")));
        }
        let mut scene = self.clone();
        scene.blocker_model.density = density;
        scene.params.blockers.density = density;
        Ok(scene)
    }

    pub fn element_count(&self) -> usize {
        self.mirror_arrays.iter().map(|a| a.elements.len()).sum::<usize>()
            + self.metasurface_arrays.iter().map(|a| a.patches.len()).sum::<usize>()
    }
}

/// The standard room with four wall-centered `n × n` mirror arrays.
pub fn default_scene(n_per_side: usize) -> Result<Scene> {
    Scene::build(&SceneParams { n_per_side, ..SceneParams::default() })
}

/// Draws a polar tilt in degrees from the truncated Gaussian.
fn sample_theta_deg<R: Rng + ?Sized>(rng: &mut R, model: &OrientationModel) -> f64 {
    let normal = Normal::new(model.theta_mean_deg, model.theta_std_deg)
        .expect("orientation model validated at scene construction");
    loop {
        let theta = normal.sample(rng);
        if (0.0..=OrientationModel::THETA_MAX_DEG).contains(&theta) {
            return theta;
        }
    }
}

/// Uniform floor position at the scene's device height and a random tilt.
pub fn sample_ue<R: Rng + ?Sized>(rng: &mut R, scene: &Scene) -> PhotoDetector {
    let x = rng.random_range(0.0..scene.room.length);
    let y = rng.random_range(0.0..scene.room.width);
    let theta = sample_theta_deg(rng, &scene.orientation_model).to_radians().min(FRAC_PI_2);
    let omega = rng.random_range(0.0..TAU);
    PhotoDetector {
        position: Vec3::new(x, y, scene.ue_height),
        normal: unit_normal_from_polar(theta, omega).expect("angles sampled within range"),
        area: scene.pd_area,
        fov: scene.fov,
    }
}

/// One realization of the blocker process over the floor.
pub fn sample_blockers<R: Rng + ?Sized>(rng: &mut R, scene: &Scene) -> Vec<OrientedBox> {
    let model = &scene.blocker_model;
    let mean = model.density * scene.room.floor_area();
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive finite Poisson mean").sample(rng) as usize;
    let half = model.half_extents();
    (0..count)
        .map(|_| {
            let x = rng.random_range(0.0..scene.room.length);
            let y = rng.random_range(0.0..scene.room.width);
            let yaw = rng.random_range(0.0..PI);
            OrientedBox::new(Vec3::new(x, y, half.z), half, yaw).expect("valid blocker box")
        })
        .collect()
}
