//! Run configuration file. Every physical constant of the model is a key;
//! anything omitted takes the default shown by `RunConfig::default()`.
//!
//! ```toml
//! seed = 1
//! trials = 10000
//!
//! [blockers]
//! densities = [0.0, 1.0]
//!
//! [irs]
//! kind = "mirror"
//! n_per_side = 50
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use irsvlc::{
    BlockerModel, IrsKind, Normalization, OrientationModel, Room, Scenario, SceneParams, SnrGrid, Vec3,
    SOFT_FEC_LIMIT,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed. Limited to the non-negative `i64` range so the config
    /// file can hold it as a plain integer.
    pub seed: u64,
    pub trials: u64,
    pub room: RoomConfig,
    pub luminaire: LuminaireConfig,
    pub receiver: ReceiverConfig,
    pub orientation: OrientationConfig,
    pub blockers: BlockerConfig,
    pub walls: WallConfig,
    pub irs: IrsConfig,
    pub snr: SnrConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomConfig {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LuminaireConfig {
    /// `[x, y, z]`; omitted means the ceiling center.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
    pub lambertian_order: f64,
    pub optical_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    /// Photodiode area in m².
    pub area: f64,
    pub fov_deg: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrientationConfig {
    pub theta_mean_deg: f64,
    pub theta_std_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockerConfig {
    /// Blockers per m²; one set of curves is produced per entry.
    pub densities: Vec<f64>,
    /// Length, width, height in meters.
    pub dims: [f64; 3],
    pub drop_enclosing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WallConfig {
    pub reflectivity: f64,
    pub patch_size: f64,
    pub nlos_order: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrsConfig {
    pub kind: IrsKind,
    pub n_per_side: usize,
    pub element_width: f64,
    pub element_height: f64,
    pub mirror_reflectivity: f64,
    pub metasurface_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnrConfig {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
    pub target_ser: f64,
    pub normalization: Normalization,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scene = SceneParams::default();
        let grid = SnrGrid::default();
        Self {
            seed: 1,
            trials: 10_000,
            room: RoomConfig {
                length: scene.room.length,
                width: scene.room.width,
                height: scene.room.height,
            },
            luminaire: LuminaireConfig {
                position: None,
                lambertian_order: scene.lambertian_order,
                optical_power: scene.optical_power,
            },
            receiver: ReceiverConfig { area: scene.pd_area, fov_deg: scene.fov_deg, height: scene.ue_height },
            orientation: OrientationConfig {
                theta_mean_deg: scene.orientation.theta_mean_deg,
                theta_std_deg: scene.orientation.theta_std_deg,
            },
            blockers: BlockerConfig {
                densities: vec![0.0, 1.0],
                dims: scene.blockers.dims,
                drop_enclosing: scene.blockers.drop_enclosing,
            },
            walls: WallConfig {
                reflectivity: scene.wall_reflectivity,
                patch_size: scene.nlos_patch_size,
                nlos_order: scene.nlos_order,
            },
            irs: IrsConfig {
                kind: scene.irs_kind,
                n_per_side: scene.n_per_side,
                element_width: scene.element_width,
                element_height: scene.element_height,
                mirror_reflectivity: scene.mirror_reflectivity,
                metasurface_efficiency: scene.metasurface_efficiency,
            },
            snr: SnrConfig {
                start_db: grid.start_db,
                stop_db: grid.stop_db,
                step_db: grid.step_db,
                target_ser: SOFT_FEC_LIMIT,
                normalization: Normalization::default(),
                scenarios: Scenario::ALL.to_vec(),
            },
            output: OutputConfig { dir: PathBuf::from("irsvlc-out"), svg: false },
        }
    }
}

macro_rules! section_default {
    ($ty:ident, $field:ident) => {
        impl Default for $ty {
            fn default() -> Self {
                RunConfig::default().$field
            }
        }
    };
}

section_default!(RoomConfig, room);
section_default!(LuminaireConfig, luminaire);
section_default!(ReceiverConfig, receiver);
section_default!(OrientationConfig, orientation);
section_default!(BlockerConfig, blockers);
section_default!(WallConfig, walls);
section_default!(IrsConfig, irs);
section_default!(SnrConfig, snr);
section_default!(OutputConfig, output);

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Input { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self) -> SnrGrid {
        SnrGrid { start_db: self.snr.start_db, stop_db: self.snr.stop_db, step_db: self.snr.step_db }
    }

    /// Scene parameters for one blocker density.
    pub fn scene_params(&self, density: f64) -> SceneParams {
        SceneParams {
            room: Room { length: self.room.length, width: self.room.width, height: self.room.height },
            ap_position: self.luminaire.position.map(|[x, y, z]| Vec3::new(x, y, z)),
            lambertian_order: self.luminaire.lambertian_order,
            optical_power: self.luminaire.optical_power,
            pd_area: self.receiver.area,
            fov_deg: self.receiver.fov_deg,
            ue_height: self.receiver.height,
            orientation: OrientationModel {
                theta_mean_deg: self.orientation.theta_mean_deg,
                theta_std_deg: self.orientation.theta_std_deg,
            },
            blockers: BlockerModel {
                density,
                dims: self.blockers.dims,
                drop_enclosing: self.blockers.drop_enclosing,
            },
            wall_reflectivity: self.walls.reflectivity,
            nlos_patch_size: self.walls.patch_size,
            nlos_order: self.walls.nlos_order,
            irs_kind: self.irs.kind,
            n_per_side: self.irs.n_per_side,
            element_width: self.irs.element_width,
            element_height: self.irs.element_height,
            mirror_reflectivity: self.irs.mirror_reflectivity,
            metasurface_efficiency: self.irs.metasurface_efficiency,
        }
    }

    /// Checks every key before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.seed > i64::MAX as u64 {
            return fail(format!("seed must be at most {}, got {}", i64::MAX, self.seed));
        }
        if self.trials == 0 {
            return fail("trials must be >= 1".into());
        }
        if self.blockers.densities.is_empty() {
            return fail("blockers.densities must not be empty".into());
        }
        let mut seen = Vec::new();
        for &d in &self.blockers.densities {
            if !(d >= 0.0 && d.is_finite()) {
                return fail(format!("blockers.densities entries must be >= 0, got {d}"));
            }
            if seen.contains(&d) {
                return fail(format!("blockers.densities lists {d} twice"));
            }
            seen.push(d);
        }
        for &d in &self.blockers.densities {
            self.scene_params(d).validate().map_err(|e| CliError::Config(with_config_key(&e)))?;
        }
        self.grid().validate().map_err(|e| CliError::Config(format!("[snr] {e}")))?;
        if !(self.snr.target_ser > 0.0 && self.snr.target_ser < 0.5) {
            return fail(format!("snr.target_ser must lie in (0, 0.5), got {}", self.snr.target_ser));
        }
        if self.snr.scenarios.is_empty() {
            return fail("snr.scenarios must not be empty".into());
        }
        let unique: BTreeSet<_> = self.snr.scenarios.iter().collect();
        if unique.len() != self.snr.scenarios.len() {
            return fail("snr.scenarios lists a scenario twice".into());
        }
        Ok(())
    }
}

/// Scene parameter names and the config keys that set them.
const KEYS: &[(&str, &str)] = &[
    ("room ", "room"),
    ("ap_position", "luminaire.position"),
    ("lambertian_order", "luminaire.lambertian_order"),
    ("optical_power", "luminaire.optical_power"),
    ("pd_area", "receiver.area"),
    ("fov_deg", "receiver.fov_deg"),
    ("ue_height", "receiver.height"),
    ("theta_mean_deg", "orientation.theta_mean_deg"),
    ("theta_std_deg", "orientation.theta_std_deg"),
    ("blocker dimension", "blockers.dims"),
    ("wall_reflectivity", "walls.reflectivity"),
    ("nlos_patch_size", "walls.patch_size"),
    ("nlos_order", "walls.nlos_order"),
    ("n_per_side", "irs.n_per_side"),
    ("element_width", "irs.element_width"),
    ("element_height", "irs.element_height"),
    ("mirror_reflectivity", "irs.mirror_reflectivity"),
    ("metasurface_efficiency", "irs.metasurface_efficiency"),
];

fn with_config_key(e: &irsvlc::Error) -> String {
    let msg = match e {
        irsvlc::Error::Config(m) => m.clone(),
        other => other.to_string(),
    };
    let key = if msg.contains(" array of ") {
        Some("irs.n_per_side")
    } else {
        KEYS.iter().find(|(name, _)| msg.starts_with(name)).map(|(_, key)| *key)
    };
    match key {
        Some(key) => format!("[{key}] {msg}"),
        None => msg,
    }
}
