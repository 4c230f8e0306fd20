//! Monte Carlo simulation of indoor visible-light links assisted by
//! reflecting surfaces.
//!
//! A single ceiling LED serves a randomly placed and randomly tilted
//! photodiode in a rectangular room. Links can be cut by box-shaped blockers
//! scattered over the floor. Wall-mounted mirror arrays (or metasurfaces)
//! redirect light toward the receiver. For each trial the crate computes the
//! direct, diffuse-wall and reflecting-surface gains, then turns the gain
//! ensemble into OOK symbol error rate curves.
//!
//! ```
//! use irsvlc::{default_scene, run_trials, ser_curve, Scenario, SnrGrid};
//!
//! let scene = default_scene(4).unwrap();
//! let gains = run_trials(&scene, 20, 7).unwrap();
//! let curve = ser_curve(&gains, Scenario::LosNlosIrs, &SnrGrid::default()).unwrap();
//! assert!(curve.points.iter().all(|p| (0.0..=0.5).contains(&p.ser)));
//! ```

pub mod channel;
pub mod error;
pub mod geometry;
pub mod irs;
pub mod numeric;
pub mod oracles;
pub mod properties;
pub mod scene;
pub mod simulator;

pub use channel::{los_gain, nlos_gain, nlos_gain_second_order, shadowed, wall_patches, ChannelGain, WallPatch};
pub use error::{Error, Result};
pub use geometry::{
    cos_between, reflect, segment_intersects_box, unit_normal_from_polar, OrientedBox, Segment, UnitVec3,
    Vec3,
};
pub use irs::{
    assign_mirrors_multi_ue, irs_channel_vector, ma_gain, mirror_element_gain, msa_gain,
    optimal_mirror_normal, AssignmentObjective, IrsChannelVector, MetasurfaceArray, MetasurfacePatch,
    MirrorArray, MirrorAssignment, MirrorElement,
};
pub use scene::{
    default_scene, sample_blockers, sample_ue, BlockerModel, IrsKind, Luminaire, OrientationModel,
    PhotoDetector, Room, Scene, SceneParams, Wall,
};
pub use simulator::{
    q_function, required_snr, run_trials, ser_curve, ser_curve_normalized, simulate_trial, trial_rng,
    zero_gain_fraction, Normalization, RequiredSnr, Scenario, SerCurve, SerPoint, SnrGrid, TrialGains,
    SOFT_FEC_LIMIT,
};
