use std::f64::consts::{FRAC_PI_2, PI, TAU};

use irsvlc::oracles::penetration_depth;
use irsvlc::{
    assign_mirrors_multi_ue, cos_between, los_gain, nlos_gain, reflect, segment_intersects_box, shadowed,
    unit_normal_from_polar, wall_patches, AssignmentObjective, Luminaire, MirrorArray, OrientedBox,
    PhotoDetector, Room, Segment, UnitVec3, Vec3, Wall,
};
use proptest::prelude::*;

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = UnitVec3> {
    (0.0..PI, 0.0..TAU).prop_map(|(theta, phi)| {
        UnitVec3::new(Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())).unwrap()
    })
}

fn boxes() -> impl Strategy<Value = OrientedBox> {
    (vec3(1.0), 0.05..0.8, 0.05..0.8, 0.05..0.8, 0.0..PI)
        .prop_map(|(c, hx, hy, hz, yaw)| OrientedBox::new(c, Vec3::new(hx, hy, hz), yaw).unwrap())
}

fn rotate_z(v: Vec3, about: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    let d = v - about;
    about + Vec3::new(c * d.x - s * d.y, s * d.x + c * d.y, d.z)
}

fn ceiling_ap() -> Luminaire {
    Luminaire { position: Vec3::new(2.5, 2.5, 3.0), normal: UnitVec3::NEG_Z, lambertian_order: 1.0, optical_power: 1.0 }
}

proptest! {
    #[test]
    fn reflecting_twice_across_opposite_normals_is_identity(d in unit(), n in unit()) {
        prop_assume!(d.dot(n.as_vec()) < -1e-6);
        let r = reflect(d, n).unwrap();
        let back = reflect(r, -n).unwrap();
        prop_assert!((back.as_vec() - d.as_vec()).norm() < 1e-12);
    }

    #[test]
    fn polar_normals_are_unit_with_matching_tilt(theta in 0.0..=FRAC_PI_2, omega in 0.0..TAU) {
        let n = unit_normal_from_polar(theta, omega).unwrap();
        prop_assert!((n.as_vec().norm() - 1.0).abs() < 1e-12);
        prop_assert!((n.z() - theta.cos()).abs() < 1e-12);
    }

    #[test]
    fn segment_test_ignores_direction(p in vec3(1.5), q in vec3(1.5), b in boxes()) {
        prop_assume!(p != q && penetration_depth(p, q, &b).abs() > 1e-6);
        let fwd = segment_intersects_box(&Segment::new(p, q).unwrap(), &b);
        let rev = segment_intersects_box(&Segment::new(q, p).unwrap(), &b);
        prop_assert_eq!(fwd, rev);
    }

    #[test]
    fn segment_test_is_yaw_equivariant(p in vec3(1.5), q in vec3(1.5), b in boxes(), turn in 0.0..PI) {
        prop_assume!(p != q && penetration_depth(p, q, &b).abs() > 1e-6);
        let c = b.center();
        let yaw = (b.yaw() + turn) % PI;
        let turned = OrientedBox::new(c, b.half_extents(), yaw).unwrap();
        let seg = Segment::new(rotate_z(p, c, turn), rotate_z(q, c, turn)).unwrap();
        prop_assert_eq!(
            segment_intersects_box(&Segment::new(p, q).unwrap(), &b),
            segment_intersects_box(&seg, &turned)
        );
    }

    #[test]
    fn shadowed_is_the_or_of_single_box_tests(
        p in vec3(2.0), q in vec3(2.0), bs in prop::collection::vec(boxes(), 0..100)
    ) {
        prop_assume!(p != q);
        let seg = Segment::new(p, q).unwrap();
        let folded = bs.iter().any(|b| segment_intersects_box(&seg, b));
        prop_assert_eq!(shadowed(p, q, &bs), folded);
    }

    #[test]
    fn los_gain_is_zero_outside_the_fov(
        x in 0.0..5.0, y in 0.0..5.0, n in unit(), fov_deg in 5.0..90.0_f64
    ) {
        let ue = PhotoDetector { position: Vec3::new(x, y, 1.0), normal: n, area: 1e-4, fov: fov_deg.to_radians() };
        let ap = ceiling_ap();
        let psi = cos_between(n, UnitVec3::new(ap.position - ue.position).unwrap()).acos();
        prop_assume!((psi - ue.fov).abs() > 1e-9);
        let g = los_gain(&ap, &ue, &[]).unwrap().value();
        prop_assert_eq!(g > 0.0, psi < ue.fov);
    }

    #[test]
    fn blockers_never_raise_direct_or_diffuse_gain(
        x in 0.2..4.8, y in 0.2..4.8, n in unit(), bs in prop::collection::vec(boxes(), 1..8),
        shift in (1.0..4.0, 1.0..4.0)
    ) {
        let bs: Vec<OrientedBox> = bs
            .iter()
            .map(|b| OrientedBox::new(b.center() + Vec3::new(shift.0, shift.1, 1.0), b.half_extents(), b.yaw()).unwrap())
            .collect();
        let ue = PhotoDetector { position: Vec3::new(x, y, 1.0), normal: n, area: 1e-4, fov: 85f64.to_radians() };
        let ap = ceiling_ap();
        let patches = wall_patches(&Room::new(5.0, 5.0, 3.0).unwrap(), 0.5, 0.7).unwrap();
        let mut prev = (los_gain(&ap, &ue, &[]).unwrap().value(), nlos_gain(&ap, &ue, &patches, &[]).value());
        for k in 1..=bs.len() {
            let now = (
                los_gain(&ap, &ue, &bs[..k]).unwrap().value(),
                nlos_gain(&ap, &ue, &patches, &bs[..k]).value(),
            );
            prop_assert!(now.0 <= prev.0 && now.1 <= prev.1 * (1.0 + 1e-12));
            prev = now;
        }
    }

    #[test]
    fn nlos_gain_ignores_patch_order(x in 0.1..4.9, y in 0.1..4.9, n in unit(), seed in any::<u64>()) {
        let ue = PhotoDetector { position: Vec3::new(x, y, 1.0), normal: n, area: 1e-4, fov: 85f64.to_radians() };
        let ap = ceiling_ap();
        let patches = wall_patches(&Room::new(5.0, 5.0, 3.0).unwrap(), 0.25, 0.7).unwrap();
        let mut shuffled = patches.clone();
        // deterministic Fisher-Yates driven by a splitmix sequence
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            shuffled.swap(i, ((z ^ (z >> 31)) % (i as u64 + 1)) as usize);
        }
        let a = nlos_gain(&ap, &ue, &patches, &[]).value();
        let b = nlos_gain(&ap, &ue, &shuffled, &[]).value();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(f64::MIN_POSITIVE) + 1e-24);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn max_sum_assignment_matches_exhaustive_search(
        a in (0.5..4.5, 0.5..4.5, unit()), b in (0.5..4.5, 0.5..4.5, unit())
    ) {
        let room = Room::new(5.0, 5.0, 3.0).unwrap();
        let array = MirrorArray::on_wall(&room, Wall::West, 2, 0.1, 0.06, 0.95).unwrap();
        let ue = |(x, y, n): (f64, f64, UnitVec3)| PhotoDetector {
            position: Vec3::new(x, y, 1.0), normal: n, area: 1e-4, fov: 85f64.to_radians(),
        };
        let ues = [ue(a), ue(b)];
        let arrays = [array];
        let got = assign_mirrors_multi_ue(&ceiling_ap(), &arrays, &ues, &[], AssignmentObjective::MaxSum).unwrap();
        let gains = irsvlc::irs::element_gain_matrix(&ceiling_ap(), &arrays, &ues, &[]).unwrap();
        let best = (0..16u32)
            .map(|mask| (0..4).map(|e| gains[e][((mask >> e) & 1) as usize]).sum::<f64>())
            .fold(0.0, f64::max);
        prop_assert!((got.total_gain() - best).abs() <= 1e-12 * best.max(f64::MIN_POSITIVE));
    }
}
