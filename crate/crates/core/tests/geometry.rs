use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sunsky::geometry::{
    compute_sky_visibility, compute_sun_visibility, render_geometry, CameraModel, GeometryBuffers, Mat3,
    TriangleMesh, Vec3,
};
use sunsky::BinaryMask;

fn quad(half: f64, z: f64) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    (
        vec![
            Vec3::new(-half, -half, z),
            Vec3::new(half, -half, z),
            Vec3::new(half, half, z),
            Vec3::new(-half, half, z),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
}

fn add_box(v: &mut Vec<Vec3>, t: &mut Vec<[u32; 3]>, lo: Vec3, hi: Vec3) {
    let base = v.len() as u32;
    for i in 0..8 {
        v.push(Vec3::new(
            if i & 1 == 0 { lo.x } else { hi.x },
            if i & 2 == 0 { lo.y } else { hi.y },
            if i & 4 == 0 { lo.z } else { hi.z },
        ));
    }
    for [a, b, c, d] in [[0, 1, 3, 2], [4, 5, 7, 6], [0, 1, 5, 4], [2, 3, 7, 6], [0, 2, 6, 4], [1, 3, 7, 5]] {
        t.push([base + a, base + b, base + c]);
        t.push([base + a, base + c, base + d]);
    }
}

fn nadir(height: f64, size: usize, focal: f64) -> CameraModel {
    CameraModel::look_at(Vec3::new(0.0, 0.0, height), Vec3::zeros(), Vec3::y(), focal, size, size).unwrap()
}

#[test]
fn quad_at_ten_metres() {
    let (v, t) = quad(50.0, 0.0);
    let mesh = TriangleMesh::new(v, t).unwrap();
    let b = render_geometry(&mesh, &nadir(10.0, 32, 20.0));
    assert_eq!(b.hit.count(), 32 * 32);
    for p in 0..b.pixel_count() {
        assert!((b.depth[p] - 10.0).abs() < 1e-9);
        assert!((b.normal[p] - Vec3::z()).norm() < 1e-12);
        assert!(b.position[p].z.abs() < 1e-9);
    }
}

#[test]
fn empty_mesh_misses_everywhere() {
    let b = render_geometry(&TriangleMesh::empty(), &nadir(10.0, 8, 10.0));
    assert!(b.hit.is_empty());
    assert!(b.depth.iter().all(|&d| d == 0.0));
    assert!(b.triangle.iter().all(|&t| t == u32::MAX));
}

#[test]
fn tilted_plane_matches_ray_plane_intersection() {
    // 45 degree plane z = x
    let f = |x: f64, _y: f64| x;
    let c = [(-100.0, -100.0), (100.0, -100.0), (100.0, 100.0), (-100.0, 100.0)];
    let v = c.iter().map(|&(x, y)| Vec3::new(x, y, f(x, y))).collect();
    let mesh = TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
    let cam = CameraModel::look_at(Vec3::new(-20.0, -8.0, 40.0), Vec3::new(1.0, 2.0, 1.0), Vec3::z(), 60.0, 48, 40)
        .unwrap();
    let b = render_geometry(&mesh, &cam);
    let n = Vec3::new(-1.0, 0.0, 1.0);
    let o = cam.center();
    for y in 0..40 {
        for x in 0..48 {
            let d = cam.pixel_ray(x, y);
            let t = -n.dot(&o) / n.dot(&d);
            let p = y * 48 + x;
            assert!(b.is_hit(p));
            assert!((b.depth[p] - t).abs() < 1e-9 * t, "pixel {x},{y}: {} vs {t}", b.depth[p]);
            assert!((b.normal[p] - n.normalize()).norm() < 1e-12);
        }
    }
}

#[test]
fn back_faces_are_hit_with_normals_toward_camera() {
    let (v, _) = quad(5.0, 0.0);
    let mesh = TriangleMesh::new(v, vec![[0, 2, 1], [0, 3, 2]]).unwrap();
    assert!(mesh.normal(0).z < 0.0);
    let b = render_geometry(&mesh, &nadir(10.0, 4, 8.0));
    assert_eq!(b.hit.count(), 16);
    assert!(b.normal.iter().all(|n| (n - Vec3::z()).norm() < 1e-12));
}

fn in_convex_hull(points: &[(f64, f64)], q: (f64, f64)) -> bool {
    // Andrew's monotone chain, then a same-side test.
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &pt in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0.0 {
                hull.pop();
            }
            hull.push(pt);
        }
        hull.pop();
    }
    (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], q) >= 0.0)
}

#[test]
fn box_shadow_matches_analytic_footprint() {
    let (mut v, mut t) = quad(30.0, 0.0);
    let (lo, hi) = (Vec3::new(-6.0, -4.0, 0.0), Vec3::new(4.0, 8.0, 10.0));
    add_box(&mut v, &mut t, lo, hi);
    let mesh = TriangleMesh::new(v, t).unwrap();
    let b = render_geometry(&mesh, &nadir(150.0, 240, 500.0));
    let (az, el) = (120f64.to_radians(), 45f64.to_radians());
    let sun = Vec3::new(az.sin() * el.cos(), az.cos() * el.cos(), el.sin());
    let vis = compute_sun_visibility(&mesh, &b, &sun).unwrap();

    // Shadow polygon: hull of the footprint and its top corners projected
    // along the sun onto the ground.
    let shift = (-sun.x / sun.z * hi.z, -sun.y / sun.z * hi.z);
    let mut corners = Vec::new();
    for (x, y) in [(lo.x, lo.y), (hi.x, lo.y), (hi.x, hi.y), (lo.x, hi.y)] {
        corners.push((x, y));
        corners.push((x + shift.0, y + shift.1));
    }
    let (mut expected, mut rendered) = (0usize, 0usize);
    for p in 0..b.pixel_count() {
        let q = b.position[p];
        if !b.is_hit(p) || q.z > 1e-6 {
            continue;
        }
        let inside_footprint = q.x > lo.x && q.x < hi.x && q.y > lo.y && q.y < hi.y;
        expected += (!inside_footprint && in_convex_hull(&corners, (q.x, q.y))) as usize;
        rendered += !vis.at(p) as usize;
    }
    assert!(expected > 1000, "{expected}");
    let rel = (rendered as f64 - expected as f64).abs() / expected as f64;
    assert!(rel < 0.02, "{rendered} vs {expected}");
}

#[test]
fn zenith_sun_lights_an_open_plane_and_back_faces_stay_dark() {
    let (v, t) = quad(20.0, 0.0);
    let mesh = TriangleMesh::new(v, t).unwrap();
    let b = render_geometry(&mesh, &nadir(10.0, 16, 8.0));
    assert_eq!(compute_sun_visibility(&mesh, &b, &Vec3::z()).unwrap(), b.hit);
    let below = Vec3::new(0.6, 0.0, -0.8);
    assert!(compute_sun_visibility(&mesh, &b, &below).unwrap().is_empty());
    assert!(compute_sun_visibility(&mesh, &b, &Vec3::new(0.0, 0.0, 1.01)).is_err());
}

#[test]
fn sky_visibility_limits() {
    // Open plane: every ray escapes.
    let (v, t) = quad(50.0, 0.0);
    let mesh = TriangleMesh::new(v.clone(), t.clone()).unwrap();
    let b = render_geometry(&mesh, &CameraModel::look_at(Vec3::new(0.0, -30.0, 10.0), Vec3::zeros(), Vec3::z(), 8.0, 16, 16).unwrap());
    let sky = compute_sky_visibility(&mesh, &b, 64, 3).unwrap();
    for p in 0..b.pixel_count() {
        assert_eq!(sky[p], if b.is_hit(p) { 1.0 } else { 0.0 });
    }
    assert!(b.hit.count() < b.pixel_count(), "the view should include misses");
    assert!(compute_sky_visibility(&mesh, &b, 8, 3).is_err());
}

fn point_buffers(count: usize, position: Vec3, normal: Vec3) -> GeometryBuffers {
    GeometryBuffers {
        width: count,
        height: 1,
        depth: vec![1.0; count],
        normal: vec![normal; count],
        position: vec![position; count],
        triangle: vec![0; count],
        hit: BinaryMask::filled(count, 1, true),
        sun_visibility: None,
        sky_visibility: None,
    }
}

#[test]
fn foot_of_a_wall_sees_half_the_sky() {
    let v = vec![
        Vec3::new(0.0, -500.0, -1.0),
        Vec3::new(0.0, 500.0, -1.0),
        Vec3::new(0.0, 500.0, 500.0),
        Vec3::new(0.0, -500.0, 500.0),
    ];
    let wall = TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
    let b = point_buffers(8, Vec3::new(-1.0, 0.0, 0.0), Vec3::z());
    let sky = compute_sky_visibility(&wall, &b, 4096, 11).unwrap();
    let mean = sky.iter().map(|&s| s as f64).sum::<f64>() / sky.len() as f64;
    assert!((mean - 0.5).abs() < 0.01, "{mean}");
}

#[test]
fn sky_visibility_noise_shrinks_by_root_two_when_samples_double() {
    let (mut v, mut t) = quad(50.0, 0.0);
    add_box(&mut v, &mut t, Vec3::new(1.0, -10.0, 0.0), Vec3::new(3.0, 10.0, 4.0));
    let mesh = TriangleMesh::new(v, t).unwrap();
    let b = point_buffers(3000, Vec3::new(0.0, 0.0, 0.0), Vec3::z());
    let std = |samples| {
        let s = compute_sky_visibility(&mesh, &b, samples, 5).unwrap();
        let m = s.iter().map(|&v| v as f64).sum::<f64>() / s.len() as f64;
        (s.iter().map(|&v| (v as f64 - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64).sqrt()
    };
    let ratio = std(32) / std(64);
    assert!((ratio - 2f64.sqrt()).abs() < 0.1, "{ratio}");
}

#[test]
fn rigid_motion_about_up_preserves_everything() {
    let (mut v, mut t) = quad(40.0, 0.0);
    add_box(&mut v, &mut t, Vec3::new(-3.0, -3.0, 0.0), Vec3::new(3.0, 5.0, 6.0));
    let mesh = TriangleMesh::new(v.clone(), t.clone()).unwrap();
    let cam = CameraModel::look_at(Vec3::new(10.0, -25.0, 30.0), Vec3::zeros(), Vec3::z(), 40.0, 40, 30).unwrap();
    let (sa, ca) = 0.7f64.sin_cos();
    let r = Mat3::new(ca, -sa, 0.0, sa, ca, 0.0, 0.0, 0.0, 1.0);
    let shift = Vec3::new(120.0, -35.0, 4.0);
    let moved = TriangleMesh::new(v.iter().map(|p| r * p + shift).collect(), t).unwrap();
    let cam2 = cam.transformed(&r, &shift).unwrap();
    let sun = Vec3::new(0.3, -0.5, 0.8).normalize();

    let (b1, b2) = (render_geometry(&mesh, &cam), render_geometry(&moved, &cam2));
    assert_eq!(b1.hit, b2.hit);
    for p in 0..b1.pixel_count() {
        assert!((b1.depth[p] - b2.depth[p]).abs() < 1e-9);
        assert!((r * b1.normal[p] - b2.normal[p]).norm() < 1e-9);
    }
    let (s1, s2) = (
        compute_sun_visibility(&mesh, &b1, &sun).unwrap(),
        compute_sun_visibility(&moved, &b2, &(r * sun)).unwrap(),
    );
    assert!(s1.and_not(&s2).count() + s2.and_not(&s1).count() <= 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn occluders_only_remove_light(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut v, mut t) = quad(30.0, 0.0);
        add_box(&mut v, &mut t, Vec3::new(-29.0, -29.0, 0.0), Vec3::new(-28.0, -28.0, 20.0));
        let base = TriangleMesh::new(v.clone(), t.clone()).unwrap();
        let lo = Vec3::new(rng.random_range(-10.0..5.0), rng.random_range(-10.0..5.0), 0.0);
        let hi = lo + Vec3::new(rng.random_range(1.0..5.0), rng.random_range(1.0..5.0), rng.random_range(1.0..8.0));
        add_box(&mut v, &mut t, lo, hi);
        let more = TriangleMesh::new(v, t).unwrap();
        prop_assert!((base.diagonal() - more.diagonal()).abs() < 1e-12);

        let cam = CameraModel::look_at(Vec3::new(0.0, -20.0, 25.0), Vec3::zeros(), Vec3::z(), 20.0, 24, 24).unwrap();
        let sun = Vec3::new(0.4, 0.4, 0.8).normalize();
        let b0 = render_geometry(&base, &cam);
        let b1 = render_geometry(&more, &cam);
        let (sky0, sky1) = (
            compute_sky_visibility(&base, &b0, 32, seed).unwrap(),
            compute_sky_visibility(&more, &b1, 32, seed).unwrap(),
        );
        let (sun0, sun1) = (
            compute_sun_visibility(&base, &b0, &sun).unwrap(),
            compute_sun_visibility(&more, &b1, &sun).unwrap(),
        );
        for p in 0..b0.pixel_count() {
            // only compare pixels that still see the same surface point
            if b0.is_hit(p) && b1.is_hit(p) && b0.triangle[p] == b1.triangle[p] {
                prop_assert!(sky1[p] <= sky0[p]);
                prop_assert!(!sun1.at(p) || sun0.at(p));
            }
        }
    }
}
