use std::f64::consts::PI;

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sunsky::geometry::{GeometryBuffers, Mat3, TriangleMesh, Vec3};
use sunsky::illum::*;
use sunsky::{BinaryMask, LinearImage};

fn buffers_with_normals(normals: Vec<Vec3>, position: Vec3) -> GeometryBuffers {
    let n = normals.len();
    GeometryBuffers {
        width: n,
        height: 1,
        depth: vec![1.0; n],
        normal: normals,
        position: vec![position; n],
        triangle: vec![0; n],
        hit: BinaryMask::filled(n, 1, true),
        sun_visibility: None,
        sky_visibility: None,
    }
}

fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

#[test]
fn open_sky_shading_has_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let normals: Vec<Vec3> = (0..100).map(|_| random_unit(&mut rng)).collect();
    let b = buffers_with_normals(normals.clone(), Vec3::zeros());
    let s = compute_sky_shading_uniform(&TriangleMesh::empty(), &b, 1024, 2).unwrap();
    for (n, v) in normals.iter().zip(&s) {
        let expect = (1.0 + n.z) / 2.0;
        assert!((*v as f64 - expect).abs() < 0.02, "{n:?}: {v} vs {expect}");
    }
    let up = compute_sky_shading_uniform(&TriangleMesh::empty(), &buffers_with_normals(vec![Vec3::z(); 4], Vec3::zeros()), 1024, 2).unwrap();
    assert!(up.iter().all(|&v| (v - 1.0).abs() < 0.02));
}

#[test]
fn sun_shading_is_the_clamped_cosine() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let normals: Vec<Vec3> = (0..500).map(|_| random_unit(&mut rng)).collect();
    let b = buffers_with_normals(normals.clone(), Vec3::zeros());
    let sun = SunPosition::from_angles(210.0, 40.0).unwrap();
    let all = BinaryMask::filled(500, 1, true);
    let s = compute_sun_shading(&b, &all, &sun);
    for (n, v) in normals.iter().zip(&s) {
        assert!((*v as f64 - n.dot(&sun.direction).max(0.0)).abs() <= 1e-6);
    }
    let none = compute_sun_shading(&b, &BinaryMask::filled(500, 1, false), &sun);
    assert!(none.iter().all(|&v| v == 0.0));
}

fn wall_mesh() -> TriangleMesh {
    let v = vec![
        Vec3::new(0.0, -500.0, -1.0),
        Vec3::new(0.0, 500.0, -1.0),
        Vec3::new(0.0, 500.0, 500.0),
        Vec3::new(0.0, -500.0, 500.0),
    ];
    TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
}

#[test]
fn foot_of_wall_and_closed_box() {
    let b = buffers_with_normals(vec![Vec3::z(); 16], Vec3::new(-1.0, 0.0, 0.0));
    let s = compute_sky_shading_uniform(&wall_mesh(), &b, 1024, 9).unwrap();
    let mean = s.iter().map(|&v| v as f64).sum::<f64>() / 16.0;
    assert!((mean - 0.5).abs() < 0.02, "{mean}");

    // A closed cube around the point blocks everything.
    let mut v = Vec::new();
    for i in 0..8 {
        v.push(Vec3::new(
            if i & 1 == 0 { -5.0 } else { 5.0 },
            if i & 2 == 0 { -5.0 } else { 5.0 },
            if i & 4 == 0 { -5.0 } else { 5.0 },
        ));
    }
    let mut t = Vec::new();
    for [a, b, c, d] in [[0, 1, 3, 2], [4, 5, 7, 6], [0, 1, 5, 4], [2, 3, 7, 6], [0, 2, 6, 4], [1, 3, 7, 5]] {
        t.push([a, b, c]);
        t.push([a, c, d]);
    }
    let cube = TriangleMesh::new(v, t).unwrap();
    let b = buffers_with_normals(vec![Vec3::z(), Vec3::x(), Vec3::new(0.0, 0.6, 0.8)], Vec3::zeros());
    assert!(compute_sky_shading_uniform(&cube, &b, 256, 1).unwrap().iter().all(|&v| v == 0.0));
}

fn dome(w: usize, h: usize, f: impl Fn(&Vec3) -> f64) -> SkyDome {
    let probe = SkyDome::new(LinearImage::filled(w, h, 1, 0.0).unwrap()).unwrap();
    let img = LinearImage::from_fn(w, h, 1, |x, y, _| f(&probe.pixel_direction(x, y)) as f32).unwrap();
    SkyDome::new(img).unwrap()
}

#[test]
fn constant_dome_with_reciprocal_gain_matches_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let normals: Vec<Vec3> = (0..200).map(|_| random_unit(&mut rng)).collect();
    let b = buffers_with_normals(normals, Vec3::new(-2.0, 0.0, 0.0));
    let mesh = wall_mesh();
    let d = dome(64, 32, |_| 4.0).with_gain(0.25).unwrap();
    let uniform = compute_sky_shading_uniform(&mesh, &b, 128, 21).unwrap();
    let measured = compute_sky_shading_measured(&mesh, &b, &d, 128, 21).unwrap();
    for (u, m) in uniform.iter().zip(&measured) {
        assert!((u - m).abs() <= 1e-6);
    }
    let unaligned = dome(64, 32, |_| 4.0);
    assert!(compute_sky_shading_measured(&mesh, &b, &unaligned, 128, 21).is_err());
}

#[test]
fn half_bright_dome_gives_half_shading() {
    let b = buffers_with_normals(vec![Vec3::z(); 8], Vec3::zeros());
    let east = dome(360, 180, |d| if d.x > 0.0 { 1.0 } else { 0.0 }).with_gain(1.0).unwrap();
    let s = compute_sky_shading_measured(&TriangleMesh::empty(), &b, &east, 1024, 4).unwrap();
    let mean = s.iter().map(|&v| v as f64).sum::<f64>() / 8.0;
    assert!((mean - 0.5).abs() < 0.02, "{mean}");
}

#[test]
fn alignment_recovers_scale_under_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let n = 5000;
    let uniform: Vec<f32> = (0..n).map(|_| rng.random_range(0.3f32..1.0)).collect();
    let k = 2.7;
    let measured: Vec<f32> = uniform
        .iter()
        .map(|&u| ((u as f64 + noise.sample(&mut rng)) / k).max(0.0) as f32)
        .collect();
    let valid = BinaryMask::filled(n, 1, true);
    let g = align_sky_dome(&uniform, &measured, &valid).unwrap();
    assert!((g - k).abs() / k < 0.01, "{g}");
    assert!(align_sky_dome(&uniform, &vec![0.0; n], &valid).is_err());
    assert!(align_sky_dome(&uniform[..50], &measured[..50], &BinaryMask::filled(50, 1, true)).is_err());
}

#[test]
fn hdr_merge_recovers_forward_simulated_radiance() {
    let times: Vec<f64> = (0..11).map(|k| 0.5 * 2f64.powf(0.6 * k as f64)).collect();
    assert!((times[10] - 32.0).abs() < 1e-9);
    let (w, h) = (64, 48);
    // log-spaced radiance, 1e-4 .. 10
    let radiance = |x: usize, y: usize| 10f64.powf(-4.0 + 5.0 * (y * w + x) as f64 / (w * h - 1) as f64);
    let frames = times
        .iter()
        .map(|&t| LinearImage::from_fn(w, h, 1, |x, y, _| (radiance(x, y) * t).min(1.0) as f32).unwrap())
        .collect();
    let stack = ExposureStack::new(frames, times.clone()).unwrap();
    let merged = merge_hdr(&stack, DEFAULT_SATURATION, DEFAULT_FLOOR).unwrap();
    let mut checked = 0;
    for y in 0..h {
        for x in 0..w {
            let l = radiance(x, y);
            if l * times[0] < 1.0 {
                checked += 1;
                let got = merged.get(x, y, 0) as f64;
                assert!((got - l).abs() / l < 1e-3, "{l}: {got}");
            }
        }
    }
    assert!(checked > 2000);
}

#[test]
fn hdr_stack_validation() {
    let f = LinearImage::filled(2, 2, 1, 0.5).unwrap();
    assert!(ExposureStack::new(vec![f.clone()], vec![1.0]).is_err());
    assert!(ExposureStack::new(vec![f.clone(), f.clone()], vec![2.0, 1.0]).is_err());
    assert!(ExposureStack::new(vec![f.clone(), f], vec![0.5, 32.0]).is_ok());
}

#[test]
fn fisheye_round_trip() {
    let size = 512;
    let calib = FisheyeCalibration {
        focal: (size as f64 / 2.0 - 4.0) / (PI / 2.0),
        center: (size as f64 / 2.0, size as f64 / 2.0),
        // lens looking up; image x toward east, image y toward north
        rotation: Mat3::identity(),
    };
    let sky = |d: &Vec3| 1.0 + 0.5 * d.z + 0.3 * d.x * d.x + 0.2 * d.y;
    let img = render_fisheye(&calib, size, size, sky).unwrap();
    let dome = fisheye_to_equirect(&img, &calib, 180, 90).unwrap();
    let mut worst = 0.0f64;
    for y in 0..40 {
        for x in 0..180 {
            let d = dome.pixel_direction(x, y);
            let truth = sky(&d);
            worst = worst.max((dome.equirect.get(x, y, 0) as f64 - truth).abs() / truth);
        }
    }
    assert!(worst < 0.01, "{worst}");
    // below the horizon is empty
    assert_eq!(dome.equirect.get(10, 80, 0), 0.0);
}

#[test]
fn ephemeris_reference_points() {
    // (lat, lon, y, m, d, h, min, azimuth, elevation)
    let table = [
        (40.0, -105.0, 2023, 6, 21, 18, 0, 137.1613, 68.9211),
        (39.7392, -104.9903, 2020, 1, 15, 19, 30, 185.5214, 28.9568),
        (51.5074, -0.1278, 2021, 9, 22, 12, 0, 182.1952, 38.5893),
        (-33.8688, 151.2093, 2022, 12, 21, 2, 0, 351.1742, 79.4539),
        (35.6762, 139.6503, 2019, 3, 20, 3, 0, 184.6411, 53.9203),
        (64.1466, -21.9426, 2024, 6, 21, 23, 0, 326.0591, 2.3042),
        (-1.2921, 36.8219, 2018, 11, 5, 9, 15, 178.7513, 75.5807),
        (19.4326, -99.1332, 2025, 2, 10, 17, 45, 153.0337, 52.7721),
        (-54.8019, -68.3030, 2023, 10, 1, 15, 0, 25.8144, 35.7634),
        (0.0, 0.0, 2010, 7, 4, 6, 30, 66.9920, 5.9022),
    ];
    for (lat, lon, y, mo, d, h, mi, az, el) in table {
        let t = Utc.with_ymd_and_hms(y, mo, d, h, mi, 0).unwrap();
        let s = sun_direction(lat, lon, t).unwrap();
        let daz = ((s.azimuth - az + 540.0) % 360.0 - 180.0).abs();
        assert!(daz < 0.1 && (s.elevation - el).abs() < 0.1, "{t}: {} {} vs {az} {el}", s.azimuth, s.elevation);
        assert!((s.direction.norm() - 1.0).abs() < 1e-12);
    }
}
