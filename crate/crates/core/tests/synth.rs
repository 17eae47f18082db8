use sunsky::geometry::compute_sun_visibility;
use sunsky::synth::{build_scene, render_ground_truth, CameraRigSpec, SceneSpec};

fn spec() -> SceneSpec {
    SceneSpec {
        cameras: CameraRigSpec {
            width: 160,
            height: 107,
            focal: 187.0,
            ..CameraRigSpec::default()
        },
        ..SceneSpec::default()
    }
}

#[test]
fn default_scene_casts_shadows_in_every_view() {
    let scene = build_scene(&spec()).unwrap();
    for cam in &scene.cameras {
        let b = sunsky::geometry::render_geometry(&scene.mesh, cam);
        let vis = compute_sun_visibility(&scene.mesh, &b, &scene.sun.direction).unwrap();
        assert!(b.hit.and_not(&vis).count() > 100);
    }
}

#[test]
fn layers_satisfy_their_invariants() {
    let scene = build_scene(&spec()).unwrap();
    let gt = render_ground_truth(&scene, 2, 32, 6).unwrap();
    let b = &gt.buffers;
    for p in 0..b.pixel_count() {
        if b.is_hit(p) {
            assert!((b.normal[p].norm() - 1.0).abs() < 1e-4);
            assert!((0.0..=1.0).contains(&gt.shading.s_sun[p]));
            assert!((0.0..=1.0 + 1e-6).contains(&gt.shading.s_sky[p]));
            assert!((0..3).all(|c| gt.albedo.at(p, c) > 0.0 && gt.albedo.at(p, c) <= 1.0));
        } else {
            assert_eq!(gt.image.pixel(p % b.width, p / b.width), &[0.0; 3]);
        }
    }
}

#[test]
fn open_lit_ground_reads_albedo_times_phi_plus_one() {
    let scene = build_scene(&spec()).unwrap();
    let gt = render_ground_truth(&scene, 0, 256, 3).unwrap();
    let sun = scene.sun.direction;
    let mut checked = 0;
    for p in 0..gt.buffers.pixel_count() {
        // up-facing ground, sunlit and fully open to the sky
        if gt.buffers.is_hit(p) && gt.buffers.normal[p].z > 0.999 && gt.shading.s_sky[p] == 1.0 && gt.shading.s_sun[p] > 0.0 {
            checked += 1;
            for c in 0..3 {
                let expect = gt.albedo.at(p, c) as f64 * (scene.phi_true[c] * sun.z + 1.0);
                assert!((gt.image.at(p, c) as f64 - expect).abs() < 1e-5 * expect);
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn rendering_is_deterministic() {
    let scene = build_scene(&spec()).unwrap();
    let a = render_ground_truth(&scene, 1, 32, 10).unwrap();
    let b = render_ground_truth(&scene, 1, 32, 10).unwrap();
    assert_eq!(a.image, b.image);
    assert_eq!(a.shading, b.shading);
}
