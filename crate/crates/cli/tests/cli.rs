mod common;

use std::path::Path;

use common::{bin, fixture, read_json, small_spec};
use sunsky::imagecore::{read_linear_exr, read_mask_png, write_linear_exr};
use sunsky::LinearImage;

fn decompose(scene: &Path, out: &Path, extra: &[&str]) -> std::process::Output {
    bin()
        .args(["decompose", "--config"])
        .arg(scene.join("decompose.toml"))
        .arg("--output")
        .arg(out)
        .args(["--sky-samples", "32"])
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn synth_fixture_is_complete_and_decomposes() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = fixture(tmp.path(), &small_spec(), 32);
    for name in ["scene.obj", "manifest.txt", "scene.toml", "decompose.toml", "truth.json"] {
        assert!(scene.join(name).is_file(), "{name}");
    }
    for cam in ["cam0", "cam1", "cam2"] {
        for suffix in [".exr", "_albedo.exr", "_sun_shading.exr", "_sky_shading.exr", "_depth.exr", "_normal.exr"] {
            let img = read_linear_exr(scene.join(format!("{cam}{suffix}"))).unwrap();
            assert_eq!((img.width(), img.height()), (160, 107));
        }
        read_mask_png(scene.join(format!("{cam}_sun_visibility.png"))).unwrap();
        read_mask_png(scene.join(format!("{cam}_hit.png"))).unwrap();
    }

    let out = tmp.path().join("out");
    let run = decompose(&scene, &out, &["--dump-pairs"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_json(&out.join("run_report.json"));
    assert_eq!(report["succeeded"], 3);
    for (i, entry) in report["images"].as_array().unwrap().iter().enumerate() {
        assert_eq!(entry["id"], format!("cam{i}"));
        assert_eq!(entry["status"], "ok");
        let phi: Vec<f64> = serde_json::from_value(entry["phi"].clone()).unwrap();
        for (p, t) in phi.iter().zip([6.0, 5.0, 4.0]) {
            assert!((p - t).abs() / t < 0.02, "{phi:?}");
        }
    }
    for suffix in ["_albedo.exr", "_sun_shading.exr", "_sky_shading.exr", "_depth.exr", "_normal.exr", "_confidence.png", "_phi.json", "_pairs.csv"] {
        assert!(out.join(format!("cam1{suffix}")).is_file(), "{suffix}");
    }
    let record = read_json(&out.join("cam0_phi.json"));
    assert_eq!(record["pooled"], false);
    assert_eq!(record["channels"].as_array().unwrap().len(), 3);
    let echoed = std::fs::read_to_string(out.join("effective_config.toml")).unwrap();
    assert!(echoed.contains("sky_samples = 32"), "flag should override the file:\n{echoed}");
}

#[test]
fn missing_image_fails_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = fixture(tmp.path(), &small_spec(), 16);
    std::fs::remove_file(scene.join("cam1.exr")).unwrap();
    let out = tmp.path().join("out");
    let run = decompose(&scene, &out, &[]);
    assert_eq!(run.status.code(), Some(1));
    let report = read_json(&out.join("run_report.json"));
    let images = report["images"].as_array().unwrap();
    assert_eq!(images.len(), 3);
    assert_eq!(images[0]["status"], "ok");
    assert_eq!(images[1]["status"], "failed");
    assert!(images[1]["error"].as_str().unwrap().contains("cam1.exr"));
    assert_eq!(images[2]["status"], "ok");
    assert!(out.join("cam2_albedo.exr").is_file());
    assert!(!out.join("cam1_albedo.exr").exists());
}

#[test]
fn per_flight_pooling_covers_an_image_without_pairs() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = fixture(tmp.path(), &small_spec(), 16);
    // Tag every record with one flight, and make cam2 shadow-free by
    // pointing its brightness floor out of reach.
    let manifest = std::fs::read_to_string(scene.join("manifest.txt")).unwrap();
    let tagged: Vec<String> = manifest
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 0 { l.to_string() } else { format!("{l} f1") })
        .collect();
    std::fs::write(scene.join("manifest.txt"), tagged.join("\n")).unwrap();
    let blank = LinearImage::filled(160, 107, 3, 0.0).unwrap();
    write_linear_exr(&blank, scene.join("cam2.exr")).unwrap();

    let out = tmp.path().join("pooled");
    let run = decompose(&scene, &out, &["--pooling", "per-flight"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let record = read_json(&out.join("cam2_phi.json"));
    assert_eq!(record["pooled"], true);
    assert_eq!(record["sample_count"], 0);
    assert_eq!(record["flight"], "f1");

    let out = tmp.path().join("single");
    let run = decompose(&scene, &out, &[]);
    assert_eq!(run.status.code(), Some(1));
    let report = read_json(&out.join("run_report.json"));
    assert_eq!(report["images"][2]["status"], "failed");
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = bin()
        .args(["decompose", "--manifest", "nope.txt", "--mesh", "nope.obj", "--output"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let conflicting = bin()
        .args(["decompose", "--sun-azimuth", "10", "--sun-elevation", "20", "--ephemeris"])
        .output()
        .unwrap();
    assert_eq!(conflicting.status.code(), Some(2));
    let half = bin().args(["decompose", "--sun-azimuth", "10"]).output().unwrap();
    assert_eq!(half.status.code(), Some(2));
    let bad_config = tmp.path().join("bad.toml");
    std::fs::write(&bad_config, "[sky]\nmode = \"measured\"\n").unwrap();
    let run = bin().args(["decompose", "--config"]).arg(&bad_config).output().unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(bin().arg("--help").output().unwrap().status.success());
}

fn gradient(w: usize, h: usize, k: f32) -> LinearImage {
    LinearImage::from_fn(w, h, 3, |x, y, c| k * (0.1 + 0.3 * ((x + 2 * y + c) % 7) as f32 / 7.0)).unwrap()
}

#[test]
fn changedetect_on_identical_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let (r, s) = (tmp.path().join("ref"), tmp.path().join("src"));
    std::fs::create_dir_all(&r).unwrap();
    std::fs::create_dir_all(&s).unwrap();
    for (i, k) in [1.0, 1.5].iter().enumerate() {
        write_linear_exr(&gradient(40, 30, *k), r.join(format!("f{i}.exr"))).unwrap();
        write_linear_exr(&gradient(40, 30, *k), s.join(format!("f{i}.exr"))).unwrap();
    }
    let out = tmp.path().join("out");
    let run = bin()
        .args(["changedetect", "--reference"])
        .arg(&r)
        .arg("--sources")
        .arg(&s)
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    for i in 0..2 {
        assert!(read_mask_png(out.join(format!("f{i}_change.png"))).unwrap().is_empty());
    }
    let csv = std::fs::read_to_string(out.join("changes.csv")).unwrap();
    assert_eq!(csv, "frame,changed_pixels,blob_count\nf0,0,0\nf1,0,0\n");

    // single reference file against a changed frame
    let mut changed = gradient(40, 30, 1.0).into_data();
    for y in 5..20 {
        for x in 5..20 {
            for c in 0..3 {
                changed[(y * 40 + x) * 3 + c] = 0.9;
            }
        }
    }
    write_linear_exr(&LinearImage::new(40, 30, 3, changed).unwrap(), s.join("f1.exr")).unwrap();
    let run = bin()
        .args(["changedetect", "--reference"])
        .arg(r.join("f0.exr"))
        .arg("--sources")
        .arg(&s)
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    let mask = read_mask_png(out.join("f1_change.png")).unwrap();
    assert!(mask.count() > 150 && mask.blob_count() == 1);
}

#[test]
fn metrics_on_ground_truth_itself() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("imgs");
    std::fs::create_dir_all(&d).unwrap();
    write_linear_exr(&gradient(20, 16, 1.0), d.join("a.exr")).unwrap();
    write_linear_exr(&gradient(24, 12, 2.0), d.join("b.exr")).unwrap();
    let csv_path = tmp.path().join("m.csv");
    let run = bin()
        .args(["metrics", "--prediction"])
        .arg(&d)
        .arg("--truth")
        .arg(&d)
        .arg("--output")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "image,psnr,ssim,pixels");
    assert_eq!(lines[1], "a,inf,1.000000,320");
    assert_eq!(lines[2], "b,inf,1.000000,288");
    assert_eq!(lines[3], "mean,inf,1.000000,608");
}

#[test]
fn skymerge_reconstructs_a_synthetic_sky() {
    use sunsky::geometry::Vec3;
    use sunsky::illum::{render_fisheye, FisheyeCalibration};

    let tmp = tempfile::tempdir().unwrap();
    let size = 256;
    let focal = (size as f64 / 2.0 - 2.0) / std::f64::consts::FRAC_PI_2;
    let calib = FisheyeCalibration {
        focal,
        center: (size as f64 / 2.0, size as f64 / 2.0),
        rotation: sunsky::geometry::Mat3::identity(),
    };
    let sky = |d: &Vec3| 0.2 + 0.6 * d.z + 3.0 * d.dot(&Vec3::new(0.5, 0.5, 0.707)).max(0.0).powi(40);
    let radiance = render_fisheye(&calib, size, size, sky).unwrap();
    let times: Vec<f64> = (0..11).map(|k| 0.5 * 2f64.powf(0.6 * k as f64)).collect();
    let mut csv = String::from("path,exposure_s\n");
    for (k, t) in times.iter().enumerate() {
        let frame = radiance.map(|v| (v as f64 * t).min(1.0) as f32).unwrap();
        write_linear_exr(&frame, tmp.path().join(format!("e{k}.exr"))).unwrap();
        csv.push_str(&format!("e{k}.exr,{t}\n"));
    }
    std::fs::write(tmp.path().join("stack.csv"), &csv).unwrap();
    std::fs::write(
        tmp.path().join("calib.toml"),
        format!("focal = {focal:?}\ncenter = [{:?}, {:?}]\n", size as f64 / 2.0, size as f64 / 2.0),
    )
    .unwrap();
    let dome_path = tmp.path().join("dome.exr");
    let run = bin()
        .current_dir(tmp.path())
        .args(["skymerge", "--stack", "stack.csv", "--calibration", "calib.toml", "--width", "64", "--height", "32", "--output"])
        .arg(&dome_path)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let dome = read_linear_exr(&dome_path).unwrap();
    assert_eq!((dome.width(), dome.height(), dome.channels()), (64, 32, 1));
    // zenith row holds the sky model within interpolation error
    let z = dome.get(0, 0, 0) as f64;
    assert!((z - (0.2 + 0.6 * (1.0 - (std::f64::consts::PI / 64.0).powi(2) / 2.0))).abs() < 0.02, "{z}");
    assert_eq!(dome.get(5, 20, 0), 0.0);

    std::fs::write(tmp.path().join("one.csv"), "path,exposure_s\ne0.exr,0.5\n").unwrap();
    let single = bin()
        .current_dir(tmp.path())
        .args(["skymerge", "--stack", "one.csv", "--calibration", "calib.toml", "--output", "x.exr"])
        .output()
        .unwrap();
    assert_ne!(single.status.code(), Some(0));
}
