use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pointprop::metrics::evaluate;
use pointprop::synthetic::{blob_scene, sample_labels, sample_labels_per_class, two_region_scene};
use pointprop::{io, SegmentationMask, UNKNOWN};
use serde_json::Value;

fn pointprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pointprop"))
        .args(args)
        .output()
        .expect("spawn pointprop")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    image: PathBuf,
    labels: PathBuf,
    truth: PathBuf,
}

fn two_region_fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let scene = two_region_scene(48, 48, 8, 5).unwrap();
    let labels = sample_labels_per_class(&scene.truth, 2, 8, 5).unwrap();
    let fx = Fixture {
        image: root.join("image.png"),
        labels: root.join("labels.csv"),
        truth: root.join("truth.png"),
        root,
        _dir: dir,
    };
    io::save_image(&scene.image, &fx.image).unwrap();
    io::save_point_labels(&labels, &fx.labels).unwrap();
    io::save_mask(&scene.truth, &fx.truth).unwrap();
    fx
}

fn small_cfg(fx: &Fixture) -> PathBuf {
    let p = fx.root.join("run.cfg");
    fs::write(
        &p,
        "# small and quick\nn_superpixels=16\nn_sample_pixels=600\niterations=30\n",
    )
    .unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn segment_writes_mask_and_manifest_with_defaults() {
    let fx = two_region_fixture();
    let out = fx.root.join("m.png");
    let r = pointprop(&[
        "segment",
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--out",
        s(&out),
        "--num-classes",
        "2",
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let m = read_json(&fx.root.join("m.manifest.json"));
    let p = &m["runs"][0]["params"];
    assert_eq!(p["sigma_t"], 0.5534);
    assert_eq!(p["sigma_x"], 0.631);
    assert_eq!(p["lambda"], 1140.0);
    assert_eq!(p["seed"], 0);
    assert_eq!(m["mode"], "nearest");
    assert_eq!(m["runs"][0]["loss_trace"].as_array().unwrap().len(), 101);
    let roles: Vec<&str> = m["inputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["role"].as_str().unwrap())
        .collect();
    assert_eq!(roles, ["image", "labels"]);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(io::load_mask(&out, 2).is_ok());
}

#[test]
fn missing_labels_flag_is_a_usage_error() {
    let fx = two_region_fixture();
    let r = pointprop(&["segment", "--image", s(&fx.image), "--out", "x.png"]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("--labels"));
}

#[test]
fn validation_failures_exit_two() {
    let fx = two_region_fixture();
    let out = fx.root.join("m.png");
    let bad = fx.root.join("bad.csv");
    fs::write(&bad, "row,col,class_id\n1,1,7\n").unwrap();
    let r = pointprop(&[
        "segment",
        "--image",
        s(&fx.image),
        "--labels",
        s(&bad),
        "--out",
        s(&out),
        "--num-classes",
        "2",
    ]);
    assert_eq!(code(&r), 2);
    let stderr = String::from_utf8_lossy(&r.stderr);
    assert_eq!(stderr.trim().lines().count(), 1, "{stderr}");

    let r = pointprop(&[
        "segment",
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--out",
        s(&out),
        "--num-classes",
        "2",
        "--mode",
        "substrate:9",
    ]);
    assert_eq!(code(&r), 2);

    let cfg = fx.root.join("typo.cfg");
    fs::write(&cfg, "lamda=3\n").unwrap();
    let r = pointprop(&[
        "segment",
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--out",
        s(&out),
        "--config",
        s(&cfg),
    ]);
    assert_eq!(code(&r), 2);

    let missing = fx.root.join("nope.png");
    let r = pointprop(&[
        "segment",
        "--image",
        s(&missing),
        "--labels",
        s(&fx.labels),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&r), 2);
}

#[test]
fn divergence_is_a_runtime_failure() {
    let fx = two_region_fixture();
    let cfg = fx.root.join("hot.cfg");
    fs::write(
        &cfg,
        "n_superpixels=16\nlearning_rate=1e200\niterations=5\n",
    )
    .unwrap();
    let r = pointprop(&[
        "segment",
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--out",
        s(&fx.root.join("m.png")),
        "--config",
        s(&cfg),
        "--num-classes",
        "2",
    ]);
    assert_eq!(code(&r), 1, "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn slic_method_routes_through_propagation() {
    let fx = two_region_fixture();
    let out = fx.root.join("slic.png");
    let r = pointprop(&[
        "segment",
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--out",
        s(&out),
        "--num-classes",
        "2",
        "--method",
        "slic",
        "--slic-k",
        "36",
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let m = read_json(&fx.root.join("slic.manifest.json"));
    assert_eq!(m["method"]["kind"], "slic");
    assert_eq!(m["method"]["k"], 36);
    assert!(m["runs"][0]["params"].is_null());
    let pred = io::load_mask(&out, 2).unwrap();
    let truth = io::load_mask(&fx.truth, 2).unwrap();
    assert!(evaluate(&pred, &truth, 2, &BTreeSet::new()).unwrap().pa > 0.9);
}

#[test]
fn evaluate_reports_fixed_keys_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("p.png");
    let truth = dir.path().join("t.png");
    io::save_mask(
        &SegmentationMask::new(2, 2, vec![0, 0, 1, 1]).unwrap(),
        &pred,
    )
    .unwrap();
    io::save_mask(
        &SegmentationMask::new(2, 2, vec![0, 1, 1, 1]).unwrap(),
        &truth,
    )
    .unwrap();
    let json = dir.path().join("r.json");
    let cm = dir.path().join("cm.csv");
    let r = pointprop(&[
        "evaluate",
        "--pred",
        s(&pred),
        "--truth",
        s(&truth),
        "--num-classes",
        "2",
        "--out",
        s(&json),
        "--confusion-csv",
        s(&cm),
    ]);
    assert_eq!(code(&r), 0);
    let text = fs::read_to_string(&json).unwrap();
    let keys = [
        "\"pa\"",
        "\"mpa\"",
        "\"miou\"",
        "\"per_class\"",
        "\"evaluated_pixels\"",
        "\"excluded_pixels\"",
    ];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pa"], 0.75);
    assert_eq!(String::from_utf8_lossy(&r.stdout).trim(), text.trim());
    assert_eq!(
        fs::read_to_string(&cm).unwrap(),
        "truth,pred_0,pred_1\n0,1,0\n1,1,2\n"
    );

    let same = pointprop(&[
        "evaluate",
        "--pred",
        s(&truth),
        "--truth",
        s(&truth),
        "--num-classes",
        "2",
    ]);
    let v: Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(v["pa"], 1.0);

    let zeros = dir.path().join("z.png");
    io::save_mask(&SegmentationMask::filled(2, 2, 0), &zeros).unwrap();
    let r = pointprop(&[
        "evaluate",
        "--pred",
        s(&pred),
        "--truth",
        s(&zeros),
        "--num-classes",
        "2",
        "--ignore",
        "0",
    ]);
    assert_eq!(code(&r), 2);

    let wide = dir.path().join("w.png");
    io::save_mask(&SegmentationMask::filled(2, 3, 0), &wide).unwrap();
    let r = pointprop(&[
        "evaluate",
        "--pred",
        s(&wide),
        "--truth",
        s(&truth),
        "--num-classes",
        "2",
    ]);
    assert_eq!(code(&r), 2);
}

#[test]
fn sweep_rows_match_segment_then_evaluate() {
    let fx = two_region_fixture();
    let cfg = small_cfg(&fx);
    let csv = fx.root.join("sweep.csv");
    let r = pointprop(&[
        "sweep",
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--truth",
        s(&fx.truth),
        "--config",
        s(&cfg),
        "--num-classes",
        "2",
        "--param",
        "lambda",
        "--values",
        "0,1,10,100,1140",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "value,pa,mpa,miou,final_loss,seconds");
    assert_eq!(lines.len(), 6);

    let cfg10 = fx.root.join("l10.cfg");
    fs::write(&cfg10, fs::read_to_string(&cfg).unwrap() + "lambda=10\n").unwrap();
    let out = fx.root.join("l10.png");
    let r = pointprop(&[
        "segment",
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--config",
        s(&cfg10),
        "--num-classes",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&r), 0);
    let e = pointprop(&[
        "evaluate",
        "--pred",
        s(&out),
        "--truth",
        s(&fx.truth),
        "--num-classes",
        "2",
    ]);
    let v: Value = serde_json::from_slice(&e.stdout).unwrap();
    let row: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(row[0], "10");
    assert_eq!(row[1].parse::<f64>().unwrap(), v["pa"].as_f64().unwrap());
    assert_eq!(row[3].parse::<f64>().unwrap(), v["miou"].as_f64().unwrap());
    let m = read_json(&fx.root.join("l10.manifest.json"));
    let trace = m["runs"][0]["loss_trace"].as_array().unwrap();
    assert_eq!(
        row[4].parse::<f64>().unwrap(),
        trace.last().unwrap()["total"].as_f64().unwrap()
    );

    let r = pointprop(&[
        "sweep",
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--truth",
        s(&fx.truth),
        "--param",
        "gamma",
        "--values",
        "1",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&r), 2);
}

#[test]
fn ensemble_presets_and_counts() {
    let fx = two_region_fixture();
    let cfg = fs::read_to_string(small_cfg(&fx)).unwrap();
    let two = fx.root.join("two.cfg");
    fs::write(&two, format!("{cfg}---\n{cfg}")).unwrap();
    let out = fx.root.join("e.png");
    let base = [
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--num-classes",
        "2",
        "--out",
        s(&out),
    ];
    let mut args = vec!["ensemble", "--presets", s(&two)];
    args.extend(base);
    assert_eq!(code(&pointprop(&args)), 2);
    args.push("--allow-any-count");
    assert_eq!(code(&pointprop(&args)), 0);

    let run_cfg = fx.root.join("run.cfg");
    let mut args = vec![
        "ensemble",
        "--standard-presets",
        "--keep-members",
        "--config",
        s(&run_cfg),
    ];
    args.extend(base);
    let r = pointprop(&args);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let m = read_json(&fx.root.join("e.manifest.json"));
    let runs = m["runs"].as_array().unwrap();
    let triples: Vec<(f64, f64, f64, u64)> = runs
        .iter()
        .map(|r| {
            let p = &r["params"];
            (
                p["sigma_t"].as_f64().unwrap(),
                p["sigma_x"].as_f64().unwrap(),
                p["lambda"].as_f64().unwrap(),
                p["seed"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        triples,
        [
            (0.5539, 0.5597, 1500.0, 0),
            (0.846, 0.5309, 1590.0, 1),
            (0.553, 0.631, 1140.0, 2)
        ]
    );
    for (i, run) in runs.iter().enumerate() {
        assert!(fx.root.join(format!("e.member{i}.png")).exists());
        assert!(run["mask"]["sha256"].is_string());
    }

    let mut args = vec!["ensemble"];
    args.extend(base);
    assert_eq!(code(&pointprop(&args)), 2);
}

#[test]
fn directory_mode_pairs_files_and_runs_in_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    let labels = dir.path().join("labels");
    fs::create_dir_all(&images).unwrap();
    fs::create_dir_all(&labels).unwrap();
    for i in 0..3u64 {
        let scene = blob_scene(32, 32, 3, 6, 6, i).unwrap();
        let l = sample_labels(&scene.truth, 3, 20, i).unwrap();
        io::save_image(&scene.image, images.join(format!("q{i}.png"))).unwrap();
        io::save_point_labels(&l, labels.join(format!("q{i}.csv"))).unwrap();
    }
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "n_superpixels=9\nn_sample_pixels=300\niterations=20\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = pointprop(&[
        "segment",
        "--image",
        s(&images),
        "--labels",
        s(&labels),
        "--out",
        s(&out),
        "--config",
        s(&cfg),
        "--num-classes",
        "3",
        "--jobs",
        "3",
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    for i in 0..3 {
        assert!(out.join(format!("q{i}.png")).exists());
        assert!(out.join(format!("q{i}.manifest.json")).exists());
    }

    // Same result as a single-image run.
    let single = dir.path().join("single.png");
    let r = pointprop(&[
        "segment",
        "--image",
        s(&images.join("q1.png")),
        "--labels",
        s(&labels.join("q1.csv")),
        "--out",
        s(&single),
        "--config",
        s(&cfg),
        "--num-classes",
        "3",
    ]);
    assert_eq!(code(&r), 0);
    assert_eq!(
        fs::read(&single).unwrap(),
        fs::read(out.join("q1.png")).unwrap()
    );

    fs::remove_file(labels.join("q2.csv")).unwrap();
    let r = pointprop(&[
        "segment",
        "--image",
        s(&images),
        "--labels",
        s(&labels),
        "--out",
        s(&out),
        "--config",
        s(&cfg),
        "--num-classes",
        "3",
    ]);
    assert_eq!(code(&r), 2);
}

#[test]
fn visualize_colors_and_palette_checks() {
    let dir = tempfile::tempdir().unwrap();
    let mask = dir.path().join("m.png");
    let mut m = SegmentationMask::filled(4, 4, 1);
    m.set(0, 0, UNKNOWN);
    io::save_mask(&m, &mask).unwrap();
    let palette = dir.path().join("p.csv");
    fs::write(
        &palette,
        "class_id,r,g,b,name\n0,0,0,0,sand\n1,10,200,30,algae\n",
    )
    .unwrap();
    let out = dir.path().join("v.png");
    let r = pointprop(&[
        "visualize",
        "--mask",
        s(&mask),
        "--palette",
        s(&palette),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let img = io::load_image(&out).unwrap();
    assert_eq!(img.get(0, 0), [255, 0, 255]);
    assert!((1..16).all(|p| img.pixels()[p] == [10, 200, 30]));

    let short = dir.path().join("short.csv");
    fs::write(&short, "class_id,r,g,b,name\n0,0,0,0,sand\n").unwrap();
    let r = pointprop(&[
        "visualize",
        "--mask",
        s(&mask),
        "--palette",
        s(&short),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&r), 2);

    let r = pointprop(&["visualize", "--mask", s(&mask), "--out", s(&out)]);
    assert_eq!(code(&r), 0);
}

#[test]
fn visualize_draws_boundaries_over_image() {
    let fx = two_region_fixture();
    let mask = fx.root.join("m.png");
    let assign = fx.root.join("a.png");
    let cfg = small_cfg(&fx);
    let r = pointprop(&[
        "segment",
        "--image",
        s(&fx.image),
        "--labels",
        s(&fx.labels),
        "--out",
        s(&mask),
        "--config",
        s(&cfg),
        "--num-classes",
        "2",
        "--assignment-out",
        s(&assign),
    ]);
    assert_eq!(code(&r), 0);
    let out = fx.root.join("v.png");
    let r = pointprop(&[
        "visualize",
        "--mask",
        s(&mask),
        "--image",
        s(&fx.image),
        "--boundaries",
        s(&assign),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let img = io::load_image(&out).unwrap();
    let map = io::load_superpixel_map(&assign).unwrap();
    let edges = map.boundary_pixels();
    assert!(edges.iter().any(|&b| b));
    for (p, &edge) in edges.iter().enumerate() {
        if edge {
            assert_eq!(img.pixels()[p], [255, 255, 255]);
        }
    }
}

#[test]
fn synth_writes_a_usable_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let r = pointprop(&[
        "synth",
        "--kind",
        "blobs",
        "--classes",
        "3",
        "--labels",
        "30",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(code(&r), 0);
    let image = io::load_image(dir.path().join("image.png")).unwrap();
    let labels = io::load_point_labels(dir.path().join("labels.csv"), &image, 3).unwrap();
    assert_eq!(labels.labels.len(), 30);
    assert!(io::load_mask(dir.path().join("truth.png"), 3).is_ok());
}
