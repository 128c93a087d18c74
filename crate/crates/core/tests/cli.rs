use std::fs;
use std::path::{Path, PathBuf};

use wfm::cli::{main_with_args, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use wfm::data::{load_dataset, Dataset};

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["wfm", "--quiet"];
    full.extend_from_slice(args);
    main_with_args(full)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.json");
    fs::write(
        &p,
        r#"{"mlp_width": 16, "mlp_layers": 2, "batch_size": 8, "embed_dim": 8, "heads": 2, "blocks": 1, "ff_dim": 16}"#,
    )
    .unwrap();
    p
}

fn spiral(dir: &Path) -> PathBuf {
    let p = dir.join("spiral16.jsonl");
    assert_eq!(run(&["dataset", "make-spiral", "--count", "16", "--seed", "7", "--out", s(&p)]), EXIT_OK);
    p
}

#[test]
fn make_spiral_writes_header_plus_records_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let a = spiral(dir.path());
    let b = dir.path().join("again.jsonl");
    assert_eq!(run(&["dataset", "make-spiral", "--count", "16", "--seed", "7", "--out", s(&b)]), EXIT_OK);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 17);
    assert_eq!(text, fs::read_to_string(&b).unwrap());
}

#[test]
fn other_generators_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let moons = d.join("moons.jsonl");
    let shapes = d.join("shapes.jsonl");
    assert_eq!(run(&["dataset", "make-moons", "--count", "10", "--out", s(&moons)]), EXIT_OK);
    assert_eq!(run(&["dataset", "make-sphere", "--count", "5", "--out", s(&d.join("sphere.jsonl"))]), EXIT_OK);
    assert_eq!(
        run(&["dataset", "make-shapes", "--families", "ring,box", "--count", "6", "--min-points", "5",
              "--max-points", "8", "--out", s(&shapes)]),
        EXIT_OK
    );
    assert_eq!(run(&["dataset", "make-shapes", "--families", "star", "--count", "2", "--out", s(&shapes)]), EXIT_USAGE);
    let (tr, te) = (d.join("tr.jsonl"), d.join("te.jsonl"));
    assert_eq!(
        run(&["dataset", "split", "--data", s(&moons), "--test-fraction", "0.4", "--train-out", s(&tr),
              "--test-out", s(&te)]),
        EXIT_OK
    );
    assert_eq!(load_dataset(&tr).unwrap().len(), 6);
    assert_eq!(load_dataset(&te).unwrap().len(), 4);
}

#[test]
fn from_image_gives_one_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("x.pgm");
    fs::write(&img, "P2\n3 2\n255\n0 255 0\n255 0 255\n").unwrap();
    let out = dir.path().join("img.jsonl");
    assert_eq!(run(&["dataset", "from-image", "--image", s(&img), "--label", "4", "--out", s(&out)]), EXIT_OK);
    match load_dataset(&out).unwrap() {
        Dataset::PointClouds(c) => {
            assert_eq!(c.len(), 1);
            assert_eq!(c.items[0].len(), 3);
            assert_eq!(c.labels, Some(vec![4]));
        }
        _ => panic!("expected clouds"),
    }
    assert_eq!(run(&["dataset", "from-image", "--image", s(&dir.path().join("missing.pgm")), "--out", s(&out)]), EXIT_IO);
}

#[test]
fn train_generate_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = spiral(d);
    let cfg = small_config(d);
    let run_a = d.join("run_a");
    let run_b = d.join("run_b");
    for out in [&run_a, &run_b] {
        assert_eq!(
            run(&["train", "--geo", "bw", "--data", s(&data), "--config", s(&cfg), "--steps", "30", "--seed", "1",
                  "--checkpoint-every", "10", "--out", s(out)]),
            EXIT_OK
        );
    }
    for f in ["config.json", "loss.csv", "final.ckpt", "metrics.json", "checkpoints/step-0000020.ckpt"] {
        assert!(run_a.join(f).exists(), "{f} missing");
    }
    let loss = fs::read_to_string(run_a.join("loss.csv")).unwrap();
    assert!(loss.starts_with("step,loss,lr\n"));
    assert_eq!(loss.lines().count(), 31);
    assert_eq!(loss, fs::read_to_string(run_b.join("loss.csv")).unwrap());
    assert_eq!(fs::read(run_a.join("final.ckpt")).unwrap(), fs::read(run_b.join("final.ckpt")).unwrap());

    // the snapshot alone reproduces the run
    let run_c = d.join("run_c");
    assert_eq!(
        run(&["train", "--data", s(&data), "--config", s(&run_a.join("config.json")), "--out", s(&run_c)]),
        EXIT_OK
    );
    assert_eq!(fs::read(run_a.join("final.ckpt")).unwrap(), fs::read(run_c.join("final.ckpt")).unwrap());

    let ckpt = run_a.join("final.ckpt");
    let gen = d.join("gen.jsonl");
    let traj = d.join("traj.jsonl");
    assert_eq!(
        run(&["generate", "--checkpoint", s(&ckpt), "--count", "5", "--steps", "4", "--seed", "3",
              "--trajectory", s(&traj), "--out", s(&gen)]),
        EXIT_OK
    );
    assert_eq!(fs::read_to_string(&traj).unwrap().lines().count(), 5 * 5);
    let gen2 = d.join("gen2.jsonl");
    assert_eq!(
        run(&["generate", "--checkpoint", s(&ckpt), "--count", "5", "--steps", "4", "--seed", "3", "--out", s(&gen2)]),
        EXIT_OK
    );
    assert_eq!(fs::read(&gen).unwrap(), fs::read(&gen2).unwrap());

    let empty = d.join("empty.jsonl");
    assert_eq!(run(&["generate", "--checkpoint", s(&ckpt), "--count", "0", "--out", s(&empty)]), EXIT_OK);
    assert_eq!(load_dataset(&empty).unwrap().len(), 0);
    assert_eq!(run(&["generate", "--checkpoint", s(&ckpt), "--count", "1", "--geo", "pc", "--out", s(&empty)]), EXIT_USAGE);

    let metrics = d.join("metrics.json");
    let svg = d.join("plot.svg");
    assert_eq!(
        run(&["eval", "--generated", s(&gen), "--reference", s(&data), "--out", s(&metrics), "--plot", s(&svg)]),
        EXIT_OK
    );
    assert!(fs::read_to_string(&svg).unwrap().contains("<ellipse"));
    assert_eq!(
        run(&["eval", "--generated", s(&gen), "--reference", s(&data), "--metrics", "emd-1nn", "--out", s(&metrics)]),
        EXIT_USAGE
    );
}

#[test]
fn baseline_flag_selects_method() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = spiral(d);
    let out = d.join("run");
    assert_eq!(
        run(&["train", "--data", s(&data), "--config", s(&small_config(d)), "--steps", "2", "--baseline",
              "frobenius", "--out", s(&out)]),
        EXIT_OK
    );
    let cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["bw_method"], "frobenius");
}

#[test]
fn invalid_combinations_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = spiral(d);
    let out = d.join("run");
    assert_eq!(run(&["train", "--geo", "pc", "--data", s(&data), "--out", s(&out)]), EXIT_USAGE);
    assert_eq!(run(&["train", "--data", s(&data), "--lr", "-1", "--out", s(&out)]), EXIT_USAGE);
    assert_eq!(run(&["train", "--bogus"]), EXIT_USAGE);
    assert_eq!(run(&["train", "--data", s(&d.join("nope.jsonl")), "--out", s(&out)]), EXIT_IO);
}

#[test]
fn diverging_run_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = spiral(d);
    let out = d.join("run");
    assert_eq!(
        run(&["train", "--data", s(&data), "--config", s(&small_config(d)), "--steps", "50", "--lr", "1e200",
              "--out", s(&out)]),
        EXIT_NUMERICAL
    );
    assert!(out.join("checkpoints/last-good.ckpt").exists());
    assert!(!out.join("final.ckpt").exists());
}

#[test]
fn conditional_point_cloud_generation_writes_labels() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("shapes.jsonl");
    assert_eq!(
        run(&["dataset", "make-shapes", "--count", "6", "--min-points", "6", "--max-points", "9", "--out", s(&data)]),
        EXIT_OK
    );
    let out = d.join("run");
    assert_eq!(
        run(&["train", "--data", s(&data), "--config", s(&small_config(d)), "--steps", "2", "--conditional",
              "--out", s(&out)]),
        EXIT_OK
    );
    let gen = d.join("gen.jsonl");
    assert_eq!(
        run(&["generate", "--checkpoint", s(&out.join("final.ckpt")), "--count", "3", "--steps", "2", "--cond", "1",
              "--points", "7", "--out", s(&gen)]),
        EXIT_OK
    );
    match load_dataset(&gen).unwrap() {
        Dataset::PointClouds(c) => {
            assert_eq!(c.labels, Some(vec![1, 1, 1]));
            assert!(c.items.iter().all(|x| x.len() == 7));
        }
        _ => panic!("expected clouds"),
    }
    assert_eq!(
        run(&["generate", "--checkpoint", s(&out.join("final.ckpt")), "--count", "1", "--cond", "9", "--out", s(&gen)]),
        EXIT_USAGE
    );
}

#[test]
fn self_eval_is_zero_and_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = spiral(d);
    let metrics = d.join("m.json");
    assert_eq!(
        run(&["eval", "--generated", s(&data), "--reference", s(&data), "--metrics", "min-w2,bw-1nn", "--seed", "5",
              "--out", s(&metrics)]),
        EXIT_OK
    );
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&metrics).unwrap()).unwrap();
    assert!(report[0]["value"].as_f64().unwrap() < 1e-12);
    assert_eq!(report[1]["value"].as_f64().unwrap(), 0.0);

    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/metrics.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::JSONSchema::compile(&schema).unwrap();
    assert!(validator.is_valid(&report));
    let bad = serde_json::json!([{ "metric": "min-w2", "value": -1.0, "config": {}, "seed": 0 }]);
    assert!(!validator.is_valid(&bad));
}
