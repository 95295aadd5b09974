use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sve_core::metrics::{q_score, quantile, top_k_delta};
use sve_core::sensor_sim::{read_pfm, scene_peak};
use sve_core::{LevelSet, SensorConfig};
use tempfile::TempDir;

fn sve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sve")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = sve(args);
    assert!(
        out.status.success(),
        "sve {args:?} failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    sve(args).status.code().expect("exit code")
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

/// Four levels, 35 pattern classes: keeps exhaustive runs short.
fn small_levels(dir: &TempDir) -> PathBuf {
    let path = p(dir, "levels.json");
    fs::write(
        &path,
        r#"[{"tau": 0.0075, "alpha": 1}, {"tau": 0.03, "alpha": 1},
            {"tau": 0.0075, "alpha": 80}, {"tau": 0.03, "alpha": 80}]"#,
    )
    .unwrap();
    path
}

#[test]
fn synth_writes_scene_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "flat.pfm");
    ok(&["synth", "--kind", "flat", "--size", "64", "--level", "42", "--out", s(&out)]);
    let map = read_pfm(&out).unwrap();
    assert_eq!((map.width(), map.height()), (64, 64));
    assert!(map.values().iter().all(|&v| v == 42.0));
    let side = json(&out.with_extension("json"));
    assert_eq!(side["kind"], "flat");
    assert_eq!(side["seed"], 0);
}

#[test]
fn composite_scene_fits_the_adc_range() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "hdr.pfm");
    ok(&["synth", "--kind", "hdr-composite", "--size", "512", "--seed", "4", "--out", s(&out)]);
    let map = read_pfm(&out).unwrap();
    let p99 = quantile(map.values(), 0.99);
    let peak = scene_peak(&SensorConfig::default(), &LevelSet::default_levels());
    // f32 storage
    assert!(p99 <= peak * (1.0 + 1e-6), "{p99} vs {peak}");
    assert!(p99 >= 0.5 * peak, "{p99} vs {peak}");
}

#[test]
fn failure_classes_have_distinct_exit_codes() {
    let dir = TempDir::new().unwrap();
    let scene = p(&dir, "scene.pfm");
    ok(&["synth", "--kind", "flat", "--size", "32", "--out", s(&scene)]);

    assert_eq!(code(&["synth", "--kind", "flat", "--size", "32", "--bogus"]), 2);
    let broken = p(&dir, "broken.json");
    fs::write(&broken, "{ not json").unwrap();
    assert_eq!(
        code(&["pilot", "--scene", s(&scene), "--config", s(&broken), "--out", s(&p(&dir, "h.json"))]),
        2
    );

    let missing = p(&dir, "missing.pfm");
    assert_eq!(code(&["pilot", "--scene", s(&missing), "--out", s(&p(&dir, "h.json"))]), 3);

    assert_eq!(code(&["synth", "--kind", "flat", "--size", "33x32", "--out", s(&p(&dir, "odd.pfm"))]), 4);
    assert_eq!(
        code(&["capture", "--scene", s(&scene), "--pattern", "0,1,2,9", "--out", s(&p(&dir, "c.pfm"))]),
        4
    );

    assert_eq!(code(&["eval", "--synthetic", "1", "--size", "512", "--out", s(&p(&dir, "eval"))]), 5);
}

#[test]
fn capture_then_reconstruct_with_metrics() {
    let dir = TempDir::new().unwrap();
    let scene = p(&dir, "scene.pfm");
    let capture = p(&dir, "capture.pfm");
    ok(&["synth", "--kind", "hdr-composite", "--size", "64", "--seed", "2", "--out", s(&scene)]);
    ok(&["capture", "--scene", s(&scene), "--pattern", "0,3,5,8", "--seed", "5", "--out", s(&capture)]);
    let side = json(&capture.with_extension("json"));
    assert_eq!(side["run"]["seed"], 5);

    for method in ["lpa", "admm-tv"] {
        let rec = p(&dir, &format!("{method}.pfm"));
        let metrics = p(&dir, &format!("{method}.json"));
        let png = p(&dir, &format!("{method}.png"));
        ok(&[
            "reconstruct",
            "--capture",
            s(&capture),
            "--method",
            method,
            "--reference",
            s(&scene),
            "--metrics",
            s(&metrics),
            "--png",
            s(&png),
            "--out",
            s(&rec),
        ]);
        let m = json(&metrics);
        assert!(m["mu_psnr"].as_f64().unwrap() > 20.0, "{method}: {m}");
        assert!(m["mu_ssim"].as_f64().unwrap() <= 1.0);
        if method == "admm-tv" {
            assert!(m["iterations"].as_u64().unwrap() <= 30);
        }
        assert_eq!(read_pfm(&rec).unwrap().width(), 64);
        assert!(fs::metadata(&png).unwrap().len() > 0);
    }
}

#[test]
fn pipeline_ranks_all_classes_deterministically() {
    let dir = TempDir::new().unwrap();
    let scene = p(&dir, "scene.pfm");
    ok(&["synth", "--kind", "hdr-composite", "--size", "64", "--seed", "8", "--out", s(&scene)]);
    let (a, b) = (p(&dir, "a"), p(&dir, "b"));
    ok(&["--workers", "1", "pipeline", "--scene", s(&scene), "--seed", "3", "--out", s(&a)]);
    ok(&["--workers", "3", "pipeline", "--scene", s(&scene), "--seed", "3", "--out", s(&b)]);

    let rows = csv_rows(&a.join("rank.csv"));
    assert_eq!(rows.len(), 495);
    assert!(rows.iter().all(|r| &r[0] == "3"));
    for name in ["rank.csv", "reconstruction.pfm", "metrics.json", "histogram.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    for name in ["capture.pfm", "capture.json", "reconstruction.png", "manifest.json"] {
        assert!(a.join(name).exists(), "{name}");
    }

    // the stand-alone commands reproduce the pipeline's ranking
    let hist = p(&dir, "hist.json");
    let rank = p(&dir, "rank.csv");
    ok(&["pilot", "--scene", s(&scene), "--seed", "3", "--out", s(&hist)]);
    ok(&["rank", "--histogram", s(&hist), "--seed", "3", "--out", s(&rank)]);
    assert_eq!(fs::read(&rank).unwrap(), fs::read(a.join("rank.csv")).unwrap());
}

#[test]
fn pipeline_reports_the_failing_stage() {
    let dir = TempDir::new().unwrap();
    let out = sve(&["pipeline", "--scene", s(&p(&dir, "none.pfm")), "--out", s(&p(&dir, "o"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage 'load'"));
}

#[test]
fn half_bright_half_dark_separates_estimators() {
    let dir = TempDir::new().unwrap();
    let scene = p(&dir, "half.pfm");
    ok(&[
        "synth",
        "--kind",
        "two-level",
        "--size",
        "64",
        "--left",
        "20",
        "--right",
        "200000",
        "--out",
        s(&scene),
    ]);
    let mut top = Vec::new();
    for estimator in ["sve", "snr"] {
        let out = p(&dir, estimator);
        ok(&["pipeline", "--scene", s(&scene), "--estimator", estimator, "--out", s(&out)]);
        let rows = csv_rows(&out.join("rank.csv"));
        top.push(rows[0][4].to_string());
        let m = json(&out.join("metrics.json"));
        eprintln!("{estimator}: top-1 {} at {:.2} dB", &rows[0][4], m["mu_psnr"].as_f64().unwrap());
    }
    assert_ne!(top[0], top[1]);
}

#[test]
fn eval_writes_tables_and_a_perfect_ranking_scores_zero() {
    let dir = TempDir::new().unwrap();
    let levels = small_levels(&dir);
    let (a, b) = (p(&dir, "a"), p(&dir, "b"));
    let args = |out: &Path, workers: &str| {
        vec![
            "--workers".to_string(),
            workers.into(),
            "eval".into(),
            "--synthetic".into(),
            "2".into(),
            "--size".into(),
            "32".into(),
            "--levels".into(),
            s(&levels).into(),
            "--seed".into(),
            "6".into(),
            "--out".into(),
            s(out).into(),
        ]
    };
    let run = |v: Vec<String>| ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    run(args(&a, "1"));
    run(args(&b, "4"));
    for name in ["scores.csv", "scatter.csv", "stats.csv", "correlations.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert!(a.join("manifest.json").exists());

    let corr = csv_rows(&a.join("correlations.csv"));
    assert_eq!(corr.len(), 2 * 2);
    assert!(corr.iter().all(|r| &r[5] == "35"));
    let stats = csv_rows(&a.join("stats.csv"));
    assert_eq!(stats.len(), 4 * 2 * 2);

    // rank by the scores themselves: the oracle's own ordering
    let scores = csv_rows(&a.join("scores.csv"));
    assert_eq!(scores.len(), 2 * 35 * 2);
    let mut oracle = Vec::new();
    let mut ranked = Vec::new();
    for scene in ["0", "1"] {
        let mut col: Vec<f64> = scores
            .iter()
            .filter(|r| &r[1] == scene && &r[4] == "lpa")
            .map(|r| r[5].parse().unwrap())
            .collect();
        col.sort_by(|x, y| y.total_cmp(x));
        oracle.push(col[0]);
        ranked.push(col);
    }
    let top1: Vec<f64> = ranked.iter().map(|r| r[0]).collect();
    assert_eq!(top_k_delta(&oracle, &ranked, 1).unwrap(), 0.0);
    assert_eq!(q_score(&oracle, &top1, 0.01).unwrap(), 0.0);
}

#[test]
fn bench_has_one_row_per_estimator_and_resolution() {
    let dir = TempDir::new().unwrap();
    let mut counts = Vec::new();
    for run in ["a.csv", "b.csv"] {
        let out = p(&dir, run);
        ok(&["bench", "--resolutions", "32,64x32", "--repetitions", "2", "--seed", "1", "--out", s(&out)]);
        let rows = csv_rows(&out);
        assert_eq!(rows.len(), 4);
        counts.push(
            rows.iter().map(|r| (r[1].to_string(), r[2].to_string(), r[4].to_string())).collect::<Vec<_>>(),
        );
    }
    assert_eq!(counts[0], counts[1]);
    assert!(counts[0].iter().all(|c| c.2 == "495"));
}
