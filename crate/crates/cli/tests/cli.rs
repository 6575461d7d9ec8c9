use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn wg(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wg"))
        .args(args)
        .env("WG_CACHE_DIR", cache)
        .output()
        .expect("spawn wg")
}

fn tmp(tag: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("wg-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn points_example() {
    let d = tmp("points");
    let v = json(&wg(&["points", "--k", "2", "--n", "5", "--lambda", "77"], &d));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "points");
    assert_eq!(v["summary"]["r"], 10);
    let big_r = v["summary"]["R"].as_f64().unwrap();
    let want = 3f64.ln().powi(3) * 5f64.ln().powi(2);
    assert!((big_r - 10.0 * want).abs() < 1e-9, "{big_r}");
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    assert_eq!(v["config"]["cmd"]["points"]["lambda"], 77);
}

#[test]
fn gsum_example() {
    let d = tmp("gsum");
    let v = json(&wg(&["gsum", "--a", "1", "--q", "2", "--b", "1", "--r", "4", "--k", "2"], &d));
    let z = &v["rows"][0][5];
    assert!(z["re"].as_f64().unwrap().abs() < 1e-12);
    assert!(z["im"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn fourier_origin_is_one() {
    let d = tmp("fourier");
    let v = json(&wg(&["fourier", "--k", "2", "--n", "5", "--lambda", "77", "--xi", "0,0,0,0,0"], &d));
    let z = &v["rows"][0][2];
    assert_eq!(z["re"].as_f64().unwrap(), 1.0);
    assert_eq!(z["im"].as_f64().unwrap(), 0.0);
}

#[test]
fn exit_codes() {
    let d = tmp("exit");
    // unknown flag
    assert_eq!(wg(&["points", "--bogus"], &d).status.code(), Some(2));
    // k = 1 is rejected by the library as an input error
    assert_eq!(wg(&["points", "--k", "1", "--n", "5", "--lambda", "77"], &d).status.code(), Some(2));
    // empty measure: transform undefined
    let o = wg(&["fourier", "--k", "2", "--n", "5", "--lambda", "53", "--xi", "0,0,0,0,0"], &d);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(wg(&["--help"], &d).status.code(), Some(0));
}

#[test]
fn csv_matches_json() {
    let d = tmp("csv");
    let args = ["singular", "--k", "2", "--n", "5", "--lambda", "77", "--qsing", "30"];
    let j = json(&wg(&args, &d));
    let mut a: Vec<&str> = args.to_vec();
    a.extend(["--format", "csv"]);
    let o = wg(&a, &d);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# schema: 1"));
    assert_eq!(lines[4], "q,term.re,term.im,partial.re,partial.im");
    let rows = j["rows"].as_array().unwrap();
    assert_eq!(lines.len() - 5, rows.len());
    for (line, row) in lines[5..].iter().zip(rows) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[0], row[0].as_f64().unwrap());
        assert_eq!(cells[1], row[1]["re"].as_f64().unwrap());
        assert_eq!(cells[2], row[1]["im"].as_f64().unwrap());
        assert_eq!(cells[3], row[2]["re"].as_f64().unwrap());
        assert_eq!(cells[4], row[2]["im"].as_f64().unwrap());
    }
}

#[test]
fn cached_rerun_is_identical() {
    let d = tmp("cache");
    let args = ["points", "--k", "3", "--n", "4", "--lambda", "5000"];
    let first = wg(&args, &d);
    assert!(first.status.success());
    assert!(std::fs::read_dir(&d).unwrap().count() > 0, "cache not populated");
    let second = wg(&args, &d);
    assert_eq!(first.stdout, second.stdout);
    let o = wg(&["points", "--k", "3", "--n", "4", "--lambda", "5000", "--no-cache"], &d);
    let a = json(&first);
    let b = json(&o);
    assert_eq!(a["rows"], b["rows"]);
    assert_eq!(a["summary"], b["summary"]);
}

#[test]
fn plot_and_output_files() {
    let d = tmp("plot");
    let svg = d.join("h.svg");
    let out = d.join("h.json");
    let o = wg(
        &[
            "hua", "--lo", "2000", "--hi", "4000", "--samples", "4", "--qsing", "30",
            "--plot", svg.to_str().unwrap(), "--output", out.to_str().unwrap(),
        ],
        &d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn meanvalue_small() {
    let d = tmp("mv");
    let v = json(&wg(&["meanvalue", "--big-n", "3", "--s", "1", "--k", "2"], &d));
    // s = 1: only the diagonal solutions
    assert_eq!(v["rows"][0][3], 3);
}
