use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn volley(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volley"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1514764800")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ingest_prints_summary_and_emits_sets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ingest");
    let season = data_file("synthetic_season.csv");
    let o = volley(&["ingest", "--data", s(&season), "--emit-sets", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("182 matches"), "{stdout}");

    let lines = fs::read_to_string(out.join("sets.jsonl")).unwrap();
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let sets: usize = summary.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(lines.lines().count(), sets);
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let (y, o, r) = (v["y"].as_u64().unwrap(), v["o"].as_u64().unwrap(), v["r"].as_u64().unwrap());
        assert!(y + 2 <= r);
        assert!(o == 0 || y + 2 == r);
        assert_eq!(v["z"].as_u64().unwrap(), y + o);
    }

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "ingest");
    assert_eq!(manifest["created"], 1514764800);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn empty_input_exits_with_no_rows() {
    let dir = tempfile::tempdir().unwrap();
    for contents in ["", "game_id,round,home,away,set_index,home_points,away_points\n"] {
        let path = dir.path().join("empty.csv");
        fs::write(&path, contents).unwrap();
        let o = volley(&["ingest", "--data", s(&path), "--out", s(&dir.path().join("x"))]);
        assert_eq!(o.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&o.stderr).contains("no rows"));
    }
}

#[test]
fn illegal_score_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(
        &path,
        "game_id,round,home,away,set_index,home_points,away_points\n1,1,A,B,1,25,24\n",
    )
    .unwrap();
    let o = volley(&["ingest", "--data", s(&path)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_replications_is_a_usage_error() {
    let season = data_file("synthetic_season.csv");
    let o = volley(&["simulate", "--data", s(&season), "--draws", "nowhere", "--replications", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_chain_reports_rhat_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit");
    let season = data_file("synthetic_season.csv");
    let o = volley(&[
        "fit", "--data", s(&season), "--chains", "1", "--iterations", "200", "--burn-in", "100", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let diag = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(diag.lines().next().unwrap().ends_with("n_eff,Rhat"));
    assert!(diag.lines().skip(1).all(|l| l.ends_with(",NA")), "{diag}");
}

#[test]
fn draws_from_another_league_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("fit");
    let season = data_file("synthetic_season.csv");
    let o = volley(&["fit", "--data", s(&season), "--iterations", "100", "--burn-in", "50", "--out", s(&fit)]);
    assert!(o.status.success());
    let other = dir.path().join("other.csv");
    fs::write(
        &other,
        "game_id,round,home,away,set_index,home_points,away_points\n1,1,X,Y,1,25,20\n1,1,X,Y,2,25,20\n1,1,X,Y,3,25,20\n",
    )
    .unwrap();
    let o = volley(&["simulate", "--data", s(&other), "--draws", s(&fit), "--replications", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_model_is_a_validation_error() {
    let season = data_file("synthetic_season.csv");
    let o = volley(&["fit", "--data", s(&season), "--model", "16"]);
    assert_eq!(o.status.code(), Some(2));
}
