use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use ridgekit_explorer::{api, Session};

fn ridgekit(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ridgekit")).current_dir(cwd).args(args).output().unwrap()
}

fn ok(cwd: &Path, args: &[&str]) -> String {
    let out = ridgekit(cwd, args);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{args:?}: {stdout}{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.starts_with("status=ok"), "{stdout}");
    stdout
}

fn fail(cwd: &Path, args: &[&str], code: i32) -> String {
    let out = ridgekit(cwd, args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("status=error"), "{stdout}");
    stdout
}

#[test]
fn fit_quad_writes_a_model_and_angle_is_zero_on_itself() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "exp", "--samples", "100", "--seed", "1", "--out", "doe.csv"]);
    ok(d, &["fit", "quad", "--in", "doe.csv", "--out", "model.json", "--subspace-out", "U1.csv"]);
    assert!(d.join("model.json").exists());
    let line = ok(d, &["angle", "--a", "U1.csv", "--b", "U1.csv"]);
    assert!(line.contains(" phi=0.0"), "{line}");
}

#[test]
fn varpro_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "ridge", "--dim", "5", "--samples", "120", "--seed", "2", "--out", "doe.csv"]);
    let a = ok(d, &["fit", "varpro", "--in", "doe.csv", "--n", "1", "--degree", "3", "--seed", "7", "--out", "a.json"]);
    let b = ok(d, &["fit", "varpro", "--in", "doe.csv", "--n", "1", "--degree", "3", "--seed", "7", "--out", "b.json"]);
    assert_eq!(a.replace("a.json", "b.json"), b);
    assert_eq!(std::fs::read(d.join("a.json")).unwrap(), std::fs::read(d.join("b.json")).unwrap());
}

#[test]
fn load_errors_name_the_line_or_column() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("nan.csv"), "x1,x2,f\n0.1,0.2,1\n# comment\n0.3,NaN,2\n").unwrap();
    let out = fail(d, &["fit", "phd", "--in", "nan.csv", "--out", "m.json"], 1);
    assert!(out.contains("error=parse") && out.contains("line 4"), "{out}");

    std::fs::write(d.join("wide.csv"), "x1,x2,f\n0.1,0.2,1\n0.3,1.5,2\n").unwrap();
    let out = fail(d, &["project", "--in", "wide.csv", "--normalized", "--subspace", "u.csv", "--out", "p.csv"], 1);
    assert!(out.contains("column 2"), "{out}");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = fail(dir.path(), &["fit", "quad", "--in", "x.csv", "--out", "y.json", "--unknown-flag"], 2);
    assert!(out.contains("error=usage"));
    fail(dir.path(), &["fit", "sir", "--in", "x.csv", "--out", "y.json", "--basis", "cubic"], 2);
    fail(dir.path(), &["teleport"], 2);
}

#[test]
fn metrics_prints_ratios_and_guards_unit_temperature_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let line = ok(dir.path(), &["metrics", "--inlet", "10,1e5,288", "--bypass", "3,2e5,360", "--core", "7,2e5,360"]);
    assert!(line.contains("pressure_ratio=2.0") && line.contains("temperature_ratio=1.25"), "{line}");
    let out = fail(dir.path(), &["metrics", "--inlet", "10,1e5,288", "--bypass", "3,1e5,288", "--core", "7,1e5,288"], 1);
    assert!(out.contains("error=division_guard"));
}

fn two_points(d: &Path) {
    ok(d, &["synth", "quad", "--dim", "6", "--samples", "150", "--seed", "4", "--linear", "--out", "doe.csv"]);
    ok(d, &["fit", "quad", "--in", "doe.csv", "--n", "2", "--out", "q.json"]);
    ok(d, &["fit", "phd", "--in", "doe.csv", "--n", "2", "--out", "p.json"]);
    ok(d, &["surface", "--in", "doe.csv", "--subspace", "q.json", "--name", "cruise", "--out", "cruise.json"]);
    ok(d, &["surface", "--in", "doe.csv", "--subspace", "p.json", "--name", "sea", "--out", "sea.json"]);
}

#[test]
fn contour_export_matches_the_service_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    two_points(d);
    ok(d, &["contour", "--point", "sea.json", "--resolution", "12", "--out", "grid.csv"]);
    let csv = std::fs::read_to_string(d.join("grid.csv")).unwrap();
    let session = Session::load(d.join("cruise.json"), d.join("sea.json")).unwrap();
    let q: HashMap<String, String> = [("point", "sea"), ("resolution", "12")].iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let body: String = api::contours(&session, &q).body.split_whitespace().collect();
    let rows: Vec<String> = csv.lines().skip(1).map(|l| format!("[{l}]")).collect();
    assert_eq!(rows.len(), 144);
    assert!(body.contains(&format!("\"points\":[{}]", rows.join(","))));
}

#[test]
fn design_generate_and_crossproject() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    two_points(d);
    let line = ok(d, &["design", "generate", "--point", "cruise.json", "--y", "0.05,-0.05", "--count", "4", "--out", "b.json", "--parallel-out", "pc.csv"]);
    assert!(line.contains("designs=4"), "{line}");
    let pc = std::fs::read_to_string(d.join("pc.csv")).unwrap();
    assert!(pc.starts_with("design_id,x1,x2,x3,x4,x5,x6,weight1,"));
    assert_eq!(pc.lines().count(), 5);
    ok(d, &["design", "crossproject", "--designs", "b.json", "--point", "sea.json", "--out", "cross.csv"]);
    let cross = std::fs::read_to_string(d.join("cross.csv")).unwrap();
    assert!(cross.starts_with("design_id,y1,y2,predicted,extrapolated\n"));

    let out = fail(d, &["design", "generate", "--point", "cruise.json", "--y", "50,0", "--out", "x.json"], 1);
    assert!(out.contains("infeasible=true"), "{out}");
}

#[test]
fn normalize_saves_a_reusable_map() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("raw.csv"), "span,angle,eff\n10,0.5,0.9\n20,1.5,0.8\n15,1.0,0.85\n").unwrap();
    ok(d, &["normalize", "--in", "raw.csv", "--out", "n.csv", "--map", "map.json"]);
    let n = std::fs::read_to_string(d.join("n.csv")).unwrap();
    assert!(n.starts_with("x1,x2,eff\n-1.0000000000000000e0,-1.0000000000000000e0,"), "{n}");
    ok(d, &["normalize", "--in", "raw.csv", "--input-columns", "angle", "--output-column", "eff", "--out", "m.csv", "--map", "m.json"]);
    assert!(std::fs::read_to_string(d.join("m.csv")).unwrap().starts_with("x1,eff\n"));
}

#[test]
fn serve_reports_mismatched_points_and_answers_health() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    two_points(d);
    ok(d, &["synth", "quad", "--dim", "5", "--samples", "100", "--seed", "1", "--out", "small.csv"]);
    ok(d, &["fit", "quad", "--in", "small.csv", "--n", "2", "--out", "small_q.json"]);
    ok(d, &["surface", "--in", "small.csv", "--subspace", "small_q.json", "--name", "small", "--out", "small.json"]);
    let out = fail(d, &["serve", "--a", "cruise.json", "--b", "small.json", "--addr", "127.0.0.1:0"], 1);
    assert!(out.contains("design dimension"), "{out}");

    let mut child = Command::new(env!("CARGO_BIN_EXE_ridgekit"))
        .current_dir(d)
        .args(["serve", "--a", "cruise.json", "--b", "sea.json", "--addr", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut first = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut first).unwrap();
    let addr = first.split_whitespace().find_map(|kv| kv.strip_prefix("listening=")).unwrap().to_string();
    let mut stream = TcpStream::connect(&addr).unwrap();
    stream.write_all(b"GET /health HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    let _ = child.wait();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"status\": \"ok\""));
}
