use std::path::Path;
use std::process::{Command, Output};

use cardioid_cli::boundary::read_boundary;
use cardioid_cli::exponents::read_report;
use cardioid_cli::render::Image;
use serde_json::Value;
use tempfile::TempDir;

fn cardioid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cardioid"))
        .args(args)
        .output()
        .expect("failed to start the binary")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_file(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn boundary_round_trips_and_is_symmetric() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b.csv");
    let o = cardioid(&["boundary", "--s", "1.5", "--n", "1024", "--out", path_arg(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("branch,u,x,y\n"));
    let rows = read_boundary(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3 * 1024);

    // re-emitting the parsed rows gives the same bytes
    let mut again = Vec::new();
    cardioid_cli::boundary::write_boundary(&rows, &mut again).unwrap();
    assert_eq!(again, text.as_bytes());

    let upper: Vec<_> = rows.iter().filter(|r| r.branch == "upper").collect();
    let lower: Vec<_> = rows.iter().filter(|r| r.branch == "lower").collect();
    assert_eq!(upper.len(), 1024);
    for (a, b) in upper.iter().zip(&lower) {
        assert!(a.x >= -1.0);
        assert_eq!(a.u, b.u);
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, -b.y);
    }
    let arc: Vec<_> = rows.iter().filter(|r| r.branch == "arc").collect();
    for (a, b) in arc.iter().zip(arc.iter().rev()) {
        assert!((a.x - b.x).abs() < 1e-12 && (a.y + b.y).abs() < 1e-12);
    }
}

#[test]
fn boundary_rejects_an_unwritable_path() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let out = blocker.join("b.csv");
    let o = cardioid(&["boundary", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_dispatches_and_reports() {
    let dir = TempDir::new().unwrap();
    let pts = dir.path().join("p.csv");
    // (0.5, 0) is inside M_s; radius 0.75 * 2^-7 at angle pi lies in the cell of index 7
    std::fs::write(&pts, "x,y\n0.5,0\n-0.005859375,0\n# far away\n-3,0.5\n").unwrap();
    let o = cardioid(&["eval", path_arg(&pts)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let recs = v.as_array().unwrap();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[0]["region"], "Ms_closure");
    assert_eq!(recs[0]["image"][0].as_f64().unwrap(), 0.25);
    assert_eq!(recs[0]["image"][1].as_f64().unwrap(), 0.0);
    assert_eq!(recs[1]["region"], "Omega1(7)");
    for r in recs {
        let det = r.get("jacobian").map(|j| {
            let m = |i: usize, k: usize| j[i][k].as_f64().unwrap();
            m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)
        });
        match det {
            Some(d) if d > 0.0 => assert!(r["K"].as_f64().unwrap() >= 1.0),
            _ => assert!(r.get("K").is_none()),
        }
    }
}

#[test]
fn eval_reports_the_bad_line() {
    let dir = TempDir::new().unwrap();
    let pts = dir.path().join("p.csv");
    std::fs::write(&pts, "0.1,0.2\n0.3,0.4\n0.5,oops\n").unwrap();
    let o = cardioid(&["eval", path_arg(&pts)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("p.csv:3:"), "{err}");
}

#[test]
fn exponents_at_three_halves() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("e");
    let o = cardioid(&["exponents", "--out", path_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let sum = json_file(&out.join("exponents.json"));
    let want = [("Kf", 2.0, 0.1), ("Kfinv", 5.0, 0.25), ("Dfinv", 2.5, 0.1)];
    let crit = sum["criticals"].as_array().unwrap();
    for (q, c, tol) in want {
        let e = crit.iter().find(|e| e["quantity"] == q).unwrap();
        let v = e["result"]["value"].as_f64().unwrap();
        assert!((v - c).abs() <= tol, "{q}: {v}");
    }

    let report = json_file(&out.join("Kf_2.json"));
    for key in ["scenario", "quantity", "exponent", "j", "integral", "slope", "verdict"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    let parsed = read_report(&out.join("Kf_2.json")).unwrap();
    assert_eq!(parsed.j.first(), Some(&6));
    assert_eq!(parsed.j.last(), Some(&14));

    let csv = std::fs::read_to_string(out.join("Kf_2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,integral,log2_ratio"));
    for (line, (j, integral)) in lines.zip(parsed.j.iter().zip(&parsed.integral)) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<u32>().unwrap(), *j);
        assert_eq!(f[1].parse::<f64>().unwrap(), *integral);
    }
}

#[test]
fn exponents_at_two_find_kf_near_one() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("e");
    let o = cardioid(&["exponents", "--s", "2", "--quantity", "Kf", "--out", path_arg(&out)]);
    assert!(o.status.success());
    let sum = json_file(&out.join("exponents.json"));
    let v = sum["criticals"][0]["result"]["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() <= 0.1, "{v}");
}

#[test]
fn exponents_power_log_combined_critical() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("e");
    let args = [
        "exponents", "--s", "3", "--construction", "squeezed", "--delta", "powerlog", "--p", "2",
        "--quantity", "Kf", "--q", "0.75", "--out", path_arg(&out),
    ];
    let o = cardioid(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sum = json_file(&out.join("exponents.json"));
    assert_eq!(sum["criticals"][0]["predicted"].as_f64().unwrap(), 0.75);
    let v = sum["criticals"][0]["result"]["value"].as_f64().unwrap();
    assert!((v - 0.75).abs() <= 0.1, "{v}");
}

#[test]
fn exponents_reject_bad_configurations() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("e");
    let o = path_arg(&out);
    for args in [
        vec!["exponents", "--s", "1", "--out", o],
        vec!["exponents", "--jmin", "4", "--out", o],
        vec!["exponents", "--construction", "squeezed", "--jmax", "15", "--out", o],
        vec!["exponents", "--construction", "squeezed", "--delta", "powerlog", "--p", "1", "--out", o],
        vec!["exponents", "--quantity", "nope", "--out", o],
    ] {
        assert_eq!(cardioid(&args).status.code(), Some(2), "{args:?}");
    }
}

fn render(dir: &Path, name: &str, extra: &[&str]) -> (Output, Vec<u8>) {
    let file = dir.join(name);
    let mut args = vec!["render", "--file", path_arg(&file)];
    args.extend_from_slice(extra);
    let o = cardioid(&args);
    let bytes = std::fs::read(&file).unwrap_or_default();
    (o, bytes)
}

#[test]
fn render_heatmaps() {
    let dir = TempDir::new().unwrap();
    let (o, bytes) = render(dir.path(), "in.ppm", &["--x-range", "0.2", "0.6", "--y-range", "-0.1", "0.1", "--width", "16", "--height", "12"]);
    assert!(o.status.success());
    assert!(bytes.starts_with(b"P6\n16 12\n255\n"));
    let img = Image::read_ppm(bytes.as_slice()).unwrap();
    assert!(img.rgb.iter().all(|&v| v == img.rgb[0]));

    // odd height puts the middle row on the real axis
    let (o, bytes) = render(dir.path(), "axis.ppm", &["--x-range", "-0.1", "-0.0001", "--y-range", "-0.001", "0.001", "--width", "64", "--height", "5"]);
    assert!(o.status.success());
    let img = Image::read_ppm(bytes.as_slice()).unwrap();
    let row: Vec<u8> = (0..64).map(|i| img.pixel(i, 2)[0]).collect();
    assert!(row.windows(2).all(|w| w[1] >= w[0]), "{row:?}");
    assert!(row[63] > row[0]);
}

#[test]
fn render_grid_and_limits() {
    let dir = TempDir::new().unwrap();
    let (o, bytes) = render(dir.path(), "g.ppm", &["--mode", "grid", "--width", "40", "--height", "30"]);
    assert!(o.status.success());
    let img = Image::read_ppm(bytes.as_slice()).unwrap();
    assert_eq!((img.width, img.height), (40, 30));
    assert!(img.rgb.iter().any(|&v| v != img.rgb[0]));

    let (o, _) = render(dir.path(), "big.ppm", &["--width", "8193"]);
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = render(dir.path(), "empty.ppm", &["--x-range", "0.5", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_catches_a_tampered_profile() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v");
    let o = cardioid(&["verify", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sum = json_file(&out.join("verify.json"));
    assert_eq!(sum["pass"], true);
    let slopes = sum["slopes"].as_array().unwrap();
    assert!(!slopes.is_empty());
    assert!(slopes.iter().all(|s| s["slope_stderr"].as_f64().is_some()), "{slopes:?}");

    let out = dir.path().join("t");
    let o = cardioid(&["verify", "--tamper-eta", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("FAIL boundary_compatibility"), "{err}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|n| {
            let out = dir.path().join(n);
            let o = path_arg(&out).to_string();
            assert!(cardioid(&["exponents", "--jmax", "10", "--out", &o]).status.success());
            assert!(cardioid(&["render", "--width", "32", "--height", "32", "--out", &o]).status.success());
            out
        })
        .collect();
    let mut names: Vec<_> = std::fs::read_dir(&runs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 3);
    for n in names {
        let a = std::fs::read(runs[0].join(&n)).unwrap();
        let b = std::fs::read(runs[1].join(&n)).unwrap();
        if n == "exponents.json" {
            // the config echoes the output directory
            let strip = |v: &[u8]| {
                let mut j: Value = serde_json::from_slice(v).unwrap();
                j["config"]["out"] = Value::Null;
                j
            };
            assert_eq!(strip(&a), strip(&b));
        } else {
            assert_eq!(a, b, "{n:?}");
        }
    }
}
