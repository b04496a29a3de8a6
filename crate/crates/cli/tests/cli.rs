use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_site-entropy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gr_sweep_writes_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("gr.csv");
    let out = run(&[
        "gr-sweep",
        "--driver",
        "u",
        "--min",
        "0",
        "--max",
        "8",
        "--steps",
        "161",
        "--output",
        path_str(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("161 points; entropy min"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "g,e0,n,m,w0,w_up,w_down,w2,entropy,d1_entropy,d2_entropy,d3_entropy,source,flags"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 161);
    assert_eq!(rows[0][8].parse::<f64>().unwrap(), 2.0);
    assert_eq!(rows[160][0].parse::<f64>().unwrap(), 8.0);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = [
        "ed-sweep", "--L", "4", "--driver", "mu", "--u", "2", "--min", "-3", "--max", "7", "--steps", "25",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    // The grand-canonical ends are empty and full.
    assert!(stdout(&a).contains("saturated"));
}

#[test]
fn degenerate_grid_is_a_usage_error() {
    let out = run(&[
        "ed-sweep", "--model", "hubbard", "--L", "2", "--u", "4", "--driver", "u", "--min", "4", "--max", "4",
        "--steps", "5",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate grid"));
    assert_eq!(code(&run(&["ed-sweep", "--L", "17"])), 1);
    assert_eq!(code(&run(&["gr-sweep", "--steps", "4"])), 1);
    assert_eq!(code(&run(&["no-such-command"])), 1);
}

#[test]
fn unwritable_output_fails() {
    let out = run(&["gr-sweep", "--output", "/nonexistent-dir/x.csv"]);
    assert_ne!(code(&out), 0);
    assert!(!out.stderr.is_empty());
}

fn mu_c(args: &[&str]) -> (f64, f64) {
    let out = run(args);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let field = |name: &str| -> f64 {
        let rest = &text[text.find(name).unwrap() + name.len()..];
        rest.split_whitespace().next().unwrap().parse().unwrap()
    };
    (field("mu_c = "), field("error <= "))
}

#[test]
fn critical_potential_is_tolerance_independent() {
    let (a, ea) = mu_c(&["lw-muc", "--u", "4"]);
    let (b, eb) = mu_c(&["lw-muc", "--u", "4", "--abs-tol", "1e-8", "--rel-tol", "1e-8"]);
    assert!((a - b).abs() <= ea.max(eb), "{a} vs {b}");
    assert!(a > 1.0 && a < 2.0);
}

#[test]
fn detect_interaction_transition() {
    let out = run(&[
        "detect", "--model", "gr", "--driver", "u", "--min", "5.8", "--max", "6.8",
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["status"], "detected");
    assert_eq!(r["order_k"], 3);
    assert_eq!(r["singularity"], "jump");
    let g_c = r["g_c"].as_f64().unwrap();
    assert!((g_c - 2.0 * std::f64::consts::PI).abs() <= r["resolution"].as_f64().unwrap());
}

#[test]
fn detect_filling_transition() {
    let u = (6.0 * std::f64::consts::PI).to_string();
    let out = run(&["detect", "--driver", "mu", "--u", &u, "--min", "2.9", "--max", "3.3"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["order_k"], 2);
    assert!((r["g_c"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-3);
}

#[test]
fn smooth_window_is_clean_none() {
    let out = run(&["detect", "--driver", "u", "--min", "1", "--max", "4"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["status"], "none_detected");
    assert!(r["order_k"].is_null());
    // Every flag is present even when unset.
    let flags = r["flags"].as_object().unwrap();
    assert_eq!(flags["equipartition_near_gc"], false);
    assert_eq!(flags["degenerate_ground_state"], false);
    assert!(flags["vanishing_occupation"].as_array().unwrap().is_empty());
    for key in [
        "status",
        "source",
        "driver",
        "window",
        "g_c",
        "resolution",
        "order_k",
        "singularity",
        "exponent",
        "evidence",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn inconclusive_detection_has_its_own_exit_code() {
    // A square-root cusp sitting just beside a grid node.
    let signal = r#"{"kind":"power","center":0.994094075094396,"exponent":0.5,"amplitude":0.7713220658890848}"#;
    let out = run(&[
        "detect",
        "--model",
        "synthetic",
        "--source",
        "synthetic",
        "--signal",
        signal,
        "--min",
        "0.5",
        "--max",
        "1.5",
    ]);
    assert_eq!(json(&out)["status"], "inconclusive");
    assert_eq!(code(&out), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let csv = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!("# two-site check\nmodel = hubbard\nL = 2\nboundary = open\ndriver = u\ngrid_min = 0\ngrid_max = 8\ngrid_steps = 9\noutput = {}\n", csv.display()),
    )
    .unwrap();
    let out = run(&["ed-sweep", "--config", path_str(&cfg), "--steps", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 6);
    // u = 4 row: two-site energy per site is (u - sqrt(u^2 + 16)) / 4.
    let row: Vec<&str> = text.lines().nth(3).unwrap().split(',').collect();
    assert_eq!(row[0].parse::<f64>().unwrap(), 4.0);
    let e0: f64 = row[1].parse().unwrap();
    assert!((e0 - (4.0 - 32f64.sqrt()) / 4.0).abs() < 1e-12);

    std::fs::write(&cfg, "lattice = 4\n").unwrap();
    assert_eq!(code(&run(&["ed-sweep", "--config", path_str(&cfg)])), 1);
}

#[test]
fn fit_exponent_from_csv_and_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cusp.csv");
    let signal = r#"{"kind":"power","center":1,"exponent":-0.5,"amplitude":1}"#;
    let out = run(&[
        "fit-exponent",
        "--model",
        "synthetic",
        "--source",
        "synthetic",
        "--signal",
        signal,
        "--min",
        "0",
        "--max",
        "1.999",
        "--steps",
        "201",
        "--g-c",
        "1",
        "--order",
        "0",
        "--side",
        "right",
    ]);
    assert_eq!(code(&out), 0);
    let fit = json(&out);
    assert!((fit["exponent"].as_f64().unwrap() + 0.5).abs() < 0.05);
    assert!(fit["r_squared"].as_f64().unwrap() >= 0.99);

    let sweep = run(&[
        "gr-sweep",
        "--min",
        "5.5",
        "--max",
        "7",
        "--steps",
        "151",
        "--output",
        path_str(&csv),
    ]);
    assert_eq!(code(&sweep), 0);
    let refused = run(&[
        "fit-exponent",
        "--input",
        path_str(&csv),
        "--g-c",
        "6.283185307179586",
        "--order",
        "2",
    ]);
    assert_eq!(code(&refused), 2);
    assert!(String::from_utf8_lossy(&refused.stderr).contains("low-confidence"));
}

#[test]
fn thread_count_from_environment() {
    let ok = Command::new(env!("CARGO_BIN_EXE_site-entropy"))
        .args(["gr-sweep", "--steps", "9"])
        .env("SITE_ENTROPY_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0);
    let bad = Command::new(env!("CARGO_BIN_EXE_site-entropy"))
        .args(["gr-sweep"])
        .env("SITE_ENTROPY_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 1);
}
