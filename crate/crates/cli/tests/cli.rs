use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tricontract"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn prove_at_zero_writes_a_certificate() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "prove",
            "--builtin",
            "example4",
            "--sigma",
            "0",
            "--no-timestamp",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cert = json(&dir.path().join("certificate.json"));
    assert_eq!(cert["proved"], true);
    assert_eq!(cert["r"].as_f64(), Some(1e-10));
    assert_eq!(cert["params"]["m"], 20);
    assert_eq!(cert["verdicts"].as_array().unwrap().len(), 41);
    assert!(cert["timestamp"].is_null());
}

#[test]
fn parameter_gate_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["prove", "--sigma", "0", "--M", "1"]);
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("certificate.json").exists());
    assert_eq!(code(&run(dir.path(), &["prove", "--s", "1.5"])), 2);
    assert_eq!(code(&run(dir.path(), &["prove", "--bogus"])), 2);
}

#[test]
fn oversized_radius_fails_when_the_quadratic_term_is_live() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["prove", "--sigma", "0.3", "--r", "1", "--no-timestamp"],
    );
    assert_eq!(code(&out), 3);
    assert_eq!(json(&dir.path().join("certificate.json"))["proved"], false);
}

#[test]
fn linear_problem_proves_at_any_admissible_radius() {
    // at sigma = 0 there is no quadratic term, so r = 1 is inside I
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["prove", "--sigma", "0", "--r", "1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn unwritable_output_exits_four() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("missing").join("c.json");
    let out = run(dir.path(), &["prove", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    let out = run(dir.path(), &["batch", "--branch", "nope.json"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn continue_and_prove_twenty_one_points() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "continue",
            "--builtin",
            "example4",
            "--steps",
            "10",
            "--ds",
            "1e-3",
            "--prove",
            "--certs-out",
            "certs.json",
            "--no-timestamp",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let mut rdr = csv::Reader::from_path(dir.path().join("branch.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["sigma", "x1", "norm_s", "proved", "r"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 21);
    for row in &rows {
        assert_eq!(&row[3], "true");
        assert_eq!(row[4].parse::<f64>().unwrap(), 1e-10);
        // 17 significant digits: d.dddddddddddddddde±x
        let mantissa = row[0].split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17, "{}", &row[0]);
    }
    let sigmas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(sigmas[0] < 0.0 && sigmas[20] > 0.0);
    assert!(sigmas.windows(2).all(|w| w[0] < w[1]));

    let branch = json(&dir.path().join("branch.json"));
    assert_eq!(branch["points"].as_array().unwrap().len(), 21);
    assert_eq!(branch["m"], 20);
    assert_eq!(
        json(&dir.path().join("certs.json"))
            .as_array()
            .unwrap()
            .len(),
        21
    );
}

#[test]
fn zero_steps_gives_a_single_point() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["continue", "--steps", "0"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("branch.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0.0000000000000000e0,5.0000000000000000e-1,"));
}

#[test]
fn stall_exits_five_with_partial_output() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "continue",
            "--steps",
            "5",
            "--ds-min",
            "1e-4",
            "--max-iter",
            "0",
        ],
    );
    assert_eq!(code(&out), 5);
    let branch = json(&dir.path().join("branch.json"));
    assert!(!branch["points"].as_array().unwrap().is_empty());
    assert!(dir.path().join("branch.csv").exists());
}

#[test]
fn batch_round_trip_keeps_coefficients_exact() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["continue", "--steps", "3"])), 0);
    let out = run(
        dir.path(),
        &[
            "batch",
            "--branch",
            "branch.json",
            "--no-timestamp",
            "--csv-out",
            "b.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let branch = json(&dir.path().join("branch.json"));
    let certs = json(&dir.path().join("certificates.json"));
    let pts = branch["points"].as_array().unwrap();
    let certs = certs.as_array().unwrap();
    assert_eq!(pts.len(), 7);
    for (p, c) in pts.iter().zip(certs) {
        assert_eq!(p["x"].to_string(), c["xbar"].to_string());
        assert_eq!(p["sigma"], c["sigma"]);
        assert_eq!(c["proved"], true);
    }
    let mismatch = run(
        dir.path(),
        &["batch", "--branch", "branch.json", "--m", "12"],
    );
    assert_eq!(code(&mismatch), 2);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    for name in ["a.json", "b.json"] {
        let out = run(
            dir.path(),
            &["prove", "--sigma", "-0.2", "--no-timestamp", "--out", name],
        );
        assert_eq!(code(&out), 0);
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn problem_file_and_custom_problems() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("p.json"),
        r#"{"type": "example4", "sigma": 0.1}"#,
    )
    .unwrap();
    let out = run(
        dir.path(),
        &["prove", "--problem", "p.json", "--no-timestamp"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        json(&dir.path().join("certificate.json"))["sigma"].as_f64(),
        Some(0.1)
    );

    let custom = r#"{"type": "custom", "lambda": "(k-1)^2/2", "mu": "1+2*k^2", "beta": "(k+1)^2/2",
        "mu0": 1, "beta0": 1, "sigma": 0.1, "g": [0.5, 1.5, 0.25], "s_L": 2, "C1": 2, "C2": 3,
        "delta": 0.2752809, "k0": 20, "tail_certified": true}"#;
    std::fs::write(dir.path().join("c.json"), custom).unwrap();
    let out = run(
        dir.path(),
        &[
            "prove",
            "--problem",
            "c.json",
            "--no-timestamp",
            "--out",
            "c-cert.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&dir.path().join("c-cert.json"))["proved"], true);

    // without the analytic certificate the assumptions cannot be checked for all k
    let uncertified = custom.replace("\"tail_certified\": true", "\"tail_certified\": false");
    std::fs::write(dir.path().join("u.json"), uncertified).unwrap();
    assert_eq!(code(&run(dir.path(), &["prove", "--problem", "u.json"])), 2);

    std::fs::write(dir.path().join("bad.json"), r#"{"type": "nonsense"}"#).unwrap();
    assert_eq!(
        code(&run(dir.path(), &["prove", "--problem", "bad.json"])),
        2
    );
}
