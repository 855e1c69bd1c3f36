mod common;

use common::{run, run_mutant, temp_dir, Mutant, Target};
use gurlab::report::{read_csv, read_jsonl};

#[test]
fn verify_default_battery_passes() {
    let (code, out, err) = run(&["verify"]);
    assert_eq!(code, 0, "{err}");
    let lines = out.iter().filter(|&&b| b == b'\n').count();
    assert!(lines >= 4000, "{lines}");
    assert!(err.contains("0 failing"));
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let a = run(&["verify", "--format", "csv", "--seed", "3"]);
    let b = run(&["verify", "--format", "csv", "--seed", "3"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}

#[test]
fn verify_output_round_trips_losslessly() {
    let (_, json, _) = run(&["verify"]);
    let (_, csv, _) = run(&["verify", "--format", "csv"]);
    let from_json = read_jsonl(json.as_slice()).unwrap();
    let from_csv = read_csv(csv.as_slice()).unwrap();
    assert_eq!(from_json, from_csv);
    let mut again = Vec::new();
    gurlab::report::write_jsonl(&mut again, &from_json).unwrap();
    assert_eq!(again, json);
}

#[test]
fn verify_output_is_sorted() {
    let (_, json, _) = run(&["verify", "--engine", "gaussian"]);
    let reports = read_jsonl(json.as_slice()).unwrap();
    assert!(reports.windows(2).all(|w| w[0].sort_key() <= w[1].sort_key()));
}

#[test]
fn verdicts_hold_at_other_hbar() {
    for hbar in ["2", "0.5", "si"] {
        let (code, _, err) = run(&["verify", "--hbar", hbar]);
        assert_eq!(code, 0, "hbar {hbar}: {err}");
    }
}

#[test]
fn tight_tolerance_fails_the_grid_engine() {
    let (code, _, err) = run(&["verify", "--engine", "grid", "--tol", "1e-15"]);
    assert_eq!(code, 1);
    assert!(err.contains("first failure"));
}

#[test]
fn mutated_engines_fail_verification() {
    for target in [Target::Gaussian, Target::Grid] {
        for symmetric in [true, false] {
            let (code, err) = run_mutant(&["verify"], &Mutant { target, symmetric });
            assert_eq!(code, 1, "{target:?} symmetric={symmetric}: {err}");
        }
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["verify", "--bogus"],
        vec!["verify", "--hbar", "zero"],
        vec!["verify", "--format", "xml"],
        vec!["sweep", "--family", "random_gaussian"],
        vec!["sweep", "--family", "nope"],
        vec!["sweep", "--family", "grid_correlated_gaussian", "--engine", "gaussian"],
        vec!["sweep", "--r-grid", "1:0:2"],
        vec!["sweep", "--family", "grid_correlated_gaussian", "--r-grid", "1.5"],
        vec!["minimize", "--budget", "5"],
        vec!["minimize", "--objective", "sum_product_three"],
        vec!["frobnicate"],
        vec![],
    ] {
        let (code, _, err) = run(&args);
        assert_eq!(code, 2, "{args:?}: {err}");
    }
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(String::from_utf8(out).unwrap().contains("verify"));
}

#[test]
fn config_file_is_applied_and_validated() {
    let dir = temp_dir("cfg");
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, r#"{"family": "correlated_triple", "r-grid": "0:0.5:1", "format": "csv"}"#).unwrap();
    let (code, out, err) = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("descriptor,param_r,"));
    assert_eq!(text.lines().count(), 4);

    std::fs::write(&cfg, r#"{"famly": "correlated_triple"}"#).unwrap();
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()]).0, 2);
    std::fs::write(&cfg, "not json").unwrap();
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["sweep", "--config", dir.join("missing.json").to_str().unwrap()]).0, 2);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn report_on_verify_output_has_twelve_relation_rows() {
    let dir = temp_dir("rv");
    for fmt in ["json", "csv"] {
        let path = dir.join(format!("v.{fmt}"));
        assert_eq!(run(&["verify", "--format", fmt, "--out", path.to_str().unwrap()]).0, 0);
        let (code, out, err) = run(&["report", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        let text = String::from_utf8(out).unwrap();
        let body: Vec<&str> = text.lines().skip(2).take_while(|l| !l.is_empty()).collect();
        assert_eq!(body.len(), 12, "{text}");
        for name in gurlab::RelationName::ALL {
            assert!(body.iter().any(|l| l.starts_with(name.as_str())));
        }
        assert!(text.contains("saturation by family"));
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweep_csv_has_monotone_covariance_column() {
    let (code, out, err) = run(&["sweep", "--family", "two_mode_squeezed", "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    let mut rd = csv::Reader::from_reader(out.as_slice());
    let col = rd.headers().unwrap().iter().position(|h| h == "cov_q_1_2").unwrap();
    let values: Vec<f64> = rd.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    assert_eq!(values.len(), 9);
    assert!(values.windows(2).all(|w| w[1] > w[0]));

    let dir = temp_dir("sw");
    let path = dir.join("s.csv");
    std::fs::write(&path, &out).unwrap();
    let (code, out, _) = run(&["report", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("two_mode_squeezed r=2"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweep_grid_family_json() {
    let (code, out, err) = run(&["sweep", "--family", "grid_correlated_gaussian", "--r-grid", "0,0.5"]);
    assert_eq!(code, 0, "{err}");
    let t: gurlab::searcher::SweepTable = serde_json::from_slice(&out).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.rows[1].params, vec![1.0, 0.5]);
}

#[test]
fn minimize_and_report() {
    let dir = temp_dir("mn");
    for fmt in ["json", "csv"] {
        let path = dir.join(format!("m.{fmt}"));
        let (code, _, err) = run(&[
            "minimize",
            "--family",
            "two_mode_squeezed",
            "--objective",
            "individual_product",
            "--format",
            fmt,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        let (code, out, _) = run(&["report", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        let text = String::from_utf8(out).unwrap();
        let row = text.lines().find(|l| l.starts_with("two_mode_squeezed")).unwrap();
        assert!(row.contains("hbar/4") && row.contains("hbar/2"), "{row}");
        assert!(row.contains("5.000000000e-1") && row.contains("2.500000000e-1"), "{row}");
    }
    let (code, out, _) =
        run(&["minimize", "--family", "random_gaussian", "--particles", "3", "--objective", "sum_product_three"]);
    assert_eq!(code, 0);
    let r = gurlab::SearchResult::from_json(std::str::from_utf8(&out).unwrap()).unwrap();
    assert!(r.holds && r.evaluations <= 400);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn report_rejects_missing_or_corrupt_input() {
    let dir = temp_dir("bad");
    assert_eq!(run(&["report", dir.join("none.json").to_str().unwrap()]).0, 2);
    for (name, body) in [("a.json", "{\"name\": 3}\n"), ("b.csv", "x,y\n1,2\n"), ("c.json", ""), ("d.json", "{\"problem\": 1}")] {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        let (code, _, err) = run(&["report", p.to_str().unwrap()]);
        assert_eq!(code, 2, "{name}: {err}");
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_gurlab");
    let st = std::process::Command::new(bin).args(["verify", "--engine", "grid"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let st = std::process::Command::new(bin).args(["verify", "--nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}
