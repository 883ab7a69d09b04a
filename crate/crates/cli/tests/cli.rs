use std::fs;
use std::process::{Command, Output};

fn stc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_theorem1_passes() {
    let o = stc(&["verify", "--suite", "theorem1", "--trials", "100000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("suite theorem1"));
    assert!(text.trim_end().ends_with("PASS"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn verify_unknown_suite_is_usage_error() {
    let o = stc(&["verify", "--suite", "theorem7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"));
}

#[test]
fn simulate_spec_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_stc"))
        .args([
            "simulate", "--code", "golden-dv", "--decoder", "fast,sphere", "--modulation", "64",
            "--channel", "quasistatic", "--snr-start", "0", "--snr-stop", "30", "--snr-step", "2",
            "--trials", "10000", "--seed", "1", "--ordering", "none", "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 16 * 2);
    assert_eq!(
        lines[0],
        "snr_db,decoder,code,modulation,channel,trials,ser,nodes_mean,nodes_p95,nodes_max,sorts_mean,time_ns_mean"
    );
    assert!(lines[1].starts_with("0,fast,golden-dv,64,quasistatic,10000,"));
    assert!(lines[2].starts_with("0,sphere,"));
    assert!(lines[32].starts_with("30,sphere,"));
}

#[test]
fn flag_order_does_not_matter() {
    let a = stc(&[
        "simulate", "--modulation", "4", "--trials", "20", "--snr-start", "0", "--snr-stop", "4",
        "--snr-step", "2", "--seed", "5", "--decoder", "exhaustive,fast",
    ]);
    let b = stc(&[
        "simulate", "--decoder", "exhaustive,fast", "--seed", "5", "--snr-step", "2", "--snr-stop",
        "4", "--snr-start", "0", "--trials", "20", "--modulation", "4",
    ]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let strip = |o: &Output| {
        stdout(o)
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(strip(&a).len(), 1 + 3 * 2);
}

#[test]
fn bad_arguments_exit_2() {
    for args in [
        vec!["simulate", "--bogus"],
        vec!["simulate", "--modulation", "8"],
        vec!["simulate", "--trials", "0"],
        vec!["simulate", "--snr-step", "0"],
        vec!["simulate", "--channel", "markov-1.5"],
        vec!["simulate", "--code", "golden-dv", "--decoder", "alamouti-fast"],
        vec!["frobnicate"],
    ] {
        let o = stc(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn bad_thread_cap_exit_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_stc"))
        .args(["simulate", "--trials", "1"])
        .env("STC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("STC_THREADS"));
}

#[test]
fn help_lists_flags_with_defaults() {
    let o = stc(&["simulate", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for flag in [
        "--code", "--decoder", "--modulation", "--channel", "--snr-start", "--snr-stop",
        "--snr-step", "--trials", "--seed", "--ordering", "--out",
    ] {
        assert!(text.contains(flag), "missing {flag}");
    }
    for default in ["golden-dv", "fast,sphere", "quasistatic", "10000", "[default: -]"] {
        assert!(text.contains(default), "missing default {default}");
    }
    let o = stc(&["verify", "--help"]);
    assert!(stdout(&o).contains("[default: all]"));
}

#[test]
fn decode_missing_file() {
    let o = stc(&["decode", "--input", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.json"));
}

fn unit_instance(decoder: &str) -> String {
    // h[i][j][k] = 1 on i == j, 0 otherwise; `Y` is filled in by the caller
    let h = r#"[[[[1,0],[1,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[1,0],[1,0]]]]"#;
    format!(r#"{{"h": {h}, "y": Y, "code": "golden-dv", "modulation": 4, "decoder": "{decoder}"}}"#)
}

#[test]
fn decode_round_trip() {
    use num_complex::Complex64;
    use stc_core::channel::ChannelRealization;
    use stc_core::codes::{effective_channel, CodeVariant};
    use stc_core::constellation::make_qam;

    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let ch = ChannelRealization::quasistatic([[one, zero], [zero, one]]);
    let eff = effective_channel(&ch, CodeVariant::GoldenDv);
    let a = make_qam(4).unwrap();
    let sent = [3usize, 0, 2, 1];
    let y = eff.apply(&sent.map(|k| a.symbol(k)), &[zero; 4]);
    let y_json = format!(
        "[{}]",
        y.iter()
            .map(|v| format!("[{:.17e},{:.17e}]", v.re, v.im))
            .collect::<Vec<_>>()
            .join(",")
    );
    let dir = tempfile::tempdir().unwrap();
    for decoder in ["fast", "sphere", "exhaustive"] {
        let path = dir.path().join(format!("{decoder}.json"));
        fs::write(&path, unit_instance(decoder).replace('Y', &y_json)).unwrap();
        let o = stc(&["decode", "--input", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        let indices: Vec<u64> = v["indices"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .collect();
        assert_eq!(indices, vec![3, 0, 2, 1], "{decoder}");
        assert!(v["cost"].as_f64().unwrap() < 1e-20);
        assert!(v["nodes_visited"].as_u64().unwrap() >= 1);
    }
}

#[test]
fn decode_effective_matrix_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eye.json");
    let rows = (0..4)
        .map(|r| {
            let row = (0..4)
                .map(|c| if r == c { "[1,0]" } else { "[0,0]" })
                .collect::<Vec<_>>()
                .join(",");
            format!("[{row}]")
        })
        .collect::<Vec<_>>()
        .join(",");
    let body = format!(
        r#"{{"H": [{rows}], "y": [[0.7,0.7],[-0.7,0.7],[0.7,-0.7],[-0.7,-0.7]], "code": "golden-dv", "modulation": 4, "decoder": "sphere"}}"#
    );
    fs::write(&path, body).unwrap();
    let o = stc(&["decode", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let x_hat = v["x_hat"].as_array().unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let expect = [[s, s], [-s, s], [s, -s], [-s, -s]];
    for (got, want) in x_hat.iter().zip(expect) {
        assert!((got[0].as_f64().unwrap() - want[0]).abs() < 1e-12);
        assert!((got[1].as_f64().unwrap() - want[1]).abs() < 1e-12);
    }
}

#[test]
fn decode_rejects_malformed_instances() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("garbage", "not json"),
        ("neither", r#"{"y": [[0,0],[0,0],[0,0],[0,0]], "code": "golden-dv", "modulation": 4, "decoder": "fast"}"#),
        ("badcode", r#"{"H": [[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[1,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]], "y": [[0,0],[0,0],[0,0],[0,0]], "code": "silver", "modulation": 4, "decoder": "fast"}"#),
    ];
    for (name, body) in cases {
        let path = dir.path().join(format!("{name}.json"));
        fs::write(&path, body).unwrap();
        let o = stc(&["decode", "--input", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}");
    }
}
