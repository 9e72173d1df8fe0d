use std::process::{Command, Output};

fn dssh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dssh")).args(args).output().expect("spawn dssh")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header_value(text: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key} = ");
    text.lines().find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn exit_codes() {
    assert_eq!(dssh(&["--help"]).status.code(), Some(0));
    assert_eq!(dssh(&["--version"]).status.code(), Some(0));
    assert_eq!(dssh(&[]).status.code(), Some(1));
    assert_eq!(dssh(&["nonsense"]).status.code(), Some(1));
    assert_eq!(dssh(&["spectrum", "--bogus", "1"]).status.code(), Some(1));
    assert_eq!(dssh(&["spectrum", "--n", "abc"]).status.code(), Some(1));
    assert_eq!(dssh(&["spectrum", "--format", "xml"]).status.code(), Some(1));

    // Bloch bands are undefined with endpoint-only potentials.
    let o = dssh(&["dispersion", "--onsite", "endpoints:0.5", "--kpoints", "11"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("UnsupportedOnsite"));
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# test\nn = 6\ngamma2 = 0.5\nphi-grid = 0.1pi:0.2pi:2\n").unwrap();
    let o = dssh(&["spectrum", "--config", cfg.to_str().unwrap(), "--gamma2", "0.75"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(header_value(&text, "n").as_deref(), Some("6"));
    assert_eq!(header_value(&text, "gamma2").as_deref(), Some("0.75"));
    assert_eq!(header_value(&text, "t0").as_deref(), Some("1"));
    // Two phi values, 12 eigenvalues each, plus the column line.
    assert_eq!(data_lines(&text).len(), 1 + 2 * 12);

    std::fs::write(&cfg, "frobnicate = 3\n").unwrap();
    assert_eq!(dssh(&["spectrum", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn json_output_parses() {
    let o = dssh(&["phase-diagram", "--phi-grid", "0:pi:5", "--gamma-grid", "0:2:3", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["header"]["command"], "phase-diagram");
    assert_eq!(v["header"]["config"]["phi-grid"], "0:pi:5");
    assert_eq!(v["rows"].as_array().unwrap().len(), 15);
    let cols: Vec<&str> = v["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let phase = cols.iter().position(|c| *c == "phase").unwrap();
    let winding = cols.iter().position(|c| *c == "winding").unwrap();
    for row in v["rows"].as_array().unwrap() {
        match row[phase].as_str().unwrap() {
            "topological" => assert_eq!(row[winding], 1),
            "trivial" => assert_eq!(row[winding], 0),
            _ => {}
        }
    }
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("osc.csv");
    let args = ["oscillation", "--sweep", "n", "--n-grid", "8,12", "--gamma1", "1", "--gamma2", "1"];
    let piped = dssh(&args);
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let written = dssh(&with_out);
    assert!(piped.status.success() && written.status.success());
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), piped.stdout);
}

#[test]
fn dynamics_reports_periods_and_conserves_probability() {
    let o = dssh(&["dynamics", "--n", "3", "--tau", "1", "--phi", "0.2pi", "--t-count", "21", "--t-max", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(header_value(&text, "predicted_period").unwrap().parse::<f64>().unwrap() > 0.0);
    let lines = data_lines(&text);
    assert_eq!(lines[0].split(',').count(), 1 + 6 + 2);
    for line in &lines[1..] {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let sites: f64 = v[1..7].iter().sum();
        assert!((sites - v[7]).abs() < 1e-12);
        assert!((v[7] + v[8] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn selftest_passes() {
    let o = dssh(&["selftest", "--samples", "30", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(header_value(&text, "failed_checks").as_deref(), Some("0"));
    assert!(data_lines(&text)[1..].iter().all(|l| l.ends_with(",pass")));
}
