use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dimer::scenarios::{catalog, FieldOff, ObservableTable, Preset};
use dimer_cli::config::{RunConfig, SweepSpec};

fn dimer(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimer")).args(args).current_dir(dir).output().expect("spawn dimer")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

/// `name key=value ...` → the value for `key`.
fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.split(' ').find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn num(line: &str, key: &str) -> f64 {
    field(line, key).unwrap_or_else(|| panic!("no {key} in {line}")).parse().unwrap()
}

#[test]
fn catalog_matches_presets() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(dir.path(), &["catalog"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    let presets = catalog::<f64>();
    assert_eq!(lines.len(), presets.len());
    for (line, p) in lines.iter().zip(&presets) {
        assert_eq!(line.split(' ').next(), Some(p.name()));
        match p {
            Preset::Trajectory(s) => {
                assert_eq!(field(line, "kind"), Some("trajectory"));
                assert_eq!(field(line, "initial"), Some(s.initial.name()));
                assert_eq!(num(line, "omega0"), s.params.omega0);
                assert_eq!(num(line, "delta_l"), s.params.delta_l);
                assert_eq!(num(line, "J"), s.params.j);
                assert_eq!(num(line, "Omega"), s.params.omega);
                assert_eq!(num(line, "gamma"), s.params.gamma);
                assert_eq!(field(line, "driven"), Some(if s.params.driven { "true" } else { "false" }));
                assert_eq!(num(line, "horizon"), s.horizon);
                assert_eq!(num(line, "samples") as usize, s.samples);
                let obs: Vec<&str> = s.observables.iter().map(|o| o.name()).collect();
                assert_eq!(field(line, "observables"), Some(obs.join(",").as_str()));
                match s.field_off {
                    Some(FieldOff::FirstMaximum { observable, .. }) => {
                        assert_eq!(field(line, "field_off"), Some(format!("first_max:{}", observable.name()).as_str()))
                    }
                    Some(FieldOff::At(t)) => assert_eq!(num(line, "field_off"), t),
                    None => assert_eq!(field(line, "field_off"), None),
                }
                match &s.sweep {
                    Some(sw) => {
                        let (param, vals) = field(line, "sweep").unwrap().split_once(':').unwrap();
                        assert_eq!(param, sw.param.name());
                        let vals: Vec<f64> = vals.split(',').map(|v| v.parse().unwrap()).collect();
                        assert_eq!(vals, sw.values);
                    }
                    None => assert_eq!(field(line, "sweep"), None),
                }
            }
            Preset::Zeno(z) => {
                assert_eq!(field(line, "kind"), Some("zeno"));
                assert_eq!(field(line, "target"), Some(z.target.name()));
                assert_eq!(num(line, "J"), z.params.j);
                assert_eq!(num(line, "gamma"), z.params.gamma);
                assert_eq!(num(line, "total"), z.total);
                let taus: Vec<f64> = field(line, "taus").unwrap().split(',').map(|v| v.parse().unwrap()).collect();
                assert_eq!(taus, z.taus);
            }
        }
    }
}

#[test]
fn constants_from_molecular_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(dir.path(), &["constants", "--d0", "1.46D", "--r", "10nm"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let j = value(&stdout(&o), "J_s^-1");
    assert!((j - 4.0e9).abs() / 4.0e9 < 0.02, "{j:e}");
}

#[test]
fn zeno_hundred_measurements() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(dir.path(), &["zeno", "--tau", "0.01ns", "--J", "4e9", "--T", "1ns", "--out", "z.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(value(&text, "measurements"), 100.0);
    let s = value(&text, "survival");
    assert!((s - 0.852).abs() / 0.852 < 0.01, "{s}");
    let table = ObservableTable::<f64>::from_csv(&fs::read_to_string(dir.path().join("z.csv")).unwrap()).unwrap();
    assert_eq!(table.len(), 100);
}

#[test]
fn run_free_eg_writes_declared_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(dir.path(), &["run", "--scenario", "free_eg", "--out", "fig3a.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("fig3a.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t_s,rho11,rho22,rho33,rho44,rho_ff,rho_kk,C"));
    assert!(!text.contains('\r'));
    let table = ObservableTable::<f64>::from_csv(&text).unwrap();
    assert_eq!(table.times[0], 0.0);
    assert_eq!(table.column("C").unwrap()[0], 0.0);
    assert_eq!(table.len(), 2001);
}

#[test]
fn reruns_are_byte_identical_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["run", "--scenario", "free_eg", "--horizon", "1ns", "--out", out];
    assert!(dimer(dir.path(), &args("a.csv")).status.success());
    assert!(dimer(dir.path(), &args("b.csv")).status.success());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    let table = ObservableTable::<f64>::from_csv(&text).unwrap();
    assert_eq!(table.to_csv().unwrap(), text);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(
        dir.path(),
        &["run", "--scenario", "free_eg", "--J", "2e9", "--horizon", "0.5ns", "--out", "x.csv", "--save-config", "cfg.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("cfg.json");
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(cfg.overrides.j, Some(2e9));
    assert_eq!(cfg.scenario.as_deref(), Some("free_eg"));
    cfg.save(&dir.path().join("again.json")).unwrap();
    assert_eq!(RunConfig::load(&dir.path().join("again.json")).unwrap(), cfg);
    assert_eq!(fs::read(&path).unwrap(), fs::read(dir.path().join("again.json")).unwrap());

    // Running from the saved file reproduces the flag run.
    let o = dimer(dir.path(), &["run", "--config", "cfg.json", "--out", "y.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(dir.path().join("x.csv")).unwrap(), fs::read(dir.path().join("y.csv")).unwrap());
}

#[test]
fn config_with_unknown_field_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::for_scenario("free_eg", "x.csv");
    cfg.sweep = Some(SweepSpec::parse("J=1e9,2e9").unwrap());
    let mut json: serde_json::Value = serde_json::to_value(&cfg).unwrap();
    json["extra"] = serde_json::json!(1);
    fs::write(dir.path().join("bad.json"), json.to_string()).unwrap();
    let o = dimer(dir.path(), &["run", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error kind=usage exit=2"));
}

#[test]
fn sweep_writes_points_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(
        dir.path(),
        &["run", "--scenario", "free_eg", "--horizon", "1ns", "--sweep", "J=1e9,2e9,4e9", "--jobs", "2", "--out", "sw.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let index = fs::read_to_string(dir.path().join("sw.csv")).unwrap();
    assert_eq!(index, "file,param,value\nsw_0.csv,J,1e9\nsw_1.csv,J,2e9\nsw_2.csv,J,4e9\n");
    for (k, j) in [1e9f64, 2e9, 4e9].into_iter().enumerate() {
        let text = fs::read_to_string(dir.path().join(format!("sw_{k}.csv"))).unwrap();
        let t = ObservableTable::<f64>::from_csv(&text).unwrap();
        let (times, c) = (&t.times, t.column("C").unwrap());
        let i = times.len() / 7;
        // Coherent to well within this tolerance over 1 ns at γ = 1e6.
        assert!((c[i] - (2.0 * j * times[i]).sin().abs()).abs() < 1e-2, "J={j:e}");
    }

    let plot = dimer(dir.path(), &["plot", "fig5c", "--data", "sw.csv", "--out", "fig5c.gp"]);
    assert!(plot.status.success(), "{}", stderr(&plot));
    let script = fs::read_to_string(dir.path().join("fig5c.gp")).unwrap();
    assert_eq!(script.matches("column('C')").count(), 3);
}

#[test]
fn plot_fig3a_and_fig5b() {
    let dir = tempfile::tempdir().unwrap();
    assert!(dimer(dir.path(), &["run", "--scenario", "free_eg", "--horizon", "1ns", "--out", "eg.csv"]).status.success());
    let o = dimer(dir.path(), &["plot", "fig3a", "--data", "eg.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let script = stdout(&o);
    assert!(script.contains("column('C')") && script.contains("column('rho_ff')"));
    assert!(script.contains("$1*1e9") && script.contains("t (ns)"));

    let o = dimer(
        dir.path(),
        &["run", "--scenario", "driven_resonant", "--horizon", "20ns", "--sweep", "Omega=3e7,7e7", "--out", "om.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = dimer(dir.path(), &["plot", "fig5b", "--data", "om.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let script = stdout(&o);
    assert!(script.contains("'om_0.csv'") && script.contains("'om_1.csv'"));
    assert!(script.contains("Omega = 3e7") && script.contains("Omega = 7e7"));
}

#[test]
fn unknown_figure_lists_ids() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(dir.path(), &["plot", "fig99", "--data", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("fig3a") && err.contains("fig6b"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn missing_csv_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(dir.path(), &["plot", "fig3a", "--data", "absent.csv"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error kind=io exit=4"));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(dir.path(), &["run", "--scenario", "free_eg", "--horizon", "0.1ns", "--out", "no/such/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bad_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--scenario", "free_eg", "--out", "x.csv", "--frobnicate"],
        vec!["run", "--scenario", "no_such_scenario", "--out", "x.csv"],
        vec!["constants", "--r", "10 furlongs"],
        vec!["zeno", "--tau", "1ns"],
        vec!["run", "--scenario", "free_eg", "--out", "x.csv", "--sweep", "colour=1"],
        vec!["run", "--scenario", "free_eg", "--out", "x.csv", "--rel-tol", "-1"],
        vec!["frobnicate"],
    ] {
        let o = dimer(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        let last = stderr(&o).lines().last().unwrap_or("").to_string();
        assert!(last.starts_with("error kind=usage exit=2"), "{args:?}: {last}");
    }
}

#[test]
fn audit_reports_published_inconsistency() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(dir.path(), &["audit", "--horizon", "1ns", "--samples", "201"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(value(&text, "derived_trace_drift") < 1e-10);
    assert!(value(&text, "published_open_trace_drift") > 1e-3);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = dimer(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("catalog"));
}
