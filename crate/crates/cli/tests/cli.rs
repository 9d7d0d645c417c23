use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kresling_airship::mass::DesignInputs;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kresling-airship"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count()
        - 1
}

#[test]
fn help_lists_every_design_parameter() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["--help"]);
    assert_eq!(code(&out), 0);
    let help = String::from_utf8(out.stdout).unwrap();
    let keys = toml::to_string(&DesignInputs::default()).unwrap();
    for line in keys.lines() {
        let key = line.split(" = ").next().unwrap();
        assert!(help.contains(key), "help misses {key}");
    }
    for unit in ["[mm]", "[g]", "[g/m]", "[g/m2]", "[kg/m3]", "[%]"] {
        assert!(help.contains(unit));
    }
}

#[test]
fn usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(tmp.path(), &["frobnicate"])), 1);
    assert_eq!(code(&run(tmp.path(), &["eval", "--n", "seven"])), 1);
    assert_eq!(code(&run(tmp.path(), &["--version"])), 0);
}

#[test]
fn malformed_config_reports_line() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.toml"), "version = 1\n[design]\nsides = = 7\n").unwrap();
    let out = run(tmp.path(), &["-c", "bad.toml", "eval"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");

    fs::write(tmp.path().join("typo.toml"), "[design]\nsidez = 7\n").unwrap();
    let out = run(tmp.path(), &["-c", "typo.toml", "eval"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("sidez"));
}

#[test]
fn eval_reference_and_infeasible() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["eval", "--require-feasible"]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/eval_n7_m4_l0.9.json")).unwrap()).unwrap();
    let payload = json["result"]["extra_payload_g"].as_f64().unwrap();
    assert!((payload - 68.0).abs() < 5.0, "{payload}");
    assert!(json["provenance"]["config_sha256"].as_str().unwrap().len() == 64);

    let small = ["eval", "--n", "3", "--m", "2", "--lambda", "0.51"];
    assert_eq!(code(&run(tmp.path(), &small)), 0);
    let mut strict = small.to_vec();
    strict.push("--require-feasible");
    assert_eq!(code(&run(tmp.path(), &strict)), 2);
}

#[test]
fn sweep_rows_and_worker_independence() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(tmp.path(), &["-o", "one", "sweep", "--workers", "1"])), 0);
    assert_eq!(code(&run(tmp.path(), &["-o", "many", "sweep", "--workers", "6"])), 0);
    let one = fs::read(tmp.path().join("one/sweep.csv")).unwrap();
    let many = fs::read(tmp.path().join("many/sweep.csv")).unwrap();
    assert!(one == many, "worker count changed sweep.csv");
    assert_eq!(data_rows(&tmp.path().join("one/sweep.csv")), 2880);

    assert_eq!(code(&run(tmp.path(), &["-o", "pt", "sweep", "--point", "7", "4", "0.9"])), 0);
    assert_eq!(data_rows(&tmp.path().join("pt/sweep.csv")), 1);
    assert_eq!(code(&run(tmp.path(), &["sweep", "--point", "7.5", "4", "0.9"])), 1);
}

#[test]
fn pattern_volumes_and_untwisted_case() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["pattern"]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/pattern_summary.json")).unwrap()).unwrap();
    let dep = json["result"][0]["volume_m3"].as_f64().unwrap();
    let fold = json["result"][1]["volume_m3"].as_f64().unwrap();
    assert!((dep - 0.825).abs() / 0.825 < 0.03);
    assert!((fold - 0.0417).abs() / 0.0417 < 0.05);
    let svg = fs::read_to_string(tmp.path().join("out/pattern.svg")).unwrap();
    assert!(svg.contains("config sha256"));

    let out = run(tmp.path(), &["-o", "flat", "pattern", "--n", "4", "--m", "1", "--lambda", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("flat/pattern.svg").exists());
}

#[test]
fn bom_reference_and_empty_design() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["bom"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("tube length 48308 mm"), "{stdout}");
    let plan = fs::read_to_string(tmp.path().join("out/cut_plan.txt")).unwrap();
    assert!(plan.contains("config sha256"));
    assert_eq!(code(&run(tmp.path(), &["bom", "--m", "0"])), 1);
}

#[test]
fn energy_without_battery() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["energy"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().contains("minimum feasible speed 0.07"));
    fs::write(tmp.path().join("flat.toml"), "[power]\nbattery_wh = 0.0\n").unwrap();
    let out = run(tmp.path(), &["-c", "flat.toml", "energy"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().contains("no feasible cruise speed"));
}

#[test]
fn simulate_is_repeatable() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(tmp.path(), &["-o", "a", "simulate", "--sma-window", "1"])), 0);
    assert_eq!(code(&run(tmp.path(), &["-o", "b", "simulate", "--sma-window", "1"])), 0);
    for f in ["trajectory.csv", "forces.csv", "sim_summary.json"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
    let header = fs::read_to_string(tmp.path().join("a/trajectory.csv")).unwrap();
    assert!(header.lines().any(|l| l == "t,x,z,vx,vz,tau_x,tau_z,energy_j"));
}

#[test]
fn runaway_simulation_exits_three() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[controller.gains.x]\nforce_max = 1e300\nv_max = 1e-300\ntol = 1e-300\n\
               [controller.gains.z]\nforce_max = 1.25\nv_max = 1.0\ntol = 0.1\n";
    fs::write(tmp.path().join("wild.toml"), cfg).unwrap();
    let out = run(tmp.path(), &["-c", "wild.toml", "simulate"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn init_config_round_trip() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(tmp.path(), &["init-config", "p.toml"])), 0);
    assert_eq!(code(&run(tmp.path(), &["init-config", "p.toml"])), 1);
    assert_eq!(code(&run(tmp.path(), &["-c", "p.toml", "eval"])), 0);
}
