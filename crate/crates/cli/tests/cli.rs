use std::fs;
use std::process::{Command, Output};

fn besov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besov")).args(args).env_remove("BESOV_JOBS").output().expect("run besov")
}

const FN: &str = "f_power_log:mu=0.5,delta=0";
const SPACE: &str = "n=1,p=2,q=2,alpha=0,s=0.5";

#[test]
fn sweep_csv_header_and_rows() {
    let out = besov(&[
        "sweep", "--fn", FN, "--space", SPACE, "--axis", "s", "--from", "0.6", "--to", "1.4", "--steps", "2", "--method",
        "fourier", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis,value,slope,verdict,predicted,agree");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("s,0.6,"));
    assert!(lines[1].ends_with(",true,true"));
    assert!(lines[2].starts_with("s,1.4,"));
    assert!(lines[2].ends_with("divergent,false,true"));
}

#[test]
fn norm_json_has_stable_keys() {
    let out = besov(&["norm", "--fn", FN, "--space", SPACE, "--method", "fourier", "--format", "json", "--j-max", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["function", "params", "method", "numerics", "summands", "base_norm", "verdict", "predicted", "agree"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["class", "slope", "power_exponent", "finite"] {
        assert!(v["verdict"].get(key).is_some(), "missing verdict.{key}");
    }
    assert_eq!(v["summands"].as_array().unwrap().len(), 21);
    assert!(v["summands"][0].get("index").is_some() && v["summands"][0].get("value").is_some());
    assert_eq!(v["numerics"]["j_max"], 20);
}

#[test]
fn exit_codes() {
    let bad_params = besov(&["norm", "--fn", FN, "--space", "n=1,p=0.5,q=2,alpha=0,s=1"]);
    assert_eq!(bad_params.status.code(), Some(2));
    let bad_fn = besov(&["norm", "--fn", "no_such_function", "--space", SPACE]);
    assert_eq!(bad_fn.status.code(), Some(2));
    let bad_axis = besov(&["sweep", "--fn", FN, "--space", SPACE, "--axis", "zeta", "--from", "0", "--to", "1", "--steps", "3"]);
    assert_eq!(bad_axis.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_axis.stderr).contains("zeta"));
    let order = besov(&["norm", "--fn", FN, "--space", "n=1,p=2,q=2,alpha=0,s=2.5", "--order", "2"]);
    assert_eq!(order.status.code(), Some(2));
    let spectral = besov(&["norm", "--fn", "f_oscillatory:delta=1,beta=1,mu=0.5", "--space", SPACE, "--method", "fourier"]);
    assert_eq!(spectral.status.code(), Some(1));
}

#[test]
fn config_file_and_output_path() {
    let dir = std::env::temp_dir().join(format!("besov-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("numerics.json");
    fs::write(&cfg, r#"{"j_max": 12, "points_per_annulus": 32}"#).unwrap();
    let out_path = dir.join("norm.json");
    let out = besov(&[
        "norm", "--fn", FN, "--space", SPACE, "--method", "fourier", "--format", "json", "--config",
        cfg.to_str().unwrap(), "--output", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["numerics"]["j_max"], 12);
    assert_eq!(v["numerics"]["points_per_annulus"], 32);

    fs::write(&cfg, r#"{"j_maximum": 12}"#).unwrap();
    let bad = besov(&["norm", "--fn", FN, "--space", SPACE, "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn predictions() {
    let out = besov(&["predict", "--fn", FN, "--space", "n=1,p=2,q=inf,alpha=0,s=1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["predicted"], true);

    let out = besov(&[
        "predict", "--source", "n=1,p=2,q=2,alpha=0,s=1", "--target", "n=1,p=4,q=2,alpha=0,s=0.5", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["holds"], true);
    assert_eq!(v["differential_gap"], -0.25);
}

#[test]
fn verify_embeddings_passes() {
    let out = besov(&["verify", "embeddings"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.trim_end().ends_with("pass"));
    assert!(!text.contains("disagree"));
}

#[test]
fn jobs_from_environment() {
    let run = |jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_besov"))
            .args(["sweep", "--fn", FN, "--space", SPACE, "--axis", "s", "--from", "0.2", "--to", "1.8", "--steps", "5"])
            .args(["--method", "fourier", "--format", "json"])
            .env("BESOV_JOBS", jobs)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
