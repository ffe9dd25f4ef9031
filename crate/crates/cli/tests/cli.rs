use std::path::PathBuf;
use std::process::{Command, Output};

use cachekit::caching::yma_load;
use cachekit::converse::{general_lp_bound, GeneralInstance, LoadMode};
use cachekit::scalar::{int, parse_rational, rat};
use cachekit::Rational;
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn cachekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cachekit"))
        .args(args)
        .env_remove("CACHEKIT_MAX_LPS")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = cachekit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn exact(v: &Value) -> Rational {
    let r = parse_rational(v["exact"].as_str().expect("exact field")).unwrap();
    let decimal = v["decimal"].as_f64().expect("decimal field");
    assert!((cachekit::scalar::to_f64(&r) - decimal).abs() < 1e-12);
    r
}

fn corners(v: &Value) -> Vec<(Rational, Rational)> {
    v["results"]["corners"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (exact(&c["memory"]), exact(&c["load"])))
        .collect()
}

#[test]
fn bound_corners_for_three_by_three_csv() {
    let out = cachekit(&["tradeoff", "--N", "3", "--K", "3", "--scheme", "bound", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "memory_num,memory_den,load_num,load_den,load_decimal\n\
         0,1,3,1,3\n\
         1,1,1,1,1\n\
         2,1,1,3,0.3333333333333333\n\
         3,1,0,1,0\n"
    );
}

#[test]
fn man_and_yma_share_corners_when_files_suffice() {
    let man = corners(&report(&["tradeoff", "--N", "3", "--K", "3", "--scheme", "man"]));
    let yma = corners(&report(&["tradeoff", "--N", "3", "--K", "3", "--scheme", "yma"]));
    assert_eq!(man, yma);
    assert_eq!(
        yma,
        vec![(int(0), int(3)), (int(1), int(1)), (int(2), rat(1, 3)), (int(3), int(0))]
    );
}

#[test]
fn bound_and_yma_agree_corner_for_corner() {
    for n in 1..=4 {
        for k in 1..=4 {
            let (n_s, k_s) = (n.to_string(), k.to_string());
            let b = corners(&report(&["tradeoff", "--N", &n_s, "--K", &k_s, "--scheme", "bound"]));
            let y = corners(&report(&["tradeoff", "--N", &n_s, "--K", &k_s, "--scheme", "yma"]));
            assert_eq!(b, y, "N={n} K={k}");
        }
    }
}

#[test]
fn yma_corner_with_scarce_files() {
    let c = corners(&report(&["tradeoff", "--N", "2", "--K", "4"]));
    assert_eq!(c[1], (rat(1, 2), yma_load::<Rational>(2, 4, 1)));
    assert_eq!(c[1].1, rat(5, 4));
}

#[test]
fn simulate_reports() {
    let r = report(&["simulate", "--N", "3", "--K", "3", "--t", "1", "--demand", "1,2,3"]);
    assert_eq!(r["results"]["success"], true);
    assert_eq!(exact(&r["results"]["load"]), int(1));

    let r = report(&["simulate", "--N", "3", "--K", "3", "--t", "3", "--demand", "1,2,3"]);
    assert_eq!(r["results"]["transmissions"], 0);

    let r = report(&[
        "simulate", "--N", "2", "--K", "4", "--t", "1", "--demand", "1,2,1,2", "--scheme", "yma",
    ]);
    assert_eq!(r["results"]["payload_units"], 5);
}

#[test]
fn simulate_rejects_bad_demands() {
    for demand in ["1,2", "1,2,4", "0,1,2"] {
        let out = cachekit(&["simulate", "--N", "3", "--K", "3", "--t", "1", "--demand", demand]);
        assert_eq!(out.status.code(), Some(2), "{demand}");
    }
}

#[test]
fn bound_values() {
    let r = report(&["bound", "--N", "3", "--K", "3", "--M", "1"]);
    assert_eq!(exact(&r["results"]["bound"]), int(1));
    let r = report(&["bound", "--N", "3", "--K", "3", "--M", "3"]);
    assert_eq!(exact(&r["results"]["bound"]), int(0));

    let r = report(&["bound", "--N", "2", "--K", "2", "--M", "1/2", "--mode", "average"]);
    let g = GeneralInstance::symmetric(2, 2, rat(1, 2), LoadMode::Average).unwrap();
    let lp = general_lp_bound(&g, Default::default()).unwrap().value;
    assert_eq!(exact(&r["results"]["bound"]), lp);
}

#[test]
fn bound_general_instance() {
    let r = report(&["bound", "--general", &fixture("general_2x2.json")]);
    let g = GeneralInstance::new(vec![rat(1, 2), int(1)], vec![int(1), int(1)], LoadMode::Worst, None).unwrap();
    assert_eq!(exact(&r["results"]["lp_bound"]), general_lp_bound(&g, Default::default()).unwrap().value);
}

#[test]
fn lp_cap_exits_three() {
    let out = cachekit(&["bound", "--N", "5", "--K", "5", "--M", "1", "--mode", "worst"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cachekit(&["tradeoff", "--N", "3"]).status.code(), Some(2));
    assert_eq!(cachekit(&["bound", "--N", "3", "--K", "3", "--M", "4"]).status.code(), Some(2));
    assert_eq!(cachekit(&["bound", "--N", "3", "--K", "3", "--M", "x"]).status.code(), Some(2));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = std::env::temp_dir().join(format!("cachekit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases = [
        (r#"{"messages": 2, "users": [{"demand": [1]}, {"demand": [3]}]}"#, "$.users[1].demand[0]"),
        (r#"{"messages": 2, "users": [{"demand": [1], "side": [1]}]}"#, "$.users[0].side"),
        (r#"{"messages": 2}"#, "$.users"),
        (r#"{"messages": 2, "lengths": [1], "users": [{"demand": [1]}]}"#, "$.lengths"),
        (r#"{"messages": 2, "users": [{"demand": [1], "extra": 1}]}"#, "$.users[0].extra"),
    ];
    for (i, (text, path)) in cases.iter().enumerate() {
        let f = dir.join(format!("bad{i}.json"));
        std::fs::write(&f, text).unwrap();
        let out = cachekit(&["ic", "graph", "--instance", f.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(&format!("{path}:")), "{err} lacks {path}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn novel_certificate_on_example1() {
    let r = report(&[
        "ic", "novel", "--instance", &fixture("example1.json"), "--spec", &fixture("example1_spec.json"),
    ]);
    assert_eq!(r["results"]["feasible"], true);
    assert_eq!(exact(&r["results"]["rate"]), rat(1, 3));
    assert_eq!(r["results"]["budgets"], serde_json::json!([3, 3, 3, 3, 3, 3]));
}

#[test]
fn oracle_and_graph_on_example1() {
    let r = report(&["ic", "oracle", "--instance", &fixture("example1.json"), "--max-tx", "3"]);
    assert_eq!(exact(&r["results"]["rate"]), rat(1, 3));
    let r = report(&["ic", "graph", "--instance", &fixture("example1.json")]);
    assert_eq!(exact(&r["results"]["acyclic_bound"]), int(3));
    assert_eq!(exact(&r["results"]["rate_bound"]), rat(1, 3));
}

#[test]
fn composite_matches_library() {
    let path = fixture("n3k3_t1_reduction.json");
    let r = report(&["ic", "composite", "--instance", &path]);
    let text = std::fs::read_to_string(&path).unwrap();
    let ic = cachekit_cli::json::parse_instance(&serde_json::from_str(&text).unwrap()).unwrap();
    let lib = cachekit::icschemes::composite_symmetric_rate(&ic, cachekit::icschemes::DEFAULT_MAX_LPS).unwrap();
    assert_eq!(exact(&r["results"]["rate"]), lib.rate);
}

#[test]
fn composite_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cachekit"))
        .args(["ic", "composite", "--instance", &fixture("example1.json")])
        .env("CACHEKIT_MAX_LPS", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeding the limit of 10"));
}

#[test]
fn reduction_fixture_is_current() {
    let out = cachekit(&["ic", "reduce", "--N", "3", "--K", "3", "--t", "1", "--demand", "1,2,3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), std::fs::read_to_string(fixture("n3k3_t1_reduction.json")).unwrap());
}

#[test]
fn reports_are_deterministic() {
    let args = ["simulate", "--N", "2", "--K", "3", "--t", "1", "--demand", "1,2,2", "--seed", "9"];
    assert_eq!(cachekit(&args).stdout, cachekit(&args).stdout);
    assert!(report(&args).get("timing_ms").is_none());
    let mut timed = args.to_vec();
    timed.push("--timing");
    assert!(report(&timed)["timing_ms"].is_number());
}
