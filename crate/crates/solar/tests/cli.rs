use serde_json::Value;
use solar::schema;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn solar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solar")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn signal(dir: &Path, name: &str, xs: &[f64]) -> String {
    let text: String = xs.iter().map(|v| format!("{v}\n")).collect();
    write(dir, name, &text).to_str().unwrap().to_string()
}

const TEN: [f64; 10] = [0.1, 0.3, 0.2, 0.9, 0.8, 0.85, 0.4, 0.3, 0.35, 0.6];

fn validate(schema_text: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(schema_text).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{doc}");
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn gaussian_fit_is_identity_reduction() {
    let dir = tempfile::tempdir().unwrap();
    let data = signal(dir.path(), "x.csv", &TEN);
    let o = solar(&["fit", "--data", &data, "--family", "gaussian", "--penalty", "fused-chain", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json_out(&o);
    validate(schema::FIT_REPORT, &doc);
    assert_eq!(doc["u"], doc["t"]);
    assert_eq!(doc["method"], "taut-string");
    let u = floats(&doc["u"]);
    let mean = TEN.iter().sum::<f64>() / 10.0;
    // λ = 1 exceeds every cumulative-sum deviation: the fit is the mean
    assert!(u.iter().all(|v| (v - mean).abs() < 1e-12));
}

#[test]
fn bernoulli_fused_is_logit_of_taut_string() {
    let dir = tempfile::tempdir().unwrap();
    let data = signal(dir.path(), "x.csv", &TEN);
    let o = solar(&["fit", "--data", &data, "--family", "bernoulli", "--penalty", "fused-chain", "--lambda", "0.1", "--change-points"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json_out(&o);
    validate(schema::FIT_REPORT, &doc);
    let ts = solar::core::taut_string(&TEN, 0.1).unwrap();
    for (t, u) in floats(&doc["t"]).iter().zip(&ts) {
        assert!((t - (u / (1.0 - u)).ln()).abs() < 1e-12);
    }
    // ties in the taut string at 1-based base indices 2, 4, 5, 7, 8
    let cps: Vec<u64> = doc["change_points"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(cps, vec![2, 4, 5, 7, 8]);
}

#[test]
fn invariance_refusal_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = signal(dir.path(), "x.csv", &TEN);
    let o = solar(&["fit", "--data", &data, "--family", "bernoulli", "--penalty", "lasso", "--lambda", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sign-change") && err.contains("permutation"), "{err}");
}

#[test]
fn boundary_solution_exits_3_with_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = signal(dir.path(), "x.csv", &[0.2, 0.5, 1.0, 1.0]);
    let out = dir.path().join("r.json");
    let o = solar(&["fit", "--data", &data, "--family", "bernoulli", "--penalty", "isotonic", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    validate(schema::FIT_REPORT, &doc);
    assert!(doc["t"].is_null());
    assert_eq!(doc["boundary"], serde_json::json!([3, 4]));
}

#[test]
fn io_and_parse_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = solar(&["fit", "--data", missing.to_str().unwrap(), "--penalty", "lasso"]);
    assert_eq!(o.status.code(), Some(1));
    let bad = write(dir.path(), "bad.csv", "1\nfoo\n");
    assert_eq!(solar(&["prox", "--data", bad.to_str().unwrap(), "--penalty", "lasso"]).status.code(), Some(1));
    let data = signal(dir.path(), "x.csv", &TEN);
    assert_eq!(solar(&["fit", "--data", &data, "--penalty", "no-such-penalty"]).status.code(), Some(1));
    assert_eq!(solar(&["fit", "--data", &data, "--penalty", "lasso", "--bogus"]).status.code(), Some(1));
    assert_eq!(solar(&["fit", "--data", &data, "--penalty", "lasso", "--family", "gamma"]).status.code(), Some(1));
    assert_eq!(solar(&["fit", "--data", &data, "--penalty", r#"{"kind":"lasso","n":3}"#]).status.code(), Some(1));
    assert_eq!(solar(&["fit", "--data", &data, "--penalty", "nope.json"]).status.code(), Some(1));
    assert_eq!(
        solar(&["verify", "--data", missing.to_str().unwrap(), "--penalty", "lasso"]).status.code(),
        Some(1)
    );
    assert_eq!(solar(&["--help"]).status.code(), Some(0));
}

#[test]
fn analyze_group_examples() {
    let cases = [("lasso", "3", Some(8u64), "finite"), ("fused-chain", "4", Some(24), "finite"), ("trend-filter", "4", None, "infinite")];
    for (pen, n, order, verdict) in cases {
        let o = solar(&["analyze-group", "--penalty", pen, "--n", n]);
        assert_eq!(o.status.code(), Some(0));
        let doc = json_out(&o);
        validate(schema::GROUP_REPORT, &doc);
        assert_eq!(doc["verdict"], verdict, "{pen}");
        assert_eq!(doc["order"].as_u64(), order, "{pen}");
        match order {
            Some(k) => assert_eq!(doc["elements"].as_array().unwrap().len() as u64, k),
            None => assert!(doc.get("elements").is_none()),
        }
    }
    let o = solar(&["analyze-group", "--penalty", "trend-filter", "--n", "4"]);
    let doc = json_out(&o);
    assert!((doc["angles"][0]["cos"].as_f64().unwrap() + 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn large_group_omits_elements() {
    let o = solar(&["analyze-group", "--penalty", "fused-chain", "--n", "7"]);
    let doc = json_out(&o);
    validate(schema::GROUP_REPORT, &doc);
    assert_eq!(doc["order"].as_u64(), Some(5040));
    assert!(doc.get("elements").is_none());
}

#[test]
fn group_from_spec_file_and_edge_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "p.json", r#"{"kind": "fused-graph", "n": 4, "lambda": 1.0, "edges": [[1, 2], [3, 4]]}"#);
    let spec_doc: Value = serde_json::from_str(&std::fs::read_to_string(&spec).unwrap()).unwrap();
    validate(schema::PENALTY_SPEC, &spec_doc);
    let doc = json_out(&solar(&["analyze-group", "--penalty", spec.to_str().unwrap()]));
    // two components of size 2: order 2·2
    assert_eq!(doc["order"].as_u64(), Some(4));
    let edges = write(dir.path(), "e.csv", "1,2\n2,3\n3,4\n");
    let doc = json_out(&solar(&["analyze-group", "--penalty", spec.to_str().unwrap(), "--edges", edges.to_str().unwrap()]));
    assert_eq!(doc["order"].as_u64(), Some(24));
}

#[test]
fn prox_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[f64], &str, &str, &[f64]); 3] = [
        (&[3.0, -0.5, 1.5], "lasso", "1", &[2.0, 0.0, 0.5]),
        (&[3.0, 1.0, 2.0], "isotonic-chain", "0", &[2.0, 2.0, 2.0]),
        (&[0.0, 2.0], "fused-chain", "0.5", &[0.5, 1.5]),
    ];
    for (x, pen, lam, want) in cases {
        let data = signal(dir.path(), "x.csv", x);
        for method in ["auto", "dual-cd"] {
            let o = solar(&["prox", "--data", &data, "--penalty", pen, "--lambda", lam, "--method", method]);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
            let doc = json_out(&o);
            validate(schema::PROX, &doc);
            for (u, w) in floats(&doc["u"]).iter().zip(want) {
                assert!((u - w).abs() < 1e-9, "{pen} {method}: {u} vs {w}");
            }
        }
    }
}

#[test]
fn trace_csv_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let data = signal(dir.path(), "x.csv", &TEN);
    let trace = dir.path().join("t.csv");
    let o = solar(&["fit", "--data", &data, "--penalty", "fused-chain", "--lambda", "0.05", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["method"], "dual-cd");
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sweep,j,alpha_old,alpha_new,c,norm_y"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.len() == 6 && r[1] >= 1.0 && r[1] <= 9.0 && r[4] >= -1e-9 && r[4] <= 1.0 + 1e-9));
    // the trace needs dual-cd
    let o = solar(&["fit", "--data", &data, "--penalty", "fused-chain", "--method", "taut-string", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fit_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let x: Vec<f64> = (0..50).map(|i| ((i * 37 % 11) as f64 / 11.0) * 0.8 + 0.1).collect();
    let data = signal(dir.path(), "x.csv", &x);
    let args = ["fit", "--data", &data, "--family", "poisson", "--penalty", "nearly-isotonic", "--lambda", "0.3", "--shuffle", "--seed", "7"];
    let a = solar(&args);
    let b = solar(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_passes_and_catches_perturbation() {
    let o = Command::new(env!("CARGO_BIN_EXE_solar")).args(["verify"]).env("SOLAR_OPT_THREADS", "2").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json_out(&o);
    validate(schema::VERIFY_REPORT, &doc);
    assert_eq!(doc["passed"], true);
    assert!(doc["threads"].as_u64().unwrap() <= 2);
    assert_eq!(doc["seeds"], serde_json::json!([1, 2, 3]));

    let o = solar(&["verify", "--perturb", "0.01", "--seeds", "1"]);
    assert_eq!(o.status.code(), Some(4));
    let doc = json_out(&o);
    let failed: Vec<&str> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"g-minimality"), "{failed:?}");
}

#[test]
fn verify_report_is_thread_independent() {
    let run = |t: &str| {
        Command::new(env!("CARGO_BIN_EXE_solar"))
            .args(["verify", "--seeds", "4,5", "--format", "csv"])
            .env("SOLAR_OPT_THREADS", t)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn verify_with_user_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = signal(dir.path(), "x.csv", &[0.3, -1.0, 2.0, 0.5]);
    let o = solar(&["verify", "--seeds", "1", "--data", &data, "--penalty", "fused-chain", "--lambda", "0.4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json_out(&o);
    let names: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"data:moreau-fenchel") && names.contains(&"data:g-minimality"));
}
