use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wglab(args: &[&str]) -> Output {
    wglab_env(args, None)
}

fn wglab_env(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wglab"));
    cmd.args(args).env_remove("WGLAB_WORKERS");
    if let Some(w) = workers {
        cmd.env("WGLAB_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

struct Csv {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    trailer: Vec<(String, String)>,
}

impl Csv {
    fn parse(text: &str) -> Csv {
        let mut meta = Vec::new();
        let mut trailer = Vec::new();
        let mut body = Vec::new();
        for line in text.lines() {
            if let Some(kv) = line.strip_prefix("# ") {
                let (k, v) = kv.split_once('=').unwrap();
                let pair = (k.to_string(), v.to_string());
                if body.is_empty() {
                    meta.push(pair);
                } else {
                    trailer.push(pair);
                }
            } else {
                body.push(line.split(',').map(str::to_string).collect::<Vec<_>>());
            }
        }
        let header = body.remove(0);
        Csv { meta, header, rows: body, trailer }
    }

    fn meta(&self, key: &str) -> &str {
        &self.meta.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key}")).1
    }

    fn trail(&self, key: &str) -> &str {
        &self.trailer.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key}")).1
    }

    fn col(&self, row: usize, name: &str) -> f64 {
        let i = self.header.iter().position(|h| h == name).unwrap();
        self.rows[row][i].parse().unwrap()
    }
}

#[test]
fn interval_example() {
    let o = wglab(&["interval", "--N", "1000000", "--H", "10000", "--k", "2,2,2"]);
    assert!(o.status.success());
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.rows.len(), 1);
    assert!((csv.col(0, "main_term") - 7.853_981_633_974_483e6).abs() < 1e-3);
    let rel = (csv.col(0, "sum_unweighted") - csv.col(0, "main_term")) / csv.col(0, "main_term");
    assert!((csv.col(0, "rel_err") - rel).abs() < 1e-12);
    assert_eq!(csv.meta("k"), "2,2,2");
    assert_eq!(csv.meta("workers"), "1");
}

#[test]
fn identity_example() {
    let o = wglab(&["identity", "--N", "500", "--H", "20", "--k", "2,2,2", "--tolerance", "1e-6"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = Csv::parse(&stdout(&o));
    assert!(csv.col(0, "diff") <= 1e-6);
    assert_eq!(csv.rows[0][csv.header.iter().position(|h| h == "passed").unwrap()], "true");
}

#[test]
fn mt_lemma_example() {
    let o = wglab(&["lemma", "mt", "--N", "1000", "--H", "10", "--lambda", "0"]);
    assert!(o.status.success());
    let csv = Csv::parse(&stdout(&o));
    assert!((csv.col(0, "exact_sum") - 3.658_631_674_157_504).abs() < 1e-12);
    assert!((csv.col(0, "model") - 3.678_794_411_714_423).abs() < 1e-12);
}

#[test]
fn scan_columns_and_trend() {
    let o = wglab(&["scan", "--grid", "1e4,1e5,1e6", "--theta", "0.7", "--k", "2,2,2"]);
    assert!(o.status.success());
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(
        csv.header,
        [
            "N", "H", "k1", "k2", "k3", "sum_unweighted", "sum_weighted", "main_term", "weighted_main_term",
            "rel_err", "rel_err_weighted", "A_ratio", "phi", "in_uncond_window", "wall_ms"
        ]
    );
    assert_eq!(csv.rows.len(), 3);
    let errs: Vec<f64> = (0..3).map(|i| csv.col(i, "rel_err").abs()).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    assert_eq!(csv.trail("trend_strictly_decreasing"), decreasing.to_string());
    assert_eq!(csv.trail("failed_rows"), "0");
    assert_eq!(csv.col(2, "H"), 15848.0);
}

#[test]
fn scan_default_theta_sits_inside_the_window() {
    let o = wglab(&["scan", "--grid", "1000:100000:10"]);
    assert!(o.status.success());
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.rows.len(), 3);
    let theta: f64 = csv.meta("theta_used").parse().unwrap();
    assert!(theta > 7.0 / 12.0 + 0.01 && theta < 0.99);
}

#[test]
fn scan_edge_cases() {
    let o = wglab(&["scan", "--grid", ""]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["condition"], "grid-nonempty");

    let o = wglab(&["scan", "--grid", "5000", "--H", "50"]);
    assert!(o.status.success());
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.trail("trend_strictly_decreasing"), "not-applicable");
    assert_eq!(csv.trail("trend_log_log_slope"), "not-applicable");

    let o = wglab(&["scan", "--grid", "2,1000,3000", "--H", "30"]);
    assert_eq!(o.status.code(), Some(1));
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.rows.len(), 2);
    assert_eq!(csv.trail("failed_rows"), "1");
    assert_eq!(stderr_json(&o)["error"]["kind"], "check-failed");
}

#[test]
fn errors_are_json_records() {
    let cases: [(&[&str], &str); 5] = [
        (&["interval", "--N", "1000"], "H-required"),
        (&["decompose", "--N", "500", "--H", "20", "--B", "11"], "B-range"),
        (&["interval", "--N", "1000", "--H", "10", "--k", "3,2,2"], "k-ordered"),
        (&["interval", "--N", "1000", "--H", "10", "--epsilon", "0.2"], "epsilon-range"),
        (&["lemma", "laplace", "--N", "100", "--mu", "1", "--X", "0.75"], "X-range"),
    ];
    for (args, condition) in cases {
        let o = wglab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
        let e = stderr_json(&o);
        assert_eq!(e["error"]["kind"], "invalid-argument");
        assert_eq!(e["error"]["condition"], condition, "{args:?}");
    }
    let o = wglab(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["condition"], "command-line");
}

fn strip_timing(text: &str) -> String {
    let csv = Csv::parse(text);
    let wall = csv.header.iter().position(|h| h == "wall_ms");
    let mut out = String::new();
    for (k, v) in &csv.meta {
        if k != "timestamp" && k != "wall_ms" {
            out.push_str(&format!("{k}={v}\n"));
        }
    }
    for row in std::iter::once(&csv.header).chain(&csv.rows) {
        let kept: Vec<&str> = row
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != wall)
            .map(|(_, c)| c.as_str())
            .collect();
        out.push_str(&kept.join(","));
        out.push('\n');
    }
    for (k, v) in &csv.trailer {
        out.push_str(&format!("{k}={v}\n"));
    }
    out
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--out", &p]);
    let o = wglab(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    fs::read_to_string(path).unwrap()
}

#[test]
fn reruns_reproduce_outside_timing_fields() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["scan", "--grid", "1e4,3e4,1e5", "--workers", "3"],
        &["interval", "--N", "20000", "--H", "400", "--k", "2,2,3", "--per-n", "--workers", "2"],
        &["decompose", "--N", "200", "--H", "10", "--B", "2", "--workers", "4"],
        &["lemma", "tolev", "--N", "1000", "--tau", "0.03", "--workers", "2"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = run_to(dir.path(), &format!("a{i}.csv"), args);
        let b = run_to(dir.path(), &format!("b{i}.csv"), args);
        assert_eq!(strip_timing(&a), strip_timing(&b), "{args:?}");
    }
}

#[test]
fn json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["scan", "--grid", "1e4,1e5", "--theta", "0.6"];
    let csv = Csv::parse(&run_to(dir.path(), "s.csv", &args));
    let mut jargs = args.to_vec();
    jargs.extend(["--format", "json"]);
    let json: Value = serde_json::from_str(&run_to(dir.path(), "s.json", &jargs)).unwrap();
    let cols: Vec<&str> = json["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(cols, csv.header);
    assert_eq!(json["rows"].as_array().unwrap().len(), csv.rows.len());
    for (i, row) in json["rows"].as_array().unwrap().iter().enumerate() {
        for (j, name) in csv.header.iter().enumerate() {
            let cell = &csv.rows[i][j];
            match &row[name] {
                Value::Number(n) => assert_eq!(n.as_f64().unwrap(), cell.parse::<f64>().unwrap(), "{name}"),
                Value::Bool(b) => assert_eq!(b.to_string(), *cell),
                other => panic!("unexpected {other}"),
            }
        }
    }
    for (k, v) in &csv.meta {
        if k != "format" && k != "timestamp" && k != "wall_ms" {
            assert_eq!(json["metadata"][k], Value::String(v.clone()), "{k}");
        }
    }
    for (k, v) in &csv.trailer {
        assert_eq!(json["trailer"][k], Value::String(v.clone()));
    }
}

#[test]
fn worker_count_sources() {
    let o = wglab_env(&["count", "--N", "17"], Some("3"));
    assert_eq!(Csv::parse(&stdout(&o)).meta("workers"), "3");
    let o = wglab_env(&["count", "--N", "17", "--workers", "5"], Some("3"));
    assert_eq!(Csv::parse(&stdout(&o)).meta("workers"), "5");
    let o = wglab_env(&["count", "--N", "17"], Some("many"));
    assert_eq!(stderr_json(&o)["error"]["condition"], "workers-env-integer");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# identity run\nN=500\nH=20\nk=2,2,2\ntolerance=1e-6\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = wglab(&["identity", "--config", cfg]);
    assert!(o.status.success());
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.col(0, "H"), 20.0);
    let o = wglab(&["identity", "--config", cfg, "--H", "10"]);
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.col(0, "H"), 10.0);
    assert_eq!(csv.meta("N"), "500");
}

#[test]
fn count_and_lemmas_run() {
    let o = wglab(&["count", "--N", "17", "--k", "2,2,2"]);
    let csv = Csv::parse(&stdout(&o));
    assert!((csv.col(0, "R") - 1.583_494_755_654_499).abs() < 1e-12);

    let o = wglab(&["lemma", "parseval", "--N", "1000", "--k", "2"]);
    assert!(Csv::parse(&stdout(&o)).col(0, "relative_difference") <= 1e-8);

    let o = wglab(&["lemma", "laplace", "--N", "100", "--mu", "1", "--X", "0.5"]);
    let csv = Csv::parse(&stdout(&o));
    assert!((csv.col(0, "integral") - 0.366_866_239_600_065_3).abs() < 1e-10);

    let o = wglab(&["lemma", "lp", "--N", "10000", "--k", "2", "--xi", "0.001"]);
    assert!(Csv::parse(&stdout(&o)).col(0, "ratio_rh").is_finite());

    let o = wglab(&["lemma", "lp", "--N", "1000", "--xi", "0"]);
    assert_eq!(Csv::parse(&stdout(&o)).col(0, "error_integral"), 0.0);

    let o = wglab(&["lemma", "weighted-l2", "--N", "1000", "--tau", "0.05"]);
    assert!(Csv::parse(&stdout(&o)).col(0, "ratio_weighted") > 0.0);
}
