use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use cubic_moments::characters::{FamilyContext, FamilySpec};
use cubic_moments::cli::{run, Cli, EXIT_BUDGET, EXIT_CHECK_FAILED, EXIT_INVALID_CONFIG, EXIT_OK};
use cubic_moments::moments::Store;
use serde_json::Value;

fn cli(args: &[&str]) -> u8 {
    let mut argv = vec!["cubic-moments"];
    argv.extend_from_slice(args);
    run(&Cli::parse_from(argv))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schema").join(format!("{name}.v1.schema.json"))
}

fn assert_valid(name: &str, instance: &Value) {
    let schema = read_json(&schema_path(name));
    let v = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

/// Every file under `dir` with its bytes and modification time.
fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>, std::time::SystemTime)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let meta = fs::metadata(&p).unwrap();
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap(), meta.modified().unwrap()));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn invalid_configs_are_rejected() {
    assert_eq!(cli(&["verify", "--q", "7", "--g", "2"]), EXIT_INVALID_CONFIG);
    assert_eq!(cli(&["verify", "--q", "5", "--g", "3"]), EXIT_INVALID_CONFIG);
    assert_eq!(cli(&["family-count", "--q", "6"]), EXIT_INVALID_CONFIG);
    assert_eq!(cli(&["verify", "--q", "5", "--g", "2", "--A", "9"]), EXIT_INVALID_CONFIG);
    assert_eq!(cli(&["aq-eval", "--q", "5", "--tol", "0"]), EXIT_INVALID_CONFIG);
}

#[test]
fn budget_refusal() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["sweep", "--q", "11", "--g", "4", "--cache-dir", s(dir.path())]), EXIT_BUDGET);
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn sweep_is_deterministic_and_idempotent() {
    let root = tempfile::tempdir().unwrap();
    let mut trees = Vec::new();
    for jobs in ["1", "4"] {
        let cache = root.path().join(format!("cache{jobs}"));
        let out = cache.join("stdout.json");
        let csv = cache.join("stdout.csv");
        let base = ["sweep", "--q", "5", "--g", "2", "--jobs", jobs, "--cache-dir", s(&cache)];
        assert_eq!(cli(&[&base[..], &["--out", s(&out)]].concat()), EXIT_OK);
        assert_eq!(cli(&[&base[..], &["--out", s(&csv), "--format", "csv"]].concat()), EXIT_OK);
        trees.push(snapshot(&cache));
    }
    let strip = |t: &[(PathBuf, Vec<u8>, std::time::SystemTime)]| t.iter().map(|(p, b, _)| (p.clone(), b.clone())).collect::<Vec<_>>();
    assert_eq!(strip(&trees[0]), strip(&trees[1]));
    assert_eq!(trees[0].len(), 5);

    let cache = root.path().join("cache1");
    std::thread::sleep(std::time::Duration::from_millis(20));
    for extra in [&[][..], &["--jobs", "4"][..]] {
        let out = cache.join("stdout.json");
        let args = [&["sweep", "--q", "5", "--g", "2", "--cache-dir", s(&cache), "--out", s(&out)][..], extra].concat();
        assert_eq!(cli(&args), EXIT_OK);
        assert_eq!(snapshot(&cache), trees[0]);
    }

    let report = read_json(&cache.join("q5_g2/report.json"));
    assert_valid("report", &report);
    assert_eq!(report, read_json(&cache.join("stdout.json")));
    assert_eq!(report["family_count"], 480);
    assert_eq!(report["second_moment"], serde_json::json!(["192/1", "0/1", "192/1", "0/1"]));
    assert_valid("sterms", &read_json(&cache.join("q5_g2/sterms.json")));
    let csv = fs::read_to_string(cache.join("stdout.csv")).unwrap();
    let head = csv.lines().next().unwrap();
    assert!(head.starts_with("t,t0,t1,prin_1,prin_w,prin_s,prin_ws,cube_1,"));
    assert!(head.ends_with(",dual_ws,noncube_ratio_approx"));
    assert_eq!(csv.lines().count(), 1 + 4);
}

#[test]
fn corrupt_cache_is_reported() {
    let root = tempfile::tempdir().unwrap();
    let cache = root.path();
    assert_eq!(cli(&["sweep", "--q", "5", "--g", "0", "--cache-dir", s(cache)]), EXIT_OK);
    let records = cache.join("q5_g0/characters.txt");
    let mut lines: Vec<String> = fs::read_to_string(&records).unwrap().lines().map(String::from).collect();
    lines[2] = "not a record".into();
    fs::write(&records, lines.join("\n") + "\n").unwrap();
    assert_eq!(cli(&["sweep", "--q", "5", "--g", "0", "--cache-dir", s(cache)]), EXIT_CHECK_FAILED);
    let spec = FamilySpec::new(5, 0).unwrap();
    let err = Store::new(cache, spec).load_records(&FamilyContext::new(spec).unwrap()).unwrap_err();
    assert!(err.to_string().contains("characters.txt:3:"), "{err}");
}

#[test]
fn small_commands_emit_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = |n: &str| dir.path().join(n);

    assert_eq!(cli(&["family-count", "--q", "5", "--g", "2", "--out", s(&out("fc.json"))]), EXIT_OK);
    let fc = read_json(&out("fc.json"));
    assert_valid("family-count", &fc);
    assert_eq!((fc["family_count"].as_u64(), fc["prefilter_count"].as_u64(), fc["split_pairs"].as_u64()), (Some(480), Some(490), Some(10)));

    assert_eq!(cli(&["aq-eval", "--q", "5", "--tol", "1e-8", "--out", s(&out("aq.json"))]), EXIT_OK);
    let aq = read_json(&out("aq.json"));
    assert_valid("aq-eval", &aq);
    assert!(aq["enclosure_width"].as_f64().unwrap() < 1e-8);
    assert!(aq["lower"].as_f64().unwrap() <= aq["upper"].as_f64().unwrap());

    assert_eq!(cli(&["gauss-table", "--q", "5", "--format", "json", "--out", s(&out("gt.json"))]), EXIT_OK);
    let gt = read_json(&out("gt.json"));
    assert_valid("gauss-table", &gt);
    assert!(gt["rows"].as_array().unwrap().iter().all(|r| r["matches_direct"] == true));

    assert_eq!(cli(&["verify", "--q", "5", "--g", "0", "--out", s(&out("v.json"))]), EXIT_OK);
    assert_valid("verify", &read_json(&out("v.json")));

    let cache = out("cache");
    assert_eq!(cli(&["sweep", "--q", "5", "--g", "0", "--cache-dir", s(&cache), "--out", s(&out("sw.json"))]), EXIT_OK);
    assert_eq!(cli(&["export", "--what", "sterms", "--q", "5", "--g", "0", "--cache-dir", s(&cache), "--out", s(&out("st.json"))]), EXIT_OK);
    assert_valid("sterms", &read_json(&out("st.json")));
    assert_eq!(cli(&["export", "--what", "report", "--q", "5", "--g", "0", "--cache-dir", s(&cache), "--out", s(&out("rp.json"))]), EXIT_OK);
    assert_eq!(read_json(&out("rp.json")), read_json(&out("sw.json")));
}

#[test]
fn schemas_reject_inexact_values() {
    let bad = serde_json::json!({
        "schema": "cubic-moments/family-count/v1", "q": 5, "g": 2, "family_count": 480,
        "prefilter_count": 490, "conjugate_pairs": 10, "split_pairs": 10,
        "family_count_closed_form": "480.0", "split_pairs_closed_form": "10/1"
    });
    let v = jsonschema::validator_for(&read_json(&schema_path("family-count"))).unwrap();
    assert!(!v.is_valid(&bad));
}
