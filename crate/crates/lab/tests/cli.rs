use std::path::Path;
use std::process::{Command, Output};
use swe_lab::output::{derived_key, Manifest};
use swe_lab::{Experiment, RunConfig};

const BIN: &str = env!("CARGO_BIN_EXE_swe-lab");

fn swe_lab(args: &[&str], out: &Path, workers: Option<&str>) -> Output {
    let mut c = Command::new(BIN);
    c.args(args).arg("--out").arg(out);
    match workers {
        Some(w) => c.env("SWE_LAB_WORKERS", w),
        None => c.env_remove("SWE_LAB_WORKERS"),
    };
    c.output().unwrap()
}

const SMALL_CONVERGE: [&str; 9] = [
    "converge",
    "--override",
    "grid.n_list=[8, 16, 32]",
    "--override",
    "run.samples=4",
    "--override",
    "time.dt=0.015625",
    "--override",
    "time.t_end=0.25",
];

#[test]
fn converge_table_has_one_row_per_level_and_sample() {
    let dir = tempfile::tempdir().unwrap();
    let o = swe_lab(&SMALL_CONVERGE, dir.path(), None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("converge.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["N[mode]", "sample[index]", "D_N[H^-delta norm]", "median_D_N[H^-delta norm]"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 2 * 4);
    for n in ["8", "16"] {
        let mut d: Vec<f64> = rows.iter().filter(|x| &x[0] == n).map(|x| x[2].parse().unwrap()).collect();
        d.sort_by(f64::total_cmp);
        let med: f64 = rows.iter().find(|x| &x[0] == n).unwrap()[3].parse().unwrap();
        assert_eq!(med, 0.5 * (d[1] + d[2]));
    }
}

#[test]
fn reruns_are_bit_identical_for_any_worker_count() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(swe_lab(&SMALL_CONVERGE, a.path(), Some("1")).status.success());
    assert!(swe_lab(&SMALL_CONVERGE, b.path(), Some("3")).status.success());
    for t in ["converge.csv", "converge_diagnostics.csv"] {
        assert_eq!(std::fs::read(a.path().join(t)).unwrap(), std::fs::read(b.path().join(t)).unwrap(), "{t}");
    }
    let (ma, mb) = (Manifest::read(a.path()).unwrap(), Manifest::read(b.path()).unwrap());
    assert_eq!((ma.workers, mb.workers), (1, 3));
    assert_eq!(ma.summary, mb.summary);
}

#[test]
fn invalid_radius_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = swe_lab(&["simulate", "--override", "grid.radius=5"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "validation");
    let msg = err["error"]["messages"][0].as_str().unwrap();
    assert!(msg.contains("grid.radius") && msg.contains("(9/8)*max(n_list) + 4"), "{msg}");
    assert!(dir.path().join("error.json").exists());
}

#[test]
fn bad_worker_count_and_missing_config_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(swe_lab(&["counting"], dir.path(), Some("zero")).status.code(), Some(2));
    let o = swe_lab(&["counting", "--config", "/nonexistent.toml"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(swe_lab(&["nosuch"], dir.path(), None).status.code(), Some(2));
}

#[test]
fn budget_overrun_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = swe_lab(&["counting", "--override", "counting.k_max=8", "--override", "counting.budget=100"], dir.path(), None);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "budget");
}

#[test]
fn failed_check_exits_with_four_only_under_check() {
    // at N = 16 the fit window 8..16 holds two blocks, so no exponent is fitted
    let args = [
        "smoothing",
        "--override",
        "grid.n_list=[16]",
        "--override",
        "run.samples=1",
        "--override",
        "time.t_end=0.0625",
        "--override",
        "time.dt=0.015625",
    ];
    let dir = tempfile::tempdir().unwrap();
    let plain = swe_lab(&args, dir.path(), None);
    assert!(plain.status.success());
    assert!(String::from_utf8_lossy(&plain.stdout).contains("FAIL smoothing.hi_hi_gain"));
    let mut checked = args.to_vec();
    checked.push("--check");
    assert_eq!(swe_lab(&checked, dir.path(), None).status.code(), Some(4));
}

#[test]
fn manifest_lists_tables_and_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = swe_lab(&["counting", "--override", "counting.k_max=16", "--config", "/dev/null"], dir.path(), None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let schema: serde_json::Value = serde_json::from_str(include_str!("../../../schemas/manifest.schema.json")).unwrap();
    for key in schema["required"].as_array().unwrap() {
        assert!(raw.get(key.as_str().unwrap()).is_some(), "missing {key}");
    }
    let m = Manifest::read(dir.path()).unwrap();
    assert_eq!(m.experiment, "counting");
    assert_eq!(m.config.counting.k_max, 16);
    assert_eq!(m.seeds.first[0], derived_key(m.config.run.root_seed, "counting", 0));
    assert!(!m.tables.is_empty());
    for t in &m.tables {
        let text = std::fs::read_to_string(dir.path().join(&t.path)).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, t.columns.join(","));
        assert!(t.columns.iter().all(|c| c.ends_with(']') && c.contains('[')), "{header}");
        assert_eq!(text.lines().count(), t.rows + 1);
    }
}

#[test]
fn config_file_sections_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[run]\nroot_seed = 5\n\n[counting]\nk_max = 8\nvariants = [\"zero\"]\n").unwrap();
    let out = dir.path().join("out");
    let o = swe_lab(&["counting", "--config", cfg.to_str().unwrap(), "--override", "counting.k_max=4"], &out, None);
    assert!(o.status.success());
    let m = Manifest::read(&out).unwrap();
    assert_eq!((m.config.run.root_seed, m.config.counting.k_max), (5, 4));
    assert_eq!(m.config.counting.variants, vec!["zero".to_string()]);
    assert_eq!(
        m.config,
        RunConfig::load(Experiment::Counting, Some(&std::fs::read_to_string(&cfg).unwrap()), &["counting.k_max=4".into()]).unwrap()
    );
}
