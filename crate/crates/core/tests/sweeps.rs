use std::path::Path;
use std::process::Command;

use entperc::experiment::{
    emit, render, run_disorder_sweep, run_sweep, run_uniform_sweep, ExperimentConfig, ExperimentError, OutputFormat,
    RECORD_HEADER,
};

const SMALL: &str = r#"
master_seed = 11

[topology]
kind = "diagonal-square"
rows = 3
cols = 3

[sweep]
lambda_grid = [0.5, 0.64, 0.66, 0.7]

[pairs]
selection = "all-pairs"

[heuristics]
samples = 24
"#;

fn small() -> ExperimentConfig {
    ExperimentConfig::from_toml(SMALL).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn record_count_and_order() {
    let out = run_uniform_sweep(&small()).unwrap();
    // 9 nodes, 36 unordered pairs, 4 grid points
    assert_eq!(out.records.len(), 4 * 36);
    let keys: Vec<_> =
        out.records.iter().map(|r| (r.lambda_mean.to_bits(), r.network_sample, r.distance, r.source, r.target)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(out.records.iter().all(|r| r.source < r.target && r.destroyed >= r.distance));
}

#[test]
fn perfect_links_give_perfect_connections() {
    let out = run_uniform_sweep(&small()).unwrap();
    for r in out.records.iter().filter(|r| r.lambda_mean == 0.5) {
        assert_eq!((r.entanglement, r.integrity, r.connectivity), (1.0, 1.0, 1.0), "{r:?}");
    }
    for a in out.aggregates.iter().filter(|a| a.lambda_mean == 0.5) {
        assert_eq!((a.mean_entanglement, a.mean_integrity, a.mean_connectivity), (1.0, 1.0, 1.0));
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let cfg = small();
    let one = in_pool(1, || run_sweep(&cfg).unwrap());
    let four = in_pool(4, || run_sweep(&cfg).unwrap());
    assert_eq!(render(&one, OutputFormat::Csv), render(&four, OutputFormat::Csv));
}

#[test]
fn repeat_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        emit(&run_sweep(&cfg).unwrap(), OutputFormat::Csv, p).unwrap();
    }
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&paths[0]), read(&paths[1]));
    assert_eq!(read(&dir.path().join("a.agg.csv")), read(&dir.path().join("b.agg.csv")));

    let text = String::from_utf8(read(&paths[0])).unwrap();
    assert_eq!(text.lines().next().unwrap(), RECORD_HEADER.join(","));
    let agg = String::from_utf8(read(&dir.path().join("a.agg.csv"))).unwrap();
    assert_eq!(
        agg.lines().next().unwrap(),
        "lambda_mean,sigma,distance,mean_entanglement,mean_integrity,mean_connectivity,count"
    );
}

#[test]
fn json_lines_use_the_csv_field_names() {
    let out = run_sweep(&small()).unwrap();
    let (records, _) = render(&out, OutputFormat::JsonLines);
    let text = String::from_utf8(records).unwrap();
    assert_eq!(text.lines().count(), out.records.len());
    let first: serde_json::Map<String, serde_json::Value> = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let keys: Vec<&str> = first.keys().map(String::as_str).collect();
    let mut want = RECORD_HEADER.to_vec();
    want.sort();
    let mut got = keys.clone();
    got.sort();
    assert_eq!(got, want);
}

#[test]
fn zero_sigma_disorder_matches_uniform() {
    let uniform = run_uniform_sweep(&small()).unwrap();
    let text = SMALL.replace("lambda_grid", "mean_grid").replace("[pairs]", "network_samples = 1\n\n[pairs]")
        + "\n[disorder]\nmode = \"truncated-normal\"\nsigma = 0.0\n";
    let disorder = run_disorder_sweep(&ExperimentConfig::from_toml(&text).unwrap()).unwrap();
    assert_eq!(uniform.records.len(), disorder.records.len());
    for (u, d) in uniform.records.iter().zip(&disorder.records) {
        assert_eq!(
            (u.source, u.target, u.final_lambda, u.destroyed, u.seed),
            (d.source, d.target, d.final_lambda, d.destroyed, d.seed)
        );
    }
}

#[test]
fn disorder_records_carry_network_and_sigma() {
    let text = SMALL.replace("lambda_grid = [0.5, 0.64, 0.66, 0.7]", "mean_grid = [0.65]")
        .replace("[pairs]", "network_samples = 3\n\n[pairs]")
        + "\n[disorder]\nmode = \"truncated-normal\"\nsigma = 0.05\n";
    let out = run_sweep(&ExperimentConfig::from_toml(&text).unwrap()).unwrap();
    assert_eq!(out.records.len(), 3 * 36);
    assert!(out.records.iter().all(|r| r.sigma == 0.05 && r.mode == "truncated-normal"));
    let networks: std::collections::BTreeSet<_> = out.records.iter().map(|r| r.network_sample).collect();
    assert_eq!(networks.into_iter().collect::<Vec<_>>(), vec![0, 1, 2]);
    let total: usize = out.aggregates.iter().map(|a| a.count).sum();
    assert_eq!(total, 3 * 36);
}

#[test]
fn empty_pair_list_is_a_config_error() {
    let text = SMALL.replace("selection = \"all-pairs\"", "selection = \"explicit\"\nlist = []");
    assert!(ExperimentConfig::from_toml(&text).is_err());
}

#[test]
fn disconnected_explicit_pair_is_rejected() {
    let text = SMALL.replace("selection = \"all-pairs\"", "selection = \"explicit\"\nlist = [[0, 99]]");
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    assert!(matches!(run_sweep(&cfg), Err(ExperimentError::Config(_))));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = run_sweep(&small()).unwrap();
    let err = emit(&out, OutputFormat::Csv, Path::new("/nonexistent/dir/run.csv")).unwrap_err();
    assert!(matches!(err, ExperimentError::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/dir/run.csv"));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entperc"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, SMALL.replace("[0.5, 0.64, 0.66, 0.7]", "[0.5]")).unwrap();

    let thresholds = cli().arg("thresholds").output().unwrap();
    assert_eq!(thresholds.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&thresholds.stdout).contains("3S4D"));

    let out = dir.path().join("run.csv");
    let ok = cli().args(["sweep", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("run.agg.csv").exists());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, SMALL.replace("rows = 3", "rows = three")).unwrap();
    let config_error = cli().args(["sweep", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(config_error.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&config_error.stderr).contains("line"));

    let io = cli().args(["sweep", cfg.to_str().unwrap(), "--output", "/nonexistent/dir/x.csv"]).output().unwrap();
    assert_eq!(io.status.code(), Some(2));
}

#[test]
fn cli_pair_prints_the_operation_log() {
    let net = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/seven_node.txt");
    let out = cli()
        .args(["pair", "--network", net.to_str().unwrap(), "--source", "0", "--target", "6", "--samples", "60", "--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("final lambda: 0.5"), "{text}");
    assert!(text.contains("Distill"));
}

#[test]
fn cli_topology_round_trips() {
    let out = cli().args(["topology", "--kind", "honeycomb", "--rows", "2", "--cols", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let net = entperc::network::read_network(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!((net.node_count(), net.original_count()), (16, 19));
}
