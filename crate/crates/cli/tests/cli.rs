use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn revmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revmix")).args(args).env_remove("REVMIX_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn curves_tabulates_five_product_curves() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curves.csv");
    let o = revmix(&[
        "curves",
        "--family",
        "productH",
        "--orientation",
        "orientable",
        "--ctilde-range",
        "-2:-0.1:64",
        "--output",
        path_arg(&csv),
        "--plot-script",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("5 curves over 64 abscissae"));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("curve_id,abscissa,ordinate"));
    assert_eq!(lines.count(), 5 * 64);
    let script = fs::read_to_string(dir.path().join("curves.gp")).unwrap();
    assert!(script.contains("file = 'curves.csv'"));
}

#[test]
fn unknown_flag_prints_usage_and_exits_1() {
    let o = revmix(&["curves", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn unknown_subcommand_exits_1() {
    assert_eq!(revmix(&["draw"]).status.code(), Some(1));
}

#[test]
fn unreadable_config_exits_1() {
    let o = revmix(&["cascade", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "lambda = 0.5\nlamda = 0.4\n").unwrap();
    let o = revmix(&["cascade", "--config", path_arg(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2: unknown key 'lamda'"));
}

#[test]
fn invalid_limit_parameter_exits_1() {
    let o = revmix(&["fixed-points", "--family", "productH", "--abscissa", "0", "--ordinate", "-0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_mixed_search_exits_2() {
    let o = revmix(&["probe-mixed", "--k", "8:8", "--m-offset", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cascade_reports_verified_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cascade.csv");
    let o = revmix(&["cascade", "--config", "ref-model", "--k", "8:10", "--output", path_arg(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("3/3 k-values verified"), "{}", stdout(&o));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("k,m,mu_sn,mu_pd,mu_f,mu_pdC,coexistence_verified\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn config_file_values_are_used() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let csv = dir.path().join("out.csv");
    fs::write(&cfg, format!("k_min = 9\nk_max = 9\noutput = {}\n", csv.display())).unwrap();
    let o = revmix(&["cascade", "--config", path_arg(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("1/1 k-values verified"));
    assert!(fs::read_to_string(&csv).unwrap().lines().nth(1).unwrap().starts_with("9,9,"));
}

#[test]
fn fixed_points_of_product_map_to_stdout() {
    let o = revmix(&["fixed-points", "--family", "productH", "--abscissa", "-1", "--ordinate", "-0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains(",elliptic,true,"));
    assert!(text.contains(",saddle,true,"));
    assert!(stderr(&o).contains("2 records"));
}

#[test]
fn rescale_check_shows_geometric_decay() {
    let o = revmix(&["rescale-check", "--kind", "T1k", "--k", "10:12"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let residuals: Vec<f64> =
        stdout(&o).lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(residuals.len(), 3);
    for w in residuals.windows(2) {
        let r = w[1] / w[0];
        assert!((0.25..=1.0).contains(&r), "ratio {r}");
    }
}

#[test]
fn regime_map_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let csv = dir.path().join(format!("regime-{threads}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_revmix"))
            .args(["regime-map", "--nx", "16", "--ny", "16", "--output", path_arg(&csv)])
            .env("REVMIX_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(&csv).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 1 + 16 * 16);
}

#[test]
fn bad_thread_env_exits_1() {
    let o = Command::new(env!("CARGO_BIN_EXE_revmix"))
        .args(["regime-map", "--nx", "16", "--ny", "16"])
        .env("REVMIX_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
