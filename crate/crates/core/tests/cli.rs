use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn media_egt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_media-egt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn help_on_every_subcommand() {
    for args in [
        &["--help"][..],
        &["replicator", "--help"],
        &["replicator", "run", "--help"],
        &["replicator", "basin", "--help"],
        &["equilibria", "--help"],
        &["abm", "--help"],
        &["abm", "run", "--help"],
        &["sweep", "--help"],
        &["render", "--help"],
    ] {
        let o = media_egt(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert!(stdout(&o).contains("Usage:"), "{args:?}");
    }
    let help = stdout(&media_egt(&["equilibria", "--help"]));
    for flag in ["--b_u", "--c_u", "--b_c", "--c_c", "--c_i", "--q", "--seed", "--jobs", "--config", "--out"] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(media_egt(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(media_egt(&["equilibria", "--bogus"]).status.code(), Some(1));
    assert_eq!(media_egt(&["replicator"]).status.code(), Some(1));
    assert_eq!(media_egt(&["render"]).status.code(), Some(1));
    assert_eq!(media_egt(&["equilibria", "--q", "1.5", "--out", &out]).status.code(), Some(1));
    assert_eq!(media_egt(&["equilibria", "--c_u", "NaN", "--out", &out]).status.code(), Some(1));

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "q = 0.9\nbeta = 2\n").unwrap();
    let o = media_egt(&["equilibria", "--config", cfg.to_str().unwrap(), "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.cfg");
    let o = media_egt(&["equilibria", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(media_egt(&["render", empty.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn equilibria_table_at_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = media_egt(&["equilibria", "--q", "0.9", "--c_i", "0.1", "--c_c", "0.1", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let alld = text.lines().find(|l| l.starts_with("AllD     D ")).unwrap();
    assert!(alld.contains("Stable"));
    assert_eq!(text.matches(" Stable ").count(), 1);

    let csv = fs::read_to_string(dir.path().join("equilibria.csv")).unwrap();
    assert!(csv.starts_with(
        "user_strategy,creator_strategy,eig_re_1,eig_re_2,eig_re_3,eig_re_4,eig_im_1,eig_im_2,eig_im_3,eig_im_4,classification,closed_form_check\n"
    ));
    assert_eq!(csv.lines().count(), 9);
    assert!(dir.path().join("equilibria.manifest").exists());
}

#[test]
fn replicator_run_reports_defection_below_the_separatrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = media_egt(&["replicator", "run", "--preset", "oscillation", "--y0", "0.45", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("outcome: ConvergedDefection"));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x_alld,x_bmedia,x_gmedia,x_allc,y,eta\n"));
}

#[test]
fn sweep_writes_csv_svg_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = media_egt(&[
        "sweep", "--engine", "replicator", "--x", "c_i:0:0.5:21", "--y", "c_c:0:0.5:21",
        "--step", "0.1", "--horizon", "300", "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 21 * 21);
    let svg = fs::read_to_string(dir.path().join("sweep.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="cell""#).count(), 441);
    let manifest = fs::read_to_string(dir.path().join("sweep.manifest")).unwrap();
    assert!(manifest.contains("axis_x = c_i:0:0.5:21"));
    assert!(manifest.contains("seed = 0"));
}

#[test]
fn rerunning_a_manifest_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = media_egt(&["abm", "run", "--generations", "60", "--seed", "3", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let first = fs::read(dir.path().join("abm.csv")).unwrap();

    let manifest = fs::read_to_string(dir.path().join("abm_run.manifest")).unwrap();
    let line = manifest
        .lines()
        .find_map(|l| l.strip_prefix("command_line = "))
        .unwrap();
    let args: Vec<&str> = line.split_whitespace().skip(1).collect();
    fs::remove_file(dir.path().join("abm.csv")).unwrap();
    assert_eq!(media_egt(&args).status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("abm.csv")).unwrap(), first);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.cfg");
    fs::write(&cfg, "# cheap safety\nc_c = 0.3\nq = 0.5\n").unwrap();
    let out = out_arg(dir.path());
    let o = media_egt(&["equilibria", "--config", cfg.to_str().unwrap(), "--q", "0.8", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = fs::read_to_string(dir.path().join("equilibria.manifest")).unwrap();
    assert!(manifest.contains("c_c = 0.3\n"));
    assert!(manifest.contains("q = 0.8\n"));
}

#[test]
fn render_detects_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = media_egt(&["replicator", "run", "--horizon", "50", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let csv = dir.path().join("trajectory.csv");
    let svg = dir.path().join("t.svg");
    let o = media_egt(&["render", csv.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches(r#"class="series""#).count(), 7);

    let o = media_egt(&["render", csv.to_str().unwrap(), "--kind", "heatmap"]);
    assert_eq!(o.status.code(), Some(2));
}
