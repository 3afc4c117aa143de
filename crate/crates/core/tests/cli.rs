//! End-to-end checks of the `distls` binary: exit codes, file formats,
//! determinism of the emitted tables, and the gen-data/solve round trip.

use std::path::Path;
use std::process::{Command, Output};

fn distls(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distls"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(output: &Output, expected: i32) {
    let code = output.status.code().expect("no signal");
    assert_eq!(
        code,
        expected,
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn gen_data_then_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = distls(
        &[
            "gen-data", "--model", "corr", "--n", "25", "--p", "40",
            "--noise-variance", "0.5", "--seed", "11", "--out", "set",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    for part in ["regressors", "observations", "ground_truth", "noise"] {
        assert!(dir.path().join(format!("set.{part}.csv")).exists());
    }

    std::fs::write(
        dir.path().join("solver.toml"),
        "lambda = 0.05\niterations = 30\nseed = 11\npartition = [15, 25]\n",
    )
    .unwrap();
    let out = distls(
        &["solve", "--data", "set", "--config", "solver.toml"],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = std::fs::read_to_string(dir.path().join("set.trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,node,component_index,value"));
    // (T + 1) iterations x p components
    assert_eq!(text.lines().count(), 1 + 31 * 40);
}

#[test]
fn solve_rejects_mismatched_partition_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = distls(
        &["gen-data", "--n", "10", "--p", "12", "--seed", "0", "--out", "d"],
        dir.path(),
    );
    assert_code(&out, 0);
    std::fs::write(dir.path().join("bad.toml"), "partition = [5, 5]\n").unwrap();
    let out = distls(&["solve", "--data", "d", "--config", "bad.toml"], dir.path());
    assert_code(&out, 2);
}

#[test]
fn missing_dataset_is_an_io_error_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), "partition = [5, 5]\n").unwrap();
    let out = distls(
        &["solve", "--data", "nonexistent", "--config", "cfg.toml"],
        dir.path(),
    );
    assert_code(&out, 3);
}

#[test]
fn sweep_stdout_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--n", "15", "--p", "40", "--p1", "10,25", "--trials", "4",
        "--test-rows", "50", "--iterations", "10", "--seed", "21",
    ];
    let a = distls(&args, dir.path());
    let b = distls(&args, dir.path());
    assert_code(&a, 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("p1,mean_mse,median_mse,mean_training_error"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("plan.toml"),
        concat!(
            "study = \"noise\"\nmodel = \"bernoulli\"\nn = 12\np = 30\n",
            "p1_values = [10]\nnoise_grid = [0.0, 1.0]\ntrials = 3\n",
            "test_rows = 40\niterations = 8\nseed = 2\n",
        ),
    )
    .unwrap();
    let from_config = distls(&["noise", "--config", "plan.toml"], dir.path());
    assert_code(&from_config, 0);
    let overridden = distls(
        &["noise", "--config", "plan.toml", "--noise-grid", "0.0"],
        dir.path(),
    );
    assert_code(&overridden, 0);
    let base = String::from_utf8(from_config.stdout).unwrap();
    let cut = String::from_utf8(overridden.stdout).unwrap();
    assert_eq!(base.lines().count(), 3, "two grid points");
    assert_eq!(cut.lines().count(), 2, "one grid point after override");

    // a conflicting study key in the config is refused
    let conflict = distls(&["sweep", "--config", "plan.toml"], dir.path());
    assert_code(&conflict, 2);
}

#[test]
fn mc_average_refuses_near_square_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let out = distls(
        &[
            "mc-average", "--n", "20", "--p", "50", "--p1", "25",
            "--trials", "100", "--seed", "1",
        ],
        dir.path(),
    );
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("heavy-tailed"));
}

#[test]
fn bounds_calculator_emits_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = distls(
        &[
            "bounds", "--bound", "iso", "--n", "40", "--partition", "10,12",
            "--q", "2.5", "--out", "bounds.csv",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "bound_name,K,n,p_list,q_list,C,beta,rho");
    assert!(text.lines().nth(1).unwrap().starts_with("iso,2,40,10;12,"));
}

#[test]
fn bound_coverage_refuses_vacuous_probability_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = distls(
        &[
            "bound-coverage", "--bound", "iso", "--n", "40", "--partition", "10,12",
            "--q", "0.1", "--trials", "10", "--seed", "1",
        ],
        dir.path(),
    );
    assert_code(&out, 2);
}

#[test]
fn out_into_missing_directory_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = distls(
        &[
            "bounds", "--bound", "iso", "--n", "40", "--partition", "10,12",
            "--q", "2.5", "--out", "no/such/dir/bounds.csv",
        ],
        dir.path(),
    );
    assert_code(&out, 3);
}
