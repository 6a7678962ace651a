use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use gamow::Raster;
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gamow-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

/// Runs `gamow <args> --out <dir>/<out>` and returns the exit code.
fn gamow(dir: &Path, out: &str, args: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_gamow"))
        .args(args)
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .unwrap();
    status.status.code().unwrap()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn kernel_check_accepts_the_half_power() {
    let dir = scratch("kc-half");
    let cfg = write_config(&dir, "kernel = \"power(alpha=-0.5)\"\n");
    assert_eq!(
        gamow(
            &dir,
            "o",
            &["kernel-check", "--config", cfg.to_str().unwrap()]
        ),
        0
    );
    let v = read_json(dir.join("o/kernel_check.json"));
    let checks = v["checks"].as_object().unwrap();
    assert_eq!(checks.len(), 5);
    assert!(checks.values().all(|c| c["passed"] == true));
    for field in ["witnesses", "extremal_ratio", "samples_used"] {
        assert!(checks["decreasing"].get(field).is_some());
    }
}

#[test]
fn kernel_check_reports_divergence() {
    let dir = scratch("kc-div");
    let cfg = write_config(&dir, "kernel = \"power(alpha=-3)\"\n");
    assert_eq!(
        gamow(
            &dir,
            "o",
            &["kernel-check", "--config", cfg.to_str().unwrap()]
        ),
        1
    );
    let v = read_json(dir.join("o/kernel_check.json"));
    let adm = &v["checks"]["admissibility"];
    assert_eq!(adm["passed"], false);
    assert_eq!(adm["witnesses"][0]["label"], "DIVERGENT");
}

#[test]
fn indicator_kernel_writes_a_witness_pair() {
    let dir = scratch("kc-ind");
    let cfg = write_config(
        &dir,
        "kernel = \"indicator(radius=1)\"\n[checks]\nrun = [\"pd\"]\n",
    );
    assert_eq!(
        gamow(
            &dir,
            "o",
            &["kernel-check", "--config", cfg.to_str().unwrap()]
        ),
        1
    );
    let v = read_json(dir.join("o/kernel_check.json"));
    assert_eq!(v["checks"]["pd_strips"]["passed"], false);
    let f = Raster::from_pgm(&fs::read_to_string(dir.join("o/pd_witness_f.pgm")).unwrap()).unwrap();
    let g = Raster::from_pgm(&fs::read_to_string(dir.join("o/pd_witness_g.pgm")).unwrap()).unwrap();
    assert!(!f.is_empty() && !g.is_empty());
}

#[test]
fn energy_of_the_unit_disk_with_constant_kernel() {
    let dir = scratch("energy-disk");
    let cfg = write_config(
        &dir,
        "kernel = \"constant\"\nepsilon = 1.0\ncomponents = [{ disk = { radius = 1.0 } }]\n",
    );
    assert_eq!(
        gamow(&dir, "o", &["energy", "--config", cfg.to_str().unwrap()]),
        0
    );
    let v = read_json(dir.join("o/energy.json"));
    let pi = std::f64::consts::PI;
    let total = v["energies"][0]["total"].as_f64().unwrap();
    assert!((total - (2.0 * pi + pi * pi)).abs() < 1e-9);
    let csv = fs::read_to_string(dir.join("o/energy.csv")).unwrap();
    assert_eq!(
        csv.lines().nth(1),
        Some("epsilon,perimeter,riesz,total,n_components")
    );
}

#[test]
fn energy_of_two_components_lists_each() {
    let dir = scratch("energy-two");
    let cfg = write_config(
        &dir,
        "kernel = \"power(alpha=-0.5)\"\nepsilon = 0.5\n\
         components = [{ disk = { radius = 0.7 } }, { disk = { center = [3, 0], radius = 0.5 } }]\n",
    );
    assert_eq!(
        gamow(&dir, "o", &["energy", "--config", cfg.to_str().unwrap()]),
        0
    );
    let v = read_json(dir.join("o/energy.json"));
    assert_eq!(
        v["energies"][0]["per_component"].as_array().unwrap().len(),
        2
    );
}

#[test]
fn malformed_inputs_exit_with_config_error() {
    let dir = scratch("bad");
    fs::write(dir.join("broken.json"), "{\"center\": [0, 0]").unwrap();
    let cfg = write_config(
        &dir,
        "kernel = \"constant\"\nepsilon = 1.0\ncomponents = [{ file = \"broken.json\" }]\n",
    );
    let cfg = cfg.to_str().unwrap();
    assert_eq!(gamow(&dir, "o", &["energy", "--config", cfg]), 2);
    assert_eq!(
        gamow(
            &dir,
            "o",
            &["energy", "--config", cfg, "--tol-override", "nonsense=1"]
        ),
        2
    );
    assert_eq!(
        gamow(
            &dir,
            "o",
            &["lens-verify", "--tol-override", "lens.angles=-1"]
        ),
        2
    );
    assert_eq!(
        gamow(
            &dir,
            "o",
            &["lens-verify", "--tol-override", "operation=\"energy\""]
        ),
        2
    );
    assert_eq!(gamow(&dir, "o", &["energy", "--config", "missing.toml"]), 2);
}

#[test]
fn lens_grid_rows_match_the_grid_and_flag_the_outside() {
    let dir = scratch("lens");
    let args = [
        "lens-verify",
        "--tol-override",
        "lens.angles=12",
        "--tol-override",
        "lens.offsets=9",
    ];
    assert_eq!(gamow(&dir, "inside", &args), 0);
    let csv = fs::read_to_string(dir.join("inside/lens_grid.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 12 * 9);
    let v = read_json(dir.join("inside/lens_verify.json"));
    assert_eq!(v["out_of_domain"], 0);

    let mut wide = args.to_vec();
    wide.extend(["--tol-override", "lens.offset_factor=1.5"]);
    assert_eq!(gamow(&dir, "wide", &wide), 0);
    let v = read_json(dir.join("wide/lens_verify.json"));
    assert!(v["out_of_domain"].as_u64().unwrap() > 0);
    assert_eq!(v["rows"], 12 * 9);
    let csv = fs::read_to_string(dir.join("wide/lens_grid.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains(",false,")));
}

fn quick_sweep(dir: &Path, epsilons: &str) -> PathBuf {
    write_config(
        dir,
        &format!(
            "kernel = \"constant\"\nepsilons = {epsilons}\n\
             [optimizer]\nn_modes = 2\nmass_grid = 2\nmass_refinements = 0\ntol_step = 1e-4\ndescent_nodes = 64\n"
        ),
    )
}

#[test]
fn single_epsilon_sweep_has_one_row() {
    let dir = scratch("sweep-one");
    let cfg = quick_sweep(&dir, "[0.3]");
    assert_eq!(
        gamow(&dir, "o", &["sweep", "--config", cfg.to_str().unwrap()]),
        0
    );
    let v = read_json(dir.join("o/sweep.json"));
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
    assert!(v["fission_threshold"].is_null());
}

#[test]
fn resumed_sweep_matches_a_fresh_one() {
    let dir = scratch("sweep-resume");
    let cfg = quick_sweep(&dir, "[0.2, 0.5, 1.0]");
    let cfg = cfg.to_str().unwrap();
    assert_eq!(gamow(&dir, "fresh", &["sweep", "--config", cfg]), 0);
    let full = fs::read_to_string(dir.join("fresh/sweep.csv")).unwrap();
    fs::create_dir_all(dir.join("partial")).unwrap();
    let partial: Vec<&str> = full.lines().take(3).collect();
    fs::write(dir.join("partial/sweep.csv"), partial.join("\n") + "\n").unwrap();
    assert_eq!(
        gamow(&dir, "partial", &["sweep", "--config", cfg, "--resume"]),
        0
    );
    for f in ["sweep.csv", "sweep.json", "sweep.svg"] {
        assert_eq!(
            fs::read(dir.join("fresh").join(f)).unwrap(),
            fs::read(dir.join("partial").join(f)).unwrap(),
            "{f}"
        );
    }
    // A checkpoint from another config is refused.
    assert_eq!(
        gamow(
            &dir,
            "partial",
            &["sweep", "--config", cfg, "--resume", "--seed", "9"]
        ),
        2
    );
}

#[test]
fn identical_runs_give_identical_stamped_files() {
    let dir = scratch("determinism");
    let cfg = write_config(
        &dir,
        "kernel = \"power(alpha=-0.5)\"\nepsilons = [0.1, 1.0]\nseed = 4\n\
         components = [{ ellipse = { semi_x = 1.2, semi_y = 0.8 } }]\n",
    );
    let cfg = cfg.to_str().unwrap();
    assert_eq!(gamow(&dir, "a", &["energy", "--config", cfg]), 0);
    assert_eq!(gamow(&dir, "b", &["energy", "--config", cfg]), 0);
    let hash = read_json(dir.join("a/energy.json"))["meta"]["config_hash"]
        .as_str()
        .unwrap()
        .to_string();
    assert_eq!(hash.len(), 64);
    for f in ["energy.json", "energy.csv", "shapes.svg"] {
        let a = fs::read_to_string(dir.join("a").join(f)).unwrap();
        assert_eq!(a, fs::read_to_string(dir.join("b").join(f)).unwrap(), "{f}");
        assert!(
            a.contains(&hash) && a.contains(env!("CARGO_PKG_VERSION")),
            "{f}"
        );
    }
    assert_eq!(
        gamow(&dir, "c", &["energy", "--config", cfg, "--seed", "5"]),
        0
    );
    assert_ne!(
        read_json(dir.join("c/energy.json"))["meta"]["config_hash"],
        hash.as_str()
    );
}

#[test]
fn cut_paste_on_the_dumbbell() {
    let dir = scratch("cut");
    let args = [
        "cut-paste",
        "--tol-override",
        "kernel=\"power(alpha=-0.5)\"",
        "--tol-override",
        "epsilon=1.0",
    ];
    assert_eq!(gamow(&dir, "o", &args), 0);
    let v = read_json(dir.join("o/cut_paste.json"));
    assert_eq!(v["outcome"], "cut");
    assert!(v["energy_change"].as_f64().unwrap() <= -v["guaranteed_decrease"].as_f64().unwrap());
    let cut = Raster::from_pgm(&fs::read_to_string(dir.join("o/cut.pgm")).unwrap()).unwrap();
    assert!(cut.count() > 0);
}

#[test]
fn minimize_then_report() {
    let dir = scratch("minimize");
    let cfg = write_config(
        &dir,
        "kernel = \"power(alpha=-0.5)\"\nepsilon = 0.01\n\
         [optimizer]\nn_modes = 3\ntol_step = 1e-4\ndescent_nodes = 128\n",
    );
    assert_eq!(
        gamow(
            &dir,
            "o",
            &["minimize", "--config", cfg.to_str().unwrap(), "--seed", "3"]
        ),
        0
    );
    let v = read_json(dir.join("o/minimize.json"));
    assert_eq!(v["passed"], true);
    assert!(v["trace"].get("wall_time").is_none());
    assert!(v["trace"]["iterations"]
        .as_array()
        .is_some_and(|i| !i.is_empty()));
    assert!(fs::read_to_string(dir.join("o/minimize.timing"))
        .unwrap()
        .contains("wall_time_seconds"));
    assert_eq!(gamow(&dir, "o", &["report"]), 0);
    let report = fs::read_to_string(dir.join("o/report.md")).unwrap();
    assert!(report.contains("## minimize") && report.contains("shapes.svg"));
    assert_eq!(gamow(&dir, "empty", &["report"]), 2);
}
