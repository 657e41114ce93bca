use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lopstokes::resolvent::{assemble_profiles, BoundaryData};
use lopstokes::transform::io::{read_field_csv, write_field_csv};
use lopstokes::transform::{plane_wave, TangentialGrid};
use lopstokes::{FluidParams, SpectralPoint, Tolerances, C64};
use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lopstokes"))
        .args(args)
        .current_dir(dir)
        .env_remove("LOPSTOKES_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files_with(dir: &Path, suffix: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    v.sort();
    v
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn summary(dir: &Path) -> Value {
    let s = files_with(dir, "-summary.json");
    assert_eq!(s.len(), 1, "{s:?}");
    json(&s[0])
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn scan_lopatinski_default_config() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["scan-lopatinski", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = t.path().join("out");
    let reports: Vec<PathBuf> = files_with(&out, ".json").into_iter().filter(|p| !p.to_string_lossy().ends_with("-summary.json")).collect();
    let rep = json(&reports[0]);
    assert!(rep["scan"]["omega"].as_f64().unwrap() > 0.0);
    let csv = &files_with(&out, ".csv")[0];
    assert!(fs::read_to_string(csv).unwrap().starts_with("re_lambda,im_lambda,A,abs_detL,ratio"));
}

#[test]
fn equal_densities_are_rejected() {
    let t = TempDir::new().unwrap();
    write(t.path(), "c.toml", "[params]\nrho_plus = 2.0\nrho_minus = 2.0\n");
    let o = run(t.path(), &["scan-lopatinski", "--config", "c.toml", "--out", "out"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("densities must differ"), "{}", stderr(&o));
}

#[test]
fn config_errors_are_usage_errors() {
    let t = TempDir::new().unwrap();
    write(t.path(), "wide.toml", "[sector]\nepsilon = 1.6\n");
    let o = run(t.path(), &["scan-lopatinski", "--config", "wide.toml"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("epsilon"), "{}", stderr(&o));

    write(t.path(), "typo.toml", "# reference set\n[params]\nsigma = 1.0\nmu = 2.0\n");
    let o = run(t.path(), &["scan-height", "--config", "typo.toml"]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("line 4") && e.contains("unknown field `mu`"), "{e}");
}

#[test]
fn verify_default_run_passes() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["verify", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}\n{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let s = summary(&t.path().join("out"));
    let suites = s["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 5);
    assert!(suites.iter().all(|x| x["passed"] == Value::Bool(true)));
    assert!(s["notes"].as_array().unwrap().is_empty());
}

#[test]
fn tiny_fuzz_count_reports_reduced_coverage() {
    let t = TempDir::new().unwrap();
    // a cutoff from the config skips the height-scan dependency of the table
    write(t.path(), "c.toml", "[sector]\nlambda0 = 39.81\n");
    let o = run(t.path(), &["verify", "--config", "c.toml", "--samples", "10", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&t.path().join("out"));
    assert!(s["notes"][0].as_str().unwrap().contains("reduced coverage: 10 fuzz samples"));
}

#[test]
fn sign_flip_fault_fails_the_interface_suite() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["verify", "--samples", "200", "--inject-fault", "sign-flip", "--out", "out"]);
    let c = code(&o);
    assert!(c >= 32 && (c - 32) & 2 != 0, "exit {c}");
    let s = summary(&t.path().join("out"));
    let iface = s["suites"].as_array().unwrap().iter().find(|x| x["suite"] == "interface-residual").unwrap();
    assert_eq!(iface["passed"], Value::Bool(false));
}

#[test]
fn outputs_are_deterministic_and_env_overrides_out() {
    let t = TempDir::new().unwrap();
    write(t.path(), "c.toml", "[kernel]\nsymbols = [\"one\"]\nx_levels = [0.5, 1.0]\n");
    let a = run(t.path(), &["kernel-decay", "--config", "c.toml", "--out", "a"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = Command::new(env!("CARGO_BIN_EXE_lopstokes"))
        .args(["kernel-decay", "--config", "c.toml", "--out", "ignored"])
        .current_dir(t.path())
        .env("LOPSTOKES_OUT", t.path().join("b"))
        .output()
        .unwrap();
    assert_eq!(code(&b), 0);
    assert!(!t.path().join("ignored").exists());
    let fa = files_with(&t.path().join("a"), "");
    let fb = files_with(&t.path().join("b"), "");
    assert_eq!(fa.len(), 2);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
    // a different config gets a different name
    write(t.path(), "d.toml", "[kernel]\nsymbols = [\"bracket\"]\nx_levels = [0.5, 1.0]\n");
    assert_eq!(code(&run(t.path(), &["kernel-decay", "--config", "d.toml", "--out", "a"])), 0);
    assert_eq!(files_with(&t.path().join("a"), "-summary.json").len(), 2);
}

#[test]
fn zero_data_gives_zero_fields() {
    let t = TempDir::new().unwrap();
    write(t.path(), "c.toml", "[solve]\nlambda = [2.0, 1.0]\ngrid = { box = [8.0], shape = [16] }\nx_levels = [0.0, 1.0]\n");
    let o = run(t.path(), &["solve", "--config", "c.toml", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = t.path().join("out");
    for f in files_with(&out, ".csv") {
        let text = fs::read_to_string(&f).unwrap();
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!((cols[3], cols[4]), ("0.0", "0.0"), "{}", f.display());
        }
    }
    assert!(files_with(&out, "-residuals.json").len() == 1);
}

#[test]
fn single_mode_solve_matches_spectral_solution() {
    let t = TempDir::new().unwrap();
    let grid = TangentialGrid::new(vec![6.0, 5.0], vec![16, 16]).unwrap();
    let k = [2, -1];
    let h1 = C64::new(0.5, -0.25);
    let wave = plane_wave(&grid, &k, h1);
    write_field_csv(&grid, &[wave], fs::File::create(t.path().join("h1.csv")).unwrap()).unwrap();
    write(
        t.path(),
        "c.toml",
        "[solve]\nlambda = [1.0, 2.0]\ngrid = { box = [6.0, 5.0], shape = [16, 16] }\nx_levels = [0.4]\nh = [\"h1.csv\"]\n",
    );
    let o = run(t.path(), &["solve", "--config", "c.toml", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let p = FluidParams::reference();
    let sp = SpectralPoint::new(C64::new(1.0, 2.0), &grid.frequency(grid.mode_index(&k))).unwrap();
    let sol = assemble_profiles(&p, &sp, &BoundaryData::explicit(vec![h1, C64::new(0.0, 0.0)], C64::new(0.0, 0.0))).unwrap();
    let tol = Tolerances::default();
    let out = t.path().join("out");
    for j in 0..3 {
        let f = &files_with(&out, &format!("-u_plus_{}.csv", j + 1))[0];
        let got = read_field_csv(&grid, f).unwrap();
        let want = plane_wave(&grid, &k, sol.plus[j].eval(0.4, &tol));
        let scale = sol.plus[j].eval(0.0, &tol).norm().max(1e-300);
        let dev = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
        assert!(dev < 1e-12, "component {j}: {dev:e}");
    }
}

#[test]
fn kinematic_solve_below_cutoff_is_refused() {
    let t = TempDir::new().unwrap();
    write(
        t.path(),
        "c.toml",
        "[solve]\nlambda = [1.0, 1.0]\nmode = \"kinematic\"\ngrid = { box = [8.0], shape = [16] }\n",
    );
    let o = run(t.path(), &["solve", "--config", "c.toml", "--out", "out"]);
    assert_eq!(code(&o), 3);
    let e = stderr(&o);
    assert!(e.contains("lambda + K is not invertible") && e.contains("hint:"), "{e}");
}

#[test]
fn nonzero_mean_data_needs_projection() {
    let t = TempDir::new().unwrap();
    let grid = TangentialGrid::new(vec![8.0], vec![16]).unwrap();
    let f = vec![C64::new(1.0, 0.0); grid.len()];
    write_field_csv(&grid, &[f], fs::File::create(t.path().join("h.csv")).unwrap()).unwrap();
    let base = "[solve]\nlambda = [1.0, 0.0]\ngrid = { box = [8.0], shape = [16] }\nh = [\"h.csv\"]\n";
    write(t.path(), "c.toml", base);
    let o = run(t.path(), &["solve", "--config", "c.toml", "--out", "out"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("project_zero_mode"));
    write(t.path(), "p.toml", &format!("{base}project_zero_mode = true\n"));
    let o = run(t.path(), &["solve", "--config", "p.toml", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}
