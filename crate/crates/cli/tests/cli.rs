use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dkg_core::spectral::greens_closed_form_1d;
use dkg_core::GridParams;
use serde_json::Value;

fn dkg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dkg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn ok(o: Output) -> Output {
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn stdout_json(o: Output) -> Value {
    serde_json::from_slice(&ok(o).stdout).unwrap()
}

const SIM: &str = r#"
potential = [-1.0, 1.0]
steps = 120
snapshot_every = 60
[grid]
n = 1
tau = 0.25
m = 2.0
[initial]
amplitude = 1.0
width = 3.0
seed = 3
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_diagnostics_series_and_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "sim.toml", SIM);
    let out = tmp.path().join("run");
    ok(dkg(&["simulate", "-c", &cfg, "-o", s(&out)]));

    let diag = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let rows: Vec<&str> = diag.lines().collect();
    assert_eq!(rows[0], "t,energy,charge,l2_sq,apriori_ok");
    assert_eq!(rows.len(), 1 + 121);
    assert!(rows[1..].iter().all(|r| r.ends_with(",true")));
    let series = fs::read_to_string(out.join("origin.csv")).unwrap();
    assert_eq!(series.lines().next(), Some("t,re,im"));
    assert_eq!(series.lines().count(), 1 + 122);

    let m = json_file(&out.join("manifest.json"));
    assert!(m["energy_drift"].as_f64().unwrap() < 1e-12);
    assert!(m["charge_drift"].as_f64().unwrap() < 1e-12);
    assert_eq!(m["apriori_ok"], Value::Bool(true));
    for name in ["snap_0.bin", "snap_60.bin", "snap_120.bin", "final.bin"] {
        assert!(out.join(name).exists() && out.join(format!("{name}.json")).exists(), "{name}");
    }
    let side = json_file(&out.join("final.bin.json"));
    assert_eq!(side["t"], 120);
    assert_eq!(side["n"], 1);
}

#[test]
fn restart_from_snapshot_continues_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    // one box for all runs, large enough for 120 steps
    let sim = SIM.replace("steps = 120", "steps = 120\nradius = 140");
    let cfg = write(tmp.path(), "sim.toml", &sim);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(dkg(&["simulate", "-c", &cfg, "-o", s(&a)]));
    // 60 steps, then 60 more from the snapshot, against 120 in one go
    let half = tmp.path().join("half");
    ok(dkg(&["simulate", "-c", &cfg, "--set", "steps=60", "-o", s(&half)]));
    let snap = half.join("final.bin");
    let restart = sim.split("[initial]").next().unwrap().replace("steps = 120", "steps = 60");
    let cfg2 = write(tmp.path(), "restart.toml", &restart);
    ok(dkg(&["simulate", "-c", &cfg2, "--set", &format!("initial_snapshot={}", s(&snap)), "-o", s(&b)]));
    let last = |p: &Path| fs::read_to_string(p.join("diagnostics.csv")).unwrap().lines().last().unwrap().to_string();
    assert_eq!(last(&a), last(&b));
    assert_eq!(fs::read(a.join("final.bin")).unwrap(), fs::read(b.join("final.bin")).unwrap());
}

#[test]
fn overrides_take_precedence_over_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "sim.toml", SIM);
    let out = tmp.path().join("run");
    ok(dkg(&["simulate", "-c", &cfg, "--set", "steps=7", "--set", "snapshot_every=0", "--set", "potential.0=-0.5", "-o", s(&out)]));
    let m = json_file(&out.join("manifest.json"));
    assert_eq!(m["t_end"], 8);
    assert_eq!(m["config"]["potential"][0], -0.5);
    assert_eq!(m["snapshots"].as_array().unwrap().len(), 1);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "sim.toml", SIM);
    let out = tmp.path().join("run");
    for extra in [
        vec!["--set", "grid.tau=-1"],
        vec!["--set", "unknown_key=1"],
        vec!["--set", "steps=0"],
        vec!["--set", "grid"],
    ] {
        let mut args = vec!["simulate", "-c", &cfg, "-o", s(&out)];
        args.extend(extra.iter().copied());
        assert_eq!(code(&dkg(&args)), 2, "{extra:?}");
    }
    assert_eq!(code(&dkg(&["simulate", "-c", s(&tmp.path().join("missing.toml"))])), 2);
    assert_eq!(code(&dkg(&["no-such-command"])), 2);
    // frequency in the continuous spectrum
    let g = ["green", "--set", "grid.n=1", "--set", "grid.tau=1.0", "--set", "grid.m=1.0", "--set", "radius=2"];
    assert_eq!(code(&dkg(&[&g[..], &["--set", "omega=1.5"]].concat())), 2);
}

#[test]
fn numerical_failure_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    // W' > 0 everywhere cannot reach the negative value κ(ω)
    let o = dkg(&[
        "soliton", "--set", "grid.n=1", "--set", "grid.tau=1.0", "--set", "grid.m=1.0", "--set", "kind=one",
        "--set", "frequencies=[0.3]", "--set", "potential=[3.0, 1.0]", "--set", "radius=5", "-o",
        s(&tmp.path().join("sol")),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn green_matches_the_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g.csv");
    ok(dkg(&[
        "green", "--set", "grid.n=1", "--set", "grid.tau=1.0", "--set", "grid.m=1.0", "--set", "omega=0.4",
        "--set", "radius=6", "-o", s(&out),
    ]));
    let grid = GridParams::exact_ratio(1, 1.0, 1.0).unwrap();
    let mut rd = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["X", "re", "im", "est_error"]);
    let rows: Vec<(i64, f64)> = rd
        .records()
        .map(|r| {
            let r = r.unwrap();
            assert!(r[3].parse::<f64>().unwrap() < 1e-8);
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 13);
    let exact = greens_closed_form_1d(&[0], 0.4, &grid).unwrap();
    assert!((rows[6].1 - exact).abs() <= 1e-10 * exact.abs());
    for k in 0..6 {
        assert_eq!(rows[k].0, -rows[12 - k].0);
        assert!((rows[k].1 - rows[12 - k].1).abs() <= 1e-12);
    }
}

#[test]
fn green_labels_sites_by_coordinates() {
    let o = ok(dkg(&[
        "green", "--set", "grid.n=2", "--set", "grid.tau=0.5", "--set", "grid.m=1.0", "--set", "omega=0.2",
        "--set", "radius=1",
    ]));
    let text = String::from_utf8(o.stdout).unwrap();
    let labels: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels.len(), 9);
    assert_eq!(labels[0], "-1;-1");
    assert_eq!(labels[4], "0;0");
}

#[test]
fn soliton_one_and_four_frequency_manifests() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["soliton", "--set", "grid.n=1", "--set", "grid.tau=1.0", "--set", "grid.m=1.0", "--set", "radius=12"];
    let one = tmp.path().join("one");
    ok(dkg(&[&base[..], &["--set", "kind=one", "--set", "frequencies=[0.3]", "--set", "potential=[-3.0, 1.0]", "-o", s(&one)]].concat()));
    let m = json_file(&one.join("manifest.json"));
    assert_eq!(m["kind"], "one");
    assert!(m["residual"].as_f64().unwrap() <= 1e-12);
    assert!(m["C"][0].as_f64().unwrap() > 0.0);
    let prof = fs::read_to_string(one.join("profile.csv")).unwrap();
    assert_eq!(prof.lines().next(), Some("X,re,im"));
    assert_eq!(prof.lines().count(), 1 + 25);

    let four = tmp.path().join("four");
    ok(dkg(&[
        &base[..],
        &["--set", "kind=four", "--set", "frequencies=[0.2, 0.5]", "--set", "amplitude=[0.3, 0.1]",
          "--set", "second_amplitude=[0.2, -0.25]", "-o", s(&four)],
    ]
    .concat()));
    let m = json_file(&four.join("manifest.json"));
    assert_eq!(m["potential_designed"], Value::Bool(true));
    assert_eq!(m["frequencies"].as_array().unwrap().len(), 2);
    assert!(m["residual"].as_f64().unwrap() <= 1e-12);
    let prof = fs::read_to_string(four.join("profile.csv")).unwrap();
    assert_eq!(prof.lines().next(), Some("X,p_re,p_im,r_re,r_im"));

    // a given potential is rejected for the design mode
    let o = dkg(&[&base[..], &["--set", "kind=four", "--set", "frequencies=[0.2, 0.5]", "--set", "amplitude=[0.3, 0.1]",
        "--set", "second_amplitude=[0.2, -0.25]", "--set", "potential=[1.0, 1.0]", "-o", s(&four)]].concat());
    assert_eq!(code(&o), 2);
}

#[test]
fn spectrum_of_a_simulated_series() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "sim.toml", SIM);
    let out = tmp.path().join("run");
    ok(dkg(&["simulate", "-c", &cfg, "-o", s(&out)]));
    let series = out.join("origin.csv");
    let grid = ["--set", "grid.n=1", "--set", "grid.tau=0.25", "--set", "grid.m=2.0"];
    let r = stdout_json(dkg(&[&["spectrum", s(&series)][..], &grid, &["--set", "window=64", "--set", "hop=29"]].concat()));
    let w = r["windows"].as_array().unwrap();
    assert_eq!(w.len(), 3);
    assert_eq!(w[1]["t0"], 29);
    for x in w {
        let f = x["gap_mass_fraction"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&f));
        assert_eq!(x["power"].as_array().unwrap().len(), 64);
    }
    let r = stdout_json(dkg(&[&["spectrum", s(&series)][..], &grid, &["--set", "window=64", "--set", "t0=10"]].concat()));
    assert_eq!(r["windows"][0]["t0"], 10);
    let o = dkg(&[&["spectrum", s(&series)][..], &grid, &["--set", "window=500"]].concat());
    assert_eq!(code(&o), 2);
}

#[test]
fn titchmarsh_check_reports() {
    let tmp = tempfile::tempdir().unwrap();
    // (δ_a + δ_{π+a}) + (δ_b − δ_{π+b}) with a = π/8, b = π/4
    let f = write(
        tmp.path(),
        "f.json",
        r#"[{"angle": {"pi": [1, 8]}, "weight": [1, 0]}, {"angle": {"pi": [9, 8]}, "weight": [1, 0]},
            {"angle": {"pi": [1, 4]}, "weight": [1, 0]}, {"angle": {"pi": [5, 4]}, "weight": [-1, 0]}]"#,
    );
    let g = write(tmp.path(), "g.json", r#"[{"angle": 0.1, "weight": [1, 0]}, {"angle": 0.3, "weight": [0, 2]}]"#);
    let r = stdout_json(dkg(&["titchmarsh-check", &f, "--set", &format!("second={g}"), "--set", "powers=[2]"]));
    let class = &r["classification"]["ok"];
    assert_eq!(class["consistent"], Value::Bool(true));
    assert_eq!(class["reconstructs"], Value::Bool(true));
    assert_eq!(r["powers"].as_array().unwrap().len(), 1);
    assert!(r["two_interval"]["ok"]["consistent"].is_boolean());
    assert_eq!(r["f"].as_array().unwrap().len(), 4);

    // a generic measure violates the classification hypothesis; still exit 0
    let h = write(tmp.path(), "h.json", r#"[{"angle": 0.2, "weight": [1, 0]}, {"angle": 0.5, "weight": [2, 0]}]"#);
    let r = stdout_json(dkg(&["titchmarsh-check", &h]));
    assert!(r["classification"]["error"].as_str().unwrap().contains("hypothesis"));

    let bad = write(tmp.path(), "bad.json", r#"{"angle": 1}"#);
    assert_eq!(code(&dkg(&["titchmarsh-check", &bad])), 2);
}

#[test]
fn thresholds_report() {
    let r = stdout_json(dkg(&[
        "thresholds", "--set", "potential=[-2.0, 0.5, 1.0]", "--set", "grid.n=1", "--set", "grid.tau=0.4", "--set", "grid.m=0.5",
    ]));
    assert_eq!(r["thresholds"]["tau1"]["kind"], "finite");
    assert!((r["thresholds"]["tau1"]["value"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(r["grid"]["below_tau2"], Value::Bool(true));
    assert_eq!(r["grid"]["omega_m_ok"], Value::Bool(true));
    assert_eq!(code(&dkg(&["thresholds", "--set", "potential=[1.0, -1.0]"])), 2);
}

#[test]
fn sweep_is_deterministic_and_records_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.toml",
        r#"
potential = [-2.0, 0.5, 1.0]
model = "oscillator_at_origin"
steps = 600
window = 256
hop = 128
s = 1.0
[grid]
n = 1
tau = 0.4
m = 0.5
[initial]
amplitude = 1.0
width = 2.0
seed = 1
[[vary]]
key = "initial.seed"
values = [1, 2, 3]
"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(dkg(&["sweep", "-c", &cfg, "-o", s(&a)]));
    ok(dkg(&["sweep", "-c", &cfg, "-o", s(&b)]));
    let csv_a = fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("sweep.csv")).unwrap());
    let m = json_file(&a.join("manifest.json"));
    let runs = m["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    assert_eq!(m["failed"], 0);
    let hashes: Vec<&str> = runs.iter().map(|r| r["config_hash"].as_str().unwrap()).collect();
    assert!(hashes[0] != hashes[1] && hashes[1] != hashes[2]);
    assert_eq!(runs[2]["config"]["initial"]["seed"], 3);
    // windows end at 256, 384, …, 602 samples: 3 per run
    assert_eq!(String::from_utf8(csv_a).unwrap().lines().count(), 1 + 9);

    let o = dkg(&["sweep", "-c", &cfg, "--set", "window=100", "-o", s(&a)]);
    assert_eq!(code(&o), 2);
}
