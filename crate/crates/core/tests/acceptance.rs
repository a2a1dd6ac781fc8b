//! Acceptance gate: runs every criterion and prints one PASS/FAIL line each.
//! Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hybrid_qlstm::dataprep::{self, haversine_km, PreprocessConfig};
use hybrid_qlstm::harness::{self, evaluate, metrics_from_cm, ConfusionMatrix, TrainConfig};
use hybrid_qlstm::hybrid::{self, HybridModel, Mode, ModelKind, ModelSpec};
use hybrid_qlstm::neural::{bce_with_logits, LstmWeights};
use hybrid_qlstm::params::Parameters;
use hybrid_qlstm::qsim::StateVector;
use hybrid_qlstm::vqc::{self, VqcConfig, VqcParams};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `|a − b| / max(|a|, |b|, floor)`.
fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

fn metric_arithmetic() -> Outcome {
    let cm = ConfusionMatrix { tp: 725, fp: 45, tn: 705, fn_: 25 };
    let m = metrics_from_cm(&cm).map_err(|e| e.to_string())?;
    let table = [
        ("accuracy", m.accuracy, 95.33),
        ("precision", m.precision, 94.16),
        ("recall", m.recall, 96.67),
        ("f1", m.f1, 95.39),
    ];
    for (name, got, pct) in table {
        check((100.0 * got - pct).abs() <= 0.01, || format!("{name} {:.4}% vs {pct}%", 100.0 * got))?;
    }
    Ok(format!(
        "acc {:.2}% prec {:.2}% rec {:.2}% f1 {:.2}%",
        100.0 * m.accuracy,
        100.0 * m.precision,
        100.0 * m.recall,
        100.0 * m.f1
    ))
}

fn parameter_shift_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    let mut circuits = 0;
    for &n in &[1usize, 2, 3, 4, 6] {
        for layers in 1..=3 {
            for _ in 0..7 {
                let cfg = VqcConfig::new(n, layers).map_err(|e| e.to_string())?;
                let params = VqcParams::random(cfg, &mut rng);
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
                let up: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let objective = |x: &[f64], p: &VqcParams| -> f64 {
                    let q = vqc::forward(x, p).expect("valid circuit");
                    q.iter().zip(&up).map(|(a, b)| a * b).sum()
                };
                let g = vqc::backward(&x, &params, &up).map_err(|e| e.to_string())?;
                for k in 0..cfg.n_params() {
                    let mut plus = params.clone();
                    plus.as_flat_mut()[k] += h;
                    let mut minus = params.clone();
                    minus.as_flat_mut()[k] -= h;
                    let fd = (objective(&x, &plus) - objective(&x, &minus)) / (2.0 * h);
                    worst = worst.max((fd - g.params.as_flat()[k]).abs());
                }
                for k in 0..n {
                    let (mut xp, mut xm) = (x.clone(), x.clone());
                    xp[k] += h;
                    xm[k] -= h;
                    let fd = (objective(&xp, &params) - objective(&xm, &params)) / (2.0 * h);
                    worst = worst.max((fd - g.inputs[k]).abs());
                }
                circuits += 1;
            }
        }
    }
    check(circuits >= 100, || format!("only {circuits} circuits"))?;
    check(worst <= 1e-6, || format!("max |shift − fd| = {worst:.3e}"))?;
    Ok(format!("{circuits} circuits, max |shift − fd| = {worst:.2e}"))
}

fn hybrid_gradient_check() -> Outcome {
    let spec = ModelSpec {
        kind: ModelKind::Hybrid,
        input_size: 3,
        hidden_size: 4,
        lstm_layers: 1,
        n_qubits: 2,
        vqc_layers: 1,
        dropout: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = HybridModel::new(&spec, &mut rng).map_err(|e| e.to_string())?;
    let x = Array2::from_shape_simple_fn((4, 3), || rng.random_range(-1.5..1.5));
    let y = [1u8, 0, 1, 0];
    let (z, cache) = hybrid::forward(&model, x.view(), Mode::Eval).map_err(|e| e.to_string())?;
    let (_, dz) = bce_with_logits(&z, &y).map_err(|e| e.to_string())?;
    let analytic = hybrid::backward(&model, cache, &dz).map_err(|e| e.to_string())?.flatten();
    let base = model.flatten();
    let loss = |p: &[f64]| {
        let mut m = model.clone();
        m.assign_flat(p).expect("same layout");
        bce_with_logits(&hybrid::logits(&m, x.view()).expect("forward"), &y).expect("loss").0
    };
    let h = 1e-5;
    let floor = 1e-3;
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut v = base.clone();
        v[i] += h;
        let up = loss(&v);
        v[i] -= 2.0 * h;
        let down = loss(&v);
        worst = worst.max(rel_err(analytic[i], (up - down) / (2.0 * h), floor));
    }
    check(worst <= 1e-4, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("{} parameters, max relative error {worst:.2e} (floor {floor})", base.len()))
}

fn lstm_gradient_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-6;
    let floor = 1e-3;
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for _ in 0..40 {
        let input = rng.random_range(1..=4);
        let hidden = rng.random_range(1..=4);
        let seq = rng.random_range(1..=3);
        let layers = rng.random_range(1..=2);
        let mut w = LstmWeights::glorot(input, hidden, layers, &mut rng);
        // Non-zero biases so their gradients are exercised away from the init point.
        w.for_each_tensor_mut("", &mut |name, d| {
            if name.ends_with(".b") {
                d.iter_mut().for_each(|v| *v = rng.random_range(-0.5..0.5));
            }
        });
        let xs = Array2::from_shape_simple_fn((seq, input), || rng.random_range(-1.0..1.0));
        let up = Array1::from_shape_simple_fn(hidden, || rng.random_range(-1.0..1.0));
        let objective = |w: &LstmWeights, xs: &Array2<f64>| w.forward(xs.view()).expect("forward").0.dot(&up);
        let (_, cache) = w.forward(xs.view()).map_err(|e| e.to_string())?;
        let (gw, gx) = w.backward(&cache, up.view()).map_err(|e| e.to_string())?;
        let analytic = gw.flatten();
        let base = w.flatten();
        for i in 0..base.len() {
            let mut v = base.clone();
            let mut probe = w.clone();
            v[i] += h;
            probe.assign_flat(&v).map_err(|e| e.to_string())?;
            let plus = objective(&probe, &xs);
            v[i] -= 2.0 * h;
            probe.assign_flat(&v).map_err(|e| e.to_string())?;
            let minus = objective(&probe, &xs);
            worst = worst.max(rel_err(analytic[i], (plus - minus) / (2.0 * h), floor));
            checked += 1;
        }
        for idx in ndarray::indices(xs.dim()) {
            let (mut xp, mut xm) = (xs.clone(), xs.clone());
            xp[idx] += h;
            xm[idx] -= h;
            let fd = (objective(&w, &xp) - objective(&w, &xm)) / (2.0 * h);
            worst = worst.max(rel_err(gx[idx], fd, floor));
            checked += 1;
        }
    }
    check(worst <= 1e-5, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("40 instances, {checked} gradients, max relative error {worst:.2e} (floor {floor})"))
}

fn desk_scale_training() -> Outcome {
    let rows = dataprep::generate_synthetic(10_000, 7).map_err(|e| e.to_string())?;
    let split = dataprep::preprocess(&rows, &PreprocessConfig { per_class: 5000, seed: 7, ..Default::default() })
        .map_err(|e| e.to_string())?;
    check(
        (split.train.len(), split.val.len(), split.test.len()) == (7000, 1500, 1500),
        || "split sizes differ from 7000/1500/1500".into(),
    )?;
    let mut summary = Vec::new();
    for kind in [ModelKind::Hybrid, ModelKind::Baseline] {
        let cfg = TrainConfig {
            epochs: 30,
            n_qubits: 4,
            n_layers: 2,
            seed: 7,
            model_kind: kind,
            ..Default::default()
        };
        let out = harness::train(&cfg, &split).map_err(|e| e.to_string())?;
        let best = out.best.ok_or("no checkpoint recorded")?;
        let report = evaluate(&best.model, &split.test, 0.5).map_err(|e| e.to_string())?;
        let m = report.metrics;
        summary.push(format!("{kind} acc {:.4} f1 {:.4}", m.accuracy, m.f1));
        check(m.accuracy >= 0.90, || format!("{kind} test accuracy {:.4} < 0.90", m.accuracy))?;
        if kind == ModelKind::Hybrid {
            check(m.f1 >= 0.90, || format!("hybrid test F1 {:.4} < 0.90", m.f1))?;
        }
    }
    Ok(summary.join("; "))
}

fn statevector_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut sv = StateVector::new(5).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let q = rng.random_range(0..5);
        let a: f64 = rng.random_range(-PI..PI);
        match rng.random_range(0..4) {
            0 => sv.ry(q, a),
            1 => sv.rz(q, a),
            2 => sv.rot(q, a, rng.random_range(-PI..PI), rng.random_range(-PI..PI)),
            _ => sv.cnot(q, (q + rng.random_range(1..5)) % 5),
        }
        .map_err(|e| e.to_string())?;
        worst = worst.max((sv.norm_sqr() - 1.0).abs());
    }
    check(worst <= 1e-12, || format!("norm drift {worst:.3e}"))?;

    let before = sv.clone();
    sv.cnot(1, 3).and_then(|s| s.cnot(1, 3)).map_err(|e| e.to_string())?;
    check(sv.amplitudes() == before.amplitudes(), || "CNOT·CNOT is not the identity".into())?;

    let mut additivity: f64 = 0.0;
    for _ in 0..200 {
        let (a, b) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let q = rng.random_range(0..5);
        let mut split = before.clone();
        split.ry(q, a).and_then(|s| s.ry(q, b)).map_err(|e| e.to_string())?;
        let mut joint = before.clone();
        joint.ry(q, a + b).map_err(|e| e.to_string())?;
        for (x, y) in split.amplitudes().iter().zip(joint.amplitudes()) {
            additivity = additivity.max((x - y).norm());
        }
    }
    check(additivity <= 1e-12, || format!("RY additivity error {additivity:.3e}"))?;

    let mut two = StateVector::new(2).map_err(|e| e.to_string())?;
    two.ry(0, 0.3).and_then(|s| s.ry(1, 0.7)).and_then(|s| s.cnot(0, 1)).map_err(|e| e.to_string())?;
    let z1 = two.expect_z(1).map_err(|e| e.to_string())?;
    let target = 0.3f64.cos() * 0.7f64.cos();
    check((z1 - target).abs() <= 1e-12, || format!("<Z1> = {z1} vs {target}"))?;
    Ok(format!(
        "norm drift {worst:.1e} over 10^4 gates, RY additivity {additivity:.1e}, <Z1> = {z1:.9}"
    ))
}

fn run_cli(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hqlstm"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!("hqlstm {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

/// Wall-clock columns cannot repeat across runs, so they are masked before comparing.
fn mask_epoch_seconds(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l.to_string(), |(head, _)| format!("{head},*")))
        .collect::<Vec<_>>()
        .join("\n")
}

fn mask_inference_seconds(json: &str) -> Result<String, String> {
    let mut v: serde_json::Value = serde_json::from_str(json).map_err(|e| e.to_string())?;
    v.as_object_mut().ok_or("report is not an object")?.remove("inference_seconds");
    Ok(v.to_string())
}

fn pipeline_determinism() -> Outcome {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d = dir.path();
        run_cli(&["generate", "--rows", "10000", "--seed", "11", "--out", "data.csv"], d)?;
        run_cli(&["preprocess", "--in", "data.csv", "--out-dir", "splits", "--per-class", "5000", "--seed", "11"], d)?;
        run_cli(
            &["train", "--data", "splits", "--model", "baseline", "--epochs", "3", "--seed", "11", "--out", "run", "--quiet"],
            d,
        )?;
        run_cli(&["evaluate", "--checkpoint", "run/best.ckpt", "--data", "splits", "--split", "test", "--out", "report"], d)?;
        let mut artifacts = Vec::new();
        for f in ["data.csv", "splits/train.csv", "splits/test.csv", "splits/metadata.json", "run/best.ckpt"] {
            artifacts.push((f, read(&d.join(f))?));
        }
        artifacts.push(("run/epochs.csv", mask_epoch_seconds(&read(&d.join("run/epochs.csv"))?)));
        artifacts.push(("run/metrics.json", mask_inference_seconds(&read(&d.join("run/metrics.json"))?)?));
        artifacts.push(("report/metrics.json", mask_inference_seconds(&read(&d.join("report/metrics.json"))?)?));
        runs.push(artifacts);
    }
    for ((name, a), (_, b)) in runs[0].iter().zip(&runs[1]) {
        check(a == b, || format!("{name} differs between runs"))?;
    }
    Ok(format!("{} artifacts identical (timing columns masked)", runs[0].len()))
}

fn haversine_values() -> Outcome {
    let cases = [
        ((0.0, 0.0, 0.0, 0.0), 0.0),
        ((0.0, 0.0, 0.0, 180.0), PI * 6371.0),
        ((0.0, 0.0, 90.0, 0.0), PI / 2.0 * 6371.0),
    ];
    let mut got = Vec::new();
    for ((a, b, c, d), want) in cases {
        let km = haversine_km(a, b, c, d).map_err(|e| e.to_string())?;
        check((km - want).abs() <= 1e-6, || format!("{km} km vs {want} km"))?;
        got.push(format!("{km:.3}"));
    }
    Ok(format!("{} km", got.join(" / ")))
}

fn simulator_scaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut setup = |n: usize| -> Result<(Vec<f64>, VqcParams), String> {
        let cfg = VqcConfig::new(n, 2).map_err(|e| e.to_string())?;
        Ok(((0..n).map(|_| rng.random_range(-PI..PI)).collect(), VqcParams::random(cfg, &mut rng)))
    };
    let (x10, p10) = setup(10)?;
    let (x12, p12) = setup(12)?;
    let time = |x: &[f64], p: &VqcParams| -> Result<Duration, String> {
        let start = Instant::now();
        std::hint::black_box(vqc::forward(std::hint::black_box(x), p).map_err(|e| e.to_string())?);
        Ok(start.elapsed())
    };
    for _ in 0..10 {
        time(&x10, &p10)?;
        time(&x12, &p12)?;
    }
    let (mut t10, mut t12) = (Duration::ZERO, Duration::ZERO);
    for _ in 0..100 {
        t10 += time(&x10, &p10)?;
        t12 += time(&x12, &p12)?;
    }
    let ratio = t12.as_secs_f64() / t10.as_secs_f64();
    check((3.0..=8.0).contains(&ratio), || format!("n=12 / n=10 time ratio {ratio:.2}"))?;
    Ok(format!(
        "mean {:.1} µs (n=10) vs {:.1} µs (n=12), ratio {ratio:.2}",
        t10.as_secs_f64() * 1e4,
        t12.as_secs_f64() * 1e4
    ))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("metric arithmetic", Duration::from_secs(1), metric_arithmetic),
        ("parameter-shift exactness", Duration::from_secs(60), parameter_shift_suite),
        ("end-to-end hybrid gradient", Duration::from_secs(30), hybrid_gradient_check),
        ("LSTM gradient suite", Duration::from_secs(30), lstm_gradient_suite),
        ("desk-scale training", Duration::from_secs(30 * 60), desk_scale_training),
        ("statevector properties", Duration::from_secs(10), statevector_suite),
        ("pipeline determinism", Duration::from_secs(120), pipeline_determinism),
        ("haversine forced values", Duration::from_secs(1), haversine_values),
        ("simulator scaling", Duration::from_secs(120), simulator_scaling),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            check(elapsed <= *budget, || format!("took {elapsed:.2?}, budget {budget:?}")).map(|_| detail)
        });
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
