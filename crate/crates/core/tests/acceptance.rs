//! Acceptance suite. Runs every check in order, prints one PASS/FAIL line
//! each, and exits nonzero if any failed.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vortnet::analysis::{angle_error, angle_error_rad, kmeans_cluster, matched_accuracy, KMeansOptions};
use vortnet::bench::{run_sweep, summarize, Stats, SummaryRow, SweepConfig, RECORD_COLUMNS, TIMING_COLUMNS};
use vortnet::eigen::{
    nystrom, power_dominant, sketch_svd, DenseSymmetric, EigenApproximation, PowerOptions,
    SymmetricOperator, DEFAULT_PINV_RTOL,
};
use vortnet::field::{synth_vortex_field, turbulence, turbulence_field, wake_field};
use vortnet::graph::{bytes_to_gib, memory_estimate};
use vortnet::sampling::{draw_sample, radical_inverse, sample_count};
use vortnet::{AdjacencyOperator, GridSpec, Method, SampleIndexSet, SamplerKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Eigenpairs of a dense symmetric matrix, sorted by `key` descending.
fn dense_eig(op: &impl SymmetricOperator, key: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = op.dim();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().enumerate().for_each(|(i, x)| *x = f64::from(i == j));
        op.apply(&e, &mut col);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(eig.eigenvalues[b]).total_cmp(&key(eig.eigenvalues[a])));
    (
        order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect(),
    )
}

fn memory_arithmetic() -> Outcome {
    let table = [(316usize, 74.29), (421, 214.67), (256, 32.00), (342, 101.92)];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (side, gib) in table {
        let got = bytes_to_gib(memory_estimate(side * side));
        let rel = (got - gib).abs() / gib;
        worst = worst.max(rel);
        detail.push(format!("{side}²→{got:.2}"));
    }
    outcome(worst <= 0.005, format!("{} GiB, worst rel {worst:.2e}", detail.join(" ")))
}

fn oracle_equivalence() -> Outcome {
    let grid = GridSpec::covering(12, 12, turbulence::EXTENT.0, turbulence::EXTENT.1).unwrap();
    let (mut worst_deg, mut worst_rel) = (0.0f64, 0.0f64);
    for seed in 0..20 {
        let f = synth_vortex_field(grid, turbulence::VORTICES, seed, turbulence::STRENGTH, turbulence::CORE).unwrap();
        let op = AdjacencyOperator::new(f);
        let dense = DenseSymmetric::new(op.materialize(u128::MAX).unwrap()).unwrap();
        let (alg_vals, alg_vecs) = dense_eig(&dense, |x| x);
        let (mag_vals, mag_vecs) = dense_eig(&dense, f64::abs);
        let full = SampleIndexSet::full(op.n());
        let ny = nystrom(&op, &full, 3, DEFAULT_PINV_RTOL).unwrap();
        let sk = sketch_svd(&op, &full, 3, false).unwrap();
        for j in 0..3 {
            worst_deg = worst_deg
                .max(angle_error(&alg_vecs[j], &ny.vector(j)).unwrap())
                .max(angle_error(&mag_vecs[j], &sk.vector(j)).unwrap());
            worst_rel = worst_rel
                .max((ny.values()[j] - alg_vals[j]).abs() / alg_vals[j].abs())
                .max((sk.values()[j] - mag_vals[j].abs()).abs() / mag_vals[j].abs());
        }
    }
    outcome(
        worst_deg < 1e-6 && worst_rel < 1e-8,
        format!("20 fields, worst angle {worst_deg:.2e}°, worst eigenvalue rel {worst_rel:.2e}"),
    )
}

fn power_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_rad, mut worst_rel) = (0.0f64, 0.0f64);
    for trial in 0..50 {
        let n = 20;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let x: f64 = rng.random();
                m[i * n + j] = x;
                m[j * n + i] = x;
            }
        }
        let op = DenseSymmetric::from_fn(n, |i, j| m[i * n + j]);
        let (vals, vecs) = dense_eig(&op, |x| x);
        let e = power_dominant(&op, 3, PowerOptions { tol: 1e-12, max_iters: 100_000, seed: trial }).unwrap();
        for j in 0..3 {
            worst_rad = worst_rad.max(angle_error_rad(&vecs[j], &e.vector(j)).unwrap());
            worst_rel = worst_rel.max((e.values()[j] - vals[j]).abs() / vals[0]);
        }
    }
    outcome(
        worst_rad < 1e-8 && worst_rel < 1e-10,
        format!("50 matrices, worst angle {worst_rad:.2e} rad, worst |Δλ|/λ₁ {worst_rel:.2e}"),
    )
}

fn nystrom_sweep_rows() -> Vec<SummaryRow> {
    let cfg = SweepConfig {
        field_id: "turbulence-64".into(),
        k: 3,
        fractions: vec![0.01, 0.02, 0.05, 0.10, 0.20],
        samplers: vec![SamplerKind::Uniform, SamplerKind::Halton],
        methods: vec![Method::Nystrom],
        trials: 20,
        ..Default::default()
    };
    let records = run_sweep(turbulence_field(64, 64, 0).unwrap(), &cfg).unwrap();
    summarize(&records).unwrap()
}

fn stats_for(rows: &[SummaryRow], sampler: SamplerKind, fraction: f64) -> Stats {
    rows.iter()
        .find(|r| r.sampler == Some(sampler) && r.fraction == fraction)
        .and_then(|r| r.error)
        .expect("summary row present")
}

fn sampler_ordering(rows: &[SummaryRow]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for f in [0.01, 0.02, 0.05, 0.10] {
        let h = stats_for(rows, SamplerKind::Halton, f);
        let u = stats_for(rows, SamplerKind::Uniform, f);
        pass &= h.median <= u.median;
        if f >= 0.05 {
            pass &= h.iqr() <= u.iqr();
        }
        detail.push(format!(
            "{:.0}%: median H {:.2} U {:.2}, IQR H {:.2} U {:.2}",
            f * 100.0,
            h.median,
            u.median,
            h.iqr(),
            u.iqr()
        ));
    }
    outcome(pass, detail.join("; "))
}

fn error_decay(rows: &[SummaryRow]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for s in [SamplerKind::Uniform, SamplerKind::Halton] {
        let med: Vec<f64> = [0.01, 0.02, 0.05, 0.10, 0.20]
            .iter()
            .map(|&f| stats_for(rows, s, f).median)
            .collect();
        let rises: Vec<f64> = med.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
        pass &= rises.len() <= 1 && rises.iter().all(|d| *d <= 0.5);
        detail.push(format!(
            "{s}: [{}]",
            med.iter().map(|m| format!("{m:.2}")).collect::<Vec<_>>().join(", ")
        ));
    }
    outcome(pass, detail.join("; "))
}

fn wake_quality() -> Outcome {
    let cfg = SweepConfig {
        field_id: "wake-64".into(),
        fractions: vec![0.10],
        samplers: vec![SamplerKind::Halton],
        methods: vec![Method::Nystrom],
        trials: 20,
        ..Default::default()
    };
    let records = run_sweep(wake_field(64, 64, 0).unwrap(), &cfg).unwrap();
    let e = summarize(&records).unwrap()[0].error.unwrap();
    outcome(e.median < 10.0, format!("median {:.3}° (IQR {:.3}°)", e.median, e.iqr()))
}

fn clustering_agreement() -> Outcome {
    let op = AdjacencyOperator::new(wake_field(64, 64, 0).unwrap());
    let dense = DenseSymmetric::new(op.materialize(u128::MAX).unwrap()).unwrap();
    let exact = power_dominant(&dense, 3, PowerOptions::default()).unwrap();
    let opts = |seed| KMeansOptions {
        use_k: 3,
        clusters: 7,
        seed,
        ..Default::default()
    };
    let reference = kmeans_cluster(&exact, opts(0)).unwrap();
    let l = sample_count(0.10, op.n(), 3).unwrap();
    let mut scores = Vec::new();
    for seed in 0..20 {
        let sample = draw_sample(SamplerKind::Halton, op.field().grid(), l, seed).unwrap();
        let approx = nystrom(&op, &sample, 3, DEFAULT_PINV_RTOL).unwrap();
        let labels = kmeans_cluster(&approx, opts(seed)).unwrap().labels;
        scores.push(matched_accuracy(&reference.labels, &labels).unwrap());
    }
    let good = scores.iter().filter(|&&s| s >= 0.95).count();
    let min = scores.iter().copied().fold(1.0, f64::min);
    outcome(good >= 18, format!("{good}/20 seeds ≥ 95% (min {min:.4})"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    vortnet::bench::percentile(&v, 0.5)
}

fn complexity_ordering() -> Outcome {
    let op = AdjacencyOperator::new(turbulence_field(96, 96, 0).unwrap());
    let l = sample_count(0.10, op.n(), 3).unwrap();
    let (mut ny_t, mut sk_t) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let sample = draw_sample(SamplerKind::Uniform, op.field().grid(), l, seed).unwrap();
        ny_t.push(nystrom(&op, &sample, 3, DEFAULT_PINV_RTOL).unwrap().times().decompose);
        sk_t.push(sketch_svd(&op, &sample, 3, false).unwrap().times().decompose);
    }
    let (a, b) = (median(ny_t), median(sk_t));
    outcome(a < b, format!("n = 9216, l = {l}: decompose median nystrom {a:.3}s vs sketch {b:.3}s"))
}

/// Independent radical inverse: reverse the base-b digit string of t.
fn digit_reversal(t: u64, base: u64) -> f64 {
    let mut digits = Vec::new();
    let mut x = t;
    while x > 0 {
        digits.push(x % base);
        x /= base;
    }
    digits
        .iter()
        .enumerate()
        .map(|(p, &d)| d as f64 / (base as f64).powi(p as i32 + 1))
        .sum()
}

fn structural_suite() -> Outcome {
    let mut failures = Vec::new();

    let op = AdjacencyOperator::new(turbulence_field(32, 32, 11).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let i = rng.random_range(0..op.n());
        let j = rng.random_range(0..op.n());
        let (a, b) = (op.entry(i, j).unwrap(), op.entry(j, i).unwrap());
        if a != b || a < 0.0 || (i == j && a != 0.0) || !a.is_finite() {
            failures.push(format!("entry ({i},{j})"));
            break;
        }
    }
    for t in 1..=3 {
        for base in [2, 3] {
            if radical_inverse(t, base) != digit_reversal(t, base) {
                failures.push(format!("radical inverse φ{base}({t})"));
            }
        }
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let cases = [
        (vec![0.3, -1.2, 2.0], vec![0.3, -1.2, 2.0], 0.0),
        (vec![1.0, 0.0], vec![0.0, 1.0], 90.0),
        (vec![1.0, 0.0], vec![s, s], 45.0),
    ];
    for (v, w, want) in cases {
        if (angle_error(&v, &w).unwrap() - want).abs() > 1e-12 {
            failures.push(format!("angle {want}°"));
        }
    }

    let field = turbulence_field(16, 16, 5).unwrap();
    let base_op = AdjacencyOperator::new(field.clone());
    let sample = draw_sample(SamplerKind::Halton, field.grid(), 64, 0).unwrap();
    let base_ny = nystrom(&base_op, &sample, 3, DEFAULT_PINV_RTOL).unwrap();
    let base_pw = power_dominant(&base_op, 3, PowerOptions { tol: 1e-12, ..Default::default() }).unwrap();
    for c in [0.5, 3.7, -2.0] {
        let op = AdjacencyOperator::new(field.scaled(c).unwrap());
        let ny = nystrom(&op, &sample, 3, DEFAULT_PINV_RTOL).unwrap();
        let pw = power_dominant(&op, 3, PowerOptions { tol: 1e-12, ..Default::default() }).unwrap();
        for (a, b) in [(&base_ny, &ny), (&base_pw, &pw)] {
            check_scaled(a, b, c.abs(), &mut failures);
        }
    }
    let pass = failures.is_empty();
    outcome(
        pass,
        if pass {
            "symmetry/zero diagonal/nonnegativity, radical inverse, angle cases, ω-scaling".to_string()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn check_scaled(base: &EigenApproximation, scaled: &EigenApproximation, c: f64, failures: &mut Vec<String>) {
    for j in 0..3 {
        let want = c * base.values()[j];
        if (scaled.values()[j] - want).abs() > 1e-10 * want.abs().max(1e-300) {
            failures.push(format!("{} eigenvalue {j} under scale {c}", base.method()));
        }
        // Same vector up to rounding, with the same fixed sign.
        let (v, w) = (base.vector(j), scaled.vector(j));
        let diff = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if diff > 1e-8 {
            failures.push(format!("{} eigenvector {j} under scale {c}", base.method()));
        }
    }
}

fn run_cli(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_vortnet"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

/// CSV text with the named columns blanked out.
fn mask_columns(text: &str, masked: &[&str]) -> String {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let drop: Vec<bool> = header.iter().map(|h| masked.contains(h)).collect();
    std::iter::once(header.join(","))
        .chain(lines.map(|l| {
            l.split(',')
                .zip(&drop)
                .map(|(f, &d)| if d { "*" } else { f })
                .collect::<Vec<_>>()
                .join(",")
        }))
        .collect::<Vec<_>>()
        .join("\n")
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = || -> Result<Vec<String>, String> {
        run_cli(&["gen", "--nx", "32", "--ny", "32", "--vortices", "40", "--seed", "3", "--out", "f.vort"], d)?;
        let mut checks = Vec::new();
        for (method, out) in [("nystrom", "a"), ("sketch", "b"), ("power", "c")] {
            for rep in 0..2 {
                let file = format!("{out}{rep}.csv");
                run_cli(
                    &["eig", "--field", "f.vort", "--method", method, "--sampler", "halton", "--fraction", "0.1", "--k", "3", "--seed", "5", "--out", &file],
                    d,
                )?;
            }
            let a = std::fs::read(d.join(format!("{out}0.csv"))).unwrap();
            let b = std::fs::read(d.join(format!("{out}1.csv"))).unwrap();
            if a != b {
                checks.push(format!("eig {method}"));
            }
        }
        for rep in 0..2 {
            let out = format!("bench{rep}.csv");
            run_cli(
                &["bench", "--field", "f.vort", "--fractions", "0.05,0.1,1.0", "--trials", "4", "--seed", "2", "--out", &out],
                d,
            )?;
        }
        let read = |p: &str| std::fs::read_to_string(d.join(p)).unwrap();
        let timing_summary = ["time_median", "time_p25", "time_p75", "time_mean"];
        if mask_columns(&read("bench0.csv"), &TIMING_COLUMNS) != mask_columns(&read("bench1.csv"), &TIMING_COLUMNS) {
            checks.push("bench records".into());
        }
        if mask_columns(&read("bench0.summary.csv"), &timing_summary)
            != mask_columns(&read("bench1.summary.csv"), &timing_summary)
        {
            checks.push("bench summary".into());
        }
        if read("bench0.csv").lines().next() != Some(RECORD_COLUMNS.join(",").as_str()) {
            checks.push("records header".into());
        }
        Ok(checks)
    };
    match run() {
        Ok(bad) if bad.is_empty() => outcome(true, "eig (3 methods) and bench reruns identical outside timing columns"),
        Ok(bad) => outcome(false, format!("differs: {}", bad.join(", "))),
        Err(e) => outcome(false, e),
    }
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("acceptance {id:>2} {status} {name} ({:.1}s): {}", t.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report(1, "memory arithmetic", &memory_arithmetic);
    report(2, "oracle equivalence", &oracle_equivalence);
    report(3, "power iteration correctness", &power_correctness);
    let t = Instant::now();
    let rows = nystrom_sweep_rows();
    println!("(turbulence sweep: {:.1}s)", t.elapsed().as_secs_f64());
    report(4, "sampler ordering", &|| sampler_ordering(&rows));
    report(5, "error decay", &|| error_decay(&rows));
    report(6, "ten-percent quality on wake", &wake_quality);
    report(7, "clustering agreement on wake", &clustering_agreement);
    report(8, "complexity ordering", &complexity_ordering);
    report(9, "structural properties", &structural_suite);
    report(10, "CLI determinism", &cli_determinism);
    if failed > 0 {
        println!("acceptance: {failed} of 10 failed");
        std::process::exit(1);
    }
    println!("acceptance: all 10 passed");
}
