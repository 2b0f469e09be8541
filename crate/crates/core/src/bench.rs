//! Error/time sweeps over sampling fractions, samplers and methods.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::analysis::angle_error;
use crate::eigen::{
    nystrom, power_dominant, sketch_svd, DenseSymmetric, EigenApproximation, Method, PhaseTimes,
    PowerOptions, DEFAULT_PINV_RTOL,
};
use crate::error::{Error, Result};
use crate::field::VorticityField;
use crate::graph::{memory_estimate, AdjacencyOperator};
use crate::par;
use crate::sampling::{draw_sample, sample_count, SamplerKind};

/// Fixed column order of the records CSV.
pub const RECORD_COLUMNS: [&str; 12] = [
    "field_id",
    "n",
    "method",
    "sampler",
    "fraction",
    "l",
    "seed",
    "angle_error_deg",
    "wall_time_s",
    "sketch_s",
    "decompose_s",
    "reconstruct_s",
];

/// Columns that hold wall-clock measurements.
pub const TIMING_COLUMNS: [&str; 4] = ["wall_time_s", "sketch_s", "decompose_s", "reconstruct_s"];

/// Fixed column order of the summary CSV.
pub const SUMMARY_COLUMNS: [&str; 13] = [
    "method",
    "sampler",
    "fraction",
    "l",
    "trials",
    "error_median",
    "error_p25",
    "error_p75",
    "error_mean",
    "time_median",
    "time_p25",
    "time_p75",
    "time_mean",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub field_id: String,
    pub n: usize,
    pub method: Method,
    /// `None` for the power baseline.
    pub sampler: Option<SamplerKind>,
    pub fraction: f64,
    pub l: usize,
    pub seed: u64,
    /// Leading-eigenvector error against the baseline; absent for power.
    pub angle_error_deg: Option<f64>,
    pub wall_time_s: f64,
    pub times: PhaseTimes,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub field_id: String,
    pub k: usize,
    pub fractions: Vec<f64>,
    pub samplers: Vec<SamplerKind>,
    /// Randomized methods to sweep. Including [`Method::Power`] adds a single
    /// record for the baseline solve.
    pub methods: Vec<Method>,
    pub trials: usize,
    pub base_seed: u64,
    pub power: PowerOptions,
    /// Gram route for the sketched SVD.
    pub gram: bool,
    pub pinv_rtol: f64,
    /// The baseline uses a stored matrix when it fits under this many bytes,
    /// and runs matrix-free otherwise.
    pub dense_cap: u128,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            field_id: "field".into(),
            k: 3,
            fractions: vec![0.01, 0.02, 0.05, 0.10, 0.20],
            samplers: vec![SamplerKind::Uniform, SamplerKind::Halton],
            methods: vec![Method::SketchSvd, Method::Nystrom],
            trials: 20,
            base_seed: 0,
            power: PowerOptions::default(),
            gram: false,
            pinv_rtol: DEFAULT_PINV_RTOL,
            dense_cap: 1 << 30,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if self.fractions.is_empty() || self.samplers.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidArgument(
                "fractions, samplers and methods must be nonempty".into(),
            ));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(Error::InvalidRange(format!("fraction {f} is outside (0, 1]")));
        }
        Ok(())
    }
}

/// Leading pairs by power iteration, on a stored copy of `A` if it fits.
pub fn baseline(op: &AdjacencyOperator, k: usize, opts: PowerOptions, dense_cap: u128) -> Result<EigenApproximation> {
    if memory_estimate(op.n()) <= dense_cap {
        let dense = DenseSymmetric::new(op.materialize(dense_cap)?)?;
        power_dominant(&dense, k, opts)
    } else {
        power_dominant(op, k, opts)
    }
}

/// One randomized approximation for a (method, sampler, l, seed) job.
pub fn approximate(
    op: &AdjacencyOperator,
    method: Method,
    sampler: SamplerKind,
    l: usize,
    k: usize,
    seed: u64,
    cfg: &SweepConfig,
) -> Result<EigenApproximation> {
    let sample = draw_sample(sampler, op.field().grid(), l, seed)?;
    match method {
        Method::Nystrom => nystrom(op, &sample, k, cfg.pinv_rtol),
        Method::SketchSvd => sketch_svd(op, &sample, k, cfg.gram),
        Method::Power => Err(Error::InvalidArgument(
            "power iteration does not use a sample".into(),
        )),
    }
}

struct Job {
    method: Method,
    sampler: SamplerKind,
    fraction: f64,
    l: usize,
    seed: u64,
}

/// Runs the baseline once, then every (method, sampler, fraction, trial)
/// combination. Records come back ordered by that key regardless of how the
/// trials were scheduled.
pub fn run_sweep(field: VorticityField, cfg: &SweepConfig) -> Result<Vec<BenchmarkRecord>> {
    cfg.validate()?;
    let op = AdjacencyOperator::new(field);
    let n = op.n();

    // Errors are measured on the leading eigenvector only.
    let t0 = Instant::now();
    let base = baseline(&op, 1, cfg.power, cfg.dense_cap)?;
    let base_wall = t0.elapsed().as_secs_f64();
    let reference = base.vector(0);

    let mut records = Vec::new();
    if cfg.methods.contains(&Method::Power) {
        records.push(BenchmarkRecord {
            field_id: cfg.field_id.clone(),
            n,
            method: Method::Power,
            sampler: None,
            fraction: 1.0,
            l: n,
            seed: cfg.power.seed,
            angle_error_deg: None,
            wall_time_s: base_wall,
            times: base.times(),
        });
    }

    let mut jobs = Vec::new();
    for &method in cfg.methods.iter().filter(|m| **m != Method::Power) {
        for &sampler in &cfg.samplers {
            for &fraction in &cfg.fractions {
                let l = sample_count(fraction, n, cfg.k)?;
                for trial in 0..cfg.trials as u64 {
                    jobs.push(Job {
                        method,
                        sampler,
                        fraction,
                        l,
                        seed: cfg.base_seed + trial,
                    });
                }
            }
        }
    }

    let results = par::map_slice(&jobs, |job| -> Result<BenchmarkRecord> {
        let t = Instant::now();
        let approx = approximate(&op, job.method, job.sampler, job.l, cfg.k, job.seed, cfg)?;
        let wall = t.elapsed().as_secs_f64();
        Ok(BenchmarkRecord {
            field_id: cfg.field_id.clone(),
            n,
            method: job.method,
            sampler: Some(job.sampler),
            fraction: job.fraction,
            l: job.l,
            seed: job.seed,
            angle_error_deg: Some(angle_error(&reference, &approx.vector(0))?),
            wall_time_s: wall,
            times: approx.times(),
        })
    });
    for r in results {
        records.push(r?);
    }
    Ok(records)
}

fn sampler_name(s: Option<SamplerKind>) -> &'static str {
    s.map_or("none", |s| s.as_str())
}

pub fn write_records_csv(records: &[BenchmarkRecord], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{}", RECORD_COLUMNS.join(","))?;
    for r in records {
        let err = r.angle_error_deg.map(|e| format!("{e:.16e}")).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.field_id,
            r.n,
            r.method,
            sampler_name(r.sampler),
            r.fraction,
            r.l,
            r.seed,
            err,
            r.wall_time_s,
            r.times.sketch,
            r.times.decompose,
            r.times.reconstruct,
        )?;
    }
    Ok(())
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<BenchmarkRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records_csv(&text)
}

pub fn parse_records_csv(text: &str) -> Result<Vec<BenchmarkRecord>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != RECORD_COLUMNS.join(",") {
        return Err(Error::MalformedHeader(format!("unexpected header {header:?}")));
    }
    fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
        s.parse()
            .map_err(|_| Error::MalformedData(format!("bad {what} {s:?}")))
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != RECORD_COLUMNS.len() {
                return Err(Error::MalformedData(format!("expected 12 fields in {line:?}")));
            }
            Ok(BenchmarkRecord {
                field_id: f[0].to_string(),
                n: num(f[1], "n")?,
                method: f[2].parse()?,
                sampler: match f[3] {
                    "none" => None,
                    s => Some(s.parse()?),
                },
                fraction: num(f[4], "fraction")?,
                l: num(f[5], "l")?,
                seed: num(f[6], "seed")?,
                angle_error_deg: match f[7] {
                    "" => None,
                    s => Some(num(s, "angle error")?),
                },
                wall_time_s: num(f[8], "wall time")?,
                times: PhaseTimes {
                    sketch: num(f[9], "sketch time")?,
                    decompose: num(f[10], "decompose time")?,
                    reconstruct: num(f[11], "reconstruct time")?,
                },
            })
        })
        .collect()
}

/// Percentile by linear interpolation between order statistics
/// (position `q·(m−1)` in the sorted sample).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
    pub mean: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            median: percentile(&v, 0.5),
            p25: percentile(&v, 0.25),
            p75: percentile(&v, 0.75),
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }

    pub fn iqr(&self) -> f64 {
        self.p75 - self.p25
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub sampler: Option<SamplerKind>,
    pub fraction: f64,
    pub l: usize,
    pub trials: usize,
    /// Absent for the power baseline.
    pub error: Option<Stats>,
    pub time: Stats,
}

/// Per (method, sampler, fraction) statistics, in order of first appearance.
pub fn summarize(records: &[BenchmarkRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to summarize".into()));
    }
    let mut groups: Vec<(Method, Option<SamplerKind>, f64, usize, Vec<&BenchmarkRecord>)> = Vec::new();
    for r in records {
        match groups
            .iter_mut()
            .find(|g| g.0 == r.method && g.1 == r.sampler && g.2 == r.fraction)
        {
            Some(g) => g.4.push(r),
            None => groups.push((r.method, r.sampler, r.fraction, r.l, vec![r])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(method, sampler, fraction, l, rs)| {
            let errors: Vec<f64> = rs.iter().filter_map(|r| r.angle_error_deg).collect();
            let times: Vec<f64> = rs.iter().map(|r| r.wall_time_s).collect();
            SummaryRow {
                method,
                sampler,
                fraction,
                l,
                trials: rs.len(),
                error: Stats::of(&errors),
                time: Stats::of(&times).expect("group is nonempty"),
            }
        })
        .collect())
}

pub fn write_summary_csv(rows: &[SummaryRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{}", SUMMARY_COLUMNS.join(","))?;
    for r in rows {
        let err = r.error.map_or_else(
            || ",,,".to_string(),
            |e| format!("{:.16e},{:.16e},{:.16e},{:.16e}", e.median, e.p25, e.p75, e.mean),
        );
        writeln!(
            w,
            "{},{},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.method,
            sampler_name(r.sampler),
            r.fraction,
            r.l,
            r.trials,
            err,
            r.time.median,
            r.time.p25,
            r.time.p75,
            r.time.mean,
        )?;
    }
    Ok(())
}
