//! Sweep-level orderings on 64×64 synthetic fields.

use vortnet::bench::{run_sweep, summarize, SummaryRow, SweepConfig};
use vortnet::field::{turbulence_field, wake_field};
use vortnet::{Method, SamplerKind};

fn row(rows: &[SummaryRow], method: Method, sampler: SamplerKind) -> &SummaryRow {
    rows.iter()
        .find(|r| r.method == method && r.sampler == Some(sampler))
        .unwrap()
}

#[test]
fn sketch_halton_beats_uniform_on_wake() {
    let cfg = SweepConfig {
        fractions: vec![0.10],
        methods: vec![Method::SketchSvd],
        trials: 20,
        ..Default::default()
    };
    let rows = summarize(&run_sweep(wake_field(64, 64, 0).unwrap(), &cfg).unwrap()).unwrap();
    let h = row(&rows, Method::SketchSvd, SamplerKind::Halton).error.unwrap();
    let u = row(&rows, Method::SketchSvd, SamplerKind::Uniform).error.unwrap();
    assert!(h.median < u.median, "halton {} vs uniform {}", h.median, u.median);
}

#[test]
fn nystrom_on_turbulence_is_more_accurate_with_halton_and_faster_than_sketch() {
    let cfg = SweepConfig {
        fractions: vec![0.10],
        trials: 20,
        ..Default::default()
    };
    let rows = summarize(&run_sweep(turbulence_field(64, 64, 0).unwrap(), &cfg).unwrap()).unwrap();
    let h = row(&rows, Method::Nystrom, SamplerKind::Halton);
    let u = row(&rows, Method::Nystrom, SamplerKind::Uniform);
    assert!(h.error.unwrap().median < u.error.unwrap().median);
    for s in [SamplerKind::Uniform, SamplerKind::Halton] {
        let ny = row(&rows, Method::Nystrom, s).time.median;
        let sk = row(&rows, Method::SketchSvd, s).time.median;
        assert!(ny <= sk, "{s}: nystrom {ny}s vs sketch {sk}s");
    }
}
