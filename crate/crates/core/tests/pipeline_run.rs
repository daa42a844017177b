use faultfuse::corpus::{generate_synthetic, SyntheticSpec, Template};
use faultfuse::metrics::{Baseline, RankingReport};
use faultfuse::pipeline::{run_pipeline, RunConfig};

#[test]
fn median3_seed7_fault_in_top3_with_baselines_matching_direct_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        datasets: vec!["median3".into()],
        seed: 7,
        out_dir: dir.path().join("run"),
        ..Default::default()
    };
    let s = run_pipeline(&cfg).unwrap();
    let rnn = s.reports.aggregate("rnn").unwrap();
    assert_eq!(rnn.top3, 1, "{rnn:?}");

    let d = generate_synthetic(&SyntheticSpec::new(Template::Median3, 100, 7)).unwrap();
    for b in Baseline::ALL {
        let direct = RankingReport::baseline(b, &d, 7).unwrap();
        let piped = s.reports.reports.iter().find(|r| r.model == b.name()).unwrap();
        assert_eq!(piped, &direct);
    }
}
