use sbstack::sim::{self, ExperimentConfig, ResultRow};

const BASE: &str = r#"
schema_version = 1
name = "integration"
antennas = ["2x2"]
qam = [4]
decoders = ["ml"]
snr_db = [30]
trials = 1000
"#;

fn run(text: &str) -> Vec<ResultRow> {
    sim::run_experiment(&ExperimentConfig::from_toml_str(text).unwrap()).unwrap()
}

#[test]
fn ml_makes_no_errors_at_high_snr() {
    let rows = run(BASE);
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].trials, rows[0].error_events, rows[0].ser), (1000, 0, 0.0));
}

#[test]
fn ml_class_ser_falls_by_six_db() {
    let text = BASE
        .replace("snr_db = [30]", "snr_db = [4, 10]")
        .replace("trials = 1000", "trials = 10000")
        .replace("[\"ml\"]", "[\"ml\", \"sphere\", \"sb-stack\"]");
    let rows = run(&text);
    for name in ["ml", "sphere", "sb-stack"] {
        let at = |snr: f64| {
            rows.iter()
                .find(|r| r.decoder.starts_with(name) && r.decoder.as_bytes()[name.len()] == b'@' && r.snr_db == snr)
                .unwrap()
        };
        let (low, high) = (at(4.0), at(10.0));
        assert!(low.error_events >= 50 && high.error_events >= 50, "{low:?} {high:?}");
        assert!(high.ser < low.ser);
    }
}

#[test]
fn rows_are_in_snr_order_with_sane_counters() {
    let text = BASE
        .replace("snr_db = [30]", "snr_min = 0\nsnr_max = 12\nsnr_step = 4")
        .replace("trials = 1000", "trials = 300")
        .replace("[\"ml\"]", "[\"zf\", \"zf-dfe\", \"stack:k=2\"]");
    let rows = run(&text);
    assert_eq!(rows.len(), 12);
    let snrs: Vec<f64> = rows.iter().map(|r| r.snr_db).collect();
    assert!(snrs.windows(2).all(|w| w[0] <= w[1]));
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.ser) && (0.0..=1.0).contains(&r.ber));
        assert_eq!(r.trials + r.skipped, 300);
        assert!(r.mean_mults > 0.0 && r.mean_nodes > 0.0);
    }
}

#[test]
fn coded_run_reports_information_bit_errors() {
    let text = BASE
        .replace("snr_db = [30]", "snr_db = [10]")
        .replace("trials = 1000", "trials = 20\ncoded = true\ninterleave = true\nframe_bits = 100")
        .replace("[\"ml\"]", "[\"soft-sb-stack:list=4:m=4\", \"ssd:list=4\", \"zf-dfe\"]");
    let rows = run(&text);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.trials, 20);
        assert!(r.ber <= 0.05, "{r:?}");
    }
}

#[test]
fn csv_is_identical_across_runs_and_worker_counts() {
    let text = BASE
        .replace("snr_db = [30]", "snr_db = [6, 12]")
        .replace("trials = 1000", "trials = 700\ntarget_errors = 30")
        .replace("[\"ml\"]", "[\"sphere\", \"neighbor-stack:t=2\"]");
    let mut outputs = Vec::new();
    for workers in [1, 4, 1] {
        let mut config = ExperimentConfig::from_toml_str(&text).unwrap();
        config.workers = workers;
        let mut csv = Vec::new();
        sim::write_csv(&sim::run_experiment(&config).unwrap(), &mut csv).unwrap();
        outputs.push(csv);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}
