use cqed_core::dynamics::{effective_model_error, ErrorStudy};

#[test]
fn error_falls_with_detuning_and_meets_the_threshold() {
    for n in 1..=2 {
        let g = 1e-3;
        let s = (n as f64).sqrt() * g;
        let study = ErrorStudy::new(n, g, [10.0, 30.0, 100.0, 300.0].iter().map(|k| k * s).collect());
        let report = effective_model_error(&study).unwrap();
        assert!(report.decreasing_within(0.1));
        assert!(report.samples[1].max_infidelity < 1e-3);
        // Second-order leakage is of order N g²/Δ².
        let last = report.samples[3];
        assert!(last.max_leakage < 10.0 * n as f64 * (g / last.detuning).powi(2));
    }
}
