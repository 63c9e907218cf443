//! The verification suite as tests: one per criterion, each printing its
//! one-line verdict (run with `--nocapture` to see the lines for passing
//! criteria too).

use tagged_ra_cli::acceptance::{self, CriterionReport};

fn finish(report: CriterionReport) {
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn criterion_1_closed_form_reference_values() {
    finish(acceptance::closed_form_reference_values());
}

#[test]
fn criterion_2_mac_simulation_matches_closed_forms() {
    finish(acceptance::mac_simulation_matches_closed_forms());
}

#[test]
fn criterion_3_detection_chain_matches_simulation() {
    finish(acceptance::detection_chain_matches_simulation());
}

#[test]
fn criterion_4_capture_curve_gap_properties() {
    finish(acceptance::capture_curve_gap_properties());
}

#[test]
fn criterion_5_protocol_logic_properties() {
    finish(acceptance::protocol_logic_properties());
}

#[test]
fn criterion_6_special_function_oracles() {
    finish(acceptance::special_function_oracles());
}

#[test]
fn criterion_7_deterministic_reports() {
    finish(acceptance::deterministic_reports());
}
