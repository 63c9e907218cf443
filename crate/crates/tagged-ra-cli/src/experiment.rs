//! Sweep runners pairing closed-form curves with Monte Carlo estimates.
//!
//! MAC experiments sweep the contending-node count and simulate the slot
//! contention directly. The link-level experiment sweeps SNR over a fixed
//! five-node reference population — twice: once with the population's tag
//! choices pinned, once averaging over uniformly re-drawn tags — and runs
//! every Monte Carlo trial through the real correlator/detector chain.

use anyhow::{bail, Context, Result};
use rand::Rng;
use rayon::prelude::*;

use tagged_ra_core::analytic::{MacParams, TargetNoncentralities};
use tagged_ra_core::channel::{add_awgn, synthesize_clean, trial_rng, NodeTx, PhyScenario};
use tagged_ra_core::detector::{capture_tas, detect_pas, DetectionThresholds};
use tagged_ra_core::macsim::{run_mac_sim, MacEstimate, MacScenario};
use tagged_ra_core::preamble::CellConfig;
use tagged_ra_core::zc::{circ_correlate, zc_sequence, ZcParams};
use tagged_ra_core::Complex64;

use crate::config::{ExperimentConfig, ExperimentKind};

/// One row of an experiment report: a sweep coordinate with the analytic
/// value, the Monte Carlo estimate and its 95% half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    /// Sweep coordinate (SNR in dB or node count).
    pub x: f64,
    /// Closed-form value of the curve at `x`.
    pub y_analytic: f64,
    /// Monte Carlo estimate of the same quantity.
    pub y_montecarlo: f64,
    /// 95% confidence half-width of the estimate.
    pub ci_halfwidth: f64,
    /// Which curve the row belongs to.
    pub case_label: String,
}

/// Fixed reference population for the link-level sweep: five nodes, two of
/// which share preamble 1 (so the detector sees a two-peak window), with
/// spread-out tags and delays inside the guard window.
#[derive(Debug, Clone)]
pub struct PhyLayout {
    pub cell: CellConfig,
    pub nodes: Vec<NodeTx>,
}

/// Builds the reference population for a supported sequence length.
///
/// The population is laid out for `n_zc = 839` (tag alphabet 71) and for a
/// scaled-down `n_zc = 139` variant (tag alphabet 11) that keeps the same
/// preamble choices and delays; other lengths are rejected. The preamble
/// count is honoured from the config but must cover the population's
/// choices and still fit the sequence.
pub fn phy_layout(n_zc: usize, n_pa: usize) -> Result<PhyLayout> {
    let (n_tag, tags): (usize, [usize; 5]) = match n_zc {
        839 => (71, [10, 20, 30, 40, 50]),
        139 => (11, [1, 3, 5, 7, 9]),
        _ => bail!("cell.n_zc: the link-level sweep supports 839 or 139, got {n_zc}"),
    };
    if n_pa < 5 {
        bail!("cell.n_pa: the reference population uses preambles up to 4, need n_pa >= 5");
    }
    let zc = ZcParams::new(n_zc).context("cell.n_zc")?;
    let cell = CellConfig::with_tag_count(zc, n_tag, n_pa, 1).context("cell.n_pa")?;
    let pas = [1, 1, 2, 3, 4];
    let delays = [3, 7, 2, 5, 9];
    let nodes = (0..5)
        .map(|k| NodeTx { pa_index: pas[k], tag_index: tags[k], delay: delays[k] })
        .collect();
    Ok(PhyLayout { cell, nodes })
}

// Trial streams 0..trials drive the fixed-population noise draws. The
// randomized-tag Monte Carlo and the analytic tag-draw set use disjoint
// stream ranges of the same seed, so the three never share randomness.
const RANDOM_MC_STREAM_BASE: u64 = 1 << 32;
const ANALYTIC_TAG_STREAM: u64 = 1 << 33;

/// Number of tag-assignment draws behind the randomized-tag curves.
pub const RANDOM_TAG_SETS: usize = 1000;

/// Runs the configured experiment and returns its curve points.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::PhyDetection => phy_curves(cfg),
        ExperimentKind::RaSuccess | ExperimentKind::PuschCollision => mac_curves(cfg),
    }
}

fn mac_curves(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let collision = cfg.experiment == ExperimentKind::PuschCollision;
    let mut points = Vec::new();
    for (ci, case) in cfg.cases.iter().enumerate() {
        let label = case.label();
        for &m in &cfg.sweep.m {
            let params = MacParams::new(m, cfg.cell.n_pa, case.n_tag, case.r_km, case.n_ta)
                .with_context(|| format!("case {label}"))?;
            let scn = MacScenario::new(m, cfg.cell.n_pa, case.n_tag, case.n_ta)
                .with_context(|| format!("case {label}"))?;
            let out = run_mac_sim(&scn, cfg.trials, cfg.seed);
            let (y_analytic, est) = if collision {
                (params.pusch_collision_tagged(), out.pusch_collision_tagged)
            } else {
                (params.ra_success_tagged(), out.ra_success_tagged)
            };
            points.push(CurvePoint {
                x: m as f64,
                y_analytic,
                y_montecarlo: est.value,
                ci_halfwidth: est.ci_halfwidth,
                case_label: label.clone(),
            });
            // The conventional scheme does not depend on the tag/zone split,
            // so one curve (taken from the first case's trials) covers it.
            if ci == 0 {
                let (y_analytic, est) = if collision {
                    (params.pusch_collision_conv(), out.pusch_collision_conv)
                } else {
                    (params.ra_success_conv(), out.ra_success_conv)
                };
                points.push(CurvePoint {
                    x: m as f64,
                    y_analytic,
                    y_montecarlo: est.value,
                    ci_halfwidth: est.ci_halfwidth,
                    case_label: "conventional".to_string(),
                });
            }
        }
    }
    Ok(points)
}

fn phy_curves(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let layout = phy_layout(cfg.cell.n_zc, cfg.cell.n_pa)?;
    let thr = cfg.thresholds.to_thresholds();

    let fixed_nc = fixed_noncentralities(&layout)?;
    let random_ncs = randomized_tag_noncentralities(&layout, cfg.seed)?;

    let mut points = Vec::new();
    for &snr in &cfg.sweep.snr_db {
        let amplitude = 10f64.powf(snr / 20.0);
        let fixed = fixed_nc.evaluate(amplitude, 1.0, &thr);
        let (rand_pa, rand_ta) = mean_capture(&random_ncs, amplitude, &thr);

        let (mc_pa, mc_ta) = measure_fixed_point(&layout, snr, &thr, cfg.trials, cfg.seed)?;
        let (mc_rpa, mc_rta) = measure_random_point(&layout, snr, &thr, cfg.trials, cfg.seed)?;

        let rows = [
            ("pa_fixed", fixed.p_pa, mc_pa),
            ("ta_fixed", fixed.p_ta, mc_ta),
            ("pa_random", rand_pa, mc_rpa),
            ("ta_random", rand_ta, mc_rta),
        ];
        for (label, y_analytic, est) in rows {
            points.push(CurvePoint {
                x: snr,
                y_analytic,
                y_montecarlo: est.value,
                ci_halfwidth: est.ci_halfwidth,
                case_label: label.to_string(),
            });
        }
    }
    Ok(points)
}

/// Unit-amplitude signal levels of the fixed reference population, scalable
/// to any SNR point.
pub fn fixed_noncentralities(layout: &PhyLayout) -> Result<TargetNoncentralities> {
    let scn = PhyScenario::new(layout.cell, layout.nodes.clone(), 0.0, 1.0, 0)?;
    Ok(TargetNoncentralities::compute(&scn, 0)?)
}

/// Unit-amplitude signal levels for [`RANDOM_TAG_SETS`] populations with
/// uniformly re-drawn tag choices (preambles and delays kept). The draw set
/// depends only on the seed, so one set serves a whole SNR sweep.
pub fn randomized_tag_noncentralities(
    layout: &PhyLayout,
    seed: u64,
) -> Result<Vec<TargetNoncentralities>> {
    let n_tag = layout.cell.n_tag();
    let mut rng = trial_rng(seed, ANALYTIC_TAG_STREAM);
    let mut out = Vec::with_capacity(RANDOM_TAG_SETS);
    for _ in 0..RANDOM_TAG_SETS {
        let mut nodes = layout.nodes.clone();
        for node in &mut nodes {
            node.tag_index = rng.random_range(0..n_tag);
        }
        let scn = PhyScenario::new(layout.cell, nodes, 0.0, 1.0, 0)?;
        out.push(TargetNoncentralities::compute(&scn, 0)?);
    }
    Ok(out)
}

/// Mean detection / capture probability over a set of populations.
pub fn mean_capture(
    ncs: &[TargetNoncentralities],
    amplitude: f64,
    thr: &DetectionThresholds,
) -> (f64, f64) {
    let mut pa = 0.0;
    let mut ta = 0.0;
    for nc in ncs {
        let cp = nc.evaluate(amplitude, 1.0, thr);
        pa += cp.p_pa;
        ta += cp.p_ta;
    }
    let n = ncs.len() as f64;
    (pa / n, ta / n)
}

/// Counts target preamble detection and timing capture in one received
/// vector, through the production detector chain.
fn count_target_events(
    rx: &[Complex64],
    cell: &CellConfig,
    pa_ref: &[Complex64],
    thr: &DetectionThresholds,
    target: &NodeTx,
) -> [u64; 2] {
    let profile = circ_correlate(rx, pa_ref)
        .expect("received vector and reference share the cell's length");
    let pa_hit = detect_pas(&profile, cell, thr)
        .iter()
        .any(|d| d.pa_index == target.pa_index);
    if !pa_hit {
        return [0, 0];
    }
    let caps = capture_tas(rx, cell, target.pa_index, thr)
        .expect("preamble index validated at scenario construction");
    let ta_hit = caps
        .iter()
        .any(|c| c.tag_index == target.tag_index && c.ta_value == target.delay);
    [1, u64::from(ta_hit)]
}

/// Monte Carlo estimate of (preamble detection, timing capture) for the
/// fixed population at one SNR point.
pub fn measure_fixed_point(
    layout: &PhyLayout,
    snr_db: f64,
    thr: &DetectionThresholds,
    trials: u64,
    seed: u64,
) -> Result<(MacEstimate, MacEstimate)> {
    let scn = PhyScenario::new(layout.cell, layout.nodes.clone(), snr_db, 1.0, seed)?;
    let clean = synthesize_clean(&scn)?;
    let pa_ref = zc_sequence(layout.cell.zc(), layout.cell.pa_root())?;
    let target = layout.nodes[0];
    let counts = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let mut rx = clean.clone();
            add_awgn(&mut rx, 1.0, &mut rng);
            count_target_events(&rx, &layout.cell, &pa_ref, thr, &target)
        })
        .reduce(|| [0u64; 2], |a, b| [a[0] + b[0], a[1] + b[1]]);
    Ok((
        MacEstimate::from_count(counts[0], trials),
        MacEstimate::from_count(counts[1], trials),
    ))
}

/// Monte Carlo estimate of the same pair with every node's tag re-drawn
/// uniformly per trial (tag draws and noise come from the trial's stream).
pub fn measure_random_point(
    layout: &PhyLayout,
    snr_db: f64,
    thr: &DetectionThresholds,
    trials: u64,
    seed: u64,
) -> Result<(MacEstimate, MacEstimate)> {
    let n_tag = layout.cell.n_tag();
    let pa_ref = zc_sequence(layout.cell.zc(), layout.cell.pa_root())?;
    let counts = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, RANDOM_MC_STREAM_BASE + trial);
            let mut nodes = layout.nodes.clone();
            for node in &mut nodes {
                node.tag_index = rng.random_range(0..n_tag);
            }
            let target = nodes[0];
            let scn = PhyScenario::new(layout.cell, nodes, snr_db, 1.0, seed)
                .expect("re-drawn tags stay inside the alphabet");
            let mut rx = synthesize_clean(&scn).expect("layout validated");
            add_awgn(&mut rx, 1.0, &mut rng);
            count_target_events(&rx, &layout.cell, &pa_ref, thr, &target)
        })
        .reduce(|| [0u64; 2], |a, b| [a[0] + b[0], a[1] + b[1]]);
    Ok((
        MacEstimate::from_count(counts[0], trials),
        MacEstimate::from_count(counts[1], trials),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CaseConfig;

    fn small_mac_config(kind: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default_for(kind);
        cfg.trials = 4000;
        cfg.sweep.m = vec![2, 10];
        cfg.cases = vec![
            CaseConfig { r_km: 2.4, n_tag: 38, n_ta: 30 },
            CaseConfig { r_km: 0.8, n_tag: 71, n_ta: 10 },
        ];
        cfg
    }

    #[test]
    fn mac_sweep_emits_case_and_conventional_curves() {
        let cfg = small_mac_config(ExperimentKind::RaSuccess);
        let points = run_experiment(&cfg).unwrap();
        // 2 cases x 2 loads, plus a conventional row per load.
        assert_eq!(points.len(), 6);
        let conv: Vec<&CurvePoint> =
            points.iter().filter(|p| p.case_label == "conventional").collect();
        assert_eq!(conv.len(), 2);
        for p in &points {
            assert!((0.0..=1.0).contains(&p.y_analytic), "{p:?}");
            assert!((0.0..=1.0).contains(&p.y_montecarlo), "{p:?}");
            // Sampling noise should sit within a few half-widths of the
            // closed form; allow 3x for a hard bound.
            assert!(
                (p.y_montecarlo - p.y_analytic).abs() <= 3.0 * p.ci_halfwidth + 1e-9,
                "estimate too far from closed form: {p:?}"
            );
        }
        let tagged = points
            .iter()
            .find(|p| p.case_label == "R2.4" && p.x == 10.0)
            .unwrap();
        let params = MacParams::new(10, 20, 38, 2.4, 30).unwrap();
        assert_eq!(tagged.y_analytic, params.ra_success_tagged());
    }

    #[test]
    fn collision_sweep_reports_collision_rates() {
        let cfg = small_mac_config(ExperimentKind::PuschCollision);
        let points = run_experiment(&cfg).unwrap();
        let conv = points
            .iter()
            .find(|p| p.case_label == "conventional" && p.x == 10.0)
            .unwrap();
        let params = MacParams::new(10, 20, 38, 2.4, 30).unwrap();
        assert_eq!(conv.y_analytic, params.pusch_collision_conv());
        let tagged = points
            .iter()
            .find(|p| p.case_label == "R2.4" && p.x == 10.0)
            .unwrap();
        assert!(tagged.y_analytic < conv.y_analytic);
    }

    #[test]
    fn experiments_are_reproducible_for_a_seed() {
        let cfg = small_mac_config(ExperimentKind::RaSuccess);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn link_level_sweep_runs_on_the_scaled_cell() {
        let mut cfg = ExperimentConfig::default_for(ExperimentKind::PhyDetection);
        cfg.cell.n_zc = 139;
        cfg.cell.n_pa = 5;
        cfg.thresholds.pa_db = -8.0;
        cfg.thresholds.tag_db = -8.0;
        cfg.sweep.snr_db = vec![-8.0];
        cfg.trials = 400;
        let points = run_experiment(&cfg).unwrap();
        assert_eq!(points.len(), 4);
        let labels: Vec<&str> = points.iter().map(|p| p.case_label.as_str()).collect();
        assert_eq!(labels, ["pa_fixed", "ta_fixed", "pa_random", "ta_random"]);
        for p in &points {
            assert!((0.0..=1.0).contains(&p.y_analytic), "{p:?}");
            assert!((0.0..=1.0).contains(&p.y_montecarlo), "{p:?}");
        }
        let pa = &points[0];
        let ta = &points[1];
        assert!(ta.y_analytic <= pa.y_analytic, "capture cannot beat detection");
        assert!(
            (pa.y_montecarlo - pa.y_analytic).abs() <= 4.0 * (0.25f64 / 400.0).sqrt() * 1.96,
            "detection estimate far from closed form: {pa:?}"
        );
    }

    #[test]
    fn unsupported_layouts_are_rejected() {
        assert!(phy_layout(211, 20).is_err());
        assert!(phy_layout(839, 4).is_err());
        assert!(phy_layout(839, 20).is_ok());
        assert!(phy_layout(139, 5).is_ok());
        // 139/11 gives a 12-sample guard window; 12 preambles no longer fit.
        assert!(phy_layout(139, 12).is_err());
    }
}
