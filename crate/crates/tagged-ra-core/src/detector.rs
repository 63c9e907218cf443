//! Threshold detection, multi-TA capture and random-access response (RAR)
//! generation.
//!
//! The receiver correlates the received vector against the cell's preamble
//! root and inspects window `D_i = [i*n_cs, (i+1)*n_cs - 1]` of the lag axis
//! for each preamble index `i`: the preamble is *detected* when any sample in
//! its window reaches the preamble threshold. For every detected preamble the
//! receiver then correlates against that preamble's tag root and walks the
//! tag windows; in each tag window the **earliest** sample at or above the
//! tag threshold is taken as that tag's timing advance (TA). Later
//! above-threshold samples in the same window are shadowed — a tag carries
//! one TA — while distinct tag windows each contribute their own TA. That is
//! the multi-TA capture that lets one detected preamble serve several
//! colliding nodes at once.
//!
//! Spurious TAs caused by noise crossings are *not* filtered here: the
//! receiver cannot tell them apart, so they flow into RAR generation like
//! any other capture, exactly as a real receiver would emit them.
//!
//! RAR generation grants one uplink allocation per distinct captured TA of a
//! detected preamble, except that TAs captured by two or more tags of the
//! same preamble are suppressed: those grants would address different nodes
//! with indistinguishable timing, so the scheduler drops them and lets the
//! nodes retry.

use num_complex::Complex64;

use crate::preamble::CellConfig;
use crate::zc::{circ_correlate, zc_sequence};
use crate::Result;

/// Detection thresholds in dB relative to a unit-amplitude matched peak.
///
/// A clean matched peak for unit amplitude is `sqrt(N)` in the normalized
/// correlator, so a threshold of `x` dB converts to the linear value
/// `sqrt(N) * 10^(x / 20)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionThresholds {
    /// Preamble-correlator threshold in dB.
    pub gamma_pa_db: f64,
    /// Tag-correlator threshold in dB.
    pub gamma_tag_db: f64,
}

impl DetectionThresholds {
    /// Linear preamble threshold for sequences of length `n_zc`.
    pub fn pa_lin(&self, n_zc: usize) -> f64 {
        (n_zc as f64).sqrt() * 10f64.powf(self.gamma_pa_db / 20.0)
    }

    /// Linear tag threshold for sequences of length `n_zc`.
    pub fn tag_lin(&self, n_zc: usize) -> f64 {
        (n_zc as f64).sqrt() * 10f64.powf(self.gamma_tag_db / 20.0)
    }
}

/// One detected preamble window and every above-threshold lag inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaDetection {
    /// Detected preamble index.
    pub pa_index: usize,
    /// All lags in the window at or above the preamble threshold, as
    /// absolute positions on the correlation lag axis (ascending). Subtract
    /// the window start `pa_index * n_cs` to read them as timing values.
    pub peak_positions: Vec<usize>,
}

/// A timing advance captured from one tag window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CapturedTa {
    /// Tag index whose window produced the capture.
    pub tag_index: usize,
    /// Captured timing advance: earliest above-threshold lag in the window,
    /// relative to the window start.
    pub ta_value: usize,
}

/// How many tags answered on one detected preamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessClass {
    /// Preamble crossed the threshold but no tag window did (noise-raised
    /// preambles at low SNR, or a tag lost in the noise).
    Empty,
    /// Exactly one tag: the common uncontended case.
    Single,
    /// Two tags.
    Double,
    /// Three tags.
    Triple,
    /// Four or more tags.
    Over,
}

impl AccessClass {
    fn from_count(count: usize) -> Self {
        match count {
            0 => AccessClass::Empty,
            1 => AccessClass::Single,
            2 => AccessClass::Double,
            3 => AccessClass::Triple,
            _ => AccessClass::Over,
        }
    }
}

/// Capture outcome for one detected preamble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaAccess {
    /// Detected preamble index.
    pub pa_index: usize,
    /// Captured TAs, ascending by tag index (at most one per tag window).
    pub captured: Vec<CapturedTa>,
    /// Classification by number of captured tags.
    pub class: AccessClass,
}

/// Full receiver output for one received vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionReport {
    /// Per detected preamble, ascending by preamble index.
    pub accesses: Vec<PaAccess>,
}

/// An uplink grant answering one captured TA.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RarMessage {
    /// Preamble index being answered.
    pub pa_index: usize,
    /// Timing advance the grant is tied to.
    pub ta_value: usize,
    /// Grant identifier, unique within one report.
    pub grant_id: u32,
}

/// Scans the preamble-correlator profile and returns every detected preamble
/// window together with its above-threshold lags.
///
/// A preamble is detected iff the maximum of its window reaches the linear
/// preamble threshold; windows with no crossing are omitted. Positions are
/// absolute lags, so a clean node on preamble `i` with delay `t` shows up at
/// `i * n_cs + t`.
pub fn detect_pas(
    profile: &[f64],
    cfg: &CellConfig,
    thr: &DetectionThresholds,
) -> Vec<PaDetection> {
    let gamma = thr.pa_lin(cfg.n_zc());
    let n_cs = cfg.n_cs();
    let mut out = Vec::new();
    for i in 0..cfg.n_pa() {
        let start = i * n_cs;
        let window = &profile[start..start + n_cs];
        let peak_positions: Vec<usize> = window
            .iter()
            .enumerate()
            .filter(|(_, &m)| m >= gamma)
            .map(|(off, _)| start + off)
            .collect();
        if !peak_positions.is_empty() {
            out.push(PaDetection { pa_index: i, peak_positions });
        }
    }
    out
}

/// Correlates against the tag root of a detected preamble and captures one
/// TA per tag window: the earliest lag at or above the tag threshold.
///
/// # Errors
///
/// Returns [`crate::Error::InvalidParam`] if `pa_index` is out of range.
pub fn capture_tas(
    received: &[Complex64],
    cfg: &CellConfig,
    pa_index: usize,
    thr: &DetectionThresholds,
) -> Result<Vec<CapturedTa>> {
    if pa_index >= cfg.n_pa() {
        return Err(crate::Error::InvalidParam(format!(
            "preamble index {pa_index} out of range (n_pa = {})",
            cfg.n_pa()
        )));
    }
    let tag_ref = zc_sequence(cfg.zc(), cfg.tag_root(pa_index))?;
    let profile = circ_correlate(received, &tag_ref)?;
    let gamma = thr.tag_lin(cfg.n_zc());
    let n_cs = cfg.n_cs();
    let mut out = Vec::new();
    for l in 0..cfg.n_tag() {
        let window = &profile[l * n_cs..(l + 1) * n_cs];
        if let Some(ta_value) = window.iter().position(|&m| m >= gamma) {
            out.push(CapturedTa { tag_index: l, ta_value });
        }
    }
    Ok(out)
}

/// Runs the full receiver chain: preamble detection, per-preamble tag
/// capture and access classification.
///
/// # Errors
///
/// Propagates correlation errors (e.g. a received vector of the wrong
/// length).
pub fn run_detection(
    received: &[Complex64],
    cfg: &CellConfig,
    thr: &DetectionThresholds,
) -> Result<DetectionReport> {
    let pa_ref = zc_sequence(cfg.zc(), cfg.pa_root())?;
    let profile = circ_correlate(received, &pa_ref)?;
    let mut accesses = Vec::new();
    for det in detect_pas(&profile, cfg, thr) {
        let captured = capture_tas(received, cfg, det.pa_index, thr)?;
        let class = AccessClass::from_count(captured.len());
        accesses.push(PaAccess {
            pa_index: det.pa_index,
            captured,
            class,
        });
    }
    Ok(DetectionReport { accesses })
}

/// Generates RAR grants from a detection report.
///
/// Within each detected preamble the captured TAs are grouped by timing
/// value: a value captured by exactly one tag yields a grant, a value shared
/// by two or more tags is suppressed (the grant could not address a single
/// node). Grants are emitted in (preamble, TA) order with sequentially
/// assigned ids, so a report maps to exactly one grant list and no
/// (preamble, TA) pair repeats.
pub fn generate_rars(report: &DetectionReport) -> Vec<RarMessage> {
    let mut out = Vec::new();
    let mut grant_id = 0u32;
    for access in &report.accesses {
        // Count captures per TA value; windows are visited in ascending tag
        // order and each contributes at most one capture.
        let mut counts: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
        for cap in &access.captured {
            *counts.entry(cap.ta_value).or_insert(0) += 1;
        }
        for (&ta_value, &count) in &counts {
            if count == 1 {
                out.push(RarMessage {
                    pa_index: access.pa_index,
                    ta_value,
                    grant_id,
                });
                grant_id += 1;
            }
        }
    }
    out
}
