//! Closed-form performance predictions.
//!
//! Two layers share this module. The envelope layer models one correlator
//! sample as a Rician variate: the noiseless magnitude at that lag is the
//! noncentrality, the per-component noise standard deviation is the scale,
//! and threshold crossings are Marcum-Q tail probabilities. From those pieces
//! the capture chain predicts, for one chosen node, the probability that its
//! preamble window fires ([`pa_detection_prob`]) and the probability that its
//! own timing advance is the one captured in its tag window
//! ([`TargetNoncentralities::evaluate`]): the preamble must be detected, every
//! pre-peak sample of the tag window must stay below threshold (otherwise an
//! earlier lag steals the capture), and the node's own peak must cross it.
//!
//! The slot layer ([`MacParams`]) ignores waveforms entirely and works from
//! the selection probabilities of independently contending nodes: uniform
//! preamble and tag picks plus an area-uniform distance that quantizes to a
//! timing-advance zone. Its formulas are exact for those rules, which is also
//! what the Monte-Carlo simulator in [`crate::macsim`] draws.
//!
//! The special functions are hand-rolled so the crate carries no numerics
//! dependency; each is pinned by tests against externally computed values.

use num_complex::Complex64;

use crate::channel::{synthesize_clean, PhyScenario};
use crate::detector::DetectionThresholds;
use crate::zc::{circ_correlate, zc_sequence};
use crate::{Error, Result};

/// Modified Bessel function of the first kind, order zero.
///
/// Power series below `x = 18`, asymptotic expansion above. Overflows to
/// infinity for `x` beyond roughly `714`; use [`bessel_i0_scaled`] there.
pub fn bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 18.0 {
        i0_series(ax)
    } else if ax <= 709.0 {
        i0e_asymptotic(ax) * ax.exp()
    } else {
        // exp(ax) alone would overflow while the product may not.
        (ax + i0e_asymptotic(ax).ln()).exp()
    }
}

/// Exponentially scaled modified Bessel function: `exp(-|x|) * I0(x)`.
///
/// Stays in `[0, 1]` for all arguments, which keeps Rician densities with
/// large noncentrality-to-noise ratios representable.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 18.0 {
        i0_series(ax) * (-ax).exp()
    } else {
        i0e_asymptotic(ax)
    }
}

/// Power series `sum_k (x^2/4)^k / (k!)^2`; all terms positive, converges
/// for any finite argument but is only used below the asymptotic crossover.
fn i0_series(ax: f64) -> f64 {
    let q = ax * ax * 0.25;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200u32 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Large-argument expansion of `exp(-x) * I0(x)`:
/// `(2 pi x)^(-1/2) * sum_k prod_{j<=k} (2j-1)^2 / (k! (8x)^k)`.
/// The series is asymptotic; summation stops at the smallest term.
fn i0e_asymptotic(ax: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80u32 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (8.0 * ax * k as f64);
        if next >= term || next < sum * 1e-17 {
            if next < term {
                sum += next;
            }
            break;
        }
        term = next;
        sum += term;
    }
    sum / (2.0 * std::f64::consts::PI * ax).sqrt()
}

/// Natural log of the gamma function for positive arguments (Lanczos, g = 7).
fn lgamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - lgamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized upper incomplete gamma `Q(s, x) = Gamma(s, x) / Gamma(s)`
/// for `s > 0`, `x >= 0`. Series for the lower function when `x < s + 1`,
/// Lentz continued fraction otherwise.
fn reg_gamma_q(s: f64, x: f64) -> f64 {
    debug_assert!(s > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    let log_prefix = -x + s * x.ln() - lgamma(s);
    if x < s + 1.0 {
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut k = 1.0;
        while term.abs() > sum.abs() * 1e-17 {
            term *= x / (s + k);
            sum += term;
            k += 1.0;
        }
        (1.0 - sum * log_prefix.exp()).clamp(0.0, 1.0)
    } else {
        // Modified Lentz evaluation of the standard continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (log_prefix.exp() * h).clamp(0.0, 1.0)
    }
}

/// First-order Marcum Q function `Q1(a, b)`: the probability that a Rician
/// envelope with noncentrality `a` and unit scale exceeds `b`.
///
/// Evaluated as a Poisson mixture of regularized gamma tails,
/// `Q1(a, b) = sum_n Poisson(n; a^2/2) * Q(n + 1, b^2/2)`,
/// summed upward from just below the Poisson bulk. Terms that underflow
/// before the bulk is reached are carried in log space until they become
/// representable, so very large arguments stay accurate.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite());
    if b == 0.0 {
        return 1.0;
    }
    if a == 0.0 {
        return (-b * b / 2.0).exp();
    }
    // Far from the transition region the result is 0 or 1 beyond double
    // precision (Chernoff tails decay like exp(-(a-b)^2 / 2)).
    if a - b >= 40.0 {
        return 1.0;
    }
    if b - a >= 40.0 {
        return 0.0;
    }
    let lambda = a * a / 2.0;
    let x = b * b / 2.0;

    // Start below the Poisson bulk; everything lower holds negligible mass.
    // Underflowed factors switch to multiplicative form only once they are
    // safely in normal range (above exp(-700)): a subnormal start would
    // carry only a couple of significant bits and poison the whole sum.
    const LOG_FLOOR: f64 = -700.0;
    let n0 = (lambda - 36.0 * lambda.sqrt() - 10.0).floor().max(0.0) as u64;
    let mut log_p = -lambda + n0 as f64 * lambda.ln() - lgamma(n0 as f64 + 1.0);
    let mut p = if log_p > LOG_FLOOR { log_p.exp() } else { 0.0 };
    let mut q = if n0 == 0 {
        (-x).exp()
    } else {
        reg_gamma_q(n0 as f64 + 1.0, x)
    };
    let mut log_t = -x + (n0 as f64 + 1.0) * x.ln() - lgamma(n0 as f64 + 2.0);
    let mut t = if log_t > LOG_FLOOR { log_t.exp() } else { 0.0 };

    let mut sum = 0.0;
    let hi = n0 + (72.0 * lambda.sqrt() + 80.0) as u64;
    for n in n0..=hi {
        sum += p * q;
        // Past the mode the Poisson weights shrink geometrically, so the
        // whole remainder is bounded by p * r / (1 - r); stop once it can
        // no longer move the sum at double precision.
        if n as f64 > lambda {
            let r = lambda / (n + 2) as f64;
            if p * r / (1.0 - r) <= 1e-16 * sum {
                break;
            }
        }
        let pstep = lambda / (n + 1) as f64;
        if p > 0.0 {
            p *= pstep;
        } else {
            log_p += pstep.ln();
            if log_p > LOG_FLOOR {
                p = log_p.exp();
            }
        }
        q += t;
        let tstep = x / (n + 2) as f64;
        if t > 0.0 {
            t *= tstep;
        } else {
            log_t += tstep.ln();
            if log_t > LOG_FLOOR {
                t = log_t.exp();
            }
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Rician probability density at envelope value `g`, noncentrality `nu`
/// and per-component scale `sigma`.
///
/// Uses the scaled Bessel function so large `g * nu / sigma^2` cannot
/// overflow. Zero for negative `g`; `nu = 0` reduces to the Rayleigh density.
pub fn rician_pdf(g: f64, nu: f64, sigma: f64) -> f64 {
    assert!(sigma > 0.0, "rician_pdf requires sigma > 0");
    assert!(nu >= 0.0, "rician_pdf requires nu >= 0");
    if g <= 0.0 {
        return 0.0;
    }
    let s2 = sigma * sigma;
    let d = g - nu;
    (g / s2) * (-d * d / (2.0 * s2)).exp() * bessel_i0_scaled(g * nu / s2)
}

/// Noiseless preamble-correlator magnitude at one lag of the target's
/// detection window, at the scenario amplitude.
///
/// This is the noncentrality of the Rician sample the detector sees at that
/// lag: the target's matched main lobe (when `peak_pos` is its own peak)
/// combined with every other node's contribution — coincident same-preamble
/// peaks add coherently, tag components leak a unit-bounded cross-term per
/// node. Feed the values for a window's peak positions to
/// [`pa_detection_prob`].
///
/// # Errors
///
/// Returns [`Error::InvalidParam`] if `target_node` is out of range or
/// `peak_pos` lies outside the target's detection window.
pub fn peak_noncentrality_theta(
    scn: &PhyScenario,
    target_node: usize,
    peak_pos: usize,
) -> Result<f64> {
    let nodes = scn.nodes();
    if target_node >= nodes.len() {
        return Err(Error::InvalidParam(format!(
            "target index {target_node} out of range ({} nodes)",
            nodes.len()
        )));
    }
    let cell = scn.cell();
    let start = nodes[target_node].pa_index * cell.n_cs();
    if peak_pos < start || peak_pos >= start + cell.n_cs() {
        return Err(Error::InvalidParam(format!(
            "peak position {peak_pos} outside the target's window [{start}, {})",
            start + cell.n_cs()
        )));
    }
    let clean = synthesize_clean(scn)?;
    let pa_ref = zc_sequence(cell.zc(), cell.pa_root())?;
    let profile = circ_correlate(&clean, &pa_ref)?;
    Ok(profile[peak_pos])
}

/// Probability that a preamble window fires, given the noiseless correlator
/// magnitudes `thetas` at the peak positions inside the window.
///
/// Each position crosses the threshold independently with Marcum-Q
/// probability; the window fires when any does. With `sigma = 0` this
/// degenerates to an indicator, matching the deterministic detector.
///
/// # Errors
///
/// Returns [`Error::InvalidParam`] if `thetas` is empty: a window always has
/// at least the target's own peak, so an empty list is a caller bug rather
/// than a zero-probability event.
pub fn pa_detection_prob(thetas: &[f64], sigma: f64, gamma_lin: f64) -> Result<f64> {
    if thetas.is_empty() {
        return Err(Error::InvalidParam(
            "at least one peak noncentrality is required".into(),
        ));
    }
    Ok(any_peak_crossing_prob(thetas, sigma, gamma_lin))
}

/// [`pa_detection_prob`] without the emptiness check, for internal callers
/// whose lists are non-empty by construction.
fn any_peak_crossing_prob(thetas: &[f64], sigma: f64, gamma_lin: f64) -> f64 {
    if sigma == 0.0 {
        return if thetas.iter().any(|&v| v >= gamma_lin) { 1.0 } else { 0.0 };
    }
    1.0 - thetas
        .iter()
        .map(|&v| 1.0 - marcum_q1(v / sigma, gamma_lin / sigma))
        .product::<f64>()
}

/// CDF of the strongest sample among lags with noiseless magnitudes `etas`:
/// the probability that every one of them stays below `z`.
///
/// An empty slice yields 1 (nothing can exceed `z`). With `sigma = 0` this
/// is the indicator that all magnitudes are below `z`.
pub fn max_noise_cdf(etas: &[f64], sigma: f64, z: f64) -> f64 {
    if sigma == 0.0 {
        return if etas.iter().any(|&v| v >= z) { 0.0 } else { 1.0 };
    }
    etas.iter()
        .map(|&v| 1.0 - marcum_q1(v / sigma, z / sigma))
        .product()
}

/// Capture-probability pair for one node: preamble detection and full
/// timing-advance capture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureProbability {
    /// Probability the node's preamble window is detected.
    pub p_pa: f64,
    /// Probability the node's own timing advance is the captured one.
    pub p_ta: f64,
}

/// Unit-amplitude noncentralities of one target node inside a multi-node
/// scenario, precomputed from the noiseless correlation profiles.
///
/// Noncentralities scale linearly with the common transmit amplitude, so a
/// single computation serves a whole SNR sweep via
/// [`TargetNoncentralities::evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub struct TargetNoncentralities {
    n_zc: usize,
    pa_thetas: Vec<f64>,
    tag_phi: f64,
    pre_peak_etas: Vec<f64>,
}

impl TargetNoncentralities {
    /// Computes the profiles for `target` (an index into the scenario's node
    /// list) at amplitude one.
    ///
    /// The preamble entries are the profile magnitudes at the distinct peak
    /// positions of all nodes sharing the target's preamble (coincident
    /// delays merge into a single stronger peak). The tag entries are the
    /// target's own peak and the samples before it in its tag window.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidParam`] if `target` is out of range.
    pub fn compute(scn: &PhyScenario, target: usize) -> Result<Self> {
        let nodes = scn.nodes();
        if target >= nodes.len() {
            return Err(Error::InvalidParam(format!(
                "target index {target} out of range ({} nodes)",
                nodes.len()
            )));
        }
        let cell = scn.cell();
        // snr = 0 dB with sigma = 0 synthesizes the clean signal at amplitude 1.
        let unit = PhyScenario::new(cell.clone(), nodes.to_vec(), 0.0, 0.0, 0)?;
        let clean: Vec<Complex64> = crate::channel::synthesize_clean(&unit)?;
        let n_cs = cell.n_cs();
        let me = nodes[target];

        let pa_ref = zc_sequence(cell.zc(), cell.pa_root())?;
        let pa_profile = circ_correlate(&clean, &pa_ref)?;
        let mut positions: Vec<usize> = nodes
            .iter()
            .filter(|n| n.pa_index == me.pa_index)
            .map(|n| n.pa_index * n_cs + n.delay)
            .collect();
        positions.sort_unstable();
        positions.dedup();
        let pa_thetas = positions.iter().map(|&p| pa_profile[p]).collect();

        let tag_ref = zc_sequence(cell.zc(), cell.tag_root(me.pa_index))?;
        let tag_profile = circ_correlate(&clean, &tag_ref)?;
        let base = me.tag_index * n_cs;
        let tag_phi = tag_profile[base + me.delay];
        let pre_peak_etas = tag_profile[base..base + me.delay].to_vec();

        Ok(Self {
            n_zc: cell.n_zc(),
            pa_thetas,
            tag_phi,
            pre_peak_etas,
        })
    }

    /// Unit-amplitude preamble-peak magnitudes, ascending by lag.
    pub fn pa_thetas(&self) -> &[f64] {
        &self.pa_thetas
    }

    /// Unit-amplitude magnitude at the target's own tag peak.
    pub fn tag_phi(&self) -> f64 {
        self.tag_phi
    }

    /// Unit-amplitude magnitudes at the pre-peak lags of the target's tag
    /// window (empty when the target's delay is zero).
    pub fn pre_peak_etas(&self) -> &[f64] {
        &self.pre_peak_etas
    }

    /// Capture probabilities at transmit amplitude `amplitude` and noise
    /// scale `sigma` (`sigma = 0` gives the deterministic limit).
    ///
    /// The timing-advance capture requires the preamble to be detected, all
    /// pre-peak tag samples to stay below the tag threshold and the target's
    /// own peak to cross it.
    pub fn evaluate(
        &self,
        amplitude: f64,
        sigma: f64,
        thr: &DetectionThresholds,
    ) -> CaptureProbability {
        let gamma_pa = thr.pa_lin(self.n_zc);
        let gamma_tag = thr.tag_lin(self.n_zc);
        let thetas: Vec<f64> = self.pa_thetas.iter().map(|&v| v * amplitude).collect();
        let p_pa = any_peak_crossing_prob(&thetas, sigma, gamma_pa);
        let etas: Vec<f64> = self.pre_peak_etas.iter().map(|&v| v * amplitude).collect();
        let pre_quiet = max_noise_cdf(&etas, sigma, gamma_tag);
        let phi = self.tag_phi * amplitude;
        let own = if sigma == 0.0 {
            if phi >= gamma_tag {
                1.0
            } else {
                0.0
            }
        } else {
            marcum_q1(phi / sigma, gamma_tag / sigma)
        };
        CaptureProbability {
            p_pa,
            p_ta: p_pa * pre_quiet * own,
        }
    }
}

/// Probability that the target node's own timing advance is the one captured,
/// at the scenario's own amplitude and noise scale: preamble detected, all
/// pre-peak tag samples quiet, own tag peak above threshold.
///
/// Use [`TargetNoncentralities`] directly when sweeping amplitudes or when
/// the preamble-detection probability is needed separately.
///
/// # Errors
///
/// Returns [`Error::InvalidParam`] if `target` is out of range.
pub fn ta_capture_accuracy(
    scn: &PhyScenario,
    target: usize,
    thr: &DetectionThresholds,
) -> Result<f64> {
    let nc = TargetNoncentralities::compute(scn, target)?;
    Ok(nc.evaluate(scn.amplitude(), scn.sigma(), thr).p_ta)
}

/// Slot-level contention model: `m` nodes independently pick one of `n_pa`
/// preambles and one of `n_tag` tags uniformly, at an area-uniform distance
/// inside a disc of radius `r_km` quantized into `n_ta` timing zones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacParams {
    m: usize,
    n_pa: usize,
    n_tag: usize,
    r_km: f64,
    n_ta: usize,
}

impl MacParams {
    /// Validates and builds the parameter set.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidParam`] unless `m >= 1`, `n_pa >= 1`,
    /// `n_tag >= 1`, `n_ta >= 1` and `r_km` is positive and finite.
    pub fn new(m: usize, n_pa: usize, n_tag: usize, r_km: f64, n_ta: usize) -> Result<Self> {
        if m == 0 || n_pa == 0 || n_tag == 0 || n_ta == 0 {
            return Err(Error::InvalidParam(
                "node, preamble, tag and zone counts must all be at least 1".into(),
            ));
        }
        if !(r_km.is_finite() && r_km > 0.0) {
            return Err(Error::InvalidParam(format!(
                "cell radius must be positive and finite, got {r_km}"
            )));
        }
        Ok(Self { m, n_pa, n_tag, r_km, n_ta })
    }

    /// Number of contending nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of preambles.
    pub fn n_pa(&self) -> usize {
        self.n_pa
    }

    /// Number of tags per preamble.
    pub fn n_tag(&self) -> usize {
        self.n_tag
    }

    /// Cell radius in kilometres.
    pub fn r_km(&self) -> f64 {
        self.r_km
    }

    /// Number of timing-advance zones.
    pub fn n_ta(&self) -> usize {
        self.n_ta
    }

    /// Width of one timing-advance zone in kilometres, `r_km / n_ta`. The
    /// zone count is the authoritative parameter, so
    /// `ceil(r_km / eps_ta_km) == n_ta` holds by construction.
    pub fn eps_ta_km(&self) -> f64 {
        self.r_km / self.n_ta as f64
    }

    /// Same parameters with a different node count; handy for load sweeps.
    pub fn with_m(&self, m: usize) -> Result<Self> {
        Self::new(m, self.n_pa, self.n_tag, self.r_km, self.n_ta)
    }

    /// Probability that exactly `a` of the other `m - 1` nodes pick the same
    /// preamble as the tagged node: the binomial pmf with success
    /// probability `1 / n_pa`.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidParam`] if `a > m - 1`.
    pub fn prob_same_pa(&self, a: usize) -> Result<f64> {
        let others = self.m - 1;
        if a > others {
            return Err(Error::InvalidParam(format!(
                "contender count {a} out of range 0..={others}"
            )));
        }
        let p = 1.0 / self.n_pa as f64;
        // Running-product binomial coefficient; exact well past any
        // practical node count.
        let mut coef = 1.0;
        for j in 1..=a {
            coef *= (others - a + j) as f64 / j as f64;
        }
        Ok(coef * p.powi(a as i32) * (1.0 - p).powi((others - a) as i32))
    }

    /// Probability that an area-uniform node falls into timing zone `d`
    /// (the annulus between radii `d * r/n_ta` and `(d+1) * r/n_ta`).
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidParam`] if `d >= n_ta`.
    pub fn ta_zone_prob(&self, d: usize) -> Result<f64> {
        if d >= self.n_ta {
            return Err(Error::InvalidParam(format!(
                "zone index {d} out of range (n_ta = {})",
                self.n_ta
            )));
        }
        Ok(self.zone_prob(d))
    }

    /// [`MacParams::ta_zone_prob`] for indices known to be in range.
    fn zone_prob(&self, d: usize) -> f64 {
        let step = self.r_km / self.n_ta as f64;
        let inner = d as f64 * step;
        let outer = ((d + 1) as f64 * step).min(self.r_km);
        (outer * outer - inner * inner) / (self.r_km * self.r_km)
    }

    /// Random-access success probability for a tagged node sitting in zone
    /// `d`.
    ///
    /// Another node blocks it only by picking the same preamble and then
    /// either the same tag (the grant addresses both) or a different tag in
    /// the same zone (duplicate timing advances suppress the grant). Each of
    /// the other `m - 1` nodes draws independently, so the survival
    /// probability is a single per-node factor raised to `m - 1` — the
    /// closed form of the binomial average over [`MacParams::prob_same_pa`].
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidParam`] if `d >= n_ta`.
    pub fn ra_success_tagged_at_zone(&self, d: usize) -> Result<f64> {
        if d >= self.n_ta {
            return Err(Error::InvalidParam(format!(
                "zone index {d} out of range (n_ta = {})",
                self.n_ta
            )));
        }
        let p_d = self.zone_prob(d);
        let tag_frac = (self.n_tag - 1) as f64 / self.n_tag as f64;
        let block = (1.0 - tag_frac * (1.0 - p_d)) / self.n_pa as f64;
        Ok((1.0 - block).powi((self.m - 1) as i32))
    }

    /// Random-access success probability of the tagged scheme, averaged over
    /// the node's own zone distribution.
    pub fn ra_success_tagged(&self) -> f64 {
        (0..self.n_ta)
            .map(|d| {
                self.zone_prob(d)
                    * self
                        .ra_success_tagged_at_zone(d)
                        .expect("zone index in range by construction")
            })
            .sum()
    }

    /// Random-access success probability of the conventional (untagged)
    /// scheme: the node succeeds only if its preamble is unshared.
    pub fn ra_success_conv(&self) -> f64 {
        ((self.n_pa - 1) as f64 / self.n_pa as f64).powi((self.m - 1) as i32)
    }

    /// Probability the node's uplink transmission collides under the tagged
    /// scheme: some other node picked the identical (preamble, tag) pair and
    /// answers the same grant.
    pub fn pusch_collision_tagged(&self) -> f64 {
        let cells = (self.n_pa * self.n_tag) as f64;
        1.0 - ((cells - 1.0) / cells).powi((self.m - 1) as i32)
    }

    /// Probability the node's uplink transmission collides under the
    /// conventional scheme: any shared preamble collides.
    pub fn pusch_collision_conv(&self) -> f64 {
        1.0 - self.ra_success_conv()
    }
}

/// Success probability within `attempts` independent tries, each succeeding
/// with probability `p_single`.
pub fn multi_attempt_success(p_single: f64, attempts: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p_single));
    1.0 - (1.0 - p_single).powi(attempts as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NodeTx;
    use crate::preamble::CellConfig;
    use crate::zc::ZcParams;

    fn rel_close(got: f64, want: f64, tol: f64) -> bool {
        if want == 0.0 {
            return got.abs() < tol;
        }
        ((got - want) / want).abs() < tol
    }

    #[test]
    fn bessel_i0_matches_reference_values() {
        // (x, I0(x)) computed with an independent implementation.
        let table = [
            (0.0, 1.0),
            (0.1, 1.0025015629340956),
            (0.5, 1.0634833707413234),
            (1.0, 1.2660658777520082),
            (2.0, 2.2795853023360668),
            (5.0, 2.7239871823604442e+01),
            (10.0, 2.8157166284662540e+03),
            (15.0, 3.3964937329791381e+05),
            (17.9, 5.6425795600483930e+06),
            (18.1, 6.8531187769630197e+06),
            (25.0, 5.7745606064663105e+09),
            (50.0, 2.9325537838493355e+20),
            (100.0, 1.0737517071310738e+42),
            (300.0, 4.4758473679350518e+128),
            (700.0, 1.5295933476718735e+302),
        ];
        for (x, want) in table {
            let got = bessel_i0(x);
            assert!(rel_close(got, want, 1e-13), "I0({x}) = {got:e}, want {want:e}");
        }
        assert!(bessel_i0(-5.0) == bessel_i0(5.0), "even function");
    }

    #[test]
    fn bessel_i0_scaled_matches_reference_values() {
        let table = [
            (0.0, 1.0),
            (0.1, 9.0710092578230106e-01),
            (0.5, 6.4503527044914999e-01),
            (1.0, 4.6575960759364043e-01),
            (2.0, 3.0850832255367100e-01),
            (5.0, 1.8354081260932834e-01),
            (10.0, 1.2783333716342860e-01),
            (15.0, 1.0389953144882270e-01),
            (17.9, 9.4974379589650673e-02),
            (18.1, 9.4440469301339536e-02),
            (25.0, 8.0196773547436692e-02),
            (50.0, 5.6561626647454184e-02),
            (100.0, 3.9944379299096680e-02),
            (300.0, 2.3042558415085460e-02),
            (700.0, 1.5081295651531355e-02),
        ];
        for (x, want) in table {
            let got = bessel_i0_scaled(x);
            assert!(rel_close(got, want, 1e-13), "i0e({x}) = {got:e}, want {want:e}");
        }
        // Far beyond the overflow point of the unscaled function.
        let far = bessel_i0_scaled(1.0e6);
        assert!(far > 0.0 && far < 1e-3 && far.is_finite());
    }

    #[test]
    fn marcum_q1_matches_reference_values() {
        // (a, b, Q1(a, b)) computed with an independent implementation.
        let table = [
            (0.0, 1.0, 6.065306597126334e-01),
            (1.0, 0.0, 1.0),
            (0.5, 0.5, 8.955085810698598e-01),
            (1.0, 1.0, 7.328798037968203e-01),
            (1.0, 2.0, 2.690120600359100e-01),
            (2.0, 1.0, 9.181076963694061e-01),
            (3.0, 4.0, 1.965121893884076e-01),
            (4.0, 3.0, 8.741038833720296e-01),
            (4.59, 4.59, 5.437228577320367e-01),
            (6.49, 4.59, 9.767976366098227e-01),
            (2.8966, 4.5908, 5.977946431541914e-02),
            (9.1587, 4.5908, 9.999982898947817e-01),
            (5.0, 10.0, 4.101491134678754e-07),
            (10.0, 5.0, 9.999998006364520e-01),
            (0.3, 4.5908, 4.033758571458561e-05),
            (15.0, 13.0, 9.791151002474979e-01),
            (13.0, 15.0, 2.475375880323990e-02),
            (20.0, 18.0, 9.786356624735638e-01),
            (25.0, 27.0, 2.380937597228837e-02),
        ];
        for (a, b, want) in table {
            let got = marcum_q1(a, b);
            assert!(rel_close(got, want, 1e-11), "Q1({a}, {b}) = {got:e}, want {want:e}");
        }
    }

    #[test]
    fn marcum_q1_large_argument_paths() {
        // These force the shifted start, the incomplete-gamma seed and the
        // log-space underflow recovery.
        let table = [
            (60.0, 59.0, 8.433697126477780e-01),
            (80.0, 79.0, 8.428618488184791e-01),
            (40.0, 41.5, 6.841139283668136e-02),
            (120.0, 118.0, 9.774757776390981e-01),
        ];
        for (a, b, want) in table {
            let got = marcum_q1(a, b);
            assert!(rel_close(got, want, 1e-10), "Q1({a}, {b}) = {got:e}, want {want:e}");
        }
        // Far tails saturate exactly.
        assert_eq!(marcum_q1(50.0, 10.0), 1.0);
        assert_eq!(marcum_q1(10.0, 50.0), 0.0);
    }

    #[test]
    fn marcum_q1_is_monotone() {
        // Increasing noncentrality raises the tail, increasing the threshold
        // lowers it.
        let mut prev = 0.0;
        for i in 0..40 {
            let a = 0.25 * i as f64;
            let v = marcum_q1(a, 3.0);
            assert!(v >= prev);
            prev = v;
        }
        let mut prev = 1.0;
        for i in 0..40 {
            let b = 0.25 * i as f64;
            let v = marcum_q1(3.0, b);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn rician_pdf_matches_reference_values() {
        let table = [
            (1.0, 0.0, 1.0, 6.065306597126334e-01),
            (2.0, 3.0, 1.0, 2.021656851300834e-01),
            (4.59, 4.43, 1.0, 4.034546003590998e-01),
            (10.0, 9.0, 2.0, 1.866126332474514e-01),
            (0.5, 5.0, 1.0, 5.409745496550550e-06),
        ];
        for (g, nu, sigma, want) in table {
            let got = rician_pdf(g, nu, sigma);
            assert!(
                rel_close(got, want, 1e-13),
                "rician_pdf({g}, {nu}, {sigma}) = {got:e}, want {want:e}"
            );
        }
        assert_eq!(rician_pdf(-1.0, 2.0, 1.0), 0.0);
        // Huge noncentrality-to-noise ratio stays finite (scaled Bessel).
        let v = rician_pdf(300.0, 300.0, 1.0);
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn rayleigh_special_case_of_rician() {
        for g in [0.1f64, 0.5, 1.0, 2.0, 3.5] {
            let want = g * (-g * g / 2.0).exp();
            assert!(rel_close(rician_pdf(g, 0.0, 1.0), want, 1e-14));
        }
    }

    #[test]
    fn detection_prob_limits_and_indicators() {
        // sigma = 0 degenerates to threshold indicators.
        assert_eq!(pa_detection_prob(&[4.0, 3.0], 0.0, 3.5).unwrap(), 1.0);
        assert_eq!(pa_detection_prob(&[3.0, 3.2], 0.0, 3.5).unwrap(), 0.0);
        // A window always holds at least its own peak.
        assert!(pa_detection_prob(&[], 0.0, 3.5).is_err());
        assert!(pa_detection_prob(&[], 1.0, 3.5).is_err());
        // Q1(0, 0) = 1: a zero threshold always fires.
        assert_eq!(pa_detection_prob(&[0.0], 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(max_noise_cdf(&[1.0, 2.0], 0.0, 2.5), 1.0);
        assert_eq!(max_noise_cdf(&[1.0, 2.6], 0.0, 2.5), 0.0);
        assert_eq!(max_noise_cdf(&[], 0.0, 2.5), 1.0);
        assert_eq!(max_noise_cdf(&[], 1.0, 2.5), 1.0);
        // One peak: detection probability is exactly the Marcum tail.
        let p = pa_detection_prob(&[4.59], 1.0, 4.59).unwrap();
        assert!(rel_close(p, marcum_q1(4.59, 4.59), 1e-15));
        // Two peaks beat either alone.
        let p2 = pa_detection_prob(&[4.59, 4.0], 1.0, 4.59).unwrap();
        assert!(p2 > p && p2 < 1.0);
    }

    #[test]
    fn noncentralities_scale_linearly_with_amplitude() {
        let cell = CellConfig::with_tag_count(ZcParams::new(139).unwrap(), 11, 5, 1).unwrap();
        let nodes = vec![
            NodeTx { pa_index: 1, tag_index: 1, delay: 3 },
            NodeTx { pa_index: 1, tag_index: 3, delay: 7 },
            NodeTx { pa_index: 2, tag_index: 5, delay: 2 },
        ];
        // Amplitude 2 scenario: snr chosen so 10^(snr/20) = 2, sigma = 0.
        let snr = 20.0 * 2.0f64.log10();
        let scn2 = PhyScenario::new(cell.clone(), nodes.clone(), snr, 0.0, 0).unwrap();
        let nc = TargetNoncentralities::compute(&scn2, 0).unwrap();
        let direct = {
            let pa_ref = zc_sequence(cell.zc(), cell.pa_root()).unwrap();
            let clean = crate::channel::synthesize_clean(&scn2).unwrap();
            let prof = circ_correlate(&clean, &pa_ref).unwrap();
            prof[cell.n_cs() + 3]
        };
        // Unit-amplitude theta times 2 equals the amplitude-2 profile value.
        let scaled = nc.pa_thetas()[0] * 2.0;
        assert!(rel_close(scaled, direct, 1e-12));
    }

    #[test]
    fn coincident_delays_merge_into_one_peak() {
        let cell = CellConfig::with_tag_count(ZcParams::new(139).unwrap(), 11, 5, 1).unwrap();
        let nodes = vec![
            NodeTx { pa_index: 1, tag_index: 1, delay: 3 },
            NodeTx { pa_index: 1, tag_index: 4, delay: 3 },
            NodeTx { pa_index: 1, tag_index: 7, delay: 9 },
        ];
        let scn = PhyScenario::new(cell, nodes, 0.0, 0.0, 0).unwrap();
        let nc = TargetNoncentralities::compute(&scn, 0).unwrap();
        // Three same-preamble nodes but only two distinct delays.
        assert_eq!(nc.pa_thetas().len(), 2);
        // The merged peak carries roughly twice the single-node magnitude.
        assert!(nc.pa_thetas()[0] > 1.5 * (139.0f64).sqrt());
    }

    #[test]
    fn pre_peak_window_has_delay_entries() {
        let cell = CellConfig::with_tag_count(ZcParams::new(139).unwrap(), 11, 5, 1).unwrap();
        for delay in [0usize, 1, 5, 11] {
            let nodes = vec![NodeTx { pa_index: 2, tag_index: 6, delay }];
            let scn = PhyScenario::new(cell.clone(), nodes, 0.0, 0.0, 0).unwrap();
            let nc = TargetNoncentralities::compute(&scn, 0).unwrap();
            assert_eq!(nc.pre_peak_etas().len(), delay);
            // Isolated node: own tag peak is the clean matched magnitude
            // plus a bounded cross-root ripple.
            assert!((nc.tag_phi() - (139.0f64).sqrt()).abs() < 1.0 + 1e-9);
        }
    }

    #[test]
    fn evaluate_degenerates_to_detector_indicators_without_noise() {
        let cell = CellConfig::with_tag_count(ZcParams::new(839).unwrap(), 71, 20, 1).unwrap();
        let nodes = vec![NodeTx { pa_index: 1, tag_index: 10, delay: 3 }];
        let scn = PhyScenario::new(cell, nodes, 0.0, 0.0, 0).unwrap();
        let nc = TargetNoncentralities::compute(&scn, 0).unwrap();
        let thr = DetectionThresholds { gamma_pa_db: -6.0, gamma_tag_db: -6.0 };
        let strong = nc.evaluate(1.0, 0.0, &thr);
        assert_eq!((strong.p_pa, strong.p_ta), (1.0, 1.0));
        let weak = nc.evaluate(0.01, 0.0, &thr);
        assert_eq!((weak.p_pa, weak.p_ta), (0.0, 0.0));
    }

    #[test]
    fn capture_accuracy_orders_sensibly_with_noise() {
        let cell = CellConfig::with_tag_count(ZcParams::new(139).unwrap(), 11, 5, 1).unwrap();
        let nodes = vec![NodeTx { pa_index: 1, tag_index: 1, delay: 3 }];
        let thr = DetectionThresholds { gamma_pa_db: -8.0, gamma_tag_db: -8.0 };
        let mut prev_ta = 0.0;
        for snr in [-14.0, -10.0, -6.0, -2.0] {
            let scn = PhyScenario::new(cell.clone(), nodes.clone(), snr, 1.0, 0).unwrap();
            let p_ta = ta_capture_accuracy(&scn, 0, &thr).unwrap();
            let cp = TargetNoncentralities::compute(&scn, 0)
                .unwrap()
                .evaluate(scn.amplitude(), scn.sigma(), &thr);
            assert!(rel_close(p_ta, cp.p_ta, 1e-15), "two evaluation paths agree");
            assert!(p_ta <= cp.p_pa + 1e-15, "capture requires detection");
            assert!(p_ta >= prev_ta, "capture improves with snr");
            prev_ta = p_ta;
        }
        assert!(prev_ta > 0.9);
        assert!(ta_capture_accuracy(
            &PhyScenario::new(cell, nodes, -10.0, 1.0, 0).unwrap(),
            1,
            &thr
        )
        .is_err());
    }

    #[test]
    fn peak_noncentrality_matches_profile_and_scales() {
        let cell = CellConfig::with_tag_count(ZcParams::new(139).unwrap(), 11, 5, 1).unwrap();
        let nodes = vec![
            NodeTx { pa_index: 1, tag_index: 1, delay: 3 },
            NodeTx { pa_index: 1, tag_index: 3, delay: 7 },
            NodeTx { pa_index: 2, tag_index: 5, delay: 2 },
        ];
        let scn = PhyScenario::new(cell.clone(), nodes.clone(), -10.0, 1.0, 0).unwrap();
        let nc = TargetNoncentralities::compute(&scn, 0).unwrap();
        // Same-preamble peaks of target 0 sit at n_cs + 3 and n_cs + 7; the
        // dedicated evaluation must agree with the unit-amplitude profile
        // scaled by the scenario amplitude.
        let amp = scn.amplitude();
        for (k, delay) in [3usize, 7].iter().enumerate() {
            let theta = peak_noncentrality_theta(&scn, 0, cell.n_cs() + delay).unwrap();
            assert!(rel_close(theta, nc.pa_thetas()[k] * amp, 1e-12));
        }
        // A lone unit-amplitude node: main lobe sqrt(N) plus at most the
        // unit-bounded cross-term of its own tag component.
        let lone = PhyScenario::new(
            cell.clone(),
            vec![NodeTx { pa_index: 1, tag_index: 1, delay: 3 }],
            0.0,
            0.0,
            0,
        )
        .unwrap();
        let theta = peak_noncentrality_theta(&lone, 0, cell.n_cs() + 3).unwrap();
        let sqrt_n = 139f64.sqrt();
        assert!(theta >= sqrt_n - 1.0 - 1e-9 && theta <= sqrt_n + 1.0 + 1e-9);
        // Out-of-range target and out-of-window position are rejected.
        assert!(peak_noncentrality_theta(&scn, 3, cell.n_cs()).is_err());
        assert!(peak_noncentrality_theta(&scn, 0, 0).is_err());
        assert!(peak_noncentrality_theta(&scn, 0, 2 * cell.n_cs()).is_err());
    }

    #[test]
    fn zone_probabilities_form_a_distribution() {
        for (r, n_ta) in [(0.8, 10usize), (1.6, 20), (2.4, 30)] {
            let p = MacParams::new(5, 20, 38, r, n_ta).unwrap();
            let total: f64 = (0..n_ta).map(|d| p.ta_zone_prob(d).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12);
            // Outer annuli hold more area.
            assert!(p.ta_zone_prob(n_ta - 1).unwrap() > p.ta_zone_prob(0).unwrap());
            assert!(p.ta_zone_prob(n_ta).is_err());
        }
        let p = MacParams::new(5, 20, 38, 0.8, 10).unwrap();
        assert!((p.ta_zone_prob(0).unwrap() - 0.01).abs() < 1e-12);
        let p = MacParams::new(5, 20, 38, 2.4, 30).unwrap();
        assert!((p.ta_zone_prob(29).unwrap() - 59.0 / 900.0).abs() < 1e-12);
    }

    #[test]
    fn ra_success_matches_reference_values() {
        // Twenty contenders, twenty preambles, the three standard cell cases.
        let cases = [
            (38usize, 2.4, 30usize, 0.936024177004083, 0.995907094071995),
            (51, 1.6, 20, 0.922543143881595, 0.994000435440253),
            (71, 0.8, 10, 0.871521661796778, 0.983493316612539),
        ];
        for (n_tag, r, n_ta, want_one, want_two) in cases {
            let p = MacParams::new(20, 20, n_tag, r, n_ta).unwrap();
            let got = p.ra_success_tagged();
            assert!(
                (got - want_one).abs() < 1e-12,
                "success({n_tag}) = {got}, want {want_one}"
            );
            let two = multi_attempt_success(got, 2);
            assert!((two - want_two).abs() < 1e-12);
        }
    }

    #[test]
    fn same_preamble_count_is_binomial() {
        let p = MacParams::new(20, 20, 38, 2.4, 30).unwrap();
        // a = 0 is exactly the conventional success probability.
        assert!(rel_close(p.prob_same_pa(0).unwrap(), p.ra_success_conv(), 1e-15));
        assert!((p.prob_same_pa(0).unwrap() - 0.377353602535307).abs() < 1e-12);
        let total: f64 = (0..=19).map(|a| p.prob_same_pa(a).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(p.prob_same_pa(20).is_err());

        let pair = MacParams::new(2, 20, 38, 2.4, 30).unwrap();
        assert!(rel_close(pair.prob_same_pa(1).unwrap(), 1.0 / 20.0, 1e-15));
        // Non-trivial coefficient: C(4, 2) p^2 (1-p)^2 with p = 1/5.
        let five = MacParams::new(5, 5, 38, 2.4, 30).unwrap();
        let want = 6.0 * 0.04 * 0.64;
        assert!(rel_close(five.prob_same_pa(2).unwrap(), want, 1e-14));
    }

    #[test]
    fn zone_width_is_radius_over_zone_count() {
        for (r, n_ta) in [(0.8, 10usize), (1.6, 20), (2.4, 30)] {
            let p = MacParams::new(5, 20, 38, r, n_ta).unwrap();
            let eps = p.eps_ta_km();
            assert!(rel_close(eps, r / n_ta as f64, 1e-15));
            assert_eq!((r / eps).ceil() as usize, n_ta);
        }
    }

    #[test]
    fn conventional_probabilities_match_reference_values() {
        let p = MacParams::new(20, 20, 38, 2.4, 30).unwrap();
        assert!((p.ra_success_conv() - 0.377353602535307).abs() < 1e-12);
        assert!((multi_attempt_success(p.ra_success_conv(), 2) - 0.612311463724240).abs() < 1e-12);
        assert!((p.pusch_collision_conv() - 0.622646397464693).abs() < 1e-12);
    }

    #[test]
    fn pusch_collision_matches_reference_values() {
        let cases = [
            (38usize, 2.4, 30usize, 0.024706143206165),
            (51, 1.6, 20, 0.018464000658825),
            (71, 0.8, 10, 0.013295814558710),
        ];
        for (n_tag, r, n_ta, want) in cases {
            let p = MacParams::new(20, 20, n_tag, r, n_ta).unwrap();
            let got = p.pusch_collision_tagged();
            assert!((got - want).abs() < 1e-12, "collision({n_tag}) = {got}, want {want}");
        }
    }

    #[test]
    fn single_contender_never_fails() {
        let p = MacParams::new(1, 20, 38, 2.4, 30).unwrap();
        assert_eq!(p.ra_success_tagged(), 1.0);
        assert_eq!(p.ra_success_conv(), 1.0);
        assert_eq!(p.pusch_collision_tagged(), 0.0);
        assert_eq!(p.pusch_collision_conv(), 0.0);
    }

    #[test]
    fn success_decreases_with_load_and_beats_conventional() {
        let base = MacParams::new(1, 20, 38, 2.4, 30).unwrap();
        let mut prev = 1.0;
        for m in 2..=30 {
            let p = base.with_m(m).unwrap();
            let s = p.ra_success_tagged();
            assert!(s < prev);
            assert!(s > p.ra_success_conv(), "tagging must help at m = {m}");
            prev = s;
        }
    }

    #[test]
    fn multi_attempt_success_basics() {
        assert_eq!(multi_attempt_success(0.5, 1), 0.5);
        assert!((multi_attempt_success(0.5, 2) - 0.75).abs() < 1e-15);
        assert_eq!(multi_attempt_success(0.0, 5), 0.0);
        assert_eq!(multi_attempt_success(1.0, 3), 1.0);
    }

    #[test]
    fn mac_params_rejects_bad_arguments() {
        assert!(MacParams::new(0, 20, 38, 2.4, 30).is_err());
        assert!(MacParams::new(5, 0, 38, 2.4, 30).is_err());
        assert!(MacParams::new(5, 20, 0, 2.4, 30).is_err());
        assert!(MacParams::new(5, 20, 38, 0.0, 30).is_err());
        assert!(MacParams::new(5, 20, 38, -1.0, 30).is_err());
        assert!(MacParams::new(5, 20, 38, f64::NAN, 30).is_err());
        assert!(MacParams::new(5, 20, 38, 2.4, 0).is_err());
    }

    #[test]
    fn compute_rejects_bad_target() {
        let cell = CellConfig::with_tag_count(ZcParams::new(139).unwrap(), 11, 5, 1).unwrap();
        let scn = PhyScenario::new(
            cell,
            vec![NodeTx { pa_index: 1, tag_index: 1, delay: 3 }],
            0.0,
            0.0,
            0,
        )
        .unwrap();
        assert!(TargetNoncentralities::compute(&scn, 1).is_err());
    }
}
