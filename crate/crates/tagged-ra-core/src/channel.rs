//! Single-path channel synthesis: per-node cyclic delays plus complex AWGN.
//!
//! Each transmitting node's signal arrives advanced by its round-trip delay
//! `t_m` (an integer number of samples, folded into the cyclic lag axis by
//! the receiver's periodic processing window):
//!
//! ```text
//! Y[n] = sum_m X_m[(n + t_m) mod N]  +  W[n]
//! ```
//!
//! The noise is circular complex Gaussian with *per-component* standard
//! deviation `sigma`, i.e. `W = sigma * (g_re + j g_im)` with independent
//! standard normal components. Because the correlator in [`crate::zc`] is
//! normalized by `1/sqrt(N)` against unit-modulus references, the correlation
//! noise keeps that same per-component scale: noise-only correlation
//! magnitudes are Rayleigh with scale `sigma`, and a clean matched peak sits
//! at `sqrt(N) * amplitude`. Those two facts are what the analytic layer's
//! Rician model is written in terms of.
//!
//! Amplitudes come from a per-scenario SNR via the amplitude-ratio
//! convention `amplitude = sigma * 10^(snr_db / 20)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::preamble::{build_tagged_preamble, CellConfig};
use crate::zc::cyclic_shift;
use crate::{Error, Result};

/// One transmitting node: its preamble/tag choices and channel delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeTx {
    /// Preamble index `i`, `< n_pa`.
    pub pa_index: usize,
    /// Tag index `l`, `< n_tag`.
    pub tag_index: usize,
    /// Round-trip delay in samples, `< n_cs` so the peak stays inside the
    /// node's detection window.
    pub delay: usize,
}

/// A complete link-level scenario: who transmits, at what SNR, which seed.
#[derive(Debug, Clone)]
pub struct PhyScenario {
    cell: CellConfig,
    nodes: Vec<NodeTx>,
    snr_db: f64,
    sigma: f64,
    seed: u64,
}

impl PhyScenario {
    /// Validates node choices against the cell layout.
    ///
    /// `sigma = 0` is allowed and produces a noiseless channel (useful for
    /// exactness tests); the node amplitude is then referenced to unit noise.
    /// An empty node list is allowed and synthesizes noise only.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidParam`] for an out-of-range preamble index,
    /// tag index or delay, or a negative / non-finite `sigma` or `snr_db`.
    pub fn new(
        cell: CellConfig,
        nodes: Vec<NodeTx>,
        snr_db: f64,
        sigma: f64,
        seed: u64,
    ) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::InvalidParam(format!("snr_db must be finite, got {snr_db}")));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParam(format!(
                "sigma must be finite and non-negative, got {sigma}"
            )));
        }
        for (m, node) in nodes.iter().enumerate() {
            if node.pa_index >= cell.n_pa() {
                return Err(Error::InvalidParam(format!(
                    "node {m}: preamble index {} out of range (n_pa = {})",
                    node.pa_index,
                    cell.n_pa()
                )));
            }
            if node.tag_index >= cell.n_tag() {
                return Err(Error::InvalidParam(format!(
                    "node {m}: tag index {} out of range (n_tag = {})",
                    node.tag_index,
                    cell.n_tag()
                )));
            }
            if node.delay >= cell.n_cs() {
                return Err(Error::InvalidParam(format!(
                    "node {m}: delay {} outside the detection window (n_cs = {})",
                    node.delay,
                    cell.n_cs()
                )));
            }
        }
        Ok(Self {
            cell,
            nodes,
            snr_db,
            sigma,
            seed,
        })
    }

    /// Cell configuration.
    pub fn cell(&self) -> &CellConfig {
        &self.cell
    }

    /// Transmitting nodes.
    pub fn nodes(&self) -> &[NodeTx] {
        &self.nodes
    }

    /// Scenario SNR in dB.
    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    /// Per-component noise standard deviation.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Base seed for noise synthesis.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Replaces the seed (used to derive independent Monte Carlo trials).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.seed = seed;
        s
    }

    /// Common node amplitude implied by the scenario SNR.
    ///
    /// For a noiseless scenario (`sigma = 0`) the amplitude is referenced to
    /// unit noise, so `snr_db = 0` gives amplitude 1.
    pub fn amplitude(&self) -> f64 {
        if self.sigma > 0.0 {
            snr_to_amplitude(self.snr_db, self.sigma).expect("sigma checked at construction")
        } else {
            10f64.powf(self.snr_db / 20.0)
        }
    }
}

/// Converts an SNR in dB to a linear signal amplitude against noise of
/// per-component standard deviation `sigma`:
/// `amplitude = sigma * 10^(snr_db / 20)`.
///
/// # Errors
///
/// Returns [`Error::InvalidParam`] if `sigma <= 0` or an input is not finite.
pub fn snr_to_amplitude(snr_db: f64, sigma: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "sigma must be finite and positive, got {sigma}"
        )));
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidParam(format!("snr_db must be finite, got {snr_db}")));
    }
    Ok(sigma * 10f64.powf(snr_db / 20.0))
}

/// Synthesizes the deterministic (noise-free) part of the received vector:
/// the sum of every node's delayed tagged preamble at the scenario amplitude.
///
/// # Errors
///
/// Propagates construction errors from the preamble builder.
pub fn synthesize_clean(scenario: &PhyScenario) -> Result<Vec<Complex64>> {
    let n = scenario.cell().n_zc();
    let amplitude = scenario.amplitude();
    let mut sum = vec![Complex64::new(0.0, 0.0); n];
    for node in scenario.nodes() {
        let p = build_tagged_preamble(scenario.cell(), node.pa_index, node.tag_index, amplitude)?;
        // Delays are < n_cs <= n_zc by scenario validation.
        let delayed = cyclic_shift(&p.samples, node.delay)?;
        for (acc, s) in sum.iter_mut().zip(delayed.iter()) {
            *acc += s;
        }
    }
    Ok(sum)
}

/// Synthesizes one received vector: clean superposition plus seeded AWGN.
///
/// The same scenario (including seed) always produces bit-identical output.
///
/// # Errors
///
/// Propagates construction errors from the preamble builder.
pub fn synthesize_received(scenario: &PhyScenario) -> Result<Vec<Complex64>> {
    let mut rx = synthesize_clean(scenario)?;
    if scenario.sigma() > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed());
        add_awgn(&mut rx, scenario.sigma(), &mut rng);
    }
    Ok(rx)
}

/// Adds circular complex AWGN with per-component standard deviation `sigma`
/// in place, drawing from the supplied generator.
pub fn add_awgn<R: Rng>(samples: &mut [Complex64], sigma: f64, rng: &mut R) {
    for s in samples.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex64::new(sigma * re, sigma * im);
    }
}

/// Derives the generator for one Monte Carlo trial from a base seed.
///
/// Every trial gets its own counter-mode stream, so trials are independent
/// and the set of draws does not depend on scheduling or thread count.
pub fn trial_rng(base_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trial);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zc::{circ_correlate, zc_sequence, ZcParams};

    fn cell() -> CellConfig {
        CellConfig::with_tag_count(ZcParams::new(139).unwrap(), 11, 5, 1).unwrap()
    }

    #[test]
    fn snr_amplitude_reference_values() {
        // -13 dB against unit noise.
        assert!((snr_to_amplitude(-13.0, 1.0).unwrap() - 0.223872113856834).abs() < 1e-12);
        assert!((snr_to_amplitude(0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // Scales linearly with sigma.
        assert!((snr_to_amplitude(-6.0, 2.0).unwrap() - 2.0 * 10f64.powf(-0.3)).abs() < 1e-12);
        assert!(snr_to_amplitude(-10.0, 0.0).is_err());
        assert!(snr_to_amplitude(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn scenario_validates_node_choices() {
        let c = cell();
        let bad_pa = vec![NodeTx { pa_index: 5, tag_index: 0, delay: 0 }];
        let bad_tag = vec![NodeTx { pa_index: 0, tag_index: 11, delay: 0 }];
        let bad_delay = vec![NodeTx { pa_index: 0, tag_index: 0, delay: 12 }];
        assert!(PhyScenario::new(c, bad_pa, -10.0, 1.0, 0).is_err());
        assert!(PhyScenario::new(c, bad_tag, -10.0, 1.0, 0).is_err());
        assert!(PhyScenario::new(c, bad_delay, -10.0, 1.0, 0).is_err());
        assert!(PhyScenario::new(c, vec![], -10.0, 1.0, 0).is_ok());
    }

    #[test]
    fn synthesis_is_seed_deterministic() {
        let c = cell();
        let nodes = vec![NodeTx { pa_index: 1, tag_index: 3, delay: 2 }];
        let scn = PhyScenario::new(c, nodes, -10.0, 1.0, 42).unwrap();
        let a = synthesize_received(&scn).unwrap();
        let b = synthesize_received(&scn).unwrap();
        assert_eq!(a, b, "same seed must reproduce the identical vector");
        let other = synthesize_received(&scn.with_seed(43)).unwrap();
        assert_ne!(a, other, "different seeds must differ");
    }

    #[test]
    fn clean_synthesis_places_peaks_at_window_plus_delay() {
        let c = cell();
        let node = NodeTx { pa_index: 2, tag_index: 7, delay: 5 };
        let scn = PhyScenario::new(c, vec![node], 0.0, 0.0, 0).unwrap();
        assert!((scn.amplitude() - 1.0).abs() < 1e-15);
        let rx = synthesize_received(&scn).unwrap();

        let pa_ref = zc_sequence(c.zc(), c.pa_root()).unwrap();
        let mags = circ_correlate(&rx, &pa_ref).unwrap();
        let peak = node.pa_index * c.n_cs() + node.delay;
        let best = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(best, peak, "delay shifts the peak within the window");
        assert!((mags[peak] - 139f64.sqrt()).abs() <= 1.0 + 1e-9);

        let tag_ref = zc_sequence(c.zc(), c.tag_root(node.pa_index)).unwrap();
        let tmags = circ_correlate(&rx, &tag_ref).unwrap();
        let tpeak = node.tag_index * c.n_cs() + node.delay;
        assert!((tmags[tpeak] - 139f64.sqrt()).abs() <= 1.0 + 1e-9);
    }

    #[test]
    fn superposition_is_the_sum_of_single_nodes() {
        let c = cell();
        let n1 = NodeTx { pa_index: 0, tag_index: 1, delay: 0 };
        let n2 = NodeTx { pa_index: 3, tag_index: 9, delay: 4 };
        let both = synthesize_clean(&PhyScenario::new(c, vec![n1, n2], -3.0, 1.0, 0).unwrap()).unwrap();
        let a = synthesize_clean(&PhyScenario::new(c, vec![n1], -3.0, 1.0, 0).unwrap()).unwrap();
        let b = synthesize_clean(&PhyScenario::new(c, vec![n2], -3.0, 1.0, 0).unwrap()).unwrap();
        for i in 0..139 {
            assert!((both[i] - (a[i] + b[i])).norm() < 1e-12);
        }
    }

    #[test]
    fn trial_rngs_are_independent_streams() {
        let mut r0 = trial_rng(7, 0);
        let mut r0_again = trial_rng(7, 0);
        let mut r1 = trial_rng(7, 1);
        let a: [f64; 4] = std::array::from_fn(|_| r0.random());
        let b: [f64; 4] = std::array::from_fn(|_| r0_again.random());
        let c: [f64; 4] = std::array::from_fn(|_| r1.random());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
