//! Slot-level Monte-Carlo simulation of the contention process.
//!
//! Each trial draws `m` contending nodes; node 0 is the observed target.
//! Every node independently picks a preamble and a tag uniformly and a
//! timing-advance zone from the area-uniform disc distribution (zone `d`
//! with probability `(2d + 1) / n_ta^2`), exactly the rules the closed
//! forms in [`crate::analytic`] integrate, so estimates converge to those
//! formulas with pure sampling noise.
//!
//! Per-trial randomness comes from one counter-mode stream per trial index
//! ([`crate::channel::trial_rng`]): results are reproducible for a given
//! seed regardless of thread count, and trials are embarrassingly parallel.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::trial_rng;
use crate::{Error, Result};

/// What counts as an uplink (grant response) collision for the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionRule {
    /// Another node picked the same preamble and tag. The receiver captures
    /// a single timing advance for that pair, answers with one grant, and
    /// every holder of the pair responds — colliding regardless of where
    /// the nodes sit. This is the rule the closed form integrates.
    PaTag,
    /// Stricter variant requiring the same zone as well, for receivers able
    /// to separate same-tag nodes whose timing differs.
    PaTagZone,
}

/// How nodes redraw between attempts when more than one attempt is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetryMode {
    /// Fresh preamble and tag, same zone: nodes do not move between
    /// attempts. The independent-attempt closed form is a (very tight)
    /// approximation under this mode.
    KeepTaZone,
    /// Fresh preamble, tag and zone: attempts are fully independent and the
    /// closed form `1 - (1 - p)^k` is exact.
    RedrawAll,
}

/// Simulation scenario: population and selection-space sizes plus the
/// attempt and collision policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacScenario {
    m: usize,
    n_pa: usize,
    n_tag: usize,
    n_ta: usize,
    attempts: u32,
    collision_rule: CollisionRule,
    retry_mode: RetryMode,
}

impl MacScenario {
    /// Builds a single-attempt scenario with the [`CollisionRule::PaTag`]
    /// rule and [`RetryMode::KeepTaZone`] retries.
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidParam`] if any count is zero.
    pub fn new(m: usize, n_pa: usize, n_tag: usize, n_ta: usize) -> Result<Self> {
        if m == 0 || n_pa == 0 || n_tag == 0 || n_ta == 0 {
            return Err(Error::InvalidParam(
                "node, preamble, tag and zone counts must all be at least 1".into(),
            ));
        }
        Ok(Self {
            m,
            n_pa,
            n_tag,
            n_ta,
            attempts: 1,
            collision_rule: CollisionRule::PaTag,
            retry_mode: RetryMode::KeepTaZone,
        })
    }

    /// Sets the number of access attempts per trial (at least one).
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidParam`] for zero attempts.
    pub fn with_attempts(mut self, attempts: u32) -> Result<Self> {
        if attempts == 0 {
            return Err(Error::InvalidParam("attempts must be at least 1".into()));
        }
        self.attempts = attempts;
        Ok(self)
    }

    /// Sets the uplink collision rule.
    pub fn with_collision_rule(mut self, rule: CollisionRule) -> Self {
        self.collision_rule = rule;
        self
    }

    /// Sets the retry policy.
    pub fn with_retry_mode(mut self, mode: RetryMode) -> Self {
        self.retry_mode = mode;
        self
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

    /// Number of timing-advance zones.
    pub fn n_ta(&self) -> usize {
        self.n_ta
    }

    /// Attempts per trial.
    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    /// Active collision rule.
    pub fn collision_rule(&self) -> CollisionRule {
        self.collision_rule
    }

    /// Active retry policy.
    pub fn retry_mode(&self) -> RetryMode {
        self.retry_mode
    }
}

/// One node's random selections for a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeDraw {
    /// Chosen preamble index.
    pub pa: usize,
    /// Chosen tag index.
    pub tag: usize,
    /// Timing-advance zone resulting from the node's distance.
    pub zone: usize,
}

/// Draws a timing zone from the area-uniform disc distribution: the radius
/// is `r * sqrt(u)` for uniform `u`, so zone `d` has probability
/// `(2d + 1) / n_ta^2` (the cell radius cancels).
pub fn draw_zone<R: Rng + ?Sized>(rng: &mut R, n_ta: usize) -> usize {
    let u: f64 = rng.random();
    ((n_ta as f64 * u.sqrt()) as usize).min(n_ta - 1)
}

/// Draws one node: uniform preamble, uniform tag, area-uniform zone,
/// consumed from `rng` in that order.
pub fn draw_node<R: Rng + ?Sized>(
    rng: &mut R,
    n_pa: usize,
    n_tag: usize,
    n_ta: usize,
) -> NodeDraw {
    NodeDraw {
        pa: rng.random_range(0..n_pa),
        tag: rng.random_range(0..n_tag),
        zone: draw_zone(rng, n_ta),
    }
}

/// Indicator outcomes of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Target completed random access under the tagged scheme within the
    /// allowed attempts.
    pub ra_success_tagged: bool,
    /// Target completed random access under the conventional scheme (its
    /// preamble unshared) within the allowed attempts.
    pub ra_success_conv: bool,
    /// Target's first-attempt uplink transmission collided under the tagged
    /// scheme (per the active [`CollisionRule`]).
    pub pusch_collision_tagged: bool,
    /// Target's first-attempt uplink transmission collided under the
    /// conventional scheme (any shared preamble).
    pub pusch_collision_conv: bool,
}

fn target_success(nodes: &[NodeDraw]) -> bool {
    let t = nodes[0];
    nodes[1..]
        .iter()
        .all(|n| n.pa != t.pa || (n.tag != t.tag && n.zone != t.zone))
}

fn target_conv_success(nodes: &[NodeDraw]) -> bool {
    let t = nodes[0];
    nodes[1..].iter().all(|n| n.pa != t.pa)
}

fn target_pusch_collision(nodes: &[NodeDraw], rule: CollisionRule) -> bool {
    let t = nodes[0];
    nodes[1..].iter().any(|n| {
        n.pa == t.pa
            && n.tag == t.tag
            && match rule {
                CollisionRule::PaTag => true,
                CollisionRule::PaTagZone => n.zone == t.zone,
            }
    })
}

/// Runs one trial on the supplied RNG.
///
/// The target succeeds when every node sharing its preamble differs in both
/// tag and zone: a shared tag makes the grant ambiguous, and a shared zone
/// under a different tag duplicates the timing advance, which suppresses
/// the grant. Collision indicators always describe the first attempt;
/// success indicators account for retries per the scenario's policy.
pub fn run_mac_trial<R: Rng + ?Sized>(scn: &MacScenario, rng: &mut R) -> TrialOutcome {
    let mut nodes: Vec<NodeDraw> = (0..scn.m)
        .map(|_| draw_node(rng, scn.n_pa, scn.n_tag, scn.n_ta))
        .collect();

    let mut ra_success_tagged = target_success(&nodes);
    let mut ra_success_conv = target_conv_success(&nodes);
    let pusch_collision_tagged = target_pusch_collision(&nodes, scn.collision_rule);
    let pusch_collision_conv = !ra_success_conv;

    for _ in 1..scn.attempts {
        if ra_success_tagged && ra_success_conv {
            break;
        }
        for node in &mut nodes {
            node.pa = rng.random_range(0..scn.n_pa);
            node.tag = rng.random_range(0..scn.n_tag);
            if scn.retry_mode == RetryMode::RedrawAll {
                node.zone = draw_zone(rng, scn.n_ta);
            }
        }
        ra_success_tagged = ra_success_tagged || target_success(&nodes);
        ra_success_conv = ra_success_conv || target_conv_success(&nodes);
    }

    TrialOutcome {
        ra_success_tagged,
        ra_success_conv,
        pusch_collision_tagged,
        pusch_collision_conv,
    }
}

/// A Monte-Carlo rate with its 95% normal-approximation confidence
/// half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacEstimate {
    /// Estimated probability.
    pub value: f64,
    /// `1.96 * sqrt(p (1 - p) / trials)`.
    pub ci_halfwidth: f64,
}

impl MacEstimate {
    /// Builds the estimate from a success count out of `trials`.
    pub fn from_count(successes: u64, trials: u64) -> Self {
        assert!(trials > 0, "trials must be positive");
        assert!(successes <= trials);
        let p = successes as f64 / trials as f64;
        MacEstimate {
            value: p,
            ci_halfwidth: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

/// Aggregated rates over all trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacOutcome {
    /// Number of trials behind every estimate.
    pub trials: u64,
    /// Tagged-scheme random-access success rate.
    pub ra_success_tagged: MacEstimate,
    /// Conventional-scheme random-access success rate.
    pub ra_success_conv: MacEstimate,
    /// Tagged-scheme first-attempt uplink collision rate.
    pub pusch_collision_tagged: MacEstimate,
    /// Conventional-scheme first-attempt uplink collision rate.
    pub pusch_collision_conv: MacEstimate,
}

/// Runs `trials` independent trials in parallel and aggregates the four
/// indicator rates.
///
/// Trial `i` uses RNG stream `i` of `seed`, so the outcome is a pure
/// function of `(scenario, trials, seed)` — thread scheduling cannot
/// change it.
///
/// # Panics
///
/// Panics if `trials` is zero.
pub fn run_mac_sim(scn: &MacScenario, trials: u64, seed: u64) -> MacOutcome {
    assert!(trials > 0, "trials must be positive");
    let counts = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let o = run_mac_trial(scn, &mut rng);
            [
                o.ra_success_tagged as u64,
                o.ra_success_conv as u64,
                o.pusch_collision_tagged as u64,
                o.pusch_collision_conv as u64,
            ]
        })
        .reduce(
            || [0u64; 4],
            |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]],
        );
    MacOutcome {
        trials,
        ra_success_tagged: MacEstimate::from_count(counts[0], trials),
        ra_success_conv: MacEstimate::from_count(counts[1], trials),
        pusch_collision_tagged: MacEstimate::from_count(counts[2], trials),
        pusch_collision_conv: MacEstimate::from_count(counts[3], trials),
    }
}
