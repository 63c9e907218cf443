//! Cell configuration and tagged-preamble construction.
//!
//! A cell partitions the correlation lag axis into windows of `n_cs` samples.
//! Preamble index `i` owns the window starting at `i * n_cs` of the *preamble
//! root's* correlator, and tag index `l` owns the window starting at
//! `l * n_cs` of the *tag root's* correlator. A transmitted access signal is
//!
//! ```text
//! X[n] = amplitude * ( z_r[(n + i*n_cs) mod N]  +  z_k[(n + l*n_cs) mod N] )
//! ```
//!
//! where `r` is the cell's preamble root and `k = tag_root_map(r, i, N)` is
//! the tag root assigned to preamble `i`. Keeping one tag root per preamble
//! index (rather than per node) means the receiver needs a single extra
//! correlation per detected preamble, and nodes that collide on `i` are still
//! separated by their independently chosen tag shifts `l`.

use num_complex::Complex64;

use crate::zc::{cyclic_shift, zc_sequence, ZcParams};
use crate::{Error, Result};

/// Static per-cell parameters of the random-access channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellConfig {
    zc: ZcParams,
    n_cs: usize,
    n_pa: usize,
    n_tag: usize,
    pa_root: usize,
}

impl CellConfig {
    /// Builds and validates a cell configuration.
    ///
    /// # Arguments
    ///
    /// * `zc` - sequence length parameters
    /// * `n_cs` - detection-window width in samples (the cyclic-shift step)
    /// * `n_pa` - number of preamble indices, `n_pa * n_cs <= n_zc`
    /// * `n_tag` - number of tag indices, `n_tag * n_cs <= n_zc`
    /// * `pa_root` - ZC root used by every preamble, `1..=n_zc-1`
    ///
    /// # Errors
    ///
    /// Returns [`Error::InvalidParam`] when a count does not fit in the
    /// sequence, the root is out of range, or the tag-root assignment would
    /// not be collision-free over the preamble indices.
    pub fn new(
        zc: ZcParams,
        n_cs: usize,
        n_pa: usize,
        n_tag: usize,
        pa_root: usize,
    ) -> Result<Self> {
        let n = zc.n_zc();
        if n_cs == 0 {
            return Err(Error::InvalidParam("window width n_cs must be > 0".into()));
        }
        if n_pa == 0 || n_pa * n_cs > n {
            return Err(Error::InvalidParam(format!(
                "n_pa = {n_pa} windows of {n_cs} samples do not fit in {n}"
            )));
        }
        if n_tag == 0 || n_tag * n_cs > n {
            return Err(Error::InvalidParam(format!(
                "n_tag = {n_tag} windows of {n_cs} samples do not fit in {n}"
            )));
        }
        if pa_root == 0 || pa_root >= n {
            return Err(Error::InvalidParam(format!(
                "preamble root must be in 1..={}, got {pa_root}",
                n - 1
            )));
        }
        // The tag-root assignment must avoid the preamble root and must not
        // hand the same tag root to two preamble indices; cheap to check
        // exhaustively at construction time.
        let mut seen = vec![false; n];
        for i in 0..n_pa {
            let k = tag_root_map(pa_root, i, n);
            if k == pa_root {
                return Err(Error::InvalidParam(format!(
                    "tag root for preamble {i} equals the preamble root {pa_root}"
                )));
            }
            if seen[k] {
                return Err(Error::InvalidParam(format!(
                    "tag root {k} assigned to two preamble indices (n_pa = {n_pa})"
                )));
            }
            seen[k] = true;
        }
        Ok(Self {
            zc,
            n_cs,
            n_pa,
            n_tag,
            pa_root,
        })
    }

    /// Builds a cell whose window width is derived from the tag count:
    /// `n_cs = floor(n_zc / n_tag)`, the widest step that still fits `n_tag`
    /// tag windows. The number of usable timing offsets per window equals
    /// `n_cs`, so sizing by the tag count trades timing range against tag
    /// capacity.
    ///
    /// # Errors
    ///
    /// Same conditions as [`CellConfig::new`].
    pub fn with_tag_count(zc: ZcParams, n_tag: usize, n_pa: usize, pa_root: usize) -> Result<Self> {
        if n_tag == 0 {
            return Err(Error::InvalidParam("n_tag must be > 0".into()));
        }
        let n_cs = zc.n_zc() / n_tag;
        Self::new(zc, n_cs, n_pa, n_tag, pa_root)
    }

    /// Sequence length parameters.
    pub fn zc(&self) -> ZcParams {
        self.zc
    }

    /// Sequence length in samples.
    pub fn n_zc(&self) -> usize {
        self.zc.n_zc()
    }

    /// Detection-window width (cyclic-shift step) in samples.
    pub fn n_cs(&self) -> usize {
        self.n_cs
    }

    /// Number of preamble indices.
    pub fn n_pa(&self) -> usize {
        self.n_pa
    }

    /// Number of tag indices.
    pub fn n_tag(&self) -> usize {
        self.n_tag
    }

    /// ZC root shared by all preambles in the cell.
    pub fn pa_root(&self) -> usize {
        self.pa_root
    }

    /// Tag root assigned to a preamble index (see [`tag_root_map`]).
    pub fn tag_root(&self, pa_index: usize) -> usize {
        tag_root_map(self.pa_root, pa_index, self.n_zc())
    }
}

/// Maps a preamble index to its tag root.
///
/// `k = ((pa_root + pa_index) mod (n_zc - 1)) + 1` walks through `1..=n_zc-1`
/// as the preamble index increases; if that lands on the preamble root
/// itself the value is stepped once more with the same rule. The assignment
/// is collision-free over any practical preamble count (verified at
/// [`CellConfig`] construction) and never returns the preamble root.
pub fn tag_root_map(pa_root: usize, pa_index: usize, n_zc: usize) -> usize {
    let m = n_zc - 1;
    let mut k = (pa_root + pa_index) % m + 1;
    if k == pa_root {
        k = k % m + 1;
    }
    k
}

/// A node's transmit signal: preamble plus tag, at a common amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPreamble {
    /// Preamble index `i` (selects the preamble-correlator window).
    pub pa_index: usize,
    /// Tag index `l` (selects the tag-correlator window).
    pub tag_index: usize,
    /// Tag root this preamble index maps to.
    pub tag_root: usize,
    /// Per-sequence amplitude applied to both components.
    pub amplitude: f64,
    /// Baseband samples, `n_zc` of them.
    pub samples: Vec<Complex64>,
}

/// Builds the transmit signal for one node.
///
/// # Arguments
///
/// * `cfg` - cell configuration
/// * `pa_index` - chosen preamble index, `< cfg.n_pa()`
/// * `tag_index` - chosen tag index, `< cfg.n_tag()`
/// * `amplitude` - linear amplitude applied to both sequence components
///
/// # Errors
///
/// Returns [`Error::InvalidParam`] for an out-of-range index or a
/// non-finite / negative amplitude.
pub fn build_tagged_preamble(
    cfg: &CellConfig,
    pa_index: usize,
    tag_index: usize,
    amplitude: f64,
) -> Result<TaggedPreamble> {
    if pa_index >= cfg.n_pa() {
        return Err(Error::InvalidParam(format!(
            "preamble index {pa_index} out of range (n_pa = {})",
            cfg.n_pa()
        )));
    }
    if tag_index >= cfg.n_tag() {
        return Err(Error::InvalidParam(format!(
            "tag index {tag_index} out of range (n_tag = {})",
            cfg.n_tag()
        )));
    }
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::InvalidParam(format!(
            "amplitude must be finite and non-negative, got {amplitude}"
        )));
    }
    let tag_root = cfg.tag_root(pa_index);
    // Window starts i*n_cs and l*n_cs are < n_zc by the fit checks in
    // CellConfig::new, so these shifts are always in range.
    let pa_seq = cyclic_shift(
        &zc_sequence(cfg.zc(), cfg.pa_root())?,
        pa_index * cfg.n_cs(),
    )?;
    let tag_seq = cyclic_shift(&zc_sequence(cfg.zc(), tag_root)?, tag_index * cfg.n_cs())?;
    let samples = pa_seq
        .iter()
        .zip(tag_seq.iter())
        .map(|(p, q)| (p + q) * amplitude)
        .collect();
    Ok(TaggedPreamble {
        pa_index,
        tag_index,
        tag_root,
        amplitude,
        samples,
    })
}
