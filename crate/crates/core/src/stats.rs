//! Seeded bootstrap confidence intervals and paired significance tests.
//!
//! Everything here is reproducible from the seed alone. The resampling
//! scheme is pinned so an independent implementation can match it
//! bit-for-bit:
//!
//! * Generator: SplitMix64. State starts at the seed; each draw adds
//!   0x9E3779B97F4A7C15 to the state and finalizes with the two
//!   xor-multiply steps (0xBF58476D1CE4E5B9, 0x94D049BB133111EB, final
//!   `z ^ (z >> 31)`).
//! * Indices: for a corpus of n utterances, each resample consumes n draws
//!   in order; index = draw mod n. One stream serves the whole operation,
//!   resamples in order.
//! * Statistic: micro-average over the resampled utterances (integer edit
//!   and reference-unit totals, divided once).
//! * Percentile CI: sort the resample statistics ascending; the q-quantile
//!   is linear interpolation between order statistics at rank
//!   h = (R−1)·q, i.e. v[⌊h⌋] + (h−⌊h⌋)·(v[⌊h⌋+1] − v[⌊h⌋]).
//! * Two-sided p: 2·min(#{Δ* ≤ 0}, #{Δ* ≥ 0})/R, clamped to [0, 1].
//!
//! Platform default generators are deliberately not used.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::UtteranceScore;

/// SplitMix64 (Steele, Lea & Flood). Ten lines, portable, and trivially
/// reimplementable, which is the point.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Resample index in 0..n.
    pub fn next_index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Which micro-averaged metric the bootstrap resamples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Wer,
    Cer,
}

impl Metric {
    fn units(self, s: &UtteranceScore) -> (u64, u64) {
        match self {
            Metric::Wer => (s.word_edits as u64, s.ref_tokens as u64),
            Metric::Cer => (s.char_edits as u64, s.ref_chars as u64),
        }
    }
}

/// Bootstrap parameters. The seed is required; there is no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub confidence: f64,
    pub seed: u64,
    /// Apply +1/(R+1) smoothing to the paired p-value.
    pub smoothed_p: bool,
}

impl BootstrapConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            n_resamples: 1000,
            confidence: 0.95,
            seed,
            smoothed_p: false,
        }
    }

    fn validate(&self) -> Result<(), StatsError> {
        if self.n_resamples < 1 {
            return Err(StatsError::InvalidConfig("n_resamples must be >= 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(StatsError::InvalidConfig(format!(
                "confidence must be in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Point estimate with percentile confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_resamples: usize,
    pub seed: u64,
}

/// Two-sided paired bootstrap verdict on system A minus system B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub delta_point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_value: f64,
    pub significant: bool,
    pub n_resamples: usize,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty score list; nothing to resample")]
    EmptyScores,
    #[error("invalid bootstrap config: {0}")]
    InvalidConfig(String),
}

fn micro(scores: &[UtteranceScore], metric: Metric) -> f64 {
    let (mut edits, mut units) = (0u64, 0u64);
    for s in scores {
        let (e, u) = metric.units(s);
        edits += e;
        units += u;
    }
    edits as f64 / units as f64
}

/// Linear-interpolation quantile over an ascending-sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let last = sorted.len() - 1;
    let h = last as f64 * q;
    let lo = h.floor() as usize;
    if lo >= last {
        return sorted[last];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Percentile bootstrap CI for the micro-averaged metric, resampling
/// utterances with replacement.
pub fn bootstrap_ci(
    scores: &[UtteranceScore],
    metric: Metric,
    config: &BootstrapConfig,
) -> Result<BootstrapResult, StatsError> {
    if scores.is_empty() {
        return Err(StatsError::EmptyScores);
    }
    config.validate()?;
    let n = scores.len();
    let mut rng = SplitMix64::new(config.seed);
    let mut stats = Vec::with_capacity(config.n_resamples);
    for _ in 0..config.n_resamples {
        let (mut edits, mut units) = (0u64, 0u64);
        for _ in 0..n {
            let (e, u) = metric.units(&scores[rng.next_index(n)]);
            edits += e;
            units += u;
        }
        stats.push(edits as f64 / units as f64);
    }
    stats.sort_by(|a, b| a.partial_cmp(b).expect("bootstrap statistics are finite"));
    let alpha = 1.0 - config.confidence;
    Ok(BootstrapResult {
        point: micro(scores, metric),
        ci_low: quantile(&stats, alpha / 2.0),
        ci_high: quantile(&stats, 1.0 - alpha / 2.0),
        n_resamples: config.n_resamples,
        seed: config.seed,
    })
}

/// Two-sided paired bootstrap on matched utterance pairs. Each resample
/// draws one index stream and applies it to both systems.
pub fn paired_bootstrap(
    pairs: &[(UtteranceScore, UtteranceScore)],
    metric: Metric,
    config: &BootstrapConfig,
) -> Result<PairedTestResult, StatsError> {
    if pairs.is_empty() {
        return Err(StatsError::EmptyScores);
    }
    config.validate()?;
    let n = pairs.len();
    let mut rng = SplitMix64::new(config.seed);
    let mut deltas = Vec::with_capacity(config.n_resamples);
    let (mut n_le, mut n_ge) = (0usize, 0usize);
    for _ in 0..config.n_resamples {
        let (mut ea, mut ua, mut eb, mut ub) = (0u64, 0u64, 0u64, 0u64);
        for _ in 0..n {
            let (a, b) = &pairs[rng.next_index(n)];
            let (e, u) = metric.units(a);
            ea += e;
            ua += u;
            let (e, u) = metric.units(b);
            eb += e;
            ub += u;
        }
        let delta = ea as f64 / ua as f64 - eb as f64 / ub as f64;
        if delta <= 0.0 {
            n_le += 1;
        }
        if delta >= 0.0 {
            n_ge += 1;
        }
        deltas.push(delta);
    }
    deltas.sort_by(|a, b| a.partial_cmp(b).expect("bootstrap deltas are finite"));
    let r = config.n_resamples as f64;
    let (frac_le, frac_ge) = if config.smoothed_p {
        ((n_le as f64 + 1.0) / (r + 1.0), (n_ge as f64 + 1.0) / (r + 1.0))
    } else {
        (n_le as f64 / r, n_ge as f64 / r)
    };
    let p_value = (2.0 * frac_le.min(frac_ge)).clamp(0.0, 1.0);

    let a_scores: Vec<UtteranceScore> = pairs.iter().map(|(a, _)| a.clone()).collect();
    let b_scores: Vec<UtteranceScore> = pairs.iter().map(|(_, b)| b.clone()).collect();
    let alpha = 1.0 - config.confidence;
    Ok(PairedTestResult {
        delta_point: micro(&a_scores, metric) - micro(&b_scores, metric),
        ci_low: quantile(&deltas, alpha / 2.0),
        ci_high: quantile(&deltas, 1.0 - alpha / 2.0),
        p_value,
        significant: p_value < 0.05,
        n_resamples: config.n_resamples,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(id: usize, edits: usize, tokens: usize) -> UtteranceScore {
        UtteranceScore {
            id: format!("u{id}"),
            ref_tokens: tokens,
            hyp_tokens: tokens,
            word_edits: edits,
            wer: edits as f64 / tokens as f64,
            ref_chars: tokens * 4,
            hyp_chars: tokens * 4,
            char_edits: edits,
            cer: edits as f64 / (tokens * 4) as f64,
            word_hits: tokens.saturating_sub(edits),
            word_substitutions: edits,
            word_insertions: 0,
            word_deletions: 0,
        }
    }

    #[test]
    fn splitmix64_matches_reference_vectors() {
        // Frozen from an independent implementation of the published
        // algorithm before this module was written.
        let take = |seed: u64| {
            let mut rng = SplitMix64::new(seed);
            [rng.next_u64(), rng.next_u64(), rng.next_u64(), rng.next_u64()]
        };
        assert_eq!(
            take(0),
            [
                0xe220a8397b1dcdaf,
                0x6e789e6aa1b965f4,
                0x06c45d188009454f,
                0xf88bb8a8724c81ec
            ]
        );
        assert_eq!(
            take(42),
            [
                0xbdd732262feb6e95,
                0x28efe333b266f103,
                0x47526757130f9f52,
                0x581ce1ff0e4ae394
            ]
        );
    }

    #[test]
    fn all_zero_corpus_has_zero_width_ci() {
        let scores: Vec<_> = (0..20).map(|i| score(i, 0, 5)).collect();
        let r = bootstrap_ci(&scores, Metric::Wer, &BootstrapConfig::new(7)).unwrap();
        assert_eq!(r.point, 0.0);
        assert_eq!(r.ci_low, 0.0);
        assert_eq!(r.ci_high, 0.0);
    }

    #[test]
    fn single_utterance_corpus_has_zero_width_ci() {
        let scores = vec![score(0, 2, 8)];
        let r = bootstrap_ci(&scores, Metric::Wer, &BootstrapConfig::new(7)).unwrap();
        assert_eq!(r.ci_low, r.ci_high);
        assert_eq!(r.ci_low, 0.25);
    }

    #[test]
    fn same_seed_reproduces_bit_identical_results() {
        let scores: Vec<_> = (0..50).map(|i| score(i, i % 4, 6 + i % 3)).collect();
        let cfg = BootstrapConfig::new(42);
        let a = bootstrap_ci(&scores, Metric::Wer, &cfg).unwrap();
        let b = bootstrap_ci(&scores, Metric::Wer, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_paired_systems_are_not_significant() {
        let pairs: Vec<_> = (0..30).map(|i| (score(i, i % 3, 5), score(i, i % 3, 5))).collect();
        let r = paired_bootstrap(&pairs, Metric::Wer, &BootstrapConfig::new(9)).unwrap();
        assert_eq!(r.delta_point, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn fully_separated_paired_systems_are_significant() {
        let pairs: Vec<_> = (0..50).map(|i| (score(i, 5, 5), score(i, 0, 5))).collect();
        let r = paired_bootstrap(&pairs, Metric::Wer, &BootstrapConfig::new(11)).unwrap();
        assert_eq!(r.delta_point, 1.0);
        assert_eq!(r.p_value, 0.0);
        assert!(r.significant);
    }

    #[test]
    fn widening_confidence_never_narrows_ci() {
        let scores: Vec<_> = (0..40).map(|i| score(i, i % 5, 4 + i % 4)).collect();
        let mut narrow_cfg = BootstrapConfig::new(3);
        narrow_cfg.confidence = 0.90;
        let mut wide_cfg = BootstrapConfig::new(3);
        wide_cfg.confidence = 0.99;
        let narrow = bootstrap_ci(&scores, Metric::Wer, &narrow_cfg).unwrap();
        let wide = bootstrap_ci(&scores, Metric::Wer, &wide_cfg).unwrap();
        assert!(wide.ci_low <= narrow.ci_low);
        assert!(wide.ci_high >= narrow.ci_high);
    }

    #[test]
    fn p_value_is_always_a_probability() {
        for seed in 0..20 {
            let pairs: Vec<_> = (0..25)
                .map(|i| (score(i, (i + seed as usize) % 4, 5), score(i, i % 3, 5)))
                .collect();
            let mut cfg = BootstrapConfig::new(seed);
            cfg.n_resamples = 200;
            let r = paired_bootstrap(&pairs, Metric::Wer, &cfg).unwrap();
            assert!((0.0..=1.0).contains(&r.p_value));
            assert_eq!(r.significant, r.p_value < 0.05);
        }
    }

    #[test]
    fn empty_inputs_are_errors() {
        assert!(matches!(
            bootstrap_ci(&[], Metric::Wer, &BootstrapConfig::new(1)),
            Err(StatsError::EmptyScores)
        ));
        assert!(matches!(
            paired_bootstrap(&[], Metric::Wer, &BootstrapConfig::new(1)),
            Err(StatsError::EmptyScores)
        ));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let scores = vec![score(0, 1, 2)];
        let mut cfg = BootstrapConfig::new(1);
        cfg.n_resamples = 0;
        assert!(matches!(
            bootstrap_ci(&scores, Metric::Wer, &cfg),
            Err(StatsError::InvalidConfig(_))
        ));
        let mut cfg = BootstrapConfig::new(1);
        cfg.confidence = 1.0;
        assert!(matches!(
            bootstrap_ci(&scores, Metric::Wer, &cfg),
            Err(StatsError::InvalidConfig(_))
        ));
    }
}
