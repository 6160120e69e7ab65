//! Scoring for the personality inventory (TIPI), the System Usability Scale and
//! the job-competency fit questionnaire, plus norm-banded feedback selection.
//!
//! Everything here is a pure function of its inputs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::localization::{Catalogs, Locale, LocalizationError, Utterance};

pub const TIPI_ITEMS: usize = 10;
pub const TIPI_SCALE_MAX: i64 = 7;
pub const SUS_ITEMS: usize = 10;
pub const SUS_SCALE_MAX: i64 = 5;
pub const COMPETENCY_ITEMS: usize = 26;
pub const COMPETENCY_SCALE_MAX: i64 = 5;

/// Conventional SUS threshold between below- and above-average usability.
pub const SUS_BENCHMARK: f64 = 68.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("expected {expected} answers, got {found}")]
    Count { expected: usize, found: usize },
    #[error("answer {value} at position {position} is outside {min}..={max}")]
    Range {
        position: usize,
        value: i64,
        min: i64,
        max: i64,
    },
    #[error("norm table has {found} competency means, answers need {expected}")]
    NormsMismatch { expected: usize, found: usize },
    #[error("invalid scoring key: {0}")]
    InvalidKey(String),
    #[error("invalid norm table: {0}")]
    InvalidNorms(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trait {
    Extraversion,
    Agreeableness,
    Conscientiousness,
    EmotionalStability,
    Openness,
}

impl Trait {
    pub const ALL: [Trait; 5] = [
        Trait::Extraversion,
        Trait::Agreeableness,
        Trait::Conscientiousness,
        Trait::EmotionalStability,
        Trait::Openness,
    ];

    /// Name used in config files and catalog keys.
    pub fn key(self) -> &'static str {
        match self {
            Trait::Extraversion => "extraversion",
            Trait::Agreeableness => "agreeableness",
            Trait::Conscientiousness => "conscientiousness",
            Trait::EmotionalStability => "emotional_stability",
            Trait::Openness => "openness",
        }
    }

    pub fn from_key(key: &str) -> Option<Trait> {
        Trait::ALL.into_iter().find(|t| t.key() == key)
    }
}

/// Mirrors a response on a 1..=scale_max scale.
pub fn reverse_item(value: i64, scale_max: i64) -> Result<i64, ScoringError> {
    if value < 1 || value > scale_max {
        return Err(ScoringError::Range {
            position: 0,
            value,
            min: 1,
            max: scale_max,
        });
    }
    Ok(scale_max + 1 - value)
}

/// Which answer positions feed each trait: one direct item, one reverse-keyed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TipiKey {
    items: [(Trait, usize, usize); 5],
}

impl TipiKey {
    /// `items` maps each trait to zero-based `(direct, reversed)` answer
    /// positions. Every trait must appear once and every position in
    /// `0..10` must be used exactly once.
    pub fn new(items: [(Trait, usize, usize); 5]) -> Result<Self, ScoringError> {
        let mut seen_traits = Vec::new();
        let mut used = [false; TIPI_ITEMS];
        for &(t, direct, reversed) in &items {
            if seen_traits.contains(&t) {
                return Err(ScoringError::InvalidKey(format!("trait {} listed twice", t.key())));
            }
            seen_traits.push(t);
            for pos in [direct, reversed] {
                if pos >= TIPI_ITEMS {
                    return Err(ScoringError::InvalidKey(format!("item position {pos} out of range")));
                }
                if std::mem::replace(&mut used[pos], true) {
                    return Err(ScoringError::InvalidKey(format!("item position {pos} used twice")));
                }
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(Trait, usize, usize); 5] {
        &self.items
    }
}

/// Big Five trait scores on the 1.0..=7.0 scale in steps of 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigFiveProfile {
    pub extraversion: f64,
    pub agreeableness: f64,
    pub conscientiousness: f64,
    pub emotional_stability: f64,
    pub openness: f64,
}

impl BigFiveProfile {
    pub fn uniform(value: f64) -> Self {
        Self {
            extraversion: value,
            agreeableness: value,
            conscientiousness: value,
            emotional_stability: value,
            openness: value,
        }
    }

    pub fn get(&self, t: Trait) -> f64 {
        match t {
            Trait::Extraversion => self.extraversion,
            Trait::Agreeableness => self.agreeableness,
            Trait::Conscientiousness => self.conscientiousness,
            Trait::EmotionalStability => self.emotional_stability,
            Trait::Openness => self.openness,
        }
    }

    fn set(&mut self, t: Trait, v: f64) {
        match t {
            Trait::Extraversion => self.extraversion = v,
            Trait::Agreeableness => self.agreeableness = v,
            Trait::Conscientiousness => self.conscientiousness = v,
            Trait::EmotionalStability => self.emotional_stability = v,
            Trait::Openness => self.openness = v,
        }
    }
}

fn check_answers(answers: &[i64], expected: usize, max: i64) -> Result<(), ScoringError> {
    if answers.len() != expected {
        return Err(ScoringError::Count {
            expected,
            found: answers.len(),
        });
    }
    for (i, &v) in answers.iter().enumerate() {
        if !(1..=max).contains(&v) {
            return Err(ScoringError::Range {
                position: i + 1,
                value: v,
                min: 1,
                max,
            });
        }
    }
    Ok(())
}

/// Scores ten 1..=7 answers given in questionnaire order.
pub fn score_tipi(answers: &[i64], key: &TipiKey) -> Result<BigFiveProfile, ScoringError> {
    check_answers(answers, TIPI_ITEMS, TIPI_SCALE_MAX)?;
    let mut profile = BigFiveProfile::uniform(0.0);
    for &(t, direct, reversed) in key.items() {
        let mirrored = reverse_item(answers[reversed], TIPI_SCALE_MAX)?;
        // integer sum halved: exact in f64, 0.5 granularity
        profile.set(t, (answers[direct] + mirrored) as f64 / 2.0);
    }
    Ok(profile)
}

/// System Usability Scale score, 0..=100 in steps of 2.5.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SusScore(f64);

impl SusScore {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn benchmark(self) -> BenchmarkFlag {
        BenchmarkFlag::of(self.0)
    }
}

impl fmt::Display for SusScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.0)
    }
}

/// Position of a SUS value relative to [`SUS_BENCHMARK`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkFlag {
    Above,
    At,
    Below,
}

impl BenchmarkFlag {
    pub fn of(value: f64) -> Self {
        if value > SUS_BENCHMARK {
            BenchmarkFlag::Above
        } else if value < SUS_BENCHMARK {
            BenchmarkFlag::Below
        } else {
            BenchmarkFlag::At
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BenchmarkFlag::Above => "above",
            BenchmarkFlag::At => "at",
            BenchmarkFlag::Below => "below",
        }
    }
}

/// Odd items contribute `v - 1`, even items `5 - v`; the sum is scaled by 2.5.
pub fn score_sus(answers: &[i64]) -> Result<SusScore, ScoringError> {
    check_answers(answers, SUS_ITEMS, SUS_SCALE_MAX)?;
    Ok(SusScore(sus_items_score(answers)?))
}

/// SUS-style score for any even number of alternating positive and negative
/// 1..=5 items, scaled to 0..=100. Ten items give the standard SUS.
pub fn sus_items_score(answers: &[i64]) -> Result<f64, ScoringError> {
    if answers.is_empty() || answers.len() % 2 != 0 {
        return Err(ScoringError::Count {
            expected: (answers.len() + answers.len() % 2).max(2),
            found: answers.len(),
        });
    }
    check_answers(answers, answers.len(), SUS_SCALE_MAX)?;
    let raw: i64 = answers
        .iter()
        .enumerate()
        .map(|(i, &v)| if i % 2 == 0 { v - 1 } else { SUS_SCALE_MAX - v })
        .sum();
    let max = (SUS_SCALE_MAX - 1) * answers.len() as i64;
    Ok(raw as f64 * 100.0 / max as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Below,
    Near,
    Above,
}

impl Band {
    /// `Above` iff value > reference + half_width, `Below` iff value <
    /// reference - half_width; the boundaries themselves are `Near`.
    pub fn classify(value: f64, reference: f64, half_width: f64) -> Band {
        let delta = value - reference;
        if delta > half_width {
            Band::Above
        } else if delta < -half_width {
            Band::Below
        } else {
            Band::Near
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Band::Below => "below",
            Band::Near => "near",
            Band::Above => "above",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraitNorm {
    pub mean: f64,
    pub sd: f64,
}

/// Reference values used for feedback banding. Loaded from config.
#[derive(Debug, Clone, PartialEq)]
pub struct NormTable {
    traits: BTreeMap<Trait, TraitNorm>,
    competency_means: Vec<f64>,
    trait_band_sd: f64,
    competency_band: f64,
}

impl NormTable {
    pub fn new(
        traits: BTreeMap<Trait, TraitNorm>,
        competency_means: Vec<f64>,
        trait_band_sd: f64,
        competency_band: f64,
    ) -> Result<Self, ScoringError> {
        for t in Trait::ALL {
            let norm = traits
                .get(&t)
                .ok_or_else(|| ScoringError::InvalidNorms(format!("no norm for {}", t.key())))?;
            if !(norm.sd > 0.0) || !norm.mean.is_finite() {
                return Err(ScoringError::InvalidNorms(format!(
                    "{} needs a finite mean and a positive sd",
                    t.key()
                )));
            }
        }
        if competency_means.iter().any(|m| !m.is_finite()) {
            return Err(ScoringError::InvalidNorms("competency means must be finite".into()));
        }
        if !(trait_band_sd >= 0.0) || !(competency_band >= 0.0) {
            return Err(ScoringError::InvalidNorms("band widths must be non-negative".into()));
        }
        Ok(Self {
            traits,
            competency_means,
            trait_band_sd,
            competency_band,
        })
    }

    pub fn trait_norm(&self, t: Trait) -> TraitNorm {
        self.traits[&t]
    }

    pub fn competency_means(&self) -> &[f64] {
        &self.competency_means
    }

    pub fn trait_band(&self, t: Trait, score: f64) -> Band {
        let norm = self.trait_norm(t);
        Band::classify(score, norm.mean, self.trait_band_sd * norm.sd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompetencyEntry {
    pub answer: i64,
    pub reference_mean: f64,
    pub delta: f64,
    pub band: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetencyFitReport {
    pub entries: Vec<CompetencyEntry>,
}

impl CompetencyFitReport {
    /// Positions (zero-based) of the competencies that fell into `band`.
    pub fn positions_in(&self, band: Band) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.band == band)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn score_competency_fit(
    answers: &[i64],
    norms: &NormTable,
) -> Result<CompetencyFitReport, ScoringError> {
    check_answers(answers, COMPETENCY_ITEMS, COMPETENCY_SCALE_MAX)?;
    let means = norms.competency_means();
    if means.len() != answers.len() {
        return Err(ScoringError::NormsMismatch {
            expected: answers.len(),
            found: means.len(),
        });
    }
    let entries = answers
        .iter()
        .zip(means)
        .map(|(&answer, &reference_mean)| {
            let delta = answer as f64 - reference_mean;
            CompetencyEntry {
                answer,
                reference_mean,
                delta,
                band: Band::classify(answer as f64, reference_mean, norms.competency_band),
            }
        })
        .collect();
    Ok(CompetencyFitReport { entries })
}

/// Catalog key of the feedback statement for one trait and band.
pub fn trait_feedback_key(t: Trait, band: Band) -> String {
    format!("feedback.tipi.{}.{}", t.key(), band.key())
}

/// One statement per trait, in the canonical trait order.
pub fn tipi_feedback(profile: &BigFiveProfile, norms: &NormTable) -> Vec<Utterance> {
    Trait::ALL
        .iter()
        .map(|&t| {
            let score = profile.get(t);
            Utterance::new(trait_feedback_key(t, norms.trait_band(t, score)))
                .text("score", format!("{score:.1}"))
        })
        .collect()
}

pub fn make_feedback(
    profile: &BigFiveProfile,
    norms: &NormTable,
    catalogs: &Catalogs,
    locale: Locale,
) -> Result<Vec<String>, LocalizationError> {
    tipi_feedback(profile, norms)
        .iter()
        .map(|u| catalogs.render(u, locale))
        .collect()
}

/// Rounds to one decimal place, the precision scores are stored with.
pub fn round1(value: f64) -> f64 {
    (value * 10.0).round() / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gosling_key() -> TipiKey {
        TipiKey::new([
            (Trait::Extraversion, 0, 5),
            (Trait::Agreeableness, 6, 1),
            (Trait::Conscientiousness, 2, 7),
            (Trait::EmotionalStability, 8, 3),
            (Trait::Openness, 4, 9),
        ])
        .unwrap()
    }

    fn norms() -> NormTable {
        let traits = Trait::ALL
            .iter()
            .map(|&t| (t, TraitNorm { mean: 4.0, sd: 1.2 }))
            .collect();
        NormTable::new(traits, vec![3.0; COMPETENCY_ITEMS], 0.5, 0.5).unwrap()
    }

    #[test]
    fn reverse_item_examples() {
        assert_eq!(reverse_item(4, 7), Ok(4));
        assert_eq!(reverse_item(1, 7), Ok(7));
        assert_eq!(reverse_item(3, 5), Ok(3));
        assert!(matches!(reverse_item(0, 7), Err(ScoringError::Range { .. })));
        assert!(matches!(reverse_item(8, 7), Err(ScoringError::Range { .. })));
    }

    #[test]
    fn tipi_all_fours() {
        let p = score_tipi(&[4; 10], &gosling_key()).unwrap();
        assert_eq!(p, BigFiveProfile::uniform(4.0));
    }

    #[test]
    fn tipi_extraversion_maximal() {
        let mut a = [4; 10];
        a[0] = 7;
        a[5] = 1;
        let p = score_tipi(&a, &gosling_key()).unwrap();
        assert_eq!(p.extraversion, 7.0);
        assert_eq!(p.agreeableness, 4.0);
        assert_eq!(p.openness, 4.0);
    }

    #[test]
    fn tipi_agreeableness_low() {
        let mut a = [4; 10];
        a[1] = 6;
        a[6] = 2;
        let p = score_tipi(&a, &gosling_key()).unwrap();
        assert_eq!(p.agreeableness, 2.0);
        assert_eq!(p.extraversion, 4.0);
    }

    #[test]
    fn tipi_rejects_bad_input() {
        assert_eq!(
            score_tipi(&[4; 9], &gosling_key()),
            Err(ScoringError::Count { expected: 10, found: 9 })
        );
        let mut a = [4; 10];
        a[3] = 8;
        assert!(matches!(
            score_tipi(&a, &gosling_key()),
            Err(ScoringError::Range { position: 4, value: 8, .. })
        ));
    }

    #[test]
    fn tipi_key_rejects_reused_positions() {
        let err = TipiKey::new([
            (Trait::Extraversion, 0, 5),
            (Trait::Agreeableness, 0, 1),
            (Trait::Conscientiousness, 2, 7),
            (Trait::EmotionalStability, 8, 3),
            (Trait::Openness, 4, 9),
        ]);
        assert!(matches!(err, Err(ScoringError::InvalidKey(_))));
    }

    #[test]
    fn sus_examples() {
        let best = [5, 1, 5, 1, 5, 1, 5, 1, 5, 1];
        assert_eq!(score_sus(&best).unwrap().value(), 100.0);
        assert_eq!(score_sus(&[3; 10]).unwrap().value(), 50.0);
        assert_eq!(score_sus(&[5; 10]).unwrap().value(), 50.0);
        assert_eq!(score_sus(&[1, 5, 1, 5, 1, 5, 1, 5, 1, 5]).unwrap().value(), 0.0);
        assert!(matches!(score_sus(&[3; 11]), Err(ScoringError::Count { .. })));
        assert!(matches!(score_sus(&[0; 10]), Err(ScoringError::Range { .. })));
    }

    #[test]
    fn benchmark_flags() {
        assert_eq!(BenchmarkFlag::of(70.0), BenchmarkFlag::Above);
        assert_eq!(BenchmarkFlag::of(67.5), BenchmarkFlag::Below);
        assert_eq!(BenchmarkFlag::of(68.0), BenchmarkFlag::At);
    }

    #[test]
    fn competency_zero_delta_is_near() {
        let r = score_competency_fit(&[3; 26], &norms()).unwrap();
        assert_eq!(r.entries.len(), 26);
        assert!(r.entries.iter().all(|e| e.band == Band::Near && e.delta == 0.0));
    }

    #[test]
    fn competency_bands_above_and_below() {
        let mut a = [3; 26];
        a[0] = 5;
        a[1] = 1;
        let r = score_competency_fit(&a, &norms()).unwrap();
        assert_eq!(r.entries[0].delta, 2.0);
        assert_eq!(r.entries[0].band, Band::Above);
        assert_eq!(r.entries[1].delta, -2.0);
        assert_eq!(r.entries[1].band, Band::Below);
        assert_eq!(r.positions_in(Band::Above), vec![0]);
    }

    #[test]
    fn competency_errors() {
        assert!(matches!(
            score_competency_fit(&[3; 25], &norms()),
            Err(ScoringError::Count { expected: 26, found: 25 })
        ));
        let short = NormTable::new(
            Trait::ALL.iter().map(|&t| (t, TraitNorm { mean: 4.0, sd: 1.0 })).collect(),
            vec![3.0; 20],
            0.5,
            0.5,
        )
        .unwrap();
        assert!(matches!(
            score_competency_fit(&[3; 26], &short),
            Err(ScoringError::NormsMismatch { expected: 26, found: 20 })
        ));
    }

    #[test]
    fn trait_banding() {
        let n = norms();
        assert_eq!(n.trait_band(Trait::Openness, 4.0), Band::Near);
        assert_eq!(n.trait_band(Trait::Openness, 4.0 + 1.2), Band::Above);
        assert_eq!(n.trait_band(Trait::Openness, 4.0 - 1.2), Band::Below);
        // half-width boundary stays near
        assert_eq!(Band::classify(4.6, 4.0, 0.6), Band::Near);
    }

    #[test]
    fn feedback_keys_follow_bands() {
        let mut p = BigFiveProfile::uniform(4.0);
        p.extraversion = 5.5;
        let keys: Vec<_> = tipi_feedback(&p, &norms()).into_iter().map(|u| u.key).collect();
        assert_eq!(keys[0], "feedback.tipi.extraversion.above");
        assert_eq!(keys[1], "feedback.tipi.agreeableness.near");
    }

    #[test]
    fn norms_reject_non_positive_sd() {
        let traits = Trait::ALL
            .iter()
            .map(|&t| (t, TraitNorm { mean: 4.0, sd: 0.0 }))
            .collect();
        assert!(NormTable::new(traits, vec![], 0.5, 0.5).is_err());
    }
}
