//! Threshold-based intent matching with an off-topic fallback.

use std::collections::BTreeSet;

use crate::localization::Locale;

use super::Intent;

#[derive(Debug, Clone, PartialEq)]
pub enum IntentMatch<'a> {
    Matched { intent: &'a Intent, score: f64 },
    /// No intent reached the threshold; `best_score` is the top score seen.
    Fallback { best_score: f64 },
}

/// Lower-cased word tokens. Apostrophes stay inside words.
pub fn normalize(text: &str) -> BTreeSet<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '’'))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Token-set Jaccard similarity. Two empty sets score 0.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Scores every intent by its best trigger phrase and returns the top one if
/// it reaches `threshold`. With `locale = None` the phrases of all locales are
/// considered. Ties go to the intent listed first.
pub fn match_intent<'a>(
    utterance: &str,
    intents: &[&'a Intent],
    locale: Option<Locale>,
    threshold: f64,
) -> IntentMatch<'a> {
    debug_assert!((0.0..=1.0).contains(&threshold));
    let threshold = threshold.clamp(0.0, 1.0);
    let tokens = normalize(utterance);
    let mut best: Option<(&Intent, f64)> = None;
    for &intent in intents {
        let score = intent
            .triggers
            .iter()
            .filter(|(l, _)| locale.is_none_or(|want| want == **l))
            .flat_map(|(_, phrases)| phrases)
            .map(|p| jaccard(&tokens, &normalize(p)))
            .fold(0.0_f64, f64::max);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((intent, score));
        }
    }
    match best {
        Some((intent, score)) if score >= threshold && score > 0.0 => {
            IntentMatch::Matched { intent, score }
        }
        Some((_, score)) => IntentMatch::Fallback { best_score: score },
        None => IntentMatch::Fallback { best_score: 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{IntentAction, Phase};
    use std::collections::BTreeMap;

    fn intent(name: &str, en: &[&str]) -> Intent {
        let mut triggers = BTreeMap::new();
        for l in Locale::ALL {
            triggers.insert(l, vec![]);
        }
        triggers.insert(Locale::En, en.iter().map(|s| s.to_string()).collect());
        triggers.insert(Locale::Pl, vec![format!("{name} pl")]);
        Intent {
            name: name.into(),
            phase: Phase::LanguageSelect,
            action: IntentAction::Employed(true),
            triggers,
        }
    }

    #[test]
    fn exact_match_scores_one() {
        let start = intent("start", &["start"]);
        match match_intent("start", &[&start], Some(Locale::En), 0.5) {
            IntentMatch::Matched { intent, score } => {
                assert_eq!(intent.name, "start");
                assert_eq!(score, 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gibberish_falls_back() {
        let start = intent("start", &["start"]);
        let stop = intent("stop", &["stop now"]);
        assert!(matches!(
            match_intent("zzqq xkcd", &[&start, &stop], Some(Locale::En), 0.5),
            IntentMatch::Fallback { .. }
        ));
    }

    #[test]
    fn partial_overlap_is_jaccard() {
        let start = intent("start", &["start"]);
        match match_intent("please start now", &[&start], Some(Locale::En), 0.3) {
            IntentMatch::Matched { score, .. } => assert!((score - 1.0 / 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            match_intent("please start now", &[&start], Some(Locale::En), 0.45),
            IntentMatch::Fallback { .. }
        ));
    }

    #[test]
    fn locale_filter_hides_other_phrases() {
        let start = intent("start", &["start"]);
        assert!(matches!(
            match_intent("start pl", &[&start], Some(Locale::En), 0.6),
            IntentMatch::Fallback { .. }
        ));
        assert!(matches!(
            match_intent("start pl", &[&start], None, 0.6),
            IntentMatch::Matched { .. }
        ));
    }

    #[test]
    fn normalization_handles_case_punctuation_and_cyrillic() {
        let t = normalize("  Українська!  МОВА, комп'ютер ");
        let want: BTreeSet<String> = ["українська", "мова", "комп'ютер"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(t, want);
    }

    #[test]
    fn empty_sets_do_not_match() {
        assert_eq!(jaccard(&BTreeSet::new(), &BTreeSet::new()), 0.0);
        let start = intent("start", &["start"]);
        assert!(matches!(
            match_intent("!!!", &[&start], None, 0.0),
            IntentMatch::Fallback { .. }
        ));
    }
}
