//! Loading and validating the flow definition document (TOML).

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::localization::{Catalogs, Locale};
use crate::scoring::{
    Band, NormTable, TipiKey, Trait, TraitNorm, COMPETENCY_ITEMS, COMPETENCY_SCALE_MAX,
    SUS_ITEMS, SUS_SCALE_MAX, TIPI_ITEMS, TIPI_SCALE_MAX,
};

use super::{
    EmploymentGateSpec, FlowDefinition, Gate, Instrument, Intent, IntentAction, Phase,
    QuestionSpec, Section, Settings,
};

/// Catalog keys the engine emits regardless of the questionnaire content.
const ENGINE_KEYS: &[&str] = &[
    "greeting.trilingual",
    "language.prompt.trilingual",
    "language.reprompt.trilingual",
    "language.confirmed",
    "validation.reprompt",
    "fallback.repeat",
    "survey.complete",
    "farewell.thanks",
    "frame.plain",
    "feedback.tipi.intro",
    "feedback.competency.intro",
    "feedback.competency.above",
    "feedback.competency.near",
    "feedback.competency.below",
];

/// Line and column (both 1-based) inside the flow document, when known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location(pub Option<(usize, usize)>);

impl Location {
    fn from_offset(doc: &str, offset: usize) -> Self {
        let mut end = offset.min(doc.len());
        while !doc.is_char_boundary(end) {
            end -= 1;
        }
        let before = &doc[..end];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
        Location(Some((line, column)))
    }

    pub fn line(&self) -> Option<usize> {
        self.0.map(|(l, _)| l)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some((line, column)) => write!(f, " at line {line}, column {column}"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("schema error{at}: {message}")]
    Schema { at: Location, message: String },
    #[error("missing translation{at}: no {locale} text for {key:?}")]
    MissingTranslation {
        at: Location,
        locale: Locale,
        key: String,
    },
    #[error("bad count{at}: section {section} needs {expected} questions, found {found}")]
    BadCount {
        at: Location,
        section: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowDoc {
    #[serde(default)]
    settings: SettingsDoc,
    language_select: LanguageSelectDoc,
    tipi: SectionDoc,
    employment_gate: Spanned<GateDoc>,
    competency: SectionDoc,
    sus: SectionDoc,
    #[serde(default)]
    meta: Option<SectionDoc>,
    #[serde(default)]
    intents: Vec<Spanned<IntentDoc>>,
    norms: NormsDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SettingsDoc {
    intent_threshold: f64,
    message_delay_ms: u64,
    max_chunk_chars: usize,
    repeat_question_after: u32,
}

impl Default for SettingsDoc {
    fn default() -> Self {
        Self {
            intent_threshold: 0.45,
            message_delay_ms: 800,
            max_chunk_chars: 400,
            repeat_question_after: 3,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LanguageSelectDoc {
    options: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionDoc {
    intro_key: Option<String>,
    frame_key: Option<String>,
    hint_key: Option<String>,
    scale_min: Option<i64>,
    scale_max: Option<i64>,
    gating: Option<String>,
    #[serde(default)]
    questions: Vec<Spanned<QuestionDoc>>,
    scoring: Option<BTreeMap<String, ScoringPairDoc>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuestionDoc {
    id: String,
    text_key: String,
    hint_key: Option<String>,
    scale_min: Option<i64>,
    scale_max: Option<i64>,
    #[serde(default)]
    option_keys: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoringPairDoc {
    direct: String,
    reversed: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDoc {
    id: String,
    text_key: String,
    hint_key: String,
    #[serde(default)]
    option_keys: Vec<String>,
    yes_value: i64,
    no_value: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntentDoc {
    name: String,
    phase: String,
    action: String,
    triggers: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormsDoc {
    #[serde(default)]
    placeholder: bool,
    #[serde(default = "half")]
    trait_band_sd: f64,
    #[serde(default = "half")]
    competency_band: f64,
    traits: BTreeMap<String, TraitNorm>,
    competency: CompetencyNormsDoc,
}

fn half() -> f64 {
    0.5
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompetencyNormsDoc {
    means: Vec<f64>,
}

struct Loader<'a> {
    doc: &'a str,
    catalogs: &'a Catalogs,
    seen_ids: HashSet<String>,
}

impl Loader<'_> {
    fn at<T>(&self, spanned: &Spanned<T>) -> Location {
        Location::from_offset(self.doc, spanned.span().start)
    }

    fn schema(at: Location, message: impl Into<String>) -> FlowError {
        FlowError::Schema {
            at,
            message: message.into(),
        }
    }

    fn require_key(&self, key: &str, at: Location) -> Result<(), FlowError> {
        for locale in Locale::ALL {
            let present = self
                .catalogs
                .catalog(locale)
                .get(key)
                .is_some_and(|v| !v.trim().is_empty());
            if !present {
                return Err(FlowError::MissingTranslation {
                    at,
                    locale,
                    key: key.to_string(),
                });
            }
        }
        Ok(())
    }

    fn check_hint(&self, q: &QuestionSpec, at: Location) -> Result<(), FlowError> {
        self.require_key(&q.hint_key, at)?;
        for locale in Locale::ALL {
            let text = self.catalogs.catalog(locale).get(&q.hint_key).unwrap_or("");
            for bound in [q.scale_min, q.scale_max] {
                if !text.contains(&bound.to_string()) {
                    return Err(Self::schema(
                        at,
                        format!(
                            "{locale} hint {:?} for question {} does not mention {bound}",
                            q.hint_key, q.id
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn question(
        &mut self,
        raw: &Spanned<QuestionDoc>,
        instrument: Instrument,
        section_hint: Option<&str>,
        section_scale: (Option<i64>, Option<i64>),
        fixed_scale: Option<(i64, i64)>,
        gating: Option<Gate>,
    ) -> Result<QuestionSpec, FlowError> {
        let at = self.at(raw);
        let q = raw.get_ref();
        if q.id.trim().is_empty() {
            return Err(Self::schema(at, "question id must not be empty"));
        }
        if !self.seen_ids.insert(q.id.clone()) {
            return Err(Self::schema(at, format!("duplicate question id {:?}", q.id)));
        }
        let scale_min = q.scale_min.or(section_scale.0);
        let scale_max = q.scale_max.or(section_scale.1);
        let (Some(scale_min), Some(scale_max)) = (scale_min, scale_max) else {
            return Err(Self::schema(at, format!("question {} has no scale", q.id)));
        };
        let hint_key = q
            .hint_key
            .as_deref()
            .or(section_hint)
            .ok_or_else(|| Self::schema(at, format!("question {} has no hint_key", q.id)))?;
        let spec = QuestionSpec {
            id: q.id.clone(),
            instrument,
            scale_min,
            scale_max,
            text_key: q.text_key.clone(),
            hint_key: hint_key.to_string(),
            option_keys: q.option_keys.clone(),
            gating,
        };
        self.check_question(&spec, fixed_scale, at)?;
        Ok(spec)
    }

    fn check_question(
        &self,
        q: &QuestionSpec,
        fixed_scale: Option<(i64, i64)>,
        at: Location,
    ) -> Result<(), FlowError> {
        if !(q.scale_min >= 1 && q.scale_min < q.scale_max && q.scale_max <= 7) {
            return Err(Self::schema(
                at,
                format!(
                    "question {} scale {}..{} must satisfy 1 <= min < max <= 7",
                    q.id, q.scale_min, q.scale_max
                ),
            ));
        }
        if let Some((min, max)) = fixed_scale {
            if (q.scale_min, q.scale_max) != (min, max) {
                return Err(Self::schema(
                    at,
                    format!("{:?} question {} must use the {min}..{max} scale", q.instrument, q.id),
                ));
            }
        }
        if !q.option_keys.is_empty() && q.option_keys.len() as i64 != q.range_len() {
            return Err(Self::schema(
                at,
                format!(
                    "question {} lists {} option labels for {} scale values",
                    q.id,
                    q.option_keys.len(),
                    q.range_len()
                ),
            ));
        }
        self.require_key(&q.text_key, at)?;
        for key in &q.option_keys {
            self.require_key(key, at)?;
        }
        self.check_hint(q, at)
    }

    fn section(
        &mut self,
        name: &str,
        doc: &SectionDoc,
        instrument: Instrument,
        expected: Option<usize>,
        fixed_scale: Option<(i64, i64)>,
    ) -> Result<Section, FlowError> {
        let gating = match doc.gating.as_deref().map(str::trim) {
            None => None,
            Some("employed == yes") if instrument == Instrument::Competency => Some(Gate::EmployedYes),
            Some(other) => {
                return Err(Self::schema(
                    Location::default(),
                    format!("section {name}: unsupported gating predicate {other:?}"),
                ))
            }
        };
        if doc.scoring.is_some() && instrument != Instrument::Tipi {
            return Err(Self::schema(
                Location::default(),
                format!("section {name}: only tipi carries a scoring key"),
            ));
        }
        if let Some(expected) = expected {
            if doc.questions.len() != expected {
                let at = doc.questions.last().map(|q| self.at(q)).unwrap_or_default();
                return Err(FlowError::BadCount {
                    at,
                    section: name.to_string(),
                    expected,
                    found: doc.questions.len(),
                });
            }
        }
        let frame_key = doc.frame_key.clone().unwrap_or_else(|| "frame.plain".into());
        self.require_key(&frame_key, Location::default())?;
        if let Some(intro) = &doc.intro_key {
            self.require_key(intro, Location::default())?;
        }
        let mut questions = Vec::with_capacity(doc.questions.len());
        for raw in &doc.questions {
            questions.push(self.question(
                raw,
                instrument,
                doc.hint_key.as_deref(),
                (doc.scale_min, doc.scale_max),
                fixed_scale,
                gating,
            )?);
        }
        Ok(Section {
            intro_key: doc.intro_key.clone(),
            frame_key,
            questions,
        })
    }

    fn tipi_key(&self, doc: &SectionDoc, tipi: &Section) -> Result<TipiKey, FlowError> {
        let scoring = doc
            .scoring
            .as_ref()
            .ok_or_else(|| Self::schema(Location::default(), "tipi.scoring is required"))?;
        let position = |id: &str| {
            tipi.questions.iter().position(|q| q.id == id).ok_or_else(|| {
                Self::schema(
                    Location::default(),
                    format!("tipi.scoring refers to unknown question {id:?}"),
                )
            })
        };
        for name in scoring.keys() {
            if Trait::from_key(name).is_none() {
                return Err(Self::schema(
                    Location::default(),
                    format!("tipi.scoring: unknown trait {name:?}"),
                ));
            }
        }
        let mut items = Vec::with_capacity(5);
        for t in Trait::ALL {
            let pair = scoring.get(t.key()).ok_or_else(|| {
                Self::schema(Location::default(), format!("tipi.scoring lacks {}", t.key()))
            })?;
            items.push((t, position(&pair.direct)?, position(&pair.reversed)?));
        }
        let items: [(Trait, usize, usize); 5] = items.try_into().expect("five traits");
        TipiKey::new(items).map_err(|e| Self::schema(Location::default(), e.to_string()))
    }

    fn gate(&mut self, raw: &Spanned<GateDoc>) -> Result<EmploymentGateSpec, FlowError> {
        let at = self.at(raw);
        let g = raw.get_ref();
        if g.yes_value == g.no_value {
            return Err(Self::schema(at, "employment_gate: yes_value and no_value must differ"));
        }
        if !self.seen_ids.insert(g.id.clone()) {
            return Err(Self::schema(at, format!("duplicate question id {:?}", g.id)));
        }
        let question = QuestionSpec {
            id: g.id.clone(),
            instrument: Instrument::Meta,
            scale_min: g.yes_value.min(g.no_value),
            scale_max: g.yes_value.max(g.no_value),
            text_key: g.text_key.clone(),
            hint_key: g.hint_key.clone(),
            option_keys: g.option_keys.clone(),
            gating: None,
        };
        self.check_question(&question, None, at)?;
        if question.range_len() != 2 {
            return Err(Self::schema(at, "employment_gate values must be adjacent integers"));
        }
        Ok(EmploymentGateSpec {
            question,
            yes_value: g.yes_value,
            no_value: g.no_value,
        })
    }

    fn intent(&self, raw: &Spanned<IntentDoc>) -> Result<Intent, FlowError> {
        let at = self.at(raw);
        let doc = raw.get_ref();
        let phase = match Phase::from_name(&doc.phase) {
            Some(p @ (Phase::LanguageSelect | Phase::EmploymentGate)) => p,
            _ => {
                return Err(Self::schema(
                    at,
                    format!("intent {}: phase {:?} takes no intents", doc.name, doc.phase),
                ))
            }
        };
        let action = match doc.action.split_once(':') {
            Some(("locale", code)) => code
                .parse()
                .map(IntentAction::SelectLocale)
                .map_err(|e| Self::schema(at, format!("intent {}: {e}", doc.name)))?,
            Some(("employed", "yes")) => IntentAction::Employed(true),
            Some(("employed", "no")) => IntentAction::Employed(false),
            _ => {
                return Err(Self::schema(
                    at,
                    format!("intent {}: unknown action {:?}", doc.name, doc.action),
                ))
            }
        };
        let consistent = matches!(
            (phase, action),
            (Phase::LanguageSelect, IntentAction::SelectLocale(_))
                | (Phase::EmploymentGate, IntentAction::Employed(_))
        );
        if !consistent {
            return Err(Self::schema(
                at,
                format!("intent {}: action {:?} does not fit phase {phase}", doc.name, doc.action),
            ));
        }
        let mut triggers = BTreeMap::new();
        for (code, phrases) in &doc.triggers {
            let locale: Locale = code
                .parse()
                .map_err(|e| Self::schema(at, format!("intent {}: {e}", doc.name)))?;
            triggers.insert(locale, phrases.clone());
        }
        for locale in Locale::ALL {
            let usable = triggers
                .get(&locale)
                .is_some_and(|ps| ps.iter().any(|p| !super::normalize(p).is_empty()));
            if !usable {
                return Err(FlowError::MissingTranslation {
                    at,
                    locale,
                    key: format!("intents.{}.triggers", doc.name),
                });
            }
        }
        Ok(Intent {
            name: doc.name.clone(),
            phase,
            action,
            triggers,
        })
    }
}

/// Parses and validates a flow document against the loaded catalogs.
pub fn load_flow(doc: &str, catalogs: &Catalogs) -> Result<FlowDefinition, FlowError> {
    let parsed: FlowDoc = toml::from_str(doc).map_err(|e| FlowError::Schema {
        at: e
            .span()
            .map(|s| Location::from_offset(doc, s.start))
            .unwrap_or_default(),
        message: e.message().to_string(),
    })?;

    if let Some(first) = catalogs.validate().into_iter().next() {
        return Err(FlowError::MissingTranslation {
            at: Location::default(),
            locale: first.locale,
            key: first.key,
        });
    }

    let mut loader = Loader {
        doc,
        catalogs,
        seen_ids: HashSet::new(),
    };
    for key in ENGINE_KEYS {
        loader.require_key(key, Location::default())?;
    }
    for t in Trait::ALL {
        for band in [Band::Below, Band::Near, Band::Above] {
            loader.require_key(&crate::scoring::trait_feedback_key(t, band), Location::default())?;
        }
    }

    let s = &parsed.settings;
    if !(0.0..=1.0).contains(&s.intent_threshold) {
        return Err(Loader::schema(Location::default(), "settings.intent_threshold must lie in [0, 1]"));
    }
    if s.max_chunk_chars < 20 {
        return Err(Loader::schema(Location::default(), "settings.max_chunk_chars must be at least 20"));
    }
    if s.repeat_question_after == 0 {
        return Err(Loader::schema(Location::default(), "settings.repeat_question_after must be positive"));
    }
    let settings = Settings {
        intent_threshold: s.intent_threshold,
        message_delay_ms: s.message_delay_ms,
        max_chunk_chars: s.max_chunk_chars,
        repeat_question_after: s.repeat_question_after,
    };

    let mut language_options = Vec::new();
    for code in &parsed.language_select.options {
        let locale: Locale = code
            .parse()
            .map_err(|e| Loader::schema(Location::default(), format!("language_select: {e}")))?;
        if language_options.contains(&locale) {
            return Err(Loader::schema(Location::default(), format!("language_select lists {locale} twice")));
        }
        loader.require_key(&format!("option.lang.{locale}"), Location::default())?;
        language_options.push(locale);
    }
    if language_options.is_empty() {
        return Err(Loader::schema(Location::default(), "language_select.options is empty"));
    }

    let tipi = loader.section(
        "tipi",
        &parsed.tipi,
        Instrument::Tipi,
        Some(TIPI_ITEMS),
        Some((1, TIPI_SCALE_MAX)),
    )?;
    let tipi_key = loader.tipi_key(&parsed.tipi, &tipi)?;
    let employment_gate = loader.gate(&parsed.employment_gate)?;
    let competency = loader.section(
        "competency",
        &parsed.competency,
        Instrument::Competency,
        Some(COMPETENCY_ITEMS),
        Some((1, COMPETENCY_SCALE_MAX)),
    )?;
    if competency.questions.iter().any(|q| q.gating != Some(Gate::EmployedYes)) {
        return Err(Loader::schema(
            Location::default(),
            "competency questions must be gated on \"employed == yes\"",
        ));
    }
    let sus = loader.section(
        "sus",
        &parsed.sus,
        Instrument::Sus,
        Some(SUS_ITEMS),
        Some((1, SUS_SCALE_MAX)),
    )?;
    let meta = match &parsed.meta {
        Some(doc) => loader.section("meta", doc, Instrument::Meta, None, None)?,
        None => Section {
            intro_key: None,
            frame_key: "frame.plain".into(),
            questions: Vec::new(),
        },
    };

    let intents = parsed
        .intents
        .iter()
        .map(|raw| loader.intent(raw))
        .collect::<Result<Vec<_>, _>>()?;

    let n = &parsed.norms;
    let mut traits = BTreeMap::new();
    for (name, norm) in &n.traits {
        let t = Trait::from_key(name).ok_or_else(|| {
            Loader::schema(Location::default(), format!("norms.traits: unknown trait {name:?}"))
        })?;
        traits.insert(t, *norm);
    }
    if n.competency.means.len() != competency.questions.len() {
        return Err(Loader::schema(
            Location::default(),
            format!(
                "norms.competency.means has {} values for {} competency questions",
                n.competency.means.len(),
                competency.questions.len()
            ),
        ));
    }
    let norms = NormTable::new(traits, n.competency.means.clone(), n.trait_band_sd, n.competency_band)
        .map_err(|e| Loader::schema(Location::default(), e.to_string()))?;

    Ok(FlowDefinition {
        settings,
        language_options,
        tipi,
        tipi_key,
        employment_gate,
        competency,
        sus,
        meta,
        intents,
        norms,
        norms_placeholder: n.placeholder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{DEFAULT_CATALOG_EN, DEFAULT_CATALOG_PL, DEFAULT_CATALOG_UK, DEFAULT_FLOW};

    fn default_catalogs() -> Catalogs {
        Catalogs::parse(DEFAULT_CATALOG_PL, DEFAULT_CATALOG_UK, DEFAULT_CATALOG_EN).unwrap()
    }

    #[test]
    fn default_flow_has_expected_counts() {
        let flow = load_flow(DEFAULT_FLOW, &default_catalogs()).unwrap();
        assert_eq!(flow.tipi.questions.len(), 10);
        assert_eq!(flow.competency.questions.len(), 26);
        assert_eq!(flow.sus.questions.len(), 10);
        assert!(flow.tipi.questions.iter().all(|q| (q.scale_min, q.scale_max) == (1, 7)));
        assert!(flow.sus.questions.iter().all(|q| (q.scale_min, q.scale_max) == (1, 5)));
        assert!(flow.competency.questions.iter().all(|q| (q.scale_min, q.scale_max) == (1, 5)));
        assert_eq!(flow.settings.intent_threshold, 0.45);
        assert_eq!(flow.settings.message_delay_ms, 800);
        assert!(flow.norms_placeholder);
    }

    #[test]
    fn missing_ukrainian_text_is_reported() {
        let uk: String = DEFAULT_CATALOG_UK
            .lines()
            .filter(|l| !l.starts_with("tipi.q3 "))
            .collect::<Vec<_>>()
            .join("\n");
        let catalogs = Catalogs::parse(DEFAULT_CATALOG_PL, &uk, DEFAULT_CATALOG_EN).unwrap();
        let err = load_flow(DEFAULT_FLOW, &catalogs).unwrap_err();
        assert_eq!(
            err,
            FlowError::MissingTranslation {
                at: Location::default(),
                locale: Locale::Uk,
                key: "tipi.q3".into()
            }
        );
    }

    #[test]
    fn twenty_five_competencies_is_a_bad_count() {
        let doc = DEFAULT_FLOW.replace(
            "[[competency.questions]]\nid = \"competency_26\"\ntext_key = \"competency.c26\"\n",
            "",
        );
        assert_ne!(doc, DEFAULT_FLOW);
        let err = load_flow(&doc, &default_catalogs()).unwrap_err();
        match err {
            FlowError::BadCount {
                at,
                section,
                expected,
                found,
            } => {
                assert_eq!((section.as_str(), expected, found), ("competency", 26, 25));
                assert!(at.line().is_some());
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn toml_errors_carry_a_position() {
        let doc = DEFAULT_FLOW.replacen("intent_threshold = 0.45", "intent_threshold = ", 1);
        let err = load_flow(&doc, &default_catalogs()).unwrap_err();
        match err {
            FlowError::Schema { at, .. } => assert_eq!(at.line(), Some(5)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_fields_are_schema_errors() {
        let doc = DEFAULT_FLOW.replacen("[settings]\n", "[settings]\nbogus = 1\n", 1);
        assert!(matches!(
            load_flow(&doc, &default_catalogs()),
            Err(FlowError::Schema { .. })
        ));
    }

    #[test]
    fn tipi_scale_must_be_one_to_seven() {
        let doc = DEFAULT_FLOW.replacen(
            "hint_key = \"scale.tipi\"\nscale_min = 1\nscale_max = 7",
            "hint_key = \"scale.tipi\"\nscale_min = 1\nscale_max = 5",
            1,
        );
        let err = load_flow(&doc, &default_catalogs()).unwrap_err();
        assert!(matches!(err, FlowError::Schema { .. }), "{err}");
        assert!(err.to_string().contains("1..7"));
    }

    #[test]
    fn duplicate_question_ids_are_rejected() {
        let doc = DEFAULT_FLOW.replacen("id = \"sus_2\"", "id = \"sus_1\"", 1);
        let err = load_flow(&doc, &default_catalogs()).unwrap_err();
        assert!(err.to_string().contains("duplicate question id"), "{err}");
        assert!(matches!(err, FlowError::Schema { at: Location(Some(_)), .. }));
    }

    #[test]
    fn intents_need_triggers_in_every_locale() {
        let doc = DEFAULT_FLOW.replacen("triggers.en = [\"polish\"]\n", "", 1);
        let err = load_flow(&doc, &default_catalogs()).unwrap_err();
        assert!(matches!(
            err,
            FlowError::MissingTranslation { locale: Locale::En, .. }
        ));
    }

    #[test]
    fn threshold_outside_unit_interval_is_rejected() {
        let doc = DEFAULT_FLOW.replacen("intent_threshold = 0.45", "intent_threshold = 1.5", 1);
        assert!(load_flow(&doc, &default_catalogs()).is_err());
    }
}
