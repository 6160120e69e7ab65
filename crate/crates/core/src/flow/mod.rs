//! Survey flow: the questionnaire definition, per-respondent session state and
//! the dialogue engine that moves a session forward one inbound text at a time.

mod config;
mod engine;
mod intent;

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::localization::Locale;
use crate::scoring::{NormTable, TipiKey};

pub use config::{load_flow, FlowError, Location};
pub use engine::{validate_answer, Advance, Effect, Engine, EngineError, ValidationError};
pub use intent::{jaccard, match_intent, normalize, IntentMatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Instrument {
    Tipi,
    Competency,
    Sus,
    Meta,
}

/// Predicate a question depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    /// `employed == yes`
    EmployedYes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionSpec {
    pub id: String,
    pub instrument: Instrument,
    pub scale_min: i64,
    pub scale_max: i64,
    pub text_key: String,
    /// Catalog text spelling out the valid range.
    pub hint_key: String,
    /// Optional labels for quick-reply buttons, one per scale value.
    pub option_keys: Vec<String>,
    pub gating: Option<Gate>,
}

impl QuestionSpec {
    pub fn range_len(&self) -> i64 {
        self.scale_max - self.scale_min + 1
    }
}

/// Phases in the order a session passes through them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Greeting,
    LanguageSelect,
    Tipi,
    EmploymentGate,
    Competency,
    CompetencyFeedback,
    TipiFeedback,
    Sus,
    Meta,
    Farewell,
}

impl Phase {
    pub const ORDER: [Phase; 10] = [
        Phase::Greeting,
        Phase::LanguageSelect,
        Phase::Tipi,
        Phase::EmploymentGate,
        Phase::Competency,
        Phase::CompetencyFeedback,
        Phase::TipiFeedback,
        Phase::Sus,
        Phase::Meta,
        Phase::Farewell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Greeting => "greeting",
            Phase::LanguageSelect => "language_select",
            Phase::Tipi => "tipi",
            Phase::EmploymentGate => "employment_gate",
            Phase::Competency => "competency",
            Phase::CompetencyFeedback => "competency_feedback",
            Phase::TipiFeedback => "tipi_feedback",
            Phase::Sus => "sus",
            Phase::Meta => "meta",
            Phase::Farewell => "farewell",
        }
    }

    pub fn from_name(name: &str) -> Option<Phase> {
        Phase::ORDER.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A questionnaire phase: optional intro statement plus ordered questions.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub intro_key: Option<String>,
    pub frame_key: String,
    pub questions: Vec<QuestionSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmploymentGateSpec {
    pub question: QuestionSpec,
    pub yes_value: i64,
    pub no_value: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntentAction {
    SelectLocale(Locale),
    Employed(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Intent {
    pub name: String,
    /// Phase in which the intent is consulted.
    pub phase: Phase,
    pub action: IntentAction,
    pub triggers: BTreeMap<Locale, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub intent_threshold: f64,
    pub message_delay_ms: u64,
    pub max_chunk_chars: usize,
    /// Consecutive invalid answers after which the question is shown again.
    pub repeat_question_after: u32,
}

#[derive(Debug, Clone)]
pub struct FlowDefinition {
    pub settings: Settings,
    /// Locale chosen by typing 1, 2, 3, ... at the language prompt.
    pub language_options: Vec<Locale>,
    pub tipi: Section,
    pub tipi_key: TipiKey,
    pub employment_gate: EmploymentGateSpec,
    pub competency: Section,
    pub sus: Section,
    pub meta: Section,
    pub intents: Vec<Intent>,
    pub norms: NormTable,
    /// True while the shipped norms are placeholders.
    pub norms_placeholder: bool,
}

impl FlowDefinition {
    pub fn section(&self, phase: Phase) -> Option<&Section> {
        match phase {
            Phase::Tipi => Some(&self.tipi),
            Phase::Competency => Some(&self.competency),
            Phase::Sus => Some(&self.sus),
            Phase::Meta => Some(&self.meta),
            _ => None,
        }
    }

    /// Every question in flow order, the employment gate included.
    pub fn all_questions(&self) -> impl Iterator<Item = &QuestionSpec> {
        self.tipi
            .questions
            .iter()
            .chain(std::iter::once(&self.employment_gate.question))
            .chain(&self.competency.questions)
            .chain(&self.sus.questions)
            .chain(&self.meta.questions)
    }

    pub fn question(&self, id: &str) -> Option<&QuestionSpec> {
        self.all_questions().find(|q| q.id == id)
    }

    pub fn intents_for(&self, phase: Phase) -> Vec<&Intent> {
        self.intents.iter().filter(|i| i.phase == phase).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cursor {
    pub phase: Phase,
    pub index: usize,
}

impl Cursor {
    pub fn at(phase: Phase) -> Self {
        Self { phase, index: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Employment {
    Yes,
    No,
    #[default]
    Unknown,
}

/// One respondent's conversation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: u64,
    pub external_user_id: String,
    pub locale: Option<Locale>,
    pub cursor: Cursor,
    pub answers: BTreeMap<String, i64>,
    pub employed: Employment,
    /// Last sequence number handed out; the next message gets `outbound_seq + 1`.
    pub outbound_seq: u64,
    /// Consecutive invalid answers at the current cursor.
    pub failures: u32,
    pub finalized: bool,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl Session {
    pub fn new(session_id: u64, external_user_id: impl Into<String>, now: DateTime<Utc>) -> Self {
        Self {
            session_id,
            external_user_id: external_user_id.into(),
            locale: None,
            cursor: Cursor::at(Phase::Greeting),
            answers: BTreeMap::new(),
            employed: Employment::Unknown,
            outbound_seq: 0,
            failures: 0,
            finalized: false,
            created_at: now,
            updated_at: now,
        }
    }
}
