//! The dialogue engine. Pure: a session and an inbound text go in, the next
//! session state, the outbound batch and the side effects to persist come out.

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::localization::{Catalogs, Locale, LocalizationError, Utterance};
use crate::message::{split_chunks, MessageKind, OutboundMessage, QuickReply};
use crate::scoring::{
    score_competency_fit, score_sus, score_tipi, tipi_feedback, Band, BigFiveProfile,
    ScoringError, SusScore,
};
use crate::Bundle;

use super::{
    match_intent, Cursor, Employment, FlowDefinition, Gate, IntentAction, IntentMatch, Phase,
    QuestionSpec, Section, Session,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("not a whole number")]
    NonNumeric,
    #[error("outside {min}..={max}")]
    OutOfRange { min: i64, max: i64 },
}

/// Parses a scale answer. Surrounding whitespace is ignored.
pub fn validate_answer(text: &str, question: &QuestionSpec) -> Result<i64, ValidationError> {
    let value: i64 = text.trim().parse().map_err(|_| ValidationError::NonNumeric)?;
    if (question.scale_min..=question.scale_max).contains(&value) {
        Ok(value)
    } else {
        Err(ValidationError::OutOfRange {
            min: question.scale_min,
            max: question.scale_max,
        })
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("answer to {0} is already recorded")]
    AnswerAlreadyRecorded(String),
    #[error("session cursor {0:?} is not a resting state")]
    InvalidCursor(Cursor),
}

/// Something the caller must persist.
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    LocaleSelected(Locale),
    Answer { question_id: String, value: i64 },
    Employment(bool),
    TipiScored(BigFiveProfile),
    SusScored(SusScore),
    Finalized,
}

#[derive(Debug, Clone)]
pub struct Advance {
    pub session: Session,
    pub messages: Vec<OutboundMessage>,
    pub effects: Vec<Effect>,
}

struct Pending {
    utterance: Utterance,
    text: String,
    kind: MessageKind,
    quick_replies: Vec<QuickReply>,
}

struct Turn<'s> {
    session: &'s mut Session,
    pending: Vec<Pending>,
    effects: Vec<Effect>,
}

pub struct Engine {
    flow: FlowDefinition,
    catalogs: Catalogs,
}

impl Engine {
    pub fn new(bundle: Bundle) -> Self {
        Self {
            flow: bundle.flow,
            catalogs: bundle.catalogs,
        }
    }

    pub fn flow(&self) -> &FlowDefinition {
        &self.flow
    }

    pub fn catalogs(&self) -> &Catalogs {
        &self.catalogs
    }

    pub fn new_session(&self, session_id: u64, user: &str, now: DateTime<Utc>) -> Session {
        Session::new(session_id, user, now)
    }

    /// Renders an utterance in any locale, e.g. to compare a sent message
    /// with its counterparts in the other languages.
    pub fn render(&self, utterance: &Utterance, locale: Locale) -> Result<String, EngineError> {
        Ok(self.catalogs.render(utterance, locale)?)
    }

    pub fn advance(&self, session: &Session, text: &str) -> Result<Advance, EngineError> {
        self.advance_at(session, text, Utc::now())
    }

    pub fn advance_at(
        &self,
        session: &Session,
        text: &str,
        now: DateTime<Utc>,
    ) -> Result<Advance, EngineError> {
        let mut next = session.clone();
        next.updated_at = now;
        let mut turn = Turn {
            session: &mut next,
            pending: Vec::new(),
            effects: Vec::new(),
        };
        if turn.session.finalized {
            self.statement(&mut turn, Utterance::new("survey.complete"))?;
        } else {
            match turn.session.cursor.phase {
                Phase::Greeting => {
                    self.statement(&mut turn, Utterance::new("greeting.trilingual"))?;
                    turn.session.cursor = Cursor::at(Phase::LanguageSelect);
                    self.ask_language(&mut turn, "language.prompt.trilingual")?;
                }
                Phase::LanguageSelect => self.on_language(&mut turn, text)?,
                Phase::EmploymentGate => self.on_gate(&mut turn, text)?,
                Phase::Tipi | Phase::Competency | Phase::Sus | Phase::Meta => {
                    self.on_scale(&mut turn, text)?
                }
                _ => return Err(EngineError::InvalidCursor(turn.session.cursor)),
            }
        }
        let Turn {
            pending, effects, ..
        } = turn;
        let messages = self.number(&mut next, pending);
        Ok(Advance {
            session: next,
            messages,
            effects,
        })
    }

    fn locale(session: &Session) -> Locale {
        session.locale.unwrap_or(Locale::En)
    }

    fn push(
        &self,
        turn: &mut Turn<'_>,
        utterance: Utterance,
        kind: MessageKind,
        quick_replies: Vec<QuickReply>,
    ) -> Result<(), EngineError> {
        debug_assert!(
            turn.pending.last().is_none_or(|p| p.kind == MessageKind::Statement),
            "a question must close its batch"
        );
        let text = self.catalogs.render(&utterance, Self::locale(turn.session))?;
        turn.pending.push(Pending {
            utterance,
            text,
            kind,
            quick_replies,
        });
        Ok(())
    }

    fn statement(&self, turn: &mut Turn<'_>, utterance: Utterance) -> Result<(), EngineError> {
        self.push(turn, utterance, MessageKind::Statement, Vec::new())
    }

    fn quick_replies(&self, session: &Session, q: &QuestionSpec) -> Result<Vec<QuickReply>, EngineError> {
        let locale = Self::locale(session);
        (q.scale_min..=q.scale_max)
            .enumerate()
            .map(|(i, payload)| {
                let label = match q.option_keys.get(i) {
                    Some(key) => self.catalogs.resolve(key, locale)?.to_string(),
                    None => payload.to_string(),
                };
                Ok(QuickReply { label, payload })
            })
            .collect()
    }

    fn question_utterance(&self, section: Option<&Section>, q: &QuestionSpec) -> Utterance {
        let frame = section.map_or("frame.plain", |s| s.frame_key.as_str());
        let mut u = Utterance::new(frame)
            .key_arg("text", q.text_key.clone())
            .key_arg("hint", q.hint_key.clone());
        if let Some(section) = section {
            let n = section.questions.iter().position(|x| x.id == q.id).unwrap_or(0) + 1;
            u = u.text("n", n).text("total", section.questions.len());
        }
        u
    }

    fn ask(&self, turn: &mut Turn<'_>, section: Option<&Section>, q: &QuestionSpec) -> Result<(), EngineError> {
        let replies = self.quick_replies(turn.session, q)?;
        self.push(turn, self.question_utterance(section, q), MessageKind::Question, replies)
    }

    fn ask_language(&self, turn: &mut Turn<'_>, key: &str) -> Result<(), EngineError> {
        let replies = self
            .flow
            .language_options
            .iter()
            .enumerate()
            .map(|(i, l)| {
                Ok(QuickReply {
                    label: self.catalogs.resolve(&format!("option.lang.{l}"), *l)?.to_string(),
                    payload: i as i64 + 1,
                })
            })
            .collect::<Result<Vec<_>, EngineError>>()?;
        self.push(turn, Utterance::new(key), MessageKind::Question, replies)
    }

    fn reprompt_utterance(q: &QuestionSpec) -> Utterance {
        Utterance::new("validation.reprompt")
            .text("count", q.range_len())
            .text("min", q.scale_min)
            .text("max", q.scale_max)
    }

    /// Invalid answer: a short reprompt, or the full question again once the
    /// respondent has failed `repeat_question_after` times in a row.
    fn invalid(
        &self,
        turn: &mut Turn<'_>,
        section: Option<&Section>,
        q: &QuestionSpec,
    ) -> Result<(), EngineError> {
        turn.session.failures += 1;
        if turn.session.failures >= self.flow.settings.repeat_question_after {
            turn.session.failures = 0;
            self.statement(turn, Self::reprompt_utterance(q))?;
            self.ask(turn, section, q)
        } else {
            let replies = self.quick_replies(turn.session, q)?;
            self.push(turn, Self::reprompt_utterance(q), MessageKind::Question, replies)
        }
    }

    fn on_language(&self, turn: &mut Turn<'_>, text: &str) -> Result<(), EngineError> {
        let options = &self.flow.language_options;
        let by_number = text
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| (1..=options.len()).contains(n))
            .map(|n| options[n - 1]);
        let chosen = by_number.or_else(|| {
            let intents = self.flow.intents_for(Phase::LanguageSelect);
            match match_intent(text, &intents, None, self.flow.settings.intent_threshold) {
                IntentMatch::Matched { intent, .. } => match intent.action {
                    IntentAction::SelectLocale(l) => Some(l),
                    IntentAction::Employed(_) => None,
                },
                IntentMatch::Fallback { .. } => None,
            }
        });
        match chosen {
            Some(locale) => {
                turn.session.locale = Some(locale);
                turn.session.failures = 0;
                turn.effects.push(Effect::LocaleSelected(locale));
                self.statement(turn, Utterance::new("language.confirmed"))?;
                self.enter(turn, Phase::Tipi)
            }
            None => {
                turn.session.failures += 1;
                self.ask_language(turn, "language.reprompt.trilingual")
            }
        }
    }

    fn on_gate(&self, turn: &mut Turn<'_>, text: &str) -> Result<(), EngineError> {
        let gate = &self.flow.employment_gate;
        let q = &gate.question;
        let employed = match validate_answer(text, q) {
            Ok(v) => Some(v == gate.yes_value),
            Err(ValidationError::OutOfRange { .. }) => return self.invalid(turn, None, q),
            Err(ValidationError::NonNumeric) => {
                let intents = self.flow.intents_for(Phase::EmploymentGate);
                let locale = turn.session.locale;
                match match_intent(text, &intents, locale, self.flow.settings.intent_threshold) {
                    IntentMatch::Matched { intent, .. } => match intent.action {
                        IntentAction::Employed(b) => Some(b),
                        IntentAction::SelectLocale(_) => None,
                    },
                    IntentMatch::Fallback { .. } => None,
                }
            }
        };
        let Some(employed) = employed else {
            self.statement(turn, Utterance::new("fallback.repeat"))?;
            return self.invalid(turn, None, q);
        };
        let value = if employed { gate.yes_value } else { gate.no_value };
        self.record(turn, q, value)?;
        turn.session.employed = if employed { Employment::Yes } else { Employment::No };
        turn.effects.push(Effect::Employment(employed));
        self.enter(turn, Phase::Competency)
    }

    fn record(&self, turn: &mut Turn<'_>, q: &QuestionSpec, value: i64) -> Result<(), EngineError> {
        if turn.session.answers.contains_key(&q.id) {
            return Err(EngineError::AnswerAlreadyRecorded(q.id.clone()));
        }
        turn.session.answers.insert(q.id.clone(), value);
        turn.session.failures = 0;
        turn.effects.push(Effect::Answer {
            question_id: q.id.clone(),
            value,
        });
        Ok(())
    }

    fn on_scale(&self, turn: &mut Turn<'_>, text: &str) -> Result<(), EngineError> {
        let cursor = turn.session.cursor;
        let section = self
            .flow
            .section(cursor.phase)
            .filter(|s| cursor.index < s.questions.len())
            .ok_or(EngineError::InvalidCursor(cursor))?;
        let q = &section.questions[cursor.index];
        let value = match validate_answer(text, q) {
            Ok(v) => v,
            Err(_) => return self.invalid(turn, Some(section), q),
        };
        self.record(turn, q, value)?;
        match self.next_open(turn.session, section, cursor.index + 1) {
            Some(index) => {
                turn.session.cursor = Cursor {
                    phase: cursor.phase,
                    index,
                };
                self.ask(turn, Some(section), &section.questions[index])
            }
            None => {
                match cursor.phase {
                    Phase::Tipi => {
                        let profile = self.tipi_profile(turn.session)?;
                        turn.effects.push(Effect::TipiScored(profile));
                    }
                    Phase::Sus => {
                        let answers = self.answers_of(turn.session, &self.flow.sus)?;
                        turn.effects.push(Effect::SusScored(score_sus(&answers)?));
                    }
                    _ => {}
                }
                self.enter(turn, following(cursor.phase))
            }
        }
    }

    fn gate_open(session: &Session, gate: Option<Gate>) -> bool {
        match gate {
            None => true,
            Some(Gate::EmployedYes) => session.employed == Employment::Yes,
        }
    }

    fn next_open(&self, session: &Session, section: &Section, from: usize) -> Option<usize> {
        (from..section.questions.len()).find(|&i| Self::gate_open(session, section.questions[i].gating))
    }

    fn answers_of(&self, session: &Session, section: &Section) -> Result<Vec<i64>, EngineError> {
        section
            .questions
            .iter()
            .map(|q| {
                session.answers.get(&q.id).copied().ok_or(EngineError::Scoring(
                    ScoringError::Count {
                        expected: section.questions.len(),
                        found: session.answers.len(),
                    },
                ))
            })
            .collect()
    }

    fn tipi_profile(&self, session: &Session) -> Result<BigFiveProfile, EngineError> {
        let answers = self.answers_of(session, &self.flow.tipi)?;
        Ok(score_tipi(&answers, &self.flow.tipi_key)?)
    }

    /// Moves the cursor into `phase`, emitting everything that phase says on
    /// entry, and keeps going until a question is asked or the survey ends.
    fn enter(&self, turn: &mut Turn<'_>, phase: Phase) -> Result<(), EngineError> {
        let mut phase = phase;
        loop {
            match phase {
                Phase::Tipi | Phase::Competency | Phase::Sus | Phase::Meta => {
                    let section = self.flow.section(phase).expect("questionnaire phase");
                    if let Some(index) = self.next_open(turn.session, section, 0) {
                        if let Some(intro) = &section.intro_key {
                            self.statement(turn, Utterance::new(intro.clone()))?;
                        }
                        turn.session.cursor = Cursor { phase, index };
                        return self.ask(turn, Some(section), &section.questions[index]);
                    }
                }
                Phase::EmploymentGate => {
                    turn.session.cursor = Cursor::at(phase);
                    return self.ask(turn, None, &self.flow.employment_gate.question);
                }
                Phase::CompetencyFeedback => {
                    if turn.session.employed == Employment::Yes {
                        self.competency_feedback(turn)?;
                    }
                }
                Phase::TipiFeedback => {
                    let profile = self.tipi_profile(turn.session)?;
                    self.statement(turn, Utterance::new("feedback.tipi.intro"))?;
                    for u in tipi_feedback(&profile, &self.flow.norms) {
                        self.statement(turn, u)?;
                    }
                }
                Phase::Farewell => {
                    turn.session.cursor = Cursor::at(Phase::Farewell);
                    turn.session.finalized = true;
                    self.statement(turn, Utterance::new("farewell.thanks"))?;
                    turn.effects.push(Effect::Finalized);
                    return Ok(());
                }
                Phase::Greeting | Phase::LanguageSelect => {
                    return Err(EngineError::InvalidCursor(Cursor::at(phase)))
                }
            }
            phase = following(phase);
        }
    }

    fn competency_feedback(&self, turn: &mut Turn<'_>) -> Result<(), EngineError> {
        let section = &self.flow.competency;
        let answers = self.answers_of(turn.session, section)?;
        let report = score_competency_fit(&answers, &self.flow.norms)?;
        self.statement(turn, Utterance::new("feedback.competency.intro"))?;
        for band in [Band::Above, Band::Near, Band::Below] {
            let keys: Vec<String> = report
                .positions_in(band)
                .into_iter()
                .map(|i| section.questions[i].text_key.clone())
                .collect();
            if !keys.is_empty() {
                let u = Utterance::new(format!("feedback.competency.{}", band.key()))
                    .keys_arg("items", keys);
                self.statement(turn, u)?;
            }
        }
        Ok(())
    }

    /// Splits long texts and hands out sequence numbers.
    fn number(&self, session: &mut Session, pending: Vec<Pending>) -> Vec<OutboundMessage> {
        let max = self.flow.settings.max_chunk_chars;
        let mut messages = Vec::new();
        for p in pending {
            let chunks = split_chunks(&p.text, max);
            let last = chunks.len() - 1;
            for (part, text) in chunks.into_iter().enumerate() {
                session.outbound_seq += 1;
                let final_piece = part == last;
                messages.push(OutboundMessage {
                    recipient_id: session.external_user_id.clone(),
                    seq: session.outbound_seq,
                    text,
                    kind: if final_piece { p.kind } else { MessageKind::Statement },
                    quick_replies: if final_piece {
                        p.quick_replies.clone()
                    } else {
                        Vec::new()
                    },
                    utterance: p.utterance.clone(),
                    part,
                    end_of_batch: false,
                });
            }
        }
        if let Some(m) = messages.last_mut() {
            m.end_of_batch = true;
        }
        messages
    }
}

fn following(phase: Phase) -> Phase {
    let i = Phase::ORDER.iter().position(|&p| p == phase).expect("known phase");
    Phase::ORDER[(i + 1).min(Phase::ORDER.len() - 1)]
}
