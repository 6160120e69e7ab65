//! One flat record per respondent, a single-file JSON store and CSV export
//! with the historical column names.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Datelike, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{Effect, Session};
use crate::localization::Locale;
use crate::scoring::{
    round1, score_sus, score_tipi, BigFiveProfile, SusScore, TipiKey, COMPETENCY_ITEMS,
    SUS_ITEMS, TIPI_ITEMS,
};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("an unfinished record already exists for {0}")]
    DuplicateActiveSession(String),
    #[error("record {id}: {field} is already set")]
    FieldAlreadySet { id: u64, field: String },
    #[error("no column for question {0:?}")]
    UnknownField(String),
    #[error("no record with id {0}")]
    NoSuchRecord(u64),
    #[error("{field} cannot hold {value}")]
    InvalidValue { field: String, value: i64 },
    #[error("fb_id must not be empty")]
    EmptyFbId,
    #[error("storage: {0}")]
    Storage(String),
}

impl StoreError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::DuplicateActiveSession(_) => "DUPLICATE_ACTIVE_SESSION",
            StoreError::FieldAlreadySet { .. } => "FIELD_ALREADY_SET",
            StoreError::UnknownField(_) => "UNKNOWN_FIELD",
            StoreError::NoSuchRecord(_) => "NO_SUCH_RECORD",
            StoreError::InvalidValue { .. } => "INVALID_VALUE",
            StoreError::EmptyFbId => "EMPTY_FB_ID",
            StoreError::Storage(_) => "STORAGE",
        }
    }
}

/// Public profile attributes fetched on first contact. All optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileAttributes {
    pub first_name: Option<String>,
    pub last_name: Option<String>,
    pub locale: Option<String>,
    pub hometown: Option<String>,
    pub timezone: Option<f64>,
    pub birthday: Option<String>,
    pub gender: Option<String>,
    pub profile_pic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Device {
    Computer,
    MobilePhone,
    Other,
}

impl Device {
    pub fn from_answer(value: i64) -> Option<Device> {
        match value {
            1 => Some(Device::Computer),
            2 => Some(Device::MobilePhone),
            3 => Some(Device::Other),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Device::Computer => "Computer",
            Device::MobilePhone => "Mobile Phone",
            Device::Other => "Other",
        }
    }

    pub fn from_label(label: &str) -> Option<Device> {
        [Device::Computer, Device::MobilePhone, Device::Other]
            .into_iter()
            .find(|d| d.label() == label)
    }
}

impl fmt::Display for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub id: u64,
    pub fb_id: String,
    pub first_name: Option<String>,
    pub last_name: Option<String>,
    pub locale: Option<String>,
    pub hometown: Option<String>,
    pub timezone: Option<f64>,
    pub birthday: Option<String>,
    pub gender: Option<String>,
    pub tipi: [Option<i64>; TIPI_ITEMS],
    /// Extraversion, agreeableness, conscientiousness, emotional stability, openness.
    pub traits: [Option<f64>; 5],
    pub employed: Option<bool>,
    pub competency: Vec<Option<i64>>,
    pub sus: [Option<i64>; SUS_ITEMS],
    pub record_created: DateTime<Utc>,
    pub language: Option<Locale>,
    pub profile_pic: Option<String>,
    pub age: Option<i64>,
    pub it_skills: Option<i64>,
    pub immigrant: Option<bool>,
    pub device: Option<Device>,
    #[serde(default)]
    pub finalized: bool,
}

impl SessionRecord {
    pub fn new(id: u64, fb_id: &str, profile: &ProfileAttributes, now: DateTime<Utc>) -> Self {
        Self {
            id,
            fb_id: fb_id.to_string(),
            first_name: non_empty(&profile.first_name),
            last_name: non_empty(&profile.last_name),
            locale: non_empty(&profile.locale),
            hometown: non_empty(&profile.hometown),
            timezone: profile.timezone,
            birthday: non_empty(&profile.birthday),
            gender: non_empty(&profile.gender),
            tipi: [None; TIPI_ITEMS],
            traits: [None; 5],
            employed: None,
            competency: vec![None; COMPETENCY_ITEMS],
            sus: [None; SUS_ITEMS],
            record_created: now,
            language: None,
            profile_pic: non_empty(&profile.profile_pic),
            age: profile.birthday.as_deref().and_then(|b| age_at(b, now)),
            it_skills: None,
            immigrant: None,
            device: None,
            finalized: false,
        }
    }

    pub fn tipi_answers(&self) -> Option<Vec<i64>> {
        self.tipi.iter().copied().collect()
    }

    pub fn sus_answers(&self) -> Option<Vec<i64>> {
        self.sus.iter().copied().collect()
    }

    pub fn sus_score(&self) -> Option<SusScore> {
        self.sus_answers().and_then(|a| score_sus(&a).ok())
    }

    pub fn trait_scores(&self) -> Option<BigFiveProfile> {
        match self.traits {
            [Some(e), Some(a), Some(c), Some(s), Some(o)] => Some(BigFiveProfile {
                extraversion: e,
                agreeableness: a,
                conscientiousness: c,
                emotional_stability: s,
                openness: o,
            }),
            _ => None,
        }
    }

    /// True when the stored trait scores equal a fresh scoring of the stored
    /// answers (or when either side is incomplete).
    pub fn scores_consistent(&self, key: &TipiKey) -> bool {
        match (self.tipi_answers(), self.trait_scores()) {
            (Some(answers), Some(stored)) => score_tipi(&answers, key)
                .map(|p| rounded(&p) == stored)
                .unwrap_or(false),
            _ => true,
        }
    }
}

fn non_empty(v: &Option<String>) -> Option<String> {
    v.as_ref().filter(|s| !s.is_empty()).cloned()
}

fn rounded(p: &BigFiveProfile) -> BigFiveProfile {
    BigFiveProfile {
        extraversion: round1(p.extraversion),
        agreeableness: round1(p.agreeableness),
        conscientiousness: round1(p.conscientiousness),
        emotional_stability: round1(p.emotional_stability),
        openness: round1(p.openness),
    }
}

/// Whole years between a profile birthday and `now`. Accepts `MM/DD/YYYY`
/// (the profile API format) and ISO `YYYY-MM-DD`; year-less birthdays give `None`.
pub fn age_at(birthday: &str, now: DateTime<Utc>) -> Option<i64> {
    let date = NaiveDate::parse_from_str(birthday.trim(), "%m/%d/%Y")
        .or_else(|_| NaiveDate::parse_from_str(birthday.trim(), "%Y-%m-%d"))
        .ok()?;
    let today = now.date_naive();
    let mut years = (today.year() - date.year()) as i64;
    if (today.month(), today.day()) < (date.month(), date.day()) {
        years -= 1;
    }
    (years >= 0).then_some(years)
}

/// The record column a question id writes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Tipi(usize),
    Competency(usize),
    Sus(usize),
    Employed,
    ItSkills,
    Immigrant,
    Device,
}

impl Field {
    pub fn from_question_id(id: &str) -> Option<Field> {
        let numbered = |prefix: &str, count: usize| {
            id.strip_prefix(prefix)
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|n| (1..=count).contains(n))
                .map(|n| n - 1)
        };
        match id {
            "employed" => Some(Field::Employed),
            "it_skills" => Some(Field::ItSkills),
            "immigrant" => Some(Field::Immigrant),
            "device" => Some(Field::Device),
            _ => numbered("tipi_", TIPI_ITEMS)
                .map(Field::Tipi)
                .or_else(|| numbered("competency_", COMPETENCY_ITEMS).map(Field::Competency))
                .or_else(|| numbered("sus_", SUS_ITEMS).map(Field::Sus)),
        }
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, id: u64, field: &str) -> Result<(), StoreError> {
    if slot.is_some() {
        return Err(StoreError::FieldAlreadySet {
            id,
            field: field.to_string(),
        });
    }
    *slot = Some(value);
    Ok(())
}

fn write_field(record: &mut SessionRecord, question_id: &str, value: i64) -> Result<(), StoreError> {
    let field = Field::from_question_id(question_id)
        .ok_or_else(|| StoreError::UnknownField(question_id.to_string()))?;
    let invalid = || StoreError::InvalidValue {
        field: question_id.to_string(),
        value,
    };
    let id = record.id;
    match field {
        Field::Tipi(i) => set_once(&mut record.tipi[i], value, id, question_id),
        Field::Competency(i) => set_once(&mut record.competency[i], value, id, question_id),
        Field::Sus(i) => set_once(&mut record.sus[i], value, id, question_id),
        Field::ItSkills => set_once(&mut record.it_skills, value, id, question_id),
        // yes/no questions answer 1 = yes, 2 = no
        Field::Employed | Field::Immigrant => {
            let flag = match value {
                1 => true,
                2 => false,
                _ => return Err(invalid()),
            };
            let slot = if field == Field::Employed {
                &mut record.employed
            } else {
                &mut record.immigrant
            };
            set_once(slot, flag, id, question_id)
        }
        Field::Device => {
            let device = Device::from_answer(value).ok_or_else(invalid)?;
            set_once(&mut record.device, device, id, question_id)
        }
    }
}

/// Storage behind the gateway. Every mutating call is atomic: it either
/// persists completely or leaves the store unchanged.
pub trait RecordStore: Send {
    fn create_record(
        &mut self,
        fb_id: &str,
        profile: &ProfileAttributes,
        now: DateTime<Utc>,
    ) -> Result<SessionRecord, StoreError>;
    fn save_answer(&mut self, id: u64, question_id: &str, value: i64) -> Result<SessionRecord, StoreError>;
    fn save_scores(&mut self, id: u64, profile: &BigFiveProfile) -> Result<SessionRecord, StoreError>;
    fn set_language(&mut self, id: u64, locale: Locale) -> Result<SessionRecord, StoreError>;
    fn finalize(&mut self, id: u64) -> Result<SessionRecord, StoreError>;
    fn record(&self, id: u64) -> Option<SessionRecord>;
    fn active_record_for(&self, fb_id: &str) -> Option<SessionRecord>;
    fn records(&self) -> Vec<SessionRecord>;
    fn put_session(&mut self, session: &Session) -> Result<(), StoreError>;
    fn session(&self, fb_id: &str) -> Option<Session>;

    /// Applies the effects of one engine turn to record `id` and stores the
    /// new session state, all in one atomic write.
    fn commit_turn(&mut self, id: u64, effects: &[Effect], session: &Session) -> Result<SessionRecord, StoreError>;
}

fn write_scores(record: &mut SessionRecord, profile: &BigFiveProfile) -> Result<(), StoreError> {
    if record.traits.iter().any(Option::is_some) {
        return Err(StoreError::FieldAlreadySet {
            id: record.id,
            field: "traits".into(),
        });
    }
    let p = rounded(profile);
    record.traits = [
        p.extraversion,
        p.agreeableness,
        p.conscientiousness,
        p.emotional_stability,
        p.openness,
    ]
    .map(Some);
    Ok(())
}

fn apply_effect(record: &mut SessionRecord, effect: &Effect) -> Result<(), StoreError> {
    let id = record.id;
    match effect {
        Effect::LocaleSelected(l) => set_once(&mut record.language, *l, id, "language"),
        Effect::Answer { question_id, value } => write_field(record, question_id, *value),
        Effect::TipiScored(p) => write_scores(record, p),
        Effect::Finalized => {
            record.finalized = true;
            Ok(())
        }
        // already covered by the matching Answer effects
        Effect::Employment(_) | Effect::SusScored(_) => Ok(()),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct StoreData {
    next_id: u64,
    records: BTreeMap<u64, SessionRecord>,
    sessions: BTreeMap<String, Session>,
}

/// All records in one JSON file, rewritten through a temporary file and a
/// rename on every change. Without a path the store lives in memory only.
#[derive(Debug, Default)]
pub struct JsonFileStore {
    path: Option<PathBuf>,
    data: StoreData,
}

impl JsonFileStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens `path`, starting empty if the file does not exist yet.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let data = match std::fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| StoreError::Storage(format!("{}: {e}", path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => StoreData::default(),
            Err(e) => return Err(StoreError::Storage(format!("{}: {e}", path.display()))),
        };
        Ok(Self {
            path: Some(path),
            data,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn persist(&self, data: &StoreData) -> Result<(), StoreError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let storage = |e: std::io::Error| StoreError::Storage(format!("{}: {e}", path.display()));
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let bytes = serde_json::to_vec_pretty(data).map_err(|e| StoreError::Storage(e.to_string()))?;
        let mut tmp = tempfile_in(dir, path).map_err(storage)?;
        tmp.1.write_all(&bytes).map_err(storage)?;
        tmp.1.sync_all().map_err(storage)?;
        drop(tmp.1);
        std::fs::rename(&tmp.0, path).map_err(storage)
    }

    fn mutate<T>(
        &mut self,
        f: impl FnOnce(&mut StoreData) -> Result<T, StoreError>,
    ) -> Result<T, StoreError> {
        let mut next = self.data.clone();
        let out = f(&mut next)?;
        self.persist(&next)?;
        self.data = next;
        Ok(out)
    }

    fn update(
        &mut self,
        id: u64,
        f: impl FnOnce(&mut SessionRecord) -> Result<(), StoreError>,
    ) -> Result<SessionRecord, StoreError> {
        self.mutate(|data| {
            let record = data.records.get_mut(&id).ok_or(StoreError::NoSuchRecord(id))?;
            f(record)?;
            Ok(record.clone())
        })
    }
}

fn tempfile_in(dir: &Path, target: &Path) -> std::io::Result<(PathBuf, std::fs::File)> {
    let name = target.file_name().and_then(|n| n.to_str()).unwrap_or("store");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let file = std::fs::File::create(&tmp)?;
    Ok((tmp, file))
}

impl RecordStore for JsonFileStore {
    fn create_record(
        &mut self,
        fb_id: &str,
        profile: &ProfileAttributes,
        now: DateTime<Utc>,
    ) -> Result<SessionRecord, StoreError> {
        if fb_id.trim().is_empty() {
            return Err(StoreError::EmptyFbId);
        }
        if self.active_record_for(fb_id).is_some() {
            return Err(StoreError::DuplicateActiveSession(fb_id.to_string()));
        }
        self.mutate(|data| {
            data.next_id += 1;
            let record = SessionRecord::new(data.next_id, fb_id, profile, now);
            data.records.insert(record.id, record.clone());
            Ok(record)
        })
    }

    fn save_answer(&mut self, id: u64, question_id: &str, value: i64) -> Result<SessionRecord, StoreError> {
        self.update(id, |r| write_field(r, question_id, value))
    }

    fn save_scores(&mut self, id: u64, profile: &BigFiveProfile) -> Result<SessionRecord, StoreError> {
        self.update(id, |r| write_scores(r, profile))
    }

    fn set_language(&mut self, id: u64, locale: Locale) -> Result<SessionRecord, StoreError> {
        self.update(id, |r| set_once(&mut r.language, locale, id, "language"))
    }

    fn finalize(&mut self, id: u64) -> Result<SessionRecord, StoreError> {
        self.update(id, |r| {
            r.finalized = true;
            Ok(())
        })
    }

    fn record(&self, id: u64) -> Option<SessionRecord> {
        self.data.records.get(&id).cloned()
    }

    fn active_record_for(&self, fb_id: &str) -> Option<SessionRecord> {
        self.data
            .records
            .values()
            .find(|r| r.fb_id == fb_id && !r.finalized)
            .cloned()
    }

    fn records(&self) -> Vec<SessionRecord> {
        self.data.records.values().cloned().collect()
    }

    fn put_session(&mut self, session: &Session) -> Result<(), StoreError> {
        self.mutate(|data| {
            data.sessions.insert(session.external_user_id.clone(), session.clone());
            Ok(())
        })
    }

    fn session(&self, fb_id: &str) -> Option<Session> {
        self.data.sessions.get(fb_id).cloned()
    }

    fn commit_turn(&mut self, id: u64, effects: &[Effect], session: &Session) -> Result<SessionRecord, StoreError> {
        self.mutate(|data| {
            let record = data.records.get_mut(&id).ok_or(StoreError::NoSuchRecord(id))?;
            for effect in effects {
                apply_effect(record, effect)?;
            }
            let record = record.clone();
            data.sessions.insert(session.external_user_id.clone(), session.clone());
            Ok(record)
        })
    }
}

const TRAIT_COLUMNS: [&str; 5] = [
    "TIPIPL_ekstarwersja",
    "TIPIPL_ugodowosc",
    "TIPIPL_sumiennosc",
    "TIPIPL_stabilnosc",
    "TIPIPL_otwartosc",
];

/// Export header, in the historical column order.
pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "Id", "Fb_Id", "First_name", "Last_name", "Locale", "Hometown", "Timezone", "Birthday",
        "Gender",
    ]
    .map(String::from)
    .to_vec();
    h.extend((1..=TIPI_ITEMS).map(|i| format!("TIPIPL_odp_{i}")));
    h.extend(TRAIT_COLUMNS.map(String::from));
    h.push("DopKomp_czy_pracujesz".into());
    h.push("DopKomp_odp_num_1".into());
    h.extend((1..=SUS_ITEMS).map(|i| format!("Inter_odp_{i}")));
    h.extend(
        ["Record_created", "Jezyk", "Profile_pic", "Age", "It_skils", "Immigrant", "Device"]
            .map(String::from),
    );
    h
}

/// Separator between the 26 competency answers inside their single column.
pub const COMPETENCY_DELIMITER: char = ';';

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn row(r: &SessionRecord) -> Vec<String> {
    let mut cells = vec![
        r.id.to_string(),
        r.fb_id.clone(),
        opt(&r.first_name),
        opt(&r.last_name),
        opt(&r.locale),
        opt(&r.hometown),
        opt(&r.timezone),
        opt(&r.birthday),
        opt(&r.gender),
    ];
    cells.extend(r.tipi.iter().map(opt));
    cells.extend(r.traits.iter().map(|t| t.map(|v| format!("{v:.1}")).unwrap_or_default()));
    cells.push(opt(&r.employed.map(|e| if e { "yes" } else { "no" })));
    let competency = if r.competency.iter().all(Option::is_none) {
        String::new()
    } else {
        r.competency
            .iter()
            .map(opt)
            .collect::<Vec<_>>()
            .join(&COMPETENCY_DELIMITER.to_string())
    };
    cells.push(competency);
    cells.extend(r.sus.iter().map(opt));
    cells.push(r.record_created.to_rfc3339_opts(chrono::SecondsFormat::Millis, true));
    cells.push(opt(&r.language));
    cells.push(opt(&r.profile_pic));
    cells.push(opt(&r.age));
    cells.push(opt(&r.it_skills));
    cells.push(opt(&r.immigrant.map(|b| if b { "1" } else { "0" })));
    cells.push(opt(&r.device));
    cells
}

/// Writes a header plus one row per record. Empty cells stand for null.
pub fn export_csv<'a>(records: impl IntoIterator<Item = &'a SessionRecord>) -> Result<String, StoreError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let storage = |e: csv::Error| StoreError::Storage(e.to_string());
    w.write_record(csv_header()).map_err(storage)?;
    for r in records {
        w.write_record(row(r)).map_err(storage)?;
    }
    let bytes = w.into_inner().map_err(|e| StoreError::Storage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| StoreError::Storage(e.to_string()))
}

#[derive(Debug, Error)]
#[error("row {row}, column {column}: {message}")]
pub struct ImportError {
    pub row: usize,
    pub column: String,
    pub message: String,
}

/// Reads a document produced by [`export_csv`].
pub fn import_csv(text: &str) -> Result<Vec<SessionRecord>, ImportError> {
    let header = csv_header();
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let got: Vec<String> = reader
        .headers()
        .map_err(|e| ImportError {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .iter()
        .map(String::from)
        .collect();
    if got != header {
        return Err(ImportError {
            row: 0,
            column: String::new(),
            message: "header does not match the export format".into(),
        });
    }
    let mut out = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let row_no = n + 1;
        let rec = rec.map_err(|e| ImportError {
            row: row_no,
            column: String::new(),
            message: e.to_string(),
        })?;
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let err = |i: usize, message: String| ImportError {
            row: row_no,
            column: header[i].clone(),
            message,
        };
        let text = |i: usize| (!cell(i).is_empty()).then(|| cell(i).to_string());
        let parse = |i: usize| -> Result<Option<i64>, ImportError> {
            text(i).map(|s| s.parse().map_err(|e| err(i, format!("{e}")))).transpose()
        };
        let parse_f = |i: usize| -> Result<Option<f64>, ImportError> {
            text(i).map(|s| s.parse().map_err(|e| err(i, format!("{e}")))).transpose()
        };
        let mut i = 0;
        let mut next = || {
            i += 1;
            i - 1
        };
        let id = parse(next())?.ok_or_else(|| err(0, "missing id".into()))? as u64;
        let fb_id = cell(next()).to_string();
        let first_name = text(next());
        let last_name = text(next());
        let locale = text(next());
        let hometown = text(next());
        let timezone = parse_f(next())?;
        let birthday = text(next());
        let gender = text(next());
        let mut tipi = [None; TIPI_ITEMS];
        for slot in &mut tipi {
            *slot = parse(next())?;
        }
        let mut traits = [None; 5];
        for slot in &mut traits {
            *slot = parse_f(next())?;
        }
        let c = next();
        let employed = match cell(c) {
            "" => None,
            "yes" => Some(true),
            "no" => Some(false),
            other => return Err(err(c, format!("bad employed flag {other:?}"))),
        };
        let c = next();
        let competency = if cell(c).is_empty() {
            vec![None; COMPETENCY_ITEMS]
        } else {
            let parts: Vec<&str> = cell(c).split(COMPETENCY_DELIMITER).collect();
            if parts.len() != COMPETENCY_ITEMS {
                return Err(err(c, format!("expected {COMPETENCY_ITEMS} values, found {}", parts.len())));
            }
            parts
                .iter()
                .map(|p| {
                    (!p.is_empty())
                        .then(|| p.parse::<i64>().map_err(|e| err(c, e.to_string())))
                        .transpose()
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        let mut sus = [None; SUS_ITEMS];
        for slot in &mut sus {
            *slot = parse(next())?;
        }
        let c = next();
        let record_created = DateTime::parse_from_rfc3339(cell(c))
            .map_err(|e| err(c, e.to_string()))?
            .with_timezone(&Utc);
        let c = next();
        let language = text(c)
            .map(|s| s.parse::<Locale>().map_err(|e| err(c, e.to_string())))
            .transpose()?;
        let profile_pic = text(next());
        let age = parse(next())?;
        let it_skills = parse(next())?;
        let c = next();
        let immigrant = match cell(c) {
            "" => None,
            "1" => Some(true),
            "0" => Some(false),
            other => return Err(err(c, format!("bad immigrant flag {other:?}"))),
        };
        let c = next();
        let device = text(c)
            .map(|s| Device::from_label(&s).ok_or_else(|| err(c, format!("unknown device {s:?}"))))
            .transpose()?;
        let finalized = sus.iter().all(Option::is_some);
        out.push(SessionRecord {
            id,
            fb_id,
            first_name,
            last_name,
            locale,
            hometown,
            timezone,
            birthday,
            gender,
            tipi,
            traits,
            employed,
            competency,
            sus,
            record_created,
            language,
            profile_pic,
            age,
            it_skills,
            immigrant,
            device,
            finalized,
        });
    }
    Ok(out)
}
