//! Matrix-sentence spatial hearing protocol: trial generation, session
//! planning and word scoring.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CATEGORIES: [&str; 5] = ["Name", "Verb", "Number", "Adjective", "Noun"];

/// Eight words per category, category-major.
pub const WORD_TABLE: [[&str; 8]; 5] = [
    ["Jane", "Gene", "Pat", "Bob", "Sue", "Mike", "Lynn", "Jill"],
    ["Took", "Gave", "Lost", "Found", "Bought", "Sold", "Held", "Saw"],
    ["Two", "Three", "Four", "Five", "Six", "Seven", "Eight", "Nine"],
    ["New", "Old", "Big", "Small", "Red", "Blue", "Cold", "Hot"],
    ["Toys", "Hats", "Shoes", "Cards", "Pens", "Socks", "Bags", "Gloves"],
];

pub const WORDS_PER_CATEGORY: usize = 8;

/// Loudspeaker azimuths in degrees.
pub const AZIMUTHS: [i32; 5] = [-90, -45, 0, 45, 90];

/// Talkers `0..18` are female, `18..36` male.
pub const TALKER_POOL: usize = 36;
const FEMALE_TALKERS: usize = 18;

pub const TRIALS_PER_LAYOUT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

pub fn talker_gender(id: usize) -> Gender {
    if id < FEMALE_TALKERS {
        Gender::Female
    } else {
        Gender::Male
    }
}

/// One word index per category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[usize; 5]", into = "[usize; 5]")]
pub struct MatrixSentence([usize; 5]);

impl MatrixSentence {
    pub fn new(words: [usize; 5]) -> Result<Self> {
        if let Some(w) = words.iter().find(|&&w| w >= WORDS_PER_CATEGORY) {
            return Err(Error::InvalidInput(format!("word index {w} out of range 0..8")));
        }
        Ok(Self(words))
    }

    pub fn indices(&self) -> [usize; 5] {
        self.0
    }

    pub fn words(&self) -> [&'static str; 5] {
        std::array::from_fn(|c| WORD_TABLE[c][self.0[c]])
    }

    pub fn render(&self) -> String {
        self.words().join(" ")
    }

    /// Parses a five-word sentence, matching each word against its own
    /// category (case-insensitive).
    pub fn parse(text: &str) -> Result<Self> {
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.len() != 5 {
            return Err(Error::InvalidInput(format!("expected 5 words, got {}", words.len())));
        }
        let mut idx = [0; 5];
        for (c, w) in words.iter().enumerate() {
            idx[c] = word_index(c, w)
                .ok_or_else(|| Error::InvalidInput(format!("'{w}' is not a {} word", CATEGORIES[c])))?;
        }
        Ok(Self(idx))
    }
}

impl TryFrom<[usize; 5]> for MatrixSentence {
    type Error = Error;
    fn try_from(v: [usize; 5]) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MatrixSentence> for [usize; 5] {
    fn from(s: MatrixSentence) -> Self {
        s.0
    }
}

/// Index of `word` within `category`, ignoring case.
pub fn word_index(category: usize, word: &str) -> Option<usize> {
    WORD_TABLE
        .get(category)?
        .iter()
        .position(|w| w.eq_ignore_ascii_case(word.trim()))
}

/// Independent uniform choice in each category.
pub fn gen_sentence(rng: &mut impl Rng) -> MatrixSentence {
    MatrixSentence(std::array::from_fn(|_| rng.random_range(0..WORDS_PER_CATEGORY)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayoutFields")]
pub struct SpeakerLayout {
    pub target_deg: i32,
    pub masker_deg: [i32; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFields {
    target_deg: i32,
    masker_deg: [i32; 2],
}

impl TryFrom<LayoutFields> for SpeakerLayout {
    type Error = Error;
    fn try_from(f: LayoutFields) -> Result<Self> {
        Self::new(f.target_deg, f.masker_deg)
    }
}

impl SpeakerLayout {
    pub fn new(target_deg: i32, masker_deg: [i32; 2]) -> Result<Self> {
        let all = [target_deg, masker_deg[0], masker_deg[1]];
        if let Some(a) = all.iter().find(|a| !AZIMUTHS.contains(a)) {
            return Err(Error::InvalidConfig(format!("azimuth {a} is not one of {AZIMUTHS:?}")));
        }
        if all[0] == all[1] || all[0] == all[2] || all[1] == all[2] {
            return Err(Error::InvalidConfig(format!("azimuths must be distinct, got {all:?}")));
        }
        Ok(Self { target_deg, masker_deg })
    }

    /// Target at `target_deg`, maskers at the two free positions closest to
    /// the lateral extremes.
    pub fn lateral_maskers(target_deg: i32) -> Result<Self> {
        let left = AZIMUTHS
            .iter()
            .copied()
            .find(|&a| a != target_deg)
            .expect("five positions");
        let right = AZIMUTHS
            .iter()
            .rev()
            .copied()
            .find(|&a| a != target_deg)
            .expect("five positions");
        Self::new(target_deg, [left, right])
    }

    pub fn label(&self) -> String {
        format!("T{}", self.target_deg)
    }
}

/// Target at each loudspeaker in turn.
pub fn default_layouts() -> Vec<SpeakerLayout> {
    AZIMUTHS
        .iter()
        .map(|&a| SpeakerLayout::lateral_maskers(a).expect("valid azimuth"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevelFields")]
pub struct LevelCondition {
    pub target_db_spl: f64,
    pub masker_db_spl: f64,
    pub tmr_db: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelFields {
    target_db_spl: f64,
    masker_db_spl: f64,
    #[serde(default)]
    tmr_db: Option<f64>,
}

impl TryFrom<LevelFields> for LevelCondition {
    type Error = Error;
    fn try_from(f: LevelFields) -> Result<Self> {
        let level = Self::new(f.target_db_spl, f.masker_db_spl)?;
        match f.tmr_db {
            Some(t) if t != level.tmr_db => Err(Error::InvalidConfig(format!(
                "tmr_db {t} disagrees with {} - {}",
                f.target_db_spl, f.masker_db_spl
            ))),
            _ => Ok(level),
        }
    }
}

impl LevelCondition {
    pub fn new(target_db_spl: f64, masker_db_spl: f64) -> Result<Self> {
        if !(target_db_spl.is_finite() && masker_db_spl.is_finite()) {
            return Err(Error::InvalidConfig("levels must be finite".into()));
        }
        Ok(Self {
            target_db_spl,
            masker_db_spl,
            tmr_db: target_db_spl - masker_db_spl,
        })
    }

    pub fn with_tmr(target_db_spl: f64, tmr_db: f64) -> Result<Self> {
        Self::new(target_db_spl, target_db_spl - tmr_db)
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.target_db_spl, self.masker_db_spl)
    }

    /// Target levels 75, 65 and 55 dB SPL at 10 dB target-to-masker ratio.
    pub fn ci_set() -> Vec<Self> {
        Self::set(&[75.0, 65.0, 55.0], 10.0)
    }

    /// Target levels 75, 65 and 55 dB SPL at 0 dB target-to-masker ratio.
    pub fn nh_set() -> Vec<Self> {
        Self::set(&[75.0, 65.0, 55.0], 0.0)
    }

    pub fn set(targets: &[f64], tmr_db: f64) -> Vec<Self> {
        targets
            .iter()
            .map(|&t| Self::with_tmr(t, tmr_db).expect("finite levels"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordScore {
    pub per_word: [bool; 5],
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehavioralTrial {
    pub target: MatrixSentence,
    pub maskers: [MatrixSentence; 2],
    /// Target talker first.
    pub talkers: [usize; 3],
    pub layout: SpeakerLayout,
    pub level: LevelCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<MatrixSentence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<WordScore>,
}

impl BehavioralTrial {
    pub fn talker_genders(&self) -> [Gender; 3] {
        self.talkers.map(talker_gender)
    }
}

/// Target and maskers use three different words in every category, spoken
/// by three different talkers.
pub fn gen_trial(layout: SpeakerLayout, level: LevelCondition, rng: &mut impl Rng) -> BehavioralTrial {
    let mut sentences = [[0usize; 5]; 3];
    for c in 0..CATEGORIES.len() {
        let picks = index::sample(rng, WORDS_PER_CATEGORY, 3);
        for (s, w) in sentences.iter_mut().zip(picks.iter()) {
            s[c] = w;
        }
    }
    let talkers = index::sample(rng, TALKER_POOL, 3);
    BehavioralTrial {
        target: MatrixSentence(sentences[0]),
        maskers: [MatrixSentence(sentences[1]), MatrixSentence(sentences[2])],
        talkers: [talkers.index(0), talkers.index(1), talkers.index(2)],
        layout,
        level,
        response: None,
        score: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub session: usize,
    pub level: LevelCondition,
    pub trials: Vec<BehavioralTrial>,
}

/// `reps` trials per layout at one level, in shuffled order.
pub fn build_session(
    session: usize,
    level: LevelCondition,
    layouts: &[SpeakerLayout],
    reps: usize,
    rng: &mut impl Rng,
) -> Result<SessionPlan> {
    if layouts.is_empty() || reps == 0 {
        return Err(Error::InvalidConfig(
            "a session needs at least one layout and one repetition".into(),
        ));
    }
    let mut order: Vec<SpeakerLayout> = layouts.iter().flat_map(|&l| std::iter::repeat_n(l, reps)).collect();
    order.shuffle(rng);
    let trials = order.into_iter().map(|l| gen_trial(l, level, rng)).collect();
    Ok(SessionPlan { session, level, trials })
}

/// One session per level, all drawn from a single seeded stream.
pub fn build_sessions(
    levels: &[LevelCondition],
    layouts: &[SpeakerLayout],
    reps: usize,
    seed: u64,
) -> Result<Vec<SessionPlan>> {
    if levels.is_empty() {
        return Err(Error::InvalidConfig("at least one level is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    levels
        .iter()
        .enumerate()
        .map(|(i, &level)| build_session(i, level, layouts, reps, &mut rng))
        .collect()
}

/// Word-by-word comparison of a response with the target sentence.
pub fn score_response(trial: &BehavioralTrial, response: &MatrixSentence) -> WordScore {
    score_indices(trial, &response.0.map(Some))
}

/// Scores free word strings; each is looked up in the category of its
/// position, so a correct word in the wrong slot earns nothing.
pub fn score_words<S: AsRef<str>>(trial: &BehavioralTrial, words: &[S]) -> Result<WordScore> {
    if words.len() != 5 {
        return Err(Error::InvalidInput(format!(
            "a response needs 5 words, got {}",
            words.len()
        )));
    }
    Ok(score_indices(
        trial,
        &std::array::from_fn(|c| word_index(c, words[c].as_ref())),
    ))
}

fn score_indices(trial: &BehavioralTrial, response: &[Option<usize>; 5]) -> WordScore {
    let per_word: [bool; 5] = std::array::from_fn(|c| response[c] == Some(trial.target.0[c]));
    let fraction = per_word.iter().filter(|&&ok| ok).count() as f64 / 5.0;
    WordScore { per_word, fraction }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(seed: u64) -> BehavioralTrial {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        gen_trial(default_layouts()[2], LevelCondition::ci_set()[0], &mut rng)
    }

    #[test]
    fn table_has_forty_distinct_words() {
        let all: std::collections::HashSet<_> = WORD_TABLE.iter().flatten().collect();
        assert_eq!(all.len(), 40);
    }

    #[test]
    fn first_row_renders() {
        assert_eq!(MatrixSentence::new([0; 5]).unwrap().render(), "Jane Took Two New Toys");
        assert_eq!(
            MatrixSentence::new([7; 5]).unwrap().render(),
            "Jill Saw Nine Hot Gloves"
        );
        assert!(MatrixSentence::new([0, 0, 8, 0, 0]).is_err());
    }

    #[test]
    fn parse_round_trip() {
        let s = MatrixSentence::new([3, 1, 4, 1, 5]).unwrap();
        assert_eq!(MatrixSentence::parse(&s.render().to_lowercase()).unwrap(), s);
        assert!(MatrixSentence::parse("Took Jane Two New Toys").is_err());
        assert!(MatrixSentence::parse("Jane Took Two").is_err());
    }

    #[test]
    fn sentence_space_size() {
        assert_eq!(WORDS_PER_CATEGORY.pow(CATEGORIES.len() as u32), 32_768);
    }

    #[test]
    fn trial_words_are_disjoint_per_category() {
        for seed in 0..200 {
            let t = trial(seed);
            for c in 0..5 {
                let w = [t.target.0[c], t.maskers[0].0[c], t.maskers[1].0[c]];
                assert!(w[0] != w[1] && w[0] != w[2] && w[1] != w[2]);
            }
            let k = t.talkers;
            assert!(k[0] != k[1] && k[0] != k[2] && k[1] != k[2]);
            assert!(k.iter().all(|&id| id < TALKER_POOL));
        }
        assert_eq!(trial(9), trial(9));
    }

    #[test]
    fn layouts() {
        let l = default_layouts();
        assert_eq!(l.len(), 5);
        assert_eq!(l[0].masker_deg, [-45, 90]);
        assert_eq!(l[2].masker_deg, [-90, 90]);
        assert_eq!(l[4].masker_deg, [-90, 45]);
        assert!(SpeakerLayout::new(0, [0, 90]).is_err());
        assert!(SpeakerLayout::new(30, [0, 90]).is_err());
        assert!(serde_json::from_str::<SpeakerLayout>(r#"{"target_deg":0,"masker_deg":[0,90]}"#).is_err());
    }

    #[test]
    fn level_sets() {
        let ci = LevelCondition::ci_set();
        let pairs: Vec<_> = ci
            .iter()
            .map(|l| (l.target_db_spl, l.masker_db_spl, l.tmr_db))
            .collect();
        assert_eq!(pairs, [(75.0, 65.0, 10.0), (65.0, 55.0, 10.0), (55.0, 45.0, 10.0)]);
        assert!(LevelCondition::nh_set()
            .iter()
            .all(|l| l.tmr_db == 0.0 && l.masker_db_spl == l.target_db_spl));
        let bad = r#"{"target_db_spl":75,"masker_db_spl":65,"tmr_db":0}"#;
        assert!(serde_json::from_str::<LevelCondition>(bad).is_err());
    }

    #[test]
    fn scoring_examples() {
        let t = trial(1);
        assert_eq!(score_response(&t, &t.target).fraction, 1.0);
        assert_eq!(score_response(&t, &t.maskers[0]).fraction, 0.0);
        let mut three = t.maskers[0].0;
        three[..3].copy_from_slice(&t.target.0[..3]);
        let s = score_response(&t, &MatrixSentence(three));
        assert_eq!(s.fraction, 0.6);
        assert_eq!(s.per_word, [true, true, true, false, false]);
    }

    #[test]
    fn misplaced_words_score_zero() {
        let t = trial(2);
        let mut words = t.target.words().map(String::from).to_vec();
        words.rotate_left(1);
        assert_eq!(score_words(&t, &words).unwrap().fraction, 0.0);
        assert_eq!(score_words(&t, &t.target.words()).unwrap().fraction, 1.0);
        assert!(score_words(&t, &["Jane"]).is_err());
    }

    #[test]
    fn session_composition() {
        let sessions = build_sessions(&LevelCondition::ci_set(), &default_layouts(), TRIALS_PER_LAYOUT, 4).unwrap();
        assert_eq!(sessions.len(), 3);
        assert_eq!(sessions.iter().map(|s| s.trials.len()).sum::<usize>(), 150);
        for s in &sessions {
            for l in default_layouts() {
                assert_eq!(s.trials.iter().filter(|t| t.layout == l).count(), 10);
            }
            assert!(s.trials.iter().all(|t| t.level == s.level));
        }
        let json = serde_json::to_string(&sessions).unwrap();
        assert_eq!(serde_json::from_str::<Vec<SessionPlan>>(&json).unwrap(), sessions);
    }
}
