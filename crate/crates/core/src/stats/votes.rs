use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Golden-unit role of a presentation slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldenRole {
    /// Very poor quality stimulus; expected low scores.
    Poor,
    /// High quality stimulus; expected high scores.
    High,
    /// First showing of a repeated test stimulus (counts as a regular vote).
    Rep1,
    /// Second showing of the repeated stimulus.
    Rep2,
}

/// One exported vote: a JSON line of the study service export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub session_id: String,
    pub playlist_id: u32,
    /// Presentation slot, 0-based.
    pub slot: usize,
    pub stimulus_id: String,
    pub role: Option<GoldenRole>,
    pub score: u8,
    /// Time between item issue and vote.
    pub latency_ms: u64,
    /// Wall-clock time of the vote in milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    pub playback_complete: bool,
}

pub fn parse_votes_jsonl(text: &str) -> Result<Vec<VoteRecord>, StatsError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| StatsError::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

/// Golden-unit scores of one participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GoldenScores {
    pub poor: Option<u8>,
    pub high: Option<u8>,
    pub rep1: Option<u8>,
    pub rep2: Option<u8>,
}

/// Participants by stimuli. Only test votes (no role, or `rep1`) enter `scores`; golden-unit
/// votes are kept per participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub participants: Vec<String>,
    pub stimuli: Vec<String>,
    /// Playlist each stimulus was rated in, when known.
    pub playlists: Vec<Option<u32>>,
    /// `scores[p][s]`; `None` marks an absent vote.
    pub scores: Vec<Vec<Option<u8>>>,
    pub golden: Vec<GoldenScores>,
}

impl ScoreMatrix {
    pub fn new(
        participants: Vec<String>,
        stimuli: Vec<String>,
        scores: Vec<Vec<Option<u8>>>,
        golden: Vec<GoldenScores>,
    ) -> Result<Self, StatsError> {
        let shape_ok = scores.len() == participants.len()
            && golden.len() == participants.len()
            && scores.iter().all(|r| r.len() == stimuli.len());
        if !shape_ok {
            return Err(StatsError::Shape);
        }
        let in_range = |v: &Option<u8>| v.is_none_or(|s| (1..=5).contains(&s));
        let golden_ok = golden.iter().all(|g| [g.poor, g.high, g.rep1, g.rep2].iter().all(in_range));
        if !scores.iter().flatten().all(in_range) || !golden_ok {
            return Err(StatsError::ScoreOutOfRange);
        }
        let n = stimuli.len();
        Ok(Self {
            participants,
            stimuli,
            playlists: vec![None; n],
            scores,
            golden,
        })
    }

    pub fn from_votes(votes: &[VoteRecord]) -> Result<Self, StatsError> {
        let mut participants: BTreeMap<&str, usize> = BTreeMap::new();
        let mut stimuli: BTreeMap<&str, usize> = BTreeMap::new();
        for v in votes {
            if !(1..=5).contains(&v.score) {
                return Err(StatsError::ScoreOutOfRange);
            }
            participants.entry(&v.session_id).or_insert(0);
            if matches!(v.role, None | Some(GoldenRole::Rep1)) {
                stimuli.entry(&v.stimulus_id).or_insert(0);
            }
        }
        for (i, v) in participants.values_mut().enumerate() {
            *v = i;
        }
        for (i, v) in stimuli.values_mut().enumerate() {
            *v = i;
        }
        let mut scores = vec![vec![None; stimuli.len()]; participants.len()];
        let mut golden = vec![GoldenScores::default(); participants.len()];
        let mut playlists = vec![None; stimuli.len()];
        for v in votes {
            let p = participants[v.session_id.as_str()];
            let g = &mut golden[p];
            match v.role {
                Some(GoldenRole::Poor) => g.poor = Some(v.score),
                Some(GoldenRole::High) => g.high = Some(v.score),
                Some(GoldenRole::Rep2) => g.rep2 = Some(v.score),
                role => {
                    if role == Some(GoldenRole::Rep1) {
                        g.rep1 = Some(v.score);
                    }
                    let s = stimuli[v.stimulus_id.as_str()];
                    scores[p][s] = Some(v.score);
                    playlists[s] = Some(v.playlist_id);
                }
            }
        }
        Ok(Self {
            participants: participants.keys().map(|s| s.to_string()).collect(),
            stimuli: stimuli.keys().map(|s| s.to_string()).collect(),
            playlists,
            scores,
            golden,
        })
    }

    /// Votes for stimulus `s` from the participants not in `excluded`.
    pub fn column(&self, s: usize, excluded: &std::collections::BTreeSet<usize>) -> Vec<u8> {
        self.scores
            .iter()
            .enumerate()
            .filter(|(p, _)| !excluded.contains(p))
            .filter_map(|(_, row)| row[s])
            .collect()
    }

    /// A copy without the given participants.
    pub fn without(&self, excluded: &std::collections::BTreeSet<usize>) -> Self {
        let keep: Vec<usize> = (0..self.participants.len()).filter(|p| !excluded.contains(p)).collect();
        Self {
            participants: keep.iter().map(|&p| self.participants[p].clone()).collect(),
            stimuli: self.stimuli.clone(),
            playlists: self.playlists.clone(),
            scores: keep.iter().map(|&p| self.scores[p].clone()).collect(),
            golden: keep.iter().map(|&p| self.golden[p]).collect(),
        }
    }
}
