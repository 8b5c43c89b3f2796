use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::StudyError;

pub const TEST_ITEMS: usize = 30;
pub const TRAINING_ITEMS: usize = 5;
/// Test items plus the poor, high and second-repeat golden units.
pub const SLOTS: usize = TEST_ITEMS + 3;
/// Most test items a single source model may contribute to one playlist.
pub const MAX_PER_MODEL: usize = 2;
pub const MIN_WIDTH: u32 = 1920;
pub const MIN_HEIGHT: u32 = 1080;

/// A stimulus as shown to participants: the reference and distorted media, as paths below
/// the media root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyItem {
    pub stimulus_id: String,
    #[serde(default)]
    pub model_id: String,
    pub reference: String,
    pub distorted: String,
}

/// Golden units of a playlist. `repeated` names one of the test items; it is shown twice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenUnits {
    pub poor: StudyItem,
    pub high: StudyItem,
    pub repeated: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Playlist {
    pub id: u32,
    pub test: Vec<StudyItem>,
    pub golden: GoldenUnits,
}

/// Playlists plus the fixed training items shown before every session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub training: Vec<StudyItem>,
    pub playlists: Vec<Playlist>,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self, StudyError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| StudyError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: String| Err(StudyError::Config(m));
        if self.training.len() != TRAINING_ITEMS {
            return bad(format!("{} training items, expected {TRAINING_ITEMS}", self.training.len()));
        }
        if self.playlists.is_empty() {
            return bad("no playlists".into());
        }
        let mut ids = BTreeSet::new();
        for p in &self.playlists {
            if !ids.insert(p.id) {
                return bad(format!("duplicate playlist id {}", p.id));
            }
            if p.test.len() != TEST_ITEMS {
                return bad(format!("playlist {} has {} test items, expected {TEST_ITEMS}", p.id, p.test.len()));
            }
            let mut stimuli = BTreeSet::new();
            let mut per_model: BTreeMap<&str, usize> = BTreeMap::new();
            for t in &p.test {
                if !stimuli.insert(&t.stimulus_id) {
                    return bad(format!("playlist {} repeats stimulus {}", p.id, t.stimulus_id));
                }
                let n = per_model.entry(&t.model_id).or_insert(0);
                *n += 1;
                if *n > MAX_PER_MODEL {
                    return bad(format!("playlist {} shows model {} more than {MAX_PER_MODEL} times", p.id, t.model_id));
                }
            }
            if !stimuli.contains(&p.golden.repeated) {
                return bad(format!("playlist {}: repeated unit {} is not a test item", p.id, p.golden.repeated));
            }
            for g in [&p.golden.poor, &p.golden.high] {
                if stimuli.contains(&g.stimulus_id) {
                    return bad(format!("playlist {}: golden unit {} is also a test item", p.id, g.stimulus_id));
                }
            }
        }
        let media = self
            .training
            .iter()
            .chain(self.playlists.iter().flat_map(|p| p.test.iter().chain([&p.golden.poor, &p.golden.high])))
            .flat_map(|i| [&i.reference, &i.distorted]);
        for m in media {
            if !safe_media_path(m) {
                return bad(format!("media path {m:?} must be relative without `..`"));
            }
        }
        Ok(())
    }

    pub fn playlist(&self, id: u32) -> Option<&Playlist> {
        self.playlists.iter().find(|p| p.id == id)
    }
}

/// Relative path made of normal components only.
pub fn safe_media_path(p: &str) -> bool {
    !p.is_empty()
        && !p.starts_with('/')
        && !p.contains('\\')
        && p.split('/').all(|c| !c.is_empty() && c != "." && c != "..")
}

/// Participant display as reported by the client.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceReport {
    pub width: u32,
    pub height: u32,
    pub fullscreen: bool,
}

impl DeviceReport {
    pub fn compatible(&self) -> bool {
        self.width >= MIN_WIDTH && self.height >= MIN_HEIGHT && self.fullscreen
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn item(id: &str, model: &str) -> StudyItem {
        StudyItem {
            stimulus_id: id.into(),
            model_id: model.into(),
            reference: format!("{model}/ref.png"),
            distorted: format!("{model}/{id}.png"),
        }
    }

    pub fn sample_config(playlists: u32) -> StudyConfig {
        StudyConfig {
            training: (0..5).map(|i| item(&format!("train{i}"), "t")).collect(),
            playlists: (1..=playlists)
                .map(|id| Playlist {
                    id,
                    test: (0..30).map(|i| item(&format!("p{id}_s{i}"), &format!("m{}", i / 2))).collect(),
                    golden: GoldenUnits {
                        poor: item(&format!("p{id}_poor"), "g"),
                        high: item(&format!("p{id}_high"), "g"),
                        repeated: format!("p{id}_s3"),
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn sample_is_valid() {
        sample_config(3).validate().unwrap();
    }

    #[test]
    fn rejects_model_overuse_and_bad_paths() {
        let mut c = sample_config(1);
        c.playlists[0].test[2].model_id = "m0".into();
        assert!(matches!(c.validate(), Err(StudyError::Config(_))));
        let mut c = sample_config(1);
        c.training[0].distorted = "../etc/passwd".into();
        assert!(matches!(c.validate(), Err(StudyError::Config(_))));
        let mut c = sample_config(1);
        c.playlists[0].golden.repeated = "nope".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn device_check() {
        assert!(DeviceReport { width: 1920, height: 1080, fullscreen: true }.compatible());
        assert!(!DeviceReport { width: 1366, height: 768, fullscreen: true }.compatible());
        assert!(!DeviceReport { width: 2560, height: 1440, fullscreen: false }.compatible());
    }
}
