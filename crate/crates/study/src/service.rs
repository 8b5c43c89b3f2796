use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};

use hmac::{Hmac, Mac};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use meshqa_core::stats::VoteRecord;

use crate::clock::Clock;
use crate::config::{DeviceReport, StudyConfig, StudyItem, SLOTS};
use crate::order::{presentation_order, SlotItem};
use crate::store::{Event, EventLog};
use crate::StudyError;

/// Default server-side minimum between issuing an item and accepting its vote.
pub const DEFAULT_MIN_PLAYBACK_MS: u64 = 8_000;
/// Sessions not completed within this time are expired and release their playlist.
pub const SESSION_TTL_MS: u64 = 60 * 60 * 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Created,
    Training,
    Rating,
    Complete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub playlist_id: u32,
    pub device: DeviceReport,
    pub order: Vec<SlotItem>,
    pub state: SessionState,
    pub created_ms: u64,
    /// Next slot awaiting a vote.
    pub next_slot: usize,
    pub code: Option<String>,
}

/// Answer to a session creation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub playlist_id: u32,
    pub state: SessionState,
    pub slots: usize,
    pub next_slot: usize,
    pub training: Vec<StudyItem>,
}

/// The item a client should present next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextItem {
    pub slot: usize,
    pub stimulus_id: String,
    pub reference: String,
    pub distorted: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRequest {
    pub session_id: String,
    pub slot: usize,
    pub stimulus_id: String,
    pub score: u8,
    pub playback_complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteAck {
    pub slot: usize,
    pub next_slot: usize,
    pub remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaylistSummary {
    pub id: u32,
    pub slots: usize,
    pub training: Vec<StudyItem>,
    pub completed_sessions: usize,
}

pub struct ServiceOptions {
    pub secret: Vec<u8>,
    pub min_playback_ms: u64,
    pub session_ttl_ms: u64,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        Self {
            secret: b"change-me".to_vec(),
            min_playback_ms: DEFAULT_MIN_PLAYBACK_MS,
            session_ttl_ms: SESSION_TTL_MS,
        }
    }
}

struct Inner {
    log: EventLog,
    sessions: BTreeMap<String, Session>,
    votes: Vec<VoteRecord>,
    /// Issue time of the pending slot per session; not persisted.
    issued: HashMap<String, (usize, u64)>,
}

/// Study bookkeeping. All mutations take one lock, append to the log, and only then change
/// memory, so an acknowledged change is always on disk.
pub struct StudyService {
    config: StudyConfig,
    options: ServiceOptions,
    clock: Arc<dyn Clock>,
    inner: Mutex<Inner>,
}

/// Deterministic 12-hex completion code: HMAC-SHA256 of the session id under the secret.
pub fn completion_code(secret: &[u8], session_id: &str) -> String {
    let mut mac = Hmac::<Sha256>::new_from_slice(secret).expect("any key length");
    mac.update(session_id.as_bytes());
    hex::encode(mac.finalize().into_bytes())[..12].to_string()
}

fn order_seed(session_id: &str) -> u64 {
    let d = Sha256::digest(session_id.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

impl StudyService {
    pub fn open(config: StudyConfig, store: &Path, options: ServiceOptions, clock: Arc<dyn Clock>) -> Result<Self, StudyError> {
        config.validate()?;
        let (log, events) = EventLog::open(store)?;
        let mut inner = Inner {
            log,
            sessions: BTreeMap::new(),
            votes: Vec::new(),
            issued: HashMap::new(),
        };
        for e in events {
            apply(&mut inner, e);
        }
        log::info!("store {} replayed: {} sessions, {} votes", store.display(), inner.sessions.len(), inner.votes.len());
        Ok(Self {
            config,
            options,
            clock,
            inner: Mutex::new(inner),
        })
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn config(&self) -> &StudyConfig {
        &self.config
    }

    fn expired(&self, s: &Session, now: u64) -> bool {
        s.state != SessionState::Complete && now.saturating_sub(s.created_ms) >= self.options.session_ttl_ms
    }

    /// Completed plus live sessions per playlist.
    fn load(&self, inner: &Inner, now: u64) -> BTreeMap<u32, usize> {
        let mut load: BTreeMap<u32, usize> = self.config.playlists.iter().map(|p| (p.id, 0)).collect();
        for s in inner.sessions.values() {
            if !self.expired(s, now) {
                *load.entry(s.playlist_id).or_insert(0) += 1;
            }
        }
        load
    }

    pub fn completed_counts(&self) -> BTreeMap<u32, usize> {
        let inner = self.lock();
        let mut counts: BTreeMap<u32, usize> = self.config.playlists.iter().map(|p| (p.id, 0)).collect();
        for s in inner.sessions.values().filter(|s| s.state == SessionState::Complete) {
            *counts.entry(s.playlist_id).or_insert(0) += 1;
        }
        counts
    }

    pub fn create_session(&self, device: DeviceReport) -> Result<SessionInfo, StudyError> {
        if !device.compatible() {
            return Err(StudyError::DeviceIncompatible {
                width: device.width,
                height: device.height,
                fullscreen: device.fullscreen,
            });
        }
        let mut inner = self.lock();
        let now = self.clock.now_ms();
        let load = self.load(&inner, now);
        let (&playlist_id, _) = load.iter().min_by_key(|(id, n)| (**n, **id)).expect("at least one playlist");
        let session_id = loop {
            let id = hex::encode(rand::rng().random::<[u8; 16]>());
            if !inner.sessions.contains_key(&id) {
                break id;
            }
        };
        let playlist = self.config.playlist(playlist_id).expect("from config");
        let event = Event::SessionCreated {
            session_id: session_id.clone(),
            playlist_id,
            device,
            order: presentation_order(playlist, order_seed(&session_id)),
            created_ms: now,
        };
        inner.log.append(&event)?;
        apply(&mut inner, event);
        Ok(self.info(&inner.sessions[&session_id]))
    }

    fn info(&self, s: &Session) -> SessionInfo {
        SessionInfo {
            session_id: s.id.clone(),
            playlist_id: s.playlist_id,
            state: s.state,
            slots: s.order.len(),
            next_slot: s.next_slot,
            training: self.config.training.clone(),
        }
    }

    fn live<'a>(&self, inner: &'a Inner, id: &str, now: u64) -> Result<&'a Session, StudyError> {
        let s = inner.sessions.get(id).ok_or_else(|| StudyError::UnknownSession(id.to_owned()))?;
        if self.expired(s, now) {
            return Err(StudyError::SessionExpired);
        }
        Ok(s)
    }

    pub fn session(&self, id: &str) -> Result<SessionInfo, StudyError> {
        let inner = self.lock();
        let s = inner.sessions.get(id).ok_or_else(|| StudyError::UnknownSession(id.to_owned()))?;
        Ok(self.info(s))
    }

    pub fn playlist(&self, id: u32) -> Result<PlaylistSummary, StudyError> {
        self.config.playlist(id).ok_or(StudyError::UnknownPlaylist(id))?;
        Ok(PlaylistSummary {
            id,
            slots: SLOTS,
            training: self.config.training.clone(),
            completed_sessions: self.completed_counts()[&id],
        })
    }

    pub fn training_complete(&self, id: &str) -> Result<SessionInfo, StudyError> {
        let mut inner = self.lock();
        let now = self.clock.now_ms();
        let s = self.live(&inner, id, now)?;
        if s.state != SessionState::Training {
            return Err(StudyError::WrongState {
                expected: SessionState::Training,
                actual: s.state,
            });
        }
        let event = Event::TrainingComplete {
            session_id: id.to_owned(),
            at_ms: now,
        };
        inner.log.append(&event)?;
        apply(&mut inner, event);
        Ok(self.info(&inner.sessions[id]))
    }

    /// Issues the pending slot and starts its playback clock.
    pub fn next_item(&self, id: &str) -> Result<NextItem, StudyError> {
        let mut inner = self.lock();
        let now = self.clock.now_ms();
        let s = self.live(&inner, id, now)?;
        if s.state != SessionState::Rating {
            return Err(StudyError::WrongState {
                expected: SessionState::Rating,
                actual: s.state,
            });
        }
        let slot = s.next_slot;
        if slot >= s.order.len() {
            return Err(StudyError::NoPendingSlot);
        }
        let item = s.order[slot].item.clone();
        inner.issued.insert(id.to_owned(), (slot, now));
        Ok(NextItem {
            slot,
            stimulus_id: item.stimulus_id,
            reference: item.reference,
            distorted: item.distorted,
        })
    }

    pub fn submit_vote(&self, req: &VoteRequest) -> Result<VoteAck, StudyError> {
        let mut inner = self.lock();
        let now = self.clock.now_ms();
        let s = self.live(&inner, &req.session_id, now)?;
        if s.state != SessionState::Rating {
            return Err(StudyError::WrongState {
                expected: SessionState::Rating,
                actual: s.state,
            });
        }
        if req.slot < s.next_slot {
            return Err(StudyError::DuplicateVote { slot: req.slot });
        }
        if s.next_slot >= s.order.len() {
            return Err(StudyError::NoPendingSlot);
        }
        if req.slot > s.next_slot {
            return Err(StudyError::OutOfOrder {
                expected: s.next_slot,
                got: req.slot,
            });
        }
        let shown = &s.order[req.slot];
        if shown.item.stimulus_id != req.stimulus_id {
            return Err(StudyError::StimulusMismatch {
                slot: req.slot,
                expected: shown.item.stimulus_id.clone(),
            });
        }
        if !(1..=5).contains(&req.score) {
            return Err(StudyError::ScoreOutOfRange(req.score));
        }
        if !req.playback_complete {
            log::warn!("session {} slot {}: vote with incomplete playback rejected", req.session_id, req.slot);
            return Err(StudyError::PlaybackIncomplete);
        }
        let issued = match inner.issued.get(&req.session_id) {
            Some(&(slot, at)) if slot == req.slot => at,
            _ => return Err(StudyError::NotIssued { slot: req.slot }),
        };
        let elapsed = now.saturating_sub(issued);
        if elapsed < self.options.min_playback_ms {
            return Err(StudyError::PlaybackTooShort {
                elapsed_ms: elapsed,
                required_ms: self.options.min_playback_ms,
            });
        }
        let vote = VoteRecord {
            session_id: req.session_id.clone(),
            playlist_id: s.playlist_id,
            slot: req.slot,
            stimulus_id: req.stimulus_id.clone(),
            role: shown.role,
            score: req.score,
            latency_ms: elapsed,
            timestamp_ms: now,
            playback_complete: true,
        };
        let total = s.order.len();
        let event = Event::Vote(vote);
        inner.log.append(&event)?;
        apply(&mut inner, event);
        inner.issued.remove(&req.session_id);
        Ok(VoteAck {
            slot: req.slot,
            next_slot: req.slot + 1,
            remaining: total - req.slot - 1,
        })
    }

    pub fn complete_session(&self, id: &str) -> Result<String, StudyError> {
        let mut inner = self.lock();
        let now = self.clock.now_ms();
        let s = inner.sessions.get(id).ok_or_else(|| StudyError::UnknownSession(id.to_owned()))?;
        if let Some(code) = &s.code {
            return Ok(code.clone());
        }
        if self.expired(s, now) {
            return Err(StudyError::SessionExpired);
        }
        if s.next_slot < s.order.len() {
            return Err(StudyError::SessionIncomplete {
                voted: s.next_slot,
                total: s.order.len(),
            });
        }
        let code = completion_code(&self.options.secret, id);
        let event = Event::SessionComplete {
            session_id: id.to_owned(),
            code: code.clone(),
            at_ms: now,
        };
        inner.log.append(&event)?;
        apply(&mut inner, event);
        Ok(code)
    }

    /// Votes in store order, optionally restricted to one playlist.
    pub fn export(&self, playlist: Option<u32>) -> Vec<VoteRecord> {
        let inner = self.lock();
        inner.votes.iter().filter(|v| playlist.is_none_or(|p| v.playlist_id == p)).cloned().collect()
    }

    pub fn export_jsonl(&self, playlist: Option<u32>) -> String {
        self.export(playlist)
            .iter()
            .map(|v| serde_json::to_string(v).expect("plain data") + "\n")
            .collect()
    }
}

fn apply(inner: &mut Inner, event: Event) {
    match event {
        Event::SessionCreated {
            session_id,
            playlist_id,
            device,
            order,
            created_ms,
        } => {
            inner.sessions.insert(
                session_id.clone(),
                Session {
                    id: session_id,
                    playlist_id,
                    device,
                    order,
                    state: SessionState::Training,
                    created_ms,
                    next_slot: 0,
                    code: None,
                },
            );
        }
        Event::TrainingComplete { session_id, .. } => {
            if let Some(s) = inner.sessions.get_mut(&session_id) {
                s.state = SessionState::Rating;
            }
        }
        Event::Vote(v) => {
            if let Some(s) = inner.sessions.get_mut(&v.session_id) {
                s.next_slot = s.next_slot.max(v.slot + 1);
            }
            inner.votes.push(v);
        }
        Event::SessionComplete { session_id, code, .. } => {
            if let Some(s) = inner.sessions.get_mut(&session_id) {
                s.state = SessionState::Complete;
                s.code = Some(code);
            }
        }
    }
}
