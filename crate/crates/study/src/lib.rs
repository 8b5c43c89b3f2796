//! DSIS rating-session service: playlist assignment, golden-unit ordering, vote capture into
//! an append-only store, completion codes and vote export.

mod clock;
mod config;
mod http;
mod order;
mod service;
mod store;

pub use clock::{Clock, ManualClock, SystemClock};
pub use config::{
    safe_media_path, DeviceReport, GoldenUnits, Playlist, StudyConfig, StudyItem, MAX_PER_MODEL, MIN_HEIGHT, MIN_WIDTH, SLOTS,
    TEST_ITEMS, TRAINING_ITEMS,
};
pub use http::{router, serve, AppState};
pub use order::{order_is_valid, presentation_order, SlotItem};
pub use service::{
    completion_code, NextItem, PlaylistSummary, ServiceOptions, Session, SessionInfo, SessionState, StudyService, VoteAck,
    VoteRequest, DEFAULT_MIN_PLAYBACK_MS, SESSION_TTL_MS,
};
pub use store::{Event, EventLog};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StudyError {
    #[error("device {width}x{height} (fullscreen: {fullscreen}) does not meet 1920x1080 fullscreen")]
    DeviceIncompatible { width: u32, height: u32, fullscreen: bool },
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown playlist {0}")]
    UnknownPlaylist(u32),
    #[error("session is {actual:?}, expected {expected:?}")]
    WrongState { expected: SessionState, actual: SessionState },
    #[error("vote for slot {got} while slot {expected} is pending")]
    OutOfOrder { expected: usize, got: usize },
    #[error("slot {slot} already has a vote")]
    DuplicateVote { slot: usize },
    #[error("slot {slot} shows {expected}")]
    StimulusMismatch { slot: usize, expected: String },
    #[error("score {0} outside 1..=5")]
    ScoreOutOfRange(u8),
    #[error("playback was not completed")]
    PlaybackIncomplete,
    #[error("vote after {elapsed_ms} ms, playback needs {required_ms} ms")]
    PlaybackTooShort { elapsed_ms: u64, required_ms: u64 },
    #[error("slot {slot} was not issued; fetch the next item first")]
    NotIssued { slot: usize },
    #[error("{voted} of {total} slots voted")]
    SessionIncomplete { voted: usize, total: usize },
    #[error("every slot already has a vote")]
    NoPendingSlot,
    #[error("session expired")]
    SessionExpired,
    #[error("store: {0}")]
    Store(String),
    #[error("config: {0}")]
    Config(String),
}

impl StudyError {
    /// Stable machine-readable name used in HTTP error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            StudyError::DeviceIncompatible { .. } => "DeviceIncompatible",
            StudyError::UnknownSession(_) => "UnknownSession",
            StudyError::UnknownPlaylist(_) => "UnknownPlaylist",
            StudyError::WrongState { .. } => "WrongState",
            StudyError::OutOfOrder { .. } => "OutOfOrder",
            StudyError::DuplicateVote { .. } => "DuplicateVote",
            StudyError::StimulusMismatch { .. } => "StimulusMismatch",
            StudyError::ScoreOutOfRange(_) => "ScoreOutOfRange",
            StudyError::PlaybackIncomplete => "PlaybackIncomplete",
            StudyError::PlaybackTooShort { .. } => "PlaybackTooShort",
            StudyError::NotIssued { .. } => "NotIssued",
            StudyError::SessionIncomplete { .. } => "SessionIncomplete",
            StudyError::NoPendingSlot => "NoPendingSlot",
            StudyError::SessionExpired => "SessionExpired",
            StudyError::Store(_) => "Store",
            StudyError::Config(_) => "Config",
        }
    }
}
