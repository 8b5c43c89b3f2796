use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use meshqa_study::{
    serve, AppState, ServiceOptions, StudyConfig, StudyService, SystemClock, DEFAULT_MIN_PLAYBACK_MS, SESSION_TTL_MS,
};

use crate::error::{read_text, CliError, CliResult};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Study config JSON, or a directory containing `study.json`.
    #[arg(long)]
    pub playlists: PathBuf,
    /// Root of the media served under `/media/`.
    #[arg(long)]
    pub media: Option<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Append-only vote log.
    #[arg(long, default_value = "votes.jsonl")]
    pub store: PathBuf,
    /// Key of the completion codes.
    #[arg(long, env = "MESHQA_SECRET", hide_env_values = true)]
    pub secret: String,
    #[arg(long, default_value_t = DEFAULT_MIN_PLAYBACK_MS)]
    pub min_playback_ms: u64,
}

fn load_config(path: &Path) -> CliResult<StudyConfig> {
    let file = if path.is_dir() { path.join("study.json") } else { path.to_path_buf() };
    StudyConfig::from_json(&read_text(&file)?).map_err(|e| CliError::data(file.display(), e))
}

pub fn run(args: Args) -> CliResult<()> {
    let config = load_config(&args.playlists)?;
    if let Some(m) = &args.media {
        if !m.is_dir() {
            return Err(CliError::Usage(format!("{}: not a directory", m.display())));
        }
    }
    let options = ServiceOptions {
        secret: args.secret.into_bytes(),
        min_playback_ms: args.min_playback_ms,
        session_ttl_ms: SESSION_TTL_MS,
    };
    let service = StudyService::open(config, &args.store, options, Arc::new(SystemClock))?;
    let state = AppState {
        service: Arc::new(service),
        media_root: args.media.clone(),
    };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::data("runtime", e))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .map_err(|e| CliError::Usage(format!("bind {}:{}: {e}", args.host, args.port)))?;
        let addr = listener.local_addr().map_err(|e| CliError::data("listener", e))?;
        let mut stdout = std::io::stdout();
        let _ = writeln!(stdout, "listening on http://{addr}");
        let _ = stdout.flush();
        serve(listener, state).await.map_err(|e| CliError::data("server", e))
    })
}
