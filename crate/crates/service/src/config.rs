use std::path::PathBuf;
use std::time::Duration;

use stillmotion::inpaint::InpaintConfig;
use stillmotion::pipeline::MeshDensity;
use stillmotion::render::Sampling;
use stillmotion::segmentation::SegmentationConfig;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(30 * 60);
pub const DEFAULT_MAX_IMAGE_BYTES: usize = 32 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    /// Sessions idle for longer than this are dropped.
    pub session_ttl: Duration,
    /// Upload size cap in bytes.
    pub max_image_bytes: usize,
    /// Where sessions are mirrored for crash recovery, if anywhere.
    pub persist_dir: Option<PathBuf>,
    /// Parameters for the pipeline steps. Defaults match the CLI's, so
    /// identical inputs give identical artifacts.
    pub segmentation: SegmentationConfig,
    pub inpaint: InpaintConfig,
    pub mesh: MeshDensity,
    pub sampling: Sampling,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            session_ttl: DEFAULT_SESSION_TTL,
            max_image_bytes: DEFAULT_MAX_IMAGE_BYTES,
            persist_dir: None,
            segmentation: SegmentationConfig::default(),
            inpaint: InpaintConfig::default(),
            mesh: MeshDensity::default(),
            sampling: Sampling::default(),
        }
    }
}

impl ServiceConfig {
    /// Reads `PORT`, `SESSION_TTL_SECS`, `MAX_IMAGE_BYTES` and
    /// `SESSION_DIR` from the process environment.
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        fn parse<T: std::str::FromStr>(key: &str, value: Option<String>) -> Result<Option<T>, String> {
            value
                .map(|v| v.trim().parse().map_err(|_| format!("{key} is not a valid number: {v:?}")))
                .transpose()
        }
        let mut cfg = Self::default();
        if let Some(port) = parse("PORT", get("PORT"))? {
            cfg.port = port;
        }
        if let Some(secs) = parse::<u64>("SESSION_TTL_SECS", get("SESSION_TTL_SECS"))? {
            if secs == 0 {
                return Err("SESSION_TTL_SECS must be positive".to_owned());
            }
            cfg.session_ttl = Duration::from_secs(secs);
        }
        if let Some(bytes) = parse("MAX_IMAGE_BYTES", get("MAX_IMAGE_BYTES"))? {
            cfg.max_image_bytes = bytes;
        }
        cfg.persist_dir = get("SESSION_DIR").filter(|s| !s.is_empty()).map(PathBuf::from);
        Ok(cfg)
    }
}
