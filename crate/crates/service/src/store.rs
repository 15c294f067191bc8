//! In-memory sessions with idle expiry and optional on-disk mirroring.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime};

use stillmotion::imagecore::{load_image, save_image};
use stillmotion::meshanim::AnimationSpec;
use stillmotion::{ClickSet, ImageBuffer, Mask};

/// State of one interactive session. Derived artifacts are either absent
/// or consistent with `clicks`.
#[derive(Debug, Clone)]
pub struct Session {
    pub image: Arc<ImageBuffer>,
    pub clicks: Option<ClickSet>,
    pub mask: Option<Arc<Mask>>,
    /// Inpainted plate for the current mask.
    pub plate: Option<Arc<ImageBuffer>>,
    pub spec: Option<AnimationSpec>,
    pub created_at: SystemTime,
}

impl Session {
    pub fn new(image: ImageBuffer) -> Self {
        Self {
            image: Arc::new(image),
            clicks: None,
            mask: None,
            plate: None,
            spec: None,
            created_at: SystemTime::now(),
        }
    }

    /// Replaces clicks and mask and drops the now stale plate.
    pub fn set_mask(&mut self, clicks: ClickSet, mask: Mask) {
        self.clicks = Some(clicks);
        self.mask = Some(Arc::new(mask));
        self.plate = None;
    }
}

pub type SessionHandle = Arc<tokio::sync::Mutex<Session>>;

struct Entry {
    session: SessionHandle,
    last_used: Instant,
}

pub struct SessionStore {
    entries: Mutex<HashMap<String, Entry>>,
    ttl: Duration,
    persist: Option<PathBuf>,
}

const IMAGE_FILE: &str = "image.png";
const CLICKS_FILE: &str = "clicks.json";
const MASK_FILE: &str = "mask.png";
const SPEC_FILE: &str = "spec.json";

impl SessionStore {
    pub fn new(ttl: Duration, persist: Option<PathBuf>) -> Self {
        Self {
            entries: Mutex::new(HashMap::new()),
            ttl,
            persist,
        }
    }

    /// Reloads every session mirrored under `persist`. Unreadable entries
    /// are skipped.
    pub fn restore(&self) -> usize {
        let Some(dir) = &self.persist else { return 0 };
        let Ok(listing) = std::fs::read_dir(dir) else { return 0 };
        let mut restored = 0;
        for entry in listing.flatten() {
            let path = entry.path();
            let Some(id) = path.file_name().and_then(|n| n.to_str()).map(str::to_owned) else {
                continue;
            };
            if let Some(session) = read_session(&path) {
                self.insert_with_id(id, session);
                restored += 1;
            }
        }
        restored
    }

    pub fn insert(&self, session: Session) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.save(&id, &session);
        self.insert_with_id(id.clone(), session);
        id
    }

    fn insert_with_id(&self, id: String, session: Session) {
        let entry = Entry {
            session: Arc::new(tokio::sync::Mutex::new(session)),
            last_used: Instant::now(),
        };
        self.entries.lock().expect("store lock").insert(id, entry);
    }

    /// The live session for `id`, refreshing its idle timer.
    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        let mut entries = self.entries.lock().expect("store lock");
        let now = Instant::now();
        let expired = entries.get(id).is_some_and(|e| now.duration_since(e.last_used) > self.ttl);
        if expired {
            entries.remove(id);
            self.forget(id);
            return None;
        }
        let entry = entries.get_mut(id)?;
        entry.last_used = now;
        Some(entry.session.clone())
    }

    pub fn remove(&self, id: &str) -> bool {
        let removed = self.entries.lock().expect("store lock").remove(id).is_some();
        if removed {
            self.forget(id);
        }
        removed
    }

    /// Drops every session idle for longer than the TTL; returns how many.
    pub fn sweep(&self) -> usize {
        let now = Instant::now();
        let mut entries = self.entries.lock().expect("store lock");
        let stale: Vec<String> = entries
            .iter()
            .filter(|(_, e)| now.duration_since(e.last_used) > self.ttl)
            .map(|(id, _)| id.clone())
            .collect();
        for id in &stale {
            entries.remove(id);
            self.forget(id);
        }
        stale.len()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mirrors `session` to disk when persistence is on. Failures are
    /// reported and otherwise ignored; the in-memory copy stays authoritative.
    pub fn save(&self, id: &str, session: &Session) {
        let Some(root) = &self.persist else { return };
        if let Err(e) = write_session(&root.join(id), session) {
            eprintln!("warning: could not persist session {id}: {e}");
        }
    }

    fn forget(&self, id: &str) {
        if let Some(root) = &self.persist {
            let _ = std::fs::remove_dir_all(root.join(id));
        }
    }
}

fn write_session(dir: &Path, session: &Session) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let image_path = dir.join(IMAGE_FILE);
    if !image_path.exists() {
        save_image(&session.image, &image_path).map_err(|e| e.to_string())?;
    }
    if let (Some(clicks), Some(mask)) = (&session.clicks, &session.mask) {
        std::fs::write(dir.join(CLICKS_FILE), clicks.to_json()).map_err(|e| e.to_string())?;
        save_image(&mask.to_image(), &dir.join(MASK_FILE)).map_err(|e| e.to_string())?;
    }
    if let Some(spec) = &session.spec {
        let json = serde_json::to_string(spec).map_err(|e| e.to_string())?;
        std::fs::write(dir.join(SPEC_FILE), json).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn read_session(dir: &Path) -> Option<Session> {
    let mut session = Session::new(load_image(&dir.join(IMAGE_FILE)).ok()?);
    if let Ok(created) = std::fs::metadata(dir).and_then(|m| m.created().or_else(|_| m.modified())) {
        session.created_at = created;
    }
    let clicks = std::fs::read_to_string(dir.join(CLICKS_FILE))
        .ok()
        .and_then(|s| ClickSet::from_json(&s).ok());
    let mask = load_image(&dir.join(MASK_FILE)).ok().map(|m| Mask::from_image(&m));
    if let (Some(clicks), Some(mask)) = (clicks, mask) {
        if mask.dimensions() == session.image.dimensions() {
            session.set_mask(clicks, mask);
        }
    }
    session.spec = std::fs::read_to_string(dir.join(SPEC_FILE))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok());
    Some(session)
}
