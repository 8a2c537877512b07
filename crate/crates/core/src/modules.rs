//! URL-addressed modules: resolution, fetching, caching, and the
//! translation of `"url" => G` into nested clause hypotheses.
//!
//! Resolution order for a URL:
//! 1. registered mappings, longest matching prefix first (later
//!    registrations shadow earlier ones for the same pattern);
//! 2. the search path (`LINWEB_PATH`), looking for a file named by the URL;
//! 3. HTTP GET, when enabled. Bare URLs get an `http://` prefix.

use std::collections::HashMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use thiserror::Error;

use crate::syntax::{parse_program, DFormula, GFormula, ParseError, SourceModule};

pub const FETCH_TIMEOUT: Duration = Duration::from_secs(10);
pub const MAX_MODULE_BYTES: u64 = 1 << 20;
pub const MAX_REDIRECTS: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuleError {
    #[error("cannot resolve module {url}: no mapping, search-path entry or fetcher")]
    Resolution { url: String },
    #[error("cannot fetch module {url}: {reason}")]
    Fetch { url: String, reason: String },
    #[error("{url}:{source}")]
    Parse { url: String, source: ParseError },
    #[error("module fetched for {url} declares mod(\"{declared}\")")]
    Mismatch { url: String, declared: String },
}

/// Anything that can turn a URL into a module's clauses.
pub trait ModuleLoader: Send + Sync {
    fn load_module(&self, url: &str) -> Result<Arc<[DFormula]>, ModuleError>;
}

/// A loader that knows no modules.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoModules;

impl ModuleLoader for NoModules {
    fn load_module(&self, url: &str) -> Result<Arc<[DFormula]>, ModuleError> {
        Err(ModuleError::Resolution {
            url: url.to_string(),
        })
    }
}

/// Where a mapped URL pattern points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Locator {
    File(PathBuf),
    Http(String),
}

impl Locator {
    pub fn parse(s: &str) -> Locator {
        if s.starts_with("http://") || s.starts_with("https://") {
            Locator::Http(s.trim_end_matches('/').to_string())
        } else {
            Locator::File(PathBuf::from(s))
        }
    }
}

type CacheSlot = Arc<Mutex<Option<Arc<[DFormula]>>>>;

pub struct ModuleRegistry {
    mappings: RwLock<Vec<(String, Locator)>>,
    search_path: Vec<PathBuf>,
    http: Option<ureq::Agent>,
    cache: Mutex<HashMap<String, CacheSlot>>,
    fetches: AtomicUsize,
}

impl Default for ModuleRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for ModuleRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModuleRegistry")
            .field("mappings", &*self.mappings.read().unwrap())
            .field("search_path", &self.search_path)
            .field("http", &self.http.is_some())
            .finish()
    }
}

impl ModuleRegistry {
    /// Offline registry: mappings only.
    pub fn new() -> Self {
        ModuleRegistry {
            mappings: RwLock::new(Vec::new()),
            search_path: Vec::new(),
            http: None,
            cache: Mutex::new(HashMap::new()),
            fetches: AtomicUsize::new(0),
        }
    }

    pub fn with_search_path(mut self, dirs: impl IntoIterator<Item = PathBuf>) -> Self {
        self.search_path.extend(dirs);
        self
    }

    /// Adds the directories listed in `LINWEB_PATH`.
    pub fn with_env_search_path(self) -> Self {
        match std::env::var_os("LINWEB_PATH") {
            Some(v) => {
                let dirs: Vec<_> = std::env::split_paths(&v).collect();
                self.with_search_path(dirs)
            }
            None => self,
        }
    }

    pub fn with_http(mut self) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(FETCH_TIMEOUT))
            .max_redirects(MAX_REDIRECTS)
            .http_status_as_error(false)
            .build();
        self.http = Some(config.into());
        self
    }

    pub fn register_mapping(&self, pattern: &str, locator: &str) {
        assert!(!pattern.is_empty(), "mapping pattern must be nonempty");
        self.mappings
            .write()
            .unwrap()
            .push((pattern.to_string(), Locator::parse(locator)));
    }

    /// Reads `url<TAB>path` lines. Relative paths are taken relative to the
    /// map file's directory; blank lines and `%` comments are skipped.
    pub fn load_map_file(&self, path: &Path) -> Result<usize, ModuleError> {
        let text = fs::read_to_string(path).map_err(|e| ModuleError::Fetch {
            url: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut n = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('%') {
                continue;
            }
            let Some((url, target)) = line.split_once('\t') else {
                return Err(ModuleError::Fetch {
                    url: path.display().to_string(),
                    reason: format!("line {}: expected `url<TAB>path`", lineno + 1),
                });
            };
            let target = target.trim();
            let locator = match Locator::parse(target) {
                Locator::File(p) if p.is_relative() => base.join(p).display().to_string(),
                _ => target.to_string(),
            };
            self.register_mapping(url.trim(), &locator);
            n += 1;
        }
        Ok(n)
    }

    /// Number of successful fetch-and-parse operations so far.
    pub fn fetch_count(&self) -> usize {
        self.fetches.load(Ordering::SeqCst)
    }

    fn resolve_mapping(&self, url: &str) -> Option<Locator> {
        let mappings = self.mappings.read().unwrap();
        let mut best: Option<(usize, &Locator, &str)> = None;
        for (pattern, locator) in mappings.iter() {
            let Some(rest) = url.strip_prefix(pattern.as_str()) else {
                continue;
            };
            let boundary = rest.is_empty() || pattern.ends_with('/') || rest.starts_with('/');
            if !boundary {
                continue;
            }
            // `>=` so that a later registration of an equal pattern wins
            if best.is_none_or(|(len, _, _)| pattern.len() >= len) {
                best = Some((pattern.len(), locator, rest.trim_start_matches('/')));
            }
        }
        best.map(|(_, locator, rest)| match locator {
            Locator::File(p) if rest.is_empty() => Locator::File(p.clone()),
            Locator::File(p) => {
                let direct = p.join(rest);
                if direct.exists() {
                    Locator::File(direct)
                } else {
                    Locator::File(p.join(format!("{rest}.lw")))
                }
            }
            Locator::Http(base) if rest.is_empty() => Locator::Http(base.clone()),
            Locator::Http(base) => Locator::Http(format!("{base}/{rest}")),
        })
    }

    fn resolve(&self, url: &str) -> Result<Locator, ModuleError> {
        if let Some(loc) = self.resolve_mapping(url) {
            return Ok(loc);
        }
        let bare = strip_scheme(url);
        for dir in &self.search_path {
            for candidate in [dir.join(bare), dir.join(format!("{bare}.lw"))] {
                if candidate.is_file() {
                    return Ok(Locator::File(candidate));
                }
            }
        }
        if self.http.is_some() {
            let full = if url.starts_with("http://") || url.starts_with("https://") {
                url.to_string()
            } else {
                format!("http://{url}")
            };
            return Ok(Locator::Http(full));
        }
        Err(ModuleError::Resolution {
            url: url.to_string(),
        })
    }

    fn fetch(&self, url: &str, locator: &Locator) -> Result<String, ModuleError> {
        let fail = |reason: String| ModuleError::Fetch {
            url: url.to_string(),
            reason,
        };
        match locator {
            Locator::File(path) => {
                let file =
                    fs::File::open(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
                let mut text = String::new();
                file.take(MAX_MODULE_BYTES + 1)
                    .read_to_string(&mut text)
                    .map_err(|e| fail(format!("{}: {e}", path.display())))?;
                if text.len() as u64 > MAX_MODULE_BYTES {
                    return Err(fail(format!("module larger than {MAX_MODULE_BYTES} bytes")));
                }
                Ok(text)
            }
            Locator::Http(target) => {
                let Some(agent) = &self.http else {
                    return Err(fail("HTTP fetching is disabled".to_string()));
                };
                let mut resp = agent
                    .get(target)
                    .header("Accept", "text/plain")
                    .call()
                    .map_err(|e| fail(e.to_string()))?;
                let status = resp.status().as_u16();
                if status >= 400 {
                    return Err(fail(format!("HTTP status {status} from {target}")));
                }
                resp.body_mut()
                    .with_config()
                    .limit(MAX_MODULE_BYTES)
                    .read_to_string()
                    .map_err(|e| fail(e.to_string()))
            }
        }
    }

    fn fetch_and_parse(&self, url: &str) -> Result<SourceModule, ModuleError> {
        let locator = self.resolve(url)?;
        let text = self.fetch(url, &locator)?;
        let module = parse_program(&text).map_err(|source| ModuleError::Parse {
            url: url.to_string(),
            source,
        })?;
        match &module.url {
            Some(declared) if strip_scheme(declared) != strip_scheme(url) => {
                return Err(ModuleError::Mismatch {
                    url: url.to_string(),
                    declared: declared.clone(),
                })
            }
            Some(_) => {}
            None => log::warn!("module {url} has no mod declaration; using the requested URL"),
        }
        Ok(module)
    }

    /// Loads a module's clauses in source order, fetching at most once per
    /// URL for the lifetime of the registry.
    pub fn load(&self, url: &str) -> Result<Arc<[DFormula]>, ModuleError> {
        if url.is_empty() {
            return Err(ModuleError::Resolution { url: String::new() });
        }
        let slot = {
            let mut cache = self.cache.lock().unwrap();
            cache.entry(url.to_string()).or_default().clone()
        };
        // Concurrent first requests for one URL serialize here, so the
        // module is parsed exactly once.
        let mut guard = slot.lock().unwrap();
        if let Some(clauses) = &*guard {
            return Ok(clauses.clone());
        }
        let module = self.fetch_and_parse(url)?;
        let clauses: Arc<[DFormula]> = module.clauses.into();
        self.fetches.fetch_add(1, Ordering::SeqCst);
        *guard = Some(clauses.clone());
        Ok(clauses)
    }
}

impl ModuleLoader for ModuleRegistry {
    fn load_module(&self, url: &str) -> Result<Arc<[DFormula]>, ModuleError> {
        self.load(url)
    }
}

fn strip_scheme(url: &str) -> &str {
    url.strip_prefix("http://")
        .or_else(|| url.strip_prefix("https://"))
        .unwrap_or(url)
}

/// Wraps `goal` in one hypothesis per clause so that, with the most recent
/// hypothesis scanned first, the module's clauses are scanned in source
/// order: the last clause is assumed outermost, the first innermost.
pub fn elaborate(clauses: &[DFormula], goal: GFormula) -> GFormula {
    clauses.iter().fold(goal, |g, d| {
        GFormula::Assume(Arc::new(d.clone()), Arc::new(g))
    })
}

/// Loads `url` and returns the elaborated goal.
pub fn elaborate_load(
    loader: &dyn ModuleLoader,
    url: &str,
    goal: GFormula,
) -> Result<GFormula, ModuleError> {
    let clauses = loader.load_module(url)?;
    Ok(elaborate(&clauses, goal))
}
