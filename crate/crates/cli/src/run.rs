use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{Context as _, Result};
use xxhash_rust::xxh3::xxh3_64;

use crate::config::Config;

/// One subcommand invocation: the settings it resolved, the inputs it read
/// and the outputs it will write.
///
/// Outputs embed the deterministic part of the manifest as `#` lines. A
/// sidecar `.manifest` file adds what varies between identical runs.
pub struct Run {
    command: &'static str,
    config: Config,
    params: Vec<(String, String)>,
    inputs: Vec<(String, String)>,
    outputs: Vec<(PathBuf, Vec<u8>)>,
    sidecar: Option<PathBuf>,
    workers: usize,
    started: Instant,
}

impl Run {
    pub fn new(command: &'static str, config: Config, workers: usize) -> Run {
        Run {
            command,
            config,
            params: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            sidecar: None,
            workers,
            started: Instant::now(),
        }
    }

    /// Resolves a setting and records it in the manifest.
    pub fn param<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.config.pick(key, flag, default)?;
        self.note(key, &v);
        Ok(v)
    }

    /// Records a value that is not a config setting.
    pub fn note(&mut self, key: &str, v: &dyn Display) {
        self.params.push((key.to_string(), v.to_string()));
    }

    /// Reads an input file, recording its name and content hash.
    pub fn read(&mut self, role: &str, path: &Path) -> Result<String> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.record_input(role, path, text.as_bytes());
        Ok(text)
    }

    /// Records an input another function will read. Missing files are
    /// skipped.
    pub fn hash_input(&mut self, role: &str, path: &Path) -> Result<()> {
        if !path.exists() {
            return Ok(());
        }
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.record_input(role, path, &bytes);
        Ok(())
    }

    fn record_input(&mut self, role: &str, path: &Path, bytes: &[u8]) {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.inputs.push((
            role.to_string(),
            format!("{name} xxh3:{:016x}", xxh3_64(bytes)),
        ));
    }

    /// The deterministic manifest lines, without the `# ` prefix.
    pub fn header(&self) -> Vec<String> {
        let mut out = vec![format!(
            "featlets {} {}",
            env!("CARGO_PKG_VERSION"),
            self.command
        )];
        out.extend(self.params.iter().map(|(k, v)| format!("{k} = {v}")));
        out.extend(self.inputs.iter().map(|(k, v)| format!("input {k} = {v}")));
        out
    }

    pub fn output(&mut self, path: impl Into<PathBuf>, content: impl Into<Vec<u8>>) {
        let path = path.into();
        if self.sidecar.is_none() {
            let mut s = path.clone().into_os_string();
            s.push(".manifest");
            self.sidecar = Some(s.into());
        }
        self.outputs.push((path, content.into()));
    }

    /// Where the sidecar manifest goes when the outputs share a directory.
    pub fn manifest_in(&mut self, dir: &Path) {
        self.sidecar = Some(dir.join(format!("{}.manifest", self.command)));
    }

    /// Writes every output through a temporary file and renames it into
    /// place. On failure, whatever was already written is removed.
    pub fn commit(mut self) -> Result<()> {
        if let Some(side) = self.sidecar.take() {
            let mut text = String::new();
            for h in self.header() {
                text.push_str(&h);
                text.push('\n');
            }
            for (p, _) in &self.outputs {
                text.push_str(&format!("output = {}\n", p.display()));
            }
            text.push_str(&format!("workers = {}\n", self.workers));
            text.push_str(&format!(
                "wall_clock_secs = {:.3}\n",
                self.started.elapsed().as_secs_f64()
            ));
            self.outputs.push((side, text.into_bytes()));
        }
        let mut done: Vec<&Path> = Vec::new();
        for (path, bytes) in &self.outputs {
            if let Err(e) = write_atomic(path, bytes) {
                for p in done {
                    let _ = fs::remove_file(p);
                }
                return Err(e);
            }
            done.push(path);
        }
        Ok(())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let res = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.with_context(|| format!("writing {}", path.display()))
}

/// Prefixes each header line with `# `.
pub fn with_header(header: &[String], body: &str) -> String {
    let mut out = String::new();
    for h in header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    out.push_str(body);
    out
}
