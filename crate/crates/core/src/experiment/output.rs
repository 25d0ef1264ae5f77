//! Artifact directory: every CSV starts with `# key=value` header lines that
//! carry the library version and the config hash; files written by a failed
//! run are removed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::path::write_meta;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Name of the per-run manifest listing the artifacts.
pub const MANIFEST: &str = "manifest.csv";

pub struct OutputSet {
    dir: PathBuf,
    header: Vec<(&'static str, String)>,
    written: Vec<PathBuf>,
    created_dir: bool,
    previous_hash: Option<String>,
}

impl OutputSet {
    pub fn create(dir: &Path, header: Vec<(&'static str, String)>) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        let previous_hash = read_hash(&dir.join(MANIFEST));
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
            written: Vec::new(),
            created_dir,
            previous_hash,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Config hash recorded by an earlier run in the same directory.
    pub fn previous_hash(&self) -> Option<&str> {
        self.previous_hash.as_deref()
    }

    pub fn header(&self) -> &[(&'static str, String)] {
        &self.header
    }

    /// Writes `name` with the run header followed by `body`.
    pub fn write<F>(&mut self, name: &str, extra: &[(&str, String)], body: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        let mut w = BufWriter::new(File::create(&path)?);
        let meta: Vec<(&str, String)> = self
            .header
            .iter()
            .map(|(k, v)| (*k, v.clone()))
            .chain(extra.iter().map(|(k, v)| (*k, v.clone())))
            .collect();
        write_meta(&mut w, &meta)?;
        body(&mut w)?;
        w.flush()?;
        Ok(path)
    }

    /// Writes the manifest and returns the artifact paths.
    pub fn finish(mut self) -> Result<Vec<PathBuf>> {
        let files: Vec<String> = self
            .written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        self.write(MANIFEST, &[], |w| {
            writeln!(w, "file")?;
            for f in &files {
                writeln!(w, "{f}")?;
            }
            Ok(())
        })?;
        Ok(std::mem::take(&mut self.written))
    }

    /// Removes everything written so far.
    pub fn discard(mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn read_hash(manifest: &Path) -> Option<String> {
    let text = fs::read_to_string(manifest).ok()?;
    text.lines()
        .find_map(|l| l.strip_prefix("# config_hash="))
        .map(str::to_string)
}
