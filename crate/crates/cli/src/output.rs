use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// A file to be written once the experiment has finished.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
    /// Shown after the path in the one-line summary.
    pub summary: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>, summary: impl Into<String>) -> Self {
        Self { name: name.into(), bytes, summary: summary.into() }
    }

    /// Renders through a `Write`-based serializer.
    pub fn render<F>(name: &str, summary: impl Into<String>, f: F) -> Result<Self, CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut bytes = Vec::new();
        f(&mut bytes)?;
        Ok(Self::new(name, bytes, summary))
    }
}

/// Writes `bytes` to `path` through a temporary sibling and a rename, so a
/// reader never sees a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

/// Writes the artifacts one after another and prints a summary line for
/// each. Returns the written paths.
pub fn emit(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = dir.join(&a.name);
        write_atomic(&path, &a.bytes)?;
        println!("wrote {} ({})", path.display(), a.summary);
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/a.csv");
        write_atomic(&path, b"x,y\n1,2\n").unwrap();
        write_atomic(&path, b"x,y\n3,4\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"x,y\n3,4\n");
        let names: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }
}
