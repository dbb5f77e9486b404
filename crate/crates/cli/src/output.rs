use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Files of one run, written only after every computation has succeeded.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// Each file goes to a temp file in `dir` and is renamed into place.
    pub fn commit(self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        for (name, bytes) in self.files {
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(&bytes).map_err(io)?;
            tmp.as_file().sync_all().map_err(io)?;
            tmp.persist(dir.join(&name))
                .map_err(|e| CliError::Io(format!("{}: {}", dir.join(&name).display(), e.error)))?;
        }
        Ok(())
    }
}
