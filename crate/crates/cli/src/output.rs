//! Artifact files and the sidecar metadata that accompanies them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sagnac_core::modes::GridSpec;
use sagnac_core::render::ImageFormat;

use crate::Failure;

pub struct Artifacts {
    dir: PathBuf,
    command: String,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Model(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        if self.written.iter().any(|w| w == name) {
            return Err(Failure::Usage(format!("output {name} requested twice")));
        }
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| Failure::Model(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn image_name(stem: &str, format: ImageFormat) -> String {
        format!("{stem}.{}", format.extension())
    }

    /// Versions, invocation and artifact list; nothing time-dependent.
    pub fn finish(
        mut self,
        args: &[String],
        grid: Option<&GridSpec>,
        w0: f64,
    ) -> Result<(), Failure> {
        let mut meta = String::new();
        writeln!(meta, "sagnac-cli {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(meta, "sagnac-core {}", sagnac_core::VERSION).unwrap();
        writeln!(meta, "command {}", self.command).unwrap();
        writeln!(meta, "args {}", args.join(" ")).unwrap();
        if let Some(g) = grid {
            writeln!(
                meta,
                "grid samples={} half_width_w0={} w0_m={:e}",
                g.samples_per_side(),
                g.half_width() / w0,
                w0
            )
            .unwrap();
        }
        for name in &self.written {
            writeln!(meta, "artifact {name}").unwrap();
        }
        let name = format!("{}.meta", self.command);
        self.write(&name, meta.as_bytes()).map(|_| ())
    }
}
