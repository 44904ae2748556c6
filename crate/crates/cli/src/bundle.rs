//! A code bundle directory: `spec.json` (canonical spec), `assignment.json`
//! (coefficient tables) and `build_report.json`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use ssmds_core::codes::{assemble, Assignment, CodeSpec, ConstructedCode};
use ssmds_core::gf::Field;
use ssmds_core::verify::VerifyReport;

pub const SPEC_FILE: &str = "spec.json";
pub const ASSIGNMENT_FILE: &str = "assignment.json";
pub const REPORT_FILE: &str = "build_report.json";

pub struct Bundle {
    pub dir: PathBuf,
    pub code: ConstructedCode,
    pub spec_hash: [u8; 32],
}

pub fn spec_hash(spec: &CodeSpec) -> [u8; 32] {
    Sha256::digest(spec.canonical_json().as_bytes()).into()
}

impl Bundle {
    pub fn save(dir: &Path, code: &ConstructedCode, reports: &[VerifyReport]) -> Result<Bundle> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let write = |name: &str, text: String| {
            let path = dir.join(name);
            fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
        };
        write(SPEC_FILE, code.spec().canonical_json())?;
        write(ASSIGNMENT_FILE, serde_json::to_string_pretty(code.assignment())?)?;
        write(REPORT_FILE, serde_json::to_string_pretty(reports)?)?;
        Ok(Bundle { dir: dir.to_path_buf(), code: code.clone(), spec_hash: spec_hash(code.spec()) })
    }

    /// Rebuilds the code from the stored spec and tables.
    pub fn load(dir: &Path) -> Result<Bundle> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
        };
        let spec = CodeSpec::from_canonical_json(read(SPEC_FILE)?.trim())
            .with_context(|| format!("parsing {}", dir.join(SPEC_FILE).display()))?;
        let assignment: Assignment = serde_json::from_str(&read(ASSIGNMENT_FILE)?)
            .with_context(|| format!("parsing {}", dir.join(ASSIGNMENT_FILE).display()))?;
        let field = Field::new(spec.q as u64)?;
        let hash = spec_hash(&spec);
        let code = assemble(spec, field, assignment).context("assembling the stored code")?;
        Ok(Bundle { dir: dir.to_path_buf(), code, spec_hash: hash })
    }
}
