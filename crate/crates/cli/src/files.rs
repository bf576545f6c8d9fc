//! Instance directories: `A.txt`, `V.txt` and `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use gapmm::generate::{Instance, Manifest};
use gapmm::symmat::{format_matrix, parse_matrix};

use crate::Failure;

pub const MANIFEST: &str = "manifest.json";

pub fn write_instance(dir: &Path, inst: &Instance) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let manifest = serde_json::to_string_pretty(&inst.manifest()).expect("manifest serializes") + "\n";
    for (name, text) in [
        ("A.txt", format_matrix(&inst.a)),
        ("V.txt", format_matrix(&inst.v)),
        (MANIFEST, manifest),
    ] {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

pub fn read_instance(dir: &Path) -> Result<Instance, Failure> {
    let manifest_path = dir.join(MANIFEST);
    let manifest: Manifest = serde_json::from_str(&read_text(&manifest_path)?).map_err(|e| {
        Failure::Usage(format!(
            "{}: parse error at line {}, column {}: {e}",
            manifest_path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let matrix = |name: &str| {
        let path = dir.join(name);
        parse_matrix(&read_text(&path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    };
    let (a, v) = (matrix("A.txt")?, matrix("V.txt")?);
    Instance::from_parts(manifest, a, v).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))
}

/// A single instance directory, or every instance directory directly below `dir`.
pub fn read_instances(dir: &Path) -> Result<Vec<Instance>, Failure> {
    if dir.join(MANIFEST).is_file() {
        return Ok(vec![read_instance(dir)?]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(MANIFEST).is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Failure::Usage(format!("{}: no instances found", dir.display())));
    }
    dirs.iter().map(|d| read_instance(d)).collect()
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Failure::io(parent, e))?;
            }
            fs::write(p, text).map_err(|e| Failure::io(p, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
