use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Run parameters and outcomes; written sorted by key.
pub type Manifest = BTreeMap<String, String>;

pub fn write_manifest(path: &Path, m: &Manifest) -> Result<()> {
    let mut text = String::new();
    for (k, v) in m {
        if k.contains('=') || k.contains('\n') || v.contains('\n') {
            return Err(Error::Parse(format!("manifest entry `{k}` cannot be written")));
        }
        text.push_str(k);
        text.push('=');
        text.push_str(v);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    let mut m = Manifest::new();
    for (no, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("manifest line {} has no `=`", no + 1)))?;
        m.insert(k.to_string(), v.to_string());
    }
    Ok(m)
}
