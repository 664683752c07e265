//! `key=value` config files. Keys are flag names without the leading dashes;
//! `#` starts a comment. Values from the file only fill flags left unset.

use std::collections::BTreeMap;
use std::path::Path;

pub fn read(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got {raw:?}", n + 1))?;
        let key = k.trim().trim_start_matches('-').replace('_', "-");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(format!("config line {}: duplicate key {key:?}", n + 1));
        }
    }
    Ok(out)
}
