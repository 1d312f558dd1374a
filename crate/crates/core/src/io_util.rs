//! File helpers shared by the on-disk formats: atomic writes, line readers
//! and the `key=value` settings format used by rule sets and manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let tmp = temp_sibling(path);
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp{}", std::process::id()))
}

pub fn read_to_string(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a UTF-8 file as one entry per line. A trailing newline does not
/// produce an extra empty line.
pub fn read_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let text = read_to_string(path)?;
    Ok(text.lines().map(str::to_owned).collect())
}

pub fn write_lines<S: AsRef<str>>(path: impl AsRef<Path>, lines: &[S]) -> Result<()> {
    let mut out = String::new();
    for line in lines {
        out.push_str(line.as_ref());
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Parses `key=value` lines. Blank lines and lines starting with `#` are
/// ignored; duplicate keys are an error.
pub fn parse_key_values(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::format(
                origin,
                format!("line {}: expected key=value, got {line:?}", lineno + 1),
            ));
        };
        let key = key.trim().to_owned();
        if map.insert(key.clone(), value.trim().to_owned()).is_some() {
            return Err(Error::format(
                origin,
                format!("line {}: duplicate key {key:?}", lineno + 1),
            ));
        }
    }
    Ok(map)
}

pub fn parse_bool(value: &str) -> Option<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Some(true),
        "false" | "off" | "no" | "0" => Some(false),
        _ => None,
    }
}

/// Removes and parses a required key, reporting errors against `origin`.
pub fn take<T: std::str::FromStr>(map: &mut BTreeMap<String, String>, key: &str, origin: &Path) -> Result<T> {
    let value = map
        .remove(key)
        .ok_or_else(|| Error::format(origin, format!("missing key {key:?}")))?;
    value
        .parse()
        .map_err(|_| Error::format(origin, format!("invalid value {value:?} for {key:?}")))
}

/// Fails if any key was left unconsumed.
pub fn reject_unknown(map: &BTreeMap<String, String>, origin: &Path) -> Result<()> {
    if let Some(key) = map.keys().next() {
        return Err(Error::format(origin, format!("unknown key {key:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_skip_comments_and_reject_duplicates() {
        let origin = Path::new("t");
        let map = parse_key_values("# c\n\na = 1\nb=x=y\n", origin).unwrap();
        assert_eq!(map["a"], "1");
        assert_eq!(map["b"], "x=y");
        assert!(parse_key_values("a=1\na=2\n", origin).is_err());
        assert!(parse_key_values("novalue\n", origin).is_err());
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }
}
