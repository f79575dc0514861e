use std::path::Path;

use serde::Serialize;

use hlmkit::Error;

pub fn write_bytes(path: &Path, bytes: &[u8]) -> hlmkit::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> hlmkit::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> hlmkit::Result<()> {
    let mut buf = Vec::new();
    hlmkit::formats::write_jsonl(&mut buf, items).expect("writing to memory");
    write_bytes(path, &buf)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> hlmkit::Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        source_name: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}
