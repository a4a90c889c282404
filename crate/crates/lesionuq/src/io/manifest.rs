//! JSON-lines manifest: one `{"id", "class", "stack", "gt"}` object per line.
//! Relative `stack` and `gt` paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use lesionuq_core::ClassLabel;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRecord {
    pub id: String,
    pub class: ClassLabel,
    /// As written in the manifest.
    pub stack: String,
    pub gt: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    /// Directory relative entries are resolved against.
    pub base: PathBuf,
    pub records: Vec<ImageRecord>,
}

impl Manifest {
    pub fn stack_path(&self, record: &ImageRecord) -> PathBuf {
        self.base.join(&record.stack)
    }

    pub fn gt_path(&self, record: &ImageRecord) -> PathBuf {
        self.base.join(&record.gt)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Parses manifest text; `path` labels errors and supplies the base directory.
pub fn parse_manifest(text: &str, path: &Path) -> Result<Manifest> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line)
            .map_err(|source| Error::ManifestSyntax { path: path.to_path_buf(), line: line_no, source })?;
        let key = |key: &'static str| {
            value
                .get(key)
                .and_then(Value::as_str)
                .map(str::to_owned)
                .ok_or(Error::MissingKey { path: path.to_path_buf(), line: line_no, key })
        };
        let id = key("id")?;
        let class_name = key("class")?;
        let stack = key("stack")?;
        let gt = key("gt")?;
        let class = class_name.parse().map_err(|_| Error::UnknownClass {
            path: path.to_path_buf(),
            line: line_no,
            class: class_name.clone(),
        })?;
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId { path: path.to_path_buf(), line: line_no, id });
        }
        records.push(ImageRecord { id, class, stack, gt });
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Manifest { base, records })
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let bytes = super::read_upstream(path, "simulate")?;
    let text = String::from_utf8(bytes).map_err(|e| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: format!("manifest is not UTF-8: {e}"),
    })?;
    parse_manifest(&text, path)
}

#[derive(Serialize)]
struct Line<'a> {
    id: &'a str,
    class: &'a str,
    stack: &'a str,
    gt: &'a str,
}

pub fn encode_manifest(records: &[ImageRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let line = Line { id: &r.id, class: r.class.as_str(), stack: &r.stack, gt: &r.gt };
        out.push_str(&serde_json::to_string(&line).expect("manifest line serializes"));
        out.push('\n');
    }
    out
}

pub fn write_manifest(records: &[ImageRecord], path: &Path) -> Result<()> {
    super::write_file(path, encode_manifest(records).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Manifest> {
        parse_manifest(text, Path::new("corpus/manifest.jsonl"))
    }

    #[test]
    fn preserves_order_and_resolves_paths() {
        let text = concat!(
            r#"{"id":"b","class":"nevus","stack":"stacks/b.uqs","gt":"masks/b.pgm"}"#, "\n",
            r#"{"id":"a","class":"melanoma","stack":"stacks/a.uqs","gt":"masks/a.pgm"}"#, "\n",
            "\n",
            r#"{"gt":"/abs/c.pgm","stack":"c.uqs","class":"seborrheic_keratosis","id":"c","extra":1}"#, "\n",
        );
        let m = parse(text).unwrap();
        let ids: Vec<&str> = m.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["b", "a", "c"]);
        assert_eq!(m.records[2].class, ClassLabel::SeborrheicKeratosis);
        assert_eq!(m.stack_path(&m.records[0]), Path::new("corpus/stacks/b.uqs"));
        assert_eq!(m.gt_path(&m.records[2]), Path::new("/abs/c.pgm"));
    }

    #[test]
    fn duplicate_id() {
        let text = concat!(
            r#"{"id":"a","class":"nevus","stack":"s","gt":"g"}"#, "\n",
            r#"{"id":"a","class":"nevus","stack":"t","gt":"h"}"#, "\n",
        );
        assert!(matches!(parse(text), Err(Error::DuplicateId { line: 2, ref id, .. }) if id == "a"));
    }

    #[test]
    fn unknown_class() {
        let text = r#"{"id":"a","class":"basal_cell","stack":"s","gt":"g"}"#;
        assert!(matches!(parse(text), Err(Error::UnknownClass { line: 1, ref class, .. }) if class == "basal_cell"));
    }

    #[test]
    fn missing_key() {
        let text = r#"{"id":"a","class":"nevus","stack":"s"}"#;
        assert!(matches!(parse(text), Err(Error::MissingKey { key: "gt", .. })));
        let text = r#"{"id":7,"class":"nevus","stack":"s","gt":"g"}"#;
        assert!(matches!(parse(text), Err(Error::MissingKey { key: "id", .. })));
        assert!(matches!(parse("{oops"), Err(Error::ManifestSyntax { line: 1, .. })));
    }

    #[test]
    fn encode_round_trip() {
        let records = vec![ImageRecord {
            id: "mel_0000".into(),
            class: ClassLabel::Melanoma,
            stack: "stacks/mel_0000.uqs".into(),
            gt: "masks/mel_0000.pgm".into(),
        }];
        let text = encode_manifest(&records);
        assert_eq!(
            text,
            "{\"id\":\"mel_0000\",\"class\":\"melanoma\",\"stack\":\"stacks/mel_0000.uqs\",\"gt\":\"masks/mel_0000.pgm\"}\n"
        );
        assert_eq!(parse(&text).unwrap().records, records);
    }
}
