//! Encoding vectors in PostScript `.enc` syntax, and the registry that maps
//! TFM coding-scheme labels onto them.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

pub const NOTDEF: &str = ".notdef";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EncError {
    #[error("encoding vector has {0} entries, expected 256")]
    WrongSlotCount(usize),
    #[error("line {line}: {reason}")]
    SyntaxError { line: usize, reason: &'static str },
}

/// 256 glyph names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingVector {
    name: String,
    slots: Vec<String>,
}

impl EncodingVector {
    pub fn new(name: impl Into<String>, slots: Vec<String>) -> Result<EncodingVector, EncError> {
        let name = name.into();
        if slots.len() != 256 {
            return Err(EncError::WrongSlotCount(slots.len()));
        }
        if name.is_empty() {
            return Err(EncError::SyntaxError {
                line: 1,
                reason: "vector name is empty",
            });
        }
        Ok(EncodingVector { name, slots })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn slot(&self, slot: u8) -> &str {
        &self.slots[usize::from(slot)]
    }

    pub fn slots(&self) -> &[String] {
        &self.slots
    }

    /// Slot of the first occurrence of `glyph`.
    pub fn position(&self, glyph: &str) -> Option<u8> {
        self.slots.iter().position(|s| s == glyph).map(|i| i as u8)
    }
}

struct Tokens<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let bytes = self.src.as_bytes();
        loop {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
                if bytes[self.pos] == b'\n' {
                    self.line += 1;
                }
                self.pos += 1;
            }
            if self.pos < bytes.len() && bytes[self.pos] == b'%' {
                while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= bytes.len() {
            return None;
        }
        let start = self.pos;
        if matches!(bytes[start], b'[' | b']' | b'{' | b'}') {
            self.pos += 1;
        } else {
            self.pos += 1;
            while self.pos < bytes.len()
                && !bytes[self.pos].is_ascii_whitespace()
                && !matches!(bytes[self.pos], b'[' | b']' | b'{' | b'}' | b'/' | b'%' | b'(' | b')' | b'<' | b'>')
            {
                self.pos += 1;
            }
        }
        Some((self.line, &self.src[start..self.pos]))
    }
}

/// Reads `/Name [ /glyph ... ] def`.
pub fn parse_enc(src: &str) -> Result<EncodingVector, EncError> {
    let mut t = Tokens { src, pos: 0, line: 1 };
    let syntax = |line, reason| EncError::SyntaxError { line, reason };
    let (line, head) = t.next().ok_or(syntax(1, "empty encoding file"))?;
    let name = head
        .strip_prefix('/')
        .filter(|n| !n.is_empty())
        .ok_or(syntax(line, "expected /VectorName"))?;
    match t.next() {
        Some((_, "[")) => {}
        Some((line, _)) => return Err(syntax(line, "expected [")),
        None => return Err(syntax(t.line, "expected [")),
    }
    let mut slots = Vec::new();
    loop {
        match t.next() {
            Some((_, "]")) => break,
            Some((line, tok)) => match tok.strip_prefix('/') {
                Some(g) if !g.is_empty() => slots.push(g.to_string()),
                _ => return Err(syntax(line, "expected /glyphname or ]")),
            },
            None => return Err(syntax(t.line, "unterminated vector, expected ]")),
        }
    }
    match t.next() {
        Some((_, "def")) => {}
        Some((_, "readonly")) => match t.next() {
            Some((_, "def")) => {}
            _ => return Err(syntax(t.line, "expected def")),
        },
        _ => return Err(syntax(t.line, "expected def")),
    }
    if let Some((line, _)) = t.next() {
        return Err(syntax(line, "unexpected text after def"));
    }
    EncodingVector::new(name, slots)
}

/// Canonical text form: eight names per line, slot number comments every
/// sixteen slots.
pub fn emit_enc(v: &EncodingVector) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "/{} [", v.name);
    for (i, row) in v.slots.chunks(8).enumerate() {
        if i % 2 == 0 {
            let _ = writeln!(out, "% {:#04x}", i * 8);
        }
        let names: Vec<String> = row.iter().map(|g| alloc::format!("/{g}")).collect();
        let _ = writeln!(out, "{}", names.join(" "));
    }
    out.push_str("] def\n");
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("scheme {scheme:?} is already declared as {existing:?}, cannot redeclare as {requested:?}")]
    ConflictingRedeclaration {
        scheme: String,
        existing: String,
        requested: String,
    },
    #[error("no encoding vector named {0:?} is loaded")]
    UnknownTarget(String),
    #[error("coding scheme {0:?} is not declared and names no loaded vector")]
    UndeclaredScheme(String),
    #[error("a different vector is already loaded as {0:?}")]
    DuplicateVector(String),
}

fn normalize(label: &str) -> String {
    label.trim().to_ascii_uppercase()
}

/// Loaded vectors plus scheme redeclarations. Updates return a new registry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EncodingRegistry {
    vectors: BTreeMap<String, EncodingVector>,
    schemes: BTreeMap<String, String>,
}

impl EncodingRegistry {
    pub fn new() -> EncodingRegistry {
        EncodingRegistry::default()
    }

    /// Adds `vector` under `label` (typically the `.enc` file stem). It can
    /// then be found by the label or by its PostScript name.
    pub fn with_vector(&self, label: &str, vector: EncodingVector) -> Result<EncodingRegistry, RegistryError> {
        let key = normalize(label);
        if let Some(existing) = self.vectors.get(&key) {
            if *existing != vector {
                return Err(RegistryError::DuplicateVector(label.into()));
            }
            return Ok(self.clone());
        }
        let mut next = self.clone();
        next.vectors.insert(key, vector);
        Ok(next)
    }

    pub fn vector(&self, name: &str) -> Option<&EncodingVector> {
        let key = normalize(name);
        self.vectors.get(&key).or_else(|| {
            self.vectors
                .values()
                .find(|v| normalize(v.name()) == key)
        })
    }

    /// Makes metrics whose coding scheme is `scheme` resolve through `target`.
    pub fn declare(&self, scheme: &str, target: &str) -> Result<EncodingRegistry, RegistryError> {
        if self.vector(target).is_none() {
            return Err(RegistryError::UnknownTarget(target.into()));
        }
        let key = normalize(scheme);
        let wanted = normalize(target);
        if let Some(existing) = self.schemes.get(&key) {
            if *existing == wanted {
                return Ok(self.clone());
            }
            return Err(RegistryError::ConflictingRedeclaration {
                scheme: scheme.trim().into(),
                existing: existing.clone(),
                requested: target.into(),
            });
        }
        let mut next = self.clone();
        next.schemes.insert(key, wanted);
        Ok(next)
    }

    /// The vector a coding scheme resolves to.
    pub fn resolve(&self, scheme: &str) -> Result<&EncodingVector, RegistryError> {
        let key = normalize(scheme);
        let target = self.schemes.get(&key).unwrap_or(&key);
        self.vector(target)
            .ok_or_else(|| RegistryError::UndeclaredScheme(scheme.into()))
    }

    pub fn resolve_slot(&self, scheme: &str, slot: u8) -> Result<&str, RegistryError> {
        self.resolve(scheme).map(|v| v.slot(slot))
    }
}
