//! Property-list text form of font metrics, as written by `tftopl` and read
//! by `pltotf`.

mod tree;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::encoding::EncodingVector;
use crate::fixword::{parse_decimal, DecimalError, FixWord};
use crate::metrics::{CharDim, CharTag, ExtRecipe, FontMetrics, LigKernAction, LigKernStep, LigOp, STOP_FLAG};
use crate::tfm::compute_checksum;

pub(crate) use tree::{parse_tree, Node, Token};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CharcodeFormat {
    /// `C x` for letters and digits, octal otherwise.
    #[default]
    Default,
    /// `O` for every character code.
    Octal,
    /// Octal codes, each character annotated with its glyph name.
    Names,
}

impl core::str::FromStr for CharcodeFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "default" | "ascii" => Ok(CharcodeFormat::Default),
            "octal" => Ok(CharcodeFormat::Octal),
            "names" => Ok(CharcodeFormat::Names),
            _ => Err(format!("unknown charcode format {s:?} (expected default, octal or names)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PlError {
    #[error("line {line}, column {col}: expected {expected}")]
    SyntaxError { line: usize, col: usize, expected: String },
    #[error("line {line}: character {slot:#o} is defined twice")]
    DuplicateCharacter { line: usize, slot: u8 },
    #[error("line {line}, column {col}: {what}")]
    ValueOutOfRange { line: usize, col: usize, what: String },
    #[error("line {line}, column {col}: unknown property {name}")]
    UnknownProperty { line: usize, col: usize, name: String },
    #[error("names format needs an encoding vector")]
    MissingEncoding,
}

const DESIGNSIZE_COMMENTS: [&str; 2] = [
    "DESIGNSIZE IS IN POINTS",
    "OTHER SIZES ARE MULTIPLES OF DESIGNSIZE",
];

/// Parsed metrics plus the free-standing comments found at top level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlDocument {
    pub metrics: FontMetrics,
    pub comments: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FontKind {
    Vanilla,
    MathSy,
    MathEx,
}

impl FontKind {
    fn of(m: &FontMetrics) -> FontKind {
        let scheme = m.coding_scheme.to_ascii_uppercase();
        if scheme.starts_with("TEX MATH SY") {
            FontKind::MathSy
        } else if scheme.starts_with("TEX MATH EX") {
            FontKind::MathEx
        } else {
            FontKind::Vanilla
        }
    }
}

const VANILLA_PARAMS: [&str; 7] = [
    "SLANT", "SPACE", "STRETCH", "SHRINK", "XHEIGHT", "QUAD", "EXTRASPACE",
];
const MATHSY_PARAMS: [&str; 15] = [
    "NUM1", "NUM2", "NUM3", "DENOM1", "DENOM2", "SUP1", "SUP2", "SUP3", "SUB1", "SUB2", "SUPDROP",
    "SUBDROP", "DELIM1", "DELIM2", "AXISHEIGHT",
];
const MATHEX_PARAMS: [&str; 6] = [
    "DEFAULTRULETHICKNESS",
    "BIGOPSPACING1",
    "BIGOPSPACING2",
    "BIGOPSPACING3",
    "BIGOPSPACING4",
    "BIGOPSPACING5",
];

fn param_name(number: usize, kind: FontKind) -> Option<&'static str> {
    if (1..=7).contains(&number) {
        return Some(VANILLA_PARAMS[number - 1]);
    }
    match kind {
        FontKind::MathSy => MATHSY_PARAMS.get(number - 8).copied(),
        FontKind::MathEx => MATHEX_PARAMS.get(number - 8).copied(),
        FontKind::Vanilla => None,
    }
}

fn param_number(name: &str) -> Option<usize> {
    VANILLA_PARAMS
        .iter()
        .position(|n| *n == name)
        .map(|i| i + 1)
        .or_else(|| MATHSY_PARAMS.iter().position(|n| *n == name).map(|i| i + 8))
        .or_else(|| MATHEX_PARAMS.iter().position(|n| *n == name).map(|i| i + 8))
}

fn face_name(face: u8) -> Option<String> {
    if face >= 18 {
        return None;
    }
    let slope = ['R', 'I'][usize::from(face % 2)];
    let weight = ['M', 'B', 'L'][usize::from(face / 2 % 3)];
    let expansion = ['R', 'C', 'E'][usize::from(face / 6)];
    Some([weight, slope, expansion].iter().collect())
}

fn face_code(name: &str) -> Option<u8> {
    let b = name.as_bytes();
    if b.len() != 3 {
        return None;
    }
    let weight = b"MBL".iter().position(|c| *c == b[0])? as u8;
    let slope = b"RI".iter().position(|c| *c == b[1])? as u8;
    let expansion = b"RCE".iter().position(|c| *c == b[2])? as u8;
    Some(2 * weight + slope + 6 * expansion)
}

/// Indented property-list writer shared with the VPL emitter.
pub(crate) struct PlWriter<'a> {
    pub out: String,
    fmt: CharcodeFormat,
    kind: FontKind,
    names: Option<&'a EncodingVector>,
}

impl<'a> PlWriter<'a> {
    pub fn new(m: &FontMetrics, fmt: CharcodeFormat, names: Option<&'a EncodingVector>) -> Result<PlWriter<'a>, PlError> {
        if fmt == CharcodeFormat::Names && names.is_none() {
            return Err(PlError::MissingEncoding);
        }
        Ok(PlWriter {
            out: String::new(),
            fmt,
            kind: FontKind::of(m),
            names,
        })
    }

    pub fn slot(&self, c: u8) -> String {
        let letter = c.is_ascii_alphanumeric();
        if self.fmt == CharcodeFormat::Default && self.kind == FontKind::Vanilla && letter {
            format!("C {}", char::from(c))
        } else {
            format!("O {c:o}")
        }
    }

    fn indent(&mut self, level: usize) {
        for _ in 0..level {
            self.out.push_str("   ");
        }
    }

    pub fn line(&mut self, level: usize, text: &str) {
        self.indent(level);
        let _ = writeln!(self.out, "({text})");
    }

    pub fn open(&mut self, level: usize, text: &str) {
        self.indent(level);
        let _ = writeln!(self.out, "({text}");
    }

    pub fn close(&mut self, level: usize) {
        self.indent(level + 1);
        self.out.push_str(")\n");
    }

    pub fn header(&mut self, m: &FontMetrics, comments: &[String]) {
        if !m.family.is_empty() {
            self.line(0, &format!("FAMILY {}", m.family));
        }
        if m.face != 0 {
            match face_name(m.face) {
                Some(name) => self.line(0, &format!("FACE F {name}")),
                None => self.line(0, &format!("FACE O {:o}", m.face)),
            }
        }
        if !m.coding_scheme.is_empty() {
            self.line(0, &format!("CODINGSCHEME {}", m.coding_scheme));
        }
        self.line(0, &format!("DESIGNSIZE R {}", m.design_size));
        for c in DESIGNSIZE_COMMENTS {
            self.line(0, &format!("COMMENT {c}"));
        }
        for c in comments {
            self.line(0, &format!("COMMENT {c}"));
        }
        self.line(0, &format!("CHECKSUM O {:o}", m.checksum));
        if m.seven_bit_safe {
            self.line(0, "SEVENBITSAFEFLAG TRUE");
        }
        for (i, w) in m.extra_header.iter().enumerate() {
            self.line(0, &format!("HEADER D {} O {:o}", i + 18, w));
        }
    }

    pub fn params(&mut self, m: &FontMetrics) {
        if m.params.is_empty() {
            return;
        }
        self.open(0, "FONTDIMEN");
        for (i, v) in m.params.iter().enumerate() {
            let number = i + 1;
            match param_name(number, self.kind) {
                Some(name) => self.line(1, &format!("{name} R {v}")),
                None => self.line(1, &format!("PARAMETER D {number} R {v}")),
            }
        }
        self.close(0);
    }

    fn step(&self, m: &FontMetrics, step: &LigKernStep) -> String {
        match step.action() {
            LigKernAction::Kern { index } => {
                let value = m.kerns.get(usize::from(index)).copied().unwrap_or_default();
                format!("KRN {} R {value}", self.slot(step.next_char))
            }
            LigKernAction::Lig { op, char } => {
                format!("{} {} {}", op.pl_name(), self.slot(step.next_char), self.slot(char))
            }
            LigKernAction::BadOp(op) => format!("COMMENT bad ligature op {op}"),
        }
    }

    pub fn ligtable(&mut self, m: &FontMetrics) {
        if let Some(b) = m.boundary_char {
            let s = self.slot(b);
            self.line(0, &format!("BOUNDARYCHAR {s}"));
        }
        if m.ligkern.is_empty() {
            return;
        }
        let mut labels: BTreeMap<usize, Vec<u8>> = BTreeMap::new();
        for (&slot, d) in &m.chars {
            if let CharTag::Lig(start) = d.tag {
                labels.entry(usize::from(start)).or_default().push(slot);
            }
        }
        self.open(0, "LIGTABLE");
        for (i, step) in m.ligkern.iter().enumerate() {
            if m.boundary_program == Some(i as u16) {
                self.line(1, "LABEL BOUNDARYCHAR");
            }
            for &slot in labels.get(&i).map(Vec::as_slice).unwrap_or_default() {
                let s = self.slot(slot);
                self.line(1, &format!("LABEL {s}"));
            }
            let text = self.step(m, step);
            self.line(1, &text);
            if step.skip >= STOP_FLAG {
                self.line(1, "STOP");
            } else if step.skip > 0 {
                self.line(1, &format!("SKIP D {}", step.skip));
            }
        }
        self.close(0);
    }

    /// Writes one `CHARACTER` block; `extra` adds properties before the close.
    pub fn character(&mut self, m: &FontMetrics, slot: u8, d: &CharDim, extra: impl FnOnce(&mut Self)) {
        let label = self.slot(slot);
        match (self.fmt, self.names) {
            (CharcodeFormat::Names, Some(v)) => {
                let name = v.slot(slot).to_string();
                self.open(0, &format!("CHARACTER {label} (COMMENT {name})"));
            }
            _ => self.open(0, &format!("CHARACTER {label}")),
        }
        self.line(1, &format!("CHARWD R {}", d.width));
        if d.height != FixWord::ZERO {
            self.line(1, &format!("CHARHT R {}", d.height));
        }
        if d.depth != FixWord::ZERO {
            self.line(1, &format!("CHARDP R {}", d.depth));
        }
        if d.italic != FixWord::ZERO {
            self.line(1, &format!("CHARIC R {}", d.italic));
        }
        match d.tag {
            CharTag::None => {}
            CharTag::Lig(start) => {
                let steps = m.program_from(usize::from(start));
                if !steps.is_empty() {
                    self.open(1, "COMMENT");
                    for (_, step) in steps {
                        let text = self.step(m, &step);
                        self.line(2, &text);
                    }
                    self.close(1);
                }
            }
            CharTag::List(next) => {
                let s = self.slot(next);
                self.line(1, &format!("NEXTLARGER {s}"));
            }
            CharTag::Ext(i) => {
                let recipe = m.extens.get(usize::from(i)).copied().unwrap_or_default();
                self.open(1, "VARCHAR");
                for (name, piece) in [("TOP", recipe.top), ("MID", recipe.mid), ("BOT", recipe.bot)] {
                    if let Some(p) = piece {
                        let s = self.slot(p);
                        self.line(2, &format!("{name} {s}"));
                    }
                }
                let s = self.slot(recipe.rep);
                self.line(2, &format!("REP {s}"));
                self.close(1);
            }
        }
        extra(self);
        self.close(0);
    }
}

/// Writes metrics as a property list.
pub fn emit_pl(m: &FontMetrics, fmt: CharcodeFormat, names: Option<&EncodingVector>) -> Result<String, PlError> {
    emit_pl_document(
        &PlDocument {
            metrics: m.clone(),
            comments: Vec::new(),
        },
        fmt,
        names,
    )
}

pub fn emit_pl_document(doc: &PlDocument, fmt: CharcodeFormat, names: Option<&EncodingVector>) -> Result<String, PlError> {
    let m = &doc.metrics;
    let mut w = PlWriter::new(m, fmt, names)?;
    w.header(m, &doc.comments);
    w.params(m);
    w.ligtable(m);
    for (&slot, d) in &m.chars {
        w.character(m, slot, d, |_| {});
    }
    Ok(w.out)
}

pub(crate) fn range_error(t: &Token, what: impl Into<String>) -> PlError {
    PlError::ValueOutOfRange {
        line: t.line,
        col: t.col,
        what: what.into(),
    }
}

/// Reads the arguments of one property in order.
pub(crate) struct Args<'a> {
    node: &'a Node,
    i: usize,
}

impl<'a> Args<'a> {
    pub fn new(node: &'a Node) -> Args<'a> {
        Args { node, i: 0 }
    }

    fn missing(&self, expected: &str) -> PlError {
        let (line, col) = self
            .node
            .args
            .last()
            .map(|t| (t.line, t.col + t.text.len()))
            .unwrap_or((self.node.line, self.node.col + self.node.name.len()));
        PlError::SyntaxError {
            line,
            col,
            expected: expected.into(),
        }
    }

    pub fn token(&mut self, expected: &str) -> Result<&'a Token, PlError> {
        let t = self.node.args.get(self.i).ok_or_else(|| self.missing(expected))?;
        self.i += 1;
        Ok(t)
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.node.args.get(self.i).map(|t| t.text.as_str())
    }

    /// An integer in any of the `C`, `O`, `D`, `H` or `F` forms.
    pub fn int(&mut self) -> Result<(u64, &'a Token), PlError> {
        let prefix = self.token("C, O, D, H or F")?;
        let value = self.token("an integer")?;
        let bad = |t: &Token| PlError::SyntaxError {
            line: t.line,
            col: t.col,
            expected: format!("a value in {} form", prefix.text),
        };
        let parsed = match prefix.text.as_str() {
            "C" => {
                let b = value.text.as_bytes();
                if b.len() != 1 {
                    return Err(bad(value));
                }
                Some(u64::from(b[0]))
            }
            "O" => u64::from_str_radix(&value.text, 8).ok(),
            "D" => value.text.parse::<u64>().ok(),
            "H" => u64::from_str_radix(&value.text, 16).ok(),
            "F" => face_code(&value.text).map(u64::from),
            _ => {
                return Err(PlError::SyntaxError {
                    line: prefix.line,
                    col: prefix.col,
                    expected: "C, O, D, H or F".into(),
                })
            }
        };
        parsed.map(|v| (v, value)).ok_or_else(|| bad(value))
    }

    pub fn slot(&mut self) -> Result<u8, PlError> {
        let (v, t) = self.int()?;
        u8::try_from(v).map_err(|_| range_error(t, format!("character code {v} exceeds 255")))
    }

    /// A real number in `R` (or `D`) form, unscaled.
    pub fn real(&mut self) -> Result<(FixWord, &'a Token), PlError> {
        let prefix = self.token("R")?;
        if prefix.text != "R" && prefix.text != "D" {
            return Err(PlError::SyntaxError {
                line: prefix.line,
                col: prefix.col,
                expected: "R".into(),
            });
        }
        let value = self.token("a real number")?;
        match parse_decimal(&value.text) {
            Ok(v) => Ok((v, value)),
            Err(DecimalError::TooBig) => Err(range_error(value, "real constants must be less than 2048")),
            Err(DecimalError::Malformed) => Err(PlError::SyntaxError {
                line: value.line,
                col: value.col,
                expected: "a real number".into(),
            }),
        }
    }

    pub fn end(&self) -> Result<(), PlError> {
        match self.node.args.get(self.i) {
            None => Ok(()),
            Some(t) => Err(PlError::SyntaxError {
                line: t.line,
                col: t.col,
                expected: ")".into(),
            }),
        }
    }
}

pub(crate) fn unknown(node: &Node) -> PlError {
    PlError::UnknownProperty {
        line: node.line,
        col: node.col,
        name: node.name.clone(),
    }
}

fn no_children(node: &Node) -> Result<(), PlError> {
    match node.children.first() {
        None => Ok(()),
        Some(c) => Err(PlError::SyntaxError {
            line: c.line,
            col: c.col,
            expected: ")".into(),
        }),
    }
}

/// Accumulates metrics from property-list nodes. Shared with the VPL reader.
pub(crate) struct MetricsBuilder {
    pub m: FontMetrics,
    checksum_set: bool,
    design_units: FixWord,
    comments: Vec<String>,
    labels: BTreeMap<u8, (u16, usize)>,
    list_or_ext: BTreeMap<u8, usize>,
    defined: BTreeSet<u8>,
    pending: Vec<(u8, usize, &'static str)>,
}

impl MetricsBuilder {
    pub fn new() -> MetricsBuilder {
        MetricsBuilder {
            m: FontMetrics::default(),
            checksum_set: false,
            design_units: FixWord::ONE,
            comments: Vec::new(),
            labels: BTreeMap::new(),
            list_or_ext: BTreeMap::new(),
            defined: BTreeSet::new(),
            pending: Vec::new(),
        }
    }

    /// Scales a value given in design units to design-size units.
    pub fn scale(&self, v: FixWord) -> FixWord {
        if self.design_units == FixWord::ONE {
            return v;
        }
        let num = i64::from(v.0) << 20;
        let den = i64::from(self.design_units.0);
        let q = num.div_euclid(den);
        let r = num.rem_euclid(den);
        FixWord((q + i64::from(2 * r >= den)) as i32)
    }

    fn dimension(&self, args: &mut Args<'_>, what: &str) -> Result<FixWord, PlError> {
        let (v, t) = args.real()?;
        let v = self.scale(v);
        if !v.abs_lt_16() {
            return Err(range_error(t, format!("{what} {v} must be less than 16 in magnitude")));
        }
        Ok(v)
    }

    fn string_value(node: &Node, max: usize) -> Result<String, PlError> {
        no_children(node)?;
        if node.raw.len() > max {
            return Err(PlError::ValueOutOfRange {
                line: node.line,
                col: node.col,
                what: format!("{} is longer than {max} characters", node.name),
            });
        }
        Ok(node.raw.clone())
    }

    /// Handles one top-level node. Returns `false` for names it does not know.
    pub fn top(&mut self, node: &Node) -> Result<bool, PlError> {
        let mut a = Args::new(node);
        match node.name.as_str() {
            "COMMENT" => {
                if !DESIGNSIZE_COMMENTS.contains(&node.raw.as_str()) {
                    self.comments.push(node.raw.clone());
                }
                return Ok(true);
            }
            "FAMILY" => {
                self.m.family = Self::string_value(node, 19)?;
                return Ok(true);
            }
            "CODINGSCHEME" => {
                self.m.coding_scheme = Self::string_value(node, 39)?;
                return Ok(true);
            }
            "FACE" => {
                let (v, t) = a.int()?;
                self.m.face = u8::try_from(v).map_err(|_| range_error(t, "FACE exceeds 255"))?;
            }
            "DESIGNSIZE" => {
                let (v, t) = a.real()?;
                if v < FixWord::ONE {
                    return Err(range_error(t, "DESIGNSIZE must be at least 1.0"));
                }
                self.m.design_size = v;
            }
            "DESIGNUNITS" => {
                let (v, t) = a.real()?;
                if v <= FixWord::ZERO {
                    return Err(range_error(t, "DESIGNUNITS must be positive"));
                }
                self.design_units = v;
            }
            "CHECKSUM" => {
                let (v, t) = a.int()?;
                self.m.checksum = u32::try_from(v).map_err(|_| range_error(t, "CHECKSUM exceeds 32 bits"))?;
                self.checksum_set = true;
            }
            "SEVENBITSAFEFLAG" => {
                let t = a.token("TRUE or FALSE")?;
                self.m.seven_bit_safe = match t.text.as_str() {
                    "TRUE" => true,
                    "FALSE" => false,
                    _ => {
                        return Err(PlError::SyntaxError {
                            line: t.line,
                            col: t.col,
                            expected: "TRUE or FALSE".into(),
                        })
                    }
                };
            }
            "HEADER" => {
                let (index, t) = a.int()?;
                let (value, vt) = a.int()?;
                if !(18..18 + 1000).contains(&index) {
                    return Err(range_error(t, "HEADER index must be at least 18"));
                }
                let value = u32::try_from(value).map_err(|_| range_error(vt, "HEADER value exceeds 32 bits"))?;
                let i = index as usize - 18;
                if self.m.extra_header.len() <= i {
                    self.m.extra_header.resize(i + 1, 0);
                }
                self.m.extra_header[i] = value;
            }
            "BOUNDARYCHAR" => {
                self.m.boundary_char = Some(a.slot()?);
            }
            "FONTDIMEN" => {
                a.end()?;
                for child in &node.children {
                    self.param(child)?;
                }
                return Ok(true);
            }
            "LIGTABLE" => {
                a.end()?;
                for child in &node.children {
                    self.lig_entry(child)?;
                }
                return Ok(true);
            }
            _ => return Ok(false),
        }
        a.end()?;
        no_children(node)?;
        Ok(true)
    }

    fn param(&mut self, node: &Node) -> Result<(), PlError> {
        let mut a = Args::new(node);
        let number = if node.name == "PARAMETER" {
            let (n, t) = a.int()?;
            if !(1..=254).contains(&n) {
                return Err(range_error(t, "PARAMETER number must be in 1..=254"));
            }
            n as usize
        } else {
            param_number(&node.name).ok_or_else(|| unknown(node))?
        };
        let (v, t) = a.real()?;
        let v = if number == 1 { v } else { self.scale(v) };
        if number != 1 && !v.abs_lt_16() {
            return Err(range_error(t, format!("parameter {number} must be less than 16 in magnitude")));
        }
        a.end()?;
        no_children(node)?;
        self.m.set_param(number, v);
        Ok(())
    }

    fn lig_entry(&mut self, node: &Node) -> Result<(), PlError> {
        let mut a = Args::new(node);
        let here = self.m.ligkern.len();
        match node.name.as_str() {
            "LABEL" => {
                if a.peek() == Some("BOUNDARYCHAR") {
                    a.token("BOUNDARYCHAR")?;
                    if self.m.boundary_program.is_some() {
                        return Err(range_error(&node.args[0], "BOUNDARYCHAR label appears twice"));
                    }
                    self.m.boundary_program = Some(here as u16);
                } else {
                    let slot = a.slot()?;
                    if self.labels.insert(slot, (here as u16, node.line)).is_some() {
                        return Err(range_error(&node.args[1], format!("character {slot:#o} is labelled twice")));
                    }
                }
            }
            "STOP" | "SKIP" => {
                let skip = if node.name == "STOP" {
                    STOP_FLAG
                } else {
                    let (n, t) = a.int()?;
                    if n >= 128 {
                        return Err(range_error(t, "SKIP must be less than 128"));
                    }
                    n as u8
                };
                let last = self.m.ligkern.last_mut().ok_or_else(|| PlError::SyntaxError {
                    line: node.line,
                    col: node.col,
                    expected: "an instruction before STOP or SKIP".into(),
                })?;
                last.skip = skip;
            }
            "KRN" => {
                let next = a.slot()?;
                let (v, t) = a.real()?;
                let v = self.scale(v);
                if !v.abs_lt_16() {
                    return Err(range_error(t, "kern must be less than 16 in magnitude"));
                }
                let index = match self.m.kerns.iter().position(|k| *k == v) {
                    Some(i) => i,
                    None => {
                        self.m.kerns.push(v);
                        self.m.kerns.len() - 1
                    }
                };
                if index >= 1 << 15 {
                    return Err(range_error(t, "too many distinct kerns"));
                }
                self.m.ligkern.push(LigKernStep::kern(next, index as u16));
            }
            name => {
                let op = LigOp::from_pl_name(name).ok_or_else(|| unknown(node))?;
                let next = a.slot()?;
                let result = a.slot()?;
                self.m.ligkern.push(LigKernStep::lig(op, next, result));
            }
        }
        a.end()?;
        no_children(node)
    }

    /// Reads a `CHARACTER` node. `extra` handles properties this reader does
    /// not know and returns `false` to reject them.
    pub fn character(
        &mut self,
        node: &Node,
        mut extra: impl FnMut(u8, &Node) -> Result<bool, PlError>,
    ) -> Result<u8, PlError> {
        let mut a = Args::new(node);
        let slot = a.slot()?;
        a.end()?;
        if !self.defined.insert(slot) {
            return Err(PlError::DuplicateCharacter { line: node.line, slot });
        }
        let mut d = self.m.chars.get(&slot).copied().unwrap_or_default();
        for child in &node.children {
            let mut a = Args::new(child);
            match child.name.as_str() {
                "COMMENT" => continue,
                "CHARWD" => d.width = self.dimension(&mut a, "width")?,
                "CHARHT" => d.height = self.dimension(&mut a, "height")?,
                "CHARDP" => d.depth = self.dimension(&mut a, "depth")?,
                "CHARIC" => d.italic = self.dimension(&mut a, "italic correction")?,
                "NEXTLARGER" => {
                    let next = a.slot()?;
                    self.set_list_or_ext(slot, child)?;
                    d.tag = CharTag::List(next);
                    self.pending.push((next, child.line, "NEXTLARGER"));
                }
                "VARCHAR" => {
                    a.end()?;
                    self.set_list_or_ext(slot, child)?;
                    let mut recipe = ExtRecipe::default();
                    for piece in &child.children {
                        let mut pa = Args::new(piece);
                        let c = pa.slot()?;
                        pa.end()?;
                        no_children(piece)?;
                        let c0 = || range_error(&piece.args[1], "slot 0 cannot be an optional extensible piece");
                        match piece.name.as_str() {
                            "TOP" if c == 0 => return Err(c0()),
                            "MID" if c == 0 => return Err(c0()),
                            "BOT" if c == 0 => return Err(c0()),
                            "TOP" => recipe.top = Some(c),
                            "MID" => recipe.mid = Some(c),
                            "BOT" => recipe.bot = Some(c),
                            "REP" => recipe.rep = c,
                            _ => return Err(unknown(piece)),
                        }
                        self.pending.push((c, piece.line, "VARCHAR piece"));
                    }
                    if self.m.extens.len() >= 256 {
                        return Err(range_error(&node.args[1], "more than 256 extensible recipes"));
                    }
                    d.tag = CharTag::Ext(self.m.extens.len() as u8);
                    self.m.extens.push(recipe);
                    continue;
                }
                _ => {
                    if extra(slot, child)? {
                        continue;
                    }
                    return Err(unknown(child));
                }
            }
            a.end()?;
            no_children(child)?;
        }
        self.m.chars.insert(slot, d);
        Ok(slot)
    }

    fn set_list_or_ext(&mut self, slot: u8, node: &Node) -> Result<(), PlError> {
        if self.list_or_ext.insert(slot, node.line).is_some() {
            return Err(PlError::ValueOutOfRange {
                line: node.line,
                col: node.col,
                what: format!("character {slot:#o} already has a NEXTLARGER or VARCHAR"),
            });
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<PlDocument, PlError> {
        for (&slot, &(start, line)) in &self.labels {
            if let Some(&other) = self.list_or_ext.get(&slot) {
                return Err(PlError::ValueOutOfRange {
                    line: line.max(other),
                    col: 1,
                    what: format!("character {slot:#o} has a lig/kern program and a NEXTLARGER or VARCHAR"),
                });
            }
            let d = self.m.chars.entry(slot).or_default();
            d.tag = CharTag::Lig(start);
        }
        for (slot, line, what) in &self.pending {
            if !self.m.chars.contains_key(slot) {
                return Err(PlError::ValueOutOfRange {
                    line: *line,
                    col: 1,
                    what: format!("{what} {slot:#o} is not a defined character"),
                });
            }
        }
        if let Some(p) = self.m.boundary_program {
            if usize::from(p) >= self.m.ligkern.len() {
                return Err(PlError::SyntaxError {
                    line: 0,
                    col: 0,
                    expected: "an instruction after LABEL BOUNDARYCHAR".into(),
                });
            }
        }
        for (slot, (start, line)) in &self.labels {
            if usize::from(*start) >= self.m.ligkern.len() {
                return Err(PlError::SyntaxError {
                    line: *line,
                    col: 1,
                    expected: format!("an instruction after LABEL {slot:#o}"),
                });
            }
        }
        if !self.checksum_set {
            self.m.checksum = compute_checksum(&self.m);
        }
        Ok(PlDocument {
            metrics: self.m,
            comments: self.comments,
        })
    }
}

pub fn parse_pl_document(src: &str) -> Result<PlDocument, PlError> {
    let mut b = MetricsBuilder::new();
    for node in parse_tree(src)? {
        if node.name == "CHARACTER" {
            b.character(&node, |_, _| Ok(false))?;
        } else if !b.top(&node)? {
            return Err(unknown(&node));
        }
    }
    b.finish()
}

/// Reads a property list. Top-level comments are discarded; use
/// [`parse_pl_document`] to keep them.
pub fn parse_pl(src: &str) -> Result<FontMetrics, PlError> {
    parse_pl_document(src).map(|d| d.metrics)
}
