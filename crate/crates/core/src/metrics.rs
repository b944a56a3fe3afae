//! The in-memory model of one font's metrics.
//!
//! [`FontMetrics`] holds resolved values: dimension tables are not indexed
//! here, that compression happens when a `.tfm` file is written. The lig/kern
//! program is stored in its logical form, without the boundary-character and
//! indirection words the binary format prepends; see [`crate::tfm`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fixword::FixWord;

/// Largest number of lig/kern words addressable from an 8-bit remainder.
pub(crate) const DIRECT_LIG_LIMIT: usize = 256;

/// Every length in a `.tfm` file, including the total, must stay below 2^15.
pub const MAX_FILE_WORDS: usize = 0x7FFF;

/// A lig/kern instruction with `skip >= 128` ends its character's program.
pub const STOP_FLAG: u8 = 128;

/// What a character's `remainder` field means.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CharTag {
    #[default]
    None,
    /// Start of the character's program in [`FontMetrics::ligkern`].
    Lig(u16),
    /// Next larger character in a charlist.
    List(u8),
    /// Index into [`FontMetrics::extens`].
    Ext(u8),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CharDim {
    pub width: FixWord,
    pub height: FixWord,
    pub depth: FixWord,
    pub italic: FixWord,
    pub tag: CharTag,
}

impl CharDim {
    pub fn with_width(width: FixWord) -> CharDim {
        CharDim {
            width,
            ..CharDim::default()
        }
    }
}

/// Ligature operation codes (the `op_byte` of a ligature step).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LigOp {
    /// `LIG`
    Lig = 0,
    /// `LIG/`
    LigSlash = 1,
    /// `/LIG`
    SlashLig = 2,
    /// `/LIG/`
    SlashLigSlash = 3,
    /// `LIG/>`
    LigSlashGt = 5,
    /// `/LIG>`
    SlashLigGt = 6,
    /// `/LIG/>`
    SlashLigSlashGt = 7,
    /// `/LIG/>>`
    SlashLigSlashGtGt = 11,
}

impl LigOp {
    pub const ALL: [LigOp; 8] = [
        LigOp::Lig,
        LigOp::LigSlash,
        LigOp::SlashLig,
        LigOp::SlashLigSlash,
        LigOp::LigSlashGt,
        LigOp::SlashLigGt,
        LigOp::SlashLigSlashGt,
        LigOp::SlashLigSlashGtGt,
    ];

    pub fn from_code(code: u8) -> Option<LigOp> {
        LigOp::ALL.iter().copied().find(|op| *op as u8 == code)
    }

    pub fn pl_name(self) -> &'static str {
        match self {
            LigOp::Lig => "LIG",
            LigOp::LigSlash => "LIG/",
            LigOp::SlashLig => "/LIG",
            LigOp::SlashLigSlash => "/LIG/",
            LigOp::LigSlashGt => "LIG/>",
            LigOp::SlashLigGt => "/LIG>",
            LigOp::SlashLigSlashGt => "/LIG/>",
            LigOp::SlashLigSlashGtGt => "/LIG/>>",
        }
    }

    pub fn from_pl_name(name: &str) -> Option<LigOp> {
        LigOp::ALL.iter().copied().find(|op| op.pl_name() == name)
    }
}

/// One word of a lig/kern program, exactly as stored in a `.tfm` file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LigKernStep {
    pub skip: u8,
    pub next_char: u8,
    pub op: u8,
    pub remainder: u8,
}

/// Decoded meaning of a [`LigKernStep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LigKernAction {
    Kern { index: u16 },
    Lig { op: LigOp, char: u8 },
    BadOp(u8),
}

impl LigKernStep {
    pub fn kern(next_char: u8, index: u16) -> LigKernStep {
        LigKernStep {
            skip: 0,
            next_char,
            op: 128 + (index >> 8) as u8,
            remainder: index as u8,
        }
    }

    pub fn lig(op: LigOp, next_char: u8, char: u8) -> LigKernStep {
        LigKernStep {
            skip: 0,
            next_char,
            op: op as u8,
            remainder: char,
        }
    }

    pub fn stopping(mut self) -> LigKernStep {
        self.skip = STOP_FLAG;
        self
    }

    pub fn is_stop(&self) -> bool {
        self.skip >= STOP_FLAG
    }

    pub fn action(&self) -> LigKernAction {
        if self.op >= 128 {
            LigKernAction::Kern {
                index: u16::from(self.op - 128) << 8 | u16::from(self.remainder),
            }
        } else {
            match LigOp::from_code(self.op) {
                Some(op) => LigKernAction::Lig {
                    op,
                    char: self.remainder,
                },
                None => LigKernAction::BadOp(self.op),
            }
        }
    }
}

/// Extensible character recipe. Absent pieces are `None`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExtRecipe {
    pub top: Option<u8>,
    pub mid: Option<u8>,
    pub bot: Option<u8>,
    pub rep: u8,
}

/// Metrics of one font: everything a `.tfm` file can carry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FontMetrics {
    pub checksum: u32,
    /// In points.
    pub design_size: FixWord,
    pub coding_scheme: String,
    pub family: String,
    pub seven_bit_safe: bool,
    pub face: u8,
    /// Header words beyond the 18 standard ones, carried opaquely.
    pub extra_header: Vec<u32>,
    pub chars: BTreeMap<u8, CharDim>,
    pub ligkern: Vec<LigKernStep>,
    /// Right boundary character.
    pub boundary_char: Option<u8>,
    /// Start of the left-boundary program in `ligkern`.
    pub boundary_program: Option<u16>,
    pub kerns: Vec<FixWord>,
    pub extens: Vec<ExtRecipe>,
    /// `params[0]` is the slant; the rest are in design-size units.
    pub params: Vec<FixWord>,
}

impl Default for FontMetrics {
    fn default() -> Self {
        FontMetrics::new(FixWord::from_int(10))
    }
}

pub const SLANT: usize = 1;
pub const SPACE: usize = 2;
pub const STRETCH: usize = 3;
pub const SHRINK: usize = 4;
pub const XHEIGHT: usize = 5;
pub const QUAD: usize = 6;
pub const EXTRASPACE: usize = 7;

impl FontMetrics {
    pub fn new(design_size: FixWord) -> FontMetrics {
        FontMetrics {
            checksum: 0,
            design_size,
            coding_scheme: String::new(),
            family: String::new(),
            seven_bit_safe: false,
            face: 0,
            extra_header: Vec::new(),
            chars: BTreeMap::new(),
            ligkern: Vec::new(),
            boundary_char: None,
            boundary_program: None,
            kerns: Vec::new(),
            extens: Vec::new(),
            params: Vec::new(),
        }
    }

    /// Smallest character code; 1 for an empty font.
    pub fn bc(&self) -> u8 {
        self.chars.keys().next().copied().unwrap_or(1)
    }

    /// Largest character code; 0 for an empty font.
    pub fn ec(&self) -> u8 {
        self.chars.keys().next_back().copied().unwrap_or(0)
    }

    /// Font parameter by its 1-based number, 0 when absent.
    pub fn param(&self, number: usize) -> FixWord {
        number
            .checked_sub(1)
            .and_then(|i| self.params.get(i))
            .copied()
            .unwrap_or(FixWord::ZERO)
    }

    /// Sets a 1-based parameter, growing the list with zeros as needed.
    pub fn set_param(&mut self, number: usize, value: FixWord) {
        assert!(number >= 1, "font parameters are numbered from 1");
        if self.params.len() < number {
            self.params.resize(number, FixWord::ZERO);
        }
        self.params[number - 1] = value;
    }

    pub fn slant(&self) -> FixWord {
        self.param(SLANT)
    }

    /// Steps of the program starting at `start`, up to and including the
    /// first stop instruction. Follows skips; the walk is bounded by the
    /// program length so a malformed program cannot loop.
    pub fn program_from(&self, start: usize) -> Vec<(usize, LigKernStep)> {
        let mut out = Vec::new();
        let mut i = start;
        while i < self.ligkern.len() && out.len() <= self.ligkern.len() {
            let step = self.ligkern[i];
            out.push((i, step));
            if step.is_stop() {
                break;
            }
            i += usize::from(step.skip) + 1;
        }
        out
    }

    /// Words needed ahead of the logical program in a `.tfm` file: the
    /// boundary-character word plus one indirection word per program start
    /// that is out of reach of an 8-bit remainder.
    pub fn lig_offset(&self) -> usize {
        let base = usize::from(self.boundary_char.is_some());
        let starts = self.lig_starts();
        let mut offset = base;
        loop {
            let far = starts
                .iter()
                .filter(|s| usize::from(**s) + offset >= DIRECT_LIG_LIMIT)
                .count();
            if base + far == offset {
                return offset;
            }
            offset = base + far;
        }
    }

    pub(crate) fn lig_starts(&self) -> BTreeSet<u16> {
        self.chars
            .values()
            .filter_map(|c| match c.tag {
                CharTag::Lig(start) => Some(start),
                _ => None,
            })
            .collect()
    }

    /// Merges nearby dimension values until each table fits its limit,
    /// as PLtoTF does. Returns how many character dimensions changed.
    pub fn shorten_tables(&mut self) -> usize {
        type Field = fn(&mut CharDim) -> &mut FixWord;
        let tables: [(Field, usize, bool); 4] = [
            (|d| &mut d.width, 255, true),
            (|d| &mut d.height, 15, false),
            (|d| &mut d.depth, 15, false),
            (|d| &mut d.italic, 63, false),
        ];
        let mut changed = 0;
        for (field, max, keep_zero) in tables {
            let values: BTreeSet<i32> = self
                .chars
                .values_mut()
                .map(|d| field(d).0)
                .filter(|&v| keep_zero || v != 0)
                .collect();
            let remap = cluster(&values.into_iter().collect::<Vec<_>>(), max);
            for d in self.chars.values_mut() {
                let f = field(d);
                if let Some(&to) = remap.get(&f.0) {
                    if to != f.0 {
                        f.0 = to;
                        changed += 1;
                    }
                }
            }
        }
        changed
    }

    /// Checks every invariant a `.tfm` file imposes.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        self.check_header(&mut v);
        self.check_dimensions(&mut v);
        self.check_tags(&mut v);
        self.check_ligkern(&mut v);
        self.check_params(&mut v);
        if v.is_empty() {
            let words = crate::tfm::encoded_length_words(self);
            if words > MAX_FILE_WORDS {
                v.push(Violation::FileTooLarge { words });
            }
        }
        ValidationReport { violations: v }
    }

    fn check_header(&self, v: &mut Vec<Violation>) {
        if self.design_size < FixWord::ONE {
            v.push(Violation::DesignSizeTooSmall(self.design_size));
        }
        for (field, text, max) in [
            ("CODINGSCHEME", &self.coding_scheme, 39),
            ("FAMILY", &self.family, 19),
        ] {
            if text.len() > max {
                v.push(Violation::StringTooLong {
                    field,
                    len: text.len(),
                    max,
                });
            }
            if text
                .bytes()
                .any(|b| !(b' '..=b'~').contains(&b) || b == b'(' || b == b')')
            {
                v.push(Violation::BadString { field });
            }
        }
    }

    fn check_dimensions(&self, v: &mut Vec<Violation>) {
        let mut widths = BTreeSet::new();
        let mut heights = BTreeSet::new();
        let mut depths = BTreeSet::new();
        let mut italics = BTreeSet::new();
        for (&slot, dim) in &self.chars {
            for (what, value) in [
                ("width", dim.width),
                ("height", dim.height),
                ("depth", dim.depth),
                ("italic correction", dim.italic),
            ] {
                if !value.abs_lt_16() {
                    v.push(Violation::DimensionTooBig {
                        what,
                        slot: Some(slot),
                        value,
                    });
                }
            }
            widths.insert(dim.width);
            heights.insert(dim.height);
            depths.insert(dim.depth);
            italics.insert(dim.italic);
        }
        heights.remove(&FixWord::ZERO);
        depths.remove(&FixWord::ZERO);
        italics.remove(&FixWord::ZERO);
        for (table, distinct, max) in [
            (DimTable::Width, widths.len(), 255),
            (DimTable::Height, heights.len(), 15),
            (DimTable::Depth, depths.len(), 15),
            (DimTable::Italic, italics.len(), 63),
        ] {
            if distinct > max {
                v.push(Violation::TableOverflow {
                    table,
                    distinct,
                    max,
                });
            }
        }
        for &k in &self.kerns {
            if !k.abs_lt_16() {
                v.push(Violation::DimensionTooBig {
                    what: "kern",
                    slot: None,
                    value: k,
                });
            }
        }
    }

    fn check_tags(&self, v: &mut Vec<Violation>) {
        for (&slot, dim) in &self.chars {
            match dim.tag {
                CharTag::None => {}
                CharTag::Lig(start) => {
                    if usize::from(start) >= self.ligkern.len() {
                        v.push(Violation::DanglingLigStart { slot, start });
                    }
                }
                CharTag::List(next) => {
                    if !self.chars.contains_key(&next) {
                        v.push(Violation::MissingChar {
                            context: "charlist successor",
                            slot: next,
                        });
                    }
                }
                CharTag::Ext(index) => match self.extens.get(usize::from(index)) {
                    None => v.push(Violation::DanglingExtensible { slot, index }),
                    Some(recipe) => {
                        // Slot 0 is the "absent" marker for top, mid and bot.
                        if [recipe.top, recipe.mid, recipe.bot].contains(&Some(0)) {
                            v.push(Violation::ZeroExtensiblePiece { index });
                        }
                        let pieces = [recipe.top, recipe.mid, recipe.bot, Some(recipe.rep)];
                        for piece in pieces.into_iter().flatten() {
                            if !self.chars.contains_key(&piece) {
                                v.push(Violation::MissingChar {
                                    context: "extensible piece",
                                    slot: piece,
                                });
                            }
                        }
                    }
                },
            }
        }
        // Charlists must not loop.
        for &start in self.chars.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = start;
            while let Some(CharDim {
                tag: CharTag::List(next),
                ..
            }) = self.chars.get(&cur)
            {
                if !seen.insert(cur) {
                    v.push(Violation::CharlistCycle { slot: start });
                    break;
                }
                cur = *next;
            }
        }
    }

    fn check_ligkern(&self, v: &mut Vec<Violation>) {
        let len = self.ligkern.len();
        let exists = |c: u8| self.chars.contains_key(&c) || self.boundary_char == Some(c);
        for (i, step) in self.ligkern.iter().enumerate() {
            if step.skip > STOP_FLAG {
                v.push(Violation::SpecialLigStep { step: i });
            } else if !step.is_stop() && i + usize::from(step.skip) + 1 >= len {
                v.push(Violation::SkipPastEnd { step: i });
            }
            if !exists(step.next_char) {
                v.push(Violation::MissingChar {
                    context: "lig/kern next character",
                    slot: step.next_char,
                });
            }
            match step.action() {
                LigKernAction::Kern { index } => {
                    if usize::from(index) >= self.kerns.len() {
                        v.push(Violation::DanglingKern { step: i, index });
                    }
                }
                LigKernAction::Lig { char, .. } => {
                    if !self.chars.contains_key(&char) {
                        v.push(Violation::MissingChar {
                            context: "ligature character",
                            slot: char,
                        });
                    }
                }
                LigKernAction::BadOp(op) => v.push(Violation::BadLigOp { step: i, op }),
            }
        }
        if let Some(start) = self.boundary_program {
            if usize::from(start) >= len {
                v.push(Violation::DanglingBoundaryProgram { start });
            }
        }
        if self.lig_offset() > DIRECT_LIG_LIMIT {
            v.push(Violation::TooManyLigPrograms);
        }
    }

    fn check_params(&self, v: &mut Vec<Violation>) {
        for (i, &p) in self.params.iter().enumerate() {
            let number = i + 1;
            let ok = if number == SLANT {
                p != FixWord::MIN
            } else {
                p.abs_lt_16()
            };
            if !ok {
                v.push(Violation::ParamOutOfRange { number, value: p });
            }
        }
        if self.params.len() > 254 {
            v.push(Violation::TooManyParams(self.params.len()));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimTable {
    Width,
    Height,
    Depth,
    Italic,
}

impl fmt::Display for DimTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DimTable::Width => "width",
            DimTable::Height => "height",
            DimTable::Depth => "depth",
            DimTable::Italic => "italic",
        })
    }
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("{table} table overflow: {distinct} distinct nonzero values, at most {max} allowed")]
    TableOverflow {
        table: DimTable,
        distinct: usize,
        max: usize,
    },
    #[error("dangling kern: step {step} references kern {index}")]
    DanglingKern { step: usize, index: u16 },
    #[error("character {slot:#o} starts its lig/kern program at {start}, past the end")]
    DanglingLigStart { slot: u8, start: u16 },
    #[error("left boundary program starts at {start}, past the end")]
    DanglingBoundaryProgram { start: u16 },
    #[error("lig/kern step {step} skips past the end of the program")]
    SkipPastEnd { step: usize },
    #[error("lig/kern step {step} has skip > 128; special words are not part of the logical program")]
    SpecialLigStep { step: usize },
    #[error("lig/kern step {step} has unknown ligature op {op}")]
    BadLigOp { step: usize, op: u8 },
    #[error("{context} {slot:#o} does not exist")]
    MissingChar { context: &'static str, slot: u8 },
    #[error("character {slot:#o} has extensible recipe {index}, which does not exist")]
    DanglingExtensible { slot: u8, index: u8 },
    #[error("extensible recipe {index} uses slot 0 as an optional piece, which cannot be stored")]
    ZeroExtensiblePiece { index: u8 },
    #[error("charlist starting at {slot:#o} loops")]
    CharlistCycle { slot: u8 },
    #[error("too many lig/kern programs start beyond word 255")]
    TooManyLigPrograms,
    #[error("{what} {value} is not less than 16 in magnitude")]
    DimensionTooBig {
        what: &'static str,
        slot: Option<u8>,
        value: FixWord,
    },
    #[error("parameter {number} value {value} is out of range")]
    ParamOutOfRange { number: usize, value: FixWord },
    #[error("{0} parameters; at most 254 fit")]
    TooManyParams(usize),
    #[error("design size {0} is below 1pt")]
    DesignSizeTooSmall(FixWord),
    #[error("{field} is {len} characters; at most {max} fit")]
    StringTooLong {
        field: &'static str,
        len: usize,
        max: usize,
    },
    #[error("{field} must be printable ASCII without parentheses")]
    BadString { field: &'static str },
    #[error("encoded file would be {words} words, more than 32767")]
    FileTooLarge { words: usize },
}

/// Every invariant [`FontMetrics::validate`] found violated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, violation) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{violation}")?;
        }
        Ok(())
    }
}

/// Greedy cover of sorted `v` by intervals `[l, l + d]`: the interval count
/// and the smallest `d` that would need fewer intervals.
fn min_cover(v: &[i32], d: i64) -> (usize, i64) {
    let (mut count, mut next, mut i) = (0, i64::MAX, 0);
    while i < v.len() {
        count += 1;
        let l = i64::from(v[i]);
        while i + 1 < v.len() && i64::from(v[i + 1]) <= l + d {
            i += 1;
        }
        i += 1;
        if i < v.len() {
            next = next.min(i64::from(v[i]) - l);
        }
    }
    (count, next)
}

/// Maps each of the sorted distinct values `v` to the midpoint of its
/// cluster, using the narrowest clusters that leave at most `max` values.
fn cluster(v: &[i32], max: usize) -> BTreeMap<i32, i32> {
    let mut d = 0;
    if v.len() > max {
        loop {
            let (count, next) = min_cover(v, d);
            if count <= max {
                break;
            }
            d = next;
        }
    }
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < v.len() {
        let start = i;
        let l = i64::from(v[i]);
        while i + 1 < v.len() && i64::from(v[i + 1]) <= l + d {
            i += 1;
        }
        let mid = ((l + i64::from(v[i])).div_euclid(2)) as i32;
        for &x in &v[start..=i] {
            out.insert(x, mid);
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn one_char() -> FontMetrics {
        let mut m = FontMetrics::default();
        m.chars.insert(b'A', CharDim::with_width(FixWord::ONE / 2));
        m
    }

    #[test]
    fn empty_font_is_valid() {
        let m = FontMetrics::default();
        assert_eq!((m.bc(), m.ec()), (1, 0));
        assert!(m.validate().is_empty());
    }

    #[test]
    fn width_table_overflow() {
        let mut m = FontMetrics::default();
        for slot in 0..=255u8 {
            m.chars
                .insert(slot, CharDim::with_width(FixWord(1000 + i32::from(slot))));
        }
        let report = m.validate();
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::TableOverflow {
                table: DimTable::Width,
                distinct: 256,
                ..
            }
        )));
        assert!(report.to_string().contains("width table overflow"));
    }

    #[test]
    fn dangling_kern_at_boundary() {
        let mut m = one_char();
        m.kerns.push(FixWord::ONE / 10);
        m.ligkern.push(LigKernStep::kern(b'A', 1).stopping());
        m.chars.get_mut(&b'A').unwrap().tag = CharTag::Lig(0);
        let report = m.validate();
        assert_eq!(
            report.violations,
            alloc::vec![Violation::DanglingKern { step: 0, index: 1 }]
        );
        assert!(report.to_string().contains("dangling kern"));
        m.ligkern[0] = LigKernStep::kern(b'A', 0).stopping();
        assert!(m.validate().is_empty());
    }

    #[test]
    fn height_table_allows_fifteen() {
        let mut m = FontMetrics::default();
        for slot in 0..15u8 {
            let mut d = CharDim::with_width(FixWord::ONE);
            d.height = FixWord(1 + i32::from(slot));
            m.chars.insert(slot, d);
        }
        assert!(m.validate().is_empty());
        let mut d = CharDim::with_width(FixWord::ONE);
        d.height = FixWord(100);
        m.chars.insert(200, d);
        assert_eq!(m.validate().violations.len(), 1);
    }

    #[test]
    fn charlist_cycle_detected() {
        let mut m = one_char();
        m.chars.insert(b'B', CharDim::with_width(FixWord::ONE));
        m.chars.get_mut(&b'A').unwrap().tag = CharTag::List(b'B');
        m.chars.get_mut(&b'B').unwrap().tag = CharTag::List(b'A');
        assert!(m
            .validate()
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CharlistCycle { .. })));
    }

    #[test]
    fn lig_offset_accounts_for_far_programs() {
        let mut m = FontMetrics::default();
        m.kerns.push(FixWord::ONE);
        for i in 0..300u16 {
            m.ligkern.push(LigKernStep::kern(0, 0).stopping());
            let _ = i;
        }
        m.chars.insert(0, CharDim { tag: CharTag::Lig(10), ..CharDim::with_width(FixWord::ONE) });
        m.chars.insert(1, CharDim { tag: CharTag::Lig(255), ..CharDim::with_width(FixWord::ONE) });
        m.chars.insert(2, CharDim { tag: CharTag::Lig(299), ..CharDim::with_width(FixWord::ONE) });
        assert_eq!(m.lig_offset(), 2);
        m.boundary_char = Some(0);
        assert_eq!(m.lig_offset(), 3);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn validate_is_total_on_garbage() {
        let mut m = FontMetrics::new(FixWord::MIN);
        m.coding_scheme = "(bad)".into();
        m.params = alloc::vec![FixWord::MIN; 300];
        m.ligkern.push(LigKernStep { skip: 200, next_char: 9, op: 99, remainder: 0 });
        m.chars.insert(5, CharDim { tag: CharTag::Ext(7), ..CharDim::with_width(FixWord::MAX) });
        m.boundary_program = Some(40);
        assert!(!m.validate().is_empty());
    }

    #[test]
    fn shorten_heights() {
        let mut m = FontMetrics::default();
        for slot in 0..40u8 {
            let mut d = CharDim::with_width(FixWord(1000 * i32::from(slot % 3)));
            d.height = FixWord(10_000 + 97 * i32::from(slot));
            d.depth = FixWord(if slot % 2 == 0 { 0 } else { 5 });
            m.chars.insert(slot, d);
        }
        let before = m.clone();
        assert!(!m.validate().is_empty());
        let changed = m.shorten_tables();
        assert!(m.validate().is_empty(), "{}", m.validate());
        assert!(changed > 0);
        let heights: BTreeSet<FixWord> = m.chars.values().map(|d| d.height).collect();
        assert!(heights.len() <= 15);
        for (slot, d) in &m.chars {
            let was = before.chars[slot];
            assert_eq!((d.width, d.depth), (was.width, was.depth));
            assert!((d.height.0 - was.height.0).abs() <= 97 * 3);
        }
        let mut again = m.clone();
        assert_eq!(again.shorten_tables(), 0);
        assert_eq!(again, m);
    }
}
