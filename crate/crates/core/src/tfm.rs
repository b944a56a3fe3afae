//! Reader and writer for the binary `.tfm` format.
//!
//! The layout is big-endian throughout: twelve 16-bit section lengths, the
//! header words, then `char_info`, the four dimension tables, the lig/kern
//! program, kerns, extensible recipes and parameters.
//!
//! Writing is canonical. Dimension tables are deduplicated and sorted with the
//! mandatory leading zero, the header is always 18 words plus any extra words
//! carried by the model, and lig/kern programs that start beyond word 255 are
//! reached through indirection words placed ahead of the logical program.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::fixword::FixWord;
use crate::metrics::{
    CharDim, CharTag, ExtRecipe, FontMetrics, LigKernStep, ValidationReport, DIRECT_LIG_LIMIT,
    STOP_FLAG,
};

const STANDARD_HEADER_WORDS: usize = 18;
const BOUNDARY_SKIP: u8 = 255;
const INDIRECT_SKIP: u8 = 129;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TfmError {
    #[error("file truncated in {section} at byte {offset}")]
    TruncatedFile { section: &'static str, offset: usize },
    #[error("declared length {declared} words does not match the section lengths ({computed} words)")]
    LengthMismatch { declared: usize, computed: usize },
    #[error("{section} at byte {offset}: index {index} is out of range (table has {len} entries)")]
    IndexOutOfRange {
        section: &'static str,
        offset: usize,
        index: usize,
        len: usize,
    },
    #[error("{section} at byte {offset}: {reason}")]
    Malformed {
        section: &'static str,
        offset: usize,
        reason: &'static str,
    },
    #[error("metrics cannot be encoded: {0}")]
    Unencodable(ValidationReport),
}

/// The twelve section lengths, in file order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SectionLengths {
    pub lf: u16,
    pub lh: u16,
    pub bc: u16,
    pub ec: u16,
    pub nw: u16,
    pub nh: u16,
    pub nd: u16,
    pub ni: u16,
    pub nl: u16,
    pub nk: u16,
    pub ne: u16,
    pub np: u16,
}

impl SectionLengths {
    fn char_count(&self) -> usize {
        (usize::from(self.ec) + 1).saturating_sub(usize::from(self.bc))
    }

    /// `lf` as implied by the other eleven lengths.
    pub fn computed_lf(&self) -> usize {
        6 + usize::from(self.lh)
            + self.char_count()
            + [
                self.nw, self.nh, self.nd, self.ni, self.nl, self.nk, self.ne, self.np,
            ]
            .iter()
            .map(|n| usize::from(*n))
            .sum::<usize>()
    }

    pub fn read(data: &[u8]) -> Result<SectionLengths, TfmError> {
        if data.len() < 24 {
            return Err(TfmError::TruncatedFile {
                section: "section lengths",
                offset: data.len(),
            });
        }
        let mut n = [0u16; 12];
        for (i, v) in n.iter_mut().enumerate() {
            *v = u16::from_be_bytes([data[2 * i], data[2 * i + 1]]);
            if *v >= 0x8000 {
                return Err(TfmError::Malformed {
                    section: "section lengths",
                    offset: 2 * i,
                    reason: "length has the sign bit set",
                });
            }
        }
        let [lf, lh, bc, ec, nw, nh, nd, ni, nl, nk, ne, np] = n;
        Ok(SectionLengths {
            lf,
            lh,
            bc,
            ec,
            nw,
            nh,
            nd,
            ni,
            nl,
            nk,
            ne,
            np,
        })
    }
}

struct DimTables {
    widths: Vec<FixWord>,
    heights: Vec<FixWord>,
    depths: Vec<FixWord>,
    italics: Vec<FixWord>,
}

impl DimTables {
    fn build(m: &FontMetrics) -> DimTables {
        let mut widths = BTreeSet::new();
        let mut heights = BTreeSet::new();
        let mut depths = BTreeSet::new();
        let mut italics = BTreeSet::new();
        for d in m.chars.values() {
            widths.insert(d.width);
            heights.insert(d.height);
            depths.insert(d.depth);
            italics.insert(d.italic);
        }
        // Only the width table keeps an explicit zero entry besides index 0:
        // width index 0 means "no character".
        let with_zero = |set: BTreeSet<FixWord>, keep_zero: bool| {
            let mut v = alloc::vec![FixWord::ZERO];
            v.extend(set.into_iter().filter(|x| keep_zero || *x != FixWord::ZERO));
            v
        };
        DimTables {
            widths: with_zero(widths, true),
            heights: with_zero(heights, false),
            depths: with_zero(depths, false),
            italics: with_zero(italics, false),
        }
    }
}

fn index_of(table: &[FixWord], value: FixWord) -> usize {
    table[1..]
        .binary_search(&value)
        .map(|i| i + 1)
        .unwrap_or(0)
}

fn lig_word_count(m: &FontMetrics) -> usize {
    m.lig_offset() + m.ligkern.len() + usize::from(m.boundary_program.is_some())
}

/// Length in words of the file [`emit_tfm`] would produce.
pub fn encoded_length_words(m: &FontMetrics) -> usize {
    let t = DimTables::build(m);
    let chars = if m.chars.is_empty() {
        0
    } else {
        usize::from(m.ec()) - usize::from(m.bc()) + 1
    };
    6 + STANDARD_HEADER_WORDS
        + m.extra_header.len()
        + chars
        + t.widths.len()
        + t.heights.len()
        + t.depths.len()
        + t.italics.len()
        + lig_word_count(m)
        + m.kerns.len()
        + m.extens.len()
        + m.params.len()
}

fn push_u16(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u16).to_be_bytes());
}

fn push_fix(out: &mut Vec<u8>, v: FixWord) {
    out.extend_from_slice(&v.0.to_be_bytes());
}

fn push_bcpl(out: &mut Vec<u8>, s: &str, bytes: usize) {
    let start = out.len();
    out.push(s.len() as u8);
    out.extend_from_slice(s.as_bytes());
    out.resize(start + bytes, 0);
}

/// Encodes metrics as a `.tfm` file.
pub fn emit_tfm(m: &FontMetrics) -> Result<Vec<u8>, TfmError> {
    let report = m.validate();
    if !report.is_empty() {
        return Err(TfmError::Unencodable(report));
    }
    let t = DimTables::build(m);
    let (bc, ec) = (usize::from(m.bc()), usize::from(m.ec()));
    let offset = m.lig_offset();
    let far: Vec<u16> = m
        .lig_starts()
        .into_iter()
        .filter(|s| usize::from(*s) + offset >= DIRECT_LIG_LIMIT)
        .collect();
    let first_far = usize::from(m.boundary_char.is_some());

    let mut words: Vec<LigKernStep> = Vec::with_capacity(lig_word_count(m));
    if let Some(bchar) = m.boundary_char {
        words.push(LigKernStep {
            skip: BOUNDARY_SKIP,
            next_char: bchar,
            op: 0,
            remainder: 0,
        });
    }
    for &start in &far {
        let target = usize::from(start) + offset;
        words.push(LigKernStep {
            skip: INDIRECT_SKIP,
            next_char: 0,
            op: (target >> 8) as u8,
            remainder: target as u8,
        });
    }
    words.extend_from_slice(&m.ligkern);
    if let Some(p) = m.boundary_program {
        let target = usize::from(p) + offset;
        words.push(LigKernStep {
            skip: BOUNDARY_SKIP,
            next_char: 0,
            op: (target >> 8) as u8,
            remainder: target as u8,
        });
    }

    let lh = STANDARD_HEADER_WORDS + m.extra_header.len();
    let nc = if m.chars.is_empty() { 0 } else { ec - bc + 1 };
    let lf = encoded_length_words(m);
    let mut out = Vec::with_capacity(4 * lf);
    for n in [
        lf,
        lh,
        bc,
        ec,
        t.widths.len(),
        t.heights.len(),
        t.depths.len(),
        t.italics.len(),
        words.len(),
        m.kerns.len(),
        m.extens.len(),
        m.params.len(),
    ] {
        push_u16(&mut out, n);
    }

    out.extend_from_slice(&m.checksum.to_be_bytes());
    push_fix(&mut out, m.design_size);
    push_bcpl(&mut out, &m.coding_scheme, 40);
    push_bcpl(&mut out, &m.family, 20);
    out.extend_from_slice(&[if m.seven_bit_safe { 0x80 } else { 0 }, 0, 0, m.face]);
    for w in &m.extra_header {
        out.extend_from_slice(&w.to_be_bytes());
    }

    for c in 0..nc {
        let slot = (bc + c) as u8;
        let Some(d) = m.chars.get(&slot) else {
            out.extend_from_slice(&[0; 4]);
            continue;
        };
        let (tag, rem) = match d.tag {
            CharTag::None => (0u8, 0u8),
            CharTag::Lig(start) => {
                let direct = usize::from(start) + offset;
                let r = if direct < DIRECT_LIG_LIMIT {
                    direct
                } else {
                    first_far + far.binary_search(&start).unwrap_or_default()
                };
                (1, r as u8)
            }
            CharTag::List(next) => (2, next),
            CharTag::Ext(i) => (3, i),
        };
        out.push(index_of(&t.widths, d.width) as u8);
        out.push((index_of(&t.heights, d.height) << 4 | index_of(&t.depths, d.depth)) as u8);
        out.push((index_of(&t.italics, d.italic) << 2) as u8 | tag);
        out.push(rem);
    }

    for table in [&t.widths, &t.heights, &t.depths, &t.italics] {
        for v in table.iter() {
            push_fix(&mut out, *v);
        }
    }
    for w in &words {
        out.extend_from_slice(&[w.skip, w.next_char, w.op, w.remainder]);
    }
    for k in &m.kerns {
        push_fix(&mut out, *k);
    }
    for e in &m.extens {
        out.extend_from_slice(&[
            e.top.unwrap_or(0),
            e.mid.unwrap_or(0),
            e.bot.unwrap_or(0),
            e.rep,
        ]);
    }
    for p in &m.params {
        push_fix(&mut out, *p);
    }
    debug_assert_eq!(out.len(), 4 * lf);
    Ok(out)
}

struct Reader<'a> {
    data: &'a [u8],
}

impl Reader<'_> {
    fn word(&self, index: usize, section: &'static str) -> Result<[u8; 4], TfmError> {
        let offset = 4 * index;
        self.data
            .get(offset..offset + 4)
            .map(|b| [b[0], b[1], b[2], b[3]])
            .ok_or(TfmError::TruncatedFile { section, offset })
    }

    fn fix(&self, index: usize, section: &'static str) -> Result<FixWord, TfmError> {
        Ok(FixWord(i32::from_be_bytes(self.word(index, section)?)))
    }

    fn table(&self, start: usize, len: u16, section: &'static str) -> Result<Vec<FixWord>, TfmError> {
        (start..start + usize::from(len))
            .map(|i| self.fix(i, section))
            .collect()
    }

    fn bcpl(&self, word: usize, max: usize, section: &'static str) -> Result<String, TfmError> {
        let offset = 4 * word;
        let bytes = self
            .data
            .get(offset..offset + max + 1)
            .ok_or(TfmError::TruncatedFile { section, offset })?;
        let len = usize::from(bytes[0]);
        if len > max {
            return Err(TfmError::Malformed {
                section,
                offset,
                reason: "string length exceeds its field",
            });
        }
        Ok(bytes[1..=len].iter().map(|b| char::from(*b)).collect())
    }
}

/// Decodes a `.tfm` file. Bytes beyond the declared `4·lf` are ignored.
pub fn parse_tfm(data: &[u8]) -> Result<FontMetrics, TfmError> {
    let n = SectionLengths::read(data)?;
    let declared = usize::from(n.lf);
    if data.len() < 4 * declared {
        return Err(TfmError::TruncatedFile {
            section: "body",
            offset: data.len(),
        });
    }
    let data = &data[..4 * declared];
    if n.bc > n.ec + 1 || n.ec > 255 {
        return Err(TfmError::Malformed {
            section: "section lengths",
            offset: 4,
            reason: "character range must satisfy bc <= ec + 1 <= 256",
        });
    }
    if n.lh < 2 {
        return Err(TfmError::Malformed {
            section: "section lengths",
            offset: 2,
            reason: "header needs at least two words",
        });
    }
    for (len, max, reason) in [
        (n.nw, 256, "width table must have 1..=256 entries"),
        (n.nh, 16, "height table must have 1..=16 entries"),
        (n.nd, 16, "depth table must have 1..=16 entries"),
        (n.ni, 64, "italic table must have 1..=64 entries"),
        (n.ne, 256, "at most 256 extensible recipes"),
    ] {
        let min = if max == 256 && reason.starts_with("at most") { 0 } else { 1 };
        if len < min || len > max {
            return Err(TfmError::Malformed {
                section: "section lengths",
                offset: 8,
                reason,
            });
        }
    }
    let computed = n.computed_lf();
    if computed != declared {
        return Err(TfmError::LengthMismatch { declared, computed });
    }

    let r = Reader { data };
    let header = 6;
    let char_base = header + usize::from(n.lh);
    let width_base = char_base + n.char_count();
    let height_base = width_base + usize::from(n.nw);
    let depth_base = height_base + usize::from(n.nh);
    let italic_base = depth_base + usize::from(n.nd);
    let lig_base = italic_base + usize::from(n.ni);
    let kern_base = lig_base + usize::from(n.nl);
    let exten_base = kern_base + usize::from(n.nk);
    let param_base = exten_base + usize::from(n.ne);

    let mut m = FontMetrics::new(r.fix(header + 1, "header")?);
    m.checksum = u32::from_be_bytes(r.word(header, "header")?);
    if n.lh >= 12 {
        m.coding_scheme = r.bcpl(header + 2, 39, "header")?;
    }
    if n.lh >= 17 {
        m.family = r.bcpl(header + 12, 19, "header")?;
    }
    if n.lh >= 18 {
        let w = r.word(header + 17, "header")?;
        m.seven_bit_safe = w[0] & 0x80 != 0;
        m.face = w[3];
    }
    for i in STANDARD_HEADER_WORDS..usize::from(n.lh) {
        m.extra_header
            .push(u32::from_be_bytes(r.word(header + i, "header")?));
    }

    let widths = r.table(width_base, n.nw, "width")?;
    let heights = r.table(height_base, n.nh, "height")?;
    let depths = r.table(depth_base, n.nd, "depth")?;
    let italics = r.table(italic_base, n.ni, "italic")?;
    for (table, base, name) in [
        (&widths, width_base, "width"),
        (&heights, height_base, "height"),
        (&depths, depth_base, "depth"),
        (&italics, italic_base, "italic"),
    ] {
        if table[0] != FixWord::ZERO {
            return Err(TfmError::Malformed {
                section: name,
                offset: 4 * base,
                reason: "first entry must be zero",
            });
        }
    }

    let words: Vec<LigKernStep> = (0..usize::from(n.nl))
        .map(|i| {
            r.word(lig_base + i, "lig_kern").map(|w| LigKernStep {
                skip: w[0],
                next_char: w[1],
                op: w[2],
                remainder: w[3],
            })
        })
        .collect::<Result<_, _>>()?;
    let program = LogicalProgram::split(&words, lig_base)?;
    m.boundary_char = program.boundary_char;
    m.boundary_program = program.boundary_program;
    m.ligkern = words[program.begin..program.end].to_vec();

    m.kerns = r.table(kern_base, n.nk, "kern")?;
    for i in 0..usize::from(n.ne) {
        let w = r.word(exten_base + i, "exten")?;
        let piece = |b: u8| (b != 0).then_some(b);
        m.extens.push(ExtRecipe {
            top: piece(w[0]),
            mid: piece(w[1]),
            bot: piece(w[2]),
            rep: w[3],
        });
    }
    m.params = r.table(param_base, n.np, "param")?;

    let lookup = |table: &[FixWord], index: usize, section: &'static str, offset: usize| {
        table
            .get(index)
            .copied()
            .ok_or(TfmError::IndexOutOfRange {
                section,
                offset,
                index,
                len: table.len(),
            })
    };
    let mut chars = BTreeMap::new();
    for c in 0..n.char_count() {
        let offset = 4 * (char_base + c);
        let w = r.word(char_base + c, "char_info")?;
        if w[0] == 0 {
            continue;
        }
        let slot = (usize::from(n.bc) + c) as u8;
        let tag = match w[2] & 3 {
            0 => CharTag::None,
            1 => CharTag::Lig(program.resolve_start(&words, w[3], offset)?),
            2 => CharTag::List(w[3]),
            _ => {
                if usize::from(w[3]) >= m.extens.len() {
                    return Err(TfmError::IndexOutOfRange {
                        section: "char_info",
                        offset,
                        index: usize::from(w[3]),
                        len: m.extens.len(),
                    });
                }
                CharTag::Ext(w[3])
            }
        };
        chars.insert(
            slot,
            CharDim {
                width: lookup(&widths, usize::from(w[0]), "char_info", offset)?,
                height: lookup(&heights, usize::from(w[1] >> 4), "char_info", offset)?,
                depth: lookup(&depths, usize::from(w[1] & 15), "char_info", offset)?,
                italic: lookup(&italics, usize::from(w[2] >> 2), "char_info", offset)?,
                tag,
            },
        );
    }
    m.chars = chars;

    for (i, step) in m.ligkern.iter().enumerate() {
        if let crate::metrics::LigKernAction::Kern { index } = step.action() {
            if usize::from(index) >= m.kerns.len() {
                return Err(TfmError::IndexOutOfRange {
                    section: "lig_kern",
                    offset: 4 * (lig_base + program.begin + i),
                    index: usize::from(index),
                    len: m.kerns.len(),
                });
            }
        }
    }
    Ok(m)
}

/// Where the logical lig/kern program sits inside the stored words.
struct LogicalProgram {
    begin: usize,
    end: usize,
    base_word: usize,
    boundary_char: Option<u8>,
    boundary_program: Option<u16>,
}

impl LogicalProgram {
    fn split(words: &[LigKernStep], base_word: usize) -> Result<LogicalProgram, TfmError> {
        let nl = words.len();
        let boundary_char = words
            .first()
            .filter(|w| w.skip == BOUNDARY_SKIP)
            .map(|w| w.next_char);
        let trailing = (nl >= 2 && words[nl - 1].skip == BOUNDARY_SKIP)
            .then(|| usize::from(words[nl - 1].op) << 8 | usize::from(words[nl - 1].remainder));
        let end = if trailing.is_some() { nl - 1 } else { nl };
        let begin = words[..end]
            .iter()
            .take_while(|w| w.skip > STOP_FLAG)
            .count();
        if let Some(i) = words[begin..end].iter().position(|w| w.skip > STOP_FLAG) {
            return Err(TfmError::Malformed {
                section: "lig_kern",
                offset: 4 * (base_word + begin + i),
                reason: "special instruction inside the program is not supported",
            });
        }
        let mut program = LogicalProgram {
            begin,
            end,
            base_word,
            boundary_char,
            boundary_program: None,
        };
        if let Some(target) = trailing {
            program.boundary_program = Some(program.relative(target, 4 * (base_word + nl - 1))?);
        }
        Ok(program)
    }

    fn relative(&self, target: usize, offset: usize) -> Result<u16, TfmError> {
        if target < self.begin || target >= self.end {
            return Err(TfmError::IndexOutOfRange {
                section: "lig_kern",
                offset,
                index: target,
                len: self.end,
            });
        }
        Ok((target - self.begin) as u16)
    }

    fn resolve_start(&self, words: &[LigKernStep], remainder: u8, offset: usize) -> Result<u16, TfmError> {
        let r = usize::from(remainder);
        let Some(w) = words.get(r) else {
            return Err(TfmError::IndexOutOfRange {
                section: "char_info",
                offset,
                index: r,
                len: words.len(),
            });
        };
        if w.skip > STOP_FLAG {
            let target = usize::from(w.op) << 8 | usize::from(w.remainder);
            self.relative(target, 4 * (self.base_word + r))
        } else {
            self.relative(r, offset)
        }
    }
}

/// The classic PLtoTF checksum over the character range and widths.
pub fn compute_checksum(m: &FontMetrics) -> u32 {
    let (bc, ec) = (i64::from(m.bc()), i64::from(m.ec()));
    let mut b = [bc, ec, bc, ec];
    const MODULI: [i64; 4] = [255, 253, 251, 247];
    for (&slot, d) in &m.chars {
        let w = i64::from(d.width.0) + (i64::from(slot) + 4) * 0o20_000_000;
        for (acc, modulus) in b.iter_mut().zip(MODULI) {
            *acc = (*acc + *acc + w).rem_euclid(modulus);
        }
    }
    u32::from_be_bytes(b.map(|x| x as u8))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::LigOp;

    fn sample() -> FontMetrics {
        let mut m = FontMetrics::default();
        m.coding_scheme = "TEX MATH ITALIC".into();
        m.family = "RTXMI".into();
        m.chars.insert(b'A', CharDim::with_width(FixWord::ONE / 2));
        let mut b = CharDim::with_width(FixWord::ONE / 2);
        b.height = FixWord::ONE / 4;
        b.tag = CharTag::Lig(0);
        m.chars.insert(b'B', b);
        m.kerns.push(FixWord(-1000));
        m.ligkern.push(LigKernStep::kern(b'A', 0));
        m.ligkern.push(LigKernStep::lig(LigOp::Lig, b'B', b'A').stopping());
        m.params = alloc::vec![FixWord::ONE / 4, FixWord::ONE / 3];
        m.checksum = compute_checksum(&m);
        m
    }

    #[test]
    fn empty_font_length_follows_formula() {
        let m = FontMetrics::default();
        let bytes = emit_tfm(&m).unwrap();
        let n = SectionLengths::read(&bytes).unwrap();
        assert_eq!(n.computed_lf(), usize::from(n.lf));
        // lh = 18 and the four mandatory zero entries.
        assert_eq!(usize::from(n.lf), 6 + 18 + 4);
        assert_eq!(bytes.len(), 4 * usize::from(n.lf));
        let back = parse_tfm(&bytes).unwrap();
        assert_eq!((back.bc(), back.ec()), (1, 0));
        assert_eq!(back.design_size, FixWord::from_int(10));
    }

    #[test]
    fn one_char_font() {
        let mut m = FontMetrics::default();
        m.chars.insert(b'A', CharDim::with_width(FixWord::ONE / 2));
        let back = parse_tfm(&emit_tfm(&m).unwrap()).unwrap();
        assert_eq!(back.chars[&b'A'].width, FixWord::ONE / 2);
    }

    #[test]
    fn shared_widths_are_deduplicated() {
        let m = sample();
        let n = SectionLengths::read(&emit_tfm(&m).unwrap()).unwrap();
        assert_eq!(n.nw, 2);
        assert_eq!(n.nh, 2);
    }

    #[test]
    fn zero_width_char_exists() {
        let mut m = FontMetrics::default();
        m.chars.insert(0, CharDim::default());
        let bytes = emit_tfm(&m).unwrap();
        assert_eq!(SectionLengths::read(&bytes).unwrap().nw, 2);
        assert_eq!(parse_tfm(&bytes).unwrap(), m);
    }

    #[test]
    fn round_trips() {
        let m = sample();
        let bytes = emit_tfm(&m).unwrap();
        let back = parse_tfm(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(emit_tfm(&back).unwrap(), bytes);
    }

    #[test]
    fn boundary_and_far_programs_round_trip() {
        let mut m = sample();
        m.boundary_char = Some(b'A');
        for _ in 0..300 {
            m.ligkern.push(LigKernStep::kern(b'B', 0).stopping());
        }
        let mut c = CharDim::with_width(FixWord::ONE);
        c.tag = CharTag::Lig(290);
        m.chars.insert(b'C', c);
        m.boundary_program = Some(5);
        let bytes = emit_tfm(&m).unwrap();
        let back = parse_tfm(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(emit_tfm(&back).unwrap(), bytes);
    }

    #[test]
    fn truncated_and_mismatched() {
        let bytes = emit_tfm(&sample()).unwrap();
        assert!(matches!(
            parse_tfm(&bytes[..10]),
            Err(TfmError::TruncatedFile { .. })
        ));
        assert!(matches!(
            parse_tfm(&bytes[..bytes.len() - 4]),
            Err(TfmError::TruncatedFile { .. })
        ));
        let mut bad = bytes.clone();
        bad[1] -= 1;
        bad.truncate(bad.len() - 4);
        assert!(matches!(
            parse_tfm(&bad),
            Err(TfmError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn out_of_range_width_index() {
        let mut bytes = emit_tfm(&sample()).unwrap();
        let char_base = 4 * (6 + 18);
        bytes[char_base] = 9;
        match parse_tfm(&bytes) {
            Err(TfmError::IndexOutOfRange { section, offset, .. }) => {
                assert_eq!(section, "char_info");
                assert_eq!(offset, char_base);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trailing_junk_is_not_read() {
        let mut bytes = emit_tfm(&sample()).unwrap();
        bytes.extend_from_slice(&[0xff; 7]);
        assert_eq!(parse_tfm(&bytes).unwrap(), sample());
    }

    #[test]
    fn checksum_is_deterministic() {
        assert_eq!(compute_checksum(&sample()), compute_checksum(&sample()));
        assert_eq!(compute_checksum(&FontMetrics::default()), 0x0100_0100);
    }

    #[test]
    fn unencodable_is_reported() {
        let mut m = sample();
        m.ligkern[0] = LigKernStep::kern(b'A', 7);
        assert!(matches!(emit_tfm(&m), Err(TfmError::Unencodable(_))));
    }
}
