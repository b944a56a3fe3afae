//! Virtual fonts: the binary `.vf` codec, its `.vpl` text twin and the
//! composer that assembles a virtual font from several base fonts.

mod compose;
mod vpl;

pub use compose::{compose, ComposeError, CompositionPlan, KernOverride, SlotRule};
pub use vpl::{emit_vpl, parse_vpl, VplError};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::fixword::FixWord;

const PRE: u8 = 247;
const POST: u8 = 248;
const VF_ID: u8 = 202;
const FNT_DEF1: u8 = 243;
const LONG_CHAR: u8 = 242;

const SET1: u8 = 128;
const SET_RULE: u8 = 132;
const PUSH: u8 = 141;
const POP: u8 = 142;
const RIGHT1: u8 = 143;
const DOWN1: u8 = 157;
const FNT_NUM_0: u8 = 171;
const FNT1: u8 = 235;
const XXX1: u8 = 239;

/// A font a virtual font draws characters from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseFont {
    /// The number `SELECTFONT` refers to.
    pub index: u32,
    pub checksum: u32,
    /// Relative to the virtual font's design size.
    pub scale: FixWord,
    /// In points.
    pub design: FixWord,
    pub area: String,
    pub name: String,
}

impl BaseFont {
    pub fn new(index: u32, name: impl Into<String>) -> BaseFont {
        BaseFont {
            index,
            checksum: 0,
            scale: FixWord::ONE,
            design: FixWord::from_int(10),
            area: String::new(),
            name: name.into(),
        }
    }
}

/// The DVI subset allowed in packets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PacketOp {
    SetChar(u8),
    SelectFont(u32),
    MoveRight(FixWord),
    MoveDown(FixWord),
    Push,
    Pop,
    SetRule { height: FixWord, width: FixWord },
    Special(Vec<u8>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Packet {
    pub width: FixWord,
    pub program: Vec<PacketOp>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualFont {
    pub comment: String,
    pub checksum: u32,
    pub design_size: FixWord,
    pub base_fonts: Vec<BaseFont>,
    pub packets: BTreeMap<u8, Packet>,
}

impl Default for VirtualFont {
    fn default() -> Self {
        VirtualFont {
            comment: String::new(),
            checksum: 0,
            design_size: FixWord::from_int(10),
            base_fonts: Vec::new(),
            packets: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VfError {
    #[error("bad preamble at byte {offset}: {reason}")]
    BadPreamble { offset: usize, reason: &'static str },
    #[error("packet for character {slot:#o} has unbalanced push/pop")]
    UnbalancedPushPop { slot: u8 },
    #[error("packet at byte {offset} is truncated")]
    TruncatedPacket { offset: usize },
    #[error("file truncated at byte {offset}")]
    Truncated { offset: usize },
    #[error("packet for character {slot:#o}: unsupported DVI command {opcode} at byte {offset}")]
    UnsupportedOp { slot: u8, opcode: u8, offset: usize },
    #[error("packet for character {slot:#o} selects font {font}, which is not declared")]
    UnknownFont { slot: u8, font: u32 },
    #[error("byte {offset}: {reason}")]
    Malformed { offset: usize, reason: &'static str },
    #[error("cannot encode: {0}")]
    Unencodable(&'static str),
}

impl VirtualFont {
    /// Checks everything the binary encoding requires.
    pub fn check(&self) -> Result<(), VfError> {
        if !fits_latin1(&self.comment) {
            return Err(VfError::Unencodable("comment must be at most 255 Latin-1 characters"));
        }
        let mut indices = BTreeSet::new();
        for f in &self.base_fonts {
            if !indices.insert(f.index) {
                return Err(VfError::Unencodable("font number declared twice"));
            }
            if !fits_latin1(&f.area) || !fits_latin1(&f.name) {
                return Err(VfError::Unencodable("font name and area must be at most 255 Latin-1 characters"));
            }
        }
        for (&slot, p) in &self.packets {
            check_program(slot, &p.program, &indices)?;
            for op in &p.program {
                if let PacketOp::Special(bytes) = op {
                    if bytes.len() > u32::MAX as usize {
                        return Err(VfError::Unencodable("special too long"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn fits_latin1(s: &str) -> bool {
    s.chars().count() <= 255 && s.chars().all(|c| u32::from(c) <= 255)
}

fn latin1_bytes(s: &str) -> impl Iterator<Item = u8> + '_ {
    s.chars().map(|c| c as u32 as u8)
}

fn latin1_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| char::from(*b)).collect()
}

pub(crate) fn check_program(slot: u8, program: &[PacketOp], fonts: &BTreeSet<u32>) -> Result<(), VfError> {
    let mut depth = 0usize;
    for op in program {
        match op {
            PacketOp::Push => depth += 1,
            PacketOp::Pop => {
                depth = depth
                    .checked_sub(1)
                    .ok_or(VfError::UnbalancedPushPop { slot })?
            }
            PacketOp::SelectFont(font) if !fonts.contains(font) => {
                return Err(VfError::UnknownFont { slot, font: *font })
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(VfError::UnbalancedPushPop { slot });
    }
    Ok(())
}

fn signed_len(v: i32) -> u8 {
    if (-0x80..0x80).contains(&v) {
        1
    } else if (-0x8000..0x8000).contains(&v) {
        2
    } else if (-0x80_0000..0x80_0000).contains(&v) {
        3
    } else {
        4
    }
}

fn unsigned_len(v: u32) -> u8 {
    if v < 0x100 {
        1
    } else if v < 0x1_0000 {
        2
    } else if v < 0x100_0000 {
        3
    } else {
        4
    }
}

fn push_be(out: &mut Vec<u8>, v: u32, len: u8) {
    out.extend_from_slice(&v.to_be_bytes()[4 - usize::from(len)..]);
}

fn encode_op(out: &mut Vec<u8>, op: &PacketOp) {
    match op {
        PacketOp::SetChar(c) if *c < SET1 => out.push(*c),
        PacketOp::SetChar(c) => out.extend_from_slice(&[SET1, *c]),
        PacketOp::SelectFont(k) if *k < 64 => out.push(FNT_NUM_0 + *k as u8),
        PacketOp::SelectFont(k) => {
            let len = unsigned_len(*k);
            out.push(FNT1 + len - 1);
            push_be(out, *k, len);
        }
        PacketOp::MoveRight(x) | PacketOp::MoveDown(x) => {
            let base = if matches!(op, PacketOp::MoveRight(_)) { RIGHT1 } else { DOWN1 };
            let len = signed_len(x.0);
            out.push(base + len - 1);
            push_be(out, x.0 as u32, len);
        }
        PacketOp::Push => out.push(PUSH),
        PacketOp::Pop => out.push(POP),
        PacketOp::SetRule { height, width } => {
            out.push(SET_RULE);
            out.extend_from_slice(&height.0.to_be_bytes());
            out.extend_from_slice(&width.0.to_be_bytes());
        }
        PacketOp::Special(bytes) => {
            let len = unsigned_len(bytes.len() as u32);
            out.push(XXX1 + len - 1);
            push_be(out, bytes.len() as u32, len);
            out.extend_from_slice(bytes);
        }
    }
}

/// Encodes a virtual font canonically: shortest command forms, short
/// packets wherever they fit.
pub fn emit_vf(v: &VirtualFont) -> Result<Vec<u8>, VfError> {
    v.check()?;
    let mut out = alloc::vec![PRE, VF_ID, v.comment.chars().count() as u8];
    out.extend(latin1_bytes(&v.comment));
    out.extend_from_slice(&v.checksum.to_be_bytes());
    out.extend_from_slice(&v.design_size.0.to_be_bytes());
    for f in &v.base_fonts {
        let len = unsigned_len(f.index);
        out.push(FNT_DEF1 + len - 1);
        push_be(&mut out, f.index, len);
        out.extend_from_slice(&f.checksum.to_be_bytes());
        out.extend_from_slice(&f.scale.0.to_be_bytes());
        out.extend_from_slice(&f.design.0.to_be_bytes());
        out.push(f.area.chars().count() as u8);
        out.push(f.name.chars().count() as u8);
        out.extend(latin1_bytes(&f.area));
        out.extend(latin1_bytes(&f.name));
    }
    let mut dvi = Vec::new();
    for (&slot, p) in &v.packets {
        dvi.clear();
        for op in &p.program {
            encode_op(&mut dvi, op);
        }
        let short = dvi.len() < usize::from(LONG_CHAR) && (0..0x100_0000).contains(&p.width.0);
        if short {
            out.push(dvi.len() as u8);
            out.push(slot);
            push_be(&mut out, p.width.0 as u32, 3);
        } else {
            out.push(LONG_CHAR);
            out.extend_from_slice(&(dvi.len() as u32).to_be_bytes());
            out.extend_from_slice(&u32::from(slot).to_be_bytes());
            out.extend_from_slice(&p.width.0.to_be_bytes());
        }
        out.extend_from_slice(&dvi);
    }
    out.push(POST);
    while out.len() % 4 != 0 {
        out.push(POST);
    }
    Ok(out)
}

struct Bytes<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Bytes<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], VfError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.data.len());
        let end = end.ok_or(VfError::Truncated { offset: self.data.len() })?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn unsigned(&mut self, n: usize) -> Result<u32, VfError> {
        Ok(self.take(n)?.iter().fold(0u32, |acc, b| acc << 8 | u32::from(*b)))
    }

    fn signed(&mut self, n: usize) -> Result<i32, VfError> {
        let raw = self.unsigned(n)?;
        let shift = 32 - 8 * n as u32;
        Ok(((raw << shift) as i32) >> shift)
    }

    fn byte(&mut self) -> Result<u8, VfError> {
        Ok(self.take(1)?[0])
    }
}

fn decode_program(slot: u8, dvi: &[u8], base: usize) -> Result<Vec<PacketOp>, VfError> {
    let mut b = Bytes { data: dvi, pos: 0 };
    let mut ops = Vec::new();
    let truncated = |_| VfError::TruncatedPacket { offset: base };
    while b.pos < dvi.len() {
        let at = b.pos;
        let op = b.byte().map_err(truncated)?;
        let decoded = match op {
            0..=127 => PacketOp::SetChar(op),
            SET1 => PacketOp::SetChar(b.byte().map_err(truncated)?),
            SET_RULE => PacketOp::SetRule {
                height: FixWord(b.signed(4).map_err(truncated)?),
                width: FixWord(b.signed(4).map_err(truncated)?),
            },
            PUSH => PacketOp::Push,
            POP => PacketOp::Pop,
            143..=146 => PacketOp::MoveRight(FixWord(b.signed(usize::from(op - RIGHT1) + 1).map_err(truncated)?)),
            157..=160 => PacketOp::MoveDown(FixWord(b.signed(usize::from(op - DOWN1) + 1).map_err(truncated)?)),
            171..=234 => PacketOp::SelectFont(u32::from(op - FNT_NUM_0)),
            235..=238 => PacketOp::SelectFont(b.unsigned(usize::from(op - FNT1) + 1).map_err(truncated)?),
            239..=242 => {
                let len = b.unsigned(usize::from(op - XXX1) + 1).map_err(truncated)?;
                PacketOp::Special(b.take(len as usize).map_err(truncated)?.to_vec())
            }
            _ => {
                return Err(VfError::UnsupportedOp {
                    slot,
                    opcode: op,
                    offset: base + at,
                })
            }
        };
        ops.push(decoded);
    }
    Ok(ops)
}

/// Decodes a `.vf` file.
pub fn parse_vf(data: &[u8]) -> Result<VirtualFont, VfError> {
    let mut b = Bytes { data, pos: 0 };
    let bad = |offset, reason| VfError::BadPreamble { offset, reason };
    if b.byte().ok() != Some(PRE) {
        return Err(bad(0, "file does not start with pre"));
    }
    if b.byte().ok() != Some(VF_ID) {
        return Err(bad(1, "identification byte is not 202"));
    }
    let k = usize::from(b.byte()?);
    let mut v = VirtualFont {
        comment: latin1_string(b.take(k)?),
        checksum: b.unsigned(4)?,
        design_size: FixWord(b.signed(4)?),
        ..VirtualFont::default()
    };
    loop {
        let at = b.pos;
        let op = b.byte()?;
        match op {
            243..=246 => {
                let f = BaseFont {
                    index: b.unsigned(usize::from(op - FNT_DEF1) + 1)?,
                    checksum: b.unsigned(4)?,
                    scale: FixWord(b.signed(4)?),
                    design: FixWord(b.signed(4)?),
                    area: String::new(),
                    name: String::new(),
                };
                let a = usize::from(b.byte()?);
                let l = usize::from(b.byte()?);
                let area = latin1_string(b.take(a)?);
                let name = latin1_string(b.take(l)?);
                if v.base_fonts.iter().any(|g| g.index == f.index) {
                    return Err(VfError::Malformed {
                        offset: at,
                        reason: "font number defined twice",
                    });
                }
                v.base_fonts.push(BaseFont { area, name, ..f });
            }
            POST => break,
            LONG_CHAR => {
                let pl = b.unsigned(4)? as usize;
                let cc = b.unsigned(4)?;
                let width = FixWord(b.signed(4)?);
                let slot = u8::try_from(cc).map_err(|_| VfError::Malformed {
                    offset: at,
                    reason: "character code exceeds 255",
                })?;
                let start = b.pos;
                let dvi = b.take(pl).map_err(|_| VfError::TruncatedPacket { offset: at })?;
                v.insert_packet(at, slot, width, decode_program(slot, dvi, start)?)?;
            }
            0..=241 => {
                let pl = usize::from(op);
                let slot = b.byte().map_err(|_| VfError::TruncatedPacket { offset: at })?;
                let width = b.unsigned(3).map_err(|_| VfError::TruncatedPacket { offset: at })?;
                let start = b.pos;
                let dvi = b.take(pl).map_err(|_| VfError::TruncatedPacket { offset: at })?;
                v.insert_packet(at, slot, FixWord(width as i32), decode_program(slot, dvi, start)?)?;
            }
            _ => {
                return Err(VfError::Malformed {
                    offset: at,
                    reason: "expected a font definition, packet or post",
                })
            }
        }
    }
    if b.data[b.pos..].iter().any(|x| *x != POST) {
        return Err(VfError::Malformed {
            offset: b.pos,
            reason: "postamble must consist of post bytes only",
        });
    }
    let fonts: BTreeSet<u32> = v.base_fonts.iter().map(|f| f.index).collect();
    for (&slot, p) in &v.packets {
        check_program(slot, &p.program, &fonts)?;
    }
    Ok(v)
}

impl VirtualFont {
    fn insert_packet(&mut self, offset: usize, slot: u8, width: FixWord, program: Vec<PacketOp>) -> Result<(), VfError> {
        if self.packets.insert(slot, Packet { width, program }).is_some() {
            return Err(VfError::Malformed {
                offset,
                reason: "character has two packets",
            });
        }
        Ok(())
    }
}
