//! `.vpl` text: a property list with `VTITLE`, `MAPFONT` and per-character
//! `MAP` programs.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{check_program, BaseFont, Packet, PacketOp, VfError, VirtualFont};
use crate::fixword::FixWord;
use crate::metrics::FontMetrics;
use crate::pl::{range_error, unknown, Args, CharcodeFormat, MetricsBuilder, Node, PlError, PlWriter};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VplError {
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error("line {line}: SELECTFONT refers to font {font}, which has no MAPFONT")]
    UnknownMapfont { line: usize, font: u32 },
    #[error("line {line}: MAPFONT D {font} is declared twice")]
    DuplicateMapfont { line: usize, font: u32 },
    #[error("line {line}: MAP for character {slot:#o} has unbalanced PUSH/POP")]
    UnbalancedPushPop { line: usize, slot: u8 },
}

fn special_is_plain(bytes: &[u8]) -> bool {
    !bytes.is_empty()
        && bytes.iter().all(|b| (b' '..=b'~').contains(b) && *b != b'(' && *b != b')')
        && bytes[0] != b' '
        && bytes[bytes.len() - 1] != b' '
}

fn write_op(w: &mut PlWriter<'_>, level: usize, op: &PacketOp) {
    let text = match op {
        PacketOp::SetChar(c) => format!("SETCHAR {}", w.slot(*c)),
        PacketOp::SelectFont(k) => format!("SELECTFONT D {k}"),
        PacketOp::MoveRight(x) if x.0 < 0 && x.0 != i32::MIN => format!("MOVELEFT R {}", -*x),
        PacketOp::MoveRight(x) => format!("MOVERIGHT R {x}"),
        PacketOp::MoveDown(x) if x.0 < 0 && x.0 != i32::MIN => format!("MOVEUP R {}", -*x),
        PacketOp::MoveDown(x) => format!("MOVEDOWN R {x}"),
        PacketOp::Push => "PUSH".into(),
        PacketOp::Pop => "POP".into(),
        PacketOp::SetRule { height, width } => format!("SETRULE R {height} R {width}"),
        PacketOp::Special(bytes) if special_is_plain(bytes) => {
            format!("SPECIAL {}", bytes.iter().map(|b| char::from(*b)).collect::<String>())
        }
        PacketOp::Special(bytes) => {
            let hex: String = bytes.iter().map(|b| format!("{b:02X}")).collect();
            format!("SPECIALHEX {hex}")
        }
    };
    w.line(level, &text);
}

/// Writes a virtual font and its metrics as one property list. The VPL's
/// checksum and design size are taken from `m`.
pub fn emit_vpl(v: &VirtualFont, m: &FontMetrics, fmt: CharcodeFormat) -> Result<String, VplError> {
    let mut w = PlWriter::new(m, fmt, None)?;
    if !v.comment.is_empty() {
        w.line(0, &format!("VTITLE {}", v.comment));
    }
    w.header(m, &[]);
    for f in &v.base_fonts {
        w.open(0, &format!("MAPFONT D {}", f.index));
        w.line(1, &format!("FONTNAME {}", f.name));
        if !f.area.is_empty() {
            w.line(1, &format!("FONTAREA {}", f.area));
        }
        w.line(1, &format!("FONTCHECKSUM O {:o}", f.checksum));
        w.line(1, &format!("FONTAT R {}", f.scale));
        w.line(1, &format!("FONTDSIZE R {}", f.design));
        w.close(0);
    }
    w.params(m);
    w.ligtable(m);
    for (&slot, d) in &m.chars {
        let packet = v.packets.get(&slot);
        w.character(m, slot, d, |w| {
            if let Some(p) = packet {
                w.open(1, "MAP");
                for op in &p.program {
                    write_op(w, 2, op);
                }
                w.close(1);
            }
        });
    }
    Ok(w.out)
}

fn parse_mapfont(b: &MetricsBuilder, node: &Node) -> Result<BaseFont, VplError> {
    let mut a = Args::new(node);
    let (index, t) = a.int()?;
    a.end()?;
    let index = u32::try_from(index).map_err(|_| range_error(t, "font number exceeds 32 bits"))?;
    let mut f = BaseFont::new(index, "");
    for child in &node.children {
        let mut a = Args::new(child);
        match child.name.as_str() {
            "FONTNAME" => {
                f.name = child.raw.clone();
                continue;
            }
            "FONTAREA" => {
                f.area = child.raw.clone();
                continue;
            }
            "COMMENT" => continue,
            "FONTCHECKSUM" => {
                let (v, t) = a.int()?;
                f.checksum = u32::try_from(v).map_err(|_| range_error(t, "checksum exceeds 32 bits"))?;
            }
            "FONTAT" => f.scale = b.scale(a.real()?.0),
            "FONTDSIZE" => f.design = a.real()?.0,
            _ => return Err(unknown(child).into()),
        }
        a.end()?;
    }
    if f.name.is_empty() {
        return Err(PlError::SyntaxError {
            line: node.line,
            col: node.col,
            expected: "a FONTNAME".into(),
        }
        .into());
    }
    Ok(f)
}

fn parse_map(b: &MetricsBuilder, node: &Node) -> Result<Vec<PacketOp>, PlError> {
    let mut ops = Vec::new();
    for child in &node.children {
        let mut a = Args::new(child);
        let op = match child.name.as_str() {
            "COMMENT" => continue,
            "SETCHAR" => PacketOp::SetChar(a.slot()?),
            "SELECTFONT" => {
                let (k, t) = a.int()?;
                PacketOp::SelectFont(u32::try_from(k).map_err(|_| range_error(t, "font number exceeds 32 bits"))?)
            }
            "MOVERIGHT" => PacketOp::MoveRight(b.scale(a.real()?.0)),
            "MOVELEFT" => PacketOp::MoveRight(-b.scale(a.real()?.0)),
            "MOVEDOWN" => PacketOp::MoveDown(b.scale(a.real()?.0)),
            "MOVEUP" => PacketOp::MoveDown(-b.scale(a.real()?.0)),
            "PUSH" => PacketOp::Push,
            "POP" => PacketOp::Pop,
            "SETRULE" => {
                let height = b.scale(a.real()?.0);
                let width = b.scale(a.real()?.0);
                PacketOp::SetRule { height, width }
            }
            "SPECIAL" => {
                ops.push(PacketOp::Special(child.raw.bytes().collect()));
                continue;
            }
            "SPECIALHEX" => {
                let digits: Vec<u8> = child.raw.bytes().filter(|c| !c.is_ascii_whitespace()).collect();
                let bad = || PlError::SyntaxError {
                    line: child.line,
                    col: child.col,
                    expected: "an even number of hex digits".into(),
                };
                if digits.len() % 2 != 0 {
                    return Err(bad());
                }
                let mut bytes = Vec::with_capacity(digits.len() / 2);
                for pair in digits.chunks(2) {
                    let s = core::str::from_utf8(pair).map_err(|_| bad())?;
                    bytes.push(u8::from_str_radix(s, 16).map_err(|_| bad())?);
                }
                ops.push(PacketOp::Special(bytes));
                continue;
            }
            _ => return Err(unknown(child)),
        };
        a.end()?;
        ops.push(op);
    }
    Ok(ops)
}

/// Reads a `.vpl` file into a virtual font and its metrics.
pub fn parse_vpl(src: &str) -> Result<(VirtualFont, FontMetrics), VplError> {
    let mut b = MetricsBuilder::new();
    let mut v = VirtualFont::default();
    let mut maps: Vec<(u8, usize, Vec<PacketOp>)> = Vec::new();
    for node in crate::pl::parse_tree(src)? {
        match node.name.as_str() {
            "VTITLE" => v.comment = node.raw.clone(),
            "MAPFONT" => {
                let f = parse_mapfont(&b, &node)?;
                if v.base_fonts.iter().any(|g| g.index == f.index) {
                    return Err(VplError::DuplicateMapfont {
                        line: node.line,
                        font: f.index,
                    });
                }
                v.base_fonts.push(f);
            }
            "CHARACTER" => {
                let mut map: Option<Node> = None;
                let slot = b.character(&node, |_, child| {
                    if child.name != "MAP" {
                        return Ok(false);
                    }
                    if map.is_some() {
                        return Err(PlError::SyntaxError {
                            line: child.line,
                            col: child.col,
                            expected: "at most one MAP per character".into(),
                        });
                    }
                    map = Some(child.clone());
                    Ok(true)
                })?;
                if let Some(map) = map {
                    let ops = parse_map(&b, &map)?;
                    maps.push((slot, map.line, ops));
                }
            }
            _ => {
                if !b.top(&node)? {
                    return Err(unknown(&node).into());
                }
            }
        }
    }
    let fonts: BTreeSet<u32> = v.base_fonts.iter().map(|f| f.index).collect();
    let doc = b.finish()?;
    let m = doc.metrics;
    for (slot, line, program) in maps {
        match check_program(slot, &program, &fonts) {
            Ok(()) => {}
            Err(VfError::UnknownFont { font, .. }) => return Err(VplError::UnknownMapfont { line, font }),
            Err(_) => return Err(VplError::UnbalancedPushPop { line, slot }),
        }
        let width = m.chars.get(&slot).map(|d| d.width).unwrap_or(FixWord::ZERO);
        v.packets.insert(slot, Packet { width, program });
    }
    v.checksum = m.checksum;
    v.design_size = m.design_size;
    Ok((v, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::CharDim;
    use crate::vf::emit_vf;
    use alloc::vec;

    fn pair() -> (VirtualFont, FontMetrics) {
        let mut m = FontMetrics::default();
        m.chars.insert(65, CharDim::with_width(FixWord::ONE / 2));
        m.chars.insert(1, CharDim::with_width(FixWord::ONE));
        m.checksum = 77;
        let mut v = VirtualFont {
            comment: "Made by hand".into(),
            checksum: 77,
            ..VirtualFont::default()
        };
        v.base_fonts.push(BaseFont::new(0, "rtxmi"));
        let mut f = BaseFont::new(3, "fxlri");
        f.area = "fonts".into();
        f.checksum = 0o1234;
        v.base_fonts.push(f);
        v.packets.insert(
            65,
            Packet {
                width: FixWord::ONE / 2,
                program: vec![
                    PacketOp::SelectFont(3),
                    PacketOp::Push,
                    PacketOp::MoveRight(FixWord(-100)),
                    PacketOp::MoveDown(FixWord(100)),
                    PacketOp::SetRule { height: FixWord(1), width: FixWord(2) },
                    PacketOp::Pop,
                    PacketOp::SetChar(0),
                    PacketOp::Special(b"ps: 1 2 (x)".to_vec()),
                    PacketOp::Special(b"color push".to_vec()),
                ],
            },
        );
        (v, m)
    }

    #[test]
    fn round_trip() {
        let (v, m) = pair();
        for fmt in [CharcodeFormat::Default, CharcodeFormat::Octal] {
            let text = emit_vpl(&v, &m, fmt).unwrap();
            let (v2, m2) = parse_vpl(&text).unwrap();
            assert_eq!(m2, m);
            assert_eq!(v2, v, "{text}");
            assert_eq!(emit_vf(&v2).unwrap(), emit_vf(&v).unwrap());
        }
    }

    #[test]
    fn unknown_mapfont() {
        let src = "(MAPFONT D 0 (FONTNAME a))\n(CHARACTER O 1 (CHARWD R 0.5)\n (MAP (SELECTFONT D 3) (SETCHAR O 1)))";
        assert_eq!(parse_vpl(src), Err(VplError::UnknownMapfont { line: 3, font: 3 }));
    }

    #[test]
    fn unbalanced() {
        let src = "(MAPFONT D 0 (FONTNAME a))\n(CHARACTER O 1 (MAP (PUSH)))";
        assert!(matches!(parse_vpl(src), Err(VplError::UnbalancedPushPop { .. })));
    }
}
