//! Locating the private dictionary, `Subrs` and `CharStrings` of a Type 1
//! font without a PostScript interpreter.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::charstring::{interpret_charstring, CharstringError, Glyph};
use super::cipher::{charstring_decrypt, eexec_decrypt};
use super::pfb::{split_pfb, PfbError, SegmentKind};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Type1Error {
    #[error(transparent)]
    Pfb(#[from] PfbError),
    #[error("no eexec section")]
    NoEexec,
    #[error("decrypted section has no /CharStrings")]
    MissingCharStrings,
    #[error("offset {offset}: {reason}")]
    Malformed { offset: usize, reason: &'static str },
    #[error("glyph {name}: {source}")]
    Charstring { name: String, source: CharstringError },
    #[error("no glyph named {0}")]
    UnknownGlyph(String),
}

/// A loaded Type 1 font. Charstrings and subroutines are stored decrypted with
/// their `lenIV` prefix removed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Type1Font {
    pub font_name: String,
    /// Font units per em, from `/FontMatrix`.
    pub units_per_em: f64,
    pub len_iv: i32,
    pub subrs: Vec<Vec<u8>>,
    pub charstrings: BTreeMap<String, Vec<u8>>,
}

impl Type1Font {
    pub fn glyph(&self, name: &str) -> Result<Glyph, Type1Error> {
        let program = self
            .charstrings
            .get(name)
            .ok_or_else(|| Type1Error::UnknownGlyph(name.to_string()))?;
        interpret_charstring(name, program, &self.subrs, &self.charstrings).map_err(|source| {
            Type1Error::Charstring {
                name: name.to_string(),
                source,
            }
        })
    }

    pub fn glyph_names(&self) -> impl Iterator<Item = &str> {
        self.charstrings.keys().map(String::as_str)
    }
}

/// The clear-text part and the decrypted private part (random prefix
/// dropped) of a `.pfb` or `.pfa` file.
pub fn decrypt_font(data: &[u8]) -> Result<(Vec<u8>, Vec<u8>), Type1Error> {
    if data.first() == Some(&0x80) {
        let segments = split_pfb(data)?;
        let mut clear = Vec::new();
        let mut cipher = Vec::new();
        for s in &segments {
            match s.kind {
                SegmentKind::Ascii if cipher.is_empty() => clear.extend_from_slice(&s.payload),
                SegmentKind::Binary => cipher.extend_from_slice(&s.payload),
                _ => {}
            }
        }
        if cipher.is_empty() {
            return Err(Type1Error::NoEexec);
        }
        let plain = eexec_decrypt(&cipher);
        return Ok((clear, plain.get(4..).unwrap_or_default().to_vec()));
    }
    let at = find(data, b"eexec").ok_or(Type1Error::NoEexec)?;
    let mut pos = at + 5;
    while data.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        pos += 1;
    }
    let body = &data[pos..];
    let hex = body.len() >= 4 && body[..4].iter().all(u8::is_ascii_hexdigit);
    let cipher = if hex {
        let digits: Vec<u8> = body
            .iter()
            .copied()
            .filter(|b| !b.is_ascii_whitespace())
            .take_while(u8::is_ascii_hexdigit)
            .collect();
        digits
            .chunks_exact(2)
            .map(|p| (hex_val(p[0]) << 4) | hex_val(p[1]))
            .collect()
    } else {
        body.to_vec()
    };
    let plain = eexec_decrypt(&cipher);
    Ok((data[..at + 5].to_vec(), plain.get(4..).unwrap_or_default().to_vec()))
}

fn hex_val(b: u8) -> u8 {
    match b {
        b'0'..=b'9' => b - b'0',
        b'a'..=b'f' => b - b'a' + 10,
        _ => b - b'A' + 10,
    }
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

fn is_delim(b: u8) -> bool {
    b.is_ascii_whitespace() || b"()<>[]{}/%".contains(&b)
}

struct Lexer<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    /// The next token and its offset. Strings and comments are skipped.
    fn next(&mut self) -> Option<(usize, &'a [u8])> {
        loop {
            while self.data.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
                self.pos += 1;
            }
            let start = self.pos;
            let b = *self.data.get(start)?;
            match b {
                b'%' => {
                    while self.data.get(self.pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                        self.pos += 1;
                    }
                }
                b'(' => {
                    let mut depth = 0usize;
                    while let Some(&c) = self.data.get(self.pos) {
                        self.pos += 1;
                        match c {
                            b'\\' => self.pos += 1,
                            b'(' => depth += 1,
                            b')' => {
                                depth -= 1;
                                if depth == 0 {
                                    break;
                                }
                            }
                            _ => {}
                        }
                    }
                }
                b'[' | b']' | b'{' | b'}' | b'<' | b'>' | b')' => {
                    self.pos += 1;
                    return Some((start, &self.data[start..self.pos]));
                }
                _ => {
                    self.pos += 1;
                    while self.data.get(self.pos).is_some_and(|&b| !is_delim(b)) {
                        self.pos += 1;
                    }
                    return Some((start, &self.data[start..self.pos]));
                }
            }
        }
    }
}

fn int(tok: &[u8]) -> Option<i64> {
    core::str::from_utf8(tok).ok()?.parse().ok()
}

fn font_name(clear: &[u8]) -> String {
    let mut lx = Lexer { data: clear, pos: 0 };
    while let Some((_, t)) = lx.next() {
        if t == b"/FontName" {
            if let Some((_, n)) = lx.next() {
                return String::from_utf8_lossy(n.strip_prefix(b"/").unwrap_or(n)).into_owned();
            }
        }
    }
    String::new()
}

fn units_per_em(clear: &[u8]) -> f64 {
    let mut lx = Lexer { data: clear, pos: 0 };
    while let Some((_, t)) = lx.next() {
        if t == b"/FontMatrix" {
            lx.next();
            if let Some((_, a)) = lx.next() {
                if let Some(a) = core::str::from_utf8(a).ok().and_then(|s| s.parse::<f64>().ok()) {
                    if a > 0.0 {
                        return 1.0 / a;
                    }
                }
            }
        }
    }
    1000.0
}

/// Extracts `lenIV`, `Subrs` and `CharStrings` from a decrypted private part.
///
/// Every `RD` (or `-|`) token is preceded by a byte count; the binary string
/// starts after one space. A count preceded by `/name` is a charstring, a
/// count preceded by an integer is a subroutine.
pub fn parse_private(private: &[u8]) -> Result<(i32, Vec<Vec<u8>>, BTreeMap<String, Vec<u8>>), Type1Error> {
    if find(private, b"/CharStrings").is_none() {
        return Err(Type1Error::MissingCharStrings);
    }
    let mut len_iv = 4;
    let mut raw_subrs: BTreeMap<usize, &[u8]> = BTreeMap::new();
    let mut raw_glyphs: Vec<(String, &[u8])> = Vec::new();
    let mut prev: [&[u8]; 2] = [b"", b""];
    let mut lx = Lexer { data: private, pos: 0 };
    while let Some((offset, t)) = lx.next() {
        if t == b"closefile" {
            break;
        }
        if t == b"/lenIV" {
            let (o, v) = lx.next().ok_or(Type1Error::Malformed { offset, reason: "lenIV without value" })?;
            len_iv = int(v)
                .and_then(|v| i32::try_from(v).ok())
                .ok_or(Type1Error::Malformed { offset: o, reason: "lenIV is not an integer" })?;
            continue;
        }
        if t == b"RD" || t == b"-|" {
            let len = int(prev[1])
                .and_then(|n| usize::try_from(n).ok())
                .ok_or(Type1Error::Malformed { offset, reason: "RD without a byte count" })?;
            let start = lx.pos + 1;
            let bytes = private
                .get(start..start + len)
                .ok_or(Type1Error::Malformed { offset, reason: "binary string runs past the end" })?;
            if let Some(name) = prev[0].strip_prefix(b"/") {
                raw_glyphs.push((String::from_utf8_lossy(name).into_owned(), bytes));
            } else if let Some(i) = int(prev[0]).and_then(|i| usize::try_from(i).ok()) {
                raw_subrs.insert(i, bytes);
            } else {
                return Err(Type1Error::Malformed { offset, reason: "RD not preceded by a name or index" });
            }
            lx.pos = start + len;
            prev = [b"", b""];
            continue;
        }
        prev = [prev[1], t];
    }
    if raw_glyphs.is_empty() {
        return Err(Type1Error::MissingCharStrings);
    }
    let strip = |bytes: &[u8]| -> Vec<u8> {
        if len_iv < 0 {
            bytes.to_vec()
        } else {
            let plain = charstring_decrypt(bytes);
            plain.get(len_iv as usize..).unwrap_or_default().to_vec()
        }
    };
    let count = raw_subrs.keys().next_back().map_or(0, |k| k + 1);
    let mut subrs = alloc::vec![Vec::new(); count];
    for (i, b) in raw_subrs {
        subrs[i] = strip(b);
    }
    let charstrings = raw_glyphs.into_iter().map(|(n, b)| (n, strip(b))).collect();
    Ok((len_iv, subrs, charstrings))
}

/// Loads a `.pfb` (segmented) or `.pfa` (hex or binary after `eexec`) font.
pub fn load_type1(data: &[u8]) -> Result<Type1Font, Type1Error> {
    let (clear, private) = decrypt_font(data)?;
    let (len_iv, subrs, charstrings) = parse_private(&private)?;
    Ok(Type1Font {
        font_name: font_name(&clear),
        units_per_em: units_per_em(&clear),
        len_iv,
        subrs,
        charstrings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::type1::charstring::encode_number;
    use crate::type1::cipher::{charstring_encrypt, eexec_encrypt};
    use crate::type1::pfb::{join_pfb, PfbSegment};
    use alloc::format;
    use alloc::vec;

    fn square() -> Vec<u8> {
        let mut p = Vec::new();
        for n in [50, 500] {
            encode_number(n, &mut p);
        }
        p.push(13);
        for n in [0, 0] {
            encode_number(n, &mut p);
        }
        p.push(21);
        for (n, op) in [(400, 6), (400, 7), (-400, 6), (-400, 7)] {
            encode_number(n, &mut p);
            p.push(op);
        }
        p.extend_from_slice(&[9, 14]);
        p
    }

    fn private(len_iv: usize) -> Vec<u8> {
        let mut cs = vec![0u8; len_iv];
        cs.extend(square());
        let enc = charstring_encrypt(&cs);
        let mut ret = vec![0u8; len_iv];
        ret.push(11);
        let ret = charstring_encrypt(&ret);
        let mut out = Vec::new();
        out.extend_from_slice(b"dup /Private 8 dict dup begin\n/RD{string currentfile exch readstring pop}executeonly def\n");
        out.extend_from_slice(format!("/lenIV {len_iv} def\n(a (nested) string) pop\n/Subrs 1 array\n").as_bytes());
        out.extend_from_slice(format!("dup 0 {} RD ", ret.len()).as_bytes());
        out.extend_from_slice(&ret);
        out.extend_from_slice(b" NP\nND\n2 index /CharStrings 1 dict dup begin\n");
        out.extend_from_slice(format!("/square {} -| ", enc.len()).as_bytes());
        out.extend_from_slice(&enc);
        out.extend_from_slice(b" |-\nend end\nmark currentfile closefile\n");
        out
    }

    fn pfb(len_iv: usize) -> Vec<u8> {
        let mut plain = b"abcd".to_vec();
        plain.extend(private(len_iv));
        join_pfb(&[
            PfbSegment {
                kind: SegmentKind::Ascii,
                payload: b"%!FontType1\n/FontName /Square def\n/FontMatrix [0.0005 0 0 0.0005 0 0] def\ncurrentfile eexec\n".to_vec(),
            },
            PfbSegment { kind: SegmentKind::Binary, payload: eexec_encrypt(&plain) },
            PfbSegment { kind: SegmentKind::Ascii, payload: b"0000\ncleartomark\n".to_vec() },
            PfbSegment { kind: SegmentKind::Eof, payload: Vec::new() },
        ])
    }

    #[test]
    fn loads_pfb() {
        for len_iv in [4, 0] {
            let f = load_type1(&pfb(len_iv)).unwrap();
            assert_eq!(f.font_name, "Square");
            assert_eq!(f.units_per_em, 2000.0);
            assert_eq!(f.len_iv, len_iv as i32);
            assert_eq!(f.subrs, vec![vec![11]]);
            assert_eq!(f.charstrings["square"], square());
            let g = f.glyph("square").unwrap();
            assert_eq!(g.advance, 500.0);
            assert!(matches!(f.glyph("nope"), Err(Type1Error::UnknownGlyph(_))));
        }
    }

    #[test]
    fn loads_pfa() {
        let mut plain = b"abcd".to_vec();
        plain.extend(private(4));
        let mut pfa = b"%!FontType1\n/FontName /Square def\ncurrentfile eexec\n".to_vec();
        for chunk in eexec_encrypt(&plain).chunks(32) {
            for b in chunk {
                pfa.extend_from_slice(format!("{b:02x}").as_bytes());
            }
            pfa.push(b'\n');
        }
        pfa.extend_from_slice(b"\n0000000000000000\ncleartomark\n");
        let f = load_type1(&pfa).unwrap();
        assert_eq!(f.charstrings["square"], square());
        assert_eq!(f.units_per_em, 1000.0);
    }

    #[test]
    fn failures() {
        assert_eq!(load_type1(b"%!PS no encryption"), Err(Type1Error::NoEexec));
        assert_eq!(parse_private(b"/Subrs 0 array"), Err(Type1Error::MissingCharStrings));
        assert!(matches!(
            parse_private(b"/CharStrings 1 dict /a 99 RD xx"),
            Err(Type1Error::Malformed { .. })
        ));
    }
}
