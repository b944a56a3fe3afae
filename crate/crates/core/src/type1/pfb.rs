//! The segmented `.pfb` container.

use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    Ascii,
    Binary,
    Eof,
}

impl SegmentKind {
    fn tag(self) -> u8 {
        match self {
            SegmentKind::Ascii => 1,
            SegmentKind::Binary => 2,
            SegmentKind::Eof => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PfbSegment {
    pub kind: SegmentKind,
    pub payload: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PfbError {
    #[error("offset {offset}: expected a segment header 0x80 0x01..0x03")]
    BadMagic { offset: usize },
    #[error("offset {offset}: segment declares {declared} bytes but only {available} remain")]
    LengthOverrun {
        offset: usize,
        declared: usize,
        available: usize,
    },
    #[error("file ends without an end-of-file segment")]
    MissingEof,
}

/// Splits a `.pfb` file into its segments. The last segment is always
/// [`SegmentKind::Eof`] and nothing may follow it.
pub fn split_pfb(data: &[u8]) -> Result<Vec<PfbSegment>, PfbError> {
    let mut out = Vec::new();
    let mut pos = 0;
    loop {
        if pos == data.len() {
            return Err(PfbError::MissingEof);
        }
        if data[pos] != 0x80 || pos + 1 >= data.len() {
            return Err(PfbError::BadMagic { offset: pos });
        }
        let kind = match data[pos + 1] {
            1 => SegmentKind::Ascii,
            2 => SegmentKind::Binary,
            3 => SegmentKind::Eof,
            _ => return Err(PfbError::BadMagic { offset: pos }),
        };
        if kind == SegmentKind::Eof {
            if pos + 2 != data.len() {
                return Err(PfbError::BadMagic { offset: pos + 2 });
            }
            out.push(PfbSegment {
                kind,
                payload: Vec::new(),
            });
            return Ok(out);
        }
        let header_end = pos + 6;
        if header_end > data.len() {
            return Err(PfbError::LengthOverrun {
                offset: pos,
                declared: 4,
                available: data.len() - pos - 2,
            });
        }
        let mut len = [0u8; 4];
        len.copy_from_slice(&data[pos + 2..header_end]);
        let declared = u32::from_le_bytes(len) as usize;
        let available = data.len() - header_end;
        if declared > available {
            return Err(PfbError::LengthOverrun {
                offset: pos,
                declared,
                available,
            });
        }
        out.push(PfbSegment {
            kind,
            payload: data[header_end..header_end + declared].to_vec(),
        });
        pos = header_end + declared;
    }
}

/// Inverse of [`split_pfb`].
pub fn join_pfb(segments: &[PfbSegment]) -> Vec<u8> {
    let mut out = Vec::new();
    for s in segments {
        out.push(0x80);
        out.push(s.kind.tag());
        if s.kind != SegmentKind::Eof {
            out.extend_from_slice(&(s.payload.len() as u32).to_le_bytes());
            out.extend_from_slice(&s.payload);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn minimal() {
        let data = [0x80, 1, 2, 0, 0, 0, b'%', b'!', 0x80, 3];
        let segs = split_pfb(&data).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].payload, b"%!");
        assert_eq!(segs[1].kind, SegmentKind::Eof);
        assert_eq!(join_pfb(&segs), data);
    }

    #[test]
    fn overrun() {
        let data = [0x80, 2, 9, 0, 0, 0, 1, 2];
        assert_eq!(
            split_pfb(&data),
            Err(PfbError::LengthOverrun { offset: 0, declared: 9, available: 2 })
        );
    }

    #[test]
    fn bad_magic() {
        assert_eq!(split_pfb(b"%!PS"), Err(PfbError::BadMagic { offset: 0 }));
        assert_eq!(split_pfb(&[0x80, 1, 0, 0, 0, 0]), Err(PfbError::MissingEof));
        assert_eq!(split_pfb(&[0x80, 3, 0]), Err(PfbError::BadMagic { offset: 2 }));
    }

    #[test]
    fn partition() {
        let segs = vec![
            PfbSegment { kind: SegmentKind::Ascii, payload: b"abc".to_vec() },
            PfbSegment { kind: SegmentKind::Binary, payload: vec![0, 0x80, 3] },
            PfbSegment { kind: SegmentKind::Ascii, payload: Vec::new() },
            PfbSegment { kind: SegmentKind::Eof, payload: Vec::new() },
        ];
        assert_eq!(split_pfb(&join_pfb(&segs)).unwrap(), segs);
    }
}
