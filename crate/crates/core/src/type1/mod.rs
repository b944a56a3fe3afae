//! Reading Type 1 fonts: the `.pfb` container, `eexec` and charstring
//! decryption, and charstring interpretation into outlines and stem hints.

pub mod charstring;
pub mod cipher;
pub mod font;
pub mod pfb;
pub mod std_encoding;

pub use charstring::{
    decode_number, encode_number, interpret_charstring, CharstringError, Contour, Glyph, GlyphLookup, NoGlyphs, Op,
    Point, Segment, Stem,
};
pub use cipher::{charstring_decrypt, charstring_encrypt, eexec_decrypt, eexec_encrypt};
pub use font::{load_type1, Type1Error, Type1Font};
pub use pfb::{join_pfb, split_pfb, PfbError, PfbSegment, SegmentKind};
