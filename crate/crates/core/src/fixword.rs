//! Fixed-point numbers with 20 fractional bits.
//!
//! Every dimension stored in a `.tfm` or `.vf` file is a `fix_word`: a 32-bit
//! two's-complement integer interpreted as `raw / 2^20`. The representable
//! range is therefore `[-2048, 2048)` with a resolution of `2^-20`.

use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

/// Number of fractional bits.
pub const FRACTION_BITS: u32 = 20;

const UNITY: i32 = 1 << FRACTION_BITS;
const UNITY_F64: f64 = UNITY as f64;

/// A TFM/VF `fix_word`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FixWord(pub i32);

/// A real number that has no `fix_word` representation.
#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
#[error("{0} is outside the fix_word range [-2048, 2048)")]
pub struct RangeError(pub f64);

impl FixWord {
    pub const ZERO: FixWord = FixWord(0);
    pub const ONE: FixWord = FixWord(UNITY);
    pub const MIN: FixWord = FixWord(i32::MIN);
    pub const MAX: FixWord = FixWord(i32::MAX);

    pub const fn from_raw(raw: i32) -> FixWord {
        FixWord(raw)
    }

    pub const fn raw(self) -> i32 {
        self.0
    }

    /// `n` whole units.
    pub const fn from_int(n: i16) -> FixWord {
        FixWord((n as i32) << FRACTION_BITS)
    }

    /// Converts a real number, rounding half away from zero.
    pub fn from_real(x: f64) -> Result<FixWord, RangeError> {
        if !(-2048.0..2048.0).contains(&x) {
            return Err(RangeError(x));
        }
        // Scaling by a power of two is exact.
        let rounded = round_half_away(x * UNITY_F64);
        if rounded > i32::MAX as f64 {
            return Err(RangeError(x));
        }
        Ok(FixWord(rounded as i32))
    }

    /// The exact value `raw / 2^20`.
    pub fn to_real(self) -> f64 {
        self.0 as f64 / UNITY_F64
    }

    pub fn checked_add(self, rhs: FixWord) -> Option<FixWord> {
        self.0.checked_add(rhs.0).map(FixWord)
    }

    pub fn checked_sub(self, rhs: FixWord) -> Option<FixWord> {
        self.0.checked_sub(rhs.0).map(FixWord)
    }

    pub fn abs_lt_16(self) -> bool {
        self.0 > -(16 * UNITY) && self.0 < 16 * UNITY
    }
}

fn round_half_away(v: f64) -> f64 {
    // |v| < 2^31 here, so the cast truncates toward zero without saturating.
    let t = v as i64 as f64;
    let frac = v - t;
    if frac >= 0.5 {
        t + 1.0
    } else if frac <= -0.5 {
        t - 1.0
    } else {
        t
    }
}

impl Add for FixWord {
    type Output = FixWord;
    fn add(self, rhs: FixWord) -> FixWord {
        FixWord(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for FixWord {
    type Output = FixWord;
    fn sub(self, rhs: FixWord) -> FixWord {
        FixWord(self.0.wrapping_sub(rhs.0))
    }
}

impl Neg for FixWord {
    type Output = FixWord;
    fn neg(self) -> FixWord {
        FixWord(self.0.wrapping_neg())
    }
}

impl Mul<i32> for FixWord {
    type Output = FixWord;
    fn mul(self, rhs: i32) -> FixWord {
        FixWord(self.0.wrapping_mul(rhs))
    }
}

impl Div<i32> for FixWord {
    type Output = FixWord;
    fn div(self, rhs: i32) -> FixWord {
        FixWord(self.0 / rhs)
    }
}

/// Prints the shortest decimal that reads back to the same value under the
/// property-list reading rule (see [`parse_decimal`]).
impl fmt::Display for FixWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let raw = self.0 as i64;
        if raw < 0 {
            f.write_str("-")?;
        }
        let magnitude = raw.abs();
        let unity = UNITY as i64;
        write!(f, "{}.", magnitude / unity)?;
        let mut frac = 10 * (magnitude % unity) + 5;
        let mut delta: i64 = 10;
        loop {
            if delta > 0o4_000_000 {
                frac = frac + 0o2_000_000 - delta / 2;
            }
            write!(f, "{}", frac / 0o4_000_000)?;
            frac = 10 * (frac % 0o4_000_000);
            delta *= 10;
            if frac <= delta {
                break;
            }
        }
        Ok(())
    }
}

/// Why a decimal literal could not be read as a `fix_word`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DecimalError {
    #[error("expected a decimal number")]
    Malformed,
    #[error("real constants must be less than 2048 in magnitude")]
    TooBig,
}

/// Reads a decimal literal the way property-list tools do: at most seven
/// fractional digits are significant and the fraction is rounded to the
/// nearest multiple of `2^-20`.
pub fn parse_decimal(src: &str) -> Result<FixWord, DecimalError> {
    let bytes = src.as_bytes();
    let mut pos = 0;
    let mut negative = false;
    while pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
        negative ^= bytes[pos] == b'-';
        pos += 1;
    }
    let mut int_part: i64 = 0;
    let mut saw_digit = false;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        saw_digit = true;
        int_part = int_part * 10 + i64::from(bytes[pos] - b'0');
        if int_part >= 2048 {
            return Err(DecimalError::TooBig);
        }
        pos += 1;
    }
    let mut fraction: i64 = 0;
    if pos < bytes.len() && bytes[pos] == b'.' {
        pos += 1;
        let mut digits = [0i64; 7];
        let mut count = 0;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            saw_digit = true;
            if count < 7 {
                digits[count] = 0o10_000_000 * i64::from(bytes[pos] - b'0');
                count += 1;
            }
            pos += 1;
        }
        let mut acc: i64 = 0;
        for d in digits[..count].iter().rev() {
            acc = d + acc / 10;
        }
        fraction = (acc + 10) / 20;
    }
    if !saw_digit || pos != bytes.len() {
        return Err(DecimalError::Malformed);
    }
    let value = int_part * i64::from(UNITY) + fraction;
    if value >= 2048 * i64::from(UNITY) {
        return Err(DecimalError::TooBig);
    }
    Ok(FixWord(if negative { -value } else { value } as i32))
}
