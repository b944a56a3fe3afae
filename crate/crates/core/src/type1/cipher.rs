//! The Type 1 stream cipher.

use alloc::vec::Vec;

/// Initial key for the `eexec` section.
pub const EEXEC_KEY: u16 = 55665;
/// Initial key for individual charstrings and subroutines.
pub const CHARSTRING_KEY: u16 = 4330;

const C1: u16 = 52845;
const C2: u16 = 22719;

/// Decrypts `data` starting from key `r`. The output includes the leading
/// random bytes; callers drop them.
pub fn decrypt(data: &[u8], mut r: u16) -> Vec<u8> {
    data.iter()
        .map(|&c| {
            let p = c ^ (r >> 8) as u8;
            r = (u16::from(c).wrapping_add(r)).wrapping_mul(C1).wrapping_add(C2);
            p
        })
        .collect()
}

pub fn encrypt(plain: &[u8], mut r: u16) -> Vec<u8> {
    plain
        .iter()
        .map(|&p| {
            let c = p ^ (r >> 8) as u8;
            r = (u16::from(c).wrapping_add(r)).wrapping_mul(C1).wrapping_add(C2);
            c
        })
        .collect()
}

pub fn eexec_decrypt(data: &[u8]) -> Vec<u8> {
    decrypt(data, EEXEC_KEY)
}

pub fn eexec_encrypt(plain: &[u8]) -> Vec<u8> {
    encrypt(plain, EEXEC_KEY)
}

pub fn charstring_decrypt(data: &[u8]) -> Vec<u8> {
    decrypt(data, CHARSTRING_KEY)
}

pub fn charstring_encrypt(plain: &[u8]) -> Vec<u8> {
    encrypt(plain, CHARSTRING_KEY)
}
