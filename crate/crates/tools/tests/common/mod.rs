#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = include_str!("../../manifests/newtx-derivation.manifest");

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// A small AFM with letters in their ASCII slots, widths stretched by
/// `stretch` per mille, and a handful of kerns.
pub fn stub_afm(font_name: &str, stretch: u32) -> String {
    let mut s = format!(
        "StartFontMetrics 2.0\nComment synthetic\nFontName {font_name}\nFamilyName Stub\nEncodingScheme FontSpecific\nItalicAngle -14.04\nXHeight 441\nStartCharMetrics 53\n"
    );
    s.push_str("C 32 ; WX 250 ; N space ; B 0 0 0 0 ;\n");
    for (i, c) in ('A'..='Z').chain('a'..='z').enumerate() {
        let base = if c.is_ascii_uppercase() { 560 } else { 430 };
        let w = (base + 11 * (i as u32 % 13)) * stretch / 1000;
        let top = if c.is_ascii_uppercase() { 662 } else { 441 + 20 * (i as u32 % 3) };
        let bottom = if "gjpqy".contains(c) { -205 } else { -11 };
        s.push_str(&format!(
            "C {} ; WX {w} ; N {c} ; B {} {bottom} {} {top} ;\n",
            c as u32,
            12 + i % 7,
            w - 9
        ));
    }
    s.push_str(
        "EndCharMetrics\nStartKernData\nStartKernPairs 4\nKPX A V -80\nKPX V a -35\nKPX f f 12\nKPX T o -60\nEndKernPairs\nEndKernData\nEndFontMetrics\n",
    );
    s
}

/// Copies the shipped manifest into `dir` and writes stand-ins for every
/// file it expects to find there: root inputs and the outputs of the
/// external steps.
pub fn stub_tree(dir: &Path) -> PathBuf {
    let manifest = dir.join("newtx-derivation.manifest");
    fs::write(&manifest, MANIFEST).unwrap();
    let afms = [
        ("TeXGyreTermes.afm", "TeXGyreTermes-Italic", 1000),
        ("rntxmi.afm", "NewTXMI", 1000),
        ("rntxmi7.afm", "NewTXMI7", 1070),
        ("rntxmi5.afm", "NewTXMI5", 1145),
        ("rtxmi.afm", "rtxmi", 990),
        ("rtxmi7.afm", "rtxmi7", 1059),
    ];
    for (file, name, stretch) in afms {
        fs::write(dir.join(file), stub_afm(name, stretch)).unwrap();
    }
    for other in ["rntxmi.sfd", "rntxmi.pfb", "rntxmi7.pfb", "rntxmi5.pfb", "rtxmi7.pfb"] {
        fs::write(dir.join(other), format!("stand-in for {other}\n")).unwrap();
    }
    manifest
}

/// Every file under `dir`, with its bytes, sorted by path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = fs::read(&p).unwrap();
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), bytes));
            }
        }
    }
    out.sort();
    out
}

/// Replaces the first `WX 560` in an AFM so its metrics change.
pub fn perturb_afm(path: &Path) {
    let src = fs::read_to_string(path).unwrap();
    assert!(src.contains("WX 5"), "stub AFM has no width to change");
    let changed = src.replacen("WX 5", "WX 6", 1);
    fs::write(path, changed).unwrap();
}
