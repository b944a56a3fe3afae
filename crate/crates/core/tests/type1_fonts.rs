//! Runs the interpreter over Type 1 fonts installed on this machine.

use std::path::{Path, PathBuf};

use texfm_core::afm::parse_afm;
use texfm_core::type1::{eexec_decrypt, load_type1, split_pfb, SegmentKind};

fn pairs() -> Vec<(PathBuf, PathBuf)> {
    let mut dirs: Vec<PathBuf> = std::env::var_os("TEXFM_TYPE1_DIR").map(PathBuf::from).into_iter().collect();
    for root in ["/usr/local/lib", "/usr/lib"] {
        for py in std::fs::read_dir(root).into_iter().flatten().flatten() {
            for sub in ["dist-packages", "site-packages"] {
                dirs.push(py.path().join(sub).join("reportlab/fonts"));
            }
        }
    }
    let mut out = Vec::new();
    for d in dirs {
        for e in std::fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = e.path();
            if p.extension().is_some_and(|x| x == "pfb") && p.with_extension("afm").exists() {
                out.push((p.clone(), p.with_extension("afm")));
            }
        }
    }
    out
}

fn check(pfb: &Path, afm: &Path) -> (usize, usize) {
    let data = std::fs::read(pfb).unwrap();
    let font = load_type1(&data).unwrap_or_else(|e| panic!("{}: {e}", pfb.display()));
    let afm = parse_afm(&String::from_utf8_lossy(&std::fs::read(afm).unwrap())).unwrap();
    let (mut good, mut total) = (0, 0);
    for g in afm.glyphs.iter().filter(|g| g.code >= 0) {
        total += 1;
        match font.glyph(&g.name) {
            Ok(glyph) => {
                let advance = glyph.advance * 1000.0 / font.units_per_em;
                if (advance - g.width).abs() <= 1.0 {
                    good += 1;
                } else {
                    eprintln!("{}: {} advance {advance} vs {}", pfb.display(), g.name, g.width);
                }
            }
            Err(e) => eprintln!("{}: {e}", pfb.display()),
        }
    }
    (good, total)
}

#[test]
fn installed_fonts_match_afm_widths() {
    let found = pairs();
    if found.is_empty() {
        eprintln!("no .pfb/.afm pairs installed; nothing to check");
        return;
    }
    for (pfb, afm) in found {
        let (good, total) = check(&pfb, &afm);
        eprintln!("{}: {good}/{total} advances match", pfb.display());
        assert!(total > 0);
        assert!(good * 100 >= total * 99, "{}: {good}/{total}", pfb.display());
    }
}

#[test]
fn installed_eexec_block_mentions_charstrings() {
    let Some((pfb, _)) = pairs().into_iter().next() else {
        return;
    };
    let segs = split_pfb(&std::fs::read(pfb).unwrap()).unwrap();
    let binary: Vec<u8> = segs
        .iter()
        .filter(|s| s.kind == SegmentKind::Binary)
        .flat_map(|s| s.payload.iter().copied())
        .collect();
    let plain = eexec_decrypt(&binary);
    assert!(plain.windows(12).any(|w| w == b"/CharStrings"));
}

#[test]
fn every_installed_glyph_interprets() {
    for (pfb, _) in pairs() {
        let font = load_type1(&std::fs::read(&pfb).unwrap()).unwrap();
        for name in font.glyph_names() {
            let g = font.glyph(name).unwrap_or_else(|e| panic!("{}: {e}", pfb.display()));
            for c in &g.contours {
                assert_eq!(c.segments.last().map(|s| s.end()), Some(c.start));
            }
            for s in g.hstems.iter().chain(&g.vstems) {
                assert!(s.extent > 0.0);
            }
        }
    }
}
