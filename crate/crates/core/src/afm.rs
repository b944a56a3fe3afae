//! Adobe Font Metrics input, conversion to TFM metrics in the manner of
//! `afm2tfm`, and dvips map lines.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::encoding::{EncodingVector, NOTDEF};
use crate::fixword::FixWord;
use crate::metrics::{CharDim, CharTag, FontMetrics, LigKernStep, ValidationReport, EXTRASPACE, QUAD, SHRINK, SLANT, SPACE, STRETCH, XHEIGHT};
use crate::tfm::compute_checksum;
use crate::vf::{compose, CompositionPlan, VirtualFont};

#[derive(Clone, Debug, PartialEq)]
pub struct AfmGlyph {
    /// -1 for unencoded glyphs.
    pub code: i32,
    pub name: String,
    /// Thousandths of an em.
    pub width: f64,
    pub bbox: [f64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernPair {
    pub left: String,
    pub right: String,
    pub dx: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AfmFont {
    pub font_name: String,
    pub family_name: String,
    pub encoding_scheme: String,
    /// Degrees, counterclockwise from vertical.
    pub italic_angle: f64,
    pub x_height: Option<f64>,
    pub glyphs: Vec<AfmGlyph>,
    pub kern_pairs: Vec<KernPair>,
}

impl AfmFont {
    pub fn glyph(&self, name: &str) -> Option<&AfmGlyph> {
        self.glyphs.iter().find(|g| g.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AfmError {
    #[error("not an AFM file: StartFontMetrics is missing")]
    MissingHeader,
    #[error("line {0}: malformed character metrics record")]
    MalformedCharRecord(usize),
    #[error("line {line}: malformed {what}")]
    BadValue { line: usize, what: &'static str },
    #[error("line {line}: glyph {name:?} is defined twice")]
    DuplicateGlyph { line: usize, name: String },
    #[error("encoding slot {slot} names glyph {name:?}, which the AFM does not define")]
    UnresolvedGlyph { name: String, slot: u8 },
    #[error("two glyphs are encoded at slot {0}")]
    DuplicateSlot(u8),
    #[error("resulting metrics are invalid: {0}")]
    Invalid(ValidationReport),
}

fn number(s: Option<&str>, line: usize, what: &'static str) -> Result<f64, AfmError> {
    s.and_then(|t| t.parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .ok_or(AfmError::BadValue { line, what })
}

fn char_record(line_no: usize, line: &str) -> Result<AfmGlyph, AfmError> {
    let bad = || AfmError::MalformedCharRecord(line_no);
    let mut code = None;
    let mut width = None;
    let mut name = None;
    let mut bbox = [0.0; 4];
    for part in line.split(';') {
        let mut t = part.split_whitespace();
        let Some(key) = t.next() else { continue };
        let parse = |s: Option<&str>| s.and_then(|v| v.parse::<f64>().ok()).filter(|v| v.is_finite());
        match key {
            "C" => code = Some(t.next().and_then(|v| v.parse::<i32>().ok()).ok_or_else(bad)?),
            "CH" => {
                let hex = t.next().ok_or_else(bad)?;
                let hex = hex.trim_start_matches('<').trim_end_matches('>');
                code = Some(i32::from_str_radix(hex, 16).map_err(|_| bad())?);
            }
            "WX" | "W0X" => width = Some(parse(t.next()).ok_or_else(bad)?),
            "W" | "W0" => width = Some(parse(t.next()).ok_or_else(bad)?),
            "N" => name = Some(t.next().ok_or_else(bad)?.to_string()),
            "B" => {
                for v in bbox.iter_mut() {
                    *v = parse(t.next()).ok_or_else(bad)?;
                }
            }
            _ => {}
        }
    }
    let code = code.filter(|c| (-1..=255).contains(c)).ok_or_else(bad)?;
    Ok(AfmGlyph {
        code,
        name: name.ok_or_else(bad)?,
        width: width.ok_or_else(bad)?,
        bbox,
    })
}

/// Reads an AFM file. Ligature records and composites are skipped.
pub fn parse_afm(src: &str) -> Result<AfmFont, AfmError> {
    let mut afm = AfmFont::default();
    let mut lines = src.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let header = lines.find(|(_, l)| !l.is_empty() && !l.starts_with("Comment"));
    if !matches!(header, Some((_, l)) if l.starts_with("StartFontMetrics")) {
        return Err(AfmError::MissingHeader);
    }
    let mut in_chars = false;
    let mut names = BTreeMap::new();
    for (n, line) in lines {
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        if in_chars {
            match key {
                "EndCharMetrics" => in_chars = false,
                "" => {}
                _ => {
                    let g = char_record(n, line)?;
                    if names.insert(g.name.clone(), n).is_some() {
                        return Err(AfmError::DuplicateGlyph { line: n, name: g.name });
                    }
                    afm.glyphs.push(g);
                }
            }
            continue;
        }
        match key {
            "StartCharMetrics" => in_chars = true,
            "FontName" => afm.font_name = rest.into(),
            "FamilyName" => afm.family_name = rest.into(),
            "EncodingScheme" => afm.encoding_scheme = rest.into(),
            "ItalicAngle" => afm.italic_angle = number(Some(rest), n, "ItalicAngle")?,
            "XHeight" => afm.x_height = Some(number(Some(rest), n, "XHeight")?),
            "KPX" | "KP" => {
                let mut t = rest.split_whitespace();
                let left = t.next().ok_or(AfmError::BadValue { line: n, what: "kern pair" })?;
                let right = t.next().ok_or(AfmError::BadValue { line: n, what: "kern pair" })?;
                let dx = number(t.next(), n, "kern pair")?;
                afm.kern_pairs.push(KernPair {
                    left: left.into(),
                    right: right.into(),
                    dx,
                });
            }
            _ => {}
        }
    }
    Ok(afm)
}

/// `<tfm> <ps> [" <vector> ReEncodeFont "] [<enc] [<pfb]`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MapLine {
    pub tfm_name: String,
    pub ps_name: String,
    pub reencode: Option<ReEncode>,
    pub download: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReEncode {
    pub vector: String,
    pub enc_file: String,
}

pub fn emit_map_line(l: &MapLine) -> String {
    let mut out = format!("{} {}", l.tfm_name, l.ps_name);
    if let Some(r) = &l.reencode {
        out.push_str(&format!(" \" {} ReEncodeFont \" <{}", r.vector, r.enc_file));
    }
    if let Some(pfb) = &l.download {
        out.push_str(&format!(" <{pfb}"));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("map line needs a TFM name and a PostScript name")]
    MissingNames,
    #[error("unsupported map line element {0:?}")]
    Unsupported(String),
}

/// Reads a line produced by [`emit_map_line`].
pub fn parse_map_line(line: &str) -> Result<MapLine, MapError> {
    let line = line.trim();
    let (head, rest) = match line.find('"') {
        Some(i) => (&line[..i], &line[i..]),
        None => (line, ""),
    };
    let mut words = head.split_whitespace();
    let tfm_name = words.next().ok_or(MapError::MissingNames)?.to_string();
    let ps_name = words.next().ok_or(MapError::MissingNames)?.to_string();
    let mut files: Vec<&str> = words.collect();
    let mut vector = None;
    if !rest.is_empty() {
        let close = rest[1..].find('"').ok_or_else(|| MapError::Unsupported(rest.into()))? + 1;
        let ps: Vec<&str> = rest[1..close].split_whitespace().collect();
        match ps.as_slice() {
            [v, "ReEncodeFont"] => vector = Some(v.to_string()),
            _ => return Err(MapError::Unsupported(rest[..=close].into())),
        }
        files.extend(rest[close + 1..].split_whitespace());
    }
    let mut enc = None;
    let mut download = None;
    for f in files {
        let name = f
            .strip_prefix("<<")
            .or_else(|| f.strip_prefix('<'))
            .ok_or_else(|| MapError::Unsupported(f.into()))?;
        if name.ends_with(".enc") && vector.is_some() && enc.is_none() {
            enc = Some(name.to_string());
        } else if download.is_none() {
            download = Some(name.to_string());
        } else {
            return Err(MapError::Unsupported(f.into()));
        }
    }
    let reencode = match (vector, enc) {
        (Some(vector), Some(enc_file)) => Some(ReEncode { vector, enc_file }),
        (None, None) => None,
        (Some(v), None) => return Err(MapError::Unsupported(v)),
        (None, Some(e)) => return Err(MapError::Unsupported(e)),
    };
    Ok(MapLine {
        tfm_name,
        ps_name,
        reencode,
        download,
    })
}

#[derive(Clone, Debug)]
pub struct AfmOptions<'a> {
    pub reencode: Option<&'a EncodingVector>,
    /// File name of `reencode`, for the map line.
    pub enc_file: Option<String>,
    pub design: FixWord,
    /// Name of the TFM being written, without extension.
    pub tfm_name: String,
    pub pfb_file: Option<String>,
    /// Also build a virtual font that forwards every character to the TFM.
    pub virtual_font: bool,
}

impl AfmOptions<'_> {
    pub fn new(tfm_name: impl Into<String>) -> AfmOptions<'static> {
        AfmOptions {
            reencode: None,
            enc_file: None,
            design: FixWord::from_int(10),
            tfm_name: tfm_name.into(),
            pfb_file: None,
            virtual_font: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AfmConversion {
    pub metrics: FontMetrics,
    pub virtual_font: Option<(VirtualFont, FontMetrics)>,
    pub map: MapLine,
}

fn em_fraction(milli: f64) -> FixWord {
    // AFM values are far inside the fix_word range.
    FixWord::from_real(milli / 1000.0).unwrap_or_default()
}

fn clean_header(s: &str, max: usize) -> String {
    s.chars()
        .filter(|c| (' '..='~').contains(c) && *c != '(' && *c != ')')
        .take(max)
        .collect()
}

/// Converts AFM metrics to TFM metrics, optionally re-encoding the glyphs.
pub fn afm_to_metrics(afm: &AfmFont, opts: &AfmOptions<'_>) -> Result<AfmConversion, AfmError> {
    let by_name: BTreeMap<&str, &AfmGlyph> = afm.glyphs.iter().map(|g| (g.name.as_str(), g)).collect();
    let mut layout: BTreeMap<u8, &AfmGlyph> = BTreeMap::new();
    match opts.reencode {
        Some(v) => {
            for slot in 0..=255u8 {
                let name = v.slot(slot);
                if name == NOTDEF {
                    continue;
                }
                let g = by_name.get(name).ok_or_else(|| AfmError::UnresolvedGlyph {
                    name: name.into(),
                    slot,
                })?;
                layout.insert(slot, g);
            }
        }
        None => {
            for g in afm.glyphs.iter().filter(|g| g.code >= 0) {
                if layout.insert(g.code as u8, g).is_some() {
                    return Err(AfmError::DuplicateSlot(g.code as u8));
                }
            }
        }
    }

    let mut m = FontMetrics::new(opts.design);
    m.coding_scheme = clean_header(
        opts.reencode.map(|v| v.name()).unwrap_or(&afm.encoding_scheme),
        39,
    );
    for (&slot, g) in &layout {
        m.chars.insert(
            slot,
            CharDim {
                width: em_fraction(g.width),
                height: em_fraction(g.bbox[3].max(0.0)),
                depth: em_fraction((-g.bbox[1]).max(0.0)),
                ..CharDim::default()
            },
        );
    }

    let mut slots_of: BTreeMap<&str, Vec<u8>> = BTreeMap::new();
    for (&slot, g) in &layout {
        slots_of.entry(g.name.as_str()).or_default().push(slot);
    }
    let mut programs: BTreeMap<u8, BTreeMap<u8, FixWord>> = BTreeMap::new();
    for k in &afm.kern_pairs {
        let (Some(lefts), Some(rights)) = (slots_of.get(k.left.as_str()), slots_of.get(k.right.as_str())) else {
            continue;
        };
        for &l in lefts {
            for &r in rights {
                programs.entry(l).or_default().entry(r).or_insert(em_fraction(k.dx));
            }
        }
    }
    for (left, kerns) in programs {
        let start = m.ligkern.len() as u16;
        let n = kerns.len();
        for (i, (right, value)) in kerns.into_iter().enumerate() {
            let index = m.kerns.iter().position(|k| *k == value).unwrap_or_else(|| {
                m.kerns.push(value);
                m.kerns.len() - 1
            });
            let step = LigKernStep::kern(right, index as u16);
            m.ligkern.push(if i + 1 == n { step.stopping() } else { step });
        }
        if let Some(d) = m.chars.get_mut(&left) {
            d.tag = CharTag::Lig(start);
        }
    }

    let slant = -libm::tan(afm.italic_angle.to_radians());
    let space = by_name.get("space").map(|g| em_fraction(g.width)).unwrap_or(FixWord::ONE / 3);
    let x_height = afm
        .x_height
        .or_else(|| by_name.get("x").map(|g| g.bbox[3]))
        .map(em_fraction)
        .unwrap_or_default();
    m.set_param(SLANT, FixWord::from_real(slant).unwrap_or_default());
    m.set_param(SPACE, space);
    m.set_param(STRETCH, space / 2);
    m.set_param(SHRINK, space / 3);
    m.set_param(XHEIGHT, x_height);
    m.set_param(QUAD, FixWord::ONE);
    m.set_param(EXTRASPACE, space / 3);
    m.shorten_tables();
    m.checksum = compute_checksum(&m);
    let report = m.validate();
    if !report.is_empty() {
        return Err(AfmError::Invalid(report));
    }

    let virtual_font = if opts.virtual_font {
        let sources = BTreeMap::from([(opts.tfm_name.clone(), m.clone())]);
        let mut plan = CompositionPlan::identity(opts.tfm_name.clone(), opts.design);
        plan.title = format!("{} re-encoded", afm.font_name);
        let (vf, mut vm) = compose(&plan, &sources).map_err(|e| match e {
            crate::vf::ComposeError::Invalid(r) => AfmError::Invalid(r),
            _ => AfmError::Invalid(ValidationReport::default()),
        })?;
        vm.checksum = m.checksum;
        let vf = VirtualFont { checksum: m.checksum, ..vf };
        Some((vf, vm))
    } else {
        None
    };

    let map = MapLine {
        tfm_name: opts.tfm_name.clone(),
        ps_name: afm.font_name.clone(),
        reencode: match (opts.reencode, &opts.enc_file) {
            (Some(v), Some(file)) => Some(ReEncode {
                vector: v.name().into(),
                enc_file: file.clone(),
            }),
            _ => None,
        },
        download: opts.pfb_file.clone(),
    };
    Ok(AfmConversion {
        metrics: m,
        virtual_font,
        map,
    })
}
