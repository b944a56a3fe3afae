//! One function per module operation. Everything here maps bytes to bytes;
//! reading and writing files is left to the CLI and the runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use texfm_core::afm::{afm_to_metrics, parse_afm, AfmConversion, AfmOptions};
use texfm_core::encoding::{parse_enc, EncodingRegistry, EncodingVector, NOTDEF};
use texfm_core::fixword::FixWord;
use texfm_core::optical::{ew_metrics, ew_squared, unslant as unslant_metrics, OpticalParams, Ratio};
use texfm_core::pl::{emit_pl, parse_pl, CharcodeFormat};
use texfm_core::tfm::{emit_tfm, parse_tfm};
use texfm_core::type1::load_type1;
use texfm_core::vf::{compose as compose_vf, emit_vf, emit_vpl, parse_vf, parse_vpl};
use texfm_core::FontMetrics;

use crate::manifest::{Op, Step};
use crate::plan::parse_plan;

/// File name without directories or extension.
pub fn stem(path: &str) -> &str {
    Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or(path)
}

pub fn extension(path: &str) -> &str {
    Path::new(path).extension().and_then(|s| s.to_str()).unwrap_or("")
}

fn file_name(path: &str) -> &str {
    Path::new(path).file_name().and_then(|s| s.to_str()).unwrap_or(path)
}

fn text(bytes: &[u8], what: &str) -> Result<String> {
    String::from_utf8(bytes.to_vec()).with_context(|| format!("{what} is not UTF-8"))
}

/// A vector loaded from an `.enc` file, labelled with the file stem.
pub struct EncFile {
    pub label: String,
    pub file: String,
    pub vector: EncodingVector,
}

impl EncFile {
    pub fn read(path: &str, bytes: &[u8]) -> Result<EncFile> {
        let vector = parse_enc(&text(bytes, path)?).with_context(|| format!("reading {path}"))?;
        Ok(EncFile {
            label: stem(path).into(),
            file: file_name(path).into(),
            vector,
        })
    }
}

pub fn tftopl(tfm: &[u8], fmt: CharcodeFormat, enc: Option<&EncFile>, declare: Option<(&str, &str)>) -> Result<String> {
    let m = parse_tfm(tfm)?;
    let mut registry = EncodingRegistry::new();
    if let Some(e) = enc {
        registry = registry.with_vector(&e.label, e.vector.clone())?;
    }
    if let Some((scheme, target)) = declare {
        registry = registry.declare(scheme, target)?;
    }
    let names = match (fmt, enc) {
        (CharcodeFormat::Names, Some(_)) => Some(registry.resolve(&m.coding_scheme)?.clone()),
        (CharcodeFormat::Names, None) => bail!("names format needs an encoding file"),
        _ => None,
    };
    Ok(emit_pl(&m, fmt, names.as_ref())?)
}

pub fn pltotf(pl: &str) -> Result<Vec<u8>> {
    Ok(emit_tfm(&parse_pl(pl)?)?)
}

/// Returns the VF bytes and the TFM bytes.
pub fn vptovf(vpl: &str) -> Result<(Vec<u8>, Vec<u8>)> {
    let (v, m) = parse_vpl(vpl)?;
    Ok((emit_vf(&v)?, emit_tfm(&m)?))
}

pub fn vftovp(vf: &[u8], tfm: &[u8], fmt: CharcodeFormat) -> Result<String> {
    Ok(emit_vpl(&parse_vf(vf)?, &parse_tfm(tfm)?, fmt)?)
}

pub struct AfmRequest<'a> {
    pub tfm_name: String,
    pub enc: Option<&'a EncFile>,
    pub design: FixWord,
    pub pfb: Option<String>,
    pub virtual_font: bool,
}

pub fn afm2tfm(afm: &str, req: &AfmRequest<'_>) -> Result<AfmConversion> {
    let font = parse_afm(afm)?;
    let opts = AfmOptions {
        reencode: req.enc.map(|e| &e.vector),
        enc_file: req.enc.map(|e| e.file.clone()),
        design: req.design,
        tfm_name: req.tfm_name.clone(),
        pfb_file: req.pfb.clone(),
        virtual_font: req.virtual_font,
    };
    Ok(afm_to_metrics(&font, &opts)?)
}

/// Returns VF bytes, TFM bytes and VPL text.
pub fn compose(plan: &str, sources: &BTreeMap<String, Vec<u8>>, fmt: CharcodeFormat) -> Result<(Vec<u8>, Vec<u8>, String)> {
    let plan = parse_plan(plan)?;
    let metrics = sources
        .iter()
        .map(|(name, bytes)| Ok((name.clone(), parse_tfm(bytes).with_context(|| format!("reading {name}"))?)))
        .collect::<Result<BTreeMap<String, FontMetrics>>>()?;
    let (v, m) = compose_vf(&plan, &metrics)?;
    Ok((emit_vf(&v)?, emit_tfm(&m)?, emit_vpl(&v, &m, fmt)?))
}

pub fn optical(tfm: &[u8], p: &OpticalParams, twice: bool) -> Result<Vec<u8>> {
    p.validate()?;
    let m = parse_tfm(tfm)?;
    let out = if twice { ew_squared(&m, p) } else { ew_metrics(&m, p) };
    Ok(emit_tfm(&out)?)
}

pub fn unslant(tfm: &[u8]) -> Result<Vec<u8>> {
    Ok(emit_tfm(&unslant_metrics(&parse_tfm(tfm)?))?)
}

pub fn preset(name: &str) -> Result<OpticalParams> {
    Ok(match name {
        "ew" | "ew2" => OpticalParams::ew(),
        "observed7pt" => OpticalParams::observed7pt(),
        "identity" => OpticalParams::identity(),
        _ => bail!("unknown preset {name:?} (expected ew, ew2, observed7pt or identity)"),
    })
}

fn ratio(s: &str) -> Result<Ratio> {
    s.parse::<Ratio>().map_err(|_| anyhow!("bad ratio {s:?}"))
}

fn boolean(s: &str) -> Result<bool> {
    match s {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => bail!("expected true or false, found {s:?}"),
    }
}

fn optical_params(keys: &BTreeMap<String, String>) -> Result<OpticalParams> {
    let mut p = preset(keys.get("preset").map_or("ew", String::as_str))?;
    if let Some(v) = keys.get("vstem-scale") {
        p.vstem_scale = ratio(v)?;
    }
    if let Some(v) = keys.get("width-scale") {
        p.width_scale = ratio(v)?;
    }
    if let Some(v) = keys.get("lsb") {
        p.lsb_delta = v.parse().with_context(|| format!("bad lsb {v:?}"))?;
    }
    if let Some(v) = keys.get("rsb") {
        p.rsb_delta = v.parse().with_context(|| format!("bad rsb {v:?}"))?;
    }
    if let Some(v) = keys.get("kern-scale") {
        p.scale_kerns = boolean(v)?;
    }
    Ok(p)
}

/// Step inputs with the given extension.
fn with_ext<'a>(paths: &'a [String], ext: &str) -> Vec<&'a str> {
    paths.iter().map(String::as_str).filter(|p| extension(p) == ext).collect()
}

fn one<'a>(paths: &'a [String], ext: &str, what: &str) -> Result<&'a str> {
    match with_ext(paths, ext)[..] {
        [p] => Ok(p),
        [] => bail!("{what} needs a .{ext} file"),
        _ => bail!("{what} takes only one .{ext} file"),
    }
}

fn optional<'a>(paths: &'a [String], ext: &str, what: &str) -> Result<Option<&'a str>> {
    match with_ext(paths, ext)[..] {
        [p] => Ok(Some(p)),
        [] => Ok(None),
        _ => bail!("{what} takes only one .{ext} file"),
    }
}

fn charcode(keys: &BTreeMap<String, String>) -> Result<CharcodeFormat> {
    keys.get("charcode-format")
        .map_or(Ok(CharcodeFormat::Default), |s| s.parse().map_err(|e: String| anyhow!(e)))
}

/// Runs one manifest step. `inputs` holds the bytes of every path in
/// `step.inputs`; the result pairs each path in `step.outputs` with its bytes.
pub fn execute(step: &Step, inputs: &BTreeMap<String, Vec<u8>>) -> Result<Vec<(String, Vec<u8>)>> {
    let what = step.op.name();
    let bytes = |path: &str| -> Result<&Vec<u8>> { inputs.get(path).ok_or_else(|| anyhow!("input {path} was not read")) };
    let enc = match step.keys.get("enc") {
        Some(path) => Some(EncFile::read(path, bytes(path)?)?),
        None => None,
    };
    let outs = &step.outputs;
    let produced: Vec<(&str, Vec<u8>)> = match step.op {
        Op::Tftopl => {
            let declare = step
                .keys
                .get("declare")
                .map(|d| d.split_once('=').ok_or_else(|| anyhow!("declare must be SCHEME=VECTOR")))
                .transpose()?;
            let pl = tftopl(bytes(one(&step.inputs, "tfm", what)?)?, charcode(&step.keys)?, enc.as_ref(), declare)?;
            vec![(one(outs, "pl", what)?, pl.into_bytes())]
        }
        Op::Pltotf => {
            let src = one(&step.inputs, "pl", what)?;
            vec![(one(outs, "tfm", what)?, pltotf(&text(bytes(src)?, src)?)?)]
        }
        Op::Vptovf => {
            let src = one(&step.inputs, "vpl", what)?;
            let (vf, tfm) = vptovf(&text(bytes(src)?, src)?)?;
            vec![(one(outs, "vf", what)?, vf), (one(outs, "tfm", what)?, tfm)]
        }
        Op::Vftovp => {
            let vf = bytes(one(&step.inputs, "vf", what)?)?;
            let tfm = bytes(one(&step.inputs, "tfm", what)?)?;
            vec![(one(outs, "vpl", what)?, vftovp(vf, tfm, charcode(&step.keys)?)?.into_bytes())]
        }
        Op::Afm2tfm | Op::Map => {
            let src = one(&step.inputs, "afm", what)?;
            let tfm_out = optional(outs, "tfm", what)?;
            let vpl_out = optional(outs, "vpl", what)?;
            let map_out = optional(outs, "map", what)?;
            let tfm_name = match (step.keys.get("tfm-name"), tfm_out) {
                (Some(n), _) => n.clone(),
                (None, Some(t)) => stem(t).into(),
                (None, None) => stem(src).into(),
            };
            let design = match step.keys.get("design") {
                Some(d) => texfm_core::fixword::parse_decimal(d).map_err(|e| anyhow!("design {d:?}: {e}"))?,
                None => FixWord::from_int(10),
            };
            let conv = afm2tfm(
                &text(bytes(src)?, src)?,
                &AfmRequest {
                    tfm_name,
                    enc: enc.as_ref(),
                    design,
                    pfb: step.keys.get("pfb").cloned(),
                    virtual_font: vpl_out.is_some(),
                },
            )?;
            let mut v = Vec::new();
            if step.op == Op::Map {
                v.push((one(outs, "map", what)?, map_text(&conv)));
            } else {
                v.push((tfm_out.ok_or_else(|| anyhow!("afm2tfm needs a .tfm output"))?, emit_tfm(&conv.metrics)?));
                if let (Some(path), Some((vf, vm))) = (vpl_out, &conv.virtual_font) {
                    v.push((path, emit_vpl(vf, vm, charcode(&step.keys)?)?.into_bytes()));
                }
                if let Some(path) = map_out {
                    v.push((path, map_text(&conv)));
                }
            }
            v
        }
        Op::Compose => {
            let plan = step.keys.get("plan").ok_or_else(|| anyhow!("compose needs a plan"))?;
            let sources = with_ext(&step.inputs, "tfm")
                .into_iter()
                .map(|p| Ok((stem(p).to_string(), bytes(p)?.clone())))
                .collect::<Result<BTreeMap<_, _>>>()?;
            let (vf, tfm, vpl) = compose(&text(bytes(plan)?, plan)?, &sources, charcode(&step.keys)?)?;
            let mut v = vec![(one(outs, "vf", what)?, vf), (one(outs, "tfm", what)?, tfm)];
            if let Some(path) = optional(outs, "vpl", what)? {
                v.push((path, vpl.into_bytes()));
            }
            v
        }
        Op::Ew | Op::Ew2 => {
            let p = optical_params(&step.keys)?;
            let out = optical(bytes(one(&step.inputs, "tfm", what)?)?, &p, step.op == Op::Ew2)?;
            vec![(one(outs, "tfm", what)?, out)]
        }
        Op::Unslant => vec![(one(outs, "tfm", what)?, unslant(bytes(one(&step.inputs, "tfm", what)?)?)?)],
        Op::External => bail!("external steps are not executed"),
    };
    for o in outs {
        if !produced.iter().any(|(p, _)| p == o) {
            bail!("{what} does not know how to produce {o}");
        }
    }
    Ok(produced.into_iter().map(|(p, b)| (p.to_string(), b)).collect())
}

fn map_text(conv: &AfmConversion) -> Vec<u8> {
    let mut s = texfm_core::afm::emit_map_line(&conv.map);
    s.push('\n');
    s.into_bytes()
}

/// A human-readable summary of a font file, chosen by extension.
pub fn inspect(path: &str, data: &[u8], glyph: Option<&str>) -> Result<String> {
    let mut out = String::new();
    match extension(path) {
        "tfm" => metrics_summary(&mut out, &parse_tfm(data)?),
        "pl" => metrics_summary(&mut out, &parse_pl(&text(data, path)?)?),
        "vf" => {
            let v = parse_vf(data)?;
            writeln!(out, "checksum {:08X}", v.checksum)?;
            writeln!(out, "design size {}", v.design_size)?;
            for f in &v.base_fonts {
                writeln!(out, "font {} {} scaled {} at {}", f.index, f.name, f.scale, f.design)?;
            }
            writeln!(out, "packets {}", v.packets.len())?;
        }
        "vpl" => {
            let (v, m) = parse_vpl(&text(data, path)?)?;
            writeln!(out, "base fonts {}", v.base_fonts.len())?;
            writeln!(out, "packets {}", v.packets.len())?;
            metrics_summary(&mut out, &m);
        }
        "afm" => {
            let a = parse_afm(&text(data, path)?)?;
            writeln!(out, "font {}", a.font_name)?;
            writeln!(out, "encoding {}", a.encoding_scheme)?;
            writeln!(out, "italic angle {}", a.italic_angle)?;
            writeln!(out, "glyphs {}", a.glyphs.len())?;
            writeln!(out, "kern pairs {}", a.kern_pairs.len())?;
        }
        "enc" => {
            let v = parse_enc(&text(data, path)?)?;
            writeln!(out, "vector {}", v.name())?;
            writeln!(out, "named slots {}", v.slots().iter().filter(|s| *s != NOTDEF).count())?;
        }
        "pfb" | "pfa" => {
            let f = load_type1(data)?;
            writeln!(out, "font {}", f.font_name)?;
            writeln!(out, "units per em {}", f.units_per_em)?;
            writeln!(out, "subrs {}", f.subrs.len())?;
            writeln!(out, "glyphs {}", f.charstrings.len())?;
            if let Some(name) = glyph {
                let g = f.glyph(name)?;
                writeln!(out, "glyph {} advance {} sidebearing {}", g.name, g.advance, g.sidebearing_x)?;
                writeln!(out, "contours {}", g.contours.len())?;
                for (kind, stems) in [("hstem", &g.hstems), ("vstem", &g.vstems)] {
                    for s in stems {
                        writeln!(out, "{kind} {} {}{}", s.start, s.extent, if s.edge { " edge" } else { "" })?;
                    }
                }
            }
        }
        e => bail!("cannot inspect .{e} files"),
    }
    Ok(out)
}

fn metrics_summary(out: &mut String, m: &FontMetrics) {
    let _ = writeln!(out, "checksum {:08X}", m.checksum);
    let _ = writeln!(out, "design size {}", m.design_size);
    let _ = writeln!(out, "coding scheme {}", m.coding_scheme);
    let _ = writeln!(out, "characters {}", m.chars.len());
    let _ = writeln!(out, "lig/kern steps {}", m.ligkern.len());
    let _ = writeln!(out, "kerns {}", m.kerns.len());
    let params: Vec<String> = m.params.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "params {}", params.join(" "));
    let report = m.validate();
    if !report.violations.is_empty() {
        let _ = writeln!(out, "violations: {report}");
    }
}
