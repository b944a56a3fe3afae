//! Proptest strategies for valid metrics and virtual fonts, shared by this
//! crate's tests and the `texfm` acceptance suite.
//!
//! Generated values are already in the form the text parsers produce: kerns
//! are distinct and numbered in order of first use, and each extensible
//! character owns one recipe, numbered in slot order.

extern crate std;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use proptest::prelude::*;
use proptest::sample::select;

use crate::fixword::FixWord;
use crate::metrics::{CharDim, CharTag, ExtRecipe, FontMetrics, LigKernStep, LigOp};
use crate::vf::{BaseFont, Packet, PacketOp, VirtualFont};

/// A fix_word strictly inside (-16, 16).
pub fn dimension() -> impl Strategy<Value = FixWord> {
    (-(16 << 20) + 1..(16 << 20)).prop_map(FixWord)
}

fn small_pool(len: usize) -> impl Strategy<Value = Vec<FixWord>> {
    proptest::collection::btree_set(dimension(), 1..=len).prop_map(|s| s.into_iter().collect())
}

const SCHEMES: [&str; 6] = ["", "TeX text", "TeX math italic", "TeX math symbols", "FONTSPECIFIC", "TEX MATH EXTENSION"];
const FAMILIES: [&str; 4] = ["", "CMR", "NEWTX", "LIBERTINE"];

#[derive(Clone, Debug)]
struct Raw {
    design: FixWord,
    scheme: &'static str,
    family: &'static str,
    face: u8,
    seven_bit_safe: bool,
    extra_header: Vec<u32>,
    checksum: u32,
    chars: BTreeMap<u8, (usize, usize, usize, usize, u8)>,
    widths: Vec<FixWord>,
    heights: Vec<FixWord>,
    depths: Vec<FixWord>,
    italics: Vec<FixWord>,
    kern_pool: Vec<FixWord>,
    programs: Vec<Vec<(bool, usize, usize, usize, u8)>>,
    boundary: Option<(usize, usize)>,
    params: Vec<FixWord>,
    picks: Vec<usize>,
}

fn raw() -> impl Strategy<Value = Raw> {
    let header = (
        (1 << 20..100 << 20).prop_map(FixWord),
        select(&SCHEMES[..]),
        select(&FAMILIES[..]),
        any::<u8>(),
        any::<bool>(),
        proptest::collection::vec(any::<u32>(), 0..3),
        any::<u32>(),
    );
    let tables = (small_pool(30), small_pool(15), small_pool(15), small_pool(20), small_pool(8));
    let chars = proptest::collection::btree_map(
        any::<u8>(),
        (0..64usize, 0..32usize, 0..32usize, 0..64usize, 0..4u8),
        1..40,
    );
    let step = (any::<bool>(), 0..64usize, 0..64usize, 0..8usize, any::<u8>());
    let programs = proptest::collection::vec(proptest::collection::vec(step, 1..5), 0..6);
    let rest = (
        programs,
        proptest::option::of((0..64usize, 0..8usize)),
        proptest::collection::vec(dimension(), 0..12),
        proptest::collection::vec(0..64usize, 8),
    );
    (header, tables, chars, rest).prop_map(
        |((design, scheme, family, face, seven_bit_safe, extra_header, checksum), (widths, heights, depths, italics, kern_pool), chars, (programs, boundary, params, picks))| Raw {
            design,
            scheme,
            family,
            face,
            seven_bit_safe,
            extra_header,
            checksum,
            chars,
            widths,
            heights,
            depths,
            italics,
            kern_pool,
            programs,
            boundary,
            params,
            picks,
        },
    )
}

fn pick<T: Copy>(pool: &[T], i: usize) -> T {
    pool[i % pool.len()]
}

fn build(r: Raw) -> FontMetrics {
    let mut m = FontMetrics::new(r.design);
    m.coding_scheme = r.scheme.into();
    m.family = r.family.into();
    m.face = r.face;
    m.seven_bit_safe = r.seven_bit_safe;
    m.extra_header = r.extra_header;
    m.checksum = r.checksum;
    m.params = r.params;
    let slots: Vec<u8> = r.chars.keys().copied().collect();
    let maybe_zero = |pool: &[FixWord], i: usize| if i % 3 == 0 { FixWord::ZERO } else { pick(pool, i) };
    for (&slot, &(w, h, d, i, _)) in &r.chars {
        m.chars.insert(
            slot,
            CharDim {
                width: pick(&r.widths, w),
                height: maybe_zero(&r.heights, h),
                depth: maybe_zero(&r.depths, d),
                italic: maybe_zero(&r.italics, i),
                tag: CharTag::None,
            },
        );
    }
    // Lig/kern programs, kerns numbered by first use.
    let mut kern_index: BTreeMap<FixWord, u16> = BTreeMap::new();
    let mut starts = Vec::new();
    for program in &r.programs {
        starts.push(m.ligkern.len() as u16);
        for (n, &(is_kern, next, target, kern, op)) in program.iter().enumerate() {
            let next = pick(&slots, next);
            let mut step = if is_kern {
                let value = pick(&r.kern_pool, kern);
                let fresh = kern_index.len() as u16;
                let index = *kern_index.entry(value).or_insert(fresh);
                if index == fresh {
                    m.kerns.push(value);
                }
                LigKernStep::kern(next, index)
            } else {
                LigKernStep::lig(pick(&LigOp::ALL, usize::from(op)), next, pick(&slots, target))
            };
            if n + 1 == program.len() {
                step = step.stopping();
            }
            m.ligkern.push(step);
        }
    }
    if let (Some((bc, prog)), false) = (r.boundary, starts.is_empty()) {
        m.boundary_char = Some(pick(&slots, bc));
        m.boundary_program = Some(pick(&starts, prog));
    }
    // Tags: charlists only point upward, so they cannot loop.
    let mut p = r.picks.into_iter().cycle();
    for (k, (&slot, &(_, _, _, _, kind))) in r.chars.iter().enumerate() {
        let tag = match kind {
            1 if !starts.is_empty() => CharTag::Lig(pick(&starts, p.next().unwrap_or(0))),
            2 if k + 1 < slots.len() => {
                let above = &slots[k + 1..];
                CharTag::List(pick(above, p.next().unwrap_or(0)))
            }
            3 => {
                let nonzero: Vec<u8> = slots.iter().copied().filter(|&s| s != 0).collect();
                let flags = p.next().unwrap_or(0);
                let mut piece = |bit: usize| {
                    let i = p.next().unwrap_or(0);
                    (flags & bit != 0 && !nonzero.is_empty()).then(|| pick(&nonzero, i))
                };
                let (top, mid, bot) = (piece(1), piece(2), piece(4));
                let recipe = ExtRecipe {
                    top,
                    mid,
                    bot,
                    rep: pick(&slots, p.next().unwrap_or(0)),
                };
                m.extens.push(recipe);
                CharTag::Ext((m.extens.len() - 1) as u8)
            }
            _ => CharTag::None,
        };
        m.chars.get_mut(&slot).unwrap().tag = tag;
    }
    m
}

/// Valid [`FontMetrics`] in canonical form.
pub fn metrics() -> impl Strategy<Value = FontMetrics> {
    raw().prop_map(build).prop_filter("metrics must validate", |m| m.validate().is_empty())
}

const NAMES: [&str; 5] = ["rtxmi", "fxlri", "ntxsy", "cmr10", "a"];

fn op(fonts: Vec<u32>, slots: Vec<u8>) -> impl Strategy<Value = PacketOp> {
    prop_oneof![
        select(slots).prop_map(PacketOp::SetChar),
        select(fonts).prop_map(PacketOp::SelectFont),
        dimension().prop_map(PacketOp::MoveRight),
        dimension().prop_map(PacketOp::MoveDown),
        (dimension(), dimension()).prop_map(|(height, width)| PacketOp::SetRule { height, width }),
        proptest::collection::vec(any::<u8>(), 0..20).prop_map(PacketOp::Special),
        "[a-z:]{1,8}( [a-z0-9]{1,5}){0,3}".prop_map(|s| PacketOp::Special(s.into_bytes())),
    ]
}

fn program(fonts: Vec<u32>, slots: Vec<u8>) -> impl Strategy<Value = Vec<PacketOp>> {
    proptest::collection::vec((op(fonts, slots), 0..4u8), 0..12).prop_map(|items| {
        // Wrap some ops in push/pop so nesting is exercised but balanced.
        let mut out = Vec::new();
        let mut depth = 0;
        for (o, k) in items {
            match k {
                0 => {
                    out.push(PacketOp::Push);
                    depth += 1;
                }
                1 if depth > 0 => {
                    out.push(PacketOp::Pop);
                    depth -= 1;
                }
                _ => {}
            }
            out.push(o);
        }
        out.extend(core::iter::repeat(PacketOp::Pop).take(depth));
        out
    })
}

fn base_font() -> impl Strategy<Value = BaseFont> {
    (
        0u32..1000,
        any::<u32>(),
        (1..16 << 20).prop_map(FixWord),
        (1 << 20..100 << 20).prop_map(FixWord),
        select(&["", "fonts", "tfm"][..]),
        select(&NAMES[..]),
    )
        .prop_map(|(index, checksum, scale, design, area, name)| BaseFont {
            index,
            checksum,
            scale,
            design,
            area: area.into(),
            name: name.into(),
        })
}

/// A virtual font over `m`: packet widths equal the metric widths and the
/// checksum and design size are shared.
pub fn virtual_font_for(m: FontMetrics) -> impl Strategy<Value = (VirtualFont, FontMetrics)> {
    let slots: Vec<u8> = m.chars.keys().copied().collect();
    (
        proptest::collection::vec(base_font(), 1..4),
        "[A-Za-z0-9 .,:-]{0,40}",
        proptest::collection::vec(any::<bool>(), slots.len()),
    )
        .prop_flat_map(move |(fonts, comment, present)| {
            let mut seen = BTreeSet::new();
            let fonts: Vec<BaseFont> = fonts.into_iter().filter(|f| seen.insert(f.index)).collect();
            let indices: Vec<u32> = fonts.iter().map(|f| f.index).collect();
            let chosen: Vec<u8> = slots
                .iter()
                .zip(&present)
                .filter(|(_, &on)| on)
                .map(|(&s, _)| s)
                .collect();
            let progs = proptest::collection::vec(program(indices, slots.clone()), chosen.len());
            let m = m.clone();
            let comment = String::from(comment.trim());
            progs.prop_map(move |progs| {
                let v = VirtualFont {
                    comment: comment.clone(),
                    checksum: m.checksum,
                    design_size: m.design_size,
                    base_fonts: fonts.clone(),
                    packets: chosen
                        .iter()
                        .zip(progs)
                        .map(|(&s, program)| (s, Packet { width: m.chars[&s].width, program }))
                        .collect(),
                };
                (v, m.clone())
            })
        })
}

/// A random valid virtual font together with its metrics.
pub fn virtual_font() -> impl Strategy<Value = (VirtualFont, FontMetrics)> {
    metrics().prop_flat_map(virtual_font_for)
}
