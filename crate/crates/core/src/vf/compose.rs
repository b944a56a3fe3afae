//! Building a virtual font from a default font plus per-slot replacements
//! taken from other fonts.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{BaseFont, Packet, PacketOp, VirtualFont};
use crate::fixword::FixWord;
use crate::metrics::{CharDim, CharTag, FontMetrics, LigKernAction, LigKernStep, ValidationReport};
use crate::tfm::compute_checksum;

/// Where one output slot comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotRule {
    pub font: String,
    pub slot: u8,
    /// Replaces the source width in the output metrics only.
    pub width: Option<FixWord>,
    pub dx: Option<FixWord>,
    pub dy: Option<FixWord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernOverride {
    pub left: u8,
    pub right: u8,
    pub value: FixWord,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionPlan {
    pub design: FixWord,
    pub default_font: String,
    /// Base fonts besides the default, in `MAPFONT` order.
    pub fonts: Vec<String>,
    pub title: String,
    pub slot_rules: BTreeMap<u8, SlotRule>,
    pub kern_overrides: Vec<KernOverride>,
}

impl CompositionPlan {
    pub fn identity(default_font: impl Into<String>, design: FixWord) -> CompositionPlan {
        CompositionPlan {
            design,
            default_font: default_font.into(),
            fonts: Vec::new(),
            title: String::new(),
            slot_rules: BTreeMap::new(),
            kern_overrides: Vec::new(),
        }
    }

    /// Base font names in font-number order; the default font is number 0.
    pub fn font_order(&self) -> Vec<&str> {
        let mut order = vec![self.default_font.as_str()];
        for f in &self.fonts {
            if !order.contains(&f.as_str()) {
                order.push(f);
            }
        }
        order
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ComposeError {
    #[error("font {0:?} is not among the sources")]
    MissingSource(String),
    #[error("font {0:?} is used by a slot rule but not declared in the plan")]
    UndeclaredFont(String),
    #[error("font {font:?} has no character {slot:#o}")]
    SlotAbsentInSource { font: String, slot: u8 },
    #[error("slot {slot:#o} is replaced but takes part in a ligature of the default font")]
    CrossFontLigature { slot: u8 },
    #[error("kern override {left:#o} {right:#o} collides with a ligature")]
    KernOverLigature { left: u8, right: u8 },
    #[error("composed metrics are invalid: {0}")]
    Invalid(ValidationReport),
}

/// Assembles the virtual font and its metrics.
pub fn compose(
    plan: &CompositionPlan,
    sources: &BTreeMap<String, FontMetrics>,
) -> Result<(VirtualFont, FontMetrics), ComposeError> {
    let order = plan.font_order();
    for rule in plan.slot_rules.values() {
        if !order.contains(&rule.font.as_str()) {
            return Err(ComposeError::UndeclaredFont(rule.font.clone()));
        }
    }
    let fonts: Vec<&FontMetrics> = order
        .iter()
        .map(|name| sources.get(*name).ok_or_else(|| ComposeError::MissingSource(String::from(*name))))
        .collect::<Result<_, _>>()?;
    let default = fonts[0];

    for &slot in plan.slot_rules.keys() {
        if takes_part_in_ligature(default, slot) {
            return Err(ComposeError::CrossFontLigature { slot });
        }
    }

    let mut out = default.clone();
    out.design_size = plan.design;
    let mut packets = BTreeMap::new();
    for &slot in default.chars.keys() {
        packets.insert(slot, vec![PacketOp::SelectFont(0), PacketOp::SetChar(slot)]);
    }
    for (&slot, rule) in &plan.slot_rules {
        let index = order.iter().position(|f| *f == rule.font).unwrap_or_default();
        let src = fonts[index].chars.get(&rule.slot).ok_or_else(|| ComposeError::SlotAbsentInSource {
            font: rule.font.clone(),
            slot: rule.slot,
        })?;
        let tag = match out.chars.get(&slot).map(|d| d.tag) {
            Some(tag @ CharTag::Lig(_)) => tag,
            _ => CharTag::None,
        };
        out.chars.insert(
            slot,
            CharDim {
                width: rule.width.unwrap_or(src.width),
                height: src.height,
                depth: src.depth,
                italic: src.italic,
                tag,
            },
        );
        let mut program = vec![PacketOp::SelectFont(index as u32)];
        if let Some(dx) = rule.dx {
            program.push(PacketOp::MoveRight(dx));
        }
        if let Some(dy) = rule.dy {
            program.push(PacketOp::MoveDown(dy));
        }
        program.push(PacketOp::SetChar(rule.slot));
        packets.insert(slot, program);
    }
    if !plan.kern_overrides.is_empty() {
        apply_kern_overrides(&mut out, &plan.kern_overrides)?;
    }
    out.checksum = compute_checksum(&out);
    let report = out.validate();
    if !report.is_empty() {
        return Err(ComposeError::Invalid(report));
    }

    let vf = VirtualFont {
        comment: plan.title.clone(),
        checksum: out.checksum,
        design_size: out.design_size,
        base_fonts: order
            .iter()
            .zip(&fonts)
            .enumerate()
            .map(|(i, (name, m))| BaseFont {
                index: i as u32,
                checksum: m.checksum,
                scale: FixWord::ONE,
                design: m.design_size,
                area: String::new(),
                name: String::from(*name),
            })
            .collect(),
        packets: packets
            .into_iter()
            .map(|(slot, program)| {
                let width = out.chars[&slot].width;
                (slot, Packet { width, program })
            })
            .collect(),
    };
    Ok((vf, out))
}

fn takes_part_in_ligature(m: &FontMetrics, slot: u8) -> bool {
    let ligs = |steps: &[(usize, LigKernStep)]| {
        steps
            .iter()
            .any(|(_, s)| matches!(s.action(), LigKernAction::Lig { .. }))
    };
    if let Some(CharDim { tag: CharTag::Lig(start), .. }) = m.chars.get(&slot) {
        if ligs(&m.program_from(usize::from(*start))) {
            return true;
        }
    }
    m.ligkern.iter().any(|s| match s.action() {
        LigKernAction::Lig { char, .. } => char == slot || s.next_char == slot,
        _ => false,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Entry {
    Kern(FixWord),
    Lig(LigKernStep),
}

/// Rewrites the lig/kern program in a normalized layout with the overrides
/// applied: one contiguous program per distinct instruction sequence.
fn apply_kern_overrides(m: &mut FontMetrics, overrides: &[KernOverride]) -> Result<(), ComposeError> {
    let sequence = |m: &FontMetrics, start: u16| -> Vec<(u8, Entry)> {
        m.program_from(usize::from(start))
            .into_iter()
            .map(|(_, s)| {
                let entry = match s.action() {
                    LigKernAction::Kern { index } => Entry::Kern(m.kerns[usize::from(index)]),
                    _ => Entry::Lig(s),
                };
                (s.next_char, entry)
            })
            .collect()
    };
    let mut programs: BTreeMap<u8, Vec<(u8, Entry)>> = m
        .chars
        .iter()
        .filter_map(|(&slot, d)| match d.tag {
            CharTag::Lig(start) => Some((slot, start)),
            _ => None,
        })
        .map(|(slot, start)| (slot, sequence(m, start)))
        .collect();
    let boundary = m.boundary_program.map(|p| sequence(m, p));

    for o in overrides {
        let program = programs.entry(o.left).or_default();
        match program.iter_mut().find(|(next, _)| *next == o.right) {
            Some((_, Entry::Lig(_))) => {
                return Err(ComposeError::KernOverLigature {
                    left: o.left,
                    right: o.right,
                })
            }
            Some((_, entry)) => *entry = Entry::Kern(o.value),
            None => program.push((o.right, Entry::Kern(o.value))),
        }
    }

    let mut ligkern = Vec::new();
    let mut kerns: Vec<FixWord> = Vec::new();
    let mut starts: BTreeMap<Vec<(u8, Entry)>, u16> = BTreeMap::new();
    let mut place = |seq: &Vec<(u8, Entry)>| -> u16 {
        if let Some(&s) = starts.get(seq) {
            return s;
        }
        let start = ligkern.len() as u16;
        for (i, (next, entry)) in seq.iter().enumerate() {
            let mut step = match entry {
                Entry::Kern(v) => {
                    let index = kerns.iter().position(|k| k == v).unwrap_or_else(|| {
                        kerns.push(*v);
                        kerns.len() - 1
                    });
                    LigKernStep::kern(*next, index as u16)
                }
                Entry::Lig(s) => *s,
            };
            step.skip = if i + 1 == seq.len() { crate::metrics::STOP_FLAG } else { 0 };
            ligkern.push(step);
        }
        starts.insert(seq.clone(), start);
        start
    };
    let mut tags = BTreeMap::new();
    for (slot, seq) in &programs {
        if !seq.is_empty() {
            tags.insert(*slot, place(seq));
        }
    }
    let boundary_start = boundary.as_ref().filter(|s| !s.is_empty()).map(&mut place);
    for (slot, d) in m.chars.iter_mut() {
        if let Some(&start) = tags.get(slot) {
            d.tag = CharTag::Lig(start);
        } else if matches!(d.tag, CharTag::Lig(_)) {
            d.tag = CharTag::None;
        }
    }
    m.ligkern = ligkern;
    m.kerns = kerns;
    m.boundary_program = boundary_start;
    Ok(())
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        let key = |e: &Entry| match e {
            Entry::Kern(v) => (0u8, v.0, 0u32),
            Entry::Lig(s) => (1u8, 0, u32::from_be_bytes([s.skip, s.next_char, s.op, s.remainder])),
        };
        key(self).cmp(&key(other))
    }
}
