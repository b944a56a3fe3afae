//! Text form of a [`CompositionPlan`].
//!
//! ```text
//! design = 10
//! default = rtxmi7
//! fonts = fxlri-7letters rfxlri-7alt
//! title = nxlmi7
//! [slots]
//! O 13 = rfxlri-7alt O 141 width=0.61 dx=0.02
//! C a = fxlri-7letters C a
//! [kerns]
//! C a C b = -0.05
//! ```

use texfm_core::fixword::{parse_decimal, FixWord};
use texfm_core::vf::{CompositionPlan, KernOverride, SlotRule};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("plan line {line}: {reason}")]
pub struct PlanError {
    pub line: usize,
    pub reason: String,
}

fn slot(kind: &str, value: &str) -> Result<u8, String> {
    let parsed = match kind {
        "C" => {
            let mut chars = value.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_graphic() => Some(c as u32),
                _ => None,
            }
        }
        "O" => u32::from_str_radix(value, 8).ok(),
        "D" => value.parse().ok(),
        "H" => u32::from_str_radix(value, 16).ok(),
        _ => return Err(format!("unknown character code kind {kind:?}")),
    };
    parsed
        .and_then(|v| u8::try_from(v).ok())
        .ok_or_else(|| format!("bad character code {kind} {value}"))
}

fn real(s: &str) -> Result<FixWord, String> {
    parse_decimal(s).map_err(|e| format!("{s:?}: {e}"))
}

#[derive(PartialEq)]
enum Section {
    Header,
    Slots,
    Kerns,
}

fn slot_rule(lhs: &str, rhs: &str) -> Result<(u8, SlotRule), String> {
    let l: Vec<&str> = lhs.split_whitespace().collect();
    let [lk, lv] = l[..] else {
        return Err("slot rule needs a target code".into());
    };
    let target = slot(lk, lv)?;
    let mut r = rhs.split_whitespace();
    let (Some(font), Some(k), Some(v)) = (r.next(), r.next(), r.next()) else {
        return Err("slot rule needs `font KIND CODE`".into());
    };
    let mut rule = SlotRule {
        font: font.into(),
        slot: slot(k, v)?,
        width: None,
        dx: None,
        dy: None,
    };
    for opt in r {
        let (key, value) = opt.split_once('=').ok_or_else(|| format!("expected key=value, found {opt:?}"))?;
        let field = match key {
            "width" => &mut rule.width,
            "dx" => &mut rule.dx,
            "dy" => &mut rule.dy,
            _ => return Err(format!("unknown slot option {key:?}")),
        };
        *field = Some(real(value)?);
    }
    Ok((target, rule))
}

fn kern(lhs: &str, rhs: &str) -> Result<KernOverride, String> {
    let l: Vec<&str> = lhs.split_whitespace().collect();
    let [ak, av, bk, bv] = l[..] else {
        return Err("kern needs two character codes".into());
    };
    Ok(KernOverride {
        left: slot(ak, av)?,
        right: slot(bk, bv)?,
        value: real(rhs.trim())?,
    })
}

pub fn parse_plan(src: &str) -> Result<CompositionPlan, PlanError> {
    let mut plan = CompositionPlan::identity("", FixWord::from_int(10));
    let mut section = Section::Header;
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let err = |reason: String| PlanError { line, reason };
        let text = raw.split('#').next().unwrap_or_default().trim();
        if text.is_empty() {
            continue;
        }
        match text {
            "[slots]" => {
                section = Section::Slots;
                continue;
            }
            "[kerns]" => {
                section = Section::Kerns;
                continue;
            }
            _ => {}
        }
        let (lhs, rhs) = text.split_once('=').ok_or_else(|| err("expected `=`".into()))?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        match section {
            Section::Header => match lhs {
                "design" => plan.design = real(rhs).map_err(err)?,
                "default" => plan.default_font = rhs.into(),
                "fonts" => plan.fonts = rhs.split_whitespace().map(String::from).collect(),
                "title" => plan.title = rhs.into(),
                _ => return Err(err(format!("unknown key {lhs:?}"))),
            },
            Section::Slots => {
                let (target, rule) = slot_rule(lhs, rhs).map_err(err)?;
                if plan.slot_rules.insert(target, rule).is_some() {
                    return Err(err(format!("slot {target:#o} assigned twice")));
                }
            }
            Section::Kerns => plan.kern_overrides.push(kern(lhs, rhs).map_err(err)?),
        }
    }
    if plan.default_font.is_empty() {
        return Err(PlanError {
            line: 0,
            reason: "no default font".into(),
        });
    }
    Ok(plan)
}
