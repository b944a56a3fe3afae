//! Optical-size derivation (EW, EW²) and unslanting, on metrics and outlines.
//!
//! EW widens a font for use at a smaller size: vertical stems grow by
//! `vstem_scale`, everything else horizontal by `width_scale`. At the metric
//! level stems are invisible, so widths scale uniformly by `width_scale` and
//! the optional side-bearing deltas are added on top.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::fixword::FixWord;
use crate::metrics::{FontMetrics, EXTRASPACE, QUAD, SHRINK, SLANT, SPACE, STRETCH};
use crate::tfm::compute_checksum;
use crate::type1::{Glyph, Point, Stem};

/// An exact ratio `num / den` with `den > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    num: i64,
    den: i64,
}

impl Ratio {
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    pub fn new(num: i64, den: i64) -> Option<Ratio> {
        if den == 0 {
            return None;
        }
        let (num, den) = if den < 0 { (num.checked_neg()?, den.checked_neg()?) } else { (num, den) };
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        Some(Ratio { num: num / g, den: den / g })
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("expected a decimal like 1.08 or a fraction like 27/25")]
pub struct RatioParseError;

impl FromStr for Ratio {
    type Err = RatioParseError;

    /// Accepts `1.08`, `-0.5`, `3` and `27/25`.
    fn from_str(s: &str) -> Result<Ratio, RatioParseError> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| RatioParseError)?;
            let d = d.trim().parse().map_err(|_| RatioParseError)?;
            return Ratio::new(n, d).ok_or(RatioParseError);
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || frac.len() > 12
        {
            return Err(RatioParseError);
        }
        let den = 10i64.pow(frac.len() as u32);
        let digits = [int, frac].concat();
        let mut num: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| RatioParseError)? };
        if neg {
            num = -num;
        }
        Ratio::new(num, den).ok_or(RatioParseError)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OpticalError {
    #[error("{what} {value} is outside {range}")]
    InvalidParams {
        what: &'static str,
        value: Ratio,
        range: &'static str,
    },
}

/// Parameters of one EW application. Deltas are in thousandths of an em.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpticalParams {
    pub vstem_scale: Ratio,
    pub width_scale: Ratio,
    pub lsb_delta: i32,
    pub rsb_delta: i32,
    /// Scale kern amounts by `width_scale`.
    pub scale_kerns: bool,
}

impl Default for OpticalParams {
    fn default() -> Self {
        OpticalParams::ew()
    }
}

impl OpticalParams {
    /// Stems 108%, counters and widths 107%, no side-bearing change.
    pub fn ew() -> OpticalParams {
        OpticalParams {
            vstem_scale: Ratio { num: 27, den: 25 },
            width_scale: Ratio { num: 107, den: 100 },
            lsb_delta: 0,
            rsb_delta: 0,
            scale_kerns: true,
        }
    }

    /// EW plus the side bearings measured on a 7pt design: 30 on the left,
    /// 20 on the right.
    pub fn observed7pt() -> OpticalParams {
        OpticalParams {
            lsb_delta: 30,
            rsb_delta: 20,
            ..OpticalParams::ew()
        }
    }

    pub fn identity() -> OpticalParams {
        OpticalParams {
            vstem_scale: Ratio::ONE,
            width_scale: Ratio::ONE,
            lsb_delta: 0,
            rsb_delta: 0,
            scale_kerns: true,
        }
    }

    pub fn validate(&self) -> Result<(), OpticalError> {
        for (what, r) in [("vstem_scale", self.vstem_scale), ("width_scale", self.width_scale)] {
            // 1/2 < num/den < 2 with den > 0.
            if !(2 * r.num > r.den && r.num < 2 * r.den) {
                return Err(OpticalError::InvalidParams {
                    what,
                    value: r,
                    range: "(0.5, 2.0)",
                });
            }
        }
        for (what, d) in [("lsb_delta", self.lsb_delta), ("rsb_delta", self.rsb_delta)] {
            if !(-200..=200).contains(&d) {
                return Err(OpticalError::InvalidParams {
                    what,
                    value: Ratio { num: d.into(), den: 1 },
                    range: "[-200, 200]",
                });
            }
        }
        Ok(())
    }
}

/// `n / d` rounded to the nearest integer, ties to even. `d > 0`.
fn round_half_even(n: i128, d: i128) -> i128 {
    let q = n.div_euclid(d);
    let r = n.rem_euclid(d);
    match (2 * r).cmp(&d) {
        core::cmp::Ordering::Less => q,
        core::cmp::Ordering::Greater => q + 1,
        core::cmp::Ordering::Equal => q + (q & 1),
    }
}

fn saturate(v: i128) -> FixWord {
    FixWord(v.clamp(i32::MIN.into(), i32::MAX.into()) as i32)
}

fn scale(x: FixWord, r: Ratio) -> FixWord {
    saturate(round_half_even(i128::from(x.0) * i128::from(r.num), r.den.into()))
}

/// `width_scale * w + (lsb + rsb) / 1000`, rounded once. Zero widths stay zero.
pub fn ew_width(w: FixWord, p: &OpticalParams) -> FixWord {
    if w.0 == 0 {
        return w;
    }
    let r = p.width_scale;
    let delta = i128::from(p.lsb_delta) + i128::from(p.rsb_delta);
    let n = i128::from(w.0) * i128::from(r.num) * 1000 + delta * (1 << 20) * i128::from(r.den);
    saturate(round_half_even(n, i128::from(r.den) * 1000))
}

/// One EW application to a font's metrics.
///
/// Widths follow [`ew_width`]. Italic corrections, kerns (when
/// `scale_kerns`), and the space, stretch, shrink, quad and extra-space
/// parameters scale by `width_scale`. Heights, depths, slant, x-height and
/// any further parameters are untouched. The checksum is recomputed.
pub fn ew_metrics(m: &FontMetrics, p: &OpticalParams) -> FontMetrics {
    let mut out = m.clone();
    for d in out.chars.values_mut() {
        d.width = ew_width(d.width, p);
        d.italic = scale(d.italic, p.width_scale);
    }
    if p.scale_kerns {
        for k in &mut out.kerns {
            *k = scale(*k, p.width_scale);
        }
    }
    for n in [SPACE, STRETCH, SHRINK, QUAD, EXTRASPACE] {
        if let Some(v) = out.params.get_mut(n - 1) {
            *v = scale(*v, p.width_scale);
        }
    }
    out.checksum = compute_checksum(&out);
    out
}

/// Two EW applications, quantized after each.
pub fn ew_squared(m: &FontMetrics, p: &OpticalParams) -> FontMetrics {
    ew_metrics(&ew_metrics(m, p), p)
}

/// Sets the slant parameter to zero and recomputes the checksum.
pub fn unslant(m: &FontMetrics) -> FontMetrics {
    let mut out = m.clone();
    if let Some(s) = out.params.get_mut(SLANT - 1) {
        *s = FixWord::ZERO;
    }
    out.checksum = compute_checksum(&out);
    out
}

/// The piecewise-linear x-remap used by [`ew_outline`].
#[derive(Clone, Debug, PartialEq)]
pub struct XRemap {
    /// Merged stem zones as `(start, end)`, sorted and disjoint.
    zones: Vec<(f64, f64)>,
    vs: f64,
    ws: f64,
}

impl XRemap {
    pub fn new(vstems: &[Stem], vstem_scale: f64, width_scale: f64) -> XRemap {
        let mut spans: Vec<(f64, f64)> = vstems.iter().map(|s| (s.start, s.end())).collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut zones: Vec<(f64, f64)> = Vec::new();
        for (a, b) in spans {
            match zones.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => zones.push((a, b)),
            }
        }
        XRemap {
            zones,
            vs: vstem_scale,
            ws: width_scale,
        }
    }

    pub fn zones(&self) -> &[(f64, f64)] {
        &self.zones
    }

    /// Walks left to right from the origin: gaps grow by `width_scale`,
    /// zones by `vstem_scale`.
    pub fn apply(&self, x: f64) -> f64 {
        let mut src = 0.0;
        let mut dst = 0.0;
        let mut first = true;
        for &(a, b) in &self.zones {
            if first {
                // Everything left of the first zone, including negative x,
                // scales about the origin.
                first = false;
                if x <= a {
                    return x * self.ws;
                }
                src = a;
                dst = a * self.ws;
            } else {
                if x <= a {
                    return dst + (x - src) * self.ws;
                }
                dst += (a - src) * self.ws;
                src = a;
            }
            if x <= b {
                return dst + (x - src) * self.vs;
            }
            dst += (b - src) * self.vs;
            src = b;
        }
        if first {
            x * self.ws
        } else {
            dst + (x - src) * self.ws
        }
    }
}

/// EW on an outline. With no vertical stems every x scales by
/// `width_scale`. Side-bearing deltas move the contours right by
/// `lsb_delta` and widen the advance by `lsb_delta + rsb_delta`, both in
/// thousandths of `units_per_em`.
pub fn ew_outline(g: &Glyph, p: &OpticalParams, units_per_em: f64) -> Result<Glyph, OpticalError> {
    p.validate()?;
    let remap = XRemap::new(&g.vstems, p.vstem_scale.to_f64(), p.width_scale.to_f64());
    let shift = f64::from(p.lsb_delta) * units_per_em / 1000.0;
    let widen = f64::from(p.lsb_delta + p.rsb_delta) * units_per_em / 1000.0;
    let f = |pt: Point| Point::new(remap.apply(pt.x) + shift, pt.y);
    let mut out = Glyph {
        name: g.name.clone(),
        sidebearing_x: remap.apply(g.sidebearing_x) + shift,
        advance: remap.apply(g.advance) + widen,
        contours: g.contours.iter().map(|c| c.map(f)).collect(),
        hstems: g.hstems.clone(),
        vstems: g
            .vstems
            .iter()
            .map(|s| {
                let start = remap.apply(s.start) + shift;
                Stem {
                    start,
                    extent: remap.apply(s.end()) + shift - start,
                    ..*s
                }
            })
            .collect(),
        negative_overshoot: false,
    };
    out.update_overshoot();
    Ok(out)
}

/// Shears every point by `x' = x - slant * y`. The sidebearing follows the
/// leftmost point and the right side bearing is kept, so the advance follows
/// the rightmost point. Stems are carried over unchanged.
pub fn unslant_outline(g: &Glyph, slant: f64) -> Glyph {
    let f = |pt: Point| Point::new(pt.x - slant * pt.y, pt.y);
    let mut out = Glyph {
        contours: g.contours.iter().map(|c| c.map(f)).collect(),
        ..g.clone()
    };
    if let (Some(min0), Some(max0), Some(min1), Some(max1)) = (g.min_x(), g.max_x(), out.min_x(), out.max_x()) {
        out.sidebearing_x = g.sidebearing_x + (min1 - min0);
        out.advance = g.advance + (max1 - max0);
    }
    out.update_overshoot();
    out
}
