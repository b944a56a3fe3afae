//! Type 1 charstring decoding and interpretation.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::std_encoding::standard_glyph;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    fn offset(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Segment {
    Line(Point),
    Curve(Point, Point, Point),
}

impl Segment {
    pub fn end(&self) -> Point {
        match self {
            Segment::Line(p) | Segment::Curve(_, _, p) => *p,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        let pts = match self {
            Segment::Line(p) => [None, None, Some(*p)],
            Segment::Curve(a, b, c) => [Some(*a), Some(*b), Some(*c)],
        };
        pts.into_iter().flatten()
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Segment {
        match self {
            Segment::Line(p) => Segment::Line(f(*p)),
            Segment::Curve(a, b, c) => Segment::Curve(f(*a), f(*b), f(*c)),
        }
    }
}

/// A closed path. The last segment always ends at `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    pub start: Point,
    pub segments: Vec<Segment>,
}

impl Contour {
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        core::iter::once(self.start).chain(self.segments.iter().flat_map(|s| s.points()))
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Contour {
        Contour {
            start: f(self.start),
            segments: self.segments.iter().map(|s| s.map(&f)).collect(),
        }
    }
}

/// A stem hint with positive extent. `edge` marks a hint that was declared
/// with a negative width; `replacement` marks one that arrived through hint
/// replacement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stem {
    pub start: f64,
    pub extent: f64,
    pub edge: bool,
    pub replacement: bool,
}

impl Stem {
    pub fn end(&self) -> f64 {
        self.start + self.extent
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Glyph {
    pub name: String,
    pub sidebearing_x: f64,
    pub advance: f64,
    pub contours: Vec<Contour>,
    pub hstems: Vec<Stem>,
    pub vstems: Vec<Stem>,
    /// Some contour point lies left of the sidebearing.
    pub negative_overshoot: bool,
}

impl Glyph {
    pub fn min_x(&self) -> Option<f64> {
        self.contours.iter().flat_map(|c| c.points()).map(|p| p.x).reduce(f64::min)
    }

    pub fn max_x(&self) -> Option<f64> {
        self.contours.iter().flat_map(|c| c.points()).map(|p| p.x).reduce(f64::max)
    }

    pub(crate) fn update_overshoot(&mut self) {
        self.negative_overshoot = self.min_x().is_some_and(|x| x < self.sidebearing_x);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Plain(u8),
    Escape(u8),
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Plain(c) => write!(f, "{c}"),
            Op::Escape(c) => write!(f, "12 {c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CharstringError {
    #[error("unsupported operator {0}")]
    UnsupportedOp(Op),
    #[error("operator {0} needs more operands")]
    StackUnderflow(Op),
    #[error("operand stack overflow")]
    StackOverflow,
    #[error("subroutine {0} does not exist")]
    MissingSubr(i64),
    #[error("seac component {0} has no charstring")]
    MissingGlyph(String),
    #[error("seac code {0} is not in StandardEncoding")]
    NotInStandardEncoding(i64),
    #[error("seac inside a seac component")]
    NestedSeac,
    #[error("subroutines nested too deeply")]
    RecursionLimit,
    #[error("charstring executes too many operators")]
    BudgetExceeded,
    #[error("offset {0}: number runs past the end of the charstring")]
    TruncatedNumber(usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("flex sequence needs 7 points, found {0}")]
    MalformedFlex(usize),
    #[error("charstring ends without endchar")]
    MissingEndchar,
}

/// Appends the Type 1 encoding of `n`.
pub fn encode_number(n: i32, out: &mut Vec<u8>) {
    match n {
        -107..=107 => out.push((n + 139) as u8),
        108..=1131 => {
            let u = n - 108;
            out.push(247 + (u >> 8) as u8);
            out.push(u as u8);
        }
        -1131..=-108 => {
            let u = -n - 108;
            out.push(251 + (u >> 8) as u8);
            out.push(u as u8);
        }
        _ => {
            out.push(255);
            out.extend_from_slice(&n.to_be_bytes());
        }
    }
}

/// Decodes the number starting at `bytes[0]`, returning it and its length.
/// `None` when the first byte is an operator or the number is truncated.
pub fn decode_number(bytes: &[u8]) -> Option<(i32, usize)> {
    let b0 = *bytes.first()?;
    match b0 {
        32..=246 => Some((i32::from(b0) - 139, 1)),
        247..=250 => Some(((i32::from(b0) - 247) * 256 + i32::from(*bytes.get(1)?) + 108, 2)),
        251..=254 => Some((-(i32::from(b0) - 251) * 256 - i32::from(*bytes.get(1)?) - 108, 2)),
        255 => {
            let b: [u8; 4] = bytes.get(1..5)?.try_into().ok()?;
            Some((i32::from_be_bytes(b), 5))
        }
        _ => None,
    }
}

/// Source of component charstrings for `seac`.
pub trait GlyphLookup {
    fn charstring(&self, name: &str) -> Option<&[u8]>;
}

impl GlyphLookup for BTreeMap<String, Vec<u8>> {
    fn charstring(&self, name: &str) -> Option<&[u8]> {
        self.get(name).map(Vec::as_slice)
    }
}

/// A lookup with no glyphs; `seac` then fails with `MissingGlyph`.
pub struct NoGlyphs;

impl GlyphLookup for NoGlyphs {
    fn charstring(&self, _: &str) -> Option<&[u8]> {
        None
    }
}

const MAX_STACK: usize = 48;
const MAX_DEPTH: usize = 10;
const MAX_OPS: usize = 1 << 20;

enum Flow {
    Continue,
    Return,
    End,
}

struct Seac {
    asb: f64,
    adx: f64,
    ady: f64,
    base: u8,
    accent: u8,
}

struct Interp<'a> {
    subrs: &'a [Vec<u8>],
    stack: Vec<f64>,
    ps: Vec<f64>,
    cur: Point,
    sb: Point,
    glyph: Glyph,
    open: Option<Contour>,
    flex: Option<Vec<Point>>,
    replacing: bool,
    ops: usize,
    seac: Option<Seac>,
}

impl<'a> Interp<'a> {
    fn new(name: &str, subrs: &'a [Vec<u8>]) -> Interp<'a> {
        Interp {
            subrs,
            stack: Vec::new(),
            ps: Vec::new(),
            cur: Point::default(),
            sb: Point::default(),
            glyph: Glyph {
                name: name.to_string(),
                ..Glyph::default()
            },
            open: None,
            flex: None,
            replacing: false,
            ops: 0,
            seac: None,
        }
    }

    fn args<const N: usize>(&mut self, op: Op) -> Result<[f64; N], CharstringError> {
        if self.stack.len() < N {
            return Err(CharstringError::StackUnderflow(op));
        }
        let mut out = [0.0; N];
        out.copy_from_slice(&self.stack[self.stack.len() - N..]);
        self.stack.clear();
        Ok(out)
    }

    fn pop(&mut self, op: Op) -> Result<f64, CharstringError> {
        self.stack.pop().ok_or(CharstringError::StackUnderflow(op))
    }

    fn close(&mut self) {
        if let Some(mut c) = self.open.take() {
            if c.segments.is_empty() {
                return;
            }
            if c.segments.last().map(Segment::end) != Some(c.start) {
                c.segments.push(Segment::Line(c.start));
            }
            self.glyph.contours.push(c);
        }
    }

    fn move_by(&mut self, dx: f64, dy: f64) {
        self.cur = self.cur.offset(dx, dy);
        if let Some(points) = &mut self.flex {
            points.push(self.cur);
            return;
        }
        self.close();
        self.open = Some(Contour {
            start: self.cur,
            segments: Vec::new(),
        });
    }

    fn segment(&mut self, s: Segment) {
        let start = self.cur;
        self.cur = s.end();
        self.open
            .get_or_insert_with(|| Contour {
                start,
                segments: Vec::new(),
            })
            .segments
            .push(s);
    }

    fn line_by(&mut self, dx: f64, dy: f64) {
        let p = self.cur.offset(dx, dy);
        self.segment(Segment::Line(p));
    }

    fn curve_by(&mut self, d: [f64; 6]) {
        let a = self.cur.offset(d[0], d[1]);
        let b = a.offset(d[2], d[3]);
        let c = b.offset(d[4], d[5]);
        self.segment(Segment::Curve(a, b, c));
    }

    fn stem(&mut self, horizontal: bool, pos: f64, width: f64) {
        let base = if horizontal { self.sb.y } else { self.sb.x };
        let (start, extent, edge) = if width < 0.0 {
            (base + pos + width, -width, true)
        } else {
            (base + pos, width, false)
        };
        if extent == 0.0 {
            return;
        }
        let s = Stem {
            start,
            extent,
            edge,
            replacement: self.replacing,
        };
        if horizontal {
            self.glyph.hstems.push(s);
        } else {
            self.glyph.vstems.push(s);
        }
    }

    fn other_subr(&mut self, op: Op) -> Result<(), CharstringError> {
        let index = self.pop(op)?;
        let n = self.pop(op)?;
        if n < 0.0 || n as usize > self.stack.len() {
            return Err(CharstringError::StackUnderflow(op));
        }
        let args = self.stack.split_off(self.stack.len() - n as usize);
        match index as i64 {
            0 => {
                let points = self.flex.take().unwrap_or_default();
                if points.len() != 7 {
                    return Err(CharstringError::MalformedFlex(points.len()));
                }
                // The current point already sits on the flex end point.
                self.cur = points[0];
                self.segment(Segment::Curve(points[1], points[2], points[3]));
                self.segment(Segment::Curve(points[4], points[5], points[6]));
                self.ps.push(self.cur.y);
                self.ps.push(self.cur.x);
            }
            1 => {
                // The reference point is a move, so an open contour must
                // exist before the flex begins.
                let start = self.cur;
                self.open.get_or_insert_with(|| Contour {
                    start,
                    segments: Vec::new(),
                });
                self.flex = Some(Vec::new());
            }
            2 => {}
            3 => {
                self.replacing = true;
                self.ps.push(*args.first().ok_or(CharstringError::StackUnderflow(op))?);
            }
            _ => self.ps.extend(args.iter().rev()),
        }
        Ok(())
    }

    fn run(&mut self, program: &[u8], depth: usize) -> Result<Flow, CharstringError> {
        if depth > MAX_DEPTH {
            return Err(CharstringError::RecursionLimit);
        }
        let mut pos = 0;
        while pos < program.len() {
            self.ops += 1;
            if self.ops > MAX_OPS {
                return Err(CharstringError::BudgetExceeded);
            }
            let b0 = program[pos];
            if b0 >= 32 {
                let (v, len) = decode_number(&program[pos..]).ok_or(CharstringError::TruncatedNumber(pos))?;
                if self.stack.len() == MAX_STACK {
                    return Err(CharstringError::StackOverflow);
                }
                self.stack.push(f64::from(v));
                pos += len;
                continue;
            }
            let op = if b0 == 12 {
                let code = *program.get(pos + 1).ok_or(CharstringError::UnsupportedOp(Op::Plain(12)))?;
                pos += 2;
                Op::Escape(code)
            } else {
                pos += 1;
                Op::Plain(b0)
            };
            match self.step(op, depth)? {
                Flow::Continue => {}
                flow => return Ok(flow),
            }
        }
        if depth == 0 {
            Err(CharstringError::MissingEndchar)
        } else {
            Ok(Flow::Return)
        }
    }

    fn step(&mut self, op: Op, depth: usize) -> Result<Flow, CharstringError> {
        match op {
            Op::Plain(1) => {
                let [y, dy] = self.args(op)?;
                self.stem(true, y, dy);
            }
            Op::Plain(3) => {
                let [x, dx] = self.args(op)?;
                self.stem(false, x, dx);
            }
            Op::Plain(4) => {
                let [dy] = self.args(op)?;
                self.move_by(0.0, dy);
            }
            Op::Plain(5) => {
                let [dx, dy] = self.args(op)?;
                self.line_by(dx, dy);
            }
            Op::Plain(6) => {
                let [dx] = self.args(op)?;
                self.line_by(dx, 0.0);
            }
            Op::Plain(7) => {
                let [dy] = self.args(op)?;
                self.line_by(0.0, dy);
            }
            Op::Plain(8) => {
                let d = self.args::<6>(op)?;
                self.curve_by(d);
            }
            Op::Plain(9) => {
                self.stack.clear();
                self.close();
            }
            Op::Plain(10) => {
                let index = self.pop(op)?;
                let i = index as i64;
                let subrs = self.subrs;
                let subr = usize::try_from(i)
                    .ok()
                    .and_then(|i| subrs.get(i))
                    .ok_or(CharstringError::MissingSubr(i))?;
                if let Flow::End = self.run(subr, depth + 1)? {
                    return Ok(Flow::End);
                }
            }
            Op::Plain(11) => return Ok(Flow::Return),
            Op::Plain(13) => {
                let [sbx, wx] = self.args(op)?;
                self.sb = Point::new(sbx, 0.0);
                self.cur = self.sb;
                self.glyph.sidebearing_x = sbx;
                self.glyph.advance = wx;
            }
            Op::Plain(14) => {
                self.stack.clear();
                self.close();
                return Ok(Flow::End);
            }
            Op::Plain(21) => {
                let [dx, dy] = self.args(op)?;
                self.move_by(dx, dy);
            }
            Op::Plain(22) => {
                let [dx] = self.args(op)?;
                self.move_by(dx, 0.0);
            }
            Op::Plain(30) => {
                let [dy1, dx2, dy2, dx3] = self.args(op)?;
                self.curve_by([0.0, dy1, dx2, dy2, dx3, 0.0]);
            }
            Op::Plain(31) => {
                let [dx1, dx2, dy2, dy3] = self.args(op)?;
                self.curve_by([dx1, 0.0, dx2, dy2, 0.0, dy3]);
            }
            Op::Escape(0) => self.stack.clear(),
            Op::Escape(1) | Op::Escape(2) => {
                let v = self.args::<6>(op)?;
                for pair in v.chunks(2) {
                    self.stem(op == Op::Escape(2), pair[0], pair[1]);
                }
            }
            Op::Escape(6) => {
                let [asb, adx, ady, bchar, achar] = self.args(op)?;
                let code = |v: f64| u8::try_from(v as i64).map_err(|_| CharstringError::NotInStandardEncoding(v as i64));
                self.close();
                self.seac = Some(Seac {
                    asb,
                    adx,
                    ady,
                    base: code(bchar)?,
                    accent: code(achar)?,
                });
                return Ok(Flow::End);
            }
            Op::Escape(7) => {
                let [sbx, sby, wx, _wy] = self.args(op)?;
                self.sb = Point::new(sbx, sby);
                self.cur = self.sb;
                self.glyph.sidebearing_x = sbx;
                self.glyph.advance = wx;
            }
            Op::Escape(12) => {
                let b = self.pop(op)?;
                let a = self.pop(op)?;
                if b == 0.0 {
                    return Err(CharstringError::DivisionByZero);
                }
                self.stack.push(a / b);
            }
            Op::Escape(16) => self.other_subr(op)?,
            Op::Escape(17) => {
                let v = self.ps.pop().ok_or(CharstringError::StackUnderflow(op))?;
                if self.stack.len() == MAX_STACK {
                    return Err(CharstringError::StackOverflow);
                }
                self.stack.push(v);
            }
            Op::Escape(33) => {
                let [x, y] = self.args(op)?;
                self.cur = Point::new(x, y);
            }
            _ => return Err(CharstringError::UnsupportedOp(op)),
        }
        Ok(Flow::Continue)
    }
}

fn interpret_one(name: &str, program: &[u8], subrs: &[Vec<u8>]) -> Result<(Glyph, Option<Seac>), CharstringError> {
    let mut it = Interp::new(name, subrs);
    it.run(program, 0)?;
    Ok((it.glyph, it.seac))
}

fn component(code: u8, subrs: &[Vec<u8>], glyphs: &dyn GlyphLookup) -> Result<Glyph, CharstringError> {
    let name = standard_glyph(code).ok_or(CharstringError::NotInStandardEncoding(code.into()))?;
    let program = glyphs
        .charstring(name)
        .ok_or_else(|| CharstringError::MissingGlyph(name.to_string()))?;
    match interpret_one(name, program, subrs)? {
        (g, None) => Ok(g),
        (_, Some(_)) => Err(CharstringError::NestedSeac),
    }
}

/// Runs a decrypted charstring (with its `lenIV` bytes already removed).
///
/// Coordinates are absolute font units. A `seac` glyph takes its advance and
/// sidebearing from its own `hsbw`; its contours and stems are the base
/// glyph's followed by the accent's, the accent moved by `(adx - asb, ady)`.
pub fn interpret_charstring(
    name: &str,
    program: &[u8],
    subrs: &[Vec<u8>],
    glyphs: &dyn GlyphLookup,
) -> Result<Glyph, CharstringError> {
    let (mut g, seac) = interpret_one(name, program, subrs)?;
    if let Some(s) = seac {
        let base = component(s.base, subrs, glyphs)?;
        let accent = component(s.accent, subrs, glyphs)?;
        let (dx, dy) = (s.adx - s.asb, s.ady);
        g.contours.extend(base.contours);
        g.contours
            .extend(accent.contours.iter().map(|c| c.map(|p| p.offset(dx, dy))));
        g.hstems.extend(base.hstems);
        g.vstems.extend(base.vstems);
        g.hstems.extend(accent.hstems.iter().map(|s| Stem { start: s.start + dy, ..*s }));
        g.vstems.extend(accent.vstems.iter().map(|s| Stem { start: s.start + dx, ..*s }));
    }
    g.update_overshoot();
    Ok(g)
}
