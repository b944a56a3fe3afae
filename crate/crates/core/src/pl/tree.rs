//! Generic property-list syntax: `(NAME args... (CHILD ...) ...)`.

use alloc::string::String;
use alloc::vec::Vec;

use super::PlError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Token {
    pub text: String,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Node {
    pub name: String,
    pub line: usize,
    pub col: usize,
    /// Whitespace-separated words ahead of the first child.
    pub args: Vec<Token>,
    /// The same region as `args` as raw text, trimmed. For `COMMENT` this is
    /// everything up to the matching close paren.
    pub raw: String,
    pub children: Vec<Node>,
}

struct Cursor<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
}

impl Cursor<'_> {
    fn col(&self) -> usize {
        self.pos - self.line_start + 1
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) {
        if self.src[self.pos] == b'\n' {
            self.line += 1;
            self.line_start = self.pos + 1;
        }
        self.pos += 1;
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn error(&self, expected: &str) -> PlError {
        PlError::SyntaxError {
            line: self.line,
            col: self.col(),
            expected: expected.into(),
        }
    }

    fn word(&mut self) -> &str {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if !b.is_ascii_whitespace() && b != b'(' && b != b')') {
            self.bump();
        }
        &self.text[start..self.pos]
    }

    fn node(&mut self, depth: usize) -> Result<Node, PlError> {
        if depth > 64 {
            return Err(self.error("shallower nesting"));
        }
        // At '('.
        self.bump();
        let (line, col) = (self.line, self.col());
        let name = self.word();
        if name.is_empty() {
            return Err(self.error("property name"));
        }
        let name = String::from(name);
        let mut node = Node {
            name,
            line,
            col,
            args: Vec::new(),
            raw: String::new(),
            children: Vec::new(),
        };
        if node.name == "COMMENT" {
            let start = self.pos;
            let mut level = 0usize;
            loop {
                match self.peek() {
                    None => return Err(self.error(")")),
                    Some(b'(') => level += 1,
                    Some(b')') if level == 0 => break,
                    Some(b')') => level -= 1,
                    _ => {}
                }
                self.bump();
            }
            node.raw = String::from(self.text[start..self.pos].trim());
            self.bump();
            return Ok(node);
        }
        let args_start = self.pos;
        let mut args_end = None;
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.error(")")),
                Some(b')') => {
                    args_end.get_or_insert(self.pos);
                    self.bump();
                    break;
                }
                Some(b'(') => {
                    args_end.get_or_insert(self.pos);
                    let child = self.node(depth + 1)?;
                    node.children.push(child);
                }
                Some(_) => {
                    if args_end.is_some() {
                        return Err(self.error("( or ) after a property list"));
                    }
                    let (line, col) = (self.line, self.col());
                    let text = String::from(self.word());
                    node.args.push(Token { text, line, col });
                }
            }
        }
        node.raw = String::from(self.text[args_start..args_end.unwrap_or(args_start)].trim());
        Ok(node)
    }
}

/// Splits a property list into its top-level nodes.
pub(crate) fn parse_tree(src: &str) -> Result<Vec<Node>, PlError> {
    let mut c = Cursor {
        src: src.as_bytes(),
        text: src,
        pos: 0,
        line: 1,
        line_start: 0,
    };
    let mut nodes = Vec::new();
    loop {
        c.skip_ws();
        match c.peek() {
            None => return Ok(nodes),
            Some(b'(') => nodes.push(c.node(0)?),
            Some(_) => return Err(c.error("(")),
        }
    }
}
