//! Lenient literal parser for LLM output.
//!
//! Accepts JSON plus the Python-literal dialect models frequently emit:
//! single-quoted strings, `None`/`True`/`False`, bare object keys and
//! trailing commas. Produces `serde_json::Value`.

use serde_json::{Map, Number, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message} at byte {position}")]
pub struct LiteralError {
    pub position: usize,
    pub message: String,
}

pub struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    pub fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    pub fn at(src: &'a str, pos: usize) -> Self {
        Parser { src, pos }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, LiteralError> {
        Err(LiteralError {
            position: self.pos,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub fn parse_value(&mut self) -> Result<Value, LiteralError> {
        self.skip_ws();
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some('{') => self.parse_object(),
            Some('[') => self.parse_array(),
            Some('"') | Some('\'') => self.parse_string().map(Value::String),
            Some(c) if c == '-' || c.is_ascii_digit() => self.parse_number(),
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                let word = self.ident();
                match word {
                    "null" | "None" => Ok(Value::Null),
                    "true" | "True" => Ok(Value::Bool(true)),
                    "false" | "False" => Ok(Value::Bool(false)),
                    _ => Err(LiteralError {
                        position: start,
                        message: format!("unexpected word `{word}`"),
                    }),
                }
            }
            Some(c) => self.err(format!("unexpected character `{c}`")),
        }
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn parse_number(&mut self) -> Result<Value, LiteralError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        if let Ok(i) = text.parse::<i64>() {
            return Ok(Value::Number(i.into()));
        }
        match text.parse::<f64>().ok().and_then(Number::from_f64) {
            Some(n) => Ok(Value::Number(n)),
            None => Err(LiteralError {
                position: start,
                message: format!("invalid number `{text}`"),
            }),
        }
    }

    fn parse_string(&mut self) -> Result<String, LiteralError> {
        let quote = self.bump().expect("caller checked quote");
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.err("unterminated string"),
                Some(c) if c == quote => return Ok(out),
                Some('\\') => {
                    let esc = match self.bump() {
                        None => return self.err("unterminated escape"),
                        Some(e) => e,
                    };
                    match esc {
                        'n' => out.push('\n'),
                        't' => out.push('\t'),
                        'r' => out.push('\r'),
                        'b' => out.push('\u{8}'),
                        'f' => out.push('\u{c}'),
                        '/' => out.push('/'),
                        'u' => {
                            let code = self.hex4()?;
                            if (0xD800..0xDC00).contains(&code) {
                                // surrogate pair
                                if self.eat('\\') && self.eat('u') {
                                    let low = self.hex4()?;
                                    let c = 0x10000 + ((code - 0xD800) << 10) + (low.wrapping_sub(0xDC00) & 0x3FF);
                                    out.push(char::from_u32(c).unwrap_or('\u{FFFD}'));
                                } else {
                                    out.push('\u{FFFD}');
                                }
                            } else {
                                out.push(char::from_u32(code).unwrap_or('\u{FFFD}'));
                            }
                        }
                        // \" \' \\ and anything else: keep the escaped char
                        other => out.push(other),
                    }
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn hex4(&mut self) -> Result<u32, LiteralError> {
        let end = self.pos + 4;
        match self.src.get(self.pos..end).and_then(|h| u32::from_str_radix(h, 16).ok()) {
            Some(v) => {
                self.pos = end;
                Ok(v)
            }
            None => self.err("invalid unicode escape"),
        }
    }

    fn parse_key(&mut self) -> Result<String, LiteralError> {
        self.skip_ws();
        match self.peek() {
            Some('"') | Some('\'') => self.parse_string(),
            Some(c) if c.is_alphabetic() || c == '_' => Ok(self.ident().to_string()),
            Some(c) => self.err(format!("expected object key, found `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }

    fn parse_object(&mut self) -> Result<Value, LiteralError> {
        self.bump();
        let mut map = Map::new();
        loop {
            self.skip_ws();
            if self.eat('}') {
                return Ok(Value::Object(map));
            }
            let key = self.parse_key()?;
            self.skip_ws();
            if !self.eat(':') {
                return self.err("expected `:` after object key");
            }
            let value = self.parse_value()?;
            map.insert(key, value);
            self.skip_ws();
            if self.eat(',') {
                continue;
            }
            if self.eat('}') {
                return Ok(Value::Object(map));
            }
            return self.err("expected `,` or `}` in object");
        }
    }

    fn parse_array(&mut self) -> Result<Value, LiteralError> {
        let (items, err) = self.parse_array_prefix();
        match err {
            None => Ok(Value::Array(items)),
            Some(e) => Err(e),
        }
    }

    /// Parses an array, returning every element completed before the first
    /// error together with that error.
    pub fn parse_array_prefix(&mut self) -> (Vec<Value>, Option<LiteralError>) {
        let mut items = Vec::new();
        self.skip_ws();
        if !self.eat('[') {
            return (items, self.err::<()>("expected `[`").err());
        }
        loop {
            self.skip_ws();
            if self.eat(']') {
                return (items, None);
            }
            match self.parse_value() {
                Ok(v) => items.push(v),
                Err(e) => return (items, Some(e)),
            }
            self.skip_ws();
            if self.eat(',') {
                continue;
            }
            if self.eat(']') {
                return (items, None);
            }
            return (items, self.err::<()>("expected `,` or `]` in array").err());
        }
    }
}

/// Parses `src` as exactly one literal (surrounding whitespace allowed).
pub fn parse(src: &str) -> Result<Value, LiteralError> {
    let mut p = Parser::new(src);
    let v = p.parse_value()?;
    p.skip_ws();
    if p.pos != src.len() {
        return p.err("trailing characters after literal");
    }
    Ok(v)
}
