//! Parser for the canonical term rendering.
//!
//! ```text
//! message := "im" "(" label "," label "," expr ")" | "event" | expr
//! expr    := "<" [ item { "," item } ] ">"
//! item    := ("enc" | "sig") "(" label "," expr ")" | label
//! label   := [A-Za-z0-9_]+ [ "^-1" ]
//! ```
//!
//! Labels must resolve in the supplied [`AtomTable`]. Whitespace between
//! tokens is ignored, so the parser accepts everything `Display` produces.

use thiserror::Error;

use crate::message::{InitMessage, Message};
use crate::term::{AtomTable, Encryptor, Expression, Item, TermError};

const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("offset {offset}: expected {expected}")]
    Expected { offset: usize, expected: &'static str },
    #[error("offset {offset}: {source}")]
    Term { offset: usize, source: TermError },
    #[error("offset {offset}: terms nested deeper than {MAX_DEPTH}")]
    TooDeep { offset: usize },
    #[error("offset {offset}: trailing input")]
    Trailing { offset: usize },
}

pub fn parse_expression(input: &str, atoms: &AtomTable) -> Result<Expression, ParseError> {
    let mut p = Parser { src: input.as_bytes(), pos: 0, atoms, depth: 0 };
    let e = p.expression()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_item(input: &str, atoms: &AtomTable) -> Result<Item, ParseError> {
    let mut p = Parser { src: input.as_bytes(), pos: 0, atoms, depth: 0 };
    let i = p.item()?;
    p.finish()?;
    Ok(i)
}

pub fn parse_message(input: &str, atoms: &AtomTable) -> Result<Message, ParseError> {
    let mut p = Parser { src: input.as_bytes(), pos: 0, atoms, depth: 0 };
    let m = p.message()?;
    p.finish()?;
    Ok(m)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: &'a AtomTable,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8, expected: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::Expected { offset: self.pos, expected })
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(ParseError::Trailing { offset: self.pos }),
        }
    }

    fn word(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(ParseError::Expected { offset: start, expected: "label" });
        }
        if self.src[self.pos..].starts_with(b"^-1") {
            self.pos += 3;
        }
        // only ASCII was consumed
        let src: &'a [u8] = self.src;
        let text = std::str::from_utf8(&src[start..self.pos]).unwrap_or_default();
        Ok((start, text))
    }

    fn encryptor(&mut self) -> Result<Encryptor, ParseError> {
        let (offset, label) = self.word()?;
        let atom = self.atoms.lookup(label).map_err(|source| ParseError::Term { offset, source })?;
        Encryptor::new(atom.clone()).map_err(|source| ParseError::Term { offset, source })
    }

    fn message(&mut self) -> Result<Message, ParseError> {
        if self.peek() == Some(b'<') {
            return self.expression().map(Message::Expr);
        }
        let save = self.pos;
        let (_, word) = self.word()?;
        match word {
            "event" => Ok(Message::Event),
            "im" => {
                self.eat(b'(', "'('")?;
                let (offset, ung) = self.word()?;
                let ung = self.lookup(offset, ung)?;
                self.eat(b',', "','")?;
                let (key_offset, key) = self.word()?;
                let key = self.lookup(key_offset, key)?;
                self.eat(b',', "','")?;
                let msg = self.expression()?;
                self.eat(b')', "')'")?;
                InitMessage::new(ung, key, msg)
                    .map(Message::Init)
                    .ok_or(ParseError::Expected { offset, expected: "secret and key in im(..)" })
            }
            _ => Err(ParseError::Expected { offset: save, expected: "message" }),
        }
    }

    fn lookup(&self, offset: usize, label: &str) -> Result<crate::term::Atom, ParseError> {
        self.atoms.lookup(label).cloned().map_err(|source| ParseError::Term { offset, source })
    }

    fn expression(&mut self) -> Result<Expression, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep { offset: self.pos });
        }
        self.eat(b'<', "'<'")?;
        let mut items = Vec::new();
        if self.peek() != Some(b'>') {
            loop {
                items.push(self.item()?);
                if self.peek() == Some(b',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.eat(b'>', "'>' or ','")?;
        self.depth -= 1;
        Ok(Expression::new(items))
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        let (offset, word) = self.word()?;
        let is_call = matches!(word, "enc" | "sig") && self.peek() == Some(b'(');
        if !is_call {
            return self.lookup(offset, word).map(Item::Atom);
        }
        let signature = word == "sig";
        self.eat(b'(', "'('")?;
        let k = self.encryptor()?;
        self.eat(b',', "','")?;
        let payload = self.expression()?;
        self.eat(b')', "')'")?;
        Ok(if signature { Item::Sig(k, payload) } else { Item::Enc(k, payload) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> AtomTable {
        let mut t = AtomTable::new();
        t.add_key_pair("CKey").unwrap();
        t.add_symmetric_key("genKey").unwrap();
        t.add_secret("N").unwrap();
        t.add_secret("secretD").unwrap();
        t.add_data("C").unwrap();
        t
    }

    #[test]
    fn parses_rendered_terms() {
        let t = table();
        for text in
            ["<>", "<enc(genKey, <secretD>)>", "<C, CKey, sig(CKey^-1, <C, CKey>)>", "<enc(CKey, <sig(CKey^-1, <>)>)>"]
        {
            assert_eq!(parse_expression(text, &t).unwrap().to_string(), text);
        }
        let m = parse_message("im(N, CKey, <sig(CKey^-1, <C, CKey>)>)", &t).unwrap();
        assert_eq!(m.to_string(), "im(N, CKey, <sig(CKey^-1, <C, CKey>)>)");
        assert_eq!(parse_message(" event ", &t).unwrap(), Message::Event);
    }

    #[test]
    fn rejects_bad_input() {
        let t = table();
        assert!(matches!(parse_expression("<X>", &t), Err(ParseError::Term { .. })));
        assert!(matches!(parse_expression("<C", &t), Err(ParseError::Expected { .. })));
        assert!(matches!(parse_expression("<C> x", &t), Err(ParseError::Trailing { .. })));
        assert!(matches!(parse_expression("<enc(C, <>)>", &t), Err(ParseError::Term { .. })));
        assert!(matches!(parse_message("im(CKey, N, <>)", &t), Err(ParseError::Expected { .. })));
        let deep = "<enc(genKey, ".repeat(100);
        assert!(matches!(parse_expression(&deep, &t), Err(ParseError::TooDeep { .. })));
    }
}
