use crate::error::{Location, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    /// An atom; `quoted` atoms never act as operators.
    Name {
        text: String,
        quoted: bool,
    },
    Var(String),
    Int(i64),
    /// One of `( ) [ ] { } , |`.
    Punct(char),
    /// The clause terminator: `.` followed by layout or end of input.
    End,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub location: Location,
    /// Whitespace or a comment precedes this token.
    pub layout_before: bool,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

pub fn is_symbol_char(c: char) -> bool {
    SYMBOL_CHARS.contains(c)
}

pub fn is_alnum(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    file: &'a str,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn location(&self) -> Location {
        Location::new(self.file, self.line, self.column)
    }

    /// Skips whitespace and comments; reports whether anything was skipped.
    fn skip_layout(&mut self) -> Result<bool, SyntaxError> {
        let mut skipped = false;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                    skipped = true;
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                    skipped = true;
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let start = self.location();
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            None => {
                                return Err(SyntaxError::new("unterminated block comment", start));
                            }
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            Some(_) => {}
                        }
                    }
                    skipped = true;
                }
                _ => return Ok(skipped),
            }
        }
    }

    fn quoted(&mut self, start: Location) -> Result<String, SyntaxError> {
        // opening quote already consumed
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(SyntaxError::new("unterminated quoted atom", start)),
                Some('\'') => {
                    if self.peek() == Some('\'') {
                        self.bump();
                        out.push('\'');
                    } else {
                        return Ok(out);
                    }
                }
                Some('\\') => {
                    let loc = self.location();
                    match self.bump() {
                        Some('n') => out.push('\n'),
                        Some('t') => out.push('\t'),
                        Some('\\') => out.push('\\'),
                        Some('\'') => out.push('\''),
                        Some(c) => {
                            return Err(SyntaxError::new(format!("unsupported escape sequence `\\{c}`"), loc));
                        }
                        None => return Err(SyntaxError::new("unterminated quoted atom", start)),
                    }
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>, SyntaxError> {
        let layout_before = self.skip_layout()?;
        let location = self.location();
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let kind = if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(d) = self.peek().filter(char::is_ascii_digit) {
                digits.push(d);
                self.bump();
            }
            if digits == "0" && self.peek() == Some('\'') {
                return Err(SyntaxError::new("character code literals are not supported", location));
            }
            if self.peek() == Some('.') && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                return Err(SyntaxError::new("floating point numbers are not supported", location));
            }
            let value = digits.parse::<i64>().map_err(|_| SyntaxError::new("integer literal out of range", location.clone()))?;
            TokenKind::Int(value)
        } else if c == '_' || c.is_uppercase() {
            let mut name = String::new();
            while let Some(d) = self.peek().filter(|&d| is_alnum(d)) {
                name.push(d);
                self.bump();
            }
            TokenKind::Var(name)
        } else if c.is_alphabetic() {
            let mut name = String::new();
            while let Some(d) = self.peek().filter(|&d| is_alnum(d)) {
                name.push(d);
                self.bump();
            }
            TokenKind::Name { text: name, quoted: false }
        } else if c == '\'' {
            self.bump();
            TokenKind::Name { text: self.quoted(location.clone())?, quoted: true }
        } else if c == '"' || c == '`' {
            return Err(SyntaxError::new("strings are not supported", location));
        } else if "()[]{},|".contains(c) {
            self.bump();
            TokenKind::Punct(c)
        } else if c == '!' || c == ';' {
            self.bump();
            TokenKind::Name { text: c.to_string(), quoted: false }
        } else if c == '.' && self.peek_at(1).is_none_or(|n| n.is_whitespace() || n == '%') {
            self.bump();
            TokenKind::End
        } else if is_symbol_char(c) {
            let mut name = String::new();
            while let Some(d) = self.peek().filter(|&d| is_symbol_char(d)) {
                name.push(d);
                self.bump();
            }
            TokenKind::Name { text: name, quoted: false }
        } else {
            return Err(SyntaxError::new(format!("unexpected character `{c}`"), location));
        };
        Ok(Some(Token { kind, location, layout_before }))
    }
}

/// Splits program text into tokens, dropping layout and comments.
pub fn tokenize(text: &str, file: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lexer = Lexer { chars: text.chars().collect(), pos: 0, line: 1, column: 1, file };
    let mut tokens = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        tokens.push(tok);
    }
    Ok(tokens)
}

/// Location just past the last character of `text`.
pub fn end_location(text: &str, file: &str) -> Location {
    let mut line = 1;
    let mut column = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    Location::new(file, line, column)
}
