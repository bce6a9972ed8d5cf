//! Character cursor shared by the problem-file and expression parsers.

use crate::error::{Error, Result};

pub(crate) struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    _src: std::marker::PhantomData<&'a str>,
}

impl<'a> Cursor<'a> {
    /// `column` is the 1-based column of the first character of `text`.
    pub fn new(text: &'a str, line: usize, column: usize) -> Self {
        Self { chars: text.chars().collect(), pos: 0, line, column, _src: std::marker::PhantomData }
    }

    pub fn error(&self, expected: &str) -> Error {
        Error::Parse { line: self.line, column: self.column + self.pos, expected: expected.to_string() }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    pub fn peek_char(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    pub fn skip_ws(&mut self) {
        while self.peek_char().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    pub fn eat(&mut self, ch: char) -> bool {
        if self.peek_char() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, ch: char) -> Result<()> {
        if self.eat(ch) {
            Ok(())
        } else {
            Err(self.error(&format!("`{ch}`")))
        }
    }

    fn word_at(&self, at: usize, w: &str) -> bool {
        let n = w.chars().count();
        let matches = w.chars().enumerate().all(|(i, c)| self.chars.get(at + i) == Some(&c));
        matches && !self.chars.get(at + n).is_some_and(|c| c.is_alphanumeric() || *c == '_')
    }

    pub fn peek_word(&self, w: &str) -> bool {
        self.word_at(self.pos, w)
    }

    /// A `-` followed (after optional spaces) by the word `w`.
    pub fn peek_word_after_minus(&self, w: &str) -> bool {
        let mut at = self.pos + 1;
        while self.chars.get(at).is_some_and(|c| c.is_whitespace()) {
            at += 1;
        }
        self.word_at(at, w)
    }

    pub fn expect_word(&mut self, w: &str) -> Result<()> {
        if self.peek_word(w) {
            self.pos += w.chars().count();
            Ok(())
        } else {
            Err(self.error(&format!("`{w}`")))
        }
    }

    pub fn identifier(&mut self) -> Option<String> {
        let start = self.pos;
        while self.peek_char().is_some_and(|c| c.is_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    pub fn unsigned(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| {
            self.pos = start;
            self.error("an unsigned integer")
        })
    }

    fn decimal(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |c: &mut Self| {
            let s = c.pos;
            while c.peek_char().is_some_and(|ch| ch.is_ascii_digit()) {
                c.pos += 1;
            }
            c.pos - s
        };
        let mut n = digits(self);
        if self.eat('.') {
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("a number"));
        }
        if matches!(self.peek_char(), Some('e' | 'E')) {
            let mark = self.pos;
            self.pos += 1;
            if !self.eat('+') {
                self.eat('-');
            }
            if digits(self) == 0 {
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => {
                self.pos = start;
                Err(self.error("a finite number"))
            }
        }
    }

    /// `[+|-] (decimal | sqrt(decimal))`
    pub fn scalar(&mut self) -> Result<f64> {
        let sign = if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        };
        self.skip_ws();
        if self.peek_word("sqrt") {
            self.expect_word("sqrt")?;
            self.skip_ws();
            self.expect('(')?;
            self.skip_ws();
            let x = self.decimal()?;
            self.skip_ws();
            self.expect(')')?;
            Ok(sign * x.sqrt())
        } else {
            Ok(sign * self.decimal()?)
        }
    }

    pub fn rest(&self) -> String {
        self.chars[self.pos..].iter().collect()
    }

    pub fn column(&self) -> usize {
        self.column + self.pos
    }
}
