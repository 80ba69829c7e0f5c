//! Text format for exact values.
//!
//! Accepted forms include `p/q`, `(a+b*sqrt(d))/c`, decimals such as `0.25`
//! (read exactly), and sums and products of those. When a rotation number is
//! bound, `a` / `alpha` refers to it, so `3a` and `1/2+2a` are valid. The
//! names `pi` and `e` are accepted as rational truncations to 15 decimals
//! and mark the result approximate.

use num_bigint::BigInt;

use super::RealValue;
use crate::error::{Error, Result};

const PI_DIGITS: &str = "3.141592653589793";
const E_DIGITS: &str = "2.718281828459045";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedReal {
    pub value: RealValue,
    /// Set when a transcendental constant was replaced by a rational truncation.
    pub approximate: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

fn tokenize(input: &str) -> std::result::Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1
            }
            '-' => {
                out.push(Token::Minus);
                i += 1
            }
            '*' => {
                out.push(Token::Star);
                i += 1
            }
            '/' => {
                out.push(Token::Slash);
                i += 1
            }
            '(' => {
                out.push(Token::LParen);
                i += 1
            }
            ')' => {
                out.push(Token::RParen);
                i += 1
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                out.push(Token::Num(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

fn decimal(text: &str) -> std::result::Result<RealValue, String> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return Err(format!("malformed number `{text}`"));
    }
    let digits = format!("{int_part}{frac_part}");
    let numerator: BigInt = digits
        .parse()
        .map_err(|_| format!("malformed number `{text}`"))?;
    let denominator = num_traits::pow(BigInt::from(10), frac_part.len());
    RealValue::rational(numerator, denominator).map_err(|e| e.to_string())
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    alpha: Option<&'a RealValue>,
    approximate: bool,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> std::result::Result<(), String> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(format!("expected {want:?}, found {t:?}")),
            None => Err(format!("expected {want:?}, found end of input")),
        }
    }

    fn expr(&mut self) -> std::result::Result<RealValue, String> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.checked_add(&rhs).map_err(|e| e.to_string())?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.checked_sub(&rhs).map_err(|e| e.to_string())?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> std::result::Result<RealValue, String> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.checked_mul(&rhs).map_err(|e| e.to_string())?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs).map_err(|e| e.to_string())?;
                }
                // implicit product: `3a`, `2sqrt(5)`, `2(1+a)`
                Some(Token::Ident(_)) | Some(Token::LParen) => {
                    let rhs = self.unary()?;
                    acc = acc.checked_mul(&rhs).map_err(|e| e.to_string())?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> std::result::Result<RealValue, String> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> std::result::Result<RealValue, String> {
        match self.next() {
            Some(Token::Num(text)) => decimal(&text),
            Some(Token::LParen) => {
                let v = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(v)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "sqrt" => {
                    self.expect(Token::LParen)?;
                    let radicand = match self.next() {
                        Some(Token::Num(text)) => text
                            .parse::<u64>()
                            .map_err(|_| format!("sqrt needs a non-negative integer, got `{text}`"))?,
                        other => return Err(format!("sqrt needs an integer, found {other:?}")),
                    };
                    self.expect(Token::RParen)?;
                    RealValue::new(0, 1, 1, radicand).map_err(|e| e.to_string())
                }
                "a" | "alpha" => self
                    .alpha
                    .cloned()
                    .ok_or_else(|| "`a` is only available once alpha is known".to_string()),
                "pi" => {
                    self.approximate = true;
                    decimal(PI_DIGITS)
                }
                "e" => {
                    self.approximate = true;
                    decimal(E_DIGITS)
                }
                other => Err(format!("unknown name `{other}`")),
            },
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of input".to_string()),
        }
    }
}

/// Parses a value, optionally with `a`/`alpha` bound to a rotation number.
pub fn parse_real(input: &str, alpha: Option<&RealValue>) -> Result<ParsedReal> {
    let fail = |reason: String| Error::Parse {
        input: input.to_string(),
        reason,
    };
    let tokens = tokenize(input).map_err(fail)?;
    if tokens.is_empty() {
        return Err(fail("empty input".into()));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        alpha,
        approximate: false,
    };
    let value = parser.expr().map_err(fail)?;
    if parser.pos != parser.tokens.len() {
        return Err(fail(format!(
            "trailing input starting at {:?}",
            parser.tokens[parser.pos]
        )));
    }
    Ok(ParsedReal {
        value,
        approximate: parser.approximate,
    })
}
