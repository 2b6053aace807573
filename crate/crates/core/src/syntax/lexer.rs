//! Tokenizer for program source.

use crate::diagnostics::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Name starting with a lowercase letter.
    Lower(String),
    /// Name starting with an uppercase letter.
    Upper(String),
    /// Unsigned integer literal, kept as text.
    Number(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Turnstile,
    Dollar,
    Lt,
    Gt,
    Caret,
    Star,
    Plus,
    Question,
    Eq,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
    /// Byte offset into the source, for statement text capture.
    pub offset: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut column = 1usize;
    let bytes: Vec<char> = src.chars().collect();
    let mut offsets = Vec::with_capacity(bytes.len() + 1);
    {
        let mut off = 0;
        for c in &bytes {
            offsets.push(off);
            off += c.len_utf8();
        }
        offsets.push(off);
    }
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        let span = Span { line, column };
        let advance = |i: &mut usize, line: &mut usize, column: &mut usize, n: usize| {
            for k in 0..n {
                if bytes[*i + k] == '\n' {
                    *line += 1;
                    *column = 1;
                } else {
                    *column += 1;
                }
            }
            *i += n;
        };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut column, 1);
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&'/') {
            while i < bytes.len() && bytes[i] != '\n' {
                advance(&mut i, &mut line, &mut column, 1);
            }
            continue;
        }
        if c == '#' {
            return Err(Diagnostic::Syntax {
                span,
                message: "`#` is reserved for machine-generated names".into(),
            });
        }
        if c == ':' {
            if bytes.get(i + 1) == Some(&'-') {
                out.push(Token {
                    tok: Tok::Turnstile,
                    span,
                    offset: offsets[i],
                });
                advance(&mut i, &mut line, &mut column, 2);
                continue;
            }
            return Err(Diagnostic::Syntax {
                span,
                message: "expected `:-`".into(),
            });
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '$' => Some(Tok::Dollar),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            '^' => Some(Tok::Caret),
            '*' => Some(Tok::Star),
            '+' => Some(Tok::Plus),
            '?' => Some(Tok::Question),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token {
                tok,
                span,
                offset: offsets[i],
            });
            advance(&mut i, &mut line, &mut column, 1);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                advance(&mut i, &mut line, &mut column, 1);
            }
            let text: String = bytes[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Number(text),
                span,
                offset: offsets[start],
            });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                advance(&mut i, &mut line, &mut column, 1);
            }
            let text: String = bytes[start..i].iter().collect();
            let tok = if c.is_ascii_uppercase() {
                Tok::Upper(text)
            } else {
                Tok::Lower(text)
            };
            out.push(Token {
                tok,
                span,
                offset: offsets[start],
            });
            continue;
        }
        return Err(Diagnostic::Syntax {
            span,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, column },
        offset: offsets[bytes.len()],
    });
    Ok(out)
}
