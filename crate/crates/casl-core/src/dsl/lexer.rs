//! Tokenizer for workspace documents.

use super::{Diagnostic, Severity, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// `[A-Za-z_][A-Za-z0-9_]*`; keywords are contextual, so they lex as
    /// idents too.
    Ident(String),
    /// Unsigned digit run, kept raw: it may be a value label or part of a
    /// rational.
    Integer(String),
    /// `digits.digits`, kept raw.
    Decimal(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Comma,
    Slash,
    Arrow,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(text) => format!("`{text}`"),
            TokenKind::Integer(text) | TokenKind::Decimal(text) => format!("`{text}`"),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Arrow => "`->`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

/// Tokenize a document. Unknown characters become diagnostics and are
/// skipped, so the token stream always ends with `Eof`.
pub fn lex(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let mut line = 1usize;
    let mut column = 1usize;
    let mut chars = text.chars().peekable();

    while let Some(&c) = chars.peek() {
        let span_start = (line, column);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                column += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '{' | '}' | '(' | ')' | ':' | ',' | '/' => {
                chars.next();
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    ':' => TokenKind::Colon,
                    ',' => TokenKind::Comma,
                    _ => TokenKind::Slash,
                };
                tokens.push(Token {
                    kind,
                    span: SourceSpan::new(span_start.0, span_start.1, 1),
                });
                column += 1;
            }
            '-' => {
                chars.next();
                column += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    column += 1;
                    tokens.push(Token {
                        kind: TokenKind::Arrow,
                        span: SourceSpan::new(span_start.0, span_start.1, 2),
                    });
                } else {
                    diagnostics.push(Diagnostic {
                        severity: Severity::Error,
                        message: "stray `-`; expected `->`".into(),
                        span: SourceSpan::new(span_start.0, span_start.1, 1),
                    });
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                let length = word.chars().count();
                tokens.push(Token {
                    kind: TokenKind::Ident(word),
                    span: SourceSpan::new(span_start.0, span_start.1, length),
                });
            }
            _ if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                let mut is_decimal = false;
                if chars.peek() == Some(&'.') {
                    let mut lookahead = chars.clone();
                    lookahead.next();
                    if lookahead.peek().is_some_and(|c| c.is_ascii_digit()) {
                        is_decimal = true;
                        digits.push('.');
                        chars.next();
                        column += 1;
                        while let Some(&c) = chars.peek() {
                            if c.is_ascii_digit() {
                                digits.push(c);
                                chars.next();
                                column += 1;
                            } else {
                                break;
                            }
                        }
                    }
                }
                let length = digits.chars().count();
                let kind = if is_decimal {
                    TokenKind::Decimal(digits)
                } else {
                    TokenKind::Integer(digits)
                };
                tokens.push(Token {
                    kind,
                    span: SourceSpan::new(span_start.0, span_start.1, length),
                });
            }
            _ => {
                chars.next();
                diagnostics.push(Diagnostic {
                    severity: Severity::Error,
                    message: format!("unexpected character `{c}`"),
                    span: SourceSpan::new(span_start.0, span_start.1, 1),
                });
                column += 1;
            }
        }
    }

    // Anchor end-of-input at the last real token so diagnostics that point
    // here always land on a line and column the source actually has.
    let eof_span = match tokens.last() {
        Some(token) => SourceSpan::new(
            token.span.line,
            token.span.column + token.span.length.saturating_sub(1),
            1,
        ),
        None => SourceSpan::new(1, 1, 1),
    };
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: eof_span,
    });
    (tokens, diagnostics)
}
