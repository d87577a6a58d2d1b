use std::sync::Arc;

use crate::diag::{codes, Diagnostic, Span};

pub const KEYWORDS: &[&str] = &[
    "thing",
    "fragment",
    "includes",
    "provided",
    "required",
    "port",
    "receives",
    "sends",
    "message",
    "property",
    "data_analytics",
    "statechart",
    "init",
    "final",
    "state",
    "on",
    "entry",
    "exit",
    "transition",
    "event",
    "action",
    "do",
    "end",
    "configuration",
    "instance",
    "connector",
    "print",
    "if",
    "else",
    "da_preprocess",
    "da_train",
    "da_predict",
    "da_save",
    "and",
    "or",
    "not",
    "true",
    "false",
    "ON",
    "OFF",
    "TRUE",
    "FALSE",
    "labels",
    "features",
    "prediction_results",
    "dataset",
    "automl",
    "sequential",
    "timestamps",
    "preprocess_feature_scaler",
    "model_algorithm",
    "training_results",
    "blackbox_ml",
    "blackbox_ml_model",
    "blackbox_import_algorithm",
];

const PUNCTS: &[&str] = &[
    "->", "=>", "==", "!=", "<=", ">=", "{", "}", "(", ")", ",", ":", ".", "=", "<", ">", "+", "-", "*", "/", "!",
    "?", ";",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    Int,
    Float,
    Str,
    Punct,
    Annotation,
    /// A byte sequence the lexer could not classify.
    Unknown,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Whitespace and comments immediately before the lexeme.
    pub leading: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.lexeme == text
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punct, text)
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    file: Arc<str>,
    diags: Vec<Diagnostic>,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> Span {
        Span {
            file: self.file.clone(),
            line: self.line,
            column: self.col,
            offset: self.pos,
            len: 0,
        }
    }

    fn trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek_at(1) == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.peek_at(1) == Some('*') => {
                    let start = self.here();
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek() {
                            None => {
                                let span = Span { len: self.pos - start.offset, ..start };
                                self.diags
                                    .push(Diagnostic::error(codes::SYNTAX, &span, "unterminated comment"));
                                return;
                            }
                            Some('*') if self.peek_at(1) == Some('/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(_) => {
                                self.bump();
                            }
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn ident_tail(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
    }

    fn digits(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
    }

    fn number(&mut self) -> TokenKind {
        self.digits();
        let mut kind = TokenKind::Int;
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some(c) if c.is_ascii_digit()) {
            self.bump();
            self.digits();
            kind = TokenKind::Float;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = matches!(self.peek_at(1), Some('+' | '-'));
            let first = if sign { self.peek_at(2) } else { self.peek_at(1) };
            if matches!(first, Some(c) if c.is_ascii_digit()) {
                self.bump();
                if sign {
                    self.bump();
                }
                self.digits();
                kind = TokenKind::Float;
            }
        }
        kind
    }

    fn string(&mut self, start: &Span) -> TokenKind {
        self.bump();
        loop {
            match self.peek() {
                None => {
                    let span = Span { len: self.pos - start.offset, ..start.clone() };
                    self.diags.push(Diagnostic::error(codes::SYNTAX, &span, "unterminated string literal"));
                    return TokenKind::Unknown;
                }
                Some('"') => {
                    self.bump();
                    return TokenKind::Str;
                }
                Some('\\') => {
                    self.bump();
                    self.bump();
                }
                Some(_) => {
                    self.bump();
                }
            }
        }
    }

    fn next_token(&mut self) -> Token {
        let trivia_start = self.pos;
        self.trivia();
        let leading = self.src[trivia_start..self.pos].to_string();
        let start = self.here();
        let kind = match self.peek() {
            None => TokenKind::Eof,
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                self.ident_tail();
                if KEYWORDS.contains(&&self.src[start.offset..self.pos]) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Ident
                }
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some('"') => self.string(&start),
            Some('@') if matches!(self.peek_at(1), Some(c) if c.is_ascii_alphabetic() || c == '_') => {
                self.bump();
                self.ident_tail();
                TokenKind::Annotation
            }
            Some(_) => {
                let rest = &self.src[self.pos..];
                if let Some(p) = PUNCTS.iter().find(|p| rest.starts_with(**p)) {
                    for _ in 0..p.len() {
                        self.bump();
                    }
                    TokenKind::Punct
                } else {
                    let c = self.bump().unwrap_or_default();
                    let span = Span { len: c.len_utf8(), ..start.clone() };
                    self.diags
                        .push(Diagnostic::error(codes::SYNTAX, &span, format!("unexpected character {c:?}")));
                    TokenKind::Unknown
                }
            }
        };
        Token {
            kind,
            lexeme: self.src[start.offset..self.pos].to_string(),
            leading,
            span: Span { len: self.pos - start.offset, ..start },
        }
    }
}

/// Splits `source` into tokens. The last token is always `Eof`; its leading
/// trivia holds whatever follows the final lexeme.
pub fn tokenize(source: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lx = Lexer {
        src: source,
        pos: 0,
        line: 1,
        col: 1,
        file: Arc::from(file),
        diags: Vec::new(),
    };
    let mut tokens = Vec::new();
    loop {
        let tok = lx.next_token();
        let eof = tok.kind == TokenKind::Eof;
        tokens.push(tok);
        if eof {
            break;
        }
    }
    (tokens, lx.diags)
}

/// Inverse of [`tokenize`].
pub fn reconstruct(tokens: &[Token]) -> String {
    let mut out = String::new();
    for t in tokens {
        out.push_str(&t.leading);
        out.push_str(&t.lexeme);
    }
    out
}

/// Decodes the body of a string literal (quotes included in `lexeme`).
pub fn unescape(lexeme: &str) -> String {
    let inner = lexeme.strip_prefix('"').unwrap_or(lexeme);
    let inner = inner.strip_suffix('"').unwrap_or(inner);
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('0') => out.push('\0'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\0' => out.push_str("\\0"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
