use std::sync::Arc;

use crate::model::{Code, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// `\name`, with `name` matching `[a-zA-Z]+`.
    Command(String),
    /// `\begin{name}`
    BeginEnv(String),
    /// `\end{name}`
    EndEnv(String),
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

/// Maps byte offsets to 1-based line and character columns.
#[derive(Debug)]
pub(crate) struct LineIndex {
    starts: Vec<usize>,
    ascii: Vec<bool>,
}

impl LineIndex {
    pub(crate) fn new(text: &str) -> Self {
        let mut starts = vec![0];
        let mut ascii = Vec::new();
        let mut line_ascii = true;
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' {
                ascii.push(line_ascii);
                line_ascii = true;
                starts.push(i + 1);
            } else if !b.is_ascii() {
                line_ascii = false;
            }
        }
        ascii.push(line_ascii);
        Self { starts, ascii }
    }

    pub(crate) fn position(&self, text: &str, offset: usize) -> (usize, usize) {
        let line = match self.starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = self.starts[line];
        let col = if self.ascii[line] {
            offset - start
        } else {
            text[start..offset].chars().count()
        };
        (line + 1, col + 1)
    }
}

/// Byte-offset token used internally by the parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawToken {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

pub(crate) struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    path: Arc<str>,
    index: &'a LineIndex,
    pub diags: Vec<Diagnostic>,
}

fn is_special(b: u8) -> bool {
    matches!(b, b'\\' | b'%' | b'{' | b'}' | b'[' | b']')
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(src: &'a str, path: Arc<str>, index: &'a LineIndex) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            path,
            index,
            diags: Vec::new(),
        }
    }

    fn span(&self, start: usize, end: usize) -> SourceSpan {
        let (line, col) = self.index.position(self.src, start);
        SourceSpan::new(self.path.clone(), start, end, line, col)
    }

    fn letters_from(&self, at: usize) -> usize {
        let mut end = at;
        while end < self.bytes.len() && self.bytes[end].is_ascii_alphabetic() {
            end += 1;
        }
        end
    }

    /// Recognizes `{name}` (optionally preceded by spaces) after `\begin`/`\end`.
    fn env_name(&self, at: usize) -> Option<(String, usize)> {
        let mut p = at;
        while p < self.bytes.len() && matches!(self.bytes[p], b' ' | b'\t') {
            p += 1;
        }
        if self.bytes.get(p) != Some(&b'{') {
            return None;
        }
        let name_start = p + 1;
        let mut name_end = name_start;
        while name_end < self.bytes.len()
            && (self.bytes[name_end].is_ascii_alphabetic() || self.bytes[name_end] == b'*')
        {
            name_end += 1;
        }
        if name_end == name_start || self.bytes.get(name_end) != Some(&b'}') {
            return None;
        }
        Some((self.src[name_start..name_end].to_string(), name_end + 1))
    }

    pub(crate) fn run(mut self) -> (Vec<RawToken>, Vec<Diagnostic>) {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let start = self.pos;
            let b = self.bytes[start];
            let kind = match b {
                b'\\' => self.backslash(),
                b'%' => {
                    let line_start = self.src[..start].rfind('\n').map_or(0, |i| i + 1);
                    let whole_line = self.src[line_start..start].trim().is_empty();
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                    // a comment occupying its own line disappears with its line break
                    if whole_line && self.pos < self.bytes.len() {
                        self.pos += 1;
                    }
                    continue;
                }
                b'{' => {
                    self.pos += 1;
                    TokenKind::LBrace
                }
                b'}' => {
                    self.pos += 1;
                    TokenKind::RBrace
                }
                b'[' => {
                    self.pos += 1;
                    TokenKind::LBracket
                }
                b']' => {
                    self.pos += 1;
                    TokenKind::RBracket
                }
                _ => {
                    let mut end = start;
                    while end < self.bytes.len() && !is_special(self.bytes[end]) {
                        end += 1;
                    }
                    self.pos = end;
                    TokenKind::Text(self.src[start..end].to_string())
                }
            };
            out.push(RawToken {
                kind,
                start,
                end: self.pos,
            });
        }
        (out, self.diags)
    }

    fn backslash(&mut self) -> TokenKind {
        let start = self.pos;
        let next = self.pos + 1;
        match self.bytes.get(next) {
            Some(c) if c.is_ascii_alphabetic() => {
                let end = self.letters_from(next);
                let name = &self.src[next..end];
                if name == "begin" || name == "end" {
                    if let Some((env, after)) = self.env_name(end) {
                        self.pos = after;
                        return if name == "begin" {
                            TokenKind::BeginEnv(env)
                        } else {
                            TokenKind::EndEnv(env)
                        };
                    }
                }
                self.pos = end;
                TokenKind::Command(name.to_string())
            }
            Some(&c) if is_special(c) => {
                self.pos = next + 1;
                TokenKind::Text((c as char).to_string())
            }
            Some(_) => {
                let ch = self.src[next..].chars().next().unwrap_or('\\');
                self.pos = next + ch.len_utf8();
                let literal = format!("\\{ch}");
                self.diags.push(Diagnostic::new(
                    Code::W001,
                    format!("malformed escape sequence '{literal}' kept as literal text"),
                    self.span(start, self.pos),
                ));
                TokenKind::Text(literal)
            }
            None => {
                self.pos = next;
                self.diags.push(Diagnostic::new(
                    Code::W001,
                    "malformed escape sequence '\\' kept as literal text",
                    self.span(start, self.pos),
                ));
                TokenKind::Text("\\".to_string())
            }
        }
    }
}

pub(crate) fn normalize_newlines(source: &str) -> std::borrow::Cow<'_, str> {
    if source.contains('\r') {
        std::borrow::Cow::Owned(source.replace("\r\n", "\n"))
    } else {
        std::borrow::Cow::Borrowed(source)
    }
}

/// Splits source text into tokens. Adjacent text pieces (including escaped
/// characters and text separated only by comments) are merged.
pub fn tokenize(source: &str, path: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let src = normalize_newlines(source);
    let index = LineIndex::new(&src);
    let path: Arc<str> = Arc::from(path);
    let (raw, diags) = Lexer::new(&src, path.clone(), &index).run();

    let mut tokens: Vec<Token> = Vec::with_capacity(raw.len());
    for tok in raw {
        if let (
            TokenKind::Text(more),
            Some(Token {
                kind: TokenKind::Text(prev),
                span,
            }),
        ) = (&tok.kind, tokens.last_mut())
        {
            prev.push_str(more);
            span.byte_end = tok.end;
            continue;
        }
        let (line, col) = index.position(&src, tok.start);
        tokens.push(Token {
            kind: tok.kind,
            span: SourceSpan::new(path.clone(), tok.start, tok.end, line, col),
        });
    }
    (tokens, diags)
}
