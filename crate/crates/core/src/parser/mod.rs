//! Markup source to [`Document`].
//!
//! The grammar is closed: `\title`, the three section levels with an optional
//! `[\type{..}\label{..}]` argument, `\define{term}{text}`, the `itemize`
//! environment with `\item`, and the inline tags `\def`, `\leg`, `\ref`,
//! `\var`, `\or` and `\and`. Parsing never fails; problems become
//! diagnostics and the parser resynchronizes at the next command or blank
//! line.

mod lexer;

use std::mem;
use std::sync::Arc;

pub(crate) use lexer::normalize_newlines;
pub use lexer::{tokenize, Token, TokenKind};
use lexer::{Lexer, LineIndex, RawToken};

use crate::model::{
    normalize_text, plain_text, sort_diagnostics, Block, Code, ConnectiveKind, DefineBlock,
    Diagnostic, Document, Inline, ListBlock, ListItem, Paragraph, Section, SourceSpan,
};

/// Parses one source file. CRLF line endings are accepted.
pub fn parse(source: &str, path: &str) -> (Document, Vec<Diagnostic>) {
    let src = normalize_newlines(source);
    let index = LineIndex::new(&src);
    let path_arc: Arc<str> = Arc::from(path);
    let (toks, mut diags) = Lexer::new(&src, path_arc.clone(), &index).run();

    let mut parser = Parser {
        src: &src,
        index: &index,
        path: path_arc,
        toks,
        pos: 0,
        diags: Vec::new(),
        title: None,
        blank: false,
    };
    let body = parser.document();
    diags.append(&mut parser.diags);
    sort_diagnostics(&mut diags);
    let doc = Document {
        title: parser.title,
        body,
        source_path: path.to_string(),
    };
    (doc, diags)
}

/// True for `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmd {
    Section(u8),
    Title,
    Define,
    Item,
    Def,
    Leg,
    Ref,
    Var,
    Or,
    And,
    Type,
    Label,
    Unknown,
}

impl Cmd {
    fn of(name: &str) -> Cmd {
        match name {
            "section" => Cmd::Section(1),
            "subsection" => Cmd::Section(2),
            "subsubsection" => Cmd::Section(3),
            "title" => Cmd::Title,
            "define" => Cmd::Define,
            "item" => Cmd::Item,
            "def" => Cmd::Def,
            "leg" => Cmd::Leg,
            "ref" => Cmd::Ref,
            "var" => Cmd::Var,
            "or" => Cmd::Or,
            "and" => Cmd::And,
            "type" => Cmd::Type,
            "label" => Cmd::Label,
            _ => Cmd::Unknown,
        }
    }

    fn is_block(self) -> bool {
        matches!(self, Cmd::Section(_) | Cmd::Title | Cmd::Define)
    }
}

struct Parser<'a> {
    src: &'a str,
    index: &'a LineIndex,
    path: Arc<str>,
    toks: Vec<RawToken>,
    pos: usize,
    diags: Vec<Diagnostic>,
    title: Option<Vec<Inline>>,
    /// A line break followed only by horizontal whitespace has been seen;
    /// the next line break ends the paragraph.
    blank: bool,
}

impl Parser<'_> {
    fn span(&self, start: usize, end: usize) -> SourceSpan {
        let (line, col) = self.index.position(self.src, start);
        SourceSpan::new(self.path.clone(), start, end, line, col)
    }

    fn eof_span(&self) -> SourceSpan {
        self.span(self.src.len(), self.src.len())
    }

    fn peek(&self) -> Option<&RawToken> {
        self.toks.get(self.pos)
    }

    fn prev_end(&self) -> usize {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.toks.get(i))
            .map_or(0, |t| t.end)
    }

    fn error(&mut self, code: Code, message: impl Into<String>, span: SourceSpan) {
        self.diags.push(Diagnostic::new(code, message, span));
    }

    /// Tokens that end any inline run.
    fn at_block_boundary(&self) -> bool {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Command(name)) => {
                let cmd = Cmd::of(name);
                cmd.is_block() || cmd == Cmd::Item
            }
            Some(TokenKind::BeginEnv(_)) | Some(TokenKind::EndEnv(_)) => true,
            _ => false,
        }
    }

    fn document(&mut self) -> Vec<Block> {
        let mut body = self.flow();
        let mut headers = Vec::new();
        while let Some(RawToken {
            kind: TokenKind::Command(name),
            ..
        }) = self.peek()
        {
            let Cmd::Section(level) = Cmd::of(name) else {
                break;
            };
            let mut section = self.section_header(level);
            section.children = self.flow();
            headers.push(section);
        }
        self.build_tree(headers, &mut body);
        body
    }

    /// Rebuilds the section hierarchy from the flat level sequence.
    fn build_tree(&mut self, headers: Vec<Section>, body: &mut Vec<Block>) {
        fn attach(done: Section, stack: &mut [Section], body: &mut Vec<Block>) {
            match stack.last_mut() {
                Some(parent) => parent.children.push(Block::Section(done)),
                None => body.push(Block::Section(done)),
            }
        }

        let mut stack: Vec<Section> = Vec::new();
        for section in headers {
            while stack.last().is_some_and(|top| top.level >= section.level) {
                let done = stack.pop().expect("non-empty stack");
                attach(done, &mut stack, body);
            }
            let parent_level = stack.last().map_or(0, |top| top.level);
            if section.level > parent_level + 1 {
                self.error(
                    Code::W005,
                    format!(
                        "section level jumps from {parent_level} to {}",
                        section.level
                    ),
                    section.span.clone(),
                );
            }
            stack.push(section);
        }
        while let Some(done) = stack.pop() {
            attach(done, &mut stack, body);
        }
    }

    /// Blocks up to the next section command or end of input.
    fn flow(&mut self) -> Vec<Block> {
        let mut blocks = Vec::new();
        let mut para: Vec<Inline> = Vec::new();
        self.blank = false;
        while let Some(tok) = self.peek() {
            let (start, end) = (tok.start, tok.end);
            match tok.kind.clone() {
                TokenKind::Command(name) => match Cmd::of(&name) {
                    Cmd::Section(_) => break,
                    Cmd::Title => {
                        self.flush(&mut para, &mut blocks);
                        self.pos += 1;
                        if let Some((title, _)) = self.argument("title") {
                            self.title = Some(finish_inline(title));
                        }
                    }
                    Cmd::Define => {
                        self.flush(&mut para, &mut blocks);
                        if let Some(def) = self.define() {
                            blocks.push(Block::Define(def));
                        }
                    }
                    Cmd::Item => {
                        self.error(
                            Code::E003,
                            "\\item outside itemize environment",
                            self.span(start, end),
                        );
                        self.pos += 1;
                    }
                    _ => self.inline(&mut para),
                },
                TokenKind::BeginEnv(name) if name == "itemize" => {
                    self.flush(&mut para, &mut blocks);
                    let list = self.list();
                    blocks.push(Block::List(list));
                }
                TokenKind::BeginEnv(name) => {
                    self.error(
                        Code::E004,
                        format!("unknown environment '{name}'"),
                        self.span(start, end),
                    );
                    self.pos += 1;
                }
                TokenKind::EndEnv(name) => {
                    self.error(
                        Code::E002,
                        format!("\\end{{{name}}} does not match an open environment"),
                        self.span(start, end),
                    );
                    self.pos += 1;
                }
                TokenKind::RBrace => {
                    self.error(Code::E001, "unbalanced '}'", self.span(start, end));
                    self.pos += 1;
                }
                TokenKind::Text(text) => {
                    if let Some((cut, resume)) = self.find_blank_line(&text) {
                        para.push(Inline::Text {
                            text: text[..cut].to_string(),
                            span: self.span(start, start + cut),
                        });
                        self.flush(&mut para, &mut blocks);
                        self.resume_text(&text, start, end, resume);
                    } else {
                        para.push(Inline::Text {
                            text,
                            span: self.span(start, end),
                        });
                        self.pos += 1;
                    }
                }
                _ => self.inline(&mut para),
            }
        }
        self.flush(&mut para, &mut blocks);
        blocks
    }

    /// Replaces the current text token by its tail starting at `resume`, or
    /// consumes it when nothing is left.
    fn resume_text(&mut self, text: &str, start: usize, end: usize, resume: usize) {
        if resume < text.len() {
            self.toks[self.pos] = RawToken {
                kind: TokenKind::Text(text[resume..].to_string()),
                start: start + resume,
                end,
            };
        } else {
            self.pos += 1;
        }
    }

    fn flush(&mut self, para: &mut Vec<Inline>, blocks: &mut Vec<Block>) {
        self.blank = false;
        if para.is_empty() {
            return;
        }
        let raw = mem::take(para);
        let span = raw[0].span().cover(raw[raw.len() - 1].span());
        let content = finish_inline(raw);
        if !content.is_empty() {
            blocks.push(Block::Paragraph(Paragraph { content, span }));
        }
    }

    /// Finds a blank line in `text`, continuing the line-break state carried
    /// over from preceding text. Returns the cut point (text before it belongs
    /// to the current paragraph) and the offset where content resumes.
    fn find_blank_line(&mut self, text: &str) -> Option<(usize, usize)> {
        for (i, c) in text.char_indices() {
            if c == '\n' {
                if self.blank {
                    self.blank = false;
                    let rest = &text[i..];
                    let resume = i + rest.len() - rest.trim_start().len();
                    return Some((i, resume));
                }
                self.blank = true;
            } else if !c.is_whitespace() {
                self.blank = false;
            }
        }
        None
    }

    /// Parses one inline element at the current token and appends it to `out`.
    /// Always consumes at least one token.
    fn inline(&mut self, out: &mut Vec<Inline>) {
        let Some(tok) = self.peek() else { return };
        let (start, end) = (tok.start, tok.end);
        let kind = tok.kind.clone();
        if !matches!(kind, TokenKind::Text(_)) {
            self.blank = false;
        }
        match kind {
            TokenKind::Text(text) => {
                out.push(Inline::Text {
                    text,
                    span: self.span(start, end),
                });
                self.pos += 1;
            }
            TokenKind::LBracket | TokenKind::RBracket => {
                let text = if kind == TokenKind::LBracket {
                    "["
                } else {
                    "]"
                };
                out.push(Inline::Text {
                    text: text.to_string(),
                    span: self.span(start, end),
                });
                self.pos += 1;
            }
            TokenKind::LBrace => {
                // bare group: transparent
                self.pos += 1;
                self.balanced(out, start);
            }
            TokenKind::RBrace => {
                self.error(Code::E001, "unbalanced '}'", self.span(start, end));
                self.pos += 1;
            }
            TokenKind::Command(name) => self.inline_command(&name, start, end, out),
            TokenKind::BeginEnv(_) | TokenKind::EndEnv(_) => {
                // callers stop before environments; consume to guarantee progress
                self.error(
                    Code::E002,
                    "environment not allowed here",
                    self.span(start, end),
                );
                self.pos += 1;
            }
        }
    }

    fn inline_command(&mut self, name: &str, start: usize, end: usize, out: &mut Vec<Inline>) {
        self.pos += 1;
        let cmd = Cmd::of(name);
        match cmd {
            Cmd::Def | Cmd::Leg | Cmd::Ref | Cmd::Var => {
                let Some((value, arg_end)) = self.string_argument(name) else {
                    return;
                };
                let span = self.span(start, arg_end);
                if value.is_empty() {
                    self.error(
                        Code::E004,
                        format!("\\{name} requires a non-empty argument"),
                        span,
                    );
                    return;
                }
                let node = match cmd {
                    Cmd::Def => Inline::TermUse { term: value, span },
                    Cmd::Leg => Inline::LegCite {
                        raw: value,
                        canonical: None,
                        span,
                    },
                    Cmd::Ref => Inline::CrossRef {
                        target: value,
                        resolved_number: None,
                        span,
                    },
                    _ if is_identifier(&value) => Inline::VarSlot { name: value, span },
                    _ => {
                        self.error(
                            Code::E004,
                            format!("invalid variable name '{value}'"),
                            span.clone(),
                        );
                        Inline::Text { text: value, span }
                    }
                };
                out.push(node);
            }
            Cmd::Or | Cmd::And => {
                let mut end = end;
                // optional empty group, used to separate the command from following letters
                if let (Some(open), Some(close)) =
                    (self.toks.get(self.pos), self.toks.get(self.pos + 1))
                {
                    if open.kind == TokenKind::LBrace
                        && close.kind == TokenKind::RBrace
                        && open.start == end
                    {
                        end = close.end;
                        self.pos += 2;
                    }
                }
                let kind = if cmd == Cmd::Or {
                    ConnectiveKind::Or
                } else {
                    ConnectiveKind::And
                };
                out.push(Inline::Connective {
                    kind,
                    span: self.span(start, end),
                });
            }
            Cmd::Type | Cmd::Label => self.error(
                Code::E004,
                format!("\\{name} is only allowed in section options"),
                self.span(start, end),
            ),
            _ => self.error(
                Code::E004,
                format!("unknown command '\\{name}'"),
                self.span(start, end),
            ),
        }
    }

    /// Inline content up to the `}` matching an already consumed `{` at
    /// `open`. Returns the end offset, or `None` (with E001) when the group is
    /// cut off by end of input, a blank line, or a block-level command.
    fn balanced(&mut self, out: &mut Vec<Inline>, open: usize) -> Option<usize> {
        self.blank = false;
        while let Some(tok) = self.peek() {
            let (start, end) = (tok.start, tok.end);
            match tok.kind.clone() {
                TokenKind::RBrace => {
                    self.pos += 1;
                    self.blank = false;
                    return Some(end);
                }
                TokenKind::Text(text) => {
                    if let Some((cut, _)) = self.find_blank_line(&text) {
                        out.push(Inline::Text {
                            text: text[..cut].to_string(),
                            span: self.span(start, start + cut),
                        });
                        // leave the blank line for the enclosing flow
                        self.resume_text(&text, start, end, cut);
                        self.blank = true;
                        break;
                    }
                    out.push(Inline::Text {
                        text,
                        span: self.span(start, end),
                    });
                    self.pos += 1;
                }
                _ if self.at_block_boundary() => break,
                _ => self.inline(out),
            }
        }
        let span = self.span(open, open + 1);
        self.error(Code::E001, "unclosed brace", span);
        None
    }

    /// A required `{...}` argument for `\cmd`; whitespace before the brace is
    /// skipped.
    fn argument(&mut self, cmd: &str) -> Option<(Vec<Inline>, usize)> {
        if let Some(RawToken {
            kind: TokenKind::Text(text),
            ..
        }) = self.peek()
        {
            let next_is_brace = self
                .toks
                .get(self.pos + 1)
                .is_some_and(|t| t.kind == TokenKind::LBrace);
            if next_is_brace && text.trim().is_empty() && text.matches('\n').count() < 2 {
                self.pos += 1;
            }
        }
        match self.peek() {
            Some(RawToken {
                kind: TokenKind::LBrace,
                start,
                ..
            }) => {
                let open = *start;
                self.pos += 1;
                let mut content = Vec::new();
                let end = self.balanced(&mut content, open)?;
                Some((content, end))
            }
            _ => {
                let at = self.prev_end();
                let span = self.span(at, at);
                self.error(
                    Code::E001,
                    format!("missing '{{' argument for \\{cmd}"),
                    span,
                );
                None
            }
        }
    }

    fn string_argument(&mut self, cmd: &str) -> Option<(String, usize)> {
        self.argument(cmd)
            .map(|(content, end)| (normalize_text(&plain_text(&content)), end))
    }

    fn section_header(&mut self, level: u8) -> Section {
        let tok = &self.toks[self.pos];
        let start = tok.start;
        self.pos += 1;
        let mut types = Vec::new();
        let mut label = None;

        let skip_ws = matches!(
            self.peek(),
            Some(RawToken { kind: TokenKind::Text(t), .. }) if t.trim().is_empty()
        ) && self
            .toks
            .get(self.pos + 1)
            .is_some_and(|t| t.kind == TokenKind::LBracket);
        if skip_ws {
            self.pos += 1;
        }
        if let Some(RawToken {
            kind: TokenKind::LBracket,
            start: open,
            ..
        }) = self.peek()
        {
            let open = *open;
            self.pos += 1;
            self.options(open, &mut types, &mut label);
        }

        let (title, end) = match self.argument("section") {
            Some((title, end)) => (finish_inline(title), end),
            None => (Vec::new(), self.prev_end()),
        };
        Section {
            level,
            types,
            label,
            title,
            children: Vec::new(),
            span: self.span(start, end.max(start)),
        }
    }

    /// Contents of a section's `[...]` argument.
    fn options(&mut self, open: usize, types: &mut Vec<String>, label: &mut Option<String>) {
        while let Some(tok) = self.peek() {
            let (start, end) = (tok.start, tok.end);
            match tok.kind.clone() {
                TokenKind::RBracket => {
                    self.pos += 1;
                    return;
                }
                TokenKind::Text(t) if t.trim().is_empty() => self.pos += 1,
                TokenKind::Command(name) if name == "type" || name == "label" => {
                    self.pos += 1;
                    let Some((value, arg_end)) = self.string_argument(&name) else {
                        continue;
                    };
                    let span = self.span(start, arg_end);
                    if value.is_empty() {
                        self.error(
                            Code::E004,
                            format!("\\{name} requires a non-empty argument"),
                            span,
                        );
                    } else if name == "type" {
                        types.push(value);
                    } else if label.is_some() {
                        self.error(Code::E004, "a section may carry at most one \\label", span);
                    } else {
                        *label = Some(value);
                    }
                }
                _ if self.at_block_boundary() => break,
                kind => {
                    self.error(
                        Code::E004,
                        "only \\type and \\label are allowed in section options",
                        self.span(start, end),
                    );
                    self.pos += 1;
                    if matches!(kind, TokenKind::Command(_) | TokenKind::LBrace) {
                        let group_open = if kind == TokenKind::LBrace {
                            Some(start)
                        } else if self.peek().is_some_and(|t| t.kind == TokenKind::LBrace) {
                            let s = self.toks[self.pos].start;
                            self.pos += 1;
                            Some(s)
                        } else {
                            None
                        };
                        if let Some(open) = group_open {
                            let mut discard = Vec::new();
                            self.balanced(&mut discard, open);
                        }
                    }
                }
            }
        }
        let span = self.span(open, open + 1);
        self.error(Code::E001, "unclosed '['", span);
    }

    fn define(&mut self) -> Option<DefineBlock> {
        let start = self.toks[self.pos].start;
        self.pos += 1;
        let (term, term_end) = self.string_argument("define")?;
        let (definition, end) = match self.argument("define") {
            Some((content, end)) => (finish_inline(content), end),
            None => (Vec::new(), term_end),
        };
        let span = self.span(start, end);
        if term.is_empty() {
            self.error(Code::E004, "\\define requires a non-empty term", span);
            return None;
        }
        Some(DefineBlock {
            term,
            definition,
            span,
        })
    }

    fn list(&mut self) -> ListBlock {
        let start = self.toks[self.pos].start;
        self.pos += 1;
        self.blank = false;
        let mut items = Vec::new();
        let mut current: Option<ItemBuilder> = None;
        let mut end = self.prev_end();

        loop {
            let Some(tok) = self.peek() else {
                self.error(
                    Code::E002,
                    "environment 'itemize' is not closed",
                    self.eof_span(),
                );
                break;
            };
            let (tok_start, tok_end) = (tok.start, tok.end);
            match tok.kind.clone() {
                TokenKind::EndEnv(name) if name == "itemize" => {
                    self.pos += 1;
                    end = tok_end;
                    break;
                }
                TokenKind::EndEnv(name) => {
                    self.error(
                        Code::E002,
                        format!("\\end{{{name}}} does not match \\begin{{itemize}}"),
                        self.span(tok_start, tok_end),
                    );
                    self.pos += 1;
                }
                TokenKind::BeginEnv(name) if name == "itemize" => {
                    let sub = self.list();
                    let item = current.get_or_insert_with(|| {
                        self.diags.push(Diagnostic::new(
                            Code::E003,
                            "nested list must follow an \\item",
                            sub.span.clone(),
                        ));
                        ItemBuilder::new(tok_start)
                    });
                    item.sublists.push(sub);
                }
                TokenKind::BeginEnv(name) => {
                    self.error(
                        Code::E004,
                        format!("unknown environment '{name}'"),
                        self.span(tok_start, tok_end),
                    );
                    self.pos += 1;
                }
                TokenKind::Command(name) if Cmd::of(&name) == Cmd::Item => {
                    if let Some(done) = current.take() {
                        self.finish_item(done, &mut items);
                    }
                    current = Some(ItemBuilder::new(tok_start));
                    self.pos += 1;
                }
                TokenKind::Command(name) if Cmd::of(&name).is_block() => {
                    self.error(
                        Code::E002,
                        "environment 'itemize' is not closed",
                        self.span(tok_start, tok_end),
                    );
                    break;
                }
                TokenKind::Text(t) if current.is_none() && t.trim().is_empty() => {
                    self.pos += 1;
                }
                TokenKind::RBrace => {
                    self.error(Code::E001, "unbalanced '}'", self.span(tok_start, tok_end));
                    self.pos += 1;
                }
                _ => match current.as_mut() {
                    Some(item) => self.inline(&mut item.content),
                    None => {
                        self.error(
                            Code::E003,
                            "list content before the first \\item",
                            self.span(tok_start, tok_end),
                        );
                        let mut discard = Vec::new();
                        self.inline(&mut discard);
                    }
                },
            }
            end = end.max(self.prev_end());
        }
        if let Some(done) = current.take() {
            self.finish_item(done, &mut items);
        }
        self.blank = false;
        ListBlock {
            items,
            span: self.span(start, end.max(start)),
        }
    }

    fn finish_item(&mut self, item: ItemBuilder, items: &mut Vec<ListItem>) {
        let end = self.prev_end().max(item.start);
        let span = self.span(item.start, end);
        let content = finish_inline(item.content);
        if content.is_empty() && item.sublists.is_empty() {
            self.error(Code::E004, "empty \\item dropped", span);
            return;
        }
        items.push(ListItem {
            content,
            sublists: item.sublists,
            span,
        });
    }
}

struct ItemBuilder {
    start: usize,
    content: Vec<Inline>,
    sublists: Vec<ListBlock>,
}

impl ItemBuilder {
    fn new(start: usize) -> Self {
        Self {
            start,
            content: Vec::new(),
            sublists: Vec::new(),
        }
    }
}

/// Canonical inline form: adjacent text merged, whitespace runs collapsed,
/// leading and trailing whitespace of the sequence trimmed, empty text dropped.
pub(crate) fn finish_inline(raw: Vec<Inline>) -> Vec<Inline> {
    let mut out: Vec<Inline> = Vec::with_capacity(raw.len());
    for node in raw {
        if let Inline::Text { text, span } = &node {
            if let Some(Inline::Text {
                text: prev,
                span: prev_span,
            }) = out.last_mut()
            {
                prev.push_str(text);
                *prev_span = prev_span.cover(span);
                continue;
            }
        }
        out.push(node);
    }
    for node in &mut out {
        if let Inline::Text { text, .. } = node {
            *text = collapse_whitespace(text);
        }
    }
    if let Some(Inline::Text { text, .. }) = out.first_mut() {
        *text = text.trim_start().to_string();
    }
    if let Some(Inline::Text { text, .. }) = out.last_mut() {
        *text = text.trim_end().to_string();
    }
    out.retain(|n| !matches!(n, Inline::Text { text, .. } if text.is_empty()));
    out
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_ws = false;
    for c in s.chars() {
        if c.is_whitespace() {
            if !in_ws {
                out.push(' ');
            }
            in_ws = true;
        } else {
            out.push(c);
            in_ws = false;
        }
    }
    out
}
