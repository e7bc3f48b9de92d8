//! Document tree, source positions, and diagnostics shared by every pass.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

/// Location of a node or finding in a source file.
///
/// Byte offsets refer to the LF-normalized text the parser saw; `line` and
/// `col` are 1-based, with `col` counted in characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub path: Arc<str>,
    pub byte_start: usize,
    pub byte_end: usize,
    pub line: usize,
    pub col: usize,
}

impl Default for SourceSpan {
    fn default() -> Self {
        Self {
            path: Arc::from(""),
            byte_start: 0,
            byte_end: 0,
            line: 1,
            col: 1,
        }
    }
}

impl SourceSpan {
    pub fn new(
        path: Arc<str>,
        byte_start: usize,
        byte_end: usize,
        line: usize,
        col: usize,
    ) -> Self {
        debug_assert!(byte_start <= byte_end);
        Self {
            path,
            byte_start,
            byte_end,
            line,
            col,
        }
    }

    /// Smallest span covering both `self` and `other`. Position data comes from
    /// whichever starts first.
    pub fn cover(&self, other: &SourceSpan) -> SourceSpan {
        let (first, _) = if other.byte_start < self.byte_start {
            (other, self)
        } else {
            (self, other)
        };
        SourceSpan {
            path: first.path.clone(),
            byte_start: first.byte_start,
            byte_end: self.byte_end.max(other.byte_end),
            line: first.line,
            col: first.col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Every diagnostic code the toolchain can emit.
///
/// The leading letter encodes the severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    /// Malformed escape sequence, kept as literal text.
    W001,
    /// Unclosed or unbalanced brace, or a missing brace argument.
    E001,
    /// Environment not closed, or `\end` without a matching `\begin`.
    E002,
    /// `\item` (or list content) outside an item.
    E003,
    /// Unknown command or invalid command usage; the node is dropped.
    E004,
    /// Section level jumps by more than one.
    W005,
    /// Term used but never defined.
    E010,
    /// Term defined but never used.
    W011,
    /// Term defined more than once.
    E012,
    /// Cross-reference matches nothing.
    E020,
    /// Cross-reference matches more than one section.
    W021,
    /// List without any connective.
    W030,
    /// Connective outside the trailing position of the penultimate item.
    E031,
    /// More than one connective in a list.
    E032,
    /// List mixes `\or` and `\and`.
    E033,
    /// Citation not in canonical form (fixable).
    W040,
    /// Unbound template variable in strict mode.
    E060,
    /// Unbound template variable in draft mode.
    W060,
    /// Duplicate binding name.
    E061,
    /// Malformed bindings line.
    E062,
    /// Binding never used by the template.
    W062,
}

impl Code {
    pub const ALL: [Code; 21] = [
        Code::W001,
        Code::E001,
        Code::E002,
        Code::E003,
        Code::E004,
        Code::W005,
        Code::E010,
        Code::W011,
        Code::E012,
        Code::E020,
        Code::W021,
        Code::W030,
        Code::E031,
        Code::E032,
        Code::E033,
        Code::W040,
        Code::E060,
        Code::W060,
        Code::E061,
        Code::E062,
        Code::W062,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::W001 => "W001",
            Code::E001 => "E001",
            Code::E002 => "E002",
            Code::E003 => "E003",
            Code::E004 => "E004",
            Code::W005 => "W005",
            Code::E010 => "E010",
            Code::W011 => "W011",
            Code::E012 => "E012",
            Code::E020 => "E020",
            Code::W021 => "W021",
            Code::W030 => "W030",
            Code::E031 => "E031",
            Code::E032 => "E032",
            Code::E033 => "E033",
            Code::W040 => "W040",
            Code::E060 => "E060",
            Code::W060 => "W060",
            Code::E061 => "E061",
            Code::E062 => "E062",
            Code::W062 => "W062",
        }
    }

    pub fn severity(self) -> Severity {
        if self.as_str().starts_with('E') {
            Severity::Error
        } else {
            Severity::Warning
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// A coded finding with its location and an optional replacement text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub span: SourceSpan,
    pub fix: Option<String>,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>, span: SourceSpan) -> Self {
        Self {
            code,
            message: message.into(),
            span,
            fix: None,
        }
    }

    pub fn with_fix(mut self, fix: impl Into<String>) -> Self {
        self.fix = Some(fix.into());
        self
    }

    pub fn severity(&self) -> Severity {
        self.code.severity()
    }

    pub fn is_error(&self) -> bool {
        self.severity() == Severity::Error
    }
}

/// Sorts diagnostics by (path, byte offset, code).
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (&*a.span.path, a.span.byte_start, a.code.as_str()).cmp(&(
            &*b.span.path,
            b.span.byte_start,
            b.code.as_str(),
        ))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConnectiveKind {
    Or,
    And,
}

impl ConnectiveKind {
    pub fn word(self) -> &'static str {
        match self {
            ConnectiveKind::Or => "or",
            ConnectiveKind::And => "and",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inline {
    Text {
        text: String,
        span: SourceSpan,
    },
    /// Usage of a defined term (`\def`).
    TermUse {
        term: String,
        span: SourceSpan,
    },
    /// Legislation or case citation (`\leg`). `canonical` is filled by analysis.
    LegCite {
        raw: String,
        canonical: Option<String>,
        span: SourceSpan,
    },
    /// Reference to another clause (`\ref`). `resolved_number` is filled by analysis.
    CrossRef {
        target: String,
        resolved_number: Option<String>,
        span: SourceSpan,
    },
    /// Template slot (`\var`).
    VarSlot {
        name: String,
        span: SourceSpan,
    },
    Connective {
        kind: ConnectiveKind,
        span: SourceSpan,
    },
}

impl Inline {
    pub fn text(text: impl Into<String>) -> Self {
        Inline::Text {
            text: text.into(),
            span: SourceSpan::default(),
        }
    }

    pub fn span(&self) -> &SourceSpan {
        match self {
            Inline::Text { span, .. }
            | Inline::TermUse { span, .. }
            | Inline::LegCite { span, .. }
            | Inline::CrossRef { span, .. }
            | Inline::VarSlot { span, .. }
            | Inline::Connective { span, .. } => span,
        }
    }

    pub fn span_mut(&mut self) -> &mut SourceSpan {
        match self {
            Inline::Text { span, .. }
            | Inline::TermUse { span, .. }
            | Inline::LegCite { span, .. }
            | Inline::CrossRef { span, .. }
            | Inline::VarSlot { span, .. }
            | Inline::Connective { span, .. } => span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    /// 1 for `\section`, 2 for `\subsection`, 3 for `\subsubsection`.
    pub level: u8,
    pub types: Vec<String>,
    pub label: Option<String>,
    pub title: Vec<Inline>,
    pub children: Vec<Block>,
    pub span: SourceSpan,
}

impl Section {
    /// Child sections, skipping other blocks.
    pub fn subsections(&self) -> impl Iterator<Item = &Section> {
        self.children.iter().filter_map(Block::as_section)
    }

    /// The section's own content: every child that is not a section.
    pub fn own_blocks(&self) -> impl Iterator<Item = &Block> {
        self.children.iter().filter(|b| b.as_section().is_none())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    pub content: Vec<Inline>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListBlock {
    pub items: Vec<ListItem>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListItem {
    /// May be empty only when `sublists` is not.
    pub content: Vec<Inline>,
    pub sublists: Vec<ListBlock>,
    pub span: SourceSpan,
}

/// Declaration of a defined term (`\define{Term}{definition}`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefineBlock {
    pub term: String,
    pub definition: Vec<Inline>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Section(Section),
    Paragraph(Paragraph),
    List(ListBlock),
    Define(DefineBlock),
}

impl Block {
    pub fn as_section(&self) -> Option<&Section> {
        match self {
            Block::Section(s) => Some(s),
            _ => None,
        }
    }

    pub fn span(&self) -> &SourceSpan {
        match self {
            Block::Section(s) => &s.span,
            Block::Paragraph(p) => &p.span,
            Block::List(l) => &l.span,
            Block::Define(d) => &d.span,
        }
    }
}

/// The parse of one source file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub title: Option<Vec<Inline>>,
    pub body: Vec<Block>,
    pub source_path: String,
}

impl Document {
    /// Top-level sections of the body.
    pub fn sections(&self) -> impl Iterator<Item = &Section> {
        self.body.iter().filter_map(Block::as_section)
    }

    /// Calls `f` on every span in the tree.
    pub fn for_each_span_mut(&mut self, f: &mut impl FnMut(&mut SourceSpan)) {
        if let Some(title) = &mut self.title {
            title.iter_mut().for_each(|i| f(i.span_mut()));
        }
        for block in &mut self.body {
            block_spans_mut(block, f);
        }
    }

    /// Visits every inline node in document order: title first, then the
    /// body depth-first.
    pub fn for_each_inline(&self, f: &mut impl FnMut(&Inline)) {
        if let Some(title) = &self.title {
            title.iter().for_each(&mut *f);
        }
        fn walk<'a>(items: impl Iterator<Item = &'a Block>, f: &mut impl FnMut(&Inline)) {
            for block in items {
                match block {
                    Block::Section(s) => {
                        s.title.iter().for_each(&mut *f);
                        walk(s.children.iter(), f);
                    }
                    Block::Paragraph(p) => p.content.iter().for_each(&mut *f),
                    Block::List(l) => list(l, f),
                    Block::Define(d) => d.definition.iter().for_each(&mut *f),
                }
            }
        }
        fn list(l: &ListBlock, f: &mut impl FnMut(&Inline)) {
            for item in &l.items {
                item.content.iter().for_each(&mut *f);
                item.sublists.iter().for_each(|s| list(s, f));
            }
        }
        walk(self.body.iter(), f);
    }

    /// Mutable counterpart of [`Document::for_each_inline`].
    pub fn for_each_inline_mut(&mut self, f: &mut impl FnMut(&mut Inline)) {
        if let Some(title) = &mut self.title {
            title.iter_mut().for_each(&mut *f);
        }
        fn walk<'a>(items: impl Iterator<Item = &'a mut Block>, f: &mut impl FnMut(&mut Inline)) {
            for block in items {
                match block {
                    Block::Section(s) => {
                        s.title.iter_mut().for_each(&mut *f);
                        walk(s.children.iter_mut(), f);
                    }
                    Block::Paragraph(p) => p.content.iter_mut().for_each(&mut *f),
                    Block::List(l) => list(l, f),
                    Block::Define(d) => d.definition.iter_mut().for_each(&mut *f),
                }
            }
        }
        fn list(l: &mut ListBlock, f: &mut impl FnMut(&mut Inline)) {
            for item in &mut l.items {
                item.content.iter_mut().for_each(&mut *f);
                item.sublists.iter_mut().for_each(|s| list(s, f));
            }
        }
        walk(self.body.iter_mut(), f);
    }

    /// Visits every list, nested lists included, in document order.
    pub fn for_each_list(&self, f: &mut impl FnMut(&ListBlock)) {
        fn walk<'a>(items: impl Iterator<Item = &'a Block>, f: &mut impl FnMut(&ListBlock)) {
            for block in items {
                match block {
                    Block::Section(s) => walk(s.children.iter(), f),
                    Block::List(l) => list(l, f),
                    _ => {}
                }
            }
        }
        fn list(l: &ListBlock, f: &mut impl FnMut(&ListBlock)) {
            f(l);
            for item in &l.items {
                item.sublists.iter().for_each(|s| list(s, f));
            }
        }
        walk(self.body.iter(), f);
    }

    /// Equality that ignores spans and the source path.
    pub fn structurally_eq(&self, other: &Document) -> bool {
        let (a, b) = (self.without_spans(), other.without_spans());
        a.title == b.title && a.body == b.body
    }

    /// Copy of the document with every span reset to the default.
    pub fn without_spans(&self) -> Document {
        let mut doc = self.clone();
        doc.for_each_span_mut(&mut |s| *s = SourceSpan::default());
        doc
    }
}

fn block_spans_mut(block: &mut Block, f: &mut impl FnMut(&mut SourceSpan)) {
    match block {
        Block::Section(s) => {
            f(&mut s.span);
            s.title.iter_mut().for_each(|i| f(i.span_mut()));
            for child in &mut s.children {
                block_spans_mut(child, f);
            }
        }
        Block::Paragraph(p) => {
            f(&mut p.span);
            p.content.iter_mut().for_each(|i| f(i.span_mut()));
        }
        Block::List(l) => list_spans_mut(l, f),
        Block::Define(d) => {
            f(&mut d.span);
            d.definition.iter_mut().for_each(|i| f(i.span_mut()));
        }
    }
}

fn list_spans_mut(list: &mut ListBlock, f: &mut impl FnMut(&mut SourceSpan)) {
    f(&mut list.span);
    for item in &mut list.items {
        f(&mut item.span);
        item.content.iter_mut().for_each(|i| f(i.span_mut()));
        for sub in &mut item.sublists {
            list_spans_mut(sub, f);
        }
    }
}

/// Flattens an inline sequence into readable text.
///
/// Terms print as themselves, citations in canonical form when known,
/// cross-references as their resolved number (or target when unresolved),
/// variable slots as `⟨name⟩`, and connectives as their English word.
pub fn plain_text(content: &[Inline]) -> String {
    let mut out = String::new();
    for node in content {
        match node {
            Inline::Text { text, .. } => out.push_str(text),
            Inline::TermUse { term, .. } => out.push_str(term),
            Inline::LegCite { raw, canonical, .. } => {
                out.push_str(canonical.as_deref().unwrap_or(raw))
            }
            Inline::CrossRef {
                target,
                resolved_number,
                ..
            } => out.push_str(resolved_number.as_deref().unwrap_or(target)),
            Inline::VarSlot { name, .. } => {
                out.push('⟨');
                out.push_str(name);
                out.push('⟩');
            }
            Inline::Connective { kind, .. } => out.push_str(kind.word()),
        }
    }
    out
}

/// Trims and collapses whitespace runs to single spaces. Case is preserved.
pub fn normalize_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn conn(kind: ConnectiveKind) -> Inline {
        Inline::Connective {
            kind,
            span: SourceSpan::default(),
        }
    }

    #[test]
    fn plain_text_of_figure_item() {
        let content = vec![
            Inline::text("to a "),
            Inline::TermUse {
                term: "Prospective Investor".into(),
                span: SourceSpan::default(),
            },
            Inline::text("; "),
            conn(ConnectiveKind::Or),
        ];
        assert_eq!(plain_text(&content), "to a Prospective Investor; or");
    }

    #[test]
    fn plain_text_edge_forms() {
        assert_eq!(plain_text(&[]), "");
        let slot = Inline::VarSlot {
            name: "PurchasePrice".into(),
            span: SourceSpan::default(),
        };
        assert_eq!(plain_text(&[slot]), "⟨PurchasePrice⟩");

        let unresolved = Inline::CrossRef {
            target: "X".into(),
            resolved_number: None,
            span: SourceSpan::default(),
        };
        let resolved = Inline::CrossRef {
            target: "X".into(),
            resolved_number: Some("19".into()),
            span: SourceSpan::default(),
        };
        assert_eq!(plain_text(&[unresolved]), "X");
        assert_eq!(plain_text(&[resolved]), "19");

        let cite = Inline::LegCite {
            raw: "Act s 1".into(),
            canonical: Some("Act section 1".into()),
            span: SourceSpan::default(),
        };
        assert_eq!(plain_text(&[cite]), "Act section 1");
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize_text("  Dispute   Resolution "),
            "Dispute Resolution"
        );
        assert_eq!(
            normalize_text("Confidential Information"),
            "Confidential Information"
        );
        assert_eq!(normalize_text("a\t\nb"), "a b");
        assert_eq!(normalize_text("Law"), "Law");
        assert_ne!(normalize_text("Law"), normalize_text("law"));
    }

    #[test]
    fn severity_follows_code_prefix() {
        for code in Code::ALL {
            let expected = if code.as_str().starts_with('E') {
                Severity::Error
            } else {
                Severity::Warning
            };
            assert_eq!(code.severity(), expected, "{code}");
        }
    }

    #[test]
    fn structural_equality_ignores_spans() {
        let mut a = Document {
            body: vec![Block::Paragraph(Paragraph {
                content: vec![Inline::text("x")],
                span: SourceSpan::default(),
            })],
            ..Default::default()
        };
        let b = a.clone();
        a.for_each_span_mut(&mut |s| {
            s.byte_start = 3;
            s.byte_end = 9;
        });
        assert_ne!(a, b);
        assert!(a.structurally_eq(&b));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC*") {
            let once = normalize_text(&s);
            prop_assert_eq!(normalize_text(&once), once.clone());
            prop_assert!(!once.starts_with(' ') && !once.ends_with(' '));
            prop_assert!(!once.contains("  "));
        }
    }
}
