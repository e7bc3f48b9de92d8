//! Toolchain for a LaTeX-style legal drafting markup: parsing, semantic
//! checks, rendering, template filling, clause-level diff, and corpus
//! analytics.

pub mod analyzer;
pub mod cli;
pub mod corpus;
pub mod docdiff;
pub mod model;
pub mod parser;
pub mod render;
pub mod template;

pub use analyzer::{analyze, analyze_source, AnalyzedDocument};
pub use docdiff::{diff, render_diff_json, render_diff_text, DiffReport};
pub use model::{
    normalize_text, plain_text, Block, Code, ConnectiveKind, DefineBlock, Diagnostic, Document,
    Inline, ListBlock, ListItem, Paragraph, Section, Severity, SourceSpan,
};
pub use parser::{parse, tokenize};
pub use render::{render_html, render_json, render_markup, render_text, TextOptions};
pub use template::{fill, parse_bindings, VarBindings};
