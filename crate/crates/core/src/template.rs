//! Variable bindings files and `\var` slot filling.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::model::{sort_diagnostics, Code, Diagnostic, Document, Inline, SourceSpan};
use crate::parser::{is_identifier, normalize_newlines};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub value: String,
    /// Position of the binding's name in the bindings file.
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarBindings {
    /// Keys are valid identifiers.
    pub bindings: BTreeMap<String, Binding>,
    pub source_path: String,
}

impl VarBindings {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.bindings.get(name).map(|b| b.value.as_str())
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

/// Reads `name = value` lines. `#` starts a comment line; blank lines are
/// skipped. The value is everything after the first `=`, trimmed.
pub fn parse_bindings(text: &str, path: &str) -> (VarBindings, Vec<Diagnostic>) {
    let text = normalize_newlines(text);
    let file: Arc<str> = Arc::from(path);
    let mut out = VarBindings {
        bindings: BTreeMap::new(),
        source_path: path.to_string(),
    };
    let mut diags = Vec::new();
    let mut offset = 0;
    for (index, line) in text.split('\n').enumerate() {
        let line_start = offset;
        offset += line.len() + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lead = line.len() - trimmed.len();
        let col = line[..lead].chars().count() + 1;
        let span = SourceSpan::new(
            file.clone(),
            line_start + lead,
            line_start + line.trim_end().len(),
            index + 1,
            col,
        );
        let Some((name, value)) = trimmed.split_once('=') else {
            diags.push(Diagnostic::new(
                Code::E062,
                "malformed binding line; expected 'name = value'",
                span,
            ));
            continue;
        };
        let name = name.trim();
        if !is_identifier(name) {
            diags.push(Diagnostic::new(
                Code::E062,
                format!("malformed binding line; '{name}' is not a valid variable name"),
                span,
            ));
            continue;
        }
        let name_span = SourceSpan::new(
            file.clone(),
            span.byte_start,
            span.byte_start + name.len(),
            span.line,
            span.col,
        );
        if out.bindings.contains_key(name) {
            diags.push(Diagnostic::new(
                Code::E061,
                format!("variable '{name}' is bound more than once; keeping the first value"),
                name_span,
            ));
            continue;
        }
        out.bindings.insert(
            name.to_string(),
            Binding {
                value: value.trim().to_string(),
                span: name_span,
            },
        );
    }
    sort_diagnostics(&mut diags);
    (out, diags)
}

/// Replaces every bound `\var` slot with a Text node holding its value.
///
/// Unbound slots stay in place and report E060 (strict) or W060 (draft).
/// Each binding that fills no slot reports W062. Only VarSlot nodes change.
pub fn fill(doc: &Document, bindings: &VarBindings, strict: bool) -> (Document, Vec<Diagnostic>) {
    let mut doc = doc.clone();
    let mut used = BTreeSet::new();
    let mut diags = Vec::new();
    doc.for_each_inline_mut(&mut |node| {
        let Inline::VarSlot { name, span } = node else {
            return;
        };
        match bindings.bindings.get(name.as_str()) {
            Some(binding) => {
                used.insert(name.clone());
                *node = Inline::Text {
                    text: binding.value.clone(),
                    span: span.clone(),
                };
            }
            None if strict => diags.push(Diagnostic::new(
                Code::E060,
                format!("variable '{name}' has no binding"),
                span.clone(),
            )),
            None => diags.push(Diagnostic::new(
                Code::W060,
                format!("variable '{name}' has no binding; slot left unfilled"),
                span.clone(),
            )),
        }
    });
    for (name, binding) in &bindings.bindings {
        if !used.contains(name) {
            diags.push(Diagnostic::new(
                Code::W062,
                format!("binding '{name}' is not used by the document"),
                binding.span.clone(),
            ));
        }
    }
    sort_diagnostics(&mut diags);
    (doc, diags)
}
