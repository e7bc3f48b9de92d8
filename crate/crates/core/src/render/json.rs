use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::analyzer::{walk_sections, AnalyzedDocument, NodePath};
use crate::model::{normalize_text, plain_text, Block, Inline, Section, Severity, SourceSpan};
use crate::render::markup::blocks_markup;

pub const SCHEMA_VERSION: u32 = 1;

// Field order in these structs is the documented key order of the export.

#[derive(Serialize)]
struct Export {
    schema_version: u32,
    title: Option<String>,
    sections: Vec<SectionOut>,
    definitions: Vec<DefinitionOut>,
    references: Vec<ReferenceOut>,
    legislation: Vec<LegislationOut>,
    variables: Vec<String>,
    types_index: BTreeMap<String, Vec<String>>,
    diagnostics: Vec<DiagnosticOut>,
}

#[derive(Serialize)]
struct SectionOut {
    number: String,
    label: Option<String>,
    types: Vec<String>,
    title_text: String,
    content_markup: String,
    children: Vec<SectionOut>,
}

#[derive(Serialize)]
struct DefinitionOut {
    term: String,
    text: String,
    use_count: usize,
    use_locations: Vec<Location>,
}

#[derive(Serialize)]
struct ReferenceOut {
    target: String,
    resolved: Option<String>,
}

#[derive(Serialize)]
struct LegislationOut {
    raw: String,
    canonical: String,
    locations: Vec<Location>,
}

#[derive(Serialize)]
struct DiagnosticOut {
    code: String,
    severity: Severity,
    line: usize,
    col: usize,
    message: String,
}

#[derive(Serialize)]
struct Location {
    line: usize,
    col: usize,
}

impl From<&SourceSpan> for Location {
    fn from(span: &SourceSpan) -> Self {
        Location {
            line: span.line,
            col: span.col,
        }
    }
}

/// Structured export for loading into a database. Pretty-printed with a
/// trailing newline; identical analyses give identical bytes.
pub fn render_json(analyzed: &AnalyzedDocument) -> String {
    let doc = &analyzed.doc;
    let export = Export {
        schema_version: SCHEMA_VERSION,
        title: doc.title.as_ref().map(|t| normalize_text(&plain_text(t))),
        sections: sections(analyzed, &doc.body, &mut Vec::new()),
        definitions: analyzed
            .tables
            .definitions
            .iter()
            .map(|(term, entry)| DefinitionOut {
                term: term.clone(),
                text: normalize_text(&plain_text(&entry.definition)),
                use_count: entry.uses.len(),
                use_locations: entry.uses.iter().map(Location::from).collect(),
            })
            .collect(),
        references: references(analyzed),
        legislation: legislation(analyzed),
        variables: variables(analyzed),
        types_index: types_index(analyzed),
        diagnostics: analyzed
            .diagnostics
            .iter()
            .map(|d| DiagnosticOut {
                code: d.code.as_str().to_string(),
                severity: d.severity(),
                line: d.span.line,
                col: d.span.col,
                message: d.message.clone(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&export).expect("export is always serializable");
    out.push('\n');
    out
}

fn sections(analyzed: &AnalyzedDocument, blocks: &[Block], path: &mut NodePath) -> Vec<SectionOut> {
    let mut out = Vec::new();
    for (i, block) in blocks.iter().enumerate() {
        if let Block::Section(s) = block {
            path.push(i);
            out.push(section(analyzed, s, path));
            path.pop();
        }
    }
    out
}

fn section(analyzed: &AnalyzedDocument, s: &Section, path: &mut NodePath) -> SectionOut {
    let own: Vec<Block> = s.own_blocks().cloned().collect();
    SectionOut {
        number: analyzed
            .numbering
            .sections
            .get(path)
            .cloned()
            .unwrap_or_default(),
        label: s.label.clone(),
        types: s.types.clone(),
        title_text: normalize_text(&plain_text(&s.title)),
        content_markup: blocks_markup(&own),
        children: sections(analyzed, &s.children, path),
    }
}

fn references(analyzed: &AnalyzedDocument) -> Vec<ReferenceOut> {
    let mut out = Vec::new();
    analyzed.doc.for_each_inline(&mut |node| {
        if let Inline::CrossRef {
            target,
            resolved_number,
            ..
        } = node
        {
            out.push(ReferenceOut {
                target: target.clone(),
                resolved: resolved_number.clone(),
            });
        }
    });
    out
}

fn legislation(analyzed: &AnalyzedDocument) -> Vec<LegislationOut> {
    let mut out = Vec::new();
    for (canonical, uses) in &analyzed.tables.legislation {
        let mut by_raw: BTreeMap<&str, Vec<Location>> = BTreeMap::new();
        for citation in uses {
            by_raw
                .entry(&citation.raw)
                .or_default()
                .push(Location::from(&citation.span));
        }
        for (raw, locations) in by_raw {
            out.push(LegislationOut {
                raw: raw.to_string(),
                canonical: canonical.clone(),
                locations,
            });
        }
    }
    out
}

fn variables(analyzed: &AnalyzedDocument) -> Vec<String> {
    let mut names = BTreeSet::new();
    analyzed.doc.for_each_inline(&mut |node| {
        if let Inline::VarSlot { name, .. } = node {
            names.insert(name.clone());
        }
    });
    names.into_iter().collect()
}

fn types_index(analyzed: &AnalyzedDocument) -> BTreeMap<String, Vec<String>> {
    let mut index: BTreeMap<String, Vec<String>> = BTreeMap::new();
    walk_sections(&analyzed.doc.body, &mut Vec::new(), &mut |s, path| {
        let number = analyzed
            .numbering
            .sections
            .get(path)
            .cloned()
            .unwrap_or_default();
        for ty in &s.types {
            let numbers = index.entry(ty.clone()).or_default();
            if !numbers.contains(&number) {
                numbers.push(number.clone());
            }
        }
    });
    index
}
