//! Symbol tables, semantic checks, cross-reference resolution, citation
//! canonicalization and clause numbering.

use std::collections::{BTreeMap, HashMap};

use crate::model::{
    normalize_text, plain_text, sort_diagnostics, Block, Code, ConnectiveKind, Diagnostic,
    Document, Inline, ListBlock, Section, SourceSpan,
};

/// Position of a node as indices into nested child vectors.
///
/// For sections the indices walk `body`/`children`. For list items the path
/// of the enclosing list is followed by the item index, and nested lists add
/// a sublist index and an item index.
pub type NodePath = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinitionEntry {
    pub definition: Vec<Inline>,
    pub decl_span: SourceSpan,
    pub uses: Vec<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelEntry {
    pub section_path: NodePath,
    pub number: String,
    /// `true` for a `\label`, `false` for a key derived from the title.
    pub explicit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationUse {
    pub raw: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTables {
    pub definitions: BTreeMap<String, DefinitionEntry>,
    /// Second and later declarations of an already defined term.
    pub duplicate_definitions: Vec<(String, SourceSpan)>,
    /// Term uses with no declaration.
    pub undefined_uses: Vec<(String, SourceSpan)>,
    /// Label and title keys, each with its sections in document order.
    pub labels: BTreeMap<String, Vec<LabelEntry>>,
    /// Canonical citation to its occurrences.
    pub legislation: BTreeMap<String, Vec<CitationUse>>,
    pub types: BTreeMap<String, Vec<NodePath>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Numbering {
    pub sections: BTreeMap<NodePath, String>,
    pub items: BTreeMap<NodePath, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzedDocument {
    /// The input with `CrossRef::resolved_number` and `LegCite::canonical` filled.
    pub doc: Document,
    pub tables: SymbolTables,
    pub numbering: Numbering,
    pub diagnostics: Vec<Diagnostic>,
}

impl AnalyzedDocument {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

/// Runs every semantic pass. Never fails; findings land in `diagnostics`.
pub fn analyze(doc: Document) -> AnalyzedDocument {
    let numbering = assign_numbers(&doc);
    let tables = build_tables(&doc, &numbering);
    let mut diagnostics = check_definitions(&tables);
    let (mut doc, mut ref_diags) = resolve_refs(doc, &tables);
    diagnostics.append(&mut ref_diags);
    diagnostics.append(&mut canonicalize_citations(&mut doc));
    diagnostics.append(&mut check_lists(&doc));
    sort_diagnostics(&mut diagnostics);
    AnalyzedDocument {
        doc,
        tables,
        numbering,
        diagnostics,
    }
}

/// Parses and analyzes one source file; parse and analysis findings are
/// merged into `diagnostics` in sorted order.
pub fn analyze_source(source: &str, path: &str) -> AnalyzedDocument {
    let (doc, mut parse_diags) = crate::parser::parse(source, path);
    let mut analyzed = analyze(doc);
    analyzed.diagnostics.append(&mut parse_diags);
    sort_diagnostics(&mut analyzed.diagnostics);
    analyzed
}

/// Bijective base-26 letters: 1 → "a", 26 → "z", 27 → "aa", 28 → "ab".
pub fn alpha_marker(mut n: usize) -> String {
    assert!(n > 0, "markers are 1-based");
    let mut letters = Vec::new();
    while n > 0 {
        n -= 1;
        letters.push(b'a' + (n % 26) as u8);
        n /= 26;
    }
    letters.reverse();
    String::from_utf8(letters).expect("ascii")
}

/// Lowercase roman numerals.
pub fn roman_marker(mut n: usize) -> String {
    assert!(n > 0, "markers are 1-based");
    const TABLE: [(usize, &str); 13] = [
        (1000, "m"),
        (900, "cm"),
        (500, "d"),
        (400, "cd"),
        (100, "c"),
        (90, "xc"),
        (50, "l"),
        (40, "xl"),
        (10, "x"),
        (9, "ix"),
        (5, "v"),
        (4, "iv"),
        (1, "i"),
    ];
    let mut out = String::new();
    for (value, digits) in TABLE {
        while n >= value {
            out.push_str(digits);
            n -= value;
        }
    }
    out
}

/// Marker of the `n`th item (1-based) of a list nested `depth` deep (1 for
/// an outermost list): `(a)`, then `(i)`, then `(A)`, then `(I)`.
pub fn item_marker(depth: usize, n: usize) -> String {
    let body = match depth {
        0 | 1 => alpha_marker(n),
        2 => roman_marker(n),
        3 => alpha_marker(n).to_uppercase(),
        _ => roman_marker(n).to_uppercase(),
    };
    format!("({body})")
}

/// Numbers every section ("1", "1.2", "1.2.3") and list item, depth-first in
/// document order. Section numbers count sibling sections only.
pub fn assign_numbers(doc: &Document) -> Numbering {
    let mut numbering = Numbering::default();
    number_blocks(&doc.body, &mut Vec::new(), None, &mut numbering);
    numbering
}

fn number_blocks(blocks: &[Block], path: &mut NodePath, parent: Option<&str>, out: &mut Numbering) {
    let mut ordinal = 0;
    for (i, block) in blocks.iter().enumerate() {
        path.push(i);
        match block {
            Block::Section(s) => {
                ordinal += 1;
                let number = match parent {
                    Some(p) => format!("{p}.{ordinal}"),
                    None => ordinal.to_string(),
                };
                out.sections.insert(path.clone(), number.clone());
                number_blocks(&s.children, path, Some(&number), out);
            }
            Block::List(l) => number_list(l, path, 1, out),
            _ => {}
        }
        path.pop();
    }
}

fn number_list(list: &ListBlock, path: &mut NodePath, depth: usize, out: &mut Numbering) {
    for (i, item) in list.items.iter().enumerate() {
        path.push(i);
        out.items.insert(path.clone(), item_marker(depth, i + 1));
        for (k, sub) in item.sublists.iter().enumerate() {
            path.push(k);
            number_list(sub, path, depth + 1, out);
            path.pop();
        }
        path.pop();
    }
}

/// Visits sections depth-first with their paths.
pub(crate) fn walk_sections<'a>(
    blocks: &'a [Block],
    path: &mut NodePath,
    f: &mut impl FnMut(&'a Section, &NodePath),
) {
    for (i, block) in blocks.iter().enumerate() {
        if let Block::Section(s) = block {
            path.push(i);
            f(s, path);
            walk_sections(&s.children, path, f);
            path.pop();
        }
    }
}

fn define_blocks<'a>(blocks: &'a [Block], out: &mut Vec<&'a crate::model::DefineBlock>) {
    for block in blocks {
        match block {
            Block::Define(d) => out.push(d),
            Block::Section(s) => define_blocks(&s.children, out),
            _ => {}
        }
    }
}

pub fn build_tables(doc: &Document, numbering: &Numbering) -> SymbolTables {
    let mut tables = SymbolTables::default();

    let mut decls = Vec::new();
    define_blocks(&doc.body, &mut decls);
    for decl in decls {
        if tables.definitions.contains_key(&decl.term) {
            tables
                .duplicate_definitions
                .push((decl.term.clone(), decl.span.clone()));
        } else {
            tables.definitions.insert(
                decl.term.clone(),
                DefinitionEntry {
                    definition: decl.definition.clone(),
                    decl_span: decl.span.clone(),
                    uses: Vec::new(),
                },
            );
        }
    }

    doc.for_each_inline(&mut |node| match node {
        Inline::TermUse { term, span } => match tables.definitions.get_mut(term) {
            Some(entry) => entry.uses.push(span.clone()),
            None => tables.undefined_uses.push((term.clone(), span.clone())),
        },
        Inline::LegCite { raw, span, .. } => tables
            .legislation
            .entry(normalize_citation(raw))
            .or_default()
            .push(CitationUse {
                raw: raw.clone(),
                span: span.clone(),
            }),
        _ => {}
    });

    walk_sections(&doc.body, &mut Vec::new(), &mut |section, path| {
        let number = numbering.sections.get(path).cloned().unwrap_or_default();
        if let Some(label) = &section.label {
            tables
                .labels
                .entry(normalize_text(label))
                .or_default()
                .push(LabelEntry {
                    section_path: path.clone(),
                    number: number.clone(),
                    explicit: true,
                });
        }
        tables
            .labels
            .entry(normalize_text(&plain_text(&section.title)))
            .or_default()
            .push(LabelEntry {
                section_path: path.clone(),
                number,
                explicit: false,
            });
        for ty in &section.types {
            tables
                .types
                .entry(ty.clone())
                .or_default()
                .push(path.clone());
        }
    });

    tables
}

/// E010 once per undefined term (at its first use), W011 per unused
/// definition, E012 per duplicate declaration.
pub fn check_definitions(tables: &SymbolTables) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut reported = std::collections::BTreeSet::new();
    for (term, span) in &tables.undefined_uses {
        if !reported.insert(term.as_str()) {
            continue;
        }
        diags.push(Diagnostic::new(
            Code::E010,
            format!("term '{term}' is used but never defined"),
            span.clone(),
        ));
    }
    for (term, entry) in &tables.definitions {
        if entry.uses.is_empty() {
            diags.push(Diagnostic::new(
                Code::W011,
                format!("term '{term}' is defined but never used"),
                entry.decl_span.clone(),
            ));
        }
    }
    for (term, span) in &tables.duplicate_definitions {
        diags.push(Diagnostic::new(
            Code::E012,
            format!("term '{term}' is already defined"),
            span.clone(),
        ));
    }
    diags
}

/// Sections a reference target would resolve to, best candidates first.
/// Explicit labels shadow title matches.
pub fn ref_candidates<'t>(tables: &'t SymbolTables, target: &str) -> Vec<&'t LabelEntry> {
    let Some(entries) = tables.labels.get(&normalize_text(target)) else {
        return Vec::new();
    };
    let explicit: Vec<&LabelEntry> = entries.iter().filter(|e| e.explicit).collect();
    if explicit.is_empty() {
        entries.iter().collect()
    } else {
        explicit
    }
}

/// Fills `resolved_number` on every cross-reference that matches a label or
/// section title.
pub fn resolve_refs(mut doc: Document, tables: &SymbolTables) -> (Document, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    doc.for_each_inline_mut(&mut |node| {
        if let Inline::CrossRef {
            target,
            resolved_number,
            span,
        } = node
        {
            let candidates = ref_candidates(tables, target);
            match candidates.first() {
                None => {
                    *resolved_number = None;
                    diags.push(Diagnostic::new(
                        Code::E020,
                        format!("reference '{target}' does not match any label or section title"),
                        span.clone(),
                    ));
                }
                Some(first) => {
                    if candidates.len() > 1 {
                        diags.push(Diagnostic::new(
                            Code::W021,
                            format!(
                                "reference '{target}' matches {} sections; using the first",
                                candidates.len()
                            ),
                            span.clone(),
                        ));
                    }
                    *resolved_number = Some(first.number.clone());
                }
            }
        }
    });
    (doc, diags)
}

/// Canonical citation form: whitespace normalized and the abbreviations
/// `s`, `s.`, `sec`, `sec.` (section), `ss`, `ss.` (sections), `cl`, `cl.`
/// (clause) expanded when they directly precede a number.
pub fn normalize_citation(raw: &str) -> String {
    let words: Vec<&str> = raw.split_whitespace().collect();
    let mut out = Vec::with_capacity(words.len());
    for (i, word) in words.iter().enumerate() {
        let before_number = words
            .get(i + 1)
            .is_some_and(|next| next.starts_with(|c: char| c.is_ascii_digit()));
        let expanded = match *word {
            "s" | "s." | "sec" | "sec." if before_number => "section",
            "ss" | "ss." if before_number => "sections",
            "cl" | "cl." if before_number => "clause",
            other => other,
        };
        out.push(expanded);
    }
    out.join(" ")
}

/// Fills `LegCite::canonical` and reports W040 (with the fix) where the raw
/// text differs from its canonical form.
fn canonicalize_citations(doc: &mut Document) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    doc.for_each_inline_mut(&mut |node| {
        if let Inline::LegCite {
            raw,
            canonical,
            span,
        } = node
        {
            let canon = normalize_citation(raw);
            if canon != *raw {
                diags.push(
                    Diagnostic::new(
                        Code::W040,
                        format!("citation '{raw}' is not in canonical form '{canon}'"),
                        span.clone(),
                    )
                    .with_fix(canon.clone()),
                );
            }
            *canonical = Some(canon);
        }
    });
    diags
}

/// Connective placement rules for every list of two or more items.
///
/// A list needs exactly one connective, placed last in its penultimate item.
/// No connective is W030; several are E032, or E033 when `\or` and `\and`
/// are mixed (which then also covers placement); a single misplaced one is
/// E031.
pub fn check_lists(doc: &Document) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    doc.for_each_list(&mut |list| {
        if list.items.len() < 2 {
            return;
        }
        let mut found: Vec<(usize, usize, ConnectiveKind, &SourceSpan)> = Vec::new();
        for (i, item) in list.items.iter().enumerate() {
            for (j, node) in item.content.iter().enumerate() {
                if let Inline::Connective { kind, span } = node {
                    found.push((i, j, *kind, span));
                }
            }
        }
        match found.as_slice() {
            [] => diags.push(Diagnostic::new(
                Code::W030,
                "list has no connective (\\or or \\and)",
                list.span.clone(),
            )),
            [(item, index, _, span)] => {
                let content = &list.items[*item].content;
                let trailing = content[index + 1..]
                    .iter()
                    .all(|n| matches!(n, Inline::Text { text, .. } if text.trim().is_empty()));
                if *item + 2 != list.items.len() || !trailing {
                    diags.push(Diagnostic::new(
                        Code::E031,
                        "connective must be the last element of the penultimate item",
                        (*span).clone(),
                    ));
                }
            }
            many => {
                let mixed = many.iter().any(|c| c.2 != many[0].2);
                let (code, message) = if mixed {
                    (Code::E033, "list mixes \\or and \\and")
                } else {
                    (Code::E032, "list has more than one connective")
                };
                diags.push(Diagnostic::new(code, message, list.span.clone()));
            }
        }
    });
    diags
}

/// Applies every fix carried by the analysis diagnostics (W040 citation
/// rewrites) to the analyzed document.
pub fn apply_fixes(analyzed: &AnalyzedDocument) -> Document {
    let fixes: HashMap<(usize, usize), &str> = analyzed
        .diagnostics
        .iter()
        .filter(|d| d.code == Code::W040)
        .filter_map(|d| {
            d.fix
                .as_deref()
                .map(|fix| ((d.span.byte_start, d.span.byte_end), fix))
        })
        .collect();
    let mut doc = analyzed.doc.clone();
    if fixes.is_empty() {
        return doc;
    }
    doc.for_each_inline_mut(&mut |node| {
        if let Inline::LegCite { raw, span, .. } = node {
            if let Some(fix) = fixes.get(&(span.byte_start, span.byte_end)) {
                *raw = (*fix).to_string();
            }
        }
    });
    doc
}
