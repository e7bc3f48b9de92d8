//! Clause extraction and statistics across many documents.
//!
//! A `\type` applies only to the section that carries it; subsections do not
//! inherit it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::analyzer::{walk_sections, AnalyzedDocument};
use crate::docdiff::section_key;
use crate::model::{normalize_text, plain_text, Block, ListBlock, Section};
use crate::render::markup::render_markup;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Type(String),
    Label(String),
}

impl Selector {
    fn matches(&self, section: &Section) -> bool {
        match self {
            Selector::Type(t) => section.types.iter().any(|ty| ty == t),
            Selector::Label(l) => section_key(section) == format!("L:{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub source_path: String,
    pub number: String,
    /// Canonical markup of the section and its subsections, with levels
    /// shifted so the fragment's root is a `\section`.
    pub markup: String,
}

/// Every matching section, files ordered by path, sections in document order.
pub fn extract(docs: &[AnalyzedDocument], selector: &Selector) -> Vec<Fragment> {
    let mut ordered: Vec<&AnalyzedDocument> = docs.iter().collect();
    ordered.sort_by(|a, b| a.doc.source_path.cmp(&b.doc.source_path));
    let mut out = Vec::new();
    for analyzed in ordered {
        walk_sections(&analyzed.doc.body, &mut Vec::new(), &mut |s, path| {
            if !selector.matches(s) {
                return;
            }
            let mut root = s.clone();
            rebase(&mut root, s.level.saturating_sub(1));
            let fragment = crate::model::Document {
                title: None,
                body: vec![Block::Section(root)],
                source_path: analyzed.doc.source_path.clone(),
            };
            out.push(Fragment {
                source_path: analyzed.doc.source_path.clone(),
                number: analyzed
                    .numbering
                    .sections
                    .get(path)
                    .cloned()
                    .unwrap_or_default(),
                markup: render_markup(&fragment),
            });
        });
    }
    out
}

fn rebase(section: &mut Section, shift: u8) {
    section.level = section.level.saturating_sub(shift).max(1);
    for child in &mut section.children {
        if let Block::Section(s) = child {
            rebase(s, shift);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeStat {
    #[serde(rename = "type")]
    pub type_name: String,
    pub doc_count: usize,
    /// `doc_count / CorpusStats::doc_count`, rounded to 4 decimals.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemStat {
    pub text: String,
    pub doc_count: usize,
    /// `doc_count / TypeItems::denominator`, rounded to 4 decimals.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeItems {
    #[serde(rename = "type")]
    pub type_name: String,
    /// Documents containing at least one section of this type.
    pub denominator: usize,
    pub items: Vec<ItemStat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub type_stats: Vec<TypeStat>,
    pub item_frequencies: Vec<TypeItems>,
}

pub fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

/// Comparison form of a list item: casefolded, whitespace-collapsed, with
/// trailing punctuation and a trailing "or"/"and" removed.
pub fn normalize_item(text: &str) -> String {
    let mut s = normalize_text(text).to_lowercase();
    loop {
        let before = s.len();
        s = s
            .trim_end_matches(|c: char| c.is_whitespace() || ";,.:!?".contains(c))
            .to_string();
        for word in ["or", "and"] {
            if s == word {
                s.clear();
            } else if let Some(rest) = s.strip_suffix(word) {
                if rest.ends_with(|c: char| c.is_whitespace() || ";,.:!?".contains(c)) {
                    s = rest.to_string();
                }
            }
        }
        if s.len() == before {
            return s;
        }
    }
}

fn collect_items(list: &ListBlock, out: &mut BTreeSet<String>) {
    for item in &list.items {
        let text = normalize_item(&plain_text(&item.content));
        if !text.is_empty() {
            out.insert(text);
        }
        for sub in &item.sublists {
            collect_items(sub, out);
        }
    }
}

/// Per-type document counts and item frequencies. Independent of input order.
pub fn stats(docs: &[AnalyzedDocument]) -> CorpusStats {
    // type -> (documents with the type, item text -> documents listing it)
    let mut per_type: BTreeMap<String, (usize, BTreeMap<String, usize>)> = BTreeMap::new();
    for analyzed in docs {
        let mut doc_items: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        walk_sections(&analyzed.doc.body, &mut Vec::new(), &mut |s, _| {
            for ty in &s.types {
                let items = doc_items.entry(ty.clone()).or_default();
                for block in s.own_blocks() {
                    if let Block::List(l) = block {
                        collect_items(l, items);
                    }
                }
            }
        });
        for (ty, items) in doc_items {
            let entry = per_type.entry(ty).or_default();
            entry.0 += 1;
            for item in items {
                *entry.1.entry(item).or_default() += 1;
            }
        }
    }

    let doc_count = docs.len();
    let mut type_stats: Vec<TypeStat> = per_type
        .iter()
        .map(|(ty, (count, _))| TypeStat {
            type_name: ty.clone(),
            doc_count: *count,
            fraction: round4(*count as f64 / doc_count as f64),
        })
        .collect();
    type_stats.sort_by(|a, b| {
        b.doc_count
            .cmp(&a.doc_count)
            .then_with(|| a.type_name.cmp(&b.type_name))
    });

    let mut item_frequencies: Vec<TypeItems> = per_type
        .into_iter()
        .map(|(ty, (denominator, items))| {
            let mut items: Vec<ItemStat> = items
                .into_iter()
                .map(|(text, count)| ItemStat {
                    text,
                    doc_count: count,
                    fraction: round4(count as f64 / denominator as f64),
                })
                .collect();
            items.sort_by(|a, b| {
                b.doc_count
                    .cmp(&a.doc_count)
                    .then_with(|| a.text.cmp(&b.text))
            });
            TypeItems {
                type_name: ty,
                denominator,
                items,
            }
        })
        .collect();
    item_frequencies.sort_by(|a, b| {
        b.denominator
            .cmp(&a.denominator)
            .then_with(|| a.type_name.cmp(&b.type_name))
    });

    CorpusStats {
        doc_count,
        type_stats,
        item_frequencies,
    }
}

pub fn render_stats_text(stats: &CorpusStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "documents: {}", stats.doc_count);
    if stats.type_stats.is_empty() {
        return out;
    }
    let width = stats
        .type_stats
        .iter()
        .map(|t| t.type_name.chars().count())
        .max()
        .unwrap_or(0)
        .max(4);
    let _ = writeln!(
        out,
        "\n{:<width$}  {:>4}  {:>8}",
        "type", "docs", "fraction"
    );
    for t in &stats.type_stats {
        let _ = writeln!(
            out,
            "{:<width$}  {:>4}  {:>8.4}",
            t.type_name, t.doc_count, t.fraction
        );
    }
    for group in &stats.item_frequencies {
        if group.items.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            "\nitems in {} ({} documents)\n{:>4}  {:>8}  item",
            group.type_name, group.denominator, "docs", "fraction"
        );
        for item in &group.items {
            let _ = writeln!(
                out,
                "{:>4}  {:>8.4}  {}",
                item.doc_count, item.fraction, item.text
            );
        }
    }
    out
}

#[derive(Serialize)]
struct StatsExport<'a> {
    schema_version: u32,
    #[serde(flatten)]
    stats: &'a CorpusStats,
}

pub fn render_stats_json(stats: &CorpusStats) -> String {
    let mut out = serde_json::to_string_pretty(&StatsExport {
        schema_version: 1,
        stats,
    })
    .expect("stats are always serializable");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::analyze_source;

    #[test]
    fn item_normalization() {
        assert_eq!(
            normalize_item("to a Prospective  Investor; or"),
            "to a prospective investor"
        );
        assert_eq!(
            normalize_item("in accordance with clause 19."),
            "in accordance with clause 19"
        );
        assert_eq!(normalize_item("required by Law; and"), "required by law");
        assert_eq!(normalize_item("Door"), "door");
        assert_eq!(normalize_item("or"), "");
    }

    #[test]
    fn empty_corpus() {
        let s = stats(&[]);
        assert_eq!(s.doc_count, 0);
        assert!(s.type_stats.is_empty() && s.item_frequencies.is_empty());
        assert_eq!(render_stats_text(&s), "documents: 0\n");
    }

    #[test]
    fn extraction_rebases_levels() {
        let doc = analyze_source(
            "\\section{Top}\n\\subsection[\\type{Conf}]{Inner}\ntext\n\\subsubsection{Deep}\nmore",
            "a.lexm",
        );
        let frags = extract(&[doc], &Selector::Type("Conf".into()));
        assert_eq!(frags.len(), 1);
        assert_eq!(frags[0].number, "1.1");
        assert_eq!(
            frags[0].markup,
            "\\section[\\type{Conf}]{Inner}\n\ntext\n\n\\subsection{Deep}\n\nmore\n"
        );
        let (_, diags) = crate::parser::parse(&frags[0].markup, "f.lexm");
        assert!(diags.is_empty());
    }

    #[test]
    fn label_selector() {
        let doc = analyze_source(
            "\\section[\\label{DR}]{Disputes}\nx\n\\section{DR}\ny",
            "a.lexm",
        );
        let frags = extract(&[doc], &Selector::Label("DR".into()));
        assert_eq!(frags.len(), 1);
        assert_eq!(frags[0].number, "1");
    }
}
