//! Clause-level structural diff between two versions of a document.
//!
//! Sections are matched by key (explicit label, else normalized title), not
//! by similarity: retitling an unlabeled section shows as a removal plus an
//! addition. Label clauses that are negotiated so their history stays linked.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::analyzer::{walk_sections, AnalyzedDocument};
use crate::model::{normalize_text, plain_text, Block, ListBlock, Section};
use crate::render::markup::{blocks_markup, section_header};

pub const PREAMBLE_KEY: &str = "T:⟨preamble⟩";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaStatus {
    Added,
    Removed,
    Modified,
    Moved,
    Unchanged,
}

impl DeltaStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DeltaStatus::Added => "added",
            DeltaStatus::Removed => "removed",
            DeltaStatus::Modified => "modified",
            DeltaStatus::Moved => "moved",
            DeltaStatus::Unchanged => "unchanged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Keep,
    Insert,
    Delete,
}

/// A run of consecutive words sharing one operation, joined by single spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordEdit {
    pub op: EditOp,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectionDelta {
    pub status: DeltaStatus,
    pub key: String,
    pub old_number: Option<String>,
    pub new_number: Option<String>,
    /// Non-empty only for `Modified`.
    pub word_edits: Vec<WordEdit>,
    /// Full clause text of an added (new text) or removed (old text) section.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub old_path: String,
    pub new_path: String,
    /// New-document order, then removed sections in old-document order.
    pub deltas: Vec<SectionDelta>,
}

impl DiffReport {
    pub fn count(&self, status: DeltaStatus) -> usize {
        self.deltas.iter().filter(|d| d.status == status).count()
    }

    pub fn has_changes(&self) -> bool {
        self.deltas
            .iter()
            .any(|d| d.status != DeltaStatus::Unchanged)
    }
}

/// "L:" + label when present, else "T:" + normalized title text.
pub fn section_key(section: &Section) -> String {
    match &section.label {
        Some(label) => format!("L:{label}"),
        None => format!("T:{}", normalize_text(&plain_text(&section.title))),
    }
}

/// One comparable unit: a section without its subsections, or the preamble.
struct Clause {
    key: String,
    number: Option<String>,
    content: String,
    text: String,
}

fn clauses(analyzed: &AnalyzedDocument) -> Vec<Clause> {
    let doc = &analyzed.doc;
    let mut out = Vec::new();
    let preamble: Vec<Block> = doc
        .body
        .iter()
        .filter(|b| b.as_section().is_none())
        .cloned()
        .collect();
    if !preamble.is_empty() || doc.title.is_some() {
        let mut content = String::new();
        let mut text = String::new();
        if let Some(title) = &doc.title {
            content.push_str(&crate::render::markup::inline_markup(title));
            content.push('\n');
            text.push_str(&plain_text(title));
            text.push(' ');
        }
        content.push_str(&blocks_markup(&preamble));
        text.push_str(&blocks_text(preamble.iter()));
        out.push(Clause {
            key: PREAMBLE_KEY.to_string(),
            number: None,
            content: normalize_text(&content),
            text: normalize_text(&text),
        });
    }
    walk_sections(&doc.body, &mut Vec::new(), &mut |s, path| {
        let own: Vec<Block> = s.own_blocks().cloned().collect();
        let content = format!("{}\n{}", section_header(s), blocks_markup(&own));
        let text = format!("{} {}", plain_text(&s.title), blocks_text(own.iter()));
        out.push(Clause {
            key: section_key(s),
            number: analyzed.numbering.sections.get(path).cloned(),
            content: normalize_text(&content),
            text: normalize_text(&text),
        });
    });
    out
}

fn blocks_text<'a>(blocks: impl Iterator<Item = &'a Block>) -> String {
    let mut out = String::new();
    for block in blocks {
        match block {
            Block::Paragraph(p) => out.push_str(&plain_text(&p.content)),
            Block::List(l) => list_text(l, &mut out),
            Block::Define(d) => {
                out.push_str(&d.term);
                out.push_str(": ");
                out.push_str(&plain_text(&d.definition));
            }
            Block::Section(_) => {}
        }
        out.push(' ');
    }
    out
}

fn list_text(list: &ListBlock, out: &mut String) {
    for item in &list.items {
        out.push_str(&plain_text(&item.content));
        out.push(' ');
        for sub in &item.sublists {
            list_text(sub, out);
        }
    }
}

/// Pairs sections by key and classifies every section of both versions.
pub fn diff(old: &AnalyzedDocument, new: &AnalyzedDocument) -> DiffReport {
    let old_clauses = clauses(old);
    let new_clauses = clauses(new);

    let mut by_key: BTreeMap<&str, VecDeque<usize>> = BTreeMap::new();
    for (i, c) in old_clauses.iter().enumerate() {
        by_key.entry(c.key.as_str()).or_default().push_back(i);
    }
    let partner: Vec<Option<usize>> = new_clauses
        .iter()
        .map(|c| by_key.get_mut(c.key.as_str()).and_then(VecDeque::pop_front))
        .collect();

    let paired_old: Vec<usize> = partner.iter().flatten().copied().collect();
    let mut in_order = vec![false; old_clauses.len()];
    for i in longest_increasing(&paired_old) {
        in_order[paired_old[i]] = true;
    }

    let mut matched_old = vec![false; old_clauses.len()];
    let mut deltas = Vec::new();
    for (n, c) in new_clauses.iter().enumerate() {
        let delta = match partner[n] {
            None => SectionDelta {
                status: DeltaStatus::Added,
                key: c.key.clone(),
                old_number: None,
                new_number: c.number.clone(),
                word_edits: Vec::new(),
                text: Some(c.text.clone()),
            },
            Some(o) => {
                matched_old[o] = true;
                let before = &old_clauses[o];
                let (status, word_edits) = if before.content != c.content {
                    let edits = word_diff(&before.text, &c.text);
                    (DeltaStatus::Modified, edits)
                } else if in_order[o] {
                    (DeltaStatus::Unchanged, Vec::new())
                } else {
                    (DeltaStatus::Moved, Vec::new())
                };
                SectionDelta {
                    status,
                    key: c.key.clone(),
                    old_number: before.number.clone(),
                    new_number: c.number.clone(),
                    word_edits,
                    text: None,
                }
            }
        };
        deltas.push(delta);
    }
    for (o, c) in old_clauses.iter().enumerate() {
        if !matched_old[o] {
            deltas.push(SectionDelta {
                status: DeltaStatus::Removed,
                key: c.key.clone(),
                old_number: c.number.clone(),
                new_number: None,
                word_edits: Vec::new(),
                text: Some(c.text.clone()),
            });
        }
    }
    DiffReport {
        old_path: old.doc.source_path.clone(),
        new_path: new.doc.source_path.clone(),
        deltas,
    }
}

/// Indices into `seq` of one longest strictly increasing subsequence.
fn longest_increasing(seq: &[usize]) -> Vec<usize> {
    // tails[k]: index of the smallest tail of an increasing run of length k+1
    let mut tails: Vec<usize> = Vec::new();
    let mut prev = vec![usize::MAX; seq.len()];
    for (i, &v) in seq.iter().enumerate() {
        let k = tails.partition_point(|&t| seq[t] < v);
        if k > 0 {
            prev[i] = tails[k - 1];
        }
        if k == tails.len() {
            tails.push(i);
        } else {
            tails[k] = i;
        }
    }
    let mut out = Vec::with_capacity(tails.len());
    let mut cur = tails.last().copied();
    while let Some(i) = cur {
        out.push(i);
        cur = (prev[i] != usize::MAX).then_some(prev[i]);
    }
    out.reverse();
    out
}

/// Word-level LCS diff over whitespace-separated words. Within a changed
/// region deletions come before insertions.
pub fn word_diff(old: &str, new: &str) -> Vec<WordEdit> {
    let a: Vec<&str> = old.split_whitespace().collect();
    let b: Vec<&str> = new.split_whitespace().collect();
    let width = b.len() + 1;
    // lcs[i * width + j]: LCS length of a[i..] and b[j..]
    let mut lcs = vec![0u32; (a.len() + 1) * width];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            lcs[i * width + j] = if a[i] == b[j] {
                lcs[(i + 1) * width + j + 1] + 1
            } else {
                lcs[(i + 1) * width + j].max(lcs[i * width + j + 1])
            };
        }
    }

    let mut steps: Vec<(EditOp, &str)> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if i < a.len() && j < b.len() && a[i] == b[j] {
            steps.push((EditOp::Keep, a[i]));
            i += 1;
            j += 1;
        } else if j == b.len()
            || (i < a.len() && lcs[(i + 1) * width + j] >= lcs[i * width + j + 1])
        {
            steps.push((EditOp::Delete, a[i]));
            i += 1;
        } else {
            steps.push((EditOp::Insert, b[j]));
            j += 1;
        }
    }

    let mut edits: Vec<WordEdit> = Vec::new();
    for (op, word) in steps {
        match edits.last_mut() {
            Some(last) if last.op == op => {
                last.text.push(' ');
                last.text.push_str(word);
            }
            _ => edits.push(WordEdit {
                op,
                text: word.to_string(),
            }),
        }
    }
    edits
}

/// Joins the words of edits matching `keep` with single spaces.
pub fn reconstruct(edits: &[WordEdit], keep: impl Fn(EditOp) -> bool) -> String {
    edits
        .iter()
        .filter(|e| keep(e.op))
        .map(|e| e.text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Unified-style text report. Unchanged sections are listed only when
/// `show_unchanged` is set.
pub fn render_diff_text(report: &DiffReport, show_unchanged: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "--- {}", report.old_path);
    let _ = writeln!(out, "+++ {}", report.new_path);
    for delta in &report.deltas {
        if delta.status == DeltaStatus::Unchanged && !show_unchanged {
            continue;
        }
        let number = match delta.status {
            DeltaStatus::Removed => delta.old_number.as_deref(),
            _ => delta.new_number.as_deref(),
        };
        let _ = write!(out, "[{}]", delta.status.as_str());
        if let Some(number) = number {
            let _ = write!(out, " §{number}");
        }
        let _ = write!(out, " {}", delta.key);
        if delta.status == DeltaStatus::Moved {
            if let Some(old) = &delta.old_number {
                let _ = write!(out, " (was §{old})");
            }
        }
        out.push('\n');
        match delta.status {
            DeltaStatus::Added => {
                let _ = writeln!(out, "+ {}", delta.text.as_deref().unwrap_or(""));
            }
            DeltaStatus::Removed => {
                let _ = writeln!(out, "- {}", delta.text.as_deref().unwrap_or(""));
            }
            _ => {
                for edit in &delta.word_edits {
                    let prefix = match edit.op {
                        EditOp::Keep => "  ",
                        EditOp::Insert => "+ ",
                        EditOp::Delete => "- ",
                    };
                    let _ = writeln!(out, "{prefix}{}", edit.text);
                }
            }
        }
    }
    out
}

#[derive(Serialize)]
struct DiffExport<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a DiffReport,
}

pub fn render_diff_json(report: &DiffReport) -> String {
    let export = DiffExport {
        schema_version: 1,
        report,
    };
    let mut out = serde_json::to_string_pretty(&export).expect("report is always serializable");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::analyze_source;

    fn report(old: &str, new: &str) -> DiffReport {
        diff(
            &analyze_source(old, "old.lexm"),
            &analyze_source(new, "new.lexm"),
        )
    }

    #[test]
    fn keys() {
        let (doc, _) = crate::parser::parse(
            "\\section[\\label{Dispute Resolution}]{Disputes}\n\\section{  Permitted   disclosure }",
            "t.lexm",
        );
        let keys: Vec<String> = doc.sections().map(section_key).collect();
        assert_eq!(keys, ["L:Dispute Resolution", "T:Permitted disclosure"]);
    }

    #[test]
    fn identical_documents() {
        let src = "Preamble.\n\\section{A}\nx\n\\subsection{B}\ny";
        let r = report(src, src);
        assert_eq!(r.deltas.len(), 3);
        assert!(!r.has_changes());
        assert_eq!(render_diff_text(&r, false), "--- old.lexm\n+++ new.lexm\n");
    }

    #[test]
    fn statuses() {
        let r = report(
            "\\section{A}\na\n\\section{B}\nb\n\\section{C}\nc",
            "\\section{B}\nb\n\\section{A}\na\n\\section{C}\nc changed\n\\section{D}\nd",
        );
        let got: Vec<(DeltaStatus, &str)> = r
            .deltas
            .iter()
            .map(|d| (d.status, d.key.as_str()))
            .collect();
        assert_eq!(
            got,
            [
                (DeltaStatus::Moved, "T:B"),
                (DeltaStatus::Unchanged, "T:A"),
                (DeltaStatus::Modified, "T:C"),
                (DeltaStatus::Added, "T:D"),
            ]
        );
        let text = render_diff_text(&r, false);
        assert!(text.contains("[moved] §1 T:B (was §2)\n"));
        assert!(text.contains("[modified] §3 T:C\n  C c\n+ changed\n"));
        assert!(text.contains("[added] §4 T:D\n+ D d\n"));
        let back = report(
            "\\section{B}\nb\n\\section{A}\na\n\\section{C}\nc changed\n\\section{D}\nd",
            "\\section{A}\na\n\\section{B}\nb\n\\section{C}\nc",
        );
        assert!(render_diff_text(&back, false).contains("[removed] §4 T:D\n- D d\n"));
    }

    #[test]
    fn word_edits_group_runs() {
        let edits = word_diff(
            "to a Prospective Investor; or",
            "to a Permitted Investor; or",
        );
        assert_eq!(
            edits,
            [
                WordEdit {
                    op: EditOp::Keep,
                    text: "to a".into()
                },
                WordEdit {
                    op: EditOp::Delete,
                    text: "Prospective".into()
                },
                WordEdit {
                    op: EditOp::Insert,
                    text: "Permitted".into()
                },
                WordEdit {
                    op: EditOp::Keep,
                    text: "Investor; or".into()
                },
            ]
        );
        assert!(word_diff("", "").is_empty());
    }

    #[test]
    fn lis_picks_longest_run() {
        let seq = [3, 0, 1, 4, 2];
        let picked: Vec<usize> = longest_increasing(&seq).iter().map(|&i| seq[i]).collect();
        assert_eq!(picked, [0, 1, 2]);
        assert!(longest_increasing(&[]).is_empty());
    }

    #[test]
    fn json_has_schema_version() {
        let r = report("\\section{A}\na", "\\section{A}\nb");
        let v: serde_json::Value = serde_json::from_str(&render_diff_json(&r)).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["deltas"][0]["status"], "modified");
        assert_eq!(v["deltas"][0]["word_edits"][1]["op"], "delete");
    }
}
