//! Seeded document generators and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use lexm::{
    Block, ConnectiveKind, DefineBlock, Document, Inline, ListBlock, ListItem, Paragraph, Section,
    SourceSpan,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

const WORDS: &[&str] = &[
    "the",
    "party",
    "must",
    "not",
    "disclose",
    "information",
    "unless",
    "required",
    "by",
    "clause",
    "notice",
    "in",
    "writing",
    "to",
    "a",
    "person",
    "or",
    "and",
    "any",
    "other",
    "50%",
    "{braced}",
    "a\\b",
    "[1]",
    "§",
    "été",
    "Notice;",
    "fee.",
    "(x)",
    "100",
];
const TERMS: &[&str] = &[
    "Law",
    "Confidential Information",
    "Prospective Investor",
    "Business Day",
    "Price",
];
const TYPES: &[&str] = &["Confidentiality", "Insurance", "Payment"];
const CITES: &[&str] = &[
    "Corporations Act section 87",
    "Privacy Act s 6",
    "Fair Work Act ss 3-5",
    "Evidence Act cl 4",
];

fn span() -> SourceSpan {
    SourceSpan::default()
}

fn words(rng: &mut ChaCha8Rng, max: usize) -> String {
    let n = rng.gen_range(1..=max);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn identifier(rng: &mut ChaCha8Rng) -> String {
    let heads = ["Price", "Date", "Party", "x", "Amount_2", "CompletionDate"];
    heads.choose(rng).unwrap().to_string()
}

/// Canonical inline form, computed independently of the parser: adjacent
/// Text merged, whitespace runs collapsed, ends of the sequence trimmed,
/// empty Text removed.
pub fn canonical_inline(pieces: Vec<Inline>) -> Vec<Inline> {
    let mut merged: Vec<Inline> = Vec::new();
    for piece in pieces {
        match (merged.last_mut(), piece) {
            (Some(Inline::Text { text: prev, .. }), Inline::Text { text, .. }) => {
                prev.push_str(&text)
            }
            (_, piece) => merged.push(piece),
        }
    }
    let last = merged.len().saturating_sub(1);
    let mut out = Vec::new();
    for (i, node) in merged.into_iter().enumerate() {
        if let Inline::Text { text, span } = node {
            let mut t = String::new();
            let mut in_space = false;
            for c in text.chars() {
                if c.is_whitespace() {
                    in_space = true;
                } else {
                    if in_space {
                        t.push(' ');
                    }
                    in_space = false;
                    t.push(c);
                }
            }
            if in_space {
                t.push(' ');
            }
            if i == 0 {
                t = t.trim_start().to_string();
            }
            if i == last {
                t = t.trim_end().to_string();
            }
            if !t.is_empty() {
                out.push(Inline::Text { text: t, span });
            }
        } else {
            out.push(node);
        }
    }
    out
}

/// Non-empty inline content mixing every inline kind.
pub fn gen_inline(rng: &mut ChaCha8Rng, allow_connective: bool) -> Vec<Inline> {
    loop {
        let n = rng.gen_range(1..=6);
        let mut pieces = Vec::new();
        for _ in 0..n {
            let spacer = [" ", "", "  "].choose(rng).unwrap();
            pieces.push(Inline::text(*spacer));
            let node = match rng.gen_range(0..10) {
                0..=4 => Inline::text(words(rng, 5)),
                5 => Inline::TermUse {
                    term: TERMS.choose(rng).unwrap().to_string(),
                    span: span(),
                },
                6 => Inline::LegCite {
                    raw: CITES.choose(rng).unwrap().to_string(),
                    canonical: None,
                    span: span(),
                },
                7 => Inline::CrossRef {
                    target: format!("Clause {}", rng.gen_range(1..6)),
                    resolved_number: None,
                    span: span(),
                },
                8 => Inline::VarSlot {
                    name: identifier(rng),
                    span: span(),
                },
                _ if allow_connective => Inline::Connective {
                    kind: if rng.gen_bool(0.5) {
                        ConnectiveKind::Or
                    } else {
                        ConnectiveKind::And
                    },
                    span: span(),
                },
                _ => Inline::text(words(rng, 3)),
            };
            pieces.push(node);
        }
        let out = canonical_inline(pieces);
        if !out.is_empty() {
            return out;
        }
    }
}

fn gen_list(rng: &mut ChaCha8Rng, depth: usize) -> ListBlock {
    let n = rng.gen_range(1..=4);
    let items = (0..n)
        .map(|_| {
            let sublists = if depth < 4 && rng.gen_bool(0.25) {
                vec![gen_list(rng, depth + 1)]
            } else {
                Vec::new()
            };
            let content = if !sublists.is_empty() && rng.gen_bool(0.2) {
                Vec::new()
            } else {
                gen_inline(rng, true)
            };
            ListItem {
                content,
                sublists,
                span: span(),
            }
        })
        .collect();
    ListBlock {
        items,
        span: span(),
    }
}

fn gen_leaf_block(rng: &mut ChaCha8Rng) -> Block {
    match rng.gen_range(0..6) {
        0..=2 => Block::Paragraph(Paragraph {
            content: gen_inline(rng, true),
            span: span(),
        }),
        3 | 4 => Block::List(gen_list(rng, 1)),
        _ => Block::Define(DefineBlock {
            term: TERMS.choose(rng).unwrap().to_string(),
            definition: gen_inline(rng, false),
            span: span(),
        }),
    }
}

fn gen_section(rng: &mut ChaCha8Rng, level: u8, budget: &mut usize) -> Section {
    let mut types: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        types.push(TYPES.choose(rng).unwrap().to_string());
    }
    let label = rng
        .gen_bool(0.3)
        .then(|| format!("Clause {}", rng.gen_range(1..6)));
    let mut children = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        if *budget == 0 {
            break;
        }
        *budget -= 1;
        children.push(gen_leaf_block(rng));
    }
    if level < 3 {
        for _ in 0..rng.gen_range(0..=2) {
            if *budget == 0 {
                break;
            }
            *budget -= 1;
            children.push(Block::Section(gen_section(rng, level + 1, budget)));
        }
    }
    Section {
        level,
        types,
        label,
        title: gen_inline(rng, false),
        children,
        span: span(),
    }
}

/// A random document already in canonical form: sections nest at most three
/// deep and lists at most four.
pub fn gen_document(rng: &mut ChaCha8Rng) -> Document {
    let mut budget = rng.gen_range(4..=24);
    let title = rng.gen_bool(0.3).then(|| gen_inline(rng, false));
    let mut body = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        body.push(gen_leaf_block(rng));
    }
    for _ in 0..rng.gen_range(0..=4) {
        if budget == 0 {
            break;
        }
        budget -= 1;
        body.push(Block::Section(gen_section(rng, 1, &mut budget)));
    }
    Document {
        title,
        body,
        source_path: String::new(),
    }
}

/// Counts of each inline kind in a document.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub term_uses: usize,
    pub distinct_terms: usize,
    pub citations: Vec<String>,
    pub cross_refs: usize,
    pub connectives: Vec<ConnectiveKind>,
    pub var_slots: usize,
}

pub fn census(doc: &Document) -> Census {
    let mut c = Census::default();
    let mut terms = std::collections::BTreeSet::new();
    doc.for_each_inline(&mut |node| match node {
        Inline::TermUse { term, .. } => {
            c.term_uses += 1;
            terms.insert(term.clone());
        }
        Inline::LegCite { raw, canonical, .. } => c
            .citations
            .push(canonical.clone().unwrap_or_else(|| raw.clone())),
        Inline::CrossRef { .. } => c.cross_refs += 1,
        Inline::Connective { kind, .. } => c.connectives.push(*kind),
        Inline::VarSlot { .. } => c.var_slots += 1,
        Inline::Text { .. } => {}
    });
    c.distinct_terms = terms.len();
    c
}

/// Textbook memoized LCS length over words, written independently of the
/// library's table-driven version.
pub fn lcs_oracle(a: &[&str], b: &[&str]) -> usize {
    fn go(
        a: &[&str],
        b: &[&str],
        i: usize,
        j: usize,
        memo: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        if i == a.len() || j == b.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            1 + go(a, b, i + 1, j + 1, memo)
        } else {
            go(a, b, i + 1, j, memo).max(go(a, b, i, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

/// Position of the `n`th (1-based) occurrence of `needle` as (line, col),
/// col counted in characters.
pub fn locate(source: &str, needle: &str, n: usize) -> Option<(usize, usize)> {
    let offset = if needle == "<EOF>" {
        source.len()
    } else {
        source.match_indices(needle).nth(n - 1)?.0
    };
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().unwrap().chars().count() + 1;
    Some((line, col))
}

/// Random small edit to a generated document, for diff tests.
pub fn mutate(rng: &mut ChaCha8Rng, doc: &Document) -> Document {
    let mut out = doc.clone();
    match rng.gen_range(0..4) {
        0 => {
            let mut done = false;
            out.for_each_inline_mut(&mut |node| {
                if done {
                    return;
                }
                if let Inline::Text { text, .. } = node {
                    text.push_str(" amended");
                    done = true;
                }
            });
        }
        1 => {
            let mut budget = 3;
            out.body
                .push(Block::Section(gen_section(rng, 1, &mut budget)));
        }
        2 => {
            if let Some(i) = out.body.iter().rposition(|b| b.as_section().is_some()) {
                out.body.remove(i);
            }
        }
        _ => {
            let idx: Vec<usize> = out
                .body
                .iter()
                .enumerate()
                .filter(|(_, b)| b.as_section().is_some())
                .map(|(i, _)| i)
                .collect();
            if idx.len() >= 2 {
                out.body.swap(idx[0], idx[idx.len() - 1]);
            }
        }
    }
    out
}

/// Every span in diagnostics lies inside the CRLF-normalized source, on
/// character boundaries, with consistent line/col.
pub fn check_spans(source: &str, diags: &[lexm::Diagnostic]) -> Result<(), String> {
    let text = source.replace("\r\n", "\n");
    for d in diags {
        let s = &d.span;
        if s.byte_start > s.byte_end || s.byte_end > text.len() {
            return Err(format!(
                "{} span {}..{} outside 0..{}",
                d.code,
                s.byte_start,
                s.byte_end,
                text.len()
            ));
        }
        if !text.is_char_boundary(s.byte_start) || !text.is_char_boundary(s.byte_end) {
            return Err(format!(
                "{} span {}..{} splits a character",
                d.code, s.byte_start, s.byte_end
            ));
        }
        let before = &text[..s.byte_start];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().unwrap().chars().count() + 1;
        if (line, col) != (s.line, s.col) {
            return Err(format!(
                "{} at byte {} reported {}:{}, expected {}:{}",
                d.code, s.byte_start, s.line, s.col, line, col
            ));
        }
    }
    Ok(())
}
