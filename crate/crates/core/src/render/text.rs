use crate::analyzer::{item_marker, AnalyzedDocument, NodePath, Numbering};
use crate::model::{normalize_text, Block, Inline, ListBlock};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TextOptions {
    /// Prefix section headings with their clause numbers.
    pub numbered: bool,
}

/// Published plain-text form: no tags, no type labels.
///
/// Headings sit on their own line, blocks are separated by blank lines, and
/// list items are indented four spaces per nesting level behind their marker.
/// Cross-references print as clause numbers; unresolved ones as `⟨target⟩`.
pub fn render_text(analyzed: &AnalyzedDocument, options: TextOptions) -> String {
    let mut chunks = Vec::new();
    if let Some(title) = &analyzed.doc.title {
        chunks.push(text_line(title));
    }
    let mut path = Vec::new();
    blocks(
        &analyzed.doc.body,
        &analyzed.numbering,
        options,
        &mut path,
        &mut chunks,
    );
    if chunks.is_empty() {
        return String::new();
    }
    let mut out = chunks.join("\n\n");
    out.push('\n');
    out
}

fn blocks(
    body: &[Block],
    numbering: &Numbering,
    options: TextOptions,
    path: &mut NodePath,
    chunks: &mut Vec<String>,
) {
    for (i, block) in body.iter().enumerate() {
        path.push(i);
        match block {
            Block::Section(s) => {
                let title = text_line(&s.title);
                let heading = match numbering.sections.get(path) {
                    Some(number) if options.numbered => {
                        format!("{number} {title}").trim_end().to_string()
                    }
                    _ => title,
                };
                if !heading.is_empty() {
                    chunks.push(heading);
                }
                blocks(&s.children, numbering, options, path, chunks);
            }
            Block::Paragraph(p) => chunks.push(text_line(&p.content)),
            Block::List(l) => {
                let mut lines = Vec::new();
                list(l, numbering, 1, path, &mut lines);
                if !lines.is_empty() {
                    chunks.push(lines.join("\n"));
                }
            }
            Block::Define(d) => chunks.push(
                format!("{}: {}", d.term, text_line(&d.definition))
                    .trim_end()
                    .to_string(),
            ),
        }
        path.pop();
    }
}

fn list(
    l: &ListBlock,
    numbering: &Numbering,
    depth: usize,
    path: &mut NodePath,
    lines: &mut Vec<String>,
) {
    let indent = "    ".repeat(depth);
    for (i, item) in l.items.iter().enumerate() {
        path.push(i);
        let marker = numbering
            .items
            .get(path)
            .cloned()
            .unwrap_or_else(|| item_marker(depth, i + 1));
        let text = text_line(&item.content);
        if text.is_empty() {
            lines.push(format!("{indent}{marker}"));
        } else {
            lines.push(format!("{indent}{marker} {text}"));
        }
        for (k, sub) in item.sublists.iter().enumerate() {
            path.push(k);
            list(sub, numbering, depth + 1, path, lines);
            path.pop();
        }
        path.pop();
    }
}

/// One logical line of published text.
fn text_line(content: &[Inline]) -> String {
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
            } => match resolved_number {
                Some(number) => out.push_str(number),
                None => {
                    out.push('⟨');
                    out.push_str(target);
                    out.push('⟩');
                }
            },
            Inline::VarSlot { name, .. } => {
                out.push('⟨');
                out.push_str(name);
                out.push('⟩');
            }
            Inline::Connective { kind, .. } => out.push_str(kind.word()),
        }
    }
    normalize_text(&out)
}
