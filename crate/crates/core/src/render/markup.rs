use crate::model::{Block, DefineBlock, Document, Inline, ListBlock, Section};

/// Canonical source form of a document.
///
/// Blocks are separated by one blank line, section options are emitted as
/// `[\type{A}\label{B}]`, special characters are escaped, and every `\item`
/// starts its own line. Parsing the output yields a structurally equal
/// document, and rendering that parse again reproduces the same bytes.
pub fn render_markup(doc: &Document) -> String {
    let mut chunks = Vec::new();
    if let Some(title) = &doc.title {
        chunks.push(format!("\\title{{{}}}", inline_markup(title)));
    }
    block_chunks(&doc.body, &mut chunks);
    join_chunks(chunks)
}

/// Markup for a run of blocks, without a trailing newline.
pub fn blocks_markup(blocks: &[Block]) -> String {
    let mut chunks = Vec::new();
    block_chunks(blocks, &mut chunks);
    chunks.join("\n\n")
}

fn join_chunks(chunks: Vec<String>) -> String {
    if chunks.is_empty() {
        String::new()
    } else {
        let mut out = chunks.join("\n\n");
        out.push('\n');
        out
    }
}

fn block_chunks(blocks: &[Block], chunks: &mut Vec<String>) {
    for block in blocks {
        match block {
            Block::Section(s) => {
                chunks.push(section_header(s));
                block_chunks(&s.children, chunks);
            }
            Block::Paragraph(p) => chunks.push(inline_markup(&p.content)),
            Block::List(l) => {
                let mut out = String::new();
                list_markup(l, &mut out);
                chunks.push(out);
            }
            Block::Define(d) => chunks.push(define_markup(d)),
        }
    }
}

pub(crate) fn section_header(s: &Section) -> String {
    let command = match s.level {
        0 | 1 => "section",
        2 => "subsection",
        _ => "subsubsection",
    };
    let mut out = format!("\\{command}");
    if !s.types.is_empty() || s.label.is_some() {
        out.push('[');
        for ty in &s.types {
            out.push_str(&format!("\\type{{{}}}", escape(ty)));
        }
        if let Some(label) = &s.label {
            out.push_str(&format!("\\label{{{}}}", escape(label)));
        }
        out.push(']');
    }
    out.push('{');
    out.push_str(&inline_markup(&s.title));
    out.push('}');
    out
}

fn define_markup(d: &DefineBlock) -> String {
    format!(
        "\\define{{{}}}{{{}}}",
        escape(&d.term),
        inline_markup(&d.definition)
    )
}

fn list_markup(list: &ListBlock, out: &mut String) {
    out.push_str("\\begin{itemize}\n");
    for item in &list.items {
        out.push_str("\\item");
        if !item.content.is_empty() {
            out.push(' ');
            out.push_str(&inline_markup(&item.content));
        }
        out.push('\n');
        for sub in &item.sublists {
            list_markup(sub, out);
            out.push('\n');
        }
    }
    out.push_str("\\end{itemize}");
}

pub(crate) fn inline_markup(content: &[Inline]) -> String {
    let mut out = String::new();
    for (i, node) in content.iter().enumerate() {
        match node {
            Inline::Text { text, .. } => out.push_str(&escape(text)),
            Inline::TermUse { term, .. } => out.push_str(&format!("\\def{{{}}}", escape(term))),
            Inline::LegCite { raw, .. } => out.push_str(&format!("\\leg{{{}}}", escape(raw))),
            Inline::CrossRef { target, .. } => {
                out.push_str(&format!("\\ref{{{}}}", escape(target)))
            }
            Inline::VarSlot { name, .. } => out.push_str(&format!("\\var{{{}}}", escape(name))),
            Inline::Connective { kind, .. } => {
                out.push('\\');
                out.push_str(kind.word());
                // keep a following letter from extending the command name
                let next_is_letter = matches!(
                    content.get(i + 1),
                    Some(Inline::Text { text, .. }) if text.starts_with(|c: char| c.is_ascii_alphabetic())
                );
                if next_is_letter {
                    out.push_str("{}");
                }
            }
        }
    }
    out
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(c, '\\' | '{' | '}' | '%' | '[' | ']') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}
