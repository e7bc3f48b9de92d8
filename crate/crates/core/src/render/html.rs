use std::fmt::Write as _;

use crate::analyzer::{item_marker, AnalyzedDocument, NodePath};
use crate::model::{normalize_text, plain_text, Block, Inline, ListBlock, Section};

const STYLE: &str = "\
body{font-family:Georgia,'Times New Roman',serif;max-width:46em;margin:2em auto;padding:0 1em;line-height:1.55;color:#222}
nav.toc{border-bottom:1px solid #ddd;margin-bottom:1.5em}
nav.toc ul{list-style:none;padding-left:1.2em}
nav.toc a{text-decoration:none}
ul.items{list-style:none;padding-left:2em}
.marker{display:inline-block;min-width:2.6em}
.term{border-bottom:1px dotted #555;position:relative;cursor:help}
.term .tip{display:none;position:absolute;left:0;top:1.5em;z-index:10;width:24em;padding:.4em .6em;background:#fffbe6;border:1px solid #ccc;font-size:.9em;font-weight:normal}
.term:hover .tip,.term:focus .tip{display:block}
.unresolved{color:#b00020}
dfn{font-style:normal;font-weight:bold}
cite.leg{font-style:normal}
";

/// Self-contained HTML5 page: embedded CSS, no scripts, no external assets.
///
/// Each defined-term use carries a hover tooltip with the definition text.
/// Sections become `<section id="sec-N">` elements whose `\type` labels live
/// only in a `data-type` attribute (several types are joined with `|`).
pub fn render_html(analyzed: &AnalyzedDocument) -> String {
    let renderer = HtmlRenderer { analyzed };
    let doc = &analyzed.doc;
    let page_title = doc
        .title
        .as_ref()
        .map(|t| normalize_text(&plain_text(t)))
        .filter(|t| !t.is_empty())
        .unwrap_or_else(|| "Document".to_string());

    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>{}</title>", escape(&page_title));
    out.push_str("<style>\n");
    out.push_str(STYLE);
    out.push_str("</style>\n</head>\n<body>\n");

    if let Some(title) = &doc.title {
        let _ = writeln!(out, "<h1>{}</h1>", renderer.inline(title));
    }
    let mut toc = String::new();
    renderer.toc(&doc.body, &mut Vec::new(), &mut toc);
    if !toc.is_empty() {
        out.push_str("<nav class=\"toc\">\n<h2>Contents</h2>\n");
        out.push_str(&toc);
        out.push_str("</nav>\n");
    }
    if !doc.body.is_empty() {
        out.push_str("<main>\n");
        renderer.blocks(&doc.body, &mut Vec::new(), &mut out);
        out.push_str("</main>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}

struct HtmlRenderer<'a> {
    analyzed: &'a AnalyzedDocument,
}

impl HtmlRenderer<'_> {
    fn number(&self, path: &NodePath) -> &str {
        self.analyzed
            .numbering
            .sections
            .get(path)
            .map_or("", String::as_str)
    }

    fn toc(&self, blocks: &[Block], path: &mut NodePath, out: &mut String) {
        let sections: Vec<(usize, &Section)> = blocks
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.as_section().map(|s| (i, s)))
            .collect();
        if sections.is_empty() {
            return;
        }
        out.push_str("<ul>\n");
        for (i, s) in sections {
            path.push(i);
            let number = self.number(path).to_string();
            let title = normalize_text(&plain_text(&s.title));
            let _ = write!(
                out,
                "<li><a href=\"#sec-{}\">{} {}</a>",
                escape(&number),
                escape(&number),
                escape(&title)
            );
            let mut nested = String::new();
            self.toc(&s.children, path, &mut nested);
            if !nested.is_empty() {
                out.push('\n');
                out.push_str(&nested);
            }
            out.push_str("</li>\n");
            path.pop();
        }
        out.push_str("</ul>\n");
    }

    fn blocks(&self, blocks: &[Block], path: &mut NodePath, out: &mut String) {
        for (i, block) in blocks.iter().enumerate() {
            path.push(i);
            match block {
                Block::Section(s) => {
                    let number = self.number(path).to_string();
                    let _ = write!(out, "<section id=\"sec-{}\"", escape(&number));
                    if !s.types.is_empty() {
                        let _ = write!(out, " data-type=\"{}\"", escape(&s.types.join("|")));
                    }
                    if let Some(label) = &s.label {
                        let _ = write!(out, " data-label=\"{}\"", escape(label));
                    }
                    out.push_str(">\n");
                    let level = usize::from(s.level.clamp(1, 3)) + 1;
                    let _ = writeln!(out, "<h{level}>{}</h{level}>", self.inline(&s.title));
                    self.blocks(&s.children, path, out);
                    out.push_str("</section>\n");
                }
                Block::Paragraph(p) => {
                    let _ = writeln!(out, "<p>{}</p>", self.inline(&p.content));
                }
                Block::List(l) => self.list(l, 1, path, out),
                Block::Define(d) => {
                    let _ = writeln!(
                        out,
                        "<p class=\"definition\"><dfn>{}</dfn>: {}</p>",
                        escape(&d.term),
                        self.inline(&d.definition)
                    );
                }
            }
            path.pop();
        }
    }

    fn list(&self, list: &ListBlock, depth: usize, path: &mut NodePath, out: &mut String) {
        out.push_str("<ul class=\"items\">\n");
        for (i, item) in list.items.iter().enumerate() {
            path.push(i);
            let marker = self
                .analyzed
                .numbering
                .items
                .get(path)
                .cloned()
                .unwrap_or_else(|| item_marker(depth, i + 1));
            let _ = write!(
                out,
                "<li><span class=\"marker\">{}</span> {}",
                escape(&marker),
                self.inline(&item.content)
            );
            for (k, sub) in item.sublists.iter().enumerate() {
                out.push('\n');
                path.push(k);
                self.list(sub, depth + 1, path, out);
                path.pop();
            }
            out.push_str("</li>\n");
            path.pop();
        }
        out.push_str("</ul>\n");
    }

    fn inline(&self, content: &[Inline]) -> String {
        let mut out = String::new();
        for node in content {
            match node {
                Inline::Text { text, .. } => out.push_str(&escape(text)),
                Inline::TermUse { term, .. } => {
                    let tip = match self.analyzed.tables.definitions.get(term) {
                        Some(entry) => normalize_text(&plain_text(&entry.definition)),
                        None => "undefined term".to_string(),
                    };
                    let _ = write!(
                        out,
                        "<span class=\"term\" tabindex=\"0\" data-term=\"{}\">{}<span class=\"tip\" role=\"tooltip\">{}</span></span>",
                        escape(term),
                        escape(term),
                        escape(&tip)
                    );
                }
                Inline::LegCite { raw, canonical, .. } => {
                    let _ = write!(
                        out,
                        "<cite class=\"leg\">{}</cite>",
                        escape(canonical.as_deref().unwrap_or(raw))
                    );
                }
                Inline::CrossRef {
                    target,
                    resolved_number,
                    ..
                } => match resolved_number {
                    Some(number) => {
                        let _ = write!(
                            out,
                            "<a class=\"xref\" href=\"#sec-{}\">{}</a>",
                            escape(number),
                            escape(number)
                        );
                    }
                    None => {
                        let _ = write!(
                            out,
                            "<span class=\"xref unresolved\">⟨{}⟩</span>",
                            escape(target)
                        );
                    }
                },
                Inline::VarSlot { name, .. } => {
                    let _ = write!(out, "<span class=\"var\">⟨{}⟩</span>", escape(name));
                }
                Inline::Connective { kind, .. } => {
                    let _ = write!(out, "<span class=\"connective\">{}</span>", kind.word());
                }
            }
        }
        out
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}
