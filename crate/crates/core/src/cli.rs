//! Command-line frontend. Exit codes: 0 success, 1 error diagnostics or
//! differences found, 2 usage or I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analyzer::{analyze_source, apply_fixes, AnalyzedDocument};
use crate::corpus::{extract, render_stats_json, render_stats_text, stats, Selector};
use crate::docdiff::{diff, render_diff_json, render_diff_text};
use crate::model::{sort_diagnostics, Code, Diagnostic, Severity};
use crate::parser::parse;
use crate::render::{render_html, render_json, render_markup, render_text, TextOptions};
use crate::template::{fill, parse_bindings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read '{path}': {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write '{path}': {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "lexm",
    version,
    about = "Check, render, fill, diff and analyze legal markup documents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and analyze files, printing diagnostics.
    Check {
        /// Rewrite files that have fixable diagnostics.
        #[arg(long)]
        fix: bool,
        /// Print diagnostics as one JSON array on standard output.
        #[arg(long)]
        json: bool,
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Render one file to text, HTML, JSON, or canonical markup.
    Render {
        #[arg(long, value_enum)]
        format: Format,
        /// Prefix headings with clause numbers (text format).
        #[arg(long)]
        numbered: bool,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        file: String,
    },
    /// Fill variable slots from a bindings file; prints canonical markup.
    Fill {
        #[arg(long)]
        data: String,
        /// Unbound variables are errors instead of warnings.
        #[arg(long)]
        strict: bool,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        file: String,
    },
    /// Clause-level diff of two document versions.
    Diff {
        #[arg(long)]
        json: bool,
        #[arg(long)]
        show_unchanged: bool,
        old: String,
        new: String,
    },
    /// Print every section selected by type or label.
    Extract {
        #[command(flatten)]
        selector: SelectorArgs,
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Type and list-item statistics over a corpus.
    Stats {
        #[arg(long)]
        json: bool,
        #[arg(required = true)]
        files: Vec<String>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SelectorArgs {
    #[arg(long = "type")]
    type_name: Option<String>,
    #[arg(long)]
    label: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Html,
    Json,
    Markup,
}

/// Text form: `path:line:col: severity[code]: message`, one per line.
/// JSON form: a pretty-printed array; `fix` appears only when present.
pub fn format_diagnostics(diags: &[Diagnostic], json: bool) -> String {
    if json {
        #[derive(Serialize)]
        struct Out<'a> {
            path: &'a str,
            line: usize,
            col: usize,
            severity: Severity,
            code: Code,
            message: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            fix: Option<&'a str>,
        }
        let out: Vec<Out> = diags
            .iter()
            .map(|d| Out {
                path: &d.span.path,
                line: d.span.line,
                col: d.span.col,
                severity: d.severity(),
                code: d.code,
                message: &d.message,
                fix: d.fix.as_deref(),
            })
            .collect();
        let mut s =
            serde_json::to_string_pretty(&out).expect("diagnostics are always serializable");
        s.push('\n');
        return s;
    }
    let mut out = String::new();
    for d in diags {
        out.push_str(&format!(
            "{}:{}:{}: {}[{}]: {}\n",
            d.span.path,
            d.span.line,
            d.span.col,
            d.severity(),
            d.code,
            d.message
        ));
    }
    out
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_FAILURE
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut io = Io { stdout, stderr };
    match execute(cli.command, &mut io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "lexm: {e}");
            EXIT_FAILURE
        }
    }
}

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn out(&mut self, text: &str) {
        let _ = self.stdout.write_all(text.as_bytes());
    }

    fn err(&mut self, text: &str) {
        let _ = self.stderr.write_all(text.as_bytes());
    }

    fn emit(&mut self, text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
        match output {
            Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
                path: path.display().to_string(),
                source,
            }),
            None => {
                self.out(text);
                Ok(())
            }
        }
    }
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_string(),
        source,
    })
}

fn load_sorted(files: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut paths: Vec<&String> = files.iter().collect();
    paths.sort();
    paths.dedup();
    paths
        .into_iter()
        .map(|p| Ok((p.clone(), read(p)?)))
        .collect()
}

fn exit_for(diags: &[Diagnostic]) -> i32 {
    if diags.iter().any(Diagnostic::is_error) {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    }
}

fn is_parse_error(d: &Diagnostic) -> bool {
    matches!(d.code, Code::E001 | Code::E002 | Code::E003 | Code::E004)
}

fn execute(command: Command, io: &mut Io) -> Result<i32, CliError> {
    match command {
        Command::Check { fix, json, files } => {
            let mut all = Vec::new();
            for (path, source) in load_sorted(&files)? {
                let mut analyzed = analyze_source(&source, &path);
                let fixable = analyzed.diagnostics.iter().any(|d| d.fix.is_some());
                if fix && fixable {
                    if analyzed.diagnostics.iter().any(is_parse_error) {
                        io.err(&format!(
                            "lexm: not fixing '{path}': resolve syntax errors first\n"
                        ));
                    } else {
                        let fixed = render_markup(&apply_fixes(&analyzed));
                        fs::write(&path, &fixed).map_err(|source| CliError::Write {
                            path: path.clone(),
                            source,
                        })?;
                        analyzed = analyze_source(&fixed, &path);
                    }
                }
                all.append(&mut analyzed.diagnostics);
            }
            sort_diagnostics(&mut all);
            let report = format_diagnostics(&all, json);
            if json {
                io.out(&report);
            } else {
                io.err(&report);
            }
            Ok(exit_for(&all))
        }
        Command::Render {
            format,
            numbered,
            output,
            file,
        } => {
            let source = read(&file)?;
            let analyzed = analyze_source(&source, &file);
            io.err(&format_diagnostics(&analyzed.diagnostics, false));
            let text = match format {
                Format::Text => render_text(&analyzed, TextOptions { numbered }),
                Format::Html => render_html(&analyzed),
                Format::Json => render_json(&analyzed),
                Format::Markup => render_markup(&parse(&source, &file).0),
            };
            io.emit(&text, output.as_ref())?;
            Ok(exit_for(&analyzed.diagnostics))
        }
        Command::Fill {
            data,
            strict,
            output,
            file,
        } => {
            let source = read(&file)?;
            let bindings_text = read(&data)?;
            let (doc, mut diags) = parse(&source, &file);
            let (bindings, mut binding_diags) = parse_bindings(&bindings_text, &data);
            let (filled, mut fill_diags) = fill(&doc, &bindings, strict);
            diags.append(&mut binding_diags);
            diags.append(&mut fill_diags);
            sort_diagnostics(&mut diags);
            io.err(&format_diagnostics(&diags, false));
            io.emit(&render_markup(&filled), output.as_ref())?;
            Ok(exit_for(&diags))
        }
        Command::Diff {
            json,
            show_unchanged,
            old,
            new,
        } => {
            let old_doc = analyze_source(&read(&old)?, &old);
            let new_doc = analyze_source(&read(&new)?, &new);
            let report = diff(&old_doc, &new_doc);
            if json {
                io.out(&render_diff_json(&report));
            } else {
                io.out(&render_diff_text(&report, show_unchanged));
            }
            Ok(if report.has_changes() {
                EXIT_FINDINGS
            } else {
                EXIT_OK
            })
        }
        Command::Extract { selector, files } => {
            let selector = match (selector.type_name, selector.label) {
                (Some(t), _) => Selector::Type(t),
                (None, Some(l)) => Selector::Label(l),
                (None, None) => unreachable!("clap requires one selector"),
            };
            let docs = analyze_all(&files)?;
            let fragments = extract(&docs, &selector);
            let mut out = String::new();
            for (i, f) in fragments.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&format!("% from: {} §{}\n", f.source_path, f.number));
                out.push_str(&f.markup);
            }
            io.out(&out);
            Ok(EXIT_OK)
        }
        Command::Stats { json, files } => {
            let docs = analyze_all(&files)?;
            let s = stats(&docs);
            if json {
                io.out(&render_stats_json(&s));
            } else {
                io.out(&render_stats_text(&s));
            }
            Ok(EXIT_OK)
        }
    }
}

fn analyze_all(files: &[String]) -> Result<Vec<AnalyzedDocument>, CliError> {
    Ok(load_sorted(files)?
        .into_iter()
        .map(|(path, source)| analyze_source(&source, &path))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SourceSpan;
    use std::sync::Arc;

    fn span(line: usize, col: usize) -> SourceSpan {
        SourceSpan::new(Arc::from("fig2.lexm"), 0, 3, line, col)
    }

    #[test]
    fn text_format() {
        let d = Diagnostic::new(
            Code::E010,
            "term 'Law' is used but never defined",
            span(4, 25),
        );
        assert_eq!(
            format_diagnostics(&[d], false),
            "fig2.lexm:4:25: error[E010]: term 'Law' is used but never defined\n"
        );
        assert_eq!(format_diagnostics(&[], false), "");
        assert_eq!(format_diagnostics(&[], true), "[]\n");
    }

    #[test]
    fn json_fix_is_optional() {
        let with_fix = Diagnostic::new(Code::W040, "citation", span(1, 1))
            .with_fix("Corporations Act section 87");
        let plain = Diagnostic::new(Code::W030, "list", span(2, 1));
        let v: serde_json::Value =
            serde_json::from_str(&format_diagnostics(&[with_fix, plain], true)).unwrap();
        assert_eq!(v[0]["fix"], "Corporations Act section 87");
        assert_eq!(v[0]["severity"], "warning");
        assert!(v[1].get("fix").is_none());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["lexm", "bogus"], &mut out, &mut err), EXIT_FAILURE);
        assert_eq!(
            run(["lexm", "check", "/nonexistent/x.lexm"], &mut out, &mut err),
            EXIT_FAILURE
        );
        assert_eq!(
            run(
                ["lexm", "extract", "--type", "A", "--label", "B", "f"],
                &mut out,
                &mut err
            ),
            EXIT_FAILURE
        );
    }
}
