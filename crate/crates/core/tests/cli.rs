mod common;

use std::fs;
use std::process::{Command, Output};

fn lexm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    common::fixture_path(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_bare_figure_reports_undefined_terms() {
    let out = lexm(&["check", &fixture("fig2.lexm")]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert_eq!(err.matches("error[E010]").count(), 3, "{err}");
    assert!(err.contains("fig2.lexm:6:70: error[E010]: term 'Law' is used but never defined\n"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn check_json_on_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.lexm");
    fs::write(&path, "").unwrap();
    let out = lexm(&["check", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "[]\n");
}

#[test]
fn check_fix_rewrites_only_fixable_files() {
    let dir = tempfile::tempdir().unwrap();
    let fixable = dir.path().join("cite.lexm");
    let clean = dir.path().join("clean.lexm");
    fs::write(
        &fixable,
        "\\section{S}\nUnder the \\leg{Corporations Act s 87}.\n",
    )
    .unwrap();
    let clean_src = "% keep this comment\n\\section{S}\nNothing to fix.\n";
    fs::write(&clean, clean_src).unwrap();

    let out = lexm(&["check", fixable.to_str().unwrap(), clean.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning[W040]"));
    assert!(
        fs::read_to_string(&fixable).unwrap().contains("s 87"),
        "check without --fix must not write"
    );

    let out = lexm(&[
        "check",
        "--json",
        "--fix",
        fixable.to_str().unwrap(),
        clean.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "[]\n");
    assert_eq!(
        fs::read_to_string(&fixable).unwrap(),
        "\\section{S}\n\nUnder the \\leg{Corporations Act section 87}.\n"
    );
    assert_eq!(fs::read_to_string(&clean).unwrap(), clean_src);
}

#[test]
fn render_formats() {
    let file = fixture("fig2_augmented.lexm");
    let text = lexm(&["render", "--format", "text", &file]);
    assert_eq!(text.status.code(), Some(0));
    assert!(stdout(&text).ends_with("    (c) in accordance with clause 19.\n"));

    let numbered = stdout(&lexm(&["render", "--format", "text", "--numbered", &file]));
    assert!(numbered.contains("\n20 Permitted disclosure of Confidential Information\n"));

    let html = stdout(&lexm(&["render", "--format", "html", &file]));
    assert!(html.contains("<section id=\"sec-20\" data-type=\"Confidentiality\">"));
    let visible: String = {
        // drop tags and attribute values; what remains is rendered text
        let mut out = String::new();
        let mut in_tag = false;
        for c in html
            .split("<style>")
            .next()
            .unwrap()
            .chars()
            .chain(html.split("</style>").nth(1).unwrap().chars())
        {
            match c {
                '<' => in_tag = true,
                '>' => in_tag = false,
                c if !in_tag => out.push(c),
                _ => {}
            }
        }
        out
    };
    assert!(!visible.contains("Confidentiality"));

    let markup = stdout(&lexm(&["render", "--format", "markup", &file]));
    let (a, _) = lexm::parse(&markup, "a");
    let (b, _) = lexm::parse(&common::fixture("fig2_augmented.lexm"), "b");
    assert!(a.structurally_eq(&b));
}

#[test]
fn render_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let out = lexm(&[
        "render",
        "--format",
        "json",
        "-o",
        target.to_str().unwrap(),
        &fixture("sale.lexm"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    assert!(fs::read_to_string(target)
        .unwrap()
        .contains("\"PurchasePrice\""));
}

#[test]
fn fill_command() {
    let out = lexm(&[
        "fill",
        "--data",
        &fixture("deal.vars"),
        "--strict",
        &fixture("sale.lexm"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "\\section{Price}\n\nThe purchase price is $1,000,000, payable on 1 July 2026.\n"
    );
    let dir = tempfile::tempdir().unwrap();
    let partial = dir.path().join("p.vars");
    fs::write(&partial, "PurchasePrice = 5\n").unwrap();
    let out = lexm(&[
        "fill",
        "--data",
        partial.to_str().unwrap(),
        "--strict",
        &fixture("sale.lexm"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[E060]: variable 'CompletionDate' has no binding"));
    let out = lexm(&[
        "fill",
        "--data",
        partial.to_str().unwrap(),
        &fixture("sale.lexm"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning[W060]"));
}

#[test]
fn diff_exit_codes() {
    let file = fixture("fig2_augmented.lexm");
    let same = lexm(&["diff", &file, &file]);
    assert_eq!(same.status.code(), Some(0));
    assert_eq!(stdout(&same).lines().count(), 2);

    let dir = tempfile::tempdir().unwrap();
    let edited = dir.path().join("new.lexm");
    fs::write(
        &edited,
        common::fixture("fig2_augmented.lexm")
            .replace("Prospective Investor}; \\or", "Permitted Investor}; \\or"),
    )
    .unwrap();
    let changed = lexm(&["diff", &file, edited.to_str().unwrap()]);
    assert_eq!(changed.status.code(), Some(1));
    let text = stdout(&changed);
    assert!(text.contains("[modified] §20 T:Permitted disclosure of Confidential Information\n"));
    assert!(text.contains("\n- Prospective\n+ Permitted\n"));

    let json = stdout(&lexm(&["diff", "--json", &file, edited.to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn extract_and_stats() {
    let files = ["corpus/gamma.lexm", "corpus/beta.lexm", "corpus/alpha.lexm"].map(fixture);
    let mut args = vec!["extract", "--type", "Confidentiality"];
    args.extend(files.iter().map(String::as_str));
    let out = stdout(&lexm(&args));
    let headers: Vec<&str> = out.lines().filter(|l| l.starts_with("% from: ")).collect();
    assert_eq!(headers.len(), 2);
    assert!(headers[0].contains("alpha.lexm") && headers[1].contains("beta.lexm"));

    let mut args = vec!["stats", "--json"];
    args.extend(files.iter().map(String::as_str));
    let v: serde_json::Value = serde_json::from_str(&stdout(&lexm(&args))).unwrap();
    assert_eq!(v["doc_count"], 3);
    let text = stdout(&lexm(&["stats", &files[0], &files[1], &files[2]]));
    assert!(text.contains("Confidentiality     2    0.6667"), "{text}");
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(lexm(&[]).status.code(), Some(2));
    assert_eq!(
        lexm(&["render", "--format", "pdf", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(
        lexm(&["check", "/no/such/file.lexm"]).status.code(),
        Some(2)
    );
    assert_eq!(lexm(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let file = fixture("fig2_augmented.lexm");
    for format in ["text", "html", "json", "markup"] {
        let a = lexm(&["render", "--format", format, &file]);
        let b = lexm(&["render", "--format", format, &file]);
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}
