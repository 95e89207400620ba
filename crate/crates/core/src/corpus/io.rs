//! Columnar corpus and annotation files.
//!
//! Corpus: blank-line separated blocks of
//!
//! ```text
//! #id s1
//! #cons (S (NP 0 1) (VP (V 2) (NP 3 4)))
//! 0	the	the	DT	1	det
//! ...
//! ```
//!
//! with token columns `index word lemma pos head deprel` (`head` is `-1` for
//! the root). Annotation: `sentenceId targetStart targetEnd frame` followed by
//! indented `role argStart argEnd` lines; ends are exclusive.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Argument, ConsTree, Corpus, DepTree, Rejection, Sentence, Span, SrlAnnotation, Token};
use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct ParsedSentences {
    pub sentences: Vec<Sentence>,
    pub rejected: Vec<Rejection>,
}

struct Block {
    first_line: usize,
    id: Option<String>,
    cons: Option<(usize, String)>,
    tokens: Vec<(usize, Token, Option<usize>, String)>,
}

pub fn parse_sentences(text: &str, path: &str) -> Result<ParsedSentences> {
    let mut out = ParsedSentences::default();
    let mut block: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(b) = block.take() {
                finish_block(b, path, &mut out)?;
            }
            continue;
        }
        let b = block.get_or_insert_with(|| Block {
            first_line: line_no,
            id: None,
            cons: None,
            tokens: Vec::new(),
        });
        if let Some(rest) = line.strip_prefix("#id") {
            let id = rest.trim();
            if id.is_empty() {
                return Err(Error::parse(path, line_no, "empty sentence id"));
            }
            b.id = Some(id.to_string());
        } else if let Some(rest) = line.strip_prefix("#cons") {
            b.cons = Some((line_no, rest.trim().to_string()));
        } else if line.starts_with('#') {
            continue;
        } else {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected 6 tab-separated columns, found {}", cols.len()),
                ));
            }
            let index: usize = cols[0].parse().map_err(|_| {
                Error::parse(path, line_no, format!("bad token index `{}`", cols[0]))
            })?;
            if index != b.tokens.len() {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("token index {index}, expected {}", b.tokens.len()),
                ));
            }
            let head: i64 = cols[4]
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad head `{}`", cols[4])))?;
            let head = match head {
                -1 => None,
                h if h >= 0 => Some(h as usize),
                h => return Err(Error::parse(path, line_no, format!("bad head `{h}`"))),
            };
            let tok = Token {
                index,
                word: cols[1].to_string(),
                lemma: cols[2].to_string(),
                pos: cols[3].to_string(),
            };
            b.tokens.push((line_no, tok, head, cols[5].to_string()));
        }
    }
    if let Some(b) = block.take() {
        finish_block(b, path, &mut out)?;
    }
    Ok(out)
}

fn finish_block(b: Block, path: &str, out: &mut ParsedSentences) -> Result<()> {
    let id =
        b.id.ok_or_else(|| Error::parse(path, b.first_line, "sentence block without `#id`"))?;
    let (cons_line, cons_text) = b
        .cons
        .ok_or_else(|| Error::parse(path, b.first_line, "sentence block without `#cons`"))?;
    if b.tokens.is_empty() {
        return Err(Error::parse(path, b.first_line, "sentence without tokens"));
    }
    let n = b.tokens.len();
    let mut tokens = Vec::with_capacity(n);
    let mut heads = Vec::with_capacity(n);
    let mut deprels = Vec::with_capacity(n);
    for (_, tok, head, rel) in b.tokens {
        tokens.push(tok);
        heads.push(head);
        deprels.push(rel);
    }
    let dep = match DepTree::new(heads, deprels) {
        Ok(d) => d,
        Err(reason) => {
            out.rejected.push(Rejection {
                sentence_id: id,
                line: b.first_line,
                reason,
            });
            return Ok(());
        }
    };
    let cons = match ConsTree::parse(&cons_text, n) {
        Ok(c) => c,
        Err(reason) => {
            out.rejected.push(Rejection {
                sentence_id: id,
                line: cons_line,
                reason,
            });
            return Ok(());
        }
    };
    out.sentences.push(Sentence {
        id,
        tokens,
        dep,
        cons,
    });
    Ok(())
}

pub fn parse_annotations(text: &str, path: &str) -> Result<Vec<(usize, SrlAnnotation)>> {
    let mut out: Vec<(usize, SrlAnnotation)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        let cols: Vec<&str> = raw.split_whitespace().collect();
        let span = |a: &str, b: &str| -> Result<Span> {
            let s: usize = a
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad span start `{a}`")))?;
            let e: usize = b
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad span end `{b}`")))?;
            if s >= e {
                return Err(Error::parse(path, line_no, format!("empty span {s}-{e}")));
            }
            Ok(Span::new(s, e))
        };
        if indented {
            let (_, ann) = out
                .last_mut()
                .ok_or_else(|| Error::parse(path, line_no, "argument line before any target"))?;
            if cols.len() != 3 {
                return Err(Error::parse(path, line_no, "expected `role start end`"));
            }
            ann.args.push(Argument {
                span: span(cols[1], cols[2])?,
                role: cols[0].to_string(),
            });
        } else {
            if cols.len() != 4 {
                return Err(Error::parse(
                    path,
                    line_no,
                    "expected `sentenceId targetStart targetEnd frame`",
                ));
            }
            out.push((
                line_no,
                SrlAnnotation {
                    sentence_id: cols[0].to_string(),
                    target: span(cols[1], cols[2])?,
                    frame: cols[3].to_string(),
                    args: Vec::new(),
                },
            ));
        }
    }
    Ok(out)
}

/// Loads a corpus and its annotations. Sentences breaking a tree invariant
/// are dropped into [`Corpus::rejected`] together with their annotations.
pub fn load_corpus(sentences: &Path, annotations: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(sentences).map_err(|e| Error::io(sentences, e))?;
    let parsed = parse_sentences(&text, &sentences.display().to_string())?;
    let ann_path = annotations.display().to_string();
    let ann_text = fs::read_to_string(annotations).map_err(|e| Error::io(annotations, e))?;
    let anns = parse_annotations(&ann_text, &ann_path)?;
    let corpus = Corpus::new(parsed.sentences, Vec::new(), parsed.rejected);
    let mut kept = Vec::with_capacity(anns.len());
    for (line, ann) in anns {
        let Some(sent) = corpus.sentence(&ann.sentence_id) else {
            if corpus
                .rejected
                .iter()
                .any(|r| r.sentence_id == ann.sentence_id)
            {
                continue;
            }
            return Err(Error::parse(
                &ann_path,
                line,
                format!("unknown sentence `{}`", ann.sentence_id),
            ));
        };
        let n = sent.len();
        if ann.target.end > n || ann.args.iter().any(|a| a.span.end > n) {
            return Err(Error::parse(
                &ann_path,
                line,
                "span outside sentence bounds",
            ));
        }
        kept.push(ann);
    }
    Ok(Corpus::new(corpus.sentences, kept, corpus.rejected))
}

pub fn write_sentences(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "#id {}", s.id);
        let _ = writeln!(out, "#cons {}", s.cons.to_bracketed());
        for t in &s.tokens {
            let head = s.dep.head(t.index).map_or(-1, |h| h as i64);
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                t.index,
                t.word,
                t.lemma,
                t.pos,
                head,
                s.dep.deprel(t.index)
            );
        }
    }
    out
}

pub fn write_annotations(annotations: &[SrlAnnotation]) -> String {
    let mut out = String::new();
    for a in annotations {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            a.sentence_id, a.target.start, a.target.end, a.frame
        );
        for arg in &a.args {
            let _ = writeln!(out, "\t{}\t{}\t{}", arg.role, arg.span.start, arg.span.end);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = "\
#id s1
#cons (S (NP 0 1) (VP (V 2) (NP 3 4)))
0\tthe\tthe\tDT\t1\tdet
1\tdog\tdog\tNN\t2\tnsubj
2\tchased\tchase\tVBD\t-1\troot
3\ta\ta\tDT\t4\tdet
4\tcat\tcat\tNN\t2\tdobj

#id s2
#cons (S (NP 0) (VP (V 1)))
0\tshe\tshe\tPRP\t1\tnsubj
1\tslept\tsleep\tVBD\t-1\troot

#id s3
#cons (S (NP 0) (VP (V 1) (NP 2)))
0\the\the\tPRP\t1\tnsubj
1\tsaw\tsee\tVBD\t-1\troot
2\tit\tit\tPRP\t1\tdobj
";

    #[test]
    fn three_sentence_round_trip() {
        let p = parse_sentences(THREE, "t").unwrap();
        assert_eq!(p.sentences.len(), 3);
        assert!(p.rejected.is_empty());
        for s in &p.sentences {
            assert_eq!(s.cons.node(s.cons.root()).span, Span::new(0, s.len()));
            for (i, t) in s.tokens.iter().enumerate() {
                assert_eq!(t.index, i);
            }
        }
        let again = parse_sentences(&write_sentences(&p.sentences), "t").unwrap();
        assert_eq!(again.sentences, p.sentences);
    }

    #[test]
    fn head_cycle_rejects_only_that_sentence() {
        let bad = THREE.replace(
            "2\tchased\tchase\tVBD\t-1\troot",
            "2\tchased\tchase\tVBD\t1\troot",
        );
        // dog -> chased -> dog, and no root left
        let p = parse_sentences(&bad, "t").unwrap();
        assert_eq!(p.sentences.len(), 2);
        assert_eq!(p.rejected.len(), 1);
        assert_eq!(p.rejected[0].sentence_id, "s1");
    }

    #[test]
    fn two_cycle_is_reported_as_cycle() {
        let text =
            "#id c\n#cons (S 0 1 2)\n0\ta\ta\tX\t1\tx\n1\tb\tb\tX\t0\tx\n2\tc\tc\tX\t-1\troot\n";
        let p = parse_sentences(text, "t").unwrap();
        assert!(p.sentences.is_empty());
        assert!(p.rejected[0].reason.contains("cycle"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let bad = THREE.replace("3\ta\ta\tDT\t4\tdet", "3\ta\tDT\t4\tdet");
        match parse_sentences(&bad, "file.conll") {
            Err(Error::Parse { line, path, .. }) => {
                assert_eq!(line, 6);
                assert_eq!(path, "file.conll");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn annotations_parse_and_round_trip() {
        let text = "s1\t2\t3\tPursuit\n\tAgent\t0\t2\n\tTheme\t3\t5\n";
        let anns: Vec<_> = parse_annotations(text, "a")
            .unwrap()
            .into_iter()
            .map(|(_, a)| a)
            .collect();
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].args[1].role, "Theme");
        assert_eq!(write_annotations(&anns), text);
        assert!(parse_annotations("\tAgent 0 1\n", "a").is_err());
        assert!(parse_annotations("s1 3 3 F\n", "a").is_err());
    }

    #[test]
    fn load_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.conll");
        let a = dir.path().join("c.ann");
        fs::write(&c, THREE).unwrap();
        fs::write(&a, "s1\t2\t3\tPursuit\n\tAgent\t0\t2\ns9\t0\t1\tX\n").unwrap();
        // unknown sentence id
        assert!(load_corpus(&c, &a).is_err());
        fs::write(&a, "s1\t2\t3\tPursuit\n\tAgent\t0\t2\n").unwrap();
        let one = load_corpus(&c, &a).unwrap();
        let two = load_corpus(&c, &a).unwrap();
        assert_eq!(one, two);
        assert_eq!(one.annotations.len(), 1);
    }
}
