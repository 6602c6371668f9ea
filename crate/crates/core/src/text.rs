//! Helpers shared by the line-oriented file formats.

use std::collections::BTreeMap;

/// Splits off a trailing `# comment`, returning (content, comment).
pub(crate) fn split_comment(line: &str) -> (&str, Option<&str>) {
    match line.find('#') {
        Some(i) => (line[..i].trim(), Some(line[i + 1..].trim())),
        None => (line.trim(), None),
    }
}

/// Positional words and `key=value` pairs of one statement.
pub(crate) struct Fields<'a> {
    pub words: Vec<&'a str>,
    pub kv: BTreeMap<&'a str, &'a str>,
}

pub(crate) fn fields(content: &str) -> Fields<'_> {
    let mut words = Vec::new();
    let mut kv = BTreeMap::new();
    for tok in content.split_whitespace() {
        match tok.split_once('=') {
            Some((k, v)) => {
                kv.insert(k, v);
            }
            None => words.push(tok),
        }
    }
    Fields { words, kv }
}

/// Parses `in:a,b;out:z` into (inputs, outputs).
pub(crate) fn parse_pin_spec(spec: &str) -> Option<(Vec<String>, Vec<String>)> {
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for part in spec.split(';') {
        let (dir, list) = part.split_once(':')?;
        let names = list.split(',').filter(|s| !s.is_empty()).map(str::to_string);
        match dir {
            "in" => ins.extend(names),
            "out" => outs.extend(names),
            _ => return None,
        }
    }
    Some((ins, outs))
}

pub(crate) fn pin_spec(ins: &[String], outs: &[String]) -> String {
    format!("in:{};out:{}", ins.join(","), outs.join(","))
}

/// Float formatting that round-trips through `parse::<f64>()`.
pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}
