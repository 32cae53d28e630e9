//! A reader and writer for the dense ARFF subset used by ASLib scenario tables.
//!
//! Supported: `@relation`, `@attribute <name> numeric|real|integer|string|{v1,...}`,
//! `@data` (keywords case-insensitive), `%` comment lines, comma-separated
//! cells, `?` for missing values, and single- or double-quoted names/values
//! with backslash escapes. Sparse rows and date attributes are rejected.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Numeric,
    String,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// One ARFF cell. Nominal and string cells both carry [`Value::Text`].
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Missing,
    Number(f64),
    Text(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    /// Text rendering of an identifier-like cell; numbers are formatted.
    pub fn as_text(&self) -> Option<String> {
        match self {
            Value::Text(s) => Some(s.clone()),
            Value::Number(x) => Some(x.to_string()),
            Value::Missing => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArffRelation {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub rows: Vec<Vec<Value>>,
}

impl ArffRelation {
    /// Case-insensitive attribute lookup.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.attributes
            .iter()
            .position(|a| a.name.eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArffErrorKind {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("value `{value}` is not declared for nominal attribute `{attribute}`")]
    UndeclaredNominal { attribute: String, value: String },
    #[error("row has {found} cells, expected {expected}")]
    Arity { expected: usize, found: usize },
    #[error("cannot parse `{value}` as a number for attribute `{attribute}`")]
    BadNumber { attribute: String, value: String },
    #[error("unterminated quote")]
    UnterminatedQuote,
    #[error("sparse rows are not supported")]
    Sparse,
    #[error("no @data section")]
    NoData,
}

/// Parse failure annotated with a 1-based line number.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ArffError {
    pub line: usize,
    pub kind: ArffErrorKind,
}

fn err(line: usize, kind: ArffErrorKind) -> ArffError {
    ArffError { line, kind }
}

/// Reads one possibly-quoted token starting at the beginning of `s`.
/// Returns the token, whether it was quoted, and the unconsumed rest.
fn read_token<'a>(s: &'a str, stop: &[char]) -> Result<(String, bool, &'a str), ArffErrorKind> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    match chars.next() {
        Some((_, q)) if q == '\'' || q == '"' => {
            let mut out = String::new();
            let mut escaped = false;
            for (i, c) in chars {
                if escaped {
                    out.push(c);
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    return Ok((out, true, &s[i + c.len_utf8()..]));
                } else {
                    out.push(c);
                }
            }
            Err(ArffErrorKind::UnterminatedQuote)
        }
        _ => {
            let end = s.find(|c: char| stop.contains(&c)).unwrap_or(s.len());
            Ok((s[..end].trim_end().to_string(), false, &s[end..]))
        }
    }
}

/// Splits a comma-separated list honouring quotes. Each item is returned
/// with a flag telling whether it was quoted.
fn split_cells(s: &str) -> Result<Vec<(String, bool)>, ArffErrorKind> {
    let mut out = Vec::new();
    let mut rest = s;
    loop {
        let (tok, quoted, tail) = read_token(rest, &[','])?;
        out.push((tok, quoted));
        let tail = tail.trim_start();
        if tail.is_empty() {
            return Ok(out);
        }
        match tail.strip_prefix(',') {
            Some(t) => rest = t,
            None => return Err(ArffErrorKind::MalformedHeader(format!("unexpected `{tail}`"))),
        }
    }
}

fn keyword<'a>(line: &'a str, kw: &str) -> Option<&'a str> {
    let head = line.get(..kw.len())?;
    if !head.eq_ignore_ascii_case(kw) {
        return None;
    }
    let rest = &line[kw.len()..];
    if rest.is_empty() || rest.starts_with(char::is_whitespace) {
        Some(rest.trim_start())
    } else {
        None
    }
}

fn parse_kind(spec: &str, line: usize) -> Result<AttributeKind, ArffError> {
    let spec = spec.trim();
    if let Some(inner) = spec.strip_prefix('{') {
        let inner = inner
            .strip_suffix('}')
            .ok_or_else(|| err(line, ArffErrorKind::MalformedHeader("unclosed nominal set".into())))?;
        let values = split_cells(inner)
            .map_err(|k| err(line, k))?
            .into_iter()
            .map(|(v, _)| v)
            .collect();
        return Ok(AttributeKind::Nominal(values));
    }
    match spec.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(AttributeKind::Numeric),
        "string" => Ok(AttributeKind::String),
        other => Err(err(
            line,
            ArffErrorKind::MalformedHeader(format!("unsupported attribute type `{other}`")),
        )),
    }
}

pub fn parse_arff(text: &str) -> Result<ArffRelation, ArffError> {
    let mut name = String::new();
    let mut attributes = Vec::new();
    let mut rows = Vec::new();
    let mut in_data = false;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            if let Some(rest) = keyword(line, "@relation") {
                let (tok, _, _) = read_token(rest, &[' ', '\t']).map_err(|k| err(lineno, k))?;
                name = tok;
            } else if let Some(rest) = keyword(line, "@attribute") {
                let (attr, _, tail) =
                    read_token(rest, &[' ', '\t', '{']).map_err(|k| err(lineno, k))?;
                if attr.is_empty() || tail.trim().is_empty() {
                    return Err(err(
                        lineno,
                        ArffErrorKind::MalformedHeader("attribute needs a name and a type".into()),
                    ));
                }
                let kind = parse_kind(tail, lineno)?;
                attributes.push(Attribute { name: attr, kind });
            } else if keyword(line, "@data").is_some() {
                in_data = true;
            } else {
                return Err(err(
                    lineno,
                    ArffErrorKind::MalformedHeader(format!("unexpected line `{line}`")),
                ));
            }
            continue;
        }

        if line.starts_with('{') {
            return Err(err(lineno, ArffErrorKind::Sparse));
        }
        let cells = split_cells(line).map_err(|k| err(lineno, k))?;
        if cells.len() != attributes.len() {
            return Err(err(
                lineno,
                ArffErrorKind::Arity {
                    expected: attributes.len(),
                    found: cells.len(),
                },
            ));
        }
        let mut row = Vec::with_capacity(cells.len());
        for ((cell, quoted), attr) in cells.into_iter().zip(&attributes) {
            if !quoted && cell == "?" {
                row.push(Value::Missing);
                continue;
            }
            let value = match &attr.kind {
                AttributeKind::Numeric => cell.parse::<f64>().map(Value::Number).map_err(|_| {
                    err(
                        lineno,
                        ArffErrorKind::BadNumber {
                            attribute: attr.name.clone(),
                            value: cell.clone(),
                        },
                    )
                })?,
                AttributeKind::Nominal(values) => {
                    if !values.contains(&cell) {
                        return Err(err(
                            lineno,
                            ArffErrorKind::UndeclaredNominal {
                                attribute: attr.name.clone(),
                                value: cell,
                            },
                        ));
                    }
                    Value::Text(cell)
                }
                AttributeKind::String => Value::Text(cell),
            };
            row.push(value);
        }
        rows.push(row);
    }

    if !in_data {
        return Err(err(last_line.max(1), ArffErrorKind::NoData));
    }
    Ok(ArffRelation {
        name,
        attributes,
        rows,
    })
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s == "?"
        || s.starts_with('%')
        || s.starts_with(char::is_whitespace)
        || s.ends_with(char::is_whitespace)
        || s.contains([',', '\'', '"', '\\', '{', '}', ' ', '\t'])
}

fn quoted(s: &str) -> String {
    if !needs_quotes(s) {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

impl fmt::Display for ArffRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "@relation {}", quoted(&self.name))?;
        writeln!(f)?;
        for attr in &self.attributes {
            let kind = match &attr.kind {
                AttributeKind::Numeric => "numeric".to_string(),
                AttributeKind::String => "string".to_string(),
                AttributeKind::Nominal(vs) => {
                    let vs: Vec<String> = vs.iter().map(|v| quoted(v)).collect();
                    format!("{{{}}}", vs.join(","))
                }
            };
            writeln!(f, "@attribute {} {}", quoted(&attr.name), kind)?;
        }
        writeln!(f)?;
        writeln!(f, "@data")?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Missing => "?".to_string(),
                    Value::Number(x) => x.to_string(),
                    Value::Text(s) => quoted(s),
                })
                .collect();
            writeln!(f, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_numeric_and_missing() {
        let rel = parse_arff("@relation t\n@attribute x numeric\n@data\n1.5\n?").unwrap();
        assert_eq!(rel.name, "t");
        assert_eq!(rel.attributes.len(), 1);
        assert_eq!(rel.rows, vec![vec![Value::Number(1.5)], vec![Value::Missing]]);
    }

    #[test]
    fn undeclared_nominal_reports_line() {
        let e = parse_arff("@relation t\n@attribute s {a,b}\n@data\na\nc\n").unwrap_err();
        assert_eq!(e.line, 5);
        assert!(matches!(e.kind, ArffErrorKind::UndeclaredNominal { ref value, .. } if value == "c"));
    }

    #[test]
    fn arity_mismatch_reports_line() {
        let e = parse_arff("@relation t\n@attribute a numeric\n@attribute b numeric\n@data\n1,2\n3\n")
            .unwrap_err();
        assert_eq!(
            e,
            ArffError {
                line: 6,
                kind: ArffErrorKind::Arity { expected: 2, found: 1 }
            }
        );
    }

    #[test]
    fn malformed_header() {
        let e = parse_arff("@relation t\n@attribute d date\n@data\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ArffErrorKind::MalformedHeader(_)));
        let e = parse_arff("@relation t\nbogus\n@data\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn bad_number_and_sparse() {
        let e = parse_arff("@relation t\n@attribute x numeric\n@data\nabc\n").unwrap_err();
        assert!(matches!(e.kind, ArffErrorKind::BadNumber { .. }));
        let e = parse_arff("@relation t\n@attribute x numeric\n@data\n{0 1}\n").unwrap_err();
        assert_eq!(e.kind, ArffErrorKind::Sparse);
    }

    #[test]
    fn missing_data_section() {
        let e = parse_arff("@relation t\n@attribute x numeric\n").unwrap_err();
        assert_eq!(e.kind, ArffErrorKind::NoData);
    }

    #[test]
    fn case_insensitive_keywords_quotes_and_comments() {
        let text = "% header comment\n@RELATION 'my rel'\n@ATTRIBUTE \"instance id\" STRING\n\
                    @Attribute runstatus {ok, timeout, 'mem out'}\n@DATA\n% row comment\n\
                    'a/b, c.cnf', 'mem out'\n\"x\", ok\n";
        let rel = parse_arff(text).unwrap();
        assert_eq!(rel.name, "my rel");
        assert_eq!(rel.attributes[0].name, "instance id");
        assert_eq!(
            rel.attributes[1].kind,
            AttributeKind::Nominal(vec!["ok".into(), "timeout".into(), "mem out".into()])
        );
        assert_eq!(rel.rows[0][0], Value::Text("a/b, c.cnf".into()));
        assert_eq!(rel.rows[0][1], Value::Text("mem out".into()));
        assert_eq!(rel.rows[1][0], Value::Text("x".into()));
        assert_eq!(rel.column("RUNSTATUS"), Some(1));
    }

    #[test]
    fn quoted_question_mark_is_text() {
        let rel = parse_arff("@relation t\n@attribute s string\n@data\n'?'\n?\n").unwrap();
        assert_eq!(rel.rows[0][0], Value::Text("?".into()));
        assert_eq!(rel.rows[1][0], Value::Missing);
    }

    #[test]
    fn hand_built_round_trip() {
        let text = "@relation rt\n@attribute id string\n@attribute v numeric\n\
                    @attribute s {ok,timeout}\n@data\n\
                    i1,1.5,ok\n'i 2',?,timeout\ni3,-2e-3,?\n'it\\'s',0,ok\n\"q,\",1e10,timeout\n";
        let rel = parse_arff(text).unwrap();
        assert_eq!(rel.attributes.len(), 3);
        assert_eq!(rel.rows.len(), 5);
        let again = parse_arff(&rel.to_string()).unwrap();
        assert_eq!(rel, again);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn text() -> impl Strategy<Value = String> {
            proptest::string::string_regex("[a-zA-Z0-9 ,'\"%{}?\\\\._-]{0,8}").unwrap()
        }

        fn relation() -> impl Strategy<Value = ArffRelation> {
            let kinds = prop::collection::vec(0u8..3, 1..5);
            (text(), kinds).prop_flat_map(|(name, kinds)| {
                let nominal = prop::collection::btree_set("[a-z]{1,4}", 1..4)
                    .prop_map(|s| s.into_iter().collect::<Vec<_>>());
                let attrs = kinds
                    .iter()
                    .map(|&k| {
                        let nominal = nominal.clone();
                        (text(), nominal).prop_map(move |(n, vals)| Attribute {
                            name: if n.trim().is_empty() { format!("a{n}x") } else { n },
                            kind: match k {
                                0 => AttributeKind::Numeric,
                                1 => AttributeKind::String,
                                _ => AttributeKind::Nominal(vals),
                            },
                        })
                    })
                    .collect::<Vec<_>>();
                (Just(name), attrs).prop_flat_map(|(name, attrs)| {
                    let cells = attrs
                        .iter()
                        .map(|a| -> BoxedStrategy<Value> {
                            let cell = match &a.kind {
                                AttributeKind::Numeric => any::<f64>()
                                    .prop_filter("finite", |x| x.is_finite())
                                    .prop_map(Value::Number)
                                    .boxed(),
                                AttributeKind::String => text().prop_map(Value::Text).boxed(),
                                AttributeKind::Nominal(vs) => {
                                    prop::sample::select(vs.clone()).prop_map(Value::Text).boxed()
                                }
                            };
                            prop_oneof![1 => Just(Value::Missing), 4 => cell].boxed()
                        })
                        .collect::<Vec<_>>();
                    let rows = prop::collection::vec(cells, 0..6);
                    (Just(name), Just(attrs), rows).prop_map(|(name, attributes, rows)| {
                        ArffRelation {
                            name,
                            attributes,
                            rows,
                        }
                    })
                })
            })
        }

        proptest! {
            #[test]
            fn serialize_then_parse_is_identity(rel in relation()) {
                let back = parse_arff(&rel.to_string()).unwrap();
                prop_assert_eq!(back, rel);
            }
        }
    }
}
