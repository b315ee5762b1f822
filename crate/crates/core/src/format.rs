//! Text formats.
//!
//! GTM1 matrix files:
//!
//! ```text
//! GTM1 <m> <n> <model_tag> <seed>
//! <n characters of 0/1>        (m lines)
//! ```
//!
//! Every line, including the last, ends with `\n`. The reader accepts only
//! this canonical layout, so `write_gtm1(read_gtm1(f)) == f` for any file it
//! accepts.
//!
//! Answer files hold one line of `m` characters `0`/`1`. Item lists are
//! whitespace-separated one-based indices.

use std::fmt::Write as _;

use crate::bits::BitVec;
use crate::error::{Error, Result};
use crate::matrix::{AnswerVector, ItemSet, ModelTag, TestMatrix};

pub const GTM1_MAGIC: &str = "GTM1";

pub fn write_gtm1(matrix: &TestMatrix) -> String {
    let mut out = String::with_capacity(matrix.rows() * (matrix.cols() + 1) + 64);
    writeln!(
        out,
        "{GTM1_MAGIC} {} {} {} {}",
        matrix.rows(),
        matrix.cols(),
        matrix.model(),
        matrix.seed()
    )
    .unwrap();
    let mut line = vec![b'0'; matrix.cols()];
    for r in 0..matrix.rows() {
        line.fill(b'0');
        for c in matrix.row_ones_iter(r) {
            line[c] = b'1';
        }
        out.push_str(std::str::from_utf8(&line).unwrap());
        out.push('\n');
    }
    out
}

fn parse_header_field<T: std::str::FromStr>(token: &str, column: usize, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(1, column, format!("invalid {what} `{token}`")))
}

pub fn read_gtm1(text: &str) -> Result<TestMatrix> {
    let mut lines = text.split_inclusive('\n');
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, 1, "empty file, expected GTM1 header"))?;
    let header = header
        .strip_suffix('\n')
        .ok_or_else(|| Error::parse(1, header.len() + 1, "missing newline after header"))?;

    let tokens: Vec<&str> = header.split(' ').collect();
    if tokens.len() != 5 || tokens.iter().any(|t| t.is_empty()) {
        return Err(Error::parse(
            1,
            1,
            "header must be `GTM1 <m> <n> <model_tag> <seed>` separated by single spaces",
        ));
    }
    let mut col = 1;
    let columns: Vec<usize> = tokens
        .iter()
        .map(|t| {
            let c = col;
            col += t.len() + 1;
            c
        })
        .collect();
    if tokens[0] != GTM1_MAGIC {
        return Err(Error::parse(1, 1, format!("bad magic `{}`", tokens[0])));
    }
    let m: usize = parse_header_field(tokens[1], columns[1], "row count")?;
    let n: usize = parse_header_field(tokens[2], columns[2], "column count")?;
    let model = ModelTag::parse(tokens[3])
        .ok_or_else(|| Error::parse(1, columns[3], format!("unknown model tag `{}`", tokens[3])))?;
    let seed: u64 = parse_header_field(tokens[4], columns[4], "seed")?;
    // canonical decimal only, so the header writes back byte-for-byte
    for (i, t) in tokens.iter().enumerate().skip(1) {
        if i != 3 && t.len() > 1 && t.starts_with('0') {
            return Err(Error::parse(1, columns[i], "leading zeros are not allowed"));
        }
    }
    if m == 0 || n == 0 {
        return Err(Error::parse(1, columns[1], "dimensions must be positive"));
    }

    let mut rows = Vec::with_capacity(m);
    for r in 0..m {
        let line_no = r + 2;
        let line = lines.next().ok_or_else(|| {
            Error::parse(line_no, 1, format!("expected {m} matrix rows, found {r}"))
        })?;
        let body = line
            .strip_suffix('\n')
            .ok_or_else(|| Error::parse(line_no, line.len() + 1, "missing newline"))?;
        rows.push(parse_bit_line(body, n, line_no)?);
    }
    if lines.next().is_some() {
        return Err(Error::parse(m + 2, 1, "trailing content after last row"));
    }
    TestMatrix::from_rows(&rows, seed, model).map_err(|e| match e {
        Error::Input(msg) => Error::parse(1, columns[3], msg),
        other => other,
    })
}

fn parse_bit_line(body: &str, expected: usize, line_no: usize) -> Result<BitVec> {
    let mut bits = BitVec::zeros(expected);
    let mut count = 0;
    for (i, ch) in body.chars().enumerate() {
        match ch {
            '0' | '1' if i < expected => {
                if ch == '1' {
                    bits.set(i, true);
                }
            }
            '0' | '1' => {
                return Err(Error::parse(
                    line_no,
                    i + 1,
                    format!("expected {expected} bits, line is longer"),
                ))
            }
            other => {
                return Err(Error::parse(
                    line_no,
                    i + 1,
                    format!("unexpected character {other:?}, expected 0 or 1"),
                ))
            }
        }
        count += 1;
    }
    if count != expected {
        return Err(Error::parse(
            line_no,
            count + 1,
            format!("expected {expected} bits, found {count}"),
        ));
    }
    Ok(bits)
}

pub fn write_answers(answers: &AnswerVector) -> String {
    let mut s = answers.to_bit_string();
    s.push('\n');
    s
}

/// Parses an answer file. A single trailing newline is allowed.
pub fn read_answers(text: &str, expected_len: usize) -> Result<AnswerVector> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if let Some(pos) = body.find('\n') {
        return Err(Error::parse(
            2,
            1,
            format!(
                "answer file must be a single line (extra content after column {})",
                pos + 1
            ),
        ));
    }
    parse_bit_line(body, expected_len, 1).map(AnswerVector::from_bits)
}

/// Parses whitespace-separated one-based indices into a zero-based set.
pub fn read_item_list(text: &str, n: usize) -> Result<ItemSet> {
    let mut items = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let mut offset = 0;
        for token in line.split_whitespace() {
            let column = line[offset..].find(token).map_or(1, |p| offset + p + 1);
            offset = column - 1 + token.len();
            let value: usize = token
                .parse()
                .map_err(|_| Error::parse(li + 1, column, format!("invalid item `{token}`")))?;
            if value == 0 || value > n {
                return Err(Error::parse(
                    li + 1,
                    column,
                    format!("item {value} out of range 1..={n}"),
                ));
            }
            items.push(value - 1);
        }
    }
    ItemSet::new(items)
}

pub fn write_item_list(items: &ItemSet) -> String {
    let mut s = items.to_one_based_string();
    s.push('\n');
    s
}
