//! Plain-text instance interchange format.
//!
//! ```text
//! n m k
//! v_00 v_01 ... v_0(m-1)      (n rows)
//! ...
//! a b c ...                   (k lines of agent indices)
//! ```
//!
//! Values are written with the shortest decimal that round-trips.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::{Districts, Instance};

pub fn format_instance(instance: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {}", instance.n(), instance.m(), instance.k()).unwrap();
    for row in instance.valuations() {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    for group in instance.districts().groups() {
        let line: Vec<String> = group.iter().map(usize::to_string).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let dims: Vec<usize> = parse_fields(line, header)?;
    let [n, m, k] = dims[..] else {
        return Err(Error::Parse {
            line,
            message: format!("header must be `n m k`, got `{header}`"),
        });
    };

    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, text) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: format!("expected {n} valuation rows"),
        })?;
        let row: Vec<f64> = parse_fields(line, text)?;
        if row.len() != m {
            return Err(Error::Parse {
                line,
                message: format!("expected {m} values, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    let mut groups = Vec::with_capacity(k);
    for _ in 0..k {
        let (line, text) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: format!("expected {k} district lines"),
        })?;
        groups.push(parse_fields(line, text)?);
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse {
            line,
            message: "trailing content".into(),
        });
    }
    Instance::new(rows, Districts::new(groups)?)
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|f| {
            f.parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse `{f}`"),
            })
        })
        .collect()
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_instance(instance))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_layout() {
        let i = Instance::new(
            vec![vec![0.5, 0.5], vec![0.25, 0.75], vec![1.0, 0.0]],
            Districts::new(vec![vec![2, 0], vec![1]]).unwrap(),
        )
        .unwrap();
        let text = format_instance(&i);
        assert_eq!(text, "3 2 2\n0.5 0.5\n0.25 0.75\n1 0\n2 0\n1\n");
        assert_eq!(parse_instance(&text).unwrap(), i);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_instance(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_instance("1 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_instance("1 2 1\n0.5 x\n0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_instance("1 2 1\n0.5 0.5 0\n0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_instance("1 2 1\n0.6 0.5\n0\n"), Err(Error::RowSum { .. })));
        assert!(matches!(parse_instance("1 2 1\n0.5 0.5\n0\n0\n"), Err(Error::Parse { line: 4, .. })));
    }
}
