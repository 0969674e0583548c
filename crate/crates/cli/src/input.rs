//! CSV series input: one or more comma-separated columns, header optional.

use std::fs;
use std::io::{self, Read};
use std::path::Path;

use crate::CliError;

fn is_numeric(token: &str) -> bool {
    token.trim().parse::<f64>().is_ok()
}

/// Reads one column of numbers. A first line whose first token is not a
/// number is treated as a header.
pub fn read_column(path: &Path, column: Option<&str>) -> Result<Vec<f64>, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
    };
    parse_column(&text, column)
}

pub fn parse_column(text: &str, column: Option<&str>) -> Result<Vec<f64>, CliError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let header: Option<Vec<String>> = match lines.peek() {
        Some((_, first)) if !is_numeric(first.split(',').next().unwrap_or("")) => {
            let h = first.split(',').map(|s| s.trim().to_string()).collect();
            lines.next();
            Some(h)
        }
        _ => None,
    };
    let index = match column {
        None => 0,
        Some(sel) => match sel.parse::<usize>() {
            Ok(i) => i,
            Err(_) => header
                .as_ref()
                .and_then(|h| h.iter().position(|name| name == sel))
                .ok_or_else(|| CliError::Config(format!("--column: no column named '{sel}'")))?,
        },
    };
    lines
        .map(|(lineno, line)| {
            let field = line.split(',').nth(index).ok_or_else(|| {
                CliError::Input(format!("line {}: no column {index}", lineno + 1))
            })?;
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("line {}: cannot parse '{}' as a number", lineno + 1, field.trim())))
        })
        .collect()
}
