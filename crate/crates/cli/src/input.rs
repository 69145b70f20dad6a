use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ValueKind {
    #[value(name = "p")]
    PValues,
    #[value(name = "z")]
    ZScores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputTable {
    pub values: Vec<f64>,
    pub kind: ValueKind,
    pub source: String,
}

/// One number per line; blank lines and `#` comments are skipped.
pub fn parse_values(reader: impl Read, kind: ValueKind, source: &str) -> Result<InputTable, CliError> {
    let mut values = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| CliError::Usage(format!("{source}: {e}")))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let v: f64 = text
            .parse()
            .map_err(|_| CliError::Usage(format!("{source}:{}: not a number: `{text}`", n + 1)))?;
        if !v.is_finite() {
            return Err(CliError::Usage(format!("{source}:{}: non-finite value", n + 1)));
        }
        if kind == ValueKind::PValues && !(0.0..=1.0).contains(&v) {
            return Err(CliError::Usage(format!(
                "{source}:{}: p-value {v} outside [0, 1]",
                n + 1
            )));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::Usage(format!("{source}: no values")));
    }
    Ok(InputTable {
        values,
        kind,
        source: source.to_string(),
    })
}

/// Reads from a file, or standard input when the path is `-`.
pub fn read_values(path: &Path, kind: ValueKind) -> Result<InputTable, CliError> {
    if path == Path::new("-") {
        parse_values(std::io::stdin().lock(), kind, "<stdin>")
    } else {
        let f = std::fs::File::open(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        parse_values(f, kind, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_blanks() {
        let text = "# header\n0.1\n\n  0.5 \n# note\n0.9\n";
        let t = parse_values(text.as_bytes(), ValueKind::PValues, "x").unwrap();
        assert_eq!(t.values, vec![0.1, 0.5, 0.9]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_values("abc\n".as_bytes(), ValueKind::ZScores, "x").is_err());
        assert!(parse_values("1.5\n".as_bytes(), ValueKind::PValues, "x").is_err());
        assert!(parse_values("1.5\n".as_bytes(), ValueKind::ZScores, "x").is_ok());
        assert!(parse_values("inf\n".as_bytes(), ValueKind::ZScores, "x").is_err());
        assert!(parse_values("# only\n".as_bytes(), ValueKind::ZScores, "x").is_err());
    }
}
