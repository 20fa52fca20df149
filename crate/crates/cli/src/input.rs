//! Reader for delimited lifetime data.
//!
//! Fields are separated by commas and/or whitespace. `#` starts a comment.
//! The first data line is taken as a header when its first token is not a
//! number. Column 1 is the time, the optional column 2 the status (1 event,
//! 0 censored).

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub times: Vec<f64>,
    /// Present when every row has a status column.
    pub status: Option<Vec<bool>>,
    pub header: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("no observations found")]
    Empty,
    #[error("status column present on some rows only (first missing at line {line})")]
    MixedStatus { line: usize },
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

fn err(line: usize, message: impl fmt::Display) -> ParseError {
    ParseError::Line {
        line,
        message: message.to_string(),
    }
}

pub fn parse(text: &str) -> Result<Dataset, ParseError> {
    let mut times = Vec::new();
    let mut status: Vec<Option<bool>> = Vec::new();
    let mut lines_of: Vec<usize> = Vec::new();
    let mut header = None;
    let mut seen_data = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = fields(content).collect();
        if toks.is_empty() {
            continue;
        }
        if !seen_data && header.is_none() && toks[0].parse::<f64>().is_err() {
            header = Some(toks.iter().map(|s| s.to_string()).collect());
            continue;
        }
        seen_data = true;
        if toks.len() > 2 {
            return Err(err(line_no, format!("expected 1 or 2 fields, found {}", toks.len())));
        }
        let t: f64 = toks[0]
            .parse()
            .map_err(|_| err(line_no, format!("time {:?} is not a number", toks[0])))?;
        if !t.is_finite() || t < 0.0 {
            return Err(err(line_no, format!("time {t} must be finite and nonnegative")));
        }
        times.push(t);
        lines_of.push(line_no);
        status.push(match toks.get(1) {
            None => None,
            Some(&"1") => Some(true),
            Some(&"0") => Some(false),
            Some(s) => return Err(err(line_no, format!("status {s:?} must be 0 or 1"))),
        });
    }
    if times.is_empty() {
        return Err(ParseError::Empty);
    }
    let status = if status.iter().all(Option::is_none) {
        None
    } else if let Some(k) = status.iter().position(Option::is_none) {
        return Err(ParseError::MixedStatus { line: lines_of[k] });
    } else {
        Some(status.into_iter().map(|s| s.unwrap()).collect())
    };
    Ok(Dataset {
        times,
        status,
        header,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_column() {
        let d = parse("1.5\n2\n\n0.25  # trailing\n").unwrap();
        assert_eq!(d.times, vec![1.5, 2.0, 0.25]);
        assert!(d.status.is_none() && d.header.is_none());
    }

    #[test]
    fn header_and_status() {
        let d = parse("# comment\ntime,status\n1.0,1\n2.0, 0\n3.0\t1\n").unwrap();
        assert_eq!(d.header.unwrap(), vec!["time", "status"]);
        assert_eq!(d.status.unwrap(), vec![true, false, true]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            parse("1\n2\nx\n"),
            Err(err(3, "time \"x\" is not a number"))
        );
        assert!(matches!(parse("1\n-2\n"), Err(ParseError::Line { line: 2, .. })));
        assert!(matches!(parse("1,2\n"), Err(ParseError::Line { line: 1, .. })));
        assert!(matches!(parse("1 1 1\n"), Err(ParseError::Line { line: 1, .. })));
        assert_eq!(parse("1,1\n2\n"), Err(ParseError::MixedStatus { line: 2 }));
        assert_eq!(parse("# nothing\n"), Err(ParseError::Empty));
        assert_eq!(parse("t\n"), Err(ParseError::Empty));
    }

    #[test]
    fn header_only_on_first_data_line() {
        assert!(matches!(parse("1\ntime\n"), Err(ParseError::Line { line: 2, .. })));
    }
}
