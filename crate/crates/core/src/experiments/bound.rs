//! Reference `Eb/N0` values versus the number of active users, loaded from a
//! two-column text table:
//!
//! ```text
//! ka,ebn0_db
//! 25,0.30
//! 50,0.45
//! ```
//!
//! Queries between rows are interpolated linearly in dB; queries outside the
//! covered range are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOUND_HEADER: &str = "ka,ebn0_db";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    rows: Vec<(usize, f64)>,
}

impl BoundTable {
    pub fn new(rows: Vec<(usize, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Contract("bound table has no rows".into()));
        }
        for (i, &(ka, v)) in rows.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Contract(format!("row {i}: non-finite Eb/N0 for Ka = {ka}")));
            }
            if i > 0 && ka <= rows[i - 1].0 {
                return Err(Error::Contract(format!("row {i}: Ka = {ka} is not strictly increasing")));
            }
        }
        Ok(BoundTable { rows })
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |line: usize, reason: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            reason,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == BOUND_HEADER => {}
            Some((_, h)) => return Err(parse_err(1, format!("expected header `{BOUND_HEADER}`, found `{h}`"))),
            None => return Err(parse_err(1, "empty file".into())),
        }
        let mut rows: Vec<(usize, f64)> = Vec::new();
        for (i, raw) in lines {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(parse_err(line_no, format!("expected 2 fields, found {}", fields.len())));
            }
            let ka: usize = fields[0]
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid Ka `{}`", fields[0])))?;
            let v: f64 = fields[1]
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid Eb/N0 `{}`", fields[1])))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, "Eb/N0 must be finite".into()));
            }
            if let Some(&(prev, _)) = rows.last() {
                if ka == prev {
                    return Err(parse_err(line_no, format!("duplicate Ka = {ka}")));
                }
                if ka < prev {
                    return Err(parse_err(line_no, format!("Ka = {ka} after {prev}: rows must increase")));
                }
            }
            rows.push((ka, v));
        }
        if rows.is_empty() {
            return Err(parse_err(1, "no data rows".into()));
        }
        BoundTable::new(rows)
    }

    pub fn rows(&self) -> &[(usize, f64)] {
        &self.rows
    }

    pub fn covers(&self, ka: usize) -> bool {
        ka >= self.rows[0].0 && ka <= self.rows[self.rows.len() - 1].0
    }

    /// Reference `Eb/N0` in dB for `ka` users.
    pub fn ebn0_db(&self, ka: usize) -> Result<f64> {
        if !self.covers(ka) {
            return Err(Error::Range(format!(
                "Ka = {ka} outside the bound table range {}..={}",
                self.rows[0].0,
                self.rows[self.rows.len() - 1].0
            )));
        }
        let pos = self.rows.partition_point(|&(k, _)| k < ka);
        let (k1, v1) = self.rows[pos];
        if k1 == ka {
            return Ok(v1);
        }
        let (k0, v0) = self.rows[pos - 1];
        let t = (ka - k0) as f64 / (k1 - k0) as f64;
        Ok(v0 + t * (v1 - v0))
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from(BOUND_HEADER);
        s.push('\n');
        for (ka, v) in &self.rows {
            s.push_str(&format!("{ka},{v}\n"));
        }
        s
    }
}

pub fn load_bound_table(path: impl AsRef<Path>) -> Result<BoundTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: PathBuf::from(path),
        source,
    })?;
    BoundTable::parse(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<BoundTable> {
        BoundTable::parse(s, Path::new("mem.csv"))
    }

    #[test]
    fn interpolates_in_db() {
        let t = parse("ka,ebn0_db\n50,1.0\n100,2.0\n").unwrap();
        assert!((t.ebn0_db(75).unwrap() - 1.5).abs() < 1e-15);
        assert!((t.ebn0_db(60).unwrap() - 1.2).abs() < 1e-15);
        assert_eq!(t.ebn0_db(100).unwrap(), 2.0);
    }

    #[test]
    fn no_extrapolation() {
        let t = parse("ka,ebn0_db\n50,1.0\n100,2.0\n").unwrap();
        assert!(matches!(t.ebn0_db(49), Err(Error::Range(_))));
        assert!(matches!(t.ebn0_db(101), Err(Error::Range(_))));
    }

    #[test]
    fn single_row_identity() {
        let t = parse("ka,ebn0_db\n25,0.3\n").unwrap();
        assert_eq!(t.ebn0_db(25).unwrap(), 0.3);
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(line_of(parse("ka,ebn0\n1,1\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("ka,ebn0_db\n1,1\n2\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("ka,ebn0_db\n1,1\n1,2\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("ka,ebn0_db\n5,1\n3,2\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("ka,ebn0_db\nx,1\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("ka,ebn0_db\n4,inf\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("ka,ebn0_db\n").unwrap_err()), 1);
    }

    #[test]
    fn csv_round_trip() {
        let t = parse("ka,ebn0_db\n25,0.3\n50,0.45\n").unwrap();
        assert_eq!(parse(&t.to_csv_string()).unwrap(), t);
    }
}
