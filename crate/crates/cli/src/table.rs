use std::io::{self, Write};

use seqmeas::oracle::RNG_ALGORITHM;
use sha2::{Digest, Sha256};

/// CSV output: `#` metadata lines, a header row, then data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    meta: Vec<(String, String)>,
    notes: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    /// Starts a table with the standard provenance block.
    pub fn new(command: &str, seed: Option<u64>, config: &[u8], header: &[&str]) -> Self {
        let mut meta = vec![
            ("tool".to_string(), format!("seqmeas {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), command.to_string()),
        ];
        if let Some(seed) = seed {
            meta.push(("seed".to_string(), seed.to_string()));
        }
        meta.push(("config-sha256".to_string(), sha256_hex(config)));
        meta.push(("rng".to_string(), RNG_ALGORITHM.to_string()));
        Self {
            meta,
            notes: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        for n in &self.notes {
            writeln!(w, "# note: {n}")?;
        }
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1e-300, -2.5e17, 0.14500641327103, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn writes_metadata_header_rows() {
        let mut t = CsvTable::new("seqmeas fig2", None, b"cfg", &["a", "b"]);
        t.note("hello");
        t.push(vec![num(1.0), num(0.5)]);
        let mut out = Vec::new();
        t.write_to(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# tool: seqmeas "));
        assert_eq!(lines[1], "# command: seqmeas fig2");
        assert!(lines[2].starts_with("# config-sha256: "));
        assert_eq!(lines[4], "# note: hello");
        assert_eq!(&lines[5..], ["a,b", "1.0,0.5"]);
    }
}
