//! Reference tables bundled with the crate (see `fixtures/`).
//!
//! Cells keep the printed text so comparisons can be made digit for digit;
//! `SHA256SUMS` pins the transcription.

use crate::error::{Error, Result};

pub const TABLE2_CSV: &str = include_str!("../fixtures/table2.csv");
pub const TABLE3_CSV: &str = include_str!("../fixtures/table3.csv");
pub const TABLE4_CSV: &str = include_str!("../fixtures/table4.csv");
pub const HEADLINE_CSV: &str = include_str!("../fixtures/headline.csv");
pub const SHA256SUMS: &str = include_str!("../fixtures/SHA256SUMS");

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Fixture {
    fn parse(name: &'static str, text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r
            .headers()
            .map_err(|e| Error::Fixture(format!("{name}: {e}")))?
            .iter()
            .map(String::from)
            .collect::<Vec<_>>();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Fixture(format!("{name}: {e}")))?;
            rows.push(rec.iter().map(String::from).collect());
        }
        Ok(Self { name, columns, rows })
    }

    pub fn column_index(&self, col: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == col)
            .ok_or_else(|| Error::Fixture(format!("{} has no column {col:?}", self.name)))
    }

    /// Numeric cell; `None` for blank or `N/A`.
    pub fn value(&self, row: usize, col: &str) -> Result<Option<f64>> {
        let cell = self
            .rows
            .get(row)
            .ok_or_else(|| Error::Fixture(format!("{} has no row {row}", self.name)))?[self.column_index(col)?]
        .trim();
        if cell.is_empty() || cell == "N/A" {
            return Ok(None);
        }
        cell.parse().map(Some).map_err(|_| Error::Fixture(format!("{}: {cell:?} is not a number", self.name)))
    }

    /// Every numeric value of a column, skipping blanks.
    pub fn column(&self, col: &str) -> Result<Vec<f64>> {
        (0..self.rows.len()).filter_map(|r| self.value(r, col).transpose()).collect()
    }
}

/// Tilted-inequality scan: 22 rows.
pub fn table2() -> Fixture {
    Fixture::parse("table2", TABLE2_CSV).expect("bundled table2 parses")
}

/// Chained-inequality scan, `n = 2..45`: 44 rows.
pub fn table3() -> Fixture {
    Fixture::parse("table3", TABLE3_CSV).expect("bundled table3 parses")
}

/// State angle and wave-plate angles (degrees) for the two M inequalities.
pub fn table4() -> Fixture {
    Fixture::parse("table4", TABLE4_CSV).expect("bundled table4 parses")
}

/// Headline reference values: `key,value,uncertainty`.
pub fn headline() -> Fixture {
    Fixture::parse("headline", HEADLINE_CSV).expect("bundled headline values parse")
}

pub fn headline_value(key: &str) -> Result<f64> {
    let h = headline();
    let row = h
        .rows
        .iter()
        .position(|r| r[0] == key)
        .ok_or_else(|| Error::Fixture(format!("no headline value {key:?}")))?;
    h.value(row, "value")?.ok_or_else(|| Error::Fixture(format!("headline value {key:?} is blank")))
}

pub fn by_name(name: &str) -> Result<Fixture> {
    match name {
        "table2" => Ok(table2()),
        "table3" => Ok(table3()),
        "table4" => Ok(table4()),
        "headline" => Ok(headline()),
        other => Err(Error::Fixture(format!("unknown fixture {other:?}"))),
    }
}

/// `(file name, contents)` of every bundled table.
pub fn raw_files() -> [(&'static str, &'static str); 4] {
    [
        ("table2.csv", TABLE2_CSV),
        ("table3.csv", TABLE3_CSV),
        ("table4.csv", TABLE4_CSV),
        ("headline.csv", HEADLINE_CSV),
    ]
}
