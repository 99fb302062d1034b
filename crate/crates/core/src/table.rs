//! In-memory tables and deterministic CSV emission.
//!
//! Every emitted file is UTF-8 CSV with LF line endings; numeric cells are
//! written as 6-decimal fixed point. Identical inputs must produce
//! byte-identical output.

use crate::scalar::Scalar;

/// A header plus string rows, ready to serialize.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width matches header");
        self.rows.push(row);
    }

    /// Serialize with LF terminators; cells are quoted only when needed.
    pub fn to_csv_string(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }
}

/// 6-decimal fixed-point rendering used by all emitted numerics.
///
/// Adding zero first normalizes `-0.0` so no file ever contains `-0.000000`.
pub fn fmt_fixed<F: Scalar>(v: F) -> String {
    format!("{:.6}", v + F::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_cells_containing_commas() {
        let mut t = Table::new(["a", "b"]);
        t.push_row(vec!["plain".into(), "has, comma".into()]);
        assert_eq!(t.to_csv_string(), "a,b\nplain,\"has, comma\"\n");
    }

    #[test]
    fn fixed_point_is_six_decimals() {
        assert_eq!(fmt_fixed(0.25f64), "0.250000");
        assert_eq!(fmt_fixed(13.211723385168426f64), "13.211723");
        assert_eq!(fmt_fixed(-0.0f64), "0.000000");
        assert_eq!(fmt_fixed(2.0f32), "2.000000");
    }

    #[test]
    fn header_only_table_serializes() {
        let t = Table::new(["x"]);
        assert_eq!(t.to_csv_string(), "x\n");
    }
}
