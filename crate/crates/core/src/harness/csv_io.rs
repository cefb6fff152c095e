use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Which columns to keep from a CSV file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ColumnSelection {
    #[default]
    All,
    Indices(Vec<usize>),
}

/// Reads a rectangular numeric CSV. A first row that does not parse as
/// numbers is taken as a header and skipped. Rows and columns in errors are
/// 1-based file positions.
pub fn load_csv_series(path: impl AsRef<Path>, columns: &ColumnSelection) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv_series(&text, columns)
}

pub fn parse_csv_series(text: &str, columns: &ColumnSelection) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::Csv {
            row: line,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, usize>> = record
            .iter()
            .enumerate()
            .map(|(j, cell)| cell.parse::<f64>().map_err(|_| j + 1))
            .collect();
        if i == 0 && parsed.iter().any(|p| p.is_err()) {
            width = Some(record.len());
            continue; // header
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Csv {
                row: line,
                col: record.len().min(expected) + 1,
                msg: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let mut values = Vec::with_capacity(expected);
        for p in parsed {
            match p {
                Ok(v) => values.push(v),
                Err(col) => {
                    return Err(Error::Csv {
                        row: line,
                        col,
                        msg: format!("not a number: {:?}", &record[col - 1]),
                    })
                }
            }
        }
        rows.push(values);
    }
    let width = width.unwrap_or(0);
    let keep: Vec<usize> = match columns {
        ColumnSelection::All => (0..width).collect(),
        ColumnSelection::Indices(idx) => {
            if let Some(&bad) = idx.iter().find(|&&c| c >= width) {
                return Err(Error::invalid(format!("column {bad} out of range for {width} columns")));
            }
            idx.clone()
        }
    };
    let mut out = Array2::zeros((rows.len(), keep.len()));
    for (i, row) in rows.iter().enumerate() {
        for (k, &c) in keep.iter().enumerate() {
            out[[i, k]] = row[c];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn plain_numbers() {
        let m = parse_csv_series("1,2\n3,4", &ColumnSelection::All).unwrap();
        assert_eq!(m, array![[1.0, 2.0], [3.0, 4.0]]);
    }

    #[test]
    fn header_skipped_and_columns_selected() {
        let m = parse_csv_series("t,x\n0,1.5\n1,2.5\n", &ColumnSelection::All).unwrap();
        assert_eq!(m, array![[0.0, 1.5], [1.0, 2.5]]);
        let x = parse_csv_series("t,x\n0,1.5\n1,2.5\n", &ColumnSelection::Indices(vec![1])).unwrap();
        assert_eq!(x, array![[1.5], [2.5]]);
        assert!(parse_csv_series("1,2\n", &ColumnSelection::Indices(vec![2])).is_err());
    }

    #[test]
    fn ragged_row_reports_row() {
        match parse_csv_series("1,2\n3", &ColumnSelection::All) {
            Err(Error::Csv { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_cell_reports_position() {
        match parse_csv_series("1,2\n3,abc\n", &ColumnSelection::All) {
            Err(Error::Csv { row, col, .. }) => assert_eq!((row, col), (2, 2)),
            other => panic!("{other:?}"),
        }
    }
}
