//! MacKay alist text format.
//!
//! ```text
//! n m                 (columns, rows)
//! max_col_weight max_row_weight
//! col weights (n values)
//! row weights (m values)
//! n lines: 1-based row indices of each column, zero padded
//! m lines: 1-based column indices of each row, zero padded
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::BinMatrix;

#[derive(Debug, Error)]
pub enum AlistError {
    #[error("alist: unexpected end of input while reading {0}")]
    Truncated(&'static str),
    #[error("alist: invalid integer {0:?}")]
    BadInteger(String),
    #[error("alist: index {index} out of range 1..={bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("alist: column and row lists disagree")]
    Inconsistent,
}

pub fn write_alist(m: &BinMatrix) -> String {
    let col_lists: Vec<Vec<usize>> = {
        let mut cols = vec![Vec::new(); m.cols()];
        for i in 0..m.rows() {
            for j in m.row_support(i) {
                cols[j].push(i);
            }
        }
        cols
    };
    let row_lists: Vec<Vec<usize>> = (0..m.rows()).map(|i| m.row_support(i)).collect();
    let max_col = col_lists.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = row_lists.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.cols(), m.rows());
    let _ = writeln!(out, "{max_col} {max_row}");
    let join = |it: &mut dyn Iterator<Item = usize>| it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "{}", join(&mut col_lists.iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut row_lists.iter().map(Vec::len)));
    for (lists, width) in [(&col_lists, max_col), (&row_lists, max_row)] {
        for l in lists {
            let mut padded: Vec<usize> = l.iter().map(|&x| x + 1).collect();
            padded.resize(width, 0);
            let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
        }
    }
    out
}

pub fn read_alist(text: &str) -> Result<BinMatrix, AlistError> {
    let mut tokens = text.split_whitespace();
    let mut next = |what: &'static str| -> Result<usize, AlistError> {
        let t = tokens.next().ok_or(AlistError::Truncated(what))?;
        t.parse::<usize>().map_err(|_| AlistError::BadInteger(t.to_string()))
    };
    let n = next("dimensions")?;
    let m = next("dimensions")?;
    // max degrees are implied by the weight lists
    next("max degrees")?;
    next("max degrees")?;
    let col_w: Vec<usize> = (0..n).map(|_| next("column weights")).collect::<Result<_, _>>()?;
    let row_w: Vec<usize> = (0..m).map(|_| next("row weights")).collect::<Result<_, _>>()?;

    let mut mat = BinMatrix::zeros(m, n);
    // Zero padding is optional: read `weight` non-zero indices, skipping zeros.
    let mut read_list = |weight: usize, bound: usize, what| -> Result<Vec<usize>, AlistError> {
        let mut out = Vec::with_capacity(weight);
        while out.len() < weight {
            let idx = next(what)?;
            if idx == 0 {
                continue;
            }
            if idx > bound {
                return Err(AlistError::IndexOutOfRange { index: idx, bound });
            }
            out.push(idx - 1);
        }
        Ok(out)
    };
    let mut col_lists = Vec::with_capacity(n);
    for &w in &col_w {
        col_lists.push(read_list(w, m, "column lists")?);
    }
    for (j, rows) in col_lists.iter().enumerate() {
        for &i in rows {
            mat.set(i, j, true);
        }
    }
    for (i, &w) in row_w.iter().enumerate() {
        let cols = read_list(w, n, "row lists")?;
        let mut sorted = cols.clone();
        sorted.sort_unstable();
        if sorted != mat.row_support(i) {
            return Err(AlistError::Inconsistent);
        }
    }
    Ok(mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BinVector;

    #[test]
    fn small_roundtrip_and_layout() {
        let m = BinMatrix::from_dense(&[vec![1, 1, 0, 1], vec![0, 1, 1, 0]]);
        let text = write_alist(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "4 2");
        assert_eq!(lines[1], "2 3");
        assert_eq!(lines[2], "1 2 1 1");
        assert_eq!(lines[3], "3 2");
        assert_eq!(lines[4], "1 0");
        assert_eq!(lines[5], "1 2");
        assert_eq!(lines[8], "1 2 4");
        assert_eq!(lines[9], "2 3 0");
        assert_eq!(read_alist(&text).unwrap(), m);
    }

    #[test]
    fn accepts_unpadded_lists() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 3\n";
        let m = read_alist(text).unwrap();
        assert_eq!(m.row(0), BinVector::from_bits(&[1, 1, 0]));
        assert_eq!(m.row(1), BinVector::from_bits(&[0, 1, 1]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(read_alist("3"), Err(AlistError::Truncated(_))));
        assert!(matches!(read_alist("x 2"), Err(AlistError::BadInteger(_))));
        let bad = "2 1\n1 2\n1 1\n2\n5\n1\n1 2\n";
        assert!(matches!(read_alist(bad), Err(AlistError::IndexOutOfRange { .. })));
        let inconsistent = "2 1\n1 2\n1 1\n2\n1\n1\n1 1\n";
        assert!(matches!(read_alist(inconsistent), Err(AlistError::Inconsistent)));
    }
}
