//! Dense labeled square matrices and the TSV layout shared by all matrix outputs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Row-major `n x n` grid with one label per row/column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Square<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Square<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Square {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Square {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n.max(1)).map(<[T]>::to_vec).take(self.n).collect()
    }
}

impl<T: Copy> Square<T> {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.n + j] = value;
    }

    /// Writes `value` at `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, value: T) {
        self.set(i, j, value);
        self.set(j, i, value);
    }

    /// Upper-triangle pairs `(i, j)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j)))
    }
}

/// Renders a symmetric matrix as TSV: a header row of labels (first cell
/// empty), then one row per label.
pub fn write_tsv<F>(labels: &[String], mut cell: F) -> String
where
    F: FnMut(usize, usize) -> String,
{
    let mut out = String::new();
    for label in labels {
        out.push('\t');
        out.push_str(label);
    }
    out.push('\n');
    for (i, label) in labels.iter().enumerate() {
        out.push_str(label);
        for j in 0..labels.len() {
            let _ = write!(out, "\t{}", cell(i, j));
        }
        out.push('\n');
    }
    out
}
