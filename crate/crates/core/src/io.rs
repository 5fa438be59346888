//! JSON formats for matrices and channels.
//!
//! Matrices are `{"dim": d, "re": [[...]], "im": [[...]]}` in row-major order.
//! Rectangular matrices (Kraus operators between different dimensions) add a
//! `"cols"` field; `"dim"` is then the row count.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, MAX_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dim: m.nrows(),
            cols: (m.nrows() != m.ncols()).then_some(m.ncols()),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let rows = self.dim;
        let cols = self.cols.unwrap_or(rows);
        if rows == 0 || cols == 0 || rows > MAX_DIM * MAX_DIM || cols > MAX_DIM * MAX_DIM {
            return Err(Error::Format(format!("matrix shape {rows}x{cols} not supported")));
        }
        if self.cols.is_none() && rows > MAX_DIM {
            return Err(Error::Format(format!("dimension {rows} exceeds {MAX_DIM}")));
        }
        let check = |name: &str, part: &[Vec<f64>]| -> Result<()> {
            if part.len() != rows || part.iter().any(|r| r.len() != cols) {
                return Err(Error::Format(format!("\"{name}\" is not a {rows}x{cols} array")));
            }
            if part.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Format(format!("\"{name}\" contains a non-finite entry")));
            }
            Ok(())
        };
        check("re", &self.re)?;
        if !self.im.is_empty() {
            check("im", &self.im)?;
        }
        Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
            let im = if self.im.is_empty() { 0.0 } else { self.im[i][j] };
            c(self.re[i][j], im)
        }))
    }
}

/// `#[serde(with = "serde_matrix")]` for a single matrix field.
pub mod serde_matrix {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        MatrixJson::deserialize(d)?
            .to_matrix()
            .map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "serde_matrix_vec")]` for a list of matrices.
pub mod serde_matrix_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(MatrixJson::from_matrix).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ComplexMatrix>, D::Error> {
        Vec::<MatrixJson>::deserialize(d)?
            .iter()
            .map(|m| m.to_matrix().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<MatrixJson>,
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_pretty_json(value)?)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    read_json::<MatrixJson>(path)?.to_matrix()
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_json(path, &MatrixJson::from_matrix(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_round_trip() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.1, j as f64 - 0.3));
        let text = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        assert!(text.starts_with("{\"dim\":3,\"re\""));
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
    }

    #[test]
    fn rectangular_round_trip() {
        let m = ComplexMatrix::from_fn(2, 4, |i, j| c((i * j) as f64, 1.0));
        let json = MatrixJson::from_matrix(&m);
        assert_eq!(json.cols, Some(4));
        assert_eq!(json.to_matrix().unwrap(), m);
    }

    #[test]
    fn missing_imaginary_part_is_zero() {
        let m: MatrixJson = serde_json::from_str(r#"{"dim":2,"re":[[1,0],[0,2]]}"#).unwrap();
        let m = m.to_matrix().unwrap();
        assert_eq!(m[(1, 1)], c(2.0, 0.0));
    }

    #[test]
    fn ragged_and_oversized_rejected() {
        let ragged: MatrixJson = serde_json::from_str(r#"{"dim":2,"re":[[1,0],[0]],"im":[]}"#).unwrap();
        assert!(ragged.to_matrix().is_err());
        let big = MatrixJson {
            dim: 65,
            cols: None,
            re: vec![vec![0.0; 65]; 65],
            im: vec![],
        };
        assert!(big.to_matrix().is_err());
    }
}
