use std::fmt::Write as _;
use std::path::Path;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Writes coordinate-format Matrix Market (`real general`, 1-based).
pub fn write_matrix_market(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz()).unwrap();
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            writeln!(s, "{} {} {:.17e}", i + 1, c + 1, v).unwrap();
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))?
        .to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[2] != "coordinate" {
        return Err(Error::Parse(format!("unsupported header: {header}")));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse(format!("unsupported symmetry {other}"))),
    };
    let mut data = lines.filter(|l| !l.starts_with('%') && !l.trim().is_empty());
    let size = data
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims = parse_numbers::<usize>(size, 3)?;
    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    for line in data.by_ref().take(dims[2]) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() < 3 {
            return Err(Error::Parse(format!("bad entry line: {line}")));
        }
        let i: usize = parse(parts[0])?;
        let j: usize = parse(parts[1])?;
        let v: f64 = parse(parts[2])?;
        if i == 0 || j == 0 {
            return Err(Error::Parse("indices are 1-based".into()));
        }
        rows.push(i - 1);
        cols.push(j - 1);
        vals.push(v);
        if symmetric && i != j {
            rows.push(j - 1);
            cols.push(i - 1);
            vals.push(v);
        }
    }
    if vals.len() < dims[2] {
        return Err(Error::Parse(format!("expected {} entries", dims[2])));
    }
    CsrMatrix::from_triplets(dims[0], dims[1], &rows, &cols, &vals)
        .map_err(|e| Error::Parse(e.to_string()))
}

/// One value per line, full precision.
pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::with_capacity(v.len() * 25);
    for x in v {
        writeln!(s, "{x:.17e}").unwrap();
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse(l.trim()))
        .collect()
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("cannot parse '{s}'")))
}

fn parse_numbers<T: std::str::FromStr>(line: &str, n: usize) -> Result<Vec<T>> {
    let out: Vec<T> = line.split_whitespace().map(parse).collect::<Result<_>>()?;
    if out.len() != n {
        return Err(Error::Parse(format!("expected {n} numbers in '{line}'")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.mtx");
        let a = CsrMatrix::from_dense(2, 3, &[1.0, 0.0, -2.5, 0.0, 1e-17, 3.0]);
        write_matrix_market(&a, &p).unwrap();
        assert_eq!(read_matrix_market(&p).unwrap(), a);
    }

    #[test]
    fn symmetric_input_is_mirrored() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.mtx");
        std::fs::write(
            &p,
            "%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 1\n",
        )
        .unwrap();
        let a = read_matrix_market(&p).unwrap();
        assert_eq!(a.to_dense(), vec![4.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn vector_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        let v = vec![0.1, -3.0, std::f64::consts::PI];
        write_vector(&v, &p).unwrap();
        assert_eq!(read_vector(&p).unwrap(), v);
        std::fs::write(&p, "1.0\nabc\n").unwrap();
        assert!(matches!(read_vector(&p), Err(Error::Parse(_))));
    }
}
