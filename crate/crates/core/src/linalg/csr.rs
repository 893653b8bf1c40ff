use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<CsrMatrix> {
        if indptr.len() != nrows + 1 || indptr[0] != 0 || *indptr.last().unwrap() != indices.len() {
            return Err(Error::DimensionMismatch("malformed row offsets".into()));
        }
        if indices.len() != data.len() {
            return Err(Error::DimensionMismatch(
                "index and value arrays differ in length".into(),
            ));
        }
        for r in 0..nrows {
            if indptr[r] > indptr[r + 1] {
                return Err(Error::DimensionMismatch("row offsets are not monotone".into()));
            }
            let cols = &indices[indptr[r]..indptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= ncols) {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} has unsorted, duplicate or out-of-range columns"
                )));
            }
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> CsrMatrix {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> CsrMatrix {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    /// Builds from coordinate triplets, summing duplicates in input order.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        rows: &[usize],
        cols: &[usize],
        vals: &[f64],
    ) -> Result<CsrMatrix> {
        if rows.len() != cols.len() || rows.len() != vals.len() {
            return Err(Error::DimensionMismatch("triplet arrays differ in length".into()));
        }
        if let Some(i) = (0..rows.len()).find(|&i| rows[i] >= nrows || cols[i] >= ncols) {
            return Err(Error::DimensionMismatch(format!(
                "triplet ({}, {}) outside {nrows}x{ncols}",
                rows[i], cols[i]
            )));
        }
        let mut counts = vec![0usize; nrows + 1];
        for &r in rows {
            counts[r + 1] += 1;
        }
        for r in 0..nrows {
            counts[r + 1] += counts[r];
        }
        let mut next = counts.clone();
        let mut order = vec![0usize; rows.len()];
        for (i, &r) in rows.iter().enumerate() {
            order[next[r]] = i;
            next[r] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut row_entries: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row_entries.clear();
            row_entries.extend(order[counts[r]..counts[r + 1]].iter().map(|&i| (cols[i], vals[i])));
            row_entries.sort_by_key(|e| e.0);
            for &(c, v) in &row_entries {
                if indices.len() > indptr[r] && *indices.last().unwrap() == c {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        })
    }

    pub fn from_dense(nrows: usize, ncols: usize, dense: &[f64]) -> CsrMatrix {
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = dense[i * ncols + j];
                if v != 0.0 {
                    rows.push(i);
                    cols.push(j);
                    vals.push(v);
                }
            }
        }
        CsrMatrix::from_triplets(nrows, ncols, &rows, &cols, &vals).expect("indices in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> (&[usize], &mut [f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &mut self.data[r])
    }

    /// Stored value at (i, j); zero if not in the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> Option<&mut f64> {
        let start = self.indptr[i];
        let cols = &self.indices[start..self.indptr[i + 1]];
        cols.binary_search(&j).ok().map(move |k| &mut self.data[start + k])
    }

    /// Sets (i, j), inserting into the pattern if needed.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        if let Some(v) = self.get_mut(i, j) {
            *v = value;
            return;
        }
        let start = self.indptr[i];
        let cols = &self.indices[start..self.indptr[i + 1]];
        let pos = start + cols.partition_point(|&c| c < j);
        self.indices.insert(pos, j);
        self.data.insert(pos, value);
        for p in &mut self.indptr[i + 1..] {
            *p += 1;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum();
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut rows = Vec::with_capacity(self.nnz());
        let mut cols = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                rows.push(self.indices[k]);
                cols.push(i);
            }
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, &rows, &cols, &self.data)
            .expect("transposed indices are in range")
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                d[i * self.ncols + c] = v;
            }
        }
        d
    }

    pub fn frobenius_norm_squared(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_squared().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Largest |A_ij - A_ji| over the pattern.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - t.get(i, c)).abs());
            }
        }
        worst
    }
}

/// Coordinate-format accumulator for assembly.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> TripletBuilder {
        TripletBuilder {
            nrows,
            ncols,
            ..Default::default()
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }

    /// Adds a dense row-major local block.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], local: &[f64]) {
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                self.add(i, j, local[a * cols.len() + b]);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Sum of everything inserted so far.
    pub fn total(&self) -> f64 {
        self.vals.iter().sum()
    }

    pub fn build(&self) -> Result<CsrMatrix> {
        CsrMatrix::from_triplets(self.nrows, self.ncols, &self.rows, &self.cols, &self.vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, 3, &[1, 0, 1, 1], &[2, 1, 0, 2], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.row(1).0, &[0, 2]);
    }

    #[test]
    fn new_validates() {
        assert!(CsrMatrix::new(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![0], vec![1.0]).is_ok());
    }

    #[test]
    fn set_inserts() {
        let mut m = CsrMatrix::zeros(3, 3);
        m.set(1, 2, 4.0);
        m.set(1, 0, 1.0);
        m.set(1, 2, 5.0);
        assert_eq!(m.row(1).0, &[0, 2]);
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.indptr(), &[0, 0, 2, 2]);
    }

    proptest! {
        #[test]
        fn triplets_match_dense_accumulation(
            entries in proptest::collection::vec((0usize..5, 0usize..4, -10.0f64..10.0), 0..40)
        ) {
            let rows: Vec<usize> = entries.iter().map(|e| e.0).collect();
            let cols: Vec<usize> = entries.iter().map(|e| e.1).collect();
            let vals: Vec<f64> = entries.iter().map(|e| e.2).collect();
            let m = CsrMatrix::from_triplets(5, 4, &rows, &cols, &vals).unwrap();
            let mut dense = vec![0.0; 20];
            for e in &entries {
                dense[e.0 * 4 + e.1] += e.2;
            }
            let got = m.to_dense();
            for (a, b) in got.iter().zip(&dense) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let tt = m.transpose().transpose();
            prop_assert_eq!(tt, m);
        }
    }
}
