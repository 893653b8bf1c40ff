use super::CsrMatrix;
use crate::error::{Error, Result};

/// Grid of independently stored sparse blocks. Absent blocks are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockNestMatrix {
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    blocks: Vec<Option<CsrMatrix>>,
}

fn prefix(dims: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.len() + 1);
    out.push(0);
    for d in dims {
        out.push(out.last().unwrap() + d);
    }
    out
}

impl BlockNestMatrix {
    pub fn new(row_dims: Vec<usize>, col_dims: Vec<usize>) -> BlockNestMatrix {
        let n = row_dims.len() * col_dims.len();
        BlockNestMatrix {
            row_dims,
            col_dims,
            blocks: vec![None; n],
        }
    }

    pub fn num_block_rows(&self) -> usize {
        self.row_dims.len()
    }

    pub fn num_block_cols(&self) -> usize {
        self.col_dims.len()
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    pub fn row_offsets(&self) -> Vec<usize> {
        prefix(&self.row_dims)
    }

    pub fn col_offsets(&self) -> Vec<usize> {
        prefix(&self.col_dims)
    }

    pub fn set_block(&mut self, i: usize, j: usize, block: CsrMatrix) -> Result<()> {
        if block.shape() != (self.row_dims[i], self.col_dims[j]) {
            return Err(Error::DimensionMismatch(format!(
                "block ({i}, {j}) is {:?}, expected {:?}",
                block.shape(),
                (self.row_dims[i], self.col_dims[j])
            )));
        }
        let nc = self.num_block_cols();
        self.blocks[i * nc + j] = Some(block);
        Ok(())
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&CsrMatrix> {
        self.blocks[i * self.num_block_cols() + j].as_ref()
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> Option<&mut CsrMatrix> {
        let nc = self.num_block_cols();
        self.blocks[i * nc + j].as_mut()
    }

    /// Zero vectors shaped like the solution (columns) and right-hand side (rows).
    pub fn init_vectors(&self) -> (BlockVector, BlockVector) {
        (
            BlockVector::zeros(&self.col_dims),
            BlockVector::zeros(&self.row_dims),
        )
    }

    pub fn convert_to_monolithic(&self) -> CsrMatrix {
        let ro = self.row_offsets();
        let co = self.col_offsets();
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for bi in 0..self.num_block_rows() {
            for bj in 0..self.num_block_cols() {
                let Some(b) = self.block(bi, bj) else { continue };
                for r in 0..b.nrows() {
                    let (cs, vs) = b.row(r);
                    for (&c, &v) in cs.iter().zip(vs) {
                        rows.push(ro[bi] + r);
                        cols.push(co[bj] + c);
                        vals.push(v);
                    }
                }
            }
        }
        CsrMatrix::from_triplets(*ro.last().unwrap(), *co.last().unwrap(), &rows, &cols, &vals)
            .expect("block entries lie inside the monolithic matrix")
    }

    pub fn matvec(&self, x: &BlockVector) -> Result<BlockVector> {
        if x.dims() != self.col_dims {
            return Err(Error::DimensionMismatch("block vector does not match nest columns".into()));
        }
        let mut y = BlockVector::zeros(&self.row_dims);
        for i in 0..self.num_block_rows() {
            for j in 0..self.num_block_cols() {
                if let Some(b) = self.block(i, j) {
                    let p = b.matvec(&x.segments[j]);
                    for (a, v) in y.segments[i].iter_mut().zip(p) {
                        *a += v;
                    }
                }
            }
        }
        Ok(y)
    }
}

/// Monolithic conversion with caller-supplied block offsets (prefix sums of
/// the block dimensions); they must agree with the nest.
pub fn convert_to_monolithic(nest: &BlockNestMatrix, offsets: &[usize]) -> Result<CsrMatrix> {
    if offsets != nest.row_offsets() || offsets != nest.col_offsets() {
        return Err(Error::DimensionMismatch(format!(
            "offsets {offsets:?} do not match nest block dimensions"
        )));
    }
    Ok(nest.convert_to_monolithic())
}

/// Dense vector split into segments matching a nest's block rows.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockVector {
    pub segments: Vec<Vec<f64>>,
}

impl BlockVector {
    pub fn zeros(dims: &[usize]) -> BlockVector {
        BlockVector {
            segments: dims.iter().map(|&d| vec![0.0; d]).collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.segments.iter().map(Vec::len).collect()
    }

    pub fn to_monolithic(&self) -> Vec<f64> {
        self.segments.concat()
    }

    pub fn from_monolithic(dims: &[usize], v: &[f64]) -> Result<BlockVector> {
        if dims.iter().sum::<usize>() != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} cannot be split into {dims:?}",
                v.len()
            )));
        }
        let mut segments = Vec::with_capacity(dims.len());
        let mut start = 0;
        for &d in dims {
            segments.push(v[start..start + d].to_vec());
            start += d;
        }
        Ok(BlockVector { segments })
    }
}
