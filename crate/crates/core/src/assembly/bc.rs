use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{BlockNestMatrix, BlockVector, CsrMatrix};
use crate::space::{collect_bc_dofs, DirichletBC, FunctionSpace};

/// Imposes Dirichlet conditions by symmetric elimination: constrained
/// columns are lifted into the right-hand side, constrained rows and
/// columns are zeroed, the diagonal set to one and the rhs to the boundary
/// value. `spaces[i]` is the space of block row (and column) `i`.
/// Applying the same conditions twice leaves the system unchanged.
pub fn apply_bcs(
    a: &mut BlockNestMatrix,
    b: &mut BlockVector,
    spaces: &[Arc<FunctionSpace>],
    bcs: &[DirichletBC],
) -> Result<()> {
    let nb = spaces.len();
    if a.num_block_rows() != nb || a.num_block_cols() != nb || b.segments.len() != nb {
        return Err(Error::DimensionMismatch(format!(
            "{nb} spaces for a {}x{} block system",
            a.num_block_rows(),
            a.num_block_cols()
        )));
    }
    let mut constrained: Vec<HashMap<usize, f64>> = vec![HashMap::new(); nb];
    for bc in bcs {
        let i = spaces
            .iter()
            .position(|s| Arc::ptr_eq(s, bc.space()))
            .ok_or_else(|| Error::InvalidArgument("boundary condition on a space outside the system".into()))?;
        let (dofs, values) = collect_bc_dofs(bc)?;
        constrained[i].extend(dofs.into_iter().zip(values));
    }

    for k in 0..nb {
        for j in 0..nb {
            let Some(block) = a.block_mut(k, j) else { continue };
            if constrained[k].is_empty() && constrained[j].is_empty() {
                continue;
            }
            for r in 0..block.nrows() {
                let row_fixed = constrained[k].contains_key(&r);
                let (cols, vals) = block.row_mut(r);
                for (c, v) in cols.iter().zip(vals.iter_mut()) {
                    if let Some(g) = constrained[j].get(c) {
                        if !row_fixed {
                            b.segments[k][r] -= *v * g;
                        }
                        *v = 0.0;
                    } else if row_fixed {
                        *v = 0.0;
                    }
                }
            }
        }
    }

    for (i, fixed) in constrained.iter().enumerate() {
        if fixed.is_empty() {
            continue;
        }
        if a.block(i, i).is_none() {
            let n = spaces[i].dim();
            a.set_block(i, i, CsrMatrix::zeros(n, n))?;
        }
        let diag = a.block_mut(i, i).expect("diagonal block present");
        let mut missing = Vec::new();
        for (&d, &g) in fixed {
            match diag.get_mut(d, d) {
                Some(v) => *v = 1.0,
                None => missing.push(d),
            }
            b.segments[i][d] = g;
        }
        for d in missing {
            diag.set(d, d, 1.0);
        }
    }
    Ok(())
}

/// Single-block variant of [`apply_bcs`].
pub fn apply_bcs_single(
    a: &mut CsrMatrix,
    b: &mut [f64],
    space: &Arc<FunctionSpace>,
    bcs: &[DirichletBC],
) -> Result<()> {
    let mut nest = BlockNestMatrix::new(vec![a.nrows()], vec![a.ncols()]);
    nest.set_block(0, 0, std::mem::replace(a, CsrMatrix::zeros(0, 0)))?;
    let mut rhs = BlockVector {
        segments: vec![b.to_vec()],
    };
    let result = apply_bcs(&mut nest, &mut rhs, std::slice::from_ref(space), bcs);
    *a = nest.block(0, 0).cloned().expect("block kept");
    b.copy_from_slice(&rhs.segments[0]);
    result
}
