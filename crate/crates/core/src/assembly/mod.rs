//! Assembly of forms into scalars, vectors, sparse matrices and block nests.
//!
//! Each integral is compiled into a kernel that walks the integration
//! entities of its measure. For every entity the arguments are evaluated on
//! their own meshes: directly when they share the integration mesh, through
//! the cell map when they live on another mesh of the same dimension, and on
//! the star of adjacent cells when they live one dimension higher. Element
//! tensors are computed in parallel and scattered sequentially, so results
//! do not depend on the thread count.

mod bc;
mod kernel;
mod star;

use std::sync::Arc;

pub use bc::{apply_bcs, apply_bcs_single};
pub use kernel::{LocalTensor, QuadraturePlan};
pub use star::{build_star, Star};

use crate::error::{Error, Result};
use crate::forms::{extract_blocks, validate, BlockForms, Form, Integral};
use crate::linalg::{BlockNestMatrix, BlockVector, CsrMatrix, TripletBuilder};
use crate::parallel;
use crate::space::{DirichletBC, FunctionSpace};
use kernel::IntegralKernel;

/// Entities whose element tensors are held in memory at once.
const CHUNK: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Compute element tensors on the rayon pool (ignored without the
    /// `parallel` feature).
    pub parallel: bool,
    /// Overrides the estimated quadrature degree of every integral.
    pub quadrature_degree: Option<usize>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            parallel: parallel::available(),
            quadrature_degree: None,
        }
    }
}

impl AssemblyOptions {
    pub fn sequential() -> Self {
        AssemblyOptions {
            parallel: false,
            ..Default::default()
        }
    }
}

fn for_each_tensor(
    form: &Form,
    spaces: &[Arc<FunctionSpace>],
    opts: &AssemblyOptions,
    mut sink: impl FnMut(&LocalTensor),
) -> Result<()> {
    for integral in form.integrals() {
        let kernel = IntegralKernel::compile(integral, spaces, opts)?;
        for chunk in kernel.entities.chunks(CHUNK) {
            let tensors = parallel::try_map(chunk.len(), opts.parallel, |i| {
                kernel.entity_contributions(chunk[i])
            })?;
            tensors.iter().flatten().for_each(&mut sink);
        }
    }
    Ok(())
}

fn plain_spaces(form: &Form) -> Result<Vec<Arc<FunctionSpace>>> {
    validate(form).map_err(Error::InvalidForm)?;
    (0..form.arity())
        .map(|n| {
            let a = form.argument(n).ok_or_else(|| {
                Error::InvalidArgument(format!("argument numbers must be contiguous; {n} is missing"))
            })?;
            if a.mixed.is_some() {
                return Err(Error::InvalidArgument(
                    "forms over mixed spaces are assembled block-wise".into(),
                ));
            }
            Ok(a.space)
        })
        .collect()
}

fn check_arity(form: &Form, arity: usize, what: &str) -> Result<()> {
    if form.arity() != arity {
        return Err(Error::InvalidArgument(format!(
            "{what} assembly needs a form of arity {arity}, got {}",
            form.arity()
        )));
    }
    Ok(())
}

fn matrix_from(form: &Form, test: &Arc<FunctionSpace>, trial: &Arc<FunctionSpace>, opts: &AssemblyOptions) -> Result<CsrMatrix> {
    let mut tb = TripletBuilder::new(test.dim(), trial.dim());
    let spaces = [test.clone(), trial.clone()];
    for_each_tensor(form, &spaces, opts, |t| tb.add_block(&t.dofs[0], &t.dofs[1], &t.values))?;
    tb.build()
}

fn vector_from(form: &Form, test: &Arc<FunctionSpace>, opts: &AssemblyOptions) -> Result<Vec<f64>> {
    let mut b = vec![0.0; test.dim()];
    for_each_tensor(form, std::slice::from_ref(test), opts, |t| {
        for (&d, v) in t.dofs[0].iter().zip(&t.values) {
            b[d] += v;
        }
    })?;
    Ok(b)
}

/// Value of a functional (a form without arguments).
pub fn assemble_scalar(form: &Form, opts: &AssemblyOptions) -> Result<f64> {
    validate(form).map_err(Error::InvalidForm)?;
    check_arity(form, 0, "scalar")?;
    let mut total = 0.0;
    for_each_tensor(form, &[], opts, |t| total += t.values[0])?;
    Ok(total)
}

/// Vector of a linear form over a single space.
pub fn assemble_vector(form: &Form, opts: &AssemblyOptions) -> Result<Vec<f64>> {
    check_arity(form, 1, "vector")?;
    let spaces = plain_spaces(form)?;
    vector_from(form, &spaces[0], opts)
}

/// Sparse matrix of a bilinear form over single spaces.
pub fn assemble_matrix(form: &Form, opts: &AssemblyOptions) -> Result<CsrMatrix> {
    check_arity(form, 2, "matrix")?;
    let spaces = plain_spaces(form)?;
    matrix_from(form, &spaces[0], &spaces[1], opts)
}

/// Nest of the blocks of a bilinear form; empty blocks stay absent.
pub fn assemble_block_matrix(blocks: &BlockForms, opts: &AssemblyOptions) -> Result<BlockNestMatrix> {
    if blocks.arity() != 2 {
        return Err(Error::InvalidArgument("block matrix assembly needs a bilinear form".into()));
    }
    let rows = blocks.test_spaces();
    let cols = blocks.trial_spaces();
    let mut nest = BlockNestMatrix::new(
        rows.iter().map(|s| s.dim()).collect(),
        cols.iter().map(|s| s.dim()).collect(),
    );
    for (i, test) in rows.iter().enumerate() {
        for (j, trial) in cols.iter().enumerate() {
            let form = blocks.block(i, j);
            if form.is_empty() {
                continue;
            }
            let m = matrix_from(form, test, trial, opts).map_err(|e| e.in_block(i, j))?;
            nest.set_block(i, j, m)?;
        }
    }
    Ok(nest)
}

/// Block vector of a linear form; empty blocks are zero.
pub fn assemble_block_vector(blocks: &BlockForms, opts: &AssemblyOptions) -> Result<BlockVector> {
    if blocks.arity() != 1 {
        return Err(Error::InvalidArgument("block vector assembly needs a linear form".into()));
    }
    let segments = blocks
        .test_spaces()
        .iter()
        .enumerate()
        .map(|(i, test)| {
            let form = blocks.block(i, 0);
            if form.is_empty() {
                Ok(vec![0.0; test.dim()])
            } else {
                vector_from(form, test, opts).map_err(|e| e.in_block(i, 0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockVector { segments })
}

/// Assembles a block system `a x = l` and imposes `bcs`.
pub fn assemble_system(
    a: &Form,
    l: &Form,
    bcs: &[DirichletBC],
    opts: &AssemblyOptions,
) -> Result<(BlockNestMatrix, BlockVector)> {
    let ab = extract_blocks(a)?;
    let lb = extract_blocks(l)?;
    let same = |x: &[Arc<FunctionSpace>], y: &[Arc<FunctionSpace>]| {
        x.len() == y.len() && x.iter().zip(y).all(|(p, q)| Arc::ptr_eq(p, q))
    };
    if !same(ab.test_spaces(), lb.test_spaces()) {
        return Err(Error::DimensionMismatch(
            "bilinear and linear forms use different test spaces".into(),
        ));
    }
    let mut nest = assemble_block_matrix(&ab, opts)?;
    let mut rhs = assemble_block_vector(&lb, opts)?;
    if !bcs.is_empty() {
        if !same(ab.test_spaces(), ab.trial_spaces()) {
            return Err(Error::InvalidArgument(
                "boundary conditions need matching test and trial spaces".into(),
            ));
        }
        apply_bcs(&mut nest, &mut rhs, ab.test_spaces(), bcs)?;
    }
    Ok((nest, rhs))
}

/// Element tensors of one integration entity, one per combination of
/// argument cells, before shared entries are deduplicated.
pub fn assemble_local_tensor(
    integral: &Integral,
    spaces: &[Arc<FunctionSpace>],
    entity: usize,
    opts: &AssemblyOptions,
) -> Result<Vec<LocalTensor>> {
    let kernel = IntegralKernel::compile(integral, spaces, opts)?;
    kernel.local_tensors(entity)
}

/// Quadrature plan used for `integral`.
pub fn quadrature_plan(
    integral: &Integral,
    spaces: &[Arc<FunctionSpace>],
    opts: &AssemblyOptions,
) -> Result<QuadraturePlan> {
    Ok(IntegralKernel::compile(integral, spaces, opts)?.plan().clone())
}
