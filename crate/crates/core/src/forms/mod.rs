//! Symbolic variational forms.
//!
//! An integrand is an expression DAG over [`Argument`]s, coefficients and
//! differential operators; multiplying it by a [`Measure`] yields a
//! [`Form`]. [`extract_blocks`] splits a form over mixed spaces into the
//! dense grid of block subforms that the assembler consumes.

mod expr;
mod measure;
mod print;

use std::collections::BTreeSet;
use std::ops::{Add, Mul};
use std::sync::Arc;

pub use expr::{
    div, dot, grad, inner, mixed_argument, mixed_arguments, test_function, test_functions,
    trial_function, trial_functions, AnalyticCoefficient, Argument, Expr, Node,
    DEFAULT_ANALYTIC_DEGREE,
};
pub use measure::{IntegralType, Measure};

use crate::error::{Error, Result};
use crate::meshview::root_of;
use crate::space::FunctionSpace;

/// A rule violation found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("malformed expression: {0}")]
    Shape(String),
    #[error("integrand must be scalar, found shape {0:?}")]
    NotScalar(Vec<usize>),
    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),
    #[error("form is not linear in argument {number}")]
    Nonlinear { number: usize },
    #[error("argument numbers {found:?} differ from the form's {expected:?}")]
    ArityMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("integration mesh is not the mesh of any argument")]
    MeasureDomain,
    #[error("arguments from different spaces must come from one mixed function space")]
    MixedSpaceRequired,
    #[error("arguments live on unrelated meshes")]
    UnrelatedMeshes,
    #[error("codimension-one coupling requires a cell measure on the lower-dimensional mesh")]
    CodimMeasure,
    #[error("argument meshes differ in dimension by {0}; at most 1 is supported")]
    UnsupportedCodimension(usize),
    #[error("exterior-facet measures are only allowed for terms on a single mesh")]
    FacetMeasureOffDiagonal,
    #[error("only the plural argument constructors are available for mixed spaces")]
    PluralRequired,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("unsupported coefficient: {0}")]
    UnsupportedCoefficient(String),
}

impl FormError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            FormError::Shape(_) => "shape",
            FormError::NotScalar(_) => "not-scalar",
            FormError::UnsupportedOperator(_) => "unsupported-operator",
            FormError::Nonlinear { .. } => "nonlinear",
            FormError::ArityMismatch { .. } => "arity-mismatch",
            FormError::MeasureDomain => "measure-domain",
            FormError::MixedSpaceRequired => "mixed-space-required",
            FormError::UnrelatedMeshes => "unrelated-meshes",
            FormError::CodimMeasure => "codim-measure",
            FormError::UnsupportedCodimension(_) => "unsupported-codimension",
            FormError::FacetMeasureOffDiagonal => "facet-measure-off-diagonal",
            FormError::PluralRequired => "plural-required",
            FormError::InvalidMeasure(_) => "invalid-measure",
            FormError::UnsupportedCoefficient(_) => "unsupported-coefficient",
        }
    }
}

#[derive(Clone)]
pub struct Integral {
    pub integrand: Expr,
    pub measure: Measure,
}

/// Sum of integrals.
#[derive(Clone, Default)]
pub struct Form {
    integrals: Vec<Integral>,
}

impl Form {
    pub fn empty() -> Form {
        Form::default()
    }

    pub fn integrals(&self) -> &[Integral] {
        &self.integrals
    }

    pub fn is_empty(&self) -> bool {
        self.integrals.is_empty()
    }

    /// Distinct argument numbers, ascending.
    pub fn argument_numbers(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .integrals
            .iter()
            .flat_map(|i| i.integrand.arguments())
            .map(|a| a.number)
            .collect();
        set.into_iter().collect()
    }

    pub fn arity(&self) -> usize {
        self.argument_numbers().len()
    }

    /// First argument with the given number, if any.
    pub fn argument(&self, number: usize) -> Option<Argument> {
        self.integrals
            .iter()
            .flat_map(|i| i.integrand.arguments())
            .find(|a| a.number == number)
    }

    /// Stable text rendering used for golden comparisons.
    pub fn to_canonical_string(&self) -> String {
        print::render_form(self)
    }
}

impl std::fmt::Display for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl std::fmt::Debug for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl Mul<&Measure> for Expr {
    type Output = Form;
    fn mul(self, measure: &Measure) -> Form {
        Form {
            integrals: vec![Integral {
                integrand: self,
                measure: measure.clone(),
            }],
        }
    }
}

impl Mul<&Measure> for &Expr {
    type Output = Form;
    fn mul(self, measure: &Measure) -> Form {
        self.clone() * measure
    }
}

impl Add for Form {
    type Output = Form;
    fn add(mut self, rhs: Form) -> Form {
        self.integrals.extend(rhs.integrals);
        self
    }
}

/// Polynomial degree estimate of an integrand, used to pick quadrature.
pub fn estimate_degree(e: &Expr) -> usize {
    match e.node() {
        Node::Argument(a) => a.space.degree(),
        Node::Coefficient(f) => f.space().degree(),
        Node::Analytic(a) => a.degree,
        Node::Constant(_) => 0,
        Node::SpatialCoordinate(_) => 1,
        Node::Grad(c) | Node::Div(c) => estimate_degree(c).saturating_sub(1),
        Node::Inner(a, b) | Node::Product(a, b) | Node::ComponentMul(a, b) => {
            estimate_degree(a) + estimate_degree(b)
        }
        Node::Sum(a, b) => estimate_degree(a).max(estimate_degree(b)),
    }
}

fn same_space(a: &Arc<FunctionSpace>, b: &Arc<FunctionSpace>) -> bool {
    Arc::ptr_eq(a, b)
}

fn check_term(term: &Expr, measure: &Measure, errors: &mut Vec<FormError>) -> Vec<usize> {
    let args = term.arguments();
    let numbers: Vec<usize> = args.iter().map(|a| a.number).collect();
    let distinct: BTreeSet<usize> = numbers.iter().copied().collect();
    for &n in &distinct {
        if numbers.iter().filter(|&&m| m == n).count() > 1 {
            errors.push(FormError::Nonlinear { number: n });
        }
    }

    let mdom = &measure.domain;
    let mut coefficient_meshes = Vec::new();
    term.visit(&mut |e| {
        if let Node::Coefficient(f) = e.node() {
            coefficient_meshes.push(f.space().mesh().clone());
        }
    });
    for cm in &coefficient_meshes {
        let ok = match measure.kind {
            IntegralType::Cell => {
                cm.tdim() == mdom.tdim() && root_of(cm).id() == root_of(mdom).id()
            }
            IntegralType::ExteriorFacet => cm.id() == mdom.id(),
        };
        if !ok {
            errors.push(FormError::UnsupportedCoefficient(
                "coefficients must live on a mesh of the integration dimension".into(),
            ));
        }
    }

    if args.is_empty() {
        return Vec::new();
    }
    if args
        .iter()
        .any(|a| root_of(a.space.mesh()).id() != root_of(&args[0].space.mesh().clone()).id())
    {
        errors.push(FormError::UnrelatedMeshes);
    }
    let dmin = args.iter().map(|a| a.space.mesh().tdim()).min().unwrap();
    let dmax = args.iter().map(|a| a.space.mesh().tdim()).max().unwrap();
    if dmax - dmin > 1 {
        errors.push(FormError::UnsupportedCodimension(dmax - dmin));
    } else if dmax > dmin && (measure.kind != IntegralType::Cell || mdom.tdim() != dmin) {
        errors.push(FormError::CodimMeasure);
    }
    if measure.kind == IntegralType::ExteriorFacet
        && args.iter().any(|a| a.space.mesh().id() != mdom.id())
    {
        errors.push(FormError::FacetMeasureOffDiagonal);
    }
    distinct.into_iter().collect()
}

/// Checks the structural rules; returns every violation with the index of
/// the offending integral.
pub fn validate(form: &Form) -> std::result::Result<(), Vec<(usize, FormError)>> {
    let mut out: Vec<(usize, FormError)> = Vec::new();
    let push = |i: usize, e: FormError, out: &mut Vec<(usize, FormError)>| {
        if !out.contains(&(i, e.clone())) {
            out.push((i, e));
        }
    };
    let expected = form.argument_numbers();

    let all_args: Vec<(usize, Argument)> = form
        .integrals
        .iter()
        .enumerate()
        .flat_map(|(i, ig)| ig.integrand.arguments().into_iter().map(move |a| (i, a)))
        .collect();
    for (i, a) in &all_args {
        for (_, b) in &all_args {
            if same_space(&a.space, &b.space) && a.mixed.is_none() && b.mixed.is_none() {
                continue;
            }
            let compatible = match (&a.mixed, &b.mixed) {
                (Some(x), Some(y)) => a.number != b.number || Arc::ptr_eq(x, y),
                _ => false,
            };
            if !compatible {
                push(*i, FormError::MixedSpaceRequired, &mut out);
            }
        }
    }

    for (i, integral) in form.integrals.iter().enumerate() {
        if let Some(msg) = integral.measure.check() {
            push(i, FormError::InvalidMeasure(msg), &mut out);
        }
        match integral.integrand.shape() {
            Ok(s) if !s.is_empty() => push(i, FormError::NotScalar(s), &mut out),
            Ok(_) => {}
            Err(e) => {
                push(i, e, &mut out);
                continue;
            }
        }
        let args = integral.integrand.arguments();
        if !args.is_empty() && !args.iter().any(|a| a.space.mesh().id() == integral.measure.domain.id()) {
            push(i, FormError::MeasureDomain, &mut out);
        }
        for term in integral.integrand.expand() {
            let mut errs = Vec::new();
            let numbers = check_term(&term, &integral.measure, &mut errs);
            if numbers != expected {
                errs.push(FormError::ArityMismatch {
                    expected: expected.clone(),
                    found: numbers,
                });
            }
            for e in errs {
                push(i, e, &mut out);
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Dense grid of block subforms; empty blocks are kept explicitly.
#[derive(Clone)]
pub struct BlockForms {
    arity: usize,
    test_spaces: Vec<Arc<FunctionSpace>>,
    trial_spaces: Vec<Arc<FunctionSpace>>,
    blocks: Vec<Form>,
}

impl BlockForms {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn num_rows(&self) -> usize {
        self.test_spaces.len()
    }

    /// 1 for linear forms.
    pub fn num_cols(&self) -> usize {
        self.trial_spaces.len().max(1)
    }

    pub fn test_spaces(&self) -> &[Arc<FunctionSpace>] {
        &self.test_spaces
    }

    pub fn trial_spaces(&self) -> &[Arc<FunctionSpace>] {
        &self.trial_spaces
    }

    pub fn block(&self, i: usize, j: usize) -> &Form {
        &self.blocks[i * self.num_cols() + j]
    }
}

fn spaces_of(form: &Form, number: usize) -> Vec<Arc<FunctionSpace>> {
    match form.argument(number) {
        None => Vec::new(),
        Some(a) => match &a.mixed {
            Some(m) => m.subspaces().to_vec(),
            None => vec![a.space.clone()],
        },
    }
}

/// Splits a validated form into its block subforms. Terms are grouped by
/// block and, within a block, by measure (first-appearance order).
pub fn extract_blocks(form: &Form) -> Result<BlockForms> {
    validate(form).map_err(Error::InvalidForm)?;
    let arity = form.arity();
    if arity == 0 || form.argument_numbers() != (0..arity).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument(
            "block extraction needs a linear or bilinear form".into(),
        ));
    }
    let test_spaces = spaces_of(form, 0);
    let trial_spaces = if arity == 2 { spaces_of(form, 1) } else { Vec::new() };
    let ncols = trial_spaces.len().max(1);
    let mut grouped: Vec<Vec<(Measure, Vec<Expr>)>> = vec![Vec::new(); test_spaces.len() * ncols];
    for integral in &form.integrals {
        for term in integral.integrand.expand() {
            let args = term.arguments();
            let block_of = |n: usize| args.iter().find(|a| a.number == n).map_or(0, |a| a.block);
            let slot = &mut grouped[block_of(0) * ncols + block_of(1)];
            match slot.iter_mut().find(|(m, _)| m.same_as(&integral.measure)) {
                Some((_, terms)) => terms.push(term),
                None => slot.push((integral.measure.clone(), vec![term])),
            }
        }
    }
    let blocks = grouped
        .into_iter()
        .map(|groups| Form {
            integrals: groups
                .into_iter()
                .map(|(measure, terms)| Integral {
                    integrand: terms.into_iter().reduce(|a, b| a + b).expect("non-empty"),
                    measure,
                })
                .collect(),
        })
        .collect();
    Ok(BlockForms {
        arity,
        test_spaces,
        trial_spaces,
        blocks,
    })
}

/// Single block `(i, j)` of a form (`j = 0` for linear forms).
pub fn extract_block(form: &Form, i: usize, j: usize) -> Result<Form> {
    let blocks = extract_blocks(form)?;
    if i >= blocks.num_rows() || j >= blocks.num_cols() {
        return Err(Error::InvalidArgument(format!(
            "block ({i}, {j}) outside a {}x{} grid",
            blocks.num_rows(),
            blocks.num_cols()
        )));
    }
    Ok(blocks.block(i, j).clone())
}
