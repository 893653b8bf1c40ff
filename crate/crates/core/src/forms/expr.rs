use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::space::{Function, FunctionSpace, MixedFunctionSpace};

use super::FormError;

/// Test (`0`) or trial (`1`) function of a space, with its block index.
#[derive(Clone)]
pub struct Argument {
    pub space: Arc<FunctionSpace>,
    pub number: usize,
    pub block: usize,
    pub mixed: Option<Arc<MixedFunctionSpace>>,
}

impl Argument {
    pub fn value_shape(&self) -> Vec<usize> {
        match self.space.value_size() {
            1 => vec![],
            n => vec![n],
        }
    }
}

pub(crate) type AnalyticFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Closure-valued coefficient with a declared polynomial degree used for
/// quadrature selection.
#[derive(Clone)]
pub struct AnalyticCoefficient {
    pub(crate) f: AnalyticFn,
    pub value_size: usize,
    pub degree: usize,
}

pub const DEFAULT_ANALYTIC_DEGREE: usize = 2;

#[derive(Clone)]
pub enum Node {
    Argument(Argument),
    Coefficient(Arc<Function>),
    Analytic(AnalyticCoefficient),
    Constant(Vec<f64>),
    SpatialCoordinate(usize),
    Grad(Expr),
    Div(Expr),
    Inner(Expr, Expr),
    /// Product of two scalars.
    Product(Expr, Expr),
    Sum(Expr, Expr),
    /// Scalar times a non-scalar.
    ComponentMul(Expr, Expr),
}

/// Immutable expression DAG node; cloning shares the subtree.
#[derive(Clone)]
pub struct Expr(pub(crate) Arc<Node>);

impl Expr {
    pub(crate) fn new(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: f64) -> Expr {
        Expr::new(Node::Constant(vec![value]))
    }

    pub fn vector_constant(values: Vec<f64>) -> Expr {
        Expr::new(Node::Constant(values))
    }

    pub fn coefficient(f: &Arc<Function>) -> Expr {
        Expr::new(Node::Coefficient(f.clone()))
    }

    /// Analytic scalar field with the default declared degree.
    pub fn analytic<F>(f: F) -> Expr
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Expr::analytic_vector(1, DEFAULT_ANALYTIC_DEGREE, move |x| vec![f(x)])
    }

    /// Analytic field with `value_size` components (1 = scalar).
    pub fn analytic_vector<F>(value_size: usize, degree: usize, f: F) -> Expr
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Expr::new(Node::Analytic(AnalyticCoefficient {
            f: Arc::new(f),
            value_size,
            degree,
        }))
    }

    pub fn spatial_coordinate(gdim: usize) -> Expr {
        Expr::new(Node::SpatialCoordinate(gdim))
    }

    /// Tensor shape of the value; `[]` for scalars.
    pub fn shape(&self) -> Result<Vec<usize>, FormError> {
        match self.node() {
            Node::Argument(a) => Ok(a.value_shape()),
            Node::Coefficient(f) => Ok(match f.space().value_size() {
                1 => vec![],
                n => vec![n],
            }),
            Node::Analytic(a) => Ok(if a.value_size == 1 { vec![] } else { vec![a.value_size] }),
            Node::Constant(v) => Ok(if v.len() == 1 { vec![] } else { vec![v.len()] }),
            Node::SpatialCoordinate(d) => Ok(vec![*d]),
            Node::Grad(e) => {
                let gdim = terminal_gdim(e).ok_or_else(|| {
                    FormError::UnsupportedOperator("grad applies to arguments and coefficients".into())
                })?;
                let mut s = e.shape()?;
                if s.len() > 1 {
                    return Err(FormError::Shape("grad of a rank-2 value".into()));
                }
                s.push(gdim);
                Ok(s)
            }
            Node::Div(e) => {
                let gdim = terminal_gdim(e).ok_or_else(|| {
                    FormError::UnsupportedOperator("div applies to arguments and coefficients".into())
                })?;
                match e.shape()?.as_slice() {
                    [n] if *n == gdim => Ok(vec![]),
                    s => Err(FormError::Shape(format!("div of a value of shape {s:?}"))),
                }
            }
            Node::Inner(a, b) => {
                let (sa, sb) = (a.shape()?, b.shape()?);
                if sa != sb {
                    return Err(FormError::Shape(format!("inner of shapes {sa:?} and {sb:?}")));
                }
                Ok(vec![])
            }
            Node::Product(a, b) => {
                let (sa, sb) = (a.shape()?, b.shape()?);
                if !sa.is_empty() || !sb.is_empty() {
                    return Err(FormError::Shape(format!(
                        "product of non-scalars {sa:?} and {sb:?}; use inner"
                    )));
                }
                Ok(vec![])
            }
            Node::ComponentMul(s, v) => {
                let ss = s.shape()?;
                if !ss.is_empty() {
                    return Err(FormError::Shape(format!("scaling by a non-scalar {ss:?}")));
                }
                v.shape()
            }
            Node::Sum(a, b) => {
                let (sa, sb) = (a.shape()?, b.shape()?);
                if sa != sb {
                    return Err(FormError::Shape(format!("sum of shapes {sa:?} and {sb:?}")));
                }
                Ok(sa)
            }
        }
    }

    /// Visits every node, parents before children.
    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self.node() {
            Node::Grad(e) | Node::Div(e) => e.visit(f),
            Node::Inner(a, b) | Node::Product(a, b) | Node::Sum(a, b) | Node::ComponentMul(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn arguments(&self) -> Vec<Argument> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Node::Argument(a) = e.node() {
                out.push(a.clone());
            }
        });
        out
    }

    /// Expands into monomial terms by distributing products over sums.
    pub fn expand(&self) -> Vec<Expr> {
        let binary = |a: &Expr, b: &Expr, make: fn(Expr, Expr) -> Node| -> Vec<Expr> {
            let (ta, tb) = (a.expand(), b.expand());
            let mut out = Vec::with_capacity(ta.len() * tb.len());
            for x in &ta {
                for y in &tb {
                    out.push(Expr::new(make(x.clone(), y.clone())));
                }
            }
            out
        };
        match self.node() {
            Node::Sum(a, b) => {
                let mut out = a.expand();
                out.extend(b.expand());
                out
            }
            Node::Inner(a, b) => binary(a, b, Node::Inner),
            Node::Product(a, b) => binary(a, b, Node::Product),
            Node::ComponentMul(a, b) => binary(a, b, Node::ComponentMul),
            _ => vec![self.clone()],
        }
    }

    pub fn has_arguments(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e.node(), Node::Argument(_)));
        found
    }
}

fn terminal_gdim(e: &Expr) -> Option<usize> {
    match e.node() {
        Node::Argument(a) => Some(a.space.mesh().gdim()),
        Node::Coefficient(f) => Some(f.space().mesh().gdim()),
        _ => None,
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::print::render_expr(self, &mut super::print::Labels::default()))
    }
}

pub fn test_function(space: &Arc<FunctionSpace>) -> Expr {
    argument(space, 0)
}

pub fn trial_function(space: &Arc<FunctionSpace>) -> Expr {
    argument(space, 1)
}

fn argument(space: &Arc<FunctionSpace>, number: usize) -> Expr {
    Expr::new(Node::Argument(Argument {
        space: space.clone(),
        number,
        block: 0,
        mixed: None,
    }))
}

/// One argument per subspace, carrying block indices `0..I`.
pub fn mixed_arguments(space: &Arc<MixedFunctionSpace>, number: usize) -> Vec<Expr> {
    space
        .subspaces()
        .iter()
        .enumerate()
        .map(|(block, s)| {
            Expr::new(Node::Argument(Argument {
                space: s.clone(),
                number,
                block,
                mixed: Some(space.clone()),
            }))
        })
        .collect()
}

pub fn test_functions(space: &Arc<MixedFunctionSpace>) -> Vec<Expr> {
    mixed_arguments(space, 0)
}

pub fn trial_functions(space: &Arc<MixedFunctionSpace>) -> Vec<Expr> {
    mixed_arguments(space, 1)
}

/// A mixed space only hands out its arguments as a list.
pub fn mixed_argument(_space: &Arc<MixedFunctionSpace>, _number: usize) -> Result<Expr, FormError> {
    Err(FormError::PluralRequired)
}

pub fn grad(e: &Expr) -> Expr {
    Expr::new(Node::Grad(e.clone()))
}

pub fn div(e: &Expr) -> Expr {
    Expr::new(Node::Div(e.clone()))
}

pub fn inner(a: &Expr, b: &Expr) -> Expr {
    Expr::new(Node::Inner(a.clone(), b.clone()))
}

/// Alias of [`inner`] for vectors.
pub fn dot(a: &Expr, b: &Expr) -> Expr {
    inner(a, b)
}

fn multiply(a: Expr, b: Expr) -> Expr {
    let scalar = |e: &Expr| e.shape().map(|s| s.is_empty()).unwrap_or(true);
    match (scalar(&a), scalar(&b)) {
        (true, true) => Expr::new(Node::Product(a, b)),
        (true, false) => Expr::new(Node::ComponentMul(a, b)),
        (false, true) => Expr::new(Node::ComponentMul(b, a)),
        (false, false) => Expr::new(Node::Product(a, b)),
    }
}

macro_rules! binary_ops {
    ($lhs:ty, $rhs:ty, $l:ident => $lexpr:expr, $r:ident => $rexpr:expr) => {
        impl Mul<$rhs> for $lhs {
            type Output = Expr;
            fn mul(self, rhs: $rhs) -> Expr {
                let $l = self;
                let $r = rhs;
                multiply($lexpr, $rexpr)
            }
        }
        impl Add<$rhs> for $lhs {
            type Output = Expr;
            fn add(self, rhs: $rhs) -> Expr {
                let $l = self;
                let $r = rhs;
                Expr::new(Node::Sum($lexpr, $rexpr))
            }
        }
        impl Sub<$rhs> for $lhs {
            type Output = Expr;
            fn sub(self, rhs: $rhs) -> Expr {
                let $l = self;
                let $r = rhs;
                Expr::new(Node::Sum($lexpr, multiply(Expr::constant(-1.0), $rexpr)))
            }
        }
    };
}

binary_ops!(Expr, Expr, a => a, b => b);
binary_ops!(&Expr, &Expr, a => a.clone(), b => b.clone());
binary_ops!(Expr, &Expr, a => a, b => b.clone());
binary_ops!(&Expr, Expr, a => a.clone(), b => b);
binary_ops!(f64, Expr, a => Expr::constant(a), b => b);
binary_ops!(f64, &Expr, a => Expr::constant(a), b => b.clone());
binary_ops!(Expr, f64, a => a, b => Expr::constant(b));
binary_ops!(&Expr, f64, a => a.clone(), b => Expr::constant(b));

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        multiply(Expr::constant(-1.0), self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}
