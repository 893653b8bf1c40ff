//! Canonical text rendering of forms. Meshes, coefficients and analytic
//! fields are labelled by order of first appearance, so the output does not
//! depend on process-global ids.

use std::sync::Arc;

use super::expr::{Expr, Node};
use super::measure::IntegralType;
use super::Form;
use crate::mesh::MeshId;

#[derive(Default)]
pub(crate) struct Labels {
    meshes: Vec<MeshId>,
    coefficients: Vec<usize>,
    analytic: Vec<usize>,
}

fn position<T: PartialEq + Copy>(list: &mut Vec<T>, key: T) -> usize {
    if let Some(i) = list.iter().position(|&k| k == key) {
        return i;
    }
    list.push(key);
    list.len() - 1
}

impl Labels {
    fn mesh(&mut self, id: MeshId) -> String {
        format!("m{}", position(&mut self.meshes, id))
    }
}

fn number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

pub(crate) fn render_expr(e: &Expr, labels: &mut Labels) -> String {
    match e.node() {
        Node::Argument(a) => {
            let name = if a.number == 0 { "v" } else { "u" };
            let mesh = labels.mesh(a.space.mesh().id());
            format!(
                "{name}{}[{mesh},P{}^{}]",
                a.block,
                a.space.degree(),
                a.space.value_size()
            )
        }
        Node::Coefficient(f) => {
            let key = Arc::as_ptr(f) as usize;
            let i = position(&mut labels.coefficients, key);
            let mesh = labels.mesh(f.space().mesh().id());
            format!("w{i}[{mesh}]")
        }
        Node::Analytic(a) => {
            let key = Arc::as_ptr(&a.f) as *const () as usize;
            let i = position(&mut labels.analytic, key);
            format!("g{i}(deg {})", a.degree)
        }
        Node::Constant(v) if v.len() == 1 => number(v[0]),
        Node::Constant(v) => {
            let parts: Vec<String> = v.iter().map(|x| number(*x)).collect();
            format!("({})", parts.join(", "))
        }
        Node::SpatialCoordinate(_) => "x".into(),
        Node::Grad(c) => format!("grad({})", render_expr(c, labels)),
        Node::Div(c) => format!("div({})", render_expr(c, labels)),
        Node::Inner(a, b) => format!("inner({}, {})", render_expr(a, labels), render_expr(b, labels)),
        Node::Product(a, b) | Node::ComponentMul(a, b) => {
            format!("{} * {}", render_factor(a, labels), render_factor(b, labels))
        }
        Node::Sum(a, b) => format!("{} + {}", render_expr(a, labels), render_expr(b, labels)),
    }
}

fn render_factor(e: &Expr, labels: &mut Labels) -> String {
    match e.node() {
        Node::Sum(..) => format!("({})", render_expr(e, labels)),
        _ => render_expr(e, labels),
    }
}

pub(crate) fn render_form(form: &Form) -> String {
    let mut labels = Labels::default();
    let mut lines = Vec::new();
    for integral in form.integrals() {
        let body = render_expr(&integral.integrand, &mut labels);
        let m = &integral.measure;
        let kind = match m.kind {
            IntegralType::Cell => "dx",
            IntegralType::ExteriorFacet => "ds",
        };
        let mesh = labels.mesh(m.domain.id());
        let tag = m.tag.map(|t| format!(", tag {t}")).unwrap_or_default();
        lines.push(format!("{body} * {kind}({mesh}{tag})"));
    }
    if lines.is_empty() {
        "0".into()
    } else {
        lines.join("\n+ ")
    }
}
