use crate::element::quadrature_rule;
use crate::error::Result;
use crate::mesh::AffineMap;
use crate::parallel;
use crate::space::Function;

/// Exact field and its gradient (`[component][direction]`).
pub struct Exact<'a> {
    pub value: &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync),
    pub gradient: &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync),
}

/// Squared error integrals over the mesh of `uh`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorIntegrals {
    /// ∫ |u − u_h|²
    pub l2_sq: f64,
    /// ∫ |∇u − ∇u_h|²
    pub h1_semi_sq: f64,
    /// ∫ (div u − div u_h)², vector fields only
    pub div_sq: f64,
}

impl ErrorIntegrals {
    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }

    pub fn h1_semi(&self) -> f64 {
        self.h1_semi_sq.sqrt()
    }

    /// Full H1 norm √(‖e‖² + |e|²).
    pub fn h1(&self) -> f64 {
        (self.l2_sq + self.h1_semi_sq).sqrt()
    }

    pub fn div(&self) -> f64 {
        self.div_sq.sqrt()
    }
}

/// Integrates the error of `uh` against an analytic field with a rule of
/// the given degree, cell by cell.
pub fn error_integrals(uh: &Function, exact: &Exact, degree: usize, parallel: bool) -> Result<ErrorIntegrals> {
    let mesh = uh.space().mesh();
    let rule = quadrature_rule(mesh.cell_kind(), degree)?;
    let (tdim, gdim, vs) = (mesh.tdim(), mesh.gdim(), uh.space().value_size());
    let per_cell = parallel::try_map(mesh.num_cells(), parallel, |c| {
        let map = AffineMap::for_cell(mesh, c);
        map.check_nondegenerate(c)?;
        let mut acc = ErrorIntegrals::default();
        for q in 0..rule.num_points() {
            let xr = &rule.points[q * tdim..(q + 1) * tdim];
            let x = map.push_forward(xr);
            let w = rule.weights[q] * map.scale;
            let (u, gu) = ((exact.value)(&x), (exact.gradient)(&x));
            let (v, gv) = (uh.eval(c, xr), uh.eval_gradient(c, xr));
            acc.l2_sq += w * u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            acc.h1_semi_sq += w * gu.iter().zip(&gv).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            if vs == gdim && vs > 1 {
                let d: f64 = (0..vs).map(|i| gu[i * gdim + i] - gv[i * gdim + i]).sum();
                acc.div_sq += w * d * d;
            }
        }
        Ok(acc)
    })?;
    Ok(per_cell.into_iter().fold(ErrorIntegrals::default(), |a, b| ErrorIntegrals {
        l2_sq: a.l2_sq + b.l2_sq,
        h1_semi_sq: a.h1_semi_sq + b.h1_semi_sq,
        div_sq: a.div_sq + b.div_sq,
    }))
}

/// ‖div u_h‖ over the mesh of `uh`.
pub fn divergence_norm(uh: &Function, degree: usize) -> Result<f64> {
    let gdim = uh.space().mesh().gdim();
    let zero = move |_: &[f64]| vec![0.0; gdim];
    let zero_grad = move |_: &[f64]| vec![0.0; gdim * gdim];
    let e = error_integrals(
        uh,
        &Exact {
            value: &zero,
            gradient: &zero_grad,
        },
        degree,
        false,
    )?;
    Ok(e.div())
}
