use std::sync::Arc;

use super::{at_resolution, check_resolutions, error_integrals, rows_with_rates, solve, Exact, SolvedSystem, StudyConfig, StudyResult, MARKER_EPS};
use crate::assembly::{assemble_system, AssemblyOptions};
use crate::error::{Error, Result};
use crate::forms::{grad, inner, test_functions, trial_functions, Expr, Form, Measure};
use crate::linalg::{BlockNestMatrix, BlockVector};
use crate::mesh::{mark_entities, unit_cube_mesh, unit_square_mesh, Mesh};
use crate::meshview::create_submesh;
use crate::space::{DirichletBC, Function, FunctionSpace, MixedFunctionSpace};

const SOURCE: f64 = 2.0;
const INTERFACE_VALUE: f64 = 0.25;

/// Poisson problem on the unit square or cube whose value on an interior
/// interface Γ is prescribed through a Lagrange multiplier:
///
/// find (u, λ) with ∫∇u·∇v + ∫_Γ λv + ∫_Γ ηu = ∫ f v + ∫_Γ c η,
///
/// with f = 2, c = 1/4, u = 0 on x ∈ {0, 1} and natural conditions
/// elsewhere. On the midplane x = 1/2 the exact solution is u = x(1 − x),
/// λ = 0.
pub struct PoissonLm {
    pub mesh: Arc<Mesh>,
    pub gamma: Arc<Mesh>,
    pub u_space: Arc<FunctionSpace>,
    pub lambda_space: Arc<FunctionSpace>,
    pub space: Arc<MixedFunctionSpace>,
    pub a: Form,
    pub l: Form,
    pub bcs: Vec<DirichletBC>,
}

impl PoissonLm {
    /// Unit square (`dim = 2`) or cube (`dim = 3`) with `n` subdivisions and
    /// Γ the interior midplane x = 1/2.
    pub fn new(dim: usize, n: usize, degree: usize) -> Result<PoissonLm> {
        let mesh = match dim {
            2 => unit_square_mesh(n)?,
            3 => unit_cube_mesh(n)?,
            d => return Err(Error::InvalidArgument(format!("dimension {d} not supported (2 or 3)"))),
        };
        let marker = mark_entities(&mesh, dim - 1, |x| (x[0] - 0.5).abs() < MARKER_EPS)?;
        let gamma = create_submesh(&marker, 1)?;
        PoissonLm::on_interface(&mesh, &gamma, degree)
    }

    /// The same weak form with an arbitrary codimension-one submesh Γ.
    pub fn on_interface(mesh: &Arc<Mesh>, gamma: &Arc<Mesh>, degree: usize) -> Result<PoissonLm> {
        let u_space = FunctionSpace::lagrange(mesh, degree)?;
        let lambda_space = FunctionSpace::lagrange(gamma, degree)?;
        let space = MixedFunctionSpace::new(vec![u_space.clone(), lambda_space.clone()])?;
        let (u, v) = (trial_functions(&space), test_functions(&space));
        let dx = Measure::cell(mesh);
        let dg = Measure::cell(gamma);
        let a = inner(&grad(&u[0]), &grad(&v[0])) * &dx + (&u[1] * &v[0] + &v[1] * &u[0]) * &dg;
        let l = Expr::constant(SOURCE) * &v[0] * &dx + Expr::constant(INTERFACE_VALUE) * &v[1] * &dg;
        let bcs = vec![DirichletBC::constant(&u_space, 0.0, |x| {
            x[0] < MARKER_EPS || x[0] > 1.0 - MARKER_EPS
        })];
        Ok(PoissonLm {
            mesh: mesh.clone(),
            gamma: gamma.clone(),
            u_space,
            lambda_space,
            space,
            a,
            l,
            bcs,
        })
    }

    pub fn assemble(&self, opts: &AssemblyOptions) -> Result<(BlockNestMatrix, BlockVector)> {
        assemble_system(&self.a, &self.l, &self.bcs, opts)
    }

    pub fn exact(x: &[f64]) -> f64 {
        x[0] * (1.0 - x[0])
    }

    /// max |u_h − c| over the dofs of u lying on x = 1/2.
    pub fn interface_deviation(&self, uh: &Function) -> f64 {
        let dm = self.u_space.dofmap();
        (0..self.u_space.dim())
            .filter(|&d| (dm.dof_coordinates(d)[0] - 0.5).abs() < MARKER_EPS)
            .map(|d| (uh.coefficients()[d] - INTERFACE_VALUE).abs())
            .fold(0.0, f64::max)
    }
}

/// Convergence study over `config.resolutions`: rows for ‖u − u_h‖ in L2 and
/// H1 and the interface deviation max_Γ |u_h − c|.
pub fn run_poisson_lm(config: &StudyConfig) -> Result<StudyResult> {
    check_resolutions(&config.resolutions)?;
    let k = config.degree;
    let gdim = config.dim;
    let value = |x: &[f64]| vec![PoissonLm::exact(x)];
    let gradient = move |x: &[f64]| {
        let mut g = vec![0.0; gdim];
        g[0] = 1.0 - 2.0 * x[0];
        g
    };
    let exact = Exact {
        value: &value,
        gradient: &gradient,
    };
    let mut measurements = Vec::new();
    let mut finest = None;
    for (idx, &n) in config.resolutions.iter().enumerate() {
        let solved = at_resolution(n, (|| {
            let problem = PoissonLm::new(config.dim, n, k)?;
            let (nest, rhs) = problem.assemble(&config.assembly)?;
            let matrix = nest.convert_to_monolithic();
            let rhs = rhs.to_monolithic();
            let solution = solve(&matrix, &rhs, &config.solver)?;
            let dims = nest.row_dims();
            let uh = Function::from_coefficients(&problem.u_space, solution[..dims[0]].to_vec())?;
            let lh = Function::from_coefficients(&problem.lambda_space, solution[dims[0]..].to_vec())?;
            let err = error_integrals(&uh, &exact, 2 * k + 2, config.assembly.parallel)?;
            measurements.push((n, "u".to_string(), "L2".to_string(), err.l2()));
            measurements.push((n, "u".to_string(), "H1".to_string(), err.h1()));
            measurements.push((n, "u_gamma".to_string(), "max".to_string(), problem.interface_deviation(&uh)));
            Ok(SolvedSystem {
                n,
                matrix,
                rhs,
                solution,
                fields: vec![("u".into(), uh), ("lambda".into(), lh)],
            })
        })())?;
        if config.keep_finest && idx + 1 == config.resolutions.len() {
            finest = Some(solved);
        }
    }
    let mut rows = rows_with_rates(measurements);
    // The deviation sits at round-off level; a rate would be noise.
    for row in rows.iter_mut().filter(|r| r.var == "u_gamma") {
        row.rate = None;
    }
    Ok(StudyResult {
        rows,
        finest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplier_block_dimensions() {
        let p = PoissonLm::new(2, 4, 1).unwrap();
        assert_eq!(p.lambda_space.dim(), 5);
        assert_eq!(p.u_space.dim(), 25);
        let (nest, _) = p.assemble(&Default::default()).unwrap();
        assert_eq!(nest.row_dims(), &[25, 5]);
        assert!(nest.block(1, 1).is_none());
    }

    #[test]
    fn quadratic_elements_reproduce_the_solution() {
        let config = StudyConfig {
            resolutions: vec![2, 4],
            degree: 2,
            ..Default::default()
        };
        let r = run_poisson_lm(&config).unwrap();
        for row in &r.rows {
            assert!(row.error <= 1e-10, "{row:?}");
        }
    }

    #[test]
    fn first_order_rates() {
        let config = StudyConfig {
            resolutions: vec![4, 8, 16],
            ..Default::default()
        };
        let r = run_poisson_lm(&config).unwrap();
        let l2 = r.fitted_rate("u", "L2").unwrap();
        let h1 = r.fitted_rate("u", "H1").unwrap();
        assert!((1.85..=2.3).contains(&l2), "{l2}");
        assert!((0.9..=1.3).contains(&h1), "{h1}");
        assert!(r.series("u_gamma", "max").iter().all(|row| row.error < 1e-10));
    }
}
