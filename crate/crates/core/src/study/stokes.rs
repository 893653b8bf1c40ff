use std::f64::consts::PI;
use std::sync::Arc;

use super::{
    at_resolution, check_resolutions, error_integrals, rows_with_rates, solve, Exact, SolvedSystem, StudyConfig,
    StudyResult, MARKER_EPS,
};
use crate::assembly::{assemble_system, AssemblyOptions};
use crate::error::{Error, Result};
use crate::forms::{div, grad, inner, test_functions, trial_functions, Expr, Form, Measure};
use crate::linalg::{BlockNestMatrix, BlockVector};
use crate::mesh::{mark_entities, unit_square_mesh, Mesh};
use crate::meshview::create_submesh;
use crate::space::{Function, FunctionSpace, MixedFunctionSpace};

/// Stokes–Brinkman flow −Δu + u − ∇p = f, div u = 0 on the unit square with
/// the velocity imposed on the inlet x = 0 through a vector multiplier, a
/// traction ∇u·n + p n = h on the outlet x = 1, and homogeneous traction on
/// the top and bottom. Data come from the manufactured solution
///
/// u = (sin πx cos πy, −cos πx sin πy), p = π cos πx cos πy.
pub struct StokesBrinkman {
    pub mesh: Arc<Mesh>,
    pub inlet: Arc<Mesh>,
    pub velocity: Arc<FunctionSpace>,
    pub pressure: Arc<FunctionSpace>,
    pub multiplier: Arc<FunctionSpace>,
    pub space: Arc<MixedFunctionSpace>,
    pub a: Form,
    pub l: Form,
}

impl StokesBrinkman {
    pub fn velocity_exact(x: &[f64]) -> Vec<f64> {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        vec![sx * cy, -cx * sy]
    }

    /// `[component][direction]`
    pub fn velocity_gradient(x: &[f64]) -> Vec<f64> {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        vec![PI * cx * cy, -PI * sx * sy, PI * sx * sy, -PI * cx * cy]
    }

    pub fn pressure_exact(x: &[f64]) -> f64 {
        PI * (PI * x[0]).cos() * (PI * x[1]).cos()
    }

    pub fn pressure_gradient(x: &[f64]) -> Vec<f64> {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        vec![-PI * PI * sx * cy, -PI * PI * cx * sy]
    }

    /// f = −Δu + u − ∇p
    pub fn forcing(x: &[f64]) -> Vec<f64> {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let pi2 = PI * PI;
        vec![(3.0 * pi2 + 1.0) * sx * cy, -(pi2 + 1.0) * cx * sy]
    }

    /// ∇u·n + p n with n = (1, 0).
    pub fn traction_outlet(x: &[f64]) -> Vec<f64> {
        let g = StokesBrinkman::velocity_gradient(x);
        let p = StokesBrinkman::pressure_exact(x);
        vec![g[0] + p, g[2]]
    }

    /// Velocity P_{k+1}, pressure P_k, multiplier P_k on the inlet.
    pub fn new(n: usize, k: usize) -> Result<StokesBrinkman> {
        if !(1..=2).contains(&k) {
            return Err(Error::InvalidArgument(format!("order {k} not supported (1 or 2)")));
        }
        let mesh = unit_square_mesh(n)?;
        let inlet = create_submesh(&mark_entities(&mesh, 1, |x| x[0] < MARKER_EPS)?, 1)?;
        let velocity = FunctionSpace::vector_lagrange(&mesh, k + 1)?;
        let pressure = FunctionSpace::lagrange(&mesh, k)?;
        let multiplier = FunctionSpace::vector_lagrange(&inlet, k)?;
        let space = MixedFunctionSpace::new(vec![velocity.clone(), pressure.clone(), multiplier.clone()])?;
        let (u, v) = (trial_functions(&space), test_functions(&space));
        let dx = Measure::cell(&mesh);
        let d_in = Measure::cell(&inlet);
        let outlet = mark_entities(&mesh, 1, |x| x[0] > 1.0 - MARKER_EPS)?;
        let ds_out = Measure::exterior_facet(&mesh).with_subdomain_data(outlet).subdomain(1);

        let data_degree = k + 3;
        let f = Expr::analytic_vector(2, data_degree, StokesBrinkman::forcing);
        let h = Expr::analytic_vector(2, data_degree, StokesBrinkman::traction_outlet);
        let g = Expr::analytic_vector(2, data_degree, StokesBrinkman::velocity_exact);

        let a = (inner(&grad(&u[0]), &grad(&v[0]))
            + inner(&u[0], &v[0])
            + &u[1] * div(&v[0])
            + &v[1] * div(&u[0]))
            * &dx
            + (inner(&u[2], &v[0]) + inner(&v[2], &u[0])) * &d_in;
        let l = inner(&f, &v[0]) * &dx + inner(&h, &v[0]) * &ds_out + inner(&g, &v[2]) * &d_in;
        Ok(StokesBrinkman {
            mesh,
            inlet,
            velocity,
            pressure,
            multiplier,
            space,
            a,
            l,
        })
    }

    pub fn assemble(&self, opts: &AssemblyOptions) -> Result<(BlockNestMatrix, BlockVector)> {
        assemble_system(&self.a, &self.l, &[], opts)
    }
}

/// Convergence study: velocity L2/H1, pressure L2/H1 and ‖div u_h‖.
/// `config.degree` is the pressure order k.
pub fn run_stokes_brinkman(config: &StudyConfig) -> Result<StudyResult> {
    check_resolutions(&config.resolutions)?;
    if config.dim != 2 {
        return Err(Error::InvalidArgument("the Stokes–Brinkman study is two-dimensional".into()));
    }
    let k = config.degree;
    let (uv, ug) = (StokesBrinkman::velocity_exact, StokesBrinkman::velocity_gradient);
    let pv = |x: &[f64]| vec![StokesBrinkman::pressure_exact(x)];
    let pg = StokesBrinkman::pressure_gradient;
    let u_exact = Exact { value: &uv, gradient: &ug };
    let p_exact = Exact { value: &pv, gradient: &pg };

    let mut measurements = Vec::new();
    let mut finest = None;
    for (idx, &n) in config.resolutions.iter().enumerate() {
        let solved = at_resolution(n, (|| {
            let problem = StokesBrinkman::new(n, k)?;
            let (nest, rhs) = problem.assemble(&config.assembly)?;
            let matrix = nest.convert_to_monolithic();
            let rhs = rhs.to_monolithic();
            let solution = solve(&matrix, &rhs, &config.solver)?;
            let off = nest.row_offsets();
            let field = |s: &Arc<FunctionSpace>, b: usize| {
                Function::from_coefficients(s, solution[off[b]..off[b + 1]].to_vec())
            };
            let uh = field(&problem.velocity, 0)?;
            let ph = field(&problem.pressure, 1)?;
            let lh = field(&problem.multiplier, 2)?;
            let par = config.assembly.parallel;
            let eu = error_integrals(&uh, &u_exact, 2 * (k + 1) + 2, par)?;
            let ep = error_integrals(&ph, &p_exact, 2 * k + 2, par)?;
            for (var, norm, e) in [
                ("u", "L2", eu.l2()),
                ("u", "H1", eu.h1()),
                ("p", "L2", ep.l2()),
                ("p", "H1", ep.h1()),
                ("div_u", "L2", eu.div()),
            ] {
                measurements.push((n, var.to_string(), norm.to_string(), e));
            }
            Ok(SolvedSystem {
                n,
                matrix,
                rhs,
                solution,
                fields: vec![("u".into(), uh), ("p".into(), ph), ("lambda".into(), lh)],
            })
        })())?;
        if config.keep_finest && idx + 1 == config.resolutions.len() {
            finest = Some(solved);
        }
    }
    Ok(StudyResult {
        rows: rows_with_rates(measurements),
        finest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], dir: usize) -> Vec<f64> {
        let eps = 1e-6;
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[dir] += eps;
        xm[dir] -= eps;
        f(&xp).iter().zip(f(&xm)).map(|(a, b)| (a - b) / (2.0 * eps)).collect()
    }

    #[test]
    fn manufactured_data_satisfy_the_equations() {
        for x in [[0.3, 0.7], [0.11, 0.52], [0.9, 0.05]] {
            // gradient
            let g = StokesBrinkman::velocity_gradient(&x);
            for dir in 0..2 {
                let d = fd(StokesBrinkman::velocity_exact, &x, dir);
                for c in 0..2 {
                    assert!((g[c * 2 + dir] - d[c]).abs() < 1e-7);
                }
            }
            // divergence-free
            assert!((g[0] + g[3]).abs() < 1e-12);
            // −Δu + u − ∇p = f
            let lap: Vec<f64> = (0..2)
                .map(|c| {
                    (0..2)
                        .map(|dir| fd(|y| vec![StokesBrinkman::velocity_gradient(y)[c * 2 + dir]], &x, dir)[0])
                        .sum()
                })
                .collect();
            let u = StokesBrinkman::velocity_exact(&x);
            let gp = StokesBrinkman::pressure_gradient(&x);
            let f = StokesBrinkman::forcing(&x);
            for c in 0..2 {
                assert!((-lap[c] + u[c] - gp[c] - f[c]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn top_and_bottom_traction_vanishes() {
        for xv in [0.1, 0.4, 0.75] {
            for (y, ny) in [(0.0, -1.0), (1.0, 1.0)] {
                let x = [xv, y];
                let g = StokesBrinkman::velocity_gradient(&x);
                let p = StokesBrinkman::pressure_exact(&x);
                assert!((g[1] * ny).abs() < 1e-12);
                assert!((g[3] * ny + p * ny).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn block_structure() {
        let s = StokesBrinkman::new(4, 1).unwrap();
        let (nest, _) = s.assemble(&Default::default()).unwrap();
        assert_eq!(nest.row_dims(), &[2 * 81, 25, 2 * 5]);
        assert!(nest.block(1, 1).is_none() && nest.block(2, 2).is_none());
        assert!(nest.block(1, 2).is_none() && nest.block(2, 1).is_none());
        let m = nest.convert_to_monolithic();
        assert!(m.symmetry_defect() < 1e-12);
    }

    #[test]
    fn rates_on_coarse_meshes() {
        let config = StudyConfig {
            resolutions: vec![4, 8, 16],
            ..Default::default()
        };
        let r = run_stokes_brinkman(&config).unwrap();
        assert!(r.fitted_rate("u", "L2").unwrap() > 2.6);
        assert!(r.fitted_rate("u", "H1").unwrap() > 1.8);
        assert!(r.fitted_rate("p", "L2").unwrap() > 1.5);
        let div = r.series("div_u", "L2");
        assert!(div.windows(2).all(|w| w[1].error < w[0].error));
    }
}
