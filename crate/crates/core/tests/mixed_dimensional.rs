use std::sync::Arc;

use approx::assert_relative_eq;
use mixfem::assembly::{assemble_block_matrix, assemble_matrix, assemble_scalar, assemble_vector, AssemblyOptions};
use mixfem::forms::{extract_blocks, grad, inner, test_function, test_functions, trial_function, trial_functions, Expr, Form, Measure};
use mixfem::linalg::{read_matrix_market, write_matrix_market, BlockNestMatrix, CsrMatrix};
use mixfem::mesh::{mark_entities, unit_cube_mesh, unit_square_mesh, CellKind, Mesh};
use mixfem::meshview::create_submesh;
use mixfem::space::{Function, FunctionSpace, MixedFunctionSpace};
use mixfem::study::{solve, PoissonLm, SolverKind, SolverOptions, StokesBrinkman};
use mixfem::Error;

fn midplane(mesh: &Arc<Mesh>) -> Arc<Mesh> {
    let marker = mark_entities(mesh, mesh.tdim() - 1, |x| (x[0] - 0.5).abs() < 1e-10).unwrap();
    create_submesh(&marker, 1).unwrap()
}

fn blocks_of(form: &Form) -> BlockNestMatrix {
    assemble_block_matrix(&extract_blocks(form).unwrap(), &AssemblyOptions::default()).unwrap()
}

#[test]
fn trace_coupling_on_a_cube_midplane() {
    let mesh = unit_cube_mesh(4).unwrap();
    let gamma = midplane(&mesh);
    let v = FunctionSpace::lagrange(&mesh, 2).unwrap();
    let l = FunctionSpace::lagrange(&gamma, 1).unwrap();
    let w = MixedFunctionSpace::new(vec![v.clone(), l.clone()]).unwrap();
    let (t, u) = (test_functions(&w), trial_functions(&w));
    let nest = blocks_of(&(&t[1] * &u[0] * &Measure::cell(&gamma)));
    let b = nest.block(1, 0).unwrap();
    assert_relative_eq!(b.sum(), 1.0, epsilon = 1e-12);
    // ∫_Γ y z ds = 1/4, with y z represented exactly by P2
    let yz = Function::interpolate(&v, |x| vec![x[1] * x[2]]);
    let total: f64 = b.matvec(yz.coefficients()).iter().sum();
    assert_relative_eq!(total, 0.25, epsilon = 1e-12);
}

#[test]
fn tagged_exterior_facets() {
    let mesh = unit_square_mesh(5).unwrap();
    let v = FunctionSpace::lagrange(&mesh, 1).unwrap();
    let right = mark_entities(&mesh, 1, |x| x[0] > 1.0 - 1e-10).unwrap();
    let ds = Measure::exterior_facet(&mesh).with_subdomain_data(right).subdomain(1);
    let b = assemble_vector(&(test_function(&v) * &ds), &AssemblyOptions::default()).unwrap();
    assert_relative_eq!(b.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
    for (d, bd) in b.iter().enumerate() {
        if v.dofmap().dof_coordinates(d)[0] < 1.0 - 1e-10 {
            assert_eq!(*bd, 0.0);
        }
    }
    let y = Expr::spatial_coordinate(2);
    let moment = assemble_scalar(&(inner(&y, &y) * &ds), &AssemblyOptions::default()).unwrap();
    assert_relative_eq!(moment, 1.0 + 1.0 / 3.0, epsilon = 1e-13);
}

#[test]
fn coefficient_forms_match_matrix_products() {
    let mesh = unit_square_mesh(4).unwrap();
    let v = FunctionSpace::lagrange(&mesh, 2).unwrap();
    let wf = Arc::new(Function::interpolate(&v, |x| vec![x[0] * x[0] - x[1]]));
    let opts = AssemblyOptions::default();
    let dx = Measure::cell(&mesh);
    let m = assemble_matrix(&(test_function(&v) * trial_function(&v) * &dx), &opts).unwrap();
    let b = assemble_vector(&(Expr::coefficient(&wf) * test_function(&v) * &dx), &opts).unwrap();
    let mw = m.matvec(wf.coefficients());
    for (x, y) in b.iter().zip(&mw) {
        assert_relative_eq!(*x, *y, epsilon = 1e-14);
    }
    let k = assemble_matrix(&(inner(&grad(&test_function(&v)), &grad(&trial_function(&v))) * &dx), &opts).unwrap();
    let energy = assemble_scalar(&(inner(&grad(&Expr::coefficient(&wf)), &grad(&Expr::coefficient(&wf))) * &dx), &opts).unwrap();
    let kw: f64 = k.matvec(wf.coefficients()).iter().zip(wf.coefficients()).map(|(a, b)| a * b).sum();
    assert_relative_eq!(energy, kw, epsilon = 1e-12);
    // ∫ |∇(x² − y)|² = ∫ 4x² + 1 = 7/3
    assert_relative_eq!(energy, 7.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn cell_outside_the_overlap_is_reported() {
    let mesh = unit_square_mesh(4).unwrap();
    let left = create_submesh(&mark_entities(&mesh, 2, |x| x[0] < 0.5).unwrap(), 1).unwrap();
    let right = create_submesh(&mark_entities(&mesh, 2, |x| x[0] > 0.5).unwrap(), 1).unwrap();
    let vl = FunctionSpace::lagrange(&left, 1).unwrap();
    let vr = FunctionSpace::lagrange(&right, 1).unwrap();
    let w = MixedFunctionSpace::new(vec![vl, vr]).unwrap();
    let (t, u) = (test_functions(&w), trial_functions(&w));
    let form = &t[0] * &u[1] * &Measure::cell(&left);
    let err = assemble_block_matrix(&extract_blocks(&form).unwrap(), &AssemblyOptions::default()).unwrap_err();
    match err {
        Error::Block { row: 0, col: 1, source } => assert!(matches!(*source, Error::AbsentMapping { .. })),
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn degenerate_cells_are_rejected() {
    let mesh = Mesh::new(
        CellKind::Triangle,
        2,
        vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 1.0],
        vec![0, 1, 2, 0, 1, 3],
    )
    .unwrap();
    let v = FunctionSpace::lagrange(&mesh, 1).unwrap();
    let a = test_function(&v) * trial_function(&v) * &Measure::cell(&mesh);
    assert!(matches!(
        assemble_matrix(&a, &AssemblyOptions::default()),
        Err(Error::DegenerateCell { cell: 0, .. })
    ));
}

#[test]
fn thread_count_does_not_change_results() {
    let s = StokesBrinkman::new(8, 1).unwrap();
    let seq = s.assemble(&AssemblyOptions::sequential()).unwrap();
    let par = s
        .assemble(&AssemblyOptions {
            parallel: true,
            quadrature_degree: None,
        })
        .unwrap();
    assert_eq!(seq.0, par.0);
    assert_eq!(seq.1, par.1);
}

#[test]
fn krylov_paths_agree_with_the_direct_solve() {
    let p = PoissonLm::new(2, 8, 1).unwrap();
    let (nest, rhs) = p.assemble(&AssemblyOptions::default()).unwrap();
    let a = nest.convert_to_monolithic();
    let b = rhs.to_monolithic();
    let direct = solve(&a, &b, &SolverOptions::default()).unwrap();
    for kind in [SolverKind::Minres, SolverKind::Gmres] {
        let x = solve(
            &a,
            &b,
            &SolverOptions {
                kind,
                tol: 1e-12,
                maxit: 20_000,
            },
        )
        .unwrap();
        let diff = x.iter().zip(&direct).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{kind:?}: {diff:e}");
    }
}

#[test]
fn saddle_point_system_round_trips_through_matrix_market() {
    let p = PoissonLm::new(2, 4, 1).unwrap();
    let (nest, _) = p.assemble(&AssemblyOptions::default()).unwrap();
    let a: CsrMatrix = nest.convert_to_monolithic();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mtx");
    write_matrix_market(&a, &path).unwrap();
    let back = read_matrix_market(&path).unwrap();
    assert_eq!(back.shape(), a.shape());
    for (x, y) in back.to_dense().iter().zip(a.to_dense()) {
        assert_eq!(*x, y);
    }
}

#[test]
fn invalid_forms_are_reported_before_assembly() {
    let mesh = unit_square_mesh(2).unwrap();
    let other = unit_square_mesh(2).unwrap();
    let v = FunctionSpace::lagrange(&mesh, 1).unwrap();
    let a = test_function(&v) * trial_function(&v) * &Measure::cell(&other);
    assert!(matches!(
        assemble_matrix(&a, &AssemblyOptions::default()),
        Err(Error::InvalidForm(_))
    ));
}
