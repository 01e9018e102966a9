mod common;

use common::*;
use einv::inverse::{core_inverse, group_inverse, index, moore_penrose, InverseOptions};
use einv::poisson::{
    build_stencil, default_rhs, heatmap_data, project_rhs, rhs_from_source, sin_bump,
    solve_poisson, to_csv, GridSpec, PoissonSolver,
};
use einv::{Complex64, DenseTensor};

fn opts() -> InverseOptions {
    InverseOptions::default()
}

#[test]
fn stencil_has_index_one_for_small_grids() {
    for m in 3..=16 {
        let a = build_stencil(&GridSpec::new(m).unwrap()).unwrap();
        assert_eq!(a.conj_transpose(), a, "m = {m}");
        assert_eq!(index(&a, &opts()).unwrap().k, 1, "m = {m}");
    }
}

#[test]
fn stencil_inverses_coincide() {
    for m in [4, 8] {
        let a = build_stencil(&GridSpec::new(m).unwrap()).unwrap();
        let c = core_inverse(&a, &opts()).unwrap();
        assert!(rel(&c, &moore_penrose(&a, &opts()).unwrap()) <= 1e-9);
        assert!(rel(&c, &group_inverse(&a, &opts()).unwrap()) <= 1e-9);
    }
}

#[test]
fn projection_is_idempotent_and_kills_constants() {
    let spec = GridSpec::new(6).unwrap();
    let a = build_stencil(&spec).unwrap();
    let f = rhs_from_source(&spec, |x, y| x * x + (3.0 * y).cos());
    let once = project_rhs(&a, &f).unwrap();
    let twice = project_rhs(&a, &once).unwrap();
    assert!(rel(&once, &twice) <= 1e-12);
    let constant = DenseTensor::from_fn(spec.grid_shape(), |_, _| Complex64::new(2.5, 0.0));
    assert!(project_rhs(&a, &constant).unwrap().norm_fro() <= 1e-12);
}

#[test]
fn solution_stays_in_range_and_solves() {
    let spec = GridSpec::new(8).unwrap();
    let solver = PoissonSolver::new(spec, &opts()).unwrap();
    let sol = solver.solve(&default_rhs(&spec)).unwrap();
    assert!(sol.residual <= 1e-8);
    let a = solver.stencil();
    let back = mul3(solver.core(), a, &sol.x);
    assert!(rel(&back, &sol.x) <= 1e-10);
    let mean: f64 = sol.x.data().iter().map(|z| z.re).sum::<f64>() / 64.0;
    assert!(mean.abs() <= 1e-12);
    assert_eq!(
        solve_poisson(&spec, &default_rhs(&spec), &opts()).unwrap(),
        sol
    );
}

#[test]
fn bump_is_symmetric_on_the_grid() {
    let spec = GridSpec::new(7).unwrap();
    let f = rhs_from_source(&spec, sin_bump);
    let sol = solve_poisson(&spec, &f, &opts()).unwrap();
    for k in 0..7 {
        for l in 0..7 {
            let u = sol.x.data()[k * 7 + l].re;
            let v = sol.x.data()[l * 7 + k].re;
            assert!((u - v).abs() <= 1e-12);
        }
    }
}

#[test]
fn text_outputs_have_grid_layout() {
    let spec = GridSpec::new(5).unwrap();
    let sol = solve_poisson(&spec, &default_rhs(&spec), &opts()).unwrap();
    let csv = to_csv(&sol.x, 5);
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().all(|l| l.split(',').count() == 5));
    assert!(!csv.contains('\r'));
    let heat = heatmap_data(&sol.x, &spec);
    assert_eq!(heat.lines().filter(|l| !l.is_empty()).count(), 25);
    assert!(heat.starts_with("0 0 "));
}
