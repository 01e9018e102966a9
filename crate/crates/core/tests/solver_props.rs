mod common;

use common::*;
use einv::inverse::{core_inverse, moore_penrose, InverseOptions};
use einv::solver::{
    kron_lift, solve_one_sided, solve_options, solve_two_sided, solve_unique_in_range,
    sylvester_block_form, unvec, vec, FreeFamily,
};
use einv::testkit::GeneratorFamily as F;
use einv::{DenseTensor, TensorShape};
use proptest::prelude::*;

fn dims_for(pick: usize) -> &'static [usize] {
    SQUARE_DIMS[pick % SQUARE_DIMS.len()]
}

fn rhs_shape(left: &[usize], right: &[usize]) -> TensorShape {
    shape(left, right)
}

fn index1(dims: &[usize], seed: u64) -> DenseTensor {
    single(dims, F::Index1 { rank: None }, seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn free_projector_is_idempotent_and_annihilated(pick in 0usize..7, seed: u64) {
        let a = index1(dims_for(pick), seed);
        let b = DenseTensor::zeros(rhs_shape(a.shape().left_dims(), &[2]));
        let out = solve_one_sided(&a, &b, &solve_options()).unwrap();
        let FreeFamily::OneSided { projector: p } = &out.free_projector else {
            panic!("one-sided family expected");
        };
        prop_assert!(rel(&mul(p, p), p) <= 1e-10);
        prop_assert!(mul(&a, p).norm_fro() <= 1e-10 * (1.0 + a.norm_fro()));
    }

    #[test]
    fn consistent_one_sided_contains_least_squares(pick in 0usize..7, seed: u64, k in 1usize..3) {
        let a = index1(dims_for(pick), seed);
        let y = gaussian(rhs_shape(a.shape().right_dims(), &[k]), seed ^ 1);
        let b = mul(&a, &y);
        let out = solve_one_sided(&a, &b, &solve_options()).unwrap();
        prop_assert!(out.solvable);
        prop_assert!(out.residual <= 1e-9);
        let x_ls = DenseTensor::dematricize(
            &(moore_penrose(&a, &InverseOptions::default()).unwrap().matricize() * b.matricize()),
            y.shape().clone(),
        ).unwrap();
        let member = out.family_member(&x_ls.sub(&out.particular).unwrap()).unwrap();
        prop_assert!(rel(&member, &x_ls) <= 1e-8);
        // any member solves the system
        let other = out.family_member(&gaussian(y.shape().clone(), seed ^ 2)).unwrap();
        prop_assert!(rel(&mul(&a, &other), &b) <= 1e-9);
    }

    #[test]
    fn unique_solution_lies_in_range(pick in 0usize..7, seed: u64) {
        let a = index1(dims_for(pick), seed);
        let b = mul(&a, &gaussian(rhs_shape(a.shape().right_dims(), &[1]), seed ^ 3));
        let x = solve_unique_in_range(&a, &b, &solve_options()).unwrap();
        let ac = core_inverse(&a, &InverseOptions::default()).unwrap();
        prop_assert!(rel(&mul3(&ac, &a, &x), &x) <= 1e-10);
    }

    #[test]
    fn out_of_range_rhs_is_rejected(pick in 1usize..7, seed: u64) {
        let a = single(dims_for(pick), F::Index1 { rank: None }, seed);
        let b = gaussian(rhs_shape(a.shape().right_dims(), &[1]), seed ^ 4);
        let out = solve_one_sided(&a, &b, &solve_options()).unwrap();
        prop_assert!(!out.solvable);
        prop_assert!(solve_unique_in_range(&a, &b, &solve_options()).is_err());
    }

    #[test]
    fn consistent_two_sided_contains_least_squares(p in 0usize..7, q in 0usize..7, seed: u64) {
        let c = index1(dims_for(p), seed);
        let d = index1(dims_for(q), seed ^ 5);
        let y = gaussian(rhs_shape(c.shape().right_dims(), d.shape().left_dims()), seed ^ 6);
        let b = mul3(&c, &y, &d);
        let out = solve_two_sided(&c, &d, &b, &solve_options()).unwrap();
        prop_assert!(out.solvable);
        prop_assert!(out.residual <= 1e-9);
        let k = kron_lift(&c, &d).unwrap();
        let x_ls = unvec(
            &DenseTensor::dematricize(
                &(moore_penrose(&k, &InverseOptions::default()).unwrap().matricize() * vec(&b).matricize()),
                vec(&y).shape().clone(),
            ).unwrap(),
            y.shape().clone(),
        ).unwrap();
        let member = out.family_member(&x_ls.sub(&out.particular).unwrap()).unwrap();
        prop_assert!(rel(&member, &x_ls) <= 1e-8);
    }

    #[test]
    fn lift_matches_two_sided_product(p in 0usize..7, q in 0usize..7, seed: u64) {
        let c = gaussian(square(dims_for(p)), seed);
        let d = gaussian(square(dims_for(q)), seed ^ 7);
        let x = gaussian(rhs_shape(dims_for(p), dims_for(q)), seed ^ 8);
        let lifted = mul(&kron_lift(&c, &d).unwrap(), &vec(&x));
        prop_assert!(rel(&lifted, &vec(&mul3(&c, &x, &d))) <= 1e-13);
    }

    #[test]
    fn lifted_solutions_map_back(p in 0usize..7, q in 0usize..7, seed: u64) {
        let c = index1(dims_for(p), seed);
        let d = index1(dims_for(q), seed ^ 9);
        let y = gaussian(rhs_shape(dims_for(p), dims_for(q)), seed ^ 10);
        let b = mul3(&c, &y, &d);
        let two = solve_two_sided(&c, &d, &b, &solve_options()).unwrap();
        let k = kron_lift(&c, &d).unwrap();
        let one = solve_one_sided(&k, &vec(&b), &solve_options()).unwrap();
        prop_assert!(one.solvable);
        let z = gaussian(vec(&y).shape().clone(), seed ^ 11);
        let x = unvec(&one.family_member(&z).unwrap(), y.shape().clone()).unwrap();
        prop_assert!(rel(&mul3(&c, &x, &d), &b) <= 1e-8);
        let back = two.family_member(&x.sub(&two.particular).unwrap()).unwrap();
        prop_assert!(rel(&back, &x) <= 1e-8);
    }

    #[test]
    fn sylvester_blocks_reproduce_operator(p in 0usize..7, q in 0usize..7, seed: u64) {
        let c = gaussian(square(dims_for(p)), seed);
        let d = gaussian(square(dims_for(q)), seed ^ 12);
        let x = gaussian(rhs_shape(dims_for(p), dims_for(q)), seed ^ 13);
        let blocks = sylvester_block_form(&c, &d).unwrap();
        let direct = mul(&c, &x).add(&mul(&x, &d)).unwrap();
        prop_assert!(rel(&blocks.apply(&x).unwrap(), &direct) <= 1e-13);
    }
}

#[test]
fn two_sided_inconsistency_is_reported() {
    let c = index1(&[2, 2], 1);
    let d = index1(&[3], 2);
    let b = gaussian(shape(&[2, 2], &[3]), 3);
    let out = solve_two_sided(&c, &d, &b, &solve_options()).unwrap();
    assert!(!out.solvable);
    assert!(out.certificate_residual > 1e-3);
}

#[test]
fn right_hand_side_vector_shape() {
    let a = index1(&[2, 3], 4);
    let b = mul(&a, &gaussian(shape(&[2, 3], &[]), 5));
    assert_eq!(b.shape().right_dims(), &[1]);
    assert!(solve_one_sided(&a, &b, &solve_options()).unwrap().solvable);
}
