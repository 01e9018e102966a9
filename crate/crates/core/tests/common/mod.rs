#![allow(dead_code)]

use einv::testkit::{generate, GeneratorFamily, GeneratorSpec};
use einv::{DenseTensor, TensorShape};

pub fn shape(left: &[usize], right: &[usize]) -> TensorShape {
    TensorShape::new(left.to_vec(), right.to_vec()).unwrap()
}

pub fn square(dims: &[usize]) -> TensorShape {
    TensorShape::square(dims).unwrap()
}

pub fn gaussian(shape: TensorShape, seed: u64) -> DenseTensor {
    generate(&GeneratorSpec::new(
        shape,
        GeneratorFamily::GeneralComplex,
        seed,
    ))
    .unwrap()
    .first()
}

pub fn single(dims: &[usize], family: GeneratorFamily, seed: u64) -> DenseTensor {
    generate(&GeneratorSpec::new(square(dims), family, seed))
        .unwrap()
        .first()
}

pub fn pair(dims: &[usize], family: GeneratorFamily, seed: u64) -> (DenseTensor, DenseTensor) {
    generate(&GeneratorSpec::new(square(dims), family, seed))
        .unwrap()
        .into_pair()
}

/// `‖a - b‖ / (1 + ‖a‖ + ‖b‖)`.
pub fn rel(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.distance(b).unwrap() / (1.0 + a.norm_fro() + b.norm_fro())
}

pub fn mul(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    a.einstein_product(b).unwrap()
}

pub fn mul3(a: &DenseTensor, b: &DenseTensor, c: &DenseTensor) -> DenseTensor {
    mul(&mul(a, b), c)
}

/// Square index groups used across the suites.
pub const SQUARE_DIMS: &[&[usize]] = &[&[1], &[2], &[3], &[1, 2], &[2, 2], &[2, 3], &[3, 3]];
