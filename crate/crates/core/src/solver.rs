//! Multilinear systems `A∗X = B` and `C∗X∗D = B` through core inverses.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inverse::{core_inverse, InverseOptions};
use crate::tensor::{DenseTensor, TensorShape};

/// Default solvability tolerance, relative to `1 + ‖B‖`.
pub const SOLVE_TOL: f64 = 1e-8;

/// Options with the solvability tolerance.
pub fn solve_options() -> InverseOptions {
    InverseOptions::default()
        .with_residual_tol(SOLVE_TOL)
        .expect("positive tolerance")
}

/// Homogeneous part of the general solution.
#[derive(Clone, Debug, PartialEq)]
pub enum FreeFamily {
    /// `Z ↦ P∗Z` with `P = I - A^⊕∗A`.
    OneSided { projector: DenseTensor },
    /// `Z ↦ Z - L∗Z∗R` with `L = C^⊕∗C`, `R = D∗D^⊕`.
    TwoSided {
        left: DenseTensor,
        right: DenseTensor,
    },
}

impl FreeFamily {
    pub fn apply(&self, z: &DenseTensor) -> Result<DenseTensor> {
        match self {
            FreeFamily::OneSided { projector } => projector.einstein_product(z),
            FreeFamily::TwoSided { left, right } => {
                z.sub(&left.einstein_product(z)?.einstein_product(right)?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub solvable: bool,
    /// `A^⊕∗B` or `C^⊕∗B∗D^⊕`.
    pub particular: DenseTensor,
    /// `‖lhs(particular) - B‖ / (1 + ‖B‖)`.
    pub residual: f64,
    pub free_projector: FreeFamily,
    /// `‖A∗A^⊕∗B - B‖ / (1 + ‖B‖)`, or the two-sided analogue.
    pub certificate_residual: f64,
}

impl SolveOutcome {
    /// `particular + family(z)`.
    pub fn family_member(&self, z: &DenseTensor) -> Result<DenseTensor> {
        self.particular.add(&self.free_projector.apply(z)?)
    }
}

fn relative(diff: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    Ok(diff.distance(b)? / (1.0 + b.norm_fro()))
}

fn mismatch(op: &'static str, left: &DenseTensor, right: &DenseTensor) -> Error {
    Error::ShapeMismatch {
        op,
        left: left.shape().clone(),
        right: right.shape().clone(),
    }
}

/// Core-inverse solution of `A∗X = B`.
pub fn solve_one_sided(
    a: &DenseTensor,
    b: &DenseTensor,
    opts: &InverseOptions,
) -> Result<SolveOutcome> {
    a.require_square("solve_one_sided")?;
    if a.shape().right_dims() != b.shape().left_dims() {
        return Err(mismatch("solve_one_sided", a, b));
    }
    let ac = core_inverse(a, opts)?;
    let x = ac.einstein_product(b)?;
    let ax = a.einstein_product(&x)?;
    let certificate_residual = relative(&ax, b)?;
    let projector = a.identity_like()?.sub(&ac.einstein_product(a)?)?;
    Ok(SolveOutcome {
        solvable: certificate_residual <= opts.residual_tol(),
        residual: certificate_residual,
        particular: x,
        free_projector: FreeFamily::OneSided { projector },
        certificate_residual,
    })
}

/// The unique solution of `A∗X = B` inside `R(A)`.
pub fn solve_unique_in_range(
    a: &DenseTensor,
    b: &DenseTensor,
    opts: &InverseOptions,
) -> Result<DenseTensor> {
    let out = solve_one_sided(a, b, opts)?;
    if !out.solvable {
        return Err(Error::NotConsistent {
            residual: out.certificate_residual,
        });
    }
    Ok(out.particular)
}

/// Core-inverse solution of `C∗X∗D = B`.
pub fn solve_two_sided(
    c: &DenseTensor,
    d: &DenseTensor,
    b: &DenseTensor,
    opts: &InverseOptions,
) -> Result<SolveOutcome> {
    c.require_square("solve_two_sided")?;
    d.require_square("solve_two_sided")?;
    if c.shape().right_dims() != b.shape().left_dims() {
        return Err(mismatch("solve_two_sided", c, b));
    }
    if b.shape().right_dims() != d.shape().left_dims() {
        return Err(mismatch("solve_two_sided", b, d));
    }
    let cc = core_inverse(c, opts)?;
    let dc = core_inverse(d, opts)?;
    let left = cc.einstein_product(c)?;
    let right = d.einstein_product(&dc)?;

    let cert = c
        .einstein_product(&cc)?
        .einstein_product(b)?
        .einstein_product(&dc)?
        .einstein_product(d)?;
    let certificate_residual = relative(&cert, b)?;
    let x = cc.einstein_product(b)?.einstein_product(&dc)?;
    let residual = relative(&c.einstein_product(&x)?.einstein_product(d)?, b)?;
    Ok(SolveOutcome {
        solvable: certificate_residual <= opts.residual_tol(),
        particular: x,
        residual,
        free_projector: FreeFamily::TwoSided { left, right },
        certificate_residual,
    })
}

/// `vec(X)`: the same entries viewed as a column, shape `(N ++ M ; 1)`.
pub fn vec(x: &DenseTensor) -> DenseTensor {
    let mut left = x.shape().left_dims().to_vec();
    left.extend_from_slice(x.shape().right_dims());
    x.reshape(TensorShape::new(left, Vec::new()).expect("dims already validated"))
        .expect("same length")
}

/// Inverse of [`vec`] for a target shape.
pub fn unvec(v: &DenseTensor, shape: TensorShape) -> Result<DenseTensor> {
    v.reshape(shape)
}

/// `K = C ⊗ D^T` with `K ∗ vec(X) = vec(C∗X∗D)`.
pub fn kron_lift(c: &DenseTensor, d: &DenseTensor) -> Result<DenseTensor> {
    c.require_square("kron_lift")?;
    d.require_square("kron_lift")?;
    Ok(c.kron(&d.transpose()))
}

/// Block factors of `C∗X + X∗D = [C I] ∗ diag(X, X) ∗ [I; D]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SylvesterBlocks {
    /// `[C I]`, shape `(N ; 2 ++ N)`.
    pub row: DenseTensor,
    /// `[I; D]`, shape `(2 ++ M ; M)`.
    pub column: DenseTensor,
}

impl SylvesterBlocks {
    /// `diag(X, X)`, shape `(2 ++ N ; 2 ++ M)`.
    pub fn middle(&self, x: &DenseTensor) -> Result<DenseTensor> {
        let n = self.row.rows();
        let m = self.column.cols();
        if x.rows() != n || x.cols() != m {
            return Err(mismatch("sylvester_middle", &self.row, x));
        }
        let shape = TensorShape::new(
            stacked(x.shape().left_dims()),
            stacked(x.shape().right_dims()),
        )?;
        Ok(DenseTensor::from_fn(shape, |t1, t2| {
            let (b1, i) = (t1 / n, t1 % n);
            let (b2, j) = (t2 / m, t2 % m);
            if b1 == b2 {
                x.get(i, j)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// `C∗X + X∗D` evaluated through the blocks.
    pub fn apply(&self, x: &DenseTensor) -> Result<DenseTensor> {
        self.row
            .einstein_product(&self.middle(x)?)?
            .einstein_product(&self.column)
    }
}

fn stacked(dims: &[usize]) -> Vec<usize> {
    let mut v = vec![2];
    v.extend_from_slice(dims);
    v
}

pub fn sylvester_block_form(c: &DenseTensor, d: &DenseTensor) -> Result<SylvesterBlocks> {
    c.require_square("sylvester_block_form")?;
    d.require_square("sylvester_block_form")?;
    let (n, m) = (c.rows(), d.rows());
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let delta = |i: usize, j: usize| if i == j { one } else { zero };

    let n_dims = c.shape().left_dims().to_vec();
    let m_dims = d.shape().left_dims().to_vec();
    let row_shape = TensorShape::new(n_dims.clone(), stacked(&n_dims))?;
    let row = DenseTensor::from_fn(row_shape, |i, t2| {
        let (b, k) = (t2 / n, t2 % n);
        if b == 0 {
            c.get(i, k)
        } else {
            delta(i, k)
        }
    });
    let col_shape = TensorShape::new(stacked(&m_dims), m_dims)?;
    let column = DenseTensor::from_fn(col_shape, |t1, j| {
        let (b, l) = (t1 / m, t1 % m);
        if b == 0 {
            delta(l, j)
        } else {
            d.get(l, j)
        }
    });
    Ok(SylvesterBlocks { row, column })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(dims: &[usize], re: &[f64]) -> DenseTensor {
        DenseTensor::from_real(TensorShape::square(dims).unwrap(), re).unwrap()
    }

    #[test]
    fn identity_system_returns_rhs() {
        let i = DenseTensor::identity(&[2, 2]).unwrap();
        let b = DenseTensor::from_fn(TensorShape::new(vec![2, 2], vec![3]).unwrap(), |r, c| {
            Complex64::new((r * 3 + c) as f64, 1.0)
        });
        let out = solve_one_sided(&i, &b, &solve_options()).unwrap();
        assert!(out.solvable);
        assert_eq!(out.particular, b);
        let FreeFamily::OneSided { projector } = &out.free_projector else {
            panic!("one-sided family expected");
        };
        assert_eq!(projector.norm_fro(), 0.0);
    }

    #[test]
    fn component_outside_range_is_inconsistent() {
        let p = sq(&[2], &[1.0, 0.0, 0.0, 0.0]);
        let b = DenseTensor::from_real(TensorShape::new(vec![2], vec![]).unwrap(), &[1.0, 1.0])
            .unwrap();
        let out = solve_one_sided(&p, &b, &solve_options()).unwrap();
        assert!(!out.solvable);
        assert!(matches!(
            solve_unique_in_range(&p, &b, &solve_options()),
            Err(Error::NotConsistent { .. })
        ));
    }

    #[test]
    fn nilpotent_coefficient_is_rejected() {
        let n = sq(&[2], &[0.0, 1.0, 0.0, 0.0]);
        let b = DenseTensor::zeros(TensorShape::new(vec![2], vec![]).unwrap());
        assert!(matches!(
            solve_one_sided(&n, &b, &solve_options()),
            Err(Error::IndexTooHigh { index: 2 })
        ));
    }

    #[test]
    fn lift_of_identities_is_identity() {
        let i = DenseTensor::identity(&[2]).unwrap();
        let j = DenseTensor::identity(&[3]).unwrap();
        assert_eq!(
            kron_lift(&i, &j).unwrap(),
            DenseTensor::identity(&[2, 3]).unwrap()
        );
    }

    #[test]
    fn block_shapes() {
        let c = DenseTensor::identity(&[2, 2]).unwrap();
        let d = DenseTensor::identity(&[3]).unwrap();
        let blocks = sylvester_block_form(&c, &d).unwrap();
        assert_eq!(blocks.row.shape().right_dims(), &[2, 2, 2]);
        assert_eq!(blocks.column.shape().left_dims(), &[2, 3]);
        let z = DenseTensor::zeros(TensorShape::new(vec![2, 2], vec![3]).unwrap());
        let zc = DenseTensor::zeros(c.shape().clone());
        let zd = DenseTensor::zeros(d.shape().clone());
        let x = DenseTensor::from_fn(z.shape().clone(), |r, c| Complex64::new(r as f64, c as f64));
        let zero_blocks = sylvester_block_form(&zc, &zd).unwrap();
        assert_eq!(zero_blocks.apply(&x).unwrap(), z);
    }
}
