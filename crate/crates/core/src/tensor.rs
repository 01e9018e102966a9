//! Dense even-order complex tensors and the Einstein product.
//!
//! A tensor in `C^{I_1 x .. x I_M x J_1 x .. x J_N}` is stored as a flat
//! array indexed by the pair `(t1, t2)`, where `t1` runs over the left
//! indices and `t2` over the right indices, both in row-major order, with
//! `t2` varying fastest. Under this layout the tensor *is* its unfolding
//! matrix, so every contraction reduces to a matrix product.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Left and right index dimensions of an even-order tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorShape {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl TensorShape {
    /// Builds a shape. Every dimension must be at least 1. An empty list is
    /// read as the single dimension `[1]`, which is how vectors `B in C^{N(n)}`
    /// are represented.
    pub fn new(left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        let normalize = |dims: Vec<usize>, side: &str| -> Result<Vec<usize>> {
            if dims.contains(&0) {
                return Err(Error::InvalidShape(format!(
                    "{side} dims {dims:?} contain a zero"
                )));
            }
            Ok(if dims.is_empty() { vec![1] } else { dims })
        };
        Ok(Self {
            left: normalize(left, "left")?,
            right: normalize(right, "right")?,
        })
    }

    /// Square shape `dims x dims`.
    pub fn square(dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), dims.to_vec())
    }

    pub fn left_dims(&self) -> &[usize] {
        &self.left
    }

    pub fn right_dims(&self) -> &[usize] {
        &self.right
    }

    /// Number of rows of the unfolding (product of left dims).
    pub fn rows(&self) -> usize {
        self.left.iter().product()
    }

    /// Number of columns of the unfolding (product of right dims).
    pub fn cols(&self) -> usize {
        self.right.iter().product()
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_square(&self) -> bool {
        self.left == self.right
    }

    /// Shape with left and right swapped.
    pub fn transposed(&self) -> Self {
        Self {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    /// Shape of `a * b` for conformable operands.
    fn product_with(&self, other: &Self) -> Self {
        Self {
            left: self.left.clone(),
            right: other.right.clone(),
        }
    }

    /// Shape of `a (x) b`: left and right dims are concatenated.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            left: [self.left.as_slice(), other.left.as_slice()].concat(),
            right: [self.right.as_slice(), other.right.as_slice()].concat(),
        }
    }

    /// Row-major flat offset of a multi-index over `dims`.
    fn offset(dims: &[usize], idx: &[usize]) -> Option<usize> {
        if dims.len() != idx.len() {
            return None;
        }
        let mut t = 0;
        for (&d, &i) in dims.iter().zip(idx) {
            if i >= d {
                return None;
            }
            t = t * d + i;
        }
        Some(t)
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |d: &[usize]| {
            d.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("x")
        };
        write!(f, "({} ; {})", join(&self.left), join(&self.right))
    }
}

/// Dense complex tensor in the canonical `(t1, t2)` layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: TensorShape,
    data: Vec<Complex64>,
}

impl DenseTensor {
    /// Wraps a flat entry array. Rejects length mismatches and non-finite entries.
    pub fn new(shape: TensorShape, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::LengthMismatch {
                expected: shape.len(),
                actual: data.len(),
                shape,
            });
        }
        if let Some(position) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { position });
        }
        Ok(Self { shape, data })
    }

    /// Real-valued tensor from a flat array.
    pub fn from_real(shape: TensorShape, re: &[f64]) -> Result<Self> {
        Self::new(shape, re.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Tensor whose entry at `(t1, t2)` is `f(t1, t2)`.
    pub fn from_fn(shape: TensorShape, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let (rows, cols) = (shape.rows(), shape.cols());
        let mut data = Vec::with_capacity(rows * cols);
        for t1 in 0..rows {
            for t2 in 0..cols {
                data.push(f(t1, t2));
            }
        }
        Self { shape, data }
    }

    pub fn zeros(shape: TensorShape) -> Self {
        let n = shape.len();
        Self {
            shape,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Identity tensor of shape `dims x dims`.
    pub fn identity(dims: &[usize]) -> Result<Self> {
        let shape = TensorShape::square(dims)?;
        Ok(Self::from_fn(shape, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Identity with the same shape as a square tensor.
    pub fn identity_like(&self) -> Result<Self> {
        self.require_square("identity_like")?;
        Self::identity(self.shape.left_dims())
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn rows(&self) -> usize {
        self.shape.rows()
    }

    pub fn cols(&self) -> usize {
        self.shape.cols()
    }

    pub fn is_square(&self) -> bool {
        self.shape.is_square()
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                op,
                shape: self.shape.clone(),
            })
        }
    }

    /// Entry at unfolding position `(t1, t2)`.
    pub fn get(&self, t1: usize, t2: usize) -> Complex64 {
        self.data[t1 * self.cols() + t2]
    }

    /// Entry at the multi-index `(i_1..i_M, j_1..j_N)` (0-based).
    pub fn at(&self, left: &[usize], right: &[usize]) -> Option<Complex64> {
        let t1 = TensorShape::offset(&self.shape.left, left)?;
        let t2 = TensorShape::offset(&self.shape.right, right)?;
        Some(self.get(t1, t2))
    }

    /// Unfolding matrix with `Π left` rows and `Π right` columns.
    pub fn matricize(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows(), self.cols(), &self.data)
    }

    /// Folds a matrix back into a tensor of the given shape.
    pub fn dematricize(m: &DMatrix<Complex64>, shape: TensorShape) -> Result<Self> {
        if m.nrows() != shape.rows() || m.ncols() != shape.cols() {
            return Err(Error::MatrixMismatch {
                rows: m.nrows(),
                cols: m.ncols(),
                shape,
            });
        }
        let data = m.transpose().as_slice().to_vec();
        Self::new(shape, data)
    }

    /// Internal fold that skips the finiteness scan for results of exact
    /// algebra on already-validated operands.
    pub(crate) fn fold(m: &DMatrix<Complex64>, shape: TensorShape) -> Self {
        debug_assert_eq!((m.nrows(), m.ncols()), (shape.rows(), shape.cols()));
        Self {
            shape,
            data: m.transpose().as_slice().to_vec(),
        }
    }

    /// Same entries viewed under another shape with the same unfolding size
    /// ordering (`Π left · Π right` must match).
    pub fn reshape(&self, shape: TensorShape) -> Result<Self> {
        if shape.len() != self.data.len() {
            return Err(Error::LengthMismatch {
                expected: shape.len(),
                actual: self.data.len(),
                shape,
            });
        }
        Ok(Self {
            shape,
            data: self.data.clone(),
        })
    }

    /// Einstein product `self *_N other`, contracting the right indices of
    /// `self` with the left indices of `other`.
    pub fn einstein_product(&self, other: &Self) -> Result<Self> {
        if self.shape.right != other.shape.left {
            return Err(Error::ShapeMismatch {
                op: "einstein_product",
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        let m = self.matricize() * other.matricize();
        Ok(Self::fold(&m, self.shape.product_with(&other.shape)))
    }

    /// Conjugate transpose `A*`.
    pub fn conj_transpose(&self) -> Self {
        let (rows, cols) = (self.rows(), self.cols());
        Self::from_fn(self.shape.transposed(), |i, j| {
            debug_assert!(j < rows && i < cols);
            self.get(j, i).conj()
        })
    }

    /// Plain transpose `A^T`.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.shape.transposed(), |i, j| self.get(j, i))
    }

    /// Kronecker product; its unfolding is the matrix Kronecker product of
    /// the unfoldings.
    pub fn kron(&self, other: &Self) -> Self {
        let (br, bc) = (other.rows(), other.cols());
        Self::from_fn(self.shape.kron(&other.shape), |t1, t2| {
            self.get(t1 / br, t2 / bc) * other.get(t1 % br, t2 % bc)
        })
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self - other‖_F`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm_fro())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .sub(other)?
            .data
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// `A^k` for a square tensor; `A^0` is the identity.
    pub fn power(&self, k: usize) -> Result<Self> {
        self.require_square("power")?;
        let mut out = self.identity_like()?;
        for _ in 0..k {
            out = out.einstein_product(self)?;
        }
        Ok(out)
    }
}

/// Free-function form of [`DenseTensor::einstein_product`].
pub fn einstein_product(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    a.einstein_product(b)
}

/// Free-function form of [`DenseTensor::kron`].
pub fn kron(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    a.kron(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(shape: TensorShape) -> DenseTensor {
        DenseTensor::from_fn(shape, |i, j| {
            c(
                (i * 7 + j * 3) as f64 * 0.25 - 1.0,
                (i as f64) - (j as f64) * 0.5,
            )
        })
    }

    #[test]
    fn empty_dims_become_unit() {
        let s = TensorShape::new(vec![2, 3], vec![]).unwrap();
        assert_eq!(s.right_dims(), &[1]);
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn zero_dim_is_rejected() {
        assert!(TensorShape::new(vec![2, 0], vec![1]).is_err());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let s = TensorShape::square(&[2]).unwrap();
        let err = DenseTensor::new(s, vec![c(0.0, 0.0); 3]).unwrap_err();
        assert!(matches!(
            err,
            Error::LengthMismatch {
                expected: 4,
                actual: 3,
                ..
            }
        ));
    }

    #[test]
    fn non_finite_is_rejected() {
        let s = TensorShape::square(&[1]).unwrap();
        assert!(DenseTensor::new(s, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn multi_index_matches_flat_layout() {
        let a = sample(TensorShape::square(&[2, 3]).unwrap());
        // t1 = i*3 + j, t2 = k*3 + l
        assert_eq!(a.at(&[1, 2], &[0, 1]).unwrap(), a.get(5, 1));
        assert!(a.at(&[2, 0], &[0, 0]).is_none());
    }

    #[test]
    fn identity_matricizes_to_eye() {
        let i = DenseTensor::identity(&[2, 3]).unwrap();
        assert_eq!(i.matricize(), DMatrix::identity(6, 6));
        assert_eq!(i.norm_fro(), 6f64.sqrt());
        assert_eq!(DenseTensor::zeros(i.shape().clone()).norm_fro(), 0.0);
    }

    #[test]
    fn identity_is_neutral() {
        let a = sample(TensorShape::square(&[2, 3]).unwrap());
        let i = DenseTensor::identity(&[2, 3]).unwrap();
        assert_eq!(i.einstein_product(&a).unwrap(), a);
        assert_eq!(a.einstein_product(&i).unwrap(), a);
    }

    #[test]
    fn contraction_mismatch_names_both_shapes() {
        let a = sample(TensorShape::square(&[2, 3]).unwrap());
        let b = sample(TensorShape::square(&[3, 2]).unwrap());
        let msg = a.einstein_product(&b).unwrap_err().to_string();
        assert!(
            msg.contains("(2x3 ; 2x3)") && msg.contains("(3x2 ; 3x2)"),
            "{msg}"
        );
    }

    #[test]
    fn product_shape_rule() {
        let a = sample(TensorShape::new(vec![2], vec![3, 2]).unwrap());
        let b = sample(TensorShape::new(vec![3, 2], vec![4]).unwrap());
        let p = a.einstein_product(&b).unwrap();
        assert_eq!(p.shape(), &TensorShape::new(vec![2], vec![4]).unwrap());
    }

    #[test]
    fn conj_transpose_involution_and_skew() {
        let a = sample(TensorShape::new(vec![2, 3], vec![3]).unwrap());
        assert_eq!(a.conj_transpose().conj_transpose(), a);
        assert_eq!(a.conj_transpose().matricize(), a.matricize().adjoint());
        let skew = DenseTensor::from_fn(TensorShape::square(&[2, 2]).unwrap(), |i, j| {
            c(i as f64 - j as f64, 0.0)
        });
        assert_eq!(skew.conj_transpose(), skew.scale(c(-1.0, 0.0)));
    }

    #[test]
    fn kron_matches_matrix_kronecker() {
        let a = sample(TensorShape::new(vec![2], vec![3]).unwrap());
        let b = sample(TensorShape::new(vec![2, 2], vec![1, 2]).unwrap());
        let k = a.kron(&b);
        assert_eq!(
            k.shape(),
            &TensorShape::new(vec![2, 2, 2], vec![3, 1, 2]).unwrap()
        );
        assert_eq!(k.matricize(), a.matricize().kronecker(&b.matricize()));
    }

    #[test]
    fn identity_kron_identity() {
        let i2 = DenseTensor::identity(&[2]).unwrap();
        let i3 = DenseTensor::identity(&[3]).unwrap();
        assert_eq!(i2.kron(&i3), DenseTensor::identity(&[2, 3]).unwrap());
    }

    #[test]
    fn dematricize_rejects_wrong_size() {
        let m = DMatrix::<Complex64>::zeros(6, 5);
        assert!(DenseTensor::dematricize(&m, TensorShape::square(&[2, 3]).unwrap()).is_err());
    }

    #[test]
    fn scalar_tensor_round_trip() {
        let s = TensorShape::square(&[1]).unwrap();
        let a = DenseTensor::new(s.clone(), vec![c(2.0, -1.0)]).unwrap();
        assert_eq!(DenseTensor::dematricize(&a.matricize(), s).unwrap(), a);
    }

    #[test]
    fn power_zero_is_identity() {
        let a = sample(TensorShape::square(&[2]).unwrap());
        assert_eq!(a.power(0).unwrap(), DenseTensor::identity(&[2]).unwrap());
        assert_eq!(a.power(2).unwrap(), a.einstein_product(&a).unwrap());
    }
}
