//! Generalized inverses of square and rectangular tensors.
//!
//! Everything is computed on the unfolding matrix. Numerical rank comes from
//! the SVD with threshold `rank_tol_factor * max(rows, cols) * max(sigma_max,
//! reference_norm)`. The index, group and Drazin inverses use a chain of
//! full-rank factorizations (Cline), which avoids forming high powers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cline_chain, singular_values, truncated_svd, CMatrix, Chain};
use crate::tensor::DenseTensor;

/// Default relative rank threshold factor.
pub const DEFAULT_RANK_TOL_FACTOR: f64 = 1e-12;
/// Default residual tolerance for single inverses.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;

/// Tolerances shared by all inverse routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseOptions {
    rank_tol_factor: f64,
    residual_tol: f64,
    reference_norm: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self {
            rank_tol_factor: DEFAULT_RANK_TOL_FACTOR,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            reference_norm: 0.0,
        }
    }
}

impl InverseOptions {
    pub fn new(rank_tol_factor: f64, residual_tol: f64) -> Result<Self> {
        Self::default()
            .with_rank_tol_factor(rank_tol_factor)?
            .with_residual_tol(residual_tol)
    }

    pub fn with_rank_tol_factor(mut self, f: f64) -> Result<Self> {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::InvalidOption(format!(
                "rank_tol_factor must be positive, got {f}"
            )));
        }
        self.rank_tol_factor = f;
        Ok(self)
    }

    pub fn with_residual_tol(mut self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidOption(format!(
                "residual_tol must be positive, got {t}"
            )));
        }
        self.residual_tol = t;
        Ok(self)
    }

    /// Floor for `sigma_max` in the rank threshold. Expressions built from
    /// larger operands (e.g. a product that cancels to near zero) pass the
    /// operands' scale here so that round-off is not mistaken for rank.
    pub fn with_reference_norm(mut self, r: f64) -> Self {
        self.reference_norm = if r.is_finite() && r > 0.0 { r } else { 0.0 };
        self
    }

    pub fn rank_tol_factor(&self) -> f64 {
        self.rank_tol_factor
    }

    pub fn residual_tol(&self) -> f64 {
        self.residual_tol
    }

    pub fn reference_norm(&self) -> f64 {
        self.reference_norm
    }
}

/// `ind(A)` together with the ranks of `A^1 ..= A^{k+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexResult {
    pub k: usize,
    pub ranks: Vec<usize>,
}

fn chain_of(a: &DenseTensor, op: &'static str, opts: &InverseOptions) -> Result<Chain> {
    a.require_square(op)?;
    cline_chain(&a.matricize(), opts.rank_tol_factor, opts.reference_norm)
}

/// Numerical rank of the unfolding.
pub fn rank(a: &DenseTensor, opts: &InverseOptions) -> Result<usize> {
    let m = a.matricize();
    let dim = m.nrows().max(m.ncols());
    Ok(truncated_svd(&m, opts.rank_tol_factor, dim, opts.reference_norm)?.rank())
}

fn pinv_matrix(m: &CMatrix, opts: &InverseOptions) -> Result<CMatrix> {
    let dim = m.nrows().max(m.ncols());
    Ok(truncated_svd(m, opts.rank_tol_factor, dim, opts.reference_norm)?.pinv())
}

/// Moore-Penrose inverse `A^†` via the SVD of the unfolding.
pub fn moore_penrose(a: &DenseTensor, opts: &InverseOptions) -> Result<DenseTensor> {
    Ok(DenseTensor::fold(
        &pinv_matrix(&a.matricize(), opts)?,
        a.shape().transposed(),
    ))
}

/// Smallest `k` with `rank(A^k) == rank(A^{k+1})`.
pub fn index(a: &DenseTensor, opts: &InverseOptions) -> Result<IndexResult> {
    let c = chain_of(a, "index", opts)?;
    Ok(IndexResult {
        k: c.index,
        ranks: c.ranks,
    })
}

/// Drazin inverse `A^D`.
pub fn drazin(a: &DenseTensor, opts: &InverseOptions) -> Result<DenseTensor> {
    let c = chain_of(a, "drazin", opts)?;
    Ok(DenseTensor::fold(&c.drazin()?, a.shape().clone()))
}

/// Drazin inverse from the power formula `A^k (A^{2k+1})^† A^k`, for a
/// caller-supplied `k >= ind(A)`.
pub fn drazin_by_powers(a: &DenseTensor, k: usize, opts: &InverseOptions) -> Result<DenseTensor> {
    a.require_square("drazin_by_powers")?;
    let m = a.matricize();
    let n = m.nrows();
    let mut mk = CMatrix::identity(n, n);
    for _ in 0..k {
        mk = &mk * &m;
    }
    let mut big = mk.clone() * &mk;
    big = &big * &m;
    // Rank of A^{2k+1} is judged against ‖A‖^{2k+1}, not its own (possibly roundoff) norm.
    let sigma = singular_values(&m)?.first().copied().unwrap_or(0.0);
    let base = sigma.max(opts.reference_norm);
    let big_opts = opts.with_reference_norm(base.powi(2 * k as i32 + 1));
    let x = &mk * pinv_matrix(&big, &big_opts)? * &mk;
    Ok(DenseTensor::fold(&x, a.shape().clone()))
}

fn group_from_chain(c: &Chain) -> Result<CMatrix> {
    if c.index > 1 {
        return Err(Error::IndexTooHigh { index: c.index });
    }
    c.drazin()
}

/// Group inverse `A^#`; exists only for index 1.
pub fn group_inverse(a: &DenseTensor, opts: &InverseOptions) -> Result<DenseTensor> {
    let c = chain_of(a, "group_inverse", opts)?;
    Ok(DenseTensor::fold(&group_from_chain(&c)?, a.shape().clone()))
}

/// Core inverse `A^⊕ = A^# A A^†`; exists only for index 1.
pub fn core_inverse(a: &DenseTensor, opts: &InverseOptions) -> Result<DenseTensor> {
    let c = chain_of(a, "core_inverse", opts)?;
    let g = group_from_chain(&c)?;
    let m = a.matricize();
    let x = g * m * c.first.pinv();
    Ok(DenseTensor::fold(&x, a.shape().clone()))
}

/// `A A^† == A^† A` within `residual_tol * (1 + ‖A‖)`.
pub fn is_ep(a: &DenseTensor, opts: &InverseOptions) -> Result<bool> {
    a.require_square("is_ep")?;
    let m = a.matricize();
    let p = pinv_matrix(&m, opts)?;
    let gap = (&m * &p - &p * &m).norm();
    Ok(gap <= opts.residual_tol * (1.0 + a.norm_fro()))
}

/// `‖A A^† B - B‖_F`, the distance of `B` from the range of `A`.
pub fn range_defect(a: &DenseTensor, b: &DenseTensor, opts: &InverseOptions) -> Result<f64> {
    if a.shape().left_dims() != b.shape().left_dims() {
        return Err(Error::ShapeMismatch {
            op: "range_contains",
            left: a.shape().clone(),
            right: b.shape().clone(),
        });
    }
    let m = a.matricize();
    let bm = b.matricize();
    let proj = &m * pinv_matrix(&m, opts)?;
    Ok((proj * &bm - bm).norm())
}

/// `R(B) ⊆ R(A)` within `residual_tol * (1 + ‖B‖)`.
pub fn range_contains(a: &DenseTensor, b: &DenseTensor, opts: &InverseOptions) -> Result<bool> {
    Ok(range_defect(a, b, opts)? <= opts.residual_tol * (1.0 + b.norm_fro()))
}

/// One defining equation of a generalized inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InverseEquation {
    /// `A X A = A`
    E1,
    /// `X A X = X`
    E2,
    /// `(A X)* = A X`
    E3,
    /// `(X A)* = X A`
    E4,
    /// `X A = A X`
    E5,
    /// `X A^2 = A`
    E6,
    /// `A X^2 = X`
    E7,
}

impl InverseEquation {
    pub const ALL: [InverseEquation; 7] = [
        Self::E1,
        Self::E2,
        Self::E3,
        Self::E4,
        Self::E5,
        Self::E6,
        Self::E7,
    ];

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get((n as usize).checked_sub(1)?).copied()
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    fn needs_square(self) -> bool {
        matches!(self, Self::E5 | Self::E6 | Self::E7)
    }
}

/// Residual of one equation, normalised by `1 + (norm bound of its terms)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub equation: u8,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub checks: Vec<EquationCheck>,
}

impl ClassReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

/// Evaluates the requested defining equations for the pair `(A, X)`.
pub fn verify_inverse_class(
    a: &DenseTensor,
    x: &DenseTensor,
    class: &[InverseEquation],
    opts: &InverseOptions,
) -> Result<ClassReport> {
    if a.shape().transposed() != *x.shape() {
        return Err(Error::ShapeMismatch {
            op: "verify_inverse_class",
            left: a.shape().clone(),
            right: x.shape().clone(),
        });
    }
    if class.iter().any(|e| e.needs_square()) {
        a.require_square("verify_inverse_class")?;
    }
    let am = a.matricize();
    let xm = x.matricize();
    let na = am.norm();
    let nx = xm.norm();
    let ax = &am * &xm;
    let xa = &xm * &am;

    let mut checks = Vec::with_capacity(class.len());
    for &eq in class {
        let (diff, bound) = match eq {
            InverseEquation::E1 => ((&ax * &am - &am).norm(), na * na * nx + na),
            InverseEquation::E2 => ((&xa * &xm - &xm).norm(), nx * nx * na + nx),
            InverseEquation::E3 => ((ax.adjoint() - &ax).norm(), na * nx),
            InverseEquation::E4 => ((xa.adjoint() - &xa).norm(), na * nx),
            InverseEquation::E5 => ((&xa - &ax).norm(), na * nx),
            InverseEquation::E6 => ((&xa * &am - &am).norm(), nx * na * na + na),
            InverseEquation::E7 => ((&ax * &xm - &xm).norm(), na * nx * nx + nx),
        };
        let residual = diff / (1.0 + bound);
        checks.push(EquationCheck {
            equation: eq.number(),
            residual,
            pass: residual <= opts.residual_tol,
        });
    }
    Ok(ClassReport { checks })
}

/// Parses a class such as `[1, 3]` into equations.
pub fn class_from_numbers(nums: &[u8]) -> Result<Vec<InverseEquation>> {
    nums.iter()
        .map(|&n| {
            InverseEquation::from_number(n)
                .ok_or_else(|| Error::InvalidOption(format!("no inverse equation ({n})")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::TensorShape;
    use num_complex::Complex64;

    fn real(dims: &[usize], v: &[f64]) -> DenseTensor {
        DenseTensor::from_real(TensorShape::square(dims).unwrap(), v).unwrap()
    }

    fn opts() -> InverseOptions {
        InverseOptions::default()
    }

    #[test]
    fn options_reject_non_positive() {
        assert!(InverseOptions::new(0.0, 1e-10).is_err());
        assert!(InverseOptions::new(1e-12, -1.0).is_err());
        assert!(InverseOptions::new(1e-12, f64::NAN).is_err());
    }

    #[test]
    fn identity_inverses() {
        let i = DenseTensor::identity(&[2, 3]).unwrap();
        assert_eq!(
            moore_penrose(&i, &opts()).unwrap().distance(&i).unwrap(),
            0.0
        );
        assert!(core_inverse(&i, &opts()).unwrap().distance(&i).unwrap() < 1e-14);
        assert_eq!(index(&i, &opts()).unwrap().k, 1);
    }

    #[test]
    fn zero_pinv_has_transposed_shape() {
        let z = DenseTensor::zeros(TensorShape::new(vec![2], vec![3, 1]).unwrap());
        let p = moore_penrose(&z, &opts()).unwrap();
        assert_eq!(p.shape(), &TensorShape::new(vec![3, 1], vec![2]).unwrap());
        assert_eq!(p.norm_fro(), 0.0);
    }

    #[test]
    fn shift_tensor_has_index_three() {
        let s = real(&[3], &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let r = index(&s, &opts()).unwrap();
        assert_eq!(
            r,
            IndexResult {
                k: 3,
                ranks: vec![2, 1, 0, 0]
            }
        );
        assert_eq!(drazin(&s, &opts()).unwrap().norm_fro(), 0.0);
        assert!(matches!(
            group_inverse(&s, &opts()),
            Err(Error::IndexTooHigh { index: 3 })
        ));
        assert!(matches!(
            core_inverse(&s, &opts()),
            Err(Error::IndexTooHigh { index: 3 })
        ));
    }

    #[test]
    fn index_two_block_has_no_group_inverse() {
        // nilpotent 2x2 block plus an invertible 1x1 block
        let a = real(&[3], &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(index(&a, &opts()).unwrap().k, 2);
        assert!(matches!(
            group_inverse(&a, &opts()),
            Err(Error::IndexTooHigh { index: 2 })
        ));
        let d = drazin(&a, &opts()).unwrap();
        let expect = real(&[3], &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
        assert!(d.distance(&expect).unwrap() < 1e-14);
    }

    #[test]
    fn invertible_drazin_is_inverse() {
        let a = real(&[2], &[2.0, 1.0, 1.0, 3.0]);
        let inv = real(&[2], &[0.6, -0.2, -0.2, 0.4]);
        assert!(drazin(&a, &opts()).unwrap().distance(&inv).unwrap() < 1e-14);
        assert!(group_inverse(&a, &opts()).unwrap().distance(&inv).unwrap() < 1e-14);
        assert!(
            drazin_by_powers(&a, 1, &opts())
                .unwrap()
                .distance(&inv)
                .unwrap()
                < 1e-13
        );
    }

    #[test]
    fn hermitian_idempotent_is_its_own_inverse() {
        let p = real(&[2], &[0.5, 0.5, 0.5, 0.5]);
        for x in [
            group_inverse(&p, &opts()).unwrap(),
            core_inverse(&p, &opts()).unwrap(),
        ] {
            assert!(x.distance(&p).unwrap() < 1e-14);
        }
        let rep = verify_inverse_class(&p, &p, &InverseEquation::ALL, &opts()).unwrap();
        assert!(rep.all_pass());
    }

    #[test]
    fn class_check_detects_wrong_scale() {
        let i = DenseTensor::identity(&[2, 3]).unwrap();
        let two = i.scale(Complex64::new(2.0, 0.0));
        let rep = verify_inverse_class(&i, &two, &[InverseEquation::E1], &opts()).unwrap();
        assert!(!rep.all_pass());
    }

    #[test]
    fn ep_classification() {
        let h = real(&[2], &[1.0, 2.0, 2.0, 4.0]);
        assert!(is_ep(&h, &opts()).unwrap());
        let n = real(&[2], &[0.0, 1.0, 0.0, 0.0]);
        assert!(!is_ep(&n, &opts()).unwrap());
    }

    #[test]
    fn non_square_is_rejected() {
        let a = DenseTensor::zeros(TensorShape::new(vec![2], vec![3]).unwrap());
        assert!(matches!(index(&a, &opts()), Err(Error::NotSquare { .. })));
        assert!(matches!(is_ep(&a, &opts()), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn range_membership() {
        let a = real(&[2], &[1.0, 0.0, 0.0, 0.0]);
        let inside =
            DenseTensor::from_real(TensorShape::new(vec![2], vec![1]).unwrap(), &[3.0, 0.0])
                .unwrap();
        let outside =
            DenseTensor::from_real(TensorShape::new(vec![2], vec![1]).unwrap(), &[3.0, 1.0])
                .unwrap();
        assert!(range_contains(&a, &inside, &opts()).unwrap());
        assert!(!range_contains(&a, &outside, &opts()).unwrap());
        let zero = DenseTensor::zeros(a.shape().clone());
        assert!(!range_contains(&zero, &outside, &opts()).unwrap());
    }
}
