//! Two-dimensional Neumann Poisson problem as a fourth-order tensor system.
//!
//! The grid function `u_{kl}` (row `k`, column `l`) is the tensor `X` of shape
//! `([m, m] ; [1])`, and the stencil `A = I_m ⊗ P + Q ⊗ I_m + D` has shape
//! `([m, m] ; [m, m])`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse::{core_inverse, InverseOptions};
use crate::tensor::{DenseTensor, TensorShape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagonalRecipe {
    /// Each diagonal entry counts the grid neighbours of its point (2, 3 or 4).
    NeighborCount,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub m: usize,
    pub diagonal_recipe: DiagonalRecipe,
}

impl GridSpec {
    pub fn new(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::GridTooSmall { m });
        }
        Ok(Self {
            m,
            diagonal_recipe: DiagonalRecipe::NeighborCount,
        })
    }

    /// Mesh width on the unit square.
    pub fn h(&self) -> f64 {
        1.0 / (self.m - 1) as f64
    }

    pub fn grid_shape(&self) -> TensorShape {
        TensorShape::new(vec![self.m, self.m], Vec::new()).expect("m >= 3")
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `tridiagonal(-1, 0, -1)` as an `[m] x [m]` tensor.
fn tridiag(m: usize) -> DenseTensor {
    let shape = TensorShape::square(&[m]).expect("m >= 3");
    DenseTensor::from_fn(shape, |i, j| {
        if i.abs_diff(j) == 1 {
            real(-1.0)
        } else {
            real(0.0)
        }
    })
}

pub fn build_stencil(spec: &GridSpec) -> Result<DenseTensor> {
    let m = spec.m;
    if m < 3 {
        return Err(Error::GridTooSmall { m });
    }
    let i = DenseTensor::identity(&[m])?;
    let p = tridiag(m);
    let q = tridiag(m);
    let neighbours = |k: usize| if k == 0 || k == m - 1 { 1.0 } else { 2.0 };
    let d = match spec.diagonal_recipe {
        DiagonalRecipe::NeighborCount => {
            DenseTensor::from_fn(TensorShape::square(&[m, m])?, |t1, t2| {
                if t1 == t2 {
                    real(neighbours(t1 / m) + neighbours(t1 % m))
                } else {
                    real(0.0)
                }
            })
        }
    };
    i.kron(&p).add(&q.kron(&i))?.add(&d)
}

fn require_grid(a: &DenseTensor, f: &DenseTensor) -> Result<()> {
    if a.shape().right_dims() != f.shape().left_dims() {
        return Err(Error::ShapeMismatch {
            op: "poisson",
            left: a.shape().clone(),
            right: f.shape().clone(),
        });
    }
    Ok(())
}

/// `A∗A^⊕∗f`, the part of `f` in `R(A)`.
pub fn project_rhs(a: &DenseTensor, f: &DenseTensor) -> Result<DenseTensor> {
    require_grid(a, f)?;
    let ac = core_inverse(a, &InverseOptions::default())?;
    a.einstein_product(&ac)?.einstein_product(f)
}

/// Result of one solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonSolution {
    pub x: DenseTensor,
    /// Projected right-hand side.
    pub b: DenseTensor,
    /// `‖A∗X - B‖ / (1 + ‖B‖)`.
    pub residual: f64,
}

/// Stencil with its core inverse, reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct PoissonSolver {
    spec: GridSpec,
    a: DenseTensor,
    a_core: DenseTensor,
}

impl PoissonSolver {
    pub fn new(spec: GridSpec, opts: &InverseOptions) -> Result<Self> {
        let a = build_stencil(&spec)?;
        let a_core = core_inverse(&a, opts)?;
        Ok(Self { spec, a, a_core })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn stencil(&self) -> &DenseTensor {
        &self.a
    }

    pub fn core(&self) -> &DenseTensor {
        &self.a_core
    }

    pub fn project(&self, f: &DenseTensor) -> Result<DenseTensor> {
        require_grid(&self.a, f)?;
        self.a.einstein_product(&self.a_core)?.einstein_product(f)
    }

    pub fn solve(&self, f: &DenseTensor) -> Result<PoissonSolution> {
        let b = self.project(f)?;
        let x = self.a_core.einstein_product(&b)?;
        let residual = self.a.einstein_product(&x)?.distance(&b)? / (1.0 + b.norm_fro());
        Ok(PoissonSolution { x, b, residual })
    }
}

/// `X = A^⊕∗B` with `B = project_rhs(A, f)`.
pub fn solve_poisson(
    spec: &GridSpec,
    f: &DenseTensor,
    opts: &InverseOptions,
) -> Result<PoissonSolution> {
    PoissonSolver::new(*spec, opts)?.solve(f)
}

/// Right-hand side `-h^2 f(x_k, y_l)` with `x_k = k h`, `y_l = l h`.
pub fn rhs_from_source(spec: &GridSpec, f: impl Fn(f64, f64) -> f64) -> DenseTensor {
    let (m, h) = (spec.m, spec.h());
    DenseTensor::from_fn(spec.grid_shape(), |t1, _| {
        let (k, l) = (t1 / m, t1 % m);
        real(-h * h * f(k as f64 * h, l as f64 * h))
    })
}

/// `sin(πx) sin(πy)`.
pub fn sin_bump(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

/// Right-hand side of the sine bump with its grid mean removed.
pub fn default_rhs(spec: &GridSpec) -> DenseTensor {
    let b = rhs_from_source(spec, sin_bump);
    let mean = b.data().iter().map(|z| z.re).sum::<f64>() / b.data().len() as f64;
    DenseTensor::from_fn(b.shape().clone(), |t1, t2| b.get(t1, t2) - real(mean))
}

/// Real parts as `m` comma-separated rows, LF line endings.
pub fn to_csv(x: &DenseTensor, m: usize) -> String {
    let mut out = String::new();
    for k in 0..m {
        let row: Vec<String> = (0..m)
            .map(|l| format!("{}", x.data()[k * m + l].re))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `x y u` triples for gnuplot's `splot ... with pm3d`, one block per row.
pub fn heatmap_data(x: &DenseTensor, spec: &GridSpec) -> String {
    let (m, h) = (spec.m, spec.h());
    let mut out = String::new();
    for k in 0..m {
        for l in 0..m {
            let _ = writeln!(
                out,
                "{} {} {}",
                k as f64 * h,
                l as f64 * h,
                x.data()[k * m + l].re
            );
        }
        out.push('\n');
    }
    out
}
