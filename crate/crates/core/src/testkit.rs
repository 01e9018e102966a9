//! Structured random tensors and brute-force oracles.
//!
//! Randomness comes from xoshiro256++ seeded through SplitMix64
//! (`rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64`). Gaussian samples use
//! the ziggurat sampler of `rand_distr::StandardNormal`. A given
//! [`GeneratorSpec`] therefore yields the same tensors bit for bit on every
//! platform with IEEE-754 doubles.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::LawId;
use crate::linalg::CMatrix;
use crate::tensor::{DenseTensor, TensorShape};

const MAX_ATTEMPTS: usize = 32;
/// Conditioning filter for random invertible blocks.
const MIN_COND_RATIO: f64 = 1e-6;
/// Random singular values are drawn from this interval.
const SIGMA_RANGE: (f64, f64) = (0.5, 1.5);

/// One block of a block-diagonal pair, before the global unitary change of basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    /// (core non-EP block, scalar)
    CoreScalar,
    /// (scalar, core non-EP block)
    ScalarCore,
    /// (zero, core non-EP block)
    ZeroAny,
    /// (core non-EP block, zero)
    AnyZero,
    /// (C, C*)
    Adjoint,
    /// (EP block, scalar)
    EpScalar,
    /// (scalar, EP block)
    ScalarEp,
    /// (scalar, invertible)
    ScalarInvertible,
    /// (invertible, scalar)
    InvertibleScalar,
    /// (zero, zero)
    ZeroZero,
    /// (H, H^3 + 2H) with H Hermitian
    HermitianPoly,
}

/// What to generate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GeneratorFamily {
    /// Gaussian entries, any shape.
    GeneralComplex,
    /// Index-1 tensor `S diag(C_r, 0) S^{-1}`.
    Index1 {
        rank: Option<usize>,
    },
    /// Singular Hermitian tensor.
    Hermitian,
    /// Orthogonal projector.
    HermitianIdempotent,
    /// Normal tensor `U diag(λ) U*` with some zero eigenvalues.
    Ep,
    Unitary,
    /// Nilpotent tensor of index exactly `k`.
    Nilpotent {
        k: usize,
    },
    /// `(p(M), q(M))` for a Hermitian `M` and real polynomials.
    CommutingPolyPair,
    /// `(A, B)` with `A^2 = B A`.
    SquareCondition,
    /// Pairs whose range projectors commute with the other factor.
    RangeCommutingPair,
    /// Unitarily block-diagonal pairs built from the listed block kinds.
    BlockMix {
        kinds: Vec<BlockKind>,
    },
    /// Core pairs with `A^⊕ = B (AB)^#`.
    CoreEpPair,
    /// Core `A` and `B` with `R(A) ⊆ R(BAB)`.
    RangeInvariantPair,
    /// Core `A`, unitary `B` sharing an invariant splitting.
    UnitaryRightPair,
    /// Unitary `A`, invertible `B`.
    UnitaryLeftPair,
    /// Two independent index-1 tensors; the second may have its own shape.
    CorePair {
        second: Option<TensorShape>,
    },
    /// Square pairs where `A` has index up to the size of its nilpotent part.
    DrazinPair,
}

impl GeneratorFamily {
    pub fn name(&self) -> String {
        match self {
            Self::BlockMix { kinds } => format!("BlockMix{kinds:?}"),
            other => format!("{other:?}"),
        }
    }

    fn is_pair(&self) -> bool {
        !matches!(
            self,
            Self::GeneralComplex
                | Self::Index1 { .. }
                | Self::Hermitian
                | Self::HermitianIdempotent
                | Self::Ep
                | Self::Unitary
                | Self::Nilpotent { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub shape: TensorShape,
    pub family: GeneratorFamily,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(shape: TensorShape, family: GeneratorFamily, seed: u64) -> Self {
        Self {
            shape,
            family,
            seed,
        }
    }

    /// Same spec with the seed of trial `i` (see [`trial_seed`]).
    pub fn for_trial(&self, i: u64) -> Self {
        Self {
            seed: trial_seed(self.seed, i),
            ..self.clone()
        }
    }
}

/// Output of [`generate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Generated {
    Single(DenseTensor),
    Pair(DenseTensor, DenseTensor),
}

impl Generated {
    /// The pair, or `(t, t)` for single-tensor families.
    pub fn into_pair(self) -> (DenseTensor, DenseTensor) {
        match self {
            Self::Single(t) => (t.clone(), t),
            Self::Pair(a, b) => (a, b),
        }
    }

    /// The first tensor.
    pub fn first(self) -> DenseTensor {
        match self {
            Self::Single(t) | Self::Pair(t, _) => t,
        }
    }
}

/// Seed of trial `i`: one SplitMix64 step from `seed + i * φ`.
pub fn trial_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random source used by every generator.
pub struct Prng(Xoshiro256PlusPlus);

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.random::<f64>()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        self.0.random_range(lo..=hi)
    }

    pub fn coin(&mut self) -> bool {
        self.0.random::<bool>()
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal())
    }

    /// Complex number with modulus in `[0.5, 1.5]` and uniform phase.
    pub fn scalar(&mut self) -> Complex64 {
        let r = self.uniform(SIGMA_RANGE.0, SIGMA_RANGE.1);
        Complex64::from_polar(r, self.uniform(0.0, std::f64::consts::TAU))
    }

    fn gaussian(&mut self, rows: usize, cols: usize) -> CMatrix {
        let data: Vec<Complex64> = (0..rows * cols).map(|_| self.complex_normal()).collect();
        CMatrix::from_row_slice(rows, cols, &data)
    }

    /// Haar-like unitary from the QR factorization of a Gaussian matrix.
    fn unitary(&mut self, n: usize) -> CMatrix {
        if n == 0 {
            return CMatrix::zeros(0, 0);
        }
        let qr = self.gaussian(n, n).qr();
        let (mut q, r) = qr.unpack();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        q
    }

    /// `U diag(σ) V*` with σ drawn from `SIGMA_RANGE`, and its inverse.
    fn invertible(&mut self, n: usize) -> (CMatrix, CMatrix) {
        let u = self.unitary(n);
        let v = self.unitary(n);
        let s: Vec<f64> = (0..n)
            .map(|_| self.uniform(SIGMA_RANGE.0, SIGMA_RANGE.1))
            .collect();
        let mut us = u.clone();
        let mut vs = v.clone();
        for (j, &sj) in s.iter().enumerate() {
            us.column_mut(j).scale_mut(sj);
            vs.column_mut(j).scale_mut(1.0 / sj);
        }
        (&us * v.adjoint(), vs * u.adjoint())
    }
}

fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

fn eye(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn diag(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(values))
}

fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = zeros(n);
    let mut o = 0;
    for b in blocks {
        let k = b.nrows();
        m.view_mut((o, o), (k, k)).copy_from(b);
        o += k;
    }
    m
}

fn conj_by(u: &CMatrix, m: &CMatrix) -> CMatrix {
    u * m * u.adjoint()
}

fn cond_ok(m: &CMatrix) -> bool {
    if m.is_empty() {
        return true;
    }
    let Ok(sv) = crate::linalg::singular_values(m) else {
        return false;
    };
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min / max >= MIN_COND_RATIO
}

/// Random invertible block that passes the conditioning filter.
fn filtered_invertible(rng: &mut Prng, n: usize) -> Result<(CMatrix, CMatrix)> {
    for _ in 0..MAX_ATTEMPTS {
        let (m, inv) = rng.invertible(n);
        if cond_ok(&m) {
            return Ok((m, inv));
        }
    }
    Err(Error::GenerationExhausted {
        family: "invertible block".into(),
        attempts: MAX_ATTEMPTS,
    })
}

/// Index-1 matrix `S diag(T, 0) S^{-1}` of rank `r`.
fn core_matrix(rng: &mut Prng, n: usize, r: usize) -> Result<CMatrix> {
    let (s, s_inv) = filtered_invertible(rng, n)?;
    let (t, _) = filtered_invertible(rng, r)?;
    Ok(s * block_diag(&[t, zeros(n - r)]) * s_inv)
}

fn random_rank(rng: &mut Prng, n: usize) -> usize {
    if n > 1 {
        rng.int(1, n - 1)
    } else {
        1
    }
}

/// Core block `U [[T, X], [0, 0]] U*`, usually not EP.
fn core_block(rng: &mut Prng, k: usize) -> Result<CMatrix> {
    if k == 1 {
        return Ok(if rng.coin() {
            filtered_invertible(rng, 1)?.0
        } else {
            zeros(1)
        });
    }
    let r = rng.int(1, k - 1);
    let mut m = zeros(k);
    m.view_mut((0, 0), (r, r))
        .copy_from(&filtered_invertible(rng, r)?.0);
    m.view_mut((0, r), (r, k - r))
        .copy_from(&rng.gaussian(r, k - r));
    let u = rng.unitary(k);
    Ok(conj_by(&u, &m))
}

/// EP block `U diag(T, 0) U*`.
fn ep_block(rng: &mut Prng, k: usize) -> Result<CMatrix> {
    let r = rng.int(1, k);
    let (t, _) = filtered_invertible(rng, r)?;
    let u = rng.unitary(k);
    Ok(conj_by(&u, &block_diag(&[t, zeros(k - r)])))
}

/// Real eigenvalues `±[0.5, 1.5]` with about a third of them zero, at least one nonzero.
fn hermitian_spectrum(rng: &mut Prng, k: usize) -> Vec<f64> {
    let mut lam: Vec<f64> = (0..k)
        .map(|_| {
            let mag = rng.uniform(SIGMA_RANGE.0, SIGMA_RANGE.1);
            if rng.coin() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    for l in lam.iter_mut().skip(1) {
        if rng.uniform(0.0, 1.0) < 0.35 {
            *l = 0.0;
        }
    }
    lam
}

fn real_diag(values: &[f64]) -> CMatrix {
    diag(
        &values
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect::<Vec<_>>(),
    )
}

fn nilpotent_shift(k: usize) -> CMatrix {
    let mut m = zeros(k);
    for i in 0..k.saturating_sub(1) {
        m[(i, i + 1)] = Complex64::new(1.0, 0.0);
    }
    m
}

fn block_pair(rng: &mut Prng, kind: BlockKind, k: usize) -> Result<(CMatrix, CMatrix)> {
    let scal = |rng: &mut Prng| eye(k) * rng.scalar();
    Ok(match kind {
        BlockKind::CoreScalar => (core_block(rng, k)?, scal(rng)),
        BlockKind::ScalarCore => (scal(rng), core_block(rng, k)?),
        BlockKind::ZeroAny => (zeros(k), core_block(rng, k)?),
        BlockKind::AnyZero => (core_block(rng, k)?, zeros(k)),
        BlockKind::Adjoint => {
            let c = core_block(rng, k)?;
            let ca = c.adjoint();
            (c, ca)
        }
        BlockKind::EpScalar => (ep_block(rng, k)?, scal(rng)),
        BlockKind::ScalarEp => (scal(rng), ep_block(rng, k)?),
        BlockKind::ScalarInvertible => (scal(rng), filtered_invertible(rng, k)?.0),
        BlockKind::InvertibleScalar => (filtered_invertible(rng, k)?.0, scal(rng)),
        BlockKind::ZeroZero => (zeros(k), zeros(k)),
        BlockKind::HermitianPoly => {
            let lam = hermitian_spectrum(rng, k);
            let u = rng.unitary(k);
            let b: Vec<f64> = lam.iter().map(|&l| l * l * l + 2.0 * l).collect();
            (conj_by(&u, &real_diag(&lam)), conj_by(&u, &real_diag(&b)))
        }
    })
}

/// Split `n` into `parts` nonnegative sizes.
fn partition(rng: &mut Prng, n: usize, parts: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = (0..parts - 1).map(|_| rng.int(0, n)).collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        sizes.push(c - prev);
        prev = c;
    }
    sizes.push(n - prev);
    sizes
}

fn real_poly_values(rng: &mut Prng, lam: &[f64]) -> Option<Vec<f64>> {
    let c0 = if rng.coin() {
        0.0
    } else {
        rng.uniform(-1.0, 1.0)
    };
    let c1 = rng.uniform(-1.5, 1.5);
    let c2 = rng.uniform(-1.5, 1.5);
    let vals: Vec<f64> = lam.iter().map(|&l| c0 + l * (c1 + l * c2)).collect();
    // Keep every eigenvalue either exactly zero or clearly away from it.
    vals.iter()
        .all(|&v| v == 0.0 || v.abs() >= 0.1)
        .then_some(vals)
}

fn gen_matrices(
    rng: &mut Prng,
    n: usize,
    family: &GeneratorFamily,
) -> Result<(CMatrix, Option<CMatrix>)> {
    use GeneratorFamily as F;
    Ok(match family {
        F::GeneralComplex | F::CorePair { .. } => unreachable!("handled by generate"),
        F::Index1 { rank } => {
            let r = match rank {
                Some(r) if *r <= n => *r,
                Some(r) => {
                    return Err(Error::InvalidOption(format!(
                        "rank {r} exceeds dimension {n}"
                    )));
                }
                None => random_rank(rng, n),
            };
            (core_matrix(rng, n, r)?, None)
        }
        F::Hermitian => {
            let lam = hermitian_spectrum(rng, n);
            let u = rng.unitary(n);
            (conj_by(&u, &real_diag(&lam)), None)
        }
        F::HermitianIdempotent => {
            let r = random_rank(rng, n);
            let d: Vec<f64> = (0..n).map(|i| if i < r { 1.0 } else { 0.0 }).collect();
            let u = rng.unitary(n);
            (conj_by(&u, &real_diag(&d)), None)
        }
        F::Ep => {
            let r = random_rank(rng, n);
            let d: Vec<Complex64> = (0..n)
                .map(|i| {
                    if i < r {
                        rng.scalar()
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let u = rng.unitary(n);
            (conj_by(&u, &diag(&d)), None)
        }
        F::Unitary => (rng.unitary(n), None),
        F::Nilpotent { k } => {
            if *k == 0 || *k > n {
                return Err(Error::InvalidOption(format!(
                    "nilpotent index {k} needs 1 <= k <= {n}"
                )));
            }
            let mut blocks = vec![nilpotent_shift(*k)];
            let mut left = n - k;
            while left > 0 {
                let s = rng.int(1, left.min(*k));
                blocks.push(nilpotent_shift(s));
                left -= s;
            }
            let (s, s_inv) = filtered_invertible(rng, n)?;
            (s * block_diag(&blocks) * s_inv, None)
        }
        F::CommutingPolyPair => {
            let lam = hermitian_spectrum(rng, n);
            let u = rng.unitary(n);
            let mut out = None;
            for _ in 0..MAX_ATTEMPTS {
                if let (Some(p), Some(q)) =
                    (real_poly_values(rng, &lam), real_poly_values(rng, &lam))
                {
                    out = Some((
                        conj_by(&u, &real_diag(&p)),
                        Some(conj_by(&u, &real_diag(&q))),
                    ));
                    break;
                }
            }
            out.ok_or_else(|| Error::GenerationExhausted {
                family: family.name(),
                attempts: MAX_ATTEMPTS,
            })?
        }
        F::SquareCondition => {
            let r = random_rank(rng, n);
            let (s, s_inv) = filtered_invertible(rng, n)?;
            let (t, _) = filtered_invertible(rng, r)?;
            let mut b = zeros(n);
            b.view_mut((0, 0), (r, r)).copy_from(&t);
            b.view_mut((0, r), (r, n - r))
                .copy_from(&rng.gaussian(r, n - r));
            let w22 = if n - r > 1 {
                {
                    let k = random_rank(rng, n - r);
                    core_matrix(rng, n - r, k)?
                }
            } else {
                core_block(rng, n - r)?
            };
            b.view_mut((r, r), (n - r, n - r)).copy_from(&w22);
            let a = block_diag(&[t, zeros(n - r)]);
            (&s * a * &s_inv, Some(s * b * s_inv))
        }
        F::RangeCommutingPair => {
            let k = partition(rng, n, 4);
            let o: Vec<usize> = k
                .iter()
                .scan(0, |acc, &x| {
                    let s = *acc;
                    *acc += x;
                    Some(s)
                })
                .collect();
            let mut a = zeros(n);
            let mut b = zeros(n);
            a.view_mut((o[0], o[0]), (k[0], k[0]))
                .copy_from(&filtered_invertible(rng, k[0])?.0);
            a.view_mut((o[1], o[1]), (k[1], k[1]))
                .copy_from(&filtered_invertible(rng, k[1])?.0);
            a.view_mut((o[0], o[2]), (k[0], k[2]))
                .copy_from(&rng.gaussian(k[0], k[2]));
            a.view_mut((o[1], o[3]), (k[1], k[3]))
                .copy_from(&rng.gaussian(k[1], k[3]));
            b.view_mut((o[0], o[0]), (k[0], k[0]))
                .copy_from(&filtered_invertible(rng, k[0])?.0);
            b.view_mut((o[0], o[1]), (k[0], k[1]))
                .copy_from(&rng.gaussian(k[0], k[1]));
            b.view_mut((o[2], o[2]), (k[2], k[2]))
                .copy_from(&filtered_invertible(rng, k[2])?.0);
            b.view_mut((o[2], o[3]), (k[2], k[3]))
                .copy_from(&rng.gaussian(k[2], k[3]));
            let u = rng.unitary(n);
            (conj_by(&u, &a), Some(conj_by(&u, &b)))
        }
        F::BlockMix { kinds } => {
            if kinds.is_empty() {
                return Err(Error::InvalidOption(
                    "BlockMix needs at least one block kind".into(),
                ));
            }
            let parts = rng.int(1, 3.min(n));
            let sizes: Vec<usize> = partition(rng, n, parts)
                .into_iter()
                .filter(|&s| s > 0)
                .collect();
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for s in sizes {
                let kind = kinds[rng.int(0, kinds.len() - 1)];
                let (x, y) = block_pair(rng, kind, s)?;
                xs.push(x);
                ys.push(y);
            }
            let u = rng.unitary(n);
            (
                conj_by(&u, &block_diag(&xs)),
                Some(conj_by(&u, &block_diag(&ys))),
            )
        }
        F::CoreEpPair => {
            let r = random_rank(rng, n);
            let (a1, a1_inv) = filtered_invertible(rng, r)?;
            let x = rng.gaussian(r, n - r);
            let w = rng.unitary(r);
            let nd: Vec<Complex64> = (0..r).map(|_| rng.scalar()).collect();
            let normal = conj_by(&w, &diag(&nd));
            let (b2, _) = filtered_invertible(rng, n - r)?;
            let mut a = zeros(n);
            a.view_mut((0, 0), (r, r)).copy_from(&a1);
            a.view_mut((0, r), (r, n - r)).copy_from(&x);
            let mut b = zeros(n);
            b.view_mut((0, 0), (r, r)).copy_from(&(&a1_inv * normal));
            b.view_mut((0, r), (r, n - r))
                .copy_from(&(-(&a1_inv * &x * &b2)));
            b.view_mut((r, r), (n - r, n - r)).copy_from(&b2);
            let u = rng.unitary(n);
            (conj_by(&u, &a), Some(conj_by(&u, &b)))
        }
        F::RangeInvariantPair => {
            let r = random_rank(rng, n);
            let (s, s_inv) = filtered_invertible(rng, n)?;
            let (t, _) = filtered_invertible(rng, r)?;
            let mut b = rng.gaussian(n, n);
            b.view_mut((r, 0), (n - r, r))
                .fill(Complex64::new(0.0, 0.0));
            b.view_mut((0, 0), (r, r))
                .copy_from(&filtered_invertible(rng, r)?.0);
            if rng.coin() && n - r > 1 {
                let m = {
                    let k = random_rank(rng, n - r);
                    core_matrix(rng, n - r, k)?
                };
                b.view_mut((r, r), (n - r, n - r)).copy_from(&m);
            }
            let a = block_diag(&[t, zeros(n - r)]);
            (&s * a * &s_inv, Some(s * b * s_inv))
        }
        F::UnitaryRightPair => {
            let r = random_rank(rng, n);
            let mut a = zeros(n);
            a.view_mut((0, 0), (r, r))
                .copy_from(&filtered_invertible(rng, r)?.0);
            a.view_mut((0, r), (r, n - r))
                .copy_from(&rng.gaussian(r, n - r));
            let v = block_diag(&[rng.unitary(r), rng.unitary(n - r)]);
            let u = rng.unitary(n);
            (conj_by(&u, &a), Some(conj_by(&u, &v)))
        }
        F::UnitaryLeftPair => {
            let a = rng.unitary(n);
            (a, Some(filtered_invertible(rng, n)?.0))
        }
        F::DrazinPair => {
            let r = if n >= 2 { rng.int(0, n - 2) } else { 0 };
            let s_len = n - r;
            let (s, s_inv) = filtered_invertible(rng, n)?;
            let nil = nilpotent_shift(s_len);
            let (t, _) = filtered_invertible(rng, r)?;
            let a = &s * block_diag(&[t, nil.clone()]) * &s_inv;
            let b = match rng.int(0, 2) {
                0 => {
                    let (t2, _) = filtered_invertible(rng, r)?;
                    let tail = eye(s_len) * rng.scalar()
                        + &nil * rng.scalar()
                        + &nil * &nil * rng.scalar();
                    &s * block_diag(&[t2, tail]) * &s_inv
                }
                1 => rng.gaussian(n, n),
                _ => {
                    let (t2, _) = filtered_invertible(rng, r)?;
                    let tail = &nil * &nil + &nil;
                    &s * block_diag(&[t2, tail]) * &s_inv
                }
            };
            (a, Some(b))
        }
    })
}

/// Draws the tensor or pair described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    let mut rng = Prng::new(spec.seed);
    let shape = &spec.shape;
    let fold = |m: &CMatrix, s: &TensorShape| DenseTensor::dematricize(m, s.clone());
    match &spec.family {
        GeneratorFamily::GeneralComplex => {
            let m = rng.gaussian(shape.rows(), shape.cols());
            return Ok(Generated::Single(fold(&m, shape)?));
        }
        GeneratorFamily::CorePair { second } => {
            require_square(shape)?;
            let other = second.clone().unwrap_or_else(|| shape.clone());
            require_square(&other)?;
            let (n, m) = (shape.rows(), other.rows());
            let k = random_rank(&mut rng, n);
            let a = core_matrix(&mut rng, n, k)?;
            let k = random_rank(&mut rng, m);
            let b = core_matrix(&mut rng, m, k)?;
            return Ok(Generated::Pair(fold(&a, shape)?, fold(&b, &other)?));
        }
        _ => {}
    }
    require_square(shape)?;
    let (a, b) = gen_matrices(&mut rng, shape.rows(), &spec.family)?;
    debug_assert_eq!(b.is_some(), spec.family.is_pair());
    let a = fold(&a, shape)?;
    Ok(match b {
        Some(b) => Generated::Pair(a, fold(&b, shape)?),
        None => Generated::Single(a),
    })
}

fn require_square(shape: &TensorShape) -> Result<()> {
    if shape.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            op: "generate",
            shape: shape.clone(),
        })
    }
}

/// Generator families that exercise `law`: instances satisfying its
/// hypotheses first, followed by unstructured core pairs.
pub fn law_families(law: LawId) -> Vec<GeneratorFamily> {
    use BlockKind::*;
    use GeneratorFamily as F;
    let mix = |kinds: &[BlockKind]| F::BlockMix {
        kinds: kinds.to_vec(),
    };
    let commuting = [CoreScalar, ScalarCore, ZeroAny, AnyZero];
    let commuting_adj = [CoreScalar, ScalarCore, ZeroAny, AnyZero, Adjoint];
    let mut fams = match law {
        LawId::T3_1 => vec![F::RangeCommutingPair, mix(&commuting)],
        LawId::C3_2 => vec![F::CommutingPolyPair, mix(&commuting)],
        LawId::P3_NORMAL => vec![F::Ep, F::Index1 { rank: None }],
        LawId::T3_3 => vec![F::RangeCommutingPair, F::CommutingPolyPair],
        LawId::T3_4 => vec![F::RangeCommutingPair, mix(&commuting_adj)],
        LawId::T3_5 => vec![F::SquareCondition],
        LawId::T3_6 => vec![mix(&commuting_adj)],
        LawId::C3_10 => vec![mix(&commuting)],
        LawId::T3_11 => vec![mix(&[EpScalar, ScalarInvertible, ZeroAny])],
        LawId::C3_12 => vec![mix(&[
            HermitianPoly,
            InvertibleScalar,
            ScalarInvertible,
            ZeroZero,
        ])],
        LawId::T4_1 => vec![mix(&[
            CoreScalar, ScalarCore, ZeroAny, AnyZero, Adjoint, EpScalar, ScalarEp,
        ])],
        LawId::T4_2 => vec![
            F::CoreEpPair,
            mix(&[CoreScalar, ScalarCore, ZeroAny, AnyZero, Adjoint, EpScalar]),
        ],
        LawId::T4_3 => vec![F::RangeInvariantPair],
        LawId::T4_4 => vec![
            mix(&[
                EpScalar, ScalarEp, ZeroAny, AnyZero, CoreScalar, ScalarCore, Adjoint,
            ]),
            F::CommutingPolyPair,
        ],
        LawId::T_KRON => vec![F::CorePair { second: None }],
        LawId::T_UNITARY_A => vec![F::UnitaryLeftPair],
        LawId::T_UNITARY_B => vec![F::UnitaryRightPair],
    };
    if law != LawId::P3_NORMAL {
        fams.push(F::CorePair { second: None });
    }
    fams
}

/// Residuals of the core equations `(AX)* = AX`, `X A^2 = A`, `A X^2 = X`,
/// each as `‖lhs - rhs‖ / (1 + ‖lhs‖ + ‖rhs‖)`, computed with the
/// nested-loop product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreOracle {
    pub hermitian: f64,
    pub left: f64,
    pub right: f64,
    pub pass: bool,
}

impl CoreOracle {
    pub fn residuals(&self) -> [f64; 3] {
        [self.hermitian, self.left, self.right]
    }

    pub fn max(&self) -> f64 {
        self.hermitian.max(self.left).max(self.right)
    }
}

fn rel(lhs: &DenseTensor, rhs: &DenseTensor) -> Result<f64> {
    Ok(lhs.distance(rhs)? / (1.0 + lhs.norm_fro() + rhs.norm_fro()))
}

pub fn oracle_core_equations(a: &DenseTensor, x: &DenseTensor, tol: f64) -> Result<CoreOracle> {
    if !a.is_square() || a.shape() != x.shape() {
        return Err(Error::ShapeMismatch {
            op: "oracle_core_equations",
            left: a.shape().clone(),
            right: x.shape().clone(),
        });
    }
    let ax = oracle_naive_einstein(a, x)?;
    let a2 = oracle_naive_einstein(a, a)?;
    let xa2 = oracle_naive_einstein(x, &a2)?;
    let ax2 = oracle_naive_einstein(&ax, x)?;
    let hermitian = rel(&ax.conj_transpose(), &ax)?;
    let left = rel(&xa2, a)?;
    let right = rel(&ax2, x)?;
    Ok(CoreOracle {
        hermitian,
        left,
        right,
        pass: hermitian <= tol && left <= tol && right <= tol,
    })
}

/// Advances a row-major multi-index; returns false after the last one.
fn next_index(idx: &mut [usize], dims: &[usize]) -> bool {
    for p in (0..idx.len()).rev() {
        idx[p] += 1;
        if idx[p] < dims[p] {
            return true;
        }
        idx[p] = 0;
    }
    false
}

/// `t = i_N + Σ_{K<N} i_K Π_{L>K} I_L` (0-based).
fn linear(idx: &[usize], dims: &[usize]) -> usize {
    let mut t = 0;
    for (k, &i) in idx.iter().enumerate() {
        t += i * dims[k + 1..].iter().product::<usize>();
    }
    t
}

/// Einstein product as the literal nested sum over multi-indices.
pub fn oracle_naive_einstein(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    let (il, jl) = (a.shape().left_dims(), a.shape().right_dims());
    let (jl2, kl) = (b.shape().left_dims(), b.shape().right_dims());
    if jl != jl2 {
        return Err(Error::ShapeMismatch {
            op: "oracle_naive_einstein",
            left: a.shape().clone(),
            right: b.shape().clone(),
        });
    }
    let shape = TensorShape::new(il.to_vec(), kl.to_vec())?;
    let (na, nb) = (a.data(), b.data());
    let a_cols: usize = jl.iter().product();
    let b_cols: usize = kl.iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); shape.len()];
    let mut i = vec![0; il.len()];
    loop {
        let mut k = vec![0; kl.len()];
        loop {
            let mut j = vec![0; jl.len()];
            let mut acc = Complex64::new(0.0, 0.0);
            loop {
                acc += na[linear(&i, il) * a_cols + linear(&j, jl)]
                    * nb[linear(&j, jl) * b_cols + linear(&k, kl)];
                if !next_index(&mut j, jl) {
                    break;
                }
            }
            out[linear(&i, il) * b_cols + linear(&k, kl)] = acc;
            if !next_index(&mut k, kl) {
                break;
            }
        }
        if !next_index(&mut i, il) {
            break;
        }
    }
    DenseTensor::new(shape, out)
}

/// Tensors of the worked 2x3x2x3 example. Entries are listed as the
/// `2x3` slices `(a_{ij kl})_{ij}` for `(k, l)` in row-major order.
pub mod fixtures {
    use super::*;

    fn from_slices(slices: [[[f64; 3]; 2]; 6]) -> DenseTensor {
        let shape = TensorShape::square(&[2, 3]).expect("valid shape");
        let mut data = vec![0.0; 36];
        for (kl, slice) in slices.iter().enumerate() {
            for (i, row) in slice.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    data[(i * 3 + j) * 6 + kl] = v;
                }
            }
        }
        DenseTensor::from_real(shape, &data).expect("36 finite entries")
    }

    pub fn example_a() -> DenseTensor {
        from_slices([
            [[1.0, 0.0, 1.0], [0.0, 0.0, -1.0]],
            [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0]],
            [[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]],
            [[-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        ])
    }

    pub fn example_b() -> DenseTensor {
        from_slices([
            [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0]],
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        ])
    }

    /// Printed core inverse of `A`.
    pub fn printed_core_a() -> DenseTensor {
        from_slices([
            [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0]],
            [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            [[0.0, 0.0, 1.0], [1.0, -1.0, 1.0]],
            [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
            [[0.0, 0.0, -1.0], [0.0, 1.0, -1.0]],
            [[-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]],
        ])
    }

    /// Printed core inverse of `B` (contains the suspect `-8`).
    pub fn printed_core_b() -> DenseTensor {
        from_slices([
            [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            [[0.0, 0.0, 1.0], [0.0, 0.0, 0.0]],
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            [[0.0, 0.0, 0.0], [-8.0, 1.0, 0.0]],
            [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
        ])
    }

    /// Printed core inverse of `A * B` (contains the suspect `9` and `-8`).
    pub fn printed_core_ab() -> DenseTensor {
        from_slices([
            [[0.0, 0.0, 0.0], [0.0, 0.0, -1.0]],
            [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
            [[0.0, 0.0, 1.0], [9.0, -1.0, 1.0]],
            [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
            [[0.0, 0.0, -1.0], [-8.0, 1.0, -1.0]],
            [[-1.0, 0.0, 1.0], [9.0, -1.0, 0.0]],
        ])
    }
}
