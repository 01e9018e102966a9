//! Dense matrix kernels shared by the inverse routines.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type CMatrix = DMatrix<Complex64>;

/// Singular values closer than this factor to the rank threshold, on either
/// side, make the numerical rank ambiguous.
const AMBIGUITY_BAND: f64 = 100.0;

/// Thin SVD truncated at a rank threshold.
pub(crate) struct Truncated {
    /// Left singular vectors of the retained part (`rows x r`).
    pub u: CMatrix,
    /// Retained singular values, descending.
    pub s: Vec<f64>,
    /// Adjoint of the right singular vectors (`r x cols`).
    pub v_t: CMatrix,
    /// Largest singular value (0 for the zero matrix).
    pub sigma_max: f64,
    /// Threshold that separated retained from discarded values.
    pub threshold: f64,
    /// First discarded singular value, if any.
    pub first_dropped: Option<f64>,
}

impl Truncated {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// Full-rank factor `F = U_r`.
    pub fn left_factor(&self) -> CMatrix {
        self.u.clone()
    }

    /// Full-rank factor `G = S_r V_r*`, so that `M = F G`.
    pub fn right_factor(&self) -> CMatrix {
        let mut g = self.v_t.clone();
        for (i, &s) in self.s.iter().enumerate() {
            g.row_mut(i).scale_mut(s);
        }
        g
    }

    /// Moore-Penrose inverse `V_r S_r^{-1} U_r*`.
    pub fn pinv(&self) -> CMatrix {
        let mut vs = self.v_t.adjoint();
        for (j, &s) in self.s.iter().enumerate() {
            vs.column_mut(j).scale_mut(1.0 / s);
        }
        vs * self.u.adjoint()
    }

    /// Errors when a singular value sits inside the ambiguity band.
    pub fn check_unambiguous(&self) -> Result<()> {
        let thr = self.threshold;
        if thr <= 0.0 {
            return Ok(());
        }
        let near = |s: f64| s > thr / AMBIGUITY_BAND && s <= thr * AMBIGUITY_BAND;
        let last_kept = self.s.last().copied();
        for sigma in [last_kept, self.first_dropped].into_iter().flatten() {
            if near(sigma) {
                return Err(Error::RankAmbiguous {
                    sigma,
                    threshold: thr,
                });
            }
        }
        Ok(())
    }
}

/// SVD of `m` truncated at `tol_factor * dim * max(sigma_max, reference)`.
///
/// `dim` is normally `max(rows, cols)`; callers working on reduced matrices
/// pass the dimension of the original problem.
pub(crate) fn truncated_svd(
    m: &CMatrix,
    tol_factor: f64,
    dim: usize,
    reference: f64,
) -> Result<Truncated> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Truncated {
            u: CMatrix::zeros(rows, 0),
            s: Vec::new(),
            v_t: CMatrix::zeros(0, cols),
            sigma_max: 0.0,
            threshold: 0.0,
            first_dropped: None,
        });
    }
    let svd = thin_svd(m)?;
    let (u, sv, v_t) = (&svd.u, &svd.s, &svd.v_t);

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let sigma_max = sv[order[0]];
    let threshold = tol_factor * dim as f64 * sigma_max.max(reference);

    let kept: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| sv[i] > threshold)
        .collect();
    let first_dropped = order.get(kept.len()).map(|&i| sv[i]);
    let r = kept.len();

    let mut ur = CMatrix::zeros(rows, r);
    let mut vr = CMatrix::zeros(r, cols);
    for (dst, &src) in kept.iter().enumerate() {
        ur.set_column(dst, &u.column(src));
        vr.set_row(dst, &v_t.row(src));
    }
    Ok(Truncated {
        u: ur,
        s: kept.iter().map(|&i| sv[i]).collect(),
        v_t: vr,
        sigma_max,
        threshold,
        first_dropped,
    })
}

pub(crate) struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v_t: CMatrix,
}

/// Thin SVD `m = U diag(s) V*` (faer backend).
pub(crate) fn thin_svd(m: &CMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let fm = faer::Mat::<Complex64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = fm.thin_svd().map_err(|_| Error::NoConvergence)?;
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let k = rows.min(cols);
    Ok(Svd {
        u: CMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        s: (0..k).map(|i| s[i].re).collect(),
        v_t: CMatrix::from_fn(k, cols, |i, j| v[(j, i)].conj()),
    })
}

/// Singular values, descending.
pub(crate) fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(thin_svd(m)?.s)
}

/// Inverse of a small square matrix that is known to be nonsingular.
pub(crate) fn invert(m: &CMatrix) -> Result<CMatrix> {
    if m.is_empty() {
        return Ok(m.clone());
    }
    m.clone().try_inverse().ok_or(Error::RankAmbiguous {
        sigma: 0.0,
        threshold: 0.0,
    })
}

/// Cline's chain of full-rank factorizations `A = F1 G1`, `G_i F_i = F_{i+1} G_{i+1}`,
/// continued until `G_k F_k` is nonsingular (or zero).
pub(crate) struct Chain {
    pub fs: Vec<CMatrix>,
    pub gs: Vec<CMatrix>,
    /// `rank(A^1) ..= rank(A^{k+1})`.
    pub ranks: Vec<usize>,
    pub index: usize,
    /// `G_k F_k` when it is nonsingular; `None` for nilpotent input.
    pub core: Option<CMatrix>,
    /// Truncated SVD of `A` itself.
    pub first: Truncated,
}

pub(crate) fn cline_chain(a: &CMatrix, tol_factor: f64, reference: f64) -> Result<Chain> {
    let n = a.nrows();
    let first = truncated_svd(a, tol_factor, n, reference)?;
    first.check_unambiguous()?;
    let scale = first.sigma_max.max(reference);

    let mut ranks = vec![first.rank()];
    if first.rank() == 0 {
        ranks.push(0);
        return Ok(Chain {
            fs: Vec::new(),
            gs: Vec::new(),
            ranks,
            index: 1,
            core: None,
            first,
        });
    }
    let mut fs = vec![first.left_factor()];
    let mut gs = vec![first.right_factor()];
    loop {
        let m = gs.last().unwrap() * fs.last().unwrap();
        let r_prev = m.nrows();
        let t = truncated_svd(&m, tol_factor, n, scale)?;
        t.check_unambiguous()?;
        ranks.push(t.rank());
        if t.rank() == r_prev {
            let index = fs.len();
            return Ok(Chain {
                fs,
                gs,
                ranks,
                index,
                core: Some(m),
                first,
            });
        }
        if t.rank() == 0 {
            ranks.push(0);
            let index = fs.len() + 1;
            return Ok(Chain {
                fs,
                gs,
                ranks,
                index,
                core: None,
                first,
            });
        }
        fs.push(t.left_factor());
        gs.push(t.right_factor());
    }
}

impl Chain {
    /// Drazin inverse `F1..Fk (Gk Fk)^{-(k+1)} Gk..G1`.
    pub fn drazin(&self) -> Result<CMatrix> {
        let n = self.first.u.nrows();
        let Some(core) = &self.core else {
            return Ok(CMatrix::zeros(n, n));
        };
        let inv = invert(core)?;
        let mut mid = inv.clone();
        for _ in 0..self.index {
            mid = &mid * &inv;
        }
        let mut left = self.fs[0].clone();
        for f in &self.fs[1..] {
            left = &left * f;
        }
        let mut right = self.gs[0].clone();
        for g in &self.gs[1..] {
            right = g * &right;
        }
        Ok(left * mid * right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(
            rows,
            cols,
            &v.iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn factorization_reproduces_matrix() {
        let m = real(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        let t = truncated_svd(&m, 1e-12, 3, 0.0).unwrap();
        assert_eq!(t.rank(), 2);
        let back = t.left_factor() * t.right_factor();
        assert!((back - &m).norm() < 1e-12);
    }

    #[test]
    fn shift_chain_has_index_three() {
        let m = real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let c = cline_chain(&m, 1e-12, 0.0).unwrap();
        assert_eq!(c.ranks, vec![2, 1, 0, 0]);
        assert_eq!(c.index, 3);
        assert_eq!(c.drazin().unwrap(), CMatrix::zeros(3, 3));
    }

    #[test]
    fn identity_and_zero_have_index_one() {
        let i = CMatrix::identity(3, 3);
        assert_eq!(cline_chain(&i, 1e-12, 0.0).unwrap().index, 1);
        let z = CMatrix::zeros(3, 3);
        let c = cline_chain(&z, 1e-12, 0.0).unwrap();
        assert_eq!((c.index, c.ranks.clone()), (1, vec![0, 0]));
    }

    #[test]
    fn borderline_rank_is_reported() {
        let m = real(2, 2, &[1.0, 0.0, 0.0, 1e-11]);
        let err = cline_chain(&m, 1e-12, 0.0).err().unwrap();
        assert!(matches!(err, Error::RankAmbiguous { .. }));
    }
}
