//! One-dimensional building blocks shared by the mean-field solvers.

use crate::{Error, Result};

/// Reusable buffers for [`advect_row`].
#[derive(Debug, Default, Clone)]
pub(crate) struct AdvectScratch {
    low: Vec<f64>,
    anti: Vec<f64>,
    ratio: Vec<f64>,
}

/// One conservative Lax-Wendroff step for `f_t + (c f)_s = 0` on a row with
/// zero ghost cells on both sides.
///
/// `cell` holds Courant numbers `c dt / h` at cell centers and `face` at the
/// `n + 1` faces. Antidiffusive fluxes are limited (flux-corrected transport
/// against the donor-cell solution) so the result stays nonnegative when the
/// input is nonnegative and every `|cell| <= 1`. Where the row is well above
/// zero the limiter is inactive and the update is plain Lax-Wendroff.
pub(crate) fn advect_row(f: &mut [f64], cell: &[f64], face: &[f64], scratch: &mut AdvectScratch) {
    let n = f.len();
    debug_assert_eq!(cell.len(), n);
    debug_assert_eq!(face.len(), n + 1);
    let AdvectScratch { low, anti, ratio } = scratch;
    low.clear();
    low.resize(n + 1, 0.0);
    anti.clear();
    anti.resize(n + 1, 0.0);

    let q = |j: usize| {
        if j == 0 || j > n {
            0.0
        } else {
            cell[j - 1] * f[j - 1]
        }
    };
    // face k sits between cell k-1 and cell k (1-based ghosts at 0 and n+1)
    for k in 0..=n {
        let (ql, qr) = (q(k), q(k + 1));
        let high = 0.5 * (ql + qr) - 0.5 * face[k] * (qr - ql);
        let donor_left = if k >= 1 {
            cell[k - 1].max(0.0) * f[k - 1]
        } else {
            0.0
        };
        let donor_right = if k < n { cell[k].min(0.0) * f[k] } else { 0.0 };
        low[k] = donor_left + donor_right;
        anti[k] = high - low[k];
    }

    ratio.clear();
    ratio.resize(n, 0.0);
    for j in 0..n {
        let low_value = f[j] - (low[j + 1] - low[j]);
        let outflow = anti[j + 1].max(0.0) + (-anti[j]).max(0.0);
        ratio[j] = if outflow > 0.0 {
            (low_value.max(0.0) / outflow).min(1.0)
        } else {
            1.0
        };
        f[j] = low_value;
    }
    // donor of a positive flux through face k is cell k-1, else cell k
    let limited = |k: usize, a: f64| {
        let donor = if a >= 0.0 {
            k.checked_sub(1)
        } else {
            (k < n).then_some(k)
        };
        donor.map_or(0.0, |d| ratio[d] * a)
    };
    let mut left = limited(0, anti[0]);
    for j in 0..n {
        let right = limited(j + 1, anti[j + 1]);
        f[j] -= right - left;
        left = right;
    }
}

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored. `rhs` receives the solution.
pub(crate) fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    work: &mut Vec<f64>,
) -> Result<()> {
    let n = rhs.len();
    work.clear();
    work.resize(n, 0.0);
    let mut pivot = diag[0];
    check_pivot(0, pivot)?;
    rhs[0] /= pivot;
    for i in 1..n {
        work[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i] * work[i];
        check_pivot(i, pivot)?;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= work[i + 1] * rhs[i + 1];
    }
    Ok(())
}

fn check_pivot(row: usize, pivot: f64) -> Result<()> {
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularSystem { row, pivot });
    }
    Ok(())
}
