//! Parametrized maximum-principle-preserving flux limiter.
//!
//! Per step the effective high order flux H is blended toward the first
//! order monotone flux h through per-interface parameters theta in [0, 1]:
//! H_tilde = theta*H + (1-theta)*h. Each cell contributes a pair of caps
//! (Lambda) per bound constraint so that for any theta inside the resulting
//! box the cell's updated average stays within [u_m, u_M]; the interface
//! theta is the minimum of the caps of its two neighbor cells. Decreasing
//! any theta is always safe, down to theta = 0 which reproduces the first
//! order update.
//!
//! 1D uses the four-case decoupling of the antidiffusive differences
//! F = H - h on the two interfaces of a cell. 2D gathers the four signed,
//! lambda-scaled edge differences of a cell and caps the positive group by
//! Gamma_max / (their sum), the negative group by Gamma_min / (their sum);
//! with two of the four entries zero this reduces exactly to the 1D four-case
//! rule.

use crate::grid::{Bc1d, Bc2d};
use crate::{Result, SolverError};

/// Division guard: |lambda*F| below this is treated as a zero flux difference.
const TINY: f64 = 1e-300;

/// Relative tolerance scale for margin/bound checks.
pub fn bound_tol(u_m: f64, u_max: f64) -> f64 {
    1e-12 * 1.0_f64.max(u_m.abs()).max(u_max.abs())
}

/// Per-cell distances of the first-order forward-Euler update from the two
/// bounds: gamma_max[j] = u_M - low_update_j >= 0 and
/// gamma_min[j] = u_m - low_update_j <= 0 whenever the first-order scheme is
/// bound-preserving at this time step.
///
/// Returns the margins plus a diagnostic flag: true when some margin has the
/// wrong sign beyond tolerance (the first-order MPP premise failed).
pub fn compute_margins(
    ubar: &[f64],
    h_low: &[f64],
    lambda: f64,
    u_m: f64,
    u_max: f64,
) -> (Vec<f64>, Vec<f64>, bool) {
    let n = ubar.len();
    debug_assert_eq!(h_low.len(), n + 1);
    let tol = bound_tol(u_m, u_max);
    let mut gamma_max = vec![0.0; n];
    let mut gamma_min = vec![0.0; n];
    let mut violated = false;
    for j in 0..n {
        let low = ubar[j] - lambda * (h_low[j + 1] - h_low[j]);
        gamma_max[j] = u_max - low;
        gamma_min[j] = u_m - low;
        if gamma_max[j] < -tol || gamma_min[j] > tol {
            violated = true;
        }
    }
    (gamma_max, gamma_min, violated)
}

/// Four-case decoupling of the upper-bound constraint
/// lambda*theta_l*F_l - lambda*theta_r*F_r <= gamma_max for one cell.
/// Returns the cap pair (Lambda_left, Lambda_right).
pub fn limit_max_1d(f_left: f64, f_right: f64, gamma_max: f64, lambda: f64) -> (f64, f64) {
    let gm = gamma_max.max(0.0);
    let fl = lambda * f_left;
    let fr = lambda * f_right;
    let lpos = fl > TINY;
    let rneg = fr < -TINY;
    match (lpos, rneg) {
        (false, false) => (1.0, 1.0),
        (false, true) => (1.0, (gm / -fr).min(1.0)),
        (true, false) => ((gm / fl).min(1.0), 1.0),
        (true, true) => {
            let cap = (gm / (fl - fr)).min(1.0);
            (cap, cap)
        }
    }
}

/// Mirrored four-case decoupling of the lower-bound constraint
/// lambda*theta_l*F_l - lambda*theta_r*F_r >= gamma_min.
pub fn limit_min_1d(f_left: f64, f_right: f64, gamma_min: f64, lambda: f64) -> (f64, f64) {
    let gm = gamma_min.min(0.0);
    let fl = lambda * f_left;
    let fr = lambda * f_right;
    let lneg = fl < -TINY;
    let rpos = fr > TINY;
    match (lneg, rpos) {
        (false, false) => (1.0, 1.0),
        (false, true) => (1.0, (gm / -fr).min(1.0)),
        (true, false) => ((gm / fl).min(1.0), 1.0),
        (true, true) => {
            let cap = (gm / (fl - fr)).min(1.0);
            (cap, cap)
        }
    }
}

/// Interface limiter parameters from the per-cell cap pairs:
/// theta at interface i is the smallest of the right caps of cell i-1 and
/// the left caps of cell i (both constraints). Out-of-range cells impose no
/// cap for Dirichlet sides and wrap for periodic ones.
pub fn combine_theta_1d(lam_max: &[(f64, f64)], lam_min: &[(f64, f64)], bc: Bc1d) -> Vec<f64> {
    let n = lam_max.len();
    debug_assert_eq!(lam_min.len(), n);
    let mut theta = vec![1.0; n + 1];
    for (i, th) in theta.iter_mut().enumerate() {
        let mut t: f64 = 1.0;
        // right caps of the cell left of interface i
        if i > 0 {
            t = t.min(lam_max[i - 1].1).min(lam_min[i - 1].1);
        } else if bc.is_periodic() {
            t = t.min(lam_max[n - 1].1).min(lam_min[n - 1].1);
        }
        // left caps of the cell right of interface i
        if i < n {
            t = t.min(lam_max[i].0).min(lam_min[i].0);
        } else if bc.is_periodic() {
            t = t.min(lam_max[0].0).min(lam_min[0].0);
        }
        *th = t.clamp(0.0, 1.0);
    }
    theta
}

/// Full 1D limiter: from the effective and first-order interface fluxes to
/// theta per interface.
pub fn theta_1d(
    ubar: &[f64],
    h_high: &[f64],
    h_low: &[f64],
    lambda: f64,
    u_m: f64,
    u_max: f64,
    bc: Bc1d,
) -> (Vec<f64>, bool) {
    let n = ubar.len();
    let (gamma_max, gamma_min, violated) = compute_margins(ubar, h_low, lambda, u_m, u_max);
    let mut lam_max = Vec::with_capacity(n);
    let mut lam_min = Vec::with_capacity(n);
    for j in 0..n {
        let fl = h_high[j] - h_low[j];
        let fr = h_high[j + 1] - h_low[j + 1];
        lam_max.push(limit_max_1d(fl, fr, gamma_max[j], lambda));
        lam_min.push(limit_min_1d(fl, fr, gamma_min[j], lambda));
    }
    (combine_theta_1d(&lam_max, &lam_min, bc), violated)
}

/// Limited conservative update: H_tilde = theta*H + (1-theta)*h, then
/// ubar_j - lambda*(H_tilde_{j+1} - H_tilde_j). Fails hard if the result
/// leaves [u_m, u_M] beyond the rounding tolerance.
pub fn apply_limited_update(
    ubar: &[f64],
    h_high: &[f64],
    h_low: &[f64],
    theta: &[f64],
    lambda: f64,
    u_m: f64,
    u_max: f64,
) -> Result<Vec<f64>> {
    let n = ubar.len();
    debug_assert_eq!(h_high.len(), n + 1);
    debug_assert_eq!(theta.len(), n + 1);
    let blend = |i: usize| -> f64 { theta[i] * h_high[i] + (1.0 - theta[i]) * h_low[i] };
    let tol = bound_tol(u_m, u_max);
    let mut out = vec![0.0; n];
    let mut prev = blend(0);
    for j in 0..n {
        let next = blend(j + 1);
        let v = ubar[j] - lambda * (next - prev);
        if v < u_m - tol || v > u_max + tol {
            return Err(SolverError::BoundViolation(format!(
                "cell {j}: {v} outside [{u_m}, {u_max}]"
            )));
        }
        out[j] = v;
        prev = next;
    }
    Ok(out)
}

/// The four signed, lambda-scaled antidiffusive differences of one 2D cell,
/// ordered left, right, down, up. Positive entries push the cell upward.
#[derive(Debug, Clone, Copy)]
pub struct CellDiffs {
    pub left: f64,
    pub right: f64,
    pub down: f64,
    pub up: f64,
}

/// Per-cell caps for the 2D constraints: positive entries share
/// gamma_max / (positive sum), negative entries share gamma_min /
/// (negative sum), everything else is uncapped.
pub fn limit_cell_2d(d: CellDiffs, gamma_max: f64, gamma_min: f64) -> [f64; 4] {
    let gm = gamma_max.max(0.0);
    let gmin = gamma_min.min(0.0);
    let vals = [d.left, d.right, d.down, d.up];
    let pos_sum: f64 = vals.iter().filter(|v| **v > TINY).sum();
    let neg_sum: f64 = vals.iter().filter(|v| **v < -TINY).sum();
    let mut caps = [1.0; 4];
    for (c, v) in caps.iter_mut().zip(vals.iter()) {
        if *v > TINY {
            *c = (gm / pos_sum).min(1.0);
        } else if *v < -TINY {
            *c = (gmin / neg_sum).min(1.0);
        }
    }
    caps
}

/// 2D limiter output: theta on x-edges and y-edges, laid out like
/// [`crate::flux::EdgeFluxes2d`].
pub struct Theta2d {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Full 2D limiter. `hx/hy` hold per-edge effective high order fluxes,
/// `lx/ly` the per-edge first order fluxes; lambda_x = dt/dx,
/// lambda_y = dt/dy.
#[allow(clippy::too_many_arguments)]
pub fn theta_2d(
    ubar: &[f64],
    nx: usize,
    ny: usize,
    hx: &[f64],
    hy: &[f64],
    lx: &[f64],
    ly: &[f64],
    lambda_x: f64,
    lambda_y: f64,
    u_m: f64,
    u_max: f64,
    bc: Bc2d,
) -> (Theta2d, bool) {
    let tol = bound_tol(u_m, u_max);
    let fxd = |i: usize, j: usize| hx[j * (nx + 1) + i] - lx[j * (nx + 1) + i];
    let fyd = |i: usize, j: usize| hy[j * nx + i] - ly[j * nx + i];
    // per-cell caps, slots left/right/down/up
    let mut caps = vec![[1.0f64; 4]; nx * ny];
    let mut violated = false;
    for j in 0..ny {
        for i in 0..nx {
            let low = ubar[j * nx + i]
                - lambda_x * (lx[j * (nx + 1) + i + 1] - lx[j * (nx + 1) + i])
                - lambda_y * (ly[(j + 1) * nx + i] - ly[j * nx + i]);
            let gamma_max = u_max - low;
            let gamma_min = u_m - low;
            if gamma_max < -tol || gamma_min > tol {
                violated = true;
            }
            let d = CellDiffs {
                left: lambda_x * fxd(i, j),
                right: -lambda_x * fxd(i + 1, j),
                down: lambda_y * fyd(i, j),
                up: -lambda_y * fyd(i, j + 1),
            };
            caps[j * nx + i] = limit_cell_2d(d, gamma_max, gamma_min);
        }
    }
    let periodic_x = bc.x.is_periodic();
    let periodic_y = bc.y.is_periodic();
    let cap = |i: usize, j: usize, slot: usize| caps[j * nx + i][slot];
    let mut theta = Theta2d {
        x: vec![1.0; (nx + 1) * ny],
        y: vec![1.0; nx * (ny + 1)],
    };
    for j in 0..ny {
        for i in 0..=nx {
            let mut t: f64 = 1.0;
            if i > 0 {
                t = t.min(cap(i - 1, j, 1)); // right slot of the left cell
            } else if periodic_x {
                t = t.min(cap(nx - 1, j, 1));
            }
            if i < nx {
                t = t.min(cap(i, j, 0)); // left slot of the right cell
            } else if periodic_x {
                t = t.min(cap(0, j, 0));
            }
            theta.x[j * (nx + 1) + i] = t.clamp(0.0, 1.0);
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            let mut t: f64 = 1.0;
            if j > 0 {
                t = t.min(cap(i, j - 1, 3)); // up slot of the lower cell
            } else if periodic_y {
                t = t.min(cap(i, ny - 1, 3));
            }
            if j < ny {
                t = t.min(cap(i, j, 2)); // down slot of the upper cell
            } else if periodic_y {
                t = t.min(cap(i, 0, 2));
            }
            theta.y[j * nx + i] = t.clamp(0.0, 1.0);
        }
    }
    (theta, violated)
}

/// Limited conservative 2D update with the hard bound check.
#[allow(clippy::too_many_arguments)]
pub fn apply_limited_update_2d(
    ubar: &[f64],
    nx: usize,
    ny: usize,
    hx: &[f64],
    hy: &[f64],
    lx: &[f64],
    ly: &[f64],
    theta: &Theta2d,
    lambda_x: f64,
    lambda_y: f64,
    u_m: f64,
    u_max: f64,
) -> Result<Vec<f64>> {
    let tol = bound_tol(u_m, u_max);
    let bx = |i: usize, j: usize| {
        let id = j * (nx + 1) + i;
        theta.x[id] * hx[id] + (1.0 - theta.x[id]) * lx[id]
    };
    let by = |i: usize, j: usize| {
        let id = j * nx + i;
        theta.y[id] * hy[id] + (1.0 - theta.y[id]) * ly[id]
    };
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let v = ubar[j * nx + i]
                - lambda_x * (bx(i + 1, j) - bx(i, j))
                - lambda_y * (by(i, j + 1) - by(i, j));
            if v < u_m - tol || v > u_max + tol {
                return Err(SolverError::BoundViolation(format!(
                    "cell ({i},{j}): {v} outside [{u_m}, {u_max}]"
                )));
            }
            out[j * nx + i] = v;
        }
    }
    Ok(out)
}

/// Debug-mode safety check: the decoupled cell inequalities hold for the
/// chosen theta. Called by the integrator after every limited step when
/// debug assertions are on.
pub fn check_cell_inequalities_1d(
    ubar: &[f64],
    h_high: &[f64],
    h_low: &[f64],
    theta: &[f64],
    lambda: f64,
    u_m: f64,
    u_max: f64,
) -> bool {
    let n = ubar.len();
    let (gamma_max, gamma_min, _) = compute_margins(ubar, h_low, lambda, u_m, u_max);
    let tol = 10.0 * bound_tol(u_m, u_max);
    for j in 0..n {
        let fl = h_high[j] - h_low[j];
        let fr = h_high[j + 1] - h_low[j + 1];
        let lhs = lambda * theta[j] * fl - lambda * theta[j + 1] * fr;
        if lhs > gamma_max[j].max(0.0) + tol || lhs < gamma_min[j].min(0.0) - tol {
            return false;
        }
    }
    true
}
