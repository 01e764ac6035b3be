//! Interface-value and diffusion-flux reconstructions from cell averages.
//!
//! Convection reconstruction: a (2k+1)-degree-exact polynomial is implied by
//! the cell averages of a (2k+1)-cell stencil through its primitive function
//! V(x) = int u, which is known exactly at the 2k+2 stencil interfaces.
//! Differentiating the Lagrange interpolant of V yields the reconstruction
//! coefficients for a point value anywhere in the center cell; evaluating at
//! the right interface gives u^- (u^+ follows by mirror symmetry). Orders
//! 5/7/9 correspond to k = 2/3/4. All coefficients are generated at startup
//! from this primitive-function route.
//!
//! Diffusion reconstruction keeps a compact four-cell stencil in two stages:
//! cell averages -> cell-center point values (exact for cubics), then the
//! derivative of the interpolant of a(u) at the interface. For a(u) = u the
//! composition collapses to the five-point central-difference stencil
//! (ubar_{j-1} - 15 ubar_j + 15 ubar_{j+1} - ubar_{j+2}) / (12 dx).
//!
//! Nonlinear WENO-JS weights (epsilon = 1e-6, power 2) are available for
//! k = 2 as an opt-in alternative to the linear weights used everywhere by
//! default.

use crate::{Result, SolverError};

/// Which weights the convection reconstruction uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Optimal linear weights (the default everywhere).
    Linear,
    /// Jiang-Shu nonlinear weights; only available for k = 2.
    WenoJs,
}

/// Reconstruction selection: stencil half-width k (order 2k+1) and weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReconScheme {
    pub k: usize,
    pub weight_mode: WeightMode,
}

impl ReconScheme {
    pub fn new(k: usize, weight_mode: WeightMode) -> Result<Self> {
        if !(2..=4).contains(&k) {
            return Err(SolverError::UnsupportedOrder(k));
        }
        if weight_mode == WeightMode::WenoJs && k != 2 {
            return Err(SolverError::InvalidConfig(
                "WENO weights are only available at order 5 (k = 2)".into(),
            ));
        }
        Ok(Self { k, weight_mode })
    }

    pub fn order(&self) -> usize {
        2 * self.k + 1
    }

    /// Gauss nodes per cell edge used by the 2D quadrature fluxes.
    pub fn gauss_nodes(&self) -> usize {
        self.k + 1
    }
}

/// Derivative of the i-th Lagrange basis polynomial on `nodes`, at x.
fn lagrange_derivative(nodes: &[f64], i: usize, x: f64) -> f64 {
    let mut denom = 1.0;
    for (m, ym) in nodes.iter().enumerate() {
        if m != i {
            denom *= nodes[i] - ym;
        }
    }
    let mut num = 0.0;
    for q in 0..nodes.len() {
        if q == i {
            continue;
        }
        let mut term = 1.0;
        for (m, ym) in nodes.iter().enumerate() {
            if m != i && m != q {
                term *= x - ym;
            }
        }
        num += term;
    }
    num / denom
}

/// Coefficients c_l with P(xi) = sum_l c_l ubar_{j+l-k} for the stencil
/// {j-k, ..., j+k}, where xi is measured from the center of cell j in units
/// of dx (so the right interface is xi = 1/2).
pub fn point_value_coeffs(k: usize, xi: f64) -> Vec<f64> {
    let m = 2 * k + 1;
    // stencil interfaces in cell-width units
    let nodes: Vec<f64> = (0..=m).map(|i| i as f64 - k as f64 - 0.5).collect();
    let dl: Vec<f64> = (0..=m)
        .map(|i| lagrange_derivative(&nodes, i, xi))
        .collect();
    // V(y_i) = V(y_0) + sum_{l < i} ubar_l; the V(y_0) term drops because the
    // Lagrange derivatives of a constant sum to zero.
    let mut coeffs = vec![0.0; m];
    for (l, c) in coeffs.iter_mut().enumerate() {
        *c = dl[l + 1..].iter().sum();
    }
    coeffs
}

/// Precomputed linear-weight reconstruction coefficients for one k.
#[derive(Debug, Clone)]
pub struct ReconTable {
    pub k: usize,
    /// u^- at the right interface of the stencil's center cell.
    pub minus: Vec<f64>,
    /// u^+ at the left interface of the stencil's center cell.
    pub plus: Vec<f64>,
}

impl ReconTable {
    pub fn new(k: usize) -> Result<Self> {
        if !(2..=4).contains(&k) {
            return Err(SolverError::UnsupportedOrder(k));
        }
        Ok(Self {
            k,
            minus: point_value_coeffs(k, 0.5),
            plus: point_value_coeffs(k, -0.5),
        })
    }
}

/// u^- at the right interface of the center cell of `stencil` (length 2k+1).
pub fn recon_left_value(stencil: &[f64], k: usize) -> Result<f64> {
    if stencil.len() != 2 * k + 1 {
        return Err(SolverError::UnsupportedOrder(k));
    }
    let table = ReconTable::new(k)?;
    Ok(dot(&table.minus, stencil))
}

#[inline]
pub(crate) fn dot(c: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(c.len(), v.len());
    c.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

/// WENO-JS epsilon guarding the smoothness indicators.
pub const WENO_EPS: f64 = 1e-6;

/// u^- at the right interface from a 5-cell stencil with Jiang-Shu weights.
pub fn recon_weno5_left_value(stencil: &[f64]) -> Result<f64> {
    if stencil.len() != 5 {
        return Err(SolverError::UnsupportedOrder(stencil.len() / 2));
    }
    let [m2, m1, c0, p1, p2] = [stencil[0], stencil[1], stencil[2], stencil[3], stencil[4]];
    let s0 = (2.0 * m2 - 7.0 * m1 + 11.0 * c0) / 6.0;
    let s1 = (-m1 + 5.0 * c0 + 2.0 * p1) / 6.0;
    let s2 = (2.0 * c0 + 5.0 * p1 - p2) / 6.0;
    let b0 = 13.0 / 12.0 * (m2 - 2.0 * m1 + c0).powi(2) + 0.25 * (m2 - 4.0 * m1 + 3.0 * c0).powi(2);
    let b1 = 13.0 / 12.0 * (m1 - 2.0 * c0 + p1).powi(2) + 0.25 * (m1 - p1).powi(2);
    let b2 = 13.0 / 12.0 * (c0 - 2.0 * p1 + p2).powi(2) + 0.25 * (3.0 * c0 - 4.0 * p1 + p2).powi(2);
    let a0 = 0.1 / (WENO_EPS + b0).powi(2);
    let a1 = 0.6 / (WENO_EPS + b1).powi(2);
    let a2 = 0.3 / (WENO_EPS + b2).powi(2);
    let s = a0 + a1 + a2;
    Ok((a0 * s0 + a1 * s1 + a2 * s2) / s)
}

/// Both interface value arrays over interfaces 0..=n.
///
/// `ext` holds the field extended by at least k+1 ghost cells per side;
/// `ghost` is the actual extension width. Interface i separates cells i-1
/// and i: u_minus[i] is reconstructed from the stencil centered on cell i-1,
/// u_plus[i] from the stencil centered on cell i.
pub fn interface_values(
    ext: &[f64],
    n: usize,
    ghost: usize,
    scheme: ReconScheme,
    table: &ReconTable,
) -> (Vec<f64>, Vec<f64>) {
    let k = scheme.k;
    debug_assert!(ghost >= k + 1);
    debug_assert!(ext.len() >= n + 2 * ghost);
    let mut um = vec![0.0; n + 1];
    let mut up = vec![0.0; n + 1];
    for i in 0..=n {
        let left_center = ghost + i - 1; // cell i-1 in extended coords
        let lw = &ext[left_center - k..=left_center + k];
        let rw = &ext[left_center + 1 - k..=left_center + 1 + k];
        match scheme.weight_mode {
            WeightMode::Linear => {
                um[i] = dot(&table.minus, lw);
                up[i] = dot(&table.plus, rw);
            }
            WeightMode::WenoJs => {
                um[i] = recon_weno5_left_value(lw).expect("stencil width checked");
                let rev: Vec<f64> = rw.iter().rev().cloned().collect();
                up[i] = recon_weno5_left_value(&rev).expect("stencil width checked");
            }
        }
    }
    (um, up)
}

/// Point values at local coordinate xi of every cell, from symmetric
/// (2k+1)-cell stencils. Used by the transverse stage of the 2D
/// reconstruction; needs ghost >= k.
pub fn interior_values(ext: &[f64], n: usize, ghost: usize, k: usize, xi: f64) -> Vec<f64> {
    debug_assert!(ghost >= k);
    let coeffs = point_value_coeffs(k, xi);
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let c = ghost + j;
        *o = dot(&coeffs, &ext[c - k..=c + k]);
    }
    out
}

/// Cell-center point values (u_{j-1}, u_j, u_{j+1}, u_{j+2}) from the four
/// cell averages around interface j+1/2; exact for cell averages of cubics.
///
/// Each row is written in difference form around its own cell average (the
/// coefficients of every row sum to one), so constant data comes back
/// bit-exactly.
pub fn r1_point_values(ubar: &[f64; 4]) -> [f64; 4] {
    let [a, b, c, d] = *ubar;
    [
        a + 5.0 / 24.0 * (b - a) - 1.0 / 6.0 * (c - a) + 1.0 / 24.0 * (d - a),
        b - 1.0 / 24.0 * (a - b) - 1.0 / 24.0 * (c - b),
        c - 1.0 / 24.0 * (b - c) - 1.0 / 24.0 * (d - c),
        d + 1.0 / 24.0 * (a - d) - 1.0 / 6.0 * (b - d) + 5.0 / 24.0 * (c - d),
    ]
}

/// Fourth order interface derivative of the interpolant through the four
/// point values a(u_{j-1}), ..., a(u_{j+2}); the 1/dx factor makes it an
/// approximation of d/dx a(u) at x_{j+1/2} on any grid. Assembled from
/// differences (the coefficients sum to zero), so constants give exactly 0.
pub fn r2_diffusion_flux(a_vals: &[f64; 4], dx: f64) -> Result<f64> {
    if dx <= 0.0 {
        return Err(SolverError::InvalidGrid(format!("dx = {dx}")));
    }
    let [q0, q1, q2, q3] = *a_vals;
    Ok(((q0 - q3) / 24.0 + 9.0 / 8.0 * (q2 - q1)) / dx)
}

/// The composed compact diffusion flux at x_{j+1/2} from the four cell
/// averages (ubar_{j-1}, ..., ubar_{j+2}).
pub fn compact_diffusion_flux(
    ubar_window: &[f64; 4],
    a: &dyn Fn(f64) -> f64,
    dx: f64,
) -> Result<f64> {
    let u = r1_point_values(ubar_window);
    let av = [a(u[0]), a(u[1]), a(u[2]), a(u[3])];
    r2_diffusion_flux(&av, dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{coefficient_oracle, OracleTarget};
    use proptest::prelude::*;

    fn cell_averages_of(p: &dyn Fn(f64) -> f64, centers: &[f64], quad: usize) -> Vec<f64> {
        centers
            .iter()
            .map(|c| crate::quad::average(p, c - 0.5, c + 0.5, quad))
            .collect()
    }

    #[test]
    fn left_value_constant_consistency() {
        for k in 2..=4 {
            let stencil = vec![3.5; 2 * k + 1];
            let v = recon_left_value(&stencil, k).unwrap();
            assert!((v - 3.5).abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn left_value_linear_k2() {
        let v = recon_left_value(&[-2.0, -1.0, 0.0, 1.0, 2.0], 2).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn left_value_quartic_matches_oracle() {
        // cell averages of x^4 on a unit grid centered at 0
        let ubar = cell_averages_of(&|x| x.powi(4), &[-2.0, -1.0, 0.0, 1.0, 2.0], 5);
        let v = recon_left_value(&ubar, 2).unwrap();
        assert!((v - 0.0625).abs() < 1e-13, "{v}");
        // independent route: solve the 5x5 exactness system numerically
        let c = coefficient_oracle(&[-2, -1, 0, 1, 2], OracleTarget::PointValue(0.5)).unwrap();
        let via_oracle: f64 = c.iter().zip(ubar.iter()).map(|(a, b)| a * b).sum();
        assert!((v - via_oracle).abs() < 1e-13);
    }

    #[test]
    fn generated_coeffs_match_oracle_all_orders() {
        for k in 2..=4usize {
            let table = ReconTable::new(k).unwrap();
            let offsets: Vec<i64> = (-(k as i64)..=k as i64).collect();
            let minus = coefficient_oracle(&offsets, OracleTarget::PointValue(0.5)).unwrap();
            let plus = coefficient_oracle(&offsets, OracleTarget::PointValue(-0.5)).unwrap();
            for l in 0..2 * k + 1 {
                assert!((table.minus[l] - minus[l]).abs() < 1e-12, "k={k} l={l}");
                assert!((table.plus[l] - plus[l]).abs() < 1e-12, "k={k} l={l}");
            }
        }
    }

    #[test]
    fn value_coeffs_sum_to_one_derivative_to_zero() {
        for k in 2..=4usize {
            for xi in [-0.5, -0.2, 0.0, 0.33, 0.5] {
                let s: f64 = point_value_coeffs(k, xi).iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "k={k} xi={xi}: {s}");
            }
        }
        // R2's coefficient set sums to zero (derivative consistency):
        // the difference form makes it structural
        assert_eq!(r2_diffusion_flux(&[3.7; 4], 0.25).unwrap(), 0.0);
    }

    #[test]
    fn mirror_symmetry_of_biased_coeffs() {
        for k in 2..=4usize {
            let t = ReconTable::new(k).unwrap();
            let rev: Vec<f64> = t.minus.iter().rev().cloned().collect();
            for (a, b) in t.plus.iter().zip(rev.iter()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn polynomial_exactness_order7_order9() {
        // k = 3 must be exact for degree-6 data, k = 4 for degree-8.
        for (k, deg) in [(3usize, 6i32), (4, 8)] {
            let centers: Vec<f64> = (-(k as i64)..=k as i64).map(|o| o as f64).collect();
            let ubar = cell_averages_of(&|x| x.powi(deg), &centers, 8);
            let v = recon_left_value(&ubar, k).unwrap();
            let exact = 0.5f64.powi(deg);
            let scale = ubar.iter().fold(1.0_f64, |m, u| m.max(u.abs()));
            assert!((v - exact).abs() < 1e-13 * scale, "k={k}: {v} vs {exact}");
        }
    }

    #[test]
    fn weno5_constant_and_smooth_agreement() {
        assert_eq!(recon_weno5_left_value(&[2.0; 5]).unwrap(), 2.0);
        // smooth monotone data: cell averages of sin on a dx = 0.1 grid
        let dx = 0.1;
        let centers: Vec<f64> = (0..5).map(|i| 0.3 + i as f64 * dx).collect();
        let ubar: Vec<f64> = centers
            .iter()
            .map(|c| ((c + dx / 2.0).cos() - (c - dx / 2.0).cos()) / -dx)
            .collect();
        let w = recon_weno5_left_value(&ubar).unwrap();
        let l = recon_left_value(&ubar, 2).unwrap();
        assert!((w - l).abs() < 1e-6, "weno {w} vs linear {l}");
    }

    #[test]
    fn weno5_step_data_stays_in_hull() {
        // All three sub-stencil values lie in [0, 1] here, so the convex
        // combination must too. Enumerate them to confirm the premise.
        let s = [0.0, 0.0, 0.0, 1.0, 1.0];
        let s0 = (2.0 * s[0] - 7.0 * s[1] + 11.0 * s[2]) / 6.0;
        let s1 = (-s[1] + 5.0 * s[2] + 2.0 * s[3]) / 6.0;
        let s2 = (2.0 * s[2] + 5.0 * s[3] - s[4]) / 6.0;
        for v in [s0, s1, s2] {
            assert!((0.0..=1.0).contains(&v), "sub-stencil value {v}");
        }
        let w = recon_weno5_left_value(&s).unwrap();
        assert!((0.0..=1.0).contains(&w), "{w}");
    }

    #[test]
    fn r1_constant_and_linear() {
        assert_eq!(r1_point_values(&[7.0; 4]), [7.0; 4]);
        let out = r1_point_values(&[-1.0, 0.0, 1.0, 2.0]);
        for (got, want) in out.iter().zip([-1.0, 0.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn r1_cubic_point_values() {
        // averages of x^3 over unit cells centered at -1, 0, 1, 2 are
        // x^3 + x/4; R1 must return the point values of x^3.
        let ubar = [-1.0 - 0.25, 0.0, 1.0 + 0.25, 8.0 + 0.5];
        let got = r1_point_values(&ubar);
        // independent check: solve the 4x4 primitive-function system
        let c1 = coefficient_oracle(&[-1, 0, 1, 2], OracleTarget::PointValue(-1.0)).unwrap();
        let oracle0: f64 = c1.iter().zip(ubar.iter()).map(|(a, b)| a * b).sum();
        assert!((got[0] - oracle0).abs() < 1e-13);
        for (g, want) in got.iter().zip([-1.0, 0.0, 1.0, 8.0]) {
            assert!((g - want).abs() < 1e-12, "{g} vs {want}");
        }
    }

    #[test]
    fn r1_rows_match_oracle() {
        // each R1 row is a point value at offsets -1..2 from the interface
        let offsets = [-1i64, 0, 1, 2];
        let hard = [
            r1_point_values(&[1.0, 0.0, 0.0, 0.0]),
            r1_point_values(&[0.0, 1.0, 0.0, 0.0]),
            r1_point_values(&[0.0, 0.0, 1.0, 0.0]),
            r1_point_values(&[0.0, 0.0, 0.0, 1.0]),
        ];
        for (row, xi) in [(-1.0, 0usize), (0.0, 1), (1.0, 2), (2.0, 3)]
            .iter()
            .map(|(x, r)| (*x, *r))
        {
            let c = coefficient_oracle(&offsets, OracleTarget::PointValue(row)).unwrap();
            for l in 0..4 {
                assert!(
                    (hard[l][xi] - c[l]).abs() < 1e-12,
                    "row {xi} col {l}: {} vs {}",
                    hard[l][xi],
                    c[l]
                );
            }
        }
    }

    #[test]
    fn r2_examples() {
        assert_eq!(r2_diffusion_flux(&[4.0; 4], 1.0).unwrap(), 0.0);
        let lin = r2_diffusion_flux(&[-1.0, 0.0, 1.0, 2.0], 1.0).unwrap();
        assert!((lin - 1.0).abs() < 1e-14);
        // x^3 at x = -1, 0, 1, 2: interpolant derivative at 1/2 is 3/4
        let cub = r2_diffusion_flux(&[-1.0, 0.0, 1.0, 8.0], 1.0).unwrap();
        let c = coefficient_oracle(&[-1, 0, 1, 2], OracleTarget::DerivativeAt(0.5)).unwrap();
        // oracle gives cell-average based coefficients; rebuild from point
        // values via the cubic through them instead
        assert!(
            (cub - 0.75).abs() < 1e-13,
            "{cub} vs 0.75 (oracle len {})",
            c.len()
        );
        assert!(r2_diffusion_flux(&[0.0; 4], 0.0).is_err());
    }

    #[test]
    fn compact_flux_matches_collapsed_stencil() {
        // a(u) = u, ubar = [1,2,3,4], dx = 1: (1 - 30 + 45 - 4)/12 = 1
        let v = compact_diffusion_flux(&[1.0, 2.0, 3.0, 4.0], &|u| u, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        // zero on constants for nonlinear a
        let z = compact_diffusion_flux(&[2.5; 4], &|u| u * u, 1.0).unwrap();
        assert_eq!(z, 0.0);
        // averages of x^2 around interface 0.5 (centers -1, 0, 1, 2):
        // ubar_j = x_j^2 + 1/12, exact derivative of x^2 at 1/2 is 1
        let ubar = [
            1.0 + 1.0 / 12.0,
            1.0 / 12.0,
            1.0 + 1.0 / 12.0,
            4.0 + 1.0 / 12.0,
        ];
        let v = compact_diffusion_flux(&ubar, &|u| u, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-13, "{v}");
    }

    proptest! {
        #[test]
        fn compact_equals_four_point_formula(u0 in -5.0f64..5.0, u1 in -5.0f64..5.0,
                                             u2 in -5.0f64..5.0, u3 in -5.0f64..5.0,
                                             dx in 0.01f64..10.0) {
            let composed = compact_diffusion_flux(&[u0, u1, u2, u3], &|u| u, dx).unwrap();
            let direct = (u0 - 15.0 * u1 + 15.0 * u2 - u3) / (12.0 * dx);
            let scale = [u0, u1, u2, u3].iter().fold(1.0_f64, |m, u| m.max(u.abs())) / dx;
            prop_assert!((composed - direct).abs() <= 1e-14 * scale.max(1.0));
        }

        #[test]
        fn weno5_hull_bound_on_monotone_data(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            // monotone ramp between a and b: result stays in the data hull
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let s: Vec<f64> = (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();
            let w = recon_weno5_left_value(&s).unwrap();
            prop_assert!(w >= lo - 1e-12 && w <= hi + 1e-12);
        }
    }

    #[test]
    fn interface_sweep_periodic_constant() {
        let scheme = ReconScheme::new(2, WeightMode::Linear).unwrap();
        let table = ReconTable::new(2).unwrap();
        let vals = vec![1.5; 8];
        let ext = crate::grid::extend_1d(&vals, crate::grid::Bc1d::periodic(), 3);
        let (um, up) = interface_values(&ext, 8, 3, scheme, &table);
        for i in 0..=8 {
            assert!((um[i] - 1.5).abs() < 1e-14);
            assert!((up[i] - 1.5).abs() < 1e-14);
        }
    }

    #[test]
    fn interior_values_reproduce_polynomials() {
        // data constant: every node value equals the constant; quartic in
        // the sweep direction is reproduced at interior Gauss points.
        let k = 2;
        let centers: Vec<f64> = (0..9).map(|i| i as f64 - 4.0).collect();
        let ubar = cell_averages_of(&|x| x.powi(4), &centers, 6);
        let xi = 0.3872983346207417; // arbitrary interior point
        let vals = interior_values(&ubar, 9 - 2 * k, k, k, xi);
        for (j, v) in vals.iter().enumerate() {
            let x = centers[j + k] + xi;
            assert!(
                (v - x.powi(4)).abs() < 1e-12 * x.powi(4).abs().max(1.0),
                "cell {j}: {v} vs {}",
                x.powi(4)
            );
        }
    }
}
