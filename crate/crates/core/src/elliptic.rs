//! Spectral Poisson solver on periodic 2D grids.
//!
//! Solves laplace(psi) = omega for the streamfunction of the vortex-patch
//! test, with the zero mode gauged to mean-zero psi. The input omega is a
//! field of cell averages; each Fourier coefficient is divided by the
//! per-mode averaging factor sinc(k dx / 2) so the spectrum represents point
//! values exactly, then by -(kx^2 + ky^2). Corner values and Gauss-node
//! velocities are synthesized through phase-shifted inverse transforms, so
//! every evaluation point costs one FFT pass rather than a direct mode sum.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::grid::CellField2d;
use crate::{Result, SolverError};

/// Planned transforms and wavenumbers for one periodic grid.
pub struct SpectralPoisson {
    nx: usize,
    ny: usize,
    kx: Vec<f64>,
    ky: Vec<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    dx: f64,
    dy: f64,
}

/// Spectrum of a field, row-major like the field itself.
pub struct Spectrum {
    pub coeffs: Vec<Complex<f64>>,
}

fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / length;
    (0..n)
        .map(|i| {
            let m = if i <= n / 2 {
                i as f64
            } else {
                i as f64 - n as f64
            };
            base * m
        })
        .collect()
}

impl SpectralPoisson {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, dx: f64, dy: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            kx: wavenumbers(nx, lx),
            ky: wavenumbers(ny, ly),
            fwd_x: planner.plan_fft_forward(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_x: planner.plan_fft_inverse(nx),
            inv_y: planner.plan_fft_inverse(ny),
            dx,
            dy,
        }
    }

    pub fn for_field(field: &CellField2d) -> Self {
        let g = field.grid;
        Self::new(g.nx, g.ny, g.x_hi - g.x_lo, g.y_hi - g.y_lo, g.dx, g.dy)
    }

    fn fft_2d(&self, data: &mut [Complex<f64>], inverse: bool) {
        let (nx, ny) = (self.nx, self.ny);
        let (fx, fy) = if inverse {
            (&self.inv_x, &self.inv_y)
        } else {
            (&self.fwd_x, &self.fwd_y)
        };
        for row in data.chunks_mut(nx) {
            fx.process(row);
        }
        let mut col = vec![Complex::default(); ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = data[j * nx + i];
            }
            fy.process(&mut col);
            for j in 0..ny {
                data[j * nx + i] = col[j];
            }
        }
        if inverse {
            let scale = 1.0 / (nx * ny) as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// Point-value spectrum of a cell-average field: forward transform plus
    /// division by the per-mode cell-averaging factor.
    pub fn point_spectrum(&self, cell_averages: &[f64]) -> Spectrum {
        let mut data: Vec<Complex<f64>> = cell_averages
            .iter()
            .map(|v| Complex::new(*v, 0.0))
            .collect();
        self.fft_2d(&mut data, false);
        let sinc = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
        for j in 0..self.ny {
            let sy = sinc(0.5 * self.ky[j] * self.dy);
            for i in 0..self.nx {
                let sx = sinc(0.5 * self.kx[i] * self.dx);
                data[j * self.nx + i] /= sx * sy;
            }
        }
        Spectrum { coeffs: data }
    }

    /// Solve laplace(psi) = omega in spectral space: divide the nonzero
    /// modes by -(kx^2 + ky^2), gauge the zero mode to 0. Rejects
    /// incompatible input (mean of omega beyond 1e-10 of its scale).
    pub fn solve_spectrum(&self, omega: &CellField2d) -> Result<Spectrum> {
        let scale = omega
            .values
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1e-30);
        let mean = omega.values.iter().sum::<f64>() / omega.values.len() as f64;
        if mean.abs() > 1e-10 * scale {
            return Err(SolverError::IncompatibleRhs(format!(
                "mean(omega) = {mean:e} is not negligible against max |omega| = {scale:e}"
            )));
        }
        let mut spec = self.point_spectrum(&omega.values);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let k2 = self.kx[i] * self.kx[i] + self.ky[j] * self.ky[j];
                let c = &mut spec.coeffs[j * self.nx + i];
                if k2 == 0.0 {
                    *c = Complex::default();
                } else {
                    *c /= -k2;
                }
            }
        }
        Ok(spec)
    }

    /// Evaluate a spectrum on the grid shifted by (sx, sy) in physical
    /// units; sx = dx/2, sy = dy/2 lands on cell corners.
    pub fn evaluate_shifted(&self, spec: &Spectrum, sx: f64, sy: f64) -> Vec<f64> {
        let mut data = spec.coeffs.clone();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let phase = self.kx[i] * sx + self.ky[j] * sy;
                data[j * self.nx + i] *= Complex::from_polar(1.0, phase);
            }
        }
        self.fft_2d(&mut data, true);
        data.iter().map(|c| c.re).collect()
    }

    /// Derivative spectrum along x or y (multiplication by i*k, with the
    /// Nyquist mode of the differentiated direction zeroed).
    pub fn derivative(&self, spec: &Spectrum, along_x: bool) -> Spectrum {
        let mut coeffs = spec.coeffs.clone();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let c = &mut coeffs[j * self.nx + i];
                let k = if along_x { self.kx[i] } else { self.ky[j] };
                let nyquist = if along_x {
                    self.nx % 2 == 0 && i == self.nx / 2
                } else {
                    self.ny % 2 == 0 && j == self.ny / 2
                };
                *c = if nyquist {
                    Complex::default()
                } else {
                    Complex::new(0.0, k) * *c
                };
            }
        }
        Spectrum { coeffs }
    }

    /// Apply the spectral Laplacian (for round-trip residual checks).
    pub fn laplacian_values(&self, spec: &Spectrum) -> Vec<f64> {
        let mut coeffs = spec.coeffs.clone();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let k2 = self.kx[i] * self.kx[i] + self.ky[j] * self.ky[j];
                coeffs[j * self.nx + i] *= -k2;
            }
        }
        let lap = Spectrum { coeffs };
        self.evaluate_shifted(&lap, 0.0, 0.0)
    }

    /// psi at cell corners (x-interface i, y-interface j), materialized as an
    /// (nx+1) x (ny+1) array by periodic wrap of the nx x ny distinct values.
    pub fn corner_values(&self, spec: &Spectrum) -> Vec<f64> {
        // corner (i, j) = psi(x_lo + i dx, y_lo + j dy); the shifted-grid
        // evaluation yields corners (i + 1/2 + 1/2) etc. -- shift by
        // (-dx/2, -dy/2) from cell centers to land on the lower-left corner
        // of each cell, i.e. corner index = cell index.
        let vals = self.evaluate_shifted(spec, -0.5 * self.dx, -0.5 * self.dy);
        let (nx, ny) = (self.nx, self.ny);
        let mut out = vec![0.0; (nx + 1) * (ny + 1)];
        for j in 0..=ny {
            for i in 0..=nx {
                out[j * (nx + 1) + i] = vals[(j % ny) * nx + (i % nx)];
            }
        }
        out
    }
}

/// Gauss-node edge velocities (u = -psi_y on x-edges, v = psi_x on y-edges)
/// plus corner psi, synthesized from the streamfunction spectrum.
///
/// `nodes` are the Gauss points on [-1, 1] used by the edge quadrature.
pub fn velocities_from_psi(
    plan: &SpectralPoisson,
    psi: &Spectrum,
    nodes: &[f64],
) -> crate::flux::EdgeVelocities {
    let (nx, ny) = (plan.nx, plan.ny);
    let ng = nodes.len();
    let dpsi_dy = plan.derivative(psi, false);
    let dpsi_dx = plan.derivative(psi, true);
    let mut u_x_edges = vec![0.0; (nx + 1) * ny * ng];
    let mut v_y_edges = vec![0.0; nx * (ny + 1) * ng];
    for (g, s) in nodes.iter().enumerate() {
        // x-edges: points (x_{i+1/2}, y_j + s*dy/2) relative to centers:
        // shift (+dx/2, s*dy/2); edge i of the output row is the right edge
        // of cell i-1, so wrap indices accordingly.
        let grid_u = plan.evaluate_shifted(&dpsi_dy, -0.5 * plan.dx, 0.5 * s * plan.dy);
        for j in 0..ny {
            for i in 0..=nx {
                // value at x-interface i = right edge of cell (i-1 mod nx),
                // which the (-dx/2)-shifted grid stores at cell index i mod nx
                u_x_edges[(j * (nx + 1) + i) * ng + g] = -grid_u[j * nx + (i % nx)];
            }
        }
        let grid_v = plan.evaluate_shifted(&dpsi_dx, 0.5 * s * plan.dx, -0.5 * plan.dy);
        for j in 0..=ny {
            for i in 0..nx {
                v_y_edges[(j * nx + i) * ng + g] = grid_v[(j % ny) * nx + i];
            }
        }
    }
    crate::flux::EdgeVelocities {
        ng,
        u_x_edges,
        v_y_edges,
        corner_psi: plan.corner_values(psi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Bc2d, CellField2d, Grid2d};

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn project(n: usize, f: &dyn Fn(f64, f64) -> f64) -> CellField2d {
        let g = Grid2d::new(0.0, TWO_PI, 0.0, TWO_PI, n, n).unwrap();
        CellField2d::project(g, Bc2d::periodic(), 8, f).unwrap()
    }

    #[test]
    fn zero_omega_zero_psi() {
        let omega = project(8, &|_, _| 0.0);
        let plan = SpectralPoisson::for_field(&omega);
        let spec = plan.solve_spectrum(&omega).unwrap();
        let corners = plan.corner_values(&spec);
        assert!(corners.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn eigenfunction_solution() {
        // omega = -2 sin x sin y -> psi = sin x sin y (mean zero)
        let omega = project(32, &|x, y| -2.0 * x.sin() * y.sin());
        let plan = SpectralPoisson::for_field(&omega);
        let spec = plan.solve_spectrum(&omega).unwrap();
        let corners = plan.corner_values(&spec);
        let g = omega.grid;
        for j in 0..=g.ny {
            for i in 0..=g.nx {
                let (x, y) = (g.x_interface(i), g.y_interface(j));
                let want = x.sin() * y.sin();
                let got = corners[j * (g.nx + 1) + i];
                assert!(
                    (got - want).abs() < 1e-10,
                    "corner ({i},{j}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn round_trip_residual() {
        // vortex-patch style data: +/-1 rectangles (mean zero)
        let omega = project(64, &|x, y| {
            if (0.5 * TWO_PI / 2.0..1.5 * TWO_PI / 2.0).contains(&x) {
                if (0.25 * std::f64::consts::PI..0.75 * std::f64::consts::PI).contains(&y) {
                    -1.0
                } else if (1.25 * std::f64::consts::PI..1.75 * std::f64::consts::PI).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            } else {
                0.0
            }
        });
        let plan = SpectralPoisson::for_field(&omega);
        let spec = plan.solve_spectrum(&omega).unwrap();
        // residual against the deconvolved point spectrum of omega
        let lap = plan.laplacian_values(&spec);
        let omega_points = {
            let s = plan.point_spectrum(&omega.values);
            plan.evaluate_shifted(&s, 0.0, 0.0)
        };
        let scale = omega_points.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (a, b) in lap.iter().zip(omega_points.iter()) {
            assert!((a - b).abs() < 1e-10 * scale, "{a} vs {b}");
        }
        // gauge: mean psi = 0
        let mean: f64 = {
            let vals = plan.evaluate_shifted(&spec, 0.0, 0.0);
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn incompatible_mean_rejected() {
        let omega = project(8, &|_, _| 1.0);
        let plan = SpectralPoisson::for_field(&omega);
        assert!(plan.solve_spectrum(&omega).is_err());
    }

    #[test]
    fn velocities_match_analytic_derivatives() {
        // psi = sin x sin y: u = -sin x cos y, v = cos x sin y
        let omega = project(32, &|x, y| -2.0 * x.sin() * y.sin());
        let plan = SpectralPoisson::for_field(&omega);
        let spec = plan.solve_spectrum(&omega).unwrap();
        let (nodes, _) = crate::quad::gauss_legendre(3);
        let vel = velocities_from_psi(&plan, &spec, &nodes);
        let g = omega.grid;
        for j in 0..g.ny {
            for (gi, s) in nodes.iter().enumerate() {
                let y = g.y_lo + (j as f64 + 0.5 + 0.5 * s) * g.dy;
                for i in 0..=g.nx {
                    let x = g.x_interface(i);
                    let want = -(x.sin() * y.cos());
                    let got = vel.u_x_edges[(j * (g.nx + 1) + i) * 3 + gi];
                    assert!(
                        (got - want).abs() < 1e-10,
                        "u at ({x}, {y}): {got} vs {want}"
                    );
                }
            }
        }
        for (gi, s) in nodes.iter().enumerate() {
            for j in 0..=g.ny {
                let y = g.y_interface(j);
                for i in 0..g.nx {
                    let x = g.x_lo + (i as f64 + 0.5 + 0.5 * s) * g.dx;
                    let want = x.cos() * y.sin();
                    let got = vel.v_y_edges[(j * g.nx + i) * 3 + gi];
                    assert!(
                        (got - want).abs() < 1e-10,
                        "v at ({x}, {y}): {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn corner_psi_velocities_divergence_free() {
        let omega = project(32, &|x, y| {
            (x).sin() * (y).sin() + 0.3 * (2.0 * x).cos() * (y).sin()
        });
        let plan = SpectralPoisson::for_field(&omega);
        let spec = plan.solve_spectrum(&omega).unwrap();
        let corners = plan.corner_values(&spec);
        let g = omega.grid;
        let (nx, ny) = (g.nx, g.ny);
        let psi = |i: usize, j: usize| corners[j * (nx + 1) + i];
        let scale = corners
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1e-30);
        for j in 0..ny {
            for i in 0..nx {
                // edge velocities from corner differences, divergence per cell
                let vxr = -(psi(i + 1, j + 1) - psi(i + 1, j)) / g.dy;
                let vxl = -(psi(i, j + 1) - psi(i, j)) / g.dy;
                let vyu = (psi(i + 1, j + 1) - psi(i, j + 1)) / g.dx;
                let vyd = (psi(i + 1, j) - psi(i, j)) / g.dx;
                let div = (vxr - vxl) / g.dx + (vyu - vyd) / g.dy;
                assert!(div.abs() < 1e-12 * scale.max(1.0), "div {div}");
            }
        }
    }
}
