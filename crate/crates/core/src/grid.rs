//! Uniform structured grids, cell-average fields and ghost-cell extension.
//!
//! Cells are indexed from 0. In 1D, cell j spans [x_lo + j*dx, x_lo + (j+1)*dx]
//! with center x_lo + (j + 1/2)*dx; interface i (i = 0..=n) sits at
//! x_lo + i*dx. 2D fields are stored row-major with the x index fastest,
//! which keeps x-direction sweeps contiguous.

use crate::quad;
use crate::{Result, SolverError};

/// Boundary condition on one side of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Periodic,
    /// Ghost cells on this side are filled with the given constant value.
    DirichletConstant(f64),
}

/// Boundary conditions for a 1D field. Periodic sides must pair up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bc1d {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

impl Bc1d {
    pub fn periodic() -> Self {
        Self {
            left: BoundaryCondition::Periodic,
            right: BoundaryCondition::Periodic,
        }
    }

    pub fn dirichlet(left: f64, right: f64) -> Self {
        Self {
            left: BoundaryCondition::DirichletConstant(left),
            right: BoundaryCondition::DirichletConstant(right),
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.left == BoundaryCondition::Periodic
    }

    fn validate(&self) -> Result<()> {
        let lp = self.left == BoundaryCondition::Periodic;
        let rp = self.right == BoundaryCondition::Periodic;
        if lp != rp {
            return Err(SolverError::InvalidGrid(
                "periodic boundary conditions must pair up".into(),
            ));
        }
        Ok(())
    }
}

/// Boundary conditions for a 2D field, per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bc2d {
    pub x: Bc1d,
    pub y: Bc1d,
}

impl Bc2d {
    pub fn periodic() -> Self {
        Self {
            x: Bc1d::periodic(),
            y: Bc1d::periodic(),
        }
    }
}

/// Uniform 1D grid of `n` cells on [x_lo, x_hi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1d {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid1d {
    pub fn new(x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        if n == 0 || !(x_hi > x_lo) {
            return Err(SolverError::InvalidGrid(format!(
                "need n > 0 and x_hi > x_lo, got n = {n}, [{x_lo}, {x_hi}]"
            )));
        }
        Ok(Self {
            x_lo,
            x_hi,
            n,
            dx: (x_hi - x_lo) / n as f64,
        })
    }

    /// Center of cell j.
    #[inline]
    pub fn cell_center(&self, j: usize) -> f64 {
        self.x_lo + (j as f64 + 0.5) * self.dx
    }

    /// Interface i, for i = 0..=n.
    #[inline]
    pub fn interface(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx
    }
}

/// Uniform 2D grid of nx x ny cells on [x_lo, x_hi] x [y_lo, y_hi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2d {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Grid2d {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || !(x_hi > x_lo) || !(y_hi > y_lo) {
            return Err(SolverError::InvalidGrid(format!(
                "degenerate 2D grid: nx = {nx}, ny = {ny}, [{x_lo},{x_hi}] x [{y_lo},{y_hi}]"
            )));
        }
        Ok(Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            nx,
            ny,
            dx: (x_hi - x_lo) / nx as f64,
            dy: (y_hi - y_lo) / ny as f64,
        })
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x_lo + (i as f64 + 0.5) * self.dx,
            self.y_lo + (j as f64 + 0.5) * self.dy,
        )
    }

    #[inline]
    pub fn x_interface(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx
    }

    #[inline]
    pub fn y_interface(&self, j: usize) -> f64 {
        self.y_lo + j as f64 * self.dy
    }
}

/// Cell-average values on a 1D grid, with boundary-condition metadata.
#[derive(Debug, Clone)]
pub struct CellField1d {
    pub grid: Grid1d,
    pub values: Vec<f64>,
    pub bc: Bc1d,
}

impl CellField1d {
    pub fn new(grid: Grid1d, values: Vec<f64>, bc: Bc1d) -> Result<Self> {
        bc.validate()?;
        if values.len() != grid.n {
            return Err(SolverError::GridMismatch(format!(
                "{} values on a {}-cell grid",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite("cell-average field".into()));
        }
        Ok(Self { grid, values, bc })
    }

    /// Cell averages of `f`, each by `quad_points`-point Gauss-Legendre
    /// quadrature on the cell. Exact for polynomials of degree
    /// 2*quad_points - 1.
    pub fn project(
        grid: Grid1d,
        bc: Bc1d,
        quad_points: usize,
        f: &dyn Fn(f64) -> f64,
    ) -> Result<Self> {
        let (xs, ws) = quad::gauss_legendre(quad_points);
        let mut values = vec![0.0; grid.n];
        for (j, v) in values.iter_mut().enumerate() {
            let mid = grid.cell_center(j);
            let half = 0.5 * grid.dx;
            let mut acc = 0.0;
            for (x, w) in xs.iter().zip(ws.iter()) {
                let y = f(mid + half * x);
                if !y.is_finite() {
                    return Err(SolverError::NonFinite(format!(
                        "initial data at x = {}",
                        mid + half * x
                    )));
                }
                acc += w * y;
            }
            *v = 0.5 * acc;
        }
        Self::new(grid, values, bc)
    }

    /// Values extended by `width` ghost cells per side.
    ///
    /// Periodic sides wrap; Dirichlet sides repeat the boundary constant in
    /// every ghost layer. Interior entries are copied untouched.
    pub fn extended(&self, width: usize) -> Vec<f64> {
        extend_1d(&self.values, self.bc, width)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Total mass: sum of cell averages times cell volume.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx
    }
}

/// Ghost extension for a plain slice of cell averages.
pub fn extend_1d(values: &[f64], bc: Bc1d, width: usize) -> Vec<f64> {
    let n = values.len();
    debug_assert!(width >= 1);
    debug_assert!(
        !bc.is_periodic() || width <= n,
        "periodic wrap needs width <= n"
    );
    let mut out = vec![0.0; n + 2 * width];
    out[width..width + n].copy_from_slice(values);
    for l in 1..=width {
        out[width - l] = match bc.left {
            BoundaryCondition::Periodic => values[n - l],
            BoundaryCondition::DirichletConstant(v) => v,
        };
        out[width + n - 1 + l] = match bc.right {
            BoundaryCondition::Periodic => values[l - 1],
            BoundaryCondition::DirichletConstant(v) => v,
        };
    }
    out
}

/// Cell-average values on a 2D grid (row-major, x fastest).
#[derive(Debug, Clone)]
pub struct CellField2d {
    pub grid: Grid2d,
    pub values: Vec<f64>,
    pub bc: Bc2d,
}

impl CellField2d {
    pub fn new(grid: Grid2d, values: Vec<f64>, bc: Bc2d) -> Result<Self> {
        bc.x.validate()?;
        bc.y.validate()?;
        if values.len() != grid.nx * grid.ny {
            return Err(SolverError::GridMismatch(format!(
                "{} values on a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite("cell-average field".into()));
        }
        Ok(Self { grid, values, bc })
    }

    /// Tensor-product Gauss-Legendre cell averages of `f`.
    pub fn project(
        grid: Grid2d,
        bc: Bc2d,
        quad_points: usize,
        f: &dyn Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let (xs, ws) = quad::gauss_legendre(quad_points);
        let mut values = vec![0.0; grid.nx * grid.ny];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (cx, cy) = grid.cell_center(i, j);
                let (hx, hy) = (0.5 * grid.dx, 0.5 * grid.dy);
                let mut acc = 0.0;
                for (y, wy) in xs.iter().zip(ws.iter()) {
                    let mut row = 0.0;
                    for (x, wx) in xs.iter().zip(ws.iter()) {
                        let v = f(cx + hx * x, cy + hy * y);
                        if !v.is_finite() {
                            return Err(SolverError::NonFinite(format!(
                                "initial data at ({}, {})",
                                cx + hx * x,
                                cy + hy * y
                            )));
                        }
                        row += wx * v;
                    }
                    acc += wy * row;
                }
                values[grid.idx(i, j)] = 0.25 * acc;
            }
        }
        Self::new(grid, values, bc)
    }

    /// Values extended by `wx`/`wy` ghost cells per side in x/y,
    /// stored row-major with row length nx + 2*wx.
    ///
    /// Corner ghosts are filled by wrapping (or constant fill) in y applied
    /// after the x extension, which is what dimension-by-dimension sweeps
    /// need.
    pub fn extended(&self, wx: usize, wy: usize) -> Vec<f64> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let exn = nx + 2 * wx;
        let mut out = vec![0.0; exn * (ny + 2 * wy)];
        // interior rows, extended in x
        for j in 0..ny {
            let row = &self.values[j * nx..(j + 1) * nx];
            let ext = extend_1d(row, self.bc.x, wx.max(1));
            let src = &ext[wx.max(1) - wx..wx.max(1) - wx + exn];
            out[(j + wy) * exn..(j + wy + 1) * exn].copy_from_slice(src);
        }
        // ghost rows in y
        for l in 1..=wy {
            let (top, bot): (Vec<f64>, Vec<f64>) = match (self.bc.y.left, self.bc.y.right) {
                (BoundaryCondition::Periodic, BoundaryCondition::Periodic) => {
                    let lo = out[(wy + ny - l) * exn..(wy + ny - l + 1) * exn].to_vec();
                    let hi = out[(wy + l - 1) * exn..(wy + l) * exn].to_vec();
                    (lo, hi)
                }
                _ => {
                    let lo = match self.bc.y.left {
                        BoundaryCondition::DirichletConstant(v) => vec![v; exn],
                        BoundaryCondition::Periodic => unreachable!(),
                    };
                    let hi = match self.bc.y.right {
                        BoundaryCondition::DirichletConstant(v) => vec![v; exn],
                        BoundaryCondition::Periodic => unreachable!(),
                    };
                    (lo, hi)
                }
            };
            out[(wy - l) * exn..(wy - l + 1) * exn].copy_from_slice(&top);
            out[(wy + ny - 1 + l) * exn..(wy + ny + l) * exn].copy_from_slice(&bot);
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx * self.grid.dy
    }
}
