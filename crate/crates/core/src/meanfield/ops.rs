use crate::consensus::{memory_switch, MemorySwitchParams};
use crate::objectives::Objective;
use crate::par;
use crate::swarm::SolverParams;
use crate::{Error, Result};

use super::grid::{
    marginal, marginal_y, Axes, Axis, AxisName, DensityField, TimeScheme, VelocityFlux,
};
use super::kernels::{advect_row, solve_tridiagonal, AdvectScratch};

/// Largest Courant number allowed in one explicit advection substep.
const MAX_COURANT: f64 = 0.5;

/// Objective values sampled where the solvers need them.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCosts {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_faces: Vec<f64>,
}

impl GridCosts {
    pub fn evaluate(axes: &Axes, objective: &dyn Objective) -> Result<Self> {
        if objective.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: objective.dim(),
            });
        }
        let sample = |points: Vec<f64>| -> Result<Vec<f64>> {
            points
                .into_iter()
                .enumerate()
                .map(|(index, p)| {
                    let c = objective.cost(&[p]);
                    if c.is_nan() {
                        Err(Error::NanCost { index })
                    } else {
                        Ok(c)
                    }
                })
                .collect()
        };
        let x = sample(axes.x.centers())?;
        let (y, y_faces) = match &axes.y {
            Some(y) => (sample(y.centers())?, sample(y.faces())?),
            None => (Vec::new(), Vec::new()),
        };
        Ok(Self { x, y, y_faces })
    }
}

/// Weighted consensus of the marginal along `axis` (x or y), with weights
/// `exp(-alpha (cost - min cost))` on cell-center atoms. Negative cell values
/// are given zero weight.
pub fn consensus_from_density(
    field: &DensityField,
    axis: AxisName,
    costs: &[f64],
    alpha: f64,
) -> Result<f64> {
    let (line, atoms, label) = match axis {
        AxisName::X => (marginal(field, &[AxisName::X]), field.axes.x, "x"),
        AxisName::Y => {
            let m = marginal_y(field).ok_or(Error::ZeroMass("y"))?;
            let axis = m.axes.x;
            (m, axis, "y")
        }
        AxisName::V => return Err(Error::invalid("axis", "consensus is taken over x or y")),
    };
    if costs.len() != atoms.cells {
        return Err(Error::DimensionMismatch {
            expected: atoms.cells,
            got: costs.len(),
        });
    }
    let shift = line
        .values
        .iter()
        .zip(costs)
        .filter(|(r, _)| **r > 0.0)
        .map(|(_, c)| *c)
        .fold(f64::INFINITY, f64::min);
    if !shift.is_finite() {
        return Err(Error::ZeroMass(label));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (&r, &c)) in line.values.iter().zip(costs).enumerate() {
        if r > 0.0 {
            let w = r * (-alpha * (c - shift)).exp();
            num += w * atoms.center(i);
            den += w;
        }
    }
    if !(den > 0.0) {
        return Err(Error::ZeroMass(label));
    }
    Ok((num / den).clamp(atoms.center(0), atoms.center(atoms.cells - 1)))
}

/// Applies `f(row_index, row)` to every x-row of the field in parallel.
/// Row `r` is the line of cells sharing the trailing index `r = j * nv + k`.
fn for_each_x_row<F>(field: &mut DensityField, f: F) -> Result<()>
where
    F: Fn(usize, &mut [f64], &mut AdvectScratch) -> Result<()> + Sync + Send,
{
    let axes = field.axes;
    let (nx, stride) = (axes.nx(), axes.ny() * axes.nv());
    let values = &field.values;
    let rows = par::map_range(stride, |r| {
        let mut row: Vec<f64> = (0..nx).map(|i| values[i * stride + r]).collect();
        f(r, &mut row, &mut AdvectScratch::default()).map(|()| row)
    });
    for (r, row) in rows.into_iter().enumerate() {
        for (i, v) in row?.into_iter().enumerate() {
            field.values[i * stride + r] = v;
        }
    }
    Ok(())
}

/// Free transport `f_t + v f_x = 0` over `dt` by the backward characteristic
/// foot with quadratic interpolation, zero inflow at the x walls.
pub fn transport_x_step(field: &mut DensityField, dt: f64) -> Result<()> {
    let v_axis = field
        .axes
        .v
        .ok_or_else(|| Error::invalid("grid.v", "free transport needs a velocity axis"))?;
    let hx = field.axes.x.width();
    let nv = field.axes.nv();
    for_each_x_row(field, |r, row, scratch| {
        let shift = v_axis.center(r % nv) * dt / hx;
        shift_row(row, shift, scratch);
        Ok(())
    })
}

/// Moves a row by `shift` cells: an exact integer part, then quadratic
/// interpolation for the remaining fraction in `[-1/2, 1/2]`.
fn shift_row(row: &mut [f64], shift: f64, scratch: &mut AdvectScratch) {
    let whole = shift.round();
    let frac = shift - whole;
    let n = row.len();
    let whole = whole as i64;
    if whole != 0 {
        let src = row.to_vec();
        for (i, v) in row.iter_mut().enumerate() {
            let from = i as i64 - whole;
            *v = if (0..n as i64).contains(&from) {
                src[from as usize]
            } else {
                0.0
            };
        }
    }
    if frac != 0.0 {
        let cell = vec![frac; n];
        let face = vec![frac; n + 1];
        advect_row(row, &cell, &face, scratch);
    }
}

/// Advection along a row with Courant numbers from `courant(position)`,
/// split into substeps so no Courant number exceeds [`MAX_COURANT`].
pub(crate) fn advect_variable(
    row: &mut [f64],
    axis: &Axis,
    dt: f64,
    speed: impl Fn(usize, bool) -> f64,
    scratch: &mut AdvectScratch,
) {
    let h = axis.width();
    let cells: Vec<f64> = (0..axis.cells).map(|j| speed(j, false)).collect();
    let faces: Vec<f64> = (0..=axis.cells).map(|j| speed(j, true)).collect();
    let fastest = cells
        .iter()
        .chain(&faces)
        .fold(0.0f64, |a, c| a.max(c.abs()));
    if fastest == 0.0 {
        return;
    }
    let substeps = ((fastest * dt / h) / MAX_COURANT).ceil().max(1.0) as usize;
    let tau = dt / substeps as f64;
    let cells: Vec<f64> = cells.iter().map(|c| c * tau / h).collect();
    let faces: Vec<f64> = faces.iter().map(|c| c * tau / h).collect();
    for _ in 0..substeps {
        advect_row(row, &cells, &faces, scratch);
    }
}

/// Relaxation of the memory variable, `f_t + ((x - y) nu S f)_y = 0`, where
/// `S` is the smooth local-best switch. Lax-Wendroff with positivity-limited
/// antidiffusion and substeps for the explicit stability bound.
pub fn memory_advection_y_step(
    field: &mut DensityField,
    params: &SolverParams,
    costs: &GridCosts,
    dt: f64,
) -> Result<()> {
    let axes = field.axes;
    let y_axis = axes
        .y
        .ok_or_else(|| Error::invalid("grid.y", "memory relaxation needs a y axis"))?;
    if costs.x.len() != axes.nx() || costs.y_faces.len() != y_axis.cells + 1 {
        return Err(Error::DimensionMismatch {
            expected: axes.nx(),
            got: costs.x.len(),
        });
    }
    let switch = MemorySwitchParams {
        beta: params.beta,
        nu: params.nu,
    };
    let (ny, nv) = (axes.ny(), axes.nv());
    par::for_each_chunk_mut(&mut field.values, ny * nv, |i, slab| {
        let x = axes.x.center(i);
        let cx = costs.x[i];
        let speed = |j: usize, face: bool| {
            let (y, cy) = if face {
                (y_axis.face(j), costs.y_faces[j])
            } else {
                (y_axis.center(j), costs.y[j])
            };
            switch.nu * (x - y) * memory_switch(cx, cy, &switch)
        };
        let mut scratch = AdvectScratch::default();
        let mut row = vec![0.0; ny];
        for k in 0..nv {
            for (j, r) in row.iter_mut().enumerate() {
                *r = slab[j * nv + k];
            }
            advect_variable(&mut row, &y_axis, dt, speed, &mut scratch);
            for (j, r) in row.iter().enumerate() {
                slab[j * nv + k] = *r;
            }
        }
    });
    Ok(())
}

/// Coefficients of the velocity relaxation in one (x, y) column:
/// `f_t = (a f + D f_v)_v` with `a = friction v + offset`.
#[derive(Debug, Clone, Copy)]
struct ColumnCoefficients {
    friction: f64,
    offset: f64,
    diffusion: f64,
}

fn column_coefficients(
    params: &SolverParams,
    x: f64,
    y: Option<f64>,
    consensus: f64,
) -> ColumnCoefficients {
    let m = params.m;
    let to_global = x - consensus;
    let (mut offset, mut spread) = (
        params.lambda2 * to_global,
        (params.sigma2 * to_global).powi(2),
    );
    if let Some(y) = y {
        offset += params.lambda1 * (x - y);
        spread += (params.sigma1 * (x - y)).powi(2);
    }
    ColumnCoefficients {
        friction: params.gamma() / m,
        offset: offset / m,
        diffusion: spread / (2.0 * m * m),
    }
}

/// Implicit step of the velocity drift-diffusion in every column, with the
/// consensus point frozen. Zero flux through the v walls, so each column
/// keeps its mass up to rounding.
pub fn fokker_planck_v_step(
    field: &mut DensityField,
    consensus: f64,
    params: &SolverParams,
    scheme: TimeScheme,
    flux: VelocityFlux,
    dt: f64,
) -> Result<()> {
    let axes = field.axes;
    let v_axis = axes
        .v
        .ok_or_else(|| Error::invalid("grid.v", "velocity relaxation needs a velocity axis"))?;
    if !(params.m > 0.0) {
        return Err(Error::invalid(
            "m",
            "the kinetic mean-field equation needs m > 0",
        ));
    }
    let (ny, nv) = (axes.ny(), axes.nv());
    let theta = scheme.theta();
    let results = std::sync::Mutex::new(Ok(()));
    par::for_each_chunk_mut(&mut field.values, ny * nv, |i, slab| {
        let x = axes.x.center(i);
        let mut solver = ColumnSolver::new(nv);
        for j in 0..ny {
            let y = axes.y.map(|a| a.center(j));
            let coeffs = column_coefficients(params, x, y, consensus);
            let column = &mut slab[j * nv..(j + 1) * nv];
            let stepped = match flux {
                VelocityFlux::Central => solver.step(column, &v_axis, coeffs, theta, dt),
                VelocityFlux::FluxCorrected => {
                    solver.step_corrected(column, &v_axis, coeffs, theta, dt)
                }
            };
            if let Err(e) = stepped {
                *results.lock().unwrap() = Err(e);
                return;
            }
        }
    });
    results.into_inner().unwrap()
}

struct ColumnSolver {
    left: Vec<f64>,
    right: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    flux: Vec<f64>,
    anti: Vec<f64>,
    start: Vec<f64>,
    high: Vec<f64>,
    outflow: Vec<f64>,
    work: Vec<f64>,
}

/// `z / (e^z - 1)`, the Scharfetter-Gummel weight.
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-12 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

impl ColumnSolver {
    fn new(n: usize) -> Self {
        Self {
            left: vec![0.0; n + 1],
            right: vec![0.0; n + 1],
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            flux: vec![0.0; n + 1],
            anti: vec![0.0; n + 1],
            start: vec![0.0; n],
            high: vec![0.0; n],
            outflow: vec![0.0; n],
            work: Vec::with_capacity(n),
        }
    }

    /// Face weights of `J = a f + D f_v` with `J_k = left_k f_{k-1} + right_k f_k`.
    /// The fitted weights are exact for the local exponential profile and
    /// give a positive implicit step; the centered ones are second order.
    fn assemble(&mut self, v: &Axis, c: ColumnCoefficients, fitted: bool) {
        let n = self.lower.len();
        let dv = v.width();
        let g = c.diffusion / dv;
        for k in 1..n {
            let a = c.friction * v.face(k) + c.offset;
            if !fitted {
                self.left[k] = 0.5 * a - g;
                self.right[k] = 0.5 * a + g;
            } else if g > 1e-12 * a.abs() {
                let peclet = a / g;
                self.left[k] = -g * bernoulli(peclet);
                self.right[k] = g * bernoulli(-peclet);
            } else {
                self.left[k] = a.min(0.0);
                self.right[k] = a.max(0.0);
            }
        }
        self.left[0] = 0.0;
        self.right[0] = 0.0;
        self.left[n] = 0.0;
        self.right[n] = 0.0;
    }

    fn face_flux(&self, f: &[f64], k: usize) -> f64 {
        if k == 0 || k == f.len() {
            0.0
        } else {
            self.left[k] * f[k - 1] + self.right[k] * f[k]
        }
    }

    /// Theta step of `f_t = J_v` with the assembled weights.
    fn theta_solve(&mut self, f: &mut [f64], theta: f64, r: f64) -> Result<()> {
        let n = f.len();
        let explicit = 1.0 - theta;
        if explicit > 0.0 {
            for k in 0..=n {
                self.flux[k] = self.face_flux(f, k);
            }
            for j in 0..n {
                f[j] += explicit * r * (self.flux[j + 1] - self.flux[j]);
            }
        }
        for j in 0..n {
            self.lower[j] = theta * r * self.left[j];
            self.diag[j] = 1.0 - theta * r * (self.left[j + 1] - self.right[j]);
            self.upper[j] = -theta * r * self.right[j + 1];
        }
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, f, &mut self.work)
    }

    /// Centered implicit step.
    fn step(
        &mut self,
        f: &mut [f64],
        v: &Axis,
        c: ColumnCoefficients,
        theta: f64,
        dt: f64,
    ) -> Result<()> {
        self.assemble(v, c, false);
        self.theta_solve(f, theta, dt / v.width())
    }

    /// Fitted implicit step plus the limited difference between centered and
    /// fitted fluxes, both taken on the centered solution. The correction is
    /// scaled so no cell drops below zero.
    fn step_corrected(
        &mut self,
        f: &mut [f64],
        v: &Axis,
        c: ColumnCoefficients,
        theta: f64,
        dt: f64,
    ) -> Result<()> {
        let n = f.len();
        let r = dt / v.width();
        self.start.copy_from_slice(f);
        self.high.copy_from_slice(f);
        let mut high = std::mem::take(&mut self.high);
        self.assemble(v, c, false);
        let solved = self.theta_solve(&mut high, theta, r);
        let flux_at = |s: &Self, k: usize, high: &[f64]| {
            theta * s.face_flux(high, k) + (1.0 - theta) * s.face_flux(&s.start, k)
        };
        if solved.is_ok() {
            for k in 0..=n {
                self.anti[k] = flux_at(self, k, &high);
            }
        }
        self.assemble(v, c, true);
        if solved.is_ok() {
            for k in 0..=n {
                self.anti[k] -= flux_at(self, k, &high);
            }
        }
        self.high = high;
        self.theta_solve(f, theta, r)?;
        if solved.is_err() {
            return Ok(());
        }
        // A positive face flux at k carries mass from cell k to cell k - 1.
        for j in 0..n {
            let out = r * (self.anti[j].max(0.0) + (-self.anti[j + 1]).max(0.0));
            self.outflow[j] = if out > 0.0 {
                (f[j].max(0.0) / out).min(1.0)
            } else {
                1.0
            };
        }
        for k in 1..n {
            let scale = if self.anti[k] > 0.0 {
                self.outflow[k]
            } else {
                self.outflow[k - 1]
            };
            self.anti[k] *= scale;
        }
        for j in 0..n {
            f[j] += r * (self.anti[j + 1] - self.anti[j]);
        }
        Ok(())
    }
}

/// Drift of the first-order dynamics along x:
/// speed `lambda2 (consensus - x) + lambda1 (y - x)`.
fn cbo_drift(
    field: &mut DensityField,
    params: &SolverParams,
    consensus: f64,
    dt: f64,
) -> Result<()> {
    let axes = field.axes;
    let x_axis = axes.x;
    let with_y = axes.y.is_some();
    for_each_x_row(field, |j, row, scratch| {
        let y = axes.y.map(|a| a.center(j));
        let speed = |i: usize, face: bool| {
            let x = if face {
                x_axis.face(i)
            } else {
                x_axis.center(i)
            };
            let mut s = params.lambda2 * (consensus - x);
            if let (true, Some(y)) = (with_y, y) {
                s += params.lambda1 * (y - x);
            }
            s
        };
        advect_variable(row, &x_axis, dt, speed, scratch);
        Ok(())
    })
}

/// Implicit step of `rho_t = (D rho)_xx` with `D = (sigma2^2 (x - c)^2 +
/// sigma1^2 (x - y)^2) / 2`, discretized on `u = D rho` with zero ghosts.
fn cbo_diffusion(
    field: &mut DensityField,
    params: &SolverParams,
    consensus: f64,
    scheme: TimeScheme,
    dt: f64,
) -> Result<()> {
    let axes = field.axes;
    let x_axis = axes.x;
    let theta = scheme.theta();
    let r = dt / (x_axis.width() * x_axis.width());
    for_each_x_row(field, |j, row, _| {
        let y = axes.y.map(|a| a.center(j));
        let n = row.len();
        let coef: Vec<f64> = (0..n)
            .map(|i| {
                let x = x_axis.center(i);
                let mut s = (params.sigma2 * (x - consensus)).powi(2);
                if let Some(y) = y {
                    s += (params.sigma1 * (x - y)).powi(2);
                }
                0.5 * s
            })
            .collect();
        let u = |i: isize| {
            if i < 0 || i >= n as isize {
                0.0
            } else {
                coef[i as usize] * row[i as usize]
            }
        };
        let explicit = 1.0 - theta;
        let mut rhs: Vec<f64> = (0..n as isize)
            .map(|i| {
                let lap = u(i + 1) - 2.0 * u(i) + u(i - 1);
                row[i as usize]
                    + if explicit > 0.0 {
                        explicit * r * lap
                    } else {
                        0.0
                    }
            })
            .collect();
        let lower: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 {
                    0.0
                } else {
                    -theta * r * coef[i - 1]
                }
            })
            .collect();
        let upper: Vec<f64> = (0..n)
            .map(|i| {
                if i + 1 == n {
                    0.0
                } else {
                    -theta * r * coef[i + 1]
                }
            })
            .collect();
        let diag: Vec<f64> = coef.iter().map(|d| 1.0 + 2.0 * theta * r * d).collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut Vec::new())?;
        row.copy_from_slice(&rhs);
        Ok(())
    })
}

pub(crate) fn cbo_drift_step(
    field: &mut DensityField,
    params: &SolverParams,
    consensus: f64,
    dt: f64,
) -> Result<()> {
    cbo_drift(field, params, consensus, dt)
}

pub(crate) fn cbo_diffusion_step(
    field: &mut DensityField,
    params: &SolverParams,
    consensus: f64,
    scheme: TimeScheme,
    dt: f64,
) -> Result<()> {
    cbo_diffusion(field, params, consensus, scheme, dt)
}

/// Gaussian velocity profile with mean 0 and variance
/// `sigma^2 (x - consensus)^2 / (2 epsilon)`, normalized to unit mass on the
/// grid. A width too narrow to resolve puts all mass at v = 0, split over the
/// two central cells when 0 is a face.
pub fn maxwellian_profile(
    x: f64,
    consensus: f64,
    sigma: f64,
    epsilon: f64,
    v: &Axis,
) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    let variance = (sigma * (x - consensus)).powi(2) / (2.0 * epsilon);
    let dv = v.width();
    let mut out = vec![0.0; v.cells];
    let total: f64 = if variance > 0.0 {
        for (k, o) in out.iter_mut().enumerate() {
            let s = v.center(k);
            *o = (-s * s / (2.0 * variance)).exp();
        }
        out.iter().sum::<f64>() * dv
    } else {
        0.0
    };
    if total > 0.0 && total.is_finite() {
        out.iter_mut().for_each(|o| *o /= total);
        return Ok(out);
    }
    out.iter_mut().for_each(|o| *o = 0.0);
    let at = (0.0 - v.lower) / dv;
    if at.fract() == 0.0 && at > 0.0 && (at as usize) < v.cells {
        let k = at as usize;
        out[k - 1] = 0.5 / dv;
        out[k] = 0.5 / dv;
    } else {
        let k = v
            .locate(0.0)
            .ok_or_else(|| Error::invalid("grid.v", "axis must contain v = 0"))?;
        out[k] = 1.0 / dv;
    }
    Ok(out)
}
