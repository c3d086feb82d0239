use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smallest cell count accepted on any axis.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    X,
    Y,
    V,
}

impl AxisName {
    pub fn label(self) -> &'static str {
        match self {
            AxisName::X => "x",
            AxisName::Y => "y",
            AxisName::V => "v",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(AxisName::X),
            "y" => Ok(AxisName::Y),
            "v" => Ok(AxisName::V),
            other => Err(Error::Format(format!("unknown axis `{other}`"))),
        }
    }
}

/// Uniform cell-centered axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub cells: usize,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, cells: usize) -> Self {
        Self {
            lower,
            upper,
            cells,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::invalid(
                format!("grid.{name}"),
                "need finite lower < upper",
            ));
        }
        if self.cells < MIN_CELLS {
            return Err(Error::invalid(
                format!("grid.{name}.cells"),
                format!("need at least {MIN_CELLS} cells, got {}", self.cells),
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        (self.upper - self.lower) / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lower + (i as f64 + 0.5) * self.width()
    }

    /// Position of face `i` (face 0 is `lower`, face `cells` is `upper`).
    pub fn face(&self, i: usize) -> f64 {
        self.lower + i as f64 * self.width()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }

    pub fn faces(&self) -> Vec<f64> {
        (0..=self.cells).map(|i| self.face(i)).collect()
    }

    /// Index of the cell containing `s`, if inside the axis.
    pub fn locate(&self, s: f64) -> Option<usize> {
        if !(s >= self.lower && s < self.upper) {
            return None;
        }
        Some((((s - self.lower) / self.width()) as usize).min(self.cells - 1))
    }
}

/// The axes a density lives on. Storage order is x, then y, then v, with v
/// varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axes {
    pub x: Axis,
    pub y: Option<Axis>,
    pub v: Option<Axis>,
}

impl Axes {
    pub fn validate(&self) -> Result<()> {
        self.x.validate("x")?;
        if let Some(y) = &self.y {
            y.validate("y")?;
        }
        if let Some(v) = &self.v {
            v.validate("v")?;
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        self.x.cells
    }

    pub fn ny(&self) -> usize {
        self.y.map_or(1, |a| a.cells)
    }

    pub fn nv(&self) -> usize {
        self.v.map_or(1, |a| a.cells)
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny() * self.nv()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny() + j) * self.nv() + k
    }

    pub fn cell_volume(&self) -> f64 {
        self.x.width() * self.y.map_or(1.0, |a| a.width()) * self.v.map_or(1.0, |a| a.width())
    }

    /// Present axes in storage order.
    pub fn list(&self) -> Vec<(AxisName, Axis)> {
        let mut out = vec![(AxisName::X, self.x)];
        if let Some(y) = self.y {
            out.push((AxisName::Y, y));
        }
        if let Some(v) = self.v {
            out.push((AxisName::V, v));
        }
        out
    }

    pub fn get(&self, name: AxisName) -> Option<Axis> {
        match name {
            AxisName::X => Some(self.x),
            AxisName::Y => self.y,
            AxisName::V => self.v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    #[default]
    Lie,
    Strang,
}

/// Time discretization of the implicit velocity and diffusion substeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    #[default]
    BackwardEuler,
    CrankNicolson,
}

impl TimeScheme {
    /// Weight of the new time level.
    pub fn theta(self) -> f64 {
        match self {
            TimeScheme::BackwardEuler => 1.0,
            TimeScheme::CrankNicolson => 0.5,
        }
    }
}

/// Face flux of the velocity drift-diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityFlux {
    /// Centered drift and diffusion in one implicit solve. Second order but
    /// undershoots below zero where drift dominates diffusion.
    Central,
    /// Exponentially fitted implicit step with the centered correction added
    /// back under a positivity limiter.
    #[default]
    FluxCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub axes: Axes,
    pub dt: f64,
    #[serde(default)]
    pub splitting: Splitting,
    #[serde(default)]
    pub time_scheme: TimeScheme,
    #[serde(default)]
    pub velocity_flux: VelocityFlux,
}

impl PhaseGrid {
    /// 90 x-cells on [-3, 3] and 120 v-cells on [-4, 4]; the y axis, when
    /// requested, copies x.
    pub fn standard(memory: bool, kinetic: bool) -> Self {
        let x = Axis::new(-3.0, 3.0, 90);
        Self {
            axes: Axes {
                x,
                y: memory.then_some(x),
                v: kinetic.then(|| Axis::new(-4.0, 4.0, 120)),
            },
            dt: 1e-3,
            splitting: Splitting::Lie,
            time_scheme: TimeScheme::BackwardEuler,
            velocity_flux: VelocityFlux::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.axes.validate()?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("grid.dt", "must be positive"));
        }
        Ok(())
    }
}

/// Cell-centered density values on a set of axes.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub axes: Axes,
    pub values: Vec<f64>,
    pub time: f64,
}

impl DensityField {
    pub fn zeros(axes: Axes) -> Self {
        Self {
            axes,
            values: vec![0.0; axes.len()],
            time: 0.0,
        }
    }

    /// Samples `f(x, y, v)` at cell centers (absent axes pass 0).
    pub fn from_fn(axes: Axes, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut field = Self::zeros(axes);
        for i in 0..axes.nx() {
            let x = axes.x.center(i);
            for j in 0..axes.ny() {
                let y = axes.y.map_or(0.0, |a| a.center(j));
                for k in 0..axes.nv() {
                    let v = axes.v.map_or(0.0, |a| a.center(k));
                    field.values[axes.index(i, j, k)] = f(x, y, v);
                }
            }
        }
        field
    }

    /// Density concentrated on the diagonal `y = x`: cell `(i, i)` carries
    /// `rho(x_i) h(v)`. Needs identical x and y axes.
    pub fn on_diagonal(
        axes: Axes,
        rho: impl Fn(f64) -> f64,
        h: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if axes.y != Some(axes.x) {
            return Err(Error::invalid("grid.y", "must match the x axis"));
        }
        let mut field = Self::zeros(axes);
        for i in 0..axes.nx() {
            let r = rho(axes.x.center(i));
            for k in 0..axes.nv() {
                let v = axes.v.map_or(0.0, |a| a.center(k));
                field.values[axes.index(i, i, k)] = r * h(v);
            }
        }
        Ok(field)
    }

    pub fn validate(&self) -> Result<()> {
        self.axes.validate()?;
        if self.values.len() != self.axes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.axes.len(),
                got: self.values.len(),
            });
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("field", format!("value {i} is not finite")));
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.axes.cell_volume()
    }

    /// Rescales to unit mass.
    pub fn normalize(&mut self) -> Result<()> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(Error::ZeroMass("all"));
        }
        for v in &mut self.values {
            *v /= m;
        }
        Ok(())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sum of absolute cell differences times the cell volume.
    pub fn l1_distance(&self, other: &DensityField) -> Result<f64> {
        if self.axes != other.axes {
            return Err(Error::invalid("field", "axes differ"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.axes.cell_volume())
    }
}

/// Integrates out every axis not in `keep` (x is always kept).
pub fn marginal(field: &DensityField, keep: &[AxisName]) -> DensityField {
    let a = field.axes;
    let keep_y = a.y.is_some() && keep.contains(&AxisName::Y);
    let keep_v = a.v.is_some() && keep.contains(&AxisName::V);
    let out_axes = Axes {
        x: a.x,
        y: if keep_y { a.y } else { None },
        v: if keep_v { a.v } else { None },
    };
    let dy = if keep_y {
        1.0
    } else {
        a.y.map_or(1.0, |ax| ax.width())
    };
    let dv = if keep_v {
        1.0
    } else {
        a.v.map_or(1.0, |ax| ax.width())
    };
    let mut out = DensityField::zeros(out_axes);
    out.time = field.time;
    for i in 0..a.nx() {
        for j in 0..a.ny() {
            for k in 0..a.nv() {
                let jj = if keep_y { j } else { 0 };
                let kk = if keep_v { k } else { 0 };
                out.values[out_axes.index(i, jj, kk)] += field.values[a.index(i, j, k)];
            }
        }
    }
    let scale = dy * dv;
    for v in &mut out.values {
        *v *= scale;
    }
    out
}

/// Marginal along the y axis alone, returned on an x-shaped field whose
/// axis is the y axis.
pub fn marginal_y(field: &DensityField) -> Option<DensityField> {
    let a = field.axes;
    let y = a.y?;
    let dxv = a.x.width() * a.v.map_or(1.0, |ax| ax.width());
    let mut out = DensityField::zeros(Axes {
        x: y,
        y: None,
        v: None,
    });
    out.time = field.time;
    for i in 0..a.nx() {
        for j in 0..a.ny() {
            for k in 0..a.nv() {
                out.values[j] += field.values[a.index(i, j, k)];
            }
        }
    }
    for v in &mut out.values {
        *v *= dxv;
    }
    Some(out)
}

/// Density histogram of scalar samples on `axis`, normalized by the total
/// sample count so samples outside the axis show up as missing mass.
pub fn histogram(samples: impl IntoIterator<Item = f64>, axis: Axis) -> DensityField {
    let mut field = DensityField::zeros(Axes {
        x: axis,
        y: None,
        v: None,
    });
    let mut total = 0usize;
    for s in samples {
        total += 1;
        if let Some(i) = axis.locate(s) {
            field.values[i] += 1.0;
        }
    }
    if total > 0 {
        let scale = 1.0 / (total as f64 * axis.width());
        field.values.iter_mut().for_each(|v| *v *= scale);
    }
    field
}
