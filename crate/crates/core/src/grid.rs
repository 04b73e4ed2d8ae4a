//! Periodic square grids and the fields that live on them.

use crate::error::{Error, Result};
use crate::profiles::{SpaceTime, Vec2};

/// Uniform periodic grid on `[-L, L)²` with `n` nodes per side.
///
/// Node `(i, j)` sits at `(-L + i h, -L + j h)` with `h = 2L / n`, the centre
/// of a cell of area `h²`; the origin is node `(n/2, n/2)`. Storage is
/// row-major with `x` fastest: index `j * n + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two >= 16"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half_width = {half_width} must be positive"
            )));
        }
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cell(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.cell();
        h * h
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.cell()
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Vec2 {
        [self.coord(idx % self.n), self.coord(idx / self.n)]
    }

    pub fn origin_index(&self) -> usize {
        (self.n / 2) * self.n + self.n / 2
    }

    /// Iterator over `(index, position)` of every node.
    pub fn points(&self) -> impl Iterator<Item = (usize, Vec2)> + '_ {
        (0..self.len()).map(move |k| (k, self.point(k)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Vec2) -> f64) -> Self {
        let values = grid.points().map(|(_, x)| f(x)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Sequential cell-sum `Σ f h²` in storage order.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Shifts the field by whole cells with periodic wrap-around.
    pub fn roll(&self, di: usize, dj: usize) -> Self {
        let n = self.grid.n;
        let mut out = vec![0.0; self.values.len()];
        for j in 0..n {
            for i in 0..n {
                out[((j + dj) % n) * n + (i + di) % n] = self.values[j * n + i];
            }
        }
        Self {
            grid: self.grid,
            values: out,
        }
    }
}

/// Two-component field sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
        }
    }

    pub fn from_components(x: ScalarField, y: ScalarField) -> Result<Self> {
        if x.grid != y.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: x.grid,
            x: x.values,
            y: y.values,
        })
    }

    pub(crate) fn from_raw(grid: Grid, x: Vec<f64>, y: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), grid.len());
        debug_assert_eq!(y.len(), grid.len());
        Self { grid, x, y }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Vec2) -> Vec2) -> Self {
        let (x, y) = grid.points().map(|(_, p)| f(p)).map(|v| (v[0], v[1])).unzip();
        Self { grid, x, y }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn components_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.x, &mut self.y)
    }

    pub fn component(&self, c: usize) -> ScalarField {
        let values = if c == 0 { self.x.clone() } else { self.y.clone() };
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn at(&self, idx: usize) -> Vec2 {
        [self.x[idx], self.y[idx]]
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let values = self.x.iter().zip(&self.y).map(|(a, b)| a.hypot(*b)).collect();
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.x.iter_mut().chain(self.y.iter_mut()).for_each(|v| *v *= c);
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        for (v, o) in self.x.iter_mut().zip(&other.x) {
            *v += a * o;
        }
        for (v, o) in self.y.iter_mut().zip(&other.y) {
            *v += a * o;
        }
        Ok(())
    }

    pub fn max_magnitude(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}

/// Samples a time-dependent scalar closed form at the nodes.
pub fn sample_scalar(grid: Grid, t: f64, f: impl Fn(SpaceTime) -> f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| f(SpaceTime::new(x, t)))
}

/// Samples a time-dependent vector closed form at the nodes.
pub fn sample_vector(grid: Grid, t: f64, f: impl Fn(SpaceTime) -> Vec2) -> VectorField {
    VectorField::from_fn(grid, |x| f(SpaceTime::new(x, t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{oseen_velocity, oseen_vorticity};
    use std::f64::consts::PI;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(48, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        let g = Grid::new(64, 4.0).unwrap();
        assert_eq!(g.cell(), 0.125);
        assert_eq!(g.point(g.origin_index()), [0.0, 0.0]);
    }

    #[test]
    fn sampled_gaussian_peak() {
        let g = Grid::new(64, 10.0).unwrap();
        let xi = sample_scalar(g, 0.0, oseen_vorticity);
        assert_eq!(xi.values()[g.origin_index()], 1.0 / (4.0 * PI));
        assert_eq!(xi.max_abs(), 1.0 / (4.0 * PI));
    }

    #[test]
    fn sample_zero_is_zero() {
        let g = Grid::new(32, 3.0).unwrap();
        let z = sample_scalar(g, 1.0, |_| 0.0);
        assert_eq!(z, ScalarField::zeros(g));
    }

    #[test]
    fn sampled_oseen_velocity_has_no_radial_part() {
        let g = Grid::new(32, 6.0).unwrap();
        let th = sample_vector(g, 0.5, oseen_velocity);
        for (k, x) in g.points() {
            let u = th.at(k);
            assert!((u[0] * x[0] + u[1] * x[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn roll_wraps_around() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0] + 10.0 * x[1]);
        let r = f.roll(3, 5);
        assert_eq!(r.values()[5 * 16 + 3], f.values()[0]);
        assert_eq!(r.roll(13, 11), f);
    }
}
