use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Complex radial profile `u(r)` sampled on a shared grid.
///
/// Fields are immutable after construction and cheap to clone; the grid is
/// held behind an `Arc` so fields and grids can be shared across threads.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        let field = Self { grid, values };
        field.check_finite()?;
        Ok(field)
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Samples a real-valued profile.
    pub fn from_real_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid
            .radii()
            .iter()
            .map(|&r| Complex64::new(f(r), 0.0))
            .collect();
        Self::new(grid, values)
    }

    /// Samples a complex-valued profile.
    pub fn from_complex_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.radii().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm_sqr() == 0.0)
    }

    /// True when the field has zero imaginary part and nonnegative real
    /// part at every node (the `real_nonneg` tag of ground-state profiles).
    pub fn is_real_nonneg(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0 && v.re >= 0.0)
    }

    pub fn check_finite(&self) -> Result<()> {
        if self
            .values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidField("non-finite value".into()));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// Radial derivative `u'(r)`: centered second-order differences in the
    /// interior, one-sided second-order stencils at both ends.
    pub fn derivative(&self) -> Result<Vec<Complex64>> {
        let n = self.values.len();
        if n < 3 {
            return Err(Error::GridTooSmall { need: 3, got: n });
        }
        let h = self.grid.spacing();
        let v = &self.values;
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        Ok(d)
    }
}
