//! Monotone cubic (Fritsch-Carlson) interpolation used by the rescaling
//! maps. Queries outside the data range return zero, matching the
//! Dirichlet truncation of all fields.

/// Piecewise-cubic Hermite interpolant with Fritsch-Carlson slopes.
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` must be strictly increasing.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2);
        let n = x.len();
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        let mut slope = vec![0.0; n];
        slope[0] = delta[0];
        slope[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                slope[i] = 0.0;
            } else {
                // harmonic mean weighted by interval lengths
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        // clamp endpoint slopes to keep monotone segments monotone
        for (i, d) in [(0usize, delta[0]), (n - 1, delta[n - 2])] {
            if slope[i] * d <= 0.0 {
                slope[i] = 0.0;
            } else if slope[i].abs() > 3.0 * d.abs() {
                slope[i] = 3.0 * d;
            }
        }
        Self { x, y, slope }
    }

    pub fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        if xq < self.x[0] || xq > self.x[n - 1] {
            return 0.0;
        }
        // x is uniform up to the first cell; binary search keeps this general
        let j = match self
            .x
            .binary_search_by(|v| v.partial_cmp(&xq).expect("finite"))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let h = self.x[j + 1] - self.x[j];
        let t = (xq - self.x[j]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[j] + h10 * h * self.slope[j] + h01 * self.y[j + 1] + h11 * h * self.slope[j + 1]
    }
}
