/// Natural cubic spline through `(x_i, y_i)`, with first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the nodes
    m: Vec<f64>,
}

impl NaturalSpline {
    /// `x` must be strictly increasing with at least two nodes.
    pub(crate) fn new(x: Vec<f64>, y: Vec<f64>) -> Option<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || x.windows(2).any(|w| !(w[1] > w[0])) {
            return None;
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior nodes.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Some(NaturalSpline { x, y, m })
    }

    pub(crate) fn nodes(&self) -> &[f64] {
        &self.x
    }

    /// Value, first and second derivative at `t` (extrapolates the end cubics).
    pub(crate) fn eval(&self, t: f64) -> (f64, f64, f64) {
        let n = self.x.len();
        let i = self.x.partition_point(|&xi| xi <= t).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let d2 = a * m0 + b * m1;
        (value, d1, d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data_exactly() {
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.0 + 3.0 * t).collect();
        let s = NaturalSpline::new(x, y).unwrap();
        let (v, d1, d2) = s.eval(1.3);
        assert!((v - 5.9).abs() < 1e-14);
        assert!((d1 - 3.0).abs() < 1e-14);
        assert!(d2.abs() < 1e-14);
    }

    #[test]
    fn interpolates_nodes_and_is_natural() {
        let x = vec![0.0, 0.4, 1.0, 1.7, 2.0];
        let y = vec![1.0, 1.3, 0.8, 1.1, 1.5];
        let s = NaturalSpline::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi).0 - yi).abs() < 1e-14);
        }
        assert!(s.eval(0.0).2.abs() < 1e-14);
        assert!(s.eval(2.0).2.abs() < 1e-13);
    }

    #[test]
    fn rejects_unsorted_nodes() {
        assert!(NaturalSpline::new(vec![0.0, 0.0, 1.0], vec![1.0; 3]).is_none());
        assert!(NaturalSpline::new(vec![0.0], vec![1.0]).is_none());
    }
}
