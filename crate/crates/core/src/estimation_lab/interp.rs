/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Clone, Debug)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    /// `xs` strictly increasing, at least two points.
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len();
        assert!(n >= 2 && ys.len() == n);
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = del[0];
            m[1] = del[0];
        } else {
            for k in 1..n - 1 {
                if del[k - 1] * del[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    m[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
                }
            }
            m[0] = end_slope(h[0], h[1], del[0], del[1]);
            m[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Pchip {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slopes: m,
        }
    }

    fn locate(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Value and derivative; outside the grid the end cubic is extended.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let k = self.locate(x);
        let h = self.xs[k + 1] - self.xs[k];
        let s = (x - self.xs[k]) / h;
        let (y0, y1, m0, m1) = (self.ys[k], self.ys[k + 1], self.slopes[k], self.slopes[k + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let v = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
        let d00 = 6.0 * s * (s - 1.0) / h;
        let d10 = (1.0 - s) * (1.0 - 3.0 * s);
        let d01 = -d00;
        let d11 = s * (3.0 * s - 2.0);
        let d = d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1;
        (v, d)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }
}

/// Three-point end slope, limited to keep the end interval monotone.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_nodes_and_lines() {
        let xs = [0.0, 0.5, 1.5, 2.0];
        let ys = [1.0, 2.0, 4.0, 5.0];
        let p = Pchip::new(&xs, &ys);
        for (x, y) in xs.iter().zip(ys) {
            assert!((p.eval(*x) - y).abs() < 1e-14);
        }
        let (v, d) = p.eval_with_derivative(1.0);
        assert!((v - 3.0).abs() < 1e-12 && (d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn preserves_monotone_data() {
        let xs: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let ys = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 5.0, 5.1, 5.2, 9.0];
        let p = Pchip::new(&xs, &ys);
        let mut last = f64::NEG_INFINITY;
        for k in 0..=900 {
            let v = p.eval(k as f64 * 0.01);
            assert!(v >= last - 1e-12);
            last = v;
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let xs: Vec<f64> = (0..20).map(|k| 0.1 * k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let p = Pchip::new(&xs, &ys);
        let (x, e) = (0.737, 1e-6);
        let fd = (p.eval(x + e) - p.eval(x - e)) / (2.0 * e);
        assert!((fd - p.eval_with_derivative(x).1).abs() < 1e-6);
    }
}
