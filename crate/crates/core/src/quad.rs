//! Compensated summation and composite Simpson quadrature.

/// Neumaier-compensated accumulator. Keeps long sums accurate to a few ulps
/// independent of term count.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Integral over [a, b] by Simpson's rule applied per cell with midpoint
/// samples; fourth-order accurate, any cell count >= 1.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cells: usize) -> f64 {
    assert!(cells >= 1, "simpson needs at least one cell");
    let h = (b - a) / cells as f64;
    let mut acc = CompensatedSum::new();
    let mut left = f(a);
    for k in 0..cells {
        let x0 = a + k as f64 * h;
        let x1 = a + (k + 1) as f64 * h;
        let mid = f(0.5 * (x0 + x1));
        let right = f(x1);
        acc.add((h / 6.0) * (left + 4.0 * mid + right));
        left = right;
    }
    acc.value()
}

/// Prefix integrals of f at the given ascending nodes: out[i] = integral from
/// nodes[0] to nodes[i], Simpson per cell.
pub fn simpson_prefix<F: Fn(f64) -> f64>(f: F, nodes: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    if nodes.is_empty() {
        return out;
    }
    let mut left = f(nodes[0]);
    for w in nodes.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let h = x1 - x0;
        let mid = f(0.5 * (x0 + x1));
        let right = f(x1);
        acc.add((h / 6.0) * (left + 4.0 * mid + right));
        out.push(acc.value());
        left = right;
    }
    out
}
