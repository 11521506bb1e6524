//! Interpolation tables.
//!
//! The analytic displacement laws are expensive pointwise, so they get
//! evaluated once on a grid and then read through these tables. Grids may be
//! non-uniform (the pdf tabulations grade their nodes toward square-root
//! endpoint singularities), hence the binary-search lookup.

/// Piecewise-linear function on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct Tabulated1D {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Tabulated1D {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() >= 2, "a table needs at least two nodes, got {}", xs.len());
        assert_eq!(xs.len(), ys.len(), "node and value counts differ");
        assert!(
            xs.windows(2).all(|w| w[0] < w[1]),
            "table nodes must be strictly increasing"
        );
        Self { xs, ys }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(xs: Vec<f64>, f: F) -> Self {
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Linear interpolation, clamped to the boundary values outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= *self.xs.last().unwrap() {
            return *self.ys.last().unwrap();
        }
        let hi = self.xs.partition_point(|&v| v < x);
        let lo = hi - 1;
        let t = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        self.ys[lo] + t * (self.ys[hi] - self.ys[lo])
    }

    /// Trapezoid integral over the whole grid.
    pub fn integral(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Running trapezoid integral, anchored at 0 on the first node.
    pub fn cumulative(&self) -> Tabulated1D {
        let mut acc = Vec::with_capacity(self.xs.len());
        acc.push(0.0);
        let mut sum = 0.0;
        for i in 1..self.xs.len() {
            sum += 0.5 * (self.xs[i] - self.xs[i - 1]) * (self.ys[i] + self.ys[i - 1]);
            acc.push(sum);
        }
        Tabulated1D::new(self.xs.clone(), acc)
    }

    /// Applies `f` to every stored value in place.
    pub fn map_values<F: Fn(f64) -> f64>(mut self, f: F) -> Self {
        for y in &mut self.ys {
            *y = f(*y);
        }
        self
    }
}

/// Bilinear interpolation on a rectangular (possibly non-uniform) grid,
/// values stored row-major as `values[ix * ny + iy]`.
#[derive(Debug, Clone)]
pub struct Grid2D {
    xs: Vec<f64>,
    ys: Vec<f64>,
    values: Vec<f64>,
}

impl Grid2D {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, values: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && ys.len() >= 2, "grid needs at least 2x2 nodes");
        assert_eq!(values.len(), xs.len() * ys.len(), "value count does not match grid shape");
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "x nodes must be strictly increasing");
        assert!(ys.windows(2).all(|w| w[0] < w[1]), "y nodes must be strictly increasing");
        Self { xs, ys, values }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(xs: Vec<f64>, ys: Vec<f64>, f: F) -> Self {
        let mut values = Vec::with_capacity(xs.len() * ys.len());
        for &x in &xs {
            for &y in &ys {
                values.push(f(x, y));
            }
        }
        Self::new(xs, ys, values)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn cell(axis: &[f64], v: f64) -> (usize, f64) {
        if v <= axis[0] {
            return (0, 0.0);
        }
        let n = axis.len();
        if v >= axis[n - 1] {
            return (n - 2, 1.0);
        }
        let hi = axis.partition_point(|&a| a < v);
        let lo = hi - 1;
        (lo, (v - axis[lo]) / (axis[hi] - axis[lo]))
    }

    /// Bilinear interpolation, clamped to the grid boundary.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (ix, tx) = Self::cell(&self.xs, x);
        let (iy, ty) = Self::cell(&self.ys, y);
        let ny = self.ys.len();
        let v00 = self.values[ix * ny + iy];
        let v01 = self.values[ix * ny + iy + 1];
        let v10 = self.values[(ix + 1) * ny + iy];
        let v11 = self.values[(ix + 1) * ny + iy + 1];
        let a = v00 + tx * (v10 - v00);
        let b = v01 + tx * (v11 - v01);
        a + ty * (b - a)
    }
}

/// `n + 1` evenly spaced nodes covering `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1 && b > a, "linspace needs b > a and at least one interval");
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}
