//! Foliations of the annulus by graphs and their generating functions.
//!
//! A foliation assigns to each label c in a window a leaf theta -> eta_c(theta),
//! normalized so the mean of eta_c over the circle equals c. The generating
//! function u(theta, c) integrates eta_c - c in the angle; its c-derivative
//! shifts angles onto the straightened picture and its regularity decides
//! whether the foliation can be straightened at all.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::frac;
use crate::quad::{simpson, simpson_prefix};

pub type LeafFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Analytic partial derivatives of (theta, c) -> eta_c(theta), when known.
#[derive(Clone)]
pub struct FoliationPartials {
    pub d_theta: LeafFn,
    pub d_c: LeafFn,
}

/// A foliation by graphs over the circle, labeled by leaf means.
#[derive(Clone)]
pub struct FoliationSpec {
    leaf: LeafFn,
    /// Label window (c_min, c_max) on which leaves are defined.
    pub window: (f64, f64),
    partials: Option<FoliationPartials>,
}

impl FoliationSpec {
    pub fn new(leaf: LeafFn, window: (f64, f64)) -> Self {
        Self {
            leaf,
            window,
            partials: None,
        }
    }

    pub fn with_partials(mut self, partials: FoliationPartials) -> Self {
        self.partials = Some(partials);
        self
    }

    /// The trivial foliation by horizontal circles.
    pub fn standard(window: (f64, f64)) -> Self {
        Self::new(Arc::new(|_, c| c), window).with_partials(FoliationPartials {
            d_theta: Arc::new(|_, _| 0.0),
            d_c: Arc::new(|_, _| 1.0),
        })
    }

    /// Leaf value eta_c(theta); the angle is reduced mod 1.
    pub fn leaf(&self, theta: f64, c: f64) -> f64 {
        (self.leaf)(frac(theta), c)
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn d_theta(&self, theta: f64, c: f64) -> Option<f64> {
        self.partials.as_ref().map(|p| (p.d_theta)(frac(theta), c))
    }

    pub fn d_c(&self, theta: f64, c: f64) -> Option<f64> {
        self.partials.as_ref().map(|p| (p.d_c)(frac(theta), c))
    }

    /// Same leaves with the analytic partials dropped, forcing every consumer
    /// onto its finite-difference path.
    pub fn without_partials(&self) -> Self {
        Self {
            leaf: self.leaf.clone(),
            window: self.window,
            partials: None,
        }
    }
}

/// Mean of a leaf over the circle.
pub fn leaf_mean(fol: &FoliationSpec, c: f64, cells: usize) -> f64 {
    simpson(|t| fol.leaf(t, c), 0.0, 1.0, cells)
}

/// Dense samples of u and its partials on a rectangular (theta, c) grid.
///
/// Angle nodes run over 0 = theta_0 < ... < theta_n = 1 (the last node
/// duplicates the first by periodicity); labels are the c-window nodes.
/// Values are stored row-major with the angle index as the row.
#[derive(Clone, Debug)]
pub struct GeneratingGrid {
    pub theta: Vec<f64>,
    pub c: Vec<f64>,
    pub u: Vec<f64>,
    pub du_dtheta: Vec<f64>,
    pub du_dc: Vec<f64>,
    /// True when the partial grids came from analytic leaf derivatives
    /// rather than finite differences of u.
    pub analytic_partials: bool,
}

/// Construction parameters for [`build_generating_function`].
#[derive(Clone, Copy, Debug)]
pub struct GridParams {
    /// Angle cells (nodes = cells + 1). At least 64.
    pub n_theta: usize,
    /// Label nodes across the window. At least 16.
    pub n_c: usize,
    pub window: (f64, f64),
    /// Bound on |integral of eta_c - c| over the circle before the labeling
    /// is declared broken.
    pub label_tol: f64,
}

impl GridParams {
    pub fn new(n_theta: usize, n_c: usize, window: (f64, f64)) -> Self {
        Self {
            n_theta,
            n_c,
            window,
            label_tol: 1e-6,
        }
    }

    pub fn with_label_tol(mut self, tol: f64) -> Self {
        self.label_tol = tol;
        self
    }
}

impl GeneratingGrid {
    #[inline]
    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    #[inline]
    pub fn n_c(&self) -> usize {
        self.c.len()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.c.len() + j
    }

    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[self.idx(i, j)]
    }

    #[inline]
    pub fn du_dtheta_at(&self, i: usize, j: usize) -> f64 {
        self.du_dtheta[self.idx(i, j)]
    }

    #[inline]
    pub fn du_dc_at(&self, i: usize, j: usize) -> f64 {
        self.du_dc[self.idx(i, j)]
    }

    fn theta_cell(&self, theta: f64) -> (usize, f64) {
        let n = self.theta.len() - 1; // cells
        let t = frac(theta) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        (i, t - i as f64)
    }

    fn c_cell(&self, c: f64) -> (usize, f64) {
        let m = self.c.len();
        let (lo, hi) = (self.c[0], self.c[m - 1]);
        let s = ((c - lo) / (hi - lo)).clamp(0.0, 1.0) * (m - 1) as f64;
        let j = (s.floor() as usize).min(m - 2);
        (j, s - j as f64)
    }

    fn bilinear(&self, grid: &[f64], theta: f64, c: f64) -> f64 {
        let (i, s) = self.theta_cell(theta);
        let (j, t) = self.c_cell(c);
        let m = self.c.len();
        let v00 = grid[i * m + j];
        let v10 = grid[(i + 1) * m + j];
        let v01 = grid[i * m + j + 1];
        let v11 = grid[(i + 1) * m + j + 1];
        (1.0 - s) * ((1.0 - t) * v00 + t * v01) + s * ((1.0 - t) * v10 + t * v11)
    }

    /// Bilinear interpolants; the angle wraps, the label clamps to the window.
    pub fn u_interp(&self, theta: f64, c: f64) -> f64 {
        self.bilinear(&self.u, theta, c)
    }

    pub fn du_dtheta_interp(&self, theta: f64, c: f64) -> f64 {
        self.bilinear(&self.du_dtheta, theta, c)
    }

    pub fn du_dc_interp(&self, theta: f64, c: f64) -> f64 {
        self.bilinear(&self.du_dc, theta, c)
    }

    /// Leaf reconstruction c + du_dtheta at a grid node.
    pub fn leaf_value(&self, i: usize, j: usize) -> f64 {
        self.c[j] + self.du_dtheta_at(i, j)
    }

    /// Writes rows `theta,c,u,du_dtheta,du_dc` in row-major node order.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,c,u,du_dtheta,du_dc")?;
        for i in 0..self.theta.len() {
            for j in 0..self.c.len() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    self.theta[i],
                    self.c[j],
                    self.u_at(i, j),
                    self.du_dtheta_at(i, j),
                    self.du_dc_at(i, j)
                )?;
            }
        }
        Ok(())
    }
}

/// Tabulates u(theta, c) = integral of (eta_c - c) from 0 to theta together
/// with both partials. The angle partial is the integrand itself; the label
/// partial integrates the analytic d_c when the foliation carries one and
/// falls back to central differences of u across label columns otherwise.
pub fn build_generating_function(
    fol: &FoliationSpec,
    params: &GridParams,
) -> Result<GeneratingGrid> {
    if params.n_theta < 64 {
        return Err(Error::GridTooSmall {
            what: "angle cells",
            need: 64,
            got: params.n_theta,
        });
    }
    if params.n_c < 16 {
        return Err(Error::GridTooSmall {
            what: "label nodes",
            need: 16,
            got: params.n_c,
        });
    }
    let (c_lo, c_hi) = params.window;
    if !(c_hi > c_lo) {
        return Err(Error::InvalidArgument("empty label window".into()));
    }
    let n = params.n_theta;
    let m = params.n_c;
    let theta: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let c: Vec<f64> = (0..m)
        .map(|j| c_lo + (c_hi - c_lo) * j as f64 / (m - 1) as f64)
        .collect();

    struct Column {
        u: Vec<f64>,
        du_dtheta: Vec<f64>,
        du_dc: Option<Vec<f64>>,
        label_dev: f64,
    }

    let columns: Vec<Column> = c
        .par_iter()
        .map(|&cj| {
            let u = simpson_prefix(|t| fol.leaf(t, cj) - cj, &theta);
            let du_dtheta: Vec<f64> = theta.iter().map(|&t| fol.leaf(t, cj) - cj).collect();
            let du_dc = if fol.has_partials() {
                Some(simpson_prefix(
                    |t| fol.d_c(t, cj).expect("partials present") - 1.0,
                    &theta,
                ))
            } else {
                None
            };
            let label_dev = u.last().copied().unwrap_or(0.0).abs();
            Column {
                u,
                du_dtheta,
                du_dc,
                label_dev,
            }
        })
        .collect();

    for (j, col) in columns.iter().enumerate() {
        if col.label_dev > params.label_tol {
            return Err(Error::LeafLabel {
                c: c[j],
                mean: c[j] + col.u.last().copied().unwrap_or(0.0),
                dev: col.label_dev,
            });
        }
    }

    let nodes = (n + 1) * m;
    let mut u = vec![0.0; nodes];
    let mut du_dtheta = vec![0.0; nodes];
    let mut du_dc = vec![0.0; nodes];
    for (j, col) in columns.iter().enumerate() {
        for i in 0..=n {
            u[i * m + j] = col.u[i];
            du_dtheta[i * m + j] = col.du_dtheta[i];
            if let Some(dc) = &col.du_dc {
                du_dc[i * m + j] = dc[i];
            }
        }
    }
    let analytic = fol.has_partials();
    if !analytic {
        for i in 0..=n {
            for j in 0..m {
                let (jl, jr) = (j.saturating_sub(1), (j + 1).min(m - 1));
                du_dc[i * m + j] = (u[i * m + jr] - u[i * m + jl]) / (c[jr] - c[jl]);
            }
        }
    }
    Ok(GeneratingGrid {
        theta,
        c,
        u,
        du_dtheta,
        du_dc,
        analytic_partials: analytic,
    })
}

/// Jump analysis of du_dc across label columns at dyadic strides 4, 2, 1.
/// A genuine discontinuity keeps its size as the stride shrinks; a smooth
/// modulus halves per refinement.
#[derive(Clone, Debug)]
pub struct C1Report {
    /// Largest jump of du_dc between adjacent label nodes.
    pub max_jump: f64,
    /// (theta, c midpoint) of that jump.
    pub location: (f64, f64),
    /// Max jump at label strides [4, 2, 1].
    pub stride_jumps: [f64; 3],
    /// [stride2/stride4, stride1/stride2]; both >= threshold flags a
    /// discontinuity candidate.
    pub ratios: [f64; 2],
    /// Flagged candidate (c, jump) when the jump survives both refinements.
    pub discontinuity: Option<(f64, f64)>,
}

/// Jump ratio above which a refinement step is considered non-contracting.
pub const C1_JUMP_RATIO: f64 = 0.8;

pub fn c1_report(grid: &GeneratingGrid) -> Result<C1Report> {
    let m = grid.n_c();
    if m < 64 {
        return Err(Error::GridTooSmall {
            what: "label nodes",
            need: 64,
            got: m,
        });
    }
    let n = grid.n_theta() - 1;
    let jump_at_stride = |s: usize| -> (f64, usize, usize) {
        let mut best = (0.0f64, 0usize, 0usize);
        for i in 0..n {
            for j in 0..m - s {
                let d = (grid.du_dc_at(i, j + s) - grid.du_dc_at(i, j)).abs();
                if d > best.0 {
                    best = (d, i, j);
                }
            }
        }
        best
    };
    let (j4, _, _) = jump_at_stride(4);
    let (j2, _, _) = jump_at_stride(2);
    let (j1, i1, jj1) = jump_at_stride(1);
    let ratios = [
        if j4 > 0.0 { j2 / j4 } else { 0.0 },
        if j2 > 0.0 { j1 / j2 } else { 0.0 },
    ];
    let location = (grid.theta[i1], 0.5 * (grid.c[jj1] + grid.c[jj1 + 1]));
    let discontinuity = if j1 > 0.0 && ratios[0] >= C1_JUMP_RATIO && ratios[1] >= C1_JUMP_RATIO {
        Some((location.1, j1))
    } else {
        None
    };
    Ok(C1Report {
        max_jump: j1,
        location,
        stride_jumps: [j4, j2, j1],
        ratios,
        discontinuity,
    })
}

/// Log-log fit of sup-norm leaf distances against label gaps.
#[derive(Clone, Copy, Debug)]
pub struct HolderFit {
    pub exponent: f64,
    pub constant: f64,
    pub r_squared: f64,
    pub pairs_used: usize,
}

/// Fits sup |eta_c' - eta_c| ~ constant * |c' - c|^exponent over label pairs
/// with log-uniform gaps in [1e-6, 1e-1]. The sup is sampled on a 1024-point
/// angle lattice (which contains the coarser dyadic lattices).
pub fn holder_fit(
    fol: &FoliationSpec,
    window: (f64, f64),
    n_pairs: usize,
    rng: &mut impl Rng,
) -> Result<HolderFit> {
    if n_pairs < 20 {
        return Err(Error::InsufficientData {
            what: "holder pairs",
            got: n_pairs,
            need: 20,
        });
    }
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::InvalidArgument("empty label window".into()));
    }
    let span = hi - lo;
    let mut xs = Vec::with_capacity(n_pairs);
    let mut ys = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        let gap = 10f64.powf(rng.random_range(-6.0..-1.0)).min(0.9 * span);
        let base = lo + rng.random_range(0.0..(span - gap));
        let res = 1024usize;
        let sup = (0..res)
            .map(|i| {
                let t = i as f64 / res as f64;
                (fol.leaf(t, base + gap) - fol.leaf(t, base)).abs()
            })
            .fold(0.0f64, f64::max);
        if sup >= 1e-15 {
            xs.push(gap.ln());
            ys.push(sup.ln());
        }
    }
    if xs.is_empty() {
        return Err(Error::DegenerateFoliation { floor: 1e-15 });
    }
    if xs.len() < 10 {
        return Err(Error::InsufficientData {
            what: "non-degenerate holder pairs",
            got: xs.len(),
            need: 10,
        });
    }
    let (slope, intercept, r2) = ols(&xs, &ys);
    Ok(HolderFit {
        exponent: slope,
        constant: intercept.exp(),
        r_squared: r2,
        pairs_used: xs.len(),
    })
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Two-sided Lipschitz constants of c -> eta_c plus almost-everywhere bounds
/// on the mixed partial of u.
#[derive(Clone, Copy, Debug)]
pub struct LipschitzFit {
    /// max of |eta_{c'} - eta_c| / |c' - c| over sampled pairs.
    pub k_upper: f64,
    /// min of the same ratios.
    pub k_lower: f64,
    /// min over grid nodes of the finite-difference mixed partial
    /// d(eta)/dc - 1.
    pub k_minus: f64,
    /// max of the same.
    pub k_plus: f64,
    pub pairs: usize,
    /// Set when k_lower collapses to zero: the family is not biLipschitz on
    /// the window. Reported, not an error.
    pub degenerate: bool,
}

/// Samples leaf-difference ratios on a grid, pairing labels at power-of-two
/// strides, and bounds the mixed partial by central differences in c.
pub fn bilipschitz_fit(
    fol: &FoliationSpec,
    window: (f64, f64),
    n_theta: usize,
    n_c: usize,
) -> Result<LipschitzFit> {
    if n_theta < 4 || n_c < 4 {
        return Err(Error::GridTooSmall {
            what: "bilipschitz grid nodes per axis",
            need: 4,
            got: n_theta.min(n_c),
        });
    }
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::InvalidArgument("empty label window".into()));
    }
    let cs: Vec<f64> = (0..n_c)
        .map(|j| lo + (hi - lo) * j as f64 / (n_c - 1) as f64)
        .collect();
    let mut k_upper = f64::NEG_INFINITY;
    let mut k_lower = f64::INFINITY;
    let mut pairs = 0usize;
    for i in 0..n_theta {
        let t = i as f64 / n_theta as f64;
        let leaves: Vec<f64> = cs.iter().map(|&c| fol.leaf(t, c)).collect();
        let mut s = 1usize;
        while s < n_c {
            for j in 0..n_c - s {
                let ratio = (leaves[j + s] - leaves[j]).abs() / (cs[j + s] - cs[j]);
                k_upper = k_upper.max(ratio);
                k_lower = k_lower.min(ratio);
                pairs += 1;
            }
            s *= 2;
        }
    }
    let mut k_minus = f64::INFINITY;
    let mut k_plus = f64::NEG_INFINITY;
    for i in 0..n_theta {
        let t = i as f64 / n_theta as f64;
        for j in 1..n_c - 1 {
            let mixed =
                (fol.leaf(t, cs[j + 1]) - fol.leaf(t, cs[j - 1])) / (cs[j + 1] - cs[j - 1]) - 1.0;
            k_minus = k_minus.min(mixed);
            k_plus = k_plus.max(mixed);
        }
    }
    Ok(LipschitzFit {
        k_upper,
        k_lower,
        k_minus,
        k_plus,
        pairs,
        degenerate: k_lower <= 1e-9,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedMethod {
    /// Sixth-order cross-derivatives of the two analytic partial grids.
    AnalyticCross,
    /// Adjacent-cell comparison of cross differences of u; coarser, used
    /// when the grid has no analytic partials.
    StaggeredCells,
}

/// Symmetry defect of the mixed second derivative of u across the grid.
#[derive(Clone, Debug)]
pub struct MixedPartialsReport {
    pub max_discrepancy: f64,
    /// (theta, c) of the worst node.
    pub location: (f64, f64),
    /// Per-label-row max discrepancy, as (c, value).
    pub row_max: Vec<(f64, f64)>,
    pub method: MixedMethod,
}

const D6_W: [f64; 3] = [45.0, -9.0, 1.0];

fn d6_theta(grid: &GeneratingGrid, values: &[f64], i: usize, j: usize, h: f64) -> f64 {
    // periodic in the angle: wrap over the n distinct nodes
    let n = grid.n_theta() - 1;
    let m = grid.n_c();
    let at = |ii: isize| -> f64 {
        let w = ii.rem_euclid(n as isize) as usize;
        values[w * m + j]
    };
    let i = i as isize;
    let mut acc = 0.0;
    for (k, w) in D6_W.iter().enumerate() {
        let k1 = (k + 1) as isize;
        acc += w * (at(i + k1) - at(i - k1));
    }
    acc / (60.0 * h)
}

fn d6_c(grid: &GeneratingGrid, values: &[f64], i: usize, j: usize, h: f64) -> f64 {
    let m = grid.n_c();
    let mut acc = 0.0;
    for (k, w) in D6_W.iter().enumerate() {
        let k1 = k + 1;
        acc += w * (values[i * m + j + k1] - values[i * m + j - k1]);
    }
    acc / (60.0 * h)
}

/// Compares the two routes to the mixed partial of u. On grids with analytic
/// partials the routes are sixth-order cross-derivatives of du_dc (in the
/// angle) and du_dtheta (in the label); these agree to truncation error where
/// u is twice differentiable and disagree O(1) along a fold of du_dc.
/// Without analytic partials, cross differences of u on adjacent label cells
/// are compared instead.
pub fn mixed_partials_check(grid: &GeneratingGrid) -> Result<MixedPartialsReport> {
    let n = grid.n_theta() - 1;
    let m = grid.n_c();
    if m < 64 || n < 64 {
        return Err(Error::GridTooSmall {
            what: "grid nodes per axis",
            need: 64,
            got: m.min(n),
        });
    }
    let dth = 1.0 / n as f64;
    let dc = (grid.c[m - 1] - grid.c[0]) / (m - 1) as f64;
    let mut row_max: Vec<(f64, f64)> = Vec::new();
    let mut max_disc = 0.0f64;
    let mut loc = (0.0, 0.0);
    if grid.analytic_partials {
        for j in 3..m - 3 {
            let mut row = 0.0f64;
            for i in 0..n {
                let r1 = d6_theta(grid, &grid.du_dc, i, j, dth);
                let r2 = d6_c(grid, &grid.du_dtheta, i, j, dc);
                let d = (r1 - r2).abs();
                if d > row {
                    row = d;
                }
                if d > max_disc {
                    max_disc = d;
                    loc = (grid.theta[i], grid.c[j]);
                }
            }
            row_max.push((grid.c[j], row));
        }
        Ok(MixedPartialsReport {
            max_discrepancy: max_disc,
            location: loc,
            row_max,
            method: MixedMethod::AnalyticCross,
        })
    } else {
        // cross difference of u per cell, compared across adjacent label cells
        let cell = |i: usize, j: usize| -> f64 {
            let mm = grid.n_c();
            let dcj = grid.c[j + 1] - grid.c[j];
            (grid.u[(i + 1) * mm + j + 1] - grid.u[(i + 1) * mm + j] - grid.u[i * mm + j + 1]
                + grid.u[i * mm + j])
                / (dth * dcj)
        };
        for j in 1..m - 1 {
            let mut row = 0.0f64;
            for i in 0..n {
                let d = (cell(i, j) - cell(i, j - 1)).abs();
                if d > row {
                    row = d;
                }
                if d > max_disc {
                    max_disc = d;
                    loc = (grid.theta[i], grid.c[j]);
                }
            }
            row_max.push((grid.c[j], row));
        }
        Ok(MixedPartialsReport {
            max_discrepancy: max_disc,
            location: loc,
            row_max,
            method: MixedMethod::StaggeredCells,
        })
    }
}

/// Normalized area between two leaves over an angle strip:
/// integral of (eta_{c2} - eta_{c1}) over [theta1, theta2], divided by
/// (c2 - c1). Over the full circle this equals 1 for any correctly labeled
/// foliation; it is the natural leafwise measure of the strip.
pub fn area_between(
    fol: &FoliationSpec,
    c1: f64,
    c2: f64,
    theta1: f64,
    theta2: f64,
    cells: usize,
) -> Result<f64> {
    if !(c2 > c1) {
        return Err(Error::InvalidArgument("labels must satisfy c1 < c2".into()));
    }
    if !(theta2 > theta1) || theta2 - theta1 > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(
            "need theta1 < theta2 <= theta1 + 1".into(),
        ));
    }
    let integral = simpson(
        |t| fol.leaf(t, c2) - fol.leaf(t, c1),
        theta1,
        theta2,
        cells.max(16),
    );
    Ok(integral / (c2 - c1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cosine_foliation() -> FoliationSpec {
        // eta_c = c + c^2 cos(2 pi theta): smooth, mean c, u = c^2 sin(2 pi theta)/(2 pi)
        FoliationSpec::new(
            Arc::new(|t: f64, c: f64| c + c * c * (2.0 * PI * t).cos()),
            (0.1, 0.9),
        )
        .with_partials(FoliationPartials {
            d_theta: Arc::new(|t, c| -2.0 * PI * c * c * (2.0 * PI * t).sin()),
            d_c: Arc::new(|t, c| 1.0 + 2.0 * c * (2.0 * PI * t).cos()),
        })
    }

    #[test]
    fn grid_matches_closed_form() {
        let fol = cosine_foliation();
        let grid = build_generating_function(&fol, &GridParams::new(128, 33, (0.1, 0.9))).unwrap();
        let mut worst_u = 0.0f64;
        let mut worst_rec = 0.0f64;
        for i in 0..grid.n_theta() {
            for j in 0..grid.n_c() {
                let (t, c) = (grid.theta[i], grid.c[j]);
                let u_exact = c * c * (2.0 * PI * t).sin() / (2.0 * PI);
                worst_u = worst_u.max((grid.u_at(i, j) - u_exact).abs());
                worst_rec = worst_rec.max((grid.leaf_value(i, j) - fol.leaf(t, c)).abs());
            }
        }
        assert!(worst_u < 1e-9, "u error {worst_u:.3e}");
        assert!(worst_rec < 1e-14, "reconstruction error {worst_rec:.3e}");
        // periodicity: u(1, c) == u(0, c) = 0 within the label tolerance
        for j in 0..grid.n_c() {
            assert!(grid.u_at(grid.n_theta() - 1, j).abs() < 1e-9);
        }
    }

    #[test]
    fn analytic_and_difference_label_partials_agree() {
        let fol = cosine_foliation();
        let p = GridParams::new(128, 129, (0.1, 0.9));
        let ga = build_generating_function(&fol, &p).unwrap();
        let gn = build_generating_function(&fol.without_partials(), &p).unwrap();
        assert!(ga.analytic_partials && !gn.analytic_partials);
        let mut worst = 0.0f64;
        for i in 0..ga.n_theta() {
            for j in 1..ga.n_c() - 1 {
                worst = worst.max((ga.du_dc_at(i, j) - gn.du_dc_at(i, j)).abs());
            }
        }
        // central differences carry O(dc^2 * д^3u) truncation
        assert!(worst < 1e-4, "du_dc mismatch {worst:.3e}");
    }

    #[test]
    fn mislabeled_foliation_is_rejected() {
        let fol = FoliationSpec::new(Arc::new(|_t, c| c + 0.05), (0.0, 1.0));
        let err = build_generating_function(&fol, &GridParams::new(64, 16, (0.0, 1.0)));
        assert!(matches!(err, Err(Error::LeafLabel { .. })));
    }

    #[test]
    fn smooth_grid_has_no_c1_flag() {
        let fol = cosine_foliation();
        let grid = build_generating_function(&fol, &GridParams::new(64, 64, (0.1, 0.9))).unwrap();
        let rep = c1_report(&grid).unwrap();
        assert!(rep.discontinuity.is_none(), "ratios {:?}", rep.ratios);
        // jumps shrink linearly with the stride
        assert!(rep.ratios[0] < 0.65 && rep.ratios[1] < 0.65);
    }

    #[test]
    fn holder_exponent_of_smooth_foliation_is_one() {
        // the prefactor 1 + (2c+g)cos varies with the random base label, so
        // the slope carries scatter; a Lipschitz family still fits near 1
        let fol = cosine_foliation();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fit = holder_fit(&fol, (0.1, 0.9), 40, &mut rng).unwrap();
        assert!(
            (fit.exponent - 1.0).abs() < 0.05,
            "exponent {}",
            fit.exponent
        );
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn standard_foliation_constants() {
        let fol = FoliationSpec::standard((-1.0, 1.0));
        let fit = bilipschitz_fit(&fol, (-1.0, 1.0), 16, 17).unwrap();
        assert!((fit.k_upper - 1.0).abs() < 1e-12);
        assert!((fit.k_lower - 1.0).abs() < 1e-12);
        assert!(fit.k_minus.abs() < 1e-12 && fit.k_plus.abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = holder_fit(&fol, (-1.0, 1.0), 30, &mut rng).unwrap();
        assert!((h.exponent - 1.0).abs() < 1e-6);
    }

    #[test]
    fn area_between_is_normalized() {
        let fol = cosine_foliation();
        let a = area_between(&fol, 0.2, 0.6, 0.0, 1.0, 256).unwrap();
        assert!((a - 1.0).abs() < 1e-10, "normalized area {a}");
        assert!(matches!(
            area_between(&fol, 0.6, 0.2, 0.0, 1.0, 64),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            area_between(&fol, 0.2, 0.6, 0.0, 1.5, 64),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn mixed_partials_tiny_on_smooth_grid() {
        let fol = cosine_foliation();
        let grid = build_generating_function(&fol, &GridParams::new(128, 128, (0.1, 0.9))).unwrap();
        let rep = mixed_partials_check(&grid).unwrap();
        assert_eq!(rep.method, MixedMethod::AnalyticCross);
        assert!(
            rep.max_discrepancy < 1e-6,
            "disc {:.3e}",
            rep.max_discrepancy
        );
    }
}
