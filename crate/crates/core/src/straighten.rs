//! Straightening changes of coordinates built from generating grids, the
//! area-preservation audit, Arnol'd-Liouville coordinate verification, and
//! mollified smooth approximants.
//!
//! The straightening sends the straight model (x, c) to annulus coordinates
//! through the defining relations x = theta + du/dc and r = c + du/dtheta.
//! It exists as a homeomorphism exactly when every angle reparametrization
//! theta -> theta + du/dc(theta, c) is injective; the builder refuses grids
//! where that fails, or where du/dc carries a label jump that survives
//! refinement (the obstruction that makes a foliation non-straightenable).

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::foliation::{c1_report, GeneratingGrid};
use crate::geom::{frac, LiftPoint};
use crate::maps::TwistMapSpec;
use crate::rotation::RhoProfile;
use crate::solve::bisect_increasing;

type Map2 = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// Change of coordinates between the straight model (x, c) and the annulus
/// (theta, r). Forward goes straight -> annulus.
#[derive(Clone)]
pub struct StraighteningMap {
    forward: Map2,
    inverse: Map2,
    pub source_grid: Option<Arc<GeneratingGrid>>,
}

impl std::fmt::Debug for StraighteningMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StraighteningMap")
            .field(
                "source_grid",
                &self
                    .source_grid
                    .as_ref()
                    .map(|g| (g.theta.len(), g.c.len())),
            )
            .finish_non_exhaustive()
    }
}

impl StraighteningMap {
    /// Wraps closed-form callables (gallery constructions, identity).
    pub fn from_callables<F, G>(forward: F, inverse: G) -> Self
    where
        F: Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
        G: Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Self {
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            source_grid: None,
        }
    }

    /// Straight (x, c) to annulus (theta, r).
    #[inline]
    pub fn forward(&self, x: f64, c: f64) -> (f64, f64) {
        (self.forward)(x, c)
    }

    /// Annulus (theta, r) to straight (x, c).
    #[inline]
    pub fn inverse(&self, theta: f64, r: f64) -> (f64, f64) {
        (self.inverse)(theta, r)
    }

    /// Max inf-norm defect of inverse(forward(x, c)) over an n-by-n sample
    /// grid with labels inside `window`.
    pub fn roundtrip_defect(&self, n: usize, window: (f64, f64)) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..n {
            let x = i as f64 / n as f64;
            for j in 0..n {
                let c = window.0 + (window.1 - window.0) * (j as f64 + 0.5) / n as f64;
                let (t, r) = self.forward(x, c);
                let (x2, c2) = self.inverse(t, r);
                worst = worst.max((x2 - x).abs()).max((c2 - c).abs());
            }
        }
        worst
    }

    /// Writes rows `x,c,theta,r` over the product of the given samples.
    pub fn to_csv<W: Write>(&self, xs: &[f64], cs: &[f64], mut w: W) -> Result<()> {
        writeln!(w, "x,c,theta,r")?;
        for &c in cs {
            for &x in xs {
                let (theta, r) = self.forward(x, c);
                writeln!(w, "{},{},{},{}", x, c, theta, r)?;
            }
        }
        Ok(())
    }
}

/// Smallest difference quotient of theta + du_dc along one label column at
/// the given node stride.
fn min_column_slope(grid: &GeneratingGrid, j: usize, stride: usize) -> f64 {
    let n = grid.theta.len();
    let mut min = f64::INFINITY;
    let mut i = 0;
    while i + stride < n {
        let x0 = grid.theta[i] + grid.du_dc_at(i, j);
        let x1 = grid.theta[i + stride] + grid.du_dc_at(i + stride, j);
        min = min.min((x1 - x0) / (grid.theta[i + stride] - grid.theta[i]));
        i += stride;
    }
    min
}

/// Builds the straightening from a generating grid.
///
/// Two refusal paths guard the construction. A du/dc jump between label
/// columns that survives two refinements means the generating function is
/// not C1 and no exact symplectic straightening exists (checked when the
/// grid has at least 64 label nodes). A column where theta + du_dc loses
/// injectivity at two strides means the defining relations do not define a
/// homeomorphism at that leaf.
///
/// Forward evaluation inverts the strictly increasing piecewise-linear node
/// interpolant of theta + du_dc by bisection (60 halvings), then applies
/// the second defining relation; the inverse solves the label the same way.
pub fn build_straightening(grid: &GeneratingGrid) -> Result<StraighteningMap> {
    if grid.c.len() >= 64 {
        let report = c1_report(grid)?;
        if let Some((c, jump)) = report.discontinuity {
            return Err(Error::NotStraightenableJump { c, jump });
        }
    }
    for j in 0..grid.c.len() {
        let m1 = min_column_slope(grid, j, 1);
        if m1 <= 1e-9 && min_column_slope(grid, j, 2) <= 1e-9 {
            return Err(Error::NotStraightenableSlope {
                c: grid.c[j],
                min_slope: m1,
            });
        }
    }

    let g = Arc::new(grid.clone());
    let gf = Arc::clone(&g);
    let forward = move |x: f64, c: f64| -> (f64, f64) {
        let w0 = gf.du_dc_interp(0.0, c);
        let xr = frac(x);
        let k = x - xr;
        let m = (w0 - xr).ceil();
        let target = xr + m;
        let h = |t: f64| t + gf.du_dc_interp(t, c) - target;
        let t = bisect_increasing(&h, 0.0, 1.0, 60);
        (t + k - m, c + gf.du_dtheta_interp(t, c))
    };
    let gi = Arc::clone(&g);
    let inverse = move |theta: f64, r: f64| -> (f64, f64) {
        let (lo, hi) = (gi.c[0], gi.c[gi.c.len() - 1]);
        // outside the window the clamped interpolant extends with slope one
        let c = if r <= lo + gi.du_dtheta_interp(theta, lo) {
            r - gi.du_dtheta_interp(theta, lo)
        } else if r >= hi + gi.du_dtheta_interp(theta, hi) {
            r - gi.du_dtheta_interp(theta, hi)
        } else {
            let psi = |c: f64| c + gi.du_dtheta_interp(theta, c) - r;
            bisect_increasing(&psi, lo, hi, 60)
        };
        (theta + gi.du_dc_interp(theta, c), c)
    };
    Ok(StraighteningMap {
        forward: Arc::new(forward),
        inverse: Arc::new(inverse),
        source_grid: Some(g),
    })
}

/// Axis-aligned rectangle in straight coordinates: (lower corner, upper
/// corner).
pub type Rect = ((f64, f64), (f64, f64));

/// Max relative area error of the forward images of the rectangles, with
/// image areas from the shoelace formula on a boundary polygon of
/// `refinement` vertices.
pub fn area_distortion(phi: &StraighteningMap, rectangles: &[Rect], refinement: usize) -> f64 {
    let per_edge = (refinement / 4).max(2);
    rectangles
        .par_iter()
        .map(|&((x0, c0), (x1, c1))| {
            let mut pts = Vec::with_capacity(4 * per_edge);
            for k in 0..per_edge {
                let s = k as f64 / per_edge as f64;
                pts.push((x0 + s * (x1 - x0), c0));
            }
            for k in 0..per_edge {
                let s = k as f64 / per_edge as f64;
                pts.push((x1, c0 + s * (c1 - c0)));
            }
            for k in 0..per_edge {
                let s = k as f64 / per_edge as f64;
                pts.push((x1 - s * (x1 - x0), c1));
            }
            for k in 0..per_edge {
                let s = k as f64 / per_edge as f64;
                pts.push((x0, c1 - s * (c1 - c0)));
            }
            let image: Vec<(f64, f64)> = pts.iter().map(|&(x, c)| phi.forward(x, c)).collect();
            // center the polygon first: the shoelace sum is translation
            // invariant and centering avoids cancellation of large terms
            let inv = 1.0 / image.len() as f64;
            let cx = image.iter().map(|p| p.0).sum::<f64>() * inv;
            let cy = image.iter().map(|p| p.1).sum::<f64>() * inv;
            let mut twice_area = 0.0;
            for i in 0..image.len() {
                let (xa, ya) = image[i];
                let (xb, yb) = image[(i + 1) % image.len()];
                twice_area += (xa - cx) * (yb - cy) - (xb - cx) * (ya - cy);
            }
            let area = 0.5 * twice_area.abs();
            let exact = ((x1 - x0) * (c1 - c0)).abs();
            (area / exact - 1.0).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// Sup distance between Phi^-1 o f o Phi and the model shear
/// (x, c) -> (x + rho(c), c), over `samples` angles at each profile node.
/// Angle distance is taken mod 1.
pub fn arnold_liouville_residual(
    map: &TwistMapSpec,
    phi: &StraighteningMap,
    profile: &RhoProfile,
    samples: usize,
) -> Result<f64> {
    if samples < 4 {
        return Err(Error::InsufficientData {
            what: "residual samples",
            got: samples,
            need: 4,
        });
    }
    let mut worst = 0.0f64;
    for (j, &c) in profile.c_nodes.iter().enumerate() {
        let rho = profile.rho_values[j];
        for i in 0..samples {
            let x = i as f64 / samples as f64;
            let (theta, r) = phi.forward(x, c);
            let q = map.step(LiftPoint::new(theta, r))?;
            let (x2, c2) = phi.inverse(q.x, q.r);
            let dx = (frac(x2 - x - rho + 0.5) - 0.5).abs();
            worst = worst.max(dx).max((c2 - c).abs());
        }
    }
    Ok(worst)
}

/// The standard radial bump shape: exp(-1/(1-t^2)) inside |t| < 1, zero
/// outside. Unnormalized; discrete users sum-normalize their stencils.
pub fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Mollified generating functions at decreasing smoothing radii.
#[derive(Clone, Debug)]
pub struct MollifiedFamily {
    pub epsilon_values: Vec<f64>,
    pub u_eps_grids: Vec<GeneratingGrid>,
    /// Max C1 distance to the source grid over the shrunken window: the
    /// largest of the sup errors of u, du_dtheta, du_dc.
    pub c1_errors: Vec<f64>,
}

impl MollifiedFamily {
    /// Writes rows `epsilon,c1_error`.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epsilon,c1_error")?;
        for i in 0..self.epsilon_values.len() {
            writeln!(w, "{},{}", self.epsilon_values[i], self.c1_errors[i])?;
        }
        Ok(())
    }
}

/// Convolves u and its partials with the radial bump of radius epsilon,
/// periodically in the angle and with the label window shrunk by epsilon.
/// Each epsilon must cover at least two grid cells; the shrunken window
/// must keep at least two label nodes.
pub fn mollify(grid: &GeneratingGrid, epsilons: &[f64]) -> Result<MollifiedFamily> {
    let n = grid.theta.len() - 1; // distinct angle nodes
    let m = grid.c.len();
    let dt = grid.theta[1] - grid.theta[0];
    let dc = grid.c[1] - grid.c[0];
    let min_eps = 2.0 * dt.max(dc);
    for &e in epsilons {
        if !(e >= min_eps) {
            return Err(Error::InvalidArgument(format!(
                "mollifier radius {e} below twice the grid spacing {min_eps:.4}"
            )));
        }
    }

    let results: Vec<(GeneratingGrid, f64)> = epsilons
        .par_iter()
        .map(|&eps| -> Result<(GeneratingGrid, f64)> {
            let j_lo = grid
                .c
                .iter()
                .position(|&c| c - grid.c[0] >= eps - 1e-12)
                .unwrap_or(m);
            let j_hi = grid
                .c
                .iter()
                .rposition(|&c| grid.c[m - 1] - c >= eps - 1e-12)
                .unwrap_or(0);
            if j_hi < j_lo + 1 {
                return Err(Error::GridTooSmall {
                    what: "mollified label nodes",
                    need: 2,
                    got: j_hi.saturating_sub(j_lo) + 1,
                });
            }
            // stencil weights on the covered offsets, sum-normalized
            let kt = (eps / dt).floor() as i64;
            let kc = (eps / dc).floor() as i64;
            let mut weights = Vec::new();
            let mut total = 0.0;
            for di in -kt..=kt {
                for dj in -kc..=kc {
                    let w = bump((di as f64 * dt).hypot(dj as f64 * dc) / eps);
                    if w > 0.0 {
                        weights.push((di, dj, w));
                        total += w;
                    }
                }
            }
            for w in &mut weights {
                w.2 /= total;
            }

            let mc = j_hi - j_lo + 1;
            let smooth = |field: &[f64]| -> Vec<f64> {
                let mut out = vec![0.0; (n + 1) * mc];
                for i in 0..n {
                    for (jj, j) in (j_lo..=j_hi).enumerate() {
                        let mut acc = 0.0;
                        for &(di, dj, w) in &weights {
                            let ii = (i as i64 + di).rem_euclid(n as i64) as usize;
                            let cj = (j as i64 + dj) as usize;
                            acc += w * field[ii * m + cj];
                        }
                        out[i * mc + jj] = acc;
                    }
                }
                for jj in 0..mc {
                    out[n * mc + jj] = out[jj]; // periodic closing row
                }
                out
            };
            let u = smooth(&grid.u);
            let du_dtheta = smooth(&grid.du_dtheta);
            let du_dc = smooth(&grid.du_dc);

            let mut err = 0.0f64;
            for i in 0..=n {
                for (jj, j) in (j_lo..=j_hi).enumerate() {
                    err = err
                        .max((u[i * mc + jj] - grid.u[i * m + j]).abs())
                        .max((du_dtheta[i * mc + jj] - grid.du_dtheta[i * m + j]).abs())
                        .max((du_dc[i * mc + jj] - grid.du_dc[i * m + j]).abs());
                }
            }
            Ok((
                GeneratingGrid {
                    theta: grid.theta.clone(),
                    c: grid.c[j_lo..=j_hi].to_vec(),
                    u,
                    du_dtheta,
                    du_dc,
                    analytic_partials: false,
                },
                err,
            ))
        })
        .collect::<Result<_>>()?;

    let (u_eps_grids, c1_errors) = results.into_iter().unzip();
    Ok(MollifiedFamily {
        epsilon_values: epsilons.to_vec(),
        u_eps_grids,
        c1_errors,
    })
}

/// 1-D mollification of a scalar function: samples of g * bump_eps at
/// `n_out` points of [lo, hi]. Convolving an increasing function with a
/// positive kernel keeps it increasing; this helper lets callers check
/// that directly.
pub fn smooth_increasing_1d<F: Fn(f64) -> f64>(
    g: F,
    eps: f64,
    lo: f64,
    hi: f64,
    n_out: usize,
) -> Vec<(f64, f64)> {
    let k = 128;
    let mut weights = Vec::with_capacity(k);
    let mut total = 0.0;
    for i in 0..k {
        let s = -eps + 2.0 * eps * (i as f64 + 0.5) / k as f64;
        let w = bump(s / eps);
        weights.push((s, w));
        total += w;
    }
    for w in &mut weights {
        w.1 /= total;
    }
    (0..n_out)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (n_out - 1) as f64;
            let val = weights.iter().map(|&(s, w)| w * g(x - s)).sum();
            (x, val)
        })
        .collect()
}
