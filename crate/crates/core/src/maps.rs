//! Twist maps of the annulus given by lifts to the universal cover.
//!
//! A map is a pair of forward/inverse callables on lift coordinates that
//! commute with the deck translation (x, r) -> (x + 1, r), together with an
//! optional analytic differential. All operations below work on the lift.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{frac, Jacobian2, LiftPoint};
use crate::quad::CompensatedSum;

pub type PointMap = Arc<dyn Fn(LiftPoint) -> LiftPoint + Send + Sync>;
pub type DifferentialFn = Arc<dyn Fn(LiftPoint) -> Jacobian2 + Send + Sync>;

/// A twist map of the annulus presented through its lift.
///
/// `torsion_bounds`, when set, declare the producer's bounds on the response
/// of the image angle to the fiber coordinate over the strip of interest;
/// they are consumed by rotation-profile Lipschitz checks.
#[derive(Clone)]
pub struct TwistMapSpec {
    forward: PointMap,
    inverse: PointMap,
    differential: Option<DifferentialFn>,
    pub torsion_bounds: Option<(f64, f64)>,
    /// Orbits whose coordinates exceed this magnitude abort with a
    /// divergence error.
    pub divergence_bound: f64,
}

impl TwistMapSpec {
    pub fn new(forward: PointMap, inverse: PointMap) -> Self {
        Self {
            forward,
            inverse,
            differential: None,
            torsion_bounds: None,
            divergence_bound: 1e6,
        }
    }

    pub fn with_differential(mut self, d: DifferentialFn) -> Self {
        self.differential = Some(d);
        self
    }

    pub fn with_torsion_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.torsion_bounds = Some((lo, hi));
        self
    }

    pub fn with_divergence_bound(mut self, bound: f64) -> Self {
        self.divergence_bound = bound;
        self
    }

    pub fn has_differential(&self) -> bool {
        self.differential.is_some()
    }

    fn guard(&self, p: LiftPoint, steps: u64) -> Result<LiftPoint> {
        if !p.x.is_finite() || p.x.abs() > self.divergence_bound {
            return Err(Error::Divergence {
                coord: "x",
                value: p.x,
                bound: self.divergence_bound,
                steps,
            });
        }
        if !p.r.is_finite() || p.r.abs() > self.divergence_bound {
            return Err(Error::Divergence {
                coord: "r",
                value: p.r,
                bound: self.divergence_bound,
                steps,
            });
        }
        Ok(p)
    }

    /// One forward step with the divergence guard.
    pub fn step(&self, p: LiftPoint) -> Result<LiftPoint> {
        self.guard((self.forward)(p), 1)
    }

    /// One inverse step with the divergence guard.
    pub fn step_back(&self, p: LiftPoint) -> Result<LiftPoint> {
        self.guard((self.inverse)(p), 1)
    }

    /// n-th iterate (n may be negative) of a single point.
    pub fn iterate(&self, p: LiftPoint, n: i64) -> Result<LiftPoint> {
        let mut q = p;
        for k in 0..n.unsigned_abs() {
            q = if n >= 0 {
                (self.forward)(q)
            } else {
                (self.inverse)(q)
            };
            self.guard(q, k + 1)?;
        }
        Ok(q)
    }
}

/// Orbit segment p, f(p), ..., f^n(p) (inverse iterates when n < 0). The
/// returned vector has |n| + 1 entries starting at p.
pub fn map_eval_lift(map: &TwistMapSpec, p: LiftPoint, n: i64) -> Result<Vec<LiftPoint>> {
    let mut orbit = Vec::with_capacity(n.unsigned_abs() as usize + 1);
    orbit.push(map.guard(p, 0)?);
    let mut q = p;
    for k in 0..n.unsigned_abs() {
        q = if n >= 0 {
            (map.forward)(q)
        } else {
            (map.inverse)(q)
        };
        map.guard(q, k + 1)?;
        orbit.push(q);
    }
    Ok(orbit)
}

/// Central-difference step scaled to the coordinate magnitude.
#[inline]
pub(crate) fn fd_step(coord: f64) -> f64 {
    (1e-8 * (1.0 + coord.abs())).max(1e-6)
}

/// Differential of the map at p: the analytic callable when present,
/// otherwise central differences with a magnitude-scaled step.
pub fn map_jacobian(map: &TwistMapSpec, p: LiftPoint) -> Result<Jacobian2> {
    if let Some(d) = &map.differential {
        return Ok(d(p));
    }
    let hx = fd_step(p.x);
    let hr = fd_step(p.r);
    let fxp = map.step(LiftPoint::new(p.x + hx, p.r))?;
    let fxm = map.step(LiftPoint::new(p.x - hx, p.r))?;
    let frp = map.step(LiftPoint::new(p.x, p.r + hr))?;
    let frm = map.step(LiftPoint::new(p.x, p.r - hr))?;
    Ok(Jacobian2::new(
        (fxp.x - fxm.x) / (2.0 * hx),
        (frp.x - frm.x) / (2.0 * hr),
        (fxp.r - fxm.r) / (2.0 * hx),
        (frp.r - frm.r) / (2.0 * hr),
    ))
}

fn iterated_angle(map: &TwistMapSpec, p: LiftPoint, n: u32) -> Result<f64> {
    let mut q = p;
    for k in 0..n {
        q = (map.forward)(q);
        map.guard(q, (k + 1) as u64)?;
    }
    Ok(q.x)
}

/// Min and max over a strip grid of the finite-difference response of the
/// image angle of f^n to the fiber coordinate.
pub fn iterated_twist_bounds(
    map: &TwistMapSpec,
    n: u32,
    strip: (f64, f64),
    grid: (usize, usize),
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("twist bounds need n >= 1".into()));
    }
    let (n_theta, n_r) = grid;
    if n_theta < 2 || n_r < 2 {
        return Err(Error::GridTooSmall {
            what: "twist grid nodes per axis",
            need: 2,
            got: n_theta.min(n_r),
        });
    }
    let (r_lo, r_hi) = strip;
    if !(r_hi > r_lo) {
        return Err(Error::InvalidArgument("empty strip".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n_theta {
        let theta = i as f64 / n_theta as f64;
        for j in 0..n_r {
            let r = r_lo + (r_hi - r_lo) * j as f64 / (n_r - 1) as f64;
            let h = fd_step(r).min(0.25 * (r_hi - r_lo));
            let xp = iterated_angle(map, LiftPoint::new(theta, r + h), n)?;
            let xm = iterated_angle(map, LiftPoint::new(theta, r - h), n)?;
            let slope = (xp - xm) / (2.0 * h);
            lo = lo.min(slope);
            hi = hi.max(slope);
        }
    }
    Ok((lo, hi))
}

/// Minimum over a strip grid of d(image angle)/d(fiber) for the map itself.
pub fn twist_margin(map: &TwistMapSpec, strip: (f64, f64), grid: (usize, usize)) -> Result<f64> {
    Ok(iterated_twist_bounds(map, 1, strip, grid)?.0)
}

/// Both extremes of d(image angle)/d(fiber) over a strip grid.
pub fn twist_bounds(
    map: &TwistMapSpec,
    strip: (f64, f64),
    grid: (usize, usize),
) -> Result<(f64, f64)> {
    iterated_twist_bounds(map, 1, strip, grid)
}

/// Minimum twist response of the n-th iterate over a strip grid.
pub fn iterated_twist_margin(
    map: &TwistMapSpec,
    n: u32,
    strip: (f64, f64),
    grid: (usize, usize),
) -> Result<f64> {
    Ok(iterated_twist_bounds(map, n, strip, grid)?.0)
}

/// Algebraic flux of the map through an essential curve given as a graph
/// r = curve(theta): signed area between the image curve and the curve,
/// trapezoidal in the angle. Errors if the image is not a graph.
pub fn exactness_flux<C>(map: &TwistMapSpec, curve: C, n_samples: usize) -> Result<f64>
where
    C: Fn(f64) -> f64,
{
    if n_samples < 16 {
        return Err(Error::GridTooSmall {
            what: "flux samples",
            need: 16,
            got: n_samples,
        });
    }
    let n = n_samples;
    let mut src = Vec::with_capacity(n + 1);
    let mut img = Vec::with_capacity(n + 1);
    for i in 0..n {
        let theta = i as f64 / n as f64;
        let p = LiftPoint::new(theta, curve(theta));
        src.push(p);
        img.push(map.step(p)?);
    }
    // close both curves over one period
    src.push(LiftPoint::new(1.0, src[0].r));
    img.push(LiftPoint::new(img[0].x + 1.0, img[0].r));
    for (i, w) in img.windows(2).enumerate() {
        if w[1].x <= w[0].x {
            return Err(Error::NonGraph { index: i });
        }
    }
    let area = |pts: &[LiftPoint]| {
        let mut acc = CompensatedSum::new();
        for w in pts.windows(2) {
            acc.add(0.5 * (w[0].r + w[1].r) * (w[1].x - w[0].x));
        }
        acc.value()
    };
    Ok(area(&img) - area(&src))
}

/// Max over sampled points of |F(x + 1, r) - F(x, r) - (1, 0)|: how far the
/// lift is from commuting with the deck translation.
pub fn lift_periodicity_defect(map: &TwistMapSpec, samples: &[LiftPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &p in samples {
        let a = map.step(p)?;
        let b = map.step(LiftPoint::new(p.x + 1.0, p.r))?;
        worst = worst.max((b.x - a.x - 1.0).abs()).max((b.r - a.r).abs());
    }
    Ok(worst)
}

/// Max over sampled points of |f^{-1}(f(p)) - p|.
pub fn inverse_defect(map: &TwistMapSpec, samples: &[LiftPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &p in samples {
        let q = map.step_back(map.step(p)?)?;
        worst = worst.max((q.x - p.x).abs()).max((q.r - p.r).abs());
    }
    Ok(worst)
}

/// Max over sampled points of |det Df - 1|.
pub fn symplectic_defect(map: &TwistMapSpec, samples: &[LiftPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &p in samples {
        worst = worst.max((map_jacobian(map, p)?.det() - 1.0).abs());
    }
    Ok(worst)
}

/// The shear (x, r) -> (x + rho(r), r) with an analytic differential.
pub fn shear_map<F, G>(rho: F, drho: G) -> TwistMapSpec
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
    G: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let rho = Arc::new(rho);
    let drho = Arc::new(drho);
    let rho_f = rho.clone();
    let forward: PointMap = Arc::new(move |p: LiftPoint| LiftPoint::new(p.x + rho_f(p.r), p.r));
    let rho_b = rho;
    let inverse: PointMap = Arc::new(move |p: LiftPoint| LiftPoint::new(p.x - rho_b(p.r), p.r));
    let diff: DifferentialFn =
        Arc::new(move |p: LiftPoint| Jacobian2::new(1.0, drho(p.r), 0.0, 1.0));
    TwistMapSpec::new(forward, inverse).with_differential(diff)
}

/// Uniform angle samples of a periodic graph, handy for flux and invariance
/// checks.
pub fn sample_graph<C: Fn(f64) -> f64>(curve: C, n: usize) -> Vec<LiftPoint> {
    (0..n)
        .map(|i| {
            let theta = i as f64 / n as f64;
            LiftPoint::new(theta, curve(frac(theta)))
        })
        .collect()
}
