//! Closed-form families: integrable and conjugated-integrable twist maps,
//! the cosine foliation with a kinked amplitude and the C1 twist map that
//! preserves it, and the plateau family whose straightening is a limit of
//! symplectic diffeomorphisms without being a homeomorphism.
//!
//! Everything here is exact by construction, so these families serve as
//! ground truth for the numerical operators in the rest of the crate.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::foliation::{FoliationPartials, FoliationSpec, LeafFn};
use crate::geom::{frac, Jacobian2, LiftPoint};
use crate::maps::{shear_map, twist_margin, DifferentialFn, PointMap, TwistMapSpec};
use crate::quad::simpson;
use crate::solve::{bracket_increasing, newton_bisect};

/// Contraction bound on the amplitude profile required for leaf ordering.
pub const LIP_BOUND: f64 = 1.0 / (4.0 * PI);

#[inline]
fn branch_sign(c: f64, branch: f64) -> f64 {
    if c > 0.0 {
        1.0
    } else if c < 0.0 || branch < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Amplitude profile c -> epsilon(c) of a cosine foliation, with one-sided
/// first and second derivatives. The branch argument selects the side taken
/// at c = 0 and is ignored elsewhere.
#[derive(Clone)]
pub struct EpsProfile {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    d1: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    d2: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    /// Upper bound on |epsilon'|, exact for the built-in profiles.
    pub lipschitz: f64,
    /// True when the profile is C^2 across c = 0.
    pub smooth: bool,
    pub name: &'static str,
}

impl EpsProfile {
    pub fn eval(&self, c: f64) -> f64 {
        (self.eval)(c)
    }

    pub fn d1(&self, c: f64, branch: f64) -> f64 {
        (self.d1)(c, branch)
    }

    pub fn d2(&self, c: f64, branch: f64) -> f64 {
        (self.d2)(c, branch)
    }

    /// epsilon identically zero; the foliation degenerates to horizontals.
    pub fn zero() -> Self {
        Self {
            eval: Arc::new(|_| 0.0),
            d1: Arc::new(|_, _| 0.0),
            d2: Arc::new(|_, _| 0.0),
            lipschitz: 0.0,
            smooth: true,
            name: "zero",
        }
    }

    /// epsilon(c) = scale * |c| * exp(-c^2): Lipschitz with constant `scale`,
    /// vanishing at 0, C^2 on each closed half-line, kinked at 0.
    pub fn abs_gauss(scale: f64) -> Self {
        Self {
            eval: Arc::new(move |c: f64| scale * c.abs() * (-c * c).exp()),
            d1: Arc::new(move |c: f64, b: f64| {
                branch_sign(c, b) * scale * (1.0 - 2.0 * c * c) * (-c * c).exp()
            }),
            d2: Arc::new(move |c: f64, b: f64| {
                branch_sign(c, b) * scale * (4.0 * c * c * c - 6.0 * c) * (-c * c).exp()
            }),
            lipschitz: scale,
            smooth: false,
            name: "abs_gauss",
        }
    }

    /// epsilon(c) = scale * |c|: the sharpest kink; second derivative zero on
    /// each side.
    pub fn abs_linear(scale: f64) -> Self {
        Self {
            eval: Arc::new(move |c: f64| scale * c.abs()),
            d1: Arc::new(move |c: f64, b: f64| branch_sign(c, b) * scale),
            d2: Arc::new(|_, _| 0.0),
            lipschitz: scale,
            smooth: false,
            name: "abs_linear",
        }
    }

    /// epsilon(c) = scale * sin(c) * exp(-c^2): globally smooth, same
    /// Lipschitz constant, used by the smooth conjugated families.
    pub fn smooth_gauss(scale: f64) -> Self {
        Self {
            eval: Arc::new(move |c: f64| scale * c.sin() * (-c * c).exp()),
            d1: Arc::new(move |c: f64, _| scale * (c.cos() - 2.0 * c * c.sin()) * (-c * c).exp()),
            d2: Arc::new(move |c: f64, _| {
                scale * (4.0 * c * c * c.sin() - 3.0 * c.sin() - 4.0 * c * c.cos()) * (-c * c).exp()
            }),
            lipschitz: scale,
            smooth: true,
            name: "smooth_gauss",
        }
    }
}

/// Fiber-to-rotation profile t -> rho(t) with its derivative.
#[derive(Clone)]
pub struct RhoFn {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl RhoFn {
    pub fn new<F, G>(f: F, df: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            df: Arc::new(df),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        (self.df)(t)
    }

    /// rho(t) = t.
    pub fn identity() -> Self {
        Self::new(|t| t, |_| 1.0)
    }

    /// Odd profile sign(t) * t^2 * exp(m |t|): flat to first order at 0 and
    /// increasing, the shape needed to glue a twist map across a fixed leaf.
    pub fn flat_quadratic(m: f64) -> Self {
        Self::new(
            move |t: f64| t.signum() * t * t * (m * t.abs()).exp(),
            move |t: f64| (2.0 * t.abs() + m * t * t) * (m * t.abs()).exp(),
        )
    }
}

fn validate_contraction(eps: &EpsProfile, c_max: f64) -> Result<()> {
    if eps.eval(0.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(
            "amplitude must vanish at c = 0 so the zero section is a leaf".into(),
        ));
    }
    let n = 2048;
    for k in 0..n {
        let c0 = -c_max + 2.0 * c_max * k as f64 / n as f64;
        let c1 = -c_max + 2.0 * c_max * (k + 1) as f64 / n as f64;
        let q = (eps.eval(c1) - eps.eval(c0)).abs() / (c1 - c0);
        if q > LIP_BOUND + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "amplitude difference quotient {q:.6} near c = {c0:.4} exceeds the \
                 contraction bound {LIP_BOUND:.6}"
            )));
        }
    }
    Ok(())
}

fn validate_increasing(rho: &RhoFn, span: f64) -> Result<()> {
    let n = 512;
    for k in 0..n {
        let t0 = -span + 2.0 * span * k as f64 / n as f64;
        let t1 = -span + 2.0 * span * (k + 1) as f64 / n as f64;
        if rho.eval(t1) <= rho.eval(t0) {
            return Err(Error::InvalidArgument(format!(
                "rotation profile not increasing near t = {t0:.4}"
            )));
        }
    }
    Ok(())
}

/// Inverse of the angle warp: solves theta + a sin(2 pi theta)/(2 pi) = x
/// for theta, where a = epsilon'(c) on the chosen branch.
fn unwarp_angle(eps: &EpsProfile, branch: f64, c: f64, x: f64) -> f64 {
    let a = eps.d1(c, branch);
    let k = a.abs() / TAU + 1e-9;
    let f = |t: f64| t + a * (TAU * t).sin() / TAU - x;
    let df = |t: f64| 1.0 + a * (TAU * t).cos();
    newton_bisect(&f, &df, x - k, x + k)
}

/// Solves r = c + epsilon(c) cos(2 pi x) for the leaf label c.
fn solve_label(eps: &EpsProfile, branch: f64, x: f64, r: f64) -> f64 {
    let co = (TAU * x).cos();
    let f = |c: f64| c + eps.eval(c) * co - r;
    let df = |c: f64| 1.0 + eps.d1(c, branch) * co;
    let m = eps.lipschitz * (r.abs() + 1.0) + 1e-9;
    match bracket_increasing(&f, r - m, r + m, 8) {
        Some((lo, hi)) => newton_bisect(&f, &df, lo, hi),
        None => f64::NAN,
    }
}

/// Differential of the straightening direction (x, r) -> (h_c(x), c) at an
/// annulus point with known label. Exactly unimodular.
fn straighten_jacobian(eps: &EpsProfile, branch: f64, x: f64, c: f64) -> Jacobian2 {
    let (s, co) = (TAU * x).sin_cos();
    let a0 = eps.eval(c);
    let a1 = eps.d1(c, branch);
    let a2 = eps.d2(c, branch);
    let dt = 1.0 + a1 * co;
    let dcdx = TAU * a0 * s / dt;
    let dcdr = 1.0 / dt;
    let sn = s / TAU;
    Jacobian2::new(dt + a2 * sn * dcdx, a2 * sn * dcdr, dcdx, dcdr)
}

const NAN_JAC: Jacobian2 = Jacobian2 {
    a: f64::NAN,
    b: f64::NAN,
    c: f64::NAN,
    d: f64::NAN,
};

/// The map Phi^(+/-) o f_rho o (Phi^(+/-))^{-1} evaluated through the
/// implicit warp solves. With `glue` set, r = 0 short-circuits to the
/// identity with identity differential, which is the continuous extension.
fn conjugated_map(eps: &EpsProfile, rho: &RhoFn, glue: bool) -> TwistMapSpec {
    let step = {
        let eps = eps.clone();
        let rho = rho.clone();
        move |p: LiftPoint, dir: f64| -> LiftPoint {
            if glue && p.r == 0.0 {
                return p;
            }
            let b = if p.r < 0.0 { -1.0 } else { 1.0 };
            let c = solve_label(&eps, b, p.x, p.r);
            if !c.is_finite() {
                return LiftPoint::new(f64::NAN, f64::NAN);
            }
            let x_straight = p.x + eps.d1(c, b) * (TAU * p.x).sin() / TAU;
            let th = unwarp_angle(&eps, b, c, x_straight + dir * rho.eval(c));
            LiftPoint::new(th, c + eps.eval(c) * (TAU * th).cos())
        }
    };
    let fwd = step.clone();
    let forward: PointMap = Arc::new(move |p| fwd(p, 1.0));
    let bwd = step.clone();
    let inverse: PointMap = Arc::new(move |p| bwd(p, -1.0));
    let diff: DifferentialFn = {
        let eps = eps.clone();
        let rho = rho.clone();
        Arc::new(move |p: LiftPoint| -> Jacobian2 {
            if glue && p.r == 0.0 {
                return Jacobian2::identity();
            }
            let b = if p.r < 0.0 { -1.0 } else { 1.0 };
            let c = solve_label(&eps, b, p.x, p.r);
            if !c.is_finite() {
                return NAN_JAC;
            }
            let q = step(p, 1.0);
            let dg_p = straighten_jacobian(&eps, b, p.x, c);
            let dg_q = straighten_jacobian(&eps, b, q.x, c);
            let t = Jacobian2::new(1.0, rho.deriv(c), 0.0, 1.0);
            match dg_q.inverse() {
                Ok(inv) => inv.mul(&t).mul(&dg_p),
                Err(_) => NAN_JAC,
            }
        })
    };
    TwistMapSpec::new(forward, inverse).with_differential(diff)
}

/// One half of the straightening pair: the C1 exact symplectic map from the
/// straightened half-annulus back to the foliated one, for the branch of
/// epsilon' chosen at c = 0. Its angle component w(x, c) solves
/// h_c(w) = x, and all partials of w are closed forms in w.
#[derive(Clone)]
pub struct HalfStraightening {
    eps: EpsProfile,
    branch: f64,
}

/// First and second partials of the angle component w at one point.
#[derive(Clone, Copy, Debug)]
pub struct WPartials {
    pub w: f64,
    pub dw_dx: f64,
    pub d2w_dx2: f64,
    pub dw_dc: f64,
    pub d2w_dxdc: f64,
}

impl HalfStraightening {
    pub fn new(eps: EpsProfile, branch: f64) -> Self {
        Self { eps, branch }
    }

    /// Angle component: the unique w with w + eps'(c) sin(2 pi w)/(2 pi) = x.
    pub fn w(&self, x: f64, c: f64) -> f64 {
        unwarp_angle(&self.eps, self.branch, c, x)
    }

    pub fn partials(&self, x: f64, c: f64) -> WPartials {
        let w = self.w(x, c);
        let a1 = self.eps.d1(c, self.branch);
        let a2 = self.eps.d2(c, self.branch);
        let (s, co) = (TAU * w).sin_cos();
        let d = 1.0 + a1 * co;
        let dw_dx = 1.0 / d;
        let d2w_dx2 = TAU * a1 * s / (d * d * d);
        let dw_dc = -a2 * s / (TAU * d);
        let d2w_dxdc = -(a2 * co - TAU * a1 * s * dw_dc) / (d * d);
        WPartials {
            w,
            dw_dx,
            d2w_dx2,
            dw_dc,
            d2w_dxdc,
        }
    }

    /// (x, c) in straightened coordinates -> (w, eta_c(w)) on the annulus.
    pub fn from_straight(&self, p: LiftPoint) -> LiftPoint {
        let w = self.w(p.x, p.r);
        LiftPoint::new(w, p.r + self.eps.eval(p.r) * (TAU * w).cos())
    }

    /// (theta, r) on the annulus -> (h_c(theta), c).
    pub fn to_straight(&self, p: LiftPoint) -> LiftPoint {
        let c = solve_label(&self.eps, self.branch, p.x, p.r);
        LiftPoint::new(
            p.x + self.eps.d1(c, self.branch) * (TAU * p.x).sin() / TAU,
            c,
        )
    }
}

/// Twist-estimate constants of a half straightening by grid extremization
/// with dyadic refinement until both settle within 1%:
/// M2 = min dw/dx and M1 = sup|d2w/dxdc| + sup(1/(dw/dx)) sup|d2w/dx2| sup|dw/dc|.
pub fn m_constants(
    h: &HalfStraightening,
    window: (f64, f64),
    base_resolution: usize,
) -> Result<(f64, f64)> {
    if base_resolution < 16 {
        return Err(Error::GridTooSmall {
            what: "extremization grid",
            need: 16,
            got: base_resolution,
        });
    }
    let (c_lo, c_hi) = window;
    if !(c_hi > c_lo) {
        return Err(Error::InvalidArgument("empty label window".into()));
    }
    let eval = |n: usize| -> (f64, f64, f64) {
        let m = n / 2 + 1;
        let mut sup_wxc = 0.0f64;
        let mut sup_d = 0.0f64;
        let mut sup_wxx = 0.0f64;
        let mut sup_wc = 0.0f64;
        let mut min_wx = f64::INFINITY;
        let mut argmin_c = c_lo;
        for i in 0..n {
            let x = i as f64 / n as f64;
            for j in 0..m {
                let c = c_lo + (c_hi - c_lo) * j as f64 / (m - 1) as f64;
                let p = h.partials(x, c);
                sup_wxc = sup_wxc.max(p.d2w_dxdc.abs());
                sup_d = sup_d.max(1.0 / p.dw_dx);
                sup_wxx = sup_wxx.max(p.d2w_dx2.abs());
                sup_wc = sup_wc.max(p.dw_dc.abs());
                if p.dw_dx < min_wx {
                    min_wx = p.dw_dx;
                    argmin_c = c;
                }
            }
        }
        (sup_wxc + sup_d * sup_wxx * sup_wc, min_wx, argmin_c)
    };
    let mut n = base_resolution;
    let (mut m1, mut m2, mut at_c) = eval(n);
    for _ in 0..3 {
        let (m1b, m2b, cb) = eval(2 * n);
        let drift =
            ((m1b - m1).abs() / m1b.abs().max(1e-12)).max((m2b - m2).abs() / m2b.abs().max(1e-12));
        m1 = m1b;
        m2 = m2b;
        at_c = cb;
        n *= 2;
        if drift < 0.01 {
            break;
        }
    }
    if m2 <= 0.0 {
        return Err(Error::NotStraightenableSlope {
            c: at_c,
            min_slope: m2,
        });
    }
    Ok((m1, m2))
}

/// Parameters of the kinked cosine family: amplitude profile, rotation
/// profile, and the measured twist-estimate constants.
#[derive(Clone)]
pub struct StrangeParams {
    pub eps: EpsProfile,
    pub rho: RhoFn,
    pub m1: f64,
    pub m2: f64,
    /// Half-height of the working window (-c_max, c_max).
    pub c_max: f64,
}

impl StrangeParams {
    /// Measures M1, M2 on the positive half window and installs the default
    /// rotation profile sign(t) t^2 exp(2 M1/M2 |t|).
    pub fn with_measured_constants(eps: EpsProfile, c_max: f64) -> Result<Self> {
        if !(c_max > 0.0) {
            return Err(Error::InvalidArgument("c_max must be positive".into()));
        }
        validate_contraction(&eps, c_max)?;
        let hp = HalfStraightening::new(eps.clone(), 1.0);
        let (m1, m2) = m_constants(&hp, (0.0, c_max), 64)?;
        let rho = RhoFn::flat_quadratic(2.0 * m1 / m2);
        validate_increasing(&rho, c_max)?;
        Ok(Self {
            eps,
            rho,
            m1,
            m2,
            c_max,
        })
    }

    /// Replaces the rotation profile, keeping the measured constants.
    pub fn with_rho(mut self, rho: RhoFn) -> Result<Self> {
        validate_increasing(&rho, self.c_max)?;
        self.rho = rho;
        Ok(self)
    }

    pub fn m(&self) -> f64 {
        2.0 * self.m1 / self.m2
    }

    pub fn phi_plus(&self) -> HalfStraightening {
        HalfStraightening::new(self.eps.clone(), 1.0)
    }

    pub fn phi_minus(&self) -> HalfStraightening {
        HalfStraightening::new(self.eps.clone(), -1.0)
    }
}

/// The cosine foliation eta_c(theta) = c + epsilon(c) cos(2 pi theta) with
/// analytic partials (positive branch at the kink).
pub fn strange_foliation(params: &StrangeParams) -> Result<FoliationSpec> {
    validate_contraction(&params.eps, params.c_max)?;
    let e = params.eps.clone();
    let leaf: LeafFn = Arc::new(move |t: f64, c: f64| c + e.eval(c) * (TAU * t).cos());
    let e = params.eps.clone();
    let d_theta: LeafFn = Arc::new(move |t: f64, c: f64| -TAU * e.eval(c) * (TAU * t).sin());
    let e = params.eps.clone();
    let d_c: LeafFn = Arc::new(move |t: f64, c: f64| 1.0 + e.d1(c, 1.0) * (TAU * t).cos());
    let fol = FoliationSpec::new(leaf, (-params.c_max, params.c_max))
        .with_partials(FoliationPartials { d_theta, d_c });
    // ordering spot check: adjacent leaves must not cross
    for j in 0..32 {
        let c0 = -params.c_max + 2.0 * params.c_max * j as f64 / 32.0;
        let c1 = -params.c_max + 2.0 * params.c_max * (j + 1) as f64 / 32.0;
        for i in 0..17 {
            let t = i as f64 / 17.0;
            if fol.leaf(t, c1) <= fol.leaf(t, c0) {
                return Err(Error::InvalidArgument(format!(
                    "leaves {c0:.4} and {c1:.4} cross near theta = {t:.4}"
                )));
            }
        }
    }
    Ok(fol)
}

/// The glued C1 exact symplectic twist map preserving the cosine foliation,
/// together with the foliation and the parameters it was built from.
#[derive(Clone)]
pub struct StrangeMap {
    pub map: TwistMapSpec,
    pub foliation: FoliationSpec,
    pub params: StrangeParams,
}

pub fn strange_twist_map(params: &StrangeParams) -> Result<StrangeMap> {
    let foliation = strange_foliation(params)?;
    let map = conjugated_map(&params.eps, &params.rho, true);
    let strip = (1e-3 * params.c_max, params.c_max);
    let margin = twist_margin(&map, strip, (12, 7))?;
    if margin <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "twist margin {margin:.3e} on [{:.3e}, {:.3}] is not positive; rebuild the \
             rotation profile from the measured constants M1 = {:.5}, M2 = {:.5}",
            strip.0, strip.1, params.m1, params.m2
        )));
    }
    Ok(StrangeMap {
        map,
        foliation,
        params: params.clone(),
    })
}

/// A smooth exact symplectic change of coordinates used to disguise a shear,
/// together with the image foliation data. The contract: the conjugator
/// sends the horizontal r = c to the leaf whose mean is c.
#[derive(Clone)]
pub struct Conjugator {
    forward: PointMap,
    inverse: PointMap,
    differential: DifferentialFn,
    leaf: LeafFn,
    partials: FoliationPartials,
    conjugacy: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub name: &'static str,
}

impl Conjugator {
    /// Psi(x, r) = (x, r + g(x)) for smooth 1-periodic g; the mean of g is
    /// subtracted so leaf labels stay leaf means. The projected leaf
    /// dynamics is the rigid rotation itself.
    pub fn vertical_shear<F, G>(g: F, dg: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g = Arc::new(g);
        let dg = Arc::new(dg);
        let mean = simpson(|t| g(t), 0.0, 1.0, 512);
        let g0 = {
            let g = g.clone();
            Arc::new(move |t: f64| g(frac(t)) - mean)
        };
        let g0f = g0.clone();
        let forward: PointMap = Arc::new(move |p: LiftPoint| LiftPoint::new(p.x, p.r + g0f(p.x)));
        let g0i = g0.clone();
        let inverse: PointMap = Arc::new(move |p: LiftPoint| LiftPoint::new(p.x, p.r - g0i(p.x)));
        let dgc = dg.clone();
        let differential: DifferentialFn =
            Arc::new(move |p: LiftPoint| Jacobian2::new(1.0, 0.0, dgc(frac(p.x)), 1.0));
        let g0l = g0.clone();
        let leaf: LeafFn = Arc::new(move |t: f64, c: f64| c + g0l(t));
        let dgt = dg.clone();
        let d_theta: LeafFn = Arc::new(move |t: f64, _| dgt(frac(t)));
        Self {
            forward,
            inverse,
            differential,
            leaf,
            partials: FoliationPartials {
                d_theta,
                d_c: Arc::new(|_, _| 1.0),
            },
            conjugacy: Arc::new(|theta: f64, _| theta),
            name: "vertical_shear",
        }
    }

    /// The angle warp built from a globally smooth amplitude profile: the
    /// same construction as the half straightenings, but valid on the whole
    /// annulus. Projected leaf dynamics is a genuine (non-rigid) circle
    /// diffeomorphism conjugate to the rotation.
    pub fn angle_warp(eps: EpsProfile) -> Result<Self> {
        if !eps.smooth {
            return Err(Error::InvalidArgument(
                "angle warp needs a profile that is C2 across c = 0".into(),
            ));
        }
        let hs = HalfStraightening::new(eps.clone(), 1.0);
        let hsi = hs.clone();
        let forward: PointMap = Arc::new(move |p: LiftPoint| hsi.from_straight(p));
        let hso = hs.clone();
        let inverse: PointMap = Arc::new(move |p: LiftPoint| hso.to_straight(p));
        let epsd = eps.clone();
        let hsd = hs.clone();
        let differential: DifferentialFn = Arc::new(move |p: LiftPoint| {
            let q = hsd.from_straight(p);
            match straighten_jacobian(&epsd, 1.0, q.x, p.r).inverse() {
                Ok(j) => j,
                Err(_) => NAN_JAC,
            }
        });
        let e = eps.clone();
        let leaf: LeafFn = Arc::new(move |t: f64, c: f64| c + e.eval(c) * (TAU * t).cos());
        let e = eps.clone();
        let d_theta: LeafFn = Arc::new(move |t: f64, c: f64| -TAU * e.eval(c) * (TAU * t).sin());
        let e = eps.clone();
        let d_c: LeafFn = Arc::new(move |t: f64, c: f64| 1.0 + e.d1(c, 1.0) * (TAU * t).cos());
        let e = eps.clone();
        let conjugacy =
            Arc::new(move |theta: f64, c: f64| theta + e.d1(c, 1.0) * (TAU * theta).sin() / TAU);
        Ok(Self {
            forward,
            inverse,
            differential,
            leaf,
            partials: FoliationPartials { d_theta, d_c },
            conjugacy,
            name: "angle_warp",
        })
    }
}

/// A reference pair (map, invariant foliation) with its exact rotation
/// profile and the leafwise conjugacy to rigid rotations.
#[derive(Clone)]
pub struct GalleryFamily {
    pub map: TwistMapSpec,
    pub foliation: FoliationSpec,
    /// Exact rotation number of the projected dynamics on the leaf with
    /// mean c.
    pub rho: RhoFn,
    /// Lift of the conjugacy h_c with h_c(g_c(theta)) = h_c(theta) + rho(c).
    pub conjugacy: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

/// Builds Psi o f_rho o Psi^{-1} and the Psi-image of the standard
/// foliation. Without a conjugator this is the plain shear with the
/// standard foliation.
pub fn integrable_family(
    rho: RhoFn,
    conjugator: Option<Conjugator>,
    window: (f64, f64),
) -> Result<GalleryFamily> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    validate_increasing(&rho, lo.abs().max(hi.abs()) + 1.0)?;
    match conjugator {
        None => {
            let rf = rho.clone();
            let rb = rho.clone();
            let rd = rho.clone();
            let mut t_lo = f64::INFINITY;
            let mut t_hi = f64::NEG_INFINITY;
            for k in 0..=256 {
                let t = lo + (hi - lo) * k as f64 / 256.0;
                t_lo = t_lo.min(rho.deriv(t));
                t_hi = t_hi.max(rho.deriv(t));
            }
            let map = shear_map(move |r| rf.eval(r), move |r| rd.deriv(r))
                .with_torsion_bounds(t_lo, t_hi);
            let _ = rb;
            Ok(GalleryFamily {
                map,
                foliation: FoliationSpec::standard(window),
                rho,
                conjugacy: Arc::new(|theta: f64, _| theta),
            })
        }
        Some(psi) => {
            let forward: PointMap = {
                let f = psi.forward.clone();
                let i = psi.inverse.clone();
                let r = rho.clone();
                Arc::new(move |p: LiftPoint| {
                    let s = i(p);
                    f(LiftPoint::new(s.x + r.eval(s.r), s.r))
                })
            };
            let inverse: PointMap = {
                let f = psi.forward.clone();
                let i = psi.inverse.clone();
                let r = rho.clone();
                Arc::new(move |p: LiftPoint| {
                    let s = i(p);
                    f(LiftPoint::new(s.x - r.eval(s.r), s.r))
                })
            };
            let differential: DifferentialFn = {
                let dpsi = psi.differential.clone();
                let i = psi.inverse.clone();
                let r = rho.clone();
                Arc::new(move |p: LiftPoint| {
                    let s = i(p);
                    let t = LiftPoint::new(s.x + r.eval(s.r), s.r);
                    let shear = Jacobian2::new(1.0, r.deriv(s.r), 0.0, 1.0);
                    match dpsi(s).inverse() {
                        Ok(inv) => dpsi(t).mul(&shear).mul(&inv),
                        Err(_) => NAN_JAC,
                    }
                })
            };
            let map = TwistMapSpec::new(forward, inverse).with_differential(differential);
            let foliation =
                FoliationSpec::new(psi.leaf.clone(), window).with_partials(psi.partials.clone());
            Ok(GalleryFamily {
                map,
                foliation,
                rho,
                conjugacy: psi.conjugacy.clone(),
            })
        }
    }
}

/// Parameters of the plateau family: the angle profile gamma has derivative
/// exactly -1 on [1/2 - hw, 1/2 + hw], blended back to its positive range
/// over quintic ramps of the given width.
#[derive(Clone, Copy, Debug)]
pub struct PlateauParams {
    pub plateau_halfwidth: f64,
    pub ramp_width: f64,
}

impl Default for PlateauParams {
    fn default() -> Self {
        Self {
            plateau_halfwidth: 0.1,
            ramp_width: 0.15,
        }
    }
}

/// Quintic smoothstep and its integral on [0, 1].
#[inline]
fn s5(t: f64) -> f64 {
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

#[inline]
fn s5_int(t: f64) -> f64 {
    t * t * t * t * (2.5 - 3.0 * t + t * t)
}

#[inline]
fn s5_deriv(t: f64) -> f64 {
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// The plateau family: foliation eta_c = c + zeta(c) gamma'(theta), its
/// degenerate limit straightening H, and the symplectic approximants H_n.
#[derive(Clone)]
pub struct PlateauFamily {
    pub params: PlateauParams,
    pub foliation: FoliationSpec,
    /// Angle interval where gamma' = -1 exactly.
    pub plateau: (f64, f64),
    amplitude: f64,
}

impl PlateauFamily {
    fn ramp_profile(&self, t: f64) -> (f64, f64, f64) {
        // returns (S, S', prefix integral T) of the blend profile at frac(t)
        let hw = self.params.plateau_halfwidth;
        let w = self.params.ramp_width;
        let (a, b) = (0.5 - hw, 0.5 + hw);
        let t = frac(t);
        if t < a - w {
            (1.0, 0.0, t)
        } else if t < a {
            let s = (t - (a - w)) / w;
            (1.0 - s5(s), -s5_deriv(s) / w, (a - w) + w * (s - s5_int(s)))
        } else if t <= b {
            (0.0, 0.0, a - 0.5 * w)
        } else if t <= b + w {
            let s = (t - b) / w;
            (s5(s), s5_deriv(s) / w, a - 0.5 * w + w * s5_int(s))
        } else {
            (1.0, 0.0, t - (b - a) - w)
        }
    }

    /// gamma(theta): 1-periodic, gamma(0) = 0, with gamma' = -1 on the
    /// plateau and integral zero.
    pub fn gamma(&self, theta: f64) -> f64 {
        let (_, _, t_int) = self.ramp_profile(theta);
        -frac(theta) + self.amplitude * t_int
    }

    pub fn dgamma(&self, theta: f64) -> f64 {
        let (s, _, _) = self.ramp_profile(theta);
        -1.0 + self.amplitude * s
    }

    pub fn d2gamma(&self, theta: f64) -> f64 {
        let (_, ds, _) = self.ramp_profile(theta);
        self.amplitude * ds
    }

    /// zeta(c) = c - c^3 / (2 (1 + c^2)): zeta'(0) = 1, zeta' < 1 elsewhere
    /// with infimum 7/16, tending to 1/2 at infinity.
    pub fn zeta(&self, c: f64) -> f64 {
        c - c * c * c / (2.0 * (1.0 + c * c))
    }

    pub fn dzeta(&self, c: f64) -> f64 {
        let c2 = c * c;
        let d = 1.0 + c2;
        1.0 - c2 * (3.0 + c2) / (2.0 * d * d)
    }

    fn zeta_n(&self, n: u32, c: f64) -> f64 {
        self.zeta(c) - c / (n as f64 * (1.0 + c * c))
    }

    fn dzeta_n(&self, n: u32, c: f64) -> f64 {
        let c2 = c * c;
        let d = 1.0 + c2;
        self.dzeta(c) - (1.0 - c2) / (n as f64 * d * d)
    }

    /// Lift of the degenerate angle conjugacy h_0 = id + gamma.
    pub fn h_zero(&self, theta: f64) -> f64 {
        theta + self.gamma(theta)
    }

    /// h_0'(theta) = 1 + gamma'(theta): vanishes exactly on the plateau.
    pub fn h_zero_derivative(&self, theta: f64) -> f64 {
        1.0 + self.dgamma(theta)
    }

    fn solve_c(&self, gamma_p: f64, r: f64, approx: Option<u32>) -> f64 {
        let f = |c: f64| {
            let z = match approx {
                Some(n) => self.zeta_n(n, c),
                None => self.zeta(c),
            };
            c + z * gamma_p - r
        };
        let df = |c: f64| {
            let dz = match approx {
                Some(n) => self.dzeta_n(n, c),
                None => self.dzeta(c),
            };
            1.0 + dz * gamma_p
        };
        match bracket_increasing(&f, r - 1.0, r + 1.0, 24) {
            Some((lo, hi)) => newton_bisect(&f, &df, lo, hi),
            None => f64::NAN,
        }
    }

    /// The limit straightening H(theta, r) = (theta + zeta'(c) gamma(theta), c)
    /// where c is the label of the leaf through the point. Well defined and
    /// continuous, but not injective: the plateau collapses at c = 0.
    pub fn straighten(&self, p: LiftPoint) -> LiftPoint {
        let c = self.solve_c(self.dgamma(p.x), p.r, None);
        LiftPoint::new(p.x + self.dzeta(c) * self.gamma(p.x), c)
    }

    /// The n-th symplectic approximant H_n, a genuine diffeomorphism built
    /// from the tempered profiles gamma_n = (1 - 1/n) gamma and
    /// zeta_n = zeta - c/(n (1 + c^2)).
    pub fn approximant(&self, n: u32, p: LiftPoint) -> LiftPoint {
        let fac = 1.0 - 1.0 / n as f64;
        let c = self.solve_c(fac * self.dgamma(p.x), p.r, Some(n));
        LiftPoint::new(p.x + self.dzeta_n(n, c) * fac * self.gamma(p.x), c)
    }

    /// Foliation straightened by H_n: leaves c + zeta_n(c) gamma_n'(theta).
    /// Unlike the limit family it keeps a positive injectivity margin at
    /// every label, so it admits a genuine straightening.
    pub fn approximant_foliation(&self, n: u32) -> FoliationSpec {
        let fac = 1.0 - 1.0 / n as f64;
        let window = self.foliation.window;
        let me = self.clone();
        let leaf: LeafFn = Arc::new(move |t: f64, c: f64| c + me.zeta_n(n, c) * fac * me.dgamma(t));
        let me = self.clone();
        let d_theta: LeafFn = Arc::new(move |t: f64, c: f64| me.zeta_n(n, c) * fac * me.d2gamma(t));
        let me = self.clone();
        let d_c: LeafFn =
            Arc::new(move |t: f64, c: f64| 1.0 + me.dzeta_n(n, c) * fac * me.dgamma(t));
        FoliationSpec::new(leaf, window).with_partials(FoliationPartials { d_theta, d_c })
    }
}

pub fn plateau_family(params: &PlateauParams) -> Result<PlateauFamily> {
    let hw = params.plateau_halfwidth;
    let w = params.ramp_width;
    if !(hw > 0.0 && w > 0.0 && hw + w <= 0.5 - 1e-9) {
        return Err(Error::InvalidArgument(
            "need 0 < plateau_halfwidth and 0 < ramp_width with their sum below 1/2".into(),
        ));
    }
    let amplitude = 1.0 / (1.0 - 2.0 * hw - w);
    let mut fam = PlateauFamily {
        params: *params,
        foliation: FoliationSpec::standard((-2.0, 2.0)), // replaced below
        plateau: (0.5 - hw, 0.5 + hw),
        amplitude,
    };
    let f1 = fam.clone();
    let leaf: LeafFn = Arc::new(move |t: f64, c: f64| c + f1.zeta(c) * f1.dgamma(t));
    let f2 = fam.clone();
    let d_theta: LeafFn = Arc::new(move |t: f64, c: f64| f2.zeta(c) * f2.d2gamma(t));
    let f3 = fam.clone();
    let d_c: LeafFn = Arc::new(move |t: f64, c: f64| 1.0 + f3.dzeta(c) * f3.dgamma(t));
    fam.foliation =
        FoliationSpec::new(leaf, (-2.0, 2.0)).with_partials(FoliationPartials { d_theta, d_c });
    // derivative conditions, checked on samples
    for i in 0..128 {
        let t = i as f64 / 128.0;
        let g = fam.dgamma(t);
        let inside = t > fam.plateau.0 + 1e-12 && t < fam.plateau.1 - 1e-12;
        if inside && g != -1.0 {
            return Err(Error::InvalidArgument(format!(
                "plateau derivative is {g} at theta = {t}, expected exactly -1"
            )));
        }
        if g < -1.0 {
            return Err(Error::InvalidArgument(format!(
                "gamma' = {g} < -1 at theta = {t}"
            )));
        }
    }
    if (fam.dzeta(0.0) - 1.0).abs() > 1e-14 || (fam.dzeta(1e4) - 0.5).abs() > 1e-7 {
        return Err(Error::InvalidArgument("zeta profile shape violated".into()));
    }
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::{build_generating_function, GridParams};
    use crate::maps::{exactness_flux, map_jacobian, sample_graph, symplectic_defect};

    const EIGHTPI: f64 = 8.0 * PI;

    fn default_params() -> StrangeParams {
        StrangeParams::with_measured_constants(EpsProfile::abs_gauss(1.0 / EIGHTPI), 1.0).unwrap()
    }

    #[test]
    fn profile_derivatives_match_difference_quotients() {
        let profiles = [
            EpsProfile::abs_gauss(0.03),
            EpsProfile::abs_linear(0.02),
            EpsProfile::smooth_gauss(0.04),
        ];
        let h = 1e-6;
        for p in &profiles {
            for &c in &[-1.3, -0.4, 0.3, 0.9, 1.7] {
                let fd1 = (p.eval(c + h) - p.eval(c - h)) / (2.0 * h);
                assert!(
                    (p.d1(c, 1.0) - fd1).abs() < 1e-8,
                    "{} d1 mismatch at c = {c}",
                    p.name
                );
                let fd2 = (p.d1(c + h, 1.0) - p.d1(c - h, 1.0)) / (2.0 * h);
                assert!(
                    (p.d2(c, 1.0) - fd2).abs() < 1e-5,
                    "{} d2 mismatch at c = {c}: {} vs {fd2}",
                    p.name,
                    p.d2(c, 1.0)
                );
            }
            // one-sided branches at the kink agree in magnitude
            assert!((p.d1(0.0, 1.0) + p.d1(0.0, -1.0)).abs() < 1e-15 || p.smooth);
        }
    }

    #[test]
    fn half_straightening_round_trips_and_partials() {
        let hs = HalfStraightening::new(EpsProfile::abs_gauss(1.0 / EIGHTPI), 1.0);
        let h = 1e-5;
        for i in 0..9 {
            for j in 1..8 {
                let p = LiftPoint::new(i as f64 / 9.0, j as f64 / 8.0);
                let q = hs.to_straight(hs.from_straight(p));
                assert!((q.x - p.x).abs() < 1e-12 && (q.r - p.r).abs() < 1e-12);
                let w = hs.partials(p.x, p.r);
                let fd_x = (hs.w(p.x + h, p.r) - hs.w(p.x - h, p.r)) / (2.0 * h);
                let fd_c = (hs.w(p.x, p.r + h) - hs.w(p.x, p.r - h)) / (2.0 * h);
                assert!((w.dw_dx - fd_x).abs() < 1e-7, "dw_dx at {p:?}");
                assert!((w.dw_dc - fd_c).abs() < 1e-7, "dw_dc at {p:?}");
                let fd_xx =
                    (hs.partials(p.x + h, p.r).dw_dx - hs.partials(p.x - h, p.r).dw_dx) / (2.0 * h);
                let fd_xc =
                    (hs.partials(p.x + h, p.r).dw_dc - hs.partials(p.x - h, p.r).dw_dc) / (2.0 * h);
                assert!((w.d2w_dx2 - fd_xx).abs() < 1e-5, "d2w_dx2 at {p:?}");
                assert!((w.d2w_dxdc - fd_xc).abs() < 1e-5, "d2w_dxdc at {p:?}");
            }
        }
    }

    #[test]
    fn measured_constants_match_closed_form_extremization() {
        let params = default_params();
        // frozen from an independent extremization of the closed forms
        assert!((params.m1 - 0.083171).abs() < 2e-3, "M1 = {:.6}", params.m1);
        assert!((params.m2 - 0.961734).abs() < 2e-3, "M2 = {:.6}", params.m2);
        // refinement stability, as a direct check on the extremization grid
        let hp = params.phi_plus();
        let (a1, a2) = m_constants(&hp, (0.0, 1.0), 128).unwrap();
        let (b1, b2) = m_constants(&hp, (0.0, 1.0), 256).unwrap();
        assert!((a1 - b1).abs() / b1 < 0.01 && (a2 - b2).abs() / b2 < 0.01);
    }

    #[test]
    fn flat_profile_constants_are_trivial() {
        let hs = HalfStraightening::new(EpsProfile::zero(), 1.0);
        let (m1, m2) = m_constants(&hs, (0.0, 1.0), 32).unwrap();
        assert!(m1.abs() < 1e-14 && (m2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn strange_map_fixes_zero_leaf_and_preserves_others() {
        let sm = strange_twist_map(&default_params()).unwrap();
        // exact identity on the glued leaf
        for i in 0..7 {
            let p = LiftPoint::new(i as f64 / 7.0, 0.0);
            let q = sm.map.step(p).unwrap();
            assert_eq!((q.x, q.r), (p.x, p.r));
        }
        // other leaves are invariant up to solver tolerance
        let mut worst = 0.0f64;
        for k in 0..20 {
            let c = -0.95 + 1.9 * k as f64 / 19.0;
            if c.abs() < 0.02 {
                continue;
            }
            for i in 0..64 {
                let t = i as f64 / 64.0;
                let p = LiftPoint::new(t, sm.foliation.leaf(t, c));
                let q = sm.map.step(p).unwrap();
                worst = worst.max((q.r - sm.foliation.leaf(q.x, c)).abs());
            }
        }
        assert!(worst < 1e-10, "leaf deviation {worst:.3e}");
    }

    #[test]
    fn strange_differential_is_symplectic_and_flattens_at_zero() {
        let sm = strange_twist_map(&default_params()).unwrap();
        let mut prev = f64::INFINITY;
        for &r in &[1e-2, 1e-3, 1e-4] {
            let mut dev = 0.0f64;
            for i in 0..13 {
                let p = LiftPoint::new(i as f64 / 13.0, r);
                let j = map_jacobian(&sm.map, p).unwrap();
                assert!((j.det() - 1.0).abs() < 1e-10, "det {} at r = {r}", j.det());
                dev = dev.max(j.dist_inf(&Jacobian2::identity()));
            }
            // one decade in r costs one decade in ||Df - I||
            assert!(dev < prev * 0.2, "dev {dev:.3e} at r = {r}");
            prev = dev;
        }
    }

    #[test]
    fn strange_map_is_exact_on_sampled_leaves() {
        // the image partition is warped, so the trapezoid sums carry
        // O(1/n^2) discretization error; 4096 samples put it well under 1e-6
        let sm = strange_twist_map(&default_params()).unwrap();
        for &c in &[-0.8, -0.3, 0.2, 0.5, 0.9] {
            let fol = sm.foliation.clone();
            let flux = exactness_flux(&sm.map, move |t| fol.leaf(t, c), 4096).unwrap();
            assert!(flux.abs() < 1e-6, "flux {flux:.3e} on leaf {c}");
        }
    }

    #[test]
    fn strange_grid_reproduces_closed_form_u() {
        let params = default_params();
        let fol = strange_foliation(&params).unwrap();
        let grid =
            build_generating_function(&fol, &GridParams::new(128, 65, (-0.75, 0.75))).unwrap();
        let mut worst = 0.0f64;
        for i in 0..grid.n_theta() {
            for j in 0..grid.n_c() {
                let (t, c) = (grid.theta[i], grid.c[j]);
                let exact = params.eps.eval(c) * (TAU * t).sin() / TAU;
                worst = worst.max((grid.u_at(i, j) - exact).abs());
            }
        }
        assert!(worst < 1e-8, "u deviation {worst:.3e}");
    }

    #[test]
    fn contraction_violations_are_rejected() {
        let bad = EpsProfile::abs_linear(1.0);
        assert!(matches!(
            StrangeParams::with_measured_constants(bad, 1.0),
            Err(Error::InvalidArgument(_))
        ));
        let shifted = EpsProfile {
            eval: Arc::new(|c: f64| 0.01 * c.abs() + 0.5),
            d1: Arc::new(|c: f64, b: f64| branch_sign(c, b) * 0.01),
            d2: Arc::new(|_, _| 0.0),
            lipschitz: 0.01,
            smooth: false,
            name: "shifted",
        };
        assert!(StrangeParams::with_measured_constants(shifted, 1.0).is_err());
    }

    #[test]
    fn vertical_shear_family_is_exact_and_rigidly_projected() {
        let psi = Conjugator::vertical_shear(
            |t: f64| 0.3 * (TAU * t).cos() + 0.1 * (2.0 * TAU * t).sin(),
            |t: f64| -0.3 * TAU * (TAU * t).sin() + 0.2 * TAU * (2.0 * TAU * t).cos(),
        );
        let fam = integrable_family(RhoFn::identity(), Some(psi), (-1.0, 1.0)).unwrap();
        // leaves are invariant and the projected dynamics is the rotation
        for &c in &[-0.7, 0.0, 0.4] {
            for i in 0..16 {
                let t = i as f64 / 16.0;
                let p = LiftPoint::new(t, fam.foliation.leaf(t, c));
                let q = fam.map.step(p).unwrap();
                assert!((q.r - fam.foliation.leaf(q.x, c)).abs() < 1e-12);
                assert!((q.x - t - fam.rho.eval(c)).abs() < 1e-12);
            }
        }
        let fol = fam.foliation.clone();
        let flux = exactness_flux(&fam.map, move |t| fol.leaf(t, 0.25), 256).unwrap();
        assert!(flux.abs() < 1e-10);
        let samples = sample_graph(|t| 0.3 * (TAU * t).sin(), 23);
        assert!(symplectic_defect(&fam.map, &samples).unwrap() < 1e-9);
    }

    #[test]
    fn angle_warp_family_has_conjugated_leaf_dynamics() {
        let psi = Conjugator::angle_warp(EpsProfile::smooth_gauss(1.0 / EIGHTPI)).unwrap();
        let fam = integrable_family(RhoFn::identity(), Some(psi), (-1.0, 1.0)).unwrap();
        let mut nontrivial = false;
        for &c in &[-0.6, 0.3, 0.8] {
            for i in 0..16 {
                let t = i as f64 / 16.0;
                let p = LiftPoint::new(t, fam.foliation.leaf(t, c));
                let q = fam.map.step(p).unwrap();
                assert!((q.r - fam.foliation.leaf(q.x, c)).abs() < 1e-10);
                // h_c(g_c(theta)) = h_c(theta) + rho(c)
                let lhs = (fam.conjugacy)(q.x, c);
                let rhs = (fam.conjugacy)(t, c) + fam.rho.eval(c);
                assert!((lhs - rhs).abs() < 1e-10, "conjugacy defect at c = {c}");
                if (q.x - t - fam.rho.eval(c)).abs() > 1e-4 {
                    nontrivial = true;
                }
            }
        }
        assert!(nontrivial, "projected dynamics collapsed to the rotation");
        let samples = sample_graph(|t| 0.2 * (TAU * t).cos(), 23);
        assert!(symplectic_defect(&fam.map, &samples).unwrap() < 1e-8);
    }

    #[test]
    fn decreasing_rho_is_rejected() {
        let err = integrable_family(RhoFn::new(|t| -t, |_| -1.0), None, (-1.0, 1.0));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn plateau_family_shape() {
        let fam = plateau_family(&PlateauParams::default()).unwrap();
        // gamma is periodic with mean-zero derivative
        assert!((fam.gamma(0.0) - fam.gamma(1.0)).abs() < 1e-15);
        // quadrature sees the ramps' large fourth derivative, so only ~1e-9
        let mean = simpson(|t| fam.dgamma(t), 0.0, 1.0, 1024);
        assert!(mean.abs() < 1e-8, "gamma' mean {mean:.3e}");
        // h_0' vanishes exactly on the plateau, positive outside
        assert_eq!(fam.h_zero_derivative(0.5), 0.0);
        assert_eq!(fam.h_zero_derivative(0.45), 0.0);
        assert!(fam.h_zero_derivative(0.2) > 0.0);
        assert!(fam.h_zero_derivative(0.8) > 0.0);
        // leaf ordering is uniform once |c| >= 0.1
        let mut min_slope = f64::INFINITY;
        for i in 0..64 {
            let t = i as f64 / 64.0;
            for k in 0..64 {
                let c = 0.1 + 1.9 * k as f64 / 63.0;
                for s in [-1.0, 1.0] {
                    min_slope = min_slope.min(1.0 + fam.dzeta(s * c) * fam.dgamma(t));
                }
            }
        }
        assert!(min_slope > 0.01, "ordering slope {min_slope:.4}");
    }

    #[test]
    fn plateau_approximants_are_uniformly_cauchy() {
        let fam = plateau_family(&PlateauParams::default()).unwrap();
        let sup_dist = |n: u32, m: u32| -> f64 {
            let mut worst = 0.0f64;
            for i in 0..=16 {
                for j in 0..=16 {
                    let p = LiftPoint::new(i as f64 / 16.0, -1.0 + 2.0 * j as f64 / 16.0);
                    let a = fam.approximant(n, p);
                    let b = if m == 0 {
                        fam.straighten(p)
                    } else {
                        fam.approximant(m, p)
                    };
                    worst = worst.max((a.x - b.x).abs()).max((a.r - b.r).abs());
                }
            }
            worst
        };
        let d48 = sup_dist(4, 8);
        let d816 = sup_dist(8, 16);
        let d1632 = sup_dist(16, 32);
        assert!(d48 > d816 && d816 > d1632, "{d48} {d816} {d1632}");
        let to_limit = sup_dist(32, 0);
        assert!(to_limit < d48, "limit distance {to_limit}");
    }

    #[test]
    fn approximants_are_diffeomorphisms_limit_is_not() {
        let fam = plateau_family(&PlateauParams::default()).unwrap();
        // the approximant angle map at c = 0 keeps a positive derivative,
        // the limit collapses the plateau to a point
        let h16 = |t: f64| fam.approximant(16, LiftPoint::new(t, 0.0)).x;
        let h_inf = |t: f64| fam.straighten(LiftPoint::new(t, 0.0)).x;
        let d = 1e-4;
        assert!(h16(0.5 + d) - h16(0.5 - d) > 0.0);
        assert!((h_inf(0.5 + d) - h_inf(0.5 - d)).abs() < 1e-12);
        assert!(h_inf(0.9) > h_inf(0.7), "injective away from the plateau");
    }
}
