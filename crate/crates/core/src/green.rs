//! Green bundles: slopes of iterated verticals, their monotone limits, the
//! graph-sandwich inequality for invariant leaves, and the dynamical
//! membership criterion.
//!
//! The slope of DF^k(F^{-k}p) applied to the vertical is monotone in k on
//! minimizing orbits: decreasing from above for k > 0, increasing from below
//! for k < 0, with the two limits bracketing every invariant graph through
//! the point. Matrix products are accumulated incrementally (one new factor
//! per k) and renormalized so hyperbolic orbits do not overflow.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::foliation::FoliationSpec;
use crate::geom::{Jacobian2, LiftPoint};
use crate::maps::{map_jacobian, TwistMapSpec};

const VERTICAL_FLOOR: f64 = 1e-14;

/// Slope of a pushed vertical from the matrix that pushes it.
/// The vertical image is (b, d), so the slope is d/b.
fn vertical_slope(m: &Jacobian2) -> Result<f64> {
    if m.b.abs() <= VERTICAL_FLOOR * (1.0 + m.d.abs()) {
        return Err(Error::VerticalImage { component: m.b });
    }
    Ok(m.d / m.b)
}

/// Divides out the largest entry so repeated products stay in range;
/// slopes are ratios and do not see the scaling.
fn renormalize(m: &mut Jacobian2) {
    let scale = m.a.abs().max(m.b.abs()).max(m.c.abs()).max(m.d.abs());
    if scale > 1e100 {
        m.a /= scale;
        m.b /= scale;
        m.c /= scale;
        m.d /= scale;
    }
}

/// Slope of DF^k(F^{-k}p) applied to the vertical (0,1): the tangent of the
/// k-step Green cone boundary at p. Negative k pulls the vertical backward
/// from the forward orbit.
pub fn green_slope(map: &TwistMapSpec, p: LiftPoint, k: i64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("green slope needs k != 0".into()));
    }
    let n = k.unsigned_abs();
    let mut m = Jacobian2::identity();
    if k > 0 {
        // factors J(F^{-1}p), J(F^{-2}p), ... multiply on the right
        let mut q = p;
        for _ in 0..n {
            q = map.step_back(q)?;
            m = m.mul(&map_jacobian(map, q)?);
            renormalize(&mut m);
        }
    } else {
        // DF^{-n}(F^n p) = J(p)^{-1} ... J(F^{n-1}p)^{-1}, new factor on the right
        let mut q = p;
        for _ in 0..n {
            m = m.mul(&map_jacobian(map, q)?.inverse()?);
            renormalize(&mut m);
            q = map.step(q)?;
        }
    }
    vertical_slope(&m)
}

/// First strict-order failure in the finite-time Green slopes.
#[derive(Clone, Copy, Debug)]
pub struct GreenViolation {
    /// 1-based index k at which the order broke.
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// Which inequality failed: "s_k decreasing", "s_-k increasing",
    /// or "s_-k below s_k".
    pub kind: &'static str,
}

/// Finite-time Green slopes at a point with their limit estimates.
#[derive(Clone, Debug)]
pub struct GreenData {
    pub base_point: LiftPoint,
    /// s_k for k = 1..=len (truncated early once converged).
    pub s_pos: Vec<f64>,
    /// s_{-k} for k = 1..=len.
    pub s_neg: Vec<f64>,
    pub s_plus_estimate: f64,
    pub s_minus_estimate: f64,
    pub converged_pos: bool,
    pub converged_neg: bool,
    /// Strict interleaving s_{-k} < s_{-(k+1)} < s_{k+1} < s_k held on the
    /// computed prefixes. A failure is evidence the orbit is not minimizing,
    /// reported rather than raised.
    pub interleaving_ok: bool,
    pub violation: Option<GreenViolation>,
}

impl GreenData {
    /// Writes rows `k,s_k,s_minus_k` over the common prefix length.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,s_k,s_minus_k")?;
        let len = self.s_pos.len().min(self.s_neg.len());
        for i in 0..len {
            writeln!(w, "{},{},{}", i + 1, self.s_pos[i], self.s_neg[i])?;
        }
        Ok(())
    }
}

/// Accumulates both monotone slope sequences out to `n_max`, stopping a side
/// early once consecutive slopes differ by less than `tol`. The limits are
/// estimated by the last computed terms.
pub fn green_limits(map: &TwistMapSpec, p: LiftPoint, n_max: usize, tol: f64) -> Result<GreenData> {
    if n_max < 2 {
        return Err(Error::InsufficientData {
            what: "green iterations",
            got: n_max,
            need: 2,
        });
    }
    let mut s_pos: Vec<f64> = Vec::with_capacity(n_max);
    let mut s_neg: Vec<f64> = Vec::with_capacity(n_max);
    let mut converged_pos = false;
    let mut converged_neg = false;

    // backward walk feeds s_k, forward walk feeds s_{-k}
    let mut m_pos = Jacobian2::identity();
    let mut q_back = p;
    let mut m_neg = Jacobian2::identity();
    let mut q_fwd = p;

    for _ in 0..n_max {
        if !converged_pos {
            q_back = map.step_back(q_back)?;
            m_pos = m_pos.mul(&map_jacobian(map, q_back)?);
            renormalize(&mut m_pos);
            let s = vertical_slope(&m_pos)?;
            if let Some(&prev) = s_pos.last() {
                if (s - prev).abs() < tol {
                    converged_pos = true;
                }
            }
            s_pos.push(s);
        }
        if !converged_neg {
            m_neg = m_neg.mul(&map_jacobian(map, q_fwd)?.inverse()?);
            renormalize(&mut m_neg);
            q_fwd = map.step(q_fwd)?;
            let s = vertical_slope(&m_neg)?;
            if let Some(&prev) = s_neg.last() {
                if (s - prev).abs() < tol {
                    converged_neg = true;
                }
            }
            s_neg.push(s);
        }
        if converged_pos && converged_neg {
            break;
        }
    }

    let mut violation = None;
    'order: {
        for (i, w) in s_pos.windows(2).enumerate() {
            if !(w[1] < w[0] + 1e-12) {
                violation = Some(GreenViolation {
                    k: i + 1,
                    lhs: w[1],
                    rhs: w[0],
                    kind: "s_k decreasing",
                });
                break 'order;
            }
        }
        for (i, w) in s_neg.windows(2).enumerate() {
            if !(w[0] < w[1] + 1e-12) {
                violation = Some(GreenViolation {
                    k: i + 1,
                    lhs: w[0],
                    rhs: w[1],
                    kind: "s_-k increasing",
                });
                break 'order;
            }
        }
        // minimizing orbits keep every backward slope below every forward
        // slope; by monotonicity it suffices to compare the last terms
        let (Some(&hi), Some(&lo)) = (s_pos.last(), s_neg.last()) else {
            break 'order;
        };
        if !(lo < hi + 1e-12) {
            violation = Some(GreenViolation {
                k: s_pos.len().min(s_neg.len()),
                lhs: lo,
                rhs: hi,
                kind: "s_-k below s_k",
            });
        }
    }

    Ok(GreenData {
        base_point: p,
        s_plus_estimate: *s_pos.last().expect("n_max >= 2"),
        s_minus_estimate: *s_neg.last().expect("n_max >= 2"),
        s_pos,
        s_neg,
        converged_pos,
        converged_neg,
        interleaving_ok: violation.is_none(),
        violation,
    })
}

/// One sample of the graph-sandwich check on a leaf.
#[derive(Clone, Copy, Debug)]
pub struct SandwichSample {
    pub theta: f64,
    /// Lower and upper finite-difference Dini slopes of the leaf.
    pub leaf_lower: f64,
    pub leaf_upper: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    pub ok: bool,
}

/// Sandwich report: leaf Dini slopes against the Green bracket per sample.
#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub c: f64,
    pub samples: Vec<SandwichSample>,
    pub violations: usize,
    /// Largest amount a leaf slope escapes the Green bracket (<= 0 if none).
    pub max_excess: f64,
}

/// Checks s_-(p) <= leaf' <= s_+(p) at `samples` points of the leaf labeled
/// c, with leaf slopes bracketed by finite differences over offsets
/// {±h, ±h/2}. Violations are reported with locations, never raised: a
/// failure is the slope sandwich detecting a curve that is not an
/// invariant graph of a minimizing set.
pub fn sandwich_check(
    map: &TwistMapSpec,
    fol: &FoliationSpec,
    c: f64,
    samples: usize,
    n_max: usize,
    tol: f64,
) -> Result<SandwichReport> {
    if samples < 4 {
        return Err(Error::InsufficientData {
            what: "sandwich samples",
            got: samples,
            need: 4,
        });
    }
    let h = 1e-4;
    let results: Vec<SandwichSample> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<SandwichSample> {
            let t = i as f64 / samples as f64;
            let p = LiftPoint::new(t, fol.leaf(t, c));
            let green = green_limits(map, p, n_max, 1e-9)?;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for d in [h, 0.5 * h, -0.5 * h, -h] {
                let slope = (fol.leaf(t + d, c) - fol.leaf(t, c)) / d;
                lo = lo.min(slope);
                hi = hi.max(slope);
            }
            let ok = green.s_minus_estimate - tol <= lo && hi <= green.s_plus_estimate + tol;
            Ok(SandwichSample {
                theta: t,
                leaf_lower: lo,
                leaf_upper: hi,
                s_minus: green.s_minus_estimate,
                s_plus: green.s_plus_estimate,
                ok,
            })
        })
        .collect::<Result<_>>()?;
    let violations = results.iter().filter(|s| !s.ok).count();
    let max_excess = results
        .iter()
        .map(|s| (s.s_minus - s.leaf_lower).max(s.leaf_upper - s.s_plus))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SandwichReport {
        c,
        samples: results,
        violations,
        max_excess,
    })
}

/// Evidence from the dynamical criterion: bounded projected growth of a
/// tangent vector along the orbit.
#[derive(Clone, Copy, Debug)]
pub struct DynamicalEvidence {
    /// Slope of the tested vector (infinite for the vertical).
    pub slope: f64,
    /// Min of |pi(DF^n v)| over the tail half of the window, both ways.
    pub forward_min: f64,
    pub backward_min: f64,
    /// Bounded forward projection is evidence the vector lies in G_-.
    pub forward_bounded: bool,
    /// Bounded backward projection is evidence the vector lies in G_+.
    pub backward_bounded: bool,
    pub s_minus: f64,
    pub s_plus: f64,
    pub n_max: usize,
}

/// Pushes v along the orbit both ways and watches the first (angle)
/// component. liminf is proxied by the min over the tail half of the
/// window; "bounded" means that min never exceeded the initial scale + 1.
pub fn dynamical_criterion(
    map: &TwistMapSpec,
    p: LiftPoint,
    v: (f64, f64),
    n_max: usize,
) -> Result<DynamicalEvidence> {
    if n_max < 4 {
        return Err(Error::InsufficientData {
            what: "criterion iterations",
            got: n_max,
            need: 4,
        });
    }
    let tail_start = n_max / 2;
    let run = |forward: bool| -> Result<f64> {
        let mut q = p;
        let mut w = v;
        let mut tail_min = f64::INFINITY;
        for n in 1..=n_max {
            if forward {
                let j = map_jacobian(map, q)?;
                w = j.apply(w);
                q = map.step(q)?;
            } else {
                let j = map_jacobian(map, q)?.inverse()?;
                w = j.apply(w);
                q = map.step_back(q)?;
            }
            if !w.0.is_finite() {
                return Ok(f64::INFINITY);
            }
            if n >= tail_start {
                tail_min = tail_min.min(w.0.abs());
            }
        }
        Ok(tail_min)
    };
    let forward_min = run(true)?;
    let backward_min = run(false)?;
    let bound = v.0.abs() + 1.0;
    let green = green_limits(map, p, n_max.max(2), 1e-9)?;
    Ok(DynamicalEvidence {
        slope: if v.0 == 0.0 { f64::INFINITY } else { v.1 / v.0 },
        forward_min,
        backward_min,
        forward_bounded: forward_min <= bound,
        backward_bounded: backward_min <= bound,
        s_minus: green.s_minus_estimate,
        s_plus: green.s_plus_estimate,
        n_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{
        integrable_family, strange_twist_map, Conjugator, EpsProfile, RhoFn, StrangeParams,
    };
    use crate::maps::shear_map;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn integrable() -> TwistMapSpec {
        shear_map(|r| r, |_| 1.0)
    }

    #[test]
    fn integrable_slopes_are_reciprocal_k() {
        let map = integrable();
        let p = LiftPoint::new(0.3, 0.7);
        for k in 1..=20i64 {
            let s = green_slope(&map, p, k).unwrap();
            assert!((s - 1.0 / k as f64).abs() < 1e-12, "s_{k} = {s}");
            let sm = green_slope(&map, p, -k).unwrap();
            assert!((sm + 1.0 / k as f64).abs() < 1e-12, "s_-{k} = {sm}");
        }
        assert!(matches!(
            green_slope(&map, p, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn integrable_limits_interleave_and_trend_to_zero() {
        let map = integrable();
        let data = green_limits(&map, LiftPoint::new(0.0, 0.25), 200, 1e-9).unwrap();
        assert!(data.interleaving_ok, "violation: {:?}", data.violation);
        assert!(!data.converged_pos, "1/n rate cannot hit 1e-9 by n = 200");
        assert!((data.s_plus_estimate - 1.0 / 200.0).abs() < 1e-12);
        assert!((data.s_minus_estimate + 1.0 / 200.0).abs() < 1e-12);
        assert!(data.s_minus_estimate <= data.s_plus_estimate);
        // strict interleaving at the default tolerance
        for w in data.s_pos.windows(2) {
            assert!(w[1] < w[0] + 1e-12);
        }
        for w in data.s_neg.windows(2) {
            assert!(w[0] < w[1] + 1e-12);
        }
    }

    fn strange_params() -> StrangeParams {
        StrangeParams::with_measured_constants(EpsProfile::abs_gauss(1.0 / (8.0 * PI)), 1.0)
            .unwrap()
    }

    #[test]
    fn product_reassociation_agrees_on_strange_leaf() {
        let strange = strange_twist_map(&strange_params()).unwrap();
        let p0 = {
            let t: f64 = 0.17;
            LiftPoint::new(t, strange.foliation.leaf(t, 0.5))
        };
        let s4 = green_slope(&strange.map, p0, 4).unwrap();
        // opposite association: pairwise products first
        let mut pts = Vec::new();
        let mut q = p0;
        for _ in 0..4 {
            q = strange.map.step_back(q).unwrap();
            pts.push(q);
        }
        let j = |i: usize| map_jacobian(&strange.map, pts[i]).unwrap();
        let left = j(0).mul(&j(1));
        let right = j(2).mul(&j(3));
        let m = left.mul(&right);
        let oracle = m.d / m.b;
        assert!(
            (s4 - oracle).abs() < 1e-10 * (1.0 + oracle.abs()),
            "{s4} vs {oracle}"
        );
    }

    /// Linear hyperbolic twist (2x+r, x+r): eigen-slopes are golden.
    fn hyperbolic() -> TwistMapSpec {
        TwistMapSpec::new(
            Arc::new(|p: LiftPoint| LiftPoint::new(2.0 * p.x + p.r, p.x + p.r)),
            Arc::new(|p: LiftPoint| LiftPoint::new(p.x - p.r, -p.x + 2.0 * p.r)),
        )
    }

    #[test]
    fn hyperbolic_limits_are_the_eigen_slopes() {
        let map = hyperbolic();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let data = green_limits(&map, LiftPoint::new(0.0, 0.0), 200, 1e-12).unwrap();
        assert!(data.converged_pos && data.converged_neg, "exponential rate");
        assert!(
            (data.s_plus_estimate - (phi - 1.0)).abs() < 1e-9,
            "unstable slope"
        );
        assert!((data.s_minus_estimate + phi).abs() < 1e-9, "stable slope");
        assert!(data.interleaving_ok);
        assert!(
            data.s_plus_estimate - data.s_minus_estimate > 2.0,
            "gap reported"
        );
    }

    #[test]
    fn dynamical_criterion_on_integrable_and_hyperbolic() {
        let map = integrable();
        let p = LiftPoint::new(0.1, 0.4);
        let horiz = dynamical_criterion(&map, p, (1.0, 0.0), 64).unwrap();
        assert!(horiz.forward_bounded && horiz.backward_bounded);
        assert_eq!(horiz.slope, 0.0);
        assert!(horiz.slope >= horiz.s_minus && horiz.slope <= horiz.s_plus);
        let vert = dynamical_criterion(&map, p, (0.0, 1.0), 64).unwrap();
        assert!(!vert.forward_bounded, "pi DF^n (0,1) = n grows");
        assert!(!vert.backward_bounded);

        let hyp = hyperbolic();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let o = LiftPoint::new(0.0, 0.0);
        let stable = dynamical_criterion(&hyp, o, (1.0, -phi), 64).unwrap();
        assert!(stable.forward_bounded && !stable.backward_bounded);
        assert!((stable.slope - stable.s_minus).abs() < 1e-9);
        let unstable = dynamical_criterion(&hyp, o, (1.0, phi - 1.0), 64).unwrap();
        assert!(!unstable.forward_bounded && unstable.backward_bounded);
        assert!((unstable.slope - unstable.s_plus).abs() < 1e-9);
    }

    #[test]
    fn fixed_leaf_bundles_collapse_to_the_leaf_tangent() {
        // on the fixed leaf of the warped integrable family the map is
        // parabolic at every point: both limits close on the leaf slope at
        // the shear's 1/k rate
        let eps = EpsProfile::smooth_gauss(1.0 / (8.0 * PI));
        let psi = Conjugator::angle_warp(eps).unwrap();
        let fam = integrable_family(RhoFn::identity(), Some(psi), (-1.0, 1.0)).unwrap();
        let n = 200;
        for &t in &[0.11, 0.42, 0.73] {
            let p = LiftPoint::new(t, fam.foliation.leaf(t, 0.0));
            let data = green_limits(&fam.map, p, n, 1e-12).unwrap();
            let gap = data.s_plus_estimate - data.s_minus_estimate;
            assert!(gap >= 0.0 && gap < 4.0 / n as f64 * 2.0, "gap {gap:.3e}");
            let slope = fam.foliation.d_theta(t, 0.0).unwrap();
            let mid = 0.5 * (data.s_plus_estimate + data.s_minus_estimate);
            assert!((mid - slope).abs() < 1e-3, "mid {mid} vs slope {slope}");
            assert!(data.interleaving_ok);
        }
    }

    #[test]
    fn green_slopes_transport_under_the_differential() {
        let strange = strange_twist_map(&strange_params()).unwrap();
        let t: f64 = 0.37;
        let p = LiftPoint::new(t, strange.foliation.leaf(t, 0.3));
        let n = 400;
        let here = green_limits(&strange.map, p, n, 1e-12).unwrap();
        let img = strange.map.step(p).unwrap();
        let there = green_limits(&strange.map, img, n, 1e-12).unwrap();
        let j = map_jacobian(&strange.map, p).unwrap();
        let v = j.apply((1.0, here.s_plus_estimate));
        let transported = v.1 / v.0;
        assert!(
            (transported - there.s_plus_estimate).abs() < 5e-3,
            "transport defect {:.3e}",
            (transported - there.s_plus_estimate).abs()
        );
    }

    #[test]
    fn sandwich_holds_on_gallery_leaves_and_flags_tilted_curves() {
        let map = integrable();
        let fol = FoliationSpec::standard((-1.0, 1.0));
        let flat = sandwich_check(&map, &fol, 0.25, 16, 60, 1e-9).unwrap();
        assert_eq!(flat.violations, 0);
        for s in &flat.samples {
            assert!(s.leaf_lower.abs() < 1e-12 && s.s_plus.abs() < 0.02);
        }

        let strange = strange_twist_map(&strange_params()).unwrap();
        let report = sandwich_check(&strange.map, &strange.foliation, 0.3, 64, 60, 1e-6).unwrap();
        assert_eq!(report.violations, 0, "max excess {:.3e}", report.max_excess);

        // tilt the leaves: no longer invariant, the sandwich must fail
        let base = strange.foliation.clone();
        let tilted = FoliationSpec::new(
            Arc::new(move |t: f64, c: f64| base.leaf(t, c) + 0.1 * (2.0 * PI * t).sin()),
            (-1.0, 1.0),
        );
        let bad = sandwich_check(&strange.map, &tilted, 0.3, 32, 60, 1e-6).unwrap();
        assert!(bad.violations > 0, "tilted curve escaped the bracket check");
        assert!(bad.max_excess > 0.1);
    }
}
