//! Projected circle dynamics on invariant leaves: rotation numbers with
//! rigorous brackets, invariant-measure CDFs, semi-conjugacies, densities on
//! rational leaves, and the rotation profile across the foliation.
//!
//! Rotation orbits are iterated in reduced circle coordinates (displacements
//! are periodic, and the fractional part of a double is exact) and summed
//! with compensation, so million-step estimates stay within their 1/n
//! bracket instead of drowning in accumulated rounding.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::foliation::{FoliationSpec, GeneratingGrid};
use crate::geom::{frac, LiftPoint};
use crate::maps::{map_jacobian, TwistMapSpec};
use crate::quad::CompensatedSum;

/// A monotone degree-one lift of a circle map, validated on samples.
#[derive(Clone)]
pub struct CircleMapLift {
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CircleMapLift {
    pub fn new(g: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self> {
        for k in 0..16 {
            let x = k as f64 / 16.0;
            let defect = g(x + 1.0) - g(x) - 1.0;
            if !defect.is_finite() || defect.abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "not a degree-one lift: g(x+1) - g(x) - 1 = {defect:.3e} at x = {x}"
                )));
            }
        }
        let mut prev = g(0.0);
        for k in 1..=128 {
            let cur = g(k as f64 / 128.0);
            if !(cur > prev) {
                return Err(Error::InvalidArgument(format!(
                    "lift not strictly increasing near x = {}",
                    k as f64 / 128.0
                )));
            }
            prev = cur;
        }
        Ok(Self { g })
    }

    pub fn from_fn<F>(g: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(g))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.g)(x)
    }
}

/// The projected dynamics on the leaf labeled c:
/// g(x) = (angle of f(x, eta_c(x))), normalized so g(0) lies in [0, 1).
///
/// Fails with the maximum fiber deviation when the sampled leaf is not
/// invariant within `invariance_tol`.
pub fn projected_circle_map(
    map: &TwistMapSpec,
    fol: &FoliationSpec,
    c: f64,
    invariance_tol: f64,
) -> Result<CircleMapLift> {
    projected_lift_parts(map, fol, c, invariance_tol).map(|(g, _)| g)
}

/// Normalized lift plus the integer stripped from the map's own lift;
/// adding it back restores cross-leaf continuity of the rotation number.
fn projected_lift_parts(
    map: &TwistMapSpec,
    fol: &FoliationSpec,
    c: f64,
    invariance_tol: f64,
) -> Result<(CircleMapLift, f64)> {
    let mut max_dev: f64 = 0.0;
    for i in 0..32 {
        let t = i as f64 / 32.0;
        let q = map.step(LiftPoint::new(t, fol.leaf(t, c)))?;
        max_dev = max_dev.max((q.r - fol.leaf(q.x, c)).abs());
    }
    if max_dev > invariance_tol {
        return Err(Error::NotInvariant {
            max_dev,
            tol: invariance_tol,
        });
    }
    let m = map.clone();
    let f = fol.clone();
    let raw = move |x: f64| -> f64 {
        match m.step(LiftPoint::new(x, f.leaf(x, c))) {
            Ok(q) => q.x,
            Err(_) => f64::NAN,
        }
    };
    let offset = raw(0.0).floor();
    let g = CircleMapLift::new(Arc::new(move |x: f64| raw(x) - offset))?;
    Ok((g, offset))
}

/// Rotation-number estimate with the rigorous monotone-lift bracket.
#[derive(Clone, Copy, Debug)]
pub struct RotationEstimate {
    pub value: f64,
    /// |value - rho| < bracket, from g^n(0) - n rho in (-1, 1).
    pub bracket: f64,
    pub iterations: u64,
}

/// Birkhoff average of angle displacements along the orbit of 0. Iterates
/// until the 1/n bracket reaches `tol` or `n_max` steps, whichever is first.
/// Pass tol = 0 to force the full n_max.
pub fn rotation_number(g: &CircleMapLift, n_max: u64, tol: f64) -> Result<RotationEstimate> {
    if n_max < 100 {
        return Err(Error::InsufficientData {
            what: "rotation iterations",
            got: n_max as usize,
            need: 100,
        });
    }
    let n = if tol > 0.0 {
        ((1.0 / tol).ceil() as u64).clamp(100, n_max)
    } else {
        n_max
    };
    let mut theta = 0.0f64;
    let mut acc = CompensatedSum::new();
    for _ in 0..n {
        let y = g.eval(theta);
        if !y.is_finite() {
            return Err(Error::Divergence {
                coord: "x",
                value: y,
                bound: f64::INFINITY,
                steps: n,
            });
        }
        acc.add(y - theta);
        theta = frac(y);
    }
    Ok(RotationEstimate {
        value: acc.value() / n as f64,
        bracket: 1.0 / n as f64 + 1e-12,
        iterations: n,
    })
}

/// Empirical invariant-measure data on one leaf: the rotation number, the
/// CDF h at requested nodes, per-node semi-conjugacy residuals, and the
/// orbit itself (sorted) for exact rank queries.
#[derive(Clone, Debug)]
pub struct ConjugacyData {
    pub rho: f64,
    pub rho_bracket: f64,
    pub theta_nodes: Vec<f64>,
    pub h_samples: Vec<f64>,
    /// Per-node |h(g(theta)) - h(theta) - rho|; empty when h came from a
    /// generating grid rather than an orbit.
    pub residuals: Vec<f64>,
    /// Sup of `residuals` (0 for grid-derived data until measured).
    pub residual: f64,
    pub orbit_length: usize,
    /// Orbit counts #{j < N : g^j(0) in [0, theta_i)}.
    pub m_counts: Vec<u64>,
    orbit_sorted: Vec<f64>,
}

impl ConjugacyData {
    /// CDF value as a lift: exact orbit rank when an orbit is stored,
    /// piecewise-linear interpolation of the node samples otherwise.
    pub fn h(&self, theta: f64) -> f64 {
        let t = frac(theta);
        let whole = theta - t;
        if !self.orbit_sorted.is_empty() {
            let rank = self.orbit_sorted.partition_point(|&p| p < t);
            return whole + rank as f64 / self.orbit_sorted.len() as f64;
        }
        let nodes = &self.theta_nodes;
        let idx = nodes.partition_point(|&p| p <= t).saturating_sub(1);
        let i = idx.min(nodes.len() - 2);
        let (t0, t1) = (nodes[i], nodes[i + 1]);
        let (h0, h1) = (self.h_samples[i], self.h_samples[i + 1]);
        let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        whole + h0 + s * (h1 - h0)
    }

    /// Builds h = id + du/dc(., c) - du/dc(0, c) from a generating grid; the
    /// canonical semi-conjugacy candidate for leaves of a straightenable
    /// foliation. Residuals are left for `semiconjugacy_residual`.
    pub fn from_generating_grid(grid: &GeneratingGrid, c: f64, rho: f64, rho_bracket: f64) -> Self {
        let base = grid.du_dc_interp(0.0, c);
        let h_samples: Vec<f64> = grid
            .theta
            .iter()
            .map(|&t| t + grid.du_dc_interp(t, c) - base)
            .collect();
        Self {
            rho,
            rho_bracket,
            theta_nodes: grid.theta.clone(),
            h_samples,
            residuals: Vec::new(),
            residual: 0.0,
            orbit_length: 0,
            m_counts: Vec::new(),
            orbit_sorted: Vec::new(),
        }
    }

    /// Writes rows `theta,h,residual` (residual column empty-equivalent 0
    /// for grid-derived data).
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,h,residual")?;
        for (i, &t) in self.theta_nodes.iter().enumerate() {
            let r = self.residuals.get(i).copied().unwrap_or(0.0);
            writeln!(w, "{},{},{}", t, self.h_samples[i], r)?;
        }
        Ok(())
    }
}

/// Orbit-frequency CDF of the unique invariant measure on the leaf:
/// h(theta) = #{j < N : g^j(0) mod 1 in [0, theta)} / N at each node,
/// with the rotation number and its bracket from the same orbit.
pub fn measure_cdf(g: &CircleMapLift, theta_nodes: &[f64], n: usize) -> Result<ConjugacyData> {
    if n < 100 {
        return Err(Error::InsufficientData {
            what: "orbit length",
            got: n,
            need: 100,
        });
    }
    if theta_nodes.len() < 2 {
        return Err(Error::InsufficientData {
            what: "cdf nodes",
            got: theta_nodes.len(),
            need: 2,
        });
    }
    let mut theta = 0.0f64;
    let mut acc = CompensatedSum::new();
    let mut orbit = Vec::with_capacity(n);
    for _ in 0..n {
        orbit.push(theta);
        let y = g.eval(theta);
        if !y.is_finite() {
            return Err(Error::Divergence {
                coord: "x",
                value: y,
                bound: f64::INFINITY,
                steps: n as u64,
            });
        }
        acc.add(y - theta);
        theta = frac(y);
    }
    let rho = acc.value() / n as f64;
    let mut sorted = orbit;
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("orbit points are finite"));
    let rank = |t: f64| -> u64 { sorted.partition_point(|&p| p < t) as u64 };
    let h_lift = |t: f64| -> f64 {
        let ft = frac(t);
        (t - ft) + rank(ft) as f64 / n as f64
    };
    let mut h_samples = Vec::with_capacity(theta_nodes.len());
    let mut m_counts = Vec::with_capacity(theta_nodes.len());
    let mut residuals = Vec::with_capacity(theta_nodes.len());
    let mut residual = 0.0f64;
    for &t in theta_nodes {
        h_samples.push(h_lift(t));
        m_counts.push((h_lift(t) * n as f64).round().max(0.0) as u64);
        let r = (h_lift(g.eval(t)) - h_lift(t) - rho).abs();
        residuals.push(r);
        residual = residual.max(r);
    }
    Ok(ConjugacyData {
        rho,
        rho_bracket: 1.0 / n as f64 + 1e-12,
        theta_nodes: theta_nodes.to_vec(),
        h_samples,
        residuals,
        residual,
        orbit_length: n,
        m_counts,
        orbit_sorted: sorted,
    })
}

/// Sup over the data's nodes of |h(g(theta)) - h(theta) - rho|: how far h
/// is from semi-conjugating g to the rigid rotation.
pub fn semiconjugacy_residual(data: &ConjugacyData, g: &CircleMapLift) -> f64 {
    let mut worst = 0.0f64;
    for &t in &data.theta_nodes {
        worst = worst.max((data.h(g.eval(t)) - data.h(t) - data.rho).abs());
    }
    worst
}

/// Invariant density on a leaf of q-periodic points, from the torsion of
/// the q-th iterate.
#[derive(Clone, Debug)]
pub struct LeafDensity {
    pub theta: Vec<f64>,
    /// Normalized density, proportional to 1/sqrt(s_q).
    pub density: Vec<f64>,
    /// CDF of the density: h(0) = 0, h(1) = 1.
    pub h: Vec<f64>,
    pub p: i64,
    pub q: u32,
    pub s_min: f64,
    pub s_max: f64,
    /// Max deviation of F^q from the translation by (p, 0) on leaf samples.
    pub return_gap: f64,
}

/// Density 1/sqrt(s_q) (normalized) on a leaf where f^q is the identity,
/// s_q being the upper-right entry of DF^q along the leaf. The periodicity
/// precondition is certified by the rotation bracket plus a direct return
/// check before any torsion is accumulated.
pub fn rational_leaf_density(
    map: &TwistMapSpec,
    fol: &FoliationSpec,
    c: f64,
    q: u32,
    n_theta: usize,
) -> Result<LeafDensity> {
    if q == 0 {
        return Err(Error::InvalidArgument("period q must be positive".into()));
    }
    if n_theta < 16 {
        return Err(Error::GridTooSmall {
            what: "density nodes",
            need: 16,
            got: n_theta,
        });
    }
    let g = projected_circle_map(map, fol, c, 1e-8)?;
    let est = rotation_number(&g, (1000 * q as u64).max(10_000), 0.0)?;
    let p = (est.value * q as f64).round() as i64;
    let mut return_gap = 0.0f64;
    for i in 0..16 {
        let t = i as f64 / 16.0;
        let start = LiftPoint::new(t, fol.leaf(t, c));
        let end = map.iterate(start, q as i64)?;
        return_gap = return_gap
            .max((end.x - start.x - p as f64).abs())
            .max((end.r - start.r).abs());
    }
    if (est.value - p as f64 / q as f64).abs() > est.bracket + 1.0 / q as f64 || return_gap > 1e-6 {
        return Err(Error::NotPeriodic {
            rho: est.value,
            bracket: est.bracket,
            p,
            q,
            return_gap,
        });
    }
    // torsion of the q-th iterate at nodes and cell midpoints
    let samples = 2 * n_theta;
    let mut raw = Vec::with_capacity(samples + 1);
    let mut s_min = f64::INFINITY;
    let mut s_max = f64::NEG_INFINITY;
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        let mut pnt = LiftPoint::new(t, fol.leaf(t, c));
        let mut acc = map_jacobian(map, pnt)?;
        for _ in 1..q {
            pnt = map.step(pnt)?;
            acc = map_jacobian(map, pnt)?.mul(&acc);
        }
        let s = acc.b;
        if s <= 0.0 {
            return Err(Error::TorsionSign { theta: t, value: s });
        }
        s_min = s_min.min(s);
        s_max = s_max.max(s);
        raw.push(1.0 / s.sqrt());
    }
    // composite Simpson over the sampled cells: mass, then the prefix CDF
    let dt = 1.0 / n_theta as f64;
    let cell = |k: usize| (raw[2 * k] + 4.0 * raw[2 * k + 1] + raw[2 * k + 2]) * dt / 6.0;
    let mass: f64 = (0..n_theta).map(cell).sum();
    let mut h = Vec::with_capacity(n_theta + 1);
    let mut theta = Vec::with_capacity(n_theta + 1);
    let mut run = 0.0;
    h.push(0.0);
    theta.push(0.0);
    for k in 0..n_theta {
        run += cell(k);
        theta.push((k + 1) as f64 * dt);
        h.push(run / mass);
    }
    let density: Vec<f64> = (0..=n_theta).map(|k| raw[2 * k] / mass).collect();
    Ok(LeafDensity {
        theta,
        density,
        h,
        p,
        q,
        s_min,
        s_max,
        return_gap,
    })
}

/// Rotation numbers across the foliation with empirical Lipschitz bounds.
#[derive(Clone, Debug)]
pub struct RhoProfile {
    pub c_nodes: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub brackets: Vec<f64>,
    /// Min and max of adjacent difference quotients.
    pub lower_lip: f64,
    pub upper_lip: f64,
}

impl RhoProfile {
    /// Writes rows `c,rho,bracket`.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "c,rho,bracket")?;
        for i in 0..self.c_nodes.len() {
            writeln!(
                w,
                "{},{},{}",
                self.c_nodes[i], self.rho_values[i], self.brackets[i]
            )?;
        }
        Ok(())
    }
}

/// Rotation number per leaf node (in parallel), with difference-quotient
/// Lipschitz bounds. A decrease beyond the combined brackets is a twist
/// violation and aborts the profile.
pub fn rho_profile(
    map: &TwistMapSpec,
    fol: &FoliationSpec,
    c_nodes: &[f64],
    n_max: u64,
    invariance_tol: f64,
) -> Result<RhoProfile> {
    if c_nodes.len() < 2 {
        return Err(Error::InsufficientData {
            what: "profile nodes",
            got: c_nodes.len(),
            need: 2,
        });
    }
    let estimates: Vec<RotationEstimate> = c_nodes
        .par_iter()
        .map(|&c| {
            let (g, offset) = projected_lift_parts(map, fol, c, invariance_tol)?;
            let mut est = rotation_number(&g, n_max, 0.0)?;
            est.value += offset;
            Ok(est)
        })
        .collect::<Result<_>>()?;
    let rho_values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let brackets: Vec<f64> = estimates.iter().map(|e| e.bracket).collect();
    let mut lower_lip = f64::INFINITY;
    let mut upper_lip = f64::NEG_INFINITY;
    for i in 0..c_nodes.len() - 1 {
        let dc = c_nodes[i + 1] - c_nodes[i];
        if !(dc > 0.0) {
            return Err(Error::InvalidArgument(
                "profile nodes must be strictly increasing".into(),
            ));
        }
        let drho = rho_values[i + 1] - rho_values[i];
        if drho < -(brackets[i] + brackets[i + 1]) {
            return Err(Error::TwistViolation {
                c_lo: c_nodes[i],
                c_hi: c_nodes[i + 1],
                rho_lo: rho_values[i],
                rho_hi: rho_values[i + 1],
            });
        }
        lower_lip = lower_lip.min(drho / dc);
        upper_lip = upper_lip.max(drho / dc);
    }
    Ok(RhoProfile {
        c_nodes: c_nodes.to_vec(),
        rho_values,
        brackets,
        lower_lip,
        upper_lip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::{build_generating_function, GridParams};
    use crate::gallery::{integrable_family, Conjugator, EpsProfile, RhoFn};
    use crate::maps::shear_map;
    use crate::solve::newton_bisect;
    use std::f64::consts::{PI, TAU};

    fn rigid(alpha: f64) -> CircleMapLift {
        CircleMapLift::from_fn(move |x| x + alpha).unwrap()
    }

    #[test]
    fn rigid_rotation_recovers_alpha_exactly_within_bracket() {
        let est = rotation_number(&rigid(0.377), 10_000, 0.0).unwrap();
        assert!((est.value - 0.377).abs() < est.bracket);
        // translate the lift by 1: rotation number shifts by 1
        let est_up = rotation_number(&rigid(1.377), 10_000, 0.0).unwrap();
        assert!((est_up.value - est.value - 1.0).abs() < 2.0 * est.bracket);
        // the inverse rotates backwards
        let est_inv = rotation_number(&rigid(-0.377), 10_000, 0.0).unwrap();
        assert!((est_inv.value + est.value).abs() < 2.0 * est.bracket);
        assert!(matches!(
            rotation_number(&rigid(0.1), 99, 0.0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn fixed_point_forces_zero() {
        let g = CircleMapLift::from_fn(|x: f64| {
            let s = (PI * frac(x)).sin();
            x + 0.1 * s * s
        })
        .unwrap();
        let est = rotation_number(&g, 5_000, 0.0).unwrap();
        assert_eq!(est.value, 0.0, "orbit of the fixed point at 0 never moves");
    }

    #[test]
    fn arnold_lift_brackets_are_consistent() {
        let g = CircleMapLift::from_fn(|x: f64| x + 0.3 + 0.05 * (TAU * x).sin() / TAU).unwrap();
        let coarse = rotation_number(&g, 20_000, 0.0).unwrap();
        let fine = rotation_number(&g, 200_000, 0.0).unwrap();
        assert!(
            (coarse.value - fine.value).abs() <= coarse.bracket + fine.bracket,
            "brackets must overlap: {} vs {}",
            coarse.value,
            fine.value
        );
        // tol-driven early stop
        let quick = rotation_number(&g, 200_000, 1e-3).unwrap();
        assert_eq!(quick.iterations, 1000);
    }

    #[test]
    fn projection_on_integrable_leaf_is_the_rotation() {
        let fam = integrable_family(RhoFn::identity(), None, (-1.0, 1.0)).unwrap();
        let g = projected_circle_map(&fam.map, &fam.foliation, 0.3, 1e-8).unwrap();
        for i in 0..8 {
            let x = i as f64 / 8.0;
            assert!((g.eval(x) - x - 0.3).abs() < 1e-14);
        }
        // tilted map leaves no horizontal leaf invariant
        let tilt = TwistMapSpec::new(
            Arc::new(|p: LiftPoint| LiftPoint::new(p.x + p.r, p.r + 0.05)),
            Arc::new(|p: LiftPoint| LiftPoint::new(p.x - p.r + 0.05, p.r - 0.05)),
        );
        let err = projected_circle_map(&tilt, &fam.foliation, 0.3, 1e-8);
        assert!(matches!(err, Err(Error::NotInvariant { .. })));
    }

    fn phi(x: f64) -> f64 {
        x + 0.15 * (TAU * x).sin() / TAU
    }

    fn phi_inv(y: f64) -> f64 {
        let f = |x: f64| phi(x) - y;
        let df = |x: f64| 1.0 + 0.15 * (TAU * x).cos();
        newton_bisect(&f, &df, y - 0.1, y + 0.1)
    }

    #[test]
    fn cdf_of_conjugated_rotation_recovers_the_conjugacy() {
        let alpha = 2f64.sqrt() - 1.0;
        let g = CircleMapLift::from_fn(move |x| phi(phi_inv(x) + alpha)).unwrap();
        let nodes: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let n = 20_000;
        let data = measure_cdf(&g, &nodes, n).unwrap();
        assert_eq!(data.h_samples[0], 0.0);
        assert_eq!(*data.h_samples.last().unwrap(), 1.0);
        for w in data.h_samples.windows(2) {
            assert!(w[1] >= w[0], "cdf must be monotone");
        }
        let mut sup = 0.0f64;
        for &t in &nodes {
            sup = sup.max((data.h(t) - (phi_inv(t) - phi_inv(0.0))).abs());
        }
        assert!(sup < 3.0 / n as f64, "cdf distance {sup:.3e}");
        assert!(
            data.residual < 5.0 / n as f64,
            "residual {:.3e}",
            data.residual
        );
        assert!((semiconjugacy_residual(&data, &g) - data.residual).abs() < 1e-15);
        assert!((data.rho - alpha).abs() < data.rho_bracket);
        // orbit counts match the sampled CDF
        for (i, &m) in data.m_counts.iter().enumerate() {
            assert_eq!(m as f64 / n as f64, data.h_samples[i]);
        }
    }

    #[test]
    fn periodic_attractor_collapses_the_cdf_but_still_semiconjugates() {
        // repeller at 0.25, attractor at 0.75: the orbit of 0 parks at the
        // attractor, the empirical measure is one atom and the CDF a step.
        // The step still satisfies h(g) = h + 0, so the residual stays
        // small; the rational regime shows as distance from the identity.
        let g = CircleMapLift::from_fn(|x: f64| x + 0.08 * (TAU * (frac(x) - 0.25)).sin() / TAU)
            .unwrap();
        let nodes: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        let n = 5_000;
        let data = measure_cdf(&g, &nodes, n).unwrap();
        assert!(data.rho.abs() <= data.rho_bracket, "rho = {}", data.rho);
        let dist_to_id = nodes
            .iter()
            .map(|&t| (data.h(t) - t).abs())
            .fold(0.0, f64::max);
        assert!(
            dist_to_id > 0.45,
            "step CDF expected, got dist {dist_to_id:.3}"
        );
        assert!(
            data.residual < 10.0 / n as f64,
            "residual {:.3e}",
            data.residual
        );
    }

    #[test]
    fn wrong_conjugacy_candidate_is_detected() {
        // h = id from the standard grid against a non-rigid circle map
        let fol = FoliationSpec::standard((-1.0, 1.0));
        let grid = build_generating_function(&fol, &GridParams::new(64, 16, (-1.0, 1.0))).unwrap();
        let g = CircleMapLift::from_fn(|x: f64| x + 0.3 + 0.05 * (TAU * x).sin() / TAU).unwrap();
        let data = ConjugacyData::from_generating_grid(&grid, 0.0, 0.3, 1e-6);
        let res = semiconjugacy_residual(&data, &g);
        assert!(
            res > 0.005,
            "identity cannot conjugate the warped map: {res:.3e}"
        );
    }

    #[test]
    fn density_is_flat_for_the_integrable_fixed_leaf() {
        let fam = integrable_family(RhoFn::identity(), None, (-1.0, 1.0)).unwrap();
        let d = rational_leaf_density(&fam.map, &fam.foliation, 0.0, 1, 32).unwrap();
        assert_eq!(d.p, 0);
        for (k, &v) in d.density.iter().enumerate() {
            assert!((v - 1.0).abs() < 1e-12);
            assert!((d.h[k] - d.theta[k]).abs() < 1e-12);
        }
        assert!((d.s_min - 1.0).abs() < 1e-12 && (d.s_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warped_fixed_leaf_density_matches_the_leaf_pencil() {
        // on the fixed leaf of the warped family, 1/sqrt(s_1) normalizes to
        // exactly d(eta_c)/dc at c = 0
        let eps = EpsProfile::smooth_gauss(1.0 / (8.0 * PI));
        let psi = Conjugator::angle_warp(eps.clone()).unwrap();
        let fam = integrable_family(RhoFn::identity(), Some(psi), (-1.0, 1.0)).unwrap();
        let d = rational_leaf_density(&fam.map, &fam.foliation, 0.0, 1, 64).unwrap();
        let mut worst = 0.0f64;
        for (k, &t) in d.theta.iter().enumerate() {
            let oracle = fam.foliation.d_c(t, 0.0).unwrap();
            worst = worst.max((d.density[k] - oracle).abs());
        }
        assert!(worst < 1e-6, "density deviation {worst:.3e}");
        assert!((d.h.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_periodic_leaf_is_refused() {
        let fam = integrable_family(RhoFn::identity(), None, (-1.0, 1.0)).unwrap();
        let err = rational_leaf_density(&fam.map, &fam.foliation, 0.3, 2, 32);
        assert!(matches!(err, Err(Error::NotPeriodic { .. })));
    }

    #[test]
    fn profile_of_integrable_family_has_unit_slope() {
        let fam = integrable_family(RhoFn::identity(), None, (-1.0, 1.0)).unwrap();
        let nodes: Vec<f64> = (0..=10).map(|i| -0.5 + i as f64 / 10.0).collect();
        let prof = rho_profile(&fam.map, &fam.foliation, &nodes, 2_000, 1e-8).unwrap();
        assert!((prof.lower_lip - 1.0).abs() < 0.01, "lo {}", prof.lower_lip);
        assert!((prof.upper_lip - 1.0).abs() < 0.01, "hi {}", prof.upper_lip);
    }

    #[test]
    fn decreasing_profile_is_a_twist_violation() {
        let down = shear_map(|r| -0.2 * r, |_| -0.2);
        let fol = FoliationSpec::standard((-1.0, 1.0));
        let nodes: Vec<f64> = (0..=6).map(|i| -0.6 + 1.2 * i as f64 / 6.0).collect();
        let err = rho_profile(&down, &fol, &nodes, 2_000, 1e-8);
        assert!(matches!(err, Err(Error::TwistViolation { .. })));
    }

    #[test]
    fn adjacent_leaf_cdfs_approach_as_labels_merge() {
        let eps = EpsProfile::smooth_gauss(1.0 / (8.0 * PI));
        let psi = Conjugator::angle_warp(eps).unwrap();
        let fam = integrable_family(RhoFn::identity(), Some(psi), (-1.0, 1.0)).unwrap();
        let nodes: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let n = 20_000;
        let sup_dist = |c0: f64, c1: f64| -> f64 {
            let g0 = projected_circle_map(&fam.map, &fam.foliation, c0, 1e-8).unwrap();
            let g1 = projected_circle_map(&fam.map, &fam.foliation, c1, 1e-8).unwrap();
            let d0 = measure_cdf(&g0, &nodes, n).unwrap();
            let d1 = measure_cdf(&g1, &nodes, n).unwrap();
            nodes
                .iter()
                .map(|&t| (d0.h(t) - d1.h(t)).abs())
                .fold(0.0, f64::max)
        };
        let base = 0.5 - 0.02;
        let wide = sup_dist(base, base + 0.04);
        let tight = sup_dist(base + 0.015, base + 0.025);
        assert!(
            tight < wide,
            "cdf distance must shrink with the label gap: {tight:.3e} vs {wide:.3e}"
        );
    }
}
