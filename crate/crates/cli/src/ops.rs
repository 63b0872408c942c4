//! One runner per subcommand. Each computes, writes its CSV artifacts into
//! the output directory, and returns the summary payload; exit-code mapping
//! and summary.json writing live in main.

use std::io::Write;
use std::path::Path;

use annulus_core::geom::frac;
use annulus_core::{
    arnold_liouville_residual, bilipschitz_fit, build_generating_function, build_straightening,
    c1_report, exactness_flux, green_limits, holder_fit, map_eval_lift, map_jacobian, measure_cdf,
    mixed_partials_check, mollify, plateau_family, projected_circle_map, rational_leaf_density,
    rho_profile, rotation_number, sandwich_check, strange_twist_map, symplectic_defect,
    twist_margin, Error, GridParams, Jacobian2, LiftPoint, MixedMethod, PlateauParams, Rect,
    StrangeParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::build::{build_family, eps_by_name};
use crate::config::Settings;
use crate::report::{artifact, CliError, OpOutput};

/// Equispaced nodes strictly inside a window, with a relative margin on
/// each side.
fn inner_nodes(window: (f64, f64), n: usize, margin: f64) -> Vec<f64> {
    let width = window.1 - window.0;
    let lo = window.0 + margin * width;
    let hi = window.1 - margin * width;
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n.max(2) - 1) as f64)
        .collect()
}

fn inner_window(window: (f64, f64), margin: f64) -> (f64, f64) {
    let width = window.1 - window.0;
    (window.0 + margin * width, window.1 - margin * width)
}

/// Distance between two rotation numbers on the circle (mod 1).
fn circ_dist(a: f64, b: f64) -> f64 {
    (frac(a - b + 0.5) - 0.5).abs()
}

/// Merges the family descriptor, the seed, and operation parameters into the
/// summary `inputs` block. serde_json keeps object keys sorted, so the
/// serialized block is deterministic.
fn merged_inputs(desc: &Value, seed: u64, extra: Value) -> Value {
    let mut obj = desc.as_object().cloned().unwrap_or_default();
    obj.insert("seed".into(), json!(seed));
    if let Some(e) = extra.as_object() {
        for (k, v) in e {
            obj.insert(k.clone(), v.clone());
        }
    }
    Value::Object(obj)
}

/// A single named verification with a one-sided bound.
struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    /// true: pass means value <= threshold; false: pass means value >= threshold.
    upper: bool,
}

impl Check {
    fn le(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            value,
            threshold,
            upper: true,
        }
    }

    fn ge(name: &'static str, value: f64, threshold: f64) -> Self {
        Check {
            name,
            value,
            threshold,
            upper: false,
        }
    }

    fn pass(&self) -> bool {
        if self.upper {
            self.value <= self.threshold
        } else {
            self.value >= self.threshold
        }
    }
}

fn write_checks(out: &Path, file: &str, checks: &[Check]) -> Result<Value, CliError> {
    let mut f = artifact(out, file)?;
    writeln!(f, "check,value,bound,threshold,pass").map_err(CliError::from)?;
    let mut rows = Vec::with_capacity(checks.len());
    for c in checks {
        let bound = if c.upper { "<=" } else { ">=" };
        writeln!(
            f,
            "{},{},{},{},{}",
            c.name,
            c.value,
            bound,
            c.threshold,
            c.pass()
        )
        .map_err(CliError::from)?;
        rows.push(json!({
            "name": c.name,
            "value": c.value,
            "bound": bound,
            "threshold": c.threshold,
            "pass": c.pass(),
        }));
    }
    Ok(Value::Array(rows))
}

// ---------------------------------------------------------------------------
// rotation numbers and conjugacies
// ---------------------------------------------------------------------------

pub fn rotation_number_op(
    out: &Path,
    s: &Settings,
    c: f64,
    n_iter: u64,
) -> Result<OpOutput, CliError> {
    let _ = out;
    let fam = build_family(s)?;
    let map = fam.require_map()?;
    let g = projected_circle_map(map, &fam.fol, c, 1e-8)?;
    let est = rotation_number(&g, n_iter, 0.0)?;
    let exact = fam.rho_exact.as_ref().map(|r| r.eval(c));
    let exact_dev = exact.map(|e| circ_dist(est.value, e));
    // With a closed-form profile available the bracket is testable; without
    // one, producing the certified estimate is the whole claim.
    let pass = match exact_dev {
        Some(d) => d <= est.bracket + 1e-9,
        None => true,
    };
    Ok(OpOutput {
        claim: "leaf-rotation-number-with-error-bracket",
        inputs: merged_inputs(&fam.descriptor, s.seed, json!({"c": c, "n_iter": n_iter})),
        results: json!({
            "rho": est.value,
            "bracket": est.bracket,
            "iterations": est.iterations,
            "exact_rho": exact,
            "exact_deviation": exact_dev,
        }),
        pass,
    })
}

pub fn rho_profile_op(
    out: &Path,
    s: &Settings,
    nodes: usize,
    n_iter: u64,
) -> Result<OpOutput, CliError> {
    let fam = build_family(s)?;
    let map = fam.require_map()?;
    let c_nodes = inner_nodes(fam.window, nodes, 0.02);
    let profile = rho_profile(map, &fam.fol, &c_nodes, n_iter, 1e-8)?;
    profile.to_csv(artifact(out, "profile.csv")?)?;
    let rho_min = profile
        .rho_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let rho_max = profile
        .rho_values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let max_bracket = profile.brackets.iter().cloned().fold(0.0, f64::max);
    Ok(OpOutput {
        claim: "rotation-profile-monotone-between-lipschitz-bounds",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"nodes": nodes, "n_iter": n_iter}),
        ),
        results: json!({
            "rho_min": rho_min,
            "rho_max": rho_max,
            "lower_lip": profile.lower_lip,
            "upper_lip": profile.upper_lip,
            "max_bracket": max_bracket,
        }),
        // A twist violation aborts inside rho_profile, so reaching this point
        // certifies monotonicity within the brackets.
        pass: true,
    })
}

pub fn conjugacy_op(
    out: &Path,
    s: &Settings,
    c: f64,
    orbit: usize,
    nodes: usize,
    threshold: Option<f64>,
) -> Result<OpOutput, CliError> {
    let fam = build_family(s)?;
    let map = fam.require_map()?;
    let g = projected_circle_map(map, &fam.fol, c, 1e-8)?;
    let n = nodes.max(2);
    let theta_nodes: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let data = measure_cdf(&g, &theta_nodes, orbit)?;
    let thr = threshold.unwrap_or(5.0 / orbit as f64);
    data.to_csv(artifact(out, "conjugacy.csv")?)?;
    Ok(OpOutput {
        claim: "orbit-cdf-semiconjugates-leaf-to-rigid-rotation",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"c": c, "orbit": orbit, "nodes": nodes, "threshold": thr}),
        ),
        results: json!({
            "rho": data.rho,
            "bracket": data.rho_bracket,
            "residual": data.residual,
            "orbit_length": data.orbit_length,
            "threshold": thr,
        }),
        pass: data.residual <= thr,
    })
}

pub fn rational_density_op(
    out: &Path,
    s: &Settings,
    c: f64,
    q: u32,
    n_theta: usize,
) -> Result<OpOutput, CliError> {
    let fam = build_family(s)?;
    let map = fam.require_map()?;
    let d = rational_leaf_density(map, &fam.fol, c, q, n_theta)?;
    let mut f = artifact(out, "density.csv")?;
    writeln!(f, "theta,density,h").map_err(CliError::from)?;
    for i in 0..d.theta.len() {
        writeln!(f, "{},{},{}", d.theta[i], d.density[i], d.h[i]).map_err(CliError::from)?;
    }
    let mass_defect = (d.h.last().copied().unwrap_or(f64::NAN) - 1.0).abs();
    Ok(OpOutput {
        claim: "periodic-leaf-density-proportional-to-inverse-sqrt-torsion",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"c": c, "q": q, "n_theta": n_theta}),
        ),
        results: json!({
            "p": d.p,
            "q": d.q,
            "s_min": d.s_min,
            "s_max": d.s_max,
            "return_gap": d.return_gap,
            "mass_defect": mass_defect,
            "threshold": 1e-9,
        }),
        pass: mass_defect <= 1e-9 && d.s_min > 0.0,
    })
}

// ---------------------------------------------------------------------------
// generating functions and regularity reports
// ---------------------------------------------------------------------------

pub fn generating_function_op(
    out: &Path,
    s: &Settings,
    n_theta: usize,
    n_c: usize,
) -> Result<OpOutput, CliError> {
    let fam = build_family(s)?;
    let grid = build_generating_function(&fam.fol, &GridParams::new(n_theta, n_c, fam.window))?;
    grid.to_csv(artifact(out, "generating.csv")?)?;
    let u_sup = grid.u.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    Ok(OpOutput {
        claim: "foliation-admits-normalized-generating-function",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"n_theta": n_theta, "n_c": n_c}),
        ),
        results: json!({
            "n_theta": grid.n_theta(),
            "n_c": grid.n_c(),
            "analytic_partials": grid.analytic_partials,
            "u_sup": u_sup,
        }),
        pass: true,
    })
}

pub fn c1_report_op(
    out: &Path,
    s: &Settings,
    n_theta: usize,
    n_c: usize,
) -> Result<OpOutput, CliError> {
    let _ = out;
    let fam = build_family(s)?;
    let grid = build_generating_function(&fam.fol, &GridParams::new(n_theta, n_c, fam.window))?;
    let rep = c1_report(&grid)?;
    Ok(OpOutput {
        claim: "label-derivative-of-generating-function-is-continuous",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"n_theta": n_theta, "n_c": n_c}),
        ),
        results: json!({
            "max_jump": rep.max_jump,
            "location": [rep.location.0, rep.location.1],
            "stride_jumps": rep.stride_jumps,
            "ratios": rep.ratios,
            "discontinuity": rep.discontinuity.map(|(c, j)| json!({"c": c, "jump": j})),
        }),
        pass: rep.discontinuity.is_none(),
    })
}

pub fn holder_fit_op(
    out: &Path,
    s: &Settings,
    pairs: usize,
    min_exponent: f64,
    min_r_squared: f64,
) -> Result<OpOutput, CliError> {
    let _ = out;
    let fam = build_family(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let fit = holder_fit(&fam.fol, inner_window(fam.window, 0.01), pairs, &mut rng)?;
    Ok(OpOutput {
        claim: "leaf-family-is-holder-in-the-label",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({
                "pairs": pairs,
                "min_exponent": min_exponent,
                "min_r_squared": min_r_squared,
            }),
        ),
        results: json!({
            "exponent": fit.exponent,
            "constant": fit.constant,
            "r_squared": fit.r_squared,
            "pairs_used": fit.pairs_used,
        }),
        pass: fit.exponent >= min_exponent && fit.r_squared >= min_r_squared,
    })
}

pub fn bilipschitz_op(
    out: &Path,
    s: &Settings,
    n_theta: usize,
    n_c: usize,
) -> Result<OpOutput, CliError> {
    let _ = out;
    let fam = build_family(s)?;
    let fit = bilipschitz_fit(&fam.fol, inner_window(fam.window, 0.01), n_theta, n_c)?;
    Ok(OpOutput {
        claim: "leaf-family-is-bilipschitz-in-the-label",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"n_theta": n_theta, "n_c": n_c}),
        ),
        results: json!({
            "k_lower": fit.k_lower,
            "k_upper": fit.k_upper,
            "k_minus": fit.k_minus,
            "k_plus": fit.k_plus,
            "pairs": fit.pairs,
            "degenerate": fit.degenerate,
        }),
        pass: !fit.degenerate,
    })
}

pub fn mixed_partials_op(
    out: &Path,
    s: &Settings,
    n_theta: usize,
    n_c: usize,
    threshold: f64,
) -> Result<OpOutput, CliError> {
    let fam = build_family(s)?;
    let grid = build_generating_function(&fam.fol, &GridParams::new(n_theta, n_c, fam.window))?;
    let rep = mixed_partials_check(&grid)?;
    let mut f = artifact(out, "mixed_rows.csv")?;
    writeln!(f, "c,row_max").map_err(CliError::from)?;
    for &(c, v) in &rep.row_max {
        writeln!(f, "{},{}", c, v).map_err(CliError::from)?;
    }
    let method = match rep.method {
        MixedMethod::AnalyticCross => "analytic_cross",
        MixedMethod::StaggeredCells => "staggered_cells",
    };
    Ok(OpOutput {
        claim: "mixed-partials-of-generating-function-commute",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"n_theta": n_theta, "n_c": n_c, "threshold": threshold}),
        ),
        results: json!({
            "max_discrepancy": rep.max_discrepancy,
            "location": [rep.location.0, rep.location.1],
            "method": method,
            "threshold": threshold,
        }),
        pass: rep.max_discrepancy <= threshold,
    })
}

// ---------------------------------------------------------------------------
// Green bundles
// ---------------------------------------------------------------------------

pub fn green_op(
    out: &Path,
    s: &Settings,
    c: f64,
    theta: f64,
    n_max: usize,
    tol: f64,
) -> Result<OpOutput, CliError> {
    let fam = build_family(s)?;
    let map = fam.require_map()?;
    let p = LiftPoint::new(theta, fam.fol.leaf(theta, c));
    let data = green_limits(map, p, n_max, tol)?;
    data.to_csv(artifact(out, "green.csv")?)?;
    let violation = data
        .violation
        .as_ref()
        .map(|v| json!({"k": v.k, "lhs": v.lhs, "rhs": v.rhs, "kind": v.kind}));
    Ok(OpOutput {
        claim: "finite-time-green-slopes-interleave-monotonically",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"c": c, "theta": theta, "n_max": n_max, "tol": tol}),
        ),
        results: json!({
            "s_plus": data.s_plus_estimate,
            "s_minus": data.s_minus_estimate,
            "converged_pos": data.converged_pos,
            "converged_neg": data.converged_neg,
            "interleaving_ok": data.interleaving_ok,
            "violation": violation,
        }),
        pass: data.interleaving_ok,
    })
}

pub fn sandwich_op(
    out: &Path,
    s: &Settings,
    c: f64,
    samples: usize,
    n_max: usize,
    tol: f64,
) -> Result<OpOutput, CliError> {
    let fam = build_family(s)?;
    let map = fam.require_map()?;
    let rep = sandwich_check(map, &fam.fol, c, samples, n_max, tol)?;
    let mut f = artifact(out, "sandwich.csv")?;
    writeln!(f, "theta,leaf_lower,leaf_upper,s_minus,s_plus,ok").map_err(CliError::from)?;
    for r in &rep.samples {
        writeln!(
            f,
            "{},{},{},{},{},{}",
            r.theta, r.leaf_lower, r.leaf_upper, r.s_minus, r.s_plus, r.ok
        )
        .map_err(CliError::from)?;
    }
    Ok(OpOutput {
        claim: "leaf-dini-slopes-lie-between-green-slopes",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"c": c, "samples": samples, "n_max": n_max, "tol": tol}),
        ),
        results: json!({
            "violations": rep.violations,
            "max_excess": rep.max_excess,
            "samples": rep.samples.len(),
        }),
        pass: rep.violations == 0,
    })
}

// ---------------------------------------------------------------------------
// straightening
// ---------------------------------------------------------------------------

pub fn straighten_op(
    out: &Path,
    s: &Settings,
    n_theta: usize,
    n_c: usize,
    rects: usize,
    refinement: usize,
    max_distortion: f64,
) -> Result<OpOutput, CliError> {
    let fam = build_family(s)?;
    let grid = build_generating_function(&fam.fol, &GridParams::new(n_theta, n_c, fam.window))?;
    let phi = build_straightening(&grid)?;
    let (lo, hi) = fam.window;
    let width = hi - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let boxes: Vec<Rect> = (0..rects)
        .map(|_| {
            let x0 = rng.random_range(0.0..0.7);
            let dx = rng.random_range(0.05..0.3);
            let c0 = rng.random_range(lo + 0.1 * width..lo + 0.6 * width);
            let dc = rng.random_range(0.05 * width..0.3 * width);
            ((x0, c0), (x0 + dx, c0 + dc))
        })
        .collect();
    let distortion = area_distortion_checked(&phi, &boxes, refinement);
    let roundtrip = phi.roundtrip_defect(17, inner_window(fam.window, 0.05));
    let xs: Vec<f64> = (0..=32).map(|k| k as f64 / 32.0).collect();
    let cs = inner_nodes(fam.window, 9, 0.02);
    phi.to_csv(&xs, &cs, artifact(out, "straightening.csv")?)?;
    Ok(OpOutput {
        claim: "straightening-preserves-area-of-rectangles",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({
                "n_theta": n_theta,
                "n_c": n_c,
                "rects": rects,
                "refinement": refinement,
                "max_distortion": max_distortion,
            }),
        ),
        results: json!({
            "area_distortion": distortion,
            "roundtrip_defect": roundtrip,
        }),
        pass: distortion <= max_distortion,
    })
}

fn area_distortion_checked(
    phi: &annulus_core::StraighteningMap,
    boxes: &[Rect],
    refinement: usize,
) -> f64 {
    annulus_core::area_distortion(phi, boxes, refinement)
}

// The parameter list mirrors the subcommand's flag set one to one.
#[allow(clippy::too_many_arguments)]
pub fn arnold_liouville_op(
    out: &Path,
    s: &Settings,
    n_theta: usize,
    n_c: usize,
    profile_nodes: usize,
    n_iter: u64,
    samples: usize,
    threshold: f64,
) -> Result<OpOutput, CliError> {
    let _ = out;
    let fam = build_family(s)?;
    let map = fam.require_map()?;
    let grid = build_generating_function(&fam.fol, &GridParams::new(n_theta, n_c, fam.window))?;
    let phi = build_straightening(&grid)?;
    let nodes = inner_nodes(fam.window, profile_nodes, 0.02);
    let profile = rho_profile(map, &fam.fol, &nodes, n_iter, 1e-8)?;
    let residual = arnold_liouville_residual(map, &phi, &profile, samples)?;
    Ok(OpOutput {
        claim: "straightened-map-is-the-integrable-shear-of-its-profile",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({
                "n_theta": n_theta,
                "n_c": n_c,
                "profile_nodes": profile_nodes,
                "n_iter": n_iter,
                "samples": samples,
                "threshold": threshold,
            }),
        ),
        results: json!({
            "residual": residual,
            "threshold": threshold,
        }),
        pass: residual <= threshold,
    })
}

pub fn mollify_op(
    out: &Path,
    s: &Settings,
    n_theta: usize,
    n_c: usize,
    epsilons: &[f64],
) -> Result<OpOutput, CliError> {
    let fam = build_family(s)?;
    let grid = build_generating_function(&fam.fol, &GridParams::new(n_theta, n_c, fam.window))?;
    let mut eps: Vec<f64> = epsilons.to_vec();
    eps.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    eps.dedup();
    let fam_m = mollify(&grid, &eps)?;
    fam_m.to_csv(artifact(out, "mollified.csv")?)?;
    let errs = &fam_m.c1_errors;
    let strictly_decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let already_smooth = errs.iter().all(|&e| e <= 1e-12);
    Ok(OpOutput {
        claim: "mollified-generating-functions-converge-in-c1",
        inputs: merged_inputs(
            &fam.descriptor,
            s.seed,
            json!({"n_theta": n_theta, "n_c": n_c, "epsilons": eps}),
        ),
        results: json!({
            "epsilons": fam_m.epsilon_values,
            "c1_errors": errs,
            "strictly_decreasing": strictly_decreasing,
            "already_smooth": already_smooth,
        }),
        pass: strictly_decreasing || already_smooth,
    })
}

// ---------------------------------------------------------------------------
// aggregate demos
// ---------------------------------------------------------------------------

pub fn strange_demo_op(
    out: &Path,
    s: &Settings,
    leaves: usize,
    flux_leaves: usize,
    profile_nodes: usize,
    n_iter: u64,
) -> Result<OpOutput, CliError> {
    let eps = eps_by_name(&s.eps_profile, s.eps_scale)?;
    let params = StrangeParams::with_measured_constants(eps, s.c_max)?;
    let strange = strange_twist_map(&params)?;
    let map = &strange.map;
    let fol = &strange.foliation;
    let cm = s.c_max;
    let mut checks: Vec<Check> = Vec::new();

    // Every labeled graph is invariant, not just permuted.
    let half = (leaves / 2).max(1);
    let mut inv_dev = 0.0f64;
    for k in 0..half {
        let mag = (0.05 + 0.9 * k as f64 / (half.max(2) - 1) as f64) * cm;
        for &c in &[mag, -mag] {
            for i in 0..32 {
                let t = i as f64 / 32.0;
                let p = LiftPoint::new(t, fol.leaf(t, c));
                let q = map_eval_lift(map, p, 1)?[1];
                inv_dev = inv_dev.max((q.r - fol.leaf(q.x, c)).abs());
            }
        }
    }
    checks.push(Check::le("leaf_invariance", inv_dev, 1e-8));

    // The glued halves meet in C1: the differential tends to the identity
    // linearly in the distance to the gluing circle.
    let ident = Jacobian2::identity();
    let mut df_devs = [0.0f64; 3];
    for (idx, &r) in [1e-2, 1e-3, 1e-4].iter().enumerate() {
        let mut worst = 0.0f64;
        for i in 0..64 {
            let t = i as f64 / 64.0;
            for &sign in &[1.0, -1.0] {
                let j = map_jacobian(map, LiftPoint::new(t, sign * r * cm))?;
                worst = worst.max(j.dist_inf(&ident));
            }
        }
        df_devs[idx] = worst;
    }
    checks.push(Check::le(
        "df_identity_ratio_1e2_to_1e3",
        df_devs[1],
        0.2 * df_devs[0],
    ));
    checks.push(Check::le(
        "df_identity_ratio_1e3_to_1e4",
        df_devs[2],
        0.2 * df_devs[1],
    ));

    // Positive twist off the gluing circle.
    let margin = twist_margin(map, (1e-3 * cm, cm), (64, 32))?;
    checks.push(Check::ge("twist_margin", margin, 1e-12));

    // Zero flux through invariant leaves: the map is exact.
    let mut flux_max = 0.0f64;
    for k in 0..flux_leaves.max(1) {
        let c = (0.15 + 0.75 * k as f64 / flux_leaves.max(2) as f64) * cm;
        let fol_c = fol.clone();
        let flux = exactness_flux(map, move |t| fol_c.leaf(t, c), 4096)?;
        flux_max = flux_max.max(flux.abs());
    }
    checks.push(Check::le("exactness_flux", flux_max, 1e-6));

    // det Df = 1 on a fixed point grid.
    let mut pts = Vec::new();
    for i in 0..8 {
        for j in 1..5 {
            pts.push(LiftPoint::new(i as f64 / 8.0, (0.13 + 0.2 * j as f64) * cm));
        }
    }
    let sympl = symplectic_defect(map, &pts)?;
    checks.push(Check::le("symplectic_defect", sympl, 1e-8));

    // The foliation refuses to straighten across the gluing circle.
    let grid = build_generating_function(fol, &GridParams::new(128, 65, (-0.5 * cm, 0.5 * cm)))?;
    let (refused, jump_at) = match build_straightening(&grid) {
        Err(Error::NotStraightenableJump { c, jump }) => (true, json!({"c": c, "jump": jump})),
        Err(e) => return Err(e.into()),
        Ok(_) => (false, Value::Null),
    };
    checks.push(Check::ge(
        "straightening_refused",
        if refused { 1.0 } else { 0.0 },
        1.0,
    ));

    // Measured rotation numbers follow the designed profile within brackets.
    let nodes: Vec<f64> = (0..profile_nodes.max(2))
        .map(|k| (0.1 + 0.8 * k as f64 / (profile_nodes.max(2) - 1) as f64) * cm)
        .collect();
    let profile = rho_profile(map, fol, &nodes, n_iter, 1e-8)?;
    let mut rho_dev = 0.0f64;
    for ((&node, &rho_val), &bracket) in
        nodes.iter().zip(&profile.rho_values).zip(&profile.brackets)
    {
        let d = circ_dist(rho_val, params.rho.eval(node));
        rho_dev = rho_dev.max(d - bracket);
    }
    checks.push(Check::le(
        "rho_profile_deviation_minus_bracket",
        rho_dev,
        1e-9,
    ));

    let rows = write_checks(out, "strange_checks.csv", &checks)?;
    let pass = checks.iter().all(Check::pass);
    Ok(OpOutput {
        claim: "glued-twist-map-preserves-a-nonstraightenable-foliation",
        inputs: json!({
            "map": "strange",
            "eps_profile": s.eps_profile,
            "eps_scale": s.eps_scale,
            "c_max": s.c_max,
            "leaves": leaves,
            "flux_leaves": flux_leaves,
            "profile_nodes": profile_nodes,
            "n_iter": n_iter,
            "seed": s.seed,
        }),
        results: json!({
            "checks": rows,
            "df_identity_sups": df_devs,
            "refusal": jump_at,
        }),
        pass,
    })
}

pub fn plateau_demo_op(
    out: &Path,
    s: &Settings,
    plateau_halfwidth: f64,
    ramp_width: f64,
) -> Result<OpOutput, CliError> {
    let params = PlateauParams {
        plateau_halfwidth,
        ramp_width,
    };
    let fam = plateau_family(&params)?;
    let fol = &fam.foliation;
    let mut checks: Vec<Check> = Vec::new();

    // gamma' = -1 exactly on the plateau and never below -1.
    let (a, b) = fam.plateau;
    let mut plateau_dev = 0.0f64;
    for i in 0..=64 {
        let t = a + 1e-9 + (b - a - 2e-9) * i as f64 / 64.0;
        plateau_dev = plateau_dev.max((fam.dgamma(t) + 1.0).abs());
    }
    checks.push(Check::le("plateau_derivative_exact", plateau_dev, 0.0));
    let mut dgamma_min = f64::INFINITY;
    let mut gamma_mean = 0.0;
    for i in 0..4096 {
        let t = i as f64 / 4096.0;
        dgamma_min = dgamma_min.min(fam.dgamma(t));
        gamma_mean += fam.gamma(t) / 4096.0;
    }
    checks.push(Check::ge("dgamma_above_minus_one", dgamma_min, -1.0));
    checks.push(Check::le("gamma_mean", gamma_mean.abs(), 1e-6));

    // The limit collapses the plateau of the degenerate leaf to one point.
    let ta = 0.5 - 0.5 * plateau_halfwidth;
    let tb = 0.5 + 0.5 * plateau_halfwidth;
    let ha = fam.straighten(LiftPoint::new(ta, 0.0));
    let hb = fam.straighten(LiftPoint::new(tb, 0.0));
    let collapse = (ha.x - hb.x).abs() + (ha.r - hb.r).abs();
    checks.push(Check::le("plateau_collapse_distance", collapse, 1e-10));

    // Leaf pencils: the limit family loses injectivity exactly at c = 0,
    // the approximants keep a uniform margin.
    let mid = 0.5;
    let dc_limit = fol.d_c(mid, 0.0).unwrap_or(f64::NAN);
    checks.push(Check::le(
        "limit_label_derivative_at_plateau",
        dc_limit.abs(),
        1e-14,
    ));
    let fol8 = fam.approximant_foliation(8);
    let mut margin8 = f64::INFINITY;
    for i in 0..128 {
        for j in 0..=16 {
            let t = i as f64 / 128.0;
            let c = -0.3 + 0.6 * j as f64 / 16.0;
            margin8 = margin8.min(fol8.d_c(t, c).unwrap_or(f64::NAN));
        }
    }
    checks.push(Check::ge("approximant_label_margin", margin8, 0.05));

    // The approximants converge to the limit at rate 1/n.
    let ns = [4u32, 8, 16, 32];
    let mut gaps = [0.0f64; 4];
    for (idx, &n) in ns.iter().enumerate() {
        let mut worst = 0.0f64;
        for i in 0..16 {
            for j in 0..=4 {
                let p = LiftPoint::new(i as f64 / 16.0, -0.3 + 0.15 * j as f64);
                let lim = fam.straighten(p);
                let apx = fam.approximant(n, p);
                worst = worst.max((lim.x - apx.x).abs() + (lim.r - apx.r).abs());
            }
        }
        gaps[idx] = worst;
    }
    for i in 0..3 {
        // halving n's reciprocal should at least halve the gap, up to slack
        checks.push(Check {
            name: [
                "approximant_gap_ratio_4_8",
                "approximant_gap_ratio_8_16",
                "approximant_gap_ratio_16_32",
            ][i],
            value: gaps[i + 1],
            threshold: 0.75 * gaps[i],
            upper: true,
        });
    }

    // The limit refuses to straighten; the approximant accepts.
    let grid = build_generating_function(fol, &GridParams::new(128, 65, (-0.32, 0.32)))?;
    let refused = matches!(
        build_straightening(&grid),
        Err(Error::NotStraightenableSlope { .. })
    );
    checks.push(Check::ge(
        "limit_straightening_refused",
        if refused { 1.0 } else { 0.0 },
        1.0,
    ));
    let grid8 = build_generating_function(&fol8, &GridParams::new(128, 65, (-0.32, 0.32)))?;
    let phi8 = build_straightening(&grid8)?;
    let roundtrip = phi8.roundtrip_defect(13, (-0.3, 0.3));
    checks.push(Check::le("approximant_roundtrip_defect", roundtrip, 1e-6));

    let rows = write_checks(out, "plateau_checks.csv", &checks)?;
    let pass = checks.iter().all(Check::pass);
    Ok(OpOutput {
        claim: "plateau-family-degenerates-only-in-the-limit",
        inputs: json!({
            "map": "plateau",
            "plateau_halfwidth": plateau_halfwidth,
            "ramp_width": ramp_width,
            "seed": s.seed,
        }),
        results: json!({
            "checks": rows,
            "approximant_gaps": gaps,
        }),
        pass,
    })
}
