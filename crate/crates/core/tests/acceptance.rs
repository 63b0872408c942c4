//! Verification suite pinning the workspace's headline numerical guarantees.
//! Each test covers one advertised property at its published tolerance and
//! prints a one-line verdict (visible with --nocapture).

use std::f64::consts::PI;
use std::sync::Arc;

use annulus_core::solve::bisect_increasing;
use annulus_core::{
    area_distortion, arnold_liouville_residual, build_generating_function, build_straightening,
    exactness_flux, foliation_from_csv, green_limits, green_slope, holder_fit, integrable_family,
    map_eval_lift, map_jacobian, measure_cdf, mixed_partials_check, mollify, plateau_family,
    projected_circle_map, rational_leaf_density, sandwich_check, shear_map, smooth_increasing_1d,
    strange_twist_map, tabulate_foliation, twist_margin, Conjugator, EpsProfile, Error,
    FoliationSpec, GalleryFamily, GridParams, HalfStraightening, Jacobian2, LiftPoint,
    PlateauParams, Rect, RhoFn, RhoProfile, StraighteningMap, StrangeMap,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = 2.0 * PI;
const SCALE: f64 = 1.0 / (8.0 * PI);

/// Integrable shear disguised by a smooth angle-warp conjugacy; rotation
/// profile rho(c) = c.
fn warp_family() -> GalleryFamily {
    integrable_family(
        RhoFn::identity(),
        Some(Conjugator::angle_warp(EpsProfile::smooth_gauss(SCALE)).unwrap()),
        (-1.0, 1.0),
    )
    .unwrap()
}

fn strange_family() -> StrangeMap {
    strange_twist_map(
        &annulus_core::StrangeParams::with_measured_constants(EpsProfile::abs_gauss(SCALE), 1.0)
            .unwrap(),
    )
    .unwrap()
}

fn exact_profile(nodes: &[f64], rho: impl Fn(f64) -> f64) -> RhoProfile {
    RhoProfile {
        c_nodes: nodes.to_vec(),
        rho_values: nodes.iter().map(|&c| rho(c)).collect(),
        brackets: vec![0.0; nodes.len()],
        lower_lip: 0.0,
        upper_lip: f64::INFINITY,
    }
}

#[test]
fn criterion_01_integrable_ground_truth() {
    let fam = warp_family();
    let nodes: Vec<f64> = (0..9).map(|k| -0.88 + 0.22 * k as f64).collect();
    let profile = exact_profile(&nodes, |c| c);

    // Closed-form straightening: the warp conjugacy itself.
    let hs = HalfStraightening::new(EpsProfile::smooth_gauss(SCALE), 1.0);
    let hf = hs.clone();
    let hi = hs.clone();
    let analytic = StraighteningMap::from_callables(
        move |x, c| {
            let p = hf.from_straight(LiftPoint::new(x, c));
            (p.x, p.r)
        },
        move |t, r| {
            let p = hi.to_straight(LiftPoint::new(t, r));
            (p.x, p.r)
        },
    );
    let res_analytic = arnold_liouville_residual(&fam.map, &analytic, &profile, 16).unwrap();
    assert!(
        res_analytic <= 1e-8,
        "analytic straightening residual {res_analytic:.3e} > 1e-8"
    );

    // Straightening rebuilt from a 512 x 512 tabulated generating function.
    let grid =
        build_generating_function(&fam.foliation, &GridParams::new(512, 512, (-1.0, 1.0))).unwrap();
    let phi = build_straightening(&grid).unwrap();
    let res_numeric = arnold_liouville_residual(&fam.map, &phi, &profile, 16).unwrap();
    assert!(
        res_numeric <= 1e-4,
        "grid straightening residual {res_numeric:.3e} > 1e-4"
    );
    println!(
        "criterion 01 integrable ground truth: PASS (residuals {res_analytic:.2e} analytic, {res_numeric:.2e} grid)"
    );
}

#[test]
fn criterion_02_rational_leaf_density() {
    let fam = warp_family();
    // rho(c) = c: the leaf labeled 0 consists of fixed points.
    let d = rational_leaf_density(&fam.map, &fam.foliation, 0.0, 1, 256).unwrap();
    assert_eq!((d.p, d.q), (0, 1));
    let h = 1e-5;
    let mut sup: f64 = 0.0;
    for (i, &t) in d.theta.iter().enumerate() {
        let pencil = (fam.foliation.leaf(t, h) - fam.foliation.leaf(t, -h)) / (2.0 * h);
        sup = sup.max((d.density[i] - pencil).abs());
    }
    assert!(sup <= 1e-3, "density vs leaf pencil sup {sup:.3e} > 1e-3");
    let mass_defect = (d.h.last().unwrap() - 1.0).abs();
    assert!(mass_defect <= 1e-9, "mass defect {mass_defect:.3e} > 1e-9");
    println!(
        "criterion 02 rational-leaf density: PASS (sup vs pencil {sup:.2e}, mass defect {mass_defect:.1e})"
    );
}

#[test]
fn criterion_03_semiconjugacy_residuals() {
    let n = 100_000usize;
    let tol = 5.0 / n as f64;
    let nodes: Vec<f64> = (0..=256).map(|k| k as f64 / 256.0).collect();

    let plain = integrable_family(RhoFn::identity(), None, (-1.0, 1.0)).unwrap();
    let warp = warp_family();
    let strange = strange_family();

    // Labels with rotation numbers spread over (0,1), two of them within
    // 1e-3 of 1/2 for each family. The orbit CDF is a step function, so the
    // labels avoid small-denominator rational rotation numbers: on a
    // q-periodic leaf the 1e5 orbit points collapse onto q atoms and the
    // counting residual can only resolve down to 1/q, not 1/N.
    let smooth_cs = [
        -0.91234567,
        -0.70315289,
        -0.35712846,
        -0.15873429,
        0.12345679,
        0.33178453,
        0.49953217,
        0.50046783,
        0.77219834,
        0.93141593,
    ];
    // Label of the strange leaf with rotation number exactly 1/2; the test
    // brackets it from both sides at distance 6e-4 (rho' ~ 1.6 there, so the
    // rotation numbers stay within 1e-3 of 1/2).
    let rho = strange.params.rho.clone();
    let c_half = bisect_increasing(&|c: f64| rho.eval(c) - 0.5, 0.3, 0.95, 60);
    let strange_cs = [
        -0.91234567,
        -0.61803399,
        -0.31415927,
        -0.12345679,
        0.15873429,
        0.35712846,
        c_half - 6e-4,
        c_half + 6e-4,
        0.84147098,
        0.95105652,
    ];

    let mut worst: f64 = 0.0;
    let suites: [(&str, &annulus_core::TwistMapSpec, &FoliationSpec, &[f64]); 3] = [
        ("plain", &plain.map, &plain.foliation, &smooth_cs),
        ("warp", &warp.map, &warp.foliation, &smooth_cs),
        ("strange", &strange.map, &strange.foliation, &strange_cs),
    ];
    for (name, map, fol, cs) in suites {
        for &c in cs {
            let g = projected_circle_map(map, fol, c, 1e-8).unwrap();
            let data = measure_cdf(&g, &nodes, n).unwrap();
            assert!(
                data.residual <= tol,
                "{name} leaf c = {c}: residual {:.3e} > {tol:.1e}",
                data.residual
            );
            worst = worst.max(data.residual);
        }
    }

    // Continuity probe across a rational rotation number: adjacent labels
    // straddle rho = 1/2 and their conjugacies draw together as the label
    // gap halves twice.
    let base_c = 0.49953217;
    let g0 = projected_circle_map(&warp.map, &warp.foliation, base_c, 1e-8).unwrap();
    let h0 = measure_cdf(&g0, &nodes, n).unwrap();
    let mut dists = Vec::new();
    for gap in [0.12, 0.06, 0.03] {
        let g1 = projected_circle_map(&warp.map, &warp.foliation, base_c + gap, 1e-8).unwrap();
        let h1 = measure_cdf(&g1, &nodes, n).unwrap();
        let sup = h0
            .h_samples
            .iter()
            .zip(&h1.h_samples)
            .fold(0.0f64, |a, (&x, &y)| a.max((x - y).abs()));
        dists.push(sup);
    }
    assert!(
        dists[1] < dists[0] && dists[2] < dists[1],
        "adjacent-conjugacy distances failed to shrink under refinement: {dists:?}"
    );
    println!(
        "criterion 03 semiconjugacy residuals: PASS (worst {worst:.2e} <= {tol:.1e}; refinement distances {dists:?})"
    );
}

#[test]
fn criterion_04_holder_exponents() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let standard = FoliationSpec::standard((-1.0, 1.0));
    let std_fit = holder_fit(&standard, (-0.99, 0.99), 200, &mut rng).unwrap();
    assert!(
        (std_fit.exponent - 1.0).abs() <= 0.01,
        "standard foliation exponent {} not within 0.01 of 1",
        std_fit.exponent
    );

    // Invariant foliations of the gallery maps, round-tripped through a CSV
    // table so the fit runs on the interpolated version.
    let warp = warp_family();
    let strange = strange_family();
    let mut summary = Vec::new();
    for (name, fol) in [
        ("standard", &standard),
        ("warp", &warp.foliation),
        ("strange", &strange.foliation),
    ] {
        let cs: Vec<f64> = (0..=64).map(|k| -0.98 + 1.96 * k as f64 / 64.0).collect();
        let mut buf = Vec::new();
        tabulate_foliation(fol, 256, &cs, &mut buf).unwrap();
        let tab = foliation_from_csv(&buf[..]).unwrap();
        let fit = holder_fit(&tab, (-0.95, 0.95), 200, &mut rng).unwrap();
        assert!(
            fit.exponent >= 0.45,
            "{name} tabulated exponent {} < 0.45",
            fit.exponent
        );
        assert!(
            fit.r_squared >= 0.9,
            "{name} tabulated fit quality {} < 0.9",
            fit.r_squared
        );
        summary.push((name, fit.exponent));
    }
    println!(
        "criterion 04 holder exponents: PASS (standard {:.4}; tabulated {:?})",
        std_fit.exponent, summary
    );
}

#[test]
fn criterion_05_green_bundles() {
    // Integrable shear: finite-time slopes are exactly +-1/k.
    let plain = shear_map(|r| r, |_| 1.0);
    let p = LiftPoint::new(0.3, 0.4);
    for k in 1..=50i64 {
        let s_pos = green_slope(&plain, p, k).unwrap();
        let s_neg = green_slope(&plain, p, -k).unwrap();
        assert!(
            (s_pos - 1.0 / k as f64).abs() <= 1e-12,
            "s_{k} = {s_pos} differs from 1/{k}"
        );
        assert!(
            (s_neg + 1.0 / k as f64).abs() <= 1e-12,
            "s_-{k} = {s_neg} differs from -1/{k}"
        );
    }

    // Strict interleaving on 100 random leaf points across two families.
    let strange = strange_family();
    let warp = warp_family();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let theta: f64 = rng.random_range(0.0..1.0);
        let mag: f64 = rng.random_range(0.05..0.95);
        let c = if rng.random::<bool>() { mag } else { -mag };
        let (map, fol) = if i % 2 == 0 {
            (&strange.map, &strange.foliation)
        } else {
            (&warp.map, &warp.foliation)
        };
        let point = LiftPoint::new(theta, fol.leaf(theta, c));
        let data = green_limits(map, point, 200, 1e-9).unwrap();
        assert!(
            data.interleaving_ok,
            "interleaving violated at theta {theta:.4}, c {c:.4}: {:?}",
            data.violation
        );
    }

    // The sandwich holds on invariant leaves and fails on a tilted curve.
    let plain_fam = integrable_family(RhoFn::identity(), None, (-1.0, 1.0)).unwrap();
    let leaf_suites: [(&annulus_core::TwistMapSpec, &FoliationSpec, f64); 5] = [
        (&plain_fam.map, &plain_fam.foliation, 0.2),
        (&warp.map, &warp.foliation, 0.3),
        (&strange.map, &strange.foliation, 0.3),
        (&strange.map, &strange.foliation, -0.45),
        (&strange.map, &strange.foliation, 0.7),
    ];
    for (map, fol, c) in leaf_suites {
        let rep = sandwich_check(map, fol, c, 64, 60, 1e-6).unwrap();
        assert_eq!(
            rep.violations, 0,
            "sandwich violated on invariant leaf c = {c} (excess {:.3e})",
            rep.max_excess
        );
    }
    let base = strange.foliation.clone();
    let tilted = FoliationSpec::new(
        Arc::new(move |t: f64, c: f64| base.leaf(t, c) + 0.1 * (TAU * t).sin()),
        (-1.0, 1.0),
    );
    let bad = sandwich_check(&strange.map, &tilted, 0.3, 32, 60, 1e-6).unwrap();
    assert!(bad.violations > 0, "tilted curve escaped the sandwich");
    println!(
        "criterion 05 green bundles: PASS (integrable slopes exact, 100 interleavings, tilted excess {:.2e})",
        bad.max_excess
    );
}

#[test]
fn criterion_06_straightening_gate() {
    // Smooth gallery grid: builds, and pushes rectangles with tiny area error.
    let warp = warp_family();
    let grid =
        build_generating_function(&warp.foliation, &GridParams::new(256, 65, (-1.0, 1.0))).unwrap();
    let phi = build_straightening(&grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rects: Vec<Rect> = (0..20)
        .map(|_| {
            let x0 = rng.random_range(0.0..0.7);
            let dx = rng.random_range(0.05..0.3);
            let c0 = rng.random_range(-0.8..0.4);
            let dc = rng.random_range(0.1..0.4);
            ((x0, c0), (x0 + dx, c0 + dc))
        })
        .collect();
    let dist = area_distortion(&phi, &rects, 1024);
    assert!(dist <= 1e-3, "area distortion {dist:.3e} > 1e-3");

    // Any window straddling the strange gluing circle is refused.
    let strange = strange_family();
    for window in [(-0.5, 0.5), (-0.12, 0.52), (-0.9, 0.08)] {
        let g = build_generating_function(&strange.foliation, &GridParams::new(128, 65, window))
            .unwrap();
        match build_straightening(&g) {
            Err(Error::NotStraightenableJump { c, jump }) => {
                assert!(c.abs() < 0.06, "jump flagged at c = {c}, away from 0");
                assert!(jump > 1e-4);
            }
            other => panic!("window {window:?} was not refused: {other:?}"),
        }
    }

    // The plateau family is refused exactly at its degenerate label.
    let fam = plateau_family(&PlateauParams::default()).unwrap();
    let g = build_generating_function(&fam.foliation, &GridParams::new(128, 65, (-0.32, 0.32)))
        .unwrap();
    match build_straightening(&g) {
        Err(Error::NotStraightenableSlope { c, min_slope }) => {
            assert!(c.abs() <= 1e-9, "slope collapse flagged at c = {c}");
            assert!(min_slope <= 1e-9);
        }
        other => panic!("plateau family was not refused: {other:?}"),
    }
    println!(
        "criterion 06 straightening gate: PASS (smooth distortion {dist:.2e}, both refusals hit)"
    );
}

#[test]
fn criterion_07_strange_map_suite() {
    let strange = strange_family();
    let map = &strange.map;
    let fol = &strange.foliation;

    // Twenty leaves stay exactly where they are.
    let mut inv_dev = 0.0f64;
    for k in 0..10 {
        let mag = 0.05 + 0.9 * k as f64 / 9.0;
        for &c in &[mag, -mag] {
            for i in 0..32 {
                let t = i as f64 / 32.0;
                let p = LiftPoint::new(t, fol.leaf(t, c));
                let q = map_eval_lift(map, p, 1).unwrap()[1];
                inv_dev = inv_dev.max((q.r - fol.leaf(q.x, c)).abs());
            }
        }
    }
    assert!(
        inv_dev <= 1e-8,
        "leaf invariance defect {inv_dev:.3e} > 1e-8"
    );

    // C1 gluing: the differential approaches the identity linearly.
    let ident = Jacobian2::identity();
    let mut devs = [0.0f64; 3];
    for (idx, &r) in [1e-2, 1e-3, 1e-4].iter().enumerate() {
        let mut worst = 0.0f64;
        for i in 0..64 {
            let t = i as f64 / 64.0;
            for &sign in &[1.0f64, -1.0] {
                let j = map_jacobian(map, LiftPoint::new(t, sign * r)).unwrap();
                worst = worst.max(j.dist_inf(&ident));
            }
        }
        devs[idx] = worst;
    }
    assert!(
        devs[1] <= 0.2 * devs[0] && devs[2] <= 0.2 * devs[1],
        "|Df - I| does not decay linearly: {devs:?}"
    );

    // Uniform twist off the gluing circle.
    let margin = twist_margin(map, (1e-3, 1.0), (64, 32)).unwrap();
    assert!(margin > 0.0, "twist margin {margin:.3e} not positive");

    // Exactness: zero flux through five invariant leaves.
    let mut flux_max = 0.0f64;
    for &c in &[0.15, 0.35, 0.5, 0.7, 0.9] {
        let fol_c = fol.clone();
        let flux = exactness_flux(map, move |t| fol_c.leaf(t, c), 4096).unwrap();
        flux_max = flux_max.max(flux.abs());
    }
    assert!(flux_max <= 1e-6, "leaf flux {flux_max:.3e} > 1e-6");
    println!(
        "criterion 07 strange map: PASS (invariance {inv_dev:.1e}, |Df-I| {devs:?}, twist {margin:.2e}, flux {flux_max:.1e})"
    );
}

#[test]
fn criterion_08_mollification() {
    let warp = warp_family();
    let grid = build_generating_function(&warp.foliation, &GridParams::new(128, 257, (-1.0, 1.0)))
        .unwrap();
    let fam = mollify(&grid, &[0.2, 0.1, 0.05, 0.025]).unwrap();
    for w in fam.c1_errors.windows(2) {
        assert!(
            w[1] < w[0],
            "c1 errors not strictly decreasing: {:?}",
            fam.c1_errors
        );
    }

    // Convolution preserves monotonicity: 1e4 output samples of a kinked
    // increasing profile stay sorted.
    let g = |t: f64| t + 0.5 * (t.abs() - 0.3).max(0.0);
    let smoothed = smooth_increasing_1d(g, 0.05, -1.0, 1.0, 10_000);
    assert_eq!(smoothed.len(), 10_000);
    for w in smoothed.windows(2) {
        assert!(
            w[1].1 >= w[0].1 - 1e-12,
            "smoothed profile decreased at t = {}",
            w[1].0
        );
    }
    println!(
        "criterion 08 mollification: PASS (c1 errors {:?}, monotone on 1e4 samples)",
        fam.c1_errors
    );
}

#[test]
fn criterion_09_mixed_partials() {
    let warp = warp_family();
    let grid = build_generating_function(&warp.foliation, &GridParams::new(128, 128, (-1.0, 1.0)))
        .unwrap();
    let rep = mixed_partials_check(&grid).unwrap();
    assert!(
        rep.max_discrepancy <= 1e-5,
        "smooth grid discrepancy {:.3e} > 1e-5",
        rep.max_discrepancy
    );

    // The strange grid's discrepancy concentrates on the gluing row.
    let strange = strange_family();
    let g2 = build_generating_function(&strange.foliation, &GridParams::new(128, 128, (-1.0, 1.0)))
        .unwrap();
    let rep2 = mixed_partials_check(&g2).unwrap();
    let dc = g2.c[1] - g2.c[0];
    let mut near_kink = 0.0f64;
    let mut elsewhere = 0.0f64;
    for &(c, v) in &rep2.row_max {
        if c.abs() <= 4.0 * dc {
            near_kink = near_kink.max(v);
        } else {
            elsewhere = elsewhere.max(v);
        }
    }
    assert!(
        elsewhere <= 1e-5,
        "discrepancy away from the gluing row is {elsewhere:.3e}"
    );
    assert!(
        near_kink > 100.0 * elsewhere.max(1e-12),
        "no concentration at the gluing row: near {near_kink:.3e}, away {elsewhere:.3e}"
    );
    assert!(
        rep2.location.1.abs() <= 4.0 * dc,
        "worst row at c = {}",
        rep2.location.1
    );
    println!(
        "criterion 09 mixed partials: PASS (smooth {:.2e}; strange near-kink {near_kink:.2e} vs away {elsewhere:.2e})",
        rep.max_discrepancy
    );
}
