use josephson_cavity::fixedpoints::{scan_stationary_points, DEFAULT_GRID_N};
use josephson_cavity::{
    bifurcation_sweep, energy_at, f1, f2, find_stationary_points, Branch, Kind, ReducedParams,
    SweepParam,
};
use proptest::prelude::*;

fn coupled() -> ReducedParams {
    ReducedParams::new(3.0, 0.02, -0.65, 0.07).unwrap()
}

/// Saddle-node values of Ã at r = 3, B = −0.65, C = 0.07, from a 40-digit
/// solve of f = f′ = 0 on each line.
const TILT_STAR_PI: f64 = 0.005_360_941_159_813_651_5;
const TILT_STAR_ZERO: f64 = 0.013_686_411_204_531_879;

/// Classification from the finite-difference Hessian of H at the point.
fn hessian_kind(z: f64, phi: f64, p: &ReducedParams) -> Kind {
    let h = 1e-4;
    let e = |dz: f64, dp: f64| energy_at(z + dz, phi + dp, p, 0.0);
    let hzz = (e(h, 0.0) - 2.0 * e(0.0, 0.0) + e(-h, 0.0)) / (h * h);
    let hpp = (e(0.0, h) - 2.0 * e(0.0, 0.0) + e(0.0, -h)) / (h * h);
    let hzp = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h);
    let det = hzz * hpp - hzp * hzp;
    if det < 0.0 {
        Kind::Saddle
    } else if hzz > 0.0 {
        Kind::Minimum
    } else {
        Kind::Maximum
    }
}

fn reduced() -> impl Strategy<Value = ReducedParams> {
    (0.0..6.0f64, -0.1..0.1f64, -1.0..1.0f64, 0.02..1.0f64)
        .prop_map(|(r, tilt, b, c)| ReducedParams::new(r, tilt, b, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn roots_have_small_residuals_and_hessian_kinds(p in reduced()) {
        let (points, degenerate) = scan_stationary_points(&p, DEFAULT_GRID_N).unwrap();
        for (k, s) in points.iter().enumerate() {
            let residual = match s.branch {
                Branch::Zero => f1(s.z, &p).unwrap(),
                Branch::Pi => f2(s.z, &p).unwrap(),
            };
            prop_assert!(residual.abs() < 1e-10, "residual {residual} at {s:?}");
            if !degenerate.contains(&k) && s.f_derivative.abs() > 1e-3 {
                prop_assert_eq!(hessian_kind(s.z, s.branch.phase(), &p), s.kind);
            }
        }
    }

    #[test]
    fn uncoupled_points_come_in_mirror_pairs(r in 0.0..6.0f64) {
        prop_assume!((r - 1.0).abs() > 1e-3);
        let p = ReducedParams::uncoupled(r).unwrap();
        let points = find_stationary_points(&p, DEFAULT_GRID_N).unwrap();
        for s in &points {
            let mirror = points.iter().any(|q| q.branch == s.branch && q.kind == s.kind && (q.z + s.z).abs() < 1e-12);
            prop_assert!(mirror, "no mirror for {s:?}");
        }
    }

    #[test]
    fn root_set_is_stable_under_grid_refinement(p in reduced()) {
        let (coarse, dc) = scan_stationary_points(&p, DEFAULT_GRID_N).unwrap();
        let (fine, df) = scan_stationary_points(&p, 4 * DEFAULT_GRID_N).unwrap();
        prop_assume!(dc.is_empty() && df.is_empty());
        prop_assert_eq!(coarse.len(), fine.len());
        for (a, b) in coarse.iter().zip(&fine) {
            prop_assert!((a.z - b.z).abs() < 1e-12);
        }
    }
}

#[test]
fn tilt_sweep_passes_from_four_to_eight_points() {
    let rows =
        bifurcation_sweep(&coupled(), SweepParam::Tilt, (0.0, 0.02), 41, DEFAULT_GRID_N).unwrap();
    let totals: Vec<usize> = rows
        .iter()
        .filter_map(|row| row.counts.map(|c| c.total()))
        .collect();
    assert_eq!(totals.first(), Some(&4));
    assert_eq!(totals.last(), Some(&8));
    assert!(totals.windows(2).all(|w| w[1] >= w[0]), "{totals:?}");
    assert!(rows.iter().all(|row| row.euler_ok || row.flag.is_some()));
}

fn total_points(tilt: f64) -> usize {
    let p = coupled().with_tilt(tilt).unwrap();
    scan_stationary_points(&p, 4 * DEFAULT_GRID_N)
        .unwrap()
        .0
        .len()
}

/// Bisects on the stationary-point count between `lo` (count `below`) and `hi`.
fn bisect_transition(mut lo: f64, mut hi: f64, below: usize) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if total_points(mid) == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn saddle_node_values_match_oracle() {
    assert_eq!(total_points(0.001), 4);
    assert_eq!(total_points(0.01), 6);
    assert_eq!(total_points(0.019), 8);
    let pi_star = bisect_transition(0.001, 0.01, 4);
    let zero_star = bisect_transition(0.01, 0.019, 6);
    assert!((pi_star - TILT_STAR_PI).abs() < 1e-7, "{pi_star}");
    assert!((zero_star - TILT_STAR_ZERO).abs() < 1e-7, "{zero_star}");
}

#[test]
fn new_points_appear_on_the_expected_lines() {
    let just_above = |tilt: f64| {
        find_stationary_points(&coupled().with_tilt(tilt).unwrap(), DEFAULT_GRID_N).unwrap()
    };
    let count = |pts: &[josephson_cavity::StationaryPoint], b: Branch| {
        pts.iter().filter(|p| p.branch == b).count()
    };
    let before = just_above(TILT_STAR_PI - 1e-4);
    let after = just_above(TILT_STAR_PI + 1e-4);
    assert_eq!(count(&after, Branch::Pi), count(&before, Branch::Pi) + 2);
    assert_eq!(count(&after, Branch::Zero), count(&before, Branch::Zero));
    let before = just_above(TILT_STAR_ZERO - 1e-4);
    let after = just_above(TILT_STAR_ZERO + 1e-4);
    assert_eq!(
        count(&after, Branch::Zero),
        count(&before, Branch::Zero) + 2
    );
}
