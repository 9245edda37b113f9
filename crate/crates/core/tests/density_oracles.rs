use skewbm::density::{
    density_driftless, density_one_barrier_drift, density_two_barrier_drift,
    density_two_barrier_drift_branch, DriftBranch, DriftSeries, DriftlessSeries, OneBarrierDrift,
};
use skewbm::oracles::{
    check_chapman, check_detailed_balance, check_flux, check_normalization, check_transmission,
    fourier_density_drift, fourier_density_driftless, QuadratureRule, QuadratureSpec,
};
use skewbm::{RandomStream, SkewParams, TruncationPolicy};

fn random_pairs(seed: u64, n: usize) -> Vec<(f64, f64)> {
    let mut rng = RandomStream::new(seed, 0);
    (0..n)
        .map(|_| (-1.5 + 4.0 * rng.uniform(), -1.5 + 4.0 * rng.uniform()))
        .collect()
}

#[test]
fn driftless_series_matches_oracle_at_quarter() {
    let p = SkewParams::driftless(0.0, 1.0, 0.3, -0.7).unwrap();
    let spec = QuadratureSpec::default();
    let s = density_driftless(1.0, 0.5, 0.25, &p, &TruncationPolicy::default()).unwrap();
    let q = fourier_density_driftless(1.0, 0.5, 0.25, &p, &spec).unwrap();
    assert!((s.value - q).abs() <= s.error_bound + spec.tolerance);
}

#[test]
fn quadrature_rules_agree() {
    let p = SkewParams::driftless(0.0, 1.0, 0.5, -0.5).unwrap();
    let a = fourier_density_driftless(1.0, 0.5, 0.5, &p, &QuadratureSpec::default()).unwrap();
    let b = fourier_density_driftless(
        1.0,
        0.5,
        0.5,
        &p,
        &QuadratureSpec::with_rule(QuadratureRule::GaussLegendre),
    )
    .unwrap();
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn drift_series_matches_oracle() {
    let p = SkewParams::new(0.0, 1.0, 0.4, 0.2, 1.0).unwrap();
    let s = density_two_barrier_drift(1.0, 0.5, 0.3, &p, &TruncationPolicy::default()).unwrap();
    let q = fourier_density_drift(1.0, 0.5, 0.3, &p, &QuadratureSpec::default()).unwrap();
    assert!((s.value - q).abs() < 1e-7, "{} vs {q}", s.value);
}

#[test]
fn equal_branch_is_continuous() {
    let pol = TruncationPolicy::default();
    let same = SkewParams::new(0.0, 1.0, 0.3, 0.3, 1.0).unwrap();
    let near = SkewParams::new(0.0, 1.0, 0.3, 0.3 * (1.0 + 1e-9), 1.0).unwrap();
    for y in [-0.7, 0.2, 0.9, 1.4] {
        let a = density_two_barrier_drift(1.0, 0.5, y, &same, &pol)
            .unwrap()
            .value;
        let b = density_two_barrier_drift(1.0, 0.5, y, &near, &pol)
            .unwrap()
            .value;
        assert!((a - b).abs() < 1e-5, "{y}: {a} vs {b}");
        let taylor =
            density_two_barrier_drift_branch(1.0, 0.5, y, &near, &pol, DriftBranch::NearEqual)
                .unwrap()
                .value;
        assert_eq!(b, taylor);
    }
}

#[test]
fn distinct_and_taylor_branches_overlap() {
    let pol = TruncationPolicy::new(14, 1e-14).unwrap();
    let p = SkewParams::new(0.0, 1.0, 0.6, 0.1, 2.0).unwrap();
    for y in [-0.5, 0.3, 1.2] {
        let d =
            density_two_barrier_drift_branch(1.0, 0.5, y, &p, &pol, DriftBranch::Distinct).unwrap();
        let n = density_two_barrier_drift_branch(1.0, 0.5, y, &p, &pol, DriftBranch::NearEqual)
            .unwrap();
        assert!((d.value - n.value).abs() < 1e-10 * d.value.max(1e-3));
    }
}

#[test]
fn drift_structure() {
    let pol = TruncationPolicy::default();
    let d = DriftSeries::new(SkewParams::new(0.0, 1.0, 0.4, 0.2, 1.0).unwrap(), pol).unwrap();
    assert!(check_normalization(1.0, 0.5, &d, 1e-6).unwrap().passed);
    let flux = check_flux(1.0, 0.5, &d, 1e-3).unwrap();
    assert!(flux.passed, "{flux:?}");
    assert!(check_transmission(1.0, 0.5, &d, 1e-6).unwrap().passed);
}

#[test]
fn one_barrier_matches_drift_oracle() {
    let spec = QuadratureSpec::default();
    let mut rng = RandomStream::new(3, 0);
    for (beta, mu) in [(0.6, 1.0), (-0.5, -0.8)] {
        let p = SkewParams::new(0.0, 1.0, beta, 0.0, mu).unwrap();
        for _ in 0..20 {
            let t = 0.3 + rng.uniform();
            let x = -1.0 + 2.0 * rng.uniform();
            let y = -1.5 + 3.0 * rng.uniform();
            let closed = density_one_barrier_drift(t, x, y, 0.0, beta, mu)
                .unwrap()
                .value;
            let q = fourier_density_drift(t, x, y, &p, &spec).unwrap();
            assert!((closed - q).abs() < 1e-7, "{closed} vs {q}");
        }
    }
}

#[test]
fn one_barrier_with_adverse_drift_is_a_density() {
    let pairs = random_pairs(4, 10);
    for (beta, mu) in [(0.7, -1.0), (-0.5, 1.5), (0.9, -3.0)] {
        let d = OneBarrierDrift::new(0.0, beta, mu).unwrap();
        assert!(check_normalization(1.0, 0.3, &d, 1e-6).unwrap().passed);
        assert!(check_transmission(1.0, 0.3, &d, 1e-6).unwrap().passed);
        assert!(check_flux(1.0, 0.3, &d, 1e-3).unwrap().passed);
        assert!(
            check_detailed_balance(0.8, &pairs, &d, 1e-8)
                .unwrap()
                .passed
        );
        assert!(
            check_chapman(0.5, 0.5, &pairs[..3], &d, 1e-5)
                .unwrap()
                .passed
        );
    }
}

#[test]
fn driftless_balance_and_semigroup() {
    let d = DriftlessSeries::new(
        SkewParams::driftless(0.0, 1.0, 0.5, -0.5).unwrap(),
        TruncationPolicy::new(60, 1e-14).unwrap(),
    )
    .unwrap();
    let balance = check_detailed_balance(1.0, &random_pairs(8, 200), &d, 1e-8).unwrap();
    assert!(balance.passed, "{}", balance.max_residual);
    let pairs = random_pairs(9, 10);
    for (t, s) in [(0.5, 0.5), (0.3, 0.7)] {
        let r = check_chapman(t, s, &pairs, &d, 1e-5).unwrap();
        assert!(r.passed, "{}", r.max_residual);
    }
}

#[test]
fn one_barrier_is_the_far_barrier_limit() {
    let pol = TruncationPolicy::new(60, 1e-15).unwrap();
    let (t, x) = (1.0, 0.5);
    let errs: Vec<f64> = [5.0, 10.0, 20.0]
        .iter()
        .map(|&z2| {
            let p = SkewParams::driftless(0.0, z2, 0.7, 0.4).unwrap();
            (0..=60)
                .map(|i| x - 3.0 + 0.1 * i as f64)
                .map(|y| {
                    let two = density_driftless(t, x, y, &p, &pol).unwrap().value;
                    let one = density_one_barrier_drift(t, x, y, 0.0, 0.7, 0.0)
                        .unwrap()
                        .value;
                    (two - one).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] >= errs[2], "{errs:?}");
}
