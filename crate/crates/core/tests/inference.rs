use frontier_cpd::inference::{geometric_quantile, split_scores};
use frontier_cpd::sim::derive_seed;
use frontier_cpd::{
    confidence_interval, detect_single, estimate_mu, estimate_theta_general, estimate_theta_iid,
    generate, trim_quantile, Bandwidths, CiMode, DetectorConfig, FrontierFamily, FrontierSpec,
    ScoreDist, Series, SimConfig, TechnologyPath,
};
use proptest::prelude::*;

fn one_change(n: usize, seed: u64) -> Series<f64> {
    let path = TechnologyPath::Global(FrontierSpec::table1(FrontierFamily::Constant, 1).unwrap());
    generate(&SimConfig::new(n, 1, 1, path, ScoreDist::R1, seed))
        .unwrap()
        .0
}

struct Fit {
    eta_hat: usize,
    mu: f64,
    theta_iid: f64,
    theta_general: f64,
}

fn fit(n: usize, seed: u64) -> Fit {
    let s = one_change(n, seed);
    let config = DetectorConfig::defaults_for(n);
    let eta_hat = detect_single(&s, &config).unwrap().eta_hat;
    let x0 = trim_quantile(&s, config.alpha_trim).unwrap();
    let mu = estimate_mu(&s, eta_hat, &x0, 2).unwrap().mu;
    let scores = split_scores(&s, eta_hat, &x0).unwrap();
    let theta_iid = estimate_theta_iid(&scores, mu).theta;
    let theta_general = estimate_theta_general(&s, &scores, mu, &x0, &Bandwidths::defaults(&s))
        .unwrap()
        .theta;
    Fit {
        eta_hat,
        mu,
        theta_iid,
        theta_general,
    }
}

/// `P(Z - 1 <= k)` for `Z ~ Geometric(theta)` by summing the mass function.
fn geometric_cdf(theta: f64, k: usize) -> f64 {
    (0..=k).map(|j| theta * (1.0 - theta).powi(j as i32)).sum()
}

#[test]
fn jump_size_is_recovered() {
    // true mu is 1 / 1.75 = 0.571
    let inside = (0..200)
        .filter(|&r| (0.50..0.65).contains(&fit(1000, derive_seed(201, r)).mu))
        .count();
    assert!(inside >= 180, "{inside} of 200");
}

#[test]
fn general_theta_is_not_above_iid_theta() {
    let below = (0..200)
        .filter(|&r| {
            let f = fit(1000, derive_seed(202, r));
            f.theta_general <= f.theta_iid
        })
        .count();
    assert!(below >= 180, "{below} of 200");
}

#[test]
fn overshoot_is_dominated_by_the_geometric_law() {
    let reps = 400;
    let fits: Vec<Fit> = (0..reps).map(|r| fit(1000, derive_seed(203, r))).collect();
    let mut thetas: Vec<f64> = fits.iter().map(|f| f.theta_iid).collect();
    thetas.sort_by(f64::total_cmp);
    let theta = thetas[reps as usize / 2];
    for k in 0..=5 {
        let within = fits.iter().filter(|f| f.eta_hat <= 500 + k).count() as f64 / reps as f64;
        let bound = geometric_cdf(theta, k);
        assert!(
            within >= bound - 0.05,
            "k = {k}: empirical {within:.3} vs geometric {bound:.3}"
        );
    }
}

#[test]
fn iid_interval_contains_the_estimate() {
    for r in 0..20 {
        let f = fit(1000, derive_seed(204, r));
        let ci = confidence_interval(f.eta_hat, f.theta_iid, 0.9, CiMode::Iid).unwrap();
        assert!(ci.lo <= ci.eta_hat && ci.hi == ci.eta_hat);
        assert_eq!(
            ci.eta_hat - ci.lo,
            geometric_quantile(f.theta_iid, 0.9).min(f.eta_hat - 1)
        );
    }
}

proptest! {
    #[test]
    fn quantile_is_the_smallest_covering_k(theta in 0.001f64..1.0, level in 0.01f64..0.999) {
        let k = geometric_quantile(theta, level);
        prop_assert!(geometric_cdf(theta, k) >= level - 1e-12);
        if k > 0 {
            prop_assert!(geometric_cdf(theta, k - 1) < level + 1e-12);
        }
    }

    #[test]
    fn width_shrinks_with_theta_and_grows_with_level(
        a in 0.001f64..1.0, b in 0.001f64..1.0, l1 in 0.01f64..0.999, l2 in 0.01f64..0.999,
    ) {
        let (lo_t, hi_t) = if a <= b { (a, b) } else { (b, a) };
        let (lo_l, hi_l) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let width = |t: f64, l: f64| {
            let ci = confidence_interval(10_000, t, l, CiMode::Iid).unwrap();
            ci.hi - ci.lo
        };
        prop_assert!(width(hi_t, lo_l) <= width(lo_t, lo_l));
        prop_assert!(width(lo_t, lo_l) <= width(lo_t, hi_l));
    }
}

#[test]
fn bad_arguments_are_rejected() {
    assert!(confidence_interval(10, 0.5, 1.0, CiMode::Iid).is_err());
    assert!(confidence_interval(10, 0.0, 0.9, CiMode::Iid).is_err());
    assert!(confidence_interval(0, 0.5, 0.9, CiMode::General).is_err());
    let s = one_change(200, 1);
    let x0 = trim_quantile(&s, 0.1).unwrap();
    assert!(estimate_mu(&s, 1, &x0, 2).is_err());
    assert!(estimate_mu(&s, 199, &x0, 2).is_err());
}
