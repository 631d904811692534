//! Randomized invariant checks across the whole input space, not just the
//! hand-picked unit-test points.

use proptest::prelude::*;

use evdemand::analytic::{expected_demand, SessionModel};
use evdemand::dist::Distribution;
use evdemand::montecarlo::{merge_partials, ChargingSession, PartialHistogram};
use evdemand::profile::{DemandProfile, ProfileMeta, Provenance};
use evdemand::quad;
use evdemand::specfun::{q_function, std_normal_cdf};

/// Resolutions that divide 24 h into a whole number of bins.
fn valid_resolution() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 24.0])
}

/// Any supported law with parameters inside its validity region.
fn any_distribution() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (-40.0..40.0_f64, 0.01..64.0_f64)
            .prop_map(|(mu, s2)| Distribution::gaussian(mu, s2).unwrap()),
        (-20.0..20.0_f64, 0.001..40.0_f64)
            .prop_map(|(c, w)| Distribution::uniform(c, c + w).unwrap()),
        (0.01..50.0_f64).prop_map(|m| Distribution::exponential(m).unwrap()),
        // nonnegative location keeps accept-reject comfortably feasible
        (0.0..20.0_f64, 0.01..25.0_f64)
            .prop_map(|(mu, s2)| Distribution::truncated_gaussian(mu, s2).unwrap()),
        (0.0..20.0_f64, 0.05..10.0_f64)
            .prop_map(|(nu, s)| Distribution::rician(nu, s).unwrap()),
    ]
}

/// A duration law: nonnegative support.
fn duration_distribution() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.0..10.0_f64, 0.001..30.0_f64)
            .prop_map(|(c, w)| Distribution::uniform(c, c + w).unwrap()),
        (0.01..20.0_f64).prop_map(|m| Distribution::exponential(m).unwrap()),
        (0.1..15.0_f64, 0.01..20.0_f64)
            .prop_map(|(mu, s2)| Distribution::truncated_gaussian(mu, s2).unwrap()),
        (0.0..15.0_f64, 0.05..8.0_f64)
            .prop_map(|(nu, s)| Distribution::rician(nu, s).unwrap()),
    ]
}

fn session_strategy() -> impl Strategy<Value = ChargingSession> {
    (-80.0..80.0_f64, 0.0..50.0_f64, 0.1..25.0_f64).prop_map(|(arrival_h, duration_h, power_kw)| {
        ChargingSession { arrival_h, duration_h, power_kw }
    })
}

proptest! {
    /// Q(x) + Q(-x) = 1 and Q is strictly within [0, 1].
    #[test]
    fn q_function_symmetry(x in -30.0..30.0_f64) {
        let q = q_function(x);
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!((q + q_function(-x) - 1.0).abs() < 1e-14);
        prop_assert!((q + std_normal_cdf(x) - 1.0).abs() < 1e-14);
    }

    /// Total pdf mass is 1 for every family and parameter choice.
    #[test]
    fn pdf_integrates_to_one(dist in any_distribution()) {
        let (lo, hi) = dist.quantile_range(1e-12).unwrap();
        let mass = quad::integrate(|x| dist.pdf(x), lo, hi, 1e-12, quad::DEFAULT_MAX_SEGMENTS);
        prop_assert!((mass.value - 1.0).abs() < 1e-6, "mass {} for {}", mass.value, dist.describe());
    }

    /// CDFs never decrease (up to quadrature noise for the integral-backed
    /// Rician) and stay in [0, 1].
    #[test]
    fn cdf_is_monotone(dist in any_distribution(), a in -100.0..100.0_f64, b in -100.0..100.0_f64) {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        let (fx, fy) = (dist.cdf(x), dist.cdf(y));
        prop_assert!((0.0..=1.0).contains(&fx));
        prop_assert!((0.0..=1.0).contains(&fy));
        prop_assert!(fy >= fx - 1e-12, "cdf({x}) = {fx} > cdf({y}) = {fy} for {}", dist.describe());
    }

    /// Quantile inverts the CDF on the interior of the support.
    #[test]
    fn quantile_inverts_cdf(dist in any_distribution(), p in 0.001..0.999_f64) {
        let x = dist.quantile(p).unwrap();
        prop_assert!((dist.cdf(x) - p).abs() < 1e-9, "cdf(q({p})) = {} for {}", dist.cdf(x), dist.describe());
    }

    /// The unwrapped expectation is a probability times the power.
    #[test]
    fn demand_stays_within_power_bound(
        arrival_mu in -10.0..34.0_f64,
        arrival_sigma2 in 0.5..30.0_f64,
        charge in duration_distribution(),
        power in 0.1..25.0_f64,
        t in -60.0..90.0_f64,
    ) {
        let model = SessionModel::new(
            Distribution::gaussian(arrival_mu, arrival_sigma2).unwrap(),
            charge,
            power,
        ).unwrap();
        let demand = expected_demand(&model, t).unwrap();
        prop_assert!((0.0..=power).contains(&demand));
    }

    /// Whatever the sessions look like, the histogram's bin sums hold
    /// exactly the deposited energy.
    #[test]
    fn deposits_conserve_energy(
        resolution in valid_resolution(),
        sessions in prop::collection::vec(session_strategy(), 1..40),
    ) {
        let mut hist = PartialHistogram::new(resolution).unwrap();
        let mut expected = 0.0_f64;
        for s in &sessions {
            hist.deposit_session(s);
            expected += s.power_kw * s.duration_h;
        }
        let binned: f64 = hist.sum_kw().iter().sum::<f64>() * resolution;
        let scale = expected.abs().max(1.0);
        prop_assert!((binned - expected).abs() <= 1e-9 * scale, "binned {binned} vs {expected}");
    }

    /// Chunked deposits merged together match one sequential pass.
    #[test]
    fn merge_matches_sequential(
        resolution in valid_resolution(),
        sessions in prop::collection::vec(session_strategy(), 1..40),
        split in 1..8_usize,
    ) {
        let mut sequential = PartialHistogram::new(resolution).unwrap();
        for s in &sessions {
            sequential.deposit_session(s);
        }
        let parts: Vec<PartialHistogram> = sessions
            .chunks(split)
            .map(|chunk| {
                let mut h = PartialHistogram::new(resolution).unwrap();
                for s in chunk {
                    h.deposit_session(s);
                }
                h
            })
            .collect();
        let merged = merge_partials(&parts).unwrap();
        for (a, b) in merged.sum_kw().iter().zip(sequential.sum_kw()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        for (a, b) in merged.sumsq_kw().iter().zip(sequential.sumsq_kw()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    /// CSV serialization round-trips bit for bit.
    #[test]
    fn csv_round_trip_is_exact(
        resolution in valid_resolution(),
        raw in prop::collection::vec((0.0..1e6_f64, 0.0..100.0_f64), 1..64),
        with_stderr in any::<bool>(),
    ) {
        let n = (24.0 / resolution).round() as usize;
        let values: Vec<f64> = (0..n).map(|i| raw[i % raw.len()].0).collect();
        let stderr = with_stderr.then(|| (0..n).map(|i| raw[i % raw.len()].1).collect::<Vec<f64>>());
        let profile = DemandProfile::new(
            resolution,
            values,
            stderr,
            ProfileMeta::new(Provenance::Imported),
        ).unwrap();
        let restored = DemandProfile::from_csv_str(&profile.to_csv()).unwrap();
        prop_assert_eq!(restored.resolution_h(), profile.resolution_h());
        for (a, b) in restored.values_kw().iter().zip(profile.values_kw()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        match (restored.stderr_kw(), profile.stderr_kw()) {
            (None, None) => {}
            (Some(r), Some(p)) => {
                for (a, b) in r.iter().zip(p) {
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
            }
            _ => prop_assert!(false, "stderr column did not round trip"),
        }
    }
}
