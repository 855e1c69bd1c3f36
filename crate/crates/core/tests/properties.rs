use gurlab::inequalities::{
    bracket_factors, collective_gur, evaluate_suite, gur_split, gur_three_bound, gur_two, gur_two_bound,
    schwarz_pair_bound, schwarz_triple_bounds, SuiteConfig, Which,
};
use gurlab::{Constants, GaussianState, MomentTable, RelationOutcome};
use proptest::prelude::*;

const SEEDS: u64 = 1000;
const SQUEEZE_MAX: f64 = 1.5;

fn random_moments(n: usize, seed: u64, squeeze_max: f64, hbar: f64) -> MomentTable {
    GaussianState::random(n, seed, squeeze_max, &Constants::new(hbar).unwrap())
        .unwrap()
        .moments()
        .unwrap()
}

#[test]
fn two_particle_battery_holds() {
    let cfg = SuiteConfig::gaussian(1.0);
    let mut worst = f64::INFINITY;
    for seed in 0..SEEDS {
        let m = random_moments(2, seed, SQUEEZE_MAX, 1.0);
        let reports = [
            collective_gur(&m, &cfg),
            gur_split(&m, &cfg),
            gur_two(&m, &cfg).unwrap(),
            schwarz_pair_bound(&m, Which::Q, &cfg).unwrap(),
            schwarz_pair_bound(&m, Which::P, &cfg).unwrap(),
            gur_two_bound(&m, &cfg).unwrap(),
        ];
        for r in &reports {
            assert!(r.slack >= -1e-9, "seed {seed}: {r:?}");
            worst = worst.min(r.slack);
        }
    }
    assert!(worst.is_finite());
}

#[test]
fn three_particle_battery_holds() {
    let cfg = SuiteConfig::gaussian(1.0);
    for seed in 0..SEEDS {
        let m = random_moments(3, seed, SQUEEZE_MAX, 1.0);
        let mut reports = schwarz_triple_bounds(&m, Which::Q, &cfg).unwrap();
        reports.extend(schwarz_triple_bounds(&m, Which::P, &cfg).unwrap());
        reports.push(gur_three_bound(&m, &cfg).unwrap());
        reports.push(collective_gur(&m, &cfg));
        assert_eq!(reports.len(), 22);
        for r in &reports {
            assert!(r.slack >= -1e-9, "seed {seed}: {r:?}");
        }
    }
}

#[test]
fn full_suite_holds_on_battery_at_two_values_of_hbar() {
    for hbar in [1.0, 2.0] {
        let cfg = SuiteConfig::gaussian(hbar);
        for n in 1..=3 {
            for seed in 0..50 {
                let m = random_moments(n, seed, SQUEEZE_MAX, hbar);
                for o in evaluate_suite(&m, None, &cfg, "random").unwrap() {
                    if let RelationOutcome::Evaluated(r) = o {
                        assert!(r.holds, "hbar {hbar} n {n} seed {seed}: {r:?}");
                    }
                }
            }
        }
    }
}

/// Substituting the Schwarz upper bound into the bracketed two-particle
/// factors cannot produce a left side below the bound's own left side.
fn derivation_chain(m: &MomentTable, cfg: &SuiteConfig) {
    let sq = schwarz_pair_bound(m, Which::Q, cfg).unwrap();
    let sp = schwarz_pair_bound(m, Which::P, cfg).unwrap();
    let (fq, fp) = bracket_factors(m);
    if sq.holds && sp.holds && fq >= 0.0 && fp >= 0.0 {
        let bound = gur_two_bound(m, cfg).unwrap().lhs;
        let bracket = gur_two(m, cfg).unwrap().lhs;
        assert!(bracket <= bound * (1.0 + 1e-12), "{bracket} > {bound}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivation_chain_two_particles(seed in any::<u64>(), sm in 0.0..2.5f64) {
        derivation_chain(&random_moments(2, seed, sm, 1.0), &SuiteConfig::gaussian(1.0));
    }

    #[test]
    fn split_equals_collective(n in 1usize..=3, seed in any::<u64>(), sm in 0.0..2.5f64) {
        let m = random_moments(n, seed, sm, 1.0);
        let cfg = SuiteConfig::gaussian(1.0);
        let (a, b) = (gur_split(&m, &cfg).lhs, collective_gur(&m, &cfg).lhs);
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn verdicts_invariant_under_canonical_rescaling(
        n in 1usize..=3,
        seed in any::<u64>(),
        sm in 0.0..2.0f64,
        lambda in 0.05..20.0f64,
    ) {
        let cfg = SuiteConfig::gaussian(1.0);
        let m = random_moments(n, seed, sm, 1.0);
        let scaled = m.rescaled(lambda).unwrap();
        let a = evaluate_suite(&m, None, &cfg, "s").unwrap();
        let b = evaluate_suite(&scaled, None, &cfg, "s").unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            if let (Some(x), Some(y)) = (x.report(), y.report()) {
                if x.name.is_dimensionally_balanced() {
                    prop_assert_eq!(x.holds, y.holds, "{:?}", x.name);
                }
            }
        }
    }

    #[test]
    fn every_relation_holds_on_random_states(n in 1usize..=3, seed in any::<u64>(), sm in 0.0..3.0f64) {
        let cfg = SuiteConfig::gaussian(1.0);
        let m = random_moments(n, seed, sm, 1.0);
        for o in evaluate_suite(&m, None, &cfg, "p").unwrap() {
            if let Some(r) = o.report() {
                prop_assert!(r.holds, "{:?}", r);
            }
        }
    }
}
