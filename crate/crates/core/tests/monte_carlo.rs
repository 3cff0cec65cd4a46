use anytime_core::de_engine::erasure_curve;
use anytime_core::mc_sim::{
    build_anytime_graph, build_bilayer_graph, build_bilayer_graph_with, draw_erasures, peel_decode,
    simulate_relay_stream, CheckAssignment, IncrementalPeeler, SimSettings, TannerGraph,
};
use anytime_core::{BilayerConfig, DeSettings, GeometricProfile, LayerParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn offsets_follow_the_geometric_profile() {
    let layer = LayerParams::new(3, 6, 0.1).unwrap();
    let (m, t) = (1000, 550);
    let g = build_anytime_graph(&layer, m, t, 2024).unwrap();
    // keep variables far enough from the end that truncation is invisible
    const BINS: usize = 50;
    let mut hist = [0u64; BINS + 1];
    let mut n = 0u64;
    for e in g.edges() {
        if e.vpos as usize + 200 <= t {
            let k = (e.cpos - e.vpos) as usize;
            hist[k.min(BINS)] += 1;
            n += 1;
        }
    }
    assert!(n >= 1_000_000, "{n}");
    let profile = GeometricProfile::new(0.1);
    let mut chi2 = 0.0;
    for (k, &obs) in hist.iter().enumerate() {
        let p = if k < BINS {
            profile.pmf(k as u64)
        } else {
            profile.tail(BINS as u64 - 1)
        };
        let expected = p * n as f64;
        chi2 += (obs as f64 - expected).powi(2) / expected;
    }
    // 99th percentile of chi-square with 50 degrees of freedom
    assert!(chi2 < 76.154, "chi2 = {chi2}");
}

#[test]
fn graphs_are_reproducible_from_seed() {
    let cfg = BilayerConfig::running_example();
    let a = build_bilayer_graph(&cfg, 80, 25, 5).unwrap();
    assert_eq!(a, build_bilayer_graph(&cfg, 80, 25, 5).unwrap());
    assert_ne!(
        a.edges(),
        build_bilayer_graph(&cfg, 80, 25, 6).unwrap().edges()
    );
}

#[test]
fn both_assignments_keep_variable_degrees() {
    let cfg = BilayerConfig::running_example();
    for mode in [CheckAssignment::Uniform, CheckAssignment::Balanced] {
        let g = build_bilayer_graph_with(&cfg, 200, 30, 1, mode).unwrap();
        assert!(g.variable_degrees().iter().all(|d| *d == (3, 2)));
        assert!(g.edges().iter().all(|e| e.cpos >= e.vpos));
    }
}

#[test]
fn text_format_round_trips_a_full_graph() {
    let g = build_bilayer_graph(&BilayerConfig::running_example(), 40, 12, 77).unwrap();
    let text = g.to_text();
    assert!(text.starts_with("40 12 3 6 0.1 2 8 0.1 77\n"));
    assert_eq!(TannerGraph::from_text(&text).unwrap(), g);
}

#[test]
fn simulation_is_reproducible() {
    let cfg = BilayerConfig::running_example().with_eps_sd(0.5).unwrap();
    let s = SimSettings {
        m: 40,
        trials: 12,
        messages: vec![5, 8],
        d_max: 4,
        ..Default::default()
    };
    let a = simulate_relay_stream(&cfg, &s).unwrap();
    assert_eq!(a, simulate_relay_stream(&cfg, &s).unwrap());
    assert_eq!(a.len(), 2);
    let other = SimSettings { seed: 8, ..s };
    assert_ne!(a, simulate_relay_stream(&cfg, &other).unwrap());
}

#[test]
fn full_erasure_without_relay_decodes_nothing() {
    // away from the start, where sparse early checks still pin variables
    let layer = LayerParams::new(3, 6, 0.1).unwrap();
    let cfg = BilayerConfig::single_layer(layer, 1.0).unwrap();
    let s = SimSettings {
        m: 60,
        trials: 3,
        messages: vec![60],
        d_max: 0,
        ..Default::default()
    };
    assert_eq!(simulate_relay_stream(&cfg, &s).unwrap()[0].pe_hat[0], 1.0);
}

#[test]
fn empirical_curves_are_bounded_and_monotone() {
    let cfg = BilayerConfig::running_example().with_eps_sd(0.6).unwrap();
    let s = SimSettings {
        m: 100,
        trials: 20,
        messages: vec![10],
        d_max: 8,
        ..Default::default()
    };
    let c = &simulate_relay_stream(&cfg, &s).unwrap()[0];
    assert!(c.pe_hat.iter().all(|p| (0.0..=1.0).contains(p)));
    assert!(c.pe_hat.windows(2).all(|w| w[1] <= w[0]));
    assert!(c.ci_halfwidth.iter().all(|h| *h >= 0.0));
}

#[test]
fn empirical_curves_approach_density_evolution() {
    // close to threshold, where finite-length effects are large
    let cfg = BilayerConfig::running_example().with_eps_sd(0.7).unwrap();
    let de = erasure_curve(&cfg, 15, 10, &DeSettings::default());
    let worst: Vec<f64> = [(100, 200), (1000, 40), (10000, 10)]
        .iter()
        .map(|&(m, trials)| {
            let s = SimSettings {
                m,
                trials,
                seed: 3,
                messages: vec![15],
                d_max: 10,
                ..Default::default()
            };
            let c = &simulate_relay_stream(&cfg, &s).unwrap()[0];
            c.pe_hat
                .iter()
                .zip(de.pe())
                .filter(|(_, pe)| **pe > 1e-2)
                .map(|(mc, pe)| (mc - pe).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(worst[0] > worst[1] && worst[1] > worst[2], "{worst:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn incremental_peeling_matches_scratch(seed in any::<u64>(), eps in 0.2f64..0.8) {
        let cfg = BilayerConfig::running_example();
        let positions = 15;
        let g = build_bilayer_graph(&cfg, 24, positions, seed).unwrap();
        let adj = g.adjacency();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let erasures = draw_erasures(&mut rng, g.num_variables(), eps);
        let mut peeler = IncrementalPeeler::new(&adj, positions, &erasures);
        for t in 1..=positions {
            peeler.advance_to(t);
            prop_assert_eq!(peeler.residual_set(), peel_decode(&g, &erasures, t));
        }
    }
}
