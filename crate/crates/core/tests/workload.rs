use mlindex_core::workload::{self, ParameterSampler, StreamPurpose};
use mlindex_core::{DistributionSpec, SkewTarget, WorkloadConfig};
use proptest::prelude::*;

/// Midpoint-rule integral of max(f, 0) over each unit bin, normalized.
fn numeric_probabilities(q: u32, slope: f64) -> Vec<f64> {
    let qf = f64::from(q);
    let f = |x: f64| {
        if slope <= 0.0 {
            1.0
        } else {
            (slope * (x - qf) + qf).max(0.0)
        }
    };
    let steps = 2000;
    let mass: Vec<f64> = (0..q)
        .map(|i| {
            (0..steps)
                .map(|j| f(f64::from(i) + (f64::from(j) + 0.5) / f64::from(steps)))
                .sum::<f64>()
        })
        .collect();
    let total: f64 = mass.iter().sum();
    mass.iter().map(|m| m / total).collect()
}

fn frequencies(sampler: &ParameterSampler, draws: usize, seed: u64) -> Vec<f64> {
    let mut rng = workload::stream(seed, StreamPurpose::Requests, 0);
    let mut counts = vec![0usize; sampler.universe() as usize];
    for _ in 0..draws {
        counts[sampler.sample(&mut rng).index()] += 1;
    }
    counts.into_iter().map(|c| c as f64 / draws as f64).collect()
}

#[test]
fn theoretical_table_matches_numeric_integration() {
    for (q, slope) in [
        (2, 1.0),
        (10, 0.5),
        (300, 1.0),
        (300, 0.25),
        (50, 3.0),
        (40, 0.0),
        (40, -1.0),
    ] {
        let exact = ParameterSampler::new(q, slope).probabilities();
        let numeric = numeric_probabilities(q, slope);
        for (a, b) in exact.iter().zip(&numeric) {
            assert!((a - b).abs() < 1e-6, "q={q} l={slope}: {a} vs {b}");
        }
        assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_parameter_split_is_one_quarter_three_quarters() {
    let sampler = ParameterSampler::new(2, 1.0);
    let p = sampler.probabilities();
    assert!((p[0] - 0.25).abs() < 1e-12 && (p[1] - 0.75).abs() < 1e-12);
    let freq = frequencies(&sampler, 200_000, 1);
    assert!((freq[0] - 0.25).abs() < 0.005, "{freq:?}");
}

#[test]
fn steep_slope_leaves_low_ids_unreachable() {
    let sampler = ParameterSampler::new(50, 2.0);
    // f(x) = 2x - 50 is negative below x = 25
    assert_eq!(sampler.support(), 25);
    let freq = frequencies(&sampler, 50_000, 2);
    assert!(freq[..25].iter().all(|&f| f == 0.0));
}

#[test]
fn non_positive_slopes_are_uniform() {
    let a = frequencies(&ParameterSampler::new(20, 0.0), 200_000, 3);
    let b = frequencies(&ParameterSampler::new(20, -1.0), 200_000, 4);
    for (x, y) in a.iter().zip(&b) {
        // 5 standard errors of a difference of two binomial proportions
        assert!(
            (x - y).abs() < 5.0 * (2.0 * 0.05 * 0.95 / 200_000.0f64).sqrt(),
            "{x} vs {y}"
        );
    }
    assert_eq!(
        ParameterSampler::new(20, -1.0).probabilities(),
        ParameterSampler::new(20, 0.0).probabilities()
    );
}

proptest! {
    #[test]
    fn probabilities_increase_with_id(q in 2u32..200, slope in 0.01f64..4.0) {
        let p = ParameterSampler::new(q, slope).probabilities();
        prop_assert!(p.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    }
}

#[test]
fn generated_sets_follow_their_targets() {
    for (target, skewed_inputs, skewed_requests) in [
        (SkewTarget::None, false, false),
        (SkewTarget::ServiceInputs, true, false),
        (SkewTarget::RetrievalRequests, false, true),
    ] {
        let cfg = WorkloadConfig::desk(target, 1.0, 8);
        let repo = workload::generate_dataset_repository(&cfg, 0);
        let requests = workload::generate_requests(&cfg);
        let q = cfg.distribution.q as usize;
        let half = |counts: &[usize]| {
            let low: usize = counts[..q / 2].iter().sum();
            let high: usize = counts[q / 2..].iter().sum();
            high as f64 / low as f64
        };
        let mut input_counts = vec![0; q];
        let mut output_counts = vec![0; q];
        for s in &repo {
            assert_eq!(s.inputs().len(), cfg.inputs_per_service);
            assert_eq!(s.outputs().len(), cfg.outputs_per_service);
            s.inputs().iter().for_each(|p| input_counts[p.index()] += 1);
            s.outputs().iter().for_each(|p| output_counts[p.index()] += 1);
        }
        let mut request_counts = vec![0; q];
        for r in requests.iter().flatten() {
            assert_eq!(r.len(), cfg.request_size);
            r.iter().for_each(|p| request_counts[p.index()] += 1);
        }
        // With l = 1 the upper half carries 3x the mass of the lower half;
        // distinct-id resampling flattens that somewhat.
        assert_eq!(half(&input_counts) > 2.0, skewed_inputs, "{target:?} inputs");
        assert_eq!(half(&request_counts) > 2.0, skewed_requests, "{target:?} requests");
        assert!(half(&output_counts) < 1.3, "{target:?} outputs");
    }
}

#[test]
fn generation_is_deterministic_and_stream_isolated() {
    let cfg = WorkloadConfig {
        n_services: 300,
        ..WorkloadConfig::desk(SkewTarget::RetrievalRequests, 1.0, 77)
    };
    assert_eq!(workload::generate_requests(&cfg), workload::generate_requests(&cfg));
    assert_eq!(
        workload::generate_dataset_repository(&cfg, 2),
        workload::generate_dataset_repository(&cfg, 2)
    );
    assert_ne!(
        workload::generate_dataset_repository(&cfg, 1),
        workload::generate_dataset_repository(&cfg, 2)
    );
    let reseeded = WorkloadConfig {
        distribution: DistributionSpec::new(300, 1.0, SkewTarget::RetrievalRequests, 78),
        ..cfg
    };
    assert_ne!(
        workload::generate_requests(&cfg),
        workload::generate_requests(&reseeded)
    );
}
