//! Synthetic repositories and request datasets.
//!
//! Parameter ids are drawn by rejection sampling under the linear density
//! `f(x) = l * (x - q) + q` on `[0, q)`, with the proposal box `[0, q) x [0, q)`.
//! A continuous draw `x` maps to parameter `floor(x)`. For `l <= 0` every
//! proposal is accepted and ids are uniform; for `l > 0` high ids are popular.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::WorkloadError;
use crate::param::{ParamId, ParamSet};
use crate::selection::{ProbabilityTable, TableSource};
use crate::service::{Service, ServiceId};

/// Which side of the workload the skewed density applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SkewTarget {
    #[default]
    None,
    ServiceInputs,
    RetrievalRequests,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    /// Universe size.
    pub q: u32,
    /// Slope of the linear density.
    pub slope: f64,
    pub target: SkewTarget,
    pub seed: u64,
}

impl DistributionSpec {
    pub fn new(q: u32, slope: f64, target: SkewTarget, seed: u64) -> Self {
        DistributionSpec { q, slope, target, seed }
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.q == 0 {
            return Err(WorkloadError::EmptyUniverse);
        }
        if !self.slope.is_finite() {
            return Err(WorkloadError::NonFiniteSlope);
        }
        Ok(())
    }

    /// Slopes above 1 make the density negative near zero, so some ids can
    /// never be drawn.
    pub fn slope_exceeds_unit(&self) -> bool {
        self.slope > 1.0
    }

    pub fn sampler(&self) -> ParameterSampler {
        ParameterSampler {
            q: self.q,
            slope: self.slope,
        }
    }
}

/// Rejection sampler for one linear density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSampler {
    q: u32,
    slope: f64,
}

impl ParameterSampler {
    pub fn new(q: u32, slope: f64) -> Self {
        ParameterSampler { q, slope }
    }

    pub fn uniform(q: u32) -> Self {
        ParameterSampler { q, slope: 0.0 }
    }

    pub fn universe(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        let q = f64::from(self.q);
        self.slope * (x - q) + q
    }

    pub fn sample(&self, rng: &mut impl Rng) -> ParamId {
        let q = f64::from(self.q);
        loop {
            let x = rng.gen::<f64>() * q;
            let y = rng.gen::<f64>() * q;
            if y <= self.density(x) {
                // x < q, but guard against rounding at the top edge
                let id = (x as u32).min(self.q - 1);
                return ParamId(id);
            }
        }
    }

    /// Exact acceptance probability of each id, `P(floor(x) = i | accepted)`.
    pub fn probabilities(&self) -> Vec<f64> {
        let q = f64::from(self.q);
        if self.slope <= 0.0 {
            return alloc::vec![1.0 / q; self.q as usize];
        }
        // f is increasing with f(q) = q, so only the lower clamp at f = 0 matters.
        let zero = q - q / self.slope;
        let area = |a: f64, b: f64| {
            let lo = a.max(zero);
            if lo >= b {
                0.0
            } else {
                (b - lo) * (self.density(lo) + self.density(b)) / 2.0
            }
        };
        let mass: Vec<f64> = (0..self.q).map(|i| area(f64::from(i), f64::from(i) + 1.0)).collect();
        let total: f64 = mass.iter().sum();
        mass.into_iter().map(|m| m / total).collect()
    }

    /// Number of ids with positive probability.
    pub fn support(&self) -> usize {
        self.probabilities().iter().filter(|&&p| p > 0.0).count()
    }

    /// `k` distinct ids; a repeated id is redrawn.
    pub fn sample_distinct(&self, k: usize, rng: &mut impl Rng) -> ParamSet {
        let mut set = ParamSet::new();
        while set.len() < k {
            set.insert(self.sample(rng));
        }
        set
    }
}

/// One draw under `spec`'s density, irrespective of its target.
pub fn sample_parameter(spec: &DistributionSpec, rng: &mut impl Rng) -> ParamId {
    spec.sampler().sample(rng)
}

/// Exact per-id probabilities of [`sample_parameter`].
pub fn theoretical_probabilities(spec: &DistributionSpec) -> ProbabilityTable {
    ProbabilityTable::from_dense(spec.sampler().probabilities(), TableSource::Theoretical)
        .expect("normalized by construction")
}

/// Sizes and distribution of a synthetic experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkloadConfig {
    pub n_services: usize,
    pub inputs_per_service: usize,
    pub outputs_per_service: usize,
    pub request_size: usize,
    pub requests_per_dataset: usize,
    pub n_datasets: usize,
    pub distribution: DistributionSpec,
}

impl WorkloadConfig {
    /// 50,000 services over 1,000 parameters, 10 inputs and 10 outputs each,
    /// 20 datasets of 1,000 requests with 32 parameters.
    pub fn paper(target: SkewTarget, slope: f64, seed: u64) -> Self {
        WorkloadConfig {
            n_services: 50_000,
            inputs_per_service: 10,
            outputs_per_service: 10,
            request_size: 32,
            requests_per_dataset: 1000,
            n_datasets: 20,
            distribution: DistributionSpec::new(1000, slope, target, seed),
        }
    }

    /// 5,000 services over 300 parameters, 6 inputs and 6 outputs each,
    /// 5 datasets of 200 requests with 20 parameters.
    pub fn desk(target: SkewTarget, slope: f64, seed: u64) -> Self {
        WorkloadConfig {
            n_services: 5000,
            inputs_per_service: 6,
            outputs_per_service: 6,
            request_size: 20,
            requests_per_dataset: 200,
            n_datasets: 5,
            distribution: DistributionSpec::new(300, slope, target, seed),
        }
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        self.distribution.validate()?;
        let q = self.distribution.q as usize;
        let input_support = self.input_sampler().support();
        let request_support = self.request_sampler().support();
        if self.inputs_per_service == 0 {
            return Err(WorkloadError::SetTooLarge {
                what: "inputs per service must be positive; got",
                size: 0,
                support: q,
            });
        }
        for (what, size, support) in [
            ("inputs per service", self.inputs_per_service, input_support),
            ("outputs per service", self.outputs_per_service, q),
            ("request size", self.request_size, request_support),
        ] {
            if size > support {
                return Err(WorkloadError::SetTooLarge { what, size, support });
            }
        }
        Ok(())
    }

    pub fn input_sampler(&self) -> ParameterSampler {
        match self.distribution.target {
            SkewTarget::ServiceInputs => self.distribution.sampler(),
            _ => ParameterSampler::uniform(self.distribution.q),
        }
    }

    pub fn request_sampler(&self) -> ParameterSampler {
        match self.distribution.target {
            SkewTarget::RetrievalRequests => self.distribution.sampler(),
            _ => ParameterSampler::uniform(self.distribution.q),
        }
    }

    /// Theoretical appearing probabilities of parameters in service inputs.
    pub fn input_probabilities(&self) -> ProbabilityTable {
        ProbabilityTable::from_dense(self.input_sampler().probabilities(), TableSource::Theoretical)
            .expect("normalized by construction")
    }

    /// Theoretical appearing probabilities of parameters in requests.
    pub fn request_probabilities(&self) -> ProbabilityTable {
        ProbabilityTable::from_dense(self.request_sampler().probabilities(), TableSource::Theoretical)
            .expect("normalized by construction")
    }
}

/// Independent random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Repository = 1,
    Requests = 2,
    Strategy = 3,
}

pub fn stream(seed: u64, purpose: StreamPurpose, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | u64::from(index));
    rng
}

/// Services `0..n_services`; outputs are always uniform.
pub fn generate_repository(cfg: &WorkloadConfig, rng: &mut impl Rng) -> Vec<Service> {
    let inputs = cfg.input_sampler();
    let outputs = ParameterSampler::uniform(cfg.distribution.q);
    (0..cfg.n_services)
        .map(|i| {
            let ins = inputs.sample_distinct(cfg.inputs_per_service, rng);
            let outs = outputs.sample_distinct(cfg.outputs_per_service, rng);
            Service::from_sets(ServiceId(i as u64), ins, outs).expect("inputs_per_service > 0")
        })
        .collect()
}

/// One dataset of requests.
pub fn generate_request_set(cfg: &WorkloadConfig, rng: &mut impl Rng) -> Vec<ParamSet> {
    let sampler = cfg.request_sampler();
    (0..cfg.requests_per_dataset)
        .map(|_| sampler.sample_distinct(cfg.request_size, rng))
        .collect()
}

/// All request datasets, each from its own stream.
pub fn generate_requests(cfg: &WorkloadConfig) -> Vec<Vec<ParamSet>> {
    (0..cfg.n_datasets)
        .map(|d| {
            let mut rng = stream(cfg.distribution.seed, StreamPurpose::Requests, d as u32);
            generate_request_set(cfg, &mut rng)
        })
        .collect()
}

/// The repository paired with dataset `d`.
pub fn generate_dataset_repository(cfg: &WorkloadConfig, d: usize) -> Vec<Service> {
    let mut rng = stream(cfg.distribution.seed, StreamPurpose::Repository, d as u32);
    generate_repository(cfg, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(q: u32, slope: f64) -> DistributionSpec {
        DistributionSpec::new(q, slope, SkewTarget::RetrievalRequests, 1)
    }

    #[test]
    fn uniform_when_slope_not_positive() {
        for slope in [0.0, -1.0, -5.0] {
            let t = theoretical_probabilities(&spec(5, slope));
            assert!(t.as_slice().iter().all(|&p| (p - 0.2).abs() < 1e-15));
        }
    }

    #[test]
    fn unit_slope_two_parameters() {
        // f(x) = x on [0, 2): areas 1/2 and 3/2
        let t = theoretical_probabilities(&spec(2, 1.0));
        assert!((t.as_slice()[0] - 0.25).abs() < 1e-12);
        assert!((t.as_slice()[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn steep_slope_has_restricted_support() {
        // l = 2, q = 4: f(x) = 2x - 4 is positive only above x = 2
        let s = ParameterSampler::new(4, 2.0);
        let p = s.probabilities();
        assert_eq!(&p[..2], &[0.0, 0.0]);
        assert!((p[2] - 0.25).abs() < 1e-12 && (p[3] - 0.75).abs() < 1e-12);
        assert_eq!(s.support(), 2);
        let mut cfg = WorkloadConfig::desk(SkewTarget::RetrievalRequests, 2.0, 0);
        cfg.distribution.q = 4;
        cfg.inputs_per_service = 1;
        cfg.outputs_per_service = 1;
        cfg.request_size = 3;
        assert!(matches!(cfg.validate(), Err(WorkloadError::SetTooLarge { .. })));
    }

    #[test]
    fn empty_and_saturated() {
        let mut cfg = WorkloadConfig::desk(SkewTarget::None, 0.0, 3);
        cfg.n_services = 0;
        assert!(generate_repository(&cfg, &mut stream(3, StreamPurpose::Repository, 0)).is_empty());

        let mut cfg = WorkloadConfig::desk(SkewTarget::RetrievalRequests, 1.0, 3);
        cfg.distribution.q = 12;
        cfg.request_size = 12;
        cfg.requests_per_dataset = 4;
        cfg.inputs_per_service = 2;
        cfg.outputs_per_service = 2;
        for r in &generate_requests(&cfg)[0] {
            assert_eq!(*r, ParamSet::from_ids(0u32..12));
        }
    }

    #[test]
    fn determinism() {
        let cfg = WorkloadConfig {
            n_services: 200,
            ..WorkloadConfig::desk(SkewTarget::ServiceInputs, 1.0, 99)
        };
        assert_eq!(
            generate_dataset_repository(&cfg, 1),
            generate_dataset_repository(&cfg, 1)
        );
        assert_ne!(
            generate_dataset_repository(&cfg, 1),
            generate_dataset_repository(&cfg, 2)
        );
        assert_eq!(generate_requests(&cfg), generate_requests(&cfg));
    }
}
