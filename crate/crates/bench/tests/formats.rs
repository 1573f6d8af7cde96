use mlindex_bench::formats::{
    parse_probability_table, parse_repository, parse_requests, write_probability_table, write_repository,
    write_requests,
};
use mlindex_core::{ParamSet, ProbabilityTable, Request, Service, TableSource};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

fn service() -> impl Strategy<Value = (Vec<u32>, Vec<u32>, Vec<(String, String)>)> {
    (
        btree_set(0u32..500, 1..8).prop_map(|s| s.into_iter().collect()),
        btree_set(0u32..500, 0..8).prop_map(|s| s.into_iter().collect()),
        vec(("[a-z]{1,6}", "[a-z0-9]{1,6}"), 0..3),
    )
}

proptest! {
    #[test]
    fn repositories_round_trip(specs in vec(service(), 0..20)) {
        let services: Vec<Service> = specs
            .into_iter()
            .enumerate()
            .map(|(i, (ins, outs, attrs))| {
                attrs.into_iter().fold(Service::new(i as u64, ins, outs).unwrap(), |s, (k, v)| s.with_attribute(k, v))
            })
            .collect();
        prop_assert_eq!(parse_repository(&write_repository(&services)).unwrap(), services);
    }

    #[test]
    fn requests_round_trip(
        provided in btree_set(0u32..300, 0..20),
        required in btree_set(0u32..300, 0..4),
        constraints in vec(("[a-z]{1,5}", "[a-z0-9]{1,5}"), 0..4),
    ) {
        let mut r = Request::retrieval(ParamSet::from_ids(provided)).requiring(ParamSet::from_ids(required));
        for (k, v) in constraints {
            r = r.constrain(k, v);
        }
        let back = parse_requests(&write_requests(std::slice::from_ref(&r))).unwrap();
        prop_assert_eq!(back, vec![r]);
    }

    #[test]
    fn probability_tables_round_trip_exactly(weights in vec(0.0f64..10.0, 1..60)) {
        let total: f64 = weights.iter().sum::<f64>() + 1.0;
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let table = ProbabilityTable::from_dense(probs, TableSource::Empirical).unwrap();
        let back = parse_probability_table(&write_probability_table(&table), Some(table.universe()), TableSource::Empirical)
            .unwrap();
        prop_assert_eq!(back.as_slice(), table.as_slice());
    }
}
