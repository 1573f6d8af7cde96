//! Retrieval, discovery, addition and removal against an [`IndexModel`].

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::IndexError;
use crate::index::{AddStats, IndexMode, IndexModel, InputClassMembers, KeyClassMembers, SearchStats};
use crate::param::ParamSet;
use crate::selection::KeySelector;
use crate::service::{Request, Service, ServiceId};

/// Every service whose inputs are a subset of `provided`, by linear scan.
pub fn brute_force_retrieve<'a>(
    services: impl IntoIterator<Item = &'a Service>,
    provided: &ParamSet,
) -> BTreeSet<ServiceId> {
    services
        .into_iter()
        .filter(|s| s.inputs().is_subset(provided))
        .map(|s| s.id)
        .collect()
}

/// Services invocable with `provided`.
///
/// Only key classes whose key is in `provided` are visited; inside each one,
/// every member's input set is tested against `provided`.
pub fn retrieve(index: &IndexModel, provided: &ParamSet) -> (BTreeSet<ServiceId>, SearchStats) {
    let mut out = BTreeSet::new();
    let mut stats = SearchStats::default();
    for key in provided.iter() {
        stats.key_lookups += 1;
        let Some(kc) = index.find_key_class(key) else {
            continue;
        };
        match &kc.members {
            KeyClassMembers::Services(ids) => {
                for &sid in ids {
                    stats.classes_examined += 1;
                    let s = index.service(sid).expect("indexed service is stored");
                    if s.inputs().is_subset(provided) {
                        out.insert(sid);
                    }
                }
            }
            KeyClassMembers::InputClasses(ids) => {
                for &cid in ids {
                    stats.classes_examined += 1;
                    let class = index.input_class(cid).expect("live input class");
                    if class.inputs.is_subset(provided) {
                        index.for_each_service_in_input_class(cid, |sid| {
                            out.insert(sid);
                        });
                    }
                }
            }
        }
    }
    stats.services_returned = out.len() as u64;
    (out, stats)
}

/// Retrieval filtered by required outputs and attribute constraints.
///
/// In full mode the output test runs once per similar class.
pub fn discover(index: &IndexModel, request: &Request) -> BTreeSet<ServiceId> {
    let attrs_ok = |sid: ServiceId| {
        request.constraints.is_empty() || index.service(sid).is_some_and(|s| s.satisfies(&request.constraints))
    };
    let mut out = BTreeSet::new();
    if index.mode() == IndexMode::Full {
        for key in request.provided.iter() {
            let Some(KeyClassMembers::InputClasses(ids)) = index.find_key_class(key).map(|kc| &kc.members) else {
                continue;
            };
            for &cid in ids {
                let class = index.input_class(cid).expect("live input class");
                if !class.inputs.is_subset(&request.provided) {
                    continue;
                }
                let InputClassMembers::SimilarClasses(scs) = &class.members else {
                    continue;
                };
                for sc in scs.iter().filter_map(|&c| index.similar_class(c)) {
                    if request.required.is_subset(&sc.outputs) {
                        out.extend(sc.members.iter().copied().filter(|&sid| attrs_ok(sid)));
                    }
                }
            }
        }
        return out;
    }
    let (found, _) = retrieve(index, &request.provided);
    found
        .into_iter()
        .filter(|&sid| {
            index
                .service(sid)
                .is_some_and(|s| request.required.is_subset(s.outputs()))
                && attrs_ok(sid)
        })
        .collect()
}

/// Lets the strategy choose a key, then inserts the service under it.
pub fn add_service(
    index: &mut IndexModel,
    service: Service,
    strategy: &mut KeySelector,
) -> Result<AddStats, IndexError> {
    if index.contains_service(service.id) {
        return Err(IndexError::DuplicateService(service.id));
    }
    if service.inputs().is_empty() {
        return Err(crate::error::ServiceError::EmptyInputs(service.id).into());
    }
    let selection = strategy.select(service.inputs(), index)?;
    let mut stats = index.insert_with_key(service, selection.key)?;
    stats.global_scans = selection.global_scans;
    Ok(stats)
}

/// Returns false (leaving the index untouched) for an unknown id.
pub fn remove_service(index: &mut IndexModel, id: ServiceId) -> bool {
    index.remove(id).is_some()
}

/// Builds an index by adding `services` one at a time, in order.
pub fn build_index(
    services: Vec<Service>,
    mode: IndexMode,
    strategy: &mut KeySelector,
) -> Result<IndexModel, IndexError> {
    strategy.validate()?;
    let mut index = IndexModel::new(mode);
    for s in services {
        add_service(&mut index, s, strategy)?;
    }
    Ok(index)
}

/// Like [`build_index`], also returning per-addition counters.
pub fn build_index_with_stats(
    services: Vec<Service>,
    mode: IndexMode,
    strategy: &mut KeySelector,
) -> Result<(IndexModel, Vec<AddStats>), IndexError> {
    strategy.validate()?;
    let mut index = IndexModel::new(mode);
    let mut stats = Vec::with_capacity(services.len());
    for s in services {
        stats.push(add_service(&mut index, s, strategy)?);
    }
    Ok((index, stats))
}
