//! In-memory multilevel service index.
//!
//! Services are grouped into similar classes (identical inputs and outputs),
//! input-similar classes (identical inputs) and key classes (one shared key
//! parameter). Retrieval only visits the key classes whose key is among the
//! provided parameters, so the choice of key per service decides how many
//! classes a request has to test.
//!
//! - [`index`]: the index structure, its three deployment modes and integrity checks
//! - [`selection`]: the six key-selection strategies and the expected-cost model
//! - [`repository`]: retrieval, discovery, addition, removal and the brute-force oracle
//! - [`workload`]: synthetic repositories and skewed request datasets
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod index;
pub mod param;
pub mod repository;
pub mod selection;
pub mod service;
pub mod workload;

pub use crate::error::{CostError, IndexError, SelectionError, ServiceError, TableError, WorkloadError};
pub use crate::index::{AddStats, ClassId, IndexMode, IndexModel, KeyClass, SearchStats, Violation};
pub use crate::param::{ParamId, ParamSet};
pub use crate::repository::{
    add_service, brute_force_retrieve, build_index, build_index_with_stats, discover, remove_service, retrieve,
};
pub use crate::selection::{
    expected_search_cost, KeySelector, ProbabilitySource, ProbabilityTable, Selection, StrategyKind, TableSource,
};
pub use crate::service::{Request, Service, ServiceId};
pub use crate::workload::{DistributionSpec, SkewTarget, WorkloadConfig};
