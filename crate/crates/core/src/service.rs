use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt;

use crate::error::ServiceError;
use crate::param::{ParamId, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ServiceId(pub u64);

impl fmt::Display for ServiceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// A service: input parameters, output parameters and free-form attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Service {
    pub id: ServiceId,
    inputs: ParamSet,
    outputs: ParamSet,
    pub attributes: BTreeMap<String, String>,
}

impl Service {
    /// Rejects empty inputs and repeated ids within either parameter list.
    pub fn new<I, O>(id: u64, inputs: I, outputs: O) -> Result<Self, ServiceError>
    where
        I: IntoIterator<Item = u32>,
        O: IntoIterator<Item = u32>,
    {
        let id = ServiceId(id);
        let inputs =
            ParamSet::try_from_ids(inputs).map_err(|param| ServiceError::DuplicateParameter { service: id, param })?;
        let outputs =
            ParamSet::try_from_ids(outputs).map_err(|param| ServiceError::DuplicateParameter { service: id, param })?;
        Self::from_sets(id, inputs, outputs)
    }

    pub fn from_sets(id: ServiceId, inputs: ParamSet, outputs: ParamSet) -> Result<Self, ServiceError> {
        if inputs.is_empty() {
            return Err(ServiceError::EmptyInputs(id));
        }
        Ok(Service {
            id,
            inputs,
            outputs,
            attributes: BTreeMap::new(),
        })
    }

    pub fn with_attribute(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(name.into(), value.into());
        self
    }

    #[inline]
    pub fn inputs(&self) -> &ParamSet {
        &self.inputs
    }

    #[inline]
    pub fn outputs(&self) -> &ParamSet {
        &self.outputs
    }

    /// True when every constrained attribute is present with an admissible value.
    pub fn satisfies(&self, constraints: &BTreeMap<String, BTreeSet<String>>) -> bool {
        constraints
            .iter()
            .all(|(name, admissible)| self.attributes.get(name).is_some_and(|v| admissible.contains(v)))
    }

    pub fn has_input(&self, p: ParamId) -> bool {
        self.inputs.contains(p)
    }
}

/// A user request: provided parameters, required outputs and attribute constraints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Request {
    pub provided: ParamSet,
    pub required: ParamSet,
    pub constraints: BTreeMap<String, BTreeSet<String>>,
}

impl Request {
    pub fn retrieval(provided: ParamSet) -> Self {
        Request {
            provided,
            ..Default::default()
        }
    }

    pub fn requiring(mut self, required: ParamSet) -> Self {
        self.required = required;
        self
    }

    pub fn constrain(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.constraints.entry(name.into()).or_default().insert(value.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_services() {
        assert_eq!(Service::new(1, [], [2]), Err(ServiceError::EmptyInputs(ServiceId(1))));
        assert_eq!(
            Service::new(2, [1, 1], [2]),
            Err(ServiceError::DuplicateParameter {
                service: ServiceId(2),
                param: ParamId(1)
            })
        );
        assert!(Service::new(3, [4], [5, 5]).is_err());
    }

    #[test]
    fn attribute_constraints() {
        let s = Service::new(0, [1], [2]).unwrap().with_attribute("region", "eu");
        let ok = Request::default().constrain("region", "eu").constrain("region", "us");
        let bad = Request::default().constrain("tier", "gold");
        assert!(s.satisfies(&ok.constraints));
        assert!(!s.satisfies(&bad.constraints));
        assert!(s.satisfies(&BTreeMap::new()));
    }
}
