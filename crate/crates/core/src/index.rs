//! The multilevel index: key classes, input-similar classes and similar classes
//! under one of three deployment modes.
//!
//! Level layout per mode:
//!
//! | mode    | key class holds         | input-similar class holds | similar class holds |
//! |---------|-------------------------|---------------------------|---------------------|
//! | Primary | services                | (absent)                  | (absent)            |
//! | Partial | input-similar classes   | services                  | (absent)            |
//! | Full    | input-similar classes   | similar classes           | services            |
//!
//! Input sets are canonical [`ParamSet`]s, so class membership tests are plain
//! equality checks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::IndexError;
use crate::param::{ParamId, ParamSet};
use crate::service::{Service, ServiceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexMode {
    /// Key classes hold services directly.
    Primary,
    /// Key classes hold input-similar classes, which hold services.
    Partial,
    /// Key classes hold input-similar classes, which hold similar classes.
    Full,
}

impl IndexMode {
    pub const ALL: [IndexMode; 3] = [IndexMode::Primary, IndexMode::Partial, IndexMode::Full];

    pub fn name(self) -> &'static str {
        match self {
            IndexMode::Primary => "primary",
            IndexMode::Partial => "partial",
            IndexMode::Full => "full",
        }
    }

    pub fn has_input_classes(self) -> bool {
        !matches!(self, IndexMode::Primary)
    }
}

impl fmt::Display for IndexMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for IndexMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "primary" => Ok(IndexMode::Primary),
            "partial" => Ok(IndexMode::Partial),
            "full" => Ok(IndexMode::Full),
            other => Err(format!("unknown index mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u32);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Services with identical inputs and identical outputs (full mode only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarClass {
    pub id: ClassId,
    pub outputs: ParamSet,
    pub members: Vec<ServiceId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputClassMembers {
    /// Partial mode.
    Services(Vec<ServiceId>),
    /// Full mode.
    SimilarClasses(Vec<ClassId>),
}

impl InputClassMembers {
    pub fn len(&self) -> usize {
        match self {
            InputClassMembers::Services(v) => v.len(),
            InputClassMembers::SimilarClasses(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Classes sharing one exact input set and one key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSimilarClass {
    pub id: ClassId,
    pub inputs: ParamSet,
    pub key: ParamId,
    pub members: InputClassMembers,
    rr2_pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyClassMembers {
    /// Primary mode.
    Services(Vec<ServiceId>),
    /// Partial and full modes.
    InputClasses(Vec<ClassId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyClass {
    pub key: ParamId,
    pub members: KeyClassMembers,
}

impl KeyClass {
    /// Number of direct members: services in primary mode, input-similar classes otherwise.
    pub fn size(&self) -> usize {
        match &self.members {
            KeyClassMembers::Services(v) => v.len(),
            KeyClassMembers::InputClasses(v) => v.len(),
        }
    }
}

/// Counters collected while adding one service.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AddStats {
    /// Input-similar classes examined outside the chosen key class.
    pub global_scans: u64,
    /// Input-similar classes examined inside the chosen key class.
    pub local_scans: u64,
    pub created: CreatedClasses,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CreatedClasses {
    pub key_classes: u32,
    pub input_classes: u32,
    pub similar_classes: u32,
}

/// Counters collected during one retrieval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub key_lookups: u64,
    /// Inputs-subset tests performed: against input-similar classes, or
    /// against services in primary mode.
    pub classes_examined: u64,
    pub services_returned: u64,
}

/// Outcome of a linear pass over every input-similar class looking for an
/// exact input-set match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputScan {
    pub found: Option<(ClassId, ParamId)>,
    pub examined: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Location {
    key: ParamId,
    input_class: Option<ClassId>,
    similar_class: Option<ClassId>,
}

#[derive(Debug, Clone)]
struct Slab<T> {
    entries: Vec<Option<T>>,
    free: Vec<u32>,
}

impl<T> Default for Slab<T> {
    fn default() -> Self {
        Slab {
            entries: Vec::new(),
            free: Vec::new(),
        }
    }
}

impl<T> Slab<T> {
    fn vacant(&mut self) -> ClassId {
        match self.free.pop() {
            Some(i) => ClassId(i),
            None => {
                self.entries.push(None);
                ClassId((self.entries.len() - 1) as u32)
            }
        }
    }

    fn fill(&mut self, id: ClassId, value: T) {
        debug_assert!(self.entries[id.0 as usize].is_none());
        self.entries[id.0 as usize] = Some(value);
    }

    fn remove(&mut self, id: ClassId) -> Option<T> {
        let v = self.entries.get_mut(id.0 as usize)?.take();
        if v.is_some() {
            self.free.push(id.0);
        }
        v
    }

    fn get(&self, id: ClassId) -> Option<&T> {
        self.entries.get(id.0 as usize)?.as_ref()
    }

    fn get_mut(&mut self, id: ClassId) -> Option<&mut T> {
        self.entries.get_mut(id.0 as usize)?.as_mut()
    }

    fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().filter_map(Option::as_ref)
    }
}

/// A deployed multilevel index together with its service store.
#[derive(Debug, Clone)]
pub struct IndexModel {
    mode: IndexMode,
    key_map: BTreeMap<ParamId, KeyClass>,
    input_classes: Slab<InputSimilarClass>,
    similar_classes: Slab<SimilarClass>,
    /// Enumeration order of all input-similar classes, with input fingerprints.
    rr2: Vec<(u64, ClassId)>,
    m: usize,
    services: BTreeMap<ServiceId, Service>,
    locations: BTreeMap<ServiceId, Location>,
}

impl IndexModel {
    pub fn new(mode: IndexMode) -> Self {
        IndexModel {
            mode,
            key_map: BTreeMap::new(),
            input_classes: Slab::default(),
            similar_classes: Slab::default(),
            rr2: Vec::new(),
            m: 0,
            services: BTreeMap::new(),
            locations: BTreeMap::new(),
        }
    }

    pub fn mode(&self) -> IndexMode {
        self.mode
    }

    /// Number of stored services.
    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    /// Number of input-similar classes (always zero in primary mode).
    pub fn input_class_count(&self) -> usize {
        self.m
    }

    pub fn key_class_count(&self) -> usize {
        self.key_map.len()
    }

    pub fn keys(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.key_map.keys().copied()
    }

    pub fn key_classes(&self) -> impl Iterator<Item = &KeyClass> {
        self.key_map.values()
    }

    pub fn find_key_class(&self, key: ParamId) -> Option<&KeyClass> {
        self.key_map.get(&key)
    }

    pub fn key_class_size(&self, key: ParamId) -> usize {
        self.key_map.get(&key).map_or(0, KeyClass::size)
    }

    pub fn input_class(&self, id: ClassId) -> Option<&InputSimilarClass> {
        self.input_classes.get(id)
    }

    pub fn similar_class(&self, id: ClassId) -> Option<&SimilarClass> {
        self.similar_classes.get(id)
    }

    /// All input-similar classes in enumeration order.
    pub fn input_classes(&self) -> impl Iterator<Item = &InputSimilarClass> {
        self.rr2.iter().filter_map(|&(_, id)| self.input_classes.get(id))
    }

    pub fn similar_classes(&self) -> impl Iterator<Item = &SimilarClass> {
        self.similar_classes.iter()
    }

    pub fn service(&self, id: ServiceId) -> Option<&Service> {
        self.services.get(&id)
    }

    pub fn services(&self) -> impl Iterator<Item = &Service> {
        self.services.values()
    }

    pub fn contains_service(&self, id: ServiceId) -> bool {
        self.services.contains_key(&id)
    }

    /// Key under which a stored service is indexed.
    pub fn key_of(&self, id: ServiceId) -> Option<ParamId> {
        self.locations.get(&id).map(|l| l.key)
    }

    /// Input-similar class holding a stored service (partial and full modes).
    pub fn input_class_of(&self, id: ServiceId) -> Option<ClassId> {
        self.locations.get(&id).and_then(|l| l.input_class)
    }

    /// Linear pass over every input-similar class for one with exactly `inputs`.
    /// Stops at the first match.
    pub fn scan_for_inputs(&self, inputs: &ParamSet) -> InputScan {
        let fp = inputs.fingerprint();
        let mut examined = 0;
        for &(h, id) in &self.rr2 {
            examined += 1;
            if h != fp {
                continue;
            }
            let class = &self.input_classes.get(id).expect("rr2 entry is live");
            if class.inputs == *inputs {
                return InputScan {
                    found: Some((id, class.key)),
                    examined,
                };
            }
        }
        InputScan { found: None, examined }
    }

    /// Looks for the member of key class `key` whose input set equals `inputs`.
    pub fn find_input_similar_in_key_class(
        &self,
        key: ParamId,
        inputs: &ParamSet,
    ) -> Result<Option<&InputSimilarClass>, IndexError> {
        if !self.mode.has_input_classes() {
            return Err(IndexError::PrimaryMode);
        }
        Ok(self
            .local_lookup(key, inputs)
            .0
            .and_then(|id| self.input_classes.get(id)))
    }

    fn local_lookup(&self, key: ParamId, inputs: &ParamSet) -> (Option<ClassId>, u64) {
        let Some(KeyClass {
            members: KeyClassMembers::InputClasses(ids),
            ..
        }) = self.key_map.get(&key)
        else {
            return (None, 0);
        };
        let mut examined = 0;
        for &id in ids {
            examined += 1;
            if self.input_classes.get(id).is_some_and(|c| c.inputs == *inputs) {
                return (Some(id), examined);
            }
        }
        (None, examined)
    }

    /// Calls `f` for each service reachable from one input-similar class.
    pub fn for_each_service_in_input_class(&self, id: ClassId, mut f: impl FnMut(ServiceId)) {
        let Some(class) = self.input_classes.get(id) else {
            return;
        };
        match &class.members {
            InputClassMembers::Services(v) => v.iter().copied().for_each(f),
            InputClassMembers::SimilarClasses(v) => {
                for sc in v.iter().filter_map(|&c| self.similar_classes.get(c)) {
                    sc.members.iter().copied().for_each(&mut f);
                }
            }
        }
    }

    /// All services reachable from the key class of `key`.
    pub fn leaf_services(&self, key: ParamId) -> Vec<ServiceId> {
        let mut out = Vec::new();
        match self.key_map.get(&key).map(|kc| &kc.members) {
            Some(KeyClassMembers::Services(v)) => out.extend_from_slice(v),
            Some(KeyClassMembers::InputClasses(v)) => {
                for &id in v {
                    self.for_each_service_in_input_class(id, |s| out.push(s));
                }
            }
            None => {}
        }
        out
    }

    /// Inserts `service` under `key` without consulting any selection strategy.
    pub fn insert_with_key(&mut self, service: Service, key: ParamId) -> Result<AddStats, IndexError> {
        if self.services.contains_key(&service.id) {
            return Err(IndexError::DuplicateService(service.id));
        }
        if service.inputs().is_empty() {
            return Err(crate::error::ServiceError::EmptyInputs(service.id).into());
        }
        if !service.has_input(key) {
            return Err(IndexError::KeyNotInInputs {
                service: service.id,
                key,
            });
        }

        let mut stats = AddStats::default();
        let sid = service.id;
        let mode = self.mode;

        let kc = self.key_map.entry(key).or_insert_with(|| {
            stats.created.key_classes += 1;
            KeyClass {
                key,
                members: match mode {
                    IndexMode::Primary => KeyClassMembers::Services(Vec::new()),
                    _ => KeyClassMembers::InputClasses(Vec::new()),
                },
            }
        });

        let location = match &mut kc.members {
            KeyClassMembers::Services(v) => {
                v.push(sid);
                Location {
                    key,
                    input_class: None,
                    similar_class: None,
                }
            }
            KeyClassMembers::InputClasses(_) => {
                let (found, examined) = self.local_lookup(key, service.inputs());
                stats.local_scans = examined;
                let is_id = match found {
                    Some(id) => id,
                    None => {
                        stats.created.input_classes += 1;
                        self.create_input_class(key, service.inputs().clone())
                    }
                };
                let similar_class = self.attach_to_input_class(is_id, &service, &mut stats);
                Location {
                    key,
                    input_class: Some(is_id),
                    similar_class,
                }
            }
        };

        self.locations.insert(sid, location);
        self.services.insert(sid, service);
        Ok(stats)
    }

    fn create_input_class(&mut self, key: ParamId, inputs: ParamSet) -> ClassId {
        let id = self.input_classes.vacant();
        let members = match self.mode {
            IndexMode::Full => InputClassMembers::SimilarClasses(Vec::new()),
            _ => InputClassMembers::Services(Vec::new()),
        };
        self.rr2.push((inputs.fingerprint(), id));
        self.input_classes.fill(
            id,
            InputSimilarClass {
                id,
                inputs,
                key,
                members,
                rr2_pos: self.rr2.len() - 1,
            },
        );
        self.m += 1;
        if let Some(KeyClass {
            members: KeyClassMembers::InputClasses(v),
            ..
        }) = self.key_map.get_mut(&key)
        {
            v.push(id);
        }
        id
    }

    fn attach_to_input_class(&mut self, is_id: ClassId, service: &Service, stats: &mut AddStats) -> Option<ClassId> {
        let class = self.input_classes.get_mut(is_id).expect("live input class");
        match &mut class.members {
            InputClassMembers::Services(v) => {
                v.push(service.id);
                None
            }
            InputClassMembers::SimilarClasses(v) => {
                let existing = v.iter().copied().find(|&c| {
                    self.similar_classes
                        .get(c)
                        .is_some_and(|sc| sc.outputs == *service.outputs())
                });
                let sc_id = match existing {
                    Some(c) => c,
                    None => {
                        stats.created.similar_classes += 1;
                        let c = self.similar_classes.vacant();
                        self.similar_classes.fill(
                            c,
                            SimilarClass {
                                id: c,
                                outputs: service.outputs().clone(),
                                members: Vec::new(),
                            },
                        );
                        v.push(c);
                        c
                    }
                };
                self.similar_classes
                    .get_mut(sc_id)
                    .expect("live similar class")
                    .members
                    .push(service.id);
                Some(sc_id)
            }
        }
    }

    /// Removes a service, deleting every class it leaves empty.
    pub fn remove(&mut self, id: ServiceId) -> Option<Service> {
        let loc = self.locations.remove(&id)?;
        let service = self.services.remove(&id).expect("located service is stored");

        let mut drop_input_class = false;
        if let Some(sc_id) = loc.similar_class {
            let sc = self.similar_classes.get_mut(sc_id).expect("live similar class");
            remove_item(&mut sc.members, &id);
            if sc.members.is_empty() {
                self.similar_classes.remove(sc_id);
                let is = self
                    .input_classes
                    .get_mut(loc.input_class.expect("full mode location"))
                    .expect("live input class");
                if let InputClassMembers::SimilarClasses(v) = &mut is.members {
                    remove_item(v, &sc_id);
                }
                drop_input_class = is.members.is_empty();
            }
        } else if let Some(is_id) = loc.input_class {
            let is = self.input_classes.get_mut(is_id).expect("live input class");
            if let InputClassMembers::Services(v) = &mut is.members {
                remove_item(v, &id);
            }
            drop_input_class = is.members.is_empty();
        }

        let kc = self.key_map.get_mut(&loc.key).expect("key class of located service");
        match &mut kc.members {
            KeyClassMembers::Services(v) => remove_item(v, &id),
            KeyClassMembers::InputClasses(v) => {
                if drop_input_class {
                    let is_id = loc.input_class.expect("partial/full location");
                    remove_item(v, &is_id);
                    let gone = self.input_classes.remove(is_id).expect("live input class");
                    self.rr2.swap_remove(gone.rr2_pos);
                    if let Some(&(_, moved)) = self.rr2.get(gone.rr2_pos) {
                        self.input_classes.get_mut(moved).expect("rr2 entry is live").rr2_pos = gone.rr2_pos;
                    }
                    self.m -= 1;
                }
            }
        }
        if kc.size() == 0 {
            self.key_map.remove(&loc.key);
        }
        Some(service)
    }

    /// Duplicate input sets indexed under different keys. These are redundant
    /// but do not break retrieval.
    pub fn redundancy_warnings(&self) -> Vec<String> {
        let mut by_inputs: BTreeMap<&ParamSet, Vec<ParamId>> = BTreeMap::new();
        for c in self.input_classes.iter() {
            by_inputs.entry(&c.inputs).or_default().push(c.key);
        }
        by_inputs
            .into_iter()
            .filter(|(_, keys)| keys.len() > 1)
            .map(|(inputs, keys)| format!("inputs {inputs} indexed under {} keys {keys:?}", keys.len()))
            .collect()
    }

    /// Recomputes every structural invariant from scratch. Empty means healthy.
    pub fn integrity_check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut reach: BTreeMap<ServiceId, u32> = BTreeMap::new();
        let mut is_refs: BTreeMap<ClassId, u32> = BTreeMap::new();
        let mut sc_refs: BTreeMap<ClassId, u32> = BTreeMap::new();

        for (&map_key, kc) in &self.key_map {
            if kc.key != map_key {
                out.push(Violation::KeyMismatch {
                    map_key,
                    class_key: kc.key,
                });
            }
            if kc.size() == 0 {
                out.push(Violation::EmptyKeyClass(map_key));
            }
            match (&kc.members, self.mode) {
                (KeyClassMembers::Services(v), IndexMode::Primary) => {
                    for &sid in v {
                        self.check_leaf(sid, map_key, None, &mut reach, &mut out);
                    }
                }
                (KeyClassMembers::InputClasses(v), IndexMode::Partial | IndexMode::Full) => {
                    let mut seen_inputs: Vec<&ParamSet> = Vec::new();
                    for &is_id in v {
                        *is_refs.entry(is_id).or_default() += 1;
                        let Some(is) = self.input_classes.get(is_id) else {
                            out.push(Violation::DanglingClass(is_id));
                            continue;
                        };
                        if is.key != map_key {
                            out.push(Violation::InputClassKeyMismatch {
                                class: is_id,
                                class_key: is.key,
                                key: map_key,
                            });
                        }
                        if !is.inputs.contains(is.key) {
                            out.push(Violation::KeyNotInClassInputs {
                                class: is_id,
                                key: is.key,
                            });
                        }
                        if seen_inputs.contains(&&is.inputs) {
                            out.push(Violation::DuplicateInputsInKeyClass {
                                key: map_key,
                                class: is_id,
                            });
                        }
                        seen_inputs.push(&is.inputs);
                        if is.members.is_empty() {
                            out.push(Violation::EmptyInputClass(is_id));
                        }
                        match (&is.members, self.mode) {
                            (InputClassMembers::Services(sv), IndexMode::Partial) => {
                                for &sid in sv {
                                    self.check_leaf(sid, map_key, Some(is), &mut reach, &mut out);
                                }
                            }
                            (InputClassMembers::SimilarClasses(cv), IndexMode::Full) => {
                                let mut seen_outputs: Vec<&ParamSet> = Vec::new();
                                for &sc_id in cv {
                                    *sc_refs.entry(sc_id).or_default() += 1;
                                    let Some(sc) = self.similar_classes.get(sc_id) else {
                                        out.push(Violation::DanglingClass(sc_id));
                                        continue;
                                    };
                                    if sc.members.is_empty() {
                                        out.push(Violation::EmptySimilarClass(sc_id));
                                    }
                                    if seen_outputs.contains(&&sc.outputs) {
                                        out.push(Violation::DuplicateOutputsInInputClass {
                                            class: is_id,
                                            similar_class: sc_id,
                                        });
                                    }
                                    seen_outputs.push(&sc.outputs);
                                    for &sid in &sc.members {
                                        if let Some(s) = self.services.get(&sid) {
                                            if *s.outputs() != sc.outputs {
                                                out.push(Violation::OutputsMismatch {
                                                    service: sid,
                                                    class: sc_id,
                                                });
                                            }
                                        }
                                        self.check_leaf(sid, map_key, Some(is), &mut reach, &mut out);
                                    }
                                }
                            }
                            _ => out.push(Violation::WrongShape(format!("input class {is_id}"))),
                        }
                    }
                }
                _ => out.push(Violation::WrongShape(format!("key class {map_key}"))),
            }
        }

        for sid in self.services.keys() {
            let count = reach.get(sid).copied().unwrap_or(0);
            if count != 1 {
                out.push(Violation::Reachability { service: *sid, count });
            }
        }
        for c in self.input_classes.iter() {
            let refs = is_refs.get(&c.id).copied().unwrap_or(0);
            if refs != 1 {
                out.push(Violation::ClassReferences { class: c.id, refs });
            }
        }
        for c in self.similar_classes.iter() {
            let refs = sc_refs.get(&c.id).copied().unwrap_or(0);
            if refs != 1 {
                out.push(Violation::ClassReferences { class: c.id, refs });
            }
        }

        let enumerated = self.input_classes.iter().count();
        if enumerated != self.m || self.rr2.len() != self.m {
            out.push(Violation::InputClassCount {
                maintained: self.m,
                enumerated,
            });
        }
        for (pos, &(fp, id)) in self.rr2.iter().enumerate() {
            match self.input_classes.get(id) {
                Some(c) if c.rr2_pos == pos && c.inputs.fingerprint() == fp => {}
                _ => out.push(Violation::Enumeration(id)),
            }
        }
        if self.locations.len() != self.services.len() {
            out.push(Violation::WrongShape(String::from("location table size")));
        }
        out
    }

    fn check_leaf(
        &self,
        sid: ServiceId,
        key: ParamId,
        input_class: Option<&InputSimilarClass>,
        reach: &mut BTreeMap<ServiceId, u32>,
        out: &mut Vec<Violation>,
    ) {
        *reach.entry(sid).or_default() += 1;
        let Some(s) = self.services.get(&sid) else {
            out.push(Violation::UnknownService(sid));
            return;
        };
        if !s.has_input(key) {
            out.push(Violation::KeyNotInInputs { service: sid, key });
        }
        if let Some(is) = input_class {
            if *s.inputs() != is.inputs {
                out.push(Violation::InputsMismatch {
                    service: sid,
                    class: is.id,
                });
            }
        }
        match self.locations.get(&sid) {
            Some(l) if l.key == key && l.input_class == input_class.map(|c| c.id) => {}
            _ => out.push(Violation::Location(sid)),
        }
    }
}

fn remove_item<T: PartialEq>(v: &mut Vec<T>, item: &T) {
    if let Some(pos) = v.iter().position(|x| x == item) {
        v.swap_remove(pos);
    }
}

/// A broken structural invariant found by [`IndexModel::integrity_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    KeyMismatch {
        map_key: ParamId,
        class_key: ParamId,
    },
    EmptyKeyClass(ParamId),
    EmptyInputClass(ClassId),
    EmptySimilarClass(ClassId),
    DanglingClass(ClassId),
    InputClassKeyMismatch {
        class: ClassId,
        class_key: ParamId,
        key: ParamId,
    },
    KeyNotInClassInputs {
        class: ClassId,
        key: ParamId,
    },
    DuplicateInputsInKeyClass {
        key: ParamId,
        class: ClassId,
    },
    DuplicateOutputsInInputClass {
        class: ClassId,
        similar_class: ClassId,
    },
    KeyNotInInputs {
        service: ServiceId,
        key: ParamId,
    },
    InputsMismatch {
        service: ServiceId,
        class: ClassId,
    },
    OutputsMismatch {
        service: ServiceId,
        class: ClassId,
    },
    UnknownService(ServiceId),
    Reachability {
        service: ServiceId,
        count: u32,
    },
    ClassReferences {
        class: ClassId,
        refs: u32,
    },
    InputClassCount {
        maintained: usize,
        enumerated: usize,
    },
    Enumeration(ClassId),
    Location(ServiceId),
    WrongShape(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            KeyMismatch { map_key, class_key } => {
                write!(f, "key map entry {map_key} holds key class for {class_key}")
            }
            EmptyKeyClass(k) => write!(f, "key class {k} is empty"),
            EmptyInputClass(c) => write!(f, "input-similar class {c} is empty"),
            EmptySimilarClass(c) => write!(f, "similar class {c} is empty"),
            DanglingClass(c) => write!(f, "class {c} is referenced but does not exist"),
            InputClassKeyMismatch { class, class_key, key } => {
                write!(
                    f,
                    "input-similar class {class} has key {class_key} but sits under {key}"
                )
            }
            KeyNotInClassInputs { class, key } => {
                write!(f, "key {key} is not an input of input-similar class {class}")
            }
            DuplicateInputsInKeyClass { key, class } => {
                write!(f, "key class {key} holds input class {class} with repeated inputs")
            }
            DuplicateOutputsInInputClass { class, similar_class } => write!(
                f,
                "input-similar class {class} holds similar class {similar_class} with repeated outputs"
            ),
            KeyNotInInputs { service, key } => {
                write!(
                    f,
                    "service {service} is indexed under {key}, which is not one of its inputs"
                )
            }
            InputsMismatch { service, class } => {
                write!(f, "service {service} inputs differ from input-similar class {class}")
            }
            OutputsMismatch { service, class } => {
                write!(f, "service {service} outputs differ from similar class {class}")
            }
            UnknownService(s) => write!(f, "index references unknown service {s}"),
            Reachability { service, count } => {
                write!(f, "service {service} is reachable from {count} leaf positions")
            }
            ClassReferences { class, refs } => write!(f, "class {class} is referenced {refs} times"),
            InputClassCount { maintained, enumerated } => write!(
                f,
                "maintained input-class count {maintained} but {enumerated} enumerated"
            ),
            Enumeration(c) => write!(f, "enumeration entry for {c} is stale"),
            Location(s) => write!(f, "recorded location of {s} does not match the index"),
            WrongShape(what) => write!(f, "{what} has members of the wrong level for this mode"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn svc(id: u64, ins: &[u32], outs: &[u32]) -> Service {
        Service::new(id, ins.iter().copied(), outs.iter().copied()).unwrap()
    }

    #[test]
    fn first_insertion_creates_one_class_per_level() {
        let mut idx = IndexModel::new(IndexMode::Full);
        let st = idx.insert_with_key(svc(1, &[1, 2], &[3]), ParamId(2)).unwrap();
        assert_eq!(
            st.created,
            CreatedClasses {
                key_classes: 1,
                input_classes: 1,
                similar_classes: 1
            }
        );
        assert_eq!(idx.input_class_count(), 1);
        assert!(idx.integrity_check().is_empty());
    }

    #[test]
    fn full_mode_groups_by_inputs_then_outputs() {
        let mut idx = IndexModel::new(IndexMode::Full);
        idx.insert_with_key(svc(1, &[1, 2], &[3]), ParamId(1)).unwrap();
        let st = idx.insert_with_key(svc(2, &[1, 2], &[3]), ParamId(1)).unwrap();
        assert_eq!(st.created, CreatedClasses::default());
        assert_eq!(st.local_scans, 1);
        let st = idx.insert_with_key(svc(3, &[1, 2], &[4]), ParamId(1)).unwrap();
        assert_eq!(st.created.similar_classes, 1);
        assert_eq!(st.created.input_classes, 0);
        assert_eq!(idx.similar_classes().count(), 2);
        assert_eq!(idx.find_key_class(ParamId(1)).unwrap().size(), 1);
        assert!(idx.integrity_check().is_empty());
    }

    #[test]
    fn rejects_bad_insertions() {
        let mut idx = IndexModel::new(IndexMode::Partial);
        idx.insert_with_key(svc(1, &[1], &[]), ParamId(1)).unwrap();
        assert_eq!(
            idx.insert_with_key(svc(1, &[2], &[]), ParamId(2)),
            Err(IndexError::DuplicateService(ServiceId(1)))
        );
        assert_eq!(
            idx.insert_with_key(svc(2, &[2], &[]), ParamId(3)),
            Err(IndexError::KeyNotInInputs {
                service: ServiceId(2),
                key: ParamId(3)
            })
        );
    }

    #[test]
    fn local_lookup_is_exact() {
        let mut idx = IndexModel::new(IndexMode::Partial);
        idx.insert_with_key(svc(1, &[0, 1], &[]), ParamId(0)).unwrap();
        let ab = ParamSet::from_ids([0u32, 1]);
        let abc = ParamSet::from_ids([0u32, 1, 2]);
        let hit = idx.find_input_similar_in_key_class(ParamId(0), &ab).unwrap();
        assert_eq!(hit.map(|c| &c.inputs), Some(&ab));
        assert!(idx.find_input_similar_in_key_class(ParamId(0), &abc).unwrap().is_none());
        assert!(idx.find_input_similar_in_key_class(ParamId(9), &ab).unwrap().is_none());

        let primary = IndexModel::new(IndexMode::Primary);
        assert_eq!(
            primary.find_input_similar_in_key_class(ParamId(0), &ab),
            Err(IndexError::PrimaryMode)
        );
    }

    #[test]
    fn removal_collects_empty_classes() {
        for mode in IndexMode::ALL {
            let mut idx = IndexModel::new(mode);
            idx.insert_with_key(svc(1, &[1, 2], &[5]), ParamId(1)).unwrap();
            idx.insert_with_key(svc(2, &[1, 3], &[5]), ParamId(1)).unwrap();
            idx.insert_with_key(svc(3, &[4], &[5]), ParamId(4)).unwrap();
            assert!(idx.remove(ServiceId(3)).is_some());
            assert!(idx.find_key_class(ParamId(4)).is_none());
            assert!(idx.remove(ServiceId(3)).is_none());
            assert!(idx.remove(ServiceId(1)).is_some());
            let expect_m = if mode == IndexMode::Primary { 0 } else { 1 };
            assert_eq!(idx.input_class_count(), expect_m);
            assert_eq!(idx.leaf_services(ParamId(1)), [ServiceId(2)]);
            assert!(idx.integrity_check().is_empty(), "{mode}");
        }
    }

    #[test]
    fn scan_counts_every_class_on_a_miss() {
        let mut idx = IndexModel::new(IndexMode::Partial);
        for i in 0..5u32 {
            idx.insert_with_key(svc(u64::from(i), &[i, 10], &[]), ParamId(10))
                .unwrap();
        }
        let miss = idx.scan_for_inputs(&ParamSet::from_ids([7u32]));
        assert_eq!(
            miss,
            InputScan {
                found: None,
                examined: 5
            }
        );
        let hit = idx.scan_for_inputs(&ParamSet::from_ids([2u32, 10]));
        assert_eq!(hit.found.map(|(_, k)| k), Some(ParamId(10)));
        assert_eq!(hit.examined, 3);
    }

    #[test]
    fn planted_fault_is_reported() {
        for mode in IndexMode::ALL {
            let mut idx = IndexModel::new(mode);
            idx.insert_with_key(svc(1, &[1, 2], &[]), ParamId(1)).unwrap();
            idx.insert_with_key(svc(2, &[3], &[]), ParamId(3)).unwrap();
            // Move service 2 under key 1 by hand.
            let moved = idx.locations.get(&ServiceId(2)).copied().unwrap();
            match mode {
                IndexMode::Primary => {
                    idx.key_map.remove(&ParamId(3));
                    if let KeyClassMembers::Services(v) = &mut idx.key_map.get_mut(&ParamId(1)).unwrap().members {
                        v.push(ServiceId(2));
                    }
                    idx.locations.get_mut(&ServiceId(2)).unwrap().key = ParamId(1);
                }
                _ => {
                    let is_id = moved.input_class.unwrap();
                    idx.key_map.remove(&ParamId(3));
                    if let KeyClassMembers::InputClasses(v) = &mut idx.key_map.get_mut(&ParamId(1)).unwrap().members {
                        v.push(is_id);
                    }
                    idx.input_classes.get_mut(is_id).unwrap().key = ParamId(1);
                    idx.locations.get_mut(&ServiceId(2)).unwrap().key = ParamId(1);
                }
            }
            let v = idx.integrity_check();
            assert!(
                v.contains(&Violation::KeyNotInInputs {
                    service: ServiceId(2),
                    key: ParamId(1)
                }),
                "{mode}: {v:?}"
            );
            let naming_service = v
                .iter()
                .filter(|x| matches!(x, Violation::KeyNotInInputs { .. }))
                .count();
            assert_eq!(naming_service, 1);
        }
    }

    #[test]
    fn duplicate_inputs_under_distinct_keys_is_a_warning() {
        let mut idx = IndexModel::new(IndexMode::Partial);
        idx.insert_with_key(svc(1, &[1, 2], &[]), ParamId(1)).unwrap();
        idx.insert_with_key(svc(2, &[1, 2], &[]), ParamId(2)).unwrap();
        assert!(idx.integrity_check().is_empty());
        assert_eq!(idx.redundancy_warnings().len(), 1);
    }

    #[test]
    fn index_is_thread_transferable() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<IndexModel>();
    }
}
