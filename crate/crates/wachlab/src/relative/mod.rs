mod base;
pub mod maps;
mod nf;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

pub use base::{Mono, RelBase};
pub use nf::{base_precision_cap, Flavor, Key, RelPD};
use nf::Raw;

use crate::cyclo::RingParams;
use crate::error::{Result, WachError};

pub const MAX_VARS: usize = 3;

/// Ring parameters plus the torus dimension, exponent box and PD index bound.
#[derive(Debug)]
pub struct RelParams {
    pub ring: Arc<RingParams>,
    pub d: usize,
    pub box_bound: i32,
    pub pd_index: usize,
    cache: Mutex<HashMap<(Flavor, u8), Arc<Vec<Raw>>>>,
}

impl RelParams {
    pub fn new(ring: &Arc<RingParams>, d: usize, box_bound: i32, pd_index: usize) -> Result<Arc<Self>> {
        if d > MAX_VARS {
            return Err(WachError::Config(format!(
                "torus dimension {d} exceeds the supported maximum {MAX_VARS}"
            )));
        }
        if !(1..=127).contains(&box_bound) {
            return Err(WachError::Config("exponent box must lie in 1..=127".into()));
        }
        if pd_index < 1 || pd_index > 60 {
            return Err(WachError::Config("PD index bound must lie in 1..=60".into()));
        }
        if ring.p_m() > 255 {
            return Err(WachError::Config("p^m must be at most 255".into()));
        }
        Ok(Arc::new(RelParams {
            ring: ring.clone(),
            d,
            box_bound,
            pd_index,
            cache: Mutex::new(HashMap::new()),
        }))
    }

    pub fn same_as(&self, other: &RelParams) -> bool {
        self.ring.same_as(&other.ring)
            && self.d == other.d
            && self.box_bound == other.box_bound
            && self.pd_index == other.pd_index
    }

    pub(crate) fn cache_get(&self, flavor: Flavor, kind: u8) -> Option<Arc<Vec<Raw>>> {
        self.cache.lock().unwrap().get(&(flavor, kind)).cloned()
    }

    pub(crate) fn cache_put(&self, flavor: Flavor, kind: u8, v: Arc<Vec<Raw>>) {
        self.cache.lock().unwrap().insert((flavor, kind), v);
    }

    pub(crate) fn check_exp(&self, e: i64) -> Result<i8> {
        if e.abs() > self.box_bound as i64 {
            return Err(WachError::BoxOverflow {
                exp: e,
                bound: self.box_bound,
            });
        }
        Ok(e as i8)
    }
}
