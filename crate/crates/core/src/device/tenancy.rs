//! Spatial and coarse-grain temporal multi-tenancy.
//!
//! Spatial tenants own disjoint package sets. Tenants sharing packages are
//! time multiplexed by the driver at whole-search boundaries, in FIFO order;
//! a search is never preempted.

use alloc::vec;
use alloc::vec::Vec;

use super::DeviceConfig;
use crate::{Error, Nanos, Result};

/// A set of packages within one unit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PackageSet(u64);

impl PackageSet {
    pub const MAX_PACKAGES: usize = 64;

    pub fn empty() -> Self {
        Self(0)
    }

    /// Packages `0..n`.
    pub fn first(n: usize) -> Self {
        assert!(n <= Self::MAX_PACKAGES);
        if n == 64 {
            Self(u64::MAX)
        } else {
            Self((1u64 << n) - 1)
        }
    }

    pub fn with(mut self, package: usize) -> Self {
        assert!(package < Self::MAX_PACKAGES);
        self.0 |= 1 << package;
        self
    }

    pub fn contains(self, package: usize) -> bool {
        package < Self::MAX_PACKAGES && self.0 & (1 << package) != 0
    }

    pub fn overlap(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..Self::MAX_PACKAGES).filter(move |&p| self.contains(p))
    }

    fn highest(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }
}

impl FromIterator<usize> for PackageSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(Self::empty(), Self::with)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sharing {
    /// The tenant owns its packages exclusively.
    Spatial,
    /// The tenant's packages may be shared with other temporal tenants.
    Temporal,
}

/// One whole search issued by a tenant, in arrival order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TenantRequest {
    pub tenant: u32,
    pub packages: PackageSet,
    pub sharing: Sharing,
    pub search_time: Nanos,
}

/// Time slot in which one request occupies its packages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchSlot {
    pub request: usize,
    pub tenant: u32,
    pub packages: PackageSet,
    pub start: Nanos,
    pub end: Nanos,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TenantPlan {
    /// Exclusive package claims of spatial tenants.
    pub spatial: Vec<(u32, PackageSet)>,
    /// Slots in request order.
    pub slots: Vec<SearchSlot>,
}

impl TenantPlan {
    /// True when no package ever runs two searches at once.
    pub fn is_serialized_per_package(&self) -> bool {
        self.slots.iter().enumerate().all(|(i, a)| {
            self.slots[i + 1..].iter().all(|b| {
                a.packages.overlap(b.packages).is_empty() || a.end <= b.start || b.end <= a.start
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TenantSchedule {
    pub plan: TenantPlan,
    pub completions: Vec<Nanos>,
}

/// Places requests on packages, all arriving at time zero in the given order.
pub fn schedule_tenants(requests: &[TenantRequest], cfg: &DeviceConfig) -> Result<TenantSchedule> {
    let mut spatial: Vec<(u32, PackageSet)> = Vec::new();
    for r in requests {
        if r.packages.is_empty() {
            return Err(Error::InvalidConfig("a search needs at least one package"));
        }
        if r.packages.highest().is_some_and(|p| p >= cfg.packages_per_unit) {
            return Err(Error::InvalidConfig("package index beyond packages_per_unit"));
        }
        if r.sharing == Sharing::Spatial {
            match spatial.iter_mut().find(|(t, _)| *t == r.tenant) {
                Some((_, set)) => set.0 |= r.packages.0,
                None => spatial.push((r.tenant, r.packages)),
            }
        }
    }
    for &(owner, claim) in &spatial {
        for r in requests.iter().filter(|r| r.tenant != owner) {
            if let Some(package) = claim.overlap(r.packages).iter().next() {
                let (first, second) = (owner.min(r.tenant), owner.max(r.tenant));
                return Err(Error::PlacementConflict {
                    package,
                    first,
                    second,
                });
            }
        }
    }

    let mut free_at = vec![Nanos::ZERO; cfg.packages_per_unit];
    let mut slots = Vec::with_capacity(requests.len());
    let mut completions = Vec::with_capacity(requests.len());
    for (i, r) in requests.iter().enumerate() {
        let start = r
            .packages
            .iter()
            .map(|p| free_at[p])
            .fold(Nanos::ZERO, Nanos::max);
        let end = start + r.search_time;
        for p in r.packages.iter() {
            free_at[p] = end;
        }
        slots.push(SearchSlot {
            request: i,
            tenant: r.tenant,
            packages: r.packages,
            start,
            end,
        });
        completions.push(end);
    }
    Ok(TenantSchedule {
        plan: TenantPlan { spatial, slots },
        completions,
    })
}
