//! Finite spin-chain geometry: chain specifications, regions, balls.

use serde::{Deserialize, Serialize};

use crate::error::{QcaError, Result};
use crate::{DEFAULT_CHOI_AMP_CAP, DEFAULT_MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Open,
    Periodic,
}

/// Lattice geometry: site count, per-site local dimensions, boundary
/// condition, and the dimension caps for dense full-chain objects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    local_dims: Vec<usize>,
    boundary: Boundary,
    max_dim: usize,
    choi_amp_cap: usize,
}

impl ChainSpec {
    pub fn new(local_dims: Vec<usize>, boundary: Boundary) -> Result<Self> {
        Self::with_caps(local_dims, boundary, DEFAULT_MAX_DIM, DEFAULT_CHOI_AMP_CAP)
    }

    pub fn uniform(num_sites: usize, d: usize, boundary: Boundary) -> Result<Self> {
        Self::new(vec![d; num_sites], boundary)
    }

    pub fn with_caps(
        local_dims: Vec<usize>,
        boundary: Boundary,
        max_dim: usize,
        choi_amp_cap: usize,
    ) -> Result<Self> {
        if local_dims.is_empty() {
            return Err(QcaError::SpecMismatch("chain must have at least one site".into()));
        }
        if let Some(&d) = local_dims.iter().find(|&&d| d < 2) {
            return Err(QcaError::SpecMismatch(format!("local dimension {d} < 2")));
        }
        let mut total: u128 = 1;
        for &d in &local_dims {
            total = total.saturating_mul(d as u128);
        }
        if total > max_dim as u128 {
            return Err(QcaError::DimensionCap {
                dim: total.min(usize::MAX as u128) as usize,
                cap: max_dim,
                context: "total chain dimension".into(),
            });
        }
        Ok(Self { local_dims, boundary, max_dim, choi_amp_cap })
    }

    pub fn num_sites(&self) -> usize {
        self.local_dims.len()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn dim_at(&self, site: usize) -> usize {
        self.local_dims[site]
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn choi_amp_cap(&self) -> usize {
        self.choi_amp_cap
    }

    pub fn total_dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub fn region_dim(&self, region: &Region) -> usize {
        region.sites().iter().map(|&s| self.local_dims[s]).product()
    }

    pub fn full_region(&self) -> Region {
        Region::from_sites((0..self.num_sites()).collect())
    }

    /// B(X, r): all sites within distance r of X, respecting the boundary.
    pub fn ball(&self, region: &Region, r: usize) -> Region {
        let n = self.num_sites();
        let mut included = vec![false; n];
        for &s in region.sites() {
            for d in 0..=r {
                match self.boundary {
                    Boundary::Periodic => {
                        included[(s + d) % n] = true;
                        included[(s + n - (d % n)) % n] = true;
                    }
                    Boundary::Open => {
                        if s + d < n {
                            included[s + d] = true;
                        }
                        if s >= d {
                            included[s - d] = true;
                        }
                    }
                }
            }
        }
        Region::from_sites((0..n).filter(|&i| included[i]).collect())
    }

    /// Distance between two sites, respecting the boundary.
    pub fn site_distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        match self.boundary {
            Boundary::Open => d,
            Boundary::Periodic => d.min(self.num_sites() - d),
        }
    }

    /// Interval of `len` sites starting at `start`, wrapping on periodic
    /// chains.
    pub fn interval(&self, start: usize, len: usize) -> Result<Region> {
        let n = self.num_sites();
        if len > n {
            return Err(QcaError::WindowTooLarge { window: len });
        }
        match self.boundary {
            Boundary::Open => {
                if start + len > n {
                    return Err(QcaError::WindowTooLarge { window: len });
                }
                Ok(Region::from_sites((start..start + len).collect()))
            }
            Boundary::Periodic => {
                Ok(Region::from_sites((0..len).map(|k| (start + k) % n).collect()))
            }
        }
    }

    /// A chain with each group of `g` consecutive sites fused into one.
    pub fn blocked(&self, g: usize) -> Result<ChainSpec> {
        if g == 0 || self.num_sites() % g != 0 {
            return Err(QcaError::SpecMismatch(format!(
                "blocking factor {g} does not divide {} sites",
                self.num_sites()
            )));
        }
        let dims = self
            .local_dims
            .chunks(g)
            .map(|c| c.iter().product())
            .collect();
        ChainSpec::with_caps(dims, self.boundary, self.max_dim, self.choi_amp_cap)
    }
}

/// A set of sites on the chain, stored sorted.  Intervals may wrap on
/// periodic chains; wrapped intervals are still contiguous modulo the chain
/// length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    sites: Vec<usize>,
}

impl Region {
    pub fn from_sites(mut sites: Vec<usize>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        Region { sites }
    }

    pub fn site(s: usize) -> Self {
        Region { sites: vec![s] }
    }

    pub fn empty() -> Self {
        Region { sites: vec![] }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.sites.iter().all(|&s| other.contains(s))
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut v = self.sites.clone();
        v.extend_from_slice(&other.sites);
        Region::from_sites(v)
    }

    pub fn intersection(&self, other: &Region) -> Region {
        Region {
            sites: self.sites.iter().copied().filter(|&s| other.contains(s)).collect(),
        }
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region {
            sites: self.sites.iter().copied().filter(|&s| !other.contains(s)).collect(),
        }
    }

    pub fn complement_in(&self, spec: &ChainSpec) -> Region {
        Region {
            sites: (0..spec.num_sites()).filter(|&s| !self.contains(s)).collect(),
        }
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.sites.iter().all(|&s| !other.contains(s))
    }

    /// Contiguous modulo the chain length (wrapping allowed only on periodic
    /// chains).
    pub fn is_interval(&self, spec: &ChainSpec) -> bool {
        if self.sites.is_empty() {
            return true;
        }
        let n = spec.num_sites();
        if self.sites.len() == n {
            return true;
        }
        // gaps in the sorted list; an unwrapped interval has none, a wrapped
        // interval has exactly one interior gap and touches both ends
        let contiguous = self.sites.windows(2).all(|w| w[1] == w[0] + 1);
        if contiguous {
            return true;
        }
        if spec.boundary() == Boundary::Periodic {
            let gaps = self
                .sites
                .windows(2)
                .filter(|w| w[1] != w[0] + 1)
                .count();
            return gaps == 1 && self.sites[0] == 0 && *self.sites.last().unwrap() == n - 1;
        }
        false
    }
}
