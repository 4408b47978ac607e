//! Storage-tier catalog and compute pricing.
//!
//! Four S3-style storage classes, each with a monthly USD/GB rate and a rank
//! (1 = most expensive, fastest access; 4 = cheapest, coldest), plus an
//! hourly VM rate used when content is re-transcoded on demand instead of
//! stored. A catalog is immutable after validation and can be shared freely
//! across threads.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

/// Default VM rate, USD per hour. A config default for a general-purpose
/// on-demand instance class, overridable through the catalog file.
pub const DEFAULT_VM_HOURLY_RATE: f64 = 0.20;

/// The four storage classes in the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TierId {
    #[serde(rename = "standard")]
    Standard,
    #[serde(rename = "standard-ia")]
    StandardIa,
    #[serde(rename = "one-zone-ia")]
    OneZoneIa,
    #[serde(rename = "glacier")]
    Glacier,
}

impl TierId {
    pub const ALL: [TierId; 4] = [
        TierId::Standard,
        TierId::StandardIa,
        TierId::OneZoneIa,
        TierId::Glacier,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TierId::Standard => "standard",
            TierId::StandardIa => "standard-ia",
            TierId::OneZoneIa => "one-zone-ia",
            TierId::Glacier => "glacier",
        }
    }

    /// Stable slot index used for per-tier accounting arrays and CSV columns.
    pub fn slot(&self) -> usize {
        match self {
            TierId::Standard => 0,
            TierId::StandardIa => 1,
            TierId::OneZoneIa => 2,
            TierId::Glacier => 3,
        }
    }
}

impl fmt::Display for TierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TierId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(TierId::Standard),
            "standard-ia" => Ok(TierId::StandardIa),
            "one-zone-ia" => Ok(TierId::OneZoneIa),
            "glacier" => Ok(TierId::Glacier),
            other => Err(CatalogError::UnknownTier(other.to_string())),
        }
    }
}

/// One priced storage class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageTier {
    pub id: TierId,
    /// USD per GB per month.
    pub price_per_gb_month: f64,
    /// 1 = most expensive / fastest access, 4 = cheapest / coldest.
    pub rank: u8,
}

/// A validated catalog: exactly four tiers, held sorted by rank, with a
/// strictly decreasing price as rank increases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingCatalog {
    /// USD per VM-hour, charged for on-demand re-transcoding.
    pub vm_hourly_rate: f64,
    pub tiers: Vec<StorageTier>,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog parse error: {0}")]
    Parse(String),
    #[error("catalog must list exactly 4 tiers, found {0}")]
    TierCount(usize),
    #[error("duplicate tier id `{0}`")]
    DuplicateTier(TierId),
    #[error("unknown tier id `{0}`")]
    UnknownTier(String),
    #[error("tier `{0}` has non-positive price")]
    NonPositivePrice(TierId),
    #[error("tier ranks must be a permutation of 1..=4")]
    BadRanks,
    #[error("prices must be strictly decreasing by rank (rank 1 most expensive)")]
    PriceOrder,
    #[error("vm_hourly_rate must be positive")]
    NonPositiveVmRate,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PricingCatalog {
    /// Validates the invariants and normalizes tier order to rank order.
    pub fn validated(mut self) -> Result<Self, CatalogError> {
        if self.tiers.len() != 4 {
            return Err(CatalogError::TierCount(self.tiers.len()));
        }
        for (i, t) in self.tiers.iter().enumerate() {
            if self.tiers[..i].iter().any(|o| o.id == t.id) {
                return Err(CatalogError::DuplicateTier(t.id));
            }
            if !crate::positive(t.price_per_gb_month) {
                return Err(CatalogError::NonPositivePrice(t.id));
            }
        }
        let mut ranks: Vec<u8> = self.tiers.iter().map(|t| t.rank).collect();
        ranks.sort_unstable();
        if ranks != [1, 2, 3, 4] {
            return Err(CatalogError::BadRanks);
        }
        self.tiers.sort_by_key(|t| t.rank);
        if !self
            .tiers
            .windows(2)
            .all(|w| w[0].price_per_gb_month > w[1].price_per_gb_month)
        {
            return Err(CatalogError::PriceOrder);
        }
        if !crate::positive(self.vm_hourly_rate) {
            return Err(CatalogError::NonPositiveVmRate);
        }
        Ok(self)
    }

    pub fn tier(&self, id: TierId) -> &StorageTier {
        self.tiers.iter().find(|t| t.id == id).expect("validated catalog has all tiers")
    }

    /// Tier at the given rank, 1-based.
    pub fn by_rank(&self, rank: u8) -> &StorageTier {
        &self.tiers[(rank - 1) as usize]
    }

    pub fn standard_price(&self) -> f64 {
        self.by_rank(1).price_per_gb_month
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("catalog serializes")
    }

    pub fn from_path(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)?;
        load_catalog(&text)
    }
}

/// The built-in catalog: published S3 class rates, USD per GB-month.
pub fn default_catalog() -> PricingCatalog {
    PricingCatalog {
        vm_hourly_rate: DEFAULT_VM_HOURLY_RATE,
        tiers: vec![
            StorageTier { id: TierId::Standard, price_per_gb_month: 0.023, rank: 1 },
            StorageTier { id: TierId::StandardIa, price_per_gb_month: 0.0125, rank: 2 },
            StorageTier { id: TierId::OneZoneIa, price_per_gb_month: 0.01, rank: 3 },
            StorageTier { id: TierId::Glacier, price_per_gb_month: 0.001, rank: 4 },
        ],
    }
}

/// Parses and validates a catalog from its TOML document form.
pub fn load_catalog(source: &str) -> Result<PricingCatalog, CatalogError> {
    let raw: PricingCatalog =
        toml::from_str(source).map_err(|e| CatalogError::Parse(e.to_string()))?;
    raw.validated()
}
