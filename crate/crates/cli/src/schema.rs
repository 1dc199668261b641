//! JSON file formats. Rationals are `"p/q"` strings, cake pieces are lists
//! of `"lo..hi"` intervals.

use std::collections::BTreeSet;

use fairdiv_core::check::{FairnessCertificate, Notion, PairStatus, Violation};
use fairdiv_core::rational;
use fairdiv_core::valuation::TableValuation;
use fairdiv_core::{
    Allocation, CakePiece, DivisibleKind, IndivisibleInstance, ItemPartition, MixedAllocation, MixedInstance,
    PiecewiseConstantDensity, Rational, Valuation,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Indivisible,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivisibleFile {
    Cake,
    BadCake,
}

/// One agent's valuation: additive item values, or `v(S)` for every
/// bitmask `S` (bit `j` = item `j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValuationFile {
    Additive(Vec<String>),
    Table { table: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub goods: Vec<usize>,
    pub chores: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub breakpoints: Vec<String>,
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub version: u32,
    pub kind: InstanceKind,
    pub agents: usize,
    pub items: usize,
    pub valuations: Vec<ValuationFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<PartitionFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisible: Option<DivisibleFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<Vec<DensityFile>>,
}

/// A parsed instance file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Indivisible(IndivisibleInstance),
    Mixed(MixedInstance),
}

impl Instance {
    pub fn indivisible(&self) -> &IndivisibleInstance {
        match self {
            Instance::Indivisible(i) => i,
            Instance::Mixed(m) => m.indivisible(),
        }
    }
}

fn parse_all(values: &[String], field: &str) -> Result<Vec<Rational>, String> {
    values
        .iter()
        .enumerate()
        .map(|(t, v)| rational::parse(v).map_err(|e| format!("{field}[{t}]: {e}")))
        .collect()
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(rational::format).collect()
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance, String> {
        if self.version != SCHEMA_VERSION {
            return Err(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.version));
        }
        if self.valuations.len() != self.agents {
            return Err(format!("valuations: {} entries for {} agents", self.valuations.len(), self.agents));
        }
        let valuations = self
            .valuations
            .iter()
            .enumerate()
            .map(|(a, v)| match v {
                ValuationFile::Additive(values) => {
                    let values = parse_all(values, &format!("valuations[{a}]"))?;
                    if values.len() != self.items {
                        return Err(format!("valuations[{a}]: {} values for {} items", values.len(), self.items));
                    }
                    Ok(Valuation::Additive(values))
                }
                ValuationFile::Table { table } => {
                    let values = parse_all(table, &format!("valuations[{a}].table"))?;
                    TableValuation::new(self.items, values)
                        .map(Valuation::Table)
                        .map_err(|e| format!("valuations[{a}].table: {e}"))
                }
            })
            .collect::<Result<Vec<_>, String>>()?;
        let mut inst = IndivisibleInstance::new(self.items, valuations).map_err(|e| e.to_string())?;
        if let Some(partition) = &self.partition {
            let parts = partition
                .iter()
                .map(|p| ItemPartition {
                    goods: p.goods.iter().copied().collect(),
                    chores: p.chores.iter().copied().collect(),
                })
                .collect();
            inst = inst.with_partition(parts).map_err(|e| format!("partition: {e}"))?;
        }
        match self.kind {
            InstanceKind::Indivisible => {
                if self.divisible.is_some() || self.densities.is_some() {
                    return Err("indivisible instances take no divisible part".into());
                }
                Ok(Instance::Indivisible(inst))
            }
            InstanceKind::Mixed => {
                let kind = match self.divisible.ok_or("divisible: missing for a mixed instance")? {
                    DivisibleFile::Cake => DivisibleKind::Cake,
                    DivisibleFile::BadCake => DivisibleKind::BadCake,
                };
                let densities = self
                    .densities
                    .as_ref()
                    .ok_or("densities: missing for a mixed instance")?
                    .iter()
                    .enumerate()
                    .map(|(a, d)| {
                        let field = format!("densities[{a}]");
                        PiecewiseConstantDensity::new(
                            parse_all(&d.breakpoints, &format!("{field}.breakpoints"))?,
                            parse_all(&d.levels, &format!("{field}.levels"))?,
                        )
                        .map_err(|e| format!("{field}: {e}"))
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                MixedInstance::new(inst, densities, kind).map(Instance::Mixed).map_err(|e| e.to_string())
            }
        }
    }

    pub fn from_instance(instance: &Instance) -> Self {
        let items = instance.indivisible();
        let valuations = items
            .valuations()
            .iter()
            .map(|v| match v {
                Valuation::Additive(values) => ValuationFile::Additive(strings(values)),
                Valuation::Table(t) => ValuationFile::Table { table: strings(t.values()) },
            })
            .collect();
        let partition = items.explicit_partition().map(|parts| {
            parts
                .iter()
                .map(|p| PartitionFile {
                    goods: p.goods.iter().copied().collect(),
                    chores: p.chores.iter().copied().collect(),
                })
                .collect()
        });
        let (kind, divisible, densities) = match instance {
            Instance::Indivisible(_) => (InstanceKind::Indivisible, None, None),
            Instance::Mixed(m) => (
                InstanceKind::Mixed,
                Some(match m.kind() {
                    DivisibleKind::Cake => DivisibleFile::Cake,
                    DivisibleKind::BadCake => DivisibleFile::BadCake,
                }),
                Some(
                    m.densities()
                        .iter()
                        .map(|d| DensityFile { breakpoints: strings(d.breakpoints()), levels: strings(d.levels()) })
                        .collect(),
                ),
            ),
        };
        InstanceFile {
            version: SCHEMA_VERSION,
            kind,
            agents: items.agents(),
            items: items.items(),
            valuations,
            partition,
            divisible,
            densities,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationFile {
    pub bundles: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cake: Option<Vec<Vec<String>>>,
}

impl AllocationFile {
    pub fn from_items(alloc: &Allocation) -> Self {
        AllocationFile { bundles: alloc.bundles().iter().map(|b| b.iter().copied().collect()).collect(), cake: None }
    }

    pub fn from_mixed(alloc: &MixedAllocation) -> Self {
        let mut file = Self::from_items(alloc.items());
        file.cake = Some(
            alloc
                .cake()
                .iter()
                .map(|p| p.intervals().iter().map(|iv| iv.to_string()).collect())
                .collect(),
        );
        file
    }

    pub fn to_items(&self) -> Result<Allocation, String> {
        let bundles = self.bundles.iter().map(|b| b.iter().copied().collect::<BTreeSet<usize>>()).collect();
        Allocation::from_bundles(bundles).map_err(|e| e.to_string())
    }

    pub fn to_mixed(&self) -> Result<MixedAllocation, String> {
        let items = self.to_items()?;
        let cake = match &self.cake {
            None => vec![CakePiece::empty(); items.agents()],
            Some(pieces) => pieces
                .iter()
                .enumerate()
                .map(|(a, p)| CakePiece::parse_list(p.iter().map(String::as_str)).map_err(|e| format!("cake[{a}]: {e}")))
                .collect::<Result<Vec<_>, String>>()?,
        };
        MixedAllocation::new(items, cake).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFile {
    pub envier: usize,
    pub envied: usize,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub notion: String,
    pub holds: bool,
    pub pairs: Vec<PairFile>,
}

impl CertificateFile {
    pub fn new(cert: &FairnessCertificate) -> Self {
        let pairs = cert
            .pairs
            .iter()
            .map(|p| {
                let (status, item) = match p.status {
                    PairStatus::NoEnvy => ("no-envy", None),
                    PairStatus::Ef1Witness { item } => ("ef1-witness", Some(item)),
                    PairStatus::EfmWitness { item } => ("efm-witness", Some(item)),
                    PairStatus::Violation(Violation::Envy) => ("envy", None),
                    PairStatus::Violation(Violation::NoRemovableItem) => ("no-removable-item", None),
                    PairStatus::Violation(Violation::EnvierHoldsBadCake) => ("envier-holds-bad-cake", None),
                    PairStatus::Violation(Violation::EnviedHoldsCake) => ("envied-holds-cake", None),
                };
                PairFile { envier: p.envier, envied: p.envied, status: status.into(), item }
            })
            .collect();
        CertificateFile { notion: cert.notion.name().into(), holds: cert.holds(), pairs }
    }
}

pub fn parse_notion(name: &str) -> Option<Notion> {
    match name.to_ascii_lowercase().as_str() {
        "ef" => Some(Notion::Ef),
        "ef1" => Some(Notion::Ef1),
        "efm" => Some(Notion::Efm),
        _ => None,
    }
}
