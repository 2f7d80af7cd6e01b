//! Free-trial planning: characterize a long-term workload trace and pick
//! which demand points to run during a short trial so the observations say
//! as much as possible about the whole trace.
//!
//! Three single-VM schemes pick `k` demand slots (by frequency, by raw
//! demand value, or a half-and-half mix) and one multi-VM scheme splits the
//! trace into partitions compressed onto parallel VMs.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::WorkloadSeries;

/// Coarse intensity of one demand relative to the VM capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadLevel {
    Low,
    Medium,
    High,
}

/// Capacity fractions separating the three levels: demands below
/// `low_below * capacity` are LOW, below `medium_below * capacity` MEDIUM,
/// and everything else HIGH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelThresholds {
    pub low_below: f64,
    pub medium_below: f64,
}

impl Default for LevelThresholds {
    fn default() -> Self {
        Self {
            low_below: 1.0 / 3.0,
            medium_below: 2.0 / 3.0,
        }
    }
}

/// Classifies a single demand against a capacity.
pub fn level_of(demand: f64, capacity: f64, thresholds: &LevelThresholds) -> WorkloadLevel {
    let ratio = demand / capacity;
    if ratio < thresholds.low_below {
        WorkloadLevel::Low
    } else if ratio < thresholds.medium_below {
        WorkloadLevel::Medium
    } else {
        WorkloadLevel::High
    }
}

/// Summary of one distinct demand value in a workload trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadInfo {
    pub demand: f64,
    /// How many timestamps carry exactly this demand.
    pub frequency: usize,
    pub level: WorkloadLevel,
    /// Earliest timestamp at which the demand occurs.
    pub first_occurrence: usize,
}

/// Groups a trace by distinct demand value, returning one entry per value
/// sorted by demand ascending. Frequencies sum to the trace length.
pub fn characterize(
    workload: &WorkloadSeries,
    thresholds: &LevelThresholds,
) -> Result<Vec<WorkloadInfo>> {
    if workload.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    let mut indexed: Vec<(f64, usize)> = workload
        .demands()
        .iter()
        .map(|(t, demand)| (demand, t))
        .collect();
    indexed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut infos: Vec<WorkloadInfo> = Vec::new();
    for (demand, timestamp) in indexed {
        match infos.last_mut() {
            Some(last) if last.demand == demand => last.frequency += 1,
            _ => infos.push(WorkloadInfo {
                demand,
                frequency: 1,
                level: level_of(demand, workload.capacity(), thresholds),
                first_occurrence: timestamp,
            }),
        }
    }
    Ok(infos)
}

/// How trial demand slots are chosen from the long-term trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TrialScheme {
    /// Frequency-based: the `k` most frequent distinct demands.
    Fg,
    /// Resource-consumption-based: the `k` largest distinct demands.
    Rg,
    /// Mixed: half frequency picks, half consumption picks.
    Mg,
    /// Equal-partition: the trace is split across parallel VMs.
    Eq,
}

impl TrialScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialScheme::Fg => "FG",
            TrialScheme::Rg => "RG",
            TrialScheme::Mg => "MG",
            TrialScheme::Eq => "EQ",
        }
    }
}

impl std::fmt::Display for TrialScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One demand slot of a trial plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEntry {
    /// 1-based position within the trial window; slot `i` runs on the
    /// window's `i`-th day.
    pub trial_slot: usize,
    pub demand: f64,
    /// Timestamp in the long-term trace this demand was taken from.
    pub source_timestamp: usize,
}

/// Position of an entry inside a (possibly multi-stream) trial plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRef {
    pub stream: usize,
    pub index: usize,
}

/// Demand schedule for a trial: one entry list per VM stream.
///
/// Single-VM schemes (FG/RG/MG) produce exactly one stream whose entries
/// are sorted by demand ascending; the EQ scheme produces one stream per
/// VM in partition order. The workload capacity travels with the plan so
/// later stages can classify demands without the original trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub scheme: TrialScheme,
    pub capacity: f64,
    pub streams: Vec<Vec<TrialEntry>>,
}

impl TrialPlan {
    /// Entries of a single-stream plan; multi-stream plans return the
    /// first stream.
    pub fn entries(&self) -> &[TrialEntry] {
        self.streams.first().map_or(&[], Vec::as_slice)
    }

    /// All entries across streams in stream-major order, each tagged with
    /// its position.
    pub fn flat_entries(&self) -> impl Iterator<Item = (EntryRef, &TrialEntry)> {
        self.streams.iter().enumerate().flat_map(|(stream, list)| {
            list.iter()
                .enumerate()
                .map(move |(index, entry)| (EntryRef { stream, index }, entry))
        })
    }

    pub fn entry(&self, at: EntryRef) -> Option<&TrialEntry> {
        self.streams.get(at.stream)?.get(at.index)
    }

    pub fn total_entries(&self) -> usize {
        self.streams.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_entries() == 0
    }

    /// Number of slots each stream must fill (the trial length).
    pub fn slots_per_stream(&self) -> usize {
        self.streams.first().map_or(0, Vec::len)
    }
}

/// Picks `trial_length` demand slots from the trace under a single-VM
/// scheme (FG, RG, or MG).
///
/// Distinct demands are ranked by the scheme's criterion; when the trace
/// has fewer distinct demands than slots, the ranked picks are repeated
/// round-robin until every slot is filled. Entries carry the demand's
/// first occurrence as their source timestamp and are ordered by demand
/// ascending.
pub fn select_trial_workloads(
    workload: &WorkloadSeries,
    trial_length: usize,
    scheme: TrialScheme,
) -> Result<TrialPlan> {
    if workload.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    if trial_length == 0 {
        return Err(Error::ZeroTrialLength);
    }
    if trial_length > workload.len() {
        return Err(Error::TrialTooLong {
            trial: trial_length,
            workload: workload.len(),
        });
    }

    let infos = characterize(workload, &LevelThresholds::default())?;
    let picks: Vec<&WorkloadInfo> = match scheme {
        TrialScheme::Fg => rank_by_frequency(&infos)
            .into_iter()
            .take(trial_length)
            .collect(),
        TrialScheme::Rg => rank_by_demand(&infos)
            .into_iter()
            .take(trial_length)
            .collect(),
        TrialScheme::Mg => mixed_picks(&infos, trial_length),
        TrialScheme::Eq => {
            return Err(Error::InvalidConfig(
                "EQ plans need a VM count; use select_trial_workloads_eq".to_string(),
            ))
        }
    };

    let mut selected: Vec<&WorkloadInfo> = Vec::with_capacity(trial_length);
    selected.extend(&picks);
    // Fewer distinct demands than slots: repeat the ranked picks in order.
    let mut cycle = picks.iter().cycle();
    while selected.len() < trial_length {
        selected.push(cycle.next().expect("picks are non-empty"));
    }

    selected.sort_by(|a, b| a.demand.total_cmp(&b.demand));
    let entries = selected
        .iter()
        .enumerate()
        .map(|(i, info)| TrialEntry {
            trial_slot: i + 1,
            demand: info.demand,
            source_timestamp: info.first_occurrence,
        })
        .collect();
    Ok(TrialPlan {
        scheme,
        capacity: workload.capacity(),
        streams: vec![entries],
    })
}

/// Most frequent first; equal frequencies prefer the higher demand.
fn rank_by_frequency(infos: &[WorkloadInfo]) -> Vec<&WorkloadInfo> {
    let mut ranked: Vec<&WorkloadInfo> = infos.iter().collect();
    ranked.sort_by(|a, b| {
        b.frequency
            .cmp(&a.frequency)
            .then(b.demand.total_cmp(&a.demand))
    });
    ranked
}

/// Largest demand first (distinct values, so no ties).
fn rank_by_demand(infos: &[WorkloadInfo]) -> Vec<&WorkloadInfo> {
    let mut ranked: Vec<&WorkloadInfo> = infos.iter().collect();
    ranked.sort_by(|a, b| b.demand.total_cmp(&a.demand));
    ranked
}

/// MG selection: floor(k/2) frequency picks, then the remainder from the
/// demand ranking. A demand-ranked candidate that was already chosen is
/// replaced by the next unused frequency candidate.
fn mixed_picks(infos: &[WorkloadInfo], trial_length: usize) -> Vec<&WorkloadInfo> {
    let fg_count = trial_length / 2;
    let rg_count = trial_length - fg_count;
    let fg_ranked = rank_by_frequency(infos);
    let rg_ranked = rank_by_demand(infos);

    let mut picked: HashSet<u64> = HashSet::new();
    let mut picks: Vec<&WorkloadInfo> = Vec::new();
    let mut fg_iter = fg_ranked.iter();

    for _ in 0..fg_count {
        if let Some(info) = fg_iter.next() {
            picked.insert(info.demand.to_bits());
            picks.push(info);
        }
    }
    let mut taken = 0;
    for info in &rg_ranked {
        if taken == rg_count {
            break;
        }
        if picked.insert(info.demand.to_bits()) {
            picks.push(info);
            taken += 1;
        } else {
            // Overlap with the frequency half: backfill from the next
            // frequency candidate that is still unused.
            for fallback in fg_iter.by_ref() {
                if picked.insert(fallback.demand.to_bits()) {
                    picks.push(fallback);
                    taken += 1;
                    break;
                }
            }
        }
    }
    picks
}

/// Builds an EQ (equal-partition) trial plan: the trace is split into
/// `vm_count` contiguous partitions (the last takes the remainder) and
/// each partition is compressed to `trial_length` slots by uniform-stride
/// sampling, yielding one parallel entry stream per VM.
pub fn select_trial_workloads_eq(
    workload: &WorkloadSeries,
    trial_length: usize,
    vm_count: usize,
) -> Result<TrialPlan> {
    if workload.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    if trial_length == 0 {
        return Err(Error::ZeroTrialLength);
    }
    if vm_count == 0 {
        return Err(Error::ZeroVmCount);
    }
    if workload.len() < vm_count {
        return Err(Error::TooFewWorkloads {
            have: workload.len(),
            need: vm_count,
        });
    }

    let demands = workload.demands();
    let base_len = demands.len() / vm_count;
    let mut streams = Vec::with_capacity(vm_count);
    for vm in 0..vm_count {
        let start = vm * base_len;
        let len = if vm == vm_count - 1 {
            demands.len() - start
        } else {
            base_len
        };
        let entries = (0..trial_length)
            .map(|slot| {
                let offset = start + slot * len / trial_length;
                TrialEntry {
                    trial_slot: slot + 1,
                    demand: demands.values()[offset],
                    source_timestamp: demands.start_index() + offset,
                }
            })
            .collect();
        streams.push(entries);
    }
    Ok(TrialPlan {
        scheme: TrialScheme::Eq,
        capacity: workload.capacity(),
        streams,
    })
}
