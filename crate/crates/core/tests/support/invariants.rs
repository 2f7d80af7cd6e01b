//! Randomized invariant checks, shared between the library's property
//! suite and the acceptance suite.
//!
//! Each public function exercises one module's guarantees; the caller
//! supplies the [`TestRunner`] and thereby the case count. Assertions use
//! exact equality where the arithmetic is exact (reorderings that IEEE
//! addition happens to preserve, ratios of identical factors) and a
//! relative tolerance where rounding genuinely differs.

use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;
use proptest::test_runner::TestRunner;

use iaas_select::confidence::{
    experience_confidence, filter_providers, total_confidence, ConfidenceReport, TrialExperience,
};
use iaas_select::discovery::{lpd_discover, spd_discover};
use iaas_select::ranking::{provider_score, rank_matrices, RankingMethod};
use iaas_select::series::{QoSMatrix, TimeSeries, TimeWindow, WorkloadSeries};
use iaas_select::signature::{generate_signature, IaaSSignature, TrialObservation};
use iaas_select::sim::io::{
    format_workload_csv, from_versioned_json, parse_workload_csv, to_versioned_json, RequestFile,
    SignatureFile,
};
use iaas_select::sim::{
    ground_truth_performance, run_experiment, ExperimentConfig, ProviderProfile,
};
use iaas_select::stats::{min_max_normalize, pearson, rmse, std_normalize};
use iaas_select::trial::{
    characterize, select_trial_workloads, select_trial_workloads_eq, LevelThresholds, TrialScheme,
    WorkloadLevel,
};

const ATTRS: [&str; 3] = ["cpu", "net", "disk"];

/// Combined absolute/relative closeness check.
fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// A series is "well spread" when its value range is not vanishingly
/// small next to its magnitude, so variance computations stay
/// well-conditioned.
fn well_spread(values: &[f64]) -> bool {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max - min > 1e-3 * min.abs().max(max.abs()).max(1.0)
}

fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries::from_values(values).unwrap()
}

fn matrix(attrs: &[&str], columns: Vec<Vec<f64>>, start: usize) -> QoSMatrix {
    QoSMatrix::from_series(
        attrs
            .iter()
            .zip(columns)
            .map(|(name, values)| (name.to_string(), TimeSeries::new(start, values).unwrap())),
    )
    .unwrap()
}

fn spread_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0e3..1.0e3, len).prop_filter("needs spread", |v| well_spread(v))
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

pub fn stats_invariants(runner: &mut TestRunner) {
    // min-max output stays in [0, 1]; a second application changes nothing.
    runner
        .run(&spread_vec(2..40), |values| {
            let once = min_max_normalize(&series(values)).unwrap();
            prop_assert!(!once.constant_input);
            for (_, v) in once.series.iter() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let twice = min_max_normalize(&once.series).unwrap();
            prop_assert_eq!(twice.series.values(), once.series.values());
            Ok(())
        })
        .unwrap();

    // rmse: non-negative, symmetric, zero exactly on equal inputs, and
    // invariant under a common shift.
    runner
        .run(
            &(2usize..40).prop_flat_map(|n| {
                (
                    prop::collection::vec(-1.0e3..1.0e3, n),
                    prop::collection::vec(-1.0e3..1.0e3, n),
                    -100.0..100.0,
                )
            }),
            |(a, b, shift)| {
                let (sa, sb) = (series(a.clone()), series(b.clone()));
                let forward = rmse(&sa, &sb).unwrap();
                prop_assert!(forward >= 0.0);
                prop_assert_eq!(forward, rmse(&sb, &sa).unwrap());
                prop_assert_eq!(rmse(&sa, &sa).unwrap(), 0.0);
                if a != b {
                    prop_assert!(forward > 0.0);
                }
                let shifted = rmse(
                    &series(a.iter().map(|v| v + shift).collect()),
                    &series(b.iter().map(|v| v + shift).collect()),
                )
                .unwrap();
                prop_assert!(close(forward, shifted, 1e-9));
                Ok(())
            },
        )
        .unwrap();

    // std_normalize ignores positive scaling.
    runner
        .run(&(spread_vec(2..40), 0.001..1000.0), |(values, k)| {
            let plain = std_normalize(&series(values.clone())).unwrap();
            let scaled = std_normalize(&series(values.iter().map(|v| v * k).collect())).unwrap();
            for ((_, p), (_, s)) in plain.iter().zip(scaled.iter()) {
                prop_assert!(close(p, s, 1e-9));
            }
            Ok(())
        })
        .unwrap();

    // pearson ignores positive affine transforms of either argument, and
    // correlates any non-constant series perfectly with itself.
    runner
        .run(
            &(2usize..40)
                .prop_flat_map(|n| {
                    (
                        prop::collection::vec(-1.0e3..1.0e3, n),
                        prop::collection::vec(-1.0e3..1.0e3, n),
                        0.01..100.0,
                        -100.0..100.0,
                    )
                })
                .prop_filter("needs spread", |(a, b, _, _)| {
                    well_spread(a) && well_spread(b)
                }),
            |(a, b, alpha, beta)| {
                let (sa, sb) = (series(a.clone()), series(b));
                let base = pearson(&sa, &sb).unwrap();
                let transformed =
                    pearson(&series(a.iter().map(|v| alpha * v + beta).collect()), &sb).unwrap();
                prop_assert!((base - transformed).abs() <= 1e-9);
                prop_assert!((pearson(&sa, &sa).unwrap() - 1.0).abs() <= 1e-9);
                Ok(())
            },
        )
        .unwrap();
}

// ---------------------------------------------------------------------------
// signature
// ---------------------------------------------------------------------------

/// A randomly generated observation set: `windows[i]` covers
/// `values[i][attr]`, windows tile `[1, period]` with an optional extra
/// full-period observation on top.
#[derive(Debug, Clone)]
struct ObservationSet {
    period: usize,
    attrs: Vec<&'static str>,
    windows: Vec<(usize, usize)>,
    values: Vec<Vec<Vec<f64>>>,
}

impl ObservationSet {
    fn observations(&self) -> Vec<TrialObservation> {
        self.windows
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (&(start, end), columns))| {
                TrialObservation::new(
                    format!("user-{i}"),
                    matrix(&self.attrs, columns.clone(), start),
                    TimeWindow::new(start, end).unwrap(),
                )
                .unwrap()
            })
            .collect()
    }

    /// Independent mean-per-timestamp oracle for the aggregate.
    fn aggregate(&self, attr_index: usize) -> Vec<f64> {
        let mut sums = vec![0.0; self.period];
        let mut counts = vec![0usize; self.period];
        for (&(start, _), columns) in self.windows.iter().zip(&self.values) {
            for (offset, value) in columns[attr_index].iter().enumerate() {
                sums[start - 1 + offset] += value;
                counts[start - 1 + offset] += 1;
            }
        }
        sums.iter()
            .zip(&counts)
            .map(|(s, &c)| s / c as f64)
            .collect()
    }
}

fn observation_set() -> impl Strategy<Value = ObservationSet> {
    (6usize..=30, 1usize..=3, any::<bool>())
        .prop_flat_map(|(period, nattrs, add_full)| {
            (
                Just(period),
                Just(nattrs),
                prop::collection::btree_set(2..=period, 0..3),
                Just(add_full),
            )
        })
        .prop_flat_map(|(period, nattrs, cuts, add_full)| {
            let mut windows = Vec::new();
            let mut start = 1;
            for cut in cuts {
                windows.push((start, cut - 1));
                start = cut;
            }
            windows.push((start, period));
            if add_full {
                windows.push((1, period));
            }
            let values = windows
                .iter()
                .map(|&(s, e)| {
                    prop::collection::vec(prop::collection::vec(0.1..1.0e3, e - s + 1), nattrs)
                })
                .collect::<Vec<_>>();
            (Just(period), Just(nattrs), Just(windows), values)
        })
        .prop_map(|(period, nattrs, windows, values)| ObservationSet {
            period,
            attrs: ATTRS[..nattrs].to_vec(),
            windows,
            values,
        })
}

pub fn signature_invariants(runner: &mut TestRunner) {
    // Per-attribute rescaling of every observation leaves the signature
    // unchanged; so does permuting the observation list.
    runner
        .run(
            &observation_set().prop_flat_map(|set| {
                let n = set.windows.len();
                let scales = prop::collection::vec(0.01..100.0, set.attrs.len());
                (
                    Just(set),
                    scales,
                    Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
                )
            }),
            |(set, scales, order)| {
                let baseline = generate_signature("p", &set.observations(), set.period).unwrap();

                let mut scaled_set = set.clone();
                for columns in &mut scaled_set.values {
                    for (column, k) in columns.iter_mut().zip(&scales) {
                        for value in column.iter_mut() {
                            *value *= k;
                        }
                    }
                }
                let scaled =
                    generate_signature("p", &scaled_set.observations(), set.period).unwrap();
                prop_assert_eq!(scaled.coverage(), baseline.coverage());
                prop_assert_eq!(scaled.flat_attributes(), baseline.flat_attributes());
                for (name, expected) in baseline.matrix().iter() {
                    let actual = scaled.matrix().get(name).unwrap();
                    for ((_, e), (_, a)) in expected.iter().zip(actual.iter()) {
                        prop_assert!(close(e, a, 1e-9));
                    }
                }

                let observations = set.observations();
                let permuted: Vec<TrialObservation> =
                    order.iter().map(|&i| observations[i].clone()).collect();
                let shuffled = generate_signature("p", &permuted, set.period).unwrap();
                prop_assert_eq!(shuffled.coverage(), baseline.coverage());
                for (name, expected) in baseline.matrix().iter() {
                    let actual = shuffled.matrix().get(name).unwrap();
                    for ((_, e), (_, a)) in expected.iter().zip(actual.iter()) {
                        prop_assert!(close(e, a, 1e-12));
                    }
                }
                Ok(())
            },
        )
        .unwrap();

    // One full-coverage observation: the signature is exactly the
    // std-normalized observation, and value ratios match the aggregate.
    runner
        .run(
            &(6usize..=40, 1usize..=3).prop_flat_map(|(period, nattrs)| {
                (
                    Just(period),
                    Just(nattrs),
                    prop::collection::vec(prop::collection::vec(0.1..1.0e3, period), nattrs),
                )
            }),
            |(period, nattrs, columns)| {
                let attrs = ATTRS[..nattrs].to_vec();
                let observation = TrialObservation::new(
                    "solo".to_string(),
                    matrix(&attrs, columns.clone(), 1),
                    TimeWindow::new(1, period).unwrap(),
                )
                .unwrap();
                let signature = generate_signature("p", &[observation], period).unwrap();

                for (name, column) in attrs.iter().zip(&columns) {
                    let sig = signature.matrix().get(name).unwrap();
                    if signature.flat_attributes().contains(&name.to_string()) {
                        prop_assert!(sig.values().iter().all(|&v| v == 1.0));
                        continue;
                    }
                    let normalized = std_normalize(&series(column.clone())).unwrap();
                    prop_assert_eq!(sig.values(), normalized.values());

                    // sig[i] / sig[j] equals agg[i] / agg[j].
                    let (first, last) = (column[0], column[period - 1]);
                    let ratio = sig.values()[0] / sig.values()[period - 1];
                    prop_assert!(close(ratio, first / last, 1e-9));
                }
                Ok(())
            },
        )
        .unwrap();

    // Multi-observation ratio preservation against the mean oracle.
    runner
        .run(&observation_set(), |set| {
            let signature = generate_signature("p", &set.observations(), set.period).unwrap();
            for (index, name) in set.attrs.iter().enumerate() {
                if signature.flat_attributes().contains(&name.to_string()) {
                    continue;
                }
                let aggregate = set.aggregate(index);
                let sig = signature.matrix().get(name).unwrap();
                let ratio = sig.values()[0] / sig.values()[set.period - 1];
                prop_assert!(close(ratio, aggregate[0] / aggregate[set.period - 1], 1e-9));
            }
            Ok(())
        })
        .unwrap();
}

// ---------------------------------------------------------------------------
// trial
// ---------------------------------------------------------------------------

/// Demands drawn from a small alphabet of distinct integer values so
/// frequency structure is non-trivial. Capacity 120 puts the 1..=100
/// alphabet across all three workload levels.
fn small_alphabet_workload(
    distinct: std::ops::RangeInclusive<usize>,
    len: std::ops::Range<usize>,
) -> impl Strategy<Value = WorkloadSeries> {
    (distinct, len)
        .prop_flat_map(|(m, n)| {
            (
                prop::collection::btree_set(1u32..=100, m),
                prop::collection::vec(0..m, n..n + 1),
            )
        })
        .prop_map(|(alphabet, picks)| {
            let values: Vec<f64> = alphabet.into_iter().map(f64::from).collect();
            let mut demands: Vec<f64> = picks
                .into_iter()
                .map(|i| values[i % values.len()])
                .collect();
            // Every alphabet value appears at least once (when it fits),
            // so the distinct-demand count is exactly the alphabet size.
            for (slot, value) in demands.iter_mut().zip(&values) {
                *slot = *value;
            }
            WorkloadSeries::new(series(demands), 120.0).unwrap()
        })
}

fn demand_key(demand: f64, frequencies: &HashMap<u64, usize>) -> (usize, f64) {
    (frequencies[&demand.to_bits()], demand)
}

pub fn trial_invariants(runner: &mut TestRunner) {
    // FG/RG selection oracles by brute-force recount, subset property,
    // characterize partition laws, and determinism, on one generator.
    runner
        .run(
            &(small_alphabet_workload(1..=12, 30..200), 1usize..=8),
            |(workload, k)| {
                let mut frequencies: HashMap<u64, usize> = HashMap::new();
                for (_, demand) in workload.demands().iter() {
                    *frequencies.entry(demand.to_bits()).or_default() += 1;
                }
                let all_demands: Vec<f64> = frequencies
                    .keys()
                    .map(|bits| f64::from_bits(*bits))
                    .collect();
                let expected_picks = k.min(all_demands.len());

                for scheme in [TrialScheme::Fg, TrialScheme::Rg] {
                    let plan = select_trial_workloads(&workload, k, scheme).unwrap();
                    let selected: Vec<f64> = {
                        let mut bits: Vec<u64> =
                            plan.entries().iter().map(|e| e.demand.to_bits()).collect();
                        bits.sort_unstable();
                        bits.dedup();
                        bits.into_iter().map(f64::from_bits).collect()
                    };
                    prop_assert_eq!(selected.len(), expected_picks);

                    // Every selected demand must dominate every rejected
                    // one under the scheme's ordering.
                    let key = |d: f64| match scheme {
                        TrialScheme::Fg => demand_key(d, &frequencies),
                        _ => (0, d),
                    };
                    let weakest_pick = selected
                        .iter()
                        .map(|&d| key(d))
                        .min_by(|a, b| a.partial_cmp(b).unwrap())
                        .unwrap();
                    for &rejected in all_demands.iter().filter(|d| !selected.contains(d)) {
                        prop_assert!(key(rejected) < weakest_pick);
                    }
                }

                // Subset property across all schemes.
                for scheme in [TrialScheme::Fg, TrialScheme::Rg, TrialScheme::Mg] {
                    let plan = select_trial_workloads(&workload, k, scheme).unwrap();
                    for entry in plan.entries() {
                        prop_assert!(frequencies.contains_key(&entry.demand.to_bits()));
                        prop_assert_eq!(
                            workload.demand_at(entry.source_timestamp).unwrap(),
                            entry.demand
                        );
                    }
                    // Determinism: identical inputs, identical plan.
                    prop_assert_eq!(plan, select_trial_workloads(&workload, k, scheme).unwrap());
                }
                for vms in 1..=3usize {
                    let plan = select_trial_workloads_eq(&workload, k, vms).unwrap();
                    prop_assert_eq!(plan.streams.len(), vms);
                    for stream in &plan.streams {
                        for entry in stream {
                            prop_assert!(frequencies.contains_key(&entry.demand.to_bits()));
                        }
                    }
                    prop_assert_eq!(plan, select_trial_workloads_eq(&workload, k, vms).unwrap());
                }

                // characterize partitions the trace.
                let thresholds = LevelThresholds::default();
                let info = characterize(&workload, &thresholds).unwrap();
                prop_assert_eq!(
                    info.iter().map(|i| i.frequency).sum::<usize>(),
                    workload.len()
                );
                prop_assert_eq!(info.len(), all_demands.len());
                for pair in info.windows(2) {
                    prop_assert!(pair[0].demand < pair[1].demand);
                }
                for entry in &info {
                    prop_assert_eq!(entry.frequency, frequencies[&entry.demand.to_bits()]);
                    prop_assert_eq!(
                        workload.demand_at(entry.first_occurrence).unwrap(),
                        entry.demand
                    );
                    for (t, demand) in workload.demands().iter() {
                        if demand == entry.demand {
                            prop_assert!(t >= entry.first_occurrence);
                        }
                    }
                }
                Ok(())
            },
        )
        .unwrap();
}

// ---------------------------------------------------------------------------
// confidence
// ---------------------------------------------------------------------------

/// A signature plus the makings of two trial experiences against it:
/// one sampled straight from the signature (for self-consistency) and
/// one with arbitrary measurements (for unit invariance).
#[derive(Debug, Clone)]
struct SelfTrial {
    signature: IaaSSignature,
    window: TimeWindow,
    workload: WorkloadSeries,
    random_observed: Vec<Vec<f64>>,
    scale: f64,
}

impl SelfTrial {
    fn plan(&self) -> iaas_select::trial::TrialPlan {
        select_trial_workloads(&self.workload, self.window.len(), TrialScheme::Fg).unwrap()
    }

    fn experience_from(&self, columns: Vec<Vec<f64>>) -> TrialExperience {
        let attrs: Vec<&str> = self.signature.matrix().attribute_names().collect();
        let observed = matrix(&attrs, columns, self.window.start());
        TrialExperience::new("p".to_string(), self.plan(), vec![observed], self.window).unwrap()
    }

    /// Measurements equal to the signature slice times `scale`.
    fn sampled_experience(&self, scale: f64) -> TrialExperience {
        let columns = self
            .signature
            .matrix()
            .iter()
            .map(|(_, sig)| {
                self.window
                    .timestamps()
                    .map(|t| sig.value_at(t).unwrap() * scale)
                    .collect()
            })
            .collect();
        self.experience_from(columns)
    }

    /// The arbitrary measurements, expressed in a unit `scale` times
    /// larger.
    fn random_experience(&self, scale: f64) -> TrialExperience {
        let columns = self
            .random_observed
            .iter()
            .map(|column| column.iter().map(|v| v * scale).collect())
            .collect();
        self.experience_from(columns)
    }
}

fn self_trial() -> impl Strategy<Value = SelfTrial> {
    (10usize..=40, 1usize..=2)
        .prop_flat_map(|(period, nattrs)| {
            (
                Just(period),
                Just(nattrs),
                prop::collection::vec(prop::collection::vec(0.1..1.0e3, period), nattrs),
                3usize..=8,
                0.01..100.0,
            )
        })
        .prop_flat_map(|(period, nattrs, columns, len, scale)| {
            (
                Just((period, nattrs, columns, len, scale)),
                1usize..=period - len + 1,
                prop::collection::vec(prop::collection::vec(0.1..1.0e3, len), nattrs),
                small_alphabet_workload(1..=6, period..period + 1),
            )
        })
        .prop_map(
            |((period, nattrs, columns, len, scale), start, random_observed, workload)| {
                let attrs = ATTRS[..nattrs].to_vec();
                let observation = TrialObservation::new(
                    "u".to_string(),
                    matrix(&attrs, columns, 1),
                    TimeWindow::new(1, period).unwrap(),
                )
                .unwrap();
                SelfTrial {
                    signature: generate_signature("p", &[observation], period).unwrap(),
                    window: TimeWindow::new(start, start + len - 1).unwrap(),
                    workload,
                    random_observed,
                    scale,
                }
            },
        )
}

pub fn confidence_invariants(runner: &mut TestRunner) {
    // A trial sampled from the provider's own signature scores 1 on every
    // attribute, at any measurement unit; and for arbitrary measurements,
    // changing the unit does not move the score at all.
    runner
        .run(&self_trial(), |trial| {
            for scale in [1.0, trial.scale] {
                let report =
                    experience_confidence(&trial.sampled_experience(scale), &trial.signature, 0.7)
                        .unwrap();
                for (name, value) in &report.per_attribute {
                    if !report.degenerate_attributes.contains(name) {
                        prop_assert!((value - 1.0).abs() <= 1e-9);
                    }
                }
                prop_assert!((report.total - 1.0).abs() <= 1e-9);
                prop_assert!(report.passed);
            }

            let plain = experience_confidence(&trial.random_experience(1.0), &trial.signature, 0.7)
                .unwrap();
            let rescaled =
                experience_confidence(&trial.random_experience(trial.scale), &trial.signature, 0.7)
                    .unwrap();
            for (name, value) in &plain.per_attribute {
                prop_assert!((value - rescaled.per_attribute[name]).abs() <= 1e-9);
            }
            prop_assert!((plain.total - rescaled.total).abs() <= 1e-9);
            Ok(())
        })
        .unwrap();

    // total_confidence stays within the per-attribute extremes.
    runner
        .run(
            &prop::collection::btree_map(prop::sample::select(ATTRS.to_vec()), -1.0..1.0, 1..=3),
            |raw| {
                let per_attribute: BTreeMap<String, f64> =
                    raw.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
                let total = total_confidence(&per_attribute).unwrap();
                let min = per_attribute
                    .values()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                let max = per_attribute
                    .values()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(total >= min - 1e-12 && total <= max + 1e-12);
                Ok(())
            },
        )
        .unwrap();

    // filter_providers partitions its input.
    runner
        .run(
            &(prop::collection::vec(-1.0..1.0, 0..20), -1.0..1.0),
            |(totals, threshold)| {
                let reports: Vec<ConfidenceReport> = totals
                    .iter()
                    .enumerate()
                    .map(|(i, &total)| ConfidenceReport {
                        provider_id: format!("p{i}"),
                        per_attribute: BTreeMap::from([("cpu".to_string(), total)]),
                        total,
                        threshold,
                        passed: total >= threshold,
                        degenerate_attributes: vec![],
                        skipped_attributes: vec![],
                    })
                    .collect();
                let (kept, discarded) = filter_providers(reports.clone(), threshold);
                prop_assert_eq!(kept.len() + discarded.len(), reports.len());
                prop_assert!(kept.iter().all(|r| r.total >= threshold));
                prop_assert!(discarded.iter().all(|r| r.total < threshold));
                let mut ids: Vec<&str> = kept
                    .iter()
                    .chain(&discarded)
                    .map(|r| r.provider_id.as_str())
                    .collect();
                ids.sort_unstable();
                let mut expected: Vec<&str> =
                    reports.iter().map(|r| r.provider_id.as_str()).collect();
                expected.sort_unstable();
                prop_assert_eq!(ids, expected);
                Ok(())
            },
        )
        .unwrap();
}

// ---------------------------------------------------------------------------
// discovery
// ---------------------------------------------------------------------------

/// A coherent random discovery problem: workload over `[1, horizon]`, a
/// full-horizon signature, an FG plan with all-distinct demands and a
/// trial experience with arbitrary positive measurements.
#[derive(Debug, Clone)]
struct DiscoveryWorld {
    workload: WorkloadSeries,
    signature: IaaSSignature,
    window: TimeWindow,
    observed: Vec<Vec<f64>>,
    attrs: Vec<&'static str>,
    slots: usize,
}

impl DiscoveryWorld {
    fn experience(&self, signature: &IaaSSignature) -> TrialExperience {
        let _ = signature;
        let plan = select_trial_workloads(&self.workload, self.slots, TrialScheme::Fg).unwrap();
        let observed = matrix(&self.attrs, self.observed.clone(), self.window.start());
        TrialExperience::new("p".to_string(), plan, vec![observed], self.window).unwrap()
    }
}

fn discovery_world() -> impl Strategy<Value = DiscoveryWorld> {
    (20usize..=60, 1usize..=2, 2usize..=6)
        .prop_flat_map(|(horizon, nattrs, m)| {
            (
                Just(horizon),
                Just(nattrs),
                small_alphabet_workload(m..=m, horizon..horizon + 1),
                2usize..=m,
                prop::collection::vec(prop::collection::vec(0.1..1.0e3, horizon), nattrs),
            )
        })
        .prop_flat_map(|(horizon, nattrs, workload, slots, columns)| {
            (
                Just(horizon),
                Just(nattrs),
                Just(workload),
                Just(slots),
                Just(columns),
                1usize..=horizon - slots + 1,
            )
        })
        .prop_flat_map(|(horizon, nattrs, workload, slots, columns, start)| {
            (
                Just((horizon, nattrs, workload, slots, columns, start)),
                prop::collection::vec(prop::collection::vec(0.1..1.0e3, slots), nattrs),
            )
        })
        .prop_map(
            |((horizon, nattrs, workload, slots, columns, start), observed)| {
                let attrs = ATTRS[..nattrs].to_vec();
                let observation = TrialObservation::new(
                    "u".to_string(),
                    matrix(&attrs, columns, 1),
                    TimeWindow::new(1, horizon).unwrap(),
                )
                .unwrap();
                DiscoveryWorld {
                    workload,
                    signature: generate_signature("p", &[observation], horizon).unwrap(),
                    window: TimeWindow::new(start, start + slots - 1).unwrap(),
                    observed,
                    attrs,
                    slots,
                }
            },
        )
}

pub fn discovery_invariants(runner: &mut TestRunner) {
    // Flat signature: SPD degenerates to LPD exactly. Scaled signature:
    // SPD output is unchanged. Trial fixpoint: where the workload demand
    // equals the slot's own plan entry, SPD returns the measurement.
    runner
        .run(&(discovery_world(), 0.01..100.0), |(world, k)| {
            let experience = world.experience(&world.signature);

            let flat_columns: Vec<Vec<f64>> =
                vec![vec![7.5; world.signature.period()]; world.attrs.len()];
            let flat_obs = TrialObservation::new(
                "u".to_string(),
                matrix(&world.attrs, flat_columns, 1),
                TimeWindow::new(1, world.signature.period()).unwrap(),
            )
            .unwrap();
            let flat = generate_signature("p", &[flat_obs], world.signature.period()).unwrap();
            let spd = spd_discover(&world.workload, &experience, &flat).unwrap();
            let lpd = lpd_discover(&world.workload, &experience).unwrap();
            prop_assert_eq!(&spd.matched, &lpd.matched);
            for (name, flat_series) in spd.predicted.iter() {
                let lpd_series = lpd.predicted.get(name).unwrap();
                prop_assert_eq!(flat_series.values(), lpd_series.values());
            }

            // Signature scale invariance.
            let scaled_matrix =
                QoSMatrix::from_series(world.signature.matrix().iter().map(|(name, s)| {
                    (
                        name.to_string(),
                        TimeSeries::new(1, s.values().iter().map(|v| v * k).collect()).unwrap(),
                    )
                }))
                .unwrap();
            let scaled_signature = IaaSSignature::new(
                "p".to_string(),
                scaled_matrix,
                world.signature.coverage().to_vec(),
                world.signature.flat_attributes().to_vec(),
            )
            .unwrap();
            let base = spd_discover(&world.workload, &experience, &world.signature).unwrap();
            let scaled = spd_discover(&world.workload, &experience, &scaled_signature).unwrap();
            prop_assert_eq!(&base.matched, &scaled.matched);
            for (name, base_series) in base.predicted.iter() {
                let scaled_series = scaled.predicted.get(name).unwrap();
                for ((_, b), (_, s)) in base_series.iter().zip(scaled_series.iter()) {
                    prop_assert!(close(b, s, 1e-9));
                }
            }

            // Fixpoint: align the window's demands with the plan slots.
            let mut demands = world.workload.demands().values().to_vec();
            let plan = &experience.plan;
            for (offset, entry) in plan.entries().iter().enumerate() {
                demands[world.window.start() - 1 + offset] = entry.demand;
            }
            let aligned = WorkloadSeries::new(series(demands), world.workload.capacity()).unwrap();
            let prediction = spd_discover(&aligned, &experience, &world.signature).unwrap();
            for (slot, t) in world.window.timestamps().enumerate() {
                for (attr_index, name) in world.attrs.iter().enumerate() {
                    let predicted = prediction.predicted.get(name).unwrap().value_at(t).unwrap();
                    prop_assert_eq!(predicted, world.observed[attr_index][slot]);
                }
            }
            Ok(())
        })
        .unwrap();

    // Shape inheritance: under a constant workload every prediction is a
    // positive multiple of the signature, so they correlate perfectly.
    runner
        .run(
            &(discovery_world(), 1u32..=100).prop_map(|(world, demand)| {
                let constant = WorkloadSeries::new(
                    TimeSeries::from_values(vec![f64::from(demand); world.workload.len()]).unwrap(),
                    120.0,
                )
                .unwrap();
                (world, constant)
            }),
            |(world, constant)| {
                let experience = world.experience(&world.signature);
                let prediction = spd_discover(&constant, &experience, &world.signature).unwrap();
                for name in &world.attrs {
                    let predicted = prediction.predicted.get(name).unwrap();
                    let sig = world.signature.matrix().get(name).unwrap();
                    let r = pearson(predicted, sig).unwrap();
                    prop_assert!((r - 1.0).abs() <= 1e-9);
                }
                Ok(())
            },
        )
        .unwrap();
}

// ---------------------------------------------------------------------------
// ranking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct RankingWorld {
    attrs: Vec<&'static str>,
    request: QoSMatrix,
    predictions: Vec<(String, QoSMatrix)>,
}

fn ranking_world() -> impl Strategy<Value = RankingWorld> {
    (5usize..=30, 1usize..=3, 2usize..=5)
        .prop_flat_map(|(len, nattrs, providers)| {
            let column = || prop::collection::vec(-1.0e3..1.0e3, len);
            (
                Just(nattrs),
                prop::collection::vec(column(), nattrs),
                prop::collection::vec(prop::collection::vec(column(), nattrs), providers),
            )
        })
        .prop_map(|(nattrs, request_columns, prediction_columns)| {
            let attrs = ATTRS[..nattrs].to_vec();
            RankingWorld {
                request: matrix(&attrs, request_columns, 1),
                predictions: prediction_columns
                    .into_iter()
                    .enumerate()
                    .map(|(i, columns)| (format!("p{i}"), matrix(&attrs, columns, 1)))
                    .collect(),
                attrs,
            }
        })
}

fn affine_matrix(source: &QoSMatrix, transforms: &[(f64, f64)]) -> QoSMatrix {
    QoSMatrix::from_series(
        source
            .iter()
            .zip(transforms)
            .map(|((name, s), &(alpha, beta))| {
                (
                    name.to_string(),
                    TimeSeries::new(
                        s.start_index(),
                        s.values().iter().map(|v| alpha * v + beta).collect(),
                    )
                    .unwrap(),
                )
            }),
    )
    .unwrap()
}

pub fn ranking_invariants(runner: &mut TestRunner) {
    // Scores are non-negative; zero exactly when the prediction is a
    // per-attribute positive affine image of the request, and clearly
    // positive once the normalized shape differs.
    runner
        .run(
            &ranking_world().prop_flat_map(|world| {
                let n = world.attrs.len();
                (
                    Just(world),
                    prop::collection::vec((0.01..100.0, -100.0..100.0), n),
                )
            }),
            |(world, transforms)| {
                for (_, predicted) in &world.predictions {
                    prop_assert!(provider_score(&world.request, predicted).unwrap().value >= 0.0);
                }

                let affine = affine_matrix(&world.request, &transforms);
                let score = provider_score(&world.request, &affine).unwrap();
                prop_assert!(score.value <= 1e-9);

                // Swap the extremes of one non-constant attribute: the
                // normalized series now disagrees in at least two places.
                if let Some((name, distorted)) = distort_one_attribute(&world.request) {
                    let mut copy: Vec<(String, TimeSeries)> = world
                        .request
                        .iter()
                        .map(|(n, s)| (n.to_string(), s.clone()))
                        .collect();
                    for slot in copy.iter_mut() {
                        if slot.0 == name {
                            slot.1 = distorted.clone();
                        }
                    }
                    let tampered = QoSMatrix::from_series(copy).unwrap();
                    let score = provider_score(&world.request, &tampered).unwrap();
                    prop_assert!(score.value > 1e-9);
                }
                Ok(())
            },
        )
        .unwrap();

    // Order is stable under per-attribute affine rescaling of one
    // provider, under attributes every provider satisfies identically,
    // and across repeated runs; exact ties order by provider id.
    runner
        .run(
            &ranking_world().prop_flat_map(|world| {
                let n = world.attrs.len();
                let p = world.predictions.len();
                (
                    Just(world),
                    0..p,
                    prop::collection::vec((0.01..100.0, -100.0..100.0), n),
                    prop::collection::vec(-1.0e3..1.0e3, 5..=30),
                )
            }),
            |(world, target, transforms, extra_column)| {
                let entries: Vec<(String, &QoSMatrix)> = world
                    .predictions
                    .iter()
                    .map(|(id, m)| (id.clone(), m))
                    .collect();
                let baseline = rank_matrices(&world.request, &entries, RankingMethod::Spd).unwrap();
                let again = rank_matrices(&world.request, &entries, RankingMethod::Spd).unwrap();
                prop_assert_eq!(&baseline, &again);

                let gaps_ok = {
                    let mut scores: Vec<f64> = baseline.scores.values().cloned().collect();
                    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    scores.windows(2).all(|w| w[1] - w[0] > 1e-9)
                };
                prop_assume!(gaps_ok);

                let mut transformed = world.predictions.clone();
                transformed[target].1 = affine_matrix(&transformed[target].1, &transforms);
                let entries: Vec<(String, &QoSMatrix)> =
                    transformed.iter().map(|(id, m)| (id.clone(), m)).collect();
                let rescaled = rank_matrices(&world.request, &entries, RankingMethod::Spd).unwrap();
                prop_assert_eq!(&baseline.order, &rescaled.order);

                // An attribute met identically by everyone is neutral.
                let extra = TimeSeries::new(1, extra_column).unwrap();
                let len = world.request.series_len();
                let extra = TimeSeries::new(
                    1,
                    extra
                        .values()
                        .iter()
                        .cycle()
                        .take(len)
                        .cloned()
                        .collect::<Vec<f64>>(),
                )
                .unwrap();
                let widen = |m: &QoSMatrix| {
                    let mut widened: Vec<(String, TimeSeries)> =
                        m.iter().map(|(n, s)| (n.to_string(), s.clone())).collect();
                    widened.push(("extra".to_string(), extra.clone()));
                    QoSMatrix::from_series(widened).unwrap()
                };
                let wide_request = widen(&world.request);
                let wide_predictions: Vec<(String, QoSMatrix)> = world
                    .predictions
                    .iter()
                    .map(|(id, m)| (id.clone(), widen(m)))
                    .collect();
                let entries: Vec<(String, &QoSMatrix)> = wide_predictions
                    .iter()
                    .map(|(id, m)| (id.clone(), m))
                    .collect();
                let widened = rank_matrices(&wide_request, &entries, RankingMethod::Spd).unwrap();
                prop_assert_eq!(&baseline.order, &widened.order);

                // Identical predictions tie and fall back to id order.
                let clone_matrix = world.predictions[0].1.clone();
                let tie_entries: Vec<(String, &QoSMatrix)> = vec![
                    ("zz".to_string(), &clone_matrix),
                    ("aa".to_string(), &clone_matrix),
                ];
                let tied = rank_matrices(&world.request, &tie_entries, RankingMethod::Spd).unwrap();
                prop_assert_eq!(tied.order, vec!["aa".to_string(), "zz".to_string()]);
                Ok(())
            },
        )
        .unwrap();
}

/// Returns one attribute of `source` with its minimum and maximum values
/// swapped, when some attribute has distinct extremes.
fn distort_one_attribute(source: &QoSMatrix) -> Option<(String, TimeSeries)> {
    for (name, s) in source.iter() {
        let values = s.values();
        let mut lo = 0;
        let mut hi = 0;
        for (i, v) in values.iter().enumerate() {
            if *v < values[lo] {
                lo = i;
            }
            if *v > values[hi] {
                hi = i;
            }
        }
        if values[lo] < values[hi] {
            let mut swapped = values.to_vec();
            swapped.swap(lo, hi);
            return Some((
                name.to_string(),
                TimeSeries::new(s.start_index(), swapped).unwrap(),
            ));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// simulation harness
// ---------------------------------------------------------------------------

/// A small but fully random experiment world. With `noise` false all
/// providers are noise-free and every distinct workload demand fits into
/// the trial plan, which makes SPD exact.
fn experiment_world(
    noise: bool,
) -> impl Strategy<
    Value = (
        ExperimentConfig,
        iaas_select::ranking::ConsumerRequest,
        Vec<ProviderProfile>,
    ),
> {
    (30usize..=60, 4usize..=8, 1usize..=2, 2usize..=3)
        .prop_flat_map(move |(horizon, slots, nattrs, providers)| {
            let base = (50.0..150.0, 0.85..1.0, 0.7..0.95);
            let profile = (
                prop::collection::vec(base, nattrs),
                prop::collection::vec(prop::collection::vec(0.5..1.5, horizon), nattrs),
                if noise {
                    0.0..0.05
                } else {
                    0.0..f64::MIN_POSITIVE
                },
                any::<u64>(),
            );
            (
                Just(horizon),
                Just(slots),
                Just(nattrs),
                prop::collection::vec(profile, providers),
                small_alphabet_workload(1..=4, horizon..horizon + 1),
                1usize..=horizon - slots + 1,
                2usize..=4,
                any::<u64>(),
            )
        })
        .prop_map(
            |(horizon, slots, nattrs, raw_profiles, workload, start, users, seed)| {
                let attrs = ATTRS[..nattrs].to_vec();
                let thresholds = LevelThresholds::default();
                let profiles: Vec<ProviderProfile> = raw_profiles
                    .into_iter()
                    .enumerate()
                    .map(|(i, (bases, seasonal, noise_std, rng_seed))| {
                        let level_map = |factor_for: fn(&(f64, f64, f64)) -> f64| {
                            attrs
                                .iter()
                                .zip(&bases)
                                .map(|(name, spec)| (name.to_string(), factor_for(spec)))
                                .collect::<BTreeMap<String, f64>>()
                        };
                        ProviderProfile {
                            provider_id: format!("p{i}"),
                            base_perf: BTreeMap::from([
                                (WorkloadLevel::Low, level_map(|s| s.0)),
                                (WorkloadLevel::Medium, level_map(|s| s.0 * s.1)),
                                (WorkloadLevel::High, level_map(|s| s.0 * s.2)),
                            ]),
                            seasonal: matrix(&attrs, seasonal, 1),
                            noise_std: if noise_std < f64::MIN_POSITIVE * 2.0 {
                                0.0
                            } else {
                                noise_std
                            },
                            rng_seed,
                        }
                    })
                    .collect();
                let config = ExperimentConfig {
                    horizon_days: horizon,
                    provider_count: profiles.len(),
                    trial_length_days: slots,
                    trial_start_day: start,
                    confidence_threshold: -1.0,
                    seed,
                    eq_vm_count: 2,
                    signature_users: users,
                    ..ExperimentConfig::default()
                };
                let mut reference = profiles[0].clone();
                reference.noise_std = 0.0;
                let required =
                    ground_truth_performance(&reference, &workload, &thresholds).unwrap();
                let request =
                    iaas_select::ranking::ConsumerRequest::new(workload, required).unwrap();
                (config, request, profiles)
            },
        )
}

pub fn sim_invariants(runner: &mut TestRunner) {
    // The whole experiment is a pure function of its inputs.
    runner
        .run(&experiment_world(true), |(config, request, profiles)| {
            let first = run_experiment(&config, &request, &profiles).unwrap();
            let second = run_experiment(&config, &request, &profiles).unwrap();
            prop_assert_eq!(
                serde_json::to_string(&first).unwrap(),
                serde_json::to_string(&second).unwrap()
            );
            Ok(())
        })
        .unwrap();

    // Noise-free with every demand in the plan: SPD recovers the ground
    // truth exactly for the single-VM schemes (and for EQ whenever its
    // stride sampling happens to cover every distinct demand too).
    runner
        .run(&experiment_world(false), |(config, request, profiles)| {
            let report = run_experiment(&config, &request, &profiles).unwrap();
            let eq_plan = select_trial_workloads_eq(
                &request.workload,
                config.trial_length_days,
                config.eq_vm_count,
            )
            .unwrap();
            let mut workload_demands: Vec<u64> = request
                .workload
                .demands()
                .values()
                .iter()
                .map(|d| d.to_bits())
                .collect();
            workload_demands.sort_unstable();
            workload_demands.dedup();
            let eq_covers = workload_demands.iter().all(|bits| {
                eq_plan
                    .streams
                    .iter()
                    .flatten()
                    .any(|e| e.demand.to_bits() == *bits)
            });
            for cell in &report.cells {
                if cell.scheme != TrialScheme::Eq {
                    prop_assert!(
                        cell.spd_nrmse <= 1e-9,
                        "{} {} spd_nrmse {}",
                        cell.provider_id,
                        cell.scheme,
                        cell.spd_nrmse
                    );
                } else if eq_covers {
                    prop_assert!(cell.spd_nrmse <= 1e-9);
                }
            }
            Ok(())
        })
        .unwrap();
}

// ---------------------------------------------------------------------------
// on-disk formats
// ---------------------------------------------------------------------------

pub fn io_invariants(runner: &mut TestRunner) {
    // Workload CSV round trip is value-exact.
    runner
        .run(&small_alphabet_workload(1..=12, 1..60), |workload| {
            let text = format_workload_csv(&workload);
            let parsed = parse_workload_csv(&text, None).unwrap();
            prop_assert_eq!(&parsed, &workload);
            Ok(())
        })
        .unwrap();

    // Signature JSON round trip is value-exact and order-preserving.
    runner
        .run(&observation_set(), |set| {
            let signature = generate_signature("p", &set.observations(), set.period).unwrap();
            let text = to_versioned_json(&SignatureFile::from_signature(&signature)).unwrap();
            let back: SignatureFile = from_versioned_json(&text).unwrap();
            prop_assert_eq!(back.into_signature().unwrap(), signature);
            Ok(())
        })
        .unwrap();

    // Request JSON round trip is value-exact.
    runner
        .run(
            &(1usize..=3, 2usize..=30).prop_flat_map(|(nattrs, len)| {
                (
                    Just(nattrs),
                    prop::collection::vec(prop::collection::vec(0.1..1.0e3, len), nattrs),
                    small_alphabet_workload(1..=6, len..len + 1),
                )
            }),
            |(nattrs, columns, workload)| {
                let request = iaas_select::ranking::ConsumerRequest::new(
                    workload,
                    matrix(&ATTRS[..nattrs], columns, 1),
                )
                .unwrap();
                let text = to_versioned_json(&RequestFile::from_request(&request)).unwrap();
                let back: RequestFile = from_versioned_json(&text).unwrap();
                prop_assert_eq!(back.into_request().unwrap(), request);
                Ok(())
            },
        )
        .unwrap();
}
