//! Linked-cluster evaluation of extensive ground-state functionals.
//!
//! For a functional F that is additive over clusters sharing no site, the
//! value on the full lattice is Σ_C W(C) over connected term sets C, with
//! W(C) = Σ_{S ⊆ C} (−1)^{|C|−|S|} F(S). Every monomial of W(C) contains each
//! term of C at least once, so W(C) = O(x^{|C|}) and only clusters with at
//! most `order` terms contribute through that order.
//!
//! F depends only on the term masks over the cluster's sites and on the site
//! labels, so clusters are keyed by that data after sorting sites by
//! translation-normalized coordinates. Equal keys share one evaluation.

use std::collections::{HashMap, HashSet};

use super::flow::FlowExpansion;
use super::model::{cluster_ground_state, ClusterObservable};
use super::operator::Generators;
use super::power::PowerSeries;
use num_rational::BigRational;

/// Translation-normalized cluster data: term masks over canonical sites and
/// relabelled site labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterKey {
    pub terms: Vec<u64>,
    pub labels: Vec<u8>,
}

impl ClusterKey {
    fn site_count(&self) -> usize {
        self.labels.len()
    }

    /// Key of the sub-cluster made of `self.terms[i]` for the set bits i of `subset`.
    fn restrict(&self, subset: u32) -> ClusterKey {
        let chosen: Vec<u64> = (0..self.terms.len())
            .filter(|i| subset >> i & 1 == 1)
            .map(|i| self.terms[i])
            .collect();
        let used = chosen.iter().fold(0u64, |m, t| m | t);
        let old: Vec<usize> = (0..self.site_count())
            .filter(|i| used >> i & 1 == 1)
            .collect();
        let compress = |t: u64| {
            old.iter()
                .enumerate()
                .fold(0u64, |m, (new, &o)| m | ((t >> o & 1) << new))
        };
        let mut terms: Vec<u64> = chosen.into_iter().map(compress).collect();
        terms.sort_unstable();
        let labels = relabel(old.iter().map(|&o| self.labels[o]));
        ClusterKey { terms, labels }
    }

    /// Connected components of a term subset, as subsets.
    fn components(&self, subset: u32) -> Vec<u32> {
        let mut left = subset;
        let mut out = Vec::new();
        while left != 0 {
            let first = left.trailing_zeros();
            let mut comp = 1u32 << first;
            let mut sites = self.terms[first as usize];
            loop {
                let mut grew = false;
                for i in 0..self.terms.len() {
                    let bit = 1u32 << i;
                    if left & bit != 0 && comp & bit == 0 && self.terms[i] & sites != 0 {
                        comp |= bit;
                        sites |= self.terms[i];
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            out.push(comp);
            left &= !comp;
        }
        out
    }
}

/// Replaces non-zero labels by their rank of first appearance.
fn relabel(labels: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut map = [0u8; 256];
    let mut next = 1u8;
    labels
        .map(|l| {
            if l == 0 {
                0
            } else {
                if map[l as usize] == 0 {
                    map[l as usize] = next;
                    next += 1;
                }
                map[l as usize]
            }
        })
        .collect()
}

/// Counters reported alongside an expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClusterStats {
    pub clusters: usize,
    pub distinct: usize,
}

/// Shares cluster evaluations across geometries for one observable.
pub struct ClusterEngine<'a> {
    pub observable: ClusterObservable,
    pub order: usize,
    flow: &'a FlowExpansion,
    f_cache: HashMap<ClusterKey, PowerSeries>,
    w_cache: HashMap<ClusterKey, PowerSeries>,
}

impl<'a> ClusterEngine<'a> {
    pub fn new(observable: ClusterObservable, flow: &'a FlowExpansion, order: usize) -> Self {
        assert!(flow.order() >= order);
        Self {
            observable,
            order,
            flow,
            f_cache: HashMap::new(),
            w_cache: HashMap::new(),
        }
    }

    pub fn cached(&self) -> usize {
        self.f_cache.len()
    }

    fn f(&mut self, key: &ClusterKey) -> PowerSeries {
        if let Some(v) = self.f_cache.get(key) {
            return v.clone();
        }
        let v = if self.observable.admits(&key.labels) {
            let gs = cluster_ground_state(&key.terms, self.flow, self.order);
            self.observable.evaluate(&gs, &key.labels)
        } else {
            PowerSeries::zero(self.order)
        };
        self.f_cache.insert(key.clone(), v.clone());
        v
    }

    /// Möbius weight W(C) of a connected cluster.
    fn weight(&mut self, key: &ClusterKey) -> PowerSeries {
        if let Some(v) = self.w_cache.get(key) {
            return v.clone();
        }
        let k = key.terms.len();
        let full = (1u32 << k) - 1;
        let mut w = PowerSeries::zero(self.order);
        for subset in 1..=full {
            let negative = (k - subset.count_ones() as usize) % 2 == 1;
            for comp in key.components(subset) {
                let f = self.f(&key.restrict(comp));
                if negative {
                    w.sub_assign(&f);
                } else {
                    w.add_assign(&f);
                }
            }
        }
        self.w_cache.insert(key.clone(), w.clone());
        w
    }

    /// Σ_C W(C) over connected clusters of at most `order` terms that contain
    /// a seed term. `label` assigns a label to every generator site.
    pub fn expand(
        &mut self,
        gens: &Generators,
        seed: impl Fn(usize) -> bool,
        label: impl Fn(usize) -> u8,
    ) -> (PowerSeries, ClusterStats) {
        let mut site_terms: Vec<Vec<u32>> = vec![Vec::new(); gens.sites.len()];
        for (t, sites) in gens.terms.iter().enumerate() {
            for &s in sites {
                site_terms[s].push(t as u32);
            }
        }
        let mut counts: HashMap<ClusterKey, usize> = HashMap::new();
        let mut level: HashSet<Vec<u32>> = (0..gens.terms.len())
            .filter(|&t| seed(t))
            .map(|t| vec![t as u32])
            .collect();
        let mut stats = ClusterStats::default();
        for size in 1..=self.order {
            for c in &level {
                let key = canonical_key(gens, c, &label);
                if self.observable.admits(&key.labels) {
                    *counts.entry(key).or_insert(0) += 1;
                    stats.clusters += 1;
                }
            }
            if size == self.order {
                break;
            }
            let mut next: HashSet<Vec<u32>> = HashSet::new();
            for c in &level {
                for &t in c {
                    for &s in &gens.terms[t as usize] {
                        for &u in &site_terms[s] {
                            if c.binary_search(&u).is_err() {
                                let mut grown = c.clone();
                                let pos = grown.binary_search(&u).unwrap_err();
                                grown.insert(pos, u);
                                next.insert(grown);
                            }
                        }
                    }
                }
            }
            level = next;
        }
        stats.distinct = counts.len();
        let mut keys: Vec<(ClusterKey, usize)> = counts.into_iter().collect();
        keys.sort();
        let mut total = PowerSeries::zero(self.order);
        for (key, mult) in keys {
            let w = self.weight(&key);
            total.add_assign(&w.scaled(&BigRational::from_integer(mult.into())));
        }
        (total, stats)
    }
}

/// Canonical key of a concrete cluster on the torus.
pub fn canonical_key(
    gens: &Generators,
    cluster: &[u32],
    label: &impl Fn(usize) -> u8,
) -> ClusterKey {
    let n = gens.n as i64;
    let mut sites: Vec<usize> = cluster
        .iter()
        .flat_map(|&t| gens.terms[t as usize].iter().copied())
        .collect();
    sites.sort_unstable();
    sites.dedup();
    let (r0, c0, _) = gens.sites[sites[0]].coords();
    let wrap = |x: i64| (x % n + n + n / 2) % n - n / 2;
    let mut placed: Vec<((i64, i64, u8), usize)> = sites
        .iter()
        .map(|&s| {
            let (r, c, k) = gens.sites[s].coords();
            (
                (wrap(r as i64 - r0 as i64), wrap(c as i64 - c0 as i64), k),
                s,
            )
        })
        .collect();
    placed.sort_unstable();
    let local: HashMap<usize, usize> = placed
        .iter()
        .enumerate()
        .map(|(i, &(_, s))| (s, i))
        .collect();
    let mut terms: Vec<u64> = cluster
        .iter()
        .map(|&t| {
            gens.terms[t as usize]
                .iter()
                .fold(0u64, |m, s| m | 1 << local[s])
        })
        .collect();
    terms.sort_unstable();
    let labels = relabel(placed.iter().map(|&(_, s)| label(s)));
    ClusterKey { terms, labels }
}
