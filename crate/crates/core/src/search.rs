//! Backtracking search for injective adjacency-preserving vertex maps.
//!
//! A map `f` from a pattern graph into a target graph is accepted when it is
//! injective and every pattern edge lands on a target edge. In `induced`
//! mode non-edges must also land on non-edges, which with equal vertex
//! counts makes `f` an isomorphism (used for automorphism counting).
//!
//! Domains are word-parallel: the candidates for a pattern vertex are the
//! intersection of the target neighbourhoods of the images of its
//! already-assigned neighbours, minus the used targets. Domains of all
//! unassigned vertices are narrowed after every assignment, a branch is cut
//! as soon as one of them becomes empty, and the next vertex to assign is
//! the one with the fewest candidates (ties by position in a fixed order).
//!
//! The tree is split at the first assignment level. Each subtree owns its
//! own visitor, and the per-subtree visitors are merged in candidate order,
//! so results do not depend on the number of workers.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::bitset::{words_for, BitRow};

/// Receives complete maps. `images[u]` is the target vertex of pattern
/// vertex `u`.
pub trait Visitor: Send {
    fn visit(&mut self, images: &[u32]);

    /// Absorbs the results of a later subtree.
    fn merge(&mut self, later: Self)
    where
        Self: Sized;
}

/// Counts leaves.
#[derive(Default, Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counter(pub u64);

impl Visitor for Counter {
    fn visit(&mut self, _: &[u32]) {
        self.0 += 1;
    }

    fn merge(&mut self, later: Self) {
        self.0 += later.0;
    }
}

/// Collects every map in discovery order.
#[derive(Default, Debug, Clone)]
pub struct Collect(pub Vec<Vec<u32>>);

impl Visitor for Collect {
    fn visit(&mut self, images: &[u32]) {
        self.0.push(images.to_vec());
    }

    fn merge(&mut self, mut later: Self) {
        self.0.append(&mut later.0);
    }
}

/// Order in which pattern vertices are assigned: repeatedly the vertex with
/// the most already-placed neighbours. Ties go to the lowest ID, or to the
/// highest when `reverse_ties` is set.
pub fn greedy_order(pattern: &[BitRow], reverse_ties: bool) -> Vec<usize> {
    let count = pattern.len();
    let mut placed = vec![false; count];
    let mut score = vec![0usize; count];
    let mut order = Vec::with_capacity(count);
    for _ in 0..count {
        let candidates = (0..count).filter(|&v| !placed[v]);
        let best = if reverse_ties {
            candidates.max_by_key(|&v| (score[v], v)).unwrap()
        } else {
            candidates.max_by_key(|&v| (score[v], std::cmp::Reverse(v))).unwrap()
        };
        placed[best] = true;
        order.push(best);
        for w in pattern[best].iter() {
            score[w] += 1;
        }
    }
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchStats {
    /// False when the deadline tripped before the tree was exhausted.
    pub complete: bool,
    pub nodes: u64,
}

pub struct MapSearch<'a> {
    pattern: &'a [BitRow],
    target: &'a [BitRow],
    induced: bool,
    order: Vec<usize>,
    /// Position of each pattern vertex in `order`; breaks ties between
    /// equally constrained vertices.
    rank: Vec<usize>,
    words: usize,
}

const CHECK_EVERY: u64 = 1 << 12;

impl<'a> MapSearch<'a> {
    pub fn new(pattern: &'a [BitRow], target: &'a [BitRow], induced: bool, order: Vec<usize>) -> Self {
        assert_eq!(order.len(), pattern.len(), "order must list every pattern vertex");
        let mut rank = vec![usize::MAX; pattern.len()];
        for (d, &u) in order.iter().enumerate() {
            rank[u] = d;
        }
        assert!(rank.iter().all(|&r| r != usize::MAX), "order must be a permutation");
        MapSearch {
            pattern,
            target,
            induced,
            order,
            rank,
            words: words_for(target.len()),
        }
    }

    /// Search with the default greedy order.
    pub fn with_greedy_order(pattern: &'a [BitRow], target: &'a [BitRow], induced: bool) -> Self {
        Self::new(pattern, target, induced, greedy_order(pattern, false))
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Runs the search on `jobs` workers. `make` builds one visitor per
    /// first-level subtree.
    pub fn run<V, F>(&self, jobs: usize, deadline: Option<Instant>, make: F) -> (V, SearchStats)
    where
        V: Visitor,
        F: Fn() -> V + Sync,
    {
        self.run_with_prefix(&[], jobs, deadline, make)
    }

    /// Like [`MapSearch::run`], restricted to maps extending the partial
    /// assignment `prefix` of (pattern vertex, target vertex) pairs. The
    /// tree is split on the first vertex chosen after the prefix.
    pub fn run_with_prefix<V, F>(
        &self,
        prefix: &[(usize, u32)],
        jobs: usize,
        deadline: Option<Instant>,
        make: F,
    ) -> (V, SearchStats)
    where
        V: Visitor,
        F: Fn() -> V + Sync,
    {
        let abort = AtomicBool::new(false);
        let nodes = AtomicU64::new(0);
        let mut base = Worker::new(self, deadline, &abort);
        let mut feasible = self.pattern.len() <= self.target.len();
        for (depth, &(u, t)) in prefix.iter().enumerate() {
            if !feasible || base.images[u] != u32::MAX || base.used[t as usize / 64] >> (t % 64) & 1 == 1 {
                feasible = false;
                break;
            }
            let domain = &base.domains[depth][u * self.words..(u + 1) * self.words];
            if domain[t as usize / 64] >> (t % 64) & 1 == 0 {
                feasible = false;
                break;
            }
            feasible = base.assign(depth, u, t);
        }
        let depth = prefix.len();
        if !feasible {
            return (make(), SearchStats { complete: true, nodes: 0 });
        }
        if depth == self.pattern.len() {
            let mut v = make();
            v.visit(&base.images);
            return (v, SearchStats { complete: true, nodes: 1 });
        }
        let u = base.choose(depth);
        let w = self.words;
        let first: Vec<u32> = (0..self.target.len() as u32)
            .filter(|&t| {
                let word = t as usize / 64;
                (base.domains[depth][u * w + word] & !base.used[word]) >> (t % 64) & 1 == 1
            })
            .collect();
        let subtree = |&t: &u32| {
            let mut visitor = make();
            let mut worker = base.clone();
            worker.nodes = 0;
            if worker.assign(depth, u, t) {
                worker.descend(depth + 1, &mut visitor);
            }
            nodes.fetch_add(worker.nodes, Ordering::Relaxed);
            visitor
        };
        let parts: Vec<V> = if jobs <= 1 {
            first.iter().map(subtree).collect()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .expect("thread pool")
                .install(|| first.par_iter().map(subtree).collect())
        };
        let mut parts = parts.into_iter();
        let mut acc = parts.next().unwrap_or_else(&make);
        for part in parts {
            acc.merge(part);
        }
        let stats = SearchStats {
            complete: !abort.load(Ordering::Relaxed),
            nodes: nodes.load(Ordering::Relaxed),
        };
        (acc, stats)
    }

    /// Number of accepted maps.
    pub fn count(&self, jobs: usize) -> u64 {
        self.run(jobs, None, Counter::default).0 .0
    }
}

/// Depth-first worker with forward checking. `domains[d]` holds, per
/// pattern vertex, the targets compatible with the first `d` assignments;
/// the next vertex is the unassigned one with the fewest candidates.
#[derive(Clone)]
struct Worker<'s, 'a> {
    search: &'s MapSearch<'a>,
    images: Vec<u32>,
    used: Vec<u64>,
    domains: Vec<Vec<u64>>,
    deadline: Option<Instant>,
    abort: &'s AtomicBool,
    nodes: u64,
}

impl<'s, 'a> Worker<'s, 'a> {
    fn new(search: &'s MapSearch<'a>, deadline: Option<Instant>, abort: &'s AtomicBool) -> Self {
        let count = search.pattern.len();
        let w = search.words;
        let mut all = vec![u64::MAX; w];
        let tail = search.target.len() % 64;
        if tail != 0 {
            all[w - 1] = (1 << tail) - 1;
        }
        let mut domains = vec![vec![0; count * w]; count + 1];
        domains[0] = all.repeat(count);
        Worker {
            search,
            images: vec![u32::MAX; count],
            used: vec![0; w],
            domains,
            deadline,
            abort,
            nodes: 0,
        }
    }

    /// Maps `u` to `t` as assignment number `depth` and writes the narrowed
    /// domains to `domains[depth + 1]`. Returns false if an unassigned
    /// vertex is left without candidates.
    fn assign(&mut self, depth: usize, u: usize, t: u32) -> bool {
        let s = self.search;
        let w = s.words;
        self.images[u] = t;
        self.used[t as usize / 64] |= 1 << (t % 64);
        let (done, rest) = self.domains.split_at_mut(depth + 1);
        let dst = &mut rest[0];
        dst.copy_from_slice(&done[depth]);
        let row = s.target[t as usize].words();
        let neighbours = &s.pattern[u];
        let mut alive = true;
        for v in 0..s.pattern.len() {
            if self.images[v] != u32::MAX {
                continue;
            }
            let dom = &mut dst[v * w..(v + 1) * w];
            if neighbours.contains(v) {
                for (d, r) in dom.iter_mut().zip(row) {
                    *d &= r;
                }
            } else if s.induced {
                for (d, r) in dom.iter_mut().zip(row) {
                    *d &= !r;
                }
            }
            alive &= dom.iter().zip(&self.used).any(|(d, used)| d & !used != 0);
        }
        alive
    }

    #[inline]
    fn unassign(&mut self, u: usize, t: u32) {
        self.images[u] = u32::MAX;
        self.used[t as usize / 64] &= !(1 << (t % 64));
    }

    fn out_of_time(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(CHECK_EVERY) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.abort.store(true, Ordering::Relaxed);
                }
            }
        }
        self.abort.load(Ordering::Relaxed)
    }

    /// Unassigned vertex with the fewest candidates, ties by rank.
    fn choose(&self, depth: usize) -> usize {
        let s = self.search;
        let w = s.words;
        let dom = &self.domains[depth];
        (0..s.pattern.len())
            .filter(|&v| self.images[v] == u32::MAX)
            .min_by_key(|&v| {
                let size: u32 = dom[v * w..(v + 1) * w]
                    .iter()
                    .zip(&self.used)
                    .map(|(d, used)| (d & !used).count_ones())
                    .sum();
                (size, s.rank[v])
            })
            .expect("unassigned vertex")
    }

    fn descend<V: Visitor>(&mut self, depth: usize, visitor: &mut V) {
        if self.out_of_time() {
            return;
        }
        if depth == self.search.pattern.len() {
            visitor.visit(&self.images);
            return;
        }
        let u = self.choose(depth);
        let w = self.search.words;
        for word in 0..w {
            let mut bits = self.domains[depth][u * w + word] & !self.used[word];
            while bits != 0 {
                let t = (word * 64) as u32 + bits.trailing_zeros();
                bits &= bits - 1;
                if self.assign(depth, u, t) {
                    self.descend(depth + 1, visitor);
                }
                self.unassign(u, t);
                if self.abort.load(Ordering::Relaxed) {
                    return;
                }
            }
        }
    }
}
