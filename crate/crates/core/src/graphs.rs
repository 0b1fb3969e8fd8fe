//! Directed communication graphs and deterministic time-varying sequences.
//!
//! Edge convention: the pair (i, j) means agent j sends to agent i, so the
//! receiver's mixing row i has a nonzero in column j. Every generator emits a
//! self-loop at every node.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense directed graph on nodes 0..n. `adj[i*n + j]` holds edge (i, j).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    adj: Vec<bool>,
}

impl Digraph {
    /// Graph with no edges at all.
    pub fn empty(n: usize) -> Self {
        Digraph { n, adj: vec![false; n * n] }
    }

    /// Graph with only self-loops.
    pub fn loops_only(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            g.add_edge(i, i);
        }
        g
    }

    /// Complete digraph including self-loops.
    pub fn complete(n: usize) -> Self {
        Digraph { n, adj: vec![true; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Inserts edge (receiver, sender).
    pub fn add_edge(&mut self, receiver: usize, sender: usize) {
        self.adj[receiver * self.n + sender] = true;
    }

    pub fn has_edge(&self, receiver: usize, sender: usize) -> bool {
        self.adj[receiver * self.n + sender]
    }

    /// Number of senders reaching node i, self-loop included.
    pub fn in_degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.has_edge(i, j)).count()
    }

    /// Number of receivers fed by node j, self-loop included.
    pub fn out_degree(&self, j: usize) -> usize {
        (0..self.n).filter(|&i| self.has_edge(i, j)).count()
    }

    /// All edges as (receiver, sender) pairs in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n * n).filter(|idx| self.adj[*idx]).map(move |idx| (idx / n, idx % n))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count()
    }

    pub fn has_all_self_loops(&self) -> bool {
        (0..self.n).all(|i| self.has_edge(i, i))
    }

    /// Edge-wise union of two graphs on the same node set.
    pub fn union(&self, other: &Digraph) -> Result<Digraph> {
        if self.n != other.n {
            return Err(Error::Dimension {
                what: format!("union of graphs on {} and {} nodes", self.n, other.n),
            });
        }
        let adj = self
            .adj
            .iter()
            .zip(other.adj.iter())
            .map(|(a, b)| *a || *b)
            .collect();
        Ok(Digraph { n: self.n, adj })
    }

    /// True iff every node reaches every other along directed edges.
    ///
    /// A single-SCC test only needs reachability from one node in both edge
    /// directions, so two breadth-first sweeps suffice.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        self.reaches_all(false) && self.reaches_all(true)
    }

    fn reaches_all(&self, reversed: bool) -> bool {
        let n = self.n;
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1usize;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                // Forward direction follows sender -> receiver.
                let connected = if reversed { self.has_edge(v, w) } else { self.has_edge(w, v) };
                if connected && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }
}

/// Random strongly connected digraph: a directed Hamiltonian cycle over a
/// random node order, independent extra edges, and self-loops.
fn random_strongly_connected(nodes: &[usize], n: usize, extra_prob: f64, rng: &mut ChaCha8Rng) -> Digraph {
    let mut g = Digraph::loops_only(n);
    let mut order: Vec<usize> = nodes.to_vec();
    order.shuffle(rng);
    for w in 0..order.len() {
        let sender = order[w];
        let receiver = order[(w + 1) % order.len()];
        if sender != receiver {
            g.add_edge(receiver, sender);
        }
    }
    for &s in nodes {
        for &r in nodes {
            if s != r && rng.random::<f64>() < extra_prob {
                g.add_edge(r, s);
            }
        }
    }
    g
}

/// Independent RNG stream `k` derived from one base seed.
pub fn stream_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Deterministic infinite sequence of communication graphs.
#[derive(Debug, Clone)]
pub enum GraphSequence {
    /// Same graph at every step.
    Static(Digraph),
    /// Cycles through the given list.
    Periodic(Vec<Digraph>),
    /// Statically partitioned clusters, each internally strongly connected at
    /// every step; an inter-cluster ring activates whenever k % c == 0.
    Clustered {
        n: usize,
        c: usize,
        intra: Digraph,
        inter: Vec<(usize, usize)>,
    },
    /// Self-loops only, except a fresh random strongly connected graph
    /// whenever k % c == 0.
    RandomCBounded { n: usize, c: usize, seed: u64 },
    /// Self-loops plus exactly one random directed edge per step.
    Gossip { n: usize, seed: u64 },
}

impl GraphSequence {
    pub fn n(&self) -> usize {
        match self {
            GraphSequence::Static(g) => g.n(),
            GraphSequence::Periodic(gs) => gs[0].n(),
            GraphSequence::Clustered { n, .. } => *n,
            GraphSequence::RandomCBounded { n, .. } => *n,
            GraphSequence::Gossip { n, .. } => *n,
        }
    }

    /// Graph active at step k. Pure in (self, k).
    pub fn graph_at(&self, k: usize) -> Digraph {
        match self {
            GraphSequence::Static(g) => g.clone(),
            GraphSequence::Periodic(gs) => gs[k % gs.len()].clone(),
            GraphSequence::Clustered { c, intra, inter, .. } => {
                let mut g = intra.clone();
                if k % c == 0 {
                    for &(receiver, sender) in inter {
                        g.add_edge(receiver, sender);
                    }
                }
                g
            }
            GraphSequence::RandomCBounded { n, c, seed } => {
                if k % c == 0 {
                    let nodes: Vec<usize> = (0..*n).collect();
                    let mut rng = stream_rng(*seed, k);
                    random_strongly_connected(&nodes, *n, 0.2, &mut rng)
                } else {
                    Digraph::loops_only(*n)
                }
            }
            GraphSequence::Gossip { n, seed } => {
                let mut g = Digraph::loops_only(*n);
                if *n > 1 {
                    let mut rng = stream_rng(*seed, k);
                    let sender = rng.random_range(0..*n);
                    let mut receiver = rng.random_range(0..*n - 1);
                    if receiver >= sender {
                        receiver += 1;
                    }
                    g.add_edge(receiver, sender);
                }
                g
            }
        }
    }

    /// Periodic sequence splitting the directed n-cycle into `phases`
    /// contiguous arc groups; the union over one period is the full cycle.
    pub fn cycle_split(n: usize, phases: usize) -> Result<GraphSequence> {
        if n == 0 || phases == 0 {
            return Err(Error::Config("cycle_split needs n >= 1 and phases >= 1".into()));
        }
        let mut graphs = Vec::with_capacity(phases);
        let chunk = n.div_ceil(phases);
        for ph in 0..phases {
            let mut g = Digraph::loops_only(n);
            let lo = (ph * chunk).min(n);
            let hi = ((ph + 1) * chunk).min(n);
            for t in lo..hi {
                let sender = t;
                let receiver = (t + 1) % n;
                if sender != receiver {
                    g.add_edge(receiver, sender);
                }
            }
            graphs.push(g);
        }
        Ok(GraphSequence::Periodic(graphs))
    }

    pub fn random_c_bounded(n: usize, c: usize, seed: u64) -> Result<GraphSequence> {
        if n == 0 || c == 0 {
            return Err(Error::Config("random_c_bounded needs n >= 1 and c >= 1".into()));
        }
        Ok(GraphSequence::RandomCBounded { n, c, seed })
    }

    pub fn gossip(n: usize, seed: u64) -> Result<GraphSequence> {
        if n == 0 {
            return Err(Error::Config("gossip needs n >= 1".into()));
        }
        Ok(GraphSequence::Gossip { n, seed })
    }
}

/// Clustered sequence: `n_clusters` blocks of `cluster_size` nodes. Each block
/// gets a static random strongly connected internal graph; a directed ring
/// over blocks (one random sender/receiver pair per hop) activates at
/// k % c == 0.
pub fn make_clustered(n_clusters: usize, cluster_size: usize, c: usize, seed: u64) -> Result<GraphSequence> {
    if n_clusters == 0 || cluster_size == 0 || c == 0 {
        return Err(Error::Config(
            "make_clustered needs n_clusters >= 1, cluster_size >= 1, c >= 1".into(),
        ));
    }
    let n = n_clusters * cluster_size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut intra = Digraph::loops_only(n);
    for cl in 0..n_clusters {
        let nodes: Vec<usize> = (cl * cluster_size..(cl + 1) * cluster_size).collect();
        let g = random_strongly_connected(&nodes, n, 0.3, &mut rng);
        for (r, s) in g.edges() {
            intra.add_edge(r, s);
        }
    }
    let mut inter = Vec::new();
    if n_clusters > 1 {
        for cl in 0..n_clusters {
            let next = (cl + 1) % n_clusters;
            let sender = cl * cluster_size + rng.random_range(0..cluster_size);
            let receiver = next * cluster_size + rng.random_range(0..cluster_size);
            inter.push((receiver, sender));
        }
    }
    Ok(GraphSequence::Clustered { n, c, intra, inter })
}

/// Verifies that the union of every window of `c` consecutive graphs in
/// [0, horizon] is strongly connected.
pub fn check_c_bounded(seq: &GraphSequence, c: usize, horizon: usize) -> Result<()> {
    if c == 0 {
        return Err(Error::Config("check_c_bounded needs c >= 1".into()));
    }
    if horizon + 1 < c {
        return Err(Error::Config(format!(
            "horizon {} is shorter than one window of {} graphs",
            horizon, c
        )));
    }
    for start in 0..=(horizon + 1 - c) {
        let mut u = seq.graph_at(start);
        for k in (start + 1)..(start + c) {
            u = u.union(&seq.graph_at(k))?;
        }
        if !u.is_strongly_connected() {
            return Err(Error::WindowNotConnected { start });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_count_self_loops() {
        // Edges: loops at 1 and 2 plus (2, 1), i.e. node 1 sends to node 2,
        // written 0-based as loops at 0 and 1 plus (1, 0).
        let mut g = Digraph::loops_only(2);
        g.add_edge(1, 0);
        assert_eq!(g.in_degree(0), 1);
        assert_eq!(g.in_degree(1), 2);
        assert_eq!(g.out_degree(0), 2);
        assert_eq!(g.out_degree(1), 1);
    }

    #[test]
    fn union_is_commutative_and_idempotent() {
        let mut a = Digraph::loops_only(3);
        a.add_edge(1, 0);
        let mut b = Digraph::loops_only(3);
        b.add_edge(2, 1);
        assert_eq!(a.union(&b).unwrap(), b.union(&a).unwrap());
        assert_eq!(a.union(&a).unwrap(), a);
    }

    #[test]
    fn union_rejects_mismatched_sizes() {
        let a = Digraph::loops_only(2);
        let b = Digraph::loops_only(3);
        assert!(a.union(&b).is_err());
    }

    #[test]
    fn strong_connectivity_on_cycle_and_path() {
        let mut cycle = Digraph::loops_only(4);
        for t in 0..4 {
            cycle.add_edge((t + 1) % 4, t);
        }
        assert!(cycle.is_strongly_connected());

        let mut path = Digraph::loops_only(3);
        path.add_edge(1, 0);
        path.add_edge(2, 1);
        assert!(!path.is_strongly_connected());

        assert!(!Digraph::loops_only(2).is_strongly_connected());
        assert!(Digraph::loops_only(1).is_strongly_connected());
    }

    #[test]
    fn cycle_split_unions_to_full_cycle() {
        let seq = GraphSequence::cycle_split(8, 4).unwrap();
        check_c_bounded(&seq, 4, 20).unwrap();
        // Three phases never cover all arcs, so some window must fail.
        assert!(check_c_bounded(&seq, 3, 20).is_err());
    }

    #[test]
    fn cycle_split_each_phase_has_self_loops() {
        let seq = GraphSequence::cycle_split(10, 4).unwrap();
        for k in 0..8 {
            assert!(seq.graph_at(k).has_all_self_loops());
        }
    }

    #[test]
    fn random_c_bounded_windows_connect() {
        let seq = GraphSequence::random_c_bounded(6, 3, 11).unwrap();
        check_c_bounded(&seq, 3, 30).unwrap();
        // Off-phase steps carry no mixing edges.
        assert_eq!(seq.graph_at(1).edge_count(), 6);
    }

    #[test]
    fn random_c_bounded_every_step_when_c_is_one() {
        let seq = GraphSequence::random_c_bounded(5, 1, 3).unwrap();
        check_c_bounded(&seq, 1, 12).unwrap();
    }

    #[test]
    fn gossip_has_exactly_one_extra_edge() {
        let seq = GraphSequence::gossip(10, 21).unwrap();
        for k in 0..50 {
            let g = seq.graph_at(k);
            assert!(g.has_all_self_loops());
            assert_eq!(g.edge_count(), 11);
        }
    }

    #[test]
    fn sequences_are_deterministic_in_seed_and_step() {
        let a = GraphSequence::gossip(7, 5).unwrap();
        let b = GraphSequence::gossip(7, 5).unwrap();
        let other = GraphSequence::gossip(7, 6).unwrap();
        let mut any_differs = false;
        for k in 0..40 {
            assert_eq!(a.graph_at(k), b.graph_at(k));
            any_differs |= a.graph_at(k) != other.graph_at(k);
        }
        assert!(any_differs);
    }

    #[test]
    fn clustered_single_cluster_is_static_and_connected() {
        let seq = make_clustered(1, 4, 1, 9).unwrap();
        let g0 = seq.graph_at(0);
        assert!(g0.is_strongly_connected());
        for k in 1..10 {
            assert_eq!(seq.graph_at(k), g0);
        }
    }

    #[test]
    fn clustered_connects_once_per_window() {
        let seq = make_clustered(2, 3, 5, 13).unwrap();
        check_c_bounded(&seq, 5, 25).unwrap();
        // Between activations the graph splits into two components; the
        // activation instant alone restores strong connectivity.
        assert!(!seq.graph_at(1).is_strongly_connected());
        assert!(seq.graph_at(5).is_strongly_connected());
    }

    #[test]
    fn clustered_five_blocks_of_twelve_is_fifty_bounded() {
        let seq = make_clustered(5, 12, 50, 2).unwrap();
        assert_eq!(seq.n(), 60);
        check_c_bounded(&seq, 50, 120).unwrap();
    }
}
