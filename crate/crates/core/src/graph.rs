//! Structural predicates on signed digraphs: strongly connected components,
//! structural balance, periodicity and block compression.
//!
//! Connectivity ignores signs: an arc `j -> i` exists iff `w_ij != 0`.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::matrix::SignedWeightMatrix;

/// Out-neighbour lists: `out[j]` holds every `i` with `w_ij != 0`.
pub(crate) fn out_adjacency(w: &SignedWeightMatrix) -> Vec<Vec<usize>> {
    let n = w.n();
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        for (j, &v) in w.row(i).iter().enumerate() {
            if v != 0.0 {
                out[j].push(i);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SccDecomposition {
    /// Node sets, each sorted; components ordered by their smallest node.
    pub components: Vec<Vec<usize>>,
    /// `true` for a closed component (no incoming arc from outside).
    pub closed: Vec<bool>,
    pub component_of: Vec<usize>,
}

impl SccDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn closed_count(&self) -> usize {
        self.closed.iter().filter(|&&c| c).count()
    }

    pub fn open_count(&self) -> usize {
        self.len() - self.closed_count()
    }

    pub fn closed_components(&self) -> impl Iterator<Item = &[usize]> {
        self.components
            .iter()
            .zip(&self.closed)
            .filter(|(_, &c)| c)
            .map(|(comp, _)| comp.as_slice())
    }
}

/// Tarjan's lowlink traversal with an explicit call stack.
fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut frames: Vec<(usize, usize)> = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, 0));

        while let Some(&(v, edge)) = frames.last() {
            if let Some(&u) = adj[v].get(edge) {
                frames.last_mut().unwrap().1 += 1;
                if index[u] == UNSEEN {
                    index[u] = counter;
                    low[u] = counter;
                    counter += 1;
                    stack.push(u);
                    on_stack[u] = true;
                    frames.push((u, 0));
                } else if on_stack[u] {
                    low[v] = low[v].min(index[u]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let u = stack.pop().expect("tarjan stack underflow");
                    on_stack[u] = false;
                    comp.push(u);
                    if u == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    components
}

pub fn scc_decompose(w: &SignedWeightMatrix) -> SccDecomposition {
    let n = w.n();
    let adj = out_adjacency(w);
    let mut components = tarjan(&adj);
    components.sort_unstable_by_key(|c| c[0]);

    let mut component_of = vec![0; n];
    for (c, nodes) in components.iter().enumerate() {
        for &v in nodes {
            component_of[v] = c;
        }
    }
    let mut closed = vec![true; components.len()];
    for (from, targets) in adj.iter().enumerate() {
        for &to in targets {
            if component_of[from] != component_of[to] {
                closed[component_of[to]] = false;
            }
        }
    }
    SccDecomposition {
        components,
        closed,
        component_of,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceResult {
    pub balanced: bool,
    /// Witness `(V1, V2)`, present iff balanced. `V2` may be empty.
    pub bipartition: Option<(Vec<usize>, Vec<usize>)>,
}

impl BalanceResult {
    /// Checks the witness edge by edge: nonnegative inside parts,
    /// nonpositive across.
    pub fn witness_holds(&self, w: &SignedWeightMatrix) -> bool {
        let Some((left, right)) = &self.bipartition else {
            return false;
        };
        let n = w.n();
        let mut side = vec![None; n];
        for &v in left {
            side[v] = Some(false);
        }
        for &v in right {
            if side[v].is_some() {
                return false;
            }
            side[v] = Some(true);
        }
        if side.iter().any(Option::is_none) {
            return false;
        }
        (0..n).all(|i| {
            (0..n).all(|j| {
                let v = w.get(i, j);
                if side[i] == side[j] {
                    v >= 0.0
                } else {
                    v <= 0.0
                }
            })
        })
    }
}

/// Sign-consistent two-colouring of the underlying undirected sign graph.
pub fn is_structurally_balanced(w: &SignedWeightMatrix) -> BalanceResult {
    let n = w.n();
    let unbalanced = BalanceResult {
        balanced: false,
        bipartition: None,
    };
    // (neighbour, must_differ)
    let mut nbrs: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            let v = w.get(i, j);
            if v == 0.0 {
                continue;
            }
            if i == j {
                if v < 0.0 {
                    return unbalanced;
                }
                continue;
            }
            nbrs[i].push((j, v < 0.0));
            nbrs[j].push((i, v < 0.0));
        }
    }

    let mut colour: Vec<Option<bool>> = vec![None; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if colour[root].is_some() {
            continue;
        }
        colour[root] = Some(false);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let cu = colour[u].unwrap();
            for &(v, differ) in &nbrs[u] {
                let want = cu ^ differ;
                match colour[v] {
                    None => {
                        colour[v] = Some(want);
                        queue.push_back(v);
                    }
                    Some(c) if c != want => return unbalanced,
                    Some(_) => {}
                }
            }
        }
    }

    let (left, right): (Vec<usize>, Vec<usize>) = (0..n).partition(|&v| colour[v] == Some(false));
    BalanceResult {
        balanced: true,
        bipartition: Some((left, right)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Periodicity {
    /// No directed cycle at all.
    Acyclic,
    /// gcd of all directed cycle lengths.
    Period(u64),
}

impl Periodicity {
    pub fn is_aperiodic(self) -> bool {
        self == Periodicity::Period(1)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// gcd of directed cycle lengths, from BFS levels inside each SCC.
pub fn period(w: &SignedWeightMatrix) -> Periodicity {
    let adj = out_adjacency(w);
    let scc = scc_decompose(w);
    let mut level = vec![usize::MAX; w.n()];
    let mut g = 0u64;
    let mut queue = VecDeque::new();

    for (c, nodes) in scc.components.iter().enumerate() {
        let root = nodes[0];
        level[root] = 0;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if scc.component_of[v] != c {
                    continue;
                }
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    let d = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs();
                    g = gcd(g, d);
                }
            }
        }
    }
    if g == 0 {
        Periodicity::Acyclic
    } else {
        Periodicity::Period(g)
    }
}

/// `false` both for periodic and for acyclic graphs; use [`period`] to tell
/// them apart.
pub fn is_aperiodic(w: &SignedWeightMatrix) -> bool {
    period(w).is_aperiodic()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        for (b, nodes) in blocks.iter().enumerate() {
            if nodes.is_empty() {
                return Err(Error::InvalidInput(format!("block {b} is empty")));
            }
            for &v in nodes {
                if v >= n {
                    return Err(Error::InvalidInput(format!("node {v} out of range")));
                }
                if block_of[v] != usize::MAX {
                    return Err(Error::InvalidInput(format!("node {v} in two blocks")));
                }
                block_of[v] = b;
            }
        }
        if let Some(v) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidInput(format!("node {v} not covered")));
        }
        Ok(Self { blocks, block_of })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|v| vec![v]).collect(),
            block_of: (0..n).collect(),
        }
    }

    /// Layer partition of an augmented system with `n` agents and delay
    /// `tau_d`: block `i` is `{i, n + i, ..., n * tau_d + i}`.
    pub fn layers(n: usize, tau_d: usize) -> Self {
        let size = n * (tau_d + 1);
        Self {
            blocks: (0..n)
                .map(|i| (0..=tau_d).map(|l| l * n + i).collect())
                .collect(),
            block_of: (0..size).map(|v| v % n).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v]
    }

    pub fn node_count(&self) -> usize {
        self.block_of.len()
    }
}

fn check_partition(w: &SignedWeightMatrix, p: &Partition) -> Result<()> {
    if p.node_count() != w.n() {
        return Err(Error::InvalidInput(format!(
            "partition covers {} nodes, graph has {}",
            p.node_count(),
            w.n()
        )));
    }
    Ok(())
}

/// Sign-free compressed graph: entry `(b, a)` is 1 iff some node of block
/// `a` has an arc to some node of block `b`.
pub fn compressed_arcs(w: &SignedWeightMatrix, p: &Partition) -> Result<SignedWeightMatrix> {
    check_partition(w, p)?;
    let mut out = SignedWeightMatrix::zeros(p.len());
    let n = w.n();
    for i in 0..n {
        for j in 0..n {
            if w.get(i, j) != 0.0 {
                out.set(p.block_of(i), p.block_of(j), 1.0);
            }
        }
    }
    Ok(out)
}

/// Signed compressed graph. Each block pair gets `+1` if every arc between
/// them is positive and `-1` if every arc is negative.
pub fn compress(w: &SignedWeightMatrix, p: &Partition) -> Result<SignedWeightMatrix> {
    check_partition(w, p)?;
    let mut out = SignedWeightMatrix::zeros(p.len());
    let n = w.n();
    for i in 0..n {
        for j in 0..n {
            let v = w.get(i, j);
            if v == 0.0 {
                continue;
            }
            let (to, from) = (p.block_of(i), p.block_of(j));
            let s = v.signum();
            match out.get(to, from) {
                0.0 => out.set(to, from, s),
                prev if prev != s => return Err(Error::MixedSignCrossing { from, to }),
                _ => {}
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: Vec<Vec<f64>>) -> SignedWeightMatrix {
        SignedWeightMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn directed_three_cycle_is_one_closed_component() {
        // 0 -> 1 -> 2 -> 0
        let w = m(vec![
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        let scc = scc_decompose(&w);
        assert_eq!(scc.components, vec![vec![0, 1, 2]]);
        assert_eq!(scc.closed, vec![true]);
        assert_eq!(period(&w), Periodicity::Period(3));
    }

    #[test]
    fn edgeless_graph_has_closed_singletons() {
        let scc = scc_decompose(&SignedWeightMatrix::zeros(3));
        assert_eq!(scc.components, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(scc.closed, vec![true; 3]);
        assert_eq!(period(&SignedWeightMatrix::zeros(3)), Periodicity::Acyclic);
        assert!(!is_aperiodic(&SignedWeightMatrix::zeros(3)));
    }

    #[test]
    fn open_component_downstream_of_closed_one() {
        // {0,1} cycle feeds node 2 which has a self-loop.
        let w = m(vec![
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.5],
        ]);
        let scc = scc_decompose(&w);
        assert_eq!(scc.components, vec![vec![0, 1], vec![2]]);
        assert_eq!(scc.closed, vec![true, false]);
        assert_eq!(scc.component_of, vec![0, 0, 1]);
    }

    #[test]
    fn all_positive_is_balanced_with_empty_second_part() {
        let w = m(vec![
            vec![0.0, 0.3, 0.7],
            vec![1.0, 0.0, 0.0],
            vec![0.2, 0.8, 0.0],
        ]);
        let b = is_structurally_balanced(&w);
        assert!(b.balanced);
        assert_eq!(b.bipartition, Some((vec![0, 1, 2], vec![])));
        assert!(b.witness_holds(&w));
    }

    #[test]
    fn digon_with_conflicting_signs_is_unbalanced() {
        let w = m(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let b = is_structurally_balanced(&w);
        assert!(!b.balanced);
        assert!(b.bipartition.is_none());
    }

    #[test]
    fn negative_self_loop_is_unbalanced() {
        let w = m(vec![vec![-1.0]]);
        assert!(!is_structurally_balanced(&w).balanced);
    }

    #[test]
    fn all_negative_two_cycle_is_balanced_across() {
        let w = m(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]);
        let b = is_structurally_balanced(&w);
        assert_eq!(b.bipartition, Some((vec![0], vec![1])));
        assert!(b.witness_holds(&w));
    }

    #[test]
    fn self_loop_makes_strongly_connected_graph_aperiodic() {
        let w = m(vec![vec![0.5, 0.5], vec![1.0, 0.0]]);
        assert!(is_aperiodic(&w));
    }

    #[test]
    fn pure_two_cycle_has_period_two() {
        let w = m(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(period(&w), Periodicity::Period(2));
        assert!(!is_aperiodic(&w));
    }

    #[test]
    fn coprime_cycles_give_aperiodicity() {
        // 0 -> 1 -> 0 and 0 -> 1 -> 2 -> 0
        let w = m(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        assert!(is_aperiodic(&w));
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, vec![vec![0, 1], vec![2]]).is_ok());
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        assert!(Partition::new(2, vec![vec![0, 1, 2]]).is_err());
    }

    #[test]
    fn layer_partition_blocks() {
        let p = Partition::layers(3, 2);
        assert_eq!(p.blocks(), &[vec![0, 3, 6], vec![1, 4, 7], vec![2, 5, 8]]);
        assert_eq!(p.block_of(7), 1);
    }

    #[test]
    fn singleton_compression_is_sign_pattern() {
        let w = m(vec![
            vec![0.5, -0.25, 0.0],
            vec![0.0, 0.0, 2.0],
            vec![-3.0, 0.0, 0.0],
        ]);
        let c = compress(&w, &Partition::singletons(3)).unwrap();
        assert_eq!(c, w.map(|v| if v == 0.0 { 0.0 } else { v.signum() }));
    }

    #[test]
    fn mixed_crossing_is_reported_but_arcs_still_available() {
        // nodes 0,1 in block 0; node 2 in block 1; arcs 0->2 (+) and 1->2 (-)
        let w = m(vec![
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, -1.0, 0.0],
        ]);
        let p = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        assert_eq!(
            compress(&w, &p),
            Err(Error::MixedSignCrossing { from: 0, to: 1 })
        );
        let arcs = compressed_arcs(&w, &p).unwrap();
        assert_eq!(arcs.get(1, 0), 1.0);
        assert_eq!(arcs.get(0, 1), 0.0);
    }
}
