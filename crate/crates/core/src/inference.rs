//! Exact posterior beliefs on causal trees given a full leaf observation.
//!
//! [`propagate`] is the two-pass λ/π message-passing scheme: an upward pass
//! collects the likelihood each subtree assigns to its root, a downward pass
//! distributes prior support, and node beliefs and parent–child joint
//! posteriors fall out as normalized products. Total work is linear in the
//! number of nodes. [`brute_force_posterior`] computes the same quantities by
//! enumeration and serves as the test oracle.

use crate::error::{Error, Result};
use crate::tree_model::{check_cap, joint_of_mask, CausalTree, LeafSample, NodeId, DEFAULT_ENUMERATION_CAP};

/// Below this posterior mass a conditioning event is treated as impossible.
pub const DEFAULT_CONDITIONAL_FLOOR: f64 = 1e-12;

/// Posterior table `P(w = i, z = j | D)`, indexed `[i][j]`.
pub type EdgeTable = [[f64; 2]; 2];

/// Posteriors for one observed leaf vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    node_belief: Vec<f64>,
    edge_posterior: Vec<Option<EdgeTable>>,
    evidence_probability: f64,
}

impl BeliefState {
    /// `Bel(node = 1) = P(node = 1 | D)`.
    pub fn belief(&self, node: NodeId) -> f64 {
        self.node_belief[node.0]
    }

    pub fn node_beliefs(&self) -> &[f64] {
        &self.node_belief
    }

    /// Joint posterior of `z` and its parent; `None` for the root.
    pub fn edge_posterior(&self, z: NodeId) -> Option<&EdgeTable> {
        self.edge_posterior.get(z.0).and_then(Option::as_ref)
    }

    /// `P(D)` under the tree the state was computed from.
    pub fn evidence_probability(&self) -> f64 {
        self.evidence_probability
    }
}

/// `P(w = 1 | z = j, D)` for one edge `w -> z`; absent when `P(z = j | D)`
/// falls below the floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeConditionals {
    pub p_w1_given_z1: Option<f64>,
    pub p_w1_given_z0: Option<f64>,
}

pub fn propagate(tree: &CausalTree, sample: &LeafSample) -> Result<BeliefState> {
    let s = tree.structure();
    sample.check(s)?;
    let mut evidence = vec![None; s.node_count()];
    for (leaf, &v) in s.leaves().iter().zip(sample.values()) {
        evidence[leaf.0] = Some(v);
    }
    propagate_evidence(tree, &evidence)
}

#[inline]
fn mul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0], a[1] * b[1]]
}

/// Message passing with optional evidence on any node. Unobserved leaves
/// contribute a flat likelihood.
pub(crate) fn propagate_evidence(
    tree: &CausalTree,
    evidence: &[Option<bool>],
) -> Result<BeliefState> {
    let s = tree.structure();
    let n = s.node_count();
    debug_assert_eq!(evidence.len(), n);
    let indicator = |node: NodeId| match evidence[node.0] {
        Some(true) => [0.0, 1.0],
        Some(false) => [1.0, 0.0],
        None => [1.0, 1.0],
    };

    // Upward: lambda[u] is the likelihood of u's subtree evidence given u,
    // up[u] the message u sends to its parent.
    let mut lambda = vec![[1.0; 2]; n];
    let mut up = vec![[1.0; 2]; n];
    for &u in s.preorder().iter().rev() {
        let lam = s
            .children(u)
            .iter()
            .fold(indicator(u), |acc, c| mul(acc, up[c.0]));
        lambda[u.0] = lam;
        if let Some(link) = tree.link(u) {
            up[u.0] = [
                (1.0 - link.g) * lam[0] + link.g * lam[1],
                (1.0 - link.f) * lam[0] + link.f * lam[1],
            ];
        }
    }

    let root = s.root();
    let alpha = tree.alpha();
    let mut pi = vec![[0.0; 2]; n];
    pi[root.0] = [1.0 - alpha, alpha];
    let evidence_probability = pi[root.0][0] * lambda[root.0][0] + pi[root.0][1] * lambda[root.0][1];
    if !(evidence_probability > 0.0) {
        return Err(Error::ZeroEvidence);
    }

    // Downward: the message to child z carries w's support and the evidence
    // from every subtree of w except z's own.
    let mut edge_posterior = vec![None; n];
    let mut suffix: Vec<[f64; 2]> = Vec::new();
    for &w in s.preorder() {
        let children = s.children(w);
        if children.is_empty() {
            continue;
        }
        suffix.clear();
        suffix.resize(children.len() + 1, [1.0; 2]);
        for (k, c) in children.iter().enumerate().rev() {
            suffix[k] = mul(suffix[k + 1], up[c.0]);
        }
        let mut prefix = mul(pi[w.0], indicator(w));
        for (k, &z) in children.iter().enumerate() {
            let to_child = mul(prefix, suffix[k + 1]);
            let m = tree.link_into(z).matrix();
            let mut table = [[0.0; 2]; 2];
            let mut total = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let v = to_child[i] * m[i][j] * lambda[z.0][j];
                    table[i][j] = v;
                    total += v;
                }
            }
            for row in &mut table {
                for v in row.iter_mut() {
                    *v /= total;
                }
            }
            edge_posterior[z.0] = Some(table);
            pi[z.0] = [
                to_child[0] * m[0][0] + to_child[1] * m[1][0],
                to_child[0] * m[0][1] + to_child[1] * m[1][1],
            ];
            prefix = mul(prefix, up[z.0]);
        }
    }

    let node_belief = (0..n)
        .map(|u| {
            let b = mul(pi[u], lambda[u]);
            b[1] / (b[0] + b[1])
        })
        .collect();

    Ok(BeliefState {
        node_belief,
        edge_posterior,
        evidence_probability,
    })
}

/// Posteriors by summing the joint over every hidden configuration.
pub fn brute_force_posterior(tree: &CausalTree, sample: &LeafSample) -> Result<BeliefState> {
    brute_force_posterior_capped(tree, sample, DEFAULT_ENUMERATION_CAP)
}

pub fn brute_force_posterior_capped(
    tree: &CausalTree,
    sample: &LeafSample,
    cap: usize,
) -> Result<BeliefState> {
    let s = tree.structure();
    check_cap(s, cap)?;
    sample.check(s)?;
    let n = s.node_count();
    let (mut fixed_mask, mut fixed_bits) = (0u64, 0u64);
    for (leaf, &v) in s.leaves().iter().zip(sample.values()) {
        fixed_mask |= 1 << leaf.0;
        fixed_bits |= u64::from(v) << leaf.0;
    }

    let mut total = 0.0;
    let mut ones = vec![0.0; n];
    let mut edges = vec![[[0.0; 2]; 2]; n];
    for mask in 0..(1u64 << n) {
        if mask & fixed_mask != fixed_bits {
            continue;
        }
        let p = joint_of_mask(tree, mask);
        total += p;
        for u in 0..n {
            if mask >> u & 1 == 1 {
                ones[u] += p;
            }
        }
        for (w, z) in s.edges() {
            let i = (mask >> w.0 & 1) as usize;
            let j = (mask >> z.0 & 1) as usize;
            edges[z.0][i][j] += p;
        }
    }
    if !(total > 0.0) {
        return Err(Error::ZeroEvidence);
    }

    let mut edge_posterior = vec![None; n];
    for (_, z) in s.edges() {
        let mut t = edges[z.0];
        for row in &mut t {
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        edge_posterior[z.0] = Some(t);
    }
    Ok(BeliefState {
        node_belief: ones.into_iter().map(|p| p / total).collect(),
        edge_posterior,
        evidence_probability: total,
    })
}

/// Conditional beliefs `P(w = 1 | z = j, D)` for the edge into `z`.
pub fn edge_conditionals(beliefs: &BeliefState, z: NodeId, floor: f64) -> Result<EdgeConditionals> {
    if z.0 >= beliefs.node_belief.len() {
        return Err(Error::UnknownNode(z));
    }
    let t = beliefs.edge_posterior(z).ok_or(Error::RootHasNoLink(z))?;
    let conditional = |j: usize| {
        let denom = t[0][j] + t[1][j];
        (denom >= floor).then(|| t[1][j] / denom)
    };
    Ok(EdgeConditionals {
        p_w1_given_z1: conditional(1),
        p_w1_given_z0: conditional(0),
    })
}

/// Sum of `ln P(D)` over the samples; negative infinity if any sample is
/// impossible under the tree.
pub fn log_likelihood<'a>(
    tree: &CausalTree,
    samples: impl IntoIterator<Item = &'a LeafSample>,
) -> Result<f64> {
    let mut total = 0.0;
    for sample in samples {
        match propagate(tree, sample) {
            Ok(b) => total += b.evidence_probability().ln(),
            Err(Error::ZeroEvidence) => return Ok(f64::NEG_INFINITY),
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_model::{exact_marginals, leaf_distribution, LinkParams, TreeStructure};
    use std::collections::BTreeMap;

    fn star3() -> CausalTree {
        let links = [(0.9, 0.2), (0.8, 0.1), (0.7, 0.3)]
            .iter()
            .enumerate()
            .map(|(i, &(f, g))| (NodeId(i + 1), LinkParams::new(f, g)))
            .collect();
        CausalTree::new(TreeStructure::star(3), 0.6, links).unwrap()
    }

    fn sample(bits: &[u8]) -> LeafSample {
        LeafSample::new(bits.iter().map(|&b| b == 1).collect())
    }

    fn assert_states_close(a: &BeliefState, b: &BeliefState, tol: f64) {
        for (x, y) in a.node_beliefs().iter().zip(b.node_beliefs()) {
            assert!((x - y).abs() <= tol, "belief {x} vs {y}");
        }
        for (x, y) in a.edge_posterior.iter().zip(&b.edge_posterior) {
            match (x, y) {
                (Some(x), Some(y)) => {
                    for i in 0..2 {
                        for j in 0..2 {
                            assert!((x[i][j] - y[i][j]).abs() <= tol);
                        }
                    }
                }
                (None, None) => {}
                _ => panic!("edge presence differs"),
            }
        }
        assert!((a.evidence_probability() - b.evidence_probability()).abs() <= tol);
    }

    #[test]
    fn no_evidence_gives_prior_at_root() {
        let tree = star3();
        let b = propagate_evidence(&tree, &[None; 4]).unwrap();
        assert!((b.belief(NodeId(0)) - 0.6).abs() < 1e-15);
        let marginals = exact_marginals(&tree);
        for u in 0..4 {
            assert!((b.belief(NodeId(u)) - marginals[u]).abs() < 1e-15);
        }
        assert!((b.evidence_probability() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_step_bayes_rule() {
        let tree = CausalTree::uniform(TreeStructure::star(1), 0.5, LinkParams::new(0.8, 0.2));
        let b = propagate(&tree, &sample(&[1])).unwrap();
        assert!((b.belief(NodeId(0)) - 0.8).abs() < 1e-15);
        assert_eq!(b.belief(NodeId(1)), 1.0);
        assert!((b.evidence_probability() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn star3_matches_enumeration_over_root() {
        let tree = star3();
        let d = sample(&[1, 1, 0]);
        let b = propagate(&tree, &d).unwrap();
        // P(r, D) for r = 1 and r = 0
        let p1 = 0.6 * 0.9 * 0.8 * (1.0 - 0.7);
        let p0 = 0.4 * 0.2 * 0.1 * (1.0 - 0.3);
        let pd = p1 + p0;
        assert!((b.evidence_probability() - pd).abs() < 1e-15);
        assert!((b.belief(NodeId(0)) - p1 / pd).abs() < 1e-12);
        let t = b.edge_posterior(NodeId(3)).unwrap();
        assert!((t[1][0] - p1 / pd).abs() < 1e-12);
        assert!((t[0][0] - p0 / pd).abs() < 1e-12);
        assert_eq!(t[0][1], 0.0);
        assert_eq!(t[1][1], 0.0);
        assert_states_close(&b, &brute_force_posterior(&tree, &d).unwrap(), 1e-12);

        let c = edge_conditionals(&b, NodeId(1), DEFAULT_CONDITIONAL_FLOOR).unwrap();
        assert!((c.p_w1_given_z1.unwrap() - p1 / pd).abs() < 1e-12);
        assert_eq!(c.p_w1_given_z0, None);
    }

    #[test]
    fn two_node_cases_match_oracle() {
        for &(alpha, f, g) in &[(0.5, 0.8, 0.2), (0.1, 0.3, 0.95), (0.99, 0.5, 0.5)] {
            let tree = CausalTree::uniform(TreeStructure::star(1), alpha, LinkParams::new(f, g));
            for v in [0, 1] {
                let d = sample(&[v]);
                assert_states_close(
                    &propagate(&tree, &d).unwrap(),
                    &brute_force_posterior(&tree, &d).unwrap(),
                    1e-12,
                );
            }
        }
    }

    #[test]
    fn deterministic_tree_all_ones() {
        let s = TreeStructure::from_parents(&[None, Some(0), Some(0), Some(1), Some(1)]).unwrap();
        let tree = CausalTree::uniform(s, 0.5, LinkParams::new(1.0, 0.0));
        let d = sample(&[1, 1, 1]);
        for b in [
            propagate(&tree, &d).unwrap(),
            brute_force_posterior(&tree, &d).unwrap(),
        ] {
            assert!(b.node_beliefs().iter().all(|&p| p == 1.0));
        }
        let bad = sample(&[1, 0, 1]);
        assert!(matches!(propagate(&tree, &bad), Err(Error::ZeroEvidence)));
        assert!(matches!(brute_force_posterior(&tree, &bad), Err(Error::ZeroEvidence)));
    }

    #[test]
    fn deterministic_inversion() {
        // root -> hidden 1 -> leaves 2, 3 with noisy leaf links; both values
        // of node 1 remain possible.
        let s = TreeStructure::from_parents(&[None, Some(0), Some(1), Some(1)]).unwrap();
        let links: BTreeMap<_, _> = [
            (NodeId(1), LinkParams::new(1.0, 0.0)),
            (NodeId(2), LinkParams::new(0.7, 0.2)),
            (NodeId(3), LinkParams::new(0.6, 0.3)),
        ]
        .into_iter()
        .collect();
        let tree = CausalTree::new(s, 0.4, links).unwrap();
        let b = propagate(&tree, &sample(&[1, 0])).unwrap();
        let c = edge_conditionals(&b, NodeId(1), DEFAULT_CONDITIONAL_FLOOR).unwrap();
        assert_eq!(c.p_w1_given_z1, Some(1.0));
        assert_eq!(c.p_w1_given_z0, Some(0.0));
    }

    #[test]
    fn independent_link_conditionals_equal_belief() {
        let s = TreeStructure::from_parents(&[None, Some(0), Some(0), Some(1), Some(1)]).unwrap();
        let links: BTreeMap<_, _> = [
            (NodeId(1), LinkParams::new(0.4, 0.4)),
            (NodeId(2), LinkParams::new(0.9, 0.2)),
            (NodeId(3), LinkParams::new(0.7, 0.1)),
            (NodeId(4), LinkParams::new(0.8, 0.35)),
        ]
        .into_iter()
        .collect();
        let tree = CausalTree::new(s, 0.3, links).unwrap();
        let b = propagate(&tree, &sample(&[1, 0, 1])).unwrap();
        let c = edge_conditionals(&b, NodeId(1), DEFAULT_CONDITIONAL_FLOOR).unwrap();
        let root = b.belief(NodeId(0));
        assert!((c.p_w1_given_z1.unwrap() - root).abs() < 1e-12);
        assert!((c.p_w1_given_z0.unwrap() - root).abs() < 1e-12);
    }

    #[test]
    fn conditionals_reject_root_and_unknown() {
        let b = propagate(&star3(), &sample(&[0, 0, 0])).unwrap();
        assert!(matches!(
            edge_conditionals(&b, NodeId(0), 1e-12),
            Err(Error::RootHasNoLink(_))
        ));
        assert!(matches!(
            edge_conditionals(&b, NodeId(9), 1e-12),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn evidence_matches_leaf_distribution() {
        let tree = star3();
        for (d, p) in leaf_distribution(&tree).unwrap() {
            let b = propagate(&tree, &d).unwrap();
            assert!((b.evidence_probability() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn log_likelihood_examples() {
        let single = CausalTree::new(TreeStructure::star(0), 0.3, BTreeMap::new()).unwrap();
        let one = sample(&[1]);
        let ll = log_likelihood(&single, [&one]).unwrap();
        assert!((ll - 0.3f64.ln()).abs() < 1e-15);
        let ll2 = log_likelihood(&single, [&one, &one]).unwrap();
        assert!((ll2 - 2.0 * ll).abs() < 1e-15);

        let det = CausalTree::uniform(TreeStructure::star(2), 0.5, LinkParams::new(1.0, 0.0));
        let ll = log_likelihood(&det, [&sample(&[1, 1]), &sample(&[0, 1])]).unwrap();
        assert_eq!(ll, f64::NEG_INFINITY);
    }

    #[test]
    fn wrong_sample_width_is_an_error() {
        assert!(matches!(
            propagate(&star3(), &sample(&[1, 0])),
            Err(Error::LeafSampleSize { expected: 3, got: 2 })
        ));
    }
}
