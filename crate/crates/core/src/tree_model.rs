//! Binary causal trees: structure, link parameters and the joint distribution
//! they induce.
//!
//! Every node is a binary variable. The root carries a prior `alpha =
//! P(root = 1)`; every other node `z` with parent `w` carries a link
//! `(f, g)` with `f = P(z = 1 | w = 1)` and `g = P(z = 1 | w = 0)`. Leaves
//! are the observable nodes, everything else is hidden.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tree (in nodes) the enumeration oracles accept by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Dense node index in `0..node_count`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shape of a rooted tree with canonical (ascending) child order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeStructure {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    leaves: Vec<NodeId>,
    leaf_slot: Vec<Option<usize>>,
    preorder: Vec<NodeId>,
}

impl TreeStructure {
    /// Builds a structure from a parent table: `parents[i]` is the parent of
    /// node `i`, `None` for the root.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        let n = parents.len();
        if n == 0 {
            return Err(Error::Structure("tree has no nodes".into()));
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::Structure(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        }
        let root = NodeId(roots[0]);
        let mut children = vec![Vec::new(); n];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::Structure(format!(
                        "node {i} has parent {p}, which does not exist"
                    )));
                }
                if p == i {
                    return Err(Error::Structure(format!("node {i} is its own parent")));
                }
                children[p].push(NodeId(i));
            }
        }
        for list in &mut children {
            list.sort_unstable();
        }

        // Depth-first preorder, children visited ascending.
        let mut preorder = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            preorder.push(node);
            stack.extend(children[node.0].iter().rev().copied());
        }
        if preorder.len() != n {
            return Err(Error::Structure(format!(
                "only {} of {} nodes are reachable from the root (cycle or disconnected part)",
                preorder.len(),
                n
            )));
        }

        let leaves: Vec<NodeId> = (0..n)
            .filter(|&i| children[i].is_empty())
            .map(NodeId)
            .collect();
        let mut leaf_slot = vec![None; n];
        for (slot, leaf) in leaves.iter().enumerate() {
            leaf_slot[leaf.0] = Some(slot);
        }

        Ok(Self {
            root,
            parent: parents.iter().map(|p| p.map(NodeId)).collect(),
            children,
            leaves,
            leaf_slot,
            preorder,
        })
    }

    /// A root with `k` leaf children (`k = 0` gives the single-node tree).
    pub fn star(k: usize) -> Self {
        let parents: Vec<Option<usize>> = std::iter::once(None)
            .chain((0..k).map(|_| Some(0)))
            .collect();
        Self::from_parents(&parents).expect("star is a valid tree")
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent[node.0]
    }

    pub fn children(&self, node: NodeId) -> &[NodeId] {
        &self.children[node.0]
    }

    /// Leaves in ascending order.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.leaf_slot[node.0].is_some()
    }

    /// Position of `node` within [`leaves`](Self::leaves), if it is a leaf.
    pub fn leaf_slot(&self, node: NodeId) -> Option<usize> {
        self.leaf_slot[node.0]
    }

    /// Hidden (non-leaf) nodes in ascending order.
    pub fn hidden(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&n| !self.is_leaf(n))
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId)
    }

    /// Non-root nodes in ascending order; each one names the edge from its parent.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .filter_map(|z| self.parent(z).map(|w| (w, z)))
    }

    /// Root first, then children depth-first in ascending order.
    pub fn preorder(&self) -> &[NodeId] {
        &self.preorder
    }

    /// Number of neighbours (parent plus children).
    pub fn degree(&self, node: NodeId) -> usize {
        self.children[node.0].len() + usize::from(self.parent[node.0].is_some())
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 < self.node_count()
    }

    fn check_node(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    /// Parent table in the form accepted by [`from_parents`](Self::from_parents).
    pub fn parent_table(&self) -> Vec<Option<usize>> {
        self.parent.iter().map(|p| p.map(|p| p.0)).collect()
    }
}

/// `f = P(child = 1 | parent = 1)`, `g = P(child = 1 | parent = 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub f: f64,
    pub g: f64,
}

impl LinkParams {
    pub fn new(f: f64, g: f64) -> Self {
        Self { f, g }
    }

    /// `P(child = 1 | parent)`.
    #[inline]
    pub fn p_one(&self, parent: bool) -> f64 {
        if parent {
            self.f
        } else {
            self.g
        }
    }

    /// `P(child | parent)`.
    #[inline]
    pub fn prob(&self, parent: bool, child: bool) -> f64 {
        let p = self.p_one(parent);
        if child {
            p
        } else {
            1.0 - p
        }
    }

    /// Rows indexed by parent value, columns by child value.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.g, self.g], [1.0 - self.f, self.f]]
    }
}

/// A tree structure together with its root prior and link parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalTree {
    structure: TreeStructure,
    alpha: f64,
    links: Vec<Option<LinkParams>>,
}

impl CausalTree {
    /// Assembles a tree. Every non-root node needs exactly one link and the
    /// root none; parameter ranges are not checked here (see [`validate`]).
    pub fn new(
        structure: TreeStructure,
        alpha: f64,
        links: BTreeMap<NodeId, LinkParams>,
    ) -> Result<Self> {
        let mut dense = vec![None; structure.node_count()];
        for (node, link) in links {
            structure.check_node(node)?;
            if node == structure.root() {
                return Err(Error::RootHasNoLink(node));
            }
            dense[node.0] = Some(link);
        }
        if let Some((_, z)) = structure.edges().find(|&(_, z)| dense[z.0].is_none()) {
            return Err(Error::Structure(format!("no link parameters for node {z}")));
        }
        Ok(Self {
            structure,
            alpha,
            links: dense,
        })
    }

    /// Like [`new`](Self::new) but also rejects any validation violation.
    pub fn validated(
        structure: TreeStructure,
        alpha: f64,
        links: BTreeMap<NodeId, LinkParams>,
    ) -> Result<Self> {
        let tree = Self::new(structure, alpha, links)?;
        let report = validate(&tree);
        if report.is_valid() {
            Ok(tree)
        } else {
            Err(Error::Invalid(
                report.violations.iter().map(|d| d.to_string()).collect(),
            ))
        }
    }

    /// Same structure, every link set to `link`.
    pub fn uniform(structure: TreeStructure, alpha: f64, link: LinkParams) -> Self {
        let links = structure.edges().map(|(_, z)| (z, link)).collect();
        Self::new(structure, alpha, links).expect("every edge has a link")
    }

    pub fn structure(&self) -> &TreeStructure {
        &self.structure
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Link into `node`; `None` for the root or an unknown node.
    pub fn link(&self, node: NodeId) -> Option<&LinkParams> {
        self.links.get(node.0).and_then(Option::as_ref)
    }

    #[inline]
    pub(crate) fn link_into(&self, node: NodeId) -> &LinkParams {
        self.links[node.0]
            .as_ref()
            .expect("non-root node always has a link")
    }

    /// `(child, link)` pairs in ascending child order.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, &LinkParams)> + '_ {
        self.links
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.as_ref().map(|l| (NodeId(i), l)))
    }

    pub(crate) fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    pub(crate) fn set_link(&mut self, node: NodeId, link: LinkParams) {
        debug_assert!(self.links[node.0].is_some());
        self.links[node.0] = Some(link);
    }

    /// Flattened parameters `alpha, f_z, g_z, ...` in ascending child order.
    pub fn parameter_values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(1 + 2 * self.structure.node_count());
        out.push(self.alpha);
        for (_, l) in self.links() {
            out.push(l.f);
            out.push(l.g);
        }
        out
    }

    /// Names matching [`parameter_values`](Self::parameter_values).
    pub fn parameter_names(&self) -> Vec<String> {
        parameter_names(&self.structure)
    }

    /// Returns a copy whose every parameter is mapped through `op`.
    pub fn map_parameters(&self, mut op: impl FnMut(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.alpha = op(out.alpha);
        for l in out.links.iter_mut().flatten() {
            l.f = op(l.f);
            l.g = op(l.g);
        }
        out
    }
}

pub(crate) fn parameter_names(structure: &TreeStructure) -> Vec<String> {
    let mut out = vec!["alpha".to_string()];
    for (_, z) in structure.edges() {
        out.push(format!("f_{z}"));
        out.push(format!("g_{z}"));
    }
    out
}

/// Values for every node, indexed by [`NodeId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FullAssignment {
    values: Vec<bool>,
}

impl FullAssignment {
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, node: NodeId) -> bool {
        self.values[node.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Leaf values in ascending leaf order.
    pub fn project(&self, structure: &TreeStructure) -> LeafSample {
        LeafSample::new(structure.leaves().iter().map(|l| self.values[l.0]).collect())
    }
}

/// One observation of every leaf, stored in ascending leaf order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeafSample {
    values: Vec<bool>,
}

impl LeafSample {
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    /// Builds a sample from explicit `leaf -> value` pairs, which must cover
    /// exactly the leaves of `structure`.
    pub fn from_map(structure: &TreeStructure, map: &BTreeMap<NodeId, bool>) -> Result<Self> {
        let leaves = structure.leaves();
        if map.len() != leaves.len() || !leaves.iter().all(|l| map.contains_key(l)) {
            return Err(Error::LeafSampleSize {
                expected: leaves.len(),
                got: map.len(),
            });
        }
        Ok(Self::new(leaves.iter().map(|l| map[l]).collect()))
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of `leaf`, or `None` if `leaf` is not a leaf of `structure`.
    pub fn get(&self, structure: &TreeStructure, leaf: NodeId) -> Option<bool> {
        structure.leaf_slot(leaf).map(|s| self.values[s])
    }

    pub(crate) fn check(&self, structure: &TreeStructure) -> Result<()> {
        if self.values.len() == structure.leaves().len() {
            Ok(())
        } else {
            Err(Error::LeafSampleSize {
                expected: structure.leaves().len(),
                got: self.values.len(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Violation,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub node: Option<NodeId>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Violation => "error",
            Severity::Warning => "warning",
        };
        match self.node {
            Some(n) => write!(f, "{tag}: node {n}: {}", self.message),
            None => write!(f, "{tag}: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn in_unit_interval(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

/// Checks parameter ranges and flags hidden nodes of degree at most two,
/// whose parameters cannot be identified from the leaves.
pub fn validate(tree: &CausalTree) -> ValidationReport {
    let mut report = ValidationReport::default();
    let s = tree.structure();
    if !in_unit_interval(tree.alpha) {
        report.violations.push(Diagnostic {
            severity: Severity::Violation,
            node: Some(s.root()),
            message: format!("alpha = {} is outside [0, 1]", tree.alpha),
        });
    }
    for (z, link) in tree.links() {
        for (name, value) in [("f", link.f), ("g", link.g)] {
            if !in_unit_interval(value) {
                report.violations.push(Diagnostic {
                    severity: Severity::Violation,
                    node: Some(z),
                    message: format!("{name} = {value} is outside [0, 1]"),
                });
            }
        }
    }
    for h in s.hidden() {
        let degree = s.degree(h);
        if degree <= 2 {
            report.warnings.push(Diagnostic {
                severity: Severity::Warning,
                node: Some(h),
                message: format!(
                    "hidden node has degree {degree}; its parameters are not identifiable from the leaves"
                ),
            });
        }
    }
    report
}

/// `P(root) * prod P(z | parent(z))` for a complete assignment.
pub fn joint_probability(tree: &CausalTree, assignment: &FullAssignment) -> Result<f64> {
    let n = tree.structure().node_count();
    if assignment.len() != n {
        return Err(Error::IncompleteAssignment {
            expected: n,
            got: assignment.len(),
        });
    }
    Ok(joint_of(tree, |node| assignment.get(node)))
}

#[inline]
fn joint_of(tree: &CausalTree, value: impl Fn(NodeId) -> bool) -> f64 {
    let s = tree.structure();
    let root = value(s.root());
    let mut p = if root { tree.alpha } else { 1.0 - tree.alpha };
    for (w, z) in s.edges() {
        p *= tree.link_into(z).prob(value(w), value(z));
    }
    p
}

/// Joint probability of the assignment whose node `i` equals bit `i` of `mask`.
#[inline]
pub(crate) fn joint_of_mask(tree: &CausalTree, mask: u64) -> f64 {
    joint_of(tree, |node| mask >> node.0 & 1 == 1)
}

pub(crate) fn check_cap(structure: &TreeStructure, cap: usize) -> Result<()> {
    let nodes = structure.node_count();
    if nodes > cap || nodes >= 64 {
        Err(Error::EnumerationCap { nodes, cap })
    } else {
        Ok(())
    }
}

/// `P(node = 1)` for every node, by top-down recursion.
pub fn exact_marginals(tree: &CausalTree) -> Vec<f64> {
    let s = tree.structure();
    let mut out = vec![0.0; s.node_count()];
    for &node in s.preorder() {
        out[node.0] = match s.parent(node) {
            None => tree.alpha,
            Some(w) => {
                let pw = out[w.0];
                let l = tree.link_into(node);
                l.f * pw + l.g * (1.0 - pw)
            }
        };
    }
    out
}

pub fn exact_marginal(tree: &CausalTree, node: NodeId) -> Result<f64> {
    tree.structure().check_node(node)?;
    Ok(exact_marginals(tree)[node.0])
}

/// Probability of every leaf vector, summing the joint over hidden
/// configurations. Refuses trees above [`DEFAULT_ENUMERATION_CAP`] nodes.
pub fn leaf_distribution(tree: &CausalTree) -> Result<BTreeMap<LeafSample, f64>> {
    leaf_distribution_capped(tree, DEFAULT_ENUMERATION_CAP)
}

pub fn leaf_distribution_capped(
    tree: &CausalTree,
    cap: usize,
) -> Result<BTreeMap<LeafSample, f64>> {
    let s = tree.structure();
    check_cap(s, cap)?;
    let leaves = s.leaves();
    let mut mass = vec![0.0; 1usize << leaves.len()];
    for mask in 0..(1u64 << s.node_count()) {
        let key = leaves
            .iter()
            .enumerate()
            .fold(0usize, |k, (slot, leaf)| k | ((mask >> leaf.0 & 1) as usize) << slot);
        mass[key] += joint_of_mask(tree, mask);
    }
    Ok(mass
        .into_iter()
        .enumerate()
        .map(|(key, p)| {
            let values = (0..leaves.len()).map(|slot| key >> slot & 1 == 1).collect();
            (LeafSample::new(values), p)
        })
        .collect())
}

/// Re-expresses `tree` with the labels 0 and 1 swapped at every hidden node
/// in `flips`. The result induces the same distribution over the leaves.
pub fn relabel_hidden(tree: &CausalTree, flips: &BTreeSet<NodeId>) -> Result<CausalTree> {
    let s = tree.structure();
    for &node in flips {
        s.check_node(node)?;
        if s.is_leaf(node) {
            return Err(Error::FlipLeaf(node));
        }
    }
    let mut out = tree.clone();
    if flips.contains(&s.root()) {
        out.alpha = 1.0 - tree.alpha;
    }
    for (w, z) in s.edges() {
        let LinkParams { f, g } = *tree.link_into(z);
        let relabelled = match (flips.contains(&w), flips.contains(&z)) {
            (false, false) => LinkParams::new(f, g),
            (false, true) => LinkParams::new(1.0 - f, 1.0 - g),
            (true, false) => LinkParams::new(g, f),
            (true, true) => LinkParams::new(1.0 - g, 1.0 - f),
        };
        out.set_link(z, relabelled);
    }
    Ok(out)
}
