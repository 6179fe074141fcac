//! Incremental estimation of link probabilities from leaf samples only.
//!
//! Each observed leaf vector is propagated through the tree under the
//! current estimates. The resulting beliefs `Bel(w = 1)` and conditional
//! beliefs `Bel(w = 1 | z)` are folded into running averages, which estimate
//! `P(w = 1)`, `P(w = 1 | z = 1)` and `P(w = 1 | z = 0)` for every link
//! `w -> z`. After every sample the link parameters are recomputed from those
//! averages through Bayes' rule (see [`link_update`]) and the root prior is
//! set to the average root belief.

use crate::error::{Error, Result};
use crate::generate::draw_link;
use crate::inference::{edge_conditionals, propagate, DEFAULT_CONDITIONAL_FLOOR};
use crate::sampler::SampleRng;
use crate::tree_model::{validate, CausalTree, LeafSample, LinkParams, NodeId, TreeStructure};

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Range and minimum `|f - g|` used by [`Initializer::Random`].
pub const RANDOM_INIT_RANGE: (f64, f64) = (0.2, 0.8);
pub const RANDOM_INIT_MIN_GAP: f64 = 0.1;

/// Incremental sample mean, `Avg_n = ((n - 1) Avg_{n-1} + u_n) / n`.
///
/// Weighted pushes generalise this to `mean += (w / W) (u - mean)` with `W`
/// the running weight total. An optional forgetting factor `gamma` floors
/// the step size at `gamma`, turning the cumulative mean into an
/// exponentially discounted one once `w / W < gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunningAverage {
    n: u64,
    weight: f64,
    mean: f64,
    forgetting: f64,
}

impl RunningAverage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_forgetting(gamma: f64) -> Self {
        Self {
            forgetting: gamma,
            ..Self::default()
        }
    }

    pub fn push(&mut self, u: f64) {
        self.push_weighted(u, 1.0);
    }

    /// Non-positive weights are ignored.
    pub fn push_weighted(&mut self, u: f64, w: f64) {
        if !(w > 0.0) {
            return;
        }
        self.n += 1;
        self.weight += w;
        let step = (w / self.weight).max(self.forgetting);
        self.mean += step * (u - self.mean);
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// What gets averaged into `P(w = 1 | z = j)` for links into hidden nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightingMode {
    /// Plain average of `Bel(w = 1 | z = j, D)` over all samples.
    #[default]
    Unweighted,
    /// Average of `Bel(w = 1 | z = j, D)` weighted by `Bel(z = j | D)`.
    Posterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerOptions {
    pub epsilon: f64,
    pub weighting: WeightingMode,
    /// Forgetting factor in `(0, 1]`; `None` keeps cumulative averages.
    pub forgetting: Option<f64>,
    pub conditional_floor: f64,
}

impl Default for LearnerOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            weighting: WeightingMode::Unweighted,
            forgetting: None,
            conditional_floor: DEFAULT_CONDITIONAL_FLOOR,
        }
    }
}

impl LearnerOptions {
    fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 0.5), got {}",
                self.epsilon
            )));
        }
        if let Some(gamma) = self.forgetting {
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "forgetting factor must lie in (0, 1], got {gamma}"
                )));
            }
        }
        if !(self.conditional_floor >= 0.0) {
            return Err(Error::InvalidArgument("conditional floor must be >= 0".into()));
        }
        Ok(())
    }

    fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.epsilon, 1.0 - self.epsilon)
    }
}

/// Starting point for the estimates.
#[derive(Debug, Clone)]
pub enum Initializer {
    Explicit(CausalTree),
    /// Every parameter uniform in [`RANDOM_INIT_RANGE`], redrawing any link
    /// with `|f - g| <` [`RANDOM_INIT_MIN_GAP`].
    Random { seed: u64 },
    /// `truth` plus independent uniform noise in `[-sigma, sigma]`.
    Perturb {
        truth: CausalTree,
        sigma: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct LearnerState {
    estimates: CausalTree,
    avg_node: Vec<RunningAverage>,
    avg_cond1: Vec<RunningAverage>,
    avg_cond0: Vec<RunningAverage>,
    avg_leaf: Vec<RunningAverage>,
    samples_seen: u64,
    options: LearnerOptions,
}

impl LearnerState {
    pub fn init(
        structure: &TreeStructure,
        initializer: &Initializer,
        options: LearnerOptions,
    ) -> Result<Self> {
        options.check()?;
        let estimates = match initializer {
            Initializer::Explicit(tree) => {
                if tree.structure() != structure {
                    return Err(Error::StructureMismatch);
                }
                let report = validate(tree);
                if !report.is_valid() {
                    return Err(Error::Invalid(
                        report.violations.iter().map(|d| d.to_string()).collect(),
                    ));
                }
                tree.map_parameters(|p| options.clamp(p))
            }
            Initializer::Random { seed } => {
                let mut rng = SampleRng::new(*seed);
                let (lo, hi) = RANDOM_INIT_RANGE;
                let alpha = rng.uniform_in(lo, hi);
                let mut links = std::collections::BTreeMap::new();
                for (_, z) in structure.edges() {
                    links.insert(z, draw_link(&mut rng, lo, hi, RANDOM_INIT_MIN_GAP)?);
                }
                CausalTree::new(structure.clone(), alpha, links)?
            }
            Initializer::Perturb { truth, sigma, seed } => {
                if truth.structure() != structure {
                    return Err(Error::StructureMismatch);
                }
                if !(*sigma >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "perturbation must be >= 0, got {sigma}"
                    )));
                }
                let mut rng = SampleRng::new(*seed);
                truth.map_parameters(|p| options.clamp(p + rng.uniform_in(-sigma, *sigma)))
            }
        };

        let n = structure.node_count();
        let fresh = || match options.forgetting {
            Some(gamma) => RunningAverage::with_forgetting(gamma),
            None => RunningAverage::new(),
        };
        Ok(Self {
            estimates,
            avg_node: vec![fresh(); n],
            avg_cond1: vec![fresh(); n],
            avg_cond0: vec![fresh(); n],
            avg_leaf: vec![fresh(); n],
            samples_seen: 0,
            options,
        })
    }

    /// Current estimates.
    pub fn estimates(&self) -> &CausalTree {
        &self.estimates
    }

    pub fn samples_seen(&self) -> u64 {
        self.samples_seen
    }

    pub fn options(&self) -> &LearnerOptions {
        &self.options
    }

    /// Average of `Bel(node = 1)`.
    pub fn avg_node(&self, node: NodeId) -> &RunningAverage {
        &self.avg_node[node.0]
    }

    /// Average estimating `P(w = 1 | z = 1)` for the link into `z`.
    pub fn avg_cond1(&self, z: NodeId) -> &RunningAverage {
        &self.avg_cond1[z.0]
    }

    /// Average estimating `P(w = 1 | z = 0)` for the link into `z`.
    pub fn avg_cond0(&self, z: NodeId) -> &RunningAverage {
        &self.avg_cond0[z.0]
    }

    /// Observed frequency of `leaf = 1`.
    pub fn avg_leaf(&self, leaf: NodeId) -> &RunningAverage {
        &self.avg_leaf[leaf.0]
    }

    /// Absorbs one leaf sample and recomputes every estimate.
    ///
    /// With `epsilon > 0` every leaf vector has positive probability under
    /// the clamped estimates, so a zero-evidence error can only come from
    /// floating-point underflow on very large trees.
    pub fn step(&mut self, sample: &LeafSample) -> Result<()> {
        let s = self.estimates.structure();
        sample.check(s)?;
        let beliefs = propagate(&self.estimates, sample)?;

        for node in s.nodes() {
            self.avg_node[node.0].push(beliefs.belief(node));
        }
        for (w, z) in s.edges() {
            let bel_w = beliefs.belief(w);
            if let Some(slot) = s.leaf_slot(z) {
                let observed = sample.values()[slot];
                self.avg_leaf[z.0].push(if observed { 1.0 } else { 0.0 });
                if observed {
                    self.avg_cond1[z.0].push(bel_w);
                } else {
                    self.avg_cond0[z.0].push(bel_w);
                }
                continue;
            }
            let c = edge_conditionals(&beliefs, z, self.options.conditional_floor)?;
            let bel_z = beliefs.belief(z);
            let (w1, w0) = match self.options.weighting {
                WeightingMode::Unweighted => (1.0, 1.0),
                WeightingMode::Posterior => (bel_z, 1.0 - bel_z),
            };
            if let Some(p) = c.p_w1_given_z1 {
                self.avg_cond1[z.0].push_weighted(p, w1);
            }
            if let Some(p) = c.p_w1_given_z0 {
                self.avg_cond0[z.0].push_weighted(p, w0);
            }
        }

        self.samples_seen += 1;
        self.recompute();
        Ok(())
    }

    fn recompute(&mut self) {
        let opts = self.options;
        let root = self.estimates.structure().root();
        self.estimates.set_alpha(opts.clamp(self.avg_node[root.0].mean()));

        let edges: Vec<_> = self.estimates.structure().edges().collect();
        for (w, z) in edges {
            let (c1, c0) = (&self.avg_cond1[z.0], &self.avg_cond0[z.0]);
            if c1.is_empty() || c0.is_empty() {
                continue;
            }
            let p_w = opts.clamp(self.avg_node[w.0].mean());
            let p_z = if self.estimates.structure().is_leaf(z) {
                self.avg_leaf[z.0].mean()
            } else {
                self.avg_node[z.0].mean()
            };
            let link = link_update(p_w, p_z, c1.mean(), c0.mean());
            if link.f.is_finite() && link.g.is_finite() {
                self.estimates
                    .set_link(z, LinkParams::new(opts.clamp(link.f), opts.clamp(link.g)));
            }
        }
    }

    /// Applies [`step`](Self::step) over `samples` until `stop` fires,
    /// snapshotting the estimates every `checkpoint_every` samples.
    pub fn run<'a>(
        &mut self,
        samples: impl IntoIterator<Item = &'a LeafSample>,
        stop: &StopCriterion,
        checkpoint_every: u64,
    ) -> Result<LearningTrace> {
        stop.check()?;
        if checkpoint_every == 0 {
            return Err(Error::InvalidArgument("checkpoint interval must be >= 1".into()));
        }
        let mut trace = LearningTrace {
            checkpoints: vec![self.checkpoint()],
            stop_reason: StopReason::Exhausted,
        };
        let mut applied = 0u64;
        let mut previous_window: Option<Vec<f64>> = None;

        if self.samples_seen >= stop.max_samples {
            trace.stop_reason = StopReason::MaxSamples;
            return Ok(trace);
        }
        for sample in samples {
            self.step(sample)?;
            applied += 1;
            if applied % checkpoint_every == 0 {
                trace.checkpoints.push(self.checkpoint());
            }
            if self.samples_seen >= stop.max_samples {
                trace.stop_reason = StopReason::MaxSamples;
                break;
            }
            if applied % stop.window == 0 {
                let current = self.estimates.parameter_values();
                if let Some(prev) = previous_window.replace(current.clone()) {
                    if max_abs_diff(&prev, &current) < stop.tolerance {
                        trace.stop_reason = StopReason::Converged;
                        break;
                    }
                }
            }
        }
        if trace.checkpoints.last().map(|c| c.n) != Some(self.samples_seen) {
            trace.checkpoints.push(self.checkpoint());
        }
        Ok(trace)
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            n: self.samples_seen,
            estimates: self.estimates.clone(),
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Link parameters from averaged beliefs.
///
/// Both `f` and `g` are a `P(z=1)`-weighted mix of two Bayes-rule
/// inversions, one from `P(w=1 | z=1)` and one from `P(w=1 | z=0)`:
///
/// ```text
/// f = [c1 pz / pw] pz + [1 - c0 (1 - pz) / pw] (1 - pz)
/// g = [(1 - c1) pz / (1 - pw)] pz + [1 - (1 - c0)(1 - pz) / (1 - pw)] (1 - pz)
/// ```
///
/// No clamping is applied here.
pub fn link_update(p_w1: f64, p_z1: f64, p_w1_given_z1: f64, p_w1_given_z0: f64) -> LinkParams {
    let (pw, pz, c1, c0) = (p_w1, p_z1, p_w1_given_z1, p_w1_given_z0);
    let f = (c1 * pz / pw) * pz + (1.0 - c0 * (1.0 - pz) / pw) * (1.0 - pz);
    let g = ((1.0 - c1) * pz / (1.0 - pw)) * pz
        + (1.0 - (1.0 - c0) * (1.0 - pz) / (1.0 - pw)) * (1.0 - pz);
    LinkParams::new(f, g)
}

/// Stop after `max_samples` samples in total, or once the largest parameter
/// change between two consecutive `window`-sample boundaries drops below
/// `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriterion {
    pub max_samples: u64,
    pub tolerance: f64,
    pub window: u64,
}

impl StopCriterion {
    /// Runs through every sample (or `max_samples`) without a tolerance stop.
    pub fn samples(max_samples: u64) -> Self {
        Self {
            max_samples,
            tolerance: 0.0,
            window: 1000,
        }
    }

    fn check(&self) -> Result<()> {
        if self.max_samples == 0 || self.window == 0 || !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stop criterion needs max_samples >= 1, window >= 1, tolerance >= 0 (got {self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Exhausted,
    MaxSamples,
    Converged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub n: u64,
    pub estimates: CausalTree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningTrace {
    pub checkpoints: Vec<Checkpoint>,
    pub stop_reason: StopReason,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{draw_leaf, SampleRng};
    use std::collections::BTreeMap;

    fn star3() -> CausalTree {
        let links = [(0.9, 0.2), (0.8, 0.1), (0.7, 0.3)]
            .iter()
            .enumerate()
            .map(|(i, &(f, g))| (NodeId(i + 1), LinkParams::new(f, g)))
            .collect();
        CausalTree::new(TreeStructure::star(3), 0.6, links).unwrap()
    }

    fn deep_tree() -> CausalTree {
        // 0 -> {1, 2}, 1 -> {3, 4, 5}, 2 -> {6, 7}
        let parents = [None, Some(0), Some(0), Some(1), Some(1), Some(1), Some(2), Some(2)];
        let s = TreeStructure::from_parents(&parents).unwrap();
        let links = s
            .edges()
            .map(|(_, z)| (z, LinkParams::new(0.85 - 0.03 * z.0 as f64, 0.1 + 0.02 * z.0 as f64)))
            .collect();
        CausalTree::new(s, 0.45, links).unwrap()
    }

    #[test]
    fn running_average_matches_batch_mean() {
        let mut avg = RunningAverage::new();
        let values = [0.3, 0.9, 0.1, 0.4, 0.75];
        for (k, v) in values.iter().enumerate() {
            avg.push(*v);
            let batch = values[..=k].iter().sum::<f64>() / (k + 1) as f64;
            assert!((avg.mean() - batch).abs() < 1e-15);
            assert_eq!(avg.n(), k as u64 + 1);
        }
    }

    #[test]
    fn weighted_average_matches_weighted_batch() {
        let mut avg = RunningAverage::new();
        let pairs = [(0.2, 0.5), (0.8, 2.0), (0.6, 0.25), (0.1, 0.0)];
        for (u, w) in pairs {
            avg.push_weighted(u, w);
        }
        let num: f64 = pairs.iter().map(|(u, w)| u * w).sum();
        let den: f64 = pairs.iter().map(|(_, w)| w).sum();
        assert!((avg.mean() - num / den).abs() < 1e-15);
        assert_eq!(avg.n(), 3);
    }

    #[test]
    fn forgetting_floors_the_step() {
        let mut avg = RunningAverage::with_forgetting(0.5);
        avg.push(1.0);
        avg.push(0.0);
        avg.push(0.0);
        // steps 1, 1/2, 1/2 instead of 1, 1/2, 1/3
        assert!((avg.mean() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn init_explicit_is_exact() {
        let truth = star3();
        let s = LearnerState::init(
            truth.structure(),
            &Initializer::Explicit(truth.clone()),
            LearnerOptions::default(),
        )
        .unwrap();
        assert_eq!(s.estimates(), &truth);
        assert_eq!(s.estimates(), s.estimates());
        assert_eq!(s.avg_node(NodeId(0)).n(), 0);
    }

    #[test]
    fn init_rejects_structure_mismatch() {
        let other = TreeStructure::star(2);
        let err = LearnerState::init(
            &other,
            &Initializer::Explicit(star3()),
            LearnerOptions::default(),
        );
        assert!(matches!(err, Err(Error::StructureMismatch)));
        let err = LearnerState::init(
            &other,
            &Initializer::Perturb {
                truth: star3(),
                sigma: 0.1,
                seed: 1,
            },
            LearnerOptions::default(),
        );
        assert!(matches!(err, Err(Error::StructureMismatch)));
    }

    #[test]
    fn init_random_is_seeded_and_separated() {
        let s = deep_tree().structure().clone();
        let a = LearnerState::init(&s, &Initializer::Random { seed: 5 }, LearnerOptions::default())
            .unwrap();
        let b = LearnerState::init(&s, &Initializer::Random { seed: 5 }, LearnerOptions::default())
            .unwrap();
        assert_eq!(a.estimates(), b.estimates());
        for seed in 0..10_000 {
            let st = LearnerState::init(&s, &Initializer::Random { seed }, LearnerOptions::default())
                .unwrap();
            for (_, l) in st.estimates().links() {
                assert!((l.f - l.g).abs() >= RANDOM_INIT_MIN_GAP);
                assert!((0.2..=0.8).contains(&l.f) && (0.2..=0.8).contains(&l.g));
            }
        }
    }

    #[test]
    fn init_perturb_stays_near_truth_and_clamped() {
        let truth = CausalTree::uniform(TreeStructure::star(3), 0.5, LinkParams::new(1.0, 0.0));
        let st = LearnerState::init(
            truth.structure(),
            &Initializer::Perturb {
                truth: truth.clone(),
                sigma: 0.05,
                seed: 11,
            },
            LearnerOptions::default(),
        )
        .unwrap();
        for (a, b) in st
            .estimates()
            .parameter_values()
            .iter()
            .zip(truth.parameter_values())
        {
            assert!((a - b).abs() <= 0.05 + 1e-12);
            assert!((DEFAULT_EPSILON..=1.0 - DEFAULT_EPSILON).contains(a));
        }
    }

    #[test]
    fn single_node_tree_one_sample() {
        let tree = CausalTree::new(TreeStructure::star(0), 0.5, BTreeMap::new()).unwrap();
        let mut st = LearnerState::init(
            tree.structure(),
            &Initializer::Explicit(tree.clone()),
            LearnerOptions::default(),
        )
        .unwrap();
        st.step(&LeafSample::new(vec![true])).unwrap();
        assert_eq!(st.estimates().alpha(), 1.0 - DEFAULT_EPSILON);
    }

    #[test]
    fn independence_collapse_identity() {
        for &(pw, pz) in &[(0.3, 0.6), (0.5, 0.5), (0.9, 0.15), (0.01, 0.99)] {
            let l = link_update(pw, pz, pw, pw);
            assert!((l.f - pz).abs() < 1e-12);
            assert!((l.g - pz).abs() < 1e-12);
        }
    }

    #[test]
    fn link_update_is_exact_at_consistent_averages() {
        // averages computed from a known (alpha, f, g) reproduce (f, g)
        let (pw, f, g) = (0.35, 0.8, 0.15);
        let pz = f * pw + g * (1.0 - pw);
        let c1 = f * pw / pz;
        let c0 = (1.0 - f) * pw / (1.0 - pz);
        let l = link_update(pw, pz, c1, c0);
        assert!((l.f - f).abs() < 1e-12);
        assert!((l.g - g).abs() < 1e-12);
    }

    fn run_counts(tree: &CausalTree, mode: WeightingMode) {
        let options = LearnerOptions {
            weighting: mode,
            ..Default::default()
        };
        let mut st = LearnerState::init(
            tree.structure(),
            &Initializer::Random { seed: 3 },
            options,
        )
        .unwrap();
        let mut rng = SampleRng::new(8);
        for k in 1..=300u64 {
            st.step(&draw_leaf(tree, &mut rng)).unwrap();
            assert_eq!(st.samples_seen(), k);
            let s = tree.structure();
            for (_, z) in s.edges() {
                let (n1, n0) = (st.avg_cond1(z).n(), st.avg_cond0(z).n());
                if s.is_leaf(z) {
                    assert_eq!(n1 + n0, k);
                } else if mode == WeightingMode::Unweighted {
                    assert_eq!((n1, n0), (k, k));
                }
            }
            for p in st.estimates().parameter_values() {
                assert!((DEFAULT_EPSILON..=1.0 - DEFAULT_EPSILON).contains(&p));
            }
            let root = st.avg_node(s.root()).mean();
            assert_eq!(
                st.estimates().alpha(),
                root.clamp(DEFAULT_EPSILON, 1.0 - DEFAULT_EPSILON)
            );
        }
    }

    #[test]
    fn counters_and_bounds_hold_in_both_modes() {
        run_counts(&deep_tree(), WeightingMode::Unweighted);
        run_counts(&deep_tree(), WeightingMode::Posterior);
    }

    #[test]
    fn leaf_edge_keeps_estimate_until_both_branches_seen() {
        let truth = star3();
        let mut st = LearnerState::init(
            truth.structure(),
            &Initializer::Explicit(truth.clone()),
            LearnerOptions::default(),
        )
        .unwrap();
        st.step(&LeafSample::new(vec![true, true, true])).unwrap();
        for (z, l) in st.estimates().links() {
            assert_eq!(l, truth.link(z).unwrap());
        }
        st.step(&LeafSample::new(vec![false, true, false])).unwrap();
        assert_ne!(st.estimates().link(NodeId(1)), truth.link(NodeId(1)));
        assert_eq!(st.estimates().link(NodeId(2)), truth.link(NodeId(2)));
    }

    #[test]
    fn step_rejects_wrong_width() {
        let truth = star3();
        let mut st = LearnerState::init(
            truth.structure(),
            &Initializer::Explicit(truth.clone()),
            LearnerOptions::default(),
        )
        .unwrap();
        assert!(st.step(&LeafSample::new(vec![true])).is_err());
        assert_eq!(st.samples_seen(), 0);
    }

    #[test]
    fn options_are_checked() {
        let s = TreeStructure::star(3);
        for options in [
            LearnerOptions { epsilon: 0.0, ..Default::default() },
            LearnerOptions { forgetting: Some(1.5), ..Default::default() },
        ] {
            assert!(LearnerState::init(&s, &Initializer::Random { seed: 0 }, options).is_err());
        }
    }

    fn samples(tree: &CausalTree, seed: u64, n: usize) -> Vec<LeafSample> {
        let mut rng = SampleRng::new(seed);
        (0..n).map(|_| draw_leaf(tree, &mut rng)).collect()
    }

    #[test]
    fn run_single_sample() {
        let truth = star3();
        let data = samples(&truth, 1, 1);
        let mut st = LearnerState::init(
            truth.structure(),
            &Initializer::Random { seed: 0 },
            LearnerOptions::default(),
        )
        .unwrap();
        let trace = st.run(&data, &StopCriterion::samples(1), 1).unwrap();
        assert_eq!(st.samples_seen(), 1);
        assert_eq!(trace.checkpoints.len(), 2);
        assert_eq!(trace.checkpoints[0].n, 0);
        assert_eq!(trace.checkpoints[1].n, 1);
        assert_eq!(trace.stop_reason, StopReason::MaxSamples);
    }

    #[test]
    fn run_with_infinite_tolerance_stops_at_first_comparison() {
        let truth = star3();
        let data = samples(&truth, 1, 1000);
        let mut st = LearnerState::init(
            truth.structure(),
            &Initializer::Random { seed: 0 },
            LearnerOptions::default(),
        )
        .unwrap();
        let stop = StopCriterion {
            max_samples: 1000,
            tolerance: f64::INFINITY,
            window: 50,
        };
        let trace = st.run(&data, &stop, 30).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Converged);
        assert_eq!(st.samples_seen(), 100);
        let ns: Vec<_> = trace.checkpoints.iter().map(|c| c.n).collect();
        assert_eq!(ns, vec![0, 30, 60, 90, 100]);
    }

    #[test]
    fn run_empty_and_exhausted() {
        let truth = star3();
        let mut st = LearnerState::init(
            truth.structure(),
            &Initializer::Random { seed: 0 },
            LearnerOptions::default(),
        )
        .unwrap();
        let trace = st.run(&[], &StopCriterion::samples(10), 1).unwrap();
        assert_eq!(trace.checkpoints.len(), 1);
        assert_eq!(trace.stop_reason, StopReason::Exhausted);

        let data = samples(&truth, 2, 25);
        let trace = st.run(&data, &StopCriterion::samples(1000), 10).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Exhausted);
        let ns: Vec<_> = trace.checkpoints.iter().map(|c| c.n).collect();
        assert_eq!(ns, vec![0, 10, 20, 25]);
        assert!(st.run(&data, &StopCriterion::samples(1000), 0).is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let truth = deep_tree();
        let data = samples(&truth, 77, 2000);
        let go = || {
            let mut st = LearnerState::init(
                truth.structure(),
                &Initializer::Random { seed: 4 },
                LearnerOptions::default(),
            )
            .unwrap();
            st.run(&data, &StopCriterion::samples(5000), 100).unwrap()
        };
        assert_eq!(go(), go());
    }
}
