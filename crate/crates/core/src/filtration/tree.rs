use std::ops::Range;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::StreamKey;
use crate::{Error, Norm, Result};

/// Largest number of atoms (leaves) a tree may carry.
pub const MAX_ATOMS: usize = 100_000;

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    pub depth: usize,
    /// Absolute probability of the atom.
    pub prob: f64,
    pub children: Vec<usize>,
}

/// A finite filtered probability space. Nodes at depth `k` are the atoms of
/// `F_k`; nodes are stored level by level, so every level is a contiguous
/// index range.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationTree {
    nodes: Vec<Node>,
    level_starts: Vec<usize>,
}

impl FiltrationTree {
    /// Builds a tree level by level: `children[k][i]` lists the conditional
    /// probabilities of the children of the `i`-th node of depth `k`.
    pub fn from_levels(children: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mut nodes = vec![Node { parent: None, depth: 0, prob: 1.0, children: Vec::new() }];
        let mut level_starts = vec![0];
        for (k, level) in children.iter().enumerate() {
            let start = level_starts[k];
            let width = nodes.len() - start;
            if level.len() != width {
                return Err(Error::MalformedTree(format!(
                    "level {k} has {width} nodes but {} child lists",
                    level.len()
                )));
            }
            level_starts.push(nodes.len());
            for (i, probs) in level.iter().enumerate() {
                let parent = start + i;
                if probs.is_empty() {
                    return Err(Error::MalformedTree(format!("node {parent} has no children")));
                }
                let total: f64 = probs.iter().sum();
                if probs.iter().any(|&q| q.is_nan() || q <= 0.0) || (total - 1.0).abs() > MASS_TOL {
                    return Err(Error::MalformedTree(format!(
                        "children of node {parent} carry conditional mass {total}"
                    )));
                }
                for &q in probs {
                    let id = nodes.len();
                    let prob = nodes[parent].prob * q;
                    nodes.push(Node { parent: Some(parent), depth: k + 1, prob, children: Vec::new() });
                    nodes[parent].children.push(id);
                }
            }
            if nodes.len() - level_starts[k + 1] > MAX_ATOMS {
                return Err(Error::MalformedTree(format!("more than {MAX_ATOMS} atoms")));
            }
        }
        level_starts.push(nodes.len());
        let tree = Self { nodes, level_starts };
        tree.validate()?;
        Ok(tree)
    }

    fn validate(&self) -> Result<()> {
        for (id, node) in self.nodes.iter().enumerate() {
            if node.children.is_empty() {
                if node.depth != self.depth() {
                    return Err(Error::MalformedTree(format!("leaf {id} at depth {}", node.depth)));
                }
                continue;
            }
            let mass: f64 = node.children.iter().map(|&c| self.nodes[c].prob).sum();
            if (mass - node.prob).abs() > MASS_TOL {
                return Err(Error::MalformedTree(format!("node {id}: mass {} but children sum to {mass}", node.prob)));
            }
        }
        Ok(())
    }

    /// Time horizon `N`.
    pub fn depth(&self) -> usize {
        self.level_starts.len() - 2
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn level(&self, k: usize) -> Range<usize> {
        self.level_starts[k]..self.level_starts[k + 1]
    }

    pub fn leaves(&self) -> Range<usize> {
        self.level(self.depth())
    }

    pub fn ancestor(&self, mut id: usize, depth: usize) -> usize {
        while self.nodes[id].depth > depth {
            id = self.nodes[id].parent.expect("non-root node has a parent");
        }
        id
    }

    /// Path from the root to `leaf`, root first.
    pub fn path_to(&self, leaf: usize) -> Vec<usize> {
        let mut path = vec![leaf];
        let mut id = leaf;
        while let Some(p) = self.nodes[id].parent {
            path.push(p);
            id = p;
        }
        path.reverse();
        path
    }

    /// `E f` for a function given on the atoms of depth `k`.
    pub fn expect_level(&self, k: usize, mut f: impl FnMut(usize) -> f64) -> f64 {
        self.level(k).map(|id| self.nodes[id].prob * f(id)).sum()
    }

    pub fn expect(&self, f: impl FnMut(usize) -> f64) -> f64 {
        self.expect_level(self.depth(), f)
    }

    /// `E[f | F_k]` at a depth-`k` node for `f` given on depth-`j` atoms.
    pub fn conditional_mean(&self, node: usize, j: usize, mut f: impl FnMut(usize) -> f64) -> f64 {
        let k = self.nodes[node].depth;
        let acc: f64 =
            self.level(j).filter(|&id| self.ancestor(id, k) == node).map(|id| self.nodes[id].prob * f(id)).sum();
        acc / self.nodes[node].prob
    }

    /// Average of `f` over the children of `node`, i.e. `E[f_{k+1} | F_k]`.
    pub fn child_mean(&self, node: usize, mut f: impl FnMut(usize) -> f64) -> f64 {
        let n = &self.nodes[node];
        n.children.iter().map(|&c| self.nodes[c].prob * f(c)).sum::<f64>() / n.prob
    }
}

/// An `ℝ^d`-valued process adapted to a [`FiltrationTree`]: one value per node.
#[derive(Debug, Clone)]
pub struct AdaptedProcess {
    tree: Arc<FiltrationTree>,
    dim: usize,
    values: Vec<f64>,
    norm: Norm,
}

impl AdaptedProcess {
    pub fn new(tree: Arc<FiltrationTree>, dim: usize, values: Vec<f64>, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("d", "dimension must be positive"));
        }
        if values.len() != tree.len() * dim {
            return Err(Error::DimensionMismatch { expected: tree.len() * dim, got: values.len() });
        }
        Ok(Self { tree, dim, values, norm })
    }

    pub fn scalar(tree: Arc<FiltrationTree>, values: Vec<f64>) -> Result<Self> {
        Self::new(tree, 1, values, Norm::EUCLIDEAN)
    }

    /// Builds a process from a per-node closure.
    pub fn from_fn(
        tree: Arc<FiltrationTree>,
        dim: usize,
        norm: Norm,
        mut f: impl FnMut(usize, &mut [f64]),
    ) -> Result<Self> {
        let mut values = vec![0.0; tree.len() * dim];
        for (id, chunk) in values.chunks_mut(dim).enumerate() {
            f(id, chunk);
        }
        Self::new(tree, dim, values, norm)
    }

    pub fn tree(&self) -> &Arc<FiltrationTree> {
        &self.tree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node * self.dim..(node + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn abs_at(&self, node: usize) -> f64 {
        self.norm.eval(self.at(node))
    }

    /// `|X|` as a scalar process.
    pub fn norm_process(&self) -> AdaptedProcess {
        let values = (0..self.tree.len()).map(|id| self.abs_at(id)).collect();
        AdaptedProcess { tree: self.tree.clone(), dim: 1, values, norm: Norm::EUCLIDEAN }
    }

    /// `X − X_0`.
    pub fn centered(&self) -> AdaptedProcess {
        let x0 = self.at(0).to_vec();
        let values = self.values.iter().enumerate().map(|(i, v)| v - x0[i % self.dim]).collect();
        AdaptedProcess { tree: self.tree.clone(), dim: self.dim, values, norm: self.norm }
    }

    /// `E[X_j | F_k]` on the atoms of depth `k`, in level order (`dim` values per
    /// atom).
    pub fn conditional_expectation(&self, j: usize, k: usize) -> Result<Vec<f64>> {
        let depth = self.tree.depth();
        if j > depth {
            return Err(Error::DepthOutOfRange { requested: j, depth });
        }
        if k > j {
            return Err(Error::DepthOutOfRange { requested: k, depth: j });
        }
        let level_k = self.tree.level(k);
        let mut out = vec![0.0; level_k.len() * self.dim];
        for id in self.tree.level(j) {
            let anc = self.tree.ancestor(id, k) - level_k.start;
            let w = self.tree.node(id).prob;
            for (o, v) in out[anc * self.dim..(anc + 1) * self.dim].iter_mut().zip(self.at(id)) {
                *o += w * v;
            }
        }
        for (pos, chunk) in out.chunks_mut(self.dim).enumerate() {
            let mass = self.tree.node(level_k.start + pos).prob;
            chunk.iter_mut().for_each(|v| *v /= mass);
        }
        Ok(out)
    }

    /// Largest `|E[X_{k+1} | F_k] − X_k|_∞` over all non-leaf nodes, with its node.
    pub fn martingale_defect(&self) -> (f64, usize) {
        let mut worst = (0.0, 0);
        let mut mean = vec![0.0; self.dim];
        for (id, node) in self.tree.nodes().iter().enumerate() {
            if node.children.is_empty() {
                continue;
            }
            mean.iter_mut().for_each(|m| *m = 0.0);
            for &c in &node.children {
                let w = self.tree.node(c).prob / node.prob;
                for (m, v) in mean.iter_mut().zip(self.at(c)) {
                    *m += w * v;
                }
            }
            let dev = mean.iter().zip(self.at(id)).fold(0.0f64, |a, (m, v)| a.max((m - v).abs()));
            if dev > worst.0 {
                worst = (dev, id);
            }
        }
        worst
    }

    pub fn is_martingale(&self, tol: f64) -> bool {
        self.martingale_defect().0 <= tol
    }

    pub(crate) fn require_martingale(&self, tol: f64) -> Result<()> {
        let (deviation, node) = self.martingale_defect();
        if deviation > tol {
            return Err(Error::NotMartingale { node, depth: self.tree.node(node).depth, deviation });
        }
        Ok(())
    }

    /// Pointwise `a·X + b·Y`.
    pub fn combine(&self, a: f64, other: &AdaptedProcess, b: f64) -> Result<AdaptedProcess> {
        if other.dim != self.dim || !Arc::ptr_eq(&self.tree, &other.tree) && *self.tree != *other.tree {
            return Err(Error::DimensionMismatch { expected: self.values.len(), got: other.values.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(AdaptedProcess { tree: self.tree.clone(), dim: self.dim, values, norm: self.norm })
    }
}

/// Default tolerance of the martingale property.
pub const MARTINGALE_TOL: f64 = 1e-12;

/// One level of a configured tree: every node at this depth branches with the
/// same conditional probabilities and increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub probs: Vec<f64>,
    pub increments: Vec<Vec<f64>>,
}

fn default_step() -> f64 {
    1.0
}

fn default_s() -> Norm {
    Norm::EUCLIDEAN
}

fn default_count() -> usize {
    1
}

/// Tree + process description as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeSpec {
    /// Symmetric ±`step` walk started at `start`.
    BinaryWalk {
        depth: usize,
        #[serde(default = "default_step")]
        step: f64,
        #[serde(default)]
        start: f64,
    },
    /// Random martingales on random trees, one per seed `seed, seed+1, …`.
    RandomTree {
        depth: usize,
        branching: usize,
        #[serde(default = "default_count")]
        d: usize,
        #[serde(default = "default_s")]
        s: Norm,
        seed: u64,
        #[serde(default = "default_count")]
        count: usize,
        /// Start every martingale at `M_0 = 0`.
        #[serde(default)]
        start_zero: bool,
    },
    /// Explicit per-level branching.
    Levels {
        levels: Vec<LevelSpec>,
        #[serde(default)]
        start: Option<Vec<f64>>,
        #[serde(default = "default_s")]
        s: Norm,
    },
}

impl TreeSpec {
    /// Builds every process this tree specification describes.
    pub fn build(&self) -> Result<Vec<AdaptedProcess>> {
        match self {
            TreeSpec::BinaryWalk { depth, step, start } => Ok(vec![binary_walk(*depth, *step, *start)?]),
            TreeSpec::RandomTree { depth, branching, d, s, seed, count, start_zero } => (0..*count)
                .map(|i| {
                    random_martingale(&RandomTreeParams {
                        depth: *depth,
                        branching: *branching,
                        dim: *d,
                        norm: *s,
                        seed: seed.wrapping_add(i as u64),
                        start_zero: *start_zero,
                    })
                })
                .collect(),
            TreeSpec::Levels { levels, start, s } => Ok(vec![from_level_specs(levels, start.as_deref(), *s)?]),
        }
    }
}

/// Symmetric random walk `M_0 = start`, `M_{k+1} = M_k ± step`.
pub fn binary_walk(depth: usize, step: f64, start: f64) -> Result<AdaptedProcess> {
    let inc = [-step, step];
    let specs: Vec<LevelSpec> = (0..depth)
        .map(|_| LevelSpec { probs: vec![0.5, 0.5], increments: inc.iter().map(|&v| vec![v]).collect() })
        .collect();
    from_level_specs(&specs, Some(&[start]), Norm::EUCLIDEAN)
}

/// Process with `X_{k+1} = X_k + increment` on a tree whose levels branch
/// identically.
pub fn from_level_specs(levels: &[LevelSpec], start: Option<&[f64]>, norm: Norm) -> Result<AdaptedProcess> {
    let dim =
        start.map(|s| s.len()).or_else(|| levels.first().and_then(|l| l.increments.first()).map(Vec::len)).unwrap_or(1);
    for (k, level) in levels.iter().enumerate() {
        if level.probs.len() != level.increments.len() {
            return Err(Error::MalformedTree(format!("level {k}: probs and increments differ in length")));
        }
        if let Some(bad) = level.increments.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
    }
    let mut children = Vec::with_capacity(levels.len());
    let mut width = 1usize;
    for level in levels {
        children.push(vec![level.probs.clone(); width]);
        width = width
            .checked_mul(level.probs.len())
            .filter(|&w| w <= MAX_ATOMS)
            .ok_or_else(|| Error::MalformedTree(format!("more than {MAX_ATOMS} atoms")))?;
    }
    let tree = Arc::new(FiltrationTree::from_levels(&children)?);
    let start = start.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; dim]);
    let mut values = vec![0.0; tree.len() * dim];
    values[..dim].copy_from_slice(&start);
    for id in 1..tree.len() {
        let node = tree.node(id);
        let parent = node.parent.expect("non-root");
        let siblings = &tree.node(parent).children;
        let pos = siblings.iter().position(|&c| c == id).expect("child of its parent");
        let inc = &levels[node.depth - 1].increments[pos];
        for i in 0..dim {
            values[id * dim + i] = values[parent * dim + i] + inc[i];
        }
    }
    AdaptedProcess::new(tree, dim, values, norm)
}

#[derive(Debug, Clone, Copy)]
pub struct RandomTreeParams {
    pub depth: usize,
    pub branching: usize,
    pub dim: usize,
    pub norm: Norm,
    pub seed: u64,
    pub start_zero: bool,
}

/// A random martingale: random branching in `1..=branching`, random conditional
/// probabilities, and centred random increments whose scale varies over two
/// octaves in each direction so that both parts of the Davis split occur.
pub fn random_martingale(params: &RandomTreeParams) -> Result<AdaptedProcess> {
    if params.branching == 0 || params.dim == 0 {
        return Err(Error::param("branching", "branching and dimension must be positive"));
    }
    let mut rng = StreamKey::new(params.seed, 0x7472_6565).path_rng(0);
    let dim = params.dim;
    let mut children = Vec::with_capacity(params.depth);
    let mut increments: Vec<Vec<f64>> = Vec::new(); // per child node, in creation order
    let mut width = 1usize;
    for _ in 0..params.depth {
        let mut level = Vec::with_capacity(width);
        let mut next = 0;
        for _ in 0..width {
            let b = rng.random_range(1..=params.branching);
            let raw: Vec<f64> = (0..b).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mut probs: Vec<f64> = raw.iter().map(|w| w / total).collect();
            // Renormalize so the masses sum to one in floating point.
            let head: f64 = probs[..b - 1].iter().sum();
            probs[b - 1] = 1.0 - head;
            let scale = 2f64.powf(rng.random_range(-2.0..2.0));
            let mut incs: Vec<Vec<f64>> =
                (0..b).map(|_| (0..dim).map(|_| scale * rng.random_range(-1.0..1.0)).collect()).collect();
            for i in 0..dim {
                let mean: f64 = probs.iter().zip(&incs).map(|(p, v)| p * v[i]).sum();
                incs.iter_mut().for_each(|v| v[i] -= mean);
            }
            increments.extend(incs);
            next += b;
            level.push(probs);
        }
        children.push(level);
        width = next;
    }
    let tree = Arc::new(FiltrationTree::from_levels(&children)?);
    let mut values = vec![0.0; tree.len() * dim];
    if !params.start_zero {
        for v in &mut values[..dim] {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    for id in 1..tree.len() {
        let parent = tree.node(id).parent.expect("non-root");
        for i in 0..dim {
            values[id * dim + i] = values[parent * dim + i] + increments[id - 1][i];
        }
    }
    AdaptedProcess::new(tree, dim, values, params.norm)
}
