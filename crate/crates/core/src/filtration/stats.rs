use super::AdaptedProcess;

/// Per-atom martingale statistics, indexed by node.
///
/// With `M_{−1} = 0`: `m_n = M_n − M_{n−1}`, `M*_n = max_{k≤n} |M_k|`,
/// `m*_n = max_{k≤n} |m_k|`, `S_{n,p} = (Σ_{k≤n} |m_k|^p)^{1/p}` and
/// `s_{n,p} = (Σ_{k≤n} E[|m_k|^p | F_{k−1}])^{1/p}`.
#[derive(Debug, Clone)]
pub struct MartingaleStats {
    pub dim: usize,
    pub p: f64,
    pub diff: Vec<f64>,
    pub diff_norm: Vec<f64>,
    pub max_abs: Vec<f64>,
    pub max_diff: Vec<f64>,
    pub s_big: Vec<f64>,
    pub s_small: Vec<f64>,
}

impl MartingaleStats {
    pub fn diff_at(&self, node: usize) -> &[f64] {
        &self.diff[node * self.dim..(node + 1) * self.dim]
    }
}

pub fn stats(m: &AdaptedProcess, p: f64) -> MartingaleStats {
    let tree = m.tree();
    let dim = m.dim();
    let n = tree.len();
    let mut diff = vec![0.0; n * dim];
    let mut diff_norm = vec![0.0; n];
    let mut max_abs = vec![0.0; n];
    let mut max_diff = vec![0.0; n];
    let mut sum_p = vec![0.0; n];
    let mut cond_p = vec![0.0; n];
    // Nodes are stored level by level, so parents precede children.
    for id in 0..n {
        let parent = tree.node(id).parent;
        for i in 0..dim {
            let prev = parent.map_or(0.0, |q| m.at(q)[i]);
            diff[id * dim + i] = m.at(id)[i] - prev;
        }
        diff_norm[id] = m.norm().eval(&diff[id * dim..(id + 1) * dim]);
        let here = m.abs_at(id);
        let pw = diff_norm[id].powf(p);
        match parent {
            None => {
                max_abs[id] = here;
                max_diff[id] = diff_norm[id];
                sum_p[id] = pw;
                // F_{−1} is trivial and the root is a single atom.
                cond_p[id] = pw;
            }
            Some(q) => {
                max_abs[id] = max_abs[q].max(here);
                max_diff[id] = max_diff[q].max(diff_norm[id]);
                sum_p[id] = sum_p[q] + pw;
            }
        }
    }
    for id in 0..n {
        let node = tree.node(id);
        if node.children.is_empty() {
            continue;
        }
        let mean = tree.child_mean(id, |c| diff_norm[c].powf(p));
        for &c in &node.children {
            cond_p[c] = cond_p[id] + mean;
        }
    }
    let inv = 1.0 / p;
    MartingaleStats {
        dim,
        p,
        diff,
        diff_norm,
        max_abs,
        max_diff,
        s_big: sum_p.iter().map(|v| v.powf(inv)).collect(),
        s_small: cond_p.iter().map(|v| v.powf(inv)).collect(),
    }
}
