//! Stochastic integrals of predictable step integrands against a compensated
//! Poisson random measure.
//!
//! For `ξ = Σ_j 1_{(t_{j−1}, t_j]} ξ_j`, the integral is realized pathwise as
//! `I(t) = Σ_{t_i ≤ t} ξ(t_i, z_i) − ∫_0^t ∫ ξ(s, z) ν(dz) ds`. The compensator
//! is linear on each cell, so `I` is stored exactly as knots with left and
//! right limits and a slope on each segment.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::prm::{Cadlag, MarkMeasure, PRMPath};
use crate::stats::pairwise_sum;
use crate::{Error, Norm, Result};

/// A map `ξ_j: S → ℝ^d` on marks.
#[derive(Debug, Clone, PartialEq)]
pub enum MarkMap {
    Zero {
        dim: usize,
    },
    Constant(Vec<f64>),
    /// `z ↦ A z`, row-major `rows × cols`.
    Linear {
        rows: usize,
        cols: usize,
        a: Vec<f64>,
    },
    /// Values by atom id; any other mark is outside the domain.
    Table {
        dim: usize,
        values: BTreeMap<usize, Vec<f64>>,
    },
    Sum(Vec<(f64, MarkMap)>),
}

impl MarkMap {
    pub fn identity(d: usize) -> Self {
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            a[i * d + i] = 1.0;
        }
        MarkMap::Linear { rows: d, cols: d, a }
    }

    pub fn scaled_identity(d: usize, c: f64) -> Self {
        MarkMap::Sum(vec![(c, Self::identity(d))])
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        MarkMap::Linear { rows: 2, cols: 2, a: vec![c, -s, s, c] }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            MarkMap::Zero { dim } | MarkMap::Table { dim, .. } => *dim,
            MarkMap::Constant(c) => c.len(),
            MarkMap::Linear { rows, .. } => *rows,
            MarkMap::Sum(terms) => terms.first().map_or(0, |(_, m)| m.out_dim()),
        }
    }

    /// Adds `scale · ξ(z)` to `out`.
    pub fn add_into(&self, scale: f64, id: usize, z: &[f64], out: &mut [f64]) -> Option<()> {
        match self {
            MarkMap::Zero { .. } => {}
            MarkMap::Constant(c) => out.iter_mut().zip(c).for_each(|(o, v)| *o += scale * v),
            MarkMap::Linear { rows, cols, a } => {
                if z.len() != *cols {
                    return None;
                }
                for r in 0..*rows {
                    let row = &a[r * cols..(r + 1) * cols];
                    out[r] += scale * row.iter().zip(z).map(|(x, y)| x * y).sum::<f64>();
                }
            }
            MarkMap::Table { values, .. } => {
                let v = values.get(&id)?;
                out.iter_mut().zip(v).for_each(|(o, x)| *o += scale * x);
            }
            MarkMap::Sum(terms) => {
                for (c, m) in terms {
                    m.add_into(scale * c, id, z, out)?;
                }
            }
        }
        Some(())
    }

    pub fn eval(&self, id: usize, z: &[f64]) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.out_dim()];
        self.add_into(1.0, id, z, &mut out)?;
        Some(out)
    }

    fn check(&self, mark_dim: usize) -> Result<()> {
        let d = self.out_dim();
        if d == 0 {
            return Err(Error::param("integrand", "output dimension must be at least 1"));
        }
        match self {
            MarkMap::Linear { rows, cols, a } => {
                if a.len() != rows * cols {
                    return Err(Error::DimensionMismatch { expected: rows * cols, got: a.len() });
                }
                if *cols != mark_dim {
                    return Err(Error::DimensionMismatch { expected: mark_dim, got: *cols });
                }
            }
            MarkMap::Table { dim, values } => {
                if let Some(v) = values.values().find(|v| v.len() != *dim) {
                    return Err(Error::DimensionMismatch { expected: *dim, got: v.len() });
                }
            }
            MarkMap::Sum(terms) => {
                for (_, m) in terms {
                    if m.out_dim() != d {
                        return Err(Error::DimensionMismatch { expected: d, got: m.out_dim() });
                    }
                    m.check(mark_dim)?;
                }
            }
            MarkMap::Zero { .. } | MarkMap::Constant(_) => {}
        }
        Ok(())
    }
}

type Builder = dyn Fn(usize, &PRMPath) -> Result<MarkMap> + Send + Sync;

/// `ξ(r) = Σ_j 1_{(t_{j−1}, t_j]}(r) ξ_j`, zero after `t_n`.
///
/// `ξ_j` is produced by a builder that only ever sees the events with
/// `t_i ≤ t_{j−1}`, so predictability holds by construction.
#[derive(Clone)]
pub struct StepIntegrand {
    partition: Vec<f64>,
    dim: usize,
    norm: Norm,
    builder: Arc<Builder>,
}

impl std::fmt::Debug for StepIntegrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StepIntegrand")
            .field("partition", &self.partition)
            .field("dim", &self.dim)
            .field("norm", &self.norm)
            .finish_non_exhaustive()
    }
}

impl StepIntegrand {
    pub fn new(
        partition: Vec<f64>,
        dim: usize,
        norm: Norm,
        builder: impl Fn(usize, &PRMPath) -> Result<MarkMap> + Send + Sync + 'static,
    ) -> Result<Self> {
        if partition.len() < 2 || partition[0] != 0.0 {
            return Err(Error::param("partition", "need 0 = t_0 < t_1 < … < t_n with n ≥ 1"));
        }
        if partition.iter().any(|t| !t.is_finite()) || partition.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("partition", "times must be finite and strictly increasing"));
        }
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        Ok(Self { partition, dim, norm, builder: Arc::new(builder) })
    }

    /// A deterministic integrand with one map per cell.
    pub fn deterministic(partition: Vec<f64>, maps: Vec<MarkMap>, norm: Norm) -> Result<Self> {
        if maps.len() + 1 != partition.len() {
            return Err(Error::DimensionMismatch { expected: partition.len() - 1, got: maps.len() });
        }
        let dim = maps.first().map_or(0, MarkMap::out_dim);
        Self::new(partition, dim, norm, move |j, _| Ok(maps[j].clone()))
    }

    /// `ξ ≡ map` on `(0, T]`.
    pub fn constant_in_time(map: MarkMap, horizon: f64, norm: Norm) -> Result<Self> {
        Self::deterministic(vec![0.0, horizon], vec![map], norm)
    }

    /// Evenly spaced partition of `[0, T]` into `n` cells.
    pub fn uniform_partition(horizon: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|j| if j == n { horizon } else { horizon * j as f64 / n as f64 }).collect()
    }

    pub fn partition(&self) -> &[f64] {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    /// The cell maps along `path`, built from prefixes only.
    pub fn realize(&self, path: &PRMPath) -> Result<Vec<MarkMap>> {
        let mut maps = Vec::with_capacity(self.partition.len() - 1);
        for j in 0..self.partition.len() - 1 {
            let prefix = path.prefix(self.partition[j]);
            let m = (self.builder)(j, &prefix)?;
            if m.out_dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: m.out_dim() });
            }
            m.check(path.dim)?;
            maps.push(m);
        }
        Ok(maps)
    }

    /// `c ξ`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.builder.clone();
        Self {
            partition: self.partition.clone(),
            dim: self.dim,
            norm: self.norm,
            builder: Arc::new(move |j, p| Ok(MarkMap::Sum(vec![(c, inner(j, p)?)]))),
        }
    }

    /// `a ξ₁ + b ξ₂` for integrands on the same partition.
    pub fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        if x.partition != y.partition {
            return Err(Error::param("partition", "combined integrands must share a partition"));
        }
        if x.dim != y.dim {
            return Err(Error::DimensionMismatch { expected: x.dim, got: y.dim });
        }
        let (fx, fy) = (x.builder.clone(), y.builder.clone());
        Ok(Self {
            partition: x.partition.clone(),
            dim: x.dim,
            norm: x.norm,
            builder: Arc::new(move |j, p| Ok(MarkMap::Sum(vec![(a, fx(j, p)?), (b, fy(j, p)?)]))),
        })
    }
}

/// A cell `(start, end]` of the integrand, clipped to the horizon, with its map.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub start: f64,
    pub end: f64,
    pub map: MarkMap,
}

/// The exact càdlàg path of `I` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralPath {
    pub horizon: f64,
    pub dim: usize,
    pub norm: Norm,
    /// Knot times, starting at 0 and ending at the horizon.
    times: Vec<f64>,
    /// `I(t−)` at each knot, `dim` values each.
    left: Vec<f64>,
    /// `I(t)` at each knot.
    right: Vec<f64>,
    /// Slope of `I` on the segment after each knot.
    slope: Vec<f64>,
    jump_times: Vec<f64>,
    jumps: Vec<f64>,
    cells: Vec<Cell>,
}

/// `I(t) = ∫_0^t ∫ ξ dη̃` along `path`.
pub fn integrate(xi: &StepIntegrand, path: &PRMPath, nu: &MarkMeasure) -> Result<IntegralPath> {
    if path.dim != nu.dim() {
        return Err(Error::DimensionMismatch { expected: nu.dim(), got: path.dim });
    }
    let maps = xi.realize(path)?;
    let d = xi.dim;
    let horizon = path.horizon;
    let part = &xi.partition;

    let mut cells = Vec::new();
    // Compensator rate ∫ ξ_j dν on each cell, then zero after t_n.
    let mut rates: Vec<(f64, Vec<f64>)> = Vec::new();
    for (j, map) in maps.into_iter().enumerate() {
        let (start, end) = (part[j], part[j + 1].min(horizon));
        if start >= horizon {
            break;
        }
        let mut rate = vec![0.0; d];
        for atom in nu.atoms() {
            map.add_into(atom.w, atom.id, &atom.z, &mut rate).ok_or_else(|| Error::MarkOutsideDomain {
                t: start,
                mark: atom.id,
                z: atom.z.clone(),
            })?;
        }
        rates.push((end, rate));
        cells.push(Cell { start, end, map });
    }

    let rate_at = |t: f64| -> Option<usize> {
        // Cell containing the segment just after `t`.
        let k = rates.partition_point(|(end, _)| *end <= t);
        (k < rates.len()).then_some(k)
    };

    let mut knots: Vec<f64> = part.iter().copied().filter(|&t| t > 0.0 && t < horizon).collect();
    knots.extend(path.times.iter().copied().filter(|&t| t <= horizon));
    knots.push(horizon);
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let n = knots.len() + 1;
    let mut out = IntegralPath {
        horizon,
        dim: d,
        norm: xi.norm,
        times: Vec::with_capacity(n),
        left: Vec::with_capacity(n * d),
        right: Vec::with_capacity(n * d),
        slope: Vec::with_capacity(n * d),
        jump_times: Vec::with_capacity(path.len()),
        jumps: Vec::with_capacity(path.len() * d),
        cells,
    };
    let zero = vec![0.0; d];
    let push_slope = |out: &mut IntegralPath, t: f64| match rate_at(t) {
        Some(k) => out.slope.extend(rates[k].1.iter().map(|r| -r)),
        None => out.slope.extend_from_slice(&zero),
    };
    out.times.push(0.0);
    out.left.extend_from_slice(&zero);
    out.right.extend_from_slice(&zero);
    push_slope(&mut out, 0.0);

    let mut ev = 0;
    let mut jump = vec![0.0; d];
    for &t in &knots {
        let k = out.times.len() - 1;
        let dt = t - out.times[k];
        for i in 0..d {
            let v = out.right[k * d + i] + out.slope[k * d + i] * dt;
            out.left.push(v);
        }
        let base = out.left.len() - d;
        let mut value: Vec<f64> = out.left[base..].to_vec();
        while ev < path.len() && path.times[ev] == t {
            jump.iter_mut().for_each(|x| *x = 0.0);
            // The event lies in the cell (t_{j−1}, t_j] containing t.
            let cell = out.cells.iter().find(|c| t > c.start && t <= c.end);
            if let Some(c) = cell {
                let (id, z) = (path.atoms[ev], path.mark(ev));
                c.map.add_into(1.0, id, z, &mut jump).ok_or_else(|| Error::MarkOutsideDomain {
                    t,
                    mark: id,
                    z: z.to_vec(),
                })?;
            }
            value.iter_mut().zip(&jump).for_each(|(v, j)| *v += j);
            out.jump_times.push(t);
            out.jumps.extend_from_slice(&jump);
            ev += 1;
        }
        out.right.extend_from_slice(&value);
        out.times.push(t);
        push_slope(&mut out, t);
    }
    Ok(out)
}

impl IntegralPath {
    pub fn knot_times(&self) -> &[f64] {
        &self.times
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    fn segment(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// `I(t)`, `0 ≤ t ≤ T`.
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let k = self.segment(t);
        let d = self.dim;
        let dt = t - self.times[k];
        (0..d).map(|i| self.right[k * d + i] + self.slope[k * d + i] * dt).collect()
    }

    /// `I(t−)`.
    pub fn left_limit(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&s| s < t);
        if k < self.times.len() && self.times[k] == t {
            return self.left[k * self.dim..(k + 1) * self.dim].to_vec();
        }
        self.value_at(t)
    }

    /// `sup_{0 ≤ u ≤ t} |I(u)|_s`, attained at a one-sided limit at a knot or at `t`.
    pub fn sup_norm(&self, t: f64) -> f64 {
        let d = self.dim;
        let end = self.times.partition_point(|&s| s <= t);
        let mut sup = self.norm.eval(&self.value_at(t));
        for k in 0..end {
            sup = sup.max(self.norm.eval(&self.left[k * d..(k + 1) * d]));
            sup = sup.max(self.norm.eval(&self.right[k * d..(k + 1) * d]));
        }
        sup
    }

    /// `Σ_{t_i ≤ t} |ξ(t_i, z_i)|_s^p`, i.e. `Σ_{s≤t} |Δ_s I|^p`.
    pub fn jump_power_sum(&self, p: f64, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s <= t);
        let d = self.dim;
        let terms: Vec<f64> = (0..k).map(|i| self.norm.eval(&self.jumps[i * d..(i + 1) * d]).powf(p)).collect();
        pairwise_sum(&terms)
    }

    /// `Σ_j (t_j ∧ t − t_{j−1} ∧ t) ∫ |ξ_j(z)|_s^p ν(dz)` along this path.
    pub fn nu_power_integral(&self, nu: &MarkMeasure, p: f64, t: f64) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let len = c.end.min(t) - c.start.min(t);
            if len <= 0.0 {
                continue;
            }
            let mut acc = Vec::with_capacity(nu.atoms().len());
            for a in nu.atoms() {
                let v = c.map.eval(a.id, &a.z).ok_or_else(|| Error::MarkOutsideDomain {
                    t: c.start,
                    mark: a.id,
                    z: a.z.clone(),
                })?;
                acc.push(a.w * self.norm.eval(&v).powf(p));
            }
            terms.push(len * pairwise_sum(&acc));
        }
        Ok(pairwise_sum(&terms))
    }

    /// `a I₁ + b I₂` for paths with the same knots.
    pub fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        if x.times != y.times || x.dim != y.dim || x.jump_times != y.jump_times {
            return Err(Error::param("path", "combined paths must share knots"));
        }
        let lin = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| a * p + b * q).collect::<Vec<_>>();
        Ok(Self {
            horizon: x.horizon,
            dim: x.dim,
            norm: x.norm,
            times: x.times.clone(),
            left: lin(&x.left, &y.left),
            right: lin(&x.right, &y.right),
            slope: lin(&x.slope, &y.slope),
            jump_times: x.jump_times.clone(),
            jumps: lin(&x.jumps, &y.jumps),
            cells: Vec::new(),
        })
    }

    /// Writes `t,side,I_1,…,I_d` with one `left` and one `right` row per knot.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.dim;
        let cols: Vec<String> = (1..=d).map(|i| format!("I_{i}")).collect();
        writeln!(w, "t,side,{}", cols.join(","))?;
        for k in 0..self.times.len() {
            for (side, vals) in [("left", &self.left), ("right", &self.right)] {
                let row: Vec<String> = vals[k * d..(k + 1) * d].iter().map(|v| format!("{v}")).collect();
                writeln!(w, "{},{side},{}", self.times[k], row.join(","))?;
            }
        }
        Ok(())
    }
}

impl Cadlag for IntegralPath {
    fn jumps(&self) -> Vec<(f64, Vec<f64>)> {
        let d = self.dim;
        (0..self.jump_times.len())
            .filter(|&i| self.jumps[i * d..(i + 1) * d].iter().any(|&v| v != 0.0))
            .map(|i| (self.jump_times[i], self.jumps[i * d..(i + 1) * d].to_vec()))
            .collect()
    }
}

/// `Σ_{t_i ≤ t} |ξ(t_i, z_i)|^p` for `ξ` along `path`.
pub fn jump_power_sum(xi: &StepIntegrand, path: &PRMPath, nu: &MarkMeasure, p: f64, t: f64) -> Result<f64> {
    Ok(integrate(xi, path, nu)?.jump_power_sum(p, t))
}

/// `∫_0^t ∫ |ξ|^p dν ds` for `ξ` realized along `path` (any path for a
/// deterministic `ξ`).
pub fn nu_power_integral(xi: &StepIntegrand, path: &PRMPath, nu: &MarkMeasure, p: f64, t: f64) -> Result<f64> {
    integrate(xi, path, nu)?.nu_power_integral(nu, p, t)
}

fn default_partition() -> usize {
    1
}

/// Config form of an integrand.
///
/// `kind` is one of `zero`, `constant` (`value`), `linear_in_mark` (`scale`),
/// `matrix` (`rows`), `rotation` (`angle`), `table` (`tables`: per cell, a list
/// of values indexed by atom id) and `adapted_threshold`. The last is
/// `ξ_j(z) = c_j z` with `c_j = low` while `|Σ_{t_i ≤ t_{j−1}} z_i|_s ≤ threshold`
/// and `c_j = high` afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high: Option<f64>,
    /// Number of equal cells of `[0, T]`.
    #[serde(default = "default_partition")]
    pub partition: usize,
}

impl IntegrandSpec {
    pub fn named(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            value: None,
            scale: None,
            rows: None,
            angle: None,
            tables: None,
            threshold: None,
            low: None,
            high: None,
            partition: 1,
        }
    }

    /// Whether `ξ(s, z) = h(s) z` for a matrix-valued `h`.
    pub fn is_linear_in_mark(&self) -> bool {
        matches!(self.kind.as_str(), "zero" | "linear_in_mark" | "matrix" | "rotation" | "adapted_threshold")
    }

    pub fn build(&self, nu: &MarkMeasure, horizon: f64, norm: Norm) -> Result<StepIntegrand> {
        if self.partition == 0 {
            return Err(Error::config("integrand.partition", "must be at least 1"));
        }
        let part = StepIntegrand::uniform_partition(horizon, self.partition);
        let cells = self.partition;
        let d = nu.dim();
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::config(format!("integrand.{name}"), format!("required for kind `{}`", self.kind)))
        };
        let same = |m: MarkMap| StepIntegrand::deterministic(part.clone(), vec![m; cells], norm);
        match self.kind.as_str() {
            "zero" => same(MarkMap::Zero { dim: d }),
            "constant" => {
                let v = self.value.clone().unwrap_or_else(|| vec![1.0]);
                same(MarkMap::Constant(v))
            }
            "linear_in_mark" => same(MarkMap::scaled_identity(d, self.scale.unwrap_or(1.0))),
            "matrix" => {
                let rows =
                    self.rows.clone().ok_or_else(|| Error::config("integrand.rows", "required for kind `matrix`"))?;
                let cols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != cols) {
                    return Err(Error::config("integrand.rows", "rows must have equal length"));
                }
                same(MarkMap::Linear { rows: rows.len(), cols, a: rows.concat() })
            }
            "rotation" => {
                if d != 2 {
                    return Err(Error::config("integrand.kind", "rotation needs two-dimensional marks"));
                }
                same(MarkMap::rotation(need(self.angle, "angle")?))
            }
            "table" => {
                let tables = self
                    .tables
                    .clone()
                    .ok_or_else(|| Error::config("integrand.tables", "required for kind `table`"))?;
                if tables.len() != cells {
                    return Err(Error::config("integrand.tables", format!("expected {cells} cell tables")));
                }
                let dim = tables.first().and_then(|t| t.first()).map_or(1, Vec::len);
                let maps = tables
                    .into_iter()
                    .map(|t| MarkMap::Table { dim, values: t.into_iter().enumerate().collect() })
                    .collect();
                StepIntegrand::deterministic(part, maps, norm)
            }
            "adapted_threshold" => {
                let threshold = need(self.threshold, "threshold")?;
                let low = self.low.unwrap_or(1.0);
                let high = need(self.high, "high")?;
                let mark_norm = nu.norm();
                StepIntegrand::new(part, d, norm, move |_, prefix| {
                    let mut sum = vec![0.0; d];
                    for i in 0..prefix.len() {
                        sum.iter_mut().zip(prefix.mark(i)).for_each(|(s, z)| *s += z);
                    }
                    let c = if mark_norm.eval(&sum) <= threshold { low } else { high };
                    Ok(MarkMap::scaled_identity(d, c))
                })
            }
            other => Err(Error::config("integrand.kind", format!("unknown kind `{other}`"))),
        }
    }
}
