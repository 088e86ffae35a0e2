//! Poisson random measures with finite intensity on `ℝ^d × (0, T]`.
//!
//! A realization is sampled as a superposition of independent homogeneous
//! Poisson processes, one per atom of the intensity measure, each on its own
//! counter-based substream keyed by the atom's id. The law is that of a PRM
//! with intensity `ν ⊗ dt`; keying by id additionally couples the paths of a
//! measure and of its truncations, which the ε-sweeps rely on.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::rng::StreamKey;
use crate::stats::{pairwise_sum, par_map, Estimate};
use crate::{Error, Norm, Result};

/// One atom `w δ_z` of a finite intensity measure. `id` is stable under
/// truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub id: usize,
    pub z: Vec<f64>,
    pub w: f64,
}

/// A finite, purely atomic intensity measure `ν = Σ_j w_j δ_{z_j}` on `ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkMeasure {
    atoms: Vec<Atom>,
    dim: usize,
    norm: Norm,
    /// Truncation radius: every atom has `|z|_s > eps`.
    eps: f64,
    total_mass: f64,
}

impl MarkMeasure {
    pub fn new(atoms: Vec<(Vec<f64>, f64)>, norm: Norm) -> Result<Self> {
        let dim = atoms.first().map_or(1, |(z, _)| z.len());
        Self::with_dim(dim, atoms, norm)
    }

    /// As [`MarkMeasure::new`] but with an explicit dimension, so that the
    /// zero measure on `ℝ^d` can be represented.
    pub fn with_dim(dim: usize, atoms: Vec<(Vec<f64>, f64)>, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Measure("mark dimension must be at least 1".into()));
        }
        let mut out = Vec::with_capacity(atoms.len());
        for (id, (z, w)) in atoms.into_iter().enumerate() {
            if z.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: z.len() });
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Measure(format!("atom {id} has weight {w}; weights must be positive and finite")));
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::Measure(format!("atom {id} has a non-finite mark")));
            }
            out.push(Atom { id, z, w });
        }
        let total_mass = pairwise_sum(&out.iter().map(|a| a.w).collect::<Vec<_>>());
        Ok(Self { atoms: out, dim, norm, eps: 0.0, total_mass })
    }

    /// `w δ_z` with a scalar mark.
    pub fn dirac(z: f64, w: f64) -> Result<Self> {
        Self::new(vec![(vec![z], w)], Norm::EUCLIDEAN)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom_by_id(&self, id: usize) -> Option<&Atom> {
        // Ids are increasing, so a binary search suffices.
        self.atoms.binary_search_by_key(&id, |a| a.id).ok().map(|i| &self.atoms[i])
    }

    /// `∫ f(z) ν(dz)`.
    pub fn integrate(&self, mut f: impl FnMut(&Atom) -> f64) -> f64 {
        pairwise_sum(&self.atoms.iter().map(|a| a.w * f(a)).collect::<Vec<_>>())
    }

    /// Restriction to `S_ε = {|z|_s > eps}`.
    pub fn truncate(&self, eps: f64) -> Result<Self> {
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::param("eps", "must be nonnegative"));
        }
        let atoms: Vec<Atom> = self.atoms.iter().filter(|a| self.norm.eval(&a.z) > eps).cloned().collect();
        let total_mass = pairwise_sum(&atoms.iter().map(|a| a.w).collect::<Vec<_>>());
        Ok(Self { atoms, dim: self.dim, norm: self.norm, eps: self.eps.max(eps), total_mass })
    }

    /// [`MarkMeasure::truncate`], failing when no mass is left.
    pub fn truncate_nonempty(&self, eps: f64) -> Result<Self> {
        let t = self.truncate(eps)?;
        if t.is_empty() {
            return Err(Error::Measure(format!("truncation at eps = {eps} removes all mass")));
        }
        Ok(t)
    }

    /// Atoms `z_k = first·ratio^k·direction` with weights `weight·weight_ratio^k`,
    /// `k = 0..count`.
    pub fn geometric(g: &GeometricSpec, norm: Norm) -> Result<Self> {
        if g.count == 0
            || g.ratio.is_nan()
            || g.ratio <= 0.0
            || g.weight.is_nan()
            || g.weight <= 0.0
            || g.weight_ratio.is_nan()
            || g.weight_ratio <= 0.0
        {
            return Err(Error::param("geometric", "count, ratio and weights must be positive"));
        }
        let dir = g.direction.clone().unwrap_or_else(|| vec![1.0]);
        let atoms = (0..g.count)
            .map(|k| {
                let r = g.first * g.ratio.powi(k as i32);
                (dir.iter().map(|d| d * r).collect(), g.weight * g.weight_ratio.powi(k as i32))
            })
            .collect();
        Self::with_dim(dir.len(), atoms, norm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub z: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSpec {
    pub first: f64,
    pub ratio: f64,
    pub count: usize,
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default = "one")]
    pub weight_ratio: f64,
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn euclid() -> Norm {
    Norm::EUCLIDEAN
}

/// Config form: `{"atoms":[{"z":[1.0],"w":1.0}], "eps":0.0}` or a geometric family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub geometric: Option<GeometricSpec>,
    #[serde(default)]
    pub eps: f64,
    /// Norm exponent on the mark space.
    #[serde(default = "euclid")]
    pub s: Norm,
    /// Dimension; required only for the zero measure in `d > 1`.
    #[serde(default)]
    pub d: Option<usize>,
}

impl MeasureSpec {
    pub fn build(&self) -> Result<MarkMeasure> {
        let base = match (&self.geometric, self.atoms.is_empty()) {
            (Some(_), false) => return Err(Error::config("measure", "give either `atoms` or `geometric`, not both")),
            (Some(g), true) => MarkMeasure::geometric(g, self.s)?,
            (None, _) => {
                let dim = self.d.or_else(|| self.atoms.first().map(|a| a.z.len())).unwrap_or(1);
                MarkMeasure::with_dim(dim, self.atoms.iter().map(|a| (a.z.clone(), a.w)).collect(), self.s)?
            }
        };
        if let Some(d) = self.d {
            if d != base.dim() {
                return Err(Error::DimensionMismatch { expected: d, got: base.dim() });
            }
        }
        base.truncate(self.eps)
    }
}

/// One realization of the PRM on `(0, T]`, events sorted by time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PRMPath {
    pub horizon: f64,
    pub dim: usize,
    pub times: Vec<f64>,
    /// Atom id of each event's mark.
    pub atoms: Vec<usize>,
    /// Marks, `dim` values per event.
    pub marks: Vec<f64>,
}

impl PRMPath {
    pub fn empty(horizon: f64, dim: usize) -> Self {
        Self { horizon, dim, times: Vec::new(), atoms: Vec::new(), marks: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mark(&self, i: usize) -> &[f64] {
        &self.marks[i * self.dim..(i + 1) * self.dim]
    }

    /// Number of events in `(a, b]`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        self.times.partition_point(|&t| t <= b) - self.times.partition_point(|&t| t <= a)
    }

    /// Events with `t ≤ s`: the information available at time `s`.
    pub fn prefix(&self, s: f64) -> PRMPath {
        let k = self.times.partition_point(|&t| t <= s);
        PRMPath {
            horizon: self.horizon,
            dim: self.dim,
            times: self.times[..k].to_vec(),
            atoms: self.atoms[..k].to_vec(),
            marks: self.marks[..k * self.dim].to_vec(),
        }
    }

    /// Writes `t,z_1,…,z_d` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> =
            std::iter::once("t".to_string()).chain((1..=self.dim).map(|i| format!("z_{i}"))).collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            let row: Vec<String> =
                std::iter::once(self.times[i]).chain(self.mark(i).iter().copied()).map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Samples path `index` of the family `key`.
pub fn sample_prm(nu: &MarkMeasure, horizon: f64, key: &StreamKey, index: u64) -> Result<PRMPath> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::param("T", "horizon must be positive and finite"));
    }
    if !nu.total_mass().is_finite() {
        return Err(Error::Measure("infinite total mass; truncate first".into()));
    }
    let mut events: Vec<(f64, usize)> = Vec::new();
    for (pos, atom) in nu.atoms().iter().enumerate() {
        let mut rng = key.substream(atom.id as u64).path_rng(index);
        let count =
            Poisson::new(atom.w * horizon).map_err(|e| Error::Measure(e.to_string()))?.sample(&mut rng) as usize;
        for _ in 0..count {
            // 1 − U with U ∈ [0, 1) lands in (0, 1].
            let u: f64 = rng.random();
            events.push((horizon * (1.0 - u), pos));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for i in 1..events.len() {
        if events[i].0 <= events[i - 1].0 {
            events[i].0 = events[i - 1].0.next_up();
        }
    }
    let dim = nu.dim();
    let mut path = PRMPath::empty(horizon, dim);
    path.times.reserve(events.len());
    for (t, pos) in events {
        let atom = &nu.atoms()[pos];
        path.times.push(t);
        path.atoms.push(atom.id);
        path.marks.extend_from_slice(&atom.z);
    }
    Ok(path)
}

/// A càdlàg path with finitely many jumps.
pub trait Cadlag {
    /// All discontinuities `(t, X(t) − X(t−))`, in time order.
    fn jumps(&self) -> Vec<(f64, Vec<f64>)>;
}

/// Pure-jump Lévy triplet `(m, 0, ν)` with finite `ν`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevyTriplet {
    pub drift: Vec<f64>,
    pub measure: MarkMeasure,
}

impl LevyTriplet {
    pub fn new(drift: Vec<f64>, measure: MarkMeasure) -> Result<Self> {
        if drift.len() != measure.dim() {
            return Err(Error::DimensionMismatch { expected: measure.dim(), got: drift.len() });
        }
        Ok(Self { drift, measure })
    }

    /// `exp(t[i⟨m,θ⟩ + Σ_j w_j (e^{i⟨θ,z_j⟩} − 1)])`, the compound-Poisson form of
    /// the Lévy–Khinchin exponent (no small-jump compensation).
    pub fn characteristic_function(&self, t: f64, theta: &[f64]) -> Complex64 {
        let dot = |a: &[f64]| a.iter().zip(theta).map(|(x, y)| x * y).sum::<f64>();
        let mut exponent = Complex64::new(0.0, dot(&self.drift));
        for a in self.measure.atoms() {
            exponent += a.w * (Complex64::new(0.0, dot(&a.z)).exp() - 1.0);
        }
        (t * exponent).exp()
    }
}

/// `L(t) = m t + Σ_{t_i ≤ t} z_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyPath {
    pub drift: Vec<f64>,
    pub prm: PRMPath,
}

impl LevyPath {
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let k = self.prm.times.partition_point(|&s| s <= t);
        self.accumulate(t, k)
    }

    pub fn left_limit(&self, t: f64) -> Vec<f64> {
        let k = self.prm.times.partition_point(|&s| s < t);
        self.accumulate(t, k)
    }

    fn accumulate(&self, t: f64, k: usize) -> Vec<f64> {
        let d = self.drift.len();
        let mut v: Vec<f64> = self.drift.iter().map(|m| m * t).collect();
        for i in 0..k {
            for (x, z) in v.iter_mut().zip(self.prm.mark(i)) {
                *x += z;
            }
        }
        debug_assert_eq!(v.len(), d);
        v
    }
}

impl Cadlag for LevyPath {
    fn jumps(&self) -> Vec<(f64, Vec<f64>)> {
        (0..self.prm.len()).map(|i| (self.prm.times[i], self.prm.mark(i).to_vec())).collect()
    }
}

pub fn levy_path(triplet: &LevyTriplet, horizon: f64, key: &StreamKey, index: u64) -> Result<LevyPath> {
    Ok(LevyPath { drift: triplet.drift.clone(), prm: sample_prm(&triplet.measure, horizon, key, index)? })
}

/// `count` equally spaced multiples of `direction` from `min` to `max`, inclusive.
pub fn theta_line(min: f64, max: f64, count: usize, direction: &[f64]) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let s = if count == 1 { min } else { min + (max - min) * i as f64 / (count - 1) as f64 };
            direction.iter().map(|d| d * s).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfPoint {
    pub theta: Vec<f64>,
    pub empirical: [f64; 2],
    pub analytic: [f64; 2],
    pub abs_error: f64,
    /// Standard error of the empirical CF, `sqrt(Var cos + Var sin)/√N`.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfReport {
    pub t: f64,
    pub paths: usize,
    pub points: Vec<CfPoint>,
    pub sup_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Compares the empirical characteristic function of `L(t)` over `n` paths with
/// the analytic one on each `θ`; passes when the sup error is at most `4/√n`.
pub fn cf_check(
    triplet: &LevyTriplet,
    t: f64,
    thetas: &[Vec<f64>],
    n: usize,
    key: &StreamKey,
    threads: usize,
) -> Result<CfReport> {
    if n == 0 {
        return Err(Error::param("N", "must be positive"));
    }
    if let Some(th) = thetas.iter().find(|th| th.len() != triplet.drift.len()) {
        return Err(Error::DimensionMismatch { expected: triplet.drift.len(), got: th.len() });
    }
    let values: Vec<Result<Vec<f64>>> =
        par_map(n, threads, |i| levy_path(triplet, t, key, i as u64).map(|p| p.value_at(t)));
    let values: Vec<Vec<f64>> = values.into_iter().collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let phase: Vec<f64> = values.iter().map(|v| v.iter().zip(theta).map(|(a, b)| a * b).sum()).collect();
        let re = Estimate::from_samples(&phase.iter().map(|x| x.cos()).collect::<Vec<_>>());
        let im = Estimate::from_samples(&phase.iter().map(|x| x.sin()).collect::<Vec<_>>());
        let analytic = triplet.characteristic_function(t, theta);
        let err = (Complex64::new(re.mean, im.mean) - analytic).norm();
        points.push(CfPoint {
            theta: theta.clone(),
            empirical: [re.mean, im.mean],
            analytic: [analytic.re, analytic.im],
            abs_error: err,
            se: (re.se * re.se + im.se * im.se).sqrt(),
        });
    }
    let sup_error = points.iter().map(|p| p.abs_error).fold(0.0, f64::max);
    let tolerance = 4.0 / (n as f64).sqrt();
    Ok(CfReport {
        t,
        paths: n,
        points,
        sup_error,
        tolerance,
        pass: sup_error <= tolerance,
        notes: vec!["compound-Poisson form without small-jump compensation; drift absorbed into m".into()],
    })
}

/// `E|ξ − λ|^p` for `ξ ∼ Poisson(λ)`, by summing the pmf in log space until the
/// remaining tail is below `1e−12`.
pub fn poisson_central_moment(lambda: f64, p: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::param("lambda", "must be positive and finite"));
    }
    if p.is_nan() || p < 0.0 {
        return Err(Error::param("p", "must be nonnegative"));
    }
    let ln_l = lambda.ln();
    let mut ln_pmf = -lambda;
    let mut terms = Vec::new();
    let mut k = 0u64;
    loop {
        let x = k as f64;
        let term = ln_pmf.exp() * (x - lambda).abs().powf(p);
        terms.push(term);
        // Past the mode the terms decay at least geometrically with ratio
        // ρ = λ/(k+1)·((k+1−λ)/(k−λ))^p; bound the tail by term·ρ/(1−ρ).
        if x > lambda + 1.0 {
            let rho = lambda / (x + 1.0) * ((x + 1.0 - lambda) / (x - lambda)).powf(p);
            if rho < 1.0 && term * rho / (1.0 - rho) < 1e-15 {
                break;
            }
        }
        k += 1;
        ln_pmf += ln_l - (k as f64).ln();
        if k > 100_000_000 {
            return Err(Error::NonFinite("poisson_central_moment did not converge".into()));
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Upper bound `2^{2−p} λ` for `E|ξ − λ|^p`, `1 ≤ p ≤ 2`.
pub fn poisson_moment_bound(lambda: f64, p: f64) -> f64 {
    2f64.powf(2.0 - p) * lambda
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonLemmaRow {
    pub lambda: f64,
    pub p: f64,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn poisson_lemma(lambdas: &[f64], ps: &[f64]) -> Result<Vec<PoissonLemmaRow>> {
    let mut rows = Vec::new();
    for &lambda in lambdas {
        for &p in ps {
            if !(1.0..=2.0).contains(&p) {
                return Err(Error::param("p", "the moment lemma needs 1 ≤ p ≤ 2"));
            }
            let value = poisson_central_moment(lambda, p)?;
            let bound = poisson_moment_bound(lambda, p);
            rows.push(PoissonLemmaRow { lambda, p, value, bound, pass: value <= bound * (1.0 + 1e-12) });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key() -> StreamKey {
        StreamKey::labelled(7, "prm-tests")
    }

    #[test]
    fn zero_measure_gives_empty_paths() {
        let nu = MarkMeasure::with_dim(2, vec![], Norm::EUCLIDEAN).unwrap();
        assert_eq!(nu.total_mass(), 0.0);
        assert!(sample_prm(&nu, 3.0, &key(), 0).unwrap().is_empty());
    }

    #[test]
    fn truncation_examples() {
        let nu =
            MarkMeasure::new(vec![(vec![0.1], 5.0), (vec![1.0], 1.0), (vec![-2.0], 1.0)], Norm::EUCLIDEAN).unwrap();
        assert_eq!(nu.truncate(0.0).unwrap(), nu);
        let t = nu.truncate(0.5).unwrap();
        assert_eq!(t.total_mass(), 2.0);
        assert_eq!(t.atoms().iter().map(|a| a.id).collect::<Vec<_>>(), vec![1, 2]);
        assert!(nu.truncate_nonempty(5.0).is_err());
        assert!(nu.truncate(-1.0).is_err());

        let g = MarkMeasure::geometric(
            &GeometricSpec { first: 1.0, ratio: 0.5, count: 12, weight: 1.0, weight_ratio: 2.0, direction: None },
            Norm::EUCLIDEAN,
        )
        .unwrap();
        let mut prev = 0.0;
        for eps in [1.0, 0.5, 0.25, 0.125, 0.0625, 0.0] {
            let m = g.truncate(eps).unwrap().total_mass();
            assert!(m >= prev);
            prev = m;
        }
        assert_eq!(prev, g.total_mass());
    }

    #[test]
    fn measure_validation() {
        assert!(MarkMeasure::new(vec![(vec![1.0], 0.0)], Norm::EUCLIDEAN).is_err());
        assert!(MarkMeasure::new(vec![(vec![1.0], 1.0), (vec![1.0, 2.0], 1.0)], Norm::EUCLIDEAN).is_err());
        let spec: MeasureSpec = serde_json::from_str(r#"{"atoms":[{"z":[1.0],"w":1.0}],"eps":0.0}"#).unwrap();
        assert_eq!(spec.build().unwrap(), MarkMeasure::dirac(1.0, 1.0).unwrap());
        assert!(serde_json::from_str::<MeasureSpec>(r#"{"atoms":[],"bogus":1}"#).is_err());
    }

    #[test]
    fn paths_are_sorted_deterministic_and_in_support() {
        let nu = MarkMeasure::new(vec![(vec![1.0, 0.0], 2.0), (vec![0.0, -1.0], 3.0)], Norm::EUCLIDEAN).unwrap();
        for i in 0..200 {
            let a = sample_prm(&nu, 2.0, &key(), i).unwrap();
            assert_eq!(a, sample_prm(&nu, 2.0, &key(), i).unwrap());
            assert!(a.times.windows(2).all(|w| w[0] < w[1]));
            assert!(a.times.iter().all(|&t| t > 0.0 && t <= 2.0));
            for j in 0..a.len() {
                assert_eq!(a.mark(j), nu.atom_by_id(a.atoms[j]).unwrap().z.as_slice());
            }
        }
    }

    #[test]
    fn counts_are_poisson_and_independent() {
        let nu = MarkMeasure::dirac(1.0, 1.0).unwrap();
        let n = 100_000;
        let paths: Vec<PRMPath> = par_map(n, 0, |i| sample_prm(&nu, 1.0, &key(), i as u64).unwrap());
        let counts: Vec<f64> = paths.iter().map(|p| p.len() as f64).collect();
        let est = Estimate::from_samples(&counts);
        assert!((est.mean - 1.0).abs() <= 3.0 * (1.0 / n as f64).sqrt(), "{est:?}");
        let var = est.se * est.se * n as f64;
        assert!((var - 1.0).abs() < 0.03, "{var}");

        let a: Vec<f64> = paths.iter().map(|p| p.count_in(0.0, 0.5) as f64).collect();
        let b: Vec<f64> = paths.iter().map(|p| p.count_in(0.5, 1.0) as f64).collect();
        let (ma, mb) = (pairwise_sum(&a) / n as f64, pairwise_sum(&b) / n as f64);
        let cov: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
        let corr = pairwise_sum(&cov) / n as f64 / 0.5;
        assert!(corr.abs() <= 3.0 / (n as f64).sqrt(), "{corr}");
    }

    #[test]
    fn levy_path_examples() {
        let no_jumps = LevyTriplet::new(vec![1.0], MarkMeasure::with_dim(1, vec![], Norm::EUCLIDEAN).unwrap()).unwrap();
        let p = levy_path(&no_jumps, 1.0, &key(), 0).unwrap();
        assert_eq!(p.value_at(0.3), vec![0.3]);
        assert!(p.jumps().is_empty());

        let tri = LevyTriplet::new(vec![0.0], MarkMeasure::dirac(1.0, 1.0).unwrap()).unwrap();
        let n = 100_000;
        let ends: Vec<f64> = par_map(n, 0, |i| levy_path(&tri, 1.0, &key(), i as u64).unwrap().value_at(1.0)[0]);
        let est = Estimate::from_samples(&ends);
        assert!((est.mean - 1.0).abs() <= 3.0 * est.se);

        let p = levy_path(&tri, 5.0, &key(), 3).unwrap();
        let jumps = p.jumps();
        assert_eq!(jumps.len(), p.prm.len());
        for (k, (t, dz)) in jumps.iter().enumerate() {
            assert_eq!(*t, p.prm.times[k]);
            let diff = p.value_at(*t)[0] - p.left_limit(*t)[0];
            assert!((diff - dz[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_jump_path() {
        let prm = PRMPath { horizon: 1.0, dim: 1, times: vec![0.5], atoms: vec![0], marks: vec![2.0] };
        let p = LevyPath { drift: vec![0.0], prm };
        assert_eq!(p.jumps(), vec![(0.5, vec![2.0])]);
    }

    #[test]
    fn cf_examples() {
        let tri = LevyTriplet::new(vec![0.0], MarkMeasure::dirac(1.0, 1.0).unwrap()).unwrap();
        let at0 = tri.characteristic_function(1.0, &[0.0]);
        assert_eq!((at0.re, at0.im), (1.0, 0.0));
        let rep = cf_check(&tri, 1.0, &[vec![0.0]], 100, &key(), 1).unwrap();
        assert_eq!(rep.sup_error, 0.0);

        let drift = LevyTriplet::new(vec![1.0], MarkMeasure::with_dim(1, vec![], Norm::EUCLIDEAN).unwrap()).unwrap();
        let rep = cf_check(&drift, 0.7, &theta_line(-3.0, 3.0, 7, &[1.0]), 10, &key(), 1).unwrap();
        for pt in &rep.points {
            assert!(pt.abs_error < 1e-14);
            assert!(((pt.empirical[0].powi(2) + pt.empirical[1].powi(2)).sqrt() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn poisson_moment_examples() {
        for lambda in [0.25, 1.0, 3.7, 40.0] {
            assert!((poisson_central_moment(lambda, 2.0).unwrap() - lambda).abs() < 1e-9 * lambda.max(1.0));
        }
        assert!((poisson_central_moment(0.5, 1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-12);
        // Mean absolute deviation closed form for λ < 1: 2λe^{−λ}.
        let l = 0.3f64;
        assert!((poisson_central_moment(l, 1.0).unwrap() - 2.0 * l * (-l).exp()).abs() < 1e-12);
        let v = poisson_central_moment(4.0, 1.5).unwrap();
        assert!(v <= 2f64.sqrt() * 4.0);
        assert!(poisson_lemma(&[1.0], &[2.5]).is_err());
    }

    #[test]
    fn csv_dump() {
        let prm = PRMPath { horizon: 1.0, dim: 2, times: vec![0.25], atoms: vec![0], marks: vec![1.0, -0.5] };
        let mut buf = Vec::new();
        prm.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,z_1,z_2\n0.25,1,-0.5\n");
    }
}
