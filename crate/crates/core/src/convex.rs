//! Young-conjugate convex functions.
//!
//! A [`ConvexFunction`] is `Φ(t) = ∫_0^t φ(s) ds` with `φ` nondecreasing. Two
//! representations are supported: the closed-form power `Φ(t) = a·t^p`, and a
//! piecewise-linear density `φ` on a breakpoint grid whose integral is evaluated
//! exactly segment by segment. Breakpoints may repeat, which encodes a jump of
//! `φ`; evaluation of `φ` is left-continuous.
//!
//! The conjugate `Ψ` is built from the generalized inverse
//! `ψ(s) = inf{t ≥ 0 : φ(t) ≥ s}`. For a piecewise-linear `φ` this is the
//! reflection of its graph across the diagonal, so the dual table is the primal
//! one with the coordinate arrays swapped.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Number of geometric grid points per decade used for supremum constants.
pub const POINTS_PER_DECADE: usize = 10_000;

/// Behaviour of a tabulated density beyond its last breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    /// `φ` stays at its last value; `Φ` continues linearly.
    Linear,
    /// `φ = Φ = +∞` past the last breakpoint (the dual of a density bounded by
    /// its last value).
    Infinite,
}

impl Extension {
    fn swapped(self) -> Self {
        match self {
            Extension::Linear => Extension::Infinite,
            Extension::Infinite => Extension::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    t: Vec<f64>,
    phi: Vec<f64>,
    /// `Φ(t_k)`.
    cum: Vec<f64>,
    extension: Extension,
}

impl Table {
    pub fn new(t: Vec<f64>, phi: Vec<f64>, extension: Extension) -> Result<Self> {
        if t.len() != phi.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), got: phi.len() });
        }
        if t.len() < 2 {
            return Err(Error::param("t", "a tabulated density needs at least two breakpoints"));
        }
        if t[0] != 0.0 || phi[0] != 0.0 {
            return Err(Error::param("t", "the table must start at t = 0 with φ(0) = 0"));
        }
        if t.iter().chain(phi.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("t", "breakpoints and densities must be finite"));
        }
        for k in 1..t.len() {
            if t[k] < t[k - 1] {
                return Err(Error::param("t", format!("breakpoints decrease at index {k}")));
            }
            if phi[k] < phi[k - 1] {
                return Err(Error::NotNondecreasing { index: k, prev: phi[k - 1], next: phi[k] });
            }
        }
        let last = t.len() - 1;
        if t[last] == 0.0 && phi[last] == 0.0 {
            return Err(Error::param("t", "table describes the zero function"));
        }
        let mut cum = vec![0.0; t.len()];
        for k in 1..t.len() {
            cum[k] = cum[k - 1] + 0.5 * (phi[k] + phi[k - 1]) * (t[k] - t[k - 1]);
        }
        Ok(Self { t, phi, cum, extension })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.t
    }

    pub fn densities(&self) -> &[f64] {
        &self.phi
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    fn last(&self) -> usize {
        self.t.len() - 1
    }

    /// Largest argument with finite values.
    pub fn domain_max(&self) -> f64 {
        match self.extension {
            Extension::Linear => f64::INFINITY,
            Extension::Infinite => self.t[self.last()],
        }
    }

    fn interp(&self, k: usize, x: f64) -> f64 {
        // segment [t[k], t[k + 1]]
        let (x0, x1) = (self.t[k], self.t[k + 1]);
        if x1 == x0 {
            return self.phi[k];
        }
        self.phi[k] + (self.phi[k + 1] - self.phi[k]) * (x - x0) / (x1 - x0)
    }

    fn beyond(&self, x: f64) -> (f64, f64) {
        let n = self.last();
        match self.extension {
            Extension::Linear => (self.phi[n], self.cum[n] + self.phi[n] * (x - self.t[n])),
            Extension::Infinite => (f64::INFINITY, f64::INFINITY),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.phi[0];
        }
        let k = self.t.partition_point(|&v| v < x);
        if k == self.t.len() {
            return self.beyond(x).0;
        }
        self.interp(k - 1, x)
    }

    pub fn density_right(&self, x: f64) -> f64 {
        let k = self.t.partition_point(|&v| v <= x.max(0.0));
        if k == self.t.len() {
            return self.beyond(x + 1.0).0;
        }
        if k == 0 {
            return self.phi[0];
        }
        self.interp(k - 1, x.max(0.0))
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let k = self.t.partition_point(|&v| v < x);
        if k == self.t.len() {
            return self.beyond(x).1;
        }
        let x0 = self.t[k - 1];
        let f = self.interp(k - 1, x);
        self.cum[k - 1] + 0.5 * (self.phi[k - 1] + f) * (x - x0)
    }

    fn dual(&self) -> Table {
        Table::new(self.phi.clone(), self.t.clone(), self.extension.swapped())
            .expect("reflection of a valid table is valid")
    }
}

/// `Φ : [0, ∞) → [0, ∞]`, convex and nondecreasing with `Φ(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexFunction {
    /// `Φ(t) = scale · t^p`.
    Power {
        scale: f64,
        p: f64,
    },
    Table(Table),
}

/// `Φ(t) = t^p`.
pub fn power_phi(p: f64) -> Result<ConvexFunction> {
    ConvexFunction::power(1.0, p)
}

impl ConvexFunction {
    pub fn power(scale: f64, p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::param("p", format!("power exponent must be finite and ≥ 1, got {p}")));
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::param("scale", format!("scale must be positive, got {scale}")));
        }
        Ok(ConvexFunction::Power { scale, p })
    }

    /// Piecewise-linear density through `(t_k, φ_k)`, held constant past the grid.
    pub fn table(t: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        Ok(ConvexFunction::Table(Table::new(t, phi, Extension::Linear)?))
    }

    /// `Φ(t)`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            ConvexFunction::Power { scale, p } => scale * t.max(0.0).powf(*p),
            ConvexFunction::Table(tab) => tab.value(t),
        }
    }

    /// `φ(t)`, left-continuous.
    pub fn density(&self, t: f64) -> f64 {
        match self {
            ConvexFunction::Power { scale, p } => {
                if *p == 1.0 {
                    *scale
                } else {
                    scale * p * t.max(0.0).powf(p - 1.0)
                }
            }
            ConvexFunction::Table(tab) => tab.density(t),
        }
    }

    /// `φ(t+)`.
    pub fn density_right(&self, t: f64) -> f64 {
        match self {
            ConvexFunction::Power { .. } => self.density(t),
            ConvexFunction::Table(tab) => tab.density_right(t),
        }
    }

    /// `∫_0^x t dφ(t) = x·φ(x) − Φ(x)` (integration by parts; `φ` evaluated
    /// left-continuously so a jump exactly at `x` is excluded).
    pub fn stieltjes_moment(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            ConvexFunction::Power { scale, p } => scale * (p - 1.0) * x.powf(*p),
            ConvexFunction::Table(_) => (x * self.density(x) - self.value(x)).max(0.0),
        }
    }

    pub fn domain_max(&self) -> f64 {
        match self {
            ConvexFunction::Power { .. } => f64::INFINITY,
            ConvexFunction::Table(tab) => tab.domain_max(),
        }
    }

    /// Default range on which supremum constants are scanned.
    pub fn default_range(&self) -> f64 {
        match self {
            ConvexFunction::Power { .. } => 1.0,
            ConvexFunction::Table(tab) => tab.t[tab.last()],
        }
    }

    pub fn power_exponent(&self) -> Option<f64> {
        match self {
            ConvexFunction::Power { p, .. } => Some(*p),
            ConvexFunction::Table(_) => None,
        }
    }

    /// The Young conjugate `Ψ`, built through the generalized inverse of `φ`.
    pub fn dual(&self) -> ConvexFunction {
        match self {
            ConvexFunction::Power { scale, p } if *p > 1.0 => {
                let q = p / (p - 1.0);
                ConvexFunction::Power { scale: (scale * p).powf(-1.0 / (p - 1.0)) / q, p: q }
            }
            ConvexFunction::Power { scale, .. } => {
                // φ ≡ a: ψ = 0 on [0, a] and +∞ beyond.
                ConvexFunction::Table(
                    Table::new(vec![0.0, *scale], vec![0.0, 0.0], Extension::Infinite).expect("valid clipped table"),
                )
            }
            ConvexFunction::Table(tab) => ConvexFunction::Table(tab.dual()),
        }
    }

    /// `sup_λ Φ(factor·λ) / Φ(λ)` over `λ ∈ (0, t_max]`.
    pub fn dilation_constant(&self, factor: f64, t_max: f64) -> f64 {
        if let ConvexFunction::Power { p, .. } = self {
            return factor.powf(*p);
        }
        let mut sup = 0.0f64;
        for lambda in self.scan_grid(t_max) {
            let den = self.value(lambda);
            let num = self.value(factor * lambda);
            if den > 0.0 {
                sup = sup.max(num / den);
            } else if num > 0.0 {
                return f64::INFINITY;
            }
        }
        sup
    }

    /// Geometric grid on `(0, t_max]` with [`POINTS_PER_DECADE`] points per
    /// decade, merged with the breakpoints (and their halves) inside the range.
    fn scan_grid(&self, t_max: f64) -> Vec<f64> {
        let t_max = t_max.min(self.domain_max());
        let mut anchors: Vec<f64> = Vec::new();
        if let ConvexFunction::Table(tab) = self {
            for &b in &tab.t {
                if b > 0.0 && b <= t_max {
                    anchors.push(b);
                    anchors.push(0.5 * b);
                }
            }
        }
        let smallest = anchors.iter().copied().fold(t_max, f64::min);
        let lo = (smallest * 1e-3).min(t_max * 1e-4);
        let decades = (t_max / lo).log10();
        let n = (decades * POINTS_PER_DECADE as f64).ceil() as usize + 1;
        let mut grid: Vec<f64> = (0..=n).map(|i| lo * (t_max / lo).powf(i as f64 / n as f64)).collect();
        grid.extend(anchors);
        grid.retain(|&g| g > 0.0 && g <= t_max);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }
}

/// Growth constant `c_Φ = sup Φ(2λ)/Φ(λ)` on `(0, t_max]`; `2^p` for powers.
pub fn growth_constant(f: &ConvexFunction, t_max: f64) -> Result<f64> {
    if t_max.is_nan() || t_max <= 0.0 {
        return Err(Error::param("t_max", "must be positive"));
    }
    Ok(f.dilation_constant(2.0, t_max))
}

/// `c_Φ^∗ = sup_{u>0} u·φ(u)/Φ(u)` on `(0, t_max]`; `p` for powers.
///
/// For tables this is a grid supremum, hence a lower bound of the true one.
pub fn c_star(f: &ConvexFunction, t_max: f64) -> Result<f64> {
    if t_max.is_nan() || t_max <= 0.0 {
        return Err(Error::param("t_max", "must be positive"));
    }
    if let ConvexFunction::Power { p, .. } = f {
        return Ok(*p);
    }
    let mut sup = 0.0f64;
    for u in f.scan_grid(t_max) {
        let big = f.value(u);
        if big <= 0.0 {
            return Err(Error::DegenerateConvex(u));
        }
        let dens = f.density(u).max(f.density_right(u));
        if dens.is_finite() {
            sup = sup.max(u * dens / big);
        }
    }
    Ok(sup)
}

/// `(Φ, Ψ)` together with `c_Φ^∗` and `C_Ψ^∗`.
///
/// A starred constant is `+∞` when it is undefined on the scanned range (for
/// instance `Ψ` vanishing on an interval, as for `Φ(t) = t`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatePair {
    pub primal: ConvexFunction,
    pub dual: ConvexFunction,
    pub c_star_primal: f64,
    pub c_star_dual: f64,
}

pub fn conjugate(f: &ConvexFunction) -> ConjugatePair {
    let dual = f.dual();
    let c_star_primal = c_star(f, f.default_range()).unwrap_or(f64::INFINITY);
    let c_star_dual = c_star(&dual, dual.default_range()).unwrap_or(f64::INFINITY);
    ConjugatePair { primal: f.clone(), dual, c_star_primal, c_star_dual }
}

impl ConjugatePair {
    /// `Φ(u) + Ψ(v) − u·v`, nonnegative by Young's inequality.
    pub fn young_gap(&self, u: f64, v: f64) -> f64 {
        self.primal.value(u) + self.dual.value(v) - u * v
    }

    /// Constant `4(C_Ψ^∗ − 1)` of the Φ-version of Doob's inequality.
    pub fn doob_constant(&self) -> f64 {
        4.0 * (self.c_star_dual - 1.0)
    }

    /// Constant `(c_Φ^∗)^{2 c_Φ^∗}` of the conditional-sum lemma.
    pub fn conditional_sum_constant(&self) -> f64 {
        self.c_star_primal.powf(2.0 * self.c_star_primal)
    }
}

/// Largest violation of each identity/inequality over a grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `|u φ(u) − Φ(u) − Ψ(φ(u))|`.
    pub fenchel_equality: f64,
    /// `max(0, uv − Φ(u) − Ψ(v))` over grid pairs.
    pub young: f64,
    /// `max(0, Φ(a u) − a Φ(u))`, `0 < a ≤ 1`. The printed right-hand side
    /// `a Φ(a)` is not scale-consistent; this is the convexity form.
    pub scaling: f64,
    /// `max(0, Φ(t₁ ∨ t₂) − Φ(t₁) − Φ(t₂))`.
    pub max_subadditive: f64,
    /// `max(0, Φ(r t) − r^{c*} Φ(t))`, `r ≥ 1`.
    pub power_growth: f64,
    /// `max(0, Ψ(t) − (c*−1) Φ(ψ(t)))`.
    pub dual_bound: f64,
    pub points: usize,
}

impl IdentityReport {
    pub fn max_violation(&self) -> f64 {
        [self.fenchel_equality, self.young, self.scaling, self.max_subadditive, self.power_growth, self.dual_bound]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

const SCALING_FACTORS: [f64; 8] = [0.05, 0.1, 0.25, 0.4, 0.5, 0.75, 0.9, 1.0];
const GROWTH_FACTORS: [f64; 7] = [1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0];

fn excess(lhs: f64, rhs: f64) -> f64 {
    if lhs.is_finite() && rhs.is_finite() {
        (lhs - rhs).max(0.0)
    } else if lhs.is_finite() || rhs.is_infinite() {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn check_identities(pair: &ConjugatePair, grid: &[f64]) -> IdentityReport {
    let phi = &pair.primal;
    let psi = &pair.dual;
    let c = pair.c_star_primal;
    let mut rep = IdentityReport { points: grid.len(), ..Default::default() };
    for &u in grid {
        if u > phi.domain_max() {
            continue;
        }
        let d = phi.density(u);
        let lhs = u * d;
        let rhs = phi.value(u) + psi.value(d);
        if lhs.is_finite() && rhs.is_finite() {
            rep.fenchel_equality = rep.fenchel_equality.max((lhs - rhs).abs());
        }
        for &v in grid {
            rep.young = rep.young.max(excess(u * v, phi.value(u) + psi.value(v)));
            rep.max_subadditive = rep.max_subadditive.max(excess(phi.value(u.max(v)), phi.value(u) + phi.value(v)));
        }
        for a in SCALING_FACTORS {
            rep.scaling = rep.scaling.max(excess(phi.value(a * u), a * phi.value(u)));
        }
        for r in GROWTH_FACTORS {
            let big = phi.value(r * u);
            if big.is_finite() {
                rep.power_growth = rep.power_growth.max(excess(big, r.powf(c) * phi.value(u)));
            }
        }
        if u <= psi.domain_max() && c.is_finite() {
            let inv = psi.density(u);
            let rhs = (c - 1.0) * phi.value(inv);
            rep.dual_bound = rep.dual_bound.max(excess(psi.value(u), rhs));
        }
    }
    rep
}

/// Serialized form: `{"kind":"power","p":2.0}` or
/// `{"kind":"table","t":[...],"phi":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConvexSpec {
    Power {
        p: f64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        scale: f64,
    },
    Table {
        t: Vec<f64>,
        phi: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

impl ConvexSpec {
    pub fn build(&self) -> Result<ConvexFunction> {
        match self {
            ConvexSpec::Power { p, scale } => ConvexFunction::power(*scale, *p),
            ConvexSpec::Table { t, phi } => {
                if t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::param("t", "table breakpoints must be strictly increasing"));
                }
                ConvexFunction::table(t.clone(), phi.clone())
            }
        }
    }
}

impl Default for ConvexSpec {
    fn default() -> Self {
        ConvexSpec::Power { p: 2.0, scale: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn power_values() {
        let f = power_phi(2.0).unwrap();
        assert_eq!((f.value(3.0), f.density(3.0)), (9.0, 6.0));
        let f = power_phi(1.0).unwrap();
        assert_eq!((f.value(5.0), f.density(5.0)), (5.0, 1.0));
        let f = power_phi(1.5).unwrap();
        assert!(close(f.value(4.0), 8.0, 1e-15));
        assert!(close(f.density(4.0), 3.0, 1e-15));
        assert!(power_phi(0.5).is_err());
    }

    #[test]
    fn square_conjugate_is_quarter_square() {
        let pair = conjugate(&power_phi(2.0).unwrap());
        for s in [0.0, 0.5, 1.0, 3.0] {
            assert!(close(pair.dual.value(s), s * s / 4.0, 1e-14));
            assert!(close(pair.dual.density(s), s / 2.0, 1e-14));
        }
        assert_eq!(pair.young_gap(3.0, 2.0), 4.0);
        assert_eq!(pair.c_star_dual, 2.0);
        assert_eq!(pair.doob_constant(), 4.0);
        assert_eq!(pair.conditional_sum_constant(), 16.0);
    }

    #[test]
    fn linear_conjugate_is_clipped() {
        let pair = conjugate(&power_phi(1.0).unwrap());
        // ψ(s) = inf{t : 1 ≥ s}: 0 on [0, 1], unbounded beyond.
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(pair.dual.density(s), 0.0);
            assert_eq!(pair.dual.value(s), 0.0);
        }
        assert!(pair.dual.value(1.5).is_infinite());
        assert!(pair.dual.density(1.5).is_infinite());
        assert_eq!(pair.c_star_primal, 1.0);
        assert_eq!(pair.conditional_sum_constant(), 1.0);
        // Dual of the dual gives back Φ(t) = t.
        let back = pair.dual.dual();
        for t in [0.1, 1.0, 7.5] {
            assert!(close(back.value(t), t, 1e-14));
        }
    }

    #[test]
    fn flat_segments_invert_to_left_endpoint() {
        // φ = 0 on [0,1], then slope 1 up to t = 3, then a jump to 4 at t = 3.
        let f = ConvexFunction::Table(
            Table::new(vec![0.0, 1.0, 3.0, 3.0, 4.0], vec![0.0, 0.0, 2.0, 4.0, 4.0], Extension::Linear).unwrap(),
        );
        let g = f.dual();
        // ψ(s) = inf{t : φ(t) ≥ s}
        assert_eq!(g.density(0.0), 0.0);
        assert!(close(g.density(0.5), 1.5, 1e-15));
        assert!(close(g.density(2.0), 3.0, 1e-15));
        assert!(close(g.density(3.0), 3.0, 1e-15));
        assert!(close(g.density(4.0), 3.0, 1e-15));
        assert!(g.density(4.5).is_infinite());
        // Brute-force generalized inverse on a fine grid.
        let ts: Vec<f64> = (0..=400_000).map(|i| i as f64 * 1e-5).collect();
        for s in [0.1, 0.7, 1.3, 1.99, 2.5, 3.9] {
            let inv = ts.iter().copied().find(|&t| f.density(t) >= s).unwrap();
            assert!((g.density(s) - inv).abs() < 2e-5, "s = {s}");
        }
    }

    #[test]
    fn growth_and_c_star_closed_forms() {
        let sq = power_phi(2.0).unwrap();
        assert_eq!(growth_constant(&sq, 10.0).unwrap(), 4.0);
        assert_eq!(growth_constant(&power_phi(1.0).unwrap(), 10.0).unwrap(), 2.0);
        for p in [1.0, 1.25, 1.5, 2.0] {
            assert_eq!(c_star(&power_phi(p).unwrap(), 5.0).unwrap(), p);
        }
    }

    #[test]
    fn min_density_growth_by_dense_grid() {
        // φ(t) = min(t, 1) on [0, 4]
        let f = ConvexFunction::table(vec![0.0, 1.0, 4.0], vec![0.0, 1.0, 1.0]).unwrap();
        // Independent oracle: Φ(λ) = λ²/2 for λ ≤ 1, λ − 1/2 beyond.
        let big = |l: f64| if l <= 1.0 { 0.5 * l * l } else { l - 0.5 };
        let oracle = (1..=10_000).map(|i| 4.0 * i as f64 / 10_000.0).map(|l| big(2.0 * l) / big(l)).fold(0.0, f64::max);
        let c = growth_constant(&f, 4.0).unwrap();
        assert!((c - oracle).abs() < 1e-6, "{c} vs {oracle}");
        assert!((c - 4.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_table_has_no_c_star() {
        let f = ConvexFunction::table(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(c_star(&f, 2.0), Err(Error::DegenerateConvex(_))));
    }

    #[test]
    fn decreasing_density_rejected() {
        let err = ConvexFunction::table(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotNondecreasing { index: 2, .. }));
    }

    #[test]
    fn identities_for_square() {
        let pair = conjugate(&power_phi(2.0).unwrap());
        // u = 1: uφ(u) = 2 = Φ(1) + Ψ(2) = 1 + 1
        assert_eq!(pair.primal.density(1.0), 2.0);
        assert_eq!(pair.primal.value(1.0) + pair.dual.value(2.0), 2.0);
        // Φ(3) = 9 ≤ 3^{c*} Φ(1) = 9
        assert_eq!(pair.primal.value(3.0), 3f64.powf(pair.c_star_primal) * pair.primal.value(1.0));
        // Ψ(2) = 1 ≤ (2 − 1)·Φ(ψ(2)) = Φ(1) = 1
        assert_eq!(pair.dual.value(2.0), (pair.c_star_primal - 1.0) * pair.primal.value(pair.dual.density(2.0)));
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let rep = check_identities(&pair, &grid);
        assert!(rep.max_violation() < 1e-9, "{rep:?}");
    }

    #[test]
    fn spec_round_trip() {
        let s: ConvexSpec = serde_json::from_str(r#"{"kind":"power","p":2.0}"#).unwrap();
        assert_eq!(s, ConvexSpec::Power { p: 2.0, scale: 1.0 });
        let s: ConvexSpec = serde_json::from_str(r#"{"kind":"table","t":[0,1],"phi":[0,1]}"#).unwrap();
        assert!(s.build().is_ok());
        assert!(serde_json::from_str::<ConvexSpec>(r#"{"kind":"power","p":2.0,"q":1}"#).is_err());
    }
}
