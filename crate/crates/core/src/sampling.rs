//! Random objects: `μ^m`-distributed Littelmann increments and their random
//! walk, space-time Brownian motion with drift, and a sequential Monte Carlo
//! approximation of the conditioned alcove process `A`.
//!
//! For large `m` the truncated catalogs become infeasible. The endpoint law of
//! `μ^m` in the quotient is then drawn from [`LatticeEndpointLaw`], which uses
//! the level-one character `e^{Λ0} Σ_{γ∈Q} e^{γ − |γ|²δ/2}` up to the `δ`-string
//! factor, and single-direction string statistics from [`StringStepLaw`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use num_complex::Complex64;

use crate::crystal::{epsilon_phi, tail_mass_bound, CrystalVertex, ModuleCatalog};
use crate::error::{Error, Result};
use crate::harmonic::{default_m_cut, HarmonicPsi, LogValue};
use crate::path::{concatenate, PiecewiseLinearPath};
use crate::roots::{RootSystem, WeightVector};

/// A reproducible random stream identified by `(seed, stream)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Stream for worker `id` below this one.
    pub fn child(&self, id: u64) -> Self {
        Self {
            seed: self
                .seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(self.stream.rotate_left(17)),
            stream: id,
        }
    }
}

/// Drift `ν ∈ h*_R`, in `α`-coordinates; `ν̂ = Λ0 + ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftSpec {
    pub nu: Vec<f64>,
}

impl DriftSpec {
    pub fn new(nu: Vec<f64>) -> Self {
        Self { nu }
    }

    pub fn zero(rank: usize) -> Self {
        Self {
            nu: vec![0.0; rank],
        }
    }

    /// `ν = ρ/(n+1)`.
    pub fn barycentric(rs: &RootSystem) -> Self {
        Self {
            nu: rs.barycentric_drift().finite.to_vec(),
        }
    }

    pub fn nu_hat(&self, rs: &RootSystem) -> Result<WeightVector> {
        if self.nu.len() != rs.rank() {
            return Err(Error::RankMismatch {
                left: rs.rank(),
                right: self.nu.len(),
            });
        }
        let mut v = rs.finite(&self.nu);
        v.level = 1.0;
        Ok(v)
    }

    /// `⟨ν̂, α_i^∨⟩` for all `i`, failing unless all are positive.
    pub fn checked_pairings(&self, rs: &RootSystem) -> Result<Vec<f64>> {
        let nu_hat = self.nu_hat(rs)?;
        (0..=rs.rank())
            .map(|i| {
                let p = rs.pair(&nu_hat, i);
                if p > 0.0 {
                    Ok(p)
                } else {
                    Err(Error::InvalidDrift {
                        what: format!("<nu_hat, alpha_{i}^vee>"),
                        value: p,
                    })
                }
            })
            .collect()
    }
}

/// `μ^m` restricted to a truncated catalog: `P(η) ∝ e^{−(ω|ν̂)/m}`.
#[derive(Clone, Debug)]
pub struct CatalogSampler<'a> {
    catalog: &'a ModuleCatalog,
    probabilities: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
    tail_bound: f64,
}

impl<'a> CatalogSampler<'a> {
    pub fn new(rs: &RootSystem, catalog: &'a ModuleCatalog, m: f64) -> Result<Self> {
        if catalog.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        if !(m > 0.0) {
            return Err(Error::InvalidParameter(format!("m = {m} must be positive")));
        }
        let weights: Vec<f64> = catalog
            .vertices
            .iter()
            .map(|v| (-v.weight_exponent / m).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let probabilities = weights.iter().map(|w| w / total).collect();
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::InvalidParameter(format!("alias table: {e}")))?;
        Ok(Self {
            catalog,
            probabilities,
            alias,
            tail_bound: catalog.truncated_mass_bound(rs, m)?,
        })
    }

    pub fn catalog(&self) -> &ModuleCatalog {
        self.catalog
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Relative mass of the vertices beyond the cutoff.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &'a CrystalVertex {
        &self.catalog.vertices[self.sample_index(rng)]
    }
}

/// One draw from `μ^m` on the catalog.
pub fn sample_mu_m<R: Rng + ?Sized>(
    rs: &RootSystem,
    catalog: &ModuleCatalog,
    m: f64,
    rng: &mut R,
) -> Result<CrystalVertex> {
    Ok(CatalogSampler::new(rs, catalog, m)?.sample(rng).clone())
}

/// Concatenation `η_1 * … * η_steps` of i.i.d. `μ^m` increments, on
/// `[0, steps]`.
pub fn build_random_walk<R: Rng + ?Sized>(
    sampler: &CatalogSampler<'_>,
    steps: usize,
    rng: &mut R,
) -> Result<PiecewiseLinearPath> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let paths: Vec<PiecewiseLinearPath> = (0..steps)
        .map(|_| sampler.sample(rng).path.clone())
        .collect();
    concatenate(&paths)
}

/// Truncated `ch_λ(ν̂/m) = Σ_η e^{(η(1)|ν̂)/m}` and an absolute bound on the
/// dropped part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacterValue {
    pub value: f64,
    pub tail_bound: f64,
}

pub fn char_eval(rs: &RootSystem, catalog: &ModuleCatalog, m: f64) -> Result<CharacterValue> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let top = rs.form(&catalog.highest_weight, &catalog.nu_hat) / m;
    let sum: f64 = catalog
        .vertices
        .iter()
        .map(|v| (-v.weight_exponent / m).exp())
        .sum();
    let tail = tail_mass_bound(rs, &catalog.nu_hat, m, catalog.cutoff)?;
    Ok(CharacterValue {
        value: top.exp() * sum,
        tail_bound: top.exp() * tail,
    })
}

/// Gaussian increments of `b` with `E(x|b_t)(y|b_t) = t(x|y)`, in
/// `α`-coordinates.
#[derive(Clone, Debug)]
struct GaussianIncrement {
    frame: Vec<Vec<f64>>,
}

impl GaussianIncrement {
    fn new(rs: &RootSystem) -> Self {
        Self {
            frame: rs.orthonormal_frame(),
        }
    }

    fn add_to<R: Rng + ?Sized>(&self, x: &mut [f64], scale: f64, rng: &mut R) {
        for e in &self.frame {
            let z: f64 = StandardNormal.sample(rng);
            for (c, v) in x.iter_mut().zip(e) {
                *c += scale * z * v;
            }
        }
    }
}

/// `B_t = tΛ0 + b_t + tν` on a grid of step `≈ dt`, linearly interpolated.
pub fn sample_brownian<R: Rng + ?Sized>(
    rs: &RootSystem,
    horizon: f64,
    dt: f64,
    nu: &[f64],
    rng: &mut R,
) -> Result<PiecewiseLinearPath> {
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need T > 0 and dt > 0, got T = {horizon}, dt = {dt}"
        )));
    }
    if nu.len() != rs.rank() {
        return Err(Error::RankMismatch {
            left: rs.rank(),
            right: nu.len(),
        });
    }
    let steps = ((horizon / dt).round() as usize).max(1);
    let h = horizon / steps as f64;
    let noise = GaussianIncrement::new(rs);
    let mut x = vec![0.0; rs.rank()];
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(0.0);
    values.push(rs.zero());
    for k in 1..=steps {
        for (c, v) in x.iter_mut().zip(nu) {
            *c += v * h;
        }
        noise.add_to(&mut x, h.sqrt(), rng);
        let t = if k == steps { horizon } else { k as f64 * h };
        times.push(t);
        values.push(WeightVector::new(t, &x, 0.0));
    }
    PiecewiseLinearPath::new(times, values)
}

/// Law of `η(1)` under `μ^m` on `B(Λ0)`, in the quotient: `η(1) = Λ0 + γ`
/// with `γ ∈ Q` and `P(γ) ∝ e^{((γ|ν̂) − ℓ|γ|²/2)/m}`, `ℓ` the level of `ν̂`.
#[derive(Clone, Debug)]
pub struct LatticeEndpointLaw {
    rank: usize,
    m: f64,
    nu_hat: WeightVector,
    points: Vec<Vec<i64>>,
    probabilities: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

/// Terms with log-weight this far below the maximum are dropped.
const LATTICE_LOG_RANGE: f64 = 40.0;

impl LatticeEndpointLaw {
    pub fn new(rs: &RootSystem, nu_hat: &WeightVector, m: f64) -> Result<Self> {
        let level = nu_hat.level;
        if !(level > 0.0) || !(m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need positive level and m, got level {level}, m = {m}"
            )));
        }
        let n = rs.rank();
        let nu = nu_hat.finite.to_vec();
        let centre: Vec<f64> = nu.iter().map(|c| c / level).collect();
        let radius_sq = 2.0 * m * LATTICE_LOG_RANGE / level;
        let gram = rs.finite_gram();
        let g = nalgebra::DMatrix::from_fn(n, n, |i, j| gram[i][j]);
        let lambda_min = g.symmetric_eigenvalues().min();
        let half_width = (radius_sq / lambda_min).sqrt();
        let lo: Vec<i64> = centre
            .iter()
            .map(|c| (c - half_width).floor() as i64)
            .collect();
        let hi: Vec<i64> = centre
            .iter()
            .map(|c| (c + half_width).ceil() as i64)
            .collect();
        let log_weight = |gamma: &[f64]| {
            let diff: Vec<f64> = gamma.iter().zip(&centre).map(|(a, b)| a - b).collect();
            -level * rs.finite_norm_sq(&diff) / (2.0 * m)
        };
        let mut points = Vec::new();
        let mut logs = Vec::new();
        let mut current = lo.clone();
        loop {
            let gamma: Vec<f64> = current.iter().map(|&c| c as f64).collect();
            let lw = log_weight(&gamma);
            if lw >= -LATTICE_LOG_RANGE {
                points.push(current.clone());
                logs.push(lw);
            }
            let mut k = 0;
            loop {
                if k == n {
                    break;
                }
                current[k] += 1;
                if current[k] <= hi[k] {
                    break;
                }
                current[k] = lo[k];
                k += 1;
            }
            if k == n {
                break;
            }
        }
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let probabilities = weights.iter().map(|w| w / total).collect();
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::InvalidParameter(format!("alias table: {e}")))?;
        Ok(Self {
            rank: n,
            m,
            nu_hat: nu_hat.clone(),
            points,
            probabilities,
            alias,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn nu_hat(&self) -> &WeightVector {
        &self.nu_hat
    }

    pub fn support(&self) -> impl Iterator<Item = (&[i64], f64)> {
        self.points
            .iter()
            .map(Vec::as_slice)
            .zip(self.probabilities.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// A draw of `γ`.
    pub fn sample_gamma<R: Rng + ?Sized>(&self, rng: &mut R) -> &[i64] {
        &self.points[self.alias.sample(rng)]
    }

    /// A draw of `η(1) = Λ0 + γ` (quotient).
    pub fn sample_endpoint<R: Rng + ?Sized>(&self, rng: &mut R) -> WeightVector {
        let g: Vec<f64> = self.sample_gamma(rng).iter().map(|&c| c as f64).collect();
        WeightVector::new(1.0, &g, 0.0)
    }

    /// `E e^{(x|η(1))/m}` for finite `x`.
    pub fn laplace(&self, rs: &RootSystem, x: &[f64]) -> f64 {
        let xv = rs.finite(x);
        self.support()
            .map(|(g, p)| {
                let gv: Vec<f64> = g.iter().map(|&c| c as f64).collect();
                p * (rs.form(&xv, &rs.finite(&gv)) / self.m).exp()
            })
            .sum()
    }

    /// Law of `⟨η(1), α_i^∨⟩`.
    pub fn pairing_marginal(&self, rs: &RootSystem, i: usize) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        for (g, p) in self.support() {
            let gv: Vec<f64> = g.iter().map(|&c| c as f64).collect();
            let w = rs.pair(&rs.finite(&gv), i).round() as i64 + i64::from(i == 0);
            *out.entry(w).or_insert(0.0) += p;
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

/// Joint law of `(⟨η(1), α_i^∨⟩, ε_i(η))` under `μ^m` on `B(Λ0)`, derived from
/// the pairing marginal through the decomposition into `α_i`-strings.
///
/// A string of length `r+1` has vertices with pairing `r − 2j` and `ε = j`,
/// and weights proportional to `e^{−ja}`, `a = (α_i|ν̂)/m`.
#[derive(Clone, Debug)]
pub struct StringStepLaw {
    index: usize,
    a: f64,
    table: Vec<(i64, i64)>,
    probabilities: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

impl StringStepLaw {
    pub fn new(rs: &RootSystem, law: &LatticeEndpointLaw, i: usize) -> Result<Self> {
        let a = rs.form(&rs.alpha(i), law.nu_hat()) / law.m();
        let marginal = law.pairing_marginal(rs, i);
        let max_r = marginal.keys().map(|w| w.abs()).max().unwrap_or(0);
        let g = |r: i64| marginal.get(&r).copied().unwrap_or(0.0) * (-(r as f64) * a / 2.0).exp();
        let mut table = Vec::new();
        let mut weights = Vec::new();
        for r in 0..=max_r {
            let d = (g(r) - g(r + 2)).max(0.0);
            if d == 0.0 {
                continue;
            }
            for j in 0..=r {
                table.push((r - 2 * j, j));
                weights.push(d * (a * r as f64 / 2.0 - j as f64 * a).exp());
            }
        }
        let total: f64 = weights.iter().sum();
        let probabilities = weights.iter().map(|w| w / total).collect();
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::InvalidParameter(format!("alias table: {e}")))?;
        Ok(Self {
            index: i,
            a,
            table,
            probabilities,
            alias,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// `(α_i|ν̂)/m`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `((w, ε), probability)` pairs.
    pub fn support(&self) -> impl Iterator<Item = ((i64, i64), f64)> + '_ {
        self.table
            .iter()
            .copied()
            .zip(self.probabilities.iter().copied())
    }

    /// A draw of `(w, ε)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (i64, i64) {
        self.table[self.alias.sample(rng)]
    }
}

impl StringStepLaw {
    /// `E f(w, ε)`.
    pub fn expectation<F: Fn(i64, i64) -> f64>(&self, f: F) -> f64 {
        self.support().map(|((w, e), p)| p * f(w, e)).sum()
    }
}

/// `s_r(q) = q^r + q^{r−2} + … + q^{−r}`.
pub fn s_r(q: Complex64, r: u32) -> Complex64 {
    (0..=r as i32).map(|j| q.powi(r as i32 - 2 * j)).sum()
}

/// `s_r(e^{u + a/2}) / s_r(e^{a/2})` with `a = (α_i|ν̂)/m`.
pub fn conditional_laplace_formula(a: f64, r: u32, u: Complex64) -> Complex64 {
    s_r((u + a / 2.0).exp(), r) / s_r(Complex64::new((a / 2.0).exp(), 0.0), r)
}

/// `E[e^{u(α_i|η(1))} | ⟨η(1) + ε_i(η)α_i, α_i^∨⟩ = r]` under `μ^m`, summed
/// exactly over the catalog vertices whose whole `α_i`-string lies below the
/// cutoff. Returns `None` when no such vertex exists.
pub fn conditional_laplace_exact(
    rs: &RootSystem,
    catalog: &ModuleCatalog,
    m: f64,
    i: usize,
    r: u32,
    u: Complex64,
) -> Option<Complex64> {
    let c = rs.form(&rs.alpha(i), &catalog.nu_hat);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for v in &catalog.vertices {
        let (eps, phi) = epsilon_phi(rs, &v.path, i);
        if eps + phi != i64::from(r) {
            continue;
        }
        let bottom = v.weight_exponent + phi as f64 * c;
        if bottom > catalog.cutoff + 1e-9 {
            continue;
        }
        let p = (-v.weight_exponent / m).exp();
        num += p * (u * (phi - eps) as f64).exp();
        den += p;
    }
    (den > 0.0).then(|| num / den)
}

/// `x_0^m(∞)/m = −(1/m) inf_t ⟨π^m(t), α_i^∨⟩` along the random walk,
/// stopped once the walk has risen `stop_height·m` above its running minimum.
pub fn sample_string_at_infinity<R: Rng + ?Sized>(
    law: &StringStepLaw,
    m: f64,
    stop_height: f64,
    max_steps: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut s = 0i64;
    let mut min = 0i64;
    for _ in 0..max_steps {
        let (w, eps) = law.sample(rng);
        min = min.min(s - eps);
        s += w;
        if (s - min) as f64 >= stop_height * m {
            return Ok(-(min as f64) / m);
        }
    }
    Err(Error::InvalidParameter(format!(
        "walk did not rise {stop_height} above its minimum within {max_steps} steps"
    )))
}

/// `−inf_t X_t` for `X_t = μt + σW_t`, simulated on a grid with the exact
/// Brownian-bridge minimum on each step, stopped once `X − min X ≥
/// stop_height`.
pub fn sample_drifted_infimum<R: Rng + ?Sized>(
    drift: f64,
    variance: f64,
    dt: f64,
    stop_height: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(drift > 0.0) || !(variance > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need positive drift, variance and dt, got {drift}, {variance}, {dt}"
        )));
    }
    let sd = (variance * dt).sqrt();
    let mut x = 0.0f64;
    let mut min = 0.0f64;
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let next = x + drift * dt + sd * z;
        let u: f64 = 1.0 - rng.random::<f64>();
        let d = next - x;
        let bridge_min = 0.5 * (x + next - (d * d - 2.0 * variance * dt * u.ln()).sqrt());
        min = min.min(bridge_min);
        x = next;
        if x - min >= stop_height {
            return Ok(-min);
        }
    }
}

/// Settings for [`sample_conditioned_a`].
#[derive(Clone, Debug, PartialEq)]
pub struct SmcConfig {
    pub horizon: f64,
    pub dt: f64,
    pub particles: usize,
    /// The start point is `ε·ν̂_bary`, inside `C′`.
    pub start_scale: f64,
    /// Resample when `ESS < threshold·particles`.
    pub resample_threshold: f64,
    pub m_cut: Option<f64>,
}

impl Default for SmcConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            dt: 1e-3,
            particles: 1000,
            start_scale: 0.05,
            resample_threshold: 0.5,
            m_cut: None,
        }
    }
}

/// Weighted particle approximation of `A` on the time grid.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub rank: usize,
    pub times: Vec<f64>,
    /// Finite coordinates per particle, `rank` numbers per time.
    pub states: Vec<Vec<f64>>,
    /// Normalised final weights.
    pub weights: Vec<f64>,
    pub ess: Vec<f64>,
    pub resamplings: usize,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, particle: usize, step: usize) -> WeightVector {
        let n = self.rank;
        WeightVector::new(
            self.times[step],
            &self.states[particle][step * n..(step + 1) * n],
            0.0,
        )
    }

    pub fn path(&self, particle: usize) -> Result<PiecewiseLinearPath> {
        let values = (0..self.times.len())
            .map(|k| self.state(particle, k))
            .collect();
        PiecewiseLinearPath::new(self.times.clone(), values)
    }

    /// Rows `particle, t, level, finite_1..n, weight`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("particle,t,level");
        for j in 1..=self.rank {
            let _ = write!(out, ",finite_{j}");
        }
        out.push_str(",weight\n");
        for (p, w) in self.weights.iter().enumerate() {
            for (k, &t) in self.times.iter().enumerate() {
                let _ = write!(out, "{p},{t},{t}");
                for c in &self.states[p][k * self.rank..(k + 1) * self.rank] {
                    let _ = write!(out, ",{c}");
                }
                let _ = writeln!(out, ",{w}");
            }
        }
        out
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let n = weights.len();
    let u0: f64 = rng.random::<f64>() / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut cum = weights[0];
    let mut j = 0;
    for k in 0..n {
        let u = u0 + k as f64 / n as f64;
        while u > cum && j + 1 < n {
            j += 1;
            cum += weights[j];
        }
        out.push(j);
    }
    out
}

/// Doob-transformed killed Brownian motion by sequential importance
/// resampling: drifted Brownian proposals, killing on grid points outside
/// `C′`, weights `Ψ(new)/Ψ(old)`.
pub fn sample_conditioned_a(
    rs: &RootSystem,
    nu_hat: &WeightVector,
    config: &SmcConfig,
    stream: RngStream,
) -> Result<Ensemble> {
    let SmcConfig {
        horizon,
        dt,
        particles,
        start_scale,
        resample_threshold,
        m_cut,
    } = config.clone();
    if particles == 0 || !(dt > 0.0) || !(horizon > start_scale) || !(start_scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid SMC settings: particles {particles}, dt {dt}, T {horizon}, start {start_scale}"
        )));
    }
    let n = rs.rank();
    let psi = HarmonicPsi::new(
        rs,
        nu_hat,
        m_cut.unwrap_or_else(|| default_m_cut(rs, horizon)),
    )?;
    let noise = GaussianIncrement::new(rs);
    let nu = nu_hat.finite.to_vec();
    let start = rs.barycentric_drift() * start_scale;
    let start_log = psi
        .log_value(&start)?
        .ok_or_else(|| Error::InvalidParameter("start point not interior".into()))?;
    let steps = (((horizon - start_scale) / dt).round() as usize).max(1);
    let h = (horizon - start_scale) / steps as f64;
    let mut times = vec![start_scale];
    let mut states: Vec<Vec<f64>> = vec![start.finite.to_vec(); particles];
    let mut current_log: Vec<Option<LogValue>> = vec![Some(start_log); particles];
    let mut log_w = vec![0.0; particles];
    let mut rngs: Vec<ChaCha8Rng> = (0..particles as u64)
        .map(|p| stream.child(p + 1).rng())
        .collect();
    let mut master = stream.child(0).rng();
    let mut ess_history = Vec::with_capacity(steps);
    let mut resamplings = 0;
    for k in 1..=steps {
        let t = start_scale + k as f64 * h;
        times.push(t);
        let updates: Vec<Result<(Vec<f64>, Option<LogValue>, f64)>> = states
            .par_iter()
            .zip(rngs.par_iter_mut())
            .zip(current_log.par_iter())
            .map(|((state, rng), old)| {
                let mut x = state[(k - 1) * n..k * n].to_vec();
                let Some(old) = old else {
                    return Ok((x, None, f64::NEG_INFINITY));
                };
                for (c, v) in x.iter_mut().zip(&nu) {
                    *c += v * h;
                }
                noise.add_to(&mut x, h.sqrt(), rng);
                let new = psi.log_value(&WeightVector::new(t, &x, 0.0))?;
                let inc = match &new {
                    Some(v) if v.sign > 0.0 => v.log_abs - old.log_abs,
                    _ => f64::NEG_INFINITY,
                };
                Ok((x, new.filter(|v| v.sign > 0.0), inc))
            })
            .collect();
        for (p, u) in updates.into_iter().enumerate() {
            let (x, new, inc) = u?;
            states[p].extend_from_slice(&x);
            current_log[p] = new;
            log_w[p] += inc;
        }
        let lse = log_sum_exp(&log_w);
        if lse == f64::NEG_INFINITY {
            return Err(Error::AllParticlesDead { t });
        }
        let w: Vec<f64> = log_w.iter().map(|l| (l - lse).exp()).collect();
        let ess = 1.0 / w.iter().map(|x| x * x).sum::<f64>();
        ess_history.push(ess);
        if ess < resample_threshold * particles as f64 && k < steps {
            let idx = systematic_resample(&w, &mut master);
            states = idx.iter().map(|&j| states[j].clone()).collect();
            current_log = idx.iter().map(|&j| current_log[j]).collect();
            log_w = vec![0.0; particles];
            resamplings += 1;
        }
    }
    let lse = log_sum_exp(&log_w);
    let weights = log_w.iter().map(|l| (l - lse).exp()).collect();
    Ok(Ensemble {
        rank: n,
        times,
        states,
        weights,
        ess: ess_history,
        resamplings,
    })
}

/// `Ψ(X_dt)/Ψ(x)` over killed drifted Brownian steps from `x`; by harmonicity
/// its mean is 1.
pub fn one_step_ratios(
    psi: &HarmonicPsi,
    start: &WeightVector,
    dt: f64,
    samples: usize,
    stream: RngStream,
) -> Result<Vec<f64>> {
    let rs = psi.root_system();
    let base = psi
        .log_value(start)?
        .ok_or_else(|| Error::InvalidParameter("start point not interior".into()))?;
    let noise = GaussianIncrement::new(rs);
    let nu = psi.nu_hat().finite.to_vec();
    let t = start.level + dt;
    let chunks = 64usize;
    let per = samples.div_ceil(chunks);
    let parts: Vec<Result<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.child(c as u64).rng();
            let count = per.min(samples.saturating_sub(c * per));
            (0..count)
                .map(|_| {
                    let mut x = start.finite.to_vec();
                    for (v, d) in x.iter_mut().zip(&nu) {
                        *v += d * dt;
                    }
                    noise.add_to(&mut x, dt.sqrt(), &mut rng);
                    Ok(psi
                        .log_value(&WeightVector::new(t, &x, 0.0))?
                        .map_or(0.0, |v| v.ratio(&base)))
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
