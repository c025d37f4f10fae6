//! Littelmann root operators, adapted strings, the string-cone predicates and
//! truncated enumeration of path modules `Bπ_λ`.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric};

use crate::error::{Error, Result};
use crate::path::{
    is_dominant, running_infimum_transform, PiecewiseLinearPath, StringSequence, PREDICATE_TOL,
};
use crate::roots::{DirectionSequence, RootSystem, WeightVector};

/// Tolerance for level comparisons on integral float paths.
const LEVEL_TOL: f64 = 1e-9;

/// Resolution of the canonical path key used for deduplication.
const KEY_SCALE: f64 = 1e6;

/// Hard limit on string length when reading strings off a path.
const MAX_STRING_LEN: usize = 100_000;

fn pairings(rs: &RootSystem, path: &PiecewiseLinearPath, i: usize) -> Vec<f64> {
    path.pairing_series(rs, i)
}

/// Inserts a breakpoint at parameter `s ∈ (0,1)` of segment `k` and returns
/// the refined times, values and pairings.
fn split_segment(
    times: &mut Vec<f64>,
    values: &mut Vec<WeightVector>,
    h: &mut Vec<f64>,
    k: usize,
    s: f64,
    level: f64,
) {
    let t = times[k] + s * (times[k + 1] - times[k]);
    let v = values[k].lerp(&values[k + 1], s);
    times.insert(k + 1, t);
    values.insert(k + 1, v);
    h.insert(k + 1, level);
}

/// Lowering operator `f_i`. Returns `None` when `h(T) − min h < 1`.
pub fn root_operator_f(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    i: usize,
) -> Option<PiecewiseLinearPath> {
    let mut h = pairings(rs, path, i);
    let m = h.iter().copied().fold(f64::INFINITY, f64::min);
    let last = *h.last()?;
    if last - m < 1.0 - LEVEL_TOL {
        return None;
    }
    let k1 = h.iter().rposition(|&x| x <= m + LEVEL_TOL)?;
    let mut times = path.times().to_vec();
    let mut values = path.values().to_vec();
    let target = m + 1.0;
    let mut k2 = k1 + 1;
    while k2 < h.len() && h[k2] < target - LEVEL_TOL {
        k2 += 1;
    }
    // h[k2 - 1] < M + 1 ≤ h[k2]
    if k2 >= h.len() {
        return None;
    }
    if h[k2] > target + LEVEL_TOL {
        let (a, b) = (h[k2 - 1], h[k2]);
        let s = (target - a) / (b - a);
        split_segment(&mut times, &mut values, &mut h, k2 - 1, s, target);
    }
    let alpha = rs.alpha(i);
    for k in (k1 + 1)..values.len() {
        let c = (h[k] - m).min(1.0);
        let c = if k >= k2 { 1.0 } else { c };
        values[k].axpy(-c, &alpha);
    }
    Some(PiecewiseLinearPath::from_parts_unchecked(times, values).simplified(1e-12))
}

/// Raising operator `e_i`. Returns `None` when `min h > −1`.
pub fn root_operator_e(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    i: usize,
) -> Option<PiecewiseLinearPath> {
    let mut h = pairings(rs, path, i);
    let m = h.iter().copied().fold(f64::INFINITY, f64::min);
    if m > -1.0 + LEVEL_TOL {
        return None;
    }
    let mut k1 = h.iter().position(|&x| x <= m + LEVEL_TOL)?;
    let target = m + 1.0;
    let mut k0 = k1;
    while k0 > 0 && h[k0] < target - LEVEL_TOL {
        k0 -= 1;
    }
    // h[k0] ≥ M + 1 > h[k0 + 1]
    let mut times = path.times().to_vec();
    let mut values = path.values().to_vec();
    if h[k0] > target + LEVEL_TOL {
        let (a, b) = (h[k0], h[k0 + 1]);
        let s = (a - target) / (a - b);
        split_segment(&mut times, &mut values, &mut h, k0, s, target);
        k0 += 1;
        k1 += 1;
    }
    let alpha = rs.alpha(i);
    for k in (k0 + 1)..values.len() {
        let c = if k >= k1 { -1.0 } else { h[k] - target };
        values[k].axpy(-c, &alpha);
    }
    Some(PiecewiseLinearPath::from_parts_unchecked(times, values).simplified(1e-12))
}

/// `(ε_i, φ_i) = (−min h, h(T) − min h)` for `h = ⟨η, α_i^∨⟩`, rounded.
pub fn epsilon_phi(rs: &RootSystem, path: &PiecewiseLinearPath, i: usize) -> (i64, i64) {
    let h = pairings(rs, path, i);
    let m = h.iter().copied().fold(0.0f64, f64::min);
    let last = *h.last().expect("non-empty");
    ((-m).round() as i64, (last - m).round() as i64)
}

/// Greedy string `(a_0, …, a_depth)`: `a_k` is the largest number of times
/// `e_{i_k}` applies after the earlier steps.
pub fn adapted_string(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
    depth: usize,
) -> StringSequence {
    let mut cur = path.clone();
    let mut values = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let mut count = 0usize;
        while let Some(next) = root_operator_e(rs, &cur, seq.index(k)) {
            cur = next;
            count += 1;
        }
        values.push(count as f64);
    }
    StringSequence {
        directions: seq.clone(),
        values,
    }
}

/// Adapted string continued until the path is dominant, trailing zeros
/// dropped.
pub fn adapted_string_full(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
) -> Result<Vec<i64>> {
    let mut cur = path.clone();
    let mut out = Vec::new();
    let mut k = 0;
    while !is_dominant(rs, &cur, PREDICATE_TOL) {
        if k >= MAX_STRING_LEN {
            return Err(Error::InvalidPath("string does not terminate".into()));
        }
        let mut count = 0i64;
        while let Some(next) = root_operator_e(rs, &cur, seq.index(k)) {
            cur = next;
            count += 1;
        }
        out.push(count);
        k += 1;
    }
    trim_zeros(&mut out);
    Ok(out)
}

/// Pitman string coordinates continued until the cascade is dominant, rounded
/// to integers. Fails if a coordinate is not within `1e-9` of an integer.
pub fn pitman_string_full(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
) -> Result<Vec<i64>> {
    let mut cur = path.clone();
    let mut out = Vec::new();
    let mut k = 0;
    while !is_dominant(rs, &cur, PREDICATE_TOL) {
        if k >= MAX_STRING_LEN {
            return Err(Error::InvalidPath("string does not terminate".into()));
        }
        let i = seq.index(k);
        let (next, x) = running_infimum_transform(rs, &cur, i, &rs.alpha(i));
        let a = x.last();
        if (a - a.round()).abs() > LEVEL_TOL {
            return Err(Error::InvalidPath(format!(
                "non-integral string coordinate {a}"
            )));
        }
        out.push(a.round() as i64);
        cur = next;
        k += 1;
    }
    trim_zeros(&mut out);
    Ok(out)
}

fn trim_zeros(v: &mut Vec<i64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// `ω(a) = Σ_k a_k α_{i_k}`.
pub fn omega(rs: &RootSystem, a: &StringSequence) -> WeightVector {
    let mut out = rs.zero();
    for (k, &ak) in a.values.iter().enumerate() {
        if ak != 0.0 {
            out.axpy(ak, &rs.alpha(a.directions.index(k)));
        }
    }
    out
}

/// `ω` of an integer string.
pub fn omega_of(rs: &RootSystem, seq: &DirectionSequence, a: &[i64]) -> WeightVector {
    omega(
        rs,
        &StringSequence {
            directions: seq.clone(),
            values: a.iter().map(|&x| x as f64).collect(),
        },
    )
}

/// The three descriptions of `B(λ)` inside `B(∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeForm {
    /// `a_p ≤ ⟨λ − Σ_{k>p} a_k α_{i_k}, α_{i_p}^∨⟩` for `p ≥ 0`.
    Suffix,
    /// `a_p ≤ ⟨λ − ω(a) + Σ_{k≤p} a_k α_{i_k}, α_{i_p}^∨⟩` for `p ≥ 0`.
    Complement,
    /// `⟨ω(a) − Σ_{k<p} a_k α_{i_k} − ½ a_p α_{i_p}, α_{i_p}^∨⟩ ≤ ⟨λ, α_{i_p}^∨⟩`
    /// for `p ≥ 1`.
    HalfStep,
}

impl ConeForm {
    pub const ALL: [ConeForm; 3] = [ConeForm::Suffix, ConeForm::Complement, ConeForm::HalfStep];
}

/// Evaluates the chosen inequality family. The string is assumed to lie in
/// `B(∞)`; the predicate does not check that.
pub fn in_b_lambda(
    rs: &RootSystem,
    a: &StringSequence,
    lambda: &WeightVector,
    form: ConeForm,
) -> bool {
    let tol = PREDICATE_TOL;
    // past the support every family reduces to 0 ≤ ⟨λ, α^∨⟩
    let horizon = a.len() + a.directions.period();
    let alpha = |k: usize| rs.alpha(a.directions.index(k));
    let coroot = |k: usize| a.directions.index(k);
    match form {
        ConeForm::Suffix => {
            let mut suffix = rs.zero();
            let mut ok = true;
            for p in (0..horizon).rev() {
                let lhs = a.get(p);
                let rhs = rs.pair(&(lambda - &suffix), coroot(p));
                ok &= lhs <= rhs + tol;
                suffix.axpy(a.get(p), &alpha(p));
            }
            ok
        }
        ConeForm::Complement => {
            let w = omega(rs, a);
            let base = lambda - &w;
            let mut prefix = rs.zero();
            (0..horizon).all(|p| {
                prefix.axpy(a.get(p), &alpha(p));
                a.get(p) <= rs.pair(&(&base + &prefix), coroot(p)) + tol
            })
        }
        ConeForm::HalfStep => {
            let w = omega(rs, a);
            let mut prefix = rs.zero();
            prefix.axpy(a.get(0), &alpha(0));
            (1..horizon).all(|p| {
                let mut v = &w - &prefix;
                v.axpy(-0.5 * a.get(p), &alpha(p));
                let ok = rs.pair(&v, coroot(p)) <= rs.pair(lambda, coroot(p)) + tol;
                prefix.axpy(a.get(p), &alpha(p));
                ok
            })
        }
    }
}

/// One element of a truncated module.
#[derive(Clone, Debug)]
pub struct CrystalVertex {
    pub path: PiecewiseLinearPath,
    /// Adapted string along the catalog's direction sequence, trailing zeros
    /// removed.
    pub string: Vec<i64>,
    pub endpoint: WeightVector,
    /// `(ω(a)|ν̂) = (λ − η(1)|ν̂)`.
    pub weight_exponent: f64,
}

/// Vertices of `Bπ_λ` with `(ω|ν̂) ≤ E_max`, closed under the `f_i` that stay
/// below the cutoff.
#[derive(Clone, Debug)]
pub struct ModuleCatalog {
    pub generator: PiecewiseLinearPath,
    pub highest_weight: WeightVector,
    pub directions: DirectionSequence,
    pub nu_hat: WeightVector,
    pub cutoff: f64,
    pub vertices: Vec<CrystalVertex>,
}

impl ModuleCatalog {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Bound on the dropped mass `Σ_{E>E_max} e^{−E/m}`, relative to the kept
    /// mass.
    pub fn truncated_mass_bound(&self, rs: &RootSystem, m: f64) -> Result<f64> {
        tail_mass_bound(rs, &self.nu_hat, m, self.cutoff)
    }

    /// String view of a vertex.
    pub fn string_sequence(&self, v: &CrystalVertex) -> StringSequence {
        StringSequence {
            directions: self.directions.clone(),
            values: v.string.iter().map(|&x| x as f64).collect(),
        }
    }

    /// CSV rows `"string", endpoint coordinates, weight_exponent`.
    pub fn to_csv(&self) -> String {
        let n = self.highest_weight.rank();
        let mut out = String::from("string,level");
        for j in 1..=n {
            let _ = write!(out, ",finite_{j}");
        }
        out.push_str(",delta,weight_exponent\n");
        for v in &self.vertices {
            let s: Vec<String> = v.string.iter().map(|x| x.to_string()).collect();
            let _ = write!(out, "\"{}\"", s.join(","));
            for c in v.endpoint.coordinates() {
                let _ = write!(out, ",{c}");
            }
            let _ = writeln!(out, ",{}", v.weight_exponent);
        }
        out
    }
}

fn path_key(path: &PiecewiseLinearPath) -> Vec<i64> {
    let mut key = Vec::with_capacity(path.len() * (path.rank() + 3));
    for (t, v) in path.breakpoints() {
        key.push((t * KEY_SCALE).round() as i64);
        for c in v.coordinates() {
            key.push((c * KEY_SCALE).round() as i64);
        }
    }
    key
}

/// Checks that `(α_i|ν̂) > 0` for every simple root and returns these values.
pub fn simple_root_parameters(rs: &RootSystem, nu_hat: &WeightVector) -> Result<Vec<f64>> {
    (0..=rs.rank())
        .map(|i| {
            let c = rs.form(&rs.alpha(i), nu_hat);
            if c > 0.0 {
                Ok(c)
            } else {
                Err(Error::InvalidDrift {
                    what: format!("(alpha_{i}|nu_hat)"),
                    value: c,
                })
            }
        })
        .collect()
}

/// Breadth-first closure of `{generator}` under the `f_i`, keeping vertices
/// with `(ω|ν̂) ≤ e_max`. Vertices are deduplicated by path.
pub fn enumerate_module(
    rs: &RootSystem,
    generator: &PiecewiseLinearPath,
    seq: &DirectionSequence,
    nu_hat: &WeightVector,
    e_max: f64,
) -> Result<ModuleCatalog> {
    if !(e_max >= 0.0) {
        return Err(Error::CutoffTooSmall { cutoff: e_max });
    }
    if !is_dominant(rs, generator, PREDICATE_TOL) {
        return Err(Error::InvalidPath("generator must be dominant".into()));
    }
    let params = simple_root_parameters(rs, nu_hat)?;
    let lambda = generator.endpoint().clone();
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut paths: Vec<(PiecewiseLinearPath, f64)> = Vec::new();
    let mut queue = VecDeque::new();
    let root = generator.simplified(1e-12);
    seen.insert(path_key(&root), 0);
    paths.push((root, 0.0));
    queue.push_back(0usize);
    while let Some(idx) = queue.pop_front() {
        let (path, energy) = paths[idx].clone();
        for (i, &c) in params.iter().enumerate() {
            let e = energy + c;
            if e > e_max + LEVEL_TOL {
                continue;
            }
            if let Some(child) = root_operator_f(rs, &path, i) {
                let key = path_key(&child);
                if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(key) {
                    slot.insert(paths.len());
                    queue.push_back(paths.len());
                    paths.push((child, e));
                }
            }
        }
    }
    let vertices = paths
        .into_iter()
        .map(|(path, _)| {
            let string = adapted_string_full(rs, &path, seq)?;
            let endpoint = path.endpoint().clone();
            let weight_exponent = rs.form(&(&lambda - &endpoint), nu_hat);
            Ok(CrystalVertex {
                path,
                string,
                endpoint,
                weight_exponent,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModuleCatalog {
        generator: generator.clone(),
        highest_weight: lambda,
        directions: seq.clone(),
        nu_hat: nu_hat.clone(),
        cutoff: e_max,
        vertices,
    })
}

/// Parameters `(α|ν̂)` and multiplicities of the positive affine roots, grouped
/// by δ-level `k = 0, 1, …`.
fn root_block(rs: &RootSystem, nu_hat: &WeightVector, k: usize) -> Vec<(f64, usize)> {
    let level = nu_hat.level;
    let n = rs.rank();
    let mut out = Vec::new();
    for beta in rs.finite_positive_roots() {
        let b: Vec<f64> = beta.iter().map(|&c| c as f64).collect();
        let c = rs.form(&rs.finite(&b), nu_hat);
        if k == 0 {
            out.push((c, 1));
        } else {
            out.push((c + k as f64 * level, 1));
            out.push((-c + k as f64 * level, 1));
        }
    }
    if k > 0 {
        out.push((k as f64 * level, n));
    }
    out
}

/// `log Π_{α∈R̂+} (1 − e^{−s(α|ν̂)})^{−mult α}`, the log generating function
/// of `e^{−s(ω|ν̂)}` over `B(∞)`, with the infinite tail bounded.
pub fn verma_log_partition(rs: &RootSystem, nu_hat: &WeightVector, s: f64) -> Result<f64> {
    simple_root_parameters(rs, nu_hat)?;
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scale {s} must be positive"
        )));
    }
    let ratio = (-s * nu_hat.level).exp();
    let mut total = 0.0;
    for k in 0.. {
        let block: f64 = root_block(rs, nu_hat, k)
            .into_iter()
            .map(|(c, mult)| -(mult as f64) * (-(-s * c).exp()).ln_1p())
            .sum();
        total += block;
        if k > 0 && block <= 1e-17 * total.max(1.0) {
            // −ln(1 − x) is convex with value 0 at 0, so blocks shrink at
            // least by `ratio` per level.
            total += block * ratio / (1.0 - ratio);
            break;
        }
    }
    Ok(total)
}

/// Chernoff bound on `Σ_{E(v) > e_max} e^{−E(v)/m}` over `B(λ)`, relative to
/// the generator's mass 1.
pub fn tail_mass_bound(rs: &RootSystem, nu_hat: &WeightVector, m: f64, e_max: f64) -> Result<f64> {
    let beta = 1.0 / m;
    let mut best = f64::INFINITY;
    for j in 1..200 {
        let theta = beta * j as f64 / 200.0;
        let log_z = verma_log_partition(rs, nu_hat, beta - theta)?;
        best = best.min((-theta * e_max + log_z).exp());
    }
    Ok(best)
}

/// Smallest cutoff (to 0.1%) whose tail bound is below `tol`.
pub fn cutoff_for_tail(rs: &RootSystem, nu_hat: &WeightVector, m: f64, tol: f64) -> Result<f64> {
    let mut hi = 1.0;
    while tail_mass_bound(rs, nu_hat, m, hi)? > tol {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::TailTooLarge {
                bound: hi,
                tolerance: tol,
            });
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if tail_mass_bound(rs, nu_hat, m, mid)? > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Draws `Σ_α G_α α` with independent geometric `G_α`,
/// `P(G_α = g) = (1 − q_α) q_α^g`, `q_α = e^{−(α|ν̂)/m}`, over positive roots of
/// δ-level at most `K` (imaginary roots with multiplicity `n`).
#[derive(Clone, Debug)]
pub struct VermaOmegaSampler {
    roots: Vec<(WeightVector, Geometric, f64)>,
    dropped_bound: f64,
}

impl VermaOmegaSampler {
    pub fn new(rs: &RootSystem, nu_hat: &WeightVector, m: f64, cutoff: usize) -> Result<Self> {
        let mut roots = Vec::new();
        for root in rs.positive_roots(cutoff) {
            let c = rs.form(&root.vector, nu_hat);
            if !(c > 0.0) {
                return Err(Error::InvalidDrift {
                    what: format!("(alpha|nu_hat) for {:?}", root.kind),
                    value: c,
                });
            }
            let q = (-c / m).exp();
            let geo = Geometric::new(1.0 - q)
                .map_err(|e| Error::InvalidParameter(format!("geometric law: {e}")))?;
            let mult = match root.kind {
                crate::roots::RootKind::Imaginary { multiplicity, .. } => multiplicity,
                crate::roots::RootKind::Real { .. } => 1,
            };
            for _ in 0..mult {
                roots.push((root.vector.clone(), geo, q));
            }
        }
        // P(some dropped G_α > 0) ≤ Σ_{k>K} Σ q_α, geometric in k
        let block: f64 = root_block(rs, nu_hat, cutoff + 1)
            .into_iter()
            .map(|(c, mult)| mult as f64 * (-c / m).exp())
            .sum();
        let ratio = (-nu_hat.level / m).exp();
        Ok(Self {
            roots,
            dropped_bound: block / (1.0 - ratio),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WeightVector {
        let mut out = WeightVector::zero(self.roots[0].0.rank());
        for (alpha, geo, _) in &self.roots {
            let g = geo.sample(rng);
            if g > 0 {
                out.axpy(g as f64, alpha);
            }
        }
        out
    }

    /// `Σ_α q_α / (1 − q_α) α`.
    pub fn mean(&self) -> WeightVector {
        let mut out = WeightVector::zero(self.roots[0].0.rank());
        for (alpha, _, q) in &self.roots {
            out.axpy(q / (1.0 - q), alpha);
        }
        out
    }

    /// Bound on the probability that a dropped root would have contributed.
    pub fn dropped_mass_bound(&self) -> f64 {
        self.dropped_bound
    }
}

/// Draws `Σ_β E_β β + Σ_β Σ_{k≤K} (E_{β+kδ} − E_{−β+kδ}) β` in the quotient,
/// with independent exponentials of rate `(α|ν̂)`.
#[derive(Clone, Debug)]
pub struct LimitOmegaSampler {
    terms: Vec<(WeightVector, Exp<f64>, f64)>,
}

impl LimitOmegaSampler {
    pub fn new(rs: &RootSystem, nu_hat: &WeightVector, cutoff: usize) -> Result<Self> {
        let mut terms = Vec::new();
        for beta in rs.finite_positive_roots() {
            let b: Vec<f64> = beta.iter().map(|&c| c as f64).collect();
            let bv = rs.finite(&b);
            let c = rs.form(&bv, nu_hat);
            for k in 0..=cutoff {
                let shift = k as f64 * nu_hat.level;
                let signs: &[f64] = if k == 0 { &[1.0] } else { &[1.0, -1.0] };
                for &sign in signs {
                    let rate = sign * c + shift;
                    if !(rate > 0.0) {
                        return Err(Error::InvalidDrift {
                            what: "exponential rate (alpha|nu_hat)".into(),
                            value: rate,
                        });
                    }
                    let exp = Exp::new(rate)
                        .map_err(|e| Error::InvalidParameter(format!("exponential law: {e}")))?;
                    terms.push((&bv * sign, exp, rate));
                }
            }
        }
        Ok(Self { terms })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WeightVector {
        let mut out = WeightVector::zero(self.terms[0].0.rank());
        for (beta, exp, _) in &self.terms {
            out.axpy(exp.sample(rng), beta);
        }
        out
    }

    pub fn mean(&self) -> WeightVector {
        let mut out = WeightVector::zero(self.terms[0].0.rank());
        for (beta, _, rate) in &self.terms {
            out.axpy(1.0 / rate, beta);
        }
        out
    }
}

/// One draw of the geometric `ω` sampler.
pub fn sample_verma_omega<R: Rng + ?Sized>(
    rs: &RootSystem,
    nu_hat: &WeightVector,
    m: f64,
    cutoff: usize,
    rng: &mut R,
) -> Result<WeightVector> {
    Ok(VermaOmegaSampler::new(rs, nu_hat, m, cutoff)?.sample(rng))
}

/// One draw of the exponential limit sampler (quotient).
pub fn sample_limit_omega<R: Rng + ?Sized>(
    rs: &RootSystem,
    nu_hat: &WeightVector,
    cutoff: usize,
    rng: &mut R,
) -> Result<WeightVector> {
    Ok(LimitOmegaSampler::new(rs, nu_hat, cutoff)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::string_coordinates;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lambda0_path(rs: &RootSystem) -> PiecewiseLinearPath {
        PiecewiseLinearPath::straight(&rs.lambda0(), 1.0)
    }

    #[test]
    fn f0_of_lambda0() {
        let rs = RootSystem::new(1).unwrap();
        let p = lambda0_path(&rs);
        let f = root_operator_f(&rs, &p, 0).unwrap();
        let expected = PiecewiseLinearPath::straight(&(rs.lambda0() - rs.alpha(0)), 1.0);
        assert!(f.endpoint().max_abs_diff(expected.endpoint()) < 1e-15);
        assert_eq!(f.len(), 2);
        assert!(root_operator_f(&rs, &p, 1).is_none());
    }

    #[test]
    fn e_inverts_f() {
        let rs = RootSystem::new(2).unwrap();
        let p = lambda0_path(&rs);
        let f = root_operator_f(&rs, &p, 0).unwrap();
        let back = root_operator_e(&rs, &f, 0).unwrap();
        assert!(crate::path::sup_quotient_distance(&back, &p) < 1e-12);
        for i in 0..=2 {
            assert!(root_operator_e(&rs, &p, i).is_none());
        }
        let h_before = rs.pair(f.endpoint(), 0);
        assert!((rs.pair(back.endpoint(), 0) - h_before - 2.0).abs() < 1e-12);
    }

    #[test]
    fn f_splits_at_crossing() {
        let rs = RootSystem::new(1).unwrap();
        // ⟨·,α_0^∨⟩ of 2Λ0 straight path is 2t; f_0 reflects [0, 1/2].
        let p = PiecewiseLinearPath::straight(&(rs.lambda0() * 2.0), 1.0);
        let f = root_operator_f(&rs, &p, 0).unwrap();
        assert_eq!(f.times(), &[0.0, 0.5, 1.0]);
        assert!((rs.pair(&f.evaluate(0.5).unwrap(), 0) + 1.0).abs() < 1e-12);
        assert!(
            f.endpoint()
                .max_abs_diff(&(rs.lambda0() * 2.0 - rs.alpha(0)))
                < 1e-12
        );
        let back = root_operator_e(&rs, &f, 0).unwrap();
        assert!(crate::path::sup_quotient_distance(&back, &p) < 1e-12);
    }

    #[test]
    fn adapted_string_examples() {
        let rs = RootSystem::new(2).unwrap();
        let seq = DirectionSequence::cyclic(2);
        let p = lambda0_path(&rs);
        assert!(adapted_string(&rs, &p, &seq, 4)
            .values
            .iter()
            .all(|&a| a == 0.0));
        let f = root_operator_f(&rs, &p, 0).unwrap();
        assert_eq!(
            adapted_string(&rs, &f, &seq, 3).values,
            vec![1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(adapted_string_full(&rs, &f, &seq).unwrap(), vec![1]);
    }

    #[test]
    fn omega_examples() {
        let rs = RootSystem::new(1).unwrap();
        let seq = DirectionSequence::periodic(1, vec![1, 0]).unwrap();
        let w = omega_of(&rs, &seq, &[2, 1]);
        assert!(w.max_abs_diff(&(rs.alpha(1) * 2.0 + rs.alpha(0))) < 1e-15);
        assert_eq!(omega_of(&rs, &seq, &[]), rs.zero());
        let rs2 = RootSystem::new(2).unwrap();
        let full = omega_of(&rs2, &DirectionSequence::cyclic(2), &[1, 1, 1]);
        assert!(full.quotient().max_abs_diff(&rs2.zero()) < 1e-15);
    }

    #[test]
    fn cone_examples() {
        let rs = RootSystem::new(1).unwrap();
        let l0 = rs.lambda0();
        let starts_one = DirectionSequence::periodic(1, vec![1, 0]).unwrap();
        let starts_zero = DirectionSequence::cyclic(1);
        let zero = StringSequence::zeros(starts_zero.clone(), 0);
        let one_at = |seq: &DirectionSequence| StringSequence {
            directions: seq.clone(),
            values: vec![1.0],
        };
        for form in ConeForm::ALL {
            assert!(in_b_lambda(&rs, &zero, &l0, form));
            assert!(in_b_lambda(&rs, &one_at(&starts_zero), &l0, form));
        }
        assert!(!in_b_lambda(
            &rs,
            &one_at(&starts_one),
            &l0,
            ConeForm::Suffix
        ));
        assert!(!in_b_lambda(
            &rs,
            &one_at(&starts_one),
            &l0,
            ConeForm::Complement
        ));
    }

    #[test]
    fn small_catalog_starts_with_generator_and_f0() {
        let rs = RootSystem::new(1).unwrap();
        let nu_hat = rs.barycentric_drift();
        let seq = DirectionSequence::cyclic(1);
        let cat = enumerate_module(&rs, &lambda0_path(&rs), &seq, &nu_hat, 0.6).unwrap();
        assert_eq!(cat.len(), 2);
        assert!(cat.vertices[0].string.is_empty());
        assert_eq!(cat.vertices[1].string, vec![1]);
        assert!((cat.vertices[1].weight_exponent - 0.5).abs() < 1e-12);
        let csv = cat.to_csv();
        assert!(csv.starts_with("string,level,finite_1,delta,weight_exponent\n"));
        assert!(csv.contains("\"1\","));
    }

    #[test]
    fn catalog_strings_match_pitman_and_omega() {
        let rs = RootSystem::new(2).unwrap();
        let nu_hat = rs.barycentric_drift() * 3.0;
        let seq = DirectionSequence::cyclic(2);
        let cat = enumerate_module(&rs, &lambda0_path(&rs), &seq, &nu_hat, 6.0).unwrap();
        assert!(cat.len() > 20);
        for v in &cat.vertices {
            assert_eq!(pitman_string_full(&rs, &v.path, &seq).unwrap(), v.string);
            let w = omega_of(&rs, &seq, &v.string);
            assert!(w.max_abs_diff(&(&cat.highest_weight - &v.endpoint)) < 1e-9);
            let depth = v.string.len().max(1);
            let s = string_coordinates(&rs, &v.path, &seq, depth);
            assert_eq!(
                &s.to_integers(1e-9).unwrap()[..v.string.len()],
                &v.string[..]
            );
        }
    }

    #[test]
    fn enumerate_rejects_bad_input() {
        let rs = RootSystem::new(1).unwrap();
        let seq = DirectionSequence::cyclic(1);
        let eta = PiecewiseLinearPath::straight(&(rs.lambda0() - rs.alpha(1)), 1.0);
        assert!(enumerate_module(&rs, &eta, &seq, &rs.barycentric_drift(), 2.0).is_err());
        assert!(matches!(
            enumerate_module(&rs, &lambda0_path(&rs), &seq, &rs.lambda0(), 2.0),
            Err(Error::InvalidDrift { .. })
        ));
        assert!(matches!(
            enumerate_module(&rs, &lambda0_path(&rs), &seq, &rs.barycentric_drift(), -1.0),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn tail_bound_decreases_and_dominates_catalog_growth() {
        let rs = RootSystem::new(1).unwrap();
        let nu_hat = rs.barycentric_drift() * 2.0;
        let seq = DirectionSequence::cyclic(1);
        let b1 = tail_mass_bound(&rs, &nu_hat, 1.0, 5.0).unwrap();
        let b2 = tail_mass_bound(&rs, &nu_hat, 1.0, 10.0).unwrap();
        assert!(b2 < b1);
        let small = enumerate_module(&rs, &lambda0_path(&rs), &seq, &nu_hat, 5.0).unwrap();
        let big = enumerate_module(&rs, &lambda0_path(&rs), &seq, &nu_hat, 12.0).unwrap();
        let mass = |c: &ModuleCatalog| -> f64 {
            c.vertices.iter().map(|v| (-v.weight_exponent).exp()).sum()
        };
        assert!(mass(&big) - mass(&small) <= b1 * mass(&small));
        let e = cutoff_for_tail(&rs, &nu_hat, 1.0, 1e-6).unwrap();
        assert!(tail_mass_bound(&rs, &nu_hat, 1.0, e).unwrap() <= 1e-6);
    }

    #[test]
    fn verma_sampler_mean() {
        let rs = RootSystem::new(1).unwrap();
        let nu_hat = rs.barycentric_drift();
        let sampler = VermaOmegaSampler::new(&rs, &nu_hat, 2.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = sampler.sample(&mut rng).finite[0];
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let sd = (sum_sq / n as f64 - mean * mean).sqrt();
        assert!((mean - sampler.mean().finite[0]).abs() < 4.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn verma_sampler_with_large_drift_is_zero() {
        let rs = RootSystem::new(1).unwrap();
        let nu_hat = rs.barycentric_drift() * 200.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(
                sample_verma_omega(&rs, &nu_hat, 1.0, 2, &mut rng).unwrap(),
                rs.zero()
            );
        }
    }

    #[test]
    fn limit_sampler_is_centred_without_drift_terms() {
        let rs = RootSystem::new(1).unwrap();
        // only the finite term E_{α_1} α_1 has a non-zero mean when ν = 0
        let nu_hat = rs.lambda0() + rs.alpha(1) * 0.1;
        let s = LimitOmegaSampler::new(&rs, &nu_hat, 5).unwrap();
        let m = s.mean().finite[0];
        let c = rs.form(&rs.alpha(1), &nu_hat);
        let mut expected = 1.0 / c;
        for k in 1..=5 {
            expected += 1.0 / (k as f64 + c) - 1.0 / (k as f64 - c);
        }
        assert!((m - expected).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(s.sample(&mut rng).level, 0.0);
    }
}
