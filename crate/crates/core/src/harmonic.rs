//! The space-time harmonic function `Ψ_ν̂` of the killed Brownian motion in
//! the cone `C′`, evaluated through Frenkel's character series.
//!
//! Values are carried as logarithms: for small levels the Gaussian factor
//! `e^{−2π²‖μ+ρ‖²/t}` underflows long before ratios of `Ψ` lose precision.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::roots::{RootSystem, WeightVector};

/// Relative size below which series terms are dropped.
const SERIES_EPS: f64 = 1e-18;

/// The finite Weyl group `S_{n+1}` acting on `α`-coordinates.
#[derive(Clone, Debug)]
pub struct FiniteWeyl {
    rank: usize,
    elements: Vec<(Vec<f64>, f64)>,
}

impl FiniteWeyl {
    /// Generated from the simple reflections by breadth-first search; the sign
    /// is `(−1)^length`.
    pub fn new(rs: &RootSystem) -> Self {
        let n = rs.rank();
        let cartan = rs.cartan();
        let identity: Vec<f64> = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
            .collect();
        // s_j x = x − ⟨x, α_j^∨⟩ α_j, with ⟨x, α_j^∨⟩ = Σ_k x_k ⟨α_k, α_j^∨⟩
        let gens: Vec<Vec<f64>> = (1..=n)
            .map(|j| {
                let mut m = identity.clone();
                for k in 1..=n {
                    m[(j - 1) * n + (k - 1)] -= cartan[k][j] as f64;
                }
                m
            })
            .collect();
        let key = |m: &[f64]| m.iter().map(|x| x.round() as i64).collect::<Vec<_>>();
        let mut seen = std::collections::HashSet::new();
        seen.insert(key(&identity));
        let mut elements = vec![(identity, 1.0)];
        let mut frontier = 0;
        while frontier < elements.len() {
            let (w, sign) = elements[frontier].clone();
            for g in &gens {
                let prod = mat_mul(g, &w, n);
                if seen.insert(key(&prod)) {
                    elements.push((prod, -sign));
                }
            }
            frontier += 1;
        }
        Self { rank: n, elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// `w·x` for the `k`-th element.
    pub fn act(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let n = self.rank;
        let m = &self.elements[k].0;
        (0..n)
            .map(|r| (0..n).map(|c| m[r * n + c] * x[c]).sum())
            .collect()
    }

    pub fn sign(&self, k: usize) -> f64 {
        self.elements[k].1
    }
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = (0..n).map(|k| a[r * n + k] * b[k * n + c]).sum();
        }
    }
    out
}

fn gram_apply(rs: &RootSystem, x: &[f64]) -> Vec<f64> {
    rs.finite_gram()
        .iter()
        .map(|row| row.iter().zip(x).map(|(g, v)| g * v).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `π(x) = Π_{α∈R_+} sin π(α|x)` for `x ∈ h*_R` in `α`-coordinates.
pub fn sine_product(rs: &RootSystem, x: &[f64]) -> f64 {
    let gx = gram_apply(rs, x);
    rs.finite_positive_roots()
        .iter()
        .map(|beta| {
            let ip: f64 = beta.iter().zip(&gx).map(|(&b, g)| b as f64 * g).sum();
            (PI * ip).sin()
        })
        .product()
}

/// Weyl dimension `Π_{α>0} (μ+ρ|α)/(ρ|α)`.
pub fn weyl_dimension(rs: &RootSystem, mu: &[f64]) -> f64 {
    let rho = &rs.rho().finite;
    let shifted: Vec<f64> = mu.iter().zip(rho.iter()).map(|(m, r)| m + r).collect();
    let gs = gram_apply(rs, &shifted);
    let gr = gram_apply(rs, rho);
    rs.finite_positive_roots()
        .iter()
        .map(|beta| {
            let b: Vec<f64> = beta.iter().map(|&c| c as f64).collect();
            dot(&b, &gs) / dot(&b, &gr)
        })
        .product()
}

/// Alternating sums `A_v(β) = Σ_w det(w) e^{2πi(wv|β)}` at a fixed `β`.
struct AlternatingSums {
    /// `wᵀGβ` for every group element, with its sign.
    duals: Vec<(Vec<f64>, f64)>,
    denominator: Complex64,
}

impl AlternatingSums {
    fn new(rs: &RootSystem, weyl: &FiniteWeyl, beta: &[f64]) -> Self {
        let n = rs.rank();
        let g_beta = gram_apply(rs, beta);
        let duals: Vec<(Vec<f64>, f64)> = (0..weyl.order())
            .map(|k| {
                let m = &weyl.elements[k].0;
                let v: Vec<f64> = (0..n)
                    .map(|c| (0..n).map(|r| m[r * n + c] * g_beta[r]).sum())
                    .collect();
                (v, weyl.sign(k))
            })
            .collect();
        let mut out = Self {
            duals,
            denominator: Complex64::new(0.0, 0.0),
        };
        out.denominator = out.sum(&rs.rho().finite);
        out
    }

    fn sum(&self, v: &[f64]) -> Complex64 {
        self.duals
            .iter()
            .map(|(d, sign)| Complex64::from_polar(*sign, 2.0 * PI * dot(v, d)))
            .sum()
    }

    fn regular(&self) -> bool {
        self.denominator.norm() > 1e-12
    }

    fn character(&self, mu_plus_rho: &[f64]) -> Complex64 {
        self.sum(mu_plus_rho) / self.denominator
    }
}

/// `χ_μ(β)` as the ratio of alternating sums over `W`, normalised so that
/// `χ_0 = 1`. Fails for singular `β`.
pub fn finite_weyl_character(
    rs: &RootSystem,
    weyl: &FiniteWeyl,
    mu: &[f64],
    beta: &[f64],
) -> Result<Complex64> {
    let sums = AlternatingSums::new(rs, weyl, beta);
    if !sums.regular() {
        return Err(Error::SingularArgument);
    }
    let rho = rs.rho();
    let v: Vec<f64> = mu
        .iter()
        .zip(rho.finite.iter())
        .map(|(m, r)| m + r)
        .collect();
    Ok(sums.character(&v))
}

/// Dominant weights `μ` with `‖μ+ρ‖² ≤ bound`, as `(μ + ρ, ‖μ+ρ‖², dim μ)`.
fn dominant_weights(rs: &RootSystem, bound: f64) -> Vec<(Vec<f64>, f64, f64)> {
    let n = rs.rank();
    let fund = rs.fundamental_weights();
    let rho = rs.rho().finite.to_vec();
    let norm = |v: &[f64]| dot(v, &gram_apply(rs, v));
    let mut out = Vec::new();
    let mut stack = vec![vec![0usize; n]];
    let mut seen = std::collections::HashSet::new();
    while let Some(coeffs) = stack.pop() {
        if !seen.insert(coeffs.clone()) {
            continue;
        }
        let mut v = rho.clone();
        for (j, &c) in coeffs.iter().enumerate() {
            for (x, f) in v.iter_mut().zip(&fund[j]) {
                *x += c as f64 * f;
            }
        }
        let r2 = norm(&v);
        if r2 > bound {
            continue;
        }
        let mu: Vec<f64> = v.iter().zip(&rho).map(|(a, b)| a - b).collect();
        out.push((v, r2, weyl_dimension(rs, &mu)));
        for j in 0..n {
            let mut next = coeffs.clone();
            next[j] += 1;
            stack.push(next);
        }
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}

/// A real number stored as `sign · e^{log_abs}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub log_abs: f64,
    pub sign: f64,
}

impl LogValue {
    pub fn value(&self) -> f64 {
        self.sign * self.log_abs.exp()
    }

    /// `self / other`.
    pub fn ratio(&self, other: &LogValue) -> f64 {
        self.sign * other.sign * (self.log_abs - other.log_abs).exp()
    }
}

/// Frenkel's series for `ψ_{λ1}(λ2) / π(λ2/t2)` with `λ1` fixed, truncated to
/// `‖μ+ρ‖² ≤ m_cut`.
#[derive(Clone, Debug)]
pub struct FrenkelSeries {
    rank: usize,
    weyl: FiniteWeyl,
    t1: f64,
    x1: Vec<f64>,
    /// `(μ+ρ, ‖μ+ρ‖², χ_μ(−x1/t1), dim μ)` for the kept weights.
    terms: Vec<(Vec<f64>, f64, Complex64, f64)>,
    /// Weights past the cutoff, kept for the tail estimate.
    dropped: Vec<(f64, f64)>,
    m_cut: f64,
    rho_norm: f64,
}

impl FrenkelSeries {
    pub fn new(rs: &RootSystem, lambda1: &WeightVector, m_cut: f64) -> Result<Self> {
        let t1 = lambda1.level;
        if !(t1 > 0.0) {
            return Err(Error::NonPositiveLevel { t1, t2: f64::NAN });
        }
        if !(m_cut > 0.0) {
            return Err(Error::CutoffTooSmall { cutoff: m_cut });
        }
        let weyl = FiniteWeyl::new(rs);
        let x1: Vec<f64> = lambda1.finite.to_vec();
        let arg: Vec<f64> = x1.iter().map(|x| -x / t1).collect();
        let sums = AlternatingSums::new(rs, &weyl, &arg);
        if !sums.regular() {
            return Err(Error::SingularArgument);
        }
        let rho_norm = rs.finite_norm_sq(&rs.rho().finite);
        let mut terms = Vec::new();
        let mut dropped = Vec::new();
        for (v, r2, dim) in dominant_weights(rs, 4.0 * m_cut + 20.0) {
            if r2 <= m_cut {
                let chi = sums.character(&v);
                terms.push((v, r2, chi, dim));
            } else {
                dropped.push((r2, dim));
            }
        }
        Ok(Self {
            rank: rs.rank(),
            weyl,
            t1,
            x1,
            terms,
            dropped,
            m_cut,
            rho_norm,
        })
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn m_cut(&self) -> f64 {
        self.m_cut
    }

    /// Bound on the dropped part of the μ-sum relative to the leading
    /// `μ = 0` term, at level `t2`, using `|χ_μ| ≤ dim μ`.
    pub fn tail_bound(&self, t2: f64) -> f64 {
        let c = 2.0 * PI * PI / (self.t1 * t2);
        self.dropped
            .iter()
            .map(|&(r2, dim)| dim * dim * (-c * (r2 - self.rho_norm)).exp())
            .sum()
    }

    /// `log |ψ_{λ1}(λ2) / π(λ2/t2)|` up to the global constant.
    pub fn evaluate(&self, rs: &RootSystem, lambda2: &WeightVector) -> Result<LogValue> {
        let t2 = lambda2.level;
        if !(t2 > 0.0) {
            return Err(Error::NonPositiveLevel { t1: self.t1, t2 });
        }
        let t1 = self.t1;
        let x2 = &lambda2.finite[..];
        let arg: Vec<f64> = x2.iter().map(|x| x / t2).collect();
        let sums = AlternatingSums::new(rs, &self.weyl, &arg);
        if !sums.regular() {
            return Err(Error::SingularArgument);
        }
        let c = 2.0 * PI * PI / (t1 * t2);
        let mut sum = Complex64::new(0.0, 0.0);
        for (v, r2, chi1, _) in &self.terms {
            let w = (-c * (r2 - self.rho_norm)).exp();
            if w < SERIES_EPS * sum.norm() {
                break;
            }
            sum += sums.character(v) * chi1 * w;
        }
        if sum.im.abs() > 1e-9 * sum.norm().max(1e-300) {
            return Err(Error::InvalidParameter(format!(
                "character series has imaginary part {:e}",
                sum.im
            )));
        }
        let total = sum.re;
        let n = self.rank as f64;
        let norm1 = rs.finite_norm_sq(&self.x1);
        let norm2 = rs.finite_norm_sq(x2);
        let log_prefactor = -0.5 * n * (t1 * t2 / (2.0 * PI)).ln()
            + t1 / (2.0 * t2) * norm2
            + t2 / (2.0 * t1) * norm1
            - c * self.rho_norm;
        Ok(LogValue {
            log_abs: log_prefactor + total.abs().ln(),
            sign: total.signum(),
        })
    }
}

/// One evaluation of `ψ_{λ1}(λ2)/π(λ2/t2)` with its relative tail bound.
pub fn psi_frenkel(
    rs: &RootSystem,
    lambda1: &WeightVector,
    lambda2: &WeightVector,
    m_cut: f64,
) -> Result<(LogValue, f64)> {
    let series = FrenkelSeries::new(rs, &lambda1.quotient(), m_cut)?;
    let v = series.evaluate(rs, &lambda2.quotient())?;
    Ok((v, series.tail_bound(lambda2.level)))
}

/// Cutoff `‖μ+ρ‖²` making dropped terms negligible for levels up to `t_max`
/// when `t1 = 1`.
pub fn default_m_cut(rs: &RootSystem, t_max: f64) -> f64 {
    let rho = rs.finite_norm_sq(&rs.rho().finite);
    rho + t_max * (60.0 + 8.0 * rs.rank() as f64) / (2.0 * PI * PI) + 4.0
}

/// `Ψ_ν̂(λ) = e^{−(ν̂|λ)} ψ_ν̂(λ)` on the interior of `C′`.
#[derive(Clone, Debug)]
pub struct HarmonicPsi {
    rs: RootSystem,
    nu_hat: WeightVector,
    series: FrenkelSeries,
}

/// Where a point sits relative to `C′`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConePosition {
    Interior,
    Boundary,
    Outside,
}

pub fn cone_position(rs: &RootSystem, lambda: &WeightVector) -> ConePosition {
    let min = (0..=rs.rank())
        .map(|i| rs.pair(lambda, i))
        .fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        ConePosition::Interior
    } else if min == 0.0 {
        ConePosition::Boundary
    } else {
        ConePosition::Outside
    }
}

impl HarmonicPsi {
    /// `ν̂` must have level 1 and a regular finite part.
    pub fn new(rs: &RootSystem, nu_hat: &WeightVector, m_cut: f64) -> Result<Self> {
        if (nu_hat.level - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDrift {
                what: "level of nu_hat".into(),
                value: nu_hat.level,
            });
        }
        let nu_hat = nu_hat.quotient();
        Ok(Self {
            rs: rs.clone(),
            series: FrenkelSeries::new(rs, &nu_hat, m_cut)?,
            nu_hat,
        })
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    pub fn nu_hat(&self) -> &WeightVector {
        &self.nu_hat
    }

    pub fn series(&self) -> &FrenkelSeries {
        &self.series
    }

    /// `log Ψ(λ)`; `None` on the boundary or outside `C′`, where `Ψ` is 0 by
    /// convention.
    pub fn log_value(&self, lambda: &WeightVector) -> Result<Option<LogValue>> {
        let lambda = lambda.quotient();
        if cone_position(&self.rs, &lambda) != ConePosition::Interior {
            return Ok(None);
        }
        let t = lambda.level;
        let x: Vec<f64> = lambda.finite.iter().map(|c| c / t).collect();
        let sine = sine_product(&self.rs, &x);
        let psi = self.series.evaluate(&self.rs, &lambda)?;
        let exponent = -self.rs.form(&self.nu_hat, &lambda);
        Ok(Some(LogValue {
            log_abs: exponent + psi.log_abs + sine.abs().ln(),
            sign: psi.sign * sine.signum(),
        }))
    }

    /// `Ψ(λ)` (may underflow at small levels; prefer [`log_value`](Self::log_value)).
    pub fn value(&self, lambda: &WeightVector) -> Result<f64> {
        Ok(self.log_value(lambda)?.map_or(0.0, |v| v.value()))
    }

    /// `Ψ(a)/Ψ(b)`, zero when `a` is not interior.
    pub fn ratio(&self, a: &WeightVector, b: &WeightVector) -> Result<f64> {
        let vb = self
            .log_value(b)?
            .ok_or_else(|| Error::StencilExitsChamber(format!("{b:?} not interior")))?;
        Ok(self.log_value(a)?.map_or(0.0, |va| va.ratio(&vb)))
    }
}

/// `Ψ_ν̂(λ)` in one call.
pub fn harmonic_psi(
    rs: &RootSystem,
    lambda: &WeightVector,
    nu_hat: &WeightVector,
    m_cut: f64,
) -> Result<f64> {
    HarmonicPsi::new(rs, nu_hat, m_cut)?.value(lambda)
}

/// Central-difference estimate of `(∂_t + ½Δ + ν·∇)Ψ / Ψ` at `λ`, with the
/// Laplacian taken in an orthonormal frame of `h*_R`.
pub fn harmonicity_residual(psi: &HarmonicPsi, lambda: &WeightVector, h: f64) -> Result<f64> {
    generator_residual(psi.root_system(), lambda, h, &psi.nu_hat().finite, |p| {
        psi.log_value(p)
    })
}

/// Same stencil for an arbitrary function given in log form; used to check the
/// stencil on functions with known generator.
pub fn generator_residual<F>(
    rs: &RootSystem,
    lambda: &WeightVector,
    h: f64,
    drift: &[f64],
    f: F,
) -> Result<f64>
where
    F: Fn(&WeightVector) -> Result<Option<LogValue>>,
{
    let lambda = lambda.quotient();
    let centre = f(&lambda)?
        .ok_or_else(|| Error::StencilExitsChamber(format!("{lambda:?} not interior")))?;
    let eval = |p: WeightVector| -> Result<f64> {
        f(&p)?
            .map(|v| v.ratio(&centre))
            .ok_or_else(|| Error::StencilExitsChamber(format!("{p:?} not interior")))
    };
    let shift = |dir: &WeightVector, s: f64| {
        let mut p = lambda.clone();
        p.axpy(s, dir);
        p
    };
    let n = rs.rank();
    let level_dir = WeightVector::new(1.0, &vec![0.0; n], 0.0);
    let mut res = (eval(shift(&level_dir, h))? - eval(shift(&level_dir, -h))?) / (2.0 * h);
    for e in rs.orthonormal_frame() {
        let dir = rs.finite(&e);
        res += 0.5 * (eval(shift(&dir, h))? - 2.0 + eval(shift(&dir, -h))?) / (h * h);
    }
    let nu = rs.finite(drift);
    if drift.iter().any(|&c| c != 0.0) {
        res += (eval(shift(&nu, h))? - eval(shift(&nu, -h))?) / (2.0 * h);
    }
    Ok(res)
}

/// Point at level `t` with `⟨λ, α_i^∨⟩ = eps`, on the segment from the
/// barycentre of wall `i` to the vertex `tΛ_i` of the alcove.
pub fn wall_approach_point(rs: &RootSystem, i: usize, eps: f64, t: f64) -> WeightVector {
    let n = rs.rank();
    let fund = rs.fundamental_weights();
    let vertex = |j: usize| -> WeightVector {
        let mut v = rs.lambda0() * t;
        if j > 0 {
            v.axpy(t, &rs.finite(&fund[j - 1]));
        }
        v
    };
    let mut face = rs.zero();
    for j in (0..=n).filter(|&j| j != i) {
        face.axpy(1.0 / n as f64, &vertex(j));
    }
    face.lerp(&vertex(i), eps / t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weyl_orders() {
        for (n, order) in [(1, 2), (2, 6), (3, 24)] {
            let rs = RootSystem::new(n).unwrap();
            let w = FiniteWeyl::new(&rs);
            assert_eq!(w.order(), order);
            let sum: f64 = (0..w.order()).map(|k| w.sign(k)).sum();
            assert_eq!(sum, 0.0);
        }
    }

    #[test]
    fn sine_product_examples() {
        let rs = RootSystem::new(1).unwrap();
        assert_abs_diff_eq!(sine_product(&rs, &[0.25]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sine_product(&rs, &[0.5]), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            sine_product(&rs, &[-0.1]),
            -sine_product(&rs, &[0.1]),
            epsilon = 1e-15
        );
    }

    #[test]
    fn characters() {
        let rs = RootSystem::new(1).unwrap();
        let w = FiniteWeyl::new(&rs);
        let beta = [0.13];
        assert_abs_diff_eq!(
            finite_weyl_character(&rs, &w, &[0.0], &beta).unwrap().re,
            1.0,
            epsilon = 1e-12
        );
        // fundamental weight α_1/2: e^{2πi(ω|β)} + e^{−2πi(ω|β)}, (ω|β) = β_1
        let expected = 2.0 * (2.0 * PI * 0.13).cos();
        let chi = finite_weyl_character(&rs, &w, &[0.5], &beta).unwrap();
        assert_abs_diff_eq!(chi.re, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(chi.im, 0.0, epsilon = 1e-12);
        assert!(matches!(
            finite_weyl_character(&rs, &w, &[0.5], &[0.0]),
            Err(Error::SingularArgument)
        ));
        let rs2 = RootSystem::new(2).unwrap();
        let w2 = FiniteWeyl::new(&rs2);
        let mu = rs2.fundamental_weights()[0].clone();
        let beta = [0.11, 0.07];
        let chi = finite_weyl_character(&rs2, &w2, &mu, &beta).unwrap();
        for k in 0..w2.order() {
            let wb = w2.act(k, &beta);
            let chi_w = finite_weyl_character(&rs2, &w2, &mu, &wb).unwrap();
            assert_abs_diff_eq!((chi_w - chi).norm(), 0.0, epsilon = 1e-10);
        }
        // the dual representation has the conjugate character
        let dual = rs2.fundamental_weights()[1].clone();
        let chi_dual = finite_weyl_character(&rs2, &w2, &dual, &beta).unwrap();
        assert_abs_diff_eq!((chi_dual - chi.conj()).norm(), 0.0, epsilon = 1e-10);
        // near β = 0 the character tends to the dimension
        let small = finite_weyl_character(&rs2, &w2, &mu, &[1e-2, 2.5e-2]).unwrap();
        assert_abs_diff_eq!(small.re, weyl_dimension(&rs2, &mu), epsilon = 2e-2);
        assert_abs_diff_eq!(weyl_dimension(&rs2, &mu), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn psi_positive_and_vanishing_at_walls() {
        for n in [1, 2] {
            let rs = RootSystem::new(n).unwrap();
            let nu_hat = rs.barycentric_drift();
            let psi = HarmonicPsi::new(&rs, &nu_hat, default_m_cut(&rs, 3.0)).unwrap();
            let interior = rs.barycentric_drift() * 0.7;
            assert!(psi.log_value(&interior).unwrap().unwrap().sign > 0.0);
            for i in 0..=n {
                let near = psi
                    .ratio(&wall_approach_point(&rs, i, 1e-6, 0.7), &interior)
                    .unwrap();
                assert!(near > 0.0 && near < 1e-4, "n={n} wall {i}: {near}");
                let p = wall_approach_point(&rs, i, 0.0, 0.7);
                assert_eq!(psi.value(&p).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn truncation_consistency() {
        let rs = RootSystem::new(2).unwrap();
        let nu_hat = rs.barycentric_drift();
        let lambda = rs.barycentric_drift() * 1.5;
        let m = default_m_cut(&rs, 1.5);
        let (a, tail) = psi_frenkel(&rs, &nu_hat, &lambda, m).unwrap();
        let (b, _) = psi_frenkel(&rs, &nu_hat, &lambda, 2.0 * m).unwrap();
        assert!((a.ratio(&b) - 1.0).abs() <= tail.max(1e-14));
        assert!(tail < 1e-10);
    }

    #[test]
    fn stencil_on_known_functions() {
        // e^{(c|x)} − t|c|²/2 − (ν|c)t is annihilated by ∂_t + ½Δ + ν·∇
        let rs = RootSystem::new(2).unwrap();
        let c = rs.finite(&[0.3, -0.2]);
        let nu = [0.1, 0.4];
        let speed = 0.5 * rs.form(&c, &c) + rs.form(&rs.finite(&nu), &c);
        let lambda = rs.barycentric_drift() * 0.8;
        let r = generator_residual(&rs, &lambda, 1e-3, &nu, |p| {
            Ok(Some(LogValue {
                log_abs: rs.form(&c, p) - speed * p.level,
                sign: 1.0,
            }))
        })
        .unwrap();
        assert!(r.abs() < 1e-6, "{r}");
    }

    #[test]
    fn psi_is_harmonic() {
        for n in [1, 2] {
            let rs = RootSystem::new(n).unwrap();
            let psi =
                HarmonicPsi::new(&rs, &rs.barycentric_drift(), default_m_cut(&rs, 4.0)).unwrap();
            let lambda = rs.barycentric_drift() * 3.0;
            let r = harmonicity_residual(&psi, &lambda, 1e-3).unwrap();
            assert!(r.abs() < 1e-4, "n={n}: {r}");
            let coarse = harmonicity_residual(&psi, &lambda, 2e-3).unwrap();
            let order = (coarse / r).abs().log2();
            assert!((1.8..=2.2).contains(&order), "n={n}: order {order}");
        }
    }

    #[test]
    fn wall_vanishing_is_linear() {
        for n in [1, 2] {
            let rs = RootSystem::new(n).unwrap();
            let psi =
                HarmonicPsi::new(&rs, &rs.barycentric_drift(), default_m_cut(&rs, 2.0)).unwrap();
            for i in 0..=n {
                let (xs, ys): (Vec<f64>, Vec<f64>) = [1e-2, 1e-3, 1e-4, 1e-5]
                    .iter()
                    .map(|&eps| {
                        let p = wall_approach_point(&rs, i, eps, 1.0);
                        assert_abs_diff_eq!(rs.pair(&p, i), eps, epsilon = 1e-12);
                        (eps.ln(), psi.log_value(&p).unwrap().unwrap().log_abs)
                    })
                    .unzip();
                let slope = crate::stats::linear_fit(&xs, &ys).unwrap().slope;
                assert!((slope - 1.0).abs() < 0.1, "n={n} wall {i}: {slope}");
            }
        }
    }
}
