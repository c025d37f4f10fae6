//! Root datum of the affine algebra of type A_n^(1).
//!
//! Weights are stored in the basis `(Λ0, α_1, …, α_n, δ)`. The simple root
//! `α_0` is not a basis vector; it is `δ − α_1 − … − α_n`. Projecting to the
//! quotient by `Rδ` therefore amounts to dropping the `delta` coordinate.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub(crate) type Coords = SmallVec<[f64; 6]>;

/// An element of the real affine weight space.
#[derive(Clone, PartialEq)]
pub struct WeightVector {
    /// Coefficient of Λ0.
    pub level: f64,
    /// Coefficients of α_1, …, α_n.
    pub finite: Coords,
    /// Coefficient of δ.
    pub delta: f64,
}

impl fmt::Debug for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[Λ0: {}, α: {:?}, δ: {}]",
            self.level,
            &self.finite[..],
            self.delta
        )
    }
}

impl WeightVector {
    pub fn zero(rank: usize) -> Self {
        Self {
            level: 0.0,
            finite: SmallVec::from_elem(0.0, rank),
            delta: 0.0,
        }
    }

    pub fn new(level: f64, finite: &[f64], delta: f64) -> Self {
        Self {
            level,
            finite: SmallVec::from_slice(finite),
            delta,
        }
    }

    /// A vector of `h*_R` (level and δ-coordinate zero).
    pub fn from_finite(finite: &[f64]) -> Self {
        Self::new(0.0, finite, 0.0)
    }

    pub fn rank(&self) -> usize {
        self.finite.len()
    }

    /// Image in the quotient by `Rδ`, represented with `delta = 0`.
    pub fn quotient(&self) -> Self {
        Self {
            level: self.level,
            finite: self.finite.clone(),
            delta: 0.0,
        }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &WeightVector) {
        debug_assert_eq!(self.rank(), other.rank());
        self.level += c * other.level;
        self.delta += c * other.delta;
        for (a, b) in self.finite.iter_mut().zip(&other.finite) {
            *a += c * b;
        }
    }

    /// Linear interpolation `(1 − s)·self + s·other`.
    pub fn lerp(&self, other: &WeightVector, s: f64) -> WeightVector {
        let mut out = self.clone();
        out.level += s * (other.level - self.level);
        out.delta += s * (other.delta - self.delta);
        for (a, (x, y)) in out
            .finite
            .iter_mut()
            .zip(self.finite.iter().zip(&other.finite))
        {
            *a = x + s * (y - x);
        }
        out
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &WeightVector) -> f64 {
        let mut d = (self.level - other.level)
            .abs()
            .max((self.delta - other.delta).abs());
        for (a, b) in self.finite.iter().zip(&other.finite) {
            d = d.max((a - b).abs());
        }
        d
    }

    /// Coordinates in storage order `(level, finite…, delta)`.
    pub fn coordinates(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.rank() + 2);
        v.push(self.level);
        v.extend_from_slice(&self.finite);
        v.push(self.delta);
        v
    }
}

impl Add for &WeightVector {
    type Output = WeightVector;
    fn add(self, rhs: &WeightVector) -> WeightVector {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Add for WeightVector {
    type Output = WeightVector;
    fn add(mut self, rhs: WeightVector) -> WeightVector {
        self.axpy(1.0, &rhs);
        self
    }
}

impl Sub for &WeightVector {
    type Output = WeightVector;
    fn sub(self, rhs: &WeightVector) -> WeightVector {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Sub for WeightVector {
    type Output = WeightVector;
    fn sub(mut self, rhs: WeightVector) -> WeightVector {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl AddAssign<&WeightVector> for WeightVector {
    fn add_assign(&mut self, rhs: &WeightVector) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&WeightVector> for WeightVector {
    fn sub_assign(&mut self, rhs: &WeightVector) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &WeightVector {
    type Output = WeightVector;
    fn mul(self, c: f64) -> WeightVector {
        let mut out = self.clone();
        out.level *= c;
        out.delta *= c;
        for a in out.finite.iter_mut() {
            *a *= c;
        }
        out
    }
}

impl Mul<f64> for WeightVector {
    type Output = WeightVector;
    fn mul(self, c: f64) -> WeightVector {
        &self * c
    }
}

impl Neg for WeightVector {
    type Output = WeightVector;
    fn neg(self) -> WeightVector {
        self * -1.0
    }
}

/// The indexing rule `k ↦ i_k` for cascades of transforms.
///
/// Stored as one period of the sequence; `index(k) = pattern[k mod period]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionSequence {
    pattern: Vec<usize>,
}

impl DirectionSequence {
    /// The cyclic sequence `i_k = k mod (n + 1)`.
    pub fn cyclic(rank: usize) -> Self {
        Self {
            pattern: (0..=rank).collect(),
        }
    }

    /// A periodic sequence given by one period. Every simple root index must
    /// occur, otherwise some direction would only be visited finitely often.
    pub fn periodic(rank: usize, pattern: Vec<usize>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidSequence("empty period".into()));
        }
        if let Some(&bad) = pattern.iter().find(|&&i| i > rank) {
            return Err(Error::IndexOutOfRange { index: bad, rank });
        }
        for j in 0..=rank {
            if !pattern.contains(&j) {
                return Err(Error::InvalidSequence(format!(
                    "index {j} never occurs in the period"
                )));
            }
        }
        Ok(Self { pattern })
    }

    pub fn index(&self, k: usize) -> usize {
        self.pattern[k % self.pattern.len()]
    }

    pub fn period(&self) -> usize {
        self.pattern.len()
    }

    pub fn pattern(&self) -> &[usize] {
        &self.pattern
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.pattern.iter().copied().cycle()
    }

    /// Whether the sequence is known to give reduced words at every depth.
    ///
    /// Only rotations of the cyclic order and of its reverse are recognised;
    /// other sequences are accepted but reported as unverified.
    pub fn reduced_verified(&self) -> bool {
        let len = self.pattern.len();
        let up = (0..len).all(|k| self.pattern[(k + 1) % len] == (self.pattern[k] + 1) % len);
        let down = (0..len).all(|k| (self.pattern[(k + 1) % len] + 1) % len == self.pattern[k]);
        let is_perm = {
            let mut seen = vec![false; len];
            self.pattern
                .iter()
                .all(|&i| i < len && !std::mem::replace(&mut seen[i], true))
        };
        is_perm && (up || down)
    }
}

/// Classification of a positive affine root.
#[derive(Clone, Debug, PartialEq)]
pub enum RootKind {
    /// `σβ + kδ` with `σ = ±1` and `β ∈ R_+`; `k = 0` only for `σ = +1`.
    Real {
        sign: i8,
        finite_index: usize,
        k: usize,
    },
    /// `kδ`, with the multiplicity it carries in the root system.
    Imaginary { k: usize, multiplicity: usize },
}

#[derive(Clone, Debug)]
pub struct AffineRoot {
    pub vector: WeightVector,
    pub kind: RootKind,
}

/// Cartan data of A_n^(1) in the storage basis `(Λ0, α_1..α_n, δ)`.
#[derive(Clone, Debug)]
pub struct RootSystem {
    rank: usize,
    cartan: Vec<Vec<i64>>,
    finite_gram: Vec<Vec<f64>>,
    /// `coroots[i]` is the linear functional `⟨·, α_i^∨⟩` on storage coordinates.
    coroots: Vec<Vec<f64>>,
    finite_positive_roots: Vec<Vec<i64>>,
}

impl RootSystem {
    pub fn new(rank: usize) -> Result<Self> {
        if rank < 1 {
            return Err(Error::InvalidRank(rank));
        }
        let size = rank + 1;
        let mut cartan = vec![vec![0i64; size]; size];
        for (i, row) in cartan.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let d = i.abs_diff(j);
                *entry = if i == j {
                    2
                } else if rank == 1 {
                    -2
                } else if d == 1 || d == rank {
                    -1
                } else {
                    0
                };
            }
        }
        let finite_gram = (1..=rank)
            .map(|i| (1..=rank).map(|j| cartan[i][j] as f64).collect())
            .collect();
        let coroots = (0..size)
            .map(|i| {
                let mut c = Vec::with_capacity(rank + 2);
                c.push(if i == 0 { 1.0 } else { 0.0 });
                c.extend((1..=rank).map(|j| cartan[j][i] as f64));
                c.push(0.0);
                c
            })
            .collect();
        let mut finite_positive_roots = Vec::new();
        for a in 1..=rank {
            for b in a..=rank {
                let mut v = vec![0i64; rank];
                for c in v.iter_mut().take(b).skip(a - 1) {
                    *c = 1;
                }
                finite_positive_roots.push(v);
            }
        }
        Ok(Self {
            rank,
            cartan,
            finite_gram,
            coroots,
            finite_positive_roots,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `cartan[j][i] = ⟨α_j, α_i^∨⟩`.
    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    /// Gram matrix of `(·|·)` on `α_1..α_n`.
    pub fn finite_gram(&self) -> &[Vec<f64>] {
        &self.finite_gram
    }

    /// Gram matrix of `(·|·)` on the storage basis `(Λ0, α_1..α_n, δ)`.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let dim = self.rank + 2;
        let mut g = vec![vec![0.0; dim]; dim];
        g[0][dim - 1] = 1.0;
        g[dim - 1][0] = 1.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                g[i + 1][j + 1] = self.finite_gram[i][j];
            }
        }
        g
    }

    pub fn zero(&self) -> WeightVector {
        WeightVector::zero(self.rank)
    }

    pub fn lambda0(&self) -> WeightVector {
        let mut v = self.zero();
        v.level = 1.0;
        v
    }

    pub fn delta(&self) -> WeightVector {
        let mut v = self.zero();
        v.delta = 1.0;
        v
    }

    /// The simple root `α_i`; `α_0 = δ − Σ_{j≥1} α_j`. Panics if `i > n`.
    pub fn alpha(&self, i: usize) -> WeightVector {
        assert!(i <= self.rank, "simple root index {i} out of range");
        let mut v = self.zero();
        if i == 0 {
            v.delta = 1.0;
            v.finite.iter_mut().for_each(|c| *c = -1.0);
        } else {
            v.finite[i - 1] = 1.0;
        }
        v
    }

    /// Weight with the given finite coordinates and level/delta zero.
    pub fn finite(&self, coeffs: &[f64]) -> WeightVector {
        assert_eq!(coeffs.len(), self.rank);
        WeightVector::from_finite(coeffs)
    }

    /// `Σ_i c_i α_i` over all simple roots including `α_0`.
    pub fn root_combination(&self, coeffs: &[f64]) -> WeightVector {
        assert_eq!(coeffs.len(), self.rank + 1);
        let mut v = self.zero();
        v.delta = coeffs[0];
        for j in 0..self.rank {
            v.finite[j] = coeffs[j + 1] - coeffs[0];
        }
        v
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i > self.rank {
            Err(Error::IndexOutOfRange {
                index: i,
                rank: self.rank,
            })
        } else {
            Ok(())
        }
    }

    fn check_rank(&self, x: &WeightVector) -> Result<()> {
        if x.rank() != self.rank {
            Err(Error::RankMismatch {
                left: x.rank(),
                right: self.rank,
            })
        } else {
            Ok(())
        }
    }

    /// `⟨x, α_i^∨⟩`, unchecked. Panics on a bad index.
    #[inline]
    pub fn pair(&self, x: &WeightVector, i: usize) -> f64 {
        let c = &self.coroots[i];
        let mut s = c[0] * x.level;
        for (j, v) in x.finite.iter().enumerate() {
            s += c[j + 1] * v;
        }
        s
    }

    /// `⟨x, α_i^∨⟩` with range checks.
    pub fn pairing(&self, x: &WeightVector, i: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_rank(x)?;
        Ok(self.pair(x, i))
    }

    /// All pairings `⟨x, α_0^∨⟩, …, ⟨x, α_n^∨⟩`.
    pub fn pairings(&self, x: &WeightVector) -> Vec<f64> {
        (0..=self.rank).map(|i| self.pair(x, i)).collect()
    }

    /// `(x|y)`, unchecked.
    #[inline]
    pub fn form(&self, x: &WeightVector, y: &WeightVector) -> f64 {
        let mut s = x.level * y.delta + x.delta * y.level;
        for (i, a) in x.finite.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in y.finite.iter().enumerate() {
                s += a * self.finite_gram[i][j] * b;
            }
        }
        s
    }

    /// The invariant bilinear form `(x|y)`.
    pub fn bilinear(&self, x: &WeightVector, y: &WeightVector) -> Result<f64> {
        self.check_rank(x)?;
        self.check_rank(y)?;
        Ok(self.form(x, y))
    }

    /// `(x|x)` restricted to the finite part, the squared norm on `h*_R`.
    pub fn finite_norm_sq(&self, finite: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, a) in finite.iter().enumerate() {
            for (j, b) in finite.iter().enumerate() {
                s += a * self.finite_gram[i][j] * b;
            }
        }
        s
    }

    /// Positive roots of the finite system `A_n`, as coefficient vectors on
    /// `α_1..α_n`.
    pub fn finite_positive_roots(&self) -> &[Vec<i64>] {
        &self.finite_positive_roots
    }

    /// Positive affine roots up to `δ`-level `cutoff`: `R_+`, `±β + kδ` and
    /// `kδ` for `1 ≤ k ≤ cutoff`. Imaginary roots carry multiplicity `n`.
    pub fn positive_roots(&self, cutoff: usize) -> Vec<AffineRoot> {
        let mut out = Vec::new();
        let finite_vec = |beta: &[i64], sign: f64| -> Vec<f64> {
            beta.iter().map(|&c| sign * c as f64).collect()
        };
        for (idx, beta) in self.finite_positive_roots.iter().enumerate() {
            out.push(AffineRoot {
                vector: WeightVector::new(0.0, &finite_vec(beta, 1.0), 0.0),
                kind: RootKind::Real {
                    sign: 1,
                    finite_index: idx,
                    k: 0,
                },
            });
        }
        for k in 1..=cutoff {
            for (idx, beta) in self.finite_positive_roots.iter().enumerate() {
                for sign in [1i8, -1] {
                    out.push(AffineRoot {
                        vector: WeightVector::new(0.0, &finite_vec(beta, sign as f64), k as f64),
                        kind: RootKind::Real {
                            sign,
                            finite_index: idx,
                            k,
                        },
                    });
                }
            }
            out.push(AffineRoot {
                vector: WeightVector::new(0.0, &vec![0.0; self.rank], k as f64),
                kind: RootKind::Imaginary {
                    k,
                    multiplicity: self.rank,
                },
            });
        }
        out
    }

    /// Solves for the correction vector `u ∈ h*` satisfying
    /// `⟨u − Σ_{k<p} α_{i_k} − ½ α_{i_p}, α_{i_p}^∨⟩ = 0` for every `p`.
    ///
    /// One period gives `n + 1` equations in `n` unknowns; later periods repeat
    /// them because a full period of simple roots sums to `δ`. The returned
    /// vector lives in the quotient (level and delta zero).
    pub fn correction_vector(&self, seq: &DirectionSequence) -> Result<WeightVector> {
        let n = self.rank;
        if seq.pattern().iter().any(|&i| i > n) {
            return Err(Error::InvalidSequence("index exceeds rank".into()));
        }
        let equations = seq.period();
        let mut a = DMatrix::<f64>::zeros(equations, n);
        let mut b = DVector::<f64>::zeros(equations);
        let mut partial = self.zero();
        for p in 0..equations {
            let ip = seq.index(p);
            for j in 0..n {
                a[(p, j)] = self.cartan[j + 1][ip] as f64;
            }
            let mut target = partial.clone();
            target.axpy(0.5, &self.alpha(ip));
            b[p] = self.pair(&target, ip);
            partial += &self.alpha(ip);
        }
        let svd = a.clone().svd(true, true);
        if svd.singular_values.iter().any(|&s| s < 1e-10) {
            return Err(Error::SingularSystem { residual: f64::NAN });
        }
        let sol = svd
            .solve(&b, 1e-12)
            .map_err(|_| Error::SingularSystem { residual: f64::NAN })?;
        let u = WeightVector::from_finite(sol.as_slice());
        let residual = self
            .correction_residuals(seq, &u, 2 * equations + 1)
            .into_iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));
        if residual > 1e-12 {
            return Err(Error::SingularSystem { residual });
        }
        Ok(u)
    }

    /// Residuals of the defining equations of the correction vector for
    /// `p = 0..count`.
    pub fn correction_residuals(
        &self,
        seq: &DirectionSequence,
        u: &WeightVector,
        count: usize,
    ) -> Vec<f64> {
        let mut partial = self.zero();
        (0..count)
            .map(|p| {
                let ip = seq.index(p);
                let mut v = u - &partial;
                v.axpy(-0.5, &self.alpha(ip));
                partial += &self.alpha(ip);
                self.pair(&v, ip)
            })
            .collect()
    }

    /// `Σ_{k<p} α_{i_k}`.
    pub fn partial_root_sum(&self, seq: &DirectionSequence, p: usize) -> WeightVector {
        let mut s = self.zero();
        for k in 0..p {
            s += &self.alpha(seq.index(k));
        }
        s
    }

    /// Weyl vector `ρ` of the finite system, in `α`-coordinates.
    pub fn rho(&self) -> WeightVector {
        let mut v = self.zero();
        for beta in &self.finite_positive_roots {
            for (c, b) in v.finite.iter_mut().zip(beta) {
                *c += 0.5 * *b as f64;
            }
        }
        v
    }

    /// Fundamental weights `ω_1..ω_n` of the finite system in `α`-coordinates.
    pub fn fundamental_weights(&self) -> Vec<Vec<f64>> {
        let n = self.rank;
        let g = DMatrix::from_fn(n, n, |i, j| self.finite_gram[i][j]);
        let inv = g.try_inverse().expect("finite Cartan matrix is invertible");
        (0..n)
            .map(|i| (0..n).map(|j| inv[(j, i)]).collect())
            .collect()
    }

    /// Vectors `e_1..e_n` of `h*_R`, in `α`-coordinates, orthonormal for
    /// `(·|·)`. They are the columns of the Cholesky factor of the inverse
    /// finite Gram matrix.
    pub fn orthonormal_frame(&self) -> Vec<Vec<f64>> {
        let n = self.rank;
        let g = DMatrix::from_fn(n, n, |i, j| self.finite_gram[i][j]);
        let inv = g.try_inverse().expect("finite Cartan matrix is invertible");
        let l = inv
            .cholesky()
            .expect("inverse Gram matrix is positive definite")
            .l();
        (0..n)
            .map(|k| (0..n).map(|j| l[(j, k)]).collect())
            .collect()
    }

    /// The barycentric drift `ν̂ = Λ0 + ρ/(n+1)`, for which
    /// `(ν̂|α_i) = 1/(n+1)` for every simple root.
    pub fn barycentric_drift(&self) -> WeightVector {
        let mut v = self.rho() * (1.0 / (self.rank as f64 + 1.0));
        v.level = 1.0;
        v
    }
}
