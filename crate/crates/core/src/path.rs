//! Piecewise-linear paths in the affine weight space and the exact
//! running-infimum transforms acting on them (Pitman, Lévy-type, corrected
//! cascades, dominant projection).
//!
//! All transforms are computed on breakpoints: between two breakpoints the
//! pairing `h(t) = ⟨η(t), α_i^∨⟩` is affine, so its running infimum switches
//! between a frozen and a tracking regime at a crossing time that is inserted
//! as a new breakpoint. No sampling grid is involved.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::roots::{DirectionSequence, RootSystem, WeightVector};

/// Crossing times closer than this fraction of a segment to its endpoints are
/// not inserted.
const SPLIT_EPS: f64 = 1e-12;

/// A running infimum above this value counts as zero when deciding whether a
/// sweep of the dominant projection changed anything.
pub const STABLE_TOL: f64 = 1e-12;

/// Default tolerance of the dominance and integrality predicates.
pub const PREDICATE_TOL: f64 = 1e-9;

/// Continuous piecewise-linear path `[0, T] → ĥ*_R` starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearPath {
    times: Vec<f64>,
    values: Vec<WeightVector>,
}

/// A scalar piecewise-linear function, used for string functions `t ↦ x_k(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarPwl {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScalarPwl {
    pub fn evaluate(&self, t: f64) -> f64 {
        interpolate(
            &self.times,
            t,
            |k| self.values[k],
            |a, b, s| a + s * (b - a),
        )
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("non-empty")
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - tol)
    }
}

fn interpolate<T, F, L>(times: &[f64], t: f64, value: F, lerp: L) -> T
where
    F: Fn(usize) -> T,
    L: Fn(T, T, f64) -> T,
{
    let last = times.len() - 1;
    if t <= times[0] {
        return value(0);
    }
    if t >= times[last] {
        return value(last);
    }
    // first index with times[k] > t
    let k = times.partition_point(|&x| x <= t);
    let (t0, t1) = (times[k - 1], times[k]);
    if t == t0 {
        return value(k - 1);
    }
    lerp(value(k - 1), value(k), (t - t0) / (t1 - t0))
}

impl PiecewiseLinearPath {
    /// Builds a path from breakpoints. The first breakpoint must be `(0, 0)`
    /// and times must be strictly increasing.
    pub fn new(times: Vec<f64>, values: Vec<WeightVector>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidPath(
                "need matching, non-empty time and value lists".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidPath("path must start at t = 0".into()));
        }
        let v0 = &values[0];
        if v0.level != 0.0 || v0.delta != 0.0 || v0.finite.iter().any(|&c| c != 0.0) {
            return Err(Error::InvalidPath("path must start at 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath(
                "times must be strictly increasing".into(),
            ));
        }
        let rank = v0.rank();
        if values.iter().any(|v| v.rank() != rank) {
            return Err(Error::InvalidPath("mixed ranks".into()));
        }
        Ok(Self { times, values })
    }

    pub(crate) fn from_parts_unchecked(times: Vec<f64>, values: Vec<WeightVector>) -> Self {
        debug_assert!(times.windows(2).all(|w| w[1] > w[0]));
        Self { times, values }
    }

    /// The straight path `t ↦ t·direction` on `[0, horizon]`.
    pub fn straight(direction: &WeightVector, horizon: f64) -> Self {
        assert!(horizon > 0.0);
        Self {
            times: vec![0.0, horizon],
            values: vec![WeightVector::zero(direction.rank()), direction * horizon],
        }
    }

    pub fn rank(&self) -> usize {
        self.values[0].rank()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[WeightVector] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn endpoint(&self) -> &WeightVector {
        self.values.last().expect("non-empty")
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, &WeightVector)> {
        self.times.iter().copied().zip(self.values.iter())
    }

    /// Value at time `t` by linear interpolation.
    pub fn evaluate(&self, t: f64) -> Result<WeightVector> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&t) {
            return Err(Error::TimeOutOfDomain { t, horizon });
        }
        Ok(self.eval(t))
    }

    pub(crate) fn eval(&self, t: f64) -> WeightVector {
        interpolate(
            &self.times,
            t,
            |k| self.values[k].clone(),
            |a, b, s| a.lerp(&b, s),
        )
    }

    /// Evaluates at a non-decreasing list of times.
    pub fn evaluate_sorted(&self, times: &[f64]) -> Vec<WeightVector> {
        let mut k = 0;
        let last = self.times.len() - 1;
        times
            .iter()
            .map(|&t| {
                while k < last && self.times[k + 1] <= t {
                    k += 1;
                }
                if k == last || t <= self.times[k] {
                    self.values[k].clone()
                } else {
                    let s = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
                    self.values[k].lerp(&self.values[k + 1], s)
                }
            })
            .collect()
    }

    /// `⟨η(t_k), α_i^∨⟩` at every breakpoint.
    pub fn pairing_series(&self, rs: &RootSystem, i: usize) -> Vec<f64> {
        self.values.iter().map(|v| rs.pair(v, i)).collect()
    }

    /// Multiplies the values by `c` (time axis unchanged).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// The path projected to the quotient by `Rδ`.
    pub fn quotient(&self) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(WeightVector::quotient).collect(),
        }
    }

    /// Restriction to `[0, horizon]`.
    pub fn truncated(&self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || horizon > self.horizon() {
            return Err(Error::TimeOutOfDomain {
                t: horizon,
                horizon: self.horizon(),
            });
        }
        let k = self.times.partition_point(|&t| t < horizon);
        let mut times = self.times[..k].to_vec();
        let mut values = self.values[..k].to_vec();
        times.push(horizon);
        values.push(self.eval(horizon));
        Ok(Self { times, values })
    }

    /// Drops breakpoints at which the path does not bend (within `tol`).
    pub fn simplified(&self, tol: f64) -> Self {
        if self.len() <= 2 {
            return self.clone();
        }
        let mut times = vec![self.times[0]];
        let mut values = vec![self.values[0].clone()];
        for k in 1..self.len() - 1 {
            let (ta, va) = (*times.last().unwrap(), values.last().unwrap());
            let s = (self.times[k] - ta) / (self.times[k + 1] - ta);
            let predicted = va.lerp(&self.values[k + 1], s);
            if predicted.max_abs_diff(&self.values[k]) > tol {
                times.push(self.times[k]);
                values.push(self.values[k].clone());
            }
        }
        times.push(self.horizon());
        values.push(self.endpoint().clone());
        Self { times, values }
    }

    /// Breakpoint CSV: `t, level, finite_1..finite_n, delta`.
    pub fn to_csv(&self) -> String {
        let n = self.rank();
        let mut out = String::from("t,level");
        for j in 1..=n {
            let _ = write!(out, ",finite_{j}");
        }
        out.push_str(",delta\n");
        for (t, v) in self.breakpoints() {
            let _ = write!(out, "{t}");
            for c in v.coordinates() {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the breakpoint CSV written by [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidPath("empty CSV".into()))?;
        let cols = header.split(',').count();
        if cols < 4 {
            return Err(Error::InvalidPath(format!("bad header `{header}`")));
        }
        let n = cols - 3;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let nums: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let nums = nums.map_err(|e| Error::InvalidPath(format!("`{line}`: {e}")))?;
            if nums.len() != cols {
                return Err(Error::InvalidPath(format!("`{line}`: wrong column count")));
            }
            times.push(nums[0]);
            values.push(WeightVector::new(nums[1], &nums[2..2 + n], nums[cols - 1]));
        }
        Self::new(times, values)
    }

    /// Grid CSV for plotting: `t, ⟨·,α_0^∨⟩, …, ⟨·,α_n^∨⟩` on `points` equally
    /// spaced times.
    pub fn to_pairing_grid_csv(&self, rs: &RootSystem, points: usize) -> String {
        let n = self.rank();
        let mut out = String::from("t");
        for i in 0..=n {
            let _ = write!(out, ",pair_{i}");
        }
        out.push('\n');
        let grid = uniform_grid(self.horizon(), points);
        for (t, v) in grid.iter().zip(self.evaluate_sorted(&grid)) {
            let _ = write!(out, "{t}");
            for i in 0..=n {
                let _ = write!(out, ",{}", rs.pair(&v, i));
            }
            out.push('\n');
        }
        out
    }
}

pub fn uniform_grid(horizon: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points)
        .map(|k| horizon * k as f64 / (points - 1) as f64)
        .collect()
}

/// Concatenates paths by the shifted-sum rule
/// `π(t) = η_1(T_1) + … + η_{k−1}(T_{k−1}) + η_k(t − T_1 − … − T_{k−1})`.
pub fn concatenate(paths: &[PiecewiseLinearPath]) -> Result<PiecewiseLinearPath> {
    let first = paths.first().ok_or(Error::EmptyPathList)?;
    let rank = first.rank();
    if let Some(p) = paths.iter().find(|p| p.rank() != rank) {
        return Err(Error::RankMismatch {
            left: rank,
            right: p.rank(),
        });
    }
    let total: usize = paths.iter().map(|p| p.len() - 1).sum();
    let mut times = Vec::with_capacity(total + 1);
    let mut values = Vec::with_capacity(total + 1);
    times.push(0.0);
    values.push(WeightVector::zero(rank));
    let mut offset_t = 0.0;
    let mut offset_v = WeightVector::zero(rank);
    for p in paths {
        for (t, v) in p.breakpoints().skip(1) {
            times.push(offset_t + t);
            values.push(&offset_v + v);
        }
        offset_t += p.horizon();
        offset_v += p.endpoint();
    }
    Ok(PiecewiseLinearPath { times, values })
}

/// Applies `η ↦ η + x(t)·direction` where `x(t) = −inf_{s≤t} ⟨η(s), α_i^∨⟩`.
/// Returns the transformed path and `x` on the output breakpoints.
pub fn running_infimum_transform(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    i: usize,
    direction: &WeightVector,
) -> (PiecewiseLinearPath, ScalarPwl) {
    let h = path.pairing_series(rs, i);
    let len = path.len();
    let mut times = Vec::with_capacity(len + 8);
    let mut values = Vec::with_capacity(len + 8);
    let mut xs = Vec::with_capacity(len + 8);
    let push = |times: &mut Vec<f64>,
                values: &mut Vec<WeightVector>,
                xs: &mut Vec<f64>,
                t: f64,
                v: WeightVector,
                x: f64| {
        let mut out = v;
        if x != 0.0 {
            out.axpy(x, direction);
        }
        times.push(t);
        values.push(out);
        xs.push(x);
    };
    let mut m = h[0].min(0.0);
    push(
        &mut times,
        &mut values,
        &mut xs,
        path.times[0],
        path.values[0].clone(),
        -m,
    );
    for k in 0..len - 1 {
        let (ha, hb) = (h[k], h[k + 1]);
        if hb < m {
            if ha > m {
                let s = (ha - m) / (ha - hb);
                if s > SPLIT_EPS && s < 1.0 - SPLIT_EPS {
                    let (t0, t1) = (path.times[k], path.times[k + 1]);
                    let tau = t0 + s * (t1 - t0);
                    let v = path.values[k].lerp(&path.values[k + 1], s);
                    push(&mut times, &mut values, &mut xs, tau, v, -m);
                }
            }
            m = hb;
        }
        push(
            &mut times,
            &mut values,
            &mut xs,
            path.times[k + 1],
            path.values[k + 1].clone(),
            -m,
        );
    }
    (
        PiecewiseLinearPath {
            times: times.clone(),
            values,
        },
        ScalarPwl { times, values: xs },
    )
}

/// Minimum of `⟨η(t), α_i^∨⟩` over the whole path (at most 0).
pub fn path_infimum(rs: &RootSystem, path: &PiecewiseLinearPath, i: usize) -> f64 {
    path.values
        .iter()
        .map(|v| rs.pair(v, i))
        .fold(0.0f64, f64::min)
}

/// Pitman transform `P_{α_i} η(t) = η(t) − inf_{s≤t}⟨η(s), α_i^∨⟩ α_i`.
pub fn pitman(rs: &RootSystem, path: &PiecewiseLinearPath, i: usize) -> PiecewiseLinearPath {
    running_infimum_transform(rs, path, i, &rs.alpha(i)).0
}

/// Lévy-type transform of rank 2:
/// `L_i η(t) = η(t) − ⅓ inf_{s≤t}⟨η(s), α_i^∨⟩ (α_i − α_{i+2})`, indices mod 3.
pub fn levy_a2(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    i: usize,
) -> Result<PiecewiseLinearPath> {
    if rs.rank() != 2 {
        return Err(Error::WrongRank {
            expected: 2,
            actual: rs.rank(),
        });
    }
    if i > 2 {
        return Err(Error::IndexOutOfRange { index: i, rank: 2 });
    }
    Ok(running_infimum_transform(rs, path, i, &levy_a2_direction(rs, i)).0)
}

/// `(α_i − α_{i+2}) / 3` for rank 2.
pub fn levy_a2_direction(rs: &RootSystem, i: usize) -> WeightVector {
    (rs.alpha(i) - rs.alpha((i + 2) % 3)) * (1.0 / 3.0)
}

/// Finitely many recorded string coordinates along a direction sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct StringSequence {
    pub directions: DirectionSequence,
    pub values: Vec<f64>,
}

impl StringSequence {
    pub fn zeros(directions: DirectionSequence, len: usize) -> Self {
        Self {
            directions,
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinate `k`, zero past the recorded range.
    pub fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// Rounds to integers if every coordinate is within `tol` of one.
    pub fn to_integers(&self, tol: f64) -> Option<Vec<i64>> {
        self.values
            .iter()
            .map(|&a| {
                let r = a.round();
                ((a - r).abs() <= tol).then_some(r as i64)
            })
            .collect()
    }

    /// Drops trailing zeros (within `tol`).
    pub fn trimmed(&self, tol: f64) -> Self {
        let mut values = self.values.clone();
        while values.last().is_some_and(|v| v.abs() <= tol) {
            values.pop();
        }
        Self {
            directions: self.directions.clone(),
            values,
        }
    }
}

/// One stage `P_{i_k} ∘ … ∘ P_{i_0} η` of a Pitman cascade together with the
/// string function `x_k`.
#[derive(Clone, Debug)]
pub struct CascadeStage {
    pub index: usize,
    pub path: PiecewiseLinearPath,
    pub string_fn: ScalarPwl,
}

/// Stages `0..=depth` of the Pitman cascade along `seq`.
pub fn cascade_stages(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
    depth: usize,
) -> Vec<CascadeStage> {
    let mut stages: Vec<CascadeStage> = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let prev = stages.last().map_or(path, |s| &s.path);
        let i = seq.index(k);
        let (next, x) = running_infimum_transform(rs, prev, i, &rs.alpha(i));
        stages.push(CascadeStage {
            index: i,
            path: next,
            string_fn: x,
        });
    }
    stages
}

/// `P_{i_k} ∘ … ∘ P_{i_0} η`.
pub fn pitman_cascade(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
    k: usize,
) -> PiecewiseLinearPath {
    let mut cur = path.clone();
    for j in 0..=k {
        cur = pitman(rs, &cur, seq.index(j));
    }
    cur
}

/// String coordinates `(a_0, …, a_p)` with
/// `P_{i_m}…P_{i_0} η(T) = η(T) + Σ_{k≤m} a_k α_{i_k}`.
pub fn string_coordinates(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
    depth: usize,
) -> StringSequence {
    let mut cur = path.clone();
    let mut values = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let i = seq.index(k);
        let (next, x) = running_infimum_transform(rs, &cur, i, &rs.alpha(i));
        values.push(x.last());
        cur = next;
    }
    StringSequence {
        directions: seq.clone(),
        values,
    }
}

/// String functions `t ↦ x_k(t)` for `k = 0..=depth`.
pub fn string_functions(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
    depth: usize,
) -> Vec<ScalarPwl> {
    cascade_stages(rs, path, seq, depth)
        .into_iter()
        .map(|s| s.string_fn)
        .collect()
}

/// Which sign convention the corrected cascade uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CorrectionOrientation {
    /// `P_{i_{p−1}}…P_{i_0} η + x_p (u − Σ_{k<p} α_{i_k})`, consistent with the
    /// string identity and with the rank-2 operators `L_i`.
    #[default]
    Cascade,
    /// `η − Σ_{k<p} x_k α_{i_k} − x_p (u − Σ_{k<p} α_{i_k})`, the opposite sign.
    Reversed,
}

/// Pitman cascade through depth `p − 1` followed by the correction step along
/// `u − Σ_{k<p} α_{i_k}` driven by the running infimum in direction `i_p`.
pub fn corrected_cascade(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
    u: &WeightVector,
    p: usize,
    orientation: CorrectionOrientation,
) -> PiecewiseLinearPath {
    let stages = if p == 0 {
        Vec::new()
    } else {
        cascade_stages(rs, path, seq, p - 1)
    };
    let base = stages.last().map_or(path, |s| &s.path);
    let direction = u - &rs.partial_root_sum(seq, p);
    let (corrected, x_last) = running_infimum_transform(rs, base, seq.index(p), &direction);
    match orientation {
        CorrectionOrientation::Cascade => corrected,
        CorrectionOrientation::Reversed => {
            let grid = x_last.times.clone();
            let mut values = path.evaluate_sorted(&grid);
            for stage in &stages {
                let alpha = rs.alpha(stage.index);
                for (v, t) in values.iter_mut().zip(&grid) {
                    v.axpy(-stage.string_fn.evaluate(*t), &alpha);
                }
            }
            for (v, x) in values.iter_mut().zip(&x_last.values) {
                v.axpy(-x, &direction);
            }
            PiecewiseLinearPath::from_parts_unchecked(grid, values)
        }
    }
}

/// Successive corrected cascades for `p = 0..=depth`, sharing the Pitman
/// stages.
pub fn corrected_cascades(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
    u: &WeightVector,
    depth: usize,
) -> (Vec<PiecewiseLinearPath>, Vec<PiecewiseLinearPath>) {
    let stages = cascade_stages(rs, path, seq, depth);
    let mut corrected = Vec::with_capacity(depth + 1);
    for p in 0..=depth {
        let base = if p == 0 { path } else { &stages[p - 1].path };
        let direction = u - &rs.partial_root_sum(seq, p);
        corrected.push(running_infimum_transform(rs, base, seq.index(p), &direction).0);
    }
    (stages.into_iter().map(|s| s.path).collect(), corrected)
}

/// Limit of the Pitman cascade on `[0, horizon]`, reached when a full sweep
/// leaves the path unchanged.
///
/// Sweeps apply `P_{i_0}, …, P_{i_{L−1}}` for one period `L` of `seq`.
pub fn dominant_projection(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    seq: &DirectionSequence,
    horizon: f64,
    max_sweeps: usize,
) -> Result<(PiecewiseLinearPath, usize)> {
    let mut cur = if horizon < path.horizon() {
        path.truncated(horizon)?
    } else {
        path.clone()
    };
    for sweep in 1..=max_sweeps {
        let mut changed = false;
        for &i in seq.pattern() {
            if path_infimum(rs, &cur, i) < -STABLE_TOL {
                cur = pitman(rs, &cur, i);
                changed = true;
            }
        }
        if !changed {
            return Ok((cur, sweep));
        }
    }
    Err(Error::NonStabilization {
        sweeps: max_sweeps,
        last: Box::new(cur),
    })
}

/// All pairings are `≥ −tol` at every breakpoint (hence everywhere).
pub fn is_dominant(rs: &RootSystem, path: &PiecewiseLinearPath, tol: f64) -> bool {
    path.values
        .iter()
        .all(|v| (0..=rs.rank()).all(|i| rs.pair(v, i) >= -tol))
}

/// Endpoint integral and every pairing minimum an integer, within `tol`.
pub fn is_integral(rs: &RootSystem, path: &PiecewiseLinearPath, tol: f64) -> bool {
    let near_int = |x: f64| (x - x.round()).abs() <= tol;
    (0..=rs.rank())
        .all(|i| near_int(rs.pair(path.endpoint(), i)) && near_int(path_infimum(rs, path, i)))
}

/// `sup_t max_i |⟨a(t) − b(t), α_i^∨⟩|` over the union of both breakpoint sets.
pub fn sup_pairing_distance(
    rs: &RootSystem,
    a: &PiecewiseLinearPath,
    b: &PiecewiseLinearPath,
) -> f64 {
    let grid = merged_times(a.times(), b.times());
    let va = a.evaluate_sorted(&grid);
    let vb = b.evaluate_sorted(&grid);
    va.iter()
        .zip(&vb)
        .map(|(x, y)| {
            let d = x - y;
            (0..=rs.rank())
                .map(|i| rs.pair(&d, i).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// `sup_t` of the coordinate-wise distance in the quotient by `Rδ`.
pub fn sup_quotient_distance(a: &PiecewiseLinearPath, b: &PiecewiseLinearPath) -> f64 {
    let grid = merged_times(a.times(), b.times());
    let va = a.evaluate_sorted(&grid);
    let vb = b.evaluate_sorted(&grid);
    va.iter()
        .zip(&vb)
        .map(|(x, y)| x.quotient().max_abs_diff(&y.quotient()))
        .fold(0.0, f64::max)
}

pub(crate) fn merged_times(a: &[f64], b: &[f64]) -> Vec<f64> {
    let horizon = a
        .last()
        .copied()
        .unwrap_or(0.0)
        .min(b.last().copied().unwrap_or(0.0));
    let mut out: Vec<f64> = a
        .iter()
        .chain(b.iter())
        .copied()
        .filter(|&t| t <= horizon)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rs1() -> RootSystem {
        RootSystem::new(1).unwrap()
    }

    /// `t(Λ0 − α_1)` on [0, 1].
    fn descending(rs: &RootSystem) -> PiecewiseLinearPath {
        PiecewiseLinearPath::straight(&(rs.lambda0() - rs.alpha(1)), 1.0)
    }

    #[test]
    fn evaluate_straight_and_bounds() {
        let rs = rs1();
        let p = PiecewiseLinearPath::straight(&rs.lambda0(), 1.0);
        assert_eq!(p.evaluate(0.5).unwrap(), rs.lambda0() * 0.5);
        assert_eq!(p.evaluate(0.0).unwrap(), rs.zero());
        assert!(matches!(
            p.evaluate(1.5),
            Err(Error::TimeOutOfDomain { .. })
        ));
        assert!(matches!(
            p.evaluate(-0.1),
            Err(Error::TimeOutOfDomain { .. })
        ));
    }

    #[test]
    fn evaluate_midpoint_of_two_segments() {
        let rs = rs1();
        let a = rs.lambda0() + rs.alpha(1);
        let b = rs.lambda0() * 2.0 - rs.alpha(1);
        let p =
            PiecewiseLinearPath::new(vec![0.0, 1.0, 3.0], vec![rs.zero(), a.clone(), b.clone()])
                .unwrap();
        assert_eq!(p.evaluate(2.0).unwrap(), a.lerp(&b, 0.5));
    }

    #[test]
    fn new_rejects_bad_paths() {
        let rs = rs1();
        assert!(PiecewiseLinearPath::new(vec![0.0, 0.0], vec![rs.zero(), rs.lambda0()]).is_err());
        assert!(PiecewiseLinearPath::new(vec![0.1, 1.0], vec![rs.zero(), rs.lambda0()]).is_err());
        assert!(
            PiecewiseLinearPath::new(vec![0.0, 1.0], vec![rs.lambda0(), rs.lambda0()]).is_err()
        );
    }

    #[test]
    fn concatenate_follows_shifted_sum() {
        let rs = rs1();
        let line = PiecewiseLinearPath::straight(&rs.lambda0(), 1.0);
        let joined = concatenate(&[line.clone(), line.clone()]).unwrap();
        assert_eq!(joined.evaluate(1.5).unwrap(), rs.lambda0() * 1.5);
        assert_eq!(concatenate(std::slice::from_ref(&line)).unwrap(), line);
        let eta2 = descending(&rs);
        let joined = concatenate(&[line.clone(), eta2.clone()]).unwrap();
        assert_eq!(
            joined.evaluate(2.0).unwrap(),
            line.endpoint() + eta2.endpoint()
        );
        assert!(matches!(concatenate(&[]), Err(Error::EmptyPathList)));
    }

    #[test]
    fn pitman_fixes_dominant_paths() {
        let rs = rs1();
        let p = PiecewiseLinearPath::straight(&rs.lambda0(), 1.0);
        for i in 0..=1 {
            assert_eq!(pitman(&rs, &p, i), p);
        }
    }

    #[test]
    fn pitman_reflects_descending_line() {
        let rs = rs1();
        let out = pitman(&rs, &descending(&rs), 1);
        let expected = PiecewiseLinearPath::straight(&(rs.lambda0() + rs.alpha(1)), 1.0);
        assert!(out.endpoint().max_abs_diff(expected.endpoint()) < 1e-15);
        assert!(
            out.evaluate(0.3)
                .unwrap()
                .max_abs_diff(&expected.evaluate(0.3).unwrap())
                < 1e-15
        );
    }

    #[test]
    fn pitman_inserts_crossing_breakpoint() {
        let rs = rs1();
        // h_1 goes 0 → 2 → −2: crosses its running minimum 0 at t = 1.5.
        let up = rs.lambda0() + rs.alpha(1);
        let down = rs.lambda0() * 2.0 - rs.alpha(1);
        let p = PiecewiseLinearPath::new(vec![0.0, 1.0, 2.0], vec![rs.zero(), up, down]).unwrap();
        let (out, x) = running_infimum_transform(&rs, &p, 1, &rs.alpha(1));
        assert_eq!(out.times(), &[0.0, 1.0, 1.5, 2.0]);
        assert_eq!(x.values, vec![0.0, 0.0, 0.0, 2.0]);
        assert_abs_diff_eq!(rs.pair(out.endpoint(), 1), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn pitman_is_idempotent_on_example() {
        let rs = rs1();
        let once = pitman(&rs, &descending(&rs), 1);
        let twice = pitman(&rs, &once, 1);
        assert!(sup_quotient_distance(&once, &twice) == 0.0);
    }

    #[test]
    fn string_coordinates_example() {
        let rs = rs1();
        let seq = DirectionSequence::periodic(1, vec![1, 0]).unwrap();
        let a = string_coordinates(&rs, &descending(&rs), &seq, 3);
        assert_eq!(a.to_integers(1e-12).unwrap(), vec![2, 1, 0, 0]);
        let fns = string_functions(&rs, &descending(&rs), &seq, 3);
        for (k, x) in fns.iter().enumerate() {
            assert_eq!(x.evaluate(0.0), 0.0);
            assert!(x.is_nondecreasing(0.0));
            assert_eq!(x.last(), a.values[k]);
        }
    }

    #[test]
    fn dominant_projection_example() {
        let rs = rs1();
        let seq = DirectionSequence::periodic(1, vec![1, 0]).unwrap();
        let (out, _) = dominant_projection(&rs, &descending(&rs), &seq, 1.0, 100).unwrap();
        let expected = rs.lambda0() + rs.delta();
        assert!(out.endpoint().max_abs_diff(&expected) < 1e-12);
        assert!(out.endpoint().quotient().max_abs_diff(&rs.lambda0()) < 1e-12);
        assert!(is_dominant(&rs, &out, PREDICATE_TOL));
    }

    #[test]
    fn dominant_projection_reports_non_stabilization() {
        let rs = rs1();
        let steep = rs.lambda0() - rs.alpha(1) * 40.0;
        let p = PiecewiseLinearPath::straight(&steep, 1.0);
        let err = dominant_projection(&rs, &p, &DirectionSequence::cyclic(1), 1.0, 3).unwrap_err();
        assert!(matches!(err, Error::NonStabilization { sweeps: 3, .. }));
    }

    #[test]
    fn predicates() {
        let rs = rs1();
        let l0 = PiecewiseLinearPath::straight(&rs.lambda0(), 1.0);
        assert!(is_dominant(&rs, &l0, PREDICATE_TOL));
        assert!(is_integral(&rs, &l0, PREDICATE_TOL));
        let eta = descending(&rs);
        assert!(!is_dominant(&rs, &eta, PREDICATE_TOL));
        assert!(is_integral(&rs, &eta, PREDICATE_TOL));
        // Half of t(Λ0 − 3α_1): minimum of ⟨·,α_1^∨⟩ is −3, halved −1.5.
        let half =
            PiecewiseLinearPath::straight(&(rs.lambda0() - rs.alpha(1) * 3.0), 1.0).scaled(0.5);
        assert!(!is_integral(&rs, &half, PREDICATE_TOL));
    }

    #[test]
    fn levy_requires_rank_two() {
        let rs = rs1();
        let p = PiecewiseLinearPath::straight(&rs.lambda0(), 1.0);
        assert!(matches!(levy_a2(&rs, &p, 0), Err(Error::WrongRank { .. })));
    }

    #[test]
    fn levy_adds_third_of_infimum() {
        let rs = RootSystem::new(2).unwrap();
        // ⟨Λ0 − α_0, α_0^∨⟩ = −1, so the running infimum at t is −t.
        let p = PiecewiseLinearPath::straight(&(rs.lambda0() - rs.alpha(0)), 1.0);
        let out = levy_a2(&rs, &p, 0).unwrap();
        let mut expected = p.endpoint().clone();
        expected.axpy(1.0 / 3.0, &(rs.alpha(0) - rs.alpha(2)));
        assert!(out.endpoint().max_abs_diff(&expected) < 1e-15);
        let dominant = PiecewiseLinearPath::straight(&rs.lambda0(), 1.0);
        assert_eq!(levy_a2(&rs, &dominant, 1).unwrap(), dominant);
    }

    #[test]
    fn levy_direction_one_modulo_delta() {
        let rs = RootSystem::new(2).unwrap();
        let d = levy_a2_direction(&rs, 1).quotient();
        let expected = ((rs.alpha(0) * -2.0 - rs.alpha(2)) * (1.0 / 3.0)).quotient();
        assert!(d.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn corrected_directions_match_levy() {
        let rs = RootSystem::new(2).unwrap();
        let seq = DirectionSequence::cyclic(2);
        let u = rs.correction_vector(&seq).unwrap();
        for p in 0..6 {
            let dir = (&u - &rs.partial_root_sum(&seq, p)).quotient();
            let levy = levy_a2_direction(&rs, seq.index(p)).quotient();
            assert!(dir.max_abs_diff(&levy) < 1e-12, "p={p}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let rs = RootSystem::new(2).unwrap();
        let p = PiecewiseLinearPath::new(
            vec![0.0, 0.5, 1.25],
            vec![
                rs.zero(),
                rs.lambda0() * 0.5 - rs.alpha(2) * 0.25,
                rs.alpha(0) * 1.5,
            ],
        )
        .unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("t,level,finite_1,finite_2,delta\n"));
        assert_eq!(PiecewiseLinearPath::from_csv(&csv).unwrap(), p);
        let grid = p.to_pairing_grid_csv(&rs, 3);
        assert_eq!(grid.lines().next().unwrap(), "t,pair_0,pair_1,pair_2");
        assert_eq!(grid.lines().count(), 4);
    }

    #[test]
    fn truncation_and_simplification() {
        let rs = rs1();
        let p = concatenate(&[
            PiecewiseLinearPath::straight(&rs.lambda0(), 1.0),
            PiecewiseLinearPath::straight(&rs.lambda0(), 1.0),
        ])
        .unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.simplified(1e-12).len(), 2);
        let t = p.truncated(1.5).unwrap();
        assert_eq!(t.horizon(), 1.5);
        assert_eq!(t.endpoint(), &(rs.lambda0() * 1.5));
    }
}
