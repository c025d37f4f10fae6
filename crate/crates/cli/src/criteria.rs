//! The eleven thresholded acceptance criteria plus the report-only probes
//! that accompany them. Every function is deterministic in its arguments.

use std::collections::HashSet;

use alcove_core::crystal::{
    adapted_string_full, cutoff_for_tail, in_b_lambda, pitman_string_full, ConeForm,
    LimitOmegaSampler, VermaOmegaSampler,
};
use alcove_core::harmonic::{default_m_cut, wall_approach_point};
use alcove_core::path::{corrected_cascades, path_infimum, sup_pairing_distance, PREDICATE_TOL};
use alcove_core::sampling::{
    conditional_laplace_exact, conditional_laplace_formula, sample_brownian,
    sample_drifted_infimum, sample_string_at_infinity, LatticeEndpointLaw, StringStepLaw,
};
use alcove_core::stats::{ks_critical_two_sample, ks_two_sample, linear_fit, MeanEstimate};
use alcove_core::{
    dominant_projection, enumerate_module, harmonicity_residual, is_dominant, pitman,
    pitman_cascade, string_coordinates, DirectionSequence, HarmonicPsi, ModuleCatalog,
    PiecewiseLinearPath, RngStream, RootKind, RootSystem, WeightVector,
};
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use crate::report::{overall, Check, Status};
use crate::CliError;

/// Level of the KS tests.
pub const KS_ALPHA: f64 = 0.01;
/// Monte Carlo assertions are at this many standard errors.
pub const SIGMA_LEVEL: f64 = 3.0;
/// `(n, s)`: catalogs of `B(Λ0)` with drift `s·ν̂_bary` at `m = 1`.
pub const CATALOG_SHAPES: [(usize, f64); 2] = [(1, 2.0), (2, 4.0)];
/// Catalog tail-mass tolerance.
pub const CATALOG_TAIL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    pub fn status(&self) -> Status {
        overall(&self.checks)
    }

    /// One-line summary: status, title and the offending checks if any.
    pub fn line(&self) -> String {
        let status = self.status();
        let mut line = format!("criterion {:>2}: {} {}", self.id, status, self.title);
        let bad: Vec<String> = self
            .checks
            .iter()
            .filter(|c| matches!(c.status, Status::Fail | Status::Error))
            .map(|c| match (c.value, &c.threshold) {
                (Some(v), Some(t)) => format!("{} = {v:.4e} (need {t})", c.name),
                _ => format!("{}: {}", c.name, c.detail),
            })
            .collect();
        if bad.is_empty() {
            line.push_str(&format!(" [{} checks]", self.checks.len()));
        } else {
            line.push_str(&format!(" [failing: {}]", bad.join("; ")));
        }
        line
    }
}

fn guarded(
    id: usize,
    title: &'static str,
    body: impl FnOnce(&mut Vec<Check>) -> Result<(), CliError>,
) -> CriterionResult {
    let mut checks = Vec::new();
    if let Err(e) = body(&mut checks) {
        checks.push(Check::error("internal", e));
    }
    CriterionResult { id, title, checks }
}

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn mean_z_check(name: String, samples: &[f64], target: f64) -> Check {
    let est = MeanEstimate::from_samples(samples);
    let z = est.z_score(target);
    Check::gate(name, z, format!("<= {SIGMA_LEVEL} sigma"), z <= SIGMA_LEVEL).with_detail(format!(
        "mean {:.6} +- {:.2e}, limit {:.6}",
        est.mean, est.std_err, target
    ))
}

// 1 ---------------------------------------------------------------------

pub fn algebra(max_rank: usize) -> CriterionResult {
    guarded(1, "algebra exactness", |checks| {
        for n in 1..=max_rank {
            let rs = RootSystem::new(n)?;
            let (delta, l0) = (rs.delta(), rs.lambda0());
            let c = rs.cartan();
            let mut bad = 0usize;
            let mut flag = |ok: bool| bad += usize::from(!ok);
            let mut sum = rs.zero();
            for i in 0..=n {
                sum += &rs.alpha(i);
                flag(c[i][i] == 2);
                flag((0..=n).map(|j| c[j][i]).sum::<i64>() == 0);
                flag(rs.pair(&delta, i) == 0.0);
                flag(rs.pair(&l0, i) == f64::from(u8::from(i == 0)));
                flag(rs.form(&delta, &rs.alpha(i)) == 0.0);
                for j in 0..=n {
                    flag(c[i][j] == c[j][i]);
                    flag(rs.form(&rs.alpha(i), &rs.alpha(j)) == c[i][j] as f64);
                    flag(rs.pair(&rs.alpha(j), i) == c[j][i] as f64);
                }
            }
            flag(sum == delta);
            flag(rs.form(&delta, &delta) == 0.0);
            flag(rs.form(&l0, &l0) == 0.0);
            flag(rs.form(&l0, &delta) == 1.0);
            let k = 3;
            let roots = rs.positive_roots(k);
            let mut real = 0;
            let mut imaginary = 0;
            for r in &roots {
                let norm = rs.form(&r.vector, &r.vector);
                match r.kind {
                    RootKind::Real { .. } => {
                        real += 1;
                        flag(norm == 2.0);
                    }
                    RootKind::Imaginary { multiplicity, .. } => {
                        imaginary += multiplicity;
                        flag(norm == 0.0);
                    }
                }
            }
            flag(real == n * (n + 1) / 2 * (1 + 2 * k));
            flag(imaginary == n * k);
            checks.push(Check::gate(
                format!("rank {n} invariants"),
                bad as f64,
                "= 0 violations",
                bad == 0,
            ));
        }
        Ok(())
    })
}

// 2 ---------------------------------------------------------------------

pub fn correction_vector() -> CriterionResult {
    guarded(2, "correction vector", |checks| {
        for n in [1usize, 2] {
            let rs = RootSystem::new(n)?;
            let seq = DirectionSequence::cyclic(n);
            let u = rs.correction_vector(&seq)?;
            let expected = if n == 1 {
                rs.alpha(0) * 0.5
            } else {
                (rs.alpha(0) - rs.alpha(2)) * (1.0 / 3.0)
            };
            let err = u.quotient().max_abs_diff(&expected.quotient());
            let residual = max_abs(rs.correction_residuals(&seq, &u, 3 * (n + 1)));
            let worst = err.max(residual);
            checks.push(
                Check::gate(format!("rank {n}"), worst, "<= 1e-12", worst <= 1e-12)
                    .with_detail(format!("u = {:?}, residual {residual:.1e}", &u.finite[..])),
            );
        }
        Ok(())
    })
}

// 3 ---------------------------------------------------------------------

/// Space-time polyline: level equals time, finite part a random walk with
/// up to eight segments.
pub fn random_polyline<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PiecewiseLinearPath {
    let segments = rng.random_range(1..=8);
    let mut t = 0.0;
    let mut x = vec![0.0; n];
    let mut times = vec![0.0];
    let mut values = vec![WeightVector::zero(n)];
    for _ in 0..segments {
        t += rng.random_range(0.05..1.0);
        for c in x.iter_mut() {
            *c += rng.random_range(-1.5..1.5);
        }
        times.push(t);
        values.push(WeightVector::new(t, &x, 0.0));
    }
    PiecewiseLinearPath::new(times, values).expect("increasing times")
}

/// Cyclic, reversed, and up-then-down sweep orders.
pub fn sweep_orders(n: usize) -> Result<Vec<DirectionSequence>, CliError> {
    let up: Vec<usize> = (0..=n).collect();
    let down: Vec<usize> = up.iter().rev().copied().collect();
    let both: Vec<usize> = up.iter().chain(&down).copied().collect();
    Ok(vec![
        DirectionSequence::cyclic(n),
        DirectionSequence::periodic(n, down)?,
        DirectionSequence::periodic(n, both)?,
    ])
}

pub fn pitman_algebra(paths: usize, seed: u64) -> CriterionResult {
    guarded(3, "Pitman algebra", |checks| {
        let mut rng = RngStream::new(seed, 3).rng();
        let (mut idem, mut bookkeeping, mut order) = (0.0f64, 0.0f64, 0.0f64);
        let mut not_dominant = 0usize;
        for k in 0..paths {
            let n = 1 + k % 3;
            let rs = RootSystem::new(n)?;
            let path = random_polyline(n, &mut rng);
            for i in 0..=n {
                let once = pitman(&rs, &path, i);
                let twice = pitman(&rs, &once, i);
                idem = idem
                    .max(sup_pairing_distance(&rs, &once, &twice))
                    .max(-path_infimum(&rs, &once, i));
            }
            let seq = DirectionSequence::cyclic(n);
            let depth = 2 * (n + 1);
            let a = string_coordinates(&rs, &path, &seq, depth);
            let out = pitman_cascade(&rs, &path, &seq, depth);
            let mut expected = path.endpoint().clone();
            for j in 0..=depth {
                expected.axpy(a.get(j), &rs.alpha(seq.index(j)));
            }
            bookkeeping = bookkeeping.max(out.endpoint().max_abs_diff(&expected));
            let mut projections = Vec::new();
            for s in sweep_orders(n)? {
                let (p, _) = dominant_projection(&rs, &path, &s, path.horizon(), 10_000)?;
                not_dominant += usize::from(!is_dominant(&rs, &p, PREDICATE_TOL));
                projections.push(p);
            }
            for p in &projections[1..] {
                order = order.max(sup_pairing_distance(&rs, &projections[0], p));
            }
        }
        checks.push(Check::gate("idempotence", idem, "<= 1e-9", idem <= 1e-9));
        checks.push(Check::gate(
            "endpoint bookkeeping",
            bookkeeping,
            "<= 1e-9",
            bookkeeping <= 1e-9,
        ));
        checks.push(
            Check::gate(
                "projection order independence",
                order,
                "<= 1e-9 and dominant",
                order <= 1e-9 && not_dominant == 0,
            )
            .with_detail(format!(
                "{paths} paths, {not_dominant} non-dominant projections"
            )),
        );
        Ok(())
    })
}

// 4 ---------------------------------------------------------------------

/// Catalog of `B(Λ0)` for drift `scale·ν̂_bary`, with the cutoff chosen so the
/// tail mass at `m = 1` is below [`CATALOG_TAIL`] unless `e_max` is given.
pub fn build_catalog(
    n: usize,
    scale: f64,
    e_max: Option<f64>,
) -> Result<(RootSystem, ModuleCatalog), CliError> {
    let rs = RootSystem::new(n)?;
    let nu_hat = rs.barycentric_drift() * scale;
    let e_max = match e_max {
        Some(e) => e,
        None => cutoff_for_tail(&rs, &nu_hat, 1.0, CATALOG_TAIL)?,
    };
    let generator = PiecewiseLinearPath::straight(&rs.lambda0(), 1.0);
    let cat = enumerate_module(
        &rs,
        &generator,
        &DirectionSequence::cyclic(n),
        &nu_hat,
        e_max,
    )?;
    Ok((rs, cat))
}

/// Dominant weights other than `Λ0` used for the cross checks: `2Λ0`, `Λ_1`,
/// `Λ_n` and `Λ0 + Λ_1`.
pub fn cross_weights(rs: &RootSystem) -> Vec<WeightVector> {
    let n = rs.rank();
    let fund = rs.fundamental_weights();
    let lam = |i: usize| rs.lambda0() + rs.finite(&fund[i - 1]);
    let mut out = vec![rs.lambda0() * 2.0, lam(1)];
    if n > 1 {
        out.push(lam(n));
    }
    out.push(rs.lambda0() + lam(1));
    out
}

#[derive(Clone, Debug, Default)]
pub struct CatalogAudit {
    pub vertices: usize,
    pub tail_bound: f64,
    pub string_mismatches: usize,
    pub duplicates: usize,
    pub own_weight_disagreements: usize,
    pub suffix_complement_disagreements: usize,
    pub halfstep_disagreements: usize,
}

pub fn audit_catalog(rs: &RootSystem, cat: &ModuleCatalog) -> Result<CatalogAudit, CliError> {
    let seq = &cat.directions;
    let mut audit = CatalogAudit {
        vertices: cat.len(),
        tail_bound: cat.truncated_mass_bound(rs, 1.0)?,
        ..Default::default()
    };
    let others = cross_weights(rs);
    let mut seen = HashSet::new();
    for v in &cat.vertices {
        let adapted = adapted_string_full(rs, &v.path, seq)?;
        let pitman = pitman_string_full(rs, &v.path, seq)?;
        audit.string_mismatches += usize::from(adapted != pitman || adapted != v.string);
        audit.duplicates += usize::from(!seen.insert(v.string.clone()));
        let a = cat.string_sequence(v);
        let own = ConeForm::ALL.map(|f| in_b_lambda(rs, &a, &cat.highest_weight, f));
        audit.own_weight_disagreements += usize::from(own != [true; 3]);
        for lambda in &others {
            let [s, c, h] = ConeForm::ALL.map(|f| in_b_lambda(rs, &a, lambda, f));
            audit.suffix_complement_disagreements += usize::from(s != c);
            audit.halfstep_disagreements += usize::from(h != s);
        }
    }
    Ok(audit)
}

pub fn audit_checks(n: usize, audit: &CatalogAudit) -> Vec<Check> {
    let exact = |name: &str, count: usize| {
        Check::gate(format!("rank {n} {name}"), count as f64, "= 0", count == 0)
    };
    vec![
        Check::gate(
            format!("rank {n} catalog tail mass"),
            audit.tail_bound,
            format!("< {CATALOG_TAIL:e}"),
            audit.tail_bound < CATALOG_TAIL,
        )
        .with_detail(format!("{} vertices", audit.vertices)),
        exact(
            "adapted vs Pitman string mismatches",
            audit.string_mismatches,
        ),
        exact("duplicate strings", audit.duplicates),
        exact(
            "cone forms at the highest weight",
            audit.own_weight_disagreements,
        ),
        exact(
            "suffix vs complement forms at other weights",
            audit.suffix_complement_disagreements,
        ),
        Check::report(
            format!("rank {n} half-step form disagreements at other weights"),
            audit.halfstep_disagreements as f64,
        )
        .with_detail("the half-step family has no p = 0 inequality"),
    ]
}

pub fn crystal_consistency() -> CriterionResult {
    guarded(4, "crystal consistency", |checks| {
        for (n, s) in CATALOG_SHAPES {
            let (rs, cat) = build_catalog(n, s, None)?;
            checks.extend(audit_checks(n, &audit_catalog(&rs, &cat)?));
        }
        Ok(())
    })
}

// 5 ---------------------------------------------------------------------

pub fn condlaw(ms: &[f64]) -> CriterionResult {
    guarded(5, "conditional Laplace transform", |checks| {
        let us = [Complex64::new(0.3, 0.0), Complex64::new(-0.2, 0.7)];
        for (n, s) in CATALOG_SHAPES {
            let (rs, cat) = build_catalog(n, s, None)?;
            for &m in ms {
                let mut worst = 0.0f64;
                let mut thin = Vec::new();
                for i in 0..=n {
                    let a = rs.form(&rs.alpha(i), &cat.nu_hat) / m;
                    let mut count = 0;
                    for r in 0..3 {
                        for &u in &us {
                            // for n = 1 the parity of r is fixed by i
                            let Some(exact) = conditional_laplace_exact(&rs, &cat, m, i, r, u)
                            else {
                                continue;
                            };
                            worst =
                                worst.max((exact - conditional_laplace_formula(a, r, u)).norm());
                            count += 1;
                        }
                    }
                    if count < 2 {
                        thin.push(i);
                    }
                }
                checks.push(
                    Check::gate(
                        format!("rank {n}, m = {m}"),
                        worst,
                        "<= 1e-8",
                        worst <= 1e-8 && thin.is_empty(),
                    )
                    .with_detail(format!("indices with fewer than 2 classes: {thin:?}")),
                );
            }
        }
        Ok(())
    })
}

// 6 ---------------------------------------------------------------------

pub fn convergence_lemmas(ranks: &[usize], ms: &[f64], draws: usize, seed: u64) -> CriterionResult {
    guarded(6, "Laplace limits of the increments", |checks| {
        for &n in ranks {
            let rs = RootSystem::new(n)?;
            let frame: Vec<WeightVector> = rs
                .orthonormal_frame()
                .iter()
                .map(|e| rs.finite(e))
                .collect();
            for &m in ms {
                let stream = RngStream::new(seed, 60 + n as u64).child(m.to_bits());
                let gamma = |g: &[i64]| rs.finite(&g.iter().map(|&c| c as f64).collect::<Vec<_>>());

                // walk Laplace transform at t = 1, x = 0.1 α_1
                let nu_hat = rs.barycentric_drift();
                let law = LatticeEndpointLaw::new(&rs, &nu_hat, m)?;
                let x = rs.alpha(1) * 0.1;
                let t = 1.0;
                let steps = (m * t).floor() as usize;
                let mut rng = stream.child(1).rng();
                let ys: Vec<f64> = (0..draws)
                    .map(|_| {
                        let mut s = rs.zero();
                        for _ in 0..steps {
                            s += &gamma(law.sample_gamma(&mut rng));
                        }
                        (rs.form(&x, &s) / m).exp()
                    })
                    .collect();
                let nu = rs.finite(&nu_hat.finite);
                let shifted = &x + &nu;
                let limit = (0.5 * t * (rs.form(&shifted, &shifted) - rs.form(&nu, &nu))).exp();
                checks.push(mean_z_check(
                    format!("rank {n}, m = {m}: walk Laplace"),
                    &ys,
                    limit,
                ));

                // single increment at scale sqrt(m), no drift, x = 0.5 α_1
                let law0 = LatticeEndpointLaw::new(&rs, &rs.lambda0(), m)?;
                let x = rs.alpha(1) * 0.5;
                let mut rng = stream.child(2).rng();
                let gs: Vec<WeightVector> = (0..draws)
                    .map(|_| gamma(law0.sample_gamma(&mut rng)) * (1.0 / m.sqrt()))
                    .collect();
                let ys: Vec<f64> = gs.iter().map(|g| rs.form(&x, g).exp()).collect();
                let limit = (0.5 * rs.form(&x, &x)).exp();
                checks.push(mean_z_check(
                    format!("rank {n}, m = {m}: increment Laplace"),
                    &ys,
                    limit,
                ));
                for (a, ea) in frame.iter().enumerate() {
                    for (b, eb) in frame.iter().enumerate().skip(a) {
                        let ys: Vec<f64> =
                            gs.iter().map(|g| rs.form(ea, g) * rs.form(eb, g)).collect();
                        let target = f64::from(u8::from(a == b));
                        checks.push(mean_z_check(
                            format!("rank {n}, m = {m}: increment moment ({a},{b})"),
                            &ys,
                            target,
                        ));
                    }
                }
            }
        }
        Ok(())
    })
}

// 7 ---------------------------------------------------------------------

pub fn weight_exponential_limit(
    ranks: &[usize],
    m: f64,
    k_cut: usize,
    samples: usize,
    seed: u64,
) -> CriterionResult {
    guarded(7, "rescaled geometric weight law", |checks| {
        for &n in ranks {
            let rs = RootSystem::new(n)?;
            let nu_hat = rs.barycentric_drift();
            let verma = VermaOmegaSampler::new(&rs, &nu_hat, m, k_cut)?;
            let limit = LimitOmegaSampler::new(&rs, &nu_hat, k_cut)?;
            let stream = RngStream::new(seed, 70 + n as u64);
            let mut rng_a = stream.child(1).rng();
            let mut rng_b = stream.child(2).rng();
            let mut a = vec![Vec::with_capacity(samples); n];
            let mut b = vec![Vec::with_capacity(samples); n];
            for _ in 0..samples {
                let w = verma.sample(&mut rng_a).quotient();
                let l = limit.sample(&mut rng_b).quotient();
                for j in 0..n {
                    a[j].push(w.finite[j] / m);
                    b[j].push(l.finite[j]);
                }
            }
            let crit = ks_critical_two_sample(KS_ALPHA, samples, samples);
            for j in 0..n {
                let d = ks_two_sample(&a[j], &b[j]);
                checks.push(
                    Check::gate(
                        format!("rank {n}, coordinate {}", j + 1),
                        d,
                        format!("< {crit:.4}"),
                        d < crit,
                    )
                    .with_detail(format!(
                        "m = {m}, K = {k_cut}, dropped mass bound {:.2e}",
                        verma.dropped_mass_bound()
                    )),
                );
            }
        }
        Ok(())
    })
}

// 8 ---------------------------------------------------------------------

/// Samples of `x_0^m(∞)/m` from the walk and of `−inf_t ⟨B_t, α_0^∨⟩` from a
/// directly simulated drifted Brownian pairing.
pub struct StringInfinitySamples {
    pub walk: Vec<f64>,
    pub brownian: Vec<f64>,
    pub drift: f64,
    pub variance: f64,
}

pub fn string_infinity_samples(
    rs: &RootSystem,
    nu_hat: &WeightVector,
    m: f64,
    samples: usize,
    brownian_dt: f64,
    stream: RngStream,
) -> Result<StringInfinitySamples, CliError> {
    let i0 = 0;
    let drift = rs.pair(nu_hat, i0);
    let variance = rs.form(&rs.alpha(i0), &rs.alpha(i0));
    if !(drift > 0.0) {
        return Err(CliError::Config(format!(
            "string at infinity needs <nu_hat, alpha_{i0}> > 0, got {drift}"
        )));
    }
    let law = LatticeEndpointLaw::new(rs, nu_hat, m)?;
    let step = StringStepLaw::new(rs, &law, i0)?;
    let stop = 25.0 * variance / (2.0 * drift);
    let max_steps = (1000.0 * stop * m / drift).ceil() as usize;
    let walk_stream = stream.child(1);
    let walk = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = walk_stream.child(k as u64).rng();
            sample_string_at_infinity(&step, m, stop, max_steps, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bm_stream = stream.child(2);
    let brownian = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = bm_stream.child(k as u64).rng();
            sample_drifted_infimum(drift, variance, brownian_dt, stop, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StringInfinitySamples {
        walk,
        brownian,
        drift,
        variance,
    })
}

pub fn string_at_infinity(ranks: &[usize], m: f64, samples: usize, seed: u64) -> CriterionResult {
    guarded(8, "string coordinate at infinity", |checks| {
        for &n in ranks {
            let rs = RootSystem::new(n)?;
            let s = string_infinity_samples(
                &rs,
                &rs.barycentric_drift(),
                m,
                samples,
                0.05,
                RngStream::new(seed, 80 + n as u64),
            )?;
            let est = MeanEstimate::from_samples(&s.brownian);
            let fitted = 1.0 / est.mean;
            let oracle = 2.0 * s.drift / s.variance;
            let z = (fitted - oracle).abs() / (fitted / (samples as f64).sqrt());
            checks.push(
                Check::gate(
                    format!("rank {n}: Brownian oracle rate"),
                    z,
                    format!("<= {SIGMA_LEVEL} sigma"),
                    z <= SIGMA_LEVEL,
                )
                .with_detail(format!(
                    "fitted {fitted:.4}, 2 drift / variance {oracle:.4}"
                )),
            );
            let d = ks_two_sample(&s.walk, &s.brownian);
            let crit = ks_critical_two_sample(KS_ALPHA, samples, samples);
            checks.push(
                Check::gate(
                    format!("rank {n}: KS walk vs Brownian"),
                    d,
                    format!("< {crit:.4}"),
                    d < crit,
                )
                .with_detail(format!("m = {m}, {samples} samples each")),
            );
        }
        Ok(())
    })
}

// 9 ---------------------------------------------------------------------

pub fn harmonicity(ranks: &[usize], level: f64, h: f64, m_cut: Option<f64>) -> CriterionResult {
    guarded(9, "harmonicity of the space-time function", |checks| {
        for &n in ranks {
            let rs = RootSystem::new(n)?;
            let cut = m_cut.unwrap_or_else(|| default_m_cut(&rs, level + 1.0));
            let psi = HarmonicPsi::new(&rs, &rs.barycentric_drift(), cut)?;
            let lambda = rs.barycentric_drift() * level;
            let fine = harmonicity_residual(&psi, &lambda, h)?;
            let coarse = harmonicity_residual(&psi, &lambda, 2.0 * h)?;
            let order = (coarse / fine).abs().log2();
            checks.push(Check::gate(
                format!("rank {n}: residual at h = {h:e}"),
                fine.abs(),
                "< 1e-4",
                fine.abs() < 1e-4,
            ));
            checks.push(Check::gate(
                format!("rank {n}: convergence order"),
                order,
                "in [1.8, 2.2]",
                (1.8..=2.2).contains(&order),
            ));
            for i in 0..=n {
                let (xs, ys): (Vec<f64>, Vec<f64>) = [1e-2, 1e-3, 1e-4, 1e-5]
                    .iter()
                    .map(|&eps| -> Result<(f64, f64), CliError> {
                        let p = wall_approach_point(&rs, i, eps, 1.0);
                        let v = psi.log_value(&p)?.ok_or_else(|| {
                            CliError::Config(format!("wall point {p:?} left the cone"))
                        })?;
                        Ok((eps.ln(), v.log_abs))
                    })
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .unzip();
                let slope = linear_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope);
                checks.push(Check::gate(
                    format!("rank {n}: wall {i} log-log slope"),
                    slope,
                    "1 +- 0.1",
                    (slope - 1.0).abs() <= 0.1,
                ));
            }
        }
        Ok(())
    })
}

// 10 --------------------------------------------------------------------

/// Successive-difference metrics for one Brownian path. `*_period[k]`
/// compares cascades `k` and `k + n + 1`, `*_step[k]` compares `k` and
/// `k + 1`.
#[derive(Clone, Debug)]
pub struct ExplosionSeries {
    pub seed: u64,
    pub blue_period: Vec<f64>,
    pub yellow_period: Vec<f64>,
    pub blue_step: Vec<f64>,
    pub yellow_step: Vec<f64>,
}

pub fn explosion_series(
    rs: &RootSystem,
    nu: &[f64],
    horizon: f64,
    dt: f64,
    depth: usize,
    seed: u64,
) -> Result<ExplosionSeries, CliError> {
    let mut rng = RngStream::new(seed, 10).rng();
    let path = sample_brownian(rs, horizon, dt, nu, &mut rng)?;
    cascade_metrics(rs, &path, depth, seed)
}

pub fn cascade_metrics(
    rs: &RootSystem,
    path: &PiecewiseLinearPath,
    depth: usize,
    seed: u64,
) -> Result<ExplosionSeries, CliError> {
    let n = rs.rank();
    let seq = DirectionSequence::cyclic(n);
    let u = rs.correction_vector(&seq)?;
    let (blue, yellow) = corrected_cascades(rs, path, &seq, &u, depth);
    let diffs = |c: &[PiecewiseLinearPath], lag: usize| -> Vec<f64> {
        (0..c.len().saturating_sub(lag))
            .map(|k| sup_pairing_distance(rs, &c[k], &c[k + lag]))
            .collect()
    };
    Ok(ExplosionSeries {
        seed,
        blue_period: diffs(&blue, n + 1),
        yellow_period: diffs(&yellow, n + 1),
        blue_step: diffs(&blue, 1),
        yellow_step: diffs(&yellow, 1),
    })
}

/// Series for `seeds` consecutive seeds, computed in parallel.
pub fn explosion_ensemble(
    rs: &RootSystem,
    nu: &[f64],
    horizon: f64,
    dt: f64,
    seeds: usize,
    seed0: u64,
) -> Result<Vec<ExplosionSeries>, CliError> {
    let depth = 7 * (rs.rank() + 1);
    (0..seeds as u64)
        .into_par_iter()
        .map(|s| explosion_series(rs, nu, horizon, dt, depth, seed0 + s))
        .collect()
}

/// Fraction of seeds where yellow decreases and blue increases between depths
/// `2(n+1)` and `6(n+1)`, for the period and the step metric.
pub fn explosion_fractions(n: usize, ensemble: &[ExplosionSeries]) -> [f64; 4] {
    let (lo, hi) = (2 * (n + 1), 6 * (n + 1));
    let frac = |pick: &dyn Fn(&ExplosionSeries) -> bool| {
        ensemble.iter().filter(|s| pick(s)).count() as f64 / ensemble.len() as f64
    };
    [
        frac(&|s| s.yellow_period[hi] < s.yellow_period[lo]),
        frac(&|s| s.blue_period[hi] > s.blue_period[lo]),
        frac(&|s| s.yellow_step[hi] < s.yellow_step[lo]),
        frac(&|s| s.blue_step[hi] > s.blue_step[lo]),
    ]
}

pub fn explosion_checks(n: usize, ensemble: &[ExplosionSeries]) -> Vec<Check> {
    let [yp, bp, ys, bs] = explosion_fractions(n, ensemble);
    let (lo, hi) = (2 * (n + 1), 6 * (n + 1));
    let detail = format!("{} seeds, depth {lo} vs {hi}", ensemble.len());
    vec![
        Check::gate(
            format!("rank {n}: corrected cascade decreasing"),
            yp,
            ">= 0.9",
            yp >= 0.9,
        )
        .with_detail(detail.clone()),
        Check::gate(
            format!("rank {n}: Pitman cascade increasing"),
            bp,
            ">= 0.9",
            bp >= 0.9,
        )
        .with_detail(detail.clone()),
        Check::report(format!("rank {n}: corrected cascade decreasing, lag 1"), ys)
            .with_detail(detail.clone()),
        Check::report(format!("rank {n}: Pitman cascade increasing, lag 1"), bs)
            .with_detail(detail),
    ]
}

pub fn explosion(
    ranks: &[usize],
    seeds: usize,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> CriterionResult {
    guarded(10, "explosion of the uncorrected cascade", |checks| {
        for &n in ranks {
            let rs = RootSystem::new(n)?;
            let nu = rs.barycentric_drift().finite.to_vec();
            let ensemble = explosion_ensemble(&rs, &nu, horizon, dt, seeds, seed)?;
            checks.extend(explosion_checks(n, &ensemble));
        }
        Ok(())
    })
}

// 11 --------------------------------------------------------------------

/// `P(S_k^m < k a)` for `k = 1..=k_max`, where `S_k^m` sums `mk` pairings
/// `⟨η(1), α_0^∨⟩` divided by `m + 1`, and `a = ½⟨ν̂, α_0^∨⟩`.
pub fn tail_probabilities(
    rs: &RootSystem,
    nu_hat: &WeightVector,
    m: usize,
    samples: usize,
    k_max: usize,
    stream: RngStream,
) -> Result<Vec<f64>, CliError> {
    let law = LatticeEndpointLaw::new(rs, nu_hat, m as f64)?;
    let marginal = law.pairing_marginal(rs, 0);
    let values: Vec<f64> = marginal.keys().map(|&w| w as f64).collect();
    let dist = WeightedIndex::new(marginal.values().copied())
        .map_err(|e| CliError::Config(format!("pairing marginal: {e}")))?;
    let a = 0.5 * rs.pair(nu_hat, 0);
    let chunk = 1000;
    let counts = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.child(c as u64).rng();
            let mut counts = vec![0usize; k_max + 1];
            for _ in 0..chunk.min(samples - c * chunk) {
                let mut s = 0.0;
                for k in 1..=k_max {
                    for _ in 0..m {
                        s += values[dist.sample(&mut rng)];
                    }
                    counts[k] += usize::from(s / (m as f64 + 1.0) < k as f64 * a);
                }
            }
            counts
        })
        .reduce(
            || vec![0usize; k_max + 1],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
                x
            },
        );
    Ok(counts.iter().map(|&c| c as f64 / samples as f64).collect())
}

pub fn tail_decay(ranks: &[usize], m: usize, samples: usize, seed: u64) -> CriterionResult {
    guarded(11, "geometric tail of the walk", |checks| {
        let (k_min, k_max) = (5, 30);
        for &n in ranks {
            let rs = RootSystem::new(n)?;
            let p = tail_probabilities(
                &rs,
                &rs.barycentric_drift(),
                m,
                samples,
                k_max,
                RngStream::new(seed, 110 + n as u64),
            )?;
            let (xs, ys): (Vec<f64>, Vec<f64>) = (k_min..=k_max)
                .filter(|&k| p[k] > 0.0)
                .map(|k| (k as f64, p[k].ln()))
                .unzip();
            let fit = linear_fit(&xs, &ys);
            let slope = fit.map_or(f64::NAN, |f| f.slope);
            checks.push(
                Check::gate(
                    format!("rank {n}: log-linear slope"),
                    slope,
                    "< 0",
                    slope < 0.0,
                )
                .with_detail(format!(
                    "m = {m}, P(k={k_min}) = {:.4}, P(k={k_max}) = {:.4}, slope se {:.1e}",
                    p[k_min],
                    p[k_max],
                    fit.map_or(f64::NAN, |f| f.slope_std_err)
                )),
            );
        }
        Ok(())
    })
}

// report-only probes ---------------------------------------------------

/// Fourth moments of `⟨η(1), α_i^∨⟩` and of `⟨η(1) + ε_i α_i, α_i^∨⟩ = φ + ε`,
/// computed exactly from the string law. Reports `E[r^4] − E[w^4]`.
pub fn fourth_moment_probe(ranks: &[usize], ms: &[f64]) -> Vec<Check> {
    let mut out = Vec::new();
    for &n in ranks {
        let Ok(rs) = RootSystem::new(n) else { continue };
        let nu_hat = rs.barycentric_drift();
        for &m in ms {
            let law = match LatticeEndpointLaw::new(&rs, &nu_hat, m) {
                Ok(l) => l,
                Err(e) => {
                    out.push(Check::error(
                        format!("rank {n}, m = {m}: fourth moments"),
                        e,
                    ));
                    continue;
                }
            };
            for i in 0..=n {
                match StringStepLaw::new(&rs, &law, i) {
                    Ok(step) => {
                        let w4 = step.expectation(|w, _| (w as f64).powi(4));
                        let r4 = step.expectation(|w, e| ((w + 2 * e) as f64).powi(4));
                        out.push(
                            Check::report(
                                format!("rank {n}, m = {m}, i = {i}: E[r^4] - E[w^4]"),
                                r4 - w4,
                            )
                            .with_detail(format!("E[w^4] = {w4:.6e}, E[r^4] = {r4:.6e}")),
                        );
                    }
                    Err(e) => out.push(Check::error(format!("rank {n}, m = {m}, i = {i}"), e)),
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_criteria_pass() {
        for r in [algebra(3), correction_vector()] {
            assert_eq!(r.status(), Status::Pass, "{}", r.line());
        }
    }

    #[test]
    fn pitman_algebra_small() {
        let r = pitman_algebra(12, 5);
        assert_eq!(r.status(), Status::Pass, "{}", r.line());
    }

    #[test]
    fn sweep_orders_are_valid() {
        for n in 1..4 {
            let orders = sweep_orders(n).unwrap();
            assert_eq!(orders.len(), 3);
            assert_eq!(orders[2].period(), 2 * (n + 1));
        }
    }

    #[test]
    fn cross_weights_are_dominant() {
        for n in 1..4 {
            let rs = RootSystem::new(n).unwrap();
            for w in cross_weights(&rs) {
                assert!((0..=n).all(|i| rs.pair(&w, i) >= -1e-12), "{w:?}");
            }
        }
    }

    #[test]
    fn dominant_path_has_zero_metric() {
        for n in [1, 2] {
            let rs = RootSystem::new(n).unwrap();
            let path = PiecewiseLinearPath::straight(&rs.barycentric_drift(), 1.0);
            let s = cascade_metrics(&rs, &path, 3 * (n + 1), 0).unwrap();
            assert_eq!(s.blue_period.len(), 2 * (n + 1) + 1);
            assert_eq!(s.blue_step.len(), 3 * (n + 1));
            for v in [
                &s.blue_period,
                &s.yellow_period,
                &s.blue_step,
                &s.yellow_step,
            ] {
                assert!(v.iter().all(|&e| e < 1e-12), "{v:?}");
            }
        }
    }

    #[test]
    fn line_lists_failures() {
        let r = CriterionResult {
            id: 7,
            title: "demo",
            checks: vec![Check::gate("x", 2.0, "< 1", false), Check::report("y", 1.0)],
        };
        assert_eq!(r.status(), Status::Fail);
        assert!(r.line().contains("FAIL"));
        assert!(r.line().contains("x = 2.0000e0"));
    }

    #[test]
    fn fourth_moment_probe_is_report_only() {
        let checks = fourth_moment_probe(&[1], &[1.0]);
        assert_eq!(checks.len(), 2);
        assert!(checks.iter().all(|c| c.status == Status::ReportOnly));
    }
}
