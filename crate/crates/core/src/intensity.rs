//! Fourier intensity functions of short vectors.
//!
//! For `y` of length `W`, `yhat(w) = sum_k y[k] w^k` and the intensity
//! `A_y(w) = |yhat(w)|^2 = sum_k a_k w^k` on the unit circle, where
//! `a_k = sum_n y[n + k] conj(y[n])`. Vectors sharing an intensity differ
//! by a global phase and by flipping roots of `yhat` across the unit circle.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{cvec, Distribution, Rng};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest window length accepted by flip enumeration.
pub const FLIP_CAP: usize = 12;
/// Largest condition number accepted by [`profile_from_samples`].
pub const MAX_CONDITION: f64 = 1e8;
/// Relative residual for "same intensity".
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Relative separation below which two solutions count as one.
pub const SEPARATION_TOL: f64 = 1e-4;
const MULTISTARTS: usize = 16;
const MULTISTART_SEED: u64 = 0x1f2e_3d4c;

/// `e^{2 pi i m / n}`, the point at which section samples evaluate the
/// intensity.
pub fn sample_point(m: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (m % n) as f64 / n as f64)
}

/// Autocorrelation coefficients `a_k`, `k` in `[-(W-1), W-1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityProfile {
    autocorr: Vec<Complex64>,
}

impl IntensityProfile {
    /// `autocorr[k + W - 1] = a_k`; Hermitian symmetry is enforced by
    /// averaging `a_k` with `conj(a_{-k})`.
    pub fn from_autocorr(autocorr: Vec<Complex64>) -> Result<Self> {
        if autocorr.len().is_multiple_of(2) {
            return Err(Error::InconsistentShape(format!(
                "autocorrelation must have odd length, got {}",
                autocorr.len()
            )));
        }
        let len = autocorr.len();
        let sym = (0..len)
            .map(|i| (autocorr[i] + autocorr[len - 1 - i].conj()) * 0.5)
            .collect();
        Ok(Self { autocorr: sym })
    }

    pub fn w(&self) -> usize {
        self.autocorr.len().div_ceil(2)
    }

    /// `a_k` for `|k| < W`, zero outside.
    pub fn a(&self, k: i64) -> Complex64 {
        let w = self.w() as i64;
        if k.abs() >= w {
            ZERO
        } else {
            self.autocorr[(k + w - 1) as usize]
        }
    }

    pub fn autocorr(&self) -> &[Complex64] {
        &self.autocorr
    }

    /// `sum_k a_k w^k`.
    pub fn eval(&self, omega: Complex64) -> Complex64 {
        let w = self.w() as i32;
        self.autocorr
            .iter()
            .enumerate()
            .map(|(i, a)| a * omega.powi(i as i32 - (w - 1)))
            .sum()
    }

    /// Real part of [`eval`](Self::eval); exact on the unit circle.
    pub fn eval_real(&self, omega: Complex64) -> f64 {
        self.eval(omega).re
    }

    pub fn norm(&self) -> f64 {
        cvec::norm(&self.autocorr)
    }
}

/// Aperiodic autocorrelation of `y`.
pub fn profile_of(y: &[Complex64]) -> IntensityProfile {
    let w = y.len() as i64;
    let autocorr = (-(w - 1)..w)
        .map(|k| {
            (0..w)
                .filter(|n| (0..w).contains(&(n + k)))
                .map(|n| y[(n + k) as usize] * y[n as usize].conj())
                .sum()
        })
        .collect();
    IntensityProfile { autocorr }
}

/// Recovers `a_k` from samples `(w_i, A(w_i))` with `w_i` on the unit circle.
pub fn profile_from_samples(samples: &[(Complex64, f64)], w: usize) -> Result<IntensityProfile> {
    if w == 0 {
        return Err(Error::InvalidParams("window length must be positive".into()));
    }
    let needed = 2 * w - 1;
    let distinct = count_distinct(samples.iter().map(|s| s.0));
    if distinct < needed {
        return Err(Error::InsufficientSamples { needed, got: distinct });
    }
    // Unknowns: a_0, Re a_k, Im a_k for k = 1..W-1.
    let rows = samples.len();
    let mut mat = DMatrix::<f64>::zeros(rows, needed);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (i, (omega, value)) in samples.iter().enumerate() {
        let theta = omega.arg();
        mat[(i, 0)] = 1.0;
        for k in 1..w {
            let (s, c) = (k as f64 * theta).sin_cos();
            mat[(i, 2 * k - 1)] = 2.0 * c;
            mat[(i, 2 * k)] = -2.0 * s;
        }
        rhs[i] = *value;
    }
    let svd = mat.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > MAX_CONDITION {
        return Err(Error::IllConditioned(cond));
    }
    let sol = svd.solve(&rhs, 0.0).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let mut autocorr = vec![ZERO; needed];
    autocorr[w - 1] = Complex64::new(sol[0], 0.0);
    for k in 1..w {
        let a = Complex64::new(sol[2 * k - 1], sol[2 * k]);
        autocorr[w - 1 + k] = a;
        autocorr[w - 1 - k] = a.conj();
    }
    Ok(IntensityProfile { autocorr })
}

fn count_distinct(points: impl Iterator<Item = Complex64>) -> usize {
    let mut seen: Vec<Complex64> = Vec::new();
    for p in points {
        if seen.iter().all(|q| (p - q).norm() > 1e-9) {
            seen.push(p);
        }
    }
    seen.len()
}

/// Polynomial helpers on coefficient vectors in ascending order.
pub mod poly {
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    pub fn eval(c: &[Complex64], z: Complex64) -> Complex64 {
        c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
    }

    fn eval_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        c.iter()
            .rev()
            .fold((zero, zero), |(p, d), a| (p * z + a, d * z + p))
    }

    /// `lead * prod (z - r_i)`, ascending coefficients.
    pub fn from_roots(lead: Complex64, roots: &[Complex64]) -> Vec<Complex64> {
        let mut c = vec![lead];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            c = next;
        }
        c
    }

    /// Roots of a polynomial with nonzero top coefficient, from the
    /// companion matrix spectrum followed by Newton polishing.
    pub fn roots(c: &[Complex64]) -> Vec<Complex64> {
        let deg = c.len().saturating_sub(1);
        if deg == 0 {
            return Vec::new();
        }
        let lead = c[deg];
        let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -c[i] / lead;
        }
        let eig = eigenvalues(&comp).unwrap_or_else(|| {
            // Cyclic companion matrices stall the unshifted QR sweep; a
            // diagonal shift breaks the equal-modulus spectrum.
            let sigma = Complex64::new(0.37, 0.21) * (1.0 + comp.norm());
            let shifted = &comp + DMatrix::<Complex64>::identity(deg, deg) * sigma;
            eigenvalues(&shifted)
                .expect("shifted companion matrix converges")
                .into_iter()
                .map(|z| z - sigma)
                .collect()
        });
        eig.iter().map(|&z| polish(c, z)).collect()
    }

    fn eigenvalues(m: &DMatrix<Complex64>) -> Option<Vec<Complex64>> {
        let n = m.nrows();
        let schur = m.clone().try_schur(1e-15, 100 * n.max(10))?;
        Some(schur.eigenvalues()?.iter().copied().collect())
    }

    fn polish(c: &[Complex64], mut z: Complex64) -> Complex64 {
        let mut best = eval(c, z).norm();
        for _ in 0..8 {
            let (p, d) = eval_with_derivative(c, z);
            if d.norm() == 0.0 || best == 0.0 {
                break;
            }
            let cand = z - p / d;
            let v = eval(c, cand).norm();
            if !(v < best) {
                break;
            }
            z = cand;
            best = v;
        }
        z
    }
}

/// `yhat(w) = leading * prod (w - roots_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootProfile {
    pub leading: Complex64,
    pub trailing: Complex64,
    pub roots: Vec<Complex64>,
}

impl RootProfile {
    pub fn reconstruct(&self) -> Vec<Complex64> {
        poly::from_roots(self.leading, &self.roots)
    }
}

/// Roots of `yhat`.
pub fn roots_of(y: &[Complex64]) -> Result<RootProfile> {
    let scale = cvec::norm(y);
    let lead = *y.last().ok_or_else(|| Error::InvalidParams("empty vector".into()))?;
    if lead.norm() <= 1e-12 * scale || lead.norm() == 0.0 {
        return Err(Error::DegenerateLeading(lead.norm()));
    }
    Ok(RootProfile {
        leading: lead,
        trailing: y[0],
        roots: poly::roots(y),
    })
}

/// `1 / conj(root)`.
pub fn flip(root: Complex64) -> Result<Complex64> {
    if root.norm() == 0.0 {
        return Err(Error::ZeroRoot);
    }
    Ok(root / root.norm_sqr())
}

/// All vectors reachable by root flips, indexed by the flip mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipCandidateSet {
    pub candidates: Vec<Vec<Complex64>>,
}

impl FlipCandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Candidates that stay apart modulo global phase, relative separation
    /// `sep` against the candidate norm.
    pub fn classes(&self, sep: f64) -> Vec<Vec<Complex64>> {
        let mut reps: Vec<Vec<Complex64>> = Vec::new();
        for c in &self.candidates {
            let scale = cvec::norm(c).max(f64::MIN_POSITIVE);
            if reps.iter().all(|r| cvec::aligned_distance(r, c) > sep * scale) {
                reps.push(c.clone());
            }
        }
        reps
    }
}

/// Flips every subset of the roots of `yhat`, keeping `|yhat|` fixed on
/// the unit circle.
pub fn enumerate_flips(y: &[Complex64]) -> Result<FlipCandidateSet> {
    let w = y.len();
    if w > FLIP_CAP {
        return Err(Error::WindowTooLong { w, cap: FLIP_CAP });
    }
    let rp = roots_of(y)?;
    let scale = cvec::norm(y);
    if rp.trailing.norm() <= 1e-12 * scale {
        return Err(Error::ZeroRoot);
    }
    let d = rp.roots.len();
    let flipped: Vec<Complex64> = rp.roots.iter().map(|&b| flip(b)).collect::<Result<_>>()?;
    let candidates = (0..1usize << d)
        .map(|mask| {
            let mut lead = rp.leading;
            let chosen: Vec<Complex64> = (0..d)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        lead *= rp.roots[i].norm();
                        flipped[i]
                    } else {
                        rp.roots[i]
                    }
                })
                .collect();
            poly::from_roots(lead, &chosen)
        })
        .collect();
    Ok(FlipCandidateSet { candidates })
}

/// Spectral factorizations of a profile: one candidate per choice of root
/// in each `(b, 1/conj b)` pair of `w^{W-1} A(w)`, scaled to norm
/// `sqrt(a_0)`. Candidates are defined up to global phase.
pub fn factor_profile(profile: &IntensityProfile) -> Result<FlipCandidateSet> {
    let w = profile.w();
    if w > FLIP_CAP {
        return Err(Error::WindowTooLong { w, cap: FLIP_CAP });
    }
    let a0 = profile.a(0).re;
    if !(a0 > 0.0) {
        return Err(Error::ZeroNorm);
    }
    if w == 1 {
        return Ok(FlipCandidateSet {
            candidates: vec![vec![Complex64::new(a0.sqrt(), 0.0)]],
        });
    }
    let top = profile.a(w as i64 - 1);
    if top.norm() <= 1e-12 * profile.norm() {
        return Err(Error::DegenerateLeading(top.norm()));
    }
    let all = poly::roots(profile.autocorr());
    let pairs = pair_roots(all);
    let d = pairs.len();
    let candidates = (0..1usize << d)
        .map(|mask| {
            let chosen: Vec<Complex64> = (0..d)
                .map(|i| if mask >> i & 1 == 1 { pairs[i].1 } else { pairs[i].0 })
                .collect();
            let c = poly::from_roots(ONE, &chosen);
            let s = (a0.sqrt() / cvec::norm(&c)).max(0.0);
            c.into_iter().map(|z| z * s).collect()
        })
        .collect();
    Ok(FlipCandidateSet { candidates })
}

/// Greedy pairing of `2d` roots into `(inside, outside)` reflection pairs.
fn pair_roots(mut roots: Vec<Complex64>) -> Vec<(Complex64, Complex64)> {
    let mut pairs = Vec::with_capacity(roots.len() / 2);
    while roots.len() >= 2 {
        let (far, _) = roots
            .iter()
            .enumerate()
            .map(|(i, z)| (i, z.norm().ln().abs()))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let beta = roots.swap_remove(far);
        let target = beta / beta.norm_sqr();
        let (mate, _) = roots
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z - target).norm()))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        let gamma = roots.swap_remove(mate);
        let (inner, outer) = if beta.norm() <= gamma.norm() { (beta, gamma) } else { (gamma, beta) };
        let inside = (inner + outer / outer.norm_sqr()) * 0.5;
        pairs.push((inside, inside / inside.norm_sqr()));
    }
    pairs
}

/// Completes a vector from intensity samples when the entries outside
/// `unknown` are known.
///
/// The unknown block `u` enters `|yhat|^2` through `|uhat|^2` and a term
/// linear in `u`; treating the autocorrelation of `u` as separate unknowns
/// makes the system linear. When that system is rank deficient or its
/// solution fails the residual check, a multistart Levenberg-Marquardt
/// search on `u` takes over.
pub fn recover_with_known_entries(
    samples: &[(Complex64, f64)],
    known: &BTreeMap<usize, Complex64>,
    unknown: &[usize],
) -> Result<Vec<Complex64>> {
    let w = known.len() + unknown.len();
    let mut base = vec![ZERO; w];
    let mut is_known = vec![false; w];
    for (&i, &v) in known {
        if i >= w {
            return Err(Error::InconsistentShape(format!("known index {i} outside [0, {w})")));
        }
        base[i] = v;
        is_known[i] = true;
    }
    for &s in unknown {
        if s >= w || is_known[s] {
            return Err(Error::InconsistentShape(format!(
                "unknown index {s} is outside [0, {w}) or also known"
            )));
        }
        is_known[s] = true;
    }
    if unknown.is_empty() {
        return Ok(base);
    }
    let diffs: Vec<usize> = {
        let mut d: Vec<usize> = unknown
            .iter()
            .flat_map(|&s| unknown.iter().filter(move |&&t| s > t).map(move |&t| s - t))
            .collect();
        d.sort_unstable();
        d.dedup();
        d
    };
    let n_unknowns = 1 + 2 * diffs.len() + 2 * unknown.len();
    let distinct = count_distinct(samples.iter().map(|s| s.0));
    if distinct < n_unknowns {
        return Err(Error::InsufficientSamples {
            needed: n_unknowns,
            got: distinct,
        });
    }
    let peak = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = RESIDUAL_TOL * peak;
    let residual = |u: &[Complex64]| -> f64 {
        let y = assemble(&base, unknown, u);
        samples
            .iter()
            .map(|(om, v)| (poly::eval(&y, *om).norm_sqr() - v).abs())
            .fold(0.0, f64::max)
    };

    let lifted = lifted_solve(samples, &base, unknown, &diffs);
    if let Some(u) = &lifted {
        if residual(u) <= tol {
            return Ok(assemble(&base, unknown, u));
        }
    }

    let mut rng = Rng::new(MULTISTART_SEED);
    let spread = (peak.sqrt() / w as f64).max(1e-3);
    let mut starts: Vec<Vec<Complex64>> = lifted.into_iter().collect();
    starts.extend(factorization_starts(samples, &base, unknown));
    for _ in 0..MULTISTARTS {
        starts.push(
            (0..unknown.len())
                .map(|_| Distribution::ComplexGaussian.sample(&mut rng) * spread)
                .collect(),
        );
    }
    let mut best = f64::INFINITY;
    let mut certified: Vec<Vec<Complex64>> = Vec::new();
    for start in starts {
        let u = levenberg_marquardt(samples, &base, unknown, start);
        let res = residual(&u);
        best = best.min(res);
        if res <= tol {
            let y = assemble(&base, unknown, &u);
            let scale = cvec::norm(&y);
            if certified
                .iter()
                .all(|c| cvec::diff_norm(c, &y) > SEPARATION_TOL * scale)
            {
                certified.push(y);
            }
        }
    }
    match certified.len() {
        0 => Err(Error::NoCandidate(best / peak)),
        1 => Ok(certified.pop().unwrap()),
        k => Err(Error::AmbiguousCandidates(k)),
    }
}

/// Solution of the linearized system alone, without the residual check or
/// the local search. `None` when the system is rank deficient or the
/// indices are inconsistent.
pub fn lifted_completion(
    samples: &[(Complex64, f64)],
    known: &BTreeMap<usize, Complex64>,
    unknown: &[usize],
) -> Option<Vec<Complex64>> {
    let w = known.len() + unknown.len();
    let mut base = vec![ZERO; w];
    for (&i, &v) in known {
        *base.get_mut(i)? = v;
    }
    let mut diffs: Vec<usize> = unknown
        .iter()
        .flat_map(|&s| unknown.iter().filter(move |&&t| s > t).map(move |&t| s - t))
        .collect();
    diffs.sort_unstable();
    diffs.dedup();
    let u = lifted_solve(samples, &base, unknown, &diffs)?;
    Some(assemble(&base, unknown, &u))
}

/// Spectral factors of the interpolated profile whose known entries agree
/// with `base` up to a phase, restricted to the unknown positions. Empty
/// when the samples cannot pin down the full profile.
fn factorization_starts(samples: &[(Complex64, f64)], base: &[Complex64], unknown: &[usize]) -> Vec<Vec<Complex64>> {
    let w = base.len();
    let Ok(profile) = profile_from_samples(samples, w) else {
        return Vec::new();
    };
    let Ok(set) = factor_profile(&profile) else {
        return Vec::new();
    };
    let known_idx: Vec<usize> = (0..w).filter(|i| !unknown.contains(i)).collect();
    let target: Vec<Complex64> = known_idx.iter().map(|&i| base[i]).collect();
    let scale = cvec::norm(&target);
    set.candidates
        .iter()
        .filter_map(|cand| {
            let sub: Vec<Complex64> = known_idx.iter().map(|&i| cand[i]).collect();
            let ph = cvec::best_phase(&sub, &target);
            let miss = cvec::diff_norm(&cvec::scale(&sub, ph), &target);
            (miss <= 1e-3 * scale).then(|| unknown.iter().map(|&s| cand[s] * ph).collect())
        })
        .collect()
}

fn assemble(base: &[Complex64], unknown: &[usize], u: &[Complex64]) -> Vec<Complex64> {
    let mut y = base.to_vec();
    for (&s, &v) in unknown.iter().zip(u) {
        y[s] = v;
    }
    y
}

/// Linear least squares in `(c_0, c_d, u)`; `None` when rank deficient.
fn lifted_solve(
    samples: &[(Complex64, f64)],
    base: &[Complex64],
    unknown: &[usize],
    diffs: &[usize],
) -> Option<Vec<Complex64>> {
    let cols = 1 + 2 * diffs.len() + 2 * unknown.len();
    let mut mat = DMatrix::<f64>::zeros(samples.len(), cols);
    let mut rhs = DVector::<f64>::zeros(samples.len());
    for (i, (om, v)) in samples.iter().enumerate() {
        let k = poly::eval(base, *om);
        rhs[i] = v - k.norm_sqr();
        mat[(i, 0)] = 1.0;
        for (j, &d) in diffs.iter().enumerate() {
            let p = om.powi(d as i32);
            mat[(i, 1 + 2 * j)] = 2.0 * p.re;
            mat[(i, 2 + 2 * j)] = -2.0 * p.im;
        }
        let off = 1 + 2 * diffs.len();
        for (j, &s) in unknown.iter().enumerate() {
            let q = k.conj() * om.powi(s as i32);
            mat[(i, off + 2 * j)] = 2.0 * q.re;
            mat[(i, off + 2 * j + 1)] = -2.0 * q.im;
        }
    }
    let svd = mat.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-11 * smax) {
        return None;
    }
    let sol = svd.solve(&rhs, 0.0).ok()?;
    let off = 1 + 2 * diffs.len();
    Some(
        (0..unknown.len())
            .map(|j| Complex64::new(sol[off + 2 * j], sol[off + 2 * j + 1]))
            .collect(),
    )
}

fn levenberg_marquardt(
    samples: &[(Complex64, f64)],
    base: &[Complex64],
    unknown: &[usize],
    mut u: Vec<Complex64>,
) -> Vec<Complex64> {
    let p = 2 * unknown.len();
    let eval = |u: &[Complex64]| -> (DVector<f64>, DMatrix<f64>) {
        let y = assemble(base, unknown, u);
        let mut r = DVector::zeros(samples.len());
        let mut jac = DMatrix::zeros(samples.len(), p);
        for (i, (om, v)) in samples.iter().enumerate() {
            let yh = poly::eval(&y, *om);
            r[i] = yh.norm_sqr() - v;
            for (j, &s) in unknown.iter().enumerate() {
                let q = yh.conj() * om.powi(s as i32);
                jac[(i, 2 * j)] = 2.0 * q.re;
                jac[(i, 2 * j + 1)] = -2.0 * q.im;
            }
        }
        (r, jac)
    };
    let mut lambda = 1e-3;
    let (mut r, mut jac) = eval(&u);
    let mut cost = r.norm_squared();
    for _ in 0..300 {
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut a = jtj.clone();
        for i in 0..p {
            a[(i, i)] += lambda * (jtj[(i, i)] + 1e-12);
        }
        let Some(step) = a.lu().solve(&(-&g)) else {
            lambda *= 10.0;
            continue;
        };
        let cand: Vec<Complex64> = u
            .iter()
            .enumerate()
            .map(|(j, z)| z + Complex64::new(step[2 * j], step[2 * j + 1]))
            .collect();
        let (r2, j2) = eval(&cand);
        let c2 = r2.norm_squared();
        if c2 < cost {
            let done = (cost - c2) <= 1e-30 + 1e-16 * cost || step.norm() <= 1e-15 * (1.0 + cvec::norm(&cand));
            u = cand;
            r = r2;
            jac = j2;
            cost = c2;
            lambda = (lambda / 3.0).max(1e-15);
            if done || cost == 0.0 {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    u
}

/// Which fixed construction [`appendix_test_vectors`] builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AppendixKind {
    /// `z_0` all ones, `z_alpha` built from window ratios with a generic head.
    AFirst,
    /// `z_alpha` all ones, `z_0` built from window ratios with a generic tail.
    ASecond,
    /// Sparse `1/4, 4, 1` triple.
    BTriple,
    /// `z_0 = z_{-alpha}` all ones, `z_alpha = (c, 1, ..., 1)` with `c = W`.
    BAllOnes,
}

/// Fixed section-vector constructions. Pair kinds leave `z_minus_alpha`
/// empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TestVectors {
    pub z0: Vec<Complex64>,
    pub z_alpha: Vec<Complex64>,
    pub z_minus_alpha: Option<Vec<Complex64>>,
}

/// Uniform draw from the annulus `0.5 <= |z| <= 2`.
pub fn annulus_sample(rng: &mut Rng) -> Complex64 {
    let r = rng.random_range(0.25f64..4.0).sqrt();
    let t = rng.random_range(0.0..2.0 * PI);
    Complex64::from_polar(r, t)
}

pub fn appendix_test_vectors(
    kind: AppendixKind,
    w: usize,
    alpha: usize,
    window: Option<&[Complex64]>,
    rng: &mut Rng,
) -> Result<TestVectors> {
    if w < 2 || alpha == 0 || alpha >= w {
        return Err(Error::InconsistentShape(format!("need 1 <= alpha < W (W={w}, alpha={alpha})")));
    }
    let ones = vec![ONE; w];
    let real = |v: f64| Complex64::new(v, 0.0);
    match kind {
        AppendixKind::AFirst | AppendixKind::ASecond => {
            let win: Vec<Complex64> = match window {
                Some(v) if v.len() == w => v.to_vec(),
                Some(v) => {
                    return Err(Error::InconsistentShape(format!(
                        "window has length {}, expected {w}",
                        v.len()
                    )))
                }
                None => (0..w).map(|_| annulus_sample(rng)).collect(),
            };
            if win.iter().any(|z| z.norm() == 0.0) {
                return Err(Error::InvalidParams("window entries must be nonzero".into()));
            }
            let generic: Vec<Complex64> = (0..alpha).map(|_| annulus_sample(rng)).collect();
            if kind == AppendixKind::AFirst {
                let mut za = generic;
                za.extend((alpha..w).map(|i| win[i] / win[i - alpha]));
                Ok(TestVectors { z0: ones, z_alpha: za, z_minus_alpha: None })
            } else {
                let mut z0: Vec<Complex64> = (0..w - alpha).map(|j| win[j] / win[j + alpha]).collect();
                z0.extend(generic);
                Ok(TestVectors { z0, z_alpha: ones, z_minus_alpha: None })
            }
        }
        AppendixKind::BTriple => {
            if w < 2 * alpha + 1 {
                return Err(Error::InconsistentShape(format!(
                    "sparse triple needs W >= 2 alpha + 1 (W={w}, alpha={alpha})"
                )));
            }
            let support = [0, alpha, w - 1 - alpha, w - 1];
            let mut zm = vec![ZERO; w];
            zm[0] = real(0.25);
            zm[w - 1 - alpha] = real(0.25);
            zm[w - 1] = real(1.0);
            let mut za = vec![ZERO; w];
            let mut z0 = vec![ZERO; w];
            for &i in &support {
                za[i] = real(4.0);
                z0[i] = real(1.0);
            }
            Ok(TestVectors { z0, z_alpha: za, z_minus_alpha: Some(zm) })
        }
        AppendixKind::BAllOnes => {
            let mut za = ones.clone();
            za[0] = real(w as f64);
            Ok(TestVectors { z0: ones.clone(), z_alpha: za, z_minus_alpha: Some(ones) })
        }
    }
}
