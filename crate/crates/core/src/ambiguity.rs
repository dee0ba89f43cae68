//! Trivial ambiguities of phaseless STFT measurements.
//!
//! An element `(theta, lambda, k)` of `S^1 x (C*)^alpha x Z_R` acts by
//!
//! ```text
//! x'[n] = e^{i theta} lambda[n mod alpha]          omega^{floor(n / alpha)} x[n]
//! w'[n] = e^{i theta} lambda[(-n) mod alpha]^{-1}  omega^{ceil(n / alpha)}  w[n]
//! ```
//!
//! with `omega = e^{-2 pi i k / R}`. Every section vector picks up a
//! unimodular factor, so all magnitudes are preserved.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{cvec, ProblemParams, Rng, SignalPair};
use crate::stft::forward;

/// Whether the window is part of the unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    KnownWindow,
    Blind,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known" | "known-window" => Ok(Mode::KnownWindow),
            "blind" => Ok(Mode::Blind),
            other => Err(Error::InvalidParams(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityElement {
    pub theta: f64,
    pub lambda: Vec<Complex64>,
    pub omega_index: usize,
}

impl AmbiguityElement {
    pub fn identity(params: &ProblemParams) -> Self {
        Self {
            theta: 0.0,
            lambda: vec![Complex64::new(1.0, 0.0); params.alpha()],
            omega_index: 0,
        }
    }

    /// Random element with `|lambda_i|` log-uniform in `[1/2, 2]`.
    pub fn random(params: &ProblemParams, rng: &mut Rng) -> Self {
        use rand::Rng as _;
        let lambda = (0..params.alpha())
            .map(|_| {
                let r = 2f64.powf(rng.random_range(-1.0..1.0));
                Complex64::from_polar(r, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        Self {
            theta: rng.random_range(0.0..2.0 * PI),
            lambda,
            omega_index: rng.random_range(0..params.sections()),
        }
    }

    /// Factor-wise product; the group is abelian.
    pub fn compose(&self, other: &Self, params: &ProblemParams) -> Self {
        Self {
            theta: (self.theta + other.theta).rem_euclid(2.0 * PI),
            lambda: self.lambda.iter().zip(&other.lambda).map(|(a, b)| a * b).collect(),
            omega_index: (self.omega_index + other.omega_index) % params.sections(),
        }
    }

    fn validate(&self, params: &ProblemParams) -> Result<()> {
        if self.lambda.len() != params.alpha() {
            return Err(Error::InconsistentShape(format!(
                "lambda has {} entries, expected alpha = {}",
                self.lambda.len(),
                params.alpha()
            )));
        }
        if self.lambda.iter().any(|z| z.norm() == 0.0) {
            return Err(Error::InvalidParams("lambda entries must be nonzero".into()));
        }
        Ok(())
    }

    fn omega(&self, params: &ProblemParams) -> Complex64 {
        Complex64::from_polar(
            1.0,
            -2.0 * PI * (self.omega_index % params.sections()) as f64 / params.sections() as f64,
        )
    }
}

fn ceil_div(n: usize, d: usize) -> usize {
    n.div_ceil(d)
}

/// Applies `g` to `pair`.
pub fn act(g: &AmbiguityElement, pair: &SignalPair, params: &ProblemParams) -> Result<SignalPair> {
    g.validate(params)?;
    pair.check(params)?;
    let a = params.alpha();
    let phase = Complex64::from_polar(1.0, g.theta);
    let omega = g.omega(params);
    let x = pair
        .x
        .iter()
        .enumerate()
        .map(|(n, v)| v * phase * g.lambda[n % a] * omega.powu((n / a) as u32))
        .collect();
    let w = pair
        .w
        .iter()
        .enumerate()
        .map(|(n, v)| v * phase / g.lambda[(a - n % a) % a] * omega.powu(ceil_div(n, a) as u32))
        .collect();
    Ok(SignalPair { x, w })
}

/// Scales `x` by `lambda` without the compensating window factor. This is
/// not a group action; it exists as a negative control.
pub fn act_signal_only(g: &AmbiguityElement, pair: &SignalPair, params: &ProblemParams) -> Result<SignalPair> {
    g.validate(params)?;
    let a = params.alpha();
    let x = pair.x.iter().enumerate().map(|(n, v)| v * g.lambda[n % a]).collect();
    Ok(SignalPair { x, w: pair.w.clone() })
}

/// `max | |Y(g.pair)| - |Y(pair)| | / max |Y(pair)|` over the full grid.
pub fn verify_invariance(g: &AmbiguityElement, pair: &SignalPair, params: &ProblemParams) -> Result<f64> {
    let moved = act(g, pair, params)?;
    Ok(magnitude_deviation(params, pair, &moved))
}

/// Largest magnitude change between two pairs, relative to the first.
pub fn magnitude_deviation(params: &ProblemParams, a: &SignalPair, b: &SignalPair) -> f64 {
    let (ya, yb) = (forward(params, a), forward(params, b));
    let scale = ya.max_abs();
    if scale == 0.0 {
        return yb.max_abs();
    }
    ya.as_flat()
        .iter()
        .zip(yb.as_flat())
        .map(|(p, q)| (p.norm() - q.norm()).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Orbit representative.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub pair: SignalPair,
}

/// Residual `Z_R` action on blind canonical forms,
/// `x[n] omega^{ceil(n/alpha)}`, `w[n] omega^{floor(n/alpha)}`; it keeps
/// `w[0..alpha) = 1` and `x[0]` fixed.
pub fn residual_rotation(pair: &SignalPair, params: &ProblemParams, k: usize) -> SignalPair {
    let a = params.alpha();
    let omega = Complex64::from_polar(1.0, -2.0 * PI * k as f64 / params.sections() as f64);
    SignalPair {
        x: pair
            .x
            .iter()
            .enumerate()
            .map(|(n, v)| v * omega.powu(ceil_div(n, a) as u32))
            .collect(),
        w: pair
            .w
            .iter()
            .enumerate()
            .map(|(n, v)| v * omega.powu((n / a) as u32))
            .collect(),
    }
}

fn lex_key(x: &[Complex64]) -> impl Iterator<Item = f64> + '_ {
    x.iter().flat_map(|z| [z.re, z.im])
}

fn lex_less(a: &[Complex64], b: &[Complex64]) -> bool {
    for (p, q) in lex_key(a).zip(lex_key(b)) {
        if p != q {
            return p < q;
        }
    }
    false
}

/// Known-window mode rotates `x` so `x[0] w[0] > 0`. Blind mode fixes
/// `w[0..alpha) = 1` and `x[0] > 0`, then picks the residual rotation
/// with the lexicographically smallest `(Re, Im)` encoding of `x`.
pub fn canonicalize(pair: &SignalPair, params: &ProblemParams, mode: Mode) -> Result<CanonicalForm> {
    pair.check(params)?;
    let scale = (cvec::norm(&pair.x) * cvec::norm(&pair.w)).max(f64::MIN_POSITIVE);
    match mode {
        Mode::KnownWindow => {
            let p = pair.x[0] * pair.w[0];
            if p.norm() <= 1e-14 * scale {
                return Err(Error::ZeroPivot(p.norm()));
            }
            let u = p.conj() / p.norm();
            Ok(CanonicalForm {
                pair: SignalPair {
                    x: cvec::scale(&pair.x, u),
                    w: pair.w.clone(),
                },
            })
        }
        Mode::Blind => {
            let a = params.alpha();
            if a > pair.w.len() {
                return Err(Error::Precondition(format!(
                    "blind canonical form needs W >= alpha (W={}, alpha={a})",
                    pair.w.len()
                )));
            }
            let wscale = cvec::norm(&pair.w).max(f64::MIN_POSITIVE);
            if let Some(z) = pair.w[..a].iter().find(|z| z.norm() <= 1e-14 * wscale) {
                return Err(Error::ZeroPivot(z.norm()));
            }
            let p = pair.x[0] * pair.w[0];
            if p.norm() <= 1e-14 * scale {
                return Err(Error::ZeroPivot(p.norm()));
            }
            let u = p.conj() / p.norm();
            let x: Vec<Complex64> = pair
                .x
                .iter()
                .enumerate()
                .map(|(n, v)| v * u * pair.w[(a - n % a) % a])
                .collect();
            let w: Vec<Complex64> = pair.w.iter().enumerate().map(|(n, v)| v / pair.w[n % a]).collect();
            let base = SignalPair { x, w };
            let best = (0..params.sections())
                .map(|k| residual_rotation(&base, params, k))
                .reduce(|best, cand| if lex_less(&cand.x, &best.x) { cand } else { best })
                .expect("at least one section");
            Ok(CanonicalForm { pair: best })
        }
    }
}

/// Relative distance between orbits.
///
/// Known-window mode compares `x` after the optimal unit phase (a sign
/// when both signals are real). Blind mode canonicalizes both pairs and
/// minimizes the combined `(x, w)` distance over the residual rotations.
/// The distance is divided by the larger of the two norms, which keeps the
/// metric symmetric.
pub fn quotient_error(estimate: &SignalPair, truth: &SignalPair, params: &ProblemParams, mode: Mode) -> Result<f64> {
    if cvec::norm(&truth.x) == 0.0 {
        return Err(Error::ZeroNorm);
    }
    match mode {
        Mode::KnownWindow => Ok(phase_error(&estimate.x, &truth.x)),
        Mode::Blind => {
            let ce = canonicalize(estimate, params, Mode::Blind)?.pair;
            let ct = canonicalize(truth, params, Mode::Blind)?.pair;
            let denom = combined_norm(&ce).max(combined_norm(&ct));
            let best = (0..params.sections())
                .map(|k| {
                    let r = residual_rotation(&ce, params, k);
                    (cvec::diff_norm(&r.x, &ct.x).powi(2) + cvec::diff_norm(&r.w, &ct.w).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            Ok(best / denom)
        }
    }
}

/// `min_u |u a - b| / max(|a|, |b|)`, with `u = +-1` for real inputs and
/// `|u| = 1` otherwise.
pub fn phase_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let denom = cvec::norm(a).max(cvec::norm(b));
    if denom == 0.0 {
        return 0.0;
    }
    let real = a.iter().chain(b).all(|z| z.im == 0.0);
    let dist = if real {
        let neg: Vec<Complex64> = a.iter().map(|z| -z).collect();
        cvec::diff_norm(a, b).min(cvec::diff_norm(&neg, b))
    } else {
        cvec::aligned_distance(a, b)
    };
    dist / denom
}

fn combined_norm(p: &SignalPair) -> f64 {
    (cvec::norm(&p.x).powi(2) + cvec::norm(&p.w).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{random_pair, Distribution};
    use crate::stft::section;
    use proptest::prelude::{any, prop_assert, proptest};

    fn setup(seed: u64, n: usize, w: usize, l: usize) -> (ProblemParams, SignalPair, Rng) {
        let p = ProblemParams::new(n, w, l).unwrap();
        let mut rng = Rng::new(seed);
        let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
        (p, pair, rng)
    }

    fn pair_dist(a: &SignalPair, b: &SignalPair) -> f64 {
        cvec::diff_norm(&a.x, &b.x) + cvec::diff_norm(&a.w, &b.w)
    }

    #[test]
    fn identity_and_global_phase() {
        let (p, pair, _) = setup(1, 12, 5, 3);
        let id = AmbiguityElement::identity(&p);
        assert_eq!(act(&id, &pair, &p).unwrap(), pair);
        assert_eq!(verify_invariance(&id, &pair, &p).unwrap(), 0.0);
        let g = AmbiguityElement { theta: PI, ..id };
        let moved = act(&g, &pair, &p).unwrap();
        for (a, b) in moved.x.iter().zip(&pair.x) {
            assert!((a + b).norm() < 1e-15);
        }
        for (a, b) in moved.w.iter().zip(&pair.w) {
            assert!((a + b).norm() < 1e-15);
        }
    }

    #[test]
    fn scaling_preserves_sections() {
        let (p, pair, _) = setup(2, 9, 4, 2);
        let g = AmbiguityElement {
            theta: 0.0,
            lambda: vec![Complex64::new(2.0, 0.0)],
            omega_index: 0,
        };
        let moved = act(&g, &pair, &p).unwrap();
        assert!(moved.x.iter().zip(&pair.x).all(|(a, b)| (a - b * 2.0).norm() < 1e-15));
        assert!(moved.w.iter().zip(&pair.w).all(|(a, b)| (a - b * 0.5).norm() < 1e-15));
        for r in 0..p.sections() {
            let (s0, s1) = (section(&p, &pair, r).unwrap(), section(&p, &moved, r).unwrap());
            assert!(cvec::diff_norm(&s0.entries, &s1.entries) < 1e-14);
        }
    }

    #[test]
    fn invariance_over_random_elements() {
        let mut rng = Rng::new(3);
        for n in 8..=32usize {
            for l in (1..=n).filter(|l| n % l == 0 || l % 3 == 1) {
                let w = 1 + (n * l) % n;
                let p = ProblemParams::new(n, w, l).unwrap();
                let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
                let g = AmbiguityElement::random(&p, &mut rng);
                assert!(verify_invariance(&g, &pair, &p).unwrap() <= 1e-10, "N={n} L={l}");
            }
        }
    }

    #[test]
    fn signal_only_scaling_is_detected() {
        let mut rng = Rng::new(4);
        for _ in 0..20 {
            let p = ProblemParams::new(12, 5, 4).unwrap();
            let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
            let mut g = AmbiguityElement::random(&p, &mut rng);
            g.lambda[0] = Complex64::new(3.0, 0.0);
            let moved = act_signal_only(&g, &pair, &p).unwrap();
            assert!(magnitude_deviation(&p, &pair, &moved) > 1e-3);
        }
    }

    #[test]
    fn group_law() {
        let mut rng = Rng::new(5);
        for (n, w, l) in [(12, 5, 4), (15, 7, 3), (16, 6, 6), (11, 4, 3)] {
            let p = ProblemParams::new(n, w, l).unwrap();
            let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
            let g1 = AmbiguityElement::random(&p, &mut rng);
            let g2 = AmbiguityElement::random(&p, &mut rng);
            let lhs = act(&g1, &act(&g2, &pair, &p).unwrap(), &p).unwrap();
            let rhs = act(&g1.compose(&g2, &p), &pair, &p).unwrap();
            assert!(pair_dist(&lhs, &rhs) < 1e-12 * 16.0);
        }
    }

    #[test]
    fn bad_elements_rejected() {
        let (p, pair, _) = setup(6, 12, 5, 4);
        let mut g = AmbiguityElement::identity(&p);
        g.lambda[1] = Complex64::new(0.0, 0.0);
        assert!(act(&g, &pair, &p).is_err());
        g.lambda.pop();
        assert!(act(&g, &pair, &p).is_err());
    }

    #[test]
    fn canonical_form_properties() {
        let (p, mut pair, mut rng) = setup(7, 12, 5, 3);
        let c = canonicalize(&pair, &p, Mode::Blind).unwrap().pair;
        assert!(c.w[..p.alpha()].iter().all(|z| (z - 1.0).norm() < 1e-12));
        assert!(c.x[0].im.abs() < 1e-12 && c.x[0].re > 0.0);
        assert!(pair_dist(&canonicalize(&c, &p, Mode::Blind).unwrap().pair, &c) < 1e-12);
        for _ in 0..20 {
            let g = AmbiguityElement::random(&p, &mut rng);
            let moved = act(&g, &pair, &p).unwrap();
            assert!(pair_dist(&canonicalize(&moved, &p, Mode::Blind).unwrap().pair, &c) < 1e-10);
        }
        let k = canonicalize(&pair, &p, Mode::KnownWindow).unwrap().pair;
        let prod = k.x[0] * k.w[0];
        assert!(prod.im.abs() < 1e-12 && prod.re > 0.0);
        pair.x[0] = Complex64::new(0.0, 0.0);
        assert!(canonicalize(&pair, &p, Mode::Blind).is_err());
        assert!(canonicalize(&pair, &p, Mode::KnownWindow).is_err());
    }

    #[test]
    fn quotient_error_examples() {
        let (p, pair, mut rng) = setup(8, 12, 4, 2);
        assert_eq!(quotient_error(&pair, &pair, &p, Mode::KnownWindow).unwrap(), 0.0);
        let g = AmbiguityElement::random(&p, &mut rng);
        let moved = act(&g, &pair, &p).unwrap();
        assert!(quotient_error(&moved, &pair, &p, Mode::Blind).unwrap() <= 1e-10);
        let rp = ProblemParams::new(11, 5, 2).unwrap();
        let real = random_pair(&rp, Distribution::RealGaussian, &mut rng);
        let neg = SignalPair::new(real.x.iter().map(|z| -z).collect(), real.w.clone());
        assert_eq!(quotient_error(&neg, &real, &rp, Mode::KnownWindow).unwrap(), 0.0);
        let zero = SignalPair::new(vec![Complex64::new(0.0, 0.0); 11], real.w.clone());
        assert!(matches!(quotient_error(&real, &zero, &rp, Mode::KnownWindow), Err(Error::ZeroNorm)));
    }

    #[test]
    fn group_directions_preserve_magnitudes() {
        // theta, each |lambda_i| and each arg lambda_i: alpha + 2 real
        // directions once the per-residue phases are merged with theta.
        let (p, pair, mut rng) = setup(9, 15, 7, 3);
        let base = AmbiguityElement::identity(&p);
        let eps = 1e-3;
        let mut dirs = vec![AmbiguityElement { theta: eps, ..base.clone() }];
        for i in 0..p.alpha() {
            let mut g = base.clone();
            g.lambda[i] = Complex64::new(1.0 + eps, 0.0);
            dirs.push(g.clone());
            g.lambda[i] = Complex64::from_polar(1.0, eps);
            dirs.push(g);
        }
        for g in dirs {
            let moved = act(&g, &pair, &p).unwrap();
            assert!(pair_dist(&moved, &pair) > 1e-5);
            assert!(verify_invariance(&g, &pair, &p).unwrap() < 1e-12);
        }
        for _ in 0..10 {
            let mut moved = pair.clone();
            for z in moved.x.iter_mut().chain(moved.w.iter_mut()) {
                *z += Distribution::ComplexGaussian.sample(&mut rng) * eps;
            }
            assert!(magnitude_deviation(&p, &pair, &moved) > 1e-6);
        }
    }

    proptest! {
        #[test]
        fn quotient_error_is_symmetric(seed in any::<u64>()) {
            let (p, a, mut rng) = setup(seed, 12, 4, 3);
            let b = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
            for mode in [Mode::KnownWindow, Mode::Blind] {
                let d1 = quotient_error(&a, &b, &p, mode).unwrap();
                let d2 = quotient_error(&b, &a, &p, mode).unwrap();
                prop_assert!((d1 - d2).abs() <= 1e-12);
            }
        }

        #[test]
        fn orbit_members_are_at_distance_zero(seed in any::<u64>()) {
            let (p, a, mut rng) = setup(seed, 16, 6, 4);
            let g = AmbiguityElement::random(&p, &mut rng);
            let b = act(&g, &a, &p).unwrap();
            prop_assert!(quotient_error(&b, &a, &p, Mode::Blind).unwrap() <= 1e-10);
            prop_assert!(verify_invariance(&g, &a, &p).unwrap() <= 1e-10);
        }
    }
}
