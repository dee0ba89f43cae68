//! Measurement geometry, signal/window pairs, periodic indexing and seeded
//! instance generation.
//!
//! Everything else in the crate is phrased in terms of [`ProblemParams`]:
//! a signal of length `n`, a window of length `w`, and a step `l` between
//! consecutive short-time sections. The step only matters through
//! `alpha = gcd(l, n)`: the reachable shifts are exactly the multiples of
//! `alpha`, and there are `sections = n / alpha` of them.

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of one periodic STFT measurement problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemParams {
    n: usize,
    w: usize,
    l: usize,
    alpha: usize,
    sections: usize,
}

impl ProblemParams {
    /// Validates `1 <= w <= n`, `1 <= l <= n` and derives `alpha`, `sections`.
    pub fn new(n: usize, w: usize, l: usize) -> Result<Self> {
        if n == 0 || w == 0 || l == 0 {
            return Err(Error::InvalidParams(format!(
                "N, W, L must be positive (got N={n}, W={w}, L={l})"
            )));
        }
        if w > n {
            return Err(Error::InvalidParams(format!(
                "window length W={w} exceeds signal length N={n}"
            )));
        }
        if l > n {
            return Err(Error::InvalidParams(format!(
                "step L={l} exceeds signal length N={n}"
            )));
        }
        let alpha = l.gcd(&n);
        Ok(Self {
            n,
            w,
            l,
            alpha,
            sections: n / alpha,
        })
    }

    /// Signal length `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Window length `W`.
    pub fn w(&self) -> usize {
        self.w
    }

    /// Step between sections `L`.
    pub fn l(&self) -> usize {
        self.l
    }

    /// `gcd(L, N)`.
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Number of distinct sections `R = N / alpha`.
    pub fn sections(&self) -> usize {
        self.sections
    }

    /// Size of the full `(m, r)` measurement grid.
    pub fn grid_size(&self) -> usize {
        self.n * self.sections
    }

    /// Reduces any integer index modulo `N`.
    pub fn wrap(&self, i: i64) -> usize {
        wrap(i, self.n)
    }

    /// Section index `r` in `[0, R)` with `r * L ≡ j * alpha (mod N)`.
    ///
    /// The shift `r * L mod N` of the returned section is `j * alpha mod N`,
    /// so `shift_index(j)` for `j = 0, 1, 2, ...` walks the sections in
    /// order of increasing shift.
    pub fn shift_index(&self, j: i64) -> usize {
        let r = self.sections as i64;
        if r == 1 {
            return 0;
        }
        let step = (self.l / self.alpha) as i64;
        let inv = mod_inverse(step.rem_euclid(r), r);
        (j.rem_euclid(r) * inv).rem_euclid(r) as usize
    }

    /// Shift `r * L mod N` of section `r`.
    pub fn shift_of(&self, r: usize) -> usize {
        (r * self.l) % self.n
    }
}

/// Periodic index reduction; negative indices are legal.
pub fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let e = a.extended_gcd(&m);
    debug_assert_eq!(e.gcd, 1, "{a} is not invertible modulo {m}");
    e.x.rem_euclid(m)
}

/// A signal `x` (length `N`, indexed periodically) and a window `w`
/// (length `W`, implicitly zero beyond `W`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPair {
    pub x: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl SignalPair {
    pub fn new(x: Vec<Complex64>, w: Vec<Complex64>) -> Self {
        Self { x, w }
    }

    /// Checks the lengths against `params`.
    pub fn check(&self, params: &ProblemParams) -> Result<()> {
        if self.x.len() != params.n() || self.w.len() != params.w() {
            return Err(Error::InconsistentShape(format!(
                "pair has |x|={}, |w|={}, expected N={}, W={}",
                self.x.len(),
                self.w.len(),
                params.n(),
                params.w()
            )));
        }
        Ok(())
    }

    /// `x[i mod N]`.
    pub fn x_at(&self, i: i64) -> Complex64 {
        self.x[wrap(i, self.x.len())]
    }

    /// Window value with the zero extension: `w[k]` for `k < W`, else 0.
    /// `k` is reduced modulo `N` first.
    pub fn w_at(&self, k: i64) -> Complex64 {
        window_at(&self.w, k, self.x.len())
    }

    pub fn is_real(&self) -> bool {
        self.x.iter().chain(&self.w).all(|z| z.im == 0.0)
    }
}

/// Zero-extended, periodically indexed window lookup.
pub fn window_at(w: &[Complex64], k: i64, n: usize) -> Complex64 {
    let k = wrap(k, n);
    if k < w.len() {
        w[k]
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Entry distribution for random instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Real and imaginary parts i.i.d. `N(0, 1/2)`, so `E|z|^2 = 1`.
    ComplexGaussian,
    /// Real entries i.i.d. `N(0, 1)`.
    RealGaussian,
}

impl Distribution {
    pub fn sample(&self, rng: &mut Rng) -> Complex64 {
        match self {
            Distribution::ComplexGaussian => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            }
            Distribution::RealGaussian => Complex64::new(rng.sample(StandardNormal), 0.0),
        }
    }

    pub fn vector(&self, len: usize, rng: &mut Rng) -> Vec<Complex64> {
        (0..len).map(|_| self.sample(rng)).collect()
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex-gaussian" | "complex" => Ok(Distribution::ComplexGaussian),
            "real-gaussian" | "real" => Ok(Distribution::RealGaussian),
            other => Err(Error::InvalidParams(format!("unknown distribution {other:?}"))),
        }
    }
}

/// Draws `x` then `w` i.i.d. from `distribution`.
pub fn random_pair(params: &ProblemParams, distribution: Distribution, rng: &mut Rng) -> SignalPair {
    let x = distribution.vector(params.n(), rng);
    let w = distribution.vector(params.w(), rng);
    SignalPair { x, w }
}

/// Seeded random stream. Forking derives an independent stream from the
/// parent seed and a stream label, so experiment cells can be re-run in
/// isolation.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream labelled by `stream`; does not advance `self`.
    pub fn fork(&self, stream: u64) -> Rng {
        Rng::new(derive_seed(self.seed, &[stream]))
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Mixes a base seed with integer coordinates (splitmix64 finalizer per step).
pub fn derive_seed(base: u64, coords: &[u64]) -> u64 {
    let mut h = splitmix(base ^ 0x6a09_e667_f3bc_c909);
    for &c in coords {
        h = splitmix(h ^ splitmix(c.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Small complex-vector helpers shared across modules.
pub mod cvec {
    use num_complex::Complex64;

    pub fn norm(a: &[Complex64]) -> f64 {
        a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<a, b> = sum conj(a_i) b_i`.
    pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn diff_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Unit phase `u` minimizing `|u a - b|`; 1 when `<a, b> = 0`.
    pub fn best_phase(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let ip = inner(a, b);
        let r = ip.norm();
        if r > 0.0 {
            ip / r
        } else {
            Complex64::new(1.0, 0.0)
        }
    }

    /// `min_theta |e^{i theta} a - b|`.
    pub fn aligned_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        diff_norm(&scale(a, best_phase(a, b)), b)
    }

    pub fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
        a.iter().map(|z| z * s).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_shift(p: &ProblemParams, j: i64) -> usize {
        let target = wrap(j * p.alpha() as i64, p.n());
        (0..p.sections()).find(|&r| p.shift_of(r) == target).unwrap()
    }

    #[test]
    fn derived_alpha_and_sections() {
        let p = ProblemParams::new(11, 3, 4).unwrap();
        assert_eq!((p.alpha(), p.sections()), (1, 11));
        let p = ProblemParams::new(100, 10, 4).unwrap();
        assert_eq!((p.alpha(), p.sections()), (4, 25));
        let p = ProblemParams::new(8, 2, 8).unwrap();
        assert_eq!((p.alpha(), p.sections()), (8, 1));
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(ProblemParams::new(8, 9, 1).is_err());
        assert!(ProblemParams::new(8, 0, 1).is_err());
        assert!(ProblemParams::new(8, 2, 0).is_err());
        assert!(ProblemParams::new(0, 1, 1).is_err());
        assert!(ProblemParams::new(8, 2, 9).is_err());
    }

    #[test]
    fn shift_index_examples() {
        let p = ProblemParams::new(11, 3, 4).unwrap();
        assert_eq!(p.shift_index(1), 3);
        assert_eq!(p.shift_index(0), 0);
        let p = ProblemParams::new(100, 10, 4).unwrap();
        assert_eq!(p.shift_index(1), 1);
    }

    #[test]
    fn shift_index_matches_brute_force() {
        for n in 1..=40usize {
            for l in 1..=n {
                let p = ProblemParams::new(n, 1, l).unwrap();
                let mut seen = vec![false; p.sections()];
                for j in -3..(p.sections() as i64 + 3) {
                    let r = p.shift_index(j);
                    assert_eq!(r, brute_shift(&p, j), "N={n} L={l} j={j}");
                    if (0..p.sections() as i64).contains(&j) {
                        assert!(!seen[r]);
                        seen[r] = true;
                    }
                }
                assert_eq!(n % p.alpha(), 0);
                assert_eq!(l % p.alpha(), 0);
            }
        }
    }

    #[test]
    fn random_pairs_are_reproducible() {
        let p = ProblemParams::new(16, 4, 1).unwrap();
        let a = random_pair(&p, Distribution::ComplexGaussian, &mut Rng::new(5));
        let b = random_pair(&p, Distribution::ComplexGaussian, &mut Rng::new(5));
        assert_eq!(a, b);
        let c = random_pair(&p, Distribution::ComplexGaussian, &mut Rng::new(6));
        assert_ne!(a, c);
    }

    #[test]
    fn real_gaussian_has_no_imaginary_part() {
        let p = ProblemParams::new(32, 8, 2).unwrap();
        let pair = random_pair(&p, Distribution::RealGaussian, &mut Rng::new(1));
        assert!(pair.is_real());
    }

    #[test]
    fn complex_gaussian_has_unit_power() {
        let mut rng = Rng::new(42);
        let draws = 100_000;
        let mean = (0..draws)
            .map(|_| Distribution::ComplexGaussian.sample(&mut rng).norm_sqr())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean power {mean}");
    }

    #[test]
    fn forks_are_independent_and_stable() {
        let base = Rng::new(9);
        let mut a = base.fork(1);
        let mut b = base.fork(1);
        let mut c = base.fork(2);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_eq!(x, y);
        assert_ne!(x, z);
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
    }

    #[test]
    fn periodic_indexing() {
        assert_eq!(wrap(-1, 8), 7);
        assert_eq!(wrap(-17, 8), 7);
        assert_eq!(wrap(8, 8), 0);
        let pair = SignalPair::new(
            (0..4).map(|i| Complex64::new(i as f64, 0.0)).collect(),
            vec![Complex64::new(1.0, 0.0); 2],
        );
        assert_eq!(pair.x_at(-1).re, 3.0);
        assert_eq!(pair.w_at(2).re, 0.0);
        assert_eq!(pair.w_at(-3).re, 1.0);
    }

    #[test]
    fn aligned_distance_ignores_global_phase() {
        let a = vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)];
        let b = cvec::scale(&a, Complex64::from_polar(1.0, 1.3));
        assert!(cvec::aligned_distance(&a, &b) < 1e-12);
        let u = cvec::best_phase(&a, &b);
        assert!(cvec::diff_norm(&cvec::scale(&a, u), &b) < 1e-12);
    }
}
