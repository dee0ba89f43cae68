//! Periodic STFT, section vectors, phaseless measurement sets and the
//! operator view used by the projection solver.
//!
//! `Y[m, r] = sum_n x[n] w[rL - n] e^{-2 pi i n m / N}`. With the section
//! vector `y[k] = x[rL - k] w[k]` this is
//! `e^{-2 pi i rL m / N} sum_k y[k] e^{+2 pi i k m / N}`, i.e. one length-`N`
//! inverse-direction FFT per section up to a unimodular factor.
//!
//! Flattened vectors in measurement space use section-major order:
//! entry `(m, r)` lives at `r * N + m`.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{window_at, ProblemParams, Rng, SignalPair};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest measurement-space dimension `N * R` for which
/// [`operator_matrix`] materializes a dense matrix.
pub const DENSE_ROW_CAP: usize = 1 << 16;

/// Complex STFT values on the full `N x R` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StftTable {
    n: usize,
    sections: usize,
    values: Vec<Complex64>,
}

impl StftTable {
    pub fn get(&self, m: usize, r: usize) -> Complex64 {
        self.values[r * self.n + m]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sections(&self) -> usize {
        self.sections
    }

    /// Section-major flattening, `(m, r) -> r * N + m`.
    pub fn as_flat(&self) -> &[Complex64] {
        &self.values
    }

    pub fn column(&self, r: usize) -> &[Complex64] {
        &self.values[r * self.n..(r + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `y[k] = x[shift - k] w[k]` for `k` in `[0, W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionVector {
    pub entries: Vec<Complex64>,
    pub shift: usize,
}

/// Forward transform on the full grid, one FFT per section.
pub fn forward(params: &ProblemParams, pair: &SignalPair) -> StftTable {
    let n = params.n();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let mut values = Vec::with_capacity(params.grid_size());
    let mut buf = vec![ZERO; n];
    for r in 0..params.sections() {
        let shift = params.shift_of(r);
        buf.fill(ZERO);
        for (k, wk) in pair.w.iter().enumerate() {
            buf[k] = pair.x_at(shift as i64 - k as i64) * wk;
        }
        fft.process(&mut buf);
        for (m, v) in buf.iter().enumerate() {
            values.push(v * twiddle(shift * m % n, n));
        }
    }
    StftTable {
        n,
        sections: params.sections(),
        values,
    }
}

/// `e^{-2 pi i k / n}`.
fn twiddle(k: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / n as f64)
}

/// Section vector of section `r`.
pub fn section(params: &ProblemParams, pair: &SignalPair, r: usize) -> Result<SectionVector> {
    if r >= params.sections() {
        return Err(Error::IndexOutOfRange {
            m: 0,
            r,
            n: params.n(),
            sections: params.sections(),
        });
    }
    let shift = params.shift_of(r);
    let entries = pair
        .w
        .iter()
        .enumerate()
        .map(|(k, wk)| pair.x_at(shift as i64 - k as i64) * wk)
        .collect();
    Ok(SectionVector { entries, shift })
}

/// Phaseless samples `|Y[m, r]|` at an ordered list of grid indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    indices: Vec<(usize, usize)>,
    magnitudes: Vec<f64>,
}

impl MeasurementSet {
    /// Validates distinct indices and nonnegative finite magnitudes.
    pub fn new(indices: Vec<(usize, usize)>, magnitudes: Vec<f64>) -> Result<Self> {
        if indices.len() != magnitudes.len() {
            return Err(Error::InconsistentShape(format!(
                "{} indices but {} magnitudes",
                indices.len(),
                magnitudes.len()
            )));
        }
        check_distinct(&indices)?;
        if let Some(bad) = magnitudes.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParams(format!("magnitude {bad} is not a nonnegative number")));
        }
        Ok(Self { indices, magnitudes })
    }

    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
            magnitudes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.indices.iter().copied().zip(self.magnitudes.iter().copied())
    }

    pub fn lookup(&self) -> HashMap<(usize, usize), f64> {
        self.iter().collect()
    }

    /// Checks every index lies on the `N x R` grid of `params`.
    pub fn check_grid(&self, params: &ProblemParams) -> Result<()> {
        check_grid(params, &self.indices)
    }

    /// Copy sorted by `(m, r)`.
    pub fn sorted(&self) -> Self {
        let mut rows: Vec<_> = self.iter().collect();
        rows.sort_by_key(|(idx, _)| *idx);
        let (indices, magnitudes) = rows.into_iter().unzip();
        Self { indices, magnitudes }
    }

    /// CSV with header `m,r,magnitude`, rows sorted by `(m, r)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["m", "r", "magnitude"])?;
        for ((m, r), v) in self.sorted().iter() {
            wtr.write_record([m.to_string(), r.to_string(), format!("{v:.16e}")])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["m", "r", "magnitude"] {
            return Err(Error::InconsistentShape(format!(
                "expected header m,r,magnitude, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut indices = Vec::new();
        let mut magnitudes = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse_err = |what: &str| Error::InconsistentShape(format!("bad {what} field in {rec:?}"));
            let m = rec[0].trim().parse().map_err(|_| parse_err("m"))?;
            let r = rec[1].trim().parse().map_err(|_| parse_err("r"))?;
            let v = rec[2].trim().parse().map_err(|_| parse_err("magnitude"))?;
            indices.push((m, r));
            magnitudes.push(v);
        }
        Self::new(indices, magnitudes)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.sorted())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: MeasurementSet = serde_json::from_str(s)?;
        Self::new(raw.indices, raw.magnitudes)
    }
}

fn check_distinct(indices: &[(usize, usize)]) -> Result<()> {
    let mut seen = HashSet::with_capacity(indices.len());
    for &(m, r) in indices {
        if !seen.insert((m, r)) {
            return Err(Error::DuplicateIndex { m, r });
        }
    }
    Ok(())
}

fn check_grid(params: &ProblemParams, indices: &[(usize, usize)]) -> Result<()> {
    for &(m, r) in indices {
        if m >= params.n() || r >= params.sections() {
            return Err(Error::IndexOutOfRange {
                m,
                r,
                n: params.n(),
                sections: params.sections(),
            });
        }
    }
    Ok(())
}

/// `|Y[m, r]|` at each requested index.
pub fn magnitudes(table: &StftTable, indices: &[(usize, usize)]) -> Result<MeasurementSet> {
    for &(m, r) in indices {
        if m >= table.n || r >= table.sections {
            return Err(Error::IndexOutOfRange {
                m,
                r,
                n: table.n,
                sections: table.sections,
            });
        }
    }
    check_distinct(indices)?;
    let mags = indices.iter().map(|&(m, r)| table.get(m, r).norm()).collect();
    Ok(MeasurementSet {
        indices: indices.to_vec(),
        magnitudes: mags,
    })
}

/// Every grid index, section-major.
pub fn full_grid(params: &ProblemParams) -> Vec<(usize, usize)> {
    (0..params.sections())
        .flat_map(|r| (0..params.n()).map(move |m| (m, r)))
        .collect()
}

/// Measures `pair` at `indices`.
pub fn measure(params: &ProblemParams, pair: &SignalPair, indices: &[(usize, usize)]) -> Result<MeasurementSet> {
    pair.check(params)?;
    magnitudes(&forward(params, pair), indices)
}

/// `count` grid indices drawn uniformly without replacement.
pub fn random_mask(params: &ProblemParams, count: usize, rng: &mut Rng) -> Result<Vec<(usize, usize)>> {
    let total = params.grid_size();
    if count > total {
        return Err(Error::InvalidParams(format!(
            "mask of {count} entries requested from a grid of {total}"
        )));
    }
    let n = params.n();
    Ok(rand::seq::index::sample(rng, total, count)
        .into_iter()
        .map(|i| (i % n, i / n))
        .collect())
}

/// Diagonal of the frame operator `A^H A`: `N * sum_r |w[rL - n]|^2`.
pub fn frame_diagonal(params: &ProblemParams, w: &[Complex64]) -> Vec<f64> {
    let n = params.n();
    (0..n)
        .map(|i| {
            let s: f64 = (0..params.sections())
                .map(|r| window_at(w, params.shift_of(r) as i64 - i as i64, n).norm_sqr())
                .sum();
            n as f64 * s
        })
        .collect()
}

/// Dense `N*R x N` matrix of the linear map `x -> Y`, rows section-major.
pub fn operator_matrix(params: &ProblemParams, w: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let (n, rows) = (params.n(), params.grid_size());
    if rows > DENSE_ROW_CAP {
        return Err(Error::InvalidParams(format!(
            "dense operator with {rows} rows exceeds the cap {DENSE_ROW_CAP}"
        )));
    }
    Ok(DMatrix::from_fn(rows, n, |row, col| {
        let (r, m) = (row / n, row % n);
        let shift = params.shift_of(r) as i64;
        window_at(w, shift - col as i64, n) * twiddle(col * m % n, n)
    }))
}

/// Matrix-free STFT operator for a fixed window.
#[derive(Clone)]
pub struct StftOperator {
    params: ProblemParams,
    /// `shifted[r][n] = w[rL - n]`, zero-extended.
    shifted: Vec<Vec<Complex64>>,
    frame: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for StftOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StftOperator")
            .field("params", &self.params)
            .field("frame", &self.frame)
            .finish()
    }
}

impl StftOperator {
    /// Fails when some signal entry is never seen by the window.
    pub fn new(params: &ProblemParams, w: &[Complex64]) -> Result<Self> {
        if w.len() != params.w() {
            return Err(Error::InconsistentShape(format!(
                "window has length {}, expected {}",
                w.len(),
                params.w()
            )));
        }
        let n = params.n();
        let frame = frame_diagonal(params, w);
        let scale = frame.iter().cloned().fold(0.0, f64::max);
        if let Some(i) = frame.iter().position(|d| *d <= 1e-14 * scale || *d == 0.0) {
            return Err(Error::CoverageViolation(i));
        }
        let shifted = (0..params.sections())
            .map(|r| {
                let s = params.shift_of(r) as i64;
                (0..n).map(|i| window_at(w, s - i as i64, n)).collect()
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            params: *params,
            shifted,
            frame,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn frame(&self) -> &[f64] {
        &self.frame
    }

    /// `A x`, section-major.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.params.n();
        let mut out = vec![ZERO; self.params.grid_size()];
        let mut scratch = vec![ZERO; self.fwd.get_inplace_scratch_len()];
        for (chunk, ws) in out.chunks_mut(n).zip(&self.shifted) {
            for ((o, xi), wi) in chunk.iter_mut().zip(x).zip(ws) {
                *o = xi * wi;
            }
            self.fwd.process_with_scratch(chunk, &mut scratch);
        }
        out
    }

    /// `A^H z`.
    pub fn adjoint(&self, z: &[Complex64]) -> Vec<Complex64> {
        let n = self.params.n();
        let mut acc = vec![ZERO; n];
        let mut buf = vec![ZERO; n];
        let mut scratch = vec![ZERO; self.inv.get_inplace_scratch_len()];
        for (chunk, ws) in z.chunks(n).zip(&self.shifted) {
            buf.copy_from_slice(chunk);
            self.inv.process_with_scratch(&mut buf, &mut scratch);
            for ((a, b), wi) in acc.iter_mut().zip(&buf).zip(ws) {
                *a += wi.conj() * b;
            }
        }
        acc
    }

    /// Least-squares inverse `A^+ z = D^{-1} A^H z`.
    pub fn pseudo_inverse(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.adjoint(z)
            .into_iter()
            .zip(&self.frame)
            .map(|(v, d)| v / *d)
            .collect()
    }

    /// Least-squares inverse restricted to real signals, `D^{-1} Re(A^H z)`.
    pub fn pseudo_inverse_real(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.adjoint(z)
            .into_iter()
            .zip(&self.frame)
            .map(|(v, d)| Complex64::new(v.re / *d, 0.0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{random_pair, Distribution};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reals(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&a| c(a, 0.0)).collect()
    }

    /// Literal double sum, independent of the section/FFT route.
    fn direct(params: &ProblemParams, pair: &SignalPair) -> Vec<Complex64> {
        let n = params.n();
        let mut out = Vec::new();
        for r in 0..params.sections() {
            for m in 0..n {
                let mut acc = ZERO;
                for i in 0..n {
                    let wv = pair.w_at((r * params.l()) as i64 - i as i64);
                    let ph = -2.0 * std::f64::consts::PI * ((i * m) as f64) / n as f64;
                    acc += pair.x[i] * wv * Complex64::from_polar(1.0, ph);
                }
                out.push(acc);
            }
        }
        out
    }

    fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn delta_signal_with_unit_window() {
        let p = ProblemParams::new(6, 1, 2).unwrap();
        let mut x = vec![ZERO; 6];
        x[0] = c(1.0, 0.0);
        let pair = SignalPair::new(x, vec![c(1.0, 0.0)]);
        let t = forward(&p, &pair);
        for r in 0..p.sections() {
            for m in 0..6 {
                let want = if p.shift_of(r) == 0 { 1.0 } else { 0.0 };
                assert!((t.get(m, r).norm() - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hand_example_n4() {
        let p = ProblemParams::new(4, 2, 2).unwrap();
        let pair = SignalPair::new(reals(&[1.0, 2.0, 3.0, 4.0]), reals(&[1.0, 1.0]));
        let t = forward(&p, &pair);
        assert!((t.get(0, 0).norm() - 5.0).abs() < 1e-12);
        assert!((t.get(2, 0).norm() - 3.0).abs() < 1e-12);
        let s = section(&p, &pair, 1).unwrap();
        assert_eq!(s.entries, reals(&[3.0, 2.0]));
        assert_eq!(s.shift, 2);
        let s0 = section(&p, &pair, 0).unwrap();
        assert_eq!(s0.entries, reals(&[1.0, 4.0]));
        assert!(section(&p, &pair, 2).is_err());
    }

    #[test]
    fn zero_window_section() {
        let p = ProblemParams::new(5, 3, 1).unwrap();
        let pair = SignalPair::new(reals(&[1.0; 5]), vec![ZERO; 3]);
        assert!(section(&p, &pair, 2).unwrap().entries.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn fft_route_matches_direct_sum() {
        let mut rng = Rng::new(11);
        for trial in 0..100u64 {
            let n = 2 + (trial as usize * 7) % 31;
            let w = 1 + (trial as usize * 5) % n;
            let l = 1 + (trial as usize * 3) % n;
            let p = ProblemParams::new(n, w, l).unwrap();
            let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
            let t = forward(&p, &pair);
            assert!(max_rel(t.as_flat(), &direct(&p, &pair)) < 1e-12, "N={n} W={w} L={l}");
        }
    }

    #[test]
    fn parseval_per_section() {
        let mut rng = Rng::new(3);
        let p = ProblemParams::new(24, 7, 4).unwrap();
        let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
        let t = forward(&p, &pair);
        for r in 0..p.sections() {
            let lhs: f64 = t.column(r).iter().map(|z| z.norm_sqr()).sum();
            let y = section(&p, &pair, r).unwrap().entries;
            let rhs = 24.0 * y.iter().map(|z| z.norm_sqr()).sum::<f64>();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        }
    }

    #[test]
    fn conjugate_symmetry_of_magnitudes() {
        let mut rng = Rng::new(8);
        let p = ProblemParams::new(10, 4, 2).unwrap();
        let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
        let conj = SignalPair::new(
            pair.x.iter().map(|z| z.conj()).collect(),
            pair.w.iter().map(|z| z.conj()).collect(),
        );
        let (a, b) = (forward(&p, &pair), forward(&p, &conj));
        for r in 0..p.sections() {
            for m in 0..10 {
                assert!((a.get(m, r).norm() - b.get((10 - m) % 10, r).norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn magnitudes_validation() {
        let p = ProblemParams::new(4, 2, 2).unwrap();
        let pair = SignalPair::new(reals(&[1.0, 2.0, 3.0, 4.0]), reals(&[1.0, 1.0]));
        let t = forward(&p, &pair);
        assert_eq!(magnitudes(&t, &full_grid(&p)).unwrap().len(), 8);
        assert!(magnitudes(&t, &[]).unwrap().is_empty());
        assert!(matches!(magnitudes(&t, &[(0, 0), (0, 0)]), Err(Error::DuplicateIndex { .. })));
        assert!(matches!(magnitudes(&t, &[(0, 2)]), Err(Error::IndexOutOfRange { .. })));
        assert!(MeasurementSet::new(vec![(0, 0)], vec![-1.0]).is_err());
    }

    #[test]
    fn csv_and_json_round_trip_bit_exact() {
        let mut rng = Rng::new(21);
        let p = ProblemParams::new(9, 4, 3).unwrap();
        let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
        let mask = random_mask(&p, 17, &mut rng).unwrap();
        let set = measure(&p, &pair, &mask).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("m,r,magnitude\n"));
        let back = MeasurementSet::read_csv(&buf[..]).unwrap();
        assert_eq!(back, set.sorted());
        let json = set.to_json().unwrap();
        assert_eq!(MeasurementSet::from_json(&json).unwrap(), set.sorted());
    }

    #[test]
    fn masks() {
        let p = ProblemParams::new(7, 3, 1).unwrap();
        let mut all = random_mask(&p, 49, &mut Rng::new(1)).unwrap();
        all.sort();
        let mut grid = full_grid(&p);
        grid.sort();
        assert_eq!(all, grid);
        assert!(random_mask(&p, 0, &mut Rng::new(1)).unwrap().is_empty());
        assert!(random_mask(&p, 50, &mut Rng::new(1)).is_err());
        assert_eq!(
            random_mask(&p, 20, &mut Rng::new(4)).unwrap(),
            random_mask(&p, 20, &mut Rng::new(4)).unwrap()
        );
    }

    #[test]
    fn dense_operator_matches_forward() {
        let mut rng = Rng::new(5);
        let p = ProblemParams::new(12, 5, 3).unwrap();
        let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
        let a = operator_matrix(&p, &pair.w).unwrap();
        let y = &a * nalgebra::DVector::from_vec(pair.x.clone());
        assert!(max_rel(y.as_slice(), forward(&p, &pair).as_flat()) < 1e-12);
        let op = StftOperator::new(&p, &pair.w).unwrap();
        assert!(max_rel(&op.apply(&pair.x), y.as_slice()) < 1e-12);
        let z: Vec<Complex64> = (0..p.grid_size()).map(|_| Distribution::ComplexGaussian.sample(&mut rng)).collect();
        let dense_adj = a.adjoint() * nalgebra::DVector::from_vec(z.clone());
        assert!(max_rel(&op.adjoint(&z), dense_adj.as_slice()) < 1e-12);
    }

    #[test]
    fn full_window_rows_are_dft_rows() {
        let p = ProblemParams::new(6, 6, 1).unwrap();
        let a = operator_matrix(&p, &[c(1.0, 0.0); 6]).unwrap();
        for r in 0..6 {
            for m in 0..6 {
                for col in 0..6 {
                    assert!((a[(r * 6 + m, col)] - twiddle(col * m % 6, 6)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn frame_operator_is_diagonal() {
        let mut rng = Rng::new(9);
        let p = ProblemParams::new(10, 4, 2).unwrap();
        let pair = random_pair(&p, Distribution::ComplexGaussian, &mut rng);
        let a = operator_matrix(&p, &pair.w).unwrap();
        let g = a.adjoint() * &a;
        let d = frame_diagonal(&p, &pair.w);
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { d[i] } else { 0.0 };
                assert!((g[(i, j)] - c(want, 0.0)).norm() < 1e-10 * d[i].max(1.0));
            }
        }
    }

    #[test]
    fn coverage_violation_detected() {
        // L = N: only one section, a length-2 window sees x[0] and x[N-1].
        let p = ProblemParams::new(6, 2, 6).unwrap();
        assert!(matches!(StftOperator::new(&p, &reals(&[1.0, 1.0])), Err(Error::CoverageViolation(1))));
    }
}
