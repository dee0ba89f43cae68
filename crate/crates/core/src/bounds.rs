//! Measurement counts that suffice for recovery, and the index sets that
//! realize them.
//!
//! Known window: `2(2W-1) + ceil((4a-1)(N-W-a)/a)`. Blind:
//! `3(2W-1) + ceil((4a-1)(N-W-2a)/a)`. In both, the recursion term is
//! clamped at zero once the initial blocks already pin down every entry.
//!
//! A measurement set is a list of [`Block`]s. Each block takes frequencies
//! `m = 0..count` at the section whose shift is `j * alpha`. The initial
//! blocks use `2W-1` frequencies. Each full recursion block uses `4a-1`
//! and recovers `a` new signal entries. A trailing partial block that
//! recovers `s < a` entries uses `4s`, which makes every set exactly as
//! large as its bound.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemParams;

/// Version tag written into every CSV this crate emits.
pub const SCHEMA_VERSION: u32 = 1;
/// Samples in the blind closure block.
pub const CLOSURE_SAMPLES: usize = 3;

fn recursion_term(params: &ProblemParams, remaining: i64) -> usize {
    let a = params.alpha() as i64;
    if remaining <= 0 {
        0
    } else {
        ((4 * a - 1) * remaining).div_euclid(a) as usize + usize::from((4 * a - 1) * remaining % a != 0)
    }
}

fn known_remaining(params: &ProblemParams) -> i64 {
    params.n() as i64 - params.w() as i64 - params.alpha() as i64
}

fn blind_remaining(params: &ProblemParams) -> i64 {
    params.n() as i64 - params.w() as i64 - 2 * params.alpha() as i64
}

pub fn known_window_bound(params: &ProblemParams) -> usize {
    2 * (2 * params.w() - 1) + recursion_term(params, known_remaining(params))
}

pub fn blind_bound(params: &ProblemParams) -> usize {
    3 * (2 * params.w() - 1) + recursion_term(params, blind_remaining(params))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub known_window_count: usize,
    pub blind_count: usize,
    pub four_n: usize,
    pub four_n_plus_2w: usize,
    pub alpha: usize,
}

pub fn bound_report(params: &ProblemParams) -> BoundReport {
    BoundReport {
        known_window_count: known_window_bound(params),
        blind_count: blind_bound(params),
        four_n: 4 * params.n(),
        four_n_plus_2w: 4 * params.n() + 2 * params.w(),
        alpha: params.alpha(),
    }
}

/// Frequencies `0..count` at the section with shift `j * alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub j: i64,
    pub r: usize,
    pub count: usize,
}

impl Block {
    fn new(params: &ProblemParams, j: i64, count: usize) -> Self {
        Self {
            j,
            r: params.shift_index(j),
            count,
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.count).map(move |m| (m, self.r))
    }
}

/// Common preconditions for the constructive sets: overlapping sections,
/// enough distinct frequencies for every block, and distinct sections.
fn check_common(params: &ProblemParams, initial_sections: usize, max_block: usize) -> Result<()> {
    let (n, w, a) = (params.n(), params.w(), params.alpha());
    if w < 2 {
        return Err(Error::Precondition(format!("window length must be at least 2 (W={w})")));
    }
    if w <= a {
        return Err(Error::Precondition(format!(
            "consecutive sections must overlap, need W > alpha (W={w}, alpha={a})"
        )));
    }
    if n < 2 * w - 1 {
        return Err(Error::Precondition(format!("need N >= 2W-1 (N={n}, W={w})")));
    }
    if n < max_block {
        return Err(Error::Precondition(format!(
            "need N >= {max_block} distinct frequencies per block (N={n})"
        )));
    }
    if params.sections() < initial_sections {
        return Err(Error::Precondition(format!(
            "need at least {initial_sections} sections, got R={}",
            params.sections()
        )));
    }
    Ok(())
}

/// Recursion blocks for `remaining` entries starting at shift index 2.
fn recursion_blocks(params: &ProblemParams, remaining: i64) -> Vec<Block> {
    let a = params.alpha();
    if remaining <= 0 {
        return Vec::new();
    }
    let remaining = remaining as usize;
    let (q, s) = (remaining / a, remaining % a);
    let mut blocks: Vec<Block> = (0..q).map(|i| Block::new(params, 2 + i as i64, 4 * a - 1)).collect();
    if s > 0 {
        blocks.push(Block::new(params, 2 + q as i64, 4 * s));
    }
    blocks
}

fn max_count(blocks: &[Block]) -> usize {
    blocks.iter().map(|b| b.count).max().unwrap_or(0)
}

/// Blocks at `j = 0, 1`, then the recursion.
pub fn known_window_blocks(params: &ProblemParams) -> Result<Vec<Block>> {
    let step1 = 2 * params.w() - 1;
    let mut blocks = vec![Block::new(params, 0, step1), Block::new(params, 1, step1)];
    blocks.extend(recursion_blocks(params, known_remaining(params)));
    check_common(params, 2, max_count(&blocks))?;
    Ok(blocks)
}

/// Blocks at `j = 0, 1, -1`, then the recursion.
pub fn blind_blocks(params: &ProblemParams) -> Result<Vec<Block>> {
    let step1 = 2 * params.w() - 1;
    let mut blocks = vec![
        Block::new(params, 0, step1),
        Block::new(params, 1, step1),
        Block::new(params, -1, step1),
    ];
    blocks.extend(recursion_blocks(params, blind_remaining(params)));
    check_common(params, 3, max_count(&blocks))?;
    Ok(blocks)
}

fn flatten(blocks: &[Block]) -> Vec<(usize, usize)> {
    blocks.iter().flat_map(|b| b.indices().collect::<Vec<_>>()).collect()
}

pub fn known_window_measurement_set(params: &ProblemParams) -> Result<Vec<(usize, usize)>> {
    Ok(flatten(&known_window_blocks(params)?))
}

pub fn blind_measurement_set(params: &ProblemParams) -> Result<Vec<(usize, usize)>> {
    Ok(flatten(&blind_blocks(params)?))
}

/// Extra block that ties the blind recursion back to its start when no
/// recursion block wraps around the signal.
///
/// When `alpha` divides `N - W`, the bound-sized blind set leaves a
/// one-parameter family of solutions: every magnitude in it is unchanged by
/// `x[t] -> x[t] e^{i ceil(t/alpha) d}`, `w[n] -> w[n] e^{i floor(n/alpha) d}`
/// for any real `d`. Only `d` in `(2 pi / R) Z` is a true ambiguity. The
/// closure block sits one shift past the last recovered entry, where the
/// section mixes freshly recovered entries with wrapped ones, and pins `d`.
/// It is empty when the last recursion block is partial, since that block
/// already wraps.
pub fn blind_closure_block(params: &ProblemParams) -> Result<Option<Block>> {
    let blocks = blind_blocks(params)?;
    let remaining = blind_remaining(params).max(0) as usize;
    if !remaining.is_multiple_of(params.alpha()) {
        return Ok(None);
    }
    let j = 2 + (remaining / params.alpha()) as i64;
    if j >= params.sections() as i64 - 1 {
        return Err(Error::Precondition(format!(
            "no free section for the closure block (R={}, needs shift index {j} < R-1)",
            params.sections()
        )));
    }
    let block = Block::new(params, j, CLOSURE_SAMPLES);
    debug_assert!(blocks.iter().all(|b| b.r != block.r));
    Ok(Some(block))
}

/// Bound-sized blind set plus the closure block, if any.
pub fn blind_measurement_set_closed(params: &ProblemParams) -> Result<Vec<(usize, usize)>> {
    let mut set = blind_measurement_set(params)?;
    if let Some(b) = blind_closure_block(params)? {
        set.extend(b.indices());
    }
    Ok(set)
}

/// One row of the bound-curve table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRow {
    pub l: usize,
    pub w: usize,
    pub known: usize,
    pub blind: usize,
    pub cap_known: usize,
    pub cap_blind: usize,
}

/// Bounds for every `(L, W)` with `W <= N`, `L <= N`.
pub fn bound_curves(n: usize, l_list: &[usize], w_range: impl IntoIterator<Item = usize> + Clone) -> Vec<BoundRow> {
    let mut rows = Vec::new();
    for &l in l_list {
        for w in w_range.clone() {
            let Ok(p) = ProblemParams::new(n, w, l) else {
                continue;
            };
            rows.push(BoundRow {
                l,
                w,
                known: known_window_bound(&p),
                blind: blind_bound(&p),
                cap_known: 4 * n,
                cap_blind: 4 * n + 2 * w,
            });
        }
    }
    rows
}

/// CSV `L,W,known,blind,cap_known,cap_blind,schema_version`.
pub fn write_bound_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["L", "W", "known", "blind", "cap_known", "cap_blind", "schema_version"])?;
    for r in rows {
        wtr.write_record(
            [r.l, r.w, r.known, r.blind, r.cap_known, r.cap_blind, SCHEMA_VERSION as usize].map(|v| v.to_string()),
        )?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn p(n: usize, w: usize, l: usize) -> ProblemParams {
        ProblemParams::new(n, w, l).unwrap()
    }

    #[test]
    fn bound_examples() {
        assert_eq!(known_window_bound(&p(11, 3, 1)), 31);
        assert_eq!(known_window_bound(&p(100, 10, 4)), 361);
        assert_eq!(known_window_bound(&p(8, 8, 1)), 30);
        assert_eq!(blind_bound(&p(11, 3, 1)), 33);
        assert_eq!(blind_bound(&p(100, 20, 1)), 351);
        assert_eq!(blind_bound(&p(10, 9, 1)), 3 * 17);
    }

    #[test]
    fn sets_match_bounds_and_are_valid() {
        for n in 3..=128usize {
            let steps = (1..=n).filter(|l| n % l == 0 || l % (n / 8).max(1) == 1);
            for l in steps {
                for w in 2..=n.div_ceil(2) + 1 {
                    let par = p(n, w, l);
                    for (set, bound) in [
                        (known_window_measurement_set(&par), known_window_bound(&par)),
                        (blind_measurement_set(&par), blind_bound(&par)),
                    ] {
                        let Ok(set) = set else { continue };
                        assert_eq!(set.len(), bound, "N={n} W={w} L={l}");
                        let uniq: HashSet<_> = set.iter().collect();
                        assert_eq!(uniq.len(), set.len());
                        assert!(set.iter().all(|&(m, r)| m < n && r < par.sections()));
                    }
                }
            }
        }
    }

    #[test]
    fn set_examples() {
        let par = p(11, 3, 1);
        let set = known_window_measurement_set(&par).unwrap();
        assert_eq!(set.len(), 31);
        let rs: Vec<usize> = known_window_blocks(&par).unwrap().iter().map(|b| b.r).collect();
        assert_eq!(rs, (0..9).collect::<Vec<_>>());
        assert_eq!(blind_measurement_set(&par).unwrap().len(), 33);
        let b = blind_blocks(&par).unwrap();
        assert_eq!(b[2].r * par.l() % 11, 11 - par.alpha());
        let clamp = known_window_blocks(&p(3, 2, 1)).unwrap();
        assert_eq!(clamp.len(), 2);
        assert_eq!(clamp.iter().map(|b| b.count).sum::<usize>(), 6);
        assert_eq!(known_window_measurement_set(&p(100, 10, 4)).unwrap().len(), 361);
    }

    #[test]
    fn preconditions() {
        assert!(known_window_measurement_set(&p(8, 1, 1)).is_err());
        assert!(known_window_measurement_set(&p(8, 5, 1)).is_err());
        assert!(known_window_measurement_set(&p(12, 3, 4)).is_err());
        assert!(blind_measurement_set(&p(8, 3, 8)).is_err());
    }

    #[test]
    fn closure_block() {
        let par = p(12, 3, 1);
        let c = blind_closure_block(&par).unwrap().unwrap();
        assert_eq!(c.count, CLOSURE_SAMPLES);
        assert_eq!(c.j, 2 + 7);
        let set: HashSet<_> = blind_measurement_set(&par).unwrap().into_iter().collect();
        assert!(c.indices().all(|i| !set.contains(&i)));
        assert_eq!(blind_measurement_set_closed(&par).unwrap().len(), blind_bound(&par) + 3);
        // N - W - 2 alpha = 5 is not a multiple of alpha = 2: the partial block wraps.
        assert!(blind_closure_block(&p(16, 7, 2)).unwrap().is_none());
    }

    #[test]
    fn caps_and_inequality() {
        for l in [1, 2, 3, 4, 5, 7] {
            for w in 2..=100 {
                let par = p(100, w, l);
                if w + par.alpha() > 100 {
                    continue;
                }
                let k = known_window_bound(&par);
                assert!(k < 400);
                assert!(blind_bound(&par) < 400 + 2 * w);
                let rhs = 400.0 - (100.0 - w as f64) / par.alpha() as f64 - 1.0;
                assert!((k as f64) < rhs);
            }
        }
    }

    #[test]
    fn prime_length_curves_ignore_step() {
        let rows = bound_curves(101, &[1, 2, 3, 5], 2..=60);
        for r in &rows {
            let first = rows.iter().find(|q| q.w == r.w && q.l == 1).unwrap();
            assert_eq!((r.known, r.blind), (first.known, first.blind));
        }
        assert_eq!(bound_curves(100, &[4], [10]).len(), 1);
        let mut buf = Vec::new();
        write_bound_csv(&rows[..2], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("L,W,known,blind,cap_known,cap_blind,schema_version\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
