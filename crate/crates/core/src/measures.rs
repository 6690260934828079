//! Cylinder-frequency estimates of invariant measures, uniform-frequency
//! profiles and the Cassaigne–Kaboré oscillation.

use std::io::Write;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::language::{extensions, factor_ladder, LanguageSlice, SpecialWord};
use crate::show_word;
use crate::wordgen::{ck_lengths_and_zero_counts, ck_words, Alphabet, CkSchedule};

fn ser_word<S: Serializer>(w: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&show_word(w))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderEstimate {
    pub n: usize,
    #[serde(serialize_with = "ser_word")]
    pub word: Vec<u8>,
    pub p: usize,
    pub suffix_count: usize,
    /// `|{w ∈ L_n : w ends with u}| / p(n)`
    pub suffix_frequency: f64,
    /// Occurrence counts of `u` at offset `j`, `j = 0..=n-|u|`.
    pub offset_counts: Vec<usize>,
    pub offset_frequencies: Vec<f64>,
}

pub fn cylinder_estimate(ln: &LanguageSlice, u: &[u8]) -> Result<CylinderEstimate> {
    let n = ln.n();
    if u.len() > n || u.is_empty() {
        return Err(Error::WindowLength { n: u.len(), len: n });
    }
    let mut offset_counts = vec![0usize; n - u.len() + 1];
    for w in ln.iter() {
        for (j, c) in offset_counts.iter_mut().enumerate() {
            if &w[j..j + u.len()] == u {
                *c += 1;
            }
        }
    }
    let p = ln.len();
    let freq = |c: usize| if p == 0 { 0.0 } else { c as f64 / p as f64 };
    let suffix_count = *offset_counts.last().expect("at least one offset");
    Ok(CylinderEstimate {
        n,
        word: u.to_vec(),
        p,
        suffix_count,
        suffix_frequency: freq(suffix_count),
        offset_frequencies: offset_counts.iter().map(|&c| freq(c)).collect(),
        offset_counts,
    })
}

/// `max_j |f(j) - f(j+1)|` over adjacent offsets; `None` with fewer than two.
pub fn shift_invariance_gap(est: &CylinderEstimate) -> Option<f64> {
    let gap = est.offset_counts.windows(2).map(|w| w[0].abs_diff(w[1])).max()?;
    Some(gap as f64 / est.p.max(1) as f64)
}

/// Extremes over start positions `k` of `|ω_k…ω_{k+n}|_u / (n+1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyProfile {
    #[serde(serialize_with = "ser_word")]
    pub word: Vec<u8>,
    /// Window covers `n + 1` letters.
    pub n: usize,
    pub windows: usize,
    pub inf: f64,
    pub sup: f64,
}

/// Occurrences are counted wherever `u` fits entirely inside the window.
pub fn uniform_frequency_profile(prefix: &[u8], u: &[u8], n: usize) -> Result<FrequencyProfile> {
    let w = n + 1;
    if u.is_empty() || prefix.len() < n + u.len() || prefix.len() < w || u.len() > w {
        return Err(Error::GeneratorExhausted {
            needed: (n + u.len()).max(w),
            available: prefix.len(),
        });
    }
    let mut cum = vec![0u32; prefix.len() - u.len() + 2];
    for i in 0..=prefix.len() - u.len() {
        cum[i + 1] = cum[i] + u32::from(&prefix[i..i + u.len()] == u);
    }
    let span = w - u.len() + 1;
    let windows = prefix.len() - w + 1;
    let (mut lo, mut hi) = (u32::MAX, 0u32);
    for k in 0..windows {
        let c = cum[k + span] - cum[k];
        lo = lo.min(c);
        hi = hi.max(c);
    }
    Ok(FrequencyProfile {
        word: u.to_vec(),
        n,
        windows,
        inf: lo as f64 / w as f64,
        sup: hi as f64 / w as f64,
    })
}

pub fn write_profile_csv<W: Write>(rows: &[FrequencyProfile], mut out: W) -> Result<()> {
    writeln!(out, "n,inf,sup")?;
    for r in rows {
        writeln!(out, "{},{:.9},{:.9}", r.n, r.inf, r.sup)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeftSpecialReport {
    pub n: usize,
    pub words: Vec<SpecialWord>,
    /// `Σ (ext - 1)` over the left-special words.
    pub excess: u64,
    pub growth: i64,
    pub e_l: usize,
    /// `excess == growth + e_l`
    pub consistent: bool,
}

pub fn left_special_report(ln: &LanguageSlice, ln1: &LanguageSlice) -> Result<LeftSpecialReport> {
    let ext = extensions(ln, ln1)?;
    let words: Vec<SpecialWord> = ext
        .left
        .iter()
        .enumerate()
        .filter(|(_, &x)| x >= 2)
        .map(|(i, &x)| SpecialWord {
            word: ln.get(i).to_vec(),
            extensions: x,
        })
        .collect();
    let excess = words.iter().map(|w| w.extensions as u64 - 1).sum();
    let growth = ln1.len() as i64 - ln.len() as i64;
    let e_l = ext.left.iter().filter(|&&x| x == 0).count();
    Ok(LeftSpecialReport {
        n: ln.n(),
        words,
        excess,
        growth,
        e_l,
        consistent: excess as i64 == growth + e_l as i64,
    })
}

fn ser_big<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

/// Open interval `a < n < b`, `b` stored doubled to stay integral.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Regime {
    #[serde(serialize_with = "ser_big")]
    pub a: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub b_twice: BigUint,
    pub nonempty: bool,
}

impl Regime {
    fn new(a: BigUint, b_twice: BigUint) -> Self {
        let nonempty = &a * 2u8 + 2u8 < b_twice;
        Regime { a, b_twice, nonempty }
    }

    pub fn contains(&self, n: usize) -> bool {
        let n = BigUint::from(n);
        self.a < n && &n * 2u8 < self.b_twice
    }

    /// A representative interior point, if the interval contains an integer
    /// and it fits `usize`.
    pub fn midpoint(&self) -> Option<usize> {
        if !self.nonempty {
            return None;
        }
        let mid: BigUint = (&self.a * 2u8 + &self.b_twice) / 4u8;
        let mid = usize::try_from(mid).ok()?;
        self.contains(mid).then_some(mid)
    }

    pub fn describe(&self) -> String {
        let half = &self.b_twice / 2u8;
        let b = if (&self.b_twice % 2u8) == BigUint::from(0u8) {
            half.to_string()
        } else {
            format!("{half}.5")
        };
        format!("({}, {b})", self.a)
    }
}

/// Regimes of one level, with the frequency predicted in each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRegimes {
    pub level: usize,
    /// `(2 l_i |v_i|, m_i |u_i| / 2)`
    pub first: Regime,
    /// `(2 m_i |u_i|, n_i |v_i| / 2)`
    pub second: Regime,
    pub alpha: f64,
    pub beta: f64,
    /// `(2α_i + β_i) / 3`
    pub first_prediction: f64,
    /// `(α_i + 2β_i) / 3`
    pub second_prediction: f64,
}

/// Regime bounds for levels `0..=depth`; empty regimes are reported, not
/// rejected.
pub fn ck_regimes(schedule: &CkSchedule, depth: usize) -> Result<Vec<LevelRegimes>> {
    if depth >= schedule.len() {
        return Err(Error::DepthExceedsSchedule {
            depth,
            len: schedule.len(),
        });
    }
    let counts = ck_lengths_and_zero_counts(schedule, depth)?;
    Ok(schedule.levels()[..=depth]
        .iter()
        .zip(&counts)
        .enumerate()
        .map(|(i, (lv, c))| {
            let first = Regime::new(&lv.l * &c.v_len * 2u8, &lv.m * &c.u_len);
            let second = Regime::new(&lv.m * &c.u_len * 2u8, &lv.n * &c.v_len);
            LevelRegimes {
                level: i,
                first,
                second,
                alpha: c.alpha,
                beta: c.beta,
                first_prediction: (2.0 * c.alpha + c.beta) / 3.0,
                second_prediction: (c.alpha + 2.0 * c.beta) / 3.0,
            }
        })
        .collect())
}

/// Words whose factors of length up to `n_max` are exactly the factors of
/// the limit word: the junctions `xy` of level-`j` blocks that occur in it,
/// at the first level whose blocks are longer than `n_max`.
pub fn ck_corpus(schedule: &CkSchedule, n_max: usize) -> Result<(usize, Vec<Vec<u8>>)> {
    let counts = ck_lengths_and_zero_counts(schedule, schedule.len() - 1)?;
    let need = BigUint::from(n_max + 1);
    let j = counts
        .iter()
        .position(|c| c.u_len >= need && c.v_len >= need)
        .ok_or_else(|| {
            Error::NotMaterializable(format!(
                "schedule {schedule} has no level with blocks longer than {n_max}"
            ))
        })?;
    let (u, v) = ck_words(schedule, j)?;
    let lv = &schedule.levels()[j];
    let two = BigUint::from(2u8);
    let cat = |x: &[u8], y: &[u8]| [x, y].concat();
    let mut corpus = vec![cat(&u, &v), cat(&v, &u)];
    if lv.m >= two {
        corpus.push(cat(&u, &u));
    }
    if lv.l >= two || lv.n >= two {
        corpus.push(cat(&v, &v));
    }
    Ok((j, corpus))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationRow {
    pub n: usize,
    pub p: usize,
    /// `|L_n^0| / p(n)`
    pub frequency: f64,
    pub growth: i64,
    pub left_special: usize,
    pub regime_tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CkOscillation {
    pub schedule: String,
    pub depth: usize,
    pub corpus_level: usize,
    pub regimes: Vec<LevelRegimes>,
    pub empty_regimes: Vec<String>,
    pub rows: Vec<OscillationRow>,
}

impl CkOscillation {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n,frequency,regime_tag")?;
        for r in &self.rows {
            writeln!(out, "{},{:.9},{}", r.n, r.frequency, r.regime_tag)?;
        }
        Ok(())
    }

    /// Row at the grid point closest to `n`.
    pub fn nearest(&self, n: usize) -> Option<&OscillationRow> {
        self.rows.iter().min_by_key(|r| r.n.abs_diff(n))
    }
}

pub fn regime_tag(regimes: &[LevelRegimes], n: usize) -> String {
    let tags: Vec<String> = regimes
        .iter()
        .flat_map(|lr| {
            [(1, &lr.first), (2, &lr.second)]
                .into_iter()
                .filter(|(_, r)| r.nonempty && r.contains(n))
                .map(move |(k, _)| format!("L{}R{k}", lr.level))
        })
        .collect();
    if tags.is_empty() {
        "-".into()
    } else {
        tags.join("+")
    }
}

/// `|L_n^0| / p(n)` over `grid`, regimes of levels `0..=depth` annotated.
pub fn ck_oscillation(schedule: &CkSchedule, depth: usize, grid: &[usize]) -> Result<CkOscillation> {
    let regimes = ck_regimes(schedule, depth)?;
    let empty_regimes = regimes
        .iter()
        .flat_map(|lr| {
            [(1, &lr.first), (2, &lr.second)]
                .into_iter()
                .filter(|(_, r)| !r.nonempty)
                .map(move |(k, r)| format!("level {} regime {k} {} is empty", lr.level, r.describe()))
        })
        .collect::<Vec<_>>();
    for e in &empty_regimes {
        log::warn!("{e}");
    }
    let mut grid: Vec<usize> = grid.iter().copied().filter(|&n| n >= 1).collect();
    grid.sort_unstable();
    grid.dedup();
    let n_max = grid.last().copied().unwrap_or(1);
    let (corpus_level, corpus) = ck_corpus(schedule, n_max + 1)?;
    let words: Vec<&[u8]> = corpus.iter().map(Vec::as_slice).collect();
    let mut ns: Vec<usize> = grid.iter().flat_map(|&n| [n, n + 1]).collect();
    ns.sort_unstable();
    ns.dedup();
    let alphabet = Alphabet::digits(2)?;
    let slices = factor_ladder(&words, &alphabet, &ns)?;
    let at = |n: usize| &slices[ns.binary_search(&n).expect("grid point in ladder")];
    let rows = grid
        .par_iter()
        .map(|&n| {
            let (ln, ln1) = (at(n), at(n + 1));
            let est = cylinder_estimate(ln, b"0")?;
            let ls = left_special_report(ln, ln1)?;
            Ok(OscillationRow {
                n,
                p: ln.len(),
                frequency: est.suffix_frequency,
                growth: ls.growth,
                left_special: ls.words.len(),
                regime_tag: regime_tag(&regimes, n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CkOscillation {
        schedule: schedule.to_string(),
        depth,
        corpus_level,
        regimes,
        empty_regimes,
        rows,
    })
}

/// Grid for the oscillation: the midpoint and quartiles of every nonempty
/// regime up to `n_cap`, plus a geometric sweep.
pub fn default_ck_grid(regimes: &[LevelRegimes], n_cap: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    for lr in regimes {
        for r in [&lr.first, &lr.second] {
            if let Some(mid) = r.midpoint() {
                let a = usize::try_from(r.a.clone()).unwrap_or(usize::MAX);
                for x in [a + (mid - a) / 2, mid, mid + (mid - a) / 2] {
                    if r.contains(x) && x <= n_cap {
                        grid.push(x);
                    }
                }
            }
        }
    }
    let mut n = 2usize;
    while n <= n_cap {
        grid.push(n);
        n = (n * 3).div_ceil(2);
    }
    grid.sort_unstable();
    grid.dedup();
    grid
}
