//! Spectral statistics of undirected Rauzy graphs.
//!
//! Moments come from exact closed-walk counts; eigenvalues, when requested,
//! from a dense symmetric eigensolver. The two routes are compared.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rauzy::Multigraph;
use crate::wordgen::big_ratio;

pub const DEFAULT_MAX_MOMENT: usize = 8;
pub const DEFAULT_DENSE_CAP: usize = 4096;

fn ser_bigs<S: Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Exact closed-walk counts `trace(A^j)`, `j = 0..=max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkCounts {
    pub vertices: usize,
    #[serde(serialize_with = "ser_bigs")]
    pub traces: Vec<BigUint>,
}

impl WalkCounts {
    /// `m_j = trace(A^j) / p`.
    pub fn moment(&self, j: usize) -> f64 {
        big_ratio(&self.traces[j], &BigUint::from(self.vertices.max(1)))
    }

    pub fn moments(&self) -> Vec<f64> {
        (0..self.traces.len()).map(|j| self.moment(j)).collect()
    }
}

struct LocalBall {
    rows: Vec<Vec<(usize, u32)>>,
}

fn local_ball(g: &Multigraph, v: usize, radius: usize) -> LocalBall {
    let mut verts = vec![v];
    let mut dist = vec![0usize];
    let mut index = HashMap::from([(v, 0usize)]);
    let mut head = 0;
    while head < verts.len() {
        let (x, d) = (verts[head], dist[head]);
        head += 1;
        if d == radius {
            continue;
        }
        for w in g.neighbours(x) {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(w) {
                e.insert(verts.len());
                verts.push(w);
                dist.push(d + 1);
            }
        }
    }
    let rows = verts
        .iter()
        .map(|&x| {
            g.row(x)
                .iter()
                .filter_map(|&(w, m)| index.get(&(w as usize)).map(|&i| (i, m)))
                .collect()
        })
        .collect();
    LocalBall { rows }
}

/// `(A^j)_vv` for `j = 0..=max` in `u128`, `None` on overflow.
fn vertex_counts_small(ball: &LocalBall, max: usize) -> Option<Vec<u128>> {
    let half = max.div_ceil(2);
    let size = ball.rows.len();
    let mut xs: Vec<Vec<u128>> = Vec::with_capacity(half + 1);
    let mut x = vec![0u128; size];
    x[0] = 1;
    xs.push(x);
    for t in 0..half {
        let prev = &xs[t];
        let mut next = vec![0u128; size];
        for (i, row) in ball.rows.iter().enumerate() {
            let mut acc = 0u128;
            for &(w, m) in row {
                acc = acc.checked_add((m as u128).checked_mul(prev[w])?)?;
            }
            next[i] = acc;
        }
        xs.push(next);
    }
    (0..=max)
        .map(|j| {
            let (a, b) = (j / 2, j - j / 2);
            xs[a]
                .iter()
                .zip(&xs[b])
                .try_fold(0u128, |acc, (p, q)| acc.checked_add(p.checked_mul(*q)?))
        })
        .collect()
}

fn vertex_counts_big(ball: &LocalBall, max: usize) -> Vec<BigUint> {
    let half = max.div_ceil(2);
    let size = ball.rows.len();
    let mut xs: Vec<Vec<BigUint>> = Vec::with_capacity(half + 1);
    let mut x = vec![BigUint::zero(); size];
    x[0] = BigUint::from(1u8);
    xs.push(x);
    for t in 0..half {
        let prev = &xs[t];
        let next = ball
            .rows
            .iter()
            .map(|row| row.iter().map(|&(w, m)| &prev[w] * m).sum())
            .collect();
        xs.push(next);
    }
    (0..=max)
        .map(|j| {
            let (a, b) = (j / 2, j - j / 2);
            xs[a].iter().zip(&xs[b]).map(|(p, q)| p * q).sum()
        })
        .collect()
}

#[derive(Clone)]
struct Acc {
    small: Vec<u128>,
    big: Vec<BigUint>,
}

impl Acc {
    fn new(len: usize) -> Self {
        Acc {
            small: vec![0; len],
            big: vec![BigUint::zero(); len],
        }
    }

    fn add_small(&mut self, v: &[u128]) {
        for (j, &x) in v.iter().enumerate() {
            match self.small[j].checked_add(x) {
                Some(s) => self.small[j] = s,
                None => {
                    self.big[j] += BigUint::from(self.small[j]) + BigUint::from(x);
                    self.small[j] = 0;
                }
            }
        }
    }

    fn add_big(&mut self, v: Vec<BigUint>) {
        for (j, x) in v.into_iter().enumerate() {
            self.big[j] += x;
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        self.add_small(&other.small);
        self.add_big(other.big);
        self
    }

    fn finish(self) -> Vec<BigUint> {
        self.small
            .into_iter()
            .zip(self.big)
            .map(|(s, b)| b + BigUint::from(s))
            .collect()
    }
}

/// Exact `trace(A^j)` for `j <= max`, never wrapping: per-vertex counts that
/// overflow `u128` are redone with big integers.
pub fn walk_counts(g: &Multigraph, max: usize) -> WalkCounts {
    let half = max.div_ceil(2);
    let traces = (0..g.vertex_count())
        .into_par_iter()
        .fold(
            || Acc::new(max + 1),
            |mut acc, v| {
                let ball = local_ball(g, v, half);
                match vertex_counts_small(&ball, max) {
                    Some(c) => acc.add_small(&c),
                    None => acc.add_big(vertex_counts_big(&ball, max)),
                }
                acc
            },
        )
        .reduce(|| Acc::new(max + 1), Acc::merge)
        .finish();
    WalkCounts {
        vertices: g.vertex_count(),
        traces,
    }
}

/// `m_0..=m_max` with `max >= 2`.
pub fn moments(g: &Multigraph, max: usize) -> Result<Vec<f64>> {
    if max < 2 {
        return Err(Error::Config(format!("moment order must be at least 2, got {max}")));
    }
    Ok(walk_counts(g, max).moments())
}

/// Eigenvalues of the adjacency matrix, ascending.
pub fn dense_spectrum(g: &Multigraph, cap: usize) -> Result<Vec<f64>> {
    let p = g.vertex_count();
    if p > cap {
        return Err(Error::CapExceeded { vertices: p, cap });
    }
    if p == 0 {
        return Ok(Vec::new());
    }
    let mut a = DMatrix::<f64>::zeros(p, p);
    for v in 0..p {
        for &(w, m) in g.row(v) {
            a[(v, w as usize)] = m as f64;
        }
    }
    let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `C(2j, j)` for even orders, 0 for odd ones, exact.
pub fn arcsine_moment_exact(order: usize) -> BigUint {
    if order % 2 == 1 {
        return BigUint::zero();
    }
    let j = order / 2;
    let mut c = BigUint::from(1u8);
    for i in 0..j {
        c = c * (2 * j - i) / (i + 1);
    }
    c
}

/// Moments `0..=max` of the arcsine law on `[-2, 2]`.
pub fn arcsine_reference(max: usize) -> Vec<f64> {
    (0..=max)
        .map(|j| arcsine_moment_exact(j).to_f64().unwrap_or(f64::INFINITY))
        .collect()
}

pub fn arcsine_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + (x / 2.0).asin() / PI
    }
}

/// Sup distance between the empirical CDF of `eigenvalues` and the arcsine
/// CDF, evaluated on both sides of every jump.
pub fn ks_distance(eigenvalues: &[f64]) -> Result<f64> {
    if eigenvalues.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut ev = eigenvalues.to_vec();
    ev.sort_by(f64::total_cmp);
    let p = ev.len() as f64;
    let mut sup = 0f64;
    let mut i = 0;
    while i < ev.len() {
        let x = ev[i];
        let mut j = i;
        while j < ev.len() && ev[j] == x {
            j += 1;
        }
        let f = arcsine_cdf(x);
        sup = sup.max((i as f64 / p - f).abs()).max((j as f64 / p - f).abs());
        i = j;
    }
    Ok(sup)
}

/// `|m_2 p(n) - 2 p(n+1)|` against the bound `4k² + 4k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecondMomentCheck {
    pub residual: u64,
    pub bound: u64,
    pub passed: bool,
}

/// `trace(A²) = m_2 p(n)` is passed exactly.
pub fn second_moment_identity(trace2: &BigUint, p_next: usize, k: usize) -> SecondMomentCheck {
    let lhs = trace2.to_u128().expect("second walk count of a Rauzy graph fits u128") as i128;
    let residual = (lhs - 2 * p_next as i128).unsigned_abs() as u64;
    let bound = (4 * k * k + 4 * k) as u64;
    SecondMomentCheck {
        residual,
        bound,
        passed: residual <= bound,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `p · (F(b) - F(a))` for the arcsine CDF `F`.
    pub arcsine_expected: Vec<f64>,
}

/// Equal-width bins over `[min(-2, λ_min), max(2, λ_max)]`.
pub fn histogram(eigenvalues: &[f64], bins: usize) -> Histogram {
    let bins = bins.max(1);
    let lo = eigenvalues.iter().copied().fold(-2.0f64, f64::min);
    let hi = eigenvalues.iter().copied().fold(2.0f64, f64::max);
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0; bins];
    for &x in eigenvalues {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let p = eigenvalues.len() as f64;
    let arcsine_expected = edges
        .windows(2)
        .map(|e| p * (arcsine_cdf(e[1]) - arcsine_cdf(e[0])))
        .collect();
    Histogram {
        edges,
        counts,
        arcsine_expected,
    }
}

/// Groups numerically equal eigenvalues as `(value, multiplicity)`.
pub fn with_multiplicities(eigenvalues: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &x in eigenvalues {
        match out.last_mut() {
            Some((sum, m, first)) if (x - *first).abs() <= tol * first.abs().max(1.0) => {
                *sum += x;
                *m += 1;
            }
            _ => out.push((x, 1, x)),
        }
    }
    out.into_iter().map(|(s, m, _)| (s / m as f64, m)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub n: usize,
    pub vertices: usize,
    pub walk_counts: WalkCounts,
    pub moments: Vec<f64>,
    /// `|m_j - C(j)|` against the arcsine moments.
    pub moment_gaps: Vec<f64>,
    pub eigenvalues: Option<Vec<f64>>,
    pub ks_distance: Option<f64>,
    /// Largest `|Σ λ^j / p - m_j| / max(1, m_j)` when both routes ran.
    pub moment_consistency: Option<f64>,
}

impl SpectralSummary {
    pub fn second_moment(&self, p_next: usize, k: usize) -> SecondMomentCheck {
        second_moment_identity(&self.walk_counts.traces[2], p_next, k)
    }

    /// `eigenvalue,multiplicity` rows.
    pub fn write_spectrum_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "eigenvalue,multiplicity")?;
        for (x, m) in with_multiplicities(self.eigenvalues.as_deref().unwrap_or(&[]), 1e-9) {
            writeln!(out, "{x:.12},{m}")?;
        }
        Ok(())
    }
}

/// Moments up to `max`, plus the dense spectrum when `p <= dense_cap`.
pub fn spectral_summary(g: &Multigraph, n: usize, max: usize, dense_cap: Option<usize>) -> Result<SpectralSummary> {
    if max < 2 {
        return Err(Error::Config(format!("moment order must be at least 2, got {max}")));
    }
    let walk_counts = walk_counts(g, max);
    let moments = walk_counts.moments();
    let reference = arcsine_reference(max);
    let moment_gaps = moments.iter().zip(&reference).map(|(m, c)| (m - c).abs()).collect();
    let eigenvalues = match dense_cap {
        Some(cap) if g.vertex_count() <= cap && g.vertex_count() > 0 => Some(dense_spectrum(g, cap)?),
        _ => None,
    };
    let ks = eigenvalues.as_deref().map(ks_distance).transpose()?;
    let moment_consistency = eigenvalues.as_deref().map(|ev| {
        let p = ev.len() as f64;
        (0..=max)
            .map(|j| {
                let s: f64 = ev.iter().map(|x| x.powi(j as i32)).sum::<f64>() / p;
                (s - moments[j]).abs() / moments[j].abs().max(1.0)
            })
            .fold(0.0, f64::max)
    });
    Ok(SpectralSummary {
        n,
        vertices: g.vertex_count(),
        walk_counts,
        moments,
        moment_gaps,
        eigenvalues,
        ks_distance: ks,
        moment_consistency,
    })
}
