//! Convergence reports: the complexity ratio, local line fraction, spectral
//! moments and prolongability of one language, side by side.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::language::{
    adjoin_sentinel, almost_prolongable_diagnostic, factor_ladder, prolongation_census, sft_slice, LanguageSlice,
    ProlongabilityDiagnostic, ProlongationCensus,
};
use crate::localstat::{census, cycle_components, undirected_census, CycleCensus};
use crate::measures::{
    ck_corpus, ck_regimes, cylinder_estimate, left_special_report, regime_tag, shift_invariance_gap,
    uniform_frequency_profile, FrequencyProfile, LevelRegimes,
};
use crate::rauzy::{build_digraph, underlying_graph};
use crate::show_word;
use crate::spectra::{spectral_summary, SecondMomentCheck};
use crate::wordgen::{Alphabet, CkSchedule, WordSource};

pub const SCHEMA_VERSION: u32 = 1;

/// Verdict thresholds. A trend verdict is positive when the last grid point
/// meets its threshold and is no worse than the third-to-last one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    /// `p(n+1)/p(n) <= ratio`
    pub ratio: f64,
    /// undirected line fraction at `line_radius` `>= line_fraction`
    pub line_fraction: f64,
    pub line_radius: usize,
    /// `max_{1<=j<=moment_order} |m_j - C(j)| < moment_gap`
    pub moment_gap: f64,
    pub moment_order: usize,
    /// `e_l/p, e_r/p <= almost_prolongable` at the largest `n`
    pub almost_prolongable: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ratio: 1.05,
            line_fraction: 0.9,
            line_radius: 2,
            moment_gap: 0.5,
            moment_order: 4,
            almost_prolongable: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeConfig {
    pub source: WordSource,
    /// Prefix length `N` for word sources.
    pub prefix_len: usize,
    pub n_grid: Vec<usize>,
    pub radii: Vec<usize>,
    pub max_moment: usize,
    pub dense_cap: usize,
    /// `n + 1 <= N / truncation_ratio` for prefix-based languages.
    pub truncation_ratio: usize,
    pub sentinel: Option<u8>,
    pub cylinders: Vec<Vec<u8>>,
    pub oscillation: bool,
    /// Regime annotation for oscillation rows of non-CK sources.
    pub ck_schedule: Option<CkSchedule>,
    pub profile_ns: Vec<usize>,
    pub thresholds: Thresholds,
}

impl AnalyzeConfig {
    pub fn new(source: WordSource) -> Self {
        AnalyzeConfig {
            source,
            prefix_len: 1_000_000,
            n_grid: vec![10, 50, 100, 200],
            radii: vec![1, 2, 3],
            max_moment: crate::spectra::DEFAULT_MAX_MOMENT,
            dense_cap: crate::spectra::DEFAULT_DENSE_CAP,
            truncation_ratio: 100,
            sentinel: None,
            cylinders: Vec::new(),
            oscillation: false,
            ck_schedule: None,
            profile_ns: Vec::new(),
            thresholds: Thresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::Config("n grid must be nonempty and positive".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n grid must be strictly ascending".into()));
        }
        if self.radii.is_empty() || self.radii.contains(&0) {
            return Err(Error::Config("radii must be nonempty and positive".into()));
        }
        if self.max_moment < 2 {
            return Err(Error::Config("moment order must be at least 2".into()));
        }
        if self.prefix_len == 0 || self.dense_cap == 0 || self.truncation_ratio == 0 {
            return Err(Error::Config(
                "prefix length, eigensolve cap and truncation ratio must be positive".into(),
            ));
        }
        if self.thresholds.moment_order > self.max_moment {
            return Err(Error::Config(format!(
                "moment verdict order {} exceeds computed order {}",
                self.thresholds.moment_order, self.max_moment
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusRow {
    pub r: usize,
    /// Roots of the undirected graph whose ball is the centred `2r`-path.
    pub undirected: f64,
    /// Same for the digraph and the directed path.
    pub directed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderRow {
    pub word: String,
    pub suffix_frequency: f64,
    pub shift_invariance_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub p: usize,
    pub p_next: usize,
    /// Exact `p(n+1)/p(n)` as `a/b`.
    pub ratio: String,
    pub ratio_value: f64,
    pub e_l_ratio: f64,
    pub e_r_ratio: f64,
    pub r_ratio: f64,
    /// Census with the left-special list replaced by its length.
    pub census: ProlongationCensus,
    pub left_special_count: usize,
    pub census_violations: Vec<String>,
    pub line_fraction: Vec<RadiusRow>,
    pub moments: Vec<f64>,
    pub moment_gaps: Vec<f64>,
    pub second_moment: SecondMomentCheck,
    pub ks_distance: Option<f64>,
    pub moment_consistency: Option<f64>,
    pub cycles: CycleCensus,
    pub cycle_bound_violations: Vec<usize>,
    pub cylinders: Vec<CylinderRow>,
}

/// Everything the report derives from one pair `(L_n, L_{n+1})`.
pub fn analyze_pair(ln: &LanguageSlice, ln1: &LanguageSlice, cfg: &AnalyzeConfig) -> Result<ReportRow> {
    let n = ln.n();
    let k = ln.alphabet().k();
    let mut c = prolongation_census(ln, ln1)?;
    let census_violations = c.violations();
    let left_special_count = c.left_special.len();
    c.left_special.clear();
    let g = build_digraph(ln, ln1, true)?;
    let mg = underlying_graph(&g);
    let line_fraction = cfg
        .radii
        .iter()
        .map(|&r| RadiusRow {
            r,
            undirected: undirected_census(&mg, r).path_fraction,
            directed: census(&g, r, false).path_fraction,
        })
        .collect();
    let cycles = cycle_components(&g);
    let cycle_bound_violations = cycles.bound_violations(k, n);
    let spec = spectral_summary(&mg, n, cfg.max_moment, Some(cfg.dense_cap))?;
    let second_moment = spec.second_moment(ln1.len(), k);
    let cylinders = cfg
        .cylinders
        .iter()
        .filter(|u| u.len() <= n)
        .map(|u| {
            let est = cylinder_estimate(ln, u)?;
            Ok(CylinderRow {
                word: show_word(u),
                suffix_frequency: est.suffix_frequency,
                shift_invariance_gap: shift_invariance_gap(&est),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let p = ln.len().max(1) as f64;
    let ratio_num = num_rational::Ratio::new(ln1.len() as u64, ln.len().max(1) as u64);
    Ok(ReportRow {
        n,
        p: ln.len(),
        p_next: ln1.len(),
        ratio: format!("{}/{}", ratio_num.numer(), ratio_num.denom()),
        ratio_value: ln1.len() as f64 / p,
        e_l_ratio: c.e_l as f64 / p,
        e_r_ratio: c.e_r as f64 / p,
        r_ratio: c.r as f64 / p,
        census: c,
        left_special_count,
        census_violations,
        line_fraction,
        moments: spec.moments,
        moment_gaps: spec.moment_gaps,
        second_moment,
        ks_distance: spec.ks_distance,
        moment_consistency: spec.moment_consistency,
        cycles,
        cycle_bound_violations,
        cylinders,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub ratio_to_one: Option<bool>,
    pub line_fraction_to_one: Option<bool>,
    pub moments_to_arcsine: Option<bool>,
    pub almost_prolongable: Option<bool>,
    /// `consistent`, `expected-disagreement` (the language is not almost
    /// prolongable) or `inconsistent`.
    pub agreement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixFrequency {
    pub word: String,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationSection {
    pub letter: String,
    pub regimes: Vec<LevelRegimes>,
    pub rows: Vec<crate::measures::OscillationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub generator: String,
    pub alphabet: String,
    pub sentinel: Option<String>,
    /// Where the factors come from: a prefix, a junction corpus or an
    /// enumeration.
    pub language_origin: String,
    pub prefix_length: Option<usize>,
    pub max_n: usize,
    pub n_grid: Vec<usize>,
    pub radii: Vec<usize>,
    pub max_moment: usize,
    pub thresholds: Thresholds,
    pub rows: Vec<ReportRow>,
    pub prolongability: ProlongabilityDiagnostic,
    pub prefix_frequencies: Vec<PrefixFrequency>,
    pub oscillation: Option<OscillationSection>,
    pub profiles: Vec<FrequencyProfile>,
    pub verdicts: Verdicts,
    pub warnings: Vec<String>,
}

/// Factor slices of a source at the requested lengths.
pub struct LanguageData {
    pub origin: String,
    pub alphabet: Alphabet,
    pub prefix: Option<Vec<u8>>,
    pub slices: BTreeMap<usize, LanguageSlice>,
}

/// Builds `L_n` for every `n` in `ns`. Prefix-based languages obey the
/// truncation guard on the largest `n`.
pub fn language_data(cfg: &AnalyzeConfig, ns: &[usize]) -> Result<LanguageData> {
    let top = ns.iter().copied().max().unwrap_or(0);
    let positive: Vec<usize> = ns.iter().copied().filter(|&n| n > 0).collect();
    let alphabet = cfg.source.alphabet()?;
    let (origin, prefix, mut slices) = match &cfg.source {
        WordSource::FullShift { .. } => {
            let slices = positive
                .iter()
                .map(|&n| Ok((n, sft_slice(&alphabet, &[], n)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            ("full shift enumeration".to_string(), None, slices)
        }
        WordSource::CassaigneKabore(schedule) => {
            let (level, corpus) = ck_corpus(schedule, top)?;
            let words: Vec<&[u8]> = corpus.iter().map(Vec::as_slice).collect();
            let ladder = factor_ladder(&words, &alphabet, &positive)?;
            let prefix = cfg.source.prefix(cfg.prefix_len).ok();
            (
                format!("junction corpus of level {level}"),
                prefix,
                positive.iter().copied().zip(ladder).collect(),
            )
        }
        source => {
            let n_limit = cfg.prefix_len / cfg.truncation_ratio;
            if top > n_limit {
                return Err(Error::TruncationGuard {
                    n: top,
                    prefix_len: cfg.prefix_len,
                    ratio: cfg.truncation_ratio,
                });
            }
            let prefix = source.prefix(cfg.prefix_len)?;
            let ladder = factor_ladder(&[&prefix], &alphabet, &positive)?;
            (
                format!("prefix of length {}", cfg.prefix_len),
                Some(prefix),
                positive.iter().copied().zip(ladder).collect(),
            )
        }
    };
    if ns.contains(&0) {
        slices.insert(0, LanguageSlice::empty_word(alphabet.clone()));
    }
    Ok(LanguageData {
        origin,
        alphabet,
        prefix,
        slices,
    })
}

fn trend(values: &[f64], good: impl Fn(f64) -> bool, no_worse: impl Fn(f64, f64) -> bool) -> Option<bool> {
    let tail = &values[values.len().saturating_sub(3)..];
    let (&first, &last) = (tail.first()?, tail.last()?);
    Some(good(last) && no_worse(last, first))
}

pub fn verdicts(rows: &[ReportRow], diag: &ProlongabilityDiagnostic, t: &Thresholds) -> Verdicts {
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio_value).collect();
    let ratio_to_one = trend(&ratios, |x| x <= t.ratio, |a, b| a <= b);
    let lines: Option<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.line_fraction
                .iter()
                .find(|x| x.r == t.line_radius)
                .map(|x| x.undirected)
        })
        .collect();
    let line_fraction_to_one = lines.and_then(|v| trend(&v, |x| x >= t.line_fraction, |a, b| a >= b));
    let gaps: Vec<f64> = rows
        .iter()
        .map(|r| r.moment_gaps[1..=t.moment_order].iter().copied().fold(0.0, f64::max))
        .collect();
    let moments_to_arcsine = trend(&gaps, |x| x < t.moment_gap, |a, b| a <= b);
    let almost_prolongable = (!diag.rows.is_empty()).then_some(diag.almost_prolongable);
    let present: Vec<bool> = [ratio_to_one, line_fraction_to_one, moments_to_arcsine]
        .into_iter()
        .flatten()
        .collect();
    let agreement = if present.windows(2).all(|w| w[0] == w[1]) {
        "consistent"
    } else if almost_prolongable == Some(false) {
        "expected-disagreement"
    } else {
        "inconsistent"
    };
    Verdicts {
        ratio_to_one,
        line_fraction_to_one,
        moments_to_arcsine,
        almost_prolongable,
        agreement: agreement.to_string(),
    }
}

/// Every length the report reads: `n` and `n + 1` for each grid point, and
/// `n - 1` as well when a sentinel is adjoined.
pub fn required_lengths(cfg: &AnalyzeConfig) -> Vec<usize> {
    let offset = usize::from(cfg.sentinel.is_some());
    let mut ns: Vec<usize> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| n.saturating_sub(offset)..=n + 1)
        .collect();
    ns.sort_unstable();
    ns.dedup();
    ns
}

/// `(L_n, L_{n+1})`, or `(L̃_n, L̃_{n+1})` with a sentinel.
pub fn slice_pair(data: &LanguageData, sentinel: Option<u8>, n: usize) -> Result<(LanguageSlice, LanguageSlice)> {
    let get = |m: usize| {
        data.slices
            .get(&m)
            .ok_or_else(|| Error::Config(format!("length {m} was not extracted")))
    };
    let (ln, ln1) = (get(n)?, get(n + 1)?);
    match sentinel {
        Some(z) => Ok((adjoin_sentinel(get(n - 1)?, ln, z)?, adjoin_sentinel(ln, ln1, z)?)),
        None => Ok((ln.clone(), ln1.clone())),
    }
}

/// Runs the full pipeline for one source.
pub fn analyze(cfg: &AnalyzeConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let data = language_data(cfg, &required_lengths(cfg))?;
    analyze_with_data(cfg, &data)
}

/// [`analyze`] over slices that were already extracted.
pub fn analyze_with_data(cfg: &AnalyzeConfig, data: &LanguageData) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let pair = |n: usize| slice_pair(data, cfg.sentinel, n);
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    let mut censuses = Vec::with_capacity(cfg.n_grid.len());
    let mut alphabet = data.alphabet.clone();
    for &n in &cfg.n_grid {
        let (ln, ln1) = pair(n)?;
        alphabet = ln.alphabet().clone();
        let row = analyze_pair(&ln, &ln1, cfg)?;
        log::info!("n={n}: p={} ratio={}", row.p, row.ratio);
        if !row.census_violations.is_empty() {
            warnings.push(format!("n={n}: {}", row.census_violations.join("; ")));
        }
        if !row.cycle_bound_violations.is_empty() {
            warnings.push(format!(
                "n={n}: cycle bound fails for lengths {:?}",
                row.cycle_bound_violations
            ));
        }
        if cfg.sentinel.is_none() && data.prefix.is_some() && (row.census.e_l > 0 || row.census.e_r > 0) {
            warnings.push(format!(
                "n={n}: {} non-left and {} non-right-prolongable words, possibly a truncation artifact",
                row.census.e_l, row.census.e_r
            ));
        }
        censuses.push(prolongation_census(&ln, &ln1)?);
        rows.push(row);
    }
    let prolongability = almost_prolongable_diagnostic(&censuses, cfg.thresholds.almost_prolongable);
    let verdicts = verdicts(&rows, &prolongability, &cfg.thresholds);

    let prefix_frequencies = match &data.prefix {
        Some(prefix) => cfg
            .cylinders
            .iter()
            .filter(|u| !u.is_empty() && u.len() <= prefix.len())
            .map(|u| {
                let occ = prefix.windows(u.len()).filter(|w| w == u).count();
                PrefixFrequency {
                    word: show_word(u),
                    frequency: occ as f64 / (prefix.len() - u.len() + 1) as f64,
                }
            })
            .collect(),
        None => Vec::new(),
    };

    let schedule = match &cfg.source {
        WordSource::CassaigneKabore(s) => Some(s.clone()),
        _ => cfg.ck_schedule.clone(),
    };
    let letter = data.alphabet.symbols()[0];
    let oscillation = if cfg.oscillation {
        let regimes = match &schedule {
            Some(s) => ck_regimes(s, s.len() - 1)?,
            None => Vec::new(),
        };
        let rows = cfg
            .n_grid
            .iter()
            .map(|&n| {
                let (ln, ln1) = pair(n)?;
                let est = cylinder_estimate(&ln, &[letter])?;
                let ls = left_special_report(&ln, &ln1)?;
                Ok(crate::measures::OscillationRow {
                    n,
                    p: ln.len(),
                    frequency: est.suffix_frequency,
                    growth: ls.growth,
                    left_special: ls.words.len(),
                    regime_tag: regime_tag(&regimes, n),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(OscillationSection {
            letter: show_word(&[letter]),
            regimes,
            rows,
        })
    } else {
        None
    };
    let profiles = match &data.prefix {
        Some(prefix) => cfg
            .profile_ns
            .iter()
            .filter(|&&n| n < prefix.len())
            .map(|&n| uniform_frequency_profile(prefix, &[letter], n))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };

    Ok(ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        generator: cfg.source.to_string(),
        alphabet: alphabet.to_string(),
        sentinel: cfg.sentinel.map(|z| show_word(&[z])),
        language_origin: data.origin.clone(),
        prefix_length: data.prefix.as_ref().map(Vec::len),
        max_n: cfg.n_grid.iter().copied().max().unwrap_or(0) + 1,
        n_grid: cfg.n_grid.clone(),
        radii: cfg.radii.clone(),
        max_moment: cfg.max_moment,
        thresholds: cfg.thresholds.clone(),
        rows,
        prolongability,
        prefix_frequencies,
        oscillation,
        profiles,
        verdicts,
        warnings,
    })
}

impl ConvergenceReport {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// One row per grid point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let radii: Vec<String> = self.radii.iter().map(|r| format!("line_r{r},dline_r{r}")).collect();
        writeln!(
            out,
            "n,p,p_next,ratio,ratio_value,e_l_ratio,e_r_ratio,r_ratio,{},m2,m4,m2_gap,m4_gap,second_moment_residual,ks_distance",
            radii.join(",")
        )?;
        for r in &self.rows {
            let lines: Vec<String> = r
                .line_fraction
                .iter()
                .map(|x| format!("{:.9},{:.9}", x.undirected, x.directed))
                .collect();
            let m = |j: usize| r.moments.get(j).map_or(String::new(), |x| format!("{x:.9}"));
            let g = |j: usize| r.moment_gaps.get(j).map_or(String::new(), |x| format!("{x:.9}"));
            writeln!(
                out,
                "{},{},{},{},{:.12},{:.9},{:.9},{:.9},{},{},{},{},{},{},{}",
                r.n,
                r.p,
                r.p_next,
                r.ratio,
                r.ratio_value,
                r.e_l_ratio,
                r.e_r_ratio,
                r.r_ratio,
                lines.join(","),
                m(2),
                m(4),
                g(2),
                g(4),
                r.second_moment.residual,
                r.ks_distance.map_or(String::new(), |x| format!("{x:.9}")),
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wordgen::Slope;

    #[test]
    fn full_shift_negative_control() {
        let mut cfg = AnalyzeConfig::new(WordSource::FullShift { k: 2 });
        cfg.n_grid = vec![4, 6, 8];
        cfg.radii = vec![2];
        let rep = analyze(&cfg).unwrap();
        assert!(rep.rows.iter().all(|r| r.ratio == "2/1"));
        assert_eq!(rep.verdicts.ratio_to_one, Some(false));
        assert_eq!(rep.verdicts.line_fraction_to_one, Some(false));
        assert_eq!(rep.verdicts.moments_to_arcsine, Some(false));
        assert_eq!(rep.verdicts.agreement, "consistent");
    }

    #[test]
    fn truncation_guard() {
        let mut cfg = AnalyzeConfig::new(WordSource::Sturmian(Slope::golden()));
        cfg.prefix_len = 1000;
        cfg.n_grid = vec![5, 10];
        assert!(matches!(analyze(&cfg), Err(Error::TruncationGuard { .. })));
        cfg.n_grid = vec![0];
        assert!(matches!(analyze(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn report_is_deterministic() {
        let mut cfg = AnalyzeConfig::new(WordSource::Sturmian(Slope::golden()));
        cfg.prefix_len = 20_000;
        cfg.n_grid = vec![10, 20, 40];
        cfg.cylinders = vec![b"0".to_vec()];
        let a = serde_json::to_string(&analyze(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&analyze(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
