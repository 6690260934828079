//! Factor languages: length-n slices, complexity, prolongation counts.

use std::collections::{HashMap, HashSet};
use std::hash::{BuildHasherDefault, Hasher};
use std::io::{BufRead, Write};

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::show_word;
use crate::wordgen::Alphabet;

/// The set `L_n` of length-n words of a language, sorted lexicographically
/// and stored as one flat array of fixed-width records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageSlice {
    n: usize,
    alphabet: Alphabet,
    count: usize,
    data: Vec<u8>,
}

impl LanguageSlice {
    /// Builds a slice from arbitrary words of length `n`; sorts and dedups.
    pub fn from_words<'a, I>(n: usize, alphabet: Alphabet, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [u8]>,
    {
        let mut words: Vec<&[u8]> = words.into_iter().collect();
        for w in &words {
            if w.len() != n {
                return Err(Error::Parse(format!(
                    "word {:?} has length {}, expected {n}",
                    show_word(w),
                    w.len()
                )));
            }
            if !alphabet.covers(w) {
                return Err(Error::Parse(format!(
                    "word {:?} leaves alphabet {alphabet}",
                    show_word(w)
                )));
            }
        }
        words.sort_unstable();
        words.dedup();
        Ok(Self::from_sorted_unchecked(n, alphabet, &words))
    }

    fn from_sorted_unchecked(n: usize, alphabet: Alphabet, words: &[&[u8]]) -> Self {
        if n == 0 {
            return LanguageSlice {
                n,
                alphabet,
                count: usize::from(!words.is_empty()),
                data: Vec::new(),
            };
        }
        let mut data = Vec::with_capacity(words.len() * n);
        for w in words {
            data.extend_from_slice(w);
        }
        LanguageSlice {
            n,
            alphabet,
            count: words.len(),
            data,
        }
    }

    /// `L_0 = {ε}`.
    pub fn empty_word(alphabet: Alphabet) -> Self {
        LanguageSlice {
            n: 0,
            alphabet,
            count: 1,
            data: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// `p(n)`.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn get(&self, i: usize) -> &[u8] {
        assert!(i < self.count, "factor index {i} out of range");
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        (0..self.count).map(move |i| self.get(i))
    }

    /// Index of `word` in sorted order.
    pub fn position(&self, word: &[u8]) -> Option<usize> {
        if word.len() != self.n {
            return None;
        }
        if self.n == 0 {
            return (self.count == 1).then_some(0);
        }
        let (mut lo, mut hi) = (0, self.count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(word) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, word: &[u8]) -> bool {
        self.position(word).is_some()
    }

    /// Same words, larger alphabet.
    pub fn with_alphabet(mut self, alphabet: Alphabet) -> Result<Self> {
        if !self.alphabet.symbols().iter().all(|&b| alphabet.contains(b)) {
            return Err(Error::InvalidAlphabet(format!(
                "{alphabet} does not contain {}",
                self.alphabet
            )));
        }
        self.alphabet = alphabet;
        Ok(self)
    }

    /// Writes `n=<n> k=<k>` followed by one factor per line.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n={} k={}", self.n, self.alphabet.k())?;
        for w in self.iter() {
            out.write_all(w)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads the format of [`LanguageSlice::write_to`]. The alphabet is
    /// recovered from the letters present and must have `k` symbols.
    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty slice file".into()))??;
        let (n, k) = parse_header(&header)?;
        let words: Vec<Vec<u8>> = lines
            .map(|l| l.map(|s| s.into_bytes()))
            .filter(|l| !matches!(l, Ok(s) if s.is_empty()))
            .collect::<std::io::Result<_>>()?;
        let all: Vec<u8> = words.iter().flatten().copied().collect();
        let alphabet = Alphabet::infer(&all)?;
        if alphabet.k() != k {
            return Err(Error::Parse(format!(
                "header says k={k} but the factors use {} letters",
                alphabet.k()
            )));
        }
        LanguageSlice::from_words(n, alphabet, words.iter().map(Vec::as_slice))
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut n = None;
    let mut k = None;
    for tok in line.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("k=") {
            k = v.parse().ok();
        }
    }
    match (n, k) {
        (Some(n), Some(k)) => Ok((n, k)),
        _ => Err(Error::Parse(format!("bad slice header {line:?}"))),
    }
}

// --- window deduplication -------------------------------------------------

const MOD: u64 = (1 << 61) - 1;
const BASE: u64 = 0x1d3f_84a5_b2c7_e691 % MOD;

fn mulmod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let s = (p as u64 & MOD) + (p >> 61) as u64;
    let s = if s >= MOD { s - MOD } else { s };
    if s == MOD {
        0
    } else {
        s
    }
}

fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MOD {
        s - MOD
    } else {
        s
    }
}

#[derive(Default)]
struct IdentityHasher(u64);

impl Hasher for IdentityHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, _: &[u8]) {
        unreachable!("only u64 keys are hashed")
    }
    fn write_u64(&mut self, x: u64) {
        self.0 = x;
    }
}

/// Distinct windows of length `n >= 1` over all `words`, one representative
/// each. Rolling hashes only bucket candidates; equality is always decided by
/// comparing bytes.
fn distinct_windows<'a>(words: &[&'a [u8]], n: usize) -> Vec<&'a [u8]> {
    debug_assert!(n >= 1);
    let mut reps: Vec<&'a [u8]> = Vec::new();
    let mut next: Vec<u32> = Vec::new();
    let mut heads: HashMap<u64, u32, BuildHasherDefault<IdentityHasher>> = HashMap::default();
    let mut top = 1u64;
    for _ in 1..n {
        top = mulmod(top, BASE);
    }
    for word in words {
        if word.len() < n {
            continue;
        }
        let mut h = 0u64;
        for &b in &word[..n] {
            h = addmod(mulmod(h, BASE), b as u64 + 1);
        }
        for i in 0..=word.len() - n {
            if i > 0 {
                let gone = mulmod(word[i - 1] as u64 + 1, top);
                h = addmod(h, MOD - gone);
                h = addmod(mulmod(h, BASE), word[i + n - 1] as u64 + 1);
            }
            let window = &word[i..i + n];
            let head = heads.get(&h).copied();
            let mut cur = head;
            let mut found = false;
            while let Some(c) = cur {
                if reps[c as usize] == window {
                    found = true;
                    break;
                }
                let nx = next[c as usize];
                cur = (nx != u32::MAX).then_some(nx);
            }
            if !found {
                let id = reps.len() as u32;
                reps.push(window);
                next.push(head.unwrap_or(u32::MAX));
                heads.insert(h, id);
            }
        }
    }
    reps
}

/// All distinct length-n windows of `word`, alphabet inferred from the word.
pub fn factors(word: &[u8], n: usize) -> Result<LanguageSlice> {
    factors_in(word, n, Alphabet::infer(word)?)
}

/// [`factors`] with an explicit alphabet.
pub fn factors_in(word: &[u8], n: usize, alphabet: Alphabet) -> Result<LanguageSlice> {
    factors_of_words(&[word], n, alphabet)
}

/// Union of the length-n factors of several finite words.
pub fn factors_of_words(words: &[&[u8]], n: usize, alphabet: Alphabet) -> Result<LanguageSlice> {
    let longest = words.iter().map(|w| w.len()).max().unwrap_or(0);
    if n == 0 || n > longest {
        return Err(Error::WindowLength { n, len: longest });
    }
    if let Some(w) = words.iter().find(|w| !alphabet.covers(w)) {
        return Err(Error::InvalidAlphabet(format!(
            "word of length {} has letters outside {alphabet}",
            w.len()
        )));
    }
    let mut reps = distinct_windows(words, n);
    reps.sort_unstable();
    Ok(LanguageSlice::from_sorted_unchecked(n, alphabet, &reps))
}

/// Slices for every `n` in `ns`, computed from a single pass at the largest
/// `n`: shorter factors are prefixes of longer ones, except for windows near
/// the end of each word, which are added back explicitly.
pub fn factor_ladder(words: &[&[u8]], alphabet: &Alphabet, ns: &[usize]) -> Result<Vec<LanguageSlice>> {
    let Some(&top_n) = ns.iter().max() else {
        return Ok(Vec::new());
    };
    let top = factors_of_words(words, top_n, alphabet.clone())?;
    ns.iter()
        .map(|&n| {
            if n == top_n {
                return Ok(top.clone());
            }
            if n == 0 {
                return Err(Error::WindowLength { n, len: top_n });
            }
            let mut cands: Vec<&[u8]> = top.iter().map(|w| &w[..n]).collect();
            for w in words {
                if w.len() < n {
                    continue;
                }
                let first = (w.len() + 1).saturating_sub(top_n);
                for i in first..=w.len() - n {
                    cands.push(&w[i..i + n]);
                }
            }
            cands.sort_unstable();
            cands.dedup();
            Ok(LanguageSlice::from_sorted_unchecked(n, alphabet.clone(), &cands))
        })
        .collect()
}

/// Length-n words over `alphabet` avoiding every `forbidden` factor, built by
/// right extension with suffix checks.
pub fn sft_slice(alphabet: &Alphabet, forbidden: &[Vec<u8>], n: usize) -> Result<LanguageSlice> {
    let mut by_len: Vec<HashSet<&[u8]>> = Vec::new();
    for f in forbidden {
        if f.is_empty() || !alphabet.covers(f) {
            return Err(Error::Config(format!(
                "forbidden word {:?} must be a nonempty word over {alphabet}",
                show_word(f)
            )));
        }
        if by_len.len() <= f.len() {
            by_len.resize_with(f.len() + 1, HashSet::new);
        }
        by_len[f.len()].insert(f.as_slice());
    }
    let mut cur: Vec<u8> = Vec::new();
    let mut count = 1usize;
    for len in 1..=n {
        let mut nxt = Vec::with_capacity(count * alphabet.k() * len);
        let mut ncount = 0;
        let mut buf = vec![0u8; len];
        for i in 0..count {
            let w = &cur[i * (len - 1)..(i + 1) * (len - 1)];
            buf[..len - 1].copy_from_slice(w);
            for &a in alphabet.symbols() {
                buf[len - 1] = a;
                let bad = by_len
                    .iter()
                    .enumerate()
                    .skip(1)
                    .take_while(|(l, _)| *l <= len)
                    .any(|(l, set)| set.contains(&buf[len - l..]));
                if !bad {
                    nxt.extend_from_slice(&buf);
                    ncount += 1;
                }
            }
        }
        cur = nxt;
        count = ncount;
    }
    if n == 0 {
        return Ok(LanguageSlice::empty_word(alphabet.clone()));
    }
    Ok(LanguageSlice {
        n,
        alphabet: alphabet.clone(),
        count,
        data: cur,
    })
}

// --- complexity -----------------------------------------------------------

fn ser_ratio<S: Serializer>(r: &Option<Ratio<u64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub n: usize,
    pub p: usize,
    /// `p(n+1)/p(n)`, exact, when the next slice exists and `p(n) > 0`.
    #[serde(serialize_with = "ser_ratio")]
    pub ratio: Option<Ratio<u64>>,
    pub ratio_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityProfile {
    pub rows: Vec<ComplexityRow>,
    /// First `n` at which the language is empty.
    pub died_out_at: Option<usize>,
}

/// `p(n)` and `p(n+1)/p(n)` over slices at consecutive lengths.
pub fn complexity(slices: &[LanguageSlice]) -> Result<ComplexityProfile> {
    for w in slices.windows(2) {
        if w[1].n != w[0].n + 1 {
            return Err(Error::Config(format!(
                "slices at n={} and n={} are not consecutive",
                w[0].n, w[1].n
            )));
        }
    }
    let died_out_at = slices.iter().find(|s| s.is_empty()).map(|s| s.n);
    let rows = slices
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let ratio = slices
                .get(i + 1)
                .filter(|_| s.count > 0 && died_out_at.is_none_or(|d| s.n < d))
                .map(|nx| Ratio::new(nx.count as u64, s.count as u64));
            ComplexityRow {
                n: s.n,
                p: s.count,
                ratio_value: ratio.map(|r| *r.numer() as f64 / *r.denom() as f64),
                ratio,
            }
        })
        .collect();
    Ok(ComplexityProfile { rows, died_out_at })
}

// --- prolongation census --------------------------------------------------

/// Per-word extension counts of `L_n` inside `L_{n+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extensions {
    /// `|{a : aw ∈ L_{n+1}}|`
    pub left: Vec<u32>,
    /// `|{b : wb ∈ L_{n+1}}|`
    pub right: Vec<u32>,
    /// For each word of `L_{n+1}`: index of its length-n prefix and suffix.
    pub arcs: Vec<(u32, u32)>,
}

/// Checks factorial consistency and counts extensions.
pub fn extensions(ln: &LanguageSlice, ln1: &LanguageSlice) -> Result<Extensions> {
    if ln1.n != ln.n + 1 {
        return Err(Error::Config(format!(
            "slices at n={} and n={} are not consecutive",
            ln.n, ln1.n
        )));
    }
    if ln.alphabet != ln1.alphabet {
        return Err(Error::Config(format!(
            "alphabets differ: {} vs {}",
            ln.alphabet, ln1.alphabet
        )));
    }
    let n = ln.n;
    let mut left = vec![0u32; ln.count];
    let mut right = vec![0u32; ln.count];
    let mut arcs = Vec::with_capacity(ln1.count);
    for w in ln1.iter() {
        let missing = |part: &[u8], which: &str| Error::Inconsistent {
            n,
            witness: format!("{which} {:?} of {:?} is not in L_{n}", show_word(part), show_word(w)),
        };
        let pre = ln.position(&w[..n]).ok_or_else(|| missing(&w[..n], "prefix"))?;
        let suf = ln.position(&w[1..]).ok_or_else(|| missing(&w[1..], "suffix"))?;
        right[pre] += 1;
        left[suf] += 1;
        arcs.push((pre as u32, suf as u32));
    }
    Ok(Extensions { left, right, arcs })
}

fn ser_word<S: Serializer>(w: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&show_word(w))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecialWord {
    #[serde(serialize_with = "ser_word")]
    pub word: Vec<u8>,
    pub extensions: u32,
}

/// Counting functions of one length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProlongationCensus {
    pub n: usize,
    pub k: usize,
    pub p_n: usize,
    pub p_next: usize,
    /// not left-prolongable
    pub e_l: usize,
    pub e_r: usize,
    /// prolongable in two or more ways
    pub s_l: usize,
    pub s_r: usize,
    /// prolongable in exactly one way
    pub r_l: usize,
    pub r_r: usize,
    /// exactly one left and exactly one right extension
    pub r: usize,
    /// `Σ (ext - 1)` over words with at least one left extension
    pub left_excess: u64,
    pub right_excess: u64,
    pub left_special: Vec<SpecialWord>,
}

pub fn prolongation_census(ln: &LanguageSlice, ln1: &LanguageSlice) -> Result<ProlongationCensus> {
    let ext = extensions(ln, ln1)?;
    Ok(census_from_extensions(ln, ln1.count, &ext))
}

pub(crate) fn census_from_extensions(ln: &LanguageSlice, p_next: usize, ext: &Extensions) -> ProlongationCensus {
    let tally = |v: &[u32]| {
        let (mut e, mut s, mut r, mut excess) = (0, 0, 0, 0u64);
        for &x in v {
            match x {
                0 => e += 1,
                1 => r += 1,
                _ => s += 1,
            }
            excess += x.saturating_sub(1) as u64;
        }
        (e, s, r, excess)
    };
    let (e_l, s_l, r_l, left_excess) = tally(&ext.left);
    let (e_r, s_r, r_r, right_excess) = tally(&ext.right);
    let r = ext
        .left
        .iter()
        .zip(&ext.right)
        .filter(|(&a, &b)| a == 1 && b == 1)
        .count();
    let left_special = ext
        .left
        .iter()
        .enumerate()
        .filter(|(_, &x)| x >= 2)
        .map(|(i, &x)| SpecialWord {
            word: ln.get(i).to_vec(),
            extensions: x,
        })
        .collect();
    ProlongationCensus {
        n: ln.n,
        k: ln.alphabet.k(),
        p_n: ln.count,
        p_next,
        e_l,
        e_r,
        s_l,
        s_r,
        r_l,
        r_r,
        r,
        left_excess,
        right_excess,
        left_special,
    }
}

impl ProlongationCensus {
    /// `p(n+1) - p(n)`.
    pub fn growth(&self) -> i64 {
        self.p_next as i64 - self.p_n as i64
    }

    /// Every identity and inequality that must hold for a factorial pair;
    /// returns the violated ones with their numbers.
    pub fn violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let p = self.p_n;
        let k = self.k as i64;
        for (side, e, s, r) in [
            ("left", self.e_l, self.s_l, self.r_l),
            ("right", self.e_r, self.s_r, self.r_r),
        ] {
            if e + s + r != p {
                bad.push(format!("{side} partition: {e}+{s}+{r} != {p}"));
            }
            let mid = self.growth() + e as i64;
            let (s, lo_ok, hi_ok) = (s as i64, s as i64 <= mid, mid <= (k - 1) * s as i64);
            if !(lo_ok && hi_ok) {
                bad.push(format!("{side} growth bound: {s} <= {mid} <= {}", (k - 1) * s));
            }
            if s == 0 && mid != 0 {
                bad.push(format!("{side} growth bound: no special words but excess {mid}"));
            }
            if self.r > r {
                bad.push(format!("r={} exceeds r_{side}={r}", self.r));
            }
        }
        let lhs = p as i64 - (self.s_l + self.s_r + self.e_l + self.e_r) as i64;
        if lhs > self.r as i64 {
            bad.push(format!("two-sided bound: {lhs} > r={}", self.r));
        }
        if self.left_excess as i64 != self.growth() + self.e_l as i64 {
            bad.push(format!(
                "left excess {} != p(n+1)-p(n)+e_l = {}",
                self.left_excess,
                self.growth() + self.e_l as i64
            ));
        }
        if self.right_excess as i64 != self.growth() + self.e_r as i64 {
            bad.push(format!(
                "right excess {} != p(n+1)-p(n)+e_r = {}",
                self.right_excess,
                self.growth() + self.e_r as i64
            ));
        }
        bad
    }
}

/// `L̃_n = L_n ∪ z·L_{n-1}` over the alphabet extended by `z`.
pub fn adjoin_sentinel(prev: &LanguageSlice, cur: &LanguageSlice, z: u8) -> Result<LanguageSlice> {
    if cur.n != prev.n + 1 {
        return Err(Error::Config(format!(
            "sentinel needs slices at n-1 and n, got {} and {}",
            prev.n, cur.n
        )));
    }
    let alphabet = cur.alphabet.with_letter(z)?;
    let mut zwords = Vec::with_capacity(prev.count * cur.n);
    for w in prev.iter() {
        zwords.push(z);
        zwords.extend_from_slice(w);
    }
    let zslices: Vec<&[u8]> = if cur.n == 0 {
        Vec::new()
    } else {
        zwords.chunks(cur.n).collect()
    };
    let mut all: Vec<&[u8]> = cur.iter().chain(zslices).collect();
    all.sort_unstable();
    Ok(LanguageSlice::from_sorted_unchecked(cur.n, alphabet, &all))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProlongabilityRow {
    pub n: usize,
    pub left_dead: f64,
    pub right_dead: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProlongabilityDiagnostic {
    pub rows: Vec<ProlongabilityRow>,
    pub threshold: f64,
    /// Both ratios at the largest tested `n` are within the threshold.
    pub almost_prolongable: bool,
}

/// `e_l(n)/p(n)` and `e_r(n)/p(n)` over increasing `n`.
pub fn almost_prolongable_diagnostic(censuses: &[ProlongationCensus], threshold: f64) -> ProlongabilityDiagnostic {
    let rows: Vec<ProlongabilityRow> = censuses
        .iter()
        .map(|c| {
            let p = c.p_n.max(1) as f64;
            ProlongabilityRow {
                n: c.n,
                left_dead: c.e_l as f64 / p,
                right_dead: c.e_r as f64 / p,
            }
        })
        .collect();
    let almost_prolongable = rows
        .iter()
        .max_by_key(|r| r.n)
        .is_some_and(|r| r.left_dead <= threshold && r.right_dead <= threshold);
    ProlongabilityDiagnostic {
        rows,
        threshold,
        almost_prolongable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn bin() -> Alphabet {
        Alphabet::digits(2).unwrap()
    }

    fn words(s: &LanguageSlice) -> Vec<String> {
        s.iter().map(show_word).collect()
    }

    fn naive(word: &[u8], n: usize) -> Vec<Vec<u8>> {
        let set: BTreeSet<&[u8]> = word.windows(n).collect();
        set.into_iter().map(<[u8]>::to_vec).collect()
    }

    #[test]
    fn fibonacci_prefix_factors() {
        let s = factors(b"01001010", 3).unwrap();
        assert_eq!(words(&s), ["001", "010", "100", "101"]);
        assert_eq!(factors(b"0101", 4).unwrap().len(), 1);
    }

    #[test]
    fn window_errors() {
        assert!(matches!(factors(b"0101", 5), Err(Error::WindowLength { n: 5, len: 4 })));
        assert!(factors(b"0101", 0).is_err());
    }

    #[test]
    fn ladder_matches_direct_scan() {
        let w: Vec<u8> = (0..3000u32).map(|i| b'0' + ((i * i + i / 7) % 3) as u8).collect();
        let a = Alphabet::infer(&w).unwrap();
        let ns = [1, 2, 5, 9, 17, 40];
        let ladder = factor_ladder(&[&w], &a, &ns).unwrap();
        for (s, &n) in ladder.iter().zip(&ns) {
            let direct: Vec<Vec<u8>> = s.iter().map(<[u8]>::to_vec).collect();
            assert_eq!(direct, naive(&w, n), "n={n}");
        }
    }

    #[test]
    fn sft_examples() {
        assert_eq!(words(&sft_slice(&bin(), &[], 2).unwrap()), ["00", "01", "10", "11"]);
        let golden = sft_slice(&bin(), &[b"11".to_vec()], 3).unwrap();
        assert_eq!(words(&golden), ["000", "001", "010", "100", "101"]);
        let dead = sft_slice(&bin(), &[b"0".to_vec(), b"1".to_vec()], 1).unwrap();
        assert!(dead.is_empty());
        assert!(sft_slice(&bin(), &[Vec::new()], 2).is_err());
    }

    #[test]
    fn complexity_and_death() {
        let slices: Vec<_> = (1..=4).map(|n| sft_slice(&bin(), &[], n).unwrap()).collect();
        let prof = complexity(&slices).unwrap();
        assert_eq!(prof.rows[0].ratio, Some(Ratio::new(2, 1)));
        assert!(prof.rows[3].ratio.is_none());
        let forb = [b"00".to_vec(), b"01".to_vec(), b"10".to_vec(), b"11".to_vec()];
        let dying: Vec<_> = (1..=3).map(|n| sft_slice(&bin(), &forb, n).unwrap()).collect();
        let prof = complexity(&dying).unwrap();
        assert_eq!(prof.died_out_at, Some(2));
        assert!(prof.rows[1].ratio.is_none());
        assert!(complexity(&[slices[0].clone(), slices[2].clone()]).is_err());
    }

    #[test]
    fn full_shift_census() {
        let l2 = sft_slice(&bin(), &[], 2).unwrap();
        let l3 = sft_slice(&bin(), &[], 3).unwrap();
        let c = prolongation_census(&l2, &l3).unwrap();
        assert_eq!((c.e_l, c.e_r, c.s_l, c.s_r, c.r_l, c.r_r, c.r), (0, 0, 4, 4, 0, 0, 0));
        assert!(c.violations().is_empty());
        assert_eq!(c.left_special.len(), 4);
    }

    #[test]
    fn periodic_census() {
        let w = b"0101010101010101";
        let c = prolongation_census(&factors(w, 3).unwrap(), &factors(w, 4).unwrap()).unwrap();
        assert_eq!(c.r, 2);
        assert_eq!((c.e_l, c.e_r, c.s_l, c.s_r), (0, 0, 0, 0));
    }

    #[test]
    fn inconsistent_pair_is_rejected() {
        let l2 = LanguageSlice::from_words(2, bin(), [&b"00"[..], b"01"]).unwrap();
        let l3 = LanguageSlice::from_words(3, bin(), [&b"001"[..], b"011"]).unwrap();
        let err = prolongation_census(&l2, &l3).unwrap_err();
        assert!(matches!(err, Error::Inconsistent { n: 2, .. }), "{err}");
    }

    #[test]
    fn sentinel_union() {
        let l1 = sft_slice(&bin(), &[], 1).unwrap();
        let l2 = sft_slice(&bin(), &[], 2).unwrap();
        let t = adjoin_sentinel(&l1, &l2, b'2').unwrap();
        assert_eq!(words(&t), ["00", "01", "10", "11", "20", "21"]);
        assert_eq!(t.alphabet().k(), 3);
        assert!(matches!(
            adjoin_sentinel(&l1, &l2, b'1'),
            Err(Error::LetterInAlphabet('1'))
        ));
        let t1 = adjoin_sentinel(&LanguageSlice::empty_word(bin()), &l1, b'z').unwrap();
        assert_eq!(words(&t1), ["0", "1", "z"]);
    }

    #[test]
    fn slice_file_round_trip() {
        let s = factors(b"0100101001001", 4).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert!(buf.starts_with(b"n=4 k=2\n"));
        let back = LanguageSlice::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        assert!(LanguageSlice::read_from(&b"n=2 k=3\n01\n10\n"[..]).is_err());
    }

    #[test]
    fn diagnostic_verdict() {
        let l: Vec<_> = (1..=5).map(|n| sft_slice(&bin(), &[], n).unwrap()).collect();
        let cs: Vec<_> = l
            .windows(2)
            .map(|w| prolongation_census(&w[0], &w[1]).unwrap())
            .collect();
        let d = almost_prolongable_diagnostic(&cs, 0.05);
        assert!(d.almost_prolongable);
        assert!(d.rows.iter().all(|r| r.left_dead == 0.0 && r.right_dead == 0.0));
    }
}
