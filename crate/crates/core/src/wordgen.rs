//! Word generators: finite prefixes of infinite words and enumerative sources.
//!
//! Symbols are bytes. Generated words use the ASCII digits `'0'`, `'1'`, ...
//! unless a substitution or a file dictates otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::warn;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest word the CK generator will materialize.
pub const MATERIALIZE_CAP: usize = 1 << 31;

/// Ordered set of distinct byte symbols, `k >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<u8>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = u8>) -> Result<Self> {
        let mut symbols: Vec<u8> = symbols.into_iter().collect();
        let len = symbols.len();
        symbols.sort_unstable();
        symbols.dedup();
        if symbols.len() != len {
            return Err(Error::InvalidAlphabet("symbols are not distinct".into()));
        }
        if symbols.len() < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "need at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        Ok(Alphabet { symbols })
    }

    /// The digits `'0'..` followed by lowercase letters, `k` of them.
    pub fn digits(k: usize) -> Result<Self> {
        const POOL: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";
        if k > POOL.len() {
            return Err(Error::InvalidAlphabet(format!("k={k} exceeds {}", POOL.len())));
        }
        Alphabet::new(POOL[..k].iter().copied())
    }

    /// Distinct bytes of `word`, in byte order.
    pub fn infer(word: &[u8]) -> Result<Self> {
        let mut seen = [false; 256];
        for &b in word {
            seen[b as usize] = true;
        }
        Alphabet::new((0..=255u8).filter(|&b| seen[b as usize]))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn k(&self) -> usize {
        self.symbols.len()
    }

    pub fn contains(&self, symbol: u8) -> bool {
        self.symbols.binary_search(&symbol).is_ok()
    }

    pub fn index_of(&self, symbol: u8) -> Option<usize> {
        self.symbols.binary_search(&symbol).ok()
    }

    pub fn with_letter(&self, z: u8) -> Result<Self> {
        if self.contains(z) {
            return Err(Error::LetterInAlphabet(z as char));
        }
        Alphabet::new(self.symbols.iter().copied().chain(std::iter::once(z)))
    }

    /// Every symbol of `word` in this alphabet?
    pub fn covers(&self, word: &[u8]) -> bool {
        word.iter().all(|&b| self.contains(b))
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.symbols))
    }
}

/// A morphism with a fixed point starting at `seed`, optionally followed by a
/// letter-to-letter coding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub images: BTreeMap<u8, Vec<u8>>,
    pub seed: u8,
    pub coding: Option<BTreeMap<u8, u8>>,
}

impl Substitution {
    pub fn new(images: BTreeMap<u8, Vec<u8>>, seed: u8) -> Result<Self> {
        let s = Substitution {
            images,
            seed,
            coding: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// `0 -> 01, 1 -> 0`.
    pub fn fibonacci() -> Self {
        Substitution {
            images: BTreeMap::from([(b'0', b"01".to_vec()), (b'1', b"0".to_vec())]),
            seed: b'0',
            coding: None,
        }
    }

    /// `0 -> 01, 1 -> 10`.
    pub fn thue_morse() -> Self {
        Substitution {
            images: BTreeMap::from([(b'0', b"01".to_vec()), (b'1', b"10".to_vec())]),
            seed: b'0',
            coding: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Some(seed_image) = self.images.get(&self.seed) else {
            return Err(Error::InvalidSource(format!(
                "seed {:?} has no image",
                self.seed as char
            )));
        };
        if seed_image.len() < 2 || seed_image[0] != self.seed {
            return Err(Error::InvalidSource(
                "image of the seed must start with the seed and have length >= 2 (no fixed point)".into(),
            ));
        }
        for (&a, image) in &self.images {
            if image.is_empty() {
                return Err(Error::InvalidSource(format!("empty image for {:?}", a as char)));
            }
            if let Some(&b) = image.iter().find(|b| !self.images.contains_key(b)) {
                return Err(Error::InvalidSource(format!("letter {:?} has no image", b as char)));
            }
        }
        if let Some(coding) = &self.coding {
            if let Some(a) = self.images.keys().find(|a| !coding.contains_key(a)) {
                return Err(Error::InvalidSource(format!("coding does not cover {:?}", *a as char)));
            }
        }
        Ok(())
    }

    fn prefix(&self, len: usize) -> Result<Vec<u8>> {
        self.validate()?;
        let mut out = self.images[&self.seed].clone();
        // out[..i] has been expanded; the fixed point grows by at least one
        // symbol per expanded letter, so `i` never catches up with `out.len()`.
        let mut i = 1;
        while out.len() < len {
            let image = &self.images[&out[i]];
            out.extend_from_slice(image);
            i += 1;
        }
        out.truncate(len);
        if let Some(coding) = &self.coding {
            for b in out.iter_mut() {
                *b = coding[b];
            }
        }
        Ok(out)
    }

    fn alphabet(&self) -> Result<Alphabet> {
        match &self.coding {
            None => Alphabet::new(self.images.keys().copied()),
            Some(c) => {
                let mut v: Vec<u8> = c.values().copied().collect();
                v.sort_unstable();
                v.dedup();
                Alphabet::new(v)
            }
        }
    }
}

/// Slope of a mechanical word, held exactly as `fraction / 2^64`.
///
/// Floors of `n * alpha` are computed in 128-bit integer arithmetic, so they
/// are exact for the stored rational at every `n < 2^64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slope {
    fraction: u64,
    text: String,
}

impl Slope {
    /// `(sqrt 5 - 1) / 2`, correct to 64 fractional bits.
    pub fn golden() -> Self {
        let two64 = BigUint::one() << 64u32;
        let root = (BigUint::from(5u32) << 128u32).sqrt();
        let fraction = ((root - &two64) >> 1u32).to_u64().expect("fits in 64 bits");
        Slope {
            fraction,
            text: "golden".into(),
        }
    }

    pub fn from_fraction(fraction: u64) -> Result<Self> {
        if fraction == 0 {
            return Err(Error::InvalidSource("alpha must lie in (0,1)".into()));
        }
        Ok(Slope {
            fraction,
            text: format!("{}", fraction as f64 / 2f64.powi(64)),
        })
    }

    /// Parses `golden` or a decimal in (0,1), e.g. `0.6180339887`; decimals are
    /// converted exactly (rounded down) to 64 fractional bits.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("golden") {
            return Ok(Slope::golden());
        }
        let bad = || Error::Parse(format!("alpha {t:?} is not a decimal in (0,1)"));
        let digits = t.strip_prefix("0.").or_else(|| t.strip_prefix('.')).ok_or_else(bad)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let numerator = BigUint::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?;
        let denominator = BigUint::from(10u32).pow(digits.len() as u32);
        let fraction = ((numerator << 64u32) / denominator).to_u64().ok_or_else(bad)?;
        if fraction == 0 {
            return Err(bad());
        }
        Ok(Slope {
            fraction,
            text: t.to_string(),
        })
    }

    pub fn value(&self) -> f64 {
        self.fraction as f64 / 2f64.powi(64)
    }

    pub fn fraction(&self) -> u64 {
        self.fraction
    }

    fn floor_mul(&self, n: u64) -> u64 {
        ((n as u128 * self.fraction as u128) >> 64) as u64
    }

    /// Symbol at position `n`: `floor((n+1) alpha) - floor(n alpha)`.
    pub fn symbol(&self, n: u64) -> u8 {
        b'0' + (self.floor_mul(n + 1) - self.floor_mul(n)) as u8
    }

    /// A small-denominator rational `p/q` that the slope cannot be told apart
    /// from at desk scale, if any: `q <= 10^6` and `|alpha - p/q| < 1/(q 10^7)`.
    /// Such slopes give eventually periodic words over any realistic prefix.
    pub fn apparent_rational(&self) -> Option<(u64, u64)> {
        const MAX_DEN: u128 = 1_000_000;
        const HORIZON: u128 = 10_000_000;
        let one: u128 = 1 << 64;
        let x = self.fraction as u128;
        let (mut num, mut den) = (x, one);
        let (mut h2, mut h1) = (0u128, 1u128);
        let (mut k2, mut k1) = (1u128, 0u128);
        while den != 0 {
            let a = num / den;
            let (h, k) = (a * h1 + h2, a * k1 + k2);
            if k > MAX_DEN {
                break;
            }
            let err = (x * k).abs_diff(h * one);
            if err * HORIZON < one {
                return Some((h as u64, k as u64));
            }
            (h2, h1) = (h1, h);
            (k2, k1) = (k1, k);
            (num, den) = (den, num - a * den);
        }
        None
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// One level `(l_i, m_i, n_i)` of a Cassaigne–Kaboré schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkLevel {
    pub l: BigUint,
    pub m: BigUint,
    pub n: BigUint,
}

impl CkLevel {
    pub fn new(l: u64, m: u64, n: u64) -> Self {
        CkLevel {
            l: l.into(),
            m: m.into(),
            n: n.into(),
        }
    }
}

/// Parameters of `u_{i+1} = u_i^{m_i} v_i^{l_i}`, `v_{i+1} = u_i^{m_i} v_i^{n_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkSchedule {
    levels: Vec<CkLevel>,
    name: Option<String>,
}

impl CkSchedule {
    pub fn new(levels: Vec<CkLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidSource("empty CK schedule".into()));
        }
        for (i, lv) in levels.iter().enumerate() {
            if lv.l.is_zero() || lv.m.is_zero() || lv.n.is_zero() {
                return Err(Error::InvalidSource(format!("CK schedule level {i} has a zero entry")));
            }
        }
        Ok(CkSchedule { levels, name: None })
    }

    /// The default desk-scale schedule. Both regimes of level 0 lie below
    /// n = 1024 and every level satisfies the regime inequalities.
    pub fn desk() -> Self {
        CkSchedule {
            levels: vec![
                CkLevel::new(2, 128, 2048),
                CkLevel::new(1, 128, 128),
                CkLevel::new(1, 64, 64),
                CkLevel::new(1, 64, 64),
            ],
            name: Some("desk".into()),
        }
    }

    /// `l_i = 2^(2*2^i + 4)`, `m_i = 2^(8*2^i)`, `n_i = 2^(10*2^i)` for
    /// `i < levels`.
    pub fn doubly_exponential(levels: usize) -> Self {
        let pow2 = |e: u64| BigUint::one() << e;
        CkSchedule {
            levels: (0..levels as u32)
                .map(|i| {
                    let t = 1u64 << i;
                    CkLevel {
                        l: pow2(2 * t + 4),
                        m: pow2(8 * t),
                        n: pow2(10 * t),
                    }
                })
                .collect(),
            name: Some("dexp".into()),
        }
    }

    pub fn levels(&self) -> &[CkLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    fn level_usize(&self, i: usize) -> Result<(usize, usize, usize)> {
        let lv = &self.levels[i];
        let conv = |x: &BigUint| {
            x.to_usize()
                .filter(|&v| v <= MATERIALIZE_CAP)
                .ok_or_else(|| Error::NotMaterializable(format!("schedule entry {x} at level {i}")))
        };
        Ok((conv(&lv.l)?, conv(&lv.m)?, conv(&lv.n)?))
    }
}

impl fmt::Display for CkSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            return f.write_str(name);
        }
        let parts: Vec<String> = self
            .levels
            .iter()
            .map(|lv| format!("{},{},{}", lv.l, lv.m, lv.n))
            .collect();
        f.write_str(&parts.join(";"))
    }
}

impl FromStr for CkSchedule {
    type Err = Error;

    /// `desk`, `dexp`, `dexp<levels>` or `l,m,n;l,m,n;...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "desk" {
            return Ok(CkSchedule::desk());
        }
        if let Some(rest) = s.strip_prefix("dexp") {
            let levels = if rest.is_empty() {
                4
            } else {
                rest.parse()
                    .map_err(|_| Error::Parse(format!("bad dexp depth {rest:?}")))?
            };
            return Ok(CkSchedule::doubly_exponential(levels));
        }
        let mut levels = Vec::new();
        for part in s.split(';').filter(|p| !p.trim().is_empty()) {
            let nums: Vec<BigUint> = part
                .split(',')
                .map(|x| {
                    BigUint::parse_bytes(x.trim().as_bytes(), 10)
                        .ok_or_else(|| Error::Parse(format!("bad CK entry {x:?}")))
                })
                .collect::<Result<_>>()?;
            let [l, m, n] =
                <[BigUint; 3]>::try_from(nums).map_err(|_| Error::Parse(format!("CK level {part:?} needs l,m,n")))?;
            levels.push(CkLevel { l, m, n });
        }
        CkSchedule::new(levels)
    }
}

/// Specification of an infinite word generator (or, for the full shift, of
/// an enumerative language).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordSource {
    Substitution(Substitution),
    Sturmian(Slope),
    CassaigneKabore(CkSchedule),
    FullShift { k: usize },
    Periodic { pattern: Vec<u8> },
    FileWord { path: PathBuf },
}

impl WordSource {
    /// The first `len` symbols of the word. Deterministic.
    pub fn prefix(&self, len: usize) -> Result<Vec<u8>> {
        match self {
            WordSource::Substitution(s) => s.prefix(len),
            WordSource::Sturmian(slope) => {
                if let Some((p, q)) = slope.apparent_rational() {
                    warn!("sturmian alpha {slope} is indistinguishable from {p}/{q}; word is eventually periodic");
                }
                Ok((0..len as u64).map(|n| slope.symbol(n)).collect())
            }
            WordSource::CassaigneKabore(schedule) => ck_prefix(schedule, len),
            WordSource::FullShift { .. } => Err(Error::Enumerative),
            WordSource::Periodic { pattern } => {
                if pattern.is_empty() {
                    return Err(Error::InvalidSource("empty periodic pattern".into()));
                }
                Ok(pattern.iter().copied().cycle().take(len).collect())
            }
            WordSource::FileWord { path } => {
                let mut bytes = read_word_file(path)?;
                if bytes.len() < len {
                    return Err(Error::GeneratorExhausted {
                        needed: len,
                        available: bytes.len(),
                    });
                }
                bytes.truncate(len);
                Ok(bytes)
            }
        }
    }

    /// Alphabet of the source. For files the whole file is scanned.
    pub fn alphabet(&self) -> Result<Alphabet> {
        match self {
            WordSource::Substitution(s) => s.alphabet(),
            WordSource::Sturmian(_) | WordSource::CassaigneKabore(_) => Alphabet::digits(2),
            WordSource::FullShift { k } => Alphabet::digits(*k),
            WordSource::Periodic { pattern } => Alphabet::infer(pattern),
            WordSource::FileWord { path } => Alphabet::infer(&read_word_file(path)?),
        }
    }

    pub fn is_enumerative(&self) -> bool {
        matches!(self, WordSource::FullShift { .. })
    }
}

impl fmt::Display for WordSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordSource::Substitution(s) => {
                let images: Vec<String> = s
                    .images
                    .iter()
                    .map(|(a, w)| format!("{}:{}", *a as char, String::from_utf8_lossy(w)))
                    .collect();
                write!(f, "substitution:{}/seed={}", images.join(","), s.seed as char)?;
                if let Some(c) = &s.coding {
                    let pairs: Vec<String> = c
                        .iter()
                        .map(|(a, b)| format!("{}:{}", *a as char, *b as char))
                        .collect();
                    write!(f, "/coding={}", pairs.join(","))?;
                }
                Ok(())
            }
            WordSource::Sturmian(slope) => write!(f, "sturmian:{slope}"),
            WordSource::CassaigneKabore(s) => write!(f, "ck:{s}"),
            WordSource::FullShift { k } => write!(f, "full-shift:{k}"),
            WordSource::Periodic { pattern } => {
                write!(f, "periodic:{}", String::from_utf8_lossy(pattern))
            }
            WordSource::FileWord { path } => write!(f, "file:{}", path.display()),
        }
    }
}

/// File contents without trailing ASCII whitespace.
pub fn read_word_file(path: &std::path::Path) -> Result<Vec<u8>> {
    let mut bytes = std::fs::read(path)?;
    while bytes.last().is_some_and(u8::is_ascii_whitespace) {
        bytes.pop();
    }
    Ok(bytes)
}

/// Parses `a:w,b:w` into a letter map, e.g. `0:01,1:0`.
pub fn parse_letter_map(text: &str) -> Result<BTreeMap<u8, Vec<u8>>> {
    let mut map = BTreeMap::new();
    for item in text.split(',').filter(|s| !s.is_empty()) {
        let (a, w) = item
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected letter:word, got {item:?}")))?;
        let a = a.trim().as_bytes();
        if a.len() != 1 {
            return Err(Error::Parse(format!("{item:?}: letters are single bytes")));
        }
        if map.insert(a[0], w.trim().as_bytes().to_vec()).is_some() {
            return Err(Error::Parse(format!("letter {:?} given twice", a[0] as char)));
        }
    }
    Ok(map)
}

fn single_byte(text: &str, what: &str) -> Result<u8> {
    match text.trim().as_bytes() {
        [b] => Ok(*b),
        _ => Err(Error::Parse(format!("{what} must be a single byte, got {text:?}"))),
    }
}

impl FromStr for WordSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("generator spec {s:?} lacks a kind prefix")))?;
        match kind {
            "substitution" => {
                let mut parts = rest.split('/');
                let images = parse_letter_map(parts.next().unwrap_or(""))?;
                let mut seed = None;
                let mut coding = None;
                for p in parts {
                    if let Some(v) = p.strip_prefix("seed=") {
                        seed = Some(single_byte(v, "seed")?);
                    } else if let Some(v) = p.strip_prefix("coding=") {
                        let raw = parse_letter_map(v)?;
                        let mut c = BTreeMap::new();
                        for (a, b) in raw {
                            c.insert(a, single_byte(&String::from_utf8_lossy(&b), "coding image")?);
                        }
                        coding = Some(c);
                    } else {
                        return Err(Error::Parse(format!("unknown substitution option {p:?}")));
                    }
                }
                let seed = seed
                    .or_else(|| images.keys().next().copied())
                    .ok_or_else(|| Error::Parse("substitution without images".into()))?;
                let sub = Substitution { images, seed, coding };
                sub.validate()?;
                Ok(WordSource::Substitution(sub))
            }
            "sturmian" => Ok(WordSource::Sturmian(Slope::parse(rest)?)),
            "ck" => Ok(WordSource::CassaigneKabore(rest.parse()?)),
            "full-shift" => {
                let k: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad alphabet size {rest:?}")))?;
                Alphabet::digits(k)?;
                Ok(WordSource::FullShift { k })
            }
            "periodic" => {
                if rest.is_empty() {
                    return Err(Error::InvalidSource("empty periodic pattern".into()));
                }
                Ok(WordSource::Periodic {
                    pattern: rest.as_bytes().to_vec(),
                })
            }
            "file" => Ok(WordSource::FileWord { path: rest.into() }),
            other => Err(Error::Parse(format!("unknown generator kind {other:?}"))),
        }
    }
}

fn repeat_into(out: &mut Vec<u8>, block: &[u8], times: usize, cap: usize) {
    for _ in 0..times {
        if out.len() >= cap {
            return;
        }
        let take = block.len().min(cap - out.len());
        out.extend_from_slice(&block[..take]);
    }
}

fn ck_prefix(schedule: &CkSchedule, len: usize) -> Result<Vec<u8>> {
    let (mut u, mut v) = (b"0".to_vec(), b"1".to_vec());
    for i in 0..schedule.len() {
        if u.len() >= len {
            break;
        }
        let (l, m, n) = schedule.level_usize(i)?;
        let (mut nu, mut nv) = (Vec::new(), Vec::new());
        repeat_into(&mut nu, &u, m, len);
        repeat_into(&mut nu, &v, l, len);
        repeat_into(&mut nv, &u, m, len);
        repeat_into(&mut nv, &v, n, len);
        u = nu;
        v = nv;
    }
    if u.len() < len {
        return Err(Error::GeneratorExhausted {
            needed: len,
            available: u.len(),
        });
    }
    u.truncate(len);
    Ok(u)
}

/// `(u_depth, v_depth)` materialized.
pub fn ck_words(schedule: &CkSchedule, depth: usize) -> Result<(Vec<u8>, Vec<u8>)> {
    if depth > schedule.len() {
        return Err(Error::DepthExceedsSchedule {
            depth,
            len: schedule.len(),
        });
    }
    let counts = ck_lengths_and_zero_counts(schedule, depth)?;
    let last = &counts[depth];
    let total = &last.u_len + &last.v_len;
    if total > BigUint::from(MATERIALIZE_CAP) {
        return Err(Error::NotMaterializable(format!("|u_{depth}| + |v_{depth}| = {total}")));
    }
    let (mut u, mut v) = (b"0".to_vec(), b"1".to_vec());
    for i in 0..depth {
        let (l, m, n) = schedule.level_usize(i)?;
        let mut nu = Vec::with_capacity(m * u.len() + l * v.len());
        let mut nv = Vec::with_capacity(m * u.len() + n * v.len());
        repeat_into(&mut nu, &u, m, usize::MAX);
        repeat_into(&mut nu, &v, l, usize::MAX);
        repeat_into(&mut nv, &u, m, usize::MAX);
        repeat_into(&mut nv, &v, n, usize::MAX);
        u = nu;
        v = nv;
    }
    Ok((u, v))
}

/// Exact per-level lengths and zero counts of `u_i`, `v_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CkLevelCounts {
    pub level: usize,
    #[serde(serialize_with = "ser_big")]
    pub u_len: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub v_len: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub u_zeros: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub v_zeros: BigUint,
    /// `|u_i|_0 / |u_i|`
    pub alpha: f64,
    /// `|v_i|_0 / |v_i|`
    pub beta: f64,
}

fn ser_big<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Ratio of two big integers as a float, without overflowing for huge inputs.
pub fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let shift = den.bits().max(num.bits()).saturating_sub(1000);
    let (a, b) = (num >> shift, den >> shift);
    a.to_f64().unwrap_or(f64::NAN) / b.to_f64().unwrap_or(f64::NAN)
}

/// Levels `0..=depth`, computed with the recurrences on counts only.
pub fn ck_lengths_and_zero_counts(schedule: &CkSchedule, depth: usize) -> Result<Vec<CkLevelCounts>> {
    if depth > schedule.len() {
        return Err(Error::DepthExceedsSchedule {
            depth,
            len: schedule.len(),
        });
    }
    let mut out = Vec::with_capacity(depth + 1);
    let (mut ul, mut vl) = (BigUint::one(), BigUint::one());
    let (mut uz, mut vz) = (BigUint::one(), BigUint::zero());
    for i in 0..=depth {
        out.push(CkLevelCounts {
            level: i,
            alpha: big_ratio(&uz, &ul),
            beta: big_ratio(&vz, &vl),
            u_len: ul.clone(),
            v_len: vl.clone(),
            u_zeros: uz.clone(),
            v_zeros: vz.clone(),
        });
        if i == depth {
            break;
        }
        let CkLevel { l, m, n } = &schedule.levels[i];
        let nul = m * &ul + l * &vl;
        let nvl = m * &ul + n * &vl;
        let nuz = m * &uz + l * &vz;
        let nvz = m * &uz + n * &vz;
        (ul, vl, uz, vz) = (nul, nvl, nuz, nvz);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_prefix() {
        let w = WordSource::Substitution(Substitution::fibonacci());
        assert_eq!(w.prefix(8).unwrap(), b"01001010");
    }

    #[test]
    fn periodic_prefix() {
        let w: WordSource = "periodic:01".parse().unwrap();
        assert_eq!(w.prefix(5).unwrap(), b"01010");
    }

    #[test]
    fn sturmian_half_is_degenerate() {
        let slope = Slope::parse("0.5").unwrap();
        assert_eq!(slope.apparent_rational(), Some((1, 2)));
        let w = WordSource::Sturmian(slope);
        assert_eq!(w.prefix(4).unwrap(), b"0101");
    }

    #[test]
    fn golden_slope_is_not_flagged() {
        let g = Slope::golden();
        assert!((g.value() - 0.618_033_988_749_894_9).abs() < 1e-15);
        assert_eq!(g.apparent_rational(), None);
        let d = Slope::parse("0.6180339887").unwrap();
        assert_eq!(d.apparent_rational(), None);
    }

    #[test]
    fn slope_floor_matches_exact_rational() {
        // alpha = 3/8 is exactly representable
        let s = Slope::parse("0.375").unwrap();
        for n in 0..1000u64 {
            assert_eq!(s.floor_mul(n), n * 3 / 8);
        }
        assert_eq!(s.apparent_rational(), Some((3, 8)));
    }

    #[test]
    fn substitution_without_fixed_point() {
        let images = BTreeMap::from([(b'0', b"10".to_vec()), (b'1', b"0".to_vec())]);
        assert!(matches!(Substitution::new(images, b'0'), Err(Error::InvalidSource(_))));
        let images = BTreeMap::from([(b'0', b"0".to_vec()), (b'1', b"01".to_vec())]);
        assert!(Substitution::new(images, b'0').is_err());
    }

    #[test]
    fn coding_is_applied() {
        let mut s = Substitution::thue_morse();
        s.coding = Some(BTreeMap::from([(b'0', b'a'), (b'1', b'b')]));
        let w = WordSource::Substitution(s);
        assert_eq!(w.prefix(8).unwrap(), b"abbabaab");
        assert_eq!(w.alphabet().unwrap().symbols(), b"ab");
    }

    #[test]
    fn file_word_too_short() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        std::fs::write(&path, b"0110").unwrap();
        let w = WordSource::FileWord { path };
        assert_eq!(w.prefix(3).unwrap(), b"011");
        assert!(matches!(
            w.prefix(10),
            Err(Error::GeneratorExhausted {
                needed: 10,
                available: 4
            })
        ));
    }

    #[test]
    fn full_shift_has_no_prefix() {
        assert!(matches!(
            WordSource::FullShift { k: 2 }.prefix(3),
            Err(Error::Enumerative)
        ));
    }

    #[test]
    fn ck_base_and_dexp_depth_one() {
        let dexp = CkSchedule::doubly_exponential(4);
        let (u, v) = ck_words(&dexp, 0).unwrap();
        assert_eq!((u.as_slice(), v.as_slice()), (&b"0"[..], &b"1"[..]));
        let (u1, v1) = ck_words(&dexp, 1).unwrap();
        let mut expect = vec![b'0'; 256];
        expect.extend(std::iter::repeat_n(b'1', 64));
        assert_eq!(u1, expect);
        assert_eq!(v1.len(), 1280);
        let zeros = u1.iter().filter(|&&b| b == b'0').count();
        assert_eq!(zeros as f64 / u1.len() as f64, 0.8);
    }

    #[test]
    fn ck_counts() {
        let dexp = CkSchedule::doubly_exponential(4);
        let c = ck_lengths_and_zero_counts(&dexp, 1).unwrap();
        assert_eq!(c[0].u_len, BigUint::from(1u32));
        assert_eq!(c[0].v_zeros, BigUint::zero());
        assert_eq!((c[0].alpha, c[0].beta), (1.0, 0.0));
        assert_eq!(c[1].u_len, BigUint::from(320u32));
        assert_eq!(c[1].v_len, BigUint::from(1280u32));
        assert_eq!((c[1].alpha, c[1].beta), (0.8, 0.2));
        // deep levels overflow 64 bits but stay exact
        let deep = ck_lengths_and_zero_counts(&dexp, 4).unwrap();
        assert!(deep[4].u_len.bits() > 64);
        assert!(deep[4].alpha > deep[4].beta);
    }

    #[test]
    fn ck_depth_errors() {
        let desk = CkSchedule::desk();
        assert!(matches!(
            ck_words(&desk, 9),
            Err(Error::DepthExceedsSchedule { depth: 9, len: 4 })
        ));
        assert!(ck_words(&CkSchedule::doubly_exponential(4), 3).is_err());
    }

    #[test]
    fn ck_prefix_agrees_with_words() {
        let desk = CkSchedule::desk();
        let (u2, _) = ck_words(&desk, 2).unwrap();
        let src = WordSource::CassaigneKabore(desk);
        assert_eq!(src.prefix(u2.len()).unwrap(), u2);
        assert_eq!(src.prefix(1000).unwrap(), &u2[..1000]);
    }

    #[test]
    fn source_text_round_trip() {
        for text in [
            "substitution:0:01,1:0/seed=0",
            "sturmian:0.6180339887",
            "sturmian:golden",
            "ck:desk",
            "ck:2,128,2048;1,128,128",
            "full-shift:3",
            "periodic:001",
        ] {
            let src: WordSource = text.parse().unwrap();
            assert_eq!(src.to_string(), text);
            assert_eq!(src.to_string().parse::<WordSource>().unwrap(), src);
        }
        assert!("nope:1".parse::<WordSource>().is_err());
        assert!("ck:1,0,3".parse::<WordSource>().is_err());
    }

    #[test]
    fn alphabet_invariants() {
        assert!(Alphabet::new(*b"0").is_err());
        assert!(Alphabet::new(*b"010").is_err());
        let a = Alphabet::new(*b"10").unwrap();
        assert_eq!(a.symbols(), b"01");
        assert!(matches!(a.with_letter(b'1'), Err(Error::LetterInAlphabet('1'))));
        assert_eq!(a.with_letter(b'2').unwrap().k(), 3);
    }
}
