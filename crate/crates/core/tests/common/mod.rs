#![allow(dead_code)]

use std::collections::BTreeMap;

use rauzy_lab::language::{adjoin_sentinel, factor_ladder, sft_slice};
use rauzy_lab::measures::ck_corpus;
use rauzy_lab::wordgen::{CkSchedule, Slope, Substitution};
use rauzy_lab::{Alphabet, LanguageSlice, WordSource};

/// One generator of the test suite with its slices `L_n`, `n` in `ns`.
pub struct Member {
    pub name: String,
    pub k: usize,
    pub aperiodic: bool,
    pub slices: BTreeMap<usize, LanguageSlice>,
}

impl Member {
    pub fn pairs(&self) -> impl Iterator<Item = (&LanguageSlice, &LanguageSlice)> {
        self.slices
            .iter()
            .filter_map(|(n, ln)| self.slices.get(&(n + 1)).map(|ln1| (ln, ln1)))
    }
}

pub fn naive_factors(word: &[u8], n: usize) -> std::collections::BTreeSet<&[u8]> {
    word.windows(n).collect()
}

fn from_prefix(name: &str, source: WordSource, len: usize, top: usize, aperiodic: bool) -> Member {
    let alphabet = source.alphabet().unwrap();
    let prefix = source.prefix(len).unwrap();
    let ns: Vec<usize> = (1..=top).collect();
    let ladder = factor_ladder(&[&prefix], &alphabet, &ns).unwrap();
    let mut slices: BTreeMap<usize, LanguageSlice> = ns.into_iter().zip(ladder).collect();
    slices.insert(0, LanguageSlice::empty_word(alphabet.clone()));
    Member {
        name: name.into(),
        k: alphabet.k(),
        aperiodic,
        slices,
    }
}

/// Slices `L_0..=L_top` for every generator; enumerative sources stop at
/// `full_top`.
pub fn suite(top: usize, full_top: usize) -> Vec<Member> {
    let len = (top + 1) * 500;
    let mut out = vec![
        from_prefix("sturmian-golden", WordSource::Sturmian(Slope::golden()), len, top, true),
        from_prefix(
            "sturmian-0.3",
            WordSource::Sturmian(Slope::parse("0.3090169943749474").unwrap()),
            len,
            top,
            true,
        ),
        from_prefix(
            "fibonacci",
            WordSource::Substitution(Substitution::fibonacci()),
            len,
            top,
            true,
        ),
        from_prefix(
            "thue-morse",
            WordSource::Substitution(Substitution::thue_morse()),
            len,
            top,
            true,
        ),
        from_prefix(
            "periodic",
            WordSource::Periodic {
                pattern: b"0010110".to_vec(),
            },
            len,
            top,
            false,
        ),
    ];
    for k in [2usize, 3] {
        let alphabet = Alphabet::digits(k).unwrap();
        let cap = if k == 2 { full_top } else { full_top.saturating_sub(4) };
        let slices = (0..=cap.min(top + 1))
            .map(|n| (n, sft_slice(&alphabet, &[], n).unwrap()))
            .collect();
        out.push(Member {
            name: format!("full-shift-{k}"),
            k,
            aperiodic: true,
            slices,
        });
    }
    let desk = CkSchedule::desk();
    let (_, corpus) = ck_corpus(&desk, top + 1).unwrap();
    let words: Vec<&[u8]> = corpus.iter().map(Vec::as_slice).collect();
    let alphabet = Alphabet::digits(2).unwrap();
    let ns: Vec<usize> = (1..=top).collect();
    let mut slices: BTreeMap<usize, LanguageSlice> = ns
        .iter()
        .copied()
        .zip(factor_ladder(&words, &alphabet, &ns).unwrap())
        .collect();
    slices.insert(0, LanguageSlice::empty_word(alphabet));
    out.push(Member {
        name: "ck-desk".into(),
        k: 2,
        aperiodic: true,
        slices,
    });
    let base = &out[0].slices;
    let sentinel = (1..=top)
        .map(|n| (n, adjoin_sentinel(&base[&(n - 1)], &base[&n], b'z').unwrap()))
        .collect();
    out.push(Member {
        name: "sturmian-golden+sentinel".into(),
        k: 3,
        aperiodic: true,
        slices: sentinel,
    });
    out
}
