use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Largest basis a truncation may enumerate.
pub const MAX_BASIS: usize = 1 << 21;

/// Brute-force cap for extension enumeration on irregular sectors.
const BRUTE_FORCE_CAP: usize = 1 << 16;

/// Word over {1..n}, stored 0-based. The empty word is the vacuum Ω.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn vacuum() -> Self {
        Word(Vec::new())
    }

    /// From 1-based letters.
    pub fn from_letters(letters: &[usize]) -> Result<Self> {
        letters
            .iter()
            .map(|&c| {
                if c == 0 || c > u8::MAX as usize {
                    Err(Error::InvalidInput(format!("letter {c} outside 1..=255")))
                } else {
                    Ok((c - 1) as u8)
                }
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }

    /// "Ω" or "" is the vacuum; otherwise one digit 1..9 per letter.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "Ω" {
            return Ok(Word::vacuum());
        }
        s.chars()
            .map(|c| match c.to_digit(10) {
                Some(d) if d >= 1 => Ok((d - 1) as u8),
                _ => Err(Error::InvalidInput(format!("bad letter {c:?} in word {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn max_letter(&self) -> Option<usize> {
        self.0.iter().map(|&c| c as usize + 1).max()
    }

    pub fn concat(&self, other: &[u8]) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(other);
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "Ω");
        }
        for &c in &self.0 {
            write!(f, "{}", c as u32 + 1)?;
        }
        Ok(())
    }
}

/// All words of length `len` over n letters, lexicographic.
pub fn all_words(n: usize, len: usize) -> impl Iterator<Item = Vec<u8>> {
    let total = (n as u128).pow(len as u32);
    (0..total).map(move |mut c| {
        let mut w = vec![0u8; len];
        for slot in w.iter_mut().rev() {
            *slot = (c % n as u128) as u8;
            c /= n as u128;
        }
        w
    })
}

/// All words of length ≤ `max_len`, grouped by length.
pub fn words_up_to(n: usize, max_len: usize) -> impl Iterator<Item = Word> {
    (0..=max_len).flat_map(move |l| all_words(n, l).map(Word))
}

/// Which subspace of the truncated Fock space the basis spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Every word of length ≤ depth.
    Full,
    /// Words whose letters after position `prefix` are all the first letter.
    /// Closed under taking prefixes, so compressions of Λ_k- and
    /// Schur-built operators to it are exact entrywise.
    Tail { prefix: usize },
    /// Words u·1^{km} with r ≤ |u| < r + k and 0 ≤ m < copies: a reducing
    /// subspace for every Λ_k(x) with x on the levels [r, r + k).
    Lambda { r: usize, k: usize, copies: usize },
}

/// Fock space over n letters cut at depth L, restricted to a sector; basis
/// words are grouped by level, lexicographic within a level.
#[derive(Debug, Clone)]
pub struct TruncatedFock {
    n: usize,
    depth: usize,
    sector: Sector,
    words: Vec<Word>,
    index: HashMap<Word, usize>,
    level_start: Vec<usize>,
}

impl PartialEq for TruncatedFock {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.depth == other.depth && self.sector == other.sector
    }
}

impl TruncatedFock {
    pub fn full(n: usize, depth: usize) -> Result<Self> {
        check_alphabet(n)?;
        let size = full_size(n, depth);
        if size > MAX_BASIS as u128 {
            return Err(Error::SizeCap {
                what: "Fock basis".into(),
                size: size.min(usize::MAX as u128) as usize,
                cap: MAX_BASIS,
            });
        }
        Self::from_words(n, depth, Sector::Full, words_up_to(n, depth).collect())
    }

    pub fn tail(n: usize, depth: usize, prefix: usize) -> Result<Self> {
        check_alphabet(n)?;
        let size = tail_size(n, depth, prefix);
        if size > MAX_BASIS as u128 {
            return Err(Error::SizeCap {
                what: "Fock tail sector".into(),
                size: size.min(usize::MAX as u128) as usize,
                cap: MAX_BASIS,
            });
        }
        let words = (0..=depth)
            .flat_map(|l| {
                let free = l.min(prefix);
                all_words(n, free).map(move |mut w| {
                    w.resize(l, 0);
                    Word(w)
                })
            })
            .collect();
        Self::from_words(n, depth, Sector::Tail { prefix }, words)
    }

    /// Largest prefix whose tail sector has at most `cap` words.
    pub fn tail_prefix_for_cap(n: usize, depth: usize, cap: usize) -> usize {
        (0..=depth)
            .take_while(|&p| tail_size(n, depth, p) <= cap as u128)
            .last()
            .unwrap_or(0)
    }

    /// Reducing sector for Λ_k on the window [r, r + k), keeping only the
    /// copies that fit completely below the depth.
    pub fn lambda(n: usize, depth: usize, r: usize, k: usize) -> Result<Self> {
        check_alphabet(n)?;
        if k == 0 {
            return Err(Error::InvalidInput("k must be positive".into()));
        }
        let copies = complete_copies(depth, r, k);
        if copies == 0 {
            return Err(Error::Precondition(format!("window [{r}, {}) exceeds depth {depth}", r + k)));
        }
        let per_copy: u128 = (r..r + k).map(|l| (n as u128).pow(l as u32)).sum();
        let size = per_copy * copies as u128;
        if size > MAX_BASIS as u128 {
            return Err(Error::SizeCap {
                what: "Fock Λ sector".into(),
                size: size.min(usize::MAX as u128) as usize,
                cap: MAX_BASIS,
            });
        }
        let mut words = Vec::with_capacity(size as usize);
        // Level of u·1^{km} is |u| + km; levels are disjoint across copies.
        for m in 0..copies {
            for l in r..r + k {
                words.extend(all_words(n, l).map(|mut w| {
                    w.resize(l + k * m, 0);
                    Word(w)
                }));
            }
        }
        Self::from_words(n, depth, Sector::Lambda { r, k, copies }, words)
    }

    fn from_words(n: usize, depth: usize, sector: Sector, mut words: Vec<Word>) -> Result<Self> {
        words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut level_start = vec![0usize; depth + 2];
        for w in &words {
            level_start[w.len() + 1] += 1;
        }
        for l in 0..=depth {
            level_start[l + 1] += level_start[l];
        }
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(TruncatedFock {
            n,
            depth,
            sector,
            words,
            index,
            level_start,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.words[i]
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn level(&self, i: usize) -> usize {
        self.words[i].len()
    }

    /// Basis indices of level ℓ (empty past the depth).
    pub fn level_range(&self, l: usize) -> Range<usize> {
        if l > self.depth {
            return self.dim()..self.dim();
        }
        self.level_start[l]..self.level_start[l + 1]
    }

    /// Basis indices with level in [lo, hi).
    pub fn levels_range(&self, lo: usize, hi: usize) -> Range<usize> {
        let hi = hi.min(self.depth + 1);
        if lo >= hi {
            return self.dim()..self.dim();
        }
        self.level_start[lo]..self.level_start[hi]
    }

    /// Suffixes w of length `len` with both aw and bw in the basis.
    pub fn common_extensions(&self, a: &Word, b: &Word, len: usize) -> Result<Vec<Vec<u8>>> {
        let top = a.len().max(b.len());
        if top + len > self.depth {
            return Ok(Vec::new());
        }
        match self.sector {
            Sector::Full | Sector::Tail { .. } => {
                if self.index_of(a).is_none() || self.index_of(b).is_none() {
                    return Ok(Vec::new());
                }
                let free = match self.sector {
                    Sector::Tail { prefix } => len.min(prefix.saturating_sub(top)),
                    _ => len,
                };
                Ok(all_words(self.n, free)
                    .map(|mut w| {
                        w.resize(len, 0);
                        w
                    })
                    .collect())
            }
            Sector::Lambda { r, k, copies } => {
                if len % k == 0 && self.index_of(a).is_some() && self.index_of(b).is_some() && top >= r {
                    let m0 = (top - r) / k;
                    return Ok(if m0 + len / k < copies { vec![vec![0; len]] } else { Vec::new() });
                }
                let total = (self.n as u128).pow(len as u32);
                if total > BRUTE_FORCE_CAP as u128 {
                    return Err(Error::SizeCap {
                        what: "suffix enumeration".into(),
                        size: total.min(usize::MAX as u128) as usize,
                        cap: BRUTE_FORCE_CAP,
                    });
                }
                Ok(all_words(self.n, len)
                    .filter(|w| self.index_of(&a.concat(w)).is_some() && self.index_of(&b.concat(w)).is_some())
                    .collect())
            }
        }
    }
}

fn check_alphabet(n: usize) -> Result<()> {
    if !(2..=9).contains(&n) {
        return Err(Error::InvalidInput(format!("alphabet size must lie in 2..=9, got {n}")));
    }
    Ok(())
}

/// (n^{L+1} − 1)/(n − 1).
pub fn full_size(n: usize, depth: usize) -> u128 {
    (0..=depth).map(|l| (n as u128).saturating_pow(l as u32)).sum()
}

fn tail_size(n: usize, depth: usize, prefix: usize) -> u128 {
    (0..=depth).map(|l| (n as u128).saturating_pow(l.min(prefix) as u32)).sum()
}

/// Number of copies [r + km, r + k(m+1)) lying inside levels 0..=depth.
pub fn complete_copies(depth: usize, r: usize, k: usize) -> usize {
    if depth + 1 < r + k {
        0
    } else {
        (depth + 1 - r) / k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_basis_sizes() {
        for (n, l) in [(2, 4), (3, 3), (5, 2)] {
            let f = TruncatedFock::full(n, l).unwrap();
            assert_eq!(f.dim() as u128, ((n as u128).pow(l as u32 + 1) - 1) / (n as u128 - 1));
            for lev in 0..=l {
                assert_eq!(f.level_range(lev).len(), n.pow(lev as u32));
            }
        }
    }

    #[test]
    fn word_round_trip() {
        let w = Word::parse("1221").unwrap();
        assert_eq!(w.to_string(), "1221");
        assert_eq!(Word::parse("Ω").unwrap(), Word::vacuum());
        assert_eq!(Word::vacuum().to_string(), "Ω");
        assert!(Word::parse("10").is_err());
    }

    #[test]
    fn tail_sector_is_prefix_closed() {
        let f = TruncatedFock::tail(2, 8, 3).unwrap();
        for w in f.words() {
            for cut in 0..w.len() {
                assert!(f.index_of(&Word(w.0[..cut].to_vec())).is_some());
            }
            assert!(w.0.iter().skip(3).all(|&c| c == 0));
        }
        assert_eq!(f.dim(), 1 + 2 + 4 + 8 * 6);
    }

    #[test]
    fn lambda_sector_copies() {
        let f = TruncatedFock::lambda(2, 20, 4, 4).unwrap();
        assert_eq!(f.sector(), Sector::Lambda { r: 4, k: 4, copies: 4 });
        assert_eq!(f.dim(), 240 * 4);
        let f = TruncatedFock::lambda(2, 20, 6, 4).unwrap();
        assert_eq!(f.dim(), 960 * 3);
    }

    #[test]
    fn extensions_by_sector() {
        let full = TruncatedFock::full(2, 5).unwrap();
        let a = Word::parse("12").unwrap();
        assert_eq!(full.common_extensions(&a, &Word::vacuum(), 3).unwrap().len(), 8);
        assert!(full.common_extensions(&a, &a, 4).unwrap().is_empty());
        let tail = TruncatedFock::tail(2, 6, 3).unwrap();
        assert_eq!(tail.common_extensions(&a, &Word::vacuum(), 3).unwrap().len(), 2);
        let lam = TruncatedFock::lambda(2, 9, 2, 2).unwrap();
        let u = Word::parse("21").unwrap();
        assert_eq!(lam.common_extensions(&u, &u, 2).unwrap(), vec![vec![0, 0]]);
        assert_eq!(lam.common_extensions(&u, &u, 6).unwrap(), vec![vec![0; 6]]);
        assert!(lam.common_extensions(&u, &u, 8).unwrap().is_empty());
    }
}
