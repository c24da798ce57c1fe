//! Fixed-length bit rows indexed by field elements.
//!
//! Bit `v` lives in word `v / 64` at position `v % 64`. Bits at or beyond
//! `len` in the last word are always zero, so whole-word popcounts are exact.

/// A row of `len` bits packed into `u64` words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

/// Mask of the valid bits in the last word of a row of `len` bits.
#[inline]
pub(crate) fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            len,
            words: vec![0; word_count(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut row = BitRow {
            len,
            words: vec![u64::MAX; word_count(len)],
        };
        row.clear_tail();
        row
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut row = Self::zeros(len);
        for i in indices {
            row.set(i);
        }
        row
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for row of {}", self.len);
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for row of {}", self.len);
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn or_assign(&mut self, other: &BitRow) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn and_not_assign(&mut self, other: &BitRow) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn and_count(&self, other: &BitRow) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Reads `width <= 64` consecutive bits starting at `start`, wrapping
    /// around the end of the row. Requires `width <= len` and `start < len`.
    #[inline]
    pub fn read_cyclic(&self, start: usize, width: usize) -> u64 {
        debug_assert!(width <= 64 && width <= self.len && start < self.len);
        if start + width <= self.len {
            self.read_linear(start, width)
        } else {
            let head = self.len - start;
            let low = self.read_linear(start, head);
            let high = self.read_linear(0, width - head);
            low | (high << head)
        }
    }

    #[inline]
    fn read_linear(&self, start: usize, width: usize) -> u64 {
        if width == 0 {
            return 0;
        }
        let wi = start >> 6;
        let off = start & 63;
        let mut v = self.words[wi] >> off;
        if off != 0 && off + width > 64 {
            v |= self.words[wi + 1] << (64 - off);
        }
        if width == 64 {
            v
        } else {
            v & ((1u64 << width) - 1)
        }
    }

    /// Word `w` of the cyclic rotation by `shift`: bit `v` of the result is
    /// bit `(v - shift) mod len` of `self`.
    #[inline]
    pub fn rotated_word(&self, shift: usize, w: usize) -> u64 {
        let base = w * 64;
        let width = (self.len - base).min(64);
        let start = (base + self.len - shift) % self.len;
        self.read_cyclic(start, width)
    }

    /// Cyclic rotation by `shift` (bit `v` moves to `v + shift mod len`).
    pub fn rotated(&self, shift: usize) -> BitRow {
        let shift = shift % self.len.max(1);
        let words = (0..self.words.len())
            .map(|w| self.rotated_word(shift, w))
            .collect();
        BitRow {
            len: self.len,
            words,
        }
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }
}

impl std::fmt::Debug for BitRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitRow[{}]{{", self.len)?;
        let mut first = true;
        for i in self.iter_ones() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        write!(f, "}}")
    }
}
