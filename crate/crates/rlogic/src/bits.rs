//! A minimal fixed-length bit buffer backed by `u64` words.

/// Fixed-length bitstring. Bit `i` lives in word `i / 64` at position `i % 64`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Bits {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Bits {
        let mut out = Bits::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    /// The low `len` bits of `value`, bit 0 first.
    pub fn from_u64(value: u64, len: usize) -> Bits {
        assert!(len <= 64);
        let mut out = Bits::zeros(len);
        if len > 0 {
            out.words[0] = value & mask(len);
        }
        out
    }

    /// Overwrite a buffer of at most 64 bits in place.
    pub fn overwrite_u64(&mut self, value: u64) {
        debug_assert!(self.len <= 64);
        if self.len > 0 {
            self.words[0] = value & mask(self.len);
        }
    }

    /// Fill from a word source, masking the final partial word.
    pub fn fill_from(&mut self, mut next_word: impl FnMut() -> u64) {
        let full = self.len / 64;
        for w in self.words.iter_mut().take(full) {
            *w = next_word();
        }
        let rem = self.len % 64;
        if rem > 0 {
            self.words[full] = next_word() & mask(rem);
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / 64];
        if value {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the bits selected by `indices`.
    pub fn parity_of(&self, indices: &[usize]) -> bool {
        indices.iter().fold(false, |acc, &i| acc ^ self.get(i))
    }

    pub fn xor_with(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Render as a 0/1 string, bit 0 first.
    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_flip() {
        let mut b = Bits::zeros(130);
        assert_eq!(b.count_ones(), 0);
        b.set(0, true);
        b.set(64, true);
        b.set(129, true);
        assert!(b.get(0) && b.get(64) && b.get(129));
        assert!(!b.get(1));
        assert_eq!(b.count_ones(), 3);
        b.flip(64);
        assert!(!b.get(64));
    }

    #[test]
    fn xor_is_bitwise() {
        let a = Bits::from_u64(0b1100, 4);
        let mut b = Bits::from_u64(0b1010, 4);
        b.xor_with(&a);
        assert_eq!(b, Bits::from_u64(0b0110, 4));
    }

    #[test]
    fn fill_masks_partial_word() {
        let mut b = Bits::zeros(10);
        b.fill_from(|| u64::MAX);
        assert_eq!(b.count_ones(), 10);
    }

    #[test]
    fn bit_string_order() {
        let b = Bits::from_u64(0b01101, 5);
        assert_eq!(b.to_bit_string(), "10110");
    }
}
