//! Arithmetic in GF(2^k) for small k.

/// Irreducible polynomials over GF(2), indexed by degree (including the
/// leading term).
const MODULI: [u64; 14] = [
    0,
    0b11,
    0b111,
    0b1011,
    0b1_0011,
    0b10_0101,
    0b100_0011,
    0b1000_0011,
    0b1_0001_1011,
    0b10_0001_0001,
    0b100_0000_1001,
    0b1000_0000_0101,
    0b1_0000_0101_0011,
    0b10_0000_0001_1011,
];

pub(crate) const MAX_DEGREE: u32 = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Gf2 {
    degree: u32,
    modulus: u64,
}

impl Gf2 {
    pub(crate) fn new(degree: u32) -> Option<Self> {
        (1..=MAX_DEGREE).contains(&degree).then(|| Gf2 {
            degree,
            modulus: MODULI[degree as usize],
        })
    }

    pub(crate) fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let mut acc = 0;
        let top = 1u64 << self.degree;
        while b != 0 {
            if b & 1 != 0 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Carry-less polynomial remainder, used only to test irreducibility.
    fn poly_rem(mut a: u64, b: u64) -> u64 {
        let db = 63 - b.leading_zeros();
        while a != 0 && 63 - a.leading_zeros() >= db {
            let shift = (63 - a.leading_zeros()) - db;
            a ^= b << shift;
        }
        a
    }

    #[test]
    fn moduli_are_irreducible() {
        for degree in 1..=MAX_DEGREE {
            let m = MODULI[degree as usize];
            assert_eq!(63 - m.leading_zeros(), degree);
            // any factorisation has a factor of degree ≤ degree/2
            for d in 2u64..(1 << (degree / 2 + 1)) {
                if 63 - d.leading_zeros() > degree / 2 {
                    continue;
                }
                assert_ne!(poly_rem(m, d), 0, "degree {degree}: divisible by {d:#b}");
            }
        }
    }

    #[test]
    fn multiplication_is_a_field() {
        for degree in 1..=6 {
            let f = Gf2::new(degree).unwrap();
            let n = 1u64 << degree;
            for a in 1..n {
                // every nonzero element has an inverse
                assert!((1..n).any(|b| f.mul(a, b) == 1));
                for b in 0..n {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert!(f.mul(a, b) < n);
                }
            }
        }
    }
}
