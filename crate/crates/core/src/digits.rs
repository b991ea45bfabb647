//! Binary digit sums and the Thue–Morse sequence.
//!
//! `s(n)` is the number of ones in the binary expansion of `n`, `s_λ(n)` is
//! `s(n mod 2^λ)` and `t(n) = s(n) mod 2`. Machine-word inputs go straight to
//! the hardware population count; arbitrary-precision inputs are summed limb
//! by limb.

use num_bigint::BigUint;

/// Nonnegative integer of arbitrary size.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitWord(pub BigUint);

impl From<u64> for BitWord {
    fn from(v: u64) -> Self {
        BitWord(BigUint::from(v))
    }
}

impl From<u128> for BitWord {
    fn from(v: u128) -> Self {
        BitWord(BigUint::from(v))
    }
}

/// Integers whose binary digits can be summed.
pub trait BinaryDigits {
    /// `s(n)`.
    fn digit_sum(&self) -> u64;
    /// `s(n mod 2^λ)`.
    fn truncated_digit_sum(&self, lambda: u32) -> u64;
    /// `t(n)`.
    fn thue_morse(&self) -> u8 {
        (self.digit_sum() & 1) as u8
    }
}

impl BinaryDigits for u64 {
    #[inline]
    fn digit_sum(&self) -> u64 {
        u64::from(self.count_ones())
    }

    #[inline]
    fn truncated_digit_sum(&self, lambda: u32) -> u64 {
        if lambda >= 64 {
            self.digit_sum()
        } else {
            u64::from((self & ((1u64 << lambda) - 1)).count_ones())
        }
    }
}

impl BinaryDigits for u128 {
    #[inline]
    fn digit_sum(&self) -> u64 {
        u64::from(self.count_ones())
    }

    #[inline]
    fn truncated_digit_sum(&self, lambda: u32) -> u64 {
        if lambda >= 128 {
            self.digit_sum()
        } else {
            u64::from((self & ((1u128 << lambda) - 1)).count_ones())
        }
    }
}

impl BinaryDigits for BigUint {
    fn digit_sum(&self) -> u64 {
        self.iter_u64_digits().map(|limb| u64::from(limb.count_ones())).sum()
    }

    fn truncated_digit_sum(&self, lambda: u32) -> u64 {
        let full_limbs = (lambda / 64) as usize;
        let rem = lambda % 64;
        let mut total = 0u64;
        for (idx, limb) in self.iter_u64_digits().enumerate() {
            if idx < full_limbs {
                total += u64::from(limb.count_ones());
            } else {
                if idx == full_limbs && rem > 0 {
                    total += u64::from((limb & ((1u64 << rem) - 1)).count_ones());
                }
                break;
            }
        }
        total
    }
}

impl BinaryDigits for BitWord {
    fn digit_sum(&self) -> u64 {
        self.0.digit_sum()
    }

    fn truncated_digit_sum(&self, lambda: u32) -> u64 {
        self.0.truncated_digit_sum(lambda)
    }
}

/// Number of set bits of `n`.
#[inline]
pub fn sum_of_digits(n: u64) -> u64 {
    n.digit_sum()
}

/// `s(n mod 2^λ)`.
#[inline]
pub fn truncated_sum_of_digits(n: u64, lambda: u32) -> u64 {
    n.truncated_digit_sum(lambda)
}

/// `s(n) mod 2`.
#[inline]
pub fn thue_morse(n: u64) -> u8 {
    (n.count_ones() & 1) as u8
}

/// Prefix of the fixed point of `0 -> 01, 1 -> 10` starting with `0`.
///
/// Built by repeated doubling `w -> w w̄`, which yields the same fixed point as
/// symbol-wise substitution.
pub fn thue_morse_prefix_by_substitution(length: usize) -> Vec<u8> {
    let mut word = Vec::with_capacity(length.next_power_of_two().max(1));
    word.push(0u8);
    while word.len() < length {
        let n = word.len();
        for idx in 0..n {
            let complement = 1 - word[idx];
            word.push(complement);
        }
    }
    word.truncate(length.max(1));
    word
}
