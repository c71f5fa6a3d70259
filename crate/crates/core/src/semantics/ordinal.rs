//! Ordinal positions of fixpoint iterates, in Cantor-style normal form
//! `w^k*a_k + ... + w*a_1 + a_0` with finite support.

use std::cmp::Ordering;
use std::fmt;

/// Ordinal below `w^w`: coefficient vector, index = power of `w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct OrdinalCounter {
    /// `coeffs[k]` is the coefficient of `w^k`; no trailing zeros.
    coeffs: Vec<u64>,
}

impl OrdinalCounter {
    pub fn zero() -> OrdinalCounter {
        OrdinalCounter::default()
    }

    pub fn finite(n: u64) -> OrdinalCounter {
        let mut o = OrdinalCounter::default();
        o.set_coeff(0, n);
        o
    }

    pub fn omega_times(k: u64) -> OrdinalCounter {
        let mut o = OrdinalCounter::default();
        o.set_coeff(1, k);
        o
    }

    pub fn coeff(&self, power: usize) -> u64 {
        self.coeffs.get(power).copied().unwrap_or(0)
    }

    fn set_coeff(&mut self, power: usize, value: u64) {
        if self.coeffs.len() <= power {
            self.coeffs.resize(power + 1, 0);
        }
        self.coeffs[power] = value;
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    /// Successor ordinal.
    pub fn succ(&self) -> OrdinalCounter {
        let mut o = self.clone();
        o.set_coeff(0, o.coeff(0) + 1);
        o
    }

    /// The least limit ordinal of the form `w^level * a` strictly above
    /// `self`: zeroes all coefficients below `level` and increments the
    /// coefficient of `w^level`.
    pub fn limit_bump(&self, level: usize) -> OrdinalCounter {
        assert!(level >= 1);
        let mut o = self.clone();
        for k in 0..level {
            o.set_coeff(k, 0);
        }
        o.set_coeff(level, self.coeff(level) + 1);
        o
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl PartialOrd for OrdinalCounter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdinalCounter {
    fn cmp(&self, other: &Self) -> Ordering {
        // Lexicographic on descending powers.
        let n = self.coeffs.len().max(other.coeffs.len());
        for k in (0..n).rev() {
            match self.coeff(k).cmp(&other.coeff(k)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for OrdinalCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for k in (0..self.coeffs.len()).rev() {
            let a = self.coeff(k);
            if a == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "w*{a}")?,
                _ => write!(f, "w^{k}*{a}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_display() {
        let w2 = OrdinalCounter::omega_times(2);
        let w_plus_3 = OrdinalCounter::omega_times(1).succ().succ().succ();
        assert!(w_plus_3 < w2);
        assert_eq!(w2.to_string(), "w*2");
        assert_eq!(w_plus_3.to_string(), "w*1 + 3");
        assert_eq!(OrdinalCounter::zero().to_string(), "0");
        let w_sq = w2.limit_bump(2);
        assert_eq!(w_sq.to_string(), "w^2*1");
        assert!(w2 < w_sq);
    }

    #[test]
    fn limit_bump_zeroes_lower_coefficients() {
        let o = OrdinalCounter::omega_times(1).succ().succ();
        assert_eq!(o.limit_bump(1), OrdinalCounter::omega_times(2));
    }
}
