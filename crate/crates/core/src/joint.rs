//! Mixed-radix indexing of joint actions. Agent 0 is the most significant
//! digit, so index order coincides with lexicographic order.

use crate::error::{Error, Result};

/// Default cap on the number of joint actions an exhaustive routine may
/// enumerate.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Environment variable overriding [`DEFAULT_ENUM_CAP`] in the front ends.
pub const ENUM_CAP_ENV: &str = "ADGMARL_ENUM_CAP";

/// Reads the cap from [`ENUM_CAP_ENV`], falling back to the default.
pub fn enum_cap_from_env() -> Result<u64> {
    match std::env::var(ENUM_CAP_ENV) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{ENUM_CAP_ENV}={raw} is not an integer"))),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointActionSpace {
    radices: Vec<usize>,
    size: u128,
}

impl JointActionSpace {
    pub fn new(radices: &[usize]) -> Self {
        let size = radices.iter().map(|&r| r as u128).product();
        Self {
            radices: radices.to_vec(),
            size,
        }
    }

    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    /// Size as `usize`, or an error when it exceeds `cap`.
    pub fn checked_size(&self, cap: u64) -> Result<usize> {
        if self.size > cap as u128 {
            return Err(Error::EnumerationCap { size: self.size, cap });
        }
        Ok(self.size as usize)
    }

    pub fn index(&self, action: &[usize]) -> usize {
        action
            .iter()
            .zip(&self.radices)
            .fold(0, |acc, (&a, &r)| acc * r + a)
    }

    pub fn decode(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &r) in out.iter_mut().zip(&self.radices).rev() {
            *slot = index % r;
            index /= r;
        }
    }

    /// Advances `action` to its lexicographic successor; `false` on wrap.
    pub fn advance(&self, action: &mut [usize]) -> bool {
        for (slot, &r) in action.iter_mut().zip(&self.radices).rev() {
            *slot += 1;
            if *slot < r {
                return true;
            }
            *slot = 0;
        }
        false
    }

    pub fn contains(&self, action: &[usize]) -> bool {
        action.len() == self.radices.len() && action.iter().zip(&self.radices).all(|(&a, &r)| a < r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_follows_lexicographic_order() {
        let space = JointActionSpace::new(&[2, 3, 2]);
        assert_eq!(space.size(), 12);
        let mut a = vec![0; 3];
        let mut expected = 0;
        loop {
            assert_eq!(space.index(&a), expected);
            let mut back = vec![0; 3];
            space.decode(expected, &mut back);
            assert_eq!(back, a);
            expected += 1;
            if !space.advance(&mut a) {
                break;
            }
        }
        assert_eq!(expected, 12);
    }

    #[test]
    fn cap_is_enforced() {
        let space = JointActionSpace::new(&[10; 8]);
        assert_eq!(
            space.checked_size(1_000_000),
            Err(Error::EnumerationCap { size: 100_000_000, cap: 1_000_000 })
        );
        assert_eq!(space.checked_size(DEFAULT_ENUM_CAP * 10), Ok(100_000_000));
    }
}
