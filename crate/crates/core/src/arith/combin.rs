//! Integer combinatorics over arbitrary-precision naturals.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{contract, Result};

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    // acc = C(n - k + i, i) after step i; each division is exact.
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// `a (a-1) ... (a-m+1)`; one for `m = 0`, zero for `m > a`.
pub fn falling_factorial(a: u64, m: u64) -> BigUint {
    if m > a {
        return BigUint::zero();
    }
    (a - m + 1..=a).fold(BigUint::one(), |acc, x| acc * x)
}

pub fn factorial(n: u64) -> BigUint {
    falling_factorial(n, n)
}

/// `k! / prod_j s_j!`. The parts must sum to `k`.
pub fn multinomial_coeff(k: u64, parts: &[u64]) -> Result<BigUint> {
    let total: u64 = parts.iter().sum();
    if total != k {
        return Err(contract(format!("multinomial parts sum to {total}, expected {k}")));
    }
    let mut acc = BigUint::one();
    let mut running = 0u64;
    for &s in parts {
        running += s;
        acc *= binomial(running, s);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fact_oracle(n: u64) -> BigUint {
        let mut acc = BigUint::one();
        let mut i = 1u64;
        while i <= n {
            acc *= i;
            i += 1;
        }
        acc
    }

    #[test]
    fn binomial_examples() {
        for n in 0..20 {
            assert_eq!(binomial(n, 0), BigUint::one());
        }
        // factorial-ratio oracle: 4! / (2! 2!)
        assert_eq!(fact_oracle(4) / (fact_oracle(2) * fact_oracle(2)), BigUint::from(6u32));
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
    }

    #[test]
    fn multinomial_examples() {
        for k in 0..8 {
            let mut parts = vec![0; 4];
            parts[0] = k;
            assert_eq!(multinomial_coeff(k, &parts).unwrap(), BigUint::one());
        }
        assert_eq!(multinomial_coeff(2, &[1, 1]).unwrap(), BigUint::from(2u32));
        assert_eq!(
            fact_oracle(4) / (fact_oracle(2) * fact_oracle(1) * fact_oracle(1)),
            BigUint::from(12u32)
        );
        assert_eq!(multinomial_coeff(4, &[2, 1, 1]).unwrap(), BigUint::from(12u32));
    }

    #[test]
    fn multinomial_sum_mismatch() {
        assert!(multinomial_coeff(3, &[1, 1]).is_err());
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5, 0), BigUint::one());
        assert_eq!(falling_factorial(5, 2), BigUint::from(5u32 * 4));
        assert_eq!(falling_factorial(3, 4), BigUint::zero());
        assert_eq!(falling_factorial(0, 0), BigUint::one());
    }

    #[test]
    fn large_binomial_matches_factorials() {
        let n = 120;
        let k = 47;
        assert_eq!(binomial(n, k), fact_oracle(n) / (fact_oracle(k) * fact_oracle(n - k)));
    }

    proptest! {
        #[test]
        fn binomial_symmetry(n in 0u64..80, k in 0u64..80) {
            prop_assume!(k <= n);
            prop_assert_eq!(binomial(n, k), binomial(n, n - k));
        }

        #[test]
        fn multinomial_times_factorials(parts in prop::collection::vec(0u64..7, 1..5)) {
            let k: u64 = parts.iter().sum();
            let denom = parts.iter().fold(BigUint::one(), |acc, &s| acc * fact_oracle(s));
            prop_assert_eq!(multinomial_coeff(k, &parts).unwrap() * denom, fact_oracle(k));
        }

        #[test]
        fn falling_is_binomial_times_factorial(n in 0u64..60, k in 0u64..60) {
            prop_assert_eq!(falling_factorial(n, k), binomial(n, k) * fact_oracle(k));
        }
    }
}
