use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Largest index accepted by [`euler_number`].
pub const MAX_INDEX: usize = 400;

/// `|E_{2k}|`, the unsigned Euler (secant) number for `two_k = 2k`.
///
/// Uses the signed recurrence `Σ_{j=0}^{k} C(2k, 2j) E_{2j} = 0`, exactly in
/// big integers.
pub fn euler_number(two_k: usize) -> Result<BigUint> {
    if !two_k.is_multiple_of(2) {
        return Err(Error::arg("two_k", format!("must be even, got {two_k}")));
    }
    if two_k > MAX_INDEX {
        return Err(Error::arg("two_k", format!("must be <= {MAX_INDEX}, got {two_k}")));
    }
    let k = two_k / 2;
    let mut signed: Vec<BigInt> = Vec::with_capacity(k + 1);
    signed.push(BigInt::one());
    for n in 1..=k {
        // binomials C(2n, 2j) built along row 2n
        let row = binomial_row(2 * n);
        let mut acc = BigInt::zero();
        for (j, e) in signed.iter().enumerate() {
            acc += &row[2 * j] * e;
        }
        signed.push(-acc);
    }
    Ok(signed[k].abs().to_biguint().expect("absolute value is nonnegative"))
}

/// `B_0, …, B_n` with `B_1 = −1/2`, from `Σ_{j=0}^{m} C(m+1, j) B_j = 0`.
pub fn bernoulli_numbers(n: usize) -> Result<Vec<BigRational>> {
    if n > MAX_INDEX {
        return Err(Error::arg("n", format!("must be <= {MAX_INDEX}, got {n}")));
    }
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        let row = binomial_row(m + 1);
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(row[j].clone()) * bj;
        }
        b.push(-acc / BigRational::from_integer(row[m].clone()));
    }
    Ok(b)
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one(); n + 1];
    let mut c = BigInt::one();
    for k in 1..=n {
        c = c * BigInt::from(n + 1 - k) / BigInt::from(k);
        row[k] = c.clone();
    }
    row
}
