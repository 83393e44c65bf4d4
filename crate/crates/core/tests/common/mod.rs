//! Oracles shared by the integration tests. Nothing here calls into the
//! library's series or Lyndon code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};

fn sigma3(n: u64) -> BigInt {
    (1..=n).filter(|d| n % d == 0).map(|d| BigInt::from(d).pow(3)).sum()
}

fn mul_trunc(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `c(-1), c(0), ..., c(n_max)` of `J = E4^3 / Delta - 744`, from plain
/// integer power series.
pub fn j_coefficients(n_max: usize) -> Vec<BigInt> {
    let len = n_max + 2;
    let mut e4 = vec![BigInt::zero(); len];
    e4[0] = BigInt::one();
    for n in 1..len {
        e4[n] = BigInt::from(240) * sigma3(n as u64);
    }
    let e4_cubed = mul_trunc(&mul_trunc(&e4, &e4, len), &e4, len);
    // prod (1 - q^n)^24 = Delta / q
    let mut p = vec![BigInt::zero(); len];
    p[0] = BigInt::one();
    for n in 1..len {
        for _ in 0..24 {
            for i in (n..len).rev() {
                let t = p[i - n].clone();
                p[i] -= t;
            }
        }
    }
    // 1 / p by the recursion inv[i] = -sum_{k>=1} p[k] inv[i-k]
    let mut inv = vec![BigInt::zero(); len];
    inv[0] = BigInt::one();
    for i in 1..len {
        let mut s = BigInt::zero();
        for k in 1..=i {
            s += &p[k] * &inv[i - k];
        }
        inv[i] = -s;
    }
    let mut c = mul_trunc(&e4_cubed, &inv, len);
    c[1] -= 744;
    c
}

/// `c(n)` for `n >= -1`.
pub fn c(n: i64) -> BigInt {
    j_coefficients(n.max(0) as usize)[(n + 1) as usize].clone()
}

/// Lyndon words as the aperiodic words that are strictly smaller than every
/// nontrivial rotation.
pub fn is_lyndon_by_rotation(w: &[usize]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        let rot: Vec<usize> = w[r..].iter().chain(&w[..r]).copied().collect();
        w < rot.as_slice()
    })
}

/// Number of Lyndon words whose letter degrees sum to `d`.
pub fn brute_force_lyndon_count(degrees: &[(i64, i64)], d: (i64, i64)) -> usize {
    fn go(degrees: &[(i64, i64)], d: (i64, i64), acc: (i64, i64), w: &mut Vec<usize>, count: &mut usize) {
        if acc == d && !w.is_empty() {
            if is_lyndon_by_rotation(w) {
                *count += 1;
            }
            return;
        }
        for (i, (m, n)) in degrees.iter().enumerate() {
            let next = (acc.0 + m, acc.1 + n);
            if next.0 <= d.0 && next.1 <= d.1 {
                w.push(i);
                go(degrees, d, next, w, count);
                w.pop();
            }
        }
    }
    let mut count = 0;
    go(degrees, d, (0, 0), &mut Vec::new(), &mut count);
    count
}
