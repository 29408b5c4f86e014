//! Small helpers around `num`'s arbitrary-precision rationals.

use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, Zero};

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "p/q" or "p" into a rational. Whitespace is not accepted.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let mk_err = || format!("invalid rational `{s}` (expected `p` or `p/q`)");
    match s.split_once('/') {
        None => s.parse::<BigInt>().map(Rat::from_integer).map_err(|_| mk_err()),
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| mk_err())?;
            let q: BigInt = q.parse().map_err(|_| mk_err())?;
            if q.is_zero() {
                return Err(format!("invalid rational `{s}` (zero denominator)"));
            }
            Ok(Rat::new(p, q))
        }
    }
}

/// Renders a rational as "p" (integer) or "p/q" (reduced, positive denominator).
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn bigint_is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let root = n.sqrt();
    &root * &root == *n
}

/// Whether `r` is the square of a rational.
pub fn rat_is_square(r: &Rat) -> bool {
    bigint_is_square(r.numer()) && bigint_is_square(r.denom())
}

/// p-adic valuation together with the unit part, as exact data on a rational:
/// `r = p^v * (un/ud)` with `un`, `ud` coprime to `p`.
pub fn padic_split(r: &Rat, p: u64) -> (i64, BigInt, BigInt) {
    assert!(!r.is_zero(), "p-adic split of zero");
    let p = BigInt::from(p);
    let (mut vn, mut num) = (0i64, r.numer().clone());
    while (&num % &p).is_zero() {
        num /= &p;
        vn += 1;
    }
    let (mut vd, mut den) = (0i64, r.denom().clone());
    while (&den % &p).is_zero() {
        den /= &p;
        vd += 1;
    }
    (vn - vd, num, den)
}

/// Least nonnegative residue of `n` modulo `m` (with `m > 0`).
pub fn mod_pos(n: &BigInt, m: u64) -> u64 {
    let m_big = BigInt::from(m);
    let mut r = n % &m_big;
    if r.sign() == Sign::Minus {
        r += &m_big;
    }
    let digits = r.to_u64_digits().1;
    if digits.is_empty() {
        0
    } else {
        digits[0]
    }
}

/// Odd primes dividing `n`, each reported once in increasing order.
pub fn odd_prime_divisors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let two = BigInt::from(2);
    while (&n % &two).is_zero() {
        n /= &two;
    }
    let mut p = BigInt::from(3);
    while &p * &p <= n {
        if (&n % &p).is_zero() {
            out.push(p.to_u64_digits().1[0]);
            while (&n % &p).is_zero() {
                n /= &p;
            }
        }
        p += 2;
    }
    if n > BigInt::one() {
        let digits = n.to_u64_digits().1;
        // The trial division above keeps remaining cofactors word-sized for
        // every determinant this crate produces.
        assert_eq!(digits.len(), 1, "prime factor exceeds u64: {n}");
        out.push(digits[0]);
    }
    out
}

/// Deterministic Miller-Rabin for u64 inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            exp >>= 1;
        }
        acc
    };
    // Sufficient witness set for all u64 per Sinclair.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
