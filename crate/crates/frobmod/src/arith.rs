//! Small integer-arithmetic helpers used throughout the crate.

/// Trial-division primality test; sufficient for the desk-scale inputs here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Factor `n` into `(prime, exponent)` pairs, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// If `n` is a prime power `ell^e` with `e >= 1`, return `(ell, e)`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    let f = factorize(n);
    if f.len() == 1 {
        Some(f[0])
    } else {
        None
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u128, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, when it exists.
pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// `ell`-adic valuation of `n`; `None` encodes +infinity (n = 0).
pub fn valuation(n: u64, ell: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut n = n;
    let mut v = 0;
    while n % ell == 0 {
        n /= ell;
        v += 1;
    }
    Some(v)
}

pub fn ipow(base: u64, exp: u32) -> u128 {
    (base as u128).pow(exp)
}

/// Multiplicative order of `a` modulo `m`, given the factorization of a
/// multiple `bound` of the order (typically the group order).
pub fn mult_order(a: u64, m: u64, bound: u64) -> u64 {
    let mut ord = bound;
    for (p, _) in factorize(bound) {
        while ord % p == 0 && mod_pow(a, (ord / p) as u128, m) == 1 {
            ord /= p;
        }
    }
    ord
}
