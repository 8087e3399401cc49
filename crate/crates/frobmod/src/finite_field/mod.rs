//! Exact arithmetic in F_p and F_{p^k}: field contexts with deterministic
//! modulus polynomials, element arithmetic in the power basis, quadratic
//! characters, and norms down to the prime field.

pub mod poly;

pub use poly::Poly;

use crate::arith::{self, mod_inv, mod_mul, mod_pow};
use crate::{Error, Result};

/// Fields at or below this size use exhaustive scans for roots and squares.
pub const SCAN_FIELD_CAP: u128 = 1_000_000;

/// An element of F_{p^k}, as coordinates in the power basis of its context.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldElement {
    pub coeffs: Vec<u64>,
}

/// A finite field F_{p^k} with its modulus polynomial. Immutable once built;
/// elements only make sense relative to the context that produced them.
#[derive(Clone, Debug)]
pub struct FieldCtx {
    pub p: u64,
    pub k: usize,
    /// Monic, irreducible, degree k; coefficient i is of x^i, length k + 1.
    pub modulus_poly: Vec<u64>,
    q: u128,
}

/// Deterministic field construction: the modulus is the first irreducible
/// monic polynomial in lexicographic coefficient order starting from `seed`
/// (wrapping), so (p, k, seed) always yields the same context.
pub fn field_make(p: u64, k: usize, seed: u64) -> Result<FieldCtx> {
    if !arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("extension degree must be >= 1".into()));
    }
    let q = (p as u128)
        .checked_pow(k as u32)
        .filter(|q| *q < (1u128 << 100))
        .ok_or(Error::FieldCap(u128::MAX))?;
    let space = q;
    let mut offset = seed as u128 % space;
    loop {
        let mut candidate = vec![0u64; k + 1];
        let mut idx = offset;
        for c in candidate.iter_mut().take(k) {
            *c = (idx % p as u128) as u64;
            idx /= p as u128;
        }
        candidate[k] = 1;
        if fp_irreducible(&candidate, p) {
            return Ok(FieldCtx { p, k, modulus_poly: candidate, q });
        }
        offset = (offset + 1) % space;
    }
}

impl FieldCtx {
    pub fn order(&self) -> u128 {
        self.q
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coeffs: vec![0; self.k] }
    }

    pub fn one(&self) -> FieldElement {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> FieldElement {
        let mut coeffs = vec![0; self.k];
        coeffs[0] = c % self.p;
        FieldElement { coeffs }
    }

    /// Canonical index in [0, q): sum of coeffs[i] p^i.
    pub fn index(&self, a: &FieldElement) -> u128 {
        let mut idx = 0u128;
        for &c in a.coeffs.iter().rev() {
            idx = idx * self.p as u128 + c as u128;
        }
        idx
    }

    pub fn from_index(&self, mut idx: u128) -> FieldElement {
        let mut coeffs = vec![0; self.k];
        for c in coeffs.iter_mut() {
            *c = (idx % self.p as u128) as u64;
            idx /= self.p as u128;
        }
        FieldElement { coeffs }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |i| self.from_index(i))
    }

    pub fn is_zero(&self, a: &FieldElement) -> bool {
        a.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + y) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + self.p - y) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let coeffs = a.coeffs.iter().map(|&x| (self.p - x) % self.p).collect();
        FieldElement { coeffs }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        if self.k == 1 {
            return FieldElement { coeffs: vec![mod_mul(a.coeffs[0], b.coeffs[0], self.p)] };
        }
        let mut prod = vec![0u128; 2 * self.k - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u128 * y as u128) % self.p as u128;
            }
        }
        // reduce by the monic modulus
        for i in (self.k..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (j, &m) in self.modulus_poly.iter().enumerate().take(self.k) {
                let idx = i - self.k + j;
                prod[idx] = (prod[idx] + c * (self.p as u128 - m as u128)) % self.p as u128;
            }
        }
        FieldElement { coeffs: prod[..self.k].iter().map(|&c| c as u64).collect() }
    }

    pub fn scale(&self, a: &FieldElement, c: u64) -> FieldElement {
        let c = c % self.p;
        FieldElement { coeffs: a.coeffs.iter().map(|&x| mod_mul(x, c, self.p)).collect() }
    }

    pub fn pow(&self, a: &FieldElement, mut exp: u128) -> FieldElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if self.is_zero(a) {
            return None;
        }
        if self.k == 1 {
            return mod_inv(a.coeffs[0], self.p).map(|v| FieldElement { coeffs: vec![v] });
        }
        Some(self.pow(a, self.q - 2))
    }

    /// x -> x^p, the generator of the Galois group over F_p.
    pub fn frobenius(&self, a: &FieldElement) -> FieldElement {
        self.pow(a, self.p as u128)
    }

    pub fn is_square(&self, a: &FieldElement) -> bool {
        if self.p == 2 || self.is_zero(a) {
            return true;
        }
        self.pow(a, (self.q - 1) / 2) == self.one()
    }

    /// Smallest-index generator of the multiplicative group.
    pub fn multiplicative_generator(&self) -> FieldElement {
        let factors = crate::arith::factorize((self.q - 1) as u64);
        'outer: for idx in 1..self.q {
            let g = self.from_index(idx);
            for (r, _) in &factors {
                if self.pow(&g, (self.q - 1) / *r as u128) == self.one() {
                    continue 'outer;
                }
            }
            return g;
        }
        unreachable!("every finite field has a primitive element")
    }
}

/// Legendre symbol by Euler's criterion; prime fields only.
pub fn legendre(ctx: &FieldCtx, a: &FieldElement) -> Result<i32> {
    if ctx.k != 1 {
        return Err(Error::InvalidArgument("legendre symbol needs a prime field".into()));
    }
    let r = mod_pow(a.coeffs[0], ((ctx.p - 1) / 2) as u128, ctx.p);
    Ok(if r == 0 {
        0
    } else if r == 1 {
        1
    } else {
        -1
    })
}

/// Norm from F_{p^k} down to F_p: the product of all Galois conjugates.
pub fn norm_to_prime(ctx: &FieldCtx, a: &FieldElement) -> u64 {
    let mut acc = ctx.one();
    let mut conj = a.clone();
    for _ in 0..ctx.k {
        acc = ctx.mul(&acc, &conj);
        conj = ctx.frobenius(&conj);
    }
    debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0), "norm must land in F_p");
    acc.coeffs[0]
}

/// Quadratic-character lookup table over a whole (small) field, indexed by
/// element index: 0 at zero, +1 on squares, -1 on nonsquares.
pub struct CharTable {
    chi: Vec<i8>,
}

impl CharTable {
    pub fn new(ctx: &FieldCtx) -> Result<CharTable> {
        if ctx.order() > SCAN_FIELD_CAP {
            return Err(Error::FieldCap(ctx.order()));
        }
        let q = ctx.order() as usize;
        let mut chi = vec![-1i8; q];
        chi[0] = 0;
        for i in 0..q as u128 {
            let e = ctx.from_index(i);
            let sq = ctx.index(&ctx.mul(&e, &e));
            chi[sq as usize] = if sq == 0 { 0 } else { 1 };
        }
        Ok(CharTable { chi })
    }

    #[inline]
    pub fn chi(&self, index: u128) -> i8 {
        self.chi[index as usize]
    }
}

// ---- polynomial arithmetic over F_p on raw coefficient vectors, used for
// ---- the irreducibility test that bootstraps a context

fn fp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p).expect("monic modulus");
    while r.len() > dm {
        let c = mod_mul(*r.last().unwrap(), lead_inv, p);
        let shift = r.len() - 1 - dm;
        for (j, &mc) in m.iter().enumerate() {
            let idx = shift + j;
            r[idx] = (r[idx] + p - mod_mul(c, mc, p)) % p;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mod_mul(x, y, p)) % p;
        }
    }
    fp_rem(&prod, m, p)
}

fn fp_powmod(base: &[u64], mut exp: u128, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut base = fp_rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = fp_mulmod(&acc, &base, m, p);
        }
        base = fp_mulmod(&base, &base, m, p);
        exp >>= 1;
    }
    acc
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        let mut monic = b.clone();
        let inv = mod_inv(*monic.last().unwrap(), p).unwrap();
        for c in monic.iter_mut() {
            *c = mod_mul(*c, inv, p);
        }
        let r = fp_rem(&a, &monic, p);
        a = b;
        b = r;
    }
    a
}

fn fp_sub_x(mut a: Vec<u64>, p: u64) -> Vec<u64> {
    if a.len() < 2 {
        a.resize(2, 0);
    }
    a[1] = (a[1] + p - 1) % p;
    fp_trim(&mut a);
    a
}

/// Monic f of degree k is irreducible iff x^{p^k} = x mod f and
/// gcd(x^{p^{k/r}} - x, f) = 1 for every prime r dividing k.
fn fp_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    let x = vec![0u64, 1];
    let top = fp_powmod(&x, (p as u128).pow(k as u32), f, p);
    if fp_rem(&fp_sub_x(top, p), f, p) != Vec::<u64>::new() {
        return false;
    }
    for (r, _) in arith::factorize(k as u64) {
        let sub = fp_powmod(&x, (p as u128).pow((k as u64 / r) as u32), f, p);
        let g = fp_gcd(&fp_sub_x(sub, p), f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}
