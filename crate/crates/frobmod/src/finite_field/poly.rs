//! Univariate polynomials over a field context, with the root-finding needed
//! for division polynomials: exhaustive scan on small fields, x^q - x
//! splitting plus seeded equal-degree factorization on larger ones.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{FieldCtx, FieldElement, SCAN_FIELD_CAP};
use crate::{Error, Result};

/// Dense coefficient vector, constant term first, no trailing zeros.
/// The zero polynomial is the empty vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    pub coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn new(ctx: &FieldCtx, mut coeffs: Vec<FieldElement>) -> Poly {
        while coeffs.last().map(|c| ctx.is_zero(c)) == Some(true) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(ctx: &FieldCtx, c: FieldElement) -> Poly {
        Poly::new(ctx, vec![c])
    }

    pub fn x(ctx: &FieldCtx) -> Poly {
        Poly { coeffs: vec![ctx.zero(), ctx.one()] }
    }

    /// Constant-first coefficients given as small integers.
    pub fn from_ints(ctx: &FieldCtx, ints: &[i64]) -> Poly {
        let p = ctx.p as i64;
        let coeffs = ints
            .iter()
            .map(|&c| ctx.from_u64(c.rem_euclid(p) as u64))
            .collect();
        Poly::new(ctx, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn eval(&self, ctx: &FieldCtx, x: &FieldElement) -> FieldElement {
        let mut acc = ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = ctx.add(&ctx.mul(&acc, x), c);
        }
        acc
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = ctx.zero();
        let coeffs = (0..n)
            .map(|i| {
                ctx.add(
                    self.coeffs.get(i).unwrap_or(&zero),
                    other.coeffs.get(i).unwrap_or(&zero),
                )
            })
            .collect();
        Poly::new(ctx, coeffs)
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = ctx.zero();
        let coeffs = (0..n)
            .map(|i| {
                ctx.sub(
                    self.coeffs.get(i).unwrap_or(&zero),
                    other.coeffs.get(i).unwrap_or(&zero),
                )
            })
            .collect();
        Poly::new(ctx, coeffs)
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| ctx.neg(c)).collect() }
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![ctx.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if ctx.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = ctx.add(&coeffs[i + j], &ctx.mul(a, b));
            }
        }
        Poly::new(ctx, coeffs)
    }

    pub fn scale(&self, ctx: &FieldCtx, c: &FieldElement) -> Poly {
        Poly::new(ctx, self.coeffs.iter().map(|a| ctx.mul(a, c)).collect())
    }

    /// Euclidean division; panics on division by zero.
    pub fn div_rem(&self, ctx: &FieldCtx, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let dd = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dd && !(dd == 0) {
            return (Poly::zero(), self.clone());
        }
        let lead_inv = ctx.inv(divisor.leading().unwrap()).unwrap();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![ctx.zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd || (dd == 0 && !rem.is_empty()) {
            let c = ctx.mul(rem.last().unwrap(), &lead_inv);
            let shift = rem.len() - 1 - dd;
            quot[shift] = c.clone();
            for (j, m) in divisor.coeffs.iter().enumerate() {
                rem[shift + j] = ctx.sub(&rem[shift + j], &ctx.mul(&c, m));
            }
            while rem.last().map(|c| ctx.is_zero(c)) == Some(true) {
                rem.pop();
            }
            if rem.is_empty() {
                break;
            }
        }
        (Poly::new(ctx, quot), Poly { coeffs: rem })
    }

    pub fn rem(&self, ctx: &FieldCtx, divisor: &Poly) -> Poly {
        self.div_rem(ctx, divisor).1
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(ctx, &b);
            a = b;
            b = r;
        }
        a.monic(ctx)
    }

    pub fn monic(&self, ctx: &FieldCtx) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => {
                let inv = ctx.inv(l).unwrap();
                self.scale(ctx, &inv)
            }
        }
    }

    pub fn derivative(&self, ctx: &FieldCtx) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| ctx.scale(c, (i as u64) % ctx.p))
            .collect();
        Poly::new(ctx, coeffs)
    }

    /// self^exp modulo `m`, by square-and-multiply on remainders.
    pub fn pow_mod(&self, ctx: &FieldCtx, mut exp: u128, m: &Poly) -> Poly {
        let mut acc = Poly::constant(ctx, ctx.one()).rem(ctx, m);
        let mut base = self.rem(ctx, m);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(ctx, &base).rem(ctx, m);
            }
            base = base.mul(ctx, &base).rem(ctx, m);
            exp >>= 1;
        }
        acc
    }

    pub fn is_squarefree(&self, ctx: &FieldCtx) -> bool {
        let d = self.derivative(ctx);
        if d.is_zero() {
            return self.degree() == Some(0);
        }
        self.gcd(ctx, &d).degree() == Some(0)
    }

    /// All roots in the context field, each listed once, sorted by element
    /// index. Deterministic: the splitting randomness is seeded from `seed`.
    pub fn roots(&self, ctx: &FieldCtx, seed: u64) -> Result<Vec<FieldElement>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if self.degree() == Some(0) {
            return Ok(Vec::new());
        }
        if ctx.order() <= SCAN_FIELD_CAP {
            let mut out: Vec<FieldElement> =
                ctx.elements().filter(|e| ctx.is_zero(&self.eval(ctx, e))).collect();
            out.sort_by_key(|e| ctx.index(e));
            return Ok(out);
        }
        // split off the product of distinct linear factors: gcd(x^q - x, f)
        let f = self.monic(ctx);
        let xq = Poly::x(ctx).pow_mod(ctx, ctx.order(), &f);
        let lin = xq.sub(ctx, &Poly::x(ctx)).gcd(ctx, &f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        equal_degree_roots(ctx, &lin, &mut rng, &mut out);
        out.sort_by_key(|e| ctx.index(e));
        out.dedup();
        Ok(out)
    }
}

/// Cantor–Zassenhaus splitting of a product of distinct linear factors,
/// collecting the roots. Odd q only (the scan path covers every even-q field
/// within the cap).
fn equal_degree_roots(
    ctx: &FieldCtx,
    f: &Poly,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<FieldElement>,
) {
    match f.degree() {
        None | Some(0) => return,
        Some(1) => {
            // monic x + c, root -c
            out.push(ctx.neg(&f.coeffs[0]));
            return;
        }
        _ => {}
    }
    assert!(ctx.order() % 2 == 1, "splitting requires odd field order");
    loop {
        let a = ctx.from_index(rng.gen_range(0..ctx.order()));
        let probe = Poly::new(ctx, vec![a, ctx.one()]);
        let h = probe.pow_mod(ctx, (ctx.order() - 1) / 2, f);
        let g = h.sub(ctx, &Poly::constant(ctx, ctx.one())).gcd(ctx, f);
        if let Some(d) = g.degree() {
            if d > 0 && d < f.degree().unwrap() {
                let (rest, r) = f.div_rem(ctx, &g);
                debug_assert!(r.is_zero());
                equal_degree_roots(ctx, &g, rng, out);
                equal_degree_roots(ctx, &rest, rng, out);
                return;
            }
        }
    }
}

/// Square roots of `v`: the roots of Y^2 - v, so zero, one, or two elements.
pub fn sqrts(ctx: &FieldCtx, v: &FieldElement, seed: u64) -> Result<Vec<FieldElement>> {
    let f = Poly::new(ctx, vec![ctx.neg(v), ctx.zero(), ctx.one()]);
    f.roots(ctx, seed)
}
