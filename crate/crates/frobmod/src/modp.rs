//! Trace of Frobenius mod p through the Hasse-invariant coefficient c_{A,B}:
//! its closed-form binomial expansion, the norm identity T = N(c_{A,B}) mod p,
//! squarefreeness of its dehomogenization, and exhaustive trace histograms.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::arith::{self, mod_inv, mod_mul};
use crate::elliptic::{point_count_with, Curve};
use crate::finite_field::{field_make, norm_to_prime, CharTable, FieldCtx, FieldElement, Poly};
use crate::{Error, Result};

pub const HISTOGRAM_CAP: u128 = 10_000_000;

/// Sparse bivariate polynomial in (A, B) over F_p whose every term has
/// (2,3)-weighted degree (p-1)/2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedPoly {
    pub p: u64,
    /// (exponent of A, exponent of B) -> nonzero coefficient mod p.
    pub terms: BTreeMap<(u32, u32), u64>,
}

impl WeightedPoly {
    pub fn eval(&self, ctx: &FieldCtx, a: &FieldElement, b: &FieldElement) -> FieldElement {
        assert_eq!(ctx.p, self.p);
        let mut acc = ctx.zero();
        for (&(ia, ib), &c) in &self.terms {
            let mut term = ctx.from_u64(c);
            term = ctx.mul(&term, &ctx.pow(a, ia as u128));
            term = ctx.mul(&term, &ctx.pow(b, ib as u128));
            acc = ctx.add(&acc, &term);
        }
        acc
    }
}

fn binomials_mod_p(p: u64) -> Vec<u64> {
    // factorials up to p - 1 are all invertible mod p
    let mut fact = vec![1u64; p as usize];
    for i in 1..p as usize {
        fact[i] = mod_mul(fact[i - 1], i as u64, p);
    }
    fact
}

fn binom(fact: &[u64], n: u64, k: u64, p: u64) -> u64 {
    if k > n {
        return 0;
    }
    let num = fact[n as usize];
    let den = mod_mul(fact[k as usize], fact[(n - k) as usize], p);
    mod_mul(num, mod_inv(den, p).unwrap(), p)
}

/// The coefficient of x^{p-1} in (x^3 + Ax + B)^{(p-1)/2}, as a polynomial
/// in A and B: sum over i of binom((p-1)/2, i) binom(i, 3i - (p-1)/2)
/// A^{3i-(p-1)/2} B^{(p-1)/2-2i}.
pub fn c_poly(p: u64) -> Result<WeightedPoly> {
    if p < 5 || !arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let half = (p - 1) / 2;
    let fact = binomials_mod_p(p);
    let mut terms = BTreeMap::new();
    let lo = (p - 1).div_ceil(6);
    let hi = (p - 1) / 4;
    for i in lo..=hi {
        let ia = 3 * i - half;
        let ib = half - 2 * i;
        let coeff = mod_mul(binom(&fact, half, i, p), binom(&fact, i, ia, p), p);
        assert_ne!(coeff, 0, "expansion coefficients are nonzero mod p");
        assert_eq!(2 * ia + 3 * ib, half, "weighted degree must be (p-1)/2");
        terms.insert((ia as u32, ib as u32), coeff);
    }
    assert!(!terms.is_empty());
    Ok(WeightedPoly { p, terms })
}

/// Independent oracle: expand (x^3 + Ax + B)^{(p-1)/2} by multinomials and
/// read off the coefficient of x^{p-1}. Only for small p.
pub fn c_poly_direct(p: u64) -> Result<WeightedPoly> {
    if p < 5 || !arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let half = (p - 1) / 2;
    let fact = binomials_mod_p(p);
    let mut terms = BTreeMap::new();
    // choose i cubes, j linear terms, l constants with i + j + l = half and
    // x-degree 3i + j = p - 1
    for i in 0..=half {
        if 3 * i > p - 1 {
            break;
        }
        let j = p - 1 - 3 * i;
        if i + j > half {
            continue;
        }
        let l = half - i - j;
        let multinomial = mod_mul(
            binom(&fact, half, i, p),
            mod_mul(binom(&fact, half - i, j, p), 1, p),
            p,
        );
        let _ = l;
        if multinomial != 0 {
            *terms.entry((j as u32, (half - i - j) as u32)).or_insert(0) += multinomial;
        }
    }
    let terms: BTreeMap<(u32, u32), u64> = terms
        .into_iter()
        .filter_map(|(k, v)| {
            let v = v % p;
            (v != 0).then_some((k, v))
        })
        .collect();
    Ok(WeightedPoly { p, terms })
}

/// T mod p as the F_{p^k}/F_p-norm of c_{A,B}(A, B).
pub fn trace_mod_p(ctx: &FieldCtx, curve: &Curve) -> Result<u64> {
    let c = c_poly(ctx.p)?;
    let v = c.eval(ctx, &curve.a, &curve.b);
    Ok(norm_to_prime(ctx, &v))
}

/// Strip single A and B factors from c_{A,B}, dehomogenize to g(s) with
/// s = B^2/A^3, and check squarefreeness; returns (r, ok) with r = deg g.
pub fn verify_squarefree(p: u64) -> Result<(u64, bool)> {
    let c = c_poly(p)?;
    let eps_a = c.terms.keys().map(|&(ia, _)| ia).min().unwrap();
    let eps_b = c.terms.keys().map(|&(_, ib)| ib).min().unwrap();
    assert!(eps_a <= 1 && eps_b <= 1, "A and B appear as factors at most once");
    let ctx = field_make(p, 1, 0)?;
    // after stripping, each term is (A^3)^t (B^2)^u with t + u constant,
    // so the monomial collapses to s^u
    let mut coeffs_by_u = BTreeMap::new();
    for (&(ia, ib), &coeff) in &c.terms {
        let (ia, ib) = (ia - eps_a, ib - eps_b);
        assert_eq!(ia % 3, 0);
        assert_eq!(ib % 2, 0);
        coeffs_by_u.insert(ib / 2, coeff);
    }
    let deg = *coeffs_by_u.keys().max().unwrap();
    let coeffs = (0..=deg)
        .map(|u| ctx.from_u64(coeffs_by_u.get(&u).copied().unwrap_or(0)))
        .collect();
    let g = Poly::new(&ctx, coeffs);
    let r = g.degree().unwrap() as u64;
    let ok = g.is_squarefree(&ctx) && !ctx.is_zero(&g.coeffs[0]);
    // closed form for the degree
    let half = (p - 1) / 2;
    let num = half as i64 - 2 * eps_a as i64 - 3 * eps_b as i64;
    assert_eq!(num % 6, 0, "r formula must be integral");
    assert_eq!(r as i64, num / 6);
    Ok((r, ok))
}

/// Exhaustive histogram of T mod p over all nonsingular (A, B) in F_{p^k}^2,
/// plus #S. Asserts #S = p^{2k} - p^k and the equidistribution deviation bound.
pub fn modp_trace_histogram(p: u64, k: usize) -> Result<(BTreeMap<u64, u128>, u128)> {
    if p < 5 {
        return Err(Error::SmallCharacteristic(p));
    }
    let ctx = field_make(p, k, 0)?;
    let q = ctx.order();
    if q * q > HISTOGRAM_CAP {
        return Err(Error::FieldCap(q * q));
    }
    let c = c_poly(p)?;
    let partials: Vec<(BTreeMap<u64, u128>, u128)> = (0..q as u64)
        .into_par_iter()
        .map(|ai| {
            let a = ctx.from_index(ai as u128);
            let mut hist = BTreeMap::new();
            let mut total = 0u128;
            for bi in 0..q {
                let b = ctx.from_index(bi);
                let Ok(curve) = Curve::new(&ctx, a.clone(), b) else { continue };
                total += 1;
                let v = c.eval(&ctx, &curve.a, &curve.b);
                let t = norm_to_prime(&ctx, &v);
                *hist.entry(t).or_insert(0u128) += 1;
            }
            (hist, total)
        })
        .collect();
    let mut hist = BTreeMap::new();
    let mut total = 0u128;
    for (h, t) in partials {
        for (key, v) in h {
            *hist.entry(key).or_insert(0) += v;
        }
        total += t;
    }
    assert_eq!(total, q * q - q, "#S = p^2k - p^k");
    // equidistribution deviation bound for the nonzero residues
    let bound = 3.0 * (p as f64).powf(1.5 * k as f64 + 1.0);
    let expected = total as f64 / (p - 1) as f64;
    for t in 1..p {
        let st = hist.get(&t).copied().unwrap_or(0) as f64;
        assert!((st - expected).abs() <= bound, "deviation bound violated at t = {t}");
    }
    Ok((hist, total))
}

/// Fraction of supersingular pairs over F_{p^k}, for the vanishing-fraction
/// bound 24 p^2 / (2 p^k).
pub fn supersingular_fraction(hist: &BTreeMap<u64, u128>, total: u128) -> f64 {
    let zero = hist.get(&0).copied().unwrap_or(0);
    zero as f64 / total as f64
}

/// Census helper: dual-path trace check over every nonsingular pair of a
/// field; returns the number of pairs verified.
pub fn dual_trace_sweep(ctx: &FieldCtx) -> Result<u128> {
    let chi = CharTable::new(ctx)?;
    let q = ctx.order();
    let c = c_poly(ctx.p)?;
    let mut checked = 0u128;
    for ai in 0..q {
        let a = ctx.from_index(ai);
        for bi in 0..q {
            let b = ctx.from_index(bi);
            let Ok(curve) = Curve::new(ctx, a.clone(), b) else { continue };
            let count = point_count_with(ctx, &curve, &chi);
            let t = (q as i128 + 1 - count as i128).rem_euclid(ctx.p as i128) as u64;
            let norm_t = norm_to_prime(ctx, &c.eval(ctx, &curve.a, &curve.b));
            if t != norm_t {
                return Err(Error::InvalidArgument(format!(
                    "dual-path trace mismatch at A index {ai}, B index {bi}: {t} vs {norm_t}"
                )));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
