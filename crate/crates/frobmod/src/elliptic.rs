//! Short Weierstrass curves y^2 = x^3 + Ax + B over F_q with p >= 5:
//! point arithmetic, exhaustive point counting, quadratic twists, and the
//! census of F_q-isomorphism classes keyed by j-invariant.

use rayon::prelude::*;

use crate::arith::{self, gcd};
use crate::finite_field::{CharTable, FieldCtx, FieldElement};
use crate::torsion_frobenius::rational_torsion_count;
use crate::{Error, Result};

/// Census fields are capped so exhaustive x-scans stay cheap.
pub const CENSUS_FIELD_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    pub a: FieldElement,
    pub b: FieldElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurvePoint {
    Infinity,
    Affine(FieldElement, FieldElement),
}

impl Curve {
    /// Fails on singular coefficients or characteristic below 5.
    pub fn new(ctx: &FieldCtx, a: FieldElement, b: FieldElement) -> Result<Curve> {
        if ctx.p < 5 {
            return Err(Error::SmallCharacteristic(ctx.p));
        }
        let c = Curve { a, b };
        if ctx.is_zero(&c.discriminant_core(ctx)) {
            return Err(Error::InvalidArgument("curve is singular: 4A^3 + 27B^2 = 0".into()));
        }
        Ok(c)
    }

    /// 4A^3 + 27B^2; nonzero exactly when the curve is nonsingular.
    pub fn discriminant_core(&self, ctx: &FieldCtx) -> FieldElement {
        let a3 = ctx.mul(&self.a, &ctx.mul(&self.a, &self.a));
        let b2 = ctx.mul(&self.b, &self.b);
        ctx.add(&ctx.scale(&a3, 4), &ctx.scale(&b2, 27))
    }

    pub fn j_invariant(&self, ctx: &FieldCtx) -> FieldElement {
        let a3 = ctx.mul(&self.a, &ctx.mul(&self.a, &self.a));
        let num = ctx.scale(&ctx.scale(&a3, 4), 1728 % ctx.p);
        ctx.mul(&num, &ctx.inv(&self.discriminant_core(ctx)).unwrap())
    }

    /// x^3 + Ax + B.
    pub fn rhs(&self, ctx: &FieldCtx, x: &FieldElement) -> FieldElement {
        let x2 = ctx.mul(x, x);
        ctx.add(&ctx.mul(&ctx.add(&x2, &self.a), x), &self.b)
    }

    pub fn contains(&self, ctx: &FieldCtx, pt: &CurvePoint) -> bool {
        match pt {
            CurvePoint::Infinity => true,
            CurvePoint::Affine(x, y) => ctx.mul(y, y) == self.rhs(ctx, x),
        }
    }
}

pub fn point_neg(ctx: &FieldCtx, p: &CurvePoint) -> CurvePoint {
    match p {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine(x, y) => CurvePoint::Affine(x.clone(), ctx.neg(y)),
    }
}

pub fn point_add(ctx: &FieldCtx, curve: &Curve, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
    let (x1, y1) = match p {
        CurvePoint::Infinity => return q.clone(),
        CurvePoint::Affine(x, y) => (x, y),
    };
    let (x2, y2) = match q {
        CurvePoint::Infinity => return p.clone(),
        CurvePoint::Affine(x, y) => (x, y),
    };
    let lambda = if x1 == x2 {
        if *y1 != *y2 || ctx.is_zero(y1) {
            return CurvePoint::Infinity;
        }
        // tangent: (3x^2 + A) / 2y
        let num = ctx.add(&ctx.scale(&ctx.mul(x1, x1), 3), &curve.a);
        ctx.mul(&num, &ctx.inv(&ctx.scale(y1, 2)).unwrap())
    } else {
        let num = ctx.sub(y2, y1);
        ctx.mul(&num, &ctx.inv(&ctx.sub(x2, x1)).unwrap())
    };
    let x3 = ctx.sub(&ctx.sub(&ctx.mul(&lambda, &lambda), x1), x2);
    let y3 = ctx.sub(&ctx.mul(&lambda, &ctx.sub(x1, &x3)), y1);
    CurvePoint::Affine(x3, y3)
}

pub fn point_mul(ctx: &FieldCtx, curve: &Curve, mut n: u128, p: &CurvePoint) -> CurvePoint {
    let mut acc = CurvePoint::Infinity;
    let mut base = p.clone();
    while n > 0 {
        if n & 1 == 1 {
            acc = point_add(ctx, curve, &acc, &base);
        }
        base = point_add(ctx, curve, &base, &base);
        n >>= 1;
    }
    acc
}

/// Order of a point whose order divides `bound`.
pub fn point_order(ctx: &FieldCtx, curve: &Curve, p: &CurvePoint, bound: u64) -> u64 {
    debug_assert_eq!(point_mul(ctx, curve, bound as u128, p), CurvePoint::Infinity);
    let mut ord = bound;
    for (r, _) in arith::factorize(bound) {
        while ord % r == 0
            && point_mul(ctx, curve, (ord / r) as u128, p) == CurvePoint::Infinity
        {
            ord /= r;
        }
    }
    ord
}

/// Exhaustive #E(F_q) including infinity; q + 1 + sum_x chi(x^3 + Ax + B).
pub fn point_count_with(ctx: &FieldCtx, curve: &Curve, chi: &CharTable) -> u64 {
    let q = ctx.order() as u64;
    let mut count = (q + 1) as i64;
    if ctx.k == 1 {
        let p = ctx.p;
        let a = curve.a.coeffs[0];
        let b = curve.b.coeffs[0];
        for x in 0..p {
            let v = (((x as u128 * x as u128 % p as u128) as u64 + a) as u128 * x as u128
                % p as u128) as u64;
            let v = (v + b) % p;
            count += chi.chi(v as u128) as i64;
        }
    } else {
        for x in ctx.elements() {
            count += chi.chi(ctx.index(&curve.rhs(ctx, &x))) as i64;
        }
    }
    let count = count as u64;
    let t = q as i64 + 1 - count as i64;
    assert!((t as i128) * (t as i128) <= 4 * q as i128, "Hasse bound violated");
    count
}

pub fn point_count(ctx: &FieldCtx, curve: &Curve) -> Result<u64> {
    if ctx.order() > CENSUS_FIELD_CAP {
        return Err(Error::FieldCap(ctx.order()));
    }
    let chi = CharTable::new(ctx)?;
    Ok(point_count_with(ctx, curve, &chi))
}

pub fn trace(ctx: &FieldCtx, curve: &Curve) -> Result<i64> {
    let count = point_count(ctx, curve)?;
    Ok(ctx.order() as i64 + 1 - count as i64)
}

/// Least nonsquare in element-index order; deterministic per context.
pub fn least_nonsquare(ctx: &FieldCtx) -> FieldElement {
    ctx.elements()
        .find(|e| !ctx.is_square(e))
        .expect("odd-order field has a nonsquare")
}

/// The quadratic twist by the least nonsquare d, in short form (d^2 A, d^3 B).
pub fn quadratic_twist(ctx: &FieldCtx, curve: &Curve) -> (Curve, FieldElement) {
    let d = least_nonsquare(ctx);
    let d2 = ctx.mul(&d, &d);
    let d3 = ctx.mul(&d2, &d);
    let twist = Curve { a: ctx.mul(&curve.a, &d2), b: ctx.mul(&curve.b, &d3) };
    (twist, d)
}

/// #Aut_{F_q}(E): 6 or 4 at the special j-invariants when the relevant roots
/// of unity are rational, otherwise 2. Validated by the mass formula in tests.
pub fn aut_order(ctx: &FieldCtx, curve: &Curve) -> u64 {
    let q = ctx.order() as u64;
    let j = curve.j_invariant(ctx);
    if ctx.is_zero(&j) {
        if q % 6 == 1 { 6 } else { 2 }
    } else if j == ctx.from_u64(1728 % ctx.p) {
        if q % 4 == 1 { 4 } else { 2 }
    } else {
        2
    }
}

#[derive(Clone, Debug)]
pub struct CurveClassRecord {
    pub curve: Curve,
    pub trace: i64,
    /// E(F_q) ~ Z_k + Z_m with k | m and k | q - 1.
    pub group_shape: (u64, u64),
    pub aut_order: u64,
    pub j_index: u128,
    /// Number of (A,B) pairs in S representing this class.
    pub pair_multiplicity: u64,
}

impl CurveClassRecord {
    pub fn point_count(&self, q: u64) -> u64 {
        (q as i64 + 1 - self.trace) as u64
    }
}

/// One record per F_q-isomorphism class. Classes are parameterized by
/// j-invariant: two quadratic twists per ordinary j, gcd(4, q-1) quartic
/// twists at j = 1728, gcd(6, q-1) sextic twists at j = 0; total class count
/// is 2(q-2) + gcd(4, q-1) + gcd(6, q-1), which lies in [2q, 2q+22].
pub fn enumerate_classes(ctx: &FieldCtx) -> Result<Vec<CurveClassRecord>> {
    if ctx.p < 5 {
        return Err(Error::SmallCharacteristic(ctx.p));
    }
    if ctx.order() > CENSUS_FIELD_CAP {
        return Err(Error::FieldCap(ctx.order()));
    }
    let q = ctx.order() as u64;
    let chi = CharTable::new(ctx)?;
    let g = ctx.multiplicative_generator();
    let gcd4 = gcd(4, q - 1);
    let gcd6 = gcd(6, q - 1);
    let j1728 = ctx.from_u64(1728 % ctx.p);

    let records: Vec<Vec<CurveClassRecord>> = (0..q)
        .into_par_iter()
        .map(|j_idx| {
            let j = ctx.from_index(j_idx as u128);
            let mut out = Vec::new();
            if ctx.is_zero(&j) {
                // y^2 = x^3 + B, one class per sextic-power coset of B
                for i in 0..gcd6 {
                    let b = ctx.pow(&g, i as u128);
                    let curve = Curve { a: ctx.zero(), b };
                    push_record(ctx, &chi, curve, j_idx as u128, (q - 1) / gcd6, None, &mut out);
                }
            } else if j == j1728 {
                for i in 0..gcd4 {
                    let a = ctx.pow(&g, i as u128);
                    let curve = Curve { a, b: ctx.zero() };
                    push_record(ctx, &chi, curve, j_idx as u128, (q - 1) / gcd4, None, &mut out);
                }
            } else {
                // A = 3j(1728 - j), B = 2j(1728 - j)^2 has j-invariant j
                let w = ctx.sub(&j1728, &j);
                let a = ctx.scale(&ctx.mul(&j, &w), 3);
                let b = ctx.scale(&ctx.mul(&j, &ctx.mul(&w, &w)), 2);
                let curve = Curve { a, b };
                let count = point_count_with(ctx, &curve, &chi);
                push_record(ctx, &chi, curve.clone(), j_idx as u128, (q - 1) / 2, Some(count), &mut out);
                let (twist, _) = quadratic_twist(ctx, &curve);
                // twist trace is the negation: count(E) + count(E^t) = 2q + 2
                push_record(ctx, &chi, twist, j_idx as u128, (q - 1) / 2, Some(2 * q + 2 - count), &mut out);
            }
            out
        })
        .collect();

    let records: Vec<CurveClassRecord> = records.into_iter().flatten().collect();
    let expected = 2 * (q as u128 - 2) + gcd4 as u128 + gcd6 as u128;
    assert_eq!(records.len() as u128, expected);
    assert!(expected >= 2 * q as u128 && expected <= 2 * q as u128 + 22);
    Ok(records)
}

fn push_record(
    ctx: &FieldCtx,
    chi: &CharTable,
    curve: Curve,
    j_idx: u128,
    multiplicity: u64,
    known_count: Option<u64>,
    out: &mut Vec<CurveClassRecord>,
) {
    let q = ctx.order() as u64;
    let count = known_count.unwrap_or_else(|| point_count_with(ctx, &curve, chi));
    let t = q as i64 + 1 - count as i64;
    assert!((t as i128) * (t as i128) <= 4 * q as i128);
    let shape = group_structure_with(ctx, &curve, count).expect("group structure at census scale");
    let aut = aut_order(ctx, &curve);
    out.push(CurveClassRecord {
        curve,
        trace: t,
        group_shape: shape,
        aut_order: aut,
        j_index: j_idx,
        pair_multiplicity: multiplicity,
    });
}

/// E(F_q) ~ Z_k + Z_m: for each prime r dividing both #E and q - 1, the
/// r-part of k is the largest r^a with E[r^a] fully rational, decided by
/// exact division-polynomial torsion counts.
pub fn group_structure_with(ctx: &FieldCtx, curve: &Curve, count: u64) -> Result<(u64, u64)> {
    let q1 = ctx.order() as u64 - 1;
    let mut k = 1u64;
    for (r, e) in arith::factorize(gcd(count, q1)) {
        let amax = (arith::valuation(count, r).unwrap() / 2).min(e);
        let mut a = 0;
        while a < amax {
            let n = r.pow(a + 1);
            if rational_torsion_count(ctx, curve, n)? != (n as u128) * n as u128 {
                break;
            }
            a += 1;
        }
        k *= r.pow(a);
    }
    let m = count / k;
    assert_eq!(k * m, count);
    assert_eq!(m % k, 0, "k must divide m");
    assert_eq!(q1 % k, 0, "k must divide q - 1");
    Ok((k, m))
}

pub fn group_structure(ctx: &FieldCtx, curve: &Curve) -> Result<(u64, u64)> {
    let count = point_count(ctx, curve)?;
    group_structure_with(ctx, curve, count)
}

/// A point of exact order N exists iff N divides the group exponent m.
pub fn has_point_of_order(ctx: &FieldCtx, curve: &Curve, n: u64) -> Result<bool> {
    if n == 0 || n % ctx.p == 0 {
        return Err(Error::NotCoprime(n, ctx.p));
    }
    let (_, m) = group_structure(ctx, curve)?;
    Ok(m % n == 0)
}
