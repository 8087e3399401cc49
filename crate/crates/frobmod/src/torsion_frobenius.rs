//! Division polynomials, exact rational torsion counts, N-torsion bases over
//! explicit extensions, and the GL2(Z_N)-conjugacy class of Frobenius.

use std::collections::BTreeMap;

use crate::elliptic::{point_add, point_mul, point_order, Curve, CurvePoint};
use crate::finite_field::{field_make, poly::sqrts, FieldCtx, FieldElement, Poly};
use crate::zn_matrix::{conj_class_of, ConjClass, ResidueMatrix};
use crate::{Error, Result};

pub const TORSION_N_CAP: u64 = 13;
pub const TORSION_DEGREE_CAP: u32 = 24;

/// The x-only division polynomials g_n with psi_n = g_n * (2y)^(n even):
/// for odd n the roots of g_n are the x-coordinates of nonzero n-torsion,
/// for even n the same after multiplying in the 2-torsion cubic.
fn division_poly_g(ctx: &FieldCtx, curve: &Curve, n: u64) -> Vec<Poly> {
    let f = Poly::new(
        ctx,
        vec![curve.b.clone(), curve.a.clone(), ctx.zero(), ctx.one()],
    );
    let f2_16 = f.mul(ctx, &f).scale(ctx, &ctx.from_u64(16 % ctx.p));
    let a = &curve.a;
    let b = &curve.b;
    let a2 = ctx.mul(a, a);
    let a3 = ctx.mul(&a2, a);
    let b2 = ctx.mul(b, b);
    let ab = ctx.mul(a, b);
    let mut g: Vec<Poly> = Vec::with_capacity(n as usize + 1);
    g.push(Poly::zero());
    g.push(Poly::constant(ctx, ctx.one()));
    if n >= 2 {
        g.push(Poly::constant(ctx, ctx.one()));
    }
    if n >= 3 {
        // 3x^4 + 6Ax^2 + 12Bx - A^2
        g.push(Poly::new(
            ctx,
            vec![
                ctx.neg(&a2),
                ctx.scale(b, 12),
                ctx.scale(a, 6),
                ctx.zero(),
                ctx.from_u64(3),
            ],
        ));
    }
    if n >= 4 {
        // 2(x^6 + 5Ax^4 + 20Bx^3 - 5A^2x^2 - 4ABx - (A^3 + 8B^2))
        let inner = Poly::new(
            ctx,
            vec![
                ctx.neg(&ctx.add(&a3, &ctx.scale(&b2, 8))),
                ctx.neg(&ctx.scale(&ab, 4)),
                ctx.neg(&ctx.scale(&a2, 5)),
                ctx.scale(b, 20),
                ctx.scale(a, 5),
                ctx.zero(),
                ctx.one(),
            ],
        );
        g.push(inner.scale(ctx, &ctx.from_u64(2)));
    }
    for i in 5..=n as usize {
        let next = if i % 2 == 1 {
            let m = i / 2;
            let lhs = g[m + 2].mul(ctx, &g[m]).mul(ctx, &g[m]).mul(ctx, &g[m]);
            let rhs = g[m - 1].mul(ctx, &g[m + 1]).mul(ctx, &g[m + 1]).mul(ctx, &g[m + 1]);
            if m % 2 == 0 {
                lhs.mul(ctx, &f2_16).sub(ctx, &rhs)
            } else {
                lhs.sub(ctx, &rhs.mul(ctx, &f2_16))
            }
        } else {
            let m = i / 2;
            let lhs = g[m + 2].mul(ctx, &g[m - 1]).mul(ctx, &g[m - 1]);
            let rhs = g[m - 2].mul(ctx, &g[m + 1]).mul(ctx, &g[m + 1]);
            g[m].mul(ctx, &lhs.sub(ctx, &rhs))
        };
        g.push(next);
    }
    g
}

/// Polynomial whose roots are exactly the x-coordinates of the nonzero
/// points killed by N.
pub fn division_poly(ctx: &FieldCtx, curve: &Curve, n: u64) -> Result<Poly> {
    if n == 0 || n % ctx.p == 0 {
        return Err(Error::NotCoprime(n, ctx.p));
    }
    if n > TORSION_N_CAP {
        return Err(Error::InvalidArgument(format!("torsion level {n} exceeds cap {TORSION_N_CAP}")));
    }
    Ok(torsion_x_poly(ctx, curve, n))
}

fn torsion_x_poly(ctx: &FieldCtx, curve: &Curve, n: u64) -> Poly {
    let g = division_poly_g(ctx, curve, n);
    let gn = g[n as usize].clone();
    if n % 2 == 0 {
        let f = Poly::new(
            ctx,
            vec![curve.b.clone(), curve.a.clone(), ctx.zero(), ctx.one()],
        );
        gn.mul(ctx, &f)
    } else {
        gn
    }
}

/// #E[n](F_q), exactly, without enumerating points: count the rational roots
/// of the torsion polynomial split by whether f(x) is zero or a nonzero
/// square. Works at any field size via modular exponentiation.
pub fn rational_torsion_count(ctx: &FieldCtx, curve: &Curve, n: u64) -> Result<u128> {
    if n == 0 || n % ctx.p == 0 {
        return Err(Error::NotCoprime(n, ctx.p));
    }
    if n == 1 {
        return Ok(1);
    }
    let h = torsion_x_poly(ctx, curve, n).monic(ctx);
    let x = Poly::x(ctx);
    // rational-root part of h
    let xq = x.pow_mod(ctx, ctx.order(), &h);
    let w = xq.sub(ctx, &x).gcd(ctx, &h);
    let Some(dw) = w.degree() else { unreachable!("gcd with nonzero h") };
    if dw == 0 {
        return Ok(1);
    }
    let f = Poly::new(
        ctx,
        vec![curve.b.clone(), curve.a.clone(), ctx.zero(), ctx.one()],
    );
    // roots where f(x) is a nonzero square contribute two points each,
    // roots shared with f contribute one (the 2-torsion)
    let u = f.pow_mod(ctx, (ctx.order() - 1) / 2, &w);
    let s = u.sub(ctx, &Poly::constant(ctx, ctx.one())).gcd(ctx, &w);
    let t = f.gcd(ctx, &w);
    Ok(1 + 2 * s.degree().unwrap_or(0) as u128 + t.degree().unwrap_or(0) as u128)
}

/// A basis (P, Q) of E[N] over the minimal extension containing it.
#[derive(Clone, Debug)]
pub struct TorsionBasis {
    pub n: u64,
    pub degree: u32,
    pub ext: FieldCtx,
    pub ext_curve: Curve,
    pub p_gen: CurvePoint,
    pub q_gen: CurvePoint,
}

#[derive(Clone, Debug)]
pub struct FrobeniusMatrix {
    pub matrix: ResidueMatrix,
    pub basis: TorsionBasis,
}

fn embed_element(
    base: &FieldCtx,
    ext: &FieldCtx,
    root: &FieldElement,
    a: &FieldElement,
) -> FieldElement {
    let mut acc = ext.zero();
    for &c in a.coeffs.iter().rev() {
        acc = ext.add(&ext.mul(&acc, root), &ext.from_u64(c));
    }
    let _ = base;
    acc
}

/// Image of the base modulus root in the extension, chosen as the root of
/// least index so the embedding is deterministic.
fn embedding_root(base: &FieldCtx, ext: &FieldCtx) -> Result<FieldElement> {
    if base.k == 1 {
        return Ok(ext.zero()); // constants embed trivially
    }
    let coeffs = base
        .modulus_poly
        .iter()
        .map(|&c| ext.from_u64(c))
        .collect();
    let modulus = Poly::new(ext, coeffs);
    let roots = modulus.roots(ext, 0)?;
    roots.into_iter().next().ok_or_else(|| {
        Error::InvalidArgument("base modulus has no root in the chosen extension".into())
    })
}

pub fn torsion_basis(ctx: &FieldCtx, curve: &Curve, n: u64) -> Result<TorsionBasis> {
    if n < 2 || n % ctx.p == 0 {
        return Err(Error::NotCoprime(n, ctx.p));
    }
    if n > TORSION_N_CAP {
        return Err(Error::InvalidArgument(format!("torsion level {n} exceeds cap {TORSION_N_CAP}")));
    }
    for d in 1..=TORSION_DEGREE_CAP {
        let bits = (ctx.order() as f64).log2() * d as f64;
        if bits > 96.0 {
            break;
        }
        let ext = field_make(ctx.p, ctx.k * d as usize, 0)?;
        let root = embedding_root(ctx, &ext)?;
        let ext_curve = Curve {
            a: embed_element(ctx, &ext, &root, &curve.a),
            b: embed_element(ctx, &ext, &root, &curve.b),
        };
        if rational_torsion_count(&ext, &ext_curve, n)? != (n as u128) * n as u128 {
            continue;
        }
        let (p_gen, q_gen) = basis_from_roots(&ext, &ext_curve, n)?;
        return Ok(TorsionBasis { n, degree: d, ext, ext_curve, p_gen, q_gen });
    }
    Err(Error::TorsionDegreeCap(TORSION_DEGREE_CAP as u64))
}

/// Deterministic basis: torsion points ordered by (x index, y index); P is
/// the first of exact order n, Q the first independent of P.
fn basis_from_roots(ext: &FieldCtx, curve: &Curve, n: u64) -> Result<(CurvePoint, CurvePoint)> {
    let h = torsion_x_poly(ext, curve, n);
    let mut points = Vec::new();
    for x in h.roots(ext, 0)? {
        let fx = curve.rhs(ext, &x);
        for y in sqrts(ext, &fx, 0)? {
            points.push(CurvePoint::Affine(x.clone(), y));
        }
    }
    let p = points
        .iter()
        .find(|pt| point_order(ext, curve, pt, n) == n)
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("no point of exact order n".into()))?;
    let span: Vec<CurvePoint> = (0..n).map(|a| point_mul(ext, curve, a as u128, &p)).collect();
    // (P, Q) is a basis iff <P> and <Q> intersect trivially; for composite n
    // it is not enough that Q itself avoids <P>
    let q = points
        .iter()
        .find(|pt| {
            point_order(ext, curve, pt, n) == n
                && (1..n).all(|c| !span.contains(&point_mul(ext, curve, c as u128, pt)))
        })
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("no independent second generator".into()))?;
    // the n^2 combinations aP + bQ must be pairwise distinct
    let mut seen = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            let pt = point_add(
                ext,
                curve,
                &span[a as usize],
                &point_mul(ext, curve, b as u128, &q),
            );
            let key = point_key(ext, &pt);
            assert!(seen.insert(key, (a, b)).is_none(), "basis combinations collide");
        }
    }
    Ok((p, q))
}

fn point_key(ext: &FieldCtx, pt: &CurvePoint) -> (u128, u128) {
    match pt {
        CurvePoint::Infinity => (u128::MAX, u128::MAX),
        CurvePoint::Affine(x, y) => (ext.index(x), ext.index(y)),
    }
}

fn frobenius_point(ext: &FieldCtx, q: u128, pt: &CurvePoint) -> CurvePoint {
    match pt {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine(x, y) => CurvePoint::Affine(ext.pow(x, q), ext.pow(y, q)),
    }
}

/// Matrix of q-power Frobenius on E[N] in the basis (P, Q): columns solve
/// sigma P = aP + cQ, sigma Q = bP + dQ by brute-force discrete log.
pub fn frobenius_matrix(ctx: &FieldCtx, curve: &Curve, n: u64) -> Result<FrobeniusMatrix> {
    let basis = torsion_basis(ctx, curve, n)?;
    let ext = &basis.ext;
    let ec = &basis.ext_curve;
    let mut table = BTreeMap::new();
    for a in 0..n {
        let ap = point_mul(ext, ec, a as u128, &basis.p_gen);
        for b in 0..n {
            let pt = point_add(ext, ec, &ap, &point_mul(ext, ec, b as u128, &basis.q_gen));
            table.insert(point_key(ext, &pt), (a, b));
        }
    }
    let q = ctx.order();
    let (a, c) = table[&point_key(ext, &frobenius_point(ext, q, &basis.p_gen))];
    let (b, d) = table[&point_key(ext, &frobenius_point(ext, q, &basis.q_gen))];
    let matrix = ResidueMatrix::new(n, a, b, c, d)?;
    assert_eq!(matrix.det(), (q % n as u128) as u64, "det of Frobenius must be q mod n");
    // independent path to the trace: point counting over the base field
    let count = crate::elliptic::point_count(ctx, curve)?;
    let t = ctx.order() as i128 + 1 - count as i128;
    assert_eq!(matrix.trace() as i128, t.rem_euclid(n as i128), "trace must be T mod n");
    // Frobenius of F_{q^d} fixes E[n] pointwise, so the matrix has order
    // dividing the torsion field degree
    let mut pw = matrix.clone();
    for _ in 1..basis.degree {
        pw = pw.mul(&matrix);
    }
    assert_eq!(pw, ResidueMatrix::identity(n), "matrix^degree must be the identity");
    Ok(FrobeniusMatrix { matrix, basis })
}

/// GL2(Z_N)-conjugacy class of Frobenius; checked to be basis-independent by
/// re-reading the matrix in the swapped basis (Q, P).
pub fn class_of_curve(ctx: &FieldCtx, curve: &Curve, n: u64) -> Result<ConjClass> {
    let fm = frobenius_matrix(ctx, curve, n)?;
    let m = &fm.matrix;
    let class = conj_class_of(m)?;
    let swapped = ResidueMatrix::new(n, m.d, m.c, m.b, m.a)?;
    assert!(class.contains(&swapped), "class must not depend on the basis");
    Ok(class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{group_structure, point_count};
    use crate::finite_field::field_make;

    fn curve_ints(ctx: &FieldCtx, a: i64, b: i64) -> Curve {
        let p = ctx.p as i64;
        Curve::new(ctx, ctx.from_u64(a.rem_euclid(p) as u64), ctx.from_u64(b.rem_euclid(p) as u64))
            .unwrap()
    }

    #[test]
    fn division_poly_shapes() {
        let f7 = field_make(7, 1, 0).unwrap();
        let e = curve_ints(&f7, 2, 3);
        // psi_2: the 2-torsion cubic itself
        let h2 = division_poly(&f7, &e, 2).unwrap();
        assert_eq!(h2, Poly::from_ints(&f7, &[3, 2, 0, 1]));
        // psi_3 = 3x^4 + 6Ax^2 + 12Bx - A^2
        let h3 = division_poly(&f7, &e, 3).unwrap();
        assert_eq!(h3, Poly::from_ints(&f7, &[-4, 36, 12, 0, 3]));
        // degree formula for odd n
        for n in [3u64, 5, 9, 11, 13] {
            let h = division_poly(&f7, &e, n).unwrap();
            assert_eq!(h.degree(), Some(((n * n - 1) / 2) as usize));
        }
        assert!(division_poly(&f7, &e, 7).is_err());
        assert!(division_poly(&f7, &e, 14).is_err());
    }

    #[test]
    fn torsion_roots_are_killed_by_n() {
        let f11 = field_make(11, 1, 0).unwrap();
        let e = curve_ints(&f11, 3, 5);
        for n in [2u64, 3, 4, 5] {
            let h = division_poly(&f11, &e, n).unwrap();
            for x in h.roots(&f11, 0).unwrap() {
                let fx = e.rhs(&f11, &x);
                for y in sqrts(&f11, &fx, 0).unwrap() {
                    let pt = CurvePoint::Affine(x.clone(), y);
                    assert_eq!(point_mul(&f11, &e, n as u128, &pt), CurvePoint::Infinity);
                }
            }
        }
    }

    #[test]
    fn torsion_count_matches_scan() {
        let f13 = field_make(13, 1, 0).unwrap();
        for (a, b) in [(2i64, 3i64), (1, 1), (3, 5), (0, 2), (1, 0)] {
            let e = curve_ints(&f13, a, b);
            for n in [2u64, 3, 4, 5, 6, 8, 9, 12] {
                // brute-force oracle: scan all points of E(F_13)
                let mut brute = 1u128;
                for x in 0..13u64 {
                    let fx = e.rhs(&f13, &f13.from_u64(x));
                    for y in 0..13u64 {
                        let ye = f13.from_u64(y);
                        if f13.mul(&ye, &ye) == fx {
                            let pt = CurvePoint::Affine(f13.from_u64(x), ye);
                            if point_mul(&f13, &e, n as u128, &pt) == CurvePoint::Infinity {
                                brute += 1;
                            }
                        }
                    }
                }
                assert_eq!(rational_torsion_count(&f13, &e, n).unwrap(), brute, "n={n} a={a} b={b}");
            }
        }
    }

    #[test]
    fn two_torsion_degree_matches_cubic() {
        let f7 = field_make(7, 1, 0).unwrap();
        let e = curve_ints(&f7, 1, 3);
        let basis = torsion_basis(&f7, &e, 2).unwrap();
        // splitting degree of the 2-torsion cubic is 1, 2, 3 or 6
        assert!([1u32, 2, 3, 6].contains(&basis.degree));
        let full = rational_torsion_count(&basis.ext, &basis.ext_curve, 2).unwrap();
        assert_eq!(full, 4);
    }

    #[test]
    fn frobenius_identity_on_rational_torsion() {
        // find a curve over F_7 with full rational 3-torsion: matrix = I
        let f7 = field_make(7, 1, 0).unwrap();
        let mut hit = false;
        'outer: for a in 0..7i64 {
            for b in 0..7i64 {
                let Ok(e) = Curve::new(&f7, f7.from_u64(a as u64), f7.from_u64(b as u64)) else {
                    continue;
                };
                if rational_torsion_count(&f7, &e, 3).unwrap() == 9 {
                    let fm = frobenius_matrix(&f7, &e, 3).unwrap();
                    assert_eq!(fm.matrix, ResidueMatrix::identity(3));
                    assert_eq!(fm.basis.degree, 1);
                    hit = true;
                    break 'outer;
                }
            }
        }
        assert!(hit);
    }

    #[test]
    fn frobenius_trace_and_det() {
        let f11 = field_make(11, 1, 0).unwrap();
        for (a, b) in [(3i64, 5i64), (1, 1), (1, 2)] {
            let e = curve_ints(&f11, a, b);
            let count = point_count(&f11, &e).unwrap();
            let t = 11 + 1 - count as i64;
            for n in [2u64, 3, 4] {
                let fm = frobenius_matrix(&f11, &e, n).unwrap();
                assert_eq!(fm.matrix.det() as u64, 11 % n);
                assert_eq!(fm.matrix.trace() as i64, t.rem_euclid(n as i64));
            }
        }
    }

    #[test]
    fn twist_classes_are_negatives() {
        let f11 = field_make(11, 1, 0).unwrap();
        let e = curve_ints(&f11, 3, 5);
        let (et, _) = crate::elliptic::quadratic_twist(&f11, &e);
        for n in [3u64, 4] {
            let c = class_of_curve(&f11, &e, n).unwrap();
            let ct = class_of_curve(&f11, &et, n).unwrap();
            let m = &c.representative;
            assert!(ct.contains(&m.neg()));
        }
    }

    #[test]
    fn structure_agrees_with_torsion_counts() {
        let f13 = field_make(13, 1, 0).unwrap();
        for (a, b) in [(2i64, 3i64), (1, 1), (0, 5)] {
            let e = curve_ints(&f13, a, b);
            let (k, m) = group_structure(&f13, &e).unwrap();
            // E[k] fully rational, E[rk] not, for each prime r | m with rk | m
            assert_eq!(
                rational_torsion_count(&f13, &e, k).unwrap(),
                (k as u128) * k as u128
            );
            let _ = m;
        }
    }
}
