//! Closed-form evaluation of every prediction: the matrix-count function phi
//! (odd ell and the ell = 2 tables), the point-of-order probability theta,
//! multiplicative combination over prime powers, and the explicit error
//! bounds that come with each limit statement.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::arith::{self, ipow};
use crate::zn_matrix::{self, ConjClass};
use crate::{Error, Result};

/// Argument bundle for `phi`: the discriminant Delta = t^2 - 4q is taken as a
/// full integer; reduction happens inside (mod ell^n for odd ell, mod 2^{n+2}
/// for ell = 2).
#[derive(Clone, Copy, Debug)]
pub struct PhiInput {
    pub ell: u64,
    pub n: u32,
    pub delta: i128,
}

/// Which limit statement a prediction instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    TraceResidue,
    OrderProb,
    ClassProb,
    GroupStructure,
}

/// A predicted probability plus its explicit error bound.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub value: BigRational,
    pub error_bound: f64,
    pub modulus: u64,
    pub statistic: Statistic,
}

/// Degree and genus data of the level-N function field, used only to evaluate
/// error bounds: [L:K] = #PSL2(Z_N) and g_L = 1 + [L:K](N-6)/(12N).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelData {
    pub n: u64,
    pub degree_lk: u128,
    pub genus: u128,
}

pub fn level_data(n: u64) -> Result<LevelData> {
    if n < 2 {
        return Err(Error::BadModulus(n));
    }
    let degree_lk = zn_matrix::group_sizes(n)?.psl2;
    let num = BigInt::from(degree_lk) * BigInt::from(n as i128 - 6);
    let genus = BigRational::one() + BigRational::new(num, BigInt::from(12 * n));
    assert!(
        genus.is_integer() && !genus.is_negative(),
        "level {n} genus {genus} is not a nonnegative integer"
    );
    Ok(LevelData {
        n,
        degree_lk,
        genus: genus.to_integer().to_u128().expect("genus fits"),
    })
}

/// Number of matrices in GL2(Z_{ell^n}) with determinant q and trace t, as a
/// function of Delta_t = t^2 - 4q alone. Total in its argument.
pub fn phi(input: &PhiInput) -> u128 {
    let PhiInput { ell, n, delta } = *input;
    assert!(arith::is_prime(ell) && n >= 1, "phi needs a prime ell and n >= 1");
    if ell == 2 {
        phi_two(n, delta)
    } else {
        phi_odd(ell, n, delta)
    }
}

fn reduce(delta: i128, modulus: u128) -> u64 {
    (delta.rem_euclid(modulus as i128)) as u64
}

fn phi_odd(ell: u64, n: u32, delta: i128) -> u128 {
    let m = ipow(ell, n);
    let d = reduce(delta, m);
    let base = ipow(ell, 2 * n) + ipow(ell, 2 * n - 1);
    let Some(k) = arith::valuation(d, ell) else {
        // Delta = 0 in Z_{ell^n}
        return if n % 2 == 0 {
            base - ipow(ell, 3 * n / 2 - 1)
        } else {
            base - ipow(ell, (3 * n - 1) / 2)
        };
    };
    let unit = d / ipow(ell, k) as u64;
    if k % 2 == 1 {
        return base - (ell as u128 + 1) * ipow(ell, 2 * n - (k + 3) / 2);
    }
    if legendre_symbol(unit, ell) == 1 {
        base // nonzero square
    } else {
        base - 2 * ipow(ell, 2 * n - k / 2 - 1)
    }
}

fn phi_two(n: u32, delta: i128) -> u128 {
    // the ell = 2 table depends on Delta mod 2^{n+2}
    let m = 1u128 << (n + 2);
    let d = reduce(delta, m);
    let base = ipow(2, 2 * n) + ipow(2, 2 * n - 1);
    let Some(k) = arith::valuation(d, 2) else {
        return if n % 2 == 0 {
            base - ipow(2, 3 * n / 2 - 1)
        } else {
            base - ipow(2, (3 * n - 1) / 2)
        };
    };
    if k == 0 {
        return ipow(2, 2 * n - 1); // Delta odd
    }
    if k % 2 == 1 {
        return base - 3 * ipow(2, 2 * n - (k + 1) / 2);
    }
    // Delta = 2^{2kk} D with D odd
    let kk = k / 2;
    let dd = d >> k;
    if n == 2 * kk - 1 {
        base - ipow(2, (3 * n - 1) / 2)
    } else if n == 2 * kk {
        match dd % 4 {
            1 => base - ipow(2, 3 * n / 2 - 1),
            _ => base - 3 * ipow(2, 3 * n / 2 - 1),
        }
    } else {
        // n >= 2kk + 1
        match dd % 8 {
            1 => base,
            5 => base - ipow(2, 2 * n - kk),
            _ => base - 3 * ipow(2, 2 * n - kk - 1), // D = 3 mod 4
        }
    }
}

fn legendre_symbol(a: u64, p: u64) -> i32 {
    let r = arith::mod_pow(a % p, ((p - 1) / 2) as u128, p);
    if r == 0 {
        0
    } else if r == 1 {
        1
    } else {
        -1
    }
}

/// Limiting probability that a random curve has a rational point of exact
/// order ell^n, as a function of nu = ord_ell(q - 1). When nu = 0 a point of
/// order ell^n is the same as ell^n-torsion, so the value falls back to the
/// trace formula at t = q + 1.
pub fn theta(ell: u64, n: u32, q: u64) -> Result<BigRational> {
    if q % ell == 0 {
        return Err(Error::NotCoprime(ell, q));
    }
    let m = ipow(ell, n) as u64;
    let q_red = q % m;
    let nu = match arith::valuation((q_red + m - 1) % m, ell) {
        None => n, // q = 1 mod ell^n
        Some(v) => v,
    };
    if nu == 0 {
        // gcd(ell, q - 1) = 1: P'(ell^n) = P(q + 1), Delta = (q - 1)^2
        let delta = (q as i128 - 1).pow(2);
        let count = phi(&PhiInput { ell, n, delta });
        let denom = ipow(ell, 3 * n) - ipow(ell, 3 * n - 2);
        return Ok(big_ratio(count, denom));
    }
    if nu >= n {
        // 1/(ell^n - ell^{n-2}), written with integral numerator and denominator
        Ok(big_ratio(
            ipow(ell, 2),
            ipow(ell, n + 2) - ipow(ell, n),
        ))
    } else {
        Ok(big_ratio(
            ipow(ell, 2 * nu + 1) + 1,
            ipow(ell, n + 2 * nu - 1) * (ipow(ell, 2) - 1),
        ))
    }
}

fn big_ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn per_factor_bound(ell: u64, n: u32, q: u64) -> Result<f64> {
    let data = level_data(ipow(ell, n) as u64)?;
    let coeff = 4.0 * data.degree_lk as f64 + 4.0 * data.genus as f64 + 2.0;
    let denom = (ipow(ell, n) - ipow(ell, n - 1)) as f64;
    let qf = q as f64;
    Ok(coeff / denom * (qf.sqrt() + 23.0) / qf)
}

/// Predicted probability that the trace of Frobenius is t mod N, with the
/// explicit error bound. Composite N multiplies prime-power values; the
/// per-factor bounds are summed.
pub fn trace_prediction(q: u64, n: u64, t: u64) -> Result<Prediction> {
    if n < 2 {
        return Err(Error::BadModulus(n));
    }
    if arith::gcd(q % n, n) != 1 {
        return Err(Error::NotCoprime(n, q));
    }
    let mut value = BigRational::one();
    let mut bound = 0.0f64;
    for (ell, e) in arith::factorize(n) {
        let delta = (t as i128) * (t as i128) - 4 * q as i128;
        let count = phi(&PhiInput { ell, n: e, delta });
        let denom = ipow(ell, 3 * e) - ipow(ell, 3 * e - 2);
        value *= big_ratio(count, denom);
        bound += per_factor_bound(ell, e, q)?;
    }
    Ok(Prediction { value, error_bound: bound, modulus: n, statistic: Statistic::TraceResidue })
}

/// Predicted probability that a random curve has a point of exact order N.
pub fn order_prediction(q: u64, n: u64) -> Result<Prediction> {
    if n < 2 {
        return Err(Error::BadModulus(n));
    }
    if arith::gcd(q % n, n) != 1 {
        return Err(Error::NotCoprime(n, q));
    }
    let mut value = BigRational::one();
    let mut bound = 0.0f64;
    for (ell, e) in arith::factorize(n) {
        value *= theta(ell, e, q)?;
        bound += per_factor_bound(ell, e, q)?;
    }
    Ok(Prediction { value, error_bound: bound, modulus: n, statistic: Statistic::OrderProb })
}

/// Predicted probability that the Frobenius conjugacy class mod N equals the
/// given class: its relative size #F/#M_q, with the explicit bound
/// (#F/#M_q)(4[L:K] + 4 g_L + 2)/sqrt(q) + 23/q.
pub fn class_prediction(q: u64, n: u64, class: &ConjClass) -> Result<Prediction> {
    if class.representative.modulus != n {
        return Err(Error::InvalidArgument(format!(
            "class modulus {} does not match N = {n}",
            class.representative.modulus
        )));
    }
    if class.representative.det() != q % n {
        return Err(Error::InvalidArgument(format!(
            "class determinant {} does not match q = {} mod {n}",
            class.representative.det(),
            q % n
        )));
    }
    let sizes = zn_matrix::group_sizes(n)?;
    let value = big_ratio(class.size, sizes.sl2);
    let data = level_data(n)?;
    let coeff = 4.0 * data.degree_lk as f64 + 4.0 * data.genus as f64 + 2.0;
    let rel = class.size as f64 / sizes.sl2 as f64;
    let bound = rel * coeff / (q as f64).sqrt() + 23.0 / q as f64;
    Ok(Prediction { value, error_bound: bound, modulus: n, statistic: Statistic::ClassProb })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zn_matrix::{conj_class_of, ResidueMatrix};

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn level_data_values() {
        let d = level_data(3).unwrap();
        assert_eq!((d.degree_lk, d.genus), (12, 0));
        let d = level_data(2).unwrap();
        assert_eq!((d.degree_lk, d.genus), (6, 0));
        let d = level_data(9).unwrap();
        assert_eq!((d.degree_lk, d.genus), (324, 10));
        // X(7) has genus 3
        assert_eq!(level_data(7).unwrap().genus, 3);
        for n in 2..=30 {
            level_data(n).unwrap(); // integrality asserted inside
        }
    }

    #[test]
    fn phi_examples() {
        // n = 1, odd ell: ell^2 + (Delta/ell) ell
        assert_eq!(phi(&PhiInput { ell: 3, n: 1, delta: -2 }), 12); // -2 = 1 square
        assert_eq!(phi(&PhiInput { ell: 3, n: 1, delta: 2 }), 6); // 2 nonsquare
        assert_eq!(phi(&PhiInput { ell: 3, n: 1, delta: 0 }), 9);
        // ell = 2, n = 1, Delta = -36 = 4 mod 8: branch n = 2k - 1
        assert_eq!(phi(&PhiInput { ell: 2, n: 1, delta: -36 }), 4);
        // odd Delta at ell = 2
        assert_eq!(phi(&PhiInput { ell: 2, n: 1, delta: -3 }), 2);
    }

    #[test]
    fn phi_n1_takes_three_values_only() {
        for ell in [3u64, 5, 7, 11] {
            for delta in -50..50i128 {
                let v = phi(&PhiInput { ell, n: 1, delta });
                let l = ell as u128;
                assert!(v == l * l + l || v == l * l - l || v == l * l, "ell={ell} delta={delta}");
            }
        }
    }

    #[test]
    fn phi_depends_only_on_reduced_delta() {
        for (ell, n) in [(3u64, 2u32), (2, 3), (5, 1), (2, 1)] {
            let m = if ell == 2 { ipow(2, n + 2) } else { ipow(ell, n) } as i128;
            for delta in -20..20i128 {
                for lift in 0..4i128 {
                    assert_eq!(
                        phi(&PhiInput { ell, n, delta }),
                        phi(&PhiInput { ell, n, delta: delta + lift * m }),
                    );
                }
            }
        }
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(3, 2, 1).unwrap(), ratio(1, 8));
        assert_eq!(theta(3, 2, 4).unwrap(), ratio(7, 54));
        assert_eq!(theta(2, 1, 3).unwrap(), ratio(2, 3));
        // nu = 0 falls back to the trace formula at t = q + 1
        assert_eq!(theta(3, 1, 2).unwrap(), ratio(1, 2));
        assert!(theta(3, 1, 6).is_err());
    }

    #[test]
    fn trace_prediction_examples() {
        // q = 9973 = 1 mod 9, t = q + 1: Delta = (q-1)^2 = 0 mod 9 with ord 2*2
        let p = trace_prediction(9973, 9, (9973 + 1) % 9).unwrap();
        assert_eq!(p.value, ratio(11, 72));
        // N = 3, q = 10007: bound is 25 (sqrt q + 23)/q
        let p = trace_prediction(10007, 3, 1).unwrap();
        let expected = 25.0 * ((10007.0f64).sqrt() + 23.0) / 10007.0;
        assert!((p.error_bound - expected).abs() < 1e-12);
        // values sum to one over all residues
        for (q, n) in [(10007u64, 3u64), (103, 4), (9973, 9), (11, 6)] {
            let total: BigRational = (0..n).map(|t| trace_prediction(q, n, t).unwrap().value).sum();
            assert_eq!(total, BigRational::one(), "q={q} N={n}");
        }
    }

    #[test]
    fn order_prediction_examples() {
        let p = order_prediction(9973, 9).unwrap();
        assert_eq!(p.value, ratio(1, 8));
        // N = 6, q = 1 mod 6: theta_2 * theta_3 = (2/3)(3/8)
        let p = order_prediction(13, 6).unwrap();
        assert_eq!(p.value, ratio(1, 4));
        // gcd(ell, q - 1) = 1 matches the trace prediction at t = q + 1
        let p = order_prediction(5, 3).unwrap();
        let t = trace_prediction(5, 3, 0).unwrap(); // q + 1 = 6 = 0 mod 3
        assert_eq!(p.value, t.value);
        assert!(order_prediction(10, 4).is_err());
    }

    #[test]
    fn class_prediction_examples() {
        let id = conj_class_of(&ResidueMatrix::identity(3)).unwrap();
        let p = class_prediction(1, 3, &id).unwrap();
        assert_eq!(p.value, ratio(1, 24));
        // swap matrix mod 2 has det 1; its class in GL2(Z_2) = S_3
        let swap = conj_class_of(&ResidueMatrix::new(2, 0, 1, 1, 0).unwrap()).unwrap();
        let p = class_prediction(1, 2, &swap).unwrap();
        assert_eq!(p.value, ratio(swap.size as i64, 6));
        // determinant mismatch is rejected
        assert!(class_prediction(2, 3, &id).is_err());
    }

    #[test]
    fn theta_times_sl2_matches_order_class_count() {
        for (ell, n) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2), (5, 1)] {
            let m = ipow(ell, n) as u64;
            let sl2 = zn_matrix::group_sizes(m).unwrap().sl2;
            for q in (1..m).filter(|q| q % ell != 0) {
                let th = theta(ell, n, q).unwrap();
                let expect = th * BigRational::from(BigInt::from(sl2));
                assert!(expect.is_integer());
                assert_eq!(
                    expect.to_integer(),
                    BigInt::from(zn_matrix::count_order_class(ell, n, q).unwrap()),
                    "ell={ell} n={n} q={q}"
                );
            }
        }
    }
}
