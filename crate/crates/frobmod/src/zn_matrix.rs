//! Exact arithmetic and exhaustive combinatorics for 2x2 matrices over Z/MZ:
//! enumeration oracles, conjugacy classes, stabilizers, and solution-counting
//! lemmas. Everything here is computed by brute force or elementary closed
//! forms; this module is the ground truth the prediction formulas are checked
//! against.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::arith::{self, ipow};
use crate::{Error, Result};

/// Exhaustive scans refuse once the full matrix space M^4 exceeds this.
pub const SCAN_CAP: u128 = 100_000_000;

/// A 2x2 matrix over Z/MZ, stored row-major as (a, b; c, d).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ResidueMatrix {
    pub modulus: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ResidueMatrix {
    pub fn new(modulus: u64, a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::BadModulus(modulus));
        }
        Ok(ResidueMatrix {
            modulus,
            a: a % modulus,
            b: b % modulus,
            c: c % modulus,
            d: d % modulus,
        })
    }

    pub fn identity(modulus: u64) -> Self {
        ResidueMatrix { modulus, a: 1 % modulus, b: 0, c: 0, d: 1 % modulus }
    }

    pub fn det(&self) -> u64 {
        let m = self.modulus as u128;
        let ad = self.a as u128 * self.d as u128 % m;
        let bc = self.b as u128 * self.c as u128 % m;
        ((ad + m - bc) % m) as u64
    }

    pub fn trace(&self) -> u64 {
        (self.a + self.d) % self.modulus
    }

    pub fn is_invertible(&self) -> bool {
        arith::gcd(self.det(), self.modulus) == 1
    }

    pub fn mul(&self, rhs: &ResidueMatrix) -> ResidueMatrix {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let m = self.modulus;
        let mm = |x: u64, y: u64| arith::mod_mul(x, y, m);
        ResidueMatrix {
            modulus: m,
            a: (mm(self.a, rhs.a) + mm(self.b, rhs.c)) % m,
            b: (mm(self.a, rhs.b) + mm(self.b, rhs.d)) % m,
            c: (mm(self.c, rhs.a) + mm(self.d, rhs.c)) % m,
            d: (mm(self.c, rhs.b) + mm(self.d, rhs.d)) % m,
        }
    }

    pub fn inverse(&self) -> Option<ResidueMatrix> {
        let m = self.modulus;
        let di = arith::mod_inv(self.det(), m)?;
        let mm = |x: u64, y: u64| arith::mod_mul(x, y, m);
        Some(ResidueMatrix {
            modulus: m,
            a: mm(self.d, di),
            b: mm(m - self.b % m, di) % m,
            c: mm(m - self.c % m, di) % m,
            d: mm(self.a, di),
        })
    }

    pub fn neg(&self) -> ResidueMatrix {
        let m = self.modulus;
        ResidueMatrix {
            modulus: m,
            a: (m - self.a) % m,
            b: (m - self.b) % m,
            c: (m - self.c) % m,
            d: (m - self.d) % m,
        }
    }

    /// g * self * g^{-1}; `g` must be invertible.
    pub fn conjugate_by(&self, g: &ResidueMatrix) -> ResidueMatrix {
        let gi = g.inverse().expect("conjugating by a singular matrix");
        g.mul(self).mul(&gi)
    }

    /// Reduce all entries to a divisor of the modulus.
    pub fn reduce_mod(&self, m2: u64) -> ResidueMatrix {
        debug_assert_eq!(self.modulus % m2, 0);
        ResidueMatrix {
            modulus: m2,
            a: self.a % m2,
            b: self.b % m2,
            c: self.c % m2,
            d: self.d % m2,
        }
    }

    fn key(&self) -> (u64, u64, u64, u64) {
        (self.a, self.b, self.c, self.d)
    }
}

fn check_scan(m: u64) -> Result<()> {
    if (m as u128).pow(4) > SCAN_CAP {
        return Err(Error::EnumerationCap(m));
    }
    Ok(())
}

/// Row-major lexicographic enumeration of all M^4 matrices.
pub fn all_matrices(m: u64) -> impl Iterator<Item = ResidueMatrix> {
    let total = (m as u128).pow(4);
    (0..total).map(move |i| {
        let a = (i / (m as u128).pow(3) % m as u128) as u64;
        let b = (i / (m as u128).pow(2) % m as u128) as u64;
        let c = (i / m as u128 % m as u128) as u64;
        let d = (i % m as u128) as u64;
        ResidueMatrix { modulus: m, a, b, c, d }
    })
}

/// Exact orders of GL2, SL2 and PSL2 over Z/MZ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupSizes {
    pub gl2: u128,
    pub sl2: u128,
    pub psl2: u128,
}

/// Group orders from the prime-power formulas, combined multiplicatively
/// (GL2(Z_N) splits as a direct sum over coprime factors). PSL2 is SL2
/// modulo {+-1}, which is trivial only at M = 2.
pub fn group_sizes(m: u64) -> Result<GroupSizes> {
    if m < 2 {
        return Err(Error::BadModulus(m));
    }
    let mut gl2: u128 = 1;
    let mut sl2: u128 = 1;
    for (ell, n) in arith::factorize(m) {
        let l = ell as u128;
        // #GL2(Z_{l^n}) = l^{4n-4} (l^2 - l)(l^2 - 1), #SL2(Z_{l^n}) = l^{3n-2}(l^2 - 1)
        gl2 *= ipow(ell, 4 * n - 4) * (l * l - l) * (l * l - 1);
        sl2 *= ipow(ell, 3 * n - 2) * (l * l - 1);
    }
    let psl2 = if m == 2 { sl2 } else { sl2 / 2 };
    Ok(GroupSizes { gl2, sl2, psl2 })
}

/// Brute-force count of matrices in GL2(Z_M) with the given determinant and
/// trace. This is the oracle side; the closed form lives in `formulas::phi`.
pub fn count_det_trace(m: u64, q: u64, t: u64) -> Result<u128> {
    if m < 2 {
        return Err(Error::BadModulus(m));
    }
    if arith::gcd(q % m, m) != 1 {
        return Err(Error::NotAUnit(q % m, m));
    }
    check_scan(m)?;
    let (q, t) = (q % m, t % m);
    let mut count = 0u128;
    for mat in all_matrices(m) {
        if mat.det() == q && mat.trace() == t {
            count += 1;
        }
    }
    Ok(count)
}

/// One full pass over all M^4 matrices, bucketed by (det, trace). Only units
/// appear as determinant keys.
pub fn det_trace_table(m: u64) -> Result<HashMap<(u64, u64), u128>> {
    if m < 2 {
        return Err(Error::BadModulus(m));
    }
    check_scan(m)?;
    let mut table = HashMap::new();
    for mat in all_matrices(m) {
        let det = mat.det();
        if arith::gcd(det, m) == 1 {
            *table.entry((det, mat.trace())).or_insert(0u128) += 1;
        }
    }
    Ok(table)
}

/// ell-adic valuation of a residue in Z_{ell^n}; `None` is ord(0) = +infinity.
pub fn residue_ord(alpha: u64, ell: u64, n: u32) -> Option<u32> {
    let m = ipow(ell, n) as u64;
    let alpha = alpha % m;
    arith::valuation(alpha, ell)
}

/// Number of solutions (x, y) in Z_{ell^n}^2 to xy = alpha:
/// (k+1)(l^n - l^{n-1}) for alpha != 0 with k = ord(alpha), and
/// (n+1)(l^n - l^{n-1}) + l^{n-1} for alpha = 0.
pub fn count_xy_eq_alpha(ell: u64, n: u32, alpha: u64) -> Result<u128> {
    if !arith::is_prime(ell) || n == 0 {
        return Err(Error::NotPrimePower(ipow(ell, n.max(1)) as u64));
    }
    let unit_count = ipow(ell, n) - ipow(ell, n - 1);
    Ok(match residue_ord(alpha, ell, n) {
        Some(k) => (k as u128 + 1) * unit_count,
        None => (n as u128 + 1) * unit_count + ipow(ell, n - 1),
    })
}

/// Both sides of the telescoping identity
/// sum_{i=0}^{k} (l^{n-i} - l^{n-i-1})(2i+1)(l^n - l^{n-1})
///   = l^{2n} + l^{2n-1} - (2k+3) l^{2n-k-1} + (2k+1) l^{2n-k-2},
/// each multiplied by l so the k = n endpoint stays integral.
/// Returns (literal sum, closed form); callers assert equality.
pub fn induction_sum(ell: u64, n: u32, k: u32) -> Result<(u128, u128)> {
    if k > n || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "induction_sum requires 0 <= k <= n, got k={k}, n={n}"
        )));
    }
    // At i = k = n the summand involves ell^{-1}, so both sides are evaluated
    // scaled by ell to stay integral.
    let unit_count = ipow(ell, n) - ipow(ell, n - 1);
    let mut literal = 0u128;
    for i in 0..=k {
        let outer = ipow(ell, n - i + 1) - ipow(ell, n - i);
        literal += outer * (2 * i as u128 + 1) * unit_count;
    }
    let closed = ipow(ell, 2 * n + 1) + ipow(ell, 2 * n)
        - (2 * k as u128 + 3) * ipow(ell, 2 * n - k)
        + (2 * k as u128 + 1) * ipow(ell, 2 * n - k - 1);
    Ok((literal, closed))
}

/// A GL2(Z_M)-conjugacy class with its lexicographically least member as the
/// canonical representative.
#[derive(Clone, Debug)]
pub struct ConjClass {
    pub representative: ResidueMatrix,
    pub size: u128,
    members: BTreeSet<(u64, u64, u64, u64)>,
}

impl ConjClass {
    pub fn contains(&self, mat: &ResidueMatrix) -> bool {
        mat.modulus == self.representative.modulus && self.members.contains(&mat.key())
    }

    /// Canonical fingerprint: the entries of the least member.
    pub fn fingerprint(&self) -> String {
        let r = &self.representative;
        format!("{},{},{},{}", r.a, r.b, r.c, r.d)
    }

    pub fn stabilizer_order(&self) -> u128 {
        let sizes = group_sizes(self.representative.modulus).expect("valid modulus");
        debug_assert_eq!(sizes.gl2 % self.size, 0);
        sizes.gl2 / self.size
    }
}

/// Conjugacy class of an invertible matrix, by scanning all conjugators when
/// the matrix space is small and by orbit generation otherwise.
pub fn conj_class_of(mat: &ResidueMatrix) -> Result<ConjClass> {
    if !mat.is_invertible() {
        return Err(Error::SingularMatrix(mat.modulus));
    }
    let m = mat.modulus;
    let members: BTreeSet<(u64, u64, u64, u64)> = if (m as u128).pow(4) <= 10_000_000 {
        all_matrices(m)
            .filter(|g| g.is_invertible())
            .map(|g| mat.conjugate_by(&g).key())
            .collect()
    } else {
        orbit_by_generators(mat)
    };
    let rep = *members.iter().next().expect("orbit is nonempty");
    Ok(ConjClass {
        representative: ResidueMatrix { modulus: m, a: rep.0, b: rep.1, c: rep.2, d: rep.3 },
        size: members.len() as u128,
        members,
    })
}

/// BFS over conjugation by a generating set of GL2(Z_M): the two unit
/// transvections and diag(u, 1) for every unit u.
fn orbit_by_generators(mat: &ResidueMatrix) -> BTreeSet<(u64, u64, u64, u64)> {
    let m = mat.modulus;
    let mut gens = vec![
        ResidueMatrix { modulus: m, a: 1, b: 1, c: 0, d: 1 },
        ResidueMatrix { modulus: m, a: 1, b: 0, c: 1, d: 1 },
    ];
    for u in 2..m {
        if arith::gcd(u, m) == 1 {
            gens.push(ResidueMatrix { modulus: m, a: u, b: 0, c: 0, d: 1 });
        }
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(mat.key());
    queue.push_back(*mat);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = x.conjugate_by(g);
            if seen.insert(y.key()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Does `mat` fix some vector that is nonzero modulo ell? This is the
/// membership test for the classes of the matrices ((1, w), (0, q)).
pub fn has_unit_eigenvector_one(mat: &ResidueMatrix, ell: u64) -> bool {
    let m = mat.modulus;
    for x in 0..m {
        for y in 0..m {
            if x % ell == 0 && y % ell == 0 {
                continue;
            }
            let fx = (arith::mod_mul(mat.a, x, m) + arith::mod_mul(mat.b, y, m)) % m;
            let fy = (arith::mod_mul(mat.c, x, m) + arith::mod_mul(mat.d, y, m)) % m;
            if fx == x && fy == y {
                return true;
            }
        }
    }
    false
}

/// Brute-force count of determinant-q matrices over Z_{ell^n} that are
/// conjugate to some ((1, w), (0, q)), i.e. that have an eigenvector with
/// eigenvalue 1 which is nonzero modulo ell.
pub fn count_order_class(ell: u64, n: u32, q: u64) -> Result<u128> {
    let m = ipow(ell, n) as u64;
    if arith::gcd(q % m, ell) != 1 {
        return Err(Error::NotAUnit(q % m, m));
    }
    check_scan(m)?;
    let q = q % m;
    let mut count = 0u128;
    for mat in all_matrices(m) {
        if mat.det() == q && has_unit_eigenvector_one(&mat, ell) {
            count += 1;
        }
    }
    Ok(count)
}

/// The pairwise non-conjugate representatives M_a = ((1, ell^a), (0, q)) for
/// 0 <= a <= min(nu, n), where nu = ord_ell(q - 1). For nu = 0 this is the
/// single representative M_0.
pub fn conj_representatives_ma(ell: u64, n: u32, q: u64) -> Result<Vec<ResidueMatrix>> {
    let m = ipow(ell, n) as u64;
    if q % ell == 0 {
        return Err(Error::NotAUnit(q % m, m));
    }
    let q = q % m;
    let nu_cap = match arith::valuation((q + m - 1) % m, ell) {
        Some(v) => v.min(n),
        None => n, // q = 1 mod ell^n, so nu >= n
    };
    Ok((0..=nu_cap)
        .map(|a| ResidueMatrix {
            modulus: m,
            a: 1,
            b: (ipow(ell, a) as u64) % m,
            c: 0,
            d: q,
        })
        .collect())
}

/// Count matrices over Z_{ell^{a+b+1}} with determinant q whose fixed-group
/// data pins E[ell^infinity](F_q) = Z_{ell^a} + Z_{ell^b}:
///   (i)   Tr != q + 1 mod ell^{a+b+1},
///   (ii)  Tr  = q + 1 mod ell^{a+b},
///   (iii) conjugate to some ((1, w), (0, q)) mod ell^b, and
///   (iv)  congruent to the identity mod ell^a.
pub fn count_group_structure_matrices(ell: u64, a: u32, b: u32, q: u64) -> Result<u128> {
    if a > b {
        return Err(Error::InvalidArgument(format!(
            "group-structure count requires a <= b, got a={a}, b={b}"
        )));
    }
    if q % ell == 0 {
        return Err(Error::NotAUnit(q % ell, ell));
    }
    let m = ipow(ell, a + b + 1) as u64;
    check_scan(m)?;
    let q = q % m;
    let m_ab = ipow(ell, a + b) as u64;
    let m_a = ipow(ell, a) as u64;
    let m_b = ipow(ell, b) as u64;
    let target = (q + 1) % m;
    let mut count = 0u128;
    for mat in all_matrices(m) {
        if mat.det() != q {
            continue;
        }
        let tr = mat.trace();
        if tr == target || tr % m_ab != target % m_ab {
            continue;
        }
        if a > 0 {
            let r = mat.reduce_mod(m_a);
            if r != ResidueMatrix::identity(m_a) {
                continue;
            }
        }
        if b > 0 && !has_unit_eigenvector_one(&mat.reduce_mod(m_b), ell) {
            continue;
        }
        count += 1;
    }
    Ok(count)
}
