//! Exact arithmetic in cyclotomic fields ℚ(ζ_n).
//!
//! A `CycNumber` is stored as its coordinate vector in the power basis
//! 1, ζ, …, ζ^{φ(n)−1} of ℚ[x]/(Φ_n), where Φ_n is the n-th cyclotomic
//! polynomial and φ is Euler's totient. Reduction modulo Φ_n makes the
//! representation canonical at a fixed conductor, so equality is decidable
//! coordinate-wise. Mixed-conductor arithmetic embeds both operands into the
//! lcm conductor first, via ζ_m ↦ ζ_n^{n/m}; values never change conductor
//! silently otherwise.
//!
//! Because Φ_n is irreducible over ℚ, every nonzero element is invertible;
//! inverses come from the extended Euclidean algorithm in ℚ[x].

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, LazyLock, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{rational_display, rational_from_json, rational_to_json, Rational};

/// Euler's totient φ(n).
pub fn euler_phi(n: u64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// All divisors of n in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = Vec::new();
    for d in 1..=n {
        if d * d > n {
            break;
        }
        if n % d == 0 {
            ds.push(d);
            if d != n / d {
                ds.push(n / d);
            }
        }
    }
    ds.sort_unstable();
    ds
}

/// Least common multiple of two positive integers.
pub fn lcm64(a: u64, b: u64) -> u64 {
    a / a.gcd(&b) * b
}

// ---------------------------------------------------------------------------
// Integer polynomials (ascending degree) for Φ_n.
// ---------------------------------------------------------------------------

fn int_poly_trim(p: &mut Vec<BigInt>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    int_poly_trim(&mut out);
    out
}

/// Divides by a monic divisor, panicking if the division is not exact. Both
/// facts hold by construction for cyclotomic factorizations of x^n − 1.
fn int_poly_div_exact_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    assert!(den.last().is_some_and(One::is_one), "divisor must be monic");
    let mut rem: Vec<BigInt> = num.to_vec();
    let dn = den.len() - 1;
    if rem.len() <= dn {
        panic!("degree of numerator below divisor in exact division");
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dn];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dn].clone();
        if !c.is_zero() {
            for (j, dj) in den.iter().enumerate() {
                rem[k + j] -= &c * dj;
            }
        }
        quot[k] = c;
    }
    assert!(
        rem.iter().all(Zero::is_zero),
        "cyclotomic division left a remainder"
    );
    int_poly_trim(&mut quot);
    quot
}

static PHI_CACHE: LazyLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// The n-th cyclotomic polynomial Φ_n as an integer coefficient vector in
/// ascending degree. Computed by dividing x^n − 1 by Φ_d over the proper
/// divisors d of n, and cached for reuse.
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<BigInt>> {
    assert!(n >= 1, "conductor must be positive");
    if let Some(hit) = PHI_CACHE.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let poly = if n == 1 {
        vec![BigInt::from(-1), BigInt::one()]
    } else {
        // x^n − 1
        let mut num = vec![BigInt::zero(); (n + 1) as usize];
        num[0] = BigInt::from(-1);
        num[n as usize] = BigInt::one();
        let mut den = vec![BigInt::one()];
        for d in divisors(n) {
            if d < n {
                den = int_poly_mul(&den, &cyclotomic_polynomial(d));
            }
        }
        int_poly_div_exact_monic(&num, &den)
    };
    debug_assert_eq!(poly.len() as u64 - 1, euler_phi(n));
    let arc = Arc::new(poly);
    PHI_CACHE.lock().unwrap().insert(n, arc.clone());
    arc
}

// ---------------------------------------------------------------------------
// Rational polynomials (ascending degree) for runtime arithmetic.
// ---------------------------------------------------------------------------

fn poly_trim(p: &mut Vec<Rational>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    poly_trim(&mut out);
    out
}

/// Quotient and remainder of a by b, b nonzero.
fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut rem: Vec<Rational> = a.to_vec();
    poly_trim(&mut rem);
    let mut bt: Vec<Rational> = b.to_vec();
    poly_trim(&mut bt);
    assert!(!bt.is_empty(), "polynomial division by zero");
    let db = bt.len() - 1;
    if rem.len() <= db {
        return (Vec::new(), rem);
    }
    let lead = bt.last().unwrap().clone();
    let mut quot = vec![Rational::zero(); rem.len() - db];
    for k in (0..quot.len()).rev() {
        let c = &rem[k + db] / &lead;
        if !c.is_zero() {
            for (j, bj) in bt.iter().enumerate() {
                let delta = &c * bj;
                rem[k + j] -= delta;
            }
        }
        quot[k] = c;
    }
    poly_trim(&mut quot);
    poly_trim(&mut rem);
    (quot, rem)
}

/// Extended Euclid: returns (g, u) with u·a ≡ g (mod m) and g = gcd(a, m).
fn poly_half_ext_gcd(a: &[Rational], m: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r0: Vec<Rational> = a.to_vec();
    let mut r1: Vec<Rational> = m.to_vec();
    poly_trim(&mut r0);
    poly_trim(&mut r1);
    let mut s0 = vec![Rational::one()];
    let mut s1: Vec<Rational> = Vec::new();
    while !r1.is_empty() {
        let (q, r) = poly_divmod(&r0, &r1);
        let qs = poly_mul(&q, &s1);
        let mut s = s0.clone();
        if s.len() < qs.len() {
            s.resize(qs.len(), Rational::zero());
        }
        for (i, c) in qs.into_iter().enumerate() {
            s[i] -= c;
        }
        poly_trim(&mut s);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    (r0, s0)
}

// ---------------------------------------------------------------------------
// CycNumber
// ---------------------------------------------------------------------------

/// An element of ℚ(ζ_n) in the power basis of ℚ[x]/(Φ_n).
///
/// The coefficient vector always has length φ(n); conductor 1 encodes a plain
/// rational. Two values at the same conductor are equal iff their coefficient
/// vectors are; across conductors, equality embeds both into the lcm first.
#[derive(Clone, Debug)]
pub struct CycNumber {
    conductor: u64,
    coeffs: Vec<Rational>,
}

impl CycNumber {
    /// Conductor n of the ambient field ℚ(ζ_n).
    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Coordinates in the power basis 1, ζ_n, …, ζ_n^{φ(n)−1}.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Builds a value at conductor n from an arbitrary-degree polynomial in
    /// ζ_n, reducing modulo Φ_n.
    pub fn from_poly(conductor: u64, poly: &[Rational]) -> CycNumber {
        let phi_int = cyclotomic_polynomial(conductor);
        let phi: Vec<Rational> = phi_int.iter().map(|c| Rational::from(c.clone())).collect();
        let (_, rem) = poly_divmod(poly, &phi);
        let mut coeffs = rem;
        coeffs.resize(euler_phi(conductor) as usize, Rational::zero());
        CycNumber { conductor, coeffs }
    }

    /// Embeds a rational as a conductor-1 value.
    pub fn from_rational(r: Rational) -> CycNumber {
        CycNumber {
            conductor: 1,
            coeffs: vec![r],
        }
    }

    /// Embeds a machine integer as a conductor-1 value.
    pub fn from_int(n: i64) -> CycNumber {
        CycNumber::from_rational(Rational::from(BigInt::from(n)))
    }

    /// The root of unity ζ_n^k at conductor n.
    pub fn root_of_unity(n: u64, k: i64) -> CycNumber {
        let k = k.rem_euclid(n as i64) as usize;
        let mut poly = vec![Rational::zero(); k + 1];
        poly[k] = Rational::one();
        CycNumber::from_poly(n, &poly)
    }

    /// True when every coordinate vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Returns the value as a rational if it lies in ℚ, i.e. only the
    /// constant coordinate is populated.
    pub fn try_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Image under ζ_m ↦ ζ_n^{n/m} for m | n; a field embedding.
    pub fn embed(&self, target: u64) -> Result<CycNumber> {
        if target % self.conductor != 0 {
            return Err(Error::ConductorEmbed {
                from: self.conductor,
                to: target,
            });
        }
        if target == self.conductor {
            return Ok(self.clone());
        }
        let stride = (target / self.conductor) as usize;
        let mut poly = vec![Rational::zero(); (self.coeffs.len() - 1) * stride + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            poly[i * stride] = c.clone();
        }
        Ok(CycNumber::from_poly(target, &poly))
    }

    fn common(&self, other: &CycNumber) -> (CycNumber, CycNumber) {
        let n = lcm64(self.conductor, other.conductor);
        (
            self.embed(n).expect("lcm embedding divides"),
            other.embed(n).expect("lcm embedding divides"),
        )
    }

    /// Multiplicative inverse; reports division by zero as an error.
    pub fn inv(&self) -> Result<CycNumber> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let phi_int = cyclotomic_polynomial(self.conductor);
        let phi: Vec<Rational> = phi_int.iter().map(|c| Rational::from(c.clone())).collect();
        let (g, u) = poly_half_ext_gcd(&self.coeffs, &phi);
        // Φ_n is irreducible, so the gcd with a nonzero residue is a nonzero
        // constant.
        assert!(g.len() == 1 && !g[0].is_zero(), "cyclotomic gcd not constant");
        let scale = &g[0];
        let inv_poly: Vec<Rational> = u.iter().map(|c| c / scale).collect();
        Ok(CycNumber::from_poly(self.conductor, &inv_poly))
    }

    /// Exact quotient; reports division by zero as an error.
    pub fn try_div(&self, other: &CycNumber) -> Result<CycNumber> {
        Ok(self.clone() * other.inv()?)
    }

    /// Integer power, with negative exponents via the inverse.
    pub fn pow(&self, e: i64) -> Result<CycNumber> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut out = CycNumber::from_int(1);
        for _ in 0..e.unsigned_abs() {
            out = out * base.clone();
        }
        Ok(out)
    }

    /// Decodes the JSON forms: the canonical object
    /// `{"conductor": n, "coeffs": [rational, …]}` or any rational shorthand
    /// (taken at conductor 1).
    pub fn from_json(v: &Value) -> Result<CycNumber> {
        if let Value::Object(map) = v {
            let n = map
                .get("conductor")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Schema("scalar object needs a positive conductor".into()))?;
            if n == 0 {
                return Err(Error::Schema("conductor must be positive".into()));
            }
            let coeffs_v = map
                .get("coeffs")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Schema("scalar object needs a coeffs array".into()))?;
            let expected = euler_phi(n) as usize;
            if coeffs_v.len() > expected {
                return Err(Error::Schema(format!(
                    "conductor {n} admits {expected} coefficients, got {}",
                    coeffs_v.len()
                )));
            }
            let mut poly = Vec::with_capacity(coeffs_v.len());
            for c in coeffs_v {
                poly.push(rational_from_json(c)?);
            }
            Ok(CycNumber::from_poly(n, &poly))
        } else {
            Ok(CycNumber::from_rational(rational_from_json(v)?))
        }
    }

    /// Encodes as the canonical JSON object with decimal-string rationals.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "conductor": self.conductor,
            "coeffs": self.coeffs.iter().map(rational_to_json).collect::<Vec<_>>(),
        })
    }
}

impl PartialEq for CycNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.common(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycNumber {}

impl std::ops::Add for CycNumber {
    type Output = CycNumber;
    fn add(self, rhs: CycNumber) -> CycNumber {
        let (mut a, b) = self.common(&rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs) {
            *x += y;
        }
        a
    }
}

impl std::ops::Sub for CycNumber {
    type Output = CycNumber;
    fn sub(self, rhs: CycNumber) -> CycNumber {
        let (mut a, b) = self.common(&rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs) {
            *x -= y;
        }
        a
    }
}

impl std::ops::Neg for CycNumber {
    type Output = CycNumber;
    fn neg(mut self) -> CycNumber {
        for c in &mut self.coeffs {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl std::ops::Mul for CycNumber {
    type Output = CycNumber;
    fn mul(self, rhs: CycNumber) -> CycNumber {
        let (a, b) = self.common(&rhs);
        let prod = poly_mul(&a.coeffs, &b.coeffs);
        CycNumber::from_poly(a.conductor, &prod)
    }
}

impl std::ops::Div for CycNumber {
    type Output = CycNumber;
    /// Panics on a zero divisor; use `try_div` where the divisor is not known
    /// to be nonzero.
    fn div(self, rhs: CycNumber) -> CycNumber {
        self.try_div(&rhs).expect("division by zero")
    }
}

impl num_traits::Zero for CycNumber {
    fn zero() -> Self {
        CycNumber::from_int(0)
    }
    fn is_zero(&self) -> bool {
        CycNumber::is_zero(self)
    }
}

impl num_traits::One for CycNumber {
    fn one() -> Self {
        CycNumber::from_int(1)
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = c.is_negative();
            if first {
                if sign {
                    write!(f, "-")?;
                }
                first = false;
            } else if sign {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_one = mag.is_one();
            if k == 0 {
                write!(f, "{}", rational_display(&mag))?;
            } else {
                if !coeff_one {
                    write!(f, "{}*", rational_display(&mag))?;
                }
                write!(f, "z{}", self.conductor)?;
                if k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}
