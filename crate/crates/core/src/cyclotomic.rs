//! Exact arithmetic in cyclotomic integer rings Z\[ζ_m\].
//!
//! Elements are integer coordinate vectors in the power basis
//! 1, ζ, …, ζ^{φ(m)−1} of Z\[x\]/(Φ_m(x)). Character sums land here and are
//! tested for rationality exactly, never through floating point.

use num_integer::Integer;

/// Integer coefficients of the m-th cyclotomic polynomial, low degree first.
///
/// Computed as (x^m − 1) / ∏_{d|m, d<m} Φ_d(x) by exact division; memoized,
/// since every element construction reduces against it.
pub fn cyclotomic_polynomial(m: u64) -> Vec<i128> {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<i128>>>> = OnceLock::new();
    assert!(m >= 1);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&m) {
        return hit.clone();
    }
    // numerator x^m − 1
    let mut num = vec![0i128; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            let phi_d = cyclotomic_polynomial(d);
            num = poly_div_exact(&num, &phi_d);
        }
    }
    cache.lock().unwrap().insert(m, num.clone());
    num
}

/// Exact division of integer polynomials (low degree first); divisor monic.
fn poly_div_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut rem: Vec<i128> = num.to_vec();
    let dd = den.len() - 1;
    assert_eq!(den[dd], 1, "divisor must be monic");
    let nd = rem.len() - 1;
    if nd < dd {
        assert!(rem.iter().all(|&c| c == 0));
        return vec![0];
    }
    let mut quo = vec![0i128; nd - dd + 1];
    for i in (0..=nd - dd).rev() {
        let c = rem[i + dd];
        quo[i] = c;
        if c != 0 {
            for j in 0..=dd {
                rem[i + j] -= c * den[j];
            }
        }
    }
    assert!(rem.iter().all(|&c| c == 0), "division not exact");
    quo
}

/// An element of Z\[ζ_m\], reduced modulo Φ_m.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cyclotomic {
    order: u64,
    /// Coordinates in the basis 1, ζ, …, ζ^{φ(m)−1}.
    coeffs: Vec<i128>,
    /// Φ_m, cached for reduction.
    modulus: Vec<i128>,
}

impl Cyclotomic {
    pub fn zero(order: u64) -> Self {
        let modulus = cyclotomic_polynomial(order);
        let phi = modulus.len() - 1;
        Cyclotomic {
            order,
            coeffs: vec![0; phi.max(1)],
            modulus,
        }
    }

    pub fn from_integer(order: u64, n: i128) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = n;
        z
    }

    pub fn one(order: u64) -> Self {
        Self::from_integer(order, 1)
    }

    /// ζ_m^k.
    pub fn root(order: u64, k: u64) -> Self {
        let mut raw = vec![0i128; (k % order) as usize + 1];
        *raw.last_mut().unwrap() = 1;
        Self::reduce(order, raw)
    }

    fn reduce(order: u64, mut raw: Vec<i128>) -> Self {
        let modulus = cyclotomic_polynomial(order);
        let dd = modulus.len() - 1;
        // remainder of raw mod the monic modulus
        while raw.len() > dd.max(1) {
            let top = raw.len() - 1;
            let c = raw[top];
            raw.pop();
            if c != 0 && top >= dd {
                for j in 0..dd {
                    raw[top - dd + j] -= c * modulus[j];
                }
            }
        }
        raw.resize(dd.max(1), 0);
        Cyclotomic {
            order,
            coeffs: raw,
            modulus,
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Coordinates in the power basis 1, ζ, …, ζ^{φ(m)−1}.
    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Some(n) when the element is the rational integer n.
    pub fn as_integer(&self) -> Option<i128> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    pub fn add(&self, other: &Cyclotomic) -> Cyclotomic {
        assert_eq!(self.order, other.order, "cyclotomic order mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Cyclotomic {
            order: self.order,
            coeffs,
            modulus: self.modulus.clone(),
        }
    }

    pub fn scale(&self, n: i128) -> Cyclotomic {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * n).collect(),
            modulus: self.modulus.clone(),
        }
    }

    pub fn mul(&self, other: &Cyclotomic) -> Cyclotomic {
        assert_eq!(self.order, other.order, "cyclotomic order mismatch");
        let mut raw = vec![0i128; self.coeffs.len() + other.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                raw[i + j] += a * b;
            }
        }
        Self::reduce(self.order, raw)
    }
}

/// Euler totient, by trial factorization.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result = result / p * (p - 1);
        }
        p += 1;
    }
    if n > 1 {
        result = result / n * (n - 1);
    }
    result
}

/// gcd on u64.
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Inverse of a mod m for gcd(a, m) = 1, by extended Euclid.
pub fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let qt = old_r / r;
        (old_r, r) = (r, old_r - qt * r);
        (old_s, s) = (s, old_s - qt * s);
    }
    assert_eq!(old_r, 1, "not invertible");
    old_s.rem_euclid(m as i128) as u64
}

/// lcm on u64.
pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}
