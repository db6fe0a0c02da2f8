//! Truncated-precision arithmetic in the equal-characteristic local field
//! F = F_q((t)), with the uniformiser t.
//!
//! Elements carry an absolute precision k: coefficients of t^val .. t^{k−1}
//! are known exactly, everything from t^k on is unknown. The zero-to-precision
//! element O(t^k) has an empty coefficient window. Absolute precision matches
//! the residue grids mod t^k used by the volume enumerations.

use crate::ff::{ff_dlog, ff_primitive_root, FFElement, FieldSpec};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("division by an element that is zero to its precision")]
    DivisionByZeroToPrecision,
    #[error("result retains no coefficients at the working precision")]
    PrecisionExhausted,
    #[error("element is zero to its precision")]
    ZeroElement,
    #[error("no n-th root: {0}")]
    NoRoot(NoRootReason),
    #[error("p divides n")]
    PDividesN,
    #[error("series literal parse error: {0}")]
    Parse(String),
}

#[derive(Debug, PartialEq, Eq)]
pub enum NoRootReason {
    Valuation,
    Residue,
}

impl fmt::Display for NoRootReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoRootReason::Valuation => write!(f, "valuation not divisible by n"),
            NoRootReason::Residue => write!(f, "leading coefficient is not an n-th power"),
        }
    }
}

/// F_q((t)) together with a default working precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFieldSpec {
    residue: FieldSpec,
    default_precision: i64,
}

impl LocalFieldSpec {
    pub fn new(residue: FieldSpec, default_precision: i64) -> Self {
        assert!(default_precision >= 1);
        LocalFieldSpec {
            residue,
            default_precision,
        }
    }

    pub fn residue(&self) -> &FieldSpec {
        &self.residue
    }

    pub fn default_precision(&self) -> i64 {
        self.default_precision
    }

    /// The uniformiser t at the default precision.
    pub fn uniformiser(&self) -> TruncatedLaurentSeries {
        TruncatedLaurentSeries::monomial(&self.residue, 1, self.default_precision)
    }

    /// Constant series from a residue-field element.
    pub fn constant(&self, c: &FFElement) -> TruncatedLaurentSeries {
        TruncatedLaurentSeries::new(&self.residue, 0, vec![c.clone()], self.default_precision)
    }

    pub fn zero(&self) -> TruncatedLaurentSeries {
        TruncatedLaurentSeries::zero(&self.residue, self.default_precision)
    }

    pub fn parse(&self, s: &str) -> Result<TruncatedLaurentSeries, SeriesError> {
        parse_series(&self.residue, s)
    }
}

/// An element of F_q((t)) known modulo t^prec.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedLaurentSeries {
    field: FieldSpec,
    /// Valuation of the leading retained term; equals prec for the zero
    /// element, whose window is empty.
    val: i64,
    /// Coefficients of t^val, t^{val+1}, …; the leading one nonzero.
    coeffs: Vec<FFElement>,
    /// Absolute precision: coefficients from t^prec on are unknown.
    prec: i64,
}

impl TruncatedLaurentSeries {
    /// Build from raw data, trimming leading zeros and truncating at prec.
    pub fn new(field: &FieldSpec, val: i64, coeffs: Vec<FFElement>, prec: i64) -> Self {
        let mut val = val;
        let mut coeffs = coeffs;
        if val + coeffs.len() as i64 > prec {
            coeffs.truncate((prec - val).max(0) as usize);
        }
        while let Some(first) = coeffs.first() {
            if first.is_zero() {
                coeffs.remove(0);
                val += 1;
            } else {
                break;
            }
        }
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            val = prec;
        }
        TruncatedLaurentSeries {
            field: field.clone(),
            val,
            coeffs,
            prec,
        }
    }

    pub fn zero(field: &FieldSpec, prec: i64) -> Self {
        TruncatedLaurentSeries {
            field: field.clone(),
            val: prec,
            coeffs: Vec::new(),
            prec,
        }
    }

    /// The monomial t^v.
    pub fn monomial(field: &FieldSpec, v: i64, prec: i64) -> Self {
        Self::new(field, v, vec![field.one()], prec)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Valuation; None for the zero-to-precision element.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Valuation with the zero element read as its precision (a lower bound).
    fn val_or_prec(&self) -> i64 {
        self.val
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Coefficient of t^i; i must lie below the precision.
    pub fn coeff(&self, i: i64) -> FFElement {
        assert!(i < self.prec, "coefficient beyond precision");
        if i < self.val || i >= self.val + self.coeffs.len() as i64 {
            self.field.zero()
        } else {
            self.coeffs[(i - self.val) as usize].clone()
        }
    }

    fn coeff_or_zero(&self, i: i64) -> FFElement {
        if i >= self.prec || i < self.val || i >= self.val + self.coeffs.len() as i64 {
            self.field.zero()
        } else {
            self.coeffs[(i - self.val) as usize].clone()
        }
    }

    /// Forget knowledge beyond a lower absolute precision.
    pub fn truncate(&self, prec: i64) -> Self {
        assert!(prec <= self.prec);
        Self::new(&self.field, self.val.min(prec), self.coeffs.clone(), prec)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.field, other.field);
        let prec = self.prec.min(other.prec);
        if self.is_zero() && other.is_zero() {
            return Self::zero(&self.field, prec);
        }
        let lo = self.val.min(other.val).min(prec);
        let mut coeffs = Vec::new();
        for i in lo..prec {
            coeffs.push(self.coeff_or_zero(i).add(&other.coeff_or_zero(i)));
        }
        Self::new(&self.field, lo, coeffs, prec)
    }

    pub fn neg(&self) -> Self {
        TruncatedLaurentSeries {
            field: self.field.clone(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &FFElement) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a.mul(c)).collect();
        Self::new(&self.field, self.val, coeffs, self.prec)
    }

    /// Product at the propagated precision min(v(a)+prec(b), v(b)+prec(a)),
    /// where a zero element's valuation is read as its precision.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        debug_assert_eq!(self.field, other.field);
        let prec = (self.val_or_prec() + other.prec).min(other.val_or_prec() + self.prec);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.field, prec));
        }
        let v = self.val + other.val;
        if prec <= v {
            return Err(SeriesError::PrecisionExhausted);
        }
        let n = (prec - v) as usize;
        let mut coeffs = vec![self.field.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j < n {
                    coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
                }
            }
        }
        Ok(Self::new(&self.field, v, coeffs, prec))
    }

    /// Quotient; divisor must be nonzero to precision. Result precision
    /// min(prec(a) − v(b), prec(b) + v(a) − 2 v(b)).
    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        debug_assert_eq!(self.field, other.field);
        if other.is_zero() {
            return Err(SeriesError::DivisionByZeroToPrecision);
        }
        let prec = (self.prec - other.val).min(other.prec + self.val_or_prec() - 2 * other.val);
        if self.is_zero() {
            return Ok(Self::zero(&self.field, prec));
        }
        let v = self.val - other.val;
        if prec <= v {
            return Err(SeriesError::PrecisionExhausted);
        }
        let n = (prec - v) as usize;
        let lead_inv = other.coeffs[0].inv();
        let mut rem: Vec<FFElement> = (0..n)
            .map(|i| self.coeff_or_zero(self.val + i as i64))
            .collect();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let c = rem[i].mul(&lead_inv);
            for j in 0..other.coeffs.len() {
                if i + j < n {
                    let s = c.mul(&other.coeffs[j]);
                    rem[i + j] = rem[i + j].sub(&s);
                }
            }
            out.push(c);
        }
        Ok(Self::new(&self.field, v, out, prec))
    }

    /// Decomposition x = t^v · \[teich\] · (one-unit) along F^× ≅ Z × μ_{q−1} × U₁;
    /// in equal characteristic the Teichmüller part is the constant lift of the
    /// leading coefficient.
    pub fn unit_decompose(&self) -> Result<UnitDecomposition, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::ZeroElement);
        }
        let teich = self.coeffs[0].clone();
        let inv = teich.inv();
        let one_unit_coeffs: Vec<FFElement> = self.coeffs.iter().map(|c| c.mul(&inv)).collect();
        let one_unit =
            TruncatedLaurentSeries::new(&self.field, 0, one_unit_coeffs, self.prec - self.val);
        Ok(UnitDecomposition {
            v: self.val,
            teich,
            one_unit,
        })
    }

    /// n-th root when it exists (Hensel on the one-unit part; the Teichmüller
    /// part must be an n-th power in F_q^× and n must divide the valuation),
    /// normalized so the leading coefficient is the canonical n-th root of the
    /// input's (least dlog w.r.t. the canonical primitive root).
    /// Requires gcd(n, p) = 1.
    pub fn nth_root(&self, n: u64) -> Result<Self, SeriesError> {
        assert!(n >= 1);
        if n.is_multiple_of(self.field.p()) {
            return Err(SeriesError::PDividesN);
        }
        let dec = self.unit_decompose()?;
        if dec.v.rem_euclid(n as i64) != 0 {
            return Err(SeriesError::NoRoot(NoRootReason::Valuation));
        }
        let root_teich =
            canonical_nth_root(&dec.teich, n).ok_or(SeriesError::NoRoot(NoRootReason::Residue))?;
        let unit_root = one_unit_nth_root(&dec.one_unit, n);
        let w = dec.v / n as i64;
        let prec = (self.prec - dec.v) + w;
        let head = TruncatedLaurentSeries::new(&self.field, w, vec![root_teich], prec);
        head.mul(&unit_root)
    }

    /// Class of x in F^×/(F^×)^n ≅ Z/n × F_q^×/(F_q^×)^n for gcd(n, p) = 1:
    /// (v mod n, dlog of the Teichmüller part mod gcd(n, q−1)). One-units are
    /// n-divisible and contribute trivially.
    pub fn power_class(&self, n: u64) -> Result<(u64, u64), SeriesError> {
        if n.is_multiple_of(self.field.p()) {
            return Err(SeriesError::PDividesN);
        }
        let dec = self.unit_decompose()?;
        let g = ff_primitive_root(&self.field);
        let e = ff_dlog(&g, &dec.teich).expect("teichmuller part is a unit");
        let d = crate::cyclotomic::gcd(n, self.field.q() - 1);
        Ok((dec.v.rem_euclid(n as i64) as u64, e % d))
    }
}

/// x = t^v · \[teich\] · one_unit with one_unit ≡ 1 mod t.
#[derive(Clone, Debug)]
pub struct UnitDecomposition {
    pub v: i64,
    pub teich: FFElement,
    pub one_unit: TruncatedLaurentSeries,
}

/// The four arithmetic operations behind one entry point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn ls_arith(
    a: &TruncatedLaurentSeries,
    b: &TruncatedLaurentSeries,
    op: ArithOp,
) -> Result<TruncatedLaurentSeries, SeriesError> {
    match op {
        ArithOp::Add => Ok(a.add(b)),
        ArithOp::Sub => Ok(a.sub(b)),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
    }
}

/// Least-dlog n-th root of a nonzero residue-field element, or None when c is
/// not an n-th power: solves n·y ≡ dlog(c) (mod q−1) and returns g^y for the
/// least solution y.
pub fn canonical_nth_root(c: &FFElement, n: u64) -> Option<FFElement> {
    if c.is_zero() {
        return None;
    }
    let field = c.field().clone();
    let q = field.q();
    let g = ff_primitive_root(&field);
    let e = ff_dlog(&g, c).expect("nonzero element lies in <g>");
    let m = q - 1;
    let d = crate::cyclotomic::gcd(n, m);
    if !e.is_multiple_of(d) {
        return None;
    }
    let step = m / d;
    let n_red = (n / d) % step;
    let y0 = if step == 1 {
        0
    } else {
        (crate::cyclotomic::mod_inverse(n_red, step) as u128 * ((e / d) % step) as u128
            % step as u128) as u64
    };
    Some(g.pow(y0))
}

/// Newton iteration for the unique one-unit n-th root of a one-unit,
/// gcd(n, p) = 1, exact to the input's precision.
fn one_unit_nth_root(u: &TruncatedLaurentSeries, n: u64) -> TruncatedLaurentSeries {
    let field = u.field().clone();
    let prec = u.precision();
    let one = TruncatedLaurentSeries::new(&field, 0, vec![field.one()], prec);
    let n_inv = field.from_int(n as i64).inv();
    let mut w = one.clone();
    loop {
        let mut w_pow = one.clone();
        for _ in 0..n - 1 {
            w_pow = w_pow.mul(&w).expect("one-unit product keeps precision");
        }
        let wn = w_pow.mul(&w).expect("one-unit product keeps precision");
        let err = wn.sub(u);
        if err.is_zero() {
            return w;
        }
        let corr = err.div(&w_pow).expect("derivative is a unit").scale(&n_inv);
        w = w.sub(&corr);
    }
}

// --- textual literal format -------------------------------------------------
//
// `2*t^3 + 1*t^4 + O(t^6)`, coefficients given as canonical residue-field
// element indices; the zero element prints as `O(t^k)`.

impl fmt::Display for TruncatedLaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            write!(f, "{}*t^{} + ", c.index(), self.val + i as i64)?;
        }
        write!(f, "O(t^{})", self.prec)
    }
}

impl fmt::Debug for TruncatedLaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parse the literal format; every term is `c*t^e` with c a canonical element
/// index, terminated by `O(t^k)`.
pub fn parse_series(field: &FieldSpec, s: &str) -> Result<TruncatedLaurentSeries, SeriesError> {
    let terms: Vec<&str> = s.split('+').map(|t| t.trim()).collect();
    let last = terms
        .last()
        .ok_or_else(|| SeriesError::Parse("empty literal".into()))?;
    let prec_str = last
        .strip_prefix("O(t^")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| SeriesError::Parse(format!("missing O(t^k) terminator in {s:?}")))?;
    let prec: i64 = prec_str
        .parse()
        .map_err(|_| SeriesError::Parse(format!("bad precision {prec_str:?}")))?;
    let mut pairs: Vec<(i64, u64)> = Vec::new();
    for term in &terms[..terms.len() - 1] {
        let (c_str, e_str) = term
            .split_once("*t^")
            .ok_or_else(|| SeriesError::Parse(format!("bad term {term:?}")))?;
        let c: u64 = c_str
            .trim()
            .parse()
            .map_err(|_| SeriesError::Parse(format!("bad coefficient {c_str:?}")))?;
        if c >= field.q() {
            return Err(SeriesError::Parse(format!(
                "coefficient index {c} out of range for F_{}",
                field.q()
            )));
        }
        let e: i64 = e_str
            .trim()
            .parse()
            .map_err(|_| SeriesError::Parse(format!("bad exponent {e_str:?}")))?;
        pairs.push((e, c));
    }
    if pairs.is_empty() {
        return Ok(TruncatedLaurentSeries::zero(field, prec));
    }
    pairs.sort_by_key(|(e, _)| *e);
    let lo = pairs[0].0;
    let hi = pairs.last().unwrap().0;
    if hi >= prec {
        return Err(SeriesError::Parse("term at or beyond precision".into()));
    }
    let mut coeffs = vec![field.zero(); (hi - lo + 1) as usize];
    for (e, c) in pairs {
        coeffs[(e - lo) as usize] = field.from_index(c);
    }
    Ok(TruncatedLaurentSeries::new(field, lo, coeffs, prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::ff_make_field;
    use rand::{Rng, SeedableRng};

    fn f(p: u64, m: u32) -> FieldSpec {
        ff_make_field(p, m).unwrap()
    }

    fn series(field: &FieldSpec, s: &str) -> TruncatedLaurentSeries {
        parse_series(field, s).unwrap()
    }

    #[test]
    fn division_examples() {
        let f5 = f(5, 1);
        // (t + t^2) / t = 1 + t
        let a = series(&f5, "1*t^1 + 1*t^2 + O(t^8)");
        let t = series(&f5, "1*t^1 + O(t^8)");
        let q = a.div(&t).unwrap();
        assert_eq!(q, series(&f5, "1*t^0 + 1*t^1 + O(t^7)"));

        // geometric series 1/(1-t) at precision 6
        let one = series(&f5, "1*t^0 + O(t^6)");
        let denom = series(&f5, "1*t^0 + 4*t^1 + O(t^6)");
        let g = one.div(&denom).unwrap();
        assert_eq!(
            g,
            series(
                &f5,
                "1*t^0 + 1*t^1 + 1*t^2 + 1*t^3 + 1*t^4 + 1*t^5 + O(t^6)"
            )
        );

        assert_eq!(
            one.div(&TruncatedLaurentSeries::zero(&f5, 6)),
            Err(SeriesError::DivisionByZeroToPrecision)
        );
    }

    #[test]
    fn mul_precision_bookkeeping() {
        let f5 = f(5, 1);
        // t^2 known mod t^3 times t^3 known mod t^4: product t^5 known mod t^6
        let a = series(&f5, "1*t^2 + O(t^3)");
        let b = series(&f5, "1*t^3 + O(t^4)");
        let p = a.mul(&b).unwrap();
        assert_eq!(p, series(&f5, "1*t^5 + O(t^6)"));
        // multiplying by a zero-to-precision element yields zero at the
        // propagated precision, never a fabricated coefficient
        let z = TruncatedLaurentSeries::zero(&f5, 3);
        let p = a.mul(&z).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.precision(), 5);
        // truncation below the valuation leaves the window empty
        let t5 = series(&f5, "1*t^5 + O(t^6)");
        assert!(t5.truncate(5).is_zero());
    }

    #[test]
    fn unit_decompose_examples() {
        let f5 = f(5, 1);
        let x = series(&f5, "2*t^3 + 1*t^4 + O(t^9)");
        let d = x.unit_decompose().unwrap();
        assert_eq!(d.v, 3);
        assert_eq!(d.teich.index(), 2);
        // 2^{-1} = 3 in F_5, so the one-unit is 1 + 3t
        assert_eq!(d.one_unit, series(&f5, "1*t^0 + 3*t^1 + O(t^6)"));
        // reassembling t^v . [teich] . one_unit reproduces the input
        let back = TruncatedLaurentSeries::monomial(&f5, d.v, x.precision())
            .scale(&d.teich)
            .mul(&d.one_unit)
            .unwrap();
        assert_eq!(back, x);

        let one = series(&f5, "1*t^0 + O(t^9)");
        let d = one.unit_decompose().unwrap();
        assert_eq!((d.v, d.teich.index()), (0, 1));
        assert!(d.one_unit.is_one_unit_head());

        assert_eq!(
            TruncatedLaurentSeries::zero(&f5, 4).unit_decompose().err(),
            Some(SeriesError::ZeroElement)
        );
    }

    impl TruncatedLaurentSeries {
        fn is_one_unit_head(&self) -> bool {
            self.valuation() == Some(0) && self.coeff(0).is_one()
        }
    }

    #[test]
    fn nth_root_examples() {
        let f3 = f(3, 1);
        let x = series(&f3, "1*t^0 + 1*t^1 + O(t^8)");
        let r = x.nth_root(2).unwrap();
        // 1 + 2t + t^2 + ... ; verified by squaring
        assert_eq!(r.coeff(0).index(), 1);
        assert_eq!(r.coeff(1).index(), 2);
        assert_eq!(r.coeff(2).index(), 1);
        assert_eq!(r.mul(&r).unwrap(), x);

        let t = series(&f3, "1*t^1 + O(t^8)");
        assert_eq!(
            t.nth_root(2),
            Err(SeriesError::NoRoot(NoRootReason::Valuation))
        );

        // 2 is a non-square in F_3 (squares are {0, 1})
        let two = series(&f3, "2*t^0 + O(t^8)");
        let squares: Vec<u64> = (0..3u64)
            .map(|i| f3.from_index(i).mul(&f3.from_index(i)).index())
            .collect();
        assert!(!squares.contains(&2));
        assert_eq!(
            two.nth_root(2),
            Err(SeriesError::NoRoot(NoRootReason::Residue))
        );

        let t5 = f(5, 1);
        let x = series(&t5, "1*t^2 + O(t^3)");
        assert_eq!(x.nth_root(5), Err(SeriesError::PDividesN));
    }

    #[test]
    fn nth_root_then_power_is_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (p, m, n) in [
            (3u64, 1u32, 2u64),
            (5, 1, 2),
            (5, 1, 4),
            (7, 1, 3),
            (3, 2, 2),
        ] {
            let fld = f(p, m);
            let prec = 10;
            for _ in 0..200 {
                // random one-unit
                let mut coeffs = vec![fld.one()];
                for _ in 1..prec {
                    coeffs.push(fld.from_index(rng.gen_range(0..fld.q())));
                }
                let u = TruncatedLaurentSeries::new(&fld, 0, coeffs, prec);
                let r = u.nth_root(n).unwrap();
                let mut pw = r.clone();
                for _ in 1..n {
                    pw = pw.mul(&r).unwrap();
                }
                assert_eq!(
                    pw,
                    u,
                    "root^n must reproduce the input (q={}, n={n})",
                    fld.q()
                );
            }
        }
    }

    #[test]
    fn power_class_examples() {
        let f3 = f(3, 1);
        let t = series(&f3, "1*t^1 + O(t^8)");
        assert_eq!(t.power_class(2).unwrap(), (1, 0));
        let twot = series(&f3, "2*t^1 + O(t^8)");
        assert_eq!(twot.power_class(2).unwrap(), (1, 1));
        let sq = series(&f3, "1*t^2 + 1*t^3 + O(t^8)");
        assert_eq!(sq.power_class(2).unwrap(), (0, 0));
        assert!(sq.nth_root(2).is_ok());
    }

    #[test]
    fn power_class_is_homomorphism() {
        let f5 = f(5, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [2u64, 4] {
            let d = crate::cyclotomic::gcd(n, 4);
            for _ in 0..200 {
                let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let v = rng.gen_range(-3i64..4);
                    let mut coeffs = vec![f5.from_index(rng.gen_range(1..5))];
                    for _ in 0..6 {
                        coeffs.push(f5.from_index(rng.gen_range(0..5)));
                    }
                    TruncatedLaurentSeries::new(&f5, v, coeffs, v + 7)
                };
                let a = mk(&mut rng);
                let b = mk(&mut rng);
                let (va, ua) = a.power_class(n).unwrap();
                let (vb, ub) = b.power_class(n).unwrap();
                let prod = a.mul(&b).unwrap();
                let (vp, up) = prod.power_class(n).unwrap();
                assert_eq!(vp, (va + vb) % n);
                assert_eq!(up, (ua + ub) % d);
            }
        }
    }

    #[test]
    fn valuation_rules_random() {
        let f7 = f(7, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..300 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let v = rng.gen_range(-2i64..5);
                let mut coeffs = vec![f7.from_index(rng.gen_range(1..7))];
                for _ in 0..5 {
                    coeffs.push(f7.from_index(rng.gen_range(0..7)));
                }
                TruncatedLaurentSeries::new(&f7, v, coeffs, v + 6)
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let va = a.valuation().unwrap();
            let vb = b.valuation().unwrap();
            assert_eq!(a.mul(&b).unwrap().valuation().unwrap(), va + vb);
            let s = a.add(&b);
            if let Some(vs) = s.valuation() {
                assert!(vs >= va.min(vb));
                if va != vb {
                    assert_eq!(vs, va.min(vb));
                }
            }
        }
    }

    #[test]
    fn precision_monotonicity() {
        let f5 = f(5, 1);
        let a_hi = series(&f5, "1*t^0 + 3*t^1 + 2*t^2 + O(t^10)");
        let b_hi = series(&f5, "1*t^0 + 4*t^1 + O(t^10)");
        let a_lo = a_hi.truncate(6);
        let b_lo = b_hi.truncate(6);
        for op in [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div] {
            let hi = ls_arith(&a_hi, &b_hi, op).unwrap();
            let lo = ls_arith(&a_lo, &b_lo, op).unwrap();
            assert_eq!(hi.truncate(lo.precision()), lo, "{op:?}");
        }
        let hi_root = a_hi.nth_root(2).unwrap();
        let lo_root = a_lo.nth_root(2).unwrap();
        assert_eq!(hi_root.truncate(lo_root.precision()), lo_root);
    }

    #[test]
    fn literal_round_trip() {
        let f5 = f(5, 1);
        for s in [
            "2*t^3 + 1*t^4 + O(t^6)",
            "O(t^4)",
            "3*t^-2 + 1*t^0 + O(t^5)",
        ] {
            let x = series(&f5, s);
            assert_eq!(format!("{x}"), s);
        }
        assert!(parse_series(&f5, "junk").is_err());
        assert!(parse_series(&f5, "7*t^0 + O(t^3)").is_err());
        assert!(parse_series(&f5, "1*t^5 + O(t^3)").is_err());
    }
}
