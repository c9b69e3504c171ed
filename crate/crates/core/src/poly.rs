//! Multivariate polynomials with exact rational coefficients.
//!
//! A `PolyField` is the scalar component type of every tensor grid: a finite
//! map from exponent vectors (length `dim`) to nonzero rational coefficients.
//! The map is the canonical form - no zero coefficient is ever stored, so two
//! polynomials are equal exactly when their term maps are equal.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Exact multivariate polynomial over `dim` coordinates `x0, ..., x(dim-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyField {
    dim: usize,
    terms: BTreeMap<Vec<u16>, Rational>,
}

/// Binary polynomial operation selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

/// Dispatches `a (op) b`, failing when the operands disagree on dimension.
pub fn poly_arith(a: &PolyField, b: &PolyField, op: PolyOp) -> Result<PolyField> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(match op {
        PolyOp::Add => a.add(b),
        PolyOp::Sub => a.sub(b),
        PolyOp::Mul => a.mul(b),
    })
}

impl PolyField {
    pub fn zero(dim: usize) -> Self {
        PolyField {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        let mut p = PolyField::zero(dim);
        if !c.is_zero() {
            p.terms.insert(vec![0; dim], c);
        }
        p
    }

    pub fn from_int(dim: usize, n: i64) -> Self {
        PolyField::constant(dim, Rational::from_int(n))
    }

    pub fn one(dim: usize) -> Self {
        PolyField::from_int(dim, 1)
    }

    /// The coordinate monomial `x_axis`.
    pub fn var(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::AxisOutOfRange { axis, dim });
        }
        let mut exps = vec![0u16; dim];
        exps[axis] = 1;
        Ok(PolyField::monomial(dim, exps, Rational::one()))
    }

    pub fn monomial(dim: usize, exps: Vec<u16>, coef: Rational) -> Self {
        assert_eq!(exps.len(), dim, "exponent vector length must equal dim");
        let mut p = PolyField::zero(dim);
        if !coef.is_zero() {
            p.terms.insert(exps, coef);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the monomial with the given exponent vector.
    pub fn coefficient(&self, exps: &[u16]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
            .unwrap_or(0)
    }

    fn insert_add(&mut self, exps: Vec<u16>, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &coef;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, rhs: &PolyField) -> PolyField {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &PolyField) -> PolyField {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_add(e.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> PolyField {
        let mut out = PolyField::zero(self.dim);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c);
        }
        out
    }

    pub fn mul(&self, rhs: &PolyField) -> PolyField {
        self.mul_capped(rhs, None)
    }

    /// Product truncated to total degree `cap` (when given). Term pairs whose
    /// combined degree exceeds the cap are skipped entirely.
    pub fn mul_capped(&self, rhs: &PolyField, cap: Option<u32>) -> PolyField {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut out = PolyField::zero(self.dim);
        for (ea, ca) in &self.terms {
            let da: u32 = ea.iter().map(|&x| x as u32).sum();
            for (eb, cb) in &rhs.terms {
                if let Some(cap) = cap {
                    let db: u32 = eb.iter().map(|&x| x as u32).sum();
                    if da + db > cap {
                        continue;
                    }
                }
                let exps: Vec<u16> = ea.iter().zip(eb).map(|(&x, &y)| x + y).collect();
                out.insert_add(exps, ca * cb);
            }
        }
        out
    }

    /// Accumulates `a * b` (negated when asked) into `self`, truncating at
    /// `cap`. Avoids the intermediate allocation of `add(&a.mul(b))` in the
    /// contraction hot paths.
    pub fn accumulate_product(
        &mut self,
        a: &PolyField,
        b: &PolyField,
        cap: Option<u32>,
        negate: bool,
    ) {
        debug_assert!(self.dim == a.dim && a.dim == b.dim);
        for (ea, ca) in &a.terms {
            let da: u32 = ea.iter().map(|&x| x as u32).sum();
            for (eb, cb) in &b.terms {
                if let Some(cap) = cap {
                    let db: u32 = eb.iter().map(|&x| x as u32).sum();
                    if da + db > cap {
                        continue;
                    }
                }
                let exps: Vec<u16> = ea.iter().zip(eb).map(|(&x, &y)| x + y).collect();
                let c = ca * cb;
                self.insert_add(exps, if negate { -c } else { c });
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> PolyField {
        if c.is_zero() {
            return PolyField::zero(self.dim);
        }
        let mut out = PolyField::zero(self.dim);
        for (e, k) in &self.terms {
            out.terms.insert(e.clone(), k * c);
        }
        out
    }

    /// Exact formal partial derivative with respect to `x_axis`.
    pub fn partial(&self, axis: usize) -> Result<PolyField> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        let mut out = PolyField::zero(self.dim);
        for (e, c) in &self.terms {
            let k = e[axis];
            if k == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[axis] = k - 1;
            out.insert_add(exps, c * &Rational::from_int(k as i64));
        }
        Ok(out)
    }

    /// Drops every term of total degree above `cap`.
    pub fn truncate(&self, cap: u32) -> PolyField {
        let mut out = PolyField::zero(self.dim);
        for (e, c) in &self.terms {
            let d: u32 = e.iter().map(|&x| x as u32).sum();
            if d <= cap {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Constant term, i.e. the value at the origin.
    pub fn eval_origin(&self) -> Rational {
        self.terms
            .get(&vec![0u16; self.dim] as &Vec<u16>)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Evaluates at an arbitrary rational point.
    pub fn eval_at(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (axis, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = &term * &point[axis];
                }
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// JSON encoding: `{"terms":[{"exps":[...],"coef":"p/q"}]}` with `/q`
    /// omitted when the denominator is one.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(e, c)| {
                json!({
                    "exps": e.iter().map(|&x| x as u64).collect::<Vec<_>>(),
                    "coef": c.to_fraction_string(),
                })
            })
            .collect();
        json!({ "terms": terms })
    }

    /// Parses the JSON encoding, validating exponent-vector lengths against
    /// `dim` and collapsing duplicate monomials.
    pub fn from_json(v: &Value, dim: usize) -> Result<PolyField> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("polynomial: expected object".into()))?;
        let terms = obj
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("polynomial: missing \"terms\" array".into()))?;
        let mut out = PolyField::zero(dim);
        for (i, t) in terms.iter().enumerate() {
            let term = t
                .as_object()
                .ok_or_else(|| Error::Parse(format!("terms[{i}]: expected object")))?;
            let exps_v = term
                .get("exps")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("terms[{i}]: missing \"exps\"")))?;
            if exps_v.len() != dim {
                return Err(Error::Parse(format!(
                    "terms[{i}].exps: expected length {dim}, found {}",
                    exps_v.len()
                )));
            }
            let mut exps = Vec::with_capacity(dim);
            for (j, e) in exps_v.iter().enumerate() {
                let n = e.as_u64().ok_or_else(|| {
                    Error::Parse(format!(
                        "terms[{i}].exps[{j}]: expected non-negative integer"
                    ))
                })?;
                if n > u16::MAX as u64 {
                    return Err(Error::Parse(format!(
                        "terms[{i}].exps[{j}]: exponent too large"
                    )));
                }
                exps.push(n as u16);
            }
            let coef_s = term
                .get("coef")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse(format!("terms[{i}]: missing \"coef\" string")))?;
            let coef = Rational::parse(coef_s)
                .map_err(|e| Error::Parse(format!("terms[{i}].coef: {e}")))?;
            out.insert_add(exps, coef);
        }
        Ok(out)
    }
}

impl fmt::Display for PolyField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let negative = c < &Rational::zero();
            if first {
                if negative {
                    f.write_str("-")?;
                }
                first = false;
            } else if negative {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mag = if negative { c.abs() } else { c.clone() };
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(axis, &k)| {
                    if k == 1 {
                        format!("x{axis}")
                    } else {
                        format!("x{axis}^{k}")
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&mono.join("*"))?;
            } else {
                write!(f, "{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(dim: usize, axis: usize) -> PolyField {
        PolyField::var(dim, axis).unwrap()
    }

    #[test]
    fn additive_cancellation() {
        // (x0 + 1) + (-1) == x0
        let p = x(2, 0).add(&PolyField::one(2));
        let q = p.add(&PolyField::from_int(2, -1));
        assert_eq!(q, x(2, 0));
    }

    #[test]
    fn monomial_product() {
        assert_eq!(
            x(2, 0).mul(&x(2, 1)),
            PolyField::monomial(2, vec![1, 1], Rational::one())
        );
    }

    #[test]
    fn rational_scaling() {
        // (2 x0 + 3) * 1/2 == x0 + 3/2
        let p = x(2, 0)
            .scale(&Rational::from_int(2))
            .add(&PolyField::from_int(2, 3));
        let q = p.mul(&PolyField::constant(2, Rational::new(1, 2).unwrap()));
        let want = x(2, 0).add(&PolyField::constant(2, Rational::new(3, 2).unwrap()));
        assert_eq!(q, want);
    }

    #[test]
    fn partial_power_rule() {
        // d/dx0 (x0^2) == 2 x0
        let p = x(2, 0).mul(&x(2, 0));
        assert_eq!(p.partial(0).unwrap(), x(2, 0).scale(&Rational::from_int(2)));
    }

    #[test]
    fn partial_independent_variable() {
        assert!(x(2, 0).partial(1).unwrap().is_zero());
    }

    #[test]
    fn partial_linearity() {
        // d/dx0 (3 x0 x1 + x1) == 3 x1
        let p = x(2, 0)
            .mul(&x(2, 1))
            .scale(&Rational::from_int(3))
            .add(&x(2, 1));
        assert_eq!(p.partial(0).unwrap(), x(2, 1).scale(&Rational::from_int(3)));
    }

    #[test]
    fn partial_axis_out_of_range() {
        assert_eq!(
            x(2, 0).partial(2).unwrap_err(),
            Error::AxisOutOfRange { axis: 2, dim: 2 }
        );
    }

    #[test]
    fn dim_mismatch_is_an_error() {
        let a = PolyField::one(2);
        let b = PolyField::one(3);
        assert!(poly_arith(&a, &b, PolyOp::Add).is_err());
    }

    #[test]
    fn eval_origin_picks_constant_term() {
        let p = x(2, 0).add(&PolyField::from_int(2, 5));
        assert_eq!(p.eval_origin(), Rational::from_int(5));
    }

    #[test]
    fn capped_mul_truncates() {
        let p = x(2, 0).add(&PolyField::one(2)); // x0 + 1
        let q = p.mul_capped(&p, Some(1)); // drop the x0^2 term
        let want = x(2, 0)
            .scale(&Rational::from_int(2))
            .add(&PolyField::one(2));
        assert_eq!(q, want);
    }

    #[test]
    fn json_round_trip() {
        let p = x(3, 0)
            .mul(&x(3, 2))
            .scale(&Rational::new(-7, 3).unwrap())
            .add(&PolyField::from_int(3, 2));
        let v = p.to_json();
        assert_eq!(PolyField::from_json(&v, 3).unwrap(), p);
    }

    #[test]
    fn json_rejects_wrong_exponent_length() {
        let v: Value = serde_json::from_str(r#"{"terms":[{"exps":[1,0],"coef":"1"}]}"#).unwrap();
        assert!(PolyField::from_json(&v, 3).is_err());
    }
}
