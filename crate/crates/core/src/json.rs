//! JSON interchange formats.
//!
//! Exact rationals are written as integer JSON numbers of arbitrary size and
//! floats with 17 significant digits, so every value reads back bit-exactly.

use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Map, Number, Value};

use crate::arith::{Exponent, GsRational, Residue, Supernatural};
use crate::bd::BdElement;
use crate::bdt::BdtElement;
use crate::calculus::CertifiedElement;
use crate::compact::CompactMatrix;
use crate::derivations::DerivationSpec;
use crate::error::{Error, Result};
use crate::scalar::{GaussianRational, Scalar};
use crate::ulc::UlcFunction;

pub trait Json: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

fn bad(what: &str, v: &Value) -> Error {
    Error::InvalidInput(format!("expected {what}, got {v}"))
}

pub fn float_value(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float is a JSON number"))
    } else {
        Value::String(format!("{x}"))
    }
}

pub fn read_float(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.to_string().parse().map_err(|_| bad("float", v)),
        Value::String(s) => s.parse().map_err(|_| bad("float", v)),
        _ => Err(bad("float", v)),
    }
}

fn int_value(n: &BigInt) -> Value {
    Value::Number(Number::from_str(&n.to_string()).expect("integer is a JSON number"))
}

fn read_int(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => BigInt::from_str(&n.to_string()).map_err(|_| bad("integer", v)),
        _ => Err(bad("integer", v)),
    }
}

fn read_i64(v: &Value) -> Result<i64> {
    i64::try_from(read_int(v)?).map_err(|_| bad("64-bit integer", v))
}

fn read_u64(v: &Value) -> Result<u64> {
    u64::try_from(read_int(v)?).map_err(|_| bad("nonnegative integer", v))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(what, v))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::InvalidInput(format!("missing field \"{key}\"")))
}

fn ratio(n: &Value, d: &Value) -> Result<BigRational> {
    let d = read_int(d)?;
    if d.is_zero() {
        return Err(Error::InvalidInput("zero denominator".into()));
    }
    Ok(BigRational::new(read_int(n)?, d))
}

/// Exact: `[re_num, re_den, im_num, im_den]`; float: `[re, im]`.
impl Json for Scalar {
    fn to_json(&self) -> Value {
        match self {
            Scalar::Exact(q) => Value::Array(vec![
                int_value(q.re.numer()),
                int_value(q.re.denom()),
                int_value(q.im.numer()),
                int_value(q.im.denom()),
            ]),
            Scalar::Float(z) => Value::Array(vec![float_value(z.re), float_value(z.im)]),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        let a = array(v, "scalar")?;
        match a.len() {
            4 => Ok(Scalar::Exact(GaussianRational::new(ratio(&a[0], &a[1])?, ratio(&a[2], &a[3])?))),
            2 => Ok(Scalar::float(Complex64::new(read_float(&a[0])?, read_float(&a[1])?))),
            _ => Err(bad("scalar of 2 or 4 numbers", v)),
        }
    }
}

/// `[[p, e | "inf"], …]`; the textual form `"2:inf,3:1"` is also accepted.
impl Json for Supernatural {
    fn to_json(&self) -> Value {
        Value::Array(
            self.factors()
                .iter()
                .map(|&(p, e)| match e {
                    Exponent::Finite(k) => json!([p, k]),
                    Exponent::Infinite => json!([p, "inf"]),
                })
                .collect(),
        )
    }

    fn from_json(v: &Value) -> Result<Self> {
        if let Value::String(s) = v {
            return s.parse();
        }
        let pairs = array(v, "supernatural")?
            .iter()
            .map(|pair| {
                let pe = array(pair, "[prime, exponent]")?;
                if pe.len() != 2 {
                    return Err(bad("[prime, exponent]", pair));
                }
                let e = match &pe[1] {
                    Value::String(s) if s == "inf" => Exponent::Infinite,
                    other => Exponent::Finite(
                        u32::try_from(read_u64(other)?).map_err(|_| bad("exponent", other))?,
                    ),
                };
                Ok((read_u64(&pe[0])?, e))
            })
            .collect::<Result<Vec<_>>>()?;
        Supernatural::new(pairs)
    }
}

/// `[value, level]`.
impl Json for Residue {
    fn to_json(&self) -> Value {
        json!([self.value(), self.level()])
    }

    fn from_json(v: &Value) -> Result<Self> {
        match array(v, "residue")?.as_slice() {
            [value, level] => Residue::new(read_u64(value)?, read_u64(level)?),
            _ => Err(bad("[value, level]", v)),
        }
    }
}

/// `[numerator, denominator]`; membership is checked against `S` by callers.
pub fn gs_to_json(q: &GsRational) -> Value {
    json!([q.numerator(), q.denominator()])
}

pub fn gs_from_json(v: &Value, s: &Supernatural) -> Result<GsRational> {
    match array(v, "rational")?.as_slice() {
        [n, d] => GsRational::new(read_i64(n)?, read_i64(d)?, s),
        _ => Err(bad("[numerator, denominator]", v)),
    }
}

/// `{"period", "values"}`, with `"float": true` when values are floats.
impl Json for UlcFunction {
    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("period".into(), json!(self.period()));
        let exact = self.is_exact();
        let vals = self
            .values()
            .iter()
            .map(|v| if exact { v.to_json() } else { v.to_float().to_json() })
            .collect();
        m.insert("values".into(), Value::Array(vals));
        if !exact {
            m.insert("float".into(), Value::Bool(true));
        }
        Value::Object(m)
    }

    fn from_json(v: &Value) -> Result<Self> {
        let period = read_u64(field(v, "period")?)?;
        let values = array(field(v, "values")?, "values")?
            .iter()
            .map(Scalar::from_json)
            .collect::<Result<Vec<_>>>()?;
        if period == 0 || values.len() as u64 != period {
            return Err(Error::InvalidInput(format!(
                "period {period} does not match {} values",
                values.len()
            )));
        }
        Ok(UlcFunction::new(values))
    }
}

/// `{"S", "bands": [[n, UlcFunction], …]}`.
impl Json for BdElement {
    fn to_json(&self) -> Value {
        let bands = self.bands().iter().map(|(&n, f)| json!([n, f.to_json()])).collect();
        json!({ "S": self.s().to_json(), "bands": Value::Array(bands) })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let s = Supernatural::from_json(field(v, "S")?)?;
        let bands = array(field(v, "bands")?, "bands")?
            .iter()
            .map(|entry| match array(entry, "[n, function]")?.as_slice() {
                [n, f] => Ok((read_i64(n)?, UlcFunction::from_json(f)?)),
                _ => Err(bad("[n, function]", entry)),
            })
            .collect::<Result<Vec<_>>>()?;
        BdElement::new(s, bands)
    }
}

/// `{"entries": [[k, s, scalar], …]}`.
impl Json for CompactMatrix {
    fn to_json(&self) -> Value {
        let entries = self
            .entries()
            .iter()
            .map(|(&(k, s), v)| json!([k, s, v.to_json()]))
            .collect();
        json!({ "entries": Value::Array(entries) })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let entries = array(field(v, "entries")?, "entries")?
            .iter()
            .map(|e| match array(e, "[k, s, scalar]")?.as_slice() {
                [k, s, z] => Ok(((read_u64(k)? as usize, read_u64(s)? as usize), Scalar::from_json(z)?)),
                _ => Err(bad("[k, s, scalar]", e)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompactMatrix::from_entries(entries))
    }
}

/// `{"symbol", "compact"}`.
impl Json for BdtElement {
    fn to_json(&self) -> Value {
        json!({ "symbol": self.symbol().to_json(), "compact": self.compact().to_json() })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let b = BdElement::from_json(field(v, "symbol")?)?;
        let c = match v.get("compact") {
            Some(c) => CompactMatrix::from_json(c)?,
            None => CompactMatrix::zero(),
        };
        Ok(BdtElement::new(b, c))
    }
}

/// `{"gamma", "b", "c"}`.
impl Json for DerivationSpec {
    fn to_json(&self) -> Value {
        json!({ "gamma": self.gamma.to_json(), "b": self.b.to_json(), "c": self.c.to_json() })
    }

    fn from_json(v: &Value) -> Result<Self> {
        let b = BdElement::from_json(field(v, "b")?)?;
        let gamma = match v.get("gamma") {
            Some(g) => Scalar::from_json(g)?,
            None => Scalar::zero(),
        };
        let c = match v.get("c") {
            Some(c) => CompactMatrix::from_json(c)?,
            None => CompactMatrix::zero(),
        };
        Ok(DerivationSpec::new(gamma, b, c))
    }
}

/// The value's object with `"residual_bound"` and `"method"` added.
impl<T: Json> Json for CertifiedElement<T> {
    fn to_json(&self) -> Value {
        let mut v = self.value.to_json();
        if let Value::Object(m) = &mut v {
            m.insert("residual_bound".into(), float_value(self.residual_bound));
            m.insert("method".into(), Value::String(self.method.clone()));
        }
        v
    }

    fn from_json(v: &Value) -> Result<Self> {
        let value = T::from_json(v)?;
        let bound = read_float(field(v, "residual_bound")?)?;
        let method = field(v, "method")?
            .as_str()
            .ok_or_else(|| bad("method string", v))?
            .to_string();
        Ok(CertifiedElement::new(value, bound, &method))
    }
}

/// Parses a rational written `p/q` or `p`.
pub fn parse_rational(text: &str) -> Result<(i64, i64)> {
    let err = || Error::InvalidInput(format!("not a rational: {text:?}"));
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    Ok((n.parse().map_err(|_| err())?, d.parse().map_err(|_| err())?))
}

/// Scalar from a JSON value: a number, a scalar array, or a rational string.
pub fn scalar_from_loose(v: &Value) -> Result<Scalar> {
    match v {
        Value::Number(_) => {
            let text = v.to_string();
            match BigInt::from_str(&text) {
                Ok(n) => Ok(Scalar::real(BigRational::from_integer(n))),
                Err(_) => Ok(Scalar::from_f64(read_float(v)?)),
            }
        }
        Value::String(s) => {
            let (n, d) = parse_rational(s)?;
            if d == 0 {
                return Err(Error::InvalidInput("zero denominator".into()));
            }
            Ok(Scalar::ratio(n, d))
        }
        _ => Scalar::from_json(v),
    }
}

/// Serializes with the canonical formatting used for reports and files.
pub fn to_string(v: &Value) -> String {
    serde_json::to_string(v).expect("values are always serializable")
}

pub fn to_string_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values are always serializable")
}

pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, CorpusConfig};

    fn round_trip<T: Json + PartialEq + std::fmt::Debug>(x: &T) {
        let text = to_string(&x.to_json());
        let back = T::from_json(&parse(&text).unwrap()).unwrap();
        assert_eq!(&back, x, "{text}");
    }

    #[test]
    fn formats() {
        let s: Supernatural = "2:inf,3:1".parse().unwrap();
        assert_eq!(to_string(&s.to_json()), r#"[[2,"inf"],[3,1]]"#);
        assert_eq!(to_string(&Residue::new(4, 5).unwrap().to_json()), "[4,5]");
        assert_eq!(to_string(&Scalar::ratio(-3, 4).to_json()), "[-3,4,0,1]");
        let f = UlcFunction::new(vec![Scalar::from_f64(0.1), Scalar::one()]);
        assert_eq!(
            to_string(&f.to_json()),
            r#"{"float":true,"period":2,"values":[[1.0000000000000001e-1,0.0000000000000000e+0],[1.0000000000000000e+0,0.0000000000000000e+0]]}"#
        );
    }

    #[test]
    fn big_rationals_survive() {
        let big = BigInt::from(3).pow(80u32);
        let z = Scalar::real(BigRational::new(big.clone(), BigInt::from(7)));
        round_trip(&z);
    }

    #[test]
    fn floats_are_bit_exact() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let z = Scalar::float(Complex64::new(x, -x));
            let back = Scalar::from_json(&parse(&to_string(&z.to_json())).unwrap()).unwrap();
            assert_eq!(back.to_c64(), z.to_c64());
        }
    }

    #[test]
    fn corpus_round_trip() {
        let mut g = Corpus::new(CorpusConfig::default(), 11);
        for _ in 0..50 {
            round_trip(&g.bdt());
            round_trip(&g.bd().to_float());
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(UlcFunction::from_json(&json!({"period": 2, "values": [[1,1,0,1]]})).is_err());
        assert!(Scalar::from_json(&json!([1, 0, 0, 1])).is_err());
        assert!(Supernatural::from_json(&json!([[4, 1]])).is_err());
        assert!(Residue::from_json(&json!([5, 5])).is_err());
    }
}
