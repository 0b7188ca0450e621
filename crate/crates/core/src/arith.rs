//! Supernatural numbers, residues in `Z/SZ` at finite level, and the group
//! `G_S` of rationals whose denominators divide `S`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_integer::Integer;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(u32),
    Infinite,
}

impl Exponent {
    fn admits(self, k: u32) -> bool {
        match self {
            Exponent::Finite(e) => k <= e,
            Exponent::Infinite => true,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(e) => write!(f, "{e}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

/// A formal product `∏ p^{e_p}` over finitely many primes.
///
/// Exponent-zero entries are normalized away; primes are kept sorted so that
/// structural equality is meaningful. Cloning is cheap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Supernatural {
    factors: Arc<[(u64, Exponent)]>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization of `n >= 1` as `(prime, multiplicity)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut k = 0;
            while n % d == 0 {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

impl Supernatural {
    pub fn new(pairs: impl IntoIterator<Item = (u64, Exponent)>) -> Result<Self> {
        let mut v: Vec<(u64, Exponent)> = Vec::new();
        for (p, e) in pairs {
            if !is_prime(p) {
                return Err(Error::InvalidInput(format!("{p} is not prime")));
            }
            if v.iter().any(|(q, _)| *q == p) {
                return Err(Error::InvalidInput(format!("prime {p} listed twice")));
            }
            if e != Exponent::Finite(0) {
                v.push((p, e));
            }
        }
        v.sort_by_key(|(p, _)| *p);
        Ok(Self { factors: v.into() })
    }

    /// `p^∞`.
    pub fn prime_power_infinite(p: u64) -> Self {
        Self::new([(p, Exponent::Infinite)]).expect("prime")
    }

    /// The finite supernatural number equal to `n`.
    pub fn from_natural(n: u64) -> Self {
        assert!(n >= 1);
        Self::new(factorize(n).into_iter().map(|(p, k)| (p, Exponent::Finite(k)))).expect("primes")
    }

    pub fn factors(&self) -> &[(u64, Exponent)] {
        &self.factors
    }

    pub fn exponent(&self, p: u64) -> Exponent {
        self.factors
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, e)| *e)
            .unwrap_or(Exponent::Finite(0))
    }

    /// Whether `S` is an infinite supernatural number. Only an explicit
    /// infinite exponent can make stored data infinite.
    pub fn is_infinite(&self) -> bool {
        self.factors.iter().any(|(_, e)| *e == Exponent::Infinite)
    }

    pub fn divides(&self, l: u64) -> bool {
        sn_divides(l, self)
    }

    /// All divisors `d <= max` of `S`, ascending.
    pub fn divisors_up_to(&self, max: u64) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in self.factors.iter() {
            let mut next = Vec::new();
            for &d in &out {
                let mut q = d;
                let mut k = 0u32;
                loop {
                    next.push(q);
                    if !e.admits(k + 1) {
                        break;
                    }
                    match q.checked_mul(p) {
                        Some(nq) if nq <= max => q = nq,
                        _ => break,
                    }
                    k += 1;
                }
            }
            out = next;
        }
        out.retain(|&d| d <= max);
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl fmt::Display for Supernatural {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|(p, e)| format!("{p}:{e}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for Supernatural {
    type Err = Error;

    /// Parses `"2:inf,3:1"`. A bare prime means exponent 1.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Supernatural::new([]);
        }
        let mut pairs = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let (p, e) = match part.split_once(':') {
                Some((p, e)) => (p.trim(), Some(e.trim())),
                None => (part, None),
            };
            let p: u64 = p
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad prime '{p}'")))?;
            let e = match e {
                None => Exponent::Finite(1),
                Some("inf") | Some("∞") | Some("infinity") => Exponent::Infinite,
                Some(e) => Exponent::Finite(
                    e.parse()
                        .map_err(|_| Error::InvalidInput(format!("bad exponent '{e}'")))?,
                ),
            };
            pairs.push((p, e));
        }
        Supernatural::new(pairs)
    }
}

/// Whether the natural number `l` divides `S`.
pub fn sn_divides(l: u64, s: &Supernatural) -> bool {
    assert!(l >= 1, "sn_divides requires l >= 1");
    factorize(l).into_iter().all(|(p, k)| s.exponent(p).admits(k))
}

/// An element of `Z/lZ`, the level-`l` image of `Z/SZ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    level: u64,
    value: u64,
}

impl Residue {
    pub fn new(value: u64, level: u64) -> Result<Self> {
        if level == 0 || value >= level {
            return Err(Error::InvalidInput(format!("residue {value} at level {level}")));
        }
        Ok(Self { level, value })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn value(&self) -> u64 {
        self.value
    }
}

/// Image of the integer `k` in `Z/lZ` (Euclidean remainder).
pub fn embed_int(k: i64, l: u64) -> Residue {
    assert!(l >= 1, "embed_int requires l >= 1");
    let v = (k as i128).rem_euclid(l as i128) as u64;
    Residue { level: l, value: v }
}

/// `φ^m(x) = x + m` at the level of `x`.
pub fn odometer(x: Residue, m: i64) -> Residue {
    let v = (x.value as i128 + m as i128).rem_euclid(x.level as i128) as u64;
    Residue { level: x.level, value: v }
}

/// A reduced rational `numerator/denominator` with `denominator | S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GsRational {
    numerator: i64,
    denominator: u64,
}

impl GsRational {
    pub fn new(numerator: i64, denominator: i64, s: &Supernatural) -> Result<Self> {
        let q = reduce(numerator, denominator)?;
        if !sn_divides(q.denominator, s) {
            return Err(Error::NotMember(format!(
                "{}/{} is not in G_S for S = {s}",
                q.numerator, q.denominator
            )));
        }
        Ok(q)
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn is_member(&self, s: &Supernatural) -> bool {
        sn_divides(self.denominator, s)
    }
}

impl fmt::Display for GsRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

fn reduce(num: i64, den: i64) -> Result<GsRational> {
    if den == 0 {
        return Err(Error::InvalidInput("zero denominator".into()));
    }
    let g = num.gcd(&den);
    let (mut n, mut d) = (num / g, den / g);
    if d < 0 {
        n = n.checked_neg().ok_or(Error::Overflow)?;
        d = d.checked_neg().ok_or(Error::Overflow)?;
    }
    Ok(GsRational {
        numerator: n,
        denominator: d as u64,
    })
}

/// Membership of `num/den` (reduced first) in `G_S`.
pub fn gs_contains(num: i64, den: i64, s: &Supernatural) -> Result<bool> {
    let q = reduce(num, den)?;
    Ok(sn_divides(q.denominator, s))
}

pub fn gs_add(a: GsRational, b: GsRational, s: &Supernatural) -> Result<GsRational> {
    for q in [a, b] {
        if !q.is_member(s) {
            return Err(Error::NotMember(format!("{q} is not in G_S for S = {s}")));
        }
    }
    let da = a.denominator as i64;
    let db = b.denominator as i64;
    let l = da.lcm(&db);
    let num = a
        .numerator
        .checked_mul(l / da)
        .and_then(|x| b.numerator.checked_mul(l / db).and_then(|y| x.checked_add(y)))
        .ok_or(Error::Overflow)?;
    let q = reduce(num, l)?;
    debug_assert!(q.is_member(s));
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(txt: &str) -> Supernatural {
        txt.parse().unwrap()
    }

    #[test]
    fn divides_examples() {
        assert!(sn_divides(6, &s("2:inf,3:1")));
        assert!(!sn_divides(9, &s("2:inf,3:1")));
        assert!(sn_divides(1024, &s("2:inf")));
        assert!(sn_divides(1, &s("1")));
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed_int(7, 4).value(), 3);
        assert_eq!(embed_int(-1, 5).value(), 4);
        assert_eq!(embed_int(0, 9).value(), 0);
    }

    #[test]
    fn odometer_examples() {
        let x = Residue::new(2, 3).unwrap();
        assert_eq!(odometer(x, 1).value(), 0);
        assert_eq!(odometer(x, 0), x);
        assert_eq!(odometer(Residue::new(0, 6).unwrap(), -1).value(), 5);
    }

    #[test]
    fn gs_examples() {
        let s23 = s("2:inf,3:1");
        assert!(gs_contains(1, 2, &s23).unwrap());
        assert!(!gs_contains(1, 9, &s23).unwrap());
        assert!(gs_contains(4, 2, &s("5:1")).unwrap());

        let half = GsRational::new(1, 2, &s23).unwrap();
        let third = GsRational::new(1, 3, &s23).unwrap();
        let sum = gs_add(half, third, &s23).unwrap();
        assert_eq!((sum.numerator(), sum.denominator()), (5, 6));

        let s2 = s("2:inf");
        let h = GsRational::new(1, 2, &s2).unwrap();
        let mh = GsRational::new(-1, 2, &s2).unwrap();
        let z = gs_add(h, mh, &s2).unwrap();
        assert_eq!((z.numerator(), z.denominator()), (0, 1));
        let q = GsRational::new(1, 4, &s2).unwrap();
        let r = gs_add(q, q, &s2).unwrap();
        assert_eq!((r.numerator(), r.denominator()), (1, 2));
    }

    #[test]
    fn gs_rejects_non_members() {
        let s2 = s("2:inf");
        assert!(matches!(GsRational::new(1, 3, &s2), Err(Error::NotMember(_))));
    }

    #[test]
    fn parse_and_display() {
        let x = s("3:1, 2:inf");
        assert_eq!(x.to_string(), "2:inf,3:1");
        assert!(x.is_infinite());
        assert!(!s("2:3").is_infinite());
        assert!("4:1".parse::<Supernatural>().is_err());
        assert_eq!(s("2:0,3:1"), s("3:1"));
    }

    #[test]
    fn divisors() {
        assert_eq!(s("2:inf,3:1").divisors_up_to(12), vec![1, 2, 3, 4, 6, 8, 12]);
        assert_eq!(s("2:2").divisors_up_to(100), vec![1, 2, 4]);
    }
}
