//! Seeded random elements for property suites.
//!
//! Every case draws from its own ChaCha stream keyed by `(seed, case id)`, so
//! a single failing case can be regenerated without replaying the others.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::Supernatural;
use crate::bd::BdElement;
use crate::bdt::BdtElement;
use crate::compact::CompactMatrix;
use crate::scalar::Scalar;
use crate::ulc::UlcFunction;

#[derive(Clone, Debug)]
pub struct CorpusConfig {
    pub s: Supernatural,
    /// Periods are drawn from the divisors of `S` up to this bound.
    pub l_max: u64,
    pub max_band: i64,
    pub max_bands: usize,
    /// Bound on numerators and denominators of rational coefficients.
    pub max_num: i64,
    pub compact_extent: usize,
    pub max_entries: usize,
}

impl CorpusConfig {
    pub fn new(s: Supernatural) -> Self {
        Self {
            s,
            l_max: 6,
            max_band: 4,
            max_bands: 3,
            max_num: 16,
            compact_extent: 8,
            max_entries: 6,
        }
    }
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self::new("2:inf,3:1".parse().expect("static supernatural"))
    }
}

pub struct Corpus {
    cfg: CorpusConfig,
    periods: Vec<u64>,
    rng: ChaCha8Rng,
}

impl Corpus {
    pub fn new(cfg: CorpusConfig, seed: u64) -> Self {
        Self::for_case(cfg, seed, 0)
    }

    /// Generator for case `id` of a run with seed `seed`.
    pub fn for_case(cfg: CorpusConfig, seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        let periods = cfg.s.divisors_up_to(cfg.l_max);
        Self { cfg, periods, rng }
    }

    pub fn config(&self) -> &CorpusConfig {
        &self.cfg
    }

    pub fn s(&self) -> &Supernatural {
        &self.cfg.s
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn rational_part(&mut self, max: i64) -> BigRational {
        let n = self.rng.gen_range(-max..=max);
        let d = self.rng.gen_range(1..=max);
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Gaussian rational with bounded numerators and denominators; real with
    /// probability 2/3.
    pub fn scalar(&mut self) -> Scalar {
        self.scalar_bounded(self.cfg.max_num)
    }

    pub fn scalar_bounded(&mut self, max: i64) -> Scalar {
        let re = self.rational_part(max);
        let im = if self.rng.gen_ratio(1, 3) {
            self.rational_part(max)
        } else {
            BigRational::from_integer(0.into())
        };
        Scalar::from_rational(re, im)
    }

    pub fn real_scalar(&mut self, max: i64) -> Scalar {
        Scalar::real(self.rational_part(max))
    }

    pub fn period(&mut self) -> u64 {
        *self.periods.choose(&mut self.rng).expect("1 always divides S")
    }

    pub fn ulc(&mut self) -> UlcFunction {
        let l = self.period();
        UlcFunction::new((0..l).map(|_| self.scalar()).collect())
    }

    /// ULC function bounded away from zero: `|f| ≥ 1`.
    pub fn invertible_ulc(&mut self) -> UlcFunction {
        let l = self.period();
        let vals = (0..l)
            .map(|_| {
                let mag = self.rng.gen_range(1..=4);
                let sign = if self.rng.gen_bool(0.5) { 1 } else { -1 };
                if self.rng.gen_ratio(1, 4) {
                    Scalar::from_rational(BigRational::from_integer(0.into()), BigRational::from_integer((sign * mag).into()))
                } else {
                    Scalar::from_int(sign * mag)
                }
            })
            .collect();
        UlcFunction::new(vals)
    }

    fn band_set(&mut self, max_band: i64, count: usize) -> Vec<i64> {
        let mut all: Vec<i64> = (-max_band..=max_band).collect();
        all.shuffle(&mut self.rng);
        all.truncate(count);
        all.sort_unstable();
        all
    }

    pub fn bd(&mut self) -> BdElement {
        self.bd_with(self.cfg.max_band)
    }

    /// Random element with bands in `[-max_band, max_band]`.
    pub fn bd_with(&mut self, max_band: i64) -> BdElement {
        let count = self.rng.gen_range(1..=self.cfg.max_bands);
        let bands: Vec<(i64, UlcFunction)> = self
            .band_set(max_band, count)
            .into_iter()
            .map(|n| (n, self.ulc()))
            .collect();
        BdElement::new(self.cfg.s.clone(), bands).expect("periods divide S")
    }

    pub fn compact(&mut self) -> CompactMatrix {
        let count = self.rng.gen_range(1..=self.cfg.max_entries);
        let e = self.cfg.compact_extent;
        let entries: Vec<((usize, usize), Scalar)> = (0..count)
            .map(|_| ((self.rng.gen_range(0..e), self.rng.gen_range(0..e)), self.scalar()))
            .collect();
        CompactMatrix::from_entries(entries)
    }

    pub fn bdt(&mut self) -> BdtElement {
        let b = self.bd();
        let c = if self.rng.gen_ratio(3, 4) { self.compact() } else { CompactMatrix::zero() };
        BdtElement::new(b, c)
    }

    /// `(x + x^*)/2` for `x` with small coefficients and bands in `[-2, 2]`.
    pub fn self_adjoint_bd(&mut self) -> BdElement {
        let count = self.rng.gen_range(1..=self.cfg.max_bands);
        let bands: Vec<(i64, UlcFunction)> = self
            .band_set(2, count)
            .into_iter()
            .map(|n| {
                let l = self.period();
                (n, UlcFunction::new((0..l).map(|_| self.scalar_bounded(3)).collect()))
            })
            .collect();
        let x = BdElement::new(self.cfg.s.clone(), bands).expect("periods divide S");
        x.add(&x.adjoint()).scale(&Scalar::ratio(1, 2))
    }

    pub fn self_adjoint_compact(&mut self) -> CompactMatrix {
        let count = self.rng.gen_range(1..=4);
        let entries: Vec<((usize, usize), Scalar)> = (0..count)
            .map(|_| ((self.rng.gen_range(0..6), self.rng.gen_range(0..6)), self.scalar_bounded(3)))
            .collect();
        let c = CompactMatrix::from_entries(entries);
        c.add(&c.adjoint()).scale(&Scalar::ratio(1, 2))
    }

    /// `m_g + x` with `|g| ≥ 1` and `‖x‖ ≤ Σ‖x_n‖_∞ ≤ 1/2`, so the symbol is
    /// invertible with margin at least `1/2`.
    pub fn invertible_bd(&mut self) -> BdElement {
        let g = self.invertible_ulc();
        let count = self.rng.gen_range(1..=self.cfg.max_bands);
        let bands: Vec<i64> = self.band_set(3, count).into_iter().filter(|&n| n != 0).collect();
        let mut x = BdElement::zero(self.cfg.s.clone());
        for n in &bands {
            let f = self.ulc();
            x = x.add(&BdElement::monomial(self.cfg.s.clone(), *n, f).expect("periods divide S"));
        }
        let l1 = x.l1_norm();
        if l1 > 0.0 {
            // Exact rescale to Σ sup ≤ 1/2 using a rational upper bound on l1.
            let den = 2 * (l1.ceil() as i64 + 1);
            x = x.scale(&Scalar::ratio(1, den));
        }
        BdElement::multiplier(self.cfg.s.clone(), g).expect("periods divide S").add(&x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_reproducible() {
        let a = Corpus::for_case(CorpusConfig::default(), 7, 3).bdt();
        let b = Corpus::for_case(CorpusConfig::default(), 7, 3).bdt();
        let c = Corpus::for_case(CorpusConfig::default(), 7, 4).bdt();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn elements_respect_bounds() {
        let mut g = Corpus::new(CorpusConfig::default(), 1);
        for _ in 0..50 {
            let b = g.bd();
            assert!(b.bandwidth() <= 4);
            assert!(b.bands().values().all(|f| f.period() <= 6));
            assert!(g.compact().extent() <= 8);
            assert!(g.self_adjoint_bd().is_self_adjoint());
            assert!(g.self_adjoint_compact().is_self_adjoint());
            assert!(crate::calculus::symbol_margin(&g.invertible_bd()).is_some());
        }
    }
}
