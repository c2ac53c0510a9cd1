use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::atom::Atom;
use super::monomial::{Monomial, Quarters};

pub type Q = BigRational;

/// Sums larger than this abort with a diagnostic instead of grinding on.
pub const MAX_TERMS: usize = 20_000;

/// Finite sum of rational multiples of monomials (a Laurent polynomial in
/// quarter powers of the atoms).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

fn guard(n: usize) {
    if n > MAX_TERMS {
        panic!("expression size guard: canonical sum grew to {n} terms (limit {MAX_TERMS})");
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn term(c: Q, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn atom(a: Atom) -> Self {
        Poly::term(Q::one(), Monomial::atom(a))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn single_term(&self) -> Option<(&Monomial, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.is_zero() {
            return Some(Q::zero());
        }
        match self.single_term() {
            Some((m, c)) if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn atoms(&self) -> std::collections::BTreeSet<Atom> {
        self.terms.keys().flat_map(|m| m.atoms()).collect()
    }

    pub fn contains_atom(&self, a: Atom) -> bool {
        self.terms.keys().any(|m| m.contains(a))
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Poly, scale: &Q, shift: &Monomial) {
        if scale.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.mul(shift), c * scale);
        }
        guard(self.terms.len());
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        guard(out.len());
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        guard(out.len());
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
            guard(out.len());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        if m.is_one() {
            return self.clone();
        }
        Poly {
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    pub fn pow_u32(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Monomial gcd of all terms (per-atom minimum exponent, absent atoms at zero).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for m in it {
            g = g.gcd(m);
        }
        g
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    ///
    /// Both operands are shifted to non-negative exponents first so the lex
    /// division algorithm terminates.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some((m, c)) = divisor.single_term() {
            return Some(self.mul_monomial(&m.inverse()).scale(&c.recip()));
        }
        let dshift = divisor.monomial_content();
        let d = divisor.mul_monomial(&dshift.inverse());
        let nshift = self.monomial_content();
        let mut rem = self.mul_monomial(&nshift.inverse());
        let (lm, lc) = {
            let (m, c) = d.leading().expect("nonzero divisor");
            (m.clone(), c.clone())
        };
        let mut quot = Poly::zero();
        let mut steps = 0usize;
        while let Some((rm, rc)) = rem.leading() {
            if !rm.is_divisible_by(&lm) {
                return None;
            }
            let tm = rm.div(&lm);
            let tc = rc / &lc;
            rem.add_assign_scaled(&d, &-tc.clone(), &tm);
            quot.add_term(tm, tc);
            steps += 1;
            if steps > MAX_TERMS {
                return None;
            }
        }
        Some(quot.mul_monomial(&nshift.mul(&dshift.inverse())))
    }

    /// If every term mentions at most the single atom `v`, returns it.
    pub fn sole_atom(&self) -> Option<Atom> {
        let mut found: Option<Atom> = None;
        for m in self.terms.keys() {
            for a in m.atoms() {
                match found {
                    None => found = Some(a),
                    Some(b) if b == a => {}
                    Some(_) => return None,
                }
            }
        }
        found
    }

    /// Groups terms by their cofactor in atoms other than `v`:
    /// `self = Σ cofactor · (univariate part in v)`.
    pub fn split_by(&self, v: Atom) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            out.entry(m.without(v))
                .or_default()
                .add_term(Monomial::power(v, e), c.clone());
        }
        out
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Monomial, &Q) -> Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let t = f(m, c);
            for (k, v) in t.terms {
                out.add_term(k, v);
            }
            guard(out.len());
        }
        out
    }

    /// Integer content over the rational coefficients: gcd of numerators over lcm of denominators.
    pub fn rational_content(&self) -> Q {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Q::one();
        }
        Q::new(num.abs(), den)
    }
}

/// Univariate polynomials over Q in one atom, used for gcd cancellation.
pub(crate) mod univariate {
    use super::*;

    /// Dense coefficients indexed by quarter-exponent offset from the lowest power.
    #[derive(Clone, Debug)]
    pub struct Dense {
        pub coeffs: Vec<Q>,
    }

    pub fn to_dense(p: &Poly, v: Atom) -> Dense {
        let low = p.terms().map(|(m, _)| m.exponent(v)).min().unwrap_or(0);
        let high = p.terms().map(|(m, _)| m.exponent(v)).max().unwrap_or(0);
        let mut coeffs = vec![Q::zero(); (high - low + 1) as usize];
        for (m, c) in p.terms() {
            coeffs[(m.exponent(v) - low) as usize] = c.clone();
        }
        Dense { coeffs }
    }

    pub fn from_coeffs(coeffs: &[Q], v: Atom) -> Poly {
        let mut p = Poly::zero();
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::power(v, i as Quarters), c.clone());
        }
        p
    }

    fn trim(c: &mut Vec<Q>) {
        while c.len() > 1 && c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
    }

    const PRIME: u64 = (1 << 61) - 1;

    fn mul_mod(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % PRIME as u128) as u64
    }

    fn inv_mod(a: u64) -> u64 {
        let (mut base, mut e, mut acc) = (a, PRIME - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(acc, base);
            }
            base = mul_mod(base, base);
            e >>= 1;
        }
        acc
    }

    fn reduce(c: &[Q]) -> Option<Vec<u64>> {
        let p = BigInt::from(PRIME);
        let to = |n: &BigInt| n.mod_floor(&p).to_u64().expect("below the prime");
        c.iter()
            .map(|q| {
                let d = to(q.denom());
                (d != 0).then(|| mul_mod(to(q.numer()), inv_mod(d)))
            })
            .collect()
    }

    /// Degree of the gcd modulo a large prime, when the reduction keeps both degrees.
    fn gcd_degree_mod_p(a: &[Q], b: &[Q]) -> Option<usize> {
        let (mut x, mut y) = (reduce(a)?, reduce(b)?);
        if *x.last()? == 0 || *y.last()? == 0 {
            return None;
        }
        while y.iter().any(|&c| c != 0) {
            while y.last() == Some(&0) {
                y.pop();
            }
            let inv = inv_mod(*y.last().expect("nonzero"));
            while x.len() >= y.len() {
                let f = mul_mod(*x.last().expect("nonempty"), inv);
                let shift = x.len() - y.len();
                for (i, &c) in y.iter().enumerate() {
                    x[shift + i] = (x[shift + i] + PRIME - mul_mod(f, c)) % PRIME;
                }
                x.pop();
            }
            while x.last() == Some(&0) {
                x.pop();
            }
            std::mem::swap(&mut x, &mut y);
        }
        Some(x.len().saturating_sub(1))
    }

    /// Integer coefficients with content removed and a positive leading term.
    fn primitive(c: &[Q]) -> Vec<BigInt> {
        let l = c.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let ints: Vec<BigInt> = c.iter().map(|q| (q * &l).to_integer()).collect();
        primitive_part(ints)
    }

    fn primitive_part(mut v: Vec<BigInt>) -> Vec<BigInt> {
        while v.len() > 1 && v.last().is_some_and(|x| x.is_zero()) {
            v.pop();
        }
        let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() {
            return vec![BigInt::zero()];
        }
        let sign = if v.last().is_some_and(|x| x.is_negative()) { -BigInt::one() } else { BigInt::one() };
        let g = g * sign;
        v.iter().map(|x| x / &g).collect()
    }

    fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let mut r = a.to_vec();
        let db = b.len() - 1;
        let lb = &b[db];
        while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
            let lr = r.last().expect("nonempty").clone();
            let shift = r.len() - 1 - db;
            for x in r.iter_mut() {
                *x *= lb;
            }
            for (i, bc) in b.iter().enumerate() {
                r[shift + i] -= &lr * bc;
            }
            r.pop();
            while r.len() > 1 && r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        r
    }

    /// Monic gcd of two coefficient vectors (index = power of the step variable).
    pub fn gcd(a: &[Q], b: &[Q]) -> Vec<Q> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        let nonzero = |v: &[Q]| !(v.len() == 1 && v[0].is_zero());
        if !nonzero(&y) {
            return monic_of(&x);
        }
        if !nonzero(&x) {
            return monic_of(&y);
        }
        // Work in the coarsest power step both inputs share.
        let stride = x
            .iter()
            .chain(y.iter())
            .zip((0..x.len()).chain(0..y.len()))
            .filter(|(c, _)| !c.is_zero())
            .fold(0usize, |g, (_, i)| g.gcd(&i));
        if stride > 1 {
            let squeeze = |v: &[Q]| v.iter().step_by(stride).cloned().collect::<Vec<_>>();
            let g = gcd(&squeeze(&x), &squeeze(&y));
            let mut out = vec![Q::zero(); (g.len() - 1) * stride + 1];
            for (i, c) in g.into_iter().enumerate() {
                out[i * stride] = c;
            }
            return out;
        }
        // A coprime image modulo a prime that keeps both degrees proves coprimality.
        if gcd_degree_mod_p(&x, &y) == Some(0) {
            return vec![Q::one()];
        }
        let (mut x, mut y) = (primitive(&x), primitive(&y));
        if x.len() < y.len() {
            std::mem::swap(&mut x, &mut y);
        }
        while !(y.len() == 1 && y[0].is_zero()) {
            let r = primitive_part(pseudo_rem(&x, &y));
            x = y;
            y = r;
        }
        let lc = Q::from_integer(x.last().cloned().unwrap_or_else(BigInt::one));
        x.into_iter().map(|c| Q::from_integer(c) / &lc).collect()
    }

    fn monic_of(v: &[Q]) -> Vec<Q> {
        match v.last() {
            Some(lc) if !lc.is_zero() => v.iter().map(|c| c / lc).collect(),
            _ => vec![Q::one()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn x() -> Poly {
        Poly::atom(Atom::X)
    }

    #[test]
    fn exact_division_of_difference_of_squares() {
        let x2m1 = x().mul(&x()).sub(&Poly::one());
        let xm1 = x().sub(&Poly::one());
        let quo = x2m1.exact_div(&xm1).unwrap();
        assert_eq!(quo, x().add(&Poly::one()));
        assert!(x2m1.exact_div(&x().add(&Poly::constant(q(3)))).is_none());
    }

    #[test]
    fn exact_division_with_negative_exponents() {
        let inv_u = Poly::term(q(1), Monomial::power(Atom::U, -4));
        let num = x().mul(&inv_u).add(&inv_u);
        let quo = num.exact_div(&x().add(&Poly::one())).unwrap();
        assert_eq!(quo, inv_u);
    }

    #[test]
    fn univariate_gcd_finds_common_factor() {
        let a = univariate::to_dense(&x().mul(&x()).sub(&Poly::one()), Atom::X);
        let b = univariate::to_dense(&x().mul(&x()).add(&x().scale(&q(2))).add(&Poly::one()), Atom::X);
        let g = univariate::gcd(&a.coeffs, &b.coeffs);
        assert_eq!(univariate::from_coeffs(&g, Atom::X), x().add(&Poly::one()));
    }

    #[test]
    #[should_panic(expected = "size guard")]
    fn size_guard_aborts() {
        let mut p = Poly::zero();
        for i in 0..=MAX_TERMS {
            p.add_term(Monomial::power(Atom::X, i as i32), q(1));
        }
        let _ = p.add(&Poly::one());
    }
}
