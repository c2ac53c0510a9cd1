use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::atom::Atom;
use super::monomial::{Monomial, Quarters};
use super::poly::{univariate, Poly, Q};
use super::ExprError;

/// Canonical symbolic expression: a quotient of two canonical sums.
///
/// After normalization the denominator is either `1` or a sum of at least two
/// terms with trivial monomial content and leading coefficient one. A
/// single-term denominator is always folded into the numerator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

/// Memo of `value^(e/4)` for bound atoms, keyed by (atom, quarters).
pub type SubstCache = HashMap<(Atom, Quarters), Expr>;

/// How `x -> d/dx` acts on atoms other than the differentiation variable.
pub trait AtomDerivatives {
    /// Partial derivative of atom `a` with respect to `v` (`a != v`); `None` means zero.
    fn derivative(&self, a: Atom, v: Atom) -> Option<Expr>;
}

/// `d/dx f_i^(k) = f_i^(k+1)`; every other cross derivative vanishes.
#[derive(Clone, Copy, Debug, Default)]
pub struct StandardDerivatives;

impl AtomDerivatives for StandardDerivatives {
    fn derivative(&self, a: Atom, v: Atom) -> Option<Expr> {
        match (a, v) {
            (Atom::Coef { index, order }, Atom::X) => Some(Expr::atom(Atom::coef(index, order + 1))),
            _ => None,
        }
    }
}

fn rational_root(c: &Q, k: u32) -> Option<Q> {
    if c.is_negative() {
        return None;
    }
    let n: BigInt = c.numer().nth_root(k);
    let d: BigInt = c.denom().nth_root(k);
    if num_traits::pow(n.clone(), k as usize) == *c.numer()
        && num_traits::pow(d.clone(), k as usize) == *c.denom()
    {
        Some(Q::new(n, d))
    } else {
        None
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Self {
        Expr::rational(Q::from_integer(n.into()))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Expr::rational(Q::new(n.into(), d.into()))
    }

    pub fn rational(c: Q) -> Self {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn atom(a: Atom) -> Self {
        Expr::from_poly(Poly::atom(a))
    }

    /// `a^(quarters/4)`.
    pub fn atom_pow(a: Atom, quarters: Quarters) -> Self {
        Expr::from_poly(Poly::term(Q::one(), Monomial::power(a, quarters)))
    }

    pub fn monomial(c: Q, m: Monomial) -> Self {
        Expr::from_poly(Poly::term(c, m))
    }

    pub fn from_poly(p: Poly) -> Self {
        Expr {
            num: p,
            den: Poly::one(),
        }
    }

    /// Canonical quotient `num / den`.
    pub fn quotient(num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::ZeroDivisor);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Expr::zero();
        }
        if den.is_one() {
            return Expr::from_poly(num);
        }
        if let Some((m, c)) = den.single_term() {
            let p = num.mul_monomial(&m.inverse()).scale(&c.recip());
            return Expr::from_poly(p);
        }
        let content = den.monomial_content();
        let (mut num, mut den) = if content.is_one() {
            (num, den)
        } else {
            let inv = content.inverse();
            (num.mul_monomial(&inv), den.mul_monomial(&inv))
        };
        let lc = den.leading().map(|(_, c)| c.clone()).expect("nonzero");
        if !lc.is_one() {
            let r = lc.recip();
            num = num.scale(&r);
            den = den.scale(&r);
        }
        if let Some(q) = num.exact_div(&den) {
            return Expr::from_poly(q);
        }
        if let Some(v) = den.sole_atom() {
            let dd = univariate::to_dense(&den, v);
            let mut g = dd.coeffs.clone();
            for part in num.split_by(v).values() {
                let pd = univariate::to_dense(part, v);
                g = univariate::gcd(&g, &pd.coeffs);
                if g.len() == 1 {
                    break;
                }
            }
            if g.len() > 1 {
                let gp = univariate::from_coeffs(&g, v);
                if let (Some(n2), Some(d2)) = (num.exact_div(&gp), den.exact_div(&gp)) {
                    return Self::normalize(n2, d2);
                }
            }
        }
        Expr { num, den }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_rational(&self) -> Option<Q> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// The coefficient and power product when the expression is a single term.
    pub fn as_monomial(&self) -> Option<(Q, Monomial)> {
        if !self.den.is_one() {
            return None;
        }
        self.num.single_term().map(|(m, c)| (c.clone(), m.clone()))
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.num.atoms();
        s.extend(self.den.atoms());
        s
    }

    pub fn contains_atom(&self, a: Atom) -> bool {
        self.num.contains_atom(a) || self.den.contains_atom(a)
    }

    pub fn term_count(&self) -> usize {
        self.num.len() + self.den.len()
    }

    pub fn recip(&self) -> Result<Self, ExprError> {
        Expr::quotient(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Expr) -> Result<Self, ExprError> {
        if other.is_zero() {
            return Err(ExprError::ZeroDivisor);
        }
        Ok(Self::normalize(
            self.num.mul(&other.den),
            self.den.mul(&other.num),
        ))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// `self` for a positive sign, `-self` otherwise.
    pub fn signed(&self, sign: i64) -> Self {
        if sign < 0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn pow_int(&self, n: i64) -> Result<Self, ExprError> {
        if n == 0 {
            return Ok(Expr::one());
        }
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let k = n.unsigned_abs() as u32;
        if let Some((c, m)) = base.as_monomial() {
            let m = m.scale_exponents(k as i64, 1).expect("integer scaling");
            return Ok(Expr::monomial(num_traits::pow(c, k as usize), m));
        }
        Ok(Expr::normalize(base.num.pow_u32(k), base.den.pow_u32(k)))
    }

    /// Rational power on the positive branch. Exponent denominators must divide 4
    /// and a fractional power needs a monomial base with a positive rational root.
    pub fn pow(&self, e: &Q) -> Result<Self, ExprError> {
        let d = e.denom().to_i64().ok_or(ExprError::UnsupportedRadical)?;
        if !matches!(d, 1 | 2 | 4) {
            return Err(ExprError::UnsupportedRadical);
        }
        let n = e.numer().to_i64().ok_or(ExprError::UnsupportedRadical)?;
        if d == 1 {
            return self.pow_int(n);
        }
        if self.is_zero() {
            return if n > 0 {
                Ok(Expr::zero())
            } else {
                Err(ExprError::ZeroDivisor)
            };
        }
        let (c, m) = self.as_monomial().ok_or(ExprError::UnsupportedRadical)?;
        if c.is_negative() {
            return Err(ExprError::UnsupportedRadical);
        }
        let root = rational_root(&c, d as u32).ok_or(ExprError::UnsupportedRadical)?;
        let m = m.scale_exponents(n, d).ok_or(ExprError::UnsupportedRadical)?;
        let coeff = if n >= 0 {
            num_traits::pow(root, n as usize)
        } else {
            num_traits::pow(root.recip(), n.unsigned_abs() as usize)
        };
        Ok(Expr::monomial(coeff, m))
    }

    /// Partial derivative with the standard coefficient-function chain rule.
    pub fn diff(&self, v: Atom) -> Self {
        self.diff_with(v, &StandardDerivatives)
    }

    pub fn diff_with(&self, v: Atom, rules: &dyn AtomDerivatives) -> Self {
        let dn = poly_diff(&self.num, v, rules);
        if self.den.is_one() {
            return dn;
        }
        let dd = poly_diff(&self.den, v, rules);
        if dd.is_zero() {
            return dn.div(&Expr::from_poly(self.den.clone())).expect("nonzero denominator");
        }
        // (n/d)' = (n' d - n d') / d^2, as one quotient when both derivatives are polynomial.
        if dn.den.is_one() && dd.den.is_one() {
            let num = dn.num.mul(&self.den).sub(&self.num.mul(&dd.num));
            return Expr::normalize(num, self.den.mul(&self.den));
        }
        let den = Expr::from_poly(self.den.clone());
        let first = dn.div(&den).expect("nonzero denominator");
        if dd.is_zero() {
            return first;
        }
        let second = Expr::from_poly(self.num.clone()) * dd;
        let den2 = Expr::from_poly(self.den.mul(&self.den));
        first - second.div(&den2).expect("nonzero denominator")
    }

    /// Simultaneous substitution. Binding values must not mention bound atoms.
    pub fn substitute(&self, bindings: &BTreeMap<Atom, Expr>) -> Result<Self, ExprError> {
        check_acyclic_bindings(bindings)?;
        let mut cache = SubstCache::new();
        self.substitute_cached(bindings, &mut cache)
    }

    /// Substitution that reuses powers of bound values across calls.
    /// The caller is responsible for acyclicity (see [`check_acyclic_bindings`]).
    pub fn substitute_cached(
        &self,
        bindings: &BTreeMap<Atom, Expr>,
        cache: &mut SubstCache,
    ) -> Result<Self, ExprError> {
        if !self.atoms().iter().any(|a| bindings.contains_key(a)) {
            return Ok(self.clone());
        }
        let n = subst_poly(&self.num, bindings, cache)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let d = subst_poly(&self.den, bindings, cache)?;
        n.div(&d)
    }

    /// Numeric value; radicals take the positive real root.
    pub fn eval(&self, env: &dyn Fn(Atom) -> Option<f64>) -> Result<f64, ExprError> {
        let mut cache: HashMap<Atom, f64> = HashMap::new();
        let mut lookup = |a: Atom| -> Result<f64, ExprError> {
            if let Some(v) = cache.get(&a) {
                return Ok(*v);
            }
            let v = env(a).ok_or_else(|| ExprError::MissingBinding(a.to_string()))?;
            cache.insert(a, v);
            Ok(v)
        };
        let mut eval_poly = |p: &Poly| -> Result<f64, ExprError> {
            let mut total = 0.0;
            for (m, c) in p.terms() {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for &(a, e) in m.factors() {
                    let b = lookup(a)?;
                    t *= power(b, e)?;
                }
                total += t;
            }
            Ok(total)
        };
        let n = eval_poly(&self.num)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let d = eval_poly(&self.den)?;
        if d.abs() < 1e-12 {
            return Err(ExprError::SingularEvaluation);
        }
        Ok(n / d)
    }

    pub fn eval_map(&self, env: &BTreeMap<Atom, f64>) -> Result<f64, ExprError> {
        self.eval(&|a| env.get(&a).copied())
    }
}

fn power(b: f64, quarters: Quarters) -> Result<f64, ExprError> {
    if quarters % 4 == 0 {
        let k = quarters / 4;
        if k < 0 && b.abs() < 1e-12 {
            return Err(ExprError::SingularEvaluation);
        }
        return Ok(b.powi(k));
    }
    if b < 0.0 {
        return Err(ExprError::NonRealRadical);
    }
    if quarters < 0 && b < 1e-12 {
        return Err(ExprError::SingularEvaluation);
    }
    Ok(b.powf(quarters as f64 / 4.0))
}

/// Rejects bindings whose values mention another bound atom.
pub fn check_acyclic_bindings(bindings: &BTreeMap<Atom, Expr>) -> Result<(), ExprError> {
    for (k, v) in bindings {
        if let Some(a) = v.atoms().into_iter().find(|a| bindings.contains_key(a)) {
            return Err(ExprError::CyclicBinding(format!(
                "{k} is bound to an expression mentioning {a}"
            )));
        }
    }
    Ok(())
}

fn subst_poly(
    p: &Poly,
    bindings: &BTreeMap<Atom, Expr>,
    cache: &mut HashMap<(Atom, Quarters), Expr>,
) -> Result<Expr, ExprError> {
    let mut plain = Poly::zero();
    let mut rest: Vec<Expr> = Vec::new();
    for (m, c) in p.terms() {
        let mut kept: Vec<(Atom, Quarters)> = Vec::new();
        let mut factor = Expr::rational(c.clone());
        for &(a, e) in m.factors() {
            match bindings.get(&a) {
                None => kept.push((a, e)),
                Some(val) => {
                    let pw = match cache.get(&(a, e)) {
                        Some(x) => x.clone(),
                        None => {
                            let x = val.pow(&Q::new(e.into(), 4.into()))?;
                            cache.insert((a, e), x.clone());
                            x
                        }
                    };
                    factor = factor * pw;
                }
            }
        }
        let km = Monomial::from_pairs(kept);
        if factor.den.is_one() {
            plain.add_assign_scaled(&factor.num, &Q::one(), &km);
        } else {
            rest.push(factor * Expr::monomial(Q::one(), km));
        }
    }
    let mut out = Expr::from_poly(plain);
    for r in rest {
        out = out + r;
    }
    Ok(out)
}

fn poly_diff(p: &Poly, v: Atom, rules: &dyn AtomDerivatives) -> Expr {
    let mut plain = Poly::zero();
    let mut rest = Expr::zero();
    let mut cross: HashMap<Atom, Option<Expr>> = HashMap::new();
    for (m, c) in p.terms() {
        for &(a, e) in m.factors() {
            let base = m.mul(&Monomial::power(a, -4));
            let coeff = c * Q::new(e.into(), 4.into());
            if a == v {
                plain.add_term(base, coeff);
                continue;
            }
            let da = cross
                .entry(a)
                .or_insert_with(|| rules.derivative(a, v))
                .clone();
            let Some(da) = da else { continue };
            if da.den.is_one() {
                plain.add_assign_scaled(&da.num, &coeff, &base);
            } else {
                rest = rest + da * Expr::monomial(coeff, base);
            }
        }
    }
    Expr::from_poly(plain) + rest
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return Expr::normalize(self.num.add(&rhs.num), self.den.clone());
        }
        if self.den.is_one() {
            return Expr::normalize(self.num.mul(&rhs.den).add(&rhs.num), rhs.den.clone());
        }
        if rhs.den.is_one() {
            return Expr::normalize(self.num.add(&rhs.num.mul(&self.den)), self.den.clone());
        }
        Expr::normalize(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Expr::from_poly(self.num.mul(&rhs.num));
        }
        Expr::normalize(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Atom> for Expr {
    fn from(a: Atom) -> Self {
        Expr::atom(a)
    }
}
