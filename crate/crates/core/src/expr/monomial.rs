use std::cmp::Ordering;

use smallvec::SmallVec;

use super::atom::Atom;

/// Exponents are stored in quarters: `4` means power one, `-1` means `^(-1/4)`.
pub type Quarters = i32;

/// Power product of atoms with quarter-integer exponents, sorted by atom.
///
/// Equality is structural; ordering is lexicographic on exponent vectors with
/// the atom order deciding significance (an absent atom has exponent zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: SmallVec<[(Atom, Quarters); 6]>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn atom(a: Atom) -> Self {
        Monomial::power(a, 4)
    }

    pub fn power(a: Atom, quarters: Quarters) -> Self {
        let mut factors = SmallVec::new();
        if quarters != 0 {
            factors.push((a, quarters));
        }
        Monomial { factors }
    }

    /// Builds from unsorted pairs, merging repeats and dropping zero exponents.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Atom, Quarters)>) -> Self {
        let mut v: SmallVec<[(Atom, Quarters); 6]> = pairs.into_iter().collect();
        v.sort_by_key(|p| p.0);
        let mut out: SmallVec<[(Atom, Quarters); 6]> = SmallVec::new();
        for (a, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == a => last.1 += e,
                _ => out.push((a, e)),
            }
        }
        out.retain(|p| p.1 != 0);
        Monomial { factors: out }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, Quarters)] {
        &self.factors
    }

    pub fn exponent(&self, a: Atom) -> Quarters {
        self.factors
            .binary_search_by_key(&a, |p| p.0)
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn contains(&self, a: Atom) -> bool {
        self.exponent(a) != 0
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.factors.iter().map(|p| p.0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let (a, b) = (&self.factors, &other.factors);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { factors: out }
    }

    pub fn inverse(&self) -> Monomial {
        Monomial {
            factors: self.factors.iter().map(|&(a, e)| (a, -e)).collect(),
        }
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.mul(&other.inverse())
    }

    /// Multiplies every exponent by `num/den`; `None` if a result is not a whole quarter.
    pub fn scale_exponents(&self, num: i64, den: i64) -> Option<Monomial> {
        let mut out = SmallVec::new();
        for &(a, e) in &self.factors {
            let t = e as i64 * num;
            if t % den != 0 {
                return None;
            }
            out.push((a, (t / den) as Quarters));
        }
        Some(Monomial { factors: out })
    }

    /// Per-atom minimum exponent, taken over `self` and `other` with absent atoms at zero.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut pairs: Vec<(Atom, Quarters)> = Vec::new();
        for a in self.atoms().chain(other.atoms()) {
            let m = self.exponent(a).min(other.exponent(a));
            if m != 0 && !pairs.iter().any(|p| p.0 == a) {
                pairs.push((a, m));
            }
        }
        Monomial::from_pairs(pairs)
    }

    /// True when every exponent of `other` is at most the matching one here.
    pub fn is_divisible_by(&self, other: &Monomial) -> bool {
        other
            .factors
            .iter()
            .all(|&(a, e)| self.exponent(a) >= e)
            && self
                .factors
                .iter()
                .all(|&(a, e)| e >= 0 || other.exponent(a) <= e)
    }

    pub fn without(&self, a: Atom) -> Monomial {
        Monomial {
            factors: self.factors.iter().copied().filter(|p| p.0 != a).collect(),
        }
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.factors.iter().any(|p| p.1 < 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.factors, &other.factors);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&(_, e)), None) => return e.cmp(&0),
                (None, Some(&(_, e))) => return 0.cmp(&e),
                (Some(&(x, ex)), Some(&(y, ey))) => match x.cmp(&y) {
                    Ordering::Less => return ex.cmp(&0),
                    Ordering::Greater => return 0.cmp(&ey),
                    Ordering::Equal => {
                        if ex != ey {
                            return ex.cmp(&ey);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplication_merges_and_cancels() {
        let m = Monomial::from_pairs([(Atom::U, 1), (Atom::X, 4)]);
        let n = Monomial::from_pairs([(Atom::U, -1), (Atom::P, 8)]);
        let prod = m.mul(&n);
        assert_eq!(prod, Monomial::from_pairs([(Atom::X, 4), (Atom::P, 8)]));
        assert!(m.mul(&m.inverse()).is_one());
    }

    #[test]
    fn lex_order_is_multiplicative() {
        let x = Monomial::atom(Atom::X);
        let u2 = Monomial::power(Atom::U, 8);
        let inv_u = Monomial::power(Atom::U, -4);
        assert!(x > u2);
        assert!(u2 > Monomial::one());
        assert!(inv_u < Monomial::one());
        let t = Monomial::power(Atom::P, 3);
        assert!(x.mul(&t) > u2.mul(&t));
        assert!(inv_u.mul(&t) < t);
    }

    #[test]
    fn scaling_rejects_fractional_quarters() {
        let m = Monomial::power(Atom::U, 2);
        assert_eq!(m.scale_exponents(1, 2), Some(Monomial::power(Atom::U, 1)));
        assert_eq!(Monomial::power(Atom::U, 1).scale_exponents(1, 2), None);
    }

    #[test]
    fn gcd_takes_minimum_with_absent_as_zero() {
        let m = Monomial::from_pairs([(Atom::U, 8), (Atom::X, 4)]);
        let n = Monomial::from_pairs([(Atom::U, 4), (Atom::P, -4)]);
        assert_eq!(m.gcd(&n), Monomial::from_pairs([(Atom::U, 4), (Atom::P, -4)]));
    }
}
