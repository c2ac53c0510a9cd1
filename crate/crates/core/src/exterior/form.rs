use std::collections::{BTreeMap, HashMap};

use smallvec::SmallVec;

use super::ExteriorError;
use crate::expr::{check_acyclic_bindings, Atom, AtomDerivatives, Coord, Expr, StandardDerivatives};

/// Strictly increasing list of basis covectors (`dx..ds`, `da1..da10`).
pub type Blade = SmallVec<[Atom; 3]>;

/// Real components of a tangent vector, keyed by chart atom.
pub type TangentVector = BTreeMap<Atom, f64>;

/// The 16 coordinates carrying a differential, in covector order.
pub fn covectors() -> impl Iterator<Item = Atom> {
    Coord::ALL
        .into_iter()
        .map(Atom::Chart)
        .chain((1..=10).map(Atom::Param))
}

fn is_covector(a: Atom) -> bool {
    matches!(a, Atom::Chart(_) | Atom::Param(_))
}

/// Differential form with canonical coefficients on sorted blades.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    degree: usize,
    terms: BTreeMap<Blade, Expr>,
}

/// Sorts a blade in place, returning the permutation sign, or `None` on a repeat.
fn sort_blade(b: &mut Blade) -> Option<i64> {
    let mut sign = 1;
    for i in 1..b.len() {
        let mut j = i;
        while j > 0 && b[j - 1] > b[j] {
            b.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if b.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl Form {
    pub fn zero(degree: usize) -> Self {
        Form {
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// A function viewed as a 0-form.
    pub fn scalar(e: Expr) -> Self {
        let mut f = Form::zero(0);
        f.add_term(Blade::new(), e);
        f
    }

    /// The basis 1-form `dv`.
    pub fn dv(v: Atom) -> Self {
        assert!(is_covector(v), "{v} has no differential in this chart");
        let mut f = Form::zero(1);
        f.add_term(smallvec::smallvec![v], Expr::one());
        f
    }

    /// `Σ c_v dv` from (covector, coefficient) pairs.
    pub fn one_form(pairs: impl IntoIterator<Item = (Atom, Expr)>) -> Self {
        let mut f = Form::zero(1);
        for (v, c) in pairs {
            assert!(is_covector(v), "{v} has no differential in this chart");
            f.add_term(smallvec::smallvec![v], c);
        }
        f
    }

    /// Builds a form of the given degree from arbitrary (possibly unsorted) blades.
    pub fn from_terms(
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<Atom>, Expr)>,
    ) -> Result<Self, ExteriorError> {
        if degree > 2 {
            return Err(ExteriorError::DegreeOverflow(degree));
        }
        let mut f = Form::zero(degree);
        for (b, c) in terms {
            if b.len() != degree || !b.iter().all(|a| is_covector(*a)) {
                return Err(ExteriorError::MalformedBlade);
            }
            let mut blade: Blade = b.into_iter().collect();
            if let Some(sign) = sort_blade(&mut blade) {
                f.add_term(blade, c.signed(sign));
            }
        }
        Ok(f)
    }

    fn add_term(&mut self, b: Blade, c: Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&b);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Blade, &Expr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient on the blade given in any order (sign-adjusted).
    pub fn coefficient(&self, blade: &[Atom]) -> Expr {
        let mut b: Blade = blade.iter().copied().collect();
        match sort_blade(&mut b) {
            None => Expr::zero(),
            Some(sign) => self
                .terms
                .get(&b)
                .map(|c| c.signed(sign))
                .unwrap_or_else(Expr::zero),
        }
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(b.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Form {
        Form {
            degree: self.degree,
            terms: self.terms.iter().map(|(b, c)| (b.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn scale(&self, g: &Expr) -> Form {
        let mut out = Form::zero(self.degree);
        for (b, c) in &self.terms {
            out.add_term(b.clone(), c * g);
        }
        out
    }

    /// Graded-antisymmetric product; total degree at most two.
    pub fn wedge(&self, other: &Form) -> Result<Form, ExteriorError> {
        let deg = self.degree + other.degree;
        if deg > 2 {
            return Err(ExteriorError::DegreeOverflow(deg));
        }
        Ok(self.wedge_unchecked(other))
    }

    pub(crate) fn wedge_unchecked(&self, other: &Form) -> Form {
        let mut out = Form::zero(self.degree + other.degree);
        for (b1, c1) in &self.terms {
            for (b2, c2) in &other.terms {
                let mut b: Blade = b1.iter().chain(b2.iter()).copied().collect();
                let Some(sign) = sort_blade(&mut b) else {
                    continue;
                };
                let sign = if cfg!(feature = "mutant-wedge") && !b1.is_empty() && !b2.is_empty() {
                    -sign
                } else {
                    sign
                };
                out.add_term(b, (c1 * c2).signed(sign));
            }
        }
        out
    }

    /// Exterior derivative using the standard coefficient chain rule.
    pub fn d(&self) -> Result<Form, ExteriorError> {
        self.d_with(&StandardDerivatives)
    }

    pub fn d_with(&self, rules: &dyn AtomDerivatives) -> Result<Form, ExteriorError> {
        if self.degree >= 2 {
            return Err(ExteriorError::DegreeOverflow(self.degree + 1));
        }
        Ok(self.d_unchecked(rules))
    }

    pub(crate) fn d_unchecked(&self, rules: &dyn AtomDerivatives) -> Form {
        let mut out = Form::zero(self.degree + 1);
        for (b, c) in &self.terms {
            let atoms = c.atoms();
            let mut vars: Vec<Atom> = atoms.iter().copied().filter(|a| is_covector(*a)).collect();
            if !vars.contains(&Atom::X) && atoms.iter().any(|a| !is_covector(*a)) {
                vars.push(Atom::X);
            }
            for v in vars {
                let dc = c.diff_with(v, rules);
                if dc.is_zero() {
                    continue;
                }
                let mut nb: Blade = std::iter::once(v).chain(b.iter().copied()).collect();
                if let Some(sign) = sort_blade(&mut nb) {
                    out.add_term(nb, dc.signed(sign));
                }
            }
        }
        out
    }

    /// Substitutes bindings into coefficients and replaces `da_i` by `d(binding)`.
    pub fn substitute(&self, bindings: &BTreeMap<Atom, Expr>) -> Result<Form, ExteriorError> {
        self.substitute_with(bindings, &StandardDerivatives)
    }

    pub fn substitute_with(
        &self,
        bindings: &BTreeMap<Atom, Expr>,
        rules: &dyn AtomDerivatives,
    ) -> Result<Form, ExteriorError> {
        check_acyclic_bindings(bindings)?;
        let mut cache = HashMap::new();
        let mut diffs: BTreeMap<Atom, Form> = BTreeMap::new();
        let mut out = Form::zero(self.degree);
        for (b, c) in &self.terms {
            let c2 = c.substitute_cached(bindings, &mut cache)?;
            let mut piece = Form::scalar(c2);
            for &v in b {
                let factor = match bindings.get(&v) {
                    None => Form::dv(v),
                    Some(val) => {
                        diffs.entry(v).or_insert_with(|| Form::scalar(val.clone()).d_unchecked(rules));
                        diffs[&v].clone()
                    }
                };
                piece = piece.wedge_unchecked(&factor);
            }
            out = out.add(&piece);
        }
        Ok(out)
    }

    /// Evaluates on 0, 1 or 2 tangent vectors (matching the degree).
    pub fn eval(
        &self,
        point: &BTreeMap<Atom, f64>,
        vectors: &[&TangentVector],
    ) -> Result<f64, ExteriorError> {
        if vectors.len() != self.degree {
            return Err(ExteriorError::VectorCount {
                degree: self.degree,
                given: vectors.len(),
            });
        }
        let comp = |v: &TangentVector, a: Atom| v.get(&a).copied().unwrap_or(0.0);
        let mut total = 0.0;
        for (b, c) in &self.terms {
            let value = c.eval_map(point)?;
            let w = match b.len() {
                0 => 1.0,
                1 => comp(vectors[0], b[0]),
                2 => {
                    comp(vectors[0], b[0]) * comp(vectors[1], b[1])
                        - comp(vectors[0], b[1]) * comp(vectors[1], b[0])
                }
                n => return Err(ExteriorError::DegreeOverflow(n)),
            };
            total += value * w;
        }
        Ok(total)
    }

    /// Applies `f` to every coefficient.
    pub fn map_coefficients(
        &self,
        mut f: impl FnMut(&Expr) -> Result<Expr, ExteriorError>,
    ) -> Result<Form, ExteriorError> {
        let mut out = Form::zero(self.degree);
        for (b, c) in &self.terms {
            out.add_term(b.clone(), f(c)?);
        }
        Ok(out)
    }
}
