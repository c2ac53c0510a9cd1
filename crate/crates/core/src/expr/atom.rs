use std::fmt;

/// Jet-space chart coordinates, in their fixed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    X,
    U,
    P,
    Q,
    R,
    S,
}

impl Coord {
    pub const ALL: [Coord; 6] = [Coord::X, Coord::U, Coord::P, Coord::Q, Coord::R, Coord::S];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Coord::X => "x",
            Coord::U => "u",
            Coord::P => "p",
            Coord::Q => "q",
            Coord::R => "r",
            Coord::S => "s",
        }
    }

    /// Derivative order of `u` this coordinate stands for (`x` has none).
    pub fn jet_order(self) -> Option<usize> {
        match self {
            Coord::X => None,
            c => Some(c.index() - 1),
        }
    }
}

/// A symbol an expression can mention.
///
/// The derived ordering is the canonical one:
/// `x < u < p < q < r < s < a1 < ... < a10 < f0 < f0' < ... < f4 < f4' < ...`,
/// followed by auxiliary symbols (`lambda` and friends).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Chart(Coord),
    /// Structure-group parameter `a1..=a10`.
    Param(u8),
    /// `f_index` differentiated `order` times with respect to `x`.
    Coef { index: u8, order: u8 },
    /// Scratch symbols; `Aux(0)` prints as `lambda`.
    Aux(u8),
}

impl Atom {
    pub const X: Atom = Atom::Chart(Coord::X);
    pub const U: Atom = Atom::Chart(Coord::U);
    pub const P: Atom = Atom::Chart(Coord::P);
    pub const Q: Atom = Atom::Chart(Coord::Q);
    pub const R: Atom = Atom::Chart(Coord::R);
    pub const S: Atom = Atom::Chart(Coord::S);
    pub const LAMBDA: Atom = Atom::Aux(0);

    pub fn param(i: u8) -> Atom {
        assert!((1..=10).contains(&i), "group parameter index {i} out of range");
        Atom::Param(i)
    }

    pub fn coef(index: u8, order: u8) -> Atom {
        assert!(index <= 4, "coefficient index {index} out of range");
        Atom::Coef { index, order }
    }

    pub fn is_chart(self) -> bool {
        matches!(self, Atom::Chart(_))
    }

    pub fn is_param(self) -> bool {
        matches!(self, Atom::Param(_))
    }

    pub fn is_coef(self) -> bool {
        matches!(self, Atom::Coef { .. })
    }

    /// Parses the printed name of an atom (`x`, `a7`, `f4''`, `lambda`).
    pub fn from_name(name: &str) -> Option<Atom> {
        if let Some(c) = Coord::ALL.iter().find(|c| c.name() == name) {
            return Some(Atom::Chart(*c));
        }
        if name == "lambda" {
            return Some(Atom::LAMBDA);
        }
        if let Some(rest) = name.strip_prefix("aux") {
            return rest.parse::<u8>().ok().filter(|&k| k > 0).map(Atom::Aux);
        }
        if let Some(rest) = name.strip_prefix('a') {
            if rest.starts_with('0') {
                return None;
            }
            return rest
                .parse::<u8>()
                .ok()
                .filter(|i| (1..=10).contains(i))
                .map(Atom::Param);
        }
        if let Some(rest) = name.strip_prefix('f') {
            let digits: &str = rest.trim_end_matches('\'');
            let order = rest.len() - digits.len();
            if digits.len() != 1 || order > u8::MAX as usize {
                return None;
            }
            let index = digits.parse::<u8>().ok().filter(|&i| i <= 4)?;
            return Some(Atom::Coef {
                index,
                order: order as u8,
            });
        }
        None
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Atom::Chart(c) => f.write_str(c.name()),
            Atom::Param(i) => write!(f, "a{i}"),
            Atom::Coef { index, order } => {
                write!(f, "f{index}")?;
                for _ in 0..order {
                    f.write_str("'")?;
                }
                Ok(())
            }
            Atom::Aux(0) => f.write_str("lambda"),
            Atom::Aux(k) => write!(f, "aux{k}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_follows_the_canonical_sequence() {
        let seq = [
            Atom::X,
            Atom::U,
            Atom::P,
            Atom::Q,
            Atom::R,
            Atom::S,
            Atom::param(1),
            Atom::param(2),
            Atom::param(10),
            Atom::coef(0, 0),
            Atom::coef(0, 1),
            Atom::coef(1, 0),
            Atom::coef(4, 0),
            Atom::coef(4, 3),
            Atom::LAMBDA,
        ];
        for w in seq.windows(2) {
            assert!(w[0] < w[1], "{} !< {}", w[0], w[1]);
        }
    }

    #[test]
    fn names_round_trip() {
        for a in [
            Atom::S,
            Atom::param(10),
            Atom::coef(4, 2),
            Atom::coef(0, 0),
            Atom::LAMBDA,
            Atom::Aux(3),
        ] {
            assert_eq!(Atom::from_name(&a.to_string()), Some(a));
        }
        assert_eq!(Atom::from_name("a0"), None);
        assert_eq!(Atom::from_name("a11"), None);
        assert_eq!(Atom::from_name("f5"), None);
        assert_eq!(Atom::from_name("y"), None);
    }
}
