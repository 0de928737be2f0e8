//! Small permutation groups and their left regular representations.

use std::collections::BTreeSet;
use std::fmt;

use crate::field::Field;
use crate::linalg::Matrix;

use super::InclusionError;

/// A permutation of `0..n`, stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Parses cycle notation on points `1..=n`, e.g. `(12)(34)` or `(1 2 3)`.
    pub fn parse_cycles(s: &str, n: usize) -> Result<Self, InclusionError> {
        let bad = || InclusionError::Schema(format!("bad cycle notation `{s}`"));
        let mut p = Perm::identity(n);
        let mut rest = s.trim();
        if rest == "()" || rest == "e" || rest == "1" {
            return Ok(p);
        }
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(bad)?;
            let close = body.find(')').ok_or_else(bad)?;
            let inner = &body[..close];
            let points: Vec<usize> = if inner.contains(|c: char| c == ' ' || c == ',') {
                inner
                    .split(|c: char| c == ' ' || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<_, _>>()?
            } else {
                inner
                    .chars()
                    .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                    .collect::<Result<_, _>>()?
            };
            if points.iter().any(|&x| x == 0 || x > n) {
                return Err(bad());
            }
            let mut cycle = Perm::identity(n);
            for (k, &a) in points.iter().enumerate() {
                let b = points[(k + 1) % points.len()];
                cycle.0[a - 1] = b - 1;
            }
            p = p.compose(&cycle);
            rest = body[close + 1..].trim_start();
        }
        Ok(p)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut any = false;
        for s in 0..n {
            if seen[s] || self.0[s] == s {
                continue;
            }
            any = true;
            f.write_str("(")?;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                write!(f, "{}", x + 1)?;
                x = self.0[x];
            }
            f.write_str(")")?;
        }
        if !any {
            f.write_str("()")?;
        }
        Ok(())
    }
}

/// A finite permutation group with its elements in a fixed order (identity first).
#[derive(Clone, Debug)]
pub struct PermGroup {
    name: String,
    degree: usize,
    generators: Vec<(String, Perm)>,
    elements: Vec<Perm>,
}

impl PermGroup {
    pub fn generated(name: &str, degree: usize, generators: Vec<(String, Perm)>) -> Self {
        let gens: Vec<Perm> = generators.iter().map(|g| g.1.clone()).collect();
        let elements = closure(degree, &gens);
        PermGroup { name: name.to_string(), degree, generators, elements }
    }

    /// Named presentations: `S3`, `Z2xZ2`, `D4`.
    pub fn named(name: &str) -> Result<Self, InclusionError> {
        let p = |s: &str, n| Perm::parse_cycles(s, n).expect("builtin cycles");
        Ok(match name {
            "S3" => Self::generated("S3", 3, vec![("s".into(), p("(12)", 3)), ("r".into(), p("(123)", 3))]),
            "Z2xZ2" => Self::generated("Z2xZ2", 4, vec![("a".into(), p("(12)", 4)), ("b".into(), p("(34)", 4))]),
            "D4" => Self::generated("D4", 4, vec![("r".into(), p("(1234)", 4)), ("s".into(), p("(13)", 4))]),
            other => return Err(InclusionError::Schema(format!("unknown group `{other}`"))),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn index_of(&self, g: &Perm) -> Option<usize> {
        self.elements.iter().position(|h| h == g)
    }

    /// Parses a generator word (`rs`, `r2s`) or cycle notation.
    pub fn parse_element(&self, s: &str) -> Result<Perm, InclusionError> {
        let t = s.trim();
        let p = if t.starts_with('(') || t == "e" || t == "1" {
            Perm::parse_cycles(t, self.degree)?
        } else {
            let mut acc = Perm::identity(self.degree);
            let chars: Vec<char> = t.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let name = chars[i].to_string();
                let g = self
                    .generators
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, g)| g.clone())
                    .ok_or_else(|| InclusionError::Schema(format!("unknown generator `{name}` in `{s}`")))?;
                i += 1;
                let mut power = 0usize;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    power = power * 10 + chars[i].to_digit(10).unwrap() as usize;
                    i += 1;
                }
                for _ in 0..power.max(1) {
                    acc = acc.compose(&g);
                }
            }
            acc
        };
        if self.index_of(&p).is_none() {
            return Err(InclusionError::Schema(format!("`{s}` is not an element of {}", self.name)));
        }
        Ok(p)
    }

    /// Subgroup generated by the given elements, as sorted indices into `elements()`.
    pub fn subgroup(&self, gens: &[Perm]) -> Vec<usize> {
        let mut idx: Vec<usize> = closure(self.degree, gens)
            .iter()
            .map(|g| self.index_of(g).expect("subgroup element in group"))
            .collect();
        idx.sort_unstable();
        idx
    }

    /// Left regular representation `λ(g) e_h = e_{gh}`.
    pub fn regular<F: Field>(&self, g: &Perm) -> Matrix<F> {
        let n = self.order();
        let mut m = Matrix::zeros(n, n);
        for (j, h) in self.elements.iter().enumerate() {
            let i = self.index_of(&g.compose(h)).expect("closed under product");
            m.set(i, j, F::one());
        }
        m
    }
}

fn closure(degree: usize, gens: &[Perm]) -> Vec<Perm> {
    let id = Perm::identity(degree);
    let mut set: BTreeSet<Perm> = BTreeSet::new();
    set.insert(id.clone());
    let mut frontier = vec![id.clone()];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = g.compose(&x);
            if set.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    let mut out: Vec<Perm> = set.into_iter().filter(|p| !p.is_identity()).collect();
    out.insert(0, id);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::QuadraticNumber;

    #[test]
    fn orders() {
        assert_eq!(PermGroup::named("S3").unwrap().order(), 6);
        assert_eq!(PermGroup::named("Z2xZ2").unwrap().order(), 4);
        assert_eq!(PermGroup::named("D4").unwrap().order(), 8);
    }

    #[test]
    fn words_and_cycles_agree() {
        let g = PermGroup::named("S3").unwrap();
        let a = g.parse_element("(12)").unwrap();
        let b = g.parse_element("s").unwrap();
        assert_eq!(a, b);
        assert_eq!(g.parse_element("r3").unwrap(), Perm::identity(3));
        assert_eq!(g.subgroup(&[g.parse_element("(123)").unwrap()]).len(), 3);
        assert_eq!(a.to_string(), "(12)");
    }

    #[test]
    fn regular_rep_is_homomorphism() {
        let g = PermGroup::named("S3").unwrap();
        let x = g.parse_element("(12)").unwrap();
        let y = g.parse_element("(123)").unwrap();
        let lx: Matrix<QuadraticNumber> = g.regular(&x);
        let ly = g.regular(&y);
        assert_eq!(lx.mul(&ly), g.regular(&x.compose(&y)));
    }
}
