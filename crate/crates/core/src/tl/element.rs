use std::collections::BTreeMap;
use std::fmt;

use crate::scalars::{quantum_integer, DeltaRational, QuadraticNumber};

use super::{PlanarDiagram, TlError};

/// A formal combination of diagrams with coefficients rational in δ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TLElement {
    n: usize,
    terms: BTreeMap<PlanarDiagram, DeltaRational>,
}

impl TLElement {
    pub fn zero(n: usize) -> Self {
        TLElement { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagram(PlanarDiagram::identity(n))
    }

    pub fn from_diagram(d: PlanarDiagram) -> Self {
        let n = d.box_size();
        let mut terms = BTreeMap::new();
        terms.insert(d, DeltaRational::one());
        TLElement { n, terms }
    }

    pub fn generator(n: usize, i: usize) -> Result<Self, TlError> {
        Ok(Self::from_diagram(PlanarDiagram::generator(n, i)?))
    }

    pub fn scalar(n: usize, c: DeltaRational) -> Self {
        Self::identity(n).scale(&c)
    }

    pub fn box_size(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<PlanarDiagram, DeltaRational> {
        &self.terms
    }

    pub fn coefficient(&self, d: &PlanarDiagram) -> DeltaRational {
        self.terms.get(d).cloned().unwrap_or_else(DeltaRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, d: PlanarDiagram, c: DeltaRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(d.clone()).or_insert_with(DeltaRational::zero);
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&d);
        }
    }

    fn check_size(&self, other: &Self) -> Result<(), TlError> {
        if self.n != other.n {
            return Err(TlError::BoxSize(format!("{} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, TlError> {
        self.check_size(other)?;
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.accumulate(d.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TlError> {
        self.add(&other.scale(&DeltaRational::from_integer(-1)))
    }

    pub fn scale(&self, c: &DeltaRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        TLElement {
            n: self.n,
            terms: self.terms.iter().map(|(d, x)| (d.clone(), x * c)).collect(),
        }
    }

    /// Vertical stacking, `self` on top; each closed loop contributes δ.
    pub fn compose(&self, other: &Self) -> Result<Self, TlError> {
        self.check_size(other)?;
        // Group by loop count so each δ power is applied once.
        let mut by_loops: BTreeMap<(PlanarDiagram, u32), DeltaRational> = BTreeMap::new();
        for (dx, cx) in &self.terms {
            for (dy, cy) in &other.terms {
                let (d, loops) = dx.compose(dy)?;
                let e = by_loops.entry((d, loops)).or_insert_with(DeltaRational::zero);
                *e = &*e + &(cx * cy);
            }
        }
        let mut out = Self::zero(self.n);
        for ((d, loops), c) in by_loops {
            out.accumulate(d, &c * &DeltaRational::delta().powi(loops));
        }
        Ok(out)
    }

    /// Unnormalized Markov trace: `Tr(1_n) = δⁿ`.
    pub fn markov_trace(&self) -> DeltaRational {
        let mut acc = DeltaRational::zero();
        for (d, c) in &self.terms {
            acc = &acc + &(c * &DeltaRational::delta().powi(d.trace_loops()));
        }
        acc
    }

    fn require_two_box(&self) -> Result<(), TlError> {
        if self.n != 2 {
            return Err(TlError::BoxSize(format!("rotation needs a 2-box, have {}", self.n)));
        }
        Ok(())
    }

    /// One-click rotation (Fourier transform) of a 2-box.
    pub fn rotate(&self) -> Result<Self, TlError> {
        self.require_two_box()?;
        Ok(self.map_diagrams(PlanarDiagram::rotate))
    }

    pub fn rotate_inverse(&self) -> Result<Self, TlError> {
        self.require_two_box()?;
        Ok(self.map_diagrams(|d| d.rotate().rotate().rotate()))
    }

    /// Reflection across the horizontal axis; δ-coefficients are real.
    pub fn star(&self) -> Self {
        self.map_diagrams(PlanarDiagram::star)
    }

    fn map_diagrams(&self, f: impl Fn(&PlanarDiagram) -> PlanarDiagram) -> Self {
        let mut out = Self::zero(self.n);
        for (d, c) in &self.terms {
            out.accumulate(f(d), c.clone());
        }
        out
    }

    pub fn embed(&self, m: usize) -> Result<Self, TlError> {
        if m < self.n {
            return Err(TlError::BoxSize(format!("cannot shrink {} to {m}", self.n)));
        }
        let mut out = Self::zero(m);
        for (d, c) in &self.terms {
            out.accumulate(d.embed(m), c.clone());
        }
        Ok(out)
    }

    /// `x ∘ y = F⁻¹(F(x)·F(y))` for the rotation `F`.
    ///
    /// With this scaling `(E₁/δ) ∘ (E₁/δ) = (1/δ)(E₁/δ)` and `1 ∘ x = (Tr(x)/δ)·1`.
    pub fn comultiply(&self, other: &Self) -> Result<Self, TlError> {
        self.check_size(other)?;
        self.rotate()?.compose(&other.rotate()?)?.rotate_inverse()
    }

    pub fn is_projection(&self) -> bool {
        self.compose(self).map_or(false, |sq| sq == *self) && self.star() == *self
    }

    /// Exact specialization at a numeric δ.
    pub fn specialize(
        &self,
        delta: &QuadraticNumber,
    ) -> Result<BTreeMap<PlanarDiagram, QuadraticNumber>, TlError> {
        let mut out = BTreeMap::new();
        for (d, c) in &self.terms {
            let v = c.eval_quadratic(delta).map_err(TlError::Scalar)?;
            if !v.is_zero() {
                out.insert(d.clone(), v);
            }
        }
        Ok(out)
    }
}

/// Jones–Wenzl idempotent via `p_{k+1} = p_k − ([k]/[k+1]) p_k E_k p_k`.
pub fn jones_wenzl(n: usize) -> Result<TLElement, TlError> {
    if n == 0 {
        return Err(TlError::BoxSize("jones_wenzl needs n ≥ 1".into()));
    }
    let mut p = TLElement::identity(1);
    for k in 1..n {
        let pk = p.embed(k + 1)?;
        let e = TLElement::generator(k + 1, k)?;
        let ratio = DeltaRational::new(quantum_integer(k), quantum_integer(k + 1))
            .map_err(TlError::Scalar)?;
        let pep = pk.compose(&e)?.compose(&pk)?;
        p = pk.sub(&pep.scale(&ratio))?;
    }
    Ok(p)
}

/// Checks that no quantum integer `[1]..[n]` vanishes at a numeric δ.
pub fn jones_wenzl_at(n: usize, delta: &QuadraticNumber) -> Result<TLElement, TlError> {
    for k in 1..=n {
        if quantum_integer(k).eval_quadratic(delta).is_zero() {
            return Err(TlError::Degenerate(format!("[{k}] vanishes at δ = {delta}")));
        }
    }
    jones_wenzl(n)
}

fn wrap_coefficient(c: &DeltaRational) -> String {
    let s = c.to_string();
    let body = s.strip_prefix('-').unwrap_or(&s);
    if body.contains('+') || body.contains('-') {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for TLElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let ordered = self
            .terms
            .iter()
            .filter(|(d, _)| d.is_identity())
            .chain(self.terms.iter().filter(|(d, _)| !d.is_identity()));
        for (k, (d, c)) in ordered.enumerate() {
            let name = if d.is_identity() {
                "1".to_string()
            } else if let Some(i) = d.as_generator() {
                format!("E{i}")
            } else {
                d.to_string()
            };
            let one = DeltaRational::one();
            let minus_one = DeltaRational::from_integer(-1);
            let term = if *c == one {
                name
            } else if *c == minus_one {
                format!("-{name}")
            } else {
                format!("{}*{name}", wrap_coefficient(c))
            };
            if k > 0 {
                if let Some(rest) = term.strip_prefix('-') {
                    write!(f, " - {rest}")?;
                    continue;
                }
                f.write_str(" + ")?;
            }
            f.write_str(&term)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> TLElement {
        TLElement::generator(n, i).unwrap()
    }

    fn delta() -> DeltaRational {
        DeltaRational::delta()
    }

    #[test]
    fn square_of_generator() {
        let x = e(2, 1);
        assert_eq!(x.compose(&x).unwrap(), x.scale(&delta()));
    }

    #[test]
    fn braid_like_relation() {
        let lhs = e(3, 1).compose(&e(3, 2)).unwrap().compose(&e(3, 1)).unwrap();
        assert_eq!(lhs, e(3, 1));
    }

    #[test]
    fn p2_kills_generator() {
        let p2 = jones_wenzl(2).unwrap();
        let expected = TLElement::identity(2).sub(&e(2, 1).scale(&delta().inverse().unwrap())).unwrap();
        assert_eq!(p2, expected);
        assert!(p2.compose(&e(2, 1)).unwrap().is_zero());
    }

    #[test]
    fn traces() {
        assert_eq!(TLElement::identity(2).markov_trace(), delta().powi(2));
        assert_eq!(e(2, 1).markov_trace(), delta());
        let p2 = jones_wenzl(2).unwrap();
        assert_eq!(p2.markov_trace().to_string(), "δ^2-1");
    }

    #[test]
    fn comultiplication_calibration() {
        let inv = delta().inverse().unwrap();
        let en = e(2, 1).scale(&inv);
        assert_eq!(en.comultiply(&en).unwrap(), en.scale(&inv));
        let x = e(2, 1).scale(&DeltaRational::from_integer(3)).add(&TLElement::identity(2)).unwrap();
        let lhs = TLElement::identity(2).comultiply(&x).unwrap();
        assert_eq!(lhs, TLElement::scalar(2, &x.markov_trace() * &inv));
    }

    #[test]
    fn display_forms() {
        assert_eq!(e(3, 1).to_string(), "E1");
        let p2 = jones_wenzl(2).unwrap();
        assert_eq!(p2.to_string(), "1 - 1/δ*E1");
    }
}
