//! Noncrossing planar diagrams on `2n` boundary points.
//!
//! Points are labelled in circular order: top point `i` is `i`, bottom point
//! `j` is `2n-1-j`. Products stack the left factor above the right one.

use std::fmt;
use std::str::FromStr;

use super::TlError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanarDiagram {
    n: usize,
    partner: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Top(usize),
    Bottom(usize),
}

impl PlanarDiagram {
    /// Builds a diagram from a list of chords, validating the matching.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, TlError> {
        let m = 2 * n;
        let mut partner = vec![usize::MAX; m];
        if pairs.len() != n {
            return Err(TlError::InvalidDiagram(format!("expected {n} chords, got {}", pairs.len())));
        }
        for &(a, b) in pairs {
            if a >= m || b >= m || a == b {
                return Err(TlError::InvalidDiagram(format!("bad chord ({a},{b})")));
            }
            if partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(TlError::InvalidDiagram(format!("point reused in ({a},{b})")));
            }
            partner[a] = b;
            partner[b] = a;
        }
        let d = PlanarDiagram { n, partner };
        if !d.is_noncrossing() {
            return Err(TlError::InvalidDiagram("chords cross".into()));
        }
        Ok(d)
    }

    fn is_noncrossing(&self) -> bool {
        let chords = self.pairs();
        for (i, &(a, b)) in chords.iter().enumerate() {
            for &(c, d) in &chords[i + 1..] {
                let inside = |x: usize| a < x && x < b;
                if inside(c) != inside(d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn identity(n: usize) -> Self {
        let m = 2 * n;
        let partner = (0..m).map(|p| m - 1 - p).collect();
        PlanarDiagram { n, partner }
    }

    /// The generator `E_i` (1-based) of `TL_n`.
    pub fn generator(n: usize, i: usize) -> Result<Self, TlError> {
        if i == 0 || i >= n {
            return Err(TlError::BoxSize(format!("E{i} needs box size > {i}, have {n}")));
        }
        let mut d = Self::identity(n);
        let m = 2 * n;
        let (a, b) = (i - 1, i);
        let (c, e) = (m - 1 - (i - 1), m - 1 - i);
        d.partner[a] = b;
        d.partner[b] = a;
        d.partner[c] = e;
        d.partner[e] = c;
        Ok(d)
    }

    pub fn box_size(&self) -> usize {
        self.n
    }

    pub fn partner(&self, p: usize) -> usize {
        self.partner[p]
    }

    /// Chords `(a, b)` with `a < b`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..2 * self.n)
            .filter(|&p| p < self.partner[p])
            .map(|p| (p, self.partner[p]))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// `Some(i)` when the diagram is the generator `E_i`.
    pub fn as_generator(&self) -> Option<usize> {
        (1..self.n).find(|&i| Self::generator(self.n, i).map_or(false, |g| g == *self))
    }

    fn side(&self, p: usize) -> Side {
        if p < self.n {
            Side::Top(p)
        } else {
            Side::Bottom(2 * self.n - 1 - p)
        }
    }

    fn label(&self, s: Side) -> usize {
        match s {
            Side::Top(i) => i,
            Side::Bottom(j) => 2 * self.n - 1 - j,
        }
    }

    /// Stacks `self` above `other`; returns the product diagram and the
    /// number of closed loops removed.
    pub fn compose(&self, other: &Self) -> Result<(Self, u32), TlError> {
        if self.n != other.n {
            return Err(TlError::BoxSize(format!("{} vs {}", self.n, other.n)));
        }
        let n = self.n;
        // nodes: 0..n upper top, n..2n middle, 2n..3n lower bottom
        let upper = |node: usize| -> usize {
            let s = if node < n { Side::Top(node) } else { Side::Bottom(node - n) };
            match self.side(self.partner[self.label(s)]) {
                Side::Top(i) => i,
                Side::Bottom(j) => n + j,
            }
        };
        let lower = |node: usize| -> usize {
            let s = if node < 2 * n { Side::Top(node - n) } else { Side::Bottom(node - 2 * n) };
            match other.side(other.partner[other.label(s)]) {
                Side::Top(i) => n + i,
                Side::Bottom(j) => 2 * n + j,
            }
        };
        let outer_label = |node: usize| -> usize {
            if node < n {
                node
            } else {
                2 * n - 1 - (node - 2 * n)
            }
        };
        let mut partner = vec![usize::MAX; 2 * n];
        let mut seen_middle = vec![false; n];
        for start in (0..n).chain(2 * n..3 * n) {
            let sl = outer_label(start);
            if partner[sl] != usize::MAX {
                continue;
            }
            let mut node = start;
            let mut use_upper = start < n;
            loop {
                let next = if use_upper { upper(node) } else { lower(node) };
                if (n..2 * n).contains(&next) {
                    seen_middle[next - n] = true;
                    node = next;
                    use_upper = !use_upper;
                } else {
                    let el = outer_label(next);
                    partner[sl] = el;
                    partner[el] = sl;
                    break;
                }
            }
        }
        let mut loops = 0;
        for m0 in 0..n {
            if seen_middle[m0] {
                continue;
            }
            loops += 1;
            let mut node = n + m0;
            let mut use_upper = true;
            loop {
                seen_middle[node - n] = true;
                let next = if use_upper { upper(node) } else { lower(node) };
                use_upper = !use_upper;
                if next == n + m0 {
                    break;
                }
                node = next;
            }
        }
        Ok((PlanarDiagram { n, partner }, loops))
    }

    /// Loops formed when top `i` is joined to bottom `i` around the right.
    pub fn trace_loops(&self) -> u32 {
        let m = 2 * self.n;
        let mut seen = vec![false; m];
        let mut loops = 0;
        for s in 0..m {
            if seen[s] {
                continue;
            }
            loops += 1;
            let mut p = s;
            loop {
                seen[p] = true;
                let q = self.partner[p];
                seen[q] = true;
                // closing strand: label q ↔ 2n-1-q
                let r = m - 1 - q;
                if r == s {
                    break;
                }
                p = r;
            }
        }
        loops
    }

    /// One-click rotation: every label moves to `label + 1 (mod 2n)`.
    pub fn rotate(&self) -> Self {
        let m = 2 * self.n;
        let mut partner = vec![0; m];
        for p in 0..m {
            partner[(p + 1) % m] = (self.partner[p] + 1) % m;
        }
        PlanarDiagram { n: self.n, partner }
    }

    /// Reflection across the horizontal axis.
    pub fn star(&self) -> Self {
        let m = 2 * self.n;
        let mut partner = vec![0; m];
        for p in 0..m {
            partner[m - 1 - p] = m - 1 - self.partner[p];
        }
        PlanarDiagram { n: self.n, partner }
    }

    /// Adds through-strands on the right up to box size `m`.
    pub fn embed(&self, m: usize) -> Self {
        assert!(m >= self.n);
        let relabel = |p: usize| match self.side(p) {
            Side::Top(i) => i,
            Side::Bottom(j) => 2 * m - 1 - j,
        };
        let mut partner: Vec<usize> = (0..2 * m).map(|p| 2 * m - 1 - p).collect();
        for p in 0..2 * self.n {
            partner[relabel(p)] = relabel(self.partner[p]);
        }
        PlanarDiagram { n: m, partner }
    }

    /// All noncrossing perfect matchings of `2n` points, in canonical order.
    pub fn enumerate(n: usize) -> Vec<Self> {
        fn rec(points: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
            if points.is_empty() {
                out.push(acc.clone());
                return;
            }
            let first = points[0];
            for k in (1..points.len()).step_by(2) {
                acc.push((first, points[k]));
                let inner = &points[1..k];
                let outer = &points[k + 1..];
                let mut inner_out = Vec::new();
                rec(inner, &mut Vec::new(), &mut inner_out);
                for ins in inner_out {
                    let mark = acc.len();
                    acc.extend(ins);
                    rec(outer, acc, out);
                    acc.truncate(mark);
                }
                acc.pop();
            }
        }
        let points: Vec<usize> = (0..2 * n).collect();
        let mut out = Vec::new();
        rec(&points, &mut Vec::new(), &mut out);
        let mut ds: Vec<Self> = out
            .into_iter()
            .map(|pairs| Self::from_pairs(n, &pairs).expect("enumerated matching is valid"))
            .collect();
        ds.sort();
        ds
    }
}

impl fmt::Display for PlanarDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, (a, b)) in self.pairs().into_iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "({a},{b})")?;
        }
        f.write_str("]")
    }
}

impl FromStr for PlanarDiagram {
    type Err = TlError;

    fn from_str(s: &str) -> Result<Self, TlError> {
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| TlError::InvalidDiagram(s.to_string()))?;
        let mut pairs = Vec::new();
        let mut rest = body.trim();
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| TlError::InvalidDiagram(s.to_string()))?;
            let close = open.find(')').ok_or_else(|| TlError::InvalidDiagram(s.to_string()))?;
            let nums: Vec<&str> = open[..close].split(',').map(str::trim).collect();
            if nums.len() != 2 {
                return Err(TlError::InvalidDiagram(s.to_string()));
            }
            let parse = |t: &str| t.parse::<usize>().map_err(|_| TlError::InvalidDiagram(s.to_string()));
            pairs.push((parse(nums[0])?, parse(nums[1])?));
            rest = open[close + 1..].trim_start();
            rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
        }
        if pairs.is_empty() {
            return Err(TlError::InvalidDiagram(s.to_string()));
        }
        Self::from_pairs(pairs.len(), &pairs)
    }
}
