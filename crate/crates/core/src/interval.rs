//! Sets of naturals as canonical unions of closed intervals.

use std::fmt;

/// `[lo, hi]`, with `hi = None` meaning unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NatInterval {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl NatInterval {
    pub fn new(lo: u64, hi: Option<u64>) -> Option<Self> {
        match hi {
            Some(h) if h < lo => None,
            _ => Some(NatInterval { lo, hi }),
        }
    }

    pub fn point(n: u64) -> Self {
        NatInterval { lo: n, hi: Some(n) }
    }

    pub fn from(lo: u64) -> Self {
        NatInterval { lo, hi: None }
    }

    pub fn closed(lo: u64, hi: u64) -> Self {
        NatInterval::new(lo, Some(hi)).expect("empty interval")
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && self.hi.map_or(true, |h| n <= h)
    }

    pub fn len(&self) -> Option<u64> {
        self.hi.map(|h| h - self.lo + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for NatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(h) => write!(f, "[{},{}]", self.lo, h),
            None => write!(f, "[{},inf)", self.lo),
        }
    }
}

/// Sorted, disjoint, non-adjacent intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NatIntervalSet(Vec<NatInterval>);

impl NatIntervalSet {
    pub fn empty() -> Self {
        NatIntervalSet(Vec::new())
    }

    pub fn all() -> Self {
        NatIntervalSet(vec![NatInterval::from(0)])
    }

    pub fn single(iv: NatInterval) -> Self {
        NatIntervalSet(vec![iv])
    }

    pub fn new(mut ivs: Vec<NatInterval>) -> Self {
        ivs.sort();
        let mut out: Vec<NatInterval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            if let Some(last) = out.last_mut() {
                let touches = match last.hi {
                    None => true,
                    Some(h) => iv.lo <= h.saturating_add(1),
                };
                if touches {
                    last.hi = match (last.hi, iv.hi) {
                        (None, _) | (_, None) => None,
                        (Some(a), Some(b)) => Some(a.max(b)),
                    };
                    continue;
                }
            }
            out.push(iv);
        }
        NatIntervalSet(out)
    }

    pub fn from_points(points: impl IntoIterator<Item = u64>) -> Self {
        NatIntervalSet::new(points.into_iter().map(NatInterval::point).collect())
    }

    pub fn intervals(&self) -> &[NatInterval] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.0.last().map_or(true, |iv| iv.hi.is_some())
    }

    pub fn min(&self) -> Option<u64> {
        self.0.first().map(|iv| iv.lo)
    }

    pub fn max(&self) -> Option<Option<u64>> {
        self.0.last().map(|iv| iv.hi)
    }

    /// Number of points, `None` if unbounded.
    pub fn count(&self) -> Option<u64> {
        self.0.iter().map(|iv| iv.len()).sum()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.0.iter().any(|iv| iv.contains(n))
    }

    pub fn union(&self, other: &Self) -> Self {
        NatIntervalSet::new(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for a in &self.0 {
            for b in &other.0 {
                let lo = a.lo.max(b.lo);
                let hi = match (a.hi, b.hi) {
                    (None, h) | (h, None) => h,
                    (Some(x), Some(y)) => Some(x.min(y)),
                };
                if let Some(iv) = NatInterval::new(lo, hi) {
                    out.push(iv);
                }
            }
        }
        NatIntervalSet::new(out)
    }

    /// Points of `within` not in `self`.
    pub fn complement_in(&self, within: &Self) -> Self {
        let mut gaps = Vec::new();
        let mut next = 0u64;
        let mut open = true;
        for iv in &self.0 {
            if iv.lo > next {
                gaps.push(NatInterval::closed(next, iv.lo - 1));
            }
            match iv.hi {
                Some(h) => next = h + 1,
                None => {
                    open = false;
                    break;
                }
            }
        }
        if open {
            gaps.push(NatInterval::from(next));
        }
        NatIntervalSet::new(gaps).intersect(within)
    }

    pub fn difference(&self, other: &Self) -> Self {
        other.complement_in(self)
    }

    /// Iterates the points in ascending order; endless on an unbounded set.
    pub fn points(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().flat_map(|iv| iv.lo..=iv.hi.unwrap_or(u64::MAX))
    }

    pub fn to_ciao(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|iv| match iv.hi {
                Some(h) => format!("i({},{})", iv.lo, h),
                None => format!("i({},inf)", iv.lo),
            })
            .collect();
        format!("[{}]", parts.join(","))
    }
}

impl fmt::Display for NatIntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self.0.iter().map(|iv| iv.to_string()).collect();
        f.write_str(&parts.join(" U "))
    }
}

/// Real interval with open/closed ends; `hi = None` is unbounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealInterval {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: Option<f64>,
    pub hi_closed: bool,
}

/// Naturals contained in a real interval.
pub fn nat_round(r: &RealInterval) -> Option<NatInterval> {
    let lo = r.lo.max(0.0);
    let mut first = lo.ceil();
    if first == r.lo && !r.lo_closed {
        first += 1.0;
    }
    let last = match r.hi {
        None => None,
        Some(h) => {
            if h < 0.0 {
                return None;
            }
            let mut l = h.floor();
            if l == h && !r.hi_closed {
                l -= 1.0;
            }
            if l < 0.0 {
                return None;
            }
            Some(l as u64)
        }
    };
    NatInterval::new(first as u64, last)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[(u64, Option<u64>)]) -> NatIntervalSet {
        NatIntervalSet::new(v.iter().map(|&(l, h)| NatInterval::new(l, h).unwrap()).collect())
    }

    #[test]
    fn merges_adjacent() {
        assert_eq!(set(&[(0, Some(3)), (4, Some(6))]), set(&[(0, Some(6))]));
        assert_eq!(set(&[(5, None), (0, Some(2))]).to_string(), "[0,2] U [5,inf)");
    }

    #[test]
    fn set_algebra() {
        let s = set(&[(1, Some(10)), (100, None)]);
        let t = set(&[(5, Some(150))]);
        assert_eq!(s.intersect(&t), set(&[(5, Some(10)), (100, Some(150))]));
        assert_eq!(t.complement_in(&s), set(&[(1, Some(4)), (151, None)]));
        assert_eq!(NatIntervalSet::empty().complement_in(&s), s);
    }

    #[test]
    fn rounding() {
        let r = RealInterval { lo: 1.09311, lo_closed: true, hi: Some(4.09311), hi_closed: true };
        assert_eq!(nat_round(&r), Some(NatInterval::closed(2, 4)));
        let open = RealInterval { lo: 2.0, lo_closed: false, hi: Some(5.0), hi_closed: false };
        assert_eq!(nat_round(&open), Some(NatInterval::closed(3, 4)));
        let none = RealInterval { lo: 2.2, lo_closed: true, hi: Some(2.8), hi_closed: true };
        assert_eq!(nat_round(&none), None);
    }
}
