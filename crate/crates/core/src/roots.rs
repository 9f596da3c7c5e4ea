//! Non-negative real roots of polynomials and safe root refinement for general functions.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{differentiate, Compiled};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("the zero polynomial has no isolated roots")]
    ZeroPolynomial,
    #[error("root iteration did not converge")]
    NoConvergence,
    #[error("safe root search exceeded {0} steps")]
    IterationLimit(u32),
    #[error("derivative sign changes between the approximate and the safe root")]
    MonotonicityUnverified,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Exactness {
    Exact(Rational),
    Approx { radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: f64,
    pub exactness: Exactness,
}

impl Root {
    pub fn exact(q: Rational) -> Root {
        Root { value: rational::to_f64(&q), exactness: Exactness::Exact(q) }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.exactness, Exactness::Exact(_))
    }

    pub fn radius(&self) -> f64 {
        match self.exactness {
            Exactness::Exact(_) => 0.0,
            Exactness::Approx { radius } => radius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootMethod {
    Exact,
    Analytic,
    Aberth,
    SurrogatePolynomial,
}

/// Strictly ascending non-negative real roots.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub method: RootMethod,
}

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Non-negative real roots of `sum coeffs[i] x^i`.
pub fn poly_roots(coeffs: &[Rational]) -> Result<RootSet, RootError> {
    poly_roots_seeded(coeffs, DEFAULT_SEED)
}

fn horner_exact(c: &[Rational], x: &Rational) -> Rational {
    c.iter().rev().fold(Rational::zero(), |acc, a| acc * x + a)
}

fn horner(c: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut p, mut dp, mut mag) = (0.0, 0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
        mag = mag * x.abs() + a.abs();
    }
    (p, dp, mag)
}

fn horner_c(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let (mut p, mut dp) = (Complex64::zero(), Complex64::zero());
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

pub fn poly_roots_seeded(coeffs: &[Rational], seed: u64) -> Result<RootSet, RootError> {
    let mut c: Vec<Rational> = coeffs.to_vec();
    while c.last().map_or(false, |a| a.is_zero()) {
        c.pop();
    }
    if c.is_empty() {
        return Err(RootError::ZeroPolynomial);
    }
    let mut roots = Vec::new();
    let shift = c.iter().take_while(|a| a.is_zero()).count();
    if shift > 0 {
        roots.push(Root::exact(Rational::zero()));
        c.drain(..shift);
    }
    let c = square_free(&c);
    let deg = c.len() - 1;
    let mut method = RootMethod::Exact;
    match deg {
        0 => {}
        1 => roots.push(Root::exact(-&c[0] / &c[1])),
        2 => {
            let (a, b, k) = (&c[2], &c[1], &c[0]);
            let disc = b * b - Rational::from_integer(BigInt::from(4)) * a * k;
            if let Some(s) = rational_sqrt(&disc) {
                let two_a = Rational::from_integer(BigInt::from(2)) * a;
                roots.push(Root::exact((-b + &s) / &two_a));
                roots.push(Root::exact((-b - &s) / &two_a));
            } else if !disc.is_negative() {
                method = RootMethod::Analytic;
                let (af, bf, d) = (rational::to_f64(a), rational::to_f64(b), rational::to_f64(&disc).sqrt());
                let q = -0.5 * (bf + bf.signum() * d);
                let kf = rational::to_f64(k);
                for r in [q / af, kf / q] {
                    roots.extend(finish(&c, Complex64::new(r, 0.0)));
                }
            }
        }
        _ => {
            let scaled = scaled_f64(&c);
            let approx = if deg <= 4 {
                method = RootMethod::Analytic;
                let z = if deg == 3 { cubic(&scaled) } else { quartic(&scaled) };
                polish_all(&scaled, z)
            } else {
                method = RootMethod::Aberth;
                aberth(&scaled, seed)?
            };
            for z in approx {
                roots.extend(finish(&c, z));
            }
        }
    }
    roots.retain(|r| r.value >= 0.0 || r.exactness == Exactness::Exact(Rational::zero()));
    roots.retain(|r| match &r.exactness {
        Exactness::Exact(q) => !q.is_negative(),
        _ => r.value >= 0.0,
    });
    roots.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    let mut out: Vec<Root> = Vec::new();
    for r in roots {
        if let Some(last) = out.last_mut() {
            let close = (r.value - last.value).abs() <= (r.radius() + last.radius()).max(1e-12 * r.value.abs().max(1.0));
            if close || (r.is_exact() && last.is_exact() && r.exactness == last.exactness) {
                if r.is_exact() && !last.is_exact() {
                    *last = r;
                }
                continue;
            }
        }
        out.push(r);
    }
    Ok(RootSet { roots: out, method })
}

fn trim(mut c: Vec<Rational>) -> Vec<Rational> {
    while c.len() > 1 && c.last().map_or(false, |a| a.is_zero()) {
        c.pop();
    }
    c
}

/// Quotient and remainder of ascending polynomials.
fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    if r.len() <= db {
        return (vec![Rational::zero()], trim(r));
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let t = &r[k + db] / &b[db];
        for (i, bi) in b.iter().enumerate() {
            r[k + i] -= &t * bi;
        }
        q[k] = t;
    }
    r.truncate(db.max(1));
    (q, trim(r))
}

fn poly_gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !(b.len() == 1 && b[0].is_zero()) {
        let (_, r) = poly_divmod(&a, &b);
        a = b;
        b = r;
    }
    let lead = a.last().unwrap().clone();
    a.iter().map(|x| x / &lead).collect()
}

/// Same roots, each simple: `p / gcd(p, p')`.
fn square_free(c: &[Rational]) -> Vec<Rational> {
    // exact remainder sequences blow up on float-derived coefficients
    let bits = c.iter().map(|a| a.numer().bits().max(a.denom().bits())).max().unwrap_or(0);
    if c.len() <= 2 || bits > 64 {
        return c.to_vec();
    }
    let d: Vec<Rational> = c.iter().enumerate().skip(1).map(|(i, a)| a * Rational::from_integer(BigInt::from(i))).collect();
    let g = poly_gcd(c, &d);
    if g.len() == 1 {
        return c.to_vec();
    }
    poly_divmod(c, &g).0
}

fn scaled_f64(c: &[Rational]) -> Vec<f64> {
    let top = c.iter().map(|a| a.abs()).max().unwrap();
    c.iter().map(|a| rational::to_f64(&(a / &top))).collect()
}

/// Turns a complex approximation into a real root, exact if a small-denominator rational fits.
fn finish(c: &[Rational], z: Complex64) -> Option<Root> {
    let scale = z.norm().max(1.0);
    if z.im.abs() > 1e-6 * scale || z.re < -1e-9 * scale {
        return None;
    }
    let f = scaled_f64(c);
    let mut x = z.re;
    for _ in 0..50 {
        let (p, dp, _) = horner(&f, x);
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let next = x - p / dp;
        if !next.is_finite() || (next - x).abs() > 0.5 * scale {
            break;
        }
        let (pn, _, _) = horner(&f, next);
        if pn.abs() >= p.abs() {
            break;
        }
        x = next;
    }
    for d in 1..=64i64 {
        let cand = (x * d as f64).round();
        if (cand / d as f64 - x).abs() > 1e-6 * scale {
            continue;
        }
        if let Some(n) = rational::from_f64(cand) {
            let q = n / rational::int(d);
            if horner_exact(c, &q).is_zero() {
                return Some(Root::exact(q));
            }
        }
    }
    if x < 0.0 {
        return None;
    }
    let (p, dp, mag) = horner(&f, x);
    let n = (c.len() - 1) as f64;
    let newton = if dp != 0.0 { n * (p / dp).abs() } else { f64::INFINITY };
    let lead = f.last().unwrap().abs();
    let cluster = (n * p.abs() / lead).powf(1.0 / n);
    let radius = newton.min(cluster).max(4.0 * f64::EPSILON * scale).max(1e-12 * scale);
    if mag > 0.0 && p.abs() / mag > 1e-9 && radius > 1e-3 * scale {
        return None;
    }
    Some(Root { value: x, exactness: Exactness::Approx { radius } })
}

fn polish_all(c: &[f64], zs: Vec<Complex64>) -> Vec<Complex64> {
    zs.into_iter()
        .map(|mut z| {
            for _ in 0..20 {
                let (p, dp) = horner_c(c, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let next = z - p / dp;
                if !next.re.is_finite() || horner_c(c, next).0.norm() >= p.norm() {
                    break;
                }
                z = next;
            }
            z
        })
        .collect()
}

fn cubic(c: &[f64]) -> Vec<Complex64> {
    let (a, b, cc, d) = (c[3], c[2], c[1], c[0]);
    let (b, cc, d) = (b / a, cc / a, d / a);
    let p = cc - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let mut u = (Complex64::new(-q / 2.0, 0.0) + disc).cbrt();
    if u.norm() < 1e-300 {
        u = (Complex64::new(-q / 2.0, 0.0) - disc).cbrt();
    }
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    (0..3)
        .map(|k| {
            let uk = u * omega.powu(k);
            let vk = if uk.norm() < 1e-300 { Complex64::zero() } else { -p / (3.0 * uk) };
            uk + vk - b / 3.0
        })
        .collect()
}

fn quartic(c: &[f64]) -> Vec<Complex64> {
    let a = c[4];
    let (b, cc, d, e) = (c[3] / a, c[2] / a, c[1] / a, c[0] / a);
    // depressed quartic y^4 + p y^2 + q y + r with x = y - b/4
    let p = cc - 3.0 * b * b / 8.0;
    let q = d - b * cc / 2.0 + b * b * b / 8.0;
    let r = e - b * d / 4.0 + b * b * cc / 16.0 - 3.0 * b.powi(4) / 256.0;
    let shift = -b / 4.0;
    if q.abs() < 1e-14 * (1.0 + p.abs() + r.abs()) {
        let s = Complex64::new(p * p - 4.0 * r, 0.0).sqrt();
        let mut out = Vec::new();
        for z2 in [(-p + s) / 2.0, (-p - s) / 2.0] {
            let z = Complex64::from(z2).sqrt();
            out.push(z + shift);
            out.push(-z + shift);
        }
        return out;
    }
    // resolvent cubic m^3 + p m^2 + (p^2/4 - r) m - q^2/8 = 0
    let res = cubic(&[-q * q / 8.0, p * p / 4.0 - r, p, 1.0]);
    let m = res
        .into_iter()
        .max_by(|x, y| {
            let score = |z: &Complex64| if z.im.abs() < 1e-9 * z.norm().max(1.0) { z.re } else { f64::NEG_INFINITY };
            score(x).partial_cmp(&score(y)).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    let s = (2.0 * m).sqrt();
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let t = sign * s;
        let disc = (-(2.0 * Complex64::from(p) + 2.0 * m) - sign * 2.0 * q / s).sqrt() / 2.0;
        out.push(t / 2.0 + disc + shift);
        out.push(t / 2.0 - disc + shift);
    }
    out
}

fn aberth(c: &[f64], seed: u64) -> Result<Vec<Complex64>, RootError> {
    let n = c.len() - 1;
    let lead = c[n];
    let bound = (0..n)
        .map(|i| (c[i] / lead).abs().powf(1.0 / (n - i) as f64))
        .fold(0.0f64, f64::max)
        * 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: f64 = rng.gen_range(0.1..0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * (k as f64 + offset) / n as f64;
            Complex64::from_polar(bound.max(1e-3) * 0.7, theta)
        })
        .collect();
    for _ in 0..2000 {
        let mut worst = 0.0f64;
        for k in 0..n {
            let (p, dp) = horner_c(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let w = ratio / (Complex64::one() - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[k] -= w;
            worst = worst.max(w.norm() / z[k].norm().max(1.0));
        }
        if worst < 1e-15 {
            return Ok(polish_all(c, z));
        }
    }
    let ok = z.iter().all(|&zk| {
        let (p, _) = horner_c(c, zk);
        let mag: f64 = c.iter().rev().fold(0.0, |acc, a| acc * zk.norm() + a.abs());
        p.norm() <= 1e-9 * mag
    });
    if ok {
        Ok(polish_all(c, z))
    } else {
        Err(RootError::NoConvergence)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    /// The true root lies left of the approximation.
    ExactIsLeft,
    ExactIsRight,
}

/// Locates the true root relative to `x` from `f(x)` and `f(x + kappa)`.
pub fn classify_position(f: &Compiled, x: f64, kappa: f64) -> Position {
    let e = f.eval(x);
    let e2 = f.eval(x + kappa);
    if e == 0.0 {
        return Position::ExactIsLeft;
    }
    match (e < 0.0, e2 >= e) {
        (true, true) | (false, false) => Position::ExactIsRight,
        (false, true) | (true, false) => Position::ExactIsLeft,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequiredSide {
    /// The true root must be at or below the returned point.
    RootAtOrBelow,
    /// The true root must be at or above the returned point.
    RootAtOrAbove,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SafeRootConfig {
    pub kappa: f64,
    pub delta: f64,
    pub max_iterations: u32,
}

impl Default for SafeRootConfig {
    fn default() -> Self {
        SafeRootConfig { kappa: 1e-3, delta: 1.0 / 64.0, max_iterations: 4096 }
    }
}

/// Moves an approximate root of `f` in steps of `delta` until it sits on the required side.
///
/// `f` must be positive on the interval the root delimits: right of it for
/// `RootAtOrBelow`, left of it for `RootAtOrAbove`.
pub fn safe_root(f: &Compiled, x_approx: f64, side: RequiredSide, cfg: &SafeRootConfig) -> Result<f64, RootError> {
    let pos = classify_position(f, x_approx, cfg.kappa);
    let step = match (side, pos) {
        (RequiredSide::RootAtOrBelow, Position::ExactIsRight) => cfg.delta,
        (RequiredSide::RootAtOrAbove, Position::ExactIsLeft) => -cfg.delta,
        _ => return Ok(x_approx),
    };
    let mut x = x_approx;
    let mut iters = 0;
    while !(f.eval(x) > 0.0) {
        iters += 1;
        if iters > cfg.max_iterations {
            return Err(RootError::IterationLimit(cfg.max_iterations));
        }
        x += step;
        if x < 0.0 {
            return Ok(x);
        }
    }
    if iters > 0 {
        let df = differentiate(f.expr(), f.var()).ok().map(|d| Compiled::new(&d, f.var()));
        let slope = |t: f64| match &df {
            Some(d) => d.eval(t),
            None => (f.eval(t + 1e-6) - f.eval(t - 1e-6)) / 2e-6,
        };
        let signs = [slope(x_approx), slope(x), slope(0.5 * (x + x_approx))];
        let same = signs.iter().all(|s| *s > 0.0) || signs.iter().all(|s| *s < 0.0);
        if !same {
            return Err(RootError::MonotonicityUnverified);
        }
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Lower,
    Upper,
}

/// Natural endpoint inside the safe real endpoint: ceiling for lower ends, floor for upper ends.
pub fn nat_snap(x: f64, end: Endpoint) -> Option<u64> {
    match end {
        Endpoint::Lower => Some(x.max(0.0).ceil() as u64),
        Endpoint::Upper => (x >= 0.0).then(|| x.floor() as u64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rational::int(x)).collect()
    }

    #[test]
    fn repeated_roots_are_separated() {
        // (x - 58)(x - 1)^3
        let r = poly_roots(&q(&[-58, 175, -177, 61, -1].map(|v| -v))).unwrap();
        let vals: Vec<f64> = r.roots.iter().map(|z| z.value).collect();
        assert_eq!(vals, vec![1.0, 58.0]);
        assert!(r.roots.iter().all(|z| z.is_exact()));
    }

    #[test]
    fn quadratic_exact() {
        let rs = poly_roots(&q(&[-2, 3, -1])).unwrap();
        assert_eq!(rs.roots, vec![Root::exact(rational::int(1)), Root::exact(rational::int(2))]);
    }

    #[test]
    fn irrational_root() {
        let rs = poly_roots(&q(&[-2, 0, 1])).unwrap();
        assert_eq!(rs.roots.len(), 1);
        assert!((rs.roots[0].value - 2f64.sqrt()).abs() < 1e-12);
        assert!(!rs.roots[0].is_exact());
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(poly_roots(&q(&[0, 0])), Err(RootError::ZeroPolynomial));
        assert!(poly_roots(&q(&[5])).unwrap().roots.is_empty());
        assert!(poly_roots(&q(&[1, 0, 1])).unwrap().roots.is_empty());
    }

    #[test]
    fn higher_degrees() {
        // (x-1)(x-2)(x-3)(x-4)(x-5)(x+1)
        let c = q(&[-120, 154, 49, -140, 70, -14, 1]);
        let rs = poly_roots(&c).unwrap();
        let vals: Vec<f64> = rs.roots.iter().map(|r| r.value).collect();
        assert_eq!(vals, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(rs.roots.iter().all(|r| r.is_exact()));
        // x^3 - 2 and (x^2-2)(x^2-3)
        let rs = poly_roots(&q(&[-2, 0, 0, 1])).unwrap();
        assert!((rs.roots[0].value - 2f64.cbrt()).abs() < 1e-12);
        let rs = poly_roots(&q(&[6, 0, -5, 0, 1])).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert!((rs.roots[1].value - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn position_cases() {
        let f = Compiled::new(&parse_expr("x - 2").unwrap(), "x");
        assert_eq!(classify_position(&f, 1.9, 1e-3), Position::ExactIsRight);
        assert_eq!(classify_position(&f, 2.1, 1e-3), Position::ExactIsLeft);
        assert_eq!(classify_position(&f, 2.0, 1e-3), Position::ExactIsLeft);
        let g = Compiled::new(&parse_expr("2 - x").unwrap(), "x");
        assert_eq!(classify_position(&g, 1.9, 1e-3), Position::ExactIsRight);
        assert_eq!(classify_position(&g, 2.1, 1e-3), Position::ExactIsLeft);
    }

    #[test]
    fn safe_root_steps_past_linear_root() {
        let f = Compiled::new(&parse_expr("x - 2").unwrap(), "x");
        let cfg = SafeRootConfig::default();
        let x = safe_root(&f, 1.95, RequiredSide::RootAtOrBelow, &cfg).unwrap();
        assert!(x > 2.0 && x - cfg.delta <= 2.0);
        assert_eq!(safe_root(&f, 2.3, RequiredSide::RootAtOrBelow, &cfg).unwrap(), 2.3);
    }

    #[test]
    fn snapping() {
        assert_eq!(nat_snap(10.18, Endpoint::Upper), Some(10));
        assert_eq!(nat_snap(10.18, Endpoint::Lower), Some(11));
        assert_eq!(nat_snap(4.0, Endpoint::Upper), Some(4));
        assert_eq!(nat_snap(4.0, Endpoint::Lower), Some(4));
        assert_eq!(nat_snap(-0.5, Endpoint::Upper), None);
    }
}
