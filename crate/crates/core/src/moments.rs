//! Exact Lebesgue moments of boxes, the standard simplex and the unit ball.
//!
//! Every moment of a given domain is a rational multiple of the same power of π
//! (`π^0` for boxes and simplices, `π^{⌊n/2⌋}` for the unit ball), so moments are stored as
//! the rational coefficient plus the domain-wide π exponent.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;
use crate::poly::{MultiIndex, Polynomial};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Axis-aligned box `∏ [lo_i, hi_i]`.
    Box { bounds: Vec<(BigRational, BigRational)> },
    /// Standard simplex `{x ≥ 0, Σ x_i ≤ 1}`.
    Simplex { n: usize },
    /// Unit Euclidean ball centred at the origin.
    Ball { n: usize },
}

/// A rational multiple of `π^pi_power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Moment {
    pub coef: BigRational,
    pub pi_power: u32,
}

impl Moment {
    pub fn to_f64(&self) -> f64 {
        numeric::to_f64(&self.coef) * std::f64::consts::PI.powi(self.pi_power as i32)
    }
}

impl Domain {
    pub fn new_box(bounds: Vec<(BigRational, BigRational)>) -> Result<Domain> {
        if bounds.is_empty() {
            return Err(Error::InvalidDomain("box needs at least one coordinate".into()));
        }
        if let Some(i) = bounds.iter().position(|(lo, hi)| lo >= hi) {
            return Err(Error::InvalidDomain(format!("box coordinate {} has lo >= hi", i + 1)));
        }
        Ok(Domain::Box { bounds })
    }

    /// The box `[lo, hi]^n` with decimal or `p/q` endpoints.
    pub fn cube(n: usize, lo: &str, hi: &str) -> Result<Domain> {
        let lo = numeric::parse_rational(lo)?;
        let hi = numeric::parse_rational(hi)?;
        Domain::new_box(vec![(lo, hi); n])
    }

    pub fn simplex(n: usize) -> Result<Domain> {
        if n == 0 {
            return Err(Error::InvalidDomain("simplex dimension must be >= 1".into()));
        }
        Ok(Domain::Simplex { n })
    }

    pub fn ball(n: usize) -> Result<Domain> {
        if n == 0 {
            return Err(Error::InvalidDomain("ball dimension must be >= 1".into()));
        }
        Ok(Domain::Ball { n })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { bounds } => bounds.len(),
            Domain::Simplex { n } | Domain::Ball { n } => *n,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Domain::Box { .. } => "box",
            Domain::Simplex { .. } => "simplex",
            Domain::Ball { .. } => "ball",
        }
    }

    pub fn pi_power(&self) -> u32 {
        match self {
            Domain::Ball { n } => (*n / 2) as u32,
            _ => 0,
        }
    }

    pub fn bounds_f64(&self) -> Vec<(f64, f64)> {
        match self {
            Domain::Box { bounds } => bounds
                .iter()
                .map(|(lo, hi)| (numeric::to_f64(lo), numeric::to_f64(hi)))
                .collect(),
            Domain::Simplex { n } => vec![(0.0, 1.0); *n],
            Domain::Ball { n } => vec![(-1.0, 1.0); *n],
        }
    }

    /// Membership test with absolute slack `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Box { .. } => self
                .bounds_f64()
                .iter()
                .zip(x)
                .all(|(&(lo, hi), &xi)| xi >= lo - tol && xi <= hi + tol),
            Domain::Simplex { .. } => x.iter().all(|&xi| xi >= -tol) && x.iter().sum::<f64>() <= 1.0 + tol,
            Domain::Ball { .. } => x.iter().map(|v| v * v).sum::<f64>() <= 1.0 + tol,
        }
    }

    /// Squared diameter `max ‖x − y‖²`.
    pub fn squared_diameter(&self) -> f64 {
        match self {
            Domain::Box { .. } => self.bounds_f64().iter().map(|(lo, hi)| (hi - lo).powi(2)).sum(),
            Domain::Simplex { n } => {
                if *n == 1 {
                    1.0
                } else {
                    2.0
                }
            }
            Domain::Ball { .. } => 4.0,
        }
    }

    /// Minimal width: smallest distance between parallel supporting hyperplanes.
    ///
    /// For the standard simplex the width in a unit direction `u` is
    /// `max(0, max u_i) − min(0, min u_i)`, minimised by `u = (1, …, 1)/√n`, giving `1/√n`.
    pub fn min_width(&self) -> f64 {
        match self {
            Domain::Box { .. } => self
                .bounds_f64()
                .iter()
                .map(|(lo, hi)| hi - lo)
                .fold(f64::INFINITY, f64::min),
            Domain::Simplex { n } => 1.0 / (*n as f64).sqrt(),
            Domain::Ball { .. } => 2.0,
        }
    }

    pub fn volume(&self) -> Moment {
        self.moment(&MultiIndex::zero(self.dim())).expect("dimension matches")
    }

    /// `m_α = ∫_K x^α dx`.
    pub fn moment(&self, alpha: &MultiIndex) -> Result<Moment> {
        if alpha.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: alpha.len() });
        }
        let coef = match self {
            Domain::Box { bounds } => bounds
                .iter()
                .zip(alpha.exponents())
                .map(|((lo, hi), &a)| box_moment_1d(lo, hi, a))
                .fold(BigRational::one(), |acc, m| acc * m),
            Domain::Simplex { n } => {
                let num = alpha
                    .exponents()
                    .iter()
                    .fold(BigInt::one(), |acc, &a| acc * numeric::factorial(a as u64));
                let den = numeric::factorial(alpha.degree() as u64 + *n as u64);
                BigRational::new(num, den)
            }
            Domain::Ball { n } => ball_moment_coef(*n, alpha),
        };
        Ok(Moment { coef, pi_power: self.pi_power() })
    }

    /// All moments with `|α| ≤ max_degree`.
    pub fn moment_table(&self, max_degree: u32) -> BTreeMap<MultiIndex, Moment> {
        MultiIndex::all_up_to(self.dim(), max_degree)
            .into_iter()
            .map(|a| {
                let m = self.moment(&a).unwrap();
                (a, m)
            })
            .collect()
    }

    /// `∫_K p dx`, exactly.
    pub fn integrate_poly(&self, p: &Polynomial) -> Result<Moment> {
        if p.n_vars() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.n_vars() });
        }
        let mut acc = BigRational::zero();
        for (a, c) in p.terms() {
            acc += c * self.moment(a)?.coef;
        }
        Ok(Moment { coef: acc, pi_power: self.pi_power() })
    }
}

fn box_moment_1d(lo: &BigRational, hi: &BigRational, a: u32) -> BigRational {
    let k = a as usize + 1;
    (num_traits::pow(hi.clone(), k) - num_traits::pow(lo.clone(), k)) / BigRational::from_integer(BigInt::from(k))
}

/// Rational coefficient of the unit-ball moment, using the Gamma-function form
/// `π^{n/2} ∏(α_i − 1)!! / (Γ(1 + (n+|α|)/2) 2^{|α|/2})`.
fn ball_moment_coef(n: usize, alpha: &MultiIndex) -> BigRational {
    if alpha.exponents().iter().any(|a| a % 2 == 1) {
        return BigRational::zero();
    }
    let total = alpha.degree() as i64;
    let prod = alpha
        .exponents()
        .iter()
        .fold(BigInt::one(), |acc, &a| acc * numeric::double_factorial(a as i64 - 1));
    let pow2_half = BigInt::one() << (total / 2) as usize;
    let k = n as i64 + total;
    if k % 2 == 0 {
        // Γ(1 + k/2) = (k/2)!
        BigRational::new(prod, numeric::factorial((k / 2) as u64) * pow2_half)
    } else {
        // Γ(1 + k/2) = k!! √π / 2^{(k+1)/2}; one √π cancels against π^{n/2}.
        BigRational::new(prod * (BigInt::one() << ((k + 1) / 2) as usize), numeric::double_factorial(k) * pow2_half)
    }
}

/// Memoized moment lookups up to a fixed degree, safe to share across threads.
#[derive(Debug)]
pub struct MomentTable {
    domain: Domain,
    max_degree: u32,
    cache: RwLock<HashMap<MultiIndex, BigRational>>,
}

impl MomentTable {
    pub fn new(domain: &Domain, max_degree: u32) -> Self {
        MomentTable { domain: domain.clone(), max_degree, cache: RwLock::new(HashMap::new()) }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Rational coefficient of `m_α`; the π power is `domain().pi_power()`.
    pub fn get(&self, alpha: &MultiIndex) -> Result<BigRational> {
        if alpha.degree() > self.max_degree {
            return Err(Error::InsufficientDegree {
                needed: alpha.degree() as usize,
                available: self.max_degree as usize,
            });
        }
        if let Some(m) = self.cache.read().unwrap().get(alpha) {
            return Ok(m.clone());
        }
        let m = self.domain.moment(alpha)?.coef;
        self.cache.write().unwrap().insert(alpha.clone(), m.clone());
        Ok(m)
    }

    pub fn integrate(&self, p: &Polynomial) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (a, c) in p.terms() {
            acc += c * self.get(a)?;
        }
        Ok(acc)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum DomainJson {
    Box { bounds: Vec<(serde_json::Value, serde_json::Value)> },
    Simplex { n: usize },
    Ball { n: usize },
}

fn json_rational(v: &serde_json::Value) -> Result<BigRational> {
    match v {
        serde_json::Value::String(s) => numeric::parse_rational(s),
        serde_json::Value::Number(n) => numeric::parse_rational(&n.to_string()),
        other => Err(Error::InvalidRational(other.to_string())),
    }
}

impl Serialize for Domain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let json = match self {
            Domain::Box { bounds } => DomainJson::Box {
                bounds: bounds
                    .iter()
                    .map(|(lo, hi)| {
                        (
                            serde_json::Value::String(numeric::format_rational(lo)),
                            serde_json::Value::String(numeric::format_rational(hi)),
                        )
                    })
                    .collect(),
            },
            Domain::Simplex { n } => DomainJson::Simplex { n: *n },
            Domain::Ball { n } => DomainJson::Ball { n: *n },
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match DomainJson::deserialize(d)? {
            DomainJson::Box { bounds } => {
                let mut out = Vec::with_capacity(bounds.len());
                for (lo, hi) in &bounds {
                    out.push((json_rational(lo).map_err(D::Error::custom)?, json_rational(hi).map_err(D::Error::custom)?));
                }
                Domain::new_box(out).map_err(D::Error::custom)
            }
            DomainJson::Simplex { n } => Domain::simplex(n).map_err(D::Error::custom),
            DomainJson::Ball { n } => Domain::ball(n).map_err(D::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;
    use std::f64::consts::PI;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn simplex_moments() {
        let s = Domain::simplex(2).unwrap();
        assert_eq!(s.moment(&mi(&[0, 0])).unwrap().coef, q(1, 2));
        assert_eq!(s.moment(&mi(&[1, 0])).unwrap().coef, q(1, 6));
        // 2! 1! / 5!
        assert_eq!(s.moment(&mi(&[2, 1])).unwrap().coef, q(2, 120));
    }

    #[test]
    fn box_moments() {
        let b = Domain::cube(2, "0", "1").unwrap();
        assert_eq!(b.moment(&mi(&[3, 1])).unwrap().coef, q(1, 8));
        let b = Domain::cube(1, "-10", "10").unwrap();
        assert_eq!(b.moment(&mi(&[2])).unwrap().coef, q(2000, 3));
        assert_eq!(b.moment(&mi(&[3])).unwrap().coef, q(0, 1));
    }

    #[test]
    fn ball_moments_use_gamma_form() {
        let b = Domain::ball(2).unwrap();
        assert!((b.moment(&mi(&[2, 0])).unwrap().to_f64() - PI / 4.0).abs() < 1e-15);
        assert!((b.moment(&mi(&[0, 0])).unwrap().to_f64() - PI).abs() < 1e-15);
        assert_eq!(b.moment(&mi(&[1, 2])).unwrap().coef, q(0, 1));
        assert_eq!(b.moment(&mi(&[2, 3])).unwrap().coef, q(0, 1));
        // volumes: 2, π, 4π/3, π²/2, 8π²/15
        let vols = [2.0, PI, 4.0 * PI / 3.0, PI * PI / 2.0, 8.0 * PI * PI / 15.0];
        for (n, v) in vols.iter().enumerate() {
            let got = Domain::ball(n + 1).unwrap().volume().to_f64();
            assert!((got - v).abs() < 1e-14 * v, "n={} {got} vs {v}", n + 1);
        }
        // ∫_{B3} x1² = 4π/15
        let m = Domain::ball(3).unwrap().moment(&mi(&[2, 0, 0])).unwrap().to_f64();
        assert!((m - 4.0 * PI / 15.0).abs() < 1e-15);
    }

    #[test]
    fn tables() {
        let b = Domain::cube(1, "0", "1").unwrap();
        let t = b.moment_table(2);
        let vals: Vec<_> = t.values().map(|m| m.coef.clone()).collect();
        assert_eq!(vals, vec![q(1, 1), q(1, 2), q(1, 3)]);
        let s = Domain::simplex(2).unwrap().moment_table(1);
        assert_eq!(s[&mi(&[0, 0])].coef, q(1, 2));
        assert_eq!(s[&mi(&[1, 0])].coef, q(1, 6));
        assert_eq!(s[&mi(&[0, 1])].coef, q(1, 6));
        assert_eq!(Domain::simplex(2).unwrap().moment_table(46).len(), 1128);
    }

    #[test]
    fn integration() {
        let s = Domain::simplex(2).unwrap();
        assert_eq!(s.integrate_poly(&Polynomial::one(2)).unwrap().coef, q(1, 2));
        let b = Domain::cube(2, "0", "1").unwrap();
        assert_eq!(b.integrate_poly(&parse_polynomial("x1", 2).unwrap()).unwrap().coef, q(1, 2));
        let disk = Domain::ball(2).unwrap();
        let v = disk.integrate_poly(&parse_polynomial("x1^2+x2^2", 2).unwrap()).unwrap().to_f64();
        assert!((v - PI / 2.0).abs() < 1e-15);
        assert!(disk.integrate_poly(&Polynomial::one(3)).is_err());
    }

    #[test]
    fn table_enforces_degree() {
        let t = MomentTable::new(&Domain::simplex(2).unwrap(), 3);
        assert_eq!(t.get(&mi(&[1, 1])).unwrap(), q(1, 24));
        assert_eq!(t.get(&mi(&[1, 1])).unwrap(), q(1, 24));
        assert_eq!(t.get(&mi(&[2, 2])), Err(Error::InsufficientDegree { needed: 4, available: 3 }));
    }

    #[test]
    fn domain_json() {
        let d: Domain = serde_json::from_str(r#"{"kind":"box","bounds":[["0","1"],[-2.048,"2048/1000"]]}"#).unwrap();
        assert_eq!(d, Domain::new_box(vec![(q(0, 1), q(1, 1)), (q(-2048, 1000), q(2048, 1000))]).unwrap());
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<Domain>(&s).unwrap(), d);
        let d: Domain = serde_json::from_str(r#"{"kind":"ball","n":3}"#).unwrap();
        assert_eq!(d, Domain::Ball { n: 3 });
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"box","bounds":[["1","0"]]}"#).is_err());
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"simplex","n":0}"#).is_err());
    }

    #[test]
    fn min_width_of_simplex_matches_direction_search() {
        // brute-force over random unit directions
        use rand::{Rng, SeedableRng};
        for n in 1..=4usize {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(n as u64);
            let mut best = f64::INFINITY;
            for _ in 0..200_000 {
                let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                if rng.random::<f64>() < 0.3 {
                    u.iter_mut().for_each(|v| *v = v.abs());
                }
                let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                let hi = u.iter().fold(0.0f64, |a, &v| a.max(v)) / norm;
                let lo = u.iter().fold(0.0f64, |a, &v| a.min(v)) / norm;
                best = best.min(hi - lo);
            }
            let w = Domain::simplex(n).unwrap().min_width();
            assert!(best >= w - 1e-12, "n={n}: found width {best} below {w}");
            assert!(best <= w * 1.05, "n={n}: search {best} vs closed form {w}");
        }
    }
}
