//! Sparse multivariate polynomials with exact rational coefficients.

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

pub use parse::parse_polynomial;

/// Exponent vector of a monomial. Ordered graded-lexicographically: total degree first,
/// then lexicographically on the exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index `e_var`.
    pub fn unit(n: usize, var: usize) -> Self {
        let mut e = vec![0; n];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn with(&self, var: usize, exp: u32) -> MultiIndex {
        let mut e = self.0.clone();
        e[var] = exp;
        MultiIndex(e)
    }

    /// All indices in `n` variables with total degree at most `max_degree`, in graded-lex order.
    pub fn all_up_to(n: usize, max_degree: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut level = Vec::new();
            let mut cur = vec![0u32; n];
            compositions(n, d, 0, &mut cur, &mut level);
            level.sort();
            out.extend(level.into_iter().map(MultiIndex));
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

fn compositions(n: usize, remaining: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(cur.clone());
        return;
    }
    for k in 0..=remaining {
        cur[pos] = k;
        compositions(n, remaining - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `n_vars` variables; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    n_vars: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

impl Polynomial {
    pub fn zero(n_vars: usize) -> Self {
        Polynomial { n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, c: BigRational) -> Self {
        let mut p = Polynomial::zero(n_vars);
        p.add_term(MultiIndex::zero(n_vars), c);
        p
    }

    pub fn one(n_vars: usize) -> Self {
        Polynomial::constant(n_vars, BigRational::one())
    }

    /// The coordinate polynomial `x_{var+1}` (0-based `var`).
    pub fn var(n_vars: usize, var: usize) -> Self {
        Polynomial::monomial(MultiIndex::unit(n_vars, var), BigRational::one())
    }

    pub fn monomial(alpha: MultiIndex, c: BigRational) -> Self {
        let mut p = Polynomial::zero(alpha.len());
        p.add_term(alpha, c);
        p
    }

    pub fn from_terms(n_vars: usize, terms: impl IntoIterator<Item = (MultiIndex, BigRational)>) -> Result<Self> {
        let mut p = Polynomial::zero(n_vars);
        for (alpha, c) in terms {
            if alpha.len() != n_vars {
                return Err(Error::DimensionMismatch { expected: n_vars, found: alpha.len() });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// Builds a polynomial from `f64` coefficients, converted exactly.
    pub fn from_f64_terms(n_vars: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        Polynomial::from_terms(n_vars, terms.into_iter().map(|(a, c)| (a, numeric::from_f64(c))))
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> BigRational {
        self.terms.get(alpha).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| a.degree()).max().unwrap_or(0)
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|a| a.get(var)).max().unwrap_or(0)
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|a| a.get(var) > 0)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same(&self, other: &Polynomial) -> Result<()> {
        if self.n_vars != other.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: other.n_vars });
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_same(other)?;
        let mut out = Polynomial::zero(self.n_vars);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                out.add_term(a.add(b), c * d);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::one(self.n_vars);
        for _ in 0..k {
            out = out.mul(self).expect("same dimension");
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.n_vars);
        }
        Polynomial {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(a, x)| (a.clone(), x * c)).collect(),
        }
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-BigRational::one())
    }

    /// Floating-point evaluation at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: x.len() });
        }
        Ok(self.to_f64_terms().eval(x))
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate_exact(&self, x: &[BigRational]) -> Result<BigRational> {
        if x.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: x.len() });
        }
        let mut acc = BigRational::zero();
        for (a, c) in &self.terms {
            let mut t = c.clone();
            for (&e, xi) in a.exponents().iter().zip(x) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Coefficients rounded to `f64`, for repeated fast evaluation.
    pub fn to_f64_terms(&self) -> F64Polynomial {
        F64Polynomial {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.exponents().to_vec(), numeric::to_f64(c)))
                .collect(),
        }
    }

    /// `q(y) = p(scale ⊙ y + shift)`, exactly.
    pub fn substitute_affine(&self, scale: &[BigRational], shift: &[BigRational]) -> Result<Polynomial> {
        for v in [scale.len(), shift.len()] {
            if v != self.n_vars {
                return Err(Error::DimensionMismatch { expected: self.n_vars, found: v });
            }
        }
        if let Some(index) = scale.iter().position(|s| s.is_zero()) {
            return Err(Error::ZeroScale { index });
        }
        let n = self.n_vars;
        // powers[i][k] = (scale_i y_i + shift_i)^k
        let powers: Vec<Vec<Polynomial>> = (0..n)
            .map(|i| {
                let lin = Polynomial::var(n, i)
                    .scale(&scale[i])
                    .add(&Polynomial::constant(n, shift[i].clone()))
                    .unwrap();
                let mut v = vec![Polynomial::one(n)];
                for k in 1..=self.degree_in(i) as usize {
                    let next = v[k - 1].mul(&lin).unwrap();
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(n);
        for (a, c) in &self.terms {
            let mut t = Polynomial::constant(n, c.clone());
            for (i, &e) in a.exponents().iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[i][e as usize]).unwrap();
                }
            }
            for (b, d) in t.terms {
                out.add_term(b, d);
            }
        }
        Ok(out)
    }

    /// `∫_{lower}^{upper} p dx_var`, where the bounds may depend on the other variables.
    pub fn definite_integrate(&self, var: usize, lower: &Polynomial, upper: &Polynomial) -> Result<Polynomial> {
        self.check_same(lower)?;
        self.check_same(upper)?;
        if var >= self.n_vars {
            return Err(Error::VariableOutOfRange { index: var + 1, n_vars: self.n_vars });
        }
        if lower.involves(var) || upper.involves(var) {
            return Err(Error::BoundDependsOnVariable { var: var + 1 });
        }
        let max_k = self.degree_in(var) as usize + 1;
        let up = powers_of(upper, max_k);
        let lo = powers_of(lower, max_k);
        let mut out = Polynomial::zero(self.n_vars);
        // group terms by the exponent of `var`
        let mut by_power: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (a, c) in &self.terms {
            let k = a.get(var);
            by_power
                .entry(k)
                .or_insert_with(|| Polynomial::zero(self.n_vars))
                .add_term(a.with(var, 0), c.clone());
        }
        for (k, rest) in by_power {
            let k = k as usize;
            let diff = up[k + 1].sub(&lo[k + 1])?;
            let factor = BigRational::new(BigInt::one(), BigInt::from(k + 1));
            let t = rest.mul(&diff)?.scale(&factor);
            for (b, d) in t.terms {
                out.add_term(b, d);
            }
        }
        Ok(out)
    }

    /// Exact partial derivative with respect to `var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.n_vars);
        for (a, c) in &self.terms {
            let k = a.get(var);
            if k > 0 {
                out.add_term(a.with(var, k - 1), c * BigRational::from_integer(BigInt::from(k)));
            }
        }
        out
    }

    /// Largest Euclidean norm of the gradient over the given points.
    pub fn gradient_norm_samples(&self, points: &[Vec<f64>]) -> Result<f64> {
        if points.is_empty() {
            return Err(Error::EmptyPoints);
        }
        let grads: Vec<F64Polynomial> = (0..self.n_vars).map(|i| self.derivative(i).to_f64_terms()).collect();
        let mut best = 0.0f64;
        for x in points {
            if x.len() != self.n_vars {
                return Err(Error::DimensionMismatch { expected: self.n_vars, found: x.len() });
            }
            let norm = grads.iter().map(|g| g.eval(x).powi(2)).sum::<f64>().sqrt();
            best = best.max(norm);
        }
        Ok(best)
    }

    /// Restricts `x_var = value` exactly, keeping the variable count.
    pub fn fix_variable(&self, var: usize, value: &BigRational) -> Polynomial {
        let mut out = Polynomial::zero(self.n_vars);
        for (a, c) in &self.terms {
            let k = a.get(var);
            out.add_term(a.with(var, 0), c * num_traits::pow(value.clone(), k as usize));
        }
        out
    }
}

fn powers_of(p: &Polynomial, max_k: usize) -> Vec<Polynomial> {
    let mut v = vec![Polynomial::one(p.n_vars)];
    for k in 1..=max_k {
        let next = v[k - 1].mul(p).unwrap();
        v.push(next);
    }
    v
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.terms.iter().rev().enumerate() {
            let negative = c < &BigRational::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = a
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| if e == 1 { format!("x{}", v + 1) } else { format!("x{}^{}", v + 1, e) })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", numeric::format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", numeric::format_rational(&mag), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Floating-point view of a polynomial for hot evaluation loops.
#[derive(Clone, Debug)]
pub struct F64Polynomial {
    n_vars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl F64Polynomial {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| {
                a.iter()
                    .zip(x)
                    .fold(*c, |acc, (&e, &xi)| if e == 0 { acc } else { acc * xi.powi(e as i32) })
            })
            .sum()
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    exp: Vec<u32>,
    coef: String,
}

#[derive(Serialize, Deserialize)]
struct JsonPolynomial {
    n: usize,
    terms: Vec<JsonTerm>,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JsonPolynomial {
            n: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| JsonTerm { exp: a.exponents().to_vec(), coef: numeric::format_rational(c) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = JsonPolynomial::deserialize(d)?;
        if raw.n == 0 {
            return Err(D::Error::custom("polynomial needs at least one variable"));
        }
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let c = numeric::parse_rational(&t.coef).map_err(D::Error::custom)?;
            terms.push((MultiIndex::new(t.exp), c));
        }
        Polynomial::from_terms(raw.n, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn parse(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n).unwrap()
    }

    #[test]
    fn graded_lex_order() {
        let basis = MultiIndex::all_up_to(2, 2);
        let exps: Vec<_> = basis.iter().map(|a| a.exponents().to_vec()).collect();
        assert_eq!(exps, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(MultiIndex::all_up_to(2, 12).len(), 91);
        assert_eq!(MultiIndex::all_up_to(10, 3).len(), 286);
    }

    #[test]
    fn arithmetic_examples() {
        let x1 = Polynomial::var(2, 0);
        assert_eq!(x1.mul(&x1).unwrap(), parse("x1^2", 2));
        let s = parse("x1+x2", 2);
        assert_eq!(s.pow(2), parse("x1^2+2*x1*x2+x2^2", 2));
        let d = parse("x1-1", 1).mul(&parse("x1+1", 1)).unwrap();
        assert_eq!(d, parse("x1^2-1", 1));
        assert_eq!(parse("x1^3+x2", 2).mul(&parse("x2^2+1", 2)).unwrap().degree(), 5);
        assert!(x1.add(&Polynomial::var(3, 0)).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let motzkin = parse("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1", 2);
        assert_eq!(motzkin.evaluate(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(motzkin.evaluate(&[-1.0, 1.0]).unwrap(), 0.0);
        let booth = parse("(x1+2*x2-7)^2+(2*x1+x2-5)^2", 2);
        assert_eq!(booth.evaluate(&[1.0, 3.0]).unwrap(), 0.0);
        assert_eq!(Polynomial::zero(3).evaluate(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(booth.evaluate(&[1.0]).is_err());
    }

    #[test]
    fn affine_substitution() {
        let p = parse("x1^2", 1);
        assert_eq!(p.substitute_affine(&[q(2, 1)], &[q(0, 1)]).unwrap(), parse("4*x1^2", 1));
        let p = parse("x1", 1);
        assert_eq!(p.substitute_affine(&[q(1, 1)], &[q(-1, 1)]).unwrap(), parse("x1-1", 1));
        assert_eq!(p.substitute_affine(&[q(0, 1)], &[q(0, 1)]), Err(Error::ZeroScale { index: 0 }));

        let matyas = parse("0.26*(x1^2+x2^2)-0.48*x1*x2", 2);
        let modified = parse("0.26*((20*x1-10)^2+(20*x2-10)^2)-0.48*(20*x1-10)*(20*x2-10)", 2);
        let s = [q(20, 1), q(20, 1)];
        let t = [q(-10, 1), q(-10, 1)];
        assert_eq!(matyas.substitute_affine(&s, &t).unwrap(), modified);
    }

    #[test]
    fn integration_examples() {
        let n = 2;
        let zero = Polynomial::zero(n);
        let one = Polynomial::one(n);
        let r = parse("x1*x2", 2).definite_integrate(1, &zero, &one).unwrap();
        assert_eq!(r, parse("x1/2", 2));
        let upper = parse("1-x1", 2);
        let r = Polynomial::constant(2, q(2, 1)).definite_integrate(1, &zero, &upper).unwrap();
        assert_eq!(r, parse("2-2*x1", 2));
        let r = parse("3*x1^2", 1).definite_integrate(0, &Polynomial::zero(1), &Polynomial::one(1)).unwrap();
        assert_eq!(r, Polynomial::one(1));
        assert_eq!(
            parse("x1", 2).definite_integrate(1, &zero, &parse("x2", 2)),
            Err(Error::BoundDependsOnVariable { var: 2 })
        );
    }

    #[test]
    fn gradient_norms() {
        let p = parse("x1", 2);
        assert_eq!(p.gradient_norm_samples(&[vec![0.3, 0.2], vec![5.0, 1.0]]).unwrap(), 1.0);
        let p = parse("x1^2+x2^2", 2);
        assert!((p.gradient_norm_samples(&[vec![1.0, 1.0]]).unwrap() - 8f64.sqrt()).abs() < 1e-14);
        let booth = parse("(x1+2*x2-7)^2+(2*x1+x2-5)^2", 2);
        let g = booth.gradient_norm_samples(&[vec![10.0, 10.0]]).unwrap();
        assert!((g - (146f64.powi(2) + 142f64.powi(2)).sqrt()).abs() < 1e-9);
        assert!((g - 203.666).abs() < 1e-3);
        assert_eq!(p.gradient_norm_samples(&[]), Err(Error::EmptyPoints));
    }

    #[test]
    fn json_form() {
        let p = parse("3/2*x1^2 - 0.25*x2 + 7", 2);
        let s = serde_json::to_string(&p).unwrap();
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let raw = r#"{"n":2,"terms":[{"exp":[1,0],"coef":"1.05"},{"exp":[0,0],"coef":"-1/3"}]}"#;
        let p: Polynomial = serde_json::from_str(raw).unwrap();
        assert_eq!(p, parse("1.05*x1 - 1/3", 2));
        assert!(serde_json::from_str::<Polynomial>(r#"{"n":2,"terms":[{"exp":[1],"coef":"1"}]}"#).is_err());
    }
}
