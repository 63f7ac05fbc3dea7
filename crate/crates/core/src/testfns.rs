//! Benchmark corpus: classical test functions with their search domains and known minima.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::moments::Domain;
use crate::poly::{parse_polynomial, Polynomial};

const NAMES: [&str; 10] = [
    "booth",
    "matyas",
    "matyas-modified-b",
    "matyas-modified-s",
    "motzkin",
    "rosenbrock",
    "styblinski-tang",
    "three-hump-camel",
    "three-hump-camel-modified-b",
    "three-hump-camel-modified-s",
];

/// Root of `2x³ − 16x + 2.5 = 0` near `−2.9035`, to the published precision.
pub const STYBLINSKI_TANG_ARGMIN: f64 = -2.903534;
pub const STYBLINSKI_TANG_MIN_PER_DIM: f64 = -39.16599;

#[derive(Clone, Debug, Serialize)]
pub struct TestCase {
    pub name: &'static str,
    pub title: &'static str,
    pub source: String,
    pub n: usize,
    pub parametric: bool,
    #[serde(skip)]
    pub polynomial: Polynomial,
    pub domain: Domain,
    pub f_min: f64,
    pub minimizers: Vec<Vec<f64>>,
    /// Allowed `|f(minimizer) − f_min|`.
    pub min_tol: f64,
}

pub fn list() -> Vec<&'static str> {
    NAMES.to_vec()
}

pub fn is_parametric(name: &str) -> bool {
    matches!(name, "rosenbrock" | "styblinski-tang")
}

pub fn get(name: &str, n: Option<usize>) -> Result<TestCase> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let corners = vec![vec![h, h], vec![h, -h], vec![-h, h], vec![-h, -h]];
    let (title, source, dom, f_min, minimizers): (&str, String, Domain, f64, Vec<Vec<f64>>) = match name {
        "booth" => (
            "Booth",
            "(x1+2*x2-7)^2+(2*x1+x2-5)^2".into(),
            Domain::cube(2, "-10", "10")?,
            0.0,
            vec![vec![1.0, 3.0]],
        ),
        "matyas" => (
            "Matyas",
            "0.26*(x1^2+x2^2)-0.48*x1*x2".into(),
            Domain::cube(2, "-10", "10")?,
            0.0,
            vec![vec![0.0, 0.0]],
        ),
        "three-hump-camel" => (
            "Three-Hump Camel",
            "2*x1^2-1.05*x1^4+x1^6/6+x1*x2+x2^2".into(),
            Domain::cube(2, "-5", "5")?,
            0.0,
            vec![vec![0.0, 0.0]],
        ),
        "motzkin" => (
            "Motzkin",
            "x1^4*x2^2+x1^2*x2^4-3*x1^2*x2^2+1".into(),
            Domain::cube(2, "-2", "2")?,
            0.0,
            vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]],
        ),
        "styblinski-tang" => {
            let n = n.ok_or_else(|| Error::MissingDimension(name.into()))?;
            let src = (1..=n)
                .map(|i| format!("0.5*x{i}^4-8*x{i}^2+2.5*x{i}"))
                .collect::<Vec<_>>()
                .join("+");
            (
                "Styblinski-Tang",
                src,
                Domain::cube(n, "-5", "5")?,
                STYBLINSKI_TANG_MIN_PER_DIM * n as f64,
                vec![vec![STYBLINSKI_TANG_ARGMIN; n]],
            )
        }
        "rosenbrock" => {
            let n = n.ok_or_else(|| Error::MissingDimension(name.into()))?;
            if n < 2 {
                return Err(Error::InvalidArgument("rosenbrock needs n >= 2".into()));
            }
            let src = (1..n)
                .map(|i| format!("100*(x{}-x{i}^2)^2+(x{i}-1)^2", i + 1))
                .collect::<Vec<_>>()
                .join("+");
            ("Rosenbrock", src, Domain::cube(n, "-2.048", "2.048")?, 0.0, vec![vec![1.0; n]])
        }
        "matyas-modified-s" => (
            "Matyas (simplex variant)",
            "0.26*((20*x1-10)^2+(20*x2-10)^2)-0.48*(20*x1-10)*(20*x2-10)".into(),
            Domain::simplex(2)?,
            0.0,
            vec![vec![0.5, 0.5]],
        ),
        "three-hump-camel-modified-s" => (
            "Three-Hump Camel (simplex variant)",
            "2*(10*x1-5)^2-1.05*(10*x1-5)^4+(10*x1-5)^6/6+(10*x1-5)*(10*x2-5)+(10*x2-5)^2".into(),
            Domain::simplex(2)?,
            0.0,
            vec![vec![0.5, 0.5]],
        ),
        "matyas-modified-b" => (
            "Matyas (ball variant)",
            "0.26*((20*x1^2-10)^2+(20*x2^2-10)^2)-0.48*(20*x1^2-10)*(20*x2^2-10)".into(),
            Domain::ball(2)?,
            0.0,
            corners,
        ),
        "three-hump-camel-modified-b" => (
            "Three-Hump Camel (ball variant)",
            "2*(10*x1^2-5)^2-1.05*(10*x1^2-5)^4+(10*x1^2-5)^6/6+(10*x1^2-5)*(10*x2^2-5)+(10*x2^2-5)^2".into(),
            Domain::ball(2)?,
            0.0,
            corners,
        ),
        _ => return Err(Error::UnknownFunction(name.into())),
    };
    let n = dom.dim();
    let polynomial = parse_polynomial(&source, n)?;
    let min_tol = if name == "styblinski-tang" { 1e-4 * f_min.abs() } else { 1e-9 };
    let name = NAMES.iter().find(|s| **s == name).copied().expect("listed");
    Ok(TestCase { name, title, source, n, parametric: is_parametric(name), polynomial, domain: dom, f_min, minimizers, min_tol })
}

/// The whole corpus as JSON, instantiating parametric families at dimension `n_param`.
pub fn catalog_json(n_param: usize) -> Result<serde_json::Value> {
    let entries = NAMES
        .iter()
        .map(|name| get(name, Some(n_param)).map(|tc| serde_json::to_value(tc).expect("serializable")))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "functions": entries }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoldenRow {
    /// Benchmark group: `box`, `highdim` or `simplex-ball`.
    pub group: String,
    pub function: String,
    pub n: usize,
    pub r: u32,
    pub value: f64,
    /// `None` for rows that are reported but not asserted.
    pub tolerance: Option<f64>,
    pub relative: bool,
}

const GOLDEN_CSV: &str = include_str!("../data/golden.csv");

/// Published bound values shipped with the crate.
pub fn golden() -> Vec<GoldenRow> {
    GOLDEN_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            GoldenRow {
                group: c[0].to_string(),
                function: c[1].to_string(),
                n: c[2].parse().expect("golden n"),
                r: c[3].parse().expect("golden r"),
                value: c[4].parse().expect("golden value"),
                tolerance: if c[5].is_empty() { None } else { Some(c[5].parse().expect("golden tolerance")) },
                relative: c[6] == "rel",
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_ten_sorted_entries() {
        let names = list();
        assert_eq!(names.len(), 10);
        assert!(names.contains(&"motzkin"));
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn minimizers_attain_minimum() {
        for name in list() {
            for n in [2usize, 10] {
                let tc = get(name, Some(n)).unwrap();
                for x in &tc.minimizers {
                    let v = tc.polynomial.evaluate(x).unwrap();
                    assert!((v - tc.f_min).abs() <= tc.min_tol, "{name} n={n}: f={v}, f_min={}", tc.f_min);
                    assert!(tc.domain.contains(x, 1e-12), "{name}: minimizer outside domain");
                }
                if !tc.parametric {
                    break;
                }
            }
        }
    }

    #[test]
    fn booth_entry() {
        let tc = get("booth", None).unwrap();
        assert_eq!(tc.domain, Domain::cube(2, "-10", "10").unwrap());
        assert_eq!(tc.f_min, 0.0);
        assert_eq!(tc.minimizers, vec![vec![1.0, 3.0]]);
    }

    #[test]
    fn parametric_families() {
        assert!((get("styblinski-tang", Some(10)).unwrap().f_min + 391.6599).abs() < 1e-9);
        assert_eq!(get("styblinski-tang", None).unwrap_err(), Error::MissingDimension("styblinski-tang".into()));
        assert_eq!(get("nope", None).unwrap_err(), Error::UnknownFunction("nope".into()));
        let rb = get("rosenbrock", Some(3)).unwrap();
        assert_eq!(rb.domain, Domain::cube(3, "-2048/1000", "2048/1000").unwrap());
    }

    #[test]
    fn ball_variant_domain() {
        let tc = get("matyas-modified-b", None).unwrap();
        assert_eq!(tc.domain, Domain::Ball { n: 2 });
        assert_eq!(tc.minimizers.len(), 4);
    }

    #[test]
    fn simplex_variant_is_affine_image() {
        let base = get("matyas", None).unwrap().polynomial;
        let s = crate::numeric::parse_rational("20").unwrap();
        let t = crate::numeric::parse_rational("-10").unwrap();
        let composed = base.substitute_affine(&[s.clone(), s], &[t.clone(), t]).unwrap();
        assert_eq!(composed, get("matyas-modified-s", None).unwrap().polynomial);
    }

    #[test]
    fn golden_file_shape() {
        let g = golden();
        assert_eq!(g.iter().filter(|r| r.group == "box" && r.tolerance.is_some()).count(), 48);
        assert_eq!(g.iter().filter(|r| r.group == "simplex-ball").count(), 40);
        assert_eq!(g.iter().filter(|r| r.group == "highdim" && r.tolerance.is_some()).count(), 6);
        let m = g.iter().find(|r| r.function == "motzkin" && r.r == 12).unwrap();
        assert_eq!(m.value, 0.406076);
    }
}
