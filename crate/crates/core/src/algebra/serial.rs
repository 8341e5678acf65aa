use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::exponent::QuadExponent;
use super::function::{QGFunction, QGTerm, VarSpace};
use super::monomial::Monomial;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// Complex number as `[re, im]`.
type Pair = [f64; 2];

fn pair(c: C64) -> Pair {
    [c.re, c.im]
}

fn complex(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

#[derive(Serialize, Deserialize)]
struct TermForm {
    /// Monomial key (comma separated exponents) to coefficient.
    poly: BTreeMap<String, Pair>,
    #[serde(rename = "A")]
    a: Vec<Vec<Pair>>,
    b: Vec<Pair>,
    c: Pair,
}

#[derive(Serialize, Deserialize)]
struct FunctionForm {
    dof: usize,
    hbar: f64,
    terms: Vec<TermForm>,
}

impl QGFunction {
    pub fn to_json(&self) -> String {
        let dim = self.space().dim();
        let terms = self
            .terms()
            .iter()
            .map(|t| TermForm {
                poly: t.poly.terms().map(|(m, c)| (m.key(), pair(*c))).collect(),
                a: (0..dim)
                    .map(|i| (0..dim).map(|j| pair(t.expo.a()[(i, j)])).collect())
                    .collect(),
                b: t.expo.b().iter().map(|&v| pair(v)).collect(),
                c: pair(t.expo.c()),
            })
            .collect();
        let form = FunctionForm {
            dof: self.space().dof(),
            hbar: self.space().hbar(),
            terms,
        };
        serde_json::to_string(&form).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let form: FunctionForm = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let space = VarSpace::new(form.dof, form.hbar)?;
        let dim = space.dim();
        let mut terms = Vec::with_capacity(form.terms.len());
        for t in form.terms {
            let mut poly = Polynomial::zero(dim);
            for (key, c) in t.poly {
                let m = Monomial::parse_key(&key).ok_or_else(|| Error::Format(format!("bad monomial key {key:?}")))?;
                if m.nvars() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: m.nvars(),
                    });
                }
                poly.add_term(m, complex(c));
            }
            if t.a.len() != dim || t.a.iter().any(|row| row.len() != dim) || t.b.len() != dim {
                return Err(Error::Format(format!("exponent is not {dim}-dimensional")));
            }
            let a = DMatrix::from_fn(dim, dim, |i, j| complex(t.a[i][j]));
            let b = DVector::from_iterator(dim, t.b.iter().map(|&v| complex(v)));
            terms.push(QGTerm {
                poly,
                expo: QuadExponent::new(a, b, complex(t.c)),
            });
        }
        QGFunction::new(space, terms)
    }
}
