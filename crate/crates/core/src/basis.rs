//! Basis-function families and design matrices.
//!
//! A family maps a scalar input `x` to a feature vector whose first entry is
//! always the constant `1`:
//!
//! - `Polynomial(k)`: `1, x, x², …, x^{k-1}` (k functions)
//! - `Trigonometric(k)`: `1, cos(πx), sin(πx), …, cos(kπx), sin(kπx)` (2k+1 functions)
//!
//! Report labels follow the highest-degree convention: `PolyK` is the
//! polynomial of degree `K` (so `Polynomial(K+1)`), `TrigK` is
//! `Trigonometric(K)`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    Polynomial,
    Trigonometric,
}

/// A basis family together with its order. The order is always at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisFamily {
    kind: BasisKind,
    order: usize,
}

impl BasisFamily {
    pub fn new(kind: BasisKind, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Input("basis order must be at least 1".into()));
        }
        Ok(Self { kind, order })
    }

    /// `Polynomial(order)`: monomials `x^0 … x^{order-1}`.
    pub fn polynomial(order: usize) -> Result<Self> {
        Self::new(BasisKind::Polynomial, order)
    }

    /// `Trigonometric(order)`: the constant plus `order` cosine/sine pairs.
    pub fn trigonometric(order: usize) -> Result<Self> {
        Self::new(BasisKind::Trigonometric, order)
    }

    /// Polynomial of the given degree, i.e. the family labelled `Poly{degree}`.
    pub fn poly_degree(degree: usize) -> Self {
        Self {
            kind: BasisKind::Polynomial,
            order: degree + 1,
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of basis functions `M`.
    pub fn dimension(&self) -> usize {
        match self.kind {
            BasisKind::Polynomial => self.order,
            BasisKind::Trigonometric => 2 * self.order + 1,
        }
    }

    /// Report label, e.g. `Poly2` or `Trig3`.
    pub fn label(&self) -> String {
        match self.kind {
            BasisKind::Polynomial => format!("Poly{}", self.order - 1),
            BasisKind::Trigonometric => format!("Trig{}", self.order),
        }
    }

    /// Evaluates every basis function at `x`.
    pub fn evaluate(&self, x: f64) -> Result<DVector<f64>> {
        ensure_finite(x, "x")?;
        let mut out = DVector::zeros(self.dimension());
        self.fill(x, out.as_mut_slice());
        Ok(out)
    }

    fn fill(&self, x: f64, out: &mut [f64]) {
        match self.kind {
            BasisKind::Polynomial => {
                let mut power = 1.0;
                for slot in out.iter_mut() {
                    *slot = power;
                    power *= x;
                }
            }
            BasisKind::Trigonometric => {
                out[0] = 1.0;
                for j in 1..=self.order {
                    let arg = j as f64 * PI * x;
                    out[2 * j - 1] = arg.cos();
                    out[2 * j] = arg.sin();
                }
            }
        }
    }

    /// Builds the `N × M` design matrix, one row per input.
    pub fn design_matrix(&self, xs: &[f64]) -> Result<DesignMatrix> {
        let m = self.dimension();
        let mut data = DMatrix::zeros(xs.len(), m);
        let mut row = vec![0.0; m];
        for (n, &x) in xs.iter().enumerate() {
            ensure_finite(x, "x").map_err(|e| Error::AtRow {
                row: n,
                source: Box::new(e),
            })?;
            self.fill(x, &mut row);
            data.row_mut(n).copy_from_slice(&row);
        }
        Ok(DesignMatrix(data))
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Design matrix `Φ` with entry `(n, j) = φ_j(x_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix(DMatrix<f64>);

impl DesignMatrix {
    /// Wraps an arbitrary matrix. Used by tests and callers with custom features.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        Self(matrix)
    }

    /// An empty design with `cols` columns.
    pub fn empty(cols: usize) -> Self {
        Self(DMatrix::zeros(0, cols))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn row(&self, n: usize) -> RowDVector<f64> {
        self.0.row(n).into_owned()
    }

    /// Appends one observation row; earlier rows are left untouched.
    pub fn push_row(&mut self, row: &DVector<f64>) -> Result<()> {
        if row.len() != self.cols() {
            return Err(Error::Dimension {
                what: "design row length",
                expected: self.cols(),
                actual: row.len(),
            });
        }
        let n = self.rows();
        let old = std::mem::replace(&mut self.0, DMatrix::zeros(0, 0));
        self.0 = old.insert_row(n, 0.0);
        self.0.row_mut(n).copy_from(&row.transpose());
        Ok(())
    }
}

/// Parses a hypothesis-set string such as `poly:0..3,trig:1..3` into labelled
/// families. Ranges are inclusive and index the report label (`PolyK`, `TrigK`).
pub fn parse_hypothesis_set(spec: &str) -> Result<Vec<BasisFamily>> {
    let trimmed = spec.trim();
    if trimmed.is_empty() {
        return Err(Error::Config {
            token: spec.to_string(),
            reason: "empty hypothesis specification".into(),
        });
    }
    let mut families = Vec::new();
    for term in trimmed.split(',') {
        let term = term.trim();
        let config_err = |reason: &str| Error::Config {
            token: term.to_string(),
            reason: reason.to_string(),
        };
        let (kind, range) = term
            .split_once(':')
            .ok_or_else(|| config_err("expected `poly:<a>..<b>` or `trig:<a>..<b>`"))?;
        let (lo, hi) = range
            .split_once("..")
            .ok_or_else(|| config_err("expected a range `<a>..<b>`"))?;
        let lo: usize = lo.trim().parse().map_err(|_| config_err("malformed range start"))?;
        let hi: usize = hi.trim().parse().map_err(|_| config_err("malformed range end"))?;
        if lo > hi {
            return Err(config_err("empty range"));
        }
        match kind.trim() {
            "poly" => families.extend((lo..=hi).map(BasisFamily::poly_degree)),
            "trig" => {
                if lo == 0 {
                    return Err(config_err("trigonometric order starts at 1"));
                }
                for k in lo..=hi {
                    families.push(BasisFamily::trigonometric(k)?);
                }
            }
            _ => return Err(config_err("unknown basis family (use `poly` or `trig`)")),
        }
    }
    let mut seen = std::collections::HashSet::new();
    for f in &families {
        if !seen.insert(f.label()) {
            return Err(Error::Config {
                token: f.label(),
                reason: "duplicate hypothesis label".into(),
            });
        }
    }
    Ok(families)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        assert_eq!(BasisFamily::polynomial(1).unwrap().dimension(), 1);
        assert_eq!(BasisFamily::polynomial(3).unwrap().dimension(), 3);
        // {1, cos πx, sin πx, cos 2πx, sin 2πx, cos 3πx, sin 3πx}
        assert_eq!(BasisFamily::trigonometric(3).unwrap().dimension(), 7);
        assert!(BasisFamily::polynomial(0).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let p3 = BasisFamily::polynomial(3).unwrap();
        assert_eq!(p3.evaluate(2.0).unwrap().as_slice(), &[1.0, 2.0, 4.0]);
        assert_eq!(p3.evaluate(0.0).unwrap().as_slice(), &[1.0, 0.0, 0.0]);

        let t1 = BasisFamily::trigonometric(1).unwrap().evaluate(0.5).unwrap();
        assert_eq!(t1[0], 1.0);
        assert!(t1[1].abs() < 1e-15);
        assert!((t1[2] - 1.0).abs() < 1e-15);

        assert!(p3.evaluate(f64::NAN).is_err());
        assert!(p3.evaluate(f64::INFINITY).is_err());
    }

    #[test]
    fn design_matrix_examples() {
        let p2 = BasisFamily::polynomial(2).unwrap();
        let d = p2.design_matrix(&[1.0, 2.0]).unwrap();
        assert_eq!(d.matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));

        let empty = BasisFamily::polynomial(1).unwrap().design_matrix(&[]).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (0, 1));

        let d = BasisFamily::polynomial(3).unwrap().design_matrix(&[-1.0]).unwrap();
        assert_eq!(d.matrix(), &DMatrix::from_row_slice(1, 3, &[1.0, -1.0, 1.0]));

        let err = p2.design_matrix(&[0.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::AtRow { row: 1, .. }));
    }

    #[test]
    fn labels() {
        assert_eq!(BasisFamily::poly_degree(2).label(), "Poly2");
        assert_eq!(BasisFamily::poly_degree(2).dimension(), 3);
        assert_eq!(BasisFamily::trigonometric(3).unwrap().label(), "Trig3");
    }

    #[test]
    fn parse_grammar() {
        let fams = parse_hypothesis_set("poly:0..2").unwrap();
        let labels: Vec<_> = fams.iter().map(|f| f.label()).collect();
        assert_eq!(labels, ["Poly0", "Poly1", "Poly2"]);

        assert_eq!(parse_hypothesis_set("poly:0..3,trig:1..3").unwrap().len(), 7);
        assert_eq!(parse_hypothesis_set(" poly:1..1 , trig:2..2 ").unwrap().len(), 2);

        for bad in ["", "poly:2..1", "poly:0..1,poly:1..2", "wave:1..2", "poly:a..2", "poly", "trig:0..2", "poly:1"] {
            let err = parse_hypothesis_set(bad).unwrap_err();
            assert!(matches!(err, Error::Config { .. }), "{bad}: {err}");
        }
        let err = parse_hypothesis_set("poly:2..1").unwrap_err();
        assert!(err.to_string().contains("empty range"));
        assert!(err.to_string().contains("poly:2..1"));
    }

    #[test]
    fn push_row_is_incremental() {
        let fam = BasisFamily::polynomial(3).unwrap();
        let mut d = fam.design_matrix(&[0.5, -2.0]).unwrap();
        d.push_row(&fam.evaluate(3.0).unwrap()).unwrap();
        assert_eq!(d, fam.design_matrix(&[0.5, -2.0, 3.0]).unwrap());
        assert!(d.push_row(&DVector::zeros(2)).is_err());
    }

    fn family() -> impl Strategy<Value = BasisFamily> {
        prop_oneof![
            (1usize..9).prop_map(|k| BasisFamily::polynomial(k).unwrap()),
            (1usize..6).prop_map(|k| BasisFamily::trigonometric(k).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn first_basis_function_is_constant(f in family(), x in -1e3f64..1e3) {
            prop_assert_eq!(f.evaluate(x).unwrap()[0], 1.0);
        }

        #[test]
        fn appending_a_point_appends_a_row(f in family(), xs in prop::collection::vec(-3f64..3.0, 0..12), x in -3f64..3.0) {
            let before = f.design_matrix(&xs).unwrap();
            let mut all = xs.clone();
            all.push(x);
            let after = f.design_matrix(&all).unwrap();
            prop_assert_eq!(after.rows(), before.rows() + 1);
            prop_assert_eq!(after.matrix().rows(0, xs.len()), before.matrix().rows(0, xs.len()));
            prop_assert_eq!(after.row(xs.len()).transpose(), f.evaluate(x).unwrap());
        }

        #[test]
        fn polynomial_design_has_full_column_rank(
            m in 1usize..=6,
            extra in 0usize..6,
            seed_xs in prop::collection::btree_set(-100i32..100, 12),
        ) {
            let xs: Vec<f64> = seed_xs.iter().take(m + extra).map(|&v| v as f64 / 50.0).collect();
            prop_assume!(xs.len() >= m);
            let d = BasisFamily::polynomial(m).unwrap().design_matrix(&xs).unwrap();
            let rank = d.matrix().clone().svd(false, false).rank(1e-9);
            prop_assert_eq!(rank, m);
        }
    }
}
