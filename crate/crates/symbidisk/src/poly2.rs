//! Bivariate polynomials with complex coefficients.
//!
//! A [`Poly2`] carries a coordinate tag: power coordinates `(z, zeta)`,
//! symmetric coordinates `(s, p) = (z + zeta, z*zeta)`, or the auxiliary
//! pair `(sigma, e) = (s/2, s^2/4 - p)`. Conversions between the bases are
//! exact coefficient manipulations; coefficient recovery from evaluations
//! uses a tensor grid of roots of unity and an inverse DFT per axis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{cx, Cx};

/// Coordinate system of a bivariate polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coords {
    /// Power coordinates `(z, zeta)` on the bidisk.
    #[serde(rename = "zzeta")]
    ZZeta,
    /// Symmetric coordinates `(s, p)` on the symmetrized bidisk.
    #[serde(rename = "sp")]
    SP,
    /// Auxiliary coordinates `(sigma, e)` with `sigma = s/2`, `e = s^2/4 - p`.
    #[serde(rename = "sigmae")]
    SigmaE,
}

impl Coords {
    pub fn name(self) -> &'static str {
        match self {
            Coords::ZZeta => "zzeta",
            Coords::SP => "sp",
            Coords::SigmaE => "sigmae",
        }
    }
}

/// Direction for the `(s,p) <-> (sigma,e)` change of variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaDirection {
    /// Substitute `s = 2 sigma`, `p = sigma^2 - e`.
    SpToSigmaE,
    /// Substitute `sigma = s/2`, `e = s^2/4 - p`.
    SigmaEToSp,
}

/// Dense bivariate polynomial; `coeffs[i][j]` multiplies `x^i y^j` in the
/// declared coordinates. Kept in canonical form: trailing all-zero rows
/// and columns trimmed, at least one coefficient present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct Poly2 {
    coords: Coords,
    coeffs: Vec<Vec<Cx>>,
}

impl Poly2 {
    /// The zero polynomial.
    pub fn zero(coords: Coords) -> Self {
        Poly2 {
            coords,
            coeffs: vec![vec![Cx::ZERO]],
        }
    }

    /// A constant polynomial.
    pub fn constant(coords: Coords, value: Cx) -> Self {
        Poly2 {
            coords,
            coeffs: vec![vec![value]],
        }
    }

    /// The monomial `c * x^i y^j`.
    pub fn monomial(coords: Coords, i: usize, j: usize, c: Cx) -> Self {
        let mut coeffs = vec![vec![Cx::ZERO; j + 1]; i + 1];
        coeffs[i][j] = c;
        let mut p = Poly2 { coords, coeffs };
        p.normalize();
        p
    }

    /// Build from a dense coefficient array, validating shape and finiteness.
    pub fn from_coeffs(coords: Coords, coeffs: Vec<Vec<Cx>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Ok(Self::zero(coords));
        }
        let width = coeffs[0].len();
        for (i, row) in coeffs.iter().enumerate() {
            if row.len() != width {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    width
                )));
            }
            for (j, c) in row.iter().enumerate() {
                if !c.re.is_finite() || !c.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        if width == 0 {
            return Ok(Self::zero(coords));
        }
        let mut p = Poly2 { coords, coeffs };
        p.normalize();
        Ok(p)
    }

    pub fn coords(&self) -> Coords {
        self.coords
    }

    /// Degree bounds `(deg_x, deg_y)` of the canonical form.
    pub fn deg(&self) -> (usize, usize) {
        (self.coeffs.len() - 1, self.coeffs[0].len() - 1)
    }

    pub fn coeffs(&self) -> &[Vec<Cx>] {
        &self.coeffs
    }

    /// Coefficient of `x^i y^j` (zero outside the stored array).
    pub fn coeff(&self, i: usize, j: usize) -> Cx {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(Cx::ZERO)
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient difference against `other` over the union support.
    pub fn max_coeff_diff(&self, other: &Poly2) -> f64 {
        let (d1, d2) = self.deg();
        let (e1, e2) = other.deg();
        let mut worst: f64 = 0.0;
        for i in 0..=d1.max(e1) {
            for j in 0..=d2.max(e2) {
                worst = worst.max((self.coeff(i, j) - other.coeff(i, j)).norm());
            }
        }
        worst
    }

    fn normalize(&mut self) {
        let nonzero = |c: &Cx| c.re != 0.0 || c.im != 0.0;
        while self.coeffs.len() > 1
            && self.coeffs.last().is_some_and(|r| !r.iter().any(nonzero))
        {
            self.coeffs.pop();
        }
        let mut width = self.coeffs[0].len();
        while width > 1
            && self
                .coeffs
                .iter()
                .all(|row| !nonzero(&row[width - 1]))
        {
            width -= 1;
        }
        for row in &mut self.coeffs {
            row.truncate(width);
        }
    }

    /// Zero out coefficients below `rel_tol` times the largest coefficient
    /// and re-trim.
    pub fn clean(&self, rel_tol: f64) -> Poly2 {
        let cutoff = rel_tol * self.max_coeff();
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&c| if c.norm() < cutoff { Cx::ZERO } else { c })
                    .collect()
            })
            .collect();
        let mut p = Poly2 {
            coords: self.coords,
            coeffs,
        };
        p.normalize();
        p
    }

    /// Horner evaluation at `(x, y)`.
    pub fn eval(&self, x: Cx, y: Cx) -> Cx {
        let mut acc = Cx::ZERO;
        for row in self.coeffs.iter().rev() {
            let mut row_val = Cx::ZERO;
            for &c in row.iter().rev() {
                row_val = row_val * y + c;
            }
            acc = acc * x + row_val;
        }
        acc
    }

    /// Sum of two polynomials in the same coordinates.
    pub fn add(&self, other: &Poly2) -> Poly2 {
        assert_eq!(self.coords, other.coords);
        let (d1, d2) = self.deg();
        let (e1, e2) = other.deg();
        let mut coeffs = vec![vec![Cx::ZERO; d2.max(e2) + 1]; d1.max(e1) + 1];
        for (i, row) in coeffs.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = self.coeff(i, j) + other.coeff(i, j);
            }
        }
        let mut p = Poly2 {
            coords: self.coords,
            coeffs,
        };
        p.normalize();
        p
    }

    pub fn sub(&self, other: &Poly2) -> Poly2 {
        self.add(&other.scale(cx(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Cx) -> Poly2 {
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| row.iter().map(|&c| c * factor).collect())
            .collect();
        let mut p = Poly2 {
            coords: self.coords,
            coeffs,
        };
        p.normalize();
        p
    }

    /// Product of two polynomials in the same coordinates.
    pub fn mul(&self, other: &Poly2) -> Poly2 {
        assert_eq!(self.coords, other.coords);
        let (d1, d2) = self.deg();
        let (e1, e2) = other.deg();
        let mut coeffs = vec![vec![Cx::ZERO; d2 + e2 + 1]; d1 + e1 + 1];
        for i in 0..=d1 {
            for j in 0..=d2 {
                let c = self.coeff(i, j);
                if c == Cx::ZERO {
                    continue;
                }
                for k in 0..=e1 {
                    for l in 0..=e2 {
                        coeffs[i + k][j + l] += c * other.coeff(k, l);
                    }
                }
            }
        }
        let mut p = Poly2 {
            coords: self.coords,
            coeffs,
        };
        p.normalize();
        p
    }

    /// Multiply by the monomial `x^i y^j`.
    pub fn shift(&self, i: usize, j: usize) -> Poly2 {
        let (d1, d2) = self.deg();
        let mut coeffs = vec![vec![Cx::ZERO; d2 + j + 1]; d1 + i + 1];
        for a in 0..=d1 {
            for b in 0..=d2 {
                coeffs[a + i][b + j] = self.coeff(a, b);
            }
        }
        let mut p = Poly2 {
            coords: self.coords,
            coeffs,
        };
        p.normalize();
        p
    }

    fn expect_coords(&self, expected: Coords) -> Result<()> {
        if self.coords != expected {
            return Err(Error::WrongCoords {
                expected: expected.name(),
                got: self.coords.name(),
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    coords: Coords,
    deg: (usize, usize),
    coeffs: Vec<Vec<(f64, f64)>>,
}

impl From<Poly2> for PolyRepr {
    fn from(p: Poly2) -> Self {
        PolyRepr {
            coords: p.coords,
            deg: p.deg(),
            coeffs: p
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| (c.re, c.im)).collect())
                .collect(),
        }
    }
}

impl TryFrom<PolyRepr> for Poly2 {
    type Error = Error;
    fn try_from(repr: PolyRepr) -> Result<Self> {
        let coeffs: Vec<Vec<Cx>> = repr
            .coeffs
            .into_iter()
            .map(|row| row.into_iter().map(|(re, im)| cx(re, im)).collect())
            .collect();
        let declared = repr.deg;
        let p = Poly2::from_coeffs(repr.coords, coeffs)?;
        let actual = p.deg();
        if actual.0 > declared.0 || actual.1 > declared.1 {
            return Err(Error::InvalidInput(format!(
                "declared degree {:?} below actual {:?}",
                declared, actual
            )));
        }
        Ok(p)
    }
}

/// Whether `f(z, zeta) = f(zeta, z)`: the coefficient array is symmetric
/// within `1e-14 * max(1, |coeffs|)`.
pub fn is_symmetric(f: &Poly2) -> Result<bool> {
    f.expect_coords(Coords::ZZeta)?;
    Ok(max_asymmetry(f) <= 1e-14 * f.max_coeff().max(1.0))
}

fn max_asymmetry(f: &Poly2) -> f64 {
    let (d1, d2) = f.deg();
    let d = d1.max(d2);
    let mut worst: f64 = 0.0;
    for i in 0..=d {
        for j in i..=d {
            worst = worst.max((f.coeff(i, j) - f.coeff(j, i)).norm());
        }
    }
    worst
}

/// Substitute `s -> z + zeta`, `p -> z*zeta` into `g(s, p)`, producing the
/// symmetric polynomial `f(z, zeta) = g(z + zeta, z*zeta)`.
pub fn compose_sym(g: &Poly2) -> Result<Poly2> {
    g.expect_coords(Coords::SP)?;
    let (ds, dp) = g.deg();
    let n = ds + dp;
    let binom = binomial_table(ds);
    let mut coeffs = vec![vec![Cx::ZERO; n + 1]; n + 1];
    for a in 0..=ds {
        for b in 0..=dp {
            let c = g.coeff(a, b);
            if c == Cx::ZERO {
                continue;
            }
            // (z + zeta)^a (z zeta)^b = sum_k C(a,k) z^(k+b) zeta^(a-k+b)
            for k in 0..=a {
                coeffs[k + b][a - k + b] += c * binom[a][k];
            }
        }
    }
    Poly2::from_coeffs(Coords::ZZeta, coeffs)
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1.0;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j <= i - 1 { t[i - 1][j] } else { 0.0 };
        }
    }
    t
}

/// Pair power sums `h_k(s, p)` with `h_k(z + zeta, z*zeta) = z^k + zeta^k`:
/// `h_0 = 2`, `h_1 = s`, `h_k = s h_{k-1} - p h_{k-2}`.
fn power_sum_basis(up_to: usize) -> Vec<Poly2> {
    let mut h = Vec::with_capacity(up_to + 1);
    h.push(Poly2::constant(Coords::SP, cx(2.0, 0.0)));
    if up_to >= 1 {
        h.push(Poly2::monomial(Coords::SP, 1, 0, Cx::ONE));
    }
    let s = Poly2::monomial(Coords::SP, 1, 0, Cx::ONE);
    let p = Poly2::monomial(Coords::SP, 0, 1, Cx::ONE);
    for k in 2..=up_to {
        let next = s.mul(&h[k - 1]).sub(&p.mul(&h[k - 2]));
        h.push(next);
    }
    h
}

/// Convert a symmetric polynomial in `(z, zeta)` to `(s, p)` coordinates,
/// the exact inverse of [`compose_sym`].
///
/// Writes `f` as a combination of `z^a zeta^a = p^a` and the paired
/// monomials `z^a zeta^b + z^b zeta^a = p^b h_{a-b}` for `a > b`, using the
/// power-sum recursion for `h_k`.
pub fn to_sp_basis(f: &Poly2) -> Result<Poly2> {
    f.expect_coords(Coords::ZZeta)?;
    if !is_symmetric(f)? {
        return Err(Error::NotSymmetric {
            max_asym: max_asymmetry(f),
        });
    }
    let (d1, d2) = f.deg();
    let d = d1.max(d2);
    let h = power_sum_basis(d);
    let mut g = Poly2::zero(Coords::SP);
    for a in 0..=d {
        let diag = f.coeff(a, a);
        if diag != Cx::ZERO {
            g = g.add(&Poly2::monomial(Coords::SP, 0, a, diag));
        }
        for b in 0..a {
            // Average the symmetric pair to tolerate 1e-14 asymmetry.
            let c = (f.coeff(a, b) + f.coeff(b, a)) * 0.5;
            if c != Cx::ZERO {
                g = g.add(&h[a - b].shift(0, b).scale(c));
            }
        }
    }
    Ok(g)
}

/// Exact change of variables between `(s, p)` and `(sigma, e)` coordinates.
/// The two directions are mutually inverse.
pub fn change_sigma_e(f: &Poly2, direction: SigmaDirection) -> Result<Poly2> {
    let (expected, target, x_sub, y_sub) = match direction {
        SigmaDirection::SpToSigmaE => (
            Coords::SP,
            Coords::SigmaE,
            // s = 2 sigma
            Poly2::monomial(Coords::SigmaE, 1, 0, cx(2.0, 0.0)),
            // p = sigma^2 - e
            Poly2::monomial(Coords::SigmaE, 2, 0, Cx::ONE)
                .sub(&Poly2::monomial(Coords::SigmaE, 0, 1, Cx::ONE)),
        ),
        SigmaDirection::SigmaEToSp => (
            Coords::SigmaE,
            Coords::SP,
            // sigma = s/2
            Poly2::monomial(Coords::SP, 1, 0, cx(0.5, 0.0)),
            // e = s^2/4 - p
            Poly2::monomial(Coords::SP, 2, 0, cx(0.25, 0.0))
                .sub(&Poly2::monomial(Coords::SP, 0, 1, Cx::ONE)),
        ),
    };
    f.expect_coords(expected)?;
    Ok(compose(f, &x_sub, &y_sub, target))
}

/// Substitute polynomials for both variables: `f(x_sub, y_sub)`.
fn compose(f: &Poly2, x_sub: &Poly2, y_sub: &Poly2, target: Coords) -> Poly2 {
    let one = Poly2::constant(target, Cx::ONE);
    let mut acc = Poly2::zero(target);
    // Horner in x over rows, Horner in y inside each row.
    for row in f.coeffs().iter().rev() {
        let mut row_poly = Poly2::zero(target);
        for &c in row.iter().rev() {
            row_poly = row_poly.mul(y_sub).add(&one.scale(c));
        }
        acc = acc.mul(x_sub).add(&row_poly);
    }
    acc
}

/// Recover the coefficients of a bivariate polynomial of known degree
/// bounds from evaluations on a tensor grid of roots of unity (one inverse
/// DFT per axis). Coefficients below `1e-11` of the largest are zeroed.
pub fn from_grid_evaluations(
    coords: Coords,
    deg: (usize, usize),
    f: impl Fn(Cx, Cx) -> Cx + Sync,
) -> Poly2 {
    let n1 = deg.0 + 1;
    let n2 = deg.1 + 1;
    let w1 = roots_of_unity(n1);
    let w2 = roots_of_unity(n2);
    let values: Vec<Vec<Cx>> = w1
        .par_iter()
        .map(|&x| w2.iter().map(|&y| f(x, y)).collect())
        .collect();
    let scale = 1.0 / (n1 * n2) as f64;
    let mut coeffs = vec![vec![Cx::ZERO; n2]; n1];
    for (a, row) in coeffs.iter_mut().enumerate() {
        for (b, out) in row.iter_mut().enumerate() {
            let mut acc = Cx::ZERO;
            for j in 0..n1 {
                // conj(w^(j a)) accumulated row-wise first
                let mut inner = Cx::ZERO;
                for k in 0..n2 {
                    inner += values[j][k] * w2[(k * b) % n2].conj();
                }
                acc += inner * w1[(j * a) % n1].conj();
            }
            *out = acc * scale;
        }
    }
    let p = Poly2 { coords, coeffs };
    p.clean(1e-11)
}

fn roots_of_unity(n: usize) -> Vec<Cx> {
    (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            cx(t.cos(), t.sin())
        })
        .collect()
}

/// Domain for [`no_roots_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridDomain {
    /// The closed bidisk, sampled as `(r1 e^{i t1}, r2 e^{i t2})` with radii
    /// and phases equispaced including the boundary.
    #[serde(rename = "closed-bidisk")]
    ClosedBidisk,
    /// The closed symmetrized bidisk, sampled as the image of the closed
    /// bidisk grid under `(z, zeta) -> (z + zeta, z*zeta)`.
    #[serde(rename = "closed-g")]
    ClosedG,
}

/// Result of a modulus scan over a closed domain.
#[derive(Debug, Clone)]
pub struct NoRootsReport {
    pub min_abs: f64,
    /// Point achieving the minimum, in the evaluation coordinates.
    pub argmin: (Cx, Cx),
    pub samples: usize,
}

/// Sample `|f|` over a closed-domain grid and report the minimum modulus
/// and its location. A sampling heuristic, not a proof of zero-freeness.
pub fn no_roots_grid(f: &Poly2, domain: GridDomain, grid: usize) -> Result<NoRootsReport> {
    match domain {
        GridDomain::ClosedBidisk => f.expect_coords(Coords::ZZeta)?,
        GridDomain::ClosedG => f.expect_coords(Coords::SP)?,
    }
    if grid < 2 {
        return Err(Error::BadGrid { min: 2, got: grid });
    }
    let points = disk_grid(grid);
    let n = points.len();
    let best = (0..n)
        .into_par_iter()
        .map(|zi| {
            let z = points[zi];
            let mut local = (f64::INFINITY, 0usize, 0usize);
            match domain {
                GridDomain::ClosedBidisk => {
                    // Collapse the z-variable once per outer point, then
                    // sweep zeta with a univariate Horner.
                    let row = collapse_first(f, z);
                    for (wi, &w) in points.iter().enumerate() {
                        let v = eval_univariate(&row, w).norm();
                        if v < local.0 {
                            local = (v, zi, wi);
                        }
                    }
                }
                GridDomain::ClosedG => {
                    for (wi, &w) in points.iter().enumerate() {
                        let v = f.eval(z + w, z * w).norm();
                        if v < local.0 {
                            local = (v, zi, wi);
                        }
                    }
                }
            }
            local
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, usize::MAX),
            |a, b| {
                if (b.0, b.1, b.2) < (a.0, a.1, a.2) {
                    b
                } else {
                    a
                }
            },
        );
    let (min_abs, zi, wi) = best;
    let (z, w) = (points[zi], points[wi]);
    let argmin = match domain {
        GridDomain::ClosedBidisk => (z, w),
        GridDomain::ClosedG => (z + w, z * w),
    };
    Ok(NoRootsReport {
        min_abs,
        argmin,
        samples: n * n,
    })
}

/// Closed-disk sample points: `grid` radii in `[0, 1]` times `grid` phases.
pub(crate) fn disk_grid(grid: usize) -> Vec<Cx> {
    let mut pts = Vec::with_capacity(grid * grid);
    for ri in 0..grid {
        let r = ri as f64 / (grid - 1) as f64;
        for ti in 0..grid {
            let t = 2.0 * std::f64::consts::PI * ti as f64 / grid as f64;
            pts.push(cx(r * t.cos(), r * t.sin()));
        }
    }
    pts
}

/// Coefficients (in the second variable) of `f(x0, .)`; used by grid scans.
fn collapse_first(f: &Poly2, x0: Cx) -> Vec<Cx> {
    let (_, d2) = f.deg();
    let mut row = vec![Cx::ZERO; d2 + 1];
    for coeffs_row in f.coeffs().iter().rev() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = *c * x0 + coeffs_row.get(j).copied().unwrap_or(Cx::ZERO);
        }
    }
    row
}

fn eval_univariate(coeffs: &[Cx], x: Cx) -> Cx {
    let mut acc = Cx::ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sqrt_half() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    #[test]
    fn eval_fixed_points() {
        let one = Poly2::constant(Coords::ZZeta, Cx::ONE);
        assert_eq!(one.eval(cx(0.3, 0.2), cx(-0.9, 0.1)), Cx::ONE);

        let zz = Poly2::monomial(Coords::ZZeta, 1, 1, Cx::ONE);
        let v = zz.eval(cx(0.0, sqrt_half()), cx(0.0, -sqrt_half()));
        assert!((v - cx(0.5, 0.0)).norm() < 1e-15);

        // g(s,p) = p - s^2/2 at (0, 1/2)
        let g = Poly2::monomial(Coords::SP, 0, 1, Cx::ONE)
            .sub(&Poly2::monomial(Coords::SP, 2, 0, cx(0.5, 0.0)));
        let v = g.eval(Cx::ZERO, cx(0.5, 0.0));
        assert!((v - cx(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn symmetry_checks() {
        let zz = Poly2::monomial(Coords::ZZeta, 1, 1, Cx::ONE);
        assert!(is_symmetric(&zz).unwrap());

        let z = Poly2::monomial(Coords::ZZeta, 1, 0, Cx::ONE);
        assert!(!is_symmetric(&z).unwrap());

        // z*zeta - (z + zeta)^2/2 expanded: -z^2/2 - zeta^2/2
        let f = Poly2::from_coeffs(
            Coords::ZZeta,
            vec![
                vec![Cx::ZERO, Cx::ZERO, cx(-0.5, 0.0)],
                vec![Cx::ZERO, Cx::ZERO, Cx::ZERO],
                vec![cx(-0.5, 0.0), Cx::ZERO, Cx::ZERO],
            ],
        )
        .unwrap();
        assert!(is_symmetric(&f).unwrap());

        let sp = Poly2::monomial(Coords::SP, 1, 0, Cx::ONE);
        assert!(matches!(is_symmetric(&sp), Err(Error::WrongCoords { .. })));
    }

    #[test]
    fn compose_sym_fixed_cases() {
        let one = Poly2::constant(Coords::SP, Cx::ONE);
        assert_eq!(compose_sym(&one).unwrap().coeff(0, 0), Cx::ONE);

        let p = Poly2::monomial(Coords::SP, 0, 1, Cx::ONE);
        let f = compose_sym(&p).unwrap();
        assert_eq!(f, Poly2::monomial(Coords::ZZeta, 1, 1, Cx::ONE));

        // g = p - s^2/2 composes to -z^2/2 - zeta^2/2 (the z*zeta terms cancel)
        let g = p.sub(&Poly2::monomial(Coords::SP, 2, 0, cx(0.5, 0.0)));
        let f = compose_sym(&g).unwrap();
        assert_eq!(f.coeff(2, 0), cx(-0.5, 0.0));
        assert_eq!(f.coeff(0, 2), cx(-0.5, 0.0));
        assert_eq!(f.coeff(1, 1), Cx::ZERO);
    }

    #[test]
    fn to_sp_basis_fixed_cases() {
        // z + zeta -> s
        let f = Poly2::monomial(Coords::ZZeta, 1, 0, Cx::ONE)
            .add(&Poly2::monomial(Coords::ZZeta, 0, 1, Cx::ONE));
        let g = to_sp_basis(&f).unwrap();
        assert_eq!(g, Poly2::monomial(Coords::SP, 1, 0, Cx::ONE));

        // z^2 + zeta^2 -> s^2 - 2p
        let f = Poly2::monomial(Coords::ZZeta, 2, 0, Cx::ONE)
            .add(&Poly2::monomial(Coords::ZZeta, 0, 2, Cx::ONE));
        let g = to_sp_basis(&f).unwrap();
        assert_eq!(g.coeff(2, 0), Cx::ONE);
        assert_eq!(g.coeff(0, 1), cx(-2.0, 0.0));
        assert_eq!(g.coeff(1, 0), Cx::ZERO);

        // -z^2/2 - zeta^2/2 -> p - s^2/2
        let f = Poly2::monomial(Coords::ZZeta, 2, 0, cx(-0.5, 0.0))
            .add(&Poly2::monomial(Coords::ZZeta, 0, 2, cx(-0.5, 0.0)));
        let g = to_sp_basis(&f).unwrap();
        assert_eq!(g.coeff(0, 1), Cx::ONE);
        assert_eq!(g.coeff(2, 0), cx(-0.5, 0.0));

        let asym = Poly2::monomial(Coords::ZZeta, 1, 0, Cx::ONE);
        assert!(matches!(
            to_sp_basis(&asym),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn power_sums_compose_back() {
        let h = power_sum_basis(8);
        for (k, hk) in h.iter().enumerate().skip(1) {
            let f = compose_sym(hk).unwrap();
            let expected = Poly2::monomial(Coords::ZZeta, k, 0, Cx::ONE)
                .add(&Poly2::monomial(Coords::ZZeta, 0, k, Cx::ONE));
            assert_eq!(f, expected, "h_{k} failed");
        }
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let coeffs: Vec<Vec<Cx>> = (0..5)
                .map(|_| {
                    (0..5)
                        .map(|_| {
                            cx(
                                rng.gen_range(-2i32..=2) as f64,
                                rng.gen_range(-2i32..=2) as f64,
                            )
                        })
                        .collect()
                })
                .collect();
            let g = Poly2::from_coeffs(Coords::SP, coeffs).unwrap();
            let back = to_sp_basis(&compose_sym(&g).unwrap()).unwrap();
            assert!(back.max_coeff_diff(&g) <= 1e-12, "{back:?} vs {g:?}");
        }
    }

    #[test]
    fn sigma_e_change_fixed_cases() {
        // p -> sigma^2 - e
        let p = Poly2::monomial(Coords::SP, 0, 1, Cx::ONE);
        let q = change_sigma_e(&p, SigmaDirection::SpToSigmaE).unwrap();
        assert_eq!(q.coeff(2, 0), Cx::ONE);
        assert_eq!(q.coeff(0, 1), cx(-1.0, 0.0));

        let one = Poly2::constant(Coords::SigmaE, Cx::ONE);
        let r = change_sigma_e(&one, SigmaDirection::SigmaEToSp).unwrap();
        assert_eq!(r, Poly2::constant(Coords::SP, Cx::ONE));

        // 1 - sigma/2 -> 1 - s/4
        let q = Poly2::constant(Coords::SigmaE, Cx::ONE)
            .sub(&Poly2::monomial(Coords::SigmaE, 1, 0, cx(0.5, 0.0)));
        let g = change_sigma_e(&q, SigmaDirection::SigmaEToSp).unwrap();
        assert_eq!(g.coeff(0, 0), Cx::ONE);
        assert_eq!(g.coeff(1, 0), cx(-0.25, 0.0));
    }

    #[test]
    fn sigma_e_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let coeffs: Vec<Vec<Cx>> = (0..4)
                .map(|_| {
                    (0..4)
                        .map(|_| cx(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                        .collect()
                })
                .collect();
            let g = Poly2::from_coeffs(Coords::SP, coeffs).unwrap();
            let q = change_sigma_e(&g, SigmaDirection::SpToSigmaE).unwrap();
            let back = change_sigma_e(&q, SigmaDirection::SigmaEToSp).unwrap();
            assert!(back.max_coeff_diff(&g) <= 1e-12);
        }
    }

    #[test]
    fn grid_coefficient_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let coeffs: Vec<Vec<Cx>> = (0..4)
            .map(|_| {
                (0..3)
                    .map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let f = Poly2::from_coeffs(Coords::ZZeta, coeffs).unwrap();
        let g = from_grid_evaluations(Coords::ZZeta, f.deg(), |x, y| f.eval(x, y));
        assert!(g.max_coeff_diff(&f) < 1e-12);
    }

    #[test]
    fn no_roots_grid_fixed_cases() {
        let one = Poly2::constant(Coords::ZZeta, Cx::ONE);
        let report = no_roots_grid(&one, GridDomain::ClosedBidisk, 5).unwrap();
        assert!((report.min_abs - 1.0).abs() < 1e-15);

        // 1 - s/4: minimum modulus 1/2 on the closed symmetrized bidisk,
        // attained at s = 2 (z = zeta = 1).
        let g = Poly2::constant(Coords::SP, Cx::ONE)
            .sub(&Poly2::monomial(Coords::SP, 1, 0, cx(0.25, 0.0)));
        let report = no_roots_grid(&g, GridDomain::ClosedG, 21).unwrap();
        assert!((report.min_abs - 0.5).abs() < 1e-12, "{}", report.min_abs);
        assert!((report.argmin.0 - cx(2.0, 0.0)).norm() < 1e-12);

        let zz = Poly2::monomial(Coords::ZZeta, 1, 1, Cx::ONE);
        let report = no_roots_grid(&zz, GridDomain::ClosedBidisk, 5).unwrap();
        assert_eq!(report.min_abs, 0.0);

        assert!(matches!(
            no_roots_grid(&one, GridDomain::ClosedBidisk, 1),
            Err(Error::BadGrid { .. })
        ));
    }

    #[test]
    fn json_poly_round_trip() {
        let g = Poly2::monomial(Coords::SP, 0, 1, Cx::ONE)
            .sub(&Poly2::monomial(Coords::SP, 2, 0, cx(0.5, 0.0)));
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"coords\":\"sp\""));
        let back: Poly2 = serde_json::from_str(&text).unwrap();
        assert_eq!(g, back);
    }
}
