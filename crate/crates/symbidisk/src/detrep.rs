//! Determinantal representations of stable bivariate polynomials.
//!
//! A [`DetRep`] is a pair `(A1, A2)` of equal-size square matrices plus a
//! nonzero constant, encoding either
//!
//! ```text
//! p(z, zeta) = const * det(I - (A1 A2; A2 A1) diag(z I, zeta I))     (D2 form)
//! g(s, p)    = const * det(I - s A1 + p (A1 + A2)(A1 - A2))          (G form)
//! ```
//!
//! [`from_k`] builds a G-form representation from an `(n+m) x (n+m)` block
//! contraction `K`, following the substitution `sigma = s/2`,
//! `e = s^2/4 - p` applied to `q(sigma, e) = det(I - K diag(sigma I_n, e I_m))`
//! and a Schur-complement rewrite; the result has size `n + 2m` and
//! satisfies `||A1 + A2|| <= 1` and `||A1 - A2|| <= 1`. The same pair
//! retagged as D2 form represents the pullback `p(z, zeta) = g(z + zeta, z zeta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{self, cx, ComplexMatrix, Cx};
use crate::poly2::{self, Coords, Poly2};

/// Which determinant formula a [`DetRep`] encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetForm {
    /// `p(z, zeta)` on the bidisk.
    #[serde(rename = "d2")]
    D2,
    /// `g(s, p)` on the symmetrized bidisk.
    #[serde(rename = "g")]
    G,
}

/// Determinantal representation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DetRepRepr", into = "DetRepRepr")]
pub struct DetRep {
    form: DetForm,
    a1: ComplexMatrix,
    a2: ComplexMatrix,
    constant: Cx,
}

impl DetRep {
    /// Validate equal-size square pencil matrices and a nonzero constant
    /// (the represented polynomial cannot vanish at the origin).
    pub fn new(form: DetForm, a1: ComplexMatrix, a2: ComplexMatrix, constant: Cx) -> Result<Self> {
        if !a1.is_square() {
            return Err(Error::NotSquare {
                rows: a1.rows(),
                cols: a1.cols(),
            });
        }
        if a1.rows() != a2.rows() || a2.rows() != a2.cols() {
            return Err(Error::DimensionMismatch(format!(
                "A1 is {}x{}, A2 is {}x{}",
                a1.rows(),
                a1.cols(),
                a2.rows(),
                a2.cols()
            )));
        }
        if constant == Cx::ZERO || !constant.re.is_finite() || !constant.im.is_finite() {
            return Err(Error::InvalidInput(
                "representation constant must be nonzero and finite".to_string(),
            ));
        }
        Ok(DetRep {
            form,
            a1,
            a2,
            constant,
        })
    }

    pub fn form(&self) -> DetForm {
        self.form
    }

    pub fn a1(&self) -> &ComplexMatrix {
        &self.a1
    }

    pub fn a2(&self) -> &ComplexMatrix {
        &self.a2
    }

    pub fn constant(&self) -> Cx {
        self.constant
    }

    /// Size of the pencil matrices.
    pub fn size(&self) -> usize {
        self.a1.rows()
    }

    /// The block matrix `(A1 A2; A2 A1)` whose contractivity characterizes
    /// stability.
    pub fn block_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_blocks(&[&[&self.a1, &self.a2], &[&self.a2, &self.a1]])
            .expect("square blocks")
    }
}

#[derive(Serialize, Deserialize)]
struct DetRepRepr {
    form: DetForm,
    #[serde(rename = "A1")]
    a1: ComplexMatrix,
    #[serde(rename = "A2")]
    a2: ComplexMatrix,
    constant: (f64, f64),
}

impl From<DetRep> for DetRepRepr {
    fn from(r: DetRep) -> Self {
        DetRepRepr {
            form: r.form,
            a1: r.a1,
            a2: r.a2,
            constant: (r.constant.re, r.constant.im),
        }
    }
}

impl TryFrom<DetRepRepr> for DetRep {
    type Error = Error;
    fn try_from(r: DetRepRepr) -> Result<Self> {
        DetRep::new(r.form, r.a1, r.a2, cx(r.constant.0, r.constant.1))
    }
}

/// Block partition of an `(n+m) x (n+m)` contraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KBlocksRepr", into = "KBlocksRepr")]
pub struct KBlocks {
    k11: ComplexMatrix,
    k12: ComplexMatrix,
    k21: ComplexMatrix,
    k22: ComplexMatrix,
}

impl KBlocks {
    /// Validate block dimensions and contractivity of the assembled matrix.
    pub fn new(
        k11: ComplexMatrix,
        k12: ComplexMatrix,
        k21: ComplexMatrix,
        k22: ComplexMatrix,
    ) -> Result<Self> {
        let n = k11.rows();
        let m = k22.rows();
        if k11.cols() != n || k22.cols() != m {
            return Err(Error::DimensionMismatch(
                "K11 and K22 must be square".to_string(),
            ));
        }
        let fix = |mat: ComplexMatrix, rows: usize, cols: usize, name: &str| {
            if mat.rows() == rows && mat.cols() == cols {
                Ok(mat)
            } else if mat.is_empty() && (rows == 0 || cols == 0) {
                Ok(ComplexMatrix::zeros(rows, cols))
            } else {
                Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {rows}x{cols}",
                    mat.rows(),
                    mat.cols()
                )))
            }
        };
        let blocks = KBlocks {
            k11,
            k12: fix(k12, n, m, "K12")?,
            k21: fix(k21, m, n, "K21")?,
            k22,
        };
        let norm = numkit::op_norm(&blocks.assemble());
        if norm > 1.0 + 1e-10 {
            return Err(Error::NotContraction { norm });
        }
        Ok(blocks)
    }

    /// Split an assembled `(n+m) x (n+m)` contraction.
    pub fn from_assembled(n: usize, m: usize, k: &ComplexMatrix) -> Result<Self> {
        if k.rows() != n + m || k.cols() != n + m {
            return Err(Error::DimensionMismatch(format!(
                "K is {}x{}, expected {}x{}",
                k.rows(),
                k.cols(),
                n + m,
                n + m
            )));
        }
        KBlocks::new(
            k.block(0, 0, n, n),
            k.block(0, n, n, m),
            k.block(n, 0, m, n),
            k.block(n, n, m, m),
        )
    }

    pub fn n(&self) -> usize {
        self.k11.rows()
    }

    pub fn m(&self) -> usize {
        self.k22.rows()
    }

    pub fn assemble(&self) -> ComplexMatrix {
        ComplexMatrix::from_blocks(&[&[&self.k11, &self.k12], &[&self.k21, &self.k22]])
            .expect("validated blocks")
    }
}

#[derive(Serialize, Deserialize)]
struct KBlocksRepr {
    n: usize,
    m: usize,
    #[serde(rename = "K")]
    k: ComplexMatrix,
}

impl From<KBlocks> for KBlocksRepr {
    fn from(b: KBlocks) -> Self {
        KBlocksRepr {
            n: b.n(),
            m: b.m(),
            k: b.assemble(),
        }
    }
}

impl TryFrom<KBlocksRepr> for KBlocks {
    type Error = Error;
    fn try_from(r: KBlocksRepr) -> Result<Self> {
        KBlocks::from_assembled(r.n, r.m, &r.k)
    }
}

/// Construct the G-form representation of size `n + 2m` from a block
/// contraction:
///
/// ```text
/// A1 = ( K11/2   0   -K12/2 )        A2 = A1 except the (3,2) block
///      ( K21/2   0   -K22/2 )             is +I_m/2 instead of -I_m/2
///      (   0   -I_m/2   0   )
/// ```
pub fn from_k(k: &KBlocks, constant: Cx) -> Result<DetRep> {
    let n = k.n();
    let m = k.m();
    let half_k11 = k.k11.scale_re(0.5);
    let half_k21 = k.k21.scale_re(0.5);
    let neg_half_k12 = k.k12.scale_re(-0.5);
    let neg_half_k22 = k.k22.scale_re(-0.5);
    let z_nm = ComplexMatrix::zeros(n, m);
    let z_mm = ComplexMatrix::zeros(m, m);
    let z_mn = ComplexMatrix::zeros(m, n);
    let half_eye = ComplexMatrix::identity(m).scale_re(0.5);
    let neg_half_eye = ComplexMatrix::identity(m).scale_re(-0.5);
    let a1 = ComplexMatrix::from_blocks(&[
        &[&half_k11, &z_nm, &neg_half_k12],
        &[&half_k21, &z_mm, &neg_half_k22],
        &[&z_mn, &neg_half_eye, &z_mm],
    ])?;
    let a2 = ComplexMatrix::from_blocks(&[
        &[&half_k11, &z_nm, &neg_half_k12],
        &[&half_k21, &z_mm, &neg_half_k22],
        &[&z_mn, &half_eye, &z_mm],
    ])?;
    DetRep::new(DetForm::G, a1, a2, constant)
}

/// Retag a G-form representation as D2 form: the same pencil evaluated in
/// the bidisk determinant formula represents `g(z + zeta, z*zeta)`.
pub fn g_rep_to_d2_rep(r: &DetRep) -> Result<DetRep> {
    if r.form != DetForm::G {
        return Err(Error::InvalidInput(
            "expected a G-form representation".to_string(),
        ));
    }
    DetRep::new(DetForm::D2, r.a1.clone(), r.a2.clone(), r.constant)
}

/// Exact coefficient array of the represented polynomial, recovered from
/// determinant evaluations on a roots-of-unity grid.
pub fn det_poly(rep: &DetRep) -> Poly2 {
    let ell = rep.size();
    let constant = rep.constant;
    match rep.form {
        DetForm::D2 => {
            let block = rep.block_matrix();
            poly2::from_grid_evaluations(Coords::ZZeta, (ell, ell), |z, zeta| {
                let mut diag = vec![z; ell];
                diag.extend(std::iter::repeat(zeta).take(ell));
                let mz = block.scale_cols(&diag);
                let arg = &ComplexMatrix::identity(2 * ell) - &mz;
                numkit::determinant(&arg).expect("square") * constant
            })
        }
        DetForm::G => {
            let sum = &rep.a1 + &rep.a2;
            let diff = &rep.a1 - &rep.a2;
            let prod = sum.matmul(&diff);
            poly2::from_grid_evaluations(Coords::SP, (ell, ell), |s, p| {
                let arg = &(&ComplexMatrix::identity(ell) - &rep.a1.scale(s)) + &prod.scale(p);
                numkit::determinant(&arg).expect("square") * constant
            })
        }
    }
}

/// The polynomial `q(sigma, e) = det(I - K diag(sigma I_n, e I_m))` of
/// degree at most `(n, m)`.
pub fn det_poly_sigma_e(k: &KBlocks) -> Poly2 {
    let n = k.n();
    let m = k.m();
    let assembled = k.assemble();
    poly2::from_grid_evaluations(Coords::SigmaE, (n, m), |sigma, e| {
        let mut diag = vec![sigma; n];
        diag.extend(std::iter::repeat(e).take(m));
        let arg = &ComplexMatrix::identity(n + m) - &assembled.scale_cols(&diag);
        numkit::determinant(&arg).expect("square")
    })
}

/// Strictness classification of the block contraction, with a `1e-10`
/// boundary band to avoid misclassifying norms that sit numerically at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    Strict,
    Boundary,
    NonStrict,
}

/// Report of [`verify`].
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    /// Max coefficient residual relative to the largest target coefficient.
    pub max_rel_residual: f64,
    /// `||A1 + A2||`.
    pub norm_sum: f64,
    /// `||A1 - A2||`.
    pub norm_diff: f64,
    /// Operator norm of the assembled block matrix.
    pub block_norm: f64,
    /// Whether the block matrix is a strict contraction (norm < 1 - 1e-10).
    pub strict: bool,
    pub classification: Strictness,
}

/// Compare the represented polynomial against `target` coefficientwise and
/// report the contraction norms.
pub fn verify(rep: &DetRep, target: &Poly2) -> Result<VerifyReport> {
    let expected = match rep.form {
        DetForm::D2 => Coords::ZZeta,
        DetForm::G => Coords::SP,
    };
    if target.coords() != expected {
        return Err(Error::WrongCoords {
            expected: expected.name(),
            got: target.coords().name(),
        });
    }
    let mine = det_poly(rep);
    let denom = target.max_coeff().max(f64::MIN_POSITIVE);
    let max_rel_residual = mine.max_coeff_diff(target) / denom;
    let norm_sum = numkit::op_norm(&(&rep.a1 + &rep.a2));
    let norm_diff = numkit::op_norm(&(&rep.a1 - &rep.a2));
    let block_norm = numkit::op_norm(&rep.block_matrix());
    let classification = if block_norm < 1.0 - 1e-10 {
        Strictness::Strict
    } else if block_norm <= 1.0 + 1e-10 {
        Strictness::Boundary
    } else {
        Strictness::NonStrict
    };
    Ok(VerifyReport {
        max_rel_residual,
        norm_sum,
        norm_diff,
        block_norm,
        strict: classification == Strictness::Strict,
        classification,
    })
}

/// Undo an `R`-dilation: if `rep` represents the scaled polynomial
/// (`h(s,p) = g(Rs, R^2 p)` in G form, `h(z,zeta) = p(Rz, R zeta)` in D2
/// form), the returned representation `(A1/R, A2/R)` represents the
/// unscaled polynomial and its block norm shrinks by `1/R`.
pub fn strict_rescale(rep: &DetRep, r: f64) -> Result<DetRep> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::BadScale(r));
    }
    DetRep::new(
        rep.form,
        rep.a1.scale_re(1.0 / r),
        rep.a2.scale_re(1.0 / r),
        rep.constant,
    )
}
