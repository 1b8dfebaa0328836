//! Colligations and their transfer functions.
//!
//! Three block structures are supported:
//!
//! - [`GeneralColligation`]: the unstructured two-variable colligation with
//!   state blocks `A11, A12, A21, A22` and transfer function
//!   `D + (C1 C2) Z (I - A Z)^{-1} (B1; B2)`, `Z = diag(z I, zeta I)`.
//! - [`SymmetricColligation`]: state matrix `(A1 A2; A2 A1)` with repeated
//!   `B` and `C`; its transfer function is automatically symmetric in
//!   `(z, zeta)`.
//! - [`GammaColligation`]: blocks `(alpha1, alpha2, beta, gamma, delta)`
//!   realizing a function of `(s, p)` on the symmetrized bidisk via
//!   `delta + 1/2 gamma (sI - 2p alpha2)(I - s/2 (alpha1+alpha2) + p alpha1 alpha2)^{-1} beta`.
//!
//! [`symmetrize`] averages a general colligation into a symmetric one,
//! [`to_gamma`] converts symmetric to gamma form, and [`general_to_gamma`]
//! is their composition. All conversions preserve contractivity.
//!
//! Scalar-valued functions are the primary case, but every formula is
//! written for matrix-valued `B`, `C`, `D` blocks as well.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{self, ComplexMatrix, Cx};
use crate::pick;
use crate::poly2;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Contractivity slack used by colligation reports.
pub const CONTRACTION_TOL: f64 = 1e-10;

fn expect_block(
    m: ComplexMatrix,
    rows: usize,
    cols: usize,
    name: &str,
) -> Result<ComplexMatrix> {
    if m.rows() == rows && m.cols() == cols {
        return Ok(m);
    }
    // Accept any empty matrix where an empty block is expected; JSON for a
    // 0 x k block cannot carry the column count.
    if m.is_empty() && (rows == 0 || cols == 0) {
        return Ok(ComplexMatrix::zeros(rows, cols));
    }
    Err(Error::DimensionMismatch(format!(
        "block {name} is {}x{}, expected {rows}x{cols}",
        m.rows(),
        m.cols()
    )))
}

/// Two-variable colligation without symmetry structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneralRepr", into = "GeneralRepr")]
pub struct GeneralColligation {
    a11: ComplexMatrix,
    a12: ComplexMatrix,
    a21: ComplexMatrix,
    a22: ComplexMatrix,
    b1: ComplexMatrix,
    b2: ComplexMatrix,
    c1: ComplexMatrix,
    c2: ComplexMatrix,
    d: ComplexMatrix,
}

impl GeneralColligation {
    /// Validate block dimensions: state sizes come from `A11`/`A22`, the
    /// input and output sizes from `D`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a11: ComplexMatrix,
        a12: ComplexMatrix,
        a21: ComplexMatrix,
        a22: ComplexMatrix,
        b1: ComplexMatrix,
        b2: ComplexMatrix,
        c1: ComplexMatrix,
        c2: ComplexMatrix,
        d: ComplexMatrix,
    ) -> Result<Self> {
        let h1 = a11.rows();
        let h2 = a22.rows();
        let y = d.rows();
        let u = d.cols();
        Ok(GeneralColligation {
            a11: expect_block(a11, h1, h1, "A11")?,
            a12: expect_block(a12, h1, h2, "A12")?,
            a21: expect_block(a21, h2, h1, "A21")?,
            a22: expect_block(a22, h2, h2, "A22")?,
            b1: expect_block(b1, h1, u, "B1")?,
            b2: expect_block(b2, h2, u, "B2")?,
            c1: expect_block(c1, y, h1, "C1")?,
            c2: expect_block(c2, y, h2, "C2")?,
            d,
        })
    }

    pub fn h1(&self) -> usize {
        self.a11.rows()
    }

    pub fn h2(&self) -> usize {
        self.a22.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.d.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.d.rows()
    }

    pub fn a11(&self) -> &ComplexMatrix {
        &self.a11
    }
    pub fn a12(&self) -> &ComplexMatrix {
        &self.a12
    }
    pub fn a21(&self) -> &ComplexMatrix {
        &self.a21
    }
    pub fn a22(&self) -> &ComplexMatrix {
        &self.a22
    }
    pub fn b1(&self) -> &ComplexMatrix {
        &self.b1
    }
    pub fn b2(&self) -> &ComplexMatrix {
        &self.b2
    }
    pub fn c1(&self) -> &ComplexMatrix {
        &self.c1
    }
    pub fn c2(&self) -> &ComplexMatrix {
        &self.c2
    }
    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }

    /// Full colligation matrix `[[A11,A12,B1],[A21,A22,B2],[C1,C2,D]]`.
    pub fn assemble(&self) -> ComplexMatrix {
        ComplexMatrix::from_blocks(&[
            &[&self.a11, &self.a12, &self.b1],
            &[&self.a21, &self.a22, &self.b2],
            &[&self.c1, &self.c2, &self.d],
        ])
        .expect("validated blocks")
    }

    /// State matrix `[[A11,A12],[A21,A22]]`.
    pub fn state_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_blocks(&[&[&self.a11, &self.a12], &[&self.a21, &self.a22]])
            .expect("validated blocks")
    }
}

#[derive(Serialize, Deserialize)]
struct GeneralRepr {
    #[serde(rename = "A11")]
    a11: ComplexMatrix,
    #[serde(rename = "A12")]
    a12: ComplexMatrix,
    #[serde(rename = "A21")]
    a21: ComplexMatrix,
    #[serde(rename = "A22")]
    a22: ComplexMatrix,
    #[serde(rename = "B1")]
    b1: ComplexMatrix,
    #[serde(rename = "B2")]
    b2: ComplexMatrix,
    #[serde(rename = "C1")]
    c1: ComplexMatrix,
    #[serde(rename = "C2")]
    c2: ComplexMatrix,
    #[serde(rename = "D")]
    d: ComplexMatrix,
}

impl From<GeneralColligation> for GeneralRepr {
    fn from(c: GeneralColligation) -> Self {
        GeneralRepr {
            a11: c.a11,
            a12: c.a12,
            a21: c.a21,
            a22: c.a22,
            b1: c.b1,
            b2: c.b2,
            c1: c.c1,
            c2: c.c2,
            d: c.d,
        }
    }
}

impl TryFrom<GeneralRepr> for GeneralColligation {
    type Error = Error;
    fn try_from(r: GeneralRepr) -> Result<Self> {
        GeneralColligation::new(r.a11, r.a12, r.a21, r.a22, r.b1, r.b2, r.c1, r.c2, r.d)
    }
}

/// Colligation with the symmetric block structure `(A1 A2; A2 A1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymmetricRepr", into = "SymmetricRepr")]
pub struct SymmetricColligation {
    a1: ComplexMatrix,
    a2: ComplexMatrix,
    b: ComplexMatrix,
    c: ComplexMatrix,
    d: ComplexMatrix,
}

impl SymmetricColligation {
    pub fn new(
        a1: ComplexMatrix,
        a2: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
    ) -> Result<Self> {
        let h = a1.rows();
        let y = d.rows();
        let u = d.cols();
        Ok(SymmetricColligation {
            a1: expect_block(a1, h, h, "A1")?,
            a2: expect_block(a2, h, h, "A2")?,
            b: expect_block(b, h, u, "B")?,
            c: expect_block(c, y, h, "C")?,
            d,
        })
    }

    pub fn h(&self) -> usize {
        self.a1.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.d.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.d.rows()
    }

    pub fn a1(&self) -> &ComplexMatrix {
        &self.a1
    }
    pub fn a2(&self) -> &ComplexMatrix {
        &self.a2
    }
    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }
    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }
    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }

    /// Full colligation matrix `[[A1,A2,B],[A2,A1,B],[C,C,D]]`.
    pub fn assemble(&self) -> ComplexMatrix {
        ComplexMatrix::from_blocks(&[
            &[&self.a1, &self.a2, &self.b],
            &[&self.a2, &self.a1, &self.b],
            &[&self.c, &self.c, &self.d],
        ])
        .expect("validated blocks")
    }
}

#[derive(Serialize, Deserialize)]
struct SymmetricRepr {
    #[serde(rename = "A1")]
    a1: ComplexMatrix,
    #[serde(rename = "A2")]
    a2: ComplexMatrix,
    #[serde(rename = "B")]
    b: ComplexMatrix,
    #[serde(rename = "C")]
    c: ComplexMatrix,
    #[serde(rename = "D")]
    d: ComplexMatrix,
}

impl From<SymmetricColligation> for SymmetricRepr {
    fn from(c: SymmetricColligation) -> Self {
        SymmetricRepr {
            a1: c.a1,
            a2: c.a2,
            b: c.b,
            c: c.c,
            d: c.d,
        }
    }
}

impl TryFrom<SymmetricRepr> for SymmetricColligation {
    type Error = Error;
    fn try_from(r: SymmetricRepr) -> Result<Self> {
        SymmetricColligation::new(r.a1, r.a2, r.b, r.c, r.d)
    }
}

/// Colligation realizing a Schur-class function on the symmetrized bidisk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GammaRepr", into = "GammaRepr")]
pub struct GammaColligation {
    alpha1: ComplexMatrix,
    alpha2: ComplexMatrix,
    beta: ComplexMatrix,
    gamma: ComplexMatrix,
    delta: ComplexMatrix,
}

impl GammaColligation {
    pub fn new(
        alpha1: ComplexMatrix,
        alpha2: ComplexMatrix,
        beta: ComplexMatrix,
        gamma: ComplexMatrix,
        delta: ComplexMatrix,
    ) -> Result<Self> {
        let h = alpha1.rows();
        let y = delta.rows();
        let u = delta.cols();
        Ok(GammaColligation {
            alpha1: expect_block(alpha1, h, h, "alpha1")?,
            alpha2: expect_block(alpha2, h, h, "alpha2")?,
            beta: expect_block(beta, h, u, "beta")?,
            gamma: expect_block(gamma, y, h, "gamma")?,
            delta,
        })
    }

    pub fn h(&self) -> usize {
        self.alpha1.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.delta.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.delta.rows()
    }

    pub fn alpha1(&self) -> &ComplexMatrix {
        &self.alpha1
    }
    pub fn alpha2(&self) -> &ComplexMatrix {
        &self.alpha2
    }
    pub fn beta(&self) -> &ComplexMatrix {
        &self.beta
    }
    pub fn gamma(&self) -> &ComplexMatrix {
        &self.gamma
    }
    pub fn delta(&self) -> &ComplexMatrix {
        &self.delta
    }

    /// Full colligation matrix `[[alpha1,0,beta],[0,alpha2,0],[gamma,0,delta]]`.
    pub fn assemble(&self) -> ComplexMatrix {
        let h = self.h();
        let z_hh = ComplexMatrix::zeros(h, h);
        let z_hu = ComplexMatrix::zeros(h, self.input_dim());
        let z_yh = ComplexMatrix::zeros(self.output_dim(), h);
        ComplexMatrix::from_blocks(&[
            &[&self.alpha1, &z_hh, &self.beta],
            &[&z_hh, &self.alpha2, &z_hu],
            &[&self.gamma, &z_yh, &self.delta],
        ])
        .expect("validated blocks")
    }
}

#[derive(Serialize, Deserialize)]
struct GammaRepr {
    alpha1: ComplexMatrix,
    alpha2: ComplexMatrix,
    beta: ComplexMatrix,
    gamma: ComplexMatrix,
    delta: ComplexMatrix,
}

impl From<GammaColligation> for GammaRepr {
    fn from(c: GammaColligation) -> Self {
        GammaRepr {
            alpha1: c.alpha1,
            alpha2: c.alpha2,
            beta: c.beta,
            gamma: c.gamma,
            delta: c.delta,
        }
    }
}

impl TryFrom<GammaRepr> for GammaColligation {
    type Error = Error;
    fn try_from(r: GammaRepr) -> Result<Self> {
        GammaColligation::new(r.alpha1, r.alpha2, r.beta, r.gamma, r.delta)
    }
}

/// Any of the three colligation kinds, tagged for JSON interchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AnyColligation {
    General(GeneralColligation),
    Symmetric(SymmetricColligation),
    Gamma(GammaColligation),
}

fn check_bidisk_point(z: Cx, zeta: Cx, allow_boundary: bool) -> Result<()> {
    let inside = if allow_boundary {
        z.norm() <= 1.0 + 1e-10 && zeta.norm() <= 1.0 + 1e-10
    } else {
        z.norm() < 1.0 && zeta.norm() < 1.0
    };
    if inside {
        Ok(())
    } else {
        Err(Error::OutsideDomain { at: (z, zeta) })
    }
}

fn check_g_point(s: Cx, p: Cx, allow_boundary: bool) -> Result<()> {
    let lifted = pick::lift_point(s, p);
    let inside = if allow_boundary {
        lifted.z.norm() <= 1.0 + 1e-10 && lifted.zeta.norm() <= 1.0 + 1e-10
    } else {
        lifted.in_g
    };
    if inside {
        Ok(())
    } else {
        Err(Error::OutsideDomain { at: (s, p) })
    }
}

/// Core transfer-function evaluation `D + C Z (I - A Z)^{-1} B` where `Z`
/// is the diagonal with the given entries.
fn transfer_value(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    zdiag: &[Cx],
    at: (Cx, Cx),
) -> Result<ComplexMatrix> {
    if zdiag.is_empty() {
        return Ok(d.clone());
    }
    let az = a.scale_cols(zdiag);
    let resolvent_arg = &ComplexMatrix::identity(zdiag.len()) - &az;
    let x = match numkit::lu_solve(&resolvent_arg, b) {
        Ok(x) => x,
        Err(Error::SingularSystem) => return Err(Error::EvalSingular { at }),
        Err(e) => return Err(e),
    };
    let zx = x.scale_rows(zdiag);
    Ok(&c.matmul(&zx) + d)
}

/// Evaluate a general colligation's transfer function on the open bidisk.
pub fn eval_general(c: &GeneralColligation, z: Cx, zeta: Cx) -> Result<ComplexMatrix> {
    eval_general_with(c, z, zeta, false)
}

/// As [`eval_general`], optionally admitting closure points, where the
/// resolvent may be singular.
pub fn eval_general_with(
    c: &GeneralColligation,
    z: Cx,
    zeta: Cx,
    allow_boundary: bool,
) -> Result<ComplexMatrix> {
    check_bidisk_point(z, zeta, allow_boundary)?;
    let mut zdiag = vec![z; c.h1()];
    zdiag.extend(std::iter::repeat(zeta).take(c.h2()));
    let b = ComplexMatrix::vstack(&c.b1, &c.b2).expect("validated blocks");
    let cc = ComplexMatrix::hstack(&c.c1, &c.c2).expect("validated blocks");
    transfer_value(&c.state_matrix(), &b, &cc, &c.d, &zdiag, (z, zeta))
}

/// Evaluate a symmetric colligation's transfer function on the open bidisk.
pub fn eval_symmetric(c: &SymmetricColligation, z: Cx, zeta: Cx) -> Result<ComplexMatrix> {
    eval_symmetric_with(c, z, zeta, false)
}

/// As [`eval_symmetric`], optionally admitting closure points.
pub fn eval_symmetric_with(
    c: &SymmetricColligation,
    z: Cx,
    zeta: Cx,
    allow_boundary: bool,
) -> Result<ComplexMatrix> {
    check_bidisk_point(z, zeta, allow_boundary)?;
    let h = c.h();
    let mut zdiag = vec![z; h];
    zdiag.extend(std::iter::repeat(zeta).take(h));
    let a = ComplexMatrix::from_blocks(&[&[&c.a1, &c.a2], &[&c.a2, &c.a1]])
        .expect("validated blocks");
    let b = ComplexMatrix::vstack(&c.b, &c.b).expect("validated blocks");
    let cc = ComplexMatrix::hstack(&c.c, &c.c).expect("validated blocks");
    transfer_value(&a, &b, &cc, &c.d, &zdiag, (z, zeta))
}

/// Evaluate a gamma colligation at `(s, p)` in the symmetrized bidisk:
/// `delta + 1/2 gamma (sI - 2p alpha2)(I - s/2(alpha1+alpha2) + p alpha1 alpha2)^{-1} beta`.
pub fn eval_gamma(c: &GammaColligation, s: Cx, p: Cx) -> Result<ComplexMatrix> {
    eval_gamma_with(c, s, p, false)
}

/// As [`eval_gamma`], optionally admitting closure points.
pub fn eval_gamma_with(
    c: &GammaColligation,
    s: Cx,
    p: Cx,
    allow_boundary: bool,
) -> Result<ComplexMatrix> {
    check_g_point(s, p, allow_boundary)?;
    eval_gamma_unchecked(c, s, p)
}

fn eval_gamma_unchecked(c: &GammaColligation, s: Cx, p: Cx) -> Result<ComplexMatrix> {
    let h = c.h();
    if h == 0 {
        return Ok(c.delta.clone());
    }
    let alpha_sum = &c.alpha1 + &c.alpha2;
    let alpha_prod = c.alpha1.matmul(&c.alpha2);
    eval_gamma_cached(c, &alpha_sum, &alpha_prod, s, p)
}

/// Evaluation core with the `alpha1 + alpha2` and `alpha1 alpha2` products
/// precomputed; grid sweeps reuse them across points.
fn eval_gamma_cached(
    c: &GammaColligation,
    alpha_sum: &ComplexMatrix,
    alpha_prod: &ComplexMatrix,
    s: Cx,
    p: Cx,
) -> Result<ComplexMatrix> {
    let h = c.h();
    if h == 0 {
        return Ok(c.delta.clone());
    }
    let mid = &(&ComplexMatrix::identity(h) - &alpha_sum.scale(s * 0.5)) + &alpha_prod.scale(p);
    let x = match numkit::lu_solve(&mid, &c.beta) {
        Ok(x) => x,
        Err(Error::SingularSystem) => return Err(Error::EvalSingular { at: (s, p) }),
        Err(e) => return Err(e),
    };
    // gamma (s/2 X - p alpha2 X)
    let core = &x.scale(s * 0.5) - &c.alpha2.matmul(&x).scale(p);
    Ok(&c.gamma.matmul(&core) + &c.delta)
}

/// Symmetrize a general colligation: the output realizes
/// `(f(z,zeta) + f(zeta,z)) / 2` and is a contraction whenever the input is.
pub fn symmetrize(c: &GeneralColligation) -> SymmetricColligation {
    let h1 = c.h1();
    let h2 = c.h2();
    let z12 = ComplexMatrix::zeros(h1, h2);
    let z21 = ComplexMatrix::zeros(h2, h1);
    let z11 = ComplexMatrix::zeros(h1, h1);
    let z22 = ComplexMatrix::zeros(h2, h2);
    let a1 = ComplexMatrix::from_blocks(&[&[&c.a11, &z12], &[&z21, &c.a22]])
        .expect("validated blocks");
    let a2 = ComplexMatrix::from_blocks(&[&[&z11, &c.a12], &[&c.a21, &z22]])
        .expect("validated blocks");
    let b = ComplexMatrix::vstack(&c.b1, &c.b2)
        .expect("validated blocks")
        .scale_re(FRAC_1_SQRT_2);
    let cc = ComplexMatrix::hstack(&c.c1, &c.c2)
        .expect("validated blocks")
        .scale_re(FRAC_1_SQRT_2);
    SymmetricColligation::new(a1, a2, b, cc, c.d.clone()).expect("dims consistent")
}

/// Convert a symmetric colligation to gamma form:
/// `alpha1 = A1 + A2`, `alpha2 = A1 - A2`, `beta = sqrt(2) B`,
/// `gamma = sqrt(2) C`, `delta = D`. The gamma transfer function at
/// `(z + zeta, z*zeta)` equals the symmetric transfer function at `(z, zeta)`.
pub fn to_gamma(c: &SymmetricColligation) -> GammaColligation {
    GammaColligation::new(
        &c.a1 + &c.a2,
        &c.a1 - &c.a2,
        c.b.scale_re(SQRT_2),
        c.c.scale_re(SQRT_2),
        c.d.clone(),
    )
    .expect("dims consistent")
}

/// Gamma realization straight from a general colligation; defined as the
/// composition of [`symmetrize`] and [`to_gamma`], so the two routes agree
/// block for block.
pub fn general_to_gamma(c: &GeneralColligation) -> GammaColligation {
    to_gamma(&symmetrize(c))
}

/// Structural report for any colligation kind.
#[derive(Debug, Clone, Serialize)]
pub struct ColligationReport {
    pub op_norm: f64,
    pub contractive: bool,
    /// State-space dimensions: `[h1, h2]` for general colligations,
    /// `[h, h]` otherwise.
    pub state_dims: [usize; 2],
    pub input_dim: usize,
    pub output_dim: usize,
}

/// Assemble the colligation matrix and report its operator norm and
/// structural dimensions.
pub fn check_colligation(c: &AnyColligation) -> ColligationReport {
    let (assembled, state_dims, input_dim, output_dim) = match c {
        AnyColligation::General(g) => (
            g.assemble(),
            [g.h1(), g.h2()],
            g.input_dim(),
            g.output_dim(),
        ),
        AnyColligation::Symmetric(s) => {
            (s.assemble(), [s.h(), s.h()], s.input_dim(), s.output_dim())
        }
        AnyColligation::Gamma(g) => (g.assemble(), [g.h(), g.h()], g.input_dim(), g.output_dim()),
    };
    let op_norm = numkit::op_norm(&assembled);
    ColligationReport {
        op_norm,
        contractive: op_norm <= 1.0 + CONTRACTION_TOL,
        state_dims,
        input_dim,
        output_dim,
    }
}

/// Result of a sup-norm sweep over the sampled domain.
#[derive(Debug, Clone)]
pub struct SupNormReport {
    pub max: f64,
    /// Point achieving the maximum: `(z, zeta)` for bidisk colligations,
    /// `(s, p)` for gamma colligations.
    pub argmax: (Cx, Cx),
    pub evaluated: usize,
    pub singular_skipped: usize,
}

fn value_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 1 && m.cols() == 1 {
        m[(0, 0)].norm()
    } else {
        numkit::op_norm(m)
    }
}

/// Sample the transfer function over the closed domain grid (`grid` radii
/// times `grid` phases per variable; the image of that grid for gamma
/// colligations) and report the largest singular value seen. Evaluation
/// singularities are recorded and skipped.
pub fn sup_norm_grid(c: &AnyColligation, grid: usize) -> Result<SupNormReport> {
    if grid < 2 {
        return Err(Error::BadGrid { min: 2, got: grid });
    }
    let points = poly2::disk_grid(grid);
    let n = points.len();

    struct Best {
        max: f64,
        index: (usize, usize),
        skipped: usize,
    }

    let fold = |acc: Best, item: Best| Best {
        max: if item.max > acc.max
            || (item.max == acc.max && item.index < acc.index)
        {
            item.max
        } else {
            acc.max
        },
        index: if item.max > acc.max
            || (item.max == acc.max && item.index < acc.index)
        {
            item.index
        } else {
            acc.index
        },
        skipped: acc.skipped + item.skipped,
    };

    let empty = || Best {
        max: f64::NEG_INFINITY,
        index: (usize::MAX, usize::MAX),
        skipped: 0,
    };

    let scan = |eval: &(dyn Fn(Cx, Cx) -> Result<ComplexMatrix> + Sync)| -> Best {
        (0..n)
            .into_par_iter()
            .map(|zi| {
                let mut local = empty();
                for wi in 0..n {
                    match eval(points[zi], points[wi]) {
                        Ok(v) => {
                            let norm = value_norm(&v);
                            if norm > local.max {
                                local.max = norm;
                                local.index = (zi, wi);
                            }
                        }
                        Err(Error::EvalSingular { .. }) => local.skipped += 1,
                        Err(_) => local.skipped += 1,
                    }
                }
                local
            })
            .reduce(empty, fold)
    };

    let best = match c {
        AnyColligation::General(g) => {
            scan(&|z, w| eval_general_with(g, z, w, true))
        }
        AnyColligation::Symmetric(s) => {
            scan(&|z, w| eval_symmetric_with(s, z, w, true))
        }
        AnyColligation::Gamma(g) => {
            let alpha_sum = &g.alpha1 + &g.alpha2;
            let alpha_prod = g.alpha1.matmul(&g.alpha2);
            scan(&|z, w| eval_gamma_cached(g, &alpha_sum, &alpha_prod, z + w, z * w))
        }
    };

    let argmax = if best.index.0 == usize::MAX {
        (Cx::ZERO, Cx::ZERO)
    } else {
        let (z, w) = (points[best.index.0], points[best.index.1]);
        match c {
            AnyColligation::Gamma(_) => (z + w, z * w),
            _ => (z, w),
        }
    };
    Ok(SupNormReport {
        max: if best.max.is_finite() { best.max } else { 0.0 },
        argmax,
        evaluated: n * n - best.skipped,
        singular_skipped: best.skipped,
    })
}
