//! Nevanlinna-Pick interpolation on the symmetrized bidisk.
//!
//! A problem on the symmetrized bidisk is pulled back to a symmetric
//! problem on the bidisk ([`build_symm_data`]), tested for solvability via
//! the kernel identity
//!
//! ```text
//! (1 - conj(w_i) w_j) = K1 o (1 - conj(z_i) z_j) + K2 o (1 - conj(zeta_i) zeta_j)
//! ```
//!
//! with `K1, K2` positive semidefinite (`o` the entrywise product), and a
//! solution is realized by the lurking contraction construction followed by
//! symmetrization and conversion to gamma form. The feasibility problem is
//! solved by Dykstra alternating projections between the product PSD cone
//! and the affine constraint set, whose projection decouples entrywise.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SolveStage};
use crate::numkit::{self, cx, ComplexMatrix, Cx};
use crate::realize::{
    self, AnyColligation, GammaColligation, GeneralColligation, SymmetricColligation,
};

/// Both roots of `t^2 - s t + p`, ordered lexicographically by real then
/// imaginary part, with a symmetrized-bidisk membership flag (both moduli
/// strictly below `1 - 1e-12`).
#[derive(Debug, Clone, Copy)]
pub struct LiftedPoint {
    pub z: Cx,
    pub zeta: Cx,
    pub in_g: bool,
}

/// Solve `t^2 - s t + p = 0` for the pair `(z, zeta)` with `z + zeta = s`
/// and `z * zeta = p`. Non-membership in the symmetrized bidisk is a flag,
/// not an error, so closure points can be inspected.
pub fn lift_point(s: Cx, p: Cx) -> LiftedPoint {
    let disc = (s * s - p * 4.0).sqrt();
    // Pick the additive branch that avoids cancellation.
    let d = if (s.conj() * disc).re < 0.0 { -disc } else { disc };
    let t1 = (s + d) * 0.5;
    let t2 = if t1.norm() > 0.0 { p / t1 } else { (s - d) * 0.5 };
    let (z, zeta) = if (t2.re, t2.im) < (t1.re, t1.im) {
        (t2, t1)
    } else {
        (t1, t2)
    };
    let in_g = z.norm() < 1.0 - 1e-12 && zeta.norm() < 1.0 - 1e-12;
    LiftedPoint { z, zeta, in_g }
}

/// Interpolation data on the symmetrized bidisk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemGRepr", into = "ProblemGRepr")]
pub struct PickProblemG {
    nodes: Vec<(Cx, Cx)>,
    values: Vec<Cx>,
}

impl PickProblemG {
    /// Validate that every node lies in the symmetrized bidisk and nodes
    /// are pairwise distinct.
    pub fn new(nodes: Vec<(Cx, Cx)>, values: Vec<Cx>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        for (i, &(s, p)) in nodes.iter().enumerate() {
            if !(s.re.is_finite() && s.im.is_finite() && p.re.is_finite() && p.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: 0 });
            }
            if !lift_point(s, p).in_g {
                return Err(Error::OutsideDomain { at: (s, p) });
            }
            for &(s2, p2) in &nodes[..i] {
                if s == s2 && p == p2 {
                    return Err(Error::InvalidInput(format!(
                        "duplicate node ({}, {})",
                        s, p
                    )));
                }
            }
        }
        Ok(PickProblemG { nodes, values })
    }

    pub fn nodes(&self) -> &[(Cx, Cx)] {
        &self.nodes
    }

    pub fn values(&self) -> &[Cx] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct ProblemGRepr {
    nodes: Vec<NodeRepr>,
    values: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct NodeRepr {
    s: (f64, f64),
    p: (f64, f64),
}

impl From<PickProblemG> for ProblemGRepr {
    fn from(g: PickProblemG) -> Self {
        ProblemGRepr {
            nodes: g
                .nodes
                .iter()
                .map(|&(s, p)| NodeRepr {
                    s: (s.re, s.im),
                    p: (p.re, p.im),
                })
                .collect(),
            values: g.values.iter().map(|w| (w.re, w.im)).collect(),
        }
    }
}

impl TryFrom<ProblemGRepr> for PickProblemG {
    type Error = Error;
    fn try_from(r: ProblemGRepr) -> Result<Self> {
        PickProblemG::new(
            r.nodes
                .into_iter()
                .map(|n| (cx(n.s.0, n.s.1), cx(n.p.0, n.p.1)))
                .collect(),
            r.values.into_iter().map(|(re, im)| cx(re, im)).collect(),
        )
    }
}

/// How a bidisk node relates to the swap `(z, zeta) -> (zeta, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SymOrbit {
    /// A node with `z = zeta`, fixed by the swap.
    Diagonal { node: usize },
    /// Two nodes exchanged by the swap, carrying the same value.
    Pair { first: usize, second: usize },
}

/// Symmetric interpolation data on the bidisk: every off-diagonal node
/// appears together with its swap, carrying the same value.
#[derive(Debug, Clone, PartialEq)]
pub struct PickProblemD2 {
    nodes: Vec<(Cx, Cx)>,
    values: Vec<Cx>,
    sym_orbits: Vec<SymOrbit>,
}

impl PickProblemD2 {
    /// Validate the swap invariant: for each node with `z != zeta` there is
    /// a node `(zeta, z)` carrying the same value.
    pub fn new(nodes: Vec<(Cx, Cx)>, values: Vec<Cx>, sym_orbits: Vec<SymOrbit>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        for &(z, zeta) in &nodes {
            if z.norm() >= 1.0 || zeta.norm() >= 1.0 {
                return Err(Error::OutsideDomain { at: (z, zeta) });
            }
        }
        let mut seen = vec![false; nodes.len()];
        for orbit in &sym_orbits {
            match *orbit {
                SymOrbit::Diagonal { node } => {
                    let (z, zeta) = nodes[node];
                    if z != zeta {
                        return Err(Error::InvalidInput(format!(
                            "orbit marks node {node} diagonal but z != zeta"
                        )));
                    }
                    seen[node] = true;
                }
                SymOrbit::Pair { first, second } => {
                    let (z1, zeta1) = nodes[first];
                    let (z2, zeta2) = nodes[second];
                    if z1 != zeta2 || zeta1 != z2 {
                        return Err(Error::InvalidInput(format!(
                            "orbit ({first},{second}) nodes are not swaps of each other"
                        )));
                    }
                    if values[first] != values[second] {
                        return Err(Error::ConflictingNode {
                            node: nodes[first],
                            first: values[first],
                            second: values[second],
                        });
                    }
                    seen[first] = true;
                    seen[second] = true;
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput(
                "every node must belong to a symmetry orbit".to_string(),
            ));
        }
        Ok(PickProblemD2 {
            nodes,
            values,
            sym_orbits,
        })
    }

    pub fn nodes(&self) -> &[(Cx, Cx)] {
        &self.nodes
    }

    pub fn values(&self) -> &[Cx] {
        &self.values
    }

    pub fn sym_orbits(&self) -> &[SymOrbit] {
        &self.sym_orbits
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Expand a symmetrized-bidisk problem into the associated symmetric
/// bidisk problem: each node lifts to its root pair, emitted once when the
/// roots coincide and as both orderings otherwise.
pub fn build_symm_data(g: &PickProblemG) -> Result<PickProblemD2> {
    let mut nodes: Vec<(Cx, Cx)> = Vec::new();
    let mut values: Vec<Cx> = Vec::new();
    let mut orbits: Vec<SymOrbit> = Vec::new();
    let push = |node: (Cx, Cx), w: Cx, nodes: &mut Vec<(Cx, Cx)>, values: &mut Vec<Cx>| -> Result<Option<usize>> {
        if let Some(k) = nodes.iter().position(|&n| n == node) {
            if values[k] != w {
                return Err(Error::ConflictingNode {
                    node,
                    first: values[k],
                    second: w,
                });
            }
            return Ok(None);
        }
        nodes.push(node);
        values.push(w);
        Ok(Some(nodes.len() - 1))
    };
    for (&(s, p), &w) in g.nodes.iter().zip(&g.values) {
        let lifted = lift_point(s, p);
        if lifted.z == lifted.zeta {
            if let Some(i) = push((lifted.z, lifted.zeta), w, &mut nodes, &mut values)? {
                orbits.push(SymOrbit::Diagonal { node: i });
            }
        } else {
            let first = push((lifted.z, lifted.zeta), w, &mut nodes, &mut values)?;
            let second = push((lifted.zeta, lifted.z), w, &mut nodes, &mut values)?;
            if let (Some(i), Some(j)) = (first, second) {
                orbits.push(SymOrbit::Pair { first: i, second: j });
            }
        }
    }
    PickProblemD2::new(nodes, values, orbits)
}

/// The three Pick kernel matrices `W`, `Pz`, `Pzeta` of a bidisk problem.
pub fn kernel_matrices(d: &PickProblemD2) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let n = d.len();
    let w = ComplexMatrix::from_fn(n, n, |i, j| Cx::ONE - d.values[i].conj() * d.values[j]);
    let pz = ComplexMatrix::from_fn(n, n, |i, j| Cx::ONE - d.nodes[i].0.conj() * d.nodes[j].0);
    let pzeta = ComplexMatrix::from_fn(n, n, |i, j| Cx::ONE - d.nodes[i].1.conj() * d.nodes[j].1);
    (w, pz, pzeta)
}

/// A feasibility certificate: PSD `K1`, `K2` with
/// `K1 o Pz + K2 o Pzeta = W` up to `residual`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AglerCertificate {
    #[serde(rename = "K1")]
    pub k1: ComplexMatrix,
    #[serde(rename = "K2")]
    pub k2: ComplexMatrix,
    /// Max entrywise `|W - K1 o Pz - K2 o Pzeta|`.
    pub residual: f64,
    /// Smaller of the minimal eigenvalues of `K1` and `K2`.
    pub eig_min: f64,
}

/// Entry-by-entry report on a candidate certificate.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub residual: f64,
    pub eig_min_k1: f64,
    pub eig_min_k2: f64,
}

/// Measure a candidate `(K1, K2)` against the kernel identity.
pub fn check_certificate(
    k1: &ComplexMatrix,
    k2: &ComplexMatrix,
    w: &ComplexMatrix,
    pz: &ComplexMatrix,
    pzeta: &ComplexMatrix,
) -> Result<CertificateReport> {
    let n = w.rows();
    for (name, m) in [("K1", k1), ("K2", k2), ("W", w), ("Pz", pz), ("Pzeta", pzeta)] {
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let combined = &k1.schur_product(pz) + &k2.schur_product(pzeta);
    let residual = w.max_abs_diff(&combined);
    let eig_min_k1 = min_eigenvalue(k1)?;
    let eig_min_k2 = min_eigenvalue(k2)?;
    Ok(CertificateReport {
        residual,
        eig_min_k1,
        eig_min_k2,
    })
}

fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    let (values, _) = numkit::hermitian_eigen(h)?;
    Ok(values.last().copied().unwrap_or(0.0))
}

/// Options for the feasibility solver.
#[derive(Debug, Clone, Copy)]
pub struct FeasOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FeasOptions {
    fn default() -> Self {
        FeasOptions {
            max_iter: 50_000,
            tol: 1e-10,
        }
    }
}

/// Outcome status of a feasibility run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasStatus {
    Feasible,
    Infeasible,
    Undetermined,
}

/// Result of [`feasibility`].
#[derive(Debug, Clone)]
pub struct FeasibilityOutcome {
    pub status: FeasStatus,
    pub certificate: Option<AglerCertificate>,
    pub iterations: usize,
    /// Human-readable reason for infeasible or undetermined outcomes.
    pub explanation: Option<String>,
}

struct Pair {
    a: ComplexMatrix,
    b: ComplexMatrix,
}

impl Pair {
    fn zeros(n: usize) -> Self {
        Pair {
            a: ComplexMatrix::zeros(n, n),
            b: ComplexMatrix::zeros(n, n),
        }
    }

    fn add(&self, rhs: &Pair) -> Pair {
        Pair {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        }
    }

    fn sub(&self, rhs: &Pair) -> Pair {
        Pair {
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
        }
    }
}

/// Decide the existence of PSD `K1, K2` with `K1 o Pz + K2 o Pzeta = W` by
/// Dykstra alternating projections between the product PSD cone and the
/// affine set; the affine projection decouples into a closed-form
/// two-unknown least-squares update per entry.
///
/// Infeasibility is only certified by the scalar separation argument on
/// diagonal entries (nonnegative kernel diagonals forcing a negative sum);
/// anything else that fails to converge is reported undetermined.
pub fn feasibility(
    w: &ComplexMatrix,
    pz: &ComplexMatrix,
    pzeta: &ComplexMatrix,
    opts: FeasOptions,
) -> Result<FeasibilityOutcome> {
    let n = w.rows();
    for (name, m) in [("W", w), ("Pz", pz), ("Pzeta", pzeta)] {
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {n}x{n}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.is_hermitian(1e-8 * m.max_abs().max(1.0)) {
            return Err(Error::InvalidInput(format!("{name} is not Hermitian")));
        }
    }
    if n == 0 {
        return Ok(FeasibilityOutcome {
            status: FeasStatus::Feasible,
            certificate: Some(AglerCertificate {
                k1: ComplexMatrix::zeros(0, 0),
                k2: ComplexMatrix::zeros(0, 0),
                residual: 0.0,
                eig_min: 0.0,
            }),
            iterations: 0,
            explanation: None,
        });
    }
    let w = w.hermitian_part();
    let pz = pz.hermitian_part();
    let pzeta = pzeta.hermitian_part();

    // Scalar separation: diagonal entries of PSD matrices are nonnegative,
    // so W_ii must lie in the cone spanned by Pz_ii and Pzeta_ii.
    for i in 0..n {
        let (wi, pi, qi) = (w[(i, i)].re, pz[(i, i)].re, pzeta[(i, i)].re);
        let reachable = |t: f64| -> bool {
            if pi >= 0.0 && qi >= 0.0 {
                t >= -opts.tol
            } else if pi <= 0.0 && qi <= 0.0 {
                t <= opts.tol
            } else {
                true
            }
        };
        if !reachable(wi) {
            return Ok(FeasibilityOutcome {
                status: FeasStatus::Infeasible,
                certificate: None,
                iterations: 0,
                explanation: Some(format!(
                    "scalar separation at diagonal entry {i}: \
                     K1[{i}][{i}]*{pi} + K2[{i}][{i}]*{qi} = {wi} has no solution \
                     with nonnegative K1[{i}][{i}], K2[{i}][{i}]"
                )),
            });
        }
    }

    // Entrywise affine-consistent start: K1 = K2 = W / (Pz + Pzeta).
    let init = ComplexMatrix::from_fn(n, n, |i, j| {
        let denom = pz[(i, j)] + pzeta[(i, j)];
        if denom.norm() < 1e-14 {
            Cx::ZERO
        } else {
            w[(i, j)] / denom
        }
    })
    .hermitian_part();
    let mut x = Pair {
        a: init.clone(),
        b: init,
    };
    let mut p_corr = Pair::zeros(n);
    let mut q_corr = Pair::zeros(n);

    let affine_project = |pair: &Pair| -> Pair {
        let mut a = pair.a.clone();
        let mut b = pair.b.clone();
        for i in 0..n {
            for j in 0..n {
                let (pc, qc) = (pz[(i, j)], pzeta[(i, j)]);
                let scale = pc.norm_sqr() + qc.norm_sqr();
                if scale < 1e-28 {
                    continue;
                }
                let gap = (w[(i, j)] - pc * a[(i, j)] - qc * b[(i, j)]) / scale;
                a[(i, j)] += pc.conj() * gap;
                b[(i, j)] += qc.conj() * gap;
            }
        }
        Pair { a, b }
    };

    let mut best_residual = f64::INFINITY;
    let mut best_iteration = 0usize;
    for it in 1..=opts.max_iter {
        // Project onto the product PSD cone with Dykstra correction.
        let shifted = x.add(&p_corr);
        let y = Pair {
            a: numkit::psd_project(&shifted.a)?,
            b: numkit::psd_project(&shifted.b)?,
        };
        p_corr = shifted.sub(&y);

        // Check the PSD-side candidate against the affine constraint.
        let combined = &y.a.schur_product(&pz) + &y.b.schur_product(&pzeta);
        let residual = w.max_abs_diff(&combined);
        if residual <= opts.tol {
            let eig_min = min_eigenvalue(&y.a)?.min(min_eigenvalue(&y.b)?);
            if eig_min >= -opts.tol {
                return Ok(FeasibilityOutcome {
                    status: FeasStatus::Feasible,
                    certificate: Some(AglerCertificate {
                        k1: y.a,
                        k2: y.b,
                        residual,
                        eig_min,
                    }),
                    iterations: it,
                    explanation: None,
                });
            }
        }
        if residual < best_residual * (1.0 - 1e-6) {
            best_residual = residual;
            best_iteration = it;
        } else if it - best_iteration > 5_000 {
            return Ok(FeasibilityOutcome {
                status: FeasStatus::Undetermined,
                certificate: None,
                iterations: it,
                explanation: Some(format!(
                    "residual stalled at {best_residual:.3e} (correction norms {:.3e}, {:.3e})",
                    p_corr.a.frobenius_norm() + p_corr.b.frobenius_norm(),
                    q_corr.a.frobenius_norm() + q_corr.b.frobenius_norm(),
                )),
            });
        }

        // Project onto the affine set with Dykstra correction.
        let shifted = y.add(&q_corr);
        let z = affine_project(&shifted);
        q_corr = shifted.sub(&z);
        x = z;
    }
    Ok(FeasibilityOutcome {
        status: FeasStatus::Undetermined,
        certificate: None,
        iterations: opts.max_iter,
        explanation: Some(format!(
            "no certificate within {} iterations (best residual {best_residual:.3e})",
            opts.max_iter
        )),
    })
}

/// Partition a square contraction `V` (scalar channel first, then the two
/// state channels of sizes `r1`, `r2`) into a general colligation.
pub fn colligation_from_contraction(
    v: &ComplexMatrix,
    r1: usize,
    r2: usize,
) -> Result<GeneralColligation> {
    let n = 1 + r1 + r2;
    if v.rows() != n || v.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "V is {}x{}, expected {n}x{n} for state sizes ({r1}, {r2})",
            v.rows(),
            v.cols()
        )));
    }
    GeneralColligation::new(
        v.block(1, 1, r1, r1),
        v.block(1, 1 + r1, r1, r2),
        v.block(1 + r1, 1, r2, r1),
        v.block(1 + r1, 1 + r1, r2, r2),
        v.block(1, 0, r1, 1),
        v.block(1 + r1, 0, r2, 1),
        v.block(0, 1, 1, r1),
        v.block(0, 1 + r1, 1, r2),
        v.block(0, 0, 1, 1),
    )
}

/// Result of the lurking contraction construction.
#[derive(Debug, Clone)]
pub struct LurkingOutcome {
    pub colligation: GeneralColligation,
    /// The assembled contraction, scalar channel first.
    pub v: ComplexMatrix,
    pub gram_mismatch: f64,
    pub clip: f64,
}

/// Default bound on the certificate residual accepted by [`lurking`].
pub const LURKING_RESIDUAL_THRESHOLD: f64 = 1e-6;

/// Build an interpolating colligation from a feasibility certificate:
/// factor `K1 = U1* U1`, `K2 = U2* U2`, match the column families
/// `(1; z_j u_j; zeta_j u_j) -> (w_j; u_j; u_j)`, and extend by zero on the
/// orthogonal complement.
pub fn lurking(cert: &AglerCertificate, d: &PickProblemD2) -> Result<LurkingOutcome> {
    lurking_with_threshold(cert, d, LURKING_RESIDUAL_THRESHOLD)
}

/// As [`lurking`] with a configurable residual threshold.
pub fn lurking_with_threshold(
    cert: &AglerCertificate,
    d: &PickProblemD2,
    threshold: f64,
) -> Result<LurkingOutcome> {
    let n = d.len();
    let (w, pz, pzeta) = kernel_matrices(d);
    let report = check_certificate(&cert.k1, &cert.k2, &w, &pz, &pzeta)?;
    if report.residual > threshold {
        return Err(Error::CertificateResidual {
            residual: report.residual,
            threshold,
        });
    }
    let grams = [(&cert.k1, report.eig_min_k1), (&cert.k2, report.eig_min_k2)];
    let mut factors = Vec::with_capacity(2);
    for (k, eig_min) in grams {
        let lambda_max = numkit::hermitian_eigen(k)?.0.first().copied().unwrap_or(0.0);
        let tol = (1e-10 * lambda_max).max(2.0 * (-eig_min).max(0.0)).max(1e-14);
        factors.push(numkit::gram_factor_with_tol(k, Some(tol))?);
    }
    let u2 = factors.pop().expect("two factors");
    let u1 = factors.pop().expect("two factors");
    let (r1, r2) = (u1.rows(), u2.rows());

    let dim = 1 + r1 + r2;
    let mut x = ComplexMatrix::zeros(dim, n);
    let mut y = ComplexMatrix::zeros(dim, n);
    for j in 0..n {
        let (z, zeta) = d.nodes[j];
        x[(0, j)] = Cx::ONE;
        y[(0, j)] = d.values[j];
        for r in 0..r1 {
            x[(1 + r, j)] = z * u1[(r, j)];
            y[(1 + r, j)] = u1[(r, j)];
        }
        for r in 0..r2 {
            x[(1 + r1 + r, j)] = zeta * u2[(r, j)];
            y[(1 + r1 + r, j)] = u2[(r, j)];
        }
    }
    let span = numkit::solve_on_span(&x, &y)?;
    let colligation = colligation_from_contraction(&span.v, r1, r2)?;
    Ok(LurkingOutcome {
        colligation,
        v: span.v,
        gram_mismatch: span.gram_mismatch,
        clip: span.clip,
    })
}

/// Options for the end-to-end solver.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Points per grid axis for the sup-norm diagnostic.
    pub grid: usize,
    /// Seed for the supplementary pseudo-random sup-norm sample.
    pub seed: u64,
    pub lurking_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 50_000,
            tol: 1e-10,
            grid: 41,
            seed: 0,
            lurking_threshold: LURKING_RESIDUAL_THRESHOLD,
        }
    }
}

/// Per-node interpolation errors and a sampled sup-norm of the solution.
#[derive(Debug, Clone, Serialize)]
pub struct SolveDiagnostics {
    pub interp_errors: Vec<f64>,
    pub sup_norm_sample: f64,
    pub gram_mismatch: f64,
    pub clip: f64,
}

/// Result of [`solve_g`].
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: FeasStatus,
    pub gamma: Option<GammaColligation>,
    pub certificate: Option<AglerCertificate>,
    pub diagnostics: Option<SolveDiagnostics>,
    pub iterations: usize,
    pub explanation: Option<String>,
}

/// End-to-end Nevanlinna-Pick solve on the symmetrized bidisk:
/// lift to the symmetric bidisk problem, run feasibility, apply the lurking
/// contraction, symmetrize (making the swapped node pair consistent), and
/// convert to gamma form.
pub fn solve_g(problem: &PickProblemG, opts: SolveOptions) -> Result<SolveOutcome> {
    let d2 = build_symm_data(problem).map_err(|e| e.at_stage(SolveStage::BuildSymmData))?;
    let (w, pz, pzeta) = kernel_matrices(&d2);
    let feas = feasibility(
        &w,
        &pz,
        &pzeta,
        FeasOptions {
            max_iter: opts.max_iter,
            tol: opts.tol,
        },
    )
    .map_err(|e| e.at_stage(SolveStage::Feasibility))?;
    let cert = match feas.certificate {
        Some(c) if feas.status == FeasStatus::Feasible => c,
        _ => {
            return Ok(SolveOutcome {
                status: feas.status,
                gamma: None,
                certificate: None,
                diagnostics: None,
                iterations: feas.iterations,
                explanation: feas.explanation,
            })
        }
    };
    let lurked = lurking_with_threshold(&cert, &d2, opts.lurking_threshold)
        .map_err(|e| e.at_stage(SolveStage::Lurking))?;
    let symmetric: SymmetricColligation = realize::symmetrize(&lurked.colligation);
    let gamma = realize::to_gamma(&symmetric);

    let mut interp_errors = Vec::with_capacity(problem.len());
    for (&(s, p), &wv) in problem.nodes.iter().zip(&problem.values) {
        let got = realize::eval_gamma(&gamma, s, p)
            .map_err(|e| e.at_stage(SolveStage::Diagnostics))?;
        interp_errors.push((got[(0, 0)] - wv).norm());
    }
    let sup = realize::sup_norm_grid(&AnyColligation::Gamma(gamma.clone()), opts.grid)
        .map_err(|e| e.at_stage(SolveStage::Diagnostics))?;
    let mut sup_norm_sample = sup.max;
    // Supplementary pseudo-random interior sample, seeded for determinism.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..200 {
        let (s, p) = random_g_point(&mut rng);
        if let Ok(v) = realize::eval_gamma(&gamma, s, p) {
            sup_norm_sample = sup_norm_sample.max(v[(0, 0)].norm());
        }
    }

    Ok(SolveOutcome {
        status: FeasStatus::Feasible,
        gamma: Some(gamma),
        certificate: Some(cert),
        diagnostics: Some(SolveDiagnostics {
            interp_errors,
            sup_norm_sample,
            gram_mismatch: lurked.gram_mismatch,
            clip: lurked.clip,
        }),
        iterations: feas.iterations,
        explanation: None,
    })
}

/// Uniform-ish pseudo-random point of the open symmetrized bidisk, drawn
/// by sampling the bidisk and mapping through `(z + zeta, z*zeta)`.
pub fn random_g_point(rng: &mut impl Rng) -> (Cx, Cx) {
    let z = random_disk_point(rng);
    let zeta = random_disk_point(rng);
    (z + zeta, z * zeta)
}

/// Pseudo-random point of the open unit disk.
pub fn random_disk_point(rng: &mut impl Rng) -> Cx {
    let r = rng.gen_range(0.0f64..1.0).sqrt() * (1.0 - 1e-9);
    let t = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    cx(r * t.cos(), r * t.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQ: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn example_problem() -> PickProblemG {
        PickProblemG::new(
            vec![(Cx::ZERO, Cx::ZERO), (Cx::ZERO, cx(0.5, 0.0))],
            vec![Cx::ZERO, cx(0.5, 0.0)],
        )
        .unwrap()
    }

    fn rank_two_certificate() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[0.5, 0.5, 0.5],
            &[0.5, 0.75, 0.25],
            &[0.5, 0.25, 0.75],
        ])
    }

    fn exact_kernels() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        let w = ComplexMatrix::from_real_rows(&[
            &[1.0, 1.0, 1.0],
            &[1.0, 0.75, 0.75],
            &[1.0, 0.75, 0.75],
        ]);
        let p = ComplexMatrix::from_real_rows(&[
            &[1.0, 1.0, 1.0],
            &[1.0, 0.5, 1.5],
            &[1.0, 1.5, 0.5],
        ]);
        (w, p.clone(), p)
    }

    #[test]
    fn lift_point_cases() {
        let l = lift_point(Cx::ZERO, Cx::ZERO);
        assert_eq!((l.z, l.zeta), (Cx::ZERO, Cx::ZERO));
        assert!(l.in_g);

        let l = lift_point(Cx::ZERO, cx(0.5, 0.0));
        assert!((l.z - cx(0.0, -SQ)).norm() < 1e-15);
        assert!((l.zeta - cx(0.0, SQ)).norm() < 1e-15);
        assert!(l.in_g);

        let l = lift_point(cx(1.9, 0.0), cx(0.9025, 0.0));
        assert!((l.z - cx(0.95, 0.0)).norm() < 1e-6);
        assert!((l.zeta - cx(0.95, 0.0)).norm() < 1e-6);
        assert!(l.in_g);

        let l = lift_point(cx(2.0, 0.0), Cx::ONE);
        assert!(!l.in_g);
    }

    #[test]
    fn lift_point_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let s = cx(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let p = cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let l = lift_point(s, p);
            let scale = s.norm().max(p.norm()).max(1.0);
            assert!((l.z + l.zeta - s).norm() < 1e-12 * scale);
            assert!((l.z * l.zeta - p).norm() < 1e-12 * scale);
            // Deterministic ordering.
            assert!((l.z.re, l.z.im) <= (l.zeta.re, l.zeta.im));
        }
    }

    #[test]
    fn build_symm_data_cases() {
        let d2 = build_symm_data(&example_problem()).unwrap();
        assert_eq!(d2.len(), 3);
        assert_eq!(d2.nodes()[0], (Cx::ZERO, Cx::ZERO));
        assert!((d2.nodes()[1].0 - cx(0.0, -SQ)).norm() < 1e-15);
        assert!((d2.nodes()[1].1 - cx(0.0, SQ)).norm() < 1e-15);
        assert_eq!(d2.nodes()[2], (d2.nodes()[1].1, d2.nodes()[1].0));
        assert_eq!(d2.values()[1], cx(0.5, 0.0));
        assert_eq!(d2.values()[2], cx(0.5, 0.0));
        assert_eq!(
            d2.sym_orbits(),
            &[
                SymOrbit::Diagonal { node: 0 },
                SymOrbit::Pair { first: 1, second: 2 }
            ]
        );

        let coincident = PickProblemG::new(
            vec![(cx(1.9, 0.0), cx(0.9025, 0.0))],
            vec![cx(0.1, 0.0)],
        )
        .unwrap();
        let d2 = build_symm_data(&coincident).unwrap();
        assert_eq!(d2.len(), 1);

        let empty = PickProblemG::new(vec![], vec![]).unwrap();
        assert_eq!(build_symm_data(&empty).unwrap().len(), 0);
    }

    #[test]
    fn kernel_matrices_match_fixture() {
        let d2 = build_symm_data(&example_problem()).unwrap();
        let (w, pz, pzeta) = kernel_matrices(&d2);
        let (we, pe, _) = exact_kernels();
        assert!(w.max_abs_diff(&we) < 1e-15);
        assert!(pz.max_abs_diff(&pe) < 1e-15);
        assert!(pzeta.max_abs_diff(&pe) < 1e-15);

        let single = PickProblemD2::new(
            vec![(Cx::ZERO, Cx::ZERO)],
            vec![cx(2.0, 0.0)],
            vec![SymOrbit::Diagonal { node: 0 }],
        )
        .unwrap();
        let (w, _, _) = kernel_matrices(&single);
        assert_eq!(w[(0, 0)], cx(-3.0, 0.0));
    }

    #[test]
    fn check_certificate_fixture() {
        let k = rank_two_certificate();
        let (w, pz, pzeta) = exact_kernels();
        let report = check_certificate(&k, &k, &w, &pz, &pzeta).unwrap();
        assert!(report.residual <= 1e-15);
        assert!(report.eig_min_k1 >= -1e-15);
        assert!(report.eig_min_k2 >= -1e-15);

        let (values, _) = numkit::hermitian_eigen(&k).unwrap();
        let expected = [1.5, 0.5, 0.0];
        for (got, want) in values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }

        let zero = ComplexMatrix::zeros(3, 3);
        let report = check_certificate(&zero, &zero, &w, &pz, &pzeta).unwrap();
        assert!((report.residual - 1.0).abs() < 1e-15);

        let mut bumped = k.clone();
        bumped[(0, 0)] += cx(0.1, 0.0);
        let report = check_certificate(&bumped, &k, &w, &pz, &pzeta).unwrap();
        assert!((report.residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn feasibility_example_and_scalars() {
        let (w, pz, pzeta) = exact_kernels();
        let out = feasibility(&w, &pz, &pzeta, FeasOptions::default()).unwrap();
        assert_eq!(out.status, FeasStatus::Feasible);
        let cert = out.certificate.unwrap();
        let report = check_certificate(&cert.k1, &cert.k2, &w, &pz, &pzeta).unwrap();
        assert!(report.residual <= 1e-10);
        assert!(report.eig_min_k1 >= -1e-10 && report.eig_min_k2 >= -1e-10);

        let one = ComplexMatrix::scalar(Cx::ONE);
        let out = feasibility(&one, &one, &one, FeasOptions::default()).unwrap();
        assert_eq!(out.status, FeasStatus::Feasible);

        let w_bad = ComplexMatrix::scalar(cx(-3.0, 0.0));
        let out = feasibility(&w_bad, &one, &one, FeasOptions::default()).unwrap();
        assert_eq!(out.status, FeasStatus::Infeasible);
        assert!(out.explanation.unwrap().contains("scalar separation"));
    }

    #[test]
    fn feasibility_certificates_are_sound() {
        // Data sampled from g(s, p) = p is solvable; the certificate the
        // solver returns must satisfy its own report.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        while nodes.len() < 3 {
            let (s, p) = random_g_point(&mut rng);
            if nodes.iter().all(|&(s2, p2)| (s2, p2) != (s, p)) {
                nodes.push((s, p));
                values.push(p);
            }
        }
        let problem = PickProblemG::new(nodes, values).unwrap();
        let d2 = build_symm_data(&problem).unwrap();
        let (w, pz, pzeta) = kernel_matrices(&d2);
        let out = feasibility(&w, &pz, &pzeta, FeasOptions::default()).unwrap();
        assert_eq!(out.status, FeasStatus::Feasible);
        let cert = out.certificate.unwrap();
        let report = check_certificate(&cert.k1, &cert.k2, &w, &pz, &pzeta).unwrap();
        assert!(report.residual <= 1e-10);
        assert!(report.eig_min_k1 >= -1e-10 && report.eig_min_k2 >= -1e-10);
    }

    #[test]
    fn lurking_single_node_cases() {
        // Zero value: the construction collapses to the zero function.
        let d2 = PickProblemD2::new(
            vec![(Cx::ZERO, Cx::ZERO)],
            vec![Cx::ZERO],
            vec![SymOrbit::Diagonal { node: 0 }],
        )
        .unwrap();
        let half = ComplexMatrix::scalar(cx(0.5, 0.0));
        let cert = AglerCertificate {
            k1: half.clone(),
            k2: half,
            residual: 0.0,
            eig_min: 0.5,
        };
        let out = lurking(&cert, &d2).unwrap();
        assert_eq!(out.colligation.h1(), 1);
        assert_eq!(out.colligation.h2(), 1);
        assert!(out.colligation.d()[(0, 0)].norm() < 1e-14);
        assert!(out.colligation.c1().max_abs() < 1e-14);
        assert!(out.colligation.c2().max_abs() < 1e-14);
        let v = realize::eval_general(&out.colligation, cx(0.3, 0.1), cx(-0.2, 0.2)).unwrap();
        assert!(v[(0, 0)].norm() < 1e-14);

        // Constant value c: f == c.
        let c = cx(0.3, -0.4);
        let k = (1.0 - c.norm_sqr()) / 2.0;
        let d2 = PickProblemD2::new(
            vec![(Cx::ZERO, Cx::ZERO)],
            vec![c],
            vec![SymOrbit::Diagonal { node: 0 }],
        )
        .unwrap();
        let km = ComplexMatrix::scalar(cx(k, 0.0));
        let cert = AglerCertificate {
            k1: km.clone(),
            k2: km,
            residual: 0.0,
            eig_min: k,
        };
        let out = lurking(&cert, &d2).unwrap();
        assert!((out.colligation.d()[(0, 0)] - c).norm() < 1e-14);
        let v = realize::eval_general(&out.colligation, cx(0.5, 0.0), cx(0.1, -0.3)).unwrap();
        assert!((v[(0, 0)] - c).norm() < 1e-12);
    }

    #[test]
    fn lurking_with_fixture_certificate() {
        let d2 = build_symm_data(&example_problem()).unwrap();
        let k = rank_two_certificate();
        let cert = AglerCertificate {
            k1: k.clone(),
            k2: k,
            residual: 0.0,
            eig_min: 0.0,
        };
        let out = lurking(&cert, &d2).unwrap();
        assert_eq!(out.v.rows(), 5);
        assert!(out.gram_mismatch < 1e-12);
        assert!(numkit::op_norm(&out.v) <= 1.0 + 1e-10);
        for (&(z, zeta), &wv) in d2.nodes().iter().zip(d2.values()) {
            let got = realize::eval_general(&out.colligation, z, zeta).unwrap();
            assert!((got[(0, 0)] - wv).norm() < 1e-9);
        }
    }

    #[test]
    fn lurking_rejects_bad_certificate() {
        let d2 = build_symm_data(&example_problem()).unwrap();
        let cert = AglerCertificate {
            k1: ComplexMatrix::zeros(3, 3),
            k2: ComplexMatrix::zeros(3, 3),
            residual: 1.0,
            eig_min: 0.0,
        };
        assert!(matches!(
            lurking(&cert, &d2),
            Err(Error::CertificateResidual { .. })
        ));
    }

    #[test]
    fn solve_example_end_to_end() {
        let opts = SolveOptions {
            grid: 11,
            ..SolveOptions::default()
        };
        let out = solve_g(&example_problem(), opts).unwrap();
        assert_eq!(out.status, FeasStatus::Feasible);
        let diag = out.diagnostics.unwrap();
        for e in &diag.interp_errors {
            assert!(*e <= 1e-8, "interp error {e}");
        }
        assert!(diag.sup_norm_sample <= 1.0 + 1e-6);
    }

    #[test]
    fn solve_single_node_and_infeasible() {
        let single =
            PickProblemG::new(vec![(Cx::ZERO, Cx::ZERO)], vec![Cx::ZERO]).unwrap();
        let out = solve_g(
            &single,
            SolveOptions {
                grid: 7,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(out.status, FeasStatus::Feasible);
        let gamma = out.gamma.unwrap();
        let v = realize::eval_gamma(&gamma, Cx::ZERO, Cx::ZERO).unwrap();
        assert!(v[(0, 0)].norm() < 1e-10);

        let impossible =
            PickProblemG::new(vec![(Cx::ZERO, Cx::ZERO)], vec![cx(2.0, 0.0)]).unwrap();
        let out = solve_g(&impossible, SolveOptions::default()).unwrap();
        assert_eq!(out.status, FeasStatus::Infeasible);
        assert!(out.explanation.unwrap().contains("scalar separation"));
    }

    #[test]
    fn solved_function_is_symmetric_on_bidisk() {
        let d2 = build_symm_data(&example_problem()).unwrap();
        let k = rank_two_certificate();
        let cert = AglerCertificate {
            k1: k.clone(),
            k2: k,
            residual: 0.0,
            eig_min: 0.0,
        };
        let lurked = lurking(&cert, &d2).unwrap();
        let sym = realize::symmetrize(&lurked.colligation);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..25 {
            let z = cx(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let w = cx(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let a = realize::eval_symmetric(&sym, z, w).unwrap()[(0, 0)];
            let b = realize::eval_symmetric(&sym, w, z).unwrap()[(0, 0)];
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn lift_order_does_not_change_solution() {
        // Relabel (z, zeta) -> (zeta, z) for every node; after
        // symmetrization both labelings must produce the same function.
        let problem = example_problem();
        let d2 = build_symm_data(&problem).unwrap();
        let swapped = PickProblemD2::new(
            d2.nodes().iter().map(|&(z, w)| (w, z)).collect(),
            d2.values().to_vec(),
            d2.sym_orbits().to_vec(),
        )
        .unwrap();
        let k = rank_two_certificate();
        let cert = AglerCertificate {
            k1: k.clone(),
            k2: k,
            residual: 0.0,
            eig_min: 0.0,
        };
        let g1 = realize::to_gamma(&realize::symmetrize(
            &lurking(&cert, &d2).unwrap().colligation,
        ));
        let g2 = realize::to_gamma(&realize::symmetrize(
            &lurking(&cert, &swapped).unwrap().colligation,
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let (s, p) = random_g_point(&mut rng);
            let a = realize::eval_gamma(&g1, s, p).unwrap()[(0, 0)];
            let b = realize::eval_gamma(&g2, s, p).unwrap()[(0, 0)];
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn problem_validation() {
        assert!(matches!(
            PickProblemG::new(vec![(cx(2.0, 0.0), Cx::ONE)], vec![Cx::ZERO]),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(matches!(
            PickProblemG::new(
                vec![(Cx::ZERO, Cx::ZERO), (Cx::ZERO, Cx::ZERO)],
                vec![Cx::ZERO, Cx::ZERO]
            ),
            Err(Error::InvalidInput(_))
        ));
        let text = r#"{"nodes":[{"s":[0.0,0.0],"p":[0.5,0.0]}],"values":[[0.5,0.0]]}"#;
        let parsed: PickProblemG = serde_json::from_str(text).unwrap();
        assert_eq!(parsed.len(), 1);
        let back = serde_json::to_string(&parsed).unwrap();
        let reparsed: PickProblemG = serde_json::from_str(&back).unwrap();
        assert_eq!(parsed, reparsed);
    }
}
