//! Worst-case errors of linear approximation schemes over the unit ball of an RKHS.
//!
//! For a scheme A and the unit ball of H(K) the L2 worst case is the operator norm of
//! Id - A restricted to H, and the L-infinity worst case is sup_x of the H-norm of the
//! functional f -> f(x) - (Af)(x). Reports carry a lower value and a certificate so that
//! value + certificate is an upper bound (on the grid, for L-infinity).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisSystem, BlockEvaluator, Points, C64};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::{hermitian_max_eig, lanczos_max, SplitMatrix};
use crate::recovery::{Approximant, RecoveryOperator, Weighting};
use crate::rkhs::{LatticeKernel, RkhsSpec};

/// Grid points processed together in L-infinity evaluations.
pub const LINF_CHUNK: usize = 1024;
/// Basis columns processed together in coefficient sweeps.
pub const COEFF_BLOCK: usize = 256;
/// Largest coefficient truncation K.
pub const TRUNCATION_CAP: usize = 100_000;
/// Relative certificate that stops the doubling of K.
pub const CERT_TARGET: f64 = 0.01;
/// Relative certificate above which a report is not certified.
pub const CERT_ACCEPT: f64 = 0.1;
/// Largest tolerated negative value of a computed e(x)^2.
pub const NEGATIVE_TOLERANCE: f64 = 1e-10;

/// Norm in which a worst case is measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "kebab-case")]
pub enum NormKind {
    L2,
    Linf,
    Lp { p: f64 },
}

impl NormKind {
    pub fn label(&self) -> String {
        match self {
            NormKind::L2 => "L2".into(),
            NormKind::Linf => "Linf".into(),
            NormKind::Lp { p } => format!("L{p}"),
        }
    }
}

/// Grid used for an L-infinity report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub per_axis: usize,
    pub coarse_points: usize,
    pub refined_points: usize,
    pub argmax: Vec<f64>,
    /// Grid suprema are lower bounds on the supremum over the whole domain.
    pub one_sided: bool,
}

/// A worst-case error with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub norm: NormKind,
    /// Lower bound on the worst case.
    pub value: f64,
    /// value + certificate is an upper bound.
    pub certificate: f64,
    /// certificate <= CERT_ACCEPT * value.
    pub certified: bool,
    pub method: String,
    pub truncation: Option<usize>,
    pub grid: Option<GridRecord>,
    pub operator_id: String,
    pub range_dim: usize,
    pub weighting: Option<Weighting>,
}

impl ErrorReport {
    pub fn upper(&self) -> f64 {
        self.value + self.certificate
    }

    fn new(norm: NormKind, value: f64, upper: f64, method: &str, approx: &Approximant) -> Self {
        let value = value.max(0.0);
        let certificate = (upper - value).max(0.0);
        ErrorReport {
            norm,
            value,
            certificate,
            certified: certificate <= CERT_ACCEPT * value,
            method: method.to_string(),
            truncation: None,
            grid: None,
            operator_id: approx.id(),
            range_dim: approx.range_dim(),
            weighting: approx.weighting(),
        }
    }
}

/// Truncation controls shared by the L2 and L-infinity routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstCaseOptions {
    /// Fixed truncation K; `None` starts at max(8m, 512) and doubles.
    pub truncation: Option<usize>,
    pub max_truncation: usize,
    pub target: f64,
}

impl Default for WorstCaseOptions {
    fn default() -> Self {
        WorstCaseOptions {
            truncation: None,
            max_truncation: TRUNCATION_CAP,
            target: CERT_TARGET,
        }
    }
}

fn initial_truncation(m: usize, opts: &WorstCaseOptions, cap: usize) -> usize {
    opts.truncation
        .unwrap_or((8 * m).max(512))
        .min(cap)
        .max(m.min(cap))
}

fn split(a: &DMatrix<C64>) -> SplitMatrix {
    SplitMatrix::from_complex(a)
}

/// Lattice coordinates of all points, or `None` if any point is off the lattice.
fn lattice_coords(lat: &LatticeKernel, pts: &Points) -> Option<Vec<u32>> {
    let mut out = Vec::with_capacity(pts.len() * pts.dim());
    for x in pts.iter() {
        out.extend(lat.to_lattice(x)?);
    }
    Some(out)
}

/// Kernel matrix with entry (a, b) = K(p_a, q_b).
fn kernel_block(lat: &LatticeKernel, p: &[u32], q: &[u32], dim: usize) -> DMatrix<f64> {
    let rows = p.len() / dim;
    let cols = q.len() / dim;
    let mut out = DMatrix::<f64>::zeros(rows, cols);
    for b in 0..cols {
        let qb = &q[b * dim..(b + 1) * dim];
        let col = out.column_mut(b);
        for (a, v) in col.into_iter().enumerate() {
            *v = lat.eval(&p[a * dim..(a + 1) * dim], qb);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// L2
// ---------------------------------------------------------------------------

/// L2 worst case sup_{||f||_H <= 1} ||f - Af||_2.
///
/// For a sampled operator with map G the error operator in the coordinates
/// f = sum_k c_k sigma_k b_k has Gram matrix T = D_{>m} + R^H R, where
/// R[j, k] = sigma_k (delta_{jk} - (G b_k(X))_j). The block over k <= K gives the value
/// through Lanczos; the remaining blocks are bounded through ||R_2||, the norm of the
/// columns k > K.
pub fn worst_case_l2(approx: &Approximant, spec: &RkhsSpec, opts: &WorstCaseOptions) -> Result<ErrorReport> {
    match approx {
        Approximant::Zero => {
            let s = spec.sigma(1)?;
            Ok(ErrorReport::new(NormKind::L2, s, s, "diagonal", approx))
        }
        Approximant::Projection { m } => {
            let s = spec.sigma(m + 1)?;
            Ok(ErrorReport::new(NormKind::L2, s, s, "diagonal", approx))
        }
        Approximant::Sampled(op) => l2_sampled(op, approx, spec, opts),
    }
}

fn l2_sampled(op: &RecoveryOperator, approx: &Approximant, spec: &RkhsSpec, opts: &WorstCaseOptions) -> Result<ErrorReport> {
    let m = op.m();
    let n = op.n();
    let g = op.map();
    let basis = spec.basis();
    check_basis(op, basis)?;
    let cap = opts.max_truncation.min(spec.max_index());
    if cap < m {
        return Err(Error::invalid(format!("truncation cap {cap} below m = {m}")));
    }
    let mut k_target = initial_truncation(m, opts, cap);
    let gs = split(g);
    let g_norm_sq = hermitian_max_eig(&gs.mul(&split(&g.adjoint())));

    // G K(X, X) G^H on a lattice.
    let lattice = spec
        .lattice()
        .and_then(|lat| lattice_coords(lat, op.points()).map(|c| (lat, c)));
    let gkg = lattice.as_ref().map(|(lat, coords)| {
        let kmat = kernel_block(lat, coords, coords, spec.dim());
        let kg = SplitMatrix::from_real(kmat).mul(&split(&g.adjoint()));
        gs.mul(&split(&kg))
    });
    let kernel_scale = lattice.as_ref().map(|(lat, _)| lat.diag()).unwrap_or(0.0);

    let mut ev = basis.block_evaluator(op.points())?;
    let mut rt = DMatrix::<C64>::zeros(m, 0);
    let mut sig: Vec<f64> = Vec::new();
    loop {
        let have = rt.ncols();
        if k_target > have {
            rt = rt.resize_horizontally(k_target, C64::new(0.0, 0.0));
            let mut k = have;
            while k < k_target {
                let cnt = COEFF_BLOCK.min(k_target - k);
                let bx = ev.next_block(cnt);
                let c = gs.mul(&split(&bx));
                for j in 0..cnt {
                    let s = spec.sigma(k + j + 1)?;
                    sig.push(s);
                    rt.column_mut(k + j).copy_from(&(c.column(j) * C64::new(s, 0.0)));
                }
                k += cnt;
            }
        }
        let big_k = rt.ncols();
        let mut r1 = -rt.clone();
        for j in 0..m {
            r1[(j, j)] += C64::new(sig[j], 0.0);
        }
        let diag: Vec<f64> = (0..big_k)
            .map(|k| if k >= m { sig[k] * sig[k] } else { 0.0 })
            .collect();
        let r1h = r1.adjoint();
        let lz = lanczos_max(
            big_k,
            |v| {
                let mut y = &r1h * (&r1 * v);
                for (k, d) in diag.iter().enumerate() {
                    y[k] += v[k] * *d;
                }
                y
            },
            1e-10,
            400,
        );
        let lambda11 = lz.value.max(0.0);
        let r1_norm = hermitian_max_eig(&split(&r1).mul(&split(&r1h))).max(0.0).sqrt();
        let tail_sigma = spec.spectrum().sigma_upper(big_k + 1);
        let r2_sq = if spec.is_finite() && big_k >= spec.max_index() {
            0.0
        } else if let Some(gkg) = &gkg {
            let rr = split(&rt).mul(&split(&rt.adjoint()));
            let diff = gkg - rr;
            let rounding = 64.0 * f64::EPSILON * (n + big_k) as f64 * g_norm_sq * n as f64 * kernel_scale;
            hermitian_max_eig(&diff).max(0.0) + rounding
        } else {
            g_norm_sq * n as f64 * spec.sup_weighted_remainder(big_k)?
        };
        let r2 = r2_sq.sqrt();
        let upper_sq = (lambda11 + lz.residual).max(tail_sigma * tail_sigma) + r1_norm * r2 + r2_sq;
        let value = lambda11.sqrt();
        let upper = upper_sq.sqrt();
        let done = opts.truncation.is_some()
            || big_k >= cap
            || upper - value <= opts.target * value;
        if done {
            let method = if gkg.is_some() { "lanczos+lattice-kernel" } else { "lanczos+trace-bound" };
            let mut rep = ErrorReport::new(NormKind::L2, value, upper, method, approx);
            rep.truncation = Some(big_k);
            return Ok(rep);
        }
        k_target = (2 * k_target).min(cap);
    }
}

fn check_basis(op: &RecoveryOperator, basis: &BasisSystem) -> Result<()> {
    if op.basis().family() != basis.family() || op.basis().space().dim() != basis.space().dim() {
        return Err(Error::DimensionMismatch(
            "operator basis differs from the specification basis".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// L-infinity
// ---------------------------------------------------------------------------

/// Per-point enclosure lo2 <= e(x)^2 <= hi2.
#[derive(Clone, Copy, Debug)]
struct Enclosure {
    lo2: f64,
    hi2: f64,
}

/// L-infinity worst case sup_x sup_{||f||_H <= 1} |f(x) - Af(x)| over a grid.
///
/// On lattice-compatible Sobolev spaces the exact kernel is used; otherwise the
/// expansion of the error functional is truncated at K with a certified tail.
pub fn worst_case_linf(
    approx: &Approximant,
    spec: &RkhsSpec,
    grid: &GridSpec,
    opts: &WorstCaseOptions,
) -> Result<ErrorReport> {
    if let Approximant::Sampled(op) = approx {
        check_basis(op, spec.basis())?;
    }
    let space = spec.basis().space().clone();
    let coarse = grid.points(&space)?;
    if let Some(lat) = spec.lattice() {
        let sampled_ok = match approx {
            Approximant::Sampled(op) => lattice_coords(lat, op.points()).is_some(),
            _ => true,
        };
        if sampled_ok && lattice_coords(lat, &coarse).is_some() {
            return linf_lattice(approx, spec, lat, grid, coarse);
        }
    }
    linf_truncated(approx, spec, grid, coarse, opts)
}

fn summarize(encl: &[Enclosure]) -> (f64, f64, usize) {
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 0.0;
    let mut arg = 0;
    for (i, e) in encl.iter().enumerate() {
        if e.lo2 > lo {
            lo = e.lo2;
            arg = i;
        }
        hi = hi.max(e.hi2);
    }
    (lo.max(0.0).sqrt(), hi.max(0.0).sqrt(), arg)
}

/// Lattice-kernel evaluator for one approximant.
struct LatticeRoute<'a> {
    spec: &'a RkhsSpec,
    lat: &'a LatticeKernel,
    approx: &'a Approximant<'a>,
    /// Sampled operators: lattice coordinates of the samples.
    samples: Vec<u32>,
    gt: Option<SplitMatrix>,
    q_t: Option<DMatrix<C64>>,
    p2_t: Option<DMatrix<C64>>,
    n: usize,
}

impl<'a> LatticeRoute<'a> {
    fn new(approx: &'a Approximant<'a>, spec: &'a RkhsSpec, lat: &'a LatticeKernel) -> Result<Self> {
        let mut route = LatticeRoute {
            spec,
            lat,
            approx,
            samples: Vec::new(),
            gt: None,
            q_t: None,
            p2_t: None,
            n: 0,
        };
        if let Approximant::Sampled(op) = approx {
            let coords = lattice_coords(lat, op.points()).expect("checked by the caller");
            let g = op.map();
            let gt = split(&g.transpose());
            let gconj = split(&g.map(|z| z.conj()));
            let kmat = kernel_block(lat, &coords, &coords, spec.dim());
            let kg = SplitMatrix::from_real(kmat).mul(&gt);
            let q = gconj.mul(&split(&kg));
            let p2 = gconj.mul(&gt);
            route.q_t = Some(q.transpose());
            route.p2_t = Some(p2.transpose());
            route.gt = Some(gt);
            route.samples = coords;
            route.n = op.n();
        }
        Ok(route)
    }

    fn eval(&self, pts: &Points) -> Result<Vec<Enclosure>> {
        let coords = lattice_coords(self.lat, pts).ok_or_else(|| {
            Error::Numerical("grid point fell off the kernel lattice".into())
        })?;
        let dim = self.spec.dim();
        let kdiag = self.lat.diag();
        let eps_k = self.lat.eval_error();
        let u = f64::EPSILON;
        let chunks: Vec<usize> = (0..pts.len()).step_by(LINF_CHUNK).collect();
        let parts: Vec<Result<Vec<Enclosure>>> = chunks
            .par_iter()
            .map(|&start| {
                let end = (start + LINF_CHUNK).min(pts.len());
                let sub = pts.slice(start..end);
                let sub_coords = &coords[start * dim..end * dim];
                self.eval_chunk(&sub, sub_coords, kdiag, eps_k, u)
            })
            .collect();
        let mut out = Vec::with_capacity(pts.len());
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }

    fn eval_chunk(&self, pts: &Points, coords: &[u32], kdiag: f64, eps_k: f64, u: f64) -> Result<Vec<Enclosure>> {
        let c = pts.len();
        let basis = self.spec.basis();
        match self.approx {
            Approximant::Zero | Approximant::Projection { .. } => {
                let r = self.approx.range_dim();
                let head = basis.design_matrix(pts, r)?;
                let sig: Vec<f64> = (1..=r).map(|k| self.spec.sigma(k)).collect::<Result<_>>()?;
                Ok((0..c)
                    .map(|i| {
                        let s: f64 = (0..r).map(|k| sig[k] * sig[k] * head[(i, k)].norm_sqr()).sum();
                        let e2 = kdiag - s;
                        let slack = eps_k + 4.0 * (r as f64 + 1.0) * u * kdiag;
                        Enclosure {
                            lo2: e2 - slack,
                            hi2: e2 + slack,
                        }
                    })
                    .collect())
            }
            Approximant::Sampled(op) => {
                let m = op.m();
                let n = self.n;
                let bg = basis.design_matrix(pts, m)?;
                let kc = kernel_block(self.lat, coords, &self.samples, self.spec.dim());
                let s = SplitMatrix::from_real(kc).mul(self.gt.as_ref().expect("sampled route"));
                let bgs = split(&bg);
                let z = bgs.mul(&split(self.q_t.as_ref().expect("sampled route")));
                let p = bgs.mul(&split(self.p2_t.as_ref().expect("sampled route")));
                let mut out = Vec::with_capacity(c);
                for i in 0..c {
                    let mut cross = C64::new(0.0, 0.0);
                    let mut quad = C64::new(0.0, 0.0);
                    let mut phi2 = C64::new(0.0, 0.0);
                    for k in 0..m {
                        let b = bg[(i, k)];
                        cross += b * s[(i, k)];
                        quad += b.conj() * z[(i, k)];
                        phi2 += b.conj() * p[(i, k)];
                    }
                    let e2 = kdiag - 2.0 * cross.re + quad.re;
                    let leb = (n as f64 * phi2.re.max(0.0)).sqrt();
                    let amp = (1.0 + leb) * (1.0 + leb);
                    let slack = eps_k * amp + 4.0 * (n + m) as f64 * u * kdiag * amp;
                    if e2 < -NEGATIVE_TOLERANCE - slack {
                        return Err(Error::Numerical(format!(
                            "negative squared pointwise error {e2:e} at {:?}",
                            pts.point(i)
                        )));
                    }
                    out.push(Enclosure {
                        lo2: e2 - slack,
                        hi2: e2 + slack,
                    });
                }
                Ok(out)
            }
        }
    }
}

fn linf_lattice(
    approx: &Approximant,
    spec: &RkhsSpec,
    lat: &LatticeKernel,
    grid: &GridSpec,
    coarse: Points,
) -> Result<ErrorReport> {
    let route = LatticeRoute::new(approx, spec, lat)?;
    let mut encl = route.eval(&coarse)?;
    let mut all = coarse.clone();
    let (_, _, arg) = summarize(&encl);
    let center = coarse.point(arg).to_vec();
    let mut refined = 0;
    if let Some(fine) = grid.refinement_points(spec.basis().space(), &center) {
        if lattice_coords(lat, &fine).is_some() {
            refined = fine.len();
            encl.extend(route.eval(&fine)?);
            for x in fine.iter() {
                all.push(x);
            }
        }
    }
    let (value, upper, arg) = summarize(&encl);
    let mut rep = ErrorReport::new(NormKind::Linf, value, upper, "lattice-kernel", approx);
    rep.grid = Some(GridRecord {
        per_axis: grid.per_axis,
        coarse_points: coarse.len(),
        refined_points: refined,
        argmax: all.point(arg).to_vec(),
        one_sided: true,
    });
    Ok(rep)
}

/// Coefficient sweep over k for a set of grid chunks.
struct CoeffChunk {
    eval: BlockEvaluator,
    head: Option<DMatrix<C64>>,
    lebesgue: Vec<f64>,
    acc: Vec<f64>,
}

struct CoeffRoute<'a> {
    spec: &'a RkhsSpec,
    approx: &'a Approximant<'a>,
    start: usize,
    k: usize,
    /// Sampled operators: sigma_k G b_k(X) blocks for the columns processed so far.
    sample_eval: Option<BlockEvaluator>,
    blocks: Vec<DMatrix<C64>>,
    gs: Option<SplitMatrix>,
    chunks: Vec<CoeffChunk>,
}

impl<'a> CoeffRoute<'a> {
    fn new(approx: &'a Approximant<'a>, spec: &'a RkhsSpec) -> Result<Self> {
        let start = match approx {
            Approximant::Sampled(_) => 1,
            _ => approx.range_dim() + 1,
        };
        let (sample_eval, gs) = match approx {
            Approximant::Sampled(op) => (
                Some(spec.basis().block_evaluator(op.points())?),
                Some(split(op.map())),
            ),
            _ => (None, None),
        };
        Ok(CoeffRoute {
            spec,
            approx,
            start,
            k: start - 1,
            sample_eval,
            blocks: Vec::new(),
            gs,
            chunks: Vec::new(),
        })
    }

    fn add_points(&mut self, pts: &Points) -> Result<()> {
        let basis = self.spec.basis();
        for s in (0..pts.len()).step_by(LINF_CHUNK) {
            let sub = pts.slice(s..(s + LINF_CHUNK).min(pts.len()));
            let mut eval = basis.block_evaluator(&sub)?;
            if self.start > 1 {
                eval.skip_to(self.start);
            }
            let (head, lebesgue) = match self.approx {
                Approximant::Sampled(op) => {
                    let head = basis.design_matrix(&sub, op.m())?;
                    let phi = split(&head).mul(self.gs.as_ref().expect("sampled route"));
                    let leb = phi.row_iter().map(|r| r.iter().map(|z| z.norm()).sum()).collect();
                    (Some(head), leb)
                }
                _ => (None, vec![0.0; sub.len()]),
            };
            let mut chunk = CoeffChunk {
                eval,
                head,
                lebesgue,
                acc: vec![0.0; sub.len()],
            };
            // Catch up with the columns already processed.
            let mut k = self.start - 1;
            let mut b = 0;
            while k < self.k {
                let cnt = COEFF_BLOCK.min(self.k - k);
                let blk = self.blocks.get(b).cloned();
                self.sweep_chunk(&mut chunk, k, cnt, blk.as_ref())?;
                k += cnt;
                b += 1;
            }
            self.chunks.push(chunk);
        }
        Ok(())
    }

    fn sweep_chunk(&self, chunk: &mut CoeffChunk, k0: usize, cnt: usize, c: Option<&DMatrix<C64>>) -> Result<()> {
        let mut u = chunk.eval.next_block(cnt);
        if let (Some(head), Some(c)) = (&chunk.head, c) {
            let ac = split(head).mul(&split(c));
            u -= ac;
        }
        for j in 0..cnt {
            let s = self.spec.sigma(k0 + j + 1)?;
            let s2 = s * s;
            for (i, a) in chunk.acc.iter_mut().enumerate() {
                *a += s2 * u[(i, j)].norm_sqr();
            }
        }
        Ok(())
    }

    fn extend_to(&mut self, target: usize) -> Result<()> {
        while self.k < target {
            let cnt = COEFF_BLOCK.min(target - self.k);
            let k0 = self.k;
            let block = if let (Some(ev), Some(gs)) = (self.sample_eval.as_mut(), self.gs.as_ref()) {
                let bx = ev.next_block(cnt);
                let c = gs.mul(&split(&bx));
                self.blocks.push(c.clone());
                Some(c)
            } else {
                None
            };
            let mut chunks = std::mem::take(&mut self.chunks);
            let res: Result<()> = chunks
                .par_iter_mut()
                .map(|ch| self.sweep_chunk(ch, k0, cnt, block.as_ref()))
                .collect();
            self.chunks = chunks;
            res?;
            self.k += cnt;
        }
        Ok(())
    }

    fn enclosures(&self) -> Result<Vec<Enclosure>> {
        let tail = if self.spec.is_finite() && self.k >= self.spec.max_index() {
            0.0
        } else {
            self.spec.sup_weighted_remainder(self.k)?
        };
        let mut out = Vec::new();
        for ch in &self.chunks {
            for (a, l) in ch.acc.iter().zip(&ch.lebesgue) {
                let amp = (1.0 + l) * (1.0 + l);
                out.push(Enclosure {
                    lo2: *a * (1.0 - 1e-13),
                    hi2: *a * (1.0 + 1e-13) + amp * tail,
                });
            }
        }
        Ok(out)
    }
}

fn linf_truncated(
    approx: &Approximant,
    spec: &RkhsSpec,
    grid: &GridSpec,
    coarse: Points,
    opts: &WorstCaseOptions,
) -> Result<ErrorReport> {
    let m = approx.range_dim();
    let cap = opts.max_truncation.min(spec.max_index());
    if cap < m {
        return Err(Error::invalid(format!("truncation cap {cap} below m = {m}")));
    }
    let mut target = initial_truncation(m.max(1), opts, cap).max(m);
    let mut route = CoeffRoute::new(approx, spec)?;
    let mut all = coarse.clone();
    route.add_points(&coarse)?;
    let mut refined = 0;
    let mut did_refine = false;
    loop {
        route.extend_to(target)?;
        let encl = route.enclosures()?;
        let (value, upper, arg) = summarize(&encl);
        let converged = opts.truncation.is_some() || target >= cap || upper - value <= opts.target * value;
        if converged && !did_refine {
            did_refine = true;
            let center = all.point(arg).to_vec();
            if let Some(fine) = grid.refinement_points(spec.basis().space(), &center) {
                refined = fine.len();
                route.add_points(&fine)?;
                for x in fine.iter() {
                    all.push(x);
                }
            }
            continue;
        }
        if converged {
            let method = match spec.basis().family() {
                BasisFamily::Trigonometric | BasisFamily::Legendre => "coefficient-truncation",
            };
            let mut rep = ErrorReport::new(NormKind::Linf, value, upper, method, approx);
            rep.truncation = Some(route.k);
            rep.grid = Some(GridRecord {
                per_axis: grid.per_axis,
                coarse_points: coarse.len(),
                refined_points: refined,
                argmax: all.point(arg).to_vec(),
                one_sided: true,
            });
            return Ok(rep);
        }
        target = (2 * target).min(cap);
    }
}

/// Pointwise squared error functional norms at given points (lattice route when
/// available, else coefficient truncation at `truncation`).
pub fn pointwise_error_sq(approx: &Approximant, spec: &RkhsSpec, pts: &Points, truncation: usize) -> Result<Vec<(f64, f64)>> {
    if let Some(lat) = spec.lattice() {
        let sampled_ok = match approx {
            Approximant::Sampled(op) => lattice_coords(lat, op.points()).is_some(),
            _ => true,
        };
        if sampled_ok && lattice_coords(lat, pts).is_some() {
            let route = LatticeRoute::new(approx, spec, lat)?;
            return Ok(route.eval(pts)?.iter().map(|e| (e.lo2, e.hi2)).collect());
        }
    }
    let mut route = CoeffRoute::new(approx, spec)?;
    route.add_points(pts)?;
    route.extend_to(truncation.min(spec.max_index()).max(approx.range_dim()))?;
    Ok(route.enclosures()?.iter().map(|e| (e.lo2, e.hi2)).collect())
}

/// Lp upper bound (wc2 + cert2)^{2/p} (wcinf + certinf)^{1 - 2/p} for 2 <= p <= infinity.
pub fn worst_case_lp_bound(l2: &ErrorReport, linf: &ErrorReport, p: f64) -> Result<f64> {
    if l2.operator_id != linf.operator_id {
        return Err(Error::invalid(format!(
            "reports refer to different operators: {} and {}",
            l2.operator_id, linf.operator_id
        )));
    }
    if l2.norm != NormKind::L2 || linf.norm != NormKind::Linf {
        return Err(Error::invalid("expected an L2 and an L-infinity report"));
    }
    if !(p >= 2.0) {
        return Err(Error::invalid(format!("p = {p} outside [2, infinity]")));
    }
    if p.is_infinite() {
        return Ok(linf.upper());
    }
    let t = 2.0 / p;
    Ok(l2.upper().powf(t) * linf.upper().powf(1.0 - t))
}

/// Values of the expansion sum_k c_k b_k at the points (rows of the design times c).
pub fn expansion_values(basis: &BasisSystem, pts: &Points, coeffs: &[C64]) -> Result<Vec<C64>> {
    let b = basis.design_matrix(pts, coeffs.len())?;
    let c = DVector::from_column_slice(coeffs);
    Ok((b * c).iter().cloned().collect())
}
