//! Univariate machinery: the quartic restriction of the objective along one
//! coordinate, closed-form cubic roots, exact quartic minimization (free and
//! interval-constrained), and the fourth-order soft-thresholding operator.

use crate::ensemble::MeasurementEnsemble;
use crate::state::SolverState;
use crate::{Error, Result};

/// Leading coefficients below `DEGEN_EPS * inf-norm(coeffs)` demote the
/// polynomial one degree (cubic -> quadratic -> linear -> constant).
const DEGEN_EPS: f64 = 1e-12;

/// phi(alpha) = d4 a^4 + d3 a^3 + d2 a^2 + d1 a + d0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub d4: f64,
    pub d3: f64,
    pub d2: f64,
    pub d1: f64,
    pub d0: f64,
}

impl QuarticCoeffs {
    pub fn new(d4: f64, d3: f64, d2: f64, d1: f64, d0: f64) -> Self {
        Self { d4, d3, d2, d1, d0 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// Adds one residual term (c2 a^2 + c1 a + e)^2, where e = c0 - b.
    #[inline]
    pub fn accumulate(&mut self, c2: f64, c1: f64, e: f64) {
        self.d4 += c2 * c2;
        self.d3 += 2.0 * c2 * c1;
        self.d2 += c1 * c1 + 2.0 * c2 * e;
        self.d1 += 2.0 * c1 * e;
        self.d0 += e * e;
    }

    #[inline]
    pub fn eval(&self, a: f64) -> f64 {
        (((self.d4 * a + self.d3) * a + self.d2) * a + self.d1) * a + self.d0
    }

    /// Coefficients of phi'(alpha) as (a3, a2, a1, a0).
    #[inline]
    pub fn derivative(&self) -> (f64, f64, f64, f64) {
        (4.0 * self.d4, 3.0 * self.d3, 2.0 * self.d2, self.d1)
    }

    fn inf_norm(&self) -> f64 {
        self.d4
            .abs()
            .max(self.d3.abs())
            .max(self.d2.abs())
            .max(self.d1.abs())
            .max(self.d0.abs())
    }
}

/// Real roots of a cubic, multiplicity collapsed. At most 3.
#[derive(Debug, Clone, Copy, Default)]
pub struct CubicRoots {
    roots: [f64; 3],
    len: usize,
}

impl CubicRoots {
    fn push(&mut self, r: f64) {
        self.roots[self.len] = r;
        self.len += 1;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.roots[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn sort_dedup(&mut self) {
        self.roots[..self.len].sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out = CubicRoots::default();
        for k in 0..self.len {
            let r = self.roots[k];
            let dup = out
                .as_slice()
                .last()
                .map(|&p| (r - p).abs() <= 1e-8 * r.abs().max(1.0))
                .unwrap_or(false);
            if !dup {
                out.push(r);
            }
        }
        *self = out;
    }
}

#[inline]
fn newton_polish(a3: f64, a2: f64, a1: f64, a0: f64, r: f64) -> f64 {
    let p = ((a3 * r + a2) * r + a1) * r + a0;
    let dp = (3.0 * a3 * r + 2.0 * a2) * r + a1;
    if dp.abs() > f64::MIN_POSITIVE && p.is_finite() {
        let step = p / dp;
        if step.is_finite() && step.abs() <= 1.0 + r.abs() {
            return r - step;
        }
    }
    r
}

/// All real roots of a3 x^3 + a2 x^2 + a1 x + a0 = 0, closed form.
///
/// Trigonometric branch when the discriminant gives three real roots,
/// Cardano otherwise, one Newton polish per root. Near-zero leading
/// coefficients demote to quadratic/linear. An identically zero polynomial
/// errors; a nonzero constant yields an empty root set.
pub fn solve_cubic(a3: f64, a2: f64, a1: f64, a0: f64) -> Result<CubicRoots> {
    let scale = a3.abs().max(a2.abs()).max(a1.abs()).max(a0.abs());
    if scale == 0.0 {
        return Err(Error::IdenticallyZero);
    }
    let eps = DEGEN_EPS * scale;
    let mut out = CubicRoots::default();

    if a3.abs() < eps {
        if a2.abs() < eps {
            if a1.abs() < eps {
                // nonzero constant: no roots
                return Ok(out);
            }
            out.push(-a0 / a1);
            return Ok(out);
        }
        // quadratic
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc < 0.0 {
            return Ok(out);
        }
        let sq = disc.sqrt();
        if sq <= 1e-8 * a1.abs().max(1.0) {
            out.push(-a1 / (2.0 * a2)); // double root collapsed
        } else {
            let q = -0.5 * (a1 + sq.copysign(if a1 == 0.0 { 1.0 } else { a1 }));
            out.push(q / a2);
            out.push(if q.abs() > 0.0 { a0 / q } else { -a1 / a2 });
        }
        for k in 0..out.len {
            out.roots[k] = newton_polish(a3, a2, a1, a0, out.roots[k]);
        }
        out.sort_dedup();
        return Ok(out);
    }

    // depressed cubic t^3 + p t + q, x = t - b/3
    let b = a2 / a3;
    let c = a1 / a3;
    let d = a0 / a3;
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = 0.25 * q * q + p * p * p / 27.0;

    if disc > 0.0 {
        // one real root (Cardano, sign-stable)
        let r = disc.sqrt();
        let u = if q >= 0.0 {
            -(0.5 * q + r).cbrt()
        } else {
            (-0.5 * q + r).cbrt()
        };
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        out.push(u + v - shift);
    } else if p == 0.0 && q == 0.0 {
        out.push(-shift); // triple root
    } else {
        // three real roots (may be repeated): trigonometric form
        let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
        let cos_arg = if m > 0.0 {
            (3.0 * q / (p * m)).clamp(-1.0, 1.0)
        } else {
            1.0
        };
        let theta = cos_arg.acos() / 3.0;
        for k in 0..3 {
            let t = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            out.push(t - shift);
        }
    }

    for k in 0..out.len {
        out.roots[k] = newton_polish(a3, a2, a1, a0, out.roots[k]);
    }
    out.sort_dedup();
    Ok(out)
}

/// Deterministic pick among candidate minimizers: lowest value, ties broken
/// by smaller |alpha|, then smaller alpha. `tie_eps` is an absolute slack on
/// the value comparison.
fn pick_min(candidates: impl IntoIterator<Item = (f64, f64)>) -> Option<(f64, f64)> {
    let cands: Vec<(f64, f64)> = candidates.into_iter().collect();
    let best_val = cands
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    let tie_eps = 1e-9 * best_val.abs().max(1.0);
    cands
        .into_iter()
        .filter(|&(_, v)| v <= best_val + tie_eps)
        .min_by(|a, b| {
            (a.0.abs(), a.0)
                .partial_cmp(&(b.0.abs(), b.0))
                .unwrap()
        })
}

/// Global minimizer of a coercive quartic: (alpha*, phi(alpha*)).
pub fn minimize_quartic(c: &QuarticCoeffs) -> Result<(f64, f64)> {
    let scale = c.inf_norm();
    if scale == 0.0 {
        return Ok((0.0, 0.0));
    }
    let eps = DEGEN_EPS * scale;
    if c.d4 < -eps {
        return Err(Error::Unbounded);
    }
    if c.d4.abs() < eps {
        // degenerate: cubic and below
        if c.d3.abs() >= eps {
            return Err(Error::Unbounded);
        }
        if c.d2 >= eps {
            let a = -c.d1 / (2.0 * c.d2);
            return Ok((a, c.eval(a)));
        }
        if c.d2 <= -eps || c.d1.abs() >= eps {
            return Err(Error::Unbounded);
        }
        return Ok((0.0, c.d0));
    }
    let (a3, a2, a1, a0) = c.derivative();
    let roots = solve_cubic(a3, a2, a1, a0)?;
    pick_min(roots.as_slice().iter().map(|&r| (r, c.eval(r))))
        .ok_or(Error::Unbounded)
}

/// Minimizer of the quartic over [lo, hi]: best among interior stationary
/// points and the endpoints.
pub fn minimize_quartic_interval(c: &QuarticCoeffs, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if lo > hi {
        return Err(Error::EmptyInterval { lo, hi });
    }
    let (a3, a2, a1, a0) = c.derivative();
    let interior = match solve_cubic(a3, a2, a1, a0) {
        Ok(roots) => roots,
        Err(Error::IdenticallyZero) => CubicRoots::default(),
        Err(e) => return Err(e),
    };
    let candidates = interior
        .as_slice()
        .iter()
        .copied()
        .filter(|&r| r >= lo && r <= hi)
        .chain([lo, hi])
        .map(|a| (a, c.eval(a)));
    Ok(pick_min(candidates).expect("endpoints always present"))
}

/// Fourth-order soft-thresholding: global minimizer of
/// psi(beta) = u4 b^4 + u3 b^3 + u2 b^2 + u1 b + tau |b|.
///
/// The minimizer lies in {0} union the positive stationary points of
/// psi on (0, inf) union the negative ones on (-inf, 0) -- at most seven
/// candidates.
pub fn fost(u4: f64, u3: f64, u2: f64, u1: f64, tau: f64) -> Result<f64> {
    if tau < 0.0 {
        return Err(Error::InvalidConfig("fost requires tau >= 0".into()));
    }
    let scale = u4.abs().max(u3.abs()).max(u2.abs()).max(u1.abs()).max(tau);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let eps = DEGEN_EPS * scale;
    if u4 < -eps {
        return Err(Error::Unbounded);
    }
    if u4.abs() < eps {
        if u3.abs() >= eps {
            return Err(Error::Unbounded);
        }
        if u2 <= -eps {
            return Err(Error::Unbounded);
        }
        if u2.abs() < eps && u1.abs() > tau + eps {
            return Err(Error::Unbounded);
        }
    }

    let psi = |b: f64| (((u4 * b + u3) * b + u2) * b + u1) * b + tau * b.abs();
    let side_roots = |shifted_u1: f64| -> Result<CubicRoots> {
        match solve_cubic(4.0 * u4, 3.0 * u3, 2.0 * u2, shifted_u1) {
            Ok(r) => Ok(r),
            Err(Error::IdenticallyZero) => Ok(CubicRoots::default()),
            Err(e) => Err(e),
        }
    };
    let pos = side_roots(u1 + tau)?;
    let neg = side_roots(u1 - tau)?;
    let candidates = std::iter::once(0.0)
        .chain(pos.as_slice().iter().copied().filter(|&b| b > 0.0))
        .chain(neg.as_slice().iter().copied().filter(|&b| b < 0.0))
        .map(|b| (b, psi(b)));
    Ok(pick_min(candidates).expect("0 is always a candidate").0)
}

/// Coefficients of phi(alpha) = f(xbar + alpha e_i), built from the cached
/// products in O(M). Also captures the per-row step directions in the state
/// so the subsequent commit needs no further ensemble reads.
pub fn coordinate_coeffs(
    ensemble: &MeasurementEnsemble,
    state: &mut SolverState,
    i: usize,
) -> Result<QuarticCoeffs> {
    let n = ensemble.n();
    if i >= 2 * n {
        return Err(Error::IndexOutOfRange { index: i, dim: 2 * n });
    }
    let j = i % n;
    let imag_half = i >= n;
    state.begin_step(i);
    let b = ensemble.intensities();
    let mut coeffs = QuarticCoeffs::zero();
    {
        let (z, dirs) = state.z_and_dirs();
        for m in 0..ensemble.m() {
            let a = ensemble.row(m)[j];
            let w = if imag_half {
                num_complex::Complex64::new(0.0, 1.0) * a.conj()
            } else {
                a.conj()
            };
            dirs[m] = w;
            let za = z[m] * a;
            let c2 = a.norm_sqr();
            let c1 = if imag_half { 2.0 * za.im } else { 2.0 * za.re };
            let e = z[m].norm_sqr() - b[m];
            coeffs.accumulate(c2, c1, e);
        }
    }
    state.count_row_pass(ensemble.m() as u64);
    Ok(coeffs)
}
