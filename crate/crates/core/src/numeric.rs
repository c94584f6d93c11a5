//! Scalar numerical building blocks: adaptive Simpson quadrature, bisection
//! and golden-section minimization.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;
const INITIAL_PANELS: usize = 16;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by adaptive
/// Simpson refinement with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b == a {
        return 0.0;
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    for k in 0..INITIAL_PANELS {
        let lo = a + width * k as f64;
        let hi = if k + 1 == INITIAL_PANELS { b } else { lo + width };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += simpson_step(&f, lo, hi, flo, fmid, fhi, whole, panel_tol, MAX_DEPTH);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Finds a root of `f` in `[lo, hi]` by bisection. Stops when
/// `|f(x)| <= f_tol` or the bracket has collapsed to floating precision.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, f_tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(Error::NonFinite("bisection bracket".into()));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Infeasible(format!(
            "no sign change in [{lo}, {hi}] (f = {f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid.abs() <= f_tol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Result of a golden-section search.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
    /// Set when the samples contradict unimodality or the search collapsed
    /// onto an edge of the initial bracket.
    pub suspect: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of `f` on `[lo, hi]` until the bracket is
/// narrower than `x_tol`.
pub fn golden_section<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> Result<Minimum> {
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "empty search bracket [{lo}, {hi}]"
        )));
    }
    let (orig_lo, orig_hi) = (lo, hi);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut eval = |x: f64, samples: &mut Vec<(f64, f64)>| -> Result<f64> {
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("objective at {x}")));
        }
        samples.push((x, v));
        Ok(v)
    };

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut samples)?;
    let mut fd = eval(d, &mut samples)?;
    let mut iterations = 0;
    while b - a > x_tol && iterations < 200 {
        iterations += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut samples)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut samples)?;
        }
    }
    let (x, value) = if fc < fd { (c, fc) } else { (d, fd) };

    let at_edge = (a - orig_lo).abs() <= x_tol || (orig_hi - b).abs() <= x_tol;
    let suspect = at_edge || !samples_unimodal(&mut samples);
    Ok(Minimum {
        x,
        value,
        evaluations: samples.len(),
        suspect,
    })
}

/// Relative size, against the sampled range, of wiggles that
/// `samples_unimodal` ignores as evaluation noise.
const UNIMODAL_NOISE: f64 = 1e-4;

/// True when the samples, ordered by abscissa, descend and then ascend up to
/// wiggles below `UNIMODAL_NOISE` of the sampled range.
fn samples_unimodal(samples: &mut [(f64, f64)]) -> bool {
    samples.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.1), hi.max(s.1)));
    let noise = UNIMODAL_NOISE * (hi - lo);
    let Some(min_at) = samples
        .iter()
        .enumerate()
        .min_by(|p, q| p.1 .1.total_cmp(&q.1 .1))
        .map(|(i, _)| i)
    else {
        return true;
    };
    // running extreme on each side of the minimum must be monotone
    let mut floor = samples[min_at].1;
    for s in samples[..min_at].iter().rev() {
        if s.1 < floor - noise {
            return false;
        }
        floor = floor.max(s.1);
    }
    floor = samples[min_at].1;
    for s in &samples[min_at + 1..] {
        if s.1 < floor - noise {
            return false;
        }
        floor = floor.max(s.1);
    }
    true
}
