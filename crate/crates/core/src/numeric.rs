//! Small numerical kernels: bracketed root finding, golden-section search and
//! adaptive Gauss-Kronrod quadrature.

use crate::error::{Error, Result};

pub use statrs::function::erf::{erf, erfc};
pub use statrs::function::gamma::{gamma, ln_gamma};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail of the standard normal.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Root of an increasing function on `[lo, hi]` by bisection.
///
/// `f(lo) <= 0 <= f(hi)` is required. Stops when the bracket is narrower
/// than `tol * max(1, |mid|)`.
pub fn bisect_increasing(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::Invalid(format!("empty bracket [{lo}, {hi}]")));
    }
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::NoSolution("root not bracketed".into()));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * mid.abs().max(1.0) {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solve `f(x) = target` for increasing `f` on `[lo, inf)`, doubling the upper
/// end until it brackets the target.
pub fn invert_increasing(
    mut f: impl FnMut(f64) -> f64,
    target: f64,
    lo: f64,
    tol: f64,
) -> Result<f64> {
    let mut hi = if lo > 0.0 { 2.0 * lo } else { 1.0 };
    let mut n = 0;
    while f(hi) < target {
        hi *= 2.0;
        n += 1;
        if n > 1100 {
            return Err(Error::NoSolution("could not bracket target".into()));
        }
    }
    bisect_increasing(|x| f(x) - target, lo, hi, tol)
}

/// Minimize a unimodal function on `[a, b]` by golden-section search.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= tol * (c.abs() + d.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimize `f` over `[lo, hi]` (`0 < lo < hi`): scan a log-spaced grid, then
/// refine around the best grid point by golden section in `log x`.
pub fn log_grid_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, points: usize, tol: f64) -> (f64, f64) {
    let (la, lb) = (lo.ln(), hi.ln());
    let step = (lb - la) / (points - 1) as f64;
    let mut best = (0, f64::INFINITY);
    for i in 0..points {
        let v = f((la + step * i as f64).exp());
        if v < best.1 {
            best = (i, v);
        }
    }
    let i = best.0 as f64;
    let a = (la + step * (i - 1.0)).max(la);
    let b = (la + step * (i + 1.0)).min(lb);
    let (x, v) = golden_min(|u| f(u.exp()), a, b, tol);
    if v <= best.1 {
        (x.exp(), v)
    } else {
        ((la + step * i).exp(), best.1)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature on a finite interval.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut stack = vec![(a, b, abs_tol, 0u32)];
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let (k, err) = kronrod15(&mut f, lo, hi);
        if !k.is_finite() {
            return Err(Error::Divergent("non-finite integrand".into()));
        }
        if err <= tol.max(1e-15 * k.abs()) || depth >= 48 {
            total += k;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * tol, depth + 1));
            stack.push((mid, hi, 0.5 * tol, depth + 1));
        }
    }
    Ok(total)
}

/// Adaptive quadrature on `[a, inf)` through the map `x = a + u/(1-u)`.
pub fn integrate_to_inf(mut f: impl FnMut(f64) -> f64, a: f64, abs_tol: f64) -> Result<f64> {
    integrate(
        |u| {
            let w = 1.0 - u;
            let x = a + u / w;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (w * w)
            }
        },
        0.0,
        1.0,
        abs_tol,
    )
}
