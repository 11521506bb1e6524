//! Adaptive Gauss-Kronrod quadrature.
//!
//! A 7-point Gauss rule embedded in a 15-point Kronrod rule, bisected
//! adaptively on the worst interval until the global error estimate meets the
//! requested tolerance. The displacement and density integrands in this crate
//! carry inverse-square-root endpoint singularities, so the module also
//! provides substitution wrappers that map such an endpoint to a smooth one
//! before the adaptive driver sees it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Nodes of the 15-point Kronrod rule on [-1, 1]; odd indices are the
// embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error of `value`.
    pub abs_error: f64,
    /// False when the subdivision budget ran out before the tolerance was
    /// met; `value` is then still the best available estimate.
    pub converged: bool,
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    let round = 50.0 * f64::EPSILON * result_abs;
    if round > f64::MIN_POSITIVE / (f64::EPSILON * 50.0) {
        err = err.max(round);
    }
    err
}

fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut result_gauss = WG[3] * f_center;
    let mut result_kronrod = WGK[7] * f_center;
    let mut result_abs = result_kronrod.abs();

    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let y1 = f(center - dx);
        let y2 = f(center + dx);
        fv1[j] = y1;
        fv2[j] = y2;
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * (y1 + y2);
        }
        result_kronrod += WGK[j] * (y1 + y2);
        result_abs += WGK[j] * (y1.abs() + y2.abs());
    }

    let mean = 0.5 * result_kronrod;
    let mut result_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        result_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = rescale_error(
        (result_kronrod - result_gauss) * half,
        result_abs * half.abs(),
        result_asc * half.abs(),
    );
    (result_kronrod * half, err)
}

const MAX_SUBDIVISIONS: usize = 256;

/// Integrates `f` over `[a, b]` to the requested absolute or relative
/// tolerance, whichever is looser.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps_abs: f64, eps_rel: f64) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, abs_error: 0.0, converged: true };
    }
    let (value, error) = qk15(&f, a, b);
    let mut heap = BinaryHeap::with_capacity(64);
    heap.push(Interval { a, b, value, error });
    let mut total_value = value;
    let mut total_error = error;

    for _ in 0..MAX_SUBDIVISIONS {
        let tol = eps_abs.max(eps_rel * total_value.abs());
        if total_error <= tol {
            return QuadResult { value: total_value, abs_error: total_error, converged: true };
        }
        let worst = heap.pop().expect("heap holds at least one interval");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval no longer splittable in f64; keep its contribution.
            heap.push(worst);
            break;
        }
        let (v1, e1) = qk15(&f, worst.a, mid);
        let (v2, e2) = qk15(&f, mid, worst.b);
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Interval { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Interval { a: mid, b: worst.b, value: v2, error: e2 });
    }

    let tol = eps_abs.max(eps_rel * total_value.abs());
    QuadResult { value: total_value, abs_error: total_error, converged: total_error <= tol }
}

/// Integrates `f` over `[a, +inf)` via the rational map `x = a + t/(1-t)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, eps_abs: f64, eps_rel: f64) -> QuadResult {
    integrate(
        move |t| {
            let om = 1.0 - t;
            f(a + t / om) / (om * om)
        },
        0.0,
        1.0,
        eps_abs,
        eps_rel,
    )
}

/// Integrates `f` over `[a, b]` where `f` may blow up like
/// `1/sqrt(x - a)` at the lower endpoint. The map `x = a + u^2` makes the
/// integrand bounded there.
pub fn integrate_sqrt_lower<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps_abs: f64, eps_rel: f64) -> QuadResult {
    if b <= a {
        return QuadResult { value: 0.0, abs_error: 0.0, converged: true };
    }
    integrate(move |u| 2.0 * u * f(a + u * u), 0.0, (b - a).sqrt(), eps_abs, eps_rel)
}

/// Mirror image of [`integrate_sqrt_lower`] for a `1/sqrt(b - x)` blow-up at
/// the upper endpoint, via `x = b - u^2`.
pub fn integrate_sqrt_upper<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps_abs: f64, eps_rel: f64) -> QuadResult {
    if b <= a {
        return QuadResult { value: 0.0, abs_error: 0.0, converged: true };
    }
    integrate(move |u| 2.0 * u * f(b - u * u), 0.0, (b - a).sqrt(), eps_abs, eps_rel)
}
