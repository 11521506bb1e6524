//! Laws of the planar walk skeleton behind the RW and RWP models.
//!
//! A drone that has completed `n` flights has traveled a total distance
//! `S_n` (the sum of the flight lengths) and sits at net displacement `Z_n`
//! from where it started. This module provides, per `n`:
//!
//! * the total-distance pdf/cdf `f_{S_n}`, exact Erlang forms for
//!   exponential flights and a fitted closed-form family for Rayleigh
//!   flights ([`fit_rayleigh_sum`]),
//! * the net-displacement pdf/cdf `f_{Z_n}` (exactly Rayleigh for Rayleigh
//!   flights, asymptotically Rayleigh otherwise),
//! * the joint `f_{S_n,Z_n}` ([`FlightWalkLaw::joint_sz`]), exact for
//!   `n = 2` and approximated for `n >= 3`,
//! * aggregate waiting-time laws `W_n = T_0 + ... + T_n` ([`WaitLaw`]).
//!
//! The `n >= 3` joint multiplies the marginals and then conditions the net
//! displacement on its support `z <= s`, dividing by `F_{Z_n}(s)`. The plain
//! product loses the probability mass `P[Z_n > s]`, which is far from
//! negligible at small `t` (it reaches ~0.1 of the total displacement law in
//! the regimes the acceptance checks run at); conditioning restores every
//! series term's weight exactly and leaves only a shape error inside terms
//! where `F_{Z_n}(s)` is well below one.

use crate::dist::{ensure_param, ParameterError, ScalarDistribution};
use crate::quad;
use crate::rng::Rng;
use crate::special::ln_gamma;
use crate::table::{linspace, Tabulated1D};

/// Fitted constants of the closed-form pdf family for a sum of `n` i.i.d.
/// Rayleigh variables.
#[derive(Debug, Clone, Copy)]
pub struct RayleighSumFit {
    pub n: usize,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    /// Exact scale constant `sigma^2 ((2n-1)!!)^{1/n} / n`.
    pub b: f64,
    /// Final least-squares residual against the calibration histogram.
    pub residual: f64,
}

/// `b = sigma^2 ((2n-1)!!)^{1/n} / n`, evaluated through logarithms so large
/// `n` cannot overflow the double factorial.
pub fn rayleigh_sum_b(n: usize, sigma: f64) -> f64 {
    let nf = n as f64;
    let ln_dfact = ln_gamma(2.0 * nf + 1.0) - nf * std::f64::consts::LN_2 - ln_gamma(nf + 1.0);
    sigma * sigma * (ln_dfact / nf).exp() / nf
}

/// The fitted pdf family evaluated at total distance `s`, given the
/// constants for this `n`. The base term is a scaled chi-like density in
/// `x = s / sqrt(n)`; the correction is a total derivative in `x`, so it
/// integrates to exactly zero and the whole expression keeps unit mass (the
/// `1/sqrt(n)` out front is the change-of-variable Jacobian back to `s`).
/// Tiny negative excursions of the fitted shape are clamped away.
fn rayleigh_sum_pdf(fit: &RayleighSumFit, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let n = fit.n as f64;
    let sqrt_n = n.sqrt();
    let x = s / sqrt_n;
    let b = fit.b;
    let ln_norm = (n - 1.0) * std::f64::consts::LN_2 + ln_gamma(n);

    let ln_t1 = (2.0 * n - 1.0) * x.ln() - x * x / (2.0 * b) - ln_norm - n * b.ln();
    let t1 = ln_t1.exp();

    let d = x - fit.a2;
    let corr = if d == 0.0 {
        0.0
    } else {
        let ln_mag = (2.0 * n - 2.0) * d.abs().ln() - fit.a1 * d * d / (2.0 * b)
            - ln_norm
            - b.ln()
            - n * (b.ln() - fit.a1.ln());
        let bracket = b * (2.0 * n * x - fit.a2) - fit.a1 * x * d * d;
        fit.a0 * ln_mag.exp() * bracket
    };

    ((t1 - corr) / sqrt_n).max(0.0)
}

const FIT_SAMPLES: usize = 1_000_000;
const FIT_BINS: usize = 200;

/// Calibrates the `(a0, a1, a2)` constants of the Rayleigh-sum pdf family
/// against a Monte Carlo histogram of `n`-term sums (1e6 samples, 200 bins);
/// `b` is set exactly from its closed form. Errors when no optimizer start
/// converges, reporting the best residual reached.
pub fn fit_rayleigh_sum(n: usize, sigma: f64, rng: &mut Rng) -> Result<RayleighSumFit, ParameterError> {
    ensure_param!(n >= 2, "the sum fit needs n >= 2, got {n}");
    ensure_param!(sigma.is_finite() && sigma > 0.0, "sigma must be positive, got {sigma}");
    let law = ScalarDistribution::Rayleigh { sigma };
    let b = rayleigh_sum_b(n, sigma);

    let mut max_s: f64 = 0.0;
    let mut samples = Vec::with_capacity(FIT_SAMPLES);
    for _ in 0..FIT_SAMPLES {
        let s: f64 = (0..n).map(|_| law.sample(rng)).sum();
        max_s = max_s.max(s);
        samples.push(s);
    }
    let bin_w = max_s / FIT_BINS as f64;
    let mut density = vec![0.0f64; FIT_BINS];
    for &s in &samples {
        let k = ((s / bin_w) as usize).min(FIT_BINS - 1);
        density[k] += 1.0;
    }
    let norm = 1.0 / (FIT_SAMPLES as f64 * bin_w);
    for d in &mut density {
        *d *= norm;
    }
    let centers: Vec<f64> = (0..FIT_BINS).map(|k| (k as f64 + 0.5) * bin_w).collect();

    // Parameters are (a0, ln a1, a2): the log transform keeps the fitted
    // exponential curvature positive, which the zero-integral property of
    // the correction term depends on.
    let objective = |p: &[f64; 3]| -> f64 {
        let fit = RayleighSumFit { n, a0: p[0], a1: p[1].exp(), a2: p[2], b, residual: 0.0 };
        centers
            .iter()
            .zip(&density)
            .map(|(&c, &d)| {
                let e = rayleigh_sum_pdf(&fit, c) - d;
                e * e
            })
            .sum()
    };

    let starts = [
        [0.05, 0.0, 0.0],
        [-0.05, 0.0, 0.0],
        [0.2, 0.4, sigma / 2.0],
        [0.5, 0.0, -sigma / 2.0],
    ];
    let scales = [0.1, 0.3, sigma / 4.0];
    let mut best: Option<([f64; 3], f64, bool)> = None;
    for start in starts {
        let (x, f, converged) = nelder_mead(&objective, start, scales, 2_000);
        if best.as_ref().is_none_or(|(_, bf, _)| f < *bf) {
            best = Some((x, f, converged));
        }
    }
    let (x, residual, converged) = best.unwrap();
    if !converged {
        return Err(ParameterError(format!(
            "Rayleigh-sum fit did not converge for n={n}, sigma={sigma}; best residual {residual:.3e}"
        )));
    }
    Ok(RayleighSumFit { n, a0: x[0], a1: x[1].exp(), a2: x[2], b, residual })
}

// Downhill simplex in three dimensions with standard coefficients.
// Converged means the simplex collapsed in both coordinates and values.
fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(
    f: &F,
    start: [f64; 3],
    scales: [f64; 3],
    max_iter: usize,
) -> ([f64; 3], f64, bool) {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let mut pts: Vec<[f64; 3]> = vec![start];
    for i in 0..3 {
        let mut p = start;
        p[i] += scales[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(f).collect();

    let mut converged = false;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (ordered_pts, ordered_vals): (Vec<_>, Vec<_>) =
            order.iter().map(|&i| (pts[i], vals[i])).unzip();
        pts = ordered_pts;
        vals = ordered_vals;

        let spread = vals[3] - vals[0];
        let size: f64 = (0..3)
            .map(|i| (0..3).map(|d| (pts[i + 1][d] - pts[0][d]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= 1e-16 * (1.0 + vals[0].abs()) && size <= 1e-9 {
            converged = true;
            break;
        }

        let mut centroid = [0.0; 3];
        for p in pts.iter().take(3) {
            for d in 0..3 {
                centroid[d] += p[d] / 3.0;
            }
        }
        let shifted = |coef: f64| -> [f64; 3] {
            let mut p = [0.0; 3];
            for d in 0..3 {
                p[d] = centroid[d] + coef * (centroid[d] - pts[3][d]);
            }
            p
        };

        let reflect = shifted(ALPHA);
        let f_reflect = f(&reflect);
        if f_reflect < vals[0] {
            let expand = shifted(GAMMA);
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                pts[3] = expand;
                vals[3] = f_expand;
            } else {
                pts[3] = reflect;
                vals[3] = f_reflect;
            }
        } else if f_reflect < vals[2] {
            pts[3] = reflect;
            vals[3] = f_reflect;
        } else {
            let contract = shifted(if f_reflect < vals[3] { RHO } else { -RHO });
            let f_contract = f(&contract);
            if f_contract < vals[3].min(f_reflect) {
                pts[3] = contract;
                vals[3] = f_contract;
            } else {
                for i in 1..4 {
                    for d in 0..3 {
                        pts[i][d] = pts[0][d] + SIGMA * (pts[i][d] - pts[0][d]);
                    }
                    vals[i] = f(&pts[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..4 {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    (pts[best], vals[best], converged)
}

enum SumLaw {
    /// Rayleigh flights: fitted pdf plus a tabulated cdf of that pdf.
    Fitted { fit: RayleighSumFit, cdf: Tabulated1D },
    /// Exponential flights: `S_n` is Erlang exactly.
    Erlang(ScalarDistribution),
}

/// Per-`n` distributional machinery for one flight law.
pub struct FlightWalkLaw {
    flight: ScalarDistribution,
    /// Scale of the (exact or asymptotic) Rayleigh law of `Z_n / sqrt(n)`.
    net_unit_scale: f64,
    net_is_exact: bool,
    /// Sum laws for n = 2.. in order; `sums[k]` holds n = k + 2.
    sums: Vec<SumLaw>,
}

impl FlightWalkLaw {
    /// Builds every per-`n` law needed to analyze walks of total length up
    /// to `vt_max` meters. The largest `n` is sized so that
    /// `P[S_n <= vt_max]` is far below the series truncation threshold.
    pub fn for_horizon(
        flight: ScalarDistribution,
        vt_max: f64,
        rng: &mut Rng,
    ) -> Result<Self, ParameterError> {
        ensure_param!(vt_max.is_finite() && vt_max > 0.0, "horizon distance must be positive, got {vt_max}");
        let mu = flight.mean();
        let sd = flight.variance().sqrt();
        // Normal lower-tail sizing: smallest n with n*mu - 5.5*sd*sqrt(n)
        // beyond vt_max, then slack. 5.5 sigma leaves P[S_n <= vt_max] well
        // under the 1e-7 series truncation threshold applied at use sites,
        // which re-check against the built laws and fail loudly if short.
        let mut n_max = 2usize;
        while n_max < 198 && (n_max as f64) * mu - 5.5 * sd * (n_max as f64).sqrt() < vt_max {
            n_max += 1;
        }
        n_max += 3;

        match flight {
            ScalarDistribution::Rayleigh { sigma } => {
                let mut sums = Vec::with_capacity(n_max - 1);
                for n in 2..=n_max {
                    let fit = fit_rayleigh_sum(n, sigma, rng)?;
                    let hi = n as f64 * mu + 10.0 * sd * (n as f64).sqrt();
                    let pdf_tab = Tabulated1D::from_fn(linspace(0.0, hi, 1_000), |s| rayleigh_sum_pdf(&fit, s));
                    sums.push(SumLaw::Fitted { fit, cdf: pdf_tab.cumulative() });
                }
                Ok(Self {
                    flight,
                    net_unit_scale: sigma,
                    net_is_exact: true,
                    sums,
                })
            }
            ScalarDistribution::Exponential { mean } => {
                let sums = (2..=n_max)
                    .map(|n| Ok(SumLaw::Erlang(ScalarDistribution::erlang(n as u32, mean)?)))
                    .collect::<Result<Vec<_>, ParameterError>>()?;
                Ok(Self {
                    // Central-limit scale sqrt((mu^2 + var)/2), which for the
                    // exponential law collapses to its mean.
                    flight,
                    net_unit_scale: ((mu * mu + sd * sd) / 2.0).sqrt(),
                    net_is_exact: false,
                    sums,
                })
            }
            other => Err(ParameterError(format!(
                "walk laws support Rayleigh and exponential flight lengths; got {other:?}"
            ))),
        }
    }

    pub fn flight(&self) -> &ScalarDistribution {
        &self.flight
    }

    /// Largest flight count with a precomputed sum law.
    pub fn n_max(&self) -> usize {
        self.sums.len() + 1
    }

    /// Fitted constants for `S_n`, absent for `n < 2` and exact-form laws.
    pub fn fit(&self, n: usize) -> Option<&RayleighSumFit> {
        match self.sums.get(n.checked_sub(2)?) {
            Some(SumLaw::Fitted { fit, .. }) => Some(fit),
            _ => None,
        }
    }

    fn sum_law(&self, n: usize) -> Result<&SumLaw, ParameterError> {
        ensure_param!(n >= 2, "sum laws start at n = 2, got n = {n}");
        self.sums.get(n - 2).ok_or_else(|| {
            ParameterError(format!(
                "n = {n} exceeds the precomputed range (n_max = {}); rebuild for a longer horizon",
                self.n_max()
            ))
        })
    }

    /// Total-distance pdf `f_{S_n}(s)`; `n = 1` is the flight law itself.
    pub fn sum_pdf(&self, n: usize, s: f64) -> Result<f64, ParameterError> {
        if n == 1 {
            return Ok(self.flight.pdf(s));
        }
        Ok(match self.sum_law(n)? {
            SumLaw::Fitted { fit, .. } => rayleigh_sum_pdf(fit, s),
            SumLaw::Erlang(law) => law.pdf(s),
        })
    }

    /// Total-distance cdf `F_{S_n}(s)`.
    pub fn sum_cdf(&self, n: usize, s: f64) -> Result<f64, ParameterError> {
        if n == 1 {
            return Ok(self.flight.cdf(s));
        }
        Ok(match self.sum_law(n)? {
            SumLaw::Fitted { cdf, .. } => {
                if s <= 0.0 {
                    0.0
                } else {
                    cdf.eval(s).min(1.0)
                }
            }
            SumLaw::Erlang(law) => law.cdf(s),
        })
    }

    fn net_scale(&self, n: usize) -> f64 {
        self.net_unit_scale * (n as f64).sqrt()
    }

    /// Net-displacement pdf `f_{Z_n}(z)`: exactly Rayleigh for Rayleigh
    /// flights (uniform headings make the endpoint a scale mixture that
    /// collapses to a circular Gaussian), central-limit Rayleigh otherwise.
    /// `n = 1` is the flight law itself.
    pub fn net_pdf(&self, n: usize, z: f64) -> f64 {
        if n == 1 {
            return self.flight.pdf(z);
        }
        if z < 0.0 {
            return 0.0;
        }
        let s2 = self.net_scale(n).powi(2);
        z / s2 * (-z * z / (2.0 * s2)).exp()
    }

    /// Net-displacement cdf `F_{Z_n}(z)`.
    pub fn net_cdf(&self, n: usize, z: f64) -> f64 {
        if n == 1 {
            return self.flight.cdf(z);
        }
        if z <= 0.0 {
            return 0.0;
        }
        let s2 = self.net_scale(n).powi(2);
        -(-z * z / (2.0 * s2)).exp_m1()
    }

    /// Whether `net_pdf` is the exact law rather than the CLT asymptote.
    pub fn net_law_is_exact(&self) -> bool {
        self.net_is_exact
    }

    /// Joint density `f_{S_n, Z_n}(s, z)`.
    ///
    /// `n = 2` is the exact closed form (an angular average of flight-pdf
    /// products with an inverse-square-root prefactor in `s^2 - z^2`);
    /// `n >= 3` multiplies the marginals and conditions on the support
    /// `z <= s`. `n = 1` is degenerate (`S_1 = Z_1 = R_1`, a line mass) and
    /// must be handled by callers through `sum_pdf(1, .)`.
    pub fn joint_sz(&self, n: usize, s: f64, z: f64) -> Result<f64, ParameterError> {
        ensure_param!(s >= 0.0 && z >= 0.0, "joint arguments must be nonnegative, got s={s}, z={z}");
        ensure_param!(
            n >= 2,
            "the n = 1 joint is a line mass on s = z; use sum_pdf(1, s) for its marginal"
        );
        if z > s {
            return Ok(0.0);
        }
        if n == 2 {
            return Ok(self.joint_s2z2(s, z));
        }
        self.sum_law(n)?;
        let denom = self.net_cdf(n, s);
        if denom < 1e-12 {
            return Ok(0.0);
        }
        Ok(self.sum_pdf(n, s)? * self.net_pdf(n, z) / denom)
    }

    /// Exact two-flight joint. The angular substitution `2x - s = z sin(phi)`
    /// turns the inner integral into a smooth average over `phi`, leaving the
    /// `1/sqrt(s^2 - z^2)` prefactor outside where callers can see it.
    fn joint_s2z2(&self, s: f64, z: f64) -> f64 {
        if z >= s || z < 0.0 {
            return 0.0;
        }
        let pref = 2.0 * z / (std::f64::consts::PI * ((s - z) * (s + z)).sqrt());
        pref * self.joint_s2z2_smooth(s, z)
    }

    /// The smooth angular factor of the two-flight joint, i.e. the joint
    /// without its `2z/(pi sqrt(s^2 - z^2))` prefactor.
    pub fn joint_s2z2_smooth(&self, s: f64, z: f64) -> f64 {
        let half_pi = std::f64::consts::FRAC_PI_2;
        quad::integrate(
            |phi| {
                let w = z * phi.sin();
                0.5 * self.flight.pdf((s + w) / 2.0) * self.flight.pdf((s - w) / 2.0)
            },
            -half_pi,
            half_pi,
            1e-12,
            1e-9,
        )
        .value
    }
}

enum WaitKind {
    /// Exponential hovers: `W_n` is Erlang with `n + 1` stages, closed form.
    Erlang { mean: f64 },
    /// Any other continuous hover law: iterated grid convolution.
    Gridded { pdfs: Vec<Tabulated1D>, cdfs: Vec<Tabulated1D> },
}

/// Aggregate waiting-time laws `W_n = T_0 + ... + T_n` for the RWP model's
/// hovers, including the initial hover `T_0`.
pub struct WaitLaw {
    hover: ScalarDistribution,
    kind: WaitKind,
}

const WAIT_GRID_PER_MEAN: f64 = 200.0;
const WAIT_GRID_N_CAP: usize = 32;

impl WaitLaw {
    /// Precomputes wait laws for `W_0 .. W_n_max`. Exponential hovers use
    /// exact Erlang forms at any depth; other continuous laws are convolved
    /// numerically on a grid with step `mean/200` (depth capped at 32).
    /// Deterministic hovers have no density and are rejected.
    pub fn new(hover: ScalarDistribution, n_max: usize) -> Result<Self, ParameterError> {
        let (lo, _) = hover.support();
        ensure_param!(lo >= 0.0, "hover law must be nonnegative, got {hover:?}");
        match hover {
            ScalarDistribution::Exponential { mean } => Ok(Self { hover, kind: WaitKind::Erlang { mean } }),
            ScalarDistribution::Deterministic { .. } => Err(ParameterError(
                "deterministic hovers have no density; analytic waiting laws need a continuous hover \
                 (simulation supports them)"
                    .into(),
            )),
            _ => {
                ensure_param!(
                    n_max <= WAIT_GRID_N_CAP,
                    "gridded wait laws support depth up to {WAIT_GRID_N_CAP}, requested {n_max}"
                );
                let step = hover.mean() / WAIT_GRID_PER_MEAN;
                // Truncate the single-hover law where its tail is negligible.
                let mut cap = hover.mean() + 10.0 * hover.variance().sqrt();
                let (_, hi) = hover.support();
                if hi.is_finite() {
                    cap = hi;
                }
                let base_len = (cap / step).ceil() as usize + 1;
                // Cell-averaged density from cdf differences: exact mass per
                // cell, so support-edge jumps cost no probability.
                let base: Vec<f64> = (0..base_len)
                    .map(|i| {
                        let x = i as f64 * step;
                        (hover.cdf(x + step / 2.0) - hover.cdf((x - step / 2.0).max(0.0))) / step
                    })
                    .collect();

                let mut pdfs = Vec::with_capacity(n_max + 1);
                let mut cur = base.clone();
                for _ in 0..=n_max {
                    let xs: Vec<f64> = (0..cur.len()).map(|i| i as f64 * step).collect();
                    pdfs.push(Tabulated1D::new(xs, cur.clone()));
                    cur = convolve_grid(&cur, &base, step);
                }
                let cdfs = pdfs.iter().map(|p| midpoint_cdf(p, step)).collect();
                Ok(Self { hover, kind: WaitKind::Gridded { pdfs, cdfs } })
            }
        }
    }

    pub fn hover(&self) -> &ScalarDistribution {
        &self.hover
    }

    /// Density of `W_n` at `w` (zero outside support).
    pub fn wait_pdf(&self, n: usize, w: f64) -> Result<f64, ParameterError> {
        match &self.kind {
            WaitKind::Erlang { mean } => Ok(ScalarDistribution::Erlang {
                shape: (n + 1) as u32,
                mean_per_stage: *mean,
            }
            .pdf(w)),
            WaitKind::Gridded { pdfs, .. } => {
                let tab = pdfs.get(n).ok_or_else(|| {
                    ParameterError(format!("wait law depth {n} exceeds precomputed range"))
                })?;
                if w < 0.0 || w > tab.x_max() {
                    Ok(0.0)
                } else {
                    Ok(tab.eval(w))
                }
            }
        }
    }

    /// Cdf of `W_n` at `w`.
    pub fn wait_cdf(&self, n: usize, w: f64) -> Result<f64, ParameterError> {
        match &self.kind {
            WaitKind::Erlang { mean } => Ok(ScalarDistribution::Erlang {
                shape: (n + 1) as u32,
                mean_per_stage: *mean,
            }
            .cdf(w)),
            WaitKind::Gridded { cdfs, .. } => {
                let tab = cdfs.get(n).ok_or_else(|| {
                    ParameterError(format!("wait law depth {n} exceeds precomputed range"))
                })?;
                if w <= 0.0 {
                    Ok(0.0)
                } else if w > tab.x_max() {
                    // The grid covers the truncated support; past its end the
                    // remaining tail mass is negligible by construction.
                    Ok(1.0)
                } else {
                    Ok(tab.eval(w).min(1.0))
                }
            }
        }
    }
}

// Cumulative law of a cell-averaged density table: each node's value owns
// the mass of the cell centered on it, so the running sum reproduces the cdf
// at cell boundaries exactly and jumps in the underlying law lose nothing.
fn midpoint_cdf(pdf: &Tabulated1D, step: f64) -> Tabulated1D {
    let b = pdf.ys();
    let mut cum = Vec::with_capacity(b.len());
    let mut below = 0.0;
    for (k, &bk) in b.iter().enumerate() {
        cum.push(if k == 0 { 0.0 } else { below + bk * step / 2.0 });
        below += bk * step;
    }
    Tabulated1D::new(pdf.xs().to_vec(), cum)
}

// Discrete convolution of two cell-averaged densities.
fn convolve_grid(f: &[f64], g: &[f64], step: f64) -> Vec<f64> {
    let n = f.len() + g.len() - 1;
    let mut out = vec![0.0; n];
    for (i, &fi) in f.iter().enumerate() {
        if fi == 0.0 {
            continue;
        }
        for (j, &gj) in g.iter().enumerate() {
            out[i + j] += fi * gj;
        }
    }
    for v in &mut out {
        *v *= step;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::stats::{ks_statistic, FnCdf};

    const SIGMA_500: f64 = 398.942_280_401_432_7;

    #[test]
    fn b_constant_closed_form() {
        // n=2, sigma=1: ((3)!!)^{1/2}/2 = sqrt(3)/2.
        assert!((rayleigh_sum_b(2, 1.0) - 3.0f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((rayleigh_sum_b(1, 2.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fitted_sum_matches_monte_carlo() {
        let mut rng = stream_rng(31, 0);
        let fit = fit_rayleigh_sum(5, SIGMA_500, &mut rng).unwrap();

        let grid = linspace(0.0, 5.0 * 500.0 + 10.0 * 5.0f64.sqrt() * 261.0, 2_000);
        let tab = Tabulated1D::from_fn(grid, |s| rayleigh_sum_pdf(&fit, s));
        let mass = tab.integral();
        assert!((mass - 1.0).abs() < 1e-2, "fitted mass {mass}");

        let mean = Tabulated1D::from_fn(tab.xs().to_vec(), |s| s * rayleigh_sum_pdf(&fit, s)).integral();
        assert!((mean - 2_500.0).abs() < 25.0, "fitted mean {mean}");

        // Independent samples, not the calibration set.
        let law = ScalarDistribution::Rayleigh { sigma: SIGMA_500 };
        let mut rng2 = stream_rng(32, 0);
        let samples: Vec<f64> = (0..100_000)
            .map(|_| (0..5).map(|_| law.sample(&mut rng2)).sum())
            .collect();
        let cdf_tab = tab.cumulative();
        let ks = ks_statistic(&samples, &FnCdf(|s: f64| cdf_tab.eval(s).clamp(0.0, 1.0))).unwrap();
        assert!(ks <= 0.02, "fit KS = {ks}");
    }

    fn rayleigh_law_for_tests(vt_max: f64) -> FlightWalkLaw {
        let mut rng = stream_rng(33, 0);
        let flight = ScalarDistribution::Rayleigh { sigma: SIGMA_500 };
        FlightWalkLaw::for_horizon(flight, vt_max, &mut rng).unwrap()
    }

    #[test]
    fn two_flight_joint_is_normalized() {
        let law = rayleigh_law_for_tests(1_500.0);
        // Integrate z out to s with the square-root edge handled, then s.
        let marginal = |s: f64| {
            quad::integrate_sqrt_upper(|z| law.joint_sz(2, s, z).unwrap(), 0.0, s, 1e-10, 1e-8).value
        };
        let mass = quad::integrate(marginal, 0.0, 12_000.0, 1e-6, 1e-6).value;
        assert!((mass - 1.0).abs() < 1e-3, "two-flight joint mass {mass}");
    }

    #[test]
    fn two_flight_joint_matches_walk_histogram() {
        let law = rayleigh_law_for_tests(1_500.0);
        let flight = ScalarDistribution::Rayleigh { sigma: SIGMA_500 };
        let mut rng = stream_rng(34, 0);
        let n_samp = 400_000usize;
        let lim = 3_500.0;
        let bins = 30usize;
        let w = lim / bins as f64;
        let mut counts = vec![0u64; bins * bins];
        use rand::Rng as _;
        for _ in 0..n_samp {
            let r1 = flight.sample(&mut rng);
            let r2 = flight.sample(&mut rng);
            let th = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let z = ((r1 + r2 * th.cos()).powi(2) + (r2 * th.sin()).powi(2)).sqrt();
            let s = r1 + r2;
            if s < lim && z < lim {
                counts[(s / w) as usize * bins + (z / w) as usize] += 1;
            }
        }
        // Cells are integrated with a 3x3 Gauss-Legendre rule; cells touching
        // the z = s edge are skipped (the density has a square-root spike
        // there that a fixed rule cannot resolve).
        let gl_nodes = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        let gl_weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let mut checked = 0;
        for i in 0..bins {
            for j in 0..i {
                let mut cell = 0.0;
                for (ns, ws) in gl_nodes.iter().zip(gl_weights) {
                    for (nz, wz) in gl_nodes.iter().zip(gl_weights) {
                        let s = (i as f64 + 0.5 + 0.5 * ns) * w;
                        let z = (j as f64 + 0.5 + 0.5 * nz) * w;
                        cell += ws * wz * law.joint_sz(2, s, z).unwrap();
                    }
                }
                let expect = cell * (w / 2.0) * (w / 2.0) * n_samp as f64;
                if expect > 2_000.0 {
                    let got = counts[i * bins + j] as f64;
                    let rel = (got - expect).abs() / expect;
                    assert!(rel < 0.1, "cell ({i},{j}): got {got}, expect {expect:.0}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 20, "too few high-mass cells checked: {checked}");
    }

    #[test]
    fn joint_support_and_degenerate_index() {
        let law = rayleigh_law_for_tests(1_000.0);
        assert_eq!(law.joint_sz(2, 100.0, 200.0).unwrap(), 0.0);
        assert_eq!(law.joint_sz(4, 500.0, 600.0).unwrap(), 0.0);
        assert!(law.joint_sz(1, 100.0, 100.0).is_err());
        assert!(law.joint_sz(3, -1.0, 0.0).is_err());
    }

    #[test]
    fn three_flight_marginal_tracks_exact_net_law() {
        // The conditioned product keeps the term's total mass exact but
        // reshapes the z-marginal: in the bulk (z up to ~1.5 net scales) the
        // deviation stays under ~30%, while the far z tail is starved
        // because large net displacement demands total distance out in the
        // sum law's own tail. The composite displacement laws built from
        // these terms are validated end to end against simulation elsewhere;
        // this pins the bulk behavior and the exact-mass property.
        let law = rayleigh_law_for_tests(2_500.0);
        let sg = SIGMA_500 * 3.0f64.sqrt();
        let mut worst: f64 = 0.0;
        for k in 1..=6 {
            let z = k as f64 * sg / 4.0;
            let marginal =
                quad::integrate_semi_infinite(|s| law.joint_sz(3, s, z).unwrap(), z, 1e-12, 1e-8).value;
            let exact = law.net_pdf(3, z);
            worst = worst.max((marginal - exact).abs() / exact);
        }
        assert!(worst < 0.3, "bulk z-marginal relative deviation {worst}");

        let mass = quad::integrate_semi_infinite(
            |s| quad::integrate(|z| law.joint_sz(3, s, z).unwrap(), 0.0, s, 1e-12, 1e-8).value,
            0.0,
            1e-8,
            1e-6,
        )
        .value;
        assert!((mass - 1.0).abs() < 2e-3, "three-flight joint mass {mass}");
    }

    #[test]
    fn exponential_flights_use_erlang_sums() {
        let mut rng = stream_rng(35, 0);
        let flight = ScalarDistribution::exponential(500.0).unwrap();
        let law = FlightWalkLaw::for_horizon(flight, 3_000.0, &mut rng).unwrap();
        let erlang3 = ScalarDistribution::erlang(3, 500.0).unwrap();
        for s in [100.0, 800.0, 2_000.0, 5_000.0] {
            assert!((law.sum_pdf(3, s).unwrap() - erlang3.pdf(s)).abs() < 1e-12);
            assert!((law.sum_cdf(3, s).unwrap() - erlang3.cdf(s)).abs() < 1e-12);
        }
        assert!(!law.net_law_is_exact());
        // Central-limit scale for exponential flights is mean * sqrt(n).
        let z = 900.0;
        let want = {
            let s2: f64 = 500.0 * 500.0 * 4.0;
            z / s2 * (-z * z / (2.0 * s2)).exp()
        };
        assert!((law.net_pdf(4, z) - want).abs() < 1e-12);
    }

    #[test]
    fn unsupported_flight_laws_are_rejected() {
        let mut rng = stream_rng(36, 0);
        let uniform = ScalarDistribution::uniform(10.0, 20.0).unwrap();
        assert!(FlightWalkLaw::for_horizon(uniform, 100.0, &mut rng).is_err());
    }

    #[test]
    fn exponential_waits_are_erlang() {
        let law = WaitLaw::new(ScalarDistribution::exponential(5.0).unwrap(), 10).unwrap();
        // W_1 sums two stages: F(10) = 1 - 3 e^{-2}.
        let want = 1.0 - 3.0 * (-2.0f64).exp();
        assert!((law.wait_cdf(1, 10.0).unwrap() - want).abs() < 1e-12);
        // W_0 is the hover itself.
        assert!((law.wait_cdf(0, 5.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn gridded_waits_match_closed_forms() {
        let hover = ScalarDistribution::uniform(2.0, 8.0).unwrap();
        let law = WaitLaw::new(hover, 4).unwrap();
        // W_0 is uniform on [2, 8].
        assert!((law.wait_cdf(0, 5.0).unwrap() - 0.5).abs() < 1e-3);
        // W_1 is the symmetric triangular law on [4, 16].
        assert!((law.wait_cdf(1, 10.0).unwrap() - 0.5).abs() < 1e-3);
        assert!((law.wait_pdf(1, 10.0).unwrap() - 1.0 / 6.0).abs() < 1e-3);
        assert_eq!(law.wait_pdf(1, 17.0).unwrap(), 0.0);
    }

    #[test]
    fn more_waits_are_stochastically_larger() {
        for law in [
            WaitLaw::new(ScalarDistribution::exponential(5.0).unwrap(), 6).unwrap(),
            WaitLaw::new(ScalarDistribution::uniform(1.0, 4.0).unwrap(), 6).unwrap(),
        ] {
            for n in 1..=6usize {
                for w in [1.0, 5.0, 12.0, 30.0] {
                    let later = law.wait_cdf(n, w).unwrap();
                    let earlier = law.wait_cdf(n - 1, w).unwrap();
                    assert!(
                        later <= earlier + 1e-9,
                        "F_W{n}({w}) = {later} > F_W{}({w}) = {earlier}",
                        n - 1
                    );
                }
            }
        }
    }

    #[test]
    fn deterministic_hovers_are_rejected() {
        assert!(WaitLaw::new(ScalarDistribution::deterministic(5.0).unwrap(), 4).is_err());
    }
}
