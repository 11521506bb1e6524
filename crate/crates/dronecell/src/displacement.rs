//! Analytic mixed distributions of the net displacement L(t).
//!
//! Every law is a continuous density on [0, vt) plus explicit point masses
//! (at vt while the first flight is still in progress, at 0 while the
//! initial hover lasts). Atoms are carried separately so downstream
//! quadrature can treat them as closed-form terms.
//!
//! The continuous part is tabulated in the angular coordinate l = vt sin(th),
//! storing g(th) = f_L(vt sin th) vt cos(th). The change of variable absorbs
//! the inverse-square-root blow-up of the RW density at l = vt, makes the
//! cdf a plain cumulative trapezoid in th, and lets weighted integrals
//! against the law stay smooth near the support edge.

use crate::dist::{ensure_param, ParameterError, ScalarDistribution};
use crate::quad;
use crate::stats::CdfEval;
use crate::table::{linspace, Grid2D, Tabulated1D};
use crate::walk::{FlightWalkLaw, WaitLaw};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

pub use crate::walk::{fit_rayleigh_sum, RayleighSumFit};

/// Number of angular nodes of the continuous-part tabulation. Sized so the
/// piecewise-linear interpolant misplaces well under 1e-6 of the mass; the
/// cdf near the band edges must be that accurate for exclusion-zone
/// densities to join continuously at the kink radii.
const N_THETA: usize = 1_600;
/// Series truncation: drop flight counts n once F_{S_{n-1}}(vt) < this.
/// The dropped mass lands directly in the cdf at the upper support edge,
/// so the threshold sits well below the edge-continuity budget.
const SERIES_TAIL: f64 = 1e-7;
/// Hard cap on the series depth; beyond it the flight law is pathological.
const SERIES_CAP: usize = 200;

/// Mixed law of the net displacement at a fixed time.
#[derive(Debug, Clone)]
pub struct NetDisplacementDistribution {
    t: f64,
    v: f64,
    /// (location, mass) point masses, in increasing location order.
    atoms: Vec<(f64, f64)>,
    /// Angular density g(th) on [0, pi/2]; `None` when the law is pure atoms.
    theta_pdf: Option<Tabulated1D>,
    theta_cdf: Option<Tabulated1D>,
}

impl NetDisplacementDistribution {
    fn from_parts(
        t: f64,
        v: f64,
        mut atoms: Vec<(f64, f64)>,
        theta_pdf: Option<Tabulated1D>,
    ) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let theta_cdf = theta_pdf.as_ref().map(|p| p.cumulative());
        Self { t, v, atoms, theta_pdf, theta_cdf }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// Upper edge of the support, v*t.
    pub fn max_distance(&self) -> f64 {
        self.v * self.t
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Point mass sitting exactly at l = vt.
    pub fn atom_mass(&self) -> f64 {
        let vt = self.max_distance();
        self.atoms
            .iter()
            .filter(|(loc, _)| (loc - vt).abs() <= 1e-9 * vt.max(1.0))
            .map(|(_, m)| m)
            .sum()
    }

    /// Continuous density f_L(l; t), excluding atoms. Diverges like
    /// an inverse square root at l -> vt for the RW law; evaluation close to
    /// the edge is capped rather than returning infinity.
    pub fn pdf(&self, l: f64) -> f64 {
        let vt = self.max_distance();
        let Some(g) = &self.theta_pdf else { return 0.0 };
        if l < 0.0 || l >= vt || vt == 0.0 {
            return 0.0;
        }
        let r = (l / vt).clamp(0.0, 1.0);
        let cos = (1.0 - r * r).sqrt().max(1e-8);
        g.eval(r.asin()) / (vt * cos)
    }

    /// Mass of the continuous part alone.
    pub fn continuous_mass(&self) -> f64 {
        self.theta_cdf.as_ref().map_or(0.0, |c| c.ys().last().copied().unwrap_or(0.0))
    }

    /// Atom masses plus the continuous mass; 1 up to quadrature error.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, m)| m).sum::<f64>() + self.continuous_mass()
    }

    fn continuous_cdf(&self, l: f64) -> f64 {
        let vt = self.max_distance();
        let Some(c) = &self.theta_cdf else { return 0.0 };
        if l <= 0.0 || vt == 0.0 {
            return 0.0;
        }
        c.eval((l / vt).min(1.0).asin())
    }

    /// F_L(l; t); exactly 1 for l >= vt.
    pub fn cdf(&self, l: f64) -> f64 {
        if l >= self.max_distance() {
            return 1.0;
        }
        let atom_part: f64 =
            self.atoms.iter().filter(|(loc, _)| *loc <= l).map(|(_, m)| m).sum();
        (atom_part + self.continuous_cdf(l)).min(1.0)
    }

    /// Left limit F_L(l-; t), needed to score atoms in KS comparisons.
    pub fn cdf_left(&self, l: f64) -> f64 {
        let atom_part: f64 =
            self.atoms.iter().filter(|(loc, _)| *loc < l).map(|(_, m)| m).sum();
        (atom_part + self.continuous_cdf(l)).min(1.0)
    }

    /// Integral of h against the continuous part over [l_lo, l_hi],
    /// computed as a node-aligned trapezoid in the angular coordinate so the
    /// support-edge singularity never appears. Atoms are NOT included;
    /// callers fold those in as closed-form terms.
    pub fn integrate_weighted<F: Fn(f64) -> f64>(&self, l_lo: f64, l_hi: f64, h: F) -> f64 {
        let vt = self.max_distance();
        let Some(g) = &self.theta_pdf else { return 0.0 };
        if vt == 0.0 || l_hi <= l_lo {
            return 0.0;
        }
        let th_a = (l_lo.max(0.0) / vt).min(1.0).asin();
        let th_b = (l_hi.min(vt) / vt).min(1.0).asin();
        if th_b <= th_a {
            return 0.0;
        }
        let weighted = |th: f64| g.eval(th) * h(vt * th.sin());
        let xs = g.xs();
        // Indices of the interior nodes strictly inside (th_a, th_b).
        let lo = xs.partition_point(|&x| x <= th_a);
        let hi = xs.partition_point(|&x| x < th_b);
        let mut total = 0.0;
        let mut prev_x = th_a;
        let mut prev_y = weighted(th_a);
        for &x in &xs[lo..hi] {
            let y = weighted(x);
            total += (x - prev_x) * (prev_y + y) / 2.0;
            prev_x = x;
            prev_y = y;
        }
        let y_end = weighted(th_b);
        total += (th_b - prev_x) * (prev_y + y_end) / 2.0;
        total
    }

    /// Moves sample values that sit within floating-point noise of an atom
    /// location onto it, so empirical comparisons score the point mass.
    pub fn snap_samples(&self, samples: &mut [f64]) {
        for s in samples {
            for &(loc, mass) in &self.atoms {
                if mass > 0.0 && (*s - loc).abs() <= 1e-9 * loc.max(1.0) {
                    *s = loc;
                }
            }
        }
    }
}

impl CdfEval for NetDisplacementDistribution {
    fn cdf(&self, x: f64) -> f64 {
        NetDisplacementDistribution::cdf(self, x)
    }
    fn cdf_left(&self, x: f64) -> f64 {
        NetDisplacementDistribution::cdf_left(self, x)
    }
}

/// Straight-line displacement: the full mass rides at l = vt.
pub fn sl_displacement(v: f64, t: f64) -> Result<NetDisplacementDistribution, ParameterError> {
    ensure_param!(v > 0.0, "speed must be positive, got {v}");
    ensure_param!(t >= 0.0, "time must be nonnegative, got {t}");
    Ok(NetDisplacementDistribution::from_parts(t, v, vec![(v * t, 1.0)], None))
}

/// Random-stop displacement: L(t) = min(vt, R), so the flight density is
/// simply truncated at vt with the excess mass parked there.
pub fn rs_displacement(
    flight: &ScalarDistribution,
    v: f64,
    t: f64,
) -> Result<NetDisplacementDistribution, ParameterError> {
    ensure_param!(v > 0.0, "speed must be positive, got {v}");
    ensure_param!(t >= 0.0, "time must be nonnegative, got {t}");
    let vt = v * t;
    let atom = (vt, 1.0 - flight.cdf(vt));
    if vt == 0.0 {
        return Ok(NetDisplacementDistribution::from_parts(t, v, vec![atom], None));
    }
    let g = Tabulated1D::from_fn(linspace(0.0, FRAC_PI_2, N_THETA), |th| {
        flight.pdf(vt * th.sin()) * vt * th.cos()
    });
    Ok(NetDisplacementDistribution::from_parts(t, v, vec![atom], Some(g)))
}

/// Displacement of a point moving at speed v along a circle of radius
/// `radius`: deterministically 2 radius |sin(vt / 2 radius)|. A synthetic
/// turning model used to exercise intensity-measure ordering checks against
/// a case with a known, strictly sub-straight-line displacement.
pub fn circular_arc_displacement(
    radius: f64,
    v: f64,
    t: f64,
) -> Result<NetDisplacementDistribution, ParameterError> {
    ensure_param!(radius > 0.0, "arc radius must be positive, got {radius}");
    ensure_param!(v > 0.0, "speed must be positive, got {v}");
    ensure_param!(t >= 0.0, "time must be nonnegative, got {t}");
    let chord = 2.0 * radius * (v * t / (2.0 * radius)).sin().abs();
    Ok(NetDisplacementDistribution::from_parts(t, v, vec![(chord, 1.0)], None))
}

// Smallest flight count m with F_{S_m}(vt) below the series tail threshold;
// series terms beyond it carry less than SERIES_TAIL of the mass combined.
fn series_depth(law: &FlightWalkLaw, vt: f64) -> Result<usize, ParameterError> {
    let mut m = 1;
    loop {
        let reach = if m == 1 { law.flight().cdf(vt) } else { law.sum_cdf(m, vt)? };
        if reach < SERIES_TAIL {
            return Ok(m);
        }
        m += 1;
        if m > SERIES_CAP {
            return Err(ParameterError(format!(
                "flight-count series did not truncate by n = {SERIES_CAP} (vt = {vt}); \
                 the flight law is too short-ranged for this horizon"
            )));
        }
    }
}

// Exact two-flight joint f_{S2,Z2} with its smooth angular factor tabulated
// on an (s, z) grid; the closed-form prefactor carries both the z/sqrt(s^2 -
// z^2) shape and the support cut.
struct TwoFlightGrid {
    smooth: Grid2D,
}

const J_GRID: usize = 240;

impl TwoFlightGrid {
    fn new(law: &FlightWalkLaw, vt: f64) -> Self {
        let s_nodes = linspace(0.0, vt, J_GRID);
        let z_nodes = linspace(0.0, vt, J_GRID);
        // The angular factor is smooth across the z = s diagonal (the
        // support cut lives in the prefactor); tabulating it on both sides
        // keeps bilinear cells that straddle the diagonal accurate.
        let smooth = Grid2D::from_fn(s_nodes, z_nodes, |s, z| law.joint_s2z2_smooth(s, z));
        Self { smooth }
    }

    fn f22(&self, s: f64, z: f64) -> f64 {
        if z <= 0.0 || z >= s {
            return 0.0;
        }
        let pref = 2.0 * z / (PI * ((s - z) * (s + z)).sqrt());
        pref * self.smooth.eval(s, z).max(0.0)
    }
}

// Length of the third side of a triangle with sides l and c enclosing
// angle om; the angular form of the net-displacement kernel. Writing it
// through sin(om/2) keeps the small-|l - c| case exact.
fn third_side(l: f64, c: f64, om: f64) -> f64 {
    let d = l - c;
    let h = (om / 2.0).sin();
    (d * d + 4.0 * l * c * h * h).sqrt()
}

// Angle at which the third side reaches z_cap, or pi if unreachable.
fn kernel_angle_cap(l: f64, c: f64, z_cap: f64) -> f64 {
    if z_cap >= l + c {
        return PI;
    }
    ((l * l + c * c - z_cap * z_cap) / (2.0 * l * c)).clamp(-1.0, 1.0).acos()
}

// Tolerances for the nested quadratures: inner integrals must be quieter
// than the outer rule's own tolerance or the adaptive error estimates churn.
const OUTER_ABS: f64 = 1e-8;
const OUTER_REL: f64 = 1e-6;
const INNER_ABS: f64 = 1e-10;
const INNER_REL: f64 = 1e-7;

// First-flight smooth factor shared by the RW n=2 term and the RWP
// first-hop term: the average over the heading angle of
// f_R((q + l sin phi)/2) (1 - F_R((q - l sin phi)/2)).
fn first_hop_angular(flight: &ScalarDistribution, l: f64, q: f64) -> f64 {
    quad::integrate(
        |phi| {
            let w = l * phi.sin();
            flight.pdf((q + w) / 2.0) * (1.0 - flight.cdf((q - w) / 2.0))
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        INNER_ABS,
        INNER_REL,
    )
    .value
}

/// Random-walk displacement assembled as the flight-count series: a point
/// mass while the first flight is still running, a closed-form second-flight
/// term, the exact two-flight joint for the third, and conditioned product
/// joints beyond that.
pub fn rw_displacement(
    law: &FlightWalkLaw,
    v: f64,
    t: f64,
) -> Result<NetDisplacementDistribution, ParameterError> {
    ensure_param!(v > 0.0, "speed must be positive, got {v}");
    ensure_param!(t > 0.0, "time must be positive, got {t}");
    let vt = v * t;
    let flight = law.flight().clone();
    let atom = (vt, 1.0 - flight.cdf(vt));
    let m_max = series_depth(law, vt)?;
    let two = if m_max >= 2 { Some(TwoFlightGrid::new(law, vt)) } else { None };

    let thetas = linspace(0.0, FRAC_PI_2, N_THETA);
    let g_vals: Vec<f64> = thetas
        .par_iter()
        .map(|&th| {
            let l = vt * th.sin();
            if l <= 0.0 {
                return 0.0;
            }
            // Second-flight term: the vt cos(th) Jacobian cancels its
            // 1/sqrt(v^2 t^2 - l^2) prefactor exactly.
            let mut g = l / PI * first_hop_angular(&flight, l, vt);
            if m_max >= 2 {
                let s_lo = (vt - l) / 2.0;
                let s_mid = (vt + l) / 2.0;
                let integrand = |s: f64| {
                    rw_series_inner(law, two.as_ref(), m_max, vt, l, s)
                };
                let part_a = quad::integrate(integrand, s_lo, s_mid, OUTER_ABS, OUTER_REL).value;
                let part_b = quad::integrate(integrand, s_mid, vt, OUTER_ABS, OUTER_REL).value;
                g += 2.0 * l / PI * (part_a + part_b) * vt * th.cos();
            }
            g.max(0.0)
        })
        .collect();

    let g = Tabulated1D::new(thetas, g_vals);
    Ok(NetDisplacementDistribution::from_parts(t, v, vec![atom], Some(g)))
}

// Inner (z-) integral of every completed-flight term at total distance s:
// sum over joints of f_{S_m,Z_m}(s, z) against the displacement kernel,
// times the probability the ongoing flight survives its progress vt - s.
fn rw_series_inner(
    law: &FlightWalkLaw,
    two: Option<&TwoFlightGrid>,
    m_max: usize,
    vt: f64,
    l: f64,
    s: f64,
) -> f64 {
    let c = vt - s;
    if c <= 1e-12 * vt {
        return 0.0;
    }
    let z_lo = (l - c).abs();
    let z_cap = s.min(l + c);
    if z_cap <= z_lo {
        return 0.0;
    }
    let survive = 1.0 - law.flight().cdf(c);
    if survive <= 0.0 {
        return 0.0;
    }

    let joint_sum = |z: f64| -> f64 {
        let mut f = 0.0;
        if let Some(two) = two {
            f += two.f22(s, z);
        }
        for m in 3..=m_max {
            f += law.joint_sz(m, s, z).expect("series depth checked against walk law");
        }
        f
    };

    let inner = if l + c <= s {
        // Kernel endpoints only; the angular substitution regularizes both.
        quad::integrate(
            |om| {
                let z = third_side(l, c, om);
                joint_sum(z) / (2.0 * z)
            },
            0.0,
            PI,
            INNER_ABS,
            INNER_REL,
        )
        .value
    } else {
        // The two-flight factor carries a 1/sqrt(s - z) spike at the cap
        // z = s inside the kernel range: angular form up to a midpoint,
        // square-root substitution from there to the cap.
        let z_mid = (z_lo + z_cap) / 2.0;
        let om_mid = kernel_angle_cap(l, c, z_mid);
        let lower = quad::integrate(
            |om| {
                let z = third_side(l, c, om);
                joint_sum(z) / (2.0 * z)
            },
            0.0,
            om_mid,
            INNER_ABS,
            INNER_REL,
        )
        .value;
        let upper = quad::integrate_sqrt_upper(
            |z| {
                let k = (l + c - z) * (l + z - c) * (z + c - l) * (z + c + l);
                if k <= 0.0 {
                    return 0.0;
                }
                joint_sum(z) / k.sqrt()
            },
            z_mid,
            z_cap,
            INNER_ABS,
            INNER_REL,
        )
        .value;
        lower + upper
    };
    survive * inner
}

const E_GRID: usize = 160;

/// Random-waypoint displacement: an atom at zero while the initial hover
/// lasts, a first-hop term, exact hovering-at-waypoint terms, and mid-flight
/// series terms whose hover-time convolutions are pretabulated per flight
/// count.
pub fn rwp_displacement(
    law: &FlightWalkLaw,
    waits: &WaitLaw,
    v: f64,
    t: f64,
) -> Result<NetDisplacementDistribution, ParameterError> {
    ensure_param!(v > 0.0, "speed must be positive, got {v}");
    ensure_param!(t > 0.0, "time must be positive, got {t}");
    let vt = v * t;
    let flight = law.flight().clone();
    let m_max = series_depth(law, vt)?;
    // Depth check up front so integrand closures can rely on it.
    waits.wait_cdf(m_max, 0.0)?;

    let atoms = vec![(0.0, 1.0 - waits.wait_cdf(0, t)?), (vt, 0.0)];

    let two = if m_max >= 2 { Some(TwoFlightGrid::new(law, vt)) } else { None };
    let hover_conv = HoverConvolutions::new(law, waits, two.as_ref(), m_max, v, vt)?;

    let thetas = linspace(0.0, FRAC_PI_2, N_THETA);
    let g_vals: Vec<f64> = thetas
        .par_iter()
        .map(|&th| {
            let l = vt * th.sin();
            if l <= 0.0 {
                // The density is finite and positive at l = 0 when the
                // initial hover can end just before t.
                let f0 = (1.0 - flight.cdf(0.0))
                    * waits.wait_pdf(0, t).expect("depth 0 always available")
                    / v;
                return f0 * vt;
            }
            let f = rwp_density_at(law, waits, two.as_ref(), &hover_conv, m_max, v, t, l)
                .max(0.0);
            f * vt * th.cos()
        })
        .collect();

    let g = Tabulated1D::new(thetas, g_vals);
    Ok(NetDisplacementDistribution::from_parts(t, v, atoms, Some(g)))
}

// Pretabulated hover-time convolutions for the RWP mid-flight terms.
//
// For the exact two-flight joint:   D(y, z) = int f_W2(w) f22(y - vw, z) dw
// For conditioned joints (m >= 3):  E_m(y, u) = int_0^{u/v} f_Wm(w) *
//                                      f_Sm(y - vw) / F_Zm(y - vw) dw
// so the mid-flight integrand at (y, z) is D(y, z) + sum_m E_m(y, y - z)
// f_Zm(z). The u argument encodes the support constraint z <= s = y - vw.
struct HoverConvolutions {
    d2: Option<Grid2D>,
    e: Vec<Grid2D>,
    m_start: usize,
}

impl HoverConvolutions {
    fn new(
        law: &FlightWalkLaw,
        waits: &WaitLaw,
        two: Option<&TwoFlightGrid>,
        m_max: usize,
        v: f64,
        vt: f64,
    ) -> Result<Self, ParameterError> {
        let d2 = match two {
            Some(two) if m_max >= 2 => {
                let nodes = linspace(0.0, vt, E_GRID);
                Some(Grid2D::from_fn(nodes.clone(), nodes, |y, z| {
                    if z >= y {
                        return 0.0;
                    }
                    quad::integrate_sqrt_upper(
                        |w| {
                            waits.wait_pdf(2, w).expect("depth checked") * two.f22(y - v * w, z)
                        },
                        0.0,
                        (y - z) / v,
                        INNER_ABS,
                        INNER_REL,
                    )
                    .value
                }))
            }
            _ => None,
        };
        let mut e = Vec::new();
        for m in 3..=m_max {
            let y_nodes = linspace(0.0, vt, E_GRID);
            let u_nodes = linspace(0.0, vt, E_GRID);
            e.push(Grid2D::from_fn(y_nodes, u_nodes, |y, u| {
                if u <= 0.0 || y <= 0.0 {
                    return 0.0;
                }
                quad::integrate(
                    |w| {
                        let s = y - v * w;
                        let denom = law.net_cdf(m, s);
                        if denom < 1e-12 {
                            return 0.0;
                        }
                        waits.wait_pdf(m, w).expect("depth checked")
                            * law.sum_pdf(m, s).expect("depth checked")
                            / denom
                    },
                    0.0,
                    u / v,
                    INNER_ABS,
                    INNER_REL,
                )
                .value
            }));
        }
        Ok(Self { d2, e, m_start: 3 })
    }

    // Mid-flight joint mass density at completed-walk state (y, z).
    fn eval(&self, law: &FlightWalkLaw, y: f64, z: f64) -> f64 {
        if z >= y {
            return 0.0;
        }
        let mut f = self.d2.as_ref().map_or(0.0, |d| d.eval(y, z).max(0.0));
        for (i, grid) in self.e.iter().enumerate() {
            let m = self.m_start + i;
            f += grid.eval(y, y - z).max(0.0) * law.net_pdf(m, z);
        }
        f
    }
}

// Continuous RWP density at displacement l, summing the first-hop term, the
// hovering-at-waypoint terms (displacement frozen at a completed walk's net
// value), and the mid-flight terms (walk plus a partial flight).
#[allow(clippy::too_many_arguments)]
fn rwp_density_at(
    law: &FlightWalkLaw,
    waits: &WaitLaw,
    two: Option<&TwoFlightGrid>,
    hover_conv: &HoverConvolutions,
    m_max: usize,
    v: f64,
    t: f64,
    l: f64,
) -> f64 {
    let vt = v * t;
    let flight = law.flight();
    let wcdf = |n: usize, x: f64| waits.wait_cdf(n, x).expect("depth checked");

    // Still in the first flight, launched after hovering t - l/v.
    let tau = t - l / v;
    let mut f = (1.0 - flight.cdf(l)) * waits.wait_pdf(0, tau).expect("depth checked") / v;

    // Hovering at the first waypoint: displacement is the flight itself.
    f += flight.pdf(l) * (wcdf(0, tau) - wcdf(1, tau));

    // Hovering at a later waypoint: displacement equals the walk's net
    // value, so the laws are evaluated on the z = l line.
    if m_max >= 2 {
        if let Some(two) = two {
            f += quad::integrate_sqrt_lower(
                |s| {
                    let tau_s = t - s / v;
                    two.f22(s, l) * (wcdf(1, tau_s) - wcdf(2, tau_s))
                },
                l,
                vt,
                INNER_ABS,
                INNER_REL,
            )
            .value;
        }
        if m_max >= 3 {
            f += quad::integrate(
                |s| {
                    let tau_s = t - s / v;
                    let mut inner = 0.0;
                    for m in 3..=m_max {
                        inner += law.joint_sz(m, s, l).expect("depth checked")
                            * (wcdf(m - 1, tau_s) - wcdf(m, tau_s));
                    }
                    inner
                },
                l,
                vt,
                OUTER_ABS,
                OUTER_REL,
            )
            .value;
        }
    }

    // Mid-flight after at least one full flight: first-hop analogue with a
    // hover-delayed start, then the pretabulated multi-flight terms.
    let w_hi = t - l / v;
    if w_hi > 0.0 {
        let mid1 = quad::integrate_sqrt_upper(
            |w| {
                let q = vt - v * w;
                let k = (q - l) * (q + l);
                if k <= 0.0 {
                    return 0.0;
                }
                waits.wait_pdf(1, w).expect("depth checked") * first_hop_angular(flight, l, q)
                    / (2.0 * k.sqrt())
            },
            0.0,
            w_hi,
            INNER_ABS,
            INNER_REL,
        )
        .value;
        f += 2.0 * l / PI * mid1;
    }
    if m_max >= 2 {
        let integrand = |y: f64| -> f64 {
            let c = vt - y;
            if c <= 1e-12 * vt {
                return 0.0;
            }
            let z_lo = (l - c).abs();
            let z_cap = y.min(l + c);
            if z_cap <= z_lo {
                return 0.0;
            }
            let om_cap = kernel_angle_cap(l, c, z_cap);
            let survive = 1.0 - flight.cdf(c);
            let inner = quad::integrate(
                |om| {
                    let z = third_side(l, c, om);
                    hover_conv.eval(law, y, z) / (2.0 * z)
                },
                0.0,
                om_cap,
                INNER_ABS,
                INNER_REL,
            )
            .value;
            survive * inner
        };
        let y_lo = (vt - l) / 2.0;
        let y_mid = (vt + l) / 2.0;
        let part_a = quad::integrate(integrand, y_lo, y_mid, OUTER_ABS, OUTER_REL).value;
        let part_b = quad::integrate(integrand, y_mid, vt, OUTER_ABS, OUTER_REL).value;
        f += 2.0 * l / PI * (part_a + part_b);
    }
    f
}
