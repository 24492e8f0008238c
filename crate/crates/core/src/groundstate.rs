//! Positive radial solution of −ΔU + U = U^{p−1} in R^n.
//!
//! The solve has three stages:
//! 1. bisection on the central value a = U(0) between shots that cross zero
//!    (a too large) and shots that turn back up (a too small);
//! 2. a matched refinement: the outward shot is joined at a matching radius
//!    to an inward integration started from the decaying asymptotic form,
//!    and a is corrected by secant iteration until U' is continuous there;
//! 3. assembly of U on a graded grid, outward values inside the matching
//!    radius and inward values outside it.
//!
//! Stage 2 avoids the exponential loss of accuracy of a pure outward shot
//! (the growing mode is amplified like e^{2r} relative to U).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{sphere_area, GaussLegendre};
use crate::radial::{RadialFunction, RadialGrid, Tail};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Final width of the bisection bracket on U(0).
    pub tol: f64,
    pub cells: usize,
    pub grading: f64,
    /// Hard cap on the truncation radius.
    pub r_cap: f64,
    /// r_max is the first radius where the tail estimate drops below
    /// `tail_ratio · U(0)`.
    pub tail_ratio: f64,
    /// Maximum Runge–Kutta step.
    pub rk_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            cells: 6000,
            grading: 1.0,
            r_cap: 60.0,
            tail_ratio: 1e-13,
            rk_step: 1e-3,
        }
    }
}

/// Identity errors of a computed ground state (all relative).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub e_energy: f64,
    pub e_pohozaev: f64,
    pub e_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub n: usize,
    pub p: f64,
    pub profile: RadialFunction,
    pub u0: f64,
    pub decay_c: f64,
    /// ∫|∇U|², ∫U², ∫U^p over R^n.
    pub i1: f64,
    pub i2: f64,
    pub ip: f64,
    /// Final bisection bracket on U(0).
    pub bracket: (f64, f64),
    /// |U'_out − U'_in| at the matching radius after refinement.
    pub match_mismatch: f64,
    pub r_match: f64,
}

/// Critical Sobolev exponent 2n/(n−2).
pub fn critical_exponent(n: usize) -> f64 {
    2.0 * n as f64 / (n as f64 - 2.0)
}

/// Exponent p_N = 2N/(N−2) for N = n + m.
pub fn product_exponent(n: usize, m: usize) -> f64 {
    critical_exponent(n + m)
}

pub fn check_exponent(n: usize, p: f64) -> Result<()> {
    if n <= 2 {
        return Err(Error::InvalidInput(format!("dimension n = {n} must exceed 2")));
    }
    if !(p > 2.0 && p < critical_exponent(n)) {
        return Err(Error::SubcriticalViolation { n, p });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Ode {
    n: f64,
    p: f64,
}

impl Ode {
    fn nonlinearity(&self, u: f64) -> f64 {
        u - u.abs().powf(self.p - 2.0) * u
    }

    /// U'' from the ODE (valid for r > 0).
    fn accel(&self, r: f64, u: f64, du: f64) -> f64 {
        -(self.n - 1.0) * du / r + self.nonlinearity(u)
    }

    /// Taylor start U = a + b r² + d r⁴.
    fn series(&self, a: f64, r: f64) -> (f64, f64) {
        let b = self.nonlinearity(a) / (2.0 * self.n);
        let fprime = 1.0 - (self.p - 1.0) * a.powf(self.p - 2.0);
        let d = fprime * b / (4.0 * (self.n + 2.0));
        let r2 = r * r;
        (a + b * r2 + d * r2 * r2, 2.0 * b * r + 4.0 * d * r2 * r)
    }

    fn rk4(&self, r: f64, y: (f64, f64), h: f64) -> (f64, f64) {
        let f = |r: f64, y: (f64, f64)| (y.1, self.accel(r, y.0, y.1));
        let k1 = f(r, y);
        let k2 = f(r + 0.5 * h, (y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
        let k3 = f(r + 0.5 * h, (y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
        let k4 = f(r + h, (y.0 + h * k3.0, y.1 + h * k3.1));
        (
            y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            y.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    }

    /// Integrates from r0 to r1 with equal steps no longer than `max_step`,
    /// nor than r/50 near the origin where the (n−1)/r drift is stiff.
    fn advance(&self, r0: f64, y: (f64, f64), r1: f64, max_step: f64) -> (f64, f64) {
        let step = max_step.min(0.02 * r0.abs().min(r1.abs()));
        let steps = ((r1 - r0).abs() / step).ceil().max(1.0) as usize;
        let h = (r1 - r0) / steps as f64;
        let mut y = y;
        for k in 0..steps {
            y = self.rk4(r0 + k as f64 * h, y, h);
        }
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    CrossesZero,
    TurnsUp,
    Undecided,
}

const SERIES_RADIUS: f64 = 1e-3;

fn classify(ode: &Ode, a: f64, max_step: f64, r_limit: f64) -> (Shot, f64) {
    let mut r = SERIES_RADIUS;
    let mut y = ode.series(a, r);
    while r < r_limit {
        y = ode.rk4(r, y, max_step);
        r += max_step;
        if y.0 < 0.0 {
            return (Shot::CrossesZero, r);
        }
        if y.1 > 0.0 {
            return (Shot::TurnsUp, r);
        }
    }
    (Shot::Undecided, r)
}

/// Solves for the ground state with default grid parameters and the given
/// bisection tolerance.
pub fn solve_ground_state(n: usize, p: f64, tol: f64) -> Result<GroundState> {
    let cfg = SolverConfig {
        tol,
        ..SolverConfig::default()
    };
    solve_ground_state_with(n, p, &cfg)
}

pub fn solve_ground_state_with(n: usize, p: f64, cfg: &SolverConfig) -> Result<GroundState> {
    check_exponent(n, p)?;
    let ode = Ode { n: n as f64, p };
    let shoot_step = 2e-3;
    let r_limit = 60.0;

    // Bracket: a slightly above the constant solution 1 turns back up.
    let mut lo = 1.0 + 1e-6;
    if classify(&ode, lo, shoot_step, r_limit).0 != Shot::TurnsUp {
        return Err(Error::NoBracket(format!("a = {lo} does not turn up")));
    }
    let mut hi = 2.0;
    loop {
        match classify(&ode, hi, shoot_step, r_limit).0 {
            Shot::CrossesZero => break,
            Shot::TurnsUp => {
                lo = hi;
                hi *= 2.0;
            }
            Shot::Undecided => {
                return Err(Error::NoBracket(format!("shot from a = {hi} is undecided")))
            }
        }
        if hi > 1e8 {
            return Err(Error::NoBracket("no zero-crossing shot below a = 1e8".into()));
        }
    }
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(&ode, mid, shoot_step, r_limit).0 {
            Shot::CrossesZero => hi = mid,
            Shot::TurnsUp => lo = mid,
            Shot::Undecided => break,
        }
    }
    let a_bisect = 0.5 * (lo + hi);

    // Matching radius: U drops to 1e-2 a along the bisection shot.
    let mut r = SERIES_RADIUS;
    let mut y = ode.series(a_bisect, r);
    while y.0 > 1e-2 * a_bisect {
        y = ode.rk4(r, y, shoot_step);
        r += shoot_step;
        if y.1 > 0.0 || r > r_limit {
            return Err(Error::NoBracket("bisection shot never decays to the matching level".into()));
        }
    }
    let c_est = y.0 * r.powf((n as f64 - 1.0) / 2.0) * r.exp();
    // r_max grows until the two tail fits agree (or the cap is reached)
    let mut r_max = truncation_radius(n, c_est, a_bisect, cfg);
    loop {
        let gs = assemble(&ode, (lo, hi), r, c_est, r_max, cfg)?;
        if gs.decay_constant().is_ok() || r_max >= cfg.r_cap {
            return Ok(gs);
        }
        r_max = (r_max + 10.0).min(cfg.r_cap);
    }
}

/// Matched refinement and assembly on a grid reaching r_max; `r` is the
/// matching radius and `c_est` the tail amplitude estimate from bisection.
fn assemble(ode: &Ode, (lo, hi): (f64, f64), r: f64, c_est: f64, r_max: f64, cfg: &SolverConfig) -> Result<GroundState> {
    let n = ode.n as usize;
    let p = ode.p;
    let ode = *ode;
    let grid = RadialGrid::graded(r_max, cfg.cells, cfg.grading);
    let nodes = grid.nodes().to_vec();
    let im = grid.cell(r) + 1;
    let r_m = nodes[im];

    let tail = TailStart::new(n, r_max + 5.0);
    let m = nodes.len();
    // Both integrations step node to node, so the matched states are exactly
    // the ones assembled into the profile below.
    let outward_states = |a: f64| -> Vec<(f64, f64)> {
        let r0 = SERIES_RADIUS.min(nodes[1]);
        let mut state = ode.series(a, r0);
        let mut rc = r0;
        let mut out = Vec::with_capacity(im);
        for &r in &nodes[1..=im] {
            state = ode.advance(rc, state, r, cfg.rk_step);
            rc = r;
            out.push(state);
        }
        out
    };
    // states at nodes m−1, m−2, …, im
    let inward_states = |amp: f64| -> Vec<(f64, f64)> {
        let mut state = tail.initial(amp);
        let mut rc = tail.r_start;
        let mut out = Vec::with_capacity(m - im);
        for &r in nodes[im..].iter().rev() {
            state = ode.advance(rc, state, r, cfg.rk_step);
            rc = r;
            out.push(state);
        }
        out
    };
    let outward = |a: f64| *outward_states(a).last().unwrap();
    let inward = |amp: f64| *inward_states(amp).last().unwrap();
    // Amplitude of the inward solution matching U_out(r_m); U_in(r_m) is
    // increasing in the amplitude, solved by secant on log amplitude.
    let match_amp = |target: f64| -> f64 {
        let g = |la: f64| inward(la.exp()).0.ln() - target.ln();
        let mut x0 = c_est.ln();
        let mut g0 = g(x0);
        let mut x1 = x0 - g0;
        for _ in 0..60 {
            let g1 = g(x1);
            if g1 == g0 || g1.abs() < 1e-15 {
                break;
            }
            let x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
            x0 = x1;
            g0 = g1;
            x1 = x2;
        }
        x1.exp()
    };
    let mismatch = |a: f64| -> (f64, f64) {
        let (u, du) = outward(a);
        let amp = match_amp(u);
        (du - inward(amp).1, amp)
    };

    let (mut a0, mut a1) = (lo, hi);
    if a0 == a1 {
        a1 = a0 * (1.0 + 1e-12);
    }
    let (mut f0, _) = mismatch(a0);
    let (mut f1, _) = mismatch(a1);
    for _ in 0..40 {
        if f1 == f0 || f1 == 0.0 {
            break;
        }
        let a2 = a1 - f1 * (a1 - a0) / (f1 - f0);
        a0 = a1;
        f0 = f1;
        a1 = a2;
        f1 = mismatch(a1).0;
        if (a1 - a0).abs() <= 4.0 * f64::EPSILON * a1 {
            break;
        }
    }
    let u0 = if f1.abs() <= f0.abs() { a1 } else { a0 };
    let (residual, amp) = mismatch(u0);

    // Assemble node values.
    let mut u = vec![0.0; m];
    let mut du = vec![0.0; m];
    u[0] = u0;
    for (i, st) in (1..=im).zip(outward_states(u0)) {
        (u[i], du[i]) = st;
    }
    for (i, st) in (im + 1..m).rev().zip(inward_states(amp)) {
        (u[i], du[i]) = st;
    }
    let d2: Vec<f64> = (0..m)
        .map(|i| {
            if i == 0 {
                ode.nonlinearity(u0) / n as f64
            } else {
                ode.accel(nodes[i], u[i], du[i])
            }
        })
        .collect();
    let profile = RadialFunction::from_hermite(grid, u, du, d2);
    let (from_u, _) = fit_decay(n, &profile);
    let profile = profile.with_tail(Tail {
        amp: from_u,
        power: -(n as f64 - 1.0) / 2.0,
        rate: 1.0,
    });
    let mut gs = GroundState {
        n,
        p,
        profile,
        u0,
        decay_c: from_u,
        i1: 0.0,
        i2: 0.0,
        ip: 0.0,
        bracket: (lo, hi),
        match_mismatch: residual.abs(),
        r_match: r_m,
    };
    gs.refresh_integrals();
    Ok(gs)
}

fn truncation_radius(n: usize, c: f64, a: f64, cfg: &SolverConfig) -> f64 {
    let half = (n as f64 - 1.0) / 2.0;
    let mut r: f64 = 10.0;
    for _ in 0..50 {
        r = (c / (cfg.tail_ratio * a)).ln() - half * r.ln();
    }
    ((r * 2.0).ceil() / 2.0).clamp(10.0, cfg.r_cap)
}

/// Initial data for the inward integration: the decaying solution of the
/// linearized equation, r^{-(n-1)/2} e^{-r} (1 + μ/r), μ = ((n−2)² − 1)/8.
struct TailStart {
    half: f64,
    mu: f64,
    r_start: f64,
}

impl TailStart {
    fn new(n: usize, r_start: f64) -> Self {
        let nf = n as f64;
        Self {
            half: (nf - 1.0) / 2.0,
            mu: ((nf - 2.0).powi(2) - 1.0) / 8.0,
            r_start,
        }
    }

    fn initial(&self, amp: f64) -> (f64, f64) {
        let r = self.r_start;
        let corr = 1.0 + self.mu / r;
        let u = amp * r.powf(-self.half) * (-r).exp() * corr;
        let ratio = -1.0 - self.half / r - (self.mu / (r * r)) / corr;
        (u, u * ratio)
    }
}

/// Least-squares fit of c (1 + a/r + b/r²) to U r^{(n−1)/2} e^r and to
/// −U' r^{(n−1)/2} e^r over the last ten units of the grid.
fn fit_decay(n: usize, profile: &RadialFunction) -> (f64, f64) {
    let half = (n as f64 - 1.0) / 2.0;
    let r_max = profile.r_max();
    let r_lo = if r_max > 20.0 { r_max - 10.0 } else { 0.5 * r_max };
    let nodes = profile.grid().nodes();
    let pts: Vec<(f64, f64, f64)> = nodes
        .iter()
        .enumerate()
        .filter(|(_, &r)| r >= r_lo && r > 0.0)
        .map(|(i, &r)| {
            let s = r.powf(half) * r.exp();
            (r, profile.values()[i] * s, -profile.d1()[i] * s)
        })
        .collect();
    let fit = |ys: Vec<(f64, f64)>| -> f64 {
        let a = nalgebra::DMatrix::from_fn(ys.len(), 3, |i, j| ys[i].0.powi(-(j as i32)));
        let b = nalgebra::DVector::from_iterator(ys.len(), ys.iter().map(|y| y.1));
        let sol = a.svd(true, true).solve(&b, 1e-14).expect("svd solve");
        sol[0]
    };
    (
        fit(pts.iter().map(|&(r, g, _)| (r, g)).collect()),
        fit(pts.iter().map(|&(r, _, h)| (r, h)).collect()),
    )
}

impl GroundState {
    pub fn omega(&self) -> f64 {
        sphere_area(self.n)
    }

    /// (U, U', U'') at r; beyond r_max the asymptotic tail decay_c r^{-(n-1)/2} e^{-r}.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        self.profile.eval(r)
    }

    pub fn r_max(&self) -> f64 {
        self.profile.r_max()
    }

    /// ∫_{R^n} f(r) dz for a radial integrand given at radius r (grid part only).
    pub fn radial_integral<F: FnMut(f64, (f64, f64, f64)) -> f64>(&self, mut f: F) -> f64 {
        let gl = GaussLegendre::new(6);
        let nm1 = self.n as i32 - 1;
        self.omega()
            * self
                .profile
                .grid()
                .integrate(&gl, |i, r| f(r, self.profile.eval_cell(i, r)) * r.powi(nm1))
    }

    pub(crate) fn refresh_integrals(&mut self) {
        let p = self.p;
        self.i1 = self.radial_integral(|_, (_, du, _)| du * du);
        self.i2 = self.radial_integral(|_, (u, _, _)| u * u);
        self.ip = self.radial_integral(|_, (u, _, _)| u.max(0.0).powf(p));
    }

    /// Fitted asymptotic constant from U and from U'; errors when the two
    /// disagree by more than 1 %.
    pub fn decay_constant(&self) -> Result<f64> {
        let (from_u, from_du) = fit_decay(self.n, &self.profile);
        if !(from_u > 0.0) || ((from_u / from_du) - 1.0).abs() >= 0.01 {
            return Err(Error::TailTooShort {
                from_u,
                from_du,
                r_max: self.r_max(),
            });
        }
        Ok(from_u)
    }

    /// Energy functional value α = ½∫|∇U|² + ½∫U² − (1/p)∫U^p.
    pub fn alpha(&self) -> f64 {
        0.5 * self.i1 + 0.5 * self.i2 - self.ip / self.p
    }

    pub fn identity_report(&self) -> IdentityReport {
        let (n, p) = (self.n as f64, self.p);
        let alpha = self.alpha();
        IdentityReport {
            e_energy: (self.i1 + self.i2 - self.ip).abs() / self.ip,
            e_pohozaev: ((n - 2.0) / 2.0 * self.i1 + n / 2.0 * self.i2 - n / p * self.ip).abs() / self.ip,
            e_alpha: (alpha - (0.5 - 1.0 / p) * self.ip).abs() / alpha.abs(),
        }
    }

    /// Largest |U'' + (n−1)U'/r − U + U^{p−1}| of the interpolant, sampled at
    /// every node (r > 0) and at every cell midpoint.
    pub fn ode_residual(&self) -> (f64, f64) {
        let nm1 = self.n as f64 - 1.0;
        let res = |r: f64, (u, du, ddu): (f64, f64, f64)| -> f64 {
            (ddu + nm1 * du / r - u + u.max(0.0).powf(self.p - 1.0)).abs()
        };
        let nodes = self.profile.grid().nodes();
        let mut at_nodes: f64 = 0.0;
        let mut at_mid: f64 = 0.0;
        for i in 1..nodes.len() {
            at_nodes = at_nodes.max(res(nodes[i], self.profile.eval_cell(i - 1, nodes[i])));
            let mid = 0.5 * (nodes[i - 1] + nodes[i]);
            if i > 1 {
                at_mid = at_mid.max(res(mid, self.profile.eval_cell(i - 1, mid)));
            }
        }
        (at_nodes, at_mid)
    }

    /// Copy of this state truncated at `r_cut` (integrals recomputed).
    pub fn truncated(&self, r_cut: f64) -> GroundState {
        let grid = self.profile.grid().truncated(r_cut);
        let k = grid.len();
        let profile = RadialFunction::from_hermite(
            grid,
            self.profile.values()[..k].to_vec(),
            self.profile.d1()[..k].to_vec(),
            self.profile.d2()[..k].to_vec(),
        )
        .with_tail(self.profile.tail().expect("ground state carries a tail"));
        let mut gs = GroundState {
            profile,
            ..self.clone()
        };
        gs.refresh_integrals();
        gs
    }

    /// Copy with every node value (and derivative) scaled by `factor`; used
    /// as a broken input for negative controls.
    pub fn scaled(&self, factor: f64) -> GroundState {
        let profile = RadialFunction::from_hermite(
            self.profile.grid().clone(),
            self.profile.values().iter().map(|v| v * factor).collect(),
            self.profile.d1().iter().map(|v| v * factor).collect(),
            self.profile.d2().iter().map(|v| v * factor).collect(),
        );
        let profile = match self.profile.tail() {
            Some(t) => profile.with_tail(Tail { amp: t.amp * factor, ..t }),
            None => profile,
        };
        let mut gs = GroundState {
            profile,
            u0: self.u0 * factor,
            ..self.clone()
        };
        gs.refresh_integrals();
        gs
    }

    /// Ground state shot from a deliberately wrong central value: the outward
    /// trajectory from `u0` is tabulated on this state's grid until it crosses
    /// zero or grows past 10·u0, and zero afterwards. Too large a u0 keeps the
    /// energy identity (U vanishes where the profile is cut) but breaks
    /// Pohozaev; too small a u0 breaks both.
    pub fn off_bracket(&self, u0: f64) -> GroundState {
        let ode = Ode { n: self.n as f64, p: self.p };
        let nodes = self.profile.grid().nodes();
        let m = nodes.len();
        let (mut u, mut du, mut d2) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        u[0] = u0;
        d2[0] = ode.nonlinearity(u0) / self.n as f64;
        let r0 = SERIES_RADIUS.min(nodes[1]);
        let mut state = ode.series(u0, r0);
        let mut rc = r0;
        for i in 1..m {
            state = ode.advance(rc, state, nodes[i], 1e-3);
            rc = nodes[i];
            if !(state.0 > 0.0 && state.0 < 10.0 * u0.abs()) {
                break;
            }
            u[i] = state.0;
            du[i] = state.1;
            d2[i] = ode.accel(nodes[i], state.0, state.1);
        }
        let profile = RadialFunction::from_hermite(self.profile.grid().clone(), u, du, d2);
        let mut gs = GroundState {
            profile,
            u0,
            ..self.clone()
        };
        gs.refresh_integrals();
        gs
    }
}

/// Serialized form of a ground state for caching.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateRecord {
    pub n: usize,
    pub p: f64,
    pub u0: f64,
    pub decay_c: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
    pub second_derivative: Vec<f64>,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    #[serde(rename = "Ip")]
    pub ip: f64,
    pub bracket: (f64, f64),
    pub match_mismatch: f64,
    pub r_match: f64,
}

impl From<&GroundState> for GroundStateRecord {
    fn from(gs: &GroundState) -> Self {
        Self {
            n: gs.n,
            p: gs.p,
            u0: gs.u0,
            decay_c: gs.decay_c,
            grid: gs.profile.grid().nodes().to_vec(),
            values: gs.profile.values().to_vec(),
            derivative: gs.profile.d1().to_vec(),
            second_derivative: gs.profile.d2().to_vec(),
            i1: gs.i1,
            i2: gs.i2,
            ip: gs.ip,
            bracket: gs.bracket,
            match_mismatch: gs.match_mismatch,
            r_match: gs.r_match,
        }
    }
}

impl From<GroundStateRecord> for GroundState {
    fn from(rec: GroundStateRecord) -> Self {
        let grid = RadialGrid::from_nodes(rec.grid);
        let profile = RadialFunction::from_hermite(grid, rec.values, rec.derivative, rec.second_derivative)
            .with_tail(Tail {
                amp: rec.decay_c,
                power: -(rec.n as f64 - 1.0) / 2.0,
                rate: 1.0,
            });
        GroundState {
            n: rec.n,
            p: rec.p,
            profile,
            u0: rec.u0,
            decay_c: rec.decay_c,
            i1: rec.i1,
            i2: rec.i2,
            ip: rec.ip,
            bracket: rec.bracket,
            match_mismatch: rec.match_mismatch,
            r_match: rec.r_match,
        }
    }
}
