//! Approximate multipeak solutions and their energy on model manifolds.
//!
//! A single peak on a rotationally symmetric model is radial in geodesic
//! distance, so in the stretched variable ρ = t/ε every quantity reduces to
//! a one-dimensional integral with the measure ω (R sin(ερ/R)/ε)^{n−1} dρ.
//! The ρ-quadrature is fixed (it does not move with ε), so discretisation
//! errors are ε-independent and drop out of expansion fits.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{exponential_moment, DimensionalConstants};
use crate::correction::CorrectionProfiles;
use crate::error::{Error, Result};
use crate::geometry::{phi, CurvaturePoint, ManifoldModel};
use crate::groundstate::GroundState;
use crate::quadrature::{sphere_area, GaussLegendre};

/// Minimum quadrature nodes per unit of ρ (i.e. per ε of geodesic distance).
pub const MIN_NODES_PER_EPS: usize = 8;

/// C² cutoff: 1 on [0, R/2], 0 beyond R, quintic smoothstep in between.
pub fn cutoff(r: f64, cutoff_r: f64) -> f64 {
    cutoff_derivatives(r, cutoff_r).0
}

/// (χ, χ', χ'') of the cutoff at r.
pub fn cutoff_derivatives(r: f64, cutoff_r: f64) -> (f64, f64, f64) {
    let half = 0.5 * cutoff_r;
    if r <= half {
        return (1.0, 0.0, 0.0);
    }
    if r >= cutoff_r {
        return (0.0, 0.0, 0.0);
    }
    let x = (r - half) / half;
    let s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
    let ds = 30.0 * x * x * (1.0 - x) * (1.0 - x);
    let dds = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    (1.0 - s, -ds / half, -dds / (half * half))
}

/// Which second-order correction a peak carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Corrector {
    /// No correction: the peak is W.
    None,
    /// V₁ = (1/3) R_kl ψ z_k z_l as written, plus V₂.
    Literal,
    /// The bounded solution of L₀V = −(1/3)Ric(z,z)U'/|z| − 𝐜 s U, which cancels
    /// the ε² residual: V₁ = −(1/3)(ψ R̊(z,z) + (tr Ric/n) ω), plus V₂.
    Exact,
}

impl std::str::FromStr for Corrector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Corrector::None),
            "literal" => Ok(Corrector::Literal),
            "exact" => Ok(Corrector::Exact),
            _ => Err(Error::InvalidInput(format!("unknown corrector '{s}' (none, literal, exact)"))),
        }
    }
}

/// Correction field V(z) in normal coordinates about a peak with Ricci
/// matrix `ric` (in an orthonormal frame) and scalar curvature `s`.
pub fn correction_at(
    cp: &CorrectionProfiles,
    corrector: Corrector,
    ric: &[Vec<f64>],
    s: f64,
    c_bold: f64,
    z: &[f64],
) -> f64 {
    let n = z.len();
    let r = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    let quad = |m: &[Vec<f64>]| -> f64 {
        let mut q = 0.0;
        for k in 0..n {
            for l in 0..n {
                q += m[k][l] * z[k] * z[l];
            }
        }
        q
    };
    let v2 = c_bold * s * cp.v2base.value(r);
    let v1 = match corrector {
        Corrector::None => return 0.0,
        Corrector::Literal => quad(ric) * cp.psi.value(r) / 3.0,
        Corrector::Exact => {
            let tr = (0..n).map(|k| ric[k][k]).sum::<f64>() / n as f64;
            let free: Vec<Vec<f64>> = (0..n)
                .map(|k| (0..n).map(|l| ric[k][l] - if k == l { tr } else { 0.0 }).collect())
                .collect();
            -(quad(&free) * cp.psi.value(r) + tr * cp.trace.value(r)) / 3.0
        }
    };
    v1 + v2
}

/// A radial function of ρ returning (f, f_ρ, f_ρρ).
pub trait RadialField: Sync {
    fn eval(&self, rho: f64) -> (f64, f64, f64);
}

/// One peak χ(ερ)(U(ρ) + ε² V(ρ)) about a point of an Einstein model (where
/// V is radial).
#[derive(Debug, Clone)]
pub struct Peak<'a> {
    gs: &'a GroundState,
    cp: Option<&'a CorrectionProfiles>,
    pub corrector: Corrector,
    pub epsilon: f64,
    pub cutoff_r: f64,
    /// Ricci eigenvalue s/n (the model is Einstein at the peak).
    ric_eigen: f64,
    s: f64,
    c_bold: f64,
}

impl RadialField for Peak<'_> {
    fn eval(&self, rho: f64) -> (f64, f64, f64) {
        let eps = self.epsilon;
        let (c, dc, ddc) = cutoff_derivatives(eps * rho, self.cutoff_r);
        if c == 0.0 && dc == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let (c, dc, ddc) = (c, eps * dc, eps * eps * ddc);
        let (mut f, mut f1, mut f2) = self.gs.eval(rho);
        if let (Some(cp), true) = (self.cp, self.corrector != Corrector::None) {
            let e2 = eps * eps;
            let (w, w1, w2) = cp.v2base.eval(rho);
            let k2 = self.c_bold * self.s;
            let (mut v, mut v1, mut v2) = (k2 * w, k2 * w1, k2 * w2);
            match self.corrector {
                Corrector::Literal => {
                    let a = self.ric_eigen / 3.0;
                    let (p, p1, p2) = cp.psi.eval(rho);
                    let r2 = rho * rho;
                    v += a * p * r2;
                    v1 += a * (p1 * r2 + 2.0 * p * rho);
                    v2 += a * (p2 * r2 + 4.0 * p1 * rho + 2.0 * p);
                }
                Corrector::Exact => {
                    let a = -self.ric_eigen / 3.0;
                    let (o, o1, o2) = cp.trace.eval(rho);
                    v += a * o;
                    v1 += a * o1;
                    v2 += a * o2;
                }
                Corrector::None => {}
            }
            f += e2 * v;
            f1 += e2 * v1;
            f2 += e2 * v2;
        }
        (c * f, dc * f + c * f1, ddc * f + 2.0 * dc * f1 + c * f2)
    }
}

impl Peak<'_> {
    /// Value at geodesic distance d from the center.
    pub fn at_distance(&self, d: f64) -> f64 {
        self.eval(d / self.epsilon).0
    }
}

fn check_model(model: &ManifoldModel, gs: &GroundState) -> Result<()> {
    match model {
        ManifoldModel::Flat { .. } | ManifoldModel::RoundSphere { .. } => {}
        _ => {
            return Err(Error::InvalidInput(
                "peak energies are implemented on flat and round-sphere models".into(),
            ))
        }
    }
    if model.dim() != gs.n {
        return Err(Error::InvalidInput(format!(
            "ground state is for n = {}, model has dimension {}",
            gs.n,
            model.dim()
        )));
    }
    Ok(())
}

fn check_cutoff(model: &ManifoldModel, cutoff_r: f64) -> Result<()> {
    let inj = model.injectivity_radius();
    if !(cutoff_r > 0.0) || cutoff_r >= inj {
        return Err(Error::InjectivityViolation {
            cutoff_r,
            injectivity: inj,
        });
    }
    Ok(())
}

/// W = U(d/ε)χ(d) about the point t on the model's meridian.
pub fn build_w<'a>(gs: &'a GroundState, epsilon: f64, cutoff_r: f64, model: &ManifoldModel) -> Result<Peak<'a>> {
    check_model(model, gs)?;
    check_cutoff(model, cutoff_r)?;
    Ok(Peak {
        gs,
        cp: None,
        corrector: Corrector::None,
        epsilon,
        cutoff_r,
        ric_eigen: 0.0,
        s: 0.0,
        c_bold: 0.0,
    })
}

/// Y = W + ε²V about the point t (V from the model's curvature at t).
pub fn build_y<'a>(
    gs: &'a GroundState,
    cp: &'a CorrectionProfiles,
    dc: &DimensionalConstants,
    epsilon: f64,
    cutoff_r: f64,
    model: &ManifoldModel,
    t: f64,
    corrector: Corrector,
) -> Result<Peak<'a>> {
    check_model(model, gs)?;
    check_cutoff(model, cutoff_r)?;
    check_constants(gs, dc)?;
    let curv = model.curvature_at(t)?;
    Ok(Peak {
        gs,
        cp: Some(cp),
        corrector,
        epsilon,
        cutoff_r,
        ric_eigen: curv.s / gs.n as f64,
        s: curv.s,
        c_bold: dc.c_bold,
    })
}

fn check_constants(gs: &GroundState, dc: &DimensionalConstants) -> Result<()> {
    if dc.n != gs.n {
        return Err(Error::InvalidInput(format!("constants are for n = {}, ground state for n = {}", dc.n, gs.n)));
    }
    if (dc.p - gs.p).abs() > 1e-12 {
        return Err(Error::ExponentMismatch { p_gs: gs.p, p_nm: dc.p });
    }
    Ok(())
}

/// Fixed Gauss–Legendre rule in ρ.
#[derive(Debug, Clone)]
pub struct RhoQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    per_eps: usize,
}

impl RhoQuadrature {
    pub fn from_breaks(breaks: &[f64], order: usize) -> Self {
        let gl = GaussLegendre::new(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut widest: f64 = 0.0;
        for ab in breaks.windows(2) {
            widest = widest.max(ab[1] - ab[0]);
            for (x, w) in gl.mapped(ab[0], ab[1]) {
                nodes.push(x);
                weights.push(w);
            }
        }
        Self {
            nodes,
            weights,
            per_eps: (order as f64 / widest).floor() as usize,
        }
    }

    /// Six-point rule on every cell of the ground-state grid.
    pub fn from_ground_state(gs: &GroundState) -> Self {
        Self::from_breaks(gs.profile.grid().nodes(), 6)
    }

    pub fn uniform(rho_max: f64, panels: usize, order: usize) -> Self {
        let breaks: Vec<f64> = (0..=panels).map(|i| rho_max * i as f64 / panels as f64).collect();
        Self::from_breaks(&breaks, order)
    }

    pub fn nodes_per_eps(&self) -> usize {
        self.per_eps
    }

    fn check(&self) -> Result<()> {
        if self.per_eps < MIN_NODES_PER_EPS {
            return Err(Error::ResolutionTooCoarse { per_eps: self.per_eps });
        }
        Ok(())
    }
}

/// Radial geometry of geodesic balls in stretched variables.
#[derive(Debug, Clone, Copy)]
struct Stretch {
    n: usize,
    eps: f64,
    /// None for flat space
    radius: Option<f64>,
    omega: f64,
}

impl Stretch {
    fn new(model: &ManifoldModel, eps: f64) -> Result<Self> {
        let radius = match model {
            ManifoldModel::Flat { .. } => None,
            ManifoldModel::RoundSphere { radius, .. } => Some(*radius),
            _ => return Err(Error::InvalidInput("peak energies need a flat or round-sphere model".into())),
        };
        let n = model.dim();
        Ok(Self {
            n,
            eps,
            radius,
            omega: sphere_area(n),
        })
    }

    /// ω (R sin(ερ/R)/ε)^{n−1}, or None beyond the antipode.
    fn measure(&self, rho: f64) -> Option<f64> {
        let k = self.n as i32 - 1;
        match self.radius {
            Some(r) if self.eps > 0.0 => {
                let a = self.eps * rho / r;
                if a >= std::f64::consts::PI {
                    return None;
                }
                Some(self.omega * (r * a.sin() / self.eps).powi(k))
            }
            _ => Some(self.omega * rho.powi(k)),
        }
    }

    /// ε²Δ_g of a radial function in ρ.
    fn laplacian(&self, rho: f64, f: (f64, f64, f64)) -> f64 {
        let nm1 = self.n as f64 - 1.0;
        if rho == 0.0 {
            return self.n as f64 * f.2;
        }
        let drift = match self.radius {
            Some(r) if self.eps > 0.0 => {
                let a = self.eps * rho / r;
                nm1 * (self.eps / r) * a.cos() / a.sin()
            }
            _ => nm1 / rho,
        };
        f.2 + drift * f.1
    }
}

/// Curvature data entering the functional (𝐜 s_g) at a peak.
fn scalar_curvature(model: &ManifoldModel, t: f64) -> Result<f64> {
    Ok(model.curvature_at(t)?.s)
}

/// J_ε(u) for a radial u about the point t of the model.
pub fn energy_j(
    u: &dyn RadialField,
    eps: f64,
    model: &ManifoldModel,
    t: f64,
    dc: &DimensionalConstants,
    quad: &RhoQuadrature,
) -> Result<f64> {
    quad.check()?;
    let st = Stretch::new(model, eps)?;
    let k = 1.0 + dc.c_bold * scalar_curvature(model, t)? * eps * eps;
    let p = dc.p;
    let mut total = 0.0;
    for (&rho, &w) in quad.nodes.iter().zip(&quad.weights) {
        let Some(m) = st.measure(rho) else { break };
        let (f, f1, _) = u.eval(rho);
        let e = 0.5 * f1 * f1 + 0.5 * k * f * f - f.max(0.0).powf(p) / p;
        total += w * m * e;
    }
    Ok(total)
}

/// ‖u‖_ε with ‖u‖²_ε = ε^{−n}(ε²∫|∇u|² + ∫(1 + ε²𝐜s)u²).
pub fn norm_eps(
    u: &dyn RadialField,
    eps: f64,
    model: &ManifoldModel,
    t: f64,
    dc: &DimensionalConstants,
    quad: &RhoQuadrature,
) -> Result<f64> {
    quad.check()?;
    let st = Stretch::new(model, eps)?;
    let k = 1.0 + dc.c_bold * scalar_curvature(model, t)? * eps * eps;
    let mut total = 0.0;
    for (&rho, &w) in quad.nodes.iter().zip(&quad.weights) {
        let Some(m) = st.measure(rho) else { break };
        let (f, f1, _) = u.eval(rho);
        total += w * m * (f1 * f1 + k * f * f);
    }
    Ok(total.sqrt())
}

/// |r|_{p',ε} of r = −ε²Δ_g u + (1 + 𝐜sε²)u − (u⁺)^{p−1}, p' = p/(p−1).
pub fn residual_norm(
    u: &dyn RadialField,
    eps: f64,
    model: &ManifoldModel,
    t: f64,
    dc: &DimensionalConstants,
    quad: &RhoQuadrature,
) -> Result<f64> {
    quad.check()?;
    let st = Stretch::new(model, eps)?;
    let k = 1.0 + dc.c_bold * scalar_curvature(model, t)? * eps * eps;
    let p = dc.p;
    let q = p / (p - 1.0);
    let mut total = 0.0;
    for (&rho, &w) in quad.nodes.iter().zip(&quad.weights) {
        let Some(m) = st.measure(rho) else { break };
        let f = u.eval(rho);
        let r = -st.laplacian(rho, f) + k * f.0 - f.0.max(0.0).powf(p - 1.0);
        total += w * m * r.abs().powf(q);
    }
    Ok(total.powf(1.0 / q))
}

/// ρ with U(ρ) = y (U is strictly decreasing).
pub fn u_inverse(gs: &GroundState, y: f64) -> Result<f64> {
    if !(y > 0.0 && y < gs.u0) {
        return Err(Error::InvalidInput(format!("U takes values in (0, {}), got {y}", gs.u0)));
    }
    let (mut lo, mut hi) = (0.0, gs.r_max());
    while gs.eval(hi).0 > y {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::InvalidInput(format!("U never drops to {y}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gs.eval(mid).0 > y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Peak configuration on the meridian of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakConfig {
    pub epsilon: f64,
    /// Meridian parameters of the centers.
    pub centers: Vec<f64>,
    pub cutoff_r: f64,
}

impl PeakConfig {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    /// Centers in canonical (sorted) order; results never depend on labels.
    pub fn canonical(&self) -> PeakConfig {
        let mut c = self.centers.clone();
        c.sort_by(|a, b| a.total_cmp(b));
        PeakConfig {
            centers: c,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// max_i d(ξ₀, ξ_i) − ρ (negative when the distance condition holds)
    pub distance_margin: f64,
    /// Σ_{i≠j} U(d_ij/ε)
    pub interaction_sum: f64,
    /// ε⁴ − Σ_{i≠j} U(d_ij/ε)
    pub interaction_margin: f64,
}

/// Membership in the admissible configuration set: every center within ρ
/// of ξ₀ and Σ_{i≠j} U(d_ij/ε) < ε⁴ (both strict).
pub fn admissible(config: &PeakConfig, gs: &GroundState, model: &ManifoldModel, rho: f64, xi0: f64) -> Admissibility {
    let eps = config.epsilon;
    let c = &config.centers;
    let dmax = c.iter().map(|&x| model.distance(xi0, x)).fold(0.0, f64::max);
    let mut sum = 0.0;
    for i in 0..c.len() {
        for j in 0..c.len() {
            if i != j {
                sum += gs.eval(model.distance(c[i], c[j]) / eps).0;
            }
        }
    }
    let bound = eps.powi(4);
    Admissibility {
        admissible: dmax < rho && sum < bound,
        distance_margin: dmax - rho,
        interaction_sum: sum,
        interaction_margin: bound - sum,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "J_measured")]
    pub j_measured: f64,
    pub term_alpha: f64,
    pub term_beta: f64,
    pub term_phi: f64,
    pub term_interaction: f64,
    pub remainder: f64,
    pub admissible: bool,
}

impl EnergyBreakdown {
    fn new(epsilon: f64, k: usize, j: f64, ta: f64, tb: f64, tp: f64, ti: f64, admissible: bool) -> Self {
        Self {
            epsilon,
            k,
            j_measured: j,
            term_alpha: ta,
            term_beta: tb,
            term_phi: tp,
            term_interaction: ti,
            remainder: j - (ta + tb + tp + ti),
            admissible,
        }
    }

    pub fn predicted(&self) -> f64 {
        self.term_alpha + self.term_beta + self.term_phi + self.term_interaction
    }
}

/// Inputs shared by energy computations for one (n, m).
#[derive(Clone, Copy)]
pub struct Pipeline<'a> {
    pub gs: &'a GroundState,
    pub cp: &'a CorrectionProfiles,
    pub dc: &'a DimensionalConstants,
    pub quad: &'a RhoQuadrature,
}

/// Interaction grid resolution: Gauss nodes per unit ρ along each axis.
pub const INTERACTION_NODES_PER_RHO: f64 = 16.0;

/// J(Y₁ + Y₂) − J(Y₁) − J(Y₂) on a round sphere, for two peaks at geodesic
/// distance d, by a tensor Gauss rule in (θ, φ): peak 1 at the pole, peak 2
/// at (θ = d/R, φ = 0), the remaining S^{n−2} integrated exactly.
pub fn interaction_energy(y1: &Peak, y2: &Peak, d: f64, model: &ManifoldModel, dc: &DimensionalConstants) -> Result<f64> {
    let (n, radius) = match model {
        ManifoldModel::RoundSphere { n, radius } => (*n, *radius),
        _ => return Err(Error::InvalidInput("two-peak quadrature is implemented on the round sphere".into())),
    };
    let eps = y1.epsilon;
    let s = model.curvature_at(0.0)?.s;
    let k = 1.0 + dc.c_bold * s * eps * eps;
    let p = dc.p;
    let delta = d / radius;
    let (cd, sd) = (delta.cos(), delta.sin());
    let gl = GaussLegendre::new(8);
    let theta_max = (y1.cutoff_r / radius).min(std::f64::consts::PI);
    let panel_t = (8.0 / INTERACTION_NODES_PER_RHO) * eps / radius;
    let nt = (theta_max / panel_t).ceil() as usize;
    let panel_p = ((8.0 / INTERACTION_NODES_PER_RHO) * eps / (radius * sd.max(1e-3))).min(0.1);
    let np = (std::f64::consts::PI / panel_p).ceil() as usize;
    let phi_nodes: Vec<(f64, f64)> = (0..np)
        .flat_map(|j| {
            let a = std::f64::consts::PI * j as f64 / np as f64;
            let b = std::f64::consts::PI * (j + 1) as f64 / np as f64;
            gl.mapped(a, b).collect::<Vec<_>>()
        })
        .collect();
    let sphere_rest = sphere_area(n - 1);
    let scale = radius.powi(n as i32) / eps.powi(n as i32);
    let panels: Vec<f64> = (0..nt)
        .into_par_iter()
        .map(|i| {
            let a = theta_max * i as f64 / nt as f64;
            let b = theta_max * (i + 1) as f64 / nt as f64;
            let mut acc = 0.0;
            for (th, wt) in gl.mapped(a, b) {
                let (ct, stt) = (th.cos(), th.sin());
                let (f1, g1, _) = y1.eval(radius * th / eps);
                if f1 == 0.0 && g1 == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for &(ph, wp) in &phi_nodes {
                    let c2 = (ct * cd + stt * sd * ph.cos()).clamp(-1.0, 1.0);
                    let th2 = c2.acos();
                    let (f2, g2, _) = y2.eval(radius * th2 / eps);
                    if f2 == 0.0 && g2 == 0.0 {
                        continue;
                    }
                    let s2 = th2.sin();
                    let cosang = if stt * s2 > 0.0 {
                        ((cd - ct * c2) / (stt * s2)).clamp(-1.0, 1.0)
                    } else {
                        0.0
                    };
                    let sum = (f1 + f2).max(0.0).powf(p) - f1.max(0.0).powf(p) - f2.max(0.0).powf(p);
                    let e = g1 * g2 * cosang + k * f1 * f2 - sum / p;
                    row += wp * ph.sin().powi(n as i32 - 2) * e;
                }
                acc += wt * stt.powi(n as i32 - 1) * row;
            }
            acc
        })
        .collect();
    Ok(sphere_rest * scale * panels.iter().sum::<f64>())
}

/// Measured energy of Y for `config` against the predicted expansion
/// Kα + ε²(β/2)Σs + ε⁴ΣΦ − ½Σ_{i≠j}γ U(d_ij/ε).
pub fn expansion_compare(
    config: &PeakConfig,
    model: &ManifoldModel,
    pipe: Pipeline,
    corrector: Corrector,
    rho: f64,
    xi0: f64,
) -> Result<EnergyBreakdown> {
    let cfg = config.canonical();
    let (gs, cp, dc) = (pipe.gs, pipe.cp, pipe.dc);
    let eps = cfg.epsilon;
    let k = cfg.k();
    if !(1..=2).contains(&k) {
        return Err(Error::InvalidInput(format!("K must be 1 or 2, got {k}")));
    }
    let peaks = cfg
        .centers
        .iter()
        .map(|&t| build_y(gs, cp, dc, eps, cfg.cutoff_r, model, t, corrector))
        .collect::<Result<Vec<_>>>()?;
    let mut j = 0.0;
    let (mut sum_s, mut sum_phi) = (0.0, 0.0);
    for (peak, &t) in peaks.iter().zip(&cfg.centers) {
        j += energy_j(peak, eps, model, t, dc, pipe.quad)?;
        let c: CurvaturePoint = model.curvature_at(t)?;
        sum_s += c.s;
        sum_phi += phi(&c, dc);
    }
    let mut term_interaction = 0.0;
    if k == 2 {
        let d = model.distance(cfg.centers[0], cfg.centers[1]);
        if d == 0.0 {
            return Err(Error::InvalidInput("the two centers coincide".into()));
        }
        j += interaction_energy(&peaks[0], &peaks[1], d, model, dc)?;
        // γ_12 = γ_21 by rotational symmetry of U; the connecting geodesic's
        // unit tangent is the direction b
        let gamma = exponential_moment(gs, 1.0);
        term_interaction = -gamma * gs.eval(d / eps).0;
    }
    let adm = admissible(&cfg, gs, model, rho, xi0);
    Ok(EnergyBreakdown::new(
        eps,
        k,
        j,
        k as f64 * dc.alpha,
        eps * eps * 0.5 * dc.beta * sum_s,
        eps.powi(4) * sum_phi,
        term_interaction,
        adm.admissible,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// true when r2 < 0.98
    pub flagged: bool,
}

/// Least-squares line through (ln x, ln |y|).
pub fn loglog_fit(x: &[f64], y: &[f64]) -> SlopeFit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    SlopeFit {
        slope,
        intercept: my - slope * mx,
        r2,
        flagged: r2 < 0.98,
    }
}

/// Coefficients a_0..a_degree of Σ a_k ε^{2k} fitted by least squares.
pub fn even_polynomial_fit(eps: &[f64], values: &[f64], degree: usize) -> Vec<f64> {
    let rows = eps.len();
    let a = DMatrix::from_fn(rows, degree + 1, |i, k| eps[i].powi(2 * k as i32));
    let b = DVector::from_column_slice(values);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-14).expect("SVD solve with both factors").iter().copied().collect()
}

/// J(Y) over an ε ladder together with its ε → 0 limit on the same
/// quadrature, and the fitted ε², ε⁴ coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub epsilons: Vec<f64>,
    pub energies: Vec<f64>,
    /// ε → 0 limit of the discrete J (equals α up to quadrature error).
    pub j0: f64,
    /// fitted coefficients of ε², ε⁴, … in J − j0
    pub coefficients: Vec<f64>,
    pub predicted_eps2: f64,
    pub predicted_eps4: f64,
}

/// Energy of one peak at t on a round sphere across `epsilons`.
pub fn fit_single_peak_expansion(
    model: &ManifoldModel,
    t: f64,
    pipe: Pipeline,
    corrector: Corrector,
    epsilons: &[f64],
    cutoff_r: f64,
    degree: usize,
) -> Result<ExpansionFit> {
    let (gs, cp, dc) = (pipe.gs, pipe.cp, pipe.dc);
    let energies = epsilons
        .par_iter()
        .map(|&e| {
            let y = build_y(gs, cp, dc, e, cutoff_r, model, t, corrector)?;
            energy_j(&y, e, model, t, dc, pipe.quad)
        })
        .collect::<Result<Vec<f64>>>()?;
    // ε = 0 on the same nodes: the flat functional of U
    let w = build_w(gs, 1.0, cutoff_r, model)?;
    let flat = Peak {
        cutoff_r: f64::INFINITY,
        epsilon: 0.0,
        ..w
    };
    let j0 = energy_j(&flat, 0.0, model, t, dc, pipe.quad)?;
    let scaled: Vec<f64> = energies.iter().zip(epsilons).map(|(j, e)| (j - j0) / (e * e)).collect();
    let coefficients = even_polynomial_fit(epsilons, &scaled, degree);
    let c = model.curvature_at(t)?;
    Ok(ExpansionFit {
        epsilons: epsilons.to_vec(),
        energies,
        j0,
        coefficients,
        predicted_eps2: 0.5 * dc.beta * c.s,
        predicted_eps4: phi(&c, dc),
    })
}
