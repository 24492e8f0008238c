//! Dimensional constants α, β, c1…c9 and the interaction constant γ.
//!
//! Every constant is an integral over R^n of a radial profile times a
//! monomial in z; these reduce to one-dimensional radial integrals through
//! ∫ f(|z|) z^a dz = (∫₀^∞ f r^{|a|+n−1} dr) · ∫_{S^{n−1}} θ^a dσ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::correction::CorrectionProfiles;
use crate::error::{Error, Result};
use crate::groundstate::{product_exponent, solve_ground_state_with, GroundState, SolverConfig};
use crate::quadrature::{adaptive, sphere_area, sphere_monomial, GaussLegendre};
use crate::radial::{RadialFunction, Tail};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MomentWeight {
    One,
    /// z₁²
    Z1Sq,
    /// z₁⁴
    Z1Fourth,
    /// z^a for a multi-index of length n.
    Monomial(Vec<u32>),
}

impl MomentWeight {
    fn exponents(&self, n: usize) -> Vec<u32> {
        let mut a = vec![0u32; n];
        match self {
            MomentWeight::One => {}
            MomentWeight::Z1Sq => a[0] = 2,
            MomentWeight::Z1Fourth => a[0] = 4,
            MomentWeight::Monomial(m) => {
                assert_eq!(m.len(), n, "multi-index length must equal n");
                a.copy_from_slice(m);
            }
        }
        a
    }
}

/// ∫_{R^n} f(|z|) w(z) dz. The grid part uses Gauss–Legendre per cell; a
/// profile tail amp r^q e^{-λr} contributes amp λ^{-(s+1)} Γ(s+1, λ r_max)
/// with s = q + degree + n − 1.
pub fn moment_reduce(profile: &RadialFunction, n: usize, weight: &MomentWeight) -> f64 {
    let a = weight.exponents(n);
    let angular = sphere_monomial(&a);
    if angular == 0.0 {
        return 0.0;
    }
    let power = a.iter().sum::<u32>() as i32 + n as i32 - 1;
    let gl = GaussLegendre::new(6);
    let core = profile
        .grid()
        .integrate(&gl, |i, r| profile.eval_cell(i, r).0 * r.powi(power));
    let tail = profile
        .tail()
        .map(|t| tail_moment(&t, power as f64, profile.r_max()))
        .unwrap_or(0.0);
    angular * (core + tail)
}

/// ∫_{r0}^∞ amp r^{q+k} e^{-λ r} dr via the upper incomplete gamma function.
pub fn tail_moment(tail: &Tail, k: f64, r0: f64) -> f64 {
    let s = tail.power + k;
    let lam = tail.rate;
    tail.amp * lam.powf(-(s + 1.0)) * gamma_ur(s + 1.0, lam * r0) * gamma(s + 1.0)
}

/// Audit ledger of the integrals behind the constants (all over R^n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawIntegrals {
    pub i1: f64,
    pub i2: f64,
    pub ip: f64,
    /// ∫U² z₁²
    pub m2: f64,
    /// ∫(U'/r)² z₁⁴
    pub m4: f64,
    /// ∫|∇U|² |z|²
    pub grad_r2: f64,
    /// ∫ψ (U'/r) z₁⁴
    pub psi_du_z4: f64,
    /// ∫U ψ z₁²
    pub u_psi_z2: f64,
    /// ∫(½U'² − U U'/((2−p)r)) z₁²
    pub c5_integral: f64,
    /// ∫U (½U'r − U/(2−p))
    pub u_v2base: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionalConstants {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub p: f64,
    pub c_bold: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
    pub raw: RawIntegrals,
}

/// 𝐜 = (N−2)/(4(N−1)).
pub fn c_bold(big_n: usize) -> f64 {
    (big_n as f64 - 2.0) / (4.0 * (big_n as f64 - 1.0))
}

/// ∫_0^π cos^k θ sin^{d}θ dθ by Gauss–Legendre in θ.
fn polar_factor(k: i32, d: i32) -> f64 {
    GaussLegendre::new(40).integrate(0.0, std::f64::consts::PI, |t| t.cos().powi(k) * t.sin().powi(d))
}

pub fn compute_constants(gs: &GroundState, cp: &CorrectionProfiles, m: usize) -> Result<DimensionalConstants> {
    let n = gs.n;
    let big_n = n + m;
    let p = product_exponent(n, m);
    if (gs.p - p).abs() > 1e-12 {
        return Err(Error::ExponentMismatch { p_gs: gs.p, p_nm: p });
    }
    let nf = n as f64;
    let cb = c_bold(big_n);
    let k = 1.0 / (2.0 - p);
    let omega = gs.omega();
    let gl = GaussLegendre::new(6);
    let grid = gs.profile.grid();
    // ∫₀^{r_max} g(r) r^{n−1+extra} dr over the ground-state grid
    let radial = |extra: i32, g: &dyn Fn(usize, f64) -> f64| -> f64 {
        grid.integrate(&gl, |i, r| g(i, r) * r.powi(n as i32 - 1 + extra))
    };
    let u = |i: usize, r: f64| gs.profile.eval_cell(i, r);
    let du_over_r = |i: usize, r: f64| {
        let (_, du, ddu) = u(i, r);
        if r == 0.0 {
            ddu
        } else {
            du / r
        }
    };
    let psi = |i: usize, r: f64| cp.psi.eval_cell(i, r).0;
    let v2 = |i: usize, r: f64| cp.v2base.eval_cell(i, r).0;

    let z1sq = sphere_monomial(&MomentWeight::Z1Sq.exponents(n));
    let z1four = sphere_monomial(&MomentWeight::Z1Fourth.exponents(n));

    let grad_r2 = omega * radial(2, &|i, r| u(i, r).1.powi(2));
    let m2 = z1sq * radial(2, &|i, r| u(i, r).0.powi(2));
    // ∫(U'/r)² z₁⁴ through an explicit (r, θ) product rule rather than the
    // closed-form spherical moment, so that β = 𝐜 I2 − 2c1 is a real check.
    let m4 = sphere_area(n - 1) * polar_factor(4, n as i32 - 2) * radial(4, &|i, r| du_over_r(i, r).powi(2));
    let psi_du_z4 = z1four * radial(4, &|i, r| psi(i, r) * du_over_r(i, r));
    let u_psi_z2 = z1sq * radial(2, &|i, r| u(i, r).0 * psi(i, r));
    let c5_integral = z1sq
        * radial(2, &|i, r| {
            let (uu, du, _) = u(i, r);
            0.5 * du * du - k * uu * du_over_r(i, r)
        });
    let u_v2base = omega * radial(0, &|i, r| u(i, r).0 * v2(i, r));

    let c1 = m4 / 6.0;
    let c2 = m2;
    let c3 = psi_du_z4 / 54.0;
    let c4 = -cb / 6.0 * u_psi_z2;
    let c5 = cb / 6.0 * c5_integral;
    let c6 = 8.0 * c1 - 120.0 * (nf + 2.0) * c3;
    let c7 = -c3 - c4 - c5 - c2 * cb / 12.0 + c1 / (24.0 * (nf + 2.0));
    let c8 = 18.0 * c1 + 30.0 * cb * c2 * (nf + 2.0);
    let c9 = 0.5 * cb * u_v2base;
    let beta = cb * gs.i2 - grad_r2 / (nf * (nf + 2.0));

    Ok(DimensionalConstants {
        n,
        m,
        big_n,
        p,
        c_bold: cb,
        alpha: gs.alpha(),
        beta,
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
        c7,
        c8,
        c9,
        raw: RawIntegrals {
            i1: gs.i1,
            i2: gs.i2,
            ip: gs.ip,
            m2,
            m4,
            grad_r2,
            psi_du_z4,
            u_psi_z2,
            c5_integral,
            u_v2base,
        },
    })
}

impl DimensionalConstants {
    /// 𝐜·I2 − 2c1, the moment-identity form of β.
    pub fn beta_from_c1(&self) -> f64 {
        self.c_bold * self.raw.i2 - 2.0 * self.c1
    }

    pub fn csv_row(&self) -> String {
        let v = [
            self.p, self.alpha, self.beta, self.c1, self.c2, self.c3, self.c4, self.c5, self.c6, self.c7,
            self.c8, self.c9,
        ];
        let mut s = format!("{},{},{}", self.n, self.m, self.big_n);
        for x in v {
            s.push(',');
            s.push_str(&format!("{x:e}"));
        }
        s
    }
}

pub const CSV_HEADER: &str = "n,m,N,p,alpha,beta,c1,c2,c3,c4,c5,c6,c7,c8,c9";

/// One row of the β table (the JSON object form).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
}

impl From<&DimensionalConstants> for TableRow {
    fn from(d: &DimensionalConstants) -> Self {
        Self {
            n: d.n,
            m: d.m,
            big_n: d.big_n,
            p: d.p,
            alpha: d.alpha,
            beta: d.beta,
            c1: d.c1,
            c2: d.c2,
            c3: d.c3,
            c4: d.c4,
            c5: d.c5,
            c6: d.c6,
            c7: d.c7,
            c8: d.c8,
            c9: d.c9,
        }
    }
}

/// Ground state, correction profiles and constants for one (n, m).
pub fn constants_for(n: usize, m: usize, cfg: &SolverConfig) -> Result<(GroundState, CorrectionProfiles, DimensionalConstants)> {
    if n <= 2 || m <= 2 {
        return Err(Error::InvalidInput(format!("need n, m > 2, got ({n}, {m})")));
    }
    let gs = solve_ground_state_with(n, product_exponent(n, m), cfg)?;
    let cp = CorrectionProfiles::build(&gs)?;
    let dc = compute_constants(&gs, &cp, m)?;
    Ok((gs, cp, dc))
}

/// Rows are computed in parallel and returned in input order.
pub fn beta_table(pairs: &[(usize, usize)], cfg: &SolverConfig) -> Result<Vec<DimensionalConstants>> {
    pairs
        .par_iter()
        .map(|&(n, m)| constants_for(n, m, cfg).map(|(_, _, dc)| dc))
        .collect()
}

/// All (n, m) with n, m ≥ 3 and n + m ≤ max_big_n, ordered by n then m.
pub fn table_pairs(max_big_n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 3..max_big_n {
        for m in 3..max_big_n {
            if n + m <= max_big_n {
                out.push((n, m));
            }
        }
    }
    out
}

pub fn table_csv(rows: &[DimensionalConstants]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaValue {
    pub b: Vec<f64>,
    pub value: f64,
}

/// γ = ∫ U^{p−1}(z) e^{⟨b,z⟩} dz for a unit vector b.
pub fn gamma_interaction(gs: &GroundState, b: &[f64]) -> Result<GammaValue> {
    if b.len() != gs.n {
        return Err(Error::InvalidInput(format!("direction has {} components, expected {}", b.len(), gs.n)));
    }
    let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit { norm });
    }
    Ok(GammaValue {
        b: b.to_vec(),
        value: exponential_moment(gs, norm),
    })
}

/// ∫ U^{p−1}(z) e^{λ z₁} dz = ω_{n−2} ∫ U^{p−1} r^{n−1} ∫₀^π e^{λ r cosθ} sin^{n−2}θ dθ dr.
/// The angular integral is adaptive; e^{λr} is factored out so the angular
/// integrand e^{λr(cosθ−1)} stays bounded. λ = 0 gives ∫U^{p−1}.
pub fn exponential_moment(gs: &GroundState, lambda: f64) -> f64 {
    let n = gs.n;
    let pm1 = gs.p - 1.0;
    let sin_pow = n as i32 - 2;
    let angular = |r: f64| -> f64 {
        let a = lambda * r;
        adaptive(0.0, std::f64::consts::PI, 1e-10, |t| (a * (t.cos() - 1.0)).exp() * t.sin().powi(sin_pow))
    };
    let radial = |r: f64| -> f64 {
        let u = gs.eval(r).0.max(0.0);
        u.powf(pm1) * (lambda * r).exp() * r.powi(n as i32 - 1)
    };
    let gl = GaussLegendre::new(10);
    let width = 0.5;
    let mut peak: f64 = 0.0;
    let mut total = 0.0;
    let mut a = 0.0;
    loop {
        let b = a + width;
        let mut panel = 0.0;
        let mut panel_max: f64 = 0.0;
        for (r, w) in gl.mapped(a, b) {
            let f = radial(r);
            panel_max = panel_max.max(f);
            if f > 0.0 {
                panel += w * f * angular(r);
            }
        }
        total += panel;
        peak = peak.max(panel_max);
        a = b;
        if (panel_max < 1e-16 * peak && a > 5.0) || a > 400.0 {
            break;
        }
    }
    sphere_area(n - 1) * total
}
