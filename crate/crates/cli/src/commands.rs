use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use yamabe_core::constants::{
    compute_constants, exponential_moment, gamma_interaction, table_csv, table_pairs, DimensionalConstants, GammaValue,
    TableRow,
};
use yamabe_core::correction::{kernel_orthogonality, psi_decay_rate, verify_l0_identities, CorrectionProfiles, L0Identities};
use yamabe_core::geometry::{locate_critical, phi_samples, scan_csv, CriticalPoint, ManifoldModel, PhiSample, WarpProfile};
use yamabe_core::groundstate::{check_exponent, product_exponent, GroundStateRecord};
use yamabe_core::multipeak::{
    build_w, build_y, expansion_compare, fit_single_peak_expansion, loglog_fit, residual_norm, u_inverse, Corrector,
    EnergyBreakdown, ExpansionFit, PeakConfig, Pipeline, RhoQuadrature, SlopeFit,
};
use yamabe_core::{Error, GroundState, IdentityReport, Result, SolverConfig};

use crate::cache;
use crate::config::RunConfig;

/// What a command produced: the document for `--out`/stdout, plus an
/// optional non-fatal warning.
pub struct Output {
    pub text: String,
    pub warning: Option<ErrorObject>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorObject {
    pub error: String,
    pub detail: String,
}

impl From<&Error> for ErrorObject {
    fn from(e: &Error) -> Self {
        Self {
            error: e.code().to_string(),
            detail: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub command: &'static str,
    pub grid: SolverConfig,
    pub seed: u64,
}

struct Ctx {
    cfg: RunConfig,
    solver: SolverConfig,
    cache: Option<std::path::PathBuf>,
}

impl Ctx {
    fn new(cfg: RunConfig) -> Self {
        let cache = if cfg.no_cache {
            None
        } else {
            cfg.cache_dir.clone().or_else(cache::default_dir)
        };
        Self {
            cfg,
            solver: SolverConfig::default(),
            cache,
        }
    }

    fn provenance(&self, command: &'static str) -> Provenance {
        Provenance {
            version: env!("CARGO_PKG_VERSION"),
            command,
            grid: self.solver,
            seed: self.cfg.seed(),
        }
    }

    fn ground_state(&self, n: usize, p: f64) -> Result<GroundState> {
        cache::ground_state(self.cache.as_deref(), n, p, &self.solver)
    }

    /// p from --p, or from --m (default 3); both must agree when given.
    fn exponent(&self) -> Result<f64> {
        let n = self.cfg.n();
        match (self.cfg.p, self.cfg.m) {
            (Some(p), None) => Ok(p),
            (None, m) => {
                let m = m.unwrap_or(3);
                check_dims(n, m)?;
                Ok(product_exponent(n, m))
            }
            (Some(p), Some(m)) => {
                let want = product_exponent(n, m);
                if (p - want).abs() > 1e-12 {
                    return Err(Error::ExponentMismatch { p_gs: p, p_nm: want });
                }
                Ok(want)
            }
        }
    }

    fn constants(&self, n: usize, m: usize) -> Result<(GroundState, CorrectionProfiles, DimensionalConstants)> {
        check_dims(n, m)?;
        let gs = self.ground_state(n, product_exponent(n, m))?;
        let cp = CorrectionProfiles::build(&gs)?;
        let dc = compute_constants(&gs, &cp, m)?;
        Ok((gs, cp, dc))
    }

    fn model(&self) -> Result<ManifoldModel> {
        parse_model(self.cfg.model.as_deref().unwrap_or("round"), self.cfg.n(), self.cfg.profile.as_deref())
    }
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n <= 2 || m <= 2 {
        return Err(Error::InvalidInput(format!("need n, m > 2, got ({n}, {m})")));
    }
    Ok(())
}

pub fn parse_model(spec: &str, n: usize, profile: Option<&Path>) -> Result<ManifoldModel> {
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("model '{spec}': '{s}' is not a number")))
    };
    match (kind, arg) {
        ("round", None) => Ok(ManifoldModel::RoundSphere { n, radius: 1.0 }),
        ("round", Some(r)) => {
            let radius = num(r)?;
            if !(radius > 0.0) {
                return Err(Error::InvalidInput(format!("model '{spec}': radius must be positive")));
            }
            Ok(ManifoldModel::RoundSphere { n, radius })
        }
        ("flat", None) => Ok(ManifoldModel::Flat { n }),
        ("warped", None) => {
            let path = profile.ok_or_else(|| Error::InvalidInput("model 'warped' needs --profile <csv>".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("profile {}: {e}", path.display())))?;
            Ok(ManifoldModel::WarpedSphere {
                n,
                profile: WarpProfile::from_csv(&text)?,
            })
        }
        ("warped", Some(c)) => Ok(ManifoldModel::WarpedSphere {
            n,
            profile: WarpProfile::sine(c.split(',').map(num).collect::<Result<Vec<f64>>>()?),
        }),
        _ => Err(Error::InvalidInput(format!(
            "unknown model '{spec}' (round[:R], warped, warped:c2,c3,..., flat)"
        ))),
    }
}

fn json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("reports serialize");
    s.push('\n');
    s
}

fn done(text: String) -> Result<Output> {
    Ok(Output { text, warning: None })
}

/// CSV with the provenance as a leading `#` comment line.
fn csv_with_provenance(prov: &Provenance, body: &str) -> String {
    format!("# provenance {}\n{body}", serde_json::to_string(prov).expect("provenance serializes"))
}

pub fn run(command: &'static str, cfg: RunConfig) -> Result<Output> {
    let ctx = Ctx::new(cfg);
    match command {
        "ground-state" => ground_state(&ctx),
        "psi" => psi(&ctx),
        "constants" => constants(&ctx),
        "beta-table" => beta_table(&ctx),
        "phi-scan" => phi_scan(&ctx),
        "energy-check" => energy_check(&ctx),
        _ => unreachable!("unknown command {command}"),
    }
}

#[derive(Serialize)]
struct GroundStateDoc {
    provenance: Provenance,
    identity_report: IdentityReport,
    decay_constant: f64,
    r_max: f64,
    ground_state: GroundStateRecord,
}

fn ground_state(ctx: &Ctx) -> Result<Output> {
    let n = ctx.cfg.n();
    let p = ctx.exponent()?;
    check_exponent(n, p)?;
    let gs = ctx.ground_state(n, p)?;
    done(json(&GroundStateDoc {
        provenance: ctx.provenance("ground-state"),
        identity_report: gs.identity_report(),
        decay_constant: gs.decay_constant()?,
        r_max: gs.r_max(),
        ground_state: GroundStateRecord::from(&gs),
    }))
}

#[derive(Serialize)]
struct PsiSample {
    r: f64,
    psi: f64,
    v2base: f64,
    trace: f64,
}

#[derive(Serialize)]
struct PsiDoc {
    provenance: Provenance,
    n: usize,
    p: f64,
    psi_residual: f64,
    psi_decay_rate: f64,
    l0_identities: L0Identities,
    kernel_orthogonality: f64,
    samples: Vec<PsiSample>,
}

fn psi(ctx: &Ctx) -> Result<Output> {
    let n = ctx.cfg.n();
    let p = ctx.exponent()?;
    check_exponent(n, p)?;
    let gs = ctx.ground_state(n, p)?;
    let cp = CorrectionProfiles::build(&gs)?;
    let count = ctx.cfg.resolution.unwrap_or(200);
    if count < 2 {
        return Err(Error::InvalidInput("resolution must be at least 2".into()));
    }
    let r_max = gs.r_max();
    let samples = (0..=count)
        .map(|i| {
            let r = r_max * i as f64 / count as f64;
            PsiSample {
                r,
                psi: cp.psi.value(r),
                v2base: cp.v2base.value(r),
                trace: cp.trace.value(r),
            }
        })
        .collect();
    done(json(&PsiDoc {
        provenance: ctx.provenance("psi"),
        n,
        p,
        psi_residual: cp.psi_residual,
        psi_decay_rate: psi_decay_rate(&cp.psi),
        l0_identities: verify_l0_identities(&gs),
        kernel_orthogonality: kernel_orthogonality(&gs),
        samples,
    }))
}

#[derive(Serialize)]
struct ConstantsDoc {
    provenance: Provenance,
    constants: DimensionalConstants,
    beta_from_c1: f64,
    beta_cross_check: f64,
    gamma: GammaValue,
    /// ∫U^{p−1}, the Jensen lower bound for γ
    jensen_bound: f64,
}

/// Uniform direction on S^{n−1} drawn from the seeded stream.
fn random_direction(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

fn constants(ctx: &Ctx) -> Result<Output> {
    let (n, m) = (ctx.cfg.n(), ctx.cfg.m());
    let (gs, _, dc) = ctx.constants(n, m)?;
    let gamma = gamma_interaction(&gs, &random_direction(n, ctx.cfg.seed()))?;
    let from_c1 = dc.beta_from_c1();
    done(json(&ConstantsDoc {
        provenance: ctx.provenance("constants"),
        beta_cross_check: (from_c1 - dc.beta).abs() / dc.beta.abs(),
        beta_from_c1: from_c1,
        constants: dc,
        gamma,
        jensen_bound: exponential_moment(&gs, 0.0),
    }))
}

#[derive(Serialize)]
struct TableDoc {
    provenance: Provenance,
    rows: Vec<TableRow>,
}

fn beta_table(ctx: &Ctx) -> Result<Output> {
    let max_n = ctx.cfg.max_n.unwrap_or(9);
    if max_n < 6 {
        return Err(Error::InvalidInput(format!("max-N must be at least 6, got {max_n}")));
    }
    let rows = table_pairs(max_n)
        .par_iter()
        .map(|&(n, m)| ctx.constants(n, m).map(|(_, _, dc)| dc))
        .collect::<Result<Vec<_>>>()?;
    let prov = ctx.provenance("beta-table");
    match ctx.cfg.format.as_deref().unwrap_or("csv") {
        "csv" => done(csv_with_provenance(&prov, &table_csv(&rows))),
        "json" => done(json(&TableDoc {
            provenance: prov,
            rows: rows.iter().map(TableRow::from).collect(),
        })),
        f => Err(Error::InvalidInput(format!("unknown format '{f}' (csv, json)"))),
    }
}

#[derive(Serialize)]
struct ScanDoc {
    provenance: Provenance,
    model: String,
    n: usize,
    m: usize,
    resolution: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<ErrorObject>,
    critical: Vec<CriticalPoint>,
    samples: Vec<PhiSample>,
}

fn phi_scan(ctx: &Ctx) -> Result<Output> {
    let (n, m) = (ctx.cfg.n(), ctx.cfg.m());
    let model = ctx.model()?;
    if matches!(model, ManifoldModel::Flat { .. }) {
        return Err(Error::InvalidInput("phi-scan needs a round or warped sphere".into()));
    }
    let (_, _, dc) = ctx.constants(n, m)?;
    let resolution = ctx.cfg.resolution.unwrap_or(400);
    let samples = phi_samples(&model, &dc, resolution)?;
    let critical = locate_critical(&model, &dc, &samples)?;
    let warning = critical.is_empty().then(|| {
        ErrorObject::from(&Error::NoInteriorCritical(
            "every extremum of the scan lies on the boundary or Φ is constant".into(),
        ))
    });
    let prov = ctx.provenance("phi-scan");
    if let Some(path) = &ctx.cfg.csv {
        write_file(path, &csv_with_provenance(&prov, &scan_csv(&samples)))?;
    }
    Ok(Output {
        text: json(&ScanDoc {
            provenance: prov,
            model: ctx.cfg.model.clone().unwrap_or_else(|| "round".into()),
            n,
            m,
            resolution,
            warning: warning.clone(),
            critical,
            samples,
        }),
        warning,
    })
}

#[derive(Serialize)]
struct EnergyRow {
    #[serde(flatten)]
    breakdown: EnergyBreakdown,
    centers: Vec<f64>,
    remainder_over_eps4: f64,
    interaction_sum: f64,
    /// |r|_{p',ε} of the uncorrected peak W at the first center
    residual_w: f64,
    /// the same for the corrected peak Y
    residual_y: f64,
}

#[derive(Serialize)]
struct EnergyDoc {
    provenance: Provenance,
    model: String,
    n: usize,
    m: usize,
    #[serde(rename = "K")]
    k: usize,
    corrector: Corrector,
    cutoff: f64,
    rho: f64,
    breakdowns: Vec<EnergyRow>,
    remainder_fit: SlopeFit,
    remainder_over_eps4_decreasing: bool,
    residual_w_fit: SlopeFit,
    residual_y_fit: SlopeFit,
    residual_slope_difference: f64,
    all_admissible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    expansion_fit: Option<ExpansionFit>,
}

fn energy_check(ctx: &Ctx) -> Result<Output> {
    let (n, m) = (ctx.cfg.n(), ctx.cfg.m());
    let k = ctx.cfg.k.unwrap_or(1);
    if !(1..=2).contains(&k) {
        return Err(Error::InvalidInput(format!("K must be 1 or 2, got {k}")));
    }
    let model = ctx.model()?;
    let corrector: Corrector = ctx.cfg.corrector.as_deref().unwrap_or("exact").parse()?;
    let eps = ctx.cfg.epsilons()?;
    if eps.len() < 2 {
        return Err(Error::InvalidInput("the eps ladder needs at least two values for slope fits".into()));
    }
    let cutoff = ctx.cfg.cutoff.unwrap_or(match &model {
        ManifoldModel::RoundSphere { radius, .. } => 3.0 * radius,
        _ => 3.0,
    });
    let center = ctx.cfg.center.unwrap_or(0.3);
    let rho = ctx.cfg.rho.unwrap_or(2.0);
    let (gs, cp, dc) = ctx.constants(n, m)?;
    let quad = RhoQuadrature::from_ground_state(&gs);
    let pipe = Pipeline {
        gs: &gs,
        cp: &cp,
        dc: &dc,
        quad: &quad,
    };

    let rows = eps
        .par_iter()
        .map(|&e| {
            let mut centers = vec![center];
            if k == 2 {
                let d = match ctx.cfg.spacing {
                    Some(d) => d,
                    None => e * u_inverse(&gs, e.powi(5))?,
                };
                centers.push(center + d);
            }
            let config = PeakConfig {
                epsilon: e,
                centers: centers.clone(),
                cutoff_r: cutoff,
            };
            let breakdown = expansion_compare(&config, &model, pipe, corrector, rho, center)?;
            let adm = yamabe_core::multipeak::admissible(&config, &gs, &model, rho, center);
            let w = build_w(&gs, e, cutoff, &model)?;
            let y = build_y(&gs, &cp, &dc, e, cutoff, &model, center, corrector)?;
            Ok(EnergyRow {
                remainder_over_eps4: breakdown.remainder / e.powi(4),
                interaction_sum: adm.interaction_sum,
                residual_w: residual_norm(&w, e, &model, center, &dc, &quad)?,
                residual_y: residual_norm(&y, e, &model, center, &dc, &quad)?,
                breakdown,
                centers,
            })
        })
        .collect::<Result<Vec<EnergyRow>>>()?;

    let col = |f: fn(&EnergyRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let remainder_fit = loglog_fit(&eps, &col(|r| r.breakdown.remainder));
    // "decreasing relative to ε⁴" along the ladder as ordered
    let ratios = col(|r| r.remainder_over_eps4.abs());
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let residual_w_fit = loglog_fit(&eps, &col(|r| r.residual_w));
    let residual_y_fit = loglog_fit(&eps, &col(|r| r.residual_y));
    let expansion_fit = if k == 1 && matches!(model, ManifoldModel::RoundSphere { .. }) {
        let degree = 3.min(eps.len() - 1);
        Some(fit_single_peak_expansion(&model, center, pipe, corrector, &eps, cutoff, degree)?)
    } else {
        None
    };
    done(json(&EnergyDoc {
        provenance: ctx.provenance("energy-check"),
        model: ctx.cfg.model.clone().unwrap_or_else(|| "round".into()),
        n,
        m,
        k,
        corrector,
        cutoff,
        rho,
        all_admissible: rows.iter().all(|r| r.breakdown.admissible),
        breakdowns: rows,
        remainder_fit,
        remainder_over_eps4_decreasing: decreasing,
        residual_slope_difference: residual_y_fit.slope - residual_w_fit.slope,
        residual_w_fit,
        residual_y_fit,
        expansion_fit,
    }))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::InvalidInput(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}
