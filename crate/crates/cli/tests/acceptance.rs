//! Acceptance run: one PASS/FAIL line per criterion. Runs without the test
//! harness so the lines are never captured. By default it only reports, so
//! a failing criterion does not stop the rest of `cargo test --workspace`;
//! set YAMABE_ACCEPTANCE_STRICT=1 to exit nonzero on any FAIL.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use common::{rel_err, FdCurvature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use yamabe_core::constants::{beta_table, exponential_moment, gamma_interaction, table_pairs, DimensionalConstants};
use yamabe_core::correction::{solve_psi, verify_l0_identities, CorrectionProfiles};
use yamabe_core::geometry::{curvature_warped_sphere, scan_phi, ManifoldModel, WarpProfile};
use yamabe_core::groundstate::{product_exponent, solve_ground_state, GroundState, SolverConfig};
use yamabe_core::multipeak::*;

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        println!("criterion {id:<3} {}  {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

fn table(rep: &mut Report) -> Vec<(GroundState, DimensionalConstants)> {
    let start = Instant::now();
    let pairs = table_pairs(9);
    let rows = beta_table(&pairs, &SolverConfig::default()).expect("table");
    let secs = start.elapsed().as_secs_f64();
    let worst = rows.iter().map(|d| d.beta).fold(f64::MIN, f64::max);
    rep.line(
        "1",
        rows.len() == 10 && worst < 0.0 && secs < 120.0,
        format!("{} rows, largest beta {worst:.6e}, {secs:.1} s (target < 120 s)", rows.len()),
    );
    // the same ground states, for the identity and γ checks
    pairs
        .par_iter()
        .zip(rows)
        .map(|(&(n, m), dc)| (solve_ground_state(n, product_exponent(n, m), 1e-13).unwrap(), dc))
        .collect()
}

fn identities(rep: &mut Report, states: &[(GroundState, DimensionalConstants)]) {
    let worst = states
        .iter()
        .map(|(gs, _)| {
            let r = gs.identity_report();
            r.e_energy.max(r.e_pohozaev).max(r.e_alpha)
        })
        .fold(0.0, f64::max);
    rep.line("2", worst < 1e-6, format!("worst identity error {worst:.2e} over 10 (n, p) (tol 1e-6)"));
}

fn l0(rep: &mut Report) {
    let worst = [(3, 3.0), (4, 8.0 / 3.0), (5, 8.0 / 3.0)]
        .par_iter()
        .map(|&(n, p)| {
            let id = verify_l0_identities(&solve_ground_state(n, p, 1e-13).unwrap());
            id.e1.max(id.e2)
        })
        .reduce(|| 0.0, f64::max);
    rep.line("3", worst < 1e-6, format!("worst L0 identity residual {worst:.2e} (tol 1e-6)"));
}

fn psi_fd(rep: &mut Report) {
    let gs = solve_ground_state(3, 3.0, 1e-13).unwrap();
    let psi = solve_psi(&gs).unwrap();
    let field = |z: &[f64]| psi.value(norm(z)) * z[0] * z[1];
    let h = 1e-2;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for _ in 0..300 {
        let z: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let f0 = field(&z);
        let mut lap = 0.0;
        let mut y = z.clone();
        for i in 0..3 {
            y[i] = z[i] + h;
            let fp = field(&y);
            y[i] = z[i] - h;
            let fm = field(&y);
            y[i] = z[i];
            lap += (fp - 2.0 * f0 + fm) / (h * h);
        }
        let r = norm(&z);
        let (u, du, _) = gs.eval(r);
        let l0f = -lap + f0 - (gs.p - 1.0) * u.powf(gs.p - 2.0) * f0;
        let target = du / r * z[0] * z[1];
        err = err.max((l0f - target).abs());
        scale = scale.max(target.abs());
    }
    let e = err / scale;
    rep.line("4", e < 1e-3, format!("finite-difference L0 of psi(|z|) z1 z2: relative error {e:.2e} (tol 1e-3)"));
}

fn beta_check(rep: &mut Report, states: &[(GroundState, DimensionalConstants)]) {
    let worst = states
        .iter()
        .map(|(_, dc)| rel_err(dc.beta_from_c1(), dc.beta, 0.0))
        .fold(0.0, f64::max);
    rep.line("5", worst < 1e-6, format!("worst |c I2 - 2 c1 - beta| / |beta| = {worst:.2e} (tol 1e-6)"));
}

fn gamma(rep: &mut Report, states: &[(GroundState, DimensionalConstants)]) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut spread, mut jensen_ok) = (0.0f64, true);
    for (gs, _) in states {
        let values: Vec<f64> = (0..10)
            .map(|_| gamma_interaction(gs, &unit(&mut rng, gs.n)).unwrap().value)
            .collect();
        let hi = values.iter().cloned().fold(f64::MIN, f64::max);
        let lo = values.iter().cloned().fold(f64::MAX, f64::min);
        spread = spread.max((hi - lo) / lo);
        jensen_ok &= lo > exponential_moment(gs, 0.0);
    }
    rep.line(
        "6",
        spread < 1e-8 && jensen_ok,
        format!("worst spread over 10 directions {spread:.2e} (tol 1e-8); Jensen bound holds: {jensen_ok}"),
    );
}

const LADDER: [f64; 4] = [0.1, 0.07, 0.05, 0.035];
const FIT_LADDER: [f64; 6] = [0.12, 0.1, 0.085, 0.07, 0.05, 0.035];

fn expansion(rep: &mut Report) -> (GroundState, CorrectionProfiles, DimensionalConstants, RhoQuadrature) {
    let start = Instant::now();
    let sphere = ManifoldModel::RoundSphere { n: 3, radius: 1.0 };
    let (gs, cp, dc) = yamabe_core::constants::constants_for(3, 3, &SolverConfig::default()).unwrap();
    let quad = RhoQuadrature::from_ground_state(&gs);
    let pipe = Pipeline {
        gs: &gs,
        cp: &cp,
        dc: &dc,
        quad: &quad,
    };
    let (t, cut) = (0.3, 3.0);
    let fit = fit_single_peak_expansion(&sphere, t, pipe, Corrector::Exact, &FIT_LADDER, cut, 3).unwrap();
    let (a2, a4) = (fit.coefficients[0], fit.coefficients[1]);
    let e2 = rel_err(a2, fit.predicted_eps2, 0.0);
    let e4 = rel_err(a4, fit.predicted_eps4, 0.0);
    let ratios: Vec<f64> = LADDER
        .iter()
        .map(|&e| {
            let cfg = PeakConfig {
                epsilon: e,
                centers: vec![t],
                cutoff_r: cut,
            };
            let b = expansion_compare(&cfg, &sphere, pipe, Corrector::Exact, 1.0, t).unwrap();
            b.remainder.abs() / e.powi(4)
        })
        .collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let secs = start.elapsed().as_secs_f64();
    rep.line(
        "7a",
        e2 < 0.01,
        format!("eps^2 coefficient {a2:.8} vs (beta/2) s = {:.8}: rel {e2:.2e} (tol 1e-2)", fit.predicted_eps2),
    );
    rep.line(
        "7b",
        e4 < 0.05,
        format!("eps^4 coefficient {a4:.4} vs Phi = {:.4}: rel {e4:.2e} (tol 5e-2)", fit.predicted_eps4),
    );
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    rep.line(
        "7c",
        decreasing && secs < 300.0,
        format!("|remainder|/eps^4 over eps = {LADDER:?}: [{}], {secs:.1} s", shown.join(", ")),
    );
    (gs, cp, dc, quad)
}

fn residuals(rep: &mut Report, gs: &GroundState, cp: &CorrectionProfiles, dc: &DimensionalConstants, quad: &RhoQuadrature) {
    let sphere = ManifoldModel::RoundSphere { n: 3, radius: 1.0 };
    let slope = |corrector: Corrector| {
        let r: Vec<f64> = LADDER
            .iter()
            .map(|&e| {
                let y = build_y(gs, cp, dc, e, 3.0, &sphere, 0.3, corrector).unwrap();
                residual_norm(&y, e, &sphere, 0.3, dc, quad).unwrap()
            })
            .collect();
        loglog_fit(&LADDER, &r).slope
    };
    let (w, y) = (slope(Corrector::None), slope(Corrector::Exact));
    rep.line(
        "8",
        y >= 2.7 && y - w >= 0.7,
        format!("residual slope Y {y:.3} (>= 2.7), W {w:.3}, difference {:.3} (>= 0.7)", y - w),
    );
}

fn curvature(rep: &mut Report, dc: &DimensionalConstants) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(3..=5);
        let coeffs = vec![rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)];
        let t = rng.gen_range(0.4..std::f64::consts::PI - 0.4);
        let prof = WarpProfile::sine(coeffs);
        let f = |x: f64| prof.value(x);
        let (s, lap, ric2, riem2) = FdCurvature::new(n, &f).at(t);
        let c = curvature_warped_sphere(n, &prof, t).unwrap();
        for (a, b) in [(c.s, s), (c.lap_s, lap), (c.ric2, ric2), (c.riem2, riem2)] {
            worst = worst.max(rel_err(a, b, 1.0));
        }
    }
    let model = ManifoldModel::WarpedSphere {
        n: 3,
        profile: WarpProfile::sine(vec![0.05]),
    };
    let a = scan_phi(&model, dc, 400).unwrap();
    let b = scan_phi(&model, dc, 800).unwrap();
    let same = a.critical.len() == b.critical.len() && a.critical.iter().zip(&b.critical).all(|(x, y)| x.kind == y.kind);
    let shift = a
        .critical
        .iter()
        .zip(&b.critical)
        .map(|(x, y)| (x.t - y.t).abs())
        .fold(0.0, f64::max);
    rep.line(
        "9",
        worst < 1e-5 && same && shift < 1e-6,
        format!(
            "oracle error {worst:.2e} on 50 samples (tol 1e-5); {} critical points, 2x refinement shift {shift:.2e} (tol 1e-6)",
            a.critical.len()
        ),
    );
}

/// Every command twice with identical flags: the first run fills a fresh
/// cache, the second reads it.
fn determinism(rep: &mut Report) {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let _ = std::fs::remove_dir_all(&root);
    std::fs::create_dir_all(&root).unwrap();
    let cache = root.join("cache");
    let commands: Vec<Vec<&str>> = vec![
        vec!["ground-state", "--n", "4", "--m", "4"],
        vec!["psi", "--n", "3", "--m", "3"],
        vec!["constants", "--n", "3", "--m", "4", "--seed", "42"],
        vec!["beta-table", "--max-N", "9"],
        vec!["beta-table", "--max-N", "7", "--format", "json"],
        vec!["phi-scan", "--model", "warped:0.05"],
        vec!["phi-scan", "--model", "round"],
        vec!["energy-check"],
        vec!["energy-check", "--K", "2", "--eps", "0.1,0.05"],
    ];
    let run = |args: &[&str], tag: &str| -> Vec<u8> {
        let out = root.join(format!("{tag}.out"));
        let csv = root.join(format!("{tag}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_yamabe"))
            .args(args)
            .arg("--cache-dir")
            .arg(&cache)
            .arg("--out")
            .arg(&out)
            .args(if args[0] == "phi-scan" { vec!["--csv", csv.to_str().unwrap()] } else { vec![] })
            .stderr(Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "{args:?}");
        let mut bytes = std::fs::read(&out).unwrap();
        if Path::new(&csv).exists() {
            bytes.extend(std::fs::read(&csv).unwrap());
        }
        bytes
    };
    let mut differing = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        if run(args, &format!("{i}a")) != run(args, &format!("{i}b")) {
            differing.push(args.join(" "));
        }
    }
    rep.line(
        "10",
        differing.is_empty(),
        format!("{} command lines rerun byte-identical; differing: {differing:?}", commands.len()),
    );
}

fn main() {
    let mut rep = Report { failed: Vec::new() };
    let states = table(&mut rep);
    identities(&mut rep, &states);
    l0(&mut rep);
    psi_fd(&mut rep);
    beta_check(&mut rep, &states);
    gamma(&mut rep, &states);
    let (gs, cp, dc, quad) = expansion(&mut rep);
    residuals(&mut rep, &gs, &cp, &dc, &quad);
    curvature(&mut rep, &dc);
    determinism(&mut rep);
    if rep.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: FAILING criteria {:?}", rep.failed);
        if std::env::var_os("YAMABE_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
