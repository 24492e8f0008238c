use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use yamabe_core::{Error, Result};

/// Parameters shared by every subcommand. Anything left unset on the command
/// line may come from a `key=value` file given with `--config`; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct RunConfig {
    /// Plain-text key=value file (keys are the long flag names)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "max-N")]
    pub max_n: Option<usize>,
    /// round[:R] | warped (with --profile) | warped:c2,c3,... | flat
    #[arg(long)]
    pub model: Option<String>,
    /// Warp profile, a two-column (t, f) CSV
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Comma-separated epsilon ladder
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Admissibility radius around the first center
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Meridian parameter of the first peak
    #[arg(long)]
    pub center: Option<f64>,
    /// Geodesic distance between the two peaks (K = 2); by default chosen
    /// per epsilon so that U(d/ε) = ε⁵
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// none | literal | exact
    #[arg(long)]
    pub corrector: Option<String>,
    /// Scan resolution (phi-scan) or sample count (psi)
    #[arg(long)]
    pub resolution: Option<usize>,
    /// csv | json (beta-table)
    #[arg(long)]
    pub format: Option<String>,
    /// Also write the Φ scan as CSV to this path (phi-scan)
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long = "no-cache")]
    pub no_cache: bool,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidInput(format!("config key '{key}': cannot parse '{v}'")))
}

fn fill<T: std::str::FromStr>(slot: &mut Option<T>, key: &str, v: &str) -> Result<()> {
    if slot.is_none() {
        *slot = Some(parse(key, v)?);
    }
    Ok(())
}

pub fn read_pairs(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// Fills unset fields from the `--config` file, if any.
    pub fn resolve(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        for (k, v) in read_pairs(&path)? {
            let v = v.as_str();
            match k.as_str() {
                "n" => fill(&mut self.n, &k, v)?,
                "m" => fill(&mut self.m, &k, v)?,
                "p" => fill(&mut self.p, &k, v)?,
                "max-N" => fill(&mut self.max_n, &k, v)?,
                "model" => fill(&mut self.model, &k, v)?,
                "profile" => fill(&mut self.profile, &k, v)?,
                "eps" => fill(&mut self.eps, &k, v)?,
                "K" => fill(&mut self.k, &k, v)?,
                "rho" => fill(&mut self.rho, &k, v)?,
                "seed" => fill(&mut self.seed, &k, v)?,
                "out" => fill(&mut self.out, &k, v)?,
                "center" => fill(&mut self.center, &k, v)?,
                "spacing" => fill(&mut self.spacing, &k, v)?,
                "cutoff" => fill(&mut self.cutoff, &k, v)?,
                "corrector" => fill(&mut self.corrector, &k, v)?,
                "resolution" => fill(&mut self.resolution, &k, v)?,
                "format" => fill(&mut self.format, &k, v)?,
                "csv" => fill(&mut self.csv, &k, v)?,
                "cache-dir" => fill(&mut self.cache_dir, &k, v)?,
                "no-cache" => self.no_cache |= parse::<bool>(&k, v)?,
                _ => return Err(Error::InvalidInput(format!("unknown config key '{k}'"))),
            }
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(3)
    }

    pub fn m(&self) -> usize {
        self.m.unwrap_or(3)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn epsilons(&self) -> Result<Vec<f64>> {
        let Some(list) = &self.eps else { return Ok(vec![0.1, 0.07, 0.05, 0.035]) };
        let v = list
            .split(',')
            .map(|s| parse::<f64>("eps", s.trim()))
            .collect::<Result<Vec<f64>>>()?;
        if v.is_empty() || v.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::InvalidInput(format!("eps must be values in (0, 1), got '{list}'")));
        }
        Ok(v)
    }
}
