use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use toric_renyi::lattice::Variant;
use toric_renyi::pcut::Regime;

/// Highest series order the command line accepts.
pub const MAX_ORDER: usize = 6;

/// Smallest accepted subset budget.
pub const MIN_BUDGET: u128 = 1 << 10;

/// Layered key=value settings; later layers win.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        // an explicit λ list replaces a grid from an earlier layer and vice versa
        match key {
            "lambda" => {
                self.values.remove("grid");
            }
            "grid" => {
                self.values.remove("lambda");
            }
            _ => {}
        }
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn read_file(&mut self, path: &Path) -> Result<()> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), i + 1))?;
            let key = k.trim();
            if !KEYS.contains(&key) {
                bail!("{}:{}: unknown key '{key}'", path.display(), i + 1);
            }
            self.set(key, v.trim());
        }
        Ok(())
    }
}

pub const KEYS: &[&str] = &[
    "variant",
    "regime",
    "target",
    "observable",
    "lambda",
    "grid",
    "N",
    "D",
    "d",
    "case",
    "order",
    "out",
    "format",
    "seed",
    "budget",
    "threads",
    "stretch",
];

/// Shipped preset: (name, command, settings).
type Preset = (
    &'static str,
    &'static str,
    &'static [(&'static str, &'static str)],
);

pub const PRESETS: &[Preset] = &[
    (
        "fig5-small",
        "sweep",
        &[
            ("variant", "quasi1d"),
            ("N", "40"),
            ("D", "6"),
            ("d", "2"),
            ("grid", "0.5,1.5,21"),
        ],
    ),
    (
        "fig5-mid",
        "sweep",
        &[
            ("variant", "quasi1d"),
            ("N", "80"),
            ("D", "12"),
            ("d", "4"),
            ("grid", "0.5,1.5,21"),
        ],
    ),
    (
        "fig6a",
        "sweep",
        &[
            ("variant", "quasi1d"),
            ("observable", "wilson"),
            ("N", "500"),
            ("D", "1..100"),
            ("lambda", "0.9,1.0,1.1"),
        ],
    ),
    (
        "fig6b",
        "sweep",
        &[
            ("variant", "quasi1d"),
            ("observable", "wilson"),
            ("N", "500"),
            ("D", "100"),
            ("grid", "0.02,0.98,49"),
        ],
    ),
    (
        "table1",
        "series",
        &[
            ("variant", "isotropic2d"),
            ("order", "6"),
            ("stretch", "true"),
        ],
    ),
    (
        "table2",
        "series",
        &[("variant", "quasi1d"), ("order", "6")],
    ),
];

pub fn preset(name: &str, command: &str) -> Result<Settings> {
    let (_, cmd, pairs) = PRESETS
        .iter()
        .find(|p| p.0 == name)
        .ok_or_else(|| anyhow!("unknown preset '{name}'"))?;
    if *cmd != command {
        bail!("preset '{name}' belongs to the {cmd} command");
    }
    let mut s = Settings::default();
    for (k, v) in pairs.iter() {
        s.set(k, *v);
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    Renyi,
    Wilson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesTarget {
    Renyi,
    Wilson,
    All,
}

/// One system size of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Size {
    pub n: usize,
    pub extent: usize,
    pub thickness: usize,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub variant: Variant,
    pub regime: Option<Regime>,
    pub target: SeriesTarget,
    pub observable: Observable,
    pub lambdas: Vec<f64>,
    pub sizes: Vec<Size>,
    pub case: Option<u8>,
    pub order: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub budget: u128,
    pub threads: Option<usize>,
    pub stretch: bool,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim()
        .parse()
        .map_err(|e| anyhow!("invalid {key} '{v}': {e}"))
}

/// Comma list of integers; `a..b` expands to the inclusive range.
fn parse_list(key: &str, v: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in v.split(',') {
        if let Some((a, b)) = part.split_once("..") {
            out.extend(parse::<usize>(key, a)?..=parse::<usize>(key, b)?);
        } else {
            out.push(parse(key, part)?);
        }
    }
    Ok(out)
}

/// `start,stop,points`, endpoints included.
pub fn parse_grid(v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 3 {
        bail!("grid needs start,stop,points, got '{v}'");
    }
    let start: f64 = parse("grid start", parts[0])?;
    let stop: f64 = parse("grid stop", parts[1])?;
    let points: usize = parse("grid points", parts[2])?;
    Ok(match points {
        0 => Vec::new(),
        1 => vec![start],
        p => (0..p)
            .map(|i| start + (stop - start) * i as f64 / (p - 1) as f64)
            .collect(),
    })
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let variant = match s.get("variant").unwrap_or("quasi1d") {
            "quasi1d" | "quasi-1d" => Variant::Quasi1d,
            "isotropic2d" | "2d" => Variant::Isotropic2d,
            other => bail!("unknown variant '{other}'"),
        };
        let regime = s
            .get("regime")
            .map(|r| parse::<Regime>("regime", r))
            .transpose()?;
        let target = match s.get("target").unwrap_or("all") {
            "renyi" => SeriesTarget::Renyi,
            "wilson" => SeriesTarget::Wilson,
            "all" => SeriesTarget::All,
            other => bail!("unknown target '{other}'"),
        };
        let observable = match s.get("observable").unwrap_or("renyi") {
            "renyi" => Observable::Renyi,
            "wilson" => Observable::Wilson,
            other => bail!("unknown observable '{other}'"),
        };
        let lambdas = match (s.get("lambda"), s.get("grid")) {
            (Some(l), _) => l
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| parse::<f64>("lambda", x))
                .collect::<Result<Vec<_>>>()?,
            (None, Some(g)) => parse_grid(g)?,
            (None, None) => Vec::new(),
        };
        if let Some(bad) = lambdas.iter().find(|l| !l.is_finite() || **l < 0.0) {
            bail!("field values must be finite and non-negative, got {bad}");
        }
        let ns = s
            .get("N")
            .map(|v| parse_list("N", v))
            .transpose()?
            .unwrap_or_default();
        let ds = s
            .get("D")
            .map(|v| parse_list("D", v))
            .transpose()?
            .unwrap_or_default();
        let ts = s
            .get("d")
            .map(|v| parse_list("d", v))
            .transpose()?
            .unwrap_or_default();
        let count = ns.len().max(ds.len());
        let pick = |v: &[usize], i: usize, key: &str| -> Result<Option<usize>> {
            match v.len() {
                0 => Ok(None),
                1 => Ok(Some(v[0])),
                l if l == count => Ok(Some(v[i])),
                l => bail!("{key} has {l} entries, expected 1 or {count}"),
            }
        };
        let mut sizes = Vec::with_capacity(count);
        for i in 0..count {
            let n = pick(&ns, i, "N")?.ok_or_else(|| anyhow!("missing N"))?;
            let extent = pick(&ds, i, "D")?.ok_or_else(|| anyhow!("missing D"))?;
            // default thickness d = D/3
            let thickness = pick(&ts, i, "d")?.unwrap_or(extent / 3);
            sizes.push(Size {
                n,
                extent,
                thickness,
            });
        }
        let order: usize = s
            .get("order")
            .map(|v| parse("order", v))
            .transpose()?
            .unwrap_or(4);
        if order > MAX_ORDER {
            bail!("order {order} exceeds the maximum {MAX_ORDER}");
        }
        let format = match s.get("format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => bail!("unknown format '{other}'"),
        };
        let budget: u128 = s
            .get("budget")
            .map(|v| parse("budget", v))
            .transpose()?
            .unwrap_or(toric_renyi::observables::DEFAULT_BUDGET);
        if budget < MIN_BUDGET {
            bail!("budget {budget} is below the minimum {MIN_BUDGET}");
        }
        let threads = s
            .get("threads")
            .map(|v| parse::<usize>("threads", v))
            .transpose()?;
        if threads == Some(0) {
            bail!("threads must be positive");
        }
        Ok(Self {
            variant,
            regime,
            target,
            observable,
            lambdas,
            sizes,
            case: s.get("case").map(|v| parse("case", v)).transpose()?,
            order,
            out: s.get("out").map(PathBuf::from),
            format,
            seed: s
                .get("seed")
                .map(|v| parse("seed", v))
                .transpose()?
                .unwrap_or(0),
            budget,
            threads,
            stretch: s
                .get("stretch")
                .map(|v| parse("stretch", v))
                .transpose()?
                .unwrap_or(false),
        })
    }
}
