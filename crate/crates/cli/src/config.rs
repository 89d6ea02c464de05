//! Run configurations and their canonical `key=value` text.
//!
//! Values are layered: built-in defaults, then an optional `--config` file,
//! then command-line flags. Every layer is plain text, so flags go through
//! the same parser as the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kscale_core::sweep::{format_float, scale_grid};
use kscale_core::{KernelId, TestFunction, DEFAULT_COND_LIMIT};

use crate::error::{CliError, Result};

pub type Entries = BTreeMap<String, String>;

/// Parses `key=value` lines. Blank lines and `#` comments are skipped and
/// dashes in keys read as underscores.
pub fn parse_entries(text: &str) -> Result<Entries> {
    let mut out = Entries::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(out)
}

fn layer(command: &str, mut entries: Entries, file: Option<&Path>, flags: Vec<(&str, Option<String>)>) -> Result<Entries> {
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        for (k, v) in parse_entries(&text)? {
            if k == "command" {
                if v != command {
                    return Err(CliError::Config(format!("{} is a `{v}` config, not `{command}`", path.display())));
                }
                continue;
            }
            if !entries.contains_key(&k) {
                return Err(CliError::Config(format!("unknown key `{k}` in {}", path.display())));
            }
            entries.insert(k, v);
        }
    }
    for (k, v) in flags {
        if let Some(v) = v {
            entries.insert(k.to_string(), v);
        }
    }
    Ok(entries)
}

fn to_entries(pairs: Vec<(&'static str, String)>) -> Entries {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn render(command: &str, pairs: &[(&'static str, String)]) -> String {
    let mut out = format!("command={command}\n");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

fn get<'a>(e: &'a Entries, key: &str) -> &'a str {
    e.get(key).map(String::as_str).unwrap_or_default()
}

fn number<T: FromStr>(e: &Entries, key: &str) -> Result<T> {
    let v = get(e, key);
    v.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}")))
}

fn positive(e: &Entries, key: &str) -> Result<f64> {
    let v: f64 = number(e, key)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{key} must be positive, got {v}")))
    }
}

fn boolean(e: &Entries, key: &str) -> Result<bool> {
    match get(e, key) {
        "true" => Ok(true),
        "false" => Ok(false),
        v => Err(CliError::Config(format!("{key}: expected true or false, got {v:?}"))),
    }
}

fn names<T>(e: &Entries, key: &str) -> Result<Vec<T>>
where
    T: FromStr<Err = kscale_core::Error>,
{
    let list: Vec<T> = get(e, key)
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(T::from_str)
        .collect::<std::result::Result<_, _>>()?;
    if list.is_empty() {
        return Err(CliError::Config(format!("{key}: empty list")));
    }
    Ok(list)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Numbers given inline (`-1,0,1`) or as the path of a file holding them,
/// separated by commas or whitespace, with `#` comment lines.
pub fn number_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let path = Path::new(value);
    let text = if !value.is_empty() && path.is_file() {
        fs::read_to_string(path).map_err(CliError::io(path))?
    } else {
        value.to_string()
    };
    let nums = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("{key}: bad number {t:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if nums.is_empty() {
        return Err(CliError::Config(format!("missing --{key}")));
    }
    Ok(nums)
}

/// Scales swept, as `count` points between `min` and `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl EpsGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        Ok(scale_grid(self.min, self.max, self.count, self.log)?)
    }
}

/// Where sweep CSVs go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Output {
    Stdout,
    /// One combined file.
    File(PathBuf),
    /// One file per test function, `sweep_<function>_<grid>.csv`.
    Dir(PathBuf),
}

impl Output {
    /// `-` is stdout, a `.csv` suffix names a single file, anything else a
    /// directory.
    pub fn parse(s: &str) -> Output {
        if s == "-" {
            Output::Stdout
        } else if s.ends_with(".csv") {
            Output::File(PathBuf::from(s))
        } else {
            Output::Dir(PathBuf::from(s))
        }
    }

    pub fn as_text(&self) -> String {
        match self {
            Output::Stdout => "-".to_string(),
            Output::File(p) | Output::Dir(p) => p.display().to_string(),
        }
    }
}

/// Configuration of `kscale sweep`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kernels: Vec<KernelId>,
    pub functions: Vec<TestFunction>,
    pub grid: usize,
    pub eps: EpsGrid,
    pub cond_limit: f64,
    pub out: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kernels: vec![KernelId::Gaussian, KernelId::InverseMultiquadric, KernelId::Matern3, KernelId::Wendland],
            functions: TestFunction::ALL.to_vec(),
            grid: 11,
            eps: EpsGrid { min: 1e-2, max: 1e1, count: 40, log: true },
            cond_limit: DEFAULT_COND_LIMIT,
            out: Output::Dir(PathBuf::from(".")),
        }
    }
}

impl RunConfig {
    pub const COMMAND: &'static str = "sweep";

    /// Everything that determines the numbers, in canonical order.
    pub fn metadata(&self) -> Vec<(&'static str, String)> {
        vec![
            ("kernels", join(&self.kernels)),
            ("functions", join(&self.functions)),
            ("grid", self.grid.to_string()),
            ("eps_min", format_float(self.eps.min)),
            ("eps_max", format_float(self.eps.max)),
            ("eps_count", self.eps.count.to_string()),
            ("log", self.eps.log.to_string()),
            ("cond_limit", format_float(self.cond_limit)),
        ]
    }

    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut p = self.metadata();
        p.push(("out", self.out.as_text()));
        p
    }

    pub fn to_text(&self) -> String {
        render(Self::COMMAND, &self.pairs())
    }

    /// Keys missing from `text` keep their defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut e = to_entries(RunConfig::default().pairs());
        for (k, v) in parse_entries(text)? {
            if k == "command" && v != Self::COMMAND {
                return Err(CliError::Config(format!("not a sweep config: command={v}")));
            }
            e.insert(k, v);
        }
        e.remove("command");
        Self::from_entries(&e)
    }

    pub fn resolve(file: Option<&Path>, flags: Vec<(&str, Option<String>)>) -> Result<Self> {
        let e = layer(Self::COMMAND, to_entries(RunConfig::default().pairs()), file, flags)?;
        Self::from_entries(&e)
    }

    fn from_entries(e: &Entries) -> Result<Self> {
        if let Some(k) = e.keys().find(|k| !RunConfig::default().pairs().iter().any(|(d, _)| d == k)) {
            return Err(CliError::Config(format!("unknown key `{k}`")));
        }
        let grid: usize = number(e, "grid")?;
        if grid != 11 && grid != 21 {
            return Err(CliError::Config(format!("grid must be 11 or 21, got {grid}")));
        }
        let eps = EpsGrid {
            min: positive(e, "eps_min")?,
            max: positive(e, "eps_max")?,
            count: number(e, "eps_count")?,
            log: boolean(e, "log")?,
        };
        eps.values()?;
        Ok(RunConfig {
            kernels: names(e, "kernels")?,
            functions: names(e, "functions")?,
            grid,
            eps,
            cond_limit: positive(e, "cond_limit")?,
            out: Output::parse(get(e, "out")),
        })
    }
}

/// Configuration of `kscale expand`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandConfig {
    pub sites: Vec<f64>,
    pub values: Vec<f64>,
    pub kernel: KernelId,
    pub pre_scale: f64,
    /// Highest even power `ε^(2J)`.
    pub terms: usize,
    pub eps: EpsGrid,
    pub odd_powers: bool,
    /// Scales of the error scan, log-spaced over the same window.
    pub scan_count: usize,
    pub cond_limit: f64,
    /// Directory for `expansion.csv` and `expansion.txt`; `-` writes nothing.
    pub out: String,
}

impl ExpandConfig {
    pub const COMMAND: &'static str = "expand";

    fn default_entries() -> Entries {
        to_entries(vec![
            ("sites", String::new()),
            ("values", String::new()),
            ("kernel", "g".into()),
            ("pre_scale", "1".into()),
            ("terms", "3".into()),
            ("eps_min", "5e-2".into()),
            ("eps_max", "4e-1".into()),
            ("eps_count", "12".into()),
            ("odd_powers", "false".into()),
            ("scan_count", "30".into()),
            ("cond_limit", format_float(DEFAULT_COND_LIMIT)),
            ("out", ".".into()),
        ])
    }

    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[f64]| v.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(",");
        vec![
            ("sites", list(&self.sites)),
            ("values", list(&self.values)),
            ("kernel", self.kernel.to_string()),
            ("pre_scale", format_float(self.pre_scale)),
            ("terms", self.terms.to_string()),
            ("eps_min", format_float(self.eps.min)),
            ("eps_max", format_float(self.eps.max)),
            ("eps_count", self.eps.count.to_string()),
            ("odd_powers", self.odd_powers.to_string()),
            ("scan_count", self.scan_count.to_string()),
            ("cond_limit", format_float(self.cond_limit)),
            ("out", self.out.clone()),
        ]
    }

    pub fn to_text(&self) -> String {
        render(Self::COMMAND, &self.pairs())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut e = Self::default_entries();
        for (k, v) in parse_entries(text)? {
            if k == "command" && v != Self::COMMAND {
                return Err(CliError::Config(format!("not an expand config: command={v}")));
            }
            e.insert(k, v);
        }
        e.remove("command");
        Self::from_entries(&e)
    }

    pub fn resolve(file: Option<&Path>, flags: Vec<(&str, Option<String>)>) -> Result<Self> {
        let e = layer(Self::COMMAND, Self::default_entries(), file, flags)?;
        Self::from_entries(&e)
    }

    fn from_entries(e: &Entries) -> Result<Self> {
        let defaults = Self::default_entries();
        if let Some(k) = e.keys().find(|k| !defaults.contains_key(*k)) {
            return Err(CliError::Config(format!("unknown key `{k}`")));
        }
        let sites = number_list("sites", get(e, "sites"))?;
        let values = number_list("values", get(e, "values"))?;
        if sites.len() != values.len() {
            return Err(CliError::Config(format!("{} sites but {} values", sites.len(), values.len())));
        }
        let eps = EpsGrid {
            min: positive(e, "eps_min")?,
            max: positive(e, "eps_max")?,
            count: number(e, "eps_count")?,
            log: true,
        };
        eps.values()?;
        Ok(ExpandConfig {
            sites,
            values,
            kernel: get(e, "kernel").parse()?,
            pre_scale: positive(e, "pre_scale")?,
            terms: number(e, "terms")?,
            eps,
            odd_powers: boolean(e, "odd_powers")?,
            scan_count: number(e, "scan_count")?,
            cond_limit: positive(e, "cond_limit")?,
            out: get(e, "out").to_string(),
        })
    }
}
