//! Experiment configuration files (TOML).
//!
//! ```toml
//! walk = "plancherel"      # hadamard | plancherel | birkhoff
//! n = [4, 8, 16, 32, 64]   # strictly increasing horizons, each ≥ 1
//! seed = 7                 # required for birkhoff
//! output = "out"           # optional; `--out` overrides it
//!
//! [zeta]                   # optional characteristic-function grid
//! window = 8.0
//! points = 257
//! points_2d = 33
//!
//! [plancherel]
//! dim = 1
//! coin_points = 256
//! walk_points = 2048
//! refine = 1
//! phi0 = { kind = "gaussian", center = 0.0, width = 1.0, momentum = 0.0 }
//! chi0 = { kind = "box", a = -1.0, b = 1.0 }
//! # psi0_file = "state.csv"   (instead of phi0/chi0)
//! ```
//!
//! See `examples/` for one commented configuration per walk. Parsing
//! collects every problem it finds instead of stopping at the first.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::birkhoff::{CoinDensity, StepFunction, TrigPolynomial, TrigTerm, Wave};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::limits::ZetaGrid;
use crate::psi0::{ProductProfile, Profile};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub walk: WalkConfig,
    pub n: Vec<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub zeta: ZetaGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WalkConfig {
    Hadamard(HadamardConfig),
    Plancherel(PlancherelConfig),
    Birkhoff(BirkhoffConfig),
}

impl WalkConfig {
    pub fn name(&self) -> &'static str {
        match self {
            WalkConfig::Hadamard(_) => "hadamard",
            WalkConfig::Plancherel(_) => "plancherel",
            WalkConfig::Birkhoff(_) => "birkhoff",
        }
    }
}

/// Initial state `|site⟩ ⊗ (heads |H⟩ + tails |T⟩)`, normalized on use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HadamardConfig {
    pub site: i64,
    pub heads: [f64; 2],
    pub tails: [f64; 2],
}

impl Default for HadamardConfig {
    fn default() -> Self {
        Self {
            site: 0,
            heads: [1.0, 0.0],
            tails: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlancherelPsi0 {
    Product { phi0: ProductProfile, chi0: ProductProfile },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlancherelConfig {
    pub grid: GridSpec,
    pub psi0: PlancherelPsi0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaSpec {
    Golden,
    Value(f64),
    Rational { p: i64, q: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemConfig {
    Rotation(AlphaSpec),
    Baker,
}

impl SystemConfig {
    pub fn omega_dim(&self) -> usize {
        match self {
            SystemConfig::Rotation(_) => 1,
            SystemConfig::Baker => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoinConfig {
    Uniform,
    Trig(TrigPolynomial),
    Grid { per_axis: usize, values: Vec<f64> },
}

impl CoinConfig {
    pub fn build(&self, omega_dim: usize) -> Result<CoinDensity> {
        match self {
            CoinConfig::Uniform => Ok(CoinDensity::uniform(omega_dim)),
            CoinConfig::Trig(p) => CoinDensity::trig_amplitude(omega_dim, p.clone()),
            CoinConfig::Grid { per_axis, values } => CoinDensity::grid(omega_dim, *per_axis, values.clone()),
        }
    }
}

/// Optional quadrature evaluation of `Pₙ` on `points` cells of `[lo, hi)`
/// per axis, with `omega_cells` cells per axis of Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub omega_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffConfig {
    pub system: SystemConfig,
    pub h: StepFunction,
    pub phi0: ProductProfile,
    pub coin: CoinConfig,
    pub samples: usize,
    pub n_avg: usize,
    pub quadrature: Option<QuadratureConfig>,
}

/// Collects problems while walking the document.
struct Errors(Vec<String>);

impl Errors {
    fn push(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{path}: {msg}"));
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn reject_unknown(t: &Table, allowed: &[&str], path: &str, errs: &mut Errors) {
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            errs.push(&join(path, k), "unknown key");
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn get_f64(t: &Table, key: &str, path: &str, errs: &mut Errors) -> Option<f64> {
    let v = t.get(key)?;
    match as_f64(v) {
        Some(f) if f.is_finite() => Some(f),
        _ => {
            errs.push(&join(path, key), "expected a finite number");
            None
        }
    }
}

fn need_f64(t: &Table, key: &str, path: &str, errs: &mut Errors) -> Option<f64> {
    if !t.contains_key(key) {
        errs.push(&join(path, key), "missing");
        return None;
    }
    get_f64(t, key, path, errs)
}

fn get_int(t: &Table, key: &str, path: &str, errs: &mut Errors) -> Option<i64> {
    match t.get(key)? {
        Value::Integer(i) => Some(*i),
        _ => {
            errs.push(&join(path, key), "expected an integer");
            None
        }
    }
}

fn get_count(t: &Table, key: &str, path: &str, errs: &mut Errors) -> Option<usize> {
    let i = get_int(t, key, path, errs)?;
    if i < 1 {
        errs.push(&join(path, key), format!("must be ≥ 1, got {i}"));
        return None;
    }
    Some(i as usize)
}

fn get_str<'a>(t: &'a Table, key: &str, path: &str, errs: &mut Errors) -> Option<&'a str> {
    match t.get(key)? {
        Value::String(s) => Some(s),
        _ => {
            errs.push(&join(path, key), "expected a string");
            None
        }
    }
}

fn get_table<'a>(t: &'a Table, key: &str, path: &str, errs: &mut Errors) -> Option<&'a Table> {
    match t.get(key)? {
        Value::Table(s) => Some(s),
        _ => {
            errs.push(&join(path, key), "expected a table");
            None
        }
    }
}

fn get_f64_array(t: &Table, key: &str, path: &str, errs: &mut Errors) -> Option<Vec<f64>> {
    let p = join(path, key);
    match t.get(key)? {
        Value::Array(a) => {
            let vals: Vec<Option<f64>> = a.iter().map(as_f64).collect();
            if vals.iter().any(Option::is_none) {
                errs.push(&p, "expected an array of numbers");
                return None;
            }
            Some(vals.into_iter().map(Option::unwrap).collect())
        }
        _ => {
            errs.push(&p, "expected an array of numbers");
            None
        }
    }
}

fn parse_profile(t: &Table, path: &str, errs: &mut Errors) -> Option<Profile> {
    let kind = get_str(t, "kind", path, errs);
    let profile = match kind {
        Some("gaussian") => {
            reject_unknown(t, &["kind", "center", "width", "momentum"], path, errs);
            Profile::Gaussian {
                center: get_f64(t, "center", path, errs).unwrap_or(0.0),
                width: get_f64(t, "width", path, errs).unwrap_or(1.0),
                momentum: get_f64(t, "momentum", path, errs).unwrap_or(0.0),
            }
        }
        Some("box") => {
            reject_unknown(t, &["kind", "a", "b"], path, errs);
            Profile::Box {
                a: need_f64(t, "a", path, errs)?,
                b: need_f64(t, "b", path, errs)?,
            }
        }
        Some(other) => {
            errs.push(
                &join(path, "kind"),
                format!("unknown profile {other:?} (gaussian, box)"),
            );
            return None;
        }
        None => {
            errs.push(&join(path, "kind"), "missing");
            return None;
        }
    };
    if let Err(e) = profile.validate() {
        errs.push(path, e);
        return None;
    }
    Some(profile)
}

/// A single profile (used on every axis) or one per axis.
fn parse_product(t: &Table, key: &str, dim: usize, path: &str, errs: &mut Errors) -> Option<ProductProfile> {
    let p = join(path, key);
    let axes = match t.get(key) {
        None => {
            errs.push(&p, "missing");
            return None;
        }
        Some(Value::Table(s)) => vec![parse_profile(s, &p, errs)?; dim],
        Some(Value::Array(a)) => {
            if a.len() != dim {
                errs.push(&p, format!("{} profiles for dimension {dim}", a.len()));
                return None;
            }
            let mut out = Vec::new();
            for (i, v) in a.iter().enumerate() {
                let pi = format!("{p}[{i}]");
                match v {
                    Value::Table(s) => out.push(parse_profile(s, &pi, errs)),
                    _ => errs.push(&pi, "expected a table"),
                }
            }
            out.into_iter().collect::<Option<Vec<_>>>()?
        }
        Some(_) => {
            errs.push(&p, "expected a table or an array of tables");
            return None;
        }
    };
    match ProductProfile::new(axes) {
        Ok(pp) => Some(pp),
        Err(e) => {
            errs.push(&p, e);
            None
        }
    }
}

fn parse_trig(t: &Table, path: &str, extra: &[&str], errs: &mut Errors) -> Option<TrigPolynomial> {
    let mut allowed = vec!["constant", "terms"];
    allowed.extend_from_slice(extra);
    reject_unknown(t, &allowed, path, errs);
    let constant = get_f64(t, "constant", path, errs).unwrap_or(0.0);
    let mut poly = TrigPolynomial::constant(constant);
    let terms = match t.get("terms") {
        None => return Some(poly),
        Some(Value::Array(a)) => a,
        Some(_) => {
            errs.push(&join(path, "terms"), "expected an array of tables");
            return None;
        }
    };
    let mut ok = true;
    for (i, v) in terms.iter().enumerate() {
        let p = format!("{}[{i}]", join(path, "terms"));
        let Value::Table(term) = v else {
            errs.push(&p, "expected a table");
            ok = false;
            continue;
        };
        reject_unknown(term, &["coeff", "wave", "freq"], &p, errs);
        let coeff = need_f64(term, "coeff", &p, errs);
        let wave = match get_str(term, "wave", &p, errs) {
            Some("cos") | None => Some(Wave::Cos),
            Some("sin") => Some(Wave::Sin),
            Some(other) => {
                errs.push(&join(&p, "wave"), format!("unknown wave {other:?} (cos, sin)"));
                None
            }
        };
        let freq = match term.get("freq") {
            Some(Value::Integer(k)) => Some([*k, 0]),
            Some(Value::Array(a)) if (1..=2).contains(&a.len()) && a.iter().all(Value::is_integer) => {
                let k: Vec<i64> = a.iter().filter_map(Value::as_integer).collect();
                Some([k[0], k.get(1).copied().unwrap_or(0)])
            }
            None => {
                errs.push(&join(&p, "freq"), "missing");
                None
            }
            Some(_) => {
                errs.push(&join(&p, "freq"), "expected an integer or one or two integers");
                None
            }
        };
        match (coeff, wave, freq) {
            (Some(c), Some(w), Some(f)) => {
                poly = poly.with_term(TrigTerm {
                    coeff: c,
                    wave: w,
                    freq: f,
                })
            }
            _ => ok = false,
        }
    }
    ok.then_some(poly)
}

fn parse_step(b: &Table, path: &str, errs: &mut Errors) -> Option<StepFunction> {
    let p = join(path, "h");
    let comps = match b.get("h") {
        None => {
            errs.push(&p, "missing");
            return None;
        }
        Some(Value::Table(t)) => vec![parse_trig(t, &p, &[], errs)?],
        Some(Value::Array(a)) if a.iter().all(|v| as_f64(v).is_some()) => {
            a.iter().map(|v| TrigPolynomial::constant(as_f64(v).unwrap())).collect()
        }
        Some(Value::Array(a)) => {
            let mut out = Vec::new();
            for (i, v) in a.iter().enumerate() {
                let pi = format!("{p}[{i}]");
                match v {
                    Value::Table(t) => out.push(parse_trig(t, &pi, &[], errs)),
                    _ => errs.push(&pi, "expected a table"),
                }
            }
            out.into_iter().collect::<Option<Vec<_>>>()?
        }
        Some(_) => {
            errs.push(&p, "expected a table, an array of tables or a constant vector");
            return None;
        }
    };
    match StepFunction::new(comps) {
        Ok(h) => Some(h),
        Err(e) => {
            errs.push(&p, e);
            None
        }
    }
}

fn parse_hadamard(t: &Table, errs: &mut Errors) -> HadamardConfig {
    let path = "hadamard";
    reject_unknown(t, &["site", "heads", "tails"], path, errs);
    let mut c = HadamardConfig::default();
    if let Some(s) = get_int(t, "site", path, errs) {
        c.site = s;
    }
    let pair = |key: &str, errs: &mut Errors| -> Option<[f64; 2]> {
        let v = get_f64_array(t, key, path, errs)?;
        if v.len() != 2 {
            errs.push(&join(path, key), "expected [re, im]");
            return None;
        }
        Some([v[0], v[1]])
    };
    let heads = pair("heads", errs);
    let tails = pair("tails", errs);
    if heads.is_some() || tails.is_some() {
        c.heads = heads.unwrap_or([0.0, 0.0]);
        c.tails = tails.unwrap_or([0.0, 0.0]);
    }
    if c.heads.iter().chain(&c.tails).all(|v| *v == 0.0) {
        errs.push(path, "the coin state is zero");
    }
    c
}

fn parse_plancherel(t: &Table, errs: &mut Errors) -> Option<PlancherelConfig> {
    let path = "plancherel";
    reject_unknown(
        t,
        &[
            "dim",
            "coin_points",
            "walk_points",
            "refine",
            "phi0",
            "chi0",
            "psi0_file",
        ],
        path,
        errs,
    );
    let dim = get_count(t, "dim", path, errs).unwrap_or(1);
    let coin_points = get_count(t, "coin_points", path, errs);
    let walk_points = get_count(t, "walk_points", path, errs).or(coin_points);
    let refine = get_count(t, "refine", path, errs).unwrap_or(1);
    if coin_points.is_none() {
        errs.push(&join(path, "coin_points"), "missing");
    }
    let grid = match GridSpec::new(dim, coin_points?, walk_points?, refine) {
        Ok(g) => Some(g),
        Err(e) => {
            errs.push(path, e);
            None
        }
    };
    let psi0 = match get_str(t, "psi0_file", path, errs) {
        Some(f) => {
            if t.contains_key("phi0") || t.contains_key("chi0") {
                errs.push(path, "give either psi0_file or phi0/chi0, not both");
            }
            Some(PlancherelPsi0::File(PathBuf::from(f)))
        }
        None => {
            let phi0 = parse_product(t, "phi0", dim, path, errs);
            let chi0 = parse_product(t, "chi0", dim, path, errs);
            Some(PlancherelPsi0::Product {
                phi0: phi0?,
                chi0: chi0?,
            })
        }
    };
    Some(PlancherelConfig {
        grid: grid?,
        psi0: psi0?,
    })
}

fn parse_system(b: &Table, errs: &mut Errors) -> Option<SystemConfig> {
    let path = "birkhoff";
    match get_str(b, "system", path, errs) {
        Some("baker") => {
            for k in ["alpha", "p", "q"] {
                if b.contains_key(k) {
                    errs.push(&join(path, k), "only rotations take a rotation number");
                }
            }
            Some(SystemConfig::Baker)
        }
        Some("rotation") => {
            let rational = (b.get("p"), b.get("q"));
            let alpha = match (b.get("alpha"), rational) {
                (None, (None, None)) => AlphaSpec::Golden,
                (Some(Value::String(s)), (None, None)) if s == "golden" => AlphaSpec::Golden,
                (Some(_), (None, None)) => AlphaSpec::Value(get_f64(b, "alpha", path, errs)?),
                (None, (Some(_), Some(_))) => {
                    let p = get_int(b, "p", path, errs)?;
                    let q = get_int(b, "q", path, errs)?;
                    if q < 1 {
                        errs.push(&join(path, "q"), "must be ≥ 1");
                        return None;
                    }
                    AlphaSpec::Rational { p, q }
                }
                _ => {
                    errs.push(path, "give alpha, or both p and q");
                    return None;
                }
            };
            Some(SystemConfig::Rotation(alpha))
        }
        Some(other) => {
            errs.push(
                &join(path, "system"),
                format!("unknown system {other:?} (rotation, baker)"),
            );
            None
        }
        None => {
            errs.push(&join(path, "system"), "missing");
            None
        }
    }
}

fn parse_coin(b: &Table, errs: &mut Errors) -> Option<CoinConfig> {
    let path = "birkhoff.coin";
    let Some(t) = get_table(b, "coin", "birkhoff", errs) else {
        return (!b.contains_key("coin")).then_some(CoinConfig::Uniform);
    };
    match get_str(t, "kind", path, errs) {
        Some("uniform") => {
            reject_unknown(t, &["kind"], path, errs);
            Some(CoinConfig::Uniform)
        }
        Some("trig") => Some(CoinConfig::Trig(parse_trig(t, path, &["kind"], errs)?)),
        Some("grid") => {
            reject_unknown(t, &["kind", "per_axis", "values"], path, errs);
            let per_axis = get_count(t, "per_axis", path, errs);
            let values = get_f64_array(t, "values", path, errs);
            if per_axis.is_none() || values.is_none() {
                errs.push(path, "a grid coin needs per_axis and values");
            }
            Some(CoinConfig::Grid {
                per_axis: per_axis?,
                values: values?,
            })
        }
        Some(other) => {
            errs.push(
                &join(path, "kind"),
                format!("unknown coin {other:?} (uniform, trig, grid)"),
            );
            None
        }
        None => {
            errs.push(&join(path, "kind"), "missing");
            None
        }
    }
}

fn parse_quadrature(b: &Table, errs: &mut Errors) -> Option<QuadratureConfig> {
    let path = "birkhoff.quadrature";
    let t = get_table(b, "quadrature", "birkhoff", errs)?;
    reject_unknown(t, &["lo", "hi", "points", "omega_cells"], path, errs);
    let q = QuadratureConfig {
        lo: need_f64(t, "lo", path, errs)?,
        hi: need_f64(t, "hi", path, errs)?,
        points: get_count(t, "points", path, errs).unwrap_or(1024),
        omega_cells: get_count(t, "omega_cells", path, errs).unwrap_or(256),
    };
    if !(q.lo < q.hi) {
        errs.push(path, "lo must be below hi");
        return None;
    }
    Some(q)
}

fn parse_birkhoff(b: &Table, errs: &mut Errors) -> Option<BirkhoffConfig> {
    let path = "birkhoff";
    reject_unknown(
        b,
        &[
            "system",
            "alpha",
            "p",
            "q",
            "h",
            "phi0",
            "coin",
            "samples",
            "n_avg",
            "quadrature",
        ],
        path,
        errs,
    );
    let system = parse_system(b, errs);
    let h = parse_step(b, path, errs);
    let dim = h.as_ref().map_or(1, StepFunction::dim);
    let phi0 = parse_product(b, "phi0", dim, path, errs);
    let coin = parse_coin(b, errs);
    let samples = get_count(b, "samples", path, errs).unwrap_or(100_000);
    let n_avg = get_count(b, "n_avg", path, errs).unwrap_or(crate::birkhoff::DEFAULT_N_AVG);
    let quadrature = if b.contains_key("quadrature") {
        Some(parse_quadrature(b, errs)?)
    } else {
        None
    };
    let (system, h, phi0, coin) = (system?, h?, phi0?, coin?);
    let omega_dim = system.omega_dim();
    if let Err(e) = h.validate(omega_dim) {
        errs.push(&join(path, "h"), e);
    }
    if let Err(e) = coin
        .build(omega_dim)
        .and_then(|c| crate::birkhoff::ProductState::new(phi0.clone(), c).map(|_| ()))
    {
        errs.push(&join(path, "coin"), e);
    }
    Some(BirkhoffConfig {
        system,
        h,
        phi0,
        coin,
        samples,
        n_avg,
        quadrature,
    })
}

/// Parses and validates a configuration; on failure returns every problem.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    let mut errs = Errors(Vec::new());
    reject_unknown(
        &doc,
        &[
            "walk",
            "n",
            "seed",
            "output",
            "zeta",
            "hadamard",
            "plancherel",
            "birkhoff",
        ],
        "",
        &mut errs,
    );

    let n = match doc.get("n") {
        Some(Value::Array(a)) if !a.is_empty() => {
            let mut ns = Vec::new();
            for (i, v) in a.iter().enumerate() {
                match v.as_integer() {
                    Some(k) if k >= 1 => ns.push(k as usize),
                    Some(k) => errs.push(&format!("n[{i}]"), format!("must be ≥ 1, got {k}")),
                    None => errs.push(&format!("n[{i}]"), "expected an integer"),
                }
            }
            if ns.windows(2).any(|w| w[1] <= w[0]) {
                errs.push("n", "must be strictly increasing");
            }
            ns
        }
        Some(Value::Integer(k)) if *k >= 1 => vec![*k as usize],
        Some(Value::Integer(k)) => {
            errs.push("n", format!("must be ≥ 1, got {k}"));
            Vec::new()
        }
        None => {
            errs.push("n", "missing");
            Vec::new()
        }
        Some(_) => {
            errs.push("n", "expected a nonempty array of positive integers");
            Vec::new()
        }
    };

    let seed = match get_int(&doc, "seed", "", &mut errs) {
        Some(s) if s < 0 => {
            errs.push("seed", "must be nonnegative");
            None
        }
        s => s.map(|s| s as u64),
    };
    let output = get_str(&doc, "output", "", &mut errs).map(PathBuf::from);

    let mut zeta = ZetaGrid::default();
    if let Some(z) = get_table(&doc, "zeta", "", &mut errs) {
        reject_unknown(z, &["window", "points", "points_2d"], "zeta", &mut errs);
        if let Some(w) = get_f64(z, "window", "zeta", &mut errs) {
            zeta.window = w;
        }
        if let Some(p) = get_count(z, "points", "zeta", &mut errs) {
            zeta.points = p;
        }
        if let Some(p) = get_count(z, "points_2d", "zeta", &mut errs) {
            zeta.points_2d = p;
        }
        if let Err(e) = zeta.validate() {
            errs.push("zeta", e);
        }
    }

    let walk = match get_str(&doc, "walk", "", &mut errs) {
        Some(w @ ("hadamard" | "plancherel" | "birkhoff")) => {
            for other in ["hadamard", "plancherel", "birkhoff"] {
                if other != w && doc.contains_key(other) {
                    errs.push(other, format!("section does not apply to a {w} walk"));
                }
            }
            let section = get_table(&doc, w, "", &mut errs);
            match (w, section) {
                ("hadamard", s) => Some(WalkConfig::Hadamard(match s {
                    Some(t) => parse_hadamard(t, &mut errs),
                    None => HadamardConfig::default(),
                })),
                ("plancherel", Some(t)) => parse_plancherel(t, &mut errs).map(WalkConfig::Plancherel),
                ("birkhoff", Some(t)) => {
                    if seed.is_none() && !doc.contains_key("seed") {
                        errs.push("seed", "required for birkhoff runs (Monte Carlo sampling)");
                    }
                    parse_birkhoff(t, &mut errs).map(WalkConfig::Birkhoff)
                }
                (w, None) => {
                    if !doc.contains_key(w) {
                        errs.push(w, "missing section");
                    }
                    None
                }
                _ => unreachable!(),
            }
        }
        Some(other) => {
            errs.push(
                "walk",
                format!("unknown walk {other:?} (hadamard, plancherel, birkhoff)"),
            );
            None
        }
        None => {
            errs.push("walk", "missing");
            None
        }
    };

    if !errs.0.is_empty() {
        return Err(Error::Config(errs.0));
    }
    Ok(ExperimentConfig {
        walk: walk.expect("no errors means a walk"),
        n,
        seed,
        output,
        zeta,
    })
}

fn profile_value(p: &Profile) -> Value {
    let mut t = Table::new();
    match *p {
        Profile::Gaussian {
            center,
            width,
            momentum,
        } => {
            t.insert("kind".into(), "gaussian".into());
            t.insert("center".into(), center.into());
            t.insert("width".into(), width.into());
            t.insert("momentum".into(), momentum.into());
        }
        Profile::Box { a, b } => {
            t.insert("kind".into(), "box".into());
            t.insert("a".into(), a.into());
            t.insert("b".into(), b.into());
        }
    }
    Value::Table(t)
}

fn product_value(p: &ProductProfile) -> Value {
    Value::Array(p.axes().iter().map(profile_value).collect())
}

fn trig_table(p: &TrigPolynomial) -> Table {
    let mut t = Table::new();
    t.insert("constant".into(), p.constant.into());
    let terms = p
        .terms
        .iter()
        .map(|term| {
            let mut e = Table::new();
            e.insert("coeff".into(), term.coeff.into());
            let wave = match term.wave {
                Wave::Cos => "cos",
                Wave::Sin => "sin",
            };
            e.insert("wave".into(), wave.into());
            e.insert(
                "freq".into(),
                Value::Array(vec![term.freq[0].into(), term.freq[1].into()]),
            );
            Value::Table(e)
        })
        .collect();
    t.insert("terms".into(), Value::Array(terms));
    t
}

fn f64_array(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| Value::Float(*x)).collect())
}

impl ExperimentConfig {
    /// The configuration as a document that [`parse_config`] reads back to
    /// an equal value.
    pub fn to_toml(&self) -> String {
        let mut doc = Table::new();
        doc.insert("walk".into(), self.walk.name().into());
        doc.insert(
            "n".into(),
            Value::Array(self.n.iter().map(|k| Value::Integer(*k as i64)).collect()),
        );
        if let Some(s) = self.seed {
            doc.insert("seed".into(), Value::Integer(s as i64));
        }
        if let Some(o) = &self.output {
            doc.insert("output".into(), o.display().to_string().into());
        }
        let mut z = Table::new();
        z.insert("window".into(), self.zeta.window.into());
        z.insert("points".into(), Value::Integer(self.zeta.points as i64));
        z.insert("points_2d".into(), Value::Integer(self.zeta.points_2d as i64));
        doc.insert("zeta".into(), Value::Table(z));

        let mut w = Table::new();
        match &self.walk {
            WalkConfig::Hadamard(h) => {
                w.insert("site".into(), h.site.into());
                w.insert("heads".into(), f64_array(&h.heads));
                w.insert("tails".into(), f64_array(&h.tails));
            }
            WalkConfig::Plancherel(p) => {
                let g = p.grid;
                w.insert("dim".into(), Value::Integer(g.dim() as i64));
                w.insert("coin_points".into(), Value::Integer(g.coin_points() as i64));
                w.insert("walk_points".into(), Value::Integer(g.walk_points() as i64));
                w.insert("refine".into(), Value::Integer(g.refine() as i64));
                match &p.psi0 {
                    PlancherelPsi0::Product { phi0, chi0 } => {
                        w.insert("phi0".into(), product_value(phi0));
                        w.insert("chi0".into(), product_value(chi0));
                    }
                    PlancherelPsi0::File(f) => {
                        w.insert("psi0_file".into(), f.display().to_string().into());
                    }
                }
            }
            WalkConfig::Birkhoff(b) => {
                match b.system {
                    SystemConfig::Baker => {
                        w.insert("system".into(), "baker".into());
                    }
                    SystemConfig::Rotation(a) => {
                        w.insert("system".into(), "rotation".into());
                        match a {
                            AlphaSpec::Golden => {
                                w.insert("alpha".into(), "golden".into());
                            }
                            AlphaSpec::Value(v) => {
                                w.insert("alpha".into(), v.into());
                            }
                            AlphaSpec::Rational { p, q } => {
                                w.insert("p".into(), p.into());
                                w.insert("q".into(), q.into());
                            }
                        }
                    }
                }
                w.insert(
                    "h".into(),
                    Value::Array(b.h.components().iter().map(|c| Value::Table(trig_table(c))).collect()),
                );
                w.insert("phi0".into(), product_value(&b.phi0));
                let coin = match &b.coin {
                    CoinConfig::Uniform => {
                        let mut t = Table::new();
                        t.insert("kind".into(), "uniform".into());
                        t
                    }
                    CoinConfig::Trig(p) => {
                        let mut t = trig_table(p);
                        t.insert("kind".into(), "trig".into());
                        t
                    }
                    CoinConfig::Grid { per_axis, values } => {
                        let mut t = Table::new();
                        t.insert("kind".into(), "grid".into());
                        t.insert("per_axis".into(), Value::Integer(*per_axis as i64));
                        t.insert("values".into(), f64_array(values));
                        t
                    }
                };
                w.insert("coin".into(), Value::Table(coin));
                w.insert("samples".into(), Value::Integer(b.samples as i64));
                w.insert("n_avg".into(), Value::Integer(b.n_avg as i64));
                if let Some(q) = b.quadrature {
                    let mut t = Table::new();
                    t.insert("lo".into(), q.lo.into());
                    t.insert("hi".into(), q.hi.into());
                    t.insert("points".into(), Value::Integer(q.points as i64));
                    t.insert("omega_cells".into(), Value::Integer(q.omega_cells as i64));
                    w.insert("quadrature".into(), Value::Table(t));
                }
            }
        }
        doc.insert(self.walk.name().into(), Value::Table(w));
        toml::to_string(&doc).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLANCHEREL: &str = r#"
walk = "plancherel"
n = [4, 8]
[plancherel]
coin_points = 64
walk_points = 128
phi0 = { kind = "gaussian" }
chi0 = { kind = "box", a = -1.0, b = 1.0 }
"#;

    const BIRKHOFF: &str = r#"
walk = "birkhoff"
n = [100, 1000]
seed = 3
[birkhoff]
system = "rotation"
p = 1
q = 2
h = { terms = [{ coeff = 1.0, wave = "cos", freq = 2 }] }
phi0 = { kind = "box", a = -1, b = 1 }
coin = { kind = "trig", constant = 1.0, terms = [{ coeff = 0.5, wave = "sin", freq = [1] }] }
samples = 1000
quadrature = { lo = -3.0, hi = 3.0 }
"#;

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_plancherel_parses() {
        let c = parse_config(PLANCHEREL).unwrap();
        assert_eq!(c.n, vec![4, 8]);
        let WalkConfig::Plancherel(p) = &c.walk else { panic!() };
        assert_eq!(p.grid, GridSpec::new(1, 64, 128, 1).unwrap());
        assert_eq!(c.zeta, ZetaGrid::default());
    }

    #[test]
    fn zero_horizon_is_named() {
        let e = errors(&PLANCHEREL.replace("n = [4, 8]", "n = [4, 0]"));
        assert!(e.iter().any(|m| m.starts_with("n[1]")), "{e:?}");
    }

    #[test]
    fn birkhoff_needs_a_seed() {
        let e = errors(&BIRKHOFF.replace("seed = 3", ""));
        assert!(e.iter().any(|m| m.starts_with("seed")), "{e:?}");
    }

    #[test]
    fn all_errors_are_reported() {
        let text = PLANCHEREL
            .replace("coin_points = 64", "coin_points = 60\ncolour = 1")
            .replace("walk = \"plancherel\"", "walk = \"plancherel\"\nbogus = true");
        let e = errors(&text);
        assert!(e.iter().any(|m| m.starts_with("bogus")));
        assert!(e.iter().any(|m| m.starts_with("plancherel.colour")));
        assert!(e.iter().any(|m| m.contains("power of two")));
    }

    #[test]
    fn round_trip() {
        for text in [PLANCHEREL, BIRKHOFF, "walk = \"hadamard\"\nn = [10, 20]\n"] {
            let c = parse_config(text).unwrap();
            let back = parse_config(&c.to_toml()).unwrap();
            assert_eq!(back, c);
        }
    }
}
