//! Isentropes `β = Ψ_M(α)`, their diagonal limits, zero-set scans of `Θ` and
//! parameter-plane rasters.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::algebraic::{
    compose_branch_condition, diagonal_critical_points, slope_at_diagonal, AlgebraicError,
};
use crate::exec::Execution;
use crate::symbolic::{compare_prefix, symbols_to_string, KneadingSeq, Symbol, Word};
use crate::tentmap::{TentError, TentParams};
use crate::theta::{theta_eval, Quadratic2D, ThetaError, ThetaSpec, COUNTEREXAMPLE_ALPHA0};

/// Symbols compared when ordering a kneading prefix against a target.
pub const DEFAULT_DEPTH: usize = 64;
/// Bracket width at which bisection in `β` stops.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Longest prefix checked by `kneading_ok`.
pub const VERIFY_DEPTH: usize = 24;
/// Distance from `α` below which an orbit point reads as `C`.
pub const EPS_C: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error(transparent)]
    Tent(#[from] TentError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Algebraic(#[from] AlgebraicError),
    #[error("no bracket at alpha={alpha}: kneading is {lo:?} at the bottom and {hi:?} at the top")]
    NoBracket {
        alpha: f64,
        lo: Ordering,
        hi: Ordering,
    },
    #[error("non-monotone kneading order at alpha={alpha}, beta={beta}")]
    NonMonotone { alpha: f64, beta: f64 },
    #[error("no sign change of theta in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("raster window has zero area or leaves [0,1]^2")]
    BadWindow,
    #[error("raster needs at least 2x2 pixels")]
    BadSize,
    #[error("cannot parse {what}: {text}")]
    Parse { what: &'static str, text: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsentropePoint {
    pub alpha: f64,
    pub beta: f64,
    /// `Θ_M(α, β)`, when `M` defines a convergent series there.
    pub residual_theta: Option<f64>,
    pub kneading_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectOptions {
    pub depth: usize,
    pub tol: f64,
}

impl Default for BisectOptions {
    fn default() -> Self {
        BisectOptions {
            depth: DEFAULT_DEPTH,
            tol: DEFAULT_TOL,
        }
    }
}

/// Order of `K(α, β)` against `m`, read to `depth` symbols.
pub fn kneading_order(
    m: &KneadingSeq,
    alpha: f64,
    beta: f64,
    depth: usize,
) -> Result<Ordering, CurveError> {
    let p = TentParams::new(alpha, beta)?;
    Ok(compare_prefix(&p.kneading_prefix(depth), m, depth))
}

/// Bottom of the search bracket on the vertical through `α`.
pub fn bracket_floor(alpha: f64) -> f64 {
    alpha.max(1.0 - alpha).max(0.5) + 1e-9
}

fn is_r_l_infinity(m: &KneadingSeq) -> bool {
    m.preperiod() == [Symbol::R] && m.period() == Some(&[Symbol::L][..])
}

/// The point of the isentrope of `m` above `α`, by bisection on `β` using
/// monotonicity of the kneading order along verticals.
pub fn kneading_bisect_beta(
    m: &KneadingSeq,
    alpha: f64,
    opts: BisectOptions,
) -> Result<IsentropePoint, CurveError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(TentError::BadParams {
            alpha,
            beta: f64::NAN,
        }
        .into());
    }
    if is_r_l_infinity(m) {
        return Ok(finish(m, alpha, 1.0, opts));
    }
    let mut lo = bracket_floor(alpha);
    let mut hi = 1.0;
    if lo >= hi {
        return Err(CurveError::NoBracket {
            alpha,
            lo: Ordering::Equal,
            hi: Ordering::Equal,
        });
    }
    let c_lo = kneading_order(m, alpha, lo, opts.depth)?;
    let c_hi = kneading_order(m, alpha, hi, opts.depth)?;
    match (c_lo, c_hi) {
        (Ordering::Equal, _) => return Ok(finish(m, alpha, lo, opts)),
        (_, Ordering::Equal) => return Ok(finish(m, alpha, hi, opts)),
        (Ordering::Less, Ordering::Greater) => {}
        (Ordering::Greater, Ordering::Less) => {
            return Err(CurveError::NonMonotone { alpha, beta: lo })
        }
        (lo, hi) => return Err(CurveError::NoBracket { alpha, lo, hi }),
    }
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match kneading_order(m, alpha, mid, opts.depth)? {
            Ordering::Less => lo = mid,
            Ordering::Greater => hi = mid,
            Ordering::Equal => return Ok(finish(m, alpha, mid, opts)),
        }
    }
    Ok(finish(m, alpha, 0.5 * (lo + hi), opts))
}

fn finish(m: &KneadingSeq, alpha: f64, beta: f64, opts: BisectOptions) -> IsentropePoint {
    let residual_theta = ThetaSpec::from_sequence(m)
        .ok()
        .and_then(|s| theta_eval(&s, alpha, beta).ok())
        .map(|v| v.value);
    IsentropePoint {
        alpha,
        beta,
        residual_theta,
        kneading_ok: kneading_matches(m, alpha, beta, opts.tol),
    }
}

/// Whether the itinerary of `β` agrees with `m` on the symbols that a `β`
/// error of `tol` cannot flip: the check stops once the accumulated slope
/// product times `tol` exceeds `1e-6`, or at [`VERIFY_DEPTH`]. A finite `m`
/// must be matched in full, including its `C`.
pub fn kneading_matches(m: &KneadingSeq, alpha: f64, beta: f64, tol: f64) -> bool {
    let Ok(p) = TentParams::new(alpha, beta) else {
        return false;
    };
    let want = match m.finite_len() {
        Some(n) => n,
        None => VERIFY_DEPTH,
    };
    let mut x = beta;
    let mut gain = 1.0f64;
    for i in 0..want {
        let target = m.symbol_at(i).expect("index within target");
        let s = if (x - alpha).abs() <= EPS_C.max(gain * tol) {
            Symbol::C
        } else if x < alpha {
            Symbol::L
        } else {
            Symbol::R
        };
        if s != target {
            return false;
        }
        if s == Symbol::C {
            return true;
        }
        gain *= if s == Symbol::L {
            p.left_slope()
        } else {
            p.right_slope()
        };
        if m.finite_len().is_none() && gain * tol > 1e-6 {
            return i >= 1;
        }
        x = p.apply(x);
    }
    true
}

/// One [`kneading_bisect_beta`] per node; failures are reported per node.
pub fn trace_isentrope(
    m: &KneadingSeq,
    alphas: &[f64],
    opts: BisectOptions,
    exec: Execution,
) -> Vec<Result<IsentropePoint, CurveError>> {
    exec.map(alphas, |&a| kneading_bisect_beta(m, a, opts))
}

/// `n ≥ 2` evenly spaced nodes from `a0` to `a1` inclusive.
pub fn linspace(a0: f64, a1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a0],
        _ => (0..n)
            .map(|i| a0 + (a1 - a0) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KneadingRelation {
    Less,
    EqualWithinDepth,
    Greater,
}

impl From<Ordering> for KneadingRelation {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => KneadingRelation::Less,
            Ordering::Equal => KneadingRelation::EqualWithinDepth,
            Ordering::Greater => KneadingRelation::Greater,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRoot {
    pub beta: f64,
    pub relation: KneadingRelation,
    pub kneading_prefix: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub samples: usize,
    pub depth: usize,
    /// Sequence the roots are labeled against; defaults to the gap sequence
    /// of the spec.
    pub target: Option<KneadingSeq>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            samples: 2000,
            depth: DEFAULT_DEPTH,
            target: None,
        }
    }
}

/// Zeros of `β ↦ Θ(α₀, β)` on `[beta_lo, beta_hi]`, each labeled by how the
/// kneading sequence there compares with the target.
pub fn counterexample_scan(
    spec: &ThetaSpec,
    alpha0: f64,
    beta_lo: f64,
    beta_hi: f64,
    opts: &ScanOptions,
    exec: Execution,
) -> Result<Vec<ScanRoot>, CurveError> {
    let samples = opts.samples.max(2);
    let h = |b: f64| theta_eval(spec, alpha0, b).map(|v| v.value).ok();
    let xs = linspace(beta_lo, beta_hi, samples + 1);
    let ys = exec.map(&xs, |&b| h(b));
    let target = opts
        .target
        .clone()
        .unwrap_or_else(|| spec.gaps().to_sequence());

    let mut brackets = Vec::new();
    for i in 0..samples {
        match (ys[i], ys[i + 1]) {
            (Some(0.0), _) => brackets.push((xs[i], xs[i])),
            (Some(y0), Some(y1)) if y0.signum() != y1.signum() && y1 != 0.0 => {
                brackets.push((xs[i], xs[i + 1]))
            }
            _ => {}
        }
    }
    if ys[samples] == Some(0.0) {
        brackets.push((xs[samples], xs[samples]));
    }
    if brackets.is_empty() {
        return Err(CurveError::NoSignChange {
            lo: beta_lo,
            hi: beta_hi,
        });
    }
    let roots = exec.map(&brackets, |&(a, b)| refine_root(&h, a, b));
    roots
        .into_iter()
        .map(|beta| {
            let p = TentParams::new(alpha0, beta)?;
            let k = p.itinerary(beta, opts.depth, EPS_C);
            Ok(ScanRoot {
                beta,
                relation: compare_prefix(&k, &target, opts.depth).into(),
                kneading_prefix: symbols_to_string(&k),
            })
        })
        .collect()
}

fn refine_root(h: &impl Fn(f64) -> Option<f64>, mut a: f64, mut b: f64) -> f64 {
    let Some(mut fa) = h(a) else {
        return 0.5 * (a + b);
    };
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let Some(fm) = h(mid) else { break };
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// A diagonal point where the isentrope of a finite word may end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalLimit {
    pub beta0: f64,
    /// `p/q` when `β₀` is rational.
    pub exact: Option<String>,
    pub quadratic: Option<Quadratic2D>,
    pub slopes: Option<(f64, f64)>,
    pub isentrope_slope: Option<f64>,
    /// Whether bisection just left of `β₀` lands next to it.
    pub matches_trace: bool,
}

/// Diagonal critical points of the branch polynomial of `word`, with slopes,
/// each checked against the isentrope by bisecting at `β₀ - δ`.
pub fn diagonal_limits(word: &Word, delta: f64) -> Result<Vec<DiagonalLimit>, CurveError> {
    let p = compose_branch_condition(word)?;
    let m =
        KneadingSeq::finite(word.symbols()[..word.len() - 1].to_vec()).map_err(ThetaError::from)?;
    let roots = diagonal_critical_points(&p)?;
    Ok(roots
        .into_iter()
        .map(|r| {
            let slope = match &r.exact {
                Some(q) => crate::algebraic::slope_at_rational_diagonal(&p, q),
                None => slope_at_diagonal(&p, r.beta0),
            };
            let matches_trace = kneading_bisect_beta(&m, r.beta0 - delta, BisectOptions::default())
                .map(|pt| (pt.beta - r.beta0).abs() <= 10.0 * delta)
                .unwrap_or(false);
            DiagonalLimit {
                beta0: r.beta0,
                exact: r
                    .exact
                    .as_ref()
                    .map(|q| format!("{}/{}", q.numer(), q.denom())),
                quadratic: slope.as_ref().ok().map(|s| s.quadratic),
                slopes: slope.as_ref().ok().map(|s| s.slopes),
                isentrope_slope: slope.ok().map(|s| s.isentrope_slope),
                matches_trace,
            }
        })
        .collect())
}

/// Named specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// The hand-built counterexample gap sequence, probed at `α₀ = 0.4875`.
    Counterexample,
    /// `K(0.5, 0.815)` truncated to 48 symbols.
    K0815,
    /// `K(0.5, 0.99179142171225)` truncated to 48 symbols.
    K0992,
}

/// An exceptional `β₀` on the vertical `α = 1/2`, kept for demos.
pub const EXCEPTIONAL_BETA0: f64 = 0.99179142171225;

impl Preset {
    pub fn spec(self) -> Result<ThetaSpec, CurveError> {
        match self {
            Preset::Counterexample => Ok(ThetaSpec::counterexample()),
            Preset::K0815 => Self::from_point(0.5, 0.815),
            Preset::K0992 => Self::from_point(0.5, EXCEPTIONAL_BETA0),
        }
    }

    /// The `α` the preset is meant to be probed at.
    pub fn alpha0(self) -> f64 {
        match self {
            Preset::Counterexample => COUNTEREXAMPLE_ALPHA0,
            Preset::K0815 | Preset::K0992 => 0.5,
        }
    }

    fn from_point(alpha: f64, beta: f64) -> Result<ThetaSpec, CurveError> {
        let prefix = TentParams::new(alpha, beta)?.kneading_prefix(48);
        Ok(ThetaSpec::from_prefix(&prefix)?)
    }
}

impl FromStr for Preset {
    type Err = CurveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "thex" => Ok(Preset::Counterexample),
            "k0815" => Ok(Preset::K0815),
            "k0992" => Ok(Preset::K0992),
            _ => Err(CurveError::Parse {
                what: "preset",
                text: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Window {
    pub fn new(
        alpha_min: f64,
        alpha_max: f64,
        beta_min: f64,
        beta_max: f64,
    ) -> Result<Self, CurveError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(alpha_min < alpha_max && beta_min < beta_max)
            || ![alpha_min, alpha_max, beta_min, beta_max]
                .into_iter()
                .all(unit)
        {
            return Err(CurveError::BadWindow);
        }
        Ok(Window {
            alpha_min,
            alpha_max,
            beta_min,
            beta_max,
        })
    }
}

impl FromStr for Window {
    type Err = CurveError;

    /// `a0,a1,b0,b1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || CurveError::Parse {
            what: "window",
            text: s.into(),
        };
        let v: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| err()))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [a0, a1, b0, b1] => Window::new(a0, a1, b0, b1),
            _ => Err(err()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    ThetaValue(ThetaSpec),
    ThetaSign(ThetaSpec),
    KneadingClass { depth: usize },
}

impl Field {
    pub fn name(&self) -> &'static str {
        match self {
            Field::ThetaValue(_) => "theta_value",
            Field::ThetaSign(_) => "theta_sign",
            Field::KneadingClass { .. } => "kneading_class",
        }
    }
}

/// Row-major pixel values; row 0 is the top edge `β = beta_max`, column 0 is
/// `α = alpha_min`, and both edges are sampled. Invalid pixels hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub field: &'static str,
    pub values: Vec<f64>,
    /// For `kneading_class`, the prefix of each class id.
    pub legend: Vec<String>,
}

impl RasterGrid {
    pub fn alpha_at(&self, col: usize) -> f64 {
        pixel_coord(
            self.window.alpha_min,
            self.window.alpha_max,
            col,
            self.width,
        )
    }

    pub fn beta_at(&self, row: usize) -> f64 {
        pixel_coord(self.window.beta_max, self.window.beta_min, row, self.height)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// `(min, max)` over non-NaN pixels.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.values
            .iter()
            .filter(|v| !v.is_nan())
            .fold(None, |acc, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }

    /// `alpha,beta,value` rows with round-trip float formatting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "alpha,beta,value")?;
        for row in 0..self.height {
            for col in 0..self.width {
                writeln!(
                    out,
                    "{},{},{}",
                    self.alpha_at(col),
                    self.beta_at(row),
                    self.get(row, col)
                )?;
            }
        }
        Ok(())
    }

    /// Binary P5 image, finite values mapped affinely onto `0..=254`, NaN to
    /// 255. Returns the sidecar metadata describing the mapping.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<PgmSidecar> {
        let (min, max) = self.range().unwrap_or((0.0, 0.0));
        let span = max - min;
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self
            .values
            .iter()
            .map(|&v| {
                if v.is_nan() {
                    SENTINEL_GRAY
                } else if span > 0.0 {
                    ((v - min) / span * GRAY_MAX as f64)
                        .round()
                        .clamp(0.0, GRAY_MAX as f64) as u8
                } else {
                    0
                }
            })
            .collect();
        out.write_all(&bytes)?;
        Ok(PgmSidecar {
            window: self.window,
            width: self.width,
            height: self.height,
            field: self.field.to_string(),
            min,
            max,
            gray_max: GRAY_MAX,
            sentinel_gray: SENTINEL_GRAY,
            legend: self.legend.clone(),
        })
    }
}

pub const GRAY_MAX: u8 = 254;
pub const SENTINEL_GRAY: u8 = 255;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgmSidecar {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub field: String,
    pub min: f64,
    pub max: f64,
    pub gray_max: u8,
    pub sentinel_gray: u8,
    pub legend: Vec<String>,
}

/// `<path>.json` next to a `.pgm` file.
pub fn sidecar_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("json")
}

fn pixel_coord(start: f64, end: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        end
    } else {
        start + (end - start) * i as f64 / (n - 1) as f64
    }
}

enum Pixel {
    Value(f64),
    Class(Vec<Symbol>),
    Invalid,
}

pub fn raster(
    field: &Field,
    window: Window,
    width: usize,
    height: usize,
    exec: Execution,
) -> Result<RasterGrid, CurveError> {
    if width < 2 || height < 2 {
        return Err(CurveError::BadSize);
    }
    let mut grid = RasterGrid {
        window,
        width,
        height,
        field: field.name(),
        values: Vec::new(),
        legend: Vec::new(),
    };
    let pixels = exec.map_range(width * height, |idx| {
        let (row, col) = (idx / width, idx % width);
        let (a, b) = (grid.alpha_at(col), grid.beta_at(row));
        match field {
            Field::ThetaValue(spec) => theta_eval(spec, a, b)
                .map(|v| Pixel::Value(v.value))
                .unwrap_or(Pixel::Invalid),
            Field::ThetaSign(spec) => theta_eval(spec, a, b)
                .map(|v| Pixel::Value(sign(v.value)))
                .unwrap_or(Pixel::Invalid),
            Field::KneadingClass { depth } => TentParams::new(a, b)
                .map(|p| Pixel::Class(p.kneading_prefix(*depth)))
                .unwrap_or(Pixel::Invalid),
        }
    });
    let mut ids: HashMap<Vec<Symbol>, usize> = HashMap::new();
    grid.values = pixels
        .into_iter()
        .map(|px| match px {
            Pixel::Value(v) => v,
            Pixel::Invalid => f64::NAN,
            Pixel::Class(k) => {
                let next = ids.len();
                let id = *ids.entry(k.clone()).or_insert_with(|| {
                    grid.legend.push(symbols_to_string(&k));
                    next
                });
                id as f64
            }
        })
        .collect();
    Ok(grid)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}
