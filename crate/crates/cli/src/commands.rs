//! Command implementations: each produces an `ExperimentReport`.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use fhl_core::arith::{floor_root_of_ratio, parse_rational, rational_from_f64};
use fhl_core::error::Budget;
use fhl_core::hypersurface::{sample_space, HeightCap, Hypersurface, MinHeightResult, PointTable};
use fhl_core::lattice::{
    kernel_lattice, orthogonal_det_squared_formula, IntegralLattice,
};
use fhl_core::manin::{theorem2_report, Theorem2Mode, Theorem2Report};
use fhl_core::monomials::MonomialBasis;

use crate::report::ExperimentReport;

pub fn parse_vector(s: &str) -> Result<Vec<i128>> {
    s.split(',')
        .map(|p| p.trim().parse::<i128>().map_err(|_| anyhow!("bad integer '{p}'")))
        .collect()
}

pub fn parse_basis(s: &str) -> Result<Vec<Vec<i128>>> {
    s.split(';').map(parse_vector).collect()
}

fn rational(s: &str) -> Result<BigRational> {
    parse_rational(s).map_err(|e| anyhow!(e.to_string()))
}

/// Exact values in reports: plain integers when they fit, `p/q` otherwise.
fn value_from_bigint(v: &BigInt) -> Value {
    if let Some(u) = v.to_u64() {
        return json!(u);
    }
    if let Some(i) = v.to_i64() {
        return json!(i);
    }
    json!(v.to_string())
}

fn value_from_rational(r: &BigRational) -> Value {
    if r.denom().is_one() {
        value_from_bigint(r.numer())
    } else {
        json!(format!("{}/{}", r.numer(), r.denom()))
    }
}

fn value_from_f64(x: f64) -> Result<Value> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| anyhow!("non-finite value in report"))
}

fn coeff_string(coeffs: &[i128]) -> String {
    coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

pub fn cmd_count(
    d: u32,
    n: usize,
    coeffs: &[i128],
    height_bound: &str,
    budget: &Budget,
) -> Result<ExperimentReport> {
    let bound = rational(height_bound)?;
    let surface = Hypersurface::new(d, n, coeffs)?;
    let count = surface.count_rational_points(&bound, budget)?;
    let mut params = BTreeMap::new();
    params.insert("d".into(), json!(d));
    params.insert("n".into(), json!(n));
    params.insert("coeffs".into(), json!(coeff_string(surface.coeffs())));
    params.insert("B".into(), value_from_rational(&bound));
    let results = json!({ "count": count });
    Ok(ExperimentReport::new("count", params, results, 0))
}

pub fn cmd_minheight(
    d: u32,
    n: usize,
    coeffs: &[i128],
    cap: &str,
    budget: &Budget,
) -> Result<ExperimentReport> {
    let surface = Hypersurface::new(d, n, coeffs)?;
    let (cap_value, cap_desc) = if cap == "auto" {
        if d != 2 || n != 2 {
            bail!("--cap auto (the conic search bound) requires d = 2, n = 2");
        }
        (HeightCap::davenport(&surface), "davenport".to_string())
    } else {
        (HeightCap::from_value(&rational(cap)?)?, cap.to_string())
    };
    let outcome = surface.min_height(&cap_value, budget)?;

    let mut params = BTreeMap::new();
    params.insert("d".into(), json!(d));
    params.insert("n".into(), json!(n));
    params.insert("coeffs".into(), json!(coeff_string(surface.coeffs())));
    params.insert("cap".into(), json!(cap_desc));

    let mut results = Map::new();
    results.insert("cap_squared".into(), value_from_rational(cap_value.squared()));
    match outcome {
        MinHeightResult::Found { height, witness } => {
            results.insert("status".into(), json!("found"));
            results.insert("value_squared".into(), value_from_bigint(&height.norm_squared));
            results.insert("exponent".into(), json!(height.exponent));
            results.insert("value".into(), value_from_f64(height.value())?);
            results.insert(
                "witness".into(),
                json!(coeff_string(witness.coords())),
            );
        }
        MinHeightResult::EmptyProven => {
            results.insert("status".into(), json!("empty_proven"));
        }
        MinHeightResult::Unknown { .. } => {
            results.insert("status".into(), json!("unknown"));
        }
    }
    Ok(ExperimentReport::new("minheight", params, Value::Object(results), 0))
}

pub enum LatticeSpec {
    Dim(usize),
    KernelOf(Vec<Vec<i128>>),
    Basis(Vec<Vec<i128>>),
}

impl LatticeSpec {
    fn build(&self) -> Result<IntegralLattice> {
        match self {
            LatticeSpec::Dim(n) => Ok(IntegralLattice::standard(*n)),
            LatticeSpec::KernelOf(cs) => Ok(kernel_lattice(cs)?),
            LatticeSpec::Basis(cols) => {
                let ambient = cols.first().map(|c| c.len()).unwrap_or(0);
                Ok(IntegralLattice::from_columns(ambient, cols.clone())?)
            }
        }
    }

    fn describe(&self, params: &mut BTreeMap<String, Value>) {
        match self {
            LatticeSpec::Dim(n) => {
                params.insert("dim".into(), json!(n));
            }
            LatticeSpec::KernelOf(cs) => {
                let joined: Vec<String> = cs.iter().map(|c| coeff_string(c)).collect();
                params.insert("kernel_of".into(), json!(joined.join(";")));
            }
            LatticeSpec::Basis(cols) => {
                let joined: Vec<String> = cols.iter().map(|c| coeff_string(c)).collect();
                params.insert("basis".into(), json!(joined.join(";")));
            }
        }
    }
}

pub fn cmd_lattice_det(spec: &LatticeSpec) -> Result<ExperimentReport> {
    let lat = spec.build()?;
    let mut params = BTreeMap::new();
    spec.describe(&mut params);
    let results = json!({
        "rank": lat.rank(),
        "ambient_dim": lat.ambient_dim(),
        "det_squared": value_from_bigint(&lat.det_squared()),
    });
    Ok(ExperimentReport::new("lattice.det", params, results, 0))
}

pub fn cmd_lattice_ortho(constraints: &[Vec<i128>]) -> Result<ExperimentReport> {
    let formula = orthogonal_det_squared_formula(constraints)?;
    let kernel = kernel_lattice(constraints)?;
    let kernel_det_sq = kernel.det_squared();
    let agree = formula == BigRational::from_integer(kernel_det_sq.clone());
    let mut params = BTreeMap::new();
    let joined: Vec<String> = constraints.iter().map(|c| coeff_string(c)).collect();
    params.insert("c".into(), json!(joined.join(";")));
    let results = json!({
        "rank": kernel.rank(),
        "det_squared": value_from_rational(&formula),
        "det_squared_from_kernel_basis": value_from_bigint(&kernel_det_sq),
        "routes_agree": agree,
    });
    Ok(ExperimentReport::new("lattice.ortho", params, results, 0))
}

pub fn cmd_lattice_minima(spec: &LatticeSpec, bound: &str, budget: &Budget) -> Result<ExperimentReport> {
    let lat = spec.build()?;
    let bound = rational(bound)?;
    if bound.is_negative() {
        bail!("bound must be non-negative");
    }
    let minima = lat.successive_minima_sq(&(&bound * &bound), budget)?;
    let mut params = BTreeMap::new();
    spec.describe(&mut params);
    params.insert("bound".into(), value_from_rational(&bound));
    let values: Vec<String> = minima.values_squared.iter().map(|v| v.to_string()).collect();
    let results = json!({
        "rank": lat.rank(),
        "minima_squared": values.join(";"),
    });
    Ok(ExperimentReport::new("lattice.minima", params, results, 0))
}

pub fn cmd_lattice_count(spec: &LatticeSpec, radius: &str, budget: &Budget) -> Result<ExperimentReport> {
    let lat = spec.build()?;
    let radius = rational(radius)?;
    let count = lat.count_points(&radius, budget)?;
    let mut params = BTreeMap::new();
    spec.describe(&mut params);
    params.insert("T".into(), value_from_rational(&radius));
    let results = json!({
        "count": u64::try_from(count).map_err(|_| anyhow!("count exceeds u64"))?,
    });
    Ok(ExperimentReport::new("lattice.count", params, results, 0))
}

pub fn cmd_lattice_primitive(
    spec: &LatticeSpec,
    radius: &str,
    method: &str,
    budget: &Budget,
) -> Result<ExperimentReport> {
    let lat = spec.build()?;
    let radius = rational(radius)?;
    let radius_sq = &radius * &radius;
    let mut params = BTreeMap::new();
    spec.describe(&mut params);
    params.insert("T".into(), value_from_rational(&radius));
    params.insert("method".into(), json!(method));
    let mut results = Map::new();
    match method {
        "direct" => {
            let c = lat.count_primitive_points_direct_sq(&radius_sq, budget)?;
            results.insert("count".into(), json!(u64::try_from(c)?));
        }
        "moebius" => {
            let c = lat.count_primitive_points_moebius_sq(&radius_sq, budget)?;
            results.insert("count".into(), json!(u64::try_from(c)?));
        }
        "both" => {
            let (a, b) = lat.count_primitive_points_both_sq(&radius_sq, budget)?;
            results.insert("count".into(), json!(u64::try_from(a)?));
            results.insert("count_moebius".into(), json!(u64::try_from(b)?));
            results.insert("routes_agree".into(), json!(a == b));
        }
        other => bail!("unknown method '{other}' (expected direct|moebius|both)"),
    }
    Ok(ExperimentReport::new("lattice.primitive", params, Value::Object(results), 0))
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_theorem2(
    d: u32,
    n: usize,
    coeff_bound: &str,
    height_bound: &str,
    mode: &str,
    samples: u64,
    constant_samples: u64,
    seed: u64,
    budget: &Budget,
) -> Result<ExperimentReport> {
    let a = rational(coeff_bound)?;
    let b = rational(height_bound)?;
    let mode_enum = match mode {
        "exact" => Theorem2Mode::Exact,
        "sampled" => Theorem2Mode::Sampled,
        other => bail!("unknown mode '{other}' (expected exact|sampled)"),
    };
    let report = theorem2_report(d, n, &a, &b, mode_enum, samples, constant_samples, seed, budget)?;

    let mut params = BTreeMap::new();
    params.insert("d".into(), json!(d));
    params.insert("n".into(), json!(n));
    params.insert("A".into(), value_from_rational(&a));
    params.insert("B".into(), value_from_rational(&b));
    params.insert("mode".into(), json!(mode));
    params.insert("samples".into(), json!(samples));
    params.insert("constant_samples".into(), json!(constant_samples));

    let results = theorem2_results(&report)?;
    Ok(ExperimentReport::new("theorem2", params, results, seed))
}

fn theorem2_results(r: &Theorem2Report) -> Result<Value> {
    let mut m = Map::new();
    m.insert("average".into(), value_from_f64(r.average)?);
    if let Some(exact) = &r.average_exact {
        m.insert("average_exact".into(), value_from_rational(exact));
    }
    if let Some(se) = r.std_error {
        m.insert("std_error".into(), value_from_f64(se)?);
    }
    m.insert("prediction".into(), value_from_f64(r.prediction)?);
    m.insert("ratio".into(), value_from_f64(r.ratio)?);
    m.insert("error_envelope".into(), value_from_f64(r.error_envelope)?);
    if let Some(agrees) = r.dual_agrees {
        m.insert("dual_agrees".into(), json!(agrees));
    }
    if let Some(space) = r.space_size {
        m.insert("space_size".into(), json!(u64::try_from(space)?));
    }
    if let Some(total) = &r.total {
        m.insert("total".into(), value_from_rational(total));
    }
    let c = &r.constant;
    m.insert(
        "constant".into(),
        json!({
            "value": value_from_f64(c.value)?,
            "std_error": value_from_f64(c.std_error)?,
            "samples": c.samples,
            "zeta_dim": value_from_f64(c.components.zeta_dim)?,
            "volume_ratio": value_from_f64(c.components.volume_ratio)?,
            "zeta_ratio": value_from_f64(c.components.zeta_ratio)?,
            "integral": value_from_f64(c.components.integral)?,
            "integral_std_error": value_from_f64(c.components.integral_std_error)?,
        }),
    );
    Ok(Value::Object(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiFamily {
    Linear,
    Power,
    LogDamp,
}

impl PsiFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(PsiFamily::Linear),
            "power" => Ok(PsiFamily::Power),
            "logdamp" => Ok(PsiFamily::LogDamp),
            other => bail!("unknown psi family '{other}' (expected linear|power|logdamp)"),
        }
    }
}

/// Squared threshold psi(||a||)^2 as an exact rational. Linear thresholds
/// are exact by cross-multiplication; the other families go through the
/// (exactly representable) double value.
fn psi_squared(family: PsiFamily, param: &BigRational, coeff_norm_sq: &BigInt) -> Result<BigRational> {
    match family {
        PsiFamily::Linear => Ok(param * param * BigRational::from_integer(coeff_norm_sq.clone())),
        PsiFamily::Power => {
            let c = param.to_f64().context("psi parameter out of range")?;
            if !(0.0..1.0).contains(&c) {
                bail!("power family needs 0 <= c < 1");
            }
            let u_sq = coeff_norm_sq.to_f64().context("coefficient norm overflow")?;
            Ok(rational_from_f64(u_sq.powf(c))?)
        }
        PsiFamily::LogDamp => {
            let c = param.to_f64().context("psi parameter out of range")?;
            if c <= 0.0 {
                bail!("logdamp family needs c > 0");
            }
            let u_sq = coeff_norm_sq.to_f64().context("coefficient norm overflow")?;
            let log_u = 0.5 * u_sq.ln();
            if log_u <= 0.0 {
                bail!("logdamp threshold undefined for coefficient norm <= 1");
            }
            Ok(rational_from_f64(c * c * u_sq / log_u)?)
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_theorem1(
    d: u32,
    n: usize,
    coeff_bound: &str,
    psi: &str,
    psi_param: &str,
    samples: u64,
    seed: u64,
    budget: &Budget,
) -> Result<ExperimentReport> {
    if samples == 0 {
        bail!("need at least one sample");
    }
    if n < d as usize {
        bail!("need n >= d for the height to be defined");
    }
    let family = PsiFamily::parse(psi)?;
    let param = rational(psi_param)?;
    let a = rational(coeff_bound)?;
    let exp = (n + 1 - d as usize) as u32;
    let surfaces = sample_space(d, n, &a, samples as usize, seed)?;

    // Squared-norm search caps per sample, plus the conic decision cap.
    let conics = d == 2 && n == 2;
    let mut caps = Vec::with_capacity(surfaces.len());
    let mut davenport_caps = Vec::with_capacity(if conics { surfaces.len() } else { 0 });
    let mut table_cap: i64 = 0;
    for v in &surfaces {
        let norm_sq = v.coeff_norm_squared();
        let psi_sq = psi_squared(family, &param, &norm_sq)?;
        let cap = floor_root_of_ratio(&psi_sq, exp).to_i64().ok_or_else(|| anyhow!("cap overflow"))?;
        table_cap = table_cap.max(cap);
        caps.push(cap);
        if conics {
            let dav = (norm_sq * BigInt::from(9)).to_i64().ok_or_else(|| anyhow!("cap overflow"))?;
            table_cap = table_cap.max(dav);
            davenport_caps.push(dav);
        }
    }

    let basis = MonomialBasis::new(d, n)?;
    let table = PointTable::build(&basis, table_cap, budget)?;

    let flags: Vec<(bool, bool)> = surfaces
        .par_iter()
        .enumerate()
        .map(|(i, v)| -> Result<(bool, bool)> {
            let exceeds = !table.has_zero_up_to(v.coeffs(), caps[i])?;
            let soluble = if conics {
                table.has_zero_up_to(v.coeffs(), davenport_caps[i])?
            } else {
                false
            };
            Ok((exceeds, soluble))
        })
        .collect::<Result<_>>()?;

    let exceed_count = flags.iter().filter(|(e, _)| *e).count() as u64;
    let proportion = exceed_count as f64 / samples as f64;
    let (lo, hi) = wilson_interval(exceed_count, samples);

    let mut params = BTreeMap::new();
    params.insert("d".into(), json!(d));
    params.insert("n".into(), json!(n));
    params.insert("A".into(), value_from_rational(&a));
    params.insert("psi".into(), json!(psi));
    params.insert("psi_param".into(), value_from_rational(&param));
    params.insert("samples".into(), json!(samples));

    let mut results = Map::new();
    results.insert("exceed_count".into(), json!(exceed_count));
    results.insert("proportion_exceeding".into(), value_from_f64(proportion)?);
    results.insert("ci_low".into(), value_from_f64(lo)?);
    results.insert("ci_high".into(), value_from_f64(hi)?);
    if conics {
        let soluble_count = flags.iter().filter(|(_, s)| *s).count() as u64;
        let both = flags.iter().filter(|(e, s)| *e && *s).count() as u64;
        results.insert("soluble_count".into(), json!(soluble_count));
        results.insert(
            "soluble_proportion".into(),
            value_from_f64(soluble_count as f64 / samples as f64)?,
        );
        let conditional = if soluble_count > 0 {
            both as f64 / soluble_count as f64
        } else {
            0.0
        };
        results.insert("exceeding_among_soluble_count".into(), json!(both));
        results.insert("conditional_proportion".into(), value_from_f64(conditional)?);
    }
    Ok(ExperimentReport::new("theorem1", params, Value::Object(results), seed))
}

/// 95% Wilson score interval for k successes out of n.
fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    let z = 1.959_963_984_540_054f64;
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Exit code policy: 2 for budget refusals, 1 for everything else.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(fhl_core::Error::BudgetExceeded { .. }) = cause.downcast_ref::<fhl_core::Error>() {
            return 2;
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_command_canonicalizes() {
        let b = Budget::default();
        let r = cmd_count(2, 2, &[2, 0, 0, 2, 0, -2], "2", &b).unwrap();
        assert_eq!(r.params["coeffs"], json!("1,0,0,1,0,-1"));
        assert_eq!(r.results["count"], json!(4));
    }

    #[test]
    fn minheight_command_statuses() {
        let b = Budget::default();
        let r = cmd_minheight(2, 2, &[1, 0, 0, 1, 0, -1], "10", &b).unwrap();
        assert_eq!(r.results["status"], json!("found"));
        assert_eq!(r.results["value_squared"], json!(2));
        assert_eq!(r.results["witness"], json!("1,0,1"));

        let r = cmd_minheight(2, 2, &[1, 0, 0, 1, 0, 1], "auto", &b).unwrap();
        assert_eq!(r.results["status"], json!("empty_proven"));
    }

    #[test]
    fn lattice_commands() {
        let b = Budget::default();
        let r = cmd_lattice_ortho(&[vec![1, 2, 3]]).unwrap();
        assert_eq!(r.results["det_squared"], json!(14));
        assert_eq!(r.results["routes_agree"], json!(true));

        let spec = LatticeSpec::KernelOf(vec![vec![1, 1, 1]]);
        let r = cmd_lattice_minima(&spec, "2", &b).unwrap();
        assert_eq!(r.results["minima_squared"], json!("2;2"));

        let spec = LatticeSpec::Dim(2);
        let r = cmd_lattice_count(&spec, "1.5", &b).unwrap();
        assert_eq!(r.results["count"], json!(9));

        let r = cmd_lattice_primitive(&LatticeSpec::Dim(2), "2.5", "both", &b).unwrap();
        assert_eq!(r.results["count"], json!(16));
        assert_eq!(r.results["routes_agree"], json!(true));
    }

    #[test]
    fn theorem2_exact_agreement_flag() {
        let b = Budget::default();
        let r = cmd_theorem2(2, 2, "2", "1", "exact", 0, 5000, 7, &b).unwrap();
        assert_eq!(r.results["dual_agrees"], json!(true));
    }

    #[test]
    fn theorem1_davenport_linear_bound_never_exceeded_among_soluble() {
        let b = Budget::default();
        let r = cmd_theorem1(2, 2, "8", "linear", "3", 400, 11, &b).unwrap();
        // psi(u) = 3u is the complete conic search bound: every soluble
        // conic has a point below it.
        assert_eq!(r.results["exceeding_among_soluble_count"], json!(0));
        assert_eq!(r.results["conditional_proportion"], json!(0.0));
        let soluble = r.results["soluble_count"].as_u64().unwrap();
        assert!(soluble > 0);
    }

    #[test]
    fn wilson_interval_basics() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo < 1e-12);
        assert!(hi > 0.0 && hi < 0.06);
        let (lo, hi) = wilson_interval(100, 100);
        assert!(lo > 0.94 && hi > 1.0 - 1e-12);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
    }
}
