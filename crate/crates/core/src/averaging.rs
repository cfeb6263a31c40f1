//! Averaging schemes `ω: G → ℝ` with `Σ ω = 1`, their averaging operators and
//! certified symmetry precision.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{fourier_subset, GroupSignal};
use crate::group::Group;
use crate::irreps::IrrepTable;
use crate::linalg::{self, CMatrix};
use crate::representation::Representation;

pub const SUM_TOL: f64 = 1e-12;
pub const WEIGHT_TOL: f64 = 1e-15;
/// Constant in `n = ⌈C (ln|G| + ln(1/δ) + 0.7) / ε⌉`.
pub const SAMPLER_CONSTANT: f64 = 2.67;
pub const SAMPLER_OFFSET: f64 = 0.7;

/// A real weighting of group elements summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragingScheme {
    group: Arc<Group>,
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl AveragingScheme {
    /// Builds a scheme; repeated elements are merged and the result is
    /// sorted by element index.
    pub fn new(group: Arc<Group>, support: &[usize], weights: &[f64]) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::usage("support and weights differ in length"));
        }
        if support.is_empty() {
            return Err(Error::usage("an averaging scheme needs a nonempty support"));
        }
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (&g, &w) in support.iter().zip(weights) {
            if g >= group.order() {
                return Err(Error::usage(format!(
                    "element {g} is outside a group of order {}",
                    group.order()
                )));
            }
            if !w.is_finite() {
                return Err(Error::usage("weights must be finite"));
            }
            *merged.entry(g).or_insert(0.0) += w;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::usage(format!("weights sum to {total}, expected 1")));
        }
        Ok(AveragingScheme {
            group,
            support: merged.keys().copied().collect(),
            weights: merged.values().copied().collect(),
        })
    }

    pub fn uniform(group: Arc<Group>) -> Self {
        let n = group.order();
        AveragingScheme {
            support: (0..n).collect(),
            weights: vec![1.0 / n as f64; n],
            group,
        }
    }

    pub fn delta(group: Arc<Group>, g: usize) -> Result<Self> {
        AveragingScheme::new(group, &[g], &[1.0])
    }

    /// Uniform weights on a set of distinct elements.
    pub fn uniform_on(group: Arc<Group>, support: &[usize]) -> Result<Self> {
        let w = 1.0 / support.len().max(1) as f64;
        let mut s = AveragingScheme::new(group, support, &vec![w; support.len()])?;
        let k = s.support.len() as f64;
        s.weights.iter_mut().for_each(|x| *x = 1.0 / k);
        Ok(s)
    }

    /// Empirical measure of `n` i.i.d. uniform draws.
    pub fn random(group: Arc<Group>, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AveragingScheme::random_with(group, n, &mut rng)
    }

    pub(crate) fn random_with(group: Arc<Group>, n: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("sample size must be at least 1"));
        }
        let draws = group.sample_with(n, rng);
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for g in draws {
            *counts.entry(g).or_insert(0) += 1;
        }
        Ok(AveragingScheme {
            support: counts.keys().copied().collect(),
            weights: counts.values().map(|&k| k as f64 / n as f64).collect(),
            group,
        })
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of weights with `|w| > 1e-15`.
    pub fn size(&self) -> usize {
        self.weights.iter().filter(|w| w.abs() > WEIGHT_TOL).count()
    }

    pub fn dense_weights(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.group.order()];
        for (&g, &w) in self.support.iter().zip(&self.weights) {
            out[g] = w;
        }
        out
    }

    pub fn signal(&self) -> GroupSignal {
        GroupSignal::from_sparse(self.group.clone(), &self.support, &self.weights)
    }

    pub fn to_json(&self) -> SchemeJson {
        SchemeJson {
            group: self.group.family().to_string(),
            order: self.group.order(),
            support: self.support.clone(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_json(group: Arc<Group>, json: &SchemeJson) -> Result<Self> {
        if json.order != group.order() || json.group != group.family().to_string() {
            return Err(Error::GroupMismatch(format!(
                "scheme is over {} (order {}), expected {}",
                json.group,
                json.order,
                group.family()
            )));
        }
        AveragingScheme::new(group, &json.support, &json.weights)
    }
}

/// Serialized form of a scheme.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeJson {
    pub group: String,
    pub order: usize,
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
}

/// `⌈2.67 (ln|G| + ln(1/δ) + 0.7) / ε⌉` with the natural logarithm.
pub fn sample_size_bound(order: usize, eps: f64, delta: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::usage(format!(
            "eps = {eps} and delta = {delta} must lie in (0, 1)"
        )));
    }
    if order == 0 {
        return Err(Error::usage("group order must be positive"));
    }
    let n = SAMPLER_CONSTANT * ((order as f64).ln() + (1.0 / delta).ln() + SAMPLER_OFFSET) / eps;
    Ok((n.ceil() as usize).max(1))
}

fn same_group(a: &Arc<Group>, b: &Arc<Group>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// `M_ω = Σ_g ω(g) ρ(g)`.
pub fn apply_scheme(scheme: &AveragingScheme, rho: &Representation) -> Result<CMatrix> {
    if !same_group(scheme.group(), rho.group()) {
        return Err(Error::GroupMismatch(format!(
            "scheme over {} applied to a representation of {}",
            scheme.group().family(),
            rho.group().family()
        )));
    }
    Ok(rho.weighted_sum(&scheme.support, &scheme.weights))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificationMethod {
    ProjectorPath,
    FourierPath,
}

/// Certified weak and strong precision of a scheme on a representation.
#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub eps_weak: f64,
    pub eps_strong: f64,
    pub per_irrep_norms: Option<BTreeMap<String, f64>>,
    pub method: CertificationMethod,
    /// Set when the representation has no non-invariant part; both
    /// precisions are then reported as zero.
    pub degenerate: bool,
}

impl CertificationReport {
    fn degenerate(method: CertificationMethod) -> Self {
        CertificationReport {
            eps_weak: 0.0,
            eps_strong: 0.0,
            per_irrep_norms: None,
            method,
            degenerate: true,
        }
    }
}

struct Projected {
    /// `M_ω (I − Π)`
    tail: CMatrix,
    /// `I − Π`
    complement: CMatrix,
}

fn projected(scheme: &AveragingScheme, rho: &Representation) -> Result<Projected> {
    let m = apply_scheme(scheme, rho)?;
    if rho.invariant_dimension()? == rho.dim() {
        return Err(Error::DegenerateRep);
    }
    let complement = linalg::identity(rho.dim()) - rho.invariant_projector();
    Ok(Projected {
        tail: m * &complement,
        complement,
    })
}

/// `‖(I−Π) M_ω (I−Π)‖²_op`.
pub fn certify_weak(scheme: &AveragingScheme, rho: &Representation) -> Result<f64> {
    let p = projected(scheme, rho)?;
    Ok(linalg::op_norm(&(&p.complement * &p.tail)).powi(2))
}

/// `½ max_g ‖(ρ(g) − I) M_ω (I−Π)‖²_op`.
pub fn certify_strong(scheme: &AveragingScheme, rho: &Representation) -> Result<f64> {
    let p = projected(scheme, rho)?;
    Ok(strong_from_tail(&p.tail, rho))
}

fn strong_from_tail(tail: &CMatrix, rho: &Representation) -> f64 {
    let worst = (0..rho.group().order())
        .map(|g| {
            let diff = rho.matrix(g) * tail - tail;
            linalg::op_norm(&diff).powi(2)
        })
        .fold(0.0, f64::max);
    0.5 * worst
}

/// Both precisions on the projector path.
pub fn certify(scheme: &AveragingScheme, rho: &Representation) -> Result<CertificationReport> {
    let p = match projected(scheme, rho) {
        Err(Error::DegenerateRep) => {
            return Ok(CertificationReport::degenerate(
                CertificationMethod::ProjectorPath,
            ))
        }
        other => other?,
    };
    Ok(CertificationReport {
        eps_weak: linalg::op_norm(&(&p.complement * &p.tail)).powi(2),
        eps_strong: strong_from_tail(&p.tail, rho),
        per_irrep_norms: None,
        method: CertificationMethod::ProjectorPath,
        degenerate: false,
    })
}

/// Both precisions from the Fourier coefficients of the irreps present in a
/// representation with multiplicity vector `mult` (all irreps if `None`).
///
/// On a block `π`, `M_ω` acts as `ω̂(π)†`, so the weak precision is
/// `max ‖ω̂(π)‖²` and the strong one `½ max_g ‖(π(g) − I) ω̂(π)†‖²`.
pub fn certify_fourier(
    scheme: &AveragingScheme,
    table: &IrrepTable,
    mult: Option<&[usize]>,
    strong: bool,
) -> Result<CertificationReport> {
    let present: Vec<bool> = (0..table.len())
        .map(|i| i != table.trivial_index() && mult.is_none_or(|m| m[i] >= 1))
        .collect();
    if !present.iter().any(|&p| p) {
        return Ok(CertificationReport::degenerate(
            CertificationMethod::FourierPath,
        ));
    }
    let coeffs = fourier_subset(&scheme.signal(), table, &present)?;
    let mut norms = BTreeMap::new();
    let mut eps_weak = 0.0f64;
    let mut eps_strong = 0.0f64;
    for (i, co) in coeffs.iter().enumerate() {
        let Some(co) = co else { continue };
        let w = linalg::op_norm_split(co).powi(2);
        norms.insert(table.labels()[i].to_string(), w);
        eps_weak = eps_weak.max(w);
        if strong {
            let pi = &table.irreps()[i];
            let adj = co.adjoint();
            for g in 0..table.group().order() {
                let diff = pi.matrix(g) * &adj - &adj;
                eps_strong = eps_strong.max(0.5 * linalg::op_norm_split(&diff).powi(2));
            }
        }
    }
    Ok(CertificationReport {
        eps_weak,
        eps_strong: if strong { eps_strong } else { f64::NAN },
        per_irrep_norms: Some(norms),
        method: CertificationMethod::FourierPath,
        degenerate: false,
    })
}

/// Weak-precision oracle used by the minimizer.
pub enum Certifier<'a> {
    Projector(&'a Representation),
    /// Irreps present per `mult`; `None` means every irrep (the regular
    /// representation).
    Fourier {
        table: &'a IrrepTable,
        mult: Option<Vec<usize>>,
    },
}

impl Certifier<'_> {
    pub fn weak(&self, scheme: &AveragingScheme) -> Result<f64> {
        match self {
            Certifier::Projector(rho) => certify_weak(scheme, rho),
            Certifier::Fourier { table, mult } => {
                let r = certify_fourier(scheme, table, mult.as_deref(), false)?;
                if r.degenerate {
                    Err(Error::DegenerateRep)
                } else {
                    Ok(r.eps_weak)
                }
            }
        }
    }

    fn group(&self) -> &Arc<Group> {
        match self {
            Certifier::Projector(rho) => rho.group(),
            Certifier::Fourier { table, .. } => table.group(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Random schemes tried per candidate draw count.
    pub trials: usize,
    /// Local swap attempts per size in the descent phase.
    pub swap_budget: usize,
    pub seed: u64,
    /// Return the uniform scheme when nothing smaller certifies.
    pub fallback: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            trials: 20,
            swap_budget: 200,
            seed: 0,
            fallback: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub phase: &'static str,
    /// Draw count in the sampling phase, support size otherwise.
    pub n: usize,
    pub best_eps: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug)]
pub struct MinimizeOutcome {
    pub scheme: AveragingScheme,
    pub eps_weak: f64,
    pub feasible: bool,
    pub used_fallback: bool,
    pub trace: Vec<TraceStep>,
}

/// SplitMix64 finalizer.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED69));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone)]
struct Candidate {
    scheme: AveragingScheme,
    eps: f64,
}

impl Candidate {
    /// Smaller size, then lower ε, then lexicographically smaller support.
    fn better_than(&self, other: &Candidate, target: f64) -> bool {
        let fa = self.eps <= target;
        let fb = other.eps <= target;
        if fa != fb {
            return fa;
        }
        if !fa {
            return self.eps < other.eps;
        }
        (self.scheme.size(), self.eps, self.scheme.support())
            < (other.scheme.size(), other.eps, other.scheme.support())
    }
}

/// Heuristic search for a small scheme with weak precision at most
/// `eps_target`.
///
/// Phase one binary-searches the number of i.i.d. draws, trying
/// `options.trials` random schemes per count. Phase two repeatedly drops one
/// support element from the best scheme, re-weights uniformly and applies
/// random single-element swaps that do not increase ε, until no smaller
/// certified scheme is found.
pub fn minimize_scheme(
    certifier: &Certifier,
    eps_target: f64,
    options: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    if !(eps_target > 0.0 && eps_target < 1.0) {
        return Err(Error::usage(format!(
            "eps target {eps_target} must lie in (0, 1)"
        )));
    }
    if options.trials == 0 {
        return Err(Error::usage("trial budget must be positive"));
    }
    let group = certifier.group().clone();
    let order = group.order();
    let mut trace = Vec::new();
    let mut best: Option<Candidate> = None;

    let consider = |cand: Candidate, best: &mut Option<Candidate>| {
        if best
            .as_ref()
            .is_none_or(|b| cand.better_than(b, eps_target))
        {
            *best = Some(cand);
        }
    };

    let try_n = |n: usize| -> Result<Option<Candidate>> {
        let results: Vec<Result<Candidate>> = (0..options.trials)
            .into_par_iter()
            .map(|t| {
                let seed = mix_seed(options.seed, n as u64, t as u64);
                let scheme = AveragingScheme::random(group.clone(), n, seed)?;
                let eps = certifier.weak(&scheme)?;
                Ok(Candidate { scheme, eps })
            })
            .collect();
        let mut local: Option<Candidate> = None;
        for r in results {
            let cand = r?;
            if local
                .as_ref()
                .is_none_or(|b| cand.better_than(b, eps_target))
            {
                local = Some(cand);
            }
        }
        Ok(local)
    };

    // grow an upper bound on the draw count
    let mut hi = sample_size_bound(order, eps_target, 0.5)?
        .min(4 * order)
        .max(1);
    let hi_cap = 4 * order.max(1);
    let mut hi_ok = false;
    loop {
        let cand = try_n(hi)?.expect("at least one trial");
        let ok = cand.eps <= eps_target;
        trace.push(TraceStep {
            phase: "sample",
            n: hi,
            best_eps: cand.eps,
            feasible: ok,
        });
        consider(cand, &mut best);
        if ok {
            hi_ok = true;
            break;
        }
        if hi >= hi_cap {
            break;
        }
        hi = (2 * hi).min(hi_cap);
    }
    if hi_ok {
        let mut lo = 0usize; // infeasible (or untested) below lo + 1
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let cand = try_n(mid)?.expect("at least one trial");
            let ok = cand.eps <= eps_target;
            trace.push(TraceStep {
                phase: "sample",
                n: mid,
                best_eps: cand.eps,
                feasible: ok,
            });
            consider(cand, &mut best);
            if ok {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    // descent on uniform-weight supports
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(options.seed, u64::MAX, 0));
    if let Some(start) = best.clone().filter(|b| b.eps <= eps_target) {
        let mut current = start.scheme.support().to_vec();
        while current.len() > 1 {
            let drop = rng.random_range(0..current.len());
            let mut support = current.clone();
            support.remove(drop);
            let mut scheme = AveragingScheme::uniform_on(group.clone(), &support)?;
            let mut eps = certifier.weak(&scheme)?;
            let mut swaps = 0;
            while eps > eps_target && swaps < options.swap_budget {
                swaps += 1;
                let slot = rng.random_range(0..support.len());
                let replacement = rng.random_range(0..order);
                if support.contains(&replacement) {
                    continue;
                }
                let mut trial = support.clone();
                trial[slot] = replacement;
                let trial_scheme = AveragingScheme::uniform_on(group.clone(), &trial)?;
                let trial_eps = certifier.weak(&trial_scheme)?;
                if trial_eps <= eps {
                    support = trial;
                    scheme = trial_scheme;
                    eps = trial_eps;
                }
            }
            let ok = eps <= eps_target;
            trace.push(TraceStep {
                phase: "descent",
                n: support.len(),
                best_eps: eps,
                feasible: ok,
            });
            if !ok {
                break;
            }
            consider(Candidate { scheme, eps }, &mut best);
            current = support;
        }
    }

    let best = best.expect("sampling phase always produces a candidate");
    if best.eps <= eps_target {
        return Ok(MinimizeOutcome {
            eps_weak: best.eps,
            scheme: best.scheme,
            feasible: true,
            used_fallback: false,
            trace,
        });
    }
    if options.fallback {
        let uniform = AveragingScheme::uniform(group.clone());
        let eps = certifier.weak(&uniform)?;
        trace.push(TraceStep {
            phase: "fallback",
            n: order,
            best_eps: eps,
            feasible: eps <= eps_target,
        });
        return Ok(MinimizeOutcome {
            scheme: uniform,
            eps_weak: eps,
            feasible: eps <= eps_target,
            used_fallback: true,
            trace,
        });
    }
    Ok(MinimizeOutcome {
        eps_weak: best.eps,
        scheme: best.scheme,
        feasible: false,
        used_fallback: false,
        trace,
    })
}

/// Exhaustive minimum over uniform-weight supports, for tiny groups.
pub fn brute_force_min_size(certifier: &Certifier, eps_target: f64) -> Result<usize> {
    let group = certifier.group().clone();
    let n = group.order();
    if n > 16 {
        return Err(Error::SizeLimit {
            what: "exhaustive support search order",
            value: n,
            cap: 16,
            hint: "",
        });
    }
    let mut best = n;
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size >= best {
            continue;
        }
        let support: Vec<usize> = (0..n).filter(|&g| mask >> g & 1 == 1).collect();
        let s = AveragingScheme::uniform_on(group.clone(), &support)?;
        if certifier.weak(&s)? <= eps_target {
            best = size;
        }
    }
    Ok(best)
}
