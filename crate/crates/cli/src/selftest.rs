//! Invariant suite behind `symavg selftest`.

use std::sync::Arc;

use serde::Serialize;
use symavg_core::averaging::{certify, sample_size_bound, AveragingScheme};
use symavg_core::fourier::{fourier, inverse_fourier, plancherel_residual, GroupSignal};
use symavg_core::linalg;
use symavg_core::separation::{exact_feasible_on_support, sym_power_coverage};
use symavg_core::{irreps_of, Group, Representation, Result};

const GROUPS: &[&str] = &[
    "cyclic:12",
    "signflip:4",
    "dihedral:6",
    "symmetric:4",
    "cyclic:2*dihedral:3",
];

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: String, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check {
            name,
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn group_checks(spec: &str, seed: u64) -> Result<Vec<Check>> {
    let g = Arc::new(Group::from_spec(spec)?);
    let mut out = Vec::new();
    out.push(check(
        format!("{spec}: group axioms"),
        g.check_axioms().map(|_| (true, String::new())),
    ));

    let table = irreps_of(&g)?;
    let sum: usize = table.dims().iter().map(|d| d * d).sum();
    let resid = table.orthogonality_residual();
    out.push(check(
        format!("{spec}: irrep table"),
        Ok((
            sum == g.order() && resid <= 1e-9,
            format!("sum d^2 = {sum}, orthogonality {resid:.3e}"),
        )),
    ));

    let reg = Representation::regular(g.clone())?;
    out.push(check(
        format!("{spec}: regular rep residuals"),
        reg.validate()
            .map(|r| (true, format!("{:.3e} {:.3e}", r.homomorphism, r.unitarity))),
    ));

    let pi = reg.invariant_projector();
    let idem = linalg::max_abs(&(&pi * &pi - &pi));
    out.push(check(
        format!("{spec}: projector idempotent"),
        Ok((idem <= 1e-9, format!("{idem:.3e}"))),
    ));

    let signal = {
        let s = AveragingScheme::random(g.clone(), 2 * g.order(), seed)?;
        GroupSignal::from_real(g.clone(), &s.dense_weights())?
    };
    let back = inverse_fourier(&fourier(&signal, &table)?, &table)?;
    let err = back.max_abs_diff(&signal);
    let planch = plancherel_residual(&signal, &table)?;
    out.push(check(
        format!("{spec}: Fourier inversion and Plancherel"),
        Ok((
            err <= 1e-10 && planch <= 1e-10,
            format!("{err:.3e} {planch:.3e}"),
        )),
    ));

    let s = AveragingScheme::random(g.clone(), 3, seed ^ 0x33)?;
    let r = certify(&s, &reg)?;
    out.push(check(
        format!("{spec}: weak/strong sandwich"),
        Ok((
            r.eps_weak <= r.eps_strong + 1e-9 && r.eps_strong <= 4.0 * r.eps_weak + 1e-9,
            format!("{:.6} {:.6}", r.eps_weak, r.eps_strong),
        )),
    ));

    let all: Vec<usize> = (0..g.order()).collect();
    let full = exact_feasible_on_support(&all, &table)?;
    let proper = exact_feasible_on_support(&all[..g.order() - 1], &table)?;
    out.push(check(
        format!("{spec}: exactness needs the whole group"),
        Ok((
            full.feasible && !proper.feasible,
            format!("full {} proper {}", full.feasible, proper.feasible),
        )),
    ));
    Ok(out)
}

pub fn run_all(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    for spec in GROUPS {
        match group_checks(spec, seed) {
            Ok(c) => out.extend(c),
            Err(e) => out.push(check(format!("{spec}: setup"), Err(e))),
        }
    }
    for d in 2..=5usize {
        let outcome = Group::from_spec(&format!("symmetric:{d}"))
            .and_then(|g| Representation::permutation(Arc::new(g)))
            .and_then(|r| r.k_bound())
            .map(|k| (k == d * (d + 1) / 2 - 1, format!("K = {k}")));
        out.push(check(format!("symmetric:{d}: K bound"), outcome));
    }
    for (d, k) in [(3usize, 5usize), (4, 9)] {
        let outcome = (|| {
            let g = Arc::new(Group::from_spec(&format!("symmetric:{d}"))?);
            let table = irreps_of(&g)?;
            let flags = sym_power_coverage(&Representation::permutation(g)?, k, &table)?;
            Ok((flags.iter().all(|&f| f), format!("{flags:?}")))
        })();
        out.push(check(
            format!("symmetric:{d}: every irrep in symmetric powers up to K"),
            outcome,
        ));
    }
    let sizes = (
        sample_size_bound(100, 0.5, 0.1),
        sample_size_bound(2, 0.9, 0.5),
    );
    out.push(check(
        "sampling bound sizes".into(),
        match sizes {
            (Ok(a), Ok(b)) => Ok((a == 41 && b == 7, format!("{a} {b}"))),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
    ));
    out
}
