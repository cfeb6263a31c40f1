//! Exact versus approximate symmetrization cost.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::averaging::{
    apply_scheme, certify_fourier, minimize_scheme, mix_seed, AveragingScheme, Certifier,
    MinimizeOptions,
};
use crate::error::{Error, Result};
use crate::group::{Family, Group};
use crate::irreps::{irreps_of, IrrepTable};
use crate::linalg::{self, CMatrix};
use crate::representation::{sym_power_characters, Representation};

pub const RANK_TOL: f64 = 1e-9;

/// For each irrep, whether it occurs in `Sym^k(ρ)` for some `k ≤ K`.
pub fn sym_power_coverage(
    rho: &Representation,
    k_max: usize,
    table: &IrrepTable,
) -> Result<Vec<bool>> {
    let chi = rho.character()?;
    let group = table.group();
    let powers = sym_power_characters(&chi, group, k_max);
    let mut present = vec![false; table.len()];
    for chi_k in &powers {
        for (i, flag) in present.iter_mut().enumerate() {
            if *flag {
                continue;
            }
            let z = chi_k.inner(&table.characters()[i], group);
            let r = z.re.round();
            let tol = 1e-6f64.max(1e-9 * z.norm());
            if (z - linalg::c(r)).norm() > tol || r < 0.0 {
                return Err(Error::numerical(format!(
                    "Sym power multiplicity {z} is not a nonnegative integer"
                )));
            }
            *flag = r >= 1.0;
        }
    }
    Ok(present)
}

/// `max_g ‖(ρ(g) − I) M_ω‖_op`.
pub fn exact_violation(scheme: &AveragingScheme, rho: &Representation) -> Result<f64> {
    let m = apply_scheme(scheme, rho)?;
    Ok((0..rho.group().order())
        .map(|g| linalg::op_norm(&(rho.matrix(g) * &m - &m)))
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// Minimum-norm solution aligned with the support, when feasible.
    pub witness: Option<Vec<f64>>,
    pub rank: usize,
    pub augmented_rank: usize,
}

/// Whether some real `ω` supported on `support` satisfies `Σ ω = 1` and
/// `Σ_s ω(s) π(s)† = 0` for every nontrivial irrep `π` of the table.
pub fn exact_feasible_on_support(support: &[usize], table: &IrrepTable) -> Result<Feasibility> {
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    if support.is_empty() {
        return Err(Error::usage("support must be nonempty"));
    }
    if support.iter().any(|&g| g >= table.group().order()) {
        return Err(Error::usage("support element outside the group"));
    }
    let cols = support.len();
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0; cols]];
    let mut rhs = vec![1.0];
    for (i, pi) in table.irreps().iter().enumerate() {
        if i == table.trivial_index() {
            continue;
        }
        let mats: Vec<CMatrix> = support.iter().map(|&g| pi.matrix(g).adjoint()).collect();
        for a in 0..pi.dim() {
            for b in 0..pi.dim() {
                rows.push(mats.iter().map(|m| m[(a, b)].re).collect());
                rows.push(mats.iter().map(|m| m[(a, b)].im).collect());
                rhs.extend([0.0, 0.0]);
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let aug = DMatrix::from_fn(rows.len(), cols + 1, |i, j| {
        if j < cols {
            rows[i][j]
        } else {
            rhs[i]
        }
    });
    let rank = linalg::real_rank(&a, RANK_TOL);
    let augmented_rank = linalg::real_rank(&aug, RANK_TOL);
    let feasible = rank == augmented_rank;
    let witness = if feasible {
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let x = svd
            .solve(&DVector::from_vec(rhs), RANK_TOL * smax)
            .map_err(|e| Error::numerical(e.to_string()))?;
        Some(x.iter().copied().collect())
    } else {
        None
    };
    Ok(Feasibility {
        feasible,
        witness,
        rank,
        augmented_rank,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub generates: bool,
    pub eps_weak_on_regular: f64,
}

/// Generation test and weak precision on the regular representation of
/// `Z_2^d` for a scheme supported on `support`.
pub fn sign_flip_lower_bound_check(
    d: usize,
    support: &[usize],
    weights: &[f64],
) -> Result<LowerBoundReport> {
    let group = Arc::new(Group::build(&Family::SignFlip(d))?);
    let table = irreps_of(&group)?;
    sign_flip_lower_bound_with_table(&table, support, weights)
}

/// As [`sign_flip_lower_bound_check`] with a prebuilt table. The regular
/// representation contains every irrep, so its weak precision is the largest
/// nontrivial Fourier coefficient norm.
pub fn sign_flip_lower_bound_with_table(
    table: &IrrepTable,
    support: &[usize],
    weights: &[f64],
) -> Result<LowerBoundReport> {
    let group = table.group().clone();
    let Family::SignFlip(d) = *group.family() else {
        return Err(Error::usage("lower-bound check needs a sign-flip group"));
    };
    let scheme = AveragingScheme::new(group, support, weights)?;
    let generates = f2_rank(scheme.support(), d) == d;
    let report = certify_fourier(&scheme, table, None, false)?;
    Ok(LowerBoundReport {
        generates,
        eps_weak_on_regular: report.eps_weak,
    })
}

/// Rank over the two-element field of bit vectors.
pub fn f2_rank(vectors: &[usize], d: usize) -> usize {
    let mut basis = vec![0usize; d];
    let mut rank = 0;
    for &v in vectors {
        let mut x = v;
        for bit in (0..d).rev() {
            if x >> bit & 1 == 0 {
                continue;
            }
            if basis[bit] == 0 {
                basis[bit] = x;
                rank += 1;
                break;
            }
            x ^= basis[bit];
        }
    }
    rank
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationRow {
    pub family: String,
    pub order: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub exact_cost: usize,
    pub approx_cost: usize,
    pub eps: f64,
    pub seed: u64,
    pub status: &'static str,
}

pub const SEPARATION_CSV_HEADER: &str = "family,order,K,exact_cost,approx_cost,eps,seed,status";

impl SeparationRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.family,
            self.order,
            self.k,
            self.exact_cost,
            self.approx_cost,
            linalg::format_f64(self.eps),
            self.seed,
            self.status
        )
    }
}

/// One row per group: `K` of the regular representation, exact cost `|G|` and
/// the size of the smallest scheme found that certifies `eps` on the regular
/// representation.
pub fn separation_table(
    specs: &[String],
    eps: f64,
    options: &MinimizeOptions,
) -> Result<Vec<SeparationRow>> {
    specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            separation_row(spec, eps, options, mix_seed(options.seed, i as u64, 0x5e9))
        })
        .collect()
}

fn separation_row(
    spec: &str,
    eps: f64,
    options: &MinimizeOptions,
    seed: u64,
) -> Result<SeparationRow> {
    let group = Arc::new(Group::from_spec(spec)?);
    let order = group.order();
    let regular = Representation::regular(group.clone())?;
    let k = regular.k_bound()?;
    let opts = MinimizeOptions {
        seed,
        ..options.clone()
    };
    let outcome = match irreps_of(&group) {
        Ok(table) => minimize_scheme(
            &Certifier::Fourier {
                table: &table,
                mult: None,
            },
            eps,
            &opts,
        )?,
        Err(Error::Capability(_)) => minimize_scheme(&Certifier::Projector(&regular), eps, &opts)?,
        Err(e) => return Err(e),
    };
    Ok(SeparationRow {
        family: spec.to_string(),
        order,
        k,
        exact_cost: order,
        approx_cost: outcome.scheme.size(),
        eps,
        seed,
        status: if outcome.feasible { "ok" } else { "incomplete" },
    })
}

/// Least-squares line `y = a + b x` with its coefficient of determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (intercept, slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::certify_weak;

    fn grp(spec: &str) -> Arc<Group> {
        Arc::new(Group::from_spec(spec).unwrap())
    }

    #[test]
    fn coverage_examples() {
        let g = grp("symmetric:3");
        let table = irreps_of(&g).unwrap();
        let p = Representation::permutation(g.clone()).unwrap();
        assert_eq!(
            sym_power_coverage(&p, 5, &table).unwrap(),
            vec![true, true, true]
        );
        let z2 = grp("signflip:1");
        let t2 = irreps_of(&z2).unwrap();
        let sign = Representation::sign_action(z2.clone()).unwrap();
        assert_eq!(sym_power_coverage(&sign, 1, &t2).unwrap(), vec![true, true]);
        assert_eq!(
            sym_power_coverage(&sign, 0, &t2).unwrap(),
            vec![true, false]
        );
        let triv = Representation::trivial(g.clone());
        assert_eq!(
            sym_power_coverage(&triv, 10, &table).unwrap(),
            vec![true, false, false]
        );
    }

    #[test]
    fn coverage_is_monotone_in_k() {
        let g = grp("symmetric:4");
        let table = irreps_of(&g).unwrap();
        let p = Representation::permutation(g.clone()).unwrap();
        let mut prev = vec![false; table.len()];
        for k in 0..=9 {
            let cur = sym_power_coverage(&p, k, &table).unwrap();
            assert!(prev.iter().zip(&cur).all(|(a, b)| !a || *b));
            prev = cur;
        }
        assert!(prev.iter().all(|&x| x));
    }

    #[test]
    fn exact_violation_examples() {
        let sign = Representation::sign_action(grp("signflip:1")).unwrap();
        let id = AveragingScheme::delta(sign.group().clone(), 0).unwrap();
        assert!((exact_violation(&id, &sign).unwrap() - 2.0).abs() < 1e-15);
        let reg = Representation::regular(grp("dihedral:3")).unwrap();
        let u = AveragingScheme::uniform(reg.group().clone());
        assert!(exact_violation(&u, &reg).unwrap() < 1e-12);
        assert!(certify_weak(&u, &reg).unwrap() < 1e-24);
    }

    #[test]
    fn feasibility_examples() {
        let c3 = grp("cyclic:3");
        let t = irreps_of(&c3).unwrap();
        let full = exact_feasible_on_support(&[0, 1, 2], &t).unwrap();
        assert!(full.feasible);
        for w in full.witness.unwrap() {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
        assert!(!exact_feasible_on_support(&[0, 1], &t).unwrap().feasible);
        let z2 = irreps_of(&grp("signflip:1")).unwrap();
        assert!(!exact_feasible_on_support(&[0], &z2).unwrap().feasible);
    }

    #[test]
    fn f2_rank_decides_generation() {
        assert_eq!(f2_rank(&[0b100, 0b010, 0b001, 0], 3), 3);
        assert_eq!(f2_rank(&[0b110, 0b011, 0b101], 3), 2);
        assert_eq!(f2_rank(&[0], 3), 0);
        let g = grp("signflip:4");
        for mask in 1usize..(1 << 16) {
            if mask.count_ones() > 3 {
                continue;
            }
            let s: Vec<usize> = (0..16).filter(|&x| mask >> x & 1 == 1).collect();
            assert_eq!(f2_rank(&s, 4) == 4, g.closure(&s).unwrap().len() == 16);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let sub = sign_flip_lower_bound_check(3, &[0b000, 0b100], &[0.3, 0.7]).unwrap();
        assert!(!sub.generates);
        assert!((sub.eps_weak_on_regular - 1.0).abs() < 1e-12);
        let basis = sign_flip_lower_bound_check(3, &[4, 2, 1, 0], &[0.25; 4]).unwrap();
        assert!(basis.generates && basis.eps_weak_on_regular < 1.0);
        let all: Vec<usize> = (0..8).collect();
        let full = sign_flip_lower_bound_check(3, &all, &[0.125; 8]).unwrap();
        assert!(full.generates && full.eps_weak_on_regular < 1e-24);
    }

    #[test]
    fn separation_rows() {
        let specs: Vec<String> = ["cyclic:4", "signflip:3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let opts = MinimizeOptions {
            seed: 3,
            ..MinimizeOptions::default()
        };
        let rows = separation_table(&specs, 0.5, &opts).unwrap();
        for r in &rows {
            assert!(r.approx_cost <= r.exact_cost);
            assert_eq!(r.exact_cost, r.order);
            assert_eq!(r.status, "ok");
        }
        assert_eq!(rows[0].k, 4);
        let again = separation_table(&specs, 0.5, &opts).unwrap();
        assert_eq!(rows[0].csv_line(), again[0].csv_line());
    }

    #[test]
    fn line_fit() {
        let (a, b, r2) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
