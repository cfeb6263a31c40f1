//! Fourier analysis of group signals against an irrep table.
//!
//! Conventions: `ω̂(π) = Σ_g ω(g) π(g)†` and
//! `ω(g) = (1/|G|) Σ_π d_π Tr(ω̂(π) π(g))`.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::group::Group;
use crate::irreps::IrrepTable;
use crate::linalg::{self, c, CMatrix, C64};

pub const SUPPORT_TOL: f64 = 1e-15;

/// A complex-valued function on the elements of a group.
#[derive(Clone, Debug)]
pub struct GroupSignal {
    group: Arc<Group>,
    weights: Vec<C64>,
}

impl GroupSignal {
    pub fn new(group: Arc<Group>, weights: Vec<C64>) -> Result<Self> {
        if weights.len() != group.order() {
            return Err(Error::usage(format!(
                "signal has {} values, group has {} elements",
                weights.len(),
                group.order()
            )));
        }
        Ok(GroupSignal { group, weights })
    }

    pub fn from_real(group: Arc<Group>, weights: &[f64]) -> Result<Self> {
        GroupSignal::new(group, weights.iter().map(|&w| c(w)).collect())
    }

    /// Signal that is `w_i` on `support[i]` and zero elsewhere.
    pub fn from_sparse(group: Arc<Group>, support: &[usize], weights: &[f64]) -> Self {
        let mut dense = vec![c(0.0); group.order()];
        for (&g, &w) in support.iter().zip(weights) {
            dense[g] += c(w);
        }
        GroupSignal {
            group,
            weights: dense,
        }
    }

    pub fn zeros(group: Arc<Group>) -> Self {
        let n = group.order();
        GroupSignal {
            group,
            weights: vec![c(0.0); n],
        }
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&g| self.weights[g].norm() > SUPPORT_TOL)
            .collect()
    }

    pub fn max_abs_diff(&self, other: &GroupSignal) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// One coefficient matrix per irrep, in table order.
#[derive(Clone, Debug)]
pub struct FourierCoefficients {
    pub matrices: Vec<CMatrix>,
}

fn check_group(signal: &GroupSignal, table: &IrrepTable) -> Result<()> {
    if Arc::ptr_eq(signal.group(), table.group()) || **signal.group() == **table.group() {
        Ok(())
    } else {
        Err(Error::GroupMismatch(format!(
            "signal over {} used with the irrep table of {}",
            signal.group().family(),
            table.group().family()
        )))
    }
}

/// `ω̂(π) = Σ_g ω(g) π(g)†` for every irrep of the table.
pub fn fourier(signal: &GroupSignal, table: &IrrepTable) -> Result<FourierCoefficients> {
    check_group(signal, table)?;
    let support = signal.support();
    let matrices = table
        .irreps()
        .iter()
        .map(|pi| {
            let mut acc = CMatrix::zeros(pi.dim(), pi.dim());
            for &g in &support {
                acc += pi.matrix(g).adjoint() * signal.weights[g];
            }
            acc
        })
        .collect();
    Ok(FourierCoefficients { matrices })
}

/// Coefficients restricted to the irreps flagged in `present`.
pub fn fourier_subset(
    signal: &GroupSignal,
    table: &IrrepTable,
    present: &[bool],
) -> Result<Vec<Option<CMatrix>>> {
    check_group(signal, table)?;
    let support = signal.support();
    Ok(table
        .irreps()
        .iter()
        .zip(present)
        .map(|(pi, &keep)| {
            keep.then(|| {
                let mut acc = CMatrix::zeros(pi.dim(), pi.dim());
                for &g in &support {
                    acc += pi.matrix(g).adjoint() * signal.weights[g];
                }
                acc
            })
        })
        .collect())
}

/// `ω(g) = (1/|G|) Σ_π d_π Tr(ω̂(π) π(g))`.
pub fn inverse_fourier(coeffs: &FourierCoefficients, table: &IrrepTable) -> Result<GroupSignal> {
    if coeffs.matrices.len() != table.len()
        || coeffs
            .matrices
            .iter()
            .zip(table.dims())
            .any(|(m, d)| m.nrows() != d || m.ncols() != d)
    {
        return Err(Error::usage(
            "coefficient shapes do not match the irrep table",
        ));
    }
    let group = table.group().clone();
    let n = group.order();
    let weights = (0..n)
        .map(|g| {
            let s: C64 = table
                .irreps()
                .iter()
                .zip(&coeffs.matrices)
                .map(|(pi, m)| {
                    let p = pi.matrix(g);
                    // Tr(A B) without forming the product
                    let tr: C64 = (0..pi.dim())
                        .flat_map(|i| (0..pi.dim()).map(move |j| (i, j)))
                        .map(|(i, j)| m[(i, j)] * p[(j, i)])
                        .sum();
                    tr * c(pi.dim() as f64)
                })
                .sum();
            s / c(n as f64)
        })
        .collect();
    GroupSignal::new(group, weights)
}

/// `|Σ_g |ω(g)|² − (1/|G|) Σ_π d_π ‖ω̂(π)‖_F²|`.
pub fn plancherel_residual(signal: &GroupSignal, table: &IrrepTable) -> Result<f64> {
    let coeffs = fourier(signal, table)?;
    let lhs: f64 = signal.weights.iter().map(|w| w.norm_sqr()).sum();
    let rhs: f64 = coeffs
        .matrices
        .iter()
        .zip(table.dims())
        .map(|(m, d)| d as f64 * linalg::frobenius(m).powi(2))
        .sum::<f64>()
        / table.group().order() as f64;
    Ok((lhs - rhs).abs())
}

/// `‖ω̂(π)‖²_op` for every irrep.
pub fn squared_norms(coeffs: &FourierCoefficients) -> Vec<f64> {
    coeffs
        .matrices
        .iter()
        .map(|m| linalg::op_norm_split(m).powi(2))
        .collect()
}

/// Largest `‖ω̂(π)‖²_op` over nontrivial irreps, optionally only those with
/// nonzero multiplicity in `restrict_to`.
pub fn max_nontrivial_norm(
    coeffs: &FourierCoefficients,
    table: &IrrepTable,
    restrict_to: Option<&[usize]>,
) -> f64 {
    coeffs
        .matrices
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != table.trivial_index())
        .filter(|&(i, _)| restrict_to.is_none_or(|m| m[i] >= 1))
        .map(|(_, m)| linalg::op_norm_split(m).powi(2))
        .fold(0.0, f64::max)
}

/// `(ω₁ ⋆ ω₂)(g) = Σ_h ω₁(h) ω₂(h⁻¹g)`.
pub fn convolve(a: &GroupSignal, b: &GroupSignal) -> Result<GroupSignal> {
    if !(Arc::ptr_eq(a.group(), b.group()) || **a.group() == **b.group()) {
        return Err(Error::GroupMismatch(
            "convolution of signals over different groups".into(),
        ));
    }
    let group = a.group().clone();
    let mut out = vec![c(0.0); group.order()];
    let sb = b.support();
    for h in a.support() {
        for &k in &sb {
            // g = h k, so h⁻¹ g = k
            out[group.mul(h, k)] += a.weights[h] * b.weights[k];
        }
    }
    GroupSignal::new(group, out)
}

/// JSON object mapping irrep labels to matrices of `[re, im]` pairs.
pub fn coefficients_json(coeffs: &FourierCoefficients, table: &IrrepTable) -> Value {
    let mut map = Map::new();
    for (label, m) in table.labels().into_iter().zip(&coeffs.matrices) {
        let rows: Vec<Value> = (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect();
        map.insert(label.to_string(), Value::Array(rows));
    }
    Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irreps::irreps_of;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(spec: &str) -> IrrepTable {
        irreps_of(&Arc::new(Group::from_spec(spec).unwrap())).unwrap()
    }

    fn random_signal(t: &IrrepTable, rng: &mut ChaCha8Rng) -> GroupSignal {
        let n = t.group().order();
        let w = (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        GroupSignal::new(t.group().clone(), w).unwrap()
    }

    #[test]
    fn uniform_and_delta_coefficients() {
        for spec in ["cyclic:5", "symmetric:3", "dihedral:4"] {
            let t = table(spec);
            let n = t.group().order();
            let uniform =
                GroupSignal::from_real(t.group().clone(), &vec![1.0 / n as f64; n]).unwrap();
            let co = fourier(&uniform, &t).unwrap();
            assert!((co.matrices[0][(0, 0)] - c(1.0)).norm() < 1e-12);
            assert!(max_nontrivial_norm(&co, &t, None) < 1e-24);
            let delta = GroupSignal::from_sparse(t.group().clone(), &[0], &[1.0]);
            let co = fourier(&delta, &t).unwrap();
            for m in &co.matrices {
                assert_eq!(*m, linalg::identity(m.nrows()));
            }
            assert!((max_nontrivial_norm(&co, &t, None) - 1.0).abs() < 1e-12);
            let back = inverse_fourier(&fourier(&uniform, &t).unwrap(), &t).unwrap();
            assert!(back.max_abs_diff(&uniform) < 1e-12);
        }
    }

    #[test]
    fn two_element_example() {
        let t = table("cyclic:2");
        let w = GroupSignal::from_real(t.group().clone(), &[0.75, 0.25]).unwrap();
        let co = fourier(&w, &t).unwrap();
        assert!((co.matrices[1][(0, 0)] - c(0.5)).norm() < 1e-15);
        assert!((max_nontrivial_norm(&co, &t, None) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_coefficients_give_zero_signal() {
        let t = table("symmetric:3");
        let zero = FourierCoefficients {
            matrices: t.dims().iter().map(|&d| CMatrix::zeros(d, d)).collect(),
        };
        let s = inverse_fourier(&zero, &t).unwrap();
        assert!(s.support().is_empty());
        assert!(plancherel_residual(&GroupSignal::zeros(t.group().clone()), &t).unwrap() == 0.0);
        let bad = FourierCoefficients {
            matrices: vec![CMatrix::zeros(1, 1)],
        };
        assert!(inverse_fourier(&bad, &t).is_err());
    }

    #[test]
    fn round_trip_and_plancherel_on_random_signals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in [
            "symmetric:3",
            "symmetric:4",
            "dihedral:5",
            "cyclic:6",
            "signflip:3",
            "cyclic:2*dihedral:3",
        ] {
            let t = table(spec);
            for _ in 0..5 {
                let s = random_signal(&t, &mut rng);
                let back = inverse_fourier(&fourier(&s, &t).unwrap(), &t).unwrap();
                assert!(back.max_abs_diff(&s) <= 1e-10, "{spec}");
                assert!(plancherel_residual(&s, &t).unwrap() <= 1e-10, "{spec}");
            }
        }
        let t = table("cyclic:7");
        let u = GroupSignal::from_real(t.group().clone(), &[1.0 / 7.0; 7]).unwrap();
        assert!(plancherel_residual(&u, &t).unwrap() < 1e-15);
    }

    #[test]
    fn convolution_theorem_and_support_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in ["symmetric:4", "dihedral:6", "cyclic:9"] {
            let t = table(spec);
            let g = t.group().clone();
            let n = g.order();
            let pick = |rng: &mut ChaCha8Rng| -> GroupSignal {
                let support: Vec<usize> = (0..3).map(|_| rng.random_range(0..n)).collect();
                let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                GroupSignal::from_sparse(g.clone(), &support, &w)
            };
            let (a, b) = (pick(&mut rng), pick(&mut rng));
            let conv = convolve(&a, &b).unwrap();
            let (fa, fb, fc) = (
                fourier(&a, &t).unwrap(),
                fourier(&b, &t).unwrap(),
                fourier(&conv, &t).unwrap(),
            );
            for i in 0..t.len() {
                let prod = &fb.matrices[i] * &fa.matrices[i];
                assert!(linalg::max_abs(&(prod - &fc.matrices[i])) <= 1e-9, "{spec}");
            }
            let products: Vec<usize> = a
                .support()
                .iter()
                .flat_map(|&h| b.support().into_iter().map(move |k| (h, k)))
                .map(|(h, k)| g.mul(h, k))
                .collect();
            assert!(conv.support().iter().all(|x| products.contains(x)));
        }
    }

    #[test]
    fn restricted_norm_skips_absent_irreps() {
        let t = table("symmetric:3");
        let delta = GroupSignal::from_sparse(t.group().clone(), &[1], &[1.0]);
        let co = fourier(&delta, &t).unwrap();
        assert!((max_nontrivial_norm(&co, &t, Some(&[1, 0, 0])) - 0.0).abs() < 1e-15);
        assert!((max_nontrivial_norm(&co, &t, Some(&[1, 1, 0])) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_export_shape() {
        let t = table("dihedral:3");
        let w = GroupSignal::from_sparse(t.group().clone(), &[0], &[1.0]);
        let v = coefficients_json(&fourier(&w, &t).unwrap(), &t);
        let rot = &v["rot1"];
        assert_eq!(rot.as_array().unwrap().len(), 2);
        assert_eq!(rot[0][0], json!([1.0, 0.0]));
        assert_eq!(rot[0][1], json!([0.0, 0.0]));
    }

    #[test]
    fn mismatched_groups_are_rejected() {
        let t = table("cyclic:3");
        let s = GroupSignal::zeros(Arc::new(Group::from_spec("cyclic:4").unwrap()));
        assert!(matches!(fourier(&s, &t), Err(Error::GroupMismatch(_))));
    }
}
