//! Irreducible representation tables for the built-in families.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Family, Group};
use crate::linalg::{self, c, CMatrix, C64};
use crate::representation::{round_multiplicity, CharacterVector, Representation};

/// Young's orthogonal form is built up to this degree.
pub const MAX_YOUNG_DEGREE: usize = 6;

/// The complete set of irreps of a group, trivial first.
#[derive(Clone, Debug)]
pub struct IrrepTable {
    group: Arc<Group>,
    irreps: Vec<Representation>,
    characters: Vec<CharacterVector>,
}

impl IrrepTable {
    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn irreps(&self) -> &[Representation] {
        &self.irreps
    }

    pub fn len(&self) -> usize {
        self.irreps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irreps.is_empty()
    }

    pub fn trivial_index(&self) -> usize {
        0
    }

    pub fn dims(&self) -> Vec<usize> {
        self.irreps.iter().map(Representation::dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.irreps.iter().map(Representation::name).collect()
    }

    pub fn characters(&self) -> &[CharacterVector] {
        &self.characters
    }

    /// Largest deviation of the character Gram matrix from the identity.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.characters.iter().enumerate() {
            for (j, b) in self.characters.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b, &self.group) - c(target)).norm());
            }
        }
        worst
    }

    /// Multiplicity of irrep `i` in a representation with character `chi`.
    pub fn multiplicity(&self, chi: &CharacterVector, i: usize) -> Result<usize> {
        round_multiplicity(
            chi.inner(&self.characters[i], &self.group),
            "irrep multiplicity",
        )
    }

    /// Multiplicity vector of a character; `Σ m_i d_i` must equal `dim`.
    pub fn decompose_character(&self, chi: &CharacterVector, dim: usize) -> Result<Vec<usize>> {
        let m: Vec<usize> = (0..self.len())
            .map(|i| self.multiplicity(chi, i))
            .collect::<Result<_>>()?;
        let total: usize = m.iter().zip(self.dims()).map(|(a, b)| a * b).sum();
        if total != dim {
            return Err(Error::numerical(format!(
                "multiplicities account for dimension {total}, representation has {dim}"
            )));
        }
        Ok(m)
    }

    pub fn decompose(&self, rho: &Representation) -> Result<Vec<usize>> {
        if !Arc::ptr_eq(rho.group(), &self.group) && **rho.group() != *self.group {
            return Err(Error::GroupMismatch(format!(
                "{} is not a representation of {}",
                rho.name(),
                self.group.family()
            )));
        }
        self.decompose_character(&rho.character()?, rho.dim())
    }

    /// CSV with one row per irrep and one column per class representative.
    pub fn character_table_csv(&self) -> String {
        let part = self.group.conjugacy_classes();
        let mut out = String::from("irrep");
        for &g in &part.representatives {
            out.push(',');
            out.push_str(&csv_field(&self.group.label(g)));
        }
        out.push('\n');
        for (rep, chi) in self.irreps.iter().zip(&self.characters) {
            out.push_str(&csv_field(rep.name()));
            for v in &chi.values {
                out.push(',');
                out.push_str(&linalg::format_complex(*v));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') {
        format!("\"{s}\"")
    } else {
        s.to_string()
    }
}

/// Irreps of a built-in group.
pub fn irreps_of(group: &Arc<Group>) -> Result<IrrepTable> {
    let mut irreps = raw_irreps(group)?;
    let chars: Vec<CharacterVector> = irreps
        .iter()
        .map(|r| r.character())
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..irreps.len()).collect();
    order.sort_by(|&a, &b| compare_irreps(&irreps[a], &chars[a], &irreps[b], &chars[b]));
    let mut slots: Vec<Option<Representation>> = irreps.drain(..).map(Some).collect();
    let irreps: Vec<Representation> = order.iter().map(|&i| slots[i].take().unwrap()).collect();
    let characters: Vec<CharacterVector> = order.iter().map(|&i| chars[i].clone()).collect();
    let table = IrrepTable {
        group: group.clone(),
        irreps,
        characters,
    };
    let sq: usize = table.dims().iter().map(|d| d * d).sum();
    if sq != group.order() || table.len() != group.conjugacy_classes().len() {
        return Err(Error::numerical(format!(
            "irrep table of {} is incomplete: Σd² = {sq}, {} irreps for {} classes",
            group.family(),
            table.len(),
            group.conjugacy_classes().len()
        )));
    }
    Ok(table)
}

fn is_trivial(chi: &CharacterVector) -> bool {
    chi.values.iter().all(|v| (v - c(1.0)).norm() < 1e-9)
}

fn compare_irreps(
    ra: &Representation,
    ca: &CharacterVector,
    rb: &Representation,
    cb: &CharacterVector,
) -> Ordering {
    is_trivial(cb)
        .cmp(&is_trivial(ca))
        .then(ra.dim().cmp(&rb.dim()))
        .then_with(|| {
            let key = |v: &C64| ((v.re * 1e9).round() as i64, (v.im * 1e9).round() as i64);
            ca.values.iter().map(key).cmp(cb.values.iter().map(key))
        })
}

fn raw_irreps(group: &Arc<Group>) -> Result<Vec<Representation>> {
    match group.family() {
        Family::Cyclic(n) => {
            let n = *n;
            (0..n)
                .map(|j| {
                    let mats = (0..n)
                        .map(|g| {
                            one(C64::from_polar(
                                1.0,
                                2.0 * PI * ((j * g) % n) as f64 / n as f64,
                            ))
                        })
                        .collect();
                    Representation::from_matrices(group.clone(), format!("chi{j}"), mats)
                })
                .collect()
        }
        Family::SignFlip(d) => {
            let n = 1usize << d;
            (0..n)
                .map(|mask| {
                    let mats = (0..n)
                        .map(|g| {
                            one(c(if (mask & g).count_ones() % 2 == 0 {
                                1.0
                            } else {
                                -1.0
                            }))
                        })
                        .collect();
                    Representation::from_matrices(
                        group.clone(),
                        format!("chi{mask:0width$b}", width = *d),
                        mats,
                    )
                })
                .collect()
        }
        Family::Dihedral(n) => dihedral_irreps(group, *n),
        Family::Symmetric(d) => {
            if *d > MAX_YOUNG_DEGREE {
                return Err(Error::Capability(format!(
                    "irreps of symmetric:{d} are not built in (degree cap {MAX_YOUNG_DEGREE})"
                )));
            }
            partitions(*d)
                .into_iter()
                .map(|shape| young_orthogonal(group, &shape))
                .collect()
        }
        Family::Product(_, _) => {
            let (l, r) = group.factors().expect("product group has factors");
            let left = raw_irreps(l)?;
            let right = raw_irreps(r)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for a in &left {
                for b in &right {
                    out.push(Representation::outer_tensor(group.clone(), a, b)?);
                }
            }
            Ok(out)
        }
        Family::Custom => Err(Error::Capability(
            "irreps of custom multiplication-table groups are not built in".into(),
        )),
    }
}

fn one(z: C64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

/// Element `r^k s^f` sits at index `f·n + k`.
fn dihedral_irreps(group: &Arc<Group>, n: usize) -> Result<Vec<Representation>> {
    let order = 2 * n;
    let mut out = Vec::new();
    let mut linear = |name: &str, rot: f64, refl: f64| -> Result<()> {
        let mats = (0..order)
            .map(|g| {
                let (f, k) = (g / n, g % n);
                one(c(rot.powi(k as i32) * refl.powi(f as i32)))
            })
            .collect();
        out.push(Representation::from_matrices(group.clone(), name, mats)?);
        Ok(())
    };
    linear("trivial", 1.0, 1.0)?;
    linear("sign", 1.0, -1.0)?;
    if n % 2 == 0 {
        linear("alt", -1.0, 1.0)?;
        linear("alt_sign", -1.0, -1.0)?;
    }
    let mut h = 1;
    while 2 * h < n {
        let mats = (0..order)
            .map(|g| {
                let (f, k) = (g / n, g % n);
                let t = 2.0 * PI * ((h * k) % n) as f64 / n as f64;
                let (s, co) = t.sin_cos();
                let flip = if f == 1 { -1.0 } else { 1.0 };
                // R(t) · diag(1, ±1)
                CMatrix::from_row_slice(2, 2, &[c(co), c(-s * flip), c(s), c(co * flip)])
            })
            .collect();
        out.push(Representation::from_matrices(
            group.clone(),
            format!("rot{h}"),
            mats,
        )?);
        h += 1;
    }
    Ok(out)
}

/// Partitions of `d` in decreasing lexicographic order.
fn partitions(d: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=rem.min(max)).rev() {
            prefix.push(part);
            rec(rem - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, d, &mut Vec::new(), &mut out);
    out
}

/// Standard Young tableaux of a shape, each stored as the (row, col) cell of
/// the numbers `0..d`.
fn standard_tableaux(shape: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        shape: &[usize],
        filled: &mut Vec<usize>,
        cells: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if filled.iter().zip(shape).all(|(f, s)| f == s) {
            out.push(cells.clone());
            return;
        }
        for row in 0..shape.len() {
            let col = filled[row];
            let fits = col < shape[row] && (row == 0 || filled[row - 1] > col);
            if fits {
                filled[row] += 1;
                cells.push((row, col));
                rec(shape, filled, cells, out);
                cells.pop();
                filled[row] -= 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(shape, &mut vec![0; shape.len()], &mut Vec::new(), &mut out);
    out
}

/// Young's orthogonal form: the adjacent transposition `(i, i+1)` acts on a
/// tableau basis vector `e_T` by `(1/r) e_T + sqrt(1 − 1/r²) e_{s_i T}` where
/// `r` is the content difference of `i+1` and `i`.
fn young_orthogonal(group: &Arc<Group>, shape: &[usize]) -> Result<Representation> {
    let d = shape.iter().sum::<usize>();
    let tableaux = standard_tableaux(shape);
    let index: HashMap<Vec<(usize, usize)>, usize> = tableaux
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    let dim = tableaux.len();
    let mut images = Vec::with_capacity(d.saturating_sub(1));
    for i in 0..d.saturating_sub(1) {
        let mut target: Vec<usize> = (0..d).collect();
        target.swap(i, i + 1);
        let elem = (0..group.order())
            .find(|&g| group.permutation(g).as_deref() == Some(&target[..]))
            .expect("adjacent transposition exists");
        let mut m = CMatrix::zeros(dim, dim);
        for (col, t) in tableaux.iter().enumerate() {
            let (ra, ca) = t[i];
            let (rb, cb) = t[i + 1];
            let r = (cb as f64 - rb as f64) - (ca as f64 - ra as f64);
            m[(col, col)] = c(1.0 / r);
            if ra != rb && ca != cb {
                let mut swapped = t.clone();
                swapped.swap(i, i + 1);
                m[(index[&swapped], col)] = c((1.0 - 1.0 / (r * r)).sqrt());
            }
        }
        images.push((elem, m));
    }
    let name = format!(
        "[{}]",
        shape
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    if images.is_empty() {
        let mats = vec![linalg::identity(1); group.order()];
        return Representation::from_matrices(group.clone(), name, mats);
    }
    Representation::from_generators(group.clone(), name, &images)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(spec: &str) -> IrrepTable {
        irreps_of(&Arc::new(Group::from_spec(spec).unwrap())).unwrap()
    }

    #[test]
    fn tableau_counts_follow_hook_lengths() {
        // hook length formula oracle
        fn hook_dim(shape: &[usize]) -> usize {
            let d: usize = shape.iter().sum();
            let mut prod = 1usize;
            for (r, &len) in shape.iter().enumerate() {
                for col in 0..len {
                    let arm = len - col - 1;
                    let leg = shape[r + 1..].iter().filter(|&&l| l > col).count();
                    prod *= arm + leg + 1;
                }
            }
            (1..=d).product::<usize>() / prod
        }
        for d in 1..=6 {
            let mut total = 0;
            for shape in partitions(d) {
                let n = standard_tableaux(&shape).len();
                assert_eq!(n, hook_dim(&shape), "{shape:?}");
                total += n;
            }
            if d == 6 {
                assert_eq!(total, 76);
            }
        }
    }

    #[test]
    fn named_examples() {
        let c4 = table("cyclic:4");
        assert_eq!(c4.dims(), vec![1, 1, 1, 1]);
        let s3 = table("symmetric:3");
        assert_eq!(s3.dims(), vec![1, 1, 2]);
        assert_eq!(s3.labels(), vec!["[3]", "[1,1,1]", "[2,1]"]);
        let d5 = table("dihedral:5");
        assert_eq!(d5.dims(), vec![1, 1, 2, 2]);
        let d6 = table("dihedral:6");
        assert_eq!(d6.dims(), vec![1, 1, 1, 1, 2, 2]);
    }

    #[test]
    fn tables_satisfy_invariants() {
        for spec in [
            "cyclic:1",
            "cyclic:7",
            "signflip:3",
            "dihedral:3",
            "dihedral:4",
            "dihedral:7",
            "symmetric:1",
            "symmetric:2",
            "symmetric:4",
            "symmetric:5",
            "cyclic:2*symmetric:3",
            "dihedral:4*cyclic:3",
        ] {
            let t = table(spec);
            let sq: usize = t.dims().iter().map(|d| d * d).sum();
            assert_eq!(sq, t.group().order(), "{spec}");
            assert_eq!(t.len(), t.group().conjugacy_classes().len(), "{spec}");
            assert!(t.orthogonality_residual() < 1e-9, "{spec}");
            assert!(is_trivial(&t.characters()[0]));
            for rep in t.irreps() {
                assert!(rep.validate().is_ok(), "{spec} {}", rep.name());
            }
        }
    }

    #[test]
    fn symmetric_six_is_complete() {
        let t = table("symmetric:6");
        assert_eq!(t.len(), 11);
        assert_eq!(*t.dims().last().unwrap(), 16);
        assert!(t.orthogonality_residual() < 1e-9);
    }

    #[test]
    fn capability_errors() {
        let s7 = Arc::new(Group::from_spec("symmetric:7").unwrap());
        assert!(matches!(irreps_of(&s7), Err(Error::Capability(_))));
        let custom = Arc::new(Group::from_table(2, vec![0, 1, 1, 0]).unwrap());
        assert!(matches!(irreps_of(&custom), Err(Error::Capability(_))));
    }

    #[test]
    fn multiplicities_and_decomposition() {
        let s3 = table("symmetric:3");
        let p = Representation::permutation(s3.group().clone()).unwrap();
        assert_eq!(s3.decompose(&p).unwrap(), vec![1, 0, 1]);
        let pp = p.direct_sum(&p).unwrap();
        assert_eq!(s3.decompose(&pp).unwrap(), vec![2, 0, 2]);
        let c3 = table("cyclic:3");
        let reg = Representation::regular(c3.group().clone()).unwrap();
        assert_eq!(c3.decompose(&reg).unwrap(), vec![1, 1, 1]);
        let triv = Representation::trivial(c3.group().clone());
        assert_eq!(c3.multiplicity(&triv.character().unwrap(), 0).unwrap(), 1);
        for spec in ["dihedral:5", "symmetric:4", "signflip:2*cyclic:3"] {
            let t = table(spec);
            let reg = Representation::regular(t.group().clone()).unwrap();
            assert_eq!(t.decompose(&reg).unwrap(), t.dims(), "{spec}");
        }
    }

    #[test]
    fn decomposition_reconstructs_character() {
        let t = table("symmetric:4");
        let p = Representation::permutation(t.group().clone()).unwrap();
        let rho = p.tensor(&p).unwrap();
        let chi = rho.character().unwrap();
        let m = t.decompose(&rho).unwrap();
        for k in 0..chi.values.len() {
            let rebuilt: C64 = m
                .iter()
                .zip(t.characters())
                .map(|(&mi, ch)| ch.values[k] * c(mi as f64))
                .sum();
            assert!((rebuilt - chi.values[k]).norm() < 1e-8);
        }
    }

    #[test]
    fn group_mismatch_is_reported() {
        let t = table("cyclic:3");
        let other =
            Representation::regular(Arc::new(Group::from_spec("cyclic:4").unwrap())).unwrap();
        assert!(matches!(t.decompose(&other), Err(Error::GroupMismatch(_))));
    }

    #[test]
    fn character_table_csv_layout() {
        let csv = table("cyclic:2").character_table_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("irrep,"));
        assert!(lines[2].starts_with("chi1,1.0000000000000000e0+0.0000000000000000e0i,-1.0"));
    }
}
