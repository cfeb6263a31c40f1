//! Unitary matrix representations of built-in groups.
//!
//! A representation stores one matrix per element. Permutation-type
//! representations (regular, natural permutation and their sums/tensors)
//! keep only the index maps and materialize matrices on demand, which keeps
//! the regular representation of a 4096-element group within memory.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Family, Group};
use crate::linalg::{self, c, CMatrix, C64};

pub const HOMOMORPHISM_TOL: f64 = 1e-9;
pub const INTEGER_TOL: f64 = 1e-6;
pub const SNAP_TOL: f64 = 1e-6;
pub const MAX_REGULAR_ORDER: usize = 4096;
pub const DEFAULT_SYM_POWER_CAP: usize = 2000;
/// Pairs checked exhaustively up to this order, sampled above.
pub const EXHAUSTIVE_HOM_ORDER: usize = 256;
/// Eigen profiles use a dense eigensolver up to this dimension and the
/// character route above it.
pub const DENSE_EIGEN_DIM: usize = 64;
const SAMPLED_PAIRS: usize = 2000;

#[derive(Clone, Debug)]
pub(crate) enum Action {
    Dense(Vec<CMatrix>),
    /// `perm[g][j] = i` means `ρ(g) e_j = e_i`.
    Permutation(Vec<Vec<u32>>),
}

/// A representation `g ↦ ρ(g)` of a finite group.
#[derive(Clone, Debug)]
pub struct Representation {
    group: Arc<Group>,
    dim: usize,
    action: Action,
    name: String,
}

/// Character values, one per conjugacy class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterVector {
    pub values: Vec<C64>,
}

impl CharacterVector {
    /// Expands class values to one value per element.
    pub fn per_element(&self, group: &Group) -> Vec<C64> {
        let class_of = &group.conjugacy_classes().class_of;
        class_of.iter().map(|&k| self.values[k]).collect()
    }

    /// `(1/|G|) Σ_g a(g) conj(b(g))`.
    pub fn inner(&self, other: &CharacterVector, group: &Group) -> C64 {
        let part = group.conjugacy_classes();
        let total: C64 = part
            .classes
            .iter()
            .enumerate()
            .map(|(k, cls)| self.values[k] * other.values[k].conj() * c(cls.len() as f64))
            .sum();
        total / c(group.order() as f64)
    }
}

/// A root of unity `exp(2πi num/den)` with `num/den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RootOfUnity {
    pub den: usize,
    pub num: usize,
}

impl RootOfUnity {
    pub fn new(num: usize, den: usize) -> Self {
        let g = gcd(num % den, den);
        RootOfUnity {
            num: (num % den) / g,
            den: den / g,
        }
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * self.num as f64 / self.den as f64)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Distinct eigenvalues over all `ρ(g)` and their maximal multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenProfile {
    pub lambdas: Vec<RootOfUnity>,
    pub max_mult: Vec<usize>,
}

/// Homomorphism and unitarity residuals of a representation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RepResiduals {
    pub homomorphism: f64,
    pub unitarity: f64,
}

fn same_group(a: &Arc<Group>, b: &Arc<Group>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Representation {
    /// Wraps explicit matrices and validates them.
    pub fn from_matrices(
        group: Arc<Group>,
        name: impl Into<String>,
        mats: Vec<CMatrix>,
    ) -> Result<Self> {
        if mats.len() != group.order() {
            return Err(Error::usage(format!(
                "expected {} matrices, got {}",
                group.order(),
                mats.len()
            )));
        }
        let dim = mats[0].nrows();
        if mats.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::usage(
                "representation matrices must share one square shape",
            ));
        }
        let rep = Representation {
            group,
            dim,
            action: Action::Dense(mats),
            name: name.into(),
        };
        rep.validate()?;
        Ok(rep)
    }

    pub(crate) fn from_parts_unchecked(
        group: Arc<Group>,
        name: String,
        dim: usize,
        action: Action,
    ) -> Self {
        Representation {
            group,
            dim,
            action,
            name,
        }
    }

    /// Extends generator images to the whole group by breadth-first search
    /// over `ρ(s·g) = ρ(s)ρ(g)`, then validates the result.
    pub fn from_generators(
        group: Arc<Group>,
        name: impl Into<String>,
        images: &[(usize, CMatrix)],
    ) -> Result<Self> {
        let n = group.order();
        let dim = images.first().map(|(_, m)| m.nrows()).unwrap_or(1);
        let mut mats: Vec<Option<CMatrix>> = vec![None; n];
        mats[0] = Some(linalg::identity(dim));
        let mut queue = vec![0usize];
        let mut head = 0;
        while head < queue.len() {
            let g = queue[head];
            head += 1;
            for (s, img) in images {
                let sg = group.mul(*s, g);
                if mats[sg].is_none() {
                    mats[sg] = Some(img * mats[g].as_ref().unwrap());
                    queue.push(sg);
                }
            }
        }
        if queue.len() != n {
            return Err(Error::usage("generator images do not reach every element"));
        }
        let mats = mats.into_iter().map(Option::unwrap).collect();
        Representation::from_matrices(group, name, mats)
    }

    pub fn trivial(group: Arc<Group>) -> Self {
        let n = group.order();
        Representation {
            group,
            dim: 1,
            action: Action::Permutation(vec![vec![0]; n]),
            name: "trivial".into(),
        }
    }

    /// Natural permutation representation of `S_d` on `C^d`.
    pub fn permutation(group: Arc<Group>) -> Result<Self> {
        let Family::Symmetric(d) = *group.family() else {
            return Err(Error::usage(
                "permutation representation needs a symmetric group",
            ));
        };
        let perms = (0..group.order())
            .map(|g| {
                group
                    .permutation(g)
                    .unwrap()
                    .into_iter()
                    .map(|x| x as u32)
                    .collect()
            })
            .collect();
        Ok(Representation {
            name: format!("permutation({})", group.family()),
            group,
            dim: d,
            action: Action::Permutation(perms),
        })
    }

    /// Diagonal ±1 action of `Z_2^d` on coordinates.
    pub fn sign_action(group: Arc<Group>) -> Result<Self> {
        let Family::SignFlip(d) = *group.family() else {
            return Err(Error::usage("sign action needs a sign-flip group"));
        };
        let mats = (0..group.order())
            .map(|g| {
                CMatrix::from_fn(d, d, |i, j| {
                    if i != j {
                        c(0.0)
                    } else if (g >> (d - 1 - i)) & 1 == 1 {
                        c(-1.0)
                    } else {
                        c(1.0)
                    }
                })
            })
            .collect();
        Ok(Representation {
            name: format!("sign_action({})", group.family()),
            group,
            dim: d,
            action: Action::Dense(mats),
        })
    }

    /// Left-regular representation, `ρ(g) e_h = e_{gh}`.
    pub fn regular(group: Arc<Group>) -> Result<Self> {
        let n = group.order();
        if n > MAX_REGULAR_ORDER {
            return Err(Error::SizeLimit {
                what: "regular representation order",
                value: n,
                cap: MAX_REGULAR_ORDER,
                hint: "",
            });
        }
        let perms = (0..n)
            .map(|g| (0..n).map(|h| group.mul(g, h) as u32).collect())
            .collect();
        Ok(Representation {
            name: format!("regular({})", group.family()),
            group,
            dim: n,
            action: Action::Permutation(perms),
        })
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_permutation(&self) -> bool {
        matches!(self.action, Action::Permutation(_))
    }

    /// The matrix `ρ(g)`.
    pub fn matrix(&self, g: usize) -> CMatrix {
        match &self.action {
            Action::Dense(m) => m[g].clone(),
            Action::Permutation(p) => {
                let mut m = CMatrix::zeros(self.dim, self.dim);
                for (j, &i) in p[g].iter().enumerate() {
                    m[(i as usize, j)] = c(1.0);
                }
                m
            }
        }
    }

    /// `Σ_g w(g) ρ(g)` over `(element, weight)` pairs.
    pub fn weighted_sum(&self, support: &[usize], weights: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        match &self.action {
            Action::Dense(m) => {
                for (&g, &w) in support.iter().zip(weights) {
                    out.zip_apply(&m[g], |o, x| *o += x * w);
                }
            }
            Action::Permutation(p) => {
                for (&g, &w) in support.iter().zip(weights) {
                    for (j, &i) in p[g].iter().enumerate() {
                        out[(i as usize, j)] += c(w);
                    }
                }
            }
        }
        out
    }

    /// Trace of `ρ(g)`.
    pub fn trace_at(&self, g: usize) -> C64 {
        match &self.action {
            Action::Dense(m) => linalg::trace(&m[g]),
            Action::Permutation(p) => c(p[g]
                .iter()
                .enumerate()
                .filter(|&(j, &i)| i as usize == j)
                .count() as f64),
        }
    }

    /// Character per conjugacy class, checked to be a class function.
    pub fn character(&self) -> Result<CharacterVector> {
        let part = self.group.conjugacy_classes();
        let mut values = Vec::with_capacity(part.len());
        for cls in &part.classes {
            let v = self.trace_at(cls[0]);
            for &g in &cls[1..] {
                if (self.trace_at(g) - v).norm() > 1e-8 {
                    return Err(Error::numerical(format!(
                        "{}: character is not constant on the class of element {}",
                        self.name, cls[0]
                    )));
                }
            }
            values.push(v);
        }
        Ok(CharacterVector { values })
    }

    fn character_unchecked(&self) -> CharacterVector {
        let part = self.group.conjugacy_classes();
        CharacterVector {
            values: part
                .representatives
                .iter()
                .map(|&g| self.trace_at(g))
                .collect(),
        }
    }

    /// Maximal homomorphism and unitarity residuals (Frobenius norms).
    pub fn residuals(&self) -> RepResiduals {
        let n = self.group.order();
        let g = &self.group;
        match &self.action {
            Action::Permutation(p) => {
                let mut bad = 0.0f64;
                let mut check = |a: usize, b: usize| {
                    let ab = g.mul(a, b);
                    let ok = (0..self.dim).all(|j| p[ab][j] == p[a][p[b][j] as usize]);
                    if !ok {
                        bad = f64::INFINITY;
                    }
                };
                pairs(n, &mut check);
                let unit = if p.iter().all(|row| is_bijection(row)) {
                    0.0
                } else {
                    f64::INFINITY
                };
                RepResiduals {
                    homomorphism: bad,
                    unitarity: unit,
                }
            }
            Action::Dense(m) => {
                let mut worst = 0.0f64;
                let mut check = |a: usize, b: usize| {
                    let r = linalg::frobenius(&(&m[g.mul(a, b)] - &m[a] * &m[b]));
                    worst = worst.max(r);
                };
                pairs(n, &mut check);
                let unit = m.iter().map(linalg::unitarity_residual).fold(0.0, f64::max);
                RepResiduals {
                    homomorphism: worst,
                    unitarity: unit,
                }
            }
        }
    }

    /// Fails unless the homomorphism and unitarity residuals are within
    /// tolerance and the identity maps to the identity matrix.
    pub fn validate(&self) -> Result<RepResiduals> {
        let identity_ok = match &self.action {
            Action::Dense(m) => m[0] == linalg::identity(self.dim),
            Action::Permutation(p) => p[0].iter().enumerate().all(|(j, &i)| i as usize == j),
        };
        if !identity_ok {
            return Err(Error::numerical(format!(
                "{}: identity does not map to I",
                self.name
            )));
        }
        let r = self.residuals();
        if r.homomorphism > HOMOMORPHISM_TOL || r.unitarity > HOMOMORPHISM_TOL {
            return Err(Error::numerical(format!(
                "{}: homomorphism residual {:e}, unitarity residual {:e}",
                self.name, r.homomorphism, r.unitarity
            )));
        }
        Ok(r)
    }

    fn check_same_group(&self, other: &Representation) -> Result<()> {
        if same_group(&self.group, &other.group) {
            Ok(())
        } else {
            Err(Error::GroupMismatch(format!(
                "{} is over {}, {} is over {}",
                self.name,
                self.group.family(),
                other.name,
                other.group.family()
            )))
        }
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Representation) -> Result<Representation> {
        self.check_same_group(other)?;
        let name = format!("{}+{}", self.name, other.name);
        let dim = self.dim + other.dim;
        let action = match (&self.action, &other.action) {
            (Action::Permutation(a), Action::Permutation(b)) => Action::Permutation(
                a.iter()
                    .zip(b)
                    .map(|(ra, rb)| {
                        ra.iter()
                            .copied()
                            .chain(rb.iter().map(|&i| i + self.dim as u32))
                            .collect()
                    })
                    .collect(),
            ),
            _ => Action::Dense(
                (0..self.group.order())
                    .map(|g| linalg::block_diag(&self.matrix(g), &other.matrix(g)))
                    .collect(),
            ),
        };
        Ok(Representation::from_parts_unchecked(
            self.group.clone(),
            name,
            dim,
            action,
        ))
    }

    /// Kronecker (inner tensor) product.
    pub fn tensor(&self, other: &Representation) -> Result<Representation> {
        self.check_same_group(other)?;
        let name = format!("{}x{}", self.name, other.name);
        let dim = self.dim * other.dim;
        let action = match (&self.action, &other.action) {
            (Action::Permutation(a), Action::Permutation(b)) => {
                let d2 = other.dim as u32;
                Action::Permutation(
                    a.iter()
                        .zip(b)
                        .map(|(ra, rb)| {
                            let mut row = Vec::with_capacity(dim);
                            for &i in ra {
                                for &j in rb {
                                    row.push(i * d2 + j);
                                }
                            }
                            row
                        })
                        .collect(),
                )
            }
            _ => Action::Dense(
                (0..self.group.order())
                    .map(|g| linalg::kron(&self.matrix(g), &other.matrix(g)))
                    .collect(),
            ),
        };
        Ok(Representation::from_parts_unchecked(
            self.group.clone(),
            name,
            dim,
            action,
        ))
    }

    /// Outer tensor product of representations of the two factors of a
    /// direct product group.
    pub fn outer_tensor(
        product: Arc<Group>,
        left: &Representation,
        right: &Representation,
    ) -> Result<Representation> {
        let (gl, gr) = product
            .factors()
            .ok_or_else(|| Error::usage("outer tensor needs a direct product group"))?;
        if !same_group(gl, &left.group) || !same_group(gr, &right.group) {
            return Err(Error::GroupMismatch(
                "factor representations do not match the product".into(),
            ));
        }
        let h = gr.order();
        let mats = (0..product.order())
            .map(|g| linalg::kron(&left.matrix(g / h), &right.matrix(g % h)))
            .collect();
        let dim = left.dim * right.dim;
        Ok(Representation::from_parts_unchecked(
            product,
            format!("{}x{}", left.name, right.name),
            dim,
            Action::Dense(mats),
        ))
    }

    /// Symmetric power `Sym^k(ρ)` on the orthonormalized monomial basis.
    ///
    /// Basis vector `b_α = sqrt(k!/α!) · Sym(e^α)` for exponent vectors `α`
    /// of total degree `k`; the matrix entry is `c_{βα} · sqrt(β!/α!)` where
    /// `c_{βα}` is the coefficient of `x^β` in `Π_t (Σ_j ρ_{j,i_t} x_j)`.
    pub fn sym_power(&self, k: usize, cap: usize) -> Result<Representation> {
        let m = self.dim;
        let target = binomial(m + k - 1, k)
            .filter(|&d| d <= cap)
            .ok_or(Error::SizeLimit {
                what: "symmetric power dimension",
                value: binomial(m + k - 1, k).unwrap_or(usize::MAX),
                cap,
                hint: "; use sym_power_character for character-only computations",
            })?;
        let name = format!("sym{k}({})", self.name);
        if k == 0 {
            return Ok(Representation::trivial(self.group.clone()).with_name(name));
        }
        let bases: Vec<Vec<Vec<u8>>> = (0..=k).map(|t| monomials(m, t)).collect();
        let index: Vec<HashMap<Vec<u8>, usize>> = bases
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect())
            .collect();
        // up[t][idx][j] = index of monomial idx (degree t) times x_j in degree t+1
        let up: Vec<Vec<Vec<usize>>> = (0..k)
            .map(|t| {
                bases[t]
                    .iter()
                    .map(|a| {
                        (0..m)
                            .map(|j| {
                                let mut b = a.clone();
                                b[j] += 1;
                                index[t + 1][&b]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let fact: Vec<f64> = (0..=k)
            .map(|i| (1..=i).map(|x| x as f64).product())
            .collect();
        let sqrt_fact: Vec<f64> = bases[k]
            .iter()
            .map(|a| a.iter().map(|&e| fact[e as usize]).product::<f64>().sqrt())
            .collect();
        let mats = (0..self.group.order())
            .map(|g| {
                let rho = self.matrix(g);
                let mut out = CMatrix::zeros(target, target);
                for (col, alpha) in bases[k].iter().enumerate() {
                    let mut poly = vec![c(1.0)];
                    let mut degree = 0;
                    for (i, &e) in alpha.iter().enumerate() {
                        for _ in 0..e {
                            let mut next = vec![c(0.0); bases[degree + 1].len()];
                            for (idx, &coef) in poly.iter().enumerate() {
                                if coef == c(0.0) {
                                    continue;
                                }
                                for j in 0..m {
                                    let r = rho[(j, i)];
                                    if r != c(0.0) {
                                        next[up[degree][idx][j]] += coef * r;
                                    }
                                }
                            }
                            poly = next;
                            degree += 1;
                        }
                    }
                    for (row, coef) in poly.into_iter().enumerate() {
                        if coef != c(0.0) {
                            out[(row, col)] = coef * (sqrt_fact[row] / sqrt_fact[col]);
                        }
                    }
                }
                out
            })
            .collect();
        Ok(Representation::from_parts_unchecked(
            self.group.clone(),
            name,
            target,
            Action::Dense(mats),
        ))
    }

    /// `Π = (1/|G|) Σ_g ρ(g)`.
    pub fn invariant_projector(&self) -> CMatrix {
        let n = self.group.order();
        let support: Vec<usize> = (0..n).collect();
        self.weighted_sum(&support, &vec![1.0 / n as f64; n])
    }

    /// `m_triv = E_g[Tr ρ(g)]`, rounded after a residual check.
    pub fn invariant_dimension(&self) -> Result<usize> {
        let chi = self.character_unchecked();
        let trivial = CharacterVector {
            values: vec![c(1.0); chi.values.len()],
        };
        round_multiplicity(chi.inner(&trivial, &self.group), &self.name)
    }

    /// Eigenvalue profile, using a dense eigensolver for small dimensions and
    /// the character route above [`DENSE_EIGEN_DIM`].
    pub fn eigen_profile(&self) -> Result<EigenProfile> {
        if self.dim <= DENSE_EIGEN_DIM {
            self.eigen_profile_dense()
        } else {
            self.eigen_profile_from_character()
        }
    }

    /// Eigenvalues of each class representative, snapped to the nearest
    /// `ord(g)`-th root of unity.
    pub fn eigen_profile_dense(&self) -> Result<EigenProfile> {
        let part = self.group.conjugacy_classes();
        let mut per_class = Vec::with_capacity(part.len());
        for &g in &part.representatives {
            let order = self.group.element_order(g);
            let eig = unitary_eigenvalues(&self.matrix(g));
            let mut counts = vec![0usize; order];
            for z in eig.iter() {
                let turns = z.arg() / (2.0 * PI) * order as f64;
                let p = turns.round().rem_euclid(order as f64) as usize;
                let snapped = RootOfUnity::new(p, order).value();
                if (z - snapped).norm() > SNAP_TOL {
                    return Err(Error::numerical(format!(
                        "{}: eigenvalue {z} of element {g} is not an {order}-th root of unity",
                        self.name
                    )));
                }
                counts[p] += 1;
            }
            per_class.push((order, counts));
        }
        Ok(profile_from_counts(&per_class))
    }

    /// Multiplicities via `m_p = (1/N) Σ_j χ(g^j) ω^{-pj}` with `N = ord(g)`.
    pub fn eigen_profile_from_character(&self) -> Result<EigenProfile> {
        let part = self.group.conjugacy_classes();
        let chi = self.character_unchecked();
        let mut per_class = Vec::with_capacity(part.len());
        for &g in &part.representatives {
            let order = self.group.element_order(g);
            let powers: Vec<C64> = (0..order)
                .map(|j| chi.values[part.class_of[self.group.pow(g, j)]])
                .collect();
            let mut counts = Vec::with_capacity(order);
            for p in 0..order {
                let sum: C64 = powers
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        x * C64::from_polar(
                            1.0,
                            -2.0 * PI * ((p * j) % order) as f64 / order as f64,
                        )
                    })
                    .sum();
                counts.push(round_multiplicity(sum / c(order as f64), &self.name)?);
            }
            if counts.iter().sum::<usize>() != self.dim {
                return Err(Error::numerical(format!(
                    "{}: eigenvalue multiplicities of element {g} do not sum to the dimension",
                    self.name
                )));
            }
            per_class.push((order, counts));
        }
        Ok(profile_from_counts(&per_class))
    }

    /// `K = min{|G|, Σ_λ M_λ − 1}`.
    pub fn k_bound(&self) -> Result<usize> {
        let profile = self.eigen_profile()?;
        Ok(k_bound_from_profile(&profile, self.group.order()))
    }

    /// Writes `rep <name> <dim> <order>` followed by one `dim`-row block per
    /// element with entries `a+bi`.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "rep {} {} {}\n",
            self.name.replace(char::is_whitespace, "_"),
            self.dim,
            self.group.order()
        );
        for g in 0..self.group.order() {
            let m = self.matrix(g);
            for i in 0..self.dim {
                let row: Vec<String> = (0..self.dim)
                    .map(|j| linalg::format_complex(m[(i, j)]))
                    .collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    /// Parses the format written by [`Representation::to_text`].
    pub fn from_text(group: Arc<Group>, text: &str) -> Result<Representation> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty representation file".into()))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 4 || f[0] != "rep" {
            return Err(Error::Parse(format!(
                "bad representation header `{header}`"
            )));
        }
        let dim: usize = f[2]
            .parse()
            .map_err(|_| Error::Parse("bad dimension".into()))?;
        let order: usize = f[3].parse().map_err(|_| Error::Parse("bad order".into()))?;
        if order != group.order() {
            return Err(Error::GroupMismatch(format!(
                "file has order {order}, group has {}",
                group.order()
            )));
        }
        let mut entries = Vec::with_capacity(order * dim * dim);
        for line in lines {
            for tok in line.split_whitespace() {
                entries.push(
                    linalg::parse_complex(tok)
                        .ok_or_else(|| Error::Parse(format!("bad entry `{tok}`")))?,
                );
            }
        }
        if entries.len() != order * dim * dim {
            return Err(Error::Parse("wrong number of matrix entries".into()));
        }
        let mats = entries
            .chunks(dim * dim)
            .map(|blk| CMatrix::from_row_slice(dim, dim, blk))
            .collect();
        Representation::from_matrices(group, f[1], mats)
    }
}

/// Eigenvalues of a unitary matrix `u`.
///
/// `H = (e^{-iφ}u + e^{iφ}u†)/2` is Hermitian and shares eigenvectors with
/// `u`; each eigenvalue is read back as `v†uv`. Schur iteration can stall on
/// permutation matrices, this cannot.
pub fn unitary_eigenvalues(u: &CMatrix) -> Vec<C64> {
    let phase = C64::from_polar(1.0, -0.123_456_789);
    let h = (u * phase + u.adjoint() * phase.conj()) * c(0.5);
    let eig = h.symmetric_eigen();
    (0..u.nrows())
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            v.dotc(&(u * v))
        })
        .collect()
}

fn is_bijection(row: &[u32]) -> bool {
    let mut seen = vec![false; row.len()];
    row.iter().all(|&i| {
        let i = i as usize;
        i < seen.len() && !std::mem::replace(&mut seen[i], true)
    })
}

fn pairs(n: usize, f: &mut impl FnMut(usize, usize)) {
    if n <= EXHAUSTIVE_HOM_ORDER {
        for a in 0..n {
            for b in 0..n {
                f(a, b);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
        for _ in 0..SAMPLED_PAIRS {
            f(rng.random_range(0..n), rng.random_range(0..n));
        }
    }
}

pub(crate) fn round_multiplicity(z: C64, what: &str) -> Result<usize> {
    let r = z.re.round();
    if (z - c(r)).norm() > INTEGER_TOL || r < 0.0 {
        return Err(Error::numerical(format!(
            "{what}: {z} is not a nonnegative integer"
        )));
    }
    Ok(r as usize)
}

fn profile_from_counts(per_class: &[(usize, Vec<usize>)]) -> EigenProfile {
    let mut best: HashMap<RootOfUnity, usize> = HashMap::new();
    for (order, counts) in per_class {
        for (p, &m) in counts.iter().enumerate() {
            if m > 0 {
                let e = best.entry(RootOfUnity::new(p, *order)).or_insert(0);
                *e = (*e).max(m);
            }
        }
    }
    let mut items: Vec<_> = best.into_iter().collect();
    items.sort();
    EigenProfile {
        lambdas: items.iter().map(|(l, _)| *l).collect(),
        max_mult: items.iter().map(|(_, m)| *m).collect(),
    }
}

pub fn k_bound_from_profile(profile: &EigenProfile, order: usize) -> usize {
    let total: usize = profile.max_mult.iter().sum();
    order.min(total.saturating_sub(1))
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    usize::try_from(acc).ok()
}

/// Exponent vectors of total degree `t` in `m` variables, lexicographically
/// descending.
fn monomials(m: usize, t: usize) -> Vec<Vec<u8>> {
    fn rec(m: usize, t: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == m {
            prefix.push(t as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=t).rev() {
            prefix.push(e as u8);
            rec(m, t - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m > 0 {
        rec(m, t, &mut Vec::new(), &mut out);
    }
    out
}

/// Characters of `Sym^k(ρ)` for `k = 0..=kmax` via Newton's identity
/// `χ_k(g) = (1/k) Σ_{j=1..k} χ(g^j) χ_{k−j}(g)`.
pub fn sym_power_characters(
    chi: &CharacterVector,
    group: &Group,
    kmax: usize,
) -> Vec<CharacterVector> {
    let part = group.conjugacy_classes();
    let r = part.len();
    // power_class[cls][j] = class of rep^j
    let power_class: Vec<Vec<usize>> = part
        .representatives
        .iter()
        .map(|&g| (0..=kmax).map(|j| part.class_of[group.pow(g, j)]).collect())
        .collect();
    let mut out: Vec<CharacterVector> = vec![CharacterVector {
        values: vec![c(1.0); r],
    }];
    for k in 1..=kmax {
        let values = (0..r)
            .map(|cls| {
                let s: C64 = (1..=k)
                    .map(|j| chi.values[power_class[cls][j]] * out[k - j].values[cls])
                    .sum();
                s / c(k as f64)
            })
            .collect();
        out.push(CharacterVector { values });
    }
    out
}

/// Character of `Sym^k(ρ)` from the character of `ρ`.
pub fn sym_power_character(chi: &CharacterVector, group: &Group, k: usize) -> CharacterVector {
    sym_power_characters(chi, group, k).pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(spec: &str) -> Arc<Group> {
        Arc::new(Group::from_spec(spec).unwrap())
    }

    fn close(a: C64, b: f64) -> bool {
        (a - c(b)).norm() < 1e-10
    }

    /// Sign character of Z_2 as a 1-dim representation.
    fn sign_rep_z2() -> Representation {
        Representation::sign_action(g("signflip:1")).unwrap()
    }

    #[test]
    fn permutation_rep_of_s3() {
        let s3 = g("symmetric:3");
        let rho = Representation::permutation(s3.clone()).unwrap();
        assert_eq!(rho.dim(), 3);
        assert_eq!(rho.matrix(0), linalg::identity(3));
        let chi = rho.character().unwrap();
        // classes ordered by smallest element: id(0), transpositions(1 = "132"), 3-cycles(3 = "231")
        let reps = &s3.conjugacy_classes().representatives;
        assert_eq!(reps, &vec![0, 1, 3]);
        assert!(
            close(chi.values[0], 3.0) && close(chi.values[1], 1.0) && close(chi.values[2], 0.0)
        );
        let s4 = Representation::permutation(g("symmetric:4")).unwrap();
        assert_eq!(s4.dim(), 4);
        assert!(s4.residuals().unitarity < 1e-12);
        assert!(Representation::permutation(g("cyclic:3")).is_err());
    }

    #[test]
    fn sign_action_matrices() {
        let r1 = sign_rep_z2();
        assert_eq!(r1.matrix(1)[(0, 0)], c(-1.0));
        let r3 = Representation::sign_action(g("signflip:3")).unwrap();
        let m = r3.matrix(0b101);
        assert_eq!(
            [m[(0, 0)], m[(1, 1)], m[(2, 2)]],
            [c(-1.0), c(1.0), c(-1.0)]
        );
        for e in 0..8 {
            let m = r3.matrix(e);
            assert_eq!(&m * &m, linalg::identity(3));
        }
        assert!(r3.validate().is_ok());
    }

    #[test]
    fn regular_rep_character_and_invariants() {
        for spec in ["cyclic:5", "dihedral:4", "symmetric:3"] {
            let grp = g(spec);
            let reg = Representation::regular(grp.clone()).unwrap();
            let chi = reg.character().unwrap();
            assert!(close(chi.values[0], grp.order() as f64));
            assert!(chi.values[1..].iter().all(|&v| close(v, 0.0)));
            assert_eq!(reg.invariant_dimension().unwrap(), 1);
            assert!(reg.validate().is_ok());
        }
        let c2 = Representation::regular(g("cyclic:2")).unwrap();
        assert_eq!(
            c2.matrix(1),
            CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
        );
        let big = Arc::new(Group::from_spec("signflip:13").unwrap());
        assert!(matches!(
            Representation::regular(big),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn sum_and_tensor_characters() {
        let s3 = g("symmetric:3");
        let p = Representation::permutation(s3.clone()).unwrap();
        let reg = Representation::regular(s3.clone()).unwrap();
        let (cp, cr) = (p.character().unwrap(), reg.character().unwrap());
        let sum = p.direct_sum(&reg).unwrap();
        let ten = p.tensor(&reg).unwrap();
        assert_eq!(ten.dim(), 18);
        let (cs, ct) = (sum.character().unwrap(), ten.character().unwrap());
        for k in 0..3 {
            assert!((cs.values[k] - cp.values[k] - cr.values[k]).norm() < 1e-12);
            assert!((ct.values[k] - cp.values[k] * cr.values[k]).norm() < 1e-12);
        }
        assert!(sum.validate().is_ok() && ten.validate().is_ok());
        let dense = Representation::sign_action(g("signflip:2")).unwrap();
        assert!(matches!(p.direct_sum(&dense), Err(Error::GroupMismatch(_))));
        let triv = Representation::trivial(s3.clone());
        assert_eq!(
            triv.direct_sum(&triv)
                .unwrap()
                .invariant_dimension()
                .unwrap(),
            2
        );
        // dims (3, 4) tensor to 12
        let p4 = Representation::permutation(g("symmetric:4")).unwrap();
        let t34 = Representation::trivial(p4.group().clone())
            .direct_sum(&Representation::trivial(p4.group().clone()))
            .unwrap()
            .direct_sum(&Representation::trivial(p4.group().clone()))
            .unwrap()
            .tensor(&p4)
            .unwrap();
        assert_eq!(t34.dim(), 12);
    }

    #[test]
    fn projector_examples() {
        let triv = Representation::trivial(g("cyclic:3"));
        assert_eq!(
            triv.invariant_projector(),
            CMatrix::from_element(1, 1, c(1.0))
        );
        let sign = sign_rep_z2();
        assert!(linalg::max_abs(&sign.invariant_projector()) == 0.0);
        let p = Representation::permutation(g("symmetric:3")).unwrap();
        let pi = p.invariant_projector();
        assert!(linalg::max_abs(&(pi.clone() - CMatrix::from_element(3, 3, c(1.0 / 3.0)))) < 1e-15);
        assert_eq!(p.invariant_dimension().unwrap(), 1);
        assert!((linalg::trace(&pi) - c(1.0)).norm() < 1e-12);
        assert!(linalg::max_abs(&(&pi * &pi - &pi)) < 1e-12);
        for e in 0..6 {
            assert!(linalg::max_abs(&(&pi * p.matrix(e) - &pi)) < 1e-12);
            assert!(linalg::max_abs(&(p.matrix(e) * &pi - &pi)) < 1e-12);
        }
    }

    #[test]
    fn sym_power_small_cases() {
        let sign = sign_rep_z2();
        let s0 = sign.sym_power(0, DEFAULT_SYM_POWER_CAP).unwrap();
        assert_eq!(s0.dim(), 1);
        let s2 = sign.sym_power(2, DEFAULT_SYM_POWER_CAP).unwrap();
        assert_eq!(s2.matrix(1)[(0, 0)], c(1.0));
        let p = Representation::permutation(g("symmetric:3")).unwrap();
        let s1 = p.sym_power(1, DEFAULT_SYM_POWER_CAP).unwrap();
        assert_eq!(s1.character().unwrap(), p.character().unwrap());
        assert!(matches!(p.sym_power(30, 100), Err(Error::SizeLimit { .. })));
    }

    /// Brute-force oracle: Sym^2 of the S_3 permutation representation.
    #[test]
    fn sym2_of_s3_permutation_matches_explicit_traces() {
        let p = Representation::permutation(g("symmetric:3")).unwrap();
        let s2 = p.sym_power(2, DEFAULT_SYM_POWER_CAP).unwrap();
        assert_eq!(s2.dim(), 6);
        s2.validate().unwrap();
        let chi = s2.character().unwrap();
        let expect = [6.0, 2.0, 0.0];
        for k in 0..3 {
            assert!(close(chi.values[k], expect[k]), "{:?}", chi.values);
        }
        let rec = sym_power_character(&p.character().unwrap(), p.group(), 2);
        for k in 0..3 {
            assert!(close(rec.values[k], expect[k]));
        }
    }

    #[test]
    fn sym_power_recursion_matches_explicit_for_dense_reps() {
        // a genuinely complex representation: the faithful character of C_5 plus its square
        let c5 = g("cyclic:5");
        let w = |k: usize| C64::from_polar(1.0, 2.0 * PI * k as f64 / 5.0);
        let mats = (0..5)
            .map(|k| {
                let mut m = CMatrix::zeros(2, 2);
                m[(0, 0)] = w(k);
                m[(1, 1)] = w(2 * k);
                m
            })
            .collect();
        let rho = Representation::from_matrices(c5.clone(), "w+w2", mats).unwrap();
        let chi = rho.character().unwrap();
        let chars = sym_power_characters(&chi, &c5, 4);
        for (k, expect) in chars.iter().enumerate() {
            let explicit = rho.sym_power(k, DEFAULT_SYM_POWER_CAP).unwrap();
            explicit.validate().unwrap();
            let got = explicit.character().unwrap();
            for (a, b) in got.values.iter().zip(&expect.values) {
                assert!((a - b).norm() < 1e-8);
            }
        }
        let d4 = Representation::permutation(g("symmetric:4")).unwrap();
        let s3 = d4.sym_power(3, DEFAULT_SYM_POWER_CAP).unwrap();
        s3.validate().unwrap();
        let rec = sym_power_character(&d4.character().unwrap(), d4.group(), 3);
        for (a, b) in s3.character().unwrap().values.iter().zip(&rec.values) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn eigen_profiles() {
        let sign = sign_rep_z2();
        let prof = sign.eigen_profile().unwrap();
        assert_eq!(
            prof.lambdas,
            vec![RootOfUnity::new(0, 1), RootOfUnity::new(1, 2)]
        );
        assert_eq!(prof.max_mult, vec![1, 1]);
        let reg = Representation::regular(g("cyclic:2")).unwrap();
        assert_eq!(reg.eigen_profile().unwrap().max_mult, vec![2, 1]);
        // a d-cycle has every d-th root of unity once
        let s5 = g("symmetric:5");
        let p5 = Representation::permutation(s5.clone()).unwrap();
        let cycle = (0..s5.order()).find(|&x| s5.element_order(x) == 5).unwrap();
        let eig = unitary_eigenvalues(&p5.matrix(cycle));
        for p in 0..5 {
            let target = RootOfUnity::new(p, 5).value();
            assert!(eig.iter().any(|z| (z - target).norm() < 1e-9));
        }
    }

    #[test]
    fn dense_and_character_profiles_agree() {
        for spec in ["symmetric:4", "dihedral:5", "cyclic:6", "signflip:3"] {
            let reg = Representation::regular(g(spec)).unwrap();
            assert_eq!(
                reg.eigen_profile_dense().unwrap(),
                reg.eigen_profile_from_character().unwrap(),
                "{spec}"
            );
        }
        let p = Representation::permutation(g("symmetric:5")).unwrap();
        assert_eq!(
            p.eigen_profile_dense().unwrap(),
            p.eigen_profile_from_character().unwrap()
        );
    }

    #[test]
    fn k_bound_examples() {
        let s3 = Representation::permutation(g("symmetric:3")).unwrap();
        assert_eq!(s3.k_bound().unwrap(), 5);
        let s4 = Representation::permutation(g("symmetric:4")).unwrap();
        assert_eq!(s4.k_bound().unwrap(), 9);
        assert_eq!(sign_rep_z2().k_bound().unwrap(), 1);
    }

    #[test]
    fn k_bound_monotone_under_direct_sum() {
        let s3 = g("symmetric:3");
        let p = Representation::permutation(s3.clone()).unwrap();
        let reg = Representation::regular(s3.clone()).unwrap();
        let k = p.k_bound().unwrap();
        assert!(p.direct_sum(&reg).unwrap().k_bound().unwrap() >= k);
        assert!(p.direct_sum(&p).unwrap().k_bound().unwrap() >= k);
    }

    #[test]
    fn text_round_trip() {
        let rho = Representation::permutation(g("symmetric:3")).unwrap();
        let text = rho.to_text();
        assert!(text.starts_with("rep permutation(symmetric:3) 3 6"));
        let back = Representation::from_text(rho.group().clone(), &text).unwrap();
        for e in 0..6 {
            assert_eq!(back.matrix(e), rho.matrix(e));
        }
    }
}
