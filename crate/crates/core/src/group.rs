//! Finite groups on dense element indices.
//!
//! Every group stores its elements as indices `0..order`, with the identity
//! pinned at index 0. Built-in families multiply in closed form, so large
//! groups (up to 2^16 sign patterns or 8! permutations) never materialize a
//! quadratic table; custom groups carry an explicit multiplication table.
//!
//! Element ordering per family:
//! - cyclic `n`: by residue.
//! - sign flip `d`: by binary value; label character `i` is coordinate `i`,
//!   most significant bit first.
//! - dihedral `n`: rotations `r^k` (indices `0..n`) then reflections `r^k s`.
//! - symmetric `d`: lexicographic one-line notation.
//! - product `G x H`: `(a, b)` at index `a * |H| + b`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_SIGN_FLIP_DIM: usize = 16;
pub const MAX_SYMMETRIC_DEGREE: usize = 8;
/// Orders above this are checked for associativity on random triples only.
pub const EXHAUSTIVE_CHECK_ORDER: usize = 512;
/// Largest order whose multiplication table is written out as text.
pub const MAX_TABLE_EXPORT_ORDER: usize = 4096;
const SAMPLED_TRIPLES: usize = 20_000;

/// Family tag of a group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cyclic(usize),
    SignFlip(usize),
    Dihedral(usize),
    Symmetric(usize),
    Product(Box<Family>, Box<Family>),
    Custom,
}

impl Family {
    /// Parses a group spec such as `cyclic:100`, `signflip:6`, `dihedral:7`,
    /// `symmetric:4` or a product `cyclic:2*dihedral:3` (left associative,
    /// parentheses allowed).
    pub fn parse(spec: &str) -> Result<Family> {
        let mut parser = SpecParser {
            src: spec.as_bytes(),
            pos: 0,
        };
        let family = parser.product()?;
        if parser.pos != parser.src.len() {
            return Err(Error::usage(format!(
                "trailing input in group spec `{spec}`"
            )));
        }
        Ok(family)
    }

    fn from_name(name: &str, param: usize) -> Result<Family> {
        match name {
            "cyclic" => Ok(Family::Cyclic(param)),
            "signflip" | "sign_flip" => Ok(Family::SignFlip(param)),
            "dihedral" => Ok(Family::Dihedral(param)),
            "symmetric" => Ok(Family::Symmetric(param)),
            other => Err(Error::usage(format!("unknown group family `{other}`"))),
        }
    }

    /// Family keyword used in the text serialization header.
    pub fn keyword(&self) -> &'static str {
        match self {
            Family::Cyclic(_) => "cyclic",
            Family::SignFlip(_) => "signflip",
            Family::Dihedral(_) => "dihedral",
            Family::Symmetric(_) => "symmetric",
            Family::Product(..) => "product",
            Family::Custom => "custom",
        }
    }

    fn header_params(&self) -> String {
        match self {
            Family::Cyclic(p)
            | Family::SignFlip(p)
            | Family::Dihedral(p)
            | Family::Symmetric(p) => p.to_string(),
            Family::Product(..) => self.to_string(),
            Family::Custom => "-".to_string(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Product(a, b) => {
                write!(f, "{a}*")?;
                if matches!(**b, Family::Product(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Family::Custom => write!(f, "custom"),
            other => {
                let p = match other {
                    Family::Cyclic(p)
                    | Family::SignFlip(p)
                    | Family::Dihedral(p)
                    | Family::Symmetric(p) => p,
                    _ => unreachable!(),
                };
                write!(f, "{}:{p}", other.keyword())
            }
        }
    }
}

struct SpecParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl SpecParser<'_> {
    fn product(&mut self) -> Result<Family> {
        let mut left = self.atom()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let right = self.atom()?;
            left = Family::Product(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn atom(&mut self) -> Result<Family> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let inner = self.product()?;
            if self.peek() != Some(b')') {
                return Err(Error::usage("unbalanced parentheses in group spec"));
            }
            self.pos += 1;
            return Ok(inner);
        }
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b':')
        {
            self.pos += 1;
        }
        let token = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        let (name, param) = token.split_once(':').ok_or_else(|| {
            Error::usage(format!("group spec `{token}` must look like family:param"))
        })?;
        let param: usize = param
            .parse()
            .map_err(|_| Error::usage(format!("invalid group parameter `{param}`")))?;
        Family::from_name(name, param)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }
}

/// Multiplication law behind a group.
#[derive(Clone, Debug)]
enum Law {
    Cyclic(usize),
    SignFlip,
    Dihedral(usize),
    Symmetric {
        degree: usize,
        perms: Vec<[u8; MAX_SYMMETRIC_DEGREE]>,
    },
    Product {
        left: Arc<Group>,
        right: Arc<Group>,
    },
    Table {
        mult: Vec<u32>,
        inv: Vec<u32>,
    },
}

/// A finite group on element indices `0..order` with identity 0.
#[derive(Clone)]
pub struct Group {
    family: Family,
    order: usize,
    law: Law,
    generators: Vec<usize>,
    classes: OnceLock<ConjugacyPartition>,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Group")
            .field("family", &self.family)
            .field("order", &self.order)
            .finish()
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        if self.family != other.family || self.order != other.order {
            return false;
        }
        match (&self.law, &other.law) {
            (Law::Table { mult: a, .. }, Law::Table { mult: b, .. }) => a == b,
            _ => true,
        }
    }
}

/// Conjugacy classes of a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugacyPartition {
    /// Element indices per class, each sorted; class 0 is `{identity}`.
    pub classes: Vec<Vec<usize>>,
    /// Smallest element of each class.
    pub representatives: Vec<usize>,
    /// Class index of every element.
    pub class_of: Vec<usize>,
}

impl ConjugacyPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn perm_rank(p: &[u8]) -> usize {
    let d = p.len();
    let mut rank = 0;
    for i in 0..d {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        rank = rank * (d - i) + smaller;
    }
    rank
}

fn perm_unrank(mut rank: usize, d: usize) -> [u8; MAX_SYMMETRIC_DEGREE] {
    let mut digits = [0usize; MAX_SYMMETRIC_DEGREE];
    for i in (0..d).rev() {
        let base = d - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<u8> = (0..d as u8).collect();
    let mut out = [0u8; MAX_SYMMETRIC_DEGREE];
    for i in 0..d {
        out[i] = pool.remove(digits[i]);
    }
    out
}

impl Group {
    /// Builds a group from a family tag.
    pub fn build(family: &Family) -> Result<Group> {
        let group = match *family {
            Family::Cyclic(n) => {
                if n == 0 {
                    return Err(Error::usage("cyclic group needs n >= 1"));
                }
                Group::with_law(
                    family.clone(),
                    n,
                    Law::Cyclic(n),
                    if n > 1 { vec![1] } else { vec![] },
                )
            }
            Family::SignFlip(d) => {
                if d == 0 {
                    return Err(Error::usage("sign-flip group needs d >= 1"));
                }
                if d > MAX_SIGN_FLIP_DIM {
                    return Err(Error::SizeLimit {
                        what: "sign-flip dimension",
                        value: d,
                        cap: MAX_SIGN_FLIP_DIM,
                        hint: "",
                    });
                }
                let gens = (0..d).map(|i| 1usize << i).collect();
                Group::with_law(family.clone(), 1 << d, Law::SignFlip, gens)
            }
            Family::Dihedral(n) => {
                if n < 3 {
                    return Err(Error::usage("dihedral group needs n >= 3"));
                }
                Group::with_law(family.clone(), 2 * n, Law::Dihedral(n), vec![1, n])
            }
            Family::Symmetric(d) => {
                if d == 0 {
                    return Err(Error::usage("symmetric group needs d >= 1"));
                }
                if d > MAX_SYMMETRIC_DEGREE {
                    return Err(Error::SizeLimit {
                        what: "symmetric degree",
                        value: d,
                        cap: MAX_SYMMETRIC_DEGREE,
                        hint: "",
                    });
                }
                let order = factorial(d);
                let perms: Vec<_> = (0..order).map(|r| perm_unrank(r, d)).collect();
                let mut gens = Vec::new();
                for i in 0..d.saturating_sub(1) {
                    let mut p: Vec<u8> = (0..d as u8).collect();
                    p.swap(i, i + 1);
                    gens.push(perm_rank(&p));
                }
                Group::with_law(
                    family.clone(),
                    order,
                    Law::Symmetric { degree: d, perms },
                    gens,
                )
            }
            Family::Product(ref a, ref b) => {
                let left = Arc::new(Group::build(a)?);
                let right = Arc::new(Group::build(b)?);
                Group::product(left, right)?
            }
            Family::Custom => {
                return Err(Error::usage(
                    "custom groups are built from a multiplication table",
                ));
            }
        };
        group.check_axioms()?;
        Ok(group)
    }

    /// Parses a spec string and builds the group.
    pub fn from_spec(spec: &str) -> Result<Group> {
        Group::build(&Family::parse(spec)?)
    }

    /// Direct product of two groups.
    pub fn product(left: Arc<Group>, right: Arc<Group>) -> Result<Group> {
        let order = left
            .order
            .checked_mul(right.order)
            .filter(|&o| o <= 1 << 20)
            .ok_or(Error::SizeLimit {
                what: "product order",
                value: left.order.saturating_mul(right.order),
                cap: 1 << 20,
                hint: "",
            })?;
        let h = right.order;
        let mut gens: Vec<usize> = left.generators.iter().map(|&a| a * h).collect();
        gens.extend(right.generators.iter().copied());
        let family = Family::Product(
            Box::new(left.family.clone()),
            Box::new(right.family.clone()),
        );
        Ok(Group::with_law(
            family,
            order,
            Law::Product { left, right },
            gens,
        ))
    }

    /// Builds a custom group from a row-major multiplication table.
    pub fn from_table(order: usize, mult: Vec<usize>) -> Result<Group> {
        if order == 0 || mult.len() != order * order {
            return Err(Error::usage("multiplication table must be order x order"));
        }
        if mult.iter().any(|&x| x >= order) {
            return Err(Error::usage("multiplication table entry out of range"));
        }
        let mut inv = vec![u32::MAX; order];
        for a in 0..order {
            if let Some(b) = (0..order).find(|&b| mult[a * order + b] == 0) {
                inv[a] = b as u32;
            } else {
                return Err(Error::usage(format!("element {a} has no inverse")));
            }
        }
        let mult: Vec<u32> = mult.into_iter().map(|x| x as u32).collect();
        let law = Law::Table { mult, inv };
        let mut group = Group::with_law(Family::Custom, order, law, Vec::new());
        group.generators = group.greedy_generators();
        group.check_axioms()?;
        Ok(group)
    }

    fn with_law(family: Family, order: usize, law: Law, generators: Vec<usize>) -> Group {
        Group {
            family,
            order,
            law,
            generators,
            classes: OnceLock::new(),
        }
    }

    fn greedy_generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut covered = vec![false; self.order];
        covered[0] = true;
        for g in 0..self.order {
            if !covered[g] {
                gens.push(g);
                for h in self.closure_unchecked(&gens) {
                    covered[h] = true;
                }
            }
        }
        gens
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// A generating set used for orbit computations.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Factor groups of a direct product.
    pub fn factors(&self) -> Option<(&Arc<Group>, &Arc<Group>)> {
        match &self.law {
            Law::Product { left, right } => Some((left, right)),
            _ => None,
        }
    }

    /// Product `a * b`.
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.law {
            Law::Cyclic(n) => (a + b) % n,
            Law::SignFlip => a ^ b,
            Law::Dihedral(n) => {
                let (ka, fa) = (a % n, a / n);
                let (kb, fb) = (b % n, b / n);
                let k = if fa == 0 {
                    (ka + kb) % n
                } else {
                    (ka + n - kb) % n
                };
                (fa ^ fb) * n + k
            }
            Law::Symmetric { degree, perms } => {
                let (pa, pb) = (&perms[a], &perms[b]);
                let mut c = [0u8; MAX_SYMMETRIC_DEGREE];
                for i in 0..*degree {
                    c[i] = pa[pb[i] as usize];
                }
                perm_rank(&c[..*degree])
            }
            Law::Product { left, right } => {
                let h = right.order;
                left.mul(a / h, b / h) * h + right.mul(a % h, b % h)
            }
            Law::Table { mult, .. } => mult[a * self.order + b] as usize,
        }
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        match &self.law {
            Law::Cyclic(n) => (n - a) % n,
            Law::SignFlip => a,
            Law::Dihedral(n) => {
                if a < *n {
                    (n - a) % n
                } else {
                    a
                }
            }
            Law::Symmetric { degree, perms } => {
                let p = &perms[a];
                let mut q = [0u8; MAX_SYMMETRIC_DEGREE];
                for i in 0..*degree {
                    q[p[i] as usize] = i as u8;
                }
                perm_rank(&q[..*degree])
            }
            Law::Product { left, right } => {
                let h = right.order;
                left.inv(a / h) * h + right.inv(a % h)
            }
            Law::Table { inv, .. } => inv[a] as usize,
        }
    }

    /// `g^k` for `k >= 0`.
    pub fn pow(&self, g: usize, k: usize) -> usize {
        let mut acc = 0;
        let mut base = g;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Order of the element `g`.
    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// One-line notation of a permutation element (symmetric family only).
    pub fn permutation(&self, g: usize) -> Option<Vec<usize>> {
        match &self.law {
            Law::Symmetric { degree, perms } => {
                Some(perms[g][..*degree].iter().map(|&x| x as usize).collect())
            }
            _ => None,
        }
    }

    /// Human-readable element name.
    pub fn label(&self, g: usize) -> String {
        match (&self.law, &self.family) {
            (Law::Cyclic(_), _) => g.to_string(),
            (Law::SignFlip, Family::SignFlip(d)) => format!("{:0width$b}", g, width = *d),
            (Law::Dihedral(n), _) => {
                if g < *n {
                    format!("r{g}")
                } else {
                    format!("r{}s", g - n)
                }
            }
            (Law::Symmetric { degree, perms }, _) => perms[g][..*degree]
                .iter()
                .map(|x| (x + 1).to_string())
                .collect::<Vec<_>>()
                .join(""),
            (Law::Product { left, right }, _) => {
                format!(
                    "({},{})",
                    left.label(g / right.order),
                    right.label(g % right.order)
                )
            }
            _ => g.to_string(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.order).map(|g| self.label(g)).collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.generators.iter().all(|&a| {
            self.generators
                .iter()
                .all(|&b| self.mul(a, b) == self.mul(b, a))
        })
    }

    /// Checks identity, inverse, Latin-square and associativity invariants.
    ///
    /// Associativity is exhaustive up to [`EXHAUSTIVE_CHECK_ORDER`] and uses
    /// random triples above it; the Latin-square check follows the same split.
    pub fn check_axioms(&self) -> Result<()> {
        let n = self.order;
        for a in 0..n {
            if self.mul(0, a) != a || self.mul(a, 0) != a {
                return Err(Error::numerical(format!(
                    "index 0 is not an identity for {a}"
                )));
            }
            if self.mul(a, self.inv(a)) != 0 || self.mul(self.inv(a), a) != 0 {
                return Err(Error::numerical(format!("inverse table wrong at {a}")));
            }
        }
        if n <= EXHAUSTIVE_CHECK_ORDER {
            let mut seen = vec![usize::MAX; n];
            for a in 0..n {
                for b in 0..n {
                    let ab = self.mul(a, b);
                    if seen[ab] == a {
                        return Err(Error::numerical(format!("row {a} is not a permutation")));
                    }
                    seen[ab] = a;
                }
            }
            let mut seen = vec![usize::MAX; n];
            for b in 0..n {
                for a in 0..n {
                    let ab = self.mul(a, b);
                    if seen[ab] == b {
                        return Err(Error::numerical(format!("column {b} is not a permutation")));
                    }
                    seen[ab] = b;
                }
            }
            for a in 0..n {
                for b in 0..n {
                    let ab = self.mul(a, b);
                    for c in 0..n {
                        if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                            return Err(Error::numerical(format!(
                                "associativity fails at ({a},{b},{c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a550c);
            for _ in 0..SAMPLED_TRIPLES {
                let (a, b, c) = (
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                );
                if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                    return Err(Error::numerical(format!(
                        "associativity fails at ({a},{b},{c})"
                    )));
                }
                // Left multiplication by a is injective iff a*b == a*c implies b == c.
                if b != c && self.mul(a, b) == self.mul(a, c) {
                    return Err(Error::numerical(format!("row {a} is not a permutation")));
                }
                if b != c && self.mul(b, a) == self.mul(c, a) {
                    return Err(Error::numerical(format!("column {a} is not a permutation")));
                }
            }
        }
        Ok(())
    }

    /// Conjugacy classes, computed once and cached.
    pub fn conjugacy_classes(&self) -> &ConjugacyPartition {
        self.classes.get_or_init(|| self.compute_classes())
    }

    fn compute_classes(&self) -> ConjugacyPartition {
        let n = self.order;
        let mut class_of = vec![usize::MAX; n];
        let mut classes = Vec::new();
        let gens: Vec<(usize, usize)> = self.generators.iter().map(|&s| (s, self.inv(s))).collect();
        for g in 0..n {
            if class_of[g] != usize::MAX {
                continue;
            }
            let id = classes.len();
            class_of[g] = id;
            let mut members = vec![g];
            let mut head = 0;
            while head < members.len() {
                let x = members[head];
                head += 1;
                for &(s, s_inv) in &gens {
                    let y = self.mul(self.mul(s, x), s_inv);
                    if class_of[y] == usize::MAX {
                        class_of[y] = id;
                        members.push(y);
                    }
                }
            }
            members.sort_unstable();
            classes.push(members);
        }
        let representatives = classes.iter().map(|c| c[0]).collect();
        ConjugacyPartition {
            classes,
            representatives,
            class_of,
        }
    }

    /// Smallest subgroup containing `set`.
    pub fn closure(&self, set: &[usize]) -> Result<Vec<usize>> {
        if set.is_empty() {
            return Err(Error::usage("closure needs a nonempty element set"));
        }
        if let Some(&bad) = set.iter().find(|&&g| g >= self.order) {
            return Err(Error::usage(format!("element {bad} out of range")));
        }
        Ok(self.closure_unchecked(set))
    }

    fn closure_unchecked(&self, set: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.order];
        inside[0] = true;
        let mut members = vec![0];
        let mut head = 0;
        while head < members.len() {
            let x = members[head];
            head += 1;
            for &s in set {
                let y = self.mul(x, s);
                if !inside[y] {
                    inside[y] = true;
                    members.push(y);
                }
            }
        }
        members.sort_unstable();
        members
    }

    /// `n` i.i.d. uniform element draws from a seeded generator.
    pub fn sample_uniform(&self, n: usize, seed: u64) -> Result<Vec<usize>> {
        if n == 0 {
            return Err(Error::usage("sample size must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.sample_with(n, &mut rng))
    }

    pub(crate) fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| rng.random_range(0..self.order)).collect()
    }

    /// Writes `group <family> <params> <order>` followed by the table rows.
    pub fn to_text(&self) -> Result<String> {
        let n = self.order;
        if n > MAX_TABLE_EXPORT_ORDER {
            return Err(Error::SizeLimit {
                what: "group order for table export",
                value: n,
                cap: MAX_TABLE_EXPORT_ORDER,
                hint: "",
            });
        }
        let mut out = format!(
            "group {} {} {}\n",
            self.family.keyword(),
            self.family.header_params(),
            n
        );
        let mut row = String::new();
        for a in 0..n {
            row.clear();
            for b in 0..n {
                if b > 0 {
                    row.push(' ');
                }
                row.push_str(&self.mul(a, b).to_string());
            }
            out.push_str(&row);
            out.push('\n');
        }
        Ok(out)
    }

    /// Parses the format written by [`Group::to_text`].
    pub fn from_text(text: &str) -> Result<Group> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty group file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "group" {
            return Err(Error::Parse(format!("bad group header `{header}`")));
        }
        let order: usize = fields[3]
            .parse()
            .map_err(|_| Error::Parse(format!("bad order `{}`", fields[3])))?;
        let mut mult = Vec::with_capacity(order * order);
        for line in lines {
            for tok in line.split_whitespace() {
                mult.push(
                    tok.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad table entry `{tok}`")))?,
                );
            }
        }
        if mult.len() != order * order {
            return Err(Error::Parse(format!(
                "expected {} table entries, found {}",
                order * order,
                mult.len()
            )));
        }
        let family = match fields[1] {
            "custom" => return Group::from_table(order, mult),
            "product" => Family::parse(fields[2])?,
            name => {
                let p = fields[2]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad family parameter `{}`", fields[2])))?;
                Family::from_name(name, p)?
            }
        };
        let group = Group::build(&family)?;
        if group.order != order {
            return Err(Error::Parse(format!(
                "header order {order} does not match {family}"
            )));
        }
        for a in 0..order {
            for b in 0..order {
                if group.mul(a, b) != mult[a * order + b] {
                    return Err(Error::Parse(format!(
                        "table disagrees with {family} at ({a},{b})"
                    )));
                }
            }
        }
        Ok(group)
    }
}
